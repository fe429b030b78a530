use hybrid_bci::decoder::{decide, decide_ungated, map_to_command, CommandSink, Dispatcher, FeedbackKind, MockRobot, SinkError};
use hybrid_bci::decoder::CommandMessage;
use hybrid_bci::spectral::{BandPower, SsvepFeature};
use hybrid_bci::types::{Command, Decision, MarkerCode, StimulusConfig};
use proptest::prelude::*;

fn features(config: &StimulusConfig, winner_hz: f64) -> SsvepFeature {
    SsvepFeature {
        bands: config
            .leds
            .iter()
            .map(|l| BandPower { frequency_hz: l.frequency_hz, peak_power: if l.frequency_hz == winner_hz { 10.0 } else { 1.0 } })
            .collect(),
        window_us: (0, 2_000_000),
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

#[test]
fn mapping_holds_for_every_table_order() {
    let base = StimulusConfig::default();
    let expected = [(7.0, Command::Forward), (8.0, Command::Right), (9.0, Command::Backward), (10.0, Command::Left)];
    let orders = permutations(&[0, 1, 2, 3]);
    assert_eq!(orders.len(), 24);
    for order in orders {
        let mut config = base.clone();
        config.leds = order.iter().map(|&i| base.leds[i].clone()).collect();
        for (hz, cmd) in expected {
            assert_eq!(map_to_command(hz, &config).unwrap(), cmd);
            let led = config.by_frequency(hz).unwrap();
            let d = decide(&features(&config, hz), Some(led.marker), &config, 0).unwrap();
            assert_eq!(d.command, Some(cmd));
            for other in config.leds.iter().filter(|l| l.frequency_hz != hz) {
                let d = decide(&features(&config, hz), Some(other.marker), &config, 0).unwrap();
                assert_eq!(d.command, None);
                assert!(!d.agreement);
            }
        }
    }
    assert!(map_to_command(11.0, &base).is_err());
}

fn marker_strategy() -> impl Strategy<Value = Option<MarkerCode>> {
    prop_oneof![
        Just(None),
        Just(Some(MarkerCode::O)),
        Just(Some(MarkerCode::P)),
        Just(Some(MarkerCode::Q)),
        Just(Some(MarkerCode::R)),
    ]
}

proptest! {
    #[test]
    fn command_iff_agreement(powers in proptest::collection::vec(0.0f64..100.0, 4), p300 in marker_strategy()) {
        let config = StimulusConfig::default();
        let f = SsvepFeature {
            bands: config.leds.iter().zip(&powers).map(|(l, &peak_power)| BandPower { frequency_hz: l.frequency_hz, peak_power }).collect(),
            window_us: (0, 2_000_000),
        };
        let d = decide(&f, p300, &config, 5).unwrap();
        prop_assert_eq!(d.command.is_some(), d.agreement);
        let u = decide_ungated(&f, p300, &config, 5).unwrap();
        prop_assert!(u.command.is_some());
        prop_assert_eq!(u.ssvep_winner_hz, d.ssvep_winner_hz);
        if d.agreement {
            prop_assert_eq!(u.command, d.command);
        }
    }

    #[test]
    fn sequence_numbers_count_sends(commands in proptest::collection::vec(proptest::option::of(0usize..4), 0..40)) {
        let all = [Command::Forward, Command::Right, Command::Backward, Command::Left];
        let mut robot = MockRobot::default();
        let mut dispatcher = Dispatcher::new();
        let mut expected = 0;
        for (i, c) in commands.iter().enumerate() {
            let decision = match c {
                Some(k) => Decision { command: Some(all[*k]), agreement: true, decided_at_us: i as i64, ..Decision::abstain_none() },
                None => Decision::abstain_none(),
            };
            let (msg, fb) = dispatcher.dispatch(&decision, &mut robot);
            prop_assert_eq!(msg.is_some(), c.is_some());
            prop_assert_eq!(fb.kind == FeedbackKind::Success, c.is_some());
            prop_assert_eq!(fb.pulse_onsets_ms().len(), if c.is_some() { 1 } else { 2 });
            if let Some(m) = msg {
                prop_assert_eq!(m.sequence, expected);
                expected += 1;
            }
        }
        prop_assert_eq!(robot.received.len() as u64, expected);
    }
}

trait AbstainNone {
    fn abstain_none() -> Decision;
}

impl AbstainNone for Decision {
    fn abstain_none() -> Decision {
        Decision {
            ssvep_winner_hz: Some(7.0),
            p300_winner: None,
            agreement: false,
            command: None,
            decided_at_us: 0,
            abstain_reason: None,
        }
    }
}

struct Unplugged;

impl CommandSink for Unplugged {
    fn send(&mut self, _: &CommandMessage) -> Result<(), SinkError> {
        Err(SinkError("robot unreachable".into()))
    }
}

#[test]
fn transport_failure_yields_failure_feedback() {
    let mut dispatcher = Dispatcher::new();
    let d = Decision { command: Some(Command::Left), agreement: true, ..Decision::abstain_none() };
    let (msg, fb) = dispatcher.dispatch(&d, &mut Unplugged);
    assert!(msg.is_none());
    assert_eq!(fb.kind, FeedbackKind::Failure);
    assert_eq!(dispatcher.transport_errors().len(), 1);
    let (msg, _) = dispatcher.dispatch(&d, &mut MockRobot::default());
    assert_eq!(msg.unwrap().sequence, 1);
}
