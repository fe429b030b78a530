//! Streams a simulated session through the decoder frame by frame and
//! dispatches each decision to a mock robot, printing the feedback the
//! user would hear.
//!
//!     cargo run --example closed_loop

use hybrid_bci::decoder::FeedbackKind;
use hybrid_bci::prelude::*;

fn main() {
    let config = StimulusConfig::default();
    let attended = vec![0, 1, 2, 3, 2, 0];
    let synth = SynthConfig { attended: attended.clone(), seed: 3, noise_sigma_uv: 3.0, ..Default::default() };
    let session = simulate_session(&config, &synth).unwrap();

    let mut decoder = StreamingDecoder::new(config.clone(), DecoderOptions::default()).unwrap();
    let mut robot = MockRobot::default();
    let mut dispatcher = Dispatcher::new();
    let mut markers = session.markers.iter().peekable();

    let mut handle = |d: EpochDecision, robot: &mut MockRobot| {
        let (sent, feedback) = dispatcher.dispatch(&d.decision, robot);
        let beeps = match feedback.kind {
            FeedbackKind::Success => "beep",
            FeedbackKind::Failure => "beep-beep",
        };
        println!(
            "t={:>6} ms epoch {} wanted {:<8} ssvep {:?} p300 {:?} -> {:<10} {beeps}",
            d.decision.decided_at_us / 1000,
            d.epoch_index,
            session.intents[d.epoch_index as usize].command.to_string(),
            d.decision.ssvep_winner_hz,
            d.decision.p300_winner.map(|c| c.as_char()),
            sent.map_or(d.decision.command_label(), |m| m.wire_line().trim_end().to_string()),
        );
    };

    for frame in &session.frames {
        while let Some(m) = markers.next_if(|m| m.t_us <= frame.t_us) {
            decoder.push_marker(*m).unwrap();
        }
        for d in decoder.push_frame(frame).unwrap() {
            handle(d, &mut robot);
        }
    }
    for d in decoder.finish().unwrap() {
        handle(d, &mut robot);
    }
    println!("robot received {} of {} commands", robot.received.len(), attended.len());
}
