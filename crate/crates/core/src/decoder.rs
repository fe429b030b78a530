//! Fusion of SSVEP and P300 evidence into robot commands, plus the command
//! sink seam and auditory feedback events.

use std::io::Write;

use thiserror::Error;

use crate::spectral::{ssvep_argmax, SsvepFeature};
use crate::types::{Command, Decision, MarkerCode, StimulusConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("unknown frequency {0} Hz")]
    UnknownFrequency(f64),
    #[error("P300 winner '{0}' is not a configured marker")]
    UnknownMarker(MarkerCode),
    #[error("SSVEP features are empty")]
    NoFeatures,
}

/// LED table lookup from flicker frequency to command.
pub fn map_to_command(frequency_hz: f64, config: &StimulusConfig) -> Result<Command, DecodeError> {
    config
        .by_frequency(frequency_hz)
        .map(|led| led.command)
        .ok_or(DecodeError::UnknownFrequency(frequency_hz))
}

fn ssvep_and_p300(
    features: &SsvepFeature,
    p300_winner: Option<MarkerCode>,
    config: &StimulusConfig,
) -> Result<(f64, Command, bool), DecodeError> {
    if let Some(code) = p300_winner {
        config.by_marker(code).ok_or(DecodeError::UnknownMarker(code))?;
    }
    let winner = ssvep_argmax(features).ok_or(DecodeError::NoFeatures)?;
    let led = config
        .by_frequency(winner.frequency_hz)
        .ok_or(DecodeError::UnknownFrequency(winner.frequency_hz))?;
    Ok((winner.frequency_hz, led.command, p300_winner == Some(led.marker)))
}

/// Hybrid rule: the SSVEP winner's command is issued only when the P300
/// winner is that LED's marker; anything else abstains.
pub fn decide(
    features: &SsvepFeature,
    p300_winner: Option<MarkerCode>,
    config: &StimulusConfig,
    decided_at_us: i64,
) -> Result<Decision, DecodeError> {
    let (hz, command, agreement) = ssvep_and_p300(features, p300_winner, config)?;
    Ok(Decision {
        ssvep_winner_hz: Some(hz),
        p300_winner,
        agreement,
        command: agreement.then_some(command),
        decided_at_us,
        abstain_reason: None,
    })
}

/// SSVEP-only diagnostic: always issues the SSVEP winner's command.
pub fn decide_ungated(
    features: &SsvepFeature,
    p300_winner: Option<MarkerCode>,
    config: &StimulusConfig,
    decided_at_us: i64,
) -> Result<Decision, DecodeError> {
    let (hz, command, agreement) = ssvep_and_p300(features, p300_winner, config)?;
    Ok(Decision {
        ssvep_winner_hz: Some(hz),
        p300_winner,
        agreement,
        command: Some(command),
        decided_at_us,
        abstain_reason: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    Success,
    Failure,
}

/// Auditory feedback: one 1 kHz, 200 ms pulse on success, two pulses 100 ms
/// apart on failure. Rendering the tone is left to the consumer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackEvent {
    pub kind: FeedbackKind,
    pub pulses: u8,
    pub pulse_frequency_hz: f64,
    pub pulse_duration_ms: u32,
    pub inter_pulse_gap_ms: Option<u32>,
    pub t_us: i64,
}

impl FeedbackEvent {
    pub fn success(t_us: i64) -> Self {
        Self {
            kind: FeedbackKind::Success,
            pulses: 1,
            pulse_frequency_hz: 1000.0,
            pulse_duration_ms: 200,
            inter_pulse_gap_ms: None,
            t_us,
        }
    }

    pub fn failure(t_us: i64) -> Self {
        Self {
            kind: FeedbackKind::Failure,
            pulses: 2,
            pulse_frequency_hz: 1000.0,
            pulse_duration_ms: 200,
            inter_pulse_gap_ms: Some(100),
            t_us,
        }
    }

    /// Pulse onsets relative to the event, ms.
    pub fn pulse_onsets_ms(&self) -> Vec<u32> {
        (0..u32::from(self.pulses))
            .map(|i| i * (self.pulse_duration_ms + self.inter_pulse_gap_ms.unwrap_or(0)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandMessage {
    pub command: Command,
    pub sequence: u64,
    pub issued_at_us: i64,
}

impl CommandMessage {
    /// `SEQ,COMMAND\n`
    pub fn wire_line(&self) -> String {
        format!("{},{}\n", self.sequence, self.command)
    }
}

#[derive(Debug, Error)]
#[error("command transport failed: {0}")]
pub struct SinkError(pub String);

/// Destination for robot commands. `send` returns once receipt is acknowledged.
pub trait CommandSink {
    fn send(&mut self, message: &CommandMessage) -> Result<(), SinkError>;
}

/// In-memory sink recording every message.
#[derive(Debug, Default, Clone)]
pub struct MockRobot {
    pub received: Vec<CommandMessage>,
}

impl CommandSink for MockRobot {
    fn send(&mut self, message: &CommandMessage) -> Result<(), SinkError> {
        self.received.push(message.clone());
        Ok(())
    }
}

/// Writes the `SEQ,COMMAND\n` line protocol to a byte stream.
#[derive(Debug)]
pub struct LineProtocolSink<W: Write> {
    writer: W,
}

impl<W: Write> LineProtocolSink<W> {
    pub fn new(writer: W) -> Self {
        Self { writer }
    }

    pub fn into_inner(self) -> W {
        self.writer
    }
}

impl<W: Write> CommandSink for LineProtocolSink<W> {
    fn send(&mut self, message: &CommandMessage) -> Result<(), SinkError> {
        self.writer
            .write_all(message.wire_line().as_bytes())
            .and_then(|_| self.writer.flush())
            .map_err(|e| SinkError(e.to_string()))
    }
}

/// Turns decisions into sink messages and feedback. Sequence numbers increase
/// by one per send attempt.
#[derive(Debug, Default)]
pub struct Dispatcher {
    next_sequence: u64,
    transport_errors: Vec<String>,
}

impl Dispatcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn transport_errors(&self) -> &[String] {
        &self.transport_errors
    }

    pub fn dispatch(
        &mut self,
        decision: &Decision,
        sink: &mut dyn CommandSink,
    ) -> (Option<CommandMessage>, FeedbackEvent) {
        let t = decision.decided_at_us;
        let Some(command) = decision.command else {
            return (None, FeedbackEvent::failure(t));
        };
        let message = CommandMessage { command, sequence: self.next_sequence, issued_at_us: t };
        self.next_sequence += 1;
        match sink.send(&message) {
            Ok(()) => (Some(message), FeedbackEvent::success(t)),
            Err(e) => {
                log::warn!("dropping command {} (seq {}): {e}", message.command, message.sequence);
                self.transport_errors.push(e.to_string());
                (None, FeedbackEvent::failure(t))
            }
        }
    }
}
