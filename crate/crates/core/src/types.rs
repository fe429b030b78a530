//! Domain types shared by every stage of the pipeline.
//!
//! Timestamps are integer microseconds since the start of the stream. Channel
//! values are microvolts in the fixed order [`CHANNELS`].

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of EEG channels in every frame.
pub const CHANNEL_COUNT: usize = 6;

/// Canonical channel order used by every API and file format.
pub const CHANNELS: [Channel; CHANNEL_COUNT] = [
    Channel::Fz,
    Channel::Cz,
    Channel::Pz,
    Channel::PO7,
    Channel::PO8,
    Channel::Oz,
];

/// Lower and upper edge of the SSVEP bandpass, Hz. Stimulus frequencies must
/// fall inside it.
pub const SSVEP_PASSBAND_HZ: (f64, f64) = (6.5, 30.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Fz,
    Cz,
    Pz,
    PO7,
    PO8,
    Oz,
}

impl Channel {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Fz => "Fz",
            Channel::Cz => "Cz",
            Channel::Pz => "Pz",
            Channel::PO7 => "PO7",
            Channel::PO8 => "PO8",
            Channel::Oz => "Oz",
        }
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CHANNELS
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown channel '{s}'"))
    }
}

/// One 6-channel EEG sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleFrame {
    pub t_us: i64,
    pub channels: [f64; CHANNEL_COUNT],
}

impl SampleFrame {
    pub fn new(t_us: i64, channels: [f64; CHANNEL_COUNT]) -> Self {
        Self { t_us, channels }
    }

    pub fn get(&self, channel: Channel) -> f64 {
        self.channels[channel.index()]
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("timestamp {t_us} µs does not follow previous timestamp {prev_us} µs")]
    NonMonotonic { prev_us: i64, t_us: i64 },
    #[error("non-finite value on channel {channel} at {t_us} µs")]
    NonFinite { t_us: i64, channel: &'static str },
}

/// Gatekeeper for frame streams: rejects out-of-order timestamps and
/// non-finite values. Streams are never reordered.
#[derive(Debug, Default, Clone)]
pub struct FrameGuard {
    last_t_us: Option<i64>,
}

impl FrameGuard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn admit(&mut self, frame: &SampleFrame) -> Result<(), IngestError> {
        if let Some(prev) = self.last_t_us {
            if frame.t_us <= prev {
                return Err(IngestError::NonMonotonic { prev_us: prev, t_us: frame.t_us });
            }
        }
        if let Some(i) = frame.channels.iter().position(|v| !v.is_finite()) {
            return Err(IngestError::NonFinite { t_us: frame.t_us, channel: CHANNELS[i].name() });
        }
        self.last_t_us = Some(frame.t_us);
        Ok(())
    }

    pub fn last_t_us(&self) -> Option<i64> {
        self.last_t_us
    }
}

/// Marker byte sent when an LED flashes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MarkerCode {
    #[serde(rename = "o")]
    O,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "q")]
    Q,
    #[serde(rename = "r")]
    R,
}

impl MarkerCode {
    pub const ALL: [MarkerCode; 4] = [MarkerCode::O, MarkerCode::P, MarkerCode::Q, MarkerCode::R];

    pub fn as_char(self) -> char {
        match self {
            MarkerCode::O => 'o',
            MarkerCode::P => 'p',
            MarkerCode::Q => 'q',
            MarkerCode::R => 'r',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'o' => Some(MarkerCode::O),
            'p' => Some(MarkerCode::P),
            'q' => Some(MarkerCode::Q),
            'r' => Some(MarkerCode::R),
            _ => None,
        }
    }
}

impl fmt::Display for MarkerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for MarkerCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => MarkerCode::from_char(c).ok_or_else(|| format!("unknown marker code '{s}'")),
            _ => Err(format!("marker code must be a single character, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkerEvent {
    pub code: MarkerCode,
    pub t_us: i64,
}

impl MarkerEvent {
    pub fn new(code: MarkerCode, t_us: i64) -> Self {
        Self { code, t_us }
    }
}

/// Robot navigation command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Command {
    Forward,
    Right,
    Backward,
    Left,
}

impl Command {
    pub const ALL: [Command; 4] = [Command::Forward, Command::Right, Command::Backward, Command::Left];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Forward => "Forward",
            Command::Right => "Right",
            Command::Backward => "Backward",
            Command::Left => "Left",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command '{s}'"))
    }
}

/// Spelling of an abstention in logs and on the wire.
pub const NO_DECISION: &str = "NoDecision";

/// One row of the LED table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedEntry {
    pub id: u8,
    pub frequency_hz: f64,
    pub marker: MarkerCode,
    pub command: Command,
}

/// LED table plus the timing parameters shared by the simulator and the decoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusConfig {
    #[serde(rename = "led")]
    pub leds: Vec<LedEntry>,
    #[serde(default = "defaults::sample_rate_hz")]
    pub sample_rate_hz: f64,
    /// Stimulation epoch: each LED flashes once per epoch, one decision per epoch.
    #[serde(default = "defaults::epoch_ms")]
    pub epoch_ms: u32,
    #[serde(default = "defaults::p300_window_ms")]
    pub p300_window_ms: (f64, f64),
    /// Offset of the first stimulation epoch from the start of the recording.
    #[serde(default = "defaults::epoch_origin_ms")]
    pub epoch_origin_ms: u32,
    #[serde(default = "defaults::flash_ms")]
    pub flash_ms: u32,
}

mod defaults {
    pub fn sample_rate_hz() -> f64 {
        250.0
    }
    pub fn epoch_ms() -> u32 {
        2000
    }
    pub fn p300_window_ms() -> (f64, f64) {
        (290.0, 500.0)
    }
    pub fn epoch_origin_ms() -> u32 {
        1000
    }
    pub fn flash_ms() -> u32 {
        100
    }
}

impl Default for StimulusConfig {
    /// The four-LED table: 7 Hz/o/Forward, 8 Hz/p/Right, 9 Hz/q/Backward,
    /// 10 Hz/r/Left.
    fn default() -> Self {
        let row = |id, frequency_hz, marker, command| LedEntry { id, frequency_hz, marker, command };
        Self {
            leds: vec![
                row(0, 7.0, MarkerCode::O, Command::Forward),
                row(1, 8.0, MarkerCode::P, Command::Right),
                row(2, 9.0, MarkerCode::Q, Command::Backward),
                row(3, 10.0, MarkerCode::R, Command::Left),
            ],
            sample_rate_hz: defaults::sample_rate_hz(),
            epoch_ms: defaults::epoch_ms(),
            p300_window_ms: defaults::p300_window_ms(),
            epoch_origin_ms: defaults::epoch_origin_ms(),
            flash_ms: defaults::flash_ms(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigIssue {
    #[error("expected 4 LEDs, found {0}")]
    LedCount(usize),
    #[error("duplicate LED id {0}")]
    DuplicateLedId(u8),
    #[error("LED id {0} outside 0..=3")]
    LedIdRange(u8),
    #[error("duplicate frequency {0} Hz")]
    DuplicateFrequency(f64),
    #[error("frequency {0} Hz outside passband [6.5, 30] Hz")]
    OutsidePassband(f64),
    #[error("duplicate marker '{0}'")]
    DuplicateMarker(MarkerCode),
    #[error("duplicate command {0}")]
    DuplicateCommand(Command),
    #[error("sample rate {0} Hz must be positive and finite")]
    SampleRate(f64),
    #[error("P300 window ({0}, {1}) ms is not an increasing interval after the stimulus")]
    Window(f64, f64),
    #[error("epoch length {epoch_ms} ms shorter than window end {window_end_ms} ms")]
    EpochShorterThanWindow { epoch_ms: u32, window_end_ms: f64 },
    #[error("flash duration {flash_ms} ms does not fit a {slot_ms} ms flash slot")]
    FlashTooLong { flash_ms: u32, slot_ms: u32 },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {}", join_issues(.0))]
    Invalid(Vec<ConfigIssue>),
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

/// Checks every [`StimulusConfig`] invariant, listing all violations.
pub fn validate_config(config: &StimulusConfig) -> Result<(), Vec<ConfigIssue>> {
    let mut issues = Vec::new();
    if config.leds.len() != 4 {
        issues.push(ConfigIssue::LedCount(config.leds.len()));
    }
    for (i, led) in config.leds.iter().enumerate() {
        let earlier = &config.leds[..i];
        if led.id > 3 {
            issues.push(ConfigIssue::LedIdRange(led.id));
        }
        if earlier.iter().any(|e| e.id == led.id) {
            issues.push(ConfigIssue::DuplicateLedId(led.id));
        }
        if earlier.iter().any(|e| e.frequency_hz == led.frequency_hz) {
            issues.push(ConfigIssue::DuplicateFrequency(led.frequency_hz));
        }
        let (lo, hi) = SSVEP_PASSBAND_HZ;
        if !(led.frequency_hz >= lo && led.frequency_hz <= hi) {
            issues.push(ConfigIssue::OutsidePassband(led.frequency_hz));
        }
        if earlier.iter().any(|e| e.marker == led.marker) {
            issues.push(ConfigIssue::DuplicateMarker(led.marker));
        }
        if earlier.iter().any(|e| e.command == led.command) {
            issues.push(ConfigIssue::DuplicateCommand(led.command));
        }
    }
    if !(config.sample_rate_hz.is_finite() && config.sample_rate_hz > 0.0) {
        issues.push(ConfigIssue::SampleRate(config.sample_rate_hz));
    }
    let (start, end) = config.p300_window_ms;
    if !(start >= 0.0 && end > start) {
        issues.push(ConfigIssue::Window(start, end));
    }
    if f64::from(config.epoch_ms) < end {
        issues.push(ConfigIssue::EpochShorterThanWindow { epoch_ms: config.epoch_ms, window_end_ms: end });
    }
    let slot_ms = config.epoch_ms / 4;
    if config.flash_ms >= slot_ms {
        issues.push(ConfigIssue::FlashTooLong { flash_ms: config.flash_ms, slot_ms });
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

impl StimulusConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: StimulusConfig = toml::from_str(text)?;
        validate_config(&config).map_err(ConfigError::Invalid)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn led(&self, id: u8) -> Option<&LedEntry> {
        self.leds.iter().find(|l| l.id == id)
    }

    pub fn by_marker(&self, code: MarkerCode) -> Option<&LedEntry> {
        self.leds.iter().find(|l| l.marker == code)
    }

    pub fn by_frequency(&self, hz: f64) -> Option<&LedEntry> {
        self.leds.iter().find(|l| l.frequency_hz == hz)
    }

    pub fn sample_period_us(&self) -> f64 {
        1e6 / self.sample_rate_hz
    }

    pub fn epoch_us(&self) -> i64 {
        i64::from(self.epoch_ms) * 1000
    }

    pub fn epoch_origin_us(&self) -> i64 {
        i64::from(self.epoch_origin_ms) * 1000
    }

    /// Start of stimulation epoch `index`, µs since stream start.
    pub fn epoch_start_us(&self, index: u64) -> i64 {
        self.epoch_origin_us() + index as i64 * self.epoch_us()
    }

    /// Stimulation epoch containing `t_us`, if it is not before the origin.
    pub fn epoch_index_of(&self, t_us: i64) -> Option<u64> {
        let offset = t_us - self.epoch_origin_us();
        (offset >= 0).then(|| (offset / self.epoch_us()) as u64)
    }
}

/// Why an epoch was abstained on for reasons other than plain disagreement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbstainReason {
    /// The stream does not cover an analysis window of the epoch.
    Truncated,
    /// The marker stream broke the one-flash-per-LED protocol.
    Protocol,
}

impl AbstainReason {
    pub fn as_str(self) -> &'static str {
        match self {
            AbstainReason::Truncated => "truncated",
            AbstainReason::Protocol => "protocol",
        }
    }
}

/// Fused classifier output for one stimulation epoch.
///
/// In gated operation `command.is_some()` exactly when `agreement` holds. The
/// SSVEP-only diagnostic mode keeps `agreement` as the observed P300 agreement
/// but emits the SSVEP command regardless.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub ssvep_winner_hz: Option<f64>,
    pub p300_winner: Option<MarkerCode>,
    pub agreement: bool,
    pub command: Option<Command>,
    pub decided_at_us: i64,
    pub abstain_reason: Option<AbstainReason>,
}

impl Decision {
    pub fn abstain(reason: AbstainReason, decided_at_us: i64) -> Self {
        Self {
            ssvep_winner_hz: None,
            p300_winner: None,
            agreement: false,
            command: None,
            decided_at_us,
            abstain_reason: Some(reason),
        }
    }

    /// Command cell as written to decision logs: the command name,
    /// `NoDecision`, or `NoDecision(<reason>)`.
    pub fn command_label(&self) -> String {
        match (self.command, self.abstain_reason) {
            (Some(c), _) => c.to_string(),
            (None, Some(r)) => format!("{NO_DECISION}({})", r.as_str()),
            (None, None) => NO_DECISION.to_string(),
        }
    }
}
