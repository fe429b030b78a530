//! Software twin of the LED stimulator, plus a synthetic EEG generator.
//!
//! SSVEP LEDs toggle on a 72 MHz tick (125/9 ns). Each stimulation epoch is
//! split into four equal slots; a seeded permutation assigns one LED flash to
//! each slot, jittered within the slot so that flashes never overlap and their
//! P300 windows stay disjoint.
//!
//! All randomness comes from ChaCha8 with one stream per (purpose, index), so
//! output depends only on the seed and never on generation order.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::types::{Command, MarkerEvent, SampleFrame, StimulusConfig, CHANNEL_COUNT};

/// Scheduler clock, ticks per second (tick = 125/9 ns).
pub const TICKS_PER_SECOND: u64 = 72_000_000;
/// Tick length as the exact fraction `TICK_NS.0 / TICK_NS.1` ns.
pub const TICK_NS: (u64, u64) = (125, 9);

pub const SERIAL_BAUD: u32 = 9600;
/// 8N1 framing: start bit, 8 data bits, stop bit.
pub const SERIAL_BITS_PER_BYTE: u32 = 10;

/// Identity of the generator, recorded in run manifests.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed) + set_stream(purpose|index); normals: rand_distr 0.5 StandardNormal";

const STREAM_FLASH: u64 = 1 << 40;
const STREAM_NOISE: u64 = 2 << 40;
const STREAM_INTENT: u64 = 3 << 40;
const NOISE_BLOCK: usize = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("frequency must be positive, got {0}")]
    Frequency(f64),
    #[error("duration must be positive, got {0}")]
    Duration(f64),
    #[error("need at least 4 edges to measure frequency, got {0}")]
    TooFewEdges(usize),
    #[error("toggle edges must be strictly increasing")]
    EdgeOrder,
    #[error("epoch count must be at least 1")]
    NoEpochs,
    #[error("attended LED {0} is not configured")]
    UnknownLed(u8),
    #[error("no toggle stream for LED {0}")]
    MissingToggle(u8),
    #[error("{schedules} flash schedules but {intents} scripted intents")]
    IntentCount { schedules: usize, intents: usize },
    #[error("invalid synthesis parameter: {0}")]
    Parameter(&'static str),
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// On/off edges of one flickering LED, in scheduler ticks. Even-indexed edges
/// switch the LED on.
#[derive(Debug, Clone, PartialEq)]
pub struct ToggleStream {
    pub led_id: u8,
    pub target_hz: f64,
    pub edges: Vec<u64>,
}

impl ToggleStream {
    pub fn from_edges(led_id: u8, target_hz: f64, edges: Vec<u64>) -> Result<Self, SimError> {
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::EdgeOrder);
        }
        Ok(Self { led_id, target_hz, edges })
    }

    /// Edge time in nanoseconds.
    pub fn edge_ns(&self, i: usize) -> f64 {
        self.edges[i] as f64 * TICK_NS.0 as f64 / TICK_NS.1 as f64
    }

    /// Frequency implied by the first half period.
    pub fn achieved_hz(&self) -> Option<f64> {
        match self.edges.as_slice() {
            [a, b, ..] => Some(TICKS_PER_SECOND as f64 / (2.0 * (b - a) as f64)),
            _ => None,
        }
    }
}

/// Half period in whole ticks for `frequency_hz`.
pub fn half_period_ticks(frequency_hz: f64) -> u64 {
    (TICKS_PER_SECOND as f64 / (2.0 * frequency_hz)).round().max(1.0) as u64
}

/// Square-wave toggle schedule: edges every half period, starting with an
/// "on" edge at tick 0, strictly before `duration_s`.
pub fn schedule_ssvep(led_id: u8, frequency_hz: f64, duration_s: f64) -> Result<ToggleStream, SimError> {
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(SimError::Frequency(frequency_hz));
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(SimError::Duration(duration_s));
    }
    let half = half_period_ticks(frequency_hz);
    let end = (duration_s * TICKS_PER_SECOND as f64).round() as u64;
    let edges = (0..).map(|k| k * half).take_while(|&t| t < end).collect();
    Ok(ToggleStream { led_id, target_hz: frequency_hz, edges })
}

/// Toggle streams for every configured LED.
pub fn schedule_all(config: &StimulusConfig, duration_s: f64) -> Result<Vec<ToggleStream>, SimError> {
    config.leds.iter().map(|l| schedule_ssvep(l.id, l.frequency_hz, duration_s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyCheck {
    pub measured_hz: f64,
    pub deviation_percent: f64,
}

/// Measured frequency from the mean edge interval, and its deviation from
/// the stream's target.
pub fn verify_frequency(stream: &ToggleStream) -> Result<FrequencyCheck, SimError> {
    let n = stream.edges.len();
    if n < 4 {
        return Err(SimError::TooFewEdges(n));
    }
    let span = (stream.edges[n - 1] - stream.edges[0]) as f64;
    let mean_interval_s = span / (n - 1) as f64 / TICKS_PER_SECOND as f64;
    let measured_hz = 1.0 / (2.0 * mean_interval_s);
    let deviation_percent = (measured_hz - stream.target_hz).abs() / stream.target_hz * 100.0;
    Ok(FrequencyCheck { measured_hz, deviation_percent })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flash {
    pub led_id: u8,
    /// Onset relative to the epoch start, µs.
    pub onset_us: i64,
    pub duration_ms: u32,
}

/// One stimulation epoch: every LED flashes once, in slot order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlashSchedule {
    pub epoch_index: u64,
    pub flashes: Vec<Flash>,
}

impl FlashSchedule {
    /// Smallest gap between consecutive onsets, µs.
    pub fn min_onset_gap_us(&self) -> i64 {
        self.flashes.windows(2).map(|w| w[1].onset_us - w[0].onset_us).min().unwrap_or(i64::MAX)
    }
}

/// Pseudorandom flash order with per-slot jitter, and the marker emitted at
/// each flash onset.
///
/// Each epoch is split into one slot per LED. Onsets are jittered by less
/// than one flash duration, so consecutive onsets stay at least
/// `slot - flash` apart and the 290–500 ms P300 windows of different flashes
/// never intersect.
pub fn schedule_flashes(
    epoch_count: usize,
    config: &StimulusConfig,
    seed: u64,
) -> Result<(Vec<FlashSchedule>, Vec<MarkerEvent>), SimError> {
    if epoch_count == 0 {
        return Err(SimError::NoEpochs);
    }
    let slots = config.leds.len().max(1) as i64;
    let slot_us = config.epoch_us() / slots;
    let jitter_us = i64::from(config.flash_ms) * 1000;
    if jitter_us <= 0 || jitter_us >= slot_us {
        return Err(SimError::Parameter("flash duration must be shorter than its slot"));
    }

    let mut schedules = Vec::with_capacity(epoch_count);
    let mut markers = Vec::with_capacity(epoch_count * config.leds.len());
    for k in 0..epoch_count as u64 {
        let mut rng = rng_for(seed, STREAM_FLASH | k);
        let mut order: Vec<u8> = config.leds.iter().map(|l| l.id).collect();
        order.shuffle(&mut rng);
        let flashes: Vec<Flash> = order
            .iter()
            .enumerate()
            .map(|(slot, &led_id)| Flash {
                led_id,
                onset_us: slot as i64 * slot_us + rng.random_range(0..jitter_us),
                duration_ms: config.flash_ms,
            })
            .collect();
        let epoch_start = config.epoch_start_us(k);
        for f in &flashes {
            let code = config.led(f.led_id).expect("scheduled LEDs come from the config").marker;
            markers.push(MarkerEvent::new(code, epoch_start + f.onset_us));
        }
        schedules.push(FlashSchedule { epoch_index: k, flashes });
    }
    Ok((schedules, markers))
}

/// Uniformly random attended LED per epoch.
pub fn random_intents(epoch_count: usize, config: &StimulusConfig, seed: u64) -> Vec<u8> {
    let mut rng = rng_for(seed, STREAM_INTENT);
    (0..epoch_count).map(|_| config.leds[rng.random_range(0..config.leds.len())].id).collect()
}

/// Parameters of the synthetic subject and amplifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Attended LED id per stimulation epoch.
    pub attended: Vec<u8>,
    pub ssvep_amplitude_uv: f64,
    /// Second-harmonic amplitude relative to the fundamental.
    pub harmonic_ratio: f64,
    pub p300_amplitude_uv: f64,
    pub p300_latency_ms: f64,
    /// Full support of the half-cosine bump, ms.
    pub p300_width_ms: f64,
    pub noise_sigma_uv: f64,
    pub line_noise_uv: f64,
    pub line_hz: f64,
    /// Recording continues this long after the last epoch.
    pub tail_ms: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            attended: Vec::new(),
            ssvep_amplitude_uv: 2.0,
            harmonic_ratio: 0.5,
            p300_amplitude_uv: 5.0,
            p300_latency_ms: 350.0,
            p300_width_ms: 200.0,
            noise_sigma_uv: 2.0,
            line_noise_uv: 5.0,
            line_hz: 50.0,
            tail_ms: 600,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SimError> {
        let amps = [self.ssvep_amplitude_uv, self.harmonic_ratio, self.p300_amplitude_uv, self.noise_sigma_uv, self.line_noise_uv];
        if amps.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(SimError::Parameter("amplitudes must be finite and non-negative"));
        }
        if !(self.p300_latency_ms > 0.0 && self.p300_latency_ms < 600.0) {
            return Err(SimError::Parameter("P300 latency must lie in (0, 600) ms"));
        }
        if !(self.p300_width_ms > 0.0) {
            return Err(SimError::Parameter("P300 width must be positive"));
        }
        Ok(())
    }
}

/// Number of frames a session of `epoch_count` epochs produces.
pub fn recording_len(epoch_count: usize, config: &StimulusConfig, tail_ms: u32) -> usize {
    let total_ms = u64::from(config.epoch_origin_ms) + epoch_count as u64 * u64::from(config.epoch_ms) + u64::from(tail_ms);
    (total_ms as f64 * config.sample_rate_hz / 1000.0).round() as usize
}

struct Bump {
    peak_s: f64,
}

/// Six-channel recording for a scripted session.
///
/// Occipital channels (PO7, PO8, Oz) carry the attended LED's flicker and its
/// second harmonic; the lead-in uses the first epoch's LED and the tail the
/// last one's. Midline channels (Fz, Cz, Pz) carry a half-cosine bump after
/// the attended LED's flash. Every channel gets white noise and mains hum.
pub fn synthesize_eeg(
    schedules: &[FlashSchedule],
    toggles: &[ToggleStream],
    synth: &SynthConfig,
    config: &StimulusConfig,
) -> Result<(Vec<SampleFrame>, Vec<MarkerEvent>), SimError> {
    synth.validate()?;
    if schedules.is_empty() {
        return Err(SimError::NoEpochs);
    }
    if synth.attended.len() != schedules.len() {
        return Err(SimError::IntentCount { schedules: schedules.len(), intents: synth.attended.len() });
    }
    let mut freqs = Vec::with_capacity(schedules.len());
    for &led in &synth.attended {
        config.led(led).ok_or(SimError::UnknownLed(led))?;
        let stream = toggles.iter().find(|t| t.led_id == led).ok_or(SimError::MissingToggle(led))?;
        freqs.push(stream.achieved_hz().ok_or(SimError::TooFewEdges(stream.edges.len()))?);
    }

    let mut markers = Vec::new();
    let mut bumps = Vec::new();
    for (sched, &attended) in schedules.iter().zip(&synth.attended) {
        let start = config.epoch_start_us(sched.epoch_index);
        for f in &sched.flashes {
            let onset = start + f.onset_us;
            markers.push(MarkerEvent::new(config.led(f.led_id).ok_or(SimError::UnknownLed(f.led_id))?.marker, onset));
            if f.led_id == attended {
                bumps.push(Bump { peak_s: onset as f64 * 1e-6 + synth.p300_latency_ms * 1e-3 });
            }
        }
    }
    markers.sort_by_key(|m| m.t_us);

    let n = recording_len(schedules.len(), config, synth.tail_ms);
    let fs = config.sample_rate_hz;
    let half_width_s = synth.p300_width_ms * 1e-3 / 2.0;
    let origin = config.epoch_origin_us();
    let epoch_us = config.epoch_us();
    let last_epoch = schedules.len() as i64 - 1;

    let mut frames = Vec::with_capacity(n);
    let mut rng = rng_for(synth.seed, STREAM_NOISE);
    let mut bump_iter = 0;
    for i in 0..n {
        if i % NOISE_BLOCK == 0 {
            rng = rng_for(synth.seed, STREAM_NOISE | (i / NOISE_BLOCK) as u64);
        }
        let t_us = (i as f64 * 1e6 / fs).round() as i64;
        let t = i as f64 / fs;
        let epoch = ((t_us - origin).div_euclid(epoch_us)).clamp(0, last_epoch) as usize;
        let f = freqs[epoch];
        let ssvep = synth.ssvep_amplitude_uv
            * ((2.0 * PI * f * t).sin() + synth.harmonic_ratio * (2.0 * PI * 2.0 * f * t).sin());

        while bump_iter < bumps.len() && bumps[bump_iter].peak_s + half_width_s < t {
            bump_iter += 1;
        }
        let p300: f64 = bumps[bump_iter..]
            .iter()
            .take_while(|b| b.peak_s - half_width_s <= t)
            .map(|b| {
                let d = t - b.peak_s;
                if d.abs() <= half_width_s {
                    synth.p300_amplitude_uv * (PI * d / (2.0 * half_width_s)).cos()
                } else {
                    0.0
                }
            })
            .sum();
        let hum = synth.line_noise_uv * (2.0 * PI * synth.line_hz * t).sin();

        let mut channels = [0.0; CHANNEL_COUNT];
        for (c, v) in channels.iter_mut().enumerate() {
            let noise: f64 = rng.sample(StandardNormal);
            *v = synth.noise_sigma_uv * noise + hum + if c < 3 { p300 } else { ssvep };
        }
        frames.push(SampleFrame::new(t_us, channels));
    }
    Ok((frames, markers))
}

/// Ground truth for one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Intent {
    pub epoch_index: u64,
    pub led_id: u8,
    pub command: Command,
}

/// Everything a simulated session produces.
#[derive(Debug, Clone)]
pub struct Session {
    pub toggles: Vec<ToggleStream>,
    pub schedules: Vec<FlashSchedule>,
    pub frames: Vec<SampleFrame>,
    pub markers: Vec<MarkerEvent>,
    pub intents: Vec<Intent>,
}

/// Schedules toggles and flashes and synthesises the recording for the
/// epochs scripted in `synth.attended`. Flash order uses `synth.seed`.
pub fn simulate_session(config: &StimulusConfig, synth: &SynthConfig) -> Result<Session, SimError> {
    let epochs = synth.attended.len();
    let n = recording_len(epochs, config, synth.tail_ms);
    let duration_s = n as f64 / config.sample_rate_hz;
    let toggles = schedule_all(config, duration_s)?;
    let (schedules, _) = schedule_flashes(epochs, config, synth.seed)?;
    let (frames, markers) = synthesize_eeg(&schedules, &toggles, synth, config)?;
    let intents = synth
        .attended
        .iter()
        .enumerate()
        .map(|(k, &led_id)| Intent {
            epoch_index: k as u64,
            led_id,
            command: config.led(led_id).expect("validated by synthesize_eeg").command,
        })
        .collect();
    Ok(Session { toggles, schedules, frames, markers, intents })
}

/// One ASCII byte per marker, as sent over the stimulator's serial link.
pub fn encode_serial_markers(markers: &[MarkerEvent]) -> Vec<u8> {
    markers.iter().map(|m| m.code.as_char() as u8).collect()
}

/// Time to shift one marker byte out at the nominal baud rate, µs.
pub fn serial_byte_time_us() -> f64 {
    f64::from(SERIAL_BITS_PER_BYTE) * 1e6 / f64::from(SERIAL_BAUD)
}
