//! Streaming decoder: frames and markers in, one decision per stimulation
//! epoch out.
//!
//! ```text
//! frame ──notch──┬─ mean(PO7, PO8, Oz) ─ bandpass 6.5–30 Hz ─ Welch ─ band peaks ─┐
//!                └─ Pz (or midline mean) ─ low-pass 15 Hz ─ epochs ─ P300 peaks ──┴─ fusion
//! ```
//!
//! Memory is bounded: only samples still needed by undecided epochs are kept.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::decoder::{decide, decide_ungated, DecodeError};
use crate::erp::{
    baseline_correct, detect_p300, extract_epoch, select_p300_winner, EpochLayout, ErpError, P300Channel, Threshold,
    TimedValue,
};
use crate::filters::{design_bandpass, design_lowpass, design_notch, DesignError, FilterDesign, FilterState};
use crate::spectral::{extract_ssvep_features, welch_psd, SpectralError, Window};
use crate::types::{
    AbstainReason, Channel, Decision, FrameGuard, IngestError, MarkerEvent, SampleFrame, StimulusConfig,
    CHANNEL_COUNT,
};

/// Channels averaged into the SSVEP branch.
pub const SSVEP_CHANNELS: [Channel; 3] = [Channel::PO7, Channel::PO8, Channel::Oz];

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderOptions {
    /// Notch quality factor; `None` disables the mains notch.
    pub notch_q: Option<f64>,
    pub mains_hz: f64,
    pub bandpass_hz: (f64, f64),
    pub bandpass_order: usize,
    pub lowpass_hz: f64,
    pub lowpass_order: usize,
    pub p300_gate: bool,
    pub p300_channel: P300Channel,
    pub threshold: Threshold,
    pub segment_len: usize,
    pub overlap: f64,
    pub band_half_width_hz: f64,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        Self {
            notch_q: Some(crate::filters::DEFAULT_NOTCH_Q),
            mains_hz: 50.0,
            bandpass_hz: (6.5, 30.0),
            bandpass_order: 4,
            lowpass_hz: 15.0,
            lowpass_order: 4,
            p300_gate: true,
            p300_channel: P300Channel::default(),
            threshold: Threshold::default(),
            segment_len: crate::spectral::DEFAULT_SEGMENT_LEN,
            overlap: crate::spectral::DEFAULT_OVERLAP,
            band_half_width_hz: crate::spectral::DEFAULT_BAND_HALF_WIDTH_HZ,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error("marker at {t_us} µs arrived after marker at {prev_us} µs")]
    MarkerOrder { prev_us: i64, t_us: i64 },
    #[error("marker at {t_us} µs belongs to epoch {epoch}, which was already decided")]
    LateMarker { t_us: i64, epoch: u64 },
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochDecision {
    pub epoch_index: u64,
    pub decision: Decision,
}

/// Notch, bandpass and low-pass stages applied to each incoming frame.
#[derive(Debug, Clone)]
pub struct FrontEnd {
    notch: Option<Vec<FilterState>>,
    bandpass: FilterState,
    lowpass: FilterState,
    p300_channel: P300Channel,
}

impl FrontEnd {
    pub fn new(fs: f64, options: &DecoderOptions) -> Result<Self, DesignError> {
        let notch = options
            .notch_q
            .map(|q| design_notch(options.mains_hz, fs, q).map(Arc::new))
            .transpose()?
            .map(|d| (0..CHANNEL_COUNT).map(|_| FilterState::new(d.clone())).collect());
        let (lo, hi) = options.bandpass_hz;
        let bandpass = FilterState::new(Arc::new(design_bandpass(lo, hi, options.bandpass_order, fs)?));
        let lowpass = FilterState::new(Arc::new(design_lowpass(options.lowpass_hz, options.lowpass_order, fs)?));
        Ok(Self { notch, bandpass, lowpass, p300_channel: options.p300_channel })
    }

    pub fn designs(&self) -> Vec<Arc<FilterDesign>> {
        let mut out: Vec<_> = self.notch.iter().flat_map(|n| n.first()).map(|s| s.design().clone()).collect();
        out.push(self.bandpass.design().clone());
        out.push(self.lowpass.design().clone());
        out
    }

    /// Returns `(ssvep, p300)` branch outputs for one frame.
    pub fn process(&mut self, frame: &SampleFrame) -> (f64, f64) {
        let mut ch = frame.channels;
        if let Some(notch) = &mut self.notch {
            for (v, st) in ch.iter_mut().zip(notch.iter_mut()) {
                *v = st.apply(*v);
            }
        }
        let occipital = SSVEP_CHANNELS.iter().map(|c| ch[c.index()]).sum::<f64>() / SSVEP_CHANNELS.len() as f64;
        let p300_raw = match self.p300_channel {
            P300Channel::Pz => ch[Channel::Pz.index()],
            P300Channel::MidlineMean => {
                (ch[Channel::Fz.index()] + ch[Channel::Cz.index()] + ch[Channel::Pz.index()]) / 3.0
            }
        };
        (self.bandpass.apply(occipital), self.lowpass.apply(p300_raw))
    }
}

/// Online hybrid decoder. Push markers and frames in any interleaving as long
/// as each epoch's markers arrive before the stream passes the point where the
/// epoch is decided (epoch end + 600 ms + half a sample period).
pub struct StreamingDecoder {
    config: StimulusConfig,
    options: DecoderOptions,
    layout: EpochLayout,
    front: FrontEnd,
    guard: FrameGuard,
    ssvep: VecDeque<TimedValue>,
    p300: VecDeque<TimedValue>,
    markers: BTreeMap<u64, Vec<MarkerEvent>>,
    last_marker_us: Option<i64>,
    next_epoch: u64,
    peak_buffered: usize,
}

impl StreamingDecoder {
    pub fn new(config: StimulusConfig, options: DecoderOptions) -> Result<Self, PipelineError> {
        let front = FrontEnd::new(config.sample_rate_hz, &options)?;
        let layout = EpochLayout::for_config(&config);
        Ok(Self {
            config,
            options,
            layout,
            front,
            guard: FrameGuard::new(),
            ssvep: VecDeque::new(),
            p300: VecDeque::new(),
            markers: BTreeMap::new(),
            last_marker_us: None,
            next_epoch: 0,
            peak_buffered: 0,
        })
    }

    pub fn config(&self) -> &StimulusConfig {
        &self.config
    }

    /// Largest number of buffered samples seen so far.
    pub fn peak_buffered(&self) -> usize {
        self.peak_buffered
    }

    pub fn push_marker(&mut self, marker: MarkerEvent) -> Result<(), PipelineError> {
        if let Some(prev) = self.last_marker_us {
            if marker.t_us < prev {
                return Err(PipelineError::MarkerOrder { prev_us: prev, t_us: marker.t_us });
            }
        }
        self.last_marker_us = Some(marker.t_us);
        let Some(epoch) = self.config.epoch_index_of(marker.t_us) else {
            log::warn!("ignoring marker '{}' at {} µs before the first epoch", marker.code, marker.t_us);
            return Ok(());
        };
        if epoch < self.next_epoch {
            return Err(PipelineError::LateMarker { t_us: marker.t_us, epoch });
        }
        self.markers.entry(epoch).or_default().push(marker);
        Ok(())
    }

    fn half_period_us(&self) -> i64 {
        (self.config.sample_period_us() / 2.0).ceil() as i64
    }

    fn period_us(&self) -> i64 {
        self.config.sample_period_us().ceil() as i64
    }

    fn post_us(&self) -> i64 {
        (self.layout.post_samples as f64 * self.config.sample_period_us()).round() as i64
    }

    fn pre_us(&self) -> i64 {
        (self.layout.pre_samples as f64 * self.config.sample_period_us()).round() as i64
    }

    /// Stream time after which epoch `k` has every sample it can need.
    fn ready_at_us(&self, k: u64) -> i64 {
        self.config.epoch_start_us(k + 1) + self.post_us() + self.half_period_us()
    }

    pub fn push_frame(&mut self, frame: &SampleFrame) -> Result<Vec<EpochDecision>, PipelineError> {
        self.guard.admit(frame)?;
        let (s, p) = self.front.process(frame);
        self.ssvep.push_back(TimedValue { t_us: frame.t_us, value: s });
        self.p300.push_back(TimedValue { t_us: frame.t_us, value: p });
        self.trim();
        self.peak_buffered = self.peak_buffered.max(self.ssvep.len());

        let mut out = Vec::new();
        while frame.t_us >= self.ready_at_us(self.next_epoch) {
            let k = self.next_epoch;
            out.push(EpochDecision { epoch_index: k, decision: self.decide_epoch(k, frame.t_us)? });
            self.next_epoch += 1;
            self.trim();
        }
        Ok(out)
    }

    /// Flushes epochs that have markers or a fully covered SSVEP window but
    /// could not be decided before the stream ended.
    pub fn finish(mut self) -> Result<Vec<EpochDecision>, PipelineError> {
        let Some(last_t) = self.guard.last_t_us() else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        loop {
            let k = self.next_epoch;
            let has_markers = self.markers.contains_key(&k);
            let covered = self.config.epoch_start_us(k + 1) <= last_t + self.period_us();
            let later_markers = self.markers.range(k..).next().is_some();
            if !has_markers && !covered && !later_markers {
                break;
            }
            out.push(EpochDecision { epoch_index: k, decision: self.decide_epoch(k, last_t)? });
            self.next_epoch += 1;
        }
        Ok(out)
    }

    fn trim(&mut self) {
        let keep_from = self.config.epoch_start_us(self.next_epoch) - self.pre_us() - 2 * self.half_period_us();
        while self.ssvep.front().is_some_and(|s| s.t_us < keep_from) {
            self.ssvep.pop_front();
            self.p300.pop_front();
        }
    }

    fn decide_epoch(&mut self, k: u64, now_us: i64) -> Result<Decision, PipelineError> {
        let markers = self.markers.remove(&k).unwrap_or_default();
        let start = self.config.epoch_start_us(k);
        let end = self.config.epoch_start_us(k + 1);

        let window: Vec<f64> = self
            .ssvep
            .iter()
            .filter(|s| s.t_us >= start && s.t_us < end)
            .map(|s| s.value)
            .collect();
        let nominal = (self.config.epoch_us() as f64 / self.config.sample_period_us()).round() as usize;
        if window.len() < nominal.min(self.options.segment_len) {
            return Ok(Decision::abstain(AbstainReason::Truncated, now_us));
        }
        let psd = welch_psd(
            &window,
            self.config.sample_rate_hz,
            self.options.segment_len,
            self.options.overlap,
            Window::Hamming,
        )?;
        let features = extract_ssvep_features(&psd, &self.config, self.options.band_half_width_hz, (start, end))?;

        let stream = self.p300.make_contiguous();
        let mut detections = Vec::with_capacity(markers.len());
        for m in &markers {
            match extract_epoch(stream, m, self.layout) {
                Ok(epoch) => detections.push(detect_p300(
                    &baseline_correct(&epoch),
                    self.config.p300_window_ms,
                    self.options.threshold,
                )),
                Err(ErpError::Truncated { .. }) => return Ok(Decision::abstain(AbstainReason::Truncated, now_us)),
                Err(e) => {
                    log::warn!("epoch {k}: {e}");
                    return Ok(Decision::abstain(AbstainReason::Protocol, now_us));
                }
            }
        }
        let p300_winner = match select_p300_winner(&detections) {
            Ok(w) => w,
            Err(e) => {
                log::warn!("epoch {k}: {e}");
                return Ok(Decision::abstain(AbstainReason::Protocol, now_us));
            }
        };
        let decision = if self.options.p300_gate {
            decide(&features, p300_winner, &self.config, now_us)?
        } else {
            decide_ungated(&features, p300_winner, &self.config, now_us)?
        };
        Ok(decision)
    }
}

/// Runs a whole recording through a [`StreamingDecoder`], feeding each marker
/// just before the first frame at or after its timestamp.
pub fn decode_recording(
    frames: impl IntoIterator<Item = SampleFrame>,
    markers: &[MarkerEvent],
    config: &StimulusConfig,
    options: &DecoderOptions,
) -> Result<Vec<EpochDecision>, PipelineError> {
    let mut decoder = StreamingDecoder::new(config.clone(), options.clone())?;
    let mut pending = markers.iter().peekable();
    let mut out = Vec::new();
    for frame in frames {
        while let Some(m) = pending.next_if(|m| m.t_us <= frame.t_us) {
            decoder.push_marker(*m)?;
        }
        out.extend(decoder.push_frame(&frame)?);
    }
    for m in pending {
        decoder.push_marker(*m)?;
    }
    out.extend(decoder.finish()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::MarkerCode;

    fn silent(n: usize) -> impl Iterator<Item = SampleFrame> {
        (0..n).map(|i| SampleFrame::new(i as i64 * 4000, [0.0; 6]))
    }

    #[test]
    fn one_decision_per_covered_epoch() {
        let cfg = StimulusConfig::default();
        // 1 s lead-in + 3 epochs + 600 ms tail
        let n = 250 + 3 * 500 + 150;
        let out = decode_recording(silent(n), &[], &cfg, &DecoderOptions::default()).unwrap();
        let idx: Vec<u64> = out.iter().map(|d| d.epoch_index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
        assert!(out.iter().all(|d| d.decision.command.is_none()));
    }

    #[test]
    fn markers_before_origin_are_ignored() {
        let cfg = StimulusConfig::default();
        let markers = [MarkerEvent::new(MarkerCode::O, 500_000)];
        let out = decode_recording(silent(250 + 500 + 150), &markers, &cfg, &DecoderOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn out_of_order_marker_is_rejected() {
        let mut dec = StreamingDecoder::new(StimulusConfig::default(), DecoderOptions::default()).unwrap();
        dec.push_marker(MarkerEvent::new(MarkerCode::O, 1_500_000)).unwrap();
        assert!(matches!(
            dec.push_marker(MarkerEvent::new(MarkerCode::P, 1_400_000)),
            Err(PipelineError::MarkerOrder { .. })
        ));
    }

    #[test]
    fn late_marker_is_rejected() {
        let mut dec = StreamingDecoder::new(StimulusConfig::default(), DecoderOptions::default()).unwrap();
        for f in silent(250 + 500 + 160) {
            dec.push_frame(&f).unwrap();
        }
        assert!(matches!(
            dec.push_marker(MarkerEvent::new(MarkerCode::O, 1_500_000)),
            Err(PipelineError::LateMarker { epoch: 0, .. })
        ));
    }

    #[test]
    fn duplicate_codes_abstain_with_protocol_reason() {
        let cfg = StimulusConfig::default();
        let markers = [MarkerEvent::new(MarkerCode::O, 1_100_000), MarkerEvent::new(MarkerCode::O, 1_700_000)];
        let out = decode_recording(silent(250 + 500 + 150), &markers, &cfg, &DecoderOptions::default()).unwrap();
        assert_eq!(out[0].decision.abstain_reason, Some(AbstainReason::Protocol));
    }

    #[test]
    fn non_monotonic_frames_are_rejected() {
        let mut dec = StreamingDecoder::new(StimulusConfig::default(), DecoderOptions::default()).unwrap();
        dec.push_frame(&SampleFrame::new(8000, [0.0; 6])).unwrap();
        assert!(matches!(
            dec.push_frame(&SampleFrame::new(4000, [0.0; 6])),
            Err(PipelineError::Ingest(IngestError::NonMonotonic { .. }))
        ));
    }

    #[test]
    fn buffer_stays_bounded() {
        let cfg = StimulusConfig::default();
        let mut dec = StreamingDecoder::new(cfg, DecoderOptions::default()).unwrap();
        for f in silent(250 + 40 * 500) {
            dec.push_frame(&f).unwrap();
        }
        // one epoch + post window + pre window, plus slack
        assert!(dec.peak_buffered() <= 500 + 150 + 50 + 10, "{}", dec.peak_buffered());
    }
}
