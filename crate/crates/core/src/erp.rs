//! Marker-locked epochs and P300 peak detection.

use std::str::FromStr;

use thiserror::Error;

use crate::types::{MarkerCode, MarkerEvent, StimulusConfig};

/// Epoch span around the marker, ms.
pub const EPOCH_PRE_MS: f64 = 200.0;
pub const EPOCH_POST_MS: f64 = 600.0;
/// Default absolute validity threshold, µV.
///
/// When the previous epoch's attended flash came last and this epoch's comes
/// first, its response sits in the new baseline. A noise-free 5 µV response
/// then measures as little as 1.81 µV on the midline mean, so the threshold
/// stays below that.
pub const DEFAULT_THRESHOLD_UV: f64 = 1.7;
/// Default multiplier for the relative (baseline SD) threshold.
pub const DEFAULT_RELATIVE_K: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErpError {
    #[error("truncated epoch: marker '{code}' at {t_us} µs needs samples the stream does not cover")]
    Truncated { code: MarkerCode, t_us: i64 },
    #[error("no sample within half a period of marker '{code}' at {t_us} µs")]
    Unaligned { code: MarkerCode, t_us: i64 },
    #[error("marker '{0}' appears more than once in one stimulation epoch")]
    DuplicateMarker(MarkerCode),
}

/// A filtered sample on the P300 branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedValue {
    pub t_us: i64,
    pub value: f64,
}

/// Which electrodes feed the P300 branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum P300Channel {
    Pz,
    /// Mean of Fz, Cz and Pz.
    #[default]
    MidlineMean,
}

impl FromStr for P300Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pz" => Ok(P300Channel::Pz),
            "midline" | "midline-mean" => Ok(P300Channel::MidlineMean),
            _ => Err(format!("unknown P300 channel '{s}' (expected pz or midline)")),
        }
    }
}

/// Validity criterion for a P300 peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Peak must reach this many µV.
    Absolute(f64),
    /// Peak must reach `k` times the baseline standard deviation.
    Relative(f64),
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Absolute(DEFAULT_THRESHOLD_UV)
    }
}

/// Sample-count geometry of an epoch at a given rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLayout {
    pub pre_samples: usize,
    pub post_samples: usize,
    pub sample_rate_hz: f64,
}

impl EpochLayout {
    pub fn new(sample_rate_hz: f64) -> Self {
        let samples = |ms: f64| (ms * sample_rate_hz / 1000.0).round() as usize;
        Self { pre_samples: samples(EPOCH_PRE_MS), post_samples: samples(EPOCH_POST_MS), sample_rate_hz }
    }

    pub fn for_config(config: &StimulusConfig) -> Self {
        Self::new(config.sample_rate_hz)
    }

    pub fn len(&self) -> usize {
        self.pre_samples + 1 + self.post_samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Latency of sample `index` relative to the marker, ms.
    pub fn latency_ms(&self, index: usize) -> f64 {
        (index as f64 - self.pre_samples as f64) * 1000.0 / self.sample_rate_hz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub code: MarkerCode,
    pub marker_t_us: i64,
    /// Offset of the aligned sample from the marker, µs (sample minus marker).
    pub alignment_offset_us: i64,
    pub samples: Vec<f64>,
    pub layout: EpochLayout,
}

impl Epoch {
    pub fn baseline(&self) -> &[f64] {
        &self.samples[..self.layout.pre_samples]
    }
}

/// Index of the sample nearest to `t_us` (earlier sample on exact ties).
fn nearest_index(stream: &[TimedValue], t_us: i64) -> Option<usize> {
    let after = stream.partition_point(|s| s.t_us < t_us);
    let candidates = [after.checked_sub(1), (after < stream.len()).then_some(after)];
    candidates
        .into_iter()
        .flatten()
        .min_by_key(|&i| ((stream[i].t_us - t_us).abs(), i))
}

/// Cuts the epoch around `marker` from the low-pass branch. The marker is
/// aligned to the nearest sample; that sample must lie within half a sample
/// period. Epochs are never padded.
pub fn extract_epoch(stream: &[TimedValue], marker: &MarkerEvent, layout: EpochLayout) -> Result<Epoch, ErpError> {
    let idx = nearest_index(stream, marker.t_us).ok_or(ErpError::Truncated { code: marker.code, t_us: marker.t_us })?;
    let offset = stream[idx].t_us - marker.t_us;
    let half_period_us = (5e5 / layout.sample_rate_hz).ceil() as i64;
    if offset.abs() > half_period_us {
        // Nearest sample is far away: either beyond the stream edge or a gap.
        let past_edge = marker.t_us < stream[0].t_us || marker.t_us > stream[stream.len() - 1].t_us;
        return Err(if past_edge {
            ErpError::Truncated { code: marker.code, t_us: marker.t_us }
        } else {
            ErpError::Unaligned { code: marker.code, t_us: marker.t_us }
        });
    }
    if idx < layout.pre_samples || idx + layout.post_samples >= stream.len() {
        return Err(ErpError::Truncated { code: marker.code, t_us: marker.t_us });
    }
    let samples = stream[idx - layout.pre_samples..=idx + layout.post_samples].iter().map(|s| s.value).collect();
    Ok(Epoch { code: marker.code, marker_t_us: marker.t_us, alignment_offset_us: offset, samples, layout })
}

/// Subtracts the mean of the pre-stimulus samples.
pub fn baseline_correct(epoch: &Epoch) -> Epoch {
    let base = epoch.baseline();
    let mean = if base.is_empty() { 0.0 } else { base.iter().sum::<f64>() / base.len() as f64 };
    Epoch { samples: epoch.samples.iter().map(|v| v - mean).collect(), ..epoch.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P300Detection {
    pub code: MarkerCode,
    pub marker_t_us: i64,
    pub peak_latency_ms: f64,
    pub peak_amplitude_uv: f64,
    pub valid: bool,
    pub threshold_uv: f64,
}

fn baseline_sd(epoch: &Epoch) -> f64 {
    let base = epoch.baseline();
    if base.len() < 2 {
        return 0.0;
    }
    let mean = base.iter().sum::<f64>() / base.len() as f64;
    (base.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (base.len() - 1) as f64).sqrt()
}

/// Largest sample with latency inside `window_ms` (inclusive). Valid when the
/// peak is positive and reaches the threshold.
pub fn detect_p300(epoch: &Epoch, window_ms: (f64, f64), threshold: Threshold) -> P300Detection {
    let threshold_uv = match threshold {
        Threshold::Absolute(uv) => uv,
        Threshold::Relative(k) => k * baseline_sd(epoch),
    };
    let layout = epoch.layout;
    let mut peak: Option<(usize, f64)> = None;
    for (i, &v) in epoch.samples.iter().enumerate() {
        let lat = layout.latency_ms(i);
        if lat < window_ms.0 - 1e-9 || lat > window_ms.1 + 1e-9 {
            continue;
        }
        if peak.is_none_or(|(_, best)| v > best) {
            peak = Some((i, v));
        }
    }
    let (idx, amp) = peak.unwrap_or((layout.pre_samples, f64::NEG_INFINITY));
    P300Detection {
        code: epoch.code,
        marker_t_us: epoch.marker_t_us,
        peak_latency_ms: layout.latency_ms(idx),
        peak_amplitude_uv: amp,
        valid: amp > 0.0 && amp >= threshold_uv,
        threshold_uv,
    }
}

/// Marker with the largest valid peak in one stimulation epoch; ties go to
/// the earliest marker.
pub fn select_p300_winner(detections: &[P300Detection]) -> Result<Option<MarkerCode>, ErpError> {
    for (i, d) in detections.iter().enumerate() {
        if detections[..i].iter().any(|e| e.code == d.code) {
            return Err(ErpError::DuplicateMarker(d.code));
        }
    }
    let mut best: Option<&P300Detection> = None;
    for d in detections.iter().filter(|d| d.valid) {
        let better = match best {
            None => true,
            Some(b) => {
                d.peak_amplitude_uv > b.peak_amplitude_uv
                    || (d.peak_amplitude_uv == b.peak_amplitude_uv && d.marker_t_us < b.marker_t_us)
            }
        };
        if better {
            best = Some(d);
        }
    }
    Ok(best.map(|d| d.code))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn stream(values: impl IntoIterator<Item = f64>) -> Vec<TimedValue> {
        values.into_iter().enumerate().map(|(i, value)| TimedValue { t_us: i as i64 * 4000, value }).collect()
    }

    fn epoch_with(f: impl Fn(f64) -> f64) -> Epoch {
        let layout = EpochLayout::new(250.0);
        Epoch {
            code: MarkerCode::Q,
            marker_t_us: 0,
            alignment_offset_us: 0,
            samples: (0..layout.len()).map(|i| f(layout.latency_ms(i))).collect(),
            layout,
        }
    }

    fn detection(code: MarkerCode, amp: f64, t_us: i64, valid: bool) -> P300Detection {
        P300Detection {
            code,
            marker_t_us: t_us,
            peak_latency_ms: 350.0,
            peak_amplitude_uv: amp,
            valid,
            threshold_uv: 2.0,
        }
    }

    #[test]
    fn layout_is_201_samples_at_250hz() {
        let l = EpochLayout::new(250.0);
        assert_eq!((l.pre_samples, l.post_samples, l.len()), (50, 150, 201));
        assert_eq!(l.latency_ms(50), 0.0);
        assert_eq!(l.latency_ms(200), 600.0);
    }

    #[test]
    fn marker_on_sample_has_zero_offset() {
        let s = stream((0..1000).map(|i| i as f64));
        let e = extract_epoch(&s, &MarkerEvent::new(MarkerCode::O, 400 * 4000), EpochLayout::new(250.0)).unwrap();
        assert_eq!(e.alignment_offset_us, 0);
        assert_eq!(e.samples[50], 400.0);
        assert_eq!(e.samples.len(), 201);
    }

    #[test]
    fn marker_between_samples_aligns_to_nearest() {
        let s = stream((0..1000).map(|i| i as f64));
        let e = extract_epoch(&s, &MarkerEvent::new(MarkerCode::O, 400 * 4000 + 1000), EpochLayout::new(250.0))
            .unwrap();
        assert_eq!(e.alignment_offset_us, -1000);
        assert_eq!(e.samples[50], 400.0);
        // exact midpoint resolves to the earlier sample
        let e = extract_epoch(&s, &MarkerEvent::new(MarkerCode::O, 400 * 4000 + 2000), EpochLayout::new(250.0))
            .unwrap();
        assert_eq!(e.samples[50], 400.0);
    }

    #[test]
    fn template_peak_lands_at_expected_index() {
        // Bump peaking 350 ms after a marker at sample 300.
        let marker_t = 300 * 4000;
        let s: Vec<TimedValue> = (0..800)
            .map(|i| {
                let dt_ms = (i as f64 * 4000.0 - marker_t as f64) / 1000.0 - 350.0;
                let v = if dt_ms.abs() <= 100.0 { (PI * dt_ms / 200.0).cos() } else { 0.0 };
                TimedValue { t_us: i * 4000, value: v }
            })
            .collect();
        let e = extract_epoch(&s, &MarkerEvent::new(MarkerCode::P, marker_t), EpochLayout::new(250.0)).unwrap();
        let argmax = (0..e.samples.len()).max_by(|&a, &b| e.samples[a].total_cmp(&e.samples[b])).unwrap();
        assert_eq!(argmax, 50 + (0.350f64 * 250.0).round() as usize);
        assert_eq!(argmax, 138);
    }

    #[test]
    fn edge_epochs_are_truncated_not_padded() {
        let s = stream((0..300).map(|_| 0.0));
        let layout = EpochLayout::new(250.0);
        for t in [10 * 4000, 200 * 4000, 299 * 4000, 2_000_000] {
            assert!(matches!(
                extract_epoch(&s, &MarkerEvent::new(MarkerCode::R, t), layout),
                Err(ErpError::Truncated { .. })
            ));
        }
        assert!(extract_epoch(&s, &MarkerEvent::new(MarkerCode::R, 149 * 4000), layout).is_ok());
    }

    #[test]
    fn baseline_correction() {
        let c = baseline_correct(&epoch_with(|_| 3.5));
        assert!(c.samples.iter().all(|&v| v == 0.0));

        let zero_mean = epoch_with(|lat| if lat < 0.0 { (lat / 4.0).rem_euclid(2.0) - 0.5 } else { lat });
        assert_eq!(baseline_correct(&zero_mean).samples, zero_mean.samples);
    }

    #[test]
    fn zeros_are_invalid() {
        let d = detect_p300(&epoch_with(|_| 0.0), (290.0, 500.0), Threshold::Absolute(2.0));
        assert!(!d.valid);
    }

    #[test]
    fn half_cosine_at_350ms_is_detected() {
        let e = epoch_with(|lat| {
            let d = lat - 350.0;
            if d.abs() <= 100.0 { 5.0 * (PI * d / 200.0).cos() } else { 0.0 }
        });
        let d = detect_p300(&baseline_correct(&e), (290.0, 500.0), Threshold::Absolute(2.0));
        assert!(d.valid);
        assert!((348.0..=352.0).contains(&d.peak_latency_ms));
        // 350 ms falls between samples; the nearest ones sit 2 ms off the crest
        assert!((d.peak_amplitude_uv - 5.0 * (PI / 100.0).cos()).abs() < 1e-9);
    }

    #[test]
    fn peaks_outside_window_are_ignored() {
        let e = epoch_with(|lat| match lat {
            l if l == 252.0 => 5.0,
            l if l == 400.0 => 1.0,
            _ => 0.0,
        });
        let d = detect_p300(&e, (290.0, 500.0), Threshold::Absolute(2.0));
        assert!(!d.valid);
        assert_eq!(d.peak_amplitude_uv, 1.0);
        assert_eq!(d.peak_latency_ms, 400.0);
    }

    #[test]
    fn relative_threshold_uses_baseline_sd() {
        let e = epoch_with(|lat| if lat < 0.0 { if (lat as i64 / 4) % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 });
        let d = detect_p300(&e, (290.0, 500.0), Threshold::Relative(2.0));
        assert!(d.threshold_uv > 1.9 && d.threshold_uv < 2.1);
    }

    #[test]
    fn winner_is_largest_valid_peak() {
        let ds = [
            detection(MarkerCode::O, 4.0, 0, true),
            detection(MarkerCode::P, 9.0, 1, false),
            detection(MarkerCode::Q, 6.0, 2, true),
        ];
        assert_eq!(select_p300_winner(&ds), Ok(Some(MarkerCode::Q)));
        assert_eq!(select_p300_winner(&ds[1..2]), Ok(None));
        assert_eq!(select_p300_winner(&[]), Ok(None));
    }

    #[test]
    fn winner_ties_go_to_earliest_marker() {
        let ds = [detection(MarkerCode::R, 4.0, 10, true), detection(MarkerCode::O, 4.0, 5, true)];
        assert_eq!(select_p300_winner(&ds), Ok(Some(MarkerCode::O)));
    }

    #[test]
    fn duplicate_marker_is_a_protocol_error() {
        let ds = [detection(MarkerCode::O, 4.0, 0, true), detection(MarkerCode::O, 5.0, 9, true)];
        assert_eq!(select_p300_winner(&ds), Err(ErpError::DuplicateMarker(MarkerCode::O)));
    }
}
