//! Welch PSD and SSVEP band features.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::types::StimulusConfig;

/// Default Welch segment: 2 s at 250 Hz, 0.5 Hz bins.
pub const DEFAULT_SEGMENT_LEN: usize = 500;
pub const DEFAULT_OVERLAP: f64 = 0.5;
/// Half-width of each SSVEP target band, Hz.
pub const DEFAULT_BAND_HALF_WIDTH_HZ: f64 = 0.5;

const BIN_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("signal has {len} samples, shorter than one {segment}-sample segment")]
    TooShort { len: usize, segment: usize },
    #[error("segment length must be at least 2")]
    SegmentLength,
    #[error("overlap fraction {0} outside [0, 1)")]
    Overlap(f64),
    #[error("band {center_hz}±{half_width_hz} Hz covers {bins} PSD bins, need at least 2")]
    CoarseResolution { center_hz: f64, half_width_hz: f64, bins: usize },
    #[error("band {center_hz}±{half_width_hz} Hz extends beyond the PSD range [0, {nyquist}] Hz")]
    BandOutOfRange { center_hz: f64, half_width_hz: f64, nyquist: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hamming,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Hamming => "hamming",
        }
    }

    /// Symmetric window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hamming => {
                if n == 1 {
                    return vec![1.0];
                }
                let m = (n - 1) as f64;
                (0..n).map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / m).cos()).collect()
            }
        }
    }
}

/// One-sided power spectral density, µV²/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    pub segment_len: usize,
    pub overlap: f64,
    pub window: Window,
    pub sample_rate_hz: f64,
    pub segments: usize,
}

impl PsdEstimate {
    pub fn bin_spacing_hz(&self) -> f64 {
        self.sample_rate_hz / self.segment_len as f64
    }

    /// Frequency of the largest bin (lowest frequency on ties).
    pub fn peak_frequency(&self) -> f64 {
        let mut best = 0;
        for (i, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = i;
            }
        }
        self.frequencies[best]
    }

    /// `sum(power) * Δf`, the one-sided integral of the density.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.bin_spacing_hz()
    }
}

/// Hop between segment starts, at least one sample.
pub fn hop_len(segment_len: usize, overlap: f64) -> usize {
    ((segment_len as f64 * (1.0 - overlap)).round() as usize).max(1)
}

/// Welch estimate: mean of windowed periodograms over segments hopped by
/// `segment_len * (1 - overlap)`, scaled by `fs * sum(w^2)` and folded to one
/// side. No detrending.
pub fn welch_psd(
    signal: &[f64],
    fs: f64,
    segment_len: usize,
    overlap: f64,
    window: Window,
) -> Result<PsdEstimate, SpectralError> {
    if segment_len < 2 {
        return Err(SpectralError::SegmentLength);
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(SpectralError::Overlap(overlap));
    }
    if signal.len() < segment_len {
        return Err(SpectralError::TooShort { len: signal.len(), segment: segment_len });
    }

    let w = window.coefficients(segment_len);
    let w_energy: f64 = w.iter().map(|x| x * x).sum();
    let hop = hop_len(segment_len, overlap);
    let segments = (signal.len() - segment_len) / hop + 1;
    let bins = segment_len / 2 + 1;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_len];
    let mut acc = vec![0.0; bins];
    for seg in 0..segments {
        let chunk = &signal[seg * hop..seg * hop + segment_len];
        for ((slot, &x), &wi) in buf.iter_mut().zip(chunk).zip(&w) {
            *slot = Complex64::new(x * wi, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
    }

    let scale = 1.0 / (fs * w_energy * segments as f64);
    let nyquist_bin = (segment_len % 2 == 0).then_some(bins - 1);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let one_sided = if k == 0 || Some(k) == nyquist_bin { 1.0 } else { 2.0 };
            a * scale * one_sided
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * fs / segment_len as f64).collect();

    Ok(PsdEstimate { frequencies, power, segment_len, overlap, window, sample_rate_hz: fs, segments })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPower {
    pub frequency_hz: f64,
    pub peak_power: f64,
}

/// Peak PSD value around each configured stimulus frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SsvepFeature {
    pub bands: Vec<BandPower>,
    /// Analysis window the PSD was computed over, µs `[start, end)`.
    pub window_us: (i64, i64),
}

/// For each configured frequency `f`, the maximum PSD bin in
/// `[f - half_width, f + half_width]` (inclusive).
pub fn extract_ssvep_features(
    psd: &PsdEstimate,
    config: &StimulusConfig,
    half_width_hz: f64,
    window_us: (i64, i64),
) -> Result<SsvepFeature, SpectralError> {
    let nyquist = psd.sample_rate_hz / 2.0;
    let bands = config
        .leds
        .iter()
        .map(|led| {
            let f = led.frequency_hz;
            let (lo, hi) = (f - half_width_hz, f + half_width_hz);
            if lo < -BIN_EPS || hi > nyquist + BIN_EPS {
                return Err(SpectralError::BandOutOfRange { center_hz: f, half_width_hz, nyquist });
            }
            let in_band: Vec<f64> = psd
                .frequencies
                .iter()
                .zip(&psd.power)
                .filter(|(&bf, _)| bf >= lo - BIN_EPS && bf <= hi + BIN_EPS)
                .map(|(_, &p)| p)
                .collect();
            if in_band.len() < 2 {
                return Err(SpectralError::CoarseResolution { center_hz: f, half_width_hz, bins: in_band.len() });
            }
            let peak_power = in_band.into_iter().fold(f64::NEG_INFINITY, f64::max);
            Ok(BandPower { frequency_hz: f, peak_power })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SsvepFeature { bands, window_us })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsvepWinner {
    pub frequency_hz: f64,
    /// Winner power over runner-up power; infinite when the runner-up is 0.
    pub margin: f64,
}

/// Band with the largest peak power. Ties go to the lowest frequency, so the
/// result does not depend on band order.
pub fn ssvep_argmax(features: &SsvepFeature) -> Option<SsvepWinner> {
    let mut sorted = features.bands.clone();
    sorted.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    let mut iter = sorted.iter();
    let mut best = *iter.next()?;
    let mut runner_up: Option<f64> = None;
    for band in iter {
        if band.peak_power > best.peak_power {
            runner_up = Some(best.peak_power);
            best = *band;
        } else {
            runner_up = Some(runner_up.map_or(band.peak_power, |r| r.max(band.peak_power)));
        }
    }
    let margin = match runner_up {
        Some(r) if r > 0.0 => best.peak_power / r,
        Some(_) if best.peak_power == 0.0 => 1.0,
        _ => f64::INFINITY,
    };
    Some(SsvepWinner { frequency_hz: best.frequency_hz, margin })
}
