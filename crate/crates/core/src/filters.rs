//! Butterworth and notch IIR designs realised as cascaded biquads.
//!
//! Designs go through an analog prototype and the bilinear transform with
//! cutoff prewarping, so the digital -3 dB points land exactly on the
//! requested cutoffs. Sections run in transposed direct form II, one sample at
//! a time, with state carried across calls.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

/// Default quality factor of the mains notch.
pub const DEFAULT_NOTCH_Q: f64 = 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("cutoffs must satisfy 0 < low < high, got low={low} high={high}")]
    CutoffOrdering { low: f64, high: f64 },
    #[error("frequency {freq} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)")]
    AboveNyquist { freq: f64, nyquist: f64 },
    #[error("bandpass order must be a positive even integer, got {0}")]
    OddOrder(usize),
    #[error("filter order must be at least 1")]
    ZeroOrder,
    #[error("quality factor must be positive, got {0}")]
    QualityFactor(f64),
    #[error("sample rate must be positive, got {0}")]
    SampleRate(f64),
    #[error("response requested at {freq} Hz, outside [0, {nyquist}] Hz")]
    ResponseRange { freq: f64, nyquist: f64 },
}

/// Second-order section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub const IDENTITY: Biquad = Biquad { b: [1.0, 0.0, 0.0], a: [0.0, 0.0] };

    /// Schur-Cohn (stability triangle) test: both poles strictly inside the
    /// unit circle.
    pub fn is_stable(&self) -> bool {
        let [a1, a2] = self.a;
        a2.abs() < 1.0 && a1.abs() < 1.0 + a2
    }

    pub fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + self.b[1] * z_inv + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z_inv + self.a[1] * z2;
        num / den
    }

    fn scale_numerator(&mut self, g: f64) {
        for b in &mut self.b {
            *b *= g;
        }
    }
}

/// Magnitude and phase of a design at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub magnitude_db: f64,
    pub phase_rad: f64,
}

/// An immutable biquad cascade plus the rate it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterDesign {
    sections: Vec<Biquad>,
    sample_rate_hz: f64,
    description: String,
}

impl FilterDesign {
    pub fn new(sections: Vec<Biquad>, sample_rate_hz: f64, description: impl Into<String>) -> Self {
        Self { sections, sample_rate_hz, description: description.into() }
    }

    /// Pass-through design, one section with b=(1,0,0), a=(1,0,0).
    pub fn identity(sample_rate_hz: f64) -> Self {
        Self::new(vec![Biquad::IDENTITY], sample_rate_hz, "identity")
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    /// Complex transfer function on the unit circle at `freq_hz`.
    pub fn transfer(&self, freq_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate_hz;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.sections.iter().map(|s| s.response(z_inv)).product()
    }

    pub fn frequency_response(&self, freq_hz: f64) -> Result<Response, DesignError> {
        let nyquist = self.sample_rate_hz / 2.0;
        if !(0.0..=nyquist).contains(&freq_hz) {
            return Err(DesignError::ResponseRange { freq: freq_hz, nyquist });
        }
        let h = self.transfer(freq_hz);
        Ok(Response { magnitude_db: 20.0 * h.norm().log10(), phase_rad: h.arg() })
    }

    /// Linear magnitude `|H(f)|`.
    pub fn gain(&self, freq_hz: f64) -> f64 {
        self.transfer(freq_hz).norm()
    }
}

fn check_rate(fs: f64) -> Result<f64, DesignError> {
    if fs.is_finite() && fs > 0.0 {
        Ok(fs / 2.0)
    } else {
        Err(DesignError::SampleRate(fs))
    }
}

fn check_below_nyquist(freq: f64, nyquist: f64) -> Result<(), DesignError> {
    if freq > 0.0 && freq < nyquist {
        Ok(())
    } else {
        Err(DesignError::AboveNyquist { freq, nyquist })
    }
}

/// Prewarped analog angular frequency for a digital frequency.
fn prewarp(freq_hz: f64, fs: f64) -> f64 {
    2.0 * fs * (PI * freq_hz / fs).tan()
}

/// Poles of the normalised analog Butterworth low-pass prototype in the upper
/// half plane (one per conjugate pair), plus the real pole for odd orders.
fn prototype_poles(order: usize) -> (Vec<Complex64>, bool) {
    let n = order as f64;
    let pairs = (0..order / 2)
        .map(|k| {
            let theta = PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n);
            Complex64::from_polar(1.0, theta)
        })
        .map(|p| if p.im < 0.0 { p.conj() } else { p })
        .collect();
    (pairs, order % 2 == 1)
}

fn bilinear(s: Complex64, fs: f64) -> Complex64 {
    let k = 2.0 * fs;
    (k + s) / (k - s)
}

fn conjugate_pair_denominator(z: Complex64) -> [f64; 2] {
    [-2.0 * z.re, z.norm_sqr()]
}

/// Butterworth bandpass of prototype order `order` (the digital filter has
/// `2 * order` poles in `order` sections).
pub fn design_bandpass(low_hz: f64, high_hz: f64, order: usize, fs: f64) -> Result<FilterDesign, DesignError> {
    let nyquist = check_rate(fs)?;
    if !(low_hz > 0.0 && high_hz > low_hz) {
        return Err(DesignError::CutoffOrdering { low: low_hz, high: high_hz });
    }
    check_below_nyquist(high_hz, nyquist)?;
    if order == 0 || order % 2 == 1 {
        return Err(DesignError::OddOrder(order));
    }

    let w_lo = prewarp(low_hz, fs);
    let w_hi = prewarp(high_hz, fs);
    let bandwidth = w_hi - w_lo;
    let center_sq = w_lo * w_hi;

    let (pairs, _) = prototype_poles(order);
    let mut sections = Vec::with_capacity(order);
    for p in pairs {
        // s^2 - p*B*s + W0^2 = 0 for each prototype pole p.
        let half = p * bandwidth / 2.0;
        let disc = (half * half - center_sq).sqrt();
        for s in [half + disc, half - disc] {
            let z = bilinear(s, fs);
            sections.push(Biquad { b: [1.0, 0.0, -1.0], a: conjugate_pair_denominator(z) });
        }
    }

    // Unity gain at the digital image of the analog centre frequency.
    let center_hz = fs / PI * (center_sq.sqrt() / (2.0 * fs)).atan();
    let mut design = FilterDesign::new(
        sections,
        fs,
        format!("butterworth bandpass {low_hz}-{high_hz} Hz, order {order}, fs {fs} Hz"),
    );
    let g = (1.0 / design.gain(center_hz)).powf(1.0 / design.sections.len() as f64);
    design.sections.iter_mut().for_each(|s| s.scale_numerator(g));
    Ok(design)
}

/// Butterworth low-pass of order `order` with unity DC gain.
pub fn design_lowpass(cutoff_hz: f64, order: usize, fs: f64) -> Result<FilterDesign, DesignError> {
    let nyquist = check_rate(fs)?;
    check_below_nyquist(cutoff_hz, nyquist)?;
    if order == 0 {
        return Err(DesignError::ZeroOrder);
    }
    let wc = prewarp(cutoff_hz, fs);
    let (pairs, has_real) = prototype_poles(order);

    let mut sections: Vec<Biquad> = pairs
        .into_iter()
        .map(|p| {
            let a = conjugate_pair_denominator(bilinear(p * wc, fs));
            let g = (1.0 + a[0] + a[1]) / 4.0;
            Biquad { b: [g, 2.0 * g, g], a }
        })
        .collect();
    if has_real {
        let z = bilinear(Complex64::new(-wc, 0.0), fs).re;
        let g = (1.0 - z) / 2.0;
        sections.push(Biquad { b: [g, g, 0.0], a: [-z, 0.0] });
    }
    Ok(FilterDesign::new(
        sections,
        fs,
        format!("butterworth lowpass {cutoff_hz} Hz, order {order}, fs {fs} Hz"),
    ))
}

/// Second-order notch with a zero pair exactly on the unit circle at
/// `center_hz`; -3 dB width is about `center_hz / q`.
pub fn design_notch(center_hz: f64, fs: f64, q: f64) -> Result<FilterDesign, DesignError> {
    let nyquist = check_rate(fs)?;
    check_below_nyquist(center_hz, nyquist)?;
    if !(q.is_finite() && q > 0.0) {
        return Err(DesignError::QualityFactor(q));
    }
    let w0 = 2.0 * PI * center_hz / fs;
    let alpha = w0.sin() / (2.0 * q);
    let cos_w0 = w0.cos();
    let a0 = 1.0 + alpha;
    let section = Biquad {
        b: [1.0 / a0, -2.0 * cos_w0 / a0, 1.0 / a0],
        a: [-2.0 * cos_w0 / a0, (1.0 - alpha) / a0],
    };
    Ok(FilterDesign::new(vec![section], fs, format!("notch {center_hz} Hz, Q {q}, fs {fs} Hz")))
}

/// Running state of one filter instance. Single owner; one stream per state.
#[derive(Debug, Clone)]
pub struct FilterState {
    design: Arc<FilterDesign>,
    delays: Vec<[f64; 2]>,
}

impl FilterState {
    pub fn new(design: Arc<FilterDesign>) -> Self {
        let delays = vec![[0.0; 2]; design.sections.len()];
        Self { design, delays }
    }

    pub fn design(&self) -> &Arc<FilterDesign> {
        &self.design
    }

    pub fn reset(&mut self) {
        self.delays.iter_mut().for_each(|d| *d = [0.0; 2]);
    }

    pub fn is_reset(&self) -> bool {
        self.delays.iter().all(|d| *d == [0.0; 2])
    }

    /// Advances the cascade by one sample.
    #[inline]
    pub fn apply(&mut self, x: f64) -> f64 {
        let mut v = x;
        for (s, d) in self.design.sections.iter().zip(self.delays.iter_mut()) {
            let y = s.b[0] * v + d[0];
            d[0] = s.b[1] * v - s.a[0] * y + d[1];
            d[1] = s.b[2] * v - s.a[1] * y;
            v = y;
        }
        v
    }

    /// Filters a block in place; identical to calling [`apply`](Self::apply)
    /// on each sample in turn.
    pub fn apply_batch(&mut self, samples: &mut [f64]) {
        for x in samples {
            *x = self.apply(*x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(design: &FilterDesign, f: f64) -> f64 {
        design.frequency_response(f).unwrap().magnitude_db
    }

    #[test]
    fn bandpass_cutoffs_are_minus_3db() {
        let bp = design_bandpass(6.5, 30.0, 4, 250.0).unwrap();
        assert_eq!(bp.sections().len(), 4);
        assert!((db(&bp, 6.5) + 3.0103).abs() < 0.1);
        assert!((db(&bp, 30.0) + 3.0103).abs() < 0.1);
        assert!(db(&bp, 13.96) >= -0.5);
        assert!(bp.is_stable());
    }

    #[test]
    fn bandpass_rejects_dc() {
        let bp = Arc::new(design_bandpass(6.5, 30.0, 4, 250.0).unwrap());
        let mut st = FilterState::new(bp);
        let mut y = 0.0;
        for _ in 0..250 * 30 {
            y = st.apply(1.0);
        }
        assert!(y.abs() < 1e-6, "dc leak {y}");
    }

    #[test]
    fn lowpass_response() {
        let lp = design_lowpass(15.0, 4, 250.0).unwrap();
        assert_eq!(lp.sections().len(), 2);
        assert!((db(&lp, 15.0) + 3.0103).abs() < 0.1);
        assert!(db(&lp, 0.0).abs() < 0.01);
        assert!(db(&lp, 50.0) <= -40.0);
    }

    #[test]
    fn odd_lowpass_has_real_section() {
        let lp = design_lowpass(20.0, 3, 250.0).unwrap();
        assert_eq!(lp.sections().len(), 2);
        assert!((db(&lp, 20.0) + 3.0103).abs() < 1e-6);
        assert!(lp.is_stable());
    }

    #[test]
    fn notch_response() {
        let n = design_notch(50.0, 250.0, DEFAULT_NOTCH_Q).unwrap();
        assert_eq!(n.sections().len(), 1);
        assert!(db(&n, 50.0) <= -40.0);
        assert!(db(&n, 10.0).abs() < 0.2);
    }

    #[test]
    fn design_errors() {
        assert_eq!(
            design_bandpass(30.0, 6.5, 4, 250.0),
            Err(DesignError::CutoffOrdering { low: 30.0, high: 6.5 })
        );
        assert!(matches!(design_bandpass(6.5, 125.0, 4, 250.0), Err(DesignError::AboveNyquist { .. })));
        assert_eq!(design_bandpass(6.5, 30.0, 3, 250.0), Err(DesignError::OddOrder(3)));
        assert!(matches!(design_lowpass(130.0, 4, 250.0), Err(DesignError::AboveNyquist { .. })));
        assert!(matches!(design_notch(125.0, 250.0, 30.0), Err(DesignError::AboveNyquist { .. })));
        assert_eq!(design_notch(50.0, 250.0, 0.0), Err(DesignError::QualityFactor(0.0)));
    }

    #[test]
    fn response_outside_range_is_an_error() {
        let id = FilterDesign::identity(250.0);
        assert!(id.frequency_response(125.0).is_ok());
        assert!(matches!(id.frequency_response(125.1), Err(DesignError::ResponseRange { .. })));
        assert!(id.frequency_response(-1.0).is_err());
    }

    #[test]
    fn identity_passes_impulse_and_is_flat() {
        let id = Arc::new(FilterDesign::identity(250.0));
        for f in [0.0, 10.0, 77.7, 125.0] {
            assert_eq!(id.frequency_response(f).unwrap().magnitude_db, 0.0);
        }
        let mut st = FilterState::new(id);
        let out: Vec<f64> = [1.0, 0.0, 0.0, 0.0].iter().map(|&x| st.apply(x)).collect();
        assert_eq!(out, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_in_zero_out() {
        let mut st = FilterState::new(Arc::new(design_bandpass(6.5, 30.0, 4, 250.0).unwrap()));
        assert!((0..10_000).all(|_| st.apply(0.0) == 0.0));
        assert!(st.is_reset());
    }

    #[test]
    fn batch_matches_sequential_bitwise() {
        use rand::{Rng, SeedableRng};
        let design = Arc::new(design_lowpass(15.0, 4, 250.0).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let input: Vec<f64> = (0..1000).map(|_| rng.random_range(-50.0..50.0)).collect();
        let mut seq = FilterState::new(design.clone());
        let expected: Vec<f64> = input.iter().map(|&x| seq.apply(x)).collect();
        let mut batch = FilterState::new(design);
        let mut got = input.clone();
        batch.apply_batch(&mut got[..400]);
        batch.apply_batch(&mut got[400..]);
        assert!(expected.iter().zip(&got).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn reset_clears_memory() {
        let mut st = FilterState::new(Arc::new(design_notch(50.0, 250.0, 30.0).unwrap()));
        st.apply(3.0);
        assert!(!st.is_reset());
        st.reset();
        assert!(st.is_reset());
    }
}
