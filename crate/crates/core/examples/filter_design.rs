//! Designs the decoder's three filters at 250 Hz and prints their biquad
//! sections and a few magnitude checkpoints.
//!
//!     cargo run --example filter_design

use hybrid_bci::filters::{design_bandpass, design_lowpass, design_notch, FilterDesign, FilterState};
use std::sync::Arc;

const FS: f64 = 250.0;

fn report(design: &FilterDesign, probes: &[f64]) {
    println!("{} ({} sections, stable: {})", design.description(), design.sections().len(), design.is_stable());
    for (i, s) in design.sections().iter().enumerate() {
        println!("  [{i}] b = {:>10.6?}  a = {:>10.6?}", s.b, s.a);
    }
    for &f in probes {
        let r = design.frequency_response(f).expect("probe below Nyquist");
        println!("  {f:>6.1} Hz  {:>9.3} dB  {:>7.3} rad", r.magnitude_db, r.phase_rad);
    }
    println!();
}

fn main() {
    let bandpass = design_bandpass(6.5, 30.0, 4, FS).unwrap();
    let lowpass = design_lowpass(15.0, 4, FS).unwrap();
    let notch = design_notch(50.0, FS, 30.0).unwrap();

    report(&bandpass, &[2.0, 6.5, 10.0, 30.0, 60.0]);
    report(&lowpass, &[1.0, 5.0, 15.0, 30.0]);
    report(&notch, &[45.0, 49.0, 50.0, 51.0, 55.0]);

    // run a 10 Hz tone with 50 Hz hum through notch + bandpass
    let mut hum = FilterState::new(Arc::new(notch));
    let mut band = FilterState::new(Arc::new(bandpass));
    let mut peak = 0.0f64;
    for n in 0..2500 {
        let t = n as f64 / FS;
        let x = (2.0 * std::f64::consts::PI * 10.0 * t).sin() + 5.0 * (2.0 * std::f64::consts::PI * 50.0 * t).sin();
        let y = band.apply(hum.apply(x));
        if n >= 1250 {
            peak = peak.max(y.abs());
        }
    }
    println!("10 Hz tone + 5x mains hum -> steady-state peak {peak:.3} (tone alone: 1.0)");
}
