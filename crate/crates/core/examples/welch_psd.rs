//! Welch spectrum of a simulated occipital channel and the SSVEP band
//! features the decoder uses.
//!
//!     cargo run --example welch_psd [attended_led]

use hybrid_bci::pipeline::SSVEP_CHANNELS;
use hybrid_bci::prelude::*;
use hybrid_bci::spectral::{DEFAULT_BAND_HALF_WIDTH_HZ, DEFAULT_OVERLAP, DEFAULT_SEGMENT_LEN};

fn main() {
    let led: u8 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let config = StimulusConfig::default();
    let target = config.led(led).expect("led id 0-3");
    let synth = SynthConfig { attended: vec![led; 3], seed: 11, ..Default::default() };
    let session = simulate_session(&config, &synth).unwrap();

    // second epoch, mean of the occipital channels
    let (start, end) = (config.epoch_start_us(1), config.epoch_start_us(2));
    let signal: Vec<f64> = session
        .frames
        .iter()
        .filter(|f| f.t_us >= start && f.t_us < end)
        .map(|f| SSVEP_CHANNELS.iter().map(|&c| f.get(c)).sum::<f64>() / SSVEP_CHANNELS.len() as f64)
        .collect();

    let psd = welch_psd(&signal, config.sample_rate_hz, DEFAULT_SEGMENT_LEN, DEFAULT_OVERLAP, Window::Hamming).unwrap();
    println!(
        "{} samples, {} segment(s), {:.2} Hz bins, peak at {:.1} Hz",
        signal.len(),
        psd.segments,
        psd.bin_spacing_hz(),
        psd.peak_frequency()
    );
    for (f, p) in psd.frequencies.iter().zip(&psd.power).filter(|(f, _)| (5.0..=22.0).contains(*f)) {
        let bar = "#".repeat(((p.max(1e-6).log10() + 3.0).max(0.0) * 8.0) as usize);
        println!("{f:>5.1} {p:>10.4} {bar}");
    }

    let features = extract_ssvep_features(&psd, &config, DEFAULT_BAND_HALF_WIDTH_HZ, (start, end)).unwrap();
    for b in &features.bands {
        println!("band {:>4.1} Hz: {:.4}", b.frequency_hz, b.peak_power);
    }
    let winner = ssvep_argmax(&features).unwrap();
    println!(
        "attended {} Hz ({}), winner {} Hz, margin {:.1}",
        target.frequency_hz, target.command, winner.frequency_hz, winner.margin
    );
}
