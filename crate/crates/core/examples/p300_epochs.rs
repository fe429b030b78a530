//! Marker-locked epochs on the midline P300 channel: one attended and three
//! ignored flashes, baseline-corrected, with the detector's verdict.

use hybrid_bci::erp::{EpochLayout, P300Channel, TimedValue};
use hybrid_bci::pipeline::FrontEnd;
use hybrid_bci::prelude::*;

fn main() {
    let config = StimulusConfig::default();
    let attended = 3;
    let session = simulate_session(&config, &SynthConfig { attended: vec![attended; 2], seed: 5, ..Default::default() }).unwrap();

    let options = DecoderOptions { p300_channel: P300Channel::MidlineMean, ..Default::default() };
    let mut front = FrontEnd::new(config.sample_rate_hz, &options).unwrap();
    let stream: Vec<TimedValue> =
        session.frames.iter().map(|f| TimedValue { t_us: f.t_us, value: front.process(f).1 }).collect();

    let layout = EpochLayout::for_config(&config);
    let window = config.p300_window_ms;
    let target_code = config.led(attended).unwrap().marker;
    let mut detections = Vec::new();
    for m in session.markers.iter().filter(|m| config.epoch_index_of(m.t_us) == Some(1)) {
        let epoch = baseline_correct(&extract_epoch(&stream, m, layout).unwrap());
        let d = detect_p300(&epoch, window, Threshold::default());
        let tag = if m.code == target_code { "attended" } else { "ignored " };
        println!(
            "{} {tag} offset {:>5} us  peak {:>6.2} uV at {:>3.0} ms  valid {}",
            m.code.as_char(),
            epoch.alignment_offset_us,
            d.peak_amplitude_uv,
            d.peak_latency_ms,
            d.valid
        );
        if m.code == target_code {
            for i in (0..layout.len()).step_by(10) {
                let v = epoch.samples[i];
                println!("    {:>5.0} ms {:>6.2} {}", layout.latency_ms(i), v, "*".repeat((v.max(0.0) * 4.0) as usize));
            }
        }
        detections.push(d);
    }
    println!("winner: {:?}", select_p300_winner(&detections).unwrap());
}
