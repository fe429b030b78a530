//! LED toggle scheduling on a 72 MHz timer, flash order for a few epochs, and
//! the marker bytes the stimulator would send.

use hybrid_bci::stimulus::{
    encode_serial_markers, half_period_ticks, schedule_all, schedule_flashes, serial_byte_time_us, verify_frequency,
};
use hybrid_bci::types::StimulusConfig;

fn main() {
    let config = StimulusConfig::default();
    for stream in schedule_all(&config, 5.0).unwrap() {
        let check = verify_frequency(&stream).unwrap();
        println!(
            "LED {} {:>4.1} Hz: half period {} ticks, measured {:.6} Hz ({:.2e} %)",
            stream.led_id,
            stream.target_hz,
            half_period_ticks(stream.target_hz),
            check.measured_hz,
            check.deviation_percent
        );
    }

    let (schedules, markers) = schedule_flashes(3, &config, 42).unwrap();
    for s in &schedules {
        let order: Vec<String> = s.flashes.iter().map(|f| format!("LED{}@{}ms", f.led_id, f.onset_us / 1000)).collect();
        println!("epoch {}: {}  (min gap {} ms)", s.epoch_index, order.join(" "), s.min_onset_gap_us() / 1000);
    }
    let bytes = encode_serial_markers(&markers);
    println!("serial: {:?} ({:.0} us per byte)", String::from_utf8_lossy(&bytes), serial_byte_time_us());
}
