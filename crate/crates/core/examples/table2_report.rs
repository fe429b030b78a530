//! Re-aggregates the published 12-participant, 5-session study table and
//! prints accuracy by stratum plus the information transfer rate.

use hybrid_bci::eval::table2::{self, PUBLISHED_MEAN_PERCENT};
use hybrid_bci::eval::{aggregate, itr_bits_per_selection, itr_bpm};

fn main() {
    let report = aggregate(&table2::records()).unwrap();
    print!("{}", report.to_text());

    let p = report.overall.fraction();
    println!("\nrecounted {:.2}% vs published {PUBLISHED_MEAN_PERCENT:.2}%", p * 100.0);
    println!("mean of the printed accuracy column: {:.4}%", table2::printed_accuracy_mean());
    for row in table2::inconsistent_rows() {
        let hits: u32 = row.flags.iter().map(|&f| u32::from(f)).sum();
        println!(
            "  S{} session {}: printed {}% but {}/4 flags set",
            row.participant, row.session, row.printed_accuracy, hits
        );
    }

    let bits = itr_bits_per_selection(PUBLISHED_MEAN_PERCENT / 100.0, 4).unwrap();
    for t in [1.717, 2.0] {
        println!("ITR at {t} s/selection: {bits:.4} bits, {:.2} bits/min", itr_bpm(PUBLISHED_MEAN_PERCENT / 100.0, 4, t).unwrap());
    }
}
