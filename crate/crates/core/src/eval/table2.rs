//! Per-participant control outcomes from the 12-participant, 5-session
//! robot-navigation study, one row per (participant, session).
//!
//! Flags are the per-direction success bits (F, B, L, R). The study's own
//! per-row accuracy column is kept alongside but several entries contradict
//! their flags, so statistics are computed from the flags only.

use super::TrialRecord;
use crate::types::Command;

/// Mean accuracy quoted with the study, %. A recount of the flags gives 87.50%.
pub const PUBLISHED_MEAN_PERCENT: f64 = 86.25;

/// Direction order of the flag columns.
pub const FLAG_ORDER: [Command; 4] = [Command::Forward, Command::Backward, Command::Left, Command::Right];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Table2Row {
    pub participant: u8,
    pub session: u8,
    /// Success flags in [`FLAG_ORDER`].
    pub flags: [u8; 4],
    /// Accuracy column as printed, %.
    pub printed_accuracy: u8,
}

const fn row(participant: u8, session: u8, flags: [u8; 4], printed_accuracy: u8) -> Table2Row {
    Table2Row { participant, session, flags, printed_accuracy }
}

pub const ROWS: [Table2Row; 60] = [
    row( 1, 1, [1, 1, 1, 0],  75),
    row( 1, 2, [1, 1, 0, 1], 100),
    row( 1, 3, [1, 1, 1, 1], 100),
    row( 1, 4, [1, 1, 1, 1],  75),
    row( 1, 5, [1, 1, 1, 1], 100),
    row( 2, 1, [1, 1, 1, 0],  75),
    row( 2, 2, [1, 1, 0, 1],  75),
    row( 2, 3, [1, 1, 1, 1], 100),
    row( 2, 4, [1, 1, 1, 1], 100),
    row( 2, 5, [1, 1, 1, 0],  75),
    row( 3, 1, [1, 1, 1, 0],  75),
    row( 3, 2, [1, 1, 0, 1],  75),
    row( 3, 3, [1, 1, 1, 1], 100),
    row( 3, 4, [1, 1, 1, 1], 100),
    row( 3, 5, [1, 1, 0, 1],  75),
    row( 4, 1, [1, 1, 1, 0],  75),
    row( 4, 2, [1, 1, 1, 0],  75),
    row( 4, 3, [1, 1, 1, 1], 100),
    row( 4, 4, [1, 1, 1, 1], 100),
    row( 4, 5, [1, 1, 0, 1],  75),
    row( 5, 1, [1, 1, 0, 1], 100),
    row( 5, 2, [1, 1, 1, 0],  75),
    row( 5, 3, [1, 1, 1, 1],  75),
    row( 5, 4, [1, 1, 1, 1], 100),
    row( 5, 5, [1, 1, 1, 1], 100),
    row( 6, 1, [1, 1, 1, 0],  75),
    row( 6, 2, [1, 1, 1, 1], 100),
    row( 6, 3, [1, 1, 0, 1],  75),
    row( 6, 4, [1, 1, 0, 1],  75),
    row( 6, 5, [1, 1, 1, 1], 100),
    row( 7, 1, [1, 1, 1, 0],  75),
    row( 7, 2, [1, 1, 1, 1], 100),
    row( 7, 3, [1, 1, 1, 1], 100),
    row( 7, 4, [1, 1, 1, 1], 100),
    row( 7, 5, [1, 1, 0, 1],  75),
    row( 8, 1, [1, 1, 1, 0],  75),
    row( 8, 2, [1, 1, 0, 1],  75),
    row( 8, 3, [1, 1, 1, 1], 100),
    row( 8, 4, [1, 1, 1, 1], 100),
    row( 8, 5, [1, 1, 1, 1], 100),
    row( 9, 1, [1, 1, 1, 1], 100),
    row( 9, 2, [1, 1, 1, 1], 100),
    row( 9, 3, [1, 1, 0, 1],  75),
    row( 9, 4, [1, 1, 1, 0],  75),
    row( 9, 5, [1, 1, 1, 1], 100),
    row(10, 1, [1, 1, 0, 1],  75),
    row(10, 2, [1, 1, 1, 1], 100),
    row(10, 3, [1, 1, 1, 1], 100),
    row(10, 4, [1, 1, 0, 1],  75),
    row(10, 5, [1, 1, 1, 0],  75),
    row(11, 1, [1, 1, 1, 1], 100),
    row(11, 2, [1, 1, 0, 1],  75),
    row(11, 3, [1, 1, 0, 1],  75),
    row(11, 4, [1, 1, 1, 1], 100),
    row(11, 5, [1, 1, 1, 1], 100),
    row(12, 1, [1, 1, 1, 0],  75),
    row(12, 2, [1, 1, 1, 0],  75),
    row(12, 3, [1, 1, 1, 1], 100),
    row(12, 4, [1, 1, 1, 0], 100),
    row(12, 5, [1, 1, 1, 1], 100),
];

/// One record per (participant, session, direction): 240 in total.
pub fn records() -> Vec<TrialRecord> {
    ROWS.iter()
        .flat_map(|r| {
            FLAG_ORDER.iter().zip(r.flags).map(move |(&direction, flag)| TrialRecord {
                participant: format!("S{}", r.participant),
                session: r.session,
                direction,
                success: flag == 1,
            })
        })
        .collect()
}

/// Mean of the printed accuracy column, %.
pub fn printed_accuracy_mean() -> f64 {
    ROWS.iter().map(|r| f64::from(r.printed_accuracy)).sum::<f64>() / ROWS.len() as f64
}

/// Rows whose printed accuracy disagrees with their own flags.
pub fn inconsistent_rows() -> Vec<Table2Row> {
    ROWS.iter()
        .copied()
        .filter(|r| u32::from(r.printed_accuracy) != r.flags.iter().map(|&f| u32::from(f)).sum::<u32>() * 25)
        .collect()
}
