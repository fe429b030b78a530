//! Accuracy and information-transfer-rate statistics.
//!
//! Rates are kept as integer counts and only turned into percentages when
//! formatted, so stratified rates recompose exactly.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::types::Command;

pub mod table2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{decisions} decisions but {intents} intents")]
    LengthMismatch { decisions: usize, intents: usize },
    #[error("no trial records to aggregate")]
    Empty,
    #[error("ITR needs at least 2 targets, got {0}")]
    TooFewTargets(u32),
    #[error("accuracy {0} outside [0, 1]")]
    Accuracy(f64),
    #[error("selection time must be positive, got {0} s")]
    SelectionTime(f64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub participant: String,
    pub session: u8,
    pub direction: Command,
    pub success: bool,
}

/// Success/attempt counts for one stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rate {
    pub successes: u64,
    pub attempts: u64,
}

impl Rate {
    fn add(&mut self, success: bool) {
        self.attempts += 1;
        self.successes += u64::from(success);
    }

    pub fn fraction(&self) -> f64 {
        self.successes as f64 / self.attempts as f64
    }

    /// Percentage in hundredths, rounded half up from the exact ratio.
    pub fn percent_hundredths(&self) -> u64 {
        (2 * 10_000 * self.successes + self.attempts) / (2 * self.attempts)
    }

    /// Percentage with two decimals, e.g. `79.17`.
    pub fn percent_string(&self) -> String {
        let h = self.percent_hundredths();
        format!("{}.{:02}", h / 100, h % 100)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub overall: Rate,
    pub per_direction: BTreeMap<Command, Rate>,
    pub per_session: BTreeMap<u8, Rate>,
    pub per_participant: BTreeMap<String, Rate>,
}

impl AccuracyReport {
    /// `stratum,key,successes,attempts,percent` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("stratum,key,successes,attempts,percent\n");
        let mut row = |stratum: &str, key: &str, r: &Rate| {
            out.push_str(&format!("{stratum},{key},{},{},{}\n", r.successes, r.attempts, r.percent_string()));
        };
        row("overall", "all", &self.overall);
        for (k, r) in &self.per_direction {
            row("direction", k.as_str(), r);
        }
        for (k, r) in &self.per_session {
            row("session", &k.to_string(), r);
        }
        for (k, r) in &self.per_participant {
            row("participant", k, r);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "overall accuracy: {}% ({}/{})\n",
            self.overall.percent_string(),
            self.overall.successes,
            self.overall.attempts
        );
        out.push_str("per direction:\n");
        for (k, r) in &self.per_direction {
            out.push_str(&format!("  {:<9} {:>6}%  ({}/{})\n", k.as_str(), r.percent_string(), r.successes, r.attempts));
        }
        out.push_str("per session:\n");
        for (k, r) in &self.per_session {
            out.push_str(&format!("  session {k}  {:>6}%  ({}/{})\n", r.percent_string(), r.successes, r.attempts));
        }
        out.push_str("per participant:\n");
        for (k, r) in &self.per_participant {
            out.push_str(&format!("  {:<9} {:>6}%  ({}/{})\n", k, r.percent_string(), r.successes, r.attempts));
        }
        out
    }
}

/// A trial succeeds when the decoded command equals the intended one;
/// abstentions count as failures.
pub fn score(
    decisions: &[Option<Command>],
    intents: &[Command],
    participant: &str,
    session: u8,
) -> Result<Vec<TrialRecord>, EvalError> {
    if decisions.len() != intents.len() {
        return Err(EvalError::LengthMismatch { decisions: decisions.len(), intents: intents.len() });
    }
    Ok(decisions
        .iter()
        .zip(intents)
        .map(|(d, &intent)| TrialRecord {
            participant: participant.to_string(),
            session,
            direction: intent,
            success: *d == Some(intent),
        })
        .collect())
}

pub fn aggregate(records: &[TrialRecord]) -> Result<AccuracyReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut report = AccuracyReport {
        overall: Rate::default(),
        per_direction: BTreeMap::new(),
        per_session: BTreeMap::new(),
        per_participant: BTreeMap::new(),
    };
    for r in records {
        report.overall.add(r.success);
        report.per_direction.entry(r.direction).or_default().add(r.success);
        report.per_session.entry(r.session).or_default().add(r.success);
        report.per_participant.entry(r.participant.clone()).or_default().add(r.success);
    }
    Ok(report)
}

/// Wolpaw bits per selection:
/// `log2 N + P log2 P + (1 - P) log2((1 - P) / (N - 1))`, with `0 log 0 = 0`.
pub fn itr_bits_per_selection(accuracy: f64, targets: u32) -> Result<f64, EvalError> {
    if targets < 2 {
        return Err(EvalError::TooFewTargets(targets));
    }
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(EvalError::Accuracy(accuracy));
    }
    let n = f64::from(targets);
    let p = accuracy;
    let hit = if p > 0.0 { p * p.log2() } else { 0.0 };
    let miss = if p < 1.0 { (1.0 - p) * ((1.0 - p) / (n - 1.0)).log2() } else { 0.0 };
    Ok(n.log2() + hit + miss)
}

/// Bits per minute at one selection every `selection_time_s` seconds.
pub fn itr_bpm(accuracy: f64, targets: u32, selection_time_s: f64) -> Result<f64, EvalError> {
    if !(selection_time_s.is_finite() && selection_time_s > 0.0) {
        return Err(EvalError::SelectionTime(selection_time_s));
    }
    Ok(itr_bits_per_selection(accuracy, targets)? * 60.0 / selection_time_s)
}
