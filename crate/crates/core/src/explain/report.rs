use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ExplainError;
use crate::gp::RunReport;

/// Mean and population standard deviation over the runs that reached one length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub sequence_length: usize,
    pub runs: usize,
    pub best_mean: f64,
    pub best_std: f64,
    pub union_mean: f64,
    pub union_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub rows: Vec<AccuracyRow>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-length accuracy over one or more runs.
pub fn accuracy_report(reports: &[RunReport]) -> Result<AccuracyTable, ExplainError> {
    let mut by_len: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in reports {
        for l in &r.lengths {
            let e = by_len.entry(l.sequence_length).or_default();
            e.0.push(l.best_accuracy);
            e.1.push(l.union_accuracy);
        }
    }
    if by_len.is_empty() {
        return Err(ExplainError::EmptyReport);
    }
    let rows = by_len
        .into_iter()
        .map(|(len, (best, union))| {
            let (best_mean, best_std) = mean_std(&best);
            let (union_mean, union_std) = mean_std(&union);
            AccuracyRow {
                sequence_length: len,
                runs: best.len(),
                best_mean,
                best_std,
                union_mean,
                union_std,
            }
        })
        .collect();
    Ok(AccuracyTable { rows })
}

impl AccuracyTable {
    /// Long format: `length,metric,mean,std,runs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("length,metric,mean,std,runs\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},best,{},{},{}", r.sequence_length, r.best_mean, r.best_std, r.runs);
            let _ = writeln!(out, "{},union,{},{},{}", r.sequence_length, r.union_mean, r.union_std, r.runs);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("length  runs  best_mean  best_std  union_mean  union_std\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6}  {:>4}  {:>9.4}  {:>8.4}  {:>10.4}  {:>9.4}",
                r.sequence_length, r.runs, r.best_mean, r.best_std, r.union_mean, r.union_std
            );
        }
        out
    }

    pub fn row(&self, sequence_length: usize) -> Option<&AccuracyRow> {
        self.rows.iter().find(|r| r.sequence_length == sequence_length)
    }
}

/// `a - b` per length present in both tables. The spread combines both
/// sides as `sqrt(std_a^2 + std_b^2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffRow {
    pub sequence_length: usize,
    pub best_diff: f64,
    pub best_std: f64,
    pub union_diff: f64,
    pub union_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffTable {
    pub rows: Vec<DiffRow>,
}

pub fn diff_reports(a: &AccuracyTable, b: &AccuracyTable) -> DiffTable {
    let rows = a
        .rows
        .iter()
        .filter_map(|ra| {
            let rb = b.row(ra.sequence_length)?;
            Some(DiffRow {
                sequence_length: ra.sequence_length,
                best_diff: ra.best_mean - rb.best_mean,
                best_std: ra.best_std.hypot(rb.best_std),
                union_diff: ra.union_mean - rb.union_mean,
                union_std: ra.union_std.hypot(rb.union_std),
            })
        })
        .collect();
    DiffTable { rows }
}

impl DiffTable {
    /// Long format: `length,metric,mean,std`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("length,metric,mean,std\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},best_diff,{},{}", r.sequence_length, r.best_diff, r.best_std);
            let _ = writeln!(out, "{},union_diff,{},{}", r.sequence_length, r.union_diff, r.union_std);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("length  best_diff  best_std  union_diff  union_std\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6}  {:>+9.4}  {:>8.4}  {:>+10.4}  {:>9.4}",
                r.sequence_length, r.best_diff, r.best_std, r.union_diff, r.union_std
            );
        }
        out
    }

    pub fn row(&self, sequence_length: usize) -> Option<&DiffRow> {
        self.rows.iter().find(|r| r.sequence_length == sequence_length)
    }
}
