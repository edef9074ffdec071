//! Side-by-side radii of two bounds along a recorded path.

use serde::Serialize;

use super::figures::threshold_or_inf;
use super::table::Table;
use crate::bounds::{format_value, BoundSpec};
use crate::error::Result;
use crate::processes::ProcessState;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingSummary {
    /// First snapshot t from which the left bound is strictly below the right one through the end.
    pub left_below_from: Option<u64>,
    /// Same with the roles swapped.
    pub right_below_from: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub left: String,
    pub right: String,
    pub t: Vec<u64>,
    pub log_det_v: Vec<f64>,
    pub left_values: Vec<f64>,
    pub right_values: Vec<f64>,
    pub summary: CrossingSummary,
}

impl Comparison {
    /// left − right; zero when both are equal (including both ∞).
    pub fn difference(&self, i: usize) -> f64 {
        let (l, r) = (self.left_values[i], self.right_values[i]);
        if l == r {
            0.0
        } else {
            l - r
        }
    }

    /// Fraction of snapshots with `lo ≤ t ≤ hi` at which the left bound is strictly below.
    pub fn fraction_left_below(&self, lo: u64, hi: u64) -> f64 {
        let idx: Vec<usize> = (0..self.t.len()).filter(|&i| self.t[i] >= lo && self.t[i] <= hi).collect();
        if idx.is_empty() {
            return f64::NAN;
        }
        let below = idx.iter().filter(|&&i| self.left_values[i] < self.right_values[i]).count();
        below as f64 / idx.len() as f64
    }

    /// Summary restricted to snapshots with `t ≥ from`.
    pub fn summary_from(&self, from: u64) -> CrossingSummary {
        let start = self.t.iter().position(|&t| t >= from).unwrap_or(self.t.len());
        summarize(&self.t[start..], &self.left_values[start..], &self.right_values[start..])
    }

    pub fn to_table(&self) -> Table {
        let header = vec![
            "t".to_string(),
            "log_det_V".to_string(),
            format!("left[{}]", self.left),
            format!("right[{}]", self.right),
            "diff".to_string(),
        ];
        let mut table = Table::new(header);
        for i in 0..self.t.len() {
            table.push(vec![
                self.t[i].to_string(),
                format_value(self.log_det_v[i]),
                format_value(self.left_values[i]),
                format_value(self.right_values[i]),
                format_value(self.difference(i)),
            ]);
        }
        table
    }
}

fn tail_start(t: &[u64], holds: impl Fn(usize) -> bool) -> Option<u64> {
    let mut first = None;
    for i in (0..t.len()).rev() {
        if !holds(i) {
            break;
        }
        first = Some(t[i]);
    }
    first
}

fn summarize(t: &[u64], left: &[f64], right: &[f64]) -> CrossingSummary {
    CrossingSummary {
        left_below_from: tail_start(t, |i| left[i] < right[i]),
        right_below_from: tail_start(t, |i| right[i] < left[i]),
    }
}

/// Norm thresholds of `left` and `right` at every state; undefined or vacuous values are ∞.
pub fn compare_bounds(states: &[ProcessState], left: &BoundSpec, right: &BoundSpec, delta: f64) -> Result<Comparison> {
    let mut t = Vec::with_capacity(states.len());
    let mut log_det_v = Vec::with_capacity(states.len());
    let mut left_values = Vec::with_capacity(states.len());
    let mut right_values = Vec::with_capacity(states.len());
    for s in states {
        t.push(s.t());
        log_det_v.push(s.v().log_det());
        left_values.push(threshold_or_inf(left.evaluate(s, delta))?);
        right_values.push(threshold_or_inf(right.evaluate(s, delta))?);
    }
    let summary = summarize(&t, &left_values, &right_values);
    Ok(Comparison { left: left.label(), right: right.label(), t, log_det_v, left_values, right_values, summary })
}
