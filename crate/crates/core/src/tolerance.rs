//! How much symmetric experimental error the POVM advantage survives.
//!
//! An error `δ` on each of `I_CH` and `I_3` shifts `I_CH3` by `(c+1)·δ` in
//! the worst case. The advantage is what remains of the general-POVM
//! maximum after that shift, measured against the best projective maximum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::RankClass;
use crate::optimizer::OptimizationRecord;
use crate::quantum::StateSpec;

/// Bisection resolution on `δ`.
pub const DELTA_RESOLUTION: f64 = 1e-5;
const C_MATCH_TOL: f64 = 1e-9;

/// Best general and best projective maxima at one `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceInput {
    pub c: f64,
    pub povm_value: f64,
    pub projective_value: f64,
}

/// Maxima for one state over a grid of `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRecords {
    pub state: StateSpec,
    pub entries: Vec<ToleranceInput>,
}

impl ToleranceRecords {
    /// Pairs every general-class record with the best projective record at
    /// the same `c`. All records must share `state`.
    pub fn from_records(state: &StateSpec, records: &[OptimizationRecord]) -> Result<Self> {
        let mut entries: Vec<ToleranceInput> = Vec::new();
        for r in records.iter().filter(|r| r.class == RankClass::General) {
            if r.state != *state {
                return Err(Error::MissingRecord(format!("record for {:?} in a {:?} set", r.state, state)));
            }
            let projective = records
                .iter()
                .filter(|p| p.class.is_projective() && p.state == *state && same_c(p.c, r.c) && p.is_ok())
                .map(|p| p.best_value)
                .fold(f64::NEG_INFINITY, f64::max);
            if projective == f64::NEG_INFINITY {
                return Err(Error::MissingRecord(format!("projective record at c={}", r.c)));
            }
            entries.push(ToleranceInput {
                c: r.c,
                povm_value: r.best_value,
                projective_value: projective,
            });
        }
        if entries.is_empty() {
            return Err(Error::EmptyGrid);
        }
        entries.sort_by(|a, b| a.c.total_cmp(&b.c));
        Ok(Self { state: *state, entries })
    }

    pub fn entry(&self, c: f64) -> Result<&ToleranceInput> {
        self.entries
            .iter()
            .find(|e| same_c(e.c, c))
            .ok_or_else(|| Error::MissingRecord(format!("no records at c={c}")))
    }

    /// Restriction to the given values of `c`.
    pub fn restricted(&self, grid: &[f64]) -> Result<Self> {
        let entries = grid.iter().map(|&c| self.entry(c).copied()).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            state: self.state,
            entries,
        })
    }
}

fn same_c(a: f64, b: f64) -> bool {
    (a - b).abs() <= C_MATCH_TOL * (1.0 + a.abs())
}

impl ToleranceInput {
    pub fn advantage(&self, delta: f64) -> f64 {
        self.povm_value - (self.c + 1.0) * delta - self.projective_value
    }

    pub fn margin(&self, delta: f64) -> f64 {
        self.povm_value - (self.c + 1.0) * delta - 1.0
    }

    fn supports(&self, delta: f64) -> bool {
        self.advantage(delta) > 0.0 && self.margin(delta) > 0.0
    }
}

/// `I^POVM − (c+1)δ − I^PROJ` at `c`.
pub fn povm_advantage(c: f64, delta: f64, records: &ToleranceRecords) -> Result<f64> {
    Ok(records.entry(c)?.advantage(delta))
}

/// `I^POVM − (c+1)δ − 1` at `c`.
pub fn violation_margin(c: f64, delta: f64, records: &ToleranceRecords) -> Result<f64> {
    Ok(records.entry(c)?.margin(delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToleranceStatus {
    Supported,
    /// No `δ > 0` keeps both the advantage and the violation positive.
    NoTolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub state: StateSpec,
    /// Error level at which `differences` and `violation_margins` are given.
    pub delta: f64,
    pub c_grid: Vec<f64>,
    pub differences: Vec<f64>,
    pub violation_margins: Vec<f64>,
    pub max_supported_delta: f64,
    /// Grid point that supports `max_supported_delta`.
    pub argmax_c: f64,
    pub status: ToleranceStatus,
}

impl ToleranceReport {
    pub fn peak_difference(&self) -> f64 {
        self.differences.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Largest `δ` (to [`DELTA_RESOLUTION`]) for which some grid point keeps
/// both the advantage and the violation margin positive. Differences and
/// margins are reported at that `δ`.
pub fn max_supported_delta(records: &ToleranceRecords) -> ToleranceReport {
    max_supported_delta_at_resolution(records, DELTA_RESOLUTION)
}

pub fn max_supported_delta_at_resolution(records: &ToleranceRecords, resolution: f64) -> ToleranceReport {
    let (delta, argmax_c, status) = search_delta(records, resolution);
    report_at(records, delta, delta, argmax_c, status)
}

/// Like [`max_supported_delta`] but with differences and margins evaluated
/// at the given `delta`.
pub fn tolerance_at(records: &ToleranceRecords, delta: f64) -> ToleranceReport {
    let (best, argmax_c, status) = search_delta(records, DELTA_RESOLUTION);
    report_at(records, delta, best, argmax_c, status)
}

fn search_delta(records: &ToleranceRecords, resolution: f64) -> (f64, f64, ToleranceStatus) {
    let entries = &records.entries;
    let holds = |d: f64| entries.iter().any(|e| e.supports(d));
    if !holds(0.0) {
        let c = entries.first().map_or(f64::NAN, |e| e.c);
        return (0.0, c, ToleranceStatus::NoTolerance);
    }
    // the margin is negative once (c+1)δ exceeds the value itself
    let mut hi = entries
        .iter()
        .map(|e| (e.povm_value.abs() + 1.0) / (e.c + 1.0))
        .fold(0.0, f64::max)
        .max(resolution);
    while holds(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let slack = |e: &ToleranceInput| e.advantage(lo).min(e.margin(lo));
    let best = entries
        .iter()
        .filter(|e| e.supports(lo))
        .fold(None::<&ToleranceInput>, |acc, e| match acc {
            Some(a) if slack(a) >= slack(e) => Some(a),
            _ => Some(e),
        })
        .expect("lo is supported");
    let status = if lo > 0.0 {
        ToleranceStatus::Supported
    } else {
        ToleranceStatus::NoTolerance
    };
    (lo, best.c, status)
}

fn report_at(
    records: &ToleranceRecords,
    delta: f64,
    max_delta: f64,
    argmax_c: f64,
    status: ToleranceStatus,
) -> ToleranceReport {
    let e = &records.entries;
    ToleranceReport {
        state: records.state,
        delta,
        c_grid: e.iter().map(|x| x.c).collect(),
        differences: e.iter().map(|x| x.advantage(delta)).collect(),
        violation_margins: e.iter().map(|x| x.margin(delta)).collect(),
        max_supported_delta: max_delta,
        argmax_c,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(entries: &[(f64, f64, f64)]) -> ToleranceRecords {
        ToleranceRecords {
            state: StateSpec::Schmidt { ratio: 1.0 },
            entries: entries
                .iter()
                .map(|&(c, povm_value, projective_value)| ToleranceInput {
                    c,
                    povm_value,
                    projective_value,
                })
                .collect(),
        }
    }

    fn projective_max(c: f64) -> f64 {
        (-c + (c * c + (c + 1.0) * (c + 1.0)).sqrt()) / 2.0
    }

    #[test]
    fn single_point_at_c3() {
        let r = records(&[(3.0, 1.004, 1.0)]);
        let rep = max_supported_delta(&r);
        assert_eq!(rep.status, ToleranceStatus::Supported);
        assert!((rep.max_supported_delta - 0.001).abs() < DELTA_RESOLUTION);
        assert_eq!(rep.argmax_c, 3.0);
        assert!((violation_margin(3.0, 0.0, &r).unwrap() - 0.004).abs() < 1e-12);
    }

    #[test]
    fn c6_values() {
        let r = records(&[(6.0, 1.623040, projective_max(6.0))]);
        assert!((povm_advantage(6.0, 0.0018, &r).unwrap() - 0.000668).abs() < 2e-5);
        assert!((violation_margin(6.0, 0.0018, &r).unwrap() - 0.610440).abs() < 1e-6);
        assert!(povm_advantage(6.0, 0.01, &r).unwrap() < 0.0);
    }

    #[test]
    fn closed_form_over_a_grid() {
        let grid: Vec<(f64, f64, f64)> = (0..8)
            .map(|i| {
                let c = 3.0 + i as f64;
                let bump = 0.01 * (1.0 - ((c - 6.0) / 5.0).powi(2));
                (c, projective_max(c) + bump, projective_max(c))
            })
            .collect();
        let r = records(&grid);
        let rep = max_supported_delta(&r);
        let oracle = grid
            .iter()
            .map(|&(c, p, q)| ((p - q) / (c + 1.0)).min((p - 1.0) / (c + 1.0)))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((rep.max_supported_delta - oracle).abs() <= DELTA_RESOLUTION);
        assert!(rep.max_supported_delta <= oracle);
        assert!(rep.differences.iter().zip(&rep.violation_margins).any(|(d, m)| *d > 0.0 && *m > 0.0));
    }

    #[test]
    fn degraded_povm_gives_zero() {
        let r = records(&[(3.0, 1.0, 1.0), (4.0, 1.2, 1.2)]);
        let rep = max_supported_delta(&r);
        assert_eq!(rep.max_supported_delta, 0.0);
        assert_eq!(rep.status, ToleranceStatus::NoTolerance);
    }

    #[test]
    fn margin_is_not_clamped() {
        let r = records(&[(3.0, 1.004, 1.0)]);
        assert!((violation_margin(3.0, 1.0, &r).unwrap() - (1.004 - 4.0 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn advantage_is_affine() {
        let r = records(&[(4.5, 1.3, 1.29)]);
        let a0 = povm_advantage(4.5, 0.0, &r).unwrap();
        for d in [1e-4, 3e-3, 0.2] {
            let a = povm_advantage(4.5, d, &r).unwrap();
            assert!((a - (a0 - 5.5 * d)).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_c_is_an_error() {
        let r = records(&[(3.0, 1.004, 1.0)]);
        assert!(matches!(povm_advantage(5.0, 0.0, &r), Err(Error::MissingRecord(_))));
        assert!(r.restricted(&[3.0, 4.0]).is_err());
    }
}
