//! Data behind each figure, one CSV row per plotted point.
//!
//! | id | content |
//! |----|---------|
//! | 1 | MES maxima vs `c`, general POVM and `I_10` |
//! | 2 | overlap of Bob's outcome-0 vectors vs `c` (MES) |
//! | 3 | POVM minus best projective maximum vs `c` (MES) |
//! | 4, 5 | the same difference at error `δ = 0.01`, `δ = 0.0018` |
//! | 6–8 | six projective classes vs Schmidt ratio at `c = 3, 5, 10` |
//! | 9–11 | general, `I_10`, `I_11` vs Schmidt ratio at `c = 3, 5, 10` |
//! | 12 | difference vs `c` for ratios 1, 0.9, 0.8, 0.7 |
//! | 13–15 | minimal `η_crit` vs `c` for ratios 1, 0.7, 0.5 |
//! | 16 | minimal `η_crit` vs `c` for ratio 0.05, large `c` |

use bellopt::efficiency::{best_projective_eta_crit, minimize_eta_crit};
use bellopt::inequality::bob_overlap;
use bellopt::optimizer::{linear_grid, sweep_seed};
use bellopt::tolerance::{tolerance_at, ToleranceRecords};
use bellopt::{multistart, OptimizationRecord, OptimizerConfig, RankClass, StateSpec};

use crate::error::{CliError, CliResult};
use crate::output::SweepRow;

const MES: StateSpec = StateSpec::Schmidt { ratio: 1.0 };
const ETA_GRID: [f64; 11] = [1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 20.0, 30.0, 50.0, 70.0, 100.0];
const ETA_GRID_LARGE_C: [f64; 5] = [400.0, 1000.0, 2000.0, 5000.0, 10_000.0];

pub fn default_grid(id: u8) -> Vec<f64> {
    match id {
        6..=11 => linear_grid(0.5, 1.0, 0.05).expect("valid grid"),
        13..=15 => ETA_GRID.to_vec(),
        16 => ETA_GRID_LARGE_C.to_vec(),
        _ => linear_grid(1.0, 10.0, 0.5).expect("valid grid"),
    }
}

/// Every class in `classes` at every `c`, grid-major. Grid point `i` runs
/// with seed `sweep_seed(config.seed, i)`.
pub fn records_over_c(
    config: &OptimizerConfig,
    grid: &[f64],
    state: &StateSpec,
    classes: &[RankClass],
) -> CliResult<Vec<OptimizationRecord>> {
    let mut out = Vec::with_capacity(grid.len() * classes.len());
    for (i, &c) in grid.iter().enumerate() {
        let cfg = config.with_seed(sweep_seed(config.seed, i));
        for &class in classes {
            out.push(multistart(&cfg.with_class(class), c, state)?);
        }
    }
    Ok(out)
}

pub fn with_projective(first: RankClass) -> Vec<RankClass> {
    std::iter::once(first).chain(RankClass::PROJECTIVE).collect()
}

pub fn figure(id: u8, grid: &[f64], config: &OptimizerConfig) -> CliResult<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(bellopt::Error::EmptyGrid.into());
    }
    match id {
        1 => {
            let recs = records_over_c(config, grid, &MES, &[RankClass::General, RankClass::R10])?;
            Ok(recs.iter().map(SweepRow::from_record).collect())
        }
        2 => {
            let recs = records_over_c(config, grid, &MES, &[RankClass::General])?;
            Ok(recs
                .iter()
                .map(|r| SweepRow::from_record(r).with_value(bob_overlap(&r.scenario)))
                .collect())
        }
        3 => differences(config, grid, &MES, 0.0),
        4 => differences(config, grid, &MES, 0.01),
        5 => differences(config, grid, &MES, 0.0018),
        6..=8 => ratio_sweep(config, grid, figure_c(id), &RankClass::PROJECTIVE),
        9..=11 => ratio_sweep(
            config,
            grid,
            figure_c(id),
            &[RankClass::General, RankClass::R10, RankClass::R11],
        ),
        12 => {
            let mut rows = Vec::new();
            for ratio in [1.0, 0.9, 0.8, 0.7] {
                rows.extend(differences(config, grid, &StateSpec::Schmidt { ratio }, 0.0)?);
            }
            Ok(rows)
        }
        13 => eta_curve(config, grid, 1.0),
        14 => eta_curve(config, grid, 0.7),
        15 => eta_curve(config, grid, 0.5),
        16 => eta_curve(config, grid, 0.05),
        _ => Err(CliError::Usage(format!("no figure {id}"))),
    }
}

fn figure_c(id: u8) -> f64 {
    match id {
        6 | 9 => 3.0,
        7 | 10 => 5.0,
        _ => 10.0,
    }
}

/// `I^POVM − (c+1)δ − I^PROJ` with the best of the six projective classes.
fn differences(config: &OptimizerConfig, grid: &[f64], state: &StateSpec, delta: f64) -> CliResult<Vec<SweepRow>> {
    let recs = records_over_c(config, grid, state, &with_projective(RankClass::General))?;
    let table = ToleranceRecords::from_records(state, &recs)?;
    let report = tolerance_at(&table, delta);
    let general = recs.iter().filter(|r| r.class == RankClass::General);
    Ok(general
        .zip(&report.differences)
        .map(|(r, &d)| SweepRow::from_record(r).with_value(d))
        .collect())
}

fn ratio_sweep(config: &OptimizerConfig, grid: &[f64], c: f64, classes: &[RankClass]) -> CliResult<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(grid.len() * classes.len());
    for (i, &ratio) in grid.iter().enumerate() {
        let cfg = config.with_seed(sweep_seed(config.seed, i));
        for &class in classes {
            let r = multistart(&cfg.with_class(class), c, &StateSpec::Schmidt { ratio })?;
            rows.push(SweepRow::from_record(&r));
        }
    }
    Ok(rows)
}

/// General-POVM minimum with its row, then the best projective class.
fn eta_curve(config: &OptimizerConfig, grid: &[f64], ratio: f64) -> CliResult<Vec<SweepRow>> {
    let state = StateSpec::Schmidt { ratio };
    let mut rows = Vec::with_capacity(2 * grid.len());
    for (i, &c) in grid.iter().enumerate() {
        let cfg = config.with_seed(sweep_seed(config.seed, i));
        let general = minimize_eta_crit(c, &state, &cfg.with_class(RankClass::General))?;
        rows.push(SweepRow::from_efficiency(&general));
        if let Some((class, eta)) = best_projective_eta_crit(c, &state, &cfg)? {
            let mut row = SweepRow::bare(c, &state, class.label());
            row.eta_crit = Some(eta);
            row.seed = Some(cfg.seed);
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grids_are_nonempty_and_increasing() {
        for id in 1..=16 {
            let g = default_grid(id);
            assert!(!g.is_empty());
            assert!(g.windows(2).all(|w| w[0] < w[1]), "figure {id}");
        }
        assert_eq!(default_grid(6).len(), 11);
        assert_eq!(default_grid(1).len(), 19);
    }
}
