//! Oracle suite behind `bellopt verify`.

use bellopt::oracle::{
    draw_parameters, gradient_check, grid_search_r10, local_unitary_check, mes_representation_gap, random_search,
};
use bellopt::optimizer::{start_rng, ParameterVector};
use bellopt::{lhv_max, multistart, OptimizerConfig, RankClass, StateSpec};

use crate::error::CliResult;
use crate::output::CheckOutcome;

const MAX_STARTS: usize = 200;
const RANDOM_SAMPLES: usize = 20_000;
const GRID_STEPS: usize = 12;
const SLACK: f64 = 1e-9;

fn at_least(name: &str, value: f64, threshold: f64) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        value,
        threshold,
        passed: value >= threshold,
    }
}

fn at_most(name: &str, value: f64, threshold: f64) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        value,
        threshold,
        passed: value <= threshold,
    }
}

/// Runs every check at `c` on the maximally entangled state. Searches use
/// at most 200 starts.
pub fn oracle_suite(c: f64, config: &OptimizerConfig) -> CliResult<Vec<CheckOutcome>> {
    let mes = StateSpec::Schmidt { ratio: 1.0 };
    let cfg = config.with_starts(config.starts.min(MAX_STARTS));
    let seed = cfg.seed;
    let mut out = Vec::new();

    out.push(at_most("lhv_bound_is_one", (lhv_max(c) - 1.0).abs(), 1e-12));

    let r10 = multistart(&cfg.with_class(RankClass::R10), c, &mes)?;
    let grid = grid_search_r10(c, &mes, GRID_STEPS)?;
    out.push(at_least("r10_not_below_grid", r10.best_value - grid.value, -SLACK));
    let random = random_search(c, &mes, RankClass::R10, RANDOM_SAMPLES, seed)?;
    out.push(at_least("r10_not_below_random", r10.best_value - random.value, -SLACK));

    let general = multistart(&cfg.with_class(RankClass::General), c, &mes)?;
    let random = random_search(c, &mes, RankClass::General, RANDOM_SAMPLES, seed)?;
    out.push(at_least("general_not_below_random", general.best_value - random.value, -SLACK));
    out.push(at_least("general_not_below_r10", general.best_value - r10.best_value, -SLACK));

    let mut rng = start_rng(seed, 0);
    let point = ParameterVector::new(RankClass::R11, draw_parameters(RankClass::R11, &mut rng))?;
    let grad = gradient_check(&point, c, &mes, 5, seed, &cfg)?;
    out.push(at_most("gradient_matches_secant", grad.value, 1e-3));

    let lu = local_unitary_check(&general.scenario, 100, seed);
    out.push(at_most("local_unitary_invariance", lu.value, 1e-10));

    let gap = mes_representation_gap(c, &cfg.with_class(RankClass::R10))?;
    out.push(at_most("phi_plus_matches_schmidt", gap.value, 1e-6));
    Ok(out)
}
