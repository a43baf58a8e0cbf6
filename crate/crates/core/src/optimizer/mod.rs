//! Multistart conjugate-gradient search over measurement parameters.
//!
//! Each start draws its initial point from a ChaCha stream selected by
//! `(seed, start index)` and is refined independently, so the outcome of a
//! run does not depend on whether starts are executed serially or in
//! parallel. Positivity of the general POVM is handled by a quadratic
//! eigenvalue penalty; a start that ends infeasible is re-run with a
//! stiffer penalty and finally repaired by shrinking the off-diagonal
//! magnitude `cos²η`.

pub mod cg;
pub(crate) mod gradient;
pub mod params;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{
    ich3_value, rank_profile, Correlations, I3_OUTCOME1_WEIGHT, RankClass, RankProfile, Scenario, DEFAULT_RANK_TOL,
};
use crate::par::{map_indexed, Execution};
use crate::quantum::{Povm3, StateSpec, StateVector};

pub use cg::{CgOptions, CgOutcome, CgStatus};
pub use params::{layout_dim, sample_uniform, scenario_from_params, ParameterVector, FULL_DIM};

/// Eigenvalue tolerance for a reported POVM to count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Histogram bucket width for distinct local optima.
pub const HISTOGRAM_RESOLUTION: f64 = 1e-4;
const PENALTY_ESCALATIONS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub penalty_weight: f64,
    pub fd_step: f64,
    pub measurement_class: RankClass,
    pub rank_tol: f64,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 10_000,
            tol: 1e-6,
            max_iters: 5000,
            seed: 0,
            penalty_weight: 1e4,
            fd_step: 1e-7,
            measurement_class: RankClass::General,
            rank_tol: DEFAULT_RANK_TOL,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn with_class(mut self, class: RankClass) -> Self {
        self.measurement_class = class;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.starts == 0 {
            return bad("starts must be at least 1");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.fd_step > 0.0) {
            return bad("fd_step must be positive");
        }
        if !(self.penalty_weight > 0.0) {
            return bad("penalty_weight must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        Ok(())
    }

    pub fn cg_options(&self) -> CgOptions {
        CgOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            fd_step: self.fd_step,
        }
    }
}

pub(crate) fn validate_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("c must be > 0, got {c}")))
    }
}

/// Seeded RNG for one start.
pub fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `Σ max(0, −λ_min(mᵢ))²` over the three POVM elements.
pub fn eigenvalue_violation(scenario: &Scenario) -> f64 {
    povm_violation(&scenario.alice2)
}

/// `Σ max(0, −λ_min(mᵢ))²` over the three elements.
pub fn povm_violation(povm: &Povm3) -> f64 {
    povm.min_eigenvalues()
        .iter()
        .map(|&e| if e < 0.0 { e * e } else { 0.0 })
        .sum()
}

/// Something the multistart engine can minimize.
pub trait Landscape: Sync {
    fn class(&self) -> RankClass;
    fn c(&self) -> f64;
    fn state(&self) -> StateVector;

    /// Cost to minimize at the given penalty weight.
    fn cost(&self, x: &[f64], penalty_weight: f64) -> f64;

    /// Moves a raw start somewhere the cost is meaningful. Identity unless
    /// the landscape has a region it cannot score.
    fn prepare_start(&self, start: &[f64], _opts: &CgOptions) -> Vec<f64> {
        start.to_vec()
    }

    /// Gradient of [`Landscape::cost`]; plain central differences unless a
    /// landscape knows better.
    fn gradient(&self, x: &[f64], penalty_weight: f64, fd_step: f64, g: &mut [f64]) {
        cg::fd_gradient(&|x: &[f64]| self.cost(x, penalty_weight), x, fd_step, g);
    }

    fn scenario(&self, x: &[f64]) -> Scenario {
        params::scenario_from(self.c(), self.state(), self.class(), x)
    }
}

/// I_CH3 with the positivity penalty, negated for minimization.
#[derive(Debug, Clone, Copy)]
pub struct Ich3Landscape {
    pub c: f64,
    pub state: StateVector,
    pub class: RankClass,
}

impl Ich3Landscape {
    pub fn new(c: f64, state: &StateSpec, class: RankClass) -> Result<Self> {
        validate_c(c)?;
        Ok(Self {
            c,
            state: state.build()?.vector(),
            class,
        })
    }

    pub fn penalized_value(&self, x: &[f64], penalty_weight: f64) -> f64 {
        let s = self.scenario(x);
        let value = Correlations::from_scenario_unclamped(&s).ich3(self.c);
        if self.class == RankClass::General {
            value - penalty_weight * eigenvalue_violation(&s)
        } else {
            value
        }
    }
}

impl Landscape for Ich3Landscape {
    fn class(&self) -> RankClass {
        self.class
    }

    fn c(&self) -> f64 {
        self.c
    }

    fn state(&self) -> StateVector {
        self.state
    }

    fn cost(&self, x: &[f64], penalty_weight: f64) -> f64 {
        -self.penalized_value(x, penalty_weight)
    }

    fn gradient(&self, x: &[f64], penalty_weight: f64, fd_step: f64, g: &mut [f64]) {
        let table = [ich3_table(self.c)];
        let s = self.scenario(x);
        gradient::gradient(&table, |v| -v[0], self.class, &s, x, penalty_weight, fd_step, g);
    }
}

/// I_CH3 as a coefficient table over `(A₀, A₁, M₀, M₁, I) × (B₀, B₁, I)`.
pub(crate) fn ich3_table(c: f64) -> gradient::Table {
    let k = I3_OUTCOME1_WEIGHT;
    [
        [c, c, -c],
        [c, -c, 0.0],
        [1.0, 1.0, -1.0],
        [1.0, -1.0, -k],
        [-c, 0.0, 0.0],
    ]
}

/// Penalized objective: `I_CH3 − w·Σ max(0, −λ_min)²`. The penalty is
/// inactive for projective classes, which are feasible by construction.
pub fn objective(params: &ParameterVector, c: f64, state: &StateSpec, penalty_weight: f64) -> Result<f64> {
    let land = Ich3Landscape::new(c, state, params.class)?;
    Ok(land.penalized_value(&params.values, penalty_weight))
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LocalResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub status: CgStatus,
    pub feasible: bool,
}

fn solve_at<L: Landscape>(land: &L, start: &[f64], weight: f64, opts: &CgOptions) -> CgOutcome {
    cg::minimize_with(
        |x: &[f64]| land.cost(x, weight),
        |x: &[f64], g: &mut [f64]| land.gradient(x, weight, opts.fd_step, g),
        start,
        opts,
    )
}

/// CG from one start, followed by the feasibility rescue for general POVMs.
pub(crate) fn local_solve<L: Landscape>(land: &L, start: &[f64], config: &OptimizerConfig) -> LocalResult {
    let opts = config.cg_options();
    let mut weight = config.penalty_weight;
    let start = land.prepare_start(start, &opts);
    let mut out = solve_at(land, &start, weight, &opts);
    let mut iterations = out.iterations;
    if land.class() != RankClass::General || out.status == CgStatus::NonFinite {
        let feasible = out.status != CgStatus::NonFinite;
        return LocalResult {
            x: out.x,
            iterations,
            status: out.status,
            feasible,
        };
    }
    let violated = |x: &[f64]| {
        land.scenario(x).alice2.min_eigenvalues().iter().any(|&e| e < -FEASIBILITY_TOL)
    };
    for _ in 0..PENALTY_ESCALATIONS {
        if !violated(&out.x) {
            break;
        }
        weight *= 10.0;
        let next = solve_at(land, &out.x, weight, &opts);
        iterations += next.iterations;
        if next.status == CgStatus::NonFinite {
            break;
        }
        out = next;
    }
    let mut x = out.x;
    if violated(&x) {
        params::repair_general(&mut x, FEASIBILITY_TOL);
    }
    let feasible = !violated(&x) && land.cost(&x, 0.0).is_finite();
    LocalResult {
        x,
        iterations,
        status: out.status,
        feasible,
    }
}

/// Outcome of a single CG ascent on I_CH3.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMaximum {
    pub value: f64,
    pub params: ParameterVector,
    pub converged: bool,
    pub status: CgStatus,
    pub iterations: usize,
}

/// Polak–Ribière ascent on the penalized I_CH3 from `start`, returning a
/// feasibility-checked point.
pub fn cg_maximize(
    start: &ParameterVector,
    config: &OptimizerConfig,
    c: f64,
    state: &StateSpec,
) -> Result<LocalMaximum> {
    config.validate()?;
    let land = Ich3Landscape::new(c, state, start.class)?;
    let res = local_solve(&land, &start.values, config);
    let params = ParameterVector {
        class: start.class,
        values: res.x,
    };
    Ok(LocalMaximum {
        value: ich3_value(&land.scenario(&params.values)),
        params,
        converged: res.status.converged(),
        status: res.status,
        iterations: res.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Ok,
    NoFeasibleStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRecord {
    pub c: f64,
    pub state: StateSpec,
    pub class: RankClass,
    pub best_value: f64,
    pub best_params: ParameterVector,
    pub scenario: Scenario,
    pub rank_profile: RankProfile,
    pub best_start: usize,
    pub best_converged: bool,
    pub starts: usize,
    pub n_converged: usize,
    pub n_feasible: usize,
    /// Distinct local optima `(bucket value, count)`, best first.
    pub value_histogram: Vec<(f64, usize)>,
    pub seed: u64,
    pub status: RunStatus,
    pub wall_time: f64,
}

impl OptimizationRecord {
    /// Equality of everything except wall-clock time.
    pub fn reproduces(&self, other: &OptimizationRecord) -> bool {
        let mut a = self.clone();
        a.wall_time = other.wall_time;
        a == *other
    }

    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

/// Per-start summary handed to the reduction.
#[derive(Debug, Clone)]
pub(crate) struct StartSummary {
    pub x: Vec<f64>,
    /// Public figure of merit (clamped evaluation); higher is better.
    pub merit: f64,
    pub converged: bool,
    pub feasible: bool,
}

pub(crate) struct Reduced {
    pub best: usize,
    pub n_converged: usize,
    pub n_feasible: usize,
    pub histogram: Vec<(f64, usize)>,
    pub status: RunStatus,
}

/// Best feasible merit, ties within `tol` going to the earliest index.
pub(crate) fn reduce(summaries: &[StartSummary], tol: f64, descending: bool) -> Reduced {
    let feasible: Vec<usize> = (0..summaries.len())
        .filter(|&i| summaries[i].feasible && summaries[i].merit.is_finite())
        .collect();
    let pool: Vec<usize> = if feasible.is_empty() {
        (0..summaries.len()).collect()
    } else {
        feasible.clone()
    };
    let top = pool
        .iter()
        .map(|&i| summaries[i].merit)
        .filter(|m| !m.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    let best = pool
        .iter()
        .copied()
        .find(|&i| summaries[i].merit >= top - tol)
        .unwrap_or(0);

    let mut buckets: BTreeMap<i64, usize> = BTreeMap::new();
    for &i in &feasible {
        let key = (summaries[i].merit / HISTOGRAM_RESOLUTION).round() as i64;
        *buckets.entry(key).or_default() += 1;
    }
    let sign = if descending { -1.0 } else { 1.0 };
    let histogram = buckets
        .into_iter()
        .rev()
        .map(|(k, n)| (sign * k as f64 * HISTOGRAM_RESOLUTION, n))
        .collect();
    Reduced {
        best,
        n_converged: summaries.iter().filter(|s| s.converged).count(),
        n_feasible: feasible.len(),
        histogram,
        status: if feasible.is_empty() {
            RunStatus::NoFeasibleStart
        } else {
            RunStatus::Ok
        },
    }
}

/// Runs `config.starts` independent CG searches on `land` and scores each
/// final point with `merit` (higher is better).
pub(crate) fn run_starts<L, M>(land: &L, config: &OptimizerConfig, merit: M) -> Vec<StartSummary>
where
    L: Landscape,
    M: Fn(&Scenario) -> f64 + Sync,
{
    map_indexed(config.starts, config.execution, |i| {
        let mut rng = start_rng(config.seed, i);
        let start = sample_uniform(land.class(), &mut rng);
        let res = local_solve(land, &start, config);
        let merit = if res.feasible {
            merit(&land.scenario(&res.x))
        } else {
            f64::NAN
        };
        StartSummary {
            converged: res.status.converged(),
            feasible: res.feasible && merit.is_finite(),
            x: res.x,
            merit,
        }
    })
}

/// Multistart maximization of I_CH3 for `config.measurement_class`.
pub fn multistart(config: &OptimizerConfig, c: f64, state: &StateSpec) -> Result<OptimizationRecord> {
    config.validate()?;
    let clock = Instant::now();
    let class = config.measurement_class;
    let land = Ich3Landscape::new(c, state, class)?;
    let summaries = run_starts(&land, config, ich3_value);
    let red = reduce(&summaries, config.tol, false);
    let winner = &summaries[red.best];
    let best_params = ParameterVector {
        class,
        values: winner.x.clone(),
    }
    .canonical();
    let scenario = scenario_from_params(c, land.state, &best_params);
    Ok(OptimizationRecord {
        c,
        state: *state,
        class,
        best_value: ich3_value(&scenario),
        rank_profile: rank_profile(&scenario.alice2, config.rank_tol),
        best_params,
        scenario,
        best_start: red.best,
        best_converged: winner.converged,
        starts: config.starts,
        n_converged: red.n_converged,
        n_feasible: red.n_feasible,
        value_histogram: red.histogram,
        seed: config.seed,
        status: red.status,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Vary `c` at a fixed state.
    C { grid: Vec<f64>, state: StateSpec },
    /// Vary the Schmidt ratio at a fixed `c`.
    Ratio { grid: Vec<f64>, c: f64 },
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::C { grid, .. } | SweepAxis::Ratio { grid, .. } => grid.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(c, state)` of grid point `i`.
    pub fn point(&self, i: usize) -> (f64, StateSpec) {
        match self {
            SweepAxis::C { grid, state } => (grid[i], *state),
            SweepAxis::Ratio { grid, c } => (*c, StateSpec::Schmidt { ratio: grid[i] }),
        }
    }
}

/// Evenly spaced inclusive grid `from, from+step, …, ≤ to` (with a small
/// allowance for round-off at the upper end).
pub fn linear_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(to >= from) || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bad grid from={from} to={to} step={step}"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

/// Seed for grid point `index` of a sweep.
pub fn sweep_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

/// Applies `run` to every grid point in order. Failures of individual points
/// are kept in their records; only configuration errors abort.
pub fn sweep_with<T, F>(axis: &SweepAxis, config: &OptimizerConfig, run: F) -> Result<Vec<T>>
where
    F: Fn(&OptimizerConfig, f64, &StateSpec) -> Result<T>,
{
    if axis.is_empty() {
        return Err(Error::EmptyGrid);
    }
    (0..axis.len())
        .map(|i| {
            let (c, state) = axis.point(i);
            let cfg = OptimizerConfig {
                seed: sweep_seed(config.seed, i),
                ..*config
            };
            run(&cfg, c, &state)
        })
        .collect()
}

/// One multistart record per grid point, in grid order.
pub fn sweep(axis: &SweepAxis, config: &OptimizerConfig) -> Result<Vec<OptimizationRecord>> {
    sweep_with(axis, config, multistart)
}
