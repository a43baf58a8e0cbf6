//! Detection efficiency: the efficiency-adjusted functional, the threshold
//! efficiency `η_crit` in its ratio and root forms, and its minimization.
//!
//! An undetected particle produces no outcome event, so joint terms scale
//! with `η²` and one-sided marginals with `η`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{
    ich3_value, rank_profile, Correlations, RankClass, RankProfile, Scenario, I3_OUTCOME1_WEIGHT,
};
use crate::optimizer::gradient::{self, Table};
use crate::optimizer::{
    cg, ich3_table, povm_violation, reduce, run_starts, scenario_from_params, validate_c, CgOptions,
    Landscape, OptimizerConfig, ParameterVector, RunStatus,
};
use crate::quantum::{StateSpec, StateVector};

/// Cost assigned where the ratio is undefined or the scenario does not
/// violate at full efficiency.
pub const BARRIER: f64 = 1e12;
/// I_CH3 level the start preparation climbs to before the ratio is minimized.
const ENTRY_MARGIN: f64 = 1e-2;
const BISECTION_TOL: f64 = 1e-10;

/// `I_CH3` split by how many detections each term needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTerms {
    /// All joint-probability terms with their signs.
    pub joint: f64,
    /// `−c·p_A(0|0) − p_A(0|2) − (1−1/√2)·p_A(1|2)`.
    pub alice: f64,
    /// `−c·p_B(0|0)`.
    pub bob: f64,
}

impl EfficiencyTerms {
    pub fn of(scenario: &Scenario) -> Self {
        Self::from_correlations(&scenario.correlations(), scenario.c)
    }

    fn from_correlations(p: &Correlations, c: f64) -> Self {
        Self {
            joint: c * p.ch_joint() + p.i3_joint(),
            alice: -c * p.pa_binary[0] - p.pa_povm[0] - I3_OUTCOME1_WEIGHT * p.pa_povm[1],
            bob: -c * p.pb[0],
        }
    }

    fn at(&self, eta: f64) -> f64 {
        eta * (eta * self.joint + self.alice + self.bob)
    }
}

/// `η²·T_J + η·(T_A + T_B)`.
pub fn efficiency_value(scenario: &Scenario, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::EfficiencyOutOfRange(eta));
    }
    Ok(EfficiencyTerms::of(scenario).at(eta))
}

/// Numerator and denominator of the threshold ratio.
fn ratio_parts(p: &Correlations, c: f64) -> (f64, f64) {
    let num = c * p.pa_binary[0]
        + p.pa_povm[0]
        + I3_OUTCOME1_WEIGHT * p.pa_povm[1]
        + (c + 1.0) * p.pb[0]
        + p.pb[1];
    let den = c * p.ch_joint() + p.i3_joint();
    (num, den)
}

/// Threshold efficiency from the closed-form ratio of marginal terms to
/// joint terms. Not clamped to `[0, 1]`.
pub fn eta_crit_ratio(scenario: &Scenario) -> Result<f64> {
    let (num, den) = ratio_parts(&scenario.correlations(), scenario.c);
    if den <= 0.0 {
        return Err(Error::NonPositiveDenominator(den));
    }
    Ok(num / den)
}

/// Smallest `η ∈ (0, 1]` with `efficiency_value(scenario, η) = 1`.
pub fn eta_crit_root(scenario: &Scenario) -> Result<f64> {
    threshold_root(&EfficiencyTerms::of(scenario))
}

fn threshold_root(t: &EfficiencyTerms) -> Result<f64> {
    let full = t.at(1.0);
    if full < 1.0 {
        return Err(Error::NoThreshold(full));
    }
    let m = t.alice + t.bob;
    if t.joint > 0.0 {
        // positive root of T_J η² + m η − 1, in the cancellation-free form
        let root = 2.0 / (m + (m * m + 4.0 * t.joint).sqrt());
        if root.is_finite() && root > 0.0 {
            return Ok(root.min(1.0));
        }
    }
    // f(0) = 0 < 1 ≤ f(1) and f has at most one crossing on [0, 1]
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if t.at(mid) >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaMethod {
    RatioFormula,
    RootSolve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyResult {
    pub c: f64,
    pub state: StateSpec,
    pub class: RankClass,
    pub eta_crit: f64,
    pub method: EtaMethod,
    pub params: ParameterVector,
    pub scenario: Scenario,
    pub rank_profile: RankProfile,
    /// I_CH3 of the optimal scenario at full efficiency.
    pub reference_ich_value: f64,
    /// The other formulation evaluated on the same scenario, when defined.
    pub cross_check: Option<f64>,
    pub best_start: usize,
    pub starts: usize,
    pub n_converged: usize,
    pub n_feasible: usize,
    /// Distinct local minima `(η_crit bucket, count)`, lowest first.
    pub value_histogram: Vec<(f64, usize)>,
    pub seed: u64,
    pub status: RunStatus,
    pub wall_time: f64,
}

impl EfficiencyResult {
    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }

    /// `|ratio − root|` on the optimal scenario.
    pub fn formulation_gap(&self) -> Option<f64> {
        self.cross_check.map(|v| (v - self.eta_crit).abs())
    }
}

/// Coefficient tables for the ratio numerator and denominator.
fn ratio_tables(c: f64) -> [Table; 2] {
    let k = I3_OUTCOME1_WEIGHT;
    let num = [
        [0.0, 0.0, c],
        [0.0; 3],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, k],
        [c + 1.0, 1.0, 0.0],
    ];
    let den = [
        [c, c, 0.0],
        [c, -c, 0.0],
        [1.0, 1.0, 0.0],
        [1.0, -1.0, 0.0],
        [0.0; 3],
    ];
    [num, den]
}

/// Coefficient table for the one-sided terms `T_A + T_B`.
fn marginal_table(c: f64) -> Table {
    let k = I3_OUTCOME1_WEIGHT;
    [
        [0.0, 0.0, -c],
        [0.0; 3],
        [0.0, 0.0, -1.0],
        [0.0, 0.0, -k],
        [-c, 0.0, 0.0],
    ]
}

/// Smallest root from `(T_A + T_B, T_J, I_CH3)`, with the same barrier.
fn barrier_root(v: &[f64; 3]) -> f64 {
    let (m, joint, ich3) = (v[0], v[1], v[2]);
    if joint > 0.0 && ich3 > 1.0 {
        2.0 / (m + (m * m + 4.0 * joint).sqrt())
    } else {
        BARRIER
    }
}

fn barrier_ratio(v: &[f64; 3]) -> f64 {
    let (num, den, ich3) = (v[0], v[1], v[2]);
    if den > 0.0 && ich3 > 1.0 {
        num / den
    } else {
        BARRIER
    }
}

/// `η_crit` in either formulation plus positivity penalty, with a barrier
/// outside the violating region.
#[derive(Debug, Clone)]
pub struct EfficiencyLandscape {
    c: f64,
    state: StateVector,
    class: RankClass,
    tables: [Table; 3],
    combine: Combine,
}

/// Objective from the three table values.
type Combine = fn(&[f64; 3]) -> f64;

impl EfficiencyLandscape {
    pub fn new(c: f64, state: &StateSpec, class: RankClass, method: EtaMethod) -> Result<Self> {
        validate_c(c)?;
        let [num, den] = ratio_tables(c);
        let (tables, combine): ([Table; 3], Combine) = match method {
            EtaMethod::RatioFormula => ([num, den, ich3_table(c)], barrier_ratio),
            EtaMethod::RootSolve => ([marginal_table(c), den, ich3_table(c)], barrier_root),
        };
        Ok(Self {
            c,
            state: state.build()?.vector(),
            class,
            tables,
            combine,
        })
    }

    fn penalty(&self, s: &Scenario, w: f64) -> f64 {
        if self.class == RankClass::General {
            w * povm_violation(&s.alice2)
        } else {
            0.0
        }
    }

    /// Climbs I_CH3 just past the local bound; a flat cost once there.
    fn entry_cost(&self, x: &[f64], w: f64) -> f64 {
        let s = self.scenario(x);
        let v = gradient::evaluate(&[self.tables[2]], &s)[0];
        (1.0 + ENTRY_MARGIN - v).max(0.0) + self.penalty(&s, w)
    }
}

impl Landscape for EfficiencyLandscape {
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
        let s = self.scenario(x);
        (self.combine)(&gradient::evaluate(&self.tables, &s)) + self.penalty(&s, penalty_weight)
    }

    fn gradient(&self, x: &[f64], penalty_weight: f64, fd_step: f64, g: &mut [f64]) {
        let s = self.scenario(x);
        gradient::gradient(&self.tables, self.combine, self.class, &s, x, penalty_weight, fd_step, g);
    }

    fn prepare_start(&self, start: &[f64], opts: &CgOptions) -> Vec<f64> {
        if self.cost(start, 0.0) < BARRIER {
            return start.to_vec();
        }
        // penalty weight matters little here: the main solve enforces it
        let w = 1e4;
        let hinge = |v: &[f64; 1]| (1.0 + ENTRY_MARGIN - v[0]).max(0.0);
        let table = [self.tables[2]];
        cg::minimize_with(
            |x: &[f64]| self.entry_cost(x, w),
            |x: &[f64], g: &mut [f64]| {
                let s = self.scenario(x);
                gradient::gradient(&table, hinge, self.class, &s, x, w, opts.fd_step, g)
            },
            start,
            opts,
        )
        .x
    }
}

/// `η_crit` of a scenario in the given formulation when it is a meaningful
/// threshold: positive denominator and violation at full efficiency.
pub fn admissible_eta_crit(scenario: &Scenario, method: EtaMethod) -> Option<f64> {
    let p = scenario.correlations();
    let (num, den) = ratio_parts(&p, scenario.c);
    if !(den > 0.0 && p.ich3(scenario.c) > 1.0) {
        return None;
    }
    match method {
        EtaMethod::RatioFormula => Some(num / den),
        EtaMethod::RootSolve => threshold_root(&EfficiencyTerms::from_correlations(&p, scenario.c)).ok(),
    }
}

/// Multistart minimization of the ratio-form `η_crit` over
/// `config.measurement_class`.
pub fn minimize_eta_crit(c: f64, state: &StateSpec, config: &OptimizerConfig) -> Result<EfficiencyResult> {
    minimize_eta_crit_with(c, state, config, EtaMethod::RatioFormula)
}

/// As [`minimize_eta_crit`], choosing which formulation is minimized. The
/// other one is reported as the cross-check.
pub fn minimize_eta_crit_with(
    c: f64,
    state: &StateSpec,
    config: &OptimizerConfig,
    method: EtaMethod,
) -> Result<EfficiencyResult> {
    config.validate()?;
    let clock = Instant::now();
    let class = config.measurement_class;
    let land = EfficiencyLandscape::new(c, state, class, method)?;
    let summaries = run_starts(&land, config, |s| admissible_eta_crit(s, method).map_or(f64::NAN, |v| -v));
    let red = reduce(&summaries, config.tol, true);
    let winner = &summaries[red.best];
    let params = ParameterVector {
        class,
        values: winner.x.clone(),
    }
    .canonical();
    let scenario = scenario_from_params(c, land.state, &params);
    let status = red.status;
    let (eta_crit, cross_check) = match status {
        RunStatus::Ok => {
            let ratio = eta_crit_ratio(&scenario)?;
            let root = eta_crit_root(&scenario).ok();
            match method {
                EtaMethod::RatioFormula => (ratio, root),
                EtaMethod::RootSolve => (root.unwrap_or(f64::NAN), Some(ratio)),
            }
        }
        RunStatus::NoFeasibleStart => (f64::NAN, None),
    };
    Ok(EfficiencyResult {
        c,
        state: *state,
        class,
        eta_crit,
        method,
        rank_profile: rank_profile(&scenario.alice2, config.rank_tol),
        reference_ich_value: ich3_value(&scenario),
        params,
        scenario,
        cross_check,
        best_start: red.best,
        starts: config.starts,
        n_converged: red.n_converged,
        n_feasible: red.n_feasible,
        value_histogram: red.histogram,
        seed: config.seed,
        status,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

/// Lowest `η_crit` over the six projective rank classes, as `(class, η)`.
/// Classes with no admissible start are skipped.
pub fn best_projective_eta_crit(
    c: f64,
    state: &StateSpec,
    config: &OptimizerConfig,
) -> Result<Option<(RankClass, f64)>> {
    let mut best: Option<(RankClass, f64)> = None;
    for class in RankClass::PROJECTIVE {
        let r = minimize_eta_crit(c, state, &config.with_class(class))?;
        if r.is_ok() && best.is_none_or(|(_, b)| r.eta_crit < b) {
            best = Some((class, r.eta_crit));
        }
    }
    Ok(best)
}
