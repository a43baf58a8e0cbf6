//! Independent checks of the optimizer: brute-force baselines, gradient
//! checks and local-unitary invariance.
//!
//! Nothing here calls into the search code except where the optimizer's
//! own output is the object under test. Parameter draws and the mapping to
//! scenarios are rebuilt from the quantum and inequality layers.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{ich3_value, projective_povm, Correlations, RankClass, Scenario};
use crate::optimizer::{multistart, Ich3Landscape, Landscape, OptimizerConfig, ParameterVector};
use crate::par::{map_indexed, Execution};
use crate::quantum::{
    povm_from_angles, projector_pair, Operator2, Povm3, PovmAngles, ProjectiveSetting,
    StateSpec, TwoQubitPureState,
};

const FEASIBILITY_TOL: f64 = 1e-9;
/// Samples drawn from one RNG stream.
const BLOCK: usize = 4096;
/// Eigenvalues this close to zero put a point on the positivity boundary.
const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleMethod {
    RandomSearch,
    GridSearch,
    GradientCheck,
    LocalUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleStatus {
    Ok,
    /// No sample satisfied the positivity constraints.
    NoFeasibleSample,
    /// Gradient check touched the positivity boundary, where the penalty
    /// has a kink.
    NonSmooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub method: OracleMethod,
    /// Best value for searches, maximum deviation for checks.
    pub value: f64,
    pub samples: usize,
    pub seed: u64,
    pub status: OracleStatus,
    /// Arg-best of a search, in the optimizer's layout for the class.
    pub best_params: Option<Vec<f64>>,
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    // distinct from the optimizer's streams for the same seed
    let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(17) ^ 0x6f72_6163_6c65);
    rng.set_stream(index as u64);
    rng
}

/// One uniform draw in the optimizer's layout: settings `(φ, ν)` in
/// `[0, π) × [0, 2π)`, POVM magnitudes in `[0, π)`, phases in `[0, 2π)`.
pub fn draw_parameters<R: Rng + ?Sized>(class: RankClass, rng: &mut R) -> Vec<f64> {
    let settings = match class {
        RankClass::General => 4,
        RankClass::R10 | RankClass::R01 | RankClass::R11 => 5,
        RankClass::R00 | RankClass::R02 | RankClass::R20 => 4,
    };
    let mut x = Vec::with_capacity(16);
    for _ in 0..settings {
        x.push(rng.random_range(0.0..PI));
        x.push(rng.random_range(0.0..TAU));
    }
    if class == RankClass::General {
        x.extend((0..6).map(|_| rng.random_range(0.0..PI)));
        x.extend((0..2).map(|_| rng.random_range(0.0..TAU)));
    }
    x
}

/// Scenario for a parameter vector in the optimizer's layout, built
/// directly from the quantum layer.
pub fn scenario_of(c: f64, state: &TwoQubitPureState, class: RankClass, x: &[f64]) -> Result<Scenario> {
    let s = |k: usize| ProjectiveSetting {
        phi: x[2 * k],
        nu: x[2 * k + 1],
    };
    let povm = match class {
        RankClass::General => povm_from_angles(&PovmAngles::from_slice(&x[8..16])),
        RankClass::R11 => {
            let (p, q) = projector_pair(&s(4));
            Povm3 {
                m0: p,
                m1: q,
                m2: Operator2::zero(),
            }
        }
        RankClass::R10 | RankClass::R01 => projective_povm(class, &[s(4)])?,
        _ => projective_povm(class, &[])?,
    };
    Scenario::new(c, state, &[s(0), s(1), s(2), s(3)], povm)
}

/// Best feasible I_CH3 over uniform draws. No penalty: draws with a
/// negative POVM eigenvalue are discarded.
pub fn random_search(
    c: f64,
    state: &StateSpec,
    class: RankClass,
    samples: usize,
    seed: u64,
) -> Result<OracleReport> {
    random_search_with(c, state, class, samples, seed, |rng| draw_parameters(class, rng))
}

/// [`random_search`] with a caller-supplied draw.
pub fn random_search_with<D>(
    c: f64,
    state: &StateSpec,
    class: RankClass,
    samples: usize,
    seed: u64,
    draw: D,
) -> Result<OracleReport>
where
    D: Fn(&mut ChaCha8Rng) -> Vec<f64> + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be ≥ 1".into()));
    }
    let psi = state.build()?;
    Scenario::new(c, &psi, &[ProjectiveSetting::new(0.0, 0.0); 4], Povm3::complete(Operator2::zero(), Operator2::zero()))?;
    let blocks = samples.div_ceil(BLOCK);
    let partial = map_indexed(blocks, Execution::Parallel, |b| {
        let mut rng = stream(seed, b);
        let n = BLOCK.min(samples - b * BLOCK);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..n {
            let x = draw(&mut rng);
            let Ok(s) = scenario_of(c, &psi, class, &x) else { continue };
            if !s.alice2.is_feasible(FEASIBILITY_TOL) {
                continue;
            }
            let v = ich3_value(&s);
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, x));
            }
        }
        best
    });
    let best = partial
        .into_iter()
        .flatten()
        .fold(None::<(f64, Vec<f64>)>, |acc, (v, x)| match acc {
            Some((b, bx)) if b >= v => Some((b, bx)),
            _ => Some((v, x)),
        });
    Ok(match best {
        Some((value, x)) => OracleReport {
            method: OracleMethod::RandomSearch,
            value,
            samples,
            seed,
            status: OracleStatus::Ok,
            best_params: Some(x),
        },
        None => OracleReport {
            method: OracleMethod::RandomSearch,
            value: f64::NAN,
            samples,
            seed,
            status: OracleStatus::NoFeasibleSample,
            best_params: None,
        },
    })
}

/// Exhaustive grid over real-valued projective settings (all phases zero)
/// for the class `I_10`: five angles on `steps` points each in `[0, π)`.
pub fn grid_search_r10(c: f64, state: &StateSpec, steps: usize) -> Result<OracleReport> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be ≥ 1".into()));
    }
    let psi = state.build()?;
    let angle = |i: usize| PI * i as f64 / steps as f64;
    let rows = map_indexed(steps, Execution::Parallel, |i0| {
        let mut best = (f64::NEG_INFINITY, vec![]);
        let mut x = vec![0.0; 10];
        x[0] = angle(i0);
        for i1 in 0..steps {
            x[2] = angle(i1);
            for i2 in 0..steps {
                x[4] = angle(i2);
                for i3 in 0..steps {
                    x[6] = angle(i3);
                    for i4 in 0..steps {
                        x[8] = angle(i4);
                        let v = ich3_value(&scenario_of(c, &psi, RankClass::R10, &x).expect("valid"));
                        if v > best.0 {
                            best = (v, x.clone());
                        }
                    }
                }
            }
        }
        best
    });
    let (value, x) = rows
        .into_iter()
        .fold((f64::NEG_INFINITY, vec![]), |acc, r| if r.0 > acc.0 { r } else { acc });
    Ok(OracleReport {
        method: OracleMethod::GridSearch,
        value,
        samples: steps.pow(5),
        seed: 0,
        status: OracleStatus::Ok,
        best_params: Some(x),
    })
}

/// Penalized I_CH3 recomputed from the correlation table, with the same
/// penalty weight the optimizer uses by default.
fn reference_objective(c: f64, psi: &TwoQubitPureState, class: RankClass, x: &[f64], w: f64) -> f64 {
    let s = scenario_of(c, psi, class, x).expect("c validated");
    let value = Correlations::from_scenario_unclamped(&s).ich3(c);
    let violation: f64 = s.alice2.min_eigenvalues().iter().map(|e| e.min(0.0).powi(2)).sum();
    if class == RankClass::General {
        value - w * violation
    } else {
        value
    }
}

/// Relative gap between the optimizer's directional derivative along `d`
/// and a secant slope of the reference objective at step `10·fd_step`.
/// Returns `(deviation, touches_boundary)`.
pub fn directional_check(
    params: &ParameterVector,
    c: f64,
    state: &StateSpec,
    direction: &[f64],
    config: &OptimizerConfig,
) -> Result<(f64, bool)> {
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroDirection);
    }
    if direction.len() != params.values.len() {
        return Err(Error::InvalidParameter("direction has the wrong length".into()));
    }
    let d: Vec<f64> = direction.iter().map(|v| v / norm).collect();
    let land = Ich3Landscape::new(c, state, params.class)?;
    let psi = state.build()?;
    let x = &params.values;
    let mut g = vec![0.0; x.len()];
    land.gradient(x, config.penalty_weight, config.fd_step, &mut g);
    // the landscape minimizes the negated objective
    let fd: f64 = -g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();

    let step = 10.0 * config.fd_step;
    let shifted = |t: f64| -> Vec<f64> { x.iter().zip(&d).map(|(a, b)| a + t * b).collect() };
    let (xp, xm) = (shifted(step), shifted(-step));
    let w = config.penalty_weight;
    let secant = (reference_objective(c, &psi, params.class, &xp, w)
        - reference_objective(c, &psi, params.class, &xm, w))
        / (2.0 * step);

    let boundary = params.class == RankClass::General
        && [x.as_slice(), &xp, &xm].iter().any(|p| {
            povm_from_angles(&PovmAngles::from_slice(&p[8..16]))
                .min_eigenvalues()
                .iter()
                .any(|e| e.abs() < BOUNDARY_TOL || *e < 0.0)
        });
    let deviation = (fd - secant).abs() / secant.abs().max(1e-6);
    Ok((deviation, boundary))
}

/// Maximum [`directional_check`] deviation over random unit directions.
/// Points on the positivity boundary are reported as non-smooth.
pub fn gradient_check(
    params: &ParameterVector,
    c: f64,
    state: &StateSpec,
    trials: usize,
    seed: u64,
    config: &OptimizerConfig,
) -> Result<OracleReport> {
    let mut rng = stream(seed, 0);
    let mut worst: f64 = 0.0;
    let mut non_smooth = false;
    for _ in 0..trials.max(1) {
        let d: Vec<f64> = (0..params.values.len()).map(|_| rng.sample(StandardNormal)).collect();
        let (dev, boundary) = directional_check(params, c, state, &d, config)?;
        worst = worst.max(dev);
        non_smooth |= boundary;
    }
    Ok(OracleReport {
        method: OracleMethod::GradientCheck,
        value: worst,
        samples: trials.max(1),
        seed,
        status: if non_smooth {
            OracleStatus::NonSmooth
        } else {
            OracleStatus::Ok
        },
        best_params: None,
    })
}

/// Haar-random 2×2 unitary: Gram–Schmidt on a complex Gaussian matrix.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Operator2 {
    let mut gauss = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let a = [gauss(), gauss()];
    let b = [gauss(), gauss()];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let q0 = [a[0] / na, a[1] / na];
    let proj = q0[0].conj() * b[0] + q0[1].conj() * b[1];
    let r = [b[0] - proj * q0[0], b[1] - proj * q0[1]];
    let nr = (r[0].norm_sqr() + r[1].norm_sqr()).sqrt();
    let q1 = [r[0] / nr, r[1] / nr];
    Operator2::new([[q0[0], q1[0]], [q0[1], q1[1]]])
}

/// `|I_CH3(s) − I_CH3((U_A ⊗ U_B) s)|`.
pub fn local_unitary_deviation(scenario: &Scenario, ua: &Operator2, ub: &Operator2) -> f64 {
    (ich3_value(scenario) - ich3_value(&scenario.conjugated(ua, ub))).abs()
}

/// Largest I_CH3 change over `n` random local unitary pairs.
pub fn local_unitary_check(scenario: &Scenario, n: usize, seed: u64) -> OracleReport {
    let mut rng = stream(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..n.max(1) {
        let ua = haar_unitary(&mut rng);
        let ub = haar_unitary(&mut rng);
        worst = worst.max(local_unitary_deviation(scenario, &ua, &ub));
    }
    OracleReport {
        method: OracleMethod::LocalUnitary,
        value: worst,
        samples: n.max(1),
        seed,
        status: OracleStatus::Ok,
        best_params: None,
    }
}

/// `|best(Φ⁺) − best(Schmidt ratio 1)|` from two multistart runs; the two
/// states differ by a local unitary.
pub fn mes_representation_gap(c: f64, config: &OptimizerConfig) -> Result<OracleReport> {
    let a = multistart(config, c, &StateSpec::PhiPlus)?;
    let b = multistart(config, c, &StateSpec::Schmidt { ratio: 1.0 })?;
    Ok(OracleReport {
        method: OracleMethod::LocalUnitary,
        value: (a.best_value - b.best_value).abs(),
        samples: 2 * config.starts,
        seed: config.seed,
        status: OracleStatus::Ok,
        best_params: None,
    })
}
