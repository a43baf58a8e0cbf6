//! Parameter layouts for each measurement class and their mapping onto
//! scenarios.
//!
//! Slots 0..8 always hold the four projective settings
//! `(φ₁, ν₁, φ₂, ν₂, φ₃, ν₃, φ₄, ν₄)` for Alice x=0, x=1 and Bob y=0, y=1.
//! The general class appends the eight POVM angles
//! `(θ, φ, η, γ, χ, μ, ω₀, ω₁)`; classes with a rank-1 element append one
//! further setting `(φ, ν)` orienting it.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{projective_povm, RankClass, Scenario};
use crate::quantum::{
    povm_from_angles, projector_pair, Operator2, Povm3, PovmAngles, ProjectiveSetting, StateVector,
};

pub const FULL_DIM: usize = 16;
pub(crate) const SETTINGS_DIM: usize = 8;

pub fn layout_dim(class: RankClass) -> usize {
    match class {
        RankClass::General => FULL_DIM,
        RankClass::R10 | RankClass::R01 | RankClass::R11 => SETTINGS_DIM + 2,
        RankClass::R00 | RankClass::R02 | RankClass::R20 => SETTINGS_DIM,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub class: RankClass,
    pub values: Vec<f64>,
}

impl ParameterVector {
    pub fn new(class: RankClass, values: Vec<f64>) -> Result<Self> {
        let expected = layout_dim(class);
        if values.len() != expected {
            return Err(Error::LayoutMismatch {
                class,
                expected,
                got: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        Ok(Self { class, values })
    }

    pub fn settings(&self) -> [ProjectiveSetting; 4] {
        settings_from(&self.values)
    }

    pub fn povm_angles(&self) -> Option<PovmAngles> {
        (self.class == RankClass::General).then(|| PovmAngles::from_slice(&self.values[SETTINGS_DIM..]))
    }

    /// Angles reduced to their canonical ranges: settings to `[0, π) × [0, 2π)`,
    /// POVM angles modulo 2π.
    pub fn canonical(&self) -> Self {
        let mut out = Vec::with_capacity(self.values.len());
        for pair in self.values[..SETTINGS_DIM].chunks(2) {
            let s = ProjectiveSetting::new(pair[0], pair[1]);
            out.extend([s.phi, s.nu]);
        }
        match self.class {
            RankClass::General => {
                out.extend(PovmAngles::from_slice(&self.values[SETTINGS_DIM..]).canonical().to_array())
            }
            _ => {
                for pair in self.values[SETTINGS_DIM..].chunks(2) {
                    let s = ProjectiveSetting::new(pair[0], pair[1]);
                    out.extend([s.phi, s.nu]);
                }
            }
        }
        Self {
            class: self.class,
            values: out,
        }
    }

    /// Sixteen slots in the CSV column order, `None` where the layout has
    /// no parameter.
    pub fn full_slots(&self) -> [Option<f64>; FULL_DIM] {
        let mut slots = [None; FULL_DIM];
        for (slot, v) in slots.iter_mut().zip(&self.values) {
            *slot = Some(*v);
        }
        slots
    }
}

fn settings_from(x: &[f64]) -> [ProjectiveSetting; 4] {
    [0, 1, 2, 3].map(|k| ProjectiveSetting {
        phi: x[2 * k],
        nu: x[2 * k + 1],
    })
}

/// Alice's third measurement for a raw parameter slice.
pub(crate) fn alice2_from(class: RankClass, x: &[f64]) -> Povm3 {
    let extra = &x[SETTINGS_DIM..];
    match class {
        RankClass::General => povm_from_angles(&PovmAngles::from_slice(extra)),
        RankClass::R11 => {
            let (p, q) = projector_pair(&ProjectiveSetting {
                phi: extra[0],
                nu: extra[1],
            });
            Povm3 {
                m0: p,
                m1: q,
                m2: Operator2::zero(),
            }
        }
        RankClass::R10 | RankClass::R01 => {
            let s = ProjectiveSetting {
                phi: extra[0],
                nu: extra[1],
            };
            projective_povm(class, &[s]).expect("single projector always completes")
        }
        RankClass::R00 | RankClass::R02 | RankClass::R20 => {
            projective_povm(class, &[]).expect("fixed completion")
        }
    }
}

/// Builds the scenario without validating `c`; callers guarantee it.
pub(crate) fn scenario_from(c: f64, state: StateVector, class: RankClass, x: &[f64]) -> Scenario {
    Scenario::from_parts(c, state, &settings_from(x), alice2_from(class, x))
}

pub fn scenario_from_params(c: f64, state: StateVector, params: &ParameterVector) -> Scenario {
    scenario_from(c, state, params.class, &params.values)
}

/// Uniform draw over the canonical angle ranges: `φ ∈ [0, π)`, phases in
/// `[0, 2π)`, and `[0, π)` for the squared-trigonometric POVM angles.
pub fn sample_uniform<R: Rng + ?Sized>(class: RankClass, rng: &mut R) -> Vec<f64> {
    let dim = layout_dim(class);
    let mut x = Vec::with_capacity(dim);
    let pairs = if class == RankClass::General { 4 } else { dim / 2 };
    for _ in 0..pairs {
        x.push(rng.random_range(0.0..PI));
        x.push(rng.random_range(0.0..TAU));
    }
    if class == RankClass::General {
        for _ in 0..6 {
            x.push(rng.random_range(0.0..PI));
        }
        for _ in 0..2 {
            x.push(rng.random_range(0.0..TAU));
        }
    }
    x
}

/// Moves a general POVM back into the positive semidefinite set while only
/// touching elements that violate by more than `tol`.
///
/// The diagonals do not depend on `γ` or `η`. Shrinking `cos²γ` raises
/// `det M₀`; shrinking `cos²η` raises all three determinants. A violated
/// `M₀` is fixed through `γ` first, then `η` absorbs whatever remains.
pub(crate) fn repair_general(x: &mut [f64], tol: f64) {
    const SHRINK: f64 = 1.0 - 1e-12;
    let c2 = |v: f64| v.cos().powi(2);
    let s2 = |v: f64| v.sin().powi(2);
    let violated = |x: &[f64]| povm_from_angles(&PovmAngles::from_slice(&x[SETTINGS_DIM..])).min_eigenvalues().map(|e| e < -tol);

    let a = PovmAngles::from_slice(&x[SETTINGS_DIM..]);
    let d0 = c2(a.theta) * c2(a.varphi) * c2(a.chi) * c2(a.mu);
    let d1 = s2(a.theta) * s2(a.chi);
    let d2 = c2(a.theta) * s2(a.varphi) * c2(a.chi) * s2(a.mu);

    let ce = c2(a.eta_p);
    if violated(x)[0] && ce > 0.0 {
        // cos⁴γ ≤ d0 / cos⁴η
        let cg_max = (d0.max(0.0).sqrt() / ce) * SHRINK;
        if c2(a.gamma) > cg_max {
            x[SETTINGS_DIM + 3] = cg_max.min(1.0).sqrt().acos();
        }
    }

    let bad = violated(x);
    if !bad.iter().any(|&b| b) {
        return;
    }
    let a = PovmAngles::from_slice(&x[SETTINGS_DIM..]);
    let cg = c2(a.gamma);
    let modulus = cg * cg + 1.0 - 2.0 * cg * (a.omega0 - a.omega1).cos();
    let bound = |d: f64, w: f64| if w > 0.0 { d / w } else { f64::INFINITY };
    // upper bounds on cos⁴η from each violated element
    let limits = [bound(d0, cg * cg), d1, bound(d2, modulus)];
    let limit = (0..3)
        .filter(|&i| bad[i])
        .map(|i| limits[i])
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let target = limit.sqrt() * SHRINK;
    if ce > target {
        x[SETTINGS_DIM + 2] = target.sqrt().acos();
    }
}
