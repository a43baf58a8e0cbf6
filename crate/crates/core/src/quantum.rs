//! Complex 2×2 operators, two-qubit pure states and the measurement
//! parametrizations used by the I_CH3 functional.
//!
//! Computational basis ordering for two qubits is `|00⟩, |01⟩, |10⟩, |11⟩`
//! with Alice on the first (left) qubit. The logical basis used by the
//! projective parametrization is `|±⟩ = (|0⟩ ± |1⟩)/√2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance used when validating Hermiticity of measurement operators.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// A 2×2 complex matrix, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Operator2 {
    pub entries: [[Complex64; 2]; 2],
}

impl Operator2 {
    pub const fn new(entries: [[Complex64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub const fn zero() -> Self {
        Self::new([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Self::new([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Hermitian matrix `[[a, b], [b*, d]]`.
    pub fn hermitian(a: f64, b: Complex64, d: f64) -> Self {
        Self::new([[Complex64::new(a, 0.0), b], [b.conj(), Complex64::new(d, 0.0)]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Self::hermitian(a, ZERO, d)
    }

    /// Rank-1 projector `|v⟩⟨v|` for a (not necessarily normalized) ket.
    pub fn outer(v: [Complex64; 2]) -> Self {
        Self::new([
            [v[0] * v[0].conj(), v[0] * v[1].conj()],
            [v[1] * v[0].conj(), v[1] * v[1].conj()],
        ])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.entries;
        Self::new([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = &self.entries;
        Self::new([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let m = &self.entries;
        let off = (m[0][1] - m[1][0].conj()).norm();
        off.max(m[0][0].im.abs()).max(m[1][1].im.abs())
    }

    pub fn max_abs_diff(&self, other: &Operator2) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.entries[i][j] - other.entries[i][j]).norm());
            }
        }
        d
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Operator2) -> Self {
        *u * *self * u.adjoint()
    }

    /// Eigenvalues in ascending order (closed form for Hermitian 2×2).
    pub fn eigenvalues(&self) -> Result<[f64; 2]> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITIAN_TOL || !dev.is_finite() {
            return Err(Error::NotHermitian(dev));
        }
        Ok(self.hermitian_eigenvalues_unchecked())
    }

    pub(crate) fn hermitian_eigenvalues_unchecked(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = self.entries[0][1];
        let mean = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        let r = (half * half + b.norm_sqr()).sqrt();
        [mean - r, mean + r]
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Operator2) -> Operator2 {
        let (a, b) = (&self.entries, &rhs.entries);
        Operator2::new([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Operator2) -> Operator2 {
        let (a, b) = (&self.entries, &rhs.entries);
        Operator2::new([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        let (a, b) = (&self.entries, &rhs.entries);
        Operator2::new([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Smaller eigenvalue of a Hermitian 2×2 operator.
pub fn min_eigenvalue(op: &Operator2) -> Result<f64> {
    op.eigenvalues().map(|e| e[0])
}

// ---------------------------------------------------------------------------
// States

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisTag {
    /// `α|01⟩ + β|10⟩`
    Schmidt01_10,
    /// `(|00⟩ + |11⟩)/√2`
    PhiPlus,
}

/// Two-qubit pure state in one of the two fixed forms used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitPureState {
    pub alpha: f64,
    pub beta: f64,
    pub basis_tag: BasisTag,
}

impl TwoQubitPureState {
    pub fn concurrence(&self) -> f64 {
        2.0 * self.alpha * self.beta
    }

    /// `α/β`; infinite for `β = 0`.
    pub fn ratio(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn vector(&self) -> StateVector {
        let a = Complex64::new(self.alpha, 0.0);
        let b = Complex64::new(self.beta, 0.0);
        match self.basis_tag {
            BasisTag::Schmidt01_10 => StateVector([ZERO, a, b, ZERO]),
            BasisTag::PhiPlus => StateVector([a, ZERO, ZERO, b]),
        }
    }
}

/// Schmidt state `α|01⟩ + β|10⟩` with `α/β = ratio`.
pub fn make_state(ratio: f64) -> Result<TwoQubitPureState> {
    if !ratio.is_finite() || ratio < 0.0 {
        return Err(Error::InvalidRatio(ratio));
    }
    let beta = 1.0 / (1.0 + ratio * ratio).sqrt();
    Ok(TwoQubitPureState {
        alpha: ratio * beta,
        beta,
        basis_tag: BasisTag::Schmidt01_10,
    })
}

pub fn make_phi_plus() -> TwoQubitPureState {
    TwoQubitPureState {
        alpha: FRAC_1_SQRT_2,
        beta: FRAC_1_SQRT_2,
        basis_tag: BasisTag::PhiPlus,
    }
}

/// Which state a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StateSpec {
    PhiPlus,
    Schmidt { ratio: f64 },
}

impl StateSpec {
    pub fn build(&self) -> Result<TwoQubitPureState> {
        match *self {
            StateSpec::PhiPlus => Ok(make_phi_plus()),
            StateSpec::Schmidt { ratio } => make_state(ratio),
        }
    }

    /// Schmidt ratio, 1 for |φ⁺⟩.
    pub fn ratio(&self) -> f64 {
        match *self {
            StateSpec::PhiPlus => 1.0,
            StateSpec::Schmidt { ratio } => ratio,
        }
    }
}

/// Amplitudes over `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector(pub [Complex64; 4]);

impl From<TwoQubitPureState> for StateVector {
    fn from(s: TwoQubitPureState) -> Self {
        s.vector()
    }
}

impl StateVector {
    #[inline]
    fn amp(&self, i: usize, j: usize) -> Complex64 {
        self.0[2 * i + j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `(U_A ⊗ U_B)|ψ⟩`.
    pub fn apply_local(&self, ua: &Operator2, ub: &Operator2) -> StateVector {
        let mut out = [ZERO; 4];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = ZERO;
                for k in 0..2 {
                    for l in 0..2 {
                        acc += ua.entries[i][k] * ub.entries[j][l] * self.amp(k, l);
                    }
                }
                out[2 * i + j] = acc;
            }
        }
        StateVector(out)
    }

    pub fn with_global_phase(&self, phase: f64) -> StateVector {
        let p = Complex64::from_polar(1.0, phase);
        StateVector(self.0.map(|a| a * p))
    }

    /// Operator `X_B` on Alice's qubit with `⟨ψ|A⊗B|ψ⟩ = tr(A X_B)`.
    pub fn alice_conditional(&self, b: &Operator2) -> Operator2 {
        let mut x = [[ZERO; 2]; 2];
        for (k, row) in x.iter_mut().enumerate() {
            for (i, cell) in row.iter_mut().enumerate() {
                let mut acc = ZERO;
                for j in 0..2 {
                    for l in 0..2 {
                        acc += self.amp(k, l) * b.entries[j][l] * self.amp(i, j).conj();
                    }
                }
                *cell = acc;
            }
        }
        Operator2::new(x)
    }

    /// Operator `Y_A` on Bob's qubit with `⟨ψ|A⊗B|ψ⟩ = tr(B Y_A)`.
    pub fn bob_conditional(&self, a: &Operator2) -> Operator2 {
        let mut y = [[ZERO; 2]; 2];
        for (l, row) in y.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut acc = ZERO;
                for i in 0..2 {
                    for k in 0..2 {
                        acc += self.amp(k, l) * a.entries[i][k] * self.amp(i, j).conj();
                    }
                }
                *cell = acc;
            }
        }
        Operator2::new(y)
    }

    /// Raw `⟨ψ|A⊗B|ψ⟩` (real part, no clamping).
    pub fn expectation(&self, a: &Operator2, b: &Operator2) -> f64 {
        trace_product_re(a, &self.alice_conditional(b))
    }
}

/// `Re tr(A X)`.
#[inline]
pub(crate) fn trace_product_re(a: &Operator2, x: &Operator2) -> f64 {
    let (a, x) = (&a.entries, &x.entries);
    (a[0][0] * x[0][0] + a[0][1] * x[1][0] + a[1][0] * x[0][1] + a[1][1] * x[1][1]).re
}

#[inline]
pub(crate) fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// `⟨ψ| A ⊗ B |ψ⟩`, clamped to `[0, 1]`.
pub fn joint_probability(state: &TwoQubitPureState, op_a: &Operator2, op_b: &Operator2) -> f64 {
    clamp_probability(state.vector().expectation(op_a, op_b))
}

// ---------------------------------------------------------------------------
// Projective measurements

/// Binary projective measurement with outcome-0 vector
/// `sinφ|+⟩ + e^{iν}cosφ|−⟩` and outcome-1 vector `cosφ|+⟩ − e^{iν}sinφ|−⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveSetting {
    pub phi: f64,
    pub nu: f64,
}

impl ProjectiveSetting {
    /// Stores `phi ∈ [0, π)` and `nu ∈ [0, 2π)`. Shifting φ by π flips the
    /// sign of both vectors, which leaves the projectors unchanged.
    pub fn new(phi: f64, nu: f64) -> Self {
        Self {
            phi: phi.rem_euclid(PI),
            nu: nu.rem_euclid(TAU),
        }
    }

    /// Outcome-0 and outcome-1 kets in the computational basis.
    pub fn kets(&self) -> ([Complex64; 2], [Complex64; 2]) {
        let (s, c) = self.phi.sin_cos();
        let e = Complex64::from_polar(1.0, self.nu);
        let plus = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        let minus = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
        let v = [0, 1].map(|i| s * plus[i] + e * c * minus[i]);
        let u = [0, 1].map(|i| c * plus[i] - e * s * minus[i]);
        (v, u)
    }
}

/// `(|v⟩⟨v|, |u⟩⟨u|)` for one projective setting.
pub fn projector_pair(setting: &ProjectiveSetting) -> (Operator2, Operator2) {
    let (v, _) = setting.kets();
    let p0 = Operator2::outer(v);
    // the complement is exact arithmetic for a normalized |v⟩
    (p0, Operator2::identity() - p0)
}

// ---------------------------------------------------------------------------
// Three-outcome POVMs

/// Eight angles parametrizing Alice's three-outcome measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PovmAngles {
    pub theta: f64,
    pub varphi: f64,
    pub eta_p: f64,
    pub gamma: f64,
    pub chi: f64,
    pub mu: f64,
    pub omega0: f64,
    pub omega1: f64,
}

impl PovmAngles {
    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            theta: x[0],
            varphi: x[1],
            eta_p: x[2],
            gamma: x[3],
            chi: x[4],
            mu: x[5],
            omega0: x[6],
            omega1: x[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.theta,
            self.varphi,
            self.eta_p,
            self.gamma,
            self.chi,
            self.mu,
            self.omega0,
            self.omega1,
        ]
    }

    /// Every angle reduced modulo 2π.
    pub fn canonical(&self) -> Self {
        Self::from_slice(&self.to_array().map(|a| a.rem_euclid(TAU)))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|a| a.is_finite())
    }
}

#[inline]
fn cos2(x: f64) -> f64 {
    let c = x.cos();
    c * c
}

#[inline]
fn sin2(x: f64) -> f64 {
    let s = x.sin();
    s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Povm3 {
    pub m0: Operator2,
    pub m1: Operator2,
    pub m2: Operator2,
}

impl Povm3 {
    /// Completes `m0, m1` with `m2 = 𝟙 − m0 − m1`.
    pub fn complete(m0: Operator2, m1: Operator2) -> Self {
        Self {
            m0,
            m1,
            m2: Operator2::identity() - m0 - m1,
        }
    }

    pub fn elements(&self) -> [&Operator2; 3] {
        [&self.m0, &self.m1, &self.m2]
    }

    pub fn completeness_deviation(&self) -> f64 {
        (self.m0 + self.m1 + self.m2).max_abs_diff(&Operator2::identity())
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.elements()
            .iter()
            .map(|m| m.hermiticity_deviation())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of each element.
    pub fn min_eigenvalues(&self) -> [f64; 3] {
        self.elements().map(|m| m.hermitian_eigenvalues_unchecked()[0])
    }

    /// Positive semidefinite within `tol` and complete within 1e-10.
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.min_eigenvalues().iter().all(|&e| e >= -tol)
            && self.completeness_deviation() <= 1e-10
    }

    pub fn conjugate_by(&self, u: &Operator2) -> Self {
        Self {
            m0: self.m0.conjugate_by(u),
            m1: self.m1.conjugate_by(u),
            m2: self.m2.conjugate_by(u),
        }
    }
}

/// Builds `M₀`, `M₁` from the angle parametrization and `M₂ = 𝟙 − M₀ − M₁`.
/// No positivity is enforced.
pub fn povm_from_angles(angles: &PovmAngles) -> Povm3 {
    let ce = cos2(angles.eta_p);
    let cg = cos2(angles.gamma);
    let m0 = Operator2::hermitian(
        cos2(angles.theta) * cos2(angles.varphi),
        -Complex64::from_polar(ce * cg, angles.omega0),
        cos2(angles.chi) * cos2(angles.mu),
    );
    let m1 = Operator2::hermitian(
        sin2(angles.theta),
        Complex64::from_polar(ce, angles.omega1),
        sin2(angles.chi),
    );
    Povm3::complete(m0, m1)
}

/// `lhs − rhs` of the three determinant conditions for `M₀`, `M₁`, `M₂`.
///
/// The diagonals of all three elements are non-negative for every angle
/// choice, so all residuals `≥ 0` is equivalent to positivity.
pub fn positivity_residuals(angles: &PovmAngles) -> [f64; 3] {
    let ct = cos2(angles.theta);
    let cc = cos2(angles.chi);
    let ce2 = cos2(angles.eta_p).powi(2);
    let cg = cos2(angles.gamma);
    let r0 = ct * cos2(angles.varphi) * cc * cos2(angles.mu) - ce2 * cg * cg;
    let r1 = sin2(angles.theta) * sin2(angles.chi) - ce2;
    // (e^{iω₀}cos²γ − e^{iω₁})(e^{−iω₀}cos²γ − e^{−iω₁}) = cos⁴γ + 1 − 2cos²γ cos(ω₀ − ω₁)
    let modulus = cg * cg + 1.0 - 2.0 * cg * (angles.omega0 - angles.omega1).cos();
    let r2 = ct * sin2(angles.varphi) * cc * sin2(angles.mu) - ce2 * modulus;
    [r0, r1, r2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;
    use std::f64::consts::FRAC_PI_4;

    fn assert_op_eq(a: &Operator2, b: &Operator2, tol: f64) {
        assert!(a.max_abs_diff(b) <= tol, "{a:?} != {b:?}");
    }

    #[test]
    fn projector_pair_at_quarter_pi_is_computational() {
        let (p0, p1) = projector_pair(&ProjectiveSetting::new(FRAC_PI_4, 0.0));
        assert_op_eq(&p0, &Operator2::diag(1.0, 0.0), 1e-12);
        assert_op_eq(&p1, &Operator2::diag(0.0, 1.0), 1e-12);
    }

    #[test]
    fn projector_pair_at_zero_selects_minus() {
        let (p0, p1) = projector_pair(&ProjectiveSetting::new(0.0, 0.0));
        let minus = Operator2::hermitian(0.5, Complex64::new(-0.5, 0.0), 0.5);
        let plus = Operator2::hermitian(0.5, Complex64::new(0.5, 0.0), 0.5);
        assert_op_eq(&p0, &minus, 1e-12);
        assert_op_eq(&p1, &plus, 1e-12);
    }

    #[test]
    fn projector_outcome_one_matches_u_ket() {
        let s = ProjectiveSetting::new(0.3, 1.1);
        let (_, u) = s.kets();
        let (_, p1) = projector_pair(&s);
        assert_op_eq(&p1, &Operator2::outer(u), 1e-12);
    }

    #[test]
    fn setting_reduction() {
        let s = ProjectiveSetting::new(-0.5, 7.0);
        assert!((0.0..PI).contains(&s.phi));
        assert!((0.0..TAU).contains(&s.nu));
        let (a, _) = projector_pair(&s);
        let (b, _) = projector_pair(&ProjectiveSetting { phi: -0.5, nu: 7.0 });
        assert_op_eq(&a, &b, 1e-12);
    }

    #[test]
    fn trivial_povm() {
        let angles = PovmAngles {
            theta: FRAC_PI_2,
            varphi: 0.0,
            eta_p: FRAC_PI_2,
            gamma: 0.0,
            chi: FRAC_PI_2,
            mu: 0.0,
            omega0: 0.0,
            omega1: 0.0,
        };
        let povm = povm_from_angles(&angles);
        assert_op_eq(&povm.m0, &Operator2::zero(), 1e-12);
        assert_op_eq(&povm.m1, &Operator2::identity(), 1e-12);
        assert_op_eq(&povm.m2, &Operator2::zero(), 1e-12);
        assert!(positivity_residuals(&angles).iter().all(|&r| r >= 0.0));
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_abs_diff_eq!(min_eigenvalue(&Operator2::identity()).unwrap(), 1.0);
        assert_abs_diff_eq!(min_eigenvalue(&Operator2::diag(1.0, 0.0)).unwrap(), 0.0);
        let bad = Operator2::new([[ONE, ONE], [ZERO, ONE]]);
        assert!(matches!(min_eigenvalue(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn min_eigenvalue_of_reported_rank_two_element() {
        // MES c = 100 threshold-efficiency element M₀, printed to four digits
        let m0 = Operator2::hermitian(0.8009, Complex64::new(-0.0844, -0.0262), 0.0102);
        let e = m0.eigenvalues().unwrap();
        assert_abs_diff_eq!(e[0], 0.000488, epsilon = 1e-4);
        assert_abs_diff_eq!(e[1], 0.810611, epsilon = 1e-4);
    }

    #[test]
    fn states() {
        let mes = make_state(1.0).unwrap();
        assert_abs_diff_eq!(mes.alpha, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(mes.concurrence(), 1.0, epsilon = 1e-15);
        let prod = make_state(0.0).unwrap();
        assert_eq!(prod.alpha, 0.0);
        assert_eq!(prod.beta, 1.0);
        assert_eq!(prod.concurrence(), 0.0);
        assert_abs_diff_eq!(make_state(0.5).unwrap().concurrence(), 0.8, epsilon = 1e-15);
        assert!(make_state(-1.0).is_err());
        assert!(make_state(f64::NAN).is_err());
        assert!(make_state(f64::INFINITY).is_err());
        assert_eq!(make_phi_plus().basis_tag, BasisTag::PhiPlus);
    }

    #[test]
    fn joint_probability_examples() {
        let p0 = Operator2::diag(1.0, 0.0);
        let p1 = Operator2::diag(0.0, 1.0);
        let id = Operator2::identity();
        assert_abs_diff_eq!(joint_probability(&make_phi_plus(), &p0, &p0), 0.5, epsilon = 1e-15);
        let s = make_state(0.37).unwrap();
        assert_abs_diff_eq!(joint_probability(&s, &p0, &p1), s.alpha * s.alpha, epsilon = 1e-15);
        assert_abs_diff_eq!(joint_probability(&s, &id, &id), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn conditional_operator_matches_direct_sum() {
        let psi = StateVector([
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.4, 0.1),
            Complex64::new(0.3, -0.6),
            Complex64::new(0.5, 0.25),
        ]);
        let a = Operator2::hermitian(0.3, Complex64::new(0.1, -0.2), 0.6);
        let b = Operator2::hermitian(0.7, Complex64::new(-0.3, 0.05), 0.2);
        // explicit ⟨ψ|A⊗B|ψ⟩ via the 4×4 Kronecker product
        let mut direct = ZERO;
        for r in 0..4 {
            for s in 0..4 {
                let k = a.entries[r / 2][s / 2] * b.entries[r % 2][s % 2];
                direct += psi.0[r].conj() * k * psi.0[s];
            }
        }
        assert_abs_diff_eq!(psi.expectation(&a, &b), direct.re, epsilon = 1e-14);
        assert!(direct.im.abs() < 1e-14);
    }
}
