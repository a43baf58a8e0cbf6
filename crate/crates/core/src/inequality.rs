//! The I_CH3 functional, its CH and I_3 blocks, the projective rank-class
//! variants and the deterministic local bound.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    clamp_probability, projector_pair, trace_product_re, Operator2, Povm3, ProjectiveSetting,
    StateVector, TwoQubitPureState,
};

/// Weight `1 − 1/√2` of `p_A(1|2)` in I_3.
pub const I3_OUTCOME1_WEIGHT: f64 = 1.0 - FRAC_1_SQRT_2;

/// Default threshold separating zero from non-zero eigenvalues.
pub const DEFAULT_RANK_TOL: f64 = 1e-4;

/// Restriction on Alice's three-outcome measurement. `Rjk` fixes
/// `rank(m0) = j`, `rank(m1) = k` with the total rank equal to 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RankClass {
    R00,
    R01,
    R10,
    R11,
    R02,
    R20,
    General,
}

impl RankClass {
    pub const PROJECTIVE: [RankClass; 6] = [
        RankClass::R00,
        RankClass::R01,
        RankClass::R10,
        RankClass::R11,
        RankClass::R02,
        RankClass::R20,
    ];

    pub fn is_projective(self) -> bool {
        self != RankClass::General
    }

    /// Ranks of `(m0, m1)`; `None` for the general class.
    pub fn ranks(self) -> Option<(u8, u8)> {
        match self {
            RankClass::R00 => Some((0, 0)),
            RankClass::R01 => Some((0, 1)),
            RankClass::R10 => Some((1, 0)),
            RankClass::R11 => Some((1, 1)),
            RankClass::R02 => Some((0, 2)),
            RankClass::R20 => Some((2, 0)),
            RankClass::General => None,
        }
    }

    /// Number of rank-1 projectors that must be supplied for `m0, m1`.
    pub fn projector_count(self) -> usize {
        match self.ranks() {
            Some((a, b)) => usize::from(a == 1) + usize::from(b == 1),
            None => 0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RankClass::R00 => "r00",
            RankClass::R01 => "r01",
            RankClass::R10 => "r10",
            RankClass::R11 => "r11",
            RankClass::R02 => "r02",
            RankClass::R20 => "r20",
            RankClass::General => "general",
        }
    }
}

impl fmt::Display for RankClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for RankClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r00" => Ok(RankClass::R00),
            "r01" => Ok(RankClass::R01),
            "r10" => Ok(RankClass::R10),
            "r11" => Ok(RankClass::R11),
            "r02" => Ok(RankClass::R02),
            "r20" => Ok(RankClass::R20),
            "general" => Ok(RankClass::General),
            other => Err(Error::InvalidParameter(format!("unknown rank class {other:?}"))),
        }
    }
}

/// Two-outcome measurement `(E₀, E₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMeasurement {
    pub e0: Operator2,
    pub e1: Operator2,
}

impl BinaryMeasurement {
    pub fn projective(setting: &ProjectiveSetting) -> Self {
        let (e0, e1) = projector_pair(setting);
        Self { e0, e1 }
    }

    pub fn conjugate_by(&self, u: &Operator2) -> Self {
        Self {
            e0: self.e0.conjugate_by(u),
            e1: self.e1.conjugate_by(u),
        }
    }
}

/// Complete measurement layout: Alice `x ∈ {0, 1}` binary, `x = 2`
/// three-outcome; Bob `y ∈ {0, 1}` binary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub c: f64,
    pub state: StateVector,
    pub alice0: BinaryMeasurement,
    pub alice1: BinaryMeasurement,
    pub bob0: BinaryMeasurement,
    pub bob1: BinaryMeasurement,
    pub alice2: Povm3,
}

impl Scenario {
    pub fn new(
        c: f64,
        state: &TwoQubitPureState,
        settings: &[ProjectiveSetting; 4],
        alice2: Povm3,
    ) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("c must be > 0, got {c}")));
        }
        Ok(Self::from_parts(c, state.vector(), settings, alice2))
    }

    pub(crate) fn from_parts(
        c: f64,
        state: StateVector,
        settings: &[ProjectiveSetting; 4],
        alice2: Povm3,
    ) -> Self {
        Self {
            c,
            state,
            alice0: BinaryMeasurement::projective(&settings[0]),
            alice1: BinaryMeasurement::projective(&settings[1]),
            bob0: BinaryMeasurement::projective(&settings[2]),
            bob1: BinaryMeasurement::projective(&settings[3]),
            alice2,
        }
    }

    /// Applies `U_A ⊗ U_B` to the state and conjugates every operator.
    pub fn conjugated(&self, ua: &Operator2, ub: &Operator2) -> Self {
        Self {
            c: self.c,
            state: self.state.apply_local(ua, ub),
            alice0: self.alice0.conjugate_by(ua),
            alice1: self.alice1.conjugate_by(ua),
            bob0: self.bob0.conjugate_by(ub),
            bob1: self.bob1.conjugate_by(ub),
            alice2: self.alice2.conjugate_by(ua),
        }
    }

    pub fn correlations(&self) -> Correlations {
        Correlations::from_scenario(self)
    }
}

/// Every probability entering I_CH3, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlations {
    /// `p(00|xy)` for `x, y ∈ {0, 1}`.
    pub p00: [[f64; 2]; 2],
    /// `p(a0|2y)` for `a ∈ {0, 1, 2}`.
    pub p_povm: [[f64; 2]; 3],
    /// `p_A(0|x)` for `x ∈ {0, 1}`.
    pub pa_binary: [f64; 2],
    /// `p_A(a|2)`.
    pub pa_povm: [f64; 3],
    /// `p_B(0|y)`.
    pub pb: [f64; 2],
}

impl Correlations {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self::evaluate(s, clamp_probability)
    }

    /// Same as [`Correlations::from_scenario`] without clamping; used inside
    /// the optimizer where penalized iterates may leave the feasible set.
    pub(crate) fn from_scenario_unclamped(s: &Scenario) -> Self {
        Self::evaluate(s, |p| p)
    }

    fn evaluate(s: &Scenario, clamp: impl Fn(f64) -> f64) -> Self {
        let xb = [
            s.state.alice_conditional(&s.bob0.e0),
            s.state.alice_conditional(&s.bob1.e0),
        ];
        let xi = s.state.alice_conditional(&Operator2::identity());
        let alice = [&s.alice0.e0, &s.alice1.e0];
        let povm = s.alice2.elements();
        let p = |a: &Operator2, x: &Operator2| clamp(trace_product_re(a, x));
        Self {
            p00: [0, 1].map(|x| [0, 1].map(|y| p(alice[x], &xb[y]))),
            p_povm: [0, 1, 2].map(|a| [0, 1].map(|y| p(povm[a], &xb[y]))),
            pa_binary: [0, 1].map(|x| p(alice[x], &xi)),
            pa_povm: [0, 1, 2].map(|a| p(povm[a], &xi)),
            pb: [0, 1].map(|y| clamp(xb[y].trace().re)),
        }
    }

    /// Joint part of the CH block: `p(00|00)+p(00|01)+p(00|10)−p(00|11)`.
    pub fn ch_joint(&self) -> f64 {
        self.p00[0][0] + self.p00[0][1] + self.p00[1][0] - self.p00[1][1]
    }

    /// Joint part of I_3: `p(00|20)+p(00|21)+p(10|20)−p(10|21)`.
    pub fn i3_joint(&self) -> f64 {
        self.p_povm[0][0] + self.p_povm[0][1] + self.p_povm[1][0] - self.p_povm[1][1]
    }

    pub fn ich(&self) -> f64 {
        self.ch_joint() - self.pa_binary[0] - self.pb[0]
    }

    pub fn i3(&self) -> f64 {
        self.i3_joint() - self.pa_povm[0] - I3_OUTCOME1_WEIGHT * self.pa_povm[1]
    }

    pub fn ich3(&self, c: f64) -> f64 {
        c * self.ich() + self.i3()
    }
}

pub fn ich_value(scenario: &Scenario) -> f64 {
    scenario.correlations().ich()
}

pub fn i3_value(scenario: &Scenario) -> f64 {
    scenario.correlations().i3()
}

/// `c·I_CH + I_3`.
pub fn ich3_value(scenario: &Scenario) -> f64 {
    scenario.correlations().ich3(scenario.c)
}

/// Alice's three-outcome measurement built from projective ingredients.
///
/// Rank-1 elements take the outcome-0 projector of the supplied settings,
/// in order `m0` then `m1`. Rank-0 elements are zero, rank-2 the identity,
/// and `m2` completes to the identity.
pub fn projective_povm(class: RankClass, settings: &[ProjectiveSetting]) -> Result<Povm3> {
    let (r0, r1) = class.ranks().ok_or_else(|| {
        Error::InvalidParameter("general class has no projective completion".into())
    })?;
    let needed = class.projector_count();
    if settings.len() < needed {
        return Err(Error::MissingSetting(class, needed));
    }
    let mut next = settings.iter();
    let mut element = |rank: u8| match rank {
        0 => Operator2::zero(),
        1 => projector_pair(next.next().expect("count checked")).0,
        _ => Operator2::identity(),
    };
    let m0 = element(r0);
    let m1 = element(r1);
    let povm = Povm3::complete(m0, m1);
    let min_eig = povm.m2.hermitian_eigenvalues_unchecked()[0];
    if min_eig < -1e-9 {
        return Err(Error::InfeasibleCompletion { class, min_eig });
    }
    Ok(povm)
}

/// Scenario whose third Alice measurement is restricted to `class`.
pub fn projective_variant_params(
    class: RankClass,
    c: f64,
    state: &TwoQubitPureState,
    settings: &[ProjectiveSetting; 4],
    alice2_settings: &[ProjectiveSetting],
) -> Result<Scenario> {
    let povm = projective_povm(class, alice2_settings)?;
    Scenario::new(c, state, settings, povm)
}

/// Maximum of I_CH3 over the 48 deterministic local strategies.
///
/// Alice picks outcomes `a0, a1 ∈ {0,1}` and `a2 ∈ {0,1,2}`, Bob `b0, b1 ∈ {0,1}`;
/// each probability is then an indicator.
pub fn lhv_max(c: f64) -> f64 {
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    let mut best = f64::NEG_INFINITY;
    for a0 in 0..2u8 {
        for a1 in 0..2u8 {
            for a2 in 0..3u8 {
                for b0 in 0..2u8 {
                    for b1 in 0..2u8 {
                        let both = |a: u8, x: u8, b: u8| ind(a == x && b == 0);
                        let ch = both(a0, 0, b0) + both(a0, 0, b1) + both(a1, 0, b0)
                            - both(a1, 0, b1)
                            - ind(a0 == 0)
                            - ind(b0 == 0);
                        let i3 = both(a2, 0, b0) + both(a2, 0, b1) + both(a2, 1, b0)
                            - both(a2, 1, b1)
                            - ind(a2 == 0)
                            - I3_OUTCOME1_WEIGHT * ind(a2 == 1);
                        best = best.max(c * ch + i3);
                    }
                }
            }
        }
    }
    best
}

/// `|⟨v₃|v₄⟩|²` between Bob's outcome-0 vectors, i.e. `tr(P₃P₄)` for
/// rank-1 projectors.
pub fn bob_overlap(scenario: &Scenario) -> f64 {
    (scenario.bob0.e0 * scenario.bob1.e0).trace().re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    /// Ascending eigenvalue pairs of `m0, m1, m2`.
    pub eigenvalues: [[f64; 2]; 3],
    pub numerical_ranks: [u8; 3],
}

impl RankProfile {
    pub fn total_rank(&self) -> u32 {
        self.numerical_ranks.iter().map(|&r| u32::from(r)).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e[0]).fold(f64::INFINITY, f64::min)
    }
}

pub fn rank_profile(povm: &Povm3, rank_tol: f64) -> RankProfile {
    let eigenvalues = povm.elements().map(|m| m.hermitian_eigenvalues_unchecked());
    let numerical_ranks = eigenvalues.map(|e| e.iter().filter(|&&v| v > rank_tol).count() as u8);
    RankProfile {
        eigenvalues,
        numerical_ranks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{make_phi_plus, make_state};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn zero_one() -> ProjectiveSetting {
        ProjectiveSetting::new(FRAC_PI_4, 0.0)
    }

    fn one_zero() -> ProjectiveSetting {
        // outcome-0 vector |1⟩ up to phase: sinφ|+⟩ + e^{iν}cosφ|−⟩ with φ = 3π/4
        ProjectiveSetting::new(3.0 * FRAC_PI_4, 0.0)
    }

    #[test]
    fn one_zero_setting_selects_ket_one() {
        let (p0, _) = projector_pair(&one_zero());
        assert!(p0.max_abs_diff(&Operator2::diag(0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn coincident_settings_give_non_positive_ch() {
        let s = ProjectiveSetting::new(0.37, 1.2);
        for r in [0.0, 0.3, 1.0] {
            let state = make_state(r).unwrap();
            let sc = Scenario::new(2.0, &state, &[s; 4], Povm3::complete(Operator2::zero(), Operator2::zero()))
                .unwrap();
            let corr = sc.correlations();
            let p = corr.p00[0][0];
            assert_abs_diff_eq!(corr.ich(), 2.0 * p - corr.pa_binary[0] - corr.pb[0], epsilon = 1e-12);
            assert!(corr.ich() <= 1e-12);
        }
    }

    #[test]
    fn product_state_saturates_local_bound_of_ch() {
        // ratio 0 gives |10⟩; Alice projects on |1⟩ and Bob on |0⟩ with outcome 0
        let state = make_state(0.0).unwrap();
        let settings = [one_zero(), one_zero(), zero_one(), zero_one()];
        let sc = Scenario::new(1.0, &state, &settings, Povm3::complete(Operator2::zero(), Operator2::zero()))
            .unwrap();
        let corr = sc.correlations();
        assert_eq!(corr.p00, [[1.0, 1.0], [1.0, 1.0]]);
        assert_abs_diff_eq!(ich_value(&sc), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_povm_i3() {
        let state = make_state(0.6).unwrap();
        let b = ProjectiveSetting::new(0.2, 0.9);
        let settings = [zero_one(), zero_one(), b, b];
        let povm = Povm3::complete(Operator2::zero(), Operator2::identity());
        let sc = Scenario::new(3.0, &state, &settings, povm).unwrap();
        assert_abs_diff_eq!(i3_value(&sc), -I3_OUTCOME1_WEIGHT, epsilon = 1e-12);
        assert_abs_diff_eq!(i3_value(&sc), -0.29289321881345254, epsilon = 1e-12);
    }

    #[test]
    fn identity_first_element_i3() {
        let state = make_state(0.8).unwrap();
        let settings = [zero_one(), one_zero(), ProjectiveSetting::new(0.4, 0.3), ProjectiveSetting::new(1.3, 2.0)];
        let povm = Povm3::complete(Operator2::identity(), Operator2::zero());
        let sc = Scenario::new(3.0, &state, &settings, povm).unwrap();
        let corr = sc.correlations();
        assert_abs_diff_eq!(corr.i3(), corr.pb[0] + corr.pb[1] - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn only_negative_marginal_survives() {
        // state |10⟩, Bob's outcome-0 projectors on |1⟩ are orthogonal to it
        let state = make_state(0.0).unwrap();
        let settings = [zero_one(), zero_one(), one_zero(), one_zero()];
        let povm = Povm3::complete(Operator2::zero(), Operator2::diag(0.0, 1.0));
        let sc = Scenario::new(4.0, &state, &settings, povm).unwrap();
        let corr = sc.correlations();
        assert_eq!(corr.pa_povm[0], 0.0);
        assert_eq!(corr.pa_povm[1], 1.0);
        assert_abs_diff_eq!(ich3_value(&sc), -I3_OUTCOME1_WEIGHT * corr.pa_povm[1], epsilon = 1e-12);
    }

    #[test]
    fn composition_identity() {
        let state = make_state(0.45).unwrap();
        let settings = [0.1, 0.9, 1.7, 2.5].map(|p| ProjectiveSetting::new(p, p * 0.7));
        let povm = projective_povm(RankClass::R10, &[ProjectiveSetting::new(0.6, 0.2)]).unwrap();
        let sc = Scenario::new(5.0, &state, &settings, povm).unwrap();
        assert_abs_diff_eq!(ich3_value(&sc), 5.0 * ich_value(&sc) + i3_value(&sc), epsilon = 1e-12);
    }

    #[test]
    fn rank_class_completions() {
        let p0 = projective_povm(RankClass::R10, &[zero_one()]).unwrap();
        assert!(p0.m0.max_abs_diff(&Operator2::diag(1.0, 0.0)) < 1e-12);
        assert!(p0.m1.max_abs_diff(&Operator2::zero()) < 1e-12);
        assert!(p0.m2.max_abs_diff(&Operator2::diag(0.0, 1.0)) < 1e-12);

        let r00 = projective_povm(RankClass::R00, &[]).unwrap();
        assert!(r00.m2.max_abs_diff(&Operator2::identity()) < 1e-12);

        // non-orthogonal pair: 𝟙 − P − Q has a negative eigenvalue
        let err = projective_povm(
            RankClass::R11,
            &[ProjectiveSetting::new(0.3, 0.0), ProjectiveSetting::new(0.5, 0.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleCompletion { .. }));

        let ok = projective_povm(RankClass::R11, &[zero_one(), one_zero()]).unwrap();
        assert!(ok.m2.max_abs_diff(&Operator2::zero()) < 1e-12);

        assert!(matches!(projective_povm(RankClass::R01, &[]), Err(Error::MissingSetting(..))));
        assert!(projective_povm(RankClass::General, &[]).is_err());
    }

    #[test]
    fn lhv_bound_is_one() {
        for c in [0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 100.0] {
            assert_eq!(lhv_max(c), 1.0, "c = {c}");
        }
    }

    #[test]
    fn bob_overlap_examples() {
        let state = make_phi_plus();
        let a = ProjectiveSetting::new(0.3, 0.4);
        let povm = Povm3::complete(Operator2::zero(), Operator2::zero());
        let same = Scenario::new(1.0, &state, &[a, a, a, a], povm).unwrap();
        assert_abs_diff_eq!(bob_overlap(&same), 1.0, epsilon = 1e-12);
        let orth = Scenario::new(1.0, &state, &[a, a, zero_one(), one_zero()], povm).unwrap();
        assert_abs_diff_eq!(bob_overlap(&orth), 0.0, epsilon = 1e-12);
        let half = Scenario::new(1.0, &state, &[a, a, zero_one(), ProjectiveSetting::new(0.0, 0.0)], povm)
            .unwrap();
        assert_abs_diff_eq!(bob_overlap(&half), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rank_profile_of_projective_measurement() {
        let povm = Povm3::complete(Operator2::diag(1.0, 0.0), Operator2::diag(0.0, 1.0));
        let rp = rank_profile(&povm, DEFAULT_RANK_TOL);
        assert_eq!(rp.numerical_ranks, [1, 1, 0]);
    }

    #[test]
    fn rank_class_parsing() {
        for class in RankClass::PROJECTIVE.iter().chain([RankClass::General].iter()) {
            assert_eq!(class.label().parse::<RankClass>().unwrap(), *class);
        }
        assert!("r12".parse::<RankClass>().is_err());
    }

    #[test]
    fn invalid_c_rejected() {
        let s = ProjectiveSetting::new(0.0, 0.0);
        let povm = Povm3::complete(Operator2::zero(), Operator2::zero());
        assert!(Scenario::new(-1.0, &make_phi_plus(), &[s; 4], povm).is_err());
        assert!(Scenario::new(0.0, &make_phi_plus(), &[s; 4], povm).is_err());
    }
}
