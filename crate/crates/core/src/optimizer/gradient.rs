//! Central-difference gradients for costs built from functionals that are
//! linear in every measurement operator.
//!
//! A functional `Σ W[a][b] ⟨O_a ⊗ O_b⟩` is affine in each single operator,
//! so perturbing the angles of one measurement only changes its own terms.
//! Each probe then costs a 2×2 rebuild and a few traces instead of a whole
//! scenario.

use crate::inequality::RankClass;
use crate::quantum::{projector_pair, trace_product_re, Operator2, Povm3, ProjectiveSetting};

use super::params::{alice2_from, SETTINGS_DIM};
use super::povm_violation;
use crate::inequality::Scenario;

/// Coefficients `W[a][b]` over Alice operators `(A₀, A₁, M₀, M₁, I)` and Bob
/// operators `(B₀, B₁, I)`, where `A_x`, `B_y` are outcome-0 projectors.
pub(crate) type Table = [[f64; 3]; 5];

/// Evaluates every table on `s`.
pub(crate) fn evaluate<const N: usize>(tables: &[Table; N], s: &Scenario) -> [f64; N] {
    let id = Operator2::identity();
    let xb = [&s.bob0.e0, &s.bob1.e0, &id].map(|b| s.state.alice_conditional(b));
    let ops = alice_ops(s);
    tables.map(|w| {
        let mut v = 0.0;
        for (a, op) in ops.iter().enumerate() {
            for (b, x) in xb.iter().enumerate() {
                if w[a][b] != 0.0 {
                    v += w[a][b] * trace_product_re(op, x);
                }
            }
        }
        v
    })
}

fn alice_ops(s: &Scenario) -> [Operator2; 5] {
    [s.alice0.e0, s.alice1.e0, s.alice2.m0, s.alice2.m1, Operator2::identity()]
}

/// Fills `g` with the central difference at step `h` of
/// `combine(values) + w·violation` (the violation term only for the general
/// class), where `values` are the tables evaluated at the scenario of `x`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gradient<const N: usize, C>(
    tables: &[Table; N],
    combine: C,
    class: RankClass,
    s: &Scenario,
    x: &[f64],
    w: f64,
    h: f64,
    g: &mut [f64],
) where
    C: Fn(&[f64; N]) -> f64,
{
    let id = Operator2::identity();
    let xb = [&s.bob0.e0, &s.bob1.e0, &id].map(|b| s.state.alice_conditional(b));
    let ops = alice_ops(s);
    let base = evaluate(tables, s);
    let two_h = 2.0 * h;

    // weight operators for Alice operator `a` in each table
    let alice_weight = |a: usize| -> [Operator2; N] {
        tables.map(|t| (0..3).fold(Operator2::zero(), |acc, b| acc + xb[b].scale(t[a][b])))
    };
    let bob_weight = |b: usize| -> [Operator2; N] {
        tables.map(|t| {
            let k = (0..5).fold(Operator2::zero(), |acc, a| acc + ops[a].scale(t[a][b]));
            s.state.bob_conditional(&k)
        })
    };

    let mut vals = [0.0; N];
    let mut setting_block = |slot: usize, current: &Operator2, weights: &[Operator2; N], g: &mut [f64]| {
        let own = weights.map(|wt| trace_product_re(current, &wt));
        for j in 0..2 {
            let mut p = [x[2 * slot], x[2 * slot + 1]];
            let mut probe = |p: [f64; 2]| {
                let (proj, _) = projector_pair(&ProjectiveSetting { phi: p[0], nu: p[1] });
                for t in 0..N {
                    vals[t] = base[t] - own[t] + trace_product_re(&proj, &weights[t]);
                }
                combine(&vals)
            };
            p[j] += h;
            let up = probe(p);
            p[j] -= two_h;
            let down = probe(p);
            g[2 * slot + j] = (up - down) / two_h;
        }
    };
    setting_block(0, &ops[0], &alice_weight(0), g);
    setting_block(1, &ops[1], &alice_weight(1), g);
    setting_block(2, &s.bob0.e0, &bob_weight(0), g);
    setting_block(3, &s.bob1.e0, &bob_weight(1), g);

    let (g0, g1) = (alice_weight(2), alice_weight(3));
    let own: [f64; N] =
        std::array::from_fn(|t| trace_product_re(&ops[2], &g0[t]) + trace_product_re(&ops[3], &g1[t]));
    let penalized = class == RankClass::General;
    let mut povm_cost = |povm: &Povm3| {
        for t in 0..N {
            vals[t] = base[t] - own[t] + trace_product_re(&povm.m0, &g0[t]) + trace_product_re(&povm.m1, &g1[t]);
        }
        let c = combine(&vals);
        if penalized {
            c + w * povm_violation(povm)
        } else {
            c
        }
    };
    let mut probe = [0.0; super::FULL_DIM];
    let probe = &mut probe[..x.len()];
    probe.copy_from_slice(x);
    for i in SETTINGS_DIM..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let up = povm_cost(&alice2_from(class, probe));
        probe[i] = xi - h;
        let down = povm_cost(&alice2_from(class, probe));
        probe[i] = xi;
        g[i] = (up - down) / two_h;
    }
}
