//! The property registry: one entry per checked identity or inequality.

use rand::Rng;

use super::trial::{Outcome, Trial};
use super::PropertyKind::{self, Identity, Inequality};
use crate::deformed_log::{legacy_ln, legacy_ln_unchecked, legacy_u, ln_kr, DeformParams};
use crate::distributions::{mix, product, Distribution, JointDistribution2, JointDistribution3};
use crate::divergence::{
    divergence, divergence_dual_form, divergence_literal, log_sum_gap, reference_divergence, ReferenceDivergence,
};
use crate::entropy::{
    conditional_entropy, conditional_entropy3, entropy, entropy_literal, joint_entropy, reference_entropy,
    Conditioning3, Direction, ReferenceEntropy,
};
use crate::error::Result;
use crate::numeric::fsum;
use crate::geometry::{
    fd_hessian, fisher_metric, hessian_potential, potential_second_derivative, taylor_ratio, Convention,
    PotentialCoefficients, DEFAULT_FD_STEP,
};

pub(crate) struct Property {
    pub name: &'static str,
    pub module: &'static str,
    pub statement: &'static str,
    pub kind: PropertyKind,
    pub check: fn(&mut Trial) -> Result<Outcome>,
}

pub(crate) fn find(name: &str) -> Option<&'static Property> {
    REGISTRY.iter().find(|p| p.name == name)
}

/// Relative slack floor for entropy and divergence values.
const VALUE_FLOOR: f64 = 1.0;
/// Values of `r` compared against the canonical (r-free) evaluators.
const R_GRID: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
/// `k = r` used for the Shannon and Kullback-Leibler limits.
const LIMIT_K: f64 = 1e-4;

macro_rules! prop {
    ($name:ident, $module:literal, $kind:expr, $statement:literal) => {
        Property { name: stringify!($name), module: $module, statement: $statement, kind: $kind, check: $name }
    };
}

pub(crate) static REGISTRY: &[Property] = &[
    prop!(product_rule_1, "deformed_log", Identity,
        "(xy)^(r+k) ln_kr(xy) = x^(r+k) ln_kr(x) + y^(r+k) ln_kr(y) + 2k x^(r+k) y^(r+k) ln_kr(x) ln_kr(y)"),
    prop!(product_rule_2, "deformed_log", Identity, "ln_kr(xy) = x^(k-r) ln_kr(y) + y^-(r+k) ln_kr(x)"),
    prop!(inversion, "deformed_log", Identity, "ln_kr(1/x) = -x^2r ln_kr(x)"),
    prop!(quotient, "deformed_log", Identity, "ln_kr(x/y) = -(y^2r / x^(r-k)) ln_kr(y) + y^(r+k) ln_kr(x)"),
    prop!(power_rule, "deformed_log", Identity, "ln_kr(x^a) = a ln_{ak,ar}(x), a != 0"),
    prop!(convexity_witnesses, "deformed_log", Inequality,
        "-x^(r+k) ln_kr(x) convex on (0,1] and x^(r-k+1) ln_kr(x) convex on (0,5] (grid second differences >= 0)"),
    prop!(legacy_monotone_convex, "deformed_log", Inequality,
        "for r < 0, 0 < k <= 1: -x^r (x^k - x^-k)/(2k) is positive, decreasing and convex on a grid of (0,1]"),
    prop!(legacy_product_rule, "deformed_log", Identity, "Ln(xy) = u(x) Ln(y) + Ln(x) u(y)"),
    prop!(log_sum_inequality, "deformed_log", Inequality,
        "Σ a_i (a_i/b_i)^(r-k) ln_kr(a_i/b_i) >= a (a/b)^(r-k) ln_kr(a/b), a = Σ a_i, b = Σ b_i"),
    prop!(chain_rule, "entropy", Identity, "S(X,Y) = S(X) + S(Y|X)"),
    prop!(chain_rule_xyz, "entropy", Identity, "S(X,Y,Z) = S(X,Y|Z) + S(Z)"),
    prop!(conditional_chain_rule, "entropy", Identity, "S(X,Y|Z) = S(X|Z) + S(Y|X,Z)"),
    prop!(chain_rule_n, "entropy", Identity,
        "S(X1,...,Xn) = S(X1) + Σ_i S(Xi | X1,...,X(i-1)) for up to five variables"),
    prop!(conditional_reduces_entropy, "entropy", Inequality, "S(Y|X) <= S(Y)"),
    prop!(joint_monotonicity, "entropy", Inequality, "S(X) <= S(X,Y)"),
    prop!(independence_rule, "entropy", Identity, "X, Y independent: S(Y|X) = S(Y) - 2k S(X) S(Y)"),
    prop!(entropy_pseudo_additivity, "entropy", Identity,
        "X, Y independent: S(X,Y) = S(X) + S(Y) - 2k S(X) S(Y)"),
    prop!(subadditivity, "entropy", Inequality, "S(X,Y) <= S(X) + S(Y)"),
    prop!(conditional_comparison, "entropy", Inequality, "S(Y|X,Z) <= S(Y|Z)"),
    prop!(strong_subadditivity, "entropy", Inequality, "S(X,Y,Z) + S(Z) <= S(X,Z) + S(Y,Z)"),
    prop!(conditional_chain_monotone, "entropy", Inequality, "S(X|Z) <= S(X,Y|Z)"),
    prop!(entropy_r_independence, "entropy", Identity,
        "-Σ p^(r+k+1) ln_kr(p) is the same for r in {0.1, 0.5, 1, 2}"),
    prop!(shannon_limit, "entropy", Inequality, "|S(k=r=1e-4) - H| <= 1e-3 (1 + H)"),
    prop!(entropy_tsallis_reduction, "entropy", Identity, "k = r = (q-1)/2: S = Tsallis S_q, q in {1.2, 1.5, 2}"),
    prop!(divergence_nonnegativity, "divergence", Inequality, "D(P||Q) >= 0"),
    prop!(identity_of_indiscernibles, "divergence", Inequality,
        "k < 1/2, full support: D(P||Q) <= 1e-12 implies max |p_i - q_i| <= 1e-4"),
    prop!(permutation_symmetry, "divergence", Identity, "D(πP||πQ) = D(P||Q)"),
    prop!(extension, "divergence", Identity, "D((P,0)||(Q,0)) = D(P||Q)"),
    prop!(divergence_pseudo_additivity, "divergence", Identity,
        "D(P1⊗P2||Q1⊗Q2) = D1 + D2 - 2k D1 D2"),
    prop!(joint_convexity, "divergence", Inequality,
        "D((1-λ)P1+λP2 || (1-λ)Q1+λQ2) <= (1-λ) D(P1||Q1) + λ D(P2||Q2), λ in {0, 0.1, ..., 1}"),
    prop!(information_monotonicity, "divergence", Inequality,
        "D(WP||WQ) <= D(P||Q) for random stochastic and partition channels W"),
    prop!(divergence_r_independence, "divergence", Identity,
        "Σ p (p/q)^(r-k) ln_kr(p/q) is the same for r in {0.1, 0.5, 1, 2}"),
    prop!(definitional_equivalence, "divergence", Identity,
        "Σ p (p/q)^(r-k) ln_kr(p/q) = -Σ p (q/p)^(r+k) ln_kr(q/p)"),
    prop!(kl_limit, "divergence", Inequality, "|D(k=r=1e-4) - KL| <= 1e-3 (1 + KL)"),
    prop!(divergence_tsallis_reduction, "divergence", Identity,
        "k = r = (1-q)/2: D = Tsallis D_q, q in {0.5, 0.8}"),
    prop!(hessian_separability, "geometry", Inequality,
        "finite-difference Hessian of D(.||P) at P: off-diagonal entries <= 1e-8"),
    prop!(hessian_oracle_agreement, "geometry", Inequality,
        "finite-difference Hessian diagonal within 1e-5 relative of (1-2k)/p_i at step 1e-4"),
    prop!(hessian_structure, "geometry", Inequality,
        "g_ii = Ψ''(p_i) = A/p_i for both metric conventions, finite-difference Ψ'' within 1e-6 relative"),
    prop!(metric_positive_definite, "geometry", Inequality, "k < 1/2, full support: (1-2k)/p_i > 0"),
    prop!(taylor_quadratic, "geometry", Inequality,
        "|2 D(P+dP||P) / Σ g_ii dp_i^2 - 1| decreases over |dP| in {1e-2, 1e-3, 1e-4}"),
];

// ---------------------------------------------------------------- deformed log

fn product_rule_1(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let s = p.r() + p.k();
    let (x, y) = (t.scalar("x"), t.scalar("y"));
    let a = x.powf(s) * ln_kr(x, &p)?;
    let b = y.powf(s) * ln_kr(y, &p)?;
    let lhs = (x * y).powf(s) * ln_kr(x * y, &p)?;
    Ok(Outcome::identity(lhs, &[a, b, 2.0 * p.k() * a * b], 0.0))
}

fn product_rule_2(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let (k, r) = (p.k(), p.r());
    let (x, y) = (t.scalar("x"), t.scalar("y"));
    let lhs = ln_kr(x * y, &p)?;
    Ok(Outcome::identity(lhs, &[x.powf(k - r) * ln_kr(y, &p)?, y.powf(-(r + k)) * ln_kr(x, &p)?], 0.0))
}

fn inversion(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let x = t.scalar("x");
    Ok(Outcome::identity(ln_kr(1.0 / x, &p)?, &[-x.powf(2.0 * p.r()) * ln_kr(x, &p)?], 0.0))
}

fn quotient(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let (k, r) = (p.k(), p.r());
    let (x, y) = (t.scalar("x"), t.scalar("y"));
    let lhs = ln_kr(x / y, &p)?;
    let terms = [-(y.powf(2.0 * r) / x.powf(r - k)) * ln_kr(y, &p)?, y.powf(r + k) * ln_kr(x, &p)?];
    Ok(Outcome::identity(lhs, &terms, 0.0))
}

fn power_rule(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let x = t.scalar("x");
    let mag = t.uniform(0.25, 3.0);
    let a = if t.rng().random_bool(0.5) { mag } else { -mag };
    t.note("a", a);
    let scaled = DeformParams::relaxed(p.k(), p.r())?.scaled(a)?;
    Ok(Outcome::identity(ln_kr(x.powf(a), &p)?, &[a * ln_kr(x, &scaled)?], 0.0))
}

/// Smallest second difference of `f` on `x_i = i h`, `i = 1..=n`.
fn min_second_difference(f: impl Fn(f64) -> f64, h: f64, n: usize) -> f64 {
    let v: Vec<f64> = (1..=n).map(|i| f(i as f64 * h)).collect();
    v.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min)
}

fn convexity_witnesses(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let (k, r) = (p.k(), p.r());
    let mut worst = f64::INFINITY;
    for (hi, f) in [
        (1.0, Box::new(|x: f64| -x.powf(r + k) * ln_kr(x, &p).unwrap_or(f64::NAN)) as Box<dyn Fn(f64) -> f64>),
        (5.0, Box::new(|x: f64| x.powf(r - k + 1.0) * ln_kr(x, &p).unwrap_or(f64::NAN))),
    ] {
        worst = worst.min(min_second_difference(f, hi / 1000.0, 1000));
    }
    Ok(Outcome::ge(worst, 0.0))
}

fn legacy_monotone_convex(t: &mut Trial) -> Result<Outcome> {
    let k = t.real("k", 0.05, 1.0);
    let r = t.real("r", -1.0, -0.01);
    let g: Vec<f64> = (1..=1000).map(|i| -legacy_ln_unchecked(i as f64 / 1000.0, k, r)).collect();
    let positive = g.iter().copied().fold(f64::INFINITY, f64::min);
    let decreasing = g.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    let convex = g.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).fold(f64::INFINITY, f64::min);
    Ok(Outcome::ge(positive.min(decreasing).min(convex), 0.0))
}

fn legacy_product_rule(t: &mut Trial) -> Result<Outcome> {
    let k = t.real("k", 0.05, 0.95);
    let bound = if k < 0.5 { k } else { 1.0 - k };
    let r = t.real("r", -bound, bound);
    let p = DeformParams::relaxed(k, r)?;
    let (x, y) = (t.scalar("x"), t.scalar("y"));
    let lhs = legacy_ln(x * y, &p)?;
    Ok(Outcome::identity(lhs, &[legacy_u(x, &p)? * legacy_ln(y, &p)?, legacy_ln(x, &p)? * legacy_u(y, &p)?], 0.0))
}

fn log_sum_inequality(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let n = t.size("n");
    let sa = t.real("scale_a", 0.1, 10.0);
    let sb = t.real("scale_b", 0.1, 10.0);
    let (a, b) = if t.is_first() {
        let a: Vec<f64> = t.dist(n)?.probs().iter().map(|v| v * sa).collect();
        (a.clone(), a)
    } else {
        let a = t.dist(n)?.probs().iter().map(|v| v * sa).collect();
        let b = t.dist(n)?.probs().iter().map(|v| v * sb).collect();
        (a, b)
    };
    let (lhs, rhs) = log_sum_gap(&a, &b, &p)?;
    Ok(Outcome::ge(lhs, rhs))
}

// ---------------------------------------------------------------- entropy

fn chain_rule(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let (nx, ny) = (t.size("nx"), t.size("ny"));
    let j = t.joint2(nx, ny)?;
    let lhs = joint_entropy(&j, &p).value;
    let terms = [entropy(&j.marginal_x(), &p).value, conditional_entropy(&j, &p, Direction::YGivenX).value];
    Ok(Outcome::identity(lhs, &terms, VALUE_FLOOR))
}

fn joint3(t: &mut Trial) -> Result<(DeformParams, JointDistribution3)> {
    let p = t.params()?;
    let (nx, ny, nz) = (t.size("nx"), t.size("ny"), t.size("nz"));
    Ok((p, t.joint3(nx, ny, nz)?))
}

fn chain_rule_xyz(t: &mut Trial) -> Result<Outcome> {
    let (p, j) = joint3(t)?;
    let terms = [conditional_entropy3(&j, &p, Conditioning3::XYGivenZ).value, entropy(&j.marginal_z(), &p).value];
    Ok(Outcome::identity(joint_entropy(&j, &p).value, &terms, VALUE_FLOOR))
}

fn conditional_chain_rule(t: &mut Trial) -> Result<Outcome> {
    let (p, j) = joint3(t)?;
    let lhs = conditional_entropy3(&j, &p, Conditioning3::XYGivenZ).value;
    let terms = [
        conditional_entropy3(&j, &p, Conditioning3::XGivenZ).value,
        conditional_entropy3(&j, &p, Conditioning3::YGivenXZ).value,
    ];
    Ok(Outcome::identity(lhs, &terms, VALUE_FLOOR))
}

fn chain_rule_n(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let vars = t.size_between("vars", 2, 5);
    let (lo, hi) = t.size_bounds();
    let dims: Vec<usize> = (0..vars).map(|i| t.size_between(&format!("d{i}"), lo, hi.min(4).max(lo))).collect();
    let total: usize = dims.iter().product();
    let full = t.dist(total)?;
    let cells = full.probs();
    let mut terms = Vec::with_capacity(vars);
    for i in 0..vars {
        let prefix: usize = dims[..i].iter().product();
        let suffix: usize = dims[i + 1..].iter().product();
        // marginal over (X1..Xi), grouped as (X1..X(i-1)) x Xi
        let marg: Vec<f64> = cells.chunks(suffix).map(|c| c.iter().sum()).collect();
        let j = JointDistribution2::from_flat(prefix, dims[i], marg)?;
        terms.push(if i == 0 {
            entropy(&j.marginal_y(), &p).value
        } else {
            conditional_entropy(&j, &p, Direction::YGivenX).value
        });
    }
    Ok(Outcome::identity(entropy(&full, &p).value, &terms, VALUE_FLOOR))
}

fn conditional_reduces_entropy(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let nx = if t.is_first() { t.size_between("nx", 1, 1) } else { t.size("nx") };
    let ny = t.size("ny");
    let j = t.joint2(nx, ny)?;
    Ok(Outcome::le(conditional_entropy(&j, &p, Direction::YGivenX).value, entropy(&j.marginal_y(), &p).value))
}

fn joint_monotonicity(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let nx = t.size("nx");
    let ny = if t.is_first() { t.size_between("ny", 1, 1) } else { t.size("ny") };
    let j = t.joint2(nx, ny)?;
    Ok(Outcome::le(entropy(&j.marginal_x(), &p).value, joint_entropy(&j, &p).value))
}

fn independent_pair(t: &mut Trial) -> Result<(DeformParams, Distribution, Distribution)> {
    let p = t.params()?;
    let (nx, ny) = (t.size("nx"), t.size("ny"));
    Ok((p, t.sparse_dist(nx)?, t.sparse_dist(ny)?))
}

fn independence_rule(t: &mut Trial) -> Result<Outcome> {
    let (p, px, py) = independent_pair(t)?;
    let (sx, sy) = (entropy(&px, &p).value, entropy(&py, &p).value);
    let lhs = conditional_entropy(&product(&px, &py), &p, Direction::YGivenX).value;
    Ok(Outcome::identity(lhs, &[sy, -2.0 * p.k() * sx * sy], VALUE_FLOOR))
}

fn entropy_pseudo_additivity(t: &mut Trial) -> Result<Outcome> {
    let (p, px, py) = independent_pair(t)?;
    let (sx, sy) = (entropy(&px, &p).value, entropy(&py, &p).value);
    let lhs = joint_entropy(&product(&px, &py), &p).value;
    Ok(Outcome::identity(lhs, &[sx, sy, -2.0 * p.k() * sx * sy], VALUE_FLOOR))
}

fn subadditivity(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let nx = if t.is_first() { t.size_between("nx", 1, 1) } else { t.size("nx") };
    let ny = t.size("ny");
    let j = t.joint2(nx, ny)?;
    let rhs = entropy(&j.marginal_x(), &p).value + entropy(&j.marginal_y(), &p).value;
    Ok(Outcome::le(joint_entropy(&j, &p).value, rhs))
}

fn triple_with_degenerate_x(t: &mut Trial) -> Result<(DeformParams, JointDistribution3)> {
    let p = t.params()?;
    let nx = if t.is_first() { t.size_between("nx", 1, 1) } else { t.size("nx") };
    let (ny, nz) = (t.size("ny"), t.size("nz"));
    Ok((p, t.joint3(nx, ny, nz)?))
}

fn conditional_comparison(t: &mut Trial) -> Result<Outcome> {
    let (p, j) = triple_with_degenerate_x(t)?;
    Ok(Outcome::le(
        conditional_entropy3(&j, &p, Conditioning3::YGivenXZ).value,
        conditional_entropy3(&j, &p, Conditioning3::YGivenZ).value,
    ))
}

fn strong_subadditivity(t: &mut Trial) -> Result<Outcome> {
    let (p, j) = triple_with_degenerate_x(t)?;
    let lhs = joint_entropy(&j, &p).value + entropy(&j.marginal_z(), &p).value;
    let rhs = joint_entropy(&j.marginal_xz(), &p).value + joint_entropy(&j.marginal_yz(), &p).value;
    Ok(Outcome::le(lhs, rhs))
}

fn conditional_chain_monotone(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let nx = t.size("nx");
    let ny = if t.is_first() { t.size_between("ny", 1, 1) } else { t.size("ny") };
    let nz = t.size("nz");
    let j = t.joint3(nx, ny, nz)?;
    Ok(Outcome::le(
        conditional_entropy3(&j, &p, Conditioning3::XGivenZ).value,
        conditional_entropy3(&j, &p, Conditioning3::XYGivenZ).value,
    ))
}

fn entropy_r_independence(t: &mut Trial) -> Result<Outcome> {
    let k = t.k();
    let n = t.size("n");
    let d = t.sparse_dist(n)?;
    let canonical = entropy(&d, &DeformParams::new(k, 1.0)?).value;
    let outcomes = R_GRID
        .iter()
        .map(|&r| Ok(Outcome::identity(entropy_literal(&d, &DeformParams::new(k, r)?), &[canonical], VALUE_FLOOR)))
        .collect::<Result<Vec<_>>>()?;
    Outcome::worst_identity(outcomes)
}

fn shannon_limit(t: &mut Trial) -> Result<Outcome> {
    let n = t.size("n");
    let d = t.sparse_dist(n)?;
    let h = reference_entropy(&d, ReferenceEntropy::Shannon)?;
    let s = entropy(&d, &DeformParams::new(LIMIT_K, LIMIT_K)?).value;
    Ok(Outcome::le((s - h).abs(), 1e-3 * (1.0 + h)))
}

fn entropy_tsallis_reduction(t: &mut Trial) -> Result<Outcome> {
    let n = t.size("n");
    let d = t.sparse_dist(n)?;
    let outcomes = [1.2, 1.5, 2.0]
        .iter()
        .map(|&q| {
            let k = (q - 1.0) / 2.0;
            let generalized = entropy(&d, &DeformParams::new(k, k)?).value;
            Ok(Outcome::identity(generalized, &[reference_entropy(&d, ReferenceEntropy::Tsallis(q))?], VALUE_FLOOR))
        })
        .collect::<Result<Vec<_>>>()?;
    Outcome::worst_identity(outcomes)
}

// ---------------------------------------------------------------- divergence

fn d(p: &Distribution, q: &Distribution, params: &DeformParams) -> Result<f64> {
    Ok(divergence(p, q, params)?.value)
}

fn divergence_nonnegativity(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let n = t.size("n");
    let a = t.sparse_dist(n)?;
    let b = if t.is_first() { a.clone() } else { t.dist(n)? };
    Ok(Outcome::ge(d(&a, &b, &p)?, 0.0))
}

fn identity_of_indiscernibles(t: &mut Trial) -> Result<Outcome> {
    let p = t.separating_params()?;
    let n = t.size("n");
    let a = t.dist(n)?;
    let far = t.dist(n)?;
    let eps = t.real("log10_eps", -9.0, -2.0);
    let b = mix(&a, &far, 10f64.powf(eps))?;
    let gap = a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let bound = if d(&a, &b, &p)? <= 1e-12 { 1e-4 } else { 1.0 };
    Ok(Outcome::le(gap, bound))
}

fn permutation_symmetry(t: &mut Trial) -> Result<Outcome> {
    use rand::seq::SliceRandom;
    let p = t.params()?;
    let n = t.size("n");
    let (a, b) = (t.sparse_dist(n)?, t.dist(n)?);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(t.rng());
    let lhs = d(&a.permuted(&perm)?, &b.permuted(&perm)?, &p)?;
    Ok(Outcome::identity(lhs, &[d(&a, &b, &p)?], VALUE_FLOOR))
}

fn extension(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let n = t.size("n");
    let zeros = t.size_between("appended", 1, 4);
    let (a, b) = (t.sparse_dist(n)?, t.dist(n)?);
    let lhs = d(&a.extended(zeros), &b.extended(zeros), &p)?;
    Ok(Outcome::identity(lhs, &[d(&a, &b, &p)?], VALUE_FLOOR))
}

fn divergence_pseudo_additivity(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let (n1, n2) = (t.size("n1"), t.size("n2"));
    let (p1, q1) = (t.sparse_dist(n1)?, t.dist(n1)?);
    let (p2, q2) = (t.sparse_dist(n2)?, t.dist(n2)?);
    let (d1, d2) = (d(&p1, &q1, &p)?, d(&p2, &q2, &p)?);
    let lhs = d(&product(&p1, &p2).to_distribution(), &product(&q1, &q2).to_distribution(), &p)?;
    Ok(Outcome::identity(lhs, &[d1, d2, -2.0 * p.k() * d1 * d2], VALUE_FLOOR))
}

fn joint_convexity(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let n = t.size("n");
    let (p1, p2) = (t.sparse_dist(n)?, t.sparse_dist(n)?);
    let (q1, q2) = if t.is_first() { (p1.clone(), p2.clone()) } else { (t.dist(n)?, t.dist(n)?) };
    let (d1, d2) = (d(&p1, &q1, &p)?, d(&p2, &q2, &p)?);
    let outcomes = (0..=10)
        .map(|i| {
            let lambda = i as f64 / 10.0;
            let lhs = d(&mix(&p1, &p2, lambda)?, &mix(&q1, &q2, lambda)?, &p)?;
            Ok(Outcome::le(lhs, (1.0 - lambda) * d1 + lambda * d2))
        })
        .collect::<Result<Vec<_>>>()?;
    Outcome::worst_inequality(outcomes)
}

fn information_monotonicity(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let n = t.size("n");
    let a = t.sparse_dist(n)?;
    let b = if t.is_first() { a.clone() } else { t.dist(n)? };
    let before = d(&a, &b, &p)?;
    let m = t.size("outputs");
    let groups = t.size_between("groups", 1, n);
    let channels = [t.channel(m, n)?, t.partition_channel(groups, n)?];
    let outcomes = channels
        .iter()
        .map(|w| Ok(Outcome::le(d(&w.apply(&a)?, &w.apply(&b)?, &p)?, before)))
        .collect::<Result<Vec<_>>>()?;
    Outcome::worst_inequality(outcomes)
}

fn full_support_pair(t: &mut Trial) -> Result<(Distribution, Distribution)> {
    let n = t.size("n");
    Ok((t.dist(n)?, t.dist(n)?))
}

fn divergence_r_independence(t: &mut Trial) -> Result<Outcome> {
    let k = t.k();
    let (a, b) = full_support_pair(t)?;
    let canonical = d(&a, &b, &DeformParams::new(k, 1.0)?)?;
    let outcomes = R_GRID
        .iter()
        .map(|&r| {
            let literal = divergence_literal(&a, &b, &DeformParams::new(k, r)?)?;
            Ok(Outcome::identity(literal, &[canonical], VALUE_FLOOR))
        })
        .collect::<Result<Vec<_>>>()?;
    Outcome::worst_identity(outcomes)
}

fn definitional_equivalence(t: &mut Trial) -> Result<Outcome> {
    let p = t.params()?;
    let (a, b) = full_support_pair(t)?;
    let literal = divergence_literal(&a, &b, &p)?;
    let dual = divergence_dual_form(&a, &b, &p)?;
    let canonical = d(&a, &b, &p)?;
    Outcome::worst_identity([
        Outcome::identity(literal, &[dual], VALUE_FLOOR),
        Outcome::identity(literal, &[canonical], VALUE_FLOOR),
    ])
}

fn kl_limit(t: &mut Trial) -> Result<Outcome> {
    let n = t.size("n");
    let (a, b) = (t.sparse_dist(n)?, t.dist(n)?);
    let kl = reference_divergence(&a, &b, ReferenceDivergence::Kl)?;
    let value = d(&a, &b, &DeformParams::new(LIMIT_K, LIMIT_K)?)?;
    Ok(Outcome::le((value - kl).abs(), 1e-3 * (1.0 + kl)))
}

fn divergence_tsallis_reduction(t: &mut Trial) -> Result<Outcome> {
    let n = t.size("n");
    let (a, b) = (t.sparse_dist(n)?, t.dist(n)?);
    let outcomes = [0.5, 0.8]
        .iter()
        .map(|&q| {
            let k = (1.0 - q) / 2.0;
            let generalized = d(&a, &b, &DeformParams::new(k, k)?)?;
            let reference = reference_divergence(&a, &b, ReferenceDivergence::Tsallis(q))?;
            Ok(Outcome::identity(generalized, &[reference], VALUE_FLOOR))
        })
        .collect::<Result<Vec<_>>>()?;
    Outcome::worst_identity(outcomes)
}

// ---------------------------------------------------------------- geometry

/// Largest alphabet of the interior points used by the finite-difference and Taylor checks.
const GEOMETRY_MAX_SIZE: usize = 20;

fn interior_point(t: &mut Trial) -> Result<(DeformParams, Distribution)> {
    let p = t.separating_params()?;
    let n = t.size_clamped("n", 2, GEOMETRY_MAX_SIZE);
    Ok((p, t.interior_dist(n)?))
}

fn hessian_separability(t: &mut Trial) -> Result<Outcome> {
    let (p, x) = interior_point(t)?;
    let h = fd_hessian(&x, &p, DEFAULT_FD_STEP)?;
    let off = (0..x.len())
        .flat_map(|i| (0..x.len()).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| h[i][j].abs())
        .fold(0.0, f64::max);
    Ok(Outcome::le(off, 1e-8))
}

fn hessian_oracle_agreement(t: &mut Trial) -> Result<Outcome> {
    let (p, x) = interior_point(t)?;
    let h = fd_hessian(&x, &p, DEFAULT_FD_STEP)?;
    let g = fisher_metric(&x, &p, Convention::Derived)?.g;
    let worst = g.iter().enumerate().map(|(i, &gi)| ((h[i][i] - gi) / gi).abs()).fold(0.0, f64::max);
    Ok(Outcome::le(worst, 1e-5))
}

fn hessian_structure(t: &mut Trial) -> Result<Outcome> {
    let (p, x) = interior_point(t)?;
    let c1 = t.real("c1", -1.0, 1.0);
    let c2 = t.real("c2", -1.0, 1.0);
    let extra = t.real("u", 0.05, 1.0);
    let mut worst: f64 = 0.0;
    for conv in [Convention::Derived, Convention::Shifted] {
        let a = conv.coefficient(&p);
        let coeffs = PotentialCoefficients::new(a, c1, c2)?;
        let g = fisher_metric(&x, &p, conv)?.g;
        for (&u, &gi) in x.probs().iter().zip(&g) {
            let exact = potential_second_derivative(u, &coeffs)?;
            worst = worst.max(((gi - exact) / exact).abs());
        }
        for &u in x.probs().iter().chain([extra].iter()) {
            let h = 1e-3 * u;
            let fd = (hessian_potential(u + h, &coeffs)? - 2.0 * hessian_potential(u, &coeffs)?
                + hessian_potential(u - h, &coeffs)?)
                / (h * h);
            let exact = a / u;
            worst = worst.max(((fd - exact) / exact).abs());
        }
    }
    Ok(Outcome::le(worst, 1e-6))
}

fn metric_positive_definite(t: &mut Trial) -> Result<Outcome> {
    let p = t.separating_params()?;
    let n = t.size("n");
    let x = t.dist(n)?;
    let g = fisher_metric(&x, &p, Convention::Derived)?.g;
    Ok(Outcome::ge(g.iter().copied().fold(f64::INFINITY, f64::min), 0.0))
}

fn taylor_quadratic(t: &mut Trial) -> Result<Outcome> {
    let (p, x) = interior_point(t)?;
    let n = x.len();
    let raw: Vec<f64> = (0..n).map(|_| t.uniform(-1.0, 1.0)).collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    let mut centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
    // orient the direction so that Σ v^3 / p^2 <= 0
    let cubic = fsum(centered.iter().zip(x.probs()).map(|(v, p)| v * v * v / (p * p)));
    if cubic > 0.0 {
        centered.iter_mut().for_each(|v| *v = -*v);
    }
    let norm = centered.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let errors = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&s| {
            let dp: Vec<f64> = centered.iter().map(|v| v / norm * s).collect();
            Ok((taylor_ratio(&x, &dp, &p)? - 1.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    t.note("errors", format!("{:e}/{:e}/{:e}", errors[0], errors[1], errors[2]));
    let shrink = (errors[0] - errors[1]).min(errors[1] - errors[2]);
    Ok(Outcome { lhs: errors[2], rhs: errors[0], slack: shrink })
}
