//! Generalized Tsallis entropy of single, joint and conditional variables.
//!
//! | Quantity | Definition |
//! |----------|------------|
//! | `S(X)` | `-Σ p^(r+k+1) ln_kr(p)` |
//! | `S(X,Y)` | same sum over the joint cells |
//! | `S(Y|X)` | `-Σ_x p(x)^(2k+1) Σ_y p(y|x)^(r+k+1) ln_kr(p(y|x))` |
//! | `S(X,Y|Z)`, `S(Y|X,Z)`, ... | conditioning cell weighted by its mass to the power `2k+1` |
//!
//! Each summand `p^(r+k+1) ln_kr(p)` equals `p (p^2k - 1) / (2k)` exactly, so the
//! entropy does not depend on `r` and coincides with the Tsallis entropy of index
//! `q = 1 + 2k`. The canonical evaluator uses this per-term form (through
//! `expm1`); [`entropy_literal`] keeps the defining expression for cross-checks.
//! Zero-probability terms contribute 0.

use serde::Serialize;

use crate::deformed_log::{deformed_increment, ln_kr_unchecked, ln_q, DeformParams};
use crate::distributions::{Distribution, JointDistribution2, JointDistribution3};
use crate::error::{Error, Result};
use crate::numeric::fsum;

/// An entropy value together with the parameters that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub value: f64,
    pub params: DeformParams,
}

/// `-p^(r+k+1) ln_kr(p) = p (1 - p^2k) / (2k)`, and 0 at `p = 0`.
#[inline]
pub(crate) fn entropy_term(p: f64, k: f64) -> f64 {
    if p > 0.0 {
        -p * deformed_increment(p.ln(), k)
    } else {
        0.0
    }
}

pub(crate) fn entropy_of(cells: &[f64], k: f64) -> f64 {
    fsum(cells.iter().map(|&p| entropy_term(p, k)))
}

/// `mass^(2k+1) * S(slice / mass)`, zero for an empty conditioning cell.
fn conditioned_block(mass: f64, cells: impl Iterator<Item = f64>, k: f64) -> f64 {
    if mass <= 0.0 {
        return 0.0;
    }
    let weight = mass * (2.0 * k * mass.ln()).exp();
    weight * fsum(cells.map(|c| entropy_term(c / mass, k)))
}

/// Generalized Tsallis entropy of a distribution.
pub fn entropy(p: &Distribution, params: &DeformParams) -> EntropyValue {
    EntropyValue { value: entropy_of(p.probs(), params.k()), params: *params }
}

/// Evaluates `-Σ p^(r+k+1) ln_kr(p)` term by term exactly as written.
pub fn entropy_literal(p: &Distribution, params: &DeformParams) -> f64 {
    let (k, r) = (params.k(), params.r());
    -fsum(
        p.probs()
            .iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x.powf(r + k + 1.0) * ln_kr_unchecked(x, k, r)),
    )
}

/// Anything whose cells form a joint probability table.
pub trait JointCells {
    fn cells(&self) -> &[f64];
}

impl JointCells for JointDistribution2 {
    fn cells(&self) -> &[f64] {
        self.flat()
    }
}

impl JointCells for JointDistribution3 {
    fn cells(&self) -> &[f64] {
        self.flat()
    }
}

impl JointCells for Distribution {
    fn cells(&self) -> &[f64] {
        self.probs()
    }
}

/// Entropy of the flattened joint.
pub fn joint_entropy<J: JointCells + ?Sized>(j: &J, params: &DeformParams) -> EntropyValue {
    EntropyValue { value: entropy_of(j.cells(), params.k()), params: *params }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    YGivenX,
    XGivenY,
}

/// `S(Y|X)` or `S(X|Y)` of a two-variable joint.
pub fn conditional_entropy(j: &JointDistribution2, params: &DeformParams, direction: Direction) -> EntropyValue {
    let k = params.k();
    let value = match direction {
        Direction::YGivenX => y_given_x(j, k),
        Direction::XGivenY => y_given_x(&j.transpose(), k),
    };
    EntropyValue { value, params: *params }
}

fn y_given_x(j: &JointDistribution2, k: f64) -> f64 {
    let (nx, _) = j.shape();
    fsum((0..nx).map(|x| {
        let row = j.row(x);
        conditioned_block(row.iter().sum(), row.iter().copied(), k)
    }))
}

/// Conditional entropies over three variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning3 {
    /// `S(X,Y|Z)`
    XYGivenZ,
    /// `S(Y|X,Z)`
    YGivenXZ,
    /// `S(X|Z)`
    XGivenZ,
    /// `S(Y|Z)`
    YGivenZ,
}

pub fn conditional_entropy3(j: &JointDistribution3, params: &DeformParams, mode: Conditioning3) -> EntropyValue {
    let k = params.k();
    let (nx, ny, nz) = j.shape();
    let value = match mode {
        Conditioning3::XYGivenZ => {
            let pz = j.marginal_z();
            fsum((0..nz).map(|z| {
                let cells = (0..nx).flat_map(move |x| (0..ny).map(move |y| j.get(x, y, z)));
                conditioned_block(pz.probs()[z], cells, k)
            }))
        }
        Conditioning3::YGivenXZ => {
            let pxz = j.marginal_xz();
            fsum((0..nx).flat_map(|x| {
                let pxz = &pxz;
                (0..nz).map(move |z| conditioned_block(pxz.get(x, z), (0..ny).map(|y| j.get(x, y, z)), k))
            }))
        }
        // (x, z) joint conditioned on its column variable z
        Conditioning3::XGivenZ => y_given_x(&j.marginal_xz().transpose(), k),
        Conditioning3::YGivenZ => y_given_x(&j.marginal_yz().transpose(), k),
    };
    EntropyValue { value, params: *params }
}

/// `S(X) + S(Y) - S(X,Y)`.
pub fn mutual_entropy(j: &JointDistribution2, params: &DeformParams) -> f64 {
    let k = params.k();
    entropy_of(&j.marginal_x_raw(), k) + entropy_of(&j.marginal_y_raw(), k) - entropy_of(j.flat(), k)
}

/// Reference families used to check reductions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceEntropy {
    /// `-Σ p^q ln_q(p)`
    Tsallis(f64),
    /// `-Σ p ln p`
    Shannon,
}

pub fn reference_entropy(p: &Distribution, family: ReferenceEntropy) -> Result<f64> {
    let support = p.probs().iter().copied().filter(|&x| x > 0.0);
    match family {
        ReferenceEntropy::Shannon => Ok(-support.map(|x| x * x.ln()).sum::<f64>()),
        ReferenceEntropy::Tsallis(q) => {
            if q == 1.0 || !q.is_finite() {
                return Err(Error::Param(format!("Tsallis index q={q} must be finite and different from 1")));
            }
            let mut s = 0.0;
            for x in support {
                s -= x.powf(q) * ln_q(x, q)?;
            }
            Ok(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{product, RngSeed};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(k: f64, r: f64) -> DeformParams {
        DeformParams::new(k, r).unwrap()
    }

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    fn j2(rows: &[&[f64]]) -> JointDistribution2 {
        JointDistribution2::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Brute-force oracle: the defining sum, written independently of the crate kernels.
    fn oracle(p: &[f64], k: f64, r: f64) -> f64 {
        p.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| -x.powf(r + k + 1.0) * (x.powf(k) - x.powf(-k)) / (2.0 * k * x.powf(r)))
            .sum()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&d(&[1.0, 0.0, 0.0]), &params(0.3, 0.2)).value, 0.0);
        let u4 = Distribution::uniform(4).unwrap();
        assert_relative_eq!(entropy(&u4, &params(0.25, 1.0)).value, 1.0, epsilon = 1e-15);
        assert_relative_eq!(oracle(u4.probs(), 0.25, 1.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(entropy(&d(&[0.5, 0.5]), &params(0.5, 1.0)).value, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn uniform_closed_form() {
        for n in 1..20 {
            for k in [0.05, 0.2, 0.5] {
                let u = Distribution::uniform(n).unwrap();
                let closed = (1.0 - (n as f64).powf(-2.0 * k)) / (2.0 * k);
                assert_relative_eq!(entropy(&u, &params(k, 0.7)).value, closed, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn joint_entropy_examples() {
        let p = params(0.4, 0.3);
        let e = d(&[1.0, 0.0]);
        assert_eq!(joint_entropy(&product(&e, &e), &p).value, 0.0);
        let u = j2(&[&[0.25, 0.25], &[0.25, 0.25]]);
        assert_relative_eq!(joint_entropy(&u, &params(0.5, 1.0)).value, 0.75, epsilon = 1e-15);
    }

    #[test]
    fn conditional_entropy_examples() {
        let p = params(0.5, 1.0);
        let degenerate = product(&d(&[1.0, 0.0]), &d(&[1.0]));
        assert_eq!(conditional_entropy(&degenerate, &p, Direction::YGivenX).value, 0.0);
        let u = Distribution::uniform(2).unwrap();
        let j = product(&u, &u);
        assert_relative_eq!(conditional_entropy(&j, &p, Direction::YGivenX).value, 0.25, epsilon = 1e-15);
        assert_relative_eq!(conditional_entropy(&j, &p, Direction::XGivenY).value, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn conditional3_degenerate_is_zero() {
        let p = params(0.3, 0.9);
        let mut t = vec![0.0; 2 * 3 * 2];
        t[7] = 1.0;
        let j = JointDistribution3::from_flat(2, 3, 2, t).unwrap();
        for mode in [
            Conditioning3::XYGivenZ,
            Conditioning3::YGivenXZ,
            Conditioning3::XGivenZ,
            Conditioning3::YGivenZ,
        ] {
            assert_eq!(conditional_entropy3(&j, &p, mode).value, 0.0);
        }
    }

    #[test]
    fn mutual_entropy_examples() {
        let p = params(0.5, 1.0);
        let u = Distribution::uniform(2).unwrap();
        assert_relative_eq!(mutual_entropy(&product(&u, &u), &p), 0.25, epsilon = 1e-15);
        assert_eq!(mutual_entropy(&j2(&[&[1.0, 0.0], &[0.0, 0.0]]), &p), 0.0);
        assert_relative_eq!(mutual_entropy(&j2(&[&[0.5, 0.0], &[0.0, 0.5]]), &p), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn reference_entropy_examples() {
        let u = Distribution::uniform(2).unwrap();
        assert_relative_eq!(
            reference_entropy(&u, ReferenceEntropy::Shannon).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        assert_relative_eq!(reference_entropy(&u, ReferenceEntropy::Tsallis(2.0)).unwrap(), 0.5, epsilon = 1e-15);
        assert!(matches!(reference_entropy(&u, ReferenceEntropy::Tsallis(1.0)), Err(Error::Param(_))));
    }

    proptest! {
        #[test]
        fn canonical_matches_literal_and_oracle(seed in any::<u64>(), n in 1usize..20, k in 0.01f64..=0.5, r in 0.01f64..3.0) {
            let p = Distribution::random(n, &mut RngSeed(seed).rng()).unwrap();
            let dp = params(k, r);
            let s = entropy(&p, &dp).value;
            prop_assert!(s >= 0.0);
            prop_assert!((s - entropy_literal(&p, &dp)).abs() <= 1e-12 * s.max(1.0));
            prop_assert!((s - oracle(p.probs(), k, r)).abs() <= 1e-12 * s.max(1.0));
        }

        #[test]
        fn tsallis_reduction(seed in any::<u64>(), n in 1usize..16, k in 0.01f64..=0.5) {
            let p = Distribution::random(n, &mut RngSeed(seed).rng()).unwrap();
            let s = entropy(&p, &params(k, k)).value;
            let t = reference_entropy(&p, ReferenceEntropy::Tsallis(1.0 + 2.0 * k)).unwrap();
            prop_assert!((s - t).abs() <= 1e-12 * t.max(1.0));
        }

        #[test]
        fn mutual_entropy_equals_entropy_minus_conditional(seed in any::<u64>(), a in 1usize..9, b in 1usize..9, k in 0.01f64..=0.5) {
            let j = JointDistribution2::random(a, b, &mut RngSeed(seed).rng()).unwrap();
            let p = params(k, 1.0);
            let alt = entropy(&j.marginal_y(), &p).value - conditional_entropy(&j, &p, Direction::YGivenX).value;
            prop_assert!((mutual_entropy(&j, &p) - alt).abs() <= 1e-12);
        }
    }
}
