//! Generalized Tsallis relative entropy.
//!
//! `D(P||Q) = Σ p (p/q)^(r-k) ln_kr(p/q) = -Σ p (q/p)^(r+k) ln_kr(q/p)`.
//!
//! Both forms simplify to the per-term expression `(p - p^(1-2k) q^2k) / (2k)`,
//! which is the canonical evaluator here: it needs no limit at `p = 0`, it does
//! not involve `r`, and it equals the Tsallis relative entropy of index
//! `q = 1 - 2k`. The two displayed forms are kept as [`divergence_literal`] and
//! [`divergence_dual_form`] for cross-checking on full-support pairs.
//!
//! Coordinates with `p = q = 0` contribute nothing. `p > 0` with `q = 0` is an
//! error rather than `+inf`. At `k = 1/2` the value is identically zero;
//! results carry that as [`DivergenceValue::is_degenerate`].

use serde::Serialize;

use crate::deformed_log::{deformed_increment, ln_kr_unchecked, ln_q, DeformParams};
use crate::distributions::{Distribution, JointDistribution2};
use crate::error::{ensure_dims, Error, Result};
use crate::numeric::fsum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Support {
    /// Every coordinate has `p > 0` and `q > 0`.
    Full,
    /// Some coordinate has `p = 0`; its term was taken from the closed form.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub params: DeformParams,
    pub support: Support,
}

impl DivergenceValue {
    /// `k = 1/2`: the divergence cannot separate distributions.
    pub fn is_degenerate(&self) -> bool {
        self.params.k() == 0.5
    }
}

/// `ln(q / p)` for positive arguments; accurate when `q` is close to `p`.
#[inline]
fn log_ratio(q: f64, p: f64) -> f64 {
    if q >= 0.5 * p && q <= 2.0 * p {
        // q - p is exact in this range
        ((q - p) / p).ln_1p()
    } else {
        q.ln() - p.ln()
    }
}

/// One summand `(p - p^(1-2k) q^2k) / (2k)`.
#[inline]
pub(crate) fn divergence_term(index: usize, p: f64, q: f64, k: f64) -> Result<f64> {
    if p > 0.0 {
        if q > 0.0 {
            Ok(-p * deformed_increment(log_ratio(q, p), k))
        } else {
            Err(Error::AbsoluteContinuity { index, p })
        }
    } else if q > 0.0 {
        let e = 1.0 - 2.0 * k;
        if e > 0.0 {
            Ok(0.0)
        } else if e == 0.0 {
            Ok(-q.powf(2.0 * k) / (2.0 * k))
        } else {
            Err(Error::Domain(format!("p[{index}] = 0 term diverges for k={k} > 1/2")))
        }
    } else {
        Ok(0.0)
    }
}

/// Sum of [`divergence_term`] over two equally long slices, with no simplex checks.
pub(crate) fn divergence_raw(p: &[f64], q: &[f64], k: f64) -> Result<f64> {
    ensure_dims(p.len(), q.len())?;
    let terms = p
        .iter()
        .zip(q)
        .enumerate()
        .map(|(i, (&a, &b))| divergence_term(i, a, b, k))
        .collect::<Result<Vec<f64>>>()?;
    Ok(fsum(terms))
}

pub fn divergence(p: &Distribution, q: &Distribution, params: &DeformParams) -> Result<DivergenceValue> {
    let value = divergence_raw(p.probs(), q.probs(), params.k())?;
    let support = if p.has_full_support() && q.has_full_support() {
        Support::Full
    } else {
        Support::Extended
    };
    Ok(DivergenceValue { value, params: *params, support })
}

fn check_support(p: &[f64], q: &[f64]) -> Result<()> {
    ensure_dims(p.len(), q.len())?;
    match p.iter().zip(q).position(|(&a, &b)| a > 0.0 && b <= 0.0) {
        Some(index) => Err(Error::AbsoluteContinuity { index, p: p[index] }),
        None => Ok(()),
    }
}

/// `Σ p (p/q)^(r-k) ln_kr(p/q)` over `p > 0`, evaluated as written.
pub fn divergence_literal(p: &Distribution, q: &Distribution, params: &DeformParams) -> Result<f64> {
    check_support(p.probs(), q.probs())?;
    let (k, r) = (params.k(), params.r());
    Ok(fsum(p.probs().iter().zip(q.probs()).filter(|(&a, _)| a > 0.0).map(|(&a, &b)| {
        let x = a / b;
        a * x.powf(r - k) * ln_kr_unchecked(x, k, r)
    })))
}

/// `-Σ p (q/p)^(r+k) ln_kr(q/p)` over `p > 0`, evaluated as written.
pub fn divergence_dual_form(p: &Distribution, q: &Distribution, params: &DeformParams) -> Result<f64> {
    check_support(p.probs(), q.probs())?;
    let (k, r) = (params.k(), params.r());
    Ok(-fsum(p.probs().iter().zip(q.probs()).filter(|(&a, _)| a > 0.0).map(|(&a, &b)| {
        let x = b / a;
        a * x.powf(r + k) * ln_kr_unchecked(x, k, r)
    })))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceDivergence {
    /// `-Σ p ln_q(q/p)`
    Tsallis(f64),
    /// `Σ p ln(p/q)`
    Kl,
}

pub fn reference_divergence(p: &Distribution, q: &Distribution, family: ReferenceDivergence) -> Result<f64> {
    check_support(p.probs(), q.probs())?;
    let pairs = p.probs().iter().zip(q.probs()).filter(|(&a, _)| a > 0.0);
    match family {
        ReferenceDivergence::Kl => Ok(pairs.map(|(&a, &b)| a * (a / b).ln()).sum()),
        ReferenceDivergence::Tsallis(qp) => {
            let mut total = 0.0;
            for (&a, &b) in pairs {
                total -= a * ln_q(b / a, qp)?;
            }
            Ok(total)
        }
    }
}

/// `D(p(x,y) || p(x) p(y))`.
pub fn mutual_divergence(j: &JointDistribution2, params: &DeformParams) -> Result<DivergenceValue> {
    let px = j.marginal_x_raw();
    let py = j.marginal_y_raw();
    let independent: Vec<f64> = px.iter().flat_map(|&a| py.iter().map(move |&b| a * b)).collect();
    let value = divergence_raw(j.flat(), &independent, params.k())?;
    let support = if j.flat().iter().all(|&v| v > 0.0) {
        Support::Full
    } else {
        Support::Extended
    };
    Ok(DivergenceValue { value, params: *params, support })
}

/// Both sides of the deformed log-sum inequality
/// `Σ a_i (a_i/b_i)^(r-k) ln_kr(a_i/b_i) >= a (a/b)^(r-k) ln_kr(a/b)`,
/// with `a = Σ a_i`, `b = Σ b_i`. Returns `(lhs, rhs)`.
pub fn log_sum_gap(a: &[f64], b: &[f64], params: &DeformParams) -> Result<(f64, f64)> {
    ensure_dims(a.len(), b.len())?;
    if let Some(bad) = a.iter().chain(b).find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("log-sum entries must be positive and finite, got {bad}")));
    }
    let k = params.k();
    let side = |x: f64, y: f64| -x * deformed_increment(log_ratio(y, x), k);
    let lhs = fsum(a.iter().zip(b).map(|(&x, &y)| side(x, y)));
    let rhs = side(a.iter().sum(), b.iter().sum());
    Ok((lhs, rhs))
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

    #[test]
    fn divergence_examples() {
        let p = d(&[0.2, 0.5, 0.3]);
        assert_eq!(divergence(&p, &p, &params(0.3, 0.8)).unwrap().value, 0.0);
        let v = divergence(&d(&[0.5, 0.5]), &d(&[0.25, 0.75]), &params(0.25, 1.0)).unwrap();
        // mpmath, 40 digits
        assert_relative_eq!(v.value, 0.068_148_347_421_863_43, epsilon = 1e-15);
        assert_eq!(v.support, Support::Full);

        let ext = divergence(&d(&[0.7, 0.3, 0.0]), &d(&[0.6, 0.4, 0.0]), &params(0.2, 0.5)).unwrap();
        let base = divergence(&d(&[0.7, 0.3]), &d(&[0.6, 0.4]), &params(0.2, 0.5)).unwrap();
        assert_eq!(ext.value, base.value);
        assert_eq!(ext.support, Support::Extended);
    }

    #[test]
    fn absolute_continuity_and_dimensions() {
        let pp = params(0.2, 0.5);
        assert!(matches!(
            divergence(&d(&[0.5, 0.5]), &d(&[1.0, 0.0]), &pp),
            Err(Error::AbsoluteContinuity { index: 1, .. })
        ));
        assert!(matches!(divergence(&d(&[1.0]), &d(&[0.5, 0.5]), &pp), Err(Error::Dimension { .. })));
        // p = 0 < q is fine
        assert!(divergence(&d(&[1.0, 0.0]), &d(&[0.5, 0.5]), &pp).is_ok());
    }

    #[test]
    fn half_k_is_degenerate() {
        let v = divergence(&d(&[0.9, 0.1]), &d(&[0.2, 0.8]), &params(0.5, 1.0)).unwrap();
        assert!(v.value.abs() < 1e-15);
        assert!(v.is_degenerate());
        let w = divergence(&d(&[1.0, 0.0]), &d(&[0.2, 0.8]), &params(0.5, 1.0)).unwrap();
        assert!(w.value.abs() < 1e-15);
    }

    #[test]
    fn zero_p_term_uses_closed_form() {
        for k in [0.05, 0.3, 0.49] {
            assert_eq!(divergence_term(0, 0.0, 0.4, k).unwrap(), 0.0);
        }
        assert_relative_eq!(divergence_term(0, 0.0, 0.4, 0.5).unwrap(), -0.4);
        assert!(divergence_term(0, 0.0, 0.4, 0.7).is_err());
    }

    #[test]
    fn reference_divergence_examples() {
        let p = d(&[0.5, 0.5]);
        assert_eq!(reference_divergence(&p, &p, ReferenceDivergence::Kl).unwrap(), 0.0);
        assert_relative_eq!(
            reference_divergence(&p, &d(&[0.25, 0.75]), ReferenceDivergence::Kl).unwrap(),
            0.143_841_036_225_890_46,
            epsilon = 1e-15
        );
        assert!(matches!(
            reference_divergence(&p, &p, ReferenceDivergence::Tsallis(1.0)),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn mutual_divergence_examples() {
        let pp = params(0.25, 1.0);
        let j = product(&d(&[0.3, 0.7]), &d(&[0.1, 0.6, 0.3]));
        assert!(mutual_divergence(&j, &pp).unwrap().value.abs() < 1e-15);
        let diag = JointDistribution2::from_rows(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_relative_eq!(
            mutual_divergence(&diag, &pp).unwrap().value,
            0.585_786_437_626_904_9,
            epsilon = 1e-15
        );
    }

    #[test]
    fn log_sum_examples() {
        let pp = params(0.25, 0.75);
        let (l, r) = log_sum_gap(&[0.3, 1.7, 2.0], &[0.3, 1.7, 2.0], &pp).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
        let (l, r) = log_sum_gap(&[1.0, 1.0], &[2.0, 2.0], &pp).unwrap();
        assert_relative_eq!(l, r, epsilon = 1e-15);
        let (l, r) = log_sum_gap(&[1.0, 2.0], &[2.0, 1.0], &pp).unwrap();
        // direct evaluation: 2 (3 - 2 sqrt 2) vs 0
        assert_relative_eq!(l, 0.343_145_750_507_619_8, epsilon = 1e-15);
        assert_eq!(r, 0.0);
        assert!(log_sum_gap(&[1.0, 0.0], &[1.0, 1.0], &pp).is_err());
        assert!(matches!(log_sum_gap(&[1.0], &[1.0, 1.0], &pp), Err(Error::Dimension { .. })));
    }

    proptest! {
        #[test]
        fn three_evaluators_agree(seed in any::<u64>(), n in 1usize..16, k in 0.01f64..=0.5, r in 0.01f64..3.0) {
            let mut rng = RngSeed(seed).rng();
            let p = Distribution::random(n, &mut rng).unwrap();
            let q = Distribution::random(n, &mut rng).unwrap();
            let pp = params(k, r);
            let v = divergence(&p, &q, &pp).unwrap().value;
            prop_assert!(v >= -1e-15);
            prop_assert!((v - divergence_literal(&p, &q, &pp).unwrap()).abs() <= 1e-12 * v.max(1.0));
            prop_assert!((v - divergence_dual_form(&p, &q, &pp).unwrap()).abs() <= 1e-12 * v.max(1.0));
        }

        #[test]
        fn tsallis_reduction(seed in any::<u64>(), n in 1usize..16, qp in 0.05f64..0.99) {
            let mut rng = RngSeed(seed).rng();
            let p = Distribution::random(n, &mut rng).unwrap();
            let q = Distribution::random(n, &mut rng).unwrap();
            let k = (1.0 - qp) / 2.0;
            let v = divergence(&p, &q, &DeformParams::relaxed(k, k).unwrap()).unwrap().value;
            let t = reference_divergence(&p, &q, ReferenceDivergence::Tsallis(qp)).unwrap();
            prop_assert!((v - t).abs() <= 1e-12 * t.max(1.0));
        }

        #[test]
        fn permutation_symmetry(seed in any::<u64>(), n in 1usize..12, k in 0.01f64..=0.5) {
            use rand::seq::SliceRandom;
            let mut rng = RngSeed(seed).rng();
            let p = Distribution::random(n, &mut rng).unwrap();
            let q = Distribution::random(n, &mut rng).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let pp = params(k, 1.0);
            let a = divergence(&p, &q, &pp).unwrap().value;
            let b = divergence(&p.permuted(&perm).unwrap(), &q.permuted(&perm).unwrap(), &pp).unwrap().value;
            prop_assert_eq!(a, b);
        }
    }
}
