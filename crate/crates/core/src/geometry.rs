//! Divergence-induced metric on the interior of the probability simplex.
//!
//! | Object | Expression |
//! |--------|------------|
//! | metric (derived) | `g_ii = (1 - 2k) / p_i`, `g_ij = 0` for `i != j` |
//! | metric (shifted) | `g_ii = (1 - 2k + 4r) / p_i` |
//! | line element | `Σ g_ii dp_i^2` |
//! | potential | `Ψ(u) = c2 + u (c1 - A) + A u ln u`, so `Ψ''(u) = A / u` |
//!
//! The derived metric is the coordinate-wise second derivative of
//! [`divergence`](crate::divergence::divergence) in its first argument at
//! `Q = P`, and is what [`fd_hessian`] reproduces. The shifted coefficient
//! carries an extra `4r` and is available through [`Convention::Shifted`].
//!
//! Second-order expansion gives `D(p + dp || p) ≈ ½ Σ g_ii dp_i^2`, so
//! [`taylor_ratio`] reports `2 D / quadratic_form`, which tends to 1.

use serde::{Deserialize, Serialize};

use crate::deformed_log::DeformParams;
use crate::distributions::{Distribution, SUM_TOLERANCE};
use crate::divergence::divergence_raw;
use crate::error::{ensure_dims, Error, Result};
use crate::numeric::fsum;

/// Default step of the finite-difference Hessian.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Which metric coefficient to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `1 - 2k`, from differentiating the implemented divergence.
    #[default]
    Derived,
    /// `1 - 2k + 4r`.
    Shifted,
}

impl Convention {
    /// Numerator `A` of `g_ii = A / p_i`.
    pub fn coefficient(self, params: &DeformParams) -> f64 {
        let k = params.k();
        match self {
            Convention::Derived => 1.0 - 2.0 * k,
            Convention::Shifted => 1.0 - 2.0 * k + 4.0 * params.r(),
        }
    }
}

/// Diagonal of the metric tensor at a point of the simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricDiagonal {
    pub g: Vec<f64>,
    pub params: DeformParams,
    pub convention: Convention,
}

fn require_full_support(p: &[f64]) -> Result<()> {
    match p.iter().position(|&x| x <= 0.0) {
        Some(i) => Err(Error::Domain(format!("metric needs full support, p[{i}] = {}", p[i]))),
        None => Ok(()),
    }
}

pub fn fisher_metric(p: &Distribution, params: &DeformParams, convention: Convention) -> Result<MetricDiagonal> {
    require_full_support(p.probs())?;
    let a = convention.coefficient(params);
    Ok(MetricDiagonal { g: p.probs().iter().map(|&x| a / x).collect(), params: *params, convention })
}

/// Central second differences of `a ↦ D(a || p)` at `a = p`.
///
/// Coordinates are perturbed independently, without projecting back onto the
/// simplex. Returns the full `n × n` matrix.
pub fn fd_hessian(p: &Distribution, params: &DeformParams, step: f64) -> Result<Vec<Vec<f64>>> {
    let base = p.probs();
    require_full_support(base)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Param(format!("finite-difference step must be positive, got {step}")));
    }
    if let Some(i) = base.iter().position(|&x| x - step <= 0.0 || x + step >= 1.0) {
        return Err(Error::Domain(format!("p[{i}] ± {step} leaves (0, 1)")));
    }
    let k = params.k();
    let n = base.len();
    let f = |shifts: &[(usize, f64)]| -> Result<f64> {
        let mut a = base.to_vec();
        for &(i, s) in shifts {
            a[i] += s;
        }
        divergence_raw(&a, base, k)
    };
    let f0 = f(&[])?;
    let h2 = step * step;
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        hess[i][i] = (f(&[(i, step)])? - 2.0 * f0 + f(&[(i, -step)])?) / h2;
        for j in 0..i {
            let v = (f(&[(i, step), (j, step)])? - f(&[(i, step), (j, -step)])? - f(&[(i, -step), (j, step)])?
                + f(&[(i, -step), (j, -step)])?)
                / (4.0 * h2);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(hess)
}

fn check_displacement(p: &[f64], dp: &[f64]) -> Result<()> {
    ensure_dims(p.len(), dp.len())?;
    require_full_support(p)?;
    let total = fsum(dp.iter().copied());
    if !(total.abs() <= 1e-12) {
        return Err(Error::Domain(format!("displacement must sum to 0, got {total}")));
    }
    if let Some(i) = p.iter().zip(dp).position(|(&a, &d)| !(a + d >= 0.0 && a + d <= 1.0 + SUM_TOLERANCE)) {
        return Err(Error::Domain(format!("p[{i}] + dp[{i}] leaves the simplex")));
    }
    Ok(())
}

/// Line element `Σ g_ii dp_i^2` with the derived metric.
pub fn quadratic_form(p: &Distribution, dp: &[f64], params: &DeformParams) -> Result<f64> {
    check_displacement(p.probs(), dp)?;
    let a = Convention::Derived.coefficient(params);
    Ok(fsum(p.probs().iter().zip(dp).map(|(&x, &d)| a * d * d / x)))
}

/// `2 D(p + dp || p) / quadratic_form(p, dp)`.
pub fn taylor_ratio(p: &Distribution, dp: &[f64], params: &DeformParams) -> Result<f64> {
    let qf = quadratic_form(p, dp, params)?;
    if qf == 0.0 {
        return Err(Error::Domain("quadratic form vanishes; ratio undefined".into()));
    }
    let moved: Vec<f64> = p.probs().iter().zip(dp).map(|(&x, &d)| x + d).collect();
    Ok(2.0 * divergence_raw(&moved, p.probs(), params.k())? / qf)
}

/// Coefficients of `Ψ(u) = c2 + u (c1 - A) + A u ln u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialCoefficients {
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
}

impl PotentialCoefficients {
    pub fn new(a: f64, c1: f64, c2: f64) -> Result<Self> {
        if [a, c1, c2].iter().all(|v| v.is_finite()) {
            Ok(Self { a, c1, c2 })
        } else {
            Err(Error::Param(format!("potential coefficients must be finite, got ({a}, {c1}, {c2})")))
        }
    }

    /// `A` matching a metric convention, with zero integration constants.
    pub fn for_convention(params: &DeformParams, convention: Convention) -> Self {
        Self { a: convention.coefficient(params), c1: 0.0, c2: 0.0 }
    }
}

pub fn hessian_potential(u: f64, coeffs: &PotentialCoefficients) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("potential needs u > 0, got {u}")));
    }
    let PotentialCoefficients { a, c1, c2 } = *coeffs;
    Ok(c2 + u * (c1 - a) + a * u * u.ln())
}

/// Analytic `Ψ''(u) = A / u`.
pub fn potential_second_derivative(u: f64, coeffs: &PotentialCoefficients) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Domain(format!("potential needs u > 0, got {u}")));
    }
    Ok(coeffs.a / u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::divergence;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(k: f64, r: f64) -> DeformParams {
        DeformParams::new(k, r).unwrap()
    }

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn metric_examples() {
        let half = d(&[0.5, 0.5]);
        assert_eq!(fisher_metric(&half, &params(0.25, 1.0), Convention::Derived).unwrap().g, vec![1.0, 1.0]);
        assert_eq!(fisher_metric(&half, &params(0.25, 0.5), Convention::Shifted).unwrap().g, vec![5.0, 5.0]);
        for n in 1..8 {
            let g = fisher_metric(&Distribution::uniform(n).unwrap(), &params(0.1, 0.3), Convention::Derived).unwrap();
            for v in g.g {
                assert_relative_eq!(v, n as f64 * 0.8, max_relative = 1e-15);
            }
        }
        assert!(matches!(
            fisher_metric(&d(&[1.0, 0.0]), &params(0.25, 1.0), Convention::Derived),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fd_hessian_examples() {
        let pp = params(0.25, 1.0);
        let h = fd_hessian(&d(&[0.5, 0.5]), &pp, DEFAULT_FD_STEP).unwrap();
        assert!((h[0][0] - 1.0).abs() < 1e-5 && (h[1][1] - 1.0).abs() < 1e-5);
        assert!(h[0][1].abs() < 1e-8);

        let h2 = fd_hessian(&Distribution::uniform(2).unwrap(), &pp, DEFAULT_FD_STEP).unwrap();
        let h4 = fd_hessian(&Distribution::uniform(4).unwrap(), &pp, DEFAULT_FD_STEP).unwrap();
        assert_relative_eq!(h4[0][0], 2.0 * h2[0][0], max_relative = 1e-6);

        assert!(matches!(fd_hessian(&d(&[0.99995, 0.00005]), &pp, 1e-4), Err(Error::Domain(_))));
        assert!(matches!(fd_hessian(&d(&[0.5, 0.5]), &pp, 0.0), Err(Error::Param(_))));
    }

    #[test]
    fn quadratic_form_examples() {
        let pp = params(0.25, 1.0);
        let half = d(&[0.5, 0.5]);
        assert_eq!(quadratic_form(&half, &[0.0, 0.0], &pp).unwrap(), 0.0);
        assert_relative_eq!(quadratic_form(&half, &[1e-3, -1e-3], &pp).unwrap(), 2e-6, max_relative = 1e-12);
        assert!(matches!(quadratic_form(&half, &[1e-3, 0.0], &pp), Err(Error::Domain(_))));
        assert!(matches!(quadratic_form(&half, &[0.6, -0.6], &pp), Err(Error::Domain(_))));
    }

    #[test]
    fn taylor_ratio_converges() {
        let pp = params(0.2, 0.7);
        let p = d(&[0.2, 0.3, 0.5]);
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&e| (taylor_ratio(&p, &[e, 2.0 * e, -3.0 * e], &pp).unwrap() - 1.0).abs())
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-3);
        // cross-check against the public divergence
        let moved = d(&[0.21, 0.32, 0.47]);
        let direct = divergence(&moved, &p, &pp).unwrap().value;
        let qf = quadratic_form(&p, &[0.01, 0.02, -0.03], &pp).unwrap();
        assert_relative_eq!(
            taylor_ratio(&p, &[0.01, 0.02, -0.03], &pp).unwrap(),
            2.0 * direct / qf,
            max_relative = 1e-12
        );
    }

    #[test]
    fn potential_examples() {
        let c = PotentialCoefficients::new(1.0, 0.0, 0.0).unwrap();
        let h = 1e-4;
        let fd = (hessian_potential(0.5 + h, &c).unwrap() - 2.0 * hessian_potential(0.5, &c).unwrap()
            + hessian_potential(0.5 - h, &c).unwrap())
            / (h * h);
        assert!((fd - 2.0).abs() < 1e-6, "{fd}");
        for a in [-3.0, 0.4, 7.5] {
            let c = PotentialCoefficients::new(a, 0.0, 0.0).unwrap();
            assert_eq!(hessian_potential(1.0, &c).unwrap(), -a);
        }
        assert!(matches!(hessian_potential(0.0, &c), Err(Error::Domain(_))));
        assert!(PotentialCoefficients::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn potential_matches_metric_for_each_convention() {
        let pp = params(0.15, 0.6);
        let p = d(&[0.1, 0.25, 0.65]);
        for conv in [Convention::Derived, Convention::Shifted] {
            let g = fisher_metric(&p, &pp, conv).unwrap();
            let c = PotentialCoefficients::for_convention(&pp, conv);
            for (&u, &gi) in p.probs().iter().zip(&g.g) {
                assert_relative_eq!(potential_second_derivative(u, &c).unwrap(), gi, max_relative = 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn fd_hessian_is_diagonal_and_matches_metric(
            w in prop::collection::vec(0.5f64..1.0, 2..7),
            k in 0.05f64..0.45,
        ) {
            let total: f64 = w.iter().sum();
            let p = Distribution::from_weights(w.iter().map(|x| x / total).collect(), true).unwrap();
            let pp = params(k, 1.0);
            let h = fd_hessian(&p, &pp, DEFAULT_FD_STEP).unwrap();
            let g = fisher_metric(&p, &pp, Convention::Derived).unwrap().g;
            for i in 0..p.len() {
                prop_assert!(((h[i][i] - g[i]) / g[i]).abs() < 1e-5);
                prop_assert!(g[i] > 0.0);
                for j in 0..p.len() {
                    if i != j {
                        prop_assert!(h[i][j].abs() <= 1e-8);
                    }
                }
            }
        }
    }
}
