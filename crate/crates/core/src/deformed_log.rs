//! Two-parameter deformed logarithm.
//!
//! | Function | Formula |
//! |----------|---------|
//! | [`ln_kr`] | `(x^k - x^-k) / (2k x^r) = (x^2k - 1) / (2k x^(r+k))` |
//! | [`legacy_ln`] | `x^r (x^k - x^-k) / (2k)` (Sharma-Mittal form, carries `x^+r`) |
//! | [`legacy_u`] | `x^r (x^k + x^-k) / 2` (companion of the legacy product rule) |
//! | [`ln_q`] | `(x^(1-q) - 1) / (1 - q)` (Tsallis q-logarithm) |
//!
//! `ln_kr` with `k = r = (q-1)/2` is the Tsallis q-logarithm, and tends to the
//! natural logarithm as `k, r -> 0`. All evaluations go through
//! `expm1(2k ln x)` so that small `k` and `x` near 1 keep full precision.
//!
//! [`legacy_ln`] and [`ln_kr`] differ in the sign of the `x^r` factor:
//! `legacy_ln(x, k, r) = ln_kr(x, k, -r)`. They are kept as separate functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a [`DeformParams`] was checked against the strict domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamPolicy {
    /// `0 < k <= 1/2` and `r > 0`.
    Strict,
    /// Any finite `k != 0` and finite `r`.
    Relaxed,
}

/// The deformation pair `(k, r)`.
///
/// Construction validates the pair: [`DeformParams::new`] enforces the strict
/// domain, [`DeformParams::relaxed`] only requires `k != 0`. Every operation in
/// the crate accepts whichever was built, so the policy choice is made once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformParams {
    k: f64,
    r: f64,
    policy: ParamPolicy,
}

impl DeformParams {
    /// Strict parameters: `0 < k <= 1/2`, `r > 0`.
    pub fn new(k: f64, r: f64) -> Result<Self> {
        if !k.is_finite() || !r.is_finite() {
            return Err(Error::Param(format!("non-finite parameters k={k}, r={r}")));
        }
        if !(k > 0.0 && k <= 0.5) {
            return Err(Error::Param(format!("k={k} outside (0, 1/2]")));
        }
        if r <= 0.0 {
            return Err(Error::Param(format!("r={r} must be positive")));
        }
        Ok(Self { k, r, policy: ParamPolicy::Strict })
    }

    /// Relaxed parameters: any finite `k != 0` and finite `r`.
    pub fn relaxed(k: f64, r: f64) -> Result<Self> {
        if !k.is_finite() || !r.is_finite() {
            return Err(Error::Param(format!("non-finite parameters k={k}, r={r}")));
        }
        if k == 0.0 {
            return Err(Error::Param("k must be non-zero".into()));
        }
        Ok(Self { k, r, policy: ParamPolicy::Relaxed })
    }

    pub fn with_policy(k: f64, r: f64, policy: ParamPolicy) -> Result<Self> {
        match policy {
            ParamPolicy::Strict => Self::new(k, r),
            ParamPolicy::Relaxed => Self::relaxed(k, r),
        }
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    #[inline]
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn policy(&self) -> ParamPolicy {
        self.policy
    }

    /// True when the pair also satisfies the strict domain, whatever policy built it.
    pub fn is_strict_domain(&self) -> bool {
        self.k > 0.0 && self.k <= 0.5 && self.r > 0.0
    }

    /// Membership in the admissible region of the original Sharma-Mittal logarithm:
    /// `-|k| <= r <= |k|` for `|k| < 1/2`, `|k|-1 <= r <= 1-|k|` for `1/2 <= |k| < 1`.
    pub fn in_legacy_region(&self) -> bool {
        let ak = self.k.abs();
        if ak < 0.5 {
            -ak <= self.r && self.r <= ak
        } else if ak < 1.0 {
            ak - 1.0 <= self.r && self.r <= 1.0 - ak
        } else {
            false
        }
    }

    /// Parameters `(a k, a r)` used by the power rule `ln_kr(x^a) = a ln_{ak,ar}(x)`.
    ///
    /// `a = 0` is rejected since `ln_{0,0}` is undefined. The result keeps the
    /// policy of `self`, so a strict pair can fail here when `a k > 1/2`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::Param(format!("power-rule exponent a={a} must be finite and non-zero")));
        }
        Self::with_policy(a * self.k, a * self.r, self.policy)
    }
}

/// `expm1(2k t) / (2k)`, i.e. `(x^2k - 1)/(2k)` for `t = ln x`.
///
/// This is `x^(r+k) ln_kr(x)`; it is independent of `r` and tends to `t` as `k -> 0`.
#[inline]
pub(crate) fn deformed_increment(log_x: f64, k: f64) -> f64 {
    (2.0 * k * log_x).exp_m1() / (2.0 * k)
}

#[inline]
pub(crate) fn ln_kr_unchecked(x: f64, k: f64, r: f64) -> f64 {
    let t = x.ln();
    deformed_increment(t, k) * (-(r + k) * t).exp()
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument x={x} must be positive and finite")))
    }
}

/// The deformed logarithm `ln_{k,r}(x) = (x^2k - 1) / (2k x^(r+k))`.
pub fn ln_kr(x: f64, params: &DeformParams) -> Result<f64> {
    check_positive(x)?;
    Ok(ln_kr_unchecked(x, params.k, params.r))
}

/// Tsallis q-logarithm `(x^(1-q) - 1) / (1 - q)`.
pub fn ln_q(x: f64, q: f64) -> Result<f64> {
    check_positive(x)?;
    if q == 1.0 || !q.is_finite() {
        return Err(Error::Param(format!("q={q} must be finite and different from 1")));
    }
    let a = 1.0 - q;
    Ok((a * x.ln()).exp_m1() / a)
}

/// The original Sharma-Mittal logarithm `x^r (x^k - x^-k) / (2k)`.
///
/// Parameters outside the legacy admissible region are evaluated anyway, with a warning.
pub fn legacy_ln(x: f64, params: &DeformParams) -> Result<f64> {
    check_positive(x)?;
    if !params.in_legacy_region() {
        log::warn!(
            "legacy logarithm evaluated outside its admissible region (k={}, r={})",
            params.k,
            params.r
        );
    }
    Ok(legacy_ln_unchecked(x, params.k, params.r))
}

#[inline]
pub(crate) fn legacy_ln_unchecked(x: f64, k: f64, r: f64) -> f64 {
    let t = x.ln();
    (r * t).exp() * ((k * t).exp() - (-k * t).exp()) / (2.0 * k)
}

/// `x^r (x^k + x^-k) / 2`, the second function in the legacy product rule
/// `Ln(xy) = u(x) Ln(y) + Ln(x) u(y)`.
pub fn legacy_u(x: f64, params: &DeformParams) -> Result<f64> {
    check_positive(x)?;
    let t = x.ln();
    let (k, r) = (params.k, params.r);
    Ok((r * t).exp() * ((k * t).exp() + (-k * t).exp()) / 2.0)
}
