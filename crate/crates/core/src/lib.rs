//! Two-parameter generalized Tsallis entropy and relative entropy on finite
//! probability spaces, the metric they induce on the simplex, and a seeded
//! property-sweep engine that checks their identities and inequalities.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`deformed_log`] | `ln_kr(x) = (x^k - x^-k) / (2k x^r)`, the q-logarithm, legacy forms |
//! | [`distributions`] | validated vectors, joints, channels, seeded samplers |
//! | [`entropy`] | `S(X) = -Σ p^(r+k+1) ln_kr(p)`, joint, conditional, mutual |
//! | [`divergence`] | `D(P||Q) = Σ p (p/q)^(r-k) ln_kr(p/q)` and the log-sum inequality |
//! | [`geometry`] | metric `g_ii = A / p_i`, finite-difference Hessian, potential |
//! | [`io`] | JSON and CSV readers and writers |
//! | [`verify`] | property registry and sweep runner |
//!
//! ```
//! use entrokit::{entropy, DeformParams, Distribution};
//!
//! let p = Distribution::uniform(4).unwrap();
//! let s = entropy(&p, &DeformParams::new(0.25, 1.0).unwrap());
//! assert!((s.value - 1.0).abs() < 1e-15);
//! ```

pub mod deformed_log;
pub mod distributions;
pub mod divergence;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod numeric;
pub mod verify;

pub use deformed_log::{legacy_ln, legacy_u, ln_kr, ln_q, DeformParams, ParamPolicy};
pub use distributions::{
    apply_channel, make_distribution, marginals, mix, product, sample, Channel, Distribution, JointDistribution2,
    JointDistribution3, RngSeed, SampleKind, Sampled,
};
pub use divergence::{
    divergence, divergence_dual_form, divergence_literal, log_sum_gap, mutual_divergence, reference_divergence,
    DivergenceValue, ReferenceDivergence, Support,
};
pub use entropy::{
    conditional_entropy, conditional_entropy3, entropy, entropy_literal, joint_entropy, mutual_entropy,
    reference_entropy, Conditioning3, Direction, EntropyValue, ReferenceEntropy,
};
pub use error::{Error, Result};
pub use geometry::{
    fd_hessian, fisher_metric, hessian_potential, quadratic_form, taylor_ratio, Convention, MetricDiagonal,
    PotentialCoefficients,
};
pub use verify::{
    check_trial, list_properties, run_suite, CheckResult, PropertyInfo, PropertyKind, PropertyReport, SweepConfig,
    VerificationReport,
};
