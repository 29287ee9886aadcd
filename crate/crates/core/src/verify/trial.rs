use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::SweepConfig;
use crate::deformed_log::DeformParams;
use crate::distributions::{
    sample, Channel, Distribution, JointDistribution2, JointDistribution3, RngSeed, SampleKind, Sampled,
};
use crate::error::{Error, Result};
use crate::io::format_f64;

/// Upper end of the `k` range used where the divergence must separate points.
pub(crate) const SEPARATING_K_MAX: f64 = 0.45;

fn child_seed(master: u64, name: &str, index: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((name.len() as u64).to_le_bytes());
    h.update(name.as_bytes());
    h.update((index as u64).to_le_bytes());
    h.finalize().into()
}

/// Sampling context of one `(property, trial)` pair.
pub(crate) struct Trial<'a> {
    pub index: usize,
    cfg: &'a SweepConfig,
    rng: ChaCha8Rng,
    notes: Vec<String>,
}

impl<'a> Trial<'a> {
    pub fn new(cfg: &'a SweepConfig, name: &str, index: usize) -> Self {
        let seed = child_seed(cfg.seed.0, name, index);
        let head: String = seed[..8].iter().map(|b| format!("{b:02x}")).collect();
        Self { index, cfg, rng: ChaCha8Rng::from_seed(seed), notes: vec![format!("seed={head}")] }
    }

    pub fn is_first(&self) -> bool {
        self.index == 0
    }

    pub fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.notes.push(format!("{key}={value}"));
    }

    pub fn digest(&self) -> String {
        self.notes.join(" ")
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            lo
        } else {
            self.rng.random_range(lo..=hi)
        }
    }

    /// A real drawn from `[lo, hi]` and recorded under `key`.
    pub fn real(&mut self, key: &str, lo: f64, hi: f64) -> f64 {
        let v = self.uniform(lo, hi);
        self.note(key, format_f64(v));
        v
    }

    pub fn size_between(&mut self, key: &str, lo: usize, hi: usize) -> usize {
        let n = if lo >= hi { lo } else { self.rng.random_range(lo..=hi) };
        self.note(key, n);
        n
    }

    pub fn size_bounds(&self) -> (usize, usize) {
        self.cfg.size_range
    }

    /// An alphabet size from the configured range.
    pub fn size(&mut self, key: &str) -> usize {
        let (lo, hi) = self.cfg.size_range;
        self.size_between(key, lo, hi)
    }

    /// An alphabet size from the configured range clamped to `[min, max]`.
    pub fn size_clamped(&mut self, key: &str, min: usize, max: usize) -> usize {
        let (lo, hi) = self.cfg.size_range;
        self.size_between(key, lo.clamp(min, max), hi.clamp(min, max))
    }

    pub fn k(&mut self) -> f64 {
        let (lo, hi) = self.cfg.k_range;
        self.real("k", lo, hi)
    }

    /// `k` restricted to values where the divergence separates distributions.
    pub fn separating_k(&mut self) -> f64 {
        let (lo, hi) = self.cfg.k_range;
        self.real("k", lo, hi.min(SEPARATING_K_MAX).max(lo))
    }

    pub fn r(&mut self) -> f64 {
        let (lo, hi) = self.cfg.r_range;
        self.real("r", lo, hi)
    }

    pub fn params(&mut self) -> Result<DeformParams> {
        let k = self.k();
        let r = self.r();
        DeformParams::new(k, r)
    }

    pub fn separating_params(&mut self) -> Result<DeformParams> {
        let k = self.separating_k();
        let r = self.r();
        DeformParams::new(k, r)
    }

    /// `exp(t)` with `|t|` log-uniform in `[1e-2, ln 1e3]` and a random sign.
    pub fn scalar(&mut self, key: &str) -> f64 {
        let mag = self.uniform(1e-2f64.ln(), 1e3f64.ln().ln()).exp();
        let t = if self.rng.random_bool(0.5) { mag } else { -mag };
        let x = t.exp();
        self.note(key, format_f64(x));
        x
    }

    fn child(&mut self) -> RngSeed {
        RngSeed(self.rng.next_u64())
    }

    pub fn dist(&mut self, n: usize) -> Result<Distribution> {
        match sample(SampleKind::Distribution(n), self.child())? {
            Sampled::Distribution(p) => Ok(p),
            _ => unreachable!("sampler returns the requested kind"),
        }
    }

    /// A random distribution; one time in three a random subset of entries is zeroed.
    pub fn sparse_dist(&mut self, n: usize) -> Result<Distribution> {
        let p = self.dist(n)?;
        if n < 2 || !self.rng.random_bool(1.0 / 3.0) {
            return Ok(p);
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        let zeros = self.rng.random_range(1..n);
        let mut w = p.into_vec();
        for &i in &order[..zeros] {
            w[i] = 0.0;
        }
        self.note("zeros", zeros);
        Distribution::from_weights(w, true)
    }

    /// `(p + uniform) / 2`: full support with every entry at least `1 / (2n)`.
    pub fn interior_dist(&mut self, n: usize) -> Result<Distribution> {
        let p = self.dist(n)?;
        let u = 1.0 / n as f64;
        Distribution::from_weights(p.probs().iter().map(|&x| 0.5 * x + 0.5 * u).collect(), true)
    }

    pub fn joint2(&mut self, nx: usize, ny: usize) -> Result<JointDistribution2> {
        match sample(SampleKind::Joint2(nx, ny), self.child())? {
            Sampled::Joint2(j) => Ok(j),
            _ => unreachable!("sampler returns the requested kind"),
        }
    }

    pub fn joint3(&mut self, nx: usize, ny: usize, nz: usize) -> Result<JointDistribution3> {
        match sample(SampleKind::Joint3(nx, ny, nz), self.child())? {
            Sampled::Joint3(j) => Ok(j),
            _ => unreachable!("sampler returns the requested kind"),
        }
    }

    pub fn channel(&mut self, m: usize, n: usize) -> Result<Channel> {
        match sample(SampleKind::Channel(m, n), self.child())? {
            Sampled::Channel(w) => Ok(w),
            _ => unreachable!("sampler returns the requested kind"),
        }
    }

    pub fn partition_channel(&mut self, m: usize, n: usize) -> Result<Channel> {
        Channel::random_partition(m, n, &mut self.rng)
    }
}

/// Both sides of a checked relation and the signed slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Outcome {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl Outcome {
    /// `lhs = Σ terms`, slack scaled by the largest magnitude involved (and at least `floor`).
    pub fn identity(lhs: f64, terms: &[f64], floor: f64) -> Self {
        let rhs = crate::numeric::fsum(terms.iter().copied());
        let scale = terms.iter().fold(lhs.abs().max(rhs.abs()).max(floor), |m, t| m.max(t.abs()));
        let diff = lhs - rhs;
        let slack = if scale == 0.0 { diff } else { diff / scale };
        Self { lhs, rhs, slack }
    }

    /// `lhs <= rhs`.
    pub fn le(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: rhs - lhs }
    }

    /// `lhs >= rhs`.
    pub fn ge(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: lhs - rhs }
    }

    /// Largest `|slack|` among identity outcomes.
    pub fn worst_identity(all: impl IntoIterator<Item = Outcome>) -> Result<Self> {
        all.into_iter()
            .reduce(|a, b| if b.slack.abs() > a.slack.abs() || b.slack.is_nan() { b } else { a })
            .ok_or_else(|| Error::Config("no outcomes to combine".into()))
    }

    /// Smallest slack among inequality outcomes.
    pub fn worst_inequality(all: impl IntoIterator<Item = Outcome>) -> Result<Self> {
        all.into_iter()
            .reduce(|a, b| if b.slack < a.slack || b.slack.is_nan() { b } else { a })
            .ok_or_else(|| Error::Config("no outcomes to combine".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn child_seeds_differ_by_every_component() {
        let a = child_seed(1, "chain_rule", 0);
        assert_ne!(a, child_seed(2, "chain_rule", 0));
        assert_ne!(a, child_seed(1, "chain_rul", 0));
        assert_ne!(a, child_seed(1, "chain_rule", 1));
        assert_eq!(a, child_seed(1, "chain_rule", 0));
    }

    #[test]
    fn identity_slack_scaling() {
        let o = Outcome::identity(2.0 + 1e-12, &[1.0, 1.0], 0.0);
        assert!((o.slack - 0.5e-12).abs() < 1e-15);
        let z = Outcome::identity(0.0, &[0.0], 0.0);
        assert_eq!(z.slack, 0.0);
        let floored = Outcome::identity(1e-13, &[0.0], 1.0);
        assert_eq!(floored.slack, 1e-13);
    }

    #[test]
    fn worst_selection() {
        let a = Outcome::le(1.0, 2.0);
        let b = Outcome::le(1.0, 1.5);
        assert_eq!(Outcome::worst_inequality([a, b]).unwrap(), b);
        let c = Outcome::identity(1.0, &[1.0], 0.0);
        let d = Outcome::identity(1.0, &[1.1], 0.0);
        assert_eq!(Outcome::worst_identity([c, d]).unwrap(), d);
    }
}
