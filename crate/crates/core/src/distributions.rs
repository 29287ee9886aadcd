//! Finite probability distributions, joint tensors and stochastic channels.
//!
//! All types validate on construction (non-negative entries, total mass 1
//! within [`SUM_TOLERANCE`]) and are immutable afterwards. Conditionals are
//! computed on the fly; a conditioning cell with zero mass yields an all-zero
//! conditional slice, which contributes nothing to any entropy sum.
//!
//! Random instances are drawn uniformly on the simplex by normalising i.i.d.
//! standard exponentials. [`sample`] is a pure function of `(kind, seed)`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dims, Error, Result};

/// Absolute tolerance on the total mass of validated objects.
pub const SUM_TOLERANCE: f64 = 1e-9;

fn validate_mass(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Validation(format!("{what} is empty")));
    }
    let mut sum = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Validation(format!("{what}: entry {i} is not finite ({v})")));
        }
        if v < 0.0 {
            return Err(Error::Validation(format!("{what}: entry {i} is negative ({v})")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::Validation(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

fn simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

fn require_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.iter().any(|&s| s == 0) {
        Err(Error::Param(format!("all sizes must be at least 1, got {sizes:?}")))
    } else {
        Ok(())
    }
}

/// A probability vector on a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct Distribution {
    p: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    p: Vec<f64>,
}

impl TryFrom<DistributionRepr> for Distribution {
    type Error = Error;
    fn try_from(r: DistributionRepr) -> Result<Self> {
        Distribution::new(r.p)
    }
}

impl From<Distribution> for DistributionRepr {
    fn from(d: Distribution) -> Self {
        DistributionRepr { p: d.p }
    }
}

impl Distribution {
    /// Validates `p` as given; no normalisation.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        validate_mass(&p, "distribution")?;
        Ok(Self { p })
    }

    /// Builds a distribution from non-negative weights, optionally dividing by their sum.
    pub fn from_weights(weights: Vec<f64>, normalize: bool) -> Result<Self> {
        if !normalize {
            return Self::new(weights);
        }
        if weights.is_empty() {
            return Err(Error::Validation("distribution is empty".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Validation(format!("weight {i} is negative or not finite ({w})")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Validation("cannot normalise all-zero weights".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        require_sizes(&[n])?;
        Ok(Self { p: vec![1.0 / n as f64; n] })
    }

    /// Uniform on the simplex.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        require_sizes(&[n])?;
        Ok(Self { p: simplex_point(n, rng) })
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    /// Every entry strictly positive.
    pub fn has_full_support(&self) -> bool {
        self.p.iter().all(|&x| x > 0.0)
    }

    /// Entry `i` of the result is `p[perm[i]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        ensure_dims(self.len(), perm.len())?;
        let mut seen = vec![false; perm.len()];
        for &j in perm {
            if j >= perm.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::Validation(format!("{perm:?} is not a permutation")));
            }
        }
        Ok(Self { p: perm.iter().map(|&j| self.p[j]).collect() })
    }

    /// Appends `zeros` zero-probability outcomes.
    pub fn extended(&self, zeros: usize) -> Self {
        let mut p = self.p.clone();
        p.resize(self.p.len() + zeros, 0.0);
        Self { p }
    }
}

/// Joint distribution of two variables, stored row-major as `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Joint2Repr", into = "Joint2Repr")]
pub struct JointDistribution2 {
    nx: usize,
    ny: usize,
    m: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Joint2Repr {
    m: Vec<Vec<f64>>,
}

impl TryFrom<Joint2Repr> for JointDistribution2 {
    type Error = Error;
    fn try_from(r: Joint2Repr) -> Result<Self> {
        JointDistribution2::from_rows(r.m)
    }
}

impl From<JointDistribution2> for Joint2Repr {
    fn from(j: JointDistribution2) -> Self {
        Joint2Repr { m: j.rows() }
    }
}

fn flatten_rows(rows: Vec<Vec<f64>>, what: &str) -> Result<(usize, usize, Vec<f64>)> {
    let nr = rows.len();
    if nr == 0 {
        return Err(Error::Validation(format!("{what} has no rows")));
    }
    let nc = rows[0].len();
    if nc == 0 {
        return Err(Error::Validation(format!("{what} has empty rows")));
    }
    let mut flat = Vec::with_capacity(nr * nc);
    for row in rows {
        if row.len() != nc {
            return Err(Error::Validation(format!("{what} is ragged: row of length {} vs {nc}", row.len())));
        }
        flat.extend(row);
    }
    Ok((nr, nc, flat))
}

impl JointDistribution2 {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (nx, ny, m) = flatten_rows(rows, "joint distribution")?;
        Self::from_flat(nx, ny, m)
    }

    pub fn from_flat(nx: usize, ny: usize, m: Vec<f64>) -> Result<Self> {
        require_sizes(&[nx, ny])?;
        ensure_dims(nx * ny, m.len())?;
        validate_mass(&m, "joint distribution")?;
        Ok(Self { nx, ny, m })
    }

    pub fn random<R: Rng + ?Sized>(nx: usize, ny: usize, rng: &mut R) -> Result<Self> {
        require_sizes(&[nx, ny])?;
        Ok(Self { nx, ny, m: simplex_point(nx * ny, rng) })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.m[x * self.ny + y]
    }

    pub fn flat(&self) -> &[f64] {
        &self.m
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.m.chunks(self.ny).map(<[f64]>::to_vec).collect()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.m[x * self.ny..(x + 1) * self.ny]
    }

    pub(crate) fn marginal_x_raw(&self) -> Vec<f64> {
        self.m.chunks(self.ny).map(|row| row.iter().sum()).collect()
    }

    pub(crate) fn marginal_y_raw(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ny];
        for row in self.m.chunks(self.ny) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    pub fn marginal_x(&self) -> Distribution {
        Distribution { p: self.marginal_x_raw() }
    }

    pub fn marginal_y(&self) -> Distribution {
        Distribution { p: self.marginal_y_raw() }
    }

    /// Swaps the roles of `x` and `y`.
    pub fn transpose(&self) -> Self {
        let mut m = Vec::with_capacity(self.m.len());
        for y in 0..self.ny {
            for x in 0..self.nx {
                m.push(self.get(x, y));
            }
        }
        Self { nx: self.ny, ny: self.nx, m }
    }

    /// `p(y | x)` as a vector over `y`; all zeros when `p(x) = 0`.
    pub fn conditional_y_given_x(&self, x: usize) -> Vec<f64> {
        let row = self.row(x);
        let px: f64 = row.iter().sum();
        if px > 0.0 {
            row.iter().map(|v| v / px).collect()
        } else {
            vec![0.0; self.ny]
        }
    }

    /// Flattened joint as a distribution over `nx * ny` outcomes.
    pub fn to_distribution(&self) -> Distribution {
        Distribution { p: self.m.clone() }
    }
}

/// Joint distribution of three variables, stored row-major as `(x, y, z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Joint3Repr", into = "Joint3Repr")]
pub struct JointDistribution3 {
    nx: usize,
    ny: usize,
    nz: usize,
    t: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Joint3Repr {
    t: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<Joint3Repr> for JointDistribution3 {
    type Error = Error;
    fn try_from(r: Joint3Repr) -> Result<Self> {
        JointDistribution3::from_nested(r.t)
    }
}

impl From<JointDistribution3> for Joint3Repr {
    fn from(j: JointDistribution3) -> Self {
        Joint3Repr { t: j.nested() }
    }
}

impl JointDistribution3 {
    pub fn from_nested(t: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let nx = t.len();
        if nx == 0 {
            return Err(Error::Validation("joint tensor is empty".into()));
        }
        let ny = t[0].len();
        let nz = t[0].first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(nx * ny * nz);
        for plane in t {
            if plane.len() != ny {
                return Err(Error::Validation("joint tensor is ragged".into()));
            }
            for line in plane {
                if line.len() != nz {
                    return Err(Error::Validation("joint tensor is ragged".into()));
                }
                flat.extend(line);
            }
        }
        Self::from_flat(nx, ny, nz, flat)
    }

    pub fn from_flat(nx: usize, ny: usize, nz: usize, t: Vec<f64>) -> Result<Self> {
        require_sizes(&[nx, ny, nz])?;
        ensure_dims(nx * ny * nz, t.len())?;
        validate_mass(&t, "joint tensor")?;
        Ok(Self { nx, ny, nz, t })
    }

    pub fn random<R: Rng + ?Sized>(nx: usize, ny: usize, nz: usize, rng: &mut R) -> Result<Self> {
        require_sizes(&[nx, ny, nz])?;
        Ok(Self { nx, ny, nz, t: simplex_point(nx * ny * nz, rng) })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.t[(x * self.ny + y) * self.nz + z]
    }

    pub fn flat(&self) -> &[f64] {
        &self.t
    }

    pub fn nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.nx)
            .map(|x| (0..self.ny).map(|y| (0..self.nz).map(|z| self.get(x, y, z)).collect()).collect())
            .collect()
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution { p: self.t.clone() }
    }

    pub fn marginal_z(&self) -> Distribution {
        let mut p = vec![0.0; self.nz];
        for chunk in self.t.chunks(self.nz) {
            for (o, v) in p.iter_mut().zip(chunk) {
                *o += v;
            }
        }
        Distribution { p }
    }

    /// Joint of `(x, z)` with `x` as the row index.
    pub fn marginal_xz(&self) -> JointDistribution2 {
        let mut m = vec![0.0; self.nx * self.nz];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    m[x * self.nz + z] += self.get(x, y, z);
                }
            }
        }
        JointDistribution2 { nx: self.nx, ny: self.nz, m }
    }

    /// Joint of `(y, z)` with `y` as the row index.
    pub fn marginal_yz(&self) -> JointDistribution2 {
        let mut m = vec![0.0; self.ny * self.nz];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for z in 0..self.nz {
                    m[y * self.nz + z] += self.get(x, y, z);
                }
            }
        }
        JointDistribution2 { nx: self.ny, ny: self.nz, m }
    }

    /// Joint of `(x, y)`.
    pub fn marginal_xy(&self) -> JointDistribution2 {
        let m = self.t.chunks(self.nz).map(|c| c.iter().sum()).collect();
        JointDistribution2 { nx: self.nx, ny: self.ny, m }
    }

    /// `p(x | z)`; zero when `p(z) = 0`.
    pub fn cond_x_given_z(&self, x: usize, z: usize) -> f64 {
        let pz: f64 = self.marginal_z().p[z];
        if pz > 0.0 {
            (0..self.ny).map(|y| self.get(x, y, z)).sum::<f64>() / pz
        } else {
            0.0
        }
    }

    /// `p(y | x, z)`; zero when `p(x, z) = 0`.
    pub fn cond_y_given_xz(&self, y: usize, x: usize, z: usize) -> f64 {
        let pxz: f64 = (0..self.ny).map(|yy| self.get(x, yy, z)).sum();
        if pxz > 0.0 {
            self.get(x, y, z) / pxz
        } else {
            0.0
        }
    }

    /// `p(y | z)`; zero when `p(z) = 0`.
    pub fn cond_y_given_z(&self, y: usize, z: usize) -> f64 {
        let pz: f64 = self.marginal_z().p[z];
        if pz > 0.0 {
            (0..self.nx).map(|x| self.get(x, y, z)).sum::<f64>() / pz
        } else {
            0.0
        }
    }
}

/// Column-stochastic transition matrix `w[j][i]`: `m` outputs (rows) by `n` inputs (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct Channel {
    m: usize,
    n: usize,
    w: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    w: Vec<Vec<f64>>,
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = Error;
    fn try_from(r: ChannelRepr) -> Result<Self> {
        Channel::from_rows(r.w)
    }
}

impl From<Channel> for ChannelRepr {
    fn from(c: Channel) -> Self {
        ChannelRepr { w: c.rows() }
    }
}

impl Channel {
    /// Rows are outputs, columns are inputs; every column must sum to 1.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let (m, n, w) = flatten_rows(rows, "channel")?;
        for i in 0..n {
            let column: Vec<f64> = (0..m).map(|j| w[j * n + i]).collect();
            validate_mass(&column, &format!("channel column {i}"))?;
        }
        Ok(Self { m, n, w })
    }

    pub fn identity(n: usize) -> Result<Self> {
        require_sizes(&[n])?;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        Ok(Self { m: n, n, w })
    }

    /// Deterministic coarse-graining: input `i` is sent to output `groups[i]`.
    pub fn partition(groups: &[usize], m: usize) -> Result<Self> {
        require_sizes(&[m, groups.len()])?;
        let n = groups.len();
        let mut w = vec![0.0; m * n];
        for (i, &g) in groups.iter().enumerate() {
            if g >= m {
                return Err(Error::Validation(format!("group index {g} out of range for {m} outputs")));
            }
            w[g * n + i] = 1.0;
        }
        Ok(Self { m, n, w })
    }

    /// Each column drawn uniformly on the simplex.
    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Self> {
        require_sizes(&[m, n])?;
        let mut w = vec![0.0; m * n];
        for i in 0..n {
            for (j, v) in simplex_point(m, rng).into_iter().enumerate() {
                w[j * n + i] = v;
            }
        }
        Ok(Self { m, n, w })
    }

    /// A random surjective partition of `n` inputs into `m <= n` groups.
    pub fn random_partition<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Self> {
        require_sizes(&[m, n])?;
        if m > n {
            return Err(Error::Param(format!("cannot partition {n} inputs into {m} non-empty groups")));
        }
        let mut groups: Vec<usize> = (0..m).chain((m..n).map(|_| rng.random_range(0..m))).collect();
        groups.shuffle(rng);
        Self::partition(&groups, m)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.w[j * self.n + i]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.w.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn apply(&self, p: &Distribution) -> Result<Distribution> {
        ensure_dims(self.n, p.len())?;
        let out = self
            .w
            .chunks(self.n)
            .map(|row| row.iter().zip(&p.p).map(|(w, x)| w * x).sum())
            .collect();
        Distribution::new(out)
    }
}

/// `make_distribution`: see [`Distribution::from_weights`].
pub fn make_distribution(weights: Vec<f64>, normalize: bool) -> Result<Distribution> {
    Distribution::from_weights(weights, normalize)
}

/// Row-sum marginal over `x` and column-sum marginal over `y`.
pub fn marginals(j: &JointDistribution2) -> (Distribution, Distribution) {
    (j.marginal_x(), j.marginal_y())
}

/// Independent joint `p(x) q(y)`.
pub fn product(p: &Distribution, q: &Distribution) -> JointDistribution2 {
    let m = p.p.iter().flat_map(|&a| q.p.iter().map(move |&b| a * b)).collect();
    JointDistribution2 { nx: p.len(), ny: q.len(), m }
}

pub fn apply_channel(w: &Channel, p: &Distribution) -> Result<Distribution> {
    w.apply(p)
}

/// `(1 - lambda) p1 + lambda p2`.
pub fn mix(p1: &Distribution, p2: &Distribution, lambda: f64) -> Result<Distribution> {
    ensure_dims(p1.len(), p2.len())?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Param(format!("mixing weight {lambda} outside [0, 1]")));
    }
    let p = p1
        .p
        .iter()
        .zip(&p2.p)
        .map(|(&a, &b)| if a == b { a } else { (1.0 - lambda) * a + lambda * b })
        .collect();
    Distribution::new(p)
}

/// Master seed for deterministic sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Distribution(usize),
    Joint2(usize, usize),
    Joint3(usize, usize, usize),
    /// `(outputs, inputs)`
    Channel(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sampled {
    Distribution(Distribution),
    Joint2(JointDistribution2),
    Joint3(JointDistribution3),
    Channel(Channel),
}

/// Draws one object of the requested kind; deterministic in `(kind, seed)`.
pub fn sample(kind: SampleKind, seed: RngSeed) -> Result<Sampled> {
    let mut rng = seed.rng();
    Ok(match kind {
        SampleKind::Distribution(n) => Sampled::Distribution(Distribution::random(n, &mut rng)?),
        SampleKind::Joint2(a, b) => Sampled::Joint2(JointDistribution2::random(a, b, &mut rng)?),
        SampleKind::Joint3(a, b, c) => Sampled::Joint3(JointDistribution3::random(a, b, c, &mut rng)?),
        SampleKind::Channel(m, n) => Sampled::Channel(Channel::random(m, n, &mut rng)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn d(p: &[f64]) -> Distribution {
        Distribution::new(p.to_vec()).unwrap()
    }

    #[test]
    fn make_distribution_examples() {
        assert_eq!(make_distribution(vec![0.5, 0.5], false).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(make_distribution(vec![2.0, 2.0], true).unwrap().probs(), &[0.5, 0.5]);
        assert!(matches!(make_distribution(vec![0.3, 0.3], false), Err(Error::Validation(_))));
        assert!(matches!(make_distribution(vec![], true), Err(Error::Validation(_))));
        assert!(matches!(make_distribution(vec![0.0, 0.0], true), Err(Error::Validation(_))));
        assert!(matches!(make_distribution(vec![1.5, -0.5], false), Err(Error::Validation(_))));
        assert!(matches!(make_distribution(vec![2.0, -1.0], true), Err(Error::Validation(_))));
    }

    #[test]
    fn sum_tolerance_is_absolute_1e9() {
        assert!(Distribution::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        assert!(Distribution::new(vec![0.5, 0.5 + 5e-9]).is_err());
    }

    #[test]
    fn marginals_examples() {
        let u = JointDistribution2::from_rows(vec![vec![0.25; 2]; 2]).unwrap();
        let (mx, my) = marginals(&u);
        assert_eq!(mx.probs(), &[0.5, 0.5]);
        assert_eq!(my.probs(), &[0.5, 0.5]);

        let j = JointDistribution2::from_rows(vec![vec![0.5, 0.25], vec![0.0, 0.25]]).unwrap();
        assert_eq!(j.marginal_x().probs(), &[0.75, 0.25]);
        assert_eq!(j.marginal_y().probs(), &[0.5, 0.5]);
    }

    #[test]
    fn product_examples() {
        let u = Distribution::uniform(2).unwrap();
        assert!(product(&u, &u).flat().iter().all(|&v| v == 0.25));
        let j = product(&d(&[1.0, 0.0]), &d(&[0.3, 0.7]));
        assert_eq!(j.rows(), vec![vec![0.3, 0.7], vec![0.0, 0.0]]);
        let j = product(&d(&[0.6, 0.4]), &d(&[0.5, 0.5]));
        assert_eq!(j.rows(), vec![vec![0.3, 0.3], vec![0.2, 0.2]]);
    }

    #[test]
    fn apply_channel_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        assert_eq!(apply_channel(&Channel::identity(3).unwrap(), &p).unwrap(), p);
        let collapse = Channel::from_rows(vec![vec![1.0, 1.0, 1.0]]).unwrap();
        assert_eq!(apply_channel(&collapse, &p).unwrap().probs(), &[1.0]);
        let w = Channel::from_rows(vec![vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap();
        let out = apply_channel(&w, &d(&[0.5, 0.5])).unwrap();
        assert_relative_eq!(out.probs()[0], 0.55, epsilon = 1e-15);
        assert_relative_eq!(out.probs()[1], 0.45, epsilon = 1e-15);
        assert!(matches!(apply_channel(&w, &p), Err(Error::Dimension { .. })));
    }

    #[test]
    fn channel_rejects_non_stochastic_columns() {
        assert!(Channel::from_rows(vec![vec![0.9, 0.2], vec![0.2, 0.8]]).is_err());
        assert!(Channel::from_rows(vec![vec![1.2, 1.0], vec![-0.2, 0.0]]).is_err());
        assert!(Channel::partition(&[0, 2], 2).is_err());
    }

    #[test]
    fn mix_examples() {
        let p = d(&[0.1, 0.9]);
        let q = d(&[0.6, 0.4]);
        assert_eq!(mix(&p, &q, 0.0).unwrap(), p);
        assert_eq!(mix(&p, &p, 0.37).unwrap().probs(), p.probs());
        let m = mix(&d(&[1.0, 0.0]), &d(&[0.0, 1.0]), 0.25).unwrap();
        assert_eq!(m.probs(), &[0.75, 0.25]);
        assert!(matches!(mix(&p, &q, 1.5), Err(Error::Param(_))));
        assert!(matches!(mix(&p, &d(&[1.0]), 0.5), Err(Error::Dimension { .. })));
    }

    #[test]
    fn sample_examples() {
        match sample(SampleKind::Distribution(1), RngSeed(99)).unwrap() {
            Sampled::Distribution(p) => assert_eq!(p.probs(), &[1.0]),
            other => panic!("unexpected {other:?}"),
        }
        let a = sample(SampleKind::Distribution(5), RngSeed(42)).unwrap();
        let b = sample(SampleKind::Distribution(5), RngSeed(42)).unwrap();
        assert_eq!(a, b);
        let Sampled::Channel(w) = sample(SampleKind::Channel(3, 4), RngSeed(7)).unwrap() else {
            panic!("expected channel")
        };
        for i in 0..4 {
            let s: f64 = (0..3).map(|j| w.get(j, i)).sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
        assert!(matches!(sample(SampleKind::Joint2(0, 3), RngSeed(1)), Err(Error::Param(_))));
    }

    #[test]
    fn zero_mass_conditioning_gives_zero_slice() {
        let j = JointDistribution2::from_rows(vec![vec![0.5, 0.5], vec![0.0, 0.0]]).unwrap();
        assert_eq!(j.conditional_y_given_x(1), vec![0.0, 0.0]);
        assert_eq!(j.conditional_y_given_x(0), vec![0.5, 0.5]);
    }

    #[test]
    fn json_shapes() {
        let p: Distribution = serde_json::from_str(r#"{"p":[0.25,0.75]}"#).unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"p":[0.25,0.75]}"#);
        let j: JointDistribution2 = serde_json::from_str(r#"{"m":[[0.5,0.25],[0,0.25]]}"#).unwrap();
        assert_eq!(j.shape(), (2, 2));
        let t: JointDistribution3 = serde_json::from_str(r#"{"t":[[[0.5],[0.5]]]}"#).unwrap();
        assert_eq!(t.shape(), (1, 2, 1));
        let w: Channel = serde_json::from_str(r#"{"w":[[0.9,0.2],[0.1,0.8]]}"#).unwrap();
        assert_eq!(w.shape(), (2, 2));
        assert!(serde_json::from_str::<Distribution>(r#"{"p":[0.3,0.3]}"#).is_err());
        assert!(serde_json::from_str::<JointDistribution2>(r#"{"m":[[0.5],[0.25,0.25]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn product_marginals_recover_factors(seed in any::<u64>(), n in 1usize..10, m in 1usize..10) {
            let mut rng = RngSeed(seed).rng();
            let p = Distribution::random(n, &mut rng).unwrap();
            let q = Distribution::random(m, &mut rng).unwrap();
            let (mx, my) = marginals(&product(&p, &q));
            for (a, b) in mx.probs().iter().zip(p.probs()) {
                prop_assert!((a - b).abs() <= 1e-15);
            }
            for (a, b) in my.probs().iter().zip(q.probs()) {
                prop_assert!((a - b).abs() <= 1e-15);
            }
        }

        #[test]
        fn constructors_revalidate(seed in any::<u64>(), a in 1usize..8, b in 1usize..8, c in 1usize..8) {
            let mut rng = RngSeed(seed).rng();
            let j3 = JointDistribution3::random(a, b, c, &mut rng).unwrap();
            prop_assert!(JointDistribution3::from_nested(j3.nested()).is_ok());
            prop_assert!(JointDistribution2::from_rows(j3.marginal_xz().rows()).is_ok());
            prop_assert!(JointDistribution2::from_rows(j3.marginal_yz().rows()).is_ok());
            prop_assert!(Distribution::new(j3.marginal_z().into_vec()).is_ok());
            let w = Channel::random(b, a, &mut rng).unwrap();
            prop_assert!(Channel::from_rows(w.rows()).is_ok());
            let part = Channel::random_partition(a.min(c), a, &mut rng).unwrap();
            prop_assert!(Channel::from_rows(part.rows()).is_ok());
        }

        #[test]
        fn channel_preserves_mass(seed in any::<u64>(), m in 1usize..12, n in 1usize..12) {
            let mut rng = RngSeed(seed).rng();
            let w = Channel::random(m, n, &mut rng).unwrap();
            let p = Distribution::random(n, &mut rng).unwrap();
            let out = apply_channel(&w, &p).unwrap();
            prop_assert!((out.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(out.probs().iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn conditional_consistency(seed in any::<u64>(), a in 1usize..6, b in 1usize..6, c in 1usize..6) {
            let mut rng = RngSeed(seed).rng();
            let j = JointDistribution3::random(a, b, c, &mut rng).unwrap();
            for z in 0..c {
                for y in 0..b {
                    let lhs: f64 = (0..a).map(|x| j.cond_x_given_z(x, z) * j.cond_y_given_xz(y, x, z)).sum();
                    prop_assert!((lhs - j.cond_y_given_z(y, z)).abs() <= 1e-12);
                }
            }
        }
    }
}
