//! Domain types: mixture models, snapshot histograms, moment vectors,
//! and the exact/sampled observables derived from a model.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::binom::binomial_row;
use crate::error::{Error, Result};
use crate::rng;

/// Tolerance on the weight-sum invariant of a valid model.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Tolerance on the leading entry of an empirical moment vector.
const MOMENT_ZERO_TOL: f64 = 1e-9;

/// A k-coin model: a mixture of k Bernoulli variables with biases
/// `alpha` and mixing weights `w`. Held in canonical form: biases sorted
/// ascending, coinciding biases merged (their weights summed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct MixtureModel {
    alpha: Vec<f64>,
    w: Vec<f64>,
}

/// On-disk representation: `{"k": int, "alpha": [...], "w": [...]}`.
#[derive(Serialize, Deserialize)]
struct ModelRepr {
    k: usize,
    alpha: Vec<f64>,
    w: Vec<f64>,
}

impl TryFrom<ModelRepr> for MixtureModel {
    type Error = Error;

    fn try_from(repr: ModelRepr) -> Result<Self> {
        if repr.k != repr.alpha.len() {
            return Err(Error::InvalidModel(format!(
                "k = {} does not match {} biases",
                repr.k,
                repr.alpha.len()
            )));
        }
        MixtureModel::new(repr.alpha, repr.w)
    }
}

impl From<MixtureModel> for ModelRepr {
    fn from(model: MixtureModel) -> Self {
        ModelRepr {
            k: model.k(),
            alpha: model.alpha,
            w: model.w,
        }
    }
}

impl MixtureModel {
    /// Builds a model in canonical form. Biases must lie in [0,1], weights
    /// must be non-negative and sum to 1 within 1e-12. Entries with exactly
    /// equal biases are merged, so the canonical support has no repeats.
    pub fn new(alpha: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidModel("model needs at least one coin".into()));
        }
        if alpha.len() != w.len() {
            return Err(Error::InvalidModel(format!(
                "{} biases but {} weights",
                alpha.len(),
                w.len()
            )));
        }
        for &a in &alpha {
            if !a.is_finite() || !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidModel(format!("bias {a} outside [0,1]")));
            }
        }
        for &wi in &w {
            if !wi.is_finite() || wi < 0.0 {
                return Err(Error::InvalidModel(format!("negative weight {wi}")));
            }
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidModel(format!(
                "weights sum to {sum}, not 1"
            )));
        }

        let mut pairs: Vec<(f64, f64)> = alpha.into_iter().zip(w).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut alpha = Vec::with_capacity(pairs.len());
        let mut w = Vec::with_capacity(pairs.len());
        for (a, wi) in pairs {
            match alpha.last() {
                Some(&last) if last == a => {
                    *w.last_mut().expect("non-empty") += wi;
                }
                _ => {
                    alpha.push(a);
                    w.push(wi);
                }
            }
        }
        Ok(MixtureModel { alpha, w })
    }

    /// Number of distinct coins.
    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    /// Coin biases, sorted ascending.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Mixing weights, aligned with `alpha`.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Smallest mixing weight.
    pub fn w_min(&self) -> f64 {
        self.w.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Minimum pairwise gap between biases; +inf for a single coin, so the
    /// tolerance formulas that divide by it stay evaluable.
    pub fn separation(&self) -> f64 {
        if self.k() < 2 {
            return f64::INFINITY;
        }
        self.alpha
            .windows(2)
            .map(|p| p[1] - p[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Exact standard moments (mu_0, ..., mu_n) with mu_i = sum_j w_j a_j^i.
    pub fn exact_moments(&self, n: usize) -> MomentVector {
        let mut mu = vec![0.0; n + 1];
        mu[0] = 1.0;
        let mut pow: Vec<f64> = vec![1.0; self.k()];
        for mi in mu.iter_mut().skip(1) {
            for (p, (&a, &wi)) in pow.iter_mut().zip(self.alpha.iter().zip(&self.w)) {
                *p *= a;
                *mi += wi * *p;
            }
        }
        MomentVector { mu }
    }

    /// Expected snapshot frequencies E[h_j] for m-snapshots: the weighted
    /// average of the Binomial(m, a_j) mass functions. Entries sum to 1.
    pub fn exact_histogram(&self, m: usize) -> Result<ExpectedHistogram> {
        if m == 0 {
            return Err(Error::InvalidInput("snapshot length must be >= 1".into()));
        }
        let binom = binomial_row(m);
        let mut freqs = vec![0.0; m + 1];
        for (&a, &wi) in self.alpha.iter().zip(&self.w) {
            for (j, f) in freqs.iter_mut().enumerate() {
                *f += wi * binom[j] * a.powi(j as i32) * (1.0 - a).powi((m - j) as i32);
            }
        }
        Ok(ExpectedHistogram { m, freqs })
    }

    /// Draws `s` independent m-snapshots with a dedicated seeded stream:
    /// each snapshot picks coin j with probability w_j and counts the heads
    /// of Binomial(m, a_j). Deterministic given the seed.
    pub fn sample_histogram(&self, m: usize, s: u64, seed: u64) -> Result<Histogram> {
        self.sample_histogram_with(&mut rng::seeded(seed), m, s)
    }

    /// Same as [`sample_histogram`](Self::sample_histogram) but drawing from
    /// a caller-owned stream, for substream-per-trial harnesses.
    pub fn sample_histogram_with<R: Rng>(&self, rng: &mut R, m: usize, s: u64) -> Result<Histogram> {
        if m == 0 {
            return Err(Error::InvalidInput("snapshot length must be >= 1".into()));
        }
        if s == 0 {
            return Err(Error::InvalidInput("sample size must be >= 1".into()));
        }
        let mut cumulative = Vec::with_capacity(self.k());
        let mut acc = 0.0;
        for &wi in &self.w {
            acc += wi;
            cumulative.push(acc);
        }
        let coins: Vec<CoinSampler> = self
            .alpha
            .iter()
            .map(|&a| CoinSampler::new(m as u64, a))
            .collect();

        let mut counts = vec![0u64; m + 1];
        for _ in 0..s {
            let u: f64 = rng.random();
            let j = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(self.k() - 1);
            let heads = coins[j].draw(rng);
            counts[heads as usize] += 1;
        }
        Ok(Histogram { m, counts })
    }
}

enum CoinSampler {
    AlwaysTails,
    AlwaysHeads(u64),
    Binomial(Binomial),
}

impl CoinSampler {
    fn new(m: u64, p: f64) -> Self {
        if p <= 0.0 {
            CoinSampler::AlwaysTails
        } else if p >= 1.0 {
            CoinSampler::AlwaysHeads(m)
        } else {
            CoinSampler::Binomial(Binomial::new(m, p).expect("bias validated in [0,1]"))
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> u64 {
        match self {
            CoinSampler::AlwaysTails => 0,
            CoinSampler::AlwaysHeads(m) => *m,
            CoinSampler::Binomial(b) => b.sample(rng),
        }
    }
}

/// Counts of "j heads out of m" over s snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HistogramRepr", into = "HistogramRepr")]
pub struct Histogram {
    m: usize,
    counts: Vec<u64>,
}

/// On-disk representation: `{"m": int, "s": int, "counts": [...]}`.
#[derive(Serialize, Deserialize)]
struct HistogramRepr {
    m: usize,
    s: u64,
    counts: Vec<u64>,
}

impl TryFrom<HistogramRepr> for Histogram {
    type Error = Error;

    fn try_from(repr: HistogramRepr) -> Result<Self> {
        let h = Histogram::new(repr.m, repr.counts)?;
        if h.sample_count() != repr.s {
            return Err(Error::InvalidHistogram(format!(
                "declared s = {} but counts sum to {}",
                repr.s,
                h.sample_count()
            )));
        }
        Ok(h)
    }
}

impl From<Histogram> for HistogramRepr {
    fn from(h: Histogram) -> Self {
        HistogramRepr {
            m: h.m,
            s: h.sample_count(),
            counts: h.counts,
        }
    }
}

impl Histogram {
    pub fn new(m: usize, counts: Vec<u64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidHistogram("snapshot length must be >= 1".into()));
        }
        if counts.len() != m + 1 {
            return Err(Error::SizeMismatch {
                expected: m + 1,
                actual: counts.len(),
            });
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::InvalidHistogram("histogram holds no samples".into()));
        }
        Ok(Histogram { m, counts })
    }

    /// Snapshot length m.
    pub fn snapshot_len(&self) -> usize {
        self.m
    }

    /// Total number of snapshots s.
    pub fn sample_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Relative frequencies h_j = counts_j / s.
    pub fn normalized(&self) -> Vec<f64> {
        let s = self.sample_count() as f64;
        self.counts.iter().map(|&c| c as f64 / s).collect()
    }
}

/// Noiseless counterpart of a histogram: the expected frequencies E[h].
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedHistogram {
    m: usize,
    freqs: Vec<f64>,
}

impl ExpectedHistogram {
    pub fn snapshot_len(&self) -> usize {
        self.m
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }
}

/// Standard moments (mu_0, ..., mu_n), exact or empirical. Serialized as a
/// bare JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MomentVector {
    mu: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MomentVector {
    type Error = Error;

    fn try_from(mu: Vec<f64>) -> Result<Self> {
        MomentVector::new(mu)
    }
}

impl From<MomentVector> for Vec<f64> {
    fn from(v: MomentVector) -> Self {
        v.mu
    }
}

impl MomentVector {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidInput("moment vector is empty".into()));
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite moment".into()));
        }
        if (mu[0] - 1.0).abs() > MOMENT_ZERO_TOL {
            return Err(Error::InvalidInput(format!(
                "zeroth moment {} is not 1",
                mu[0]
            )));
        }
        Ok(MomentVector { mu })
    }

    /// Highest moment index n (the vector holds n + 1 entries).
    pub fn order(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.mu
    }
}

/// Draws a canonical model whose separation is at least `zeta` and
/// whose weights are at least `w_min`, by rejection: biases uniform on
/// [0,1]^k until separated, weights uniform on the simplex until
/// bounded below.
pub fn random_canonical_model<R: Rng>(
    rng: &mut R,
    k: usize,
    zeta: f64,
    w_min: f64,
) -> Result<MixtureModel> {
    const MAX_ATTEMPTS: usize = 1_000_000;
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if k >= 2 && zeta * (k - 1) as f64 > 1.0 {
        return Err(Error::InvalidInput(format!(
            "separation {zeta} infeasible for k = {k}"
        )));
    }
    if w_min * k as f64 > 1.0 {
        return Err(Error::InvalidInput(format!(
            "minimum weight {w_min} infeasible for k = {k}"
        )));
    }

    let alpha = 'alpha: {
        for _ in 0..MAX_ATTEMPTS {
            let mut a: Vec<f64> = (0..k).map(|_| rng.random()).collect();
            a.sort_by(f64::total_cmp);
            let ok = k < 2 || a.windows(2).all(|p| p[1] - p[0] >= zeta);
            if ok {
                break 'alpha a;
            }
        }
        return Err(Error::InvalidInput(
            "rejection sampling budget exhausted for biases".into(),
        ));
    };
    let w = 'w: {
        for _ in 0..MAX_ATTEMPTS {
            // Normalized Exp(1) draws are uniform on the simplex.
            let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = e.iter().sum();
            let w: Vec<f64> = e.iter().map(|v| v / total).collect();
            if w.iter().all(|&v| v >= w_min) {
                break 'w w;
            }
        }
        return Err(Error::InvalidInput(
            "rejection sampling budget exhausted for weights".into(),
        ));
    };
    MixtureModel::new(alpha, w)
}
