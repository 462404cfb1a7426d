//! Histogram-to-moment conversion via the Pascal transform, Hankel
//! matrix construction, and sample-size planning.

use crate::binom::binomial_row;
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::model::{Histogram, MomentVector};

/// Planned sample sizes beyond this are reported as infeasible (2^53,
/// the last exactly representable integer span in f64).
pub const MAX_PLANNED_SAMPLES: u64 = 1 << 53;

/// Upper-triangular (2k+1) x (2k+1) transform taking the normalized
/// heads-count histogram of 2k-snapshots to standard moments:
/// entry (i, j) = C(j, i) / C(2k, i) for j >= i (zero-indexed).
#[derive(Debug, Clone, PartialEq)]
pub struct PascalMatrix {
    k: usize,
    mat: SquareMatrix,
}

/// Builds the Pascal transform for model order k >= 1.
pub fn pascal_matrix(k: usize) -> Result<PascalMatrix> {
    if k == 0 {
        return Err(Error::InvalidInput("model order k must be >= 1".into()));
    }
    let n = 2 * k;
    // Binomial rows 0..=2k; row j holds C(j, 0..=j).
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for j in 0..=n {
        rows.push(binomial_row(j));
    }
    let mut mat = SquareMatrix::zeros(n + 1);
    for i in 0..=n {
        let denom = rows[n][i];
        for j in i..=n {
            mat.set(i, j, rows[j][i] / denom);
        }
    }
    Ok(PascalMatrix { k, mat })
}

impl PascalMatrix {
    /// Model order k; the matrix is (2k+1) x (2k+1).
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.mat
    }

    /// Applies the transform to normalized snapshot frequencies. The input
    /// is re-normalized defensively, and the zeroth output is pinned to 1
    /// (row 0 is all ones, so it maps a normalized histogram to exactly 1).
    pub fn apply_frequencies(&self, freqs: &[f64]) -> Result<MomentVector> {
        let n = 2 * self.k + 1;
        if freqs.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: freqs.len(),
            });
        }
        let total: f64 = freqs.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::InvalidHistogram(format!(
                "frequencies sum to {total}"
            )));
        }
        let h: Vec<f64> = freqs.iter().map(|&f| f / total).collect();
        let mut mu = self.mat.mul_vec(&h);
        mu[0] = 1.0;
        MomentVector::new(mu)
    }

    /// Power-iteration estimate of the operator 2-norm.
    pub fn spectral_norm_estimate(&self) -> f64 {
        self.mat.spectral_norm_estimate(300)
    }
}

/// Converts a histogram of 2k-snapshots to empirical moments
/// (mu_0, ..., mu_2k). The snapshot length must be even; k is m / 2.
pub fn histogram_to_moments(h: &Histogram) -> Result<MomentVector> {
    let m = h.snapshot_len();
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "snapshot length {m} is odd; moments need m = 2k"
        )));
    }
    pascal_matrix(m / 2)?.apply_frequencies(&h.normalized())
}

/// Symmetric (k+1) x (k+1) moment matrix with entry (i, j) = mu_{i+j}.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    k: usize,
    mat: SquareMatrix,
}

/// Assembles the Hankel matrix from a moment vector of odd length 2k+1.
pub fn build_hankel(mu: &MomentVector) -> Result<HankelMatrix> {
    let order = mu.order();
    if order == 0 || !order.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "need moments 0..=2k for some k >= 1, got order {order}"
        )));
    }
    let k = order / 2;
    let values = mu.values();
    let mut mat = SquareMatrix::zeros(k + 1);
    for i in 0..=k {
        for j in 0..=k {
            mat.set(i, j, values[i + j]);
        }
    }
    Ok(HankelMatrix { k, mat })
}

impl HankelMatrix {
    /// Model order k; the matrix is (k+1) x (k+1).
    pub fn order(&self) -> usize {
        self.k
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.mat
    }

    /// Diagnostic rank indicator: the determinant vanishes exactly when
    /// the moments come from a distribution with at most k atoms.
    pub fn determinant(&self) -> f64 {
        self.mat.determinant()
    }
}

/// Snapshots needed so the empirical moments land within `eps` of the
/// truth (inf-norm) with probability at least 1 - delta:
/// s = ceil(ln(4k / delta) / (2 t^2)) with t = eps / (6^k sqrt(2k + 1)),
/// chaining the histogram concentration bound through the Pascal norm
/// ||Pas||_2 <= 6^k.
pub fn plan_sample_size(k: usize, eps: f64, delta: f64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidInput("model order k must be >= 1".into()));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidInput(format!("eps {eps} must be positive")));
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidInput(format!("delta {delta} outside (0,1)")));
    }
    let amplification = 6.0f64.powi(k as i32) * ((2 * k + 1) as f64).sqrt();
    let t = eps / amplification;
    let raw = ((4.0 * k as f64 / delta).ln() / (2.0 * t * t)).ceil();
    if !raw.is_finite() || raw > MAX_PLANNED_SAMPLES as f64 {
        return Err(Error::InfeasibleSampleSize {
            cap: MAX_PLANNED_SAMPLES,
        });
    }
    Ok(raw.max(1.0) as u64)
}
