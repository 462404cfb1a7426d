//! End-to-end identification: histogram (or moments) in, model out.
//!
//! The pipeline is the root-then-weights method: Pascal transform,
//! Hankel assembly, minimal-eigenvector extraction, root finding on the
//! associated polynomial, projection to [0,1], a square Vandermonde
//! solve for the weights, and simplex rectification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenpair, solve_vandermonde};
use crate::model::{Histogram, MixtureModel, MomentVector};
use crate::moments::{build_hankel, pascal_matrix, plan_sample_size};
use crate::roots::{find_roots, project_roots, Polynomial};

/// Default floor for the derived tolerances. The theoretical schedules
/// underflow f64 for moderate k, so they are clamped here (and the clamp
/// is flagged in the diagnostics).
pub const DEFAULT_FP_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Tolerance on the weight-sum precondition of [`rectify_weights`].
const RECTIFY_SUM_TOL: f64 = 1e-9;

/// Learning parameters: model order k, lower bounds zeta (separation)
/// and w_min (weights), accuracy exponent gamma (target error 2^-gamma),
/// and failure probability delta for sample planning. The solver
/// tolerances eps1 (eigenvector) and eps2 (roots) are derived from these
/// unless overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    k: usize,
    zeta: f64,
    w_min: f64,
    gamma: f64,
    delta: f64,
    fp_floor: f64,
    eps1_override: Option<f64>,
    eps2_override: Option<f64>,
}

impl LearnConfig {
    /// Validates and builds a configuration with delta = 0.01 and the
    /// default tolerance floor.
    pub fn new(k: usize, zeta: f64, w_min: f64, gamma: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("k must be >= 1".into()));
        }
        if !zeta.is_finite() || zeta <= 0.0 || zeta > 1.0 {
            return Err(Error::InvalidInput(format!(
                "separation bound {zeta} outside (0, 1]"
            )));
        }
        if k >= 2 && zeta > 1.0 / (k as f64 - 1.0) {
            return Err(Error::InvalidInput(format!(
                "separation bound {zeta} exceeds 1/(k-1) for k = {k}"
            )));
        }
        if !w_min.is_finite() || w_min <= 0.0 || w_min > 1.0 / k as f64 {
            return Err(Error::InvalidInput(format!(
                "weight bound {w_min} outside (0, 1/k] for k = {k}"
            )));
        }
        if !gamma.is_finite() || gamma < 1.0 {
            return Err(Error::InvalidInput(format!("gamma {gamma} must be >= 1")));
        }
        Ok(LearnConfig {
            k,
            zeta,
            w_min,
            gamma,
            delta: 0.01,
            fp_floor: DEFAULT_FP_FLOOR,
            eps1_override: None,
            eps2_override: None,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
            return Err(Error::InvalidInput(format!("delta {delta} outside (0,1)")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_fp_floor(mut self, floor: f64) -> Result<Self> {
        if !floor.is_finite() || floor <= 0.0 {
            return Err(Error::InvalidInput("tolerance floor must be positive".into()));
        }
        self.fp_floor = floor;
        Ok(self)
    }

    pub fn with_eps1(mut self, eps1: f64) -> Result<Self> {
        if !eps1.is_finite() || eps1 <= 0.0 {
            return Err(Error::InvalidInput("eps1 must be positive".into()));
        }
        self.eps1_override = Some(eps1);
        Ok(self)
    }

    pub fn with_eps2(mut self, eps2: f64) -> Result<Self> {
        if !eps2.is_finite() || eps2 <= 0.0 {
            return Err(Error::InvalidInput("eps2 must be positive".into()));
        }
        self.eps2_override = Some(eps2);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn w_min(&self) -> f64 {
        self.w_min
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn fp_floor(&self) -> f64 {
        self.fp_floor
    }

    fn eps1_raw(&self) -> f64 {
        self.w_min * (-self.gamma).exp2() * (self.zeta / 16.0).powi(2 * self.k as i32)
    }

    fn eps2_raw(&self) -> f64 {
        (-self.gamma).exp2() * (self.zeta / 2.0).powi(self.k as i32) / (6.0 * self.k as f64)
    }

    /// Eigenvector tolerance w_min 2^-gamma (zeta/16)^2k, floored.
    pub fn eps1(&self) -> f64 {
        self.eps1_override
            .unwrap_or_else(|| self.eps1_raw().max(self.fp_floor))
    }

    /// Root tolerance (1/6k) 2^-gamma (zeta/2)^k, floored.
    pub fn eps2(&self) -> f64 {
        self.eps2_override
            .unwrap_or_else(|| self.eps2_raw().max(self.fp_floor))
    }

    /// True when a derived tolerance was clamped up to the floor.
    pub fn tolerance_clamped(&self) -> bool {
        (self.eps1_override.is_none() && self.eps1_raw() < self.fp_floor)
            || (self.eps2_override.is_none() && self.eps2_raw() < self.fp_floor)
    }

    /// Snapshot count that makes the whole accuracy schedule go through
    /// with probability >= 1 - delta: the empirical Hankel must land
    /// within w_min 2^-gamma (zeta/16)^4k of the truth in the 2-norm,
    /// so the moments must be within 1/(k+1) of that in the inf-norm.
    pub fn planned_sample_size(&self) -> Result<u64> {
        let hankel_accuracy =
            self.w_min * (-self.gamma).exp2() * (self.zeta / 16.0).powi(4 * self.k as i32);
        let moment_accuracy = hankel_accuracy / (self.k as f64 + 1.0);
        if moment_accuracy <= 0.0 {
            return Err(Error::InfeasibleSampleSize {
                cap: crate::moments::MAX_PLANNED_SAMPLES,
            });
        }
        plan_sample_size(self.k, moment_accuracy, self.delta)
    }
}

/// Zeroes negative entries of a sum-1 weight vector and rescales the
/// positive ones by 1 + W-/W+, landing exactly on the simplex while
/// moving each coordinate at most (k+1) times the initial error. Linear
/// time.
pub fn rectify_weights(wprime: &[f64]) -> Result<Vec<f64>> {
    if wprime.is_empty() {
        return Err(Error::InvalidInput("empty weight vector".into()));
    }
    let sum: f64 = wprime.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > RECTIFY_SUM_TOL {
        return Err(Error::InvalidInput(format!(
            "weights sum to {sum}, expected 1"
        )));
    }
    let negative_mass: f64 = wprime.iter().filter(|&&w| w < 0.0).sum();
    let positive_mass: f64 = wprime.iter().filter(|&&w| w >= 0.0).sum();
    if positive_mass <= 0.0 {
        return Err(Error::InvalidInput(
            "no positive mass to rescale".into(),
        ));
    }
    if negative_mass == 0.0 {
        return Ok(wprime.to_vec());
    }
    let factor = 1.0 + negative_mass / positive_mass;
    Ok(wprime
        .iter()
        .map(|&w| if w < 0.0 { 0.0 } else { w * factor })
        .collect())
}

/// Numeric diagnostics carried alongside a learned model. All entries
/// are floats; `tolerance_clamped` is 1.0 when a derived tolerance hit
/// the floating-point floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub lambda_min: f64,
    pub eigen_residual: f64,
    pub root_residual_max: f64,
    pub vandermonde_residual: f64,
    pub rectified_mass: f64,
    pub tolerance_clamped: f64,
}

/// A learned model plus the solver diagnostics that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub model: MixtureModel,
    pub diagnostics: Diagnostics,
}

/// Runs the full pipeline on a histogram of 2k-snapshots.
pub fn learn_coin_mixture(cfg: &LearnConfig, hist: &Histogram) -> Result<LearnReport> {
    learn_from_frequencies(cfg, hist.snapshot_len(), &hist.normalized())
}

/// Runs the full pipeline on normalized snapshot frequencies (length
/// m + 1, m = 2k). Noiseless expected histograms enter here.
pub fn learn_from_frequencies(cfg: &LearnConfig, m: usize, freqs: &[f64]) -> Result<LearnReport> {
    if !m.is_multiple_of(2) || m != 2 * cfg.k() {
        return Err(Error::InvalidInput(format!(
            "snapshot length {m} does not match 2k = {}",
            2 * cfg.k()
        )));
    }
    let pas = pascal_matrix(cfg.k())?;
    let mu = pas.apply_frequencies(freqs)?;
    run_moment_pipeline(cfg, &mu)
}

/// Runs the pipeline from exact (or externally estimated) moments
/// (mu_0, ..., mu_2k), bypassing the sampling and Pascal stages.
pub fn learn_from_exact_moments(cfg: &LearnConfig, mu: &MomentVector) -> Result<LearnReport> {
    if mu.order() != 2 * cfg.k() {
        return Err(Error::SizeMismatch {
            expected: 2 * cfg.k() + 1,
            actual: mu.order() + 1,
        });
    }
    run_moment_pipeline(cfg, mu)
}

fn run_moment_pipeline(cfg: &LearnConfig, mu: &MomentVector) -> Result<LearnReport> {
    let k = cfg.k();
    let hankel = build_hankel(mu).map_err(|e| e.in_stage("hankel"))?;

    let eig = min_eigenpair(hankel.as_matrix(), cfg.eps1())
        .map_err(|e| e.in_stage("eigenvector"))?;
    let eigen_residual = eig.residual(hankel.as_matrix());

    let kernel_poly = Polynomial::new(eig.vector.clone());
    let roots = find_roots(&kernel_poly, cfg.eps2()).map_err(|e| e.in_stage("roots"))?;
    let root_residual_max = roots.max_residual(&kernel_poly);

    let alpha = project_roots(&roots);
    let rhs = &mu.values()[..k];
    let solution = solve_vandermonde(&alpha, rhs).map_err(|e| e.in_stage("weights"))?;
    let rectified =
        rectify_weights(&solution.weights).map_err(|e| e.in_stage("rectification"))?;
    let rectified_mass: f64 = rectified
        .iter()
        .zip(&solution.weights)
        .map(|(a, b)| (a - b).abs())
        .sum();

    let model = MixtureModel::new(alpha, rectified).map_err(|e| e.in_stage("model"))?;
    Ok(LearnReport {
        model,
        diagnostics: Diagnostics {
            lambda_min: eig.lambda,
            eigen_residual,
            root_residual_max,
            vandermonde_residual: solution.residual_inf,
            rectified_mass,
            tolerance_clamped: if cfg.tolerance_clamped() { 1.0 } else { 0.0 },
        },
    })
}
