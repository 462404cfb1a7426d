//! Evaluation metrics: optimal matching distance between same-size
//! multisets and the exact 1-Wasserstein distance between models.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::MixtureModel;

/// Optimal matching distance d(a, b) = min over permutations of the max
/// coordinate-wise gap. Exact for all sizes: the optimum is one of the
/// pairwise distances, found by binary search over them with a bipartite
/// perfect-matching feasibility test at each threshold.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    matching_core(a, b).map(|(d, _)| d)
}

/// [`matching_distance`] over real multisets.
pub fn matching_distance_real(a: &[f64], b: &[f64]) -> Result<f64> {
    let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let bc: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    matching_distance(&ac, &bc)
}

/// Matching distance together with an optimal assignment: `perm[i]` is the
/// index in `b` matched to `a[i]`.
pub fn matching_permutation(a: &[f64], b: &[f64]) -> Result<(f64, Vec<usize>)> {
    let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let bc: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    matching_core(&ac, &bc)
}

fn matching_core(a: &[Complex64], b: &[Complex64]) -> Result<(f64, Vec<usize>)> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len();
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }

    let dist: Vec<Vec<f64>> = a
        .iter()
        .map(|&x| b.iter().map(|&y| (x - y).norm()).collect())
        .collect();
    let mut thresholds: Vec<f64> = dist.iter().flatten().copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    // Smallest pairwise distance admitting a perfect matching. The full
    // bipartite graph (largest threshold) always has one.
    let mut lo = 0usize;
    let mut hi = thresholds.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&dist, thresholds[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = thresholds[lo];
    let match_b = perfect_matching(&dist, t).expect("feasible at optimum");
    let mut perm = vec![0usize; n];
    for (bj, ai) in match_b.iter().enumerate() {
        perm[ai.expect("perfect matching")] = bj;
    }
    Ok((t, perm))
}

/// Kuhn's augmenting-path matching on edges with dist <= threshold.
/// Returns, per b-node, the matched a-node.
fn perfect_matching(dist: &[Vec<f64>], threshold: f64) -> Option<Vec<Option<usize>>> {
    let n = dist.len();
    let mut match_b: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let mut visited = vec![false; n];
        if !augment(i, dist, threshold, &mut visited, &mut match_b) {
            return None;
        }
    }
    Some(match_b)
}

fn augment(
    i: usize,
    dist: &[Vec<f64>],
    threshold: f64,
    visited: &mut [bool],
    match_b: &mut [Option<usize>],
) -> bool {
    for j in 0..dist.len() {
        if dist[i][j] <= threshold && !visited[j] {
            visited[j] = true;
            if match_b[j].is_none()
                || augment(match_b[j].unwrap(), dist, threshold, visited, match_b)
            {
                match_b[j] = Some(i);
                return true;
            }
        }
    }
    false
}

/// Exact 1-Wasserstein distance between two models on [0,1], computed as
/// the integral of |CDF_A - CDF_B| over the merged atom breakpoints. The
/// supports may have different sizes.
pub fn wasserstein(a: &MixtureModel, b: &MixtureModel) -> f64 {
    let mut events: Vec<(f64, f64, f64)> = a
        .alpha()
        .iter()
        .zip(a.weights())
        .map(|(&x, &w)| (x, w, 0.0))
        .chain(
            b.alpha()
                .iter()
                .zip(b.weights())
                .map(|(&x, &w)| (x, 0.0, w)),
        )
        .collect();
    events.sort_by(|p, q| p.0.total_cmp(&q.0));

    let mut total = 0.0;
    let mut fa = 0.0;
    let mut fb = 0.0;
    for pair in events.windows(2) {
        fa += pair[0].1;
        fb += pair[0].2;
        total += (fa - fb).abs() * (pair[1].0 - pair[0].0);
    }
    total
}
