//! Dense symmetric eigenpair extraction and Vandermonde system solving.
//!
//! The eigensolver is deliberately dense O(n^3): Householder reduction to
//! tridiagonal form, Sturm-sequence bisection for the smallest eigenvalues,
//! and shifted inverse power iteration for the eigenvector. At the orders
//! this crate targets (n = k + 1 with k at most a few dozen) this is far
//! below a millisecond, and what downstream code depends on is only the
//! accuracy contract: the returned vector is within `eps1` of the true
//! minimal eigenvector whenever the eigengap exceeds 2 * eps1.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Asymmetry beyond this is rejected rather than silently symmetrized.
const SYMMETRY_TOL: f64 = 1e-10;

/// Default threshold under which Vandermonde nodes count as coinciding.
pub const DEFAULT_NODE_GAP: f64 = 1e-12;

const MAX_INVERSE_ITERATIONS: usize = 60;
const MAX_RESTARTS: usize = 3;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = SquareMatrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    fn mul_vec_transposed(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let xi = x[i];
            let row = &self.data[i * n..(i + 1) * n];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a * xi;
            }
        }
        y
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Power-iteration estimate of the operator 2-norm (largest singular
    /// value), iterating on A^T A from the all-ones direction.
    pub fn spectral_norm_estimate(&self, iterations: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let mut v = vec![1.0 / (self.n as f64).sqrt(); self.n];
        let mut sigma = 0.0;
        for _ in 0..iterations {
            let av = self.mul_vec(&v);
            let mut w = self.mul_vec_transposed(&av);
            let norm = vec_norm(&w);
            if norm == 0.0 {
                return 0.0;
            }
            for x in &mut w {
                *x /= norm;
            }
            v = w;
            sigma = vec_norm(&self.mul_vec(&v));
        }
        sigma
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for c in 0..n {
            let mut pivot_row = c;
            let mut pivot_abs = a[c * n + c].abs();
            for r in (c + 1)..n {
                let v = a[r * n + c].abs();
                if v > pivot_abs {
                    pivot_abs = v;
                    pivot_row = r;
                }
            }
            if pivot_abs == 0.0 {
                return 0.0;
            }
            if pivot_row != c {
                for j in 0..n {
                    a.swap(c * n + j, pivot_row * n + j);
                }
                det = -det;
            }
            let pivot = a[c * n + c];
            det *= pivot;
            for r in (c + 1)..n {
                let factor = a[r * n + c] / pivot;
                for j in c..n {
                    a[r * n + j] -= factor * a[c * n + j];
                }
            }
        }
        det
    }

    fn symmetrized(&self) -> SquareMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let avg = 0.5 * (self.get(i, j) + self.get(j, i));
                out.set(i, j, avg);
                out.set(j, i, avg);
            }
        }
        out
    }
}

/// Approximate eigenpair: eigenvalue estimate and a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub vector: Vec<f64>,
}

impl EigenPair {
    /// 2-norm of H v - lambda v.
    pub fn residual(&self, h: &SquareMatrix) -> f64 {
        let hv = h.mul_vec(&self.vector);
        hv.iter()
            .zip(&self.vector)
            .map(|(a, v)| (a - self.lambda * v).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Smallest eigenpair of a symmetric matrix.
///
/// Householder tridiagonalization, bisection for the two smallest
/// eigenvalues (iterated to relative width eps1^2, floored at machine
/// precision), then inverse power iteration with a deterministic random
/// start. Iteration stops once the residual certifies, via the computed
/// eigengap, that the angle to the true eigenvector is below eps1; the
/// guarantee ||v - v1|| <= eps1 holds whenever the eigengap exceeds
/// 2 * eps1. The sign is fixed so the first nonzero coordinate from the
/// top is positive. An eigengap fused at working precision is reported
/// as a convergence failure carrying the best iterate, since any vector
/// in the near-kernel plane would be an arbitrary answer.
pub fn min_eigenpair(h: &SquareMatrix, eps1: f64) -> Result<EigenPair> {
    min_eigenpair_with_iteration_cap(h, eps1, MAX_INVERSE_ITERATIONS)
}

/// [`min_eigenpair`] with an explicit inverse-iteration budget per restart.
pub fn min_eigenpair_with_iteration_cap(
    h: &SquareMatrix,
    eps1: f64,
    max_iterations: usize,
) -> Result<EigenPair> {
    if !eps1.is_finite() || eps1 <= 0.0 {
        return Err(Error::InvalidInput("eps1 must be positive".into()));
    }
    let asymmetry = h.max_asymmetry();
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NonSymmetric { asymmetry });
    }
    let n = h.size();
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if n == 1 {
        return Ok(EigenPair {
            lambda: h.get(0, 0),
            vector: vec![1.0],
        });
    }

    let a = h.symmetrized();
    let (d, e) = householder_tridiagonalize(&a);
    let (lo, hi) = gershgorin_interval(&d, &e);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let width = (eps1 * eps1 * scale).max(4.0 * f64::EPSILON * scale);
    let lam1 = bisect_kth_eigenvalue(&d, &e, 1, lo, hi, width);
    let lam2 = bisect_kth_eigenvalue(&d, &e, 2, lo, hi, width);
    let gap = (lam2 - lam1).max(0.0);

    // Residual threshold certifying sin(theta) <= eps1 / 2, floored at
    // what f64 arithmetic can deliver at this matrix scale.
    let fro = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let noise_floor = 64.0 * f64::EPSILON * fro;
    let accept = (0.5 * eps1 * gap).max(noise_floor);

    let mut stream = rng::substream(0x5ee1_7a11, &[n as u64]);
    let mut best: Option<(f64, EigenPair)> = None;
    let mut total_iterations = 0usize;
    for _ in 0..MAX_RESTARTS {
        let start = random_unit_vector(&mut stream, n);
        let (pair, residual, iters) =
            inverse_iteration(&a, lam1, start, accept, max_iterations);
        total_iterations += iters;
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, pair));
        }
        if residual <= accept {
            break;
        }
    }

    let (residual, mut pair) = best.expect("at least one restart ran");
    // Two smallest eigenvalues fused at working precision: the minimal
    // eigendirection is not resolvable in f64, so hand back the best
    // iterate as a failure rather than an arbitrary in-plane vector.
    if gap <= noise_floor {
        return Err(Error::ConvergenceFailure {
            what: "eigengap resolution",
            iterations: total_iterations,
            residual: gap,
            best: pair.vector,
        });
    }
    if residual > accept {
        return Err(Error::ConvergenceFailure {
            what: "inverse power iteration",
            iterations: total_iterations,
            residual,
            best: pair.vector,
        });
    }
    fix_sign(&mut pair.vector);
    pair.lambda = rayleigh_quotient(&a, &pair.vector);
    Ok(pair)
}

/// The `count` smallest eigenvalues of a symmetric matrix, by bisection
/// iterated to machine precision.
pub fn smallest_eigenvalues(h: &SquareMatrix, count: usize) -> Result<Vec<f64>> {
    let asymmetry = h.max_asymmetry();
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NonSymmetric { asymmetry });
    }
    let n = h.size();
    if count > n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: count,
        });
    }
    if n == 1 {
        return Ok(vec![h.get(0, 0)]);
    }
    let a = h.symmetrized();
    let (d, e) = householder_tridiagonalize(&a);
    let (lo, hi) = gershgorin_interval(&d, &e);
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let width = 2.0 * f64::EPSILON * scale;
    Ok((1..=count)
        .map(|k| bisect_kth_eigenvalue(&d, &e, k, lo, hi, width))
        .collect())
}

fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        // Box-Muller pairs give a spherically symmetric direction.
        let mut v: Vec<f64> = Vec::with_capacity(n);
        while v.len() < n {
            let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.random();
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
            v.push(r * c);
            if v.len() < n {
                v.push(r * s);
            }
        }
        let norm = vec_norm(&v);
        if norm > 1e-8 {
            for x in &mut v {
                *x /= norm;
            }
            return v;
        }
    }
}

fn inverse_iteration(
    a: &SquareMatrix,
    shift: f64,
    start: Vec<f64>,
    accept: f64,
    max_iterations: usize,
) -> (EigenPair, f64, usize) {
    let n = a.size();
    let mut shifted = a.clone();
    for i in 0..n {
        shifted.set(i, i, shifted.get(i, i) - shift);
    }
    // The shifted matrix is near-singular by design; tiny pivots are
    // replaced instead of failing, the standard inverse-iteration device.
    let pivot_floor = f64::EPSILON * a.frobenius_norm().max(f64::MIN_POSITIVE);
    let lu = LuFactors::factor(shifted, pivot_floor);

    let mut v = start;
    let mut best_vec = v.clone();
    let mut best_lambda = rayleigh_quotient(a, &v);
    let mut best_residual = residual_norm(a, &v, best_lambda);
    let mut prev_residual = f64::INFINITY;
    let mut stalled = 0usize;
    let mut iterations = 0usize;

    for _ in 0..max_iterations {
        iterations += 1;
        let mut x = lu.solve(&v);
        let norm = vec_norm(&x);
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        for xi in &mut x {
            *xi /= norm;
        }
        v = x;
        let lambda = rayleigh_quotient(a, &v);
        let residual = residual_norm(a, &v, lambda);
        if residual < best_residual {
            best_residual = residual;
            best_lambda = lambda;
            best_vec = v.clone();
        }
        if residual <= accept {
            break;
        }
        // No meaningful contraction for two sweeps: the iteration has hit
        // its floating-point floor for this start vector.
        if residual >= 0.5 * prev_residual {
            stalled += 1;
            if stalled >= 2 {
                break;
            }
        } else {
            stalled = 0;
        }
        prev_residual = residual;
    }

    (
        EigenPair {
            lambda: best_lambda,
            vector: best_vec,
        },
        best_residual,
        iterations,
    )
}

fn rayleigh_quotient(a: &SquareMatrix, v: &[f64]) -> f64 {
    let av = a.mul_vec(v);
    av.iter().zip(v).map(|(x, y)| x * y).sum()
}

fn residual_norm(a: &SquareMatrix, v: &[f64], lambda: f64) -> f64 {
    let av = a.mul_vec(v);
    av.iter()
        .zip(v)
        .map(|(x, y)| (x - lambda * y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn fix_sign(v: &mut [f64]) {
    for &x in v.iter() {
        if x.abs() > 1e-12 {
            if x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// returning the diagonal `d` and subdiagonal `e` (e[i] couples i and
/// i + 1). The orthogonal factor is not accumulated; the eigenvector is
/// recovered later by inverse iteration on the original matrix.
fn householder_tridiagonalize(m: &SquareMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.size();
    let mut a = m.clone();
    for c in 0..n.saturating_sub(2) {
        let col: Vec<f64> = ((c + 1)..n).map(|i| a.get(i, c)).collect();
        let norm = vec_norm(&col);
        if norm == 0.0 {
            continue;
        }
        let alpha = if col[0] >= 0.0 { -norm } else { norm };
        // u = x - alpha e1 over rows c+1..n
        let mut u = col;
        u[0] -= alpha;
        let u_norm2: f64 = u.iter().map(|x| x * x).sum();
        if u_norm2 == 0.0 {
            continue;
        }
        // p = 2 A u / u'u restricted to the trailing block
        let len = n - c - 1;
        let mut p = vec![0.0; len];
        for i in 0..len {
            let mut acc = 0.0;
            for j in 0..len {
                acc += a.get(c + 1 + i, c + 1 + j) * u[j];
            }
            p[i] = 2.0 * acc / u_norm2;
        }
        let kappa: f64 = u.iter().zip(&p).map(|(x, y)| x * y).sum::<f64>() / u_norm2;
        let q: Vec<f64> = p.iter().zip(&u).map(|(pi, ui)| pi - kappa * ui).collect();
        // trailing block: A <- A - u q' - q u'
        for i in 0..len {
            for j in 0..len {
                let v = a.get(c + 1 + i, c + 1 + j) - u[i] * q[j] - q[i] * u[j];
                a.set(c + 1 + i, c + 1 + j, v);
            }
        }
        // column c collapses to (alpha, 0, ..., 0)
        a.set(c + 1, c, alpha);
        a.set(c, c + 1, alpha);
        for i in (c + 2)..n {
            a.set(i, c, 0.0);
            a.set(c, i, 0.0);
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let e: Vec<f64> = (0..n - 1).map(|i| a.get(i + 1, i)).collect();
    (d, e)
}

fn gershgorin_interval(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius = 0.0;
        if i > 0 {
            radius += e[i - 1].abs();
        }
        if i < n - 1 {
            radius += e[i].abs();
        }
        lo = lo.min(d[i] - radius);
        hi = hi.max(d[i] + radius);
    }
    let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    (lo - pad, hi + pad)
}

/// Number of eigenvalues of the tridiagonal (d, e) strictly below x,
/// via the LDL' Sturm sequence with protected pivots.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let max_e2 = e.iter().map(|v| v * v).fold(0.0f64, f64::max);
    let pivmin = (f64::EPSILON * f64::EPSILON * max_e2).max(f64::MIN_POSITIVE);
    let mut count = 0usize;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        if q.abs() <= pivmin {
            q = -pivmin;
        }
        q = (d[i] - x) - e[i - 1] * e[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th smallest eigenvalue (1-indexed) of the tridiagonal (d, e).
fn bisect_kth_eigenvalue(d: &[f64], e: &[f64], k: usize, lo: f64, hi: f64, width: f64) -> f64 {
    let mut lo = lo;
    let mut hi = hi;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU factorization with partial pivoting; pivots smaller than
/// `pivot_floor` in magnitude are replaced by `pivot_floor` (keeping
/// sign), so a singular shift stays solvable.
struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl LuFactors {
    fn factor(m: SquareMatrix, pivot_floor: f64) -> LuFactors {
        let n = m.size();
        let mut lu = m.data;
        let mut piv: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let mut pivot_row = c;
            let mut pivot_abs = lu[c * n + c].abs();
            for r in (c + 1)..n {
                let v = lu[r * n + c].abs();
                if v > pivot_abs {
                    pivot_abs = v;
                    pivot_row = r;
                }
            }
            if pivot_row != c {
                for j in 0..n {
                    lu.swap(c * n + j, pivot_row * n + j);
                }
                piv.swap(c, pivot_row);
            }
            if lu[c * n + c].abs() < pivot_floor {
                let sign = if lu[c * n + c] < 0.0 { -1.0 } else { 1.0 };
                lu[c * n + c] = sign * pivot_floor;
            }
            let pivot = lu[c * n + c];
            for r in (c + 1)..n {
                let factor = lu[r * n + c] / pivot;
                lu[r * n + c] = factor;
                for j in (c + 1)..n {
                    lu[r * n + j] -= factor * lu[c * n + j];
                }
            }
        }
        LuFactors { n, lu, piv }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// Solution of a primal Vandermonde system V w = rhs with
/// V[i][j] = nodes[j]^i, plus the achieved inf-norm residual.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeSolution {
    pub weights: Vec<f64>,
    pub residual_inf: f64,
}

/// Solves V w = rhs by the O(k^2) divided-difference (Newton-basis)
/// primal scheme, rejecting node pairs closer than [`DEFAULT_NODE_GAP`].
pub fn solve_vandermonde(nodes: &[f64], rhs: &[f64]) -> Result<VandermondeSolution> {
    solve_vandermonde_with_gap(nodes, rhs, DEFAULT_NODE_GAP)
}

/// [`solve_vandermonde`] with an explicit node-degeneracy threshold.
pub fn solve_vandermonde_with_gap(
    nodes: &[f64],
    rhs: &[f64],
    min_gap: f64,
) -> Result<VandermondeSolution> {
    let n = nodes.len();
    if rhs.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty Vandermonde system".into()));
    }
    check_node_gaps(nodes, min_gap)?;

    let mut b = rhs.to_vec();
    for c in 0..n.saturating_sub(1) {
        for i in ((c + 1)..n).rev() {
            b[i] -= nodes[c] * b[i - 1];
        }
    }
    for c in (0..n.saturating_sub(1)).rev() {
        for i in (c + 1)..n {
            b[i] /= nodes[i] - nodes[i - c - 1];
        }
        for i in c..(n - 1) {
            b[i] -= b[i + 1];
        }
    }

    let mut residual_inf = 0.0f64;
    let mut pow = vec![1.0; n];
    for (i, &target) in rhs.iter().enumerate() {
        if i > 0 {
            for (p, &node) in pow.iter_mut().zip(nodes) {
                *p *= node;
            }
        }
        let row: f64 = pow.iter().zip(&b).map(|(p, w)| p * w).sum();
        residual_inf = residual_inf.max((row - target).abs());
    }
    Ok(VandermondeSolution {
        weights: b,
        residual_inf,
    })
}

/// Exact inf-operator norm of the inverse of the square Vandermonde
/// matrix on non-negative nodes:
/// |q(-1)| / min_i {(1 + a_i) |q'(a_i)|} for q(z) = prod (z - a_i).
/// Serves as a conditioning diagnostic ahead of [`solve_vandermonde`].
pub fn vandermonde_inverse_inf_norm(nodes: &[f64]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::InvalidInput("empty node set".into()));
    }
    if nodes.iter().any(|&a| !a.is_finite() || a < 0.0) {
        return Err(Error::InvalidInput("nodes must be non-negative".into()));
    }
    check_node_gaps(nodes, DEFAULT_NODE_GAP)?;

    let q_at_minus_one: f64 = nodes.iter().map(|&a| (-1.0 - a).abs()).product();
    let mut denom = f64::INFINITY;
    for (i, &ai) in nodes.iter().enumerate() {
        let mut dq = 1.0;
        for (j, &aj) in nodes.iter().enumerate() {
            if j != i {
                dq *= ai - aj;
            }
        }
        denom = denom.min((1.0 + ai) * dq.abs());
    }
    Ok(q_at_minus_one / denom)
}

fn check_node_gaps(nodes: &[f64], min_gap: f64) -> Result<()> {
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let gap = (nodes[i] - nodes[j]).abs();
            if gap < min_gap {
                return Err(Error::DegenerateNodes {
                    min_gap: gap,
                    threshold: min_gap,
                });
            }
        }
    }
    Ok(())
}
