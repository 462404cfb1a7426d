//! Polynomial root finding for the approximate kernel polynomial, and
//! projection of the recovered roots to [0,1].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Leading coefficients below this fraction of the largest coefficient
/// make a polynomial ineligible for degree-k root finding. A true kernel
/// vector has a leading coordinate bounded away from zero, so a near-zero
/// leading coefficient signals k misspecification or insufficient samples
/// and must surface as an error rather than a silent degree drop.
pub const LEADING_COEFF_RATIO: f64 = 1e-10;

const MAX_ABERTH_ITERATIONS: usize = 500;

/// Real-coefficient polynomial; index j holds the coefficient of z^j.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        // Multiply (z - r) in one at a time, coefficients kept ascending.
        let mut coeffs = vec![0.0; roots.len() + 1];
        coeffs[0] = 1.0;
        let mut degree = 0;
        for &r in roots {
            degree += 1;
            for j in (0..=degree).rev() {
                let lower = if j > 0 { coeffs[j - 1] } else { 0.0 };
                coeffs[j] = lower - r * coeffs[j];
            }
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Nominal degree: one less than the coefficient count.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::ZERO, |acc, &c| acc * z + c)
    }
}

/// Multiset of k complex roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    roots: Vec<Complex64>,
}

impl RootSet {
    pub fn new(roots: Vec<Complex64>) -> Self {
        RootSet { roots }
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Largest |p(beta)| over the stored roots.
    pub fn max_residual(&self, p: &Polynomial) -> f64 {
        self.roots
            .iter()
            .map(|&z| p.eval_complex(z).norm())
            .fold(0.0, f64::max)
    }
}

/// All k complex roots of a degree-k polynomial by simultaneous
/// (Aberth-style) iteration.
///
/// The iteration runs on the monic rescaled polynomial p(c z) with
/// c = (2k-1)/(2k-2), which maps roots inside the ball B(0, c) - where
/// kernel polynomials of separated models live - into the unit ball.
/// Initial guesses sit on a circle slightly above the Cauchy root bound,
/// the sweep stops once the largest step is at most eps2 (2k-2)/(2k-1),
/// and the roots are rescaled back by c on exit. The matching distance to
/// the true roots is at most eps2 whenever they all lie in B(0, c).
pub fn find_roots(p: &Polynomial, eps2: f64) -> Result<RootSet> {
    if !eps2.is_finite() || eps2 <= 0.0 {
        return Err(Error::InvalidInput("eps2 must be positive".into()));
    }
    let c = p.coeffs();
    if c.len() < 2 {
        return Err(Error::InvalidInput(
            "constant polynomial has no roots to find".into(),
        ));
    }
    let degree = c.len() - 1;
    let coeff_scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if coeff_scale == 0.0 {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    let threshold = LEADING_COEFF_RATIO * coeff_scale;
    let leading = c[degree].abs();
    if leading < threshold {
        return Err(Error::DegreeDeficient { leading, threshold });
    }

    if degree == 1 {
        return Ok(RootSet::new(vec![Complex64::new(-c[0] / c[1], 0.0)]));
    }

    // Monic rescale: g(y) = p(c y) / (p_k c^k), roots(g) = roots(p) / c.
    let grow = (2.0 * degree as f64 - 1.0) / (2.0 * degree as f64 - 2.0);
    let mut g = vec![0.0f64; degree + 1];
    let mut power = 1.0;
    for (gj, &cj) in g.iter_mut().zip(c) {
        *gj = cj * power;
        power *= grow;
    }
    let lead = g[degree];
    for gj in &mut g {
        *gj /= lead;
    }
    let step_tol = eps2 / grow;

    // Initial guesses on a circle slightly above the Cauchy bound, with a
    // fixed angular offset so real-axis symmetry cannot trap the sweep.
    let cauchy = 1.0 + g[..degree].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let radius = 1.05 * cauchy;
    let mut z: Vec<Complex64> = (0..degree)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * (i as f64) / (degree as f64) + 0.45;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < MAX_ABERTH_ITERATIONS {
        iterations += 1;
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let (pv, dv) = eval_with_derivative(&g, z[i]);
            // Below the evaluation-noise majorant the value carries no
            // information about the remaining error; the root is as
            // converged as f64 allows, so leave it in place.
            if pv.norm() <= evaluation_noise(&g, z[i]) {
                continue;
            }
            let newton = if dv == Complex64::ZERO {
                // Stationary point: nudge off it instead of dividing by zero.
                z[i] += Complex64::new(1e-6, 1e-6);
                max_step = f64::INFINITY;
                continue;
            } else {
                pv / dv
            };
            let mut repel = Complex64::ZERO;
            for j in 0..degree {
                if j != i {
                    let mut d = z[i] - z[j];
                    if d == Complex64::ZERO {
                        d = Complex64::new(f64::EPSILON, f64::EPSILON);
                    }
                    repel += d.inv();
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repel;
            let step = if denom == Complex64::ZERO {
                newton
            } else {
                newton / denom
            };
            z[i] -= step;
            if !z[i].re.is_finite() || !z[i].im.is_finite() {
                return Err(convergence_failure(p, &z, grow, iterations));
            }
            max_step = max_step.max(step.norm());
        }
        if max_step <= step_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(convergence_failure(p, &z, grow, iterations));
    }

    Ok(RootSet::new(z.into_iter().map(|y| y * grow).collect()))
}

fn convergence_failure(
    p: &Polynomial,
    z: &[Complex64],
    grow: f64,
    iterations: usize,
) -> Error {
    let best: Vec<Complex64> = z.iter().map(|&y| y * grow).collect();
    let residual = best
        .iter()
        .map(|&b| p.eval_complex(b).norm())
        .fold(0.0, f64::max);
    Error::ConvergenceFailure {
        what: "root finding",
        iterations,
        residual,
        best: best.iter().flat_map(|b| [b.re, b.im]).collect(),
    }
}

/// Majorant of the f64 evaluation error of the polynomial at z:
/// machine epsilon times sum |c_j| |z|^j with per-term growth factors.
fn evaluation_noise(coeffs: &[f64], z: Complex64) -> f64 {
    let x = z.norm();
    let mut power = 1.0;
    let mut bound = 0.0;
    for (j, &c) in coeffs.iter().enumerate() {
        bound += (2 * j + 2) as f64 * c.abs() * power;
        power *= x;
    }
    f64::EPSILON * bound
}

fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::ZERO;
    let mut dp = Complex64::ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Maps each root to clamp(Re(beta), 0, 1) and sorts ascending.
pub fn project_roots(rs: &RootSet) -> Vec<f64> {
    let mut out: Vec<f64> = rs.roots().iter().map(|z| z.re.clamp(0.0, 1.0)).collect();
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::matching_distance;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn sorted_real_roots(rs: &RootSet) -> Vec<f64> {
        let mut v: Vec<f64> = rs.roots().iter().map(|z| z.re).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn from_roots_expands_products() {
        let p = Polynomial::from_roots(&[0.25, 0.75]);
        let expect = [0.1875, -1.0, 1.0];
        for (a, b) in p.coeffs().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let q = Polynomial::from_roots(&[0.2, 0.5, 0.8]);
        let expect = [-0.08, 0.66, -1.5, 1.0];
        for (a, b) in q.coeffs().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn finds_quadratic_roots() {
        let p = Polynomial::new(vec![0.1875, -1.0, 1.0]);
        let rs = find_roots(&p, 1e-12).unwrap();
        let r = sorted_real_roots(&rs);
        assert_abs_diff_eq!(r[0], 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(r[1], 0.75, epsilon = 1e-10);
        for z in rs.roots() {
            assert!(z.im.abs() < 1e-10);
        }
    }

    #[test]
    fn finds_double_root_within_matching_tolerance() {
        let p = Polynomial::new(vec![0.0, 0.0, 1.0]);
        let eps2 = 1e-6;
        let rs = find_roots(&p, eps2).unwrap();
        let truth = [Complex64::ZERO, Complex64::ZERO];
        let d = matching_distance(&truth, rs.roots()).unwrap();
        assert!(d <= eps2, "matching distance {d}");
    }

    #[test]
    fn finds_cubic_roots() {
        let p = Polynomial::new(vec![-0.08, 0.66, -1.5, 1.0]);
        let rs = find_roots(&p, 1e-12).unwrap();
        let r = sorted_real_roots(&rs);
        assert_abs_diff_eq!(r[0], 0.2, epsilon = 1e-9);
        assert_abs_diff_eq!(r[1], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(r[2], 0.8, epsilon = 1e-9);
    }

    #[test]
    fn rejects_degree_deficient_leading_coefficient() {
        let p = Polynomial::new(vec![1.0, 1.0, 1e-12]);
        assert!(matches!(
            find_roots(&p, 1e-8),
            Err(Error::DegreeDeficient { .. })
        ));
    }

    #[test]
    fn linear_polynomial_solved_directly() {
        let p = Polynomial::new(vec![-0.35, 1.0]);
        let rs = find_roots(&p, 1e-12).unwrap();
        assert_eq!(rs.len(), 1);
        assert_abs_diff_eq!(rs.roots()[0].re, 0.35, epsilon = 1e-15);
    }

    #[test]
    fn projection_examples() {
        let rs = RootSet::new(vec![
            Complex64::new(0.25, 0.0),
            Complex64::new(0.75, 0.0),
        ]);
        assert_eq!(project_roots(&rs), vec![0.25, 0.75]);

        let rs = RootSet::new(vec![
            Complex64::new(-0.1, 0.2),
            Complex64::new(1.3, 0.0),
        ]);
        assert_eq!(project_roots(&rs), vec![0.0, 1.0]);

        let rs = RootSet::new(vec![
            Complex64::new(0.5, 0.01),
            Complex64::new(0.2, -0.03),
        ]);
        assert_eq!(project_roots(&rs), vec![0.2, 0.5]);
    }

    #[test]
    fn residuals_certify_returned_roots() {
        let mut rng = crate::rng::seeded(83);
        for k in 1..=6 {
            for _ in 0..30 {
                let model =
                    crate::model::random_canonical_model(&mut rng, k, 0.1, 0.0).unwrap();
                let p = Polynomial::from_roots(model.alpha());
                let rs = find_roots(&p, 1e-12).unwrap();
                let scale: f64 = p.coeffs().iter().map(|c| c.abs()).sum();
                for &z in rs.roots() {
                    let allowed = 1e-8 * scale * z.norm().max(1.0).powi(k as i32);
                    let res = p.eval_complex(z).norm();
                    assert!(res <= allowed, "k={k} residual {res} allowed {allowed}");
                }
            }
        }
    }

    #[test]
    fn conjugate_closure_for_real_coefficients() {
        let mut rng = crate::rng::seeded(89);
        let eps2 = 1e-10;
        for _ in 0..50 {
            // Mix of real roots and conjugate pairs inside the unit ball.
            let a: f64 = rng.random_range(-0.6..0.6);
            let b: f64 = rng.random_range(0.1..0.6);
            let r: f64 = rng.random_range(-0.9..0.9);
            // (z - (a+bi))(z - (a-bi))(z - r)
            let quad = [a * a + b * b, -2.0 * a, 1.0];
            let coeffs = vec![
                -r * quad[0],
                quad[0] - r * quad[1],
                quad[1] - r * quad[2],
                quad[2],
            ];
            let p = Polynomial::new(coeffs);
            let rs = find_roots(&p, eps2).unwrap();
            let conjugated: Vec<Complex64> = rs.roots().iter().map(|z| z.conj()).collect();
            let d = matching_distance(rs.roots(), &conjugated).unwrap();
            assert!(d <= eps2 * 10.0, "conjugate closure violated: {d}");
        }
    }

    #[test]
    fn kernel_coefficients_bounded_by_binomials() {
        // |q_i| = |e_{k-i}(alpha)| <= C(k, i) for roots in [0,1].
        let mut rng = crate::rng::seeded(97);
        for k in 1..=8 {
            for _ in 0..20 {
                let roots: Vec<f64> = (0..k).map(|_| rng.random()).collect();
                let p = Polynomial::from_roots(&roots);
                for (i, &c) in p.coeffs().iter().enumerate() {
                    let bound = crate::binom::binomial(k, i);
                    assert!(
                        c.abs() <= bound + 1e-12,
                        "k={k} coeff {i} = {c} bound {bound}"
                    );
                }
            }
        }
    }

    #[test]
    fn root_stability_under_coefficient_perturbations() {
        // Perturbing coefficients by eps < (zeta/2)^k / (4k) moves roots
        // by at most 4 k eps / (zeta/2)^(k-1) in matching distance.
        let mut rng = crate::rng::seeded(101);
        for _ in 0..200 {
            let k = rng.random_range(2..=5usize);
            let model = crate::model::random_canonical_model(&mut rng, k, 0.2, 0.0);
            let model = match model {
                Ok(m) => m,
                Err(_) => continue,
            };
            let zeta = model.separation();
            let p = Polynomial::from_roots(model.alpha());
            let eps_cap = (zeta / 2.0).powi(k as i32) / (4.0 * k as f64);
            let target = eps_cap * rng.random_range(0.05..0.9);
            let mut coeffs = p.coeffs().to_vec();
            let mut realized = 0.0f64;
            for c in &mut coeffs {
                let delta = target * (rng.random::<f64>() * 2.0 - 1.0);
                *c += delta;
                realized = realized.max(delta.abs());
            }
            if realized == 0.0 {
                continue;
            }
            let perturbed = Polynomial::new(coeffs);
            let rs = find_roots(&perturbed, 1e-13).unwrap();
            let truth: Vec<Complex64> = model
                .alpha()
                .iter()
                .map(|&a| Complex64::new(a, 0.0))
                .collect();
            let d = matching_distance(&truth, rs.roots()).unwrap();
            let bound = 4.0 * k as f64 * realized / (zeta / 2.0).powi(k as i32 - 1);
            assert!(d <= bound, "k={k} d {d} bound {bound}");
        }
    }

    #[test]
    fn roots_invariant_under_coefficient_scaling() {
        let mut rng = crate::rng::seeded(103);
        for _ in 0..30 {
            let model = crate::model::random_canonical_model(&mut rng, 3, 0.15, 0.0).unwrap();
            let p = Polynomial::from_roots(model.alpha());
            let base = find_roots(&p, 1e-12).unwrap();
            let scale: f64 = loop {
                let s = rng.random_range(-50.0..50.0f64);
                if s.abs() > 1e-3 {
                    break s;
                }
            };
            let scaled = Polynomial::new(p.coeffs().iter().map(|c| c * scale).collect());
            let rescaled = find_roots(&scaled, 1e-12).unwrap();
            let d = matching_distance(base.roots(), rescaled.roots()).unwrap();
            assert!(d <= 1e-11, "scaling changed roots by {d}");
        }
    }
}
