//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured margins (run with `--nocapture` to see them).
//!
//! Criterion 6 carries a statistical threshold (median matching distance
//! 0.05 at s = 1e6) calibrated by the pilot run recorded in README.md.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use sparse_moments::{
    build_hankel, find_roots, learn_from_exact_moments, learn_coin_mixture,
    matching_distance, matching_distance_real, min_eigenpair, pascal_matrix,
    random_canonical_model, rectify_weights, rng, smallest_eigenvalues, wasserstein,
    LearnConfig, MixtureModel, MomentVector, Polynomial, SquareMatrix,
};

const CRIT1_SEED: u64 = 0xacce_0001;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn criterion1_instances() -> impl Iterator<Item = (usize, MixtureModel)> {
    let mut stream = rng::substream(CRIT1_SEED, &[1]);
    let ks: Vec<usize> = [2usize, 3, 4, 5]
        .into_iter()
        .flat_map(|k| std::iter::repeat_n(k, 100))
        .collect();
    ks.into_iter().map(move |k| {
        let model = random_canonical_model(&mut stream, k, 0.1, 0.1).unwrap();
        (k, model)
    })
}

fn criterion1_config(k: usize) -> LearnConfig {
    LearnConfig::new(k, 0.1, 0.1, 40.0).unwrap()
}

/// Noiseless roundtrip: 100 random canonical models per k in {2,3,4,5}
/// with separation >= 0.1 and weights >= 0.1 recover the biases within
/// 1e-8 and the weights within 1e-7, every time, in under 5 seconds.
#[test]
fn criterion_1_noiseless_roundtrip() {
    let start = Instant::now();
    let mut worst_alpha = 0.0f64;
    let mut worst_weight = 0.0f64;
    for (k, truth) in criterion1_instances() {
        let cfg = criterion1_config(k);
        let report = learn_from_exact_moments(&cfg, &truth.exact_moments(2 * k))
            .unwrap_or_else(|e| panic!("k={k} solver failed: {e}"));
        let ea = max_abs_diff(report.model.alpha(), truth.alpha());
        let ew = max_abs_diff(report.model.weights(), truth.weights());
        assert!(ea <= 1e-8, "k={k} alpha error {ea:.3e} exceeds 1e-8");
        assert!(ew <= 1e-7, "k={k} weight error {ew:.3e} exceeds 1e-7");
        worst_alpha = worst_alpha.max(ea);
        worst_weight = worst_weight.max(ew);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "noiseless roundtrip took {elapsed:?}"
    );
    println!(
        "criterion 1 (noiseless roundtrip): PASS - 400 instances, worst alpha {worst_alpha:.3e}, worst weight {worst_weight:.3e}, {elapsed:?}"
    );
}

/// lambda_2 of the exact Hankel exceeds w_min (zeta/16)^(2k-2) strictly,
/// with zero violations over 200 random models of order at most 4.
#[test]
fn criterion_2_lambda2_bound() {
    let mut stream = rng::substream(0xacce_0002, &[]);
    let mut min_ratio = f64::INFINITY;
    for trial in 0..200u64 {
        let k = 1 + (trial % 4) as usize;
        let model = random_canonical_model(&mut stream, k, 0.1, 0.05).unwrap();
        let hankel = build_hankel(&model.exact_moments(2 * k)).unwrap();
        let eigs = smallest_eigenvalues(hankel.as_matrix(), 2).unwrap();
        let zeta = model.separation().min(1.0);
        let bound = model.w_min() * (zeta / 16.0).powi(2 * k as i32 - 2);
        assert!(
            eigs[1] > bound,
            "k={k} lambda_2 {:.3e} not above bound {bound:.3e}",
            eigs[1]
        );
        min_ratio = min_ratio.min(eigs[1] / bound);
    }
    println!(
        "criterion 2 (lambda_2 bound): PASS - 200 models, min lambda_2/bound ratio {min_ratio:.3e}"
    );
}

/// Power-iteration estimate of the Pascal transform norm lies in
/// [1, 6^k] for k = 1..10.
#[test]
fn criterion_3_pascal_norm() {
    let mut margins = Vec::new();
    for k in 1..=10usize {
        let norm = pascal_matrix(k).unwrap().spectral_norm_estimate();
        let upper = 6.0f64.powi(k as i32);
        assert!(norm >= 1.0, "k={k} norm {norm} below 1");
        assert!(norm <= upper, "k={k} norm {norm} above 6^k = {upper}");
        margins.push(norm / upper);
    }
    println!(
        "criterion 3 (Pascal norm): PASS - k=1..10, largest norm/6^k ratio {:.3e}",
        margins.iter().copied().fold(0.0f64, f64::max)
    );
}

/// Weight rectification: over 1000 random (w, w') pairs with sum(w') = 1,
/// the output is on the simplex to 1e-12 and moves no coordinate more
/// than (k+1) times the initial error. Zero violations.
#[test]
fn criterion_4_rectify_weights_contract() {
    let mut stream = rng::substream(0xacce_0004, &[]);
    for trial in 0..1000usize {
        let k = 1 + (trial % 8);
        let e: Vec<f64> = (0..k)
            .map(|_| -(1.0 - stream.random::<f64>()).ln())
            .collect();
        let total: f64 = e.iter().sum();
        let w: Vec<f64> = e.iter().map(|v| v / total).collect();
        let raw: Vec<f64> = (0..k).map(|_| stream.random::<f64>() - 0.5).collect();
        let mean = raw.iter().sum::<f64>() / k as f64;
        let t: f64 = stream.random_range(0.0..1.5);
        let wprime: Vec<f64> = w
            .iter()
            .zip(&raw)
            .map(|(wi, ri)| wi + t * (ri - mean))
            .collect();
        let out = rectify_weights(&wprime).unwrap();
        assert!(out.iter().all(|&v| v >= 0.0), "negative output weight");
        assert!(
            (out.iter().sum::<f64>() - 1.0).abs() <= 1e-12,
            "output off the simplex"
        );
        let bound = (k as f64 + 1.0) * max_abs_diff(&wprime, &w);
        assert!(
            max_abs_diff(&out, &w) <= bound + 1e-12,
            "k={k} error {:.3e} above (k+1) bound {bound:.3e}",
            max_abs_diff(&out, &w)
        );
    }
    println!("criterion 4 (rectify contract): PASS - 1000 pairs, zero violations");
}

/// Root stability: perturbing the coefficients of a separated monic
/// polynomial by eps < (zeta/2)^k / 4k moves the roots by at most
/// 4 k eps / (zeta/2)^(k-1) in matching distance. 500 instances, k <= 5,
/// zeta >= 0.2, zero violations.
#[test]
fn criterion_5_root_stability() {
    let mut stream = rng::substream(0xacce_0005, &[]);
    let mut done = 0usize;
    while done < 500 {
        let k = stream.random_range(2..=5usize);
        if (k - 1) as f64 * 0.2 > 1.0 {
            continue;
        }
        let model = random_canonical_model(&mut stream, k, 0.2, 0.0).unwrap();
        let zeta = model.separation();
        let p = Polynomial::from_roots(model.alpha());
        let eps_cap = (zeta / 2.0).powi(k as i32) / (4.0 * k as f64);
        let target = eps_cap * stream.random_range(0.05..0.9);
        let mut coeffs = p.coeffs().to_vec();
        let mut realized = 0.0f64;
        for c in &mut coeffs {
            let delta = target * (stream.random::<f64>() * 2.0 - 1.0);
            *c += delta;
            realized = realized.max(delta.abs());
        }
        if realized == 0.0 {
            continue;
        }
        let rs = find_roots(&Polynomial::new(coeffs), 1e-13).unwrap();
        let truth: Vec<Complex64> = model
            .alpha()
            .iter()
            .map(|&a| Complex64::new(a, 0.0))
            .collect();
        let d = matching_distance(&truth, rs.roots()).unwrap();
        let bound = 4.0 * k as f64 * realized / (zeta / 2.0).powi(k as i32 - 1);
        assert!(
            d <= bound,
            "k={k} matching distance {d:.3e} above bound {bound:.3e}"
        );
        done += 1;
    }
    println!("criterion 5 (root stability): PASS - 500 instances, zero violations");
}

/// Sample-size scaling on the fixed reference model (0.2, 0.5, 0.8) with
/// uniform weights: over 50 trials per sample size, the median matching
/// distance strictly decreases across s = 1e4, 1e5, 1e6 and is at most
/// 0.05 at s = 1e6 (threshold from the pilot run recorded in README.md).
#[test]
fn criterion_6_noisy_convergence() {
    let third = 1.0 / 3.0;
    let truth = MixtureModel::new(vec![0.2, 0.5, 0.8], vec![third, third, third]).unwrap();
    let cfg = LearnConfig::new(3, 0.3, third, 20.0).unwrap();
    let mut medians = Vec::new();
    for (si, &s) in [10_000u64, 100_000, 1_000_000].iter().enumerate() {
        let mut dists: Vec<f64> = (0..50u64)
            .map(|trial| {
                let mut stream = rng::substream(0xacce_0006, &[si as u64, trial]);
                let hist = truth.sample_histogram_with(&mut stream, 6, s).unwrap();
                match learn_coin_mixture(&cfg, &hist) {
                    Ok(report) => {
                        matching_distance_real(truth.alpha(), report.model.alpha()).unwrap()
                    }
                    // a failed identification counts as maximal error
                    Err(_) => 1.0,
                }
            })
            .collect();
        dists.sort_by(f64::total_cmp);
        let median = 0.5 * (dists[24] + dists[25]);
        medians.push(median);
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "medians not strictly decreasing: {medians:?}"
    );
    assert!(
        medians[2] <= 0.05,
        "median at s = 1e6 is {:.4}, above 0.05",
        medians[2]
    );
    println!(
        "criterion 6 (noisy convergence): PASS - medians {:.4} / {:.4} / {:.4} at s = 1e4/1e5/1e6",
        medians[0], medians[1], medians[2]
    );
}

/// Kernel stability: perturbing the exact Hankel by a Hankel-structured
/// matrix of 2-norm eps = w_min (zeta/16)^2k u, u in {0.1, 1}, moves the
/// sign-aligned minimal eigenvector by at most
/// sqrt(2(k+1)) (16/zeta)^2k eps / w_min. 200 models, k <= 4, zeta >= 0.2.
#[test]
fn criterion_7_kernel_stability() {
    let mut stream = rng::substream(0xacce_0007, &[]);
    for trial in 0..200u64 {
        let k = 2 + (trial % 3) as usize;
        let model = random_canonical_model(&mut stream, k, 0.2, 0.05).unwrap();
        let zeta = model.separation().min(1.0);
        let w_min = model.w_min();
        let hankel = build_hankel(&model.exact_moments(2 * k)).unwrap();

        let kernel = Polynomial::from_roots(model.alpha());
        let norm: f64 = kernel.coeffs().iter().map(|c| c * c).sum::<f64>().sqrt();
        let u1: Vec<f64> = kernel.coeffs().iter().map(|c| c / norm).collect();

        for u in [0.1, 1.0] {
            let eps = w_min * (zeta / 16.0).powi(2 * k as i32) * u;
            // Hankel-structured direction, rescaled to 2-norm exactly eps.
            let d: Vec<f64> = (0..=2 * k).map(|_| stream.random::<f64>() - 0.5).collect();
            let mut direction = SquareMatrix::zeros(k + 1);
            for i in 0..=k {
                for j in 0..=k {
                    direction.set(i, j, d[i + j]);
                }
            }
            let dir_norm = direction.spectral_norm_estimate(300);
            let mut perturbed = SquareMatrix::zeros(k + 1);
            for i in 0..=k {
                for j in 0..=k {
                    perturbed.set(
                        i,
                        j,
                        hankel.entry(i, j) + direction.get(i, j) * eps / dir_norm,
                    );
                }
            }
            let pair = min_eigenpair(&perturbed, 1e-12).unwrap();
            let dot: f64 = u1.iter().zip(&pair.vector).map(|(a, b)| a * b).sum();
            let sign = if dot >= 0.0 { 1.0 } else { -1.0 };
            let diff: f64 = u1
                .iter()
                .zip(&pair.vector)
                .map(|(a, b)| (a - sign * b).powi(2))
                .sum::<f64>()
                .sqrt();
            let bound =
                (2.0 * (k as f64 + 1.0)).sqrt() * (16.0 / zeta).powi(2 * k as i32) * eps / w_min;
            assert!(
                diff <= bound,
                "k={k} u={u} eigenvector drift {diff:.3e} above bound {bound:.3e}"
            );
        }
    }
    println!("criterion 7 (kernel stability): PASS - 200 models x 2 scales, zero violations");
}

/// Post-sampling runtime scaling: median pipeline time over 20 runs at
/// k in {4, 8, 16, 32} fits time ~ k^e with e <= 3.5 (the dense-solver
/// cost class; the structured near-quadratic variant is out of scope),
/// and k = 32 completes in under 100 ms.
#[test]
fn criterion_8_runtime_scaling() {
    let orders = [4usize, 8, 16, 32];
    let mut medians_ns = Vec::new();
    let mut statuses = Vec::new();
    for &k in &orders {
        let cfg = LearnConfig::new(k, 0.5 / k as f64, 1.0 / (3.0 * k as f64), 20.0).unwrap();
        let mut times: Vec<u128> = Vec::new();
        let mut ok_count = 0usize;
        for run in 0..20u64 {
            let mut stream = rng::substream(0xacce_0008, &[k as u64, run]);
            // jittered equispaced biases and near-uniform weights keep the
            // instance generator O(k) at orders where rejection sampling
            // cannot terminate
            let alpha: Vec<f64> = (0..k)
                .map(|i| {
                    (i as f64 + 0.5) / k as f64
                        + (stream.random::<f64>() - 0.5) * 0.4 / k as f64
                })
                .collect();
            let raw: Vec<f64> = (0..k).map(|_| 1.0 + 0.5 * stream.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let truth = MixtureModel::new(alpha, w).unwrap();
            // a whiff of noise keeps every stage of the pipeline engaged,
            // as with sampled data
            let mut mu = truth.exact_moments(2 * k).values().to_vec();
            for v in mu.iter_mut().skip(1) {
                *v += 1e-8 * (stream.random::<f64>() - 0.5);
            }
            let mu = MomentVector::new(mu).unwrap();
            let begin = Instant::now();
            let outcome = learn_from_exact_moments(&cfg, &mu);
            times.push(begin.elapsed().as_nanos());
            if outcome.is_ok() {
                ok_count += 1;
            }
        }
        times.sort_unstable();
        medians_ns.push(0.5 * (times[9] as f64 + times[10] as f64));
        statuses.push(ok_count);
    }

    // least-squares slope of ln(time) against ln(k)
    let xs: Vec<f64> = orders.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = medians_ns.iter().map(|&t| t.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm).powi(2)).sum::<f64>();

    let k32_ms = medians_ns[3] / 1e6;
    assert!(slope <= 3.5, "runtime exponent {slope:.2} above 3.5");
    assert!(k32_ms < 100.0, "k=32 median {k32_ms:.2} ms above 100 ms");
    println!(
        "criterion 8 (runtime scaling): PASS - medians {:?} us at k={orders:?}, exponent {slope:.2}, k=32 {k32_ms:.3} ms (ok runs per order: {statuses:?})",
        medians_ns.iter().map(|t| (t / 1e3).round()).collect::<Vec<_>>()
    );
}

/// Wasserstein consequence: on every criterion-1 instance, the distance
/// between truth and the learned model is at most
/// (k+1) max(alpha error, weight error) + 1e-12.
#[test]
fn criterion_9_wasserstein_bound() {
    let mut worst_slack = f64::NEG_INFINITY;
    for (k, truth) in criterion1_instances() {
        let cfg = criterion1_config(k);
        let report = learn_from_exact_moments(&cfg, &truth.exact_moments(2 * k))
            .unwrap_or_else(|e| panic!("k={k} solver failed: {e}"));
        let err = max_abs_diff(report.model.alpha(), truth.alpha())
            .max(max_abs_diff(report.model.weights(), truth.weights()));
        let w = wasserstein(&truth, &report.model);
        let bound = (k as f64 + 1.0) * err + 1e-12;
        assert!(
            w <= bound,
            "k={k} wasserstein {w:.3e} above bound {bound:.3e}"
        );
        worst_slack = worst_slack.max(w - bound);
    }
    println!(
        "criterion 9 (wasserstein bound): PASS - 400 instances, worst slack {worst_slack:.3e}"
    );
}
