//! Binomial coefficient tables.
//!
//! Rows come from the multiplicative recurrence
//! C(n, i) = C(n, i-1) (n - i + 1) / i, which is exact in f64 while the
//! intermediate product stays below 2^53 - covering n = 2k through
//! k ~ 25; past that the entries round to nearest, which is harmless
//! for the norm-bounded transforms built on top. The `exact-binomials`
//! feature accumulates an additive Pascal triangle in u128 instead,
//! exact through n = 127 with a single rounding at the f64 conversion.

#[cfg(not(feature = "exact-binomials"))]
pub(crate) fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    row.push(1.0f64);
    for i in 1..=n {
        let prev = row[i - 1];
        row.push(prev * (n - i + 1) as f64 / i as f64);
    }
    row
}

#[cfg(feature = "exact-binomials")]
pub(crate) fn binomial_row(n: usize) -> Vec<f64> {
    assert!(n < 128, "u128 binomial table overflows past n = 127");
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for m in 1..=n {
        for j in (1..=m).rev() {
            row[j] += row[j - 1];
        }
    }
    row.into_iter().map(|v| v as f64).collect()
}

/// C(n, k) as f64. Test oracle; library code works row-wise.
#[cfg(test)]
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    binomial_row(n)[k]
}
