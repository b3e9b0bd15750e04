//! Accurate binomial log-probabilities.
//!
//! Loader's saddle-point formulation (Stirling-error terms plus the deviance
//! `bd0`) keeps full relative precision for N up to ~1e7, where the naive
//! `lgamma` difference loses most of its digits to cancellation.

use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// ln(n!) for small n by direct summation.
fn ln_factorial_small(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Stirling error ln(n!) − [(n + ½) ln n − n + ln √(2π)].
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        let x = n as f64;
        return ln_factorial_small(n) - (x + 0.5) * x.ln() + x - LN_SQRT_2PI;
    }
    let x = n as f64;
    let nn = x * x;
    if n > 500 {
        (S0 - S1 / nn) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance term x ln(x/np) + np − x, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// ln[C(n, k) p^k (1−p)^(n−k)].
pub fn ln_binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    assert!(k <= n, "k > n");
    let q = 1.0 - p;
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0 {
        return n as f64 * q.ln();
    }
    if k == n {
        return n as f64 * p.ln();
    }
    let (nf, kf) = (n as f64, k as f64);
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

/// C(n, k) p^k (1−p)^(n−k).
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    ln_binomial_pmf(n, k, p).exp()
}

/// Exact binomial coefficient for small arguments (test and code-word use).
pub fn binomial_coefficient(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values_match_direct_products() {
        for n in 0..40u64 {
            for k in 0..=n {
                let direct = binomial_coefficient(n, k) * 0.3f64.powi(k as i32) * 0.7f64.powi((n - k) as i32);
                let got = binomial_pmf(n, k, 0.3);
                assert!((got - direct).abs() <= 1e-13 * direct.max(1e-300), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn mass_sums_to_one_for_large_n() {
        let n = 1u64 << 20;
        let total: f64 = (0..=n).map(|k| binomial_pmf(n, k, 0.5)).sum();
        assert!((total - 1.0).abs() < 1e-12, "total = {total}");
    }

    #[test]
    fn central_value_n100() {
        // C(100, 50) / 2^100
        let p = binomial_pmf(100, 50, 0.5);
        assert!((p - 0.079_589_237_387_178_77).abs() < 1e-15);
    }
}
