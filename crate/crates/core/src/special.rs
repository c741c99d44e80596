//! Special functions: log-gamma, regularized incomplete gamma and beta,
//! chi-square and F tails, and Poisson tail probabilities.

use libm::{exp, fabs, log};

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Lanczos coefficients (g = 7, n = 9).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = core::f64::consts::PI;
        return log(pi / fabs(libm::sin(pi * x))) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + k as f64);
    }
    0.5 * log(2.0 * core::f64::consts::PI) + (x + 0.5) * log(t) - t + log(a)
}

/// `ln k!`, exact table for small `k`.
pub fn ln_factorial(k: u64) -> f64 {
    const TABLE_LEN: usize = 32;
    static TABLE: [f64; TABLE_LEN] = {
        let mut t = [0.0; TABLE_LEN];
        let mut k = 2;
        let mut f = 1.0f64;
        while k < TABLE_LEN {
            f *= k as f64;
            t[k] = f;
            k += 1;
        }
        t[0] = 1.0;
        t[1] = 1.0;
        t
    };
    if (k as usize) < TABLE_LEN {
        log(TABLE[k as usize])
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// `(P(a, x), Q(a, x))`, the regularized lower and upper incomplete gamma
/// functions, for `a > 0`, `x ≥ 0`.
pub fn gamma_pq(a: f64, x: f64) -> (f64, f64) {
    assert!(a > 0.0 && x >= 0.0, "gamma_pq: need a > 0 and x >= 0 (a={a}, x={x})");
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if x.is_infinite() {
        return (1.0, 0.0);
    }
    let ln_pre = -x + a * log(x) - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut term = 1.0 / a;
        let mut sum = term;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if fabs(term) < fabs(sum) * EPS {
                break;
            }
        }
        let p = (exp(ln_pre) * sum).min(1.0);
        (p, 1.0 - p)
    } else {
        // modified Lentz on the Legendre continued fraction for Q
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if fabs(d) < TINY {
                d = TINY;
            }
            c = b + an / c;
            if fabs(c) < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if fabs(delta - 1.0) < EPS {
                break;
            }
        }
        let q = (exp(ln_pre) * h).min(1.0);
        (1.0 - q, q)
    }
}

pub fn gamma_p(a: f64, x: f64) -> f64 {
    gamma_pq(a, x).0
}

pub fn gamma_q(a: f64, x: f64) -> f64 {
    gamma_pq(a, x).1
}

/// Upper tail `P(χ²_df > x)`.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_p(df / 2.0, x / 2.0)
}

/// Inverse of [`chi2_cdf`] by bracketing and bisection.
pub fn chi2_quantile(prob: f64, df: f64) -> f64 {
    assert!((0.0..1.0).contains(&prob) && df > 0.0, "chi2_quantile: need prob in [0,1) and df > 0");
    if prob == 0.0 {
        return 0.0;
    }
    let mut hi = df.max(1.0);
    while chi2_cdf(hi, df) < prob {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(mid, df) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta_inc: need a, b > 0");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * log(x) + b * libm::log1p(-x);
    if x < (a + 1.0) / (a + b + 2.0) {
        exp(ln_front) * beta_cf(a, b, x) / a
    } else {
        1.0 - exp(ln_front) * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if fabs(delta - 1.0) < EPS {
            break;
        }
    }
    h
}

/// CDF of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_cdf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    beta_inc(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if fabs(self.sum) >= fabs(v) {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `(P(N < c), P(N ≥ c))` for `N ~ Poisson(mean)`.
///
/// Terms follow `t_{k+1} = t_k · mean/(k+1)` from a log-space start, so there
/// are no factorials and no underflow of `e^{-mean}` for large means. The
/// smaller of the two tails is summed directly and the other is its
/// complement.
pub fn poisson_tails(mean: f64, c: u64) -> (f64, f64) {
    assert!(mean >= 0.0, "poisson_tails: negative mean {mean}");
    if c == 0 {
        return (0.0, 1.0);
    }
    if mean == 0.0 {
        return (1.0, 0.0);
    }
    let ln_mean = log(mean);
    let ln_term = |k: u64| -mean + k as f64 * ln_mean - ln_factorial(k);

    if (c as f64) <= mean {
        // lower tail k = 0..c-1 is the smaller one; sum downward from c-1
        let mut t = exp(ln_term(c - 1));
        let mut lower = CompensatedSum::default();
        let mut k = c - 1;
        loop {
            lower.add(t);
            if k == 0 || t < lower.value() * 1e-18 {
                break;
            }
            t *= k as f64 / mean;
            k -= 1;
        }
        let lower = lower.value().min(1.0);
        (lower, 1.0 - lower)
    } else {
        // upper tail k ≥ c; terms decrease since c > mean
        let mut t = exp(ln_term(c));
        let mut upper = CompensatedSum::default();
        let mut k = c;
        for _ in 0..MAX_ITER * 10 {
            upper.add(t);
            k += 1;
            t *= mean / k as f64;
            if t < upper.value() * 1e-18 || t == 0.0 {
                break;
            }
        }
        let upper = upper.value().min(1.0);
        (1.0 - upper, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        fabs(a - b) <= tol * (1.0 + fabs(b))
    }

    #[test]
    fn ln_gamma_integers() {
        let mut f = 1.0f64;
        for n in 1..30u64 {
            f *= n as f64;
            assert!(close(ln_gamma(n as f64 + 1.0), log(f), 1e-13), "n={n}");
            assert!(close(ln_factorial(n), log(f), 1e-15));
        }
        assert!(close(ln_gamma(0.5), 0.5 * log(core::f64::consts::PI), 1e-14));
    }

    #[test]
    fn gamma_p_exponential() {
        for &x in &[0.01, 0.5, 1.0, 2.5, 10.0, 50.0] {
            assert!(close(gamma_p(1.0, x), 1.0 - exp(-x), 1e-14), "x={x}");
        }
    }

    #[test]
    fn chi2_reference_points() {
        assert!(fabs(chi2_sf(3.841_458_820_694_124, 1.0) - 0.05) < 1e-12);
        assert!(fabs(chi2_sf(7.814_727_903_251_178, 3.0) - 0.05) < 1e-12);
        assert_eq!(chi2_sf(0.0, 3.0), 1.0);
        assert!(fabs(chi2_quantile(0.95, 1.0) - 3.841_458_820_694_124) < 1e-10);
        assert!(fabs(chi2_quantile(0.95, 3.0) - 7.814_727_903_251_178) < 1e-10);
    }

    #[test]
    fn f_symmetry() {
        // F(d,d): P(X ≤ 1) = 1/2 and P(X ≤ x) = 1 − P(X ≤ 1/x)
        for &d in &[2.0, 20.0, 2000.0] {
            assert!(fabs(f_cdf(1.0, d, d) - 0.5) < 1e-12);
            assert!(fabs(f_cdf(1.3, d, d) + f_cdf(1.0 / 1.3, d, d) - 1.0) < 1e-12);
        }
    }

    #[test]
    fn poisson_tails_match_series() {
        let e = exp(-1.0);
        assert!(fabs(poisson_tails(1.0, 1).1 - (1.0 - e)) < 1e-15);
        assert!(fabs(poisson_tails(1.0, 2).1 - (1.0 - 2.0 * e)) < 1e-15);
        for &(mean, c) in &[(0.3, 1u64), (3.0, 2), (5.0, 5), (30.0, 12), (900.0, 880), (900.0, 950)] {
            let (lo, hi) = poisson_tails(mean, c);
            assert!(fabs(lo + hi - 1.0) < 1e-15);
            // regularized gamma duality: P(N ≥ c) = P(c, mean)
            assert!(close(hi, gamma_p(c as f64, mean), 1e-11), "mean={mean} c={c}: {hi}");
        }
    }

    #[test]
    fn poisson_tail_is_tiny_not_zero() {
        let (_, hi) = poisson_tails(0.01, 5);
        assert!(hi > 0.0 && hi < 1e-11);
    }
}
