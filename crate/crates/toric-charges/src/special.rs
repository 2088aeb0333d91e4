//! Transcendental backend: log-gamma, digamma, polygamma and integer zeta
//! values on the positive real axis.
//!
//! One consistent backend keeps a single precision story for the whole crate:
//! every Gamma-series term is first reduced symbolically so that only real
//! arguments in (0, 1] (shifted by the recurrence) ever reach these routines.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Lanczos approximation, g = 7, 9 terms. Good to ~15 significant digits for
// x > 0.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of Gamma(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    if x < 0.5 {
        // Reflection keeps the Lanczos series in its sweet spot.
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let xg = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (xg + i as f64);
    }
    let t = xg + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (xg + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Digamma function for x > 0.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma requires a positive argument, got {x}");
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut asym = x.ln() - 0.5 * inv;
    let mut p = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        asym -= b / (2.0 * (k as f64 + 1.0)) * p;
        p *= inv2;
    }
    acc + asym
}

/// m-th polygamma function (m >= 1) for x > 0.
pub fn polygamma(m: usize, x: f64) -> f64 {
    assert!(m >= 1);
    assert!(x > 0.0, "polygamma requires a positive argument, got {x}");
    let mut x = x;
    let sign = if m % 2 == 0 { -1.0 } else { 1.0 };
    let m_fact = factorial(m);
    let mut acc = 0.0;
    while x < 16.0 {
        // psi^(m)(x) = psi^(m)(x+1) + (-1)^m m! / x^(m+1)
        acc += sign * m_fact / x.powi(m as i32 + 1);
        x += 1.0;
    }
    // psi^(m)(x) ~ (-1)^(m-1) [ (m-1)!/x^m + m!/(2 x^(m+1))
    //              + sum_k B_2k (2k+m-1)!/(2k)! x^(-2k-m) ]
    let mut asym = factorial(m - 1) / x.powi(m as i32) + m_fact / (2.0 * x.powi(m as i32 + 1));
    for (k, b) in BERNOULLI.iter().enumerate() {
        let two_k = 2 * (k + 1);
        asym += b * factorial(two_k + m - 1) / factorial(two_k) / x.powi((two_k + m) as i32);
    }
    acc + sign * asym
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Riemann zeta at integer arguments n >= 2, via polygamma at 1.
pub fn zeta_int(n: usize) -> f64 {
    assert!(n >= 2);
    // psi^(m)(1) = (-1)^(m+1) m! zeta(m+1) with m = n-1.
    let m = n - 1;
    let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
    sign * polygamma(m, 1.0) / factorial(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn gamma_small_values() {
        close(gamma(0.5), PI.sqrt(), 1e-13);
        close(gamma(1.0), 1.0, 1e-14);
        close(gamma(5.0), 24.0, 1e-13);
        close(gamma(1.0 / 3.0), 2.678_938_534_707_747_6, 1e-13);
    }

    #[test]
    fn gamma_recurrence() {
        for &x in &[0.1, 0.37, 1.2, 3.75, 9.5] {
            close(gamma(x + 1.0), x * gamma(x), 1e-12);
        }
    }

    #[test]
    fn digamma_known() {
        close(digamma(1.0), -EULER_GAMMA, 1e-13);
        close(digamma(0.5), -EULER_GAMMA - 2.0 * (2.0_f64).ln(), 1e-13);
        for &x in &[0.25, 1.5, 7.3] {
            close(digamma(x + 1.0), digamma(x) + 1.0 / x, 1e-12);
        }
    }

    #[test]
    fn polygamma_known() {
        close(polygamma(1, 1.0), PI * PI / 6.0, 1e-12);
        close(polygamma(1, 0.5), PI * PI / 2.0, 1e-12);
        close(polygamma(2, 1.0), -2.404_113_806_319_188_5, 1e-11);
        for &x in &[0.3, 1.1] {
            for m in 1..=4 {
                let lhs = polygamma(m, x + 1.0);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let rhs = polygamma(m, x) + sign * factorial(m) / x.powi(m as i32 + 1);
                close(lhs, rhs, 1e-10);
            }
        }
    }

    #[test]
    fn zeta_values() {
        close(zeta_int(2), PI * PI / 6.0, 1e-12);
        close(zeta_int(3), 1.202_056_903_159_594_2, 1e-11);
        close(zeta_int(4), PI.powi(4) / 90.0, 1e-11);
    }
}
