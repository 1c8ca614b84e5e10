//! Special functions: log-gamma, log multivariate gamma, regularized
//! incomplete gamma and beta functions and the inverses the samplers and
//! test thresholds need.

use crate::error::{Error, Result};
use crate::math::{exp, ln, ln1p, sin};

pub const LN_PI: f64 = 1.144_729_885_849_400_2;
pub const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos approximation, g = 7, 9 terms, coefficients as published.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`; reflection handles `x < 0.5`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx)
        return LN_PI - ln(sin(core::f64::consts::PI * x).abs()) - ln_gamma(1.0 - x);
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    LN_SQRT_2PI + (x + 0.5) * ln(t) - t + ln(a)
}

/// `ln Γ_p(z) = p(p−1)/4 · ln π + Σ_{i=1..p} ln Γ(z − (i−1)/2)`.
///
/// Defined for `z > (p−1)/2`; anything else is a domain error, which callers
/// surface as an invalid shape or degrees-of-freedom parameter.
pub fn ln_mv_gamma(p: usize, z: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::domain("multivariate gamma needs p >= 1"));
    }
    let bound = (p as f64 - 1.0) / 2.0;
    if !(z > bound) || !z.is_finite() {
        return Err(Error::domain(alloc::format!(
            "multivariate gamma of order {p} needs z > {bound}, got {z}"
        )));
    }
    let pf = p as f64;
    let mut acc = pf * (pf - 1.0) / 4.0 * LN_PI;
    for i in 0..p {
        acc += ln_gamma(z - i as f64 / 2.0);
    }
    Ok(acc)
}

const EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`, computed
/// without cancellation in the right tail.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * exp(-x + a * ln(x) - ln_gamma(a))
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    exp(-x + a * ln(x) - ln_gamma(a)) * h
}

/// Gamma(shape `a`, scale 1) log-density, used as the Newton derivative.
fn ln_gamma_density(a: f64, x: f64) -> f64 {
    (a - 1.0) * ln(x) - x - ln_gamma(a)
}

/// Solves `Q(a, x) = q` for `x`. `q` in `(0, 1)`.
pub fn gamma_q_inv(a: f64, q: f64) -> f64 {
    invert_gamma(a, q, true)
}

/// Solves `P(a, x) = p` for `x`. `p` in `(0, 1)`.
pub fn gamma_p_inv(a: f64, p: f64) -> f64 {
    invert_gamma(a, p, false)
}

// Safeguarded Newton inside a maintained bracket.
fn invert_gamma(a: f64, target: f64, upper: bool) -> f64 {
    if target <= 0.0 {
        return if upper { f64::INFINITY } else { 0.0 };
    }
    if target >= 1.0 {
        return if upper { 0.0 } else { f64::INFINITY };
    }
    // g(x) = P(a, x) − p (increasing) or Q(a, x) − q (decreasing); work with
    // an increasing residual in both cases.
    let resid = |x: f64| {
        if upper {
            target - gamma_q(a, x)
        } else {
            gamma_p(a, x) - target
        }
    };
    let mut lo = 0.0_f64;
    let mut hi = a.max(1.0);
    while resid(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = resid(x);
        if r == 0.0 {
            return x;
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = exp(ln_gamma_density(a, x));
        let mut next = if dens > 0.0 && dens.is_finite() {
            x - r / dens
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) {
            return next;
        }
        x = next;
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    x
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * ln(x) + b * ln1p(-x);
    let front = exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b
    }
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
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

/// Upper-tail critical value: the `x` with `P(F > x) = alpha`.
pub fn f_critical(alpha: f64, d1: f64, d2: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(d1 > 0.0) || !(d2 > 0.0) {
        return Err(Error::domain(alloc::format!(
            "F critical value needs alpha in (0,1) and positive dof, got ({alpha}, {d1}, {d2})"
        )));
    }
    // bisection on the beta-scale variable u = d1 x / (d1 x + d2) in (0, 1)
    let target = 1.0 - alpha;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_inc(d1 / 2.0, d2 / 2.0, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let u = 0.5 * (lo + hi);
    Ok(d2 * u / (d1 * (1.0 - u)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mv_gamma_examples() {
        assert!((ln_mv_gamma(1, 4.0).unwrap() - 6f64.ln()).abs() < 1e-13);
        let pi = core::f64::consts::PI;
        assert!((ln_mv_gamma(2, 3.0).unwrap() - (1.5 * pi).ln()).abs() < 1e-13);
        assert!((ln_mv_gamma(2, 1.5).unwrap() - (pi / 2.0).ln()).abs() < 1e-13);
        assert!((ln_mv_gamma(1, 4.0).unwrap() - 1.791_759).abs() < 1e-6);
        assert!((ln_mv_gamma(2, 3.0).unwrap() - 1.550_195).abs() < 1e-6);
        assert!((ln_mv_gamma(2, 1.5).unwrap() - 0.451_583).abs() < 1e-6);
    }

    #[test]
    fn mv_gamma_domain() {
        assert!(matches!(ln_mv_gamma(2, 0.5), Err(Error::Domain(_))));
        assert!(matches!(ln_mv_gamma(3, 1.0), Err(Error::Domain(_))));
        assert!(matches!(ln_mv_gamma(1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ln_mv_gamma(0, 1.0), Err(Error::Domain(_))));
        assert!(ln_mv_gamma(3, 1.0001).is_ok());
    }

    #[test]
    fn mv_gamma_increasing() {
        // lnΓ has its minimum at 1.4616..., so Γ_p increases beyond (p−1)/2 + 1.4616
        for p in 1..6 {
            let start = (p as f64 - 1.0) / 2.0 + 1.462;
            let mut prev = ln_mv_gamma(p, start).unwrap();
            for k in 1..200 {
                let z = start + k as f64 * 0.05;
                let cur = ln_mv_gamma(p, z).unwrap();
                assert!(cur > prev, "p={p} z={z}");
                prev = cur;
            }
        }
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(0.5) - 0.5 * LN_PI).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.1) - 2.252_712_651_734_206).abs() < 1e-13);
    }

    #[test]
    fn incomplete_gamma_consistency() {
        for &a in &[0.5, 1.0, 2.5, 10.0, 40.0] {
            for &x in &[0.01, 0.5, 1.0, 3.0, 12.0, 60.0] {
                let (p, q) = (gamma_p(a, x), gamma_q(a, x));
                assert!((p + q - 1.0).abs() < 1e-13, "a={a} x={x}");
            }
        }
        // a = 1 is the exponential distribution
        assert!((gamma_q(1.0, 2.0) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn incomplete_gamma_inverse() {
        for &a in &[0.3, 1.0, 2.0, 7.5, 50.0] {
            for &u in &[1e-10, 1e-3, 0.2, 0.5, 0.9, 0.999_999] {
                let x = gamma_p_inv(a, u);
                assert!((gamma_p(a, x) - u).abs() < 1e-10 * u.max(1e-3), "a={a} u={u}");
                let x = gamma_q_inv(a, u);
                assert!((gamma_q(a, x) - u).abs() < 1e-10 * u.max(1e-3), "a={a} u={u}");
            }
        }
    }

    #[test]
    fn f_distribution() {
        // F(1, d) critical value is the square of the two-sided t critical value
        let c = f_critical(0.05, 1.0, 1e9).unwrap();
        assert!((c - 1.959_963_984_540_054f64.powi(2)).abs() < 1e-5);
        let c = f_critical(0.05, 1.0, 49.0).unwrap();
        assert!((f_cdf(c, 1.0, 49.0) - 0.95).abs() < 1e-12);
        assert!((c - 4.038_392_712).abs() < 1e-6);
        assert!(f_critical(1.5, 1.0, 2.0).is_err());
    }
}
