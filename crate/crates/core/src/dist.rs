//! Special functions backing the hypothesis tests: regularized incomplete
//! beta (Student-t tails), regularized incomplete gamma (chi-square tails),
//! and a bisection inverse for t critical values.
//!
//! The continued-fraction and series evaluations follow the classical
//! formulations (Lentz's method with the usual FPMIN/EPS guards).

use crate::error::{Error, Result};

const EPS: f64 = 3e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// ln Γ(x) for x > 0 (Lanczos approximation, ~1e-10 relative accuracy).
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    const COF: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_9e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000_000_000_190_015;
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Continued fraction for the incomplete beta function (Lentz's method).
fn betacf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
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

/// Regularized incomplete beta function I_x(a, b).
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * betacf(a, b, x) / a
    } else {
        1.0 - front * betacf(b, a, 1.0 - x) / b
    }
}

/// Series expansion of the regularized lower incomplete gamma P(a, x),
/// valid for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Continued fraction for the regularized upper incomplete gamma Q(a, x),
/// valid for x >= a + 1.
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Upper-tail probability of the chi-square distribution with `df` degrees
/// of freedom. At df = 2 this is exactly exp(−x/2), which is special-cased
/// so the Jarque-Bera and omnibus probabilities carry no series error.
pub fn chi2_survival(x: f64, df: u64) -> Result<f64> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::InvalidSpec(format!("chi2_survival needs x >= 0, got {x}")));
    }
    if df == 0 {
        return Err(Error::InvalidSpec("chi2_survival needs df >= 1".into()));
    }
    if df == 2 {
        return Ok((-x / 2.0).exp());
    }
    let a = df as f64 / 2.0;
    let half_x = x / 2.0;
    if half_x == 0.0 {
        return Ok(1.0);
    }
    Ok(if half_x < a + 1.0 {
        1.0 - gamma_p_series(a, half_x)
    } else {
        gamma_q_cf(a, half_x)
    })
}

/// Two-sided Student-t tail probability P(|T| > |t|) with `df` degrees of
/// freedom, via I_{df/(df+t²)}(df/2, 1/2).
pub fn student_t_tail(t: f64, df: u64) -> f64 {
    debug_assert!(df >= 1);
    if t == 0.0 {
        return 1.0;
    }
    let dff = df as f64;
    let x = dff / (dff + t * t);
    reg_inc_beta(dff / 2.0, 0.5, x)
}

/// Critical value t* >= 0 with P(|T| > t*) = alpha, found by bisection on
/// the monotone tail function.
pub fn student_t_critical(alpha: f64, df: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let mut hi = 1.0f64;
    while student_t_tail(hi, df) > alpha {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidAlpha(alpha));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_tail(mid, df) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        // Γ(1) = Γ(2) = 1, Γ(1/2) = sqrt(pi), Γ(5) = 24
        assert!(ln_gamma(1.0).abs() < 1e-10);
        assert!(ln_gamma(2.0).abs() < 1e-10);
        assert_relative_eq!(
            ln_gamma(0.5),
            std::f64::consts::PI.sqrt().ln(),
            max_relative = 1e-10
        );
        assert_relative_eq!(ln_gamma(5.0), 24.0f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn t_tail_at_zero_is_one() {
        assert_eq!(student_t_tail(0.0, 5), 1.0);
    }

    #[test]
    fn t_tail_cauchy_quartile() {
        // df = 1 is the Cauchy distribution: P(|T| > 1) = 1/2 exactly.
        assert_relative_eq!(student_t_tail(1.0, 1), 0.5, max_relative = 1e-10);
    }

    #[test]
    fn t_tail_critical_value_df23() {
        let p = student_t_tail(2.0687, 23);
        assert!((0.0495..=0.0505).contains(&p), "p = {p}");
    }

    #[test]
    fn t_tail_symmetric_in_sign() {
        assert_eq!(student_t_tail(1.7, 9), student_t_tail(-1.7, 9));
    }

    #[test]
    fn t_tail_matches_normal_limit() {
        // erfc-based two-sided normal tail as the df -> infinity oracle
        fn normal_two_sided(t: f64) -> f64 {
            // Abramowitz-Stegun 7.1.26 style erfc approximation
            let x = t / std::f64::consts::SQRT_2;
            let z = x.abs();
            let q = 1.0 / (1.0 + 0.5 * z);
            let erfc = q
                * (-z * z - 1.26551223
                    + q * (1.00002368
                        + q * (0.37409196
                            + q * (0.09678418
                                + q * (-0.18628806
                                    + q * (0.27886807
                                        + q * (-1.13520398
                                            + q * (1.48851587
                                                + q * (-0.82215223 + q * 0.17087277)))))))))
                .exp();
            erfc
        }
        for t in [0.5, 1.0, 1.645, 1.96, 2.576, 3.0] {
            let tail = student_t_tail(t, 100_000);
            let normal = normal_two_sided(t);
            assert!(
                (tail - normal).abs() < 1e-3,
                "t={t}: {tail} vs normal {normal}"
            );
        }
        let p = student_t_tail(1.96, 100_000);
        assert!((p - 0.05).abs() < 1e-3, "p = {p}");
    }

    #[test]
    fn t_tail_strictly_decreasing() {
        let mut prev = student_t_tail(0.0, 12);
        for i in 1..100 {
            let t = i as f64 * 0.1;
            let cur = student_t_tail(t, 12);
            assert!(cur < prev, "tail not decreasing at t={t}");
            prev = cur;
        }
    }

    #[test]
    fn t_critical_inverts_tail() {
        for df in [1u64, 5, 23, 120] {
            for alpha in [0.5, 0.1, 0.05, 0.01] {
                let t = student_t_critical(alpha, df).unwrap();
                assert_relative_eq!(student_t_tail(t, df), alpha, max_relative = 1e-8);
            }
        }
        // textbook value
        let t = student_t_critical(0.05, 23).unwrap();
        assert!((t - 2.0687).abs() < 5e-4, "t = {t}");
    }

    #[test]
    fn chi2_df2_is_exact_exponential() {
        assert_eq!(chi2_survival(0.0, 2).unwrap(), 1.0);
        assert_relative_eq!(
            chi2_survival(0.159, 2).unwrap(),
            (-0.0795f64).exp(),
            max_relative = 1e-15
        );
        assert_relative_eq!(chi2_survival(1.3863, 2).unwrap(), 0.500_016, max_relative = 1e-4);
    }

    #[test]
    fn chi2_general_df_reference_points() {
        // chi2 with df=1: Q(x) = erfc(sqrt(x/2)); Q(3.841) ~ 0.05
        let q = chi2_survival(3.841, 1).unwrap();
        assert!((q - 0.05).abs() < 5e-4, "q = {q}");
        // df=10: Q(18.307) ~ 0.05
        let q = chi2_survival(18.307, 10).unwrap();
        assert!((q - 0.05).abs() < 5e-4, "q = {q}");
        // large x tail goes to zero
        assert!(chi2_survival(500.0, 3).unwrap() < 1e-100);
    }

    #[test]
    fn chi2_rejects_bad_input() {
        assert!(chi2_survival(-1.0, 2).is_err());
        assert!(chi2_survival(1.0, 0).is_err());
    }
}
