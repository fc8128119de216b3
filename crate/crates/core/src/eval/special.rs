//! Special functions behind the t distribution.

use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;
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

/// `ln Γ(x)` for `x > 0` (Lanczos approximation).
pub fn ln_gamma<S: Scalar>(x: S) -> S {
    let half = S::lit(0.5);
    if x < half {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = S::lit(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(S::one() - x);
    }
    let x = x - S::one();
    let mut acc = S::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + S::lit(c) / (x + S::count(i));
    }
    let t = x + S::lit(LANCZOS_G) + half;
    S::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0`, `0 ≤ x ≤ 1`.
pub fn inc_beta<S: Scalar>(x: S, a: S, b: S) -> S {
    if x <= S::zero() {
        return S::zero();
    }
    if x >= S::one() {
        return S::one();
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (S::one() - x).ln();
    let front = ln_front.exp();
    let two = S::lit(2.0);
    if x < (a + S::one()) / (a + b + two) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        S::one() - front * beta_continued_fraction(S::one() - x, b, a) / b
    }
}

/// Modified Lentz evaluation of the continued fraction for `I_x(a, b)`.
fn beta_continued_fraction<S: Scalar>(x: S, a: S, b: S) -> S {
    const MAX_ITER: usize = 500;
    let eps = S::epsilon();
    let tiny = S::min_positive_value() / eps;
    let one = S::one();
    let two = S::lit(2.0);

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = S::count(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Two-sided tail probability `P(|T| ≥ |t|)` of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided<S: Scalar>(t: S, df: S) -> S {
    if t.is_infinite() {
        return S::zero();
    }
    let x = df / (df + t * t);
    inc_beta(x, df / S::lit(2.0), S::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n={n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b
        for &x in &[0.01f64, 0.2, 0.5, 0.77, 0.99] {
            assert!((inc_beta(x, 1.0, 1.0) - x).abs() < 1e-14);
            assert!((inc_beta(x, 3.5, 1.0) - x.powf(3.5)).abs() < 1e-13);
            assert!((inc_beta(x, 1.0, 2.5) - (1.0 - (1.0 - x).powf(2.5))).abs() < 1e-13);
        }
        assert_eq!(inc_beta(0.0f64, 2.0, 3.0), 0.0);
        assert_eq!(inc_beta(1.0f64, 2.0, 3.0), 1.0);
    }

    #[test]
    fn t_tail_with_one_degree_of_freedom() {
        // Cauchy: P(|T| ≥ t) = 1 - 2 atan(t) / π
        for &t in &[0.1f64, 1.0, 3.0, 12.0] {
            let want = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
            assert!((student_t_two_sided(t, 1.0) - want).abs() < 1e-12);
        }
        assert_eq!(student_t_two_sided(0.0f64, 5.0), 1.0);
        assert_eq!(student_t_two_sided(f64::INFINITY, 5.0), 0.0);
    }
}
