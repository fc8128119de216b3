use super::special::student_t_two_sided;
use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};

/// Variance model of the unpaired t-test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Variance {
    /// Student's test with pooled variance.
    #[default]
    Pooled,
    /// Welch's test with Welch–Satterthwaite degrees of freedom.
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest<S> {
    pub t: S,
    pub df: S,
    /// Two-sided.
    pub p_value: S,
}

fn sample_variance<S: Scalar>(xs: &[S], m: S) -> S {
    let ss: S = xs.iter().map(|&x| (x - m) * (x - m)).sum();
    ss / S::count(xs.len() - 1)
}

/// Two-sided unpaired t-test of `a` against `b`.
///
/// With zero standard error the result is `t = 0, p = 1` for equal means and
/// `t = ±∞, p = 0` otherwise.
pub fn unpaired_ttest<S: Scalar>(a: &[S], b: &[S], variance: Variance) -> Result<TTest<S>> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "t-test needs at least 2 observations per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (S::count(a.len()), S::count(b.len()));
    let (ma, mb) = (mean(a.iter().copied()), mean(b.iter().copied()));
    let (va, vb) = (sample_variance(a, ma), sample_variance(b, mb));
    let two = S::lit(2.0);
    let (se, df) = match variance {
        Variance::Pooled => {
            let df = na + nb - two;
            let pooled = ((na - S::one()) * va + (nb - S::one()) * vb) / df;
            ((pooled * (na.recip() + nb.recip())).sqrt(), df)
        }
        Variance::Welch => {
            let (ua, ub) = (va / na, vb / nb);
            let se2 = ua + ub;
            let denom = ua * ua / (na - S::one()) + ub * ub / (nb - S::one());
            let df = if denom > S::zero() {
                se2 * se2 / denom
            } else {
                na + nb - two
            };
            (se2.sqrt(), df)
        }
    };
    let diff = ma - mb;
    if se == S::zero() {
        return Ok(if diff == S::zero() {
            TTest {
                t: S::zero(),
                df,
                p_value: S::one(),
            }
        } else {
            TTest {
                t: if diff > S::zero() {
                    S::infinity()
                } else {
                    S::neg_infinity()
                },
                df,
                p_value: S::zero(),
            }
        });
    }
    let t = diff / se;
    let p_value = student_t_two_sided(t, df).max(S::zero()).min(S::one());
    Ok(TTest { t, df, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [0.1f64, 0.5, 0.9];
        let r = unpaired_ttest(&a, &a, Variance::Pooled).unwrap();
        assert_eq!((r.t, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn zero_variance_rules() {
        let r = unpaired_ttest(&[0.0f64; 3], &[1.0; 3], Variance::Pooled).unwrap();
        assert_eq!((r.t, r.p_value), (f64::NEG_INFINITY, 0.0));
        let r = unpaired_ttest(&[2.0f64; 3], &[2.0; 4], Variance::Welch).unwrap();
        assert_eq!((r.t, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn small_samples_rejected() {
        assert!(unpaired_ttest(&[1.0f64], &[1.0, 2.0], Variance::Pooled).is_err());
    }

    #[test]
    fn worked_pooled_example() {
        // Oracle values from scipy.stats.ttest_ind (equal_var=True).
        let r = unpaired_ttest(&[0.2f64, 0.4, 0.6], &[0.5, 0.7, 0.9], Variance::Pooled).unwrap();
        assert!((r.t - T_POOLED).abs() < 1e-9);
        assert_eq!(r.df, 4.0);
        assert!((r.p_value - P_POOLED).abs() < 1e-9);
    }

    #[test]
    fn worked_welch_example() {
        // scipy.stats.ttest_ind(equal_var=False)
        let r = unpaired_ttest(&[0.2f64, 0.4, 0.6, 0.1], &[0.5, 0.7, 0.9], Variance::Welch).unwrap();
        assert!((r.t - -2.342_606_428_329_091).abs() < 1e-9);
        assert!((r.df - 4.715_532_467_532_467).abs() < 1e-9);
        assert!((r.p_value - 0.069_282_142_153_689_82).abs() < 1e-9);
    }

    const T_POOLED: f64 = -1.837_117_307_087_383_6;
    const P_POOLED: f64 = 0.140_065_984_912_017_74;
}
