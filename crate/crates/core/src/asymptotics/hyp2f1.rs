//! Gauss hypergeometric function by direct series summation.

use super::AsymptoticsError;

/// `2F1(a, b; c; z)` for `|z| < 1` via the Pochhammer series
/// `sum_k (a)_k (b)_k / (c)_k z^k / k!`, with term-ratio stopping once the
/// relative term drops below 1e-16. No analytic continuation is attempted.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64, AsymptoticsError> {
    if !z.is_finite() || z.abs() >= 1.0 {
        return Err(AsymptoticsError::Domain {
            what: "hyp2f1 argument |z| < 1",
            value: z,
        });
    }
    if c <= 0.0 && c == c.floor() {
        return Err(AsymptoticsError::Domain {
            what: "hyp2f1 parameter c",
            value: c,
        });
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..100_000 {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) {
            return Ok(sum);
        }
    }
    Ok(sum)
}

/// Pochhammer symbol `(a)_k`.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= a + i as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Compensated fixed-length summation used as an independent oracle.
    /// Each term is rebuilt from scratch as a product of bounded factors so
    /// no intermediate factorial overflows.
    fn series_oracle(a: f64, b: f64, c: f64, z: f64, terms: u32) -> f64 {
        let (mut sum, mut comp) = (0.0, 0.0);
        for k in 0..terms {
            let mut t = 1.0;
            for i in 0..k {
                let i = i as f64;
                t *= (a + i) * (b + i) * z / ((c + i) * (1.0 + i));
            }
            let y = t - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
        }
        sum
    }

    #[test]
    fn unit_at_origin() {
        assert_eq!(hyp2f1(1.3, -2.4, 0.7, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn log_identity() {
        // 2F1(1,1;2;z) = -ln(1-z)/z
        let got = hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap();
        assert!((got - 2.0 * std::f64::consts::LN_2).abs() < 1e-13);
        let got = hyp2f1(1.0, 1.0, 2.0, -0.7).unwrap();
        assert!((got - (1.7_f64).ln() / 0.7).abs() < 1e-14);
    }

    #[test]
    fn matches_compensated_summation() {
        let got = hyp2f1(1.0, 1.5, 3.0, -0.5).unwrap();
        let want = series_oracle(1.0, 1.5, 3.0, -0.5, 200);
        assert!((got - want).abs() < 1e-13, "got {got} want {want}");
        let got = hyp2f1(1.5, 2.0, 3.0, -0.9).unwrap();
        let want = series_oracle(1.5, 2.0, 3.0, -0.9, 700);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(hyp2f1(1.0, 1.0, 2.0, 1.0).is_err());
        assert!(hyp2f1(1.0, 1.0, 2.0, -1.2).is_err());
        assert!(hyp2f1(1.0, 1.0, 0.0, 0.3).is_err());
        assert!(hyp2f1(1.0, 1.0, -3.0, 0.3).is_err());
    }

    #[test]
    fn pochhammer_basics() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(3.0, 2), 12.0);
        assert_eq!(pochhammer(0.5, 3), 0.5 * 1.5 * 2.5);
    }
}
