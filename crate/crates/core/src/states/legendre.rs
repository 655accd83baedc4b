use crate::error::{Error, Result};
use crate::scalar::Real;

/// Legendre polynomial `P_l(x)` by the three-term recurrence
/// `(l+1) P_{l+1} = (2l+1) x P_l − l P_{l−1}`.
pub fn legendre_p<T: Real>(l: usize, x: T) -> Result<T> {
    if x.is_nan() || x.abs() > T::one() {
        return Err(Error::Domain(format!("legendre_p needs |x| <= 1, got {x}")));
    }
    Ok(legendre_p_unchecked(l, x))
}

fn legendre_p_unchecked<T: Real>(l: usize, x: T) -> T {
    let mut p0 = T::one();
    if l == 0 {
        return p0;
    }
    let mut p1 = x;
    for n in 1..l {
        let nf = T::count(n);
        let p2 = ((nf + nf + T::one()) * x * p1 - nf * p0) / (nf + T::one());
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Evaluates `Σ_l c_l P_l(x)` and its derivative in `x` in one sweep.
///
/// Derivatives use `P'_{l+1} = P'_{l−1} + (2l+1) P_l`, which stays regular at
/// `x = ±1`.
pub fn legendre_series<T: Real>(coeffs: &[T], x: T) -> (T, T) {
    let mut value = T::zero();
    let mut deriv = T::zero();
    let (mut p_prev, mut p) = (T::zero(), T::one());
    let (mut d_prev, mut d) = (T::zero(), T::zero());
    for (l, &c) in coeffs.iter().enumerate() {
        value = value + c * p;
        deriv = deriv + c * d;
        let lf = T::count(l);
        let p_next = ((lf + lf + T::one()) * x * p - lf * p_prev) / (lf + T::one());
        let d_next = d_prev + (lf + lf + T::one()) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (value, deriv)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Explicit low-order polynomials, independent of the recurrence.
    fn explicit(l: usize, x: f64) -> f64 {
        match l {
            0 => 1.0,
            1 => x,
            2 => (3.0 * x * x - 1.0) / 2.0,
            3 => (5.0 * x.powi(3) - 3.0 * x) / 2.0,
            4 => (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0,
            5 => (63.0 * x.powi(5) - 70.0 * x.powi(3) + 15.0 * x) / 8.0,
            _ => unreachable!(),
        }
    }

    #[test]
    fn spot_values() {
        assert_eq!(legendre_p(0, 0.37f64).unwrap(), 1.0);
        assert_eq!(legendre_p(1, 0.5f64).unwrap(), 0.5);
        let p5 = legendre_p(5, 0.3f64).unwrap();
        assert!((p5 - 0.345_386_25).abs() < 1e-12, "{p5}");
    }

    #[test]
    fn matches_explicit_polynomials() {
        for l in 0..=5 {
            for i in 0..=20 {
                let x = -1.0 + 0.1 * i as f64;
                assert!((legendre_p(l, x).unwrap() - explicit(l, x)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn endpoint_values() {
        for l in 0..30 {
            assert!((legendre_p(l, 1.0f64).unwrap() - 1.0).abs() < 1e-12);
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            assert!((legendre_p(l, -1.0f64).unwrap() - sign).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_domain_is_error() {
        assert!(matches!(legendre_p(3, 1.2f64), Err(Error::Domain(_))));
        assert!(legendre_p(3, f64::NAN).is_err());
    }

    #[test]
    fn series_derivative_matches_finite_difference() {
        let coeffs: Vec<f64> = (0..12).map(|l| (-(l as f64) * 0.3).exp()).collect();
        for &x in &[-0.95, -0.3, 0.0, 0.41, 0.9] {
            let (_, d) = legendre_series(&coeffs, x);
            let h = 1e-6;
            let fd =
                (legendre_series(&coeffs, x + h).0 - legendre_series(&coeffs, x - h).0) / (2.0 * h);
            assert!((d - fd).abs() < 1e-6 * (1.0 + d.abs()), "{x}: {d} vs {fd}");
        }
        // P_l'(1) = l(l+1)/2
        let (_, d) = legendre_series(&[0.0, 0.0, 0.0, 1.0], 1.0f64);
        assert!((d - 6.0).abs() < 1e-12);
    }
}
