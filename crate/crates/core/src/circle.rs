//! Delocalization measures for a particle on the circle built from `2π`-periodic
//! functions of the angle: trigonometric variances, the centroid measure
//! `1 − |⟨e^{iφ}⟩|²`, and the logarithmic measures based on `⟨e^{2iφ}⟩` and
//! `⟨e^{±2p̂}⟩`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_circle_vec, Estimate, GridSpec};
use crate::scalar::Real;
use crate::states::{CircleState, Normalize};

/// `|⟨e^{2iφ}⟩|` below this is reported as a divergent log measure.
pub const KR_DIVERGENCE_THRESHOLD: f64 = 1e-12;

/// Allowed norm outside the computed Fourier band.
pub const SPECTRAL_TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigMoments<T> {
    pub mean_cos: T,
    pub mean_sin: T,
    pub var_cos: T,
    pub var_sin: T,
    pub cov: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleMeasureSet<T> {
    pub var_cos: T,
    pub var_sin: T,
    pub cov_cos_sin: T,
    pub mean_cos: T,
    pub mean_sin: T,
    /// `1 − ⟨cosφ⟩² − ⟨sinφ⟩²`.
    pub centroid_measure: T,
    /// `−¼ ln|⟨e^{2iφ}⟩|²`.
    pub kr_phi: Estimate<T>,
    /// `¼ ln(⟨e^{−2p̂}⟩⟨e^{2p̂}⟩)`.
    pub kr_p: T,
    pub var_p_phi: T,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Means, variances and covariance of `cosφ` and `sinφ`.
pub fn trig_variances<T: Real>(
    state: &CircleState<T>,
    spec: &GridSpec<T>,
) -> Result<TrigMoments<T>> {
    let res = integrate_circle_vec(
        5,
        |p, out| {
            let d = state.density(p);
            let (s, c) = p.sin_cos();
            out[0] = Complex::new(d * c, T::zero());
            out[1] = Complex::new(d * s, T::zero());
            out[2] = Complex::new(d * c * c, T::zero());
            out[3] = Complex::new(d * s * s, T::zero());
            out[4] = Complex::new(d * s * c, T::zero());
        },
        T::zero(),
        spec,
    )?;
    let v: Vec<T> = res.iter().map(|r| r.value.re).collect();
    Ok(TrigMoments {
        mean_cos: v[0],
        mean_sin: v[1],
        var_cos: v[2] - v[0] * v[0],
        var_sin: v[3] - v[1] * v[1],
        cov: v[4] - v[0] * v[1],
    })
}

/// `1 − ⟨cosφ⟩² − ⟨sinφ⟩²`.
pub fn centroid_measure<T: Real>(state: &CircleState<T>, spec: &GridSpec<T>) -> Result<T> {
    let m = trig_variances(state, spec)?;
    Ok(T::one() - m.mean_cos * m.mean_cos - m.mean_sin * m.mean_sin)
}

/// `⟨e^{2iφ}⟩`.
fn mean_double_angle<T: Real>(state: &CircleState<T>, spec: &GridSpec<T>) -> Result<Complex<T>> {
    let res = integrate_circle_vec(
        1,
        |p, out| out[0] = Complex::from_polar(state.density(p), p + p),
        T::zero(),
        spec,
    )?;
    Ok(res[0].value)
}

/// The pair `(−¼ ln|⟨e^{2iφ}⟩|², ¼ ln(⟨e^{−2p̂}⟩⟨e^{2p̂}⟩))`.
///
/// The momentum part is evaluated from the state's Fourier coefficients.
pub fn kr_measures<T: Real>(
    state: &CircleState<T>,
    spec: &GridSpec<T>,
) -> Result<(Estimate<T>, T)> {
    let u2 = mean_double_angle(state, spec)?.norm();
    let kr_phi = if u2 < T::lit(KR_DIVERGENCE_THRESHOLD) {
        Estimate::Divergent
    } else {
        Estimate::Finite(-(u2 * u2).ln() / T::lit(4.0))
    };
    let coeffs = state.fourier().ok_or_else(|| {
        Error::SpectralDataRequired(format!("{} has no Fourier coefficients", state.label()))
    })?;
    let m_max = (coeffs.len() / 2) as i64;
    let (mut plus, mut minus) = (T::zero(), T::zero());
    for (i, c) in coeffs.iter().enumerate() {
        let w = c.norm_sqr();
        if w == T::zero() {
            continue;
        }
        let m = T::from_i64(i as i64 - m_max).expect("small integer");
        plus = plus + w * (m + m).exp();
        minus = minus + w * (-(m + m)).exp();
    }
    let product = plus * minus;
    if !product.is_finite() {
        return Err(Error::SpectralDataRequired(format!(
            "exp(+-2p) moments overflow for {} (|m| up to {m_max})",
            state.label()
        )));
    }
    Ok((kr_phi, product.ln() / T::lit(4.0)))
}

/// `c_m = ∫ψ(φ) e^{−imφ} dφ/√(2π)` for `|m| ≤ m_max`, indexed `−m_max..=m_max`.
pub fn fourier_coefficients<T: Real>(
    state: &CircleState<T>,
    m_max: usize,
    spec: &GridSpec<T>,
) -> Result<Vec<Complex<T>>> {
    let dim = 2 * m_max + 1;
    let inv_sqrt = T::one() / T::TAU().sqrt();
    let res = integrate_circle_vec(
        dim,
        |p, out| {
            let psi = state.eval(p);
            for (i, o) in out.iter_mut().enumerate() {
                let m = T::from_i64(i as i64 - m_max as i64).expect("small integer");
                *o = psi * Complex::from_polar(inv_sqrt, -m * p);
            }
        },
        T::zero(),
        spec,
    )?;
    let coeffs: Vec<Complex<T>> = res.into_iter().map(|r| r.value).collect();
    let captured: T = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let total = state.norm_sqr(spec)?;
    let tail = (total - captured) / total;
    if tail > T::lit(SPECTRAL_TAIL_TOLERANCE) {
        return Err(Error::SpectralTail {
            m_max,
            tail: tail.as_f64(),
        });
    }
    Ok(coeffs)
}

/// Attaches numerically computed Fourier coefficients.
pub fn with_fourier<T: Real>(
    state: CircleState<T>,
    m_max: usize,
    spec: &GridSpec<T>,
) -> Result<CircleState<T>> {
    let coeffs = fourier_coefficients(&state, m_max, spec)?;
    Ok(state.with_fourier(coeffs))
}

/// `(Δp_φ)² = Σ m²|c_m|² − (Σ m|c_m|²)²`.
pub fn momentum_variance<T: Real>(state: &CircleState<T>) -> Result<T> {
    let coeffs = state.fourier().ok_or_else(|| {
        Error::SpectralDataRequired(format!("{} has no Fourier coefficients", state.label()))
    })?;
    let m_max = (coeffs.len() / 2) as i64;
    let (mut m1, mut m2) = (T::zero(), T::zero());
    for (i, c) in coeffs.iter().enumerate() {
        let m = T::from_i64(i as i64 - m_max).expect("small integer");
        m1 = m1 + m * c.norm_sqr();
        m2 = m2 + m * m * c.norm_sqr();
    }
    Ok(m2 - m1 * m1)
}

/// Both trigonometric uncertainty products and their bounds:
/// `(Δp)²(Δsinφ)² ≥ ⟨cosφ⟩²/4` and `(Δp)²(Δcosφ)² ≥ ⟨sinφ⟩²/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigUncertainty<T> {
    pub sin_lhs: T,
    pub sin_rhs: T,
    pub cos_lhs: T,
    pub cos_rhs: T,
}

impl<T: Real> TrigUncertainty<T> {
    pub fn holds(&self, slack: T) -> bool {
        self.sin_lhs >= self.sin_rhs - slack && self.cos_lhs >= self.cos_rhs - slack
    }
}

pub fn trig_uncertainty<T: Real>(
    state: &CircleState<T>,
    spec: &GridSpec<T>,
) -> Result<TrigUncertainty<T>> {
    let m = trig_variances(state, spec)?;
    let vp = momentum_variance(state)?;
    let quarter = T::lit(0.25);
    Ok(TrigUncertainty {
        sin_lhs: vp * m.var_sin,
        sin_rhs: quarter * m.mean_cos * m.mean_cos,
        cos_lhs: vp * m.var_cos,
        cos_rhs: quarter * m.mean_sin * m.mean_sin,
    })
}

/// All circle measures for one state (which must carry Fourier data).
pub fn circle_measures<T: Real>(
    state: &CircleState<T>,
    spec: &GridSpec<T>,
) -> Result<CircleMeasureSet<T>> {
    let m = trig_variances(state, spec)?;
    let (kr_phi, kr_p) = kr_measures(state, spec)?;
    Ok(CircleMeasureSet {
        var_cos: m.var_cos,
        var_sin: m.var_sin,
        cov_cos_sin: m.cov,
        mean_cos: m.mean_cos,
        mean_sin: m.mean_sin,
        centroid_measure: T::one() - m.mean_cos * m.mean_cos - m.mean_sin * m.mean_sin,
        kr_phi,
        kr_p,
        var_p_phi: momentum_variance(state)?,
    })
}

fn spectrum<T: Real>(m_max: usize, entries: &[(i64, Complex<T>)]) -> Vec<Complex<T>> {
    let mut c = vec![zero(); 2 * m_max + 1];
    for &(m, v) in entries {
        c[(m + m_max as i64) as usize] = v;
    }
    c
}

/// `ψ_m = e^{imφ}/√(2π)`.
pub fn psi_m<T: Real>(m: i64) -> CircleState<T> {
    let mf = T::from_i64(m).expect("small integer");
    let a = T::one() / T::TAU().sqrt();
    let band = m.unsigned_abs() as usize;
    CircleState::new(format!("psi_m(m={m})"), move |p| {
        Complex::from_polar(a, mf * p)
    })
    .with_fourier(spectrum(band, &[(m, Complex::new(T::one(), T::zero()))]))
    .assume_normalized()
}

/// `ψ_cos = cosφ/√π`.
pub fn psi_cos<T: Real>() -> CircleState<T> {
    let a = T::one() / T::PI().sqrt();
    let h = T::FRAC_1_SQRT_2();
    CircleState::new("psi_cos", move |p: T| Complex::new(a * p.cos(), T::zero()))
        .with_fourier(spectrum(
            1,
            &[
                (-1, Complex::new(h, T::zero())),
                (1, Complex::new(h, T::zero())),
            ],
        ))
        .assume_normalized()
}

/// `ψ_sin = sinφ/√π`; its density is `p_sin`.
pub fn psi_sin<T: Real>() -> CircleState<T> {
    let a = T::one() / T::PI().sqrt();
    let h = T::FRAC_1_SQRT_2();
    CircleState::new("psi_sin", move |p: T| Complex::new(a * p.sin(), T::zero()))
        .with_fourier(spectrum(
            1,
            &[
                (-1, Complex::new(T::zero(), h)),
                (1, Complex::new(T::zero(), -h)),
            ],
        ))
        .assume_normalized()
}

/// `ψ_sin2 = sin(2φ)/√π`; its density is `p_sin2`.
pub fn psi_sin2<T: Real>() -> CircleState<T> {
    let a = T::one() / T::PI().sqrt();
    let h = T::FRAC_1_SQRT_2();
    CircleState::new("psi_sin2", move |p: T| {
        Complex::new(a * (p + p).sin(), T::zero())
    })
    .with_fourier(spectrum(
        2,
        &[
            (-2, Complex::new(T::zero(), h)),
            (2, Complex::new(T::zero(), -h)),
        ],
    ))
    .assume_normalized()
}

/// Constant amplitude `1/√(2π)`.
pub fn circle_uniform<T: Real>() -> CircleState<T> {
    let a = T::one() / T::TAU().sqrt();
    CircleState::new("circle_uniform", move |_| Complex::new(a, T::zero()))
        .with_fourier(spectrum(0, &[(0, Complex::new(T::one(), T::zero()))]))
        .assume_normalized()
}

/// `[ψ_m, ψ_cos, ψ_sin, ψ_sin2, uniform]`.
pub fn make_circle_reference_states<T: Real>(m: i64) -> Vec<CircleState<T>> {
    vec![psi_m(m), psi_cos(), psi_sin(), psi_sin2(), circle_uniform()]
}

/// Normalized von Mises–shaped test packet `∝ exp(κ cos(φ − μ)/2)` with
/// Fourier data attached.
pub fn von_mises_packet<T: Real>(mu: T, kappa: T, spec: &GridSpec<T>) -> Result<CircleState<T>> {
    let half = kappa / T::lit(2.0);
    let raw = CircleState::new(format!("von_mises(mu={mu}, kappa={kappa})"), move |p: T| {
        Complex::new((half * ((p - mu).cos() - T::one())).exp(), T::zero())
    });
    let state = raw.normalize(spec)?;
    let m_max = 16 + (kappa.as_f64().max(0.0).sqrt() * 12.0) as usize;
    with_fourier(state, m_max, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn spec() -> GridSpec<f64> {
        GridSpec::default()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn trig_variances_of_reference_states() {
        let cases: [(CircleState<f64>, f64, f64); 4] = [
            (psi_m(3), 0.5, 0.5),
            (psi_m(-1), 0.5, 0.5),
            (psi_cos(), 0.75, 0.25),
            (psi_sin(), 0.25, 0.75),
        ];
        for (s, vc, vs) in cases {
            let m = trig_variances(&s, &spec()).unwrap();
            assert!(close(m.var_cos, vc, 1e-12), "{}: {}", s.label(), m.var_cos);
            assert!(close(m.var_sin, vs, 1e-12), "{}: {}", s.label(), m.var_sin);
            assert!(close(m.cov, 0.0, 1e-12));
        }
    }

    #[test]
    fn centroid_measure_is_maximal_on_pi_periodic_densities() {
        for s in [psi_m::<f64>(2), psi_sin(), psi_sin2(), circle_uniform()] {
            assert!(
                close(centroid_measure(&s, &spec()).unwrap(), 1.0, 1e-12),
                "{}",
                s.label()
            );
        }
    }

    #[test]
    fn centroid_measure_vanishes_for_narrowing_packet() {
        let mut prev = 1.0;
        for kappa in [1.0, 10.0, 100.0, 1000.0] {
            let s = von_mises_packet(0.0, kappa, &spec()).unwrap();
            let c = centroid_measure(&s, &spec()).unwrap();
            assert!(c < prev);
            prev = c;
        }
        assert!(prev < 2e-3, "{prev}");
    }

    #[test]
    fn kr_measures_reference_values() {
        let (phi, _) = kr_measures(&psi_sin::<f64>(), &spec()).unwrap();
        // |<e^{2iφ}>| = 1/2 for p_sin
        match phi {
            Estimate::Finite(v) => {
                assert!(close(v, 0.25 * 4f64.ln(), 1e-12) && close(v, 0.346, 1e-3))
            }
            Estimate::Divergent => panic!("p_sin must be finite"),
        }
        assert!(kr_measures(&psi_sin2::<f64>(), &spec())
            .unwrap()
            .0
            .is_divergent());
        assert!(kr_measures(&circle_uniform::<f64>(), &spec())
            .unwrap()
            .0
            .is_divergent());
        let (_, p) = kr_measures(&psi_m::<f64>(4), &spec()).unwrap();
        assert!(close(p, 0.0, 1e-12));
    }

    #[test]
    fn kr_p_two_mode_closed_form() {
        let a = 1.0 / (4.0 * PI).sqrt();
        let s = CircleState::new("two-mode", move |p: f64| {
            Complex::new(a, 0.0) + Complex::from_polar(a, p)
        })
        .with_fourier(spectrum(
            1,
            &[
                (0, Complex::new(0.5f64.sqrt(), 0.0)),
                (1, Complex::new(0.5f64.sqrt(), 0.0)),
            ],
        ));
        let (_, kp) = kr_measures(&s, &spec()).unwrap();
        let expect = 0.25 * ((2.0 + 2f64.exp() + (-2f64).exp()) / 4.0).ln();
        assert!(close(kp, expect, 1e-14), "{kp} vs {expect}");
        assert!(close(kp, 0.2169, 1e-4));
    }

    #[test]
    fn kr_p_needs_spectral_data() {
        let s = CircleState::<f64>::new("bare", |_| Complex::new(1.0 / (2.0 * PI).sqrt(), 0.0));
        assert!(matches!(
            kr_measures(&s, &spec()),
            Err(Error::SpectralDataRequired(_))
        ));
        let wide = spectrum(
            400,
            &[
                (400, Complex::new(1.0f64, 0.0)),
                (-400, Complex::new(1e-3, 0.0)),
            ],
        );
        let s = psi_m::<f64>(0).with_fourier(wide);
        assert!(matches!(
            kr_measures(&s, &spec()),
            Err(Error::SpectralDataRequired(_))
        ));
    }

    #[test]
    fn fourier_coefficients_of_reference_states() {
        let c = fourier_coefficients(&psi_m::<f64>(2), 4, &spec()).unwrap();
        for (i, z) in c.iter().enumerate() {
            let expect = if i == 6 { 1.0 } else { 0.0 };
            assert!((z - Complex::new(expect, 0.0)).norm() < 1e-12);
        }
        let c = fourier_coefficients(&psi_cos::<f64>(), 3, &spec()).unwrap();
        let h = 0.5f64.sqrt();
        assert!((c[2] - Complex::new(h, 0.0)).norm() < 1e-12);
        assert!((c[4] - Complex::new(h, 0.0)).norm() < 1e-12);
        let c = fourier_coefficients(&psi_sin2::<f64>(), 3, &spec()).unwrap();
        assert!((c[5] - Complex::new(0.0, -h)).norm() < 1e-12);
        assert!((c[1] + c[5]).norm() < 1e-12);
        // stored analytic spectra agree with quadrature
        let stored = psi_sin2::<f64>();
        for m in -2..=2i64 {
            assert!((stored.fourier_coefficient(m).unwrap() - c[(m + 3) as usize]).norm() < 1e-12);
        }
    }

    #[test]
    fn insufficient_band_is_rejected() {
        let err = fourier_coefficients(&psi_sin2::<f64>(), 1, &spec()).unwrap_err();
        assert!(matches!(err, Error::SpectralTail { m_max: 1, .. }));
    }

    #[test]
    fn reference_state_properties() {
        for s in make_circle_reference_states::<f64>(5) {
            assert!(
                close(s.norm_sqr(&spec()).unwrap(), 1.0, 1e-12),
                "{}",
                s.label()
            );
            let n: f64 = s.fourier().unwrap().iter().map(|c| c.norm_sqr()).sum();
            assert!(close(n, 1.0, 1e-12));
        }
        let sin2 = psi_sin2::<f64>();
        let cos = psi_cos::<f64>();
        let sin = psi_sin::<f64>();
        for i in 0..100 {
            let p = 0.0628 * i as f64;
            assert!(close(sin2.density(p), sin2.density(p + PI / 2.0), 1e-14));
            assert!(close(
                cos.eval(p).norm(),
                sin.eval(p + PI / 2.0).norm(),
                1e-14
            ));
        }
    }

    #[test]
    fn trig_uncertainty_holds_on_reference_states() {
        let mut states = make_circle_reference_states::<f64>(1);
        states.push(von_mises_packet(0.7, 4.0, &spec()).unwrap());
        for s in states {
            let u = trig_uncertainty(&s, &spec()).unwrap();
            assert!(u.holds(1e-12), "{}: {u:?}", s.label());
        }
    }

    #[test]
    fn measure_set_consistency() {
        let s = von_mises_packet(1.0, 3.0, &spec()).unwrap();
        let m = circle_measures(&s, &spec()).unwrap();
        assert!(close(m.centroid_measure, m.var_cos + m.var_sin, 1e-12));
        assert!((0.0..=1.0).contains(&m.centroid_measure));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn pythagorean_identity(mu in -3.0f64..3.0, kappa in 0.0f64..20.0) {
            let s = von_mises_packet(mu, kappa, &spec()).unwrap();
            let m = trig_variances(&s, &spec()).unwrap();
            let total = m.var_cos + m.var_sin + m.mean_cos.powi(2) + m.mean_sin.powi(2);
            prop_assert!((total - 1.0).abs() < 1e-9);
        }

        #[test]
        fn kr_phi_rotation_invariant(mu in -3.0f64..3.0, kappa in 0.5f64..10.0, delta in -6.0f64..6.0) {
            let s = von_mises_packet(mu, kappa, &spec()).unwrap();
            let a = kr_measures(&s, &spec()).unwrap();
            let b = kr_measures(&s.rotated(delta), &spec()).unwrap();
            match (a.0, b.0) {
                (Estimate::Finite(x), Estimate::Finite(y)) => prop_assert!((x - y).abs() < 1e-9),
                _ => prop_assert!(false, "expected finite values"),
            }
            prop_assert!((a.1 - b.1).abs() < 1e-12);
        }
    }
}
