//! Wavefunctions on the sphere and on the circle.
//!
//! Sphere amplitudes are functions of `(φ, θ)` normalized against
//! `dS = sinθ dθ dφ`; circle amplitudes are normalized against `dφ`.
//! A state stores its raw (unnormalized) amplitude together with a positive
//! `norm_constant`; evaluation always returns the scaled value.

mod families;
mod legendre;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_circle, integrate_sphere, GridSpec};
use crate::scalar::Real;

pub use families::{
    default_l_max, great_circle_cos, make_cs_state, make_f_state, make_reference_states,
    most_delocalized_state, uniform_state, StateParams,
};
pub use legendre::{legendre_p, legendre_series};

/// Complex function of `(φ, θ)`.
pub type SphereFn<T> = Arc<dyn Fn(T, T) -> Complex<T> + Send + Sync>;
/// Complex function of `φ`.
pub type CircleFn<T> = Arc<dyn Fn(T) -> Complex<T> + Send + Sync>;
/// Real phase `α(φ, θ)`.
pub type PhaseFn<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Phi,
    Theta,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Phi => "phi",
            Axis::Theta => "theta",
        }
    }
}

/// Square-integrable amplitude on the unit sphere.
#[derive(Clone)]
pub struct SphereState<T> {
    amplitude: SphereFn<T>,
    d_phi: Option<SphereFn<T>>,
    d_theta: Option<SphereFn<T>>,
    phi_period_order: Option<usize>,
    norm_constant: T,
    normalized: bool,
    numeric_diff: bool,
    label: String,
}

impl<T: Real> fmt::Debug for SphereState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereState")
            .field("label", &self.label)
            .field("norm_constant", &self.norm_constant)
            .field("normalized", &self.normalized)
            .field("phi_period_order", &self.phi_period_order)
            .field("analytic_d_phi", &self.d_phi.is_some())
            .field("analytic_d_theta", &self.d_theta.is_some())
            .finish()
    }
}

impl<T: Real> SphereState<T> {
    /// Wraps a raw amplitude. Derivatives default to numeric differentiation.
    pub fn new<F>(label: impl Into<String>, amplitude: F) -> Self
    where
        F: Fn(T, T) -> Complex<T> + Send + Sync + 'static,
    {
        Self {
            amplitude: Arc::new(amplitude),
            d_phi: None,
            d_theta: None,
            phi_period_order: None,
            norm_constant: T::one(),
            normalized: false,
            numeric_diff: true,
            label: label.into(),
        }
    }

    pub fn with_d_phi<F>(mut self, d: F) -> Self
    where
        F: Fn(T, T) -> Complex<T> + Send + Sync + 'static,
    {
        self.d_phi = Some(Arc::new(d));
        self
    }

    pub fn with_d_theta<F>(mut self, d: F) -> Self
    where
        F: Fn(T, T) -> Complex<T> + Send + Sync + 'static,
    {
        self.d_theta = Some(Arc::new(d));
        self
    }

    /// Largest `k` for which `|ψ|` is `2π/k`-periodic in `φ`; `None` for
    /// azimuthally symmetric moduli.
    pub fn with_phi_period_order(mut self, k: Option<usize>) -> Self {
        self.phi_period_order = k;
        self
    }

    pub fn with_numeric_diff(mut self, enabled: bool) -> Self {
        self.numeric_diff = enabled;
        self
    }

    /// Marks the raw amplitude as already normalized.
    pub fn assume_normalized(mut self) -> Self {
        self.normalized = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn norm_constant(&self) -> T {
        self.norm_constant
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn phi_period_order(&self) -> Option<usize> {
        self.phi_period_order
    }

    pub fn has_analytic(&self, axis: Axis) -> bool {
        match axis {
            Axis::Phi => self.d_phi.is_some(),
            Axis::Theta => self.d_theta.is_some(),
        }
    }

    pub fn eval(&self, phi: T, theta: T) -> Complex<T> {
        (self.amplitude)(phi, theta).scale(self.norm_constant)
    }

    /// `|ψ(φ, θ)|²`.
    pub fn density(&self, phi: T, theta: T) -> T {
        self.eval(phi, theta).norm_sqr()
    }

    /// Partial derivative along `axis`, analytic when attached and numeric
    /// (central differences, one Richardson step) otherwise.
    pub fn derivative(&self, axis: Axis, phi: T, theta: T) -> Result<Complex<T>> {
        let analytic = match axis {
            Axis::Phi => &self.d_phi,
            Axis::Theta => &self.d_theta,
        };
        if let Some(d) = analytic {
            return Ok(d(phi, theta).scale(self.norm_constant));
        }
        if !self.numeric_diff {
            return Err(Error::MissingDerivative(self.label.clone(), axis.name()));
        }
        Ok(match axis {
            Axis::Phi => richardson_central(|x| self.eval(x, theta), phi, None),
            Axis::Theta => {
                richardson_central(|x| self.eval(phi, x), theta, Some((T::zero(), T::PI())))
            }
        })
    }

    pub fn d_phi(&self, phi: T, theta: T) -> Result<Complex<T>> {
        self.derivative(Axis::Phi, phi, theta)
    }

    pub fn d_theta(&self, phi: T, theta: T) -> Result<Complex<T>> {
        self.derivative(Axis::Theta, phi, theta)
    }

    /// Rigid rotation about the polar axis: `ψ'(φ, θ) = ψ(φ − δ, θ)`.
    pub fn rotated(&self, delta: T) -> Self {
        let amp = self.amplitude.clone();
        let rotate = |f: &SphereFn<T>| -> SphereFn<T> {
            let f = f.clone();
            Arc::new(move |p, t| f(p - delta, t))
        };
        Self {
            amplitude: Arc::new(move |p, t| amp(p - delta, t)),
            d_phi: self.d_phi.as_ref().map(rotate),
            d_theta: self.d_theta.as_ref().map(rotate),
            phi_period_order: self.phi_period_order,
            norm_constant: self.norm_constant,
            normalized: self.normalized,
            numeric_diff: self.numeric_diff,
            label: format!("{} rotated by {}", self.label, delta),
        }
    }

    /// `∫|ψ|² dS` with the current norm constant.
    pub fn norm_sqr(&self, spec: &GridSpec<T>) -> Result<T> {
        let res = integrate_sphere(
            |p, t| Complex::new(self.density(p, t), T::zero()),
            T::zero(),
            spec,
        )?;
        res.finite_re("norm integral")
    }
}

/// Complex `2π`-periodic amplitude on the circle.
#[derive(Clone)]
pub struct CircleState<T> {
    amplitude: CircleFn<T>,
    fourier: Option<Vec<Complex<T>>>,
    norm_constant: T,
    normalized: bool,
    label: String,
}

impl<T: Real> fmt::Debug for CircleState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleState")
            .field("label", &self.label)
            .field("norm_constant", &self.norm_constant)
            .field("normalized", &self.normalized)
            .field("fourier_m_max", &self.fourier_m_max())
            .finish()
    }
}

impl<T: Real> CircleState<T> {
    pub fn new<F>(label: impl Into<String>, amplitude: F) -> Self
    where
        F: Fn(T) -> Complex<T> + Send + Sync + 'static,
    {
        Self {
            amplitude: Arc::new(amplitude),
            fourier: None,
            norm_constant: T::one(),
            normalized: false,
            label: label.into(),
        }
    }

    /// Attaches Fourier coefficients `c_m`, `m = −M..=M`, for the basis
    /// `e^{imφ}/√(2π)` of the *normalized* state.
    ///
    /// The slice must have odd length `2M + 1`.
    pub fn with_fourier(mut self, coeffs: Vec<Complex<T>>) -> Self {
        assert!(
            coeffs.len() % 2 == 1,
            "Fourier coefficients must cover m = -M..=M"
        );
        self.fourier = Some(coeffs);
        self
    }

    pub fn assume_normalized(mut self) -> Self {
        self.normalized = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn norm_constant(&self) -> T {
        self.norm_constant
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn eval(&self, phi: T) -> Complex<T> {
        (self.amplitude)(phi).scale(self.norm_constant)
    }

    pub fn density(&self, phi: T) -> T {
        self.eval(phi).norm_sqr()
    }

    /// Fourier coefficients indexed `m = −M..=M`.
    pub fn fourier(&self) -> Option<&[Complex<T>]> {
        self.fourier.as_deref()
    }

    pub fn fourier_m_max(&self) -> Option<usize> {
        self.fourier.as_ref().map(|c| c.len() / 2)
    }

    /// `c_m`, zero outside the stored band.
    pub fn fourier_coefficient(&self, m: i64) -> Option<Complex<T>> {
        let coeffs = self.fourier.as_ref()?;
        let m_max = (coeffs.len() / 2) as i64;
        if m.abs() > m_max {
            return Some(Complex::new(T::zero(), T::zero()));
        }
        Some(coeffs[(m + m_max) as usize])
    }

    pub fn rotated(&self, delta: T) -> Self {
        let amp = self.amplitude.clone();
        let fourier = self.fourier.as_ref().map(|coeffs| {
            let m_max = (coeffs.len() / 2) as i64;
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let m = T::from_i64(i as i64 - m_max).expect("small integer");
                    c * Complex::from_polar(T::one(), -m * delta)
                })
                .collect()
        });
        Self {
            amplitude: Arc::new(move |p| amp(p - delta)),
            fourier,
            norm_constant: self.norm_constant,
            normalized: self.normalized,
            label: format!("{} rotated by {}", self.label, delta),
        }
    }

    pub fn norm_sqr(&self, spec: &GridSpec<T>) -> Result<T> {
        let res = integrate_circle(
            |p| Complex::new(self.density(p), T::zero()),
            T::zero(),
            spec,
        )?;
        res.finite_re("norm integral")
    }
}

/// Rescales a state so that its norm integral is one.
pub trait Normalize<T: Real>: Sized {
    fn normalize(self, spec: &GridSpec<T>) -> Result<Self>;
}

fn norm_factor<T: Real>(current: T, norm_sqr: T) -> Result<T> {
    if !(norm_sqr.is_finite()) {
        return Err(Error::Normalization("norm integral is not finite".into()));
    }
    if norm_sqr <= T::min_positive_value() {
        return Err(Error::Normalization("state has zero norm".into()));
    }
    Ok(current / norm_sqr.sqrt())
}

impl<T: Real> Normalize<T> for SphereState<T> {
    fn normalize(mut self, spec: &GridSpec<T>) -> Result<Self> {
        let n2 = self
            .norm_sqr(spec)
            .map_err(|e| Error::Normalization(format!("{}: {e}", self.label)))?;
        self.norm_constant = norm_factor(self.norm_constant, n2)?;
        self.normalized = true;
        Ok(self)
    }
}

impl<T: Real> Normalize<T> for CircleState<T> {
    fn normalize(mut self, spec: &GridSpec<T>) -> Result<Self> {
        let n2 = self
            .norm_sqr(spec)
            .map_err(|e| Error::Normalization(format!("{}: {e}", self.label)))?;
        self.norm_constant = norm_factor(self.norm_constant, n2)?;
        self.normalized = true;
        Ok(self)
    }
}

/// Central difference with step `h = ε^{1/3}·max(1, |x|)` refined by one
/// Richardson step. With `bounds`, the step shrinks so samples stay inside.
pub(crate) fn richardson_central<T, F>(f: F, x: T, bounds: Option<(T, T)>) -> Complex<T>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    let mut h = T::epsilon().cbrt() * T::one().max(x.abs());
    if let Some((lo, hi)) = bounds {
        let room = (x - lo).min(hi - x) / T::lit(2.0);
        if room > T::zero() && room < h {
            h = room;
        }
    }
    let central = |h: T| (f(x + h) - f(x - h)).unscale(h + h);
    let coarse = central(h);
    let fine = central(h / T::lit(2.0));
    (fine.scale(T::lit(4.0)) - coarse).unscale(T::lit(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_function_cannot_be_normalized() {
        let s = SphereState::<f64>::new("zero", |_, _| Complex::new(0.0, 0.0));
        let err = s.normalize(&GridSpec::default()).unwrap_err();
        assert!(matches!(err, Error::Normalization(_)));
        let c = CircleState::<f64>::new("zero", |_| Complex::new(0.0, 0.0));
        assert!(c.normalize(&GridSpec::default()).is_err());
    }

    #[test]
    fn divergent_norm_is_error() {
        let s = SphereState::<f64>::new("pole", |_, t: f64| Complex::new(1.0 / t.sin(), 0.0));
        assert!(matches!(
            s.normalize(&GridSpec::default()),
            Err(Error::Normalization(_))
        ));
    }

    #[test]
    fn missing_derivative_without_numeric_fallback() {
        let s = SphereState::<f64>::new("x", |p, _| Complex::new(p.cos(), 0.0))
            .with_numeric_diff(false);
        assert!(matches!(
            s.d_phi(0.2, 1.0),
            Err(Error::MissingDerivative(..))
        ));
    }

    #[test]
    fn numeric_derivative_accuracy() {
        let s = SphereState::<f64>::new("trig", |p, t| {
            Complex::new((2.0 * p).sin() * t.cos(), p.cos() * t)
        });
        let (p, t) = (0.7, 1.1);
        let dp = s.d_phi(p, t).unwrap();
        let dt = s.d_theta(p, t).unwrap();
        let exact_p = Complex::new(2.0 * (2.0 * p).cos() * t.cos(), -p.sin() * t);
        let exact_t = Complex::new(-(2.0 * p).sin() * t.sin(), p.cos());
        assert!((dp - exact_p).norm() < 1e-9);
        assert!((dt - exact_t).norm() < 1e-9);
        // Near the pole the step stays inside [0, π].
        let near = s.d_theta(p, 1e-7).unwrap();
        assert!(near.re.is_finite());
    }

    #[test]
    fn rotation_shifts_argument() {
        let s =
            SphereState::<f64>::new("bump", |p, t| Complex::new((p.cos() + 2.0) * t.sin(), 0.0));
        let r = s.rotated(0.5);
        assert!((r.eval(1.5, 0.3) - s.eval(1.0, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn circle_rotation_moves_fourier_phases() {
        let c = CircleState::<f64>::new("m1", |p| Complex::from_polar(1.0 / (2.0 * PI).sqrt(), p))
            .with_fourier(vec![
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(1.0, 0.0),
            ]);
        let r = c.rotated(0.3);
        let c1 = r.fourier_coefficient(1).unwrap();
        assert!((c1 - Complex::from_polar(1.0, -0.3)).norm() < 1e-15);
        assert_eq!(r.fourier_coefficient(7).unwrap(), Complex::new(0.0, 0.0));
    }
}
