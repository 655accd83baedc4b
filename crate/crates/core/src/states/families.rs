//! The built-in sphere state families.

use std::sync::Arc;

use num_complex::Complex;

use super::{legendre_series, Normalize, PhaseFn, SphereState};
use crate::error::{Error, Result};
use crate::quadrature::GridSpec;
use crate::scalar::Real;

/// Largest Legendre weight allowed to be the last kept term.
const CS_TAIL_THRESHOLD: f64 = 1e-12;

/// Parameters of the built-in families.
///
/// `u, v` locate the peak, `gamma` and `k` shape the `f` family, `tau` and
/// `l_max` the coherent-state series, `alpha_phase` the most delocalized
/// state. Unused fields are ignored by each constructor.
#[derive(Clone)]
pub struct StateParams<T> {
    pub u: T,
    pub v: T,
    pub gamma: T,
    pub k: usize,
    pub tau: T,
    pub alpha_phase: Option<PhaseFn<T>>,
    pub l_max: Option<usize>,
}

impl<T: Real> Default for StateParams<T> {
    fn default() -> Self {
        Self {
            u: T::PI(),
            v: T::FRAC_PI_2(),
            gamma: T::one(),
            k: 1,
            tau: T::one(),
            alpha_phase: None,
            l_max: None,
        }
    }
}

impl<T: Real> std::fmt::Debug for StateParams<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateParams")
            .field("u", &self.u)
            .field("v", &self.v)
            .field("gamma", &self.gamma)
            .field("k", &self.k)
            .field("tau", &self.tau)
            .field("alpha_phase", &self.alpha_phase.is_some())
            .field("l_max", &self.l_max)
            .finish()
    }
}

impl<T: Real> StateParams<T> {
    /// `f` family peaked around `(u, v)`.
    pub fn f_family(u: T, v: T, gamma: T, k: usize) -> Self {
        Self {
            u,
            v,
            gamma,
            k,
            ..Self::default()
        }
    }

    /// Coherent state centred at `(u, v)`.
    pub fn coherent(u: T, v: T, tau: T) -> Self {
        Self {
            u,
            v,
            tau,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_nan() || self.gamma <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.tau.is_nan() || self.tau <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(self.v >= T::zero() && self.v <= T::PI()) {
            return Err(Error::InvalidParameter(format!(
                "v must lie in [0, pi], got {}",
                self.v
            )));
        }
        if !self.u.is_finite() {
            return Err(Error::InvalidParameter("u must be finite".into()));
        }
        Ok(())
    }
}

/// Cosine of the great-circle angle between `(φ, θ)` and `(u, v)`.
pub fn great_circle_cos<T: Real>(phi: T, theta: T, u: T, v: T) -> T {
    let c = v.cos() * theta.cos() + v.sin() * theta.sin() * (phi - u).cos();
    c.max(-T::one()).min(T::one())
}

/// `N·[2 + cos(kφ − u) + cos(3(θ − v)/2)]^γ`, normalized, with analytic
/// partial derivatives.
pub fn make_f_state<T: Real>(
    params: &StateParams<T>,
    spec: &GridSpec<T>,
) -> Result<SphereState<T>> {
    params.validate()?;
    let StateParams { u, v, gamma, k, .. } = *params;
    let kf = T::count(k);
    let three_halves = T::lit(1.5);
    let base = move |p: T, t: T| {
        (T::lit(2.0) + (kf * p - u).cos() + (three_halves * (t - v)).cos()).max(T::zero())
    };
    let real = |x: T| Complex::new(x, T::zero());
    let label = format!("f(u={u:.4}, v={v:.4}, gamma={gamma}, k={k})");
    let state = SphereState::new(label, move |p, t| real(base(p, t).powf(gamma)))
        .with_d_phi(move |p, t| {
            real(-gamma * base(p, t).powf(gamma - T::one()) * kf * (kf * p - u).sin())
        })
        .with_d_theta(move |p, t| {
            real(
                -gamma
                    * base(p, t).powf(gamma - T::one())
                    * three_halves
                    * (three_halves * (t - v)).sin(),
            )
        })
        .with_phi_period_order(Some(k));
    state.normalize(spec)
}

/// Smallest `L` whose heat-kernel weight `e^{−τL(L+1)/2}√(2L+1)` drops
/// below `1e−12`.
pub fn default_l_max<T: Real>(tau: T) -> usize {
    let threshold = T::lit(CS_TAIL_THRESHOLD);
    (0..)
        .find(|&l| cs_weight(l, tau) < threshold)
        .expect("weights decay super-exponentially")
}

fn cs_weight<T: Real>(l: usize, tau: T) -> T {
    let lf = T::count(l);
    (-tau * lf * (lf + T::one()) / T::lit(2.0)).exp() * (lf + lf + T::one()).sqrt()
}

/// Coherent state `N·Σ_{l≤L} e^{−τl(l+1)/2}√(2l+1) P_l(cosΘ)` where `Θ` is the
/// angle to `(u, v)`. Derivatives follow from the chain rule.
pub fn make_cs_state<T: Real>(
    params: &StateParams<T>,
    spec: &GridSpec<T>,
) -> Result<SphereState<T>> {
    params.validate()?;
    let StateParams { u, v, tau, .. } = *params;
    let l_max = match params.l_max {
        Some(l) => {
            let tail = cs_weight(l, tau);
            if tail.is_nan() || tail >= T::lit(CS_TAIL_THRESHOLD) {
                return Err(Error::TruncationInsufficient {
                    l_max: l,
                    tail: tail.as_f64(),
                });
            }
            l
        }
        None => default_l_max(tau),
    };
    let coeffs: Arc<[T]> = (0..=l_max).map(|l| cs_weight(l, tau)).collect();
    let (cv, sv) = (v.cos(), v.sin());
    let real = |x: T| Complex::new(x, T::zero());

    let c0 = coeffs.clone();
    let c1 = coeffs.clone();
    let c2 = coeffs;
    let label = format!("cs(u={u:.4}, v={v:.4}, tau={tau}, l_max={l_max})");
    // Pole-centred packets are azimuthally symmetric.
    let on_pole = sv.abs() <= T::epsilon() * T::lit(8.0);
    let state = SphereState::new(label, move |p, t| {
        real(legendre_series(&c0, great_circle_cos(p, t, u, v)).0)
    })
    .with_d_phi(move |p, t| {
        let (_, dx) = legendre_series(&c1, great_circle_cos(p, t, u, v));
        real(dx * (-sv * t.sin() * (p - u).sin()))
    })
    .with_d_theta(move |p, t| {
        let (_, dx) = legendre_series(&c2, great_circle_cos(p, t, u, v));
        real(dx * (-cv * t.sin() + sv * t.cos() * (p - u).cos()))
    })
    .with_phi_period_order(if on_pole { None } else { Some(1) });
    state.normalize(spec)
}

/// `ψ_uni = 1/√(4π)`.
pub fn uniform_state<T: Real>() -> SphereState<T> {
    let value = T::one() / (T::lit(4.0) * T::PI()).sqrt();
    let zero = Complex::new(T::zero(), T::zero());
    SphereState::new("uniform", move |_, _| Complex::new(value, T::zero()))
        .with_d_phi(move |_, _| zero)
        .with_d_theta(move |_, _| zero)
        .assume_normalized()
}

/// `ψ_α = e^{iα(φ,θ)}/(π√(2 sinθ))`; with no phase this is `ψ₀`, whose
/// density with respect to `dθ dφ` is the constant `1/(2π²)`.
pub fn most_delocalized_state<T: Real>(alpha: Option<PhaseFn<T>>) -> SphereState<T> {
    let modulus = |t: T| T::one() / (T::PI() * (T::lit(2.0) * t.sin()).sqrt());
    match alpha {
        None => SphereState::new("psi0", move |_, t| Complex::new(modulus(t), T::zero()))
            .with_d_phi(|_, _| Complex::new(T::zero(), T::zero()))
            .with_d_theta(move |_, t| {
                Complex::new(-modulus(t) * t.cos() / (T::lit(2.0) * t.sin()), T::zero())
            })
            .assume_normalized(),
        Some(alpha) => SphereState::new("psi_alpha", move |p, t| {
            Complex::from_polar(modulus(t), alpha(p, t))
        })
        .assume_normalized(),
    }
}

/// The two reference states `[ψ_uni, ψ_α]` (`ψ_α = ψ₀` without a phase).
pub fn make_reference_states<T: Real>(alpha: Option<PhaseFn<T>>) -> Vec<SphereState<T>> {
    vec![uniform_state(), most_delocalized_state(alpha)]
}
