//! First-order differential operators on sphere states,
//! `Ô = −i a(θ) ∂θ − i b ∂φ + c(φ, θ)`, and the coordinate multiplications
//! `φ` (windowed) and `θ`.
//!
//! Second moments are always taken in Gram form `⟨Ôψ|Ôψ⟩`; `Ô` is never
//! applied twice.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{
    gauss_legendre, integrate_sphere, integrate_sphere_vec, ConvergenceResult, Estimate, GridSpec,
};
use crate::scalar::Real;
use crate::states::{Axis, SphereState};

/// Tolerance on `Im⟨ψ|Ôψ⟩` relative to `max(1, ⟨Ôψ|Ôψ⟩)` for operators declared
/// Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-8;

type ThetaCoef<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type Multiplier<T> = Arc<dyn Fn(T, T) -> Complex<T> + Send + Sync>;

#[derive(Clone)]
pub struct DiffOperator<T> {
    a_theta: Option<ThetaCoef<T>>,
    b_phi: T,
    c_mult: Option<Multiplier<T>>,
    label: String,
    hermitian: bool,
    n_index: Option<u32>,
}

impl<T: fmt::Debug> fmt::Debug for DiffOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffOperator")
            .field("label", &self.label)
            .field("b_phi", &self.b_phi)
            .field("hermitian", &self.hermitian)
            .finish()
    }
}

impl<T: Real> DiffOperator<T> {
    /// General operator from its three parts.
    pub fn new<A, C>(
        label: impl Into<String>,
        a_theta: Option<A>,
        b_phi: T,
        c_mult: Option<C>,
        hermitian: bool,
    ) -> Self
    where
        A: Fn(T) -> T + Send + Sync + 'static,
        C: Fn(T, T) -> Complex<T> + Send + Sync + 'static,
    {
        Self {
            a_theta: a_theta.map(|a| Arc::new(a) as ThetaCoef<T>),
            b_phi,
            c_mult: c_mult.map(|c| Arc::new(c) as Multiplier<T>),
            label: label.into(),
            hermitian,
            n_index: None,
        }
    }

    /// `p̂_φ = −i ∂/∂φ`.
    pub fn p_phi() -> Self {
        Self {
            a_theta: None,
            b_phi: T::one(),
            c_mult: None,
            label: "p_phi".into(),
            hermitian: true,
            n_index: None,
        }
    }

    /// `p̂_{nθ} = −i sinⁿθ ∂/∂θ − i((n+1)/2) cosθ sinⁿ⁻¹θ`.
    ///
    /// `n = 0` gives `−i∂θ − (i/2)cotθ`, formally Hermitian but with
    /// non-normalizable images for states that do not vanish at the poles.
    pub fn p_theta(n: u32) -> Self {
        let half = T::count(n as usize + 1) / T::lit(2.0);
        let ni = n as i32;
        Self {
            a_theta: Some(Arc::new(move |t: T| t.sin().powi(ni))),
            b_phi: T::zero(),
            c_mult: Some(Arc::new(move |_, t: T| {
                Complex::new(T::zero(), -half * t.cos() * t.sin().powi(ni - 1))
            })),
            label: format!("p_theta_n{n}"),
            hermitian: true,
            n_index: Some(n),
        }
    }

    /// `p̃_θ = −i ∂/∂θ`, which is not Hermitian with respect to `dS`.
    pub fn p_theta_plain() -> Self {
        Self {
            a_theta: Some(Arc::new(|_| T::one())),
            b_phi: T::zero(),
            c_mult: None,
            label: "p_theta_plain".into(),
            hermitian: false,
            n_index: None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `n` for members of the `p̂_{nθ}` family.
    pub fn n_index(&self) -> Option<u32> {
        self.n_index
    }

    pub fn a_theta(&self, theta: T) -> T {
        self.a_theta.as_ref().map_or(T::zero(), |a| a(theta))
    }

    pub fn b_phi(&self) -> T {
        self.b_phi
    }

    pub fn c_mult(&self, phi: T, theta: T) -> Complex<T> {
        self.c_mult
            .as_ref()
            .map_or(Complex::new(T::zero(), T::zero()), |c| c(phi, theta))
    }

    /// Fails when the state offers no way to differentiate along an axis the
    /// operator needs.
    pub fn check_applicable(&self, state: &SphereState<T>) -> Result<()> {
        let (p, t) = (T::lit(0.3), T::lit(1.1));
        if self.a_theta.is_some() {
            state.derivative(Axis::Theta, p, t)?;
        }
        if self.b_phi != T::zero() {
            state.derivative(Axis::Phi, p, t)?;
        }
        Ok(())
    }

    /// `(Ôψ)(φ, θ)`.
    pub fn apply_at(&self, state: &SphereState<T>, phi: T, theta: T) -> Result<Complex<T>> {
        let minus_i = Complex::new(T::zero(), -T::one());
        let mut out = Complex::new(T::zero(), T::zero());
        if let Some(a) = &self.a_theta {
            out = out + minus_i * state.derivative(Axis::Theta, phi, theta)?.scale(a(theta));
        }
        if self.b_phi != T::zero() {
            out = out + minus_i * state.derivative(Axis::Phi, phi, theta)?.scale(self.b_phi);
        }
        if let Some(c) = &self.c_mult {
            out = out + c(phi, theta) * state.eval(phi, theta);
        }
        Ok(out)
    }
}

/// Operand of covariance and Gram computations.
#[derive(Debug, Clone)]
pub enum Observable<T> {
    /// Multiplication by `φ`, evaluated on the integration window.
    Phi,
    /// Multiplication by `θ`.
    Theta,
    Op(DiffOperator<T>),
}

impl<T: Real> Observable<T> {
    pub fn label(&self) -> &str {
        match self {
            Observable::Phi => "phi",
            Observable::Theta => "theta",
            Observable::Op(op) => op.label(),
        }
    }

    pub fn involves_phi(&self) -> bool {
        matches!(self, Observable::Phi)
    }

    pub fn is_hermitian(&self) -> bool {
        match self {
            Observable::Phi | Observable::Theta => true,
            Observable::Op(op) => op.is_hermitian(),
        }
    }

    fn check_applicable(&self, state: &SphereState<T>) -> Result<()> {
        match self {
            Observable::Op(op) => op.check_applicable(state),
            _ => Ok(()),
        }
    }

    /// `(Xψ)(φ, θ)`; `φ` is the window coordinate itself.
    pub fn apply_at(&self, state: &SphereState<T>, phi: T, theta: T) -> Result<Complex<T>> {
        match self {
            Observable::Phi => Ok(state.eval(phi, theta).scale(phi)),
            Observable::Theta => Ok(state.eval(phi, theta).scale(theta)),
            Observable::Op(op) => op.apply_at(state, phi, theta),
        }
    }
}

impl<T> From<DiffOperator<T>> for Observable<T> {
    fn from(op: DiffOperator<T>) -> Self {
        Observable::Op(op)
    }
}

/// `Ôψ` sampled on the base tensor grid, with the refined norm of `Ôψ`.
#[derive(Debug, Clone)]
pub struct AppliedState<T> {
    pub operator: String,
    pub state: String,
    /// `(φ, θ, (Ôψ)(φ, θ))` on the base grid of window `[−π, π]`.
    pub samples: Vec<(T, T, Complex<T>)>,
    pub norm: ConvergenceResult<T>,
    pub finite_norm: bool,
}

pub fn apply<T: Real>(
    op: &DiffOperator<T>,
    state: &SphereState<T>,
    spec: &GridSpec<T>,
) -> Result<AppliedState<T>> {
    op.check_applicable(state)?;
    let (nt, np) = spec.nodes_at(0);
    let thetas = gauss_legendre::<T>(nt);
    let phis = gauss_legendre::<T>(np);
    let mut samples = Vec::with_capacity(nt * np);
    for (t, _) in thetas.mapped(T::zero(), T::PI()) {
        for (p, _) in phis.mapped(-T::PI(), T::PI()) {
            samples.push((p, t, op.apply_at(state, p, t)?));
        }
    }
    let norm = integrate_sphere(
        |p, t| {
            let v = op.apply_at(state, p, t).map_or(T::nan(), |z| z.norm_sqr());
            Complex::new(v, T::zero())
        },
        T::zero(),
        spec,
    )?;
    Ok(AppliedState {
        operator: op.label().to_string(),
        state: state.label().to_string(),
        samples,
        finite_norm: !norm.is_divergent(),
        norm,
    })
}

/// Raw Gram data for a list of observables:
/// `G_ij = ⟨(X_i − ⟨X_i⟩)ψ|(X_j − ⟨X_j⟩)ψ⟩`.
#[derive(Debug, Clone)]
pub struct GramData<T> {
    pub labels: Vec<String>,
    pub means: Vec<Complex<T>>,
    /// Row-major `n × n`.
    pub g: Vec<Complex<T>>,
    /// Whether `‖X_iψ‖²` diverged.
    pub divergent: Vec<bool>,
    pub window_center: T,
}

impl<T: Real> GramData<T> {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.g[i * self.dim() + j]
    }
}

/// Gram matrix of centred observable images. All `φ` integrations run over
/// `[φ₀ − π, φ₀ + π]` with `φ₀ = window_center`.
pub fn gram_data<T: Real>(
    state: &SphereState<T>,
    observables: &[Observable<T>],
    window_center: T,
    spec: &GridSpec<T>,
) -> Result<GramData<T>> {
    for x in observables {
        x.check_applicable(state)?;
    }
    let n = observables.len();
    // components: n means, then the upper triangle of <X_i psi|X_j psi>
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let dim = n + pairs.len();
    let nan = Complex::new(T::nan(), T::nan());
    let res = integrate_sphere_vec(
        dim,
        |p, t, out| {
            let psi = state.eval(p, t);
            let images: Vec<Complex<T>> = observables
                .iter()
                .map(|x| x.apply_at(state, p, t).unwrap_or(nan))
                .collect();
            for (o, img) in out.iter_mut().zip(&images) {
                *o = psi.conj() * img;
            }
            for (o, &(i, j)) in out[n..].iter_mut().zip(&pairs) {
                *o = images[i].conj() * images[j];
            }
        },
        window_center,
        spec,
    )?;
    let means: Vec<Complex<T>> = res[..n].iter().map(|r| r.value).collect();
    let mut g = vec![Complex::new(T::zero(), T::zero()); n * n];
    let mut divergent = vec![false; n];
    for (r, &(i, j)) in res[n..].iter().zip(&pairs) {
        if r.is_divergent() {
            divergent[i] = true;
            divergent[j] = true;
        }
        let v = r.value - means[i].conj() * means[j];
        g[i * n + j] = v;
        g[j * n + i] = v.conj();
    }
    for (i, x) in observables.iter().enumerate() {
        if x.is_hermitian() && !divergent[i] {
            let scale = T::one().max(g[i * n + i].re.abs());
            if means[i].im.abs() > T::lit(HERMITICITY_TOL) * scale {
                return Err(Error::HermiticityViolated {
                    label: x.label().to_string(),
                    imag: means[i].im.as_f64(),
                });
            }
        }
    }
    Ok(GramData {
        labels: observables.iter().map(|x| x.label().to_string()).collect(),
        means,
        g,
        divergent,
        window_center,
    })
}

/// `⟨Ôψ|Ôψ⟩ − |⟨ψ|Ôψ⟩|²`, or `Divergent` when `Ôψ` is not normalizable.
pub fn operator_variance<T: Real>(
    op: &DiffOperator<T>,
    state: &SphereState<T>,
    window_center: T,
    spec: &GridSpec<T>,
) -> Result<Estimate<T>> {
    observable_variance(&Observable::Op(op.clone()), state, window_center, spec)
}

pub fn observable_variance<T: Real>(
    x: &Observable<T>,
    state: &SphereState<T>,
    window_center: T,
    spec: &GridSpec<T>,
) -> Result<Estimate<T>> {
    let data = gram_data(state, std::slice::from_ref(x), window_center, spec)?;
    if data.divergent[0] {
        return Ok(Estimate::Divergent);
    }
    Ok(Estimate::Finite(data.entry(0, 0).re))
}

/// Generalized covariance `Re G₁₂` and commutator part `2 Im G₁₂`, together
/// with both generalized variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedCov<T> {
    pub g_cov: T,
    pub g_comm: T,
    pub var1: T,
    pub var2: T,
}

pub fn generalized_cov<T: Real>(
    state: &SphereState<T>,
    x1: &Observable<T>,
    x2: &Observable<T>,
    window_center: T,
    spec: &GridSpec<T>,
) -> Result<GeneralizedCov<T>> {
    let data = gram_data(state, &[x1.clone(), x2.clone()], window_center, spec)?;
    if data.divergent.iter().any(|&d| d) {
        return Err(Error::Divergent(format!(
            "generalized covariance of {} and {} in {}",
            x1.label(),
            x2.label(),
            state.label()
        )));
    }
    let g12 = data.entry(0, 1);
    Ok(GeneralizedCov {
        g_cov: g12.re,
        g_comm: g12.im + g12.im,
        var1: data.entry(0, 0).re,
        var2: data.entry(1, 1).re,
    })
}

/// `|⟨Ôψ|χ⟩ − ⟨ψ|Ôχ⟩|`.
pub fn symmetry_defect<T: Real>(
    op: &DiffOperator<T>,
    psi: &SphereState<T>,
    chi: &SphereState<T>,
    spec: &GridSpec<T>,
) -> Result<T> {
    op.check_applicable(psi)?;
    op.check_applicable(chi)?;
    let nan = Complex::new(T::nan(), T::nan());
    let res = integrate_sphere(
        |p, t| {
            let o_psi = op.apply_at(psi, p, t).unwrap_or(nan);
            let o_chi = op.apply_at(chi, p, t).unwrap_or(nan);
            o_psi.conj() * chi.eval(p, t) - psi.eval(p, t).conj() * o_chi
        },
        T::zero(),
        spec,
    )?;
    Ok(res.finite("symmetry defect")?.norm())
}

/// `⟨sinⁿθ⟩`.
pub fn mean_sin_power<T: Real>(state: &SphereState<T>, n: u32, spec: &GridSpec<T>) -> Result<T> {
    let ni = n as i32;
    integrate_sphere(
        |p, t| Complex::new(state.density(p, t) * t.sin().powi(ni), T::zero()),
        T::zero(),
        spec,
    )?
    .finite_re("mean of sin^n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        make_cs_state, make_f_state, most_delocalized_state, uniform_state, Normalize, StateParams,
    };
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn spec() -> GridSpec<f64> {
        GridSpec::default()
    }

    fn finite(e: Estimate<f64>) -> f64 {
        e.finite().expect("finite estimate")
    }

    fn builtins() -> Vec<SphereState<f64>> {
        let s = spec();
        vec![
            uniform_state(),
            most_delocalized_state(None),
            make_f_state(&StateParams::f_family(PI, FRAC_PI_2, 1.0, 2), &s).unwrap(),
            make_f_state(&StateParams::f_family(PI, FRAC_PI_2, 5.0, 2), &s).unwrap(),
            make_cs_state(&StateParams::coherent(PI, FRAC_PI_2, 1.0), &s).unwrap(),
            make_cs_state(&StateParams::coherent(PI, FRAC_PI_2, 0.2), &s).unwrap(),
        ]
    }

    /// `e^{imφ} g(θ)` with a smooth real profile vanishing at neither pole.
    fn azimuthal_eigenstate(m: i32) -> SphereState<f64> {
        SphereState::new(format!("eigen m={m}"), move |p: f64, t: f64| {
            Complex::from_polar(1.0 + 0.5 * t.cos(), m as f64 * p)
        })
        .with_d_phi(move |p: f64, t: f64| {
            Complex::new(0.0, m as f64) * Complex::from_polar(1.0 + 0.5 * t.cos(), m as f64 * p)
        })
        .normalize(&spec())
        .unwrap()
    }

    #[test]
    fn p_phi_eigen_relation() {
        let s = azimuthal_eigenstate(3);
        let op = DiffOperator::p_phi();
        for &(p, t) in &[(0.1, 0.4), (2.0, 1.5), (-1.0, 2.9)] {
            let got = op.apply_at(&s, p, t).unwrap();
            assert!((got - s.eval(p, t).scale(3.0)).norm() < 1e-12);
        }
        assert!(finite(operator_variance(&op, &s, 0.0, &spec()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn p1_on_psi0_is_multiplicative() {
        let psi0 = most_delocalized_state::<f64>(None);
        let op = DiffOperator::p_theta(1);
        for &(p, t) in &[(0.3, 0.2), (1.0, 1.4), (4.0, 3.0)] {
            let got = op.apply_at(&psi0, p, t).unwrap();
            let expect = Complex::new(0.0, -0.5 * t.cos()) * psi0.eval(p, t);
            assert!((got - expect).norm() < 1e-12 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn p0_on_uniform_is_not_normalizable() {
        let uni = uniform_state::<f64>();
        let op = DiffOperator::p_theta(0);
        let (p, t) = (0.5f64, 0.7f64);
        let expect = Complex::new(0.0, -0.5 * t.cos() / t.sin()) * uni.eval(p, t);
        assert!((op.apply_at(&uni, p, t).unwrap() - expect).norm() < 1e-14);
        let applied = apply(&op, &uni, &spec()).unwrap();
        assert!(!applied.finite_norm);
        assert!(applied.norm.is_divergent());
        assert_eq!(applied.samples.len(), 128 * 128);
    }

    #[test]
    fn p_theta_variances_on_psi0() {
        let psi0 = most_delocalized_state::<f64>(None);
        let v: Vec<f64> = (1..=3)
            .map(|n| {
                finite(operator_variance(&DiffOperator::p_theta(n), &psi0, 0.0, &spec()).unwrap())
            })
            .collect();
        assert!((v[0] - 0.125).abs() < 1e-9, "{v:?}");
        assert!((v[1] - 0.125).abs() < 1e-9);
        assert!((v[2] - 9.0 / 64.0).abs() < 1e-9);
    }

    #[test]
    fn normalizable_images_for_n_at_least_one() {
        for s in builtins() {
            for n in 1..=4 {
                let a = apply(&DiffOperator::p_theta(n), &s, &spec()).unwrap();
                assert!(a.finite_norm, "{} n={n}", s.label());
            }
        }
        for s in builtins().into_iter().filter(|s| s.label() != "psi0") {
            let v = operator_variance(&DiffOperator::p_theta(0), &s, 0.0, &spec()).unwrap();
            assert!(v.is_divergent(), "{}", s.label());
        }
    }

    #[test]
    fn means_are_real_and_variances_positive() {
        for s in builtins() {
            let mut ops = vec![DiffOperator::p_phi()];
            ops.extend((1..=4).map(DiffOperator::p_theta));
            for op in ops {
                let data = gram_data(&s, &[Observable::Op(op.clone())], 0.0, &spec()).unwrap();
                assert!(
                    data.means[0].im.abs() < 1e-8,
                    "{} {}",
                    s.label(),
                    op.label()
                );
                if op.n_index().is_some() {
                    assert!(data.entry(0, 0).re > 0.0);
                }
            }
        }
    }

    #[test]
    fn commutator_with_theta_is_mean_sin() {
        let uni = uniform_state::<f64>();
        let gc = generalized_cov(
            &uni,
            &Observable::Theta,
            &DiffOperator::p_theta(1).into(),
            0.0,
            &spec(),
        )
        .unwrap();
        assert!((gc.g_comm - FRAC_PI_4).abs() < 1e-9, "{gc:?}");
        for s in builtins() {
            for n in 1..=3u32 {
                let gc = generalized_cov(
                    &s,
                    &Observable::Theta,
                    &DiffOperator::p_theta(n).into(),
                    0.0,
                    &spec(),
                )
                .unwrap();
                let m = mean_sin_power(&s, n, &spec()).unwrap();
                assert!(
                    (gc.g_comm - m).abs() < 1e-8,
                    "{} n={n}: {} vs {m}",
                    s.label(),
                    gc.g_comm
                );
            }
        }
    }

    #[test]
    fn self_pairing_gives_variance() {
        let s = &builtins()[4];
        let x = Observable::Op(DiffOperator::p_theta(1));
        let gc = generalized_cov(s, &x, &x, 0.0, &spec()).unwrap();
        assert!(gc.g_comm.abs() < 1e-12);
        assert!((gc.g_cov - gc.var1).abs() < 1e-12);
        let v = finite(observable_variance(&Observable::Theta, s, 0.0, &spec()).unwrap());
        let gc = generalized_cov(s, &Observable::Theta, &Observable::Theta, 0.0, &spec()).unwrap();
        assert!((gc.g_cov - v).abs() < 1e-12);
    }

    #[test]
    fn phi_p_phi_on_eigenstate() {
        // p_phi ψ = mψ exactly, so the centred image vanishes and so does
        // every entry pairing with it.
        let s = azimuthal_eigenstate(2);
        let gc = generalized_cov(
            &s,
            &Observable::Phi,
            &DiffOperator::p_phi().into(),
            0.0,
            &spec(),
        )
        .unwrap();
        assert!(gc.g_comm.is_finite());
        assert!(gc.g_comm.abs() < 1e-10 && gc.g_cov.abs() < 1e-10);
        assert!(gc.var2.abs() < 1e-10);
        assert!(gc.var1 > 3.0);
    }

    #[test]
    fn hermitian_operators_have_no_symmetry_defect() {
        let states = builtins();
        let smooth: Vec<&SphereState<f64>> =
            states.iter().filter(|s| s.label() != "psi0").collect();
        for op in [DiffOperator::p_theta(1), DiffOperator::p_phi()] {
            for a in &smooth {
                for b in &smooth {
                    let d = symmetry_defect(&op, a, b, &spec()).unwrap();
                    assert!(d < 1e-8, "{} {} {}: {d}", op.label(), a.label(), b.label());
                }
            }
        }
    }

    #[test]
    fn plain_theta_derivative_is_not_symmetric() {
        let uni = uniform_state::<f64>();
        let off = make_cs_state(&StateParams::coherent(PI, PI / 3.0, 1.0), &spec()).unwrap();
        let op = DiffOperator::p_theta_plain();
        let d = symmetry_defect(&op, &uni, &off, &spec()).unwrap();
        // boundary term |∫ ψ* χ cosθ dθ dφ|
        let oracle = integrate_sphere(
            |p, t: f64| uni.eval(p, t).conj() * off.eval(p, t) * (t.cos() / t.sin()),
            0.0,
            &spec(),
        )
        .unwrap()
        .value
        .norm();
        assert!(d > 1e-3, "{d}");
        assert!((d - oracle).abs() < 1e-9 * (1.0 + oracle));
        // An equator-symmetric partner has a vanishing boundary term.
        let eq = make_cs_state(&StateParams::coherent(PI, FRAC_PI_2, 1.0), &spec()).unwrap();
        assert!(symmetry_defect(&op, &uni, &eq, &spec()).unwrap() < 1e-10);
    }

    #[test]
    fn numeric_derivatives_match_analytic() {
        let s = &builtins()[3];
        let op = DiffOperator::p_theta(1);
        let numeric = SphereState::new("numeric", {
            let s = s.clone();
            move |p, t| s.eval(p, t)
        })
        .assume_normalized();
        let a = finite(operator_variance(&op, s, 0.0, &spec()).unwrap());
        let b = finite(operator_variance(&op, &numeric, 0.0, &spec()).unwrap());
        assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
    }

    #[test]
    fn missing_derivative_reported() {
        let s =
            SphereState::<f64>::new("bare", |_, _| Complex::new(1.0, 0.0)).with_numeric_diff(false);
        assert!(matches!(
            apply(&DiffOperator::p_phi(), &s, &spec()),
            Err(Error::MissingDerivative(..))
        ));
    }

    #[test]
    fn hermiticity_violation_detected() {
        // Declared Hermitian but with an anti-Hermitian multiplicative part.
        let bad = DiffOperator::new(
            "bad",
            None::<fn(f64) -> f64>,
            0.0,
            Some(|_, _| Complex::new(0.0, 1.0)),
            true,
        );
        let err = operator_variance(&bad, &uniform_state(), 0.0, &spec()).unwrap_err();
        assert!(matches!(err, Error::HermiticityViolated { .. }));
    }
}
