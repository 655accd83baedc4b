//! Position-delocalization measures on the sphere.
//!
//! The azimuthal variance depends on where the `2π` integration window is
//! placed. With the window `[φ₀ − π, φ₀ + π]`,
//!
//! ```text
//! M⁽ᵏ⁾(φ₀) = ∫₀^π sinθ dθ ∫_{φ₀−π}^{φ₀+π} φᵏ |ψ|² dφ,   V(φ₀) = M⁽²⁾ − (M⁽¹⁾)²,
//! ```
//!
//! and a packet center `φ_c` is a window position with `M⁽¹⁾(φ_c) = φ_c`
//! whose antipodal marginal density does not exceed `1/2π`. Since
//! `dV/dφ₀ = −4π ρ(φ₀ + π)(M⁽¹⁾ − φ₀)`, these are exactly the local minima of
//! `V`. Centers are located as descending zero crossings of `M⁽¹⁾ − φ₀`,
//! which stays well conditioned even where `V` is extremely flat.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::{operator_variance, DiffOperator};
use crate::quadrature::{
    gauss_legendre, integrate_sphere, integrate_sphere_vec, ConvergenceResult, GridSpec,
};
use crate::scalar::{angular_diff, wrap_two_pi, Real};
use crate::states::SphereState;

/// Accuracy required of the fixed-point condition at a center, in radians.
pub const CENTER_TOL: f64 = 1e-8;

fn center_tol<T: Real>() -> T {
    T::lit(CENTER_TOL).max(T::lit(1024.0) * T::epsilon())
}

/// Slack on the antipode condition `ρ(φ_c + π) ≤ 1/2π`.
pub const ANTIPODE_SLACK: f64 = 1e-6;

/// Number of window positions in the coarse center scan.
pub const CENTER_SCAN_POINTS: usize = 720;

/// `|M⁽¹⁾ − φ₀|` below this everywhere marks a flat variance profile.
const FLAT_RESIDUAL: f64 = 1e-10;

/// Largest relative Fourier coefficient allowed in the upper quarter band,
/// raised to `MARGINAL_TAIL_ULPS · ε` for low-precision scalars.
const MARGINAL_TAIL: f64 = 1e-13;
const MARGINAL_TAIL_ULPS: f64 = 64.0;

const MAX_MARGINAL_SAMPLES: usize = 1 << 13;

/// Azimuthal marginal `ρ(φ) = ∫₀^π |ψ(φ, θ)|² sinθ dθ` as a Fourier series
/// `Σ c_m e^{imφ}`, with the windowed moments in closed form.
#[derive(Debug, Clone)]
pub struct PhiMarginal<T> {
    /// `c_m` for `m = 0..=m_max`; `c_{−m} = conj(c_m)` since `ρ` is real.
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> PhiMarginal<T> {
    /// Samples the marginal on a uniform `φ` grid, doubling the grid until the
    /// spectrum has decayed and the `θ` rule until the coefficients settle.
    pub fn new(state: &SphereState<T>, spec: &GridSpec<T>) -> Result<Self> {
        spec.validate()?;
        let tail_tol = T::lit(MARGINAL_TAIL).max(T::lit(MARGINAL_TAIL_ULPS) * T::epsilon());
        let mut samples = 256usize;
        loop {
            let coeffs = Self::coefficients_settled_in_theta(state, samples, spec)?;
            let c0 = coeffs[0].norm();
            let upper = coeffs[samples / 4..]
                .iter()
                .map(|c| c.norm())
                .fold(T::zero(), T::max);
            if upper <= tail_tol * c0 {
                let keep = samples / 4;
                return Ok(Self {
                    coeffs: coeffs[..keep].to_vec(),
                });
            }
            if samples >= MAX_MARGINAL_SAMPLES {
                return Err(Error::SpectralTail {
                    m_max: samples / 4,
                    tail: (upper / c0).as_f64(),
                });
            }
            samples *= 2;
        }
    }

    fn coefficients_settled_in_theta(
        state: &SphereState<T>,
        samples: usize,
        spec: &GridSpec<T>,
    ) -> Result<Vec<Complex<T>>> {
        let mut prev: Option<Vec<Complex<T>>> = None;
        for level in 0..=spec.max_refinements {
            let (nt, _) = spec.nodes_at(level);
            let rho = marginal_samples(state, samples, nt);
            if rho.iter().any(|r| !r.is_finite()) {
                return Err(Error::NonIntegrableSample);
            }
            let coeffs = real_dft(&rho, samples / 2);
            if let Some(p) = &prev {
                let diff = coeffs
                    .iter()
                    .zip(p)
                    .map(|(a, b)| (*a - *b).norm())
                    .fold(T::zero(), T::max);
                if diff <= spec.rel_tol * coeffs[0].norm() + spec.abs_floor() {
                    return Ok(coeffs);
                }
            }
            prev = Some(coeffs);
        }
        Ok(prev.expect("at least one level"))
    }

    /// Highest harmonic kept.
    pub fn m_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `c_m`.
    pub fn coefficient(&self, m: i64) -> Complex<T> {
        match self.coeffs.get(m.unsigned_abs() as usize) {
            Some(c) if m >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex::new(T::zero(), T::zero()),
        }
    }

    /// `ρ(φ)`.
    pub fn density(&self, phi: T) -> T {
        let mut sum = self.coeffs[0].re;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let e = Complex::from_polar(T::one(), T::count(m) * phi);
            sum = sum + T::lit(2.0) * (*c * e).re;
        }
        sum
    }

    /// Centred window integrals `(I₀, I₁, I₂)` with
    /// `I_k = ∫_{−π}^{π} sᵏ ρ(φ₀ + s) ds`.
    pub fn centred_moments(&self, phi0: T) -> (T, T, T) {
        let pi = T::PI();
        let two_pi = T::TAU();
        let c0 = self.coeffs[0].re;
        let i0 = two_pi * c0;
        let mut i1 = T::zero();
        let mut i2 = two_pi * pi * pi / T::lit(3.0) * c0;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let mf = T::count(m);
            let sign = if m % 2 == 0 { T::one() } else { -T::one() };
            let z = *c * Complex::from_polar(T::one(), mf * phi0);
            // c_m e^{imφ₀} J_k(m) + conj, with J₁ = −2πi(−1)^m/m, J₂ = 4π(−1)^m/m²
            i1 = i1 + T::lit(2.0) * two_pi * sign / mf * z.im;
            i2 = i2 + T::lit(2.0) * T::lit(2.0) * two_pi * sign / (mf * mf) * z.re;
        }
        (i0, i1, i2)
    }

    /// `M⁽¹⁾(φ₀) − φ₀`.
    pub fn fixed_point_residual(&self, phi0: T) -> T {
        let (i0, i1, _) = self.centred_moments(phi0);
        i1 / i0
    }

    /// `V(φ₀)` from the series.
    pub fn variance_at(&self, phi0: T) -> T {
        let (i0, i1, i2) = self.centred_moments(phi0);
        i2 / i0 - (i1 / i0) * (i1 / i0)
    }

    /// `⟨e^{iφ}⟩ = 2π c_{−1}`.
    pub fn mean_exp_i_phi(&self) -> Complex<T> {
        self.coefficient(-1).scale(T::TAU())
    }
}

/// `ρ(φ_j)` for `φ_j = 2πj/n`, with an `nt`-point Gauss rule in `θ`.
fn marginal_samples<T: Real>(state: &SphereState<T>, n: usize, nt: usize) -> Vec<T> {
    let rule = gauss_legendre::<T>(nt);
    let thetas: Vec<(T, T)> = rule
        .mapped(T::zero(), T::PI())
        .map(|(t, w)| (t, w * t.sin()))
        .collect();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let phi = T::TAU() * T::count(j) / T::count(n);
            thetas.iter().map(|&(t, w)| w * state.density(phi, t)).sum()
        })
        .collect()
}

/// `c_m = (1/n) Σ_j x_j e^{−2πimj/n}` for `m = 0..=m_max`.
fn real_dft<T: Real>(x: &[T], m_max: usize) -> Vec<Complex<T>> {
    let n = x.len();
    (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, &v) in x.iter().enumerate() {
                // reduce the phase index first so large products stay exact
                let k = (m * j) % n;
                let angle = -T::TAU() * T::count(k) / T::count(n);
                acc = acc + Complex::from_polar(v, angle);
            }
            acc.unscale(T::count(n))
        })
        .collect()
}

/// `M⁽ᵏ⁾(φ₀)` by direct quadrature over the window.
pub fn moment_phi<T: Real>(
    state: &SphereState<T>,
    k: u32,
    phi0: T,
    spec: &GridSpec<T>,
) -> Result<T> {
    let ki = k as i32;
    integrate_sphere(
        |p, t| Complex::new(p.powi(ki) * state.density(p, t), T::zero()),
        phi0,
        spec,
    )?
    .finite_re("windowed phi moment")
}

/// Windowed mean and variance `(M⁽¹⁾(φ₀), V(φ₀))` by direct quadrature.
///
/// Moments are accumulated about `φ₀`, so the variance does not lose digits
/// for windows far from the origin.
pub fn windowed_phi_moments<T: Real>(
    state: &SphereState<T>,
    phi0: T,
    spec: &GridSpec<T>,
) -> Result<(T, T)> {
    let res = integrate_sphere_vec(
        3,
        |p, t, out| {
            let d = state.density(p, t);
            let s = p - phi0;
            out[0] = Complex::new(d, T::zero());
            out[1] = Complex::new(s * d, T::zero());
            out[2] = Complex::new(s * s * d, T::zero());
        },
        phi0,
        spec,
    )?;
    let norm = res[0].finite_re("window norm")?;
    let m1 = res[1].finite_re("windowed phi moment")? / norm;
    let m2 = res[2].finite_re("windowed phi moment")? / norm;
    Ok((phi0 + m1, m2 - m1 * m1))
}

/// `V(φ₀) = M⁽²⁾ − (M⁽¹⁾)²`.
pub fn variance_phi_at<T: Real>(state: &SphereState<T>, phi0: T, spec: &GridSpec<T>) -> Result<T> {
    windowed_phi_moments(state, phi0, spec).map(|(_, v)| v)
}

/// One packet center with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketCenter<T> {
    /// In `[0, 2π)`.
    pub phi_c: T,
    pub theta_c: T,
    /// `V(φ_c)`.
    pub objective: T,
    /// `M⁽¹⁾(φ_c) − φ_c`.
    pub fixed_point_residual: T,
    /// `ρ(φ_c + π)`.
    pub antipode_density: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PacketCenterResult<T> {
    /// Sorted by `phi_c`.
    pub centers: Vec<PacketCenter<T>>,
    pub multiplicity: usize,
    /// The variance profile is constant; `φ_c = 0` is reported by convention.
    pub degenerate: bool,
    /// `atan2(⟨sinφ⟩, ⟨cosφ⟩)` in `[0, 2π)`, when `⟨e^{iφ}⟩ ≠ 0`.
    pub centroid_angle: Option<T>,
}

impl<T: Real> PacketCenterResult<T> {
    /// The center with the smallest objective.
    pub fn best(&self) -> &PacketCenter<T> {
        self.centers
            .iter()
            .min_by(|a, b| {
                a.objective
                    .partial_cmp(&b.objective)
                    .expect("finite objectives")
            })
            .expect("at least one center")
    }
}

/// Solves the packet-center conditions.
///
/// A 720-point scan of `M⁽¹⁾(φ₀) − φ₀` brackets every descending zero
/// crossing; each is refined by bisection and then checked against both
/// conditions with direct quadrature.
pub fn find_packet_centers<T: Real>(
    state: &SphereState<T>,
    spec: &GridSpec<T>,
) -> Result<PacketCenterResult<T>> {
    let marginal = PhiMarginal::new(state, spec)?;
    let (theta_c, _) = theta_variance(state, spec)?;
    let e1 = marginal.mean_exp_i_phi();
    let centroid_angle =
        (e1.norm() > T::lit(FLAT_RESIDUAL)).then(|| wrap_two_pi(e1.im.atan2(e1.re)));

    let step = T::TAU() / T::count(CENTER_SCAN_POINTS);
    let scan: Vec<T> = (0..CENTER_SCAN_POINTS)
        .into_par_iter()
        .map(|j| marginal.fixed_point_residual(step * T::count(j)))
        .collect();
    let largest = scan.iter().fold(T::zero(), |a, &g| a.max(g.abs()));

    if largest <= T::lit(FLAT_RESIDUAL) {
        let center = check_center(state, T::zero(), theta_c, spec)?;
        return Ok(PacketCenterResult {
            centers: vec![center],
            multiplicity: 1,
            degenerate: true,
            centroid_angle,
        });
    }

    let mut candidates = Vec::new();
    for j in 0..CENTER_SCAN_POINTS {
        let (g0, g1) = (scan[j], scan[(j + 1) % CENTER_SCAN_POINTS]);
        if g0 > T::zero() && g1 <= T::zero() {
            let a = step * T::count(j);
            candidates.push(bisect(|x| marginal.fixed_point_residual(x), a, a + step));
        }
    }

    let mut centers = Vec::new();
    let mut rejected = Vec::new();
    for phi in candidates {
        let c = check_center(state, wrap_two_pi(phi), theta_c, spec)?;
        let antipode_limit = T::one() / T::TAU() + T::lit(ANTIPODE_SLACK);
        if c.fixed_point_residual.abs() <= center_tol::<T>() && c.antipode_density <= antipode_limit
        {
            centers.push(c);
        } else {
            rejected.push(c);
        }
    }
    centers.sort_by(|a, b| a.phi_c.partial_cmp(&b.phi_c).expect("finite"));
    centers
        .dedup_by(|a, b| angular_diff(a.phi_c, b.phi_c).abs() <= center_tol::<T>() * T::lit(10.0));

    if centers.is_empty() {
        let detail: Vec<String> = rejected
            .iter()
            .map(|c| {
                format!(
                    "phi0={:.6} residual={:.3e} antipode={:.6}",
                    c.phi_c, c.fixed_point_residual, c.antipode_density
                )
            })
            .collect();
        return Err(Error::NoAdmissibleCenter(format!(
            "{}: max |M1 - phi0| on scan = {:.3e}; candidates [{}]",
            state.label(),
            largest,
            detail.join(", ")
        )));
    }
    Ok(PacketCenterResult {
        multiplicity: centers.len(),
        centers,
        degenerate: false,
        centroid_angle,
    })
}

fn check_center<T: Real>(
    state: &SphereState<T>,
    phi_c: T,
    theta_c: T,
    spec: &GridSpec<T>,
) -> Result<PacketCenter<T>> {
    let (m1, objective) = windowed_phi_moments(state, phi_c, spec)?;
    Ok(PacketCenter {
        phi_c,
        theta_c,
        objective,
        fixed_point_residual: m1 - phi_c,
        antipode_density: theta_marginal_at(state, phi_c + T::PI(), spec)?,
    })
}

/// Root of `g` in `[a, b]` given `g(a) > 0 ≥ g(b)`.
fn bisect<T: Real>(g: impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    for _ in 0..200 {
        let mid = (a + b) / T::lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        if g(mid) > T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    (a + b) / T::lit(2.0)
}

/// `ρ(φ) = ∫₀^π |ψ(φ, θ)|² sinθ dθ` with refinement in `θ`.
pub fn theta_marginal_at<T: Real>(state: &SphereState<T>, phi: T, spec: &GridSpec<T>) -> Result<T> {
    let mut prev: Option<T> = None;
    for level in 0..=spec.max_refinements {
        let (nt, _) = spec.nodes_at(level);
        let v: T = gauss_legendre::<T>(nt)
            .mapped(T::zero(), T::PI())
            .map(|(t, w)| w * t.sin() * state.density(phi, t))
            .sum();
        if !v.is_finite() {
            return Err(Error::NonIntegrableSample);
        }
        if let Some(p) = prev {
            if (v - p).abs() <= spec.rel_tol * v.abs() + spec.abs_floor() {
                return Ok(v);
            }
        }
        prev = Some(v);
    }
    Ok(prev.expect("at least one level"))
}

/// `min_j V(φ_j)` over `n` equally spaced window positions, from the
/// marginal sampled at the same spacing and composite Simpson sums.
///
/// Independent of the center search; used as a cross-check. `n` must be
/// even.
pub fn scanned_min_variance<T: Real>(
    state: &SphereState<T>,
    n: usize,
    spec: &GridSpec<T>,
) -> Result<T> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "scan size must be even, got {n}"
        )));
    }
    let h = T::TAU() / T::count(n);
    let rho = (0..n)
        .map(|i| theta_marginal_at(state, h * T::count(i), spec))
        .collect::<Result<Vec<T>>>()?;
    let best = (0..n)
        .into_par_iter()
        .map(|j| {
            let (mut m0, mut m1, mut m2) = (T::zero(), T::zero(), T::zero());
            for i in 0..=n {
                let x = h * T::count(i) - T::PI();
                let r = rho[(j + n / 2 + i) % n];
                let w = if i == 0 || i == n {
                    T::one()
                } else if i % 2 == 1 {
                    T::lit(4.0)
                } else {
                    T::lit(2.0)
                };
                m0 = m0 + w * r;
                m1 = m1 + w * x * r;
                m2 = m2 + w * x * x * r;
            }
            m2 / m0 - (m1 / m0) * (m1 / m0)
        })
        .reduce(T::infinity, T::min);
    Ok(best)
}

/// `(_cΔφ)²`: the windowed variance at the packet center.
///
/// All admissible centers of a multi-centered packet give the same value;
/// the smallest is returned.
pub fn centered_phi_variance<T: Real>(state: &SphereState<T>, spec: &GridSpec<T>) -> Result<T> {
    Ok(find_packet_centers(state, spec)?.best().objective)
}

/// `(⟨θ⟩, (Δθ)²)`.
pub fn theta_variance<T: Real>(state: &SphereState<T>, spec: &GridSpec<T>) -> Result<(T, T)> {
    let res = integrate_sphere_vec(
        2,
        |p, t, out| {
            let d = state.density(p, t);
            out[0] = Complex::new(t * d, T::zero());
            out[1] = Complex::new(t * t * d, T::zero());
        },
        T::zero(),
        spec,
    )?;
    let mean = res[0].finite_re("theta mean")?;
    let second = res[1].finite_re("theta second moment")?;
    Ok((mean, second - mean * mean))
}

/// Combined position measures with the complementary momentum variances.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSet<T> {
    pub c_var_phi: T,
    pub var_theta: T,
    /// `(_cΔφ)² + (Δθ)²`.
    pub m_plus: T,
    /// `(_cΔφ)² (Δθ)²`.
    pub m_dot: T,
    pub var_p_phi: T,
    pub var_p_theta: T,
    /// `n` of the `p̂_{nθ}` used for `var_p_theta`.
    pub n_theta_index: u32,
    pub mean_theta: T,
    pub centers: PacketCenterResult<T>,
}

pub fn combined_measures<T: Real>(
    state: &SphereState<T>,
    spec: &GridSpec<T>,
) -> Result<MeasureSet<T>> {
    let centers = find_packet_centers(state, spec)?;
    let phi_c = centers.best().phi_c;
    let c_var_phi = centers.best().objective;
    let (mean_theta, var_theta) = theta_variance(state, spec)?;
    let n_theta_index = 1;
    let finite = |e: crate::quadrature::Estimate<T>, what: &str| {
        e.finite()
            .ok_or_else(|| Error::Divergent(format!("{what} in {}", state.label())))
    };
    let var_p_phi = finite(
        operator_variance(&DiffOperator::p_phi(), state, phi_c, spec)?,
        "p_phi variance",
    )?;
    let var_p_theta = finite(
        operator_variance(&DiffOperator::p_theta(n_theta_index), state, phi_c, spec)?,
        "p_theta variance",
    )?;
    Ok(MeasureSet {
        c_var_phi,
        var_theta,
        m_plus: c_var_phi + var_theta,
        m_dot: c_var_phi * var_theta,
        var_p_phi,
        var_p_theta,
        n_theta_index,
        mean_theta,
        centers,
    })
}

/// `(⟨q₁²⟩, ⟨q₂²⟩)` for the stereographic coordinates
/// `q = 2r cot(θ/2) (cosφ, sinφ)`. Divergence is reported in the status.
pub fn stereo_second_moments<T: Real>(
    state: &SphereState<T>,
    r: T,
    spec: &GridSpec<T>,
) -> Result<(ConvergenceResult<T>, ConvergenceResult<T>)> {
    if r.is_nan() || r <= T::zero() {
        return Err(Error::InvalidParameter(format!(
            "stereographic radius must be positive, got {r}"
        )));
    }
    let mut res = integrate_sphere_vec(
        2,
        |p, t, out| {
            let q = T::lit(2.0) * r / (t / T::lit(2.0)).tan();
            let (s, c) = p.sin_cos();
            let d = state.density(p, t);
            out[0] = Complex::new(q * q * c * c * d, T::zero());
            out[1] = Complex::new(q * q * s * s * d, T::zero());
        },
        T::zero(),
        spec,
    )?;
    let q2 = res.pop().expect("two integrands");
    let q1 = res.pop().expect("two integrands");
    Ok((q1, q2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        make_cs_state, make_f_state, most_delocalized_state, uniform_state, Normalize, StateParams,
    };
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn spec() -> GridSpec<f64> {
        GridSpec::default()
    }

    fn f_state(gamma: f64, k: usize) -> SphereState<f64> {
        make_f_state(&StateParams::f_family(PI, FRAC_PI_2, gamma, k), &spec()).unwrap()
    }

    fn cs(tau: f64) -> SphereState<f64> {
        make_cs_state(&StateParams::coherent(PI, FRAC_PI_2, tau), &spec()).unwrap()
    }

    /// Narrow von Mises ring around `φ = a`, uniform in `θ`.
    fn narrow_packet(a: f64, kappa: f64) -> SphereState<f64> {
        SphereState::new("narrow", move |p: f64, _| {
            Complex::new((kappa * ((p - a).cos() - 1.0) / 2.0).exp(), 0.0)
        })
        .normalize(&spec())
        .unwrap()
    }

    /// Brute-force `V(φ₀)` by composite Simpson over the window.
    fn brute_force_variance(state: &SphereState<f64>, phi0: f64, n: usize) -> f64 {
        let rule = gauss_legendre::<f64>(200);
        let h = 2.0 * PI / n as f64;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for j in 0..=n {
            let p = phi0 - PI + j as f64 * h;
            let rho: f64 = rule
                .mapped(0.0, PI)
                .map(|(t, w)| w * t.sin() * state.density(p, t))
                .sum();
            let w = h / 3.0
                * if j == 0 || j == n {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
            m0 += w * rho;
            m1 += w * p * rho;
            m2 += w * p * p * rho;
        }
        m2 / m0 - (m1 / m0).powi(2)
    }

    #[test]
    fn scan_agrees_with_center_search() {
        for s in [f_state(1.0, 2), cs(1.0)] {
            let scanned = scanned_min_variance(&s, 2000, &spec()).unwrap();
            let found = centered_phi_variance(&s, &spec()).unwrap();
            assert!(
                found <= scanned + 1e-12 && scanned - found < 1e-5,
                "{found} {scanned}"
            );
        }
        assert!(scanned_min_variance(&cs(1.0), 7, &spec()).is_err());
    }

    #[test]
    fn uniform_moments() {
        let uni = uniform_state::<f64>();
        for &p0 in &[0.0, 1.3, -2.0] {
            assert!((moment_phi(&uni, 1, p0, &spec()).unwrap() - p0).abs() < 1e-12);
        }
        let m2 = moment_phi(&uni, 2, 0.0, &spec()).unwrap();
        assert!((m2 - PI * PI / 3.0).abs() < 1e-12);
        for &p0 in &[0.0, 0.7, 4.0] {
            assert!((variance_phi_at(&uni, p0, &spec()).unwrap() - PI * PI / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn variance_is_two_pi_periodic() {
        for s in [f_state(1.0, 2), cs(0.2), f_state(5.0, 1)] {
            for &p0 in &[0.4, 2.5] {
                let a = variance_phi_at(&s, p0, &spec()).unwrap();
                let b = variance_phi_at(&s, p0 + 2.0 * PI, &spec()).unwrap();
                assert!((a - b).abs() < 1e-9, "{}: {a} {b}", s.label());
            }
        }
    }

    #[test]
    fn series_matches_direct_quadrature() {
        for s in [f_state(1.0, 2), f_state(5.0, 1), cs(1.0), cs(0.2)] {
            let m = PhiMarginal::new(&s, &spec()).unwrap();
            for &p0 in &[0.0, 1.0, 2.9, 5.5] {
                let (m1, v) = windowed_phi_moments(&s, p0, &spec()).unwrap();
                assert!((m.variance_at(p0) - v).abs() < 1e-9, "{}", s.label());
                assert!((m.fixed_point_residual(p0) - (m1 - p0)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn series_matches_brute_force() {
        let s = cs(1.0);
        let m = PhiMarginal::new(&s, &spec()).unwrap();
        for &p0 in &[0.3, 3.0] {
            let oracle = brute_force_variance(&s, p0, 4000);
            assert!(
                (m.variance_at(p0) - oracle).abs() < 1e-8,
                "{} vs {oracle}",
                m.variance_at(p0)
            );
        }
    }

    #[test]
    fn fixed_point_at_single_peak() {
        // the first moment in a window centred on the peak returns the peak
        let s = f_state(1.0, 1);
        let m1 = moment_phi(&s, 1, PI, &spec()).unwrap();
        assert!((m1 - PI).abs() < 1e-10);
        let off = moment_phi(&s, 1, PI - 0.5, &spec()).unwrap();
        assert!(off > PI - 0.5);
    }

    #[test]
    fn narrow_packet_minimum_at_peak() {
        let a = 2.2;
        let s = narrow_packet(a, 40.0);
        let centers = find_packet_centers(&s, &spec()).unwrap();
        assert_eq!(centers.multiplicity, 1);
        assert!(angular_diff(centers.centers[0].phi_c, a).abs() < 1e-8);
        let best = centers.best().objective;
        for i in 0..50 {
            let p0 = 2.0 * PI * i as f64 / 50.0;
            assert!(variance_phi_at(&s, p0, &spec()).unwrap() >= best - 1e-12);
        }
    }

    #[test]
    fn two_peak_f_has_two_centers() {
        for gamma in [1.0, 5.0] {
            let r = find_packet_centers(&f_state(gamma, 2), &spec()).unwrap();
            assert_eq!(r.multiplicity, 2);
            assert!(!r.degenerate);
            assert!(
                r.centers[0].phi_c.abs() < 1e-6 || (r.centers[0].phi_c - 2.0 * PI).abs() < 1e-6
            );
            assert!((r.centers[1].phi_c - PI).abs() < 1e-6);
            for c in &r.centers {
                assert!((c.theta_c - FRAC_PI_2).abs() < 1e-8);
                assert!(c.fixed_point_residual.abs() <= CENTER_TOL);
            }
            let (a, b) = (r.centers[0].objective, r.centers[1].objective);
            assert!((a - b).abs() <= 1e-9 * a);
        }
    }

    #[test]
    fn k_fold_centers_are_evenly_spaced() {
        let s = f_state(2.0, 3);
        let r = find_packet_centers(&s, &spec()).unwrap();
        assert_eq!(r.multiplicity, 3);
        for w in r.centers.windows(2) {
            assert!((w[1].phi_c - w[0].phi_c - 2.0 * PI / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn coherent_state_center() {
        for tau in [1.0, 0.2] {
            let r = find_packet_centers(&cs(tau), &spec()).unwrap();
            assert_eq!(r.multiplicity, 1);
            let c = r.centers[0];
            assert!((c.phi_c - PI).abs() < 1e-8 && (c.theta_c - FRAC_PI_2).abs() < 1e-8);
            assert!((r.centroid_angle.unwrap() - PI).abs() < 1e-8);
        }
    }

    #[test]
    fn uniform_and_psi0_are_degenerate() {
        for s in [uniform_state::<f64>(), most_delocalized_state(None)] {
            let r = find_packet_centers(&s, &spec()).unwrap();
            assert!(r.degenerate);
            assert_eq!(r.multiplicity, 1);
            assert_eq!(r.centers[0].phi_c, 0.0);
            assert!((r.centers[0].theta_c - FRAC_PI_2).abs() < 1e-10);
            assert!((r.centers[0].objective - PI * PI / 3.0).abs() < 1e-10);
            assert!(r.centroid_angle.is_none());
        }
    }

    #[test]
    fn theta_variance_closed_forms() {
        let (mean, var) = theta_variance(&uniform_state::<f64>(), &spec()).unwrap();
        assert!((mean - FRAC_PI_2).abs() < 1e-12);
        assert!((var - (PI * PI / 4.0 - 2.0)).abs() < 1e-10);
        let (_, var0) = theta_variance(&most_delocalized_state::<f64>(None), &spec()).unwrap();
        assert!((var0 - PI * PI / 12.0).abs() < 1e-10);
    }

    #[test]
    fn combined_measures_are_consistent() {
        let m = combined_measures(&f_state(1.0, 2), &spec()).unwrap();
        assert!((m.m_plus - (m.c_var_phi + m.var_theta)).abs() < 1e-12);
        assert!((m.m_dot - m.c_var_phi * m.var_theta).abs() < 1e-12);
        assert_eq!(m.n_theta_index, 1);
        assert!(m.var_p_phi > 0.0 && m.var_p_theta > 0.0);
    }

    #[test]
    fn squeezing_decreases_measures() {
        let gammas = [1.0, 2.0, 3.0, 5.0];
        let f: Vec<(f64, f64)> = gammas
            .iter()
            .map(|&g| {
                let s = f_state(g, 2);
                (
                    centered_phi_variance(&s, &spec()).unwrap(),
                    theta_variance(&s, &spec()).unwrap().1,
                )
            })
            .collect();
        for w in f.windows(2) {
            assert!(w[1].0 <= w[0].0 && w[1].1 <= w[0].1, "{f:?}");
        }
        let taus = [1.0, 0.5, 0.2];
        let c: Vec<(f64, f64)> = taus
            .iter()
            .map(|&t| {
                let s = cs(t);
                (
                    centered_phi_variance(&s, &spec()).unwrap(),
                    theta_variance(&s, &spec()).unwrap().1,
                )
            })
            .collect();
        for w in c.windows(2) {
            assert!(w[1].0 <= w[0].0 && w[1].1 <= w[0].1, "{c:?}");
        }
    }

    #[test]
    fn stereographic_moments_diverge_on_pole_nonvanishing_states() {
        for s in [cs(1.0), f_state(1.0, 2), most_delocalized_state(None)] {
            let (q1, q2) = stereo_second_moments(&s, 1.0, &spec()).unwrap();
            assert!(q1.is_divergent() && q2.is_divergent(), "{}", s.label());
        }
    }

    #[test]
    fn stereographic_moments_finite_when_north_pole_vanishes() {
        // density ~ θ⁴ near θ = 0 keeps ⟨cot²(θ/2)⟩ finite
        let s = SphereState::new("cap", |_, t: f64| {
            Complex::new((t / 2.0).sin().powi(2), 0.0)
        })
        .normalize(&spec())
        .unwrap();
        let (q1, q2) = stereo_second_moments(&s, 1.0, &spec()).unwrap();
        assert!(q1.is_converged() && q2.is_converged());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn rotation_shifts_centers(delta in -3.0f64..3.0) {
            let s = cs(1.0);
            let base = combined_measures(&s, &spec()).unwrap();
            let rot = combined_measures(&s.rotated(delta), &spec()).unwrap();
            let shift = angular_diff(rot.centers.centers[0].phi_c, base.centers.centers[0].phi_c + delta);
            prop_assert!(shift.abs() < 1e-8);
            prop_assert!((rot.c_var_phi - base.c_var_phi).abs() < 1e-8 * base.c_var_phi);
            prop_assert!((rot.var_theta - base.var_theta).abs() < 1e-10);
        }

        #[test]
        fn centered_variance_is_minimal(p0 in 0.0f64..(2.0 * PI)) {
            for s in [f_state(1.0, 2), cs(0.2)] {
                let c = centered_phi_variance(&s, &spec()).unwrap();
                prop_assert!(c <= variance_phi_at(&s, p0, &spec()).unwrap() + 1e-12);
                prop_assert!(c <= PI * PI / 3.0);
            }
        }
    }
}
