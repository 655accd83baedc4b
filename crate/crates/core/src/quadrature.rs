//! Gauss–Legendre integration over the unit sphere (with the `sinθ` surface
//! weight) and over sliding `2π` azimuthal windows.
//!
//! Every integral is evaluated on a ladder of tensor grids whose node counts
//! double at each level. The ladder stops as soon as two consecutive levels
//! agree to the relative tolerance of the [`GridSpec`]. If the level values
//! keep growing without their increments shrinking the integral is reported
//! as [`ConvergenceStatus::Divergent`]; this covers both power-law and
//! logarithmic blow-up at the poles.
//!
//! θ nodes are interior Gauss points, so integrands singular at `θ ∈ {0, π}`
//! are never evaluated at the poles themselves.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Computes the rule by Newton iteration on the Legendre recurrence.
    ///
    /// Nodes are returned in ascending order.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let one = T::one();
        let two = T::lit(2.0);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi's initial guess for the i-th largest root.
            let mut x =
                (T::PI() * (T::count(i) + T::lit(0.75)) / (T::count(n) + T::lit(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() && d != T::zero() {
                dp = d;
            }
            let w = two / ((one - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        if n % 2 == 1 {
            // Exact zero for the centre node of odd rules.
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node/weight pairs mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Plain (non-refining) integral of `f` over `[a, b]`.
    pub fn integrate<F: Fn(T) -> T>(&self, a: T, b: T, f: F) -> T {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for l in 1..n {
        let lf = T::count(l);
        let p2 = ((T::lit(2.0) * lf + T::one()) * x * p1 - lf * p0) / (lf + T::one());
        p0 = p1;
        p1 = p2;
    }
    let nf = T::count(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

type RuleCache = HashMap<(TypeId, usize), Arc<dyn Any + Send + Sync>>;

/// Shared, memoized Gauss–Legendre rule.
pub fn gauss_legendre<T: Real>(n: usize) -> Arc<GaussLegendre<T>> {
    static CACHE: OnceLock<Mutex<RuleCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (TypeId::of::<T>(), n);
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&key) {
        return rule
            .clone()
            .downcast::<GaussLegendre<T>>()
            .expect("cache keyed by type");
    }
    let rule = Arc::new(GaussLegendre::<T>::new(n));
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(key, rule.clone() as Arc<dyn Any + Send + Sync>);
    rule
}

/// Tensor-grid resolution and refinement policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    /// Gauss–Legendre nodes on `θ ∈ [0, π]` at the base level.
    pub n_theta: usize,
    /// Gauss–Legendre nodes per `2π` azimuthal window at the base level.
    pub n_phi: usize,
    /// Number of node-doubling steps after the base level.
    pub max_refinements: usize,
    /// Relative agreement required between consecutive levels.
    pub rel_tol: T,
}

impl<T: Real> GridSpec<T> {
    pub const MIN_NODES: usize = 8;

    pub fn new(n_theta: usize, n_phi: usize, max_refinements: usize, rel_tol: T) -> Result<Self> {
        let spec = Self {
            n_theta,
            n_phi,
            max_refinements,
            rel_tol,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_theta < Self::MIN_NODES || self.n_phi < Self::MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "node counts must be at least {} (got n_theta = {}, n_phi = {})",
                Self::MIN_NODES,
                self.n_theta,
                self.n_phi
            )));
        }
        if self.rel_tol.is_nan() || self.rel_tol <= T::zero() {
            return Err(Error::InvalidGrid(format!(
                "rel_tol must be positive (got {})",
                self.rel_tol
            )));
        }
        Ok(())
    }

    /// Node counts `(n_theta, n_phi)` at refinement level `level`.
    pub fn nodes_at(&self, level: usize) -> (usize, usize) {
        (self.n_theta << level, self.n_phi << level)
    }

    /// Same spec without refinement; used where a single fixed grid is wanted.
    pub fn single_level(&self) -> Self {
        Self {
            max_refinements: 0,
            ..*self
        }
    }

    /// Absolute guard added to the relative convergence test.
    pub fn abs_floor(&self) -> T {
        T::epsilon() * T::lit(500.0)
    }
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        let rel_tol = if T::epsilon() < T::lit(1e-12) {
            1e-9
        } else {
            1e-5
        };
        Self {
            n_theta: 128,
            n_phi: 128,
            max_refinements: 4,
            rel_tol: T::lit(rel_tol),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvergenceStatus {
    Converged,
    MaxRefinements,
    Divergent,
}

/// Outcome of a refined integral.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult<T> {
    /// Last finite level value; the largest-magnitude level when divergent.
    pub value: Complex<T>,
    /// `|last − previous|`, infinite when divergent.
    pub abs_error_estimate: T,
    pub status: ConvergenceStatus,
    /// Value at every finite level, coarsest first.
    pub levels: Vec<Complex<T>>,
}

impl<T: Real> ConvergenceResult<T> {
    pub fn is_divergent(&self) -> bool {
        self.status == ConvergenceStatus::Divergent
    }

    pub fn is_converged(&self) -> bool {
        self.status == ConvergenceStatus::Converged
    }

    /// Real part of the value, or an error when the integral diverges.
    pub fn finite_re(&self, what: &str) -> Result<T> {
        if self.is_divergent() {
            Err(Error::Divergent(what.to_string()))
        } else {
            Ok(self.value.re)
        }
    }

    pub fn finite(&self, what: &str) -> Result<Complex<T>> {
        if self.is_divergent() {
            Err(Error::Divergent(what.to_string()))
        } else {
            Ok(self.value)
        }
    }
}

/// A non-negative quantity that is either finite or divergent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimate<T> {
    Finite(T),
    Divergent,
}

impl<T: Copy> Estimate<T> {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Estimate::Divergent)
    }

    pub fn finite(&self) -> Option<T> {
        match self {
            Estimate::Finite(v) => Some(*v),
            Estimate::Divergent => None,
        }
    }
}

/// Increments of `|levels|` that stay positive and never shrink by more than
/// this factor are read as unbounded growth.
const DIVERGENCE_INCREMENT_RATIO: f64 = 0.95;

fn has_converged<T: Real>(prev: Complex<T>, last: Complex<T>, spec: &GridSpec<T>) -> bool {
    (last - prev).norm() <= spec.rel_tol * last.norm() + spec.abs_floor()
}

fn looks_divergent<T: Real>(levels: &[Complex<T>], spec: &GridSpec<T>) -> bool {
    if levels.len() < 4 {
        return false;
    }
    let mags: Vec<T> = levels[levels.len() - 4..]
        .iter()
        .map(|z| z.norm())
        .collect();
    let incs: Vec<T> = mags.windows(2).map(|w| w[1] - w[0]).collect();
    let ratio = T::lit(DIVERGENCE_INCREMENT_RATIO);
    let growing = incs
        .iter()
        .all(|&d| d > spec.rel_tol * mags[3] + spec.abs_floor());
    growing && incs.windows(2).all(|w| w[1] >= ratio * w[0])
}

fn classify<T: Real>(levels: Vec<Complex<T>>, spec: &GridSpec<T>) -> ConvergenceResult<T> {
    let n = levels.len();
    if n >= 2 && has_converged(levels[n - 2], levels[n - 1], spec) {
        return ConvergenceResult {
            value: levels[n - 1],
            abs_error_estimate: (levels[n - 1] - levels[n - 2]).norm(),
            status: ConvergenceStatus::Converged,
            levels,
        };
    }
    if looks_divergent(&levels, spec) {
        let value = levels
            .iter()
            .copied()
            .fold(Complex::new(T::zero(), T::zero()), |a, b| {
                if b.norm() > a.norm() {
                    b
                } else {
                    a
                }
            });
        return ConvergenceResult {
            value,
            abs_error_estimate: T::infinity(),
            status: ConvergenceStatus::Divergent,
            levels,
        };
    }
    let err = if n >= 2 {
        (levels[n - 1] - levels[n - 2]).norm()
    } else {
        T::infinity()
    };
    ConvergenceResult {
        value: levels[n - 1],
        abs_error_estimate: err,
        status: ConvergenceStatus::MaxRefinements,
        levels,
    }
}

/// Drives the level ladder for a vector of integrals sharing one sampler.
///
/// `level_sum(level, out)` fills `out` with the level's quadrature sums and
/// returns `false` when a sample was not finite.
fn refine_vec<T, L>(
    dim: usize,
    spec: &GridSpec<T>,
    level_sum: L,
) -> Result<Vec<ConvergenceResult<T>>>
where
    T: Real,
    L: Fn(usize, &mut [Complex<T>]) -> bool,
{
    spec.validate()?;
    let zero = Complex::new(T::zero(), T::zero());
    let mut levels: Vec<Vec<Complex<T>>> = vec![Vec::new(); dim];
    let mut buf = vec![zero; dim];
    for level in 0..=spec.max_refinements {
        buf.iter_mut().for_each(|b| *b = zero);
        if !level_sum(level, &mut buf) {
            continue;
        }
        for (lv, &b) in levels.iter_mut().zip(&buf) {
            lv.push(b);
        }
        let settled = levels.iter().all(|lv| {
            let n = lv.len();
            (n >= 2 && has_converged(lv[n - 2], lv[n - 1], spec)) || looks_divergent(lv, spec)
        });
        if settled {
            break;
        }
    }
    if levels.first().is_none_or(|lv| lv.is_empty()) {
        return Err(Error::NonIntegrableSample);
    }
    Ok(levels.into_iter().map(|lv| classify(lv, spec)).collect())
}

/// Integrates `dim` complex integrands over the sphere in one pass:
/// `∫₀^π sinθ dθ ∫_{φ₀−π}^{φ₀+π} f(φ, θ) dφ`.
///
/// `f(φ, θ, out)` writes the `dim` integrand values at one node. The `sinθ`
/// weight is applied by this routine.
pub fn integrate_sphere_vec<T, F>(
    dim: usize,
    f: F,
    window_center: T,
    spec: &GridSpec<T>,
) -> Result<Vec<ConvergenceResult<T>>>
where
    T: Real,
    F: Fn(T, T, &mut [Complex<T>]) + Sync,
{
    refine_vec(dim, spec, |level, out| {
        let (nt, np) = spec.nodes_at(level);
        sphere_level_sum(dim, &f, window_center, nt, np, out)
    })
}

/// One tensor-grid sum. Rows (fixed θ) are evaluated in parallel and reduced
/// in node order, so the result is independent of the thread schedule.
fn sphere_level_sum<T, F>(
    dim: usize,
    f: &F,
    window_center: T,
    nt: usize,
    np: usize,
    out: &mut [Complex<T>],
) -> bool
where
    T: Real,
    F: Fn(T, T, &mut [Complex<T>]) + Sync,
{
    let rule_t = gauss_legendre::<T>(nt);
    let rule_p = gauss_legendre::<T>(np);
    let phi_nodes: Vec<(T, T)> = rule_p
        .mapped(window_center - T::PI(), window_center + T::PI())
        .collect();
    let theta_nodes: Vec<(T, T)> = rule_t.mapped(T::zero(), T::PI()).collect();
    let zero = Complex::new(T::zero(), T::zero());
    let rows: Vec<Option<Vec<Complex<T>>>> = theta_nodes
        .par_iter()
        .map(|&(theta, wt)| {
            let mut row = vec![zero; dim];
            let mut vals = vec![zero; dim];
            for &(phi, wp) in &phi_nodes {
                f(phi, theta, &mut vals);
                for (r, v) in row.iter_mut().zip(&vals) {
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return None;
                    }
                    *r = *r + v.scale(wp);
                }
            }
            let w = wt * theta.sin();
            Some(row.into_iter().map(|r| r.scale(w)).collect())
        })
        .collect();
    for row in rows {
        match row {
            Some(row) => {
                for (o, r) in out.iter_mut().zip(row) {
                    *o = *o + r;
                }
            }
            None => return false,
        }
    }
    true
}

/// `∫₀^π sinθ dθ ∫_{φ₀−π}^{φ₀+π} f(φ, θ) dφ` with refinement.
pub fn integrate_sphere<T, F>(
    f: F,
    window_center: T,
    spec: &GridSpec<T>,
) -> Result<ConvergenceResult<T>>
where
    T: Real,
    F: Fn(T, T) -> Complex<T> + Sync,
{
    let mut res = integrate_sphere_vec(
        1,
        |phi, theta, out| out[0] = f(phi, theta),
        window_center,
        spec,
    )?;
    Ok(res.pop().expect("one integrand"))
}

/// Integrates `dim` complex integrands over the window `[φ₀ − π, φ₀ + π]`.
pub fn integrate_circle_vec<T, F>(
    dim: usize,
    g: F,
    window_center: T,
    spec: &GridSpec<T>,
) -> Result<Vec<ConvergenceResult<T>>>
where
    T: Real,
    F: Fn(T, &mut [Complex<T>]),
{
    let zero = Complex::new(T::zero(), T::zero());
    refine_vec(dim, spec, |level, out| {
        let (_, np) = spec.nodes_at(level);
        let rule = gauss_legendre::<T>(np);
        let mut vals = vec![zero; dim];
        for (phi, w) in rule.mapped(window_center - T::PI(), window_center + T::PI()) {
            g(phi, &mut vals);
            for (o, v) in out.iter_mut().zip(&vals) {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return false;
                }
                *o = *o + v.scale(w);
            }
        }
        true
    })
}

/// `∫_{φ₀−π}^{φ₀+π} g(φ) dφ` with refinement.
pub fn integrate_circle<T, F>(
    g: F,
    window_center: T,
    spec: &GridSpec<T>,
) -> Result<ConvergenceResult<T>>
where
    T: Real,
    F: Fn(T) -> Complex<T>,
{
    let mut res = integrate_circle_vec(1, |phi, out| out[0] = g(phi), window_center, spec)?;
    Ok(res.pop().expect("one integrand"))
}
