//! Gram–Robertson matrices and the uncertainty relations built on them.
//!
//! For observables `X₁..X_n` the Gram matrix
//! `G_ij = ⟨(X_i − ⟨X_i⟩)ψ|(X_j − ⟨X_j⟩)ψ⟩` is Hermitian positive
//! semidefinite. Its real part `S` generalizes the covariance matrix and its
//! imaginary part `A` the mean-commutator matrix; PSD-ness implies
//! `e_r(S) ≥ e_r(A)` for every characteristic coefficient `e_r` (sum of the
//! `r × r` principal minors).

use num_complex::Complex;
use num_traits::Num;

use crate::error::{Error, Result};
use crate::measures::find_packet_centers;
use crate::operators::{
    gram_data, mean_sin_power, operator_variance, DiffOperator, GramData, Observable,
};
use crate::quadrature::GridSpec;
use crate::scalar::Real;
use crate::states::SphereState;

/// Relative slack granted to every inequality verdict.
pub const VERDICT_SLACK: f64 = 1e-10;

/// Largest matrix accepted by [`characteristic_coefficients`].
pub const MAX_CHARACTERISTIC_DIM: usize = 8;

/// `e_r(M)` for `r = 1..=n`: the sums of all `r × r` principal minors, so
/// `e_1` is the trace and `e_n` the determinant.
///
/// Works over any field or integral domain (`f64`, `Ratio<i64>`, `i64`).
///
/// # Panics
/// If `m` is not square or larger than [`MAX_CHARACTERISTIC_DIM`].
pub fn characteristic_coefficients<S: Num + Clone>(m: &[Vec<S>]) -> Vec<S> {
    let n = m.len();
    assert!(m.iter().all(|row| row.len() == n), "matrix must be square");
    assert!(
        n <= MAX_CHARACTERISTIC_DIM,
        "at most {MAX_CHARACTERISTIC_DIM}x{MAX_CHARACTERISTIC_DIM}"
    );
    let mut e = vec![S::zero(); n];
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let sub: Vec<Vec<S>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect())
            .collect();
        let r = idx.len();
        e[r - 1] = e[r - 1].clone() + determinant(sub);
    }
    e
}

/// Determinant by fraction-free (Bareiss) elimination; every division is
/// exact in an integral domain.
pub fn determinant<S: Num + Clone>(mut a: Vec<Vec<S>>) -> S {
    let n = a.len();
    if n == 0 {
        return S::one();
    }
    let mut negate = false;
    let mut prev = S::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return S::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                a[i][j] = v / prev.clone();
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        S::zero() - det
    } else {
        det
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// in ascending order.
pub fn symmetric_eigenvalues<T: Real>(m: &[Vec<T>]) -> Vec<T> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: T = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= T::epsilon() * T::epsilon() * (diag + off) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (head, tail) = a.split_at_mut(q);
                for (x, y) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (apk, aqk) = (*x, *y);
                    *x = c * apk - s * aqk;
                    *y = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    ev
}

/// Smallest eigenvalue of a Hermitian matrix `S + iA`, via the real
/// symmetric embedding `[[S, −A], [A, S]]`, which repeats each eigenvalue.
pub fn hermitian_min_eigenvalue<T: Real>(s: &[Vec<T>], a: &[Vec<T>]) -> T {
    let n = s.len();
    let mut big = vec![vec![T::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            big[i][j] = s[i][j];
            big[i + n][j + n] = s[i][j];
            big[i][j + n] = -a[i][j];
            big[i + n][j] = a[i][j];
        }
    }
    symmetric_eigenvalues(&big)[0]
}

/// One inequality `lhs ≥ rhs` with its margin `lhs − rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T> {
    pub name: String,
    pub lhs: T,
    pub rhs: T,
    pub margin: T,
    pub pass: bool,
}

impl<T: Real> Verdict<T> {
    pub fn new(name: impl Into<String>, lhs: T, rhs: T) -> Self {
        let slack = T::lit(VERDICT_SLACK) * (T::one() + lhs.abs() + rhs.abs());
        Self {
            name: name.into(),
            lhs,
            rhs,
            margin: lhs - rhs,
            pass: lhs >= rhs - slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport<T> {
    pub operators: Vec<String>,
    pub g: Vec<Vec<Complex<T>>>,
    pub s: Vec<Vec<T>>,
    pub a: Vec<Vec<T>>,
    pub char_s: Vec<T>,
    pub char_a: Vec<T>,
    pub min_eigenvalue: T,
    /// PSD check followed by `e_r(S) ≥ e_r(A)` for `r = 1..=n`.
    pub verdicts: Vec<Verdict<T>>,
    pub window_center: T,
}

impl<T: Real> GramReport<T> {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// `min eigenvalue ≥ −1e−10·trace`.
    pub fn is_psd(&self) -> bool {
        let trace: T = (0..self.s.len()).map(|i| self.s[i][i]).sum();
        self.min_eigenvalue >= -T::lit(VERDICT_SLACK) * trace.abs().max(T::one())
    }
}

/// Window center for a set of observables: the packet center when the
/// azimuthal coordinate is involved, `0` otherwise.
pub fn window_for<T: Real>(
    state: &SphereState<T>,
    ops: &[Observable<T>],
    spec: &GridSpec<T>,
) -> Result<T> {
    if ops.iter().any(Observable::involves_phi) {
        Ok(find_packet_centers(state, spec)?.best().phi_c)
    } else {
        Ok(T::zero())
    }
}

fn finite_gram<T: Real>(
    state: &SphereState<T>,
    ops: &[Observable<T>],
    window: T,
    spec: &GridSpec<T>,
) -> Result<GramData<T>> {
    let data = gram_data(state, ops, window, spec)?;
    if let Some(i) = data.divergent.iter().position(|&d| d) {
        return Err(Error::Divergent(format!(
            "{} applied to {} is not normalizable",
            data.labels[i],
            state.label()
        )));
    }
    Ok(data)
}

/// Gram–Robertson report for `ops` on `state`.
pub fn gram_matrix<T: Real>(
    state: &SphereState<T>,
    ops: &[Observable<T>],
    spec: &GridSpec<T>,
) -> Result<GramReport<T>> {
    if ops.is_empty() || ops.len() > MAX_CHARACTERISTIC_DIM {
        return Err(Error::InvalidParameter(format!(
            "need 1..={MAX_CHARACTERISTIC_DIM} operators, got {}",
            ops.len()
        )));
    }
    let window = window_for(state, ops, spec)?;
    let data = finite_gram(state, ops, window, spec)?;
    let n = data.dim();
    let g: Vec<Vec<Complex<T>>> = (0..n)
        .map(|i| (0..n).map(|j| data.entry(i, j)).collect())
        .collect();
    let s: Vec<Vec<T>> = g
        .iter()
        .map(|row| row.iter().map(|z| z.re).collect())
        .collect();
    let a: Vec<Vec<T>> = g
        .iter()
        .map(|row| row.iter().map(|z| z.im).collect())
        .collect();
    let char_s = characteristic_coefficients(&s);
    let char_a = characteristic_coefficients(&a);
    let min_eigenvalue = hermitian_min_eigenvalue(&s, &a);
    let trace: T = (0..n).map(|i| s[i][i]).sum();
    let mut verdicts = vec![Verdict::new(
        "G positive semidefinite",
        min_eigenvalue,
        -T::lit(VERDICT_SLACK) * trace,
    )];
    for r in 0..n {
        verdicts.push(Verdict::new(
            format!("e_{}(S) >= e_{}(A)", r + 1, r + 1),
            char_s[r],
            char_a[r],
        ));
    }
    Ok(GramReport {
        operators: data.labels,
        g,
        s,
        a,
        char_s,
        char_a,
        min_eigenvalue,
        verdicts,
        window_center: window,
    })
}

/// Generalized Schrödinger relation
/// `(ΔX₁)²(ΔX₂)² ≥ ¼|⟨[X₁, X₂]⟩|² + Cov²` in Gram form.
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerCheck<T> {
    pub verdict: Verdict<T>,
    pub var1: T,
    pub var2: T,
    pub g_cov: T,
    /// `2 Im G₁₂`.
    pub g_comm: T,
    pub window_center: T,
}

pub fn check_schrodinger_ur<T: Real>(
    state: &SphereState<T>,
    x1: &Observable<T>,
    x2: &Observable<T>,
    spec: &GridSpec<T>,
) -> Result<SchrodingerCheck<T>> {
    let ops = [x1.clone(), x2.clone()];
    let window = window_for(state, &ops, spec)?;
    let data = finite_gram(state, &ops, window, spec)?;
    let (var1, var2) = (data.entry(0, 0).re, data.entry(1, 1).re);
    let g12 = data.entry(0, 1);
    let g_comm = g12.im + g12.im;
    let lhs = var1 * var2;
    let rhs = g_comm * g_comm / T::lit(4.0) + g12.re * g12.re;
    Ok(SchrodingerCheck {
        verdict: Verdict::new(
            format!("Schrodinger UR ({}, {})", x1.label(), x2.label()),
            lhs,
            rhs,
        ),
        var1,
        var2,
        g_cov: g12.re,
        g_comm,
        window_center: window,
    })
}

/// Lower bounds `⟨sinⁿθ⟩²/4` of the `θ–p̂_{nθ}` relation for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow<T> {
    pub state: String,
    /// Index `n − 1`.
    pub bounds: Vec<T>,
    pub best_n: u32,
}

/// Both selection criteria for the momentum complementary to `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementaryStudy<T> {
    /// `(Δp̂_{nθ})²` on `ψ₀` for `n = 1..=n_max`.
    pub psi0_variances: Vec<T>,
    /// All `n` attaining the minimum of `psi0_variances`.
    pub minimal_n: Vec<u32>,
    pub bound_rows: Vec<BoundRow<T>>,
    /// Both criteria agree on `n = 1`.
    pub selects_n1: bool,
}

/// Relative tolerance for ties between tabulated values.
const TIE_TOL: f64 = 1e-8;

/// Tabulates `(Δp̂_{nθ})²` on `ψ₀` (minimal `n`) and the bounds
/// `⟨sinⁿθ⟩²/4` on every state (maximizing `n`). `states` must contain the
/// state labelled `psi0`.
pub fn best_complementary_study<T: Real>(
    states: &[SphereState<T>],
    n_max: u32,
    spec: &GridSpec<T>,
) -> Result<ComplementaryStudy<T>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let psi0 = states
        .iter()
        .find(|s| s.label() == "psi0")
        .ok_or_else(|| Error::InvalidParameter("the study needs the psi0 state".into()))?;
    let psi0_variances = (1..=n_max)
        .map(|n| {
            operator_variance(&DiffOperator::p_theta(n), psi0, T::zero(), spec)?
                .finite()
                .ok_or_else(|| Error::Divergent(format!("p_theta_n{n} variance on psi0")))
        })
        .collect::<Result<Vec<T>>>()?;
    let min = psi0_variances.iter().copied().fold(T::infinity(), T::min);
    let minimal_n: Vec<u32> = (1..=n_max)
        .zip(&psi0_variances)
        .filter(|(_, &v)| v <= min * (T::one() + T::lit(TIE_TOL)))
        .map(|(n, _)| n)
        .collect();

    let mut bound_rows = Vec::with_capacity(states.len());
    for s in states {
        let bounds = (1..=n_max)
            .map(|n| mean_sin_power(s, n, spec).map(|m| m * m / T::lit(4.0)))
            .collect::<Result<Vec<T>>>()?;
        let best = (0..bounds.len())
            .max_by(|&i, &j| {
                bounds[i]
                    .partial_cmp(&bounds[j])
                    .expect("finite bounds")
                    .then(j.cmp(&i))
            })
            .expect("n_max >= 1");
        bound_rows.push(BoundRow {
            state: s.label().to_string(),
            bounds,
            best_n: best as u32 + 1,
        });
    }
    let selects_n1 = minimal_n.contains(&1) && bound_rows.iter().all(|r| r.best_n == 1);
    Ok(ComplementaryStudy {
        psi0_variances,
        minimal_n,
        bound_rows,
        selects_n1,
    })
}
