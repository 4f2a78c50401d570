//! Dense-regime recovery: power iteration on a moment matrix and a direct
//! top-eigenpair extraction.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::{is_unit, sign_normalize, sym_eigen};

/// Iteration limits for [`power_method`]. `tol = 0` runs exactly `t_max` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub t_max: usize,
    pub tol: f64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            t_max: 500,
            tol: 1e-10,
        }
    }
}

/// Final iterate and per-iteration trace of a (truncated) power method.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    /// Unit vector, sign-normalized (largest-magnitude coordinate positive).
    pub beta_hat: DVector<f64>,
    pub iterations: usize,
    /// `βᵗᵀ M βᵗ` for `t = 1, ..., iterations`.
    pub rayleigh_trace: Vec<f64>,
    /// Sign-aligned step lengths `min ‖βᵗ ∓ βᵗ⁻¹‖`.
    pub step_norms: Vec<f64>,
    pub converged: bool,
}

impl RecoveryReport {
    /// `‖β̂ − target‖`, or the smaller of `‖β̂ ∓ target‖` when `sign_invariant`.
    pub fn distance_to(&self, target: &DVector<f64>, sign_invariant: bool) -> f64 {
        let plain = (&self.beta_hat - target).norm();
        if sign_invariant {
            plain.min((&self.beta_hat + target).norm())
        } else {
            plain
        }
    }
}

pub(crate) fn normalize(w: DVector<f64>) -> Result<DVector<f64>> {
    let norm = w.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::NoDominantDirection);
    }
    Ok(w / norm)
}

pub(crate) fn check_start(
    m: &DMatrix<f64>,
    beta0: &DVector<f64>,
    t_max: usize,
    tol: f64,
) -> Result<()> {
    if !m.is_square() || m.nrows() != beta0.len() {
        return Err(invalid(format!(
            "matrix is {}x{} but the start vector has length {}",
            m.nrows(),
            m.ncols(),
            beta0.len()
        )));
    }
    if !is_unit(beta0, 1e-8) {
        return Err(invalid(format!(
            "start vector has norm {}, expected 1",
            beta0.norm()
        )));
    }
    if t_max == 0 {
        return Err(invalid("t_max must be at least 1"));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(invalid("tolerance must be non-negative"));
    }
    if m.iter().all(|v| *v == 0.0) {
        return Err(Error::NoDominantDirection);
    }
    Ok(())
}

/// Shared loop of the plain and truncated power methods. `project` maps
/// `M βᵗ⁻¹` to the next unit iterate.
pub(crate) fn iterate<F>(
    m: &DMatrix<f64>,
    beta0: &DVector<f64>,
    t_max: usize,
    tol: f64,
    mut project: F,
) -> Result<RecoveryReport>
where
    F: FnMut(DVector<f64>) -> Result<DVector<f64>>,
{
    let mut beta = beta0.clone();
    let mut rayleigh_trace = Vec::with_capacity(t_max.min(1024));
    let mut step_norms = Vec::with_capacity(t_max.min(1024));
    let mut converged = false;
    for _ in 0..t_max {
        let image = m * &beta;
        if image.iter().all(|v| *v == 0.0) {
            return Err(Error::NoDominantDirection);
        }
        let next = project(image)?;
        let step = (&next - &beta).norm().min((&next + &beta).norm());
        rayleigh_trace.push(next.dot(&(m * &next)));
        step_norms.push(step);
        beta = next;
        if step <= tol {
            converged = true;
            break;
        }
    }
    sign_normalize(&mut beta);
    Ok(RecoveryReport {
        beta_hat: beta,
        iterations: rayleigh_trace.len(),
        rayleigh_trace,
        step_norms,
        converged,
    })
}

/// Power iteration `βᵗ = M βᵗ⁻¹ / ‖M βᵗ⁻¹‖`, stopping after `t_max` steps or
/// once consecutive iterates agree (up to sign) within `tol`.
pub fn power_method(
    m: &DMatrix<f64>,
    beta0: &DVector<f64>,
    opts: &PowerOptions,
) -> Result<RecoveryReport> {
    check_start(m, beta0, opts.t_max, opts.tol)?;
    iterate(m, beta0, opts.t_max, opts.tol, normalize)
}

/// Two largest eigenvalues and the leading eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct TopEigs {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Sign-normalized.
    pub v1: DVector<f64>,
}

/// Top two eigenpairs of a symmetric matrix from a full eigendecomposition.
pub fn top_two_eigs(m: &DMatrix<f64>) -> Result<TopEigs> {
    if !m.is_square() {
        return Err(invalid("matrix must be square"));
    }
    if m.nrows() < 2 {
        return Err(invalid("need p >= 2 for two eigenvalues"));
    }
    let e = sym_eigen(m);
    let mut v1 = e.vectors.column(0).into_owned();
    sign_normalize(&mut v1);
    Ok(TopEigs {
        lambda1: e.values[0],
        lambda2: e.values[1],
        v1,
    })
}
