//! Sparse-regime recovery: a Fantope relaxation solved by ADMM supplies the
//! starting point, a truncated power method refines it.
//!
//! The relaxation is
//!
//! ```text
//! min  −⟨M, Π⟩ + ρ ‖Π‖₁,₁   over   { Π : Tr Π = 1, 0 ⪯ Π ⪯ I }
//! ```
//!
//! split as `Π = Z` with scaled dual `U` and penalty `τ`:
//!
//! ```text
//! Π ← P_F(Z − U + M/τ)
//! Z ← S_{ρ/τ}(Π + U)
//! U ← U + Π − Z
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::{asymmetry, sym_eigen};
use crate::moment::second_moment;
use crate::spectral::{check_start, iterate, normalize, top_two_eigs, RecoveryReport};
use crate::synth::Dataset;

/// Tuning of the two-stage sparse pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseConfig {
    /// ℓ₁,₁ weight of the relaxation.
    pub rho: f64,
    /// Number of coordinates kept by each truncation.
    pub s_hat: usize,
    /// Truncated power iterations.
    pub t_max: usize,
    /// Stop once consecutive truncated iterates agree within this distance.
    pub tol: f64,
    /// ADMM penalty τ.
    pub admm_penalty: f64,
    /// Both ADMM residuals must fall below `admm_tol · p`.
    pub admm_tol: f64,
    pub admm_max_iter: usize,
}

impl SparseConfig {
    pub const DEFAULT_ADMM_PENALTY: f64 = 1.0;
    pub const DEFAULT_ADMM_TOL: f64 = 1e-6;
    pub const DEFAULT_ADMM_MAX_ITER: usize = 2000;

    pub fn new(s_hat: usize, rho: f64) -> Self {
        Self {
            rho,
            s_hat,
            t_max: 500,
            tol: 1e-10,
            admm_penalty: Self::DEFAULT_ADMM_PENALTY,
            admm_tol: Self::DEFAULT_ADMM_TOL,
            admm_max_iter: Self::DEFAULT_ADMM_MAX_ITER,
        }
    }

    /// `ρ = rho_const · sqrt(ln p / n)`.
    pub fn default_rho(p: usize, n: usize, rho_const: f64) -> f64 {
        rho_const * ((p as f64).ln() / n as f64).sqrt()
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(invalid(format!(
                "rho = {} must be finite and >= 0",
                self.rho
            )));
        }
        if self.s_hat < 1 || self.s_hat > p {
            return Err(invalid(format!(
                "s_hat = {} outside [1, p = {p}]",
                self.s_hat
            )));
        }
        if self.t_max < 1 || self.admm_max_iter < 1 {
            return Err(invalid("iteration limits must be at least 1"));
        }
        if self.admm_penalty.is_nan()
            || self.admm_penalty <= 0.0
            || self.admm_tol.is_nan()
            || self.admm_tol <= 0.0
        {
            return Err(invalid("ADMM penalty and tolerance must be positive"));
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(invalid("power-method tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// Entrywise `sign(a) · max(|a| − t, 0)`.
pub fn soft_threshold(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if t.is_nan() || t < 0.0 {
        return Err(invalid(format!("threshold {t} must be non-negative")));
    }
    Ok(soft_threshold_unchecked(a, t))
}

fn soft_threshold_unchecked(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    a.map(|v| {
        if v > t {
            v - t
        } else if v < -t {
            v + t
        } else {
            0.0
        }
    })
}

/// Water-filling on a spectrum: returns `min(max(λᵢ − γ, 0), 1)` and `γ`,
/// with `γ` chosen so the clipped values sum to one.
pub fn fantope_eigenvalues(values: &[f64]) -> (Vec<f64>, f64) {
    assert!(!values.is_empty());
    let clipped_sum = |g: f64| values.iter().map(|&l| (l - g).clamp(0.0, 1.0)).sum::<f64>();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (min - 1.0, max);
    for _ in 0..2000 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if clipped_sum(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut gamma = 0.5 * (lo + hi);
    // Exact solve on the partition found by bisection.
    let (mut free_sum, mut free, mut capped) = (0.0, 0usize, 0usize);
    for &l in values {
        let c = l - gamma;
        if c >= 1.0 {
            capped += 1;
        } else if c > 0.0 {
            free += 1;
            free_sum += l;
        }
    }
    if free > 0 {
        let exact = (free_sum + capped as f64 - 1.0) / free as f64;
        if (exact - gamma).abs() <= 1e-9 * (1.0 + gamma.abs()) {
            gamma = exact;
        }
    }
    (
        values
            .iter()
            .map(|&l| (l - gamma).clamp(0.0, 1.0))
            .collect(),
        gamma,
    )
}

/// Frobenius projection onto `{Π : Tr Π = 1, 0 ⪯ Π ⪯ I}`.
pub fn fantope_project(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(invalid("projection needs a nonempty square matrix"));
    }
    let scale = a.norm();
    let asym = asymmetry(a);
    if asym > 1e-8 * scale {
        return Err(Error::NotSymmetric {
            asymmetry: asym,
            scale,
        });
    }
    Ok(project_symmetric(a))
}

fn project_symmetric(a: &DMatrix<f64>) -> DMatrix<f64> {
    let p = a.nrows();
    let e = sym_eigen(a);
    let (clipped, _) = fantope_eigenvalues(&e.values);
    let kept: Vec<usize> = (0..p).filter(|&k| clipped[k] > 0.0).collect();
    let basis = DMatrix::from_fn(p, kept.len(), |i, c| e.vectors[(i, kept[c])]);
    let scaled = DMatrix::from_fn(p, kept.len(), |i, c| basis[(i, c)] * clipped[kept[c]]);
    let pi = scaled * basis.transpose();
    crate::linalg::symmetrize(&pi)
}

/// Last ADMM iterate of the Fantope relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct FantopeSolution {
    /// Feasible iterate `Π`.
    pub pi: DMatrix<f64>,
    /// Sparse copy `Z`.
    pub z: DMatrix<f64>,
    pub iterations: usize,
    /// `‖Π − Z‖_F`.
    pub primal_residual: f64,
    /// `τ ‖Z − Z_prev‖_F`.
    pub dual_residual: f64,
    pub converged: bool,
}

impl FantopeSolution {
    /// `−⟨M, Π⟩ + ρ ‖Z‖₁,₁`.
    pub fn objective(&self, m: &DMatrix<f64>, rho: f64) -> f64 {
        -m.dot(&self.pi) + rho * self.z.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Solves the penalized Fantope relaxation by ADMM. Hitting `admm_max_iter`
/// is not an error: the last iterate comes back with `converged = false`.
pub fn fantope_admm(m: &DMatrix<f64>, cfg: &SparseConfig) -> Result<FantopeSolution> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(invalid("moment matrix must be nonempty and square"));
    }
    let p = m.nrows();
    cfg.validate(p)?;
    let scale = m.norm();
    let asym = asymmetry(m);
    if asym > 1e-8 * scale {
        return Err(Error::NotSymmetric {
            asymmetry: asym,
            scale,
        });
    }
    let tau = cfg.admm_penalty;
    let target = m / tau;
    let threshold = cfg.rho / tau;
    let stop = cfg.admm_tol * p as f64;

    let mut z = DMatrix::<f64>::zeros(p, p);
    let mut u = DMatrix::<f64>::zeros(p, p);
    let mut pi = DMatrix::<f64>::zeros(p, p);
    let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.admm_max_iter {
        iterations += 1;
        pi = project_symmetric(&(&z - &u + &target));
        let z_next = soft_threshold_unchecked(&(&pi + &u), threshold);
        u += &pi - &z_next;
        primal = (&pi - &z_next).norm();
        dual = tau * (&z_next - &z).norm();
        z = z_next;
        if primal <= stop && dual <= stop {
            converged = true;
            break;
        }
    }
    Ok(FantopeSolution {
        pi,
        z,
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        converged,
    })
}

/// Keeps the `s_hat` largest-magnitude coordinates (ties go to the lower
/// index) and rescales to unit norm.
pub fn truncate(v: &DVector<f64>, s_hat: usize) -> Result<DVector<f64>> {
    if s_hat < 1 || s_hat > v.len() {
        return Err(invalid(format!("s_hat = {s_hat} outside [1, {}]", v.len())));
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    let mut kept = DVector::zeros(v.len());
    for &j in &order[..s_hat] {
        kept[j] = v[j];
    }
    normalize(kept).map_err(|_| Error::TruncationAnnihilated)
}

/// Power iteration with a truncation to `cfg.s_hat` coordinates after every
/// multiply. A start vector with more than `s_hat` nonzeros is truncated
/// first.
pub fn truncated_power_method(
    m: &DMatrix<f64>,
    beta0: &DVector<f64>,
    cfg: &SparseConfig,
) -> Result<RecoveryReport> {
    check_start(m, beta0, cfg.t_max, cfg.tol)?;
    cfg.validate(m.nrows())?;
    let s_hat = cfg.s_hat;
    let start = if beta0.iter().filter(|v| **v != 0.0).count() > s_hat {
        truncate(beta0, s_hat)?
    } else {
        beta0.clone()
    };
    iterate(m, &start, cfg.t_max, cfg.tol, |w| truncate(&w, s_hat))
}

/// Output of the full sparse pipeline with per-stage diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseReport {
    /// Final truncated-power iterate; `converged` is false if either stage stopped early.
    pub report: RecoveryReport,
    /// Truncated leading eigenvector of `Π⁰` that started the refinement.
    pub init: DVector<f64>,
    pub admm_iterations: usize,
    pub admm_primal_residual: f64,
    pub admm_dual_residual: f64,
    pub admm_converged: bool,
    /// `λ₁(Π⁰) − λ₂(Π⁰)`.
    pub pi_eigengap: f64,
}

/// Builds `M` from the data and runs [`sparse_recover_moment`].
pub fn sparse_recover(data: &Dataset, cfg: &SparseConfig) -> Result<SparseReport> {
    let m = second_moment(data)?;
    sparse_recover_moment(m.matrix(), cfg)
}

/// Relaxation, eigenvector of `Π⁰`, truncation, truncated power method.
pub fn sparse_recover_moment(m: &DMatrix<f64>, cfg: &SparseConfig) -> Result<SparseReport> {
    cfg.validate(m.nrows())?;
    if m.iter().all(|v| *v == 0.0) {
        return Err(Error::NoDominantDirection);
    }
    let relaxed = fantope_admm(m, cfg)?;
    if !relaxed.converged {
        log::debug!(
            "ADMM stopped after {} iterations (primal {:.3e}, dual {:.3e})",
            relaxed.iterations,
            relaxed.primal_residual,
            relaxed.dual_residual
        );
    }
    let top = top_two_eigs(&relaxed.pi)?;
    let init = truncate(&top.v1, cfg.s_hat)?;
    let mut report = truncated_power_method(m, &init, cfg)?;
    report.converged &= relaxed.converged;
    Ok(SparseReport {
        report,
        init,
        admm_iterations: relaxed.iterations,
        admm_primal_residual: relaxed.primal_residual,
        admm_dual_residual: relaxed.dual_residual,
        admm_converged: relaxed.converged,
        pi_eigengap: top.lambda1 - top.lambda2,
    })
}
