//! Seeded Monte Carlo drivers for the eigenstructure, dense-rate, sparse-rate
//! and diagnostics experiments, plus CSV emission.
//!
//! Every trial owns an RNG stream keyed by the experiment, the model, the
//! parameter values of its grid point and the trial index. Rows therefore do
//! not depend on scheduling or on which other grid points are present.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::float17;
use crate::link::{
    moments, theory_diagnostics, theta_median, DiagnosticConstants, LinkModel, MomentSummary,
    TheoryDiagnostics, DEFAULT_QUAD_ORDER,
};
use crate::moment::{pairwise_moment, MomentKind};
use crate::rng::{derive, stream_key, TrialRng};
use crate::sparse::{sparse_recover_moment, SparseConfig};
use crate::spectral::{power_method, top_two_eigs, PowerOptions};
use crate::synth::{
    generate_dataset, sample_beta_dense, sample_beta_sparse, uniform_sphere, Dataset, GroundTruth,
};

/// Exact CSV header of [`write_csv`].
pub const CSV_HEADER: &str =
    "experiment,model,param_name,param_value,n,p,s,trial,abscissa,lambda1_over4,lambda2_over4,err,err_signfree,iters,converged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Eigs,
    Lowdim,
    Sparse,
    Diag,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Eigs => "eigs",
            Experiment::Lowdim => "lowdim",
            Experiment::Sparse => "sparse",
            Experiment::Diag => "diag",
        }
    }

    fn stream_id(self) -> u64 {
        match self {
            Experiment::Eigs => 1,
            Experiment::Lowdim => 2,
            Experiment::Sparse => 3,
            Experiment::Diag => 4,
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigs" => Ok(Experiment::Eigs),
            "lowdim" => Ok(Experiment::Lowdim),
            "sparse" => Ok(Experiment::Sparse),
            "diag" => Ok(Experiment::Diag),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Link family; its noise parameter comes from the matching grid of [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Flr,
    Cs,
    Pr,
}

impl ModelKind {
    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Flr => "flr",
            ModelKind::Cs => "cs",
            ModelKind::Pr => "pr",
        }
    }

    /// Name of the noise parameter, as written in the `param_name` column.
    pub fn param_name(self) -> &'static str {
        match self {
            ModelKind::Flr => "pe",
            ModelKind::Cs => "sigma",
            ModelKind::Pr => "theta",
        }
    }

    pub fn link(self, noise: f64, zeta: f64) -> Result<LinkModel> {
        match self {
            ModelKind::Flr => LinkModel::flipped_logistic(zeta, noise),
            ModelKind::Cs => LinkModel::one_bit_cs(noise),
            ModelKind::Pr => LinkModel::one_bit_pr(noise),
        }
    }

    fn stream_id(self) -> u64 {
        match self {
            ModelKind::Flr => 1,
            ModelKind::Cs => 2,
            ModelKind::Pr => 3,
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flr" => Ok(ModelKind::Flr),
            "cs" => Ok(ModelKind::Cs),
            "pr" => Ok(ModelKind::Pr),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected flr, cs or pr)"
            ))),
        }
    }
}

/// Which moment matrix feeds the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// `M′` for phase retrieval below the median threshold, `M` otherwise.
    #[default]
    Auto,
    M,
    MPrime,
}

impl Estimator {
    /// Resolves the matrix kind for a concrete link.
    pub fn kind_for(self, link: &LinkModel) -> Result<MomentKind> {
        Ok(match self {
            Estimator::M => MomentKind::Difference,
            Estimator::MPrime => MomentKind::Sum,
            Estimator::Auto => {
                if moments(link, DEFAULT_QUAD_ORDER)?.phi < 0.0 {
                    MomentKind::Sum
                } else {
                    MomentKind::Difference
                }
            }
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Estimator::Auto),
            "m" => Ok(Estimator::M),
            "m-prime" | "mprime" => Ok(Estimator::MPrime),
            other => Err(Error::Config(format!(
                "unknown estimator '{other}' (expected auto, m or m-prime)"
            ))),
        }
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub experiment: Experiment,
    pub model: ModelKind,
    /// Flip probabilities (flipped logistic).
    pub pe: Vec<f64>,
    /// Noise standard deviations (one-bit CS); the noise variance is `σ²`.
    pub sigma: Vec<f64>,
    /// Thresholds (one-bit phase retrieval).
    pub theta: Vec<f64>,
    /// Offset of the flipped logistic link.
    pub zeta: f64,
    pub n: Vec<usize>,
    pub p: Vec<usize>,
    /// Sparsity levels; used by `sparse` and, optionally, `diag`.
    pub s: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub t_max: usize,
    pub tol: f64,
    /// `ρ = rho_const · sqrt(ln p / n)` unless `rho` is set.
    pub rho_const: f64,
    pub rho: Option<f64>,
    /// Truncation level; `2s` (capped at `p`) when absent.
    pub s_hat: Option<usize>,
    pub admm_penalty: f64,
    pub admm_tol: f64,
    pub admm_max_iter: usize,
    pub estimator: Estimator,
    pub quad_order: usize,
    /// Run trials on the calling thread only.
    pub serial: bool,
}

impl RunConfig {
    /// Desk-scale defaults for an experiment.
    pub fn defaults(experiment: Experiment, model: ModelKind) -> Self {
        let mut cfg = Self {
            experiment,
            model,
            pe: vec![0.1],
            sigma: vec![0.1f64.sqrt()],
            theta: vec![1.0],
            zeta: 0.0,
            n: vec![3000],
            p: vec![20],
            s: vec![],
            trials: 100,
            seed: 20240601,
            t_max: 500,
            tol: 1e-10,
            rho_const: 1.0,
            rho: None,
            s_hat: None,
            admm_penalty: SparseConfig::DEFAULT_ADMM_PENALTY,
            admm_tol: SparseConfig::DEFAULT_ADMM_TOL,
            admm_max_iter: SparseConfig::DEFAULT_ADMM_MAX_ITER,
            estimator: Estimator::Auto,
            quad_order: DEFAULT_QUAD_ORDER,
            serial: false,
        };
        match experiment {
            Experiment::Eigs => {
                cfg.trials = 10;
                cfg.pe = vec![0.0, 0.1, 0.2, 0.3, 0.4];
                cfg.sigma = vec![0.0, 0.5, 1.0, 1.5, 2.0];
                cfg.theta = vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5];
            }
            Experiment::Lowdim => {
                cfg.n = vec![1000, 2000, 4000, 8000, 16000];
                cfg.p = vec![10, 20, 40];
            }
            Experiment::Sparse => {
                cfg.n = vec![1000, 4000, 16000];
                cfg.p = vec![100, 200];
                cfg.s = vec![5, 10];
                cfg.trials = 20;
                cfg.admm_tol = 1e-4;
                cfg.admm_max_iter = 100;
            }
            Experiment::Diag => {
                cfg.trials = 1;
                cfg.s = vec![5];
            }
        }
        cfg
    }

    /// The grid of the active model's noise parameter.
    pub fn noise_grid(&self) -> &[f64] {
        match self.model {
            ModelKind::Flr => &self.pe,
            ModelKind::Cs => &self.sigma,
            ModelKind::Pr => &self.theta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.noise_grid().is_empty() {
            return fail(format!("the {} grid is empty", self.model.param_name()));
        }
        for &v in self.noise_grid() {
            self.model
                .link(v, self.zeta)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.p.is_empty() || self.p.iter().any(|&p| p < 2) {
            return fail("the p grid must be nonempty with every p >= 2".into());
        }
        if self.experiment != Experiment::Diag
            && (self.n.is_empty() || self.n.iter().any(|&n| n < 2))
        {
            return fail("the n grid must be nonempty with every n >= 2".into());
        }
        if self.experiment == Experiment::Sparse && self.s.is_empty() {
            return fail("the sparse experiment needs a nonempty s grid".into());
        }
        if self.s.contains(&0) {
            return fail("sparsity levels must be at least 1".into());
        }
        if self.experiment == Experiment::Sparse && self.grid().is_empty() {
            return fail("no (s, p) combination satisfies s <= p".into());
        }
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        if self.t_max < 1 || self.tol.is_nan() || self.tol < 0.0 {
            return fail("t_max must be >= 1 and tol >= 0".into());
        }
        if !non_negative(self.rho_const) || self.rho.is_some_and(|r| !non_negative(r)) {
            return fail("rho and rho-const must be non-negative".into());
        }
        if self.s_hat == Some(0) {
            return fail("s-hat must be at least 1".into());
        }
        if !positive(self.admm_penalty) || !positive(self.admm_tol) || self.admm_max_iter < 1 {
            return fail("ADMM penalty, tolerance and iteration cap must be positive".into());
        }
        if self.quad_order < crate::link::MIN_QUAD_ORDER {
            return fail(format!(
                "quad-order must be at least {}",
                crate::link::MIN_QUAD_ORDER
            ));
        }
        Ok(())
    }

    /// Grid points in emission order: noise, then s (sparse only), p, n.
    pub fn grid(&self) -> Vec<GridPoint> {
        let sizes: Vec<Option<usize>> = match self.experiment {
            Experiment::Sparse => self.s.iter().copied().map(Some).collect(),
            _ => vec![None],
        };
        let mut points = Vec::new();
        for &noise in self.noise_grid() {
            for &s in &sizes {
                for &p in &self.p {
                    if s.is_some_and(|s| s > p) {
                        continue;
                    }
                    for &n in &self.n {
                        points.push(GridPoint { noise, n, p, s });
                    }
                }
            }
        }
        points
    }

    fn power_options(&self) -> PowerOptions {
        PowerOptions {
            t_max: self.t_max,
            tol: self.tol,
        }
    }

    fn sparse_config(&self, point: &GridPoint) -> SparseConfig {
        let s = point.s.unwrap_or(point.p);
        let s_hat = self.s_hat.unwrap_or(2 * s).min(point.p);
        let rho = self
            .rho
            .unwrap_or_else(|| SparseConfig::default_rho(point.p, point.n, self.rho_const));
        let mut cfg = SparseConfig::new(s_hat, rho);
        cfg.t_max = self.t_max;
        cfg.tol = self.tol;
        cfg.admm_penalty = self.admm_penalty;
        cfg.admm_tol = self.admm_tol;
        cfg.admm_max_iter = self.admm_max_iter;
        cfg
    }

    fn trial_rng(&self, point: &GridPoint, trial: usize) -> TrialRng {
        let key = stream_key(&[
            self.experiment.stream_id(),
            self.model.stream_id(),
            point.noise.to_bits(),
            self.zeta.to_bits(),
            point.n as u64,
            point.p as u64,
            point.s.map_or(0, |s| s as u64),
            trial as u64,
        ]);
        derive(self.seed, key)
    }
}

/// One parameter combination of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub noise: f64,
    pub n: usize,
    pub p: usize,
    pub s: Option<usize>,
}

/// One CSV line. Fields that do not apply to the experiment are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub experiment: Experiment,
    pub model: ModelKind,
    pub param_value: f64,
    pub n: usize,
    pub p: usize,
    pub s: Option<usize>,
    pub trial: usize,
    /// Noise level for `eigs`, `sqrt(p/n)` for `lowdim`, `sqrt(s ln p / n)` for `sparse`.
    pub abscissa: f64,
    pub lambda1_over4: Option<f64>,
    pub lambda2_over4: Option<f64>,
    /// Default metric: sign-invariant for even links, plain otherwise.
    pub err: Option<f64>,
    pub err_signfree: Option<f64>,
    pub iters: Option<usize>,
    pub converged: Option<bool>,
}

impl ExperimentRow {
    /// The CSV line without its trailing newline.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(float17).unwrap_or_default();
        [
            self.experiment.name().to_string(),
            self.model.tag().to_string(),
            self.model.param_name().to_string(),
            float17(self.param_value),
            self.n.to_string(),
            self.p.to_string(),
            self.s.map(|s| s.to_string()).unwrap_or_default(),
            self.trial.to_string(),
            float17(self.abscissa),
            opt(self.lambda1_over4),
            opt(self.lambda2_over4),
            opt(self.err),
            opt(self.err_signfree),
            self.iters.map(|i| i.to_string()).unwrap_or_default(),
            self.converged.map(|c| c.to_string()).unwrap_or_default(),
        ]
        .join(",")
    }
}

/// Recomputes a row's abscissa from its parameter columns.
pub fn abscissa(
    experiment: Experiment,
    param_value: f64,
    n: usize,
    p: usize,
    s: Option<usize>,
) -> f64 {
    match experiment {
        Experiment::Eigs | Experiment::Diag => param_value,
        Experiment::Lowdim => (p as f64 / n as f64).sqrt(),
        Experiment::Sparse => {
            let s = s.unwrap_or(p) as f64;
            (s * (p as f64).ln() / n as f64).sqrt()
        }
    }
}

/// `‖β̂ − β*‖`, or `min ‖β̂ ∓ β*‖` when `sign_invariant`.
pub fn estimation_error(
    beta_hat: &DVector<f64>,
    beta_star: &DVector<f64>,
    sign_invariant: bool,
) -> Result<f64> {
    if beta_hat.len() != beta_star.len() {
        return Err(crate::error::invalid(format!(
            "vectors of length {} and {}",
            beta_hat.len(),
            beta_star.len()
        )));
    }
    for (name, v) in [("estimate", beta_hat), ("target", beta_star)] {
        if !crate::linalg::is_unit(v, 1e-6) {
            return Err(crate::error::invalid(format!(
                "{name} has norm {}, expected 1",
                v.norm()
            )));
        }
    }
    let plain = (beta_hat - beta_star).norm();
    Ok(if sign_invariant {
        plain.min((beta_hat + beta_star).norm())
    } else {
        plain
    })
}

/// For odd links `E[y x] = μ₁ β*`, so the label-weighted covariate sum fixes
/// the sign that the quadratic estimators leave open.
fn orient(mut beta: DVector<f64>, data: &Dataset, link: &LinkModel) -> DVector<f64> {
    if !link.is_odd() {
        return beta;
    }
    let x = data.covariates();
    let score: f64 = data
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &y)| f64::from(y) * (x.row(i) * &beta)[0])
        .sum();
    if score < 0.0 {
        beta.neg_mut();
    }
    beta
}

struct Trial<'a> {
    cfg: &'a RunConfig,
    point: GridPoint,
    index: usize,
    link: LinkModel,
    kind: MomentKind,
}

impl Trial<'_> {
    fn row(&self) -> ExperimentRow {
        let p = &self.point;
        ExperimentRow {
            experiment: self.cfg.experiment,
            model: self.cfg.model,
            param_value: p.noise,
            n: p.n,
            p: p.p,
            s: p.s,
            trial: self.index,
            abscissa: abscissa(self.cfg.experiment, p.noise, p.n, p.p, p.s),
            lambda1_over4: None,
            lambda2_over4: None,
            err: None,
            err_signfree: None,
            iters: None,
            converged: None,
        }
    }

    fn data(&self, truth: &GroundTruth, rng: &mut TrialRng) -> Result<Dataset> {
        generate_dataset(&self.link, truth, self.point.n, rng)
    }

    fn errors(
        &self,
        row: &mut ExperimentRow,
        beta: &DVector<f64>,
        truth: &GroundTruth,
    ) -> Result<()> {
        let signfree = estimation_error(beta, &truth.beta_star, true)?;
        row.err = Some(if self.link.is_odd() {
            estimation_error(beta, &truth.beta_star, false)?
        } else {
            signfree
        });
        row.err_signfree = Some(signfree);
        Ok(())
    }

    fn run(&self) -> Result<ExperimentRow> {
        let mut rng = self.cfg.trial_rng(&self.point, self.index);
        let mut row = self.row();
        match self.cfg.experiment {
            Experiment::Eigs => {
                let truth = sample_beta_dense(self.point.p, &mut rng)?;
                let data = self.data(&truth, &mut rng)?;
                let m = pairwise_moment(&data, self.kind)?;
                let top = top_two_eigs(m.matrix())?;
                row.lambda1_over4 = Some(top.lambda1 / 4.0);
                row.lambda2_over4 = Some(top.lambda2 / 4.0);
            }
            Experiment::Lowdim => {
                let truth = sample_beta_dense(self.point.p, &mut rng)?;
                let data = self.data(&truth, &mut rng)?;
                let m = pairwise_moment(&data, self.kind)?;
                let beta0 = uniform_sphere(self.point.p, &mut rng);
                let report = power_method(m.matrix(), &beta0, &self.cfg.power_options())?;
                let beta = orient(report.beta_hat, &data, &self.link);
                self.errors(&mut row, &beta, &truth)?;
                row.iters = Some(report.iterations);
                row.converged = Some(report.converged);
            }
            Experiment::Sparse => {
                let s = self.point.s.unwrap_or(self.point.p);
                let truth = sample_beta_sparse(self.point.p, s, &mut rng)?;
                let data = self.data(&truth, &mut rng)?;
                let m = pairwise_moment(&data, self.kind)?;
                let out = sparse_recover_moment(m.matrix(), &self.cfg.sparse_config(&self.point))?;
                let beta = orient(out.report.beta_hat, &data, &self.link);
                self.errors(&mut row, &beta, &truth)?;
                row.iters = Some(out.report.iterations);
                row.converged = Some(out.report.converged);
            }
            Experiment::Diag => unreachable!("diagnostics do not sample"),
        }
        Ok(row)
    }
}

fn run_trials(cfg: &RunConfig) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let mut trials = Vec::new();
    for point in cfg.grid() {
        let link = cfg.model.link(point.noise, cfg.zeta)?;
        let kind = cfg.estimator.kind_for(&link)?;
        for index in 0..cfg.trials {
            trials.push(Trial {
                cfg,
                point,
                index,
                link,
                kind,
            });
        }
    }
    log::info!(
        "{}: {} grid points x {} trials",
        cfg.experiment.name(),
        trials.len() / cfg.trials,
        cfg.trials
    );
    let rows: Vec<Result<ExperimentRow>> = if cfg.serial {
        trials.iter().map(Trial::run).collect()
    } else {
        trials.par_iter().map(Trial::run).collect()
    };
    rows.into_iter().collect()
}

fn non_negative(x: f64) -> bool {
    x >= 0.0 && !x.is_nan()
}

fn positive(x: f64) -> bool {
    x > 0.0 && !x.is_nan()
}

fn expect_experiment(cfg: &RunConfig, want: Experiment) -> Result<()> {
    if cfg.experiment != want {
        return Err(Error::Config(format!(
            "configuration is for '{}', not '{}'",
            cfg.experiment.name(),
            want.name()
        )));
    }
    Ok(())
}

/// Top two eigenvalues of `M/4` (or `M′/4`) per noise level and trial.
pub fn run_eigenstructure(cfg: &RunConfig) -> Result<Vec<ExperimentRow>> {
    expect_experiment(cfg, Experiment::Eigs)?;
    run_trials(cfg)
}

/// Power-method error against `sqrt(p/n)` on dense parameters.
pub fn run_lowdim(cfg: &RunConfig) -> Result<Vec<ExperimentRow>> {
    expect_experiment(cfg, Experiment::Lowdim)?;
    run_trials(cfg)
}

/// Sparse pipeline error against `sqrt(s ln p / n)`.
pub fn run_sparse(cfg: &RunConfig) -> Result<Vec<ExperimentRow>> {
    expect_experiment(cfg, Experiment::Sparse)?;
    run_trials(cfg)
}

/// Closed-form or quadrature summary of one link at one `(p, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagReport {
    pub link: LinkModel,
    pub p: usize,
    pub s: Option<usize>,
    pub moments: MomentSummary,
    /// Absent when `φ ≤ 0`.
    pub diagnostics: Option<TheoryDiagnostics>,
    pub advisories: Vec<String>,
}

impl fmt::Display for DiagReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.moments;
        writeln!(f, "model: {}", self.link)?;
        match self.s {
            Some(s) => writeln!(f, "p = {}, s = {s}", self.p)?,
            None => writeln!(f, "p = {}", self.p)?,
        }
        writeln!(
            f,
            "mu0 = {:.10}  mu1 = {:.10}  mu2 = {:.10}  ({:?})",
            m.mu0, m.mu1, m.mu2, m.method
        )?;
        writeln!(f, "phi = {:.10}  1 - mu0^2 = {:.10}", m.phi, m.floor())?;
        if let Some(d) = &self.diagnostics {
            writeln!(
                f,
                "gamma = {:.6}  xi = {:.6}  kappa = {:.6}",
                d.gamma, d.xi, d.kappa
            )?;
            writeln!(f, "n_low (C = 1) = {:.4e}", d.n_low)?;
            if let Some(n_min) = d.n_min {
                writeln!(f, "n_min (C = 1) = {n_min:.4e}")?;
            }
            if let Some(t) = d.theta_m {
                writeln!(f, "theta_m = {t:.10}")?;
            }
        }
        for a in &self.advisories {
            writeln!(f, "note: {a}")?;
        }
        Ok(())
    }
}

/// Moments and contraction diagnostics for every noise level, `p` and `s`.
/// No sampling takes place.
pub fn run_diag(cfg: &RunConfig) -> Result<Vec<DiagReport>> {
    expect_experiment(cfg, Experiment::Diag)?;
    cfg.validate()?;
    let sizes: Vec<Option<usize>> = if cfg.s.is_empty() {
        vec![None]
    } else {
        cfg.s.iter().copied().map(Some).collect()
    };
    let mut reports = Vec::new();
    for &noise in cfg.noise_grid() {
        let link = cfg.model.link(noise, cfg.zeta)?;
        let summary = moments(&link, cfg.quad_order)?;
        for &p in &cfg.p {
            for &s in &sizes {
                let s = s.filter(|&s| s <= p);
                let mut advisories = Vec::new();
                let diagnostics = match theory_diagnostics(
                    &link,
                    p,
                    s,
                    cfg.quad_order,
                    DiagnosticConstants::default(),
                ) {
                    Ok(d) => Some(d),
                    Err(e @ Error::NonPositiveGap { .. }) => {
                        advisories.push(e.to_string());
                        if matches!(link, LinkModel::OneBitPr { .. }) {
                            advisories.push(format!(
                                "theta is below theta_m = {:.10}; use the sum-type estimator M'",
                                theta_median()
                            ));
                        }
                        None
                    }
                    Err(e) => return Err(e),
                };
                if let Some(d) = &diagnostics {
                    if d.moments.phi < 1e-2 * d.moments.floor() {
                        advisories.push(format!(
                            "phi = {:.3e} is small relative to the noise floor; kappa = {:.6} is near 1 \
                             and rates will be slow",
                            d.moments.phi, d.kappa
                        ));
                    }
                }
                reports.push(DiagReport {
                    link,
                    p,
                    s,
                    moments: summary,
                    diagnostics,
                    advisories,
                });
            }
        }
    }
    Ok(reports)
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    Rows(Vec<ExperimentRow>),
    Diagnostics(Vec<DiagReport>),
}

pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentOutput> {
    match cfg.experiment {
        Experiment::Eigs => run_eigenstructure(cfg).map(ExperimentOutput::Rows),
        Experiment::Lowdim => run_lowdim(cfg).map(ExperimentOutput::Rows),
        Experiment::Sparse => run_sparse(cfg).map(ExperimentOutput::Rows),
        Experiment::Diag => run_diag(cfg).map(ExperimentOutput::Diagnostics),
    }
}

/// Header plus one line per row, `\n`-terminated.
pub fn write_csv<W: Write>(rows: &[ExperimentRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv())?;
    }
    out.flush()?;
    Ok(())
}

/// Per-grid-point aggregates over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub param_value: f64,
    pub n: usize,
    pub p: usize,
    pub s: Option<usize>,
    pub abscissa: f64,
    pub trials: usize,
    pub mean_lambda1_over4: Option<f64>,
    pub mean_lambda2_over4: Option<f64>,
    pub mean_err: Option<f64>,
    pub median_err: Option<f64>,
    pub median_err_signfree: Option<f64>,
    pub converged_fraction: Option<f64>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Median with the midpoint convention for even counts.
pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[k]
    } else {
        0.5 * (sorted[k - 1] + sorted[k])
    })
}

/// Groups consecutive rows sharing a grid point.
pub fn summarize(rows: &[ExperimentRow]) -> Vec<GroupSummary> {
    let same = |a: &ExperimentRow, b: &ExperimentRow| {
        a.param_value.to_bits() == b.param_value.to_bits() && a.n == b.n && a.p == b.p && a.s == b.s
    };
    rows.chunk_by(same)
        .map(|group| {
            let col = |f: fn(&ExperimentRow) -> Option<f64>| {
                group.iter().filter_map(f).collect::<Vec<_>>()
            };
            let err = col(|r| r.err);
            let conv: Vec<f64> = group
                .iter()
                .filter_map(|r| r.converged)
                .map(|c| f64::from(u8::from(c)))
                .collect();
            let first = &group[0];
            GroupSummary {
                param_value: first.param_value,
                n: first.n,
                p: first.p,
                s: first.s,
                abscissa: first.abscissa,
                trials: group.len(),
                mean_lambda1_over4: mean(&col(|r| r.lambda1_over4)),
                mean_lambda2_over4: mean(&col(|r| r.lambda2_over4)),
                mean_err: mean(&err),
                median_err: median(&err),
                median_err_signfree: median(&col(|r| r.err_signfree)),
                converged_fraction: mean(&conv),
            }
        })
        .collect()
}

impl fmt::Display for GroupSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.5}"));
        write!(
            f,
            "value={:<8} n={:<6} p={:<4} s={:<3} x={:.5} trials={} l1/4={} l2/4={} err(mean)={} err(median)={} signfree(median)={}",
            self.param_value,
            self.n,
            self.p,
            self.s.map_or("-".to_string(), |s| s.to_string()),
            self.abscissa,
            self.trials,
            o(self.mean_lambda1_over4),
            o(self.mean_lambda2_over4),
            o(self.mean_err),
            o(self.median_err),
            o(self.median_err_signfree),
        )
    }
}
