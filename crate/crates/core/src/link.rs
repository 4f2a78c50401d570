//! Link functions, their Gaussian moment functionals, and the theory
//! diagnostics derived from them.
//!
//! A link `f: ℝ → [-1, 1]` sets `P(Y = 1 | x) = (f(⟨x, β*⟩) + 1) / 2`. Everything
//! the estimators need to know about `f` is captured by
//!
//! ```text
//! μ_k = E[f(Z) Z^k],  Z ~ N(0, 1),   φ(f) = μ₁² − μ₀μ₂ + μ₀²
//! ```
//!
//! where `φ` is the eigengap of `E(M)/4`: positive means β* is the leading
//! eigenvector of the difference estimator, negative means the sum estimator.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::normal;
use crate::quadrature::GaussHermite;

/// Default Gauss-Hermite order for smooth links.
pub const DEFAULT_QUAD_ORDER: usize = 64;

/// Smallest accepted quadrature order.
pub const MIN_QUAD_ORDER: usize = 8;

/// `sign` with `sign(0) = +1`.
#[inline]
pub fn sign(z: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Conditional law of the label given the index `⟨x, β*⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LinkModel {
    /// Logistic regression with intercept `zeta`, labels flipped with probability `flip_prob`.
    FlippedLogistic { zeta: f64, flip_prob: f64 },
    /// `Y = sign(⟨x, β*⟩ + ε)`, `ε ~ N(0, sigma²)`.
    OneBitCs { sigma: f64 },
    /// `Y = sign(|⟨x, β*⟩| − theta)`.
    OneBitPr { theta: f64 },
}

impl LinkModel {
    pub fn flipped_logistic(zeta: f64, flip_prob: f64) -> Result<Self> {
        let m = LinkModel::FlippedLogistic { zeta, flip_prob };
        m.validate()?;
        Ok(m)
    }

    pub fn one_bit_cs(sigma: f64) -> Result<Self> {
        let m = LinkModel::OneBitCs { sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn one_bit_pr(theta: f64) -> Result<Self> {
        let m = LinkModel::OneBitPr { theta };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LinkModel::FlippedLogistic { zeta, flip_prob } => {
                if !zeta.is_finite() {
                    return Err(invalid("intercept must be finite"));
                }
                if !(0.0..0.5).contains(&flip_prob) {
                    return Err(invalid(format!(
                        "flip probability {flip_prob} outside [0, 0.5)"
                    )));
                }
            }
            LinkModel::OneBitCs { sigma } => {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(invalid(format!(
                        "noise level sigma = {sigma} must be finite and >= 0"
                    )));
                }
            }
            LinkModel::OneBitPr { theta } => {
                if !(theta > 0.0 && theta.is_finite()) {
                    return Err(invalid(format!(
                        "threshold theta = {theta} must be finite and > 0"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short tag used on the command line and in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            LinkModel::FlippedLogistic { .. } => "flr",
            LinkModel::OneBitCs { .. } => "cs",
            LinkModel::OneBitPr { .. } => "pr",
        }
    }

    /// Name and value of the noise parameter swept by the experiments.
    pub fn noise_param(&self) -> (&'static str, f64) {
        match *self {
            LinkModel::FlippedLogistic { flip_prob, .. } => ("pe", flip_prob),
            LinkModel::OneBitCs { sigma } => ("sigma", sigma),
            LinkModel::OneBitPr { theta } => ("theta", theta),
        }
    }

    /// Links whose value at `-z` is `-f(z)`. Deterministic sign links are odd
    /// everywhere except the measure-zero point `z = 0`.
    pub fn is_odd(&self) -> bool {
        match *self {
            LinkModel::FlippedLogistic { zeta, .. } => zeta == 0.0,
            LinkModel::OneBitCs { .. } => true,
            LinkModel::OneBitPr { .. } => false,
        }
    }

    /// `f(z)`, always in `[-1, 1]`.
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            LinkModel::FlippedLogistic { zeta, flip_prob } => {
                // (e^u − 1)/(e^u + 1) = tanh(u/2); the flip term rescales it by (1 − 2 p_e).
                (1.0 - 2.0 * flip_prob) * (0.5 * (z + zeta)).tanh()
            }
            LinkModel::OneBitCs { sigma } => {
                if sigma == 0.0 {
                    sign(z)
                } else {
                    // 2Φ(z/σ) − 1
                    libm::erf(z / sigma * FRAC_1_SQRT_2)
                }
            }
            LinkModel::OneBitPr { theta } => sign(z.abs() - theta),
        }
    }

    /// `P(Y = +1 | index = z)`.
    pub fn prob_positive(&self, z: f64) -> f64 {
        0.5 * (self.eval(z) + 1.0)
    }

    /// True when the link has a jump, which rules out quadrature.
    pub fn is_discontinuous(&self) -> bool {
        match *self {
            LinkModel::FlippedLogistic { .. } => false,
            LinkModel::OneBitCs { sigma } => sigma == 0.0,
            LinkModel::OneBitPr { .. } => true,
        }
    }
}

impl fmt::Display for LinkModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LinkModel::FlippedLogistic { zeta, flip_prob } => {
                write!(f, "flipped logistic (zeta = {zeta}, p_e = {flip_prob})")
            }
            LinkModel::OneBitCs { sigma } => write!(f, "one-bit CS (sigma = {sigma})"),
            LinkModel::OneBitPr { theta } => write!(f, "one-bit PR (theta = {theta})"),
        }
    }
}

/// How a [`MomentSummary`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
}

/// Gaussian moment functionals of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub phi: f64,
    pub method: MomentMethod,
}

impl MomentSummary {
    /// Assembles the summary; `phi` is always recomputed from the moments.
    pub fn from_moments(mu0: f64, mu1: f64, mu2: f64, method: MomentMethod) -> Self {
        let phi = mu1 * mu1 - mu0 * mu2 + mu0 * mu0;
        Self {
            mu0,
            mu1,
            mu2,
            phi,
            method,
        }
    }

    /// `1 − μ₀²`, the noise floor of `E(M)/4`.
    pub fn floor(&self) -> f64 {
        1.0 - self.mu0 * self.mu0
    }
}

/// Computes `(μ₀, μ₁, μ₂, φ)` for a link.
///
/// Smooth links are integrated with Gauss-Hermite of order `quad_order`;
/// the sign-type links always use their closed forms.
pub fn moments(model: &LinkModel, quad_order: usize) -> Result<MomentSummary> {
    model.validate()?;
    if quad_order < MIN_QUAD_ORDER {
        return Err(invalid(format!(
            "quadrature order {quad_order} below the minimum of {MIN_QUAD_ORDER}"
        )));
    }
    match *model {
        LinkModel::FlippedLogistic { .. } => {
            let gh = GaussHermite::new(quad_order)?;
            Ok(quadrature_moments(model, &gh))
        }
        LinkModel::OneBitCs { sigma } => {
            // Stein: μ₁ = E f'(Z) = (2/σ) E φ_N(Z/σ) = sqrt(2/π) / sqrt(1 + σ²);
            // the σ = 0 limit is E|Z|.
            let mu1 = (2.0 / PI).sqrt() / (1.0 + sigma * sigma).sqrt();
            Ok(MomentSummary::from_moments(
                0.0,
                mu1,
                0.0,
                MomentMethod::ClosedForm,
            ))
        }
        LinkModel::OneBitPr { theta } => {
            let p1 = normal::two_sided_tail(theta);
            let mu0 = 2.0 * p1 - 1.0;
            // E(Z²; |Z| ≥ θ) = 2θ φ_N(θ) + p₁, so μ₂ = 2 E(Z²; |Z| ≥ θ) − 1.
            let mu2 = 4.0 * theta * normal::pdf(theta) + 2.0 * p1 - 1.0;
            Ok(MomentSummary::from_moments(
                mu0,
                0.0,
                mu2,
                MomentMethod::ClosedForm,
            ))
        }
    }
}

/// Quadrature route, valid only for continuous links.
pub fn quadrature_moments(model: &LinkModel, gh: &GaussHermite) -> MomentSummary {
    debug_assert!(!model.is_discontinuous());
    let mu0 = gh.expect(|z| model.eval(z));
    let mu1 = gh.expect(|z| model.eval(z) * z);
    let mu2 = gh.expect(|z| model.eval(z) * z * z);
    MomentSummary::from_moments(mu0, mu1, mu2, MomentMethod::Quadrature)
}

/// Median of |Z|; one-bit phase retrieval has `φ > 0` exactly when `θ` exceeds it.
pub fn theta_median() -> f64 {
    normal::abs_median()
}

/// Unspecified absolute constants of the sample-size formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticConstants {
    /// Multiplier of the high-dimensional minimum sample size.
    pub n_min: f64,
    /// Multiplier of `p / ξ²` in the low-dimensional sample requirement.
    pub n_low: f64,
}

impl Default for DiagnosticConstants {
    fn default() -> Self {
        Self {
            n_min: 1.0,
            n_low: 1.0,
        }
    }
}

/// Contraction factors and sample-size scales. These are order-of-magnitude
/// guides with their constants set to one, not hard gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryDiagnostics {
    pub moments: MomentSummary,
    /// Power-method contraction factor of the low-dimensional bound.
    pub gamma: f64,
    pub xi: f64,
    /// Truncated power-method contraction factor.
    pub kappa: f64,
    /// `C · p / ξ²`.
    pub n_low: f64,
    /// High-dimensional minimum sample size, evaluated exactly as printed
    /// (the `min{·}` factor sits in the numerator). `None` without `s`.
    pub n_min: Option<f64>,
    /// Only set for one-bit phase retrieval.
    pub theta_m: Option<f64>,
}

/// Evaluates γ, ξ, κ and the sample-size scales for a link with `φ > 0`.
pub fn theory_diagnostics(
    model: &LinkModel,
    p: usize,
    s: Option<usize>,
    quad_order: usize,
    constants: DiagnosticConstants,
) -> Result<TheoryDiagnostics> {
    if p == 0 {
        return Err(invalid("dimension p must be positive"));
    }
    if let Some(s) = s {
        if s == 0 || s > p {
            return Err(invalid(format!("sparsity s = {s} outside [1, p = {p}]")));
        }
    }
    let m = moments(model, quad_order)?;
    let phi = m.phi;
    if phi <= 0.0 {
        return Err(Error::NonPositiveGap { phi });
    }
    let floor = m.floor();
    let gamma = (floor / (phi + floor) + 1.0) / 2.0;
    let xi = (gamma * phi + (gamma - 1.0) * floor) / ((1.0 + gamma) * (phi + floor));
    let kappa = (4.0 * floor + phi) / (4.0 * floor + 3.0 * phi);
    let n_low = constants.n_low * p as f64 / (xi * xi);
    let n_min = s.map(|s| {
        let s = s as f64;
        let factor = (kappa * (1.0 - kappa.sqrt()) / 2.0).min(kappa / 8.0);
        constants.n_min * s * s * (p as f64).ln() * phi * phi * factor
            / ((floor + phi) * (floor + phi))
    });
    let theta_m = matches!(model, LinkModel::OneBitPr { .. }).then(theta_median);
    Ok(TheoryDiagnostics {
        moments: m,
        gamma,
        xi,
        kappa,
        n_low,
        n_min,
        theta_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flr(pe: f64) -> LinkModel {
        LinkModel::flipped_logistic(0.0, pe).unwrap()
    }

    #[test]
    fn constructors_reject_out_of_range() {
        assert!(LinkModel::flipped_logistic(0.0, 0.5).is_err());
        assert!(LinkModel::flipped_logistic(0.0, -0.01).is_err());
        assert!(LinkModel::one_bit_cs(-1.0).is_err());
        assert!(LinkModel::one_bit_pr(0.0).is_err());
        assert!(LinkModel::one_bit_pr(f64::NAN).is_err());
        assert!(LinkModel::flipped_logistic(0.3, 0.49).is_ok());
    }

    #[test]
    fn link_values() {
        assert_eq!(flr(0.1).eval(0.0), 0.0);
        assert_eq!(LinkModel::one_bit_cs(1.0).unwrap().eval(0.0), 0.0);
        assert_eq!(LinkModel::one_bit_pr(1.0).unwrap().eval(0.5), -1.0);
        assert_eq!(LinkModel::one_bit_pr(1.0).unwrap().eval(1.0), 1.0);
        assert_eq!(LinkModel::one_bit_cs(0.0).unwrap().eval(0.0), 1.0);
        // (e² − 1)/(e² + 1) at z = 2, ζ = 0.
        let e2 = 2.0_f64.exp();
        let direct = (e2 - 1.0) / (e2 + 1.0);
        assert!((flr(0.0).eval(2.0) - direct).abs() < 1e-15);
        assert!((flr(0.0).eval(2.0) - 0.761_594_155_955_764_9).abs() < 1e-15);
        // General form with intercept and flips, straight from the exponentials.
        let m = LinkModel::flipped_logistic(0.7, 0.2).unwrap();
        let u = (1.3_f64 + 0.7).exp();
        let written = (u - 1.0) / (u + 1.0) + 2.0 * 0.2 * (1.0 - u) / (1.0 + u);
        assert!((m.eval(1.3) - written).abs() < 1e-15);
    }

    #[test]
    fn cs_link_is_probit() {
        let m = LinkModel::one_bit_cs(0.5).unwrap();
        for z in [-1.3, -0.2, 0.4, 2.0] {
            assert!((m.eval(z) - (2.0 * normal::cdf(z / 0.5) - 1.0)).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn links_bounded(z in -50.0f64..50.0, pe in 0.0f64..0.499, zeta in -3.0f64..3.0,
                         sigma in 0.0f64..5.0, theta in 0.01f64..4.0) {
            for m in [LinkModel::FlippedLogistic { zeta, flip_prob: pe },
                      LinkModel::OneBitCs { sigma },
                      LinkModel::OneBitPr { theta }] {
                prop_assert!(m.eval(z).abs() <= 1.0);
            }
        }

        #[test]
        fn odd_and_even_symmetry(z in -20.0f64..20.0, pe in 0.0f64..0.499, sigma in 0.0f64..5.0,
                                 theta in 0.01f64..4.0) {
            prop_assume!(z != 0.0);
            let f = LinkModel::FlippedLogistic { zeta: 0.0, flip_prob: pe };
            prop_assert_eq!(f.eval(z), -f.eval(-z));
            let c = LinkModel::OneBitCs { sigma };
            prop_assert_eq!(c.eval(z), -c.eval(-z));
            let r = LinkModel::OneBitPr { theta };
            prop_assert_eq!(r.eval(z), r.eval(-z));
        }
    }

    #[test]
    fn quad_order_floor() {
        assert!(moments(&flr(0.1), 7).is_err());
        assert!(moments(&flr(0.1), 8).is_ok());
    }

    #[test]
    fn cs_noiseless_moments() {
        let m = moments(&LinkModel::one_bit_cs(0.0).unwrap(), 64).unwrap();
        assert_eq!(m.mu0, 0.0);
        assert_eq!(m.mu2, 0.0);
        assert!((m.mu1 - 0.797_884_560_802_865_4).abs() < 1e-15);
        assert!((m.phi - 2.0 / PI).abs() < 1e-15);
        assert_eq!(m.method, MomentMethod::ClosedForm);
    }

    #[test]
    fn pr_theta_one_moments() {
        let m = moments(&LinkModel::one_bit_pr(1.0).unwrap(), 64).unwrap();
        // p₁ = 2(1 − Φ(1)).
        let p1 = 2.0 * (1.0 - 0.841_344_746_068_542_9);
        assert!((m.mu0 - (2.0 * p1 - 1.0)).abs() < 1e-14);
        assert!((m.mu0 + 0.365_378_984_274_171_8).abs() < 1e-14);
        assert_eq!(m.mu1, 0.0);
        // Product form −2(2p₁ − 1) · 2θ e^{−θ²/2} / sqrt(2π) at θ = 1.
        let product = -2.0 * (2.0 * p1 - 1.0) * 2.0 * (-0.5_f64).exp() / (2.0 * PI).sqrt();
        assert!((m.phi - product).abs() < 1e-14);
        // Recomputed at 30 digits: 0.35364407019556013...
        assert!((m.phi - 0.353_644_070_195_560_1).abs() < 1e-14, "{}", m.phi);
    }

    #[test]
    fn flr_phi_vanishes_at_half_flip() {
        let phis: Vec<f64> = [0.49, 0.499, 0.4999]
            .iter()
            .map(|&pe| moments(&flr(pe), 64).unwrap().phi)
            .collect();
        assert!(phis.windows(2).all(|w| w[1] < w[0]));
        assert!(phis[2] < 1e-7);
    }

    #[test]
    fn odd_links_quadrature_zero_even_moments() {
        for pe in [0.0, 0.2, 0.4] {
            let m = moments(&flr(pe), 64).unwrap();
            assert!(m.mu0.abs() <= 1e-8 && m.mu2.abs() <= 1e-8);
            assert!((m.phi - m.mu1 * m.mu1).abs() < 1e-15);
        }
    }

    #[test]
    fn flr_monotone_in_flip_probability() {
        let grid: Vec<f64> = (0..10).map(|k| 0.05 * k as f64).collect();
        let phis: Vec<f64> = grid
            .iter()
            .map(|&pe| moments(&flr(pe), 64).unwrap().phi)
            .collect();
        assert!(phis.iter().all(|&p| p > 0.0));
        assert!(phis.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn cs_gap_positive() {
        for sigma in [0.0, 0.5, 1.0, 2.0, 4.0] {
            assert!(
                moments(&LinkModel::one_bit_cs(sigma).unwrap(), 64)
                    .unwrap()
                    .phi
                    > 0.0
            );
        }
    }

    #[test]
    fn pr_sign_flip_at_median() {
        let tm = theta_median();
        for d in [0.05, 0.2, 0.5] {
            let above = moments(&LinkModel::one_bit_pr(tm + d).unwrap(), 64).unwrap();
            let below = moments(&LinkModel::one_bit_pr(tm - d).unwrap(), 64).unwrap();
            assert!(above.phi > 0.0, "theta_m + {d}");
            assert!(below.phi < 0.0, "theta_m - {d}");
        }
    }

    #[test]
    fn diagnostics_noiseless_cs() {
        let d = theory_diagnostics(
            &LinkModel::one_bit_cs(0.0).unwrap(),
            20,
            Some(5),
            64,
            DiagnosticConstants::default(),
        )
        .unwrap();
        // Independent arithmetic with φ = 2/π, μ₀ = 0.
        let phi = 2.0 / PI;
        let gamma = (1.0 / (phi + 1.0) + 1.0) / 2.0;
        let xi = (gamma * phi + gamma - 1.0) / ((1.0 + gamma) * (phi + 1.0));
        assert!((d.gamma - gamma).abs() < 1e-14);
        assert!((d.xi - xi).abs() < 1e-14);
        assert!((d.gamma - 0.805_51).abs() < 1e-5);
        assert!((d.xi - 0.107_72).abs() < 1e-5);
        assert!((d.kappa - (4.0 + 2.0 / PI) / (4.0 + 6.0 / PI)).abs() < 1e-14);
        assert!((d.kappa - 0.784_55).abs() < 1e-5);
        assert!(d.theta_m.is_none());
        let kappa = d.kappa;
        let factor = (kappa * (1.0 - kappa.sqrt()) / 2.0).min(kappa / 8.0);
        let n_min = 25.0 * 20f64.ln() * phi * phi * factor / ((1.0 + phi) * (1.0 + phi));
        assert!((d.n_min.unwrap() - n_min).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_ranges_and_limits() {
        for model in [
            flr(0.0),
            flr(0.3),
            LinkModel::one_bit_cs(1.0).unwrap(),
            LinkModel::one_bit_pr(1.5).unwrap(),
        ] {
            let d =
                theory_diagnostics(&model, 10, None, 64, DiagnosticConstants::default()).unwrap();
            let floor = d.moments.floor();
            assert!(d.gamma > floor / (d.moments.phi + floor) && d.gamma < 1.0);
            assert!(d.xi > 0.0);
            assert!(d.kappa > 0.0 && d.kappa < 1.0);
            assert!(d.n_min.is_none());
        }
        let near =
            theory_diagnostics(&flr(0.4999), 10, None, 64, DiagnosticConstants::default()).unwrap();
        assert!(near.kappa > 1.0 - 1e-6 && near.kappa < 1.0);
    }

    #[test]
    fn diagnostics_reject_negative_gap() {
        let err = theory_diagnostics(
            &LinkModel::one_bit_pr(0.4).unwrap(),
            10,
            None,
            64,
            DiagnosticConstants::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonPositiveGap { .. }));
        assert!(err.to_string().contains("M'"));
    }
}
