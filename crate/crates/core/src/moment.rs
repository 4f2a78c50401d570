//! Pairwise second-moment matrices `M` (label differences) and `M′` (label
//! sums), plus their population counterparts.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::fmt::float17;
use crate::link::{moments, LinkModel};
use crate::synth::{Dataset, GroundTruth};

/// Which label combination weights the covariate differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MomentKind {
    /// `(y₂ᵢ − y₂ᵢ₋₁)²`, the estimator `M`.
    Difference,
    /// `(y₂ᵢ + y₂ᵢ₋₁)²`, the estimator `M′`.
    Sum,
}

impl MomentKind {
    fn weight(self, a: i8, b: i8) -> i32 {
        let w = match self {
            MomentKind::Difference => i32::from(a) - i32::from(b),
            MomentKind::Sum => i32::from(a) + i32::from(b),
        };
        w * w
    }
}

/// Symmetric PSD `p × p` moment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    entries: DMatrix<f64>,
    kind: MomentKind,
    n_pairs: usize,
}

impl MomentMatrix {
    /// Wraps an arbitrary square matrix (stored symmetrized). `n_pairs = 0`
    /// marks a population matrix.
    pub fn from_matrix(entries: DMatrix<f64>, kind: MomentKind, n_pairs: usize) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(invalid("moment matrix must be square and nonempty"));
        }
        Ok(Self {
            entries: crate::linalg::symmetrize(&entries),
            kind,
            n_pairs,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn kind(&self) -> MomentKind {
        self.kind
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `p` rows of `p` comma-separated 17-digit floats.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| float17(self.entries[(i, j)]))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `M = (2/n) Σ (y₂ᵢ − y₂ᵢ₋₁)² Δxᵢ Δxᵢᵀ` over consecutive pairs.
pub fn second_moment(data: &Dataset) -> Result<MomentMatrix> {
    pairwise_moment(data, MomentKind::Difference)
}

/// `M′ = (2/n) Σ (y₂ᵢ + y₂ᵢ₋₁)² Δxᵢ Δxᵢᵀ` over consecutive pairs.
pub fn second_moment_sum(data: &Dataset) -> Result<MomentMatrix> {
    pairwise_moment(data, MomentKind::Sum)
}

/// Either estimator. The weight is 0 or 4, so the sum reduces to `(8/n) DᵀD`
/// where `D` stacks the differences of the pairs with weight 4.
pub fn pairwise_moment(data: &Dataset, kind: MomentKind) -> Result<MomentMatrix> {
    let n = data.n();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(invalid(format!(
            "need an even, nonzero number of observations, got {n}"
        )));
    }
    let x = data.covariates();
    let y = data.labels();
    let p = data.p();
    let active: Vec<usize> = (0..n / 2)
        .filter(|&i| {
            let w = kind.weight(y[2 * i + 1], y[2 * i]);
            debug_assert!(w == 0 || w == 4);
            w != 0
        })
        .collect();
    let diffs = DMatrix::from_fn(active.len(), p, |r, j| {
        let i = active[r];
        x[(2 * i + 1, j)] - x[(2 * i, j)]
    });
    let gram = diffs.tr_mul(&diffs) * (8.0 / n as f64);
    Ok(MomentMatrix {
        entries: crate::linalg::symmetrize(&gram),
        kind,
        n_pairs: n / 2,
    })
}

/// Population matrix: `4φ β*β*ᵀ + 4(1 − μ₀²) I` for `M`,
/// `−4φ β*β*ᵀ + 4(1 + μ₀²) I` for `M′`.
pub fn expected_moment(
    model: &LinkModel,
    truth: &GroundTruth,
    kind: MomentKind,
    quad_order: usize,
) -> Result<MomentMatrix> {
    let m = moments(model, quad_order)?;
    let p = truth.dim();
    let b: &DVector<f64> = &truth.beta_star;
    let (spike, floor) = match kind {
        MomentKind::Difference => (4.0 * m.phi, 4.0 * (1.0 - m.mu0 * m.mu0)),
        MomentKind::Sum => (-4.0 * m.phi, 4.0 * (1.0 + m.mu0 * m.mu0)),
    };
    let entries = b * b.transpose() * spike + DMatrix::identity(p, p) * floor;
    Ok(MomentMatrix {
        entries,
        kind,
        n_pairs: 0,
    })
}
