//! Ground-truth parameters and synthetic one-bit datasets with standard
//! Gaussian covariates.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::fmt::float17;
use crate::link::LinkModel;

/// A unit-norm parameter and the indices where it is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub beta_star: DVector<f64>,
    pub support: Vec<usize>,
}

impl GroundTruth {
    pub fn dim(&self) -> usize {
        self.beta_star.len()
    }

    /// A fixed parameter; the support is read off its nonzeros.
    pub fn from_vector(beta: DVector<f64>) -> Result<Self> {
        let norm = beta.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(invalid("ground truth must be a nonzero finite vector"));
        }
        let beta_star = beta / norm;
        let support = (0..beta_star.len())
            .filter(|&i| beta_star[i] != 0.0)
            .collect();
        Ok(Self { beta_star, support })
    }
}

/// Uniform draw from the unit sphere in `dim` dimensions.
pub fn uniform_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_iterator(dim, (0..dim).map(|_| rng.sample(StandardNormal)));
        let norm = v.norm();
        if norm > 0.0 {
            return v / norm;
        }
    }
}

/// β* uniform on S^{p−1}.
pub fn sample_beta_dense<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<GroundTruth> {
    if p < 1 {
        return Err(invalid("dimension p must be at least 1"));
    }
    Ok(GroundTruth {
        beta_star: uniform_sphere(p, rng),
        support: (0..p).collect(),
    })
}

/// Support uniform among the size-`s` subsets, values uniform on S^{s−1}.
pub fn sample_beta_sparse<R: Rng + ?Sized>(p: usize, s: usize, rng: &mut R) -> Result<GroundTruth> {
    if s < 1 || s > p {
        return Err(invalid(format!("sparsity s = {s} outside [1, p = {p}]")));
    }
    let mut support = rand::seq::index::sample(rng, p, s).into_vec();
    support.sort_unstable();
    let values = uniform_sphere(s, rng);
    let mut beta_star = DVector::zeros(p);
    for (&j, &v) in support.iter().zip(values.iter()) {
        beta_star[j] = v;
    }
    Ok(GroundTruth { beta_star, support })
}

/// `n` labelled observations; rows of `covariates` are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    labels: Vec<i8>,
    covariates: DMatrix<f64>,
    trimmed: bool,
}

impl Dataset {
    /// Validates labels and covariates; an odd trailing observation is dropped.
    pub fn new(labels: Vec<i8>, covariates: DMatrix<f64>) -> Result<Self> {
        if labels.len() != covariates.nrows() {
            return Err(invalid(format!(
                "{} labels for {} covariate rows",
                labels.len(),
                covariates.nrows()
            )));
        }
        if labels.len() < 2 {
            return Err(invalid("a dataset needs at least two observations"));
        }
        if labels.iter().any(|&y| y != 1 && y != -1) {
            return Err(invalid("labels must be +1 or -1"));
        }
        if covariates.iter().any(|x| !x.is_finite()) {
            return Err(invalid("covariates must be finite"));
        }
        let mut labels = labels;
        let mut covariates = covariates;
        let trimmed = labels.len() % 2 == 1;
        if trimmed {
            let n = labels.len() - 1;
            log::warn!("odd sample size {}: dropping the last observation", n + 1);
            labels.truncate(n);
            covariates = covariates.remove_row(n);
        }
        Ok(Self {
            labels,
            covariates,
            trimmed,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn p(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn covariates(&self) -> &DMatrix<f64> {
        &self.covariates
    }

    /// Whether an odd trailing observation was dropped on construction.
    pub fn trimmed(&self) -> bool {
        self.trimmed
    }

    /// CSV with header `y,x1,...,xp`, floats at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = String::from("y");
        for j in 1..=self.p() {
            header.push_str(&format!(",x{j}"));
        }
        writeln!(out, "{header}")?;
        for (i, &y) in self.labels.iter().enumerate() {
            let mut line = y.to_string();
            for j in 0..self.p() {
                line.push(',');
                line.push_str(&float17(self.covariates[(i, j)]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Draws `n` observations: covariate rows first, row by row, then one uniform
/// variate per label in sample order. `y = +1` iff `u < (f(⟨x, β*⟩) + 1)/2`,
/// which is the exact sign rule for deterministic links.
pub fn generate_dataset<R: Rng + ?Sized>(
    model: &LinkModel,
    truth: &GroundTruth,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    model.validate()?;
    if n < 2 {
        return Err(invalid("sample size n must be at least 2"));
    }
    let p = truth.dim();
    let n_kept = n - n % 2;
    if n_kept != n {
        log::warn!("odd sample size {n}: dropping the last observation");
    }
    let raw: Vec<f64> = (0..n_kept * p)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let covariates = DMatrix::from_row_slice(n_kept, p, &raw);
    let index = &covariates * &truth.beta_star;
    let labels = index
        .iter()
        .map(|&z| {
            let u: f64 = rng.gen();
            if u < model.prob_positive(z) {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(Dataset {
        labels,
        covariates,
        trimmed: n_kept != n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive;

    #[test]
    fn dense_beta_unit_and_deterministic() {
        let a = sample_beta_dense(20, &mut derive(1, 0)).unwrap();
        let b = sample_beta_dense(20, &mut derive(1, 0)).unwrap();
        assert_eq!(a, b);
        assert!((a.beta_star.norm() - 1.0).abs() < 1e-12);
        assert_eq!(a.support.len(), 20);
        let one = sample_beta_dense(1, &mut derive(2, 0)).unwrap();
        assert_eq!(one.beta_star[0].abs(), 1.0);
        assert!(sample_beta_dense(0, &mut derive(1, 0)).is_err());
    }

    #[test]
    fn sparse_beta_support() {
        let t = sample_beta_sparse(100, 5, &mut derive(3, 1)).unwrap();
        assert_eq!(t.support.len(), 5);
        assert_eq!(t.beta_star.iter().filter(|v| **v != 0.0).count(), 5);
        for j in 0..100 {
            assert_eq!(t.beta_star[j] != 0.0, t.support.contains(&j));
        }
        assert!((t.beta_star.norm() - 1.0).abs() < 1e-12);
        assert!(sample_beta_sparse(3, 4, &mut derive(3, 1)).is_err());
        assert!(sample_beta_sparse(3, 0, &mut derive(3, 1)).is_err());
    }

    #[test]
    fn dense_mean_near_zero() {
        let mut rng = derive(11, 0);
        let draws = 10_000;
        let mut mean = DVector::<f64>::zeros(5);
        for _ in 0..draws {
            mean += sample_beta_dense(5, &mut rng).unwrap().beta_star;
        }
        mean /= draws as f64;
        let bound = 3.0 / (5.0 * draws as f64).sqrt();
        assert!(mean.iter().all(|m| m.abs() < bound), "{mean}");
    }

    #[test]
    fn sparse_support_uniform() {
        let mut rng = derive(12, 0);
        let mut counts = std::collections::HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            let t = sample_beta_sparse(6, 2, &mut rng).unwrap();
            *counts.entry(t.support).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 15);
        for c in counts.values() {
            let f = *c as f64 / draws as f64;
            assert!((f - 1.0 / 15.0).abs() < 0.02, "{f}");
        }
    }

    #[test]
    fn noiseless_cs_labels_are_signs() {
        let mut e1 = DVector::zeros(4);
        e1[0] = 1.0;
        let truth = GroundTruth::from_vector(e1).unwrap();
        let model = LinkModel::one_bit_cs(0.0).unwrap();
        let data = generate_dataset(&model, &truth, 500, &mut derive(4, 0)).unwrap();
        for i in 0..data.n() {
            let x = data.covariates()[(i, 0)];
            assert_eq!(data.labels()[i], if x >= 0.0 { 1 } else { -1 });
        }
    }

    #[test]
    fn tiny_threshold_gives_all_positive() {
        let truth = sample_beta_dense(3, &mut derive(5, 0)).unwrap();
        let model = LinkModel::one_bit_pr(1e-300).unwrap();
        let data = generate_dataset(&model, &truth, 1000, &mut derive(5, 1)).unwrap();
        assert!(data.labels().iter().all(|&y| y == 1));
    }

    #[test]
    fn odd_sizes_trimmed() {
        let truth = sample_beta_dense(3, &mut derive(5, 0)).unwrap();
        let model = LinkModel::one_bit_cs(1.0).unwrap();
        let data = generate_dataset(&model, &truth, 11, &mut derive(5, 2)).unwrap();
        assert_eq!(data.n(), 10);
        assert!(data.trimmed());
        assert!(generate_dataset(&model, &truth, 1, &mut derive(5, 2)).is_err());

        let ds = Dataset::new(vec![1, -1, 1], DMatrix::from_element(3, 2, 0.5)).unwrap();
        assert_eq!(ds.n(), 2);
        assert!(ds.trimmed());
        assert!(Dataset::new(vec![1, 0], DMatrix::zeros(2, 1)).is_err());
        assert!(Dataset::new(vec![1], DMatrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn seeds_reproduce_and_differ() {
        let truth = sample_beta_dense(5, &mut derive(6, 0)).unwrap();
        let model = LinkModel::flipped_logistic(0.0, 0.1).unwrap();
        let a = generate_dataset(&model, &truth, 100, &mut derive(6, 1)).unwrap();
        let b = generate_dataset(&model, &truth, 100, &mut derive(6, 1)).unwrap();
        let c = generate_dataset(&model, &truth, 100, &mut derive(7, 1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.covariates(), c.covariates());
    }

    #[test]
    fn csv_layout() {
        let ds = Dataset::new(
            vec![1, -1],
            DMatrix::from_row_slice(2, 2, &[0.1, 2.0, -3.5, 1e-20]),
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "y,x1,x2");
        assert_eq!(lines.len(), 3);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "1");
        assert_eq!(fields[1].parse::<f64>().unwrap(), 0.1);
        assert_eq!(
            lines[2].split(',').nth(2).unwrap().parse::<f64>().unwrap(),
            1e-20
        );
    }
}
