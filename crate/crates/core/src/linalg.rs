//! Dense symmetric linear algebra helpers.
//!
//! Eigendecompositions are delegated to `faer`; the rest of the crate works
//! with `nalgebra` types.

use nalgebra::{DMatrix, DVector};

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `k` pairs with `values[k]`.
    pub vectors: DMatrix<f64>,
}

/// Full eigendecomposition of the symmetric part of `a` (lower triangle is read).
pub fn sym_eigen(a: &DMatrix<f64>) -> SymEigen {
    let p = a.nrows();
    debug_assert_eq!(p, a.ncols());
    let m = faer::Mat::<f64>::from_fn(p, p, |i, j| a[(i, j)]);
    let evd = m.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    // faer returns ascending order.
    let values = (0..p).rev().map(|k| s.read(k)).collect();
    let vectors = DMatrix::from_fn(p, p, |i, k| u.read(i, p - 1 - k));
    SymEigen { values, vectors }
}

/// Flips `v` so its largest-magnitude coordinate is positive (ties: lowest index).
pub fn sign_normalize(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

/// `‖A − Aᵀ‖_F`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).norm()
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Largest singular value of a symmetric matrix.
pub fn sym_op_norm(a: &DMatrix<f64>) -> f64 {
    sym_eigen(a)
        .values
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Unit-norm check used on user-supplied vectors.
pub fn is_unit(v: &DVector<f64>, tol: f64) -> bool {
    (v.norm() - 1.0).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_known_matrix() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0]);
        let e = sym_eigen(&a);
        assert!((e.values[0] - 5.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        assert!((e.values[2] - 1.0).abs() < 1e-12);
        let recon = &e.vectors
            * DMatrix::from_diagonal(&DVector::from_vec(e.values.clone()))
            * e.vectors.transpose();
        assert!((recon - a).norm() < 1e-12);
    }

    #[test]
    fn sign_convention() {
        let mut v = DVector::from_vec(vec![0.3, -0.9, 0.1]);
        sign_normalize(&mut v);
        assert_eq!(v[1], 0.9);
        let mut tie = DVector::from_vec(vec![-0.5, 0.5]);
        sign_normalize(&mut tie);
        assert_eq!(tie[0], 0.5);
    }
}
