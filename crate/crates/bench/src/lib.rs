//! Fixed-seed fixtures shared by the benchmarks.

use nalgebra::{DMatrix, DVector};
use onebit_core::{
    generate_dataset, sample_beta_dense, sample_beta_sparse, second_moment, Dataset, GroundTruth,
    LinkModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub truth: GroundTruth,
    pub data: Dataset,
    pub moment: DMatrix<f64>,
}

impl Fixture {
    pub fn dense(model: LinkModel, n: usize, p: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = sample_beta_dense(p, &mut rng).expect("valid dimension");
        Self::build(model, truth, n, &mut rng)
    }

    pub fn sparse(model: LinkModel, n: usize, p: usize, s: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = sample_beta_sparse(p, s, &mut rng).expect("valid sparsity");
        Self::build(model, truth, n, &mut rng)
    }

    fn build(model: LinkModel, truth: GroundTruth, n: usize, rng: &mut ChaCha8Rng) -> Self {
        let data = generate_dataset(&model, &truth, n, rng).expect("valid model");
        let moment = second_moment(&data).expect("nonempty data").into_matrix();
        Self {
            truth,
            data,
            moment,
        }
    }

    /// First basis vector, a deterministic start for iterative solvers.
    pub fn start(&self) -> DVector<f64> {
        let mut e = DVector::zeros(self.data.p());
        e[0] = 1.0;
        e
    }
}
