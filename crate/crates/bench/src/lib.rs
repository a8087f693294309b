//! Shared fixtures for the benchmarks.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simorder::{EmbeddingMatrix, Vocabulary};

/// Deterministic random model of the given shape.
pub fn random_embeddings(seed: u64, rows: usize, cols: usize) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0));
    let words: Vec<String> = (0..rows).map(|i| format!("w{i}")).collect();
    EmbeddingMatrix::new(Vocabulary::new(words).unwrap(), data).unwrap()
}

/// Deterministic random symmetric PSD matrix.
pub fn random_psd(seed: u64, dim: usize) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Array2::from_shape_fn((dim, dim), |_| rng.gen_range(-1.0..1.0));
    let mut g = a.t().dot(&a);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let m = 0.5 * (g[[i, j]] + g[[j, i]]);
            g[[i, j]] = m;
            g[[j, i]] = m;
        }
    }
    g
}
