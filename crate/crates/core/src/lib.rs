//! Similarity-order post-processing for pre-trained word embeddings.
//!
//! Any embedding matrix `X` induces the similarity matrix `M(X) = X X^T`.
//! Eigendecomposing the gram matrix `X^T X = Q diag(lambda) Q^T` yields a
//! family of linear maps `W_alpha = Q diag(lambda^alpha)`; applying
//! `W_(n-1)/2` to the rows of `X` produces embeddings whose dot products
//! equal the nth power `(X X^T)^n`, i.e. nth-order similarity. `alpha` is
//! continuous, so the similarity order can be tuned smoothly, in either
//! direction, without retraining anything.
//!
//! The crate provides:
//!
//! - [`embeddings`]: loading, saving and row-normalizing embedding
//!   matrices in the common interchange formats;
//! - [`transform`]: gram matrix, symmetric eigendecomposition and the
//!   alpha-transform itself;
//! - [`datasets`]: parsers for the analogy, word-similarity and STS
//!   benchmark files;
//! - [`eval`]: analogy accuracy, Spearman/Pearson correlation and
//!   word-similarity evaluation;
//! - [`sts`]: the stopword-filtered centroid model for semantic textual
//!   similarity;
//! - [`sweep`] and [`report`]: efficient alpha grids (one rotation, then
//!   column scalings) and CSV/Markdown reporting.

pub mod datasets;
pub mod embeddings;
mod error;
pub mod eval;
pub mod report;
pub mod sts;
pub mod sweep;
pub mod transform;

pub use embeddings::{
    load_embeddings, normalize_rows, save_embeddings, EmbeddingFormat, EmbeddingMatrix,
    LookupMode, Vocabulary,
};
pub use error::{Error, Result};
pub use report::{EvalReport, Provenance, ReportRecord};
pub use sweep::{alpha_grid, run_sweep, run_sweep_prepared, run_task, SweepConfig, SweepTask};
pub use transform::{
    apply_transform, gram, make_transform, pairwise_similarity, precompute_rotated,
    scale_columns, sym_eig, EigenBasis, Metric, TransformSpec,
};
