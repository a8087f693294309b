//! Similarity-order transforms.
//!
//! The gram matrix `X^T X` of an embedding matrix is decomposed as
//! `Q diag(lambda) Q^T`; raising the eigenvalues to a chosen exponent alpha
//! yields the linear map `W = Q diag(lambda^alpha)`. Applying it to the
//! rows of `X` rescales the spectrum of the pairwise dot-product matrix
//! `X X^T`, so alpha = (n-1)/2 realizes nth-order similarity: the
//! transformed dot products equal `(X X^T)^n`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array2, ArrayView2, Axis, ShapeBuilder};
use rayon::prelude::*;

use crate::embeddings::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Rows per partial product in gram accumulation. Fixed so that results
/// are bit-reproducible run to run regardless of thread count.
const GRAM_CHUNK_ROWS: usize = 2048;

/// Maximum Jacobi sweeps before giving up.
const MAX_JACOBI_SWEEPS: usize = 50;

/// Default relative eigenvalue floor applied before exponentiation.
pub const DEFAULT_EIG_FLOOR: f64 = 1e-10;

/// Compute the gram matrix `X^T X`, exactly symmetric.
///
/// Accumulation runs over fixed-size row chunks; partial products may be
/// computed concurrently but are reduced in fixed chunk order.
pub fn gram(emb: &EmbeddingMatrix) -> Array2<f64> {
    gram_of(&emb.data())
}

pub(crate) fn gram_of(x: &ArrayView2<'_, f64>) -> Array2<f64> {
    let d = x.ncols();
    let chunks: Vec<ArrayView2<'_, f64>> = x.axis_chunks_iter(Axis(0), GRAM_CHUNK_ROWS).collect();
    let partials: Vec<Array2<f64>> = chunks.par_iter().map(|c| c.t().dot(c)).collect();
    let mut g = Array2::<f64>::zeros((d, d));
    for p in partials {
        g += &p;
    }
    // Symmetrize in place: G <- (G + G^T)/2.
    for i in 0..d {
        for j in (i + 1)..d {
            let m = 0.5 * (g[[i, j]] + g[[j, i]]);
            g[[i, j]] = m;
            g[[j, i]] = m;
        }
    }
    g
}

/// Orthogonal eigenvectors (columns of `q`) and eigenvalues of a symmetric
/// matrix, sorted descending. Signs are fixed so the largest-magnitude
/// component of each column is positive, making the factorization
/// deterministic for a fixed input.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    q: Array2<f64>,
    lambda: Vec<f64>,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Eigenvector matrix, eigenvectors as columns.
    pub fn q(&self) -> ArrayView2<'_, f64> {
        self.q.view()
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.first().copied().unwrap_or(0.0)
    }

    const MAGIC: &'static [u8; 8] = b"SIMEIG01";

    /// Persist as a flat binary record: magic, dimension, Q column-major,
    /// then the eigenvalues, all little-endian 64-bit.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let res = (|| {
            w.write_all(Self::MAGIC)?;
            w.write_u64::<LittleEndian>(self.dim() as u64)?;
            for col in self.q.columns() {
                for v in col {
                    w.write_f64::<LittleEndian>(*v)?;
                }
            }
            for v in &self.lambda {
                w.write_f64::<LittleEndian>(*v)?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
        if &magic != Self::MAGIC {
            return Err(Error::ParseAt {
                path: path.into(),
                offset: 0,
                msg: "bad magic, not an eigenbasis file".into(),
            });
        }
        let d = r
            .read_u64::<LittleEndian>()
            .map_err(|e| Error::io(path, e))? as usize;
        let mut qcols = vec![0f64; d * d];
        r.read_f64_into::<LittleEndian>(&mut qcols)
            .map_err(|e| Error::io(path, e))?;
        let mut lambda = vec![0f64; d];
        r.read_f64_into::<LittleEndian>(&mut lambda)
            .map_err(|e| Error::io(path, e))?;
        // Stored column-major; f-order shape restores it.
        let q = Array2::from_shape_vec((d, d).f(), qcols).expect("column-major shape");
        Ok(EigenBasis { q: q.as_standard_layout().to_owned(), lambda })
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Tiny negative eigenvalues from round-off (within `1e-8 * lambda_max` of
/// zero) are clamped to 0 so that gram matrices decompose as positive
/// semidefinite.
pub fn sym_eig(g: &Array2<f64>) -> Result<EigenBasis> {
    let d = g.nrows();
    if g.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: g.ncols(),
        });
    }
    let max_abs = g.iter().fold(0f64, |m, v| m.max(v.abs()));
    let mut asym = 0f64;
    for i in 0..d {
        for j in (i + 1)..d {
            asym = asym.max((g[[i, j]] - g[[j, i]]).abs());
        }
    }
    if asym > 1e-12 * max_abs {
        return Err(Error::NotSymmetric {
            residual: if max_abs > 0.0 { asym / max_abs } else { asym },
        });
    }

    let (mut eig, v) = jacobi(g, d)?;

    // Descending eigenvalue order; ties keep the lower original index first.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig[j].partial_cmp(&eig[i]).unwrap().then(i.cmp(&j)));
    let lambda_max = order.first().map(|&i| eig[i].max(0.0)).unwrap_or(0.0);
    for x in eig.iter_mut() {
        if *x < 0.0 && *x >= -1e-8 * lambda_max {
            *x = 0.0;
        }
    }

    let mut q = Array2::<f64>::zeros((d, d));
    let mut lambda = Vec::with_capacity(d);
    for (k, &src) in order.iter().enumerate() {
        lambda.push(eig[src]);
        // Sign convention: largest-magnitude component positive, ties on
        // magnitude broken by lowest index.
        let mut pivot = 0usize;
        let mut best = -1.0f64;
        for r in 0..d {
            let a = v[r * d + src].abs();
            if a > best {
                best = a;
                pivot = r;
            }
        }
        let flip = v[pivot * d + src] < 0.0;
        for r in 0..d {
            let val = v[r * d + src];
            q[[r, k]] = if flip { -val } else { val };
        }
    }

    Ok(EigenBasis { q, lambda })
}

/// Cyclic Jacobi with the Numerical Recipes rotation formulas. Returns the
/// diagonal (eigenvalues, unsorted) and the accumulated rotations V stored
/// row-major (`v[r*d+c]` is component r of eigenvector c).
fn jacobi(g: &Array2<f64>, d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a: Vec<f64> = g.iter().copied().collect();
    let mut v = vec![0f64; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    if d < 2 {
        return Ok(((0..d).map(|i| a[i * d + i]).collect(), v));
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok((vec![0.0; d], v));
    }
    let target = 1e-12 * frob;

    let mut off = off_diagonal_frobenius(&a, d);
    for sweep in 0..MAX_JACOBI_SWEEPS {
        if off <= target {
            return Ok(((0..d).map(|i| a[i * d + i]).collect(), v));
        }
        // During the first sweeps only rotate pairs above a threshold; this
        // is the classic strategy for fast early progress.
        let thresh = if sweep < 3 {
            0.2 * off * off / ((d * d) as f64)
        } else {
            0.0
        };
        for p in 0..d - 1 {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                let small = 100.0 * apq.abs();
                if sweep > 3
                    && a[p * d + p].abs() + small == a[p * d + p].abs()
                    && a[q * d + q].abs() + small == a[q * d + q].abs()
                {
                    a[p * d + q] = 0.0;
                    a[q * d + p] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh || apq == 0.0 {
                    continue;
                }
                let h = a[q * d + q] - a[p * d + p];
                let t = if h.abs() + small == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let delta = t * apq;
                a[p * d + p] -= delta;
                a[q * d + q] += delta;
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
                let rotate = |x: f64, y: f64| (x - s * (y + x * tau), y + s * (x - y * tau));
                for j in 0..p {
                    let (x, y) = rotate(a[j * d + p], a[j * d + q]);
                    a[j * d + p] = x;
                    a[p * d + j] = x;
                    a[j * d + q] = y;
                    a[q * d + j] = y;
                }
                for j in (p + 1)..q {
                    let (x, y) = rotate(a[p * d + j], a[j * d + q]);
                    a[p * d + j] = x;
                    a[j * d + p] = x;
                    a[j * d + q] = y;
                    a[q * d + j] = y;
                }
                for j in (q + 1)..d {
                    let (x, y) = rotate(a[p * d + j], a[q * d + j]);
                    a[p * d + j] = x;
                    a[j * d + p] = x;
                    a[q * d + j] = y;
                    a[j * d + q] = y;
                }
                for j in 0..d {
                    let (x, y) = rotate(v[j * d + p], v[j * d + q]);
                    v[j * d + p] = x;
                    v[j * d + q] = y;
                }
            }
        }
        off = off_diagonal_frobenius(&a, d);
    }
    if off <= target {
        return Ok(((0..d).map(|i| a[i * d + i]).collect(), v));
    }
    Err(Error::NoConvergence { residual: off })
}

fn off_diagonal_frobenius(a: &[f64], d: usize) -> f64 {
    let mut s = 0f64;
    for p in 0..d {
        for q in (p + 1)..d {
            s += 2.0 * a[p * d + q] * a[p * d + q];
        }
    }
    s.sqrt()
}

/// An eigenbasis plus exponent: the map `W = Q diag(lambda_eff^alpha)`
/// where `lambda_eff = max(lambda, eig_floor * lambda_max)`. The implied
/// similarity order is `n = 2 alpha + 1`.
#[derive(Debug, Clone)]
pub struct TransformSpec {
    basis: Arc<EigenBasis>,
    alpha: f64,
    eig_floor: f64,
}

/// Build a transform with the default eigenvalue floor.
pub fn make_transform(basis: Arc<EigenBasis>, alpha: f64) -> TransformSpec {
    TransformSpec {
        basis,
        alpha,
        eig_floor: DEFAULT_EIG_FLOOR,
    }
}

impl TransformSpec {
    pub fn with_floor(mut self, eig_floor: f64) -> Self {
        self.eig_floor = eig_floor;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    /// Effective eigenvalues after flooring. The floor is relative to the
    /// largest eigenvalue; a degenerate all-zero spectrum maps to ones so
    /// every exponent stays finite.
    pub fn effective_eigenvalues(&self) -> Vec<f64> {
        let lmax = self.basis.lambda_max();
        if lmax <= 0.0 {
            return vec![1.0; self.basis.dim()];
        }
        let floor = self.eig_floor * lmax;
        self.basis
            .eigenvalues()
            .iter()
            .map(|&l| l.max(floor))
            .collect()
    }

    /// Number of eigenvalues raised to the floor.
    pub fn clamped_count(&self) -> usize {
        let lmax = self.basis.lambda_max();
        if lmax <= 0.0 {
            return self.basis.dim();
        }
        let floor = self.eig_floor * lmax;
        self.basis
            .eigenvalues()
            .iter()
            .filter(|&&l| l < floor)
            .count()
    }

    /// Per-column scale factors `lambda_eff^alpha`.
    pub fn column_scales(&self) -> Vec<f64> {
        self.effective_eigenvalues()
            .iter()
            .map(|l| l.powf(self.alpha))
            .collect()
    }

    /// Materialize `W = Q diag(lambda_eff^alpha)` as a dense matrix.
    pub fn matrix(&self) -> Array2<f64> {
        let scales = self.column_scales();
        let mut w = self.basis.q.clone();
        for (k, mut col) in w.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|v| v * scales[k]);
        }
        w
    }
}

/// Apply `W_alpha` to every row: returns `X' = X W`. Vocabulary and
/// dimension are unchanged.
pub fn apply_transform(emb: &EmbeddingMatrix, t: &TransformSpec) -> Result<EmbeddingMatrix> {
    if emb.dim() != t.basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: t.basis.dim(),
            actual: emb.dim(),
        });
    }
    let w = t.matrix();
    let data = emb.data().dot(&w);
    emb.with_data(data)
}

/// Rotate once: returns `X Q`. Per-alpha transforms then reduce to column
/// scaling of this matrix, which is the sweep fast path.
pub fn precompute_rotated(emb: &EmbeddingMatrix, basis: &EigenBasis) -> Result<EmbeddingMatrix> {
    if emb.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: emb.dim(),
        });
    }
    let data = emb.data().dot(&basis.q);
    emb.with_data(data)
}

/// Scale column `k` of the matrix by `scales[k]`.
pub fn scale_columns(emb: &EmbeddingMatrix, scales: &[f64]) -> Result<EmbeddingMatrix> {
    if scales.len() != emb.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.dim(),
            actual: scales.len(),
        });
    }
    let mut data = emb.data().to_owned();
    for (k, mut col) in data.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| v * scales[k]);
    }
    emb.with_data(data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Dot,
    Cosine,
}

/// Similarity of two rows. Cosine with a zero row is 0 by convention.
pub fn pairwise_similarity(
    emb: &EmbeddingMatrix,
    i: usize,
    j: usize,
    metric: Metric,
) -> Result<f64> {
    let len = emb.len();
    for id in [i, j] {
        if id >= len {
            return Err(Error::RowOutOfRange { index: id, len });
        }
    }
    let a = emb.row(i);
    let b = emb.row(j);
    let dot = a.dot(&b);
    Ok(match metric {
        Metric::Dot => dot,
        Metric::Cosine => {
            let na = a.dot(&a).sqrt();
            let nb = b.dot(&b).sqrt();
            if na == 0.0 || nb == 0.0 {
                0.0
            } else {
                dot / (na * nb)
            }
        }
    })
}
