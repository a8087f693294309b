//! Intrinsic evaluation: analogy accuracy and word-similarity rank
//! correlation, plus the correlation statistics used by every task.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::datasets::{AnalogyDataset, Category, ScoredPairDataset};
use crate::embeddings::{normalize_rows, EmbeddingMatrix, LookupMode};
use crate::error::{Error, Result};
use crate::transform::{pairwise_similarity, Metric};

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "zero variance in input".to_string(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Average fractional ranks, 1-based; ties receive the mean of the ranks
/// they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap().then(i.cmp(&j)));
    let mut ranks = vec![0.0; x.len()];
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && x[order[end]] == x[order[pos]] {
            end += 1;
        }
        // positions pos..end hold equal values; mean 1-based rank
        let mean = (pos + 1 + end) as f64 / 2.0;
        for &idx in &order[pos..end] {
            ranks[idx] = mean;
        }
        pos = end;
    }
    ranks
}

/// Spearman rank correlation: Pearson correlation of average-fractional
/// ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Resolve an analogy by 3CosAdd: the row maximizing
/// `cos(w,b) - cos(w,a) + cos(w,c)` over all rows except a, b and c.
/// Rows must be unit length; ties break toward the lowest row id.
pub fn analogy_query(emb: &EmbeddingMatrix, a: usize, b: usize, c: usize) -> usize {
    let x = emb.data();
    let mut target = x.row(b).to_owned();
    target -= &x.row(a);
    target += &x.row(c);
    argmax_excluding(&x.dot(&target).view(), [a, b, c])
}

fn argmax_excluding(scores: &ArrayView1<'_, f64>, excluded: [usize; 3]) -> usize {
    let mut best = usize::MAX;
    let mut best_score = f64::NEG_INFINITY;
    for (w, &s) in scores.iter().enumerate() {
        if excluded.contains(&w) {
            continue;
        }
        if s > best_score {
            best_score = s;
            best = w;
        }
    }
    best
}

/// Batched 3CosAdd over many (a,b,c) triples; one gemm per batch instead of
/// one matrix-vector product per question.
fn analogy_query_batch(emb: &EmbeddingMatrix, queries: &[[usize; 3]]) -> Vec<usize> {
    const BATCH: usize = 128;
    let x = emb.data();
    let d = emb.dim();
    queries
        .par_chunks(BATCH)
        .flat_map_iter(|chunk| {
            let mut targets = Array2::<f64>::zeros((d, chunk.len()));
            for (k, &[a, b, c]) in chunk.iter().enumerate() {
                for j in 0..d {
                    targets[[j, k]] = x[[b, j]] - x[[a, j]] + x[[c, j]];
                }
            }
            let scores = x.dot(&targets);
            chunk
                .iter()
                .enumerate()
                .map(|(k, &[a, b, c])| argmax_excluding(&scores.column(k), [a, b, c]))
                .collect::<Vec<usize>>()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SectionResult {
    pub name: String,
    pub category: Category,
    pub correct: usize,
    pub answered: usize,
    pub skipped: usize,
}

impl SectionResult {
    pub fn accuracy(&self) -> f64 {
        if self.answered == 0 {
            0.0
        } else {
            self.correct as f64 / self.answered as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalogyResult {
    pub sections: Vec<SectionResult>,
}

#[derive(Debug, Clone, Copy)]
pub struct CategoryTally {
    pub correct: usize,
    pub answered: usize,
    pub skipped: usize,
}

impl CategoryTally {
    pub fn accuracy(&self) -> f64 {
        if self.answered == 0 {
            0.0
        } else {
            self.correct as f64 / self.answered as f64
        }
    }
}

impl AnalogyResult {
    pub fn tally(&self, category: Category) -> CategoryTally {
        let mut t = CategoryTally {
            correct: 0,
            answered: 0,
            skipped: 0,
        };
        for s in self.sections.iter().filter(|s| s.category == category) {
            t.correct += s.correct;
            t.answered += s.answered;
            t.skipped += s.skipped;
        }
        t
    }

    pub fn semantic_accuracy(&self) -> f64 {
        self.tally(Category::Semantic).accuracy()
    }

    pub fn syntactic_accuracy(&self) -> f64 {
        self.tally(Category::Syntactic).accuracy()
    }
}

/// Run the analogy benchmark. Rows are normalized once; any question with
/// an out-of-vocabulary word is skipped and accuracy is taken over the
/// answered questions.
pub fn eval_analogy(
    emb: &EmbeddingMatrix,
    ds: &AnalogyDataset,
    mode: LookupMode,
) -> AnalogyResult {
    let (normalized, _zero_rows) = normalize_rows(emb);
    let mut sections = Vec::with_capacity(ds.sections.len());
    for section in &ds.sections {
        let mut resolved: Vec<[usize; 3]> = Vec::new();
        let mut expected: Vec<usize> = Vec::new();
        let mut skipped = 0usize;
        for q in &section.questions {
            let ids: Vec<Option<usize>> =
                q.iter().map(|w| normalized.lookup(w, mode)).collect();
            match (ids[0], ids[1], ids[2], ids[3]) {
                (Some(a), Some(b), Some(c), Some(d)) => {
                    resolved.push([a, b, c]);
                    expected.push(d);
                }
                _ => skipped += 1,
            }
        }
        let answers = analogy_query_batch(&normalized, &resolved);
        let correct = answers
            .iter()
            .zip(&expected)
            .filter(|(got, want)| got == want)
            .count();
        sections.push(SectionResult {
            name: section.name.clone(),
            category: section.category(),
            correct,
            answered: resolved.len(),
            skipped,
        });
    }
    let result = AnalogyResult { sections };
    for cat in [Category::Semantic, Category::Syntactic] {
        let t = result.tally(cat);
        if t.answered == 0 && t.skipped > 0 {
            log::warn!("all {cat:?} questions skipped (out of vocabulary); accuracy reported as 0");
        }
    }
    result
}

#[derive(Debug, Clone, Copy)]
pub struct WordSimResult {
    pub spearman: f64,
    pub covered_pairs: usize,
    pub skipped_pairs: usize,
}

/// Word-similarity benchmark: Spearman correlation between per-pair cosine
/// scores and the gold scores, over the pairs with both words in
/// vocabulary.
pub fn eval_wordsim(
    emb: &EmbeddingMatrix,
    ds: &ScoredPairDataset,
    mode: LookupMode,
) -> Result<WordSimResult> {
    let mut model = Vec::with_capacity(ds.pairs.len());
    let mut gold = Vec::with_capacity(ds.pairs.len());
    let mut skipped = 0usize;
    for pair in &ds.pairs {
        match (emb.lookup(&pair.word1, mode), emb.lookup(&pair.word2, mode)) {
            (Some(i), Some(j)) => {
                model.push(pairwise_similarity(emb, i, j, Metric::Cosine)?);
                gold.push(pair.gold);
            }
            _ => skipped += 1,
        }
    }
    if model.len() < 2 {
        return Err(Error::TooFewPairs {
            covered: model.len(),
        });
    }
    Ok(WordSimResult {
        spearman: spearman(&model, &gold)?,
        covered_pairs: model.len(),
        skipped_pairs: skipped,
    })
}
