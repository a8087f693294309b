//! Unsupervised semantic textual similarity: each sentence is scored by the
//! centroid of its content-word vectors, sentence pairs by centroid cosine,
//! and the whole dataset by Pearson correlation against the gold scores.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;

use crate::datasets::StsDataset;
use crate::embeddings::{EmbeddingMatrix, LookupMode};
use crate::error::{Error, Result};
use crate::eval::pearson;

/// The widely used English stopword list shipped as a default; a custom
/// list file can be loaded instead.
const DEFAULT_ENGLISH: &str = "i me my myself we our ours ourselves you you're you've you'll \
you'd your yours yourself yourselves he him his himself she she's her hers herself it it's its \
itself they them their theirs themselves what which who whom this that that'll these those am \
is are was were be been being have has had having do does did doing a an the and but if or \
because as until while of at by for with about against between into through during before after \
above below to from up down in out on off over under again further then once here there when \
where why how all any both each few more most other some such no nor not only own same so than \
too very s t can will just don don't should should've now d ll m o re ve y ain aren aren't \
couldn couldn't didn didn't doesn doesn't hadn hadn't hasn hasn't haven haven't isn isn't ma \
mightn mightn't mustn mustn't needn needn't shan shan't shouldn shouldn't wasn wasn't weren \
weren't won won't wouldn wouldn't";

/// A set of lowercase stopwords.
#[derive(Debug, Clone)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    pub fn empty() -> Self {
        StopwordList {
            words: HashSet::new(),
        }
    }

    pub fn default_english() -> Self {
        StopwordList {
            words: DEFAULT_ENGLISH
                .split_whitespace()
                .map(|w| w.to_string())
                .collect(),
        }
    }

    /// Load one token per line; `#`-prefixed comment lines and blank lines
    /// are ignored. Entries are lowercased.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut words = HashSet::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let token = line.trim();
            if token.is_empty() || token.starts_with('#') {
                continue;
            }
            words.insert(token.to_lowercase());
        }
        Ok(StopwordList { words })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lowercase, split on whitespace, strip leading/trailing non-alphanumeric
/// characters from each token, drop empty results.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence
        .to_lowercase()
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

/// A sentence centroid and how many tokens contributed to it. Zero
/// contributing tokens leaves the zero vector.
#[derive(Debug, Clone)]
pub struct Centroid {
    pub vector: Vec<f64>,
    pub tokens_used: usize,
}

impl Centroid {
    pub fn is_zero(&self) -> bool {
        self.tokens_used == 0
    }
}

/// Mean of the vectors of tokens that are not stopwords and are in
/// vocabulary.
pub fn sentence_centroid(
    emb: &EmbeddingMatrix,
    tokens: &[String],
    stop: &StopwordList,
    mode: LookupMode,
) -> Centroid {
    let mut vector = vec![0.0; emb.dim()];
    let mut used = 0usize;
    for token in tokens {
        if stop.contains(token) {
            continue;
        }
        if let Some(id) = emb.lookup(token, mode) {
            for (acc, v) in vector.iter_mut().zip(emb.row(id)) {
                *acc += v;
            }
            used += 1;
        }
    }
    if used > 0 {
        let inv = 1.0 / used as f64;
        for v in vector.iter_mut() {
            *v *= inv;
        }
    }
    Centroid {
        vector,
        tokens_used: used,
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StsResult {
    pub pearson: f64,
    pub items_scored: usize,
    pub zero_vector_items: usize,
}

/// Score every sentence pair by centroid cosine (0 if either centroid is
/// zero) and correlate with the gold scores.
pub fn eval_sts(
    emb: &EmbeddingMatrix,
    ds: &StsDataset,
    stop: &StopwordList,
    mode: LookupMode,
) -> Result<StsResult> {
    if ds.items.is_empty() {
        return Err(Error::UndefinedCorrelation("empty dataset".to_string()));
    }
    let scored: Vec<(f64, bool)> = ds
        .items
        .par_iter()
        .map(|item| {
            let c1 = sentence_centroid(emb, &tokenize(&item.sentence1), stop, mode);
            let c2 = sentence_centroid(emb, &tokenize(&item.sentence2), stop, mode);
            if c1.is_zero() || c2.is_zero() {
                (0.0, true)
            } else {
                (cosine(&c1.vector, &c2.vector), false)
            }
        })
        .collect();
    let model: Vec<f64> = scored.iter().map(|(s, _)| *s).collect();
    let gold: Vec<f64> = ds.items.iter().map(|i| i.gold).collect();
    Ok(StsResult {
        pearson: pearson(&model, &gold)?,
        items_scored: ds.items.len(),
        zero_vector_items: scored.iter().filter(|(_, z)| *z).count(),
    })
}
