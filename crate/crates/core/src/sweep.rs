//! Alpha sweeps: the gram matrix and its eigendecomposition are computed
//! once, the rotation `X Q` is precomputed once, and every grid point then
//! costs one column scaling plus the task evaluations.

use std::sync::Arc;

use crate::datasets::{AnalogyDataset, Category, ScoredPairDataset, StsDataset};
use crate::embeddings::{normalize_rows, EmbeddingMatrix, LookupMode};
use crate::error::{Error, Result};
use crate::eval::{eval_analogy, eval_wordsim};
use crate::report::{EvalReport, Provenance, ReportRecord, ERROR_METRIC};
use crate::sts::{eval_sts, StopwordList};
use crate::transform::{
    gram, make_transform, precompute_rotated, scale_columns, sym_eig, DEFAULT_EIG_FLOOR,
};

/// Sweep parameters. The grid is `start, start+step, ...` up to `end`
/// (inclusive within 1e-12), each point rounded to 2 decimals.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub alpha_start: f64,
    pub alpha_end: f64,
    pub alpha_step: f64,
    pub lookup: LookupMode,
    pub pre_normalize: bool,
    pub eig_floor: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            alpha_start: -1.0,
            alpha_end: 1.0,
            alpha_step: 0.05,
            lookup: LookupMode::default(),
            pre_normalize: false,
            eig_floor: DEFAULT_EIG_FLOOR,
        }
    }
}

/// One benchmark to run at every grid point.
#[derive(Debug, Clone)]
pub enum SweepTask {
    Analogy {
        name: String,
        dataset: AnalogyDataset,
    },
    WordSim {
        name: String,
        dataset: ScoredPairDataset,
    },
    Sts {
        name: String,
        dataset: StsDataset,
        stopwords: StopwordList,
    },
}

impl SweepTask {
    pub fn task_kind(&self) -> &'static str {
        match self {
            SweepTask::Analogy { .. } => "analogy",
            SweepTask::WordSim { .. } => "wordsim",
            SweepTask::Sts { .. } => "sts",
        }
    }

    fn dataset_name(&self) -> &str {
        match self {
            SweepTask::Analogy { name, .. } => name,
            SweepTask::WordSim { name, .. } => name,
            SweepTask::Sts { name, .. } => name,
        }
    }
}

/// The alpha grid for the given bounds, each point rounded to 2 decimals.
pub fn alpha_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
    }
    if !start.is_finite() || !end.is_finite() || start > end {
        return Err(Error::InvalidGrid(format!(
            "bad range [{start}, {end}]"
        )));
    }
    let mut grid = Vec::new();
    let mut k = 0usize;
    loop {
        let alpha = start + k as f64 * step;
        if alpha > end + 1e-12 {
            break;
        }
        grid.push(round2(alpha));
        k += 1;
    }
    Ok(grid)
}

fn round2(x: f64) -> f64 {
    let r = (x * 100.0).round() / 100.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Evaluate one set of embeddings (already transformed) on one task.
pub fn run_task(
    emb: &EmbeddingMatrix,
    task: &SweepTask,
    lookup: LookupMode,
    alpha: f64,
) -> Result<Vec<ReportRecord>> {
    let name = task.dataset_name().to_string();
    match task {
        SweepTask::Analogy { dataset, .. } => {
            let res = eval_analogy(emb, dataset, lookup);
            let mut records = Vec::with_capacity(2);
            for (metric, cat) in [
                ("semantic_accuracy", Category::Semantic),
                ("syntactic_accuracy", Category::Syntactic),
            ] {
                let tally = res.tally(cat);
                records.push(ReportRecord {
                    alpha,
                    task: "analogy".into(),
                    dataset: name.clone(),
                    metric: metric.into(),
                    value: tally.accuracy(),
                    covered: tally.answered as u64,
                    skipped: tally.skipped as u64,
                });
            }
            Ok(records)
        }
        SweepTask::WordSim { dataset, .. } => {
            let res = eval_wordsim(emb, dataset, lookup)?;
            Ok(vec![ReportRecord {
                alpha,
                task: "wordsim".into(),
                dataset: name,
                metric: "spearman".into(),
                value: res.spearman,
                covered: res.covered_pairs as u64,
                skipped: res.skipped_pairs as u64,
            }])
        }
        SweepTask::Sts { dataset, stopwords, .. } => {
            let res = eval_sts(emb, dataset, stopwords, lookup)?;
            Ok(vec![ReportRecord {
                alpha,
                task: "sts".into(),
                dataset: name,
                metric: "pearson".into(),
                value: res.pearson,
                covered: res.items_scored as u64,
                skipped: res.zero_vector_items as u64,
            }])
        }
    }
}

/// Run every task at every grid point. Per-alpha task failures become
/// error records and the sweep continues.
pub fn run_sweep(
    emb: &EmbeddingMatrix,
    cfg: &SweepConfig,
    tasks: &[SweepTask],
    provenance: Provenance,
) -> Result<EvalReport> {
    run_sweep_prepared(emb, cfg, tasks, None, provenance)
}

/// Like [`run_sweep`], with an optional precomputed eigenbasis (for
/// resuming from a saved basis or decomposing a different gram scope).
/// When a basis is given, `cfg.pre_normalize` must describe how `emb` was
/// already prepared; no normalization is applied here.
pub fn run_sweep_prepared(
    emb: &EmbeddingMatrix,
    cfg: &SweepConfig,
    tasks: &[SweepTask],
    basis: Option<Arc<crate::transform::EigenBasis>>,
    provenance: Provenance,
) -> Result<EvalReport> {
    let grid = alpha_grid(cfg.alpha_start, cfg.alpha_end, cfg.alpha_step)?;
    let base;
    let emb = if cfg.pre_normalize && basis.is_none() {
        base = normalize_rows(emb).0;
        &base
    } else {
        emb
    };
    let basis = match basis {
        Some(b) => b,
        None => Arc::new(sym_eig(&gram(emb))?),
    };
    let rotated = precompute_rotated(emb, &basis)?;

    let mut records = Vec::new();
    for &alpha in &grid {
        let t = make_transform(basis.clone(), alpha).with_floor(cfg.eig_floor);
        let transformed = scale_columns(&rotated, &t.column_scales())?;
        for task in tasks {
            match run_task(&transformed, task, cfg.lookup, alpha) {
                Ok(mut recs) => records.append(&mut recs),
                Err(err) => {
                    log::warn!(
                        "alpha {alpha}: {} on {} failed: {err}",
                        task.task_kind(),
                        task.dataset_name()
                    );
                    records.push(ReportRecord {
                        alpha,
                        task: task.task_kind().into(),
                        dataset: task.dataset_name().into(),
                        metric: ERROR_METRIC.into(),
                        value: 0.0,
                        covered: 0,
                        skipped: 0,
                    });
                }
            }
        }
    }
    Ok(EvalReport {
        provenance,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::ScoredPair;
    use crate::embeddings::Vocabulary;
    use crate::transform::apply_transform;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_default_has_41_points() {
        let grid = alpha_grid(-1.0, 1.0, 0.05).unwrap();
        assert_eq!(grid.len(), 41);
        assert_eq!(grid[0], -1.0);
        assert_eq!(grid[20], 0.0);
        assert!(grid[20].is_sign_positive());
        assert_eq!(grid[40], 1.0);
        assert_eq!(grid[3], -0.85);
    }

    #[test]
    fn grid_degenerate_single_point() {
        assert_eq!(alpha_grid(0.0, 0.0, 0.05).unwrap(), vec![0.0]);
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(alpha_grid(0.0, 1.0, 0.0).is_err());
        assert!(alpha_grid(1.0, 0.0, 0.1).is_err());
        assert!(alpha_grid(0.0, 1.0, -0.5).is_err());
    }

    fn random_emb(seed: u64, rows: usize, cols: usize) -> EmbeddingMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0));
        let words: Vec<String> = (0..rows).map(|i| format!("w{i}")).collect();
        EmbeddingMatrix::new(Vocabulary::new(words).unwrap(), data).unwrap()
    }

    fn toy_wordsim_task(emb: &EmbeddingMatrix) -> SweepTask {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut pairs = Vec::new();
        for _ in 0..30 {
            let i = rng.gen_range(0..emb.len());
            let j = rng.gen_range(0..emb.len());
            pairs.push(ScoredPair {
                word1: format!("w{i}"),
                word2: format!("w{j}"),
                gold: rng.gen_range(0.0..10.0),
            });
        }
        SweepTask::WordSim {
            name: "toy".into(),
            dataset: ScoredPairDataset {
                name: "toy".into(),
                pairs,
            },
        }
    }

    #[test]
    fn sweep_matches_direct_transform_path() {
        let emb = random_emb(5, 60, 8);
        let task = toy_wordsim_task(&emb);
        let cfg = SweepConfig {
            alpha_start: -1.0,
            alpha_end: 1.0,
            alpha_step: 0.5,
            ..SweepConfig::default()
        };
        let report = run_sweep(&emb, &cfg, std::slice::from_ref(&task), Provenance::default()).unwrap();
        assert_eq!(report.records.len(), 5);

        let basis = Arc::new(sym_eig(&gram(&emb)).unwrap());
        for rec in &report.records {
            let t = make_transform(basis.clone(), rec.alpha);
            let direct = apply_transform(&emb, &t).unwrap();
            let direct_recs = run_task(&direct, &task, cfg.lookup, rec.alpha).unwrap();
            assert!(
                (direct_recs[0].value - rec.value).abs() <= 1e-9,
                "alpha {}: {} vs {}",
                rec.alpha,
                direct_recs[0].value,
                rec.value
            );
        }
    }

    #[test]
    fn sweep_is_reproducible() {
        let emb = random_emb(6, 40, 6);
        let task = toy_wordsim_task(&emb);
        let cfg = SweepConfig {
            alpha_start: -0.5,
            alpha_end: 0.5,
            alpha_step: 0.25,
            ..SweepConfig::default()
        };
        let r1 = run_sweep(&emb, &cfg, std::slice::from_ref(&task), Provenance::default()).unwrap();
        let r2 = run_sweep(&emb, &cfg, &[task], Provenance::default()).unwrap();
        assert_eq!(r1.records, r2.records);
    }

    #[test]
    fn sweep_records_errors_and_continues() {
        let emb = random_emb(7, 10, 4);
        // only one pair is in vocabulary, so wordsim fails at every alpha
        let bad = SweepTask::WordSim {
            name: "bad".into(),
            dataset: ScoredPairDataset {
                name: "bad".into(),
                pairs: vec![
                    ScoredPair { word1: "w0".into(), word2: "w1".into(), gold: 1.0 },
                    ScoredPair { word1: "w0".into(), word2: "nope".into(), gold: 2.0 },
                ],
            },
        };
        let good = toy_wordsim_task(&emb);
        let cfg = SweepConfig {
            alpha_start: 0.0,
            alpha_end: 0.0,
            alpha_step: 1.0,
            ..SweepConfig::default()
        };
        let report = run_sweep(&emb, &cfg, &[bad, good], Provenance::default()).unwrap();
        assert_eq!(report.records.len(), 2);
        assert_eq!(report.records[0].metric, ERROR_METRIC);
        assert_eq!(report.records[1].metric, "spearman");
    }
}
