//! Sweep reports: one record per (alpha, task, dataset, metric), CSV
//! persistence, and Markdown rendering with the per-task best rows and the
//! figure-style derived columns (relative error reduction for analogy,
//! metric delta for similarity and STS).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metric name used for records of failed task evaluations.
pub const ERROR_METRIC: &str = "error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub alpha: f64,
    pub task: String,
    pub dataset: String,
    pub metric: String,
    pub value: f64,
    pub covered: u64,
    pub skipped: u64,
}

/// What produced a report; enough to reproduce it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub embedding: String,
    pub max_vocab: Option<usize>,
    pub flags: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub provenance: Provenance,
    pub records: Vec<ReportRecord>,
}

impl EvalReport {
    /// Records sorted by (alpha, task, dataset, metric); the canonical
    /// emission order.
    pub fn sorted_records(&self) -> Vec<&ReportRecord> {
        let mut recs: Vec<&ReportRecord> = self.records.iter().collect();
        recs.sort_by(|a, b| {
            a.alpha
                .partial_cmp(&b.alpha)
                .unwrap()
                .then_with(|| a.task.cmp(&b.task))
                .then_with(|| a.dataset.cmp(&b.dataset))
                .then_with(|| a.metric.cmp(&b.metric))
        });
        recs
    }

    pub fn write_csv_to(&self, mut w: impl Write) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Io {
            path: "<report>".into(),
            source: e,
        };
        writeln!(w, "# embedding: {}", self.provenance.embedding).map_err(io_err)?;
        if let Some(cap) = self.provenance.max_vocab {
            writeln!(w, "# max_vocab: {cap}").map_err(io_err)?;
        }
        writeln!(w, "# flags: {}", self.provenance.flags).map_err(io_err)?;
        writeln!(w, "# timestamp: {}", self.provenance.timestamp).map_err(io_err)?;
        let mut csv = csv::Writer::from_writer(w);
        for rec in self.sorted_records() {
            csv.serialize(rec)
                .map_err(|e| Error::InvalidGrid(format!("csv write: {e}")))?;
        }
        csv.flush().map_err(io_err)?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<EvalReport> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut provenance = Provenance::default();
        let mut body = String::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some((key, value)) = comment.split_once(':') {
                    let value = value.trim().to_string();
                    match key.trim() {
                        "embedding" => provenance.embedding = value,
                        "max_vocab" => provenance.max_vocab = value.parse().ok(),
                        "flags" => provenance.flags = value,
                        "timestamp" => provenance.timestamp = value,
                        _ => {}
                    }
                }
                continue;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let mut records = Vec::new();
        for rec in reader.deserialize() {
            let rec: ReportRecord =
                rec.map_err(|e| Error::parse(path, 0, format!("malformed report: {e}")))?;
            records.push(rec);
        }
        Ok(EvalReport {
            provenance,
            records,
        })
    }

    /// Best (highest-value) record per (task, dataset, metric), errors
    /// excluded.
    pub fn best_records(&self) -> Vec<&ReportRecord> {
        let mut best: BTreeMap<(String, String, String), &ReportRecord> = BTreeMap::new();
        for rec in self.records.iter().filter(|r| r.metric != ERROR_METRIC) {
            let key = (rec.task.clone(), rec.dataset.clone(), rec.metric.clone());
            match best.get(&key) {
                Some(cur) if cur.value >= rec.value => {}
                _ => {
                    best.insert(key, rec);
                }
            }
        }
        best.into_values().collect()
    }

    fn series(&self) -> BTreeMap<(String, String, String), Vec<&ReportRecord>> {
        let mut series: BTreeMap<(String, String, String), Vec<&ReportRecord>> = BTreeMap::new();
        for rec in self.sorted_records() {
            if rec.metric == ERROR_METRIC {
                continue;
            }
            series
                .entry((rec.task.clone(), rec.dataset.clone(), rec.metric.clone()))
                .or_default()
                .push(rec);
        }
        series
    }

    /// Render the Markdown summary: provenance, best rows, then one series
    /// table per (task, dataset, metric) with the derived column computed
    /// against the alpha = 0 baseline (or, failing that, the alpha closest
    /// to 0).
    pub fn render_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("# Sweep report\n\n");
        out.push_str(&format!("- embedding: `{}`\n", self.provenance.embedding));
        if let Some(cap) = self.provenance.max_vocab {
            out.push_str(&format!("- max vocab: {cap}\n"));
        }
        if !self.provenance.flags.is_empty() {
            out.push_str(&format!("- flags: `{}`\n", self.provenance.flags));
        }
        if !self.provenance.timestamp.is_empty() {
            out.push_str(&format!("- timestamp: {}\n", self.provenance.timestamp));
        }
        out.push('\n');

        out.push_str("## Best per task\n\n");
        out.push_str("| task | dataset | metric | best | alpha |\n");
        out.push_str("|---|---|---|---|---|\n");
        for rec in self.best_records() {
            out.push_str(&format!(
                "| {} | {} | {} | {:.2} | {:.2} |\n",
                rec.task,
                rec.dataset,
                rec.metric,
                100.0 * rec.value,
                rec.alpha
            ));
        }
        out.push('\n');

        for ((task, dataset, metric), recs) in self.series() {
            let baseline = recs
                .iter()
                .min_by(|a, b| {
                    a.alpha
                        .abs()
                        .partial_cmp(&b.alpha.abs())
                        .unwrap()
                        .then(a.alpha.partial_cmp(&b.alpha).unwrap())
                })
                .map(|r| r.value);
            let derived_name = if task == "analogy" {
                "rel. error reduction %"
            } else {
                "delta"
            };
            out.push_str(&format!("## {task} / {dataset} / {metric}\n\n"));
            out.push_str(&format!("| alpha | value | {derived_name} |\n"));
            out.push_str("|---|---|---|\n");
            for rec in recs {
                let derived = match baseline {
                    Some(v0) if task == "analogy" => {
                        if (1.0 - v0).abs() < f64::EPSILON {
                            0.0
                        } else {
                            100.0 * (rec.value - v0) / (1.0 - v0)
                        }
                    }
                    Some(v0) => 100.0 * (rec.value - v0),
                    None => 0.0,
                };
                out.push_str(&format!(
                    "| {:.2} | {:.2} | {:+.2} |\n",
                    rec.alpha,
                    100.0 * rec.value,
                    derived
                ));
            }
            out.push('\n');
        }

        let errors: Vec<&ReportRecord> = self
            .records
            .iter()
            .filter(|r| r.metric == ERROR_METRIC)
            .collect();
        if !errors.is_empty() {
            out.push_str("## Errors\n\n");
            for rec in errors {
                out.push_str(&format!(
                    "- alpha {:.2}, {} / {}: evaluation failed\n",
                    rec.alpha, rec.task, rec.dataset
                ));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(alpha: f64, task: &str, metric: &str, value: f64) -> ReportRecord {
        ReportRecord {
            alpha,
            task: task.into(),
            dataset: "toy".into(),
            metric: metric.into(),
            value,
            covered: 10,
            skipped: 1,
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let report = EvalReport {
            provenance: Provenance {
                embedding: "model.vec".into(),
                max_vocab: Some(200000),
                flags: "--lookup exact".into(),
                timestamp: "2018-01-01T00:00:00Z".into(),
            },
            records: vec![
                rec(0.0, "wordsim", "spearman", 0.407013172),
                rec(-0.85, "wordsim", "spearman", 0.515400000001),
                rec(0.55, "analogy", "semantic_accuracy", 1.0 / 3.0),
            ],
        };
        let f = tempfile::NamedTempFile::new().unwrap();
        report.write_csv(f.path()).unwrap();
        let back = EvalReport::read_csv(f.path()).unwrap();
        assert_eq!(back.provenance, report.provenance);
        let orig = report.sorted_records();
        assert_eq!(back.records.len(), orig.len());
        for (a, b) in back.records.iter().zip(orig) {
            assert_eq!(a, b);
        }
        // second write is byte-identical
        let mut buf1 = Vec::new();
        report.write_csv_to(&mut buf1).unwrap();
        let mut buf2 = Vec::new();
        back.write_csv_to(&mut buf2).unwrap();
        assert_eq!(buf1, buf2);
    }

    #[test]
    fn best_rows_pick_max() {
        let report = EvalReport {
            provenance: Provenance::default(),
            records: vec![
                rec(0.0, "analogy", "semantic_accuracy", 0.7649),
                rec(-0.65, "analogy", "semantic_accuracy", 0.8100),
                rec(-0.9, "analogy", "semantic_accuracy", 0.79),
            ],
        };
        let best = report.best_records();
        assert_eq!(best.len(), 1);
        assert_eq!(best[0].alpha, -0.65);
    }

    #[test]
    fn relative_error_reduction_rendering() {
        let report = EvalReport {
            provenance: Provenance::default(),
            records: vec![
                rec(0.0, "analogy", "semantic_accuracy", 0.7649),
                rec(-0.65, "analogy", "semantic_accuracy", 0.8100),
            ],
        };
        let md = report.render_markdown();
        // (0.8100 - 0.7649) / (1 - 0.7649) = 19.18%
        assert!(md.contains("+19.18"), "{md}");
        assert!(md.contains("| -0.65 | 81.00 | +19.18 |"), "{md}");
    }

    #[test]
    fn single_alpha_deltas_are_zero() {
        let report = EvalReport {
            provenance: Provenance::default(),
            records: vec![rec(-0.3, "wordsim", "spearman", 0.5)],
        };
        let md = report.render_markdown();
        assert!(md.contains("| -0.30 | 50.00 | +0.00 |"), "{md}");
    }

    #[test]
    fn error_records_kept_out_of_best() {
        let report = EvalReport {
            provenance: Provenance::default(),
            records: vec![
                rec(0.0, "sts", "pearson", 0.64),
                rec(0.5, "sts", ERROR_METRIC, 0.0),
            ],
        };
        let best = report.best_records();
        assert_eq!(best.len(), 1);
        assert_eq!(best[0].metric, "pearson");
        assert!(report.render_markdown().contains("## Errors"));
    }
}
