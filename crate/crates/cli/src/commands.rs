use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use simorder::datasets::{parse_analogy, parse_scored_pairs, parse_sts, ScoredPairFormat};
use simorder::sts::StopwordList;
use simorder::transform::EigenBasis;
use simorder::{
    apply_transform, gram, load_embeddings, make_transform, normalize_rows, run_sweep_prepared,
    run_task, save_embeddings, sym_eig, EmbeddingMatrix, Error, EvalReport, Provenance,
    SweepConfig, SweepTask,
};

use crate::{
    CliError, DatasetFormatArg, EvalArgs, GramScopeArg, InputArgs, ReportArgs, ReportFormatArg,
    SweepArgs, TaskArg, TransformArgs,
};

type Result<T> = std::result::Result<T, CliError>;

struct Prepared {
    emb: EmbeddingMatrix,
    basis: Arc<EigenBasis>,
}

/// Load, optionally normalize and restrict the embeddings, and obtain the
/// eigenbasis for the requested gram scope.
fn prepare(args: &InputArgs) -> Result<Prepared> {
    let format = args.format.into();
    let cap = match args.max_vocab {
        0 => None,
        n => Some(n),
    };
    let (emb, gram_source) = match args.gram_scope {
        GramScopeArg::Restricted => {
            let mut emb = load_embeddings(&args.input, format, cap)?;
            if args.pre_normalize {
                emb = normalize_rows(&emb).0;
            }
            (emb, None)
        }
        GramScopeArg::Full => {
            let mut full = load_embeddings(&args.input, format, None)?;
            if args.pre_normalize {
                full = normalize_rows(&full).0;
            }
            let emb = match cap {
                Some(k) => full.take_prefix(k)?,
                None => full.clone(),
            };
            (emb, Some(full))
        }
    };

    let basis = match &args.basis {
        Some(path) => {
            let basis = EigenBasis::load(path)?;
            if basis.dim() != emb.dim() {
                return Err(Error::DimensionMismatch {
                    expected: emb.dim(),
                    actual: basis.dim(),
                }
                .into());
            }
            Arc::new(basis)
        }
        None => {
            let g = gram(gram_source.as_ref().unwrap_or(&emb));
            Arc::new(sym_eig(&g)?)
        }
    };
    if let Some(path) = &args.save_basis {
        basis.save(path)?;
    }
    Ok(Prepared { emb, basis })
}

fn transformed_at(prep: &Prepared, alpha: f64, eig_floor: f64) -> Result<EmbeddingMatrix> {
    // alpha = 0 is neutral for every similarity-based result, so the
    // rotation is skipped entirely.
    if alpha == 0.0 {
        return Ok(prep.emb.clone());
    }
    let t = make_transform(prep.basis.clone(), alpha).with_floor(eig_floor);
    Ok(apply_transform(&prep.emb, &t)?)
}

pub fn transform(args: TransformArgs) -> Result<()> {
    let prep = prepare(&args.input)?;
    let t = make_transform(prep.basis.clone(), args.alpha).with_floor(args.input.eig_floor);
    let eigenvalues = prep.basis.eigenvalues();
    println!(
        "eigenvalues: max={:.6e} min={:.6e} clamped={}",
        prep.basis.lambda_max(),
        eigenvalues.last().copied().unwrap_or(0.0),
        t.clamped_count()
    );
    let out = apply_transform(&prep.emb, &t)?;
    let out_format = args.out_format.unwrap_or(args.input.format);
    save_embeddings(&out, &args.out, out_format.into())?;
    println!(
        "wrote {} vectors of dimension {} to {}",
        out.len(),
        out.dim(),
        args.out.display()
    );
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn scored_pair_format(arg: Option<DatasetFormatArg>, strip_pos: bool) -> ScoredPairFormat {
    match arg {
        Some(DatasetFormatArg::Simlex) => ScoredPairFormat::SimLex,
        Some(DatasetFormatArg::Men) => ScoredPairFormat::Men { strip_pos },
        Some(DatasetFormatArg::Generic3col) | None => ScoredPairFormat::Generic3Col,
    }
}

fn load_stopwords(path: &Option<std::path::PathBuf>) -> Result<StopwordList> {
    Ok(match path {
        Some(p) => StopwordList::from_file(p)?,
        None => StopwordList::default_english(),
    })
}

fn build_task(
    task: TaskArg,
    dataset: &Path,
    format: Option<DatasetFormatArg>,
    strip_pos: bool,
    stopwords: &Option<std::path::PathBuf>,
) -> Result<SweepTask> {
    let name = dataset_name(dataset);
    Ok(match task {
        TaskArg::Analogy => SweepTask::Analogy {
            name,
            dataset: parse_analogy(dataset)?,
        },
        TaskArg::Wordsim => SweepTask::WordSim {
            name,
            dataset: parse_scored_pairs(dataset, scored_pair_format(format, strip_pos))?,
        },
        TaskArg::Sts => SweepTask::Sts {
            name,
            dataset: parse_sts(dataset)?,
            stopwords: load_stopwords(stopwords)?,
        },
    })
}

fn metric_label(metric: &str) -> &str {
    match metric {
        "semantic_accuracy" => "semantic",
        "syntactic_accuracy" => "syntactic",
        other => other,
    }
}

fn coverage_labels(task: TaskArg) -> (&'static str, &'static str) {
    match task {
        TaskArg::Analogy => ("answered", "skipped"),
        TaskArg::Wordsim => ("covered", "skipped"),
        TaskArg::Sts => ("items", "zero-centroid"),
    }
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let task = build_task(
        args.task,
        &args.dataset,
        args.dataset_format,
        args.strip_pos,
        &args.stopwords,
    )?;
    let prep = prepare(&args.input)?;
    let emb = transformed_at(&prep, args.alpha, args.input.eig_floor)?;
    let records = run_task(&emb, &task, args.lookup.into(), args.alpha)?;
    let (covered_label, skipped_label) = coverage_labels(args.task);
    println!(
        "task={} dataset={} alpha={:.2}",
        task.task_kind(),
        dataset_name(&args.dataset),
        args.alpha
    );
    for rec in &records {
        println!(
            "{} {:.2} ({covered_label} {}, {skipped_label} {})",
            metric_label(&rec.metric),
            100.0 * rec.value,
            rec.covered,
            rec.skipped
        );
    }
    Ok(())
}

fn parse_alphas(spec: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--alphas expects START:END:STEP, got {spec:?}"
        )));
    }
    let mut vals = [0f64; 3];
    for (v, part) in vals.iter_mut().zip(&parts) {
        *v = part
            .parse()
            .map_err(|_| CliError::Usage(format!("bad number {part:?} in --alphas")))?;
    }
    Ok((vals[0], vals[1], vals[2]))
}

fn provenance_for(args: &SweepArgs) -> Provenance {
    let mut flags = vec![
        format!("--format {}", match args.input.format {
            crate::FormatArg::Vec => "vec",
            crate::FormatArg::Glove => "glove",
            crate::FormatArg::Bin => "bin",
        }),
        format!("--max-vocab {}", args.input.max_vocab),
        format!("--alphas {}", args.alphas),
        format!("--lookup {}", match args.lookup {
            crate::LookupArg::Exact => "exact",
            crate::LookupArg::Fold => "fold",
        }),
        format!("--eig-floor {:e}", args.input.eig_floor),
        format!("--gram-scope {}", match args.input.gram_scope {
            GramScopeArg::Restricted => "restricted",
            GramScopeArg::Full => "full",
        }),
    ];
    if args.input.pre_normalize {
        flags.push("--pre-normalize".to_string());
    }
    if args.strip_pos {
        flags.push("--strip-pos".to_string());
    }
    for (task, dataset) in args.tasks.iter().zip(&args.datasets) {
        flags.push(format!(
            "--task {} --dataset {}",
            match task {
                TaskArg::Analogy => "analogy",
                TaskArg::Wordsim => "wordsim",
                TaskArg::Sts => "sts",
            },
            dataset.display()
        ));
    }
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default();
    Provenance {
        embedding: args.input.input.display().to_string(),
        max_vocab: match args.input.max_vocab {
            0 => None,
            n => Some(n),
        },
        flags: flags.join(" "),
        timestamp,
    }
}

pub fn sweep(args: SweepArgs) -> Result<()> {
    if args.tasks.len() != args.datasets.len() {
        return Err(CliError::Usage(format!(
            "{} --task occurrences but {} --dataset occurrences; they pair by position",
            args.tasks.len(),
            args.datasets.len()
        )));
    }
    let formats: Vec<Option<DatasetFormatArg>> = match args.dataset_formats.len() {
        0 => vec![None; args.tasks.len()],
        1 => vec![Some(args.dataset_formats[0]); args.tasks.len()],
        n if n == args.tasks.len() => args.dataset_formats.iter().copied().map(Some).collect(),
        n => {
            return Err(CliError::Usage(format!(
                "{n} --dataset-format occurrences; give none, one, or one per --dataset"
            )))
        }
    };
    let mut tasks = Vec::with_capacity(args.tasks.len());
    for ((task, dataset), format) in args.tasks.iter().zip(&args.datasets).zip(formats) {
        tasks.push(build_task(
            *task,
            dataset,
            format,
            args.strip_pos,
            &args.stopwords,
        )?);
    }

    let (start, end, step) = parse_alphas(&args.alphas)?;
    let cfg = SweepConfig {
        alpha_start: start,
        alpha_end: end,
        alpha_step: step,
        lookup: args.lookup.into(),
        pre_normalize: args.input.pre_normalize,
        eig_floor: args.input.eig_floor,
    };

    let prep = prepare(&args.input)?;
    let report = run_sweep_prepared(
        &prep.emb,
        &cfg,
        &tasks,
        Some(prep.basis),
        provenance_for(&args),
    )?;
    report.write_csv(&args.report)?;
    let markdown = report.render_markdown();
    match &args.out {
        Some(path) => fs::write(path, markdown).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => print!("{markdown}"),
    }
    eprintln!("report written to {}", args.report.display());
    Ok(())
}

pub fn report(args: ReportArgs) -> Result<()> {
    let report = EvalReport::read_csv(&args.report)?;
    match args.format {
        ReportFormatArg::Markdown => print!("{}", report.render_markdown()),
        ReportFormatArg::Csv => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write_csv_to(&mut lock)?;
            lock.flush().ok();
        }
    }
    Ok(())
}
