//! `triad` command-line verbs. Every verb reads and writes the fixed layout
//! under `--data-dir`; see [`DataDir`].

use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use chrono::Utc;
use clap::{Parser, Subcommand};
use serde_json::json;
use triad_core::augment::{augment, corpus_stats};
use triad_core::dataset::surrogate::{surrogate_cohort, SurrogateConfig};
use triad_core::dataset::CleanCohort;
use triad_core::eval::{evaluate, measure_latency, BenchmarkTable};
use triad_core::explain::SystemClock;
use triad_core::features::{stratified_split, SplitPlan};
use triad_core::fusion::Variant;
use triad_core::pipeline::{
    load_clean, prepare_variant, run_ablation, train_model, Background, DataDir, ModelArtifact, ModelKind, Scorer,
};
use triad_core::textpipe::TextPipeline;

use crate::api::{self, Service, LATEST_REPORT};
use crate::config::ServiceConfig;
use crate::error::{Result, ServiceError};
use crate::runner::{self, RunRequest};
use crate::store::Store;

#[derive(Debug, Parser)]
#[command(name = "triad", version, about = "Student dropout early-warning pipeline")]
pub struct Cli {
    /// Seed for the split, resampling, training and bootstrap.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, clean, de-duplicate and impute a cohort CSV. Without --input a
    /// surrogate cohort with the reference shape is generated.
    Ingest {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Surrogate only: fraction of real-valued cells blanked before
        /// imputation.
        #[arg(long, default_value_t = 0.0)]
        missing_numeric: f64,
        /// Surrogate only: fraction of coded cells blanked before imputation.
        #[arg(long, default_value_t = 0.0)]
        missing_categorical: f64,
    },
    /// Synthesize comments and timestamps for the ingested cohort.
    Augment,
    /// Stratified holdout, feature fitting and the attribution background.
    Split,
    /// Train one model: logistic, mlp, triad or variant:<name>.
    Train { model: String },
    /// Evaluate a trained model on the held-out fold.
    Evaluate {
        #[arg(long)]
        model: Option<String>,
        /// Single-learner latency repetitions.
        #[arg(long, default_value_t = 200)]
        latency_reps: usize,
    },
    /// Train the full model and all five ablations and compare them.
    Ablate,
    /// Score and explain one learner.
    Explain {
        student_id: String,
        #[arg(long)]
        model: Option<String>,
        /// Print the full explanation as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a scoring pass into the alert store without the HTTP server.
    Score {
        #[arg(long, default_value = "test")]
        cohort: String,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
    /// Per-learner and batch scoring latency.
    BenchLatency {
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
    },
}

pub fn load_config(cli: &Cli) -> Result<ServiceConfig> {
    let mut cfg = ServiceConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.data_dir {
        cfg.data_dir = d.clone();
    }
    Ok(cfg)
}

fn augmented(dir: &DataDir) -> Result<CleanCohort> {
    Ok(CleanCohort::read_jsonl(&dir.augmented())?)
}

fn split_plan(dir: &DataDir) -> Result<SplitPlan> {
    let path = dir.split();
    let bytes = std::fs::read(&path)
        .map_err(|_| triad_core::Error::CohortMissing(format!("split not found at {}", path.display())))?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn write_json(path: &std::path::Path, value: &impl serde::Serialize) -> Result<()> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p)?;
    }
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

fn write_text(path: &std::path::Path, text: &str) -> Result<()> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let pcfg = cfg.pipeline();
    let dir = DataDir::new(&cfg.data_dir);
    match cli.command {
        Command::Ingest {
            input,
            missing_numeric,
            missing_categorical,
        } => {
            let cohort = match input {
                Some(p) => load_clean(&p)?,
                None => surrogate_cohort(&SurrogateConfig {
                    missing_numeric_rate: missing_numeric,
                    missing_categorical_rate: missing_categorical,
                    ..Default::default()
                })?,
            };
            cohort.write_jsonl(&dir.cohort())?;
            println!(
                "rows {} classes {:?} duplicates_removed {} missing_numeric {:.4} missing_categorical {:.4}",
                cohort.len(),
                cohort.class_histogram(),
                cohort.duplicates_removed,
                cohort.missing_numeric_rate,
                cohort.missing_categorical_rate
            );
        }
        Command::Augment => {
            let cohort = CleanCohort::read_jsonl(&dir.cohort())?;
            let out = augment(cohort, &pcfg.augment)?;
            out.write_jsonl(&dir.augmented())?;
            let stats = corpus_stats(&out);
            write_json(&dir.corpus_stats(), &stats)?;
            println!("{}", serde_json::to_string(&stats)?);
        }
        Command::Split => {
            let cohort = augmented(&dir)?;
            let split = stratified_split(&cohort, pcfg.test_frac, pcfg.seed)?;
            write_json(&dir.split(), &split)?;
            let mut tp = TextPipeline::reference()?;
            let data = prepare_variant(&cohort, &split, &mut tp, Variant::Full, &pcfg)?;
            data.features.write(&dir.features())?;
            Background {
                x_tab: data.background.clone(),
            }
            .write(&dir.background())?;
            println!(
                "train {:?} test {:?} balanced {:?} x_tab {} x_txt {}",
                split.train_histogram,
                split.test_histogram,
                data.train.histogram(),
                data.train.x_tab.ncols(),
                data.train.x_txt.ncols()
            );
        }
        Command::Train { model } => {
            let kind = ModelKind::parse(&model)?;
            let cohort = augmented(&dir)?;
            let split = split_plan(&dir)?;
            let mut tp = TextPipeline::reference()?;
            let data = prepare_variant(&cohort, &split, &mut tp, kind.variant(), &pcfg)?;
            let art = train_model(kind, &data, &pcfg)?;
            let path = dir.model(&kind.file_name());
            art.write(&path)?;
            let p = art.predict(data.test.x_tab.view(), data.test.x_txt.view())?;
            let m = triad_core::eval::classification_metrics(&data.test.y, p.view())?;
            println!("{kind}: test macro_f1 {:.4} accuracy {:.4} -> {}", m.macro_f1, m.accuracy, path.display());
        }
        Command::Evaluate { model, latency_reps } => {
            let name = model.unwrap_or_else(|| cfg.model.clone());
            let art = ModelArtifact::read(&dir.model(&name))?;
            let cohort = augmented(&dir)?;
            let split = split_plan(&dir)?;
            let mut tp = TextPipeline::reference()?;
            let data = prepare_variant(&cohort, &split, &mut tp, art.variant(), &pcfg)?;
            let p = art.predict(data.test.x_tab.view(), data.test.x_txt.view())?;
            let mut report = evaluate(&name, &data.test.y, p.view(), &pcfg.eval)?;
            let rows: Vec<_> = split.test.iter().map(|&i| cohort.rows[i].clone()).collect();
            let scorer = Scorer::new(tp, data.features.clone(), art, pcfg.augment.clone());
            report.latency = Some(measure_latency(rows.len(), 10, latency_reps, |i| {
                std::hint::black_box(scorer.score(&rows[i]).map(|s| s.probs).ok());
            })?);
            write_json(&dir.report(&format!("{name}.json")), &report)?;
            write_json(&dir.report(LATEST_REPORT), &report)?;
            print!("{}", BenchmarkTable { rows: vec![report] }.to_text());
        }
        Command::Ablate => {
            let cohort = augmented(&dir)?;
            let split = split_plan(&dir)?;
            let mut tp = TextPipeline::reference()?;
            let run = run_ablation(&cohort, &split, &mut tp, &pcfg)?;
            let mut text = run.table.to_text();
            for (name, t) in &run.mcnemar {
                match t {
                    Some(t) => text.push_str(&format!(
                        "mcnemar full vs {name}: b={} c={} chi2={:.4} p={:.6}\n",
                        t.b, t.c, t.chi2, t.p_value
                    )),
                    None => text.push_str(&format!("mcnemar full vs {name}: no discordant pairs\n")),
                }
            }
            write_text(&dir.report("ablation.txt"), &text)?;
            write_text(&dir.report("ablation.csv"), &run.table.to_csv())?;
            write_json(&dir.report("ablation.json"), &run)?;
            print!("{text}");
        }
        Command::Explain {
            student_id,
            model,
            json: as_json,
        } => {
            let name = model.unwrap_or_else(|| cfg.model.clone());
            let scorer = Scorer::load(&dir, &name, pcfg.augment.clone())?;
            let background = Background::read(&dir.background())?;
            let cohort = augmented(&dir)?;
            let row = cohort
                .rows
                .iter()
                .find(|r| r.id == student_id)
                .ok_or_else(|| ServiceError::NotFound(format!("student {student_id}")))?;
            let ex = scorer.explain(row, background.x_tab.view(), pcfg.shapley_samples, pcfg.seed, Utc::now())?;
            if as_json {
                println!("{}", serde_json::to_string_pretty(&ex)?);
            } else {
                println!("{}", ex.rationale.text);
                println!(
                    "probs {:.4?} base {:.4} additivity_gap {:.4}",
                    ex.scored.probs, ex.attribution.base_value, ex.attribution.additivity_gap
                );
                for f in ex.attribution.ranked().iter().take(5) {
                    println!("  {:<40} {:+.4}", f.name, f.phi);
                }
                println!("plan: {}", ex.plan.describe());
            }
        }
        Command::Score {
            cohort,
            model,
            threshold,
        } => {
            let store = RwLock::new(Store::open(&dir.store(), cfg.snapshot_every)?);
            let req = RunRequest {
                cohort,
                model,
                threshold,
            };
            let (id, summary) = runner::score_cohort(&store, &dir, &cfg, &req, &SystemClock)?;
            println!("{}", json!({ "run_id": id, "summary": summary }));
        }
        Command::Serve { bind } => {
            let mut cfg = cfg;
            if let Some(b) = bind {
                cfg.bind = b;
            }
            let svc = Service::open(cfg, Arc::new(SystemClock))?;
            tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?
                .block_on(api::serve(svc))?;
        }
        Command::BenchLatency { model, reps } => {
            let name = model.unwrap_or_else(|| cfg.model.clone());
            let scorer = Scorer::load(&dir, &name, pcfg.augment.clone())?;
            let cohort = augmented(&dir)?;
            let split = split_plan(&dir)?;
            let rows: Vec<_> = split.test.iter().map(|&i| cohort.rows[i].clone()).collect();
            let single = measure_latency(rows.len(), 20, reps, |i| {
                std::hint::black_box(scorer.score(&rows[i]).map(|s| s.probs).ok());
            })?;
            let t = Instant::now();
            let probs = scorer.score_many(&cohort.rows, cfg.batch_size)?;
            let per_ms = t.elapsed().as_secs_f64() * 1e3 / probs.len() as f64;
            let report = json!({
                "model": name,
                "per_learner": single,
                "batch_rows": probs.len(),
                "batch_ms_per_learner": per_ms,
                "projected_50k_seconds": per_ms * 50.0,
            });
            write_json(&dir.report("latency.json"), &report)?;
            println!("{report}");
        }
    }
    Ok(())
}
