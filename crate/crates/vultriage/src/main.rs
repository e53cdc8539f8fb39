use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vultriage::bundle::ModelBundle;
use vultriage::corpus::{load_dataset, DatasetFormat, FunctionRecord};
use vultriage::pipeline::{run_experiment, ExperimentConfig, Setting};
use vultriage::report::{emit_report, ReportFormat};
use vultriage_core::detector::TrainingSet;
use vultriage_core::lexer::rename_c_identifiers;
use vultriage_core::metrics::{extract_metrics, MetricVector};
use vultriage_core::model::TrainParams;
use vultriage_core::{Detector, Variant};

#[derive(Parser)]
#[command(name = "vultriage", version, about = "Lightweight function-level vulnerability triage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the split/variant experiment grid and write a report.
    Run(RunArgs),
    /// Print the five code metrics of every function as CSV.
    Metrics(MetricsArgs),
    /// Train one detector and save it as a model bundle.
    Train(TrainArgs),
    /// Score functions with a saved model bundle.
    Score(ScoreArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Devign-style dataset (fields: func, target, project, commit_id).
    #[arg(long)]
    dataset: PathBuf,
    /// json-array or jsonl; guessed from the file extension when omitted.
    #[arg(long)]
    format: Option<DatasetFormat>,
}

impl DatasetArgs {
    fn format(&self) -> DatasetFormat {
        self.format.unwrap_or_else(|| DatasetFormat::from_path(&self.dataset))
    }

    fn load(&self) -> Result<Vec<FunctionRecord>> {
        Ok(load_dataset(&self.dataset, self.format())?)
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 2)]
    min_df: usize,
    /// Inverse regularization strength.
    #[arg(long = "c", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Comma-separated list of random and/or cross.
    #[arg(long, value_delimiter = ',', default_value = "random")]
    setting: Vec<String>,
    #[arg(long)]
    train_project: Option<String>,
    #[arg(long)]
    test_project: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "metrics,tok-u,tok-ub,mix")]
    variants: Vec<Variant>,
    /// Add rows scored on test sources with identifiers renamed.
    #[arg(long)]
    rename_test: bool,
    #[arg(long, default_value_t = 0.10)]
    fraction: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: PathBuf,
    /// csv or json; guessed from the output extension when omitted.
    #[arg(long)]
    report_format: Option<ReportFormat>,
}

#[derive(Args)]
struct MetricsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    variant: Variant,
    /// Train only on functions of this project.
    #[arg(long)]
    project: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Where to write the model bundle (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Also dump the TF-IDF vocabulary as TSV (term, index, df, idf).
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    model: PathBuf,
    /// Score only functions of this project.
    #[arg(long)]
    project: Option<String>,
    /// Rename identifiers before scoring.
    #[arg(long)]
    rename: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("vultriage: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => run(args),
        Command::Metrics(args) => metrics(args),
        Command::Train(args) => train(args),
        Command::Score(args) => score(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut settings = Vec::new();
    for name in &args.setting {
        match name.trim() {
            "random" => settings.push(Setting::Random),
            "cross" => {
                let (Some(train_project), Some(test_project)) = (&args.train_project, &args.test_project)
                else {
                    bail!("--setting cross needs --train-project and --test-project");
                };
                settings.push(Setting::Cross {
                    train_project: train_project.clone(),
                    test_project: test_project.clone(),
                });
            }
            other => bail!("unknown setting `{other}` (expected random or cross)"),
        }
    }
    let config = ExperimentConfig {
        dataset: args.data.dataset.clone(),
        format: args.data.format(),
        settings,
        variants: args.variants,
        seed: args.solver.seed,
        rename_test: args.rename_test,
        fraction: args.fraction,
        threshold: args.threshold,
        c: args.solver.c,
        tol: args.solver.tol,
        max_iter: args.solver.max_iter,
        min_df: args.solver.min_df,
    };
    let rows = run_experiment(&config)?;
    let format = args.report_format.unwrap_or_else(|| ReportFormat::from_path(&args.out));
    emit_report(&rows, &args.out, format)?;
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let records = args.data.load()?;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "id,nloc,ccn,tokens,depth,params")?;
    for r in &records {
        let m = extract_metrics(&r.source);
        writeln!(out, "{},{},{},{},{},{}", r.id, m.nloc, m.ccn, m.token_count, m.max_depth, m.param_count)?;
    }
    out.flush()?;
    Ok(())
}

fn select_project(records: Vec<FunctionRecord>, project: Option<&str>) -> Result<Vec<FunctionRecord>> {
    let Some(project) = project else {
        return Ok(records);
    };
    let selected: Vec<FunctionRecord> = records.into_iter().filter(|r| r.project == project).collect();
    if selected.is_empty() {
        bail!("no functions belong to project `{project}`");
    }
    Ok(selected)
}

fn train(args: TrainArgs) -> Result<()> {
    let records = select_project(args.data.load()?, args.project.as_deref())?;
    let sources: Vec<&str> = records.iter().map(|r| r.source.as_str()).collect();
    let metrics: Vec<MetricVector> = records.iter().map(|r| extract_metrics(&r.source)).collect();
    let labels: Vec<u8> = records.iter().map(|r| r.label).collect();
    let params = TrainParams {
        c: args.solver.c,
        tol: args.solver.tol,
        max_iter: args.solver.max_iter,
        seed: args.solver.seed,
    };
    let data = TrainingSet { sources: &sources, metrics: &metrics, labels: &labels };
    let detector = Detector::fit(args.variant, data, args.solver.min_df, params)?;
    if let Some(path) = &args.vocab_out {
        let Some(tfidf) = &detector.tfidf else {
            bail!("variant {} has no token vocabulary", args.variant);
        };
        let mut out = open_output(Some(path))?;
        writeln!(out, "term\tindex\tdf\tidf")?;
        for (term, &index) in tfidf.vocabulary() {
            let df = tfidf.document_frequencies()[index];
            writeln!(out, "{term}\t{index}\t{df}\t{:.6}", tfidf.idf()[index])?;
        }
        out.flush()?;
    }
    ModelBundle::new(detector, args.solver.min_df, records.len()).save(&args.model)?;
    Ok(())
}

fn score(args: ScoreArgs) -> Result<()> {
    let bundle = ModelBundle::load(&args.model)?;
    let records = select_project(args.data.load()?, args.project.as_deref())?;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "id,label,score")?;
    for r in &records {
        let text = if args.rename { rename_c_identifiers(&r.source) } else { r.source.clone() };
        let p = bundle.detector.score(&text, &extract_metrics(&text))?;
        writeln!(out, "{},{},{:.6}", r.id, r.label, p)?;
    }
    out.flush()?;
    Ok(())
}
