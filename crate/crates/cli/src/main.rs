//! `dsaee`: feature selection for imbalanced binary data.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for data errors, 3 for
//! numeric failures during training.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dsaee_core::eval::{ClassifierKind, EvalProtocol};
use dsaee_core::io::{save_csv, write_manifest, write_q_csv, write_report, RunConfig};
use dsaee_core::pipeline::{
    load_dataset, load_run_dataset, load_run_selections, run_benchmark, run_selection, write_selection_outputs,
    CDS_FILE, FSDS_FILE, Q_FILE,
};
use dsaee_core::synthetic::{try_planted_dataset, PlantedSpec};
use dsaee_core::{run_ensemble, Error, ErrorKind};

#[derive(Parser)]
#[command(name = "dsaee", version, about = "Ensemble sparse-autoencoder feature selection for imbalanced data")]
struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the ensemble on the FSDS and write one selection file per level.
    Select(SelectArgs),
    /// Train the ensemble and write only the reconstruction-error matrix.
    ExportQ(RunArgs),
    /// Evaluate selection files on the CDS.
    Evaluate(EvaluateArgs),
    /// Compare DSAEE selections with size-matched chi-squared selections.
    Benchmark(BenchmarkArgs),
    /// Write a planted-feature dataset as CSV.
    GeneratePlanted(PlantedArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Number of ensemble components.
    #[arg(long)]
    components: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Components trained concurrently.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Quantile level; repeat for several.
    #[arg(long = "delta")]
    deltas: Vec<f64>,
    /// Also write the reconstruction-error matrix.
    #[arg(long)]
    export_q: bool,
}

#[derive(Args)]
struct ProtocolArgs {
    /// Evaluation trials (one stratified split each).
    #[arg(long)]
    trials: Option<usize>,
    /// Seed for the per-trial train/test splits.
    #[arg(long)]
    split_seed: Option<u64>,
    /// Classifier to run; repeat for several.
    #[arg(long = "classifier")]
    classifiers: Vec<ClassifierKind>,
    /// Output directory (defaults to the run directory).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory written by `select`.
    #[arg(long, required_unless_present = "cds")]
    run_dir: Option<PathBuf>,
    /// Classification dataset (CSV with a 0/1 `label` column).
    #[arg(long)]
    cds: Option<PathBuf>,
    /// Selection file; repeat for several. Defaults to every file in the run directory.
    #[arg(long = "selection")]
    selections: Vec<PathBuf>,
    #[command(flatten)]
    protocol: ProtocolArgs,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Directory written by `select`.
    #[arg(long)]
    run_dir: PathBuf,
    #[command(flatten)]
    protocol: ProtocolArgs,
}

#[derive(Args)]
struct PlantedArgs {
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 2000)]
    majority: usize,
    #[arg(long, default_value_t = 100)]
    minority: usize,
    #[arg(long, default_value_t = 100)]
    features: usize,
    #[arg(long, default_value_t = 10)]
    planted: usize,
    #[arg(long, default_value_t = 2.0)]
    shift: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn usage(message: String) -> Error {
    Error::InvalidConfig(message)
}

fn load_config(args: &RunArgs) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(b) = args.components {
        cfg.ensemble.components = Some(b);
    }
    if let Some(s) = args.seed {
        cfg.ensemble.master_seed = s;
    }
    if let Some(p) = args.parallelism {
        cfg.ensemble.parallelism = p;
    }
    if let Some(o) = &args.output {
        cfg.output_dir = Some(o.clone());
    }
    Ok(cfg)
}

fn output_dir(cfg: &RunConfig) -> Result<PathBuf, Error> {
    cfg.output_dir
        .clone()
        .ok_or_else(|| usage("no output directory: set `output_dir` in the config or pass --output".into()))
}

fn select(args: &SelectArgs) -> Result<(), Error> {
    let mut cfg = load_config(&args.run)?;
    if !args.deltas.is_empty() {
        cfg.selection.deltas = Some(args.deltas.clone());
    }
    let dir = output_dir(&cfg)?;
    let data = load_dataset(&cfg.data)?;
    let run = cfg.resolve(data.n_features())?;
    log::info!(
        "training {} components on {} rows x {} features",
        run.ensemble.components,
        data.n_rows(),
        data.n_features()
    );
    let out = run_selection(&run, &data)?;
    write_selection_outputs(&dir, &run, &out, args.export_q)?;
    for s in &out.selections {
        println!("delta {}: {} features", s.delta_quantile, s.selected.len());
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn export_q(args: &RunArgs) -> Result<(), Error> {
    let cfg = load_config(args)?;
    let dir = output_dir(&cfg)?;
    let data = load_dataset(&cfg.data)?;
    let run = cfg.resolve(data.n_features())?;
    let prepared = dsaee_core::pipeline::prepare(&run, &data)?;
    let q = run_ensemble(&prepared.fsds, &run.ensemble)?;
    write_manifest(&dir, &run)?;
    write_q_csv(&dir.join(Q_FILE), &q, &prepared.fsds.names())?;
    save_csv(&dir.join(FSDS_FILE), &prepared.fsds)?;
    save_csv(&dir.join(CDS_FILE), &prepared.cds)?;
    println!("wrote {} ({} rows)", dir.join(Q_FILE).display(), q.k());
    Ok(())
}

/// Protocol from the run manifest when present, then command-line overrides.
fn protocol(run_dir: Option<&Path>, args: &ProtocolArgs) -> Result<EvalProtocol, Error> {
    let mut p = match run_dir.map(|d| d.join("manifest.toml")) {
        Some(m) if m.exists() => RunConfig::read(&m)?.eval,
        _ => EvalProtocol::default(),
    };
    if let Some(t) = args.trials {
        p.trials = t;
    }
    if let Some(s) = args.split_seed {
        p.split_seed = s;
    }
    if !args.classifiers.is_empty() {
        p.classifiers = args.classifiers.clone();
    }
    p.validate()?;
    Ok(p)
}

fn report_dir(run_dir: Option<&Path>, args: &ProtocolArgs) -> Result<PathBuf, Error> {
    args.output
        .clone()
        .or_else(|| run_dir.map(Path::to_path_buf))
        .ok_or_else(|| usage("no output directory: pass --output or --run-dir".into()))
}

fn print_summaries(report: &dsaee_core::eval::EvalReport) {
    for s in &report.summaries {
        let level = s.delta_quantile.map_or("all".to_string(), |d| d.to_string());
        println!(
            "{:<6} {:<5} {:<20} |F|={:<5} auroc {:.4} +/- {:.4}  sensitivity {:.4} +/- {:.4}",
            s.method,
            level,
            s.classifier.name(),
            s.n_features,
            s.auroc_mean,
            s.auroc_std,
            s.sensitivity_mean,
            s.sensitivity_std
        );
    }
    for w in &report.warnings {
        log::warn!("{} at {:?}: {}", w.method, w.delta_quantile, w.message);
        println!("warning: {} {:?}: {}", w.method, w.delta_quantile, w.message);
    }
}

fn evaluate(args: &EvaluateArgs) -> Result<(), Error> {
    let run_dir = args.run_dir.as_deref();
    let cds_path = match (&args.cds, run_dir) {
        (Some(c), _) => c.clone(),
        (None, Some(d)) => d.join(CDS_FILE),
        (None, None) => return Err(usage("pass --run-dir or --cds".into())),
    };
    let selections = if !args.selections.is_empty() {
        args.selections
            .iter()
            .map(|p| dsaee_core::io::read_selection(p))
            .collect::<Result<Vec<_>, _>>()?
    } else if let Some(d) = run_dir {
        load_run_selections(d)?
    } else {
        return Err(usage("pass --selection or --run-dir".into()));
    };
    let p = protocol(run_dir, &args.protocol)?;
    let out = report_dir(run_dir, &args.protocol)?;
    let cds = load_run_dataset(&cds_path)?;
    let report = dsaee_core::eval::evaluate_selection(&cds, &selections, &p)?;
    write_report(&out, "report", &report)?;
    print_summaries(&report);
    println!("wrote {}", out.join("report.json").display());
    Ok(())
}

fn benchmark(args: &BenchmarkArgs) -> Result<(), Error> {
    let run_dir = args.run_dir.as_path();
    let fsds = load_run_dataset(&run_dir.join(FSDS_FILE))?;
    let cds = load_run_dataset(&run_dir.join(CDS_FILE))?;
    let selections = load_run_selections(run_dir)?;
    if selections.is_empty() {
        return Err(usage(format!("no selection files in {}", run_dir.display())));
    }
    let p = protocol(Some(run_dir), &args.protocol)?;
    let out = report_dir(Some(run_dir), &args.protocol)?;
    let report = run_benchmark(&fsds, &cds, &selections, &p)?;
    write_report(&out, "benchmark", &report)?;
    print_summaries(&report);
    println!("wrote {}", out.join("benchmark.json").display());
    Ok(())
}

fn generate_planted(args: &PlantedArgs) -> Result<(), Error> {
    let spec = PlantedSpec {
        majority: args.majority,
        minority: args.minority,
        features: args.features,
        planted: args.planted,
        shift: args.shift,
        seed: args.seed,
    };
    let p = try_planted_dataset(&spec)?;
    save_csv(&args.output, &p.data)?;
    let list: Vec<String> = p.planted.iter().map(usize::to_string).collect();
    println!("planted features: {}", list.join(","));
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numeric => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if cli.verbose {
        "info"
    } else {
        "warn"
    }))
    .init();

    let result = match &cli.command {
        Command::Select(a) => select(a),
        Command::ExportQ(a) => export_q(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Benchmark(a) => benchmark(a),
        Command::GeneratePlanted(a) => generate_planted(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
