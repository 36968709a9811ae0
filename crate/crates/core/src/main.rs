use std::path::PathBuf;
use std::process::ExitCode;

use albp::cli::{cmd_evaluate, cmd_extract, cmd_preprocess, cmd_run, cmd_train, RunConfig, TableOverride};
use albp::{Error, Result};
use clap::{Args, Parser, Subcommand};

/// Texture descriptors and classifiers for grayscale image datasets.
#[derive(Parser, Debug)]
#[command(name = "albp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Crop, resize and equalize every image into <out>/preprocessed.
    Preprocess(Common),
    /// Write one feature CSV per descriptor under <out>/<tag>/features.csv.
    Extract(Common),
    /// Train classifiers on the training half of each feature table.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Evaluate trained classifiers on the test half of each feature table.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        table: TableArgs,
    },
    /// Preprocess, extract, split, train and evaluate in one go.
    Run(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file with `key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Dataset root with one subdirectory per class.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// lbp, albp or both.
    #[arg(long)]
    descriptor: Option<String>,
    /// A-LBP band half-width.
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated list of betas; one A-LBP table per value.
    #[arg(long)]
    beta_sweep: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Override any configuration key, e.g. `--set knn.k=3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// A single feature CSV instead of the per-descriptor tables under --out.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Models directory for --features (default: next to the CSV).
    #[arg(long)]
    models: Option<PathBuf>,
    /// Descriptor name shown in reports for --features.
    #[arg(long)]
    label: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path).map_err(|e| match e {
                Error::Io { .. } => Error::Config(e.to_string()),
                e => e,
            })?,
            None => RunConfig::default(),
        };
        let mut pairs: Vec<(String, String)> = Vec::new();
        if let Some(v) = &self.dataset {
            pairs.push(("dataset.root".into(), v.display().to_string()));
        }
        if let Some(v) = &self.out {
            pairs.push(("output.dir".into(), v.display().to_string()));
        }
        if let Some(v) = &self.descriptor {
            pairs.push(("descriptor".into(), v.clone()));
        }
        if let Some(v) = self.beta {
            pairs.push(("albp.beta".into(), v.to_string()));
        }
        if let Some(v) = &self.beta_sweep {
            pairs.push(("albp.beta_sweep".into(), v.clone()));
        }
        if let Some(v) = self.seed {
            pairs.push(("seed".into(), v.to_string()));
        }
        if let Some(v) = self.threads {
            pairs.push(("threads".into(), v.to_string()));
        }
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {item:?}")))?;
            pairs.push((k.trim().into(), v.trim().into()));
        }
        for (k, v) in pairs {
            cfg.set(&k, &v).map_err(|e| match e {
                Error::Config(_) => e,
                other => Error::Config(format!("{k}: {other}")),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl TableArgs {
    fn to_override(&self) -> TableOverride {
        TableOverride {
            features: self.features.clone(),
            models: self.models.clone(),
            label: self.label.clone(),
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess(c) => {
            let s = cmd_preprocess(&c.resolve()?)?;
            println!(
                "preprocessed {} images in {} classes into {}",
                s.images,
                s.classes,
                s.out_root.display()
            );
        }
        Command::Extract(c) => {
            let s = cmd_extract(&c.resolve()?)?;
            for f in &s.files {
                println!("wrote {}", f.display());
            }
            println!("{} images, {} skipped", s.rows, s.skipped.len());
        }
        Command::Train { common, table } => {
            for f in cmd_train(&common.resolve()?, &table.to_override())? {
                println!("wrote {}", f.display());
            }
        }
        Command::Evaluate { common, table } => {
            for r in cmd_evaluate(&common.resolve()?, &table.to_override())? {
                println!(
                    "{:<16} {:<14} accuracy {:.4}",
                    r.descriptor, r.classifier, r.overall_accuracy
                );
            }
        }
        Command::Run(c) => {
            let s = cmd_run(&c.resolve()?)?;
            for r in &s.reports {
                println!(
                    "{:<16} {:<14} accuracy {:.4}",
                    r.descriptor, r.classifier, r.overall_accuracy
                );
            }
            if !s.skipped.is_empty() {
                println!("{} images skipped", s.skipped.len());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
