use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use featurecraft::{cmd_augment, cmd_plotdata, cmd_report, cmd_run_with, cmd_suggest, plot_csv};
use featurecraft::{ConfigFile, Overrides, Pipeline};

#[derive(Parser)]
#[command(name = "featurecraft", version, about = "LLM-recipe + GP feature engineering experiments")]
struct Cli {
    /// Sectioned TOML config ([experiment], [gp], [operators], [model], [llm]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the two prompts for a dataset and, unless offline, ask the configured endpoint.
    Suggest {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        offline: bool,
        /// Transcript directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the dataset with recipe columns appended.
    Augment {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run (or resume) an experiment.
    Run {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(long)]
        pipeline: Option<Pipeline>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Results root; the experiment goes in a subdirectory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two experiment directories.
    Report {
        a: PathBuf,
        b: PathBuf,
        /// Also write the comparison as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Per-generation median/q1/q3 of the test metric as CSV.
    Plotdata {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Suggest { dataset, offline, out } => {
            let ov = Overrides { offline, ..Overrides::default() };
            let manifest = dataset.or_else(|| file.resolve(&ov).ok().map(|c| c.dataset)).context("--dataset is required")?;
            let endpoint = file.endpoint(&ov);
            let outcome = cmd_suggest(&manifest, &endpoint, &out.unwrap_or_else(|| file.transcripts_dir()))?;
            println!("{}\n\n{}", outcome.prompts.prompt1, outcome.prompts.prompt2);
            if let Some((t, path)) = outcome.transcript {
                for (i, turn) in t.turns.iter().enumerate() {
                    println!("\n--- response {} ---\n{}", i + 1, turn.response);
                }
                eprintln!("transcript saved to {}", path.display());
            }
        }
        Command::Augment { dataset, recipe, out } => {
            let ov = Overrides { dataset, recipe, ..Overrides::default() };
            let cfg = file.resolve(&ov)?;
            let Some(recipe) = cfg.recipe else { bail!("--recipe is required") };
            let d = cmd_augment(&cfg.dataset, &recipe, &out)?;
            eprintln!("wrote {} rows x {} features to {}", d.n_rows(), d.n_features(), out.display());
        }
        Command::Run { dataset, recipe, pipeline, trials, seed, out } => {
            let ov = Overrides { dataset, recipe, pipeline, trials, seed, out, offline: false };
            let cfg = file.resolve(&ov)?;
            eprintln!("{}: {} trials -> {}", cfg.name, cfg.trials, cfg.experiment_dir().display());
            let result = cmd_run_with(&cfg, &|i, r| match r {
                Ok(t) => eprintln!("  trial {i}: {:.3}", t.test_score),
                Err(e) => eprintln!("  trial {i} failed: {e:#}"),
            })?;
            if let Some(r) = &result.report {
                println!(
                    "{}: median {} {:.3} (q1 {:.3}, q3 {:.3}, n {})",
                    result.experiment,
                    result.metric.name(),
                    r.median,
                    r.q1,
                    r.q3,
                    r.n
                );
            }
            if !result.failures.is_empty() {
                eprintln!("{} of {} trials failed", result.failures.len(), result.trials);
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { a, b, json } => {
            let cmp = cmd_report(&a, &b)?;
            print!("{}", cmp.to_text());
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(&cmp)? + "\n")?;
            }
        }
        Command::Plotdata { dir, out } => {
            let csv = plot_csv(&cmd_plotdata(&dir)?);
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
