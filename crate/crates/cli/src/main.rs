use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dgd_cli::config::ExperimentConfig;
use dgd_cli::experiment::{initial_policies, run_experiment, soccer_config, write_outputs};
use dgd_cli::recipes::{recipe, recipe_names};
use dgd_cli::verify::{run_suite, Suite, VerifyOptions};
use dgd_core::domains::soccer::{read_trace, record_episode, render_trace, write_trace, Soccer};
use dgd_core::policy::AgentPolicy;
use dgd_core::rng::SeedStreams;

#[derive(Parser)]
#[command(name = "dgd", version, about = "Distributed policy search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every run of an experiment and write curves and summaries.
    Run {
        /// Recipe name or path to a config JSON file.
        experiment: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one or all verification suites.
    Verify {
        #[arg(value_enum)]
        suite: Option<Suite>,
        /// Emit the reports as JSON instead of text.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fuzzed soccer steps.
        #[arg(long)]
        soccer_steps: Option<usize>,
    },
    /// List the bundled recipes.
    Recipes,
    /// Print a recipe or config file with overrides applied.
    PrintConfig {
        experiment: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Play one soccer game and write it as JSON lines.
    Trace {
        /// Soccer recipe name or config file.
        experiment: String,
        /// Trained policies (a `policies/run-NNN.json` file); defaults to
        /// the untrained initial profile.
        #[arg(long)]
        policies: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a recorded trace as text.
    Replay { trace: PathBuf },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    eval_episodes: Option<usize>,
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(v) = self.runs {
            config.runs = v;
        }
        if let Some(v) = self.episodes {
            config.episodes = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.eval_every {
            config.eval_every = v;
        }
        if let Some(v) = self.eval_episodes {
            config.eval_episodes = v;
        }
    }
}

/// A usage problem (bad config, unknown recipe) as opposed to a runtime failure.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn load_config(experiment: &str, overrides: Option<&Overrides>) -> Result<ExperimentConfig> {
    let mut config = match recipe(experiment) {
        Some(c) => c,
        None => {
            let path = Path::new(experiment);
            if !path.exists() {
                let names: Vec<_> = recipe_names().collect();
                return Err(Usage(format!(
                    "no recipe or file named {experiment:?} (recipes: {})",
                    names.join(", ")
                ))
                .into());
            }
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(o) = overrides {
        o.apply(&mut config);
    }
    config.validate().map_err(Usage)?;
    Ok(config)
}

fn run(experiment: &str, out: &Path, overrides: &Overrides) -> Result<ExitCode> {
    let config = load_config(experiment, Some(overrides))?;
    let results = run_experiment(&config)?;
    let files = write_outputs(&config, &results, out)?;
    for r in &results {
        let base = r.baseline.map_or("-".to_string(), |b| format!("{b:.4}"));
        let fin = r.final_eval().map_or("-".to_string(), |v| format!("{v:.4}"));
        let ret = r.curve.last("return").map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "run {:>3}  seed {:>20}  baseline {base:>8}  final eval {fin:>8}  final return {ret:>8}",
            r.run, r.seed
        );
    }
    println!("wrote {} files under {}", files.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn verify(suite: Option<Suite>, json: bool, seed: u64, soccer_steps: Option<usize>) -> Result<ExitCode> {
    let mut options = VerifyOptions {
        seed,
        ..VerifyOptions::default()
    };
    if let Some(s) = soccer_steps {
        options.soccer_steps = s;
    }
    let suites = suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
    let mut reports = Vec::new();
    for s in suites {
        let report = run_suite(s, &options)?;
        if !json {
            print!("{}", report.to_text());
        }
        reports.push(report);
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    }
    Ok(if reports.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn trace(experiment: &str, policies: Option<&Path>, seed: u64, out: &Path) -> Result<ExitCode> {
    let config = load_config(experiment, None)?;
    let game = Soccer::new(soccer_config(&config)).map_err(|e| Usage(e.to_string()))?;
    let profile: Vec<AgentPolicy> = match policies {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| Usage(format!("{}: not a policy profile ({e})", path.display())))?
        }
        None => initial_policies(&game, &config, config.seed),
    };
    let mut rng = SeedStreams::new(seed).episode_rng(profile.len());
    let records = record_episode(&game, &profile, &mut rng)?;
    let mut w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
    write_trace(&records, &mut w)?;
    w.flush()?;
    println!("{} steps written to {}", records.len().saturating_sub(1), out.display());
    Ok(ExitCode::SUCCESS)
}

fn replay(path: &Path) -> Result<ExitCode> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let records = read_trace(BufReader::new(file))?;
    if records.is_empty() {
        bail!(Usage(format!("{} holds no records", path.display())));
    }
    io::stdout().write_all(render_trace(&records).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            experiment,
            out,
            overrides,
        } => run(&experiment, &out, &overrides),
        Command::Verify {
            suite,
            json,
            seed,
            soccer_steps,
        } => verify(suite, json, seed, soccer_steps),
        Command::Recipes => {
            for name in recipe_names() {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::PrintConfig { experiment, overrides } => {
            println!("{}", load_config(&experiment, Some(&overrides))?.to_json());
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace {
            experiment,
            policies,
            seed,
            out,
        } => trace(&experiment, policies.as_deref(), seed, &out),
        Command::Replay { trace } => replay(&trace),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
