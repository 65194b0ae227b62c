//! Multi-run experiments: seeded runs in parallel, per-run curves, the
//! aggregate table and final policies.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dgd_core::domains::build_coordination_game;
use dgd_core::domains::soccer::{Soccer, SoccerConfig};
use dgd_core::game::Environment;
use dgd_core::learner::{dgd_train, evaluate_policies, LearningCurve, TrainConfig};
use dgd_core::policy::{AgentPolicy, BoltzmannPolicy, FiniteStateController};
use dgd_core::qlearn::{q_train, QConfig, StateMode};
use dgd_core::rng::{SeedStreams, INIT_STREAM};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Domain, ExperimentConfig, LearnerKind};

/// Result of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub curve: LearningCurve,
    /// Evaluation of the untrained learner on the same evaluation stream
    /// as the curve's `eval_return`; `None` without evaluation episodes.
    pub baseline: Option<f64>,
    /// Final policies (DGD) or Q table, as JSON.
    pub artifact: serde_json::Value,
}

impl RunResult {
    pub fn final_eval(&self) -> Option<f64> {
        self.curve.last("eval_return")
    }
}

/// Seed of run `run`: derived from the root so runs never share streams.
pub fn run_seed(config: &ExperimentConfig, run: usize) -> u64 {
    SeedStreams::new(config.seed).derive(run as u64 + 2).root()
}

pub fn soccer_config(config: &ExperimentConfig) -> SoccerConfig {
    SoccerConfig {
        opponents: config.opponents.clone(),
        pass_enabled: config.pass_enabled,
        max_steps: config.max_steps,
    }
}

pub fn initial_policies<E: Environment>(env: &E, config: &ExperimentConfig, seed: u64) -> Vec<AgentPolicy> {
    let mut rng = SeedStreams::new(seed).stream(INIT_STREAM);
    env.agent_shapes()
        .iter()
        .map(|s| match config.learner {
            LearnerKind::DgdFsc => FiniteStateController::random(
                config.fsc_states,
                s.observation_count,
                s.action_count,
                config.temperature,
                config.init_range,
                &mut rng,
            )
            .into(),
            _ => BoltzmannPolicy::random(
                s.observation_count,
                s.action_count,
                config.temperature,
                config.init_range,
                &mut rng,
            )
            .into(),
        })
        .collect()
}

fn train_config(config: &ExperimentConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: config.learning_rate,
        discount: config.discount,
        episodes: config.episodes,
        horizon: config.horizon,
        eval_every: config.eval_every,
        eval_episodes: config.eval_episodes,
        seed,
    }
}

fn q_config(config: &ExperimentConfig, seed: u64) -> QConfig {
    QConfig {
        learning_rate: config.learning_rate,
        discount: config.discount,
        epsilon: config.epsilon,
        episodes: config.episodes,
        horizon: config.horizon,
        eval_every: config.eval_every,
        eval_episodes: config.eval_episodes,
        seed,
        initial_value: 0.0,
        mode: if config.learner == LearnerKind::QlearnPartial {
            StateMode::Partial
        } else {
            StateMode::Full
        },
    }
}

fn train<E: Environment>(env: &E, config: &ExperimentConfig, run: usize) -> Result<RunResult> {
    let seed = run_seed(config, run);
    if config.learner.is_dgd() {
        let policies = initial_policies(env, config, seed);
        let tc = train_config(config, seed);
        let baseline = if config.eval_episodes > 0 {
            let streams = SeedStreams::new(seed).derive(1);
            Some(
                evaluate_policies(
                    env,
                    &policies,
                    config.eval_episodes,
                    config.horizon,
                    config.discount,
                    streams,
                )?
                .0,
            )
        } else {
            None
        };
        let (trained, curve) = dgd_train(env, policies, &tc)?;
        Ok(RunResult {
            run,
            seed,
            curve,
            baseline,
            artifact: serde_json::to_value(&trained)?,
        })
    } else {
        let qc = q_config(config, seed);
        let baseline = if config.eval_episodes > 0 {
            let untrained = QConfig {
                episodes: 0,
                ..qc.clone()
            };
            q_train(env, &untrained)?.1.last("eval_return")
        } else {
            None
        };
        let (table, curve) = q_train(env, &qc)?;
        Ok(RunResult {
            run,
            seed,
            curve,
            baseline,
            artifact: serde_json::from_str(&table.to_json()?)?,
        })
    }
}

pub fn run_one(config: &ExperimentConfig, run: usize) -> Result<RunResult> {
    match config.domain {
        Domain::Coordination => train(&build_coordination_game(), config, run),
        Domain::Soccer => train(&Soccer::new(soccer_config(config))?, config, run),
    }
}

/// Runs every seed of `config`; results come back in run order whatever
/// the thread schedule.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunResult>> {
    if let Err(e) = config.validate() {
        bail!("invalid config: {e}");
    }
    (0..config.runs)
        .into_par_iter()
        .map(|run| run_one(config, run))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub episode: usize,
    pub metric: String,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

/// Mean and sample standard deviation across runs per (metric, episode).
pub fn aggregate(curves: &[&LearningCurve]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for curve in curves {
        for p in curve.points() {
            groups.entry((p.metric.clone(), p.episode)).or_default().push(p.value);
        }
    }
    groups
        .into_iter()
        .map(|((metric, episode), values)| {
            let n = values.len();
            let mean = values.iter().sum::<f64>() / n as f64;
            let sd = if n > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            AggregateRow {
                episode,
                metric,
                mean,
                sd,
                n,
            }
        })
        .collect()
}

pub fn write_aggregate(rows: &[AggregateRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregate(input: impl std::io::Read) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub baseline_eval: Option<f64>,
    pub final_eval: Option<f64>,
    pub final_return: Option<f64>,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

/// Writes `config.json`, `runs/run-NNN.csv`, `policies/run-NNN.json`,
/// `aggregate.csv` and `summary.json` under `dir`.
pub fn write_outputs(config: &ExperimentConfig, results: &[RunResult], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir.join("runs"))?;
    fs::create_dir_all(dir.join("policies"))?;
    let mut written = Vec::new();
    let mut put = |path: PathBuf, bytes: Vec<u8>| -> Result<()> {
        write_atomic(&path, &bytes)?;
        written.push(path);
        Ok(())
    };
    put(dir.join("config.json"), (config.to_json() + "\n").into_bytes())?;
    for r in results {
        let name = format!("run-{:03}", r.run);
        put(
            dir.join("runs").join(format!("{name}.csv")),
            r.curve.to_csv_string(r.run)?.into_bytes(),
        )?;
        let mut policy = serde_json::to_vec_pretty(&r.artifact)?;
        policy.push(b'\n');
        put(dir.join("policies").join(format!("{name}.json")), policy)?;
    }
    let curves: Vec<&LearningCurve> = results.iter().map(|r| &r.curve).collect();
    let mut agg = Vec::new();
    write_aggregate(&aggregate(&curves), &mut agg)?;
    put(dir.join("aggregate.csv"), agg)?;
    let summary: Vec<RunSummary> = results
        .iter()
        .map(|r| RunSummary {
            run: r.run,
            seed: r.seed,
            baseline_eval: r.baseline,
            final_eval: r.final_eval(),
            final_return: r.curve.last("return"),
        })
        .collect();
    let mut text = serde_json::to_vec_pretty(&summary)?;
    text.push(b'\n');
    put(dir.join("summary.json"), text)?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recipes::recipe;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            episodes: 50,
            eval_every: 10,
            eval_episodes: 5,
            runs: 3,
            ..recipe("coordination").unwrap()
        }
    }

    #[test]
    fn aggregate_statistics() {
        let mut a = LearningCurve::default();
        let mut b = LearningCurve::default();
        a.push(10, "return", 1.0).unwrap();
        b.push(10, "return", 3.0).unwrap();
        let rows = aggregate(&[&a, &b]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean, 2.0);
        assert!((rows[0].sd - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(rows[0].n, 2);
    }

    #[test]
    fn runs_are_reproducible_and_distinct() {
        let config = tiny();
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].seed, a[1].seed);
        assert!(a.iter().all(|r| r.baseline.is_some()));
    }

    #[test]
    fn single_episode_gives_one_evaluation_row() {
        let config = ExperimentConfig {
            episodes: 1,
            runs: 1,
            eval_episodes: 3,
            ..tiny()
        };
        let results = run_experiment(&config).unwrap();
        let csv = results[0].curve.to_csv_string(0).unwrap();
        assert_eq!(csv.lines().filter(|l| l.contains(",eval_return,")).count(), 1);
    }

    #[test]
    fn qlearning_runs() {
        let config = ExperimentConfig {
            learner: LearnerKind::QlearnFull,
            learning_rate: 0.1,
            epsilon: 0.4,
            ..tiny()
        };
        let results = run_experiment(&config).unwrap();
        assert!(results[0].artifact.get("rows").is_some());
    }
}
