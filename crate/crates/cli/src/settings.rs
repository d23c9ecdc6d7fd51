use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use serde::Deserialize;

use fringe_core::env::{EpisodeConfig, DEFAULT_BUDGET};
use fringe_core::learner::LearnerConfig;
use fringe_core::policy::{PolicyConfig, DEFAULT_MAX_ARGS};
use fringe_core::tactics::DEFAULT_FUEL;

/// Run settings shared by the subcommands. Every field can also appear in
/// the TOML file given by `--config`; flags win over the file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Corpus file (JSON lines)
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Timesteps per episode
    #[arg(long)]
    pub budget: Option<usize>,
    /// Tactic fuel per application
    #[arg(long)]
    pub fuel: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Encoder and policy width
    #[arg(long)]
    pub dim: Option<usize>,
    /// Token embedding width
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// Maximum theorem-list length
    #[arg(long)]
    pub max_args: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Rollout threads
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Save a checkpoint every K iterations (0: only at the end)
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Fraction of the corpus used for training
    #[arg(long)]
    pub split_ratio: Option<f64>,
    /// Seed of the train/test shuffle
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Subtract a running mean of returns
    #[arg(long)]
    pub baseline: Option<bool>,
    /// Re-walk stored proofs of theorems the agent failed on
    #[arg(long)]
    pub replay: Option<bool>,
}

macro_rules! prefer {
    ($a:expr, $b:expr, $($f:ident),*) => {
        Settings { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Settings {
    /// Fills unset fields from the file at `path`.
    pub fn with_file(self, path: Option<&Path>) -> anyhow::Result<Settings> {
        let Some(path) = path else { return Ok(self) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let file: Settings = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(prefer!(
            self,
            file,
            corpus,
            seed,
            budget,
            fuel,
            gamma,
            lr,
            dim,
            embed_dim,
            max_args,
            iterations,
            workers,
            checkpoint,
            metrics,
            checkpoint_every,
            split_ratio,
            split_seed,
            baseline,
            replay
        ))
    }

    pub fn corpus(&self) -> anyhow::Result<&Path> {
        self.corpus.as_deref().context("--corpus is required")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| "checkpoint.json".into())
    }

    pub fn metrics(&self) -> PathBuf {
        self.metrics.clone().unwrap_or_else(|| "metrics.jsonl".into())
    }

    pub fn split_ratio(&self) -> f64 {
        self.split_ratio.unwrap_or(0.8)
    }

    pub fn split_seed(&self) -> u64 {
        self.split_seed.unwrap_or(0)
    }

    pub fn episode(&self) -> EpisodeConfig {
        EpisodeConfig {
            budget: self.budget.unwrap_or(DEFAULT_BUDGET),
            fuel: self.fuel.unwrap_or(DEFAULT_FUEL),
            ..EpisodeConfig::default()
        }
    }

    pub fn policy(&self) -> PolicyConfig {
        let base = PolicyConfig::default();
        let dim = self.dim.unwrap_or(base.dim);
        PolicyConfig {
            embed_dim: self.embed_dim.unwrap_or(base.embed_dim),
            dim,
            hidden: dim,
            max_args: self.max_args.unwrap_or(DEFAULT_MAX_ARGS),
        }
    }

    pub fn learner(&self) -> LearnerConfig {
        let base = LearnerConfig::default();
        LearnerConfig {
            gamma: self.gamma.unwrap_or(base.gamma),
            learning_rate: self.lr.unwrap_or(base.learning_rate),
            iterations: self.iterations.unwrap_or(base.iterations),
            seed: self.seed(),
            episode: self.episode(),
            baseline: self.baseline.unwrap_or(base.baseline),
            replay: self.replay.unwrap_or(base.replay),
            checkpoint_every: self.checkpoint_every.unwrap_or(base.checkpoint_every),
            workers: self.workers.unwrap_or(base.workers).max(1),
            record_wallclock: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 3\nlr = 0.01\niterations = 7\n").unwrap();
        let flags = Settings {
            seed: Some(9),
            ..Settings::default()
        };
        let s = flags.with_file(Some(&path)).unwrap();
        assert_eq!(s.seed(), 9);
        assert_eq!(s.learner().learning_rate, 0.01);
        assert_eq!(s.learner().iterations, 7);
    }

    #[test]
    fn defaults() {
        let l = Settings::default().learner();
        assert_eq!(l.gamma, 0.99);
        assert_eq!(l.learning_rate, 5e-5);
        assert_eq!(l.episode.budget, 50);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "sede = 3\n").unwrap();
        assert!(Settings::default().with_file(Some(&path)).is_err());
    }
}
