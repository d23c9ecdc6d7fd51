//! REINFORCE training with per-theorem proof replay.

mod checkpoint;
mod replay;

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Gradients, NodeId, ParamSet, RmsProp, DEFAULT_LEARNING_RATE};
use crate::env::{reconstruct_proof, reset, Action, DifficultyTracker, EpisodeConfig, MdpState, OutcomeKind, ProofScript};
use crate::kernel::{Goal, Theorem};
use crate::policy::{Policy, PolicyError, ProofContext, Session};
use crate::tactics::Library;

pub use checkpoint::{Checkpoint, CheckpointError, CHECKPOINT_VERSION};
pub use replay::{ReplayBuffer, REPLAY_CAPACITY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub seed: u64,
    pub episode: EpisodeConfig,
    /// Subtract a moving average of returns (off by default).
    pub baseline: bool,
    pub replay: bool,
    /// Checkpoint every K iterations; 0 writes only the final checkpoint.
    pub checkpoint_every: usize,
    pub workers: usize,
    /// Record wall-clock time in metrics (breaks byte-identical logs).
    pub record_wallclock: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            gamma: 0.99,
            learning_rate: DEFAULT_LEARNING_RATE,
            iterations: 300,
            seed: 0,
            episode: EpisodeConfig::default(),
            baseline: false,
            replay: true,
            checkpoint_every: 0,
            workers: 1,
            record_wallclock: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LearnerError {
    #[error("policy error on theorem {theorem}: {source}")]
    Policy { theorem: String, source: PolicyError },
    #[error("non-finite loss or gradient at iteration {iteration} (loss {loss})")]
    NonFinite { iteration: usize, loss: f64 },
    #[error("training split is empty")]
    EmptyTrainSplit,
    #[error("metrics output: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// `G_m = r_m + gamma * G_{m+1}`, computed right to left.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    assert!(gamma > 0.0 && gamma <= 1.0, "discount must lie in (0, 1]");
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (m, r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[m] = acc;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub action: Action,
    pub reward: f64,
    pub kind: OutcomeKind,
    pub log_prob: NodeId,
    /// Fringe count after the step.
    pub fringes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub theorem: String,
    pub steps: Vec<StepRecord>,
    pub final_state: MdpState,
}

impl Trajectory {
    pub fn proved(&self) -> bool {
        self.final_state.is_proved()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.reward).collect()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|s| s.action.clone()).collect()
    }

    pub fn script(&self) -> Option<ProofScript> {
        reconstruct_proof(&self.final_state, &self.theorem).ok()
    }
}

pub fn main_goal(theorem: &Theorem) -> Goal {
    Goal::from_term(theorem.statement.clone())
}

/// Rolls out one episode of the full policy on `session`'s tape.
pub fn run_episode(
    session: &mut Session<'_>,
    theorem: &Theorem,
    library: &Library,
    cfg: &EpisodeConfig,
    tracker: &DifficultyTracker,
    rng: &mut impl Rng,
) -> Result<Trajectory, PolicyError> {
    let ctx = ProofContext {
        library,
        target_index: theorem.library_index,
    };
    let mut state = reset(main_goal(theorem));
    let mut steps = Vec::new();
    while !state.is_done(cfg) {
        let sa = session.sample_action(&state, &ctx, rng)?;
        let t = state
            .step(&sa.action, cfg, tracker, &theorem.name)
            .expect("policy emits valid actions");
        steps.push(StepRecord {
            action: sa.action,
            reward: t.reward,
            kind: t.kind,
            log_prob: sa.log_prob,
            fringes: state.fringes.len(),
        });
    }
    Ok(Trajectory {
        theorem: theorem.name.clone(),
        steps,
        final_state: state,
    })
}

/// Walks the policy through `actions`, recording log-probabilities under the
/// current parameters. `None` when the actions no longer prove the theorem.
pub fn replay_episode(
    session: &mut Session<'_>,
    theorem: &Theorem,
    library: &Library,
    cfg: &EpisodeConfig,
    tracker: &DifficultyTracker,
    actions: &[Action],
) -> Option<Trajectory> {
    let ctx = ProofContext {
        library,
        target_index: theorem.library_index,
    };
    let mut state = reset(main_goal(theorem));
    let mut steps = Vec::new();
    for a in actions {
        if state.is_done(cfg) {
            break;
        }
        let sa = session.action_log_prob(&state, &ctx, a).ok()?;
        let t = state.step(a, cfg, tracker, &theorem.name).ok()?;
        steps.push(StepRecord {
            action: a.clone(),
            reward: t.reward,
            kind: t.kind,
            log_prob: sa.log_prob,
            fringes: state.fringes.len(),
        });
    }
    state.is_proved().then(|| Trajectory {
        theorem: theorem.name.clone(),
        steps,
        final_state: state,
    })
}

/// Seeds `(log_prob, -(G_m - baseline))` for the REINFORCE loss and the
/// loss value `-sum (G_m - baseline) log_prob`.
pub fn reinforce_seeds(session: &Session<'_>, traj: &Trajectory, gamma: f64, baseline: f64) -> (Vec<(NodeId, f64)>, f64) {
    let returns = discounted_returns(&traj.rewards(), gamma);
    let mut loss = 0.0;
    let seeds = traj
        .steps
        .iter()
        .zip(&returns)
        .map(|(s, g)| {
            let adv = g - baseline;
            loss -= adv * session.tape.scalar(s.log_prob);
            (s.log_prob, -adv)
        })
        .collect();
    (seeds, loss)
}

/// Independent per-episode random stream.
pub fn episode_rng(seed: u64, iteration: usize, episode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iteration as u64) << 32) ^ episode as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub proof_rate: f64,
    pub mean_return: f64,
    pub loss: f64,
    pub proved_ids: Vec<String>,
    pub wallclock_ms: u64,
}

struct EpisodeResult {
    theorem: String,
    proved: bool,
    first_return: f64,
    loss: f64,
    grads: Gradients,
    proof: Option<Vec<Action>>,
    replayed: Option<(usize, bool)>,
}

#[derive(Debug, Clone)]
pub struct Trainer {
    pub policy: Policy,
    pub params: ParamSet,
    pub optimizer: RmsProp,
    pub tracker: DifficultyTracker,
    pub buffer: ReplayBuffer,
    pub config: LearnerConfig,
    /// Next iteration to run.
    pub iteration: usize,
    pub baseline: f64,
}

impl Trainer {
    pub fn new<S: AsRef<str>>(policy: Policy, params: ParamSet, config: LearnerConfig, theorems: impl IntoIterator<Item = S>) -> Trainer {
        let optimizer = RmsProp::new(&params, config.learning_rate);
        Trainer {
            policy,
            params,
            optimizer,
            tracker: DifficultyTracker::new(theorems),
            buffer: ReplayBuffer::default(),
            config,
            iteration: 0,
            baseline: 0.0,
        }
    }

    fn episode(&self, theorem: &Theorem, k: usize, library: &Library) -> Result<EpisodeResult, LearnerError> {
        let cfg = &self.config;
        let mut rng = episode_rng(cfg.seed, self.iteration, k);
        let mut session = Session::new(&self.policy, &self.params);
        let traj = run_episode(&mut session, theorem, library, &cfg.episode, &self.tracker, &mut rng).map_err(|source| {
            LearnerError::Policy {
                theorem: theorem.name.clone(),
                source,
            }
        })?;
        let returns = discounted_returns(&traj.rewards(), cfg.gamma);
        let (mut seeds, mut loss) = reinforce_seeds(&session, &traj, cfg.gamma, self.baseline());
        let proved = traj.proved();
        let mut replayed = None;
        if !proved && cfg.replay {
            if let Some((slot, actions)) = self.buffer.pick(&theorem.name, &mut rng) {
                match replay_episode(&mut session, theorem, library, &cfg.episode, &self.tracker, actions) {
                    Some(rt) => {
                        let (s, l) = reinforce_seeds(&session, &rt, cfg.gamma, self.baseline());
                        seeds.extend(s);
                        loss += l;
                        replayed = Some((slot, true));
                    }
                    None => replayed = Some((slot, false)),
                }
            }
        }
        let mut grads = self.params.zeros_like();
        session.tape.backward_into(&seeds, &mut grads);
        Ok(EpisodeResult {
            theorem: theorem.name.clone(),
            proved,
            first_return: returns.first().copied().unwrap_or(0.0),
            loss,
            grads,
            proof: proved.then(|| traj.actions()),
            replayed,
        })
    }

    fn baseline(&self) -> f64 {
        if self.config.baseline {
            self.baseline
        } else {
            0.0
        }
    }

    /// One pass over `theorems` followed by a single optimizer step.
    pub fn run_iteration(&mut self, theorems: &[Arc<Theorem>], library: &Library) -> Result<IterationMetrics, LearnerError> {
        if theorems.is_empty() {
            return Err(LearnerError::EmptyTrainSplit);
        }
        let start = Instant::now();
        let workers = self.config.workers.max(1).min(theorems.len());
        let results: Vec<EpisodeResult> = if workers == 1 {
            theorems
                .iter()
                .enumerate()
                .map(|(k, t)| self.episode(t, k, library))
                .collect::<Result<_, _>>()?
        } else {
            let chunk = theorems.len().div_ceil(workers);
            let this = &*self;
            std::thread::scope(|scope| {
                let handles: Vec<_> = theorems
                    .chunks(chunk)
                    .enumerate()
                    .map(|(c, part)| {
                        scope.spawn(move || {
                            part.iter()
                                .enumerate()
                                .map(|(k, t)| this.episode(t, c * chunk + k, library))
                                .collect::<Result<Vec<_>, _>>()
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("rollout worker panicked"))
                    .collect::<Result<Vec<Vec<_>>, _>>()
                    .map(|v| v.into_iter().flatten().collect())
            })?
        };

        let mut grads = self.params.zeros_like();
        let mut loss = 0.0;
        let mut proved_ids = Vec::new();
        let mut return_sum = 0.0;
        for r in &results {
            grads.accumulate(&r.grads);
            loss += r.loss;
            return_sum += r.first_return;
            if r.proved {
                proved_ids.push(r.theorem.clone());
            }
        }
        if !loss.is_finite() || !grads.all_finite() {
            return Err(LearnerError::NonFinite {
                iteration: self.iteration,
                loss,
            });
        }
        self.optimizer.step(&mut self.params, &grads);
        for r in results {
            self.tracker.record(&r.theorem, r.proved);
            if let Some((slot, false)) = r.replayed {
                self.buffer.evict(&r.theorem, slot);
            }
            if let Some(actions) = r.proof {
                self.buffer.push(&r.theorem, actions);
            }
        }
        let mean_return = return_sum / theorems.len() as f64;
        self.baseline = 0.9 * self.baseline + 0.1 * mean_return;
        let metrics = IterationMetrics {
            iteration: self.iteration,
            proof_rate: proved_ids.len() as f64 / theorems.len() as f64,
            mean_return,
            loss,
            proved_ids,
            wallclock_ms: if self.config.record_wallclock {
                start.elapsed().as_millis() as u64
            } else {
                0
            },
        };
        self.iteration += 1;
        Ok(metrics)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            policy: self.policy.clone(),
            params: self.params.clone(),
            optimizer: self.optimizer.clone(),
            tracker: self.tracker.clone(),
            seed: self.config.seed,
            iteration: self.iteration,
            config: self.config,
        }
    }

    /// Resumes from `ck`. The replay buffer is not checkpointed and starts empty.
    pub fn from_checkpoint(ck: Checkpoint) -> Trainer {
        Trainer {
            policy: ck.policy,
            params: ck.params,
            optimizer: ck.optimizer,
            tracker: ck.tracker,
            buffer: ReplayBuffer::default(),
            config: ck.config,
            iteration: ck.iteration,
            baseline: 0.0,
        }
    }
}

/// Runs the remaining iterations, writing one JSON line of metrics per
/// iteration and handing checkpoints to `save`.
pub fn train(
    trainer: &mut Trainer,
    theorems: &[Arc<Theorem>],
    library: &Library,
    metrics: &mut dyn Write,
    save: &mut dyn FnMut(&Checkpoint) -> Result<(), CheckpointError>,
) -> Result<Vec<IterationMetrics>, LearnerError> {
    if theorems.is_empty() {
        return Err(LearnerError::EmptyTrainSplit);
    }
    let mut all = Vec::new();
    let every = trainer.config.checkpoint_every;
    while trainer.iteration < trainer.config.iterations {
        let m = trainer.run_iteration(theorems, library)?;
        writeln!(metrics, "{}", serde_json::to_string(&m).expect("metrics serialize"))?;
        metrics.flush()?;
        all.push(m);
        if every > 0 && trainer.iteration % every == 0 && trainer.iteration < trainer.config.iterations {
            save(&trainer.checkpoint())?;
        }
    }
    save(&trainer.checkpoint())?;
    Ok(all)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub attempted: usize,
    pub proved: usize,
    /// Mean timesteps over proved theorems.
    pub mean_timesteps: f64,
    /// Mean reconstructed proof length over proved theorems.
    pub mean_proof_length: f64,
    pub proved_ids: Vec<String>,
    #[serde(skip)]
    pub proofs: Vec<ProofScript>,
}

/// One sampled attempt per theorem with a fixed seed.
pub fn evaluate(
    policy: &Policy,
    params: &ParamSet,
    theorems: &[Arc<Theorem>],
    library: &Library,
    cfg: &EpisodeConfig,
    seed: u64,
) -> Result<EvalReport, LearnerError> {
    let tracker = DifficultyTracker::default();
    let mut report = EvalReport {
        attempted: theorems.len(),
        proved: 0,
        mean_timesteps: 0.0,
        mean_proof_length: 0.0,
        proved_ids: Vec::new(),
        proofs: Vec::new(),
    };
    for (k, thm) in theorems.iter().enumerate() {
        let mut rng = episode_rng(seed, usize::MAX >> 1, k);
        let mut session = Session::new(policy, params);
        let traj = run_episode(&mut session, thm, library, cfg, &tracker, &mut rng).map_err(|source| LearnerError::Policy {
            theorem: thm.name.clone(),
            source,
        })?;
        if let Some(script) = traj.script() {
            report.proved += 1;
            report.mean_timesteps += traj.final_state.timestep as f64;
            report.mean_proof_length += script.steps as f64;
            report.proved_ids.push(thm.name.clone());
            report.proofs.push(script);
        }
    }
    if report.proved > 0 {
        report.mean_timesteps /= report.proved as f64;
        report.mean_proof_length /= report.proved as f64;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn returns_match_hand_computation() {
        let g = discounted_returns(&[-0.1, -0.1, 15.0], 0.99);
        assert!((g[0] - 14.5025).abs() < 1e-9);
        assert_eq!(discounted_returns(&[1.0, 1.0], 1.0), vec![2.0, 1.0]);
        assert_eq!(discounted_returns(&[3.5], 0.5), vec![3.5]);
        assert!(discounted_returns(&[], 0.9).is_empty());
        let r = [0.1, -0.1, 0.2, -5.0];
        let g = discounted_returns(&r, 0.9);
        for m in 0..3 {
            assert_eq!(g[m], r[m] + 0.9 * g[m + 1]);
        }
    }

    #[test]
    fn episode_streams_differ() {
        let a: u64 = episode_rng(1, 0, 0).gen();
        let b: u64 = episode_rng(1, 0, 1).gen();
        let c: u64 = episode_rng(1, 1, 0).gen();
        assert!(a != b && a != c && b != c);
        assert_eq!(a, episode_rng(1, 0, 0).gen::<u64>());
    }
}
