//! Proof search as an MDP over sequences of fringes.
//!
//! A fringe is a set of goals whose joint validity implies the main goal.
//! Applying a tactic to goal `j` of fringe `i` yields a new fringe in which
//! that goal is replaced by the tactic's subgoals; selecting an older fringe
//! later is how the agent backtracks.

mod dot;
mod proof;
mod tracker;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kernel::Goal;
use crate::tactics::{apply_tactic, args_conform, TacticArg, TacticId, TacticOutcome, DEFAULT_FUEL};

pub use dot::export_search_graph;
pub use proof::{parse_script, reconstruct_proof, replay_script, ProofNode, ProofScript, ReplayError, ScriptParseError};
pub use tracker::DifficultyTracker;

/// Default timestep budget per episode.
pub const DEFAULT_BUDGET: usize = 50;

/// Where a fringe came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub fringe: usize,
    pub goal: usize,
    pub tactic: TacticId,
    pub args: Vec<TacticArg>,
    /// Subgoals returned by the tactic, before merging into the fringe.
    pub subgoals: Vec<Goal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fringe {
    pub goals: Vec<Goal>,
    pub parent: Option<Provenance>,
}

impl Fringe {
    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    fn same_goals(&self, goals: &[Goal]) -> bool {
        self.goals.len() == goals.len() && {
            let a: BTreeSet<&Goal> = self.goals.iter().collect();
            let b: BTreeSet<&Goal> = goals.iter().collect();
            a == b
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub fringe: usize,
    pub goal: usize,
    pub tactic: TacticId,
    pub args: Vec<TacticArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutcomeKind {
    Proved,
    Progress,
    SubgoalSolved,
    NoOp,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardTable {
    pub easy: f64,
    pub hard: f64,
    pub fail: f64,
    pub progress: f64,
    pub subgoal: f64,
    pub other: f64,
}

impl Default for RewardTable {
    fn default() -> Self {
        RewardTable {
            easy: 5.0,
            hard: 15.0,
            fail: -5.0,
            progress: 0.1,
            subgoal: 0.2,
            other: -0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub budget: usize,
    pub rewards: RewardTable,
    pub fuel: usize,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            budget: DEFAULT_BUDGET,
            rewards: RewardTable::default(),
            fuel: DEFAULT_FUEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("fringe index {index} out of range ({len} fringes)")]
    FringeOutOfRange { index: usize, len: usize },
    #[error("goal index {index} out of range (fringe has {len} goals)")]
    GoalOutOfRange { index: usize, len: usize },
    #[error("arguments do not conform to {0}")]
    ArgumentMismatch(TacticId),
    #[error("episode already finished")]
    Finished,
    #[error("state has no empty fringe")]
    NotProved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub reward: f64,
    pub done: bool,
    pub kind: OutcomeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: MdpState,
    pub reward: f64,
    pub done: bool,
    pub outcome_kind: OutcomeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpState {
    pub fringes: Vec<Fringe>,
    pub timestep: usize,
    pub main_goal: Goal,
}

/// Reward for a transition kind, given the theorem's standing in `tracker`.
pub fn compute_reward(kind: OutcomeKind, tracker: &DifficultyTracker, theorem: &str, table: &RewardTable) -> f64 {
    match kind {
        OutcomeKind::Proved => {
            if tracker.rate(theorem) > tracker.mean_rate() {
                table.easy
            } else {
                table.hard
            }
        }
        OutcomeKind::BudgetExhausted => table.fail,
        OutcomeKind::Progress => table.progress,
        OutcomeKind::SubgoalSolved => table.subgoal,
        OutcomeKind::NoOp => table.other,
    }
}

pub fn reset(main_goal: Goal) -> MdpState {
    MdpState {
        fringes: vec![Fringe {
            goals: vec![main_goal.clone()],
            parent: None,
        }],
        timestep: 0,
        main_goal,
    }
}

/// Pure form of [`MdpState::step`].
pub fn step(
    s: &MdpState,
    a: &Action,
    cfg: &EpisodeConfig,
    tracker: &DifficultyTracker,
    theorem: &str,
) -> Result<StepResult, EnvError> {
    let mut next = s.clone();
    let t = next.step(a, cfg, tracker, theorem)?;
    Ok(StepResult {
        next_state: next,
        reward: t.reward,
        done: t.done,
        outcome_kind: t.kind,
    })
}

impl MdpState {
    pub fn is_proved(&self) -> bool {
        self.proof_fringe().is_some()
    }

    /// Index of the first empty fringe, if any.
    pub fn proof_fringe(&self) -> Option<usize> {
        self.fringes.iter().position(Fringe::is_empty)
    }

    pub fn is_done(&self, cfg: &EpisodeConfig) -> bool {
        self.is_proved() || self.timestep >= cfg.budget
    }

    pub fn validate(&self, a: &Action) -> Result<(), EnvError> {
        let fringe = self.fringes.get(a.fringe).ok_or(EnvError::FringeOutOfRange {
            index: a.fringe,
            len: self.fringes.len(),
        })?;
        if a.goal >= fringe.len() {
            return Err(EnvError::GoalOutOfRange {
                index: a.goal,
                len: fringe.len(),
            });
        }
        if !args_conform(a.tactic, &a.args) {
            return Err(EnvError::ArgumentMismatch(a.tactic));
        }
        Ok(())
    }

    /// Applies `a` in place. Exactly one timestep is consumed.
    pub fn step(
        &mut self,
        a: &Action,
        cfg: &EpisodeConfig,
        tracker: &DifficultyTracker,
        theorem: &str,
    ) -> Result<Transition, EnvError> {
        if self.is_done(cfg) {
            return Err(EnvError::Finished);
        }
        self.validate(a)?;
        let goal = &self.fringes[a.fringe].goals[a.goal];
        let mut kind = match apply_tactic(goal, a.tactic, &a.args, cfg.fuel) {
            TacticOutcome::Subgoals(subgoals) => self.expand(a, subgoals),
            TacticOutcome::NoChange | TacticOutcome::Failed(_) | TacticOutcome::FuelExhausted => OutcomeKind::NoOp,
        };
        self.timestep += 1;
        if kind != OutcomeKind::Proved && self.timestep >= cfg.budget {
            kind = OutcomeKind::BudgetExhausted;
        }
        let done = matches!(kind, OutcomeKind::Proved | OutcomeKind::BudgetExhausted);
        Ok(Transition {
            reward: compute_reward(kind, tracker, theorem, &cfg.rewards),
            done,
            kind,
        })
    }

    fn expand(&mut self, a: &Action, subgoals: Vec<Goal>) -> OutcomeKind {
        let parent = &self.fringes[a.fringe];
        let mut goals: Vec<Goal> = Vec::with_capacity(parent.len() + subgoals.len());
        let rest = || parent.goals.iter().enumerate().filter(|(k, _)| *k != a.goal).map(|(_, g)| g);
        for (k, g) in parent.goals.iter().enumerate() {
            if k == a.goal {
                for s in &subgoals {
                    if !goals.contains(s) && !rest().any(|r| r == s) {
                        goals.push(s.clone());
                    }
                }
            } else {
                goals.push(g.clone());
            }
        }
        if self.fringes.iter().any(|f| f.same_goals(&goals)) {
            return OutcomeKind::NoOp;
        }
        let kind = if goals.is_empty() {
            OutcomeKind::Proved
        } else if subgoals.is_empty() || goals.len() < parent.len() {
            OutcomeKind::SubgoalSolved
        } else {
            OutcomeKind::Progress
        };
        self.fringes.push(Fringe {
            goals,
            parent: Some(Provenance {
                fringe: a.fringe,
                goal: a.goal,
                tactic: a.tactic,
                args: a.args.clone(),
                subgoals,
            }),
        });
        kind
    }

    /// Fringe indices from the root to `index`, following provenance.
    pub fn path_to(&self, index: usize) -> Vec<usize> {
        let mut path = vec![index];
        let mut cur = index;
        while let Some(p) = &self.fringes[cur].parent {
            cur = p.fringe;
            path.push(cur);
        }
        path.reverse();
        path
    }
}
