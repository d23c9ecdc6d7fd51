//! Factorized proof-search policy: a fringe distribution from summed goal
//! scores, a tactic distribution for the first goal of the chosen fringe, and
//! a recurrent argument sampler.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{categorical_sample, init_tensor, softmax, Dense, GruCell, NodeId, ParamId, ParamSet, SampleError, Tape};
use crate::encoder::{Encoder, Vocabulary, DEFAULT_DIM};
use crate::env::{Action, MdpState};
use crate::kernel::Goal;
use crate::tactics::{candidate_arguments, ArgKind, Library, TacticArg, TacticId};

pub const DEFAULT_MAX_ARGS: usize = 5;
pub const DEFAULT_HIDDEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub embed_dim: usize,
    pub dim: usize,
    pub hidden: usize,
    pub max_args: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            embed_dim: 32,
            dim: DEFAULT_DIM,
            hidden: DEFAULT_HIDDEN,
            max_args: DEFAULT_MAX_ARGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("state is terminal or has an empty fringe")]
    Terminal,
    #[error("sampling failed: {0}")]
    Sample(#[from] SampleError),
    #[error("action is not producible by the policy: {0}")]
    Unreachable(String),
}

/// Layer layout of the policy; the numbers live in a separate [`ParamSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub config: PolicyConfig,
    pub encoder: Encoder,
    goal_hidden: Dense,
    goal_out: Dense,
    tactic_hidden: Dense,
    tactic_out: Dense,
    tactic_embedding: ParamId,
    arg_cell: GruCell,
    arg_state: Dense,
    arg_candidate: ParamId,
    arg_score: ParamId,
}

/// Where the episode's theorem sits in the library.
#[derive(Debug, Clone, Copy)]
pub struct ProofContext<'a> {
    pub library: &'a Library,
    pub target_index: usize,
}

impl<'a> ProofContext<'a> {
    pub fn candidates(&self, goal: &Goal, tactic: TacticId) -> Vec<TacticArg> {
        candidate_arguments(goal, tactic, self.library, self.target_index)
    }

    /// Tactics that can run on `goal`: argument-taking single-argument
    /// tactics need at least one candidate.
    pub fn tactic_mask(&self, goal: &Goal) -> Vec<bool> {
        TacticId::ALL
            .iter()
            .map(|t| match t.arg_kind() {
                ArgKind::None | ArgKind::TheoremList => true,
                ArgKind::SingleTerm | ArgKind::SingleTheorem => !self.candidates(goal, *t).is_empty(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledAction {
    pub action: Action,
    pub log_prob: NodeId,
    pub fringe_log_prob: NodeId,
    pub tactic_log_prob: NodeId,
    pub arg_log_probs: Vec<NodeId>,
}

impl Policy {
    pub fn new(params: &mut ParamSet, vocab: Vocabulary, config: PolicyConfig, rng: &mut impl Rng) -> Policy {
        let d = config.dim;
        let h = config.hidden;
        let encoder = Encoder::new(params, vocab, config.embed_dim, d, rng);
        let goal_hidden = Dense::new(params, "goal.hidden", d, h, rng);
        let goal_out = Dense::new(params, "goal.out", h, 1, rng);
        let tactic_hidden = Dense::new(params, "tactic.hidden", d, h, rng);
        let tactic_out = Dense::new(params, "tactic.out", h, TacticId::COUNT, rng);
        let tactic_embedding = params.add("arg.tactic_embedding", init_tensor(TacticId::COUNT, d, 0.5, rng));
        let arg_cell = GruCell::new(params, "arg.gru", d, d, rng);
        let arg_state = Dense::new(params, "arg.state", d, h, rng);
        let scale = 1.0 / (d as f64).sqrt();
        let arg_candidate = params.add("arg.candidate", init_tensor(h, d, scale, rng));
        let arg_score = params.add("arg.score", init_tensor(h, 1, 1.0 / (h as f64).sqrt(), rng));
        Policy {
            config,
            encoder,
            goal_hidden,
            goal_out,
            tactic_hidden,
            tactic_out,
            tactic_embedding,
            arg_cell,
            arg_state,
            arg_candidate,
            arg_score,
        }
    }

    /// Parameter ids of the goal-value head.
    pub fn goal_head_params(&self) -> Vec<ParamId> {
        vec![self.goal_hidden.w, self.goal_hidden.b, self.goal_out.w, self.goal_out.b]
    }

    /// Parameter ids of the tactic head.
    pub fn tactic_head_params(&self) -> Vec<ParamId> {
        vec![self.tactic_hidden.w, self.tactic_hidden.b, self.tactic_out.w, self.tactic_out.b]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum ArgKey {
    Term(String),
    Theorem(String),
}

impl ArgKey {
    fn of(arg: &TacticArg) -> ArgKey {
        match arg {
            TacticArg::Term(t) => ArgKey::Term(t.to_string()),
            TacticArg::Theorem(thm) => ArgKey::Theorem(thm.name.clone()),
        }
    }
}

/// A tape plus memoized encodings, shared by every action recorded on it.
pub struct Session<'p> {
    pub policy: &'p Policy,
    pub tape: Tape<'p>,
    goal_vecs: HashMap<Goal, NodeId>,
    goal_scores: HashMap<Goal, NodeId>,
    tactic_logits: HashMap<Goal, NodeId>,
    arg_vecs: HashMap<ArgKey, (NodeId, NodeId)>,
}

enum ArgMode<'a, R> {
    Sample(&'a mut R),
    Forced(&'a [TacticArg]),
}

impl<'p> Session<'p> {
    pub fn new(policy: &'p Policy, params: &'p ParamSet) -> Session<'p> {
        Session {
            policy,
            tape: Tape::new(params),
            goal_vecs: HashMap::new(),
            goal_scores: HashMap::new(),
            tactic_logits: HashMap::new(),
            arg_vecs: HashMap::new(),
        }
    }

    pub fn goal_vector(&mut self, goal: &Goal) -> NodeId {
        if let Some(v) = self.goal_vecs.get(goal) {
            return *v;
        }
        let v = self.policy.encoder.encode_goal(&mut self.tape, goal);
        self.goal_vecs.insert(goal.clone(), v);
        v
    }

    /// Scalar goal-value logit.
    pub fn goal_score(&mut self, goal: &Goal) -> NodeId {
        if let Some(v) = self.goal_scores.get(goal) {
            return *v;
        }
        let g = self.goal_vector(goal);
        let p = self.policy;
        let pre = p.goal_hidden.forward(&mut self.tape, g);
        let hidden = self.tape.tanh(pre);
        let v = p.goal_out.forward(&mut self.tape, hidden);
        self.goal_scores.insert(goal.clone(), v);
        v
    }

    /// Logits over fringes: the sum of goal scores in each fringe.
    pub fn fringe_logits(&mut self, state: &MdpState) -> Result<NodeId, PolicyError> {
        if state.fringes.iter().any(|f| f.is_empty()) {
            return Err(PolicyError::Terminal);
        }
        let sums: Vec<NodeId> = state
            .fringes
            .iter()
            .map(|f| {
                let scores: Vec<NodeId> = f.goals.iter().map(|g| self.goal_score(g)).collect();
                self.tape.sum(&scores)
            })
            .collect();
        Ok(self.tape.stack(&sums))
    }

    pub fn fringe_distribution(&mut self, state: &MdpState) -> Result<Vec<f64>, PolicyError> {
        let logits = self.fringe_logits(state)?;
        Ok(softmax(self.tape.value(logits), None))
    }

    pub fn tactic_logits(&mut self, goal: &Goal) -> NodeId {
        if let Some(v) = self.tactic_logits.get(goal) {
            return *v;
        }
        let g = self.goal_vector(goal);
        let p = self.policy;
        let pre = p.tactic_hidden.forward(&mut self.tape, g);
        let hidden = self.tape.tanh(pre);
        let v = p.tactic_out.forward(&mut self.tape, hidden);
        self.tactic_logits.insert(goal.clone(), v);
        v
    }

    /// Tactic probabilities with `mask` applied (all tactics when `None`).
    pub fn tactic_distribution(&mut self, goal: &Goal, mask: Option<&[bool]>) -> Vec<f64> {
        let logits = self.tactic_logits(goal);
        softmax(self.tape.value(logits), mask)
    }

    /// Embedding of a candidate and its projection into the scoring space.
    fn argument_vector(&mut self, arg: &TacticArg) -> (NodeId, NodeId) {
        let key = ArgKey::of(arg);
        if let Some(v) = self.arg_vecs.get(&key) {
            return *v;
        }
        let enc = &self.policy.encoder;
        let v = match arg {
            TacticArg::Term(t) => enc.encode(&mut self.tape, &t.tokenize_polish()),
            TacticArg::Theorem(thm) => enc.encode_theorem(&mut self.tape, &thm.statement),
        };
        let proj = self.tape.affine(self.policy.arg_candidate, None, v);
        self.arg_vecs.insert(key, (v, proj));
        (v, proj)
    }

    fn arguments<R: Rng>(
        &mut self,
        goal: &Goal,
        tactic: TacticId,
        candidates: &[TacticArg],
        mut mode: ArgMode<'_, R>,
    ) -> Result<(Vec<TacticArg>, Vec<NodeId>), PolicyError> {
        let steps = match tactic.arg_kind() {
            ArgKind::None => 0,
            ArgKind::SingleTerm | ArgKind::SingleTheorem => 1,
            ArgKind::TheoremList => self.policy.config.max_args.min(candidates.len()),
        };
        if let ArgMode::Forced(given) = &mode {
            if given.len() != steps {
                return Err(PolicyError::Unreachable(format!(
                    "{tactic} takes {steps} argument(s) here, action has {}",
                    given.len()
                )));
            }
        }
        if steps == 0 {
            return Ok((Vec::new(), Vec::new()));
        }
        if candidates.is_empty() {
            return Err(PolicyError::Sample(SampleError::EmptySupport));
        }
        let p = self.policy;
        let cand: Vec<(NodeId, NodeId)> = candidates.iter().map(|c| self.argument_vector(c)).collect();
        let mut h = self.goal_vector(goal);
        let mut x = self.tape.row(p.tactic_embedding, tactic.index());
        let v = self.tape.param(p.arg_score);
        let mut available = vec![true; candidates.len()];
        let mut chosen = Vec::with_capacity(steps);
        let mut log_probs = Vec::with_capacity(steps);
        for step in 0..steps {
            h = p.arg_cell.step(&mut self.tape, x, h);
            let hp = p.arg_state.forward(&mut self.tape, h);
            let scores: Vec<NodeId> = cand
                .iter()
                .map(|(_, cp)| {
                    let pre = self.tape.add(hp, *cp);
                    let act = self.tape.tanh(pre);
                    self.tape.dot(act, v)
                })
                .collect();
            let logits = self.tape.stack(&scores);
            let mask = if available.iter().all(|a| *a) { None } else { Some(available.clone()) };
            let (index, lp) = match &mut mode {
                ArgMode::Sample(rng) => categorical_sample(&mut self.tape, logits, mask, *rng)?,
                ArgMode::Forced(given) => {
                    let index = candidates
                        .iter()
                        .enumerate()
                        .position(|(k, c)| available[k] && *c == given[step])
                        .ok_or_else(|| PolicyError::Unreachable(format!("argument {} is not a remaining candidate", given[step])))?;
                    (index, self.tape.log_softmax_pick(logits, index, mask))
                }
            };
            available[index] = false;
            chosen.push(candidates[index].clone());
            log_probs.push(lp);
            x = cand[index].0;
        }
        Ok((chosen, log_probs))
    }

    /// Samples arguments for `tactic`; returns them with per-step log-probs.
    pub fn sample_arguments(
        &mut self,
        goal: &Goal,
        tactic: TacticId,
        candidates: &[TacticArg],
        rng: &mut impl Rng,
    ) -> Result<(Vec<TacticArg>, Vec<NodeId>), PolicyError> {
        self.arguments(goal, tactic, candidates, ArgMode::Sample(rng))
    }

    fn total(&mut self, parts: Vec<NodeId>) -> NodeId {
        self.tape.sum(&parts)
    }

    /// Samples a full action: fringe, then tactic for goal 0, then arguments.
    pub fn sample_action(&mut self, state: &MdpState, ctx: &ProofContext<'_>, rng: &mut impl Rng) -> Result<SampledAction, PolicyError> {
        let logits = self.fringe_logits(state)?;
        let (fringe, fringe_lp) = categorical_sample(&mut self.tape, logits, None, rng)?;
        self.sample_tactic_for(state, fringe, fringe_lp, ctx, rng)
    }

    /// Samples tactic and arguments for goal 0 of `fringe`, charging
    /// `fringe_lp` as the fringe component.
    pub fn sample_tactic_for(
        &mut self,
        state: &MdpState,
        fringe: usize,
        fringe_lp: NodeId,
        ctx: &ProofContext<'_>,
        rng: &mut impl Rng,
    ) -> Result<SampledAction, PolicyError> {
        let goal = state.fringes[fringe].goals[0].clone();
        let mask = ctx.tactic_mask(&goal);
        let logits = self.tactic_logits(&goal);
        let (t, tactic_lp) = categorical_sample(&mut self.tape, logits, Some(mask), rng)?;
        let tactic = TacticId::ALL[t];
        self.finish(state, fringe, fringe_lp, tactic, tactic_lp, ctx, rng)
    }

    /// Completes an action whose tactic was chosen by the caller.
    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        &mut self,
        state: &MdpState,
        fringe: usize,
        fringe_lp: NodeId,
        tactic: TacticId,
        tactic_lp: NodeId,
        ctx: &ProofContext<'_>,
        rng: &mut impl Rng,
    ) -> Result<SampledAction, PolicyError> {
        let goal = &state.fringes[fringe].goals[0];
        let candidates = ctx.candidates(goal, tactic);
        let (args, arg_log_probs) = self.arguments(goal, tactic, &candidates, ArgMode::Sample(rng))?;
        let mut parts = vec![fringe_lp, tactic_lp];
        parts.extend(&arg_log_probs);
        let log_prob = self.total(parts);
        Ok(SampledAction {
            action: Action {
                fringe,
                goal: 0,
                tactic,
                args,
            },
            log_prob,
            fringe_log_prob: fringe_lp,
            tactic_log_prob: tactic_lp,
            arg_log_probs,
        })
    }

    /// Log-probability of a given action under the current parameters.
    pub fn action_log_prob(&mut self, state: &MdpState, ctx: &ProofContext<'_>, action: &Action) -> Result<SampledAction, PolicyError> {
        let logits = self.fringe_logits(state)?;
        if action.fringe >= state.fringes.len() || action.goal != 0 {
            return Err(PolicyError::Unreachable("fringe or goal index".into()));
        }
        let fringe_lp = self.tape.log_softmax_pick(logits, action.fringe, None);
        let goal = state.fringes[action.fringe].goals[0].clone();
        let mask = ctx.tactic_mask(&goal);
        if !mask[action.tactic.index()] {
            return Err(PolicyError::Unreachable(format!("{} is masked", action.tactic)));
        }
        let logits = self.tactic_logits(&goal);
        let tactic_lp = self.tape.log_softmax_pick(logits, action.tactic.index(), Some(mask));
        let candidates = ctx.candidates(&goal, action.tactic);
        let (args, arg_log_probs) =
            self.arguments::<rand_chacha::ChaCha8Rng>(&goal, action.tactic, &candidates, ArgMode::Forced(&action.args))?;
        let mut parts = vec![fringe_lp, tactic_lp];
        parts.extend(&arg_log_probs);
        let log_prob = self.total(parts);
        Ok(SampledAction {
            action: Action { args, ..action.clone() },
            log_prob,
            fringe_log_prob: fringe_lp,
            tactic_log_prob: tactic_lp,
            arg_log_probs,
        })
    }
}
