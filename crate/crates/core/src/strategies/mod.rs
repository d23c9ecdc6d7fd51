//! Fixed search strategies driving the learned tactic and argument policies.
//!
//! Every strategy goes through [`MdpState::step`], so one tactic application
//! is one timestep regardless of who chose it.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::autodiff::{categorical_sample, ParamSet};
use crate::env::{reconstruct_proof, reset, DifficultyTracker, EpisodeConfig, MdpState, ProofScript};
use crate::kernel::Theorem;
use crate::learner::{episode_rng, main_goal};
use crate::policy::{Policy, PolicyError, ProofContext, Session};
use crate::tactics::{Library, TacticId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StrategyKind {
    Learned,
    Bfs,
    Dfs,
    LatestFringe,
    Untrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExpansionMode {
    /// Tactics sampled from the tactic policy.
    Stochastic,
    /// The most probable tactics, ties to the lower index.
    TopK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub mode: ExpansionMode,
    pub branching: usize,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind, mode: ExpansionMode, branching: usize) -> StrategySpec {
        StrategySpec {
            kind,
            mode,
            branching: branching.max(1),
        }
    }

    pub fn learned() -> StrategySpec {
        StrategySpec::new(StrategyKind::Learned, ExpansionMode::Stochastic, 1)
    }

    pub fn untrained() -> StrategySpec {
        StrategySpec::new(StrategyKind::Untrained, ExpansionMode::Stochastic, 1)
    }

    pub fn latest_fringe() -> StrategySpec {
        StrategySpec::new(StrategyKind::LatestFringe, ExpansionMode::Stochastic, 1)
    }

    pub fn bfs(mode: ExpansionMode, branching: usize) -> StrategySpec {
        StrategySpec::new(StrategyKind::Bfs, mode, branching)
    }

    pub fn dfs(mode: ExpansionMode, branching: usize) -> StrategySpec {
        StrategySpec::new(StrategyKind::Dfs, mode, branching)
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            ExpansionMode::Stochastic => "stochastic",
            ExpansionMode::TopK => "topk",
        };
        match self.kind {
            StrategyKind::Learned => write!(f, "learned"),
            StrategyKind::Untrained => write!(f, "untrained"),
            StrategyKind::LatestFringe => write!(f, "latest"),
            StrategyKind::Bfs => write!(f, "bfs-{mode}-{}", self.branching),
            StrategyKind::Dfs => write!(f, "dfs-{mode}-{}", self.branching),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy {0:?} (expected learned, untrained, latest, or bfs|dfs-stochastic|topk-B)")]
pub struct ParseStrategyError(String);

impl FromStr for StrategySpec {
    type Err = ParseStrategyError;

    /// Accepts the [`Display`](fmt::Display) forms, e.g. `dfs-topk-2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseStrategyError(s.to_string());
        match s {
            "learned" => return Ok(StrategySpec::learned()),
            "untrained" => return Ok(StrategySpec::untrained()),
            "latest" => return Ok(StrategySpec::latest_fringe()),
            _ => {}
        }
        let parts: Vec<&str> = s.split('-').collect();
        let [kind, mode, b] = parts[..] else {
            return Err(bad());
        };
        let kind = match kind {
            "bfs" => StrategyKind::Bfs,
            "dfs" => StrategyKind::Dfs,
            _ => return Err(bad()),
        };
        let mode = match mode {
            "stochastic" => ExpansionMode::Stochastic,
            "topk" => ExpansionMode::TopK,
            _ => return Err(bad()),
        };
        let b: usize = b.parse().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        Ok(StrategySpec::new(kind, mode, b))
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub proved: bool,
    pub timesteps_used: usize,
    /// Tactic applications in the reconstructed proof; 0 when unproved.
    pub proof_length: usize,
    pub script: Option<ProofScript>,
    pub final_state: MdpState,
}

/// Deepest level BFS expands within `budget` for branching `b`: the largest
/// `k` such that a full tree reaches its first level-`k` application in time.
pub fn bfs_depth_cap(budget: usize, b: usize) -> usize {
    let b = b.max(1);
    let mut k = 1;
    // applications spent on levels 1..=k of a full tree, plus one
    let mut used = 0usize;
    let mut width = 1usize;
    loop {
        width = width.saturating_mul(b);
        used = used.saturating_add(width);
        if used.saturating_add(1) > budget {
            return k;
        }
        k += 1;
    }
}

/// Indices of the `k` most probable tactics among unmasked ones.
pub fn top_k(probs: &[f64], mask: &[bool], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).filter(|&i| mask[i]).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

struct Search<'a, 'p, R> {
    session: Session<'p>,
    ctx: ProofContext<'a>,
    cfg: &'a EpisodeConfig,
    tracker: DifficultyTracker,
    name: &'a str,
    state: MdpState,
    rng: &'a mut R,
}

impl<'p, R: Rng> Search<'_, 'p, R> {
    fn done(&self) -> bool {
        self.state.is_done(self.cfg)
    }

    /// The tactics to try on goal 0 of `fringe`.
    fn choices(&mut self, fringe: usize, spec: &StrategySpec) -> Result<Vec<TacticId>, PolicyError> {
        let goal = self.state.fringes[fringe].goals[0].clone();
        let mask = self.ctx.tactic_mask(&goal);
        Ok(match spec.mode {
            ExpansionMode::TopK => {
                let probs = self.session.tactic_distribution(&goal, Some(&mask));
                top_k(&probs, &mask, spec.branching).into_iter().map(|i| TacticId::ALL[i]).collect()
            }
            ExpansionMode::Stochastic => {
                let logits = self.session.tactic_logits(&goal);
                let mut out = Vec::with_capacity(spec.branching);
                for _ in 0..spec.branching {
                    let (i, _) = categorical_sample(&mut self.session.tape, logits, Some(mask.clone()), self.rng)?;
                    out.push(TacticId::ALL[i]);
                }
                out
            }
        })
    }

    /// Applies `tactic` with sampled arguments to goal 0 of `fringe`; returns
    /// the index of the new fringe if one was created.
    fn apply(&mut self, fringe: usize, tactic: TacticId) -> Result<Option<usize>, PolicyError> {
        let zero = self.session.tape.constant(0.0);
        let sa = self.session.finish(&self.state, fringe, zero, tactic, zero, &self.ctx, self.rng)?;
        self.step(&sa.action)
    }

    fn step(&mut self, action: &crate::env::Action) -> Result<Option<usize>, PolicyError> {
        let before = self.state.fringes.len();
        self.state
            .step(action, self.cfg, &self.tracker, self.name)
            .map_err(|e| PolicyError::Unreachable(e.to_string()))?;
        Ok((self.state.fringes.len() > before).then_some(before))
    }

    fn learned(&mut self) -> Result<(), PolicyError> {
        while !self.done() {
            let sa = self.session.sample_action(&self.state, &self.ctx, self.rng)?;
            self.step(&sa.action)?;
        }
        Ok(())
    }

    fn latest(&mut self) -> Result<(), PolicyError> {
        while !self.done() {
            let last = self.state.fringes.len() - 1;
            let lp = self.session.tape.constant(0.0);
            let sa = self.session.sample_tactic_for(&self.state, last, lp, &self.ctx, self.rng)?;
            self.step(&sa.action)?;
        }
        Ok(())
    }

    fn bfs(&mut self, spec: &StrategySpec) -> Result<(), PolicyError> {
        let cap = bfs_depth_cap(self.cfg.budget, spec.branching);
        let mut queue = VecDeque::from([(0usize, 0usize)]);
        while let Some((fringe, depth)) = queue.pop_front() {
            if self.done() {
                break;
            }
            if depth >= cap {
                continue;
            }
            for tactic in self.choices(fringe, spec)? {
                if self.done() {
                    break;
                }
                if let Some(child) = self.apply(fringe, tactic)? {
                    if self.state.fringes[child].is_empty() {
                        return Ok(());
                    }
                    queue.push_back((child, depth + 1));
                }
            }
        }
        Ok(())
    }

    /// Descends into the newest child; on a dead end returns one level up
    /// and never further, regenerating choices there when they run out.
    fn dfs(&mut self, spec: &StrategySpec) -> Result<(), PolicyError> {
        let mut current = 0usize;
        let mut pending: Vec<TacticId> = Vec::new();
        let mut backtracked = false;
        while !self.done() {
            if pending.is_empty() {
                pending = self.choices(current, spec)?;
                pending.reverse();
            }
            let tactic = pending.pop().expect("at least one tactic is unmasked");
            if let Some(child) = self.apply(current, tactic)? {
                current = child;
                pending.clear();
                backtracked = false;
                continue;
            }
            if pending.is_empty() && !backtracked {
                if let Some(parent) = self.state.fringes[current].parent.as_ref().map(|p| p.fringe) {
                    current = parent;
                    backtracked = true;
                }
            }
        }
        Ok(())
    }
}

/// Runs one search on `theorem` with budget and fuel from `cfg`.
///
/// `Untrained` behaves like `Learned`; the caller supplies fresh parameters
/// (see [`untrained_params`]).
pub fn run_strategy(
    theorem: &Theorem,
    library: &Library,
    policy: &Policy,
    params: &ParamSet,
    spec: &StrategySpec,
    cfg: &EpisodeConfig,
    rng: &mut impl Rng,
) -> Result<SearchOutcome, PolicyError> {
    let mut search = Search {
        session: Session::new(policy, params),
        ctx: ProofContext {
            library,
            target_index: theorem.library_index,
        },
        cfg,
        tracker: DifficultyTracker::default(),
        name: &theorem.name,
        state: reset(main_goal(theorem)),
        rng,
    };
    match spec.kind {
        StrategyKind::Learned | StrategyKind::Untrained => search.learned()?,
        StrategyKind::LatestFringe => search.latest()?,
        StrategyKind::Bfs => search.bfs(spec)?,
        StrategyKind::Dfs => search.dfs(spec)?,
    }
    let state = search.state;
    let script = reconstruct_proof(&state, &theorem.name).ok();
    Ok(SearchOutcome {
        proved: script.is_some(),
        timesteps_used: state.timestep,
        proof_length: script.as_ref().map_or(0, |s| s.steps),
        script,
        final_state: state,
    })
}

/// A freshly initialized policy with the same layout as `policy`.
pub fn untrained_params(policy: &Policy, seed: u64) -> (Policy, ParamSet) {
    let mut params = ParamSet::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fresh = Policy::new(&mut params, policy.encoder.vocab.clone(), policy.config, &mut rng);
    (fresh, params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub strategy: String,
    pub attempted: usize,
    pub proved: usize,
    /// Means over proved theorems only.
    pub mean_timesteps: f64,
    pub mean_proof_length: f64,
    /// Per theorem: `(timesteps, proof length)` when proved.
    pub outcomes: Vec<Option<(usize, usize)>>,
}

impl AblationRow {
    /// Means restricted to theorems where `keep` holds and this row proved.
    pub fn means_over(&self, keep: impl Fn(usize) -> bool) -> (usize, f64, f64) {
        let hits: Vec<(usize, usize)> = self
            .outcomes
            .iter()
            .enumerate()
            .filter(|(k, _)| keep(*k))
            .filter_map(|(_, o)| *o)
            .collect();
        if hits.is_empty() {
            return (0, 0.0, 0.0);
        }
        let n = hits.len() as f64;
        let ts = hits.iter().map(|h| h.0 as f64).sum::<f64>() / n;
        let len = hits.iter().map(|h| h.1 as f64).sum::<f64>() / n;
        (hits.len(), ts, len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub rows: Vec<AblationRow>,
}

impl AblationReport {
    /// Plain-text table with aligned columns.
    pub fn table(&self) -> String {
        let head = ["strategy", "proved", "mean timesteps", "mean proof length"];
        let body: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.strategy.clone(),
                    format!("{}/{}", r.proved, r.attempted),
                    format!("{:.2}", r.mean_timesteps),
                    format!("{:.2}", r.mean_proof_length),
                ]
            })
            .collect();
        let mut widths = head.map(str::len);
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let mut line = |cells: [&str; 4]| {
            let mut s = format!("{:<w$}", cells[0], w = widths[0]);
            for (cell, w) in cells[1..].iter().zip(&widths[1..]) {
                s.push_str(&format!("  {cell:>w$}"));
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(head);
        for row in &body {
            line([&row[0], &row[1], &row[2], &row[3]]);
        }
        out
    }
}

/// Runs every spec over `theorems` with the same per-theorem seeds.
pub fn ablate(
    theorems: &[Arc<Theorem>],
    library: &Library,
    policy: &Policy,
    params: &ParamSet,
    specs: &[StrategySpec],
    cfg: &EpisodeConfig,
    seed: u64,
) -> Result<AblationReport, PolicyError> {
    let fresh = untrained_params(policy, seed);
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let (p, w) = match spec.kind {
            StrategyKind::Untrained => (&fresh.0, &fresh.1),
            _ => (policy, params),
        };
        let mut outcomes = Vec::with_capacity(theorems.len());
        for (k, thm) in theorems.iter().enumerate() {
            let mut rng = episode_rng(seed, usize::MAX >> 2, k);
            let out = run_strategy(thm, library, p, w, spec, cfg, &mut rng)?;
            outcomes.push(out.proved.then_some((out.timesteps_used, out.proof_length)));
        }
        let mut row = AblationRow {
            strategy: spec.to_string(),
            attempted: theorems.len(),
            proved: 0,
            mean_timesteps: 0.0,
            mean_proof_length: 0.0,
            outcomes,
        };
        (row.proved, row.mean_timesteps, row.mean_proof_length) = row.means_over(|_| true);
        rows.push(row);
    }
    Ok(AblationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_cap_matches_budget_fifty() {
        assert_eq!(bfs_depth_cap(50, 2), 5);
        assert_eq!(bfs_depth_cap(31, 2), 5);
        assert_eq!(bfs_depth_cap(30, 2), 4);
        assert_eq!(bfs_depth_cap(1, 2), 1);
        assert_eq!(bfs_depth_cap(50, 1), 50);
    }

    #[test]
    fn top_k_breaks_ties_low() {
        let p = [0.2, 0.3, 0.3, 0.2];
        let all = [true; 4];
        assert_eq!(top_k(&p, &all, 2), vec![1, 2]);
        assert_eq!(top_k(&p, &all, 3), vec![1, 2, 0]);
        assert_eq!(top_k(&p, &[true, false, true, true], 2), vec![2, 0]);
        assert_eq!(top_k(&p, &all, 9).len(), 4);
    }

    #[test]
    fn specs_round_trip_through_text() {
        for s in ["learned", "untrained", "latest", "bfs-topk-2", "dfs-stochastic-3"] {
            assert_eq!(s.parse::<StrategySpec>().unwrap().to_string(), s);
        }
        for s in ["bfs", "bfs-topk-0", "dfs-greedy-2", "x"] {
            assert!(s.parse::<StrategySpec>().is_err());
        }
    }
}
