//! The tactic engine.
//!
//! Each tactic maps a goal (plus arguments) to a [`TacticOutcome`]. Work is
//! bounded by a deterministic [`Fuel`] budget.

mod clausal;
mod fuel;
mod matching;
mod premises;
mod rewrite;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::kernel::{Goal, Term, Theorem};

pub use fuel::{Fuel, OutOfFuel};
pub use matching::{instantiate, match_term, Bindings};
pub use premises::{candidate_arguments, Library, TheoryScope};
pub use rewrite::{simplify_goal, Context, RewriteRule, Rewriter, SimpMode, SimpResult};

/// Default work budget for one tactic application.
pub const DEFAULT_FUEL: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TacticId {
    StripTac,
    EqTac,
    CaseOn,
    Simp,
    Fs,
    Rw,
    Metis,
    Drule,
    Irule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArgKind {
    None,
    SingleTerm,
    SingleTheorem,
    TheoremList,
}

impl TacticId {
    /// The tactic table, in index order.
    pub const ALL: [TacticId; 9] = [
        TacticId::StripTac,
        TacticId::EqTac,
        TacticId::CaseOn,
        TacticId::Simp,
        TacticId::Fs,
        TacticId::Rw,
        TacticId::Metis,
        TacticId::Drule,
        TacticId::Irule,
    ];

    pub const COUNT: usize = Self::ALL.len();

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<TacticId> {
        Self::ALL.get(i).copied()
    }

    pub fn arg_kind(self) -> ArgKind {
        match self {
            TacticId::StripTac | TacticId::EqTac => ArgKind::None,
            TacticId::CaseOn => ArgKind::SingleTerm,
            TacticId::Drule | TacticId::Irule => ArgKind::SingleTheorem,
            TacticId::Simp | TacticId::Fs | TacticId::Rw | TacticId::Metis => ArgKind::TheoremList,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TacticId::StripTac => "strip_tac",
            TacticId::EqTac => "eq_tac",
            TacticId::CaseOn => "case_on",
            TacticId::Simp => "simp",
            TacticId::Fs => "fs",
            TacticId::Rw => "rw",
            TacticId::Metis => "metis_tac",
            TacticId::Drule => "drule",
            TacticId::Irule => "irule",
        }
    }

    pub fn from_name(name: &str) -> Option<TacticId> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for TacticId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A tactic argument: a term or a library theorem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TacticArg {
    Term(Term),
    Theorem(Arc<Theorem>),
}

impl TacticArg {
    pub fn is_term(&self) -> bool {
        matches!(self, TacticArg::Term(_))
    }
}

impl fmt::Display for TacticArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TacticArg::Term(t) => write!(f, "{t}"),
            TacticArg::Theorem(thm) => f.write_str(&thm.name),
        }
    }
}

/// Result of applying one tactic to one goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TacticOutcome {
    /// Proving every listed goal proves the input; empty means proved.
    Subgoals(Vec<Goal>),
    NoChange,
    Failed(String),
    FuelExhausted,
}

impl TacticOutcome {
    fn from_goals(goals: Vec<Goal>, input: &Goal) -> TacticOutcome {
        let goals = dedup_goals(goals);
        if goals.len() == 1 && goals[0] == *input {
            TacticOutcome::NoChange
        } else {
            TacticOutcome::Subgoals(goals)
        }
    }
}

fn dedup_goals(goals: Vec<Goal>) -> Vec<Goal> {
    let mut out: Vec<Goal> = Vec::with_capacity(goals.len());
    for g in goals {
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// Checks that `args` conform to the tactic's argument kind.
pub fn args_conform(tactic: TacticId, args: &[TacticArg]) -> bool {
    match tactic.arg_kind() {
        ArgKind::None => args.is_empty(),
        ArgKind::SingleTerm => args.len() == 1 && args[0].is_term(),
        ArgKind::SingleTheorem => args.len() == 1 && !args[0].is_term(),
        ArgKind::TheoremList => args.iter().all(|a| !a.is_term()),
    }
}

fn theorems(args: &[TacticArg]) -> impl Iterator<Item = &Theorem> {
    args.iter().filter_map(|a| match a {
        TacticArg::Theorem(t) => Some(&**t),
        TacticArg::Term(_) => None,
    })
}

/// Applies `tactic` to `goal`. Deterministic; more fuel never changes a
/// successful result.
pub fn apply_tactic(goal: &Goal, tactic: TacticId, args: &[TacticArg], fuel: usize) -> TacticOutcome {
    if !args_conform(tactic, args) {
        return TacticOutcome::Failed(format!("{tactic}: argument kind mismatch"));
    }
    let mut fuel = Fuel::new(fuel);
    let result = match tactic {
        TacticId::StripTac => strip(goal, &mut fuel),
        TacticId::EqTac => Ok(eq_tac(goal)),
        TacticId::CaseOn => Ok(case_on(goal, &args[0])),
        TacticId::Simp => simp_family(goal, SimpMode::Simp, args, &mut fuel),
        TacticId::Fs => simp_family(goal, SimpMode::Fs, args, &mut fuel),
        TacticId::Rw => simp_family(goal, SimpMode::Rw, args, &mut fuel),
        TacticId::Metis => metis(goal, args, &mut fuel),
        TacticId::Drule => Ok(drule(goal, &args[0])),
        TacticId::Irule => Ok(irule(goal, &args[0])),
    };
    result.unwrap_or(TacticOutcome::FuelExhausted)
}

fn closed_by_assumption(g: &Goal) -> bool {
    let c = g.conclusion();
    *c == Term::True || g.has_assumption(c) || g.has_assumption(&Term::False)
}

/// Pushes conjuncts of an antecedent, dropping `T`.
fn split_antecedent(t: &Term, into: &mut Vec<Term>) {
    match t {
        Term::And(a, b) => {
            split_antecedent(a, into);
            split_antecedent(b, into);
        }
        Term::True => {}
        _ => into.push(t.clone()),
    }
}

/// `rpt strip_tac`: discharge antecedents into the assumptions, split
/// conjunctive conclusions and turn `~a` into `a ==> F`. A goal whose
/// conclusion is `T` or an assumption is closed outright; goals produced by
/// stripping are only closed when `F` reaches the assumptions.
fn strip(goal: &Goal, fuel: &mut Fuel) -> Result<TacticOutcome, OutOfFuel> {
    fn go(g: Goal, fuel: &mut Fuel, out: &mut Vec<Goal>, changed: &mut bool) -> Result<(), OutOfFuel> {
        fuel.burn(1)?;
        if g.has_assumption(&Term::False) {
            *changed = true;
            return Ok(());
        }
        match g.conclusion() {
            Term::Imp(a, b) => {
                let mut hyps = g.assumptions().to_vec();
                split_antecedent(a, &mut hyps);
                *changed = true;
                go(Goal::new(hyps, (**b).clone()), fuel, out, changed)
            }
            Term::Not(a) if !matches!(**a, Term::True | Term::False) => {
                let mut hyps = g.assumptions().to_vec();
                split_antecedent(a, &mut hyps);
                *changed = true;
                go(Goal::new(hyps, Term::False), fuel, out, changed)
            }
            Term::And(a, b) => {
                *changed = true;
                let left = Goal::new(g.assumptions().to_vec(), (**a).clone());
                let right = Goal::new(g.assumptions().to_vec(), (**b).clone());
                go(left, fuel, out, changed)?;
                go(right, fuel, out, changed)
            }
            _ => {
                out.push(g);
                Ok(())
            }
        }
    }
    if closed_by_assumption(goal) {
        return Ok(TacticOutcome::Subgoals(Vec::new()));
    }
    let mut out = Vec::new();
    let mut changed = false;
    go(goal.clone(), fuel, &mut out, &mut changed)?;
    if !changed {
        return Ok(TacticOutcome::NoChange);
    }
    Ok(TacticOutcome::from_goals(out, goal))
}

fn eq_tac(goal: &Goal) -> TacticOutcome {
    match goal.conclusion() {
        Term::Iff(a, b) => {
            let hyps = goal.assumptions().to_vec();
            let forward = Goal::new(hyps.clone(), Term::imp((**a).clone(), (**b).clone()));
            let backward = Goal::new(hyps, Term::imp((**b).clone(), (**a).clone()));
            TacticOutcome::from_goals(vec![forward, backward], goal)
        }
        _ => TacticOutcome::Failed("eq_tac: conclusion is not an equivalence".into()),
    }
}

fn case_on(goal: &Goal, arg: &TacticArg) -> TacticOutcome {
    let TacticArg::Term(Term::Var(v)) = arg else {
        return TacticOutcome::Failed("case_on: argument must be a variable".into());
    };
    if !goal.contains_var(v) {
        return TacticOutcome::Failed(format!("case_on: {v} does not occur in the goal"));
    }
    let cases = vec![goal.subst_var(v, &Term::True), goal.subst_var(v, &Term::False)];
    TacticOutcome::from_goals(cases, goal)
}

fn simp_family(
    goal: &Goal,
    mode: SimpMode,
    args: &[TacticArg],
    fuel: &mut Fuel,
) -> Result<TacticOutcome, OutOfFuel> {
    let rules: Vec<RewriteRule> = theorems(args)
        .filter_map(|t| RewriteRule::from_statement(&t.statement))
        .collect();
    Ok(match simplify_goal(goal, mode, &rules, fuel)? {
        SimpResult::Proved => TacticOutcome::Subgoals(Vec::new()),
        SimpResult::Reduced(g) if g == *goal => TacticOutcome::NoChange,
        SimpResult::Reduced(g) => TacticOutcome::Subgoals(vec![g]),
    })
}

fn metis(goal: &Goal, args: &[TacticArg], fuel: &mut Fuel) -> Result<TacticOutcome, OutOfFuel> {
    let mut hyps: Vec<Term> = theorems(args).map(|t| t.statement.clone()).collect();
    hyps.extend(goal.assumptions().iter().cloned());
    Ok(if clausal::entails(&hyps, goal.conclusion(), fuel)? {
        TacticOutcome::Subgoals(Vec::new())
    } else {
        TacticOutcome::Failed("metis_tac: goal is not valid".into())
    })
}

fn as_rule(arg: &TacticArg) -> Option<&Term> {
    match arg {
        TacticArg::Theorem(t) => Some(&t.statement),
        TacticArg::Term(_) => None,
    }
}

fn drule(goal: &Goal, arg: &TacticArg) -> TacticOutcome {
    let Some(Term::Imp(antecedent, consequent)) = as_rule(arg) else {
        return TacticOutcome::Failed("drule: theorem is not an implication".into());
    };
    for hyp in goal.assumptions() {
        if let Some(bindings) = match_term(antecedent, hyp) {
            let derived = instantiate(consequent, &bindings);
            if goal.has_assumption(&derived) {
                return TacticOutcome::NoChange;
            }
            let mut hyps = goal.assumptions().to_vec();
            hyps.push(derived);
            return TacticOutcome::from_goals(vec![Goal::new(hyps, goal.conclusion().clone())], goal);
        }
    }
    TacticOutcome::Failed("drule: no assumption matches the antecedent".into())
}

fn irule(goal: &Goal, arg: &TacticArg) -> TacticOutcome {
    let Some(statement) = as_rule(arg) else {
        return TacticOutcome::Failed("irule: expected a theorem".into());
    };
    if let Term::Imp(antecedent, consequent) = statement {
        if let Some(bindings) = match_term(consequent, goal.conclusion()) {
            let premise = instantiate(antecedent, &bindings);
            let next = Goal::new(goal.assumptions().to_vec(), premise);
            return TacticOutcome::from_goals(vec![next], goal);
        }
    }
    if match_term(statement, goal.conclusion()).is_some() {
        return TacticOutcome::Subgoals(Vec::new());
    }
    TacticOutcome::Failed("irule: conclusion does not match".into())
}
