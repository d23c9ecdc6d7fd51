//! Contextual boolean rewriting behind `simp`, `fs` and `rw`.
//!
//! Built-in rules all shrink the term. Lemma rewrites (`l <=> r` oriented
//! left to right) only fire when the instance is smaller in the
//! (size, structural) order, so rewriting always terminates; fuel bounds
//! the amount of work.

use super::fuel::{Fuel, OutOfFuel};
use super::matching::{instantiate, match_term};
use crate::kernel::{Goal, Term};

/// A left-to-right rewrite taken from an equivalence theorem.
#[derive(Debug, Clone)]
pub struct RewriteRule {
    lhs: Term,
    rhs: Term,
}

impl RewriteRule {
    /// Rules come only from `l <=> r` statements whose left side is not a
    /// bare variable and binds every variable of the right side.
    pub fn from_statement(statement: &Term) -> Option<RewriteRule> {
        let Term::Iff(lhs, rhs) = statement else {
            return None;
        };
        if matches!(**lhs, Term::Var(_)) {
            return None;
        }
        let lhs_vars = lhs.free_vars();
        if rhs.free_vars().iter().any(|v| !lhs_vars.contains(v)) {
            return None;
        }
        Some(RewriteRule {
            lhs: (**lhs).clone(),
            rhs: (**rhs).clone(),
        })
    }
}

/// Facts assumed true (or false) while rewriting a subterm.
#[derive(Debug, Default, Clone)]
pub struct Context {
    facts: Vec<(Term, bool)>,
}

impl Context {
    fn lookup(&self, t: &Term) -> Option<bool> {
        self.facts
            .iter()
            .rev()
            .find(|(fact, _)| fact == t)
            .map(|(_, value)| *value)
    }

    /// Records `t` as holding. Conjunctions are split; `~a` records `a` false.
    pub fn assume(&mut self, t: &Term) {
        match t {
            Term::True | Term::False => {}
            Term::And(a, b) => {
                self.assume(a);
                self.assume(b);
            }
            Term::Not(a) if !matches!(**a, Term::True | Term::False) => {
                self.facts.push(((**a).clone(), false));
            }
            _ => self.facts.push((t.clone(), true)),
        }
    }

    fn len(&self) -> usize {
        self.facts.len()
    }

    fn truncate(&mut self, len: usize) {
        self.facts.truncate(len);
    }
}

fn is_negation_of(a: &Term, b: &Term) -> bool {
    matches!(a, Term::Not(inner) if **inner == *b) || matches!(b, Term::Not(inner) if **inner == *a)
}

/// One built-in rewrite at the root, if any applies.
fn builtin_step(t: &Term) -> Option<Term> {
    use Term::*;
    match t {
        Not(a) => match &**a {
            True => Some(False),
            False => Some(True),
            Not(inner) => Some((**inner).clone()),
            _ => None,
        },
        And(a, b) => match (&**a, &**b) {
            (False, _) | (_, False) => Some(False),
            (True, x) | (x, True) => Some(x.clone()),
            (x, y) if x == y => Some(x.clone()),
            (x, y) if is_negation_of(x, y) => Some(False),
            _ => None,
        },
        Or(a, b) => match (&**a, &**b) {
            (True, _) | (_, True) => Some(True),
            (False, x) | (x, False) => Some(x.clone()),
            (x, y) if x == y => Some(x.clone()),
            (x, y) if is_negation_of(x, y) => Some(True),
            _ => None,
        },
        Imp(a, b) => match (&**a, &**b) {
            (True, x) => Some(x.clone()),
            (False, _) | (_, True) => Some(True),
            (x, False) => Some(Term::not(x.clone())),
            (x, y) if x == y => Some(True),
            _ => None,
        },
        Iff(a, b) => match (&**a, &**b) {
            (x, y) if x == y => Some(True),
            (True, x) | (x, True) => Some(x.clone()),
            (False, x) | (x, False) => Some(Term::not(x.clone())),
            _ => None,
        },
        _ => None,
    }
}

fn ordered_smaller(candidate: &Term, original: &Term) -> bool {
    let (cs, os) = (candidate.size(), original.size());
    cs < os || (cs == os && candidate < original)
}

pub struct Rewriter<'a> {
    rules: &'a [RewriteRule],
    fuel: &'a mut Fuel,
}

impl<'a> Rewriter<'a> {
    pub fn new(rules: &'a [RewriteRule], fuel: &'a mut Fuel) -> Self {
        Rewriter { rules, fuel }
    }

    fn root_step(&mut self, t: &Term, ctx: &Context) -> Result<Option<Term>, OutOfFuel> {
        if let Some(value) = ctx.lookup(t) {
            return Ok(Some(Term::constant(value)));
        }
        if let Some(next) = builtin_step(t) {
            return Ok(Some(next));
        }
        for rule in self.rules {
            if let Some(bindings) = match_term(&rule.lhs, t) {
                self.fuel.burn(1)?;
                let next = instantiate(&rule.rhs, &bindings);
                if ordered_smaller(&next, t) {
                    return Ok(Some(next));
                }
            }
        }
        Ok(None)
    }

    /// Rewrites `t` to normal form under `ctx`.
    pub fn normalize(&mut self, t: &Term, ctx: &mut Context) -> Result<Term, OutOfFuel> {
        self.fuel.burn(1)?;
        if let Some(value) = ctx.lookup(t) {
            return Ok(Term::constant(value));
        }
        let rebuilt = match t {
            Term::Var(_) | Term::True | Term::False => t.clone(),
            Term::Not(a) => Term::not(self.normalize(a, ctx)?),
            Term::Imp(a, b) => {
                let a = self.normalize(a, ctx)?;
                let mark = ctx.len();
                ctx.assume(&a);
                let b = self.normalize(b, ctx);
                ctx.truncate(mark);
                Term::imp(a, b?)
            }
            _ => {
                let (op, a, b) = t.as_binary().expect("binary node");
                op.apply(self.normalize(a, ctx)?, self.normalize(b, ctx)?)
            }
        };
        match self.root_step(&rebuilt, ctx)? {
            Some(next) => self.normalize(&next, ctx),
            None => Ok(rebuilt),
        }
    }
}

/// Which parts of the goal a simplification pass touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpMode {
    /// Assumptions normalized on their own; conclusion under all assumptions.
    Simp,
    /// Each assumption under the others, then the conclusion under all.
    Fs,
    /// Conclusion only, with no assumption context.
    Rw,
}

pub enum SimpResult {
    Proved,
    Reduced(Goal),
}

pub fn simplify_goal(
    goal: &Goal,
    mode: SimpMode,
    rules: &[RewriteRule],
    fuel: &mut Fuel,
) -> Result<SimpResult, OutOfFuel> {
    let mut rw = Rewriter::new(rules, fuel);
    let mut assumptions: Vec<Term> = goal.assumptions().to_vec();
    match mode {
        SimpMode::Rw => {}
        SimpMode::Simp => {
            for a in assumptions.iter_mut() {
                *a = rw.normalize(a, &mut Context::default())?;
            }
        }
        SimpMode::Fs => {
            for i in 0..assumptions.len() {
                let mut ctx = Context::default();
                for (j, other) in assumptions.iter().enumerate() {
                    if j != i {
                        ctx.assume(other);
                    }
                }
                assumptions[i] = rw.normalize(&assumptions[i], &mut ctx)?;
            }
        }
    }
    if assumptions.iter().any(|a| *a == Term::False) {
        return Ok(SimpResult::Proved);
    }
    assumptions.retain(|a| *a != Term::True);
    let mut ctx = Context::default();
    if mode != SimpMode::Rw {
        for a in &assumptions {
            ctx.assume(a);
        }
    }
    let conclusion = rw.normalize(goal.conclusion(), &mut ctx)?;
    if conclusion == Term::True {
        return Ok(SimpResult::Proved);
    }
    Ok(SimpResult::Reduced(Goal::new(assumptions, conclusion)))
}
