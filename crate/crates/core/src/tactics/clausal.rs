//! Clausal refutation behind `metis_tac`.
//!
//! Hypotheses and the negated conclusion are put into conjunctive normal
//! form by naive distribution, then refuted by DPLL with unit propagation.
//! Fuel is charged per NNF node, per literal of every clause produced and
//! per clause scanned at each search node, so iff-heavy or deeply nested
//! goals exhaust quickly while small goals are decided completely.

use std::collections::HashMap;

use super::fuel::{Fuel, OutOfFuel};
use crate::kernel::Term;

type Lit = (u32, bool);
type Clause = Vec<Lit>;

enum Nnf {
    Const(bool),
    Lit(Lit),
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
}

struct Builder<'f> {
    fuel: &'f mut Fuel,
    vars: HashMap<String, u32>,
}

impl Builder<'_> {
    fn var(&mut self, name: &str) -> u32 {
        let next = self.vars.len() as u32;
        *self.vars.entry(name.to_string()).or_insert(next)
    }

    /// Negation normal form of `t` (of `~t` when `positive` is false).
    fn nnf(&mut self, t: &Term, positive: bool) -> Result<Nnf, OutOfFuel> {
        self.fuel.burn(1)?;
        Ok(match t {
            Term::True => Nnf::Const(positive),
            Term::False => Nnf::Const(!positive),
            Term::Var(v) => Nnf::Lit((self.var(v), positive)),
            Term::Not(a) => self.nnf(a, !positive)?,
            Term::And(a, b) if positive => Nnf::And(vec![self.nnf(a, true)?, self.nnf(b, true)?]),
            Term::And(a, b) => Nnf::Or(vec![self.nnf(a, false)?, self.nnf(b, false)?]),
            Term::Or(a, b) if positive => Nnf::Or(vec![self.nnf(a, true)?, self.nnf(b, true)?]),
            Term::Or(a, b) => Nnf::And(vec![self.nnf(a, false)?, self.nnf(b, false)?]),
            Term::Imp(a, b) if positive => Nnf::Or(vec![self.nnf(a, false)?, self.nnf(b, true)?]),
            Term::Imp(a, b) => Nnf::And(vec![self.nnf(a, true)?, self.nnf(b, false)?]),
            Term::Iff(a, b) => {
                // a <=> b  ~>  (~a \/ b) /\ (a \/ ~b);  ~(a <=> b)  ~>  (a \/ b) /\ (~a \/ ~b)
                let (pa, pb) = if positive { (false, true) } else { (true, true) };
                let left = Nnf::Or(vec![self.nnf(a, pa)?, self.nnf(b, pb)?]);
                let right = Nnf::Or(vec![self.nnf(a, !pa)?, self.nnf(b, !pb)?]);
                Nnf::And(vec![left, right])
            }
        })
    }

    /// Clause set of an NNF formula; tautological clauses are dropped.
    fn cnf(&mut self, f: &Nnf) -> Result<Vec<Clause>, OutOfFuel> {
        match f {
            Nnf::Const(true) => Ok(Vec::new()),
            Nnf::Const(false) => {
                self.fuel.burn(1)?;
                Ok(vec![Vec::new()])
            }
            Nnf::Lit(l) => {
                self.fuel.burn(1)?;
                Ok(vec![vec![*l]])
            }
            Nnf::And(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(self.cnf(p)?);
                }
                Ok(out)
            }
            Nnf::Or(parts) => {
                let mut acc: Vec<Clause> = vec![Vec::new()];
                for p in parts {
                    let rhs = self.cnf(p)?;
                    let mut next = Vec::with_capacity(acc.len() * rhs.len());
                    for a in &acc {
                        for b in &rhs {
                            self.fuel.burn(1 + a.len() + b.len())?;
                            if let Some(c) = merge(a, b) {
                                next.push(c);
                            }
                        }
                    }
                    acc = next;
                }
                Ok(acc)
            }
        }
    }
}

/// Disjunction of two clauses; `None` when it contains `x` and `~x`.
fn merge(a: &Clause, b: &Clause) -> Option<Clause> {
    let mut c = a.clone();
    for l in b {
        if c.contains(&(l.0, !l.1)) {
            return None;
        }
        if !c.contains(l) {
            c.push(*l);
        }
    }
    Some(c)
}

fn assign(clauses: &[Clause], lit: Lit) -> Vec<Clause> {
    clauses
        .iter()
        .filter(|c| !c.contains(&lit))
        .map(|c| c.iter().copied().filter(|l| *l != (lit.0, !lit.1)).collect())
        .collect()
}

fn satisfiable(mut clauses: Vec<Clause>, fuel: &mut Fuel) -> Result<bool, OutOfFuel> {
    loop {
        fuel.burn(1 + clauses.len())?;
        if clauses.is_empty() {
            return Ok(true);
        }
        if clauses.iter().any(Vec::is_empty) {
            return Ok(false);
        }
        match clauses.iter().find(|c| c.len() == 1) {
            Some(unit) => {
                let lit = unit[0];
                clauses = assign(&clauses, lit);
            }
            None => break,
        }
    }
    let lit = clauses[0][0];
    Ok(satisfiable(assign(&clauses, lit), fuel)? || satisfiable(assign(&clauses, (lit.0, !lit.1)), fuel)?)
}

/// Decides whether `hyps` entail `conclusion`.
pub fn entails(hyps: &[Term], conclusion: &Term, fuel: &mut Fuel) -> Result<bool, OutOfFuel> {
    let mut b = Builder {
        fuel,
        vars: HashMap::new(),
    };
    let mut clauses = Vec::new();
    for h in hyps {
        let f = b.nnf(h, true)?;
        clauses.extend(b.cnf(&f)?);
    }
    let f = b.nnf(conclusion, false)?;
    clauses.extend(b.cnf(&f)?);
    Ok(!satisfiable(clauses, b.fuel)?)
}
