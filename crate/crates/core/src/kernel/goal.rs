use std::fmt;

use serde::{Deserialize, Serialize};

use super::parse::{parse_term, ParseError};
use super::term::Term;

/// A sequent `assumptions |- conclusion`.
///
/// Assumptions are kept sorted and deduplicated, so the derived equality and
/// hashing treat them as a set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Goal {
    assumptions: Vec<Term>,
    conclusion: Term,
}

impl Goal {
    pub fn new(assumptions: impl IntoIterator<Item = Term>, conclusion: Term) -> Goal {
        let mut assumptions: Vec<Term> = assumptions.into_iter().collect();
        assumptions.sort();
        assumptions.dedup();
        Goal {
            assumptions,
            conclusion,
        }
    }

    pub fn from_term(conclusion: Term) -> Goal {
        Goal {
            assumptions: Vec::new(),
            conclusion,
        }
    }

    pub fn assumptions(&self) -> &[Term] {
        &self.assumptions
    }

    pub fn conclusion(&self) -> &Term {
        &self.conclusion
    }

    pub fn has_assumption(&self, t: &Term) -> bool {
        self.assumptions.binary_search(t).is_ok()
    }

    /// Variables of the assumptions then the conclusion, first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        for a in &self.assumptions {
            a.collect_vars(&mut out);
        }
        self.conclusion.collect_vars(&mut out);
        out
    }

    pub fn contains_var(&self, name: &str) -> bool {
        self.conclusion.contains_var(name) || self.assumptions.iter().any(|a| a.contains_var(name))
    }

    pub fn subst_var(&self, var: &str, value: &Term) -> Goal {
        Goal::new(
            self.assumptions.iter().map(|a| a.subst_var(var, value)),
            self.conclusion.subst_var(var, value),
        )
    }

    /// The chained-implication form `a1 ==> a2 ==> ... ==> c`, with the
    /// assumptions ordered by their printed form.
    pub fn to_implication(&self) -> Term {
        let mut printed: Vec<(String, &Term)> =
            self.assumptions.iter().map(|a| (a.to_string(), a)).collect();
        printed.sort_by(|x, y| x.0.cmp(&y.0));
        printed
            .into_iter()
            .rev()
            .fold(self.conclusion.clone(), |acc, (_, a)| Term::imp(a.clone(), acc))
    }

    /// The formula `(a1 /\ ... /\ an) ==> c` whose validity is the goal's.
    pub fn as_formula(&self) -> Term {
        match self.assumptions.split_last() {
            None => self.conclusion.clone(),
            Some((last, rest)) => {
                let hyp = rest
                    .iter()
                    .rev()
                    .fold(last.clone(), |acc, a| Term::and(a.clone(), acc));
                Term::imp(hyp, self.conclusion.clone())
            }
        }
    }

    pub fn size(&self) -> usize {
        self.conclusion.size() + self.assumptions.iter().map(Term::size).sum::<usize>()
    }

    /// Parses `a1, a2 |- c` or a bare conclusion `c`.
    pub fn parse(text: &str) -> Result<Goal, ParseError> {
        match text.find("|-") {
            None => Ok(Goal::from_term(parse_term(text)?)),
            Some(split) => {
                let (lhs, rhs) = (&text[..split], &text[split + 2..]);
                let conclusion = parse_term(rhs).map_err(|mut e| {
                    e.offset += split + 2;
                    e
                })?;
                let mut assumptions = Vec::new();
                let mut base = 0;
                for piece in lhs.split(',') {
                    if !piece.trim().is_empty() {
                        let t = parse_term(piece).map_err(|mut e| {
                            e.offset += base;
                            e
                        })?;
                        assumptions.push(t);
                    }
                    base += piece.len() + 1;
                }
                Ok(Goal::new(assumptions, conclusion))
            }
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.assumptions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        if !self.assumptions.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "|- {}", self.conclusion)
    }
}

/// A named library theorem.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem {
    pub name: String,
    pub statement: Term,
    pub theory: String,
    pub library_index: usize,
}
