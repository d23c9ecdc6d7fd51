//! Exhaustive truth-table oracle.

use super::goal::Goal;
use super::term::Term;

/// Largest number of distinct variables the oracle will enumerate.
pub const VARIABLE_BUDGET: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("goal has {found} distinct variables, oracle budget is {budget}")]
pub struct VariableBudgetExceeded {
    pub found: usize,
    pub budget: usize,
}

/// Term with variables replaced by dense indices, for fast evaluation.
enum Compiled {
    Var(usize),
    Const(bool),
    Not(Box<Compiled>),
    Bin(super::term::BinOp, Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    fn build(t: &Term, vars: &[String]) -> Compiled {
        match t {
            Term::Var(v) => Compiled::Var(vars.iter().position(|x| x == v).expect("collected")),
            Term::True => Compiled::Const(true),
            Term::False => Compiled::Const(false),
            Term::Not(a) => Compiled::Not(Box::new(Compiled::build(a, vars))),
            _ => {
                let (op, a, b) = t.as_binary().expect("binary node");
                Compiled::Bin(
                    op,
                    Box::new(Compiled::build(a, vars)),
                    Box::new(Compiled::build(b, vars)),
                )
            }
        }
    }

    fn eval(&self, bits: u32) -> bool {
        match self {
            Compiled::Var(i) => bits >> i & 1 == 1,
            Compiled::Const(c) => *c,
            Compiled::Not(a) => !a.eval(bits),
            Compiled::Bin(op, a, b) => op.eval(a.eval(bits), b.eval(bits)),
        }
    }
}

/// True iff the term holds under every assignment.
pub fn term_is_tautology(t: &Term) -> Result<bool, VariableBudgetExceeded> {
    let vars = t.free_vars();
    if vars.len() > VARIABLE_BUDGET {
        return Err(VariableBudgetExceeded {
            found: vars.len(),
            budget: VARIABLE_BUDGET,
        });
    }
    let compiled = Compiled::build(t, &vars);
    let total: u64 = 1 << vars.len();
    Ok((0..total).all(|bits| compiled.eval(bits as u32)))
}

/// True iff the conjunction of the assumptions implies the conclusion under
/// every assignment.
pub fn is_tautology(g: &Goal) -> Result<bool, VariableBudgetExceeded> {
    term_is_tautology(&g.as_formula())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_term;

    fn goal(s: &str) -> Goal {
        Goal::parse(s).unwrap()
    }

    #[test]
    fn examples() {
        assert!(is_tautology(&goal("p ==> q ==> p")).unwrap());
        assert!(!is_tautology(&goal("p ==> q")).unwrap());
        assert!(is_tautology(&goal("F ==> q ==> F")).unwrap());
        assert!(is_tautology(&goal("p, q |- p /\\ q")).unwrap());
        assert!(!is_tautology(&goal("p \\/ q |- p")).unwrap());
    }

    #[test]
    fn budget_enforced() {
        let big = (0..25)
            .map(|i| Term::var(format!("v{i}")))
            .reduce(Term::or)
            .unwrap();
        let err = term_is_tautology(&big).unwrap_err();
        assert_eq!(err.found, 25);
        let ok = parse_term("p \\/ ~p").unwrap();
        assert!(term_is_tautology(&ok).unwrap());
    }
}
