//! Propositional pattern matching: pattern variables bind whole subterms.

use crate::kernel::Term;

pub type Bindings = Vec<(String, Term)>;

pub fn match_term(pattern: &Term, target: &Term) -> Option<Bindings> {
    let mut bindings = Vec::new();
    if match_into(pattern, target, &mut bindings) {
        Some(bindings)
    } else {
        None
    }
}

fn match_into(pattern: &Term, target: &Term, bindings: &mut Bindings) -> bool {
    match pattern {
        Term::Var(v) => match bindings.iter().find(|(name, _)| name == v) {
            Some((_, bound)) => bound == target,
            None => {
                bindings.push((v.clone(), target.clone()));
                true
            }
        },
        Term::True | Term::False => pattern == target,
        Term::Not(p) => match target {
            Term::Not(t) => match_into(p, t, bindings),
            _ => false,
        },
        _ => {
            let (op, pa, pb) = pattern.as_binary().expect("binary node");
            match target.as_binary() {
                Some((top, ta, tb)) if top == op => {
                    match_into(pa, ta, bindings) && match_into(pb, tb, bindings)
                }
                _ => false,
            }
        }
    }
}

/// Applies bindings simultaneously; unbound variables are left in place.
pub fn instantiate(t: &Term, bindings: &Bindings) -> Term {
    match t {
        Term::Var(v) => bindings
            .iter()
            .find(|(name, _)| name == v)
            .map(|(_, value)| value.clone())
            .unwrap_or_else(|| t.clone()),
        Term::True | Term::False => t.clone(),
        Term::Not(a) => Term::not(instantiate(a, bindings)),
        _ => {
            let (op, a, b) = t.as_binary().expect("binary node");
            op.apply(instantiate(a, bindings), instantiate(b, bindings))
        }
    }
}
