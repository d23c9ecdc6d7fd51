use super::{BinOp, Term};

const OPS: [BinOp; 4] = [BinOp::And, BinOp::Or, BinOp::Imp, BinOp::Iff];

/// Every term over `vars` and the constants with [`Term::depth`] at most
/// `max_depth`, shallowest first.
pub fn enumerate_terms(vars: &[&str], max_depth: usize) -> Vec<Term> {
    if max_depth == 0 {
        return Vec::new();
    }
    let mut all: Vec<Term> = vars.iter().map(|v| Term::var(*v)).collect();
    all.extend([Term::True, Term::False]);
    for _ in 1..max_depth {
        let prev = all.len();
        let mut next: Vec<Term> = Vec::new();
        // a term is new at this level iff some child was new at the last one
        let fresh_from = all.iter().position(|t| t.depth() == all[prev - 1].depth()).unwrap_or(0);
        for (i, a) in all.iter().enumerate() {
            if i >= fresh_from {
                next.push(Term::not(a.clone()));
            }
        }
        for op in OPS {
            for (i, a) in all.iter().enumerate() {
                for (j, b) in all.iter().enumerate() {
                    if i >= fresh_from || j >= fresh_from {
                        next.push(op.apply(a.clone(), b.clone()));
                    }
                }
            }
        }
        all.extend(next);
    }
    all
}
