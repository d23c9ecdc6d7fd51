use std::fmt;

use serde::{Deserialize, Serialize};

/// A propositional formula.
///
/// Structural equality is the identity used everywhere; there are no
/// binders so no alpha-equivalence is needed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    True,
    False,
    Not(Box<Term>),
    And(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    Imp(Box<Term>, Box<Term>),
    Iff(Box<Term>, Box<Term>),
}

/// Binary connectives, used by code that treats the four of them uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Imp,
    Iff,
}

impl BinOp {
    pub const ALL: [BinOp; 4] = [BinOp::And, BinOp::Or, BinOp::Imp, BinOp::Iff];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "/\\",
            BinOp::Or => "\\/",
            BinOp::Imp => "==>",
            BinOp::Iff => "<=>",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Iff => 1,
            BinOp::Imp => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
        }
    }

    pub fn apply(self, lhs: Term, rhs: Term) -> Term {
        match self {
            BinOp::And => Term::and(lhs, rhs),
            BinOp::Or => Term::or(lhs, rhs),
            BinOp::Imp => Term::imp(lhs, rhs),
            BinOp::Iff => Term::iff(lhs, rhs),
        }
    }

    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            BinOp::And => a && b,
            BinOp::Or => a || b,
            BinOp::Imp => !a || b,
            BinOp::Iff => a == b,
        }
    }
}

const NOT_PRECEDENCE: u8 = 5;
const ATOM_PRECEDENCE: u8 = 6;

/// Returns true if `name` is a legal variable identifier: `[a-z][a-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Term {
    /// Builds a variable. Panics on an illegal identifier; use the parser for
    /// untrusted input.
    pub fn var(name: impl Into<String>) -> Term {
        let name = name.into();
        assert!(is_identifier(&name), "illegal variable name {name:?}");
        Term::Var(name)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        Term::Not(Box::new(t))
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Term, b: Term) -> Term {
        Term::Imp(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Term, b: Term) -> Term {
        Term::Iff(Box::new(a), Box::new(b))
    }

    pub fn constant(value: bool) -> Term {
        if value {
            Term::True
        } else {
            Term::False
        }
    }

    /// Splits a binary node into its connective and children.
    pub fn as_binary(&self) -> Option<(BinOp, &Term, &Term)> {
        match self {
            Term::And(a, b) => Some((BinOp::And, a, b)),
            Term::Or(a, b) => Some((BinOp::Or, a, b)),
            Term::Imp(a, b) => Some((BinOp::Imp, a, b)),
            Term::Iff(a, b) => Some((BinOp::Iff, a, b)),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<bool> {
        match self {
            Term::True => Some(true),
            Term::False => Some(false),
            _ => None,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::True | Term::False => 1,
            Term::Not(a) => 1 + a.size(),
            Term::And(a, b) | Term::Or(a, b) | Term::Imp(a, b) | Term::Iff(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Height of the tree, counting a leaf as 1.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::True | Term::False => 1,
            Term::Not(a) => 1 + a.depth(),
            Term::And(a, b) | Term::Or(a, b) | Term::Imp(a, b) | Term::Iff(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Variables in left-to-right first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.iter().any(|seen| seen == v) {
                    out.push(v.clone());
                }
            }
            Term::True | Term::False => {}
            Term::Not(a) => a.collect_vars(out),
            Term::And(a, b) | Term::Or(a, b) | Term::Imp(a, b) | Term::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(v) => v == name,
            Term::True | Term::False => false,
            Term::Not(a) => a.contains_var(name),
            Term::And(a, b) | Term::Or(a, b) | Term::Imp(a, b) | Term::Iff(a, b) => {
                a.contains_var(name) || b.contains_var(name)
            }
        }
    }

    /// Replaces every occurrence of `Var(var)` by `value`.
    pub fn subst_var(&self, var: &str, value: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => value.clone(),
            Term::Var(_) | Term::True | Term::False => self.clone(),
            Term::Not(a) => Term::not(a.subst_var(var, value)),
            Term::And(a, b) => Term::and(a.subst_var(var, value), b.subst_var(var, value)),
            Term::Or(a, b) => Term::or(a.subst_var(var, value), b.subst_var(var, value)),
            Term::Imp(a, b) => Term::imp(a.subst_var(var, value), b.subst_var(var, value)),
            Term::Iff(a, b) => Term::iff(a.subst_var(var, value), b.subst_var(var, value)),
        }
    }

    /// Evaluates under an assignment given as a lookup function.
    pub fn eval_with(&self, lookup: &impl Fn(&str) -> bool) -> bool {
        match self {
            Term::Var(v) => lookup(v),
            Term::True => true,
            Term::False => false,
            Term::Not(a) => !a.eval_with(lookup),
            _ => {
                let (op, a, b) = self.as_binary().expect("binary node");
                op.eval(a.eval_with(lookup), b.eval_with(lookup))
            }
        }
    }

    /// Preorder token list: one operator or atom token per node.
    pub fn tokenize_polish(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.size());
        self.push_polish(&mut out);
        out
    }

    fn push_polish(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => out.push(v.clone()),
            Term::True => out.push("T".to_string()),
            Term::False => out.push("F".to_string()),
            Term::Not(a) => {
                out.push("~".to_string());
                a.push_polish(out);
            }
            _ => {
                let (op, a, b) = self.as_binary().expect("binary node");
                out.push(op.symbol().to_string());
                a.push_polish(out);
                b.push_polish(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Term::Var(_) | Term::True | Term::False => ATOM_PRECEDENCE,
            Term::Not(_) => NOT_PRECEDENCE,
            _ => self.as_binary().expect("binary node").0.precedence(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::True => f.write_str("T"),
            Term::False => f.write_str("F"),
            Term::Not(a) => {
                f.write_str("~")?;
                fmt_child(a, a.precedence() < NOT_PRECEDENCE, f)
            }
            _ => {
                let (op, a, b) = self.as_binary().expect("binary node");
                let prec = op.precedence();
                // All binary connectives associate to the right.
                fmt_child(a, a.precedence() <= prec, f)?;
                write!(f, " {} ", op.symbol())?;
                fmt_child(b, b.precedence() < prec, f)
            }
        }
    }
}

fn fmt_child(t: &Term, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if parens {
        f.write_str("(")?;
        t.fmt_prec(f)?;
        f.write_str(")")
    } else {
        t.fmt_prec(f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f)
    }
}
