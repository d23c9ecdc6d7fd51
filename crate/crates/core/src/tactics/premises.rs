use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ArgKind, TacticArg, TacticId};
use crate::kernel::{Goal, Term, Theorem};

/// Assigns each theory a variable-name prefix; a goal mentions a theory when
/// one of its variables is that prefix followed by digits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoryScope {
    prefixes: Vec<(String, String)>,
}

impl TheoryScope {
    pub fn new(prefixes: impl IntoIterator<Item = (String, String)>) -> TheoryScope {
        TheoryScope {
            prefixes: prefixes.into_iter().collect(),
        }
    }

    pub fn prefixes(&self) -> &[(String, String)] {
        &self.prefixes
    }

    pub fn theory_of_var(&self, var: &str) -> Option<&str> {
        let stem = var.trim_end_matches(|c: char| c.is_ascii_digit());
        if stem.len() == var.len() {
            return None;
        }
        self.prefixes
            .iter()
            .find(|(_, prefix)| prefix == stem)
            .map(|(theory, _)| theory.as_str())
    }

    pub fn theories_of_goal(&self, goal: &Goal) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for v in goal.free_vars() {
            if let Some(theory) = self.theory_of_var(&v) {
                if !out.contains(&theory) {
                    out.push(theory);
                }
            }
        }
        out
    }
}

/// Theorems in library order plus the theory scoping used for premises.
#[derive(Debug, Clone, Default)]
pub struct Library {
    theorems: Vec<Arc<Theorem>>,
    scope: TheoryScope,
}

impl Library {
    pub fn new(mut theorems: Vec<Theorem>, scope: TheoryScope) -> Library {
        theorems.sort_by_key(|t| t.library_index);
        Library {
            theorems: theorems.into_iter().map(Arc::new).collect(),
            scope,
        }
    }

    pub fn theorems(&self) -> &[Arc<Theorem>] {
        &self.theorems
    }

    pub fn scope(&self) -> &TheoryScope {
        &self.scope
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Theorem>> {
        self.theorems.iter().find(|t| t.name == name)
    }

    pub fn by_index(&self, library_index: usize) -> Option<&Arc<Theorem>> {
        self.theorems
            .binary_search_by_key(&library_index, |t| t.library_index)
            .ok()
            .map(|i| &self.theorems[i])
    }

    /// Earlier theorems from theories the goal mentions, in library order.
    pub fn premises_for(&self, goal: &Goal, target_index: usize) -> Vec<Arc<Theorem>> {
        let theories = self.scope.theories_of_goal(goal);
        self.theorems
            .iter()
            .take_while(|t| t.library_index < target_index)
            .filter(|t| theories.contains(&t.theory.as_str()))
            .cloned()
            .collect()
    }
}

/// Candidate arguments for `tactic` on `goal` when proving the theorem at
/// `target_index`.
pub fn candidate_arguments(
    goal: &Goal,
    tactic: TacticId,
    library: &Library,
    target_index: usize,
) -> Vec<TacticArg> {
    match tactic.arg_kind() {
        ArgKind::None => Vec::new(),
        ArgKind::SingleTerm => goal
            .free_vars()
            .into_iter()
            .map(|v| TacticArg::Term(Term::Var(v)))
            .collect(),
        ArgKind::SingleTheorem | ArgKind::TheoremList => library
            .premises_for(goal, target_index)
            .into_iter()
            .map(TacticArg::Theorem)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_term;

    fn library() -> Library {
        let scope = TheoryScope::new([("alpha".into(), "a".into()), ("beta".into(), "b".into())]);
        let thms = [
            ("a_refl", "a1 ==> a1", "alpha"),
            ("b_refl", "b1 ==> b1", "beta"),
            ("a_weak", "a1 ==> a2 ==> a1", "alpha"),
            ("a_conj", "a1 /\\ a2 ==> a1", "alpha"),
            ("a_last", "a1 \\/ ~a1", "alpha"),
        ];
        Library::new(
            thms.iter()
                .enumerate()
                .map(|(i, (name, s, th))| Theorem {
                    name: name.to_string(),
                    statement: parse_term(s).unwrap(),
                    theory: th.to_string(),
                    library_index: i,
                })
                .collect(),
            scope,
        )
    }

    fn names(args: &[TacticArg]) -> Vec<String> {
        args.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn term_candidates_are_goal_variables() {
        let lib = library();
        let g = Goal::parse("p ==> q ==> p").unwrap();
        assert_eq!(names(&candidate_arguments(&g, TacticId::CaseOn, &lib, 3)), vec!["p", "q"]);
        assert!(candidate_arguments(&g, TacticId::StripTac, &lib, 3).is_empty());
    }

    #[test]
    fn theorem_candidates_precede_target_and_share_theory() {
        let lib = library();
        let g = Goal::parse("a1 /\\ a3 ==> a3").unwrap();
        assert!(candidate_arguments(&g, TacticId::Simp, &lib, 0).is_empty());
        assert_eq!(
            names(&candidate_arguments(&g, TacticId::Simp, &lib, 4)),
            vec!["a_refl", "a_weak", "a_conj"]
        );
        let mixed = Goal::parse("a1 ==> b2").unwrap();
        assert_eq!(
            names(&candidate_arguments(&mixed, TacticId::Drule, &lib, 2)),
            vec!["a_refl", "b_refl"]
        );
        let untagged = Goal::parse("p ==> p").unwrap();
        assert!(candidate_arguments(&untagged, TacticId::Metis, &lib, 5).is_empty());
    }

    #[test]
    fn theory_lookup() {
        let lib = library();
        assert_eq!(lib.scope().theory_of_var("a12"), Some("alpha"));
        assert_eq!(lib.scope().theory_of_var("a"), None);
        assert_eq!(lib.scope().theory_of_var("ab1"), None);
        assert_eq!(lib.by_index(2).unwrap().name, "a_weak");
    }
}
