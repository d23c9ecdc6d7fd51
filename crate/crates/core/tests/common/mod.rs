#![allow(dead_code)]

use std::sync::Arc;

use fringe_core::kernel::{enumerate_terms, parse_term, Goal, Term, Theorem};
use fringe_core::tactics::{ArgKind, Library, TacticArg, TacticId, TheoryScope};
use proptest::prelude::*;

pub const VARS: [&str; 4] = ["p", "q", "r", "s"];

/// A few valid schematic theorems over `a1`, `a2`.
pub fn small_library() -> Library {
    let stmts = [
        ("and_comm", "a1 /\\ a2 <=> a2 /\\ a1"),
        ("not_not", "~~a1 <=> a1"),
        ("or_intro", "a1 ==> a1 \\/ a2"),
        ("contra", "(a1 ==> a2) ==> ~a2 ==> ~a1"),
        ("and_elim", "a1 /\\ a2 ==> a1"),
        ("iff_comm", "(a1 <=> a2) <=> (a2 <=> a1)"),
    ];
    Library::new(
        stmts
            .iter()
            .enumerate()
            .map(|(i, (n, s))| Theorem {
                name: n.to_string(),
                statement: parse_term(s).unwrap(),
                theory: "a".into(),
                library_index: i,
            })
            .collect(),
        TheoryScope::new([("a".to_string(), "a".to_string())]),
    )
}

/// Goals `|- t` for every enumerated `t` of depth at most `depth`, plus
/// `a |- c` for enumerated `a`, `c` of depth at most `depth - 1`.
pub fn exhaustive_goals(depth: usize) -> Vec<Goal> {
    let mut goals: Vec<Goal> = enumerate_terms(&VARS, depth).into_iter().map(Goal::from_term).collect();
    let small = enumerate_terms(&VARS, depth.saturating_sub(1));
    for a in &small {
        for c in &small {
            goals.push(Goal::new([a.clone()], c.clone()));
        }
    }
    goals
}

/// Argument lists tried for `tactic` in the exhaustive checks.
pub fn argument_sets(tactic: TacticId, library: &Library) -> Vec<Vec<TacticArg>> {
    let thms: Vec<Arc<Theorem>> = library.theorems().to_vec();
    match tactic.arg_kind() {
        ArgKind::None => vec![vec![]],
        ArgKind::SingleTerm => ["p", "q", "r", "s", "p /\\ q", "~r"]
            .iter()
            .map(|s| vec![TacticArg::Term(parse_term(s).unwrap())])
            .collect(),
        ArgKind::SingleTheorem => thms.iter().map(|t| vec![TacticArg::Theorem(Arc::clone(t))]).collect(),
        ArgKind::TheoremList => {
            let mut sets = vec![vec![]];
            sets.extend(thms.iter().map(|t| vec![TacticArg::Theorem(Arc::clone(t))]));
            sets.push(thms.iter().take(3).map(|t| TacticArg::Theorem(Arc::clone(t))).collect());
            sets
        }
    }
}

pub fn arb_term(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        6 => prop::sample::select(VARS.to_vec()).prop_map(Term::var),
        1 => Just(Term::True),
        1 => Just(Term::False),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::imp(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::iff(a, b)),
        ]
    })
}

pub fn arb_goal(depth: u32) -> impl Strategy<Value = Goal> {
    (prop::collection::vec(arb_term(depth - 1), 0..3), arb_term(depth)).prop_map(|(a, c)| Goal::new(a, c))
}

pub mod setup {
    use std::sync::Arc;

    use fringe_core::autodiff::ParamSet;
    use fringe_core::corpus::{generate_corpus, library_of, CorpusRecord, GeneratorConfig};
    use fringe_core::encoder::Vocabulary;
    use fringe_core::kernel::{Term, Theorem};
    use fringe_core::policy::{Policy, PolicyConfig};
    use fringe_core::tactics::Library;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub struct Setup {
        pub records: Vec<CorpusRecord>,
        pub library: Library,
        pub theorems: Vec<Arc<Theorem>>,
    }

    pub fn corpus(n: usize, seed: u64) -> Setup {
        let records = generate_corpus(&GeneratorConfig { n, seed, ..GeneratorConfig::default() }).unwrap();
        let library = library_of(&records);
        let theorems = library.theorems().to_vec();
        Setup { records, library, theorems }
    }

    pub fn policy(setup: &Setup, dim: usize, seed: u64) -> (Policy, ParamSet) {
        let terms: Vec<Term> = setup.theorems.iter().map(|t| t.statement.clone()).collect();
        let mut params = ParamSet::new();
        let config = PolicyConfig { embed_dim: dim, dim, hidden: dim, max_args: 5 };
        let policy = Policy::new(&mut params, Vocabulary::from_terms(&terms), config, &mut ChaCha8Rng::seed_from_u64(seed));
        (policy, params)
    }
}
