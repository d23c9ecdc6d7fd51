//! Generated tautology corpora, JSONL storage and train/test splitting.
//!
//! Theory tags double as variable stems: a theorem tagged `b` is written
//! over `b1`, `b2`, ... and a goal mentions theory `b` when it contains such
//! a variable.

use std::collections::HashSet;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kernel::{parse_term, term_is_tautology, Goal, Term, Theorem};
use crate::tactics::{apply_tactic, Library, TacticId, TacticOutcome, TheoryScope, DEFAULT_FUEL};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub name: String,
    pub statement: String,
    pub theory: String,
    pub index: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: record `{name}`: {message}")]
    BadStatement { line: usize, name: String, message: String },
    #[error("line {line}: record `{name}` is not a tautology")]
    NotTautology { line: usize, name: String },
    #[error("line {line}: duplicate record name `{name}`")]
    DuplicateName { line: usize, name: String },
    #[error("library indices are not a permutation of 0..{count}")]
    BadIndices { count: usize },
    #[error("generator stalled after {attempts} attempts with {found} of {wanted} theorems")]
    Stalled { attempts: usize, found: usize, wanted: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n: usize,
    pub max_vars: usize,
    pub max_depth: usize,
    pub theory_count: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            n: 250,
            max_vars: 5,
            max_depth: 5,
            theory_count: 5,
        }
    }
}

/// Theory tag (and variable stem) of the `k`-th generated theory.
pub fn theory_tag(k: usize) -> String {
    ((b'a' + k as u8) as char).to_string()
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    vars: Vec<String>,
    cfg: &'a GeneratorConfig,
}

impl Gen<'_> {
    fn atom(&mut self) -> Term {
        if self.rng.gen_bool(0.04) {
            Term::constant(self.rng.gen_bool(0.5))
        } else {
            Term::Var(self.vars.choose(&mut self.rng).expect("nonempty pool").clone())
        }
    }

    /// Random term whose leaf-counted depth is at most `depth`.
    fn term(&mut self, depth: usize) -> Term {
        if depth <= 1 || self.rng.gen_bool(0.3) {
            return self.atom();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..10) {
            0 | 1 => Term::not(self.term(d)),
            2 | 3 => Term::and(self.term(d), self.term(d)),
            4 | 5 => Term::or(self.term(d), self.term(d)),
            6 | 7 => Term::imp(self.term(d), self.term(d)),
            _ => Term::iff(self.term(d), self.term(d)),
        }
    }

    fn sub(&mut self) -> Term {
        let depth = self.rng.gen_range(2..=self.cfg.max_depth);
        self.term(depth)
    }

    fn var(&mut self) -> Term {
        Term::Var(self.vars.choose(&mut self.rng).expect("nonempty pool").clone())
    }

    /// One schema instance; tautological by construction (and re-checked).
    fn schema(&mut self) -> Term {
        let (a, b, c) = (self.sub(), self.sub(), self.sub());
        use Term as T;
        match self.rng.gen_range(0..16) {
            0 => T::imp(T::and(a.clone(), b.clone()), T::and(b, a)),
            1 => T::imp(T::imp(a.clone(), b.clone()), T::imp(T::not(b), T::not(a))),
            2 => T::iff(
                T::and(a.clone(), T::or(b.clone(), c.clone())),
                T::or(T::and(a.clone(), b), T::and(a, c)),
            ),
            3 => T::iff(
                T::or(a.clone(), T::and(b.clone(), c.clone())),
                T::and(T::or(a.clone(), b), T::or(a, c)),
            ),
            4 => T::imp(T::imp(a.clone(), b.clone()), T::imp(T::imp(b, c.clone()), T::imp(a, c))),
            5 => T::imp(a.clone(), T::imp(b, a)),
            6 => T::imp(T::iff(a.clone(), b.clone()), T::iff(b, a)),
            7 => T::iff(T::not(T::and(a.clone(), b.clone())), T::or(T::not(a), T::not(b))),
            8 => T::iff(T::not(T::or(a.clone(), b.clone())), T::and(T::not(a), T::not(b))),
            9 => T::imp(T::imp(T::imp(a.clone(), b), a.clone()), a),
            10 => {
                // Case-split friendly: the formula agrees with its Shannon expansion.
                let v = self.var();
                let name = match &v {
                    T::Var(n) => n.clone(),
                    _ => unreachable!(),
                };
                let hi = a.subst_var(&name, &T::True);
                let lo = a.subst_var(&name, &T::False);
                T::iff(T::or(T::and(v.clone(), hi), T::and(T::not(v), lo)), a)
            }
            11 => {
                let v = self.var();
                T::imp(T::imp(v.clone(), a.clone()), T::imp(T::imp(T::not(v), a.clone()), a))
            }
            12 => T::and(self.schema(), self.schema()),
            13 => T::imp(T::and(T::imp(a.clone(), b.clone()), a), b),
            14 => T::iff(T::imp(a.clone(), b.clone()), T::or(T::not(a), b)),
            _ => T::imp(T::and(a.clone(), T::imp(a, b.clone())), T::or(b, c)),
        }
    }
}

/// Share of one-step `metis_tac []` theorems kept by the generator.
const METIS_KEEP: f64 = 0.1;

fn metis_closes(t: &Term) -> bool {
    let g = Goal::from_term(t.clone());
    apply_tactic(&g, TacticId::Metis, &[], DEFAULT_FUEL) == TacticOutcome::Subgoals(Vec::new())
}

/// Generates `n` distinct oracle-checked tautologies, deterministic in seed.
pub fn generate_corpus(cfg: &GeneratorConfig) -> Result<Vec<CorpusRecord>, CorpusError> {
    if cfg.n == 0 {
        return Err(CorpusError::InvalidParameters("n must be at least 1".into()));
    }
    if cfg.max_vars == 0 || cfg.max_vars > 8 {
        return Err(CorpusError::InvalidParameters("max_vars must be in 1..=8".into()));
    }
    if cfg.theory_count == 0 || cfg.theory_count > 26 {
        return Err(CorpusError::InvalidParameters("theory_count must be in 1..=26".into()));
    }
    if cfg.max_depth < 2 {
        return Err(CorpusError::InvalidParameters("max_depth must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen: HashSet<Term> = HashSet::new();
    let mut out = Vec::with_capacity(cfg.n);
    let max_attempts = 200 * cfg.n + 1000;
    let mut attempts = 0;
    while out.len() < cfg.n {
        attempts += 1;
        if attempts > max_attempts {
            return Err(CorpusError::Stalled {
                attempts: max_attempts,
                found: out.len(),
                wanted: cfg.n,
            });
        }
        let k = out.len() % cfg.theory_count;
        let tag = theory_tag(k);
        let own = rng.gen_range(1..=cfg.max_vars);
        let mut vars: Vec<String> = (1..=own).map(|i| format!("{tag}{i}")).collect();
        if cfg.theory_count > 1 && own < cfg.max_vars && rng.gen_bool(0.2) {
            let other = (k + rng.gen_range(1..cfg.theory_count)) % cfg.theory_count;
            vars.push(format!("{}1", theory_tag(other)));
        }
        let mut gen = Gen {
            rng: ChaCha8Rng::seed_from_u64(rng.gen()),
            vars,
            cfg,
        };
        let t = gen.schema();
        if t.free_vars().is_empty() || t.free_vars().len() > cfg.max_vars || t.size() > 80 || seen.contains(&t) {
            continue;
        }
        if !term_is_tautology(&t).unwrap_or(false) {
            continue;
        }
        if metis_closes(&t) && !rng.gen_bool(METIS_KEEP) {
            continue;
        }
        seen.insert(t.clone());
        out.push(CorpusRecord {
            name: format!("{tag}_{:04}", out.len()),
            statement: t.to_string(),
            theory: tag,
            index: out.len(),
        });
    }
    Ok(out)
}

/// Deterministic shuffled split with `ceil(ratio * n)` training records.
pub fn split(corpus: &[CorpusRecord], ratio: f64, seed: u64) -> (Vec<CorpusRecord>, Vec<CorpusRecord>) {
    assert!(ratio > 0.0 && ratio < 1.0, "split ratio must lie strictly between 0 and 1");
    let n = corpus.len();
    let n_train = ((ratio * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train: Vec<usize> = order[..n_train.min(n)].to_vec();
    let mut test: Vec<usize> = order[n_train.min(n)..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (
        train.into_iter().map(|i| corpus[i].clone()).collect(),
        test.into_iter().map(|i| corpus[i].clone()).collect(),
    )
}

/// Validates names, statements, tautologyhood and the index permutation.
pub fn validate(records: &[CorpusRecord]) -> Result<(), CorpusError> {
    let mut names = HashSet::new();
    for (k, r) in records.iter().enumerate() {
        let line = k + 1;
        if !names.insert(r.name.as_str()) {
            return Err(CorpusError::DuplicateName {
                line,
                name: r.name.clone(),
            });
        }
        let t = parse_term(&r.statement).map_err(|e| CorpusError::BadStatement {
            line,
            name: r.name.clone(),
            message: e.to_string(),
        })?;
        match term_is_tautology(&t) {
            Ok(true) => {}
            Ok(false) => {
                return Err(CorpusError::NotTautology {
                    line,
                    name: r.name.clone(),
                })
            }
            Err(e) => {
                return Err(CorpusError::BadStatement {
                    line,
                    name: r.name.clone(),
                    message: e.to_string(),
                })
            }
        }
    }
    let mut seen = vec![false; records.len()];
    for r in records {
        if r.index >= records.len() || std::mem::replace(&mut seen[r.index], true) {
            return Err(CorpusError::BadIndices { count: records.len() });
        }
    }
    Ok(())
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusRecord>, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = fs::File::open(path).map_err(io_err)?;
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for (k, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let r: CorpusRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: k + 1,
            message: e.to_string(),
        })?;
        records.push(r);
        lines.push(k + 1);
    }
    // Re-map record positions onto file line numbers in error reports.
    validate(&records).map_err(|e| match e {
        CorpusError::DuplicateName { line, name } => CorpusError::DuplicateName { line: lines[line - 1], name },
        CorpusError::BadStatement { line, name, message } => CorpusError::BadStatement {
            line: lines[line - 1],
            name,
            message,
        },
        CorpusError::NotTautology { line, name } => CorpusError::NotTautology { line: lines[line - 1], name },
        other => other,
    })?;
    Ok(records)
}

pub fn save_corpus(records: &[CorpusRecord], path: &Path) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for r in records {
        let line = serde_json::to_string(r).expect("records serialize");
        writeln!(f, "{line}").map_err(io_err)?;
    }
    f.flush().map_err(io_err)
}

/// Parsed theorem for a (validated) record.
pub fn to_theorem(r: &CorpusRecord) -> Theorem {
    Theorem {
        name: r.name.clone(),
        statement: parse_term(&r.statement).expect("validated statement"),
        theory: r.theory.clone(),
        library_index: r.index,
    }
}

/// Theory scope in which every tag is its own variable stem.
pub fn scope_of(records: &[CorpusRecord]) -> TheoryScope {
    let mut tags: Vec<String> = records.iter().map(|r| r.theory.clone()).collect();
    tags.sort();
    tags.dedup();
    TheoryScope::new(tags.into_iter().map(|t| (t.clone(), t)))
}

/// The whole corpus as a premise library.
pub fn library_of(records: &[CorpusRecord]) -> Library {
    Library::new(records.iter().map(to_theorem).collect(), scope_of(records))
}
