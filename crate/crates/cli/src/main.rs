mod settings;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fringe_core::autodiff::ParamSet;
use fringe_core::corpus::{generate_corpus, library_of, load_corpus, save_corpus, split, CorpusRecord, GeneratorConfig};
use fringe_core::encoder::Vocabulary;
use fringe_core::env::{export_search_graph, parse_script, replay_script};
use fringe_core::kernel::{Goal, Term, Theorem};
use fringe_core::learner::{episode_rng, evaluate, train, Checkpoint, Trainer};
use fringe_core::policy::Policy;
use fringe_core::strategies::{ablate, run_strategy, untrained_params, SearchOutcome, StrategySpec};
use fringe_core::tactics::{Library, TheoryScope};

use settings::Settings;

#[derive(Parser)]
#[command(name = "fringe", version, about = "Learned proof search over propositional goals")]
struct Cli {
    /// TOML file with default settings
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Part {
    Train,
    Test,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Train the policy on the training split
    Train {
        #[command(flatten)]
        settings: Settings,
        /// Continue from the checkpoint instead of starting fresh
        #[arg(long)]
        resume: bool,
    },
    /// Attempt every theorem of a split once
    Eval {
        #[command(flatten)]
        settings: Settings,
        #[arg(long, value_enum, default_value = "test")]
        split: Part,
        /// Use freshly initialized parameters with the checkpoint's layout
        #[arg(long)]
        untrained: bool,
    },
    /// Compare search strategies under one checkpoint
    Ablate {
        #[command(flatten)]
        settings: Settings,
        #[arg(long, value_enum, default_value = "test")]
        split: Part,
        /// learned, untrained, latest, bfs-topk-2, dfs-stochastic-2, ... (repeatable)
        #[arg(long = "strategy")]
        strategies: Vec<StrategySpec>,
        /// Also write the report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Search for a proof of one goal and print the script
    Prove {
        goal: String,
        #[command(flatten)]
        settings: Settings,
        #[arg(long, default_value = "learned")]
        strategy: StrategySpec,
        /// Independent attempts before giving up
        #[arg(long, default_value_t = 10)]
        attempts: usize,
        /// Write the script here as well
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a proof script through the kernel
    Replay {
        script: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Run one search and write its fringe graph in DOT
    ExportDot {
        goal: String,
        #[command(flatten)]
        settings: Settings,
        #[arg(long, default_value = "learned")]
        strategy: StrategySpec,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a tautology corpus
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 250)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        max_vars: usize,
        #[arg(long, default_value_t = 5)]
        max_depth: usize,
        #[arg(long, default_value_t = 5)]
        theories: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Train { settings, resume } => cmd_train(settings.with_file(config)?, resume),
        Command::Eval {
            settings,
            split,
            untrained,
        } => cmd_eval(settings.with_file(config)?, split, untrained),
        Command::Ablate {
            settings,
            split,
            strategies,
            json,
        } => cmd_ablate(settings.with_file(config)?, split, strategies, json),
        Command::Prove {
            goal,
            settings,
            strategy,
            attempts,
            out,
        } => cmd_prove(&goal, settings.with_file(config)?, strategy, attempts, out),
        Command::Replay { script, settings } => cmd_replay(&script, settings.with_file(config)?),
        Command::ExportDot {
            goal,
            settings,
            strategy,
            out,
        } => cmd_export_dot(&goal, settings.with_file(config)?, strategy, &out),
        Command::GenCorpus {
            out,
            seed,
            n,
            max_vars,
            max_depth,
            theories,
        } => {
            let cfg = GeneratorConfig {
                seed,
                n,
                max_vars,
                max_depth,
                theory_count: theories,
            };
            let records = generate_corpus(&cfg)?;
            save_corpus(&records, &out)?;
            eprintln!("wrote {} theorems to {}", records.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

struct Corpus {
    records: Vec<CorpusRecord>,
    library: Library,
}

impl Corpus {
    fn load(path: &Path) -> anyhow::Result<Corpus> {
        if !path.exists() {
            bail!("corpus file {} does not exist", path.display());
        }
        let records = load_corpus(path)?;
        let library = library_of(&records);
        Ok(Corpus { records, library })
    }

    fn part(&self, s: &Settings, part: Part) -> Vec<Arc<Theorem>> {
        let (train, test) = split(&self.records, s.split_ratio(), s.split_seed());
        let chosen = match part {
            Part::Train => train,
            Part::Test => test,
            Part::All => self.records.clone(),
        };
        chosen
            .iter()
            .map(|r| Arc::clone(self.library.get(&r.name).expect("record is in the library")))
            .collect()
    }
}

/// Premise library for single-goal commands: the corpus if given.
fn optional_library(s: &Settings) -> anyhow::Result<Library> {
    match &s.corpus {
        Some(p) => Ok(Corpus::load(p)?.library),
        None => Ok(Library::new(Vec::new(), TheoryScope::new(Vec::new()))),
    }
}

fn load_checkpoint(s: &Settings) -> anyhow::Result<Checkpoint> {
    let path = s.checkpoint();
    Ok(Checkpoint::load(&path)?)
}

fn cmd_train(s: Settings, resume: bool) -> anyhow::Result<ExitCode> {
    let corpus = Corpus::load(s.corpus()?)?;
    let theorems = corpus.part(&s, Part::Train);
    let mut trainer = if resume {
        let mut t = Trainer::from_checkpoint(load_checkpoint(&s)?);
        t.config.iterations = s.iterations.unwrap_or(t.config.iterations);
        t.config.workers = s.workers.unwrap_or(t.config.workers).max(1);
        t
    } else {
        let terms: Vec<Term> = corpus.library.theorems().iter().map(|t| t.statement.clone()).collect();
        let mut params = ParamSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed());
        let policy = Policy::new(&mut params, Vocabulary::from_terms(&terms), s.policy(), &mut rng);
        Trainer::new(policy, params, s.learner(), theorems.iter().map(|t| t.name.clone()))
    };
    let metrics_path = s.metrics();
    let file = fs::OpenOptions::new()
        .create(true)
        .write(true)
        .append(resume)
        .truncate(!resume)
        .open(&metrics_path)
        .with_context(|| format!("opening {}", metrics_path.display()))?;
    let mut metrics = BufWriter::new(file);
    let ck_path = s.checkpoint();
    let history = train(&mut trainer, &theorems, &corpus.library, &mut metrics, &mut |ck| ck.save(&ck_path))?;
    metrics.flush()?;
    if let Some(last) = history.last() {
        eprintln!(
            "iteration {}: train proof rate {:.3}, mean return {:.3}",
            last.iteration, last.proof_rate, last.mean_return
        );
    }
    eprintln!("checkpoint written to {}", ck_path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(s: Settings, part: Part, untrained: bool) -> anyhow::Result<ExitCode> {
    let corpus = Corpus::load(s.corpus()?)?;
    let theorems = corpus.part(&s, part);
    let ck = load_checkpoint(&s)?;
    let (policy, params) = if untrained {
        untrained_params(&ck.policy, s.seed())
    } else {
        (ck.policy, ck.params)
    };
    let report = evaluate(&policy, &params, &theorems, &corpus.library, &s.episode(), s.seed())?;
    println!("proved {}/{}", report.proved, report.attempted);
    println!("mean timesteps {:.2}", report.mean_timesteps);
    println!("mean proof length {:.2}", report.mean_proof_length);
    Ok(ExitCode::SUCCESS)
}

fn cmd_ablate(s: Settings, part: Part, mut specs: Vec<StrategySpec>, json: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let corpus = Corpus::load(s.corpus()?)?;
    let theorems = corpus.part(&s, part);
    let ck = load_checkpoint(&s)?;
    if specs.is_empty() {
        specs = ["learned", "untrained", "latest", "bfs-stochastic-2", "bfs-topk-2", "dfs-stochastic-2", "dfs-topk-2"]
            .iter()
            .map(|t| t.parse().expect("built-in strategy names parse"))
            .collect();
    }
    let report = ablate(&theorems, &corpus.library, &ck.policy, &ck.params, &specs, &s.episode(), s.seed())?;
    print!("{}", report.table());
    if let Some(path) = json {
        fs::write(&path, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn goal_theorem(text: &str, library: &Library) -> anyhow::Result<Theorem> {
    let goal = Goal::parse(text).with_context(|| format!("parsing goal {text:?}"))?;
    Ok(Theorem {
        name: "goal".into(),
        statement: goal.to_implication(),
        theory: String::new(),
        library_index: library.theorems().len(),
    })
}

/// Up to `attempts` searches with distinct streams; stops at the first proof.
fn search(
    theorem: &Theorem,
    library: &Library,
    s: &Settings,
    spec: StrategySpec,
    attempts: usize,
) -> anyhow::Result<SearchOutcome> {
    let ck = load_checkpoint(s)?;
    let fresh = untrained_params(&ck.policy, s.seed());
    let (policy, params) = match spec.kind {
        fringe_core::strategies::StrategyKind::Untrained => (&fresh.0, &fresh.1),
        _ => (&ck.policy, &ck.params),
    };
    let mut last = None;
    for k in 0..attempts.max(1) {
        let mut rng = episode_rng(s.seed(), 0, k);
        let out = run_strategy(theorem, library, policy, params, &spec, &s.episode(), &mut rng)?;
        if out.proved {
            return Ok(out);
        }
        last = Some(out);
    }
    Ok(last.expect("at least one attempt"))
}

fn cmd_prove(goal: &str, s: Settings, spec: StrategySpec, attempts: usize, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let library = optional_library(&s)?;
    let theorem = goal_theorem(goal, &library)?;
    let result = search(&theorem, &library, &s, spec, attempts)?;
    let Some(script) = result.script else {
        eprintln!("no proof found within {} timesteps", s.episode().budget);
        return Ok(ExitCode::from(1));
    };
    let text = script.to_string();
    print!("{text}");
    if let Some(path) = out {
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_replay(path: &Path, s: Settings) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let library = optional_library(&s)?;
    let script = match parse_script(&text, &library) {
        Ok(script) => script,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return Ok(ExitCode::from(1));
        }
    };
    match replay_script(&script, s.episode().fuel) {
        Ok(()) => {
            println!("{}: proof of {} checked", path.display(), script.name);
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_export_dot(goal: &str, s: Settings, spec: StrategySpec, out: &Path) -> anyhow::Result<ExitCode> {
    let library = optional_library(&s)?;
    let theorem = goal_theorem(goal, &library)?;
    let result = search(&theorem, &library, &s, spec, 1)?;
    fs::write(out, export_search_graph(&result.final_state)).with_context(|| format!("writing {}", out.display()))?;
    eprintln!(
        "{} fringes, {}",
        result.final_state.fringes.len(),
        if result.proved { "proved" } else { "not proved" }
    );
    Ok(ExitCode::SUCCESS)
}
