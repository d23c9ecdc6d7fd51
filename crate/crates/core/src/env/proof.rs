//! Proof reconstruction from fringe provenance, script text, and replay.

use std::collections::HashMap;
use std::fmt;

use crate::kernel::{parse_term, Goal};
use crate::tactics::{apply_tactic, args_conform, ArgKind, Library, TacticArg, TacticId, TacticOutcome};

use super::{EnvError, MdpState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    /// Goal the tactic is applied to; absent for scripts read from text.
    pub goal: Option<Goal>,
    pub tactic: TacticId,
    pub args: Vec<TacticArg>,
    pub children: Vec<ProofNode>,
}

impl ProofNode {
    fn depth(&self) -> usize {
        1 + self.children.iter().map(ProofNode::depth).max().unwrap_or(0)
    }

    fn count(&self) -> usize {
        1 + self.children.iter().map(ProofNode::count).sum::<usize>()
    }

    fn command(&self) -> String {
        let names = || self.args.iter().map(|a| a.to_string()).collect::<Vec<_>>();
        match self.tactic.arg_kind() {
            ArgKind::None => self.tactic.name().to_string(),
            ArgKind::TheoremList => format!("{} [{}]", self.tactic, names().join(", ")),
            _ => format!("{} {}", self.tactic, names().join(" ")),
        }
    }

    fn emit(&self, col: usize, marker: bool, out: &mut String) {
        if marker {
            out.push_str(&" ".repeat(col - 3));
            out.push_str(">- ");
        } else {
            out.push_str(&" ".repeat(col));
        }
        out.push_str(&self.command());
        out.push('\n');
        for c in &self.children {
            c.emit(col + 3, true, out);
        }
    }
}

/// A tactic proof tree for one goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofScript {
    pub name: String,
    pub goal: Goal,
    pub root: ProofNode,
    /// Distinct tactic applications; shared subproofs count once.
    pub steps: usize,
}

impl ProofScript {
    /// Longest chain of tactic applications from the root.
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Number of tactic lines in the printed script.
    pub fn printed_len(&self) -> usize {
        self.root.count()
    }
}

impl fmt::Display for ProofScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut body = String::new();
        self.root.emit(2, false, &mut body);
        let statement = if self.goal.assumptions().is_empty() {
            self.goal.conclusion().to_string()
        } else {
            self.goal.to_string()
        };
        write!(f, "Theorem {}:\n  {}\nProof\n{}QED\n", self.name, statement, body)
    }
}

struct Slot {
    tactic: TacticId,
    args: Vec<TacticArg>,
    children: Vec<usize>,
}

/// Rebuilds the proof along the provenance chain ending in an empty fringe.
pub fn reconstruct_proof(terminal: &MdpState, name: &str) -> Result<ProofScript, EnvError> {
    let end = terminal.proof_fringe().ok_or(EnvError::NotProved)?;
    let path = terminal.path_to(end);
    let mut slots: Vec<Option<Slot>> = vec![None];
    let mut goals: Vec<Goal> = vec![terminal.main_goal.clone()];
    // Slot index for each goal of the current fringe, in fringe order.
    let mut open: Vec<usize> = vec![0];
    for &child in &path[1..] {
        let p = terminal.fringes[child].parent.as_ref().expect("non-root fringe has provenance");
        let current = &terminal.fringes[p.fringe].goals;
        let closed = open[p.goal];
        let lookup: HashMap<&Goal, usize> = current
            .iter()
            .zip(&open)
            .enumerate()
            .filter(|(k, _)| *k != p.goal)
            .map(|(_, (g, s))| (g, *s))
            .collect();
        let mut fresh: HashMap<&Goal, usize> = HashMap::new();
        let mut children = Vec::with_capacity(p.subgoals.len());
        for g in &p.subgoals {
            let slot = match lookup.get(g).or(fresh.get(g)) {
                Some(s) => *s,
                None => {
                    slots.push(None);
                    goals.push(g.clone());
                    fresh.insert(g, slots.len() - 1);
                    slots.len() - 1
                }
            };
            children.push(slot);
        }
        slots[closed] = Some(Slot {
            tactic: p.tactic,
            args: p.args.clone(),
            children,
        });
        let next = &terminal.fringes[child].goals;
        open = next
            .iter()
            .map(|g| *lookup.get(g).or(fresh.get(g)).expect("fringe goal has a slot"))
            .collect();
    }
    fn build(i: usize, slots: &[Option<Slot>], goals: &[Goal]) -> ProofNode {
        let s = slots[i].as_ref().expect("every slot on a proof path is closed");
        ProofNode {
            goal: Some(goals[i].clone()),
            tactic: s.tactic,
            args: s.args.clone(),
            children: s.children.iter().map(|c| build(*c, slots, goals)).collect(),
        }
    }
    Ok(ProofScript {
        name: name.to_string(),
        goal: terminal.main_goal.clone(),
        root: build(0, &slots, &goals),
        steps: path.len() - 1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ScriptParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step {step} ({command}): {reason}")]
pub struct ReplayError {
    /// 1-based position of the failing tactic in script order.
    pub step: usize,
    pub command: String,
    pub reason: String,
}

fn parse_command(text: &str, library: &Library, line: usize) -> Result<(TacticId, Vec<TacticArg>), ScriptParseError> {
    let err = |message: String| ScriptParseError { line, message };
    let split = text.find(|c: char| c.is_whitespace() || c == '[').unwrap_or(text.len());
    let (name, rest) = (&text[..split], text[split..].trim());
    let tactic = TacticId::from_name(name).ok_or_else(|| err(format!("unknown tactic `{name}`")))?;
    let theorem = |n: &str| {
        library
            .get(n)
            .cloned()
            .map(TacticArg::Theorem)
            .ok_or_else(|| err(format!("unknown theorem `{n}`")))
    };
    let args = match tactic.arg_kind() {
        ArgKind::None if rest.is_empty() => Vec::new(),
        ArgKind::None => return Err(err(format!("{tactic} takes no arguments"))),
        ArgKind::SingleTerm => vec![TacticArg::Term(parse_term(rest).map_err(|e| err(e.to_string()))?)],
        ArgKind::SingleTheorem => vec![theorem(rest)?],
        ArgKind::TheoremList => {
            let inner = rest
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| err(format!("{tactic} expects a bracketed theorem list")))?;
            inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(theorem)
                .collect::<Result<_, _>>()?
        }
    };
    if !args_conform(tactic, &args) {
        return Err(err(format!("arguments do not conform to {tactic}")));
    }
    Ok((tactic, args))
}

/// Reads the text layout produced by `Display for ProofScript`.
pub fn parse_script(text: &str, library: &Library) -> Result<ProofScript, ScriptParseError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut k = 0;
    let mut next = |what: &str| -> Result<(usize, &str), ScriptParseError> {
        while k < lines.len() && lines[k].trim().is_empty() {
            k += 1;
        }
        if k == lines.len() {
            return Err(ScriptParseError {
                line: k + 1,
                message: format!("expected {what}, found end of input"),
            });
        }
        k += 1;
        Ok((k, lines[k - 1]))
    };
    let (n, header) = next("`Theorem <name>:`")?;
    let name = header
        .trim()
        .strip_prefix("Theorem ")
        .and_then(|r| r.strip_suffix(':'))
        .ok_or(ScriptParseError {
            line: n,
            message: "expected `Theorem <name>:`".into(),
        })?
        .trim()
        .to_string();
    let (n, statement) = next("a goal")?;
    let goal = Goal::parse(statement.trim()).map_err(|e| ScriptParseError {
        line: n,
        message: e.to_string(),
    })?;
    let (n, proof) = next("`Proof`")?;
    if proof.trim() != "Proof" {
        return Err(ScriptParseError {
            line: n,
            message: "expected `Proof`".into(),
        });
    }

    struct Raw {
        tactic: TacticId,
        args: Vec<TacticArg>,
        children: Vec<usize>,
    }
    let mut nodes: Vec<Raw> = Vec::new();
    // (tactic column, node) for nodes that may still receive children.
    let mut columns: Vec<(usize, usize)> = Vec::new();
    loop {
        let (n, line) = next("`QED`")?;
        if line.trim() == "QED" {
            break;
        }
        let col = line.len() - line.trim_start().len();
        let body = line.trim();
        let perr = |message: &str| ScriptParseError {
            line: n,
            message: message.to_string(),
        };
        let (tac_col, text, parent) = match body.strip_prefix(">-") {
            Some(rest) => {
                let parent = columns
                    .iter()
                    .rev()
                    .find(|(c, _)| *c == col)
                    .map(|(_, node)| *node)
                    .ok_or_else(|| perr("`>-` does not line up with any tactic"))?;
                (col + 3, rest.trim(), Some(parent))
            }
            None if nodes.is_empty() => (col, body, None),
            None => return Err(perr("only the first tactic may appear without `>-`")),
        };
        let (tactic, args) = parse_command(text, library, n)?;
        nodes.push(Raw {
            tactic,
            args,
            children: Vec::new(),
        });
        let id = nodes.len() - 1;
        if let Some(p) = parent {
            nodes[p].children.push(id);
        }
        columns.retain(|(c, _)| *c < tac_col);
        columns.push((tac_col, id));
    }
    if nodes.is_empty() {
        return Err(ScriptParseError {
            line: k,
            message: "proof has no tactics".into(),
        });
    }
    fn build(i: usize, nodes: &mut Vec<Raw>) -> ProofNode {
        let children = std::mem::take(&mut nodes[i].children);
        ProofNode {
            goal: None,
            tactic: nodes[i].tactic,
            args: nodes[i].args.clone(),
            children: children.into_iter().map(|c| build(c, nodes)).collect(),
        }
    }
    let root = build(0, &mut nodes);
    let steps = root.count();
    Ok(ProofScript { name, goal, root, steps })
}

/// Re-executes every tactic of `script` through the kernel.
pub fn replay_script(script: &ProofScript, fuel: usize) -> Result<(), ReplayError> {
    fn go(node: &ProofNode, goal: &Goal, fuel: usize, counter: &mut usize) -> Result<(), ReplayError> {
        *counter += 1;
        let step = *counter;
        let fail = |reason: String| ReplayError {
            step,
            command: node.command(),
            reason,
        };
        if let Some(expected) = &node.goal {
            if expected != goal {
                return Err(fail(format!("expected goal `{expected}`, kernel produced `{goal}`")));
            }
        }
        let subgoals = match apply_tactic(goal, node.tactic, &node.args, fuel) {
            TacticOutcome::Subgoals(g) => g,
            TacticOutcome::NoChange => return Err(fail(format!("tactic does not change `{goal}`"))),
            TacticOutcome::Failed(why) => return Err(fail(format!("tactic failed on `{goal}`: {why}"))),
            TacticOutcome::FuelExhausted => return Err(fail(format!("out of fuel on `{goal}`"))),
        };
        if subgoals.len() != node.children.len() {
            return Err(fail(format!(
                "tactic leaves {} subgoal(s), script handles {}",
                subgoals.len(),
                node.children.len()
            )));
        }
        for (child, g) in node.children.iter().zip(&subgoals) {
            go(child, g, fuel, counter)?;
        }
        Ok(())
    }
    go(&script.root, &script.goal, fuel, &mut 0)
}
