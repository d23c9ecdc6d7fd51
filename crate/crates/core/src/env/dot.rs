use std::fmt::Write;

use super::MdpState;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering of the fringe tree. Fringes on the path to the first
/// empty fringe are blue; every other fringe is red.
pub fn export_search_graph(state: &MdpState) -> String {
    let mut on_path = vec![false; state.fringes.len()];
    if let Some(end) = state.proof_fringe() {
        for i in state.path_to(end) {
            on_path[i] = true;
        }
    }
    let mut out = String::from("digraph search {\n  node [shape=box, fontname=\"monospace\"];\n");
    for (i, f) in state.fringes.iter().enumerate() {
        let goals: Vec<String> = f.goals.iter().map(|g| escape(&g.to_string())).collect();
        let label = if goals.is_empty() { "(empty)".to_string() } else { goals.join("\\n") };
        let color = if on_path[i] { "blue" } else { "red" };
        writeln!(out, "  f{i} [label=\"{i}: {label}\", color={color}];").unwrap();
    }
    for (i, f) in state.fringes.iter().enumerate() {
        if let Some(p) = &f.parent {
            let mut label = p.tactic.to_string();
            for a in &p.args {
                label.push(' ');
                label.push_str(&escape(&a.to_string()));
            }
            let color = if on_path[i] { "blue" } else { "red" };
            writeln!(out, "  f{} -> f{i} [label=\"{label}\", color={color}];", p.fringe).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{reset, Action, DifficultyTracker, EpisodeConfig};
    use crate::kernel::Goal;
    use crate::tactics::TacticId;

    #[test]
    fn node_and_edge_counts() {
        let s0 = reset(Goal::parse("p /\\ q ==> p /\\ q").unwrap());
        let dot = export_search_graph(&s0);
        assert_eq!(dot.matches(" [label=").count(), 1);
        assert!(!dot.contains("->"));

        let cfg = EpisodeConfig::default();
        let tracker = DifficultyTracker::default();
        let mut s = s0;
        for (f, t) in [(0, TacticId::StripTac), (1, TacticId::EqTac), (0, TacticId::EqTac)] {
            let a = Action {
                fringe: f,
                goal: 0,
                tactic: t,
                args: vec![],
            };
            s.step(&a, &cfg, &tracker, "x").unwrap();
        }
        for (f, t) in [(1, TacticId::Simp), (2, TacticId::Simp)] {
            let a = Action {
                fringe: f,
                goal: 0,
                tactic: t,
                args: vec![],
            };
            s.step(&a, &cfg, &tracker, "x").unwrap();
        }
        let dot = export_search_graph(&s);
        assert_eq!(s.fringes.len(), 4);
        assert_eq!(dot.matches("->").count(), 3);
        assert_eq!(dot.matches("color=blue];").count(), 4 + 3);
    }
}
