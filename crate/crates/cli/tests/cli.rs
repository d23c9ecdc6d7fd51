use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fringe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fringe"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A small corpus plus a briefly trained checkpoint.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let gen = fringe(dir.path(), &["gen-corpus", "--out", "c.jsonl", "--n", "30", "--seed", "4"]);
    assert!(gen.status.success(), "{}", stderr(&gen));
    let tr = fringe(
        dir.path(),
        &["train", "--corpus", "c.jsonl", "--iterations", "1", "--dim", "8", "--embed-dim", "8", "--checkpoint", "ck.json"],
    );
    assert!(tr.status.success(), "{}", stderr(&tr));
    dir
}

#[test]
fn missing_corpus_is_a_usage_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = fringe(dir.path(), &["train", "--corpus", "absent/corpus.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent/corpus.jsonl"));
}

#[test]
fn bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fringe(dir.path(), &["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(fringe(dir.path(), &["ablate", "--strategy", "bfs-best-2"]).status.code(), Some(2));
}

#[test]
fn training_twice_gives_identical_metrics() {
    let dir = tempfile::tempdir().unwrap();
    assert!(fringe(dir.path(), &["gen-corpus", "--out", "c.jsonl", "--n", "25"]).status.success());
    for name in ["m1.jsonl", "m2.jsonl"] {
        let args = [
            "train", "--corpus", "c.jsonl", "--seed", "7", "--iterations", "3", "--dim", "8", "--embed-dim", "8",
            "--metrics", name, "--checkpoint", "ck.json",
        ];
        let o = fringe(dir.path(), &args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("m1.jsonl")).unwrap();
    let b = fs::read(dir.path().join("m2.jsonl")).unwrap();
    assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 3);
    assert_eq!(a, b);
}

#[test]
fn generated_corpus_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.jsonl", "b.jsonl"] {
        assert!(fringe(dir.path(), &["gen-corpus", "--out", out, "--n", "20", "--seed", "11"]).status.success());
    }
    assert_eq!(fs::read(dir.path().join("a.jsonl")).unwrap(), fs::read(dir.path().join("b.jsonl")).unwrap());
}

#[test]
fn proved_scripts_replay_and_wrong_ones_fail() {
    let dir = workspace();
    let p = dir.path();
    let o = fringe(p, &["prove", "p /\\ q ==> p /\\ q", "--checkpoint", "ck.json", "--out", "s.txt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed = String::from_utf8(o.stdout).unwrap();
    assert!(printed.starts_with("Theorem goal:") && printed.trim_end().ends_with("QED"));
    assert_eq!(fs::read_to_string(p.join("s.txt")).unwrap(), printed);
    assert_eq!(fringe(p, &["replay", "s.txt"]).status.code(), Some(0));

    fs::write(p.join("bad.txt"), "Theorem t:\n  p /\\ q ==> p /\\ q\nProof\n  eq_tac\nQED\n").unwrap();
    let o = fringe(p, &["replay", "bad.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("step 1 (eq_tac)"), "{}", stderr(&o));

    fs::write(p.join("junk.txt"), "Theorem t:\n  p\nProof\n  frobnicate\nQED\n").unwrap();
    let o = fringe(p, &["replay", "junk.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn unprovable_goal_exits_one() {
    let dir = workspace();
    let o = fringe(dir.path(), &["prove", "p ==> q", "--checkpoint", "ck.json", "--attempts", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dot_export_has_one_node_per_fringe() {
    let dir = workspace();
    let p = dir.path();
    for goal in ["p /\\ q ==> p /\\ q", "(p ==> q) ==> (q ==> r) ==> p ==> r", "p ==> q"] {
        let o = fringe(p, &["export-dot", goal, "--checkpoint", "ck.json", "--corpus", "c.jsonl", "--out", "g.dot"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let fringes: usize = stderr(&o).split_whitespace().next().unwrap().parse().unwrap();
        let dot = fs::read_to_string(p.join("g.dot")).unwrap();
        let nodes = dot.lines().filter(|l| l.trim_start().starts_with('f') && !l.contains("->")).count();
        assert_eq!(nodes, fringes);
        assert!(dot.starts_with("digraph"));
    }
}

#[test]
fn eval_and_ablate_print_reports() {
    let dir = workspace();
    let p = dir.path();
    let o = fringe(p, &["eval", "--corpus", "c.jsonl", "--checkpoint", "ck.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("proved ") && out.contains("mean timesteps") && out.contains("mean proof length"));

    let o = fringe(
        p,
        &["ablate", "--corpus", "c.jsonl", "--checkpoint", "ck.json", "--strategy", "bfs-topk-2", "--strategy", "latest", "--json", "r.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.contains("bfs-topk-2") && table.contains("latest"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.join("r.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = workspace();
    let p = dir.path();
    fs::write(p.join("run.toml"), "corpus = \"c.jsonl\"\ncheckpoint = \"ck.json\"\nbudget = 3\n").unwrap();
    let o = fringe(p, &["--config", "run.toml", "eval"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = fringe(p, &["--config", "run.toml", "eval", "--corpus", "missing.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.jsonl"));
}
