use std::fs;

use fringe_core::corpus::{generate_corpus, load_corpus, save_corpus, split, CorpusError, CorpusRecord, GeneratorConfig};
use fringe_core::kernel::{parse_term, term_is_tautology};
use proptest::prelude::*;

fn corpus(n: usize) -> Vec<CorpusRecord> {
    generate_corpus(&GeneratorConfig { n, seed: 9, ..GeneratorConfig::default() }).unwrap()
}

#[test]
fn save_then_load_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let records = corpus(40);
    save_corpus(&records, &path).unwrap();
    assert_eq!(load_corpus(&path).unwrap(), records);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 40);
}

#[test]
fn malformed_line_seven_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    save_corpus(&corpus(10), &path).unwrap();
    let mut lines: Vec<String> = fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
    lines[6] = "{\"name\": \"broken\"".into();
    fs::write(&path, lines.join("\n")).unwrap();
    let err = load_corpus(&path).unwrap_err();
    assert!(matches!(err, CorpusError::Malformed { line: 7, .. }), "{err}");
    assert!(err.to_string().contains("line 7"));
}

#[test]
fn non_tautologies_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let mut records = corpus(5);
    records[3].statement = "a1 ==> a2".into();
    save_corpus(&records, &path).unwrap();
    let err = load_corpus(&path).unwrap_err();
    assert!(matches!(&err, CorpusError::NotTautology { line: 4, name } if *name == records[3].name), "{err}");
}

#[test]
fn duplicate_names_and_bad_indices_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let mut records = corpus(5);
    records[4].name = records[0].name.clone();
    save_corpus(&records, &path).unwrap();
    assert!(matches!(load_corpus(&path), Err(CorpusError::DuplicateName { line: 5, .. })));

    let mut records = corpus(5);
    records[2].index = 7;
    save_corpus(&records, &path).unwrap();
    assert!(matches!(load_corpus(&path), Err(CorpusError::BadIndices { .. })));
}

#[test]
fn missing_file_is_an_io_error_naming_the_path() {
    let err = load_corpus(std::path::Path::new("/nonexistent/c.jsonl")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/c.jsonl"));
}

#[test]
fn default_corpus_is_all_tautologies() {
    let records = generate_corpus(&GeneratorConfig::default()).unwrap();
    assert_eq!(records.len(), 250);
    for r in &records {
        assert!(term_is_tautology(&parse_term(&r.statement).unwrap()).unwrap(), "{}", r.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn splits_are_disjoint_and_exhaustive(n in 2usize..60, ratio in 0.05f64..0.95, seed in any::<u64>()) {
        let records = corpus(n);
        let (a, b) = split(&records, ratio, seed);
        prop_assert_eq!(a.len(), (ratio * n as f64 - 1e-9).ceil() as usize);
        prop_assert_eq!(a.len() + b.len(), n);
        let mut idx: Vec<usize> = a.iter().chain(&b).map(|r| r.index).collect();
        idx.sort_unstable();
        prop_assert_eq!(idx, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(split(&records, ratio, seed), (a, b));
    }
}
