use std::collections::BTreeMap;
use std::path::Path;

use mflab::{run_file, RunOptions};

fn reports(name: &str, threads: usize) -> BTreeMap<String, Vec<u8>> {
    let dir = tempfile::tempdir().unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"));
    let opts = RunOptions { out_dir: Some(dir.path().to_path_buf()), seed: None, threads: Some(threads) };
    run_file(&path, &opts).unwrap();
    std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    for name in ["w1_suite", "chaos_opinion", "consensus", "heat_schedule", "flocking_graph_limit"] {
        let one = reports(name, 1);
        let four = reports(name, 4);
        assert!(!one.is_empty());
        assert_eq!(one, four, "{name}");
        assert_eq!(one, reports(name, 1), "{name} repeated");
    }
}

#[test]
fn seed_override_changes_random_reports() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/consensus.toml");
    run_file(&path, &RunOptions { out_dir: Some(dir_a.path().into()), seed: Some(1), threads: Some(2) }).unwrap();
    run_file(&path, &RunOptions { out_dir: Some(dir_b.path().into()), seed: Some(2), threads: Some(2) }).unwrap();
    let a = std::fs::read(dir_a.path().join("consensus_moments.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("consensus_moments.csv")).unwrap();
    assert_ne!(a, b);
}
