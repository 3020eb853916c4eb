//! Runs the bundled corpus and prints the summary table.

use pathforge::harness::{bench, render_table, HarnessConfig};

fn main() {
    let corpus = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus");
    let out = tempfile::tempdir().unwrap();
    let cfg = HarnessConfig {
        out_dir: out.path().to_path_buf(),
        all_paths: std::env::args().any(|a| a == "--all-paths"),
        ..HarnessConfig::default()
    };
    let report = bench(corpus.as_ref(), &cfg, None).expect("bench runs");
    print!("{}", render_table(&report));
}
