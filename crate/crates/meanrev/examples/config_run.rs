//! Drive a full experiment from a TOML configuration, the same path the
//! `meanrev` binary takes: parse, validate, run, and inspect the manifest
//! with its per-file digests.
//!
//! Run with: cargo run -p meanrev --example config_run

use meanrev::config::parse_config;
use meanrev::runner::run;

fn main() {
    let config_path = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/quickstart.toml");
    let text = std::fs::read_to_string(config_path).expect("bundled config must exist");
    let mut config = parse_config(&text).expect("bundled config must parse");
    // Redirect output into a temporary directory for the demo.
    let out = std::env::temp_dir().join("meanrev-config-run");
    config.output.directory = out.to_string_lossy().into_owned();

    println!("running {} experiment(s) from {config_path}", config.experiment.len());
    let manifest = run(&config).expect("run should succeed");
    for stage in &manifest.stages {
        println!("  stage {:<24} {:.2}s", stage.stage, stage.seconds);
    }
    println!("emitted files:");
    for file in &manifest.files {
        println!("  {:<28} {:>8} bytes  sha256 {}", file.path, file.bytes, &file.sha256[..16]);
    }
    println!(
        "all checks passed: {} (exit status would be {})",
        manifest.all_passed,
        if manifest.all_passed { 0 } else { 2 }
    );

    // Strict parsing: a typo is rejected with the offending key named.
    let typo = text.replace("epsilons", "epsilonn");
    match parse_config(&typo) {
        Err(e) => println!("\ntypo rejected as expected: {e}"),
        Ok(_) => println!("\nunexpected: typo accepted"),
    }
}
