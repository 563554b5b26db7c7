use std::process::ExitCode;

use clap::Parser;

use meanrev::config::parse_config;
use meanrev::runner::{exit_code, run};

/// Configuration-driven experiment runner for the mean-reversion laboratory.
#[derive(Parser, Debug)]
#[command(name = "meanrev", version, about)]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: String,

    /// Override the output directory from the config.
    #[arg(long)]
    output_dir: Option<String>,

    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Override the epsilon ladder, comma-separated and strictly decreasing
    /// (e.g. "0.2,0.1,0.05").
    #[arg(long)]
    epsilons: Option<String>,

    /// Parse and validate only; run nothing.
    #[arg(long)]
    dry_run: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    // MEANREV_WORKERS caps the rayon worker count for ensemble loops.
    if let Ok(workers) = std::env::var("MEANREV_WORKERS") {
        match workers.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("error: MEANREV_WORKERS must be a positive integer, got `{workers}`");
                return ExitCode::from(1);
            }
        }
    }

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config `{}`: {e}", cli.config);
            return ExitCode::from(1);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(dir) = cli.output_dir {
        config.output.directory = dir;
    }
    if let Some(seed) = cli.seed {
        config.output.master_seed = seed;
    }
    if let Some(eps) = cli.epsilons {
        let parsed: Result<Vec<f64>, _> = eps.split(',').map(|s| s.trim().parse()).collect();
        match parsed {
            Ok(values) if !values.is_empty() => config.numeric.epsilons = values,
            _ => {
                eprintln!("error: could not parse --epsilons `{eps}`");
                return ExitCode::from(1);
            }
        }
    }

    if cli.dry_run {
        println!(
            "config ok: {} experiment(s), output -> {}",
            config.experiment.len(),
            config.output.directory
        );
        return ExitCode::from(0);
    }

    let outcome = run(&config);
    match &outcome {
        Ok(manifest) => {
            for stage in &manifest.stages {
                println!("{}: {:.2}s", stage.stage, stage.seconds);
            }
            for file in &manifest.files {
                println!("wrote {} ({} bytes, sha256 {})", file.path, file.bytes, file.sha256);
            }
            println!(
                "{}",
                if manifest.all_passed {
                    "all checks passed"
                } else {
                    "CHECK FAILED"
                }
            );
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
