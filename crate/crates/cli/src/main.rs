use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use loopeq_cli::{exit, run_with_threads, CliError, Command, ExperimentConfig};

/// Batch runner for loop-equation experiments.
#[derive(Parser, Debug)]
#[command(name = "loopeq", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Cases per operation class for `verify-lemmas`.
    #[arg(long)]
    cases: Option<usize>,
    /// Output directory for CSV and JSON artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the library's parallel sections.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Config override, `key.path=value` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn resolve(args: &Args) -> Result<ExperimentConfig, CliError> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
        None => "{}".to_string(),
    };
    let mut ov = args.overrides.clone();
    if let Some(s) = args.seed {
        ov.push(format!("sampling.seed={s}"));
    }
    if let Some(s) = args.samples {
        ov.push(format!("sampling.samples={s}"));
    }
    if let Some(c) = args.cases {
        ov.push(format!("lemmas.cases={c}"));
    }
    if let Some(o) = &args.out {
        ov.push(format!("output.dir={}", serde_json::Value::String(o.display().to_string())));
    }
    ExperimentConfig::from_json(&text, &ov)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { exit::OK as u8 });
        }
    };
    let result = resolve(&args).and_then(|cfg| {
        if args.threads == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        let out = run_with_threads(args.command, &cfg, args.threads)?;
        let files = out.write(&cfg, &cfg.output.dir)?;
        Ok((out, files))
    });
    match result {
        Ok((out, files)) => {
            for c in &out.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(if out.passed() { exit::OK } else { exit::ASSERTION } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
