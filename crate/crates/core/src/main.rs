use std::process::ExitCode;

use clap::Parser;
use probecap::cli::{cmd_cutoff, cmd_oracle, cmd_simulate, cmd_solve, Cli, Command};

fn threads_from_env() {
    if let Some(n) = std::env::var("PROBECAP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn run(cli: Cli) -> probecap::Result<bool> {
    match cli.command {
        Command::Solve(cfg) => {
            let out = cmd_solve(&cfg)?;
            println!("# {}", out.method);
            for line in &out.summary {
                println!("{line}");
            }
            for (g, e) in &out.failed {
                eprintln!("failed at Γ={g}: {e}");
            }
            for p in &out.written {
                eprintln!("wrote {}", p.display());
            }
            Ok(out.failed.is_empty())
        }
        Command::Cutoff(cfg) => {
            let r = cmd_cutoff(&cfg)?;
            println!("cutoff Γ*={:.4} (value tolerance {:e} bits, max {:.6})", r.cutoff, r.tol, r.max_value);
            Ok(true)
        }
        Command::Simulate(cfg) => {
            let r = cmd_simulate(&cfg)?;
            if cfg.out.is_none() {
                println!("{}", serde_json::to_string_pretty(&r).unwrap_or_default());
            }
            Ok(true)
        }
        Command::Oracle(cfg) => {
            let r = cmd_oracle(&cfg)?;
            if cfg.out.is_none() {
                println!("{}", serde_json::to_string_pretty(&r).unwrap_or_default());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    threads_from_env();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
