use affine_frames_cli::{catalog, load, run, scenario, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "affine-frames",
    version,
    about = "Run affine-frame scenarios and write verdict reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a shipped scenario by name).
    Run {
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        /// Override a knob, e.g. `analysis.0.r=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Cap the worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the shipped scenarios.
    List,
    /// Print a scenario with every default filled in.
    Describe { scenario: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            for e in catalog::SCENARIOS {
                let desc = scenario::parse(e.text, &[]).map(|s| s.description).unwrap_or_default();
                println!("{:<26} {}", e.name, desc);
            }
            EXIT_PASS
        }
        Command::Describe { scenario: src } => {
            match load(&src, &[]).and_then(|(s, _)| scenario::to_toml(&s.resolved())) {
                Ok(text) => {
                    print!("{text}");
                    EXIT_PASS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    EXIT_ERROR
                }
            }
        }
        Command::Run {
            scenario: src,
            out,
            set,
            workers,
        } => run_command(&src, &out, &set, workers),
    };
    ExitCode::from(code as u8)
}

fn run_command(src: &str, out: &std::path::Path, set: &[String], workers: Option<usize>) -> i32 {
    let go = || -> anyhow::Result<i32> {
        let (s, dir) = load(src, set)?;
        let report = match workers {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()?
                .install(|| run(&s, dir.as_deref(), out, workers))?,
            None => run(&s, dir.as_deref(), out, None)?,
        };
        for a in &report.analyses {
            println!(
                "[{}] {:<14} {}  {}",
                a.index,
                a.kind,
                if a.pass { "PASS" } else { "FAIL" },
                a.verdict
            );
        }
        println!("report written to {}", out.join("report.json").display());
        Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
    };
    go().unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        EXIT_ERROR
    })
}
