use std::path::PathBuf;
use std::process::ExitCode;

use bicomb_cli::config::{default_out, OUT_ENV};
use bicomb_cli::{plot, run, tightspan, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bicomb", version, about = "Property sweeps for bicombed metric spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the checks named in a TOML config (or a manifest.json).
    Verify {
        config: PathBuf,
        /// Output directory; overrides the config and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metric, four-point constant and extremal samples of a graph.
    Tightspan {
        graph: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, env = OUT_ENV)]
        out: Option<PathBuf>,
    },
    /// SVG histograms and curves for report files.
    Plot {
        reports: Vec<PathBuf>,
        #[arg(long, env = OUT_ENV)]
        out: Option<PathBuf>,
    },
}

fn usage(e: anyhow::Error) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::from(EXIT_USAGE)
}

fn verdict(passed: bool) -> ExitCode {
    ExitCode::from(if passed { EXIT_PASS } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS });
        }
    };
    match cli.cmd {
        Cmd::Verify { config, out } => match run::verify(&config, out.as_deref()) {
            Ok(v) => {
                for r in &v.results {
                    let p = &r.report;
                    println!(
                        "{:<5} {:<14} {:<22} max_violation={:e} tol={:e} ({:.2}s)",
                        if p.passed { "PASS" } else { "FAIL" },
                        p.space,
                        p.check,
                        p.max_violation,
                        p.tol,
                        r.seconds
                    );
                    if !p.passed {
                        println!("      witness: {}", p.witness);
                    }
                }
                println!("reports in {}", v.dir.display());
                verdict(v.manifest.passed)
            }
            Err(e) => usage(e),
        },
        Cmd::Tightspan { graph, samples, seed, out } => {
            let out = out.unwrap_or_else(default_out);
            match tightspan::cmd(&graph, samples, seed, &out) {
                Ok(res) => {
                    let s = &res.summary;
                    println!("vertices={} edges={} delta={} diameter={}", s.vertices, s.edges, s.delta, s.diameter);
                    if let Some(t) = &s.tree {
                        println!("tree: {} nodes, edges {:?}", t.nodes, t.edges);
                    }
                    println!(
                        "covering radius: {} (max excess {:e})",
                        if res.report.passed { "PASS" } else { "FAIL" },
                        res.report.max_violation
                    );
                    println!("outputs in {}", out.display());
                    verdict(res.report.passed)
                }
                Err(e) => usage(e),
            }
        }
        Cmd::Plot { reports, out } => {
            let out = out.unwrap_or_else(default_out);
            match plot::cmd(&reports, &out) {
                Ok(files) => {
                    for f in files {
                        println!("{}", f.display());
                    }
                    verdict(true)
                }
                Err(e) => usage(e),
            }
        }
    }
}
