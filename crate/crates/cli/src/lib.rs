//! `supint`: simulations, Poincaré sections, isopotential maps and
//! verification suites over the superintegrable catalog.
//!
//! Exit codes: 0 success, 1 failed check or runtime error, 2 usage or
//! configuration error, 3 truncated trajectory, 4 empty section.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod contour;
pub mod figures;
pub mod svg;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::checks::{run_suite, SUITES};
use crate::commands::{catalog_text, run_isopotential, run_poincare, run_simulate, Globals};
use crate::config::is_config_error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TRUNCATED: i32 = 3;
pub const EXIT_EMPTY_SECTION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "supint", version, about = "Superintegrable systems toolkit")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog potentials, their parameters and charts.
    Catalog {
        #[arg(long)]
        json: bool,
    },
    /// Integrate every initial condition and tabulate the integrals.
    Simulate,
    /// Poincaré section of every initial condition.
    Poincare,
    /// Isopotential map of a platonic potential on the sphere.
    Isopotential {
        /// Levels per sign; overrides the configuration.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Run a verification suite, or `all`.
    Check {
        #[arg(value_parser = suite_names())]
        suite: String,
    },
}

fn suite_names() -> clap::builder::PossibleValuesParser {
    let mut names: Vec<&str> = SUITES.to_vec();
    names.push("all");
    clap::builder::PossibleValuesParser::new(names)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let globals = Globals {
        config: cli.config.clone(),
        seed: cli.seed,
        jobs: cli.jobs,
        out: cli.out.clone(),
    };
    if globals.jobs == Some(0) {
        let _ = writeln!(stderr, "error: --jobs must be at least 1");
        return EXIT_USAGE;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = globals.jobs {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(&cli.command, &globals, &mut buf));
    let _ = stdout.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            if is_config_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn dispatch(command: &Command, globals: &Globals, out: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Catalog { json } => {
            write!(out, "{}", catalog_text(*json)?)?;
            Ok(EXIT_OK)
        }
        Command::Simulate => {
            let cfg = globals.load_config()?;
            let run = run_simulate(&cfg, globals)?;
            for (id, i, traj, drifts) in &run.runs {
                let summary: Vec<String> = drifts
                    .iter()
                    .map(|d| format!("{} {:.3e}", d.name, d.relative))
                    .collect();
                writeln!(
                    out,
                    "{id}/{i}: t = {:.6}, {} steps, {} rejections; relative drift: {}",
                    traj.t_end(),
                    traj.stats.steps,
                    traj.stats.rejections,
                    summary.join(", ")
                )?;
            }
            for f in &run.files {
                writeln!(out, "wrote {}", f.display())?;
            }
            for t in &run.truncations {
                writeln!(
                    out,
                    "truncated {}/{} at t = {:.6}: {}",
                    t.set, t.trajectory, t.t_end, t.reason
                )?;
            }
            Ok(if run.truncations.is_empty() {
                EXIT_OK
            } else {
                EXIT_TRUNCATED
            })
        }
        Command::Poincare => {
            let cfg = globals.load_config()?;
            let run = run_poincare(&cfg, globals)?;
            for (entry, (_, dev)) in run.sections.sets.iter().zip(&run.deviations) {
                let dev = dev.map_or("n/a".to_string(), |d| format!("{d:.3e}"));
                writeln!(
                    out,
                    "set {}: {} points, closed-curve deviation {dev}",
                    entry.id,
                    entry.points.len()
                )?;
                for r in &entry.truncated {
                    writeln!(out, "  truncated: {r}")?;
                }
            }
            if run.sections.tangential > 0 {
                writeln!(
                    out,
                    "skipped {} tangential crossings",
                    run.sections.tangential
                )?;
            }
            for f in &run.files {
                writeln!(out, "wrote {}", f.display())?;
            }
            if run.sections.total_points() == 0 {
                writeln!(out, "section is empty")?;
                return Ok(EXIT_EMPTY_SECTION);
            }
            Ok(EXIT_OK)
        }
        Command::Isopotential { levels } => {
            let cfg = globals.load_config()?;
            let run = run_isopotential(&cfg, globals, *levels)?;
            writeln!(
                out,
                "{} levels, zero-set distance {:.3e}",
                run.map.levels.len(),
                run.zero_set_distance
            )?;
            writeln!(out, "wrote {}", run.file.display())?;
            Ok(EXIT_OK)
        }
        Command::Check { suite } => {
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let mut ok = true;
            for name in names {
                let report = run_suite(name, &globals.out)?;
                write!(out, "{report}")?;
                ok &= report.passed();
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}
