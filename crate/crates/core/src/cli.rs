//! Command-line front end: `generate`, `cover`, `fuzz` and `compare`.
//!
//! Exit status: 0 on success, 1 on model diagnostics, script errors or
//! failed checks, 2 on internal or I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::coverage::{annotate_unreachable, render_table, run_suite, run_suite_text};
use crate::driver::{dump_traces, ExploreConfig};
use crate::fuzz::{fuzz, test_inputs, FuzzConfig};
use crate::model::{parse_model, Model};
use crate::oracle::brute_force_reach;
use crate::pipeline::{compare, generate, render_comparison, summary_line, GenerateOptions};
use crate::suite::{emit_ssm, manifest, parse_ssm, MinimizeMode};
use crate::sym::ForkMode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

/// Per-cycle input valuations above which `cover` skips the unreachable
/// objective listing.
const REACH_CAP: u128 = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "sspc-testgen",
    version,
    about = "Symbolic test generation for state-machine models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MinimizeArg {
    Full,
    Branch,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MinimizeByArg {
    Full,
    Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ForkArg {
    Decision,
    Condition,
}

#[derive(Debug, Clone, clap::Args)]
pub struct GenArgs {
    /// Objective set for suite minimization.
    #[arg(long, value_enum, default_value = "full")]
    pub minimize: MinimizeArg,
    /// Alias selecting the minimization objective set.
    #[arg(long, value_enum)]
    pub minimize_by: Option<MinimizeByArg>,
    /// Keep every feasible path as a test.
    #[arg(long)]
    pub no_minimize: bool,
    /// Per-query solver budget in milliseconds.
    #[arg(long, env = "SSPC_SOLVER_BUDGET_MS", default_value_t = 100,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub solver_budget_ms: u64,
    /// Stop exploring after this many paths.
    #[arg(long)]
    pub max_paths: Option<usize>,
    /// Guard forking granularity.
    #[arg(long, value_enum, default_value = "condition")]
    pub fork_mode: ForkArg,
}

impl GenArgs {
    pub fn options(&self) -> GenerateOptions {
        let minimize = if self.no_minimize {
            MinimizeMode::Off
        } else {
            match (self.minimize_by, self.minimize) {
                (Some(MinimizeByArg::Branch), _) => MinimizeMode::Branch,
                (Some(MinimizeByArg::Full), _) => MinimizeMode::Full,
                (None, MinimizeArg::Full) => MinimizeMode::Full,
                (None, MinimizeArg::Branch) => MinimizeMode::Branch,
                (None, MinimizeArg::Off) => MinimizeMode::Off,
            }
        };
        GenerateOptions {
            explore: ExploreConfig {
                solver_budget: Duration::from_millis(self.solver_budget_ms),
                max_paths: self.max_paths,
                fork_mode: match self.fork_mode {
                    ForkArg::Decision => ForkMode::Decision,
                    ForkArg::Condition => ForkMode::Condition,
                },
            },
            minimize,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an SSM test suite covering all single-state paths.
    Generate {
        model: PathBuf,
        /// Output directory for the script, manifest.json and stats.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
        /// Write exploration statistics here instead of `<out>/stats.json`.
        #[arg(long)]
        stats_json: Option<PathBuf>,
        /// Write a per-cycle trace dump to this file.
        #[arg(long)]
        trace_dump: Option<PathBuf>,
    },
    /// Replay an SSM script and report model coverage.
    Cover {
        model: PathBuf,
        suite: PathBuf,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the mutation fuzzer and emit its queue as an SSM script.
    Fuzz {
        model: PathBuf,
        /// Number of mutants to execute.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long, default_value_t = 1)]
        rng_seed: u64,
        /// SSM script whose tests seed the queue; defaults to the first
        /// test of a symbolic suite.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare symbolic and fuzz coverage.
    Compare {
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
        rng_seeds: Vec<u64>,
        #[command(flatten)]
        gen: GenArgs,
    },
}

struct Failure(i32, String);

fn io_fail(what: &Path, e: std::io::Error) -> Failure {
    Failure(EXIT_INTERNAL, format!("{}: {e}", what.display()))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_fail(path, e))?;
    parse_model(&text).map_err(|errs| {
        let file = path.display().to_string();
        let lines: Vec<String> = errs.0.iter().map(|d| d.render(&file)).collect();
        Failure(EXIT_DIAGNOSTICS, lines.join("\n"))
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_fail(path, e))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "suite".into())
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Generate {
            model: path,
            out: dir,
            gen,
            stats_json,
            trace_dump,
        } => {
            let model = load_model(&path)?;
            let opts = gen.options();
            let g = generate(&model, &opts);
            let ssm_path = dir.join(format!("{}.ssm", stem(&path)));
            write_file(&ssm_path, &emit_ssm(&model, &g.suite))?;
            let m = manifest(&model, &g.suite, &g.exploration.traces);
            write_file(&dir.join("manifest.json"), &to_json(&m))?;
            let stats = g.stats(&model, opts.minimize);
            let stats_path = stats_json.unwrap_or_else(|| dir.join("stats.json"));
            write_file(&stats_path, &to_json(&stats))?;
            if let Some(p) = trace_dump {
                write_file(&p, &dump_traces(&model, &g.exploration.traces))?;
            }
            let _ = writeln!(out, "{}", summary_line(&stats));
            for f in &stats.faults {
                let _ = writeln!(
                    out,
                    "fault in cycle {} of {}: {}",
                    f.cycle, f.state, f.message
                );
            }
            if g.unresolved > 0 {
                let _ = writeln!(out, "warning: {} paths left unconcretized", g.unresolved);
            }
            let _ = writeln!(out, "wrote {}", ssm_path.display());
            Ok(EXIT_OK)
        }
        Command::Cover {
            model: path,
            suite,
            json,
        } => {
            let model = load_model(&path)?;
            let text = std::fs::read_to_string(&suite).map_err(|e| io_fail(&suite, e))?;
            let mut report = run_suite_text(&model, &text)
                .map_err(|e| Failure(EXIT_DIAGNOSTICS, format!("{}: {e}", suite.display())))?;
            if let Ok(reach) = brute_force_reach(&model, Some(REACH_CAP)) {
                annotate_unreachable(&model, &mut report, &reach);
            }
            let _ = write!(out, "{}", render_table(&model, &report));
            if let Some(p) = json {
                write_file(&p, &to_json(&report))?;
            }
            Ok(if report.failed_checks() > 0 {
                EXIT_DIAGNOSTICS
            } else {
                EXIT_OK
            })
        }
        Command::Fuzz {
            model: path,
            budget,
            rng_seed,
            seeds,
            out: dir,
        } => {
            let model = load_model(&path)?;
            let seed_tests = match seeds {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| io_fail(&p, e))?;
                    parse_ssm(&model, &text)
                        .map_err(|e| Failure(EXIT_DIAGNOSTICS, format!("{}: {e}", p.display())))?
                }
                None => generate(&model, &GenerateOptions::default())
                    .suite
                    .into_iter()
                    .take(1)
                    .collect(),
            };
            let seeds: Vec<_> = seed_tests.iter().map(|t| test_inputs(&model, t)).collect();
            let r = fuzz(
                &model,
                &seeds,
                &FuzzConfig {
                    iterations: budget,
                    rng_seed,
                },
            );
            let ssm_path = dir.join(format!("{}.fuzz.ssm", stem(&path)));
            write_file(&ssm_path, &emit_ssm(&model, &r.tests))?;
            write_file(
                &dir.join("manifest.json"),
                &to_json(&manifest(&model, &r.tests, &[])),
            )?;
            let report =
                run_suite(&model, &r.tests).map_err(|e| Failure(EXIT_INTERNAL, e.to_string()))?;
            let _ = writeln!(
                out,
                "{}: {} executions, {} queued tests, objectives {}/{} ({}%)",
                model.name,
                r.executions,
                r.tests.len(),
                report.hit,
                report.total,
                report.percent
            );
            let _ = writeln!(out, "wrote {}", ssm_path.display());
            Ok(EXIT_OK)
        }
        Command::Compare {
            model: path,
            budget,
            rng_seeds,
            gen,
        } => {
            let model = load_model(&path)?;
            let c = compare(&model, &gen.options(), budget, &rng_seeds);
            let _ = write!(out, "{}", render_comparison(&c));
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_DIAGNOSTICS;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "{msg}");
            code
        }
    }
}
