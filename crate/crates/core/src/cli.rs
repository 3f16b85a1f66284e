//! Command-line front end: construction, certificate verification, bound
//! tables and brute-force dichromatic checks.
//!
//! Exit codes: 0 success, 1 verification or internal invariant failure,
//! 2 usage or domain error, 3 resource limit. All output is deterministic;
//! there is no randomness anywhere in the pipeline.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analysis::{self, AnalysisError, DEFAULT_BF_LIMIT};
use crate::builder::{self, BuildError, Construction, ConstructionReport};
use crate::digraph::{symmetric_cycle, Digraph};
use crate::trace::{HajosTrace, TraceError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

/// Environment variable overriding the default brute-force order limit.
pub const BF_LIMIT_ENV: &str = "HAJOS_BF_LIMIT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Human-readable report.
    Text,
    /// Stable `key=value` lines.
    Machine,
}

#[derive(Debug, Parser)]
#[command(
    name = "hajos",
    about = "Builds bidirected odd cycles from three-vertex complete digraphs using only \
             directed Hajos operations, with replayable certificates"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct the symmetric cycle of odd order N; write certificate and digraph files
    Construct {
        n: u64,
        /// Output directory for the .hajos and .digraph files
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Replay a certificate and check it yields the declared symmetric cycle
    Verify { trace: PathBuf },
    /// Tabulate operation bounds and complexity envelopes for odd orders 5..=N_MAX
    Bounds {
        n_max: u64,
        /// Also run each construction and report the actual operation count
        #[arg(long)]
        construct: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Brute-force the dichromatic number of a digraph file and print a witness
    Dichromatic {
        file: PathBuf,
        /// Maximum digraph order accepted by the exhaustive search
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Construct the order-(2^N+1) cycle, then reduce it to order 2M+1
    Reduce {
        n: u32,
        m: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Runs a parsed command, printing to stdout/stderr and returning the exit code.
pub fn run(config: CliConfig) -> i32 {
    match config.command {
        Command::Construct { n, out, format } => cmd_construct(n, &out, format),
        Command::Verify { trace } => cmd_verify(&trace),
        Command::Bounds {
            n_max,
            construct,
            format,
        } => cmd_bounds(n_max, construct, format),
        Command::Dichromatic { file, limit } => cmd_dichromatic(&file, limit),
        Command::Reduce { n, m, out, format } => cmd_reduce(n, m, &out, format),
    }
}

fn build_error_exit(e: &BuildError) -> i32 {
    match e {
        BuildError::EvenOrder(_)
        | BuildError::OrderTooSmall(_)
        | BuildError::ExponentTooSmall { .. }
        | BuildError::NotPowerOfTwoPlusOne(_)
        | BuildError::ReductionOutOfRange { .. }
        | BuildError::BoundDomain(_) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn build_error_message(e: &BuildError) -> String {
    match e {
        BuildError::EvenOrder(_) => "order must be odd".into(),
        other => other.to_string(),
    }
}

fn write_outputs(
    c: &Construction,
    out_dir: &Path,
    stem: &str,
) -> Result<(PathBuf, PathBuf), String> {
    fs::create_dir_all(out_dir).map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    let trace_path = out_dir.join(format!("{stem}.hajos"));
    let digraph_path = out_dir.join(format!("{stem}.digraph"));
    fs::write(&trace_path, c.trace.serialize())
        .map_err(|e| format!("cannot write {}: {e}", trace_path.display()))?;
    fs::write(&digraph_path, c.digraph.to_text())
        .map_err(|e| format!("cannot write {}: {e}", digraph_path.display()))?;
    Ok((trace_path, digraph_path))
}

fn report_lines(
    report: &ConstructionReport,
    format: Format,
    files: Option<(&Path, &Path)>,
) -> Vec<String> {
    let mut lines = Vec::new();
    match format {
        Format::Machine => {
            lines.push(format!("target_order={}", report.target_order));
            lines.push(format!("op_count={}", report.op_count));
            if let Some(b) = report.bound {
                lines.push(format!("bound={b}"));
            }
            if let Some((lo, hi)) = report.envelope {
                lines.push(format!("envelope_low={lo:.6}"));
                lines.push(format!("envelope_high={hi:.6}"));
            }
            if let Some(inside) = report.in_envelope() {
                lines.push(format!("in_envelope={inside}"));
            }
            for (name, ops) in &report.stages {
                lines.push(format!("stage.{name}={ops}"));
            }
            if let Some((t, d)) = files {
                lines.push(format!("trace_file={}", t.display()));
                lines.push(format!("digraph_file={}", d.display()));
            }
        }
        Format::Text => {
            lines.push(format!(
                "constructed symmetric cycle of order {}",
                report.target_order
            ));
            match report.bound {
                Some(b) => lines.push(format!("operations: {} (bound {b})", report.op_count)),
                None => lines.push(format!("operations: {}", report.op_count)),
            }
            if let (Some((lo, hi)), Some(inside)) = (report.envelope, report.in_envelope()) {
                lines.push(format!(
                    "envelope: {lo:.6} < {} < {hi:.6} ({})",
                    report.op_count,
                    if inside { "inside" } else { "OUTSIDE" }
                ));
            }
            for (name, ops) in &report.stages {
                lines.push(format!("  {name}: {ops} ops"));
            }
            if let Some((t, d)) = files {
                lines.push(format!("trace written to {}", t.display()));
                lines.push(format!("digraph written to {}", d.display()));
            }
        }
    }
    lines
}

fn emit_construction(c: &Construction, out_dir: &Path, stem: &str, format: Format) -> i32 {
    let (trace_path, digraph_path) = match write_outputs(c, out_dir, stem) {
        Ok(paths) => paths,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    for line in report_lines(&c.report, format, Some((&trace_path, &digraph_path))) {
        println!("{line}");
    }
    EXIT_OK
}

pub fn cmd_construct(n: u64, out_dir: &Path, format: Format) -> i32 {
    match builder::construct_odd_cycle(n) {
        Ok(c) => emit_construction(&c, out_dir, &format!("cycle_{n}"), format),
        Err(e) => {
            eprintln!("error: {}", build_error_message(&e));
            build_error_exit(&e)
        }
    }
}

pub fn cmd_verify(trace_path: &Path) -> i32 {
    let text = match fs::read_to_string(trace_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", trace_path.display());
            return EXIT_USAGE;
        }
    };
    let trace = match HajosTrace::parse(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("parse error: {e}");
            return EXIT_USAGE;
        }
    };
    let digraph = match trace.verify() {
        Ok(d) => d,
        Err(e @ TraceError::Replay { .. }) => {
            eprintln!("replay failed: {e}");
            return EXIT_FAIL;
        }
        Err(e) => {
            eprintln!("verification failed: {e}");
            return EXIT_FAIL;
        }
    };
    let order = trace.declared_order().expect("verified trace is finished");
    let expected = match symmetric_cycle(order) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("verification failed: declared order {order}: {e}");
            return EXIT_FAIL;
        }
    };
    if digraph != expected {
        eprintln!("verification failed: replayed digraph is not the canonical symmetric cycle of order {order}");
        return EXIT_FAIL;
    }
    println!(
        "OK: replayed to the symmetric cycle of order {order} in {} operations",
        trace.declared_ops()
    );
    EXIT_OK
}

pub fn cmd_bounds(n_max: u64, construct: bool, format: Format) -> i32 {
    if n_max < 5 {
        eprintln!("error: N_MAX must be at least 5");
        return EXIT_USAGE;
    }
    if format == Format::Text {
        println!(
            "{:>6} {:>10} {:>10} {:>14} {:>14}  in",
            "N", "bound", "ops", "envelope_low", "envelope_high"
        );
    }
    let mut failures = 0u64;
    for target in (5..=n_max).step_by(2) {
        let bound = match builder::hajos_bound(target) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_FAIL;
            }
        };
        let ops = if construct {
            match builder::construct_odd_cycle(target) {
                Ok(c) => Some(c.report.op_count),
                Err(e) => {
                    eprintln!("error constructing {target}: {e}");
                    return EXIT_FAIL;
                }
            }
        } else {
            None
        };
        let (lo, hi) = match builder::complexity_envelope(target) {
            Ok(pair) => pair,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_FAIL;
            }
        };
        let count = ops.unwrap_or(bound);
        let inside = lo < count as f64 && (count as f64) < hi;
        if !inside {
            failures += 1;
        }
        match format {
            Format::Text => {
                let ops_col = ops.map_or("-".to_string(), |o| o.to_string());
                println!(
                    "{target:>6} {bound:>10} {ops_col:>10} {lo:>14.6} {hi:>14.6}  {}",
                    if inside { "yes" } else { "NO" }
                );
            }
            Format::Machine => {
                let ops_field = ops.map_or(String::new(), |o| format!(" ops={o}"));
                println!(
                    "N={target} bound={bound}{ops_field} envelope_low={lo:.6} envelope_high={hi:.6} in_envelope={inside}"
                );
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} orders fell outside the envelope");
        return EXIT_FAIL;
    }
    EXIT_OK
}

/// Brute-force limit: `--limit` beats the environment variable beats the default.
fn effective_limit(flag: Option<usize>) -> Result<usize, String> {
    if let Some(l) = flag {
        return Ok(l);
    }
    match std::env::var(BF_LIMIT_ENV) {
        Ok(s) => s
            .parse::<usize>()
            .map_err(|_| format!("invalid {BF_LIMIT_ENV} value `{s}`")),
        Err(_) => Ok(DEFAULT_BF_LIMIT),
    }
}

pub fn cmd_dichromatic(file: &Path, limit_flag: Option<usize>) -> i32 {
    let limit = match effective_limit(limit_flag) {
        Ok(l) => l,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let text = match fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return EXIT_USAGE;
        }
    };
    let digraph = match Digraph::from_text(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("parse error: {e}");
            return EXIT_USAGE;
        }
    };
    let cap = (digraph.order() as u32).max(1);
    match analysis::dichromatic_number(&digraph, cap, limit) {
        Ok((chi, witness)) => {
            println!("order={}", digraph.order());
            println!("chi_d={chi}");
            for (v, c) in &witness.colors {
                println!("color.{v}={c}");
            }
            EXIT_OK
        }
        Err(e @ AnalysisError::SizeLimit { .. }) => {
            eprintln!("error: {e}");
            EXIT_LIMIT
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}

pub fn cmd_reduce(n: u32, m: u64, out_dir: &Path, format: Format) -> i32 {
    match builder::construct_reduced_cycle(n, m) {
        Ok(c) => {
            let stem = format!("cycle_{}_from_{}", 2 * m + 1, (1u64 << n) + 1);
            emit_construction(&c, out_dir, &stem, format)
        }
        Err(e) => {
            eprintln!("error: {}", build_error_message(&e));
            build_error_exit(&e)
        }
    }
}
