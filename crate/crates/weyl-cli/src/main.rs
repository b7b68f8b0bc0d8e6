//! `weyl`: folding tables, twisted local Weyl modules and verification
//! suites with machine-readable output.
//!
//! Exit codes: 0 success / all checks pass, 1 verification failure,
//! 2 usage or parse error.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use weyl_cli::report::{character_csv, to_json, verify_text, JobSpec};
use weyl_cli::{chispec, suites, FoldSession};
use weyl_core::rootdata::TypeLabel;

#[derive(Parser)]
#[command(name = "weyl", version, about = "exact computations for twisted loop algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Args)]
struct CommonOpts {
    /// Node permutation defining the diagram automorphism, 1-based,
    /// comma-separated (defaults to the identity).
    #[arg(long, value_delimiter = ',')]
    perm: Vec<usize>,
    /// Output format.
    #[arg(long, default_value = "json", value_parser = ["json", "csv", "text"])]
    format: String,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fold a root system along a diagram automorphism.
    Fold {
        /// Type label A-G.
        type_label: String,
        rank: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build the twisted local Weyl module of an equivariant function.
    Weyl {
        type_label: String,
        rank: usize,
        /// JSON map from points to weight coordinates, e.g. '{"2": [1,0]}'.
        #[arg(long)]
        chi: String,
        /// Complete the function with the symmetrizer instead of requiring
        /// equivariance.
        #[arg(long)]
        symmetrize: bool,
        /// Fixed ideal depth (default: deepen until stabilization).
        #[arg(long)]
        depth: Option<usize>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a verification suite.
    Verify {
        /// One of: jacobi, garland, embedding, hwalg.
        suite: String,
        #[arg(long = "type")]
        type_label: String,
        #[arg(long)]
        rank: usize,
        /// Folded dominant weight coordinates, comma-separated.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<i64>,
        /// Number of equivariant samples for the embedding suite.
        #[arg(long, default_value_t = 3)]
        samples: usize,
        /// Exponent bound for the hwalg suite.
        #[arg(long, default_value_t = 2)]
        bound: i64,
        /// Extra Garland exponents beyond the weight pairing.
        #[arg(long, default_value_t = 2)]
        margin: usize,
        /// Corrupt one action-table entry first (negative-control fixture).
        #[arg(long, hide = true)]
        corrupt: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn threads() -> usize {
    // WEYL_THREADS caps internal parallelism; the construction pipeline is
    // sequential and deterministic, so any cap is honored as written.
    std::env::var("WEYL_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn parse_type(s: &str) -> Result<TypeLabel, String> {
    TypeLabel::parse(s).ok_or_else(|| format!("unknown type label {s}"))
}

fn emit(common: &CommonOpts, text: String) -> Result<(), String> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

fn session_for(
    label: &str,
    rank: usize,
    common: &CommonOpts,
) -> Result<FoldSession, String> {
    let label = parse_type(label)?;
    let perm: Vec<usize> =
        if common.perm.is_empty() { (1..=rank).collect() } else { common.perm.clone() };
    FoldSession::new(label, rank, &perm)
}

fn job_spec(
    command: &str,
    label: &str,
    rank: usize,
    common: &CommonOpts,
    lambda: Option<Vec<i64>>,
    chi: Option<String>,
    depth: Option<usize>,
    bound: Option<i64>,
    samples: Option<usize>,
) -> JobSpec {
    JobSpec {
        command: command.to_string(),
        type_label: label.to_string(),
        rank,
        perm: if common.perm.is_empty() { (1..=rank).collect() } else { common.perm.clone() },
        lambda,
        chi,
        depth,
        bound,
        samples,
        format: common.format.clone(),
        threads: threads(),
    }
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fold { type_label, rank, common } => {
            let session = session_for(&type_label, rank, &common)?;
            let job = job_spec("fold", &type_label, rank, &common, None, None, None, None, None);
            let report = suites::run_fold(&session, job)?;
            let text = match common.format.as_str() {
                "text" => format!(
                    "g0 = {}{} | orbits {:?} | graded dims {:?}\n",
                    report.folded_type, report.folded_rank, report.orbits, report.graded_dims
                ),
                _ => to_json(&report),
            };
            emit(&common, text)?;
            Ok(true)
        }
        Command::Weyl { type_label, rank, chi, symmetrize, depth, common } => {
            let session = session_for(&type_label, rank, &common)?;
            let job = job_spec(
                "weyl",
                &type_label,
                rank,
                &common,
                None,
                Some(chi.clone()),
                depth,
                None,
                None,
            );
            let chi = chispec::parse_chi(
                &chi,
                session.alg.m,
                session.alg.rank(),
                &session.lifted.aut.perm,
                symmetrize,
            )?;
            let report = suites::run_weyl(&session, job, &chi)?;
            let text = match common.format.as_str() {
                "csv" => character_csv(&report.character0),
                "text" => format!(
                    "lambda0 {:?} | dim {} | depth {} | twisted-cyclic {}\n",
                    report.lambda0, report.dim, report.depth, report.twisted_cyclic
                ),
                _ => to_json(&report),
            };
            emit(&common, text)?;
            Ok(true)
        }
        Command::Verify {
            suite,
            type_label,
            rank,
            lambda,
            samples,
            bound,
            margin,
            corrupt,
            common,
        } => {
            let session = session_for(&type_label, rank, &common)?;
            let job = job_spec(
                "verify",
                &type_label,
                rank,
                &common,
                if lambda.is_empty() { None } else { Some(lambda.clone()) },
                None,
                None,
                Some(bound),
                Some(samples),
            );
            let report = match suite.as_str() {
                "jacobi" => suites::run_verify_jacobi(&session, job),
                "garland" => {
                    let lambdas = if lambda.is_empty() {
                        // default: the fundamental folded weights
                        (0..session.fd.rank0())
                            .map(|i| {
                                weyl_core::rootdata::Weight::fundamental(session.fd.rank0(), i)
                            })
                            .collect()
                    } else {
                        vec![suites::parse_lambda0(&session, &lambda)?]
                    };
                    suites::run_verify_garland(&session, job, &lambdas, margin, corrupt)?
                }
                "embedding" => {
                    let lam = suites::parse_lambda0(&session, &lambda)?;
                    suites::run_verify_embedding(&session, job, &lam, samples)?
                }
                "hwalg" => {
                    let lam = suites::parse_lambda0(&session, &lambda)?;
                    suites::run_verify_hwalg(&session, job, &lam, bound, 100)?
                }
                other => return Err(format!("unknown suite {other}")),
            };
            let text = match common.format.as_str() {
                "text" => verify_text(&report),
                _ => to_json(&report),
            };
            emit(&common, text)?;
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
