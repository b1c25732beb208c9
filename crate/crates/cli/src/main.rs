//! `dbsteiner`: generators, solvers, exact oracles, experiments and
//! verification for degree-bounded directed and group Steiner tree.
//!
//! Exit codes: 0 ok, 2 infeasible, 3 size cap exceeded, 4 invariant
//! violation, 5 IO or parse failure.

mod experiment;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dbsteiner_core::dst_round::{run_dst, solve_dst_relaxation, DstRunParams, DstRunReport};
use dbsteiner_core::generate::{gen_dst, gen_gst, DstParams, GstParams};
use dbsteiner_core::gst_round::{run_gst, GstRunParams, GstRunReport};
use dbsteiner_core::lpcore::build_gst_lp;
use dbsteiner_core::oracle::{exact_dst, exact_gst};
use dbsteiner_core::states::DEFAULT_NODE_CAP;
use dbsteiner_core::treekit::default_height;
use dbsteiner_core::verify::{verify_dst_report, verify_gst_report};
use dbsteiner_core::{normalize, serialize_dst, serialize_gst};

use crate::io::{emit, emit_json, load, parse_range, CliError, Loaded};

#[derive(Debug, Parser)]
#[command(name = "dbsteiner", version, about = "Degree-bounded Steiner tree by LP rounding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Dst,
    Gst,
}

#[derive(Debug, Args)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DstKnobs {
    /// Height budget of the super-tree.
    #[arg(long)]
    height: Option<usize>,
    /// Super-tree node cap.
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Random directed instance with every terminal reachable.
    GenDst {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        d_max: u32,
        /// Edge cost range `lo..hi` (inclusive).
        #[arg(long, default_value = "1..9", value_parser = parse_range)]
        cost: (u64, u64),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Random rooted tree with disjoint leaf groups.
    GenGst {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        d_max: u32,
        /// Vertex cost range `lo..hi` (inclusive).
        #[arg(long, default_value = "1..9", value_parser = parse_range)]
        cost: (u64, u64),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Super-tree LP, `Q` roundings, union and tree extraction.
    SolveDst {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repetitions; defaults to ⌈(h+1)·ln(10k)⌉.
        #[arg(long)]
        q: Option<usize>,
        #[command(flatten)]
        knobs: DstKnobs,
        #[command(flatten)]
        output: Output,
    },
    /// Tree LP, scaling, `M` roundings and union.
    SolveGst {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repetitions; defaults to the calibrated value.
        #[arg(long)]
        m: Option<usize>,
        /// Upper bound on the scaling cap γ.
        #[arg(long)]
        gamma_cap: Option<u32>,
        #[command(flatten)]
        output: Output,
    },
    /// Exact optimum of a small directed instance.
    OracleDst {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Exact optimum of a small group instance.
    OracleGst {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Monte-Carlo experiment: LP, oracle comparison, per-rounding statistics
    /// and one full solve.
    Run(experiment::RunArgs),
    /// Re-checks a solve report against its instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// JSON report written by `solve-dst`, `solve-gst` or `run`.
        #[arg(long)]
        tree: PathBuf,
    },
    /// Indented listing of the super-tree of a directed instance.
    DumpSupertree {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        knobs: DstKnobs,
        #[command(flatten)]
        output: Output,
    },
    /// The LP relaxation in MPS format.
    DumpLp {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        knobs: DstKnobs,
        #[command(flatten)]
        output: Output,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(5) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dst_height(knobs: &DstKnobs, vertex_count: usize) -> usize {
    knobs.height.unwrap_or_else(|| default_height(vertex_count))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenDst { n, m, k, d_max, cost, seed, output } => {
            let inst = gen_dst(&DstParams { n, m, k, d_max, cost: cost.0..=cost.1 }, seed)?;
            emit(&output.out, &serialize_dst(&inst))
        }
        Command::GenGst { n, k, depth, d_max, cost, seed, output } => {
            let inst = gen_gst(&GstParams { n, k, depth, d_max, cost: cost.0..=cost.1 }, seed)?;
            emit(&output.out, &serialize_gst(&inst))
        }
        Command::SolveDst { instance, seed, q, knobs, output } => {
            let src = load(&instance)?.into_dst()?;
            let norm = normalize(&src)?;
            let params = DstRunParams {
                h: Some(dst_height(&knobs, norm.vertex_count())),
                q,
                seed,
                node_cap: knobs.node_cap,
                instance: instance.display().to_string(),
            };
            let report = run_dst(&norm, &params)?;
            emit_json(&output.out, &report)
        }
        Command::SolveGst { instance, seed, m, gamma_cap, output } => {
            let inst = load(&instance)?.into_gst()?;
            let params = GstRunParams { m, seed, gamma_cap, instance: instance.display().to_string() };
            emit_json(&output.out, &run_gst(&inst, &params)?)
        }
        Command::OracleDst { instance, output } => {
            let src = load(&instance)?.into_dst()?;
            emit_json(&output.out, &exact_dst(&src).map_err(dbsteiner_core::Error::from)?)
        }
        Command::OracleGst { instance, output } => {
            let inst = load(&instance)?.into_gst()?;
            emit_json(&output.out, &exact_gst(&inst).map_err(dbsteiner_core::Error::from)?)
        }
        Command::Run(args) => experiment::run(args),
        Command::Verify { instance, tree } => {
            let text = std::fs::read_to_string(&tree).map_err(|e| CliError::Io(tree.clone(), e))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Report(tree.clone(), e.to_string()))?;
            // `run` reports wrap the solve report under `solve`.
            let value = value.get("solve").cloned().unwrap_or(value);
            let issues = match load(&instance)? {
                Loaded::Dst(src) => {
                    let report: DstRunReport = serde_json::from_value(value)
                        .map_err(|e| CliError::Report(tree.clone(), e.to_string()))?;
                    verify_dst_report(&src, &report)
                }
                Loaded::Gst(inst) => {
                    let report: GstRunReport = serde_json::from_value(value)
                        .map_err(|e| CliError::Report(tree.clone(), e.to_string()))?;
                    verify_gst_report(&inst, &report)
                }
            };
            if issues.is_empty() {
                println!("ok");
                Ok(())
            } else {
                Err(CliError::Verify(issues))
            }
        }
        Command::DumpSupertree { instance, knobs, output } => {
            let norm = normalize(&load(&instance)?.into_dst()?)?;
            let h = dst_height(&knobs, norm.vertex_count());
            let st = dbsteiner_core::states::build_super_tree(&norm, h, knobs.node_cap)
                .map_err(dbsteiner_core::Error::from)?;
            emit(&output.out, &st.dump(&norm))
        }
        Command::DumpLp { instance, knobs, output } => match load(&instance)? {
            Loaded::Dst(src) => {
                let norm = normalize(&src)?;
                let h = dst_height(&knobs, norm.vertex_count());
                let relax = solve_dst_relaxation(&norm, h, knobs.node_cap);
                let model = match relax {
                    Ok(r) => r.lp.model,
                    Err(dbsteiner_core::Error::Infeasible(_)) => {
                        let st = dbsteiner_core::states::build_super_tree(&norm, h, knobs.node_cap)
                            .map_err(dbsteiner_core::Error::from)?;
                        dbsteiner_core::lpcore::build_dst_lp(&st, norm.terminals().len()).model
                    }
                    Err(e) => return Err(e.into()),
                };
                emit(&output.out, &model.to_mps("DBDST"))
            }
            Loaded::Gst(inst) => {
                let lp = build_gst_lp(&inst).map_err(dbsteiner_core::Error::from)?;
                emit(&output.out, &lp.model.to_mps("DBGST"))
            }
        },
    }
}
