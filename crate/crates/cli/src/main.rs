// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::Context;
use output::{emit, Cell, Format, Output};
use scenario::{Artifact, Scenario, SchemaError};

#[derive(Parser, Debug)]
#[command(name = "decolab", version, about = "Spin-bath decoherence, clock damping and feasibility runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the scenario file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Species preset for the environment; the needle is proton unless the scenario names one.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the environment size.
    #[arg(long, global = true)]
    n: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// |z(t)| and its clock-damped envelope on a time grid, with revival peaks.
    ZurekRun,
    /// Needle coherence and branch overlaps against environment size.
    CavityRun,
    /// The global observable: unitary, collapsed and damped values, K and the verdict.
    Despagnat,
    /// Every feasibility condition for a physical scenario.
    Feasibility,
    /// Undecidability margin of the three-spin example against θ.
    Undecide,
    /// Cross-validation of the analytic routines against the dense oracle.
    OracleCheck,
    /// Revival verdicts against environment size and the critical N.
    RevivalScan,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::ZurekRun => "zurek-run",
            Command::CavityRun => "cavity-run",
            Command::Despagnat => "despagnat",
            Command::Feasibility => "feasibility",
            Command::Undecide => "undecide",
            Command::OracleCheck => "oracle-check",
            Command::RevivalScan => "revival-scan",
        }
    }
}

/// 2 for bad input, 3 when the inputs leave a formula's regime, 1 otherwise.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<SchemaError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<decolab::Error>() {
        Some(decolab::Error::Parameter(_)) => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let scenario = match &cli.scenario {
        Some(path) => Scenario::load(path)?,
        None => Scenario::empty(),
    };
    if let Some(c) = &scenario.command {
        if c != cli.command.name() {
            let msg = format!("scenario is for \"{c}\", not \"{}\"", cli.command.name());
            return Err(scenario.field_error("command", msg).into());
        }
    }
    let ctx = Context { seed: cli.seed.unwrap_or(scenario.seed), scenario, preset: cli.preset.clone(), n: cli.n };
    let (out, ok): (Output, bool) = match cli.command {
        Command::ZurekRun => (commands::zurek_run(&ctx)?, true),
        Command::CavityRun => (commands::cavity_run(&ctx)?, true),
        Command::Despagnat => (commands::despagnat(&ctx)?, true),
        Command::Feasibility => (commands::feasibility(&ctx)?, true),
        Command::Undecide => (commands::undecide(&ctx)?, true),
        Command::OracleCheck => commands::oracle_check(&ctx)?,
        Command::RevivalScan => (commands::revival_scan_cmd(&ctx)?, true),
    };
    let s = &ctx.scenario;
    for path in emit(&out, &cli.out, cli.format, s.wants(Artifact::Table), s.wants(Artifact::Summary))? {
        println!("wrote {}", path.display());
    }
    println!("{}", serde_json::to_string_pretty(&out.summary)?);
    if cli.command == Command::OracleCheck {
        for row in &out.table.rows {
            if let [Cell::Text(name), Cell::Num(dev), Cell::Num(tol), Cell::Bool(pass)] = row.as_slice() {
                println!(
                    "{} {name}: max deviation {dev:.3e} (tolerance {tol:.0e})",
                    if *pass { "PASS" } else { "FAIL" }
                );
            }
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
