//! `calu`: factor matrices, sweep scheduler settings, evaluate the
//! static-fraction model and convert between layouts.

mod config;
mod factor;
mod output;
mod simulate;

use std::fs;
use std::io::{self, BufReader, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use calu_core::layout::LayoutDump;
use calu_core::matrix::{read_matrix_market, write_matrix_market};
use calu_core::{CaluError, LayoutKind, LayoutMatrix, ModelInput, ModelOutput, Result, ThreadGrid};

use config::{default_block_size, Listed, Overrides, VERSION};

#[derive(Parser)]
#[command(
    name = "calu",
    version,
    about = "Multithreaded tiled LU with tournament pivoting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor one matrix and write a JSON report.
    Factor(Overrides),
    /// Factor one matrix under every combination of the listed settings; writes CSV.
    Sweep(Overrides),
    /// Evaluate the static-fraction model from a JSON document.
    Model(ModelArgs),
    /// Virtual-time runs of every policy against the model prediction.
    Simulate(Overrides),
    /// Convert a matrix between storage layouts.
    Convert(ConvertArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Input JSON; stdin when absent or `-`.
    input: Option<PathBuf>,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    /// MatrixMarket file or JSON layout dump.
    input: PathBuf,
    #[arg(long, default_value = "bcl")]
    layout: LayoutKind,
    /// Worker grid as ROWSxCOLS; defaults to the input dump's grid or 1x1.
    #[arg(long)]
    grid: Option<ThreadGrid>,
    #[arg(long = "block-size", short = 'b')]
    block_size: Option<usize>,
    /// Output path; `.mtx` writes MatrixMarket, anything else a JSON dump.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ModelReport {
    version: &'static str,
    input: ModelInput,
    #[serde(flatten)]
    output: ModelOutput,
}

fn cmd_model(args: ModelArgs) -> Result<()> {
    let text = match args.input.as_deref() {
        None => read_stdin()?,
        Some(p) if p == Path::new("-") => read_stdin()?,
        Some(p) => fs::read_to_string(p)?,
    };
    let input: ModelInput =
        serde_json::from_str(&text).map_err(|e| CaluError::Config(format!("model input: {e}")))?;
    let output = input.evaluate()?;
    output::json(
        args.out.as_deref(),
        &ModelReport {
            version: VERSION,
            input,
            output,
        },
    )
}

fn read_stdin() -> Result<String> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s)?;
    Ok(s)
}

fn is_mtx(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx"))
}

fn cmd_convert(args: ConvertArgs) -> Result<()> {
    let (dense, grid, b) = if is_mtx(&args.input) {
        let a = read_matrix_market(BufReader::new(fs::File::open(&args.input)?))?;
        let b = default_block_size(a.rows(), a.cols());
        (a, ThreadGrid::new(1, 1)?, b)
    } else {
        let dump: LayoutDump = serde_json::from_str(&fs::read_to_string(&args.input)?)
            .map_err(|e| CaluError::Config(format!("{}: {e}", args.input.display())))?;
        let src = LayoutMatrix::from_dump(&dump)?;
        (src.to_dense(), src.grid(), src.partition().b)
    };
    let grid = args.grid.unwrap_or(grid);
    let b = args.block_size.unwrap_or(b);
    let converted = LayoutMatrix::from_dense(&dense, b, args.layout, grid)?;
    match args.out.as_deref() {
        Some(p) if is_mtx(p) => write_matrix_market(
            io::BufWriter::new(fs::File::create(p)?),
            &converted.to_dense(),
        ),
        out => output::json(out, &converted.dump()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Factor(o) => o.resolve(Listed::None).and_then(factor::cmd_factor),
        Command::Sweep(o) => o.resolve(Listed::All).and_then(factor::cmd_sweep),
        Command::Simulate(o) => o
            .resolve(Listed::PolicyAndRatio)
            .and_then(simulate::cmd_simulate),
        Command::Model(a) => cmd_model(a),
        Command::Convert(a) => cmd_convert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("calu: {e}");
            ExitCode::FAILURE
        }
    }
}
