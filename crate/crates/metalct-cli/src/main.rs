use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use metalct::beamhardening::DataMode;
use metalct_cli::config::parse_mode;
use metalct_cli::{run, Overrides, RunConfig, Select};

/// Beam-hardening metal artifact experiments.
#[derive(Parser, Debug)]
#[command(name = "metalct", version)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// fct, fma, fma1, term:N, filtered, predict or scan.
    #[arg(long)]
    select: Option<Select>,
    #[arg(long, allow_hyphen_values = true)]
    filter_k: Option<f64>,
    #[arg(long)]
    filter_alpha: Option<f64>,
    /// Image grid size n (n × n pixels).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    offsets: Option<usize>,
    /// exact or series:N.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<DataMode>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let ov = Overrides {
        out: a.out,
        select: a.select,
        filter_k: a.filter_k,
        filter_alpha: a.filter_alpha,
        grid: a.grid,
        angles: a.angles,
        offsets: a.offsets,
        mode: a.mode,
        seed: a.seed,
    };
    let result = RunConfig::load(&a.config, &ov).map_err(Into::into).and_then(|cfg| run(&cfg));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("metalct: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
