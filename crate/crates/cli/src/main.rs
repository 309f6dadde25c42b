mod commands;
mod error;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypervol::kr::JRange;
use hypervol::tetra::EdgeParameter;

#[derive(Parser)]
#[command(
    name = "hypervol",
    version,
    about = "Volumes and quantum invariants of hyperbolic polyhedra"
)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Volume of one generalized tetrahedron.
    TetVolume {
        /// Six edge parameters in slot order 1..6, each `a:<angle>` or `p:<length>`.
        /// Values accept `pi/3`, `2pi/5` and `acos(1/3)`.
        #[arg(num_args = 6, value_name = "PARAM", value_parser = input::edge_parameter)]
        params: Vec<EdgeParameter>,
    },
    /// Reduce a polyhedron, solve the gluing equations and report its volume.
    Volume(VolumeArgs),
    /// Growth rates of the quantum invariant over a list of levels.
    Kr(KrArgs),
    /// Growth-rate scans of the all-equal 6j-symbol or the doubly truncated sum.
    Scan(ScanArgs),
    /// List the built-in polyhedra, or print one as JSON.
    Catalog { name: Option<String> },
}

#[derive(Args)]
pub struct VolumeArgs {
    /// Catalog name or path to a polyhedron JSON file.
    pub polyhedron: String,
    /// JSON list of moves to use instead of the default reduction.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Convergence tolerance on the angle-sum residual.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Seed for subsampling the multi-start grid.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the solved lengths as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the reduction as a Graphviz file.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Args)]
pub struct KrArgs {
    /// Catalog name or path to a polyhedron JSON file.
    pub polyhedron: String,
    /// Comma-separated odd levels.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub levels: Vec<i64>,
    /// JSON list of moves to recouple along.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Evaluate the network even where a closed-form sum is available.
    #[arg(long)]
    pub network: bool,
    /// Skip the geometric volume.
    #[arg(long)]
    pub no_volume: bool,
    /// Write `r,value` rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ScanMode {
    Sixj,
    DoublyTruncated,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum RangeArg {
    All,
    Odd,
}

impl From<RangeArg> for JRange {
    fn from(r: RangeArg) -> Self {
        match r {
            RangeArg::All => JRange::All,
            RangeArg::Odd => JRange::Odd,
        }
    }
}

#[derive(Args)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value = "sixj")]
    pub mode: ScanMode,
    /// Odd level.
    #[arg(long)]
    pub r: i64,
    /// First scanned spin.
    #[arg(long, default_value_t = 0)]
    pub from: u32,
    /// Last scanned spin (default: the largest admissible one).
    #[arg(long)]
    pub to: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub step: u32,
    /// Fixed spin `k` of the doubly truncated sum (default: (r−3)/3).
    #[arg(long)]
    pub k: Option<u32>,
    /// Internal spins of the doubly truncated sum.
    #[arg(long, value_enum, default_value = "all")]
    pub j_range: RangeArg,
    /// Write `k,angle,value,reference` rows as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(error::VALIDATION as u8);
        }
    }
    let result = match cli.command {
        Command::TetVolume { params } => commands::tet_volume(&params, cli.json),
        Command::Volume(args) => commands::volume(&args, cli.json),
        Command::Kr(args) => commands::kr(&args, cli.json),
        Command::Scan(args) => commands::scan(&args, cli.json),
        Command::Catalog { name } => commands::catalog(name.as_deref(), cli.json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
