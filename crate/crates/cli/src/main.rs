use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod exit;

#[derive(Parser)]
#[command(name = "biphoton", version, about = "Biphoton tomography, OAM interface and hologram toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a 16-setting coincidence record from a state
    Simulate(SimulateArgs),
    /// Reconstruct the density matrix of a record (linear inversion and MLE)
    Reconstruct(ReconstructArgs),
    /// Fidelity and CHSH with Monte Carlo one-sigma uncertainties
    Report(ReportArgs),
    /// Run the OAM-to-polarization chain and compare with the Bell states
    OamMap(OamMapArgs),
    /// Write an SLM phase mask
    Holo(HoloArgs),
}

#[derive(Args)]
pub struct ModelArgs {
    /// Expected correlated coincidences summed over HH, HV, VH and VV
    #[arg(long, default_value_t = 2e4)]
    pub pairs: f64,
    /// Accidental coincidences per bin
    #[arg(long, default_value_t = 20.0)]
    pub accidental: f64,
    /// Environmental (stray-light) background per bin
    #[arg(long, default_value_t = 0.0)]
    pub env: f64,
    /// Decay time of the biphoton peak in ns
    #[arg(long, default_value_t = 50.0)]
    pub tau: f64,
    /// First bin of the biphoton peak
    #[arg(long, default_value_t = 100)]
    pub start_bin: usize,
    /// Number of histogram bins
    #[arg(long, default_value_t = 4096)]
    pub bins: usize,
    /// Bin width in ns
    #[arg(long, default_value_t = 1.0)]
    pub bin_width: f64,
    /// Integration window length in decay times
    #[arg(long, default_value_t = 8.0)]
    pub window_taus: f64,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Bell state to simulate (phi+, phi-, psi+, psi-)
    #[arg(long, conflicts_with = "rho", required_unless_present = "rho")]
    pub state: Option<String>,
    /// Density-matrix JSON file ({"re": [[..]], "im": [[..]]})
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// Mix the state with white noise, keeping this fraction (1 = unchanged)
    #[arg(long, default_value_t = 1.0)]
    pub keep: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Default Monte Carlo resampling rule stored in the record (net or raw-bins)
    #[arg(long)]
    pub resample: Option<String>,
    /// Output record file; JSON goes to stdout when omitted
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RecordInput {
    /// Record JSON file
    #[arg(long, conflicts_with = "csv", required_unless_present = "csv")]
    pub record: Option<PathBuf>,
    /// Histogram CSV (bin_index,count) for one setting, as SETTING=PATH; repeat for all 16
    #[arg(long, value_name = "SETTING=PATH")]
    pub csv: Vec<String>,
    /// Integration window START,END (bins, end exclusive) for CSV input
    #[arg(long, value_name = "START,END", requires = "csv")]
    pub window: Option<String>,
    /// Background region START,END for CSV input
    #[arg(long, value_name = "START,END", requires = "csv")]
    pub tail: Option<String>,
    /// Bin width in ns for CSV input
    #[arg(long, default_value_t = 1.0)]
    pub csv_bin_width: f64,
    /// Environmental background per bin for CSV input
    #[arg(long, default_value_t = 0.0)]
    pub csv_env: f64,
}

#[derive(Args)]
pub struct MleArgs {
    #[arg(long, default_value_t = 5000)]
    pub max_iterations: usize,
    /// Stop when the gradient infinity norm falls below this value
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    /// Start MLE from I/4 instead of the clipped linear inversion
    #[arg(long)]
    pub mixed_start: bool,
}

#[derive(Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub input: RecordInput,
    #[command(flatten)]
    pub mle: MleArgs,
    /// Exit with status 3 if MLE does not converge
    #[arg(long)]
    pub strict: bool,
    /// Also print fidelities to this Bell state
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub input: RecordInput,
    #[command(flatten)]
    pub mle: MleArgs,
    /// Target Bell state
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Resampling rule (net or raw-bins); defaults to the record's rule
    #[arg(long)]
    pub resample: Option<String>,
    /// Reconstruction method used inside each trial (mle or linear)
    #[arg(long, default_value = "mle")]
    pub method: String,
    /// Also write the report as JSON
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct OamMapArgs {
    /// Chain JSON ({"c": {"0": 0.0, "1": 1.0}, "rotated": false, "theta_rad": 0.0})
    #[arg(long, conflicts_with_all = ["c0", "c1", "rotated", "theta"])]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Rotate the anti-Stokes hologram by 180°
    #[arg(long)]
    pub rotated: bool,
    /// EPM phase in radians
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Print JSON instead of a table
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct HoloArgs {
    /// spiral, blazed, lh, lv, ld, la, ll, lr, dual or dual-rot
    #[arg(long)]
    pub kind: String,
    /// Topological charge for spiral masks
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub l: i32,
    /// Grating period in pixels
    #[arg(long, default_value_t = 16.0)]
    pub period: f64,
    #[arg(long, default_value = "1080x1080", value_name = "WxH")]
    pub size: String,
    #[arg(long, short)]
    pub out: PathBuf,
    /// pgm or png; inferred from the file extension when omitted
    #[arg(long)]
    pub format: Option<String>,
    /// Turn the finished mask by 180°
    #[arg(long)]
    pub rot: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::Report(a) => commands::report(a),
        Command::OamMap(a) => commands::oam_map(a),
        Command::Holo(a) => commands::holo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_for(&err))
        }
    }
}
