use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scert_core::ucp::SynthParams;

mod cmd;

#[derive(Parser)]
#[command(name = "scert", version)]
#[command(
    about = "Risk certificates and data-set sizes for scenario programs with additive uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a scenario set: complexity and a posteriori risk bound
    Certify(CertifyArgs),
    /// Compute data-set sizes for a target risk level
    Size(SizeArgs),
    /// Run the incremental sizing procedure on a unit-commitment instance
    RunIncremental(RunArgs),
    /// Empirical risk of a decision on a validation set
    Risk(RiskArgs),
    /// Greedy support list of a unit-commitment data set
    Support(SupportArgs),
    /// Generate synthetic daily demand profiles
    GenDemand(GenArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// Scenario CSV: one row per scenario, one column per constraint (b values)
    #[arg(long, value_name = "PATH")]
    scenarios: PathBuf,
    /// Confidence parameter beta, in (0, 1)
    #[arg(long, default_value_t = 1e-6)]
    beta: f64,
    /// Also write the report as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SizeMode {
    /// Smallest N with binomial tail below beta at q terms
    Oneshot,
    /// Smallest N with eps_{N,beta}(q) <= eps, plus the increment over oneshot
    Epsbased,
    /// Table of (j, M_j, beta_j, N_j) for the incremental procedure
    IncrementalSchedule,
}

#[derive(Args)]
struct SizeArgs {
    /// Number of constraints q (slots of the horizon for unit commitment)
    #[arg(long)]
    q: usize,
    /// Target risk level, in (0, 1); a comma separated list gives one row each
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    eps: Vec<f64>,
    /// Confidence parameter beta, in (0, 1)
    #[arg(long, default_value_t = 1e-6)]
    beta: f64,
    /// Sizing rule
    #[arg(long, value_enum, default_value_t = SizeMode::Oneshot)]
    mode: SizeMode,
    /// Also write the report as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SynthArgs {
    /// Demand level around which days fluctuate (GW)
    #[arg(long, default_value_t = SynthParams::default().base)]
    base: f64,
    /// Amplitude of the morning/evening double peak (GW)
    #[arg(long, default_value_t = SynthParams::default().daily_amp)]
    daily_amp: f64,
    /// Seasonal offset amplitude (GW)
    #[arg(long, default_value_t = SynthParams::default().season_amp)]
    season_amp: f64,
    /// Days per season
    #[arg(long, default_value_t = SynthParams::default().season_len)]
    season_len: usize,
    /// Standard deviation of the daily noise (GW)
    #[arg(long, default_value_t = SynthParams::default().noise_sd)]
    noise_sd: f64,
    /// Share of noise variance common to the whole day, in [0, 1]
    #[arg(long, default_value_t = SynthParams::default().day_corr)]
    day_corr: f64,
}

impl SynthArgs {
    fn params(&self) -> SynthParams {
        SynthParams {
            base: self.base,
            daily_amp: self.daily_amp,
            season_amp: self.season_amp,
            season_len: self.season_len,
            noise_sd: self.noise_sd,
            day_corr: self.day_corr,
        }
    }
}

#[derive(Args, Clone)]
struct UcArgs {
    /// Unit parameter file (TOML); the built-in four-unit instance when omitted
    #[arg(long, value_name = "PATH")]
    units: Option<PathBuf>,
    /// Slots per day; defaults to the unit file, the demand file or 24
    #[arg(long)]
    horizon: Option<usize>,
    /// Relative optimality gap at which branch-and-bound stops
    #[arg(long, default_value_t = 1e-9)]
    gap_tol: f64,
    /// Branch-and-bound node limit
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: usize,
    /// Demand tightening applied before solving (GW)
    #[arg(long, default_value_t = scert_core::ucp::DEFAULT_BACKOFF)]
    backoff: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunSolver {
    /// Solve the reduced unit-commitment problem by branch-and-bound
    Bb,
    /// Return xi* itself as the decision (no unit-commitment solve)
    Reduction,
    /// Write the reduced problem as an LP file and stop
    Export,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    uc: UcArgs,
    /// Demand CSV consumed row by row; synthetic days are drawn when omitted
    #[arg(long, value_name = "PATH")]
    demand: Option<PathBuf>,
    /// Seed of the synthetic demand stream; run r uses seed + r
    #[arg(long, required_unless_present = "demand")]
    seed: Option<u64>,
    /// Number of independent runs (synthetic demand only)
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Target risk level, in (0, 1)
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Confidence parameter beta, in (0, 1)
    #[arg(long, default_value_t = 1e-6)]
    beta: f64,
    /// What to do with the reduced problem at the stopping stage
    #[arg(long, value_enum, default_value_t = RunSolver::Bb)]
    solver: RunSolver,
    /// Output path of the LP file in export mode
    #[arg(long, value_name = "PATH", default_value = "reduced.lp")]
    lp_out: PathBuf,
    /// Write one CSV row per run
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write the complexity trace of every run as CSV
    #[arg(long, value_name = "PATH")]
    trace_csv: Option<PathBuf>,
    #[command(flatten)]
    synth: SynthArgs,
}

#[derive(Args)]
struct RiskArgs {
    /// Decision CSV with a single row g_1..g_q
    #[arg(long, value_name = "PATH")]
    decision: PathBuf,
    /// Validation scenario CSV
    #[arg(long, value_name = "PATH")]
    validation: PathBuf,
    /// Training scenario CSV; adds the risk of its xi* and the dominance count
    #[arg(long, value_name = "PATH")]
    training: Option<PathBuf>,
    /// Read files as demand (GW) and the decision as generation per slot
    #[arg(long)]
    demand_form: bool,
    /// Also write the report as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SupportMode {
    /// Re-solve the unit-commitment problem on each candidate list
    Uc,
    /// Use the column-wise minimum as the solution (no unit commitment)
    Reduction,
}

#[derive(Args)]
struct SupportArgs {
    #[command(flatten)]
    uc: UcArgs,
    /// Demand CSV (GW), one day per row
    #[arg(long, value_name = "PATH")]
    demand: PathBuf,
    /// Problem re-solved for every candidate list
    #[arg(long, value_enum, default_value_t = SupportMode::Uc)]
    mode: SupportMode,
    /// Max-norm tolerance on continuous variables when comparing solutions
    #[arg(long, default_value_t = 1e-6)]
    tol_cont: f64,
    /// Relative tolerance on the objective when comparing solutions
    #[arg(long, default_value_t = 1e-6)]
    tol_obj: f64,
    /// Confidence parameter beta for the risk bounds, in (0, 1)
    #[arg(long, default_value_t = 1e-6)]
    beta: f64,
    /// Also write the report as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Random seed
    #[arg(long)]
    seed: u64,
    /// Number of days
    #[arg(long)]
    days: usize,
    /// Slots per day
    #[arg(long, default_value_t = 24)]
    horizon: usize,
    /// Output CSV path
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    #[command(flatten)]
    synth: SynthArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Certify(a) => cmd::certify(&a),
        Command::Size(a) => cmd::size(&a),
        Command::RunIncremental(a) => cmd::run_incremental(&a),
        Command::Risk(a) => cmd::risk(&a),
        Command::Support(a) => cmd::support(&a),
        Command::GenDemand(a) => cmd::gen_demand(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
