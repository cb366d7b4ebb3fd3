use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const CONFIG_KEYS: &str = "\
Scenario file keys (TOML; unknown keys are rejected, `--override key=value`
sets any of them, e.g. `noise.seed=7`, `signals.0.target_snr_db=-3`):

  scenario_id                 label written to the CSVs [default: scenario]
  n_bins                      DFT size N, >= 4
  n_frames                    number of frames M
  sample_rate_hz              sample rate [default: 10e6]
  reference_noise_power_mw    noise power after rescaling [default: 1.0]
  subband_count               equal subbands the band is split into [default: 4]

  [noise]
  kind                        white-gaussian | surrogate-industrial | trace-file
  seed                        RNG seed for the synthetic kinds [default: 0]
  path                        raw float32 I/Q file for trace-file, relative to the config
  impulse_rate                surrogate: impulse probability per sample [default: 0.001]
  impulse_factor              surrogate: impulse magnitude / base RMS [default: 10]
  tilt_db_per_decade          surrogate: spectral slope [default: -3]

  [[signals]]                 rectangular signals, any number
  subband_index               0-based subband
  occupancy_fraction          centred fraction of the subband, in (0, 1] [default: 1]
  target_snr_db               whole-band SNR against the reference noise power
  amplitude_mv                fixed amplitude instead of target_snr_db
  frame_start, frame_end      active frames, end exclusive [default: all]

  [[noise_steps]]             noise power changes
  frame_start, frame_end      affected frames, end exclusive [default: to the end]
  gain_db                     noise power gain

  [run]
  window_frames               block length for MVU, AIC, CBE, MMSE [default: 100]
  cbe_grid_points             CBE grid size L [default: 100]
  cbe_occupancy               CBE signal occupancy; from ground truth if unset
  cbe_signal_count            CBE signal eigenvalue count; overrides the occupancy rule
  mmse_blind                  remove per-bin time means before MMSE [default: true]
  aic_penalty                 fixed-basis (2n) | eigen (n(2N-n)) [default: fixed-basis]
  rof.lambda1                 ROF energy-drop threshold, percent [default: 5]
  rof.lambda2                 ROF minimum band width / N [default: 0.05]
  rof.gate_db                 ROF band level above the median floor [default: 3]

Methods: ml:<sep>, mvu:<sep> with <sep> in ideal | fisher | rof; aic; cbe; mmse.

Environment: NPE_THREADS sets the worker thread count (default: all cores).
Exit codes: 0 ok, 1 internal error, 2 usage or config error, 3 degenerate data.";

#[derive(Debug, Parser)]
#[command(
    name = "npe",
    version,
    about = "Noise power and SNR estimation for spectrum sensing"
)]
#[command(after_long_help = CONFIG_KEYS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a scenario's time-domain samples as a raw float32 I/Q trace.
    Generate(GenerateArgs),
    /// Run methods over seeded scenarios; write series and report CSVs.
    Run(RunArgs),
    /// Separate one spectrum and dump the mask and separation diagnostics.
    Separate(SeparateArgs),
    /// Estimate noise power and SNR on a recorded trace (no ground truth).
    Estimate(EstimateArgs),
    /// Count operations of one estimation pass over a grid of sizes.
    Ops(OpsArgs),
    /// Convert I/Q traces between raw float32 and CSV.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Scenario file (TOML).
    #[arg(short, long)]
    pub config: PathBuf,
    /// Set a config key, `key=value`; repeatable.
    #[arg(short = 'o', long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
#[command(after_long_help = CONFIG_KEYS)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output trace.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(after_long_help = CONFIG_KEYS)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Comma-separated methods, e.g. `ml:rof,mvu:fisher,aic`; `all` for every combination.
    #[arg(short, long, default_value = "all")]
    pub methods: String,
    /// Seeds: `7`, `1,2,3`, `1..=50` or `1..51`. Defaults to `noise.seed`.
    #[arg(short, long)]
    pub seeds: Option<String>,
    /// Output directory for series.csv and report.csv.
    #[arg(long)]
    pub out: PathBuf,
    /// Record wall time per method in the report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SepMethod {
    Rof,
    Fisher,
}

#[derive(Debug, Args)]
#[command(after_long_help = CONFIG_KEYS)]
pub struct SeparateArgs {
    /// Scenario file; the spectrum is frame `--frame` of its block.
    #[arg(short, long, conflicts_with_all = ["trace", "spectrum"])]
    pub config: Option<PathBuf>,
    #[arg(
        short = 'o',
        long = "override",
        value_name = "KEY=VALUE",
        requires = "config"
    )]
    pub overrides: Vec<String>,
    /// Raw float32 I/Q trace; needs `--n-bins`.
    #[arg(long, conflicts_with = "spectrum", requires = "n_bins")]
    pub trace: Option<PathBuf>,
    /// Power spectrum, one value per line (a header line is allowed).
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
    /// DFT size for `--trace`.
    #[arg(long)]
    pub n_bins: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub frame: usize,
    #[arg(long, value_enum, default_value = "rof")]
    pub method: SepMethod,
    /// ROF parameters; default to the config's `run.rof` or the built-in defaults.
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub gate_db: Option<f64>,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Raw float32 I/Q trace.
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub n_bins: usize,
    /// Frames to use; defaults to all complete frames in the trace.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Comma-separated methods (ideal separation is not available).
    #[arg(short, long, default_value = "ml:rof,mvu:rof,aic,mmse")]
    pub methods: String,
    #[arg(long, default_value_t = 100)]
    pub window_frames: usize,
    /// Signal occupancy for CBE.
    #[arg(long)]
    pub cbe_occupancy: Option<f64>,
    /// Signal eigenvalue count for CBE; overrides `--cbe-occupancy`.
    #[arg(long)]
    pub cbe_signal_count: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub cbe_grid_points: usize,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OpsArgs {
    #[arg(short, long, default_value = "all")]
    pub methods: String,
    /// Comma-separated sizes n (n×n block), each >= 16.
    #[arg(long, default_value = "64,128,256,512")]
    pub sizes: String,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    /// Interleaved little-endian float32 I,Q.
    Iq,
    /// CSV with columns i,q.
    Csv,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Input format; guessed from the extension when absent.
    #[arg(long, value_enum)]
    pub from: Option<TraceFormat>,
    /// Output format; guessed from the extension when absent.
    #[arg(long, value_enum)]
    pub to: Option<TraceFormat>,
}
