use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvqkd::channel_sim::NoiseKind;
use cvqkd::{Constellation, Detection, Modulation};

use crate::grid::Grid;

#[derive(Debug, Parser)]
#[command(name = "cvqkd", version, about = "Key rates, capacities, Wigner functions and end-to-end simulations for discrete-modulation CV-QKD")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Secret key rate per symbol against fibre length.
    Keyrate(KeyrateArgs),
    /// Gaussian and binary-input AWGN capacities against SNR.
    Capacity(CapacityArgs),
    /// Two-mode correlation Z of the two-state, four-state and Gaussian sources.
    Correlation(CorrelationArgs),
    /// Channel simulation, parameter estimation and reverse reconciliation.
    Simulate(SimulateArgs),
    /// Wigner function of a single-mode state on a phase-space grid.
    Wigner(WignerArgs),
    /// Print the JSON schema of an output document.
    Schema {
        #[arg(value_enum)]
        document: SchemaDoc,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemaDoc {
    /// `--format json` output of keyrate, capacity and correlation.
    Table,
    /// The simulate report.
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModulationArg {
    TwoState,
    FourState,
    Gaussian,
}

impl From<ModulationArg> for Modulation {
    fn from(m: ModulationArg) -> Self {
        match m {
            ModulationArg::TwoState => Modulation::TwoState,
            ModulationArg::FourState => Modulation::FourState,
            ModulationArg::Gaussian => Modulation::Gaussian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectionArg {
    Homodyne,
    Heterodyne,
}

impl From<DetectionArg> for Detection {
    fn from(d: DetectionArg) -> Self {
        match d {
            DetectionArg::Homodyne => Detection::Homodyne,
            DetectionArg::Heterodyne => Detection::Heterodyne,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstellationArg {
    Two,
    Four,
}

impl From<ConstellationArg> for Constellation {
    fn from(c: ConstellationArg) -> Self {
        match c {
            ConstellationArg::Two => Constellation::Two,
            ConstellationArg::Four => Constellation::Four,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Uniform,
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KeyratePreset {
    /// Two-state protocol, V_A optimized per distance, ξ ∈ {0.001, 0.0015, 0.002}.
    Fig4,
    /// Four-state protocol, homodyne, V_A = 0.25, ξ from 0.002 to 0.01.
    Fig6,
    /// As fig6 with heterodyne detection.
    #[value(name = "fig6-het")]
    Fig6Het,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CapacityPreset {
    /// s from 10⁻³ to 10², logarithmic.
    Fig7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrelationPreset {
    /// V_A from 0.01 to 1.
    Fig5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    /// Alice's measurement basis state ψ_k.
    Psi,
    /// Eigenvector φ_k of Bob's mixture.
    Phi,
    /// The k-th coherent state of the constellation.
    Coherent,
    Vacuum,
}

/// Either α or V_A, never both.
#[derive(Debug, Clone, Args)]
#[group(multiple = false)]
pub struct VarianceArgs {
    /// Coherent-state amplitude α (V_A = 2α²).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Modulation variance V_A in shot-noise units.
    #[arg(long = "va")]
    pub v_a: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TableOutput {
    /// Write to this file instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct KeyrateArgs {
    /// Start from a figure's parameters; explicit flags override them.
    #[arg(long, value_enum)]
    pub preset: Option<KeyratePreset>,
    #[arg(long, value_enum)]
    pub modulation: Option<ModulationArg>,
    #[command(flatten)]
    pub variance: VarianceArgs,
    /// Re-optimize V_A at every distance over this grid.
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub optimize_va: Option<Grid>,
    /// Reconciliation efficiency β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Detector efficiency η.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Excess noise values ξ, one curve each.
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub xi: Option<Grid>,
    /// Fibre lengths in km (0.2 dB/km).
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub distances: Option<Grid>,
    #[arg(long, value_enum)]
    pub detection: Option<DetectionArg>,
    #[command(flatten)]
    pub out: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct CapacityArgs {
    #[arg(long, value_enum)]
    pub preset: Option<CapacityPreset>,
    /// Signal-to-noise ratios; defaults to the fig7 grid.
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub snr: Option<Grid>,
    #[command(flatten)]
    pub out: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelationArgs {
    #[arg(long, value_enum)]
    pub preset: Option<CorrelationPreset>,
    /// Modulation variances; defaults to the fig5 grid.
    #[arg(long = "va", value_name = "GRID", allow_hyphen_values = true)]
    pub v_a: Option<Grid>,
    #[command(flatten)]
    pub out: TableOutput,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModulationArg::FourState)]
    pub modulation: ModulationArg,
    #[command(flatten)]
    pub variance: VarianceArgs,
    /// Reconciliation efficiency used for the predicted key rate.
    #[arg(long, default_value_t = 0.8)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.6)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.005)]
    pub xi: f64,
    /// Fibre length in km (0.2 dB/km).
    #[arg(long, default_value_t = 10.0)]
    pub distance: f64,
    #[arg(long, value_enum, default_value_t = DetectionArg::Homodyne)]
    pub detection: DetectionArg,
    /// Number of symbols Alice sends.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, env = "CVQKD_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise: NoiseArg,
    /// Degrees of freedom of Student-t noise.
    #[arg(long, default_value_t = 8.0)]
    pub nu: f64,
    /// Repetition length; by default the smallest one that lifts the
    /// estimated SNR to the code's design SNR.
    #[arg(long)]
    pub k: Option<usize>,
    /// LDPC code in alist format; the shipped rate-1/10 code otherwise.
    #[arg(long, value_name = "PATH")]
    pub code: Option<PathBuf>,
    #[arg(long, default_value_t = cvqkd::reconciliation::DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
    /// Write the JSON report to this file instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn noise_kind(&self) -> NoiseKind {
        match self.noise {
            NoiseArg::Gaussian => NoiseKind::Gaussian,
            NoiseArg::Uniform => NoiseKind::Uniform,
            NoiseArg::StudentT => NoiseKind::StudentT { nu: self.nu },
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct WignerArgs {
    #[arg(long, value_enum)]
    pub state: StateArg,
    #[arg(long, value_enum, default_value_t = ConstellationArg::Four)]
    pub constellation: ConstellationArg,
    /// State index k within the constellation.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Coherent-state amplitude α.
    #[arg(long, conflicts_with = "alpha2")]
    pub alpha: Option<f64>,
    /// Mean photon number α².
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Axis grid used for both x and p.
    #[arg(long, value_name = "GRID", default_value = "-4:4:81", allow_hyphen_values = true)]
    pub grid: Grid,
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub x_grid: Option<Grid>,
    #[arg(long, value_name = "GRID", allow_hyphen_values = true)]
    pub p_grid: Option<Grid>,
    /// Photon-number cutoff; chosen from α² by default.
    #[arg(long)]
    pub n_cut: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
