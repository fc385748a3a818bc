use cvqkd::states::linspace;
use cvqkd::{Detection, Modulation, ProtocolConfig};

use crate::cli::{KeyrateArgs, KeyratePreset, SimulateArgs, VarianceArgs};
use crate::error::{usage, CliError};

/// Modulation variance used when neither `--va` nor `--alpha` is given.
pub const DEFAULT_V_A: f64 = 0.25;

/// Fully resolved parameters of a key-rate scan.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `v_a` is the fixed modulation variance, or the first grid point when
    /// `optimize_grid` is set.
    pub protocol: ProtocolConfig,
    pub optimize_grid: Option<Vec<f64>>,
    pub eta: f64,
    pub detection: Detection,
    pub xis: Vec<f64>,
    pub distances_km: Vec<f64>,
}

struct Defaults {
    modulation: Modulation,
    v_a: Option<f64>,
    optimize_grid: Option<Vec<f64>>,
    beta: f64,
    eta: f64,
    xis: Vec<f64>,
    distances_km: Vec<f64>,
    detection: Detection,
}

fn defaults(preset: Option<KeyratePreset>) -> Defaults {
    let fig6 = |detection| Defaults {
        modulation: Modulation::FourState,
        v_a: Some(0.25),
        optimize_grid: None,
        beta: 0.8,
        eta: 0.6,
        xis: vec![0.002, 0.004, 0.006, 0.008, 0.01],
        distances_km: linspace(0.0, 300.0, 301),
        detection,
    };
    match preset {
        Some(KeyratePreset::Fig4) => Defaults {
            modulation: Modulation::TwoState,
            v_a: None,
            optimize_grid: Some(linspace(0.002, 0.2, 991)),
            beta: 0.8,
            eta: 0.6,
            xis: vec![0.001, 0.0015, 0.002],
            distances_km: linspace(0.0, 50.0, 101),
            detection: Detection::Homodyne,
        },
        Some(KeyratePreset::Fig6) => fig6(Detection::Homodyne),
        Some(KeyratePreset::Fig6Het) => fig6(Detection::Heterodyne),
        None => Defaults {
            xis: vec![0.002],
            distances_km: linspace(0.0, 100.0, 101),
            ..fig6(Detection::Homodyne)
        },
    }
}

/// `V_A` from `--va` or `--alpha`; clap guarantees at most one is present.
pub fn variance(args: &VarianceArgs) -> Result<Option<f64>, CliError> {
    let v_a = match (args.v_a, args.alpha) {
        (Some(v), _) => Some(v),
        (None, Some(a)) => {
            if !a.is_finite() || a < 0.0 {
                return usage(format!("--alpha must be finite and >= 0, got {a}"));
            }
            Some(2.0 * a * a)
        }
        (None, None) => None,
    };
    if let Some(v) = v_a {
        if !(v.is_finite() && v > 0.0) {
            return usage(format!("modulation variance must be > 0, got {v}"));
        }
    }
    Ok(v_a)
}

pub fn check_beta(beta: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&beta) {
        return usage(format!("--beta must lie in [0, 1], got {beta}"));
    }
    Ok(())
}

pub fn check_eta(eta: f64) -> Result<(), CliError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return usage(format!("--eta must lie in (0, 1], got {eta}"));
    }
    Ok(())
}

fn check_non_negative(name: &str, values: &[f64]) -> Result<(), CliError> {
    if let Some(v) = values.iter().find(|v| **v < 0.0) {
        return usage(format!("{name} values must be >= 0, got {v}"));
    }
    Ok(())
}

pub fn resolve_keyrate(args: &KeyrateArgs) -> Result<RunConfig, CliError> {
    let d = defaults(args.preset);
    let explicit_v_a = variance(&args.variance)?;
    let optimize_grid = match (&args.optimize_va, explicit_v_a) {
        (Some(_), Some(_)) => return usage("--optimize-va cannot be combined with --va or --alpha"),
        (Some(grid), None) => Some(grid.values().to_vec()),
        (None, Some(_)) => None,
        (None, None) => d.optimize_grid,
    };
    if let Some(grid) = &optimize_grid {
        if grid.iter().any(|v| !(*v > 0.0)) {
            return usage("--optimize-va values must be > 0");
        }
    }
    let v_a = match &optimize_grid {
        Some(grid) => grid[0],
        None => explicit_v_a.or(d.v_a).unwrap_or(DEFAULT_V_A),
    };
    let beta = args.beta.unwrap_or(d.beta);
    check_beta(beta)?;
    let eta = args.eta.unwrap_or(d.eta);
    check_eta(eta)?;
    let xis = args.xi.as_ref().map_or(d.xis, |g| g.values().to_vec());
    check_non_negative("--xi", &xis)?;
    let distances_km = args.distances.as_ref().map_or(d.distances_km, |g| g.values().to_vec());
    check_non_negative("--distances", &distances_km)?;
    let modulation = args.modulation.map_or(d.modulation, Modulation::from);
    let detection = args.detection.map_or(d.detection, Detection::from);
    Ok(RunConfig {
        protocol: ProtocolConfig::new(modulation, v_a, beta)?,
        optimize_grid,
        eta,
        detection,
        xis,
        distances_km,
    })
}

pub fn resolve_simulate(args: &SimulateArgs) -> Result<RunConfig, CliError> {
    let v_a = variance(&args.variance)?.unwrap_or(DEFAULT_V_A);
    check_beta(args.beta)?;
    check_eta(args.eta)?;
    check_non_negative("--xi", &[args.xi])?;
    check_non_negative("--distance", &[args.distance])?;
    if args.samples == 0 {
        return usage("--samples must be >= 1");
    }
    if args.k == Some(0) {
        return usage("--k must be >= 1");
    }
    Ok(RunConfig {
        protocol: ProtocolConfig::new(args.modulation.into(), v_a, args.beta)?,
        optimize_grid: None,
        eta: args.eta,
        detection: args.detection.into(),
        xis: vec![args.xi],
        distances_km: vec![args.distance],
    })
}
