use std::f64::consts::FRAC_PI_4;
use std::io::Write;

use clap::ValueEnum;
use cvqkd::covariance::{z_for, z_gauss};
use cvqkd::keyrate::{capacity_biawgn, capacity_gauss, distance_scan, optimized_distance_scan, LinkModel};
use cvqkd::states::{coherent_fock, phi_state, psi_state, truncation_for, wigner, FockVector};
use cvqkd::{Constellation, Modulation};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::cli::{CapacityArgs, CorrelationArgs, KeyrateArgs, SchemaDoc, StateArg, WignerArgs};
use crate::config::resolve_keyrate;
use crate::error::{usage, CliError};
use crate::grid::Grid;
use crate::output::{open, Table};

pub const TABLE_SCHEMA: &str = include_str!("../schema/table.schema.json");
pub const SIMULATE_SCHEMA: &str = include_str!("../schema/simulate-report.schema.json");

const FIG7_SNR: &str = "0.001:100:101:log";
const FIG5_VA: &str = "0.01:1:100";

fn params(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn keyrate(args: &KeyrateArgs) -> Result<(), CliError> {
    let cfg = resolve_keyrate(args)?;
    let mut rows = Vec::with_capacity(cfg.xis.len() * cfg.distances_km.len());
    // Curve by curve: all distances for the first ξ, then the next.
    for &xi in &cfg.xis {
        let link = LinkModel {
            xi,
            eta: cfg.eta,
            detection: cfg.detection,
        };
        let points = match &cfg.optimize_grid {
            Some(grid) => optimized_distance_scan(&cfg.protocol, &link, &cfg.distances_km, grid)?,
            None => distance_scan(&cfg.protocol, &link, &cfg.distances_km)?,
        };
        for (d, p) in cfg.distances_km.iter().zip(&points) {
            rows.push(vec![*d, p.t_eff, p.xi, p.v_a, p.i_xy, p.s_ye, p.k]);
        }
    }
    let v_a = match &cfg.optimize_grid {
        Some(grid) => json!({
            "optimized_over": {"min": grid.iter().cloned().fold(f64::INFINITY, f64::min),
                               "max": grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                               "points": grid.len()}
        }),
        None => json!(cfg.protocol.v_a),
    };
    let table = Table {
        command: "keyrate",
        columns: &["distance_km", "T_eff", "xi", "V_A", "I_xy", "S_yE", "K"],
        rows,
        parameters: params(vec![
            ("preset", json!(args.preset.and_then(|p| p.to_possible_value()).map(|v| v.get_name().to_string()))),
            ("modulation", json!(cfg.protocol.modulation.to_string())),
            ("detection", json!(cfg.detection.to_string())),
            ("V_A", v_a),
            ("beta", json!(cfg.protocol.beta)),
            ("eta", json!(cfg.eta)),
            ("xi", json!(cfg.xis)),
        ]),
    };
    table.write(&args.out)
}

pub fn capacity(args: &CapacityArgs) -> Result<(), CliError> {
    let grid = match &args.snr {
        Some(g) => g.clone(),
        None => FIG7_SNR.parse::<Grid>().map_err(CliError::Usage)?,
    };
    if let Some(s) = grid.values().iter().find(|s| !(**s > 0.0)) {
        return usage(format!("--snr values must be > 0, got {s}"));
    }
    let mut rows = Vec::with_capacity(grid.values().len());
    for &s in grid.values() {
        let (cg, cb) = (capacity_gauss(s), capacity_biawgn(s)?);
        rows.push(vec![s, cg, cb, cb / cg]);
    }
    Table {
        command: "capacity",
        columns: &["s", "C_Gauss", "C_BI-AWGN", "ratio"],
        rows,
        parameters: Map::new(),
    }
    .write(&args.out)
}

pub fn correlation(args: &CorrelationArgs) -> Result<(), CliError> {
    let grid = match &args.v_a {
        Some(g) => g.clone(),
        None => FIG5_VA.parse::<Grid>().map_err(CliError::Usage)?,
    };
    if let Some(v) = grid.values().iter().find(|v| !(**v > 0.0)) {
        return usage(format!("--va values must be > 0, got {v}"));
    }
    let mut rows = Vec::with_capacity(grid.values().len());
    for &v_a in grid.values() {
        rows.push(vec![
            v_a,
            z_for(Modulation::TwoState, v_a)?,
            z_for(Modulation::FourState, v_a)?,
            z_gauss(v_a)?,
        ]);
    }
    Table {
        command: "correlation",
        columns: &["V_A", "Z_two", "Z_four", "Z_gauss"],
        rows,
        parameters: Map::new(),
    }
    .write(&args.out)
}

/// The `k`-th coherent amplitude of the constellation.
fn symbol(constellation: Constellation, k: usize, alpha: f64) -> Complex64 {
    match constellation {
        Constellation::Two => {
            let gamma = Complex64::from_polar(alpha, -FRAC_PI_4);
            if k == 0 {
                gamma
            } else {
                -gamma
            }
        }
        Constellation::Four => Complex64::from_polar(alpha, (2 * k + 1) as f64 * FRAC_PI_4),
    }
}

pub fn wigner_grid(args: &WignerArgs) -> Result<(), CliError> {
    let alpha = match (args.alpha, args.alpha2) {
        (Some(a), _) => Some(a),
        (None, Some(a2)) if a2 >= 0.0 => Some(a2.sqrt()),
        (None, Some(a2)) => return usage(format!("--alpha2 must be >= 0, got {a2}")),
        (None, None) => None,
    };
    let constellation = Constellation::from(args.constellation);
    let state = match args.state {
        StateArg::Vacuum => FockVector::vacuum(args.n_cut.unwrap_or(truncation_for(0.0))),
        selector => {
            let Some(alpha) = alpha.filter(|a| a.is_finite() && *a > 0.0) else {
                return usage("this state needs --alpha or --alpha2 > 0");
            };
            if args.index >= constellation.size() {
                return usage(format!(
                    "--index {} is out of range for a {}-state constellation",
                    args.index,
                    constellation.size()
                ));
            }
            let n_cut = args.n_cut.unwrap_or(truncation_for(alpha * alpha));
            match selector {
                StateArg::Psi => psi_state(constellation, args.index, alpha, n_cut)?,
                StateArg::Phi => phi_state(constellation, args.index, alpha, n_cut)?,
                _ => coherent_fock(symbol(constellation, args.index, alpha), n_cut)?,
            }
        }
    };
    let x_axis = args.x_grid.as_ref().unwrap_or(&args.grid);
    let p_axis = args.p_grid.as_ref().unwrap_or(&args.grid);
    let grid = wigner(&state, x_axis.values(), p_axis.values())?;
    let mut sink = open(args.output.as_deref())?;
    grid.write_csv(&mut sink)?;
    sink.flush()?;
    Ok(())
}

pub fn schema(doc: SchemaDoc) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(match doc {
        SchemaDoc::Table => TABLE_SCHEMA,
        SchemaDoc::Simulate => SIMULATE_SCHEMA,
    }
    .as_bytes())?;
    Ok(())
}
