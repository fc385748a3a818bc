use std::io::Write;
use std::path::Path;

use cvqkd::channel_sim::{moments, simulate, LinearChannelModel, NoiseKind, SimBatch};
use cvqkd::covariance::{estimate_params, ChannelParams, EstimatedParams};
use cvqkd::keyrate::{key_rate, KeyRatePoint};
use cvqkd::reconciliation::{reconcile_reverse, shipped_code, LdpcCode, ReconcileOptions};
use cvqkd::{Detection, Modulation, ProtocolConfig};
use serde::Serialize;
use serde_json::Map;

use crate::cli::SimulateArgs;
use crate::config::resolve_simulate;
use crate::error::{usage, CliError};
use crate::output::{open, Metadata};

#[derive(Debug, Serialize)]
struct CodeInfo {
    source: String,
    n: usize,
    m: usize,
    rate: f64,
    design_snr: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ConfigEcho {
    modulation: Modulation,
    v_a: f64,
    beta: f64,
    eta: f64,
    xi: f64,
    distance_km: f64,
    t: f64,
    t_eff: f64,
    detection: Detection,
    noise: NoiseKind,
    symbols: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct Estimated {
    v_a: f64,
    /// Effective transmission `η T`.
    t_eff: f64,
    xi: f64,
    xi_clamped: bool,
    degenerate: bool,
    /// Per-sample SNR implied by the estimates.
    snr: f64,
    samples: usize,
}

#[derive(Debug, Serialize)]
struct ReconSummary {
    code: CodeInfo,
    k: usize,
    samples_used: usize,
    frames: usize,
    failed_frames: usize,
    fer: Option<f64>,
    beta: Option<f64>,
    beta_modulation: Option<f64>,
    mean_iterations: Option<f64>,
    key_bits: usize,
    leaked_bits: usize,
    keys_match: bool,
    note: Option<String>,
}

#[derive(Debug, Serialize)]
struct Prediction {
    /// Configured channel and β.
    configured: KeyRatePoint,
    /// Estimated channel, configured β.
    estimated: Option<KeyRatePoint>,
    /// Estimated channel, β measured by the reconciliation.
    measured_beta: Option<KeyRatePoint>,
}

#[derive(Debug, Serialize)]
struct Report {
    metadata: Metadata,
    config: ConfigEcho,
    estimated: Estimated,
    reconciliation: Option<ReconSummary>,
    prediction: Prediction,
}

enum Code {
    Shipped(&'static LdpcCode),
    Loaded(LdpcCode, String),
}

impl Code {
    fn load(path: Option<&Path>) -> Result<Code, CliError> {
        Ok(match path {
            None => Code::Shipped(shipped_code()),
            Some(p) => Code::Loaded(LdpcCode::from_alist(&std::fs::read_to_string(p)?)?, p.display().to_string()),
        })
    }

    fn get(&self) -> &LdpcCode {
        match self {
            Code::Shipped(c) => c,
            Code::Loaded(c, _) => c,
        }
    }

    fn info(&self) -> CodeInfo {
        let c = self.get();
        CodeInfo {
            source: match self {
                Code::Shipped(_) => "shipped".into(),
                Code::Loaded(_, path) => path.clone(),
            },
            n: c.n(),
            m: c.m(),
            rate: c.rate(),
            design_snr: c.design_snr(),
        }
    }
}

/// Per-sample SNR of the normalized data, `T V_A/(1 + Tξ)` or `T V_A/(2 + Tξ)`.
fn estimated_snr(est: &EstimatedParams, detection: Detection) -> f64 {
    if est.degenerate {
        return 0.0;
    }
    let vacuum = match detection {
        Detection::Homodyne => 1.0,
        Detection::Heterodyne => 2.0,
    };
    est.t * est.v_a / (vacuum + est.t * est.xi)
}

/// First `frames · k · n` samples, or `None` if not even one frame fits.
fn whole_frames(batch: &SimBatch, frame_len: usize) -> Option<SimBatch> {
    let used = batch.len() / frame_len * frame_len;
    if used == 0 {
        return None;
    }
    let mut b = batch.clone();
    b.x.truncate(used);
    b.y.truncate(used);
    b.quadrature.truncate(used);
    Some(b)
}

fn reconcile(args: &SimulateArgs, batch: &SimBatch, snr: f64) -> Result<ReconSummary, CliError> {
    let code = Code::load(args.code.as_deref())?;
    let c = code.get();
    let k = match args.k {
        Some(k) => k,
        None => {
            let Some(design) = c.design_snr() else {
                return usage("the code carries no design SNR; pass --k");
            };
            if snr > 0.0 {
                ((design / snr).ceil() as usize).max(1)
            } else {
                1
            }
        }
    };
    let empty = |note: &str| ReconSummary {
        code: code.info(),
        k,
        samples_used: 0,
        frames: 0,
        failed_frames: 0,
        fer: None,
        beta: None,
        beta_modulation: None,
        mean_iterations: None,
        key_bits: 0,
        leaked_bits: 0,
        keys_match: true,
        note: Some(note.to_string()),
    };
    if !(snr > 0.0) {
        return Ok(empty("no correlation between Alice and Bob"));
    }
    let Some(frames) = whole_frames(batch, c.n() * k) else {
        return Ok(empty("fewer samples than one frame"));
    };
    let opts = ReconcileOptions {
        noise_variance: Some(1.0 / snr),
        max_iterations: args.max_iterations,
    };
    let rec = reconcile_reverse(&frames, c, k, &opts)?;
    let r = rec.report;
    Ok(ReconSummary {
        code: code.info(),
        k,
        samples_used: frames.len(),
        frames: r.frames,
        failed_frames: r.failed_frames,
        fer: Some(r.fer),
        beta: Some(r.beta),
        beta_modulation: Some(r.beta_modulation),
        mean_iterations: Some(r.mean_iterations),
        key_bits: rec.alice_key.len(),
        leaked_bits: rec.leaked_bits,
        keys_match: rec.alice_key == rec.bob_key,
        note: (r.failed_frames == r.frames).then(|| "no frame decoded".to_string()),
    })
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = resolve_simulate(args)?;
    let (xi, distance) = (cfg.xis[0], cfg.distances_km[0]);
    let ch = ChannelParams::from_distance(distance, xi, cfg.eta, cfg.detection)?;
    let model = LinearChannelModel::from_channel(&ch, args.noise_kind())?;
    let batch = simulate(&cfg.protocol, &model, args.samples, args.seed)?;

    let m = moments(&batch)?;
    let est = estimate_params(m.x2, m.xy, m.y2, cfg.detection)?;
    let snr = estimated_snr(&est, cfg.detection);

    let reconciliation = match cfg.protocol.modulation {
        Modulation::Gaussian => None,
        _ => Some(reconcile(args, &batch, snr)?),
    };

    let estimated_channel = if est.degenerate {
        None
    } else {
        Some(ChannelParams::new((est.t / cfg.eta).min(1.0), est.xi, cfg.eta, cfg.detection)?)
    };
    let at = |protocol: ProtocolConfig| -> Result<Option<KeyRatePoint>, CliError> {
        Ok(match &estimated_channel {
            Some(ch) => Some(key_rate(&protocol, ch)?),
            None => None,
        })
    };
    let measured = reconciliation.as_ref().and_then(|r| r.beta).filter(|b| (0.0..=1.0).contains(b));
    let prediction = Prediction {
        configured: key_rate(&cfg.protocol, &ch)?,
        estimated: at(cfg.protocol)?,
        measured_beta: match measured {
            Some(b) => at(ProtocolConfig { beta: b, ..cfg.protocol })?,
            None => None,
        },
    };

    let report = Report {
        metadata: Metadata::new("simulate", Map::new()),
        config: ConfigEcho {
            modulation: cfg.protocol.modulation,
            v_a: cfg.protocol.v_a,
            beta: cfg.protocol.beta,
            eta: cfg.eta,
            xi,
            distance_km: distance,
            t: ch.t,
            t_eff: ch.t_eff(),
            detection: cfg.detection,
            noise: args.noise_kind(),
            symbols: args.samples,
            seed: args.seed,
        },
        estimated: Estimated {
            v_a: est.v_a,
            t_eff: est.t,
            xi: est.xi,
            xi_clamped: est.xi_clamped,
            degenerate: est.degenerate,
            snr,
            samples: m.n,
        },
        reconciliation,
        prediction,
    };
    let mut sink = open(args.output.as_deref())?;
    serde_json::to_writer_pretty(&mut sink, &report)?;
    writeln!(sink)?;
    sink.flush()?;
    Ok(())
}
