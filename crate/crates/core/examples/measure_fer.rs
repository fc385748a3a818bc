//! Frame error rate of the shipped code over a BI-AWGN channel:
//! `cargo run --release --example measure_fer -- <snr> <frames> [k] [seed]`.

use cvqkd::channel_sim::{simulate, LinearChannelModel, NoiseKind};
use cvqkd::reconciliation::{reconcile_reverse, shipped_code, ReconcileOptions};
use cvqkd::{Detection, Modulation, ProtocolConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let snr: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.165);
    let frames: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let k: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1);
    let seed: u64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(1);

    let code = shipped_code();
    let s = snr / k as f64;
    // Unit gain and amplitude: y = x + z with Var z = 1/s.
    let cfg = ProtocolConfig::new(Modulation::FourState, 1.0, 1.0).unwrap();
    let model = LinearChannelModel::new(1.0, 1.0, NoiseKind::Gaussian, 1.0 / s, 1.0 / s, Detection::Homodyne).unwrap();
    let batch = simulate(&cfg, &model, frames * k * code.n(), seed).unwrap();
    let start = std::time::Instant::now();
    let max_iterations: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(cvqkd::reconciliation::DEFAULT_MAX_ITERATIONS);
    let opts = ReconcileOptions { noise_variance: Some(1.0 / s), max_iterations };
    let rec = reconcile_reverse(&batch, code, k, &opts).unwrap();
    let r = rec.report;
    println!(
        "snr={snr} k={k} frames={} failed={} fer={:.4} beta={:.4} mean_iter={:.1} time={:.1}s",
        r.frames, r.failed_frames, r.fer, r.beta, r.mean_iterations, start.elapsed().as_secs_f64()
    );
}
