//! Regenerates the shipped rate-1/10 code: `cargo run --example generate_code -- <out.alist>`.

use cvqkd::reconciliation::construction::{met_code, MetProfile};
use cvqkd::reconciliation::SHIPPED_CODE_SEED;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "codes/met_rate0.1_n64000.alist".to_string());
    let code = met_code(&MetProfile::rate_tenth(), SHIPPED_CODE_SEED).expect("profile is consistent");
    println!("n = {}, m = {}, rate = {}", code.n(), code.m(), code.rate());
    std::fs::write(&path, code.to_alist()).expect("write alist");
    println!("wrote {path}");
}
