//! Monte Carlo QPSK symbol error rate through the branch model against the closed form.
//!
//! `cargo run --release --example ser_monte_carlo`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use d3m::metrics::{ser_qpsk, simulate_ser};
use d3m::scenario::db_to_linear;
use d3m::signal::BranchResponse;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200_000;
    println!(
        "{:>8} {:>12} {:>12} {:>8}",
        "SINR dB", "simulated", "closed form", "sigmas"
    );
    for db in (0..=12).step_by(2) {
        let g = db_to_linear(db as f64);
        let resp = BranchResponse {
            msg_i_on_i: 1.0,
            msg_q_on_q: 1.0,
            noise_var: 1.0 / g,
            aligned: true,
            ..Default::default()
        };
        let p = ser_qpsk(g, g);
        let est = simulate_ser(&resp, 4, n, &mut rng).rate();
        let z = (est - p) / (p * (1.0 - p) / n as f64).sqrt();
        println!("{db:>8} {est:>12.4e} {p:>12.4e} {z:>+8.2}");
    }
}
