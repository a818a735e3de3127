//! How a delay estimation error leaks one branch into the other and eventually misaligns symbols.
//!
//! `cargo run --example timing_error`

use d3m::signal::{timing_error_effect, TimingError};

fn main() -> d3m::Result<()> {
    let carrier = 1e9;
    let period = 1e-6;
    for delta_tau in [0.0, 0.1e-9, 0.25e-9, 0.5e-9, 1e-9, 1.25e-9, 0.4e-6, 0.6e-6] {
        let (leak, aligned) = timing_error_effect(
            TimingError {
                delta_tau,
                symbol_period: period,
            },
            carrier,
        )?;
        println!(
            "delay error {:>8.3} ns: leakage {leak:.3}, symbols aligned {aligned}",
            delta_tau * 1e9
        );
    }
    Ok(())
}
