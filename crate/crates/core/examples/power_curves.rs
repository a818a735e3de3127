//! Message power against the SNR target and AN power against the array size.
//!
//! `cargo run --release --example power_curves`

use d3m::scenario::Scenario;
use d3m::sweep::{run_curves, CurveKind};

fn main() -> d3m::Result<()> {
    let mut s = Scenario::default();
    s.curves.snr_db = vec![4.0, 8.0, 12.0];
    s.curves.antennas = vec![16, 32, 64];

    let msg = run_curves(&s, CurveKind::MsgPowerVsSnr)?;
    println!("message power (dBm)");
    for r in &msg.rows {
        println!("  N = {:>2}, SNR {:>4} dB: {:8.3}", r[0], r[2], r[4]);
    }

    s.curves.gamma_db = vec![-15.0, -25.0];
    let an = run_curves(&s, CurveKind::AnPowerVsAntennas)?;
    println!("AN power (W)");
    for r in &an.rows {
        println!("  gamma {:>4} dB, N = {:>2}: {:.4e}", r[0], r[1], r[3]);
    }
    Ok(())
}
