//! Secrecy rate against total transmit power, with both comparison baselines.
//!
//! `cargo run --release --example secrecy_curve`

use d3m::scenario::Scenario;
use d3m::sweep::{run_curves, CurveKind};

fn main() -> d3m::Result<()> {
    let mut s = Scenario::default();
    s.baselines.sat = true;
    s.baselines.nsp = true;
    s.curves.antennas = vec![32];
    s.curves.budgets_w = vec![0.001, 0.01, 0.1, 1.0, 10.0, 100.0];
    let t = run_curves(&s, CurveKind::SecrecyVsTotalPower)?;
    let col = |n: &str| t.column(n).expect("column present");
    let (budget, ours, sat, nsp) = (
        col("budget_w"),
        col("secrecy_rate"),
        col("sat_secrecy_rate"),
        col("nsp_secrecy_rate"),
    );
    println!("bound {:.4} bits", col("upper_bound")[0]);
    println!("{:>9} {:>8} {:>8} {:>8}", "budget W", "d3m", "single", "nsp");
    for i in 0..t.rows.len() {
        println!("{:>9} {:>8.4} {:>8.4} {:>8.4}", budget[i], ours[i], sat[i], nsp[i]);
    }
    Ok(())
}
