//! Two users served at once: per-user SINR, mutual leakage and the low-SER spots on the grid.
//!
//! `cargo run --release --example multiuser`

use d3m::metrics::branch_sinr;
use d3m::scenario::{linear_to_db, Scenario};
use d3m::sweep::run_sweep;
use d3m::system::run_design;

fn main() -> d3m::Result<()> {
    let s = Scenario::load(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/scenarios/multiuser.toml"
    ))?;
    let b = run_design(&s)?;
    for (k, u) in s.users.iter().enumerate() {
        let r = b.system.branch_response(u.point(), k, s.noise_var())?;
        let x = branch_sinr(&r);
        let leak = r
            .interference
            .iter()
            .flat_map(|l| [l.i_on_i, l.i_on_q, l.q_on_i, l.q_on_q])
            .fold(0.0f64, |m, a| m.max(a.abs()));
        println!(
            "user {k} ({}, {}): SINR {:.3}/{:.3} dB, largest leak from the other stream {leak:.1e}",
            u.x,
            u.y,
            linear_to_db(x.in_phase),
            linear_to_db(x.quadrature)
        );
    }
    let g = run_sweep(&s, &b)?;
    let low: Vec<_> = g.rows.iter().filter(|r| r.d3m.ser < 1e-3).collect();
    println!("{} of {} cells below 1e-3 SER:", low.len(), g.rows.len());
    for r in low.iter().take(10) {
        println!(
            "  ({}, {}) stream {} SER {:.2e}",
            r.point.x, r.point.y, r.d3m.stream, r.d3m.ser
        );
    }
    Ok(())
}
