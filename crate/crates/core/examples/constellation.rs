//! Received constellations at the user and at an eavesdropper on the same bearing from the
//! origin at half the range, for the two-transmitter system and the single co-located array.
//!
//! `cargo run --release --example constellation`

use d3m::geometry::CartesianPoint;
use d3m::scenario::Scenario;
use d3m::sweep::run_constellation;
use d3m::system::run_design;

fn main() -> d3m::Result<()> {
    let mut s = Scenario::default();
    s.baselines.sat = true;
    let bundle = run_design(&s)?;
    let user = s.users[0].point();
    let eve = CartesianPoint::new(user.x / 2.0, user.y / 2.0);
    let rows = run_constellation(&s, &bundle, &[user, eve], 0, 5000, false)?;
    for (pi, name) in [(0, "user"), (1, "eve")] {
        for system in ["d3m", "sat"] {
            let sel: Vec<_> = rows
                .iter()
                .filter(|r| r.point_index == pi && r.system == system)
                .collect();
            let errors = sel.iter().filter(|r| r.detected != Some(r.sent)).count();
            let first = sel.iter().find(|r| r.sent == 0).expect("symbol 0 drawn");
            println!(
                "{name:>4} {system}: SER {:.4}, symbol 0 landed at ({:+.3e}, {:+.3e})",
                errors as f64 / sel.len() as f64,
                first.y_i,
                first.y_q
            );
        }
    }
    Ok(())
}
