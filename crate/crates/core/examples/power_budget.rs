//! Fixed transmit budget: the beams keep their power and the AN absorbs the rest.
//!
//! `cargo run --release --example power_budget`

use d3m::scenario::Scenario;
use d3m::system::run_design;

fn main() -> d3m::Result<()> {
    let s = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/budget.toml"))?;
    let mut free = s.clone();
    free.budget.power_w = None;
    let designed = run_design(&free)?;
    println!(
        "minimum design: message {:.4e} W, AN {:.4e} W",
        designed.power.message(),
        designed.power.an()
    );
    for budget in [0.01, 0.1, 1.0, 10.0] {
        match designed.with_budget(budget) {
            Ok(b) => println!(
                "budget {budget:>5} W: AN I {:.4e} W, AN Q {:.4e} W (scale {:.2})",
                b.power.an_i, b.power.an_q, b.power.an_scale
            ),
            Err(e) => println!("budget {budget:>5} W: {e}"),
        }
    }
    let b = run_design(&s)?;
    println!(
        "scenario budget {:?} W: total {:.6} W",
        s.budget.power_w,
        b.power.total()
    );
    Ok(())
}
