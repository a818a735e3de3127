//! The linear SDP solver on a two-dimensional instance with a known optimum, plus the text dump
//! that external solvers can read.
//!
//! `cargo run --example sdp_solve`

use d3m::sdp::{solve, write_dump, ConstraintMatrix, LinearSdpProblem, SdpOptions};
use d3m::{CVector, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = |x: f64| C64::new(x, 0.0);
    let s = 0.5f64.sqrt();
    // minimise tr X with X invisible along e1 and at least 1 along (e1 + e2)/√2
    let mut p = LinearSdpProblem::min_trace(2);
    p.equalities
        .push((ConstraintMatrix::Outer(CVector::from_vec(vec![r(1.0), r(0.0)])), 0.0));
    p.inequalities
        .push((ConstraintMatrix::Outer(CVector::from_vec(vec![r(s), r(s)])), 1.0));

    let sol = solve(&p, &SdpOptions::default())?;
    println!(
        "objective {:.9} (dual bound {:.9}) in {} iterations, converged {}",
        sol.objective_value, sol.dual_objective, sol.iterations, sol.converged
    );
    println!("X = {:.6}", sol.x.map(|z| z.re));

    let mut out = std::io::stdout().lock();
    write_dump(&mut out, &p, Some(&sol))?;
    Ok(())
}
