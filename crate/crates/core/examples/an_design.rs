//! Artificial-noise covariance for one transmitter, its audit, and the null-space baseline.
//!
//! `cargo run --release --example an_design`

use d3m::an::{self, audit, design_nsp_baseline, solve_an_covariance, undesired_directions};
use d3m::beamform::design_analytic;
use d3m::geometry::{channel_to, to_polar, ArrayGeometry, CartesianPoint};
use d3m::sdp::SdpOptions;

fn main() -> d3m::Result<()> {
    let array = ArrayGeometry::with_wavelength_spacing(16, 0.5, -25.0, 1e9, 3e8)?;
    let user = CartesianPoint::new(530.0, 570.0);
    let h = channel_to(&array, user)?;
    let beam = design_analytic(&h, 10.0, 1e-13f64.sqrt())?;

    let theta = to_polar(user, &array)?.angle;
    let dirs = undesired_directions(theta, &array, 1f64.to_radians())?;
    println!(
        "{} jamming directions, mainlobe half-width {:.3} deg",
        dirs.angles.len(),
        dirs.excluded_halfwidth.to_degrees()
    );

    let set = an::build_constraints(&[&beam], std::slice::from_ref(&h), &dirs, &array, 0.01, 1e-13, true)?;
    let design = solve_an_covariance(&set, array.element_count, &SdpOptions::default())?;
    let a = audit(&design, &set);
    println!("AN power {:.4e} W, rank {}", design.an_power, design.factor.ncols());
    println!(
        "audit: nulling {:.1e}, shortfall {:.1e}, min eigen {:.1e}, tightness {:.6}",
        a.equality_violation, a.inequality_violation, a.min_eigen_ratio, a.tightness_ratio
    );
    println!("AN reaching the user: {:.1e} W", design.received_power(&h.entries));

    let nsp = design_nsp_baseline(&[h], design.an_power, array.element_count)?;
    let worst = |d: &an::AnDesign| {
        set.jamming
            .iter()
            .map(|c| d.received_power(&c.steering) / c.required)
            .fold(f64::INFINITY, f64::min)
    };
    println!(
        "worst achieved/required jamming at equal power: designed {:.3}, null-space {:.3}",
        worst(&design),
        worst(&nsp)
    );
    Ok(())
}
