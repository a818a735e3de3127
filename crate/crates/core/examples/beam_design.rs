//! Minimum-power beamformers for one transmitter: closed form against the penalty iteration.
//!
//! `cargo run --example beam_design`

use d3m::beamform::{design_analytic, design_iterative, PenaltyParams};
use d3m::geometry::{channel_to, half_power_beamwidth, to_polar, ArrayGeometry, CartesianPoint};
use d3m::scenario::{db_to_linear, watts_to_dbm};

fn main() -> d3m::Result<()> {
    let array = ArrayGeometry::with_wavelength_spacing(16, 0.5, -25.0, 1e9, 3e8)?;
    let user = CartesianPoint::new(530.0, 570.0);
    let polar = to_polar(user, &array)?;
    println!(
        "user at {:.3} m, {:.4} deg; half-power beamwidth {:.4} deg",
        polar.range,
        polar.angle.to_degrees(),
        half_power_beamwidth(&array)?.to_degrees()
    );

    let h = channel_to(&array, user)?;
    let sigma = 1e-13f64.sqrt();
    for snr_db in [4.0, 10.0, 14.0] {
        let zeta = db_to_linear(snr_db);
        let closed = design_analytic(&h, zeta, sigma)?;
        let (iter, trace) = design_iterative(&h, zeta, sigma, &PenaltyParams::default())?;
        let gap = (&iter.weights - &closed.weights).norm() / closed.weights.norm();
        let rx = h.response(&closed.weights);
        println!(
            "SNR {snr_db:>4} dB: transmit {:.4e} W, received {:.3} dBm (imag {:.1e}), iterative gap {gap:.1e} after {} steps",
            closed.transmit_power,
            watts_to_dbm(rx.re * rx.re),
            rx.im,
            trace.len()
        );
    }
    Ok(())
}
