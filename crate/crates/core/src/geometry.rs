//! Planar coordinates, free-space path loss and ULA channel vectors.
//!
//! Transmitters sit on the x-axis; receivers live in the upper half plane `y > 0`. Angles are
//! measured from the array broadside (the +y axis) and grow towards +x.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

/// Speed of light used unless a scenario overrides it. With a 1 GHz carrier this makes
/// half-wavelength spacing exactly 0.15 m.
pub const DEFAULT_LIGHT_SPEED: f64 = 3e8;

/// Half-power beamwidth of a uniform array in degrees for `N·d = λ`.
const HPBW_DEG_PER_APERTURE: f64 = 50.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
}

impl CartesianPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Range and broadside angle of a receiver as seen from one array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCoord {
    pub range: f64,
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub element_count: usize,
    /// Element spacing in meters.
    pub spacing: f64,
    /// x coordinate of the reference (first) element.
    pub anchor_x: f64,
    pub carrier_hz: f64,
    pub light_speed: f64,
}

impl ArrayGeometry {
    /// Array with spacing given as a fraction of the carrier wavelength.
    pub fn with_wavelength_spacing(
        element_count: usize,
        spacing_wavelengths: f64,
        anchor_x: f64,
        carrier_hz: f64,
        light_speed: f64,
    ) -> Result<Self> {
        let g = Self {
            element_count,
            spacing: spacing_wavelengths * light_speed / carrier_hz,
            anchor_x,
            carrier_hz,
            light_speed,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn wavelength(&self) -> f64 {
        self.light_speed / self.carrier_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.element_count == 0 {
            return Err(Error::Domain("array needs at least one element".into()));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::Domain(format!(
                "element spacing must be positive, got {}",
                self.spacing
            )));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::Domain(format!(
                "carrier must be positive, got {}",
                self.carrier_hz
            )));
        }
        if !(self.light_speed > 0.0 && self.light_speed.is_finite()) {
            return Err(Error::Domain(format!(
                "light speed must be positive, got {}",
                self.light_speed
            )));
        }
        Ok(())
    }
}

/// Complex per-element response of one array towards one receiver, path loss included.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: CVector,
    pub loss_amplitude: f64,
}

impl ChannelVector {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `hᴴ·w`
    pub fn response(&self, w: &CVector) -> C64 {
        self.entries.dotc(w)
    }
}

pub fn to_polar(p: CartesianPoint, g: &ArrayGeometry) -> Result<PolarCoord> {
    if !(p.x.is_finite() && p.y.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite receiver position ({}, {})",
            p.x, p.y
        )));
    }
    if p.y <= 0.0 {
        return Err(Error::Domain(format!("receiver must satisfy y > 0, got y = {}", p.y)));
    }
    let dx = p.x - g.anchor_x;
    Ok(PolarCoord {
        range: dx.hypot(p.y),
        angle: (dx / p.y).atan(),
    })
}

/// Free-space loss in dB and the matching amplitude factor `10^(-L/20)`.
pub fn path_loss(carrier_hz: f64, range: f64) -> Result<(f64, f64)> {
    if !(range > 0.0) {
        return Err(Error::Domain(format!("range must be positive, got {range}")));
    }
    if !(carrier_hz > 0.0) {
        return Err(Error::Domain(format!("carrier must be positive, got {carrier_hz}")));
    }
    let loss_db = 32.5 + 20.0 * (carrier_hz / 1e6).log10() + 20.0 * (range / 1e3).log10();
    Ok((loss_db, 10f64.powf(-loss_db / 20.0)))
}

/// Channel vector with entry `n` equal to `ρ·exp(-j2πf(n-1)d·sinθ/c)`.
pub fn channel_vector(g: &ArrayGeometry, pc: PolarCoord) -> Result<ChannelVector> {
    g.validate()?;
    let (_, rho) = path_loss(g.carrier_hz, pc.range)?;
    Ok(ChannelVector {
        entries: phase_progression(g, pc.angle, rho),
        loss_amplitude: rho,
    })
}

/// Unit-amplitude (ρ = 1) steering vector towards `angle`, used for angle-only constraints.
pub fn steering_vector(g: &ArrayGeometry, angle: f64) -> ChannelVector {
    ChannelVector {
        entries: phase_progression(g, angle, 1.0),
        loss_amplitude: 1.0,
    }
}

/// Convenience: polar transform followed by [`channel_vector`].
pub fn channel_to(g: &ArrayGeometry, p: CartesianPoint) -> Result<ChannelVector> {
    channel_vector(g, to_polar(p, g)?)
}

fn phase_progression(g: &ArrayGeometry, angle: f64, rho: f64) -> CVector {
    let step = 2.0 * PI * g.carrier_hz * g.spacing * angle.sin() / g.light_speed;
    CVector::from_fn(g.element_count, |n, _| C64::from_polar(rho, -step * n as f64))
}

pub fn half_power_beamwidth(g: &ArrayGeometry) -> Result<f64> {
    if g.element_count < 2 {
        return Err(Error::Domain(format!(
            "beamwidth needs at least two elements, got {}",
            g.element_count
        )));
    }
    Ok(HPBW_DEG_PER_APERTURE.to_radians() * g.light_speed / (g.carrier_hz * g.element_count as f64 * g.spacing))
}
