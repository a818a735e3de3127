//! Per-symbol reception model.
//!
//! Instead of simulating carriers, each receiver is summarised by the real amplitudes with which
//! the in-phase and quadrature symbol components land on its two demodulated branches, plus the
//! AN and thermal noise variances on each branch. The receiver demodulates in the carrier frame
//! of transmitter I, so a Q-transmitter contribution arrives rotated by
//! `δ_Δ = exp(j2πf[(r_I − r_Q)/c − τ])`.

use std::f64::consts::PI;

use crate::an::AnDesign;
use crate::beamform::BeamDesign;
use crate::error::{Error, Result};
use crate::geometry::{channel_to, ArrayGeometry, CartesianPoint};
use crate::linalg::{CVector, C64};

/// Emission delay and carrier compensation applied at transmitter Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncParams {
    pub tau: f64,
    pub delta: C64,
}

pub fn sync_params(r_ui: f64, r_uq: f64, carrier_hz: f64, light_speed: f64) -> Result<SyncParams> {
    if !(r_ui > 0.0 && r_uq > 0.0) {
        return Err(Error::Domain(format!("ranges must be positive, got {r_ui} and {r_uq}")));
    }
    Ok(sync_from_tau((r_ui - r_uq) / light_speed, carrier_hz))
}

/// Sync parameters for an explicitly chosen (possibly mis-estimated) delay.
pub fn sync_from_tau(tau: f64, carrier_hz: f64) -> SyncParams {
    SyncParams {
        tau,
        delta: C64::from_polar(1.0, -2.0 * PI * carrier_hz * tau),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PskSymbol {
    pub value: C64,
    pub in_phase: f64,
    pub quadrature: f64,
    pub order: usize,
    /// Constellation index `k` of `exp(j(2k+1)π/M)`.
    pub index: usize,
}

/// Constellation point `k` of `M`-PSK, `exp(j(2k+1)π/M)`.
pub fn psk_point(k: usize, order: usize) -> PskSymbol {
    let value = C64::from_polar(1.0, (2 * k + 1) as f64 * PI / order as f64);
    PskSymbol {
        value,
        in_phase: value.re,
        quadrature: value.im,
        order,
        index: k % order,
    }
}

/// Splits a constellation symbol into its branch components.
pub fn decompose(x: C64, order: usize) -> Result<PskSymbol> {
    if order < 4 {
        return Err(Error::Domain(format!(
            "modulation order must be at least 4, got {order}"
        )));
    }
    if (x.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("symbol {x} is not unit modulus")));
    }
    let slot = x.arg() * order as f64 / PI;
    let k = ((slot - 1.0) / 2.0).round().rem_euclid(order as f64) as usize;
    let p = psk_point(k, order);
    if (p.value - x).norm() > 1e-9 {
        return Err(Error::Domain(format!(
            "symbol {x} is not on the {order}-PSK constellation"
        )));
    }
    Ok(PskSymbol {
        value: x,
        in_phase: x.re,
        quadrature: x.im,
        order,
        index: k,
    })
}

/// Branch amplitudes of a stream that is not the one being decoded.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StreamLeak {
    pub i_on_i: f64,
    pub i_on_q: f64,
    pub q_on_i: f64,
    pub q_on_q: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BranchResponse {
    pub msg_i_on_i: f64,
    pub msg_i_on_q: f64,
    pub msg_q_on_i: f64,
    pub msg_q_on_q: f64,
    pub an_i_var: f64,
    pub an_q_var: f64,
    pub noise_var: f64,
    /// Whether the two symbol components arrive within half a symbol period of each other.
    pub aligned: bool,
    /// Other users' streams (multiuser only).
    pub interference: Vec<StreamLeak>,
}

/// Everything one user needs from both transmitters.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamDesign {
    pub user: CartesianPoint,
    pub beam_i: BeamDesign,
    pub beam_q: BeamDesign,
    pub sync: SyncParams,
}

/// Designed two-transmitter system.
#[derive(Debug, Clone, PartialEq)]
pub struct D3mSystem {
    pub array_i: ArrayGeometry,
    pub array_q: ArrayGeometry,
    pub streams: Vec<StreamDesign>,
    pub an_i: AnDesign,
    pub an_q: AnDesign,
    pub symbol_period: f64,
}

/// Propagation quantities of one receiver location, shared by all streams.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverView {
    pub r_i: f64,
    pub r_q: f64,
    pub theta_i: f64,
    pub theta_q: f64,
    pub h_i: CVector,
    pub h_q: CVector,
}

impl D3mSystem {
    pub fn view(&self, p: CartesianPoint) -> Result<ReceiverView> {
        let pi = crate::geometry::to_polar(p, &self.array_i)?;
        let pq = crate::geometry::to_polar(p, &self.array_q)?;
        Ok(ReceiverView {
            r_i: pi.range,
            r_q: pq.range,
            theta_i: pi.angle,
            theta_q: pq.angle,
            h_i: channel_to(&self.array_i, p)?.entries,
            h_q: channel_to(&self.array_q, p)?.entries,
        })
    }

    fn carrier(&self) -> f64 {
        self.array_i.carrier_hz
    }

    fn light_speed(&self) -> f64 {
        self.array_i.light_speed
    }

    /// Rotation of a Q contribution relative to the I frame, `exp(j2πf[(r_I − r_Q)/c − τ])`.
    pub fn delta_delta(&self, v: &ReceiverView, sync: &SyncParams) -> C64 {
        let f = self.carrier();
        C64::from_polar(1.0, 2.0 * PI * f * ((v.r_i - v.r_q) / self.light_speed() - sync.tau))
    }

    /// Arrival-time mismatch of the Q component relative to the I component.
    pub fn arrival_offset(&self, v: &ReceiverView, sync: &SyncParams) -> f64 {
        (v.r_q - v.r_i) / self.light_speed() + sync.tau
    }

    /// Branch amplitudes of stream `k` at the receiver described by `v`.
    pub fn response_at(&self, v: &ReceiverView, k: usize, noise_var: f64) -> BranchResponse {
        let leak = |s: &StreamDesign| {
            let c_i = v.h_i.dotc(&s.beam_i.weights);
            let c_q = self.delta_delta(v, &s.sync) * v.h_q.dotc(&s.beam_q.weights);
            StreamLeak {
                i_on_i: c_i.re,
                i_on_q: -c_i.im,
                q_on_i: c_q.im,
                q_on_q: c_q.re,
            }
        };
        let own = leak(&self.streams[k]);
        let an = (self.an_i.received_power(&v.h_i) + self.an_q.received_power(&v.h_q)) / 2.0;
        BranchResponse {
            msg_i_on_i: own.i_on_i,
            msg_i_on_q: own.i_on_q,
            msg_q_on_i: own.q_on_i,
            msg_q_on_q: own.q_on_q,
            an_i_var: an,
            an_q_var: an,
            noise_var,
            aligned: self.arrival_offset(v, &self.streams[k].sync).abs() < self.symbol_period / 2.0,
            interference: self
                .streams
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, s)| leak(s))
                .collect(),
        }
    }

    /// Branch response of stream `k` at `p` with receiver noise variance `noise_var`.
    pub fn branch_response(&self, p: CartesianPoint, k: usize, noise_var: f64) -> Result<BranchResponse> {
        if k >= self.streams.len() {
            return Err(Error::Domain(format!("stream {k} does not exist")));
        }
        Ok(self.response_at(&self.view(p)?, k, noise_var))
    }

    /// Branch responses of every stream at the receiver described by `v`.
    pub fn responses_at(&self, v: &ReceiverView, noise_var: f64) -> Vec<BranchResponse> {
        (0..self.streams.len())
            .map(|k| self.response_at(v, k, noise_var))
            .collect()
    }
}

/// Random inputs consumed by one call to [`demodulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DemodDraws {
    /// Standard normal draws for the two branches.
    pub noise_i: f64,
    pub noise_q: f64,
    /// Symbol that replaces the quadrature component when the receiver is misaligned.
    pub stray: PskSymbol,
    /// Symbols carried by the other users' streams.
    pub others: Vec<PskSymbol>,
}

impl DemodDraws {
    pub fn noiseless(stray: PskSymbol) -> Self {
        Self {
            noise_i: 0.0,
            noise_q: 0.0,
            stray,
            others: Vec::new(),
        }
    }
}

/// Noise-free received branch values `(ŷ_I, ŷ_Q)`.
pub fn branch_values(resp: &BranchResponse, s: &PskSymbol, draws: &DemodDraws) -> (f64, f64) {
    // past half a symbol of misalignment the Q component belongs to a different symbol
    let xq = if resp.aligned {
        s.quadrature
    } else {
        draws.stray.quadrature
    };
    let mut yi = resp.msg_i_on_i * s.in_phase + resp.msg_q_on_i * xq;
    let mut yq = resp.msg_i_on_q * s.in_phase + resp.msg_q_on_q * xq;
    for (leak, other) in resp.interference.iter().zip(&draws.others) {
        yi += leak.i_on_i * other.in_phase + leak.q_on_i * other.quadrature;
        yq += leak.i_on_q * other.in_phase + leak.q_on_q * other.quadrature;
    }
    (yi, yq)
}

/// Per-branch disturbance standard deviation, `½·√(AN + noise)`.
///
/// With unit-energy symbols (each component `±1/√2` for QPSK) this makes the branch error rate
/// `Q(√(2Γ))` for branch SINR `Γ = amplitude² / (AN + noise)`.
pub fn disturbance_std(an_var: f64, noise_var: f64) -> f64 {
    0.5 * (an_var + noise_var).sqrt()
}

/// Received branch values including AN and thermal noise.
pub fn received(resp: &BranchResponse, s: &PskSymbol, draws: &DemodDraws) -> (f64, f64) {
    let (yi, yq) = branch_values(resp, s, draws);
    (
        yi + disturbance_std(resp.an_i_var, resp.noise_var) * draws.noise_i,
        yq + disturbance_std(resp.an_q_var, resp.noise_var) * draws.noise_q,
    )
}

/// Hard decision on received branch values. `None` when the decision is ambiguous (a QPSK
/// branch exactly at zero, or both branches at zero), which callers count as an error.
pub fn decide(yi: f64, yq: f64, order: usize) -> Option<PskSymbol> {
    if order == 4 {
        if yi == 0.0 || yq == 0.0 {
            return None;
        }
        let k = match (yi > 0.0, yq > 0.0) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        };
        return Some(psk_point(k, 4));
    }
    if yi == 0.0 && yq == 0.0 {
        return None;
    }
    let slot = yq.atan2(yi) * order as f64 / PI;
    let k = ((slot - 1.0) / 2.0).round().rem_euclid(order as f64) as usize;
    Some(psk_point(k, order))
}

/// Receives symbol `s` through `resp` and returns the detected constellation point.
pub fn demodulate(resp: &BranchResponse, s: &PskSymbol, draws: &DemodDraws) -> Option<PskSymbol> {
    let (yi, yq) = received(resp, s, draws);
    decide(yi, yq, s.order)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingError {
    pub delta_tau: f64,
    pub symbol_period: f64,
}

/// Inter-branch leakage `|sin(2πfΔτ)|` caused by a delay error, and whether symbols stay aligned.
pub fn timing_error_effect(e: TimingError, carrier_hz: f64) -> Result<(f64, bool)> {
    if !(e.symbol_period > 0.0) {
        return Err(Error::Domain(format!(
            "symbol period must be positive, got {}",
            e.symbol_period
        )));
    }
    let leak = (2.0 * PI * carrier_hz * e.delta_tau).sin().abs();
    Ok((leak, e.delta_tau.abs() < e.symbol_period / 2.0))
}
