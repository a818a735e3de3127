//! SINR, symbol error rate, secrecy rate and effective-zone tests.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{half_power_beamwidth, CartesianPoint};
use crate::signal::{demodulate, psk_point, BranchResponse, D3mSystem, DemodDraws, ReceiverView};

/// Default carrier-orthogonality threshold of the effective zone (10°).
pub const DEFAULT_ORTHOGONALITY_THRESHOLD: f64 = PI / 18.0;

/// Upper tail of the standard normal distribution.
pub fn q_function(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Per-component SINRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSinr {
    /// SINR of the in-phase component, best of the two branches it can be read from.
    pub in_phase: f64,
    pub quadrature: f64,
}

impl BranchSinr {
    /// Sum of both components. At a designed user this is `2ζ`, whereas each component alone
    /// equals `ζ`; both readings are reported.
    pub fn total(&self) -> f64 {
        self.in_phase + self.quadrature
    }

    /// Larger of the two components, used for secrecy computations.
    pub fn best(&self) -> f64 {
        self.in_phase.max(self.quadrature)
    }
}

fn ratio(signal: f64, disturbance: f64) -> f64 {
    if signal == 0.0 {
        0.0
    } else if disturbance > 0.0 {
        signal / disturbance
    } else {
        f64::INFINITY
    }
}

/// Each component may be read on either demodulated branch; on each candidate branch the other
/// component, other users' streams, AN and noise count as disturbance, and the better branch wins.
/// A misaligned receiver gets a different symbol's quadrature component, so its quadrature SINR
/// is zero.
pub fn branch_sinr(r: &BranchResponse) -> BranchSinr {
    let other_i: f64 = r.interference.iter().map(|l| l.i_on_i.powi(2) + l.q_on_i.powi(2)).sum();
    let other_q: f64 = r.interference.iter().map(|l| l.i_on_q.powi(2) + l.q_on_q.powi(2)).sum();
    let dist_i = r.an_i_var + r.noise_var + other_i;
    let dist_q = r.an_q_var + r.noise_var + other_q;
    let xi_on_i = ratio(r.msg_i_on_i.powi(2), r.msg_q_on_i.powi(2) + dist_i);
    let xi_on_q = ratio(r.msg_i_on_q.powi(2), r.msg_q_on_q.powi(2) + dist_q);
    let xq_on_q = ratio(r.msg_q_on_q.powi(2), r.msg_i_on_q.powi(2) + dist_q);
    let xq_on_i = ratio(r.msg_q_on_i.powi(2), r.msg_i_on_i.powi(2) + dist_i);
    BranchSinr {
        in_phase: xi_on_i.max(xi_on_q),
        quadrature: if r.aligned { xq_on_q.max(xq_on_i) } else { 0.0 },
    }
}

/// QPSK symbol error probability when each branch errs independently.
pub fn ser_qpsk(sinr_i: f64, sinr_q: f64) -> f64 {
    let ok_i = 1.0 - q_function((2.0 * sinr_i).sqrt());
    let ok_q = 1.0 - q_function((2.0 * sinr_q).sqrt());
    (1.0 - ok_i * ok_q).clamp(0.0, 1.0)
}

/// Symbol errors counted by [`simulate_ser`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SerEstimate {
    pub errors: usize,
    pub symbols: usize,
}

impl SerEstimate {
    pub fn rate(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.errors as f64 / self.symbols as f64
        }
    }
}

/// Sends `symbols` uniformly drawn `order`-PSK symbols through `resp` and counts detection
/// errors. Other streams and, when misaligned, the stray quadrature symbol are drawn uniformly
/// as well.
pub fn simulate_ser<R: Rng + ?Sized>(resp: &BranchResponse, order: usize, symbols: usize, rng: &mut R) -> SerEstimate {
    let mut errors = 0;
    for _ in 0..symbols {
        let s = psk_point(rng.random_range(0..order), order);
        let draws = DemodDraws {
            noise_i: rng.sample(StandardNormal),
            noise_q: rng.sample(StandardNormal),
            stray: psk_point(rng.random_range(0..order), order),
            others: (0..resp.interference.len())
                .map(|_| psk_point(rng.random_range(0..order), order))
                .collect(),
        };
        if demodulate(resp, &s, &draws).map(|d| d.index) != Some(s.index) {
            errors += 1;
        }
    }
    SerEstimate { errors, symbols }
}

/// Gaussian wiretap rate `max(0, log₂(1+Γ_U) − log₂(1+Γ_E))`.
pub fn secrecy_rate(sinr_user: f64, sinr_eve: f64) -> f64 {
    ((1.0 + sinr_user).log2() - (1.0 + sinr_eve).log2()).max(0.0)
}

/// Average of the per-user secrecy rates over `(Γ_U, Γ_E)` pairs.
pub fn secrecy_sum_rate(pairs: &[(f64, f64)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs.iter().map(|&(u, e)| secrecy_rate(u, e)).sum::<f64>() / pairs.len() as f64
}

/// Distance in `[0, π]` of `2πf((r_Q − r_I)/c + τ) + φ_I − φ_Q` from the nearest multiple of
/// `2π`, where `φ` are the phases of the designed channel responses `hᴴw`.
pub fn carrier_orthogonality_residual(p: CartesianPoint, sys: &D3mSystem, stream: usize) -> Result<f64> {
    let v = sys.view(p)?;
    orthogonality_residual_at(&v, sys, stream)
}

pub(crate) fn orthogonality_residual_at(v: &ReceiverView, sys: &D3mSystem, stream: usize) -> Result<f64> {
    let s = sys
        .streams
        .get(stream)
        .ok_or_else(|| Error::Domain(format!("stream {stream} does not exist")))?;
    let phi_i = v.h_i.dotc(&s.beam_i.weights).arg();
    let phi_q = v.h_q.dotc(&s.beam_q.weights).arg();
    let f = sys.array_i.carrier_hz;
    let arg = 2.0 * PI * f * ((v.r_q - v.r_i) / sys.array_i.light_speed + s.sync.tau) + phi_i - phi_q;
    Ok(wrap_to_pi(arg).abs())
}

fn wrap_to_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZoneFlags {
    pub in_mainlobe_i: bool,
    pub in_mainlobe_q: bool,
    pub aligned: bool,
    pub orthogonal: bool,
    pub all: bool,
}

/// Effective-zone tests of `p` with respect to stream `stream`.
pub fn effective_zone(p: CartesianPoint, sys: &D3mSystem, stream: usize, threshold: f64) -> Result<ZoneFlags> {
    effective_zone_at(&sys.view(p)?, sys, stream, threshold)
}

pub(crate) fn effective_zone_at(v: &ReceiverView, sys: &D3mSystem, stream: usize, threshold: f64) -> Result<ZoneFlags> {
    let residual = orthogonality_residual_at(v, sys, stream)?;
    let s = &sys.streams[stream];
    let user_i = crate::geometry::to_polar(s.user, &sys.array_i)?;
    let user_q = crate::geometry::to_polar(s.user, &sys.array_q)?;
    let in_mainlobe_i = (v.theta_i - user_i.angle).abs() <= half_power_beamwidth(&sys.array_i)? / 2.0;
    let in_mainlobe_q = (v.theta_q - user_q.angle).abs() <= half_power_beamwidth(&sys.array_q)? / 2.0;
    let aligned = sys.arrival_offset(v, &s.sync).abs() < sys.symbol_period / 2.0;
    let orthogonal = residual <= threshold;
    Ok(ZoneFlags {
        in_mainlobe_i,
        in_mainlobe_q,
        aligned,
        orthogonal,
        all: in_mainlobe_i && in_mainlobe_q && aligned && orthogonal,
    })
}

/// Metrics of one receiver location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRecord {
    /// Stream this receiver decodes best (lowest SER); the SINR and SER fields refer to it.
    pub stream: usize,
    /// Received message power per transmitter, summed over streams.
    pub msg_power_w: f64,
    pub sinr: BranchSinr,
    pub ser: f64,
    /// Average over streams of the secrecy rate against an eavesdropper at this location.
    pub secrecy_rate: f64,
}

/// Metrics from the branch responses of every stream at one location. `user_sinr[k]` is the
/// SINR that stream `k` achieves at its own user.
pub fn point_metrics(responses: &[BranchResponse], user_sinr: &[f64]) -> MetricRecord {
    let sinrs: Vec<BranchSinr> = responses.iter().map(branch_sinr).collect();
    let sers: Vec<f64> = sinrs.iter().map(|s| ser_qpsk(s.in_phase, s.quadrature)).collect();
    let stream = (0..sers.len())
        .min_by(|&a, &b| sers[a].total_cmp(&sers[b]))
        .unwrap_or(0);
    let msg_power_w = responses.first().map_or(0.0, |r| {
        let own = r.msg_i_on_i.powi(2) + r.msg_i_on_q.powi(2) + r.msg_q_on_i.powi(2) + r.msg_q_on_q.powi(2);
        let others: f64 = r
            .interference
            .iter()
            .map(|l| l.i_on_i.powi(2) + l.i_on_q.powi(2) + l.q_on_i.powi(2) + l.q_on_q.powi(2))
            .sum();
        (own + others) / 2.0
    });
    let pairs: Vec<(f64, f64)> = user_sinr.iter().zip(&sinrs).map(|(&u, e)| (u, e.best())).collect();
    MetricRecord {
        stream,
        msg_power_w,
        sinr: sinrs.get(stream).copied().unwrap_or(BranchSinr {
            in_phase: 0.0,
            quadrature: 0.0,
        }),
        ser: sers.get(stream).copied().unwrap_or(0.75),
        secrecy_rate: secrecy_sum_rate(&pairs),
    }
}
