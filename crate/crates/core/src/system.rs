//! End-to-end design of a scenario: beams, AN, synchronisation and the comparison baselines.

use crate::an::{self, AnConstraintSet, AnDesign};
use crate::beamform::{design_multiuser, design_sat_zero_forcing, BeamDesign};
use crate::error::{Error, Result};
use crate::geometry::{channel_to, to_polar, ArrayGeometry, CartesianPoint, ChannelVector};
use crate::scenario::{db_to_linear, Scenario};
use crate::signal::{sync_params, BranchResponse, D3mSystem, StreamDesign, StreamLeak};

/// Transmit powers in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport {
    pub message_i: f64,
    pub message_q: f64,
    pub an_i: f64,
    pub an_q: f64,
    /// Factor applied to the designed AN to meet the power budget (1 without a budget).
    pub an_scale: f64,
}

impl PowerReport {
    pub fn message(&self) -> f64 {
        self.message_i + self.message_q
    }

    pub fn an(&self) -> f64 {
        self.an_i + self.an_q
    }

    pub fn total(&self) -> f64 {
        self.message() + self.an()
    }
}

/// One array at the origin carrying the full complex symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SatSystem {
    pub array: ArrayGeometry,
    pub beams: Vec<BeamDesign>,
    pub an: AnDesign,
}

impl SatSystem {
    /// Branch response of every stream at `p`, in the same convention as [`D3mSystem`].
    pub fn responses(&self, p: CartesianPoint, noise_var: f64) -> Result<Vec<BranchResponse>> {
        let h = channel_to(&self.array, p)?;
        let leaks: Vec<StreamLeak> = self
            .beams
            .iter()
            .map(|w| {
                let c = h.response(&w.weights);
                StreamLeak {
                    i_on_i: c.re,
                    i_on_q: -c.im,
                    q_on_i: c.im,
                    q_on_q: c.re,
                }
            })
            .collect();
        let an = self.an.received_power(&h.entries) / 2.0;
        Ok((0..leaks.len())
            .map(|k| response_from_leaks(&leaks, k, an, noise_var, true))
            .collect())
    }

    pub fn message_power(&self) -> f64 {
        self.beams.iter().map(|b| b.transmit_power).sum()
    }
}

pub(crate) fn response_from_leaks(
    leaks: &[StreamLeak],
    k: usize,
    an_var: f64,
    noise_var: f64,
    aligned: bool,
) -> BranchResponse {
    let own = leaks[k];
    BranchResponse {
        msg_i_on_i: own.i_on_i,
        msg_i_on_q: own.i_on_q,
        msg_q_on_i: own.q_on_i,
        msg_q_on_q: own.q_on_q,
        an_i_var: an_var,
        an_q_var: an_var,
        noise_var,
        aligned,
        interference: leaks
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, l)| *l)
            .collect(),
    }
}

/// Everything [`run_design`] produces.
#[derive(Debug, Clone)]
pub struct DesignBundle {
    pub system: D3mSystem,
    pub power: PowerReport,
    /// AN constraint sets of transmitters I and Q (absent when AN is disabled).
    pub constraints_i: Option<AnConstraintSet>,
    pub constraints_q: Option<AnConstraintSet>,
    pub sat: Option<SatSystem>,
    /// D3M beams with null-space-projection AN of the same per-transmitter power.
    pub nsp: Option<D3mSystem>,
}

impl DesignBundle {
    /// Best-component SINR of each user at its own location with its own noise.
    pub fn user_sinrs(&self, noise_var: f64) -> Result<Vec<crate::metrics::BranchSinr>> {
        (0..self.system.streams.len())
            .map(|k| {
                let r = self.system.branch_response(self.system.streams[k].user, k, noise_var)?;
                Ok(crate::metrics::branch_sinr(&r))
            })
            .collect()
    }

    /// Returns a copy whose AN (and baseline AN) is rescaled so that message plus AN power
    /// equals `budget_w`, keeping the per-transmitter AN proportions. Only valid on a bundle
    /// that has not been rescaled yet.
    pub fn with_budget(&self, budget_w: f64) -> Result<Self> {
        if self.power.an_scale != 1.0 {
            return Err(Error::Domain("the AN of this design was already rescaled".into()));
        }
        let scale = budget_scale(budget_w, self.power.message(), self.power.an())?;
        let mut out = self.clone();
        out.system.an_i = self.system.an_i.scaled(scale);
        out.system.an_q = self.system.an_q.scaled(scale);
        out.power.an_i *= scale;
        out.power.an_q *= scale;
        out.power.an_scale = scale;
        if let Some(nsp) = &mut out.nsp {
            nsp.an_i = nsp.an_i.scaled(scale);
            nsp.an_q = nsp.an_q.scaled(scale);
        }
        if let Some(sat) = &mut out.sat {
            let sat_scale = budget_scale(budget_w, sat.message_power(), sat.an.an_power)?;
            sat.an = sat.an.scaled(sat_scale);
        }
        Ok(out)
    }
}

fn budget_scale(budget_w: f64, message_w: f64, an_w: f64) -> Result<f64> {
    if !(budget_w >= message_w) {
        return Err(Error::BudgetInfeasible { budget_w, message_w });
    }
    if !(an_w > 0.0) {
        return Err(Error::config(
            "budget.power_w",
            "a power budget needs a non-zero AN design to scale",
        ));
    }
    Ok((budget_w - message_w) / an_w)
}

fn channels(g: &ArrayGeometry, users: &[CartesianPoint]) -> Result<Vec<ChannelVector>> {
    users.iter().map(|&p| channel_to(g, p)).collect()
}

fn design_an(
    s: &Scenario,
    g: &ArrayGeometry,
    users: &[CartesianPoint],
    protected: &[ChannelVector],
    beams: &[&BeamDesign],
) -> Result<Option<(AnDesign, AnConstraintSet)>> {
    if !s.an.enabled {
        return Ok(None);
    }
    let angles = users
        .iter()
        .map(|&p| Ok(to_polar(p, g)?.angle))
        .collect::<Result<Vec<_>>>()?;
    let dirs = an::undesired_directions_multi(&angles, g, s.an.grid_step_deg.to_radians())?;
    let set = an::build_constraints(beams, protected, &dirs, g, s.gamma(), s.eve_noise_var(), s.an.sir_mode)?;
    let d = an::solve_an_covariance(&set, g.element_count, &s.solver.sdp_options())?;
    Ok(Some((d, set)))
}

/// Beams for every user on both transmitters (zero-forced at the other users), per-transmitter
/// AN, synchronisation, and the enabled baselines. With a power budget the AN is rescaled so
/// that the total transmit power meets it.
pub fn run_design(s: &Scenario) -> Result<DesignBundle> {
    s.validate()?;
    let array_i = s.array_i()?;
    let array_q = s.array_q()?;
    let users = s.user_points();
    let sigma = s.noise_var().sqrt();
    let method = s.solver.beam_method();

    let h_i = channels(&array_i, &users)?;
    let h_q = channels(&array_q, &users)?;
    let mut streams = Vec::with_capacity(users.len());
    for (k, u) in s.users.iter().enumerate() {
        let zeta = db_to_linear(u.snr_db);
        let beam_i = design_multiuser(&h_i, k, zeta, sigma, method)?;
        let beam_q = design_multiuser(&h_q, k, zeta, sigma, method)?;
        let r_i = to_polar(users[k], &array_i)?.range;
        let r_q = to_polar(users[k], &array_q)?.range;
        streams.push(StreamDesign {
            user: users[k],
            beam_i,
            beam_q,
            sync: sync_params(r_i, r_q, s.radio.carrier_hz, s.arrays.light_speed)?,
        });
    }

    let beams_i: Vec<&BeamDesign> = streams.iter().map(|st| &st.beam_i).collect();
    let beams_q: Vec<&BeamDesign> = streams.iter().map(|st| &st.beam_q).collect();
    let an_i = design_an(s, &array_i, &users, &h_i, &beams_i)?;
    let an_q = design_an(s, &array_q, &users, &h_q, &beams_q)?;
    let (an_i, constraints_i) = split(an_i, array_i.element_count);
    let (an_q, constraints_q) = split(an_q, array_q.element_count);

    let power = PowerReport {
        message_i: beams_i.iter().map(|b| b.transmit_power).sum(),
        message_q: beams_q.iter().map(|b| b.transmit_power).sum(),
        an_i: an_i.an_power,
        an_q: an_q.an_power,
        an_scale: 1.0,
    };

    let nsp = if s.baselines.nsp {
        Some(D3mSystem {
            an_i: an::design_nsp_baseline(&h_i, an_i.an_power, array_i.element_count)?,
            an_q: an::design_nsp_baseline(&h_q, an_q.an_power, array_q.element_count)?,
            array_i,
            array_q,
            streams: streams.clone(),
            symbol_period: s.radio.symbol_period_s,
        })
    } else {
        None
    };

    let sat = if s.baselines.sat {
        Some(design_sat(s, &users, sigma)?)
    } else {
        None
    };

    let bundle = DesignBundle {
        system: D3mSystem {
            array_i,
            array_q,
            streams,
            an_i,
            an_q,
            symbol_period: s.radio.symbol_period_s,
        },
        power,
        constraints_i,
        constraints_q,
        sat,
        nsp,
    };
    match s.budget.power_w {
        Some(b) => bundle.with_budget(b),
        None => Ok(bundle),
    }
}

fn split(d: Option<(AnDesign, AnConstraintSet)>, n: usize) -> (AnDesign, Option<AnConstraintSet>) {
    match d {
        Some((d, c)) => (d, Some(c)),
        None => (AnDesign::zero(n), None),
    }
}

fn design_sat(s: &Scenario, users: &[CartesianPoint], sigma: f64) -> Result<SatSystem> {
    let array = s.array_sat()?;
    let h = channels(&array, users)?;
    let beams = s
        .users
        .iter()
        .enumerate()
        .map(|(k, u)| design_sat_zero_forcing(&h, k, db_to_linear(u.snr_db), sigma))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&BeamDesign> = beams.iter().collect();
    let an = match design_an(s, &array, users, &h, &refs)? {
        Some((d, _)) => d,
        None => AnDesign::zero(array.element_count),
    };
    Ok(SatSystem { array, beams, an })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beams_only() -> Scenario {
        let mut s = Scenario::default();
        s.an.enabled = false;
        s
    }

    #[test]
    fn reference_design_meets_targets() {
        let b = run_design(&beams_only()).unwrap();
        let sinr = b.user_sinrs(1e-13).unwrap();
        assert!((sinr[0].in_phase - 10.0).abs() < 1e-9);
        assert!((sinr[0].quadrature - 10.0).abs() < 1e-9);
        assert_eq!(b.power.an(), 0.0);
        assert!(b.power.message() > 0.0);
    }

    #[test]
    fn budget_below_message_power_rejected() {
        let mut s = Scenario::default();
        s.budget.power_w = Some(1e-9);
        assert!(matches!(run_design(&s), Err(Error::BudgetInfeasible { .. })));
    }

    #[test]
    fn budget_without_an_is_a_config_error() {
        let b = run_design(&beams_only()).unwrap();
        assert!(matches!(b.with_budget(1.0), Err(Error::Config { .. })));
    }
}
