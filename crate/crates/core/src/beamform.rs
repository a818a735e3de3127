//! Minimum-power transmit beamformers.
//!
//! Each transmitter must deliver a real, positive amplitude `√ζ·σ` to its user (the imaginary
//! part would leak into the other branch). Splitting `w` into `[Re w; Im w]` turns this into a
//! real least-norm problem over the null space of the equality rows, which has the closed form
//! used by [`design_analytic`]. [`design_iterative`] runs the slack/penalty alternation instead
//! and is kept for cross-checking.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::ChannelVector;
use crate::linalg::{null_space, CVector, C64};

/// `Re{hᴴw} = h1·w̃` and `Im{hᴴw} = h2·w̃` with `w̃ = [Re w; Im w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealifiedChannel {
    pub h1: DVector<f64>,
    pub h2: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamDesign {
    pub weights: CVector,
    pub snr_target_linear: f64,
    pub noise_std: f64,
    pub transmit_power: f64,
}

impl BeamDesign {
    fn new(weights: CVector, snr_target_linear: f64, noise_std: f64) -> Self {
        let transmit_power = weights.norm_squared();
        Self {
            weights,
            snr_target_linear,
            noise_std,
            transmit_power,
        }
    }

    /// Amplitude the design promises at its user, `√ζ·σ`.
    pub fn target_amplitude(&self) -> f64 {
        self.snr_target_linear.sqrt() * self.noise_std
    }
}

/// Knobs of the penalty iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    pub penalty: f64,
    /// Stop once the squared step norm falls below this.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self {
            penalty: 1e8,
            tolerance: 1e-12,
            max_iter: 10_000,
        }
    }
}

/// How the reduced least-norm problem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BeamMethod {
    #[default]
    Analytic,
    Iterative(PenaltyParams),
}

pub fn realify(h: &ChannelVector) -> RealifiedChannel {
    let n = h.len();
    // hᴴw = Σ conj(h_n) w_n
    let a: Vec<C64> = h.entries.iter().map(|e| e.conj()).collect();
    let mut h1 = DVector::zeros(2 * n);
    let mut h2 = DVector::zeros(2 * n);
    for (i, ai) in a.iter().enumerate() {
        h1[i] = ai.re;
        h1[n + i] = -ai.im;
        h2[i] = ai.im;
        h2[n + i] = ai.re;
    }
    RealifiedChannel { h1, h2 }
}

/// Orthonormal basis `B` with `rows·B = 0`, columns sign-normalised so that the
/// largest-magnitude entry is positive.
pub fn null_basis(rows: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    null_space(rows)
}

fn check_target(zeta: f64, sigma: f64) -> Result<f64> {
    if !(zeta >= 0.0 && zeta.is_finite()) {
        return Err(Error::Domain(format!("SNR target must be non-negative, got {zeta}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("noise std must be non-negative, got {sigma}")));
    }
    Ok(zeta.sqrt() * sigma)
}

fn complexify(w_real: &DVector<f64>) -> CVector {
    let n = w_real.len() / 2;
    CVector::from_fn(n, |i, _| C64::new(w_real[i], w_real[n + i]))
}

/// Reduced problem `min ||ξ||² s.t. gᵀξ ≥ a` after eliminating the equality rows.
struct Reduced {
    basis: DMatrix<f64>,
    g: DVector<f64>,
}

impl Reduced {
    fn new(rows: &DMatrix<f64>, h1: &DVector<f64>) -> Result<Self> {
        let basis = null_basis(rows)?;
        let g = basis.transpose() * h1;
        if g.norm() < 1e-12 * h1.norm() || h1.norm() == 0.0 {
            return Err(Error::Infeasible(
                "the user's in-phase response lies entirely in the constrained subspace".into(),
            ));
        }
        Ok(Self { basis, g })
    }

    fn analytic(&self, a: f64) -> DVector<f64> {
        &self.g * (a / self.g.norm_squared())
    }

    fn iterative(&self, a: f64, p: &PenaltyParams) -> Result<(DVector<f64>, Vec<f64>)> {
        if !(p.penalty > 0.0) || !(p.tolerance > 0.0) {
            return Err(Error::Domain("penalty and tolerance must be positive".into()));
        }
        let dim = self.g.len();
        let system = DMatrix::identity(dim, dim) / p.penalty + &self.g * self.g.transpose();
        let chol = system
            .cholesky()
            .ok_or_else(|| Error::Infeasible("penalty system is not positive definite".into()))?;
        let direction = chol.solve(&self.g);

        let objective = |xi: &DVector<f64>, kappa: f64| {
            let r = self.g.dot(xi) - a - kappa;
            xi.norm_squared() + p.penalty * r * r
        };

        let mut xi = DVector::zeros(dim);
        let mut trace = Vec::new();
        for _ in 0..p.max_iter {
            let kappa = (self.g.dot(&xi) - a).max(0.0);
            let next = &direction * (a + kappa);
            let step = (&next - &xi).norm_squared();
            xi = next;
            trace.push(objective(&xi, kappa));
            if step < p.tolerance {
                let achieved = self.g.dot(&xi);
                if achieved > 0.0 {
                    // finite penalty leaves the constraint slightly short; rescale onto it
                    xi *= a / achieved;
                }
                return Ok((xi, trace));
            }
        }
        Err(Error::Convergence {
            iterations: p.max_iter,
            trace,
        })
    }

    fn lift(&self, xi: &DVector<f64>) -> CVector {
        complexify(&(&self.basis * xi))
    }
}

fn solve(
    rows: &DMatrix<f64>,
    h1: &DVector<f64>,
    zeta: f64,
    sigma: f64,
    method: BeamMethod,
) -> Result<(BeamDesign, Vec<f64>)> {
    let a = check_target(zeta, sigma)?;
    let reduced = Reduced::new(rows, h1)?;
    let (xi, trace) = match method {
        BeamMethod::Analytic => (reduced.analytic(a), Vec::new()),
        BeamMethod::Iterative(p) => reduced.iterative(a, &p)?,
    };
    Ok((BeamDesign::new(reduced.lift(&xi), zeta, sigma), trace))
}

/// Closed-form minimum-power beamformer delivering exactly `√ζ·σ` (real) at the user.
pub fn design_analytic(h: &ChannelVector, zeta: f64, sigma: f64) -> Result<BeamDesign> {
    let r = realify(h);
    let rows = DMatrix::from_row_slice(1, r.h2.len(), r.h2.as_slice());
    Ok(solve(&rows, &r.h1, zeta, sigma, BeamMethod::Analytic)?.0)
}

/// Penalty-method beamformer. Returns the design and the per-iteration penalty objective.
pub fn design_iterative(
    h: &ChannelVector,
    zeta: f64,
    sigma: f64,
    params: &PenaltyParams,
) -> Result<(BeamDesign, Vec<f64>)> {
    let r = realify(h);
    let rows = DMatrix::from_row_slice(1, r.h2.len(), r.h2.as_slice());
    solve(&rows, &r.h1, zeta, sigma, BeamMethod::Iterative(*params))
}

/// Beamformer for user `k` that is additionally zero-forced at every other user of the same
/// transmitter.
pub fn design_multiuser(
    channels: &[ChannelVector],
    k: usize,
    zeta: f64,
    sigma: f64,
    method: BeamMethod,
) -> Result<BeamDesign> {
    let users = channels.len();
    if k >= users {
        return Err(Error::Domain(format!("user index {k} out of range for {users} users")));
    }
    let n = channels[k].len();
    if channels.iter().any(|h| h.len() != n) {
        return Err(Error::Domain("all user channels must have the same dimension".into()));
    }
    if users > 1 && n <= users {
        return Err(Error::Infeasible(format!(
            "{n} elements cannot serve {users} users interference-free"
        )));
    }
    let real: Vec<RealifiedChannel> = channels.iter().map(realify).collect();
    let others = || real.iter().enumerate().filter(move |(i, _)| *i != k).map(|(_, r)| r);
    let mut stacked: Vec<&DVector<f64>> = others().map(|r| &r.h1).collect();
    stacked.extend(others().map(|r| &r.h2));
    stacked.push(&real[k].h2);
    let rows = DMatrix::from_fn(stacked.len(), 2 * n, |i, j| stacked[i][j]);
    Ok(solve(&rows, &real[k].h1, zeta, sigma, method)?.0)
}

/// Single co-located array baseline: the minimum-norm `w` with `hᴴw = √ζ·σ`.
pub fn design_sat_baseline(h: &ChannelVector, zeta: f64, sigma: f64) -> Result<BeamDesign> {
    let a = check_target(zeta, sigma)?;
    let energy = h.entries.norm_squared();
    if !(energy > 0.0) {
        return Err(Error::Domain("zero channel".into()));
    }
    let weights = h.entries.map(|e| e * (a / energy));
    Ok(BeamDesign::new(weights, zeta, sigma))
}

/// Co-located baseline for user `k` of several: minimum-norm `w` with `h_kᴴw = √ζ·σ` and
/// `h_jᴴw = 0` at every other user. With one user this is [`design_sat_baseline`].
pub fn design_sat_zero_forcing(channels: &[ChannelVector], k: usize, zeta: f64, sigma: f64) -> Result<BeamDesign> {
    let users = channels.len();
    if k >= users {
        return Err(Error::Domain(format!("user index {k} out of range for {users} users")));
    }
    if users == 1 {
        return design_sat_baseline(&channels[0], zeta, sigma);
    }
    let a = check_target(zeta, sigma)?;
    let n = channels[k].len();
    if channels.iter().any(|h| h.len() != n) {
        return Err(Error::Domain("all user channels must have the same dimension".into()));
    }
    let others: Vec<&ChannelVector> = channels
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, h)| h)
        .collect();
    let rows = DMatrix::from_fn(others.len(), n, |i, j| others[i].entries[j].conj());
    let basis = null_space(&rows)?;
    let g = basis.adjoint() * &channels[k].entries;
    let energy = g.norm_squared();
    if !(energy > 1e-24 * channels[k].entries.norm_squared()) {
        return Err(Error::Infeasible(format!(
            "user {k} cannot be reached while nulling the others"
        )));
    }
    let weights = basis * g.map(|e| e * (a / energy));
    Ok(BeamDesign::new(weights, zeta, sigma))
}
