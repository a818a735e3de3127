//! Artificial-noise covariance design.
//!
//! The AN covariance `Γ` is the minimum-trace PSD matrix that is invisible at every legitimate
//! user (`hᴴΓh = 0`) and, along every sampled direction outside the user's mainlobe, pushes the
//! signal-to-AN ratio below the target `γ`. Jamming constraints are angle-only: they use
//! unit-amplitude steering vectors, so the resulting ratios hold at every range.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::beamform::BeamDesign;
use crate::error::{Error, Result};
use crate::geometry::{half_power_beamwidth, steering_vector, ArrayGeometry, ChannelVector};
use crate::linalg::{hermitian_eigen, hermitian_part, min_eigenvalue, null_space, CMatrix, CVector, C64};
use crate::sdp::{self, ConstraintMatrix, LinearSdpProblem, SdpError, SdpOptions};

/// Sampled directions that receive a jamming constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct UndesiredDirectionSet {
    pub angles: Vec<f64>,
    pub excluded_halfwidth: f64,
    pub grid_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JammingConstraint {
    pub angle: f64,
    /// Unit-amplitude steering vector `s`; the constraint reads `sᴴΓs ≥ required`.
    pub steering: CVector,
    pub required: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnConstraintSet {
    /// Channels at which the AN must vanish.
    pub protected: Vec<CVector>,
    pub jamming: Vec<JammingConstraint>,
    pub sir_mode: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnDesign {
    pub covariance: CMatrix,
    /// `P` with `P·Pᴴ = Γ`; AN samples are `P·z`.
    pub factor: CMatrix,
    pub an_power: f64,
}

impl AnDesign {
    pub fn zero(n: usize) -> Self {
        Self {
            covariance: CMatrix::zeros(n, n),
            factor: CMatrix::zeros(n, 0),
            an_power: 0.0,
        }
    }

    /// Same shape, power multiplied by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            covariance: self.covariance.scale(factor),
            factor: self.factor.scale(factor.sqrt()),
            an_power: self.an_power * factor,
        }
    }

    /// AN power seen through channel `h`, i.e. `hᴴΓh`.
    pub fn received_power(&self, h: &CVector) -> f64 {
        // via the factor, which keeps the value non-negative and exactly zero on nulled channels
        (self.factor.adjoint() * h).norm_squared()
    }
}

/// Post-solve feasibility and optimality audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnAudit {
    /// Largest `hᴴΓh / tr(Γ)` over protected channels.
    pub equality_violation: f64,
    /// Largest relative shortfall `(required − sᴴΓs)/required`.
    pub inequality_violation: f64,
    /// Smallest eigenvalue of `Γ` divided by its trace.
    pub min_eigen_ratio: f64,
    /// Smallest achieved/required ratio; 1 at an optimum (scaling `Γ` down would break it).
    pub tightness_ratio: f64,
    /// `||PPᴴ − Γ||_F / tr(Γ)`.
    pub factor_error: f64,
}

impl AnAudit {
    pub fn passes(&self, violation_tol: f64, eigen_tol: f64, tightness_tol: f64) -> bool {
        self.equality_violation <= violation_tol
            && self.inequality_violation <= violation_tol
            && self.min_eigen_ratio >= -eigen_tol
            && (self.tightness_ratio - 1.0).abs() <= tightness_tol
    }
}

/// Uniform grid over `[−π/2, π/2]` (endpoints included) minus the closed mainlobe of half-width
/// `θ_BW/2` around the protected direction.
pub fn undesired_directions(theta_protected: f64, g: &ArrayGeometry, grid_step: f64) -> Result<UndesiredDirectionSet> {
    undesired_directions_multi(&[theta_protected], g, grid_step)
}

/// Like [`undesired_directions`] with a mainlobe excluded around every protected direction.
pub fn undesired_directions_multi(
    protected: &[f64],
    g: &ArrayGeometry,
    grid_step: f64,
) -> Result<UndesiredDirectionSet> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::config(
            "an.grid_step_deg",
            format!("must be positive, got {grid_step}"),
        ));
    }
    let half = half_power_beamwidth(g)? / 2.0;
    let steps = (std::f64::consts::PI / grid_step + 1e-9).floor() as usize;
    let angles: Vec<f64> = (0..=steps)
        .map(|k| -FRAC_PI_2 + k as f64 * grid_step)
        .filter(|a| protected.iter().all(|p| (a - p).abs() > half * (1.0 + 1e-12)))
        .collect();
    if angles.is_empty() {
        return Err(Error::config(
            "an.grid_step_deg",
            "no sampled direction lies outside the protected mainlobe",
        ));
    }
    Ok(UndesiredDirectionSet {
        angles,
        excluded_halfwidth: half,
        grid_step,
    })
}

/// One jamming constraint per direction with `γ̃ = max_k |sᴴw_k|²/γ − σ_E²` (the noise term is
/// dropped in `sir_mode`). Directions with `γ̃ ≤ 0` are skipped since PSD `Γ` meets them anyway.
pub fn build_constraints(
    streams: &[&BeamDesign],
    protected: &[ChannelVector],
    directions: &UndesiredDirectionSet,
    g: &ArrayGeometry,
    gamma: f64,
    sigma_e2: f64,
    sir_mode: bool,
) -> Result<AnConstraintSet> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("jamming target must be positive, got {gamma}")));
    }
    let mut jamming = Vec::new();
    for &angle in &directions.angles {
        let s = steering_vector(g, angle);
        let leak = streams
            .iter()
            .map(|w| s.response(&w.weights).norm_sqr())
            .fold(0.0, f64::max);
        let required = jamming_requirement(leak, gamma, sigma_e2, sir_mode);
        if required > 0.0 {
            jamming.push(JammingConstraint {
                angle,
                steering: s.entries,
                required,
            });
        }
    }
    Ok(AnConstraintSet {
        protected: protected.iter().map(|h| h.entries.clone()).collect(),
        jamming,
        sir_mode,
    })
}

/// `|sᴴw|²/γ − σ_E²`, or `|sᴴw|²/γ` in SIR mode.
pub fn jamming_requirement(leak_power: f64, gamma: f64, sigma_e2: f64, sir_mode: bool) -> f64 {
    let base = leak_power / gamma;
    if sir_mode {
        base
    } else {
        base - sigma_e2
    }
}

pub fn solve_an_covariance(c: &AnConstraintSet, n: usize, opts: &SdpOptions) -> Result<AnDesign> {
    if c.protected.iter().any(|h| h.len() != n) || c.jamming.iter().any(|j| j.steering.len() != n) {
        return Err(Error::Domain(format!("constraint vectors must have dimension {n}")));
    }
    let active: Vec<&JammingConstraint> = c.jamming.iter().filter(|j| j.required > 0.0).collect();
    if active.is_empty() {
        return Ok(AnDesign::zero(n));
    }
    let mut problem = LinearSdpProblem::min_trace(n);
    problem.equalities = c
        .protected
        .iter()
        .map(|h| (ConstraintMatrix::Outer(h.clone()), 0.0))
        .collect();
    problem.inequalities = active
        .iter()
        .map(|j| (ConstraintMatrix::Outer(j.steering.clone()), j.required))
        .collect();

    let sol = sdp::solve(&problem, opts).map_err(|e| match e {
        SdpError::Infeasible(msg) => Error::Infeasible(format!("AN constraints: {msg}")),
        SdpError::MaxIterations { iterations, .. } => Error::Convergence {
            iterations,
            trace: Vec::new(),
        },
        other => Error::Sdp(other),
    })?;

    // factor inside the face so that nulled channels see exactly zero AN
    let face = &sol.face;
    let inner = hermitian_part(&(face.adjoint() * &sol.x * face));
    let (vals, vecs) = hermitian_eigen(&inner);
    let trace: f64 = vals.iter().sum();
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-10 * trace).collect();
    let mut factor = CMatrix::zeros(n, keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let v = face * vecs.column(i) * C64::new(vals[i].sqrt(), 0.0);
        factor.set_column(col, &v);
    }
    Ok(AnDesign {
        covariance: sol.x.clone(),
        an_power: sol.x.trace().re,
        factor,
    })
}

pub fn audit(d: &AnDesign, c: &AnConstraintSet) -> AnAudit {
    let tr = d.an_power;
    let scale = if tr > 0.0 { tr } else { 1.0 };
    let equality_violation = c
        .protected
        .iter()
        .map(|h| h.dotc(&(&d.covariance * h)).re.abs() / (scale * h.norm_squared().max(f64::MIN_POSITIVE)))
        .fold(0.0, f64::max);
    let ratios: Vec<f64> = c
        .jamming
        .iter()
        .filter(|j| j.required > 0.0)
        .map(|j| j.steering.dotc(&(&d.covariance * &j.steering)).re / j.required)
        .collect();
    let inequality_violation = ratios.iter().map(|r| (1.0 - r).max(0.0)).fold(0.0, f64::max);
    let tightness_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let recon = &d.factor * d.factor.adjoint();
    AnAudit {
        equality_violation,
        inequality_violation,
        min_eigen_ratio: min_eigenvalue(&d.covariance) / scale,
        tightness_ratio: if ratios.is_empty() { 1.0 } else { tightness_ratio },
        factor_error: (recon - &d.covariance).norm() / scale,
    }
}

/// Draws `n_A = P·z` with `z` standard circular complex Gaussian.
pub fn sample_an<R: Rng + ?Sized>(d: &AnDesign, rng: &mut R) -> CVector {
    let k = d.factor.ncols();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let z = CVector::from_fn(k, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * half, im * half)
    });
    &d.factor * z
}

/// Null-space projection baseline: `an_power` spread uniformly over the orthogonal complement of
/// the protected channels.
pub fn design_nsp_baseline(protected: &[ChannelVector], an_power: f64, n: usize) -> Result<AnDesign> {
    if !(an_power >= 0.0 && an_power.is_finite()) {
        return Err(Error::Domain(format!("AN power must be non-negative, got {an_power}")));
    }
    if protected.iter().any(|h| h.len() != n) {
        return Err(Error::Domain(format!("protected channels must have dimension {n}")));
    }
    if an_power == 0.0 || protected.len() >= n {
        return Ok(AnDesign::zero(n));
    }
    let rows = CMatrix::from_fn(protected.len(), n, |i, j| protected[i].entries[j].conj());
    let basis = null_space(&rows)?;
    let alpha = an_power / basis.ncols() as f64;
    let factor = basis.scale(alpha.sqrt());
    Ok(AnDesign {
        covariance: hermitian_part(&(&factor * factor.adjoint())),
        factor,
        an_power,
    })
}
