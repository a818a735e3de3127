//! Small dense linear SDP solver over complex Hermitian matrices.
//!
//! Solves `min tr(CX)` subject to `tr(AᵢX) = bᵢ`, `tr(GⱼX) ≥ cⱼ` and `X ⪰ 0`.
//!
//! The problem is handled natively in complex arithmetic. Before iterating, every equality of
//! the form `tr(AX) = 0` with `A ⪰ 0` is turned into a restriction of `X` to the null space of
//! `A` (facial reduction), so nulling constraints hold exactly rather than to solver tolerance.
//! The remaining problem is solved by an infeasible-start primal-dual interior point method
//! using the HKM search direction with Mehrotra's predictor-corrector. Rank-one constraints
//! `aaᴴ` are kept in factored form, which makes the Schur complement cheap to assemble.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{hermitian_eigen, hermitian_part, min_eigenvalue, trace_product_re, CMatrix, CVector, C64};

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("SDP is infeasible: {0}")]
    Infeasible(String),
    #[error("SDP is unbounded below")]
    Unbounded,
    #[error(
        "SDP solver stopped after {iterations} iterations (primal residual {primal_residual:.2e}, dual residual {dual_residual:.2e}, gap {gap:.2e})"
    )]
    MaxIterations {
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        gap: f64,
    },
    #[error("malformed SDP: {0}")]
    Malformed(String),
}

/// Constraint or objective coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintMatrix {
    Dense(CMatrix),
    /// Rank-one `aaᴴ`, stored as `a`.
    Outer(CVector),
}

impl ConstraintMatrix {
    pub fn dim(&self) -> usize {
        match self {
            ConstraintMatrix::Dense(m) => m.nrows(),
            ConstraintMatrix::Outer(a) => a.len(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            ConstraintMatrix::Dense(m) => m.clone(),
            ConstraintMatrix::Outer(a) => a * a.adjoint(),
        }
    }

    /// `Re tr(A·X)`
    pub fn inner(&self, x: &CMatrix) -> f64 {
        match self {
            ConstraintMatrix::Dense(m) => trace_product_re(m, x),
            ConstraintMatrix::Outer(a) => a.dotc(&(x * a)).re,
        }
    }

    fn frobenius(&self) -> f64 {
        match self {
            ConstraintMatrix::Dense(m) => m.norm(),
            ConstraintMatrix::Outer(a) => a.norm_squared(),
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        match self {
            ConstraintMatrix::Dense(m) => ConstraintMatrix::Dense(m.scale(factor)),
            ConstraintMatrix::Outer(a) => ConstraintMatrix::Outer(a.scale(factor.sqrt())),
        }
    }

    /// `Vᴴ·A·V`
    fn restrict(&self, v: &CMatrix) -> Self {
        match self {
            ConstraintMatrix::Dense(m) => ConstraintMatrix::Dense(hermitian_part(&(v.adjoint() * m * v))),
            ConstraintMatrix::Outer(a) => ConstraintMatrix::Outer(v.adjoint() * a),
        }
    }

    fn add_to(&self, target: &mut CMatrix, weight: f64) {
        match self {
            ConstraintMatrix::Dense(m) => *target += m.scale(weight),
            ConstraintMatrix::Outer(a) => *target += (a * a.adjoint()).scale(weight),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSdpProblem {
    pub dimension: usize,
    pub objective: CMatrix,
    /// `tr(A·X) = b`
    pub equalities: Vec<(ConstraintMatrix, f64)>,
    /// `tr(G·X) ≥ c`
    pub inequalities: Vec<(ConstraintMatrix, f64)>,
}

impl LinearSdpProblem {
    /// Trace minimisation, the objective used for AN covariance design.
    pub fn min_trace(dimension: usize) -> Self {
        Self {
            dimension,
            objective: CMatrix::identity(dimension, dimension),
            equalities: Vec::new(),
            inequalities: Vec::new(),
        }
    }

    pub fn validate(&self, max_dim: usize) -> Result<(), SdpError> {
        let n = self.dimension;
        if n > max_dim {
            return Err(SdpError::Malformed(format!(
                "dimension {n} exceeds the cap of {max_dim}"
            )));
        }
        if self.objective.shape() != (n, n) {
            return Err(SdpError::Malformed("objective has the wrong shape".into()));
        }
        check_hermitian(&self.objective, "objective")?;
        for (kind, list) in [("equality", &self.equalities), ("inequality", &self.inequalities)] {
            for (i, (a, b)) in list.iter().enumerate() {
                if a.dim() != n {
                    return Err(SdpError::Malformed(format!(
                        "{kind} {i} has dimension {} instead of {n}",
                        a.dim()
                    )));
                }
                if !b.is_finite() {
                    return Err(SdpError::Malformed(format!(
                        "{kind} {i} has a non-finite right-hand side"
                    )));
                }
                if let ConstraintMatrix::Dense(m) = a {
                    if m.shape() != (n, n) {
                        return Err(SdpError::Malformed(format!("{kind} {i} is not square")));
                    }
                    check_hermitian(m, kind)?;
                }
            }
        }
        Ok(())
    }
}

fn check_hermitian(m: &CMatrix, what: &str) -> Result<(), SdpError> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SdpError::Malformed(format!("{what} has non-finite entries")));
    }
    let skew = (m - m.adjoint()).norm();
    if skew > 1e-12 * m.norm().max(1.0) {
        return Err(SdpError::Malformed(format!(
            "{what} is not Hermitian (skew norm {skew:.2e})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_dim: usize,
    /// Return the last iterate flagged as not converged instead of failing at the iteration cap.
    pub accept_inaccurate: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 500,
            max_dim: 64,
            accept_inaccurate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpResiduals {
    /// `|tr(AᵢX) − bᵢ|` per equality.
    pub equality: Vec<f64>,
    /// `max(0, cⱼ − tr(GⱼX))` per inequality.
    pub inequality: Vec<f64>,
}

impl SdpResiduals {
    pub fn max(&self) -> f64 {
        self.equality
            .iter()
            .chain(&self.inequality)
            .fold(0.0, |a: f64, &b| a.max(b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: CMatrix,
    pub objective_value: f64,
    pub residuals: SdpResiduals,
    pub iterations: usize,
    pub converged: bool,
    /// Multipliers of the equalities followed by those of the inequalities. Equalities absorbed
    /// by facial reduction carry a zero multiplier.
    pub dual: Vec<f64>,
    /// Orthonormal basis `V` of the face `X = V·Y·Vᴴ` the solver worked on.
    pub face: CMatrix,
    /// `Σ yᵢbᵢ`, a lower bound on the optimum whenever `Vᴴ(C − Σ yᵢAᵢ)V ⪰ 0`.
    pub dual_objective: f64,
}

/// Reduced, normalised constraint handed to the interior point loop.
struct Row {
    mat: ConstraintMatrix,
    rhs: f64,
    slack: bool,
    /// Index into the caller's combined constraint list.
    source: usize,
    /// Factor that undoes the row normalisation of the multiplier.
    weight: f64,
}

pub fn solve(problem: &LinearSdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    problem.validate(opts.max_dim)?;
    let n = problem.dimension;
    let n_eq = problem.equalities.len();

    let face = facial_basis(problem)?;
    let p = face.ncols();
    let c_face = hermitian_part(&(face.adjoint() * &problem.objective * &face));

    let mut rows = Vec::new();
    let constraints = problem
        .equalities
        .iter()
        .map(|(a, b)| (a, *b, false))
        .chain(problem.inequalities.iter().map(|(a, c)| (a, *c, true)));
    for (source, (a, rhs, slack)) in constraints.enumerate() {
        let reduced = a.restrict(&face);
        let norm = reduced.frobenius();
        if norm <= 1e-12 * a.frobenius() || norm == 0.0 {
            let violated = if slack { rhs > 0.0 } else { rhs != 0.0 };
            if violated {
                return Err(SdpError::Infeasible(format!(
                    "constraint {source} vanishes on the feasible face but requires {rhs}"
                )));
            }
            continue;
        }
        rows.push(Row {
            mat: reduced.scaled(1.0 / norm),
            rhs: rhs / norm,
            slack,
            source,
            weight: 1.0 / norm,
        });
    }

    let total = n_eq + problem.inequalities.len();
    let (y_face, dual, iterations, converged) = if rows.is_empty() || p == 0 {
        if p > 0 && min_eigenvalue(&c_face) < -1e-12 * c_face.norm() {
            return Err(SdpError::Unbounded);
        }
        (CMatrix::zeros(p, p), vec![0.0; total], 0, true)
    } else {
        let b_scale = rows.iter().fold(0.0f64, |m, r| m.max(r.rhs.abs()));
        let b_scale = if b_scale > 0.0 { b_scale } else { 1.0 };
        let c_norm = c_face.norm();
        let c_scale = if c_norm > 0.0 { c_norm } else { 1.0 };
        for r in &mut rows {
            r.rhs /= b_scale;
        }
        let out = Ipm::new(c_face.unscale(c_scale), &rows).run(opts)?;
        let mut dual = vec![0.0; total];
        for (r, yk) in rows.iter().zip(out.y.iter()) {
            dual[r.source] = yk * c_scale * r.weight;
        }
        (out.x.scale(b_scale), dual, out.iterations, out.converged)
    };

    let x = hermitian_part(&(&face * y_face * face.adjoint()));
    debug_assert_eq!(x.nrows(), n);
    let residuals = SdpResiduals {
        equality: problem
            .equalities
            .iter()
            .map(|(a, b)| (a.inner(&x) - b).abs())
            .collect(),
        inequality: problem
            .inequalities
            .iter()
            .map(|(g, c)| (c - g.inner(&x)).max(0.0))
            .collect(),
    };
    let dual_objective = problem
        .equalities
        .iter()
        .map(|(_, b)| *b)
        .chain(problem.inequalities.iter().map(|(_, c)| *c))
        .zip(&dual)
        .map(|(b, y)| b * y)
        .sum();
    Ok(SdpSolution {
        objective_value: trace_product_re(&problem.objective, &x),
        x,
        residuals,
        iterations,
        converged,
        dual,
        face,
        dual_objective,
    })
}

/// Basis of the largest face on which all homogeneous PSD equalities hold.
fn facial_basis(problem: &LinearSdpProblem) -> Result<CMatrix, SdpError> {
    let n = problem.dimension;
    let mut range: Vec<CVector> = Vec::new();
    for (a, b) in &problem.equalities {
        if *b != 0.0 {
            continue;
        }
        match a {
            ConstraintMatrix::Outer(v) => range.push(v.clone()),
            ConstraintMatrix::Dense(m) => {
                let (vals, vecs) = hermitian_eigen(m);
                let top = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                if top == 0.0 || vals[0] < -1e-12 * top {
                    continue;
                }
                for (i, &v) in vals.iter().enumerate() {
                    if v > 1e-12 * top {
                        range.push(vecs.column(i).scale(v.sqrt()));
                    }
                }
            }
        }
    }
    if range.is_empty() {
        return Ok(CMatrix::identity(n, n));
    }
    let r = range.len();
    let mut stacked = CMatrix::zeros(r.max(n), n);
    for (i, v) in range.iter().enumerate() {
        for j in 0..n {
            stacked[(i, j)] = v[j].conj();
        }
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let s = &svd.singular_values;
    let top = s.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut null_idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= 1e-10 * top).collect();
    null_idx.sort_unstable();
    let mut basis = CMatrix::zeros(n, null_idx.len());
    for (col, &i) in null_idx.iter().enumerate() {
        for row in 0..n {
            basis[(row, col)] = v_t[(i, row)].conj();
        }
    }
    Ok(basis)
}

struct IpmOutput {
    x: CMatrix,
    y: DVector<f64>,
    iterations: usize,
    converged: bool,
}

struct Direction {
    dx: CMatrix,
    ds: DVector<f64>,
    dy: DVector<f64>,
    dz: CMatrix,
    dt: DVector<f64>,
}

struct Ipm<'a> {
    c: CMatrix,
    rows: &'a [Row],
    b: DVector<f64>,
    /// Positions of slack rows inside `rows`.
    slack_rows: Vec<usize>,
    outer_rows: Vec<usize>,
    /// Columns are the rank-one factors of `outer_rows`.
    w: CMatrix,
}

const STEP_FRACTION: f64 = 0.98;

impl<'a> Ipm<'a> {
    fn new(c: CMatrix, rows: &'a [Row]) -> Self {
        let p = c.nrows();
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.rhs));
        let slack_rows = (0..rows.len()).filter(|&k| rows[k].slack).collect();
        let outer_rows: Vec<usize> = (0..rows.len())
            .filter(|&k| matches!(rows[k].mat, ConstraintMatrix::Outer(_)))
            .collect();
        let mut w = CMatrix::zeros(p, outer_rows.len());
        for (col, &k) in outer_rows.iter().enumerate() {
            if let ConstraintMatrix::Outer(a) = &rows[k].mat {
                w.set_column(col, a);
            }
        }
        Self {
            c,
            rows,
            b,
            slack_rows,
            outer_rows,
            w,
        }
    }

    fn apply(&self, x: &CMatrix, s: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.mat.inner(x)));
        for (j, &k) in self.slack_rows.iter().enumerate() {
            out[k] -= s[j];
        }
        out
    }

    fn adjoint(&self, y: &DVector<f64>) -> CMatrix {
        let mut weighted = self.w.clone();
        for (col, &k) in self.outer_rows.iter().enumerate() {
            weighted.column_mut(col).scale_mut(y[k]);
        }
        let mut out = weighted * self.w.adjoint();
        for (r, &yk) in self.rows.iter().zip(y.iter()) {
            if let ConstraintMatrix::Dense(_) = r.mat {
                r.mat.add_to(&mut out, yk);
            }
        }
        out
    }

    /// `M_kl = Re tr(A_k X A_l Z⁻¹)` plus the slack block `s/t` on the diagonal.
    fn schur(&self, x: &CMatrix, zinv: &CMatrix, s: &DVector<f64>, t: &DVector<f64>) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut out = DMatrix::zeros(m, m);
        if !self.outer_rows.is_empty() {
            let px = self.w.adjoint() * x * &self.w;
            let qz = self.w.adjoint() * zinv * &self.w;
            for (i, &k) in self.outer_rows.iter().enumerate() {
                for (j, &l) in self.outer_rows.iter().enumerate() {
                    out[(k, l)] = (px[(i, j)] * qz[(i, j)].conj()).re;
                }
            }
        }
        for (l, row) in self.rows.iter().enumerate() {
            if let ConstraintMatrix::Dense(al) = &row.mat {
                let u = x * al * zinv;
                for (k, other) in self.rows.iter().enumerate() {
                    let v = other.mat.inner(&u);
                    out[(k, l)] = v;
                    out[(l, k)] = v;
                }
            }
        }
        for (j, &k) in self.slack_rows.iter().enumerate() {
            out[(k, k)] += s[j] / t[j];
        }
        out
    }

    fn run(&self, opts: &SdpOptions) -> Result<IpmOutput, SdpError> {
        let p = self.c.nrows();
        let m = self.rows.len();
        let ms = self.slack_rows.len();
        let nu = (p + ms) as f64;
        let start = 10f64.max((p as f64).sqrt());

        let mut x = CMatrix::identity(p, p).scale(start);
        let mut z = x.clone();
        let mut s = DVector::from_element(ms, start);
        let mut t = s.clone();
        let mut y = DVector::<f64>::zeros(m);

        let b_norm = self.b.norm();
        let c_norm = self.c.norm();
        let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

        for iteration in 0..opts.max_iter {
            let rp = &self.b - self.apply(&x, &s);
            let rd = &self.c - &z - self.adjoint(&y);
            let rd_s = DVector::from_iterator(ms, self.slack_rows.iter().enumerate().map(|(j, &k)| y[k] - t[j]));
            let pobj = trace_product_re(&self.c, &x);
            let dobj = self.b.dot(&y);
            let mu = (trace_product_re(&x, &z) + s.dot(&t)) / nu;

            let primal_res = rp.norm() / (1.0 + b_norm);
            let dual_res = (rd.norm() + rd_s.norm()) / (1.0 + c_norm);
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            last = (primal_res, dual_res, gap);
            if primal_res < opts.tol && dual_res < opts.tol && gap < opts.tol {
                return Ok(IpmOutput {
                    x,
                    y,
                    iterations: iteration,
                    converged: true,
                });
            }
            // a diverging dual objective with bounded dual residual certifies primal infeasibility
            if dobj > 1e8 * (1.0 + (&self.c - &rd).norm()) && dual_res < 1e-3 * (1.0 + dobj) {
                return Err(SdpError::Infeasible("dual ray found".into()));
            }

            let Some(zinv) = spd_inverse(&z) else { break };
            let schur = self.schur(&x, &zinv, &s, &t);
            let Some(factor) = SchurFactor::new(schur) else { break };

            let ctx = StepContext {
                x: &x,
                s: &s,
                t: &t,
                zinv: &zinv,
                rp: &rp,
                rd: &rd,
                rd_s: &rd_s,
                factor: &factor,
            };
            let affine = self.direction(&ctx, 0.0, None);
            let (ap, ad) = match (
                self.step_length(&x, &s, &affine.dx, &affine.ds),
                self.step_length(&z, &t, &affine.dz, &affine.dt),
            ) {
                (Some(a), Some(b)) => (a.min(1.0), b.min(1.0)),
                _ => break,
            };
            let x_aff = &x + affine.dx.scale(ap);
            let z_aff = &z + affine.dz.scale(ad);
            let mu_aff =
                (trace_product_re(&x_aff, &z_aff) + (&s + affine.ds.scale(ap)).dot(&(&t + affine.dt.scale(ad)))) / nu;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            let dir = self.direction(&ctx, sigma * mu, Some(&affine));
            let (ap, ad) = match (
                self.step_length(&x, &s, &dir.dx, &dir.ds),
                self.step_length(&z, &t, &dir.dz, &dir.dt),
            ) {
                (Some(a), Some(b)) => ((STEP_FRACTION * a).min(1.0), (STEP_FRACTION * b).min(1.0)),
                _ => break,
            };
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
            x = hermitian_part(&(&x + dir.dx.scale(ap)));
            s += dir.ds.scale(ap);
            y += dir.dy.scale(ad);
            z = hermitian_part(&(&z + dir.dz.scale(ad)));
            t += dir.dt.scale(ad);
        }

        if opts.accept_inaccurate {
            return Ok(IpmOutput {
                x,
                y,
                iterations: opts.max_iter,
                converged: false,
            });
        }
        Err(SdpError::MaxIterations {
            iterations: opts.max_iter,
            primal_residual: last.0,
            dual_residual: last.1,
            gap: last.2,
        })
    }

    fn direction(&self, ctx: &StepContext, target: f64, corrector: Option<&Direction>) -> Direction {
        let StepContext {
            x,
            s,
            t,
            zinv,
            rp,
            rd,
            rd_s,
            factor,
        } = *ctx;
        // ΔX = H + X·(Σ Δy_l A_l)·Z⁻¹ with H collecting everything that does not depend on Δy
        let mut h = zinv.scale(target) - x - x * rd * zinv;
        let mut hs = DVector::from_fn(s.len(), |j, _| target / t[j] - s[j] - s[j] * rd_s[j] / t[j]);
        if let Some(c) = corrector {
            h -= &c.dx * &c.dz * zinv;
            for j in 0..s.len() {
                hs[j] -= c.ds[j] * c.dt[j] / t[j];
            }
        }
        let mut rhs = rp - DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.mat.inner(&h)));
        for (j, &k) in self.slack_rows.iter().enumerate() {
            rhs[k] += hs[j];
        }
        let dy = factor.solve(&rhs);
        let dz = rd - self.adjoint(&dy);
        let dx = hermitian_part(&(h + x * self.adjoint(&dy) * zinv));
        let dt = DVector::from_fn(s.len(), |j, _| rd_s[j] + dy[self.slack_rows[j]]);
        let ds = DVector::from_fn(s.len(), |j, _| hs[j] - s[j] / t[j] * dy[self.slack_rows[j]]);
        Direction { dx, ds, dy, dz, dt }
    }

    /// Largest step keeping `(X + αΔX, s + αΔs)` in the cone, or `None` if `X` lost definiteness.
    fn step_length(&self, x: &CMatrix, s: &DVector<f64>, dx: &CMatrix, ds: &DVector<f64>) -> Option<f64> {
        let chol = x.clone().cholesky()?;
        let l = chol.l();
        let linv = l.solve_lower_triangular(&CMatrix::identity(x.nrows(), x.nrows()))?;
        let scaled = &linv * dx * linv.adjoint();
        let lam = min_eigenvalue(&scaled);
        let mut alpha = if lam < 0.0 { -1.0 / lam } else { f64::INFINITY };
        for j in 0..s.len() {
            if ds[j] < 0.0 {
                alpha = alpha.min(-s[j] / ds[j]);
            }
        }
        Some(alpha)
    }
}

#[derive(Clone, Copy)]
struct StepContext<'a> {
    x: &'a CMatrix,
    s: &'a DVector<f64>,
    t: &'a DVector<f64>,
    zinv: &'a CMatrix,
    rp: &'a DVector<f64>,
    rd: &'a CMatrix,
    rd_s: &'a DVector<f64>,
    factor: &'a SchurFactor,
}

enum SchurFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return None;
        }
        if let Some(c) = m.clone().cholesky() {
            return Some(SchurFactor::Cholesky(c));
        }
        let lu = m.lu();
        lu.is_invertible().then_some(SchurFactor::Lu(lu))
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            SchurFactor::Cholesky(c) => c.solve(rhs),
            SchurFactor::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
        }
    }
}

fn spd_inverse(m: &CMatrix) -> Option<CMatrix> {
    let inv = m.clone().cholesky()?.inverse();
    Some(hermitian_part(&inv))
}

/// Header line of the plain-text dump format.
pub const DUMP_HEADER: &str = "# sdp-dump v1";

/// Writes a problem (and optionally its solution) in a line-oriented text format:
///
/// ```text
/// # sdp-dump v1
/// dim <n>
/// objective
/// <n rows, each n pairs "re im">
/// eq <b> dense|outer          (then n rows, or one row of n pairs for outer)
/// ineq <c> dense|outer
/// solution <objective> <iterations>
/// <n rows of X>
/// ```
///
/// Numbers use Rust's shortest round-trip representation so a dump reloads bit for bit.
pub fn write_dump(out: &mut impl Write, problem: &LinearSdpProblem, solution: Option<&SdpSolution>) -> io::Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "{DUMP_HEADER}");
    let _ = writeln!(text, "dim {}", problem.dimension);
    let _ = writeln!(text, "objective");
    push_matrix(&mut text, &problem.objective);
    for (kind, list) in [("eq", &problem.equalities), ("ineq", &problem.inequalities)] {
        for (a, b) in list {
            match a {
                ConstraintMatrix::Dense(m) => {
                    let _ = writeln!(text, "{kind} {b:e} dense");
                    push_matrix(&mut text, m);
                }
                ConstraintMatrix::Outer(v) => {
                    let _ = writeln!(text, "{kind} {b:e} outer");
                    push_row(&mut text, v.iter());
                }
            }
        }
    }
    if let Some(sol) = solution {
        let _ = writeln!(text, "solution {:e} {}", sol.objective_value, sol.iterations);
        push_matrix(&mut text, &sol.x);
    }
    out.write_all(text.as_bytes())
}

fn push_row<'a>(text: &mut String, entries: impl Iterator<Item = &'a C64>) {
    let parts: Vec<String> = entries.map(|z| format!("{:e} {:e}", z.re, z.im)).collect();
    let _ = writeln!(text, "{}", parts.join(" "));
}

fn push_matrix(text: &mut String, m: &CMatrix) {
    for r in 0..m.nrows() {
        push_row(text, m.row(r).iter());
    }
}

/// Problem and optional solution matrix read back from [`write_dump`] output.
pub fn read_dump(input: impl BufRead) -> io::Result<(LinearSdpProblem, Option<CMatrix>)> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut lines = input.lines();
    let mut next = || -> io::Result<String> { lines.next().ok_or_else(|| bad("unexpected end of dump"))? };

    if next()?.trim() != DUMP_HEADER {
        return Err(bad("missing dump header"));
    }
    let dim_line = next()?;
    let n: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| bad("bad dim line"))?;

    let parse_row = |line: &str| -> io::Result<Vec<C64>> {
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad("bad number")))
            .collect::<io::Result<_>>()?;
        if nums.len() != 2 * n {
            return Err(bad("row has the wrong length"));
        }
        Ok(nums.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
    };
    let read_matrix = |next: &mut dyn FnMut() -> io::Result<String>| -> io::Result<CMatrix> {
        let mut m = CMatrix::zeros(n, n);
        for r in 0..n {
            for (c, z) in parse_row(&next()?)?.into_iter().enumerate() {
                m[(r, c)] = z;
            }
        }
        Ok(m)
    };

    if next()?.trim() != "objective" {
        return Err(bad("expected objective"));
    }
    let mut problem = LinearSdpProblem {
        dimension: n,
        objective: read_matrix(&mut next)?,
        equalities: Vec::new(),
        inequalities: Vec::new(),
    };
    let mut solution = None;
    while let Ok(line) = next() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [kind @ ("eq" | "ineq"), rhs, form] => {
                let rhs: f64 = rhs.parse().map_err(|_| bad("bad right-hand side"))?;
                let mat = match *form {
                    "dense" => ConstraintMatrix::Dense(read_matrix(&mut next)?),
                    "outer" => {
                        let line = next()?;
                        ConstraintMatrix::Outer(CVector::from_vec(parse_row(&line)?))
                    }
                    _ => return Err(bad("unknown constraint form")),
                };
                if *kind == "eq" {
                    problem.equalities.push((mat, rhs));
                } else {
                    problem.inequalities.push((mat, rhs));
                }
            }
            ["solution", _, _] => solution = Some(read_matrix(&mut next)?),
            _ => return Err(bad("unrecognised line")),
        }
    }
    Ok((problem, solution))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn analytic_instance() -> LinearSdpProblem {
        let s = 0.5f64.sqrt();
        let mut p = LinearSdpProblem::min_trace(2);
        p.equalities
            .push((ConstraintMatrix::Outer(CVector::from_vec(vec![c(1.0), c(0.0)])), 0.0));
        p.inequalities
            .push((ConstraintMatrix::Outer(CVector::from_vec(vec![c(s), c(s)])), 1.0));
        p
    }

    #[test]
    fn unconstrained_identity_gives_zero() {
        let sol = solve(&LinearSdpProblem::min_trace(3), &SdpOptions::default()).unwrap();
        assert_eq!(sol.objective_value, 0.0);
        assert_eq!(sol.x.norm(), 0.0);
    }

    #[test]
    fn unconstrained_indefinite_is_unbounded() {
        let mut p = LinearSdpProblem::min_trace(2);
        p.objective[(1, 1)] = c(-1.0);
        assert!(matches!(solve(&p, &SdpOptions::default()), Err(SdpError::Unbounded)));
    }

    #[test]
    fn null_space_instance() {
        let sol = solve(&analytic_instance(), &SdpOptions::default()).unwrap();
        assert!((sol.objective_value - 2.0).abs() < 1e-6, "{}", sol.objective_value);
        assert!((sol.x[(1, 1)].re - 2.0).abs() < 1e-6);
        assert!(sol.x[(0, 0)].norm() < 1e-14);
        assert!(sol.x[(0, 1)].norm() < 1e-14);
        assert!(sol.dual_objective <= sol.objective_value + 1e-6);
    }

    #[test]
    fn trace_bound_instance() {
        let mut p = LinearSdpProblem::min_trace(2);
        p.inequalities
            .push((ConstraintMatrix::Dense(CMatrix::identity(2, 2)), 5.0));
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert!((sol.objective_value - 5.0).abs() < 1e-5);
    }

    #[test]
    fn jamming_inside_protected_span_is_infeasible() {
        let mut p = LinearSdpProblem::min_trace(2);
        p.equalities
            .push((ConstraintMatrix::Outer(CVector::from_vec(vec![c(1.0), c(0.0)])), 0.0));
        p.inequalities
            .push((ConstraintMatrix::Outer(CVector::from_vec(vec![c(2.0), c(0.0)])), 1.0));
        assert!(matches!(
            solve(&p, &SdpOptions::default()),
            Err(SdpError::Infeasible(_))
        ));
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        // tr(X) = 1 and X₁₁ ≥ 2 cannot both hold for PSD X
        let mut p = LinearSdpProblem::min_trace(2);
        p.equalities
            .push((ConstraintMatrix::Dense(CMatrix::identity(2, 2)), 1.0));
        p.inequalities
            .push((ConstraintMatrix::Outer(CVector::from_vec(vec![c(1.0), c(0.0)])), 2.0));
        assert!(matches!(
            solve(&p, &SdpOptions::default()),
            Err(SdpError::Infeasible(_))
        ));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let opts = SdpOptions {
            max_iter: 2,
            ..SdpOptions::default()
        };
        assert!(matches!(
            solve(&analytic_instance(), &opts),
            Err(SdpError::MaxIterations { .. })
        ));
        let loose = SdpOptions {
            accept_inaccurate: true,
            ..opts
        };
        assert!(!solve(&analytic_instance(), &loose).unwrap().converged);
    }

    #[test]
    fn rejects_non_hermitian_and_oversized() {
        let mut p = LinearSdpProblem::min_trace(2);
        p.objective[(0, 1)] = c(1.0);
        assert!(matches!(solve(&p, &SdpOptions::default()), Err(SdpError::Malformed(_))));
        let big = LinearSdpProblem::min_trace(65);
        assert!(matches!(
            solve(&big, &SdpOptions::default()),
            Err(SdpError::Malformed(_))
        ));
    }

    #[test]
    fn dump_round_trip() {
        let p = analytic_instance();
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &p, Some(&sol)).unwrap();
        let (back, x) = read_dump(buf.as_slice()).unwrap();
        assert_eq!(back, p);
        assert_eq!(x.unwrap(), sol.x);
    }
}
