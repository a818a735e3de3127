//! Grid sweeps, parameter curves and constellation captures, plus their CSV and image outputs.
//!
//! Every CSV starts with `#` comment lines: a versioned schema tag, the column list, the design
//! power report and the fully defaulted scenario, so an output file is self-describing. Values
//! that are not finite (for instance the dB value of a zero SINR) are written as empty fields.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::CartesianPoint;
use crate::metrics::{effective_zone_at, point_metrics, simulate_ser, MetricRecord, ZoneFlags};
use crate::scenario::{linear_to_db, watts_to_dbm, Scenario};
use crate::signal::{decide, psk_point, received, BranchResponse, D3mSystem, DemodDraws};
use crate::system::{run_design, DesignBundle, SatSystem};

pub const SWEEP_SCHEMA: &str = "d3m-sweep v1";
pub const CURVE_SCHEMA: &str = "d3m-curve v1";
pub const CONSTELLATION_SCHEMA: &str = "d3m-constellation v1";

/// Metrics of one grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub point: CartesianPoint,
    pub d3m: MetricRecord,
    pub zone: ZoneFlags,
    /// Monte Carlo SER, when `monte_carlo.sweep_symbols > 0`.
    pub ser_mc: Option<f64>,
    pub sat: Option<MetricRecord>,
    pub nsp: Option<MetricRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub axis_x: Vec<f64>,
    pub axis_y: Vec<f64>,
    /// Row-major, x varying fastest.
    pub rows: Vec<GridRow>,
    /// SINR (best component) of each user at its own location.
    pub user_sinr: Vec<f64>,
}

impl GridResult {
    /// Row of the grid node nearest to `p`.
    pub fn nearest(&self, p: CartesianPoint) -> &GridRow {
        let pick = |axis: &[f64], v: f64| {
            (0..axis.len())
                .min_by(|&a, &b| (axis[a] - v).abs().total_cmp(&(axis[b] - v).abs()))
                .unwrap_or(0)
        };
        &self.rows[pick(&self.axis_y, p.y) * self.axis_x.len() + pick(&self.axis_x, p.x)]
    }
}

fn own_sinrs(sys: &D3mSystem, noise_var: f64) -> Result<Vec<f64>> {
    (0..sys.streams.len())
        .map(|k| {
            let r = sys.branch_response(sys.streams[k].user, k, noise_var)?;
            Ok(crate::metrics::branch_sinr(&r).best())
        })
        .collect()
}

fn sat_own_sinrs(sat: &SatSystem, users: &[CartesianPoint], noise_var: f64) -> Result<Vec<f64>> {
    users
        .iter()
        .enumerate()
        .map(|(k, &u)| Ok(crate::metrics::branch_sinr(&sat.responses(u, noise_var)?[k]).best()))
        .collect()
}

/// Random stream for grid node or capture `index`, independent of evaluation order.
fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates every grid node in parallel. Grid nodes are treated as eavesdroppers, so they use
/// Eve's noise level; user SINRs use the users' noise level.
pub fn run_sweep(s: &Scenario, bundle: &DesignBundle) -> Result<GridResult> {
    let sys = &bundle.system;
    let noise_u = s.noise_var();
    let noise_e = s.eve_noise_var();
    let threshold = s.orthogonality_threshold();
    let user_sinr = own_sinrs(sys, noise_u)?;
    let nsp_sinr = bundle.nsp.as_ref().map(|n| own_sinrs(n, noise_u)).transpose()?;
    let users = s.user_points();
    let sat_sinr = bundle
        .sat
        .as_ref()
        .map(|t| sat_own_sinrs(t, &users, noise_u))
        .transpose()?;
    let symbols = s.monte_carlo.sweep_symbols;
    let order = s.radio.modulation_order;
    let seed = s.monte_carlo.seed;

    let rows = s
        .grid
        .points()
        .into_par_iter()
        .enumerate()
        .map(|(idx, p)| -> Result<GridRow> {
            let v = sys.view(p)?;
            let responses = sys.responses_at(&v, noise_e);
            let d3m = point_metrics(&responses, &user_sinr);
            let zone = effective_zone_at(&v, sys, d3m.stream, threshold)?;
            let ser_mc = (symbols > 0).then(|| {
                let mut rng = point_rng(seed, idx as u64);
                simulate_ser(&responses[d3m.stream], order, symbols, &mut rng).rate()
            });
            let nsp = match (&bundle.nsp, &nsp_sinr) {
                (Some(n), Some(us)) => Some(point_metrics(&n.responses_at(&v, noise_e), us)),
                _ => None,
            };
            let sat = match (&bundle.sat, &sat_sinr) {
                (Some(t), Some(us)) => Some(point_metrics(&t.responses(p, noise_e)?, us)),
                _ => None,
            };
            Ok(GridRow {
                point: p,
                d3m,
                zone,
                ser_mc,
                sat,
                nsp,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GridResult {
        axis_x: s.grid.axis_x(),
        axis_y: s.grid.axis_y(),
        rows,
        user_sinr,
    })
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        String::new()
    }
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn db(v: f64) -> String {
    num(linear_to_db(v))
}

fn write_preamble(
    out: &mut impl Write,
    schema: &str,
    columns: &[String],
    extra: &[String],
    s: &Scenario,
) -> Result<()> {
    writeln!(out, "# {schema}")?;
    writeln!(out, "# columns: {}", columns.join(","))?;
    for line in extra {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# scenario:")?;
    for line in s.echo().lines() {
        writeln!(out, "#   {line}")?;
    }
    Ok(())
}

fn power_line(bundle: &DesignBundle) -> String {
    let p = &bundle.power;
    format!(
        "power_w: message_i={:?} message_q={:?} an_i={:?} an_q={:?} an_scale={:?} (AN split proportional to designed per-transmitter AN power)",
        p.message_i, p.message_q, p.an_i, p.an_q, p.an_scale
    )
}

fn write_records(
    out: &mut csv::Writer<impl Write>,
    header: Vec<String>,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    out.write_record(&header).map_err(csv_error)?;
    for r in rows {
        out.write_record(&r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn sweep_columns(result: &GridResult) -> Vec<String> {
    let mut cols: Vec<String> = [
        "x",
        "y",
        "stream",
        "msg_power_dbm",
        "sinr_i_db",
        "sinr_q_db",
        "sinr_total_db",
        "ser",
        "secrecy_rate",
        "in_mainlobe_i",
        "in_mainlobe_q",
        "aligned",
        "orthogonal",
        "in_zone",
    ]
    .iter()
    .map(|c| c.to_string())
    .collect();
    let first = result.rows.first();
    if first.is_some_and(|r| r.ser_mc.is_some()) {
        cols.push("ser_mc".into());
    }
    for (prefix, present) in [
        ("sat", first.is_some_and(|r| r.sat.is_some())),
        ("nsp", first.is_some_and(|r| r.nsp.is_some())),
    ] {
        if present {
            for c in ["sinr_i_db", "sinr_q_db", "ser", "secrecy_rate"] {
                cols.push(format!("{prefix}_{c}"));
            }
        }
    }
    cols
}

fn metric_fields(m: &MetricRecord) -> [String; 4] {
    [
        db(m.sinr.in_phase),
        db(m.sinr.quadrature),
        num(m.ser),
        num(m.secrecy_rate),
    ]
}

pub fn write_sweep_csv(out: impl Write, s: &Scenario, bundle: &DesignBundle, result: &GridResult) -> Result<()> {
    let mut out = out;
    let cols = sweep_columns(result);
    let user_line = format!(
        "user_sinr_db: {}",
        result
            .user_sinr
            .iter()
            .map(|&v| num(linear_to_db(v)))
            .collect::<Vec<_>>()
            .join(",")
    );
    write_preamble(&mut out, SWEEP_SCHEMA, &cols, &[power_line(bundle), user_line], s)?;
    let mut w = csv::Writer::from_writer(out);
    let rows = result.rows.iter().map(|r| {
        let m = &r.d3m;
        let mut f = vec![
            num(r.point.x),
            num(r.point.y),
            m.stream.to_string(),
            num(watts_to_dbm(m.msg_power_w)),
            db(m.sinr.in_phase),
            db(m.sinr.quadrature),
            db(m.sinr.total()),
            num(m.ser),
            num(m.secrecy_rate),
            flag(r.zone.in_mainlobe_i),
            flag(r.zone.in_mainlobe_q),
            flag(r.zone.aligned),
            flag(r.zone.orthogonal),
            flag(r.zone.all),
        ];
        if let Some(v) = r.ser_mc {
            f.push(num(v));
        }
        for b in [&r.sat, &r.nsp].into_iter().flatten() {
            f.extend(metric_fields(b));
        }
        f
    });
    write_records(&mut w, cols, rows)
}

/// Quantities that can be rendered by [`write_heatmap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapField {
    MessagePowerDbm,
    SinrInPhaseDb,
    Ser,
    SecrecyRate,
}

impl HeatmapField {
    pub const ALL: [HeatmapField; 4] = [
        HeatmapField::MessagePowerDbm,
        HeatmapField::SinrInPhaseDb,
        HeatmapField::Ser,
        HeatmapField::SecrecyRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeatmapField::MessagePowerDbm => "msg_power_dbm",
            HeatmapField::SinrInPhaseDb => "sinr_i_db",
            HeatmapField::Ser => "ser",
            HeatmapField::SecrecyRate => "secrecy_rate",
        }
    }

    fn value(self, r: &GridRow) -> f64 {
        match self {
            HeatmapField::MessagePowerDbm => watts_to_dbm(r.d3m.msg_power_w),
            HeatmapField::SinrInPhaseDb => linear_to_db(r.d3m.sinr.in_phase),
            HeatmapField::Ser => r.d3m.ser,
            HeatmapField::SecrecyRate => r.d3m.secrecy_rate,
        }
    }
}

/// 8-bit grayscale PNG of one field (black = minimum, top row = largest y) and a sidecar
/// `<stem>.scale` file holding the value range. Non-finite values are drawn black.
pub fn write_heatmap(dir: &Path, result: &GridResult, field: HeatmapField) -> Result<()> {
    let (nx, ny) = (result.axis_x.len(), result.axis_y.len());
    let values: Vec<f64> = result.rows.iter().map(|r| field.value(r)).collect();
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let img = image::GrayImage::from_fn(nx as u32, ny as u32, |px, py| {
        let v = values[(ny - 1 - py as usize) * nx + px as usize];
        let level = if v.is_finite() {
            ((v - lo) / span * 255.0).round()
        } else {
            0.0
        };
        image::Luma([level as u8])
    });
    let stem = field.name();
    img.save(dir.join(format!("{stem}.png")))
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    std::fs::write(
        dir.join(format!("{stem}.scale")),
        format!("field={stem}\nmin={}\nmax={}\n", num(lo), num(hi)),
    )?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    MsgPowerVsSnr,
    AnPowerVsAntennas,
    SecrecyVsTotalPower,
}

impl CurveKind {
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::MsgPowerVsSnr => "msg_power_vs_snr",
            CurveKind::AnPowerVsAntennas => "an_power_vs_antennas",
            CurveKind::SecrecyVsTotalPower => "secrecy_vs_total_power",
        }
    }
}

impl std::str::FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            CurveKind::MsgPowerVsSnr,
            CurveKind::AnPowerVsAntennas,
            CurveKind::SecrecyVsTotalPower,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::config("curve", format!("unknown curve kind `{s}`")))
    }
}

/// Numeric table, one row per curve point. `NaN` marks an absent value.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub kind: CurveKind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv(&self, out: impl Write, s: &Scenario) -> Result<()> {
        let mut out = out;
        write_preamble(
            &mut out,
            CURVE_SCHEMA,
            &self.columns,
            &[format!("curve: {}", self.kind.name())],
            s,
        )?;
        let mut w = csv::Writer::from_writer(out);
        write_records(
            &mut w,
            self.columns.clone(),
            self.rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()),
        )
    }
}

fn with_elements(s: &Scenario, total: usize) -> Scenario {
    let mut t = s.clone();
    t.arrays.total_elements = total;
    t.arrays.elements_i = None;
    t.arrays.elements_q = None;
    t.solver.sdp_max_dim = t.solver.sdp_max_dim.max(total);
    t.budget.power_w = None;
    t
}

/// Sweeps the parameter named by `kind`, re-running the design at every point.
///
/// * `msg_power_vs_snr`: every element count in `curves.antennas` against every SNR target in
///   `curves.snr_db` (applied to all users), AN disabled.
/// * `an_power_vs_antennas`: every `curves.gamma_db` against every element count.
/// * `secrecy_vs_total_power`: every element count against every budget in `curves.budgets_w`.
///   Eavesdroppers are the grid nodes at least `curves.eve_exclusion_m` from every user.
pub fn run_curves(s: &Scenario, kind: CurveKind) -> Result<CurveTable> {
    s.validate()?;
    let c = &s.curves;
    let sat = s.baselines.sat;
    let mut columns: Vec<&str> = Vec::new();
    let mut rows = Vec::new();
    match kind {
        CurveKind::MsgPowerVsSnr => {
            columns.extend(["total_elements", "users", "snr_db", "msg_power_w", "msg_power_dbm"]);
            if sat {
                columns.push("sat_msg_power_w");
            }
            let jobs: Vec<(usize, f64)> = c
                .antennas
                .iter()
                .flat_map(|&n| c.snr_db.iter().map(move |&z| (n, z)))
                .collect();
            rows = jobs
                .par_iter()
                .map(|&(n, z)| {
                    let mut t = with_elements(s, n);
                    t.an.enabled = false;
                    for u in &mut t.users {
                        u.snr_db = z;
                    }
                    let b = run_design(&t)?;
                    let mut row = vec![
                        n as f64,
                        t.users.len() as f64,
                        z,
                        b.power.message(),
                        watts_to_dbm(b.power.message()),
                    ];
                    if let Some(st) = &b.sat {
                        row.push(st.message_power());
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
        }
        CurveKind::AnPowerVsAntennas => {
            columns.extend(["gamma_db", "total_elements", "users", "an_power_w", "msg_power_w"]);
            if sat {
                columns.push("sat_an_power_w");
            }
            for &g in &c.gamma_db {
                for &n in &c.antennas {
                    let mut t = with_elements(s, n);
                    t.an.enabled = true;
                    t.an.gamma_db = g;
                    let b = run_design(&t)?;
                    let mut row = vec![g, n as f64, t.users.len() as f64, b.power.an(), b.power.message()];
                    if let Some(st) = &b.sat {
                        row.push(st.an.an_power);
                    }
                    rows.push(row);
                }
            }
        }
        CurveKind::SecrecyVsTotalPower => {
            columns.extend([
                "total_elements",
                "budget_w",
                "msg_power_w",
                "an_power_w",
                "secrecy_rate",
                "upper_bound",
            ]);
            if sat {
                columns.push("sat_secrecy_rate");
            }
            if s.baselines.nsp {
                columns.push("nsp_secrecy_rate");
            }
            for &n in &c.antennas {
                let mut t = with_elements(s, n);
                t.an.enabled = true;
                rows.extend(secrecy_rows(&t, &run_design(&t)?)?);
            }
        }
    }
    Ok(CurveTable {
        kind,
        columns: columns.into_iter().map(String::from).collect(),
        rows,
    })
}

/// Eavesdropper responses with AN variance kept separate so that budgets only rescale it.
struct EveSet {
    responses: Vec<Vec<BranchResponse>>,
}

impl EveSet {
    /// Secrecy sum rate against the worst eavesdropper when the AN is multiplied by `scale`.
    fn secrecy(&self, user_sinr: &[f64], scale: f64) -> f64 {
        let k = user_sinr.len();
        let mut worst = vec![0.0f64; k];
        for point in &self.responses {
            for (j, r) in point.iter().enumerate() {
                let mut r = r.clone();
                r.an_i_var *= scale;
                r.an_q_var *= scale;
                worst[j] = worst[j].max(crate::metrics::branch_sinr(&r).best());
            }
        }
        let pairs: Vec<(f64, f64)> = user_sinr.iter().copied().zip(worst).collect();
        crate::metrics::secrecy_sum_rate(&pairs)
    }
}

fn eve_points(s: &Scenario) -> Vec<CartesianPoint> {
    let users = s.user_points();
    let r = s.curves.eve_exclusion_m;
    s.grid
        .points()
        .into_iter()
        .filter(|p| users.iter().all(|u| (p.x - u.x).hypot(p.y - u.y) >= r))
        .collect()
}

fn secrecy_rows(s: &Scenario, bundle: &DesignBundle) -> Result<Vec<Vec<f64>>> {
    let noise_u = s.noise_var();
    let noise_e = s.eve_noise_var();
    let eves = eve_points(s);
    let collect = |f: &(dyn Fn(CartesianPoint) -> Result<Vec<BranchResponse>> + Sync)| -> Result<EveSet> {
        Ok(EveSet {
            responses: eves.par_iter().map(|&p| f(p)).collect::<Result<Vec<_>>>()?,
        })
    };
    let sys = &bundle.system;
    let d3m = collect(&|p| Ok(sys.responses_at(&sys.view(p)?, noise_e)))?;
    let user_sinr = own_sinrs(sys, noise_u)?;
    let nsp = match &bundle.nsp {
        Some(n) => Some((
            collect(&|p| Ok(n.responses_at(&n.view(p)?, noise_e)))?,
            own_sinrs(n, noise_u)?,
        )),
        None => None,
    };
    let sat = match &bundle.sat {
        Some(t) => Some((
            collect(&|p| t.responses(p, noise_e))?,
            sat_own_sinrs(t, &s.user_points(), noise_u)?,
        )),
        None => None,
    };
    let bound = s
        .users
        .iter()
        .map(|u| (1.0 + crate::scenario::db_to_linear(u.snr_db)).log2())
        .sum::<f64>()
        / s.users.len() as f64;

    let message = bundle.power.message();
    let an = bundle.power.an();
    let mut rows = Vec::new();
    for &budget in &s.curves.budgets_w {
        let feasible = budget >= message && an > 0.0;
        let scale = if feasible { (budget - message) / an } else { f64::NAN };
        let mut row = vec![
            s.elements_i() as f64 + s.elements_q() as f64,
            budget,
            message,
            if feasible { budget - message } else { f64::NAN },
            if feasible {
                d3m.secrecy(&user_sinr, scale)
            } else {
                f64::NAN
            },
            bound,
        ];
        if let (Some((set, us)), Some(t)) = (&sat, &bundle.sat) {
            let m = t.message_power();
            row.push(if budget >= m && t.an.an_power > 0.0 {
                set.secrecy(us, (budget - m) / t.an.an_power)
            } else {
                f64::NAN
            });
        }
        if let Some((set, us)) = &nsp {
            row.push(if feasible { set.secrecy(us, scale) } else { f64::NAN });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// One received symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationRow {
    /// `"d3m"`, `"sat"` or `"nsp"`.
    pub system: &'static str,
    pub point_index: usize,
    pub point: CartesianPoint,
    pub stream: usize,
    pub sent: usize,
    pub y_i: f64,
    pub y_q: f64,
    pub detected: Option<usize>,
}

/// Received branch values of `n_symbols` random symbols of stream `stream` at every point, for
/// D3M and every enabled baseline. AN is always present; thermal noise only when `noisy`.
pub fn run_constellation(
    s: &Scenario,
    bundle: &DesignBundle,
    points: &[CartesianPoint],
    stream: usize,
    n_symbols: usize,
    noisy: bool,
) -> Result<Vec<ConstellationRow>> {
    if stream >= bundle.system.streams.len() {
        return Err(Error::config("stream", format!("stream {stream} does not exist")));
    }
    let noise = if noisy { s.eve_noise_var() } else { 0.0 };
    let order = s.radio.modulation_order;
    let mut out = Vec::new();
    for (pi, &p) in points.iter().enumerate() {
        let mut systems: Vec<(&'static str, BranchResponse)> =
            vec![("d3m", bundle.system.branch_response(p, stream, noise)?)];
        if let Some(t) = &bundle.sat {
            systems.push(("sat", t.responses(p, noise)?.swap_remove(stream)));
        }
        if let Some(n) = &bundle.nsp {
            systems.push(("nsp", n.branch_response(p, stream, noise)?));
        }
        for (si, (name, resp)) in systems.into_iter().enumerate() {
            let mut rng = point_rng(s.monte_carlo.seed, (pi * 3 + si) as u64);
            for _ in 0..n_symbols {
                use rand::Rng;
                use rand_distr::StandardNormal;
                let sym = psk_point(rng.random_range(0..order), order);
                let draws = DemodDraws {
                    noise_i: rng.sample(StandardNormal),
                    noise_q: rng.sample(StandardNormal),
                    stray: psk_point(rng.random_range(0..order), order),
                    others: (0..resp.interference.len())
                        .map(|_| psk_point(rng.random_range(0..order), order))
                        .collect(),
                };
                let (y_i, y_q) = received(&resp, &sym, &draws);
                out.push(ConstellationRow {
                    system: name,
                    point_index: pi,
                    point: p,
                    stream,
                    sent: sym.index,
                    y_i,
                    y_q,
                    detected: decide(y_i, y_q, order).map(|d| d.index),
                });
            }
        }
    }
    Ok(out)
}

pub fn write_constellation_csv(out: impl Write, s: &Scenario, rows: &[ConstellationRow]) -> Result<()> {
    let mut out = out;
    let cols: Vec<String> = ["system", "point", "x", "y", "stream", "sent", "y_i", "y_q", "detected"]
        .iter()
        .map(|c| c.to_string())
        .collect();
    write_preamble(&mut out, CONSTELLATION_SCHEMA, &cols, &[], s)?;
    let mut w = csv::Writer::from_writer(out);
    write_records(
        &mut w,
        cols,
        rows.iter().map(|r| {
            vec![
                r.system.to_string(),
                r.point_index.to_string(),
                num(r.point.x),
                num(r.point.y),
                r.stream.to_string(),
                r.sent.to_string(),
                num(r.y_i),
                num(r.y_q),
                r.detected.map(|d| d.to_string()).unwrap_or_default(),
            ]
        }),
    )
}
