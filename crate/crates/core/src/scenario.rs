//! Experiment configuration.
//!
//! Scenarios are TOML files. Every key has a default, so an empty file describes the reference
//! setup: 32 elements split over two transmitters 50 m apart, 1 GHz carrier, −100 dBm noise and a
//! single user at (530, 570) served at 10 dB with a −20 dB jamming target. Unknown keys and
//! invalid values are rejected with the dotted path of the offending key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beamform::{BeamMethod, PenaltyParams};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, CartesianPoint};
use crate::sdp::SdpOptions;

/// Converts dB to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub arrays: ArraysConfig,
    pub radio: RadioConfig,
    pub users: Vec<UserConfig>,
    pub an: AnConfig,
    pub solver: SolverConfig,
    pub grid: GridConfig,
    pub monte_carlo: MonteCarloConfig,
    pub budget: BudgetConfig,
    pub baselines: BaselineConfig,
    pub zone: ZoneConfig,
    pub curves: CurveConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArraysConfig {
    /// Elements over both transmitters, split evenly unless overridden per transmitter.
    pub total_elements: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements_i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements_q: Option<usize>,
    pub spacing_wavelengths: f64,
    /// Distance between the two transmitters, which sit at x = ∓separation/2.
    pub separation_m: f64,
    pub light_speed: f64,
}

impl Default for ArraysConfig {
    fn default() -> Self {
        Self {
            total_elements: 32,
            elements_i: None,
            elements_q: None,
            spacing_wavelengths: 0.5,
            separation_m: 50.0,
            light_speed: crate::geometry::DEFAULT_LIGHT_SPEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    /// Thermal noise at the legitimate users.
    pub noise_dbm: f64,
    pub eve_noise_dbm: f64,
    pub modulation_order: usize,
    pub symbol_period_s: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 1e9,
            noise_dbm: -100.0,
            eve_noise_dbm: -100.0,
            modulation_order: 4,
            symbol_period_s: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_snr_db")]
    pub snr_db: f64,
}

fn default_snr_db() -> f64 {
    10.0
}

impl UserConfig {
    pub fn point(&self) -> CartesianPoint {
        CartesianPoint::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnConfig {
    pub enabled: bool,
    /// Target SINR ceiling in the undesired directions.
    pub gamma_db: f64,
    pub grid_step_deg: f64,
    /// Drop Eve's thermal noise from the jamming requirement.
    pub sir_mode: bool,
}

impl Default for AnConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            gamma_db: -20.0,
            grid_step_deg: 1.0,
            sir_mode: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamMethodName {
    Analytic,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub beam_method: BeamMethodName,
    pub penalty: f64,
    pub tolerance: f64,
    pub max_iter: usize,
    pub sdp_tol: f64,
    pub sdp_max_iter: usize,
    pub sdp_max_dim: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let p = PenaltyParams::default();
        let s = SdpOptions::default();
        Self {
            beam_method: BeamMethodName::Analytic,
            penalty: p.penalty,
            tolerance: p.tolerance,
            max_iter: p.max_iter,
            sdp_tol: s.tol,
            sdp_max_iter: s.max_iter,
            sdp_max_dim: s.max_dim,
        }
    }
}

impl SolverConfig {
    pub fn beam_method(&self) -> BeamMethod {
        match self.beam_method {
            BeamMethodName::Analytic => BeamMethod::Analytic,
            BeamMethodName::Iterative => BeamMethod::Iterative(PenaltyParams {
                penalty: self.penalty,
                tolerance: self.tolerance,
                max_iter: self.max_iter,
            }),
        }
    }

    pub fn sdp_options(&self) -> SdpOptions {
        SdpOptions {
            tol: self.sdp_tol,
            max_iter: self.sdp_max_iter,
            max_dim: self.sdp_max_dim,
            ..SdpOptions::default()
        }
    }
}

/// Rectangular evaluation grid with `resolution` points per axis, edges included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub resolution: i64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 1000.0,
            y_min: 20.0,
            y_max: 1020.0,
            resolution: 201,
        }
    }
}

impl GridConfig {
    pub fn axis_x(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.resolution as usize)
    }

    pub fn axis_y(&self) -> Vec<f64> {
        linspace(self.y_min, self.y_max, self.resolution as usize)
    }

    /// Row-major grid points, x varying fastest.
    pub fn points(&self) -> Vec<CartesianPoint> {
        let xs = self.axis_x();
        self.axis_y()
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| CartesianPoint::new(x, y)))
            .collect()
    }

    /// Index into [`GridConfig::points`] of the node nearest to `p`.
    pub fn nearest_index(&self, p: CartesianPoint) -> usize {
        let n = self.resolution as usize;
        let snap = |v: f64, lo: f64, hi: f64| {
            let step = (hi - lo) / (n - 1) as f64;
            (((v - lo) / step).round().max(0.0) as usize).min(n - 1)
        };
        snap(p.y, self.y_min, self.y_max) * n + snap(p.x, self.x_min, self.x_max)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + i as f64 * step })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    /// Symbols per constellation capture.
    pub symbols: usize,
    pub seed: u64,
    /// Monte Carlo symbols per grid node in sweeps; 0 skips the simulated SER column.
    pub sweep_symbols: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            symbols: 1_000,
            seed: 1,
            sweep_symbols: 0,
        }
    }
}

/// Total transmit power; when set, whatever the messages leave over goes to AN.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_w: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    /// Single co-located array of all elements at the origin.
    pub sat: bool,
    /// Null-space projection AN at matched power.
    pub nsp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZoneConfig {
    pub orthogonality_threshold_deg: f64,
}

impl Default for ZoneConfig {
    fn default() -> Self {
        Self {
            orthogonality_threshold_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveConfig {
    pub snr_db: Vec<f64>,
    /// Total element counts (both transmitters).
    pub antennas: Vec<usize>,
    pub gamma_db: Vec<f64>,
    pub budgets_w: Vec<f64>,
    /// Eavesdropper candidates for the secrecy curve are the grid nodes at least this far from
    /// every user.
    pub eve_exclusion_m: f64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            snr_db: (0..=10).map(|i| 4.0 + i as f64).collect(),
            antennas: vec![16, 32, 64],
            gamma_db: vec![-15.0, -20.0, -25.0],
            budgets_w: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            eve_exclusion_m: 50.0,
        }
    }
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            arrays: ArraysConfig::default(),
            radio: RadioConfig::default(),
            users: vec![UserConfig {
                x: 530.0,
                y: 570.0,
                snr_db: default_snr_db(),
            }],
            an: AnConfig::default(),
            solver: SolverConfig::default(),
            grid: GridConfig::default(),
            monte_carlo: MonteCarloConfig::default(),
            budget: BudgetConfig::default(),
            baselines: BaselineConfig::default(),
            zone: ZoneConfig::default(),
            curves: CurveConfig::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| Error::config("(document)", e.message()))?;
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path == "." { "(document)".into() } else { path },
                e.inner().message(),
            )
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// The scenario with all defaults filled in, as TOML.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("scenario is always representable as TOML")
    }

    pub fn elements_i(&self) -> usize {
        self.arrays.elements_i.unwrap_or(self.arrays.total_elements / 2)
    }

    pub fn elements_q(&self) -> usize {
        self.arrays
            .elements_q
            .unwrap_or(self.arrays.total_elements - self.arrays.total_elements / 2)
    }

    pub fn array_i(&self) -> Result<ArrayGeometry> {
        self.array(self.elements_i(), -self.arrays.separation_m / 2.0)
    }

    pub fn array_q(&self) -> Result<ArrayGeometry> {
        self.array(self.elements_q(), self.arrays.separation_m / 2.0)
    }

    /// Single array holding every element at the origin (SAT baseline).
    pub fn array_sat(&self) -> Result<ArrayGeometry> {
        self.array(self.elements_i() + self.elements_q(), 0.0)
    }

    fn array(&self, n: usize, anchor: f64) -> Result<ArrayGeometry> {
        ArrayGeometry::with_wavelength_spacing(
            n,
            self.arrays.spacing_wavelengths,
            anchor,
            self.radio.carrier_hz,
            self.arrays.light_speed,
        )
    }

    pub fn user_points(&self) -> Vec<CartesianPoint> {
        self.users.iter().map(UserConfig::point).collect()
    }

    pub fn noise_var(&self) -> f64 {
        dbm_to_watts(self.radio.noise_dbm)
    }

    pub fn eve_noise_var(&self) -> f64 {
        dbm_to_watts(self.radio.eve_noise_dbm)
    }

    pub fn gamma(&self) -> f64 {
        db_to_linear(self.an.gamma_db)
    }

    pub fn orthogonality_threshold(&self) -> f64 {
        self.zone.orthogonality_threshold_deg.to_radians()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be positive and finite, got {v}")))
            }
        };
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be finite, got {v}")))
            }
        };

        let a = &self.arrays;
        if a.elements_i.is_none() && a.elements_q.is_none() && !a.total_elements.is_multiple_of(2) {
            return Err(Error::config(
                "arrays.total_elements",
                format!(
                    "must be even when split between the transmitters, got {}",
                    a.total_elements
                ),
            ));
        }
        if self.elements_i() < 2 {
            return Err(Error::config(
                "arrays.elements_i",
                "each transmitter needs at least 2 elements",
            ));
        }
        if self.elements_q() < 2 {
            return Err(Error::config(
                "arrays.elements_q",
                "each transmitter needs at least 2 elements",
            ));
        }
        positive("arrays.spacing_wavelengths", a.spacing_wavelengths)?;
        positive("arrays.separation_m", a.separation_m)?;
        positive("arrays.light_speed", a.light_speed)?;

        let r = &self.radio;
        positive("radio.carrier_hz", r.carrier_hz)?;
        finite("radio.noise_dbm", r.noise_dbm)?;
        finite("radio.eve_noise_dbm", r.eve_noise_dbm)?;
        if r.modulation_order != 4 {
            return Err(Error::config(
                "radio.modulation_order",
                format!(
                    "only QPSK (4) is modelled by the error-rate metrics, got {}",
                    r.modulation_order
                ),
            ));
        }
        positive("radio.symbol_period_s", r.symbol_period_s)?;

        if self.users.is_empty() {
            return Err(Error::config("users", "at least one user is required"));
        }
        for (i, u) in self.users.iter().enumerate() {
            finite(&format!("users[{i}].x"), u.x)?;
            positive(&format!("users[{i}].y"), u.y)?;
            finite(&format!("users[{i}].snr_db"), u.snr_db)?;
        }
        let k = self.users.len();
        if k > 1 && (self.elements_i() <= k || self.elements_q() <= k) {
            return Err(Error::config(
                "users",
                format!("{k} users need more than {k} elements per transmitter"),
            ));
        }

        finite("an.gamma_db", self.an.gamma_db)?;
        positive("an.grid_step_deg", self.an.grid_step_deg)?;

        let s = &self.solver;
        positive("solver.penalty", s.penalty)?;
        positive("solver.tolerance", s.tolerance)?;
        if s.max_iter == 0 {
            return Err(Error::config("solver.max_iter", "must be at least 1"));
        }
        positive("solver.sdp_tol", s.sdp_tol)?;
        if s.sdp_max_iter == 0 {
            return Err(Error::config("solver.sdp_max_iter", "must be at least 1"));
        }
        let largest = self.elements_i().max(self.elements_q());
        if s.sdp_max_dim < largest {
            return Err(Error::config(
                "solver.sdp_max_dim",
                format!("must be at least the per-transmitter element count {largest}"),
            ));
        }

        let g = &self.grid;
        if g.resolution < 2 {
            return Err(Error::config(
                "grid.resolution",
                format!("must be at least 2, got {}", g.resolution),
            ));
        }
        finite("grid.x_min", g.x_min)?;
        finite("grid.x_max", g.x_max)?;
        if g.x_max <= g.x_min {
            return Err(Error::config("grid.x_max", "must exceed grid.x_min"));
        }
        positive("grid.y_min", g.y_min)?;
        finite("grid.y_max", g.y_max)?;
        if g.y_max <= g.y_min {
            return Err(Error::config("grid.y_max", "must exceed grid.y_min"));
        }

        if let Some(b) = self.budget.power_w {
            positive("budget.power_w", b)?;
        }
        positive(
            "zone.orthogonality_threshold_deg",
            self.zone.orthogonality_threshold_deg,
        )?;

        let c = &self.curves;
        for (i, v) in c.snr_db.iter().enumerate() {
            finite(&format!("curves.snr_db[{i}]"), *v)?;
        }
        for (i, &n) in c.antennas.iter().enumerate() {
            if n < 4 || n % 2 != 0 {
                return Err(Error::config(
                    format!("curves.antennas[{i}]"),
                    format!("must be even and at least 4, got {n}"),
                ));
            }
        }
        for (i, v) in c.gamma_db.iter().enumerate() {
            finite(&format!("curves.gamma_db[{i}]"), *v)?;
        }
        for (i, v) in c.budgets_w.iter().enumerate() {
            positive(&format!("curves.budgets_w[{i}]"), *v)?;
        }
        if !(c.eve_exclusion_m >= 0.0) {
            return Err(Error::config("curves.eve_exclusion_m", "must be non-negative"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("expected a configuration error, got {other:?}"),
        }
    }

    #[test]
    fn empty_document_is_reference_setup() {
        let s = Scenario::from_toml_str("").unwrap();
        assert_eq!(s, Scenario::default());
        assert_eq!(s.radio.carrier_hz, 1e9);
        assert_eq!(s.radio.noise_dbm, -100.0);
        assert_eq!(s.user_points(), vec![CartesianPoint::new(530.0, 570.0)]);
        assert_eq!(s.arrays.separation_m, 50.0);
        assert_eq!((s.elements_i(), s.elements_q()), (16, 16));
        assert_eq!(s.users[0].snr_db, 10.0);
        assert_eq!(s.an.gamma_db, -20.0);
    }

    #[test]
    fn missing_snr_defaults_and_is_echoed() {
        let s = Scenario::from_toml_str("[[users]]\nx = 100.0\ny = 300.0\n").unwrap();
        assert_eq!(s.users[0].snr_db, 10.0);
        assert!(s.echo().contains("snr_db = 10.0"));
        let again = Scenario::from_toml_str(&s.echo()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn errors_name_the_key() {
        let e = Scenario::from_toml_str("[grid]\nresolution = -3\n").unwrap_err();
        assert_eq!(key_of(e), "grid.resolution");
        let e = Scenario::from_toml_str("[radio]\ncarrier = 1e9\n").unwrap_err();
        assert_eq!(key_of(e), "radio.carrier");
        let e = Scenario::from_toml_str("[radio]\ncarrier_hz = \"fast\"\n").unwrap_err();
        assert_eq!(key_of(e), "radio.carrier_hz");
        let e = Scenario::from_toml_str("[[users]]\nx = 1.0\ny = -5.0\n").unwrap_err();
        assert_eq!(key_of(e), "users[0].y");
        let e = Scenario::from_toml_str("[[users]]\nx = 1.0\n").unwrap_err();
        assert_eq!(key_of(e), "users[0]");
        let e = Scenario::from_toml_str("[budget]\npower_w = 0.0\n").unwrap_err();
        assert_eq!(key_of(e), "budget.power_w");
        assert!(Scenario::from_toml_str("not toml ===").is_err());
    }

    #[test]
    fn grid_nodes() {
        let g = GridConfig::default();
        let pts = g.points();
        assert_eq!(pts.len(), 201 * 201);
        let k = g.nearest_index(CartesianPoint::new(530.0, 570.0));
        assert_eq!(pts[k], CartesianPoint::new(530.0, 570.0));
        assert_eq!(*g.axis_x().last().unwrap(), 1000.0);
    }

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(-100.0) - 1e-13).abs() < 1e-25);
        assert!((watts_to_dbm(1e-12) + 90.0).abs() < 1e-12);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
    }
}
