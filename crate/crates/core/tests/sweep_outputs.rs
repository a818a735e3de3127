use std::time::Instant;

use d3m::geometry::CartesianPoint;
use d3m::scenario::Scenario;
use d3m::sweep::{
    run_constellation, run_curves, run_sweep, write_constellation_csv, write_heatmap, write_sweep_csv, CurveKind,
    HeatmapField, CONSTELLATION_SCHEMA, SWEEP_SCHEMA,
};
use d3m::system::run_design;
use d3m::Error;

fn coarse() -> Scenario {
    let mut s = Scenario::default();
    s.grid.resolution = 41;
    s.baselines.sat = true;
    s.baselines.nsp = true;
    s.monte_carlo.sweep_symbols = 200;
    s
}

fn sweep_bytes(s: &Scenario) -> Vec<u8> {
    let b = run_design(s).unwrap();
    let g = run_sweep(s, &b).unwrap();
    let mut out = Vec::new();
    write_sweep_csv(&mut out, s, &b, &g).unwrap();
    out
}

#[test]
fn sweep_csv_is_byte_identical_across_runs_and_thread_counts() {
    let s = coarse();
    let a = sweep_bytes(&s);
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sweep_bytes(&s));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(&format!("# {SWEEP_SCHEMA}")));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 1 + 41 * 41);
}

#[test]
fn sweep_seed_changes_only_monte_carlo_columns() {
    let s = coarse();
    let mut t = s.clone();
    t.monte_carlo.seed = 99;
    let b = run_design(&s).unwrap();
    let g1 = run_sweep(&s, &b).unwrap();
    let g2 = run_sweep(&t, &b).unwrap();
    assert!(g1.rows.iter().zip(&g2.rows).all(|(a, b)| a.d3m == b.d3m));
    assert!(g1.rows.iter().zip(&g2.rows).any(|(a, b)| a.ser_mc != b.ser_mc));
}

#[test]
fn full_resolution_sweep_fits_the_time_budget() {
    let mut s = Scenario::default();
    s.grid.resolution = 200;
    let start = Instant::now();
    let b = run_design(&s).unwrap();
    let g = run_sweep(&s, &b).unwrap();
    assert_eq!(g.rows.len(), 200 * 200);
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn sinr_peaks_at_the_user() {
    let s = Scenario::default();
    let b = run_design(&s).unwrap();
    let g = run_sweep(&s, &b).unwrap();
    let best = g
        .rows
        .iter()
        .max_by(|a, b| a.d3m.sinr.best().total_cmp(&b.d3m.sinr.best()))
        .unwrap();
    assert_eq!(best.point, s.users[0].point());
    assert!(g.nearest(s.users[0].point()).zone.all);
}

#[test]
fn heatmaps_have_a_scale_sidecar() {
    let s = coarse();
    let b = run_design(&s).unwrap();
    let g = run_sweep(&s, &b).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for f in HeatmapField::ALL {
        write_heatmap(dir.path(), &g, f).unwrap();
        let png = image::open(dir.path().join(format!("{}.png", f.name()))).unwrap();
        assert_eq!((png.width(), png.height()), (41, 41));
        let scale = std::fs::read_to_string(dir.path().join(format!("{}.scale", f.name()))).unwrap();
        assert!(scale.contains("min=") && scale.contains("max="));
    }
}

#[test]
fn constellation_at_the_user_is_four_clean_points() {
    let s = Scenario::default();
    let b = run_design(&s).unwrap();
    let rows = run_constellation(&s, &b, &[s.users[0].point()], 0, 2000, false).unwrap();
    let a = (10.0f64.sqrt() * s.noise_var().sqrt()) / 2f64.sqrt();
    for r in &rows {
        let sym = d3m::signal::psk_point(r.sent, 4);
        assert!((r.y_i - a * sym.in_phase.signum()).abs() <= 1e-12 * a);
        assert!((r.y_q - a * sym.quadrature.signum()).abs() <= 1e-12 * a);
        assert_eq!(r.detected, Some(r.sent));
    }
}

#[test]
fn constellation_off_the_zone_is_scrambled() {
    let s = Scenario::default();
    let b = run_design(&s).unwrap();
    let rows = run_constellation(&s, &b, &[CartesianPoint::new(200.0, 700.0)], 0, 4000, false).unwrap();
    let mean = rows.iter().map(|r| r.y_i.hypot(r.y_q)).sum::<f64>() / rows.len() as f64;
    let spread = |k: usize| {
        let pts: Vec<_> = rows.iter().filter(|r| r.sent == k).collect();
        let (mi, mq) = (
            pts.iter().map(|r| r.y_i).sum::<f64>() / pts.len() as f64,
            pts.iter().map(|r| r.y_q).sum::<f64>() / pts.len() as f64,
        );
        (pts.iter()
            .map(|r| (r.y_i - mi).powi(2) + (r.y_q - mq).powi(2))
            .sum::<f64>()
            / pts.len() as f64)
            .sqrt()
    };
    assert!((0..4).all(|k| spread(k) > 0.1 * mean));
}

#[test]
fn empty_constellation_writes_only_the_header() {
    let s = Scenario::default();
    let b = run_design(&s).unwrap();
    let rows = run_constellation(&s, &b, &[s.users[0].point()], 0, 0, false).unwrap();
    assert!(rows.is_empty());
    let mut out = Vec::new();
    write_constellation_csv(&mut out, &s, &rows).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with(&format!("# {CONSTELLATION_SCHEMA}")));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1);
}

#[test]
fn budget_rescales_the_an_only() {
    let s = Scenario::default();
    let free = run_design(&s).unwrap();
    let capped = free.with_budget(1.0).unwrap();
    assert!((capped.power.total() - 1.0).abs() < 1e-12);
    assert_eq!(capped.power.message(), free.power.message());
    let ratio = |p: &d3m::system::PowerReport| p.an_i / p.an_q;
    assert!((ratio(&capped.power) - ratio(&free.power)).abs() < 1e-9 * ratio(&free.power));
    assert!(matches!(capped.with_budget(2.0), Err(Error::Domain(_))));
    assert!(matches!(free.with_budget(1e-9), Err(Error::BudgetInfeasible { .. })));
}

#[test]
fn secrecy_curve_is_bounded_and_rises_with_power() {
    let mut s = Scenario::default();
    s.curves.antennas = vec![16];
    s.curves.budgets_w = vec![1e-6, 0.01, 0.1, 1.0, 10.0];
    s.grid.resolution = 51;
    let t = run_curves(&s, CurveKind::SecrecyVsTotalPower).unwrap();
    let rate = t.column("secrecy_rate").unwrap();
    // a microwatt cannot cover the beams
    assert!(rate[0].is_nan());
    let bound = t.column("upper_bound").unwrap()[0];
    assert!(rate[1..].windows(2).all(|w| w[1] >= w[0]));
    assert!(rate[1..].iter().all(|&r| (0.0..=bound).contains(&r)));
}
