use proptest::prelude::*;

use d3m::an::{self, design_nsp_baseline};
use d3m::geometry::channel_to;
use d3m::scenario::Scenario;
use d3m::sdp::{solve, ConstraintMatrix, LinearSdpProblem, SdpOptions};
use d3m::system::run_design;
use d3m::{CVector, C64};

/// One protected (nulled) direction and a few jamming requirements in dimension `n`.
fn instance(n: usize, seed: &[f64], rhs: &[f64]) -> LinearSdpProblem {
    let at = |i: usize| seed[i % seed.len()];
    let vector = |k: usize| CVector::from_fn(n, |i, _| C64::new(at(2 * (k * n + i)), at(2 * (k * n + i) + 1)));
    let mut p = LinearSdpProblem::min_trace(n);
    p.equalities.push((ConstraintMatrix::Outer(vector(0)), 0.0));
    for (j, &c) in rhs.iter().enumerate() {
        p.inequalities.push((ConstraintMatrix::Outer(vector(j + 1)), c));
    }
    p
}

fn scaled(p: &LinearSdpProblem, t: f64) -> LinearSdpProblem {
    let mut q = p.clone();
    for (_, b) in q.equalities.iter_mut().chain(q.inequalities.iter_mut()) {
        *b *= t;
    }
    q
}

fn well_posed(p: &LinearSdpProblem) -> bool {
    // every jamming vector needs a component outside the protected one
    let ConstraintMatrix::Outer(h) = &p.equalities[0].0 else {
        return false;
    };
    h.norm() > 0.1
        && p.inequalities.iter().all(|(g, _)| match g {
            ConstraintMatrix::Outer(s) => {
                let along = h.dotc(s).norm() / h.norm();
                (s.norm_squared() - along * along) > 1e-2
            }
            _ => false,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn optimum_scales_with_the_right_hand_side(
        n in 2usize..6,
        seed in prop::collection::vec(-1.0f64..1.0, 64),
        rhs in prop::collection::vec(0.2f64..2.0, 1..5),
        t in 0.1f64..10.0,
    ) {
        let p = instance(n, &seed, &rhs);
        prop_assume!(well_posed(&p));
        let opts = SdpOptions::default();
        let a = solve(&p, &opts).unwrap();
        let b = solve(&scaled(&p, t), &opts).unwrap();
        prop_assert!((b.objective_value - t * a.objective_value).abs() <= 1e-6 * t * a.objective_value);
        let x = a.x.scale(t);
        prop_assert!((&b.x - &x).norm() <= 1e-6 * x.norm());
        for (g, c) in &scaled(&p, t).inequalities {
            prop_assert!(g.inner(&x) >= c * (1.0 - 1e-6));
        }
    }

    #[test]
    fn dual_bound_never_exceeds_primal(
        n in 2usize..6,
        seed in prop::collection::vec(-1.0f64..1.0, 64),
        rhs in prop::collection::vec(0.2f64..2.0, 1..5),
    ) {
        let p = instance(n, &seed, &rhs);
        prop_assume!(well_posed(&p));
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        let scale = 1.0 + sol.objective_value.abs();
        prop_assert!(sol.dual_objective <= sol.objective_value + 1e-7 * scale);
        prop_assert!(sol.objective_value - sol.dual_objective <= 1e-5 * scale);
    }

    #[test]
    fn solves_are_bitwise_repeatable(
        n in 2usize..6,
        seed in prop::collection::vec(-1.0f64..1.0, 64),
        rhs in prop::collection::vec(0.2f64..2.0, 1..5),
    ) {
        let p = instance(n, &seed, &rhs);
        prop_assume!(well_posed(&p));
        let a = solve(&p, &SdpOptions::default()).unwrap();
        let b = solve(&p, &SdpOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn small_scenario(gamma_db: f64) -> Scenario {
    let mut s = Scenario::default();
    s.arrays.total_elements = 16;
    s.an.gamma_db = gamma_db;
    s
}

#[test]
fn an_power_grows_as_the_jamming_target_tightens() {
    let powers: Vec<f64> = [-10.0, -15.0, -20.0, -25.0]
        .iter()
        .map(|&g| run_design(&small_scenario(g)).unwrap().power.an())
        .collect();
    assert!(powers.windows(2).all(|w| w[1] >= w[0]), "{powers:?}");
}

#[test]
fn an_power_falls_with_more_elements() {
    let power = |n: usize| {
        let mut s = small_scenario(-20.0);
        s.arrays.total_elements = n;
        run_design(&s).unwrap().power.an()
    };
    let (p8, p16, p32) = (power(8), power(16), power(32));
    assert!(p8 >= p16 && p16 >= p32, "{p8} {p16} {p32}");
}

#[test]
fn designed_an_jams_at_least_as_well_as_null_space_projection() {
    let s = Scenario::default();
    let b = run_design(&s).unwrap();
    let set = b.constraints_i.as_ref().unwrap();
    let d = &b.system.an_i;
    let h = channel_to(&b.system.array_i, s.users[0].point()).unwrap();
    let nsp = design_nsp_baseline(&[h], d.an_power, d.covariance.nrows()).unwrap();
    assert!((nsp.an_power - d.an_power).abs() <= 1e-10 * d.an_power);
    let worst_ratio = |g: &an::AnDesign| {
        set.jamming
            .iter()
            .map(|c| g.received_power(&c.steering) / c.required)
            .fold(f64::INFINITY, f64::min)
    };
    let (ours, theirs) = (worst_ratio(d), worst_ratio(&nsp));
    assert!(ours >= theirs, "designed {ours}, nsp {theirs}");
    assert!((ours - 1.0).abs() < 1e-4);
}

#[test]
fn an_nulls_every_protected_channel() {
    let mut s = Scenario::default();
    s.users.push(d3m::scenario::UserConfig {
        x: -200.0,
        y: 800.0,
        snr_db: 10.0,
    });
    let b = run_design(&s).unwrap();
    for (g, d) in [(&b.system.array_i, &b.system.an_i), (&b.system.array_q, &b.system.an_q)] {
        let gamma_norm = d.covariance.norm();
        for u in s.user_points() {
            let h = channel_to(g, u).unwrap().entries;
            assert!((&d.covariance * &h).norm() <= 1e-8 * gamma_norm * h.norm());
        }
    }
}
