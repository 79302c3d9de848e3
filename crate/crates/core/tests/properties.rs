use std::path::{Path, PathBuf};

use proptest::prelude::*;

use cgvf_core::field::{
    cgvf_control, higher_dim_gvf, repulsion_potential, repulsion_terms, repulsion_weight,
    FieldGains,
};
use cgvf_core::scenario::{
    parse_scenario, EstimatorSpec, GainSpec, InitialSpec, OutputSpec, RunSpec, ScalarOrList,
    Scenario, SwarmSpec, TargetSpec, TORUS22,
};
use cgvf_core::surfaces::{finite_difference_jacobian, BuiltinSurface, Surface};
use cgvf_core::swarm::{distance, neighbor_sets};

fn surface() -> impl Strategy<Value = BuiltinSurface> {
    prop_oneof![
        (0.5..10.0f64, 0.1..0.5f64).prop_map(|(major, frac)| BuiltinSurface::Torus {
            major,
            minor: major * frac
        }),
        Just(BuiltinSurface::Plane),
        (-3.0..3.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(amplitude, freq1, freq2)| {
            BuiltinSurface::Wave {
                amplitude,
                freq1,
                freq2,
            }
        }),
    ]
}

fn omegas(max: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(prop::array::uniform2(-2.0..2.0f64), 1..max)
}

/// Drops points until every pair is farther apart than `min`.
fn thin(points: Vec<[f64; 2]>, min: f64) -> Vec<[f64; 2]> {
    let mut kept: Vec<[f64; 2]> = Vec::new();
    for p in points {
        if kept.iter().all(|q| distance(p, *q) > min) {
            kept.push(p);
        }
    }
    kept
}

proptest! {
    #[test]
    fn neighbor_relation_is_symmetric(points in omegas(40), big_r in 0.1..1.5f64) {
        let sets = neighbor_sets(&points, big_r);
        for (i, set) in sets.iter().enumerate() {
            prop_assert!(!set.contains(&i));
            for &k in set {
                prop_assert!(sets[k].contains(&i));
                prop_assert!(distance(points[i], points[k]) < big_r);
            }
        }
    }

    #[test]
    fn repulsion_sums_to_zero(points in omegas(40)) {
        let (r, big_r) = (0.4, 0.6);
        let points = thin(points, r + 0.01);
        let sets = neighbor_sets(&points, big_r);
        let mut total = [0.0f64; 2];
        for (i, set) in sets.iter().enumerate() {
            let nb: Vec<[f64; 2]> = set.iter().map(|&k| points[k]).collect();
            let eta = repulsion_terms(points[i], &nb, r, big_r).unwrap();
            total[0] += eta[0];
            total[1] += eta[1];
        }
        prop_assert!(total[0].abs() < 1e-12 && total[1].abs() < 1e-12, "{total:?}");
    }

    #[test]
    fn potential_derivative_is_minus_weight(s in 0.42..0.59f64) {
        let h = 1e-6;
        let fd = (repulsion_potential(s + h, 0.4, 0.6).unwrap()
            - repulsion_potential(s - h, 0.4, 0.6).unwrap()) / (2.0 * h);
        let alpha = repulsion_weight(s, 0.4, 0.6).unwrap();
        prop_assert!((fd + alpha).abs() < 1e-6 * (1.0 + alpha), "{fd} vs {alpha}");
    }

    #[test]
    fn control_without_neighbors_is_lifted_field(
        model in surface(),
        x in prop::array::uniform3(-10.0..10.0f64),
        w in prop::array::uniform2(-10.0..10.0f64),
        k in prop::array::uniform3(0.1..2.0f64),
        c in 0.1..5.0f64,
    ) {
        let gains = FieldGains::new(k.to_vec(), c, [-1.0, 1.0]).unwrap();
        let out = cgvf_control(&model, &gains, &x, w, w, &[], 0.4, 0.6).unwrap();
        let chi = higher_dim_gvf(&model, &gains, &[x[0], x[1], x[2], w[0], w[1]]).unwrap();
        let scale = 1.0 + chi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..3 {
            prop_assert!((out.u[j] - chi[j]).abs() < 1e-12 * scale);
        }
        prop_assert!((out.omega_rate[0] - chi[3]).abs() < 1e-12 * scale);
        prop_assert!((out.omega_rate[1] - chi[4]).abs() < 1e-12 * scale);
    }

    #[test]
    fn jacobian_matches_central_differences(
        model in surface(),
        w in prop::array::uniform2(-10.0..10.0f64),
    ) {
        let analytic = model.jacobian(w);
        let fd = finite_difference_jacobian(&model, w, |_| 1e-5);
        for (a, f) in analytic.d1.iter().chain(&analytic.d2).zip(fd.d1.iter().chain(&fd.d2)) {
            prop_assert!((a - f).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {f}");
        }
    }

    #[test]
    fn scenario_toml_round_trip(s in scenario()) {
        let text = s.to_toml();
        let back: Scenario = toml::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn seeded_scenario_round_trip_through_parser(seed in 0..=i64::MAX as u64, robots in 2usize..12) {
        let text = TORUS22
            .replace("robots = 22", &format!("robots = {robots}"))
            .replace("seed = 1", &format!("seed = {seed}"));
        let s = parse_scenario(&text, Path::new("mem")).unwrap();
        let again = parse_scenario(&s.to_toml(), Path::new("mem")).unwrap();
        prop_assert_eq!(&again, &s);
        let a = s.prepare().unwrap().initial;
        let b = again.prepare().unwrap().initial;
        prop_assert_eq!(a, b);
    }
}

fn finite() -> impl Strategy<Value = f64> {
    -1e3..1e3f64
}

fn scenario() -> impl Strategy<Value = Scenario> {
    let swarm = (
        1usize..30,
        finite(),
        finite(),
        prop_oneof![
            finite().prop_map(GainSpec::Scalar),
            prop::collection::vec(finite(), 1..4).prop_map(GainSpec::Shared),
            prop::collection::vec(prop::collection::vec(finite(), 3), 1..4)
                .prop_map(GainSpec::PerRobot),
        ],
        prop_oneof![
            finite().prop_map(ScalarOrList::Scalar),
            prop::collection::vec(finite(), 1..5).prop_map(ScalarOrList::PerRobot),
        ],
        prop::array::uniform2(finite()),
    )
        .prop_map(|(robots, sensing_radius, safe_radius, k, c, m_tail)| SwarmSpec {
            robots,
            sensing_radius,
            safe_radius,
            k,
            c,
            m_tail,
        });
    let estimator = prop_oneof![
        Just(EstimatorSpec::Broadcast),
        (
            finite(),
            prop::collection::vec(0usize..10, 0..3),
            prop::option::of(prop::collection::vec(prop::array::uniform2(0usize..10), 0..5)),
        )
            .prop_map(|(gamma, leaders, edges)| EstimatorSpec::Consensus {
                gamma,
                leaders,
                edges
            }),
    ];
    let initial = prop_oneof![
        (
            prop::collection::vec(prop::collection::vec(finite(), 3), 1..4),
            prop::collection::vec(prop::array::uniform2(finite()), 1..4),
            prop::option::of(prop::collection::vec(prop::array::uniform2(finite()), 1..4)),
        )
            .prop_map(|(x, omega, omega_hat)| InitialSpec::Explicit { x, omega, omega_hat }),
        (
            any::<u64>(),
            prop::array::uniform2(prop::array::uniform2(finite())),
            prop::option::of(prop::collection::vec(prop::array::uniform2(finite()), 3)),
            prop::option::of(prop::collection::vec(prop::array::uniform2(finite()), 3)),
            prop::option::of(finite()),
        )
            .prop_map(|(seed, omega_box, x_box, x_offset_box, min_separation)| {
                InitialSpec::Random {
                    seed,
                    omega_box,
                    x_box,
                    x_offset_box,
                    min_separation,
                }
            }),
    ];
    (
        "[a-z][a-z0-9_]{0,12}",
        surface(),
        swarm,
        estimator,
        prop::array::uniform2(finite()),
        (finite(), finite(), 1usize..1000),
        initial,
        "[a-z]{1,8}(/[a-z0-9]{1,8}){0,2}",
    )
        .prop_map(
            |(name, surface, swarm, estimator, omega_star, (duration, dt, record_every), initial, dir)| {
                Scenario {
                    name,
                    surface,
                    swarm,
                    estimator,
                    target: TargetSpec { omega_star },
                    run: RunSpec {
                        duration,
                        dt,
                        record_every,
                    },
                    initial,
                    output: OutputSpec {
                        dir: PathBuf::from(dir),
                    },
                }
            },
        )
}
