//! Reference values computed independently (50-digit straight-line
//! transcription of the field formulas) and frozen here.

use cgvf_core::engine::{lyapunov_value, swarm_rhs, SimulationState};
use cgvf_core::field::{cgvf_control, higher_dim_gvf, FieldGains, DEFAULT_M_TAIL};
use cgvf_core::surfaces::BuiltinSurface;
use cgvf_core::swarm::{
    ConsensusConfig, EstimatorMode, RobotState, SwarmConfig, TargetState,
};

const TORUS: BuiltinSurface = BuiltinSurface::Torus {
    major: 6.0,
    minor: 2.0,
};

fn assert_close(actual: &[f64], expected: &[f64], tol: f64) {
    assert_eq!(actual.len(), expected.len());
    for (j, (a, e)) in actual.iter().zip(expected).enumerate() {
        assert!((a - e).abs() <= tol, "component {j}: {a} vs {e}");
    }
}

#[test]
fn lifted_field_at_outer_equator() {
    let gains = FieldGains::uniform(3, 0.6, 3.0).unwrap();
    let chi = higher_dim_gvf(&TORUS, &gains, &[9.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert_close(&chi, &[-0.6, -8.0, -2.0, -1.0, -1.0], 1e-12);
}

#[test]
fn lifted_field_generic_state() {
    let gains = FieldGains::new(vec![0.6, 0.8, 1.0], 3.0, [-2.0, 5.0]).unwrap();
    let chi = higher_dim_gvf(&TORUS, &gains, &[7.5, 1.2, 0.4, 0.3, 0.2]).unwrap();
    assert_close(
        &chi,
        &[
            6.191302706240149,
            -14.621577886111238,
            -9.362324477933381,
            -5.2421811885778846,
            -4.0663009246632037,
        ],
        1e-12,
    );
}

#[test]
fn control_with_one_neighbor() {
    let gains = FieldGains::uniform(3, 0.6, 3.0).unwrap();
    let out = cgvf_control(
        &TORUS,
        &gains,
        &[9.0, 0.0, 0.0],
        [0.0, 0.0],
        [0.1, 0.0],
        &[[0.5, 0.0]],
        0.4,
        0.6,
    )
    .unwrap();
    assert_close(&out.u, &[-0.6, -8.0, -2.0], 1e-12);
    assert_close(&out.omega_rate, &[-1.7, -1.0], 1e-12);
}

fn two_robot_state() -> (SimulationState, SwarmConfig) {
    let state = SimulationState {
        time: 0.0,
        robots: vec![
            RobotState {
                x: vec![7.5, 1.2, 0.4],
                omega: [0.3, 0.2],
                omega_hat: [0.05, -0.1],
            },
            RobotState {
                x: vec![6.9, 2.0, -0.3],
                omega: [0.75, 0.35],
                omega_hat: [0.2, 0.15],
            },
        ],
        target: TargetState::new([0.1, 0.0], 3, DEFAULT_M_TAIL),
    };
    let k = vec![0.6, 0.8, 1.0];
    let config = SwarmConfig {
        sensing_radius: 0.6,
        safe_radius: 0.4,
        gains: vec![
            FieldGains::new(k.clone(), 3.0, DEFAULT_M_TAIL).unwrap(),
            FieldGains::new(k, 2.5, DEFAULT_M_TAIL).unwrap(),
        ],
        estimator: EstimatorMode::Consensus(ConsensusConfig::ring(2, 5.0)),
    };
    (state, config)
}

#[test]
fn two_robot_closed_loop_rates() {
    let (state, config) = two_robot_state();
    let rate = swarm_rhs(&state, &config, &TORUS).unwrap();
    let a = &rate.robots[0];
    let b = &rate.robots[1];
    assert_close(
        &a.x,
        &[2.3026587785082823, -7.3382781054460015, -1.7196325649285329],
        1e-12,
    );
    assert_close(&a.omega, &[-4.7026198689366987, -4.8697804847828085], 1e-12);
    assert_close(
        &b.x,
        &[3.9063376003632204, -6.0960878299470339, 0.19989978229902656],
        1e-12,
    );
    assert_close(&b.omega, &[-1.8042407983246231, -3.5625009114654834], 1e-12);
    assert_close(&a.omega_hat, &[0.0, 0.75], 1e-12);
    assert_close(&b.omega_hat, &[-1.75, -2.25], 1e-12);
    assert_eq!(rate.target, [-1.0, -1.0]);
}

#[test]
fn pair_potential_matches_quadrature() {
    // Two robots exactly on the torus at the target; V reduces to the
    // potential of their separation 0.5.
    let gains = FieldGains::uniform(3, 0.6, 3.0).unwrap();
    let omega_b = [0.3, 0.4];
    let on_surface = |w: [f64; 2]| {
        let rho = 6.0 + 2.0 * w[0].cos();
        vec![rho * w[1].cos(), rho * w[1].sin(), 2.0 * w[0].sin()]
    };
    let state = SimulationState {
        time: 0.0,
        robots: vec![
            RobotState::new(on_surface([0.0, 0.0]), [0.0, 0.0]),
            RobotState::new(on_surface(omega_b), omega_b),
        ],
        target: TargetState::new([0.0, 0.0], 3, DEFAULT_M_TAIL),
    };
    let config = SwarmConfig {
        sensing_radius: 0.6,
        safe_radius: 0.4,
        gains: vec![gains.clone(), gains],
        estimator: EstimatorMode::Broadcast,
    };
    let v = lyapunov_value(&state, &config, &TORUS).unwrap();
    let tilde = 0.5 * 3.0 * (0.3f64.powi(2) + 0.4f64.powi(2));
    assert!((v - tilde - 0.022741127776021876).abs() < 1e-9, "{v}");
}
