//! Coupled swarm dynamics, closed-loop error dynamics, the Lyapunov monitor
//! and the fixed-step simulation loop.

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::field::{cgvf_control, repulsion_potential, repulsion_terms, ControlOutput};
use crate::ode;
use crate::surfaces::{surface_error, Jacobian, Surface, Vec2};
use crate::swarm::{
    distance, estimator_rates, estimator_step, neighbor_sets, validate_initial_separation,
    EstimatorMode, RobotState, SwarmConfig, TargetState,
};

/// Swarms at least this large evaluate per-robot dynamics on the rayon pool.
const PARALLEL_THRESHOLD: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub time: f64,
    pub robots: Vec<RobotState>,
    pub target: TargetState,
}

impl SimulationState {
    pub fn omegas(&self) -> Vec<Vec2> {
        self.robots.iter().map(|r| r.omega).collect()
    }

    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::new();
        for r in &self.robots {
            y.extend(&r.x);
            y.extend(r.omega);
            y.extend(r.omega_hat);
        }
        y.extend(self.target.omega_star);
        y
    }

    /// Inverse of `pack`, using `self` for the layout.
    fn unpack(&self, time: f64, y: &[f64]) -> SimulationState {
        let mut at = 0;
        let robots = self
            .robots
            .iter()
            .map(|r| {
                let n = r.x.len();
                let x = y[at..at + n].to_vec();
                let s = &y[at + n..at + n + 4];
                at += n + 4;
                RobotState {
                    x,
                    omega: [s[0], s[1]],
                    omega_hat: [s[2], s[3]],
                }
            })
            .collect();
        SimulationState {
            time,
            robots,
            target: TargetState {
                omega_star: [y[at], y[at + 1]],
                velocity: self.target.velocity,
            },
        }
    }
}

/// Time derivative of one robot's state.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotRate {
    pub x: Vec<f64>,
    pub omega: Vec2,
    pub omega_hat: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateRate {
    pub robots: Vec<RobotRate>,
    pub target: Vec2,
}

impl StateRate {
    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::new();
        for r in &self.robots {
            y.extend(&r.x);
            y.extend(r.omega);
            y.extend(r.omega_hat);
        }
        y.extend(self.target);
        y
    }
}

/// Neighbor sets of `state`, failing on the first pair (in index order)
/// that sits at or inside the safe radius.
pub fn checked_neighbor_sets(state: &SimulationState, config: &SwarmConfig) -> Result<Vec<Vec<usize>>> {
    let omegas = state.omegas();
    let sets = neighbor_sets(&omegas, config.sensing_radius);
    for (i, set) in sets.iter().enumerate() {
        for &k in set.iter().filter(|&&k| k > i) {
            let s = distance(omegas[i], omegas[k]);
            if s <= config.safe_radius {
                return Err(Error::SeparationViolation {
                    pair: Some((i, k)),
                    separation: s,
                    safe_radius: config.safe_radius,
                    time: Some(state.time),
                });
            }
        }
    }
    Ok(sets)
}

fn control_for<S: Surface + ?Sized>(
    i: usize,
    state: &SimulationState,
    config: &SwarmConfig,
    model: &S,
    sets: &[Vec<usize>],
) -> Result<ControlOutput> {
    let robot = &state.robots[i];
    let neighbors: Vec<Vec2> = sets[i].iter().map(|&k| state.robots[k].omega).collect();
    cgvf_control(
        model,
        &config.gains[i],
        &robot.x,
        robot.omega,
        robot.omega_hat,
        &neighbors,
        config.safe_radius,
        config.sensing_radius,
    )
}

/// Control outputs of every robot under the current neighbor sets.
pub fn swarm_controls<S: Surface + ?Sized>(
    state: &SimulationState,
    config: &SwarmConfig,
    model: &S,
) -> Result<Vec<ControlOutput>> {
    let sets = checked_neighbor_sets(state, config)?;
    let count = state.robots.len();
    if count >= PARALLEL_THRESHOLD {
        (0..count)
            .into_par_iter()
            .map(|i| control_for(i, state, config, model, &sets))
            .collect()
    } else {
        (0..count)
            .map(|i| control_for(i, state, config, model, &sets))
            .collect()
    }
}

/// Right-hand side of the full closed loop: robot kinematics driven by the
/// coordinated field, estimator dynamics and the target.
pub fn swarm_rhs<S: Surface + ?Sized>(
    state: &SimulationState,
    config: &SwarmConfig,
    model: &S,
) -> Result<StateRate> {
    let controls = swarm_controls(state, config, model)?;
    let hat_rates = estimator_rates(&config.estimator, &state.robots, &state.target);
    let robots = controls
        .into_iter()
        .zip(hat_rates)
        .map(|(c, h)| RobotRate {
            x: c.u,
            omega: c.omega_rate,
            omega_hat: h,
        })
        .collect();
    Ok(StateRate {
        robots,
        target: state.target.velocity,
    })
}

/// Rates of the surface error and the target-coordinate error.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRates {
    pub phi: Vec<f64>,
    pub omega_tilde: Vec2,
}

/// Closed-loop error dynamics of one robot:
///
/// ```text
/// dPhi/dt     = -(I + F1 F1^T + F2 F2^T) K Phi - F1 (eps_1 + e_1) - F2 (eps_2 + e_2)
/// d(w~_l)/dt  = Phi^T K F_l + eps_l + e_l
/// ```
///
/// where `eps_l = -c w~_l + eta_l` and `e = c (w_hat - w*)`.
pub fn closed_loop_error_rhs(
    phi: &[f64],
    jac: &Jacobian,
    k: &[f64],
    eps: Vec2,
    e: Vec2,
) -> Result<ErrorRates> {
    let n = phi.len();
    check_dim(n, jac.d1.len())?;
    check_dim(n, jac.d2.len())?;
    check_dim(n, k.len())?;
    let kphi: Vec<f64> = phi.iter().zip(k).map(|(p, k)| p * k).collect();
    let dot = |col: &[f64]| col.iter().zip(&kphi).map(|(a, b)| a * b).sum::<f64>();
    let proj = [dot(&jac.d1), dot(&jac.d2)];
    let drive = [eps[0] + e[0], eps[1] + e[1]];
    let phi_rate = (0..n)
        .map(|j| -kphi[j] - jac.d1[j] * (proj[0] + drive[0]) - jac.d2[j] * (proj[1] + drive[1]))
        .collect();
    Ok(ErrorRates {
        phi: phi_rate,
        omega_tilde: [proj[0] + drive[0], proj[1] + drive[1]],
    })
}

/// Error coordinates of one robot, as consumed by [`closed_loop_error_rhs`].
#[derive(Debug, Clone, PartialEq)]
pub struct RobotErrors {
    pub phi: Vec<f64>,
    pub omega_tilde: Vec2,
    pub jacobian: Jacobian,
    pub eta: Vec2,
    pub eps: Vec2,
    pub estimate: Vec2,
}

pub fn robot_errors<S: Surface + ?Sized>(
    state: &SimulationState,
    config: &SwarmConfig,
    model: &S,
) -> Result<Vec<RobotErrors>> {
    let sets = checked_neighbor_sets(state, config)?;
    let star = state.target.omega_star;
    state
        .robots
        .iter()
        .enumerate()
        .map(|(i, robot)| {
            let c = config.gains[i].c;
            let neighbors: Vec<Vec2> = sets[i].iter().map(|&k| state.robots[k].omega).collect();
            let eta = repulsion_terms(
                robot.omega,
                &neighbors,
                config.safe_radius,
                config.sensing_radius,
            )?;
            let tilde = [robot.omega[0] - star[0], robot.omega[1] - star[1]];
            Ok(RobotErrors {
                phi: surface_error(model, &robot.x, robot.omega)?,
                omega_tilde: tilde,
                jacobian: model.jacobian(robot.omega),
                eta,
                eps: [-c * tilde[0] + eta[0], -c * tilde[1] + eta[1]],
                estimate: [
                    c * (robot.omega_hat[0] - star[0]),
                    c * (robot.omega_hat[1] - star[1]),
                ],
            })
        })
        .collect()
}

/// Lyapunov function of the closed loop:
/// `sum_i (Phi_i^T K_i Phi_i + c_i |w~_i|^2) / 2` plus, for each unordered
/// neighbor pair, `int_{|w_i - w_k|}^R alpha(s) ds`.
pub fn lyapunov_value<S: Surface + ?Sized>(
    state: &SimulationState,
    config: &SwarmConfig,
    model: &S,
) -> Result<f64> {
    let sets = checked_neighbor_sets(state, config)?;
    let star = state.target.omega_star;
    let mut v = 0.0;
    for (i, robot) in state.robots.iter().enumerate() {
        let gains = &config.gains[i];
        let phi = surface_error(model, &robot.x, robot.omega)?;
        let quad: f64 = phi.iter().zip(&gains.k).map(|(p, k)| k * p * p).sum();
        let tilde = [robot.omega[0] - star[0], robot.omega[1] - star[1]];
        v += 0.5 * quad + 0.5 * gains.c * (tilde[0] * tilde[0] + tilde[1] * tilde[1]);
        for &k in sets[i].iter().filter(|&&k| k > i) {
            let s = distance(robot.omega, state.robots[k].omega);
            v += repulsion_potential(s, config.safe_radius, config.sensing_radius)?;
        }
    }
    Ok(v)
}

/// Per-step metrics of the coordinated-navigation objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSnapshot {
    pub time: f64,
    /// `max_{i,j} |phi_{i,j}|`
    pub phi_max: f64,
    /// `eps_{i,l} = -c_i w~_{i,l} + eta_{i,l}` per robot.
    pub eps: Vec<Vec2>,
    pub eps_max: f64,
    /// `|mean_i(w_i) - w*|`
    pub mean_offset: f64,
    /// Smallest separation over all pairs; `None` for a single robot.
    pub min_sep: Option<f64>,
    /// Largest separation over neighbor pairs; `None` without neighbors.
    pub max_neighbor_sep: Option<f64>,
    pub lyapunov: f64,
    /// `max_i |dw_i/dt - dw*/dt|`
    pub maneuver_max: f64,
}

pub fn metrics<S: Surface + ?Sized>(
    state: &SimulationState,
    config: &SwarmConfig,
    model: &S,
) -> Result<MetricsSnapshot> {
    let errors = robot_errors(state, config, model)?;
    let controls = swarm_controls(state, config, model)?;
    let omegas = state.omegas();
    let count = omegas.len();

    let phi_max = errors
        .iter()
        .flat_map(|e| e.phi.iter())
        .fold(0.0_f64, |m, p| m.max(p.abs()));
    let eps: Vec<Vec2> = errors.iter().map(|e| e.eps).collect();
    let eps_max = eps
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()));

    let mut mean = [0.0; 2];
    for w in &omegas {
        mean[0] += w[0];
        mean[1] += w[1];
    }
    mean = [mean[0] / count as f64, mean[1] / count as f64];
    let mean_offset = distance(mean, state.target.omega_star);

    let mut min_sep: Option<f64> = None;
    let mut max_neighbor_sep: Option<f64> = None;
    for i in 0..count {
        for k in (i + 1)..count {
            let s = distance(omegas[i], omegas[k]);
            min_sep = Some(min_sep.map_or(s, |m| m.min(s)));
            if s < config.sensing_radius {
                max_neighbor_sep = Some(max_neighbor_sep.map_or(s, |m| m.max(s)));
            }
        }
    }

    let v = state.target.velocity;
    let maneuver_max = controls
        .iter()
        .map(|c| distance(c.omega_rate, v))
        .fold(0.0_f64, f64::max);

    Ok(MetricsSnapshot {
        time: state.time,
        phi_max,
        eps,
        eps_max,
        mean_offset,
        min_sep,
        max_neighbor_sep,
        lyapunov: lyapunov_value(state, config, model)?,
        maneuver_max,
    })
}

/// One RK4 step of the closed loop. Neighbor sets are recomputed at every
/// stage; in broadcast mode the estimates are reset to the target afterwards.
pub fn rk4_step<S: Surface + ?Sized>(
    state: &SimulationState,
    config: &SwarmConfig,
    model: &S,
    dt: f64,
) -> Result<SimulationState> {
    let y = state.pack();
    let y_next = ode::rk4_step(state.time, &y, dt, |t, y| {
        let stage = state.unpack(t, y);
        swarm_rhs(&stage, config, model).map(|rate| rate.pack())
    })?;
    let mut next = state.unpack(state.time + dt, &y_next);
    if config.estimator == EstimatorMode::Broadcast {
        let hats = estimator_step(&config.estimator, &next.robots, &next.target, dt);
        for (robot, hat) in next.robots.iter_mut().zip(hats) {
            robot.omega_hat = hat;
        }
    }
    if let Some(i) = next.robots.iter().position(|r| !r.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "state of robot {i} became non-finite at t={}",
            next.time
        )));
    }
    Ok(next)
}

/// Checks that an initial state is consistent with the configuration and
/// satisfies the initial-separation requirement.
pub fn validate_initial_state<S: Surface + ?Sized>(
    state: &SimulationState,
    config: &SwarmConfig,
    model: &S,
) -> Result<()> {
    let dim = model.dim_ambient();
    config.validate(dim)?;
    if state.robots.len() != config.len() {
        return Err(Error::config(format!(
            "{} robot states for {} configured robots",
            state.robots.len(),
            config.len()
        )));
    }
    for (i, r) in state.robots.iter().enumerate() {
        if r.x.len() != dim {
            return Err(Error::config(format!(
                "robot {i}: position has {} components, surface dimension is {dim}",
                r.x.len()
            )));
        }
        if !r.is_finite() {
            return Err(Error::config(format!("robot {i}: non-finite initial state")));
        }
    }
    let expected = crate::swarm::target_velocity(dim, config.m_tail());
    if state.target.velocity != expected {
        return Err(Error::config(format!(
            "target velocity {:?} does not match m_tail (expected {expected:?})",
            state.target.velocity
        )));
    }
    validate_initial_separation(&state.omegas(), config.safe_radius)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub duration: f64,
    pub dt: f64,
    /// Record metrics and the trajectory every this many steps (and always
    /// at the final step).
    pub record_every: usize,
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::config("duration must be non-negative"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("dt must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every must be at least 1"));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        // Tolerate representation error in duration/dt.
        (self.duration / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<MetricsSnapshot>,
    pub trajectory: Vec<SimulationState>,
    pub final_state: SimulationState,
    /// Set when the run stopped early.
    pub aborted: Option<Error>,
}

/// Integrates from `initial` for `settings.duration`, recording metrics and
/// states. A separation violation stops the run and is reported in
/// [`RunOutput::aborted`] together with everything recorded so far.
pub fn run_simulation<S: Surface + ?Sized>(
    config: &SwarmConfig,
    model: &S,
    initial: SimulationState,
    settings: &RunSettings,
) -> Result<RunOutput> {
    settings.validate()?;
    validate_initial_state(&initial, config, model)?;

    let steps = settings.step_count();
    let t0 = initial.time;
    let mut state = initial;
    if config.estimator == EstimatorMode::Broadcast {
        for robot in &mut state.robots {
            robot.omega_hat = state.target.omega_star;
        }
    }
    let mut out = RunOutput {
        snapshots: vec![metrics(&state, config, model)?],
        trajectory: vec![state.clone()],
        final_state: state.clone(),
        aborted: None,
    };

    for step in 1..=steps {
        let t_end = (t0 + step as f64 * settings.dt).min(t0 + settings.duration);
        let h = t_end - state.time;
        let next = rk4_step(&state, config, model, h).and_then(|mut s| {
            s.time = t_end;
            metrics(&s, config, model).map(|m| (s, m))
        });
        match next {
            Ok((s, m)) => {
                state = s;
                if step % settings.record_every == 0 || step == steps {
                    out.snapshots.push(m);
                    out.trajectory.push(state.clone());
                }
            }
            Err(e) => {
                out.aborted = Some(e);
                break;
            }
        }
    }
    out.final_state = state;
    Ok(out)
}
