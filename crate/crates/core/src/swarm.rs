//! Robot and target state, sensing neighborhoods and target estimators.

use crate::error::{Error, Result};
use crate::field::{parity_sign, FieldGains};
use crate::surfaces::Vec2;

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub x: Vec<f64>,
    pub omega: Vec2,
    pub omega_hat: Vec2,
}

impl RobotState {
    /// Robot whose estimate starts at its own virtual coordinates.
    pub fn new(x: Vec<f64>, omega: Vec2) -> Self {
        RobotState {
            x,
            omega,
            omega_hat: omega,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(&self.omega)
            .chain(&self.omega_hat)
            .all(|v| v.is_finite())
    }
}

/// The virtual target moving at constant velocity in the parameter plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub omega_star: Vec2,
    pub velocity: Vec2,
}

impl TargetState {
    pub fn new(omega_star: Vec2, n: usize, m_tail: Vec2) -> Self {
        TargetState {
            omega_star,
            velocity: target_velocity(n, m_tail),
        }
    }
}

/// Undirected communication graph used by the consensus estimator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    adjacency: Vec<Vec<usize>>,
}

impl CommGraph {
    /// Ring over `0..n` (a single edge for `n == 2`, none for `n == 1`).
    pub fn ring(n: usize) -> Self {
        let mut g = CommGraph {
            adjacency: vec![Vec::new(); n],
        };
        if n >= 2 {
            for i in 0..n {
                g.add_edge(i, (i + 1) % n);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = CommGraph {
            adjacency: vec![Vec::new(); n],
        };
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::config(format!(
                    "edge ({a}, {b}) references a robot outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::config(format!("self-loop on robot {a}")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        if !self.adjacency[a].contains(&b) {
            self.adjacency[a].push(b);
            self.adjacency[b].push(a);
        }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Each undirected edge once, as `(low, high)`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.adjacency.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &k in &self.adjacency[i] {
                if !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusConfig {
    pub gamma: f64,
    pub leaders: Vec<usize>,
    pub graph: CommGraph,
}

impl ConsensusConfig {
    /// Ring graph with robot 0 as the only leader.
    pub fn ring(n: usize, gamma: f64) -> Self {
        ConsensusConfig {
            gamma,
            leaders: vec![0],
            graph: CommGraph::ring(n),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::config("consensus gain gamma must be positive"));
        }
        if self.graph.len() != n {
            return Err(Error::config(format!(
                "communication graph has {} nodes, swarm has {n} robots",
                self.graph.len()
            )));
        }
        if self.leaders.is_empty() {
            return Err(Error::config("consensus estimator needs at least one leader"));
        }
        if let Some(l) = self.leaders.iter().find(|&&l| l >= n) {
            return Err(Error::config(format!("leader {l} is not a robot index")));
        }
        if !self.graph.is_connected() {
            return Err(Error::config("communication graph is not connected"));
        }
        Ok(())
    }

    fn is_leader(&self, i: usize) -> bool {
        self.leaders.contains(&i)
    }
}

/// How each robot obtains its estimate of the target coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorMode {
    /// The target coordinates are broadcast to every robot.
    Broadcast,
    /// Leader-pinned linear consensus with velocity feed-forward.
    Consensus(ConsensusConfig),
}

impl EstimatorMode {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorMode::Broadcast => "broadcast",
            EstimatorMode::Consensus(_) => "consensus",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub sensing_radius: f64,
    pub safe_radius: f64,
    /// One entry per robot.
    pub gains: Vec<FieldGains>,
    pub estimator: EstimatorMode,
}

impl SwarmConfig {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let (r, big_r) = (self.safe_radius, self.sensing_radius);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::config("safe radius r must be positive"));
        }
        if !(big_r.is_finite() && big_r > r) {
            return Err(Error::config(format!(
                "R must exceed r (got R={big_r}, r={r})"
            )));
        }
        if self.gains.is_empty() {
            return Err(Error::config("swarm needs at least one robot"));
        }
        for (i, g) in self.gains.iter().enumerate() {
            g.validate()
                .map_err(|e| Error::config(format!("robot {i}: {e}")))?;
            if g.k.len() != dim {
                return Err(Error::config(format!(
                    "robot {i}: k has {} entries, surface dimension is {dim}",
                    g.k.len()
                )));
            }
        }
        let tail = self.gains[0].m_tail;
        if self.gains.iter().any(|g| g.m_tail != tail) {
            return Err(Error::config(
                "all robots must share m_tail (it fixes the target velocity)",
            ));
        }
        if let EstimatorMode::Consensus(cfg) = &self.estimator {
            cfg.validate(self.gains.len())?;
        }
        Ok(())
    }

    pub fn m_tail(&self) -> Vec2 {
        self.gains[0].m_tail
    }
}

pub fn distance(a: Vec2, b: Vec2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `k` is a neighbor of `i` iff `k != i` and `|w_i - w_k| < R` (strict).
pub fn neighbor_sets(omegas: &[Vec2], big_r: f64) -> Vec<Vec<usize>> {
    let n = omegas.len();
    let mut sets = vec![Vec::new(); n];
    for i in 0..n {
        for k in (i + 1)..n {
            if distance(omegas[i], omegas[k]) < big_r {
                sets[i].push(k);
                sets[k].push(i);
            }
        }
    }
    sets
}

/// `((-1)^n m_{n+2}, -(-1)^n m_{n+1})`.
pub fn target_velocity(n: usize, m_tail: Vec2) -> Vec2 {
    let sign = parity_sign(n);
    [sign * m_tail[1], -sign * m_tail[0]]
}

/// Time derivative of every robot's estimate.
pub fn estimator_rates(
    mode: &EstimatorMode,
    robots: &[RobotState],
    target: &TargetState,
) -> Vec<Vec2> {
    match mode {
        EstimatorMode::Broadcast => vec![target.velocity; robots.len()],
        EstimatorMode::Consensus(cfg) => (0..robots.len())
            .map(|i| {
                let own = robots[i].omega_hat;
                let mut pull = [0.0; 2];
                for &k in cfg.graph.neighbors(i) {
                    pull[0] += robots[k].omega_hat[0] - own[0];
                    pull[1] += robots[k].omega_hat[1] - own[1];
                }
                if cfg.is_leader(i) {
                    pull[0] += target.omega_star[0] - own[0];
                    pull[1] += target.omega_star[1] - own[1];
                }
                [
                    target.velocity[0] + cfg.gamma * pull[0],
                    target.velocity[1] + cfg.gamma * pull[1],
                ]
            })
            .collect(),
    }
}

/// One explicit update of the estimates. Broadcast mode copies the target
/// coordinates; consensus mode takes a forward-Euler step of the tracker.
pub fn estimator_step(
    mode: &EstimatorMode,
    robots: &[RobotState],
    target: &TargetState,
    dt: f64,
) -> Vec<Vec2> {
    match mode {
        EstimatorMode::Broadcast => vec![target.omega_star; robots.len()],
        EstimatorMode::Consensus(_) => estimator_rates(mode, robots, target)
            .into_iter()
            .zip(robots)
            .map(|(rate, robot)| {
                [
                    robot.omega_hat[0] + rate[0] * dt,
                    robot.omega_hat[1] + rate[1] * dt,
                ]
            })
            .collect(),
    }
}

/// Rejects initial virtual coordinates with any pair at distance `<= r`.
pub fn validate_initial_separation(omegas: &[Vec2], r: f64) -> Result<()> {
    for i in 0..omegas.len() {
        for k in (i + 1)..omegas.len() {
            let s = distance(omegas[i], omegas[k]);
            if s <= r || s.is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "initial virtual coordinates of robots {i} and {k} are {s} apart, \
                     must exceed the safe radius {r}"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_examples() {
        assert_eq!(
            neighbor_sets(&[[0.0, 0.0], [0.5, 0.0]], 0.6),
            vec![vec![1], vec![0]]
        );
        assert_eq!(
            neighbor_sets(&[[0.0, 0.0], [0.6, 0.0]], 0.6),
            vec![Vec::<usize>::new(), vec![]]
        );
        assert_eq!(neighbor_sets(&[[0.0, 0.0]], 0.6), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn target_velocity_examples() {
        assert_eq!(target_velocity(3, [-1.0, 1.0]), [-1.0, -1.0]);
        assert_eq!(target_velocity(2, [-1.0, 1.0]), [1.0, 1.0]);
        assert_eq!(target_velocity(3, [-2.0, 5.0]), [-5.0, -2.0]);
    }

    fn robots(hats: &[Vec2]) -> Vec<RobotState> {
        hats.iter()
            .map(|&h| RobotState {
                x: vec![0.0; 3],
                omega: [0.0, 0.0],
                omega_hat: h,
            })
            .collect()
    }

    #[test]
    fn broadcast_copies_target() {
        let target = TargetState::new([1.5, -2.0], 3, [-1.0, 1.0]);
        let rs = robots(&[[9.0, 9.0], [0.0, 1.0]]);
        assert_eq!(
            estimator_step(&EstimatorMode::Broadcast, &rs, &target, 0.01),
            vec![[1.5, -2.0]; 2]
        );
    }

    #[test]
    fn consensus_fixed_point_tracks_target() {
        let target = TargetState::new([0.25, 0.5], 3, [-1.0, 1.0]);
        let mode = EstimatorMode::Consensus(ConsensusConfig::ring(4, 5.0));
        let rs = robots(&[target.omega_star; 4]);
        let dt = 1e-3;
        for hat in estimator_step(&mode, &rs, &target, dt) {
            assert_eq!(hat, [0.25 - dt, 0.5 - dt]);
        }
    }

    #[test]
    fn graph_connectivity() {
        assert!(CommGraph::ring(5).is_connected());
        assert!(CommGraph::ring(1).is_connected());
        let split = CommGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!split.is_connected());
        assert!(CommGraph::from_edges(2, &[(0, 2)]).is_err());
        assert_eq!(CommGraph::ring(3).edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn consensus_config_validation() {
        let mut cfg = ConsensusConfig::ring(4, 5.0);
        assert!(cfg.validate(4).is_ok());
        assert!(cfg.validate(5).is_err());
        cfg.leaders.clear();
        assert!(cfg.validate(4).is_err());
        let cfg = ConsensusConfig {
            gamma: 1.0,
            leaders: vec![0],
            graph: CommGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap(),
        };
        assert!(cfg.validate(4).is_err());
    }

    #[test]
    fn swarm_config_validation() {
        let gains = vec![FieldGains::uniform(3, 0.6, 3.0).unwrap(); 2];
        let mut cfg = SwarmConfig {
            sensing_radius: 0.6,
            safe_radius: 0.4,
            gains,
            estimator: EstimatorMode::Broadcast,
        };
        assert!(cfg.validate(3).is_ok());
        assert!(cfg.validate(2).is_err());
        cfg.sensing_radius = 0.3;
        let msg = cfg.validate(3).unwrap_err().to_string();
        assert!(msg.contains("R must exceed r"), "{msg}");
    }

    #[test]
    fn initial_separation() {
        assert!(validate_initial_separation(&[[0.0, 0.0], [0.5, 0.0]], 0.4).is_ok());
        assert!(validate_initial_separation(&[[0.0, 0.0], [0.4, 0.0]], 0.4).is_err());
    }
}
