//! Singular points of the original field versus the lifted field.
//!
//! On the unit sphere with `m = (0, 0, 1)` the original field vanishes at
//! both poles (the gradient is parallel to `m` there) and at the origin
//! (the gradient itself vanishes). The lifted field on the torus has no
//! such points: its propagation part carries the constant tail
//! `((-1)^n m_{n+2}, -(-1)^n m_{n+1})` and is orthogonal to the convergence
//! part, so its norm never drops below `|m_tail|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{higher_dim_gvf, original_gvf_3d, FieldGains};
use crate::surfaces::BuiltinSurface;

/// Norm below which a sampled original-field vector counts as singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SingularityReport {
    /// Points where the sphere field vanished, with the field norm there.
    pub singular_points: Vec<([f64; 3], f64)>,
    pub sphere_samples: usize,
    pub lifted_samples: usize,
    pub lifted_min_norm: f64,
    /// `0.1 * |m_tail|`
    pub lifted_bound: f64,
}

impl SingularityReport {
    pub fn passed(&self) -> bool {
        !self.singular_points.is_empty() && self.lifted_min_norm > self.lifted_bound
    }
}

fn sphere_phi(x: [f64; 3]) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0
}

fn sphere_grad(x: [f64; 3]) -> [f64; 3] {
    [2.0 * x[0], 2.0 * x[1], 2.0 * x[2]]
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Scans a latitude/longitude grid on the unit sphere plus the vertical axis
/// for zeros of the original field, then samples the lifted torus field at
/// `lifted_samples` random states (x in `[-10, 10]^3`, omega in
/// `[-10, 10]^2`).
pub fn singularity_demo(lifted_samples: usize, seed: u64) -> SingularityReport {
    let m = [0.0, 0.0, 1.0];
    let k = 1.0;
    let mut candidates = Vec::new();
    let (n_lat, n_lon) = (36, 72);
    for a in 0..=n_lat {
        let theta = std::f64::consts::PI * a as f64 / n_lat as f64;
        for b in 0..n_lon {
            let lon = 2.0 * std::f64::consts::PI * b as f64 / n_lon as f64;
            candidates.push([theta.sin() * lon.cos(), theta.sin() * lon.sin(), theta.cos()]);
        }
    }
    for a in -30..=30 {
        candidates.push([0.0, 0.0, a as f64 / 20.0]);
    }
    let sphere_samples = candidates.len();

    let mut singular_points: Vec<([f64; 3], f64)> = Vec::new();
    for x in candidates {
        let chi = original_gvf_3d(sphere_phi, sphere_grad, m, k, x);
        let n = norm(&chi);
        if n < SINGULAR_TOLERANCE {
            // The poles repeat once per longitude.
            let rounded = x.map(|v| (v * 1e9).round() / 1e9);
            if !singular_points.iter().any(|(p, _)| *p == rounded) {
                singular_points.push((rounded, n));
            }
        }
    }

    let torus = BuiltinSurface::Torus {
        major: 6.0,
        minor: 2.0,
    };
    let gains = FieldGains::uniform(3, 0.6, 3.0).expect("valid gains");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lifted_min_norm = f64::INFINITY;
    for _ in 0..lifted_samples {
        let p: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let chi = higher_dim_gvf(&torus, &gains, &p).expect("dimensions match");
        lifted_min_norm = lifted_min_norm.min(norm(&chi));
    }

    SingularityReport {
        singular_points,
        sphere_samples,
        lifted_samples,
        lifted_min_norm,
        lifted_bound: 0.1 * norm(&gains.m_tail),
    }
}
