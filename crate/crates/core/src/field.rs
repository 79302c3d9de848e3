//! Repulsion weights, the lifted (singularity-free) guiding vector field and
//! the per-robot coordinated control law.

use crate::error::{check_dim, Error, Result};
use crate::surfaces::{surface_error, Surface, Vec2};

/// Gains of one robot: per-axis surface gains `k`, the attraction gain `c`
/// toward the target estimate, and the two nonzero tail entries
/// `(m_{n+1}, m_{n+2})` of the auxiliary vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGains {
    pub k: Vec<f64>,
    pub c: f64,
    pub m_tail: Vec2,
}

pub const DEFAULT_M_TAIL: Vec2 = [-1.0, 1.0];

impl FieldGains {
    pub fn new(k: Vec<f64>, c: f64, m_tail: Vec2) -> Result<Self> {
        let gains = FieldGains { k, c, m_tail };
        gains.validate()?;
        Ok(gains)
    }

    /// Same gain on every axis, default tail.
    pub fn uniform(n: usize, k: f64, c: f64) -> Result<Self> {
        Self::new(vec![k; n], c, DEFAULT_M_TAIL)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.is_empty() {
            return Err(Error::config("gain vector k is empty"));
        }
        if let Some(bad) = self.k.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(Error::config(format!("every k_j must be positive, got {bad}")));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::config(format!("c must be positive, got {}", self.c)));
        }
        if self.m_tail.iter().any(|m| *m == 0.0 || !m.is_finite()) {
            return Err(Error::config(format!(
                "m_tail entries must be finite and nonzero, got {:?}",
                self.m_tail
            )));
        }
        Ok(())
    }
}

/// Physical velocity command and virtual-coordinate rates of one robot.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub u: Vec<f64>,
    pub omega_rate: Vec2,
}

fn check_radii(r: f64, big_r: f64) {
    debug_assert!(0.0 < r && r < big_r, "need 0 < r < R, got r={r}, R={big_r}");
}

/// `alpha(s) = (s-R)^2/(s-r)^2` on `(r, R]`, zero beyond `R`.
pub fn repulsion_weight(s: f64, r: f64, big_r: f64) -> Result<f64> {
    check_radii(r, big_r);
    if s <= r || s.is_nan() {
        return Err(Error::separation(s, r));
    }
    if s > big_r {
        return Ok(0.0);
    }
    let num = s - big_r;
    let den = s - r;
    Ok(num * num / (den * den))
}

/// `d alpha / ds = 2(s-R)(R-r)/(s-r)^3` on `(r, R]`, zero beyond `R`.
pub fn repulsion_weight_derivative(s: f64, r: f64, big_r: f64) -> Result<f64> {
    check_radii(r, big_r);
    if s <= r || s.is_nan() {
        return Err(Error::separation(s, r));
    }
    if s > big_r {
        return Ok(0.0);
    }
    let den = s - r;
    Ok(2.0 * (s - big_r) * (big_r - r) / (den * den * den))
}

/// Closed form of `int_s^R alpha(t) dt` (zero for `s >= R`).
///
/// With `u = s - r` and `d = R - r` the integrand is `1 - 2d/u + d^2/u^2`,
/// giving `2d ln(u/d) - u + d^2/u`.
pub fn repulsion_potential(s: f64, r: f64, big_r: f64) -> Result<f64> {
    check_radii(r, big_r);
    if s <= r || s.is_nan() {
        return Err(Error::separation(s, r));
    }
    if s >= big_r {
        return Ok(0.0);
    }
    let u = s - r;
    let d = big_r - r;
    Ok(2.0 * d * (u / d).ln() - u + d * d / u)
}

/// `eta = sum_k alpha(|w - w_k|) (w - w_k)/|w - w_k|` over the given
/// neighbors. Callers pass only neighbors inside the sensing radius;
/// the weight vanishes beyond it anyway.
pub fn repulsion_terms(own: Vec2, neighbors: &[Vec2], r: f64, big_r: f64) -> Result<Vec2> {
    let mut eta = [0.0; 2];
    for nb in neighbors {
        let d = [own[0] - nb[0], own[1] - nb[1]];
        let s = d[0].hypot(d[1]);
        let a = repulsion_weight(s, r, big_r)?;
        eta[0] += a * d[0] / s;
        eta[1] += a * d[1] / s;
    }
    Ok(eta)
}

/// `(-1)^n`
pub fn parity_sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The lifted guiding vector field at `p = (x_1..x_n, w_1, w_2)` with the
/// auxiliary vector `m = (0,..,0, m_{n+1}, m_{n+2})`.
pub fn higher_dim_gvf<S: Surface + ?Sized>(
    model: &S,
    gains: &FieldGains,
    p: &[f64],
) -> Result<Vec<f64>> {
    let n = model.dim_ambient();
    check_dim(n + 2, p.len())?;
    check_dim(n, gains.k.len())?;
    let w = [p[n], p[n + 1]];
    let phi = surface_error(model, &p[..n], w)?;
    let jac = model.jacobian(w);
    let sign = parity_sign(n);
    let [m1, m2] = gains.m_tail;

    let mut chi = Vec::with_capacity(n + 2);
    let mut tail = [sign * m2, -sign * m1];
    for j in 0..n {
        let kphi = gains.k[j] * phi[j];
        chi.push(sign * (m2 * jac.d1[j] - m1 * jac.d2[j]) - kphi);
        tail[0] += kphi * jac.d1[j];
        tail[1] += kphi * jac.d2[j];
    }
    chi.extend(tail);
    Ok(chi)
}

/// The original field `grad(phi) x m - k phi grad(phi)` for a single
/// implicit function in `R^3`. It vanishes wherever `grad(phi)` is parallel
/// to `m` on the zero level set.
pub fn original_gvf_3d(
    phi: impl Fn([f64; 3]) -> f64,
    grad_phi: impl Fn([f64; 3]) -> [f64; 3],
    m: [f64; 3],
    k: f64,
    x: [f64; 3],
) -> [f64; 3] {
    let g = grad_phi(x);
    let v = phi(x);
    let cross = [
        g[1] * m[2] - g[2] * m[1],
        g[2] * m[0] - g[0] * m[2],
        g[0] * m[1] - g[1] * m[0],
    ];
    [
        cross[0] - k * v * g[0],
        cross[1] - k * v * g[1],
        cross[2] - k * v * g[2],
    ]
}

/// Physical and virtual-coordinate commands for one robot.
///
/// `neighbors` are the virtual coordinates of robots in the sensing
/// neighborhood; every separation must exceed `r`.
#[allow(clippy::too_many_arguments)]
pub fn cgvf_control<S: Surface + ?Sized>(
    model: &S,
    gains: &FieldGains,
    x: &[f64],
    omega: Vec2,
    omega_hat: Vec2,
    neighbors: &[Vec2],
    r: f64,
    big_r: f64,
) -> Result<ControlOutput> {
    let n = model.dim_ambient();
    check_dim(n, gains.k.len())?;
    let phi = surface_error(model, x, omega)?;
    let jac = model.jacobian(omega);
    let eta = repulsion_terms(omega, neighbors, r, big_r)?;
    let sign = parity_sign(n);
    let [m1, m2] = gains.m_tail;

    let mut u = Vec::with_capacity(n);
    let mut rate = [sign * m2, -sign * m1];
    for j in 0..n {
        let kphi = gains.k[j] * phi[j];
        u.push(sign * (m2 * jac.d1[j] - m1 * jac.d2[j]) - kphi);
        rate[0] += kphi * jac.d1[j];
        rate[1] += kphi * jac.d2[j];
    }
    for l in 0..2 {
        rate[l] += -gains.c * (omega[l] - omega_hat[l]) + eta[l];
    }
    Ok(ControlOutput {
        u,
        omega_rate: rate,
    })
}
