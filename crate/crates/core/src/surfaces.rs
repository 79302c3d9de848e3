//! Parametric surfaces `f: R^2 -> R^n` and the surface-convergence error.
//!
//! Virtual coordinates live on the unwrapped parameter plane; periodic
//! surfaces such as the torus are never reduced modulo `2*pi`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

/// A point in the two-dimensional parameter plane.
pub type Vec2 = [f64; 2];

/// The two partial-derivative columns `[df/dw1 | df/dw2]` of a surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl Jacobian {
    pub fn column(&self, l: usize) -> &[f64] {
        match l {
            0 => &self.d1,
            1 => &self.d2,
            _ => panic!("jacobian column index {l} out of range"),
        }
    }
}

/// A parametric embedding of the plane into `R^n`.
///
/// `jacobian` defaults to central finite differences; analytic surfaces
/// should override it.
pub trait Surface: Send + Sync {
    fn dim_ambient(&self) -> usize;

    fn eval(&self, w: Vec2) -> Vec<f64>;

    fn jacobian(&self, w: Vec2) -> Jacobian {
        finite_difference_jacobian(self, w, fd_step)
    }

    /// Claimed uniform bound on the first derivatives, if known.
    fn derivative_bound_hint(&self) -> Option<f64> {
        None
    }
}

/// Step used by the finite-difference fallback for coordinate value `w`.
pub fn fd_step(w: f64) -> f64 {
    1e-6 * w.abs().max(1.0)
}

/// Central-difference jacobian with a per-coordinate step.
pub fn finite_difference_jacobian<S: Surface + ?Sized>(
    surface: &S,
    w: Vec2,
    step: impl Fn(f64) -> f64,
) -> Jacobian {
    let column = |l: usize| {
        let h = step(w[l]);
        let mut plus = w;
        let mut minus = w;
        plus[l] += h;
        minus[l] -= h;
        let (fp, fm) = (surface.eval(plus), surface.eval(minus));
        fp.iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect::<Vec<_>>()
    };
    Jacobian {
        d1: column(0),
        d2: column(1),
    }
}

/// Built-in analytic surfaces in `R^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BuiltinSurface {
    /// `((R + r cos w1) cos w2, (R + r cos w1) sin w2, r sin w1)`
    Torus { major: f64, minor: f64 },
    /// `(w1, w2, 0)`
    Plane,
    /// `(w1, w2, A sin(a w1) cos(b w2))`
    Wave { amplitude: f64, freq1: f64, freq2: f64 },
}

impl BuiltinSurface {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinSurface::Torus { .. } => "torus",
            BuiltinSurface::Plane => "plane",
            BuiltinSurface::Wave { .. } => "wave",
        }
    }

    /// Sanity checks on the numeric parameters.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(crate::Error::config(format!("{what} must be finite")))
            }
        };
        match *self {
            BuiltinSurface::Torus { major, minor } => {
                finite(major, "torus major radius")?;
                finite(minor, "torus minor radius")?;
                if !(minor > 0.0 && major > minor) {
                    return Err(crate::Error::config(
                        "torus radii must satisfy major > minor > 0",
                    ));
                }
            }
            BuiltinSurface::Plane => {}
            BuiltinSurface::Wave {
                amplitude,
                freq1,
                freq2,
            } => {
                finite(amplitude, "wave amplitude")?;
                finite(freq1, "wave frequency 1")?;
                finite(freq2, "wave frequency 2")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for BuiltinSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinSurface::Torus { major, minor } => write!(f, "torus({major}, {minor})"),
            BuiltinSurface::Plane => write!(f, "plane"),
            BuiltinSurface::Wave {
                amplitude,
                freq1,
                freq2,
            } => write!(f, "wave({amplitude}, {freq1}, {freq2})"),
        }
    }
}

impl Surface for BuiltinSurface {
    fn dim_ambient(&self) -> usize {
        3
    }

    fn eval(&self, w: Vec2) -> Vec<f64> {
        match *self {
            BuiltinSurface::Torus { major, minor } => {
                let ring = major + minor * w[0].cos();
                vec![ring * w[1].cos(), ring * w[1].sin(), minor * w[0].sin()]
            }
            BuiltinSurface::Plane => vec![w[0], w[1], 0.0],
            BuiltinSurface::Wave {
                amplitude,
                freq1,
                freq2,
            } => vec![
                w[0],
                w[1],
                amplitude * (freq1 * w[0]).sin() * (freq2 * w[1]).cos(),
            ],
        }
    }

    fn jacobian(&self, w: Vec2) -> Jacobian {
        match *self {
            BuiltinSurface::Torus { major, minor } => {
                let (s1, c1) = w[0].sin_cos();
                let (s2, c2) = w[1].sin_cos();
                let ring = major + minor * c1;
                Jacobian {
                    d1: vec![-minor * s1 * c2, -minor * s1 * s2, minor * c1],
                    d2: vec![-ring * s2, ring * c2, 0.0],
                }
            }
            BuiltinSurface::Plane => Jacobian {
                d1: vec![1.0, 0.0, 0.0],
                d2: vec![0.0, 1.0, 0.0],
            },
            BuiltinSurface::Wave {
                amplitude,
                freq1,
                freq2,
            } => {
                let (s1, c1) = (freq1 * w[0]).sin_cos();
                let (s2, c2) = (freq2 * w[1]).sin_cos();
                Jacobian {
                    d1: vec![1.0, 0.0, amplitude * freq1 * c1 * c2],
                    d2: vec![0.0, 1.0, -amplitude * freq2 * s1 * s2],
                }
            }
        }
    }

    fn derivative_bound_hint(&self) -> Option<f64> {
        match *self {
            BuiltinSurface::Torus { major, minor } => Some(major + minor),
            BuiltinSurface::Plane => Some(1.0),
            BuiltinSurface::Wave {
                amplitude,
                freq1,
                freq2,
            } => Some(1.0_f64.max(amplitude.abs() * freq1.abs().max(freq2.abs()))),
        }
    }
}

/// A surface assembled from closures, for library users with their own
/// parametrizations.
pub struct FnSurface<F, J = fn(Vec2) -> Jacobian> {
    dim: usize,
    eval: F,
    jacobian: Option<J>,
    bound: Option<f64>,
}

impl<F> FnSurface<F>
where
    F: Fn(Vec2) -> Vec<f64> + Send + Sync,
{
    /// Surface with finite-difference derivatives.
    pub fn new(dim: usize, eval: F) -> Self {
        FnSurface {
            dim,
            eval,
            jacobian: None,
            bound: None,
        }
    }
}

impl<F, J> FnSurface<F, J>
where
    F: Fn(Vec2) -> Vec<f64> + Send + Sync,
    J: Fn(Vec2) -> Jacobian + Send + Sync,
{
    pub fn with_jacobian(dim: usize, eval: F, jacobian: J) -> Self {
        FnSurface {
            dim,
            eval,
            jacobian: Some(jacobian),
            bound: None,
        }
    }

    pub fn with_bound_hint(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }
}

impl<F, J> Surface for FnSurface<F, J>
where
    F: Fn(Vec2) -> Vec<f64> + Send + Sync,
    J: Fn(Vec2) -> Jacobian + Send + Sync,
{
    fn dim_ambient(&self) -> usize {
        self.dim
    }

    fn eval(&self, w: Vec2) -> Vec<f64> {
        (self.eval)(w)
    }

    fn jacobian(&self, w: Vec2) -> Jacobian {
        match &self.jacobian {
            Some(j) => j(w),
            None => finite_difference_jacobian(self, w, fd_step),
        }
    }

    fn derivative_bound_hint(&self) -> Option<f64> {
        self.bound
    }
}

pub fn eval_surface<S: Surface + ?Sized>(model: &S, w: Vec2) -> Vec<f64> {
    model.eval(w)
}

pub fn eval_jacobian<S: Surface + ?Sized>(model: &S, w: Vec2) -> Jacobian {
    model.jacobian(w)
}

/// `phi_j = x_j - f_j(w)`.
pub fn surface_error<S: Surface + ?Sized>(model: &S, x: &[f64], w: Vec2) -> Result<Vec<f64>> {
    check_dim(model.dim_ambient(), x.len())?;
    let f = model.eval(w);
    Ok(x.iter().zip(&f).map(|(xi, fi)| xi - fi).collect())
}

/// Largest sampled first and second partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBounds {
    pub first: f64,
    pub second: f64,
}

/// Samples the jacobian over `points` and differentiates it once more by
/// central differences to bound the second partials.
pub fn sample_derivative_bounds<S: Surface + ?Sized>(
    model: &S,
    points: impl IntoIterator<Item = Vec2>,
) -> DerivativeBounds {
    let mut bounds = DerivativeBounds {
        first: 0.0,
        second: 0.0,
    };
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for w in points {
        let jac = model.jacobian(w);
        bounds.first = bounds.first.max(max_abs(&jac.d1)).max(max_abs(&jac.d2));
        for l in 0..2 {
            let h = 1e-4 * w[l].abs().max(1.0);
            let mut plus = w;
            let mut minus = w;
            plus[l] += h;
            minus[l] -= h;
            let (jp, jm) = (model.jacobian(plus), model.jacobian(minus));
            for col in 0..2 {
                for (a, b) in jp.column(col).iter().zip(jm.column(col)) {
                    bounds.second = bounds.second.max(((a - b) / (2.0 * h)).abs());
                }
            }
        }
    }
    bounds
}
