//! Coordinated guiding vector fields (CGVF) for ordering-flexible
//! multi-robot navigation on parametric surfaces.
//!
//! Each robot carries two virtual coordinates on the surface's parameter
//! plane next to its physical position. A lifted, singularity-free guiding
//! vector field drives every robot onto the surface. Attraction to a moving
//! virtual target and a bounded-range repulsion between virtual coordinates
//! spread the swarm without fixing any ordering.
//!
//! Module map:
//!
//! * [`surfaces`]: parametric surfaces, jacobians, surface-convergence error
//! * [`field`]: repulsion weights, the lifted field, the per-robot control law
//! * [`swarm`]: robot/target state, sensing neighborhoods, target estimators
//! * [`engine`]: closed-loop dynamics, RK4 stepping, Lyapunov and metrics
//! * [`scenario`] and [`output`]: scenario files and run artifacts

pub mod demo;
pub mod engine;
pub mod error;
pub mod field;
pub mod ode;
pub mod output;
pub mod plot;
pub mod scenario;
pub mod surfaces;
pub mod swarm;

pub use error::{Error, Result};
