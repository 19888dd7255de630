//! Two-network frustrated Kuramoto model ("Blue vs Red"): full nonlinear
//! integration, linearized super-Laplacian spectra, closed-form fixed points
//! for the internally-locked and fragmentation ansätze, and critical-threshold
//! finders for the loss of locking.
//!
//! The crate is organized around the pipeline
//! [`graph`] → [`dynamics`] → ([`linearized`], [`fixedpoint`]) → [`measures`],
//! with [`exp`] orchestrating reproducible experiment runs on top.

pub mod dynamics;
pub mod exp;
pub mod fixedpoint;
pub mod graph;
pub mod linearized;
pub mod measures;

/// Wrap an angle into the principal range `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x % two_pi;
    if y <= -std::f64::consts::PI {
        y += two_pi;
    } else if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}
