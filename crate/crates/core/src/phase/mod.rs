//! Reflection-coefficient subproblem: a unit-modulus quadratic program solved
//! by Riemannian gradient descent on the complex circle manifold or by
//! successive convex approximation in the phase angles.

mod ccm;
mod quadratic;
mod sca;

pub use ccm::ccm_minimize;
pub use quadratic::{
    build_quadratic_form, euclidean_gradient_phi, retract, riemannian_project, sca_gradient_theta,
    unit_vector, QuadraticForm,
};
pub use sca::sca_minimize;

use serde::{Deserialize, Serialize};

/// Step-size rule shared by both minimizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchConfig {
    /// Sufficient-decrease fraction, in `(0, 0.5)`.
    pub armijo_tau: f64,
    /// Largest per-element phase move of the first CCM trial step, in radians;
    /// also the initial SCA step `1 / beta`.
    pub initial_step: f64,
    pub shrink_factor: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            armijo_tau: 0.3,
            initial_step: 1.0,
            shrink_factor: 0.5,
            max_backtracks: 50,
        }
    }
}

impl LineSearchConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.armijo_tau > 0.0
            && self.armijo_tau < 0.5
            && self.initial_step > 0.0
            && self.shrink_factor > 0.0
            && self.shrink_factor < 1.0
            && self.max_backtracks >= 1;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidConfig(format!("invalid line search {self:?}")))
        }
    }
}

/// Stopping rule of an inner minimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub line_search: LineSearchConfig,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 500,
            line_search: LineSearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerTermination {
    Converged,
    ZeroGradient,
    MaxIterations,
    /// No step passed the sufficient-decrease test; the last point is kept.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub f: f64,
    pub step: f64,
}

/// Outcome of one inner minimization. `trace[0]` is the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub theta: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub termination: InnerTermination,
    pub trace: Vec<TracePoint>,
}

pub(crate) fn relative_change(prev: f64, next: f64) -> f64 {
    let d = (prev - next).abs();
    if next != 0.0 {
        d / next.abs()
    } else {
        d
    }
}
