use super::quadratic::{retract, riemannian_project, unit_vector, QuadraticForm};
use super::{relative_change, InnerConfig, InnerTermination, PhaseResult, TracePoint};
use crate::error::Result;

/// Riemannian steepest descent on the complex circle manifold with Armijo
/// backtracking evaluated at the retracted point.
///
/// The first trial step moves the largest element by `initial_step` radians
/// (to first order); later trials start from twice the last accepted step.
pub fn ccm_minimize(qf: &QuadraticForm, theta0: &[f64], cfg: &InnerConfig) -> Result<PhaseResult> {
    cfg.line_search.validate()?;
    let ls = &cfg.line_search;
    let mut phi = unit_vector(theta0);
    let mut f = qf.value(&phi);
    let mut trace = vec![TracePoint {
        iteration: 0,
        f,
        step: 0.0,
    }];
    let mut last_step: Option<f64> = None;
    let mut termination = InnerTermination::MaxIterations;
    let mut iterations = 0;

    for t in 1..=cfg.max_iter {
        let grad = riemannian_project(&qf.euclidean_gradient(&phi), &phi);
        let g2 = grad.norm_squared();
        let gmax = grad.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if g2 == 0.0 || gmax == 0.0 {
            termination = InnerTermination::ZeroGradient;
            break;
        }
        let mut step = match last_step {
            Some(s) => 2.0 * s,
            None => ls.initial_step / gmax,
        };
        let mut accepted = None;
        for _ in 0..=ls.max_backtracks {
            if let Ok(cand) = retract(&(&phi - grad.scale(step))) {
                let fc = qf.value(&cand);
                if fc <= f - ls.armijo_tau * step * g2 {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            step *= ls.shrink_factor;
        }
        let Some((cand, fc)) = accepted else {
            termination = InnerTermination::Stalled;
            break;
        };
        let rel = relative_change(f, fc);
        phi = cand;
        f = fc;
        iterations = t;
        last_step = Some(step);
        trace.push(TracePoint {
            iteration: t,
            f,
            step,
        });
        if rel <= cfg.tol {
            termination = InnerTermination::Converged;
            break;
        }
    }
    Ok(PhaseResult {
        theta: phi.iter().map(|z| crate::network::wrap_angle(z.arg())).collect(),
        f,
        iterations,
        termination,
        trace,
    })
}
