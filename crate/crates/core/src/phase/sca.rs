use super::quadratic::QuadraticForm;
use super::{relative_change, InnerConfig, InnerTermination, PhaseResult, TracePoint};
use crate::error::Result;
use crate::network::wrap_angle;

/// Largest curvature growth tried before giving up on a step.
const MAX_BETA_GROWTH: f64 = 1e12;
const MAX_BETA_HALVINGS: usize = 60;

/// Minimizes `f(e^{j theta})` by successive quadratic majorization:
/// `theta <- theta - grad / beta`, accepting `beta` once
/// `f(next) <= f - ||grad||^2 / (2 beta)`. `beta` starts from its last
/// accepted value, is halved while the test keeps passing and doubled while
/// it fails.
pub fn sca_minimize(qf: &QuadraticForm, theta0: &[f64], cfg: &InnerConfig) -> Result<PhaseResult> {
    cfg.line_search.validate()?;
    let mut theta: Vec<f64> = theta0.iter().map(|&t| wrap_angle(t)).collect();
    let mut f = qf.value_theta(&theta);
    let mut trace = vec![TracePoint {
        iteration: 0,
        f,
        step: 0.0,
    }];
    let mut beta = 1.0 / cfg.line_search.initial_step;
    let mut termination = InnerTermination::MaxIterations;
    let mut iterations = 0;

    let trial = |theta: &[f64], g: &[f64], beta: f64| -> Vec<f64> {
        theta.iter().zip(g).map(|(t, gi)| wrap_angle(t - gi / beta)).collect()
    };

    for t in 1..=cfg.max_iter {
        let g = qf.gradient_theta(&theta);
        let g2: f64 = g.iter().map(|x| x * x).sum();
        if g2 == 0.0 {
            termination = InnerTermination::ZeroGradient;
            break;
        }
        let passes = |beta: f64| {
            let cand = trial(&theta, &g, beta);
            let fc = qf.value_theta(&cand);
            (fc <= f - g2 / (2.0 * beta), cand, fc)
        };
        let mut accepted = None;
        let (ok, cand, fc) = passes(beta);
        if ok {
            accepted = Some((cand, fc, beta));
            for _ in 0..MAX_BETA_HALVINGS {
                let b = beta * 0.5;
                let (ok, cand, fc) = passes(b);
                if !ok {
                    break;
                }
                beta = b;
                accepted = Some((cand, fc, beta));
            }
        } else {
            let start = beta;
            while beta < start * MAX_BETA_GROWTH {
                beta *= 2.0;
                let (ok, cand, fc) = passes(beta);
                if ok {
                    accepted = Some((cand, fc, beta));
                    break;
                }
            }
        }
        let Some((cand, fc, b)) = accepted else {
            termination = InnerTermination::Stalled;
            break;
        };
        beta = b;
        let rel = relative_change(f, fc);
        theta = cand;
        f = fc;
        iterations = t;
        trace.push(TracePoint {
            iteration: t,
            f,
            step: 1.0 / beta,
        });
        if rel <= cfg.tol {
            termination = InnerTermination::Converged;
            break;
        }
    }
    Ok(PhaseResult {
        theta,
        f,
        iterations,
        termination,
        trace,
    })
}
