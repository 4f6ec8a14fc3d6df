//! WMMSE reformulation: MMSE decoders, MSE weights and the closed-form
//! Lagrangian precoder update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Direction, NetworkDims, RxNode, TxNode, UserId};
use crate::linalg::{self, hermitian_part, identity, zeros, CMat};
use crate::network::{rx_index, NetworkState, PowerBudget, PrecoderSet};

/// MMSE decoder `U` and MSE weight `W` of one link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Auxiliary {
    pub u: CMat,
    pub w: CMat,
}

/// Auxiliary variables of every user, by global index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliarySet {
    pub ul: Vec<Auxiliary>,
    pub dl: Vec<Auxiliary>,
}

impl AuxiliarySet {
    pub fn get(&self, user: UserId, dims: &NetworkDims) -> &Auxiliary {
        let g = user.global(dims);
        match user.direction {
            Direction::Uplink => &self.ul[g],
            Direction::Downlink => &self.dl[g],
        }
    }
}

/// `U = F^H H^H (H F F^H H^H + V)^{-1}`
pub fn mmse_decoder(h: &CMat, f: &CMat, v: &CMat) -> Result<CMat> {
    let hf = h * f;
    let r = hermitian_part(&(&hf * hf.adjoint() + v));
    Ok(linalg::solve_hpd(&r, &hf, "received covariance")?.adjoint())
}

/// `E = (U H F - I)(U H F - I)^H + U V U^H`
pub fn mse_matrix(u: &CMat, h: &CMat, f: &CMat, v: &CMat) -> CMat {
    let b = u.nrows();
    let d = u * h * f - identity(b);
    hermitian_part(&(&d * d.adjoint() + u * v * u.adjoint()))
}

/// `W = E^{-1}`, symmetrized.
pub fn weight_update(e: &CMat) -> Result<CMat> {
    Ok(hermitian_part(&linalg::inverse_hpd(e, "MSE matrix")?))
}

/// `log2 det W - (Tr(W E) - b) log2 e`; equals the link rate when `U` and `W`
/// are optimal for the current precoders.
pub fn surrogate_rate(w: &CMat, e: &CMat) -> Result<f64> {
    let b = w.nrows() as f64;
    let twe = linalg::trace(&(w * e)).re;
    Ok(linalg::log2_det_hpd(w, "MSE weight")? - (twe - b) * std::f64::consts::LOG2_E)
}

/// Optimal `U` and `W` of every link for fixed precoders and phases.
pub fn update_auxiliaries(state: &NetworkState, precoders: &PrecoderSet) -> Result<AuxiliarySet> {
    let dims = *state.dims();
    let mut ul = Vec::with_capacity(dims.total_ul());
    let mut dl = Vec::with_capacity(dims.total_dl());
    for user in dims.users() {
        let v = state.interference_covariance(user, precoders)?;
        let h = state.effective.of_user(user);
        let f = precoders.get(user, &dims);
        let u = mmse_decoder(h, f, &v)?;
        let e = mse_matrix(&u, h, f, &v);
        let w = weight_update(&e)?;
        let aux = Auxiliary { u, w };
        match user.direction {
            Direction::Uplink => ul.push(aux),
            Direction::Downlink => dl.push(aux),
        }
    }
    Ok(AuxiliarySet { ul, dl })
}

fn link_mse(state: &NetworkState, precoders: &PrecoderSet, aux: &AuxiliarySet, user: UserId) -> Result<(CMat, CMat)> {
    let dims = state.dims();
    let v = state.interference_covariance(user, precoders)?;
    let a = aux.get(user, dims);
    let e = mse_matrix(&a.u, state.effective.of_user(user), precoders.get(user, dims), &v);
    Ok((a.w.clone(), e))
}

/// `sum Tr(W E)` over all links: the quantity minimized by the precoder and
/// phase blocks.
pub fn weighted_mse_sum(state: &NetworkState, precoders: &PrecoderSet, aux: &AuxiliarySet) -> Result<f64> {
    let mut total = 0.0;
    for user in state.dims().users() {
        let (w, e) = link_mse(state, precoders, aux, user)?;
        total += linalg::trace(&(w * e)).re;
    }
    Ok(total)
}

/// Sum of `surrogate_rate` over all links; a lower bound on the sum rate.
pub fn surrogate_sum_rate(state: &NetworkState, precoders: &PrecoderSet, aux: &AuxiliarySet) -> Result<f64> {
    let mut total = 0.0;
    for user in state.dims().users() {
        let (w, e) = link_mse(state, precoders, aux, user)?;
        total += surrogate_rate(&w, &e)?;
    }
    Ok(total)
}

/// `B_r = sum_{links decoded at r} U^H W U`, indexed like `dims.rx_nodes()`.
pub fn receiver_weights(dims: &NetworkDims, aux: &AuxiliarySet) -> Vec<CMat> {
    let mut b: Vec<CMat> = dims
        .rx_nodes()
        .map(|rx| zeros(dims.rx_antennas(rx), dims.rx_antennas(rx)))
        .collect();
    for user in dims.users() {
        let a = aux.get(user, dims);
        b[rx_index(dims, user.rx_node(dims))] += a.u.adjoint() * &a.w * &a.u;
    }
    b.into_iter().map(|m| hermitian_part(&m)).collect()
}

/// Users whose precoders are transmitted by `tx`.
pub fn users_of(dims: &NetworkDims, tx: TxNode) -> Vec<UserId> {
    match tx {
        TxNode::Bs(l) => (0..dims.users_dl).map(|k| UserId::downlink(l, k)).collect(),
        TxNode::Ul(g) => vec![UserId::uplink(dims.ul_cell(g), g % dims.users_ul)],
    }
}

/// Per-transmitter precoder subproblem
/// `min sum_s Tr(F_s^H A F_s) - 2 Re Tr(W_s U_s H_s F_s)` s.t. `sum_s ||F_s||^2 <= P`,
/// held in the eigenbasis of `A`.
#[derive(Debug, Clone)]
pub struct PrecoderSubproblem {
    pub a: CMat,
    eigvals: Vec<f64>,
    eigvecs: CMat,
    /// `Q^H H_s^H U_s^H W_s` per user.
    rotated: Vec<CMat>,
    /// `Z_ii = sum_s ||row i of rotated_s||^2`
    z: Vec<f64>,
    pub users: Vec<UserId>,
}

const NULL_EIG_REL: f64 = 1e-10;
const NULL_PROJ_REL: f64 = 1e-10;

impl PrecoderSubproblem {
    pub fn build(state: &NetworkState, aux: &AuxiliarySet, tx: TxNode) -> Result<Self> {
        let dims = *state.dims();
        let b = receiver_weights(&dims, aux);
        Self::build_with_weights(state, aux, &b, tx)
    }

    pub fn build_with_weights(state: &NetworkState, aux: &AuxiliarySet, b: &[CMat], tx: TxNode) -> Result<Self> {
        let dims = *state.dims();
        let n = dims.tx_antennas(tx);
        let mut a = zeros(n, n);
        for rx in dims.rx_nodes() {
            let h = state.effective.get(rx, tx);
            let s = state.channels.link_scale(rx, tx);
            a += (h.adjoint() * &b[rx_index(&dims, rx)] * h).scale(s);
        }
        Self::from_parts(hermitian_part(&a), state, aux, tx)
    }

    fn from_parts(a: CMat, state: &NetworkState, aux: &AuxiliarySet, tx: TxNode) -> Result<Self> {
        let dims = *state.dims();
        let users = users_of(&dims, tx);
        let (vals, vecs) = linalg::eigh(&a);
        let eigvals: Vec<f64> = vals.iter().map(|&x| x.max(0.0)).collect();
        let qh = vecs.adjoint();
        let mut rotated = Vec::with_capacity(users.len());
        let mut z = vec![0.0; eigvals.len()];
        for &user in &users {
            let h = state.effective.of_user(user);
            let ax = aux.get(user, &dims);
            let y = &qh * (h.adjoint() * ax.u.adjoint() * &ax.w);
            for (i, zi) in z.iter_mut().enumerate() {
                *zi += y.row(i).norm_squared();
            }
            rotated.push(y);
        }
        Ok(Self {
            a,
            eigvals,
            eigvecs: vecs,
            rotated,
            z,
            users,
        })
    }

    fn null_mask(&self) -> Vec<bool> {
        let max = self.eigvals.iter().cloned().fold(0.0, f64::max);
        self.eigvals.iter().map(|&l| l <= NULL_EIG_REL * max).collect()
    }

    /// `sum_s ||F_s(lambda)||^2 = sum_i Z_ii / (Lambda_i + lambda)^2`; at
    /// `lambda = 0` null directions use the pseudo-inverse, and any non-negligible
    /// projection onto them makes the power infinite.
    pub fn power(&self, lambda: f64) -> f64 {
        let ztot: f64 = self.z.iter().sum();
        if lambda > 0.0 {
            return self.eigvals.iter().zip(&self.z).map(|(l, z)| z / (l + lambda).powi(2)).sum();
        }
        let null = self.null_mask();
        let mut p = 0.0;
        for ((l, z), is_null) in self.eigvals.iter().zip(&self.z).zip(null) {
            if is_null {
                if *z > NULL_PROJ_REL * ztot {
                    return f64::INFINITY;
                }
            } else {
                p += z / (l * l);
            }
        }
        p
    }

    pub fn total_projection(&self) -> f64 {
        self.z.iter().sum()
    }

    /// `F_s(lambda) = (A + lambda I)^{-1} H_s^H U_s^H W_s` for every user.
    pub fn precoders(&self, lambda: f64) -> Vec<CMat> {
        let null = self.null_mask();
        let inv: Vec<f64> = self
            .eigvals
            .iter()
            .zip(null)
            .map(|(&l, is_null)| {
                if lambda > 0.0 {
                    1.0 / (l + lambda)
                } else if is_null {
                    0.0
                } else {
                    1.0 / l
                }
            })
            .collect();
        self.rotated
            .iter()
            .map(|y| {
                let mut scaled = y.clone();
                for (mut row, s) in scaled.row_iter_mut().zip(&inv) {
                    row *= num_complex::Complex64::from(*s);
                }
                &self.eigvecs * scaled
            })
            .collect()
    }
}

/// Stopping rule of the multiplier search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    /// Accept once `|p(lambda) - P| <= power_rel_tol * P`.
    pub power_rel_tol: f64,
    /// Accept once the bracket is narrower than `width_rel_tol * upper`.
    pub width_rel_tol: f64,
    pub max_iter: usize,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            power_rel_tol: 1e-12,
            width_rel_tol: 1e-15,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSolve {
    pub lambda: f64,
    pub power: f64,
    pub iterations: usize,
    /// False only when `max_iter` was reached first.
    pub converged: bool,
}

/// Smallest `lambda >= 0` with `power(lambda) <= budget`, for `power`
/// non-increasing. `upper_hint` seeds the bracket and is doubled until feasible.
/// The returned multiplier is always feasible.
pub fn bisection_solve(
    power: impl Fn(f64) -> f64,
    budget: f64,
    upper_hint: f64,
    cfg: &BisectionConfig,
) -> Result<MultiplierSolve> {
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::Domain(format!("power budget must be positive, got {budget}")));
    }
    let p0 = power(0.0);
    if p0 <= budget {
        return Ok(MultiplierSolve {
            lambda: 0.0,
            power: p0,
            iterations: 0,
            converged: true,
        });
    }
    let mut hi = if upper_hint > 0.0 && upper_hint.is_finite() {
        upper_hint
    } else {
        1.0
    };
    let mut p_hi = power(hi);
    let mut doublings = 0;
    while p_hi > budget {
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::Bracket {
                power_at_upper: p_hi,
                budget,
            });
        }
        hi *= 2.0;
        p_hi = power(hi);
    }
    let mut lo = 0.0;
    for it in 1..=cfg.max_iter {
        if (p_hi - budget).abs() <= cfg.power_rel_tol * budget || hi - lo <= cfg.width_rel_tol * hi {
            return Ok(MultiplierSolve {
                lambda: hi,
                power: p_hi,
                iterations: it - 1,
                converged: true,
            });
        }
        let mid = 0.5 * (lo + hi);
        let p = power(mid);
        if p > budget {
            lo = mid;
        } else {
            hi = mid;
            p_hi = p;
        }
    }
    Ok(MultiplierSolve {
        lambda: hi,
        power: p_hi,
        iterations: cfg.max_iter,
        converged: false,
    })
}

/// Solves the subproblem of one transmitter: returns its new precoders and
/// the multiplier found.
pub fn solve_subproblem(
    sub: &PrecoderSubproblem,
    budget: f64,
    cfg: &BisectionConfig,
) -> Result<(Vec<CMat>, MultiplierSolve)> {
    // power(lambda) <= sum Z / lambda^2, so this bound is feasible
    let hint = (sub.total_projection() / budget).sqrt();
    let m = bisection_solve(|l| sub.power(l), budget, hint, cfg)?;
    Ok((sub.precoders(m.lambda), m))
}

/// Statistics of one precoder block update.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrecoderUpdateStats {
    /// Multiplier per transmitter, ordered like `dims.tx_nodes()`.
    pub multipliers: Vec<f64>,
    pub bisection_iters: usize,
    pub unconverged: usize,
}

/// Replaces every precoder by the minimizer of `sum Tr(W E)` with `U`, `W`
/// and the phases held fixed.
pub fn update_precoders(
    state: &NetworkState,
    aux: &AuxiliarySet,
    budget: &PowerBudget,
    cfg: &BisectionConfig,
) -> Result<(PrecoderSet, PrecoderUpdateStats)> {
    let dims = *state.dims();
    let b = receiver_weights(&dims, aux);
    let mut out = PrecoderSet::zeros(&dims);
    let mut stats = PrecoderUpdateStats::default();
    for tx in dims.tx_nodes() {
        let sub = PrecoderSubproblem::build_with_weights(state, aux, &b, tx)?;
        let (fs, m) = solve_subproblem(&sub, budget.of(tx), cfg)?;
        for (user, f) in sub.users.iter().zip(fs) {
            let g = user.global(&dims);
            match user.direction {
                Direction::Uplink => out.ul[g] = f,
                Direction::Downlink => out.dl[g] = f,
            }
        }
        stats.multipliers.push(m.lambda);
        stats.bisection_iters += m.iterations;
        if !m.converged {
            stats.unconverged += 1;
        }
    }
    Ok((out, stats))
}

/// Receiver node `r` as seen from its index in `dims.rx_nodes()`.
pub fn rx_node_at(dims: &NetworkDims, i: usize) -> RxNode {
    if i < dims.num_cells {
        RxNode::Bs(i)
    } else {
        RxNode::Dl(i - dims.num_cells)
    }
}
