use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_part, zeros, CMat, CVec, ZERO};
use crate::network::{NetworkState, PrecoderSet};
use crate::wmmse::{receiver_weights, AuxiliarySet};

/// `f(phi) = c^H phi + phi^H c + phi^H Xi phi`. For the phase subproblem,
/// `f(phi) + constant_offset` equals the weighted MSE sum `sum Tr(W E)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub xi: CMat,
    pub c: CVec,
    pub constant_offset: f64,
}

impl QuadraticForm {
    pub fn new(xi: CMat, c: CVec, constant_offset: f64) -> Result<Self> {
        let m = c.len();
        linalg::check_dims("quadratic form Xi", &xi, (m, m))?;
        let scale = xi.norm().max(f64::MIN_POSITIVE);
        if linalg::hermitian_defect(&xi) > 1e-10 * scale {
            return Err(Error::Domain("Xi is not Hermitian".into()));
        }
        Ok(Self {
            xi: hermitian_part(&xi),
            c,
            constant_offset,
        })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            xi: zeros(m, m),
            c: CVec::zeros(m),
            constant_offset: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// `Xi phi + c`
    fn affine(&self, phi: &CVec) -> CVec {
        &self.xi * phi + &self.c
    }

    pub fn value(&self, phi: &CVec) -> f64 {
        let xp = &self.xi * phi;
        phi.dotc(&xp).re + 2.0 * phi.dotc(&self.c).re
    }

    pub fn value_theta(&self, theta: &[f64]) -> f64 {
        self.value(&unit_vector(theta))
    }

    /// Complex gradient `2 Xi phi + 2 c`: real part is the derivative along
    /// `Re phi`, imaginary part along `Im phi`.
    pub fn euclidean_gradient(&self, phi: &CVec) -> CVec {
        self.affine(phi) * num_complex::Complex64::from(2.0)
    }

    /// `2 Re{-j conj(phi) (Xi phi + c)}` with `phi = e^{j theta}`.
    pub fn gradient_theta(&self, theta: &[f64]) -> Vec<f64> {
        let phi = unit_vector(theta);
        let a = self.affine(&phi);
        phi.iter()
            .zip(a.iter())
            .map(|(p, ai)| 2.0 * (num_complex::Complex64::new(0.0, -1.0) * p.conj() * ai).re)
            .collect()
    }
}

pub fn unit_vector(theta: &[f64]) -> CVec {
    CVec::from_iterator(theta.len(), theta.iter().map(|&t| num_complex::Complex64::from_polar(1.0, t)))
}

pub fn euclidean_gradient_phi(qf: &QuadraticForm, phi: &CVec) -> CVec {
    qf.euclidean_gradient(phi)
}

pub fn sca_gradient_theta(qf: &QuadraticForm, theta: &[f64]) -> Vec<f64> {
    qf.gradient_theta(theta)
}

/// Projection onto the tangent space `{z : Re(z conj(phi)) = 0}` of the
/// unit-modulus torus: `eta - Re(conj(eta) phi) phi`.
pub fn riemannian_project(eta: &CVec, phi: &CVec) -> CVec {
    CVec::from_iterator(
        eta.len(),
        eta.iter().zip(phi.iter()).map(|(e, p)| e - p * (e.conj() * p).re),
    )
}

/// Elementwise normalization onto the unit circle.
pub fn retract(phi_bar: &CVec) -> Result<CVec> {
    let mut out = phi_bar.clone();
    for z in out.iter_mut() {
        let r = z.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(Error::Domain("retraction of a zero or non-finite entry".into()));
        }
        *z /= r;
    }
    Ok(out)
}

/// Expands the weighted MSE sum in the reflection vector with every other
/// block fixed.
///
/// With `B_r = sum U^H W U` over links decoded at `r`, `D_r = G_r^H B_r G_r`,
/// `E_t = G_t Q_t G_t^H` and `s_rt` the link power scale:
/// `Xi = sum_{r,t} s_rt D_r o E_t^T`,
/// `c = sum_{r,t} s_rt diag(G_r^H B_r H_rt Q_t G_t^H) - sum_links diag(G_r^H U^H W F^H G_t^H)`.
pub fn build_quadratic_form(
    state: &NetworkState,
    precoders: &PrecoderSet,
    aux: &AuxiliarySet,
) -> Result<QuadraticForm> {
    let ch = state.channels;
    let dims = *state.dims();
    precoders.check_dims(&dims)?;
    let m = dims.ris_elements;
    let b = receiver_weights(&dims, aux);
    let q: Vec<CMat> = dims.tx_nodes().map(|t| precoders.tx_covariance(t, &dims)).collect();

    let d: Vec<CMat> = dims
        .rx_nodes()
        .zip(&b)
        .map(|(rx, br)| {
            let g = ch.ris_rx(rx);
            hermitian_part(&(g.adjoint() * br * g))
        })
        .collect();
    let e: Vec<CMat> = dims
        .tx_nodes()
        .zip(&q)
        .map(|(tx, qt)| {
            let g = ch.ris_tx(tx);
            hermitian_part(&(g * qt * g.adjoint()))
        })
        .collect();

    let mut d_sum = zeros(m, m);
    for x in &d {
        d_sum += x;
    }
    let mut e_sum = zeros(m, m);
    for x in &e {
        e_sum += x;
    }
    let mut xi = linalg::hadamard(&d_sum, &e_sum.transpose());

    let mut c = CVec::zeros(m);
    let mut offset = 0.0;
    for (ri, rx) in dims.rx_nodes().enumerate() {
        let g_rx_h_b = ch.ris_rx(rx).adjoint() * &b[ri];
        let noise = ch.noise(rx);
        offset += noise * linalg::trace(&b[ri]).re;
        for (ti, tx) in dims.tx_nodes().enumerate() {
            let s = ch.link_scale(rx, tx);
            if s != 1.0 {
                xi += linalg::hadamard(&d[ri], &e[ti].transpose()).scale(s - 1.0);
            }
            let h = ch.direct(rx, tx);
            let hy = h * (&q[ti] * ch.ris_tx(tx).adjoint());
            for k in 0..m {
                let mut acc = ZERO;
                for i in 0..g_rx_h_b.ncols() {
                    acc += g_rx_h_b[(k, i)] * hy[(i, k)];
                }
                c[k] += acc * s;
            }
            offset += s * linalg::trace(&(&b[ri] * h * &q[ti] * h.adjoint())).re;
        }
    }
    for user in dims.users() {
        let rx = user.rx_node(&dims);
        let tx = user.tx_node(&dims);
        let a = aux.get(user, &dims);
        let f = precoders.get(user, &dims);
        // conj of diag(G_t F W U G_r)
        let left = ch.ris_tx(tx) * f * &a.w * &a.u;
        let g_r = ch.ris_rx(rx);
        for k in 0..m {
            let mut acc = ZERO;
            for i in 0..left.ncols() {
                acc += left[(k, i)] * g_r[(i, k)];
            }
            c[k] -= acc.conj();
        }
        offset += -2.0 * linalg::trace(&(&a.w * &a.u * ch.direct(rx, tx) * f)).re + linalg::trace(&a.w).re;
    }
    QuadraticForm::new(hermitian_part(&xi), c, offset)
}
