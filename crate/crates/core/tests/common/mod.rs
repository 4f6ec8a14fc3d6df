//! Shared fixtures and brute-force oracles for the integration tests. Every
//! oracle here is written directly from the system model, without the
//! library's covariance, WMMSE or quadratic-form code.

#![allow(dead_code)]

use fdris_core::geometry::{ChannelSet, NetworkDims};
use fdris_core::linalg::{complex_gaussian, CMat};
use fdris_core::network::{PhaseState, PrecoderSet};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub fn dims(cells: usize, users: usize, m: usize, antennas: usize, streams: usize) -> NetworkDims {
    NetworkDims {
        num_cells: cells,
        users_dl: users,
        users_ul: users,
        bs_tx: antennas,
        bs_rx: antennas,
        ue_tx: antennas,
        ue_rx: antennas,
        ris_elements: m,
        streams_dl: streams,
        streams_ul: streams,
    }
}

/// Every channel i.i.d. `CN(0, 1)`, unit noise and the given SIC level, so
/// that direct, reflected and SI terms all have comparable weight.
pub fn random_channels(d: NetworkDims, sic_db: f64, rng: &mut impl Rng) -> ChannelSet {
    let mut ch = ChannelSet::zeros(d, 1.0);
    ch.sic_db = sic_db;
    let fill = |m: &mut CMat, rng: &mut dyn rand::RngCore| {
        let (r, c) = m.shape();
        *m = complex_gaussian(rng, r, c);
    };
    for row in ch
        .bs_to_bs
        .iter_mut()
        .chain(ch.bs_to_dl.iter_mut())
        .chain(ch.ul_to_bs.iter_mut())
        .chain(ch.ul_to_dl.iter_mut())
    {
        for m in row.iter_mut() {
            fill(m, rng);
        }
    }
    for m in ch
        .ris_to_bs
        .iter_mut()
        .chain(ch.ris_to_dl.iter_mut())
        .chain(ch.bs_to_ris.iter_mut())
        .chain(ch.ul_to_ris.iter_mut())
    {
        fill(m, rng);
    }
    ch
}

pub fn random_precoders(d: &NetworkDims, scale: f64, rng: &mut impl Rng) -> PrecoderSet {
    PrecoderSet {
        dl: (0..d.total_dl())
            .map(|_| complex_gaussian(rng, d.bs_tx, d.streams_dl).scale(scale))
            .collect(),
        ul: (0..d.total_ul())
            .map(|_| complex_gaussian(rng, d.ue_tx, d.streams_ul).scale(scale))
            .collect(),
    }
}

pub fn random_phase(m: usize, rng: &mut impl Rng) -> PhaseState {
    PhaseState::from_angles((0..m).map(|_| rng.random::<f64>() * std::f64::consts::TAU).collect())
}

/// A transmitted stream group: who sends it and with which precoder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sender {
    Bs(usize, usize),
    Ul(usize),
}

/// A decoded link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Link {
    Dl(usize),
    Ul(usize),
}

pub fn links(d: &NetworkDims) -> Vec<Link> {
    (0..d.total_ul()).map(Link::Ul).chain((0..d.total_dl()).map(Link::Dl)).collect()
}

pub fn senders(d: &NetworkDims) -> Vec<Sender> {
    let mut s: Vec<Sender> = (0..d.total_dl()).map(|g| Sender::Bs(g / d.users_dl, g)).collect();
    s.extend((0..d.total_ul()).map(Sender::Ul));
    s
}

fn phi_matrix(p: &PhaseState) -> CMat {
    let m = p.len();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        out[(i, i)] = Complex64::from_polar(1.0, p.theta()[i]);
    }
    out
}

/// `(direct, reflected-rx, reflected-tx, power scale)` of the path from
/// `sender` to the receiver of `link`, read straight from the fields.
pub fn path(ch: &ChannelSet, link: Link, sender: Sender) -> (&CMat, &CMat, &CMat, f64) {
    let d = &ch.dims;
    let rho_inv = 10f64.powf(-ch.sic_db / 10.0);
    match (link, sender) {
        (Link::Ul(k), Sender::Bs(j, _)) => {
            let l = k / d.users_ul;
            let s = if l == j { rho_inv } else { 1.0 };
            (&ch.bs_to_bs[l][j], &ch.ris_to_bs[l], &ch.bs_to_ris[j], s)
        }
        (Link::Ul(k), Sender::Ul(i)) => {
            let l = k / d.users_ul;
            (&ch.ul_to_bs[l][i], &ch.ris_to_bs[l], &ch.ul_to_ris[i], 1.0)
        }
        (Link::Dl(k), Sender::Bs(j, _)) => (&ch.bs_to_dl[k][j], &ch.ris_to_dl[k], &ch.bs_to_ris[j], 1.0),
        (Link::Dl(k), Sender::Ul(i)) => (&ch.ul_to_dl[k][i], &ch.ris_to_dl[k], &ch.ul_to_ris[i], 1.0),
    }
}

pub fn own_sender(d: &NetworkDims, link: Link) -> Sender {
    match link {
        Link::Ul(k) => Sender::Ul(k),
        Link::Dl(k) => Sender::Bs(k / d.users_dl, k),
    }
}

pub fn precoder(f: &PrecoderSet, s: Sender) -> &CMat {
    match s {
        Sender::Bs(_, g) => &f.dl[g],
        Sender::Ul(g) => &f.ul[g],
    }
}

pub fn noise(ch: &ChannelSet, link: Link) -> f64 {
    match link {
        Link::Ul(_) => ch.noise_bs,
        Link::Dl(_) => ch.noise_ue,
    }
}

pub fn equivalent(ch: &ChannelSet, p: &PhaseState, link: Link, s: Sender) -> (CMat, f64) {
    let (h, gr, gt, scale) = path(ch, link, s);
    (h + gr * phi_matrix(p) * gt, scale)
}

/// Interference-plus-noise covariance of `link`: every other stream, scaled.
pub fn oracle_interference(ch: &ChannelSet, f: &PrecoderSet, p: &PhaseState, link: Link) -> CMat {
    let d = &ch.dims;
    let own = own_sender(d, link);
    let n = match link {
        Link::Ul(_) => d.bs_rx,
        Link::Dl(_) => d.ue_rx,
    };
    let mut v = CMat::identity(n, n).scale(noise(ch, link));
    for s in senders(d) {
        if s == own {
            continue;
        }
        let (h, scale) = equivalent(ch, p, link, s);
        let x = h * precoder(f, s);
        v += (&x * x.adjoint()).scale(scale);
    }
    v
}

/// `log2 det(I + (HF)^H V^{-1} HF)` through eigenvalues of the whitened
/// signal term.
pub fn oracle_rate(ch: &ChannelSet, f: &PrecoderSet, p: &PhaseState, link: Link) -> f64 {
    let v = oracle_interference(ch, f, p, link);
    let (h, _) = equivalent(ch, p, link, own_sender(&ch.dims, link));
    let x = h * precoder(f, own_sender(&ch.dims, link));
    let vinv = v.try_inverse().expect("covariance invertible");
    let m = x.adjoint() * vinv * &x;
    let herm = (&m + m.adjoint()).scale(0.5);
    herm.symmetric_eigen().eigenvalues.iter().map(|l| (1.0 + l.max(0.0)).log2()).sum()
}

/// `Tr(W E)` with `E` expanded from its definition for the given decoder.
pub fn oracle_weighted_mse(ch: &ChannelSet, f: &PrecoderSet, p: &PhaseState, link: Link, u: &CMat, w: &CMat) -> f64 {
    let v = oracle_interference(ch, f, p, link);
    let own = own_sender(&ch.dims, link);
    let (h, _) = equivalent(ch, p, link, own);
    let b = u.nrows();
    let dlt = u * h * precoder(f, own) - CMat::identity(b, b);
    let e = &dlt * dlt.adjoint() + u * v * u.adjoint();
    (w * e).trace().re
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
