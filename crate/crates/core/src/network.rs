//! Optimization variables and evaluation of equivalent channels,
//! interference-plus-noise covariances and achievable rates.

use serde::{Deserialize, Serialize};

use crate::geometry::{ChannelSet, Direction, NetworkDims, RxNode, TxNode, UserId};
use crate::linalg::{self, check_dims, hermitian_part, identity, zeros, CMat, CVec};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// RIS configuration: phases `theta` in `[0, 2pi)` and `phi = e^{j theta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PhaseAngles", into = "PhaseAngles")]
pub struct PhaseState {
    theta: Vec<f64>,
    phi: CVec,
}

#[derive(Serialize, Deserialize)]
struct PhaseAngles {
    theta: Vec<f64>,
}

impl From<PhaseAngles> for PhaseState {
    fn from(a: PhaseAngles) -> Self {
        PhaseState::from_angles(a.theta)
    }
}

impl From<PhaseState> for PhaseAngles {
    fn from(p: PhaseState) -> Self {
        PhaseAngles { theta: p.theta }
    }
}

pub(crate) fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(std::f64::consts::TAU);
    // rem_euclid can round up to exactly 2pi for tiny negative inputs
    if w >= std::f64::consts::TAU {
        0.0
    } else {
        w
    }
}

impl PhaseState {
    pub fn from_angles(theta: Vec<f64>) -> Self {
        let theta: Vec<f64> = theta.into_iter().map(wrap_angle).collect();
        let phi = CVec::from_iterator(theta.len(), theta.iter().map(|&t| Complex64::from_polar(1.0, t)));
        Self { theta, phi }
    }

    /// Builds the state from arbitrary nonzero complex entries, keeping only
    /// their arguments.
    pub fn from_unit_vector(phi: &CVec) -> Self {
        Self::from_angles(phi.iter().map(|z| z.arg()).collect())
    }

    pub fn zeros(m: usize) -> Self {
        Self::from_angles(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &CVec {
        &self.phi
    }

    /// `Phi = diag(phi)`
    pub fn matrix(&self) -> CMat {
        linalg::diag(&self.phi)
    }
}

/// Transmit precoders of every DL and UL user, by global user index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecoderSet {
    /// `F_{k_l^d}`, `bs_tx x streams_dl`.
    pub dl: Vec<CMat>,
    /// `F_{k_l^u}`, `ue_tx x streams_ul`.
    pub ul: Vec<CMat>,
}

impl PrecoderSet {
    pub fn zeros(dims: &NetworkDims) -> Self {
        Self {
            dl: vec![zeros(dims.bs_tx, dims.streams_dl); dims.total_dl()],
            ul: vec![zeros(dims.ue_tx, dims.streams_ul); dims.total_ul()],
        }
    }

    pub fn get(&self, user: UserId, dims: &NetworkDims) -> &CMat {
        let g = user.global(dims);
        match user.direction {
            Direction::Uplink => &self.ul[g],
            Direction::Downlink => &self.dl[g],
        }
    }

    /// `sum_k Tr(F_{k_l^d} F_{k_l^d}^H)` for cell `l`.
    pub fn bs_power(&self, cell: usize, dims: &NetworkDims) -> f64 {
        let k = dims.users_dl;
        self.dl[cell * k..(cell + 1) * k].iter().map(linalg::power).sum()
    }

    pub fn ul_power(&self, g: usize) -> f64 {
        linalg::power(&self.ul[g])
    }

    /// Transmit covariance `Q` of a node.
    pub fn tx_covariance(&self, tx: TxNode, dims: &NetworkDims) -> CMat {
        match tx {
            TxNode::Bs(l) => {
                let mut q = zeros(dims.bs_tx, dims.bs_tx);
                for f in &self.dl[l * dims.users_dl..(l + 1) * dims.users_dl] {
                    q += f * f.adjoint();
                }
                q
            }
            TxNode::Ul(g) => &self.ul[g] * self.ul[g].adjoint(),
        }
    }

    /// Largest relative violation of the power budgets (0 when feasible).
    pub fn max_power_violation(&self, dims: &NetworkDims, power_bs: f64, power_ue: f64) -> f64 {
        let bs = (0..dims.num_cells).map(|l| (self.bs_power(l, dims) - power_bs) / power_bs);
        let ul = (0..dims.total_ul()).map(|g| (self.ul_power(g) - power_ue) / power_ue);
        bs.chain(ul).fold(0.0_f64, f64::max)
    }

    pub fn check_dims(&self, dims: &NetworkDims) -> Result<()> {
        if self.dl.len() != dims.total_dl() || self.ul.len() != dims.total_ul() {
            return Err(Error::InvalidConfig("precoder count does not match network".into()));
        }
        for f in &self.dl {
            check_dims("DL precoder", f, (dims.bs_tx, dims.streams_dl))?;
        }
        for f in &self.ul {
            check_dims("UL precoder", f, (dims.ue_tx, dims.streams_ul))?;
        }
        Ok(())
    }
}

/// Transmit power budgets in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    pub bs: f64,
    pub ue: f64,
}

impl PowerBudget {
    pub fn of(&self, tx: TxNode) -> f64 {
        match tx {
            TxNode::Bs(_) => self.bs,
            TxNode::Ul(_) => self.ue,
        }
    }
}

/// Per-user and total rates in bit/s/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub ul: Vec<f64>,
    pub dl: Vec<f64>,
    pub ul_total: f64,
    pub dl_total: f64,
    pub sum_rate: f64,
}

impl RateBreakdown {
    pub fn from_parts(ul: Vec<f64>, dl: Vec<f64>) -> Self {
        let ul_total = ul.iter().sum();
        let dl_total = dl.iter().sum();
        Self {
            ul,
            dl,
            ul_total,
            dl_total,
            sum_rate: ul_total + dl_total,
        }
    }

    /// Every rate multiplied by `factor` (pre-log scaling).
    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_parts(
            self.ul.iter().map(|r| r * factor).collect(),
            self.dl.iter().map(|r| r * factor).collect(),
        )
    }
}

/// `direct + g_rx diag(phi) g_tx`
pub fn effective_channel(direct: &CMat, g_rx: &CMat, phase: &PhaseState, g_tx: &CMat) -> Result<CMat> {
    let m = phase.len();
    check_dims("effective_channel g_rx", g_rx, (direct.nrows(), m))?;
    check_dims("effective_channel g_tx", g_tx, (m, direct.ncols()))?;
    let mut scaled = g_tx.clone();
    for (mut row, p) in scaled.row_iter_mut().zip(phase.phi().iter()) {
        row *= *p;
    }
    Ok(direct + g_rx * scaled)
}

/// Equivalent (direct plus reflected) channels between every receiver and
/// transmitter for one phase configuration.
#[derive(Debug, Clone)]
pub struct EffectiveChannels {
    dims: NetworkDims,
    n_tx: usize,
    links: Vec<CMat>,
}

pub(crate) fn tx_index(dims: &NetworkDims, tx: TxNode) -> usize {
    match tx {
        TxNode::Bs(l) => l,
        TxNode::Ul(k) => dims.num_cells + k,
    }
}

pub(crate) fn rx_index(dims: &NetworkDims, rx: RxNode) -> usize {
    match rx {
        RxNode::Bs(l) => l,
        RxNode::Dl(k) => dims.num_cells + k,
    }
}

impl EffectiveChannels {
    pub fn new(channels: &ChannelSet, phase: &PhaseState) -> Result<Self> {
        let dims = channels.dims;
        if phase.len() != dims.ris_elements {
            return Err(Error::DimensionMismatch {
                context: "phase vector",
                expected: (dims.ris_elements, 1),
                found: (phase.len(), 1),
            });
        }
        let n_tx = dims.num_cells + dims.total_ul();
        let phased_tx: Vec<CMat> = dims
            .tx_nodes()
            .map(|tx| {
                let mut g = channels.ris_tx(tx).clone();
                for (mut row, p) in g.row_iter_mut().zip(phase.phi().iter()) {
                    row *= *p;
                }
                g
            })
            .collect();
        let mut links = Vec::with_capacity((dims.num_cells + dims.total_dl()) * n_tx);
        for rx in dims.rx_nodes() {
            let g_rx = channels.ris_rx(rx);
            for tx in dims.tx_nodes() {
                links.push(channels.direct(rx, tx) + g_rx * &phased_tx[tx_index(&dims, tx)]);
            }
        }
        Ok(Self { dims, n_tx, links })
    }

    pub fn get(&self, rx: RxNode, tx: TxNode) -> &CMat {
        &self.links[rx_index(&self.dims, rx) * self.n_tx + tx_index(&self.dims, tx)]
    }

    /// Equivalent channel of a user's own link.
    pub fn of_user(&self, user: UserId) -> &CMat {
        self.get(user.rx_node(&self.dims), user.tx_node(&self.dims))
    }
}

/// Read-only evaluation context: channels plus their equivalent channels at
/// a fixed phase configuration.
#[derive(Debug, Clone)]
pub struct NetworkState<'a> {
    pub channels: &'a ChannelSet,
    pub effective: EffectiveChannels,
}

impl<'a> NetworkState<'a> {
    pub fn new(channels: &'a ChannelSet, phase: &PhaseState) -> Result<Self> {
        Ok(Self {
            channels,
            effective: EffectiveChannels::new(channels, phase)?,
        })
    }

    pub fn dims(&self) -> &NetworkDims {
        &self.channels.dims
    }

    fn check_user(&self, user: UserId) -> Result<()> {
        if user.in_range(self.dims()) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!("{user:?}")))
        }
    }

    /// Interference-plus-noise covariance seen by `user`'s decoder: every
    /// other stream in the network, with SIC scaling on a BS's own DL
    /// transmissions, plus receiver noise.
    pub fn interference_covariance(&self, user: UserId, precoders: &PrecoderSet) -> Result<CMat> {
        self.check_user(user)?;
        let dims = *self.dims();
        let rx = user.rx_node(&dims);
        let n = dims.rx_antennas(rx);
        let mut v = identity(n).scale(self.channels.noise(rx));
        for other in dims.users() {
            if other == user {
                continue;
            }
            let tx = other.tx_node(&dims);
            let h = self.effective.get(rx, tx);
            let hf = h * precoders.get(other, &dims);
            v += (&hf * hf.adjoint()).scale(self.channels.link_scale(rx, tx));
        }
        Ok(hermitian_part(&v))
    }

    /// Total received covariance at `rx` (all streams plus noise).
    pub fn received_covariance(&self, rx: RxNode, precoders: &PrecoderSet) -> CMat {
        let dims = *self.dims();
        let n = dims.rx_antennas(rx);
        let mut r = identity(n).scale(self.channels.noise(rx));
        for tx in dims.tx_nodes() {
            let h = self.effective.get(rx, tx);
            let q = precoders.tx_covariance(tx, &dims);
            r += (h * q * h.adjoint()).scale(self.channels.link_scale(rx, tx));
        }
        hermitian_part(&r)
    }

    /// `log2 det(I + H F F^H H^H V^{-1})`, computed as
    /// `log2 det(V + H F F^H H^H) - log2 det V`.
    pub fn user_rate(&self, user: UserId, precoders: &PrecoderSet) -> Result<f64> {
        let v = self.interference_covariance(user, precoders)?;
        let hf = self.effective.of_user(user) * precoders.get(user, self.dims());
        rate_from_covariance(&hf, &v)
    }

    pub fn sum_rate(&self, precoders: &PrecoderSet) -> Result<RateBreakdown> {
        let dims = *self.dims();
        let mut ul = Vec::with_capacity(dims.total_ul());
        let mut dl = Vec::with_capacity(dims.total_dl());
        for user in dims.users() {
            let r = self.user_rate(user, precoders)?;
            match user.direction {
                Direction::Uplink => ul.push(r),
                Direction::Downlink => dl.push(r),
            }
        }
        Ok(RateBreakdown::from_parts(ul, dl))
    }
}

/// Rate of a link with effective signal matrix `hf = H F` against
/// interference-plus-noise covariance `v`.
pub fn rate_from_covariance(hf: &CMat, v: &CMat) -> Result<f64> {
    let signal = hf * hf.adjoint();
    let total = linalg::log2_det_hpd(&(v + signal), "signal-plus-interference covariance")?;
    let base = linalg::log2_det_hpd(v, "interference covariance")?;
    Ok((total - base).max(0.0))
}

fn user_in(channels: &ChannelSet, user: UserId) -> Result<()> {
    if user.in_range(&channels.dims) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange(format!("{user:?}")))
    }
}

/// Interference-plus-noise covariance at BS `l` for its `k`-th UL user.
pub fn ul_interference_covariance(
    l: usize,
    k: usize,
    channels: &ChannelSet,
    precoders: &PrecoderSet,
    phase: &PhaseState,
) -> Result<CMat> {
    let user = UserId::uplink(l, k);
    user_in(channels, user)?;
    NetworkState::new(channels, phase)?.interference_covariance(user, precoders)
}

/// Interference-plus-noise covariance at the `k`-th DL user of cell `l`.
pub fn dl_interference_covariance(
    l: usize,
    k: usize,
    channels: &ChannelSet,
    precoders: &PrecoderSet,
    phase: &PhaseState,
) -> Result<CMat> {
    let user = UserId::downlink(l, k);
    user_in(channels, user)?;
    NetworkState::new(channels, phase)?.interference_covariance(user, precoders)
}

pub fn user_rate(
    user: UserId,
    channels: &ChannelSet,
    precoders: &PrecoderSet,
    phase: &PhaseState,
) -> Result<f64> {
    user_in(channels, user)?;
    NetworkState::new(channels, phase)?.user_rate(user, precoders)
}

pub fn sum_rate(channels: &ChannelSet, precoders: &PrecoderSet, phase: &PhaseState) -> Result<RateBreakdown> {
    NetworkState::new(channels, phase)?.sum_rate(precoders)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_realization, ScenarioConfig};
    use crate::linalg::complex_gaussian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_dims() -> NetworkDims {
        NetworkDims {
            num_cells: 2,
            users_dl: 1,
            users_ul: 1,
            bs_tx: 2,
            bs_rx: 2,
            ue_tx: 2,
            ue_rx: 2,
            ris_elements: 3,
            streams_dl: 1,
            streams_ul: 1,
        }
    }

    fn random_precoders(dims: &NetworkDims, rng: &mut ChaCha8Rng) -> PrecoderSet {
        PrecoderSet {
            dl: (0..dims.total_dl()).map(|_| complex_gaussian(rng, dims.bs_tx, dims.streams_dl)).collect(),
            ul: (0..dims.total_ul()).map(|_| complex_gaussian(rng, dims.ue_tx, dims.streams_ul)).collect(),
        }
    }

    fn random_phase(m: usize, rng: &mut ChaCha8Rng) -> PhaseState {
        PhaseState::from_angles((0..m).map(|_| rng.random::<f64>() * 7.0).collect())
    }

    #[test]
    fn phase_state_is_unit_modulus_and_wrapped() {
        let p = PhaseState::from_angles(vec![-0.5, 7.0, 0.0, -1e-18]);
        assert!(p.phi().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!(p.theta().iter().all(|&t| (0.0..std::f64::consts::TAU).contains(&t)));
    }

    #[test]
    fn effective_channel_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let direct = complex_gaussian(&mut rng, 2, 2);
        let g_tx = complex_gaussian(&mut rng, 3, 2);
        let zero_rx = zeros(2, 3);
        let p = random_phase(3, &mut rng);
        assert_eq!(effective_channel(&direct, &zero_rx, &p, &g_tx).unwrap(), direct);

        let g_rx = complex_gaussian(&mut rng, 2, 3);
        let id = effective_channel(&direct, &g_rx, &PhaseState::zeros(3), &g_tx).unwrap();
        assert!((id - (&direct + &g_rx * &g_tx)).norm() < 1e-13);

        // elementwise expansion
        let h = effective_channel(&direct, &g_rx, &p, &g_tx).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let mut expect = direct[(r, c)];
                for m in 0..3 {
                    expect += g_rx[(r, m)] * p.phi()[m] * g_tx[(m, c)];
                }
                assert!((h[(r, c)] - expect).norm() < 1e-13);
            }
        }
        assert!(effective_channel(&direct, &g_rx, &PhaseState::zeros(4), &g_tx).is_err());
    }

    #[test]
    fn zero_precoders_leave_only_noise() {
        let ch = ChannelSet::zeros(small_dims(), 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ch = ch;
        ch.bs_to_bs[0][1] = complex_gaussian(&mut rng, 2, 2);
        let f = PrecoderSet::zeros(&ch.dims);
        let v = ul_interference_covariance(0, 0, &ch, &f, &PhaseState::zeros(3)).unwrap();
        assert!((v - identity(2).scale(0.3)).norm() < 1e-15);
        let v = dl_interference_covariance(1, 0, &ch, &f, &PhaseState::zeros(3)).unwrap();
        assert!((v - identity(2).scale(0.3)).norm() < 1e-15);
        assert_eq!(sum_rate(&ch, &f, &PhaseState::zeros(3)).unwrap().sum_rate, 0.0);
    }

    #[test]
    fn lone_uplink_user_sees_noise_only() {
        let dims = NetworkDims {
            num_cells: 1,
            users_dl: 0,
            users_ul: 1,
            ..small_dims()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut ch = ChannelSet::zeros(dims, 0.5);
        ch.ul_to_bs[0][0] = complex_gaussian(&mut rng, 2, 2);
        let f = random_precoders(&dims, &mut rng);
        let v = ul_interference_covariance(0, 0, &ch, &f, &PhaseState::zeros(3)).unwrap();
        assert!((v - identity(2).scale(0.5)).norm() < 1e-15);
        // one active user: the sum rate is its own rate
        let r = user_rate(UserId::uplink(0, 0), &ch, &f, &PhaseState::zeros(3)).unwrap();
        assert_eq!(sum_rate(&ch, &f, &PhaseState::zeros(3)).unwrap().sum_rate, r);
    }

    #[test]
    fn out_of_range_user_is_rejected() {
        let ch = ChannelSet::zeros(small_dims(), 1.0);
        let f = PrecoderSet::zeros(&ch.dims);
        assert!(matches!(
            ul_interference_covariance(2, 0, &ch, &f, &PhaseState::zeros(3)),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(dl_interference_covariance(0, 1, &ch, &f, &PhaseState::zeros(3)).is_err());
    }

    #[test]
    fn scalar_rate_is_shannon() {
        let dims = NetworkDims {
            num_cells: 1,
            users_dl: 1,
            users_ul: 0,
            bs_tx: 1,
            bs_rx: 1,
            ue_tx: 1,
            ue_rx: 1,
            ris_elements: 1,
            streams_dl: 1,
            streams_ul: 1,
        };
        let mut ch = ChannelSet::zeros(dims, 0.2);
        ch.bs_to_dl[0][0] = CMat::from_element(1, 1, Complex64::new(0.6, -0.8));
        let mut f = PrecoderSet::zeros(&dims);
        f.dl[0] = CMat::from_element(1, 1, Complex64::new(0.0, 1.5));
        let r = user_rate(UserId::downlink(0, 0), &ch, &f, &PhaseState::zeros(1)).unwrap();
        let expect = (1.0f64 + 1.0 * 2.25 / 0.2).log2();
        assert!((r - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_without_interference_is_singular() {
        let mut dims = small_dims();
        dims.num_cells = 1;
        dims.users_ul = 0;
        let ch = ChannelSet::zeros(dims, 0.0);
        let f = PrecoderSet::zeros(&dims);
        assert!(matches!(
            user_rate(UserId::downlink(0, 0), &ch, &f, &PhaseState::zeros(3)),
            Err(Error::Singular(_))
        ));
    }

    fn default_small() -> (ChannelSet, ScenarioConfig) {
        let cfg = ScenarioConfig {
            users_per_cell_dl: 1,
            users_per_cell_ul: 1,
            bs_tx_antennas: 2,
            ue_tx_antennas: 2,
            ris_elements: 8,
            ..Default::default()
        };
        (generate_realization(&cfg, 17).unwrap(), cfg)
    }

    fn scaled_precoders(dims: &NetworkDims, rng: &mut ChaCha8Rng) -> PrecoderSet {
        let mut f = random_precoders(dims, rng);
        for p in f.dl.iter_mut().chain(f.ul.iter_mut()) {
            *p = p.scale(0.3);
        }
        f
    }

    #[test]
    fn covariances_are_hermitian_and_bounded_below_by_noise() {
        let (ch, _) = default_small();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = scaled_precoders(&ch.dims, &mut rng);
        let p = random_phase(8, &mut rng);
        let state = NetworkState::new(&ch, &p).unwrap();
        for user in ch.dims.users() {
            let v = state.interference_covariance(user, &f).unwrap();
            assert!(linalg::hermitian_defect(&v) < 1e-10 * v.norm().max(1e-300));
            let (vals, _) = linalg::eigh(&v);
            let noise = ch.noise(user.rx_node(&ch.dims));
            assert!(vals.min() >= noise * (1.0 - 1e-6));
        }
    }

    #[test]
    fn rate_is_invariant_to_unitary_stream_rotation() {
        let (ch, _) = default_small();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f = scaled_precoders(&ch.dims, &mut rng);
        let p = random_phase(8, &mut rng);
        let before = sum_rate(&ch, &f, &p).unwrap();
        // b = 2 streams: rotate every precoder by a random 2x2 unitary
        let x = complex_gaussian(&mut rng, 2, 2);
        let q = x.qr().q();
        let mut rotated = f.clone();
        for g in rotated.dl.iter_mut().chain(rotated.ul.iter_mut()) {
            *g = &*g * &q;
        }
        let after = sum_rate(&ch, &rotated, &p).unwrap();
        for (a, b) in before.ul.iter().chain(&before.dl).zip(after.ul.iter().chain(&after.dl)) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn phase_is_irrelevant_without_reflection() {
        let (ch, _) = default_small();
        let ch = ch.without_reflection();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = scaled_precoders(&ch.dims, &mut rng);
        let a = sum_rate(&ch, &f, &random_phase(8, &mut rng)).unwrap();
        let b = sum_rate(&ch, &f, &random_phase(8, &mut rng)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rates_do_not_increase_with_noise() {
        let (ch, _) = default_small();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f = scaled_precoders(&ch.dims, &mut rng);
        let p = random_phase(8, &mut rng);
        let mut last: Option<RateBreakdown> = None;
        for factor in [1.0, 10.0, 100.0] {
            let mut noisy = ch.clone();
            noisy.noise_bs *= factor;
            noisy.noise_ue *= factor;
            let r = sum_rate(&noisy, &f, &p).unwrap();
            if let Some(prev) = &last {
                for (a, b) in prev.ul.iter().chain(&prev.dl).zip(r.ul.iter().chain(&r.dl)) {
                    assert!(b <= &(a + 1e-12));
                }
            }
            last = Some(r);
        }
    }
}
