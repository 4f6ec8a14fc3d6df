use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::linalg::{zeros, CMat};

/// Array sizes and user counts of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDims {
    pub num_cells: usize,
    /// DL users per cell.
    pub users_dl: usize,
    /// UL users per cell.
    pub users_ul: usize,
    pub bs_tx: usize,
    pub bs_rx: usize,
    pub ue_tx: usize,
    pub ue_rx: usize,
    pub ris_elements: usize,
    pub streams_dl: usize,
    pub streams_ul: usize,
}

impl NetworkDims {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            num_cells: cfg.num_cells,
            users_dl: cfg.users_per_cell_dl,
            users_ul: cfg.users_per_cell_ul,
            bs_tx: cfg.bs_tx_antennas,
            bs_rx: cfg.bs_rx_antennas,
            ue_tx: cfg.ue_tx_antennas,
            ue_rx: cfg.ue_rx_antennas,
            ris_elements: cfg.ris_elements,
            streams_dl: cfg.streams_dl,
            streams_ul: cfg.streams_ul,
        }
    }

    pub fn total_dl(&self) -> usize {
        self.num_cells * self.users_dl
    }

    pub fn total_ul(&self) -> usize {
        self.num_cells * self.users_ul
    }

    pub fn tx_nodes(&self) -> impl Iterator<Item = TxNode> {
        let bs = (0..self.num_cells).map(TxNode::Bs);
        bs.chain((0..self.total_ul()).map(TxNode::Ul))
    }

    pub fn rx_nodes(&self) -> impl Iterator<Item = RxNode> {
        let bs = (0..self.num_cells).map(RxNode::Bs);
        bs.chain((0..self.total_dl()).map(RxNode::Dl))
    }

    /// Every user, UL users first, each ordered by (cell, index).
    pub fn users(&self) -> impl Iterator<Item = UserId> {
        let ul = (0..self.total_ul()).map(|g| UserId::from_global(Direction::Uplink, g, self.users_ul));
        let dl = (0..self.total_dl()).map(|g| UserId::from_global(Direction::Downlink, g, self.users_dl));
        ul.chain(dl).collect::<Vec<_>>().into_iter()
    }

    pub fn tx_antennas(&self, tx: TxNode) -> usize {
        match tx {
            TxNode::Bs(_) => self.bs_tx,
            TxNode::Ul(_) => self.ue_tx,
        }
    }

    pub fn rx_antennas(&self, rx: RxNode) -> usize {
        match rx {
            RxNode::Bs(_) => self.bs_rx,
            RxNode::Dl(_) => self.ue_rx,
        }
    }

    pub fn streams(&self, dir: Direction) -> usize {
        match dir {
            Direction::Uplink => self.streams_ul,
            Direction::Downlink => self.streams_dl,
        }
    }

    /// Cell owning global UL user `g`.
    pub fn ul_cell(&self, g: usize) -> usize {
        g / self.users_ul
    }

    /// Cell owning global DL user `g`.
    pub fn dl_cell(&self, g: usize) -> usize {
        g / self.users_dl
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

/// A transmitting node: a BS (serving its DL users) or a UL user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TxNode {
    Bs(usize),
    Ul(usize),
}

/// A receiving node: a BS (decoding its UL users) or a DL user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RxNode {
    Bs(usize),
    Dl(usize),
}

/// The `index`-th user of `cell` in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UserId {
    pub direction: Direction,
    pub cell: usize,
    pub index: usize,
}

impl UserId {
    pub fn uplink(cell: usize, index: usize) -> Self {
        Self {
            direction: Direction::Uplink,
            cell,
            index,
        }
    }

    pub fn downlink(cell: usize, index: usize) -> Self {
        Self {
            direction: Direction::Downlink,
            cell,
            index,
        }
    }

    fn from_global(direction: Direction, g: usize, per_cell: usize) -> Self {
        Self {
            direction,
            cell: g / per_cell,
            index: g % per_cell,
        }
    }

    /// Position in the flattened per-direction user list.
    pub fn global(&self, dims: &NetworkDims) -> usize {
        match self.direction {
            Direction::Uplink => self.cell * dims.users_ul + self.index,
            Direction::Downlink => self.cell * dims.users_dl + self.index,
        }
    }

    pub fn tx_node(&self, dims: &NetworkDims) -> TxNode {
        match self.direction {
            Direction::Uplink => TxNode::Ul(self.global(dims)),
            Direction::Downlink => TxNode::Bs(self.cell),
        }
    }

    pub fn rx_node(&self, dims: &NetworkDims) -> RxNode {
        match self.direction {
            Direction::Uplink => RxNode::Bs(self.cell),
            Direction::Downlink => RxNode::Dl(self.global(dims)),
        }
    }

    pub fn in_range(&self, dims: &NetworkDims) -> bool {
        let per_cell = match self.direction {
            Direction::Uplink => dims.users_ul,
            Direction::Downlink => dims.users_dl,
        };
        self.cell < dims.num_cells && self.index < per_cell
    }
}

/// One realization of every direct and RIS-related channel.
///
/// Matrices are stored receiver-by-transmitter; indices of users are global
/// (`cell * users_per_cell + k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub dims: NetworkDims,
    pub sic_db: f64,
    pub noise_bs: f64,
    pub noise_ue: f64,
    pub seed: u64,
    /// `H_{l,j}`: BS `j` transmit array to BS `l` receive array, `[l][j]`. The
    /// diagonal holds the SI links.
    pub bs_to_bs: Vec<Vec<CMat>>,
    /// `H_{k,j}`: BS `j` to DL user `k`, `[k][j]`.
    pub bs_to_dl: Vec<Vec<CMat>>,
    /// `H_{j,k}`: UL user `k` to BS `j`, `[j][k]`.
    pub ul_to_bs: Vec<Vec<CMat>>,
    /// `H_{i,k}`: UL user `k` to DL user `i`, `[i][k]`.
    pub ul_to_dl: Vec<Vec<CMat>>,
    /// `G_{l,R}`: RIS to BS `l`.
    pub ris_to_bs: Vec<CMat>,
    /// `G_{k,R}`: RIS to DL user `k`.
    pub ris_to_dl: Vec<CMat>,
    /// `G_{R,l}`: BS `l` to RIS.
    pub bs_to_ris: Vec<CMat>,
    /// `G_{R,k}`: UL user `k` to RIS.
    pub ul_to_ris: Vec<CMat>,
}

impl ChannelSet {
    /// All-zero channels with unit noise, mainly for tests and degenerate runs.
    pub fn zeros(dims: NetworkDims, noise: f64) -> Self {
        let (l, kd, ku) = (dims.num_cells, dims.total_dl(), dims.total_ul());
        let m = dims.ris_elements;
        Self {
            dims,
            sic_db: 0.0,
            noise_bs: noise,
            noise_ue: noise,
            seed: 0,
            bs_to_bs: vec![vec![zeros(dims.bs_rx, dims.bs_tx); l]; l],
            bs_to_dl: vec![vec![zeros(dims.ue_rx, dims.bs_tx); l]; kd],
            ul_to_bs: vec![vec![zeros(dims.bs_rx, dims.ue_tx); ku]; l],
            ul_to_dl: vec![vec![zeros(dims.ue_rx, dims.ue_tx); ku]; kd],
            ris_to_bs: vec![zeros(dims.bs_rx, m); l],
            ris_to_dl: vec![zeros(dims.ue_rx, m); kd],
            bs_to_ris: vec![zeros(m, dims.bs_tx); l],
            ul_to_ris: vec![zeros(m, dims.ue_tx); ku],
        }
    }

    /// Linear SIC coefficient.
    pub fn sic_linear(&self) -> f64 {
        10f64.powf(self.sic_db / 10.0)
    }

    /// Power scaling `rho_{l,j}^{-1}` applied to the link `tx -> rx`: the SIC
    /// coefficient on a BS's own transmit-to-receive path, one elsewhere.
    pub fn link_scale(&self, rx: RxNode, tx: TxNode) -> f64 {
        match (rx, tx) {
            (RxNode::Bs(l), TxNode::Bs(j)) if l == j => 1.0 / self.sic_linear(),
            _ => 1.0,
        }
    }

    pub fn direct(&self, rx: RxNode, tx: TxNode) -> &CMat {
        match (rx, tx) {
            (RxNode::Bs(l), TxNode::Bs(j)) => &self.bs_to_bs[l][j],
            (RxNode::Bs(l), TxNode::Ul(k)) => &self.ul_to_bs[l][k],
            (RxNode::Dl(k), TxNode::Bs(j)) => &self.bs_to_dl[k][j],
            (RxNode::Dl(i), TxNode::Ul(k)) => &self.ul_to_dl[i][k],
        }
    }

    /// Reflection matrix from the RIS into `rx` (`rx_antennas x M`).
    pub fn ris_rx(&self, rx: RxNode) -> &CMat {
        match rx {
            RxNode::Bs(l) => &self.ris_to_bs[l],
            RxNode::Dl(k) => &self.ris_to_dl[k],
        }
    }

    /// Matrix from `tx` into the RIS (`M x tx_antennas`).
    pub fn ris_tx(&self, tx: TxNode) -> &CMat {
        match tx {
            TxNode::Bs(l) => &self.bs_to_ris[l],
            TxNode::Ul(k) => &self.ul_to_ris[k],
        }
    }

    pub fn noise(&self, rx: RxNode) -> f64 {
        match rx {
            RxNode::Bs(_) => self.noise_bs,
            RxNode::Dl(_) => self.noise_ue,
        }
    }

    /// Same network with the RIS removed: every reflected path is zero.
    pub fn without_reflection(&self) -> Self {
        let mut out = self.clone();
        for g in out
            .ris_to_bs
            .iter_mut()
            .chain(out.ris_to_dl.iter_mut())
            .chain(out.bs_to_ris.iter_mut())
            .chain(out.ul_to_ris.iter_mut())
        {
            g.fill(crate::linalg::ZERO);
        }
        out
    }

    /// Network restricted to its UL users (no DL transmissions at all).
    pub fn uplink_only(&self) -> Self {
        let mut out = self.clone();
        out.dims.users_dl = 0;
        out.bs_to_dl.clear();
        out.ul_to_dl.clear();
        out.ris_to_dl.clear();
        out
    }

    /// Network restricted to its DL users (no UL transmissions at all).
    pub fn downlink_only(&self) -> Self {
        let mut out = self.clone();
        out.dims.users_ul = 0;
        for row in &mut out.ul_to_bs {
            row.clear();
        }
        for row in &mut out.ul_to_dl {
            row.clear();
        }
        out.ul_to_ris.clear();
        out
    }

    /// Every stored matrix with the shape its endpoints require, and all
    /// entries finite.
    pub fn is_consistent(&self) -> bool {
        let d = &self.dims;
        let m = d.ris_elements;
        let mut ok = self.ris_to_bs.len() == d.num_cells
            && self.bs_to_ris.len() == d.num_cells
            && self.ris_to_dl.len() == d.total_dl()
            && self.ul_to_ris.len() == d.total_ul();
        if !ok {
            return false;
        }
        for rx in d.rx_nodes() {
            ok &= self.ris_rx(rx).shape() == (d.rx_antennas(rx), m);
            for tx in d.tx_nodes() {
                ok &= self.direct(rx, tx).shape() == (d.rx_antennas(rx), d.tx_antennas(tx));
                ok &= self.direct(rx, tx).iter().all(|z| z.re.is_finite() && z.im.is_finite());
            }
        }
        for tx in d.tx_nodes() {
            ok &= self.ris_tx(tx).shape() == (m, d.tx_antennas(tx));
        }
        ok
    }
}
