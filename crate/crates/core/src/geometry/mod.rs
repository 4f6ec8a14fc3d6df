//! Scenario geometry, large-scale path loss and small-scale fading.
//!
//! [`generate_realization`] is a pure function of `(config, seed)`: the
//! random draws happen in a fixed order that does not depend on flags such
//! as `direct_links_enabled` or `sic_db`, so paired runs that differ only in
//! those settings see the same fading.

mod channels;
mod config;

pub use channels::{ChannelSet, Direction, NetworkDims, RxNode, TxNode, UserId};
pub use config::ScenarioConfig;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, CMat, CVec};

/// Reference distance of the log-distance model, in meters.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

/// `PL(d) = rho_0 - 10 alpha log10(d / d_0)` in dB.
pub fn path_loss_db(distance_m: f64, exponent: f64, ref_loss_db: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {distance_m}")));
    }
    Ok(ref_loss_db - 10.0 * exponent * (distance_m / REFERENCE_DISTANCE_M).log10())
}

/// Large-scale loss of the BS-RIS-user cascade: one reference loss per hop and
/// the product-distance law `2 rho_0 - 10 alpha_R log10(d_BR d_RU)`.
pub fn reflected_path_loss_db(
    d_tx_ris_m: f64,
    d_ris_rx_m: f64,
    exponent_r: f64,
    ref_loss_db: f64,
) -> Result<f64> {
    Ok(path_loss_db(d_tx_ris_m, exponent_r, ref_loss_db)?
        + path_loss_db(d_ris_rx_m, exponent_r, ref_loss_db)?)
}

/// Uniform linear array response `[1, e^{j 2 pi s sin(a)}, ..., e^{j 2 pi s (n-1) sin(a)}]`.
pub fn steering_vector(angle_rad: f64, n: usize, spacing_over_lambda: f64) -> Result<CVec> {
    if n == 0 {
        return Err(Error::Domain("steering vector needs at least one element".into()));
    }
    let step = 2.0 * std::f64::consts::PI * spacing_over_lambda * angle_rad.sin();
    Ok(CVec::from_fn(n, |i, _| {
        if i == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, step * i as f64)
        }
    }))
}

/// `sqrt(k/(k+1)) los + sqrt(1/(k+1)) nlos`.
pub fn rician_channel(kappa: f64, los: &CMat, nlos: &CMat) -> Result<CMat> {
    if los.shape() != nlos.shape() {
        return Err(Error::DimensionMismatch {
            context: "rician_channel",
            expected: los.shape(),
            found: nlos.shape(),
        });
    }
    if !(kappa >= 0.0) {
        return Err(Error::Domain(format!("Rician factor must be non-negative, got {kappa}")));
    }
    let w_los = (kappa / (kappa + 1.0)).sqrt();
    let w_nlos = (1.0 / (kappa + 1.0)).sqrt();
    Ok(los.scale(w_los) + nlos.scale(w_nlos))
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn amplitude(pl_db: f64) -> f64 {
    10f64.powf(pl_db / 20.0)
}

/// Node positions of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub bs: Vec<[f64; 3]>,
    pub ris: [f64; 3],
    /// Global UL user index -> position.
    pub ul_users: Vec<[f64; 3]>,
    /// Global DL user index -> position.
    pub dl_users: Vec<[f64; 3]>,
}

impl Layout {
    /// Distance used for path loss; closer than the reference distance is clamped.
    pub fn link_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
        distance(a, b).max(REFERENCE_DISTANCE_M)
    }
}

fn drop_in_disk(rng: &mut ChaCha8Rng, center: [f64; 3], radius: f64) -> [f64; 3] {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random::<f64>() * std::f64::consts::TAU;
    [center[0] + r * a.cos(), center[1] + r * a.sin(), center[2]]
}

struct Fading<'a> {
    rng: ChaCha8Rng,
    cfg: &'a ScenarioConfig,
}

impl Fading<'_> {
    fn rayleigh(&mut self, rows: usize, cols: usize, pl_db: f64) -> CMat {
        complex_gaussian(&mut self.rng, rows, cols).scale(amplitude(pl_db))
    }

    fn rician(&mut self, rows: usize, cols: usize, pl_db: f64) -> CMat {
        let aoa = self.rng.random::<f64>() * std::f64::consts::TAU;
        let aod = self.rng.random::<f64>() * std::f64::consts::TAU;
        let s = self.cfg.antenna_spacing_wavelengths;
        let a_rx = steering_vector(aoa, rows, s).expect("rows >= 1");
        let a_tx = steering_vector(aod, cols, s).expect("cols >= 1");
        let los = &a_rx * a_tx.adjoint();
        let nlos = complex_gaussian(&mut self.rng, rows, cols);
        rician_channel(self.cfg.rician_factor, &los, &nlos)
            .expect("shapes agree")
            .scale(amplitude(pl_db))
    }
}

/// Draws one channel realization.
pub fn generate_realization(config: &ScenarioConfig, seed: u64) -> Result<ChannelSet> {
    generate_realization_with_layout(config, seed).map(|(c, _)| c)
}

/// Like [`generate_realization`], also returning the user drop.
pub fn generate_realization_with_layout(
    config: &ScenarioConfig,
    seed: u64,
) -> Result<(ChannelSet, Layout)> {
    config.validate()?;
    let dims = NetworkDims::from_config(config);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut ul_users = Vec::with_capacity(dims.total_ul());
    let mut dl_users = Vec::with_capacity(dims.total_dl());
    for l in 0..dims.num_cells {
        let ul_center = config.user_center(l, true);
        let dl_center = config.user_center(l, false);
        for _ in 0..dims.users_ul {
            ul_users.push(drop_in_disk(&mut rng, ul_center, config.user_region_radius));
        }
        for _ in 0..dims.users_dl {
            dl_users.push(drop_in_disk(&mut rng, dl_center, config.user_region_radius));
        }
    }
    let layout = Layout {
        bs: config.bs_positions.clone(),
        ris: config.ris_position,
        ul_users,
        dl_users,
    };

    let mut fading = Fading { rng, cfg: config };
    let rho0 = config.pathloss_ref_db;
    let pl = |a: [f64; 3], b: [f64; 3], alpha: f64| {
        path_loss_db(Layout::link_distance(a, b), alpha, rho0).expect("distance >= d0")
    };
    let m = dims.ris_elements;
    let mut channels = ChannelSet::zeros(dims, config.noise_power_watt());
    channels.sic_db = config.sic_db;
    channels.seed = seed;

    for l in 0..dims.num_cells {
        for j in 0..dims.num_cells {
            channels.bs_to_bs[l][j] = if l == j {
                fading.rician(dims.bs_rx, dims.bs_tx, config.si_pathloss_db)
            } else {
                let loss = pl(layout.bs[l], layout.bs[j], config.alpha_bb);
                fading.rician(dims.bs_rx, dims.bs_tx, loss)
            };
        }
    }
    for (k, &pos) in layout.dl_users.iter().enumerate() {
        for j in 0..dims.num_cells {
            let loss = pl(pos, layout.bs[j], config.alpha_bu);
            channels.bs_to_dl[k][j] = fading.rayleigh(dims.ue_rx, dims.bs_tx, loss);
        }
    }
    for j in 0..dims.num_cells {
        for (k, &pos) in layout.ul_users.iter().enumerate() {
            let loss = pl(layout.bs[j], pos, config.alpha_bu);
            channels.ul_to_bs[j][k] = fading.rayleigh(dims.bs_rx, dims.ue_tx, loss);
        }
    }
    for (i, &rx) in layout.dl_users.iter().enumerate() {
        for (k, &tx) in layout.ul_users.iter().enumerate() {
            let loss = pl(rx, tx, config.alpha_uu);
            channels.ul_to_dl[i][k] = fading.rayleigh(dims.ue_rx, dims.ue_tx, loss);
        }
    }
    for l in 0..dims.num_cells {
        let loss = pl(layout.bs[l], layout.ris, config.alpha_r);
        channels.ris_to_bs[l] = fading.rician(dims.bs_rx, m, loss);
        channels.bs_to_ris[l] = fading.rician(m, dims.bs_tx, loss);
    }
    for (k, &pos) in layout.dl_users.iter().enumerate() {
        let loss = pl(pos, layout.ris, config.alpha_r);
        channels.ris_to_dl[k] = fading.rician(dims.ue_rx, m, loss);
    }
    for (k, &pos) in layout.ul_users.iter().enumerate() {
        let loss = pl(pos, layout.ris, config.alpha_r);
        channels.ul_to_ris[k] = fading.rician(m, dims.ue_tx, loss);
    }

    if !config.direct_links_enabled {
        for h in channels.bs_to_dl.iter_mut().flatten() {
            h.fill(crate::linalg::ZERO);
        }
        for h in channels.ul_to_bs.iter_mut().flatten() {
            h.fill(crate::linalg::ZERO);
        }
    }
    Ok((channels, layout))
}
