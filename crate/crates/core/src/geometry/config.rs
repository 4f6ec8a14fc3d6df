use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and network parameters of one simulated deployment.
///
/// Field names are the JSON keys of the scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_cells: usize,
    pub users_per_cell_dl: usize,
    pub users_per_cell_ul: usize,
    pub bs_tx_antennas: usize,
    pub bs_rx_antennas: usize,
    pub ue_tx_antennas: usize,
    pub ue_rx_antennas: usize,
    pub ris_elements: usize,
    pub streams_dl: usize,
    pub streams_ul: usize,
    /// One `[x, y, z]` position per cell, in meters.
    pub bs_positions: Vec<[f64; 3]>,
    pub ris_position: [f64; 3],
    /// Distance along x from the serving BS toward the RIS of each cell's user disks.
    pub user_center_x: f64,
    /// UL disks sit at `+user_center_y`, DL disks at `-user_center_y`.
    pub user_center_y: f64,
    pub user_height: f64,
    pub user_region_radius: f64,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_per_hz: f64,
    pub power_bs_watt: f64,
    pub power_ue_watt: f64,
    pub sic_db: f64,
    pub pathloss_ref_db: f64,
    pub alpha_bu: f64,
    pub alpha_uu: f64,
    pub alpha_bb: f64,
    pub alpha_r: f64,
    pub rician_factor: f64,
    pub antenna_spacing_wavelengths: f64,
    pub si_pathloss_db: f64,
    pub direct_links_enabled: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_cells: 2,
            users_per_cell_dl: 2,
            users_per_cell_ul: 2,
            bs_tx_antennas: 6,
            bs_rx_antennas: 2,
            ue_tx_antennas: 6,
            ue_rx_antennas: 2,
            ris_elements: 100,
            streams_dl: 2,
            streams_ul: 2,
            bs_positions: vec![[0.0, 0.0, 30.0], [700.0, 0.0, 30.0]],
            ris_position: [350.0, 0.0, 15.0],
            user_center_x: 300.0,
            user_center_y: 50.0,
            user_height: 1.5,
            user_region_radius: 20.0,
            carrier_freq_hz: 2.4e9,
            bandwidth_hz: 10e6,
            noise_density_dbm_per_hz: -174.0,
            power_bs_watt: 1.0,
            power_ue_watt: 0.2,
            sic_db: 90.0,
            pathloss_ref_db: -30.0,
            alpha_bu: 3.75,
            alpha_uu: 3.9,
            alpha_bb: 3.2,
            alpha_r: 2.2,
            rician_factor: 3.0,
            antenna_spacing_wavelengths: 0.5,
            si_pathloss_db: 0.0,
            direct_links_enabled: true,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_cells == 0 {
            return bad("num_cells must be at least 1".into());
        }
        for (name, v) in [
            ("bs_tx_antennas", self.bs_tx_antennas),
            ("bs_rx_antennas", self.bs_rx_antennas),
            ("ue_tx_antennas", self.ue_tx_antennas),
            ("ue_rx_antennas", self.ue_rx_antennas),
            ("ris_elements", self.ris_elements),
            ("streams_dl", self.streams_dl),
            ("streams_ul", self.streams_ul),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.streams_dl > self.bs_tx_antennas.min(self.ue_rx_antennas) {
            return bad("streams_dl exceeds min(bs_tx_antennas, ue_rx_antennas)".into());
        }
        if self.streams_ul > self.ue_tx_antennas.min(self.bs_rx_antennas) {
            return bad("streams_ul exceeds min(ue_tx_antennas, bs_rx_antennas)".into());
        }
        if self.bs_positions.len() != self.num_cells {
            return bad(format!(
                "bs_positions has {} entries for {} cells",
                self.bs_positions.len(),
                self.num_cells
            ));
        }
        if !(self.power_bs_watt > 0.0 && self.power_ue_watt > 0.0) {
            return bad("power budgets must be positive".into());
        }
        if !(self.sic_db >= 0.0) {
            return bad("sic_db must be non-negative".into());
        }
        if !(self.user_region_radius > 0.0) {
            return bad("user_region_radius must be positive".into());
        }
        for (name, v) in [
            ("alpha_bu", self.alpha_bu),
            ("alpha_uu", self.alpha_uu),
            ("alpha_bb", self.alpha_bb),
            ("alpha_r", self.alpha_r),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(self.rician_factor >= 0.0) {
            return bad("rician_factor must be non-negative".into());
        }
        if !(self.bandwidth_hz > 0.0) {
            return bad("bandwidth_hz must be positive".into());
        }
        Ok(())
    }

    /// Linear SIC coefficient `rho_ll`.
    pub fn sic_linear(&self) -> f64 {
        10f64.powf(self.sic_db / 10.0)
    }

    /// Thermal noise power over the band, in watts.
    pub fn noise_power_watt(&self) -> f64 {
        let dbm = self.noise_density_dbm_per_hz + 10.0 * self.bandwidth_hz.log10();
        10f64.powf((dbm - 30.0) / 10.0)
    }

    /// Centre of the user disk of `cell` for the given direction.
    pub fn user_center(&self, cell: usize, uplink: bool) -> [f64; 3] {
        let bs = self.bs_positions[cell];
        let toward_ris = if self.ris_position[0] >= bs[0] { 1.0 } else { -1.0 };
        let y = if uplink {
            self.user_center_y
        } else {
            -self.user_center_y
        };
        [bs[0] + toward_ris * self.user_center_x, y, self.user_height]
    }

    pub fn power_budget(&self) -> crate::network::PowerBudget {
        crate::network::PowerBudget {
            bs: self.power_bs_watt,
            ue: self.power_ue_watt,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
