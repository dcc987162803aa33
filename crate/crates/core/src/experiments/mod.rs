//! Monte Carlo drivers for the two downlink experiments.
//!
//! * Dedicated command-and-control (`cnc`): one UAV hovers at a fixed
//!   horizontal position; every drop redraws LoS, shadowing and fading for
//!   all 57 links, associates by max RSRP and records the interference-free
//!   SNR.
//! * Shared channel (`shared`): 20 UEs, some aerial, are dropped over a disk
//!   and reuse a single channel; every drop records the sum of the Shannon
//!   rates of all UEs.
//!
//! Every drop owns its own ChaCha stream keyed by
//! `(master_seed, scenario, group, drop)`, so results do not depend on the
//! number of worker threads or the order drops are evaluated in.

mod stats;

pub use stats::{ecdf, ecdf_per_sample, percentile, sorted};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{downtilt_weights, norm_sqr, ArrayGeometry, BeamWeights};
use crate::channel::{
    draw_channel_vector, draw_path, large_scale_for_path, noise_power_dbm, ChannelParams,
    LargeScaleState,
};
use crate::error::{Error, Result};
use crate::geometry::{
    distances, drop_ues, NetworkLayout, UeState, GROUND_UE_HEIGHT_M, MAX_AERIAL_HEIGHT_M,
};
use crate::link::{
    associate, rsrp_bf, rsrp_fixed, ArrayMode, DropChannels, DropState, PowerConfig,
};
use crate::{db_to_linear, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Cnc,
    Shared,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Cnc => "cnc",
            Scenario::Shared => "shared",
        }
    }

    fn stream_tag(&self) -> u64 {
        match self {
            Scenario::Cnc => 1,
            Scenario::Shared => 2,
        }
    }
}

/// Granularity at which LoS state and shadowing are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LargeScaleScope {
    /// One draw per site-UE path, shared by the site's three cells.
    Site,
    /// An independent draw for every cell-UE link.
    Cell,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub mode: ArrayMode,
    pub isd_m: f64,
    pub h_bs_m: f64,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub cell_power_dbm: f64,
    pub rician_k_db: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub downtilt_deg: f64,
    pub large_scale_scope: LargeScaleScope,
    pub drops: usize,
    pub master_seed: u64,
    /// Horizontal position of the UAV (cnc only).
    pub uav_xy_m: [f64; 2],
    /// UAV altitudes to sweep (cnc only).
    pub altitudes_m: Vec<f64>,
    /// UEs sharing the channel (shared only).
    pub n_total: usize,
    /// Aerial UE counts to sweep (shared only).
    pub n_uav: Vec<usize>,
    pub disk_radius_m: f64,
}

impl ExperimentConfig {
    /// Dedicated C&C channel at 5 GHz with the UAV at (250 m, 100 m).
    pub fn cnc() -> Self {
        Self {
            scenario: Scenario::Cnc,
            mode: ArrayMode::Fixed,
            isd_m: 500.0,
            h_bs_m: 25.0,
            carrier_ghz: 5.0,
            bandwidth_hz: 1.0e6,
            cell_power_dbm: 20.0,
            rician_k_db: 15.0,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            downtilt_deg: 10.0,
            large_scale_scope: LargeScaleScope::Site,
            drops: 10_000,
            master_seed: 1,
            uav_xy_m: [250.0, 100.0],
            altitudes_m: vec![1.5, 90.0, 200.0],
            n_total: 20,
            n_uav: vec![0, 5, 10],
            disk_radius_m: 1000.0,
        }
    }

    /// Payload channel at 2 GHz shared by 20 UEs.
    pub fn shared() -> Self {
        Self {
            scenario: Scenario::Shared,
            carrier_ghz: 2.0,
            drops: 2_000,
            ..Self::cnc()
        }
    }

    pub fn defaults(scenario: Scenario) -> Self {
        match scenario {
            Scenario::Cnc => Self::cnc(),
            Scenario::Shared => Self::shared(),
        }
    }

    pub fn with_mode(mut self, mode: ArrayMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_drops(mut self, drops: usize) -> Self {
        self.drops = drops;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            carrier_ghz: self.carrier_ghz,
            rician_k_db: self.rician_k_db,
            bandwidth_hz: self.bandwidth_hz,
            noise_psd_dbm_hz: self.noise_psd_dbm_hz,
            noise_figure_db: self.noise_figure_db,
        }
    }

    pub fn power(&self) -> PowerConfig {
        PowerConfig {
            cell_power_dbm: self.cell_power_dbm,
        }
    }

    pub fn array(&self) -> ArrayGeometry {
        match self.mode {
            ArrayMode::Fixed => ArrayGeometry::ula_8x1(),
            ArrayMode::Bf3d => ArrayGeometry::upa_8x4(),
        }
    }

    pub fn layout(&self) -> Result<NetworkLayout> {
        NetworkLayout::standard(self.isd_m, self.h_bs_m, self.array())
    }

    pub fn validate(&self) -> Result<()> {
        fn fail(field: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::Validation {
                field,
                reason: reason.into(),
            })
        }
        let positive = [
            ("isd_m", self.isd_m),
            ("carrier_ghz", self.carrier_ghz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("disk_radius_m", self.disk_radius_m),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(field, format!("must be positive and finite, got {v}"));
            }
        }
        let finite = [
            ("h_bs_m", self.h_bs_m),
            ("cell_power_dbm", self.cell_power_dbm),
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
            ("noise_figure_db", self.noise_figure_db),
            ("downtilt_deg", self.downtilt_deg),
        ];
        for (field, v) in finite {
            if !v.is_finite() {
                return fail(field, format!("must be finite, got {v}"));
            }
        }
        if self.rician_k_db.is_nan() || self.rician_k_db == f64::NEG_INFINITY {
            return fail(
                "rician_k_db",
                format!("must be a number, got {}", self.rician_k_db),
            );
        }
        if self.drops == 0 {
            return fail("drops", "at least one drop is required");
        }
        if self.uav_xy_m.iter().any(|v| !v.is_finite()) {
            return fail("uav_xy_m", "coordinates must be finite");
        }
        if self.altitudes_m.is_empty() {
            return fail("altitudes_m", "at least one altitude is required");
        }
        if let Some(h) = self
            .altitudes_m
            .iter()
            .find(|h| !(GROUND_UE_HEIGHT_M..=MAX_AERIAL_HEIGHT_M).contains(*h))
        {
            return fail("altitudes_m", format!("{h} m lies outside [1.5, 300] m"));
        }
        if self.n_uav.is_empty() {
            return fail("n_uav", "at least one aerial UE count is required");
        }
        if let Some(n) = self.n_uav.iter().find(|&&n| n > self.n_total) {
            return fail("n_uav", format!("{n} exceeds n_total = {}", self.n_total));
        }
        Ok(())
    }
}

/// Random stream of one drop.
pub fn drop_rng(master_seed: u64, scenario: Scenario, group: usize, drop: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(
        (scenario.stream_tag() << 56) | ((group as u64 & 0xff_ffff) << 32) | drop as u64,
    );
    rng
}

/// Immutable per-run state shared by all drops.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub layout: NetworkLayout,
    pub mode: ArrayMode,
    pub params: ChannelParams,
    pub power: PowerConfig,
    pub noise_dbm: f64,
    pub scope: LargeScaleScope,
    downtilt: BeamWeights,
}

impl Simulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let params = config.channel_params();
        Ok(Self {
            layout: config.layout()?,
            mode: config.mode,
            params,
            power: config.power(),
            noise_dbm: noise_power_dbm(&params),
            scope: config.large_scale_scope,
            downtilt: downtilt_weights(&ArrayGeometry::ula_8x1(), config.downtilt_deg)?,
        })
    }

    /// Large-scale state of every cell towards `ue`, in cell order.
    pub fn draw_large_scale(
        &self,
        ue: &UeState,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<LargeScaleState>> {
        let cells = &self.layout.cells;
        let mut out = Vec::with_capacity(cells.len());
        let mut site_path = None;
        for cell in cells {
            let path = match (self.scope, site_path) {
                (LargeScaleScope::Site, Some((site, path))) if site == cell.site_index => path,
                _ => {
                    let (d_2d, _) = distances(cell, ue);
                    let path = draw_path(d_2d, ue.height(), rng)?;
                    site_path = Some((cell.site_index, path));
                    path
                }
            };
            out.push(large_scale_for_path(cell, ue, &self.params, path)?);
        }
        Ok(out)
    }

    /// Per-cell linear link gains towards `ue` for the configured mode.
    fn draw_links(&self, ue: &UeState, rng: &mut ChaCha8Rng) -> Result<DropChannels> {
        let states = self.draw_large_scale(ue, rng)?;
        let cells = &self.layout.cells;
        Ok(match self.mode {
            ArrayMode::Fixed => DropChannels::Fixed(
                cells
                    .iter()
                    .zip(&states)
                    .map(|(cell, ls)| {
                        let rsrp = rsrp_fixed(cell, ls, &self.downtilt, &self.power)?;
                        Ok(db_to_linear(rsrp - self.power.cell_power_dbm))
                    })
                    .collect::<Result<_>>()?,
            ),
            ArrayMode::Bf3d => DropChannels::Beamformed(
                cells
                    .iter()
                    .zip(&states)
                    .map(|(cell, ls)| {
                        let v = draw_channel_vector(ls, &cell.array, &self.params, rng);
                        rsrp_bf(&v, &self.power)?;
                        Ok(v.gains)
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }

    /// One C&C drop: serving cell index (0-based) and interference-free SNR.
    pub fn cnc_drop(&self, ue: &UeState, rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
        let rsrp: Vec<f64> = match self.draw_links(ue, rng)? {
            DropChannels::Fixed(g) => g
                .into_iter()
                .map(|g| self.power.cell_power_dbm + linear_to_db(g))
                .collect(),
            DropChannels::Beamformed(h) => h
                .iter()
                .map(|gains| self.power.cell_power_dbm + linear_to_db(norm_sqr(gains)))
                .collect(),
        };
        let serving = associate(&rsrp)
            .ok_or_else(|| Error::InvalidState("no cell could be associated".into()))?;
        Ok((serving, rsrp[serving] - self.noise_dbm))
    }

    /// Builds the full channel state of one shared-channel drop.
    pub fn shared_drop_state(&self, ues: &[UeState], rng: &mut ChaCha8Rng) -> Result<DropState> {
        let n_cells = self.layout.num_cells();
        let n_ues = ues.len();
        let per_ue = ues
            .iter()
            .map(|ue| self.draw_links(ue, rng))
            .collect::<Result<Vec<_>>>()?;
        // Transpose into the cell-major layout DropState expects.
        let channels = match self.mode {
            ArrayMode::Fixed => {
                let mut g = vec![0.0; n_cells * n_ues];
                for (u, links) in per_ue.into_iter().enumerate() {
                    let DropChannels::Fixed(links) = links else {
                        unreachable!()
                    };
                    for (c, v) in links.into_iter().enumerate() {
                        g[c * n_ues + u] = v;
                    }
                }
                DropChannels::Fixed(g)
            }
            ArrayMode::Bf3d => {
                let mut h = vec![Vec::new(); n_cells * n_ues];
                for (u, links) in per_ue.into_iter().enumerate() {
                    let DropChannels::Beamformed(links) = links else {
                        unreachable!()
                    };
                    for (c, v) in links.into_iter().enumerate() {
                        h[c * n_ues + u] = v;
                    }
                }
                DropChannels::Beamformed(h)
            }
        };
        DropState::associate(n_cells, n_ues, channels)
    }

    /// One shared-channel drop: sum of all UEs' Shannon rates, bps.
    pub fn shared_drop(
        &self,
        n_total: usize,
        n_uav: usize,
        disk_radius: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        let ues = drop_ues(n_total, n_uav, disk_radius, rng)?;
        let state = self.shared_drop_state(&ues, rng)?;
        let metrics = state.metrics(&self.power, self.noise_dbm, self.params.bandwidth_hz)?;
        Ok(metrics.iter().map(|m| m.rate_bps).sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CncAltitude {
    pub altitude_m: f64,
    /// Association frequency per cell, indexed by `cell_id - 1`.
    pub association: Vec<f64>,
    /// SNR samples, ascending.
    pub snr_db: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CncResult {
    pub mode: ArrayMode,
    pub per_altitude: Vec<CncAltitude>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharedGroup {
    pub n_uav: usize,
    /// Per-drop sum rates, ascending.
    pub sum_rate_bps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharedResult {
    pub mode: ArrayMode,
    pub per_n_uav: Vec<SharedGroup>,
}

fn expect_scenario(config: &ExperimentConfig, scenario: Scenario) -> Result<()> {
    if config.scenario != scenario {
        return Err(Error::Validation {
            field: "scenario",
            reason: format!("expected `{scenario}`, got `{}`", config.scenario),
        });
    }
    Ok(())
}

pub fn run_cnc(config: &ExperimentConfig) -> Result<CncResult> {
    expect_scenario(config, Scenario::Cnc)?;
    let sim = Simulator::new(config)?;
    let n_cells = sim.layout.num_cells();
    let [x, y] = config.uav_xy_m;

    let per_altitude = config
        .altitudes_m
        .iter()
        .enumerate()
        .map(|(group, &altitude_m)| {
            let ue = if altitude_m == GROUND_UE_HEIGHT_M {
                UeState::ground(x, y)
            } else {
                UeState::aerial(x, y, altitude_m)
            };
            let draws = (0..config.drops)
                .into_par_iter()
                .map(|d| {
                    let mut rng = drop_rng(config.master_seed, Scenario::Cnc, group, d);
                    sim.cnc_drop(&ue, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;

            let mut counts = vec![0usize; n_cells];
            for (serving, _) in &draws {
                counts[*serving] += 1;
            }
            let association = counts
                .into_iter()
                .map(|c| c as f64 / config.drops as f64)
                .collect();
            let snr: Vec<f64> = draws.into_iter().map(|(_, s)| s).collect();
            Ok(CncAltitude {
                altitude_m,
                association,
                snr_db: sorted(&snr),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CncResult {
        mode: config.mode,
        per_altitude,
    })
}

pub fn run_shared(config: &ExperimentConfig) -> Result<SharedResult> {
    expect_scenario(config, Scenario::Shared)?;
    let sim = Simulator::new(config)?;
    let per_n_uav = config
        .n_uav
        .iter()
        .enumerate()
        .map(|(group, &n_uav)| {
            let rates = (0..config.drops)
                .into_par_iter()
                .map(|d| {
                    let mut rng = drop_rng(config.master_seed, Scenario::Shared, group, d);
                    sim.shared_drop(config.n_total, n_uav, config.disk_radius_m, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SharedGroup {
                n_uav,
                sum_rate_bps: sorted(&rates),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SharedResult {
        mode: config.mode,
        per_n_uav,
    })
}
