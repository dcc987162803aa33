//! Received power, association, SINR and rate computations.
//!
//! Power is split equally among the UEs a cell serves and those UEs are
//! multiplexed orthogonally, so a cell only ever interferes with UEs served
//! by other cells. Cells that serve nobody stay silent.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::antenna::{fixed_pattern_gain_db, mrt_weights, norm_sqr, BeamWeights};
use crate::channel::{ChannelVector, LargeScaleState};
use crate::error::{invalid_arg, Error, Result};
use crate::geometry::CellDescriptor;
use crate::{db_to_linear, linear_to_db};

/// How each cell's array is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayMode {
    /// 8×1 ULA with a fixed 10° electrical downtilt; association on
    /// large-scale gain.
    Fixed,
    /// 8×4 UPA with per-UE MRT on instantaneous CSI.
    Bf3d,
}

impl ArrayMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ArrayMode::Fixed => "fixed",
            ArrayMode::Bf3d => "bf3d",
        }
    }
}

impl std::fmt::Display for ArrayMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ArrayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(ArrayMode::Fixed),
            "bf3d" => Ok(ArrayMode::Bf3d),
            other => Err(invalid_arg(format!("unknown array mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    /// Total transmit power of a cell on the channel.
    pub cell_power_dbm: f64,
}

impl PowerConfig {
    pub fn per_ue_power_dbm(&self, n_served: usize) -> f64 {
        self.cell_power_dbm - linear_to_db(n_served.max(1) as f64)
    }

    pub fn cell_power_mw(&self) -> f64 {
        db_to_linear(self.cell_power_dbm)
    }
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            cell_power_dbm: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMetrics {
    pub serving_cell: usize,
    pub rsrp_dbm: f64,
    pub sinr_db: f64,
    pub rate_bps: f64,
}

/// RSRP through the fixed downtilted pattern, from large-scale state only.
pub fn rsrp_fixed(
    cell: &CellDescriptor,
    ls: &LargeScaleState,
    weights: &BeamWeights,
    power: &PowerConfig,
) -> Result<f64> {
    let pattern = fixed_pattern_gain_db(&cell.array, weights, ls.angles)?;
    Ok(power.cell_power_dbm + pattern - ls.pathloss_db - ls.shadowing_db)
}

/// RSRP with MRT on the instantaneous channel: P + 10·log10‖h‖².
pub fn rsrp_bf(h: &ChannelVector, power: &PowerConfig) -> Result<f64> {
    let p = h.power();
    if !(p > 0.0) {
        return Err(Error::DegenerateChannel);
    }
    Ok(power.cell_power_dbm + linear_to_db(p))
}

/// Index of the strongest entry; ties go to the lowest index.
///
/// Returns `None` for an empty slice or if every entry is NaN.
pub fn associate(rsrp_dbm: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &r) in rsrp_dbm.iter().enumerate() {
        if r.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if r <= b => {}
            _ => best = Some((i, r)),
        }
    }
    best.map(|(i, _)| i)
}

pub fn shannon_rate(sinr_db: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * (1.0 + db_to_linear(sinr_db)).log2()
}

fn check_snr_pair(s_uav: f64, s_gnd: f64) -> Result<()> {
    if !(s_uav >= 0.0) || !(s_gnd >= 0.0) {
        return Err(invalid_arg(format!(
            "SNRs must be non-negative, got ({s_uav}, {s_gnd})"
        )));
    }
    Ok(())
}

/// Uplink power-domain NOMA with the UAV decoded first, then removed by SIC.
pub fn noma_pair_rates(s_uav: f64, s_gnd: f64, bandwidth_hz: f64) -> Result<(f64, f64)> {
    check_snr_pair(s_uav, s_gnd)?;
    let r_uav = bandwidth_hz * (1.0 + s_uav / (1.0 + s_gnd)).log2();
    let r_gnd = bandwidth_hz * (1.0 + s_gnd).log2();
    Ok((r_uav, r_gnd))
}

/// Equal time sharing between the two users at unchanged transmit power.
pub fn oma_pair_rates(s_uav: f64, s_gnd: f64, bandwidth_hz: f64) -> Result<(f64, f64)> {
    check_snr_pair(s_uav, s_gnd)?;
    let half = 0.5 * bandwidth_hz;
    Ok((half * (1.0 + s_uav).log2(), half * (1.0 + s_gnd).log2()))
}

/// Per-link channel knowledge of one drop.
#[derive(Debug, Clone, PartialEq)]
pub enum DropChannels {
    /// Linear gain through the fixed pattern (pattern − PL − SF), indexed
    /// `[cell * n_ues + ue]`.
    Fixed(Vec<f64>),
    /// Per-element channel vectors, indexed `[cell * n_ues + ue]`.
    Beamformed(Vec<Vec<Complex64>>),
}

/// Channel state, association and transmit weights of one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct DropState {
    n_cells: usize,
    n_ues: usize,
    channels: DropChannels,
    serving: Vec<Option<usize>>,
    /// Per-UE transmit weights from the serving cell (beamformed mode).
    weights: Vec<Option<BeamWeights>>,
}

impl DropState {
    /// Builds the state and associates every UE to its max-RSRP cell.
    ///
    /// In beamformed mode each UE's serving cell points an MRT beam at it.
    pub fn associate(n_cells: usize, n_ues: usize, channels: DropChannels) -> Result<Self> {
        let expected = n_cells * n_ues;
        let len = match &channels {
            DropChannels::Fixed(g) => g.len(),
            DropChannels::Beamformed(h) => h.len(),
        };
        if len != expected {
            return Err(invalid_arg(format!(
                "expected {expected} links for {n_cells} cells x {n_ues} UEs, got {len}"
            )));
        }
        let mut serving = Vec::with_capacity(n_ues);
        let mut weights = Vec::with_capacity(n_ues);
        for u in 0..n_ues {
            // The common transmit power does not move the argmax.
            let strength: Vec<f64> = (0..n_cells)
                .map(|c| match &channels {
                    DropChannels::Fixed(g) => g[c * n_ues + u],
                    DropChannels::Beamformed(h) => norm_sqr(&h[c * n_ues + u]),
                })
                .collect();
            let best = associate(&strength);
            serving.push(best);
            weights.push(match (&channels, best) {
                (DropChannels::Beamformed(h), Some(c)) => Some(mrt_weights(&h[c * n_ues + u])?),
                _ => None,
            });
        }
        Ok(Self {
            n_cells,
            n_ues,
            channels,
            serving,
            weights,
        })
    }

    pub fn n_ues(&self) -> usize {
        self.n_ues
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Serving cell index (0-based) of each UE.
    pub fn serving(&self) -> &[Option<usize>] {
        &self.serving
    }

    /// Number of UEs each cell serves.
    pub fn load(&self) -> Vec<usize> {
        let mut load = vec![0; self.n_cells];
        for c in self.serving.iter().flatten() {
            load[*c] += 1;
        }
        load
    }

    /// Replaces the transmit weights used for `ue`.
    pub fn set_weights(&mut self, ue: usize, w: BeamWeights) {
        self.weights[ue] = Some(w);
    }

    /// Drops every UE served by `cell`, silencing it.
    pub fn silence_cell(&mut self, cell: usize) {
        for u in 0..self.n_ues {
            if self.serving[u] == Some(cell) {
                self.serving[u] = None;
                self.weights[u] = None;
            }
        }
    }

    /// Downlink SINR of `ue` in dB.
    pub fn sinr_db(&self, ue: usize, power: &PowerConfig, noise_dbm: f64) -> Result<f64> {
        let serving = self
            .serving
            .get(ue)
            .copied()
            .flatten()
            .ok_or_else(|| Error::InvalidState(format!("UE {ue} has no serving cell")))?;
        let load = self.load();
        let p_cell = power.cell_power_mw();
        let link = |c: usize| c * self.n_ues + ue;

        let (signal, interference) = match &self.channels {
            DropChannels::Fixed(g) => {
                let signal = p_cell / load[serving] as f64 * g[link(serving)];
                let interference: f64 = (0..self.n_cells)
                    .filter(|&c| c != serving && load[c] > 0)
                    .map(|c| p_cell * g[link(c)])
                    .sum();
                (signal, interference)
            }
            DropChannels::Beamformed(h) => {
                let beam = |v: usize| -> Result<&BeamWeights> {
                    self.weights[v].as_ref().ok_or_else(|| {
                        Error::InvalidState(format!("UE {v} has no transmit weights"))
                    })
                };
                let signal = p_cell / load[serving] as f64 * beam(ue)?.gain(&h[link(serving)]);
                let mut interference = 0.0;
                for (v, s) in self.serving.iter().enumerate() {
                    match s {
                        Some(c) if *c != serving => {
                            interference += p_cell / load[*c] as f64 * beam(v)?.gain(&h[link(*c)]);
                        }
                        _ => {}
                    }
                }
                (signal, interference)
            }
        };
        Ok(linear_to_db(
            signal / (interference + db_to_linear(noise_dbm)),
        ))
    }

    /// SINR and rate of every UE that has a serving cell.
    pub fn metrics(
        &self,
        power: &PowerConfig,
        noise_dbm: f64,
        bandwidth_hz: f64,
    ) -> Result<Vec<LinkMetrics>> {
        let load = self.load();
        (0..self.n_ues)
            .filter_map(|u| self.serving[u].map(|c| (u, c)))
            .map(|(u, c)| {
                let sinr_db = self.sinr_db(u, power, noise_dbm)?;
                let strength = match &self.channels {
                    DropChannels::Fixed(g) => g[c * self.n_ues + u],
                    DropChannels::Beamformed(h) => norm_sqr(&h[c * self.n_ues + u]),
                };
                Ok(LinkMetrics {
                    serving_cell: c + 1,
                    rsrp_dbm: power.per_ue_power_dbm(load[c]) + linear_to_db(strength),
                    sinr_db,
                    rate_bps: shannon_rate(sinr_db, bandwidth_hz),
                })
            })
            .collect()
    }
}
