//! Hexagonal site grid, per-cell coordinate frames and user drops.
//!
//! Sites sit on a hexagonal lattice with ring-1 neighbours at bearings
//! 0°, 60°, ..., 300° from the centre site. Every site carries three cells
//! whose boresights point at azimuths 0°, 120° and 240° (counter-clockwise
//! from +x). Cell ids are 1-based, assigned site-major in boresight order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::antenna::ArrayGeometry;
use crate::error::{invalid_arg, Error, Result};

/// Height of every ground user.
pub const GROUND_UE_HEIGHT_M: f64 = 1.5;
/// Upper end of the aerial altitude range.
pub const MAX_AERIAL_HEIGHT_M: f64 = 300.0;
/// Boresight azimuths of the three cells of a site, degrees.
pub const SECTOR_BORESIGHTS_DEG: [f64; 3] = [0.0, 120.0, 240.0];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UeKind {
    Ground,
    Aerial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeState {
    pub position: Position,
    pub kind: UeKind,
}

impl UeState {
    pub fn ground(x: f64, y: f64) -> Self {
        Self {
            position: Position::new(x, y, GROUND_UE_HEIGHT_M),
            kind: UeKind::Ground,
        }
    }

    pub fn aerial(x: f64, y: f64, altitude: f64) -> Self {
        Self {
            position: Position::new(x, y, altitude),
            kind: UeKind::Aerial,
        }
    }

    pub fn height(&self) -> f64 {
        self.position.z
    }
}

/// Direction of a UE as seen from a cell's antenna frame.
///
/// Zenith is 0° straight up and 90° on the horizon; azimuth is 0° on the
/// cell boresight and lies in (−180°, 180°].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionAngles {
    pub zenith_deg: f64,
    pub azimuth_deg: f64,
}

impl DirectionAngles {
    pub const BORESIGHT: DirectionAngles = DirectionAngles {
        zenith_deg: 90.0,
        azimuth_deg: 0.0,
    };

    pub const fn new(zenith_deg: f64, azimuth_deg: f64) -> Self {
        Self {
            zenith_deg,
            azimuth_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDescriptor {
    /// 1-based identifier.
    pub cell_id: usize,
    pub site_index: usize,
    pub position: Position,
    pub boresight_azimuth_deg: f64,
    pub array: ArrayGeometry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub isd: f64,
    pub h_bs: f64,
    pub sites: Vec<[f64; 2]>,
    pub cells: Vec<CellDescriptor>,
}

impl NetworkLayout {
    /// Builds a hexagonal layout of `1 + 3·rings·(rings + 1)` sites, three
    /// cells each, all sharing the same antenna `array`.
    pub fn hexagonal(isd: f64, h_bs: f64, rings: usize, array: ArrayGeometry) -> Result<Self> {
        if !(isd > 0.0) || !isd.is_finite() {
            return Err(invalid_arg(format!(
                "inter-site distance must be positive, got {isd}"
            )));
        }
        if !h_bs.is_finite() || h_bs < 0.0 {
            return Err(invalid_arg(format!(
                "BS height must be non-negative, got {h_bs}"
            )));
        }

        // Axial lattice coordinates, grouped by ring and ordered by bearing.
        let rings = rings as i64;
        let mut lattice: Vec<(i64, f64, [f64; 2])> = Vec::new();
        for q in -rings..=rings {
            for r in -rings..=rings {
                let ring = q.abs().max(r.abs()).max((q + r).abs());
                if ring > rings {
                    continue;
                }
                let x = isd * (q as f64 + 0.5 * r as f64);
                let y = isd * (r as f64 * 3f64.sqrt() / 2.0);
                let mut bearing = y.atan2(x).to_degrees();
                if bearing < 0.0 {
                    bearing += 360.0;
                }
                lattice.push((ring, bearing, [x, y]));
            }
        }
        lattice.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let sites: Vec<[f64; 2]> = lattice.into_iter().map(|(_, _, xy)| xy).collect();
        let cells = sites
            .iter()
            .enumerate()
            .flat_map(|(site_index, xy)| {
                SECTOR_BORESIGHTS_DEG
                    .iter()
                    .enumerate()
                    .map(move |(k, &boresight)| CellDescriptor {
                        cell_id: 3 * site_index + k + 1,
                        site_index,
                        position: Position::new(xy[0], xy[1], h_bs),
                        boresight_azimuth_deg: boresight,
                        array,
                    })
            })
            .collect();

        Ok(Self {
            isd,
            h_bs,
            sites,
            cells,
        })
    }

    /// The paper layout: two rings (19 sites, 57 cells).
    pub fn standard(isd: f64, h_bs: f64, array: ArrayGeometry) -> Result<Self> {
        Self::hexagonal(isd, h_bs, 2, array)
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, cell_id: usize) -> Option<&CellDescriptor> {
        cell_id.checked_sub(1).and_then(|i| self.cells.get(i))
    }

    /// Ids of the cells facing a horizontal point from its `k` nearest sites.
    ///
    /// Sites are ranked by horizontal distance (ties by site index); from each
    /// the cell whose boresight is closest to the point's bearing is taken.
    pub fn nearest_facing_cells(&self, x: f64, y: f64, k: usize) -> Vec<usize> {
        let probe = UeState::ground(x, y);
        let mut order: Vec<(f64, usize)> = self
            .sites
            .iter()
            .enumerate()
            .map(|(i, s)| ((s[0] - x).hypot(s[1] - y), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        order
            .into_iter()
            .take(k)
            .filter_map(|(_, site)| {
                self.cells
                    .iter()
                    .filter(|c| c.site_index == site)
                    .min_by(|a, b| {
                        let off = |c: &CellDescriptor| {
                            local_angles(c, &probe)
                                .map(|a| a.azimuth_deg.abs())
                                .unwrap_or(0.0)
                        };
                        off(a).total_cmp(&off(b)).then(a.cell_id.cmp(&b.cell_id))
                    })
                    .map(|c| c.cell_id)
            })
            .collect()
    }
}

/// Horizontal and 3D distance between a cell antenna and a UE.
pub fn distances(cell: &CellDescriptor, ue: &UeState) -> (f64, f64) {
    let dx = ue.position.x - cell.position.x;
    let dy = ue.position.y - cell.position.y;
    let dz = ue.position.z - cell.position.z;
    let d_2d = dx.hypot(dy);
    (d_2d, d_2d.hypot(dz))
}

/// Wraps an angle in degrees into (−180, 180].
pub fn wrap_degrees(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(360.0);
    if a > 180.0 {
        a -= 360.0;
    }
    a
}

pub fn local_angles(cell: &CellDescriptor, ue: &UeState) -> Result<DirectionAngles> {
    let (d_2d, d_3d) = distances(cell, ue);
    if d_3d == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "UE coincides with cell {} antenna",
            cell.cell_id
        )));
    }
    let dz = ue.position.z - cell.position.z;
    let zenith_deg = (dz / d_3d).clamp(-1.0, 1.0).acos().to_degrees();
    // Azimuth is undefined on the vertical axis.
    let azimuth_deg = if d_2d == 0.0 {
        0.0
    } else {
        let bearing = (ue.position.y - cell.position.y)
            .atan2(ue.position.x - cell.position.x)
            .to_degrees();
        wrap_degrees(bearing - cell.boresight_azimuth_deg)
    };
    Ok(DirectionAngles {
        zenith_deg,
        azimuth_deg,
    })
}

/// Drops `n_total` UEs uniformly (by area) over a disk centred at the origin.
///
/// The first `n_uav` are aerial with altitude uniform on [1.5, 300] m; the
/// rest are ground UEs at 1.5 m.
pub fn drop_ues<R: Rng + ?Sized>(
    n_total: usize,
    n_uav: usize,
    disk_radius: f64,
    rng: &mut R,
) -> Result<Vec<UeState>> {
    if n_uav > n_total {
        return Err(invalid_arg(format!(
            "n_uav ({n_uav}) exceeds n_total ({n_total})"
        )));
    }
    if !(disk_radius > 0.0) {
        return Err(invalid_arg(format!(
            "disk radius must be positive, got {disk_radius}"
        )));
    }
    let ues = (0..n_total)
        .map(|i| {
            let r = disk_radius * rng.random::<f64>().sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            let (x, y) = (r * phi.cos(), r * phi.sin());
            if i < n_uav {
                let h = rng.random_range(GROUND_UE_HEIGHT_M..=MAX_AERIAL_HEIGHT_M);
                UeState::aerial(x, y, h)
            } else {
                UeState::ground(x, y)
            }
        })
        .collect();
    Ok(ues)
}
