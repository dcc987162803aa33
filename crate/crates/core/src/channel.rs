//! Urban-macro channel with aerial extensions.
//!
//! Large-scale behaviour is split into three UE height bands:
//!
//! | band               | LoS probability | pathloss / shadowing        |
//! |--------------------|-----------------|-----------------------------|
//! | h ≤ 22.5 m         | terrestrial UMa | terrestrial UMa             |
//! | 22.5 < h ≤ 100 m   | aerial UMa      | aerial UMa (LoS and NLoS)   |
//! | 100 < h ≤ 300 m    | 1               | aerial UMa (LoS only)       |
//!
//! Carrier frequencies are in GHz and distances in metres throughout.
//!
//! Small-scale fading is a single-tap Rician vector: a LoS ray along the
//! direct-path steering vector plus i.i.d. Rayleigh diffuse energy. NLoS links
//! are pure Rayleigh.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::antenna::{element_gain_db, steering_vector, ArrayGeometry};
use crate::error::{invalid_arg, Result};
use crate::geometry::{
    distances, local_angles, CellDescriptor, DirectionAngles, UeState, GROUND_UE_HEIGHT_M,
    MAX_AERIAL_HEIGHT_M,
};
use crate::{db_to_linear, linear_to_db};

/// Upper UE height of the terrestrial band.
pub const TERRESTRIAL_MAX_HEIGHT_M: f64 = 22.5;
/// Above this height every link is LoS.
pub const ALWAYS_LOS_HEIGHT_M: f64 = 100.0;

const SPEED_OF_LIGHT: f64 = 3.0e8;
/// Effective environment height in the terrestrial breakpoint distance.
const EFFECTIVE_ENV_HEIGHT_M: f64 = 1.0;
/// Pathloss distances are floored here so a UE sitting on a mast stays finite.
const MIN_PATHLOSS_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    pub rician_k_db: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
}

impl ChannelParams {
    pub fn new(carrier_ghz: f64, bandwidth_hz: f64) -> Result<Self> {
        if !(carrier_ghz > 0.0) {
            return Err(invalid_arg(format!(
                "carrier must be positive, got {carrier_ghz} GHz"
            )));
        }
        if !(bandwidth_hz > 0.0) {
            return Err(invalid_arg(format!(
                "bandwidth must be positive, got {bandwidth_hz} Hz"
            )));
        }
        Ok(Self {
            carrier_ghz,
            bandwidth_hz,
            ..Self::default()
        })
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_ghz: 2.0,
            rician_k_db: 15.0,
            bandwidth_hz: 1.0e6,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 9.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScaleState {
    pub los: bool,
    pub pathloss_db: f64,
    /// Signed shadowing draw; subtracted from the received power.
    pub shadowing_db: f64,
    pub angles: DirectionAngles,
    pub d_2d: f64,
    pub d_3d: f64,
}

impl LargeScaleState {
    /// Element gain minus pathloss and shadowing, dB.
    pub fn link_gain_db(&self) -> f64 {
        element_gain_db(self.angles) - self.pathloss_db - self.shadowing_db
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub gains: Vec<Complex64>,
    pub large_scale: LargeScaleState,
}

impl ChannelVector {
    pub fn power(&self) -> f64 {
        crate::antenna::norm_sqr(&self.gains)
    }
}

fn check_height(h_ut: f64) -> Result<()> {
    if (GROUND_UE_HEIGHT_M..=MAX_AERIAL_HEIGHT_M).contains(&h_ut) {
        Ok(())
    } else {
        Err(invalid_arg(format!(
            "UE height {h_ut} m outside the modelled range [1.5, 300] m"
        )))
    }
}

pub fn los_probability(d_2d: f64, h_ut: f64) -> Result<f64> {
    check_height(h_ut)?;
    let p = if h_ut <= TERRESTRIAL_MAX_HEIGHT_M {
        if d_2d <= 18.0 {
            1.0
        } else {
            18.0 / d_2d + (-d_2d / 63.0).exp() * (1.0 - 18.0 / d_2d)
        }
    } else if h_ut <= ALWAYS_LOS_HEIGHT_M {
        let d1 = (460.0 * h_ut.log10() - 700.0).max(18.0);
        let p1 = 4300.0 * h_ut.log10() - 3800.0;
        if d_2d <= d1 {
            1.0
        } else {
            d1 / d_2d + (-d_2d / p1).exp() * (1.0 - d1 / d_2d)
        }
    } else {
        1.0
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Breakpoint distance of the terrestrial two-slope LoS model.
pub fn breakpoint_distance(h_bs: f64, h_ut: f64, f_c: f64) -> f64 {
    4.0 * (h_bs - EFFECTIVE_ENV_HEIGHT_M) * (h_ut - EFFECTIVE_ENV_HEIGHT_M) * f_c * 1e9
        / SPEED_OF_LIGHT
}

fn aerial_los_pathloss(d_3d: f64, f_c: f64) -> f64 {
    28.0 + 22.0 * d_3d.log10() + 20.0 * f_c.log10()
}

pub fn pathloss_db(d_2d: f64, d_3d: f64, h_ut: f64, h_bs: f64, f_c: f64, los: bool) -> Result<f64> {
    check_height(h_ut)?;
    if !(d_3d >= MIN_PATHLOSS_DISTANCE_M) {
        return Err(invalid_arg(format!("3D distance {d_3d} m below 1 m")));
    }
    if !(f_c > 0.0) {
        return Err(invalid_arg(format!(
            "carrier must be positive, got {f_c} GHz"
        )));
    }
    let fc_term = 20.0 * f_c.log10();
    if h_ut <= TERRESTRIAL_MAX_HEIGHT_M {
        let d_bp = breakpoint_distance(h_bs, h_ut, f_c);
        let pl_los = if d_2d <= d_bp {
            28.0 + 22.0 * d_3d.log10() + fc_term
        } else {
            28.0 + 40.0 * d_3d.log10() + fc_term
                - 9.0 * (d_bp * d_bp + (h_bs - h_ut).powi(2)).log10()
        };
        if los {
            return Ok(pl_los);
        }
        let pl_nlos = 13.54 + 39.08 * d_3d.log10() + fc_term - 0.6 * (h_ut - 1.5);
        return Ok(pl_los.max(pl_nlos));
    }
    if los {
        return Ok(aerial_los_pathloss(d_3d, f_c));
    }
    if h_ut > ALWAYS_LOS_HEIGHT_M {
        return Err(invalid_arg(format!(
            "NLoS pathloss undefined above 100 m (h = {h_ut} m)"
        )));
    }
    Ok(-17.5 + (46.0 - 7.0 * h_ut.log10()) * d_3d.log10() + 20.0 * (40.0 * PI * f_c / 3.0).log10())
}

pub fn shadowing_sigma_db(h_ut: f64, los: bool) -> Result<f64> {
    check_height(h_ut)?;
    Ok(match (h_ut <= TERRESTRIAL_MAX_HEIGHT_M, los) {
        (true, true) => 4.0,
        (true, false) => 6.0,
        (false, true) => 4.64 * (-0.0066 * h_ut).exp(),
        (false, false) if h_ut <= ALWAYS_LOS_HEIGHT_M => 6.0,
        (false, false) => {
            return Err(invalid_arg(format!(
                "NLoS shadowing undefined above 100 m (h = {h_ut} m)"
            )))
        }
    })
}

/// LoS state and shadowing of one BS-UE propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDraw {
    pub los: bool,
    pub shadowing_db: f64,
}

/// Draws the random part of a path at horizontal distance `d_2d`.
///
/// Consumes exactly two variates from `rng`: the LoS uniform, then the
/// shadowing normal.
pub fn draw_path<R: Rng + ?Sized>(d_2d: f64, h_ut: f64, rng: &mut R) -> Result<PathDraw> {
    let p_los = los_probability(d_2d, h_ut)?;
    let los = rng.random::<f64>() < p_los;
    let sigma = shadowing_sigma_db(h_ut, los)?;
    let shadowing_db = sigma * rng.sample::<f64, _>(StandardNormal);
    Ok(PathDraw { los, shadowing_db })
}

/// Large-scale state of a cell-UE link for an already drawn path.
pub fn large_scale_for_path(
    cell: &CellDescriptor,
    ue: &UeState,
    params: &ChannelParams,
    path: PathDraw,
) -> Result<LargeScaleState> {
    let (d_2d, d_3d) = distances(cell, ue);
    let angles = local_angles(cell, ue)?;
    let pathloss_db = pathloss_db(
        d_2d,
        d_3d.max(MIN_PATHLOSS_DISTANCE_M),
        ue.height(),
        cell.position.z,
        params.carrier_ghz,
        path.los,
    )?;
    Ok(LargeScaleState {
        los: path.los,
        pathloss_db,
        shadowing_db: path.shadowing_db,
        angles,
        d_2d,
        d_3d,
    })
}

/// Draws LoS state, pathloss and shadowing for one cell-UE link.
pub fn draw_large_scale<R: Rng + ?Sized>(
    cell: &CellDescriptor,
    ue: &UeState,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<LargeScaleState> {
    let (d_2d, _) = distances(cell, ue);
    let path = draw_path(d_2d, ue.height(), rng)?;
    large_scale_for_path(cell, ue, params, path)
}

/// Amplitudes of the specular and diffuse parts for a Rician factor in dB.
///
/// An infinite factor yields a pure LoS ray.
pub fn rician_amplitudes(k_db: f64) -> (f64, f64) {
    if k_db == f64::INFINITY {
        return (1.0, 0.0);
    }
    let k = db_to_linear(k_db);
    ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
}

/// Unit-average-power small-scale vector (E‖h‖² = element count).
pub fn draw_small_scale<R: Rng + ?Sized>(
    los: bool,
    rician_k_db: f64,
    array: &ArrayGeometry,
    angles: DirectionAngles,
    rng: &mut R,
) -> Vec<Complex64> {
    let (specular, diffuse) = if los {
        rician_amplitudes(rician_k_db)
    } else {
        (0.0, 1.0)
    };
    let ray = if specular > 0.0 {
        let psi = Complex64::from_polar(specular, TAU * rng.random::<f64>());
        steering_vector(array, angles)
            .into_iter()
            .map(|a| psi * a)
            .collect()
    } else {
        vec![Complex64::new(0.0, 0.0); array.element_count()]
    };
    if diffuse == 0.0 {
        return ray;
    }
    let scale = diffuse * std::f64::consts::FRAC_1_SQRT_2;
    ray.into_iter()
        .map(|r| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            r + scale * Complex64::new(re, im)
        })
        .collect()
}

/// Full per-element channel of one link, with element gain, pathloss and
/// shadowing folded into the amplitude.
pub fn draw_channel_vector<R: Rng + ?Sized>(
    ls: &LargeScaleState,
    array: &ArrayGeometry,
    params: &ChannelParams,
    rng: &mut R,
) -> ChannelVector {
    let amplitude = db_to_linear(ls.link_gain_db()).sqrt();
    let gains = draw_small_scale(ls.los, params.rician_k_db, array, ls.angles, rng)
        .into_iter()
        .map(|h| amplitude * h)
        .collect();
    ChannelVector {
        gains,
        large_scale: *ls,
    }
}

/// Thermal noise over the channel bandwidth plus receiver noise figure.
pub fn noise_power_dbm(params: &ChannelParams) -> f64 {
    params.noise_psd_dbm_hz + linear_to_db(params.bandwidth_hz) + params.noise_figure_db
}
