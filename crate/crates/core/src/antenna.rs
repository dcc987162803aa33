//! Sector antenna model: element pattern, planar-array response and the two
//! transmit weight designs (fixed electrical downtilt and MRT).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::geometry::DirectionAngles;
use crate::linear_to_db;

/// Maximum directional gain of a single element, dBi.
pub const ELEMENT_MAX_GAIN_DBI: f64 = 8.0;
/// Half-power beamwidth in both azimuth and elevation, degrees.
pub const ELEMENT_HPBW_DEG: f64 = 65.0;
/// Front-to-back ratio and vertical side-lobe floor, dB.
pub const ELEMENT_MAX_ATTENUATION_DB: f64 = 30.0;

/// Uniform rectangular array of `m_vert × n_horiz` elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub m_vert: usize,
    pub n_horiz: usize,
    /// Element spacing in wavelengths, both dimensions.
    pub spacing_wavelengths: f64,
}

impl ArrayGeometry {
    pub fn new(m_vert: usize, n_horiz: usize, spacing_wavelengths: f64) -> Result<Self> {
        if m_vert == 0 || n_horiz == 0 {
            return Err(invalid_arg(format!(
                "array needs at least one element per dimension, got {m_vert}x{n_horiz}"
            )));
        }
        Ok(Self {
            m_vert,
            n_horiz,
            spacing_wavelengths,
        })
    }

    /// 8×1 vertical ULA used with the fixed downtilted pattern.
    pub const fn ula_8x1() -> Self {
        Self {
            m_vert: 8,
            n_horiz: 1,
            spacing_wavelengths: 0.5,
        }
    }

    /// 8×4 UPA used for 3D beamforming.
    pub const fn upa_8x4() -> Self {
        Self {
            m_vert: 8,
            n_horiz: 4,
            spacing_wavelengths: 0.5,
        }
    }

    pub const fn element_count(&self) -> usize {
        self.m_vert * self.n_horiz
    }
}

/// Unit-norm transmit weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights(Vec<Complex64>);

impl BeamWeights {
    /// Normalises `v` to unit norm.
    pub fn normalized(v: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&v).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegenerateChannel);
        }
        Ok(Self(v.into_iter().map(|x| x / norm).collect()))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |wᴴh|².
    pub fn gain(&self, h: &[Complex64]) -> f64 {
        inner(&self.0, h).norm_sqr()
    }
}

/// wᴴh.
pub fn inner(w: &[Complex64], h: &[Complex64]) -> Complex64 {
    w.iter().zip(h).map(|(w, h)| w.conj() * h).sum()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Directional gain of one element, dBi.
pub fn element_gain_db(angles: DirectionAngles) -> f64 {
    let vert = -(12.0 * ((angles.zenith_deg - 90.0) / ELEMENT_HPBW_DEG).powi(2))
        .min(ELEMENT_MAX_ATTENUATION_DB);
    let horiz =
        -(12.0 * (angles.azimuth_deg / ELEMENT_HPBW_DEG).powi(2)).min(ELEMENT_MAX_ATTENUATION_DB);
    ELEMENT_MAX_GAIN_DBI - (-(vert + horiz)).min(ELEMENT_MAX_ATTENUATION_DB)
}

/// Array response; element `(m, n)` lives at index `m * n_horiz + n`.
pub fn steering_vector(array: &ArrayGeometry, angles: DirectionAngles) -> Vec<Complex64> {
    let theta = angles.zenith_deg.to_radians();
    let phi = angles.azimuth_deg.to_radians();
    let k = 2.0 * PI * array.spacing_wavelengths;
    let (vert, horiz) = (theta.cos(), theta.sin() * phi.sin());
    let mut out = Vec::with_capacity(array.element_count());
    for m in 0..array.m_vert {
        for n in 0..array.n_horiz {
            out.push(Complex64::from_polar(
                1.0,
                k * (m as f64 * vert + n as f64 * horiz),
            ));
        }
    }
    out
}

/// Uniform-amplitude weights pointing the ULA main lobe `tilt_deg` below
/// the horizon.
pub fn downtilt_weights(array: &ArrayGeometry, tilt_deg: f64) -> Result<BeamWeights> {
    if array.n_horiz != 1 {
        return Err(invalid_arg(format!(
            "downtilt weights need a vertical ULA, got {}x{}",
            array.m_vert, array.n_horiz
        )));
    }
    let target = DirectionAngles::new(90.0 + tilt_deg, 0.0);
    BeamWeights::normalized(steering_vector(array, target))
}

/// Maximum-ratio transmission: w = h / ‖h‖.
pub fn mrt_weights(h: &[Complex64]) -> Result<BeamWeights> {
    BeamWeights::normalized(h.to_vec())
}

/// Element gain plus array factor of a fixed weight vector, dB.
pub fn fixed_pattern_gain_db(
    array: &ArrayGeometry,
    weights: &BeamWeights,
    angles: DirectionAngles,
) -> Result<f64> {
    if weights.len() != array.element_count() {
        return Err(invalid_arg(format!(
            "weight length {} does not match {} elements",
            weights.len(),
            array.element_count()
        )));
    }
    let af = weights.gain(&steering_vector(array, angles));
    Ok(element_gain_db(angles) + linear_to_db(af))
}
