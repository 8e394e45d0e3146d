//! Two-coupled-oscillator algebra for a cavity mode and a molecular vibration:
//! branch energies, detuning bookkeeping, Hopfield fractions and dispersion.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fabry_perot::AngleMap;

/// Bare vibration, bare cavity mode and their coupling, all in cm^-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CoupledModes {
    pub e_vib: f64,
    pub e_cav: f64,
    /// Half the zero-detuning splitting.
    pub g0: f64,
}

/// Squared eigenvector weights of one branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hopfield {
    pub photon: f64,
    pub vibration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaritonPair {
    pub lower: f64,
    pub upper: f64,
    pub hopfield_lower: Hopfield,
    pub hopfield_upper: Hopfield,
}

impl PolaritonPair {
    pub fn splitting(&self) -> f64 {
        self.upper - self.lower
    }
}

impl CoupledModes {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_vib > 0.0) {
            return Err(Error::invalid("e_vib", "must be > 0"));
        }
        if !(self.e_cav > 0.0) {
            return Err(Error::invalid("e_cav", "must be > 0"));
        }
        if !(self.g0 >= 0.0) {
            return Err(Error::invalid("g0", "must be >= 0"));
        }
        Ok(())
    }

    pub fn detuning(&self) -> f64 {
        self.e_cav - self.e_vib
    }
}

/// Branch energies `(E_vib + E_cav -/+ sqrt(4 g0^2 + (E_vib - E_cav)^2)) / 2`
/// with photon/vibration weights of the `[[E_cav, g0], [g0, E_vib]]` eigenvectors.
///
/// With `g0 = 0` the lower branch is the lower bare mode; on an exact tie it
/// is taken to be the vibration.
pub fn polariton_energies(modes: &CoupledModes) -> Result<PolaritonPair> {
    modes.validate()?;
    let CoupledModes { e_vib, e_cav, g0 } = *modes;
    let mean = 0.5 * (e_vib + e_cav);
    let delta = e_cav - e_vib;
    let half = 0.5 * (4.0 * g0 * g0 + delta * delta).sqrt();

    // Photon weight of the lower branch: (1 - delta / S) / 2 written without
    // cancellation.
    let lp_photon = if half == 0.0 {
        0.0
    } else if delta <= 0.0 {
        0.5 * (1.0 - delta / (2.0 * half))
    } else {
        let s = 2.0 * half;
        // (1 - d/S)/2 = (S - d)/(2S) = 4g^2 / (2S (S + d))
        2.0 * g0 * g0 / (s * (s + delta))
    };
    let lower = Hopfield {
        photon: lp_photon,
        vibration: 1.0 - lp_photon,
    };
    let upper = Hopfield {
        photon: lower.vibration,
        vibration: lower.photon,
    };
    Ok(PolaritonPair {
        lower: mean - half,
        upper: mean + half,
        hopfield_lower: lower,
        hopfield_upper: upper,
    })
}

/// Cavity detuning recovered from measured branches: `E_UP + E_LP - 2 E_vib`.
pub fn detuning(e_up: f64, e_lp: f64, e_vib: f64) -> Result<f64> {
    if e_up < e_lp {
        return Err(Error::invalid("e_up", "upper branch below lower branch"));
    }
    Ok(e_up + e_lp - 2.0 * e_vib)
}

/// Detuning that puts the lower branch at `e_lp` for coupling `g0`.
pub fn detuning_for_lower(e_lp: f64, e_vib: f64, g0: f64) -> Result<f64> {
    let below = e_vib - e_lp;
    if !(below > 0.0) {
        return Err(Error::invalid("e_lp", "lower branch must sit below E_vib"));
    }
    // sqrt(g^2 + x^2) = x + below with x = delta / 2
    Ok((g0 * g0 - below * below) / below)
}

/// Detuning that puts the upper branch at `e_up` for coupling `g0`.
pub fn detuning_for_upper(e_up: f64, e_vib: f64, g0: f64) -> Result<f64> {
    let above = e_up - e_vib;
    if !(above > 0.0) {
        return Err(Error::invalid("e_up", "upper branch must sit above E_vib"));
    }
    Ok((above * above - g0 * g0) / above)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionRow {
    pub theta_deg: f64,
    pub detuning: f64,
    pub e_lp: f64,
    pub e_up: f64,
    pub lp: Hopfield,
    pub up: Hopfield,
}

/// Polariton branches along a tilt-angle sweep of the cavity mode.
pub fn dispersion_curve(
    e_vib: f64,
    g0: f64,
    angles_deg: &[f64],
    map: &AngleMap,
) -> Result<Vec<DispersionRow>> {
    angles_deg
        .iter()
        .map(|&theta| {
            let e_cav = map.mode(theta)?;
            let pair = polariton_energies(&CoupledModes { e_vib, e_cav, g0 })?;
            Ok(DispersionRow {
                theta_deg: theta,
                detuning: e_cav - e_vib,
                e_lp: pair.lower,
                e_up: pair.upper,
                lp: pair.hopfield_lower,
                up: pair.hopfield_upper,
            })
        })
        .collect()
}
