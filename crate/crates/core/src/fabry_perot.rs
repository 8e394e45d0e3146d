//! Single-layer Fabry-Perot cavity: Airy transmission through a dispersive
//! absorbing spacer, the longitudinal mode comb and tilt-angle tuning.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dielectric::DielectricModel;
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Mirror pair and spacer of a planar cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CavityGeometry {
    /// Spacer length (cm).
    pub length_cm: f64,
    /// Mirror intensity reflectivity.
    pub reflectivity: f64,
    /// Mirror intensity transmission; `reflectivity + transmission <= 1`.
    pub transmission: f64,
    /// Mirror reflection phase (rad).
    #[serde(default)]
    pub phase: f64,
    /// Intracavity background index used for empty-cavity mode arithmetic.
    pub n_c: f64,
}

impl CavityGeometry {
    /// Lossless mirrors of reflectivity `r` around a spacer of length `length_cm`.
    pub fn lossless(length_cm: f64, r: f64, n_c: f64) -> Self {
        CavityGeometry {
            length_cm,
            reflectivity: r,
            transmission: 1.0 - r,
            phase: 0.0,
            n_c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_cm > 0.0) || !self.length_cm.is_finite() {
            return Err(Error::invalid("length_cm", "must be > 0"));
        }
        if !(self.reflectivity > 0.0 && self.reflectivity < 1.0) {
            return Err(Error::invalid("reflectivity", "must lie in (0, 1)"));
        }
        // Small slack so `1 - R` computed in floating point is accepted.
        if !(self.transmission > 0.0 && self.transmission <= 1.0 - self.reflectivity + 1e-12) {
            return Err(Error::invalid(
                "transmission",
                "must lie in (0, 1 - reflectivity]",
            ));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        if !(self.n_c >= 1.0) {
            return Err(Error::invalid("n_c", "must be >= 1"));
        }
        Ok(())
    }

    /// Spacer length that puts longitudinal mode `order` at `nu` for a spacer
    /// of index `n`, accounting for the mirror phase.
    pub fn length_for_mode(nu: f64, n: f64, order: u32, phase: f64) -> f64 {
        (order as f64 - phase / PI) / (2.0 * n * nu)
    }

    /// Copy with the spacer resized so the empty-cavity mode closest to the
    /// current length sits at `nu`.
    pub fn tuned_to(&self, nu: f64) -> CavityGeometry {
        let order = (2.0 * self.n_c * self.length_cm * nu + self.phase / PI)
            .round()
            .max(1.0) as u32;
        CavityGeometry {
            length_cm: Self::length_for_mode(nu, self.n_c, order, self.phase),
            ..*self
        }
    }

    /// Airy transmission at one wavenumber for spacer index `n` and absorption `alpha`.
    pub fn airy(&self, nu: f64, n: f64, alpha: f64) -> f64 {
        let (r, t, l) = (self.reflectivity, self.transmission, self.length_cm);
        let single = (-alpha * l).exp();
        t * t * single
            / (1.0 + r * r * single * single
                - 2.0 * r * single * (4.0 * PI * n * l * nu + 2.0 * self.phase).cos())
    }
}

/// Cavity transmission spectrum (channel `T`) for a dispersive spacer medium.
pub fn fp_transmission(
    cavity: &CavityGeometry,
    medium: &DielectricModel,
    grid: &[f64],
) -> Result<Spectrum> {
    cavity.validate()?;
    medium.validate()?;
    let t = grid
        .iter()
        .map(|&nu| {
            let c = medium.optical_constants(nu)?;
            Ok(cavity.airy(nu, c.n, c.alpha))
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(grid.to_vec())?.with_channel("T", t)
}

/// Spacing of adjacent longitudinal modes, `1 / (2 n_c L)` in cm^-1.
pub fn free_spectral_range(cavity: &CavityGeometry) -> Result<f64> {
    cavity.validate()?;
    Ok(1.0 / (2.0 * cavity.n_c * cavity.length_cm))
}

/// Lossless-mirror reflectivity giving an empty-cavity FWHM of `fwhm` when
/// the free spectral range is `fsr` (exact Airy linewidth).
pub fn reflectivity_for_linewidth(fwhm: f64, fsr: f64) -> Result<f64> {
    if !(fwhm > 0.0 && fwhm < fsr) {
        return Err(Error::invalid("fwhm", "must lie in (0, fsr)"));
    }
    let s = (PI * fwhm / (2.0 * fsr)).sin();
    let root = s.hypot(1.0) - s;
    Ok(root * root)
}

/// Normal-incidence mode `e0` observed at external tilt `theta_deg` in a
/// planar cavity of index `n_c`: `e0 / sqrt(1 - sin^2(theta) / n_c^2)`.
pub fn cavity_mode_at_angle(e0: f64, theta_deg: f64, n_c: f64) -> Result<f64> {
    if !(0.0..90.0).contains(&theta_deg) {
        return Err(Error::invalid("theta", "must lie in [0, 90) degrees"));
    }
    let s = theta_deg.to_radians().sin();
    if s >= n_c {
        return Err(Error::invalid(
            "theta",
            format!("sin(theta) = {s} >= n_c = {n_c}: no propagating internal angle"),
        ));
    }
    Ok(e0 / (1.0 - (s / n_c).powi(2)).sqrt())
}

/// Angle-to-cavity-mode map of a planar cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AngleMap {
    /// Cavity mode at normal incidence (cm^-1).
    pub e0: f64,
    /// Effective intracavity index.
    pub n_c: f64,
}

impl AngleMap {
    pub fn mode(&self, theta_deg: f64) -> Result<f64> {
        cavity_mode_at_angle(self.e0, theta_deg, self.n_c)
    }

    /// Tilt (degrees) at which the cavity mode reaches `energy`, if reachable.
    pub fn angle_for(&self, energy: f64) -> Option<f64> {
        if energy < self.e0 {
            return None;
        }
        let sin2 = self.n_c * self.n_c * (1.0 - (self.e0 / energy).powi(2));
        (sin2 < 1.0).then(|| sin2.sqrt().asin().to_degrees())
    }
}
