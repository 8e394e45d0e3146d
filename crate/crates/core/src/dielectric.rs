//! Lorentz-oscillator dielectric functions and the optical constants derived
//! from them, including the partially excited (pumped) medium.
//!
//! Wavenumbers are in cm^-1 throughout. Oscillator amplitudes carry cm^-2 so
//! each term `A / (nu0^2 - nu^2 - i Gamma nu)` is dimensionless.

use num_complex::Complex64;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Centre of the W(CO)6 T1u carbonyl stretch (cm^-1).
pub const W_CO6_CENTER: f64 = 1983.0;
/// Vibrational FWHM of the W(CO)6 band in solution (cm^-1).
pub const W_CO6_WIDTH: f64 = 3.0;
/// Refractive index of the hexane host.
pub const HEXANE_INDEX: f64 = 1.375;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LorentzOscillator {
    /// Oscillator strength (cm^-2).
    pub amplitude: f64,
    /// Resonance wavenumber (cm^-1).
    pub center: f64,
    /// Full linewidth (cm^-1).
    pub width: f64,
}

impl LorentzOscillator {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Self {
        LorentzOscillator {
            amplitude,
            center,
            width,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::invalid(format!("{field}.amplitude"), "must be >= 0"));
        }
        if !(self.center > 0.0) || !self.center.is_finite() {
            return Err(Error::invalid(format!("{field}.center"), "must be > 0"));
        }
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(Error::invalid(format!("{field}.width"), "must be > 0"));
        }
        Ok(())
    }

    /// Complex susceptibility term `A / (nu0^2 - nu^2 - i Gamma nu)`.
    pub fn susceptibility(&self, nu: f64) -> Complex64 {
        let detune = self.center * self.center - nu * nu;
        let damp = self.width * nu;
        let denom = detune * detune + damp * damp;
        Complex64::new(
            self.amplitude * detune / denom,
            self.amplitude * damp / denom,
        )
    }
}

/// Background index plus an ordered list of Lorentz oscillators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DielectricModel {
    pub n_bg: f64,
    #[serde(default)]
    pub oscillators: Vec<LorentzOscillator>,
}

/// Refractive index, extinction coefficient and absorption coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalConstants {
    pub n: f64,
    pub k: f64,
    /// Absorption coefficient 4 pi nu k (cm^-1).
    pub alpha: f64,
}

impl DielectricModel {
    pub fn new(n_bg: f64, oscillators: Vec<LorentzOscillator>) -> Self {
        DielectricModel { n_bg, oscillators }
    }

    /// A single-band W(CO)6/hexane medium with the given oscillator strength.
    pub fn w_co6(amplitude: f64) -> Self {
        DielectricModel::new(
            HEXANE_INDEX,
            vec![LorentzOscillator::new(amplitude, W_CO6_CENTER, W_CO6_WIDTH)],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_bg >= 1.0) || !self.n_bg.is_finite() {
            return Err(Error::invalid("n_bg", "must be >= 1"));
        }
        for (i, osc) in self.oscillators.iter().enumerate() {
            osc.validate(&format!("oscillators[{i}]"))?;
        }
        Ok(())
    }

    /// Complex permittivity `eps1 + i eps2` at wavenumber `nu`.
    pub fn epsilon(&self, nu: f64) -> Result<Complex64> {
        if !(nu > 0.0) {
            return Err(Error::NonPositiveWavenumber(nu));
        }
        Ok(self
            .oscillators
            .iter()
            .fold(Complex64::new(self.n_bg * self.n_bg, 0.0), |acc, o| {
                acc + o.susceptibility(nu)
            }))
    }

    /// Real and imaginary permittivity `(eps1, eps2)` at `nu`.
    pub fn permittivity(&self, nu: f64) -> Result<(f64, f64)> {
        let eps = self.epsilon(nu)?;
        Ok((eps.re, eps.im))
    }

    pub fn optical_constants(&self, nu: f64) -> Result<OpticalConstants> {
        let (e1, e2) = self.permittivity(nu)?;
        let (n, k) = index_from_permittivity(e1, e2);
        Ok(OpticalConstants {
            n,
            k,
            alpha: 4.0 * PI * nu * k,
        })
    }

    /// Complex refractive index `n + i k` at `nu`.
    pub fn complex_index(&self, nu: f64) -> Result<Complex64> {
        let c = self.optical_constants(nu)?;
        Ok(Complex64::new(c.n, c.k))
    }

    /// Copy of the model with a fraction `f` of the molecules promoted to v=1.
    ///
    /// The ground band at `ground_index` is bleached to `A0 (1 - 2f)` and a
    /// hot band at `hot_center` with amplitude `2 f (1 + delta)^2 A0` and width
    /// `hot_width` is appended. Amplitudes follow the squares of the collective
    /// couplings `gN sqrt(1 - 2f)` and `gN sqrt(2f) (1 + delta)`.
    pub fn excited_model(&self, excitation: &Excitation) -> Result<DielectricModel> {
        excitation.validate()?;
        let ground = *self.oscillators.get(excitation.ground_index).ok_or_else(|| {
            Error::invalid(
                "ground_index",
                format!(
                    "{} out of range for {} oscillators",
                    excitation.ground_index,
                    self.oscillators.len()
                ),
            )
        })?;
        let f = excitation.fraction;
        let mut out = self.clone();
        out.oscillators[excitation.ground_index].amplitude = ground.amplitude * (1.0 - 2.0 * f);
        let hot = (1.0 + excitation.electrical_anharmonicity).powi(2);
        out.oscillators.push(LorentzOscillator::new(
            2.0 * f * hot * ground.amplitude,
            excitation.hot_center,
            excitation.hot_width.unwrap_or(ground.width),
        ));
        Ok(out)
    }
}

/// Parameters of the pump-induced v=1 population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Excitation {
    /// Which oscillator is the 0->1 band.
    #[serde(default)]
    pub ground_index: usize,
    /// Excited fraction f in [0, 0.5].
    pub fraction: f64,
    /// 1->2 transition wavenumber (cm^-1).
    pub hot_center: f64,
    /// 1->2 linewidth; defaults to the ground-band width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hot_width: Option<f64>,
    /// Electrical anharmonicity delta, with mu12 = sqrt(2) mu01 (1 + delta).
    pub electrical_anharmonicity: f64,
}

impl Excitation {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.fraction) {
            return Err(Error::invalid(
                "fraction",
                format!("{} outside [0, 0.5]", self.fraction),
            ));
        }
        if !(self.hot_center > 0.0) {
            return Err(Error::invalid("hot_center", "must be > 0"));
        }
        if let Some(w) = self.hot_width {
            if !(w > 0.0) {
                return Err(Error::invalid("hot_width", "must be > 0"));
            }
        }
        if !(self.electrical_anharmonicity > -1.0) {
            return Err(Error::invalid("electrical_anharmonicity", "must be > -1"));
        }
        Ok(())
    }
}

/// `(n, k)` with `(n + i k)^2 = eps1 + i eps2`, both non-negative for `eps2 >= 0`.
///
/// The smaller root is recovered from `eps2 = 2 n k` to avoid cancellation.
pub fn index_from_permittivity(e1: f64, e2: f64) -> (f64, f64) {
    let modulus = e1.hypot(e2);
    if e1 >= 0.0 {
        let n = ((e1 + modulus) / 2.0).sqrt();
        let k = if n > 0.0 { e2 / (2.0 * n) } else { 0.0 };
        (n, k)
    } else {
        let k = ((-e1 + modulus) / 2.0).sqrt();
        let n = if k > 0.0 { e2 / (2.0 * k) } else { 0.0 };
        (n, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn empty_model_is_background() {
        let m = DielectricModel::new(1.375, vec![]);
        assert_eq!(m.permittivity(1983.0).unwrap(), (1.890625, 0.0));
        let c = m.optical_constants(1983.0).unwrap();
        assert_eq!((c.n, c.k, c.alpha), (1.375, 0.0, 0.0));
    }

    #[test]
    fn resonance_term() {
        let m = DielectricModel::new(1.0, vec![LorentzOscillator::new(500.0, 2000.0, 4.0)]);
        let (e1, e2) = m.permittivity(2000.0).unwrap();
        assert_eq!(e1, 1.0);
        assert_relative_eq!(e2, 500.0 / (4.0 * 2000.0), max_relative = 1e-15);
    }

    // Reference values from an independent 30-digit evaluation of the
    // Lorentz sum and the (n, k) square roots.
    #[test]
    fn w_co6_reference_values() {
        let m = DielectricModel::new(1.375, vec![LorentzOscillator::new(2000.0, 1983.0, 3.0)]);
        let (e1, e2) = m.permittivity(1975.0).unwrap();
        assert_relative_eq!(e1, 1.9516514178812623554, max_relative = 1e-13);
        assert_relative_eq!(e2, 0.011419325604676587156, max_relative = 1e-13);

        let c = m.optical_constants(1983.0).unwrap();
        assert_relative_eq!(c.n, 1.3803818524421943849, max_relative = 1e-13);
        assert_relative_eq!(c.k, 0.12177462195278666627, max_relative = 1e-13);
        assert_relative_eq!(c.alpha, 3034.5155562393942894, max_relative = 1e-13);
    }

    #[test]
    fn symmetric_point() {
        let (n, k) = index_from_permittivity(0.0, 2.0);
        assert_relative_eq!(n, 1.0, max_relative = 1e-15);
        assert_relative_eq!(k, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn rejects_non_positive_wavenumber() {
        let m = DielectricModel::w_co6(2000.0);
        assert!(matches!(
            m.permittivity(0.0),
            Err(Error::NonPositiveWavenumber(_))
        ));
        assert!(m.optical_constants(-5.0).is_err());
    }

    fn excitation(f: f64, delta: f64) -> Excitation {
        Excitation {
            ground_index: 0,
            fraction: f,
            hot_center: 1968.0,
            hot_width: None,
            electrical_anharmonicity: delta,
        }
    }

    #[test]
    fn excited_model_scaling() {
        let m = DielectricModel::w_co6(2000.0);
        let e = m.excited_model(&excitation(0.05, -0.25)).unwrap();
        assert_relative_eq!(e.oscillators[0].amplitude, 1800.0, max_relative = 1e-15);
        assert_relative_eq!(e.oscillators[1].amplitude, 112.5, max_relative = 1e-14);
        assert_eq!(e.oscillators[1].center, 1968.0);
        assert_eq!(e.oscillators[1].width, 3.0);

        let half = m.excited_model(&excitation(0.5, -0.25)).unwrap();
        assert_eq!(half.oscillators[0].amplitude, 0.0);
        assert_relative_eq!(half.oscillators[1].amplitude, 0.5625 * 2000.0);
    }

    #[test]
    fn zero_fraction_is_identity() {
        let m = DielectricModel::w_co6(2000.0);
        let e = m.excited_model(&excitation(0.0, -0.25)).unwrap();
        assert_eq!(e.n_bg, m.n_bg);
        assert_eq!(e.oscillators[0], m.oscillators[0]);
        assert_eq!(e.oscillators[1].amplitude, 0.0);
        for nu in [1900.0, 1968.0, 1983.0, 2050.0] {
            assert_eq!(e.permittivity(nu).unwrap(), m.permittivity(nu).unwrap());
        }
    }

    #[test]
    fn excited_model_rejects_bad_inputs() {
        let m = DielectricModel::w_co6(2000.0);
        assert!(m.excited_model(&excitation(0.6, -0.25)).is_err());
        assert!(m.excited_model(&excitation(-0.01, -0.25)).is_err());
        let mut bad = excitation(0.1, 0.0);
        bad.ground_index = 3;
        assert!(m.excited_model(&bad).is_err());
    }

    fn arb_model() -> impl Strategy<Value = DielectricModel> {
        (
            1.0f64..4.0,
            prop::collection::vec((0.0f64..1e5, 100.0f64..4000.0, 0.1f64..50.0), 0..4),
        )
            .prop_map(|(n_bg, osc)| {
                DielectricModel::new(
                    n_bg,
                    osc.into_iter()
                        .map(|(a, c, w)| LorentzOscillator::new(a, c, w))
                        .collect(),
                )
            })
    }

    proptest! {
        #[test]
        fn passive_everywhere(m in arb_model(), nu in 10.0f64..5000.0) {
            let (_, e2) = m.permittivity(nu).unwrap();
            let c = m.optical_constants(nu).unwrap();
            prop_assert!(e2 >= 0.0);
            prop_assert!(c.n >= 0.0 && c.k >= 0.0 && c.alpha >= 0.0);
        }

        #[test]
        fn index_squares_back(m in arb_model(), nu in 10.0f64..5000.0) {
            let (e1, e2) = m.permittivity(nu).unwrap();
            let idx = m.complex_index(nu).unwrap();
            let sq = idx * idx;
            let scale = e1.hypot(e2);
            prop_assert!((sq.re - e1).abs() <= 1e-12 * scale);
            prop_assert!((sq.im - e2).abs() <= 1e-12 * scale);
        }

        #[test]
        fn oscillators_add(
            a1 in 0.0f64..1e4, c1 in 1000.0f64..3000.0, w1 in 0.5f64..20.0,
            a2 in 0.0f64..1e4, c2 in 1000.0f64..3000.0, w2 in 0.5f64..20.0,
            nu in 500.0f64..4000.0,
        ) {
            let o1 = LorentzOscillator::new(a1, c1, w1);
            let o2 = LorentzOscillator::new(a2, c2, w2);
            let both = DielectricModel::new(1.4, vec![o1, o2]).permittivity(nu).unwrap();
            let s1 = DielectricModel::new(1.4, vec![o1]).permittivity(nu).unwrap();
            let s2 = DielectricModel::new(1.4, vec![o2]).permittivity(nu).unwrap();
            let bg = 1.4f64 * 1.4;
            let tol = 1e-12 * (1.0 + s1.0.abs() + s2.0.abs() + s1.1 + s2.1);
            prop_assert!((both.0 - (s1.0 + s2.0 - bg)).abs() <= tol);
            prop_assert!((both.1 - (s1.1 + s2.1)).abs() <= tol);
        }

        #[test]
        fn bleach_is_monotone(f1 in 0.0f64..0.5, f2 in 0.0f64..0.5) {
            prop_assume!(f1 < f2);
            let m = DielectricModel::w_co6(2500.0);
            let a1 = m.excited_model(&excitation(f1, -0.25)).unwrap().oscillators[0].amplitude;
            let a2 = m.excited_model(&excitation(f2, -0.25)).unwrap().oscillators[0].amplitude;
            prop_assert!(a2 < a1);
        }
    }
}
