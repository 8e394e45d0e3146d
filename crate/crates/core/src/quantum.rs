//! Input-output model of a single cavity mode coupled to an ensemble of
//! anharmonic vibrations.
//!
//! Linear transmission follows the steady-state output/input field ratio of
//! the driven cavity. Under a static excited fraction `f` the probe sees a
//! 3x3 effective mode-coupling matrix over (cavity, 0->1 polarization,
//! 1->2 polarization); transmission is the cavity-cavity element of its
//! resolvent and the resonances are its eigenvalues.

use num_complex::Complex64;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::eigen3::{eigen3, Eigen3, Matrix3};
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Parameters of the cavity/vibration model, all frequencies in cm^-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct QmParams {
    /// Fundamental molecular frequency.
    pub omega0: f64,
    /// Cavity frequency.
    pub omega_c: f64,
    /// Anharmonic shift; the 1->2 band sits at `omega0 - 2 * anharmonic_shift`.
    pub anharmonic_shift: f64,
    /// Collective coupling g sqrt(N).
    pub coupling: f64,
    /// Electrical anharmonicity delta, mu12 = sqrt(2) mu01 (1 + delta).
    pub electrical_anharmonicity: f64,
    /// Cavity FWHM.
    pub kappa: f64,
    /// Molecular FWHM.
    pub gamma_m: f64,
    /// Transient excited fraction N_pump / N.
    #[serde(default)]
    pub f_pu: f64,
}

impl QmParams {
    /// W(CO)6 in the 25 um cavity: omega12 = 1968, gN = 18.5, delta = -0.25,
    /// kappa = 10, gamma_m = 3, zero detuning, no pump.
    pub fn w_co6() -> Self {
        QmParams {
            omega0: 1983.0,
            omega_c: 1983.0,
            anharmonic_shift: 7.5,
            coupling: 18.5,
            electrical_anharmonicity: -0.25,
            kappa: 10.0,
            gamma_m: 3.0,
            f_pu: 0.0,
        }
    }

    pub fn with_detuning(self, delta: f64) -> Self {
        QmParams {
            omega_c: self.omega0 + delta,
            ..self
        }
    }

    pub fn with_fraction(self, f_pu: f64) -> Self {
        QmParams { f_pu, ..self }
    }

    pub fn omega12(&self) -> f64 {
        self.omega0 - 2.0 * self.anharmonic_shift
    }

    pub fn detuning(&self) -> f64 {
        self.omega_c - self.omega0
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega0,
            self.omega_c,
            self.anharmonic_shift,
            self.coupling,
            self.electrical_anharmonicity,
            self.kappa,
            self.gamma_m,
            self.f_pu,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("qm", "all parameters must be finite"));
        }
        if !(self.omega0 > 0.0) {
            return Err(Error::invalid("omega0", "must be > 0"));
        }
        if !(self.omega_c > 0.0) {
            return Err(Error::invalid("omega_c", "must be > 0"));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::invalid("kappa", "must be > 0"));
        }
        if !(self.gamma_m >= 0.0) {
            return Err(Error::invalid("gamma_m", "must be >= 0"));
        }
        if !(self.coupling >= 0.0) {
            return Err(Error::invalid("coupling", "must be >= 0"));
        }
        if !(0.0..=0.5).contains(&self.f_pu) {
            return Err(Error::invalid(
                "f_pu",
                format!("{} outside [0, 0.5]", self.f_pu),
            ));
        }
        if !(self.electrical_anharmonicity > -1.0) {
            return Err(Error::invalid("electrical_anharmonicity", "must be > -1"));
        }
        Ok(())
    }
}

/// Complex-symmetric 3x3 effective matrix over (cavity, 0->1, 1->2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMatrix(pub Matrix3);

impl EffectiveMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// `[(omega I - h)^-1]` cavity-cavity element.
    pub fn cavity_resolvent(&self, omega: f64) -> Complex64 {
        let w = Complex64::new(omega, 0.0);
        let m = &self.0;
        let a = [
            [w - m[0][0], -m[0][1], -m[0][2]],
            [-m[1][0], w - m[1][1], -m[1][2]],
            [-m[2][0], -m[2][1], w - m[2][2]],
        ];
        let cof00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
        let det = a[0][0] * cof00 - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        cof00 / det
    }
}

/// Effective matrix under excited fraction `p.f_pu`.
///
/// Diagonal: `omega_c - i kappa/2`, `omega0 - i gamma_m/2`,
/// `omega12 - i gamma_m/2`. Couplings: cavity/0->1 `gN sqrt(1 - 2f)`,
/// cavity/1->2 `gN sqrt(2f) (1 + delta)`, and no direct 0->1/1->2 term.
pub fn build_h_eff(p: &QmParams) -> Result<EffectiveMatrix> {
    p.validate()?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let g01 = c(p.coupling * (1.0 - 2.0 * p.f_pu).sqrt(), 0.0);
    let g12 = c(
        p.coupling * (2.0 * p.f_pu).sqrt() * (1.0 + p.electrical_anharmonicity),
        0.0,
    );
    let zero = c(0.0, 0.0);
    Ok(EffectiveMatrix([
        [c(p.omega_c, -0.5 * p.kappa), g01, g12],
        [g01, c(p.omega0, -0.5 * p.gamma_m), zero],
        [g12, zero, c(p.omega12(), -0.5 * p.gamma_m)],
    ]))
}

/// Eigenvalues (sorted by real part) of the effective matrix.
pub fn eigenvalues_3x3(m: &EffectiveMatrix) -> Eigen3 {
    eigen3(&m.0)
}

/// Damped output/input power ratio of the unpumped system at `omega`.
///
/// `|(kappa/2)(i(w - w0) - g/2) / ((i(w - wc) - kappa/2)(i(w - w0) - g/2) + gN^2)|^2`,
/// which equals one at the empty-cavity resonance.
pub fn linear_transmission_at(p: &QmParams, omega: f64) -> f64 {
    let i = Complex64::i();
    let half_k = 0.5 * p.kappa;
    let mol = i * (omega - p.omega0) - 0.5 * p.gamma_m;
    let cav = i * (omega - p.omega_c) - half_k;
    let ratio = half_k * mol / (cav * mol + p.coupling * p.coupling);
    ratio.norm_sqr()
}

/// Linear probe transmission (channel `T`). Requires `f_pu = 0`.
pub fn linear_transmission(p: &QmParams, grid: &[f64]) -> Result<Spectrum> {
    p.validate()?;
    if p.f_pu != 0.0 {
        return Err(Error::invalid(
            "f_pu",
            "linear transmission requires f_pu = 0; use transient_transmission",
        ));
    }
    let t = grid.iter().map(|&w| linear_transmission_at(p, w)).collect();
    Spectrum::new(grid.to_vec())?.with_channel("T", t)
}

/// Probe transmission with a static excited fraction (channel `T`).
pub fn transient_transmission(p: &QmParams, grid: &[f64]) -> Result<Spectrum> {
    let h = build_h_eff(p)?;
    let half_k = 0.5 * p.kappa;
    let t = grid
        .iter()
        .map(|&w| (half_k * h.cavity_resolvent(w)).norm_sqr())
        .collect();
    Spectrum::new(grid.to_vec())?.with_channel("T", t)
}

/// Pump-induced change `-(T(f_pu) - T(0))` (channel `dT`).
pub fn delta_t_qm(p: &QmParams, grid: &[f64]) -> Result<Spectrum> {
    let excited = transient_transmission(p, grid)?;
    let ground = transient_transmission(&p.with_fraction(0.0), grid)?;
    let dt = excited
        .require("T")?
        .iter()
        .zip(ground.require("T")?)
        .map(|(e, g)| -(e - g))
        .collect();
    Spectrum::new(grid.to_vec())?.with_channel("dT", dt)
}

/// Real part of the upper-polariton eigenvalue (largest real part).
pub fn upper_resonance(p: &QmParams) -> Result<f64> {
    Ok(eigenvalues_3x3(&build_h_eff(p)?).values[2].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen3::residual;
    use crate::peaks;
    use crate::spectrum::uniform_grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid() -> Vec<f64> {
        uniform_grid(1900.0, 2060.0, 0.05).unwrap()
    }

    #[test]
    fn uncoupled_cavity_is_unit_lorentzian() {
        let p = QmParams {
            coupling: 0.0,
            ..QmParams::w_co6()
        };
        let g = uniform_grid(1950.0, 2016.0, 0.01).unwrap();
        let s = linear_transmission(&p, &g).unwrap();
        let y = s.channel("T").unwrap();
        let pk = peaks::local_maxima(&g, y);
        assert_eq!(pk.len(), 1);
        assert!((pk[0].position - 1983.0).abs() < 1e-6);
        assert_relative_eq!(pk[0].height, 1.0, max_relative = 1e-6);
        assert!((peaks::fwhm(&g, y, pk[0].index).unwrap() - 10.0).abs() < 1e-3);
    }

    #[test]
    fn rabi_doublet() {
        let g = grid();
        let s = linear_transmission(&QmParams::w_co6(), &g).unwrap();
        let pk = peaks::local_maxima(&g, s.channel("T").unwrap());
        assert_eq!(pk.len(), 2);
        let split = pk[1].position - pk[0].position;
        assert!((split - 37.0).abs() < 1.0, "{split}");
    }

    // With damping the transmission maxima sit slightly outside the
    // eigenvalue real parts; the offset vanishes as the linewidths shrink.
    #[test]
    fn peaks_track_eigenvalues() {
        let narrow = QmParams {
            kappa: 2.0,
            gamma_m: 0.5,
            ..QmParams::w_co6()
        };
        for (p, tol) in [(narrow, 0.1), (QmParams::w_co6(), 0.35)] {
            let g = grid();
            let s = linear_transmission(&p, &g).unwrap();
            let pk = peaks::local_maxima(&g, s.channel("T").unwrap());
            let ev = eigenvalues_3x3(&build_h_eff(&p).unwrap()).values;
            assert!((pk[0].position - ev[0].re).abs() < tol, "{} {}", pk[0].position, ev[0].re);
            assert!((pk[1].position - ev[2].re).abs() < tol, "{} {}", pk[1].position, ev[2].re);
        }
    }

    #[test]
    fn linear_rejects_pumped_params() {
        assert!(linear_transmission(&QmParams::w_co6().with_fraction(0.1), &grid()).is_err());
    }

    #[test]
    fn h_eff_entries() {
        let h = build_h_eff(&QmParams::w_co6().with_fraction(0.05)).unwrap();
        assert_relative_eq!(h.entry(0, 1).re, 18.5 * 0.9f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(h.entry(0, 1).re, 17.551, max_relative = 1e-4);
        assert_relative_eq!(h.entry(0, 2).re, 18.5 * 0.1f64.sqrt() * 0.75, max_relative = 1e-15);
        assert_relative_eq!(h.entry(0, 2).re, 4.388, max_relative = 1e-3);
        assert_eq!(h.entry(1, 2), Complex64::new(0.0, 0.0));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(h.entry(i, j), h.entry(j, i));
            }
        }
        let expected = Complex64::new(1983.0 + 1983.0 + 1968.0, -(5.0 + 1.5 + 1.5));
        assert_eq!(h.trace(), expected);

        let h0 = build_h_eff(&QmParams::w_co6()).unwrap();
        assert_eq!(h0.entry(0, 2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn unpumped_eigenvalues_are_block_structured() {
        let p = QmParams::w_co6();
        let e = eigenvalues_3x3(&build_h_eff(&p).unwrap());
        // 2x2 block: mean of diagonal +/- sqrt(g^2 - ((kappa - gamma)/4)^2)
        let root = (18.5f64.powi(2) - (1.75f64).powi(2)).sqrt();
        assert_relative_eq!(e.values[0].re, 1983.0 - root, max_relative = 1e-14);
        assert_relative_eq!(e.values[2].re, 1983.0 + root, max_relative = 1e-14);
        assert_relative_eq!(e.values[0].im, -3.25, max_relative = 1e-12);
        assert!((e.values[1] - Complex64::new(1968.0, -1.5)).norm() < 1e-10);
        for (l, v) in e.values.iter().zip(&e.vectors) {
            assert!(residual(&build_h_eff(&p).unwrap().0, *l, v) < 1e-9);
        }
    }

    #[test]
    fn transient_reduces_to_linear() {
        let g = grid();
        for delta in [-8.0, 0.0, 3.0] {
            let p = QmParams::w_co6().with_detuning(delta);
            let a = linear_transmission(&p, &g).unwrap();
            let b = transient_transmission(&p, &g).unwrap();
            let max = a
                .channel("T")
                .unwrap()
                .iter()
                .zip(b.channel("T").unwrap())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(max < 1e-12, "{max}");
        }
    }

    #[test]
    fn transient_resonances_follow_eigenvalues() {
        let p = QmParams {
            kappa: 2.0,
            gamma_m: 0.5,
            ..QmParams::w_co6().with_fraction(0.05)
        };
        let g = uniform_grid(1900.0, 2060.0, 0.01).unwrap();
        let s = transient_transmission(&p, &g).unwrap();
        let pk = peaks::local_maxima(&g, s.channel("T").unwrap());
        let ev = eigenvalues_3x3(&build_h_eff(&p).unwrap()).values;
        assert_eq!(pk.len(), 3);
        for (peak, lambda) in pk.iter().zip(ev) {
            assert!((peak.position - lambda.re).abs() < 0.1, "{} {}", peak.position, lambda.re);
        }
    }

    #[test]
    fn pumped_spectrum_red_shifts_upper_branch() {
        let g = grid();
        let ground = transient_transmission(&QmParams::w_co6(), &g).unwrap();
        let pumped = transient_transmission(&QmParams::w_co6().with_fraction(0.05), &g).unwrap();
        let up = |s: &Spectrum| peaks::local_maxima(&g, s.channel("T").unwrap()).last().unwrap().position;
        assert!(up(&pumped) < up(&ground));
        assert_eq!(peaks::local_maxima(&g, pumped.channel("T").unwrap()).len(), 3);
    }

    #[test]
    fn delta_t_is_zero_without_pump() {
        let s = delta_t_qm(&QmParams::w_co6(), &grid()).unwrap();
        assert!(s.channel("dT").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn upper_resonance_contracts_with_fraction() {
        let mut last = f64::INFINITY;
        for i in 0..=50 {
            let f = 0.25 * i as f64 / 50.0;
            let up = upper_resonance(&QmParams::w_co6().with_fraction(f)).unwrap();
            assert!(up < last);
            last = up;
        }
    }

    #[test]
    fn contraction_without_hot_band_coupling() {
        for f in [0.05, 0.1, 0.25] {
            let p = QmParams::w_co6().with_fraction(f);
            let mut h = build_h_eff(&p).unwrap();
            h.0[0][2] = Complex64::new(0.0, 0.0);
            h.0[2][0] = Complex64::new(0.0, 0.0);
            let hot = Complex64::new(1968.0, -1.5);
            let block: Vec<f64> = eigenvalues_3x3(&h)
                .values
                .iter()
                .filter(|l| (**l - hot).norm() > 1e-6)
                .map(|l| l.re)
                .collect();
            assert_eq!(block.len(), 2);
            let outer = block[1] - block[0];
            let bare = 2.0 * 18.5 * (1.0 - 2.0 * f).sqrt();
            assert!((outer - bare).abs() < 1.0, "{outer} vs {bare}");
        }
    }

    proptest! {
        #[test]
        fn transmission_is_bounded(
            delta in -40.0f64..40.0, f in 0.0f64..0.5, g in 0.0f64..40.0,
            kappa in 0.5f64..30.0, gamma in 0.0f64..10.0, d in -0.9f64..1.0,
            w in 1850.0f64..2100.0,
        ) {
            let p = QmParams {
                coupling: g, kappa, gamma_m: gamma, electrical_anharmonicity: d,
                ..QmParams::w_co6().with_detuning(delta).with_fraction(f)
            };
            let t = transient_transmission(&p, &[w]).unwrap().channel("T").unwrap()[0];
            prop_assert!((0.0..=1.0 + 1e-9).contains(&t));
        }
    }
}
