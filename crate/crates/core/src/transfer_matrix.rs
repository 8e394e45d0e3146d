//! Coherent transfer-matrix solver for planar stacks of dispersive, absorbing
//! layers, plus the tilt-angle polariton analysis built on it.
//!
//! Fields in each layer are split into forward/backward plane-wave amplitudes.
//! The transverse wavevector `sin(theta)` (external angle in vacuum) is
//! conserved across the stack; per-layer longitudinal admittances are
//! `kz` for s and `kz / N^2` for p polarization, with `N = n + i k` and the
//! `Im kz >= 0` branch. Lumped mirrors enter as zero-thickness scattering
//! elements.

use num_complex::Complex64;
use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dielectric::DielectricModel;
use crate::error::{Error, Result};
use crate::peaks;
use crate::spectrum::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    #[default]
    S,
    P,
}

/// Optical response of a layer material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Medium {
    /// Non-dispersive complex index `n + i k`.
    Constant {
        n: f64,
        #[serde(default)]
        k: f64,
    },
    /// Lorentz-oscillator dielectric function.
    Lorentz(DielectricModel),
}

impl Medium {
    pub fn lossless(n: f64) -> Self {
        Medium::Constant { n, k: 0.0 }
    }

    pub fn index(&self, nu: f64) -> Result<Complex64> {
        match self {
            Medium::Constant { n, k } => Ok(Complex64::new(*n, *k)),
            Medium::Lorentz(model) => model.complex_index(nu),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        match self {
            Medium::Constant { n, k } => {
                if !(*n > 0.0) || !n.is_finite() {
                    return Err(Error::invalid(format!("{field}.n"), "must be > 0"));
                }
                if !(*k >= 0.0) {
                    return Err(Error::invalid(
                        format!("{field}.k"),
                        "gain media (k < 0) are not supported",
                    ));
                }
                Ok(())
            }
            Medium::Lorentz(model) => model.validate(),
        }
    }

    fn is_lossless(&self) -> bool {
        match self {
            Medium::Constant { k, .. } => *k == 0.0,
            Medium::Lorentz(m) => m.oscillators.iter().all(|o| o.amplitude == 0.0),
        }
    }
}

/// One element between the semi-infinite ambient and substrate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Element {
    Film { medium: Medium, thickness_cm: f64 },
    /// Zero-thickness reflector with amplitude `sqrt(R) e^{i phase}` from
    /// either side, embedded in the preceding medium.
    Mirror {
        reflectivity: f64,
        transmission: f64,
        #[serde(default)]
        phase: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LayerStack {
    pub ambient: Medium,
    pub elements: Vec<Element>,
    pub substrate: Medium,
    #[serde(default)]
    pub polarization: Polarization,
    /// External incidence angle (degrees, measured in vacuum).
    #[serde(default)]
    pub theta_deg: f64,
}

type M2 = [[Complex64; 2]; 2];

fn mul(a: &M2, b: &M2) -> M2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Longitudinal wavevector and admittance of a medium at transverse index `s0`.
fn admittance(index: Complex64, s0: f64, nu: f64, pol: Polarization) -> (Complex64, Complex64) {
    let mut root = (index * index - s0 * s0).sqrt();
    if root.im < 0.0 || (root.im == 0.0 && root.re < 0.0) {
        root = -root;
    }
    let kz = 2.0 * PI * nu * root;
    let q = match pol {
        Polarization::S => root,
        Polarization::P => root / (index * index),
    };
    (kz, q)
}

fn interface(q_from: Complex64, q_to: Complex64) -> M2 {
    let rho = q_to / q_from;
    let one = Complex64::new(1.0, 0.0);
    [
        [0.5 * (one + rho), 0.5 * (one - rho)],
        [0.5 * (one - rho), 0.5 * (one + rho)],
    ]
}

fn propagation(kz: Complex64, d: f64) -> M2 {
    let phase = Complex64::i() * kz * d;
    let zero = Complex64::new(0.0, 0.0);
    [[(-phase).exp(), zero], [zero, phase.exp()]]
}

fn lumped_mirror(reflectivity: f64, transmission: f64, phase: f64) -> M2 {
    let r = Complex64::from_polar(reflectivity.sqrt(), phase);
    let t = Complex64::i() * Complex64::from_polar(transmission.sqrt(), phase);
    let one = Complex64::new(1.0, 0.0);
    [[one / t, -r / t], [r / t, (t * t - r * r) / t]]
}

/// Intensity transmission, reflection and absorption at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tra {
    pub t: f64,
    pub r: f64,
    pub a: f64,
}

impl LayerStack {
    pub fn validate(&self) -> Result<()> {
        self.ambient.validate("ambient")?;
        self.substrate.validate("substrate")?;
        if self.elements.is_empty() {
            return Err(Error::invalid(
                "elements",
                "need at least one element between ambient and substrate",
            ));
        }
        for (i, e) in self.elements.iter().enumerate() {
            match e {
                Element::Film {
                    medium,
                    thickness_cm,
                } => {
                    medium.validate(&format!("elements[{i}].medium"))?;
                    if !(*thickness_cm > 0.0) || !thickness_cm.is_finite() {
                        return Err(Error::invalid(
                            format!("elements[{i}].thickness_cm"),
                            "interior layers need a positive thickness",
                        ));
                    }
                }
                Element::Mirror {
                    reflectivity,
                    transmission,
                    phase,
                } => {
                    if !(*reflectivity >= 0.0 && *reflectivity < 1.0) {
                        return Err(Error::invalid(
                            format!("elements[{i}].reflectivity"),
                            "must lie in [0, 1)",
                        ));
                    }
                    if !(*transmission > 0.0 && *transmission <= 1.0 - reflectivity + 1e-12) {
                        return Err(Error::invalid(
                            format!("elements[{i}].transmission"),
                            "must lie in (0, 1 - reflectivity]",
                        ));
                    }
                    if !phase.is_finite() {
                        return Err(Error::invalid(format!("elements[{i}].phase"), "must be finite"));
                    }
                }
            }
        }
        if !(0.0..90.0).contains(&self.theta_deg) {
            return Err(Error::invalid("theta_deg", "must lie in [0, 90)"));
        }
        if let Medium::Constant { n, k } = self.ambient {
            if k != 0.0 {
                return Err(Error::invalid("ambient.k", "ambient must be non-absorbing"));
            }
            if self.theta_deg.to_radians().sin() >= n {
                return Err(Error::invalid(
                    "theta_deg",
                    "sin(theta) >= ambient index: incident wave is evanescent",
                ));
            }
        } else {
            return Err(Error::invalid("ambient", "ambient must be a constant lossless medium"));
        }
        Ok(())
    }

    /// Same stack traversed from the substrate side.
    pub fn reversed(&self) -> LayerStack {
        LayerStack {
            ambient: self.substrate.clone(),
            elements: self.elements.iter().rev().cloned().collect(),
            substrate: self.ambient.clone(),
            polarization: self.polarization,
            theta_deg: self.theta_deg,
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.elements.iter().all(|e| match e {
            Element::Film { medium, .. } => medium.is_lossless(),
            Element::Mirror {
                reflectivity,
                transmission,
                ..
            } => (reflectivity + transmission - 1.0).abs() < 1e-15,
        })
    }

    /// Transmission/reflection/absorption at a single wavenumber. Assumes a
    /// validated stack.
    pub fn tra_at(&self, nu: f64) -> Result<Tra> {
        if !(nu > 0.0) {
            return Err(Error::NonPositiveWavenumber(nu));
        }
        let s0 = self.theta_deg.to_radians().sin();
        let pol = self.polarization;
        let (_, q_in) = admittance(self.ambient.index(nu)?, s0, nu, pol);
        let mut q_cur = q_in;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut m: M2 = [[one, zero], [zero, one]];
        for e in &self.elements {
            match e {
                Element::Film {
                    medium,
                    thickness_cm,
                } => {
                    let (kz, q) = admittance(medium.index(nu)?, s0, nu, pol);
                    m = mul(&m, &interface(q_cur, q));
                    m = mul(&m, &propagation(kz, *thickness_cm));
                    q_cur = q;
                }
                Element::Mirror {
                    reflectivity,
                    transmission,
                    phase,
                } => {
                    m = mul(&m, &lumped_mirror(*reflectivity, *transmission, *phase));
                }
            }
        }
        let (_, q_out) = admittance(self.substrate.index(nu)?, s0, nu, pol);
        m = mul(&m, &interface(q_cur, q_out));
        let r = m[1][0] / m[0][0];
        let t = one / m[0][0];
        let big_r = r.norm_sqr();
        let big_t = q_out.re / q_in.re * t.norm_sqr();
        Ok(Tra {
            t: big_t,
            r: big_r,
            a: 1.0 - big_t - big_r,
        })
    }
}

/// Spectrum with channels `T`, `R` and `A = 1 - T - R`.
pub fn tra(stack: &LayerStack, grid: &[f64]) -> Result<Spectrum> {
    stack.validate()?;
    let rows = grid
        .par_iter()
        .map(|&nu| stack.tra_at(nu))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(grid.to_vec())?
        .with_channel("T", rows.iter().map(|x| x.t).collect())?
        .with_channel("R", rows.iter().map(|x| x.r).collect())?
        .with_channel("A", rows.iter().map(|x| x.a).collect())
}

/// Quarter-wave Bragg reflector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct QuarterWaveMirror {
    pub n_high: f64,
    pub n_low: f64,
    /// Number of high/low pairs.
    pub pairs: u32,
    /// Wavenumber at which each layer is a quarter wave thick (cm^-1).
    pub design_wavenumber: f64,
}

impl QuarterWaveMirror {
    /// Ge / Si3N4 pairs centred on the W(CO)6 band.
    pub fn ge_si3n4(pairs: u32) -> Self {
        QuarterWaveMirror {
            n_high: 4.0,
            n_low: 2.0,
            pairs,
            design_wavenumber: 1983.0,
        }
    }

    /// Layers ordered from the spacer outward: H, L, H, L, ...
    fn layers_from_spacer(&self) -> Vec<Element> {
        let quarter = |n: f64| Element::Film {
            medium: Medium::lossless(n),
            thickness_cm: 1.0 / (4.0 * n * self.design_wavenumber),
        };
        (0..self.pairs)
            .flat_map(|_| [quarter(self.n_high), quarter(self.n_low)])
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.n_high > 0.0 && self.n_low > 0.0) {
            return Err(Error::invalid("mirror", "indices must be positive"));
        }
        if self.pairs == 0 {
            return Err(Error::invalid("mirror.pairs", "must be >= 1"));
        }
        if !(self.design_wavenumber > 0.0) {
            return Err(Error::invalid("mirror.design_wavenumber", "must be > 0"));
        }
        Ok(())
    }
}

/// Mirror / spacer / mirror microcavity whose spacer holds the molecular medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CavityStackTemplate {
    #[serde(default = "unit_index")]
    pub ambient_index: f64,
    #[serde(default = "unit_index")]
    pub exit_index: f64,
    pub mirror: QuarterWaveMirror,
    pub spacer_thickness_cm: f64,
    #[serde(default)]
    pub polarization: Polarization,
}

fn unit_index() -> f64 {
    1.0
}

impl CavityStackTemplate {
    /// Three Ge/Si3N4 pairs per mirror around a 24.5 um spacer whose
    /// 13th-order empty-cavity mode sits near 1932 cm^-1 at normal incidence,
    /// reaching the 1983 cm^-1 band at roughly 18 degrees of tilt.
    pub fn w_co6_cell() -> Self {
        CavityStackTemplate {
            ambient_index: 1.0,
            exit_index: 1.0,
            mirror: QuarterWaveMirror::ge_si3n4(3),
            spacer_thickness_cm: 13.0 / (2.0 * 1.375 * 1932.0),
            polarization: Polarization::S,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mirror.validate()?;
        if !(self.spacer_thickness_cm > 0.0) {
            return Err(Error::invalid("spacer_thickness_cm", "must be > 0"));
        }
        if !(self.ambient_index >= 1.0 && self.exit_index >= 1.0) {
            return Err(Error::invalid("ambient_index", "outer media need index >= 1"));
        }
        Ok(())
    }

    pub fn build(&self, spacer: &DielectricModel, theta_deg: f64) -> LayerStack {
        let outward = self.mirror.layers_from_spacer();
        let mut elements: Vec<Element> = outward.iter().rev().cloned().collect();
        elements.push(Element::Film {
            medium: Medium::Lorentz(spacer.clone()),
            thickness_cm: self.spacer_thickness_cm,
        });
        elements.extend(outward);
        LayerStack {
            ambient: Medium::lossless(self.ambient_index),
            elements,
            substrate: Medium::lossless(self.exit_index),
            polarization: self.polarization,
            theta_deg,
        }
    }
}

/// LP/UP transmission peaks of a stack and the absorption at those peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolaritonAbsorption {
    pub e_lp: f64,
    pub e_up: f64,
    pub a_lp: f64,
    pub a_up: f64,
}

impl PolaritonAbsorption {
    pub fn splitting(&self) -> f64 {
        self.e_up - self.e_lp
    }

    /// Mean absorption of the two branches.
    pub fn mean_absorption(&self) -> f64 {
        0.5 * (self.a_lp + self.a_up)
    }
}

/// Fraction of the tallest transmission maximum a peak must reach to count.
const PEAK_FLOOR: f64 = 0.01;

/// Locate the tallest transmission maximum on each side of `center` within
/// `center +/- half_window` and report the absorption there.
pub fn locate_polaritons(
    stack: &LayerStack,
    spectrum: &Spectrum,
    center: f64,
    half_window: f64,
) -> Result<PolaritonAbsorption> {
    let t = spectrum.require("T")?;
    let (lp, up) = peaks::bracketing_maxima(spectrum.grid(), t, center, half_window, PEAK_FLOOR);
    match (lp, up) {
        (Some(lp), Some(up)) => Ok(PolaritonAbsorption {
            e_lp: lp.position,
            e_up: up.position,
            a_lp: stack.tra_at(lp.position)?.a,
            a_up: stack.tra_at(up.position)?.a,
        }),
        _ => Err(Error::NoSplitting(format!(
            "no transmission peak pair brackets {center} cm^-1 within {half_window} cm^-1"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleRow {
    pub theta_deg: f64,
    pub result: std::result::Result<PolaritonAbsorption, String>,
}

/// Angle sweep of the polariton peaks and their absorption.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSweep {
    pub rows: Vec<AngleRow>,
}

impl AngleSweep {
    fn resolved(&self) -> impl Iterator<Item = (f64, &PolaritonAbsorption)> {
        self.rows
            .iter()
            .filter_map(|r| r.result.as_ref().ok().map(|p| (r.theta_deg, p)))
    }

    /// Angle with the smallest LP/UP separation.
    pub fn min_splitting_angle(&self) -> Option<f64> {
        self.resolved()
            .min_by(|a, b| a.1.splitting().total_cmp(&b.1.splitting()))
            .map(|(t, _)| t)
    }

    /// Angle with the largest mean polariton absorption.
    pub fn max_absorption_angle(&self) -> Option<f64> {
        self.resolved()
            .max_by(|a, b| a.1.mean_absorption().total_cmp(&b.1.mean_absorption()))
            .map(|(t, _)| t)
    }

    pub fn min_splitting(&self) -> Option<f64> {
        self.resolved().map(|(_, p)| p.splitting()).reduce(f64::min)
    }

    /// `(theta, E_LP, E_UP)` triples of the resolved rows.
    pub fn branch_points(&self) -> Vec<(f64, f64, f64)> {
        self.resolved().map(|(t, p)| (t, p.e_lp, p.e_up)).collect()
    }
}

/// For each tilt angle, find LP/UP as the transmission maxima bracketing
/// `center` and report `A = 1 - T - R` at both.
pub fn polariton_absorption_vs_angle(
    template: &CavityStackTemplate,
    spacer: &DielectricModel,
    center: f64,
    angles_deg: &[f64],
    grid: &[f64],
    half_window: f64,
) -> Result<AngleSweep> {
    template.validate()?;
    spacer.validate()?;
    let rows = angles_deg
        .par_iter()
        .map(|&theta| {
            let stack = template.build(spacer, theta);
            let spectrum = tra(&stack, grid)?;
            let result = match locate_polaritons(&stack, &spectrum, center, half_window) {
                Ok(p) => Ok(p),
                Err(Error::NoSplitting(msg)) => Err(msg),
                Err(e) => return Err(e),
            };
            Ok(AngleRow {
                theta_deg: theta,
                result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleSweep { rows })
}

/// Absorption band between the polariton peaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralAbsorption {
    /// Absorption minima flanking the band, below and above `center`.
    pub flank_low: (f64, f64),
    pub flank_high: (f64, f64),
    /// Absorption at `center` itself.
    pub at_center: f64,
    /// Centroid of the absorption above the higher flank minimum.
    pub centroid: f64,
}

impl CentralAbsorption {
    /// Ratio of the absorption at the centre to the higher flank minimum.
    pub fn contrast(&self) -> f64 {
        self.at_center / self.flank_low.1.max(self.flank_high.1)
    }
}

/// Characterise the absorption between `e_lp` and `e_up` around `center`.
pub fn central_absorption(
    stack: &LayerStack,
    spectrum: &Spectrum,
    e_lp: f64,
    e_up: f64,
    center: f64,
) -> Result<CentralAbsorption> {
    let a = spectrum.require("A")?;
    let grid = spectrum.grid();
    let min_in = |lo: f64, hi: f64| {
        grid.iter()
            .zip(a)
            .filter(|(x, _)| **x > lo && **x < hi)
            .min_by(|p, q| p.1.total_cmp(q.1))
            .map(|(x, v)| (*x, *v))
    };
    let (flank_low, flank_high) = match (min_in(e_lp, center), min_in(center, e_up)) {
        (Some(l), Some(h)) => (l, h),
        _ => {
            return Err(Error::NoSplitting(
                "no samples between the polariton peaks".into(),
            ))
        }
    };
    let base = flank_low.1.max(flank_high.1);
    let (mut weight, mut moment) = (0.0, 0.0);
    for (x, v) in grid.iter().zip(a) {
        if *x >= flank_low.0 && *x <= flank_high.0 && *v > base {
            weight += v - base;
            moment += (v - base) * x;
        }
    }
    Ok(CentralAbsorption {
        flank_low,
        flank_high,
        at_center: stack.tra_at(center)?.a,
        centroid: if weight > 0.0 { moment / weight } else { center },
    })
}
