//! Pump-probe experiments in the classical (excited dielectric in a cavity)
//! and quantum (effective-matrix) pictures: transient spectra, detuning
//! sweeps, model comparison and inversion of the upper-polariton shift.
//!
//! Every differential spectrum uses the same convention,
//! `dT = -(T_excited - T_ground)`.

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::dielectric::{DielectricModel, Excitation, LorentzOscillator, HEXANE_INDEX};
use crate::error::{Error, Result};
use crate::fabry_perot::{fp_transmission, free_spectral_range, reflectivity_for_linewidth, CavityGeometry};
use crate::peaks;
use crate::quantum::{transient_transmission, upper_resonance, QmParams};
use crate::spectrum::Spectrum;
use crate::transfer_matrix::{tra, CavityStackTemplate};

/// Half width of the LP and UP analysis windows around the ground-state peaks.
pub const REGION_HALF_WIDTH: f64 = 10.0;

/// Polariton peaks are searched for within this distance of the band centre.
pub const BRANCH_WINDOW: f64 = 60.0;

/// Peaks below this fraction of the tallest one in the window are ignored.
const PEAK_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Classical,
    Quantum,
    Both,
}

impl ModelKind {
    fn runs(self) -> Vec<ModelKind> {
        match self {
            ModelKind::Both => vec![ModelKind::Classical, ModelKind::Quantum],
            m => vec![m],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Classical => "classical",
            ModelKind::Quantum => "quantum",
            ModelKind::Both => "both",
        }
    }
}

/// Optical structure that holds the medium in the classical picture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassicalOptics {
    /// Single spacer between two lumped mirrors (Airy formula).
    FabryPerot(CavityGeometry),
    /// Full multilayer microcavity at a fixed tilt.
    Stack {
        template: CavityStackTemplate,
        #[serde(default)]
        theta_deg: f64,
    },
}

impl ClassicalOptics {
    pub fn validate(&self) -> Result<()> {
        match self {
            ClassicalOptics::FabryPerot(c) => c.validate(),
            ClassicalOptics::Stack { template, theta_deg } => {
                template.validate()?;
                if !(0.0..90.0).contains(theta_deg) {
                    return Err(Error::invalid("theta_deg", "must lie in [0, 90)"));
                }
                Ok(())
            }
        }
    }

    pub fn transmission(&self, medium: &DielectricModel, grid: &[f64]) -> Result<Vec<f64>> {
        let spectrum = match self {
            ClassicalOptics::FabryPerot(c) => fp_transmission(c, medium, grid)?,
            ClassicalOptics::Stack { template, theta_deg } => {
                tra(&template.build(medium, *theta_deg), grid)?
            }
        };
        Ok(spectrum.require("T")?.to_vec())
    }

    fn transmission_at(&self, medium: &DielectricModel, nu: f64) -> Result<f64> {
        match self {
            ClassicalOptics::FabryPerot(c) => {
                let oc = medium.optical_constants(nu)?;
                Ok(c.airy(nu, oc.n, oc.alpha))
            }
            ClassicalOptics::Stack { template, theta_deg } => {
                Ok(template.build(medium, *theta_deg).tra_at(nu)?.t)
            }
        }
    }
}

/// Classical transient setup: ground-state medium, its optics, and the
/// hot-band parameters used when part of the ensemble is excited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSetup {
    pub medium: DielectricModel,
    pub optics: ClassicalOptics,
    /// Index of the 0->1 oscillator in `medium`.
    #[serde(default)]
    pub ground_index: usize,
    /// 1->2 transition wavenumber (cm^-1).
    pub hot_center: f64,
    pub electrical_anharmonicity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hot_width: Option<f64>,
}

impl ClassicalSetup {
    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        self.optics.validate()?;
        self.ground_band()?;
        self.excitation(0.0).validate()
    }

    fn ground_band(&self) -> Result<LorentzOscillator> {
        self.medium
            .oscillators
            .get(self.ground_index)
            .copied()
            .ok_or_else(|| Error::invalid("ground_index", "no oscillator at this index"))
    }

    /// Centre of the 0->1 band.
    pub fn band_center(&self) -> Result<f64> {
        Ok(self.ground_band()?.center)
    }

    pub fn excitation(&self, fraction: f64) -> Excitation {
        Excitation {
            ground_index: self.ground_index,
            fraction,
            hot_center: self.hot_center,
            hot_width: self.hot_width,
            electrical_anharmonicity: self.electrical_anharmonicity,
        }
    }

    /// Classical counterpart of `p`: a ~25 um hexane-filled Fabry-Perot whose
    /// empty-cavity linewidth equals `kappa`, tuned to `omega_c`, with the
    /// band amplitude calibrated so the unpumped splitting equals `2 gN`.
    pub fn matched_to(p: &QmParams) -> Result<Self> {
        p.validate()?;
        let probe = CavityGeometry::lossless(25e-4, 0.9, HEXANE_INDEX).tuned_to(p.omega0);
        let r = reflectivity_for_linewidth(p.kappa, free_spectral_range(&probe)?)?;
        let cavity = CavityGeometry::lossless(probe.length_cm, r, HEXANE_INDEX);
        let medium = DielectricModel::new(
            HEXANE_INDEX,
            vec![LorentzOscillator::new(0.0, p.omega0, p.gamma_m)],
        );
        let medium = if p.coupling > 0.0 {
            calibrate_amplitude(
                &medium,
                &ClassicalOptics::FabryPerot(cavity),
                0,
                2.0 * p.coupling,
            )?
        } else {
            medium
        };
        let setup = ClassicalSetup {
            medium,
            optics: ClassicalOptics::FabryPerot(cavity),
            ground_index: 0,
            hot_center: p.omega12(),
            electrical_anharmonicity: p.electrical_anharmonicity,
            hot_width: None,
        };
        setup.detuned(p.detuning())
    }

    /// Copy with the cavity retuned so its empty mode sits `delta` above the
    /// band centre (mode order preserved).
    pub fn detuned(&self, delta: f64) -> Result<Self> {
        let center = self.band_center()?;
        match &self.optics {
            ClassicalOptics::FabryPerot(c) => Ok(ClassicalSetup {
                optics: ClassicalOptics::FabryPerot(c.tuned_to(center + delta)),
                ..self.clone()
            }),
            ClassicalOptics::Stack { .. } => Err(Error::invalid(
                "classical.optics",
                "multilayer stacks are tuned by tilt angle, not by detuning",
            )),
        }
    }
}

/// Band amplitude that makes the unpumped transmission splitting equal
/// `target_splitting`. Fabry-Perot cavities are first tuned onto the band.
pub fn calibrate_amplitude(
    medium: &DielectricModel,
    optics: &ClassicalOptics,
    ground_index: usize,
    target_splitting: f64,
) -> Result<DielectricModel> {
    if !(target_splitting > 0.0) {
        return Err(Error::invalid("target_splitting", "must be > 0"));
    }
    medium.validate()?;
    let band = *medium
        .oscillators
        .get(ground_index)
        .ok_or_else(|| Error::invalid("ground_index", "no oscillator at this index"))?;
    let optics = match optics {
        ClassicalOptics::FabryPerot(c) => ClassicalOptics::FabryPerot(c.tuned_to(band.center)),
        other => other.clone(),
    };
    optics.validate()?;
    let mut model = medium.clone();
    // Normal-mode splitting of a Lorentz band in a resonant cavity is close
    // to sqrt(A) / n_bg; iterate on that scaling.
    let mut amplitude = (medium.n_bg * target_splitting).powi(2);
    let mut last = f64::NAN;
    for _ in 0..50 {
        model.oscillators[ground_index].amplitude = amplitude;
        let split = measured_splitting(&optics, &model, band.center, target_splitting)?;
        last = split;
        if (split - target_splitting).abs() < 1e-7 * target_splitting {
            return Ok(model);
        }
        amplitude *= (target_splitting / split).powi(2);
    }
    Err(Error::FitRejected(format!(
        "amplitude calibration did not converge (splitting {last} vs {target_splitting})"
    )))
}

fn measured_splitting(
    optics: &ClassicalOptics,
    medium: &DielectricModel,
    center: f64,
    target: f64,
) -> Result<f64> {
    let step = target / 400.0;
    let n = (4.0 * target / step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| center - 2.0 * target + i as f64 * step).collect();
    let t = optics.transmission(medium, &grid)?;
    let (lp, up) = peaks::bracketing_maxima(&grid, &t, center, 2.0 * target, PEAK_FLOOR);
    let (lp, up) = match (lp, up) {
        (Some(l), Some(u)) => (l, u),
        _ => {
            return Err(Error::NoSplitting(
                "calibration: transmission is not split around the band".into(),
            ))
        }
    };
    let refine = |p: peaks::Peak| -> Result<f64> {
        let mut failure = None;
        let (x, _) = peaks::refine_maximum(
            |nu| match optics.transmission_at(medium, nu) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            p.position - step,
            p.position + step,
            1e-10,
        );
        match failure {
            Some(e) => Err(e),
            None => Ok(x),
        }
    };
    Ok(refine(up)? - refine(lp)?)
}

fn differential(grid: &[f64], ground: Vec<f64>, excited: Vec<f64>) -> Result<Spectrum> {
    let dt = excited.iter().zip(&ground).map(|(e, g)| -(e - g)).collect();
    Spectrum::new(grid.to_vec())?
        .with_channel("T_ground", ground)?
        .with_channel("T_excited", excited)?
        .with_channel("dT", dt)
}

/// Ground, excited and differential transmission of the classical setup
/// (channels `T_ground`, `T_excited`, `dT`).
pub fn classical_transient(setup: &ClassicalSetup, fraction: f64, grid: &[f64]) -> Result<Spectrum> {
    setup.validate()?;
    let excited_medium = setup.medium.excited_model(&setup.excitation(fraction))?;
    let ground = setup.optics.transmission(&setup.medium, grid)?;
    let excited = setup.optics.transmission(&excited_medium, grid)?;
    differential(grid, ground, excited)
}

/// Quantum counterpart of [`classical_transient`] at `p.f_pu`.
pub fn quantum_transient(p: &QmParams, grid: &[f64]) -> Result<Spectrum> {
    p.validate()?;
    let ground = transient_transmission(&p.with_fraction(0.0), grid)?;
    let excited = transient_transmission(p, grid)?;
    differential(
        grid,
        ground.require("T")?.to_vec(),
        excited.require("T")?.to_vec(),
    )
}

/// Peak metrics of one transient spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransientFeatures {
    /// Ground-state lower/upper polariton transmission peaks.
    pub lp: f64,
    pub up: f64,
    /// Position and signed value of the largest |dT| in the LP window.
    pub lp_extremum: (f64, f64),
    /// Sign change of dT in the UP window closest to the ground UP peak.
    pub up_zero_crossing: Option<f64>,
    /// Signs of the largest |dT| below and above that crossing.
    pub up_sign_pattern: Option<(i8, i8)>,
    /// Largest |dT| in the UP window.
    pub up_max_abs: f64,
}

impl TransientFeatures {
    /// Extract metrics from a spectrum with `T_ground` and `dT` channels,
    /// with the branches bracketing `center`.
    pub fn extract(spectrum: &Spectrum, center: f64) -> Result<Self> {
        let grid = spectrum.grid();
        let ground = spectrum.require("T_ground")?;
        let dt = spectrum.require("dT")?;
        let (lp, up) = match peaks::bracketing_maxima(grid, ground, center, BRANCH_WINDOW, PEAK_FLOOR) {
            (Some(l), Some(u)) => (l.position, u.position),
            _ => {
                return Err(Error::NoSplitting(format!(
                    "ground-state transmission shows no polariton pair around {center} cm^-1"
                )))
            }
        };
        let w = REGION_HALF_WIDTH;
        let lp_extremum = peaks::extremum_in(grid, dt, lp - w, lp + w)
            .ok_or_else(|| Error::NoSplitting("LP window holds no samples".into()))?;
        let up_zero_crossing = peaks::zero_crossings(grid, dt, up - w, up + w)
            .into_iter()
            .min_by(|a, b| (a - up).abs().total_cmp(&(b - up).abs()));
        let sign = |lo: f64, hi: f64| {
            peaks::extremum_in(grid, dt, lo, hi).map(|(_, v)| v.signum() as i8)
        };
        let up_sign_pattern = up_zero_crossing.and_then(|z| Some((sign(up - w, z)?, sign(z, up + w)?)));
        let up_max_abs = peaks::extremum_in(grid, dt, up - w, up + w)
            .map(|(_, v)| v.abs())
            .unwrap_or(0.0);
        Ok(TransientFeatures {
            lp,
            up,
            lp_extremum,
            up_zero_crossing,
            up_sign_pattern,
            up_max_abs,
        })
    }

    /// |dT| of the LP feature relative to the UP feature.
    pub fn lp_to_up_ratio(&self) -> f64 {
        self.lp_extremum.1.abs() / self.up_max_abs
    }
}

/// Transient experiment description shared by both models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TransientScenario {
    pub model: ModelKind,
    /// Excited fraction f in [0, 0.5].
    pub fraction: f64,
    /// Cavity detunings `omega_c - omega0` (cm^-1).
    #[serde(default)]
    pub detunings: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qm: Option<QmParams>,
    /// Explicit classical setup; derived from `qm` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSetup>,
}

impl TransientScenario {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.fraction) {
            return Err(Error::invalid(
                "fraction",
                format!("{} outside [0, 0.5]", self.fraction),
            ));
        }
        if let Some(d) = self.detunings.iter().find(|d| !d.is_finite()) {
            return Err(Error::invalid("detunings", format!("{d} is not finite")));
        }
        let needs_quantum = self.model != ModelKind::Classical;
        let needs_classical = self.model != ModelKind::Quantum;
        if needs_quantum && self.qm.is_none() {
            return Err(Error::invalid("qm", "required by the quantum model"));
        }
        if needs_classical && self.classical.is_none() && self.qm.is_none() {
            return Err(Error::invalid(
                "classical",
                "classical model needs `classical` or `qm` to derive it from",
            ));
        }
        if let Some(q) = &self.qm {
            q.validate()?;
        }
        if let Some(c) = &self.classical {
            c.validate()?;
        }
        Ok(())
    }

    /// Classical setup, derived from `qm` when not given explicitly.
    pub fn classical_setup(&self) -> Result<ClassicalSetup> {
        match (&self.classical, &self.qm) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(q)) => ClassicalSetup::matched_to(&q.with_detuning(0.0)),
            (None, None) => Err(Error::invalid("classical", "missing")),
        }
    }
}

/// One model at one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub model: ModelKind,
    pub detuning: f64,
    pub spectrum: Spectrum,
    /// Metrics, or a diagnostic when the splitting is unresolved.
    pub features: std::result::Result<TransientFeatures, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetuningSweepResult {
    pub fraction: f64,
    /// Ordered by requested detuning, then classical before quantum.
    pub rows: Vec<SweepRow>,
}

impl DetuningSweepResult {
    pub fn rows_for(&self, model: ModelKind) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.model == model)
    }
}

/// Run the scenario's model(s) at each requested detuning.
pub fn detuning_sweep(scenario: &TransientScenario, grid: &[f64]) -> Result<DetuningSweepResult> {
    scenario.validate()?;
    if scenario.detunings.is_empty() {
        return Err(Error::invalid("detunings", "sweep needs at least one detuning"));
    }
    let classical = if scenario.model != ModelKind::Quantum {
        let setup = scenario.classical_setup()?;
        let center = setup.band_center()?;
        Some((setup, center))
    } else {
        None
    };
    let jobs: Vec<(f64, ModelKind)> = scenario
        .detunings
        .iter()
        .flat_map(|&d| scenario.model.runs().into_iter().map(move |m| (d, m)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(detuning, model)| {
            let (spectrum, center) = match model {
                ModelKind::Classical => {
                    let (setup, center) = classical.as_ref().expect("classical setup prepared");
                    (
                        classical_transient(&setup.detuned(detuning)?, scenario.fraction, grid)?,
                        *center,
                    )
                }
                _ => {
                    let q = scenario.qm.expect("validated");
                    let p = q.with_detuning(detuning).with_fraction(scenario.fraction);
                    (quantum_transient(&p, grid)?, q.omega0)
                }
            };
            let features = match TransientFeatures::extract(&spectrum, center) {
                Ok(f) => Ok(f),
                Err(Error::NoSplitting(msg)) => Err(msg),
                Err(e) => return Err(e),
            };
            Ok(SweepRow {
                model,
                detuning,
                spectrum,
                features,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetuningSweepResult {
        fraction: scenario.fraction,
        rows,
    })
}

/// One compared feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureDiff {
    pub feature: &'static str,
    pub classical: f64,
    pub quantum: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub classical: Option<TransientFeatures>,
    pub quantum: Option<TransientFeatures>,
    /// Per-feature table; empty when either model has no polariton features.
    pub features: Vec<FeatureDiff>,
    /// Both models show the same sign ordering across the UP window.
    pub same_sign_pattern: Option<bool>,
    pub diagnostic: Option<String>,
}

impl ModelComparison {
    pub fn feature(&self, name: &str) -> Option<&FeatureDiff> {
        self.features.iter().find(|f| f.feature == name)
    }
}

/// Compare transient features of the two models. Both must share the band
/// centre, the 1->2 frequency and the excited fraction (`quantum.f_pu`).
pub fn compare_models(
    classical: &ClassicalSetup,
    quantum: &QmParams,
    grid: &[f64],
) -> Result<ModelComparison> {
    classical.validate()?;
    quantum.validate()?;
    let center = classical.band_center()?;
    if (center - quantum.omega0).abs() > 1e-9 {
        return Err(Error::invalid(
            "classical.medium",
            format!("band centre {center} differs from omega0 {}", quantum.omega0),
        ));
    }
    if (classical.hot_center - quantum.omega12()).abs() > 1e-9 {
        return Err(Error::invalid(
            "classical.hot_center",
            format!("{} differs from omega12 {}", classical.hot_center, quantum.omega12()),
        ));
    }
    let c_spec = classical_transient(classical, quantum.f_pu, grid)?;
    let q_spec = quantum_transient(quantum, grid)?;
    let extract = |s: &Spectrum| match TransientFeatures::extract(s, center) {
        Ok(f) => Ok(Ok(f)),
        Err(Error::NoSplitting(m)) => Ok(Err(m)),
        Err(e) => Err(e),
    };
    let (c, q) = (extract(&c_spec)?, extract(&q_spec)?);
    let (c, q) = match (c, q) {
        (Ok(c), Ok(q)) => (c, q),
        (c, q) => {
            let why = [c.as_ref().err(), q.as_ref().err()]
                .into_iter()
                .flatten()
                .cloned()
                .collect::<Vec<_>>()
                .join("; ");
            return Ok(ModelComparison {
                classical: c.ok(),
                quantum: q.ok(),
                features: Vec::new(),
                same_sign_pattern: None,
                diagnostic: Some(format!("no polariton features to compare: {why}")),
            });
        }
    };
    let row = |feature, a: f64, b: f64| FeatureDiff {
        feature,
        classical: a,
        quantum: b,
        difference: a - b,
    };
    let mut features = vec![
        row("lp_peak", c.lp, q.lp),
        row("up_peak", c.up, q.up),
        row("lp_extremum", c.lp_extremum.0, q.lp_extremum.0),
    ];
    if let (Some(a), Some(b)) = (c.up_zero_crossing, q.up_zero_crossing) {
        features.push(row("up_zero_crossing", a, b));
    }
    features.push(row("lp_to_up_ratio", c.lp_to_up_ratio(), q.lp_to_up_ratio()));
    let same_sign_pattern = match (c.up_sign_pattern, q.up_sign_pattern) {
        (Some(a), Some(b)) => Some(a == b && c.lp_extremum.1.signum() == q.lp_extremum.1.signum()),
        _ => None,
    };
    Ok(ModelComparison {
        classical: Some(c),
        quantum: Some(q),
        features,
        same_sign_pattern,
        diagnostic: None,
    })
}

/// Red shift of the upper-polariton resonance caused by fraction `f`.
pub fn up_shift(p: &QmParams, f: f64) -> Result<f64> {
    Ok(upper_resonance(&p.with_fraction(0.0))? - upper_resonance(&p.with_fraction(f))?)
}

/// Excited fraction that produces an observed UP red shift, by bisection of
/// the monotone map `f -> up_shift(f)` on `[0, 0.5]`.
pub fn estimate_excited_fraction(shift: f64, p: &QmParams) -> Result<f64> {
    p.validate()?;
    let max = up_shift(p, 0.5)?;
    if !(shift >= 0.0 && shift <= max) {
        return Err(Error::invalid(
            "shift",
            format!("{shift} cm^-1 outside the attainable range [0, {max}]"),
        ));
    }
    if shift == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if up_shift(p, mid)? < shift {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
