//! Damped least-squares (Levenberg-Marquardt) fitting of Lorentz bands to
//! absorbance spectra and of coupled-mode dispersion to polariton branches.
//!
//! Bounded parameters are optimised in an unconstrained internal
//! coordinate: `lo + e^u` for one-sided bounds (plain `log` for
//! positive-only quantities), a logistic map for two-sided bounds. The
//! Jacobian is taken by central differences in the internal coordinates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;

use crate::dielectric::{DielectricModel, LorentzOscillator};
use crate::error::{Error, Result};
use crate::fabry_perot::AngleMap;
use crate::polariton::{polariton_energies, CoupledModes};
use crate::spectrum::Spectrum;

/// One model parameter with optional bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Parameter {
    pub name: String,
    pub initial: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    #[serde(default)]
    pub fixed: bool,
}

impl Parameter {
    pub fn free(name: impl Into<String>, initial: f64) -> Self {
        Parameter {
            name: name.into(),
            initial,
            lower: None,
            upper: None,
            fixed: false,
        }
    }

    pub fn positive(name: impl Into<String>, initial: f64) -> Self {
        Parameter {
            lower: Some(0.0),
            ..Self::free(name, initial)
        }
    }

    pub fn bounded_below(name: impl Into<String>, initial: f64, lower: f64) -> Self {
        Parameter {
            lower: Some(lower),
            ..Self::free(name, initial)
        }
    }

    pub fn fixed(mut self, fixed: bool) -> Self {
        self.fixed = fixed;
        self
    }

    fn transform(&self) -> Transform {
        match (self.lower, self.upper) {
            (None, None) => Transform::Identity,
            (Some(lo), None) => Transform::Above(lo),
            (None, Some(hi)) => Transform::Below(hi),
            (Some(lo), Some(hi)) => Transform::Between(lo, hi),
        }
    }

    fn validate(&self) -> Result<()> {
        let field = format!("parameters.{}", self.name);
        if !self.initial.is_finite() {
            return Err(Error::invalid(field, "initial value must be finite"));
        }
        if let (Some(lo), Some(hi)) = (self.lower, self.upper) {
            if !(lo < hi) {
                return Err(Error::invalid(field, "lower bound must be below upper bound"));
            }
        }
        if self.fixed {
            return Ok(());
        }
        let inside = self.lower.is_none_or(|lo| self.initial > lo)
            && self.upper.is_none_or(|hi| self.initial < hi);
        if !inside {
            return Err(Error::invalid(
                field,
                format!("initial value {} must lie strictly inside its bounds", self.initial),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Transform {
    Identity,
    Above(f64),
    Below(f64),
    Between(f64, f64),
}

impl Transform {
    fn to_external(self, u: f64) -> f64 {
        match self {
            Transform::Identity => u,
            Transform::Above(lo) => lo + u.exp(),
            Transform::Below(hi) => hi - u.exp(),
            Transform::Between(lo, hi) => lo + (hi - lo) / (1.0 + (-u).exp()),
        }
    }

    fn to_internal(self, p: f64) -> f64 {
        match self {
            Transform::Identity => p,
            Transform::Above(lo) => (p - lo).ln(),
            Transform::Below(hi) => (hi - p).ln(),
            Transform::Between(lo, hi) => {
                let s = (p - lo) / (hi - lo);
                (s / (1.0 - s)).ln()
            }
        }
    }

    /// `dp/du` at internal value `u`.
    fn slope(self, u: f64) -> f64 {
        match self {
            Transform::Identity => 1.0,
            Transform::Above(_) => u.exp(),
            Transform::Below(_) => -u.exp(),
            Transform::Between(lo, hi) => {
                let e = (-u).exp();
                (hi - lo) * e / (1.0 + e).powi(2)
            }
        }
    }
}

/// Optimizer controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Stop when every Jacobian column is nearly orthogonal to the residual.
    pub gradient_tolerance: f64,
    /// Stop when the accepted step is this small relative to the parameters.
    pub step_tolerance: f64,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost_tolerance: f64,
    /// Extra starts from seeded perturbations of the initial values.
    pub n_starts: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-12,
            step_tolerance: 1e-14,
            cost_tolerance: 1e-16,
            n_starts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedParameter {
    pub name: String,
    pub value: f64,
    /// Indicative standard error from the residual Jacobian; absent for fixed
    /// parameters or when the problem has no spare degrees of freedom.
    pub std_error: Option<f64>,
    pub fixed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual_norm: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<FittedParameter>,
    pub initial_residual_norm: f64,
    pub residual_norm: f64,
    pub converged: bool,
    pub termination: String,
    pub iterations: usize,
    pub evaluations: usize,
    /// Start that produced this result (0 = the supplied initial values).
    pub start: usize,
    /// Residual norm after each accepted iteration, starting with the initial point.
    pub log: Vec<IterationRecord>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|p| p.name == name)
            .and_then(|p| p.std_error)
    }

    pub fn values(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.value).collect()
    }
}

struct Problem<'a, F> {
    params: &'a [Parameter],
    free: Vec<usize>,
    transforms: Vec<Transform>,
    residual: F,
    evaluations: usize,
}

impl<F> Problem<'_, F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    fn external(&self, u: &DVector<f64>) -> Vec<f64> {
        let mut p: Vec<f64> = self.params.iter().map(|x| x.initial).collect();
        for (k, &i) in self.free.iter().enumerate() {
            p[i] = self.transforms[k].to_external(u[k]);
        }
        p
    }

    fn eval(&mut self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.evaluations += 1;
        let r = (self.residual)(&self.external(u))?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::FitRejected("residual is not finite".into()));
        }
        Ok(DVector::from_vec(r))
    }

    fn jacobian(&mut self, u: &DVector<f64>, m: usize) -> Result<DMatrix<f64>> {
        let n = u.len();
        let mut j = DMatrix::zeros(m, n);
        for k in 0..n {
            let h = (1e-6 * u[k].abs()).max(1e-8);
            let mut up = u.clone();
            up[k] += h;
            let mut dn = u.clone();
            dn[k] -= h;
            let col = (self.eval(&up)? - self.eval(&dn)?) / (2.0 * h);
            j.set_column(k, &col);
        }
        Ok(j)
    }
}

/// Minimise `|residual(p)|^2` over the free parameters.
///
/// `residual` receives every parameter (fixed ones at their initial value)
/// in the order of `params`. With `options.n_starts > 1` additional starts
/// are drawn from `seed`; the lowest final residual wins.
pub fn levenberg_marquardt<F>(
    params: &[Parameter],
    residual: F,
    options: &FitOptions,
    seed: u64,
) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    for p in params {
        p.validate()?;
    }
    let free: Vec<usize> = (0..params.len()).filter(|&i| !params[i].fixed).collect();
    if free.is_empty() {
        return Err(Error::invalid("parameters", "no free parameters"));
    }
    let transforms = free.iter().map(|&i| params[i].transform()).collect();
    let mut problem = Problem {
        params,
        free,
        transforms,
        residual,
        evaluations: 0,
    };
    let m = (problem.residual)(&params.iter().map(|p| p.initial).collect::<Vec<_>>())?.len();
    if m < problem.free.len() {
        return Err(Error::invalid(
            "observations",
            format!("{m} residuals for {} free parameters", problem.free.len()),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<FitResult> = None;
    for start in 0..options.n_starts.max(1) {
        let u0 = DVector::from_iterator(
            problem.free.len(),
            problem.free.iter().enumerate().map(|(k, &i)| {
                let t = problem.transforms[k];
                let base = t.to_internal(params[i].initial);
                if start == 0 {
                    base
                } else {
                    base + rng.random_range(-0.1..0.1) * base.abs().max(1.0)
                }
            }),
        );
        let mut result = run(&mut problem, u0, m, options)?;
        result.start = start;
        if best
            .as_ref()
            .is_none_or(|b| result.residual_norm < b.residual_norm)
        {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one start"))
}

fn run<F>(
    problem: &mut Problem<'_, F>,
    mut u: DVector<f64>,
    m: usize,
    options: &FitOptions,
) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = u.len();
    let mut r = problem.eval(&u)?;
    let mut cost = r.norm_squared();
    let initial_norm = cost.sqrt();
    let mut j = problem.jacobian(&u, m)?;
    let mut jtj = j.transpose() * &j;
    let mut lambda = 1e-3;
    let mut log = vec![IterationRecord {
        iteration: 0,
        residual_norm: initial_norm,
        damping: lambda,
    }];
    let mut iterations = 0;
    let (converged, termination) = loop {
        if cost == 0.0 {
            break (true, "zero residual");
        }
        let g = j.transpose() * &r;
        let rn = cost.sqrt();
        let scaled = (0..n)
            .map(|k| {
                let cn = j.column(k).norm();
                if cn == 0.0 {
                    0.0
                } else {
                    g[k].abs() / (cn * rn)
                }
            })
            .fold(0.0, f64::max);
        if scaled <= options.gradient_tolerance {
            break (true, "gradient tolerance");
        }
        if iterations >= options.max_iterations {
            break (false, "iteration limit");
        }
        iterations += 1;
        let mut accepted = None;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let trial = &u + &step;
            let r_trial = match problem.eval(&trial) {
                Ok(v) => v,
                Err(Error::FitRejected(_)) | Err(Error::InvalidParameter { .. }) => {
                    lambda *= 10.0;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let c = r_trial.norm_squared();
            if c < cost {
                accepted = Some((trial, r_trial, c, step));
                break;
            }
            lambda *= 10.0;
        }
        let Some((trial, r_trial, c, step)) = accepted else {
            break (true, "no further decrease at floating-point resolution");
        };
        let reduction = (cost - c) / cost;
        let small_step = step.norm() <= options.step_tolerance * (u.norm() + options.step_tolerance);
        u = trial;
        r = r_trial;
        cost = c;
        lambda = (lambda / 3.0).max(1e-15);
        log.push(IterationRecord {
            iteration: iterations,
            residual_norm: cost.sqrt(),
            damping: lambda,
        });
        if small_step {
            break (true, "step tolerance");
        }
        if reduction < options.cost_tolerance {
            break (true, "cost tolerance");
        }
        j = problem.jacobian(&u, m)?;
        jtj = j.transpose() * &j;
    };

    // Standard errors from the Jacobian at the solution.
    let j = problem.jacobian(&u, m)?;
    let dof = m.saturating_sub(n);
    let cov = (j.transpose() * &j).try_inverse();
    let values = problem.external(&u);
    let mut errors = vec![None; problem.params.len()];
    if let (Some(cov), true) = (cov, dof > 0) {
        let s2 = cost / dof as f64;
        for (k, &i) in problem.free.iter().enumerate() {
            let var = cov[(k, k)] * s2;
            if var.is_finite() && var >= 0.0 {
                errors[i] = Some(var.sqrt() * problem.transforms[k].slope(u[k]).abs());
            }
        }
    }
    Ok(FitResult {
        parameters: problem
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| FittedParameter {
                name: p.name.clone(),
                value: values[i],
                std_error: errors[i],
                fixed: p.fixed,
            })
            .collect(),
        initial_residual_norm: initial_norm,
        residual_norm: cost.sqrt(),
        converged,
        termination: termination.to_string(),
        iterations,
        evaluations: problem.evaluations,
        start: 0,
        log,
    })
}

/// Decadic absorbance `alpha L / ln 10` of a layer of thickness `path_cm`.
pub fn absorbance(model: &DielectricModel, path_cm: f64, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&nu| Ok(model.optical_constants(nu)?.alpha * path_cm / LN_10))
        .collect()
}

/// Lorentz-band fit of an absorbance spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzFit {
    pub result: FitResult,
    pub model: DielectricModel,
}

/// Fit amplitudes, centres and widths of `initial`'s oscillators to the
/// `absorbance` channel of `spectrum` (path length `path_cm`, background
/// index held fixed).
pub fn fit_lorentz(
    spectrum: &Spectrum,
    path_cm: f64,
    initial: &DielectricModel,
    options: &FitOptions,
    seed: u64,
) -> Result<LorentzFit> {
    let observed = spectrum.require("absorbance")?;
    if !(path_cm > 0.0) {
        return Err(Error::invalid("path_cm", "must be > 0"));
    }
    initial.validate()?;
    if initial.oscillators.is_empty() {
        return Err(Error::invalid("initial.oscillators", "nothing to fit"));
    }
    let (lo, hi) = observed
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !(hi - lo > 1e-12 * hi.abs().max(1.0)) {
        return Err(Error::FitRejected(
            "absorbance spectrum is flat; no band to fit".into(),
        ));
    }
    let params: Vec<Parameter> = initial
        .oscillators
        .iter()
        .enumerate()
        .flat_map(|(i, o)| {
            [
                Parameter::positive(format!("oscillators[{i}].amplitude"), o.amplitude),
                Parameter::free(format!("oscillators[{i}].center"), o.center),
                Parameter::positive(format!("oscillators[{i}].width"), o.width),
            ]
        })
        .collect();
    let grid = spectrum.grid();
    let build = |p: &[f64]| {
        DielectricModel::new(
            initial.n_bg,
            p.chunks(3)
                .map(|c| LorentzOscillator::new(c[0], c[1], c[2]))
                .collect(),
        )
    };
    let result = levenberg_marquardt(
        &params,
        |p| {
            let model = absorbance(&build(p), path_cm, grid)?;
            Ok(model.iter().zip(observed).map(|(m, o)| m - o).collect())
        },
        options,
        seed,
    )?;
    let model = build(&result.values());
    Ok(LorentzFit { result, model })
}

/// Measured branch energies at one tilt angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DispersionPoint {
    pub theta_deg: f64,
    pub e_lp: f64,
    pub e_up: f64,
}

/// Starting values for a dispersion fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DispersionGuess {
    pub g0: f64,
    pub e_vib: f64,
    /// Normal-incidence cavity mode.
    pub e0: f64,
    pub n_c: f64,
    /// Hold `n_c` at its starting value.
    #[serde(default)]
    pub fix_n_c: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionFit {
    pub result: FitResult,
    pub g0: f64,
    pub e_vib: f64,
    pub map: AngleMap,
    /// `|E_LP + E_UP - E_vib - E_cav(theta)|` per observation at the fit.
    pub sum_rule_residuals: Vec<f64>,
}

/// Coupled-mode model of the branch energies with the planar-cavity angle law.
pub fn fit_dispersion(
    points: &[DispersionPoint],
    guess: &DispersionGuess,
    options: &FitOptions,
    seed: u64,
) -> Result<DispersionFit> {
    if points.len() < 4 {
        return Err(Error::invalid(
            "observations",
            format!("need at least 4 angle points, got {}", points.len()),
        ));
    }
    for (i, p) in points.iter().enumerate() {
        if !(p.theta_deg.is_finite() && p.e_lp.is_finite() && p.e_up.is_finite()) {
            return Err(Error::invalid(format!("observations[{i}]"), "non-finite value"));
        }
        if p.e_up < p.e_lp {
            return Err(Error::invalid(
                format!("observations[{i}]"),
                "upper branch below lower branch",
            ));
        }
    }
    let mut angles: Vec<f64> = points.iter().map(|p| p.theta_deg).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if angles.len() < 4 {
        return Err(Error::FitRejected(format!(
            "degenerate point set: {} distinct angles cannot constrain 4 parameters",
            angles.len()
        )));
    }
    let params = vec![
        Parameter::positive("g0", guess.g0),
        Parameter::free("e_vib", guess.e_vib),
        Parameter::free("e0", guess.e0),
        Parameter::bounded_below("n_c", guess.n_c, 1.0).fixed(guess.fix_n_c),
    ];
    let branches = |p: &[f64], theta: f64| -> Result<(f64, f64, f64)> {
        let map = AngleMap { e0: p[2], n_c: p[3] };
        let e_cav = map.mode(theta)?;
        let pair = polariton_energies(&CoupledModes {
            e_vib: p[1],
            e_cav,
            g0: p[0],
        })?;
        Ok((pair.lower, pair.upper, e_cav))
    };
    let result = levenberg_marquardt(
        &params,
        |p| {
            let mut r = Vec::with_capacity(2 * points.len());
            for obs in points {
                let (lp, up, _) = branches(p, obs.theta_deg)?;
                r.push(lp - obs.e_lp);
                r.push(up - obs.e_up);
            }
            Ok(r)
        },
        options,
        seed,
    )?;
    let v = result.values();
    let sum_rule_residuals = points
        .iter()
        .map(|obs| {
            let (_, _, e_cav) = branches(&v, obs.theta_deg)?;
            Ok((obs.e_lp + obs.e_up - v[1] - e_cav).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DispersionFit {
        g0: v[0],
        e_vib: v[1],
        map: AngleMap { e0: v[2], n_c: v[3] },
        sum_rule_residuals,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polariton::dispersion_curve;
    use crate::spectrum::uniform_grid;

    #[test]
    fn transforms_round_trip() {
        for t in [
            Transform::Identity,
            Transform::Above(1.0),
            Transform::Below(5.0),
            Transform::Between(-2.0, 3.0),
        ] {
            for p in [-1.5, 0.5, 2.0] {
                let inside = match t {
                    Transform::Above(lo) => p > lo,
                    Transform::Below(hi) => p < hi,
                    Transform::Between(lo, hi) => p > lo && p < hi,
                    Transform::Identity => true,
                };
                if inside {
                    assert!((t.to_external(t.to_internal(p)) - p).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn linear_model_exact() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 2.0).collect();
        let fit = levenberg_marquardt(
            &[Parameter::free("a", 1.0), Parameter::free("b", 0.0)],
            |p| Ok(xs.iter().zip(&ys).map(|(x, y)| p[0] * x + p[1] - y).collect()),
            &FitOptions::default(),
            0,
        )
        .unwrap();
        assert!(fit.converged);
        assert!((fit.value("a").unwrap() - 3.0).abs() < 1e-9);
        assert!((fit.value("b").unwrap() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn residual_log_never_increases() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.2).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (-0.7 * x).exp() + 0.01 * x.sin()).collect();
        let fit = levenberg_marquardt(
            &[Parameter::positive("a", 0.5), Parameter::positive("k", 3.0)],
            |p| Ok(xs.iter().zip(&ys).map(|(x, y)| p[0] * (-p[1] * x).exp() - y).collect()),
            &FitOptions::default(),
            0,
        )
        .unwrap();
        assert!(fit.log.windows(2).all(|w| w[1].residual_norm <= w[0].residual_norm));
        assert!(fit.residual_norm <= fit.initial_residual_norm);
        assert!(fit.std_error("a").is_some());
    }

    #[test]
    fn initial_outside_bounds_rejected() {
        let r = levenberg_marquardt(
            &[Parameter::positive("a", -1.0)],
            |p| Ok(vec![p[0]]),
            &FitOptions::default(),
            0,
        );
        assert!(matches!(r, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn fixed_parameters_stay_put() {
        let fit = levenberg_marquardt(
            &[Parameter::free("a", 1.0), Parameter::free("b", 7.0).fixed(true)],
            |p| Ok(vec![p[0] - 2.0, p[0] + p[1] - 10.0]),
            &FitOptions::default(),
            0,
        )
        .unwrap();
        assert_eq!(fit.value("b"), Some(7.0));
        assert!(fit.std_error("b").is_none());
    }

    #[test]
    fn multistart_is_deterministic() {
        let opts = FitOptions {
            n_starts: 4,
            ..FitOptions::default()
        };
        let run = || {
            levenberg_marquardt(
                &[Parameter::free("x", 3.0), Parameter::free("y", -1.0)],
                |p| Ok(vec![p[0] * p[0] - 2.0, p[1] - p[0], 0.1 * p[1]]),
                &opts,
                42,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    fn witness() -> (Spectrum, DielectricModel) {
        let truth = DielectricModel::w_co6(2000.0);
        let grid = uniform_grid(1950.0, 2015.0, 0.1).unwrap();
        let a = absorbance(&truth, 6e-4, &grid).unwrap();
        (Spectrum::new(grid).unwrap().with_channel("absorbance", a).unwrap(), truth)
    }

    #[test]
    fn lorentz_exact_recovery() {
        let (spectrum, _) = witness();
        let start = DielectricModel::new(1.375, vec![LorentzOscillator::new(1500.0, 1981.0, 4.5)]);
        let fit = fit_lorentz(&spectrum, 6e-4, &start, &FitOptions::default(), 0).unwrap();
        let o = fit.model.oscillators[0];
        assert!(fit.result.converged, "{}", fit.result.termination);
        assert!((o.amplitude / 2000.0 - 1.0).abs() < 1e-6, "{o:?}");
        assert!((o.center / 1983.0 - 1.0).abs() < 1e-6);
        assert!((o.width / 3.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn flat_absorbance_rejected() {
        let grid = uniform_grid(1950.0, 2015.0, 0.1).unwrap();
        let s = Spectrum::new(grid.clone())
            .unwrap()
            .with_channel("absorbance", vec![0.0; grid.len()])
            .unwrap();
        let start = DielectricModel::w_co6(1000.0);
        assert!(matches!(
            fit_lorentz(&s, 6e-4, &start, &FitOptions::default(), 0),
            Err(Error::FitRejected(_))
        ));
    }

    fn synthetic_points(g0: f64, map: &AngleMap) -> Vec<DispersionPoint> {
        let crossing = map.angle_for(1983.0).unwrap();
        let mut angles: Vec<f64> = (0..=15).map(|i| 2.5 * i as f64).collect();
        angles.push(crossing);
        dispersion_curve(1983.0, g0, &angles, map)
            .unwrap()
            .into_iter()
            .map(|r| DispersionPoint {
                theta_deg: r.theta_deg,
                e_lp: r.e_lp,
                e_up: r.e_up,
            })
            .collect()
    }

    fn guess() -> DispersionGuess {
        DispersionGuess {
            g0: 12.0,
            e_vib: 1980.0,
            e0: 1930.0,
            n_c: 1.5,
            fix_n_c: false,
        }
    }

    #[test]
    fn dispersion_exact_recovery() {
        let map = AngleMap { e0: 1934.0, n_c: 1.375 };
        let fit = fit_dispersion(&synthetic_points(18.5, &map), &guess(), &FitOptions::default(), 0).unwrap();
        assert!((fit.g0 / 18.5 - 1.0).abs() < 1e-6, "{}", fit.g0);
        assert!((fit.e_vib / 1983.0 - 1.0).abs() < 1e-6);
        assert!((fit.map.e0 / 1934.0 - 1.0).abs() < 1e-6);
        assert!((fit.map.n_c / 1.375 - 1.0).abs() < 1e-6);
        assert!(fit.sum_rule_residuals.iter().all(|r| *r < 1e-6));
    }

    #[test]
    fn dispersion_uncoupled_limit() {
        let map = AngleMap { e0: 1934.0, n_c: 1.375 };
        let fit = fit_dispersion(&synthetic_points(0.0, &map), &guess(), &FitOptions::default(), 0).unwrap();
        assert!(fit.g0 < 1e-6, "{} ({})", fit.g0, fit.result.termination);
    }

    #[test]
    fn dispersion_degenerate_sets_rejected() {
        let p = DispersionPoint {
            theta_deg: 10.0,
            e_lp: 1960.0,
            e_up: 2000.0,
        };
        assert!(fit_dispersion(&[p; 3], &guess(), &FitOptions::default(), 0).is_err());
        assert!(matches!(
            fit_dispersion(&[p; 6], &guess(), &FitOptions::default(), 0),
            Err(Error::FitRejected(_))
        ));
    }
}
