//! Command execution behind the `polariton-engine` binary: load and
//! validate a config, run one command, write artifacts with sidecars.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration or input.

use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{self, Command, FitKind, RunConfig, OUT_DIR_ENV};
use crate::error::{Error, Result};
use crate::fitting::{absorbance, fit_dispersion, fit_lorentz, DispersionPoint, FitResult};
use crate::io::{self, ArtifactWriter, Table, TableCell};
use crate::peaks;
use crate::polariton::dispersion_curve;
use crate::pump_probe::{
    classical_transient, compare_models, detuning_sweep, quantum_transient, ModelKind,
    TransientFeatures, TransientScenario, BRANCH_WINDOW,
};
use crate::quantum::linear_transmission;
use crate::spectrum::Spectrum;
use crate::transfer_matrix::{locate_polaritons, tra, LayerStack};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

/// Parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub validate_only: bool,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    engine: &'static str,
    version: &'static str,
    artifact: &'a str,
    rows: usize,
    config: &'a RunConfig,
}

/// Runs one command and reports through `out`/`err`; returns the exit code.
pub fn run(inv: &Invocation, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = match config::load(&inv.config, &inv.overrides) {
        Ok(c) => c,
        Err(diags) => {
            for d in diags {
                let _ = writeln!(err, "error: {d}");
            }
            return EXIT_VALIDATION;
        }
    };
    let base = inv
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let diags = cfg.validate(inv.command, &base);
    if !diags.is_empty() {
        for d in diags {
            let _ = writeln!(err, "error: {d}");
        }
        return EXIT_VALIDATION;
    }
    if inv.validate_only {
        let _ = writeln!(out, "OK");
        return EXIT_OK;
    }
    let seed = inv.seed.unwrap_or(cfg.seed);
    let dir = inv
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let result = cfg.resolved(inv.command, seed).and_then(|resolved| {
        let mut writer = ArtifactWriter::new(&dir)?;
        let mut session = Session {
            cfg: &resolved,
            base: &base,
            writer: &mut writer,
            lines: Vec::new(),
        };
        match session.execute(inv.command) {
            Ok(()) => Ok(session.lines),
            Err(e) => {
                writer.discard();
                Err(e)
            }
        }
    });
    match result {
        Ok(lines) => {
            for l in lines {
                let _ = writeln!(out, "{l}");
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Parse { .. } => EXIT_VALIDATION,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

struct Session<'a> {
    cfg: &'a RunConfig,
    base: &'a Path,
    writer: &'a mut ArtifactWriter,
    lines: Vec<String>,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

fn describe(f: &std::result::Result<TransientFeatures, String>) -> String {
    match f {
        Ok(f) => format!(
            "LP {:.2} UP {:.2}; LP-window extremum dT {:+.4} at {:.2}; UP zero crossing {}",
            f.lp,
            f.up,
            f.lp_extremum.1,
            f.lp_extremum.0,
            fmt_opt(f.up_zero_crossing)
        ),
        Err(msg) => format!("unresolved: {msg}"),
    }
}

fn features_of(spectrum: &Spectrum, center: f64) -> Result<std::result::Result<TransientFeatures, String>> {
    match TransientFeatures::extract(spectrum, center) {
        Ok(f) => Ok(Ok(f)),
        Err(Error::NoSplitting(m)) => Ok(Err(m)),
        Err(e) => Err(e),
    }
}

impl Session<'_> {
    fn execute(&mut self, command: Command) -> Result<()> {
        match command {
            Command::Linear => self.linear(),
            Command::Transient => self.transient(),
            Command::Sweep => self.sweep(),
            Command::Dispersion => self.dispersion(),
            Command::Tmm => self.tmm(),
            Command::Fit => self.fit(),
        }
    }

    fn emit(&mut self, name: &str, bytes: &[u8], rows: usize, summary: String) -> Result<()> {
        let meta = Sidecar {
            engine: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            artifact: name,
            rows,
            config: self.cfg,
        };
        let path = self.writer.write_with_sidecar(name, bytes, &meta)?;
        self.lines.push(format!("wrote {}: {summary}", path.display()));
        Ok(())
    }

    fn emit_spectrum(&mut self, name: &str, spectrum: &Spectrum, note: String) -> Result<()> {
        let bytes = io::spectrum_to_csv(spectrum, self.cfg.significant_digits)?;
        let channels: Vec<&str> = spectrum.channel_names().collect();
        let summary = format!("{} rows [{}] {note}", spectrum.len(), channels.join(","));
        self.emit(name, &bytes, spectrum.len(), summary)
    }

    fn emit_table(&mut self, name: &str, table: &Table, note: String) -> Result<()> {
        let bytes = table.to_csv(self.cfg.significant_digits)?;
        self.emit(name, &bytes, table.rows.len(), format!("{} rows {note}", table.rows.len()))
    }

    fn emit_json<T: Serialize>(&mut self, name: &str, value: &T, note: String) -> Result<()> {
        let bytes = io::to_json(value)?;
        self.emit(name, &bytes, 1, note)
    }

    fn center(&self) -> Result<f64> {
        match (&self.cfg.qm, &self.cfg.classical) {
            (Some(q), _) => Ok(q.omega0),
            (None, Some(c)) => c.band_center(),
            (None, None) => Err(Error::invalid("qm", "missing")),
        }
    }

    fn linear(&mut self) -> Result<()> {
        let grid = self.cfg.grid.points()?;
        let mut spectrum = Spectrum::new(grid.clone())?;
        let classical = || -> Result<Vec<f64>> {
            let c = self.cfg.classical.as_ref().expect("resolved");
            c.optics.transmission(&c.medium, &grid)
        };
        let quantum = || -> Result<Vec<f64>> {
            let q = self.cfg.qm.expect("validated");
            Ok(linear_transmission(&q, &grid)?.require("T")?.to_vec())
        };
        match self.cfg.model {
            ModelKind::Quantum => spectrum.push_channel("T", quantum()?)?,
            ModelKind::Classical => spectrum.push_channel("T", classical()?)?,
            ModelKind::Both => {
                spectrum.push_channel("T_classical", classical()?)?;
                spectrum.push_channel("T_quantum", quantum()?)?;
            }
        }
        let center = self.center()?;
        let notes: Vec<String> = spectrum
            .channels()
            .map(|(name, t)| {
                match peaks::bracketing_maxima(spectrum.grid(), t, center, BRANCH_WINDOW, 0.01) {
                    (Some(l), Some(u)) => format!(
                        "{name}: peaks {:.2}, {:.2} (splitting {:.2} cm^-1)",
                        l.position,
                        u.position,
                        u.position - l.position
                    ),
                    _ => format!("{name}: no split peak pair"),
                }
            })
            .collect();
        self.emit_spectrum("linear.csv", &spectrum, notes.join("; "))
    }

    fn transient(&mut self) -> Result<()> {
        let grid = self.cfg.grid.points()?;
        let fraction = self.cfg.fraction().expect("resolved");
        let center = self.center()?;
        let both = self.cfg.model == ModelKind::Both;
        if self.cfg.model != ModelKind::Quantum {
            let c = self.cfg.classical.as_ref().expect("resolved");
            let s = classical_transient(c, fraction, &grid)?;
            let note = describe(&features_of(&s, center)?);
            let name = if both { "transient_classical.csv" } else { "transient.csv" };
            self.emit_spectrum(name, &s, note)?;
        }
        if self.cfg.model != ModelKind::Classical {
            let q = self.cfg.qm.expect("validated").with_fraction(fraction);
            let s = quantum_transient(&q, &grid)?;
            let note = describe(&features_of(&s, center)?);
            let name = if both { "transient_quantum.csv" } else { "transient.csv" };
            self.emit_spectrum(name, &s, note)?;
        }
        if both {
            let c = self.cfg.classical.as_ref().expect("resolved");
            let q = self.cfg.qm.expect("validated").with_fraction(fraction);
            let cmp = compare_models(c, &q, &grid)?;
            let note = match &cmp.diagnostic {
                Some(d) => d.clone(),
                None => cmp
                    .features
                    .iter()
                    .map(|f| format!("{} {:+.2}", f.feature, f.difference))
                    .collect::<Vec<_>>()
                    .join(", "),
            };
            self.emit_json("comparison.json", &cmp, note)?;
        }
        Ok(())
    }

    fn sweep(&mut self) -> Result<()> {
        let grid = self.cfg.grid.points()?;
        let transient = self.cfg.transient.as_ref().expect("validated");
        let scenario = TransientScenario {
            model: self.cfg.model,
            fraction: self.cfg.fraction().expect("resolved"),
            detunings: transient.detunings.clone(),
            qm: self.cfg.qm,
            classical: self.cfg.classical.clone(),
        };
        let result = detuning_sweep(&scenario, &grid)?;
        let mut summary = Table::new(&[
            "model",
            "detuning_cm-1",
            "lp_cm-1",
            "up_cm-1",
            "lp_extremum_cm-1",
            "lp_extremum_dT",
            "up_zero_crossing_cm-1",
            "up_max_abs_dT",
            "file",
            "diagnostic",
        ]);
        let mut index = std::collections::HashMap::new();
        for row in &result.rows {
            let i = index.entry(row.model).or_insert(0usize);
            let name = format!("sweep_{}_{:02}.csv", row.model.label(), *i);
            *i += 1;
            self.emit_spectrum(
                &name,
                &row.spectrum,
                format!("detuning {:+.3}: {}", row.detuning, describe(&row.features)),
            )?;
            let cells: Vec<TableCell> = match &row.features {
                Ok(f) => vec![
                    f.lp.into(),
                    f.up.into(),
                    f.lp_extremum.0.into(),
                    f.lp_extremum.1.into(),
                    f.up_zero_crossing.into(),
                    f.up_max_abs.into(),
                ],
                Err(_) => vec![TableCell::Missing; 6],
            };
            let mut r = vec![row.model.label().into(), row.detuning.into()];
            r.extend(cells);
            r.push(name.as_str().into());
            r.push(row.features.as_ref().err().map_or("", |s| s.as_str()).into());
            summary.push(r)?;
        }
        let strongest = result
            .rows
            .iter()
            .filter_map(|r| r.features.as_ref().ok().map(|f| (r, f)))
            .max_by(|a, b| a.1.lp_extremum.1.abs().total_cmp(&b.1.lp_extremum.1.abs()))
            .map(|(r, f)| {
                format!(
                    "largest LP-window |dT| {:.4} ({} model, detuning {:+.3}, LP {:.2})",
                    f.lp_extremum.1.abs(),
                    r.model.label(),
                    r.detuning,
                    f.lp
                )
            })
            .unwrap_or_default();
        self.emit_table("sweep_summary.csv", &summary, strongest)
    }

    fn dispersion(&mut self) -> Result<()> {
        let s = self.cfg.dispersion.as_ref().expect("validated");
        let rows = dispersion_curve(s.e_vib, s.g0, &s.angles, &s.map)?;
        let mut table = Table::new(&[
            "theta_deg",
            "e_cav_cm-1",
            "detuning_cm-1",
            "e_lp_cm-1",
            "e_up_cm-1",
            "lp_photon",
            "up_photon",
        ]);
        for r in &rows {
            table.push(vec![
                r.theta_deg.into(),
                (s.e_vib + r.detuning).into(),
                r.detuning.into(),
                r.e_lp.into(),
                r.e_up.into(),
                r.lp.photon.into(),
                r.up.photon.into(),
            ])?;
        }
        let min = rows
            .iter()
            .min_by(|a, b| (a.e_up - a.e_lp).total_cmp(&(b.e_up - b.e_lp)))
            .map(|r| {
                format!(
                    "smallest separation {:.3} cm^-1 at {:.2} deg",
                    r.e_up - r.e_lp,
                    r.theta_deg
                )
            })
            .unwrap_or_default();
        self.emit_table("dispersion.csv", &table, min)
    }

    fn tmm(&mut self) -> Result<()> {
        let t = self.cfg.tmm.as_ref().expect("validated");
        let grid = self.cfg.grid.points()?;
        let build = |theta: Option<f64>| -> LayerStack {
            match (&t.stack, &t.cavity) {
                (Some(s), _) => {
                    let mut s = s.clone();
                    if let Some(a) = theta {
                        s.theta_deg = a;
                    }
                    s
                }
                (None, Some(c)) => c.build(t.spacer.as_ref().expect("validated"), theta.unwrap_or(0.0)),
                (None, None) => unreachable!("validated"),
            }
        };
        let stacks: Vec<LayerStack> = if t.angles.is_empty() {
            vec![build(None)]
        } else {
            t.angles.iter().map(|a| build(Some(*a))).collect()
        };
        let spectra = stacks
            .par_iter()
            .map(|s| tra(s, &grid))
            .collect::<Result<Vec<_>>>()?;
        let mut summary = Table::new(&[
            "theta_deg",
            "e_lp_cm-1",
            "e_up_cm-1",
            "splitting_cm-1",
            "a_lp",
            "a_up",
            "file",
            "diagnostic",
        ]);
        let single = stacks.len() == 1;
        let mut best: Vec<(f64, f64, f64)> = Vec::new();
        for (i, (stack, spectrum)) in stacks.iter().zip(&spectra).enumerate() {
            let name = if single {
                "tmm.csv".to_string()
            } else {
                format!("tmm_{i:02}.csv")
            };
            let located = locate_polaritons(stack, spectrum, t.center, t.half_window);
            let note = match &located {
                Ok(p) => format!(
                    "theta {:.2}: LP {:.2} UP {:.2} A_LP {:.4} A_UP {:.4}",
                    stack.theta_deg, p.e_lp, p.e_up, p.a_lp, p.a_up
                ),
                Err(_) => format!("theta {:.2}: no polariton pair", stack.theta_deg),
            };
            self.emit_spectrum(&name, spectrum, note)?;
            let mut row: Vec<TableCell> = vec![stack.theta_deg.into()];
            match located {
                Ok(p) => {
                    best.push((stack.theta_deg, p.splitting(), p.mean_absorption()));
                    row.extend([
                        p.e_lp.into(),
                        p.e_up.into(),
                        p.splitting().into(),
                        p.a_lp.into(),
                        p.a_up.into(),
                        name.as_str().into(),
                        "".into(),
                    ]);
                }
                Err(Error::NoSplitting(msg)) => {
                    row.extend(vec![TableCell::Missing; 5]);
                    row.push(name.as_str().into());
                    row.push(msg.as_str().into());
                }
                Err(e) => return Err(e),
            }
            summary.push(row)?;
        }
        let note = match (
            best.iter().min_by(|a, b| a.1.total_cmp(&b.1)),
            best.iter().max_by(|a, b| a.2.total_cmp(&b.2)),
        ) {
            (Some(s), Some(a)) => format!(
                "smallest splitting at {:.2} deg, largest polariton absorption at {:.2} deg",
                s.0, a.0
            ),
            _ => "no resolved polariton pairs".to_string(),
        };
        self.emit_table("tmm_summary.csv", &summary, note)
    }

    fn fit(&mut self) -> Result<()> {
        let f = self.cfg.fit.as_ref().expect("validated");
        let path = RunConfig::resolve_input(self.base, &f.observations);
        let bytes = std::fs::read(&path)?;
        match f.kind {
            FitKind::Lorentz => {
                let observed = io::spectrum_from_csv(&bytes)?;
                let path_cm = f.path_cm.expect("validated");
                let fit = fit_lorentz(
                    &observed,
                    path_cm,
                    f.initial.as_ref().expect("validated"),
                    &f.options,
                    self.cfg.seed,
                )?;
                #[derive(Serialize)]
                struct Out<'a> {
                    kind: &'static str,
                    result: &'a FitResult,
                    model: &'a crate::dielectric::DielectricModel,
                }
                let note = fit_note(&fit.result);
                self.emit_json(
                    "fit_result.json",
                    &Out {
                        kind: "lorentz",
                        result: &fit.result,
                        model: &fit.model,
                    },
                    note,
                )?;
                let grid = observed.grid().to_vec();
                let model = absorbance(&fit.model, path_cm, &grid)?;
                let obs = observed.require("absorbance")?.to_vec();
                let resid = model.iter().zip(&obs).map(|(m, o)| m - o).collect();
                let curve = Spectrum::new(grid)?
                    .with_channel("absorbance", obs)?
                    .with_channel("model", model)?
                    .with_channel("residual", resid)?;
                self.emit_spectrum("fit_curve.csv", &curve, String::new())
            }
            FitKind::Dispersion => {
                let cols = io::columns_from_csv(&bytes, &["theta_deg", "e_lp_cm-1", "e_up_cm-1"])?;
                let points: Vec<DispersionPoint> = (0..cols[0].len())
                    .map(|i| DispersionPoint {
                        theta_deg: cols[0][i],
                        e_lp: cols[1][i],
                        e_up: cols[2][i],
                    })
                    .collect();
                let fit = fit_dispersion(
                    &points,
                    f.guess.as_ref().expect("validated"),
                    &f.options,
                    self.cfg.seed,
                )?;
                #[derive(Serialize)]
                struct Out<'a> {
                    kind: &'static str,
                    result: &'a FitResult,
                    g0: f64,
                    e_vib: f64,
                    map: crate::fabry_perot::AngleMap,
                    sum_rule_residuals: &'a [f64],
                }
                let note = format!("{}; splitting 2 g0 = {:.4} cm^-1", fit_note(&fit.result), 2.0 * fit.g0);
                self.emit_json(
                    "fit_result.json",
                    &Out {
                        kind: "dispersion",
                        result: &fit.result,
                        g0: fit.g0,
                        e_vib: fit.e_vib,
                        map: fit.map,
                        sum_rule_residuals: &fit.sum_rule_residuals,
                    },
                    note,
                )
            }
        }
    }
}

fn fit_note(r: &FitResult) -> String {
    let params = r
        .parameters
        .iter()
        .map(|p| match p.std_error {
            Some(e) => format!("{} = {:.6} +/- {:.2e}", p.name, p.value, e),
            None => format!("{} = {:.6}", p.name, p.value),
        })
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "{} after {} iterations ({}), residual norm {:.3e}; {params}",
        if r.converged { "converged" } else { "NOT converged" },
        r.iterations,
        r.termination,
        r.residual_norm
    )
}
