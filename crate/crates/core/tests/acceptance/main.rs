//! Acceptance report: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails.

mod oracle;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use polariton::cli::{run, Invocation, EXIT_OK};
use polariton::config::Command;
use polariton::dielectric::{DielectricModel, LorentzOscillator};
use polariton::eigen3::eigen3;
use polariton::fabry_perot::AngleMap;
use polariton::fitting::{
    absorbance, fit_dispersion, fit_lorentz, DispersionGuess, DispersionPoint, FitOptions,
};
use polariton::peaks::{bracketing_maxima, refine_maximum};
use polariton::polariton::{detuning_for_lower, dispersion_curve, polariton_energies, CoupledModes};
use polariton::pump_probe::{
    compare_models, detuning_sweep, estimate_excited_fraction, quantum_transient, up_shift,
    ClassicalSetup, ModelKind, TransientFeatures, TransientScenario,
};
use polariton::quantum::{linear_transmission, linear_transmission_at, upper_resonance, QmParams};
use polariton::spectrum::{uniform_grid, Spectrum};
use polariton::transfer_matrix::{
    central_absorption, polariton_absorption_vs_angle, tra, CavityStackTemplate, Element,
    LayerStack, Medium, Polarization,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn qm() -> QmParams {
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

fn grid() -> Vec<f64> {
    uniform_grid(1900.0, 2060.0, 0.05).unwrap()
}

fn rabi_splitting() -> Outcome {
    let p = qm();
    let start = Instant::now();
    let s = ok(linear_transmission(&p, &grid()))?;
    let t = ok(s.require("T"))?;
    let (lp, up) = bracketing_maxima(s.grid(), t, p.omega0, 60.0, 0.01);
    let (lp, up) = (lp.ok_or("no LP peak")?, up.ok_or("no UP peak")?);
    let refine = |x: f64| refine_maximum(|w| linear_transmission_at(&p, w), x - 0.1, x + 0.1, 1e-9).0;
    let split = refine(up.position) - refine(lp.position);
    let elapsed = start.elapsed().as_secs_f64();
    ensure((split - 37.0).abs() <= 1.0, format!("splitting {split:.4} cm^-1"))?;
    ensure(elapsed < 1.0, format!("took {elapsed:.3} s"))?;
    Ok(format!("splitting {split:.4} cm^-1 (37 +/- 1), {:.1} ms", elapsed * 1e3))
}

fn anti_crossing() -> Outcome {
    let (e_vib, g0) = (1983.0, 18.5);
    let map = AngleMap { e0: 1934.0, n_c: 1.375 };
    let crossing = map.angle_for(e_vib).ok_or("mode never reaches the band")?;
    let at = ok(dispersion_curve(e_vib, g0, &[crossing], &map))?[0];
    let gap = at.e_up - at.e_lp;
    ensure((gap - 37.0).abs() <= 1e-6, format!("gap at zero detuning {gap}"))?;
    ensure(at.detuning.abs() < 1e-9, format!("crossing detuning {}", at.detuning))?;
    let dense: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
    let rows = ok(dispersion_curve(e_vib, g0, &dense, &map))?;
    let below = rows.iter().all(|r| r.e_up - r.e_lp >= gap - 1e-9);
    ensure(below, "a non-zero detuning has a smaller branch separation")?;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let e_vib = rng.random_range(1800.0..2200.0);
        let g0 = rng.random_range(0.0..60.0);
        let map = AngleMap {
            e0: rng.random_range(1700.0..2200.0),
            n_c: rng.random_range(1.0..3.5),
        };
        let theta = rng.random_range(0.0..70.0);
        let e_cav = ok(map.mode(theta))?;
        let pair = ok(polariton_energies(&CoupledModes { e_vib, e_cav, g0 }))?;
        worst = worst.max((pair.lower + pair.upper - e_vib - e_cav).abs());
    }
    ensure(worst <= 1e-12, format!("sum-rule residual {worst:e}"))?;
    Ok(format!(
        "gap {gap:.9} at {crossing:.4} deg; sum rule worst {worst:.1e} over 10^4 draws"
    ))
}

fn features(p: &QmParams) -> Result<TransientFeatures, String> {
    ok(TransientFeatures::extract(&ok(quantum_transient(p, &grid()))?, p.omega0))
}

fn excited_up_peak(p: &QmParams, near: f64) -> f64 {
    refine_maximum(
        |w| {
            let s = quantum_transient(p, &[w]).unwrap();
            s.channel("T_excited").unwrap()[0]
        },
        near - 3.0,
        near + 3.0,
        1e-9,
    )
    .0
}

fn transient_signature() -> Outcome {
    let p = qm().with_fraction(0.05);
    let f = features(&p)?;
    let red = f.up - excited_up_peak(&p, f.up);
    ensure(red > 0.0, format!("UP transmission peak moved by {:+.4}", -red))?;
    ensure(f.up_zero_crossing.is_some(), "no sign change in the UP window")?;
    ensure(
        f.up_sign_pattern == Some((-1, 1)),
        format!("UP sign pattern {:?}", f.up_sign_pattern),
    )?;
    ensure(
        f.lp_extremum.1.abs() > f.up_max_abs,
        format!("LP |dT| {:.4} vs UP {:.4}", f.lp_extremum.1.abs(), f.up_max_abs),
    )?;

    let mut last = 0.0;
    let mut shifts = Vec::new();
    for frac in [0.01, 0.05, 0.1, 0.25] {
        let q = qm().with_fraction(frac);
        let g = features(&q)?;
        ensure(
            g.up_sign_pattern == Some((-1, 1)),
            format!("f={frac}: UP sign pattern {:?}", g.up_sign_pattern),
        )?;
        let shift = ok(upper_resonance(&qm()))? - ok(upper_resonance(&q))?;
        ensure(shift > last, format!("f={frac}: shift {shift} not above {last}"))?;
        last = shift;
        shifts.push(format!("{shift:.3}"));
    }
    Ok(format!(
        "UP peak red-shift {red:.3} cm^-1, zero crossing {:.2}, LP/UP |dT| {:.2}; shifts [{}] cm^-1",
        f.up_zero_crossing.unwrap(),
        f.lp_to_up_ratio(),
        shifts.join(", ")
    ))
}

fn resonance_enhancement() -> Outcome {
    let p = qm();
    let targets = [1958.0, 1963.0, 1968.0, 1973.0];
    let detunings = ok(targets
        .iter()
        .map(|&lp| detuning_for_lower(lp, p.omega0, p.coupling))
        .collect::<polariton::Result<Vec<_>>>())?;
    let scenario = TransientScenario {
        model: ModelKind::Both,
        fraction: 0.05,
        detunings,
        qm: Some(p),
        classical: None,
    };
    let sweep = ok(detuning_sweep(&scenario, &uniform_grid(1900.0, 2080.0, 0.05).unwrap()))?;
    let mut report = Vec::new();
    for model in [ModelKind::Quantum, ModelKind::Classical] {
        let amps = sweep
            .rows_for(model)
            .map(|r| r.features.as_ref().map(|f| f.lp_extremum.1.abs()))
            .collect::<Result<Vec<_>, _>>()?;
        let best = (0..amps.len()).max_by(|&a, &b| amps[a].total_cmp(&amps[b])).unwrap();
        ensure(
            targets[best] == 1968.0,
            format!("{} model peaks at LP {}: {amps:?}", model.label(), targets[best]),
        )?;
        report.push(format!(
            "{} [{}]",
            model.label(),
            amps.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(", ")
        ));
    }
    Ok(format!("max at LP 1968; LP |dT| {}", report.join("; ")))
}

fn fraction_round_trip() -> Outcome {
    let p = qm();
    let mut out = Vec::new();
    for f in [0.05, 0.075] {
        let est = ok(estimate_excited_fraction(ok(up_shift(&p, f))?, &p))?;
        ensure((est - f).abs() <= 1e-4, format!("f={f} -> {est}"))?;
        out.push(format!("{f} -> {est:.8}"));
    }
    Ok(out.join(", "))
}

fn lossless_stack() -> impl Strategy<Value = (LayerStack, f64)> {
    let element = prop_oneof![
        3 => (1.0f64..4.5, 1e-5f64..5e-3).prop_map(|(n, d)| Element::Film {
            medium: Medium::lossless(n),
            thickness_cm: d,
        }),
        1 => (0.0f64..0.99, -3.0f64..3.0).prop_map(|(r, phase)| Element::Mirror {
            reflectivity: r,
            transmission: 1.0 - r,
            phase,
        }),
    ];
    (
        1.0f64..1.6,
        prop::collection::vec(element, 1..10),
        1.0f64..4.0,
        prop_oneof![Just(Polarization::S), Just(Polarization::P)],
        prop_oneof![Just(0.0), Just(15.0), Just(30.0), 0.0f64..60.0],
        1500.0f64..2500.0,
    )
        .prop_map(|(amb, elements, sub, polarization, theta_deg, nu)| {
            (
                LayerStack {
                    ambient: Medium::lossless(amb),
                    elements,
                    substrate: Medium::lossless(sub),
                    polarization,
                    theta_deg,
                },
                nu,
            )
        })
}

fn transfer_matrix_physics() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 1000, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let worst = std::cell::Cell::new(0.0f64);
    runner
        .run(&lossless_stack(), |(stack, nu)| {
            let t = stack.tra_at(nu).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let err = (t.t + t.r - 1.0).abs();
            worst.set(worst.get().max(err));
            prop_assert!(err < 1e-10, "|T+R-1| = {err:e} for {stack:?} at {nu}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;

    let template = CavityStackTemplate::w_co6_cell();
    let spacer = DielectricModel::new(1.375, vec![LorentzOscillator::new(2600.0, 1983.0, 3.0)]);
    let grid = uniform_grid(1900.0, 2060.0, 0.1).unwrap();
    let step = 1.0;
    let angles: Vec<f64> = (0..=14).map(|i| 10.0 + step * i as f64).collect();
    let sweep = ok(polariton_absorption_vs_angle(&template, &spacer, 1983.0, &angles, &grid, 60.0))?;
    let split_at = sweep.min_splitting_angle().ok_or("no resolved angles")?;
    let abs_at = sweep.max_absorption_angle().ok_or("no resolved angles")?;
    ensure(
        (split_at - abs_at).abs() <= step,
        format!("splitting minimum at {split_at}, absorption maximum at {abs_at}"),
    )?;
    let stack = template.build(&spacer, split_at);
    let spectrum = ok(tra(&stack, &grid))?;
    let row = sweep.rows.iter().find(|r| r.theta_deg == split_at).unwrap();
    let p = row.result.as_ref()?;
    let c = ok(central_absorption(&stack, &spectrum, p.e_lp, p.e_up, 1983.0))?;
    ensure(c.contrast() > 1.0, format!("no central absorption peak: {c:?}"))?;
    ensure(
        c.flank_low.0 > p.e_lp && c.flank_high.0 < p.e_up && c.centroid > c.flank_low.0 && c.centroid < c.flank_high.0,
        format!("central feature not between the polaritons: {c:?} vs {p:?}"),
    )?;
    ensure((c.centroid - 1983.0).abs() < 2.0, format!("centroid {}", c.centroid))?;
    Ok(format!(
        "1000 lossless stacks worst |T+R-1| {:.1e}; splitting min {split_at} deg, absorption max {abs_at} deg; central A {:.3} (x{:.2} flanks) at {:.2} between LP {:.2} and UP {:.2}",
        worst.get(),
        c.at_center,
        c.contrast(),
        c.centroid,
        p.e_lp,
        p.e_up
    ))
}

fn random_symmetric(rng: &mut ChaCha8Rng) -> [[Complex64; 3]; 3] {
    let physical = rng.random_bool(0.5);
    let (shift, scale) = if physical {
        (rng.random_range(1900.0..2060.0), rng.random_range(1.0..50.0))
    } else {
        (0.0, 1.0)
    };
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
    let (a, b, d, e, f, g) = (c(), c(), c(), c(), c(), c());
    let s = Complex64::new(shift, 0.0);
    [[a + s, b, d], [b, e + s, f], [d, f, g + s]]
}

fn eigenvalue_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst, mut worst_trace) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let m = random_symmetric(&mut rng);
        let e = eigen3(&m);
        let reference = oracle::companion_eigenvalues(&m);
        worst = worst.max(oracle::matched_distance(&e.values, &reference));
        let trace = m[0][0] + m[1][1] + m[2][2];
        worst_trace = worst_trace.max((e.values.iter().sum::<Complex64>() - trace).norm());
    }
    ensure(worst <= 1e-9, format!("eigenvalue mismatch {worst:e}"))?;
    ensure(worst_trace <= 1e-9, format!("trace mismatch {worst_trace:e}"))?;
    Ok(format!("1000 matrices: worst eigenvalue gap {worst:.1e}, trace {worst_trace:.1e}"))
}

fn model_agreement() -> Outcome {
    let q = qm().with_fraction(0.05);
    let classical = ok(ClassicalSetup::matched_to(&q))?;
    let cmp = ok(compare_models(&classical, &q, &grid()))?;
    let mut out = Vec::new();
    for name in ["up_zero_crossing", "lp_extremum"] {
        let f = cmp.feature(name).ok_or(format!("{name} missing"))?;
        ensure(f.difference.abs() <= 2.0, format!("{name}: {f:?}"))?;
        out.push(format!("{name} {:.2} vs {:.2}", f.classical, f.quantum));
    }
    ensure(cmp.same_sign_pattern == Some(true), "UP sign patterns differ")?;
    Ok(out.join("; "))
}

fn witness(noise: Option<(u64, f64)>) -> Spectrum {
    let grid = uniform_grid(1950.0, 2015.0, 0.1).unwrap();
    let mut a = absorbance(&DielectricModel::w_co6(2000.0), 6e-4, &grid).unwrap();
    if let Some((seed, sigma)) = noise {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, sigma).unwrap();
        for v in &mut a {
            *v *= 1.0 + dist.sample(&mut rng);
        }
    }
    Spectrum::new(grid).unwrap().with_channel("absorbance", a).unwrap()
}

fn branches(g0: f64, noise: Option<u64>) -> Vec<DispersionPoint> {
    let map = AngleMap { e0: 1934.0, n_c: 1.375 };
    let mut angles: Vec<f64> = (0..=15).map(|i| 2.5 * i as f64).collect();
    angles.push(map.angle_for(1983.0).unwrap());
    let mut rng = noise.map(ChaCha8Rng::seed_from_u64);
    dispersion_curve(1983.0, g0, &angles, &map)
        .unwrap()
        .into_iter()
        .map(|r| {
            let mut jitter = || rng.as_mut().map_or(0.0, |g| g.random_range(-0.5..=0.5));
            DispersionPoint {
                theta_deg: r.theta_deg,
                e_lp: r.e_lp + jitter(),
                e_up: r.e_up + jitter(),
            }
        })
        .collect()
}

fn fit_round_trips() -> Outcome {
    let options = FitOptions::default();
    let start = DielectricModel::new(1.375, vec![LorentzOscillator::new(1500.0, 1981.0, 4.5)]);
    let truth = [2000.0, 1983.0, 3.0];
    let rel = |o: &LorentzOscillator| {
        [o.amplitude, o.center, o.width]
            .iter()
            .zip(truth)
            .map(|(v, t)| (v / t - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let exact = ok(fit_lorentz(&witness(None), 6e-4, &start, &options, 0))?;
    let lorentz_exact = rel(&exact.model.oscillators[0]);
    ensure(lorentz_exact <= 1e-6, format!("Lorentz exact rel error {lorentz_exact:e}"))?;
    let mut lorentz_noisy: f64 = 0.0;
    for seed in 0..20 {
        let fit = ok(fit_lorentz(&witness(Some((seed, 0.01))), 6e-4, &start, &options, seed))?;
        lorentz_noisy = lorentz_noisy.max(rel(&fit.model.oscillators[0]));
    }
    ensure(lorentz_noisy <= 0.05, format!("noisy Lorentz rel error {lorentz_noisy}"))?;

    let guess = DispersionGuess { g0: 12.0, e_vib: 1980.0, e0: 1930.0, n_c: 1.5, fix_n_c: false };
    let fit = ok(fit_dispersion(&branches(18.5, None), &guess, &options, 0))?;
    let disp_exact = [
        fit.g0 / 18.5,
        fit.e_vib / 1983.0,
        fit.map.e0 / 1934.0,
        fit.map.n_c / 1.375,
    ]
    .iter()
    .map(|r| (r - 1.0).abs())
    .fold(0.0, f64::max);
    ensure(disp_exact <= 1e-6, format!("dispersion exact rel error {disp_exact:e}"))?;
    let uncoupled = ok(fit_dispersion(&branches(0.0, None), &guess, &options, 0))?.g0;
    ensure(uncoupled < 1e-6, format!("uncoupled g0 {uncoupled:e}"))?;
    let mut disp_noisy: f64 = 0.0;
    for seed in 0..20 {
        let fit = ok(fit_dispersion(&branches(18.5, Some(seed)), &guess, &options, seed))?;
        disp_noisy = disp_noisy.max((fit.g0 - 18.5).abs());
    }
    ensure(disp_noisy <= 0.5, format!("noisy g0 error {disp_noisy}"))?;
    Ok(format!(
        "Lorentz exact {lorentz_exact:.1e}, 1% noise worst {:.2}%; dispersion exact {disp_exact:.1e}, uncoupled g0 {uncoupled:.1e}, +/-0.5 noise worst |dg0| {disp_noisy:.3}",
        lorentz_noisy * 100.0
    ))
}

const BUNDLED: [(&str, Command); 7] = [
    ("linear", Command::Linear),
    ("transient", Command::Transient),
    ("sweep", Command::Sweep),
    ("dispersion", Command::Dispersion),
    ("tmm", Command::Tmm),
    ("fit_lorentz", Command::Fit),
    ("fit_dispersion", Command::Fit),
];

fn run_bundled(name: &str, command: Command, out: &Path) -> Result<BTreeMap<String, String>, String> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let inv = Invocation {
        command,
        config: root.join("configs").join(format!("{name}.json")),
        overrides: Vec::new(),
        out: Some(out.to_path_buf()),
        seed: None,
        validate_only: false,
    };
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(&inv, &mut o, &mut e);
    ensure(code == EXIT_OK, format!("{name}: {}", String::from_utf8_lossy(&e)))?;
    let mut files = BTreeMap::new();
    for entry in ok(std::fs::read_dir(out))? {
        let entry = ok(entry)?;
        let bytes = ok(std::fs::read(entry.path()))?;
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        files.insert(format!("{name}/{}", entry.file_name().to_string_lossy()), digest);
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let dir = ok(tempfile::tempdir())?;
    let mut first = BTreeMap::new();
    for (name, command) in BUNDLED {
        let a = run_bundled(name, command, &dir.path().join("a").join(name))?;
        let b = run_bundled(name, command, &dir.path().join("b").join(name))?;
        ensure(a == b, format!("{name}: repeated runs differ"))?;
        first.extend(a);
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/manifest.json");
    let golden: BTreeMap<String, String> =
        ok(serde_json::from_slice(&ok(std::fs::read(manifest))?))?;
    let mismatched: Vec<&String> = golden.keys().filter(|k| first.get(*k) != golden.get(*k)).collect();
    ensure(golden.len() == first.len(), "artifact set differs from golden manifest")?;
    ensure(mismatched.is_empty(), format!("golden mismatch: {mismatched:?}"))?;
    Ok(format!("{} artifacts from {} configs byte-identical across runs and golden", first.len(), BUNDLED.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Rabi splitting", rabi_splitting),
        ("anti-crossing and sum rule", anti_crossing),
        ("transient quantum spectrum", transient_signature),
        ("1->2 resonance enhancement", resonance_enhancement),
        ("excited-fraction round trip", fraction_round_trip),
        ("transfer-matrix physics", transfer_matrix_physics),
        ("eigenvalue oracle", eigenvalue_oracle),
        ("classical/quantum agreement", model_agreement),
        ("fit round trips", fit_round_trips),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
