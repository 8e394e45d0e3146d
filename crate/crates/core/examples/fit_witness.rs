//! Least-squares fits: Lorentz parameters from a noisy witness-sample
//! absorbance spectrum, and coupling plus angle map from branch energies.

use polariton::dielectric::DielectricModel;
use polariton::fabry_perot::AngleMap;
use polariton::fitting::{
    absorbance, fit_dispersion, fit_lorentz, DispersionGuess, DispersionPoint, FitOptions,
};
use polariton::polariton::dispersion_curve;
use polariton::spectrum::{uniform_grid, Spectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> polariton::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let path_cm = 5e-4;
    let grid = uniform_grid(1950.0, 2016.0, 0.1)?;
    let clean = absorbance(&DielectricModel::w_co6(2000.0), path_cm, &grid)?;
    let noisy: Vec<f64> = clean
        .iter()
        .map(|a| a * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0)))
        .collect();
    let spectrum = Spectrum::new(grid)?.with_channel("absorbance", noisy)?;
    let fit = fit_lorentz(
        &spectrum,
        path_cm,
        &DielectricModel::w_co6(1200.0),
        &FitOptions::default(),
        0,
    )?;
    println!("Lorentz fit ({}):", fit.result.termination);
    for p in &fit.result.parameters {
        println!("  {:<28} {:>10.4} +/- {:.2e}", p.name, p.value, p.std_error.unwrap_or(f64::NAN));
    }

    let map = AngleMap { e0: 1934.0, n_c: 1.375 };
    let angles: Vec<f64> = (0..=15).map(|i| 2.5 * i as f64).collect();
    let points: Vec<DispersionPoint> = dispersion_curve(1983.0, 18.5, &angles, &map)?
        .into_iter()
        .map(|r| DispersionPoint {
            theta_deg: r.theta_deg,
            e_lp: r.e_lp + rng.random_range(-0.5..0.5),
            e_up: r.e_up + rng.random_range(-0.5..0.5),
        })
        .collect();
    let guess = DispersionGuess { g0: 15.0, e_vib: 1980.0, e0: 1930.0, n_c: 1.4, fix_n_c: false };
    let fit = fit_dispersion(&points, &guess, &FitOptions::default(), 0)?;
    println!(
        "dispersion fit: g0 = {:.3}, E_vib = {:.3}, E0 = {:.3}, n_c = {:.4}",
        fit.g0, fit.e_vib, fit.map.e0, fit.map.n_c
    );
    let worst = fit.sum_rule_residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    println!("largest sum-rule residual {worst:.3} cm^-1");
    Ok(())
}
