//! Anti-crossing of the lower and upper polariton as the cavity is tilted.

use polariton::fabry_perot::AngleMap;
use polariton::polariton::dispersion_curve;

fn main() -> polariton::Result<()> {
    let map = AngleMap { e0: 1934.0, n_c: 1.375 };
    let angles: Vec<f64> = (0..=16).map(|i| 2.5 * i as f64).collect();
    let rows = dispersion_curve(1983.0, 18.5, &angles, &map)?;
    println!("theta  detuning      E_LP      E_UP  LP photon  UP photon");
    for r in &rows {
        println!(
            "{:5.1} {:9.2} {:9.2} {:9.2} {:10.3} {:10.3}",
            r.theta_deg, r.detuning, r.e_lp, r.e_up, r.lp.photon, r.up.photon
        );
    }
    let min = rows
        .iter()
        .map(|r| r.e_up - r.e_lp)
        .fold(f64::INFINITY, f64::min);
    println!("smallest branch separation on this grid: {min:.3} cm^-1");
    Ok(())
}
