//! Pump-probe response of the resonant cavity: differential transmission,
//! the UP red shift versus excited fraction, and inverting a measured shift.

use polariton::pump_probe::{estimate_excited_fraction, quantum_transient, up_shift, TransientFeatures};
use polariton::quantum::QmParams;
use polariton::spectrum::uniform_grid;

fn main() -> polariton::Result<()> {
    let p = QmParams::w_co6();
    let grid = uniform_grid(1900.0, 2060.0, 0.05)?;
    let s = quantum_transient(&p.with_fraction(0.05), &grid)?;
    let f = TransientFeatures::extract(&s, p.omega0)?;
    println!("ground LP {:.2}, UP {:.2}", f.lp, f.up);
    println!("largest LP-window dT {:+.4} at {:.2}", f.lp_extremum.1, f.lp_extremum.0);
    println!(
        "UP window: zero crossing {:?}, sign pattern {:?}, max |dT| {:.4}",
        f.up_zero_crossing, f.up_sign_pattern, f.up_max_abs
    );

    println!("\n    f   UP shift (cm^-1)");
    for frac in [0.01, 0.05, 0.075, 0.1, 0.25] {
        println!("{frac:5.3}   {:.4}", up_shift(&p, frac)?);
    }
    let observed = up_shift(&p, 0.06)?;
    println!("\nshift {observed:.4} cm^-1 -> f = {:.5}", estimate_excited_fraction(observed, &p)?);
    Ok(())
}
