//! Classical (Fabry-Perot + bleached Lorentz medium) and quantum
//! (input-output) transient spectra for the same polariton system.

use polariton::pump_probe::{compare_models, ClassicalSetup};
use polariton::quantum::QmParams;
use polariton::spectrum::uniform_grid;

fn main() -> polariton::Result<()> {
    let q = QmParams::w_co6().with_fraction(0.05);
    let classical = ClassicalSetup::matched_to(&q)?;
    if let polariton::pump_probe::ClassicalOptics::FabryPerot(c) = &classical.optics {
        println!(
            "matched cavity: L = {:.3} um, R = {:.4}, oscillator amplitude {:.1}",
            c.length_cm * 1e4,
            c.reflectivity,
            classical.medium.oscillators[0].amplitude
        );
    }
    let grid = uniform_grid(1900.0, 2060.0, 0.05)?;
    let cmp = compare_models(&classical, &q, &grid)?;
    println!("{:<18} {:>10} {:>10} {:>8}", "feature", "classical", "quantum", "diff");
    for f in &cmp.features {
        println!(
            "{:<18} {:>10.3} {:>10.3} {:>+8.3}",
            f.feature, f.classical, f.quantum, f.difference
        );
    }
    println!("same UP sign pattern: {:?}", cmp.same_sign_pattern);
    Ok(())
}
