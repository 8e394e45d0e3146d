//! Empty Fabry-Perot cavity: free spectral range, mirror reflectivity for a
//! 10 cm^-1 mode, and angle tuning of the mode.

use polariton::dielectric::{DielectricModel, HEXANE_INDEX};
use polariton::fabry_perot::{
    fp_transmission, free_spectral_range, reflectivity_for_linewidth, AngleMap, CavityGeometry,
};
use polariton::peaks::prominent_maxima;
use polariton::spectrum::uniform_grid;

fn main() -> polariton::Result<()> {
    let probe = CavityGeometry::lossless(25e-4, 0.9, HEXANE_INDEX).tuned_to(1983.0);
    let fsr = free_spectral_range(&probe)?;
    let r = reflectivity_for_linewidth(10.0, fsr)?;
    let cavity = CavityGeometry::lossless(probe.length_cm, r, HEXANE_INDEX);
    println!("L = {:.3} um, FSR = {fsr:.2} cm^-1, R = {r:.4}", cavity.length_cm * 1e4);

    let grid = uniform_grid(1800.0, 2200.0, 0.05)?;
    let empty = fp_transmission(&cavity, &DielectricModel::new(HEXANE_INDEX, vec![]), &grid)?;
    for p in prominent_maxima(empty.grid(), empty.channel("T").unwrap(), 0.5) {
        println!("mode at {:.2} cm^-1, T = {:.3}", p.position, p.height);
    }

    let map = AngleMap { e0: 1934.0, n_c: HEXANE_INDEX };
    for theta in [0.0, 10.0, 20.0, 30.0] {
        println!("theta {theta:>4.1} deg -> mode {:.2} cm^-1", map.mode(theta)?);
    }
    if let Some(theta) = map.angle_for(1983.0) {
        println!("mode crosses 1983 cm^-1 at {theta:.3} deg");
    }
    Ok(())
}
