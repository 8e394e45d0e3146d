//! Optical constants of a W(CO)6 / hexane solution, before and after a pump
//! moves 5% of the molecules into v=1.

use polariton::dielectric::{DielectricModel, Excitation};

fn main() -> polariton::Result<()> {
    let ground = DielectricModel::w_co6(2000.0);
    let excited = ground.excited_model(&Excitation {
        ground_index: 0,
        fraction: 0.05,
        hot_center: 1968.0,
        hot_width: None,
        electrical_anharmonicity: -0.25,
    })?;
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "nu", "n", "k", "alpha", "alpha*");
    for nu in [1960.0, 1966.0, 1968.0, 1970.0, 1978.0, 1981.5, 1983.0, 1984.5, 1990.0] {
        let g = ground.optical_constants(nu)?;
        let e = excited.optical_constants(nu)?;
        println!(
            "{nu:>8.1} {:>10.5} {:>10.5} {:>10.2} {:>10.2}",
            g.n, g.k, g.alpha, e.alpha
        );
    }
    Ok(())
}
