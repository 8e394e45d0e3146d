//! Linear transmission of the resonant cavity from input-output theory and
//! the complex eigenvalues of the effective Hamiltonian.

use polariton::peaks::bracketing_maxima;
use polariton::quantum::{build_h_eff, eigenvalues_3x3, linear_transmission, QmParams};
use polariton::spectrum::uniform_grid;

fn main() -> polariton::Result<()> {
    let p = QmParams {
        omega0: 1983.0,
        omega_c: 1983.0,
        anharmonic_shift: 7.5,
        coupling: 18.5,
        electrical_anharmonicity: -0.25,
        kappa: 10.0,
        gamma_m: 3.0,
        f_pu: 0.0,
    };
    let grid = uniform_grid(1900.0, 2060.0, 0.05)?;
    let t = linear_transmission(&p, &grid)?;
    let (lp, up) = bracketing_maxima(t.grid(), t.require("T")?, p.omega0, 60.0, 0.01);
    if let (Some(lp), Some(up)) = (lp, up) {
        println!(
            "LP {:.2} (T={:.3})  UP {:.2} (T={:.3})  splitting {:.2} cm^-1",
            lp.position,
            lp.height,
            up.position,
            up.height,
            up.position - lp.position
        );
    }
    let eig = eigenvalues_3x3(&build_h_eff(&p.with_fraction(0.05))?);
    println!("h_eff eigenvalues at f = 0.05:");
    for v in eig.values {
        println!("  {:.3} {:+.3}i", v.re, v.im);
    }
    Ok(())
}
