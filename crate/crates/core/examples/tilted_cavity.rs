//! Transfer-matrix model of a Ge/Si3N4 mirror cavity filled with the
//! W(CO)6 solution: polariton absorption versus tilt angle.

use polariton::dielectric::{DielectricModel, LorentzOscillator};
use polariton::spectrum::uniform_grid;
use polariton::transfer_matrix::{
    central_absorption, polariton_absorption_vs_angle, tra, CavityStackTemplate,
};

fn main() -> polariton::Result<()> {
    let template = CavityStackTemplate::w_co6_cell();
    let spacer = DielectricModel::new(1.375, vec![LorentzOscillator::new(2600.0, 1983.0, 3.0)]);
    let grid = uniform_grid(1900.0, 2060.0, 0.1)?;
    let angles: Vec<f64> = (0..=14).map(|i| 10.0 + i as f64).collect();
    let sweep = polariton_absorption_vs_angle(&template, &spacer, 1983.0, &angles, &grid, 60.0)?;
    println!("theta     E_LP     E_UP  split   A_LP   A_UP");
    for row in &sweep.rows {
        if let Ok(p) = &row.result {
            println!(
                "{:5.1} {:8.2} {:8.2} {:6.2} {:6.3} {:6.3}",
                row.theta_deg, p.e_lp, p.e_up, p.splitting(), p.a_lp, p.a_up
            );
        }
    }
    println!(
        "smallest splitting at {:?} deg, largest polariton absorption at {:?} deg",
        sweep.min_splitting_angle(),
        sweep.max_absorption_angle()
    );

    let theta = sweep.min_splitting_angle().unwrap_or(18.0);
    let stack = template.build(&spacer, theta);
    let spectrum = tra(&stack, &grid)?;
    let row = sweep.rows.iter().find(|r| r.theta_deg == theta).unwrap();
    if let Ok(p) = &row.result {
        let c = central_absorption(&stack, &spectrum, p.e_lp, p.e_up, 1983.0)?;
        println!(
            "central absorption {:.3} at 1983, flanks {:.3}/{:.3}, centroid {:.2}",
            c.at_center, c.flank_low.1, c.flank_high.1, c.centroid
        );
    }
    Ok(())
}
