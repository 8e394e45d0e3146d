//! Detuning sweep that walks the lower polariton across the 1->2 transition
//! and reports the LP-region transient amplitude.

use polariton::polariton::detuning_for_lower;
use polariton::pump_probe::{detuning_sweep, ModelKind, TransientScenario};
use polariton::quantum::QmParams;
use polariton::spectrum::uniform_grid;

fn main() -> polariton::Result<()> {
    let qm = QmParams::w_co6();
    let targets = [1958.0, 1963.0, 1968.0, 1973.0];
    let detunings = targets
        .iter()
        .map(|&lp| detuning_for_lower(lp, qm.omega0, qm.coupling))
        .collect::<polariton::Result<Vec<_>>>()?;
    let scenario = TransientScenario {
        model: ModelKind::Both,
        fraction: 0.05,
        detunings,
        qm: Some(qm),
        classical: None,
    };
    let grid = uniform_grid(1900.0, 2080.0, 0.05)?;
    let result = detuning_sweep(&scenario, &grid)?;
    println!("model      detuning   LP peak   max|dT| in LP window");
    for row in &result.rows {
        match &row.features {
            Ok(f) => println!(
                "{:<10} {:>8.2} {:>9.2} {:>10.4}",
                row.model.label(),
                row.detuning,
                f.lp,
                f.lp_extremum.1.abs()
            ),
            Err(msg) => println!("{:<10} {:>8.2}  unresolved: {msg}", row.model.label(), row.detuning),
        }
    }
    println!("1->2 transition at {:.1} cm^-1", qm.omega12());
    Ok(())
}
