//! Nonlinear tracking: a 2-D constant-velocity target observed in range and
//! bearing. Reports how many normalized innovations fall inside ±1.96.

use udkf::models::{constant_velocity_2d, RangeBearing};
use udkf::scenario::simulate;
use udkf::{initialize, Matrix, UdFilter};

fn main() -> udkf::Result<()> {
    let process = constant_velocity_2d(1.0, Matrix::from_diagonal(&[0.001, 0.001]));
    let meas = RangeBearing {
        state_dim: 4,
        r: Matrix::from_diagonal(&[1.0, 1e-4]),
    };
    let truth0 = [102.0, 49.0, 1.1, 0.45];
    let x0 = [100.0, 50.0, 1.0, 0.5];
    let p0 = Matrix::from_diagonal(&[25.0, 25.0, 1.0, 1.0]);
    let sim = simulate(&process, &meas, &truth0, 100, 1, 2024)?;

    let run = UdFilter::default().run(&initialize(&x0, &p0)?, &process, &meas, &sim.inputs);
    if let Some(h) = &run.halted {
        eprintln!("halted at epoch {}: {}", h.epoch, h.error);
    }
    let innovations = &run.diagnostics.innovations;
    let inside = innovations
        .iter()
        .filter(|r| (r.innovation / r.variance.sqrt()).abs() <= 1.96)
        .count();
    println!("{inside} of {} normalized innovations within ±1.96", innovations.len());
    println!("final estimate {:?}", run.trajectory.last().expect("non-empty").x);
    println!("final truth    {:?}", sim.truth.last().expect("non-empty"));
    Ok(())
}
