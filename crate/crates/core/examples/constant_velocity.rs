//! Track a 1-D constant-velocity target with the UD filter and check it
//! against the dense Joseph-form filter.

use udkf::models::constant_velocity_1d;
use udkf::scenario::simulate;
use udkf::{initialize, DenseEkf, LinearMeasurement, Matrix, UdFilter};

fn main() -> udkf::Result<()> {
    let process = constant_velocity_1d(0.1, 0.05);
    let meas = LinearMeasurement::new(Matrix::from_rows(&[[1.0, 0.0]])?, Matrix::from_diagonal(&[0.2]));
    let x0 = [0.0, 1.0];
    let p0 = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.5]])?;
    let sim = simulate(&process, &meas, &x0, 50, 1, 7)?;

    let ud = UdFilter::default().run(&initialize(&x0, &p0)?, &process, &meas, &sim.inputs);
    let dense = DenseEkf::default();
    let oracle = dense.run(&dense.initialize(&x0, &p0), &process, &meas, &sim.inputs);

    let mut worst = 0.0_f64;
    for (a, b) in ud.trajectory.iter().zip(&oracle.trajectory) {
        worst = worst.max(a.covariance().relative_distance(&b.p)?);
    }
    let last = ud.trajectory.last().expect("non-empty");
    let truth = sim.truth.last().expect("non-empty");
    println!("final estimate {:?}", last.x);
    println!("final truth    {truth:?}");
    println!("worst covariance difference from dense: {worst:.2e}");
    Ok(())
}
