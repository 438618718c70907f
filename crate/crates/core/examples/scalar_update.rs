//! A single scalar measurement processed by the modified Agee-Turner update,
//! alongside the direct UD update.

use udkf::update::{direct_ud_update, modified_agee_turner, ScalarMeasurement};
use udkf::{udu_decompose, Matrix};

fn main() -> udkf::Result<()> {
    let p = Matrix::from_rows(&[[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 0.5]])?;
    let prior = udu_decompose(&p)?;
    let meas = ScalarMeasurement {
        h_row: vec![1.0, 0.0, 1.0],
        r_scalar: 0.25,
        value: 1.3,
        predicted: 1.0,
    };

    let at = modified_agee_turner(&prior, &meas)?;
    let direct = direct_ud_update(&prior, &meas)?;

    println!(
        "innovation {:.4}, variance {:.4}",
        at.innovation, at.innovation_variance
    );
    println!("gain {:?}", at.gain);
    println!("posterior D {:?}", at.factors.d.as_slice());
    println!(
        "direct vs Agee-Turner: {:.2e}",
        at.factors
            .covariance()
            .relative_distance(&direct.factors.covariance())?
    );
    Ok(())
}
