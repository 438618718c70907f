//! Rank-one update `P + c a aᵀ` applied directly to the factors.

use udkf::update::{standard_agee_turner, RankOneInputs};
use udkf::{udu_decompose, Matrix};

fn main() -> udkf::Result<()> {
    let p = Matrix::from_rows(&[[3.0, 1.0], [1.0, 2.0]])?;
    let a = vec![1.0, -2.0];
    let c = 0.5;

    let updated = standard_agee_turner(&RankOneInputs {
        factors: udu_decompose(&p)?,
        c,
        a: a.clone(),
    })?;

    let mut expected = p.clone();
    for i in 0..2 {
        for j in 0..2 {
            expected[(i, j)] += c * a[i] * a[j];
        }
    }
    print!("updated P =\n{}", updated.covariance());
    println!(
        "error vs dense: {:.2e}",
        updated.covariance().relative_distance(&expected)?
    );
    Ok(())
}
