//! Propagate UD factors through `F P Fᵀ + G Q Gᵀ` and compare with the
//! dense product.

use udkf::{mat_mul, propagate_factors, udu_decompose, Matrix, PropagationInputs};

fn main() -> udkf::Result<()> {
    let dt = 0.5;
    let f = Matrix::from_rows(&[[1.0, dt], [0.0, 1.0]])?;
    let g = Matrix::from_rows(&[[0.5 * dt * dt], [dt]])?;
    let q = Matrix::from_diagonal(&[0.2]);
    let p = Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]])?;
    let prior = udu_decompose(&p)?;

    let out = propagate_factors(&PropagationInputs {
        f_jac: &f,
        g_map: &g,
        q_cov: &q,
        prior: &prior,
    })?;

    let dense = mat_mul(&mat_mul(&f, &p)?, &f.transpose())?.add(&mat_mul(&mat_mul(&g, &q)?, &g.transpose())?)?;
    println!("D after propagation: {:?}", out.factors.d.as_slice());
    print!("propagated P =\n{}", out.factors.covariance());
    println!(
        "difference from dense: {:.2e}",
        out.factors.covariance().relative_distance(&dense)?
    );
    Ok(())
}
