//! Factor a covariance into `U D Uᵀ` and rebuild it.
//!
//! cargo run --example factorize

use udkf::{is_psd, udu_decompose, Matrix};

fn main() -> udkf::Result<()> {
    let p = Matrix::from_rows(&[[4.0, 2.0, 0.6], [2.0, 3.0, 0.4], [0.6, 0.4, 1.0]])?;
    let f = udu_decompose(&p)?;

    print!("U =\n{}", f.u.to_matrix());
    println!("D = {:?}", f.d.as_slice());
    println!("psd: {}", is_psd(&f).psd);
    println!("reconstruction error: {:.2e}", f.covariance().relative_distance(&p)?);
    Ok(())
}
