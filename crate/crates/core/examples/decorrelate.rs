//! Whitening a measurement with correlated noise so it can be processed one
//! component at a time.

use udkf::{build_decorrelation, decorrelate, Matrix};

fn main() -> udkf::Result<()> {
    let r = Matrix::from_rows(&[[1.0, 0.6], [0.6, 0.8]])?;
    let h = Matrix::from_rows(&[[1.0, 0.0, 0.0], [1.0, 1.0, 0.5]])?;
    let y = [0.7, 1.9];

    let t = build_decorrelation(&r, 0.0)?;
    let out = decorrelate(&t, &y, &h)?;

    print!("U_r =\n{}", t.u_r.to_matrix());
    println!("independent noise variances {:?}", out.d_r.as_slice());
    println!("whitened y {:?}", out.z);
    print!("whitened H =\n{}", out.h_z);
    Ok(())
}
