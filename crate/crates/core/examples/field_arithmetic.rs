//! Arithmetic in GF(9) = GF(3)[x]/(x^2 + 1): tables, inverses, Frobenius.

use qgeom::{build_field, FieldSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = build_field(&FieldSpec::extension(3, 2, &[1, 0, 1]))?;
    println!("{} has {} elements", f.name(), f.order());
    for a in f.nonzero() {
        println!(
            "{a} = {:?}: inverse {}, square {}, frobenius {}, conjugate {}",
            f.coeffs(a),
            f.inv(a),
            f.mul(a, a),
            f.frobenius(a, 1),
            f.conj(a)?
        );
    }
    let x = f.element_from_coeffs(&[0, 1])?;
    let x2 = f.f_mul(x, x)?;
    println!("x * x = {:?}", f.coeffs(x2.code()));
    Ok(())
}
