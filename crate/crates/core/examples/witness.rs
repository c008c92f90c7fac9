//! Moves the canonical embedding by a semilinear map over GF(4) and
//! recovers an explicit witness connecting the two.

use qgeom::embed::{canonical_embedding, connecting_automorphism};
use qgeom::{build_field, build_polar_space, FieldSpec, FormSpec, MatrixGF};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = build_field(&FieldSpec::extension(2, 2, &[1, 1, 1]))?;
    let ps = build_polar_space(&f, 4, &FormSpec::hermitian_identity(4))?;
    let e = canonical_embedding(&ps, 2)?;
    let s = MatrixGF::from_rows(4, &[vec![1, 2, 0, 3], vec![0, 1, 3, 0], vec![0, 0, 1, 2], vec![0, 0, 0, 1]])?;
    assert!(s.is_invertible(&f));
    let moved = e.map_images(|x| x.transform(&f, &s, 1))?;
    let w = connecting_automorphism(&ps, &e, &moved, None)?;
    println!("witness kind: {}", w.kind());
    println!("field automorphism power: {}", w.field_auto);
    println!("matrix: {:?}", w.matrix);
    println!("connects: {}", w.connects(&f, &e, &moved));
    Ok(())
}
