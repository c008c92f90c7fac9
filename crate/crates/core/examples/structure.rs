//! Runs the structural pipeline on the canonical embedding: star subspace,
//! quotient, induced point map and line images.

use qgeom::embed::{analyze, canonical_embedding};
use qgeom::{build_field, build_polar_space, FieldSpec, FormSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = build_field(&FieldSpec::extension(2, 2, &[1, 1, 1]))?;
    let ps = build_polar_space(&f, 5, &FormSpec::hermitian_identity(4))?;
    let e = canonical_embedding(&ps, 3)?;
    let report = analyze(&ps, &e)?;
    println!("U = {:?}", report.u.rows());
    println!("dim W = {}", report.w.dim());
    println!("point images: {}", report.q_map.images.len());
    println!("lines onto full lines: {}/{}", report.lines.full_lines, report.lines.lines_checked);
    println!("dim W' = {}, dim V' = {}", report.w_prime.dim(), report.v_prime.dim());
    println!("{}", serde_json::to_string(&report.to_json(&ps).lines)?);
    Ok(())
}
