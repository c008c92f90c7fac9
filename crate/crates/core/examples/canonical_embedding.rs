//! The embedding M -> M + U of the dual polar graph of W(3,2) into
//! Γ_3(GF(2)^5), checked against BFS distances in both graphs.

use qgeom::embed::{all_transversals, canonical_embedding, graphs_for, verify_isometric_with_graphs};
use qgeom::{build_field, build_polar_space, FieldSpec, FormSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = build_field(&FieldSpec::prime(2))?;
    let ps = build_polar_space(&f, 5, &FormSpec::symplectic(&f, 4))?;
    let e = canonical_embedding(&ps, 3)?;
    let (src, tgt) = graphs_for(&ps, 3)?;
    let report = verify_isometric_with_graphs(&f, &e, &src, &tgt)?;
    println!("isometric on {} pairs (BFS cross-check: {})", report.pairs_checked, report.bfs_cross_checked);
    println!("valid transversals U: {}", all_transversals(&ps, 3)?.len());
    for (m, img) in ps.maximals().iter().zip(e.images()).take(3) {
        println!("{:?} -> {:?}", m.rows(), img.rows());
    }
    Ok(())
}
