//! Enumerates every isometric embedding of the dual polar graph of W(3,2),
//! placed in GF(2)^5, into Γ_3(GF(2)^5), and groups them up to automorphism.

use std::time::Instant;

use qgeom::embed::{classify_embeddings, ClassifyOptions};
use qgeom::{build_field, build_polar_space, FieldSpec, FormSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let field = build_field(&FieldSpec::prime(2))?;
    let ps = build_polar_space(&field, 5, &FormSpec::symplectic(&field, 4))?;
    let start = Instant::now();
    let (outcome, report) = classify_embeddings(&ps, 3, ClassifyOptions::default())?;
    println!("embeddings found: {}", outcome.len());
    println!("search nodes: {}", report.search_nodes);
    println!("equivalence classes: {}", report.classes);
    println!("witness kinds: {:?}", report.witness_kinds);
    println!("sampled pairs checked: {}", report.pairs_verified_directly);
    println!("elapsed: {:.2?}", start.elapsed());
    Ok(())
}
