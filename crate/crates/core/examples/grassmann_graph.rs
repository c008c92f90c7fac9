//! Builds Γ_2(GF(3)^4), prints its intersection array and writes graph6,
//! CSV and JSON exports to the temporary directory.

use qgeom::graph::{to_edge_csv, to_graph6};
use qgeom::{build_field, gaussian_binomial, intersection_numbers, FieldSpec, GrassmannGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = build_field(&FieldSpec::prime(3))?;
    let g = GrassmannGraph::new(&f, 4, 2)?;
    println!("vertices: {} (gaussian binomial {})", g.order(), gaussian_binomial(4, 2, 3));
    println!("edges: {}", g.graph().edge_count());
    let (b, c) = intersection_numbers(g.graph())?.intersection_array();
    println!("intersection array: {{{b:?}; {c:?}}}");
    println!("distance between first and last vertex: {}", g.formula_distance(0, g.order() - 1));

    let dir = std::env::temp_dir();
    std::fs::write(dir.join("grassmann_2_4_3.g6"), to_graph6(g.graph()) + "\n")?;
    std::fs::write(dir.join("grassmann_2_4_3.csv"), to_edge_csv(g.graph()))?;
    std::fs::write(dir.join("grassmann_2_4_3.json"), serde_json::to_string_pretty(&g.subspace_graph().to_json())?)?;
    println!("exports written to {}", dir.display());
    Ok(())
}
