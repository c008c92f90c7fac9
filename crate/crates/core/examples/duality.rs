//! Composes the canonical embedding with the annihilator map. For n = 2k
//! this is again an embedding, joined to the original by a witness that
//! includes the duality.

use qgeom::embed::{canonical_embedding, connecting_automorphism, verify_isometric};
use qgeom::grassmann::duality_vertex_map;
use qgeom::{build_field, build_polar_space, FieldSpec, FormSpec, GrassmannGraph};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = build_field(&FieldSpec::prime(2))?;
    let g = GrassmannGraph::new(&f, 4, 2)?;
    let map = duality_vertex_map(&g, &g)?;
    let fixed = (0..g.order()).filter(|&v| map[v] == v).count();
    println!("duality on Γ_2(GF(2)^4): {fixed} self-dual vertices");

    let ps = build_polar_space(&f, 4, &FormSpec::symplectic(&f, 4))?;
    let e = canonical_embedding(&ps, 2)?;
    let dual = e.map_images(|s| s.annihilator(&f))?;
    verify_isometric(&f, &dual)?;
    let w = connecting_automorphism(&ps, &e, &dual, None)?;
    println!("witness kind: {}", w.kind());
    println!("connects: {}", w.connects(&f, &e, &dual));
    Ok(())
}
