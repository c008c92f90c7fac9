//! Builds three generalized quadrangles (symplectic, parabolic, hermitian)
//! and their dual polar graphs.

use qgeom::{build_field, build_polar_space, dual_polar_graph, intersection_numbers, FieldSpec, FormSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gf2 = build_field(&FieldSpec::prime(2))?;
    let gf4 = build_field(&FieldSpec::extension(2, 2, &[1, 1, 1]))?;
    let spaces = [
        ("W(3,2)", build_polar_space(&gf2, 4, &FormSpec::symplectic(&gf2, 4))?),
        ("Q(4,2)", build_polar_space(&gf2, 5, &FormSpec::quadratic(5, &[(0, 1, 1), (2, 3, 1), (4, 4, 1)]))?),
        ("H(3,4)", build_polar_space(&gf4, 4, &FormSpec::hermitian_identity(4))?),
    ];
    for (name, ps) in &spaces {
        let g = dual_polar_graph(ps);
        let (b, c) = intersection_numbers(g.graph())?.intersection_array();
        println!(
            "{name}: {} points, {} lines, rank {}, {} maximals, array {{{b:?}; {c:?}}}",
            ps.points().len(),
            ps.lines().len(),
            ps.rank(),
            ps.maximals().len()
        );
    }
    Ok(())
}
