mod common;

use std::collections::BTreeSet;

use qgeom::graph::intersection_numbers;
use qgeom::polar::build_polar_space_with_cap;
use qgeom::{build_polar_space, dual_polar_graph, point_star, FormKind, FormSpec, PolarError, PolarSpace, Subspace};

use common::*;

fn normalized_points(ps: &PolarSpace) -> BTreeSet<Vec<u8>> {
    ps.points().iter().map(|p| normalize(ps.field(), p.row(0))).collect()
}

fn array(ps: &PolarSpace) -> (Vec<usize>, Vec<usize>) {
    intersection_numbers(dual_polar_graph(ps).graph()).unwrap().intersection_array()
}

fn elliptic_q52() -> FormSpec {
    // x1x2 + x3x4 + x5^2 + x5x6 + x6^2
    FormSpec::quadratic(6, &[(0, 1, 1), (2, 3, 1), (4, 4, 1), (4, 5, 1), (5, 5, 1)])
}

fn parabolic_q42() -> FormSpec {
    FormSpec::quadratic(5, &[(0, 1, 1), (2, 3, 1), (4, 4, 1)])
}

#[test]
fn symplectic_quadrangle() {
    let f = gf(2);
    for n in [4, 5] {
        let spec = FormSpec::symplectic(&f, 4);
        let ps = build_polar_space(&f, n, &spec).unwrap();
        assert_eq!((ps.points().len(), ps.lines().len(), ps.rank(), ps.maximals().len()), (15, 15, 2, 15));
        assert_eq!(normalized_points(&ps), isotropic_points(&f, n, &spec));
        assert_eq!(array(&ps), (vec![6, 4], vec![1, 3]));
        let g = dual_polar_graph(&ps);
        assert!((0..g.order()).all(|v| g.graph().degree(v) == 6));
        assert_eq!(g.graph().diameter().unwrap(), 2);
    }
}

#[test]
fn hermitian_quadrangle() {
    let f = gf4();
    let spec = FormSpec::hermitian_identity(4);
    let ps = build_polar_space(&f, 4, &spec).unwrap();
    assert_eq!((ps.points().len(), ps.lines().len(), ps.rank(), ps.maximals().len()), (45, 27, 2, 27));
    assert_eq!(normalized_points(&ps), isotropic_points(&f, 4, &spec));
    assert_eq!(array(&ps), (vec![10, 8], vec![1, 5]));
}

#[test]
fn parabolic_quadric() {
    let f = gf(2);
    let spec = parabolic_q42();
    let ps = build_polar_space(&f, 5, &spec).unwrap();
    assert_eq!((ps.points().len(), ps.lines().len(), ps.rank(), ps.maximals().len()), (15, 15, 2, 15));
    assert_eq!(normalized_points(&ps), isotropic_points(&f, 5, &spec));
    assert_eq!(array(&ps), (vec![6, 4], vec![1, 3]));
}

#[test]
fn elliptic_and_hyperbolic_quadrics() {
    let f = gf(2);
    let ps = build_polar_space(&f, 6, &elliptic_q52()).unwrap();
    assert_eq!((ps.points().len(), ps.lines().len(), ps.rank()), (27, 45, 2));
    assert_eq!(normalized_points(&ps), isotropic_points(&f, 6, &elliptic_q52()));
    assert_eq!(array(&ps), (vec![12, 8], vec![1, 3]));

    let hyperbolic = FormSpec::quadratic(4, &[(0, 1, 1), (2, 3, 1)]);
    let ps = build_polar_space(&f, 4, &hyperbolic).unwrap();
    assert_eq!((ps.points().len(), ps.maximals().len(), ps.rank()), (9, 6, 2));
    assert_eq!(array(&ps), (vec![3, 2], vec![1, 3]));
}

#[test]
fn symplectic_rank_three() {
    let f = gf(2);
    let ps = build_polar_space(&f, 6, &FormSpec::symplectic(&f, 6)).unwrap();
    assert_eq!((ps.points().len(), ps.rank(), ps.maximals().len()), (63, 3, 135));
    // b_i = q^{i+1} [m-i], c_i = [i]
    assert_eq!(array(&ps), (vec![14, 12, 8], vec![1, 3, 7]));
}

#[test]
fn odd_characteristic_symplectic() {
    let f = gf(3);
    let ps = build_polar_space(&f, 4, &FormSpec::symplectic(&f, 4)).unwrap();
    // W(3,3): 40 points, 40 lines, GQ(3,3)
    assert_eq!((ps.points().len(), ps.lines().len(), ps.maximals().len()), (40, 40, 40));
    assert_eq!(array(&ps), (vec![12, 9], vec![1, 4]));
}

#[test]
fn one_or_all_axiom() {
    let f = gf(2);
    let ps = build_polar_space(&f, 4, &FormSpec::symplectic(&f, 4)).unwrap();
    for p in ps.points() {
        for line in ps.lines() {
            let on: Vec<Subspace> = line.points(&f);
            let collinear = on.iter().filter(|x| *x == p || ps.collinear(p, x)).count();
            assert!(collinear == 1 || collinear == on.len());
        }
    }
}

#[test]
fn maximals_are_totally_singular_and_stars_are_uniform() {
    let f = gf4();
    let ps = build_polar_space(&f, 4, &FormSpec::hermitian_identity(4)).unwrap();
    for m in ps.maximals() {
        assert!(ps.is_totally_singular(m).unwrap());
        assert_eq!(m.dim(), 2);
    }
    // every point lies on t + 1 = 3 lines
    assert!(ps.point_stars().iter().all(|s| s.len() == 3));
    let star = point_star(&ps, &ps.points()[0]).unwrap();
    assert_eq!(star.len(), 3);
}

#[test]
fn invalid_forms_are_rejected() {
    let f = gf(3);
    let not_alternating = FormSpec {
        kind: FormKind::Alternating,
        form_dim: 2,
        gram: Some(vec![vec![0, 1], vec![1, 0]]),
        quad: None,
    };
    assert!(matches!(build_polar_space(&f, 2, &not_alternating), Err(PolarError::InvalidForm(_))));

    let degenerate = FormSpec {
        kind: FormKind::Alternating,
        form_dim: 4,
        gram: Some(vec![vec![0, 1, 0, 0], vec![2, 0, 0, 0], vec![0, 0, 0, 0], vec![0, 0, 0, 0]]),
        quad: None,
    };
    assert!(matches!(build_polar_space(&f, 4, &degenerate), Err(PolarError::DegenerateForm(2))));

    // anisotropic: x^2 + y^2 over GF(3) has no singular points
    let anisotropic = FormSpec::quadratic(2, &[(0, 0, 1), (1, 1, 1)]);
    assert_eq!(build_polar_space(&f, 2, &anisotropic).unwrap_err(), PolarError::RankZero);

    let g2 = gf(2);
    assert!(build_polar_space(&g2, 2, &FormSpec::hermitian_identity(2)).is_err());
    assert!(matches!(
        build_polar_space(&g2, 3, &FormSpec::symplectic(&g2, 4)),
        Err(PolarError::AmbientTooSmall { .. })
    ));
    assert!(build_polar_space_with_cap(&g2, 6, &FormSpec::symplectic(&g2, 6), 10).is_err());
}

#[test]
fn form_config_json_shape() {
    let text = r#"{"kind":"quadratic","form_dim":5,"quad":[[0,1,0,0,0],[0,0,0,0,0],[0,0,0,1,0],[0,0,0,0,0],[0,0,0,0,1]]}"#;
    let spec: FormSpec = serde_json::from_str(text).unwrap();
    assert_eq!(spec, parabolic_q42());
    assert_eq!(serde_json::to_string(&spec).unwrap(), text);
}
