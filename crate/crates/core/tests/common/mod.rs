//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's linear algebra; scalar arithmetic comes from the field
//! tables, which are themselves checked against `poly_mul`.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use qgeom::{build_field, Field, FieldSpec, FormSpec};

pub fn gf(p: u32) -> Field {
    build_field(&FieldSpec::prime(p)).unwrap()
}

pub fn gf4() -> Field {
    build_field(&FieldSpec::extension(2, 2, &[1, 1, 1])).unwrap()
}

pub fn field_by_order(q: usize) -> Field {
    match q {
        2 => gf(2),
        3 => gf(3),
        4 => gf4(),
        5 => gf(5),
        7 => gf(7),
        8 => build_field(&FieldSpec::extension(2, 3, &[1, 1, 0, 1])).unwrap(),
        9 => build_field(&FieldSpec::extension(3, 2, &[1, 0, 1])).unwrap(),
        16 => build_field(&FieldSpec::extension(2, 4, &[1, 1, 0, 0, 1])).unwrap(),
        _ => panic!("no test field of order {q}"),
    }
}

/// Little-endian base-p digits of an element code.
pub fn digits(code: u32, p: u32, e: u32) -> Vec<u32> {
    let mut c = code;
    (0..e)
        .map(|_| {
            let d = c % p;
            c /= p;
            d
        })
        .collect()
}

pub fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Schoolbook polynomial product reduced modulo a monic modulus.
pub fn poly_mul(a: u32, b: u32, p: u32, modulus: &[u32]) -> u32 {
    let e = (modulus.len() - 1) as u32;
    let (x, y) = (digits(a, p, e), digits(b, p, e));
    let mut prod = vec![0u32; 2 * e as usize];
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            prod[i + j] = (prod[i + j] + xi * yj) % p;
        }
    }
    for deg in (e as usize..prod.len()).rev() {
        let c = prod[deg];
        if c != 0 {
            for (t, &m) in modulus.iter().enumerate() {
                let idx = deg - e as usize + t;
                prod[idx] = (prod[idx] + (p - c) * m % p) % p;
            }
        }
    }
    undigits(&prod[..e as usize], p)
}

pub fn poly_add(a: u32, b: u32, p: u32, e: u32) -> u32 {
    let (x, y) = (digits(a, p, e), digits(b, p, e));
    undigits(&x.iter().zip(&y).map(|(u, v)| (u + v) % p).collect::<Vec<_>>(), p)
}

/// Every linear combination of `rows`, by brute force.
pub fn span_set(field: &Field, n: usize, rows: &[Vec<u8>]) -> BTreeSet<Vec<u8>> {
    let mut set = BTreeSet::new();
    set.insert(vec![0u8; n]);
    for r in rows {
        let current: Vec<Vec<u8>> = set.iter().cloned().collect();
        for v in current {
            for c in field.nonzero() {
                let w: Vec<u8> = v.iter().zip(r).map(|(&a, &b)| field.add(a, field.mul(c, b))).collect();
                set.insert(w);
            }
        }
    }
    set
}

/// Dimension recovered from the size of a vector set.
pub fn log_q(size: usize, q: usize) -> usize {
    let mut d = 0;
    let mut s = 1;
    while s < size {
        s *= q;
        d += 1;
    }
    assert_eq!(s, size, "not a power of q");
    d
}

pub fn dot(field: &Field, a: &[u8], b: &[u8]) -> u8 {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
}

/// Number of k-dimensional subspaces, counted as ordered bases over |GL_k|.
pub fn count_by_bases(n: usize, k: usize, q: u128) -> u128 {
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k as u32 {
        num *= q.pow(n as u32) - q.pow(i);
        den *= q.pow(k as u32) - q.pow(i);
    }
    num / den
}

/// Plain BFS distances from `s` over adjacency lists.
pub fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

pub fn all_vectors(q: usize, n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..q as u8).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Normalizes a nonzero vector so its first nonzero entry is 1.
pub fn normalize(field: &Field, v: &[u8]) -> Vec<u8> {
    let lead = *v.iter().find(|&&x| x != 0).expect("nonzero");
    let inv = field.inv(lead);
    v.iter().map(|&x| field.mul(inv, x)).collect()
}

/// Projective points (normalized representatives) isotropic for a Gram matrix
/// `B` with `x B σ(x)^T = 0`, where σ is the conjugation for hermitian forms.
pub fn isotropic_points(field: &Field, n: usize, spec: &FormSpec) -> BTreeSet<Vec<u8>> {
    let q = field.order();
    let value = |x: &[u8]| -> u8 {
        let d = spec.form_dim;
        match spec.kind {
            qgeom::FormKind::Quadratic => {
                let quad = spec.quad.as_ref().unwrap();
                let mut acc = 0;
                for i in 0..d {
                    for j in i..d {
                        let c = quad[i][j] as u8;
                        acc = field.add(acc, field.mul(c, field.mul(x[i], x[j])));
                    }
                }
                acc
            }
            kind => {
                let gram = spec.gram.as_ref().unwrap();
                let sigma = |a: u8| if kind == qgeom::FormKind::Hermitian { field.conj(a).unwrap() } else { a };
                let mut acc = 0;
                for i in 0..d {
                    for j in 0..d {
                        let t = field.mul(x[i], field.mul(gram[i][j] as u8, sigma(x[j])));
                        acc = field.add(acc, t);
                    }
                }
                acc
            }
        }
    };
    all_vectors(q, n)
        .into_iter()
        .filter(|v| v.iter().any(|&x| x != 0))
        .filter(|v| v[spec.form_dim..].iter().all(|&x| x == 0))
        .filter(|v| value(v) == 0)
        .map(|v| normalize(field, &v))
        .collect()
}
