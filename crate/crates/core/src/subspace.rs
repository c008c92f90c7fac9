//! Exact linear algebra over GF(q).
//!
//! A [`Subspace`] is stored as the reduced row echelon form of any of its
//! bases, which makes equality, hashing and ordering structural. Vectors are
//! row vectors of element codes; a matrix acts on the right (`v -> v A`).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubspaceError {
    #[error("ambient dimensions differ ({0} vs {1})")]
    AmbientMismatch(usize, usize),
    #[error("vector of length {got} in a space of dimension {expected}")]
    BadVectorLength { expected: usize, got: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix shapes {0:?} and {1:?} are incompatible")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("entry {0} is not an element of the field")]
    BadEntry(u32),
}

/// A dense row-major matrix over a finite field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatrixGF {
    rows: usize,
    cols: usize,
    entries: Vec<Elem>,
}

impl MatrixGF {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixGF { rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Elem>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count does not match shape");
        MatrixGF { rows, cols, entries }
    }

    /// Builds a matrix from row vectors, all of length `cols`.
    pub fn from_rows<R: AsRef<[Elem]>>(cols: usize, rows: &[R]) -> Result<Self, SubspaceError> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(SubspaceError::BadVectorLength { expected: cols, got: r.len() });
            }
            entries.extend_from_slice(r);
        }
        Ok(MatrixGF { rows: rows.len(), cols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Elem] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Elem]> {
        self.entries.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        self.row_iter().map(<[Elem]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul(&self, field: &Field, other: &MatrixGF) -> Result<MatrixGF, SubspaceError> {
        if self.cols != other.rows {
            return Err(SubspaceError::ShapeMismatch((self.rows, self.cols), (other.rows, other.cols)));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = field.add(out.get(i, j), field.mul(a, other.get(l, j)));
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn apply(&self, field: &Field, v: &[Elem]) -> Vec<Elem> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = field.add(*o, field.mul(a, self.get(i, j)));
            }
        }
        out
    }

    /// Applies `x -> x^(p^power)` to every entry.
    pub fn frobenius(&self, field: &Field, power: usize) -> MatrixGF {
        MatrixGF {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&a| field.frobenius(a, power)).collect(),
        }
    }

    pub fn rank(&self, field: &Field) -> usize {
        rref(field, self).1
    }

    pub fn inverse(&self, field: &Field) -> Result<MatrixGF, SubspaceError> {
        if self.rows != self.cols {
            return Err(SubspaceError::ShapeMismatch((self.rows, self.cols), (self.cols, self.rows)));
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, 1);
        }
        let (red, _) = rref(field, &aug);
        if red.rows < n || (0..n).any(|i| red.get(i, i) != 1) {
            return Err(SubspaceError::Singular);
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, red.get(i, n + j));
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self, field: &Field) -> bool {
        self.rows == self.cols && self.rank(field) == self.rows
    }
}

/// In-place Gauss-Jordan elimination. Returns the pivot columns; the first
/// `pivots.len()` rows hold the reduced nonzero rows afterwards.
fn eliminate(field: &Field, m: &mut MatrixGF) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| m.get(i, c) != 0) else {
            continue;
        };
        if pr != r {
            for j in 0..cols {
                m.entries.swap(pr * cols + j, r * cols + j);
            }
        }
        let inv = field.inv(m.get(r, c));
        if inv != 1 {
            for j in c..cols {
                let v = field.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = m.get(i, c);
            if factor == 0 {
                continue;
            }
            for j in c..cols {
                let v = field.sub(m.get(i, j), field.mul(factor, m.get(r, j)));
                m.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Reduced row echelon form of the row space with zero rows removed, and rank.
pub fn rref(field: &Field, m: &MatrixGF) -> (MatrixGF, usize) {
    let mut work = m.clone();
    let rank = eliminate(field, &mut work).len();
    work.entries.truncate(rank * work.cols);
    work.rows = rank;
    (work, rank)
}

/// Rank of a set of row vectors of length `cols`.
pub fn rank_of_rows(field: &Field, cols: usize, rows: &[&[Elem]]) -> usize {
    let mut m = MatrixGF::zeros(rows.len(), cols);
    for (i, r) in rows.iter().enumerate() {
        m.entries[i * cols..(i + 1) * cols].copy_from_slice(r);
    }
    eliminate(field, &mut m).len()
}

/// A subspace of GF(q)^n held in canonical reduced row echelon form.
///
/// Ordering is by `(n, dim)` and then lexicographic on the RREF entries,
/// which is the canonical vertex order used everywhere.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    n: u8,
    dim: u8,
    basis: Vec<Elem>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace{:?}", self.rows())
    }
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace { n: n as u8, dim: 0, basis: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        Self::from_rref_unchecked(MatrixGF::identity(n))
    }

    /// Wraps a matrix already in RREF with no zero rows.
    pub fn from_rref_unchecked(m: MatrixGF) -> Self {
        Subspace { n: m.cols as u8, dim: m.rows as u8, basis: m.entries }
    }

    pub fn from_matrix(field: &Field, m: &MatrixGF) -> Self {
        Self::from_rref_unchecked(rref(field, m).0)
    }

    /// Span of arbitrary vectors of length `n`.
    pub fn span<R: AsRef<[Elem]>>(field: &Field, n: usize, vectors: &[R]) -> Result<Self, SubspaceError> {
        Ok(Self::from_matrix(field, &MatrixGF::from_rows(n, vectors)?))
    }

    /// Span of standard basis vectors, given as 0-based coordinates.
    pub fn coordinate(n: usize, coords: &[usize]) -> Self {
        let mut cs = coords.to_vec();
        cs.sort_unstable();
        cs.dedup();
        let mut m = MatrixGF::zeros(cs.len(), n);
        for (i, &c) in cs.iter().enumerate() {
            m.set(i, c, 1);
        }
        Self::from_rref_unchecked(m)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n as usize
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn basis(&self) -> MatrixGF {
        MatrixGF { rows: self.dim(), cols: self.ambient_dim(), entries: self.basis.clone() }
    }

    pub fn entries(&self) -> &[Elem] {
        &self.basis
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        let n = self.ambient_dim();
        &self.basis[i * n..(i + 1) * n]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Elem]> {
        let n = self.ambient_dim().max(1);
        self.basis.chunks(n)
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        self.row_iter().map(<[Elem]>::to_vec).collect()
    }

    /// Pivot column of each basis row.
    pub fn pivots(&self) -> Vec<usize> {
        self.row_iter()
            .map(|r| r.iter().position(|&x| x != 0).expect("RREF rows are nonzero"))
            .collect()
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), SubspaceError> {
        if self.n != other.n {
            Err(SubspaceError::AmbientMismatch(self.ambient_dim(), other.ambient_dim()))
        } else {
            Ok(())
        }
    }

    fn stacked(&self, other: &Subspace) -> MatrixGF {
        let mut entries = self.basis.clone();
        entries.extend_from_slice(&other.basis);
        MatrixGF { rows: self.dim() + other.dim(), cols: self.ambient_dim(), entries }
    }

    pub fn sum(&self, field: &Field, other: &Subspace) -> Result<Subspace, SubspaceError> {
        self.check_ambient(other)?;
        Ok(Self::from_matrix(field, &self.stacked(other)))
    }

    /// `dim(A + B)` without building the canonical form.
    pub fn sum_dim(&self, field: &Field, other: &Subspace) -> usize {
        debug_assert_eq!(self.n, other.n);
        let mut m = self.stacked(other);
        eliminate(field, &mut m).len()
    }

    /// `dim(A ∩ B)` through the modular law.
    pub fn meet_dim(&self, field: &Field, other: &Subspace) -> usize {
        self.dim() + other.dim() - self.sum_dim(field, other)
    }

    /// Intersection by the Zassenhaus block elimination: rows `[a | a]` for
    /// `a` in A and `[b | 0]` for `b` in B; after elimination the rows whose
    /// left half vanishes carry a basis of A ∩ B in their right half.
    pub fn intersect(&self, field: &Field, other: &Subspace) -> Result<Subspace, SubspaceError> {
        self.check_ambient(other)?;
        let n = self.ambient_dim();
        let mut m = MatrixGF::zeros(self.dim() + other.dim(), 2 * n);
        for (i, r) in self.row_iter().enumerate() {
            m.entries[i * 2 * n..i * 2 * n + n].copy_from_slice(r);
            m.entries[i * 2 * n + n..(i + 1) * 2 * n].copy_from_slice(r);
        }
        for (i, r) in other.row_iter().enumerate() {
            let i = i + self.dim();
            m.entries[i * 2 * n..i * 2 * n + n].copy_from_slice(r);
        }
        let pivots = eliminate(field, &mut m);
        let rows: Vec<&[Elem]> = pivots
            .iter()
            .enumerate()
            .filter(|(_, &c)| c >= n)
            .map(|(i, _)| &m.entries[i * 2 * n + n..(i + 1) * 2 * n])
            .collect();
        Ok(Subspace::span(field, n, &rows).expect("row lengths match"))
    }

    /// True iff `other ⊆ self`.
    pub fn contains(&self, field: &Field, other: &Subspace) -> Result<bool, SubspaceError> {
        self.check_ambient(other)?;
        Ok(other.dim() <= self.dim() && self.sum_dim(field, other) == self.dim())
    }

    pub fn contains_vector(&self, field: &Field, v: &[Elem]) -> bool {
        self.reduce(field, v).iter().all(|&x| x == 0)
    }

    /// Subtracts multiples of the basis rows so that `v` vanishes on every
    /// pivot column; the result is zero iff `v` lies in the subspace.
    pub fn reduce(&self, field: &Field, v: &[Elem]) -> Vec<Elem> {
        let mut out = v.to_vec();
        for (row, piv) in self.row_iter().zip(self.pivots()) {
            let c = out[piv];
            if c != 0 {
                for (o, &r) in out.iter_mut().zip(row) {
                    *o = field.sub(*o, field.mul(c, r));
                }
            }
        }
        out
    }

    /// `{φ : φ·s = 0 for all s in S}` in the coordinate dual.
    pub fn annihilator(&self, field: &Field) -> Subspace {
        let n = self.ambient_dim();
        let pivots = self.pivots();
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut m = MatrixGF::zeros(free.len(), n);
        for (i, &f) in free.iter().enumerate() {
            m.set(i, f, 1);
            for (r, &p) in pivots.iter().enumerate() {
                m.set(i, p, field.neg(self.row(r)[f]));
            }
        }
        Self::from_matrix(field, &m)
    }

    /// Image under the semilinear map `x -> frob^power(x) · A`.
    pub fn transform(&self, field: &Field, matrix: &MatrixGF, power: usize) -> Subspace {
        let rows: Vec<Vec<Elem>> = self
            .row_iter()
            .map(|r| {
                let twisted: Vec<Elem> = r.iter().map(|&x| field.frobenius(x, power)).collect();
                matrix.apply(field, &twisted)
            })
            .collect();
        Subspace::span(field, matrix.cols(), &rows).expect("row lengths match")
    }

    /// Pads the coordinates with zeros up to ambient dimension `n`.
    pub fn embed_prefix(&self, n: usize) -> Subspace {
        let old = self.ambient_dim();
        assert!(n >= old);
        let mut basis = Vec::with_capacity(self.dim() * n);
        for r in self.row_iter() {
            basis.extend_from_slice(r);
            basis.extend(std::iter::repeat_n(0, n - old));
        }
        Subspace { n: n as u8, dim: self.dim, basis }
    }

    /// All vectors of the subspace, in lexicographic coefficient order.
    pub fn vectors(&self, field: &Field) -> Vec<Vec<Elem>> {
        let n = self.ambient_dim();
        let mut out = vec![vec![0; n]];
        for r in self.row_iter() {
            let mut next = Vec::with_capacity(out.len() * field.order());
            for v in &out {
                for a in field.elements() {
                    let w: Vec<Elem> = v.iter().zip(r).map(|(&x, &y)| field.add(x, field.mul(a, y))).collect();
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }

    /// The 1-dimensional subspaces contained in this subspace.
    pub fn points(&self, field: &Field) -> Vec<Subspace> {
        let mut pts: Vec<Subspace> = self
            .vectors(field)
            .into_iter()
            .filter(|v| v.iter().any(|&x| x != 0))
            .map(|v| Subspace::span(field, self.ambient_dim(), &[v]).unwrap())
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }
}

/// The quotient `V/U` modeled as `GF(q)^(n - dim U)` on the non-pivot
/// coordinates of `U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientSpace {
    ambient_dim: usize,
    mod_out: Subspace,
    transversal: Vec<usize>,
    coordinate_map: MatrixGF,
}

impl QuotientSpace {
    pub fn new(field: &Field, ambient_dim: usize, mod_out: &Subspace) -> Result<Self, SubspaceError> {
        if mod_out.ambient_dim() != ambient_dim {
            return Err(SubspaceError::AmbientMismatch(ambient_dim, mod_out.ambient_dim()));
        }
        let pivots = mod_out.pivots();
        let transversal: Vec<usize> = (0..ambient_dim).filter(|c| !pivots.contains(c)).collect();
        // n × (n - d) matrix acting on row vectors: coordinate j of the image is
        // v[c_j] - Σ_i v[p_i] u_i[c_j]
        let mut map = MatrixGF::zeros(ambient_dim, transversal.len());
        for (j, &c) in transversal.iter().enumerate() {
            map.set(c, j, 1);
            for (i, &p) in pivots.iter().enumerate() {
                map.set(p, j, field.neg(mod_out.row(i)[c]));
            }
        }
        Ok(QuotientSpace { ambient_dim, mod_out: mod_out.clone(), transversal, coordinate_map: map })
    }

    pub fn dim(&self) -> usize {
        self.transversal.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn mod_out(&self) -> &Subspace {
        &self.mod_out
    }

    /// The linear map `V -> W` as an `n × (n - dim U)` matrix on row vectors.
    pub fn coordinate_map(&self) -> &MatrixGF {
        &self.coordinate_map
    }

    pub fn project_vector(&self, field: &Field, v: &[Elem]) -> Vec<Elem> {
        self.coordinate_map.apply(field, v)
    }

    /// The representative of `w` supported on the transversal coordinates.
    pub fn lift_vector(&self, w: &[Elem]) -> Vec<Elem> {
        let mut v = vec![0; self.ambient_dim];
        for (&c, &x) in self.transversal.iter().zip(w) {
            v[c] = x;
        }
        v
    }

    /// `(S + U) / U` in W-coordinates.
    pub fn project(&self, field: &Field, s: &Subspace) -> Result<Subspace, SubspaceError> {
        if s.ambient_dim() != self.ambient_dim {
            return Err(SubspaceError::AmbientMismatch(self.ambient_dim, s.ambient_dim()));
        }
        let rows: Vec<Vec<Elem>> = s.row_iter().map(|r| self.project_vector(field, r)).collect();
        Ok(Subspace::span(field, self.dim(), &rows)?)
    }

    /// The full preimage `lift(T) + U` of a subspace of W.
    pub fn preimage(&self, field: &Field, t: &Subspace) -> Result<Subspace, SubspaceError> {
        if t.ambient_dim() != self.dim() {
            return Err(SubspaceError::AmbientMismatch(self.dim(), t.ambient_dim()));
        }
        let mut rows: Vec<Vec<Elem>> = t.row_iter().map(|r| self.lift_vector(r)).collect();
        rows.extend(self.mod_out.rows());
        Subspace::span(field, self.ambient_dim, &rows)
    }
}

/// Serialized form: a list of basis rows of element codes.
pub fn to_rows_u32(s: &Subspace) -> Vec<Vec<u32>> {
    s.row_iter().map(|r| r.iter().map(|&x| x as u32).collect()).collect()
}

/// Parses a list of rows of element codes into a subspace of GF(q)^n.
pub fn from_rows_u32(field: &Field, n: usize, rows: &[Vec<u32>]) -> Result<Subspace, SubspaceError> {
    let mut converted = Vec::with_capacity(rows.len());
    for r in rows {
        let mut v = Vec::with_capacity(r.len());
        for &x in r {
            if x as usize >= field.order() {
                return Err(SubspaceError::BadEntry(x));
            }
            v.push(x as Elem);
        }
        converted.push(v);
    }
    Subspace::span(field, n, &converted)
}

/// JSON shape for a subspace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubspaceRows(pub Vec<Vec<u32>>);

impl From<&Subspace> for SubspaceRows {
    fn from(s: &Subspace) -> Self {
        SubspaceRows(to_rows_u32(s))
    }
}
