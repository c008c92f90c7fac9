//! Grassmannians `G_k(V)` of `GF(q)^n`, Grassmann graphs, stars and duality.

use rayon::prelude::*;
use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::graph::{FiniteGraph, GraphError, SubspaceGraph};
use crate::subspace::{MatrixGF, QuotientSpace, Subspace, SubspaceError};

/// Default bound on the number of subspaces a single enumeration may produce.
pub const DEFAULT_ENUM_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrassmannError {
    #[error("enumeration of {count} subspaces exceeds the cap {cap}")]
    TooLarge { count: u128, cap: u128 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Γ_{k}(V) with n = {n} is a complete graph or trivial (need 1 < k < n-1)")]
    DegenerateParameters { n: usize, k: usize },
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The number of `k`-dimensional subspaces of `GF(q)^n`.
///
/// Uses the product `Π_{i<k} (q^{n-i} - 1) / (q^{i+1} - 1)`; every prefix of
/// the product is itself a Gaussian binomial, so the running value stays an
/// integer. Saturates at `u128::MAX` on overflow.
pub fn gaussian_binomial(n: usize, k: usize, q: u64) -> u128 {
    if k > n {
        return 0;
    }
    let q = q as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        let num = q.checked_pow((n - i) as u32).map(|x| x - 1);
        let den = q.pow((i + 1) as u32) - 1;
        match num.and_then(|num| acc.checked_mul(num)) {
            Some(v) => acc = v / den,
            None => return u128::MAX,
        }
    }
    acc
}

/// All `k`-dimensional subspaces of `GF(q)^n`, in canonical order.
///
/// Built directly from RREF patterns: choose the pivot columns, then fill
/// every free position (right of the row's pivot, outside pivot columns).
pub fn enum_grassmannian(field: &Field, n: usize, k: usize, cap: u128) -> Result<Vec<Subspace>, GrassmannError> {
    if k > n {
        return Err(GrassmannError::DimensionMismatch(format!("k = {k} > n = {n}")));
    }
    let count = gaussian_binomial(n, k, field.order() as u64);
    if count > cap {
        return Err(GrassmannError::TooLarge { count, cap });
    }
    let q = field.order();
    let mut out = Vec::with_capacity(count as usize);
    for pivots in combinations(n, k) {
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(r, &p)| (p + 1..n).filter(|c| !pivots.contains(c)).map(move |c| (r, c)))
            .collect();
        let mut template = MatrixGF::zeros(k, n);
        for (r, &p) in pivots.iter().enumerate() {
            template.set(r, p, 1);
        }
        let mut digits = vec![0usize; free.len()];
        loop {
            let mut m = template.clone();
            for (&(r, c), &d) in free.iter().zip(&digits) {
                m.set(r, c, d as Elem);
            }
            out.push(Subspace::from_rref_unchecked(m));
            // odometer increment over the free entries
            let mut pos = 0;
            while pos < digits.len() {
                digits[pos] += 1;
                if digits[pos] < q {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == digits.len() {
                break;
            }
        }
    }
    out.par_sort_unstable();
    Ok(out)
}

/// `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            if n - i < k - current.len() {
                break;
            }
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// Graph distance in `Γ_k(V)`: `k - dim(A ∩ B)`.
pub fn grassmann_distance(field: &Field, a: &Subspace, b: &Subspace) -> Result<usize, GrassmannError> {
    if a.dim() != b.dim() || a.ambient_dim() != b.ambient_dim() {
        return Err(GrassmannError::DimensionMismatch(format!(
            "dim {} in GF(q)^{} vs dim {} in GF(q)^{}",
            a.dim(),
            a.ambient_dim(),
            b.dim(),
            b.ambient_dim()
        )));
    }
    Ok(a.dim() - a.meet_dim(field, b))
}

/// The Grassmann graph `Γ_k(GF(q)^n)`.
#[derive(Debug, Clone)]
pub struct GrassmannGraph {
    field: Field,
    n: usize,
    k: usize,
    inner: SubspaceGraph,
}

#[derive(Debug, Clone, Copy)]
pub struct GrassmannOptions {
    pub cap: u128,
    /// Permit `k ∈ {0, 1, n-1, n}`, where the graph is complete or trivial.
    pub allow_degenerate: bool,
}

impl Default for GrassmannOptions {
    fn default() -> Self {
        GrassmannOptions { cap: DEFAULT_ENUM_CAP, allow_degenerate: false }
    }
}

impl GrassmannGraph {
    pub fn new(field: &Field, n: usize, k: usize) -> Result<Self, GrassmannError> {
        Self::with_options(field, n, k, GrassmannOptions::default())
    }

    pub fn with_options(field: &Field, n: usize, k: usize, opts: GrassmannOptions) -> Result<Self, GrassmannError> {
        if !(1 < k && k + 1 < n) && !opts.allow_degenerate {
            return Err(GrassmannError::DegenerateParameters { n, k });
        }
        let vertices = enum_grassmannian(field, n, k, opts.cap)?;
        Ok(GrassmannGraph { field: field.clone(), n, k, inner: SubspaceGraph::new(field, vertices) })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertices(&self) -> &[Subspace] {
        self.inner.vertices()
    }

    pub fn index_of(&self, s: &Subspace) -> Option<usize> {
        self.inner.index_of(s)
    }

    pub fn graph(&self) -> &FiniteGraph {
        self.inner.graph()
    }

    pub fn subspace_graph(&self) -> &SubspaceGraph {
        &self.inner
    }

    pub fn order(&self) -> usize {
        self.inner.order()
    }

    /// `k - dim(A ∩ B)` for two vertex indices.
    pub fn formula_distance(&self, a: usize, b: usize) -> usize {
        let (va, vb) = (&self.vertices()[a], &self.vertices()[b]);
        self.k - va.meet_dim(&self.field, vb)
    }
}

/// The `k`-dimensional subspaces containing `u`, in canonical order.
///
/// Generated through the quotient `V/U`: each `(k - dim U)`-subspace of the
/// quotient has exactly one preimage in the star.
pub fn star(field: &Field, u: &Subspace, k: usize, cap: u128) -> Result<Vec<Subspace>, GrassmannError> {
    let n = u.ambient_dim();
    if u.dim() >= k || k > n {
        return Err(GrassmannError::DimensionMismatch(format!(
            "star of a {}-dim subspace at level k = {k} in dimension {n}",
            u.dim()
        )));
    }
    let w = QuotientSpace::new(field, n, u)?;
    let mut out: Vec<Subspace> = enum_grassmannian(field, w.dim(), k - u.dim(), cap)?
        .iter()
        .map(|t| w.preimage(field, t))
        .collect::<Result<_, _>>()?;
    out.sort_unstable();
    Ok(out)
}

/// `A -> ann(A)`, identifying `Γ_k(V)` with `Γ_{n-k}(V*)`.
pub fn duality_map(field: &Field, a: &Subspace) -> Subspace {
    a.annihilator(field)
}

/// The vertex map induced by duality, as indices into `target`.
pub fn duality_vertex_map(source: &GrassmannGraph, target: &GrassmannGraph) -> Result<Vec<usize>, GrassmannError> {
    if source.n() != target.n() || source.k() + target.k() != source.n() {
        return Err(GrassmannError::DimensionMismatch(format!(
            "duality sends Γ_{}(n={}) to Γ_{}, not Γ_{}(n={})",
            source.k(),
            source.n(),
            source.n() - source.k(),
            target.k(),
            target.n()
        )));
    }
    Ok(source
        .vertices()
        .iter()
        .map(|a| target.index_of(&duality_map(source.field(), a)).expect("annihilator has complementary dimension"))
        .collect())
}

/// An invertible matrix sending `from` onto `to` (both `k`-dim): each basis
/// is completed to a basis of V with standard vectors and the first basis is
/// mapped onto the second.
pub fn transitivity_witness(field: &Field, from: &Subspace, to: &Subspace) -> Result<MatrixGF, GrassmannError> {
    if from.dim() != to.dim() || from.ambient_dim() != to.ambient_dim() {
        return Err(GrassmannError::DimensionMismatch("subspaces of different shape".into()));
    }
    let src = complete_basis(field, from);
    let dst = complete_basis(field, to);
    Ok(src.inverse(field)?.mul(field, &dst)?)
}

/// Basis rows of `s` followed by standard vectors completing them to a basis.
pub(crate) fn complete_basis(field: &Field, s: &Subspace) -> MatrixGF {
    let n = s.ambient_dim();
    let mut rows = s.rows();
    let pivots = s.pivots();
    for c in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0; n];
        v[c] = 1;
        rows.push(v);
    }
    let m = MatrixGF::from_rows(n, &rows).expect("rows have length n");
    debug_assert!(m.is_invertible(field));
    m
}
