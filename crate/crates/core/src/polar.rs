//! Reflexive and quadratic forms, their polar spaces, and dual polar graphs.
//!
//! A form lives on the coordinate prefix `V' = ⟨e_1, ..., e_{n'}⟩` of the
//! ambient `V = GF(q)^n`, so polar spaces sitting in a proper subspace of `V`
//! are configured by choosing `n' < n`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field, FieldError};
use crate::grassmann::{enum_grassmannian, gaussian_binomial, GrassmannError, DEFAULT_ENUM_CAP};
use crate::graph::SubspaceGraph;
use crate::subspace::{MatrixGF, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolarError {
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("form is degenerate: radical has dimension {0}")]
    DegenerateForm(usize),
    #[error("polar space has no singular points")]
    RankZero,
    #[error("a maximal totally singular subspace of dimension {found} exists below the rank {rank}")]
    NonUniformMaximals { found: usize, rank: usize },
    #[error("vector has a nonzero coordinate beyond the form support ({0})")]
    OutsideSupport(usize),
    #[error("operation needs a {expected} form")]
    KindMismatch { expected: &'static str },
    #[error("subspace is not totally singular")]
    NotSingular,
    #[error("form dimension {form_dim} exceeds ambient dimension {n}")]
    AmbientTooSmall { form_dim: usize, n: usize },
    #[error("{0} projective points exceed the enumeration cap")]
    TooLarge(u128),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    Alternating,
    Quadratic,
    Hermitian,
}

/// Configuration-level description of a form.
///
/// `gram` is used by alternating and hermitian kinds; `quad` (upper
/// triangular, `Q(x) = Σ_{i<=j} quad[i][j] x_i x_j`) by the quadratic kind.
/// Entries are element codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSpec {
    pub kind: FormKind,
    pub form_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<Vec<Vec<u32>>>,
}

impl FormSpec {
    /// Standard symplectic form pairing `(e_1, e_2), (e_3, e_4), ...`.
    pub fn symplectic(field: &Field, form_dim: usize) -> FormSpec {
        let mut gram = vec![vec![0u32; form_dim]; form_dim];
        let minus_one = field.neg(1) as u32;
        for i in (0..form_dim).step_by(2) {
            gram[i][i + 1] = 1;
            gram[i + 1][i] = minus_one;
        }
        FormSpec { kind: FormKind::Alternating, form_dim, gram: Some(gram), quad: None }
    }

    pub fn hermitian_identity(form_dim: usize) -> FormSpec {
        let gram = (0..form_dim).map(|i| (0..form_dim).map(|j| (i == j) as u32).collect()).collect();
        FormSpec { kind: FormKind::Hermitian, form_dim, gram: Some(gram), quad: None }
    }

    /// Quadratic form from monomials `(i, j, coefficient)` with `i <= j`.
    pub fn quadratic(form_dim: usize, monomials: &[(usize, usize, u32)]) -> FormSpec {
        let mut quad = vec![vec![0u32; form_dim]; form_dim];
        for &(i, j, c) in monomials {
            quad[i.min(j)][i.max(j)] = c;
        }
        FormSpec { kind: FormKind::Quadratic, form_dim, gram: None, quad: Some(quad) }
    }
}

/// A validated form over a concrete field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Form {
    kind: FormKind,
    dim: usize,
    /// Gram matrix of the sesquilinear form; for the quadratic kind this is
    /// the matrix of the polar form `Q(x+y) - Q(x) - Q(y)`.
    gram: MatrixGF,
    quad: Option<MatrixGF>,
}

fn parse_grid(field: &Field, dim: usize, grid: &[Vec<u32>], what: &str) -> Result<MatrixGF, PolarError> {
    if grid.len() != dim || grid.iter().any(|r| r.len() != dim) {
        return Err(PolarError::InvalidForm(format!("{what} must be {dim}×{dim}")));
    }
    let mut m = MatrixGF::zeros(dim, dim);
    for (i, row) in grid.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x as usize >= field.order() {
                return Err(PolarError::InvalidForm(format!("{what}[{i}][{j}] = {x} is not a field element")));
            }
            m.set(i, j, x as Elem);
        }
    }
    Ok(m)
}

impl Form {
    /// Validates shape and symmetry; does not check nondegeneracy.
    pub fn new(field: &Field, spec: &FormSpec) -> Result<Form, PolarError> {
        let dim = spec.form_dim;
        if dim == 0 {
            return Err(PolarError::InvalidForm("form_dim must be positive".into()));
        }
        match spec.kind {
            FormKind::Alternating | FormKind::Hermitian => {
                let grid = spec
                    .gram
                    .as_ref()
                    .ok_or_else(|| PolarError::InvalidForm("missing gram matrix".into()))?;
                let gram = parse_grid(field, dim, grid, "gram")?;
                for i in 0..dim {
                    for j in 0..dim {
                        let (a, b) = (gram.get(i, j), gram.get(j, i));
                        let ok = match spec.kind {
                            FormKind::Alternating => a == field.neg(b) && (i != j || a == 0),
                            _ => a == field.conj(b)?,
                        };
                        if !ok {
                            return Err(PolarError::InvalidForm(format!(
                                "gram is not {} at ({i}, {j})",
                                if spec.kind == FormKind::Alternating { "alternating" } else { "hermitian" }
                            )));
                        }
                    }
                }
                Ok(Form { kind: spec.kind, dim, gram, quad: None })
            }
            FormKind::Quadratic => {
                let grid = spec
                    .quad
                    .as_ref()
                    .ok_or_else(|| PolarError::InvalidForm("missing quad coefficients".into()))?;
                let quad = parse_grid(field, dim, grid, "quad")?;
                let mut gram = MatrixGF::zeros(dim, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        if i > j && quad.get(i, j) != 0 {
                            return Err(PolarError::InvalidForm("quad must be upper triangular".into()));
                        }
                        let v = if i == j {
                            field.add(quad.get(i, i), quad.get(i, i))
                        } else {
                            field.add(quad.get(i, j), quad.get(j, i))
                        };
                        gram.set(i, j, v);
                    }
                }
                Ok(Form { kind: spec.kind, dim, gram, quad: Some(quad) })
            }
        }
    }

    pub fn kind(&self) -> FormKind {
        self.kind
    }

    /// `n'`, the dimension of the support `V'`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &MatrixGF {
        &self.gram
    }

    fn support<'a>(&self, x: &'a [Elem]) -> Result<&'a [Elem], PolarError> {
        if x.len() < self.dim {
            return Err(PolarError::InvalidForm(format!("vector of length {} < form_dim {}", x.len(), self.dim)));
        }
        if let Some(pos) = x[self.dim..].iter().position(|&c| c != 0) {
            return Err(PolarError::OutsideSupport(self.dim + pos));
        }
        Ok(&x[..self.dim])
    }

    /// The sesquilinear value: `xᵀ G y` (alternating), `xᵀ G conj(y)`
    /// (hermitian), or the polar form `Q(x+y) - Q(x) - Q(y)` (quadratic).
    pub fn evaluate(&self, field: &Field, x: &[Elem], y: &[Elem]) -> Result<Elem, PolarError> {
        let (x, y) = (self.support(x)?, self.support(y)?);
        Ok(self.pair(field, x, y))
    }

    fn pair(&self, field: &Field, x: &[Elem], y: &[Elem]) -> Elem {
        let mut acc = 0;
        for (i, &xi) in x.iter().enumerate().take(self.dim) {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate().take(self.dim) {
                if yj == 0 {
                    continue;
                }
                let yj = if self.kind == FormKind::Hermitian { field.conj(yj).expect("even degree") } else { yj };
                acc = field.add(acc, field.mul(xi, field.mul(self.gram.get(i, j), yj)));
            }
        }
        acc
    }

    pub fn evaluate_quadratic(&self, field: &Field, x: &[Elem]) -> Result<Elem, PolarError> {
        let x = self.support(x)?;
        if self.kind != FormKind::Quadratic {
            return Err(PolarError::KindMismatch { expected: "quadratic" });
        }
        Ok(self.quad_value(field, x))
    }

    fn quad_value(&self, field: &Field, x: &[Elem]) -> Elem {
        let quad = self.quad.as_ref().expect("quadratic form");
        let mut acc = 0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let c = quad.get(i, j);
                if c != 0 {
                    acc = field.add(acc, field.mul(c, field.mul(x[i], x[j])));
                }
            }
        }
        acc
    }

    /// A vector is singular when `Q(x) = 0` (quadratic) or `B(x, x) = 0`.
    pub fn is_singular_vector(&self, field: &Field, x: &[Elem]) -> bool {
        let x = &x[..self.dim];
        match self.kind {
            FormKind::Quadratic => self.quad_value(field, x) == 0,
            _ => self.pair(field, x, x) == 0,
        }
    }

    /// The radical, as a subspace of `GF(q)^{n'}`.
    ///
    /// For the quadratic kind this is the radical of the polar form cut down
    /// to its singular vectors. In odd characteristic every polar-radical
    /// vector is already singular. In characteristic 2, `Q` restricted to the
    /// polar radical satisfies `Q(Σ a_i r_i) = (Σ a_i sqrt(Q(r_i)))^2`, so the
    /// singular vectors form the kernel of one linear functional.
    pub fn radical(&self, field: &Field) -> Subspace {
        // v with vᵀG = 0, i.e. the annihilator of the column space of G
        let cols = Subspace::from_matrix(field, &self.gram.transpose());
        let polar_radical = cols.annihilator(field);
        if self.kind != FormKind::Quadratic || field.characteristic() != 2 || polar_radical.dim() == 0 {
            return polar_radical;
        }
        let roots: Vec<Elem> = polar_radical
            .row_iter()
            .map(|r| field.sqrt_char2(self.quad_value(field, r)))
            .collect();
        if roots.iter().all(|&s| s == 0) {
            return polar_radical;
        }
        // kernel of a -> Σ a_i roots_i, mapped back through the radical basis
        let functional = Subspace::span(field, roots.len(), &[roots]).expect("length matches");
        let kernel = functional.annihilator(field);
        let basis = polar_radical.basis();
        let rows: Vec<Vec<Elem>> = kernel.row_iter().map(|coeffs| basis.apply(field, coeffs)).collect();
        Subspace::span(field, self.dim, &rows).expect("length matches")
    }

    /// Checks all basis vectors and all basis pairs, which suffices for the span.
    pub fn is_totally_singular(&self, field: &Field, s: &Subspace) -> Result<bool, PolarError> {
        let rows: Vec<&[Elem]> = s.row_iter().collect();
        for r in &rows {
            self.support(r)?;
        }
        for (i, x) in rows.iter().enumerate() {
            if !self.is_singular_vector(field, x) {
                return Ok(false);
            }
            for y in &rows[i + 1..] {
                if self.pair(field, x, y) != 0 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn orthogonal_to_all(&self, field: &Field, x: &[Elem], s: &Subspace) -> bool {
        s.row_iter().all(|r| self.pair(field, x, r) == 0)
    }
}

/// A polar space embedded in `PG(V)`, with all of its maximal singular subspaces.
#[derive(Debug, Clone)]
pub struct PolarSpace {
    field: Field,
    n: usize,
    form: Form,
    v_prime: Subspace,
    points: Vec<Subspace>,
    lines: Vec<Subspace>,
    rank: usize,
    maximals: Vec<Subspace>,
}

impl PolarSpace {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Ambient dimension of `V`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    /// The configured support `V'` of the form.
    pub fn v_prime(&self) -> &Subspace {
        &self.v_prime
    }

    pub fn points(&self) -> &[Subspace] {
        &self.points
    }

    pub fn lines(&self) -> &[Subspace] {
        &self.lines
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn maximals(&self) -> &[Subspace] {
        &self.maximals
    }

    pub fn is_totally_singular(&self, s: &Subspace) -> Result<bool, PolarError> {
        self.form.is_totally_singular(&self.field, s)
    }

    /// Distinct points spanning a singular line.
    pub fn collinear(&self, p: &Subspace, q: &Subspace) -> bool {
        p != q && self.form.pair(&self.field, p.row(0), q.row(0)) == 0
    }

    /// Indices of the maximals containing each point, in point order.
    pub fn point_stars(&self) -> Vec<Vec<usize>> {
        self.points
            .iter()
            .map(|p| {
                (0..self.maximals.len())
                    .filter(|&i| self.maximals[i].contains_vector(&self.field, p.row(0)))
                    .collect()
            })
            .collect()
    }
}

/// Builds the polar space of a nondegenerate form with the default cap.
pub fn build_polar_space(field: &Field, n: usize, spec: &FormSpec) -> Result<PolarSpace, PolarError> {
    build_polar_space_with_cap(field, n, spec, DEFAULT_ENUM_CAP)
}

pub fn build_polar_space_with_cap(field: &Field, n: usize, spec: &FormSpec, cap: u128) -> Result<PolarSpace, PolarError> {
    let form = Form::new(field, spec)?;
    let dim = form.dim();
    if dim > n {
        return Err(PolarError::AmbientTooSmall { form_dim: dim, n });
    }
    let radical = form.radical(field);
    if radical.dim() > 0 {
        return Err(PolarError::DegenerateForm(radical.dim()));
    }
    let point_count = gaussian_binomial(dim, 1, field.order() as u64);
    if point_count > cap {
        return Err(PolarError::TooLarge(point_count));
    }
    let points: Vec<Subspace> = enum_grassmannian(field, dim, 1, cap)?
        .into_iter()
        .filter(|p| form.is_singular_vector(field, p.row(0)))
        .collect();
    if points.is_empty() {
        return Err(PolarError::RankZero);
    }

    // level j holds every totally singular j-space; extend by perpendicular points
    let mut levels: Vec<Vec<Subspace>> = vec![points.clone()];
    loop {
        let current = levels.last().expect("nonempty");
        let mut next = BTreeSet::new();
        let mut stuck = None;
        for s in current {
            let mut extended = false;
            for p in &points {
                let v = p.row(0);
                if form.orthogonal_to_all(field, v, s) && !s.contains_vector(field, v) {
                    next.insert(s.sum(field, p).expect("same ambient"));
                    extended = true;
                }
            }
            if !extended && stuck.is_none() {
                stuck = Some(s.dim());
            }
        }
        if next.is_empty() {
            break;
        }
        if let Some(found) = stuck {
            return Err(PolarError::NonUniformMaximals { found, rank: found + 1 });
        }
        levels.push(next.into_iter().collect());
    }

    let rank = levels.len();
    let embed = |v: &[Subspace]| -> Vec<Subspace> {
        let mut out: Vec<Subspace> = v.iter().map(|s| s.embed_prefix(n)).collect();
        out.sort();
        out
    };
    let maximals = embed(&levels[rank - 1]);
    let lines = if rank >= 2 { embed(&levels[1]) } else { Vec::new() };
    let ps = PolarSpace {
        field: field.clone(),
        n,
        v_prime: Subspace::coordinate(n, &(0..dim).collect::<Vec<_>>()),
        points: embed(&points),
        lines,
        rank,
        maximals,
        form,
    };
    debug_assert!(2 * ps.rank <= dim);
    Ok(ps)
}

/// `Γ(Π)`: the maximals, adjacent when they meet in dimension `m - 1`.
pub fn dual_polar_graph(ps: &PolarSpace) -> SubspaceGraph {
    SubspaceGraph::new(&ps.field, ps.maximals.clone())
}

/// `[S⟩`: the maximals containing the totally singular subspace `s`.
pub fn point_star(ps: &PolarSpace, s: &Subspace) -> Result<Vec<Subspace>, PolarError> {
    if !ps.is_totally_singular(s)? {
        return Err(PolarError::NotSingular);
    }
    Ok(ps
        .maximals
        .iter()
        .filter(|m| m.contains(&ps.field, s).unwrap_or(false))
        .cloned()
        .collect())
}
