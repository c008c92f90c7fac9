//! Isometric embeddings of dual polar graphs into Grassmann graphs.
//!
//! An [`Embedding`] is an explicit table `M -> f(M)` from the maximal
//! singular subspaces of a polar space of rank `m` to `G_k(V)`. This module
//! builds the canonical family `M -> M + U`, verifies isometry, recovers the
//! structure every isometric embedding must have (the common subspace `U`
//! of all images, the reduction to `Γ_m(V/U)`, the induced map on points and
//! its behaviour on lines), enumerates all embeddings by backtracking, and
//! certifies that two embeddings differ by an automorphism of `Γ_k(V)`.
//!
//! Conditions that cannot occur for a correct implementation (see
//! [`EmbedError::is_theorem_violation`]) are reported as errors of their own
//! and never folded into ordinary failures.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::grassmann::{complete_basis, enum_grassmannian, GrassmannError, GrassmannGraph, GrassmannOptions};
use crate::graph::{FiniteGraph, SubspaceGraph, DISTANCE_CACHE_LIMIT, ORDERING_VERSION};
use crate::polar::{dual_polar_graph, PolarError, PolarSpace};
use crate::subspace::{from_rows_u32, MatrixGF, QuotientSpace, Subspace, SubspaceError, SubspaceRows};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("rank {m} exceeds k = {k}: Γ(Π) has diameter {m} but Γ_k(V) has diameter at most {k}")]
    RankTooSmall { m: usize, k: usize },
    #[error("no {dim}-dimensional subspace meets every sum of two maximals trivially")]
    NoValidU { dim: usize },
    #[error("malformed embedding table: {0}")]
    MalformedTable(String),
    #[error("maximals {first} and {second} have the same image")]
    NotInjective { first: usize, second: usize },
    #[error("maximals {m1} and {m2}: source distance {expected}, image distance {got}")]
    DistanceViolation { m1: usize, m2: usize, expected: usize, got: usize },
    #[error("common subspace of all images has dimension {dim} < k - m = {expected}")]
    LemmaViolation { dim: usize, expected: usize },
    #[error("image of maximal {source_index} does not contain U")]
    StarViolation { source_index: usize },
    #[error("images of the maximals through point {point} have trivial intersection")]
    EmptyIntersection { point: usize },
    #[error("points {first} and {second} have the same image under the point map")]
    PointMapNotInjective { first: usize, second: usize },
    #[error("point {point} has an image of dimension {dim}, not a point")]
    DegeneratePointMap { point: usize, dim: usize },
    #[error("points {p} and {q} are collinear but the image of maximal {maximal} misses q(P) + q(Q)")]
    ContainmentViolation { p: usize, q: usize, maximal: usize },
    #[error("line {line} maps onto only {images} points of a projective line")]
    PartialLine { line: usize, images: usize },
    #[error("line {line}: image of point {point} leaves the line spanned by the other images")]
    LineNotPreserved { line: usize, point: usize },
    #[error("no automorphism of the Grassmann graph connects the two embeddings")]
    NotEquivalent,
    #[error("the structural pipeline fails on both embeddings in every view")]
    Inconclusive,
    #[error("search budget of {budget} nodes exceeded")]
    SearchBudgetExceeded { budget: u64 },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Polar(#[from] PolarError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
}

impl EmbedError {
    /// Stable name of the variant, for reports and exit diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            EmbedError::RankTooSmall { .. } => "RankTooSmall",
            EmbedError::NoValidU { .. } => "NoValidU",
            EmbedError::MalformedTable(_) => "MalformedTable",
            EmbedError::NotInjective { .. } => "NotInjective",
            EmbedError::DistanceViolation { .. } => "DistanceViolation",
            EmbedError::LemmaViolation { .. } => "LemmaViolation",
            EmbedError::StarViolation { .. } => "StarViolation",
            EmbedError::EmptyIntersection { .. } => "EmptyIntersection",
            EmbedError::PointMapNotInjective { .. } => "PointMapNotInjective",
            EmbedError::DegeneratePointMap { .. } => "DegeneratePointMap",
            EmbedError::ContainmentViolation { .. } => "ContainmentViolation",
            EmbedError::PartialLine { .. } => "PartialLine",
            EmbedError::LineNotPreserved { .. } => "LineNotPreserved",
            EmbedError::NotEquivalent => "NotEquivalent",
            EmbedError::Inconclusive => "Inconclusive",
            EmbedError::SearchBudgetExceeded { .. } => "SearchBudgetExceeded",
            EmbedError::TooLarge(_) => "TooLarge",
            EmbedError::Polar(_) => "Polar",
            EmbedError::Grassmann(_) => "Grassmann",
            EmbedError::Subspace(_) => "Subspace",
        }
    }

    /// Outcomes that contradict the structure theory of isometric embeddings
    /// over finite fields. Seeing one means a bug or a counterexample.
    pub fn is_theorem_violation(&self) -> bool {
        matches!(
            self,
            EmbedError::LemmaViolation { .. }
                | EmbedError::EmptyIntersection { .. }
                | EmbedError::PartialLine { .. }
                | EmbedError::NotEquivalent
        )
    }
}

/// Something unexpected that is not by itself a contradiction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anomaly {
    /// The images share more than a `(k - m)`-dimensional subspace.
    OversizedStar { dim: usize, expected: usize },
    /// The images of the maximals through a point meet in more than a point.
    OversizedPointImage { point: usize, dim: usize },
}

/// An explicit table from the maximals of a polar space to `G_k(GF(q)^n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    n: usize,
    k: usize,
    m: usize,
    sources: Vec<Subspace>,
    images: Vec<Subspace>,
}

impl Embedding {
    /// `images[i]` is the image of `sources[i]`. Checks totality and shapes.
    pub fn new(sources: Vec<Subspace>, images: Vec<Subspace>, n: usize, k: usize) -> Result<Self, EmbedError> {
        if sources.len() != images.len() {
            return Err(EmbedError::MalformedTable(format!(
                "{} sources but {} images",
                sources.len(),
                images.len()
            )));
        }
        let m = sources.first().map_or(0, Subspace::dim);
        if let Some(i) = sources.iter().position(|s| s.dim() != m) {
            return Err(EmbedError::MalformedTable(format!("source {i} is not {m}-dimensional")));
        }
        if let Some(i) = images.iter().position(|s| s.dim() != k || s.ambient_dim() != n) {
            return Err(EmbedError::MalformedTable(format!(
                "image {i} is not a {k}-dimensional subspace of GF(q)^{n}"
            )));
        }
        Ok(Embedding { n, k, m, sources, images })
    }

    /// Table over the maximals of `ps`, in their canonical order.
    pub fn over(ps: &PolarSpace, images: Vec<Subspace>, n: usize, k: usize) -> Result<Self, EmbedError> {
        Self::new(ps.maximals().to_vec(), images, n, k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sources(&self) -> &[Subspace] {
        &self.sources
    }

    pub fn images(&self) -> &[Subspace] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &Subspace {
        &self.images[i]
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Applies a map to every image.
    pub fn map_images(&self, f: impl Fn(&Subspace) -> Subspace) -> Result<Embedding, EmbedError> {
        let images: Vec<Subspace> = self.images.iter().map(f).collect();
        let (n, k) = images.first().map_or((self.n, self.k), |s| (s.ambient_dim(), s.dim()));
        Embedding::new(self.sources.clone(), images, n, k)
    }

    pub fn to_json(&self) -> Vec<EmbeddingEntry> {
        self.sources
            .iter()
            .zip(&self.images)
            .enumerate()
            .map(|(i, (s, t))| EmbeddingEntry { source_index: i, source_basis: s.into(), image_basis: t.into() })
            .collect()
    }

    /// Reads the JSON table back against the maximals of `ps`.
    pub fn from_json(ps: &PolarSpace, entries: &[EmbeddingEntry], n: usize, k: usize) -> Result<Embedding, EmbedError> {
        let field = ps.field();
        let count = ps.maximals().len();
        let mut images: Vec<Option<Subspace>> = vec![None; count];
        for e in entries {
            if e.source_index >= count {
                return Err(EmbedError::MalformedTable(format!("source index {} out of range", e.source_index)));
            }
            let source = from_rows_u32(field, ps.n(), &e.source_basis.0)?;
            if source != ps.maximals()[e.source_index] {
                return Err(EmbedError::MalformedTable(format!(
                    "source basis of entry {} is not maximal {}",
                    e.source_index, e.source_index
                )));
            }
            images[e.source_index] = Some(from_rows_u32(field, n, &e.image_basis.0)?);
        }
        let images: Option<Vec<Subspace>> = images.into_iter().collect();
        let images = images.ok_or_else(|| EmbedError::MalformedTable("table is not total".into()))?;
        Embedding::over(ps, images, n, k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingEntry {
    pub source_index: usize,
    pub source_basis: SubspaceRows,
    pub image_basis: SubspaceRows,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsometryReport {
    pub vertices: usize,
    pub pairs_checked: usize,
    pub bfs_cross_checked: bool,
}

/// Checks injectivity and `m - dim(M1 ∩ M2) = k - dim(f(M1) ∩ f(M2))` on
/// every pair. The first violation in index order is reported.
pub fn verify_isometric(field: &Field, e: &Embedding) -> Result<IsometryReport, EmbedError> {
    let mut seen: HashMap<&Subspace, usize> = HashMap::new();
    for (i, img) in e.images.iter().enumerate() {
        if let Some(&first) = seen.get(img) {
            return Err(EmbedError::NotInjective { first, second: i });
        }
        seen.insert(img, i);
    }
    let count = e.len();
    let violations: Vec<Option<EmbedError>> = (0..count)
        .into_par_iter()
        .map(|i| {
            (i + 1..count).find_map(|j| {
                let expected = e.m - e.sources[i].meet_dim(field, &e.sources[j]);
                let got = e.k - e.images[i].meet_dim(field, &e.images[j]);
                (expected != got).then_some(EmbedError::DistanceViolation { m1: i, m2: j, expected, got })
            })
        })
        .collect();
    if let Some(err) = violations.into_iter().flatten().next() {
        return Err(err);
    }
    Ok(IsometryReport { vertices: count, pairs_checked: count * count.saturating_sub(1) / 2, bfs_cross_checked: false })
}

/// [`verify_isometric`] plus an independent comparison of the graph
/// distances (BFS on both graphs) for every pair.
pub fn verify_isometric_with_graphs(
    field: &Field,
    e: &Embedding,
    source: &SubspaceGraph,
    target: &GrassmannGraph,
) -> Result<IsometryReport, EmbedError> {
    let mut report = verify_isometric(field, e)?;
    let src_index: Vec<usize> = e
        .sources
        .iter()
        .map(|s| source.index_of(s).ok_or_else(|| EmbedError::MalformedTable("source not in graph".into())))
        .collect::<Result<_, _>>()?;
    let tgt_index: Vec<usize> = e
        .images
        .iter()
        .map(|s| target.index_of(s).ok_or_else(|| EmbedError::MalformedTable("image not in target".into())))
        .collect::<Result<_, _>>()?;
    for i in 0..e.len() {
        let ds = source.graph().distances_from(src_index[i]);
        let dt = target.graph().distances_from(tgt_index[i]);
        for j in i + 1..e.len() {
            let (a, b) = (ds[src_index[j]], dt[tgt_index[j]]);
            if a != b {
                return Err(EmbedError::DistanceViolation {
                    m1: i,
                    m2: j,
                    expected: a.unwrap_or(usize::MAX),
                    got: b.unwrap_or(usize::MAX),
                });
            }
        }
    }
    report.bfs_cross_checked = true;
    Ok(report)
}

/// `V'`: the span of all points of the polar space.
pub fn polar_span(ps: &PolarSpace) -> Subspace {
    let rows: Vec<&[Elem]> = ps.points().iter().map(|p| p.row(0)).collect();
    Subspace::span(ps.field(), ps.n(), &rows).expect("points live in V")
}

fn pair_sums(ps: &PolarSpace) -> Vec<Subspace> {
    let field = ps.field();
    let ms = ps.maximals();
    let sums: BTreeSet<Subspace> = (0..ms.len())
        .into_par_iter()
        .flat_map_iter(|i| (i..ms.len()).map(move |j| ms[i].sum(field, &ms[j]).expect("same ambient")))
        .collect();
    sums.into_iter().collect()
}

/// Searches `dim`-dimensional `U` with `U ∩ (M1 + M2) = 0` for every pair
/// of maximals. Candidates are the points of `V` in canonical order, chosen
/// in increasing index order; `first_only` stops at the first solution.
fn transversals(ps: &PolarSpace, dim: usize, first_only: bool) -> Vec<Subspace> {
    let field = ps.field();
    let n = ps.n();
    if dim == 0 {
        return vec![Subspace::zero(n)];
    }
    let sums = pair_sums(ps);
    let candidates: Vec<Subspace> = enum_grassmannian(field, n, 1, u128::MAX)
        .expect("no cap")
        .into_iter()
        .filter(|p| sums.iter().all(|s| !s.contains_vector(field, p.row(0))))
        .collect();

    fn rec(
        field: &Field,
        sums: &[Subspace],
        candidates: &[Subspace],
        start: usize,
        current: &Subspace,
        dim: usize,
        first_only: bool,
        out: &mut BTreeSet<Subspace>,
    ) -> bool {
        if current.dim() == dim {
            out.insert(current.clone());
            return first_only;
        }
        for i in start..candidates.len() {
            if candidates.len() - i < dim - current.dim() {
                break;
            }
            let next = current.sum(field, &candidates[i]).expect("same ambient");
            if next.dim() != current.dim() + 1 {
                continue;
            }
            if sums.iter().all(|s| next.sum_dim(field, s) == next.dim() + s.dim())
                && rec(field, sums, candidates, i + 1, &next, dim, first_only, out)
            {
                return true;
            }
        }
        false
    }

    let mut out = BTreeSet::new();
    rec(field, &sums, &candidates, 0, &Subspace::zero(n), dim, first_only, &mut out);
    out.into_iter().collect()
}

/// The first valid `U` of dimension `k - m` (see [`canonical_embedding`]).
pub fn find_transversal(ps: &PolarSpace, k: usize) -> Result<Subspace, EmbedError> {
    let m = ps.rank();
    if k < m {
        return Err(EmbedError::RankTooSmall { m, k });
    }
    if k > ps.n() {
        return Err(EmbedError::MalformedTable(format!("k = {k} exceeds n = {}", ps.n())));
    }
    transversals(ps, k - m, true).into_iter().next().ok_or(EmbedError::NoValidU { dim: k - m })
}

/// Every valid `U` of dimension `k - m`, in canonical order.
pub fn all_transversals(ps: &PolarSpace, k: usize) -> Result<Vec<Subspace>, EmbedError> {
    let m = ps.rank();
    if k < m {
        return Err(EmbedError::RankTooSmall { m, k });
    }
    Ok(transversals(ps, k - m, false))
}

/// `M -> M + U` for the first `U` of dimension `k - m` meeting every
/// `M1 + M2` trivially; such a map is isometric because then
/// `dim(f(M1) ∩ f(M2)) = (k - m) + dim(M1 ∩ M2)`.
pub fn canonical_embedding(ps: &PolarSpace, k: usize) -> Result<Embedding, EmbedError> {
    let u = find_transversal(ps, k)?;
    embedding_through(ps, &u)
}

/// `M -> M + U` for a given `U`; `U` is not checked.
pub fn embedding_through(ps: &PolarSpace, u: &Subspace) -> Result<Embedding, EmbedError> {
    let field = ps.field();
    let images = ps.maximals().iter().map(|m| m.sum(field, u)).collect::<Result<Vec<_>, _>>()?;
    Embedding::over(ps, images, ps.n(), ps.rank() + u.dim())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarSubspace {
    pub subspace: Subspace,
    pub anomaly: Option<Anomaly>,
}

/// `U := ∩_M f(M)`, which must have dimension at least `k - m`.
pub fn extract_star_subspace(field: &Field, e: &Embedding) -> Result<StarSubspace, EmbedError> {
    let mut u = Subspace::full(e.n);
    for img in &e.images {
        u = u.intersect(field, img)?;
    }
    let expected = e.k - e.m;
    if u.dim() < expected {
        return Err(EmbedError::LemmaViolation { dim: u.dim(), expected });
    }
    let anomaly = (u.dim() > expected).then_some(Anomaly::OversizedStar { dim: u.dim(), expected });
    Ok(StarSubspace { subspace: u, anomaly })
}

/// `g(M) := (f(M) + U) / U` as an embedding into `Γ_m(V/U)`.
pub fn reduce_to_quotient(field: &Field, e: &Embedding, u: &Subspace) -> Result<(QuotientSpace, Embedding), EmbedError> {
    if u.dim() != e.k - e.m {
        return Err(EmbedError::MalformedTable(format!(
            "star subspace has dimension {}, expected k - m = {}",
            u.dim(),
            e.k - e.m
        )));
    }
    if let Some(i) = e.images.iter().position(|img| !img.contains(field, u).unwrap_or(false)) {
        return Err(EmbedError::StarViolation { source_index: i });
    }
    let w = QuotientSpace::new(field, e.n, u)?;
    let images = e.images.iter().map(|img| w.project(field, img)).collect::<Result<Vec<_>, _>>()?;
    let g = Embedding::new(e.sources.clone(), images, w.dim(), e.m)?;
    Ok((w, g))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMap {
    /// `images[i]` is `q(P_i)` for the `i`-th point of the polar space.
    pub images: Vec<Subspace>,
    pub anomalies: Vec<Anomaly>,
}

/// For each point `P`, `q(P) := ∩_{M ∋ P} g(M)`; must be nonzero, and the
/// map must be injective.
pub fn induce_point_map(ps: &PolarSpace, g: &Embedding) -> Result<PointMap, EmbedError> {
    let field = ps.field();
    check_same_sources(ps, g)?;
    let stars = ps.point_stars();
    let results: Vec<Result<Subspace, EmbedError>> = stars
        .par_iter()
        .enumerate()
        .map(|(point, star)| {
            let mut acc = Subspace::full(g.n);
            for &i in star {
                acc = acc.intersect(field, &g.images[i])?;
            }
            if acc.dim() == 0 {
                Err(EmbedError::EmptyIntersection { point })
            } else {
                Ok(acc)
            }
        })
        .collect();
    let images = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let anomalies: Vec<Anomaly> = images
        .iter()
        .enumerate()
        .filter(|(_, s)| s.dim() > 1)
        .map(|(point, s)| Anomaly::OversizedPointImage { point, dim: s.dim() })
        .collect();
    let mut seen: HashMap<&Subspace, usize> = HashMap::new();
    for (i, img) in images.iter().enumerate() {
        if let Some(&first) = seen.get(img) {
            return Err(EmbedError::PointMapNotInjective { first, second: i });
        }
        seen.insert(img, i);
    }
    Ok(PointMap { images, anomalies })
}

fn check_same_sources(ps: &PolarSpace, g: &Embedding) -> Result<(), EmbedError> {
    if g.sources != ps.maximals() {
        return Err(EmbedError::MalformedTable("embedding is not over this polar space".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineReport {
    pub collinear_pairs_checked: usize,
    pub containments_checked: usize,
    pub lines_checked: usize,
    pub full_lines: usize,
}

/// For collinear `P, Q` and every maximal `M ⊇ P + Q`, checks
/// `g(M) ⊇ q(P) + q(Q)`; then checks that every line of the polar space is
/// mapped onto all `q + 1` points of a projective line.
pub fn check_line_images(ps: &PolarSpace, g: &Embedding, q_map: &PointMap) -> Result<LineReport, EmbedError> {
    let field = ps.field();
    check_same_sources(ps, g)?;
    if let Some((point, s)) = q_map.images.iter().enumerate().find(|(_, s)| s.dim() != 1) {
        return Err(EmbedError::DegeneratePointMap { point, dim: s.dim() });
    }
    let point_index: HashMap<&Subspace, usize> = ps.points().iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut report = LineReport { collinear_pairs_checked: 0, containments_checked: 0, lines_checked: 0, full_lines: 0 };
    for (line_idx, line) in ps.lines().iter().enumerate() {
        let on_line: Vec<usize> = line.points(field).iter().map(|p| point_index[p]).collect();
        let through: Vec<usize> = (0..ps.maximals().len())
            .filter(|&i| ps.maximals()[i].contains(field, line).unwrap_or(false))
            .collect();
        for (a, &p) in on_line.iter().enumerate() {
            for &q in &on_line[a + 1..] {
                report.collinear_pairs_checked += 1;
                let span = q_map.images[p].sum(field, &q_map.images[q])?;
                for &mi in &through {
                    report.containments_checked += 1;
                    if !g.images[mi].contains(field, &span)? {
                        return Err(EmbedError::ContainmentViolation { p, q, maximal: mi });
                    }
                }
            }
        }
        let image_line = q_map.images[on_line[0]].sum(field, &q_map.images[on_line[1]])?;
        if let Some(&point) = on_line.iter().find(|&&p| !image_line.contains(field, &q_map.images[p]).unwrap_or(false)) {
            return Err(EmbedError::LineNotPreserved { line: line_idx, point });
        }
        let distinct: BTreeSet<&Subspace> = on_line.iter().map(|&p| &q_map.images[p]).collect();
        if distinct.len() != field.order() + 1 {
            return Err(EmbedError::PartialLine { line: line_idx, images: distinct.len() });
        }
        report.lines_checked += 1;
        report.full_lines += 1;
    }
    Ok(report)
}

/// Everything recovered from one embedding by the structural pipeline.
#[derive(Debug, Clone)]
pub struct StructureReport {
    pub u: Subspace,
    pub w: QuotientSpace,
    pub g: Embedding,
    pub q_map: PointMap,
    pub lines: LineReport,
    pub w_prime: Subspace,
    pub v_prime: Subspace,
    pub anomalies: Vec<Anomaly>,
}

impl StructureReport {
    pub fn lines_ok(&self) -> bool {
        self.lines.full_lines == self.lines.lines_checked
    }

    pub fn to_json(&self, ps: &PolarSpace) -> StructureJson {
        StructureJson {
            ordering_version: ORDERING_VERSION,
            u: (&self.u).into(),
            u_dim: self.u.dim(),
            w_dim: self.w.dim(),
            coordinate_map: self
                .w
                .coordinate_map()
                .row_iter()
                .map(|r| r.iter().map(|&x| x as u32).collect())
                .collect(),
            g_table: self.g.to_json(),
            q_map: ps
                .points()
                .iter()
                .zip(&self.q_map.images)
                .enumerate()
                .map(|(i, (p, img))| PointImage { point_index: i, point_basis: p.into(), image_basis: img.into() })
                .collect(),
            lines_ok: self.lines_ok(),
            lines: self.lines.clone(),
            w_prime: (&self.w_prime).into(),
            v_prime: (&self.v_prime).into(),
            anomalies: self.anomalies.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointImage {
    pub point_index: usize,
    pub point_basis: SubspaceRows,
    pub image_basis: SubspaceRows,
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureJson {
    pub ordering_version: &'static str,
    pub u: SubspaceRows,
    pub u_dim: usize,
    pub w_dim: usize,
    pub coordinate_map: Vec<Vec<u32>>,
    pub g_table: Vec<EmbeddingEntry>,
    pub q_map: Vec<PointImage>,
    pub lines_ok: bool,
    pub lines: LineReport,
    pub w_prime: SubspaceRows,
    pub v_prime: SubspaceRows,
    pub anomalies: Vec<Anomaly>,
}

/// extract → reduce → induce → check lines, on a verified embedding.
pub fn analyze(ps: &PolarSpace, e: &Embedding) -> Result<StructureReport, EmbedError> {
    let field = ps.field();
    check_same_sources(ps, e)?;
    let star = extract_star_subspace(field, e)?;
    let mut anomalies: Vec<Anomaly> = star.anomaly.into_iter().collect();
    if !anomalies.is_empty() {
        // reduction needs a (k - m)-dim U; an oversized star is reported as is
        return Err(EmbedError::MalformedTable(format!("{anomalies:?}")));
    }
    let u = star.subspace;
    let (w, g) = reduce_to_quotient(field, e, &u)?;
    let q_map = induce_point_map(ps, &g)?;
    anomalies.extend(q_map.anomalies.iter().cloned());
    let lines = check_line_images(ps, &g, &q_map)?;
    let rows: Vec<&[Elem]> = q_map.images.iter().map(|s| s.row(0)).collect();
    let w_prime = Subspace::span(field, w.dim(), &rows)?;
    Ok(StructureReport { u, w, g, q_map, lines, w_prime, v_prime: polar_span(ps), anomalies })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Fix the image of the first maximal (to the canonical embedding's image
    /// when one exists, else to target vertex 0). Sound for classification
    /// because invertible linear maps act transitively on `G_k(V)`.
    pub anchor: bool,
    /// Bound on backtracking nodes; `None` is unbounded.
    pub budget: Option<u64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { anchor: true, budget: None }
    }
}

/// All isometric embeddings found by a search, as target vertex indices.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub target: GrassmannGraph,
    /// `tables[e][i]` is the target index of the image of maximal `i`;
    /// sorted lexicographically.
    pub tables: Vec<Vec<usize>>,
    pub anchor: Option<usize>,
    pub nodes: u64,
    sources: Vec<Subspace>,
}

impl SearchOutcome {
    pub fn embedding(&self, i: usize) -> Embedding {
        let images = self.tables[i].iter().map(|&t| self.target.vertices()[t].clone()).collect();
        Embedding::new(self.sources.clone(), images, self.target.n(), self.target.k()).expect("well-formed")
    }

    pub fn embeddings(&self) -> Vec<Embedding> {
        (0..self.tables.len()).map(|i| self.embedding(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

struct SearchContext<'a> {
    target: &'a FiniteGraph,
    /// `buckets[v][d]`: target vertices at distance `d` from `v`.
    buckets: Vec<Vec<Vec<usize>>>,
    source_dist: Vec<u8>,
    sources: usize,
    order: Vec<usize>,
    budget: u64,
}

impl SearchContext<'_> {
    fn sdist(&self, a: usize, b: usize) -> u8 {
        self.source_dist[a * self.sources + b]
    }

    /// Depth-first extension; returns false once the node count passes the budget.
    fn dfs(&self, pos: usize, assign: &mut [usize], used: &mut [bool], out: &mut Vec<Vec<usize>>, nodes: &mut u64) -> bool {
        *nodes += 1;
        if *nodes > self.budget {
            return false;
        }
        if pos == self.order.len() {
            out.push(assign.to_vec());
            return true;
        }
        let s = self.order[pos];
        let root = self.order[0];
        let pool = &self.buckets[assign[root]][self.sdist(root, s) as usize];
        for &v in pool {
            if used[v] {
                continue;
            }
            let consistent = self.order[1..pos]
                .iter()
                .all(|&t| self.target.cached_distance(assign[t], v) == self.sdist(t, s));
            if !consistent {
                continue;
            }
            used[v] = true;
            assign[s] = v;
            let ok = self.dfs(pos + 1, assign, used, out, nodes);
            used[v] = false;
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Exhaustive backtracking over vertex assignments into `Γ_k(V)`, pruning
/// any partial assignment that breaks a pairwise distance.
pub fn search_embeddings(ps: &PolarSpace, k: usize, opts: SearchOptions) -> Result<SearchOutcome, EmbedError> {
    let field = ps.field();
    let m = ps.rank();
    if k < m {
        return Err(EmbedError::RankTooSmall { m, k });
    }
    let n = ps.n();
    let count = crate::grassmann::gaussian_binomial(n, k, field.order() as u64);
    if count > DISTANCE_CACHE_LIMIT as u128 {
        return Err(EmbedError::TooLarge(format!(
            "Γ_{k}(GF({})^{n}) has {count} vertices, above the distance-cache limit {DISTANCE_CACHE_LIMIT}",
            field.order()
        )));
    }
    let target = GrassmannGraph::with_options(field, n, k, GrassmannOptions { allow_degenerate: true, ..Default::default() })?;
    let tg = target.graph();
    let nt = target.order();
    let max_d = k + 1;
    let buckets: Vec<Vec<Vec<usize>>> = (0..nt)
        .into_par_iter()
        .map(|v| {
            let mut b = vec![Vec::new(); max_d + 1];
            for w in 0..nt {
                b[tg.cached_distance(v, w) as usize].push(w);
            }
            b
        })
        .collect();

    let sources = ps.maximals();
    let ns = sources.len();
    let mut source_dist = vec![0u8; ns * ns];
    for i in 0..ns {
        for j in 0..ns {
            source_dist[i * ns + j] = (m - sources[i].meet_dim(field, &sources[j])) as u8;
        }
    }
    if source_dist.iter().any(|&d| d as usize > k) {
        // diameter m > k was excluded above, so this cannot happen
        return Ok(SearchOutcome { target, tables: Vec::new(), anchor: None, nodes: 0, sources: sources.to_vec() });
    }
    // BFS order from maximal 0 in the dual polar graph
    let mut order = vec![0usize];
    let mut seen = vec![false; ns];
    if ns > 0 {
        seen[0] = true;
    }
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for v in 0..ns {
            if !seen[v] && source_dist[u * ns + v] == 1 {
                seen[v] = true;
                order.push(v);
            }
        }
    }
    for v in 0..ns {
        if !seen[v] {
            order.push(v);
        }
    }

    let budget = opts.budget.unwrap_or(u64::MAX);
    let ctx = SearchContext { target: tg, buckets, source_dist, sources: ns, order, budget };

    let anchor = if opts.anchor && ns > 0 {
        let img = find_transversal(ps, k)
            .ok()
            .and_then(|u| sources[0].sum(field, &u).ok())
            .and_then(|s| target.index_of(&s));
        Some(img.unwrap_or(0))
    } else {
        None
    };

    // first-level branches run in parallel; each has its own node counter
    let branches: Vec<(usize, Vec<usize>)> = match anchor {
        _ if ns == 0 => Vec::new(),
        Some(a) if ns == 1 => vec![(a, Vec::new())],
        Some(a) => {
            let s1 = ctx.order[1];
            ctx.buckets[a][ctx.sdist(ctx.order[0], s1) as usize].iter().map(|&v| (a, vec![v])).collect()
        }
        None => (0..nt).map(|v| (v, Vec::new())).collect(),
    };
    let results: Vec<(Vec<Vec<usize>>, u64, bool)> = branches
        .par_iter()
        .map(|(root, second)| {
            let mut assign = vec![usize::MAX; ns];
            let mut used = vec![false; nt];
            assign[ctx.order[0]] = *root;
            used[*root] = true;
            let mut pos = 1;
            if let Some(&v) = second.first() {
                if used[v] {
                    return (Vec::new(), 1, true);
                }
                assign[ctx.order[1]] = v;
                used[v] = true;
                pos = 2;
            }
            let mut out = Vec::new();
            let mut nodes = 0;
            let ok = ctx.dfs(pos, &mut assign, &mut used, &mut out, &mut nodes);
            (out, nodes, ok)
        })
        .collect();

    let mut nodes = 0u64;
    let mut tables = Vec::new();
    let mut exceeded = false;
    for (out, count, ok) in results {
        nodes = nodes.saturating_add(count);
        exceeded |= !ok;
        tables.extend(out);
    }
    if exceeded || nodes > budget {
        return Err(EmbedError::SearchBudgetExceeded { budget });
    }
    tables.sort_unstable();
    Ok(SearchOutcome { target, tables, anchor, nodes, sources: sources.to_vec() })
}

/// A Grassmann-graph automorphism `S -> frob^field_auto(d(S)) · matrix`,
/// where `d` is the annihilator when `duality` is set and the identity
/// otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub matrix: MatrixGF,
    pub field_auto: usize,
    pub duality: bool,
}

impl EquivalenceWitness {
    pub fn identity(n: usize) -> Self {
        EquivalenceWitness { matrix: MatrixGF::identity(n), field_auto: 0, duality: false }
    }

    pub fn apply(&self, field: &Field, s: &Subspace) -> Subspace {
        let base = if self.duality { s.annihilator(field) } else { s.clone() };
        base.transform(field, &self.matrix, self.field_auto)
    }

    pub fn apply_inverse(&self, field: &Field, s: &Subspace) -> Subspace {
        let inv = self.matrix.inverse(field).expect("witness matrices are invertible");
        let e = field.degree();
        let back = s.transform(field, &inv, 0).transform(field, &MatrixGF::identity(s.ambient_dim()), (e - self.field_auto % e) % e);
        if self.duality {
            back.annihilator(field)
        } else {
            back
        }
    }

    /// True iff applying the witness to every image of `f1` yields `f2`.
    pub fn connects(&self, field: &Field, f1: &Embedding, f2: &Embedding) -> bool {
        f1.len() == f2.len() && f1.images.iter().zip(&f2.images).all(|(a, b)| &self.apply(field, a) == b)
    }

    pub fn kind(&self) -> &'static str {
        if self.duality {
            "semilinear∘duality"
        } else {
            "semilinear"
        }
    }
}

#[derive(Clone)]
struct Frame {
    u: Subspace,
    w: QuotientSpace,
    /// spanning vectors of `q(P_i)` for the chosen frame points
    basis_points: Vec<usize>,
    q_vectors: Vec<Vec<Elem>>,
    /// true when every image lies in `U + lift(span q)`
    closed: bool,
}

fn frame(field: &Field, f: &Embedding, report: StructureReport) -> Result<Frame, EmbedError> {
    let q_vectors: Vec<Vec<Elem>> = report.q_map.images.iter().map(|s| s.row(0).to_vec()).collect();
    let mut chosen = Vec::new();
    let mut span = Subspace::zero(report.w.dim());
    for (i, v) in q_vectors.iter().enumerate() {
        if !span.contains_vector(field, v) {
            span = span.sum(field, &Subspace::span(field, report.w.dim(), &[v])?)?;
            chosen.push(i);
        }
    }
    let x = report.w.preimage(field, &span)?;
    let closed = f.images.iter().all(|img| x.contains(field, img).unwrap_or(false));
    Ok(Frame { u: report.u, w: report.w, basis_points: chosen, q_vectors, closed })
}

/// Searches a witness connecting `f1` to `f2` among semilinear maps that
/// send `U1 -> U2` and `q1(P) -> q2(P)`: the map is fixed on a frame of
/// point images up to one scalar per frame point and a field automorphism,
/// and completed arbitrarily (or, if the images are not spanned by the frame,
/// by backtracking) on a complement.
fn connect_semilinear(
    field: &Field,
    (f1, a): (&Embedding, &Frame),
    (f2, b): (&Embedding, &Frame),
    budget: u64,
    used: &mut u64,
) -> Result<Option<EquivalenceWitness>, EmbedError> {
    let n = f1.n;
    if a.u.dim() != b.u.dim() || a.basis_points.len() != b.basis_points.len() {
        return Ok(None);
    }
    let r = a.basis_points.len();
    let target_frame: Vec<&Vec<Elem>> = a.basis_points.iter().map(|&i| &b.q_vectors[i]).collect();
    let target_span = Subspace::span(field, b.w.dim(), &target_frame)?;
    if target_span.dim() != r {
        return Ok(None);
    }

    // source basis: U1 rows, lifted frame vectors, then a standard completion
    let mut src_rows: Vec<Vec<Elem>> = a.u.rows();
    src_rows.extend(a.basis_points.iter().map(|&i| a.w.lift_vector(&a.q_vectors[i])));
    let src_known = src_rows.len();
    let src_rows = complete_rows(field, n, src_rows);

    let nonzero: Vec<Elem> = field.nonzero().collect();
    let e = field.degree();
    for sigma in 0..e {
        let twisted = MatrixGF::from_rows(n, &src_rows)?.frobenius(field, sigma);
        let twisted_inv = twisted.inverse(field)?;
        // scalars for frame points 2..r; the first is fixed to 1
        let combos = nonzero.len().pow(r.saturating_sub(1) as u32);
        for combo in 0..combos {
            let mut scalars = vec![1 as Elem];
            let mut c = combo;
            for _ in 1..r {
                scalars.push(nonzero[c % nonzero.len()]);
                c /= nonzero.len();
            }
            let mut dst_rows: Vec<Vec<Elem>> = b.u.rows();
            for (&i, &lambda) in a.basis_points.iter().zip(&scalars) {
                let scaled: Vec<Elem> = b.q_vectors[i].iter().map(|&x| field.mul(lambda, x)).collect();
                dst_rows.push(b.w.lift_vector(&scaled));
            }
            let found = if a.closed {
                *used += 1;
                if *used > budget {
                    return Err(EmbedError::SearchBudgetExceeded { budget });
                }
                let dst = complete_rows(field, n, dst_rows);
                let matrix = twisted_inv.mul(field, &MatrixGF::from_rows(n, &dst)?)?;
                let w = EquivalenceWitness { matrix, field_auto: sigma, duality: false };
                w.connects(field, f1, f2).then_some(w)
            } else {
                complete_by_backtracking(field, f1, f2, &twisted_inv, sigma, src_known, dst_rows, budget, used)?
            };
            if found.is_some() {
                return Ok(found);
            }
        }
    }
    Ok(None)
}

/// Extends independent rows to a basis of `GF(q)^n` with standard vectors.
fn complete_rows(field: &Field, n: usize, mut rows: Vec<Vec<Elem>>) -> Vec<Vec<Elem>> {
    let span = Subspace::span(field, n, &rows).expect("length n");
    let completion = complete_basis(field, &span);
    for extra in completion.to_rows().into_iter().skip(span.dim()) {
        rows.push(extra);
    }
    rows
}

#[allow(clippy::too_many_arguments)]
fn complete_by_backtracking(
    field: &Field,
    f1: &Embedding,
    f2: &Embedding,
    twisted_inv: &MatrixGF,
    sigma: usize,
    known: usize,
    dst_rows: Vec<Vec<Elem>>,
    budget: u64,
    used: &mut u64,
) -> Result<Option<EquivalenceWitness>, EmbedError> {
    let n = f1.n;
    let all_vectors = Subspace::full(n).vectors(field);
    fn rec(
        field: &Field,
        f1: &Embedding,
        f2: &Embedding,
        twisted_inv: &MatrixGF,
        sigma: usize,
        rows: &mut Vec<Vec<Elem>>,
        all: &[Vec<Elem>],
        budget: u64,
        used: &mut u64,
    ) -> Result<Option<EquivalenceWitness>, EmbedError> {
        let n = f1.n;
        if rows.len() == n {
            *used += 1;
            if *used > budget {
                return Err(EmbedError::SearchBudgetExceeded { budget });
            }
            let matrix = twisted_inv.mul(field, &MatrixGF::from_rows(n, rows)?)?;
            let w = EquivalenceWitness { matrix, field_auto: sigma, duality: false };
            return Ok(w.connects(field, f1, f2).then_some(w));
        }
        let span = Subspace::span(field, n, rows)?;
        for v in all {
            if span.contains_vector(field, v) {
                continue;
            }
            rows.push(v.clone());
            let found = rec(field, f1, f2, twisted_inv, sigma, rows, all, budget, used)?;
            rows.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
    debug_assert_eq!(dst_rows.len(), known);
    let mut rows = dst_rows;
    rec(field, f1, f2, twisted_inv, sigma, &mut rows, &all_vectors, budget, used)
}

/// An embedding together with the structural data used to compare it.
///
/// The annihilator view `M -> ann(f(M))` lies in `Γ_{n-k}(V)` and is kept
/// whenever `n - k >= m`; semilinear maps carry one view to the other, so an
/// equivalence can be decided on whichever view the structural pipeline
/// accepts.
pub struct PreparedEmbedding {
    embedding: Embedding,
    direct: Option<Frame>,
    direct_error: Option<EmbedError>,
    anomalies: usize,
    annihilated: Option<(Embedding, Option<Frame>)>,
}

impl PreparedEmbedding {
    pub fn new(ps: &PolarSpace, f: &Embedding) -> Result<Self, EmbedError> {
        let field = ps.field();
        check_same_sources(ps, f)?;
        let view = |e: &Embedding| match analyze(ps, e) {
            Ok(report) => {
                let anomalies = report.anomalies.len();
                frame(field, e, report).map(|fr| (Some(fr), None, anomalies))
            }
            Err(err) => Ok((None, Some(err), 0)),
        };
        let (direct, direct_error, anomalies) = view(f)?;
        let annihilated = if f.n - f.k >= f.m {
            let dual = f.map_images(|s| s.annihilator(field))?;
            let (fr, _, _) = view(&dual)?;
            Some((dual, fr))
        } else {
            None
        };
        Ok(PreparedEmbedding { embedding: f.clone(), direct, direct_error, anomalies, annihilated })
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    /// Whether the structural pipeline succeeds on the embedding itself.
    pub fn pipeline_ok(&self) -> bool {
        self.direct.is_some()
    }

    pub fn pipeline_error(&self) -> Option<&EmbedError> {
        self.direct_error.as_ref()
    }

    /// The same data for `M -> ann(f(M))`, available when `n = 2k`.
    fn dualized(&self) -> Option<PreparedEmbedding> {
        let (dual, fr) = self.annihilated.as_ref()?;
        if dual.k != self.embedding.k {
            return None;
        }
        Some(PreparedEmbedding {
            embedding: dual.clone(),
            direct: fr.clone(),
            direct_error: None,
            anomalies: 0,
            annihilated: Some((self.embedding.clone(), self.direct.clone())),
        })
    }
}

enum Decision {
    Found(EquivalenceWitness),
    Refuted,
    Undecided,
}

fn decide_semilinear(field: &Field, p1: &PreparedEmbedding, p2: &PreparedEmbedding, budget: u64, used: &mut u64) -> Result<Decision, EmbedError> {
    match (&p1.direct, &p2.direct) {
        (Some(a), Some(b)) => {
            return Ok(match connect_semilinear(field, (&p1.embedding, a), (&p2.embedding, b), budget, used)? {
                Some(w) => Decision::Found(w),
                None => Decision::Refuted,
            })
        }
        (Some(_), None) | (None, Some(_)) => return Ok(Decision::Refuted),
        (None, None) => {}
    }
    if let (Some((d1, fr1)), Some((d2, fr2))) = (&p1.annihilated, &p2.annihilated) {
        match (fr1, fr2) {
            (Some(a), Some(b)) => {
                // ann(σ(T)·A) = σ(ann T)·(Aᵀ)⁻¹
                return Ok(match connect_semilinear(field, (d1, a), (d2, b), budget, used)? {
                    Some(w) => {
                        let matrix = w.matrix.transpose().inverse(field)?;
                        let w = EquivalenceWitness { matrix, field_auto: w.field_auto, duality: false };
                        debug_assert!(w.connects(field, &p1.embedding, &p2.embedding));
                        Decision::Found(w)
                    }
                    None => Decision::Refuted,
                });
            }
            (Some(_), None) | (None, Some(_)) => return Ok(Decision::Refuted),
            (None, None) => {}
        }
    }
    Ok(Decision::Undecided)
}

/// Finds an automorphism of `Γ_k(V)` carrying `f1` to `f2`.
///
/// Semilinear maps are tried first; when `n = 2k` maps composed with the
/// duality `S -> ann(S)` are tried as well. Within each family the search is
/// exhaustive, so `NotEquivalent` is a definite answer. `Inconclusive` is
/// returned when the structural pipeline fails on every view of both
/// embeddings.
pub fn connecting_automorphism(
    ps: &PolarSpace,
    f1: &Embedding,
    f2: &Embedding,
    budget: Option<u64>,
) -> Result<EquivalenceWitness, EmbedError> {
    let p1 = PreparedEmbedding::new(ps, f1)?;
    let p2 = PreparedEmbedding::new(ps, f2)?;
    connect_prepared(ps.field(), &p1, &p2, budget)
}

/// [`connecting_automorphism`] on embeddings prepared in advance.
pub fn connect_prepared(
    field: &Field,
    p1: &PreparedEmbedding,
    p2: &PreparedEmbedding,
    budget: Option<u64>,
) -> Result<EquivalenceWitness, EmbedError> {
    let (f1, f2) = (&p1.embedding, &p2.embedding);
    if f1.n != f2.n || f1.k != f2.k || f1.sources != f2.sources {
        return Err(EmbedError::MalformedTable("embeddings have different source or target".into()));
    }
    let budget = budget.unwrap_or(u64::MAX);
    let mut used = 0u64;
    let mut undecided = false;
    match decide_semilinear(field, p1, p2, budget, &mut used)? {
        Decision::Found(w) => return Ok(w),
        Decision::Refuted => {}
        Decision::Undecided => undecided = true,
    }
    if f1.n == 2 * f1.k {
        if let Some(d1) = p1.dualized() {
            match decide_semilinear(field, &d1, p2, budget, &mut used)? {
                Decision::Found(w) => return Ok(EquivalenceWitness { duality: true, ..w }),
                Decision::Refuted => {}
                Decision::Undecided => undecided = true,
            }
        }
    }
    if undecided {
        Err(EmbedError::Inconclusive)
    } else {
        Err(EmbedError::NotEquivalent)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub ordering_version: &'static str,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub anchored: bool,
    pub anchor: Option<usize>,
    pub embeddings: usize,
    pub search_nodes: u64,
    /// Embeddings on which the structural pipeline runs to completion.
    pub pipeline_passed: usize,
    /// Pipeline failures grouped by error kind.
    pub pipeline_failures: BTreeMap<&'static str, usize>,
    pub first_pipeline_failure: Option<String>,
    pub anomalies: usize,
    pub classes: usize,
    /// False when some pair could not be decided; `classes` is then an upper bound.
    pub classes_exact: bool,
    pub representatives: Vec<usize>,
    pub class_sizes: Vec<usize>,
    /// For each embedding, the index of its class representative.
    pub class_of: Vec<usize>,
    pub witness_kinds: BTreeSet<&'static str>,
    pub inconclusive_pairs: usize,
    pub pairs_verified_directly: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    pub search: SearchOptions,
    /// Budget per witness search.
    pub witness_budget: Option<u64>,
    /// Number of embeddings (taken at an even stride) among which every pair
    /// in a common class is additionally checked by composing witnesses.
    pub pair_sample: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { search: SearchOptions::default(), witness_budget: None, pair_sample: 48 }
    }
}

/// Searches every embedding, runs the structural pipeline on each, and
/// groups them into equivalence classes.
///
/// Classes are formed in rounds: the first unassigned embedding becomes a
/// representative and every unassigned embedding is compared with it.
/// Witnesses compose, so joining each embedding to its representative
/// certifies every pair inside a class; a sample of such pairs is also
/// checked through the composed witness `w_j ∘ w_i⁻¹`.
pub fn classify_embeddings(ps: &PolarSpace, k: usize, opts: ClassifyOptions) -> Result<(SearchOutcome, ClassificationReport), EmbedError> {
    let field = ps.field();
    let outcome = search_embeddings(ps, k, opts.search)?;
    let embeddings = outcome.embeddings();

    let prepared: Vec<PreparedEmbedding> = embeddings
        .par_iter()
        .map(|e| {
            verify_isometric(field, e)?;
            PreparedEmbedding::new(ps, e)
        })
        .collect::<Result<_, _>>()?;
    let mut pipeline_failures: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut first_pipeline_failure = None;
    for (i, p) in prepared.iter().enumerate() {
        if let Some(err) = &p.direct_error {
            *pipeline_failures.entry(err.code()).or_default() += 1;
            first_pipeline_failure.get_or_insert_with(|| format!("embedding {i}: {err}"));
        }
    }
    let pipeline_passed = prepared.iter().filter(|p| p.pipeline_ok()).count();
    let anomalies = prepared.iter().map(|p| p.anomalies).sum();

    let count = embeddings.len();
    let mut class_of: Vec<Option<usize>> = vec![None; count];
    let mut witnesses: Vec<Option<EquivalenceWitness>> = vec![None; count];
    let mut representatives = Vec::new();
    let mut kinds = BTreeSet::new();
    let mut inconclusive_pairs = 0;
    while let Some(rep) = class_of.iter().position(Option::is_none) {
        representatives.push(rep);
        class_of[rep] = Some(rep);
        witnesses[rep] = Some(EquivalenceWitness::identity(outcome.target.n()));
        let open: Vec<usize> = (rep + 1..count).filter(|&i| class_of[i].is_none()).collect();
        let results: Vec<Result<Option<EquivalenceWitness>, EmbedError>> = open
            .par_iter()
            .map(|&i| match connect_prepared(field, &prepared[rep], &prepared[i], opts.witness_budget) {
                Ok(w) => Ok(Some(w)),
                Err(EmbedError::NotEquivalent) => Ok(None),
                Err(EmbedError::Inconclusive) => Err(EmbedError::Inconclusive),
                Err(err) => Err(err),
            })
            .collect();
        for (&i, r) in open.iter().zip(results) {
            match r {
                Ok(Some(w)) => {
                    kinds.insert(w.kind());
                    class_of[i] = Some(rep);
                    witnesses[i] = Some(w);
                }
                Ok(None) => {}
                Err(EmbedError::Inconclusive) => inconclusive_pairs += 1,
                Err(err) => return Err(err),
            }
        }
    }
    let class_of: Vec<usize> = class_of.into_iter().map(|c| c.expect("assigned")).collect();
    let witnesses: Vec<EquivalenceWitness> = witnesses.into_iter().map(|w| w.expect("assigned")).collect();
    let class_sizes = representatives.iter().map(|&r| class_of.iter().filter(|&&c| c == r).count()).collect();

    let sample: Vec<usize> = if count == 0 {
        Vec::new()
    } else {
        let stride = (count / opts.pair_sample.max(1)).max(1);
        (0..count).step_by(stride).take(opts.pair_sample).collect()
    };
    let pairs: Vec<(usize, usize)> = sample
        .iter()
        .enumerate()
        .flat_map(|(a, &i)| sample[a + 1..].iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| class_of[i] == class_of[j])
        .collect();
    let bad = pairs.par_iter().find_first(|&&(i, j)| {
        !embeddings[i].images.iter().zip(&embeddings[j].images).all(|(a, b)| {
            let back = witnesses[i].apply_inverse(field, a);
            &witnesses[j].apply(field, &back) == b
        })
    });
    if bad.is_some() {
        return Err(EmbedError::NotEquivalent);
    }

    let report = ClassificationReport {
        ordering_version: ORDERING_VERSION,
        n: outcome.target.n(),
        k,
        m: ps.rank(),
        anchored: outcome.anchor.is_some(),
        anchor: outcome.anchor,
        embeddings: count,
        search_nodes: outcome.nodes,
        pipeline_passed,
        pipeline_failures,
        first_pipeline_failure,
        anomalies,
        classes: representatives.len(),
        classes_exact: inconclusive_pairs == 0,
        representatives,
        class_sizes,
        class_of,
        witness_kinds: kinds,
        inconclusive_pairs,
        pairs_verified_directly: pairs.len(),
    };
    Ok((outcome, report))
}

/// Dual polar graph of `ps` paired with the target Grassmann graph, for BFS
/// cross-checks.
pub fn graphs_for(ps: &PolarSpace, k: usize) -> Result<(SubspaceGraph, GrassmannGraph), EmbedError> {
    let target = GrassmannGraph::with_options(
        ps.field(),
        ps.n(),
        k,
        GrassmannOptions { allow_degenerate: true, ..Default::default() },
    )?;
    Ok((dual_polar_graph(ps), target))
}
