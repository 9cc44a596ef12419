//! The cone graphs Γ_X and Δ_X on the even external points joined to
//! X = <1> by an external line.
//!
//! For vertices A = <α>, B = <β> with tr(α^2) = a^2, tr(β^2) = b^2:
//!
//! * Δ_X joins A and B when X, A, B are collinear, or when
//!   cone(X) ∩ cone(A) ∩ cone(B) has no external point;
//! * Γ_X keeps only the second kind of edge.
//!
//! The empty-intersection test is either the four-sign form (every
//! -tr(f(x,y)^2) with x = 2α ± a, y = 2β ± b a nonzero square) or the single
//! expression 2(tr α + 2a)(tr β + 2b)(tr αβ - ab) being a nonzero square once
//! AB is known to be external.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::bitset::AdjacencyMatrix;
use crate::field::{Elem, FieldCtx};
use crate::projective::{
    self, all_points, collinear, collinear_with_one, cone_contains, f_pair, quad, x_cone_value,
    x_point, GeomError, PointKind, ProjPoint,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("1, α, β are linearly dependent")]
    DependentWithOne,
    #[error("line AB is not external")]
    LineNotExternal,
    #[error("point {0} is not a vertex (even, joined to X by an external line)")]
    NotAVertex(u32),
    #[error("point does not lie on a tangent line through X")]
    NotOnTangentLine,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Gamma,
    Delta,
}

impl GraphKind {
    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Gamma => "gamma",
            GraphKind::Delta => "delta",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" => Ok(GraphKind::Gamma),
            "delta" => Ok(GraphKind::Delta),
            other => Err(format!("unknown graph kind `{other}`")),
        }
    }
}

/// Which evaluation of the cone condition builds the edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeRule {
    /// All four sign choices, evaluated with full field arithmetic.
    FourSign,
    /// External-line test plus the one-expression form.
    Fast,
}

/// A cone graph with its vertex labels.
#[derive(Clone, Debug)]
pub struct Graph {
    q: u64,
    kind: GraphKind,
    labels: Vec<ProjPoint>,
    /// point index -> vertex index, `u32::MAX` for non-vertices
    index_of: Vec<u32>,
    modulus: Vec<u64>,
    adj: AdjacencyMatrix,
}

impl Graph {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[ProjPoint] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> ProjPoint {
        self.labels[v]
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn adjacency(&self) -> &AdjacencyMatrix {
        &self.adj
    }

    pub fn vertex_of(&self, p: ProjPoint) -> Option<usize> {
        self.index_of
            .get(p.index() as usize)
            .and_then(|&i| (i != u32::MAX).then_some(i as usize))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.has_edge(u, v)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.edge_count()
    }

    /// Distinct vertex degrees, ascending.
    pub fn degree_set(&self) -> Vec<usize> {
        let mut d = self.adj.degrees();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// The theoretical clique bound (q + 1)/2.
    pub fn clique_bound(&self) -> usize {
        (self.q as usize + 1) / 2
    }
}

/// Even points Y ≠ X with tr(y)^2 - 4tr(y^2) a nonsquare, by ascending index.
pub fn vertex_set(ctx: &FieldCtx) -> Vec<ProjPoint> {
    all_points(ctx)
        .skip(1)
        .filter(|&p| is_vertex(ctx, p))
        .collect()
}

pub fn is_vertex(ctx: &FieldCtx, p: ProjPoint) -> bool {
    p != x_point()
        && p.kind(ctx) == PointKind::EvenExternal
        && ctx.is_nonsquare(x_cone_value(ctx, p.rep()))
}

fn vertex_root(ctx: &FieldCtx, x: Elem) -> Result<Elem, GraphError> {
    let p = projective::canonical_point(ctx, x)?;
    if !is_vertex(ctx, p) {
        return Err(GraphError::NotAVertex(p.index()));
    }
    Ok(ctx.sqrt_base(quad(ctx, x)).expect("even point"))
}

/// Ground-truth cone condition: true iff cone(X) ∩ cone(A) ∩ cone(B) has no
/// external point, for noncollinear X, A = <α>, B = <β>.
pub fn cone_condition(ctx: &FieldCtx, alpha: Elem, beta: Elem) -> Result<bool, GraphError> {
    if collinear_with_one(ctx, alpha, beta)? {
        return Err(GraphError::DependentWithOne);
    }
    let a = vertex_root(ctx, alpha)?;
    let b = vertex_root(ctx, beta)?;
    Ok(four_sign(ctx, alpha, beta, a, b))
}

fn four_sign(ctx: &FieldCtx, alpha: Elem, beta: Elem, a: Elem, b: Elem) -> bool {
    let two = ctx.from_int(2);
    let (two_a, two_b) = (ctx.mul(two, alpha), ctx.mul(two, beta));
    let xs = [ctx.add(two_a, a), ctx.sub(two_a, a)];
    let ys = [ctx.add(two_b, b), ctx.sub(two_b, b)];
    xs.iter().all(|&x| {
        ys.iter().all(|&y| {
            let v = ctx.neg(quad(ctx, f_pair(ctx, x, y)));
            ctx.is_nonzero_square(v)
        })
    })
}

/// Single-expression cone condition, valid when AB is an external line.
pub fn fast_cone_condition(ctx: &FieldCtx, alpha: Elem, beta: Elem) -> Result<bool, GraphError> {
    if collinear_with_one(ctx, alpha, beta)? {
        return Err(GraphError::DependentWithOne);
    }
    let a = vertex_root(ctx, alpha)?;
    let b = vertex_root(ctx, beta)?;
    fast_with_roots(ctx, alpha, beta, a, b)
}

/// [`fast_cone_condition`] with explicit square roots of tr(α^2), tr(β^2).
pub fn fast_with_roots(
    ctx: &FieldCtx,
    alpha: Elem,
    beta: Elem,
    a: Elem,
    b: Elem,
) -> Result<bool, GraphError> {
    let t = projective::form(ctx, alpha, beta);
    let ab = ctx.mul(a, b);
    let tm = ctx.sub(t, ab);
    if !ctx.is_nonsquare(ctx.mul(tm, ctx.add(t, ab))) {
        return Err(GraphError::LineNotExternal);
    }
    let two = ctx.from_int(2);
    let ca = ctx.add(ctx.trace(alpha), ctx.mul(two, a));
    let cb = ctx.add(ctx.trace(beta), ctx.mul(two, b));
    Ok(ctx.is_nonzero_square(ctx.mul(two, ctx.mul(ca, ctx.mul(cb, tm)))))
}

/// Per-vertex quantities reused across all pairs.
#[derive(Clone, Copy)]
struct VertexData {
    rep: Elem,
    root: Elem,
    /// tr(α) + 2a
    shifted: Elem,
    /// α^q - α
    frob_diff: Elem,
}

struct PairEval<'a> {
    ctx: &'a FieldCtx,
    data: Vec<VertexData>,
    two: Elem,
}

impl<'a> PairEval<'a> {
    fn new(ctx: &'a FieldCtx, labels: &[ProjPoint], negate_roots: bool) -> Self {
        let two = ctx.from_int(2);
        let data = labels
            .iter()
            .map(|p| {
                let rep = p.rep();
                let mut root = ctx.sqrt_base(quad(ctx, rep)).expect("even");
                if negate_roots {
                    root = ctx.neg(root);
                }
                VertexData {
                    rep,
                    root,
                    shifted: ctx.add(ctx.trace(rep), ctx.mul(two, root)),
                    frob_diff: ctx.sub(ctx.frobenius(rep, 1), rep),
                }
            })
            .collect();
        Self { ctx, data, two }
    }

    #[inline]
    fn collinear(&self, u: usize, v: usize) -> bool {
        let (a, b) = (&self.data[u], &self.data[v]);
        self.ctx.is_base(self.ctx.div(a.frob_diff, b.frob_diff))
    }

    #[inline]
    fn fast(&self, u: usize, v: usize) -> bool {
        let ctx = self.ctx;
        let (a, b) = (&self.data[u], &self.data[v]);
        let t = ctx.trace(ctx.mul(a.rep, b.rep));
        let ab = ctx.mul(a.root, b.root);
        let tm = ctx.sub(t, ab);
        if !ctx.is_nonsquare(ctx.mul(tm, ctx.add(t, ab))) {
            return false;
        }
        ctx.is_nonzero_square(ctx.mul(self.two, ctx.mul(a.shifted, ctx.mul(b.shifted, tm))))
    }

    fn four_sign(&self, u: usize, v: usize) -> bool {
        let (a, b) = (&self.data[u], &self.data[v]);
        four_sign(self.ctx, a.rep, b.rep, a.root, b.root)
    }

    fn adjacent(&self, kind: GraphKind, rule: ConeRule, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        if self.collinear(u, v) {
            return kind == GraphKind::Delta;
        }
        match rule {
            ConeRule::Fast => self.fast(u, v),
            ConeRule::FourSign => self.four_sign(u, v),
        }
    }
}

/// Builds Γ_X or Δ_X with the given cone-condition evaluation.
pub fn build_graph(ctx: &FieldCtx, kind: GraphKind, rule: ConeRule) -> Graph {
    build_graph_with_roots(ctx, kind, rule, false)
}

/// As [`build_graph`]; `negate_roots` uses -a in place of each canonical root.
pub fn build_graph_with_roots(
    ctx: &FieldCtx,
    kind: GraphKind,
    rule: ConeRule,
    negate_roots: bool,
) -> Graph {
    let labels = vertex_set(ctx);
    let n = labels.len();
    let mut index_of = vec![u32::MAX; ctx.base_step() as usize];
    for (i, p) in labels.iter().enumerate() {
        index_of[p.index() as usize] = i as u32;
    }
    let eval = PairEval::new(ctx, &labels, negate_roots);
    let stride = n.div_ceil(64);
    let rows: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut row = vec![0u64; stride];
            for v in 0..n {
                if eval.adjacent(kind, rule, u, v) {
                    row[v / 64] |= 1 << (v % 64);
                }
            }
            row
        })
        .collect();
    Graph {
        q: ctx.q(),
        kind,
        labels,
        index_of,
        modulus: ctx.modulus().to_vec(),
        adj: AdjacencyMatrix::from_rows(n, rows),
    }
}

pub fn build_gamma(ctx: &FieldCtx) -> Graph {
    build_graph(ctx, GraphKind::Gamma, ConeRule::Fast)
}

pub fn build_delta(ctx: &FieldCtx) -> Graph {
    build_graph(ctx, GraphKind::Delta, ConeRule::Fast)
}

/// Vertices on cone(Y) off the line XY, for an even point Y ≠ X on a tangent
/// line through X. These form a coclique of Δ_X of size q(q-1)/2.
pub fn coclique_from_cone(
    ctx: &FieldCtx,
    graph: &Graph,
    y: ProjPoint,
) -> Result<Vec<usize>, GraphError> {
    let x = x_point();
    if y == x || y.kind(ctx) != PointKind::EvenExternal || !x_cone_value(ctx, y.rep()).is_zero() {
        return Err(GraphError::NotOnTangentLine);
    }
    let mut out = Vec::new();
    for (v, &p) in graph.labels().iter().enumerate() {
        if p == y {
            continue;
        }
        if cone_contains(ctx, y, p)? && !collinear(ctx, x, y, p)? {
            out.push(v);
        }
    }
    Ok(out)
}

/// Even points other than X on tangent lines through X.
pub fn tangent_cone_points(ctx: &FieldCtx) -> Vec<ProjPoint> {
    all_points(ctx)
        .skip(1)
        .filter(|p| p.is_external(ctx) && x_cone_value(ctx, p.rep()).is_zero())
        .collect()
}
