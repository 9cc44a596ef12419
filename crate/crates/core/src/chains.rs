//! Bruen chains in polar form: (q+3)/2 external points, pairwise on external
//! lines, every three spanning a secant plane.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::clique::cliques_of_size;
use crate::field::{Elem, FieldCtx};
use crate::graphs::{fast_with_roots, Graph, GraphKind};
use crate::projective::{
    canonical_point, collinear, collinear_with_one, line_discriminant, line_type, point_at, quad,
    tangent_plane_test, x_cone_value, x_point, LineType, PointKind, ProjPoint,
};
use crate::symmetry::{apply_transport, transport_to_x, vertex_orbits, UnionFind, VertexPerm};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("chain has {got} points, expected {expected}")]
    WrongSize { expected: usize, got: usize },
    #[error("point z^{0} lies on the quadric")]
    PointOnQuadric(u32),
    #[error("vertices {0} and {1} are not adjacent")]
    NotAClique(usize, usize),
    #[error("chain does not contain X = <1>")]
    XNotInChain,
    #[error("point z^{0} is not a vertex of the graph")]
    VertexNotInGraph(u32),
    #[error("line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("exponent {0} is outside [0, q^4 - 1)")]
    ExponentOutOfRange(String),
    #[error("chain is for q = {file}, field has q = {field}")]
    QMismatch { file: u64, field: u64 },
    #[error("chain exponents refer to modulus {file:?}, field uses {field:?}")]
    ModulusMismatch { file: Vec<u64>, field: Vec<u64> },
    #[error(
        "exponents are only meaningful under the Conway polynomial; field was built without it"
    )]
    NonConwayField,
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// (q+3)/2, the size of a Bruen chain.
pub fn chain_size(q: u64) -> usize {
    (q as usize + 3) / 2
}

/// A candidate Bruen chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    q: u64,
    points: Vec<ProjPoint>,
    exponents: Option<Vec<u64>>,
}

impl Chain {
    /// Points sorted by index. Duplicates collapse.
    pub fn new(q: u64, points: impl IntoIterator<Item = ProjPoint>) -> Self {
        let mut points: Vec<ProjPoint> = points.into_iter().collect();
        points.sort();
        points.dedup();
        Self {
            q,
            points,
            exponents: None,
        }
    }

    pub fn from_exponents(ctx: &FieldCtx, exponents: &[u64]) -> Result<Self, ChainError> {
        let m = ctx.order() as u64;
        let mut points = Vec::with_capacity(exponents.len());
        for &e in exponents {
            if e >= m {
                return Err(ChainError::ExponentOutOfRange(e.to_string()));
            }
            points.push(canonical_point(ctx, Elem::from_log(e as u32)).expect("nonzero"));
        }
        let mut c = Chain::new(ctx.q(), points);
        c.exponents = Some(exponents.to_vec());
        Ok(c)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exponents as loaded, if the chain came from a file.
    pub fn source(&self) -> Option<&[u64]> {
        self.exponents.as_deref()
    }

    /// Exponents of the canonical representatives.
    pub fn canonical_exponents(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.index() as u64).collect()
    }

    pub fn contains(&self, p: ProjPoint) -> bool {
        self.points.binary_search(&p).is_ok()
    }
}

/// Result of one check; `detail` localizes the first failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub passed: bool,
    pub detail: Option<String>,
}

impl Check {
    fn pass() -> Self {
        Self {
            passed: true,
            detail: None,
        }
    }

    fn fail(detail: String) -> Self {
        Self {
            passed: false,
            detail: Some(detail),
        }
    }

    fn from_first_failure(failure: Option<String>) -> Self {
        failure.map_or_else(Check::pass, Check::fail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub size: Check,
    pub pairwise_external: Check,
    pub triple_secant: Check,
    pub cap: Check,
    pub isometry_uniform: Check,
    pub tangent_planes: Check,
    /// A cone on an external point off the chain holds 0 or 2 chain points,
    /// and none when the point is of the other isometry type.
    pub cone_pairs: Check,
    /// Every external point off the chain has an even number of chain points
    /// on its cone.
    pub cone_parity: Check,
}

impl VerifyReport {
    /// Conjunction of the core checks.
    pub fn passed(&self) -> bool {
        self.size.passed
            && self.pairwise_external.passed
            && self.triple_secant.passed
            && self.cap.passed
    }

    pub fn extended_passed(&self) -> bool {
        self.isometry_uniform.passed
            && self.tangent_planes.passed
            && self.cone_pairs.passed
            && self.cone_parity.passed
    }

    pub fn checks(&self) -> [(&'static str, &Check); 8] {
        [
            ("size", &self.size),
            ("pairwise-external", &self.pairwise_external),
            ("triple-secant-plane", &self.triple_secant),
            ("cap", &self.cap),
            ("isometry-uniform", &self.isometry_uniform),
            ("tangent-plane-0-or-2", &self.tangent_planes),
            ("cone-pair-count", &self.cone_pairs),
            ("cone-parity", &self.cone_parity),
        ]
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, c) in self.checks() {
            write!(f, "{name}: {}", if c.passed { "pass" } else { "FAIL" })?;
            if let Some(d) = &c.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "verdict: {}",
            if self.passed() { "pass" } else { "FAIL" }
        )
    }
}

fn exp(p: ProjPoint) -> String {
    format!("z^{}", p.index())
}

pub fn verify_chain(ctx: &FieldCtx, chain: &Chain) -> Result<VerifyReport, ChainError> {
    let expected = chain_size(ctx.q());
    if chain.len() != expected || chain.q() != ctx.q() {
        return Err(ChainError::WrongSize {
            expected,
            got: chain.len(),
        });
    }
    let pts = chain.points();
    if let Some(p) = pts.iter().find(|p| !p.is_external(ctx)) {
        return Err(ChainError::PointOnQuadric(p.index()));
    }

    let mut pair_fail = None;
    'pairs: for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            if line_type(ctx, a, b).expect("distinct points") != LineType::External {
                pair_fail = Some(format!("line {} {} is not external", exp(a), exp(b)));
                break 'pairs;
            }
        }
    }

    let mut cap_fail = None;
    let mut triple_fail = None;
    for (i, &a) in pts.iter().enumerate() {
        for (j, &b) in pts.iter().enumerate().skip(i + 1) {
            for &c in &pts[j + 1..] {
                let names = || format!("{} {} {}", exp(a), exp(b), exp(c));
                if collinear(ctx, a, b, c).expect("distinct points") {
                    cap_fail.get_or_insert_with(|| format!("{} are collinear", names()));
                    triple_fail.get_or_insert_with(|| format!("{} are collinear", names()));
                } else if tangent_plane_test(ctx, a.rep(), b.rep(), c.rep()).expect("valid triple")
                {
                    triple_fail.get_or_insert_with(|| format!("{} span a tangent plane", names()));
                }
            }
        }
    }

    let kind = pts[0].kind(ctx);
    let uniform = Check::from_first_failure(
        pts.iter()
            .find(|p| p.kind(ctx) != kind)
            .map(|p| format!("{} differs in type from {}", exp(*p), exp(pts[0]))),
    );

    let (cone_pairs, cone_parity) = cone_checks(ctx, pts, kind);
    Ok(VerifyReport {
        size: Check::pass(),
        pairwise_external: Check::from_first_failure(pair_fail),
        triple_secant: Check::from_first_failure(triple_fail),
        cap: Check::from_first_failure(cap_fail),
        isometry_uniform: uniform,
        tangent_planes: tangent_plane_check(ctx, pts),
        cone_pairs,
        cone_parity,
    })
}

/// Every tangent plane, the polar of a quadric point, meets the set in 0 or 2
/// points.
fn tangent_plane_check(ctx: &FieldCtx, pts: &[ProjPoint]) -> Check {
    let n = ctx.base_step();
    let mut planes = 0u64;
    for i in 0..n {
        let e = Elem::from_log(i);
        if !quad(ctx, e).is_zero() {
            continue;
        }
        planes += 1;
        let hits = pts
            .iter()
            .filter(|p| ctx.trace(ctx.mul(e, p.rep())).is_zero())
            .count();
        if hits != 0 && hits != 2 {
            return Check::fail(format!("tangent plane at z^{i} meets {hits} points"));
        }
    }
    let expect = ctx.q() * ctx.q() + 1;
    if planes != expect {
        return Check::fail(format!("found {planes} tangent planes, expected {expect}"));
    }
    Check::pass()
}

fn on_cone(ctx: &FieldCtx, p: ProjPoint, c: ProjPoint) -> bool {
    if c == x_point() {
        x_cone_value(ctx, p.rep()).is_zero()
    } else {
        line_discriminant(ctx, p.rep(), c.rep()).is_zero()
    }
}

fn cone_checks(ctx: &FieldCtx, pts: &[ProjPoint], kind: PointKind) -> (Check, Check) {
    let k = pts.len();
    let mut exact = None;
    let mut parity = None;
    for i in 0..ctx.base_step() {
        let p = point_at(ctx, i);
        if !p.is_external(ctx) || pts.binary_search(&p).is_ok() {
            continue;
        }
        let hits: Vec<usize> = (0..k).filter(|&j| on_cone(ctx, p, pts[j])).collect();
        let ok = if p.kind(ctx) == kind {
            hits.is_empty() || hits.len() == 2
        } else {
            hits.is_empty()
        };
        if !ok && exact.is_none() {
            exact = Some(format!("cone of z^{i} meets {} chain points", hits.len()));
        }
        if hits.len() % 2 == 1 && parity.is_none() {
            parity = Some(format!("cone of z^{i} meets {} chain points", hits.len()));
        }
    }
    (
        Check::from_first_failure(exact),
        Check::from_first_failure(parity),
    )
}

/// The field-element conditions for S = chain \ {X}: pairwise independence
/// with 1, tr(α)^2 - 4a^2 a nonsquare, and the cone expression a nonzero
/// square.
pub fn algebraic_conditions(ctx: &FieldCtx, elems: &[Elem]) -> bool {
    let four = ctx.from_int(4);
    let mut roots = Vec::with_capacity(elems.len());
    for &a in elems {
        if ctx.is_base(a) {
            return false;
        }
        let Ok(r) = ctx.sqrt_base(quad(ctx, a)) else {
            return false;
        };
        if r.is_zero() {
            return false;
        }
        let t = ctx.trace(a);
        if !ctx.is_nonsquare(ctx.sub(ctx.square(t), ctx.mul(four, ctx.square(r)))) {
            return false;
        }
        roots.push(r);
    }
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            if collinear_with_one(ctx, elems[i], elems[j]).unwrap_or(true) {
                return false;
            }
            // the external-line precondition is implied by the three conditions
            match fast_with_roots(ctx, elems[i], elems[j], roots[i], roots[j]) {
                Ok(true) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Adds X = <1> to the labels of a (q+1)/2-clique.
pub fn clique_to_chain(
    ctx: &FieldCtx,
    graph: &Graph,
    clique: &[usize],
) -> Result<Chain, ChainError> {
    let expected = graph.clique_bound();
    if clique.len() != expected {
        return Err(ChainError::WrongSize {
            expected,
            got: clique.len(),
        });
    }
    for (i, &u) in clique.iter().enumerate() {
        for &v in &clique[i + 1..] {
            if u == v || !graph.has_edge(u, v) {
                return Err(ChainError::NotAClique(u, v));
            }
        }
    }
    let chain = Chain::new(
        ctx.q(),
        clique.iter().map(|&v| graph.label(v)).chain([x_point()]),
    );
    Ok(chain)
}

/// Vertex indices of chain \ {X}, sorted and adjacency-checked.
pub fn chain_to_clique(chain: &Chain, graph: &Graph) -> Result<Vec<usize>, ChainError> {
    if !chain.contains(x_point()) {
        return Err(ChainError::XNotInChain);
    }
    let mut out = Vec::with_capacity(chain.len() - 1);
    for &p in chain.points() {
        if p == x_point() {
            continue;
        }
        out.push(
            graph
                .vertex_of(p)
                .ok_or(ChainError::VertexNotInGraph(p.index()))?,
        );
    }
    out.sort_unstable();
    for (i, &u) in out.iter().enumerate() {
        for &v in &out[i + 1..] {
            if !graph.has_edge(u, v) {
                return Err(ChainError::NotAClique(u, v));
            }
        }
    }
    Ok(out)
}

/// Contents of a chain file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainFile {
    pub q: u64,
    pub modulus: Option<Vec<u64>>,
    pub comments: Vec<String>,
    pub exponents: Vec<u64>,
}

impl ChainFile {
    /// Loads the chain into `ctx`, refusing mismatched fields.
    pub fn to_chain(&self, ctx: &FieldCtx) -> Result<Chain, ChainError> {
        if self.q != ctx.q() {
            return Err(ChainError::QMismatch {
                file: self.q,
                field: ctx.q(),
            });
        }
        match &self.modulus {
            Some(m) if m.as_slice() != ctx.modulus() => {
                return Err(ChainError::ModulusMismatch {
                    file: m.clone(),
                    field: ctx.modulus().to_vec(),
                })
            }
            None if !ctx.is_conway() => return Err(ChainError::NonConwayField),
            _ => {}
        }
        Chain::from_exponents(ctx, &self.exponents)
    }
}

/// Parses `q <q>`, an optional `modulus <c0 ... cn>` line, `#` comments, and
/// then whitespace-separated exponents.
pub fn parse_chain_file(text: &str) -> Result<ChainFile, ChainError> {
    let mut q = None;
    let mut modulus = None;
    let mut comments = Vec::new();
    let mut exponents = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let bad = |msg: String| ChainError::MalformedLine { line: i + 1, msg };
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap_or_default();
        if q.is_none() {
            if head != "q" {
                return Err(bad("expected `q <value>`".into()));
            }
            let v = tokens
                .next()
                .and_then(|t| t.parse::<u64>().ok())
                .ok_or_else(|| bad("bad q value".into()))?;
            if tokens.next().is_some() {
                return Err(bad("trailing tokens after q".into()));
            }
            q = Some(v);
            continue;
        }
        if head == "modulus" {
            if modulus.is_some() || !exponents.is_empty() {
                return Err(bad("misplaced modulus line".into()));
            }
            let coeffs = tokens
                .map(|t| t.parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad("bad modulus coefficient".into()))?;
            if coeffs.len() < 2 {
                return Err(bad("modulus needs at least two coefficients".into()));
            }
            modulus = Some(coeffs);
            continue;
        }
        for t in line.split_whitespace() {
            let v: i128 = t
                .parse()
                .map_err(|_| bad(format!("`{t}` is not an integer")))?;
            if v < 0 {
                return Err(ChainError::ExponentOutOfRange(t.to_string()));
            }
            exponents
                .push(u64::try_from(v).map_err(|_| ChainError::ExponentOutOfRange(t.to_string()))?);
        }
    }
    let q = q.ok_or(ChainError::MalformedLine {
        line: 1,
        msg: "missing `q` line".into(),
    })?;
    let m = q.checked_pow(4).map(|v| v - 1).unwrap_or(u64::MAX);
    if let Some(&e) = exponents.iter().find(|&&e| e >= m) {
        return Err(ChainError::ExponentOutOfRange(e.to_string()));
    }
    if exponents.is_empty() {
        return Err(ChainError::MalformedLine {
            line: text.lines().count().max(1),
            msg: "no exponents".into(),
        });
    }
    Ok(ChainFile {
        q,
        modulus,
        comments,
        exponents,
    })
}

pub fn format_chain_file(file: &ChainFile) -> String {
    let mut s = format!("q {}\n", file.q);
    if let Some(m) = &file.modulus {
        s.push_str("modulus");
        for c in m {
            s.push_str(&format!(" {c}"));
        }
        s.push('\n');
    }
    for c in &file.comments {
        s.push_str(&format!("# {c}\n"));
    }
    let exps: Vec<String> = file.exponents.iter().map(u64::to_string).collect();
    s.push_str(&exps.join(" "));
    s.push('\n');
    s
}

pub fn read_chain_file(path: &Path) -> Result<ChainFile, ChainError> {
    let text = std::fs::read_to_string(path).map_err(|source| ChainError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_chain_file(&text)
}

pub fn write_chain_file(file: &ChainFile, path: &Path) -> Result<(), ChainError> {
    std::fs::write(path, format_chain_file(file)).map_err(|source| ChainError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A chain file for `chain` with canonical exponents under `ctx`'s modulus.
pub fn chain_file_for(ctx: &FieldCtx, chain: &Chain) -> ChainFile {
    ChainFile {
        q: ctx.q(),
        modulus: Some(ctx.modulus().to_vec()),
        comments: Vec::new(),
        exponents: chain.canonical_exponents(),
    }
}

macro_rules! corpus {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../data/chains/", $name, ".chain")))),*]
    };
}

/// The bundled known chains, as `(name, file text)`.
pub const CORPUS: &[(&str, &str)] = corpus!(
    "q05a", "q07a", "q07b", "q09a", "q09b", "q11a", "q11b", "q13a", "q13b", "q17a", "q17b", "q19a",
    "q19b", "q23a", "q25a", "q25b", "q27a", "q31a", "q37a",
);

pub fn corpus() -> Vec<(&'static str, ChainFile)> {
    CORPUS
        .iter()
        .map(|(name, text)| {
            (
                *name,
                parse_chain_file(text).expect("bundled chain file parses"),
            )
        })
        .collect()
}

/// Chains through X found as (q+1)/2-cliques, grouped up to isometry.
#[derive(Clone, Debug)]
pub struct Classification {
    /// One representative clique per class, lexicographically least.
    pub representatives: Vec<Vec<usize>>,
    /// Number of cliques in each class.
    pub class_sizes: Vec<usize>,
    /// Cliques examined after closing under the generators.
    pub total_cliques: usize,
}

impl Classification {
    pub fn class_count(&self) -> usize {
        self.representatives.len()
    }
}

/// Groups cliques of size (q+1)/2 into isometry classes of their chains.
///
/// The seed cliques are closed under the generators; then for each chain C
/// and each P ∈ C \ X, the reflection moving P to X carries C to another
/// chain through X, and the two cliques are merged. Each class is a union
/// of components, so when the generators do not span the whole stabilizer
/// the count is an upper bound.
pub fn classify_cliques(
    ctx: &FieldCtx,
    graph: &Graph,
    gens: &[VertexPerm],
    seeds: &[Vec<usize>],
) -> Classification {
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    let mut uf_edges: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |c: Vec<usize>, cliques: &mut Vec<Vec<usize>>, queue: &mut VecDeque<usize>| {
        if let Some(&i) = index.get(&c) {
            return i;
        }
        let i = cliques.len();
        index.insert(c.clone(), i);
        cliques.push(c);
        queue.push_back(i);
        i
    };
    for s in seeds {
        let mut c = s.clone();
        c.sort_unstable();
        intern(c, &mut cliques, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        let c = cliques[i].clone();
        for g in gens {
            let j = intern(g.apply_set(&c), &mut cliques, &mut queue);
            uf_edges.push((i, j));
        }
        for &v in &c {
            let u = transport_to_x(ctx, graph.label(v).rep()).expect("vertices are even");
            let mut img = Vec::with_capacity(c.len());
            let mut ok = true;
            for p in c.iter().map(|&w| graph.label(w)).chain([x_point()]) {
                let q = canonical_point(ctx, apply_transport(ctx, u, p.rep())).expect("nonzero");
                if q == x_point() {
                    continue;
                }
                match graph.vertex_of(q) {
                    Some(w) => img.push(w),
                    None => ok = false,
                }
            }
            if !ok || img.len() != c.len() {
                continue;
            }
            img.sort_unstable();
            let j = intern(img, &mut cliques, &mut queue);
            uf_edges.push((i, j));
        }
    }
    let mut uf = UnionFind::new(cliques.len());
    for (a, b) in uf_edges {
        uf.union(a, b);
    }
    let mut reps: HashMap<usize, (Vec<usize>, usize)> = HashMap::new();
    for (i, c) in cliques.iter().enumerate() {
        let root = uf.find(i);
        let e = reps.entry(root).or_insert_with(|| (c.clone(), 0));
        if c < &e.0 {
            e.0 = c.clone();
        }
        e.1 += 1;
    }
    let mut classes: Vec<(Vec<usize>, usize)> = reps.into_values().collect();
    classes.sort();
    Classification {
        representatives: classes.iter().map(|c| c.0.clone()).collect(),
        class_sizes: classes.iter().map(|c| c.1).collect(),
        total_cliques: cliques.len(),
    }
}

/// Enumerates the (q+1)/2-cliques through the orbit representatives of
/// `gens` and groups the resulting chains up to isometry.
pub fn find_chain_classes(
    ctx: &FieldCtx,
    graph: &Graph,
    gens: &[VertexPerm],
    threads: usize,
) -> Classification {
    let orbits = vertex_orbits(graph.n(), gens);
    let seeds = cliques_of_size(
        graph.adjacency(),
        graph.clique_bound(),
        Some(orbits.reps()),
        threads,
    );
    classify_cliques(ctx, graph, gens, &seeds)
}

/// Whether a clique's labels form a cap, and for Δ_X, whether a clique that
/// is not a cap lies on one line through X.
pub fn clique_shape_ok(ctx: &FieldCtx, graph: &Graph, clique: &[usize]) -> bool {
    let pts: Vec<ProjPoint> = clique.iter().map(|&v| graph.label(v)).collect();
    let mut is_cap = true;
    for (i, &a) in pts.iter().enumerate() {
        for (j, &b) in pts.iter().enumerate().skip(i + 1) {
            for &c in &pts[j + 1..] {
                if collinear(ctx, a, b, c).expect("distinct") {
                    is_cap = false;
                }
            }
        }
    }
    if is_cap {
        return true;
    }
    graph.kind() == GraphKind::Delta
        && pts.len() >= 2
        && pts
            .iter()
            .skip(1)
            .all(|&p| collinear(ctx, x_point(), pts[0], p).expect("distinct"))
}
