//! Automorphisms of the cone graphs coming from isometries of Q that fix X.
//!
//! Reflections r_v(x) = x - (2 tr(vx)/tr(v^2)) v with tr(v) = 0 fix 1, and the
//! Frobenius map x ↦ x^q preserves tr, so both permute the vertex set and the
//! cone relation. Orbits of the generated group give the clique search its
//! starter vertices.

use std::fmt;

use rayon::prelude::*;

use crate::bitset::AdjacencyMatrix;
use crate::clique::StarterSet;
use crate::field::{Elem, FieldCtx};
use crate::graphs::Graph;
use crate::projective::{canonical_point, form, quad};

/// Reflection scan stops once this many consecutive generators leave the
/// orbit count unchanged.
pub const STABLE_ROUNDS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermSource {
    Frobenius,
    /// Reflection in the hyperplane orthogonal to this vector.
    Reflection(Elem),
}

impl fmt::Display for PermSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermSource::Frobenius => f.write_str("frobenius"),
            PermSource::Reflection(v) => write!(f, "reflection {v:?}"),
        }
    }
}

/// A verified automorphism as a permutation of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPerm {
    perm: Vec<u32>,
    source: PermSource,
}

impl VertexPerm {
    /// Wraps `perm` after checking that it is a bijection preserving `adj`.
    pub fn new(perm: Vec<u32>, source: PermSource, adj: &AdjacencyMatrix) -> Option<Self> {
        (is_bijection(&perm) && preserves_adjacency(&perm, adj)).then_some(Self { perm, source })
    }

    pub fn source(&self) -> PermSource {
        self.source
    }

    #[inline]
    pub fn apply(&self, v: usize) -> usize {
        self.perm[v] as usize
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p as usize)
    }

    /// Image of a vertex set, sorted.
    pub fn apply_set(&self, vs: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = vs.iter().map(|&v| self.apply(v)).collect();
        out.sort_unstable();
        out
    }

    pub fn compose(&self, then: &VertexPerm) -> Vec<u32> {
        self.perm.iter().map(|&p| then.perm[p as usize]).collect()
    }
}

pub fn is_bijection(perm: &[u32]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&p| {
        let p = p as usize;
        p < seen.len() && !std::mem::replace(&mut seen[p], true)
    })
}

/// Edges map to edges. For a bijection on a finite graph this already forces
/// non-edges to map to non-edges.
pub fn preserves_adjacency(perm: &[u32], adj: &AdjacencyMatrix) -> bool {
    perm.len() == adj.n()
        && (0..adj.n()).into_par_iter().all(|u| {
            let pu = perm[u] as usize;
            adj.neighbors(u)
                .iter()
                .all(|w| adj.has_edge(pu, perm[w] as usize))
        })
}

/// r_v(x), or `None` when tr(v^2) = 0.
pub fn reflect(ctx: &FieldCtx, v: Elem, x: Elem) -> Option<Elem> {
    let qv = quad(ctx, v);
    if qv.is_zero() {
        return None;
    }
    let c = ctx.div(ctx.mul(ctx.from_int(2), form(ctx, v, x)), qv);
    Some(ctx.sub(x, ctx.mul(c, v)))
}

/// z^k - (tr(z^k)/4), the k-th trace-zero vector of the reflection scan.
pub fn scan_vector(ctx: &FieldCtx, k: u32) -> Elem {
    let zk = Elem::from_log(k);
    let shift = ctx.div(ctx.trace(zk), ctx.from_int(4));
    ctx.sub(zk, shift)
}

fn induced_perm(
    graph: &Graph,
    ctx: &FieldCtx,
    map: impl Fn(Elem) -> Elem + Sync,
) -> Option<Vec<u32>> {
    graph
        .labels()
        .par_iter()
        .map(|p| {
            let img = canonical_point(ctx, map(p.rep())).ok()?;
            graph.vertex_of(img).map(|v| v as u32)
        })
        .collect()
}

pub fn frobenius_perm(ctx: &FieldCtx, graph: &Graph) -> Option<VertexPerm> {
    let perm = induced_perm(graph, ctx, |x| ctx.frobenius(x, 1))?;
    VertexPerm::new(perm, PermSource::Frobenius, graph.adjacency())
}

pub fn reflection_perm(ctx: &FieldCtx, graph: &Graph, v: Elem) -> Option<VertexPerm> {
    if quad(ctx, v).is_zero() {
        return None;
    }
    let perm = induced_perm(graph, ctx, |x| reflect(ctx, v, x).expect("tr(v^2) != 0"))?;
    VertexPerm::new(perm, PermSource::Reflection(v), graph.adjacency())
}

/// Frobenius followed by scanned reflections, until the orbit count has been
/// stable for [`STABLE_ROUNDS`] additions or `max_reflections` is reached.
pub fn stabilizer_generators(
    ctx: &FieldCtx,
    graph: &Graph,
    max_reflections: Option<usize>,
) -> Vec<VertexPerm> {
    let n = graph.n();
    let mut uf = UnionFind::new(n);
    let mut gens = Vec::new();
    if let Some(f) = frobenius_perm(ctx, graph) {
        uf.absorb(&f);
        gens.push(f);
    }
    let cap = max_reflections.unwrap_or(usize::MAX);
    let mut reflections = 0;
    let mut stable = 0;
    let mut last = uf.count();
    for k in 1..ctx.order() {
        if reflections >= cap || stable >= STABLE_ROUNDS {
            break;
        }
        let Some(g) = reflection_perm(ctx, graph, scan_vector(ctx, k)) else {
            continue;
        };
        reflections += 1;
        uf.absorb(&g);
        gens.push(g);
        let now = uf.count();
        if now == last {
            stable += 1;
        } else {
            stable = 0;
            last = now;
        }
    }
    gens
}

/// Partition of the vertices into orbits, numbered by their least member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPartition {
    orbit_id: Vec<usize>,
    reps: Vec<usize>,
}

impl OrbitPartition {
    pub fn count(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    pub fn orbit_of(&self, v: usize) -> usize {
        self.orbit_id[v]
    }

    pub fn ids(&self) -> &[usize] {
        &self.orbit_id
    }

    pub fn members(&self, orbit: usize) -> Vec<usize> {
        (0..self.orbit_id.len())
            .filter(|&v| self.orbit_id[v] == orbit)
            .collect()
    }

    /// Orbit representatives as clique-search starters.
    pub fn starter_set(&self) -> StarterSet {
        StarterSet::orbits(self.reps.clone(), self.orbit_id.clone())
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.reps.len()];
        for &o in &self.orbit_id {
            s[o] += 1;
        }
        s
    }
}

pub fn vertex_orbits(n: usize, gens: &[VertexPerm]) -> OrbitPartition {
    let mut uf = UnionFind::new(n);
    for g in gens {
        uf.absorb(g);
    }
    uf.partition()
}

/// Disjoint-set forest over `0..n`.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            components: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if the two were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        self.components -= 1;
        true
    }

    pub fn count(&self) -> usize {
        self.components
    }

    fn absorb(&mut self, g: &VertexPerm) {
        for v in 0..g.len() {
            self.union(v, g.apply(v));
        }
    }

    pub fn partition(&mut self) -> OrbitPartition {
        let n = self.parent.len();
        let mut id_of_root = vec![usize::MAX; n];
        let mut orbit_id = vec![0; n];
        let mut reps = Vec::new();
        for v in 0..n {
            let r = self.find(v);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = reps.len();
                reps.push(v);
            }
            orbit_id[v] = id_of_root[r];
        }
        OrbitPartition { orbit_id, reps }
    }
}

/// A reflection vector u with r_u(<p>) = <1>, for p with tr(p^2) a nonzero
/// square. `None` for points on the quadric or odd points.
pub fn transport_to_x(ctx: &FieldCtx, p: Elem) -> Option<Elem> {
    let s = ctx.sqrt_base(quad(ctx, p)).ok()?;
    if s.is_zero() {
        return None;
    }
    // scale so that tr(p'^2) = 4 = tr(1^2)
    let p1 = ctx.mul(ctx.div(ctx.from_int(2), s), p);
    if p1 == Elem::ONE {
        return Some(Elem::ZERO);
    }
    let u = ctx.sub(p1, Elem::ONE);
    if !quad(ctx, u).is_zero() {
        return Some(u);
    }
    Some(ctx.add(p1, Elem::ONE))
}

/// Applies [`transport_to_x`]'s reflection (the identity for `Elem::ZERO`).
pub fn apply_transport(ctx: &FieldCtx, u: Elem, x: Elem) -> Elem {
    if u.is_zero() {
        x
    } else {
        reflect(ctx, u, x).expect("transport vector is anisotropic")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldOptions};
    use crate::graphs::build_gamma;
    use crate::projective::{all_points, x_point};

    fn field(q: u64) -> FieldCtx {
        make_field(q, &FieldOptions::default()).unwrap()
    }

    #[test]
    fn reflections_fix_one_and_are_involutions() {
        let f = field(5);
        let g = build_gamma(&f);
        let mut found = 0;
        for k in 1..40 {
            let v = scan_vector(&f, k);
            assert!(f.trace(v).is_zero());
            if let Some(r) = reflect(&f, v, Elem::ONE) {
                assert_eq!(r, Elem::ONE);
                let p = reflection_perm(&f, &g, v).unwrap();
                let twice = p.compose(&p);
                assert!(twice.iter().enumerate().all(|(i, &x)| i == x as usize));
                found += 1;
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn generators_preserve_adjacency() {
        for q in [5, 7, 9] {
            let f = field(q);
            let g = build_gamma(&f);
            let gens = stabilizer_generators(&f, &g, None);
            assert!(gens.len() > 1);
            for p in &gens {
                assert!(preserves_adjacency(p.as_slice(), g.adjacency()));
            }
            let full = vertex_orbits(g.n(), &gens);
            let frob = vertex_orbits(g.n(), &gens[..1]);
            assert!(full.count() <= frob.count());
            assert_eq!(vertex_orbits(g.n(), &[]).count(), g.n());
        }
    }

    #[test]
    fn orbits_are_invariant_and_reps_minimal() {
        let f = field(7);
        let g = build_gamma(&f);
        let gens = stabilizer_generators(&f, &g, Some(3));
        let orb = vertex_orbits(g.n(), &gens);
        for p in &gens {
            for v in 0..g.n() {
                assert_eq!(orb.orbit_of(v), orb.orbit_of(p.apply(v)));
            }
        }
        for (i, &r) in orb.reps().iter().enumerate() {
            assert_eq!(orb.members(i)[0], r);
        }
        assert_eq!(orb.sizes().iter().sum::<usize>(), g.n());
    }

    #[test]
    fn rejects_non_automorphism() {
        let m = AdjacencyMatrix::from_edges(3, [(0, 1)]);
        assert!(VertexPerm::new(vec![0, 2, 1], PermSource::Frobenius, &m).is_none());
        assert!(VertexPerm::new(vec![1, 0, 2], PermSource::Frobenius, &m).is_some());
        assert!(VertexPerm::new(vec![0, 0, 2], PermSource::Frobenius, &m).is_none());
    }

    #[test]
    fn transport_sends_even_points_to_x() {
        let f = field(7);
        for p in all_points(&f) {
            let u = transport_to_x(&f, p.rep());
            match p.kind(&f) {
                crate::projective::PointKind::EvenExternal => {
                    let img = apply_transport(&f, u.unwrap(), p.rep());
                    assert_eq!(canonical_point(&f, img).unwrap(), x_point());
                }
                _ => assert!(u.is_none()),
            }
        }
    }
}
