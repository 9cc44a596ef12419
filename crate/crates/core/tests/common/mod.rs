//! Independent oracles. Field arithmetic here is schoolbook polynomial
//! arithmetic over F_p; geometry is done by enumerating points, never by the
//! closed-form tests the crate implements.

#![allow(dead_code)]

use bruen_core::projective::{self, quad};
use bruen_core::{make_field, Elem, FieldCtx, FieldOptions};

pub const SMALL_QS: [u64; 5] = [5, 7, 9, 11, 13];

pub fn field(q: u64) -> FieldCtx {
    make_field(q, &FieldOptions::default()).expect("bundled field")
}

/// F_p[x] / (m(x)) with m monic of degree n, coefficients constant first.
pub struct PolyField {
    pub p: u64,
    pub modulus: Vec<u64>,
}

impl PolyField {
    pub fn new(p: u64, modulus: &[u64]) -> Self {
        assert_eq!(*modulus.last().unwrap(), 1, "modulus must be monic");
        PolyField {
            p,
            modulus: modulus.to_vec(),
        }
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn one(&self) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        v[0] = 1;
        v
    }

    pub fn x(&self) -> Vec<u64> {
        let mut v = vec![0; self.degree()];
        v[1] = 1;
        v
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = self.degree();
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        for k in (n..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &m) in self.modulus[..n].iter().enumerate() {
                let sub = c * m % self.p;
                prod[k - n + i] = (prod[k - n + i] + self.p - sub) % self.p;
            }
        }
        prod.truncate(n);
        prod
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// Point index of a nonzero vector: log reduced mod N.
pub fn point_index(ctx: &FieldCtx, x: Elem) -> u32 {
    x.log().expect("nonzero") % ctx.base_step()
}

pub fn is_singular(ctx: &FieldCtx, idx: u32) -> bool {
    quad(ctx, Elem::from_log(idx)).is_zero()
}

/// The q + 1 point indices of the line through <a>, <b>, by enumeration.
pub fn line_by_enumeration(ctx: &FieldCtx, a: Elem, b: Elem) -> Vec<u32> {
    let mut pts: Vec<u32> = ctx
        .base_elements()
        .map(|l| point_index(ctx, ctx.add(a, ctx.mul(l, b))))
        .collect();
    pts.push(point_index(ctx, b));
    pts.sort_unstable();
    pts.dedup();
    assert_eq!(pts.len() as u64, ctx.q() + 1, "a, b must be independent");
    pts
}

pub fn singular_count_on_line(ctx: &FieldCtx, a: Elem, b: Elem) -> usize {
    line_by_enumeration(ctx, a, b)
        .into_iter()
        .filter(|&i| is_singular(ctx, i))
        .count()
}

/// cone(A) as a membership vector: A and every point on a line through A
/// that meets the quadric in exactly one point.
pub fn cone_by_enumeration(ctx: &FieldCtx, a: Elem, quadric: &[u32]) -> Vec<bool> {
    let mut on = vec![false; ctx.base_step() as usize];
    on[point_index(ctx, a) as usize] = true;
    for &e in quadric {
        let ev = Elem::from_log(e);
        let line = line_by_enumeration(ctx, a, ev);
        let hits = line.iter().filter(|&&i| is_singular(ctx, i)).count();
        if hits == 1 {
            for i in line {
                on[i as usize] = true;
            }
        }
    }
    on
}

pub fn quadric_points(ctx: &FieldCtx) -> Vec<u32> {
    (0..ctx.base_step())
        .filter(|&i| is_singular(ctx, i))
        .collect()
}

/// Whether cone(X) ∩ cone(A) ∩ cone(B) contains no point off the quadric.
pub fn triple_cone_empty(ctx: &FieldCtx, cx: &[bool], ca: &[bool], cb: &[bool]) -> bool {
    (0..ctx.base_step() as usize).all(|i| !(cx[i] && ca[i] && cb[i]) || is_singular(ctx, i as u32))
}

/// Points of the plane with pole <p>, found by testing every point.
pub fn plane_by_enumeration(ctx: &FieldCtx, pole: Elem) -> Vec<u32> {
    (0..ctx.base_step())
        .filter(|&i| projective::form(ctx, pole, Elem::from_log(i)).is_zero())
        .collect()
}

/// Discrepancy tallies for the four oracle comparisons.
#[derive(Debug, Default, Clone, Copy)]
pub struct OracleTally {
    pub cone_pairs: usize,
    pub cone_bad: usize,
    pub fast_pairs: usize,
    pub fast_bad: usize,
    pub lines: usize,
    pub line_bad: usize,
    pub planes: usize,
    pub plane_bad: usize,
}

impl OracleTally {
    pub fn clean(&self) -> bool {
        self.cone_bad + self.fast_bad + self.line_bad + self.plane_bad == 0
    }
}

/// Exhaustive comparison of cone_condition, fast_cone_condition, line_type and
/// tangent_plane_test against enumeration for one q.
pub fn oracle_equivalence(q: u64) -> OracleTally {
    use bruen_core::graphs;
    use bruen_core::projective::{collinear_with_one, line_type, point_at, LineType};

    let ctx = field(q);
    let n = ctx.base_step();
    let quadric = quadric_points(&ctx);
    assert_eq!(quadric.len() as u64, q * q + 1);
    let mut t = OracleTally::default();

    // (c) every line through two external points
    for i in 0..n {
        if is_singular(&ctx, i) {
            continue;
        }
        for j in i + 1..n {
            if is_singular(&ctx, j) {
                continue;
            }
            let (a, b) = (Elem::from_log(i), Elem::from_log(j));
            let hits = singular_count_on_line(&ctx, a, b);
            let want = match hits {
                0 => LineType::External,
                1 => LineType::Tangent,
                2 => LineType::Secant,
                _ => unreachable!("a line meets an elliptic quadric in at most two points"),
            };
            t.lines += 1;
            if line_type(&ctx, point_at(&ctx, i), point_at(&ctx, j)).unwrap() != want {
                t.line_bad += 1;
            }
        }
    }

    // (d) every plane, spanned by three of its external points
    for p in 0..n {
        let pole = Elem::from_log(p);
        let plane = plane_by_enumeration(&ctx, pole);
        assert_eq!(plane.len() as u64, q * q + q + 1);
        let singular = plane.iter().filter(|&&i| is_singular(&ctx, i)).count();
        let mut basis: Vec<Elem> = Vec::new();
        for &i in &plane {
            if is_singular(&ctx, i) {
                continue;
            }
            let mut cand = basis.clone();
            cand.push(Elem::from_log(i));
            if ctx.rank(&cand) == cand.len() {
                basis = cand;
            }
            if basis.len() == 3 {
                break;
            }
        }
        t.planes += 1;
        let got = projective::tangent_plane_test(&ctx, basis[0], basis[1], basis[2]).unwrap();
        if got != (singular == 1) {
            t.plane_bad += 1;
        }
    }

    // (a), (b) over pairs of vertices not collinear with X
    let verts = graphs::vertex_set(&ctx);
    let cone_x = cone_by_enumeration(&ctx, Elem::ONE, &quadric);
    let cones: Vec<Vec<bool>> = verts
        .iter()
        .map(|v| cone_by_enumeration(&ctx, v.rep(), &quadric))
        .collect();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            let (a, b) = (verts[i].rep(), verts[j].rep());
            if collinear_with_one(&ctx, a, b).unwrap() {
                continue;
            }
            let truth = triple_cone_empty(&ctx, &cone_x, &cones[i], &cones[j]);
            let slow = graphs::cone_condition(&ctx, a, b).unwrap();
            t.cone_pairs += 1;
            if slow != truth {
                t.cone_bad += 1;
            }
            if singular_count_on_line(&ctx, a, b) == 0 {
                t.fast_pairs += 1;
                if graphs::fast_cone_condition(&ctx, a, b).unwrap() != slow {
                    t.fast_bad += 1;
                }
            }
        }
    }
    t
}
