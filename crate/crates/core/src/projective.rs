//! Points of PG(3,q) as one-dimensional F_q-subspaces of F_{q^4}, with the
//! elliptic quadric Q(x) = tr(x^2) and its polarity tr(xy).
//!
//! A point is stored by its canonical representative: the member of
//! {λx : λ ∈ F_q^*} with least discrete log. Since F_q^* = <z^N>, that log is
//! simply log(x) mod N, so points are indexed by [0, N).

use thiserror::Error;

use crate::field::{Elem, FieldCtx, SquareClass};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("the zero vector does not define a point")]
    ZeroVector,
    #[error("the two points coincide")]
    SamePoint,
    #[error("points repeat")]
    DuplicatePoint,
    #[error("a point lies on the quadric")]
    OnQuadric,
    #[error("element lies in F_q")]
    InBaseField,
    #[error("the three vectors are linearly dependent")]
    DependentTriple,
    #[error("some tr(x^2) vanishes")]
    ZeroTraceSquare,
    #[error("some tr(x) vanishes")]
    ZeroTrace,
    #[error("cone vertex lies on the quadric")]
    VertexOnQuadric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PointKind {
    Singular,
    EvenExternal,
    OddExternal,
}

impl PointKind {
    fn from_class(c: SquareClass) -> Self {
        match c {
            SquareClass::Zero => PointKind::Singular,
            SquareClass::Square => PointKind::EvenExternal,
            SquareClass::Nonsquare => PointKind::OddExternal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LineType {
    External,
    Tangent,
    Secant,
}

/// A point of PG(3,q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    rep: Elem,
}

impl ProjPoint {
    pub fn rep(self) -> Elem {
        self.rep
    }

    /// Index in [0, N): the discrete log of the representative.
    pub fn index(self) -> u32 {
        self.rep.raw()
    }

    /// Class of Q(rep) in F_q.
    pub fn q_class(self, ctx: &FieldCtx) -> SquareClass {
        ctx.base_class(quad(ctx, self.rep))
    }

    pub fn kind(self, ctx: &FieldCtx) -> PointKind {
        PointKind::from_class(self.q_class(ctx))
    }

    pub fn is_external(self, ctx: &FieldCtx) -> bool {
        !quad(ctx, self.rep).is_zero()
    }
}

/// Q(x) = tr(x^2).
#[inline]
pub fn quad(ctx: &FieldCtx, x: Elem) -> Elem {
    ctx.trace(ctx.square(x))
}

/// The bilinear form tr(xy) polar to Q (up to the factor 2).
#[inline]
pub fn form(ctx: &FieldCtx, x: Elem, y: Elem) -> Elem {
    ctx.trace(ctx.mul(x, y))
}

pub fn canonical_point(ctx: &FieldCtx, x: Elem) -> Result<ProjPoint, GeomError> {
    let k = x.log().ok_or(GeomError::ZeroVector)?;
    Ok(ProjPoint {
        rep: Elem::from_log(k % ctx.base_step()),
    })
}

/// The point with index `i` in [0, N).
pub fn point_at(ctx: &FieldCtx, i: u32) -> ProjPoint {
    debug_assert!(i < ctx.base_step());
    ProjPoint {
        rep: Elem::from_log(i),
    }
}

/// X = <1>.
pub fn x_point() -> ProjPoint {
    ProjPoint { rep: Elem::ONE }
}

pub fn all_points(ctx: &FieldCtx) -> impl Iterator<Item = ProjPoint> + '_ {
    (0..ctx.base_step()).map(move |i| point_at(ctx, i))
}

/// tr(xy)^2 - Q(x)Q(y); its square class decides the type of line <x, y>.
#[inline]
pub fn line_discriminant(ctx: &FieldCtx, x: Elem, y: Elem) -> Elem {
    let b = form(ctx, x, y);
    ctx.sub(ctx.square(b), ctx.mul(quad(ctx, x), quad(ctx, y)))
}

pub fn line_type(ctx: &FieldCtx, a: ProjPoint, b: ProjPoint) -> Result<LineType, GeomError> {
    if a == b {
        return Err(GeomError::SamePoint);
    }
    if !a.is_external(ctx) || !b.is_external(ctx) {
        return Err(GeomError::OnQuadric);
    }
    Ok(match ctx.base_class(line_discriminant(ctx, a.rep, b.rep)) {
        SquareClass::Nonsquare => LineType::External,
        SquareClass::Zero => LineType::Tangent,
        SquareClass::Square => LineType::Secant,
    })
}

/// The q + 1 points of the line through distinct points `a`, `b`.
pub fn line_points(ctx: &FieldCtx, a: Elem, b: Elem) -> Vec<ProjPoint> {
    let mut pts: Vec<ProjPoint> = ctx
        .base_elements()
        .map(|l| canonical_point(ctx, ctx.add(a, ctx.mul(l, b))).expect("independent"))
        .collect();
    pts.push(canonical_point(ctx, b).expect("nonzero"));
    pts
}

/// The q^2 + q + 1 points of the plane spanned by three independent vectors.
pub fn plane_points(ctx: &FieldCtx, g: Elem, d: Elem, e: Elem) -> Vec<ProjPoint> {
    let mut pts = Vec::with_capacity((ctx.q() * ctx.q() + ctx.q() + 1) as usize);
    for s in ctx.base_elements() {
        let gs = ctx.add(g, ctx.mul(s, d));
        for t in ctx.base_elements() {
            pts.push(canonical_point(ctx, ctx.add(gs, ctx.mul(t, e))).expect("independent"));
        }
    }
    for t in ctx.base_elements() {
        pts.push(canonical_point(ctx, ctx.add(d, ctx.mul(t, e))).expect("independent"));
    }
    pts.push(canonical_point(ctx, e).expect("nonzero"));
    pts
}

/// True when {1, α, β} is F_q-dependent, i.e. <1>, <α>, <β> are collinear.
/// Tests whether (α^q - α)/(β^q - β) lies in F_q.
pub fn collinear_with_one(ctx: &FieldCtx, alpha: Elem, beta: Elem) -> Result<bool, GeomError> {
    let da = ctx.sub(ctx.frobenius(alpha, 1), alpha);
    let db = ctx.sub(ctx.frobenius(beta, 1), beta);
    if da.is_zero() || db.is_zero() {
        return Err(GeomError::InBaseField);
    }
    Ok(ctx.is_base(ctx.div(da, db)))
}

pub fn collinear(
    ctx: &FieldCtx,
    a: ProjPoint,
    b: ProjPoint,
    c: ProjPoint,
) -> Result<bool, GeomError> {
    if a == b || b == c || a == c {
        return Err(GeomError::DuplicatePoint);
    }
    Ok(ctx.rank(&[a.rep, b.rep, c.rep]) <= 2)
}

/// Gram determinant of the form tr(xy) restricted to <g, d, e>; it vanishes
/// exactly when the plane is tangent to the quadric.
pub fn gram_det3(ctx: &FieldCtx, g: Elem, d: Elem, e: Elem) -> Elem {
    let (gg, dd, ee) = (quad(ctx, g), quad(ctx, d), quad(ctx, e));
    let (gd, de, eg) = (form(ctx, g, d), form(ctx, d, e), form(ctx, e, g));
    let m = |a, b| ctx.mul(a, b);
    let mut acc = m(m(gg, dd), ee);
    acc = ctx.sub(acc, m(gg, ctx.square(de)));
    acc = ctx.sub(acc, m(dd, ctx.square(eg)));
    acc = ctx.sub(acc, m(ee, ctx.square(gd)));
    let two = ctx.from_int(2);
    ctx.add(acc, m(two, m(m(gd, de), eg)))
}

/// Whether <γ, δ, ε> is a tangent plane, for independent γ, δ, ε with
/// nonzero tr(γ^2) tr(δ^2) tr(ε^2).
pub fn tangent_plane_test(ctx: &FieldCtx, g: Elem, d: Elem, e: Elem) -> Result<bool, GeomError> {
    if ctx.rank(&[g, d, e]) < 3 {
        return Err(GeomError::DependentTriple);
    }
    if [g, d, e].iter().any(|&x| quad(ctx, x).is_zero()) {
        return Err(GeomError::ZeroTraceSquare);
    }
    Ok(gram_det3(ctx, g, d, e).is_zero())
}

/// Whether `y` lies on cone(a): y = a, or line ay is tangent to the quadric.
pub fn cone_contains(ctx: &FieldCtx, a: ProjPoint, y: ProjPoint) -> Result<bool, GeomError> {
    if !a.is_external(ctx) {
        return Err(GeomError::VertexOnQuadric);
    }
    if a == y {
        return Ok(true);
    }
    if a.rep == Elem::ONE {
        return Ok(x_cone_value(ctx, y.rep).is_zero());
    }
    Ok(line_discriminant(ctx, a.rep, y.rep).is_zero())
}

/// tr(y)^2 - 4 tr(y^2), which vanishes on cone(<1>).
#[inline]
pub fn x_cone_value(ctx: &FieldCtx, y: Elem) -> Elem {
    let t = ctx.trace(y);
    ctx.sub(ctx.square(t), ctx.mul(ctx.from_int(4), quad(ctx, y)))
}

/// The polar plane of a point, as the functional x ↦ tr(rep · x).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolarPlane {
    pole: Elem,
}

impl PolarPlane {
    pub fn eval(&self, ctx: &FieldCtx, x: Elem) -> Elem {
        form(ctx, self.pole, x)
    }

    pub fn contains(&self, ctx: &FieldCtx, p: ProjPoint) -> bool {
        self.eval(ctx, p.rep).is_zero()
    }

    /// Coefficients of the functional in coordinates over {1, z, z^2, z^3}.
    pub fn coefficients(&self, ctx: &FieldCtx) -> [Elem; 4] {
        let mut c = [Elem::ZERO; 4];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = form(ctx, self.pole, Elem::from_log(i as u32));
        }
        c
    }
}

pub fn polar_form(p: ProjPoint) -> PolarPlane {
    PolarPlane { pole: p.rep }
}

/// f(x, y) = tr(y)x - tr(x)y.
pub fn f_pair(ctx: &FieldCtx, x: Elem, y: Elem) -> Elem {
    ctx.sub(ctx.mul(ctx.trace(y), x), ctx.mul(ctx.trace(x), y))
}

/// Intersection of cone(<1>) minus the quadric with the line
/// {x : tr(δx) = tr(εx) = 0}, found by walking the line.
pub fn cone_line_intersections(
    ctx: &FieldCtx,
    delta: Elem,
    eps: Elem,
) -> Result<Vec<ProjPoint>, GeomError> {
    if ctx.rank(&[Elem::ONE, delta, eps]) < 3 {
        return Err(GeomError::DependentTriple);
    }
    if ctx.trace(delta).is_zero() || ctx.trace(eps).is_zero() {
        return Err(GeomError::ZeroTrace);
    }
    let ker = ctx.kernel(&[
        PolarPlane { pole: delta }.coefficients(ctx),
        PolarPlane { pole: eps }.coefficients(ctx),
    ]);
    debug_assert_eq!(ker.len(), 2);
    let u = ctx.from_coords(ker[0]);
    let w = ctx.from_coords(ker[1]);
    Ok(line_points(ctx, u, w)
        .into_iter()
        .filter(|p| p.is_external(ctx) && x_cone_value(ctx, p.rep).is_zero())
        .collect())
}

/// Number of points [`cone_line_intersections`] should find, by the square
/// class of -tr(f(δ,ε)^2) unless <1, δ, ε> is a tangent plane.
///
/// A tangent plane gives one point, except when <δ, ε> is itself tangent
/// (tr(f(δ,ε)^2) = 0): then the only cone point on the line is the quadric
/// point <f(δ,ε)>, which does not count.
pub fn predicted_cone_line_count(ctx: &FieldCtx, delta: Elem, eps: Elem) -> usize {
    let v = ctx.neg(quad(ctx, f_pair(ctx, delta, eps)));
    if gram_det3(ctx, Elem::ONE, delta, eps).is_zero() {
        return usize::from(!v.is_zero());
    }
    match ctx.base_class(v) {
        SquareClass::Nonsquare => 2,
        SquareClass::Zero => 1,
        SquareClass::Square => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(q: u64) -> FieldCtx {
        make_field(q, &FieldOptions::default()).unwrap()
    }

    fn random_elem(ctx: &FieldCtx, rng: &mut impl Rng) -> Elem {
        Elem::from_log(rng.gen_range(0..ctx.order()))
    }

    #[test]
    fn canonical_points() {
        let f = field(5);
        assert_eq!(canonical_point(&f, Elem::ONE).unwrap().rep(), Elem::ONE);
        for l in f.base_units() {
            assert_eq!(canonical_point(&f, l).unwrap(), x_point());
        }
        // logs of λz are 1 + 156k
        for l in f.base_units() {
            assert_eq!(canonical_point(&f, f.mul(l, f.z())).unwrap().index(), 1);
        }
        assert_eq!(canonical_point(&f, Elem::ZERO), Err(GeomError::ZeroVector));
    }

    #[test]
    fn class_sizes() {
        for q in [5u64, 7, 9, 11, 13] {
            let f = field(q);
            let mut counts = [0u64; 3];
            for p in all_points(&f) {
                counts[p.kind(&f) as usize] += 1;
            }
            assert_eq!(
                counts,
                [q * q + 1, q * (q * q + 1) / 2, q * (q * q + 1) / 2]
            );
        }
    }

    #[test]
    fn line_types_count_quadric_points() {
        let f = field(7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [false; 3];
        for _ in 0..2000 {
            let a = canonical_point(&f, random_elem(&f, &mut rng)).unwrap();
            let b = canonical_point(&f, random_elem(&f, &mut rng)).unwrap();
            let (Ok(t), Ok(t2)) = (line_type(&f, a, b), line_type(&f, b, a)) else {
                continue;
            };
            assert_eq!(t, t2);
            let on = line_points(&f, a.rep(), b.rep())
                .iter()
                .filter(|p| !p.is_external(&f))
                .count();
            let expect = match t {
                LineType::External => 0,
                LineType::Tangent => 1,
                LineType::Secant => 2,
            };
            assert_eq!(on, expect);
            seen[t as usize] = true;
        }
        assert_eq!(seen, [true; 3]);
        let x = x_point();
        assert_eq!(line_type(&f, x, x), Err(GeomError::SamePoint));
    }

    #[test]
    fn tangent_lines_preserve_kind() {
        let f = field(9);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut hits = 0;
        while hits < 1000 {
            let a = canonical_point(&f, random_elem(&f, &mut rng)).unwrap();
            let b = canonical_point(&f, random_elem(&f, &mut rng)).unwrap();
            if line_type(&f, a, b) == Ok(LineType::Tangent) {
                assert_eq!(a.kind(&f), b.kind(&f));
                hits += 1;
            }
        }
    }

    #[test]
    fn collinearity_with_one() {
        let f = field(7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let three = f.from_int(3);
        let mut checked = 0;
        while checked < 10_000 {
            let a = random_elem(&f, &mut rng);
            let b = random_elem(&f, &mut rng);
            if f.is_base(a) || f.is_base(b) {
                continue;
            }
            assert!(collinear_with_one(&f, a, f.add(a, three)).unwrap());
            assert!(collinear_with_one(&f, a, f.mul(three, a)).unwrap());
            let rank = f.rank(&[Elem::ONE, a, b]);
            assert_eq!(collinear_with_one(&f, a, b).unwrap(), rank <= 2);
            checked += 1;
        }
        assert_eq!(
            collinear_with_one(&f, Elem::ONE, f.z()),
            Err(GeomError::InBaseField)
        );
    }

    #[test]
    fn collinear_matches_line_enumeration() {
        let f = field(5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let a = canonical_point(&f, random_elem(&f, &mut rng)).unwrap();
            let b = canonical_point(&f, random_elem(&f, &mut rng)).unwrap();
            let c = canonical_point(&f, random_elem(&f, &mut rng)).unwrap();
            if a == b || b == c || a == c {
                continue;
            }
            let on_line = line_points(&f, a.rep(), b.rep()).contains(&c);
            assert_eq!(collinear(&f, a, b, c).unwrap(), on_line);
            let s = canonical_point(&f, f.add(a.rep(), b.rep())).unwrap();
            assert!(collinear(&f, a, b, s).unwrap());
        }
    }

    #[test]
    fn tangent_planes_at_quadric_points() {
        let f = field(7);
        let mut checked = 0;
        for g in all_points(&f).filter(|p| !p.is_external(&f)).take(20) {
            // the polar plane of a quadric point is its tangent plane
            let ker = f.kernel(&[polar_form(g).coefficients(&f)]);
            let basis: Vec<Elem> = ker.iter().map(|&v| f.from_coords(v)).collect();
            // pick a triple of plane points off the quadric
            let pts: Vec<ProjPoint> = plane_points(&f, basis[0], basis[1], basis[2])
                .into_iter()
                .filter(|p| p.is_external(&f))
                .collect();
            let (a, b) = (pts[0], pts[1]);
            let c = pts
                .iter()
                .copied()
                .find(|&c| c != a && c != b && !collinear(&f, a, b, c).unwrap())
                .unwrap();
            assert!(tangent_plane_test(&f, a.rep(), b.rep(), c.rep()).unwrap());
            checked += 1;
        }
        assert_eq!(checked, 20);
        let z = f.z();
        assert_eq!(
            tangent_plane_test(&f, z, f.mul(z, f.from_int(2)), Elem::ONE),
            Err(GeomError::DependentTriple)
        );
    }

    #[test]
    fn polar_planes() {
        let f = field(5);
        let x = x_point();
        assert_eq!(polar_form(x).eval(&f, Elem::ONE), f.from_int(4));
        for p in all_points(&f) {
            assert_eq!(polar_form(p).contains(&f, p), !p.is_external(&f));
        }
        let plane_size = all_points(&f)
            .filter(|&p| polar_form(x).contains(&f, p))
            .count();
        assert_eq!(plane_size, 31);
    }

    #[test]
    fn cone_of_x() {
        for q in [5u64, 7, 9] {
            let f = field(q);
            let x = x_point();
            assert!(cone_contains(&f, x, x).unwrap());
            let external_on_cone = all_points(&f)
                .filter(|p| p.is_external(&f) && cone_contains(&f, x, *p).unwrap())
                .count() as u64;
            assert_eq!(external_on_cone, (q + 1) * (q - 1) + 1);
            // quadric points on the cone are those of X^⊥
            for p in all_points(&f).filter(|p| !p.is_external(&f)) {
                assert_eq!(
                    cone_contains(&f, x, p).unwrap(),
                    polar_form(x).contains(&f, p)
                );
            }
        }
    }

    #[test]
    fn cone_closed_form_agrees_with_discriminant() {
        let f = field(7);
        for p in all_points(&f).skip(1) {
            let general = line_discriminant(&f, Elem::ONE, p.rep()).is_zero();
            assert_eq!(cone_contains(&f, x_point(), p).unwrap(), general);
        }
    }

    #[test]
    fn cone_line_counts_match_prediction() {
        for q in [5u64, 7, 9] {
            let f = field(q);
            let mut rng = ChaCha8Rng::seed_from_u64(q);
            let mut tested = 0;
            let mut by_count = [0usize; 3];
            while tested < 1000 {
                let d = random_elem(&f, &mut rng);
                let e = random_elem(&f, &mut rng);
                let Ok(pts) = cone_line_intersections(&f, d, e) else {
                    continue;
                };
                let predicted = predicted_cone_line_count(&f, d, e);
                assert_eq!(pts.len(), predicted, "q={q} d={d:?} e={e:?}");
                by_count[predicted] += 1;
                tested += 1;
            }
            assert!(by_count.iter().all(|&c| c > 0), "q={q} {by_count:?}");
        }
    }
}
