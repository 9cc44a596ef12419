//! Arithmetic in F_{q^4} and its subfield F_q.
//!
//! Every element is stored as its discrete logarithm with respect to a fixed
//! primitive element `z` (a root of the defining polynomial), with a sentinel
//! for zero. Products are index additions; sums go through a Zech logarithm
//! table. F_q is the subgroup generated by `z^N`, N = (q^4 - 1)/(q - 1), plus
//! zero, so base-field values share the same representation.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::conway::{self, ConwayTable};

/// Default upper bound on table memory.
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;

/// Largest q built without the large-field override.
pub const MAX_DEFAULT_Q: u64 = 53;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not an odd prime power")]
    NotOddPrimePower(u64),
    #[error("q = {0} is below the smallest supported order 5")]
    TooSmall(u64),
    #[error("field for q = {q} is too large: {reason}")]
    FieldTooLarge { q: u64, reason: String },
    #[error("element is not in the base field F_q")]
    NotInBaseField,
    #[error("element is not a square in F_q")]
    NotASquare,
    #[error("defining polynomial {0:?} is not primitive")]
    NotPrimitive(Vec<u64>),
    #[error("no Conway polynomial for p = {p}, degree {degree}; a non-Conway field must be allowed explicitly")]
    NoConwayPolynomial { p: u64, degree: usize },
}

/// An element of F_{q^4} in discrete-log form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(u32::MAX);
    pub const ONE: Elem = Elem(0);

    /// `z^k`; `k` must already be reduced below q^4 - 1.
    #[inline]
    pub const fn from_log(k: u32) -> Elem {
        Elem(k)
    }

    #[inline]
    pub fn log(self) -> Option<u32> {
        (self.0 != u32::MAX).then_some(self.0)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == u32::MAX
    }

    #[inline]
    pub(crate) fn raw(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.log() {
            Some(k) => write!(f, "z^{k}"),
            None => write!(f, "0"),
        }
    }
}

/// Class of an element of F_q under squaring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SquareClass {
    Zero,
    Square,
    Nonsquare,
}

#[derive(Clone, Debug)]
pub struct FieldOptions {
    pub memory_budget: u64,
    /// Permit q above [`MAX_DEFAULT_Q`].
    pub allow_large: bool,
    /// Fall back to the least primitive polynomial when no Conway
    /// polynomial is known.
    pub allow_non_conway: bool,
    pub conway: ConwayTable,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self {
            memory_budget: DEFAULT_MEMORY_BUDGET,
            allow_large: false,
            allow_non_conway: false,
            conway: ConwayTable::bundled(),
        }
    }
}

/// Immutable arithmetic context for F_{q^4} over F_q.
pub struct FieldCtx {
    p: u64,
    e: u32,
    q: u64,
    modulus: Vec<u64>,
    conway: bool,
    /// q^4 - 1
    order: u32,
    /// (q^4 - 1)/(q - 1); z^base_step generates F_q^*.
    base_step: u32,
    exp_table: Vec<u32>,
    log_table: Vec<u32>,
    zech: Vec<u32>,
    trace: Vec<Elem>,
    /// Trace-dual basis of {1, z, z^2, z^3}.
    dual: [Elem; 4],
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("q", &self.q)
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .field("conway", &self.conway)
            .finish()
    }
}

/// Splits `q` into `(p, e)` with `q = p^e`, `p` an odd prime.
pub fn odd_prime_power(q: u64) -> Result<(u64, u32), FieldError> {
    if q < 3 || q % 2 == 0 {
        return Err(FieldError::NotOddPrimePower(q));
    }
    let factors = conway::prime_factors(q);
    if factors.len() != 1 {
        return Err(FieldError::NotOddPrimePower(q));
    }
    let p = factors[0];
    let mut e = 0;
    let mut rest = q;
    while rest > 1 {
        rest /= p;
        e += 1;
    }
    Ok((p, e))
}

/// Bytes of lookup tables needed for F_{q^4}.
pub fn table_bytes(q: u64) -> u64 {
    16 * q.saturating_pow(4)
}

/// Builds the arithmetic context for F_{q^4}.
pub fn make_field(q: u64, opts: &FieldOptions) -> Result<FieldCtx, FieldError> {
    let (p, e) = odd_prime_power(q)?;
    if q < 5 {
        return Err(FieldError::TooSmall(q));
    }
    if q > MAX_DEFAULT_Q && !opts.allow_large {
        return Err(FieldError::FieldTooLarge {
            q,
            reason: format!("q > {MAX_DEFAULT_Q} requires the large-field override"),
        });
    }
    let needed = table_bytes(q);
    if needed > opts.memory_budget {
        return Err(FieldError::FieldTooLarge {
            q,
            reason: format!(
                "tables need {needed} bytes, budget is {}",
                opts.memory_budget
            ),
        });
    }
    if q.pow(4) >= 1 << 31 {
        return Err(FieldError::FieldTooLarge {
            q,
            reason: "q^4 exceeds the 31-bit index range".into(),
        });
    }
    let degree = 4 * e as usize;
    let (modulus, conway) = match opts.conway.get(p, degree) {
        Some(c) => (c.to_vec(), true),
        None if opts.allow_non_conway => (conway::least_primitive(p, degree), false),
        None => return Err(FieldError::NoConwayPolynomial { p, degree }),
    };
    FieldCtx::with_modulus(p, e, modulus, conway)
}

impl FieldCtx {
    /// Builds tables for an explicit degree-4e defining polynomial, which must
    /// be primitive.
    pub fn with_modulus(
        p: u64,
        e: u32,
        modulus: Vec<u64>,
        conway: bool,
    ) -> Result<FieldCtx, FieldError> {
        let q = p.pow(e);
        let n = 4 * e as usize;
        assert_eq!(modulus.len(), n + 1, "modulus must have degree 4e");
        let size = q.pow(4);
        let order = (size - 1) as u32;
        let base_step = ((size - 1) / (q - 1)) as u32;

        let mut exp_table = vec![0u32; order as usize];
        let mut log_table = vec![u32::MAX; size as usize];
        let mut digits = vec![0u64; n];
        digits[0] = 1;
        for k in 0..order {
            let packed = pack(&digits, p);
            if k > 0 && packed == 1 {
                return Err(FieldError::NotPrimitive(modulus));
            }
            exp_table[k as usize] = packed;
            log_table[packed as usize] = k;
            // multiply by x and reduce
            let top = digits[n - 1];
            for i in (1..n).rev() {
                digits[i] = digits[i - 1];
            }
            digits[0] = 0;
            if top != 0 {
                for i in 0..n {
                    digits[i] = (digits[i] + (p - top) * modulus[i]) % p;
                }
            }
        }

        let zech: Vec<u32> = exp_table
            .par_iter()
            .map(|&packed| {
                let c0 = packed as u64 % p;
                let bumped = packed as u64 - c0 + (c0 + 1) % p;
                if bumped == 0 {
                    u32::MAX
                } else {
                    log_table[bumped as usize]
                }
            })
            .collect();

        let mut ctx = FieldCtx {
            p,
            e,
            q,
            modulus,
            conway,
            order,
            base_step,
            exp_table,
            log_table,
            zech,
            trace: Vec::new(),
            dual: [Elem::ZERO; 4],
        };
        let trace: Vec<Elem> = (0..order)
            .into_par_iter()
            .map(|k| ctx.trace_by_conjugates(Elem(k)))
            .collect();
        ctx.trace = trace;
        ctx.dual = ctx.compute_dual_basis();
        Ok(ctx)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// Defining polynomial of F_{q^4} over F_p, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn is_conway(&self) -> bool {
        self.conway
    }

    /// q^4 - 1, the order of the multiplicative group.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// (q^4 - 1)/(q - 1), which is also the number of points of PG(3,q).
    pub fn base_step(&self) -> u32 {
        self.base_step
    }

    /// Packed base-p coefficient vector of `z^k`.
    pub fn exp_table(&self) -> &[u32] {
        &self.exp_table
    }

    /// Inverse of [`exp_table`](Self::exp_table); `u32::MAX` at index 0.
    pub fn log_table(&self) -> &[u32] {
        &self.log_table
    }

    #[inline]
    pub fn z(&self) -> Elem {
        Elem(1)
    }

    #[inline]
    pub fn minus_one(&self) -> Elem {
        Elem(self.order / 2)
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        let s = a.0 + b.0;
        Elem(if s >= self.order { s - self.order } else { s })
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        a.log()
            .map(|k| Elem(if k == 0 { 0 } else { self.order - k }))
    }

    /// `a / b`. Panics when `b` is zero.
    #[inline]
    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        assert!(!b.is_zero(), "division by zero in F_q^4");
        if a.is_zero() {
            return Elem::ZERO;
        }
        Elem(if a.0 >= b.0 {
            a.0 - b.0
        } else {
            a.0 + self.order - b.0
        })
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let d = if b.0 >= a.0 {
            b.0 - a.0
        } else {
            b.0 + self.order - a.0
        };
        let z = self.zech[d as usize];
        if z == u32::MAX {
            return Elem::ZERO;
        }
        let s = a.0 + z;
        Elem(if s >= self.order { s - self.order } else { s })
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.mul(a, self.minus_one())
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn square(&self, a: Elem) -> Elem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: Elem, k: u64) -> Elem {
        match a.log() {
            None if k == 0 => Elem::ONE,
            None => Elem::ZERO,
            Some(l) => Elem(((l as u64 * (k % self.order as u64)) % self.order as u64) as u32),
        }
    }

    /// `a^(q^j)`.
    pub fn frobenius(&self, a: Elem, j: u32) -> Elem {
        self.pow(a, self.q.pow(j % 4))
    }

    /// The integer `n` in the prime field.
    pub fn from_int(&self, n: i64) -> Elem {
        let r = n.rem_euclid(self.p as i64) as usize;
        if r == 0 {
            Elem::ZERO
        } else {
            Elem(self.log_table[r])
        }
    }

    /// The integer value of a prime-field element, if it is one.
    pub fn to_int(&self, a: Elem) -> Option<u64> {
        match a.log() {
            None => Some(0),
            Some(k) => {
                let packed = self.exp_table[k as usize] as u64;
                (packed < self.p).then_some(packed)
            }
        }
    }

    /// Coefficients over F_p of the polynomial representing `a`, constant first.
    pub fn poly_coeffs(&self, a: Elem) -> Vec<u64> {
        let n = 4 * self.e as usize;
        let mut packed = a.log().map_or(0, |k| self.exp_table[k as usize] as u64);
        (0..n)
            .map(|_| {
                let c = packed % self.p;
                packed /= self.p;
                c
            })
            .collect()
    }

    pub fn from_poly_coeffs(&self, coeffs: &[u64]) -> Elem {
        let mut packed = 0u64;
        for &c in coeffs.iter().rev() {
            packed = packed * self.p + c % self.p;
        }
        if packed == 0 {
            Elem::ZERO
        } else {
            Elem(self.log_table[packed as usize])
        }
    }

    fn trace_by_conjugates(&self, a: Elem) -> Elem {
        let mut acc = a;
        let mut conj = a;
        for _ in 1..4 {
            conj = self.pow(conj, self.q);
            acc = self.add(acc, conj);
        }
        acc
    }

    /// Relative trace to F_q: `a + a^q + a^(q^2) + a^(q^3)`.
    #[inline]
    pub fn trace(&self, a: Elem) -> Elem {
        match a.log() {
            None => Elem::ZERO,
            Some(k) => self.trace[k as usize],
        }
    }

    #[inline]
    pub fn is_base(&self, a: Elem) -> bool {
        a.log().map_or(true, |k| k % self.base_step == 0)
    }

    /// Square class of `s` in F_q; assumes `s` lies in F_q.
    #[inline]
    pub fn base_class(&self, s: Elem) -> SquareClass {
        match s.log() {
            None => SquareClass::Zero,
            Some(k) => {
                debug_assert_eq!(k % self.base_step, 0);
                if (k / self.base_step) % 2 == 0 {
                    SquareClass::Square
                } else {
                    SquareClass::Nonsquare
                }
            }
        }
    }

    pub fn square_class(&self, s: Elem) -> Result<SquareClass, FieldError> {
        if !self.is_base(s) {
            return Err(FieldError::NotInBaseField);
        }
        Ok(self.base_class(s))
    }

    #[inline]
    pub fn is_nonzero_square(&self, s: Elem) -> bool {
        self.base_class(s) == SquareClass::Square
    }

    #[inline]
    pub fn is_nonsquare(&self, s: Elem) -> bool {
        self.base_class(s) == SquareClass::Nonsquare
    }

    /// Canonical square root in F_q: `z^(log(s)/2)`, or zero.
    pub fn sqrt_base(&self, s: Elem) -> Result<Elem, FieldError> {
        match self.square_class(s)? {
            SquareClass::Zero => Ok(Elem::ZERO),
            SquareClass::Square => Ok(Elem(s.0 / 2)),
            SquareClass::Nonsquare => Err(FieldError::NotASquare),
        }
    }

    /// All elements of F_q: zero, then `z^(kN)` for k = 0..q-2.
    pub fn base_elements(&self) -> impl Iterator<Item = Elem> + '_ {
        std::iter::once(Elem::ZERO)
            .chain((0..self.q as u32 - 1).map(move |k| Elem(k * self.base_step)))
    }

    /// Nonzero elements of F_q.
    pub fn base_units(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.q as u32 - 1).map(move |k| Elem(k * self.base_step))
    }

    /// Coordinates over F_q with respect to {1, z, z^2, z^3}.
    pub fn coords(&self, a: Elem) -> [Elem; 4] {
        [
            self.trace(self.mul(self.dual[0], a)),
            self.trace(self.mul(self.dual[1], a)),
            self.trace(self.mul(self.dual[2], a)),
            self.trace(self.mul(self.dual[3], a)),
        ]
    }

    pub fn from_coords(&self, c: [Elem; 4]) -> Elem {
        let mut acc = Elem::ZERO;
        for (i, &ci) in c.iter().enumerate() {
            acc = self.add(acc, self.mul(ci, Elem(i as u32)));
        }
        acc
    }

    fn compute_dual_basis(&self) -> [Elem; 4] {
        let mut gram = [[Elem::ZERO; 4]; 4];
        for (i, row) in gram.iter_mut().enumerate() {
            for (j, g) in row.iter_mut().enumerate() {
                *g = self.trace(Elem((i + j) as u32));
            }
        }
        let inv = self
            .invert4(gram)
            .expect("{1, z, z^2, z^3} is a basis when z is primitive");
        let mut dual = [Elem::ZERO; 4];
        for (i, d) in dual.iter_mut().enumerate() {
            *d = self.from_coords(inv[i]);
        }
        dual
    }

    /// Inverse of a 4x4 matrix over F_q, if it is invertible.
    pub fn invert4(&self, m: [[Elem; 4]; 4]) -> Option<[[Elem; 4]; 4]> {
        let mut a = m;
        let mut inv = [[Elem::ZERO; 4]; 4];
        for (i, row) in inv.iter_mut().enumerate() {
            row[i] = Elem::ONE;
        }
        for col in 0..4 {
            let pivot = (col..4).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let scale = self.inv(a[col][col])?;
            for j in 0..4 {
                a[col][j] = self.mul(a[col][j], scale);
                inv[col][j] = self.mul(inv[col][j], scale);
            }
            for r in 0..4 {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let f = a[r][col];
                for j in 0..4 {
                    a[r][j] = self.sub(a[r][j], self.mul(f, a[col][j]));
                    inv[r][j] = self.sub(inv[r][j], self.mul(f, inv[col][j]));
                }
            }
        }
        Some(inv)
    }

    /// Reduced row echelon form of a list of F_q 4-vectors; returns the pivot
    /// columns. Rows past the rank become zero.
    pub fn row_reduce(&self, rows: &mut [[Elem; 4]]) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..4 {
            if r == rows.len() {
                break;
            }
            let Some(piv) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
                continue;
            };
            rows.swap(r, piv);
            let scale = self.inv(rows[r][col]).expect("pivot is nonzero");
            for j in 0..4 {
                rows[r][j] = self.mul(rows[r][j], scale);
            }
            for i in 0..rows.len() {
                if i == r || rows[i][col].is_zero() {
                    continue;
                }
                let f = rows[i][col];
                for j in 0..4 {
                    rows[i][j] = self.sub(rows[i][j], self.mul(f, rows[r][j]));
                }
            }
            pivots.push(col);
            r += 1;
        }
        pivots
    }

    /// Rank over F_q of the coordinate vectors of `elems`.
    pub fn rank(&self, elems: &[Elem]) -> usize {
        let mut rows: Vec<[Elem; 4]> = elems.iter().map(|&x| self.coords(x)).collect();
        self.row_reduce(&mut rows).len()
    }

    /// Basis of the common kernel of the given linear functionals on F_q^4.
    pub fn kernel(&self, functionals: &[[Elem; 4]]) -> Vec<[Elem; 4]> {
        let mut rows = functionals.to_vec();
        let pivots = self.row_reduce(&mut rows);
        let free: Vec<usize> = (0..4).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = [Elem::ZERO; 4];
                v[f] = Elem::ONE;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = self.neg(rows[r][f]);
                }
                v
            })
            .collect()
    }
}

fn pack(digits: &[u64], p: u64) -> u32 {
    let mut v = 0u64;
    for &d in digits.iter().rev() {
        v = v * p + d;
    }
    v as u32
}
