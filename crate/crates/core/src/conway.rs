//! Defining polynomials for F_{p^n}.
//!
//! A bundled table holds Conway polynomials for every extension F_{q^4} with
//! q <= 53, so primitive-element exponents agree with other computer algebra
//! systems. Other degrees fall back to the least primitive polynomial found by
//! exhaustive search.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

const BUNDLED: &str = include_str!("../data/conway.txt");

/// Environment variable naming a replacement for the bundled polynomial table.
pub const CONWAY_FILE_ENV: &str = "BRUEN_CONWAY_FILE";

#[derive(Debug, Error)]
pub enum ConwayError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Conway polynomials keyed by `(p, degree)`, coefficients constant term first.
#[derive(Clone, Debug, Default)]
pub struct ConwayTable {
    entries: BTreeMap<(u64, usize), Vec<u64>>,
}

impl ConwayTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled Conway table is well formed")
    }

    /// The table named by `BRUEN_CONWAY_FILE` if set, else the bundled one.
    pub fn from_env() -> Result<Self, ConwayError> {
        match std::env::var_os(CONWAY_FILE_ENV) {
            Some(path) => Self::from_file(Path::new(&path)),
            None => Ok(Self::bundled()),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ConwayError> {
        let text = fs::read_to_string(path).map_err(|source| ConwayError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses records of the form `p n c0 c1 ... cn`.
    pub fn parse(text: &str) -> Result<Self, ConwayError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |msg: &str| ConwayError::Malformed {
                line: i + 1,
                msg: msg.to_string(),
            };
            let nums: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|_| malformed("non-integer field"))?;
            if nums.len() < 3 {
                return Err(malformed("expected `p n c0 ... cn`"));
            }
            let (p, n) = (nums[0], nums[1] as usize);
            let coeffs = nums[2..].to_vec();
            if coeffs.len() != n + 1 {
                return Err(malformed("coefficient count does not match degree"));
            }
            if coeffs[n] != 1 {
                return Err(malformed("polynomial is not monic"));
            }
            if coeffs.iter().any(|&c| c >= p) {
                return Err(malformed("coefficient not reduced mod p"));
            }
            entries.insert((p, n), coeffs);
        }
        Ok(Self { entries })
    }

    pub fn get(&self, p: u64, degree: usize) -> Option<&[u64]> {
        self.entries.get(&(p, degree)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, usize, &[u64])> {
        self.entries.iter().map(|(&(p, n), c)| (p, n, c.as_slice()))
    }
}

/// Multiplies two residues modulo the monic polynomial `modulus` over F_p.
fn mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * n - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for k in (n..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..n {
            prod[k - n + i] = (prod[k - n + i] + (p - c) * modulus[i]) % p;
        }
    }
    prod.truncate(n);
    prod
}

fn x_pow_mod(mut e: u64, modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut result = vec![0u64; n];
    result[0] = 1;
    let mut base = vec![0u64; n];
    if n == 1 {
        base[0] = (p - modulus[0]) % p;
    } else {
        base[1] = 1;
    }
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(&result, &base, modulus, p);
        }
        base = mulmod(&base, &base, modulus, p);
        e >>= 1;
    }
    result
}

pub(crate) fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// True when the monic `coeffs` (constant first) is primitive over F_p, i.e.
/// the class of x has multiplicative order p^n - 1 modulo it.
pub fn is_primitive(p: u64, coeffs: &[u64]) -> bool {
    let n = coeffs.len() - 1;
    if n == 0 || coeffs[n] != 1 || coeffs[0] == 0 {
        return false;
    }
    let order = p.pow(n as u32) - 1;
    let one = {
        let mut v = vec![0u64; n];
        v[0] = 1;
        v
    };
    if x_pow_mod(order, coeffs, p) != one {
        return false;
    }
    prime_factors(order)
        .into_iter()
        .all(|r| x_pow_mod(order / r, coeffs, p) != one)
}

/// Least primitive monic polynomial of degree `n` over F_p, ordering candidates
/// by the base-p number whose most significant digit is c_{n-1}.
pub fn least_primitive(p: u64, n: usize) -> Vec<u64> {
    let span = p.pow(n as u32);
    for t in 0..span {
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut rest = t;
        for _ in 0..n {
            coeffs.push(rest % p);
            rest /= p;
        }
        coeffs.push(1);
        if is_primitive(p, &coeffs) {
            return coeffs;
        }
    }
    unreachable!("every finite field has a primitive element")
}
