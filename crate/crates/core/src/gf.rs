//! Arithmetic in small finite fields GF(p^e).
//!
//! Elements are reduced coefficient vectors over GF(p). Inside the crate an
//! element is carried as its integer code `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`
//! (an [`Elem`]), and all operations go through lookup tables built once per
//! field. The code is also the enumeration order and the JSON encoding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer code of a field element, see the module docs.
pub type Elem = u8;

/// Largest field order accepted unless the caller raises the cap.
pub const DEFAULT_MAX_Q: usize = 16;

/// Hard ceiling imposed by the one-byte element encoding.
pub const ABSOLUTE_MAX_Q: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("modulus {0:?} is reducible over GF({1})")]
    ReducibleModulus(Vec<u32>, u32),
    #[error("modulus {0:?} is not a monic polynomial of degree {1} with coefficients in [0,{2})")]
    InvalidModulus(Vec<u32>, u32, u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {q} exceeds the cap {cap}")]
    FieldTooLarge { q: u64, cap: usize },
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("GF({0}) has odd extension degree and no involutory automorphism")]
    NoConjugation(usize),
    #[error("coefficient list {0:?} is not an element of this field")]
    BadElement(Vec<u32>),
}

/// Configuration-level description of a field.
///
/// `modulus` lists the `e+1` little-endian coefficients of a monic
/// irreducible polynomial. It may be omitted when `e = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    #[serde(default = "one")]
    pub e: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modulus: Vec<u32>,
}

fn one() -> u32 {
    1
}

impl FieldSpec {
    pub fn prime(p: u32) -> Self {
        FieldSpec { p, e: 1, modulus: Vec::new() }
    }

    pub fn extension(p: u32, e: u32, modulus: &[u32]) -> Self {
        FieldSpec { p, e, modulus: modulus.to_vec() }
    }
}

/// Identifies a field for mismatch detection: (p, e, modulus code).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct FieldKey {
    p: u8,
    e: u8,
    modulus: u32,
}

/// A field element tagged with the field it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    key: FieldKey,
    code: Elem,
}

impl FieldElement {
    pub fn code(self) -> Elem {
        self.code
    }
}

/// A finite field with precomputed operation tables.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    key: FieldKey,
    p: usize,
    e: usize,
    q: usize,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
    frob: Vec<Elem>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Field {}

/// Trial-division primality test.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Polynomials over GF(p) as little-endian coefficient vectors.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let b = poly_trim(b.to_vec());
    let mut r = poly_trim(a.to_vec());
    let lead = *b.last().expect("nonzero divisor");
    let lead_inv = (1..p).find(|x| x * lead % p == 1).expect("unit leading coefficient");
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let factor = r[r.len() - 1] * lead_inv % p;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - factor * bi % p) % p;
        }
        r = poly_trim(r);
    }
    r
}

/// Brute-force irreducibility: no monic factor of degree `1..=deg/2`.
pub fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let deg = modulus.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for code in 0..count {
            let mut divisor = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                divisor.push((c % p as u64) as u32);
                c /= p as u64;
            }
            divisor.push(1);
            if poly_rem(modulus, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Builds a field with the default order cap.
pub fn build_field(spec: &FieldSpec) -> Result<Field, FieldError> {
    Field::new(spec, DEFAULT_MAX_Q)
}

impl Field {
    pub fn new(spec: &FieldSpec, max_q: usize) -> Result<Field, FieldError> {
        let (p, e) = (spec.p, spec.e);
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if e == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let q = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
        let cap = max_q.min(ABSOLUTE_MAX_Q);
        if q > cap as u64 {
            return Err(FieldError::FieldTooLarge { q, cap });
        }
        let modulus: Vec<u32> = if e == 1 {
            vec![0, 1]
        } else {
            let m = &spec.modulus;
            if m.len() != e as usize + 1 || m[e as usize] != 1 || m.iter().any(|&c| c >= p) {
                return Err(FieldError::InvalidModulus(m.clone(), e, p));
            }
            if !is_irreducible(m, p) {
                return Err(FieldError::ReducibleModulus(m.clone(), p));
            }
            m.clone()
        };
        let (p, e, q) = (p as usize, e as usize, q as usize);
        let decode = |code: usize| -> Vec<usize> {
            let mut c = code;
            (0..e)
                .map(|_| {
                    let d = c % p;
                    c /= p;
                    d
                })
                .collect()
        };
        let encode = |coeffs: &[usize]| -> usize { coeffs.iter().rev().fold(0, |acc, &c| acc * p + c) };

        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            let ca = decode(a);
            for b in 0..q {
                let cb = decode(b);
                let sum: Vec<usize> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = encode(&sum) as Elem;

                let mut prod = vec![0usize; 2 * e - 1];
                for (i, x) in ca.iter().enumerate() {
                    for (j, y) in cb.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                // reduce by the monic modulus from the top down
                for deg in (e..prod.len()).rev() {
                    let c = prod[deg];
                    if c != 0 {
                        for (i, &mi) in modulus.iter().enumerate().take(e) {
                            let idx = deg - e + i;
                            prod[idx] = (prod[idx] + p * p - c * mi as usize % p) % p;
                        }
                        prod[deg] = 0;
                    }
                }
                mul[a * q + b] = encode(&prod[..e]) as Elem;
            }
        }
        let neg: Vec<Elem> = (0..q)
            .map(|a| (0..q).find(|&b| add[a * q + b] == 0).unwrap() as Elem)
            .collect();

        let pow = |mut base: usize, mut exp: usize| -> usize {
            let mut acc = 1usize;
            while exp > 0 {
                if exp & 1 == 1 {
                    acc = mul[acc * q + base] as usize;
                }
                base = mul[base * q + base] as usize;
                exp >>= 1;
            }
            acc
        };
        let inv: Vec<Elem> = (0..q)
            .map(|a| if a == 0 { 0 } else { pow(a, q - 2) as Elem })
            .collect();
        let frob: Vec<Elem> = (0..q).map(|a| pow(a, p) as Elem).collect();

        let key = FieldKey {
            p: p as u8,
            e: e as u8,
            modulus: modulus.iter().rev().fold(0u32, |acc, &c| acc * p as u32 + c),
        };
        Ok(Field {
            spec: FieldSpec { p: p as u32, e: e as u32, modulus: if e == 1 { Vec::new() } else { modulus } },
            key,
            p,
            e,
            q,
            add,
            mul,
            neg,
            inv,
            frob,
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.e
    }

    pub fn order(&self) -> usize {
        self.q
    }

    /// All element codes in enumeration order `0, 1, ..., q-1`.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.q).map(|c| c as Elem)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> {
        (1..self.q).map(|c| c as Elem)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    /// Multiplicative inverse; zero maps to zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a as usize]
    }

    /// `a^(p^power)`.
    pub fn frobenius(&self, a: Elem, power: usize) -> Elem {
        (0..power % self.e).fold(a, |x, _| self.frob[x as usize])
    }

    /// The involution `a -> a^sqrt(q)`; only defined for even degree.
    pub fn conj(&self, a: Elem) -> Result<Elem, FieldError> {
        if self.e % 2 != 0 {
            return Err(FieldError::NoConjugation(self.q));
        }
        Ok(self.frobenius(a, self.e / 2))
    }

    pub fn pow(&self, a: Elem, exp: usize) -> Elem {
        (0..exp).fold(1, |acc, _| self.mul(acc, a))
    }

    /// Square root in characteristic 2 (`a^(q/2)`), the inverse of squaring.
    pub fn sqrt_char2(&self, a: Elem) -> Elem {
        debug_assert_eq!(self.p, 2);
        self.frobenius(a, self.e - 1)
    }

    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        let mut c = a as usize;
        (0..self.e)
            .map(|_| {
                let d = c % self.p;
                c /= self.p;
                d as u32
            })
            .collect()
    }

    /// Tags a code as an element of this field.
    pub fn element(&self, code: Elem) -> Result<FieldElement, FieldError> {
        if (code as usize) < self.q {
            Ok(FieldElement { key: self.key, code })
        } else {
            Err(FieldError::BadElement(vec![code as u32]))
        }
    }

    pub fn element_from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        if coeffs.len() > self.e || coeffs.iter().any(|&c| c as usize >= self.p) {
            return Err(FieldError::BadElement(coeffs.to_vec()));
        }
        let code = coeffs.iter().rev().fold(0usize, |acc, &c| acc * self.p + c as usize);
        Ok(FieldElement { key: self.key, code: code as Elem })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { key: self.key, code: 0 }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { key: self.key, code: 1 }
    }

    fn check(&self, a: FieldElement) -> Result<Elem, FieldError> {
        if a.key == self.key {
            Ok(a.code)
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn f_add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let c = self.add(self.check(a)?, self.check(b)?);
        Ok(FieldElement { key: self.key, code: c })
    }

    pub fn f_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let c = self.mul(self.check(a)?, self.check(b)?);
        Ok(FieldElement { key: self.key, code: c })
    }

    pub fn f_inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        match self.check(a)? {
            0 => Err(FieldError::DivisionByZero),
            c => Ok(FieldElement { key: self.key, code: self.inv(c) }),
        }
    }

    pub fn f_conj(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        let c = self.conj(self.check(a)?)?;
        Ok(FieldElement { key: self.key, code: c })
    }

    /// Short human-readable name, e.g. `GF(4)`.
    pub fn name(&self) -> String {
        format!("GF({})", self.q)
    }
}
