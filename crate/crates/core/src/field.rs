//! Finite fields GF(p^e) in polynomial-basis encoding.
//!
//! An element is a `u32` whose base-`p` digits are the coefficients of its
//! residue polynomial: digit `i` is the coefficient of `x^i`. The prime
//! subfield is therefore `0..p` in every extension.
//!
//! The defining polynomial is the least monic irreducible of the requested
//! degree, where polynomials are ordered by the integer encoding of their
//! non-leading coefficients. The designated primitive element is the least
//! element of full multiplicative order. Fields up to 2^20 elements carry
//! log/antilog tables; fields up to 256 elements additionally carry full
//! addition and multiplication tables for the packed-row kernels.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

pub type Elem = u32;

const LOG_TABLE_LIMIT: u64 = 1 << 20;
const SMALL_TABLE_LIMIT: u64 = 256;
const MAX_ORDER: u64 = 1 << 32;

#[derive(Debug)]
struct LogTables {
    exp: Vec<Elem>,
    log: Vec<u32>,
}

#[derive(Debug)]
struct SmallTables {
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

#[derive(Debug)]
pub struct Field {
    p: u32,
    degree: u32,
    order: u32,
    modulus: Vec<u32>,
    primitive: Elem,
    logs: Option<LogTables>,
    small: Option<SmallTables>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits `q = p^e`, or returns `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let f = prime_factors(q);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut e = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        e += 1;
    }
    Some((p as u32, e))
}

/// Cached table-backed field of order `q`. Used for the coefficient fields of
/// every vector space in the crate, so lookups must stay cheap.
pub fn gf(q: u32) -> Result<&'static Field> {
    static CACHE: OnceLock<RwLock<HashMap<u32, &'static Field>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(f) = cache.read().unwrap().get(&q) {
        return Ok(f);
    }
    let (p, e) = prime_power(q as u64).ok_or(Error::NotPrimePower(q as u64))?;
    if q as u64 > LOG_TABLE_LIMIT {
        return Err(Error::FieldTooLarge(q as u128));
    }
    let mut w = cache.write().unwrap();
    if let Some(f) = w.get(&q) {
        return Ok(f);
    }
    let field: &'static Field = Box::leak(Box::new(Field::new(p, e)?));
    w.insert(q, field);
    Ok(field)
}

// ---- polynomial helpers over GF(p), coefficients low to high ----

fn poly_trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Remainder of `a` modulo the monic polynomial `m`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        for (i, &c) in m.iter().enumerate() {
            let sub = (lead as u64 * c as u64 % p as u64) as u32;
            r[i + shift] = (r[i + shift] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    out.into_iter().map(|c| c as u32).collect()
}

fn digits(mut n: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((n % p as u64) as u32);
        n /= p as u64;
    }
    out
}

fn undigits(d: &[u32], p: u32) -> u64 {
    d.iter().rev().fold(0u64, |acc, &c| acc * p as u64 + c as u64)
}

/// Irreducibility by trial division with every monic polynomial of degree
/// at most half the degree of `f`.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for n in 0..count {
            let mut g = digits(n, p, d);
            g.push(1);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Builds GF(p^degree).
    pub fn new(p: u32, degree: u32) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if degree == 0 {
            return Err(Error::ZeroDegree);
        }
        let order = (p as u128).pow(degree);
        if order >= MAX_ORDER as u128 {
            return Err(Error::FieldTooLarge(order));
        }
        let order = order as u32;
        let modulus = (0..order as u64)
            .map(|n| {
                let mut f = digits(n, p, degree as usize);
                f.push(1);
                f
            })
            .find(|f| is_irreducible(f, p))
            .expect("an irreducible polynomial exists in every degree");

        let mut field = Field { p, degree, order, modulus, primitive: 1, logs: None, small: None };
        let group = (order - 1) as u64;
        let factors = prime_factors(group);
        field.primitive = (1..order)
            .find(|&a| factors.iter().all(|&f| field.pow(a, group / f) != 1))
            .expect("the multiplicative group is cyclic");

        if order as u64 <= LOG_TABLE_LIMIT {
            let n = (order - 1) as usize;
            let mut exp = vec![0; 2 * n.max(1)];
            let mut log = vec![0; order as usize];
            let mut x: Elem = 1;
            for i in 0..n {
                exp[i] = x;
                exp[i + n] = x;
                log[x as usize] = i as u32;
                x = field.mul_slow(x, field.primitive);
            }
            field.logs = Some(LogTables { exp, log });
        }
        if order as u64 <= SMALL_TABLE_LIMIT {
            let q = order as usize;
            let mut add = vec![0u8; q * q];
            let mut mul = vec![0u8; q * q];
            let mut neg = vec![0u8; q];
            let mut inv = vec![0u8; q];
            for a in 0..q {
                for b in 0..q {
                    add[a * q + b] = field.add_slow(a as u32, b as u32) as u8;
                    mul[a * q + b] = field.mul(a as u32, b as u32) as u8;
                }
                neg[a] = field.sub_slow(0, a as u32) as u8;
                if a != 0 {
                    inv[a] = field.inv(a as u32) as u8;
                }
            }
            field.small = Some(SmallTables { add, mul, neg, inv });
        }
        Ok(field)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Monic defining polynomial, coefficients from `x^0` up to `x^degree`.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn primitive(&self) -> Elem {
        self.primitive
    }

    pub fn has_tables(&self) -> bool {
        self.logs.is_some()
    }

    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        digits(a as u64, self.p, self.degree as usize)
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Elem {
        let r = poly_rem(c, &self.modulus, self.p);
        undigits(&r, self.p) as Elem
    }

    fn add_slow(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return a ^ b;
        }
        let p = self.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    fn sub_slow(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return a ^ b;
        }
        let p = self.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.degree {
            out += ((a % p + p - b % p) % p) * place;
            a /= p;
            b /= p;
            place = place.wrapping_mul(p);
        }
        out
    }

    fn mul_slow(&self, a: Elem, b: Elem) -> Elem {
        if self.degree == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as Elem;
        }
        let prod = poly_mul(&self.coeffs(a), &self.coeffs(b), self.p);
        undigits(&poly_rem(&prod, &self.modulus, self.p), self.p) as Elem
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return a ^ b;
        }
        if let Some(t) = &self.small {
            return t.add[(a * self.order + b) as usize] as Elem;
        }
        self.add_slow(a, b)
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        if let Some(t) = &self.small {
            return t.neg[a as usize] as Elem;
        }
        self.sub_slow(0, a)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        if let Some(t) = &self.small {
            return t.mul[(a * self.order + b) as usize] as Elem;
        }
        if let Some(t) = &self.logs {
            return t.exp[(t.log[a as usize] + t.log[b as usize]) as usize];
        }
        self.mul_slow(a, b)
    }

    /// Multiplicative inverse. Panics on zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        assert!(a != 0, "inverse of zero");
        if let Some(t) = &self.small {
            return t.inv[a as usize] as Elem;
        }
        if let Some(t) = &self.logs {
            let n = self.order - 1;
            return t.exp[((n - t.log[a as usize]) % n) as usize];
        }
        self.pow(a, self.order as u64 - 2)
    }

    pub fn div(&self, a: Elem, b: Elem) -> Elem {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        if let Some(t) = &self.logs {
            if a == 0 {
                return if e == 0 { 1 } else { 0 };
            }
            let n = (self.order - 1) as u64;
            return t.exp[((t.log[a as usize] as u64 * (e % n)) % n) as usize];
        }
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        acc
    }

    /// Discrete logarithm to the designated primitive element.
    pub fn log(&self, a: Elem) -> Option<u32> {
        if a == 0 {
            return None;
        }
        match &self.logs {
            Some(t) => Some(t.log[a as usize]),
            None => {
                let mut x = 1;
                for i in 0..self.order - 1 {
                    if x == a {
                        return Some(i);
                    }
                    x = self.mul_slow(x, self.primitive);
                }
                None
            }
        }
    }

    /// `primitive^i`.
    pub fn exp(&self, i: u64) -> Elem {
        self.pow(self.primitive, i)
    }

    /// Multiplicative order, via the prime factorisation of `order - 1`.
    pub fn multiplicative_order(&self, a: Elem) -> u64 {
        assert!(a != 0, "zero has no multiplicative order");
        let mut n = (self.order - 1) as u64;
        for f in prime_factors(n) {
            while n % f == 0 && self.pow(a, n / f) == 1 {
                n /= f;
            }
        }
        n
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order
    }
}
