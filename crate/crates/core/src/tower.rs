//! The tower GF(q) ⊂ GF(q^l) ⊂ GF(q^{ml}) and the coordinate identification
//! of GF(q)^{ml} with GF(q^l)^m.
//!
//! GF(q^l) is coordinatised over GF(q) by the power basis `1, w, …, w^{l-1}`
//! of its designated primitive element `w`, so the first basis element is 1.
//! A vector `(c_1, …, c_m)` of GF(q^l)^m flattens to the GF(q)-vector whose
//! block `j` (coordinates `j*l .. j*l + l`) holds the coordinates of `c_j`.

use std::sync::OnceLock;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::{gf, is_prime, Elem, Field};
use crate::linalg::{Dense, LinearMap};
use crate::space::Space;
use crate::subspace::Subspace;

pub type MidVec = SmallVec<[Elem; 8]>;

/// Which level of the tower an element belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Base,
    Middle,
    Top,
}

#[derive(Debug)]
pub struct FieldTower {
    p: u32,
    s: u32,
    l: usize,
    m: usize,
    base: &'static Field,
    middle: &'static Field,
    top: OnceLock<std::result::Result<Field, String>>,
    embed: Vec<Elem>,
    power_basis: Vec<Elem>,
    chunk_of: Vec<u64>,
    elem_of_chunk: Vec<Elem>,
    chunk_space: Space,
    flat: Space,
}

pub fn build_tower(p: u32, q_exponent: u32, l: usize, m: usize) -> Result<FieldTower> {
    FieldTower::new(p, q_exponent, l, m)
}

impl FieldTower {
    pub fn new(p: u32, q_exponent: u32, l: usize, m: usize) -> Result<FieldTower> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if q_exponent == 0 || l == 0 || m == 0 {
            return Err(Error::ZeroDegree);
        }
        let q = (p as u64).pow(q_exponent);
        let ql = (q as u128).pow(l as u32);
        if ql > 1 << 20 {
            return Err(Error::FieldTooLarge(ql));
        }
        let base = gf(q as u32)?;
        let middle = gf(ql as u32)?;
        let chunk_space = Space::new(q as u32, l)?;
        let flat = Space::new(q as u32, l * m)?;

        // embed GF(q) via the least root of its defining polynomial
        let embed: Vec<Elem> = if q_exponent == 1 {
            (0..q as u32).collect()
        } else {
            let f = base.modulus();
            let root = middle
                .elements()
                .find(|&x| {
                    f.iter().rev().fold(0, |acc, &c| middle.add(middle.mul(acc, x), c)) == 0
                })
                .expect("GF(q^l) contains a root of every irreducible of degree dividing its degree");
            base.elements()
                .map(|a| {
                    base.coeffs(a)
                        .iter()
                        .rev()
                        .fold(0, |acc, &c| middle.add(middle.mul(acc, root), c))
                })
                .collect()
        };

        let w = middle.primitive();
        let power_basis: Vec<Elem> = (0..l).map(|i| middle.pow(w, i as u64)).collect();
        let mut chunk_of = vec![0u64; ql as usize];
        let mut elem_of_chunk = vec![Elem::MAX; 1usize << (l as u32 * chunk_space.bits())];
        for chunk in chunk_space.vectors() {
            let mut x = 0;
            for (i, &b) in power_basis.iter().enumerate() {
                let c = chunk_space.get(chunk, i);
                x = middle.add(x, middle.mul(embed[c as usize], b));
            }
            chunk_of[x as usize] = chunk;
            elem_of_chunk[chunk as usize] = x;
        }
        debug_assert!(elem_of_chunk.iter().filter(|&&e| e != Elem::MAX).count() == ql as usize);

        Ok(FieldTower {
            p,
            s: q_exponent,
            l,
            m,
            base,
            middle,
            top: OnceLock::new(),
            embed,
            power_basis,
            chunk_of,
            elem_of_chunk,
            chunk_space,
            flat,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q_exponent(&self) -> u32 {
        self.s
    }

    pub fn q(&self) -> u32 {
        self.base.order()
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn base(&self) -> &'static Field {
        self.base
    }

    pub fn middle(&self) -> &'static Field {
        self.middle
    }

    /// GF(q^{ml}); built on first use since it only serves as a coordinate
    /// space elsewhere.
    pub fn top(&self) -> Result<&Field> {
        let r = self.top.get_or_init(|| {
            Field::new(self.p, self.s * (self.m * self.l) as u32).map_err(|e| e.to_string())
        });
        r.as_ref().map_err(|e| Error::InvalidParameters(e.clone()))
    }

    pub fn field(&self, level: Level) -> Result<&Field> {
        match level {
            Level::Base => Ok(self.base),
            Level::Middle => Ok(self.middle),
            Level::Top => self.top(),
        }
    }

    /// The basis `x_1 = 1, x_2 = w, …, x_l = w^{l-1}` of GF(q^l) over GF(q).
    pub fn power_basis(&self) -> &[Elem] {
        &self.power_basis
    }

    pub fn embed_base(&self, a: Elem) -> Elem {
        self.embed[a as usize]
    }

    /// GF(q)^l, the coordinate space of GF(q^l).
    pub fn chunk_space(&self) -> &Space {
        &self.chunk_space
    }

    /// GF(q)^{ml}.
    pub fn flat_space(&self) -> &Space {
        &self.flat
    }

    /// Coordinates of a GF(q^l) element as a packed vector of GF(q)^l.
    #[inline]
    pub fn coords(&self, x: Elem) -> u64 {
        self.chunk_of[x as usize]
    }

    /// Element of GF(q^l) with the given packed coordinates.
    #[inline]
    pub fn from_coords(&self, chunk: u64) -> Elem {
        self.elem_of_chunk[chunk as usize]
    }

    #[inline]
    fn chunk_shift(&self, j: usize) -> u32 {
        ((self.m - 1 - j) * self.l) as u32 * self.chunk_space.bits()
    }

    #[inline]
    pub fn flatten(&self, v: &[Elem]) -> u64 {
        debug_assert_eq!(v.len(), self.m);
        v.iter()
            .enumerate()
            .fold(0u64, |acc, (j, &x)| acc | (self.chunk_of[x as usize] << self.chunk_shift(j)))
    }

    #[inline]
    pub fn unflatten(&self, row: u64) -> MidVec {
        let mask = if self.l as u32 * self.chunk_space.bits() == 64 {
            u64::MAX
        } else {
            (1u64 << (self.l as u32 * self.chunk_space.bits())) - 1
        };
        (0..self.m)
            .map(|j| self.elem_of_chunk[((row >> self.chunk_shift(j)) & mask) as usize])
            .collect()
    }

    pub fn try_flatten(&self, v: &[Elem]) -> Result<u64> {
        if v.len() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: v.len() });
        }
        if let Some(&bad) = v.iter().find(|&&x| x >= self.middle.order()) {
            return Err(Error::BadCoordinate { value: bad, q: self.middle.order() });
        }
        Ok(self.flatten(v))
    }

    /// The vector `x * Y_j` for `x` in GF(q^l).
    pub fn along(&self, j: usize, x: Elem) -> u64 {
        self.chunk_of[x as usize] << self.chunk_shift(j)
    }

    /// GF(q^l)-dimension of the GF(q^l)-span of `w`.
    pub fn span_dim_over_middle(&self, w: &Subspace) -> Result<usize> {
        if w.ambient_dim() != self.flat.dim() || w.q() != self.q() {
            return Err(Error::DimensionMismatch { expected: self.flat.dim(), got: w.ambient_dim() });
        }
        let mut canon: Vec<u64> = w.rows().to_vec();
        self.flat.rref(&mut canon);
        if canon.as_slice() != w.rows() {
            return Err(Error::NotCanonical);
        }
        Ok(self.middle_rank(w.rows()))
    }

    /// GF(q^l)-rank of the unflattened rows.
    pub fn middle_rank(&self, rows: &[u64]) -> usize {
        let mut m = Dense::zeros(rows.len(), self.m);
        for (i, &r) in rows.iter().enumerate() {
            for (j, x) in self.unflatten(r).into_iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m.row_reduce(self.middle).len()
    }

    /// The GF(q)-linear map of GF(q)^{ml} induced by an m×m matrix over
    /// GF(q^l) acting on coordinate columns.
    pub fn induced_map(&self, g: &Dense) -> LinearMap {
        assert_eq!((g.rows, g.cols), (self.m, self.m));
        let images = (0..self.flat.dim())
            .map(|c| {
                let (j, i) = (c / self.l, c % self.l);
                let mut v: MidVec = SmallVec::from_elem(0, self.m);
                v[j] = self.power_basis[i];
                self.flatten(&g.apply(self.middle, &v))
            })
            .collect();
        LinearMap::new(self.flat, self.flat, images)
    }

    /// Multiplication by `s` in GF(q^l) as a map of GF(q)^l.
    pub fn multiplication_map(&self, s: Elem) -> LinearMap {
        let images = self
            .power_basis
            .iter()
            .map(|&b| self.chunk_of[self.middle.mul(s, b) as usize])
            .collect();
        LinearMap::new(self.chunk_space, self.chunk_space, images)
    }
}
