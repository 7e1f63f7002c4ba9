//! Packed vectors of GF(q)^v.
//!
//! A vector is a single `u64`. Coordinate `c` occupies `bits` bits starting
//! at bit `(v - 1 - c) * bits`, so coordinate 0 is the most significant digit
//! and integer comparison of two rows is lexicographic comparison of their
//! coordinate sequences. Over GF(2) every kernel is plain word arithmetic.

use crate::error::{Error, Result};
use crate::field::{gf, Elem, Field};

/// The ambient space GF(q)^v together with its packing layout.
#[derive(Clone, Copy, Debug)]
pub struct Space {
    q: u32,
    v: usize,
    bits: u32,
    mask: u64,
    field: &'static Field,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.v == other.v
    }
}

impl Eq for Space {}

pub fn bits_for(q: u32) -> u32 {
    32 - (q - 1).leading_zeros()
}

impl Space {
    pub fn new(q: u32, v: usize) -> Result<Space> {
        let field = gf(q)?;
        let bits = bits_for(q);
        if v * bits as usize > 64 {
            return Err(Error::RowTooWide { q, dim: v });
        }
        Ok(Space { q, v, bits, mask: (1u64 << bits) - 1, field })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.v
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn field(&self) -> &'static Field {
        self.field
    }

    #[inline]
    fn shift(&self, c: usize) -> u32 {
        (self.v - 1 - c) as u32 * self.bits
    }

    #[inline]
    pub fn get(&self, row: u64, c: usize) -> Elem {
        ((row >> self.shift(c)) & self.mask) as Elem
    }

    #[inline]
    pub fn set(&self, row: u64, c: usize, d: Elem) -> u64 {
        let s = self.shift(c);
        (row & !(self.mask << s)) | ((d as u64) << s)
    }

    /// Unit vector `e_c`.
    #[inline]
    pub fn unit(&self, c: usize) -> u64 {
        1u64 << self.shift(c)
    }

    pub fn pack(&self, coords: &[u32]) -> Result<u64> {
        if coords.len() != self.v {
            return Err(Error::DimensionMismatch { expected: self.v, got: coords.len() });
        }
        let mut row = 0u64;
        for (c, &d) in coords.iter().enumerate() {
            if d >= self.q {
                return Err(Error::BadCoordinate { value: d, q: self.q });
            }
            row |= (d as u64) << self.shift(c);
        }
        Ok(row)
    }

    pub fn unpack(&self, row: u64) -> Vec<u32> {
        (0..self.v).map(|c| self.get(row, c)).collect()
    }

    /// Index of the first nonzero coordinate and its value.
    #[inline]
    pub fn leading(&self, row: u64) -> Option<(usize, Elem)> {
        if row == 0 {
            return None;
        }
        let top = 63 - row.leading_zeros();
        let digit = (top / self.bits) as usize;
        let c = self.v - 1 - digit;
        Some((c, self.get(row, c)))
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.q == 2 {
            return a ^ b;
        }
        let mut out = 0;
        for c in 0..self.v {
            let s = self.shift(c);
            let d = self.field.add(((a >> s) & self.mask) as Elem, ((b >> s) & self.mask) as Elem);
            out |= (d as u64) << s;
        }
        out
    }

    #[inline]
    pub fn scale(&self, a: u64, k: Elem) -> u64 {
        if k == 1 {
            return a;
        }
        if k == 0 {
            return 0;
        }
        let mut out = 0;
        for c in 0..self.v {
            let s = self.shift(c);
            let d = self.field.mul(((a >> s) & self.mask) as Elem, k);
            out |= (d as u64) << s;
        }
        out
    }

    /// `a + k * b`.
    #[inline]
    pub fn axpy(&self, a: u64, k: Elem, b: u64) -> u64 {
        if self.q == 2 {
            return if k == 0 { a } else { a ^ b };
        }
        if k == 0 {
            return a;
        }
        let mut out = 0;
        for c in 0..self.v {
            let s = self.shift(c);
            let d = self.field.add(
                ((a >> s) & self.mask) as Elem,
                self.field.mul(k, ((b >> s) & self.mask) as Elem),
            );
            out |= (d as u64) << s;
        }
        out
    }

    /// Scales a nonzero row so that its leading coordinate is 1.
    #[inline]
    pub fn normalize(&self, row: u64) -> u64 {
        match self.leading(row) {
            Some((_, d)) if d != 1 => self.scale(row, self.field.inv(d)),
            _ => row,
        }
    }

    /// Linear combination `sum coeffs[i] * rows[i]`.
    pub fn combine(&self, coeffs: &[Elem], rows: &[u64]) -> u64 {
        coeffs.iter().zip(rows).fold(0, |acc, (&k, &r)| self.axpy(acc, k, r))
    }

    /// Iterator over all q^v vectors, in increasing packed order.
    pub fn vectors(&self) -> impl Iterator<Item = u64> + '_ {
        let total = (self.q as u64).pow(self.v as u32);
        let space = *self;
        (0..total).map(move |mut n| {
            let mut row = 0u64;
            for c in (0..space.v).rev() {
                row |= (n % space.q as u64) << space.shift(c);
                n /= space.q as u64;
            }
            row
        })
    }

    /// Reduced row-echelon form of the given rows; zero rows are dropped.
    pub fn rref(&self, rows: &mut Vec<u64>) {
        let mut rank = 0;
        while rank < rows.len() {
            // pivot = row whose leading coordinate comes first
            let mut best = None;
            for (i, &r) in rows.iter().enumerate().skip(rank) {
                if r != 0 && best.is_none_or(|(_, b): (usize, u64)| r.leading_zeros() < b.leading_zeros()) {
                    best = Some((i, r));
                }
            }
            let Some((i, _)) = best else { break };
            rows.swap(rank, i);
            let pivot = self.normalize(rows[rank]);
            rows[rank] = pivot;
            let (col, _) = self.leading(pivot).unwrap();
            for j in 0..rows.len() {
                if j != rank {
                    let d = self.get(rows[j], col);
                    if d != 0 {
                        rows[j] = self.axpy(rows[j], self.field.neg(d), pivot);
                    }
                }
            }
            rank += 1;
        }
        rows.truncate(rank);
        rows.sort_unstable_by(|a, b| b.cmp(a));
    }

    pub fn rank(&self, rows: &[u64]) -> usize {
        let mut r = rows.to_vec();
        self.rref(&mut r);
        r.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_roundtrip_and_order() {
        let s = Space::new(3, 4).unwrap();
        let a = s.pack(&[0, 2, 1, 0]).unwrap();
        assert_eq!(s.unpack(a), vec![0, 2, 1, 0]);
        let b = s.pack(&[1, 0, 0, 0]).unwrap();
        assert!(a < b);
        assert_eq!(s.leading(a), Some((1, 2)));
        assert_eq!(s.unpack(s.normalize(a)), vec![0, 1, 2, 0]);
    }

    #[test]
    fn rref_gf3() {
        let s = Space::new(3, 3).unwrap();
        let mut rows = vec![s.pack(&[2, 1, 0]).unwrap(), s.pack(&[1, 2, 0]).unwrap(), s.pack(&[0, 0, 2]).unwrap()];
        s.rref(&mut rows);
        // (2,1,0) = 2*(1,2,0) so the first two are dependent
        assert_eq!(rows.len(), 2);
        assert_eq!(s.unpack(rows[0]), vec![1, 2, 0]);
        assert_eq!(s.unpack(rows[1]), vec![0, 0, 1]);
    }

    #[test]
    fn too_wide() {
        assert!(Space::new(2, 64).is_ok());
        assert!(matches!(Space::new(3, 33), Err(Error::RowTooWide { .. })));
    }
}
