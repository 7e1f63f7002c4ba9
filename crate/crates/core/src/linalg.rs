//! Small dense matrices over a [`Field`] and linear maps on packed rows.

use smallvec::SmallVec;

use crate::field::{Elem, Field};
use crate::space::Space;

/// Row-major dense matrix with inline storage for the small shapes used in
/// orbit labelling (at most a handful of rows over GF(q^l)).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: SmallVec<[Elem; 32]>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Dense {
        Dense { rows, cols, data: SmallVec::from_elem(0, rows * cols) }
    }

    pub fn identity(n: usize) -> Dense {
        let mut m = Dense::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Elem>]) -> Dense {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Dense::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, f: &Field, other: &Dense) -> Dense {
        assert_eq!(self.cols, other.rows);
        let mut out = Dense::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0;
                for t in 0..self.cols {
                    acc = f.add(acc, f.mul(self[(i, t)], other[(t, j)]));
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Matrix-vector product `self * x`.
    pub fn apply(&self, f: &Field, x: &[Elem]) -> SmallVec<[Elem; 8]> {
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(x).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }

    /// In-place row reduction; returns the pivot columns.
    pub fn row_reduce(&mut self, f: &Field) -> SmallVec<[usize; 8]> {
        let mut pivots = SmallVec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self[(i, c)] != 0) else { continue };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self[(r, c)]);
            for j in 0..self.cols {
                self[(r, j)] = f.mul(self[(r, j)], inv);
            }
            for i in 0..self.rows {
                if i != r && self[(i, c)] != 0 {
                    let k = f.neg(self[(i, c)]);
                    for j in 0..self.cols {
                        let v = f.add(self[(i, j)], f.mul(k, self[(r, j)]));
                        self[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &Field) -> usize {
        self.clone().row_reduce(f).len()
    }

    pub fn determinant_nonzero(&self, f: &Field) -> bool {
        self.rows == self.cols && self.rank(f) == self.rows
    }
}

impl std::ops::Index<(usize, usize)> for Dense {
    type Output = Elem;
    fn index(&self, (i, j): (usize, usize)) -> &Elem {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Dense {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Elem {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `sum_i coeff_i * vectors[i] = target` for independent `vectors`;
/// `None` when `target` is outside their span.
pub fn solve_combination(f: &Field, vectors: &[&[Elem]], target: &[Elem]) -> Option<SmallVec<[Elem; 8]>> {
    let n = vectors.len();
    let dim = target.len();
    // columns are the vectors, augmented by the target
    let mut m = Dense::zeros(dim, n + 1);
    for (j, v) in vectors.iter().enumerate() {
        for i in 0..dim {
            m[(i, j)] = v[i];
        }
    }
    for i in 0..dim {
        m[(i, n)] = target[i];
    }
    let pivots = m.row_reduce(f);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut out: SmallVec<[Elem; 8]> = SmallVec::from_elem(0, n);
    for (r, &c) in pivots.iter().enumerate() {
        out[c] = m[(r, n)];
    }
    Some(out)
}

/// A linear map between packed spaces, stored as the images of unit vectors.
#[derive(Clone, Debug)]
pub struct LinearMap {
    pub source: Space,
    pub target: Space,
    pub images: Vec<u64>,
}

impl LinearMap {
    pub fn new(source: Space, target: Space, images: Vec<u64>) -> LinearMap {
        assert_eq!(images.len(), source.dim());
        LinearMap { source, target, images }
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        if self.source.q() == 2 {
            let mut out = 0;
            let mut bits = x;
            let v = self.source.dim();
            while bits != 0 {
                let b = 63 - bits.leading_zeros() as usize;
                out ^= self.images[v - 1 - b];
                bits &= !(1u64 << b);
            }
            return out;
        }
        let mut out = 0;
        for (c, &img) in self.images.iter().enumerate() {
            let d = self.source.get(x, c);
            if d != 0 {
                out = self.target.axpy(out, d, img);
            }
        }
        out
    }

    pub fn compose(&self, after: &LinearMap) -> LinearMap {
        let images = self.images.iter().map(|&x| after.apply(x)).collect();
        LinearMap::new(self.source, after.target, images)
    }
}
