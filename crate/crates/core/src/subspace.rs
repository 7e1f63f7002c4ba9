//! Subspaces in canonical reduced row-echelon form, Gaussian binomials and
//! deterministic enumeration of Grassmannians.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::space::Space;

pub type Rows = SmallVec<[u64; 6]>;

/// A subspace of GF(q)^v stored by its reduced row-echelon basis. Because
/// the basis is canonical, derived equality, hashing and ordering are the
/// equality, hashing and lexicographic ordering of subspaces.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    q: u32,
    v: u8,
    rows: Rows,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let space = self.space();
        write!(f, "<")?;
        for (i, &r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            for d in space.unpack(r) {
                write!(f, "{d}")?;
            }
        }
        write!(f, ">")
    }
}

impl Subspace {
    /// Canonical subspace spanned by `rows`. Dependent or zero rows are fine.
    pub fn span(space: &Space, rows: &[u64]) -> Subspace {
        let mut r = rows.to_vec();
        space.rref(&mut r);
        Subspace { q: space.q(), v: space.dim() as u8, rows: Rows::from_vec(r) }
    }

    /// Wraps rows that are already in reduced row-echelon form.
    pub(crate) fn from_canonical(space: &Space, rows: Rows) -> Subspace {
        debug_assert!({
            let mut r = rows.to_vec();
            space.rref(&mut r);
            r.as_slice() == rows.as_slice()
        });
        Subspace { q: space.q(), v: space.dim() as u8, rows }
    }

    pub fn zero(space: &Space) -> Subspace {
        Subspace { q: space.q(), v: space.dim() as u8, rows: Rows::new() }
    }

    pub fn full(space: &Space) -> Subspace {
        let rows = (0..space.dim()).map(|c| space.unit(c)).collect();
        Subspace { q: space.q(), v: space.dim() as u8, rows }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn ambient_dim(&self) -> usize {
        self.v as usize
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn space(&self) -> Space {
        Space::new(self.q, self.v as usize).expect("subspace built from a valid space")
    }

    /// Pivot columns of the echelon basis.
    pub fn pivots(&self, space: &Space) -> Vec<usize> {
        self.rows.iter().map(|&r| space.leading(r).unwrap().0).collect()
    }

    /// Basis rows as coordinate lists (the serialization form).
    pub fn to_coords(&self) -> Vec<Vec<u32>> {
        let space = self.space();
        self.rows.iter().map(|&r| space.unpack(r)).collect()
    }

    /// Parses coordinate rows. In strict mode the rows must already be the
    /// canonical basis; otherwise they are re-canonicalized.
    pub fn from_coords(space: &Space, coords: &[Vec<u32>], strict: bool) -> Result<Subspace> {
        let rows = coords.iter().map(|c| space.pack(c)).collect::<Result<Vec<_>>>()?;
        let s = Subspace::span(space, &rows);
        if strict && s.rows.as_slice() != rows.as_slice() {
            return Err(Error::NotCanonical);
        }
        Ok(s)
    }

    pub fn contains_vector(&self, space: &Space, mut x: u64) -> bool {
        for &r in &self.rows {
            let (c, _) = space.leading(r).unwrap();
            let d = space.get(x, c);
            if d != 0 {
                x = space.axpy(x, space.field().neg(d), r);
            }
        }
        x == 0
    }

    pub fn contains(&self, space: &Space, other: &Subspace) -> bool {
        other.rows.iter().all(|&r| self.contains_vector(space, r))
    }

    pub fn sum(&self, space: &Space, other: &Subspace) -> Subspace {
        let rows: Vec<u64> = self.rows.iter().chain(other.rows.iter()).copied().collect();
        Subspace::span(space, &rows)
    }

    /// All nonzero vectors with leading coordinate 1, one per 1-subspace.
    pub fn points(&self, space: &Space) -> Vec<u64> {
        let d = self.dim();
        let q = space.q() as u64;
        let mut out = Vec::new();
        for lead in 0..d {
            // coefficient 1 on row `lead`, zero before, anything after
            let free = d - lead - 1;
            for n in 0..q.pow(free as u32) {
                let mut x = self.rows[lead];
                let mut m = n;
                for i in lead + 1..d {
                    x = space.axpy(x, (m % q) as Elem, self.rows[i]);
                    m /= q;
                }
                out.push(x);
            }
        }
        out
    }
}

fn check_same(space: &Space, s: &Subspace) -> Result<()> {
    if s.q != space.q() || s.ambient_dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: s.ambient_dim() });
    }
    Ok(())
}

/// Canonical form of the span of `basis`.
pub fn canonicalize(q: u32, v: Option<usize>, basis: &[Vec<u32>]) -> Result<Subspace> {
    let v = match (v, basis.first()) {
        (Some(v), _) => v,
        (None, Some(b)) => b.len(),
        (None, None) => {
            return Err(Error::InvalidParameters("empty basis with unspecified ambient dimension".into()))
        }
    };
    let space = Space::new(q, v)?;
    Subspace::from_coords(&space, basis, false)
}

/// `dim(A ∩ B) = dim A + dim B - dim(A + B)`.
pub fn intersection_dim(a: &Subspace, b: &Subspace) -> Result<usize> {
    let space = a.space();
    check_same(&space, b)?;
    Ok(a.dim() + b.dim() - a.sum(&space, b).dim())
}

/// Exact Gaussian binomial coefficient; zero when `k > v`.
pub fn gaussian_binomial(v: u64, k: u64, q: u64) -> BigUint {
    if k > v {
        return BigUint::zero();
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow((v - i) as u32) - 1u32;
        den *= q.pow((k - i) as u32) - 1u32;
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// Gaussian binomial as `u64`, panicking on overflow.
pub fn gaussian_binomial_u64(v: u64, k: u64, q: u64) -> u64 {
    let g = gaussian_binomial(v, k, q);
    u64::try_from(&g).expect("Gaussian binomial exceeds u64")
}

/// Enumerates the `d`-subspaces of a space by walking pivot-column sets in
/// lexicographic order and, for each, the free entries in odometer order
/// (last free entry varying fastest). The order is fixed and restartable.
pub struct SubspaceIter {
    space: Space,
    d: usize,
    pivots: Vec<usize>,
    free: Vec<(usize, usize)>,
    counter: Vec<u32>,
    done: bool,
}

impl SubspaceIter {
    pub fn new(space: Space, d: usize) -> SubspaceIter {
        let done = d > space.dim();
        let mut it = SubspaceIter {
            space,
            d,
            pivots: (0..d).collect(),
            free: Vec::new(),
            counter: Vec::new(),
            done,
        };
        if !done {
            it.reset_free();
        }
        it
    }

    fn reset_free(&mut self) {
        self.free.clear();
        for (i, &p) in self.pivots.iter().enumerate() {
            for c in p + 1..self.space.dim() {
                if !self.pivots.contains(&c) {
                    self.free.push((i, c));
                }
            }
        }
        self.counter = vec![0; self.free.len()];
    }

    fn next_pivots(&mut self) -> bool {
        let v = self.space.dim();
        let d = self.d;
        let mut i = d;
        while i > 0 {
            i -= 1;
            if self.pivots[i] < v - d + i {
                self.pivots[i] += 1;
                for j in i + 1..d {
                    self.pivots[j] = self.pivots[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }

    fn current(&self) -> Subspace {
        let mut rows: Rows = self.pivots.iter().map(|&p| self.space.unit(p)).collect();
        for (&(i, c), &val) in self.free.iter().zip(&self.counter) {
            if val != 0 {
                rows[i] = self.space.set(rows[i], c, val);
            }
        }
        Subspace::from_canonical(&self.space, rows)
    }

    fn advance(&mut self) {
        let q = self.space.q();
        for k in (0..self.counter.len()).rev() {
            self.counter[k] += 1;
            if self.counter[k] < q {
                return;
            }
            self.counter[k] = 0;
        }
        if self.next_pivots() {
            self.reset_free();
        } else {
            self.done = true;
        }
    }
}

impl Iterator for SubspaceIter {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        if self.done {
            return None;
        }
        let s = self.current();
        self.advance();
        Some(s)
    }
}

pub fn enumerate_subspaces(space: &Space, d: usize) -> SubspaceIter {
    SubspaceIter::new(*space, d)
}

/// Streams every `k`-subspace containing `u`, each exactly once.
///
/// Works in the quotient by `u`: the non-pivot columns of `u` carry a
/// complement, its `(k - dim u)`-subspaces are enumerated and lifted.
pub fn superspaces(space: &Space, u: &Subspace, k: usize) -> Result<impl Iterator<Item = Subspace>> {
    check_same(space, u)?;
    if k < u.dim() || k > space.dim() {
        return Err(Error::InvalidParameters(format!(
            "superspaces of a {}-subspace need {} <= k <= {}",
            u.dim(),
            u.dim(),
            space.dim()
        )));
    }
    let pivots = u.pivots(space);
    let free_cols: Vec<usize> = (0..space.dim()).filter(|c| !pivots.contains(c)).collect();
    let quotient = Space::new(space.q(), free_cols.len())?;
    let space = *space;
    let base: Vec<u64> = u.rows().to_vec();
    Ok(SubspaceIter::new(quotient, k - u.dim()).map(move |w| {
        let mut rows = base.clone();
        for &r in w.rows() {
            let mut lifted = 0u64;
            for (j, &c) in free_cols.iter().enumerate() {
                let d = quotient.get(r, j);
                if d != 0 {
                    lifted = space.set(lifted, c, d);
                }
            }
            rows.push(lifted);
        }
        Subspace::span(&space, &rows)
    }))
}

/// Basis of the `d`-subspaces of GF(q)^k as coefficient rows; used to list
/// the `d`-subspaces inside a block by combining its basis rows.
pub fn coefficient_patterns(q: u32, k: usize, d: usize) -> Result<Vec<Vec<Vec<Elem>>>> {
    let small = Space::new(q, k)?;
    Ok(enumerate_subspaces(&small, d)
        .map(|s| s.rows().iter().map(|&r| small.unpack(r)).collect())
        .collect())
}

/// All `d`-subspaces inside `block`, using precomputed coefficient patterns.
pub fn subspaces_within<'a>(
    space: &'a Space,
    block: &'a Subspace,
    patterns: &'a [Vec<Vec<Elem>>],
) -> impl Iterator<Item = Subspace> + 'a {
    patterns.iter().map(move |pat| {
        let rows: Vec<u64> = pat.iter().map(|c| space.combine(c, block.rows())).collect();
        Subspace::span(space, &rows)
    })
}
