//! GL(m, q^l) acting on subspaces of GF(q)^{ml} through the flattening map.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;

use crate::error::{Error, Result};
use crate::field::Elem;
use crate::linalg::{Dense, LinearMap};
use crate::subspace::Subspace;
use crate::tower::FieldTower;

/// |GL(m, Q)| = prod_{i<m} (Q^m - Q^i).
pub fn gl_order(m: u32, big_q: u64) -> BigUint {
    let q = BigUint::from(big_q);
    let qm = q.pow(m);
    (0..m).fold(BigUint::one(), |acc, i| acc * (&qm - q.pow(i)))
}

/// Largest group order for which brute-force stabilizers are attempted.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// A matrix of GL(m, q^l) together with its induced GF(q)-linear map.
#[derive(Clone, Debug)]
pub struct GlElement {
    pub matrix: Dense,
    pub map: LinearMap,
}

impl GlElement {
    pub fn new(tower: &FieldTower, matrix: Dense) -> Result<GlElement> {
        if matrix.rows != tower.m() || matrix.cols != tower.m() {
            return Err(Error::DimensionMismatch { expected: tower.m(), got: matrix.rows });
        }
        if !matrix.determinant_nonzero(tower.middle()) {
            return Err(Error::InvalidParameters("matrix is singular".into()));
        }
        let map = tower.induced_map(&matrix);
        Ok(GlElement { matrix, map })
    }

    pub fn apply(&self, w: &Subspace) -> Subspace {
        let rows: Vec<u64> = w.rows().iter().map(|&r| self.map.apply(r)).collect();
        Subspace::span(&self.map.target, &rows)
    }
}

/// Generators of GL(m, q^l): diag(w, 1, …), I + E_12, the transposition of
/// the first two coordinates and the m-cycle.
pub fn generators(tower: &FieldTower) -> Vec<GlElement> {
    let m = tower.m();
    let w = tower.middle().primitive();
    let mut out = Vec::new();
    let mut d = Dense::identity(m);
    d[(0, 0)] = w;
    out.push(d);
    if m > 1 {
        let mut e = Dense::identity(m);
        e[(0, 1)] = 1;
        out.push(e);
        let mut t = Dense::zeros(m, m);
        t[(0, 1)] = 1;
        t[(1, 0)] = 1;
        for i in 2..m {
            t[(i, i)] = 1;
        }
        out.push(t);
        if m > 2 {
            let mut c = Dense::zeros(m, m);
            for i in 0..m {
                c[((i + 1) % m, i)] = 1;
            }
            out.push(c);
        }
    }
    out.into_iter().map(|g| GlElement::new(tower, g).expect("generators are invertible")).collect()
}

/// The G-orbit of `w`, by breadth-first closure under the generators.
pub fn orbit(tower: &FieldTower, w: &Subspace) -> Vec<Subspace> {
    let gens = generators(tower);
    let mut seen: HashSet<Subspace> = HashSet::new();
    seen.insert(w.clone());
    let mut out = vec![w.clone()];
    let mut head = 0;
    while head < out.len() {
        let cur = out[head].clone();
        head += 1;
        for g in &gens {
            let img = g.apply(&cur);
            if !seen.contains(&img) {
                seen.insert(img.clone());
                out.push(img);
            }
        }
    }
    out
}

/// A uniformly random element of GL(m, q^l) by rejection sampling.
pub fn random_element<R: Rng>(tower: &FieldTower, rng: &mut R) -> GlElement {
    let m = tower.m();
    let order = tower.middle().order();
    loop {
        let mut g = Dense::zeros(m, m);
        for x in g.data.iter_mut() {
            *x = rng.gen_range(0..order);
        }
        if let Ok(e) = GlElement::new(tower, g) {
            return e;
        }
    }
}

/// Visits every invertible m×m matrix over GF(q^l).
pub fn for_each_element(tower: &FieldTower, mut f: impl FnMut(&Dense)) -> Result<()> {
    let m = tower.m();
    let order = gl_order(m as u32, tower.middle().order() as u64);
    if order > BigUint::from(BRUTE_FORCE_LIMIT) {
        return Err(Error::BudgetExceeded { budget: BRUTE_FORCE_LIMIT, needed: order.to_u128().unwrap_or(u128::MAX) });
    }
    let qq = tower.middle().order() as u64;
    let total = qq.pow((m * m) as u32);
    let mut g = Dense::zeros(m, m);
    for mut n in 0..total {
        for x in g.data.iter_mut() {
            *x = (n % qq) as Elem;
            n /= qq;
        }
        if g.determinant_nonzero(tower.middle()) {
            f(&g);
        }
    }
    Ok(())
}

/// |{g in GL(m, q^l) : g(W) = W}| by exhaustive search.
pub fn brute_force_stabilizer(tower: &FieldTower, w: &Subspace) -> Result<u64> {
    let space = *tower.flat_space();
    let basis: Vec<_> = w.rows().iter().map(|&r| tower.unflatten(r)).collect();
    let mut count = 0u64;
    for_each_element(tower, |g| {
        let fixed = basis
            .iter()
            .all(|b| w.contains_vector(&space, tower.flatten(&g.apply(tower.middle(), b))));
        if fixed {
            count += 1;
        }
    })?;
    Ok(count)
}
