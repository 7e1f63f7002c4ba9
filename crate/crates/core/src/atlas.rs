//! G = GL(m, q^l) orbits on subspaces of V = GF(q)^{ml}: the classes
//! Ω_i^j, orbit labels through the Singer correspondence, the
//! representatives T(u_1, …, u_r) and stabilizer orders.

use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::field::{prime_power, Elem};
use crate::gl::gl_order;
use crate::linalg::Dense;
use crate::singer::{orbit_table, OrbitTable};
use crate::space::Space;
use crate::subspace::Subspace;
use crate::tower::{FieldTower, MidVec};

/// (GF(q)-dimension, dimension of the GF(q^l)-span).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OmegaClass {
    pub i: usize,
    pub j: usize,
}

/// Identifies a G-orbit. `rep` is always the canonical H-orbit
/// representative of the associated subspace of GF(q)^l.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrbitLabel {
    /// Class (k, 1): W'·(a GF(q^l)-line), labelled by the H-orbit of W'.
    Line { dim: usize, u: u32, rep: Subspace },
    /// Class (k, k-1): labelled by the H-orbit of ⟨1, u_1, …, u_r⟩.
    Tight { dim: usize, r: usize, u: u32, rep: Subspace },
    /// Class (k, k): a single orbit.
    Full { dim: usize },
}

impl OrbitLabel {
    pub fn dim(&self) -> usize {
        match *self {
            OrbitLabel::Line { dim, .. } | OrbitLabel::Tight { dim, .. } | OrbitLabel::Full { dim } => dim,
        }
    }

    pub fn class(&self) -> OmegaClass {
        match *self {
            OrbitLabel::Line { dim, .. } => OmegaClass { i: dim, j: 1 },
            OrbitLabel::Tight { dim, .. } => OmegaClass { i: dim, j: dim - 1 },
            OrbitLabel::Full { dim } => OmegaClass { i: dim, j: dim },
        }
    }

    pub fn stabilizer_u(&self) -> Option<u32> {
        match *self {
            OrbitLabel::Line { u, .. } | OrbitLabel::Tight { u, .. } => Some(u),
            OrbitLabel::Full { .. } => None,
        }
    }

    /// Short text form, e.g. `T3,r2,u3<100,010,001>`.
    pub fn short(&self) -> String {
        match self {
            OrbitLabel::Line { dim, u, rep } => format!("L{dim},u{u}{rep:?}"),
            OrbitLabel::Tight { dim, r, u, rep } => format!("T{dim},r{r},u{u}{rep:?}"),
            OrbitLabel::Full { dim } => format!("F{dim}"),
        }
    }
}

/// T(u_1, …, u_r) = ⟨Y_1, …, Y_{k-1}, u_1 Y_1 + … + u_r Y_r⟩.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TRepresentative {
    pub k: usize,
    pub r: usize,
    pub elements: Vec<Elem>,
    pub subspace: Subspace,
}

fn q_pow(q: u32, e: u64) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

fn exact_div(a: BigUint, b: &BigUint) -> BigUint {
    let (d, r) = a.div_rem(b);
    assert!(r.is_zero(), "inexact division {a} / {b}");
    d
}

/// Closed-form stabilizer order of T(u_1, …, u_r) whose associated subspace
/// has stabilizer GF(q^u)* under H.
pub fn stabilizer_order_t(k: usize, r: usize, u: u32, m: usize, l: usize, q: u32) -> Result<BigUint> {
    check_tight(k, r, m, l)?;
    if u == 0 || (r + 1).gcd(&l) % u as usize != 0 {
        return Err(Error::InvalidParameters(format!("u = {u} must divide gcd(r+1, l) = {}", (r + 1).gcd(&l))));
    }
    let qk = q_pow(q, k as u64);
    let qml = q_pow(q, (m * l) as u64);
    let mut s = q_pow(q, u as u64) - 1u32;
    for i in r + 1..k {
        s *= &qk - q_pow(q, i as u64);
    }
    for i in k - 1..m {
        s *= &qml - q_pow(q, (i * l) as u64);
    }
    Ok(s)
}

pub fn orbit_size_t(k: usize, r: usize, u: u32, m: usize, l: usize, q: u32) -> Result<BigUint> {
    let stab = stabilizer_order_t(k, r, u, m, l, q)?;
    Ok(exact_div(gl_order(m as u32, (q as u64).pow(l as u32)), &stab))
}

/// Stabilizer of ⟨Y_1, …, Y_k⟩: |GL(k,q)| · q^{lk(m-k)} · |GL(m-k, q^l)|.
pub fn stabilizer_order_full(k: usize, m: usize, l: usize, q: u32) -> Result<BigUint> {
    if k > m {
        return Err(Error::InvalidParameters(format!("class ({k},{k}) needs k <= m = {m}")));
    }
    Ok(gl_order(k as u32, q as u64)
        * q_pow(q, (l * k * (m - k)) as u64)
        * gl_order((m - k) as u32, (q as u64).pow(l as u32)))
}

fn check_tight(k: usize, r: usize, m: usize, l: usize) -> Result<()> {
    if k < 3 || k > m + 1 || r == 0 || r >= k || r + 1 > l {
        return Err(Error::InvalidParameters(format!(
            "no class ({k},{}) representative with r = {r} for m = {m}, l = {l}",
            k.saturating_sub(1)
        )));
    }
    Ok(())
}

/// The orbit atlas for fixed (m, l, q).
#[derive(Debug)]
pub struct Atlas {
    tower: FieldTower,
    tables: Vec<OnceLock<Arc<OrbitTable>>>,
}

/// Outcome of eliminating the unflattened basis of W over GF(q^l).
enum Reduction {
    Independent,
    /// Coefficients of the first dependent row over the chosen z_i.
    Dependent { alpha: MidVec },
}

impl Atlas {
    pub fn new(m: usize, l: usize, q: u32) -> Result<Atlas> {
        let (p, s) = prime_power(q as u64).ok_or(Error::NotPrimePower(q as u64))?;
        let tower = FieldTower::new(p, s, l, m)?;
        Ok(Atlas { tower, tables: (0..=l).map(|_| OnceLock::new()).collect() })
    }

    pub fn from_tower(tower: FieldTower) -> Atlas {
        let l = tower.l();
        Atlas { tower, tables: (0..=l).map(|_| OnceLock::new()).collect() }
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn m(&self) -> usize {
        self.tower.m()
    }

    pub fn l(&self) -> usize {
        self.tower.l()
    }

    pub fn q(&self) -> u32 {
        self.tower.q()
    }

    pub fn space(&self) -> &Space {
        self.tower.flat_space()
    }

    /// H-orbit table on d-subspaces of GF(q)^l.
    pub fn table(&self, d: usize) -> Result<&OrbitTable> {
        if d > self.l() {
            return Err(Error::InvalidParameters(format!("d = {d} exceeds l = {}", self.l())));
        }
        if self.tables[d].get().is_none() {
            let t = orbit_table(self.q(), self.l(), d)?;
            let _ = self.tables[d].set(t);
        }
        Ok(self.tables[d].get().unwrap())
    }

    fn check(&self, w: &Subspace) -> Result<()> {
        if w.q() != self.q() || w.ambient_dim() != self.space().dim() {
            return Err(Error::DimensionMismatch { expected: self.space().dim(), got: w.ambient_dim() });
        }
        Ok(())
    }

    pub fn classify(&self, w: &Subspace) -> Result<OmegaClass> {
        self.check(w)?;
        Ok(OmegaClass { i: w.dim(), j: self.tower.middle_rank(w.rows()) })
    }

    /// Greedy elimination over GF(q^l), tracking how each reduced row is
    /// written in terms of the chosen original rows.
    fn reduce(&self, rows: &[MidVec]) -> (usize, Reduction) {
        let f = self.tower.middle();
        let m = self.m();
        let mut reduced: SmallVec<[(usize, MidVec, MidVec); 8]> = SmallVec::new();
        let mut chosen: SmallVec<[usize; 8]> = SmallVec::new();
        let mut first_dependent = None;
        for (idx, row) in rows.iter().enumerate() {
            let mut x = row.clone();
            let mut coeff: MidVec = SmallVec::from_elem(0, rows.len());
            for (pivot, rrow, rcoeff) in &reduced {
                let c = x[*pivot];
                if c != 0 {
                    let k = f.neg(c);
                    for j in 0..m {
                        x[j] = f.add(x[j], f.mul(k, rrow[j]));
                    }
                    for j in 0..rows.len() {
                        coeff[j] = f.add(coeff[j], f.mul(k, rcoeff[j]));
                    }
                }
            }
            match x.iter().position(|&e| e != 0) {
                Some(p) => {
                    // row_idx + coeff expresses x; normalize the pivot to 1
                    coeff[idx] = f.add(coeff[idx], 1);
                    let inv = f.inv(x[p]);
                    for e in x.iter_mut() {
                        *e = f.mul(*e, inv);
                    }
                    for e in coeff.iter_mut() {
                        *e = f.mul(*e, inv);
                    }
                    reduced.push((p, x, coeff));
                    chosen.push(idx);
                }
                None => {
                    if first_dependent.is_none() {
                        // row = -coeff . rows
                        let alpha: MidVec = coeff.iter().map(|&c| f.neg(c)).collect();
                        first_dependent = Some((idx, alpha));
                    }
                }
            }
        }
        let rank = reduced.len();
        match first_dependent {
            None => (rank, Reduction::Independent),
            Some((_, alpha)) => {
                let alpha = chosen.iter().map(|&c| alpha[c]).collect();
                (rank, Reduction::Dependent { alpha })
            }
        }
    }

    /// The G-orbit label of `w`.
    pub fn orbit_label(&self, w: &Subspace) -> Result<OrbitLabel> {
        self.check(w)?;
        let k = w.dim();
        if k == 0 {
            return Err(Error::Unclassified { i: 0, j: 0 });
        }
        let t = &self.tower;
        let f = t.middle();
        let rows: SmallVec<[MidVec; 8]> = w.rows().iter().map(|&r| t.unflatten(r)).collect();
        let (j, red) = self.reduce(&rows);
        if j == 1 {
            // every row is c * z with z the first row
            let z = &rows[0];
            let p = z.iter().position(|&e| e != 0).unwrap();
            let zinv = f.inv(z[p]);
            let chunks: SmallVec<[u64; 8]> = rows.iter().map(|r| t.coords(f.mul(r[p], zinv))).collect();
            let s = Subspace::span(t.chunk_space(), &chunks);
            let o = self.table(k)?.orbit_of(&s).expect("orbit table covers every subspace");
            return Ok(OrbitLabel::Line { dim: k, u: o.u, rep: o.rep.clone() });
        }
        if j == k {
            return Ok(OrbitLabel::Full { dim: k });
        }
        if j + 1 == k {
            let Reduction::Dependent { alpha, .. } = red else { unreachable!("rank k-1 leaves a dependent row") };
            let mut chunks: SmallVec<[u64; 8]> = SmallVec::new();
            chunks.push(t.coords(1));
            chunks.extend(alpha.iter().map(|&a| t.coords(a)));
            let s = Subspace::span(t.chunk_space(), &chunks);
            let r = s.dim() - 1;
            let o = self.table(s.dim())?.orbit_of(&s).expect("orbit table covers every subspace");
            return Ok(OrbitLabel::Tight { dim: k, r, u: o.u, rep: o.rep.clone() });
        }
        Err(Error::Unclassified { i: k, j })
    }

    pub fn t_representative(&self, k: usize, r: usize, elements: &[Elem]) -> Result<TRepresentative> {
        if !(3..=(self.m() + 1).min(self.l())).contains(&k) || r == 0 || r >= k {
            return Err(Error::InvalidParameters(format!(
                "T(u) needs 3 <= k <= min(m+1, l) and 1 <= r <= k-1; got k = {k}, r = {r}"
            )));
        }
        self.t_subspace(k, r, elements)
    }

    fn t_subspace(&self, k: usize, r: usize, elements: &[Elem]) -> Result<TRepresentative> {
        if elements.len() != r {
            return Err(Error::DimensionMismatch { expected: r, got: elements.len() });
        }
        let t = &self.tower;
        if let Some(&bad) = elements.iter().find(|&&e| e >= t.middle().order()) {
            return Err(Error::BadCoordinate { value: bad, q: t.middle().order() });
        }
        let mut chunks = vec![t.coords(1)];
        chunks.extend(elements.iter().map(|&e| t.coords(e)));
        if t.chunk_space().rank(&chunks) != r + 1 {
            return Err(Error::Precondition("1, u_1, ..., u_r must be linearly independent over GF(q)".into()));
        }
        let mut rows: Vec<u64> = (0..k - 1).map(|j| t.along(j, 1)).collect();
        let mut v: MidVec = SmallVec::from_elem(0, self.m());
        v[..r].copy_from_slice(elements);
        rows.push(t.flatten(&v));
        let subspace = Subspace::span(self.space(), &rows);
        let class = self.classify(&subspace)?;
        assert_eq!((class.i, class.j), (k, k - 1), "T(u) must lie in the (k, k-1) class");
        Ok(TRepresentative { k, r, elements: elements.to_vec(), subspace })
    }

    /// Rescales an H-orbit representative by the least scalar that makes
    /// it contain 1, and reads off u_1, …, u_r from its echelon rows.
    pub fn normalized_elements(&self, rep: &Subspace) -> Vec<Elem> {
        let t = &self.tower;
        let f = t.middle();
        let cs = t.chunk_space();
        let s = rep
            .points(cs)
            .into_iter()
            .flat_map(|p| (1..cs.q()).map(move |c| t.from_coords(cs.scale(p, c))))
            .map(|x| f.inv(x))
            .min()
            .expect("nonzero subspace");
        let rows: Vec<u64> = rep.rows().iter().map(|&r| t.coords(f.mul(s, t.from_coords(r)))).collect();
        let scaled = Subspace::span(cs, &rows);
        let mut basis = vec![t.coords(1)];
        let mut out = Vec::new();
        for &r in scaled.rows() {
            basis.push(r);
            if cs.rank(&basis) == basis.len() {
                out.push(t.from_coords(r));
            } else {
                basis.pop();
            }
        }
        debug_assert_eq!(out.len() + 1, rep.dim());
        out
    }

    /// One T(u) per G-orbit on the (k, k-1) class with parameter r, in
    /// (u, representative) order of the associated H-orbits.
    pub fn f_k_r_reps(&self, k: usize, r: usize) -> Result<Vec<(OrbitLabel, TRepresentative)>> {
        check_tight(k, r, self.m(), self.l())?;
        let table = self.table(r + 1)?;
        table
            .orbits
            .iter()
            .map(|o| {
                let rep = self.t_subspace(k, r, &self.normalized_elements(&o.rep))?;
                Ok((OrbitLabel::Tight { dim: k, r, u: o.u, rep: o.rep.clone() }, rep))
            })
            .collect()
    }

    /// One W·Y_1 per H-orbit of k-subspaces of GF(q)^l.
    pub fn f_k_1_labels(&self, k: usize) -> Result<Vec<OrbitLabel>> {
        Ok(self
            .table(k)?
            .orbits
            .iter()
            .map(|o| OrbitLabel::Line { dim: k, u: o.u, rep: o.rep.clone() })
            .collect())
    }

    /// A concrete subspace carrying `label`.
    pub fn realize(&self, label: &OrbitLabel) -> Result<Subspace> {
        let t = &self.tower;
        match label {
            OrbitLabel::Line { rep, .. } => {
                let rows: Vec<u64> = rep.rows().iter().map(|&r| t.along(0, t.from_coords(r))).collect();
                Ok(Subspace::span(self.space(), &rows))
            }
            OrbitLabel::Tight { dim, r, rep, .. } => {
                check_tight(*dim, *r, self.m(), self.l())?;
                Ok(self.t_subspace(*dim, *r, &self.normalized_elements(rep))?.subspace)
            }
            OrbitLabel::Full { dim } => {
                if *dim > self.m() {
                    return Err(Error::InvalidParameters(format!("class ({dim},{dim}) needs k <= m")));
                }
                let rows: Vec<u64> = (0..*dim).map(|j| t.along(j, 1)).collect();
                Ok(Subspace::span(self.space(), &rows))
            }
        }
    }

    pub fn stabilizer_order(&self, label: &OrbitLabel) -> Result<BigUint> {
        let (m, l, q) = (self.m(), self.l(), self.q());
        match label {
            OrbitLabel::Tight { dim, r, u, .. } => stabilizer_order_t(*dim, *r, *u, m, l, q),
            OrbitLabel::Full { dim } => stabilizer_order_full(*dim, m, l, q),
            OrbitLabel::Line { .. } => {
                Ok(exact_div(gl_order(m as u32, (q as u64).pow(l as u32)), &self.orbit_size(label)?))
            }
        }
    }

    pub fn orbit_size(&self, label: &OrbitLabel) -> Result<BigUint> {
        let (m, l, q) = (self.m(), self.l(), self.q());
        match label {
            OrbitLabel::Line { u, .. } => {
                Ok(exact_div(q_pow(q, (m * l) as u64) - 1u32, &(q_pow(q, *u as u64) - 1u32)))
            }
            _ => Ok(exact_div(gl_order(m as u32, (q as u64).pow(l as u32)), &self.stabilizer_order(label)?)),
        }
    }

    /// Column labels of A_k: the (k,1) class, the (k,k-1) class by r, then
    /// (k,k) when k <= m.
    pub fn columns(&self, k: usize) -> Result<Vec<OrbitLabel>> {
        let mut out = Vec::new();
        if k <= self.l() {
            out.extend(self.f_k_1_labels(k)?);
        }
        if k >= 3 && k <= self.m() + 1 {
            for r in 1..k.min(self.l()) {
                out.extend(self.f_k_r_reps(k, r)?.into_iter().map(|(lab, _)| lab));
            }
        }
        if k <= self.m() {
            out.push(OrbitLabel::Full { dim: k });
        }
        Ok(out)
    }

    /// Row labels of A_k: the H-orbits of 2-subspaces as lines, then the
    /// single (2,2) orbit.
    pub fn rows_2(&self) -> Result<Vec<OrbitLabel>> {
        let mut out = if self.l() >= 2 { self.f_k_1_labels(2)? } else { Vec::new() };
        if self.m() >= 2 {
            out.push(OrbitLabel::Full { dim: 2 });
        }
        Ok(out)
    }

    /// Independence of the columns of (a_ij + b_j u_i) over GF(q^l), decided
    /// by independence of (b_j, a_1j, …, a_rj) over GF(q).
    pub fn column_independence_criterion(&self, u: &[Elem], a: &[Vec<Elem>], b: &[Elem]) -> Result<bool> {
        let (r, s) = self.check_columns(u, a, b)?;
        let cs = Space::new(self.q(), r + 1)?;
        let vs: Vec<u64> = (0..s)
            .map(|j| {
                let mut v = vec![b[j]];
                v.extend((0..r).map(|i| a[i][j]));
                cs.pack(&v)
            })
            .collect::<Result<_>>()?;
        Ok(cs.rank(&vs) == s)
    }

    /// The same question answered by a rank computation over GF(q^l).
    pub fn column_rank_direct(&self, u: &[Elem], a: &[Vec<Elem>], b: &[Elem]) -> Result<usize> {
        let (r, s) = self.check_columns(u, a, b)?;
        let t = &self.tower;
        let f = t.middle();
        let mut g = Dense::zeros(s, r);
        for i in 0..r {
            for j in 0..s {
                g[(j, i)] = f.add(t.embed_base(a[i][j]), f.mul(t.embed_base(b[j]), u[i]));
            }
        }
        Ok(g.rank(f))
    }

    fn check_columns(&self, u: &[Elem], a: &[Vec<Elem>], b: &[Elem]) -> Result<(usize, usize)> {
        let r = u.len();
        let s = b.len();
        if a.len() != r || a.iter().any(|row| row.len() != s) {
            return Err(Error::DimensionMismatch { expected: r, got: a.len() });
        }
        if s > r {
            return Err(Error::InvalidParameters(format!("s = {s} exceeds r = {r}")));
        }
        let t = &self.tower;
        let mut chunks = vec![t.coords(1)];
        chunks.extend(u.iter().map(|&e| t.coords(e)));
        if t.chunk_space().rank(&chunks) != r + 1 {
            return Err(Error::Precondition("1, u_1, ..., u_r must be linearly independent over GF(q)".into()));
        }
        if a.iter().flatten().chain(b).any(|&x| x >= self.q()) {
            return Err(Error::Precondition("a and b must have entries in GF(q)".into()));
        }
        Ok((r, s))
    }

    /// Export of the orbit labels of k-subspaces.
    pub fn export(&self, k: usize) -> Result<AtlasExport> {
        let mut orbits = Vec::new();
        for label in self.columns(k)? {
            let realized = self.realize(&label)?;
            let class = label.class();
            let (r, u, rep) = match &label {
                OrbitLabel::Line { u, rep, .. } => (None, Some(*u), Some(rep.to_coords())),
                OrbitLabel::Tight { r, u, rep, .. } => (Some(*r), Some(*u), Some(rep.to_coords())),
                OrbitLabel::Full { .. } => (None, None, None),
            };
            orbits.push(AtlasEntry {
                class: [class.i, class.j],
                r,
                u,
                rep,
                realized: realized.to_coords(),
                stabilizer_order: self.stabilizer_order(&label)?,
                orbit_size: self.orbit_size(&label)?,
            });
        }
        let total = orbits.iter().map(|o| o.orbit_size.clone()).sum();
        Ok(AtlasExport { m: self.m(), l: self.l(), k, q: self.q(), orbits, labelled_subspaces: total })
    }
}

#[derive(Debug, Serialize)]
pub struct AtlasEntry {
    pub class: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rep: Option<Vec<Vec<u32>>>,
    pub realized: Vec<Vec<u32>>,
    #[serde(serialize_with = "crate::io::ser_biguint")]
    pub stabilizer_order: BigUint,
    #[serde(serialize_with = "crate::io::ser_biguint")]
    pub orbit_size: BigUint,
}

#[derive(Debug, Serialize)]
pub struct AtlasExport {
    pub m: usize,
    pub l: usize,
    pub k: usize,
    pub q: u32,
    pub orbits: Vec<AtlasEntry>,
    #[serde(serialize_with = "crate::io::ser_biguint")]
    pub labelled_subspaces: BigUint,
}

impl Serialize for OrbitLabel {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = ser.serialize_map(None)?;
        let c = self.class();
        map.serialize_entry("class", &[c.i, c.j])?;
        match self {
            OrbitLabel::Line { u, rep, .. } => {
                map.serialize_entry("u", u)?;
                map.serialize_entry("rep", &rep.to_coords())?;
            }
            OrbitLabel::Tight { r, u, rep, .. } => {
                map.serialize_entry("r", r)?;
                map.serialize_entry("u", u)?;
                map.serialize_entry("rep", &rep.to_coords())?;
            }
            OrbitLabel::Full { .. } => {}
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::gl::{brute_force_stabilizer, orbit, random_element};
    use crate::subspace::{enumerate_subspaces, gaussian_binomial};

    fn atlas(m: usize, l: usize) -> Atlas {
        Atlas::new(m, l, 2).unwrap()
    }

    #[test]
    fn classify_examples() {
        let a = atlas(2, 3);
        let t = a.tower();
        let x = t.power_basis();
        let w = Subspace::span(a.space(), &[t.along(0, x[0]), t.along(0, x[1]), t.along(0, x[2])]);
        assert_eq!(a.classify(&w).unwrap(), OmegaClass { i: 3, j: 1 });
        let w = Subspace::span(a.space(), &[t.along(0, 1), t.along(1, 1), t.along(0, x[1])]);
        assert_eq!(a.classify(&w).unwrap(), OmegaClass { i: 3, j: 2 });
        let a = atlas(3, 3);
        let t = a.tower();
        let w = Subspace::span(a.space(), &[t.along(0, 1), t.along(1, 1), t.along(2, 1)]);
        assert_eq!(a.classify(&w).unwrap(), OmegaClass { i: 3, j: 3 });
        assert!(a.classify(&Subspace::zero(&Space::new(2, 6).unwrap())).is_err());
    }

    #[test]
    fn t_representative_examples() {
        let a = atlas(2, 3);
        let w = a.tower().middle().primitive();
        let w2 = a.tower().middle().mul(w, w);
        let t = a.t_representative(3, 1, &[w]).unwrap();
        assert_eq!(a.classify(&t.subspace).unwrap(), OmegaClass { i: 3, j: 2 });
        let t = a.t_representative(3, 2, &[w, w2]).unwrap();
        assert_eq!(a.classify(&t.subspace).unwrap(), OmegaClass { i: 3, j: 2 });
        assert!(matches!(a.t_representative(3, 1, &[1]), Err(Error::Precondition(_))));
        assert!(a.t_representative(4, 1, &[w]).is_err());
    }

    #[test]
    fn stabilizer_formula_examples() {
        assert_eq!(stabilizer_order_t(3, 2, 3, 2, 3, 2).unwrap(), BigUint::from(7u32));
        assert_eq!(stabilizer_order_t(3, 1, 1, 2, 3, 2).unwrap(), BigUint::from(4u32));
        assert_eq!(stabilizer_order_t(3, 1, 1, 3, 3, 2).unwrap(), BigUint::from(1792u32));
        assert_eq!(orbit_size_t(3, 2, 3, 2, 3, 2).unwrap(), BigUint::from(504u32));
        assert_eq!(orbit_size_t(3, 1, 1, 2, 3, 2).unwrap(), BigUint::from(882u32));
        assert_eq!(stabilizer_order_full(3, 3, 3, 2).unwrap(), BigUint::from(168u32));
        assert!(stabilizer_order_t(3, 1, 2, 2, 3, 2).is_err());
    }

    #[test]
    fn brute_force_stabilizers_match() {
        let a = atlas(2, 3);
        for r in 1..3 {
            for (label, rep) in a.f_k_r_reps(3, r).unwrap() {
                let brute = brute_force_stabilizer(a.tower(), &rep.subspace).unwrap();
                assert_eq!(BigUint::from(brute), a.stabilizer_order(&label).unwrap(), "{label:?}");
            }
        }
    }

    #[test]
    fn exhaustive_classification_gf2_6() {
        let a = atlas(2, 3);
        let mut by_label: HashMap<OrbitLabel, u64> = HashMap::new();
        let mut by_class: HashMap<(usize, usize), u64> = HashMap::new();
        for w in enumerate_subspaces(a.space(), 3) {
            let c = a.classify(&w).unwrap();
            *by_class.entry((c.i, c.j)).or_default() += 1;
            *by_label.entry(a.orbit_label(&w).unwrap()).or_default() += 1;
        }
        assert_eq!(by_class[&(3, 1)], 9);
        assert_eq!(by_class[&(3, 2)], 1386);
        assert!(!by_class.contains_key(&(3, 3)));
        let mut tight: Vec<u64> = by_label
            .iter()
            .filter(|(l, _)| matches!(l, OrbitLabel::Tight { .. }))
            .map(|(l, &n)| {
                assert_eq!(BigUint::from(n), a.orbit_size(l).unwrap());
                n
            })
            .collect();
        tight.sort();
        assert_eq!(tight, vec![504, 882]);
        let total: u64 = by_label.values().sum();
        assert_eq!(BigUint::from(total), gaussian_binomial(6, 3, 2));
    }

    #[test]
    fn labels_are_orbit_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, l, k) in [(2, 3, 3), (2, 4, 3), (3, 3, 3), (2, 4, 2), (3, 3, 4)] {
            let a = atlas(m, l);
            for label in a.columns(k).unwrap() {
                let w = a.realize(&label).unwrap();
                assert_eq!(a.orbit_label(&w).unwrap(), label);
                for _ in 0..20 {
                    let g = random_element(a.tower(), &mut rng);
                    assert_eq!(a.orbit_label(&g.apply(&w)).unwrap(), label);
                }
            }
        }
    }

    #[test]
    fn orbit_sizes_match_expansion() {
        for (m, l, k) in [(2, 3, 3), (2, 4, 3)] {
            let a = atlas(m, l);
            for label in a.columns(k).unwrap() {
                let w = a.realize(&label).unwrap();
                let orb = orbit(a.tower(), &w);
                assert_eq!(BigUint::from(orb.len()), a.orbit_size(&label).unwrap(), "{label:?}");
                assert!(orb.iter().all(|x| a.orbit_label(x).unwrap() == label));
            }
        }
    }

    #[test]
    fn line_label_example() {
        let a = atlas(2, 3);
        let t = a.tower();
        let w = t.middle().primitive();
        let wp = Subspace::span(t.chunk_space(), &[t.coords(1), t.coords(w)]);
        let big = Subspace::span(a.space(), &[t.along(0, 1), t.along(0, w)]);
        let o = a.table(2).unwrap().orbit_of(&wp).unwrap();
        assert_eq!(a.orbit_label(&big).unwrap(), OrbitLabel::Line { dim: 2, u: o.u, rep: o.rep.clone() });
    }

    #[test]
    fn f_k_r_counts() {
        let a = atlas(2, 3);
        assert_eq!(a.f_k_r_reps(3, 2).unwrap().len(), 1);
        assert_eq!(a.f_k_r_reps(3, 1).unwrap().len(), 1);
        let a = atlas(2, 7);
        let reps = a.f_k_r_reps(3, 2).unwrap();
        assert_eq!(BigUint::from(reps.len()), crate::singer::n_d_v(3, 7, 2).unwrap());
        let labels: std::collections::HashSet<_> =
            reps.iter().map(|(_, t)| a.orbit_label(&t.subspace).unwrap()).collect();
        assert_eq!(labels.len(), reps.len());
    }

    #[test]
    fn unclassified_class_rejected() {
        // a 4-subspace of GF(2)^9 with GF(8)-span of dimension 2
        let a = atlas(3, 3);
        let t = a.tower();
        let x = t.power_basis();
        let w = Subspace::span(a.space(), &[t.along(0, x[0]), t.along(0, x[1]), t.along(1, x[0]), t.along(1, x[1])]);
        assert!(matches!(a.orbit_label(&w), Err(Error::Unclassified { i: 4, j: 2 })));
    }

    #[test]
    fn column_criterion_matches_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (q, l) in [(2u32, 5usize), (3, 4)] {
            let a = Atlas::new(1, l, q).unwrap();
            let f = a.tower().middle();
            let mut trials = 0;
            while trials < 2000 {
                let r = rng.gen_range(1..l);
                let u: Vec<Elem> = (0..r).map(|_| rng.gen_range(0..f.order())).collect();
                let s = rng.gen_range(1..=r);
                let a_m: Vec<Vec<Elem>> = (0..r).map(|_| (0..s).map(|_| rng.gen_range(0..q)).collect()).collect();
                let b: Vec<Elem> = (0..s).map(|_| rng.gen_range(0..q)).collect();
                let Ok(crit) = a.column_independence_criterion(&u, &a_m, &b) else { continue };
                assert_eq!(crit, a.column_rank_direct(&u, &a_m, &b).unwrap() == s);
                trials += 1;
            }
        }
        let a = atlas(1, 3);
        let f = a.tower().middle();
        let w = f.primitive();
        assert!(a.column_independence_criterion(&[w], &[vec![1]], &[0]).unwrap());
        // two equal columns
        let u = [w, f.mul(w, w)];
        assert!(!a.column_independence_criterion(&u, &[vec![1, 1], vec![0, 0]], &[1, 1]).unwrap());
        assert_eq!(a.column_rank_direct(&u, &[vec![1, 1], vec![0, 0]], &[1, 1]).unwrap(), 1);
        assert!(a.column_independence_criterion(&[w, 0], &[vec![1]], &[1]).is_err());
    }
}
