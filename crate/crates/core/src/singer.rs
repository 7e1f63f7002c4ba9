//! The Singer cycle H = ⟨T_w⟩ acting on subspaces of GF(q)^l, orbit tables
//! and the orbit-count formulas.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{prime_factors, prime_power, Elem};
use crate::incidence::IncidenceBlockMatrix;
use crate::linalg::LinearMap;
use crate::space::Space;
use crate::subspace::{enumerate_subspaces, gaussian_binomial, superspaces, Subspace};
use crate::tower::FieldTower;

/// Multiplication by the primitive element of GF(q^l), acting on GF(q)^l.
#[derive(Debug)]
pub struct SingerAction {
    tower: FieldTower,
    map: LinearMap,
}

impl SingerAction {
    pub fn new(q: u32, l: usize) -> Result<SingerAction> {
        let (p, s) = prime_power(q as u64).ok_or(Error::NotPrimePower(q as u64))?;
        let tower = FieldTower::new(p, s, l, 1)?;
        let map = tower.multiplication_map(tower.middle().primitive());
        Ok(SingerAction { tower, map })
    }

    pub fn q(&self) -> u32 {
        self.tower.q()
    }

    pub fn l(&self) -> usize {
        self.tower.l()
    }

    pub fn space(&self) -> &Space {
        self.tower.chunk_space()
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    /// The l×l matrix of T_w; row `i` holds the coordinates of `w * x_i`.
    pub fn matrix(&self) -> Vec<Vec<u32>> {
        self.map.images.iter().map(|&r| self.space().unpack(r)).collect()
    }

    #[inline]
    pub fn apply_vector(&self, x: u64) -> u64 {
        self.map.apply(x)
    }

    pub fn apply(&self, w: &Subspace) -> Subspace {
        let rows: Vec<u64> = w.rows().iter().map(|&r| self.map.apply(r)).collect();
        Subspace::span(self.space(), &rows)
    }

    /// Image of `w` under multiplication by an arbitrary nonzero `s`.
    pub fn scale(&self, w: &Subspace, s: Elem) -> Subspace {
        let t = &self.tower;
        let rows: Vec<u64> = w
            .rows()
            .iter()
            .map(|&r| t.coords(t.middle().mul(s, t.from_coords(r))))
            .collect();
        Subspace::span(self.space(), &rows)
    }

    fn check(&self, w: &Subspace) -> Result<()> {
        if w.q() != self.q() || w.ambient_dim() != self.l() {
            return Err(Error::DimensionMismatch { expected: self.l(), got: w.ambient_dim() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HOrbit {
    pub dim: usize,
    #[serde(serialize_with = "crate::io::ser_subspace")]
    pub rep: Subspace,
    pub length: u64,
    pub u: u32,
}

fn stabilizer_exponent(q: u32, l: usize, length: u64) -> u32 {
    let total = (q as u64).pow(l as u32) - 1;
    assert_eq!(total % length, 0, "orbit length must divide q^l - 1");
    let target = total / length + 1;
    let mut u = 0;
    let mut qu = 1u64;
    while qu < target {
        qu *= q as u64;
        u += 1;
    }
    assert_eq!(qu, target, "stabilizer order must be q^u - 1");
    u
}

/// H-orbit of `w`, found by cycling T_w until `w` returns.
pub fn h_orbit_of(w: &Subspace, h: &SingerAction) -> Result<HOrbit> {
    h.check(w)?;
    let mut rep = w.clone();
    let mut cur = h.apply(w);
    let mut length = 1;
    while &cur != w {
        if cur < rep {
            rep = cur.clone();
        }
        cur = h.apply(&cur);
        length += 1;
    }
    Ok(HOrbit { dim: w.dim(), u: stabilizer_exponent(h.q(), h.l(), length), rep, length })
}

/// Orbits of H on the d-subspaces of GF(q)^l with a reverse index.
#[derive(Debug)]
pub struct OrbitTable {
    pub q: u32,
    pub l: usize,
    pub d: usize,
    pub orbits: Vec<HOrbit>,
    index: HashMap<Subspace, u32>,
}

impl OrbitTable {
    pub fn build(q: u32, l: usize, d: usize) -> Result<OrbitTable> {
        if d > l {
            return Err(Error::InvalidParameters(format!("d = {d} exceeds l = {l}")));
        }
        let h = SingerAction::new(q, l)?;
        let mut seen: HashMap<Subspace, u32> = HashMap::new();
        let mut orbits = Vec::new();
        for w in enumerate_subspaces(h.space(), d) {
            if seen.contains_key(&w) {
                continue;
            }
            let idx = orbits.len() as u32;
            let mut members = vec![w.clone()];
            let mut cur = h.apply(&w);
            while cur != w {
                members.push(cur.clone());
                cur = h.apply(&cur);
            }
            let length = members.len() as u64;
            let rep = members.iter().min().unwrap().clone();
            for m in members {
                seen.insert(m, idx);
            }
            orbits.push(HOrbit { dim: d, u: stabilizer_exponent(q, l, length), rep, length });
        }
        // sort by (u, rep) and remap the index
        let mut order: Vec<usize> = (0..orbits.len()).collect();
        order.sort_by(|&a, &b| (orbits[a].u, &orbits[a].rep).cmp(&(orbits[b].u, &orbits[b].rep)));
        let mut new_pos = vec![0u32; orbits.len()];
        for (pos, &old) in order.iter().enumerate() {
            new_pos[old] = pos as u32;
        }
        let orbits: Vec<HOrbit> = order.iter().map(|&i| orbits[i].clone()).collect();
        for v in seen.values_mut() {
            *v = new_pos[*v as usize];
        }
        Ok(OrbitTable { q, l, d, orbits, index: seen })
    }

    /// Index of the orbit containing `w`.
    pub fn orbit_index(&self, w: &Subspace) -> Option<usize> {
        self.index.get(w).map(|&i| i as usize)
    }

    pub fn orbit_of(&self, w: &Subspace) -> Option<&HOrbit> {
        self.orbit_index(w).map(|i| &self.orbits[i])
    }

    /// Position of the orbit with representative `rep`.
    pub fn position_of_rep(&self, rep: &Subspace) -> Option<usize> {
        self.orbit_index(rep).filter(|&i| &self.orbits[i].rep == rep)
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }
}

type TableCache = Mutex<HashMap<(u32, usize, usize), Arc<OrbitTable>>>;

/// Shared, lazily built orbit table.
pub fn orbit_table(q: u32, l: usize, d: usize) -> Result<Arc<OrbitTable>> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(q, l, d)) {
        return Ok(t.clone());
    }
    let t = Arc::new(OrbitTable::build(q, l, d)?);
    Ok(cache.lock().unwrap().entry((q, l, d)).or_insert(t).clone())
}

/// One entry per H-orbit on d-subspaces of GF(q)^l, sorted by (u, rep).
pub fn h_orbit_reps(l: usize, d: usize, q: u32) -> Result<Vec<HOrbit>> {
    Ok(orbit_table(q, l, d)?.orbits.clone())
}

pub fn moebius(n: u64) -> Result<i32> {
    if n == 0 {
        return Err(Error::InvalidParameters("moebius(0) is undefined".into()));
    }
    let f = prime_factors(n);
    let mut m = n;
    for &p in &f {
        m /= p;
        if m % p == 0 {
            return Ok(0);
        }
    }
    Ok(if f.len() % 2 == 0 { 1 } else { -1 })
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn big_pow(q: u32, e: u64) -> BigInt {
    num_traits::pow(BigInt::from(q), e as usize)
}

fn exact_quotient(num: BigInt, den: BigInt) -> BigUint {
    let (quot, rem) = num.div_rem(&den);
    assert!(rem.is_zero(), "orbit-count formula left remainder {rem}");
    assert!(!quot.is_negative(), "orbit-count formula is negative");
    quot.to_biguint().unwrap()
}

/// Number of H-orbits on d-subspaces of GF(q)^v.
pub fn n_d_v(d: u64, v: u64, q: u32) -> Result<BigUint> {
    if d > v || v == 0 {
        return Err(Error::InvalidParameters(format!("need 0 <= d <= v, v >= 1; got d={d}, v={v}")));
    }
    let mut sum = BigInt::zero();
    for t in divisors(d.gcd(&v)) {
        let inner: BigInt = divisors(t)
            .into_iter()
            .map(|u| BigInt::from(moebius(t / u).unwrap()) * (big_pow(q, u) - 1))
            .sum();
        let qt = (q as u64).pow(t as u32);
        sum += BigInt::from(gaussian_binomial(v / t, d / t, qt)) * inner;
    }
    Ok(exact_quotient(sum, big_pow(q, v) - 1))
}

/// Number of H-orbits on d-subspaces of GF(q)^v with stabilizer GF(q^u)*.
pub fn n_d_u_v(d: u64, u: u64, v: u64, q: u32) -> Result<BigUint> {
    if d > v || v == 0 || u == 0 || d.gcd(&v) % u != 0 {
        return Err(Error::InvalidParameters(format!("u = {u} must divide gcd(d, v) = gcd({d}, {v})")));
    }
    let mut sum = BigInt::zero();
    for t in divisors(d.gcd(&v)).into_iter().filter(|t| t % u == 0) {
        let qt = (q as u64).pow(t as u32);
        sum += BigInt::from(moebius(t / u)?) * BigInt::from(gaussian_binomial(v / t, d / t, qt));
    }
    Ok(exact_quotient(sum * (big_pow(q, u) - 1), big_pow(q, v) - 1))
}

/// Ã: rows are H-orbits of t-subspaces, columns H-orbits of k-subspaces;
/// entry (T, K) counts members of K^H containing T.
pub fn h_incidence_matrix(l: usize, t: usize, k: usize, q: u32) -> Result<IncidenceBlockMatrix> {
    if t > k || k > l {
        return Err(Error::InvalidParameters(format!("need t <= k <= l; got t={t}, k={k}, l={l}")));
    }
    let rows = orbit_table(q, l, t)?;
    let cols = orbit_table(q, l, k)?;
    let space = Space::new(q, l)?;
    let mut entries = vec![vec![BigUint::zero(); cols.len()]; rows.len()];
    for (i, o) in rows.orbits.iter().enumerate() {
        for w in superspaces(&space, &o.rep, k)? {
            entries[i][cols.orbit_index(&w).expect("every subspace lies in an orbit")] += 1u32;
        }
    }
    let label = |o: &HOrbit| format!("u={} {:?}", o.u, o.rep);
    Ok(IncidenceBlockMatrix::single_block(
        rows.orbits.iter().map(label).collect(),
        cols.orbits.iter().map(label).collect(),
        entries,
    ))
}

/// Checks `length * (q^u - 1) == q^l - 1` for an orbit.
pub fn orbit_length_consistent(o: &HOrbit, q: u32, l: usize) -> bool {
    let lhs = BigUint::from(o.length) * (num_traits::pow(BigUint::from(q), o.u as usize) - BigUint::one());
    lhs == num_traits::pow(BigUint::from(q), l) - BigUint::one()
}

pub fn to_u64(x: &BigUint) -> u64 {
    x.to_u64().expect("value fits in u64")
}
