//! q-GDDs over the Desarguesian spread, built from G-orbits of (k, k-1)
//! and (k, k) subspaces.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use smallvec::SmallVec;

use super::instance::{Blocks, DesignInstance, ImplicitBlocks, Kind, TightOrbit};
use crate::atlas::{Atlas, OrbitLabel};
use crate::error::{Error, Result};
use crate::incidence::{q_value, r_value};
use crate::singer::n_d_u_v;
use crate::subspace::Subspace;
use crate::tower::{build_tower, FieldTower};

/// The GF(q^l)-lines of GF(q^l)^m, flattened into GF(q)^{ml}, sorted.
pub fn desarguesian_spread(m: usize, l: usize, q: u32) -> Result<Vec<Subspace>> {
    let (p, s) = crate::field::prime_power(q as u64).ok_or(Error::NotPrimePower(q as u64))?;
    if m == 0 || l == 0 {
        return Err(Error::ZeroDegree);
    }
    let tower = build_tower(p, s, l, m)?;
    Ok(spread_of(&tower))
}

pub(crate) fn spread_of(tower: &FieldTower) -> Vec<Subspace> {
    let (m, big_q) = (tower.m(), tower.middle().order() as u64);
    let mut out = Vec::new();
    for lead in 0..m {
        let free = m - lead - 1;
        for mut n in 0..big_q.pow(free as u32) {
            let mut v: SmallVec<[u32; 8]> = SmallVec::from_elem(0, m);
            v[lead] = 1;
            for x in v.iter_mut().skip(lead + 1) {
                *x = (n % big_q) as u32;
                n /= big_q;
            }
            let f = tower.middle();
            let rows: Vec<u64> = tower
                .power_basis()
                .iter()
                .map(|&b| tower.flatten(&v.iter().map(|&x| f.mul(x, b)).collect::<SmallVec<[u32; 8]>>()))
                .collect();
            out.push(Subspace::span(tower.flat_space(), &rows));
        }
    }
    out.sort();
    out
}

/// Orbit multiplicities w_{r,u} and the (k,k) switch w.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GddSelection {
    pub weights: BTreeMap<(usize, u32), u64>,
    pub omega_kk: bool,
}

impl GddSelection {
    /// Parses `r,u=w[,r,u=w…]`; entries may also be separated by `;` or
    /// spaces.
    pub fn parse(text: &str) -> Result<GddSelection> {
        let mut sel = GddSelection::default();
        let tokens: Vec<&str> = text.split([',', ';', ' ']).filter(|s| !s.is_empty()).collect();
        if tokens.len() % 2 != 0 {
            return Err(Error::InvalidParameters(format!("bad selection {text:?}; expected r,u=w entries")));
        }
        for pair in tokens.chunks(2) {
            let bad = || Error::InvalidParameters(format!("bad selection entry {:?}; expected r,u=w", pair.join(",")));
            let (u, w) = pair[1].split_once('=').ok_or_else(bad)?;
            let r: usize = pair[0].parse().map_err(|_| bad())?;
            let u: u32 = u.parse().map_err(|_| bad())?;
            let w: u64 = w.parse().map_err(|_| bad())?;
            if sel.weights.insert((r, u), w).is_some() {
                return Err(Error::InvalidParameters(format!("w_{{{r},{u}}} given twice")));
            }
        }
        Ok(sel)
    }

    /// Checks the bounds 0 <= w_{r,u} <= n_{r+1,u}^l and w = 0 for k > m.
    pub fn validate(&self, m: usize, l: usize, k: usize, q: u32) -> Result<()> {
        if k < 3 || k > (m + 1).min(l) {
            return Err(Error::InvalidParameters(format!("need 3 <= k <= min(m+1, l); got m={m}, l={l}, k={k}")));
        }
        if self.omega_kk && k > m {
            return Err(Error::InvalidParameters(format!("w = 1 needs k <= m; got k={k}, m={m}")));
        }
        for (&(r, u), &w) in &self.weights {
            if r < 2 || r >= k {
                return Err(Error::InvalidParameters(format!("w_{{{r},{u}}}: r must lie in 2..={}", k - 1)));
            }
            if u == 0 || (r + 1).gcd(&l) % u as usize != 0 {
                return Err(Error::InvalidParameters(format!(
                    "w_{{{r},{u}}}: u must divide gcd(r+1, l) = {}",
                    (r + 1).gcd(&l)
                )));
            }
            let bound = n_d_u_v(r as u64 + 1, u as u64, l as u64, q)?;
            if BigUint::from(w) > bound {
                return Err(Error::InvalidParameters(format!("w_{{{r},{u}}} = {w} exceeds n_{{{},{u}}}^{l} = {bound}", r + 1)));
            }
        }
        Ok(())
    }
}

/// λ of the GDD selected by `sel`.
pub fn gdd_lambda(sel: &GddSelection, m: usize, l: usize, k: usize, q: u32) -> Result<BigUint> {
    sel.validate(m, l, k, q)?;
    let mut lambda = BigUint::default();
    for (&(r, u), &w) in &sel.weights {
        lambda += q_value(m, l, k, q, r, u) * w;
    }
    if sel.omega_kk {
        lambda += r_value(m, l, k, q);
    }
    Ok(lambda)
}

pub fn build_gdd(m: usize, l: usize, k: usize, q: u32, sel: &GddSelection) -> Result<DesignInstance> {
    sel.validate(m, l, k, q)?;
    let atlas = Atlas::new(m, l, q)?;
    let mut chosen = Vec::new();
    for (&(r, u), &w) in &sel.weights {
        let reps: Vec<Subspace> = atlas
            .f_k_r_reps(k, r)?
            .into_iter()
            .filter_map(|(label, _)| match label {
                OrbitLabel::Tight { u: lu, rep, .. } if lu == u => Some(rep),
                _ => None,
            })
            .take(w as usize)
            .collect();
        chosen.extend(reps.into_iter().map(|rep| (r, rep)));
    }
    build_gdd_from_labels(&atlas, k, &chosen, sel.omega_kk)
}

/// A GDD from an explicit list of (r, rep) labels: the H-orbit
/// representative of ⟨1, u_1, …, u_r⟩ for each chosen (k, k-1) orbit.
pub fn build_gdd_from_labels(
    atlas: &Atlas,
    k: usize,
    chosen: &[(usize, Subspace)],
    omega_kk: bool,
) -> Result<DesignInstance> {
    let (m, l, q) = (atlas.m(), atlas.l(), atlas.q());
    let mut sel = GddSelection { weights: BTreeMap::new(), omega_kk };
    let mut labels = Vec::new();
    for (r, rep) in chosen {
        let table = atlas.table(r + 1)?;
        let pos = table
            .position_of_rep(rep)
            .ok_or_else(|| Error::InvalidParameters(format!("{rep:?} is not a canonical H-orbit representative")))?;
        let u = table.orbits[pos].u;
        *sel.weights.entry((*r, u)).or_default() += 1;
        labels.push(TightOrbit { r: *r, u, rep: rep.clone(), multiplicity: 1 });
    }
    labels.sort();
    if labels.windows(2).any(|w| w[0].rep == w[1].rep && w[0].r == w[1].r) {
        return Err(Error::InvalidParameters("an orbit was selected twice".into()));
    }
    let lambda = gdd_lambda(&sel, m, l, k, q)?;
    Ok(DesignInstance {
        q,
        v: m * l,
        kind: Kind::Gdd,
        dims: vec![k],
        claimed_lambda: Some(lambda),
        class_lambdas: None,
        groups: Some(spread_of(atlas.tower())),
        blocks: Blocks::Implicit(ImplicitBlocks { m, l, k, labels, omega_kk, line_orbits: Vec::new() }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::expand::{block_count, expand};
    use crate::design::instance::check_partition;
    use crate::space::Space;

    fn sel(text: &str, omega_kk: bool) -> GddSelection {
        GddSelection { omega_kk, ..GddSelection::parse(text).unwrap() }
    }

    #[test]
    fn spreads() {
        for (m, l, q, n) in [(2, 3, 2, 9), (1, 3, 2, 1), (3, 3, 2, 73), (2, 2, 3, 10)] {
            let s = desarguesian_spread(m, l, q).unwrap();
            assert_eq!(s.len(), n);
            assert!(s.iter().all(|g| g.dim() == l));
            check_partition(&Space::new(q, m * l).unwrap(), &s).unwrap();
        }
        let whole = desarguesian_spread(1, 4, 2).unwrap();
        assert_eq!(whole[0], Subspace::full(&Space::new(2, 4).unwrap()));
    }

    #[test]
    fn lambdas() {
        assert_eq!(gdd_lambda(&sel("2,3=1", false), 2, 3, 3, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(gdd_lambda(&sel("", true), 3, 3, 3, 2).unwrap(), BigUint::from(112u32));
        assert_eq!(gdd_lambda(&sel("2,1=1", false), 2, 7, 3, 2).unwrap(), BigUint::from(42u32));
        assert_eq!(gdd_lambda(&sel("2,1=1", false), 3, 4, 3, 2).unwrap(), BigUint::from(42u32));
        // the q^2+q+1 times q^3-q form for k = 3
        for w in 1..=3u32 {
            let s = sel(&format!("2,1={w}"), false);
            assert_eq!(gdd_lambda(&s, 2, 7, 3, 2).unwrap(), BigUint::from(w * 7 * 6));
        }
    }

    #[test]
    fn selection_bounds() {
        assert!(sel("2,1=1", false).validate(2, 3, 3, 2).is_err()); // n_{3,1}^3 = 0
        assert!(sel("2,3=2", false).validate(2, 3, 3, 2).is_err());
        assert!(sel("1,1=1", false).validate(2, 3, 3, 2).is_err());
        assert!(sel("2,2=1", false).validate(2, 7, 3, 2).is_err());
        assert!(sel("", true).validate(2, 3, 3, 2).is_err()); // k > m
        assert!(sel("2,1=94", false).validate(2, 7, 3, 2).is_err());
        assert!(sel("2,1=93", false).validate(2, 7, 3, 2).is_ok());
        assert!(GddSelection::parse("2,1").is_err());
        assert!(GddSelection::parse("2,1=1;2,1=2").is_err());
        assert!(GddSelection::parse("2,1=1,2").is_err());
        let two = GddSelection::parse("2,1=1,3,1=2").unwrap();
        assert_eq!(two.weights, BTreeMap::from([((2, 1), 1), ((3, 1), 2)]));
    }

    #[test]
    fn small_gdd_blocks() {
        let d = build_gdd(2, 3, 3, 2, &sel("2,3=1", false)).unwrap();
        d.validate().unwrap();
        assert_eq!(block_count(&d).unwrap(), BigUint::from(504u32));
        let blocks = expand(&d).unwrap();
        assert_eq!(blocks.len(), 504);
        let distinct: std::collections::HashSet<_> = blocks.iter().map(|(b, _)| b.clone()).collect();
        assert_eq!(distinct.len(), 504);
        assert_eq!(d.groups.as_ref().unwrap().len(), 9);
        let back = DesignInstance::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
    }
}
