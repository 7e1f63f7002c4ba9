//! Recursive constructions: block breaking, hole filling and supplementary
//! designs.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::expand::{expand, EXPANSION_LIMIT};
use super::instance::{merge_blocks, Blocks, DesignInstance, Kind};
use super::verify::{verify, Mode, VerifyReport};
use crate::error::{Error, Result};
use crate::space::Space;
use crate::subspace::{enumerate_subspaces, gaussian_binomial, Subspace};

/// Image of a subspace of GF(q)^u under the map sending unit vector i to
/// `images[i]`.
fn transplant(small: &Space, big: &Space, s: &Subspace, images: &[u64]) -> Subspace {
    let rows: Vec<u64> = s.rows().iter().map(|&r| big.combine(&small.unpack(r), images)).collect();
    Subspace::span(big, &rows)
}

fn single_dim(d: &DesignInstance, what: &str) -> Result<usize> {
    match d.dims.as_slice() {
        [k] => Ok(*k),
        _ => Err(Error::Precondition(format!("{what} must have a single block dimension, has {:?}", d.dims))),
    }
}

/// Replaces every block B of dimension u by a copy of the ingredient
/// 2-(u, k, μ) design, carried onto B along B's canonical basis.
pub fn break_blocks(pbd: &DesignInstance, ingredients: &BTreeMap<usize, DesignInstance>) -> Result<DesignInstance> {
    let space = pbd.space()?;
    let mut k = None;
    let mut mu = None;
    for (&u, ing) in ingredients {
        if ing.q != pbd.q || ing.v != u {
            return Err(Error::Precondition(format!("ingredient for u = {u} lives on GF({})^{}", ing.q, ing.v)));
        }
        let ik = single_dim(ing, "an ingredient")?;
        let lam = ing
            .claimed_lambda
            .clone()
            .ok_or_else(|| Error::Precondition(format!("ingredient for u = {u} has no claimed λ")))?;
        if *k.get_or_insert(ik) != ik {
            return Err(Error::Precondition("ingredients disagree on the block dimension".into()));
        }
        if *mu.get_or_insert(lam.clone()) != lam {
            return Err(Error::Precondition("ingredients disagree on μ".into()));
        }
    }
    for u in &pbd.dims {
        if !ingredients.contains_key(u) {
            return Err(Error::Precondition(format!("no ingredient for block dimension {u}")));
        }
    }
    let (Some(k), Some(mu)) = (k, mu) else {
        return Err(Error::Precondition("no ingredients".into()));
    };
    let expanded: BTreeMap<usize, Vec<(Subspace, u64)>> =
        ingredients.iter().map(|(&u, ing)| Ok((u, expand(ing)?))).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (b, mb) in expand(pbd)? {
        let u = b.dim();
        let small = Space::new(pbd.q, u)?;
        for (c, mc) in &expanded[&u] {
            out.push((transplant(&small, &space, c, b.rows()), mb * mc));
        }
    }
    let lambda = pbd.claimed_lambda.as_ref().map(|l| l * &mu);
    Ok(DesignInstance::explicit(pbd.q, pbd.v, Kind::Design, vec![k], lambda, out))
}

#[derive(Debug, Serialize)]
pub struct FillHolesOutcome {
    #[serde(skip)]
    pub design: DesignInstance,
    pub lifted_blocks: u64,
    pub group_copies: u64,
    pub hole_blocks: u64,
    pub report: VerifyReport,
}

/// Hole filling. The GDD lives on V = GF(q)^v with groups of dimension g;
/// the master design lives on GF(q)^{g+n} and its hole U is spanned by the
/// last n unit vectors. The output lives on V ⊕ U (V first) and consists of
/// * every GDD block B lifted to the graphs {b + f(b)} of all linear maps
///   f: B -> U, each with B's multiplicity,
/// * for each group G, the master blocks not inside U, carried onto G ⊕ U,
/// * the master blocks inside U, once.
///
/// The result is re-verified in full before it is returned.
pub fn fill_holes(gdd: &DesignInstance, master: &DesignInstance, n: usize) -> Result<FillHolesOutcome> {
    gdd.validate()?;
    master.validate()?;
    if gdd.kind != Kind::Gdd {
        return Err(Error::Precondition("the first input must be a gdd".into()));
    }
    if !matches!(master.kind, Kind::Design | Kind::Pbd) || master.q != gdd.q {
        return Err(Error::Precondition("the master must be a design over the same field".into()));
    }
    let q = gdd.q;
    let k = single_dim(gdd, "the gdd")?;
    if single_dim(master, "the master")? != k {
        return Err(Error::Precondition("gdd and master block dimensions differ".into()));
    }
    let groups = gdd.groups.as_ref().expect("validated gdd");
    let g = groups[0].dim();
    if groups.iter().any(|x| x.dim() != g) {
        return Err(Error::Precondition("groups must share one dimension".into()));
    }
    if master.v != g + n {
        return Err(Error::Precondition(format!("master must live on GF(q)^{}, not GF(q)^{}", g + n, master.v)));
    }
    let lambda = gdd.claimed_lambda.clone().ok_or_else(|| Error::Precondition("the gdd has no claimed λ".into()))?;
    let target = BigUint::from(q).pow((n * (k - 2)) as u32) * &lambda;
    let master_report = verify(master, Mode::Full)?;
    if !master_report.passed || master_report.lambda().map(BigUint::from) != Some(target.clone()) {
        return Err(Error::Precondition(format!(
            "the master must be a 2-({}, {k}, {target}) design; verification found:\n{}",
            g + n,
            master_report.summary()
        )));
    }

    let mspace = master.space()?;
    let hole_space = Space::new(q, n)?;
    let in_hole = |b: &Subspace| b.rows().iter().all(|&r| (0..g).all(|c| mspace.get(r, c) == 0));
    let master_blocks = expand(master)?;
    let (hole_blocks, rest): (Vec<_>, Vec<_>) = master_blocks.into_iter().partition(|(b, _)| in_hole(b));
    if n >= 2 {
        let restricted: Vec<(Subspace, u64)> = hole_blocks
            .iter()
            .map(|(b, m)| {
                let rows: Vec<u64> =
                    b.rows().iter().map(|&r| hole_space.pack(&mspace.unpack(r)[g..]).expect("in range")).collect();
                (Subspace::span(&hole_space, &rows), *m)
            })
            .collect();
        let du = DesignInstance::explicit(q, n, Kind::Design, vec![k], Some(target.clone()), restricted);
        let r = verify(&du, Mode::Full)?;
        if !r.passed {
            return Err(Error::Precondition(format!(
                "the master blocks inside the hole do not form a 2-({n}, {k}, {target}) design:\n{}",
                r.summary()
            )));
        }
    }

    let v = gdd.v;
    let space = Space::new(q, v + n)?;
    let gspace = gdd.space()?;
    let lift = |row: u64| space.pack(&[gspace.unpack(row), vec![0; n]].concat()).expect("in range");
    let hole_units: Vec<u64> = (0..n).map(|j| space.unit(v + j)).collect();
    let gdd_blocks = expand(gdd)?;
    let lifts = (q as u64).checked_pow((n * k) as u32).unwrap_or(u64::MAX);
    let total = (gdd_blocks.len() as u64).saturating_mul(lifts);
    if total > EXPANSION_LIMIT {
        return Err(Error::BudgetExceeded { budget: EXPANSION_LIMIT, needed: total as u128 });
    }
    let hole_vectors: Vec<u64> = hole_space.vectors().map(|x| space.combine(&hole_space.unpack(x), &hole_units)).collect();

    let mut out: Vec<(Subspace, u64)> = Vec::new();
    for (b, m) in &gdd_blocks {
        let base: Vec<u64> = b.rows().iter().map(|&r| lift(r)).collect();
        for mut f in 0..lifts {
            let rows: Vec<u64> = base
                .iter()
                .map(|&r| {
                    let h = hole_vectors[(f % hole_vectors.len() as u64) as usize];
                    f /= hole_vectors.len() as u64;
                    space.add(r, h)
                })
                .collect();
            out.push((Subspace::span(&space, &rows), *m));
        }
    }
    let lifted_blocks = out.len() as u64;
    for grp in groups {
        let images: Vec<u64> = grp.rows().iter().map(|&r| lift(r)).chain(hole_units.iter().copied()).collect();
        out.extend(rest.iter().map(|(b, m)| (transplant(&mspace, &space, b, &images), *m)));
    }
    let group_copies = (out.len() as u64) - lifted_blocks;
    let images: Vec<u64> = (0..g).map(|_| 0).chain(hole_units.iter().copied()).collect();
    out.extend(hole_blocks.iter().map(|(b, m)| (transplant(&mspace, &space, b, &images), *m)));
    let hole_count = hole_blocks.len() as u64;

    let design = DesignInstance::explicit(q, v + n, Kind::Design, vec![k], Some(target), out);
    let report = verify(&design, Mode::Full)?;
    Ok(FillHolesOutcome { design, lifted_blocks, group_copies, hole_blocks: hole_count, report })
}

/// All admissible blocks not in the simple design `d`, with
/// λ' = Σ_{k∈K} [v-2, k-2]_q − λ when λ is known.
pub fn supplementary(d: &DesignInstance) -> Result<DesignInstance> {
    d.validate()?;
    if !d.is_simple() {
        return Err(Error::Precondition("supplementary designs need a simple design".into()));
    }
    if !matches!(d.kind, Kind::Design | Kind::Pbd) {
        return Err(Error::Precondition(format!("expected a design or pbd, got {}", d.kind.as_str())));
    }
    let space = d.space()?;
    let q = d.q as u64;
    let mut total = BigUint::default();
    let mut complete = BigUint::default();
    for &k in &d.dims {
        total += gaussian_binomial(d.v as u64, k as u64, q);
        complete += gaussian_binomial(d.v as u64 - 2, k as u64 - 2, q);
    }
    if total.to_u64().is_none_or(|t| t > EXPANSION_LIMIT) {
        return Err(Error::BudgetExceeded { budget: EXPANSION_LIMIT, needed: total.to_u128().unwrap_or(u128::MAX) });
    }
    let present: HashSet<Subspace> = match &d.blocks {
        Blocks::Explicit(b) => b.iter().map(|(s, _)| s.clone()).collect(),
        Blocks::Implicit(_) => expand(d)?.into_iter().map(|(s, _)| s).collect(),
    };
    let mut blocks = Vec::new();
    for &k in &d.dims {
        blocks.extend(enumerate_subspaces(&space, k).filter(|s| !present.contains(s)).map(|s| (s, 1)));
    }
    let lambda = match &d.claimed_lambda {
        Some(l) if *l <= complete => Some(&complete - l),
        Some(l) => return Err(Error::Precondition(format!("claimed λ = {l} exceeds the complete design's {complete}"))),
        None => None,
    };
    let mut out = DesignInstance::explicit(d.q, d.v, d.kind, d.dims.clone(), lambda, merge_blocks(blocks));
    out.dims = d.dims.clone();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::gdd::{build_gdd, GddSelection};
    use crate::design::verify::pair_counts;

    fn complete(q: u32, v: usize, k: usize) -> DesignInstance {
        let s = Space::new(q, v).unwrap();
        let lambda = gaussian_binomial(v as u64 - 2, k as u64 - 2, q as u64);
        DesignInstance::explicit(q, v, Kind::Design, vec![k], Some(lambda), enumerate_subspaces(&s, k).map(|b| (b, 1)))
    }

    #[test]
    fn breaking_complete_designs() {
        let pbd = complete(2, 4, 3);
        let ing = BTreeMap::from([(3, complete(2, 3, 2))]);
        let out = break_blocks(&pbd, &ing).unwrap();
        assert_eq!(out.claimed_lambda, Some(BigUint::from(3u32)));
        let r = verify(&out, Mode::Full).unwrap();
        assert!(r.passed, "{}", r.summary());
        assert_eq!(r.lambda(), Some(3));
        assert!(!r.simple);
    }

    #[test]
    fn identity_ingredient() {
        let pbd = complete(2, 4, 3);
        let ing = BTreeMap::from([(3, complete(2, 3, 3))]);
        let out = break_blocks(&pbd, &ing).unwrap();
        assert_eq!(out.blocks, pbd.blocks);
        assert!(break_blocks(&pbd, &BTreeMap::new()).is_err());
    }

    #[test]
    fn supplementary_of_complete_and_empty() {
        let c = complete(2, 4, 3);
        let s = supplementary(&c).unwrap();
        assert_eq!(s.blocks, Blocks::Explicit(vec![]));
        assert_eq!(s.claimed_lambda, Some(BigUint::default()));
        let empty = DesignInstance::explicit(2, 4, Kind::Design, vec![3], Some(BigUint::default()), vec![]);
        let s = supplementary(&empty).unwrap();
        assert_eq!(s.blocks, c.blocks);
        assert_eq!(s.claimed_lambda, Some(BigUint::from(3u32)));
    }

    #[test]
    fn supplementary_counts_complement() {
        let s = Space::new(2, 4).unwrap();
        let some: Vec<_> = enumerate_subspaces(&s, 3).step_by(2).map(|b| (b, 1)).collect();
        let d = DesignInstance::explicit(2, 4, Kind::Design, vec![3], None, some);
        let sd = supplementary(&d).unwrap();
        let (a, b) = (pair_counts(&d).unwrap(), pair_counts(&sd).unwrap());
        for p in enumerate_subspaces(&s, 2) {
            assert_eq!(a.count(&p) + b.count(&p), 3);
        }
        let first = enumerate_subspaces(&s, 3).next().unwrap();
        let doubled = DesignInstance::explicit(2, 4, Kind::Design, vec![3], None, vec![(first, 2)]);
        assert!(matches!(supplementary(&doubled), Err(Error::Precondition(_))));
    }

    #[test]
    fn fill_holes_without_hole() {
        let gdd = build_gdd(2, 3, 3, 2, &GddSelection::parse("2,3=1").unwrap()).unwrap();
        // a 2-(3,3,6) master: the whole space six times
        let s3 = Space::new(2, 3).unwrap();
        let master = DesignInstance::explicit(2, 3, Kind::Design, vec![3], Some(BigUint::from(6u32)), vec![(Subspace::full(&s3), 6)]);
        let out = fill_holes(&gdd, &master, 0).unwrap();
        assert!(out.report.passed, "{}", out.report.summary());
        assert_eq!(out.report.lambda(), Some(6));
        assert_eq!((out.lifted_blocks, out.group_copies, out.hole_blocks), (504, 9, 0));
    }

    #[test]
    fn fill_holes_with_one_dimensional_hole() {
        let gdd = build_gdd(2, 3, 3, 2, &GddSelection::parse("2,3=1").unwrap()).unwrap();
        // the 2-(4,3,3) complete design four times gives λ = 12 = 2^{1}·6
        let mut master = complete(2, 4, 3);
        if let Blocks::Explicit(b) = &mut master.blocks {
            b.iter_mut().for_each(|e| e.1 = 4);
        }
        master.claimed_lambda = Some(BigUint::from(12u32));
        let out = fill_holes(&gdd, &master, 1).unwrap();
        assert!(out.report.passed, "{}", out.report.summary());
        assert_eq!(out.report.lambda(), Some(12));
        assert_eq!(out.lifted_blocks, 504 * 8);
        assert_eq!(out.design.v, 7);
        // wrong master λ is caught before assembly
        assert!(matches!(fill_holes(&gdd, &complete(2, 4, 3), 1), Err(Error::Precondition(_))));
    }
}
