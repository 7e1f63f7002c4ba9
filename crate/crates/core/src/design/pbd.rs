//! q-PBDs: a GDD over the Desarguesian spread plus a copy of an
//! H-invariant seed design on every spread line.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;

use super::expand::to_explicit;
use super::gdd::{build_gdd, GddSelection};
use super::instance::{Blocks, ClassLambdas, DesignInstance, Kind, LineOrbit};
use super::verify::{verify, Mode};
use crate::error::{Error, Result};
use crate::singer::{orbit_table, SingerAction};
use crate::subspace::Subspace;

/// Seed blocks grouped into H-orbits: (orbit representative, multiplicity).
pub fn seed_orbits(seed: &DesignInstance) -> Result<Vec<LineOrbit>> {
    let seed = if seed.is_implicit() { to_explicit(seed)? } else { seed.clone() };
    let Blocks::Explicit(blocks) = &seed.blocks else { unreachable!() };
    let h = SingerAction::new(seed.q, seed.v)?;
    let mult: HashMap<&Subspace, u64> = blocks.iter().map(|(b, m)| (b, *m)).collect();
    for (b, m) in blocks {
        let img = h.apply(b);
        if mult.get(&img).copied().unwrap_or(0) != *m {
            return Err(Error::Precondition(format!(
                "seed is not invariant under the Singer cycle: {b:?} has multiplicity {m}, its image {img:?} has {}",
                mult.get(&img).copied().unwrap_or(0)
            )));
        }
    }
    let mut reps: BTreeMap<Subspace, u64> = BTreeMap::new();
    for (b, m) in blocks {
        let table = orbit_table(seed.q, seed.v, b.dim())?;
        let rep = table.orbit_of(b).expect("table covers every subspace").rep.clone();
        reps.insert(rep, *m);
    }
    Ok(reps.into_iter().map(|(rep, multiplicity)| LineOrbit { rep, multiplicity }).collect())
}

/// Blocks: the GDD of `sel` together with the G-orbits of W_s·Y_1 for the
/// H-orbit representatives W_s of the seed. Pairs inside spread lines are
/// covered λ_seed times, all others λ_gdd times; the result is a true PBD
/// when the two agree and a mixed instance otherwise.
pub fn build_pbd(
    m: usize,
    k: usize,
    seed: &DesignInstance,
    sel: &GddSelection,
) -> Result<DesignInstance> {
    if !matches!(seed.kind, Kind::Design | Kind::Pbd) {
        return Err(Error::Precondition(format!("the seed must be a design or pbd, got {}", seed.kind.as_str())));
    }
    let (q, l) = (seed.q, seed.v);
    let report = verify(seed, Mode::Full)?;
    let seed_lambda = match (report.passed, report.lambda()) {
        (true, Some(lam)) => BigUint::from(lam),
        _ => return Err(Error::Precondition(format!("the seed does not verify:\n{}", report.summary()))),
    };
    let line_orbits = seed_orbits(seed)?;
    let mut out = build_gdd(m, l, k, q, sel)?;
    let gdd_lambda = out.claimed_lambda.take().expect("gdd has λ");
    let Blocks::Implicit(imp) = &mut out.blocks else { unreachable!() };
    imp.line_orbits = line_orbits;
    let mut dims = seed.dims.clone();
    dims.push(k);
    dims.sort_unstable();
    dims.dedup();
    out.dims = dims;
    if seed_lambda == gdd_lambda {
        out.kind = Kind::Pbd;
        out.claimed_lambda = Some(gdd_lambda.clone());
    } else {
        out.kind = Kind::Mixed;
    }
    out.class_lambdas = Some(ClassLambdas { inside: seed_lambda, across: gdd_lambda });
    out.validate()?;
    Ok(out)
}
