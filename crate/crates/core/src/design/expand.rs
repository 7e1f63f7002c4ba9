//! Expansion of implicit (orbit-described) block sets.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::instance::{Blocks, DesignInstance, ImplicitBlocks, Kind};
use crate::atlas::{Atlas, OrbitLabel};
use crate::error::{Error, Result};
use crate::gl;
use crate::subspace::Subspace;

/// Largest number of distinct blocks materialized in memory.
pub const EXPANSION_LIMIT: u64 = 50_000_000;

/// The orbit labels of an implicit block set with their multiplicities.
pub fn implicit_labels(imp: &ImplicitBlocks) -> Vec<(OrbitLabel, u64)> {
    let mut out = Vec::new();
    for o in &imp.line_orbits {
        out.push((OrbitLabel::Line { dim: o.rep.dim(), u: 0, rep: o.rep.clone() }, o.multiplicity));
    }
    for t in &imp.labels {
        out.push((OrbitLabel::Tight { dim: imp.k, r: t.r, u: t.u, rep: t.rep.clone() }, t.multiplicity));
    }
    if imp.omega_kk {
        out.push((OrbitLabel::Full { dim: imp.k }, 1));
    }
    out
}

/// Line labels carry u = 0 in `implicit_labels`; this fills in the real
/// stabilizer parameter from the orbit table.
fn resolve(atlas: &Atlas, label: OrbitLabel) -> Result<OrbitLabel> {
    match label {
        OrbitLabel::Line { dim, rep, .. } => {
            let u = atlas
                .table(dim)?
                .orbit_of(&rep)
                .ok_or_else(|| Error::Format(format!("{rep:?} is not in GF(q)^l")))?
                .u;
            Ok(OrbitLabel::Line { dim, u, rep })
        }
        other => Ok(other),
    }
}

pub fn resolved_labels(atlas: &Atlas, imp: &ImplicitBlocks) -> Result<Vec<(OrbitLabel, u64)>> {
    implicit_labels(imp).into_iter().map(|(l, m)| Ok((resolve(atlas, l)?, m))).collect()
}

/// Number of blocks counted with multiplicity.
pub fn block_count(d: &DesignInstance) -> Result<BigUint> {
    match &d.blocks {
        Blocks::Explicit(b) => Ok(b.iter().map(|(_, m)| BigUint::from(*m)).sum()),
        Blocks::Implicit(imp) => {
            let atlas = Atlas::new(imp.m, imp.l, d.q)?;
            let mut total = BigUint::default();
            for (label, mult) in resolved_labels(&atlas, imp)? {
                total += atlas.orbit_size(&label)? * mult;
            }
            Ok(total)
        }
    }
}

/// Every block with its multiplicity. Orbits are expanded by closure under
/// generators of GL(m, q^l); each expansion is checked against the orbit
/// size formula.
pub fn expand(d: &DesignInstance) -> Result<Vec<(Subspace, u64)>> {
    match &d.blocks {
        Blocks::Explicit(b) => Ok(b.clone()),
        Blocks::Implicit(imp) => {
            let atlas = Atlas::new(imp.m, imp.l, d.q)?;
            let labels = resolved_labels(&atlas, imp)?;
            let mut total = 0u64;
            for (label, _) in &labels {
                let size = atlas.orbit_size(label)?;
                total = total.saturating_add(size.to_u64().unwrap_or(u64::MAX));
            }
            if total > EXPANSION_LIMIT {
                return Err(Error::BudgetExceeded { budget: EXPANSION_LIMIT, needed: total as u128 });
            }
            let mut out = Vec::with_capacity(total as usize);
            for (label, mult) in &labels {
                let start = atlas.realize(label)?;
                let orbit = gl::orbit(atlas.tower(), &start);
                let want = atlas.orbit_size(label)?;
                if BigUint::from(orbit.len()) != want {
                    return Err(Error::Precondition(format!(
                        "orbit of {} has {} blocks, expected {want}",
                        label.short(),
                        orbit.len()
                    )));
                }
                out.extend(orbit.into_iter().map(|b| (b, *mult)));
            }
            Ok(out)
        }
    }
}

/// The same design with blocks listed explicitly.
pub fn to_explicit(d: &DesignInstance) -> Result<DesignInstance> {
    let blocks = expand(d)?;
    let mut out = DesignInstance::explicit(d.q, d.v, d.kind, d.dims.clone(), d.claimed_lambda.clone(), blocks);
    out.class_lambdas = d.class_lambdas.clone();
    out.groups = d.groups.clone();
    if out.kind == Kind::Design && out.dims.len() > 1 {
        out.kind = Kind::Pbd;
    }
    Ok(out)
}
