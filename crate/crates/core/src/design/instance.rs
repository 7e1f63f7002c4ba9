//! Design instances and the JSON design-file format (version 1).

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::prime_power;
use crate::io::{de_biguint, de_opt_biguint, ser_biguint, ser_opt_biguint};
use crate::singer::orbit_table;
use crate::space::Space;
use crate::subspace::{gaussian_binomial, Subspace};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Group divisible design: pairs inside a group are uncovered.
    Gdd,
    /// Subspace 2-design with a single block dimension.
    Design,
    /// 2-(v, K, λ) design.
    Pbd,
    /// Per-class coverage: λ_inside on pairs inside groups, λ_across elsewhere.
    Mixed,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Gdd => "gdd",
            Kind::Design => "design",
            Kind::Pbd => "pbd",
            Kind::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassLambdas {
    #[serde(serialize_with = "ser_biguint", deserialize_with = "de_biguint")]
    pub inside: BigUint,
    #[serde(serialize_with = "ser_biguint", deserialize_with = "de_biguint")]
    pub across: BigUint,
}

/// A (k, k-1) orbit selected by the H-orbit of ⟨1, u_1, …, u_r⟩.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TightOrbit {
    pub r: usize,
    pub u: u32,
    pub rep: Subspace,
    pub multiplicity: u64,
}

/// The orbit of W·Y_1 for an H-orbit representative W of GF(q)^l.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LineOrbit {
    pub rep: Subspace,
    pub multiplicity: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplicitBlocks {
    pub m: usize,
    pub l: usize,
    pub k: usize,
    pub labels: Vec<TightOrbit>,
    pub omega_kk: bool,
    pub line_orbits: Vec<LineOrbit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Blocks {
    /// Sorted, merged (block, multiplicity) pairs.
    Explicit(Vec<(Subspace, u64)>),
    /// Union of G-orbits under GL(m, q^l).
    Implicit(ImplicitBlocks),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignInstance {
    pub q: u32,
    pub v: usize,
    pub kind: Kind,
    pub dims: Vec<usize>,
    pub claimed_lambda: Option<BigUint>,
    pub class_lambdas: Option<ClassLambdas>,
    pub groups: Option<Vec<Subspace>>,
    pub blocks: Blocks,
}

/// Sorts blocks and merges repeats by adding multiplicities.
pub fn merge_blocks(blocks: impl IntoIterator<Item = (Subspace, u64)>) -> Vec<(Subspace, u64)> {
    let mut map: BTreeMap<Subspace, u64> = BTreeMap::new();
    for (b, m) in blocks {
        *map.entry(b).or_default() += m;
    }
    map.into_iter().filter(|(_, m)| *m > 0).collect()
}

impl DesignInstance {
    pub fn space(&self) -> Result<Space> {
        Space::new(self.q, self.v)
    }

    /// An explicit instance; blocks are merged and the dimension set is
    /// taken from the blocks when `dims` is empty.
    pub fn explicit(
        q: u32,
        v: usize,
        kind: Kind,
        dims: Vec<usize>,
        claimed_lambda: Option<BigUint>,
        blocks: impl IntoIterator<Item = (Subspace, u64)>,
    ) -> DesignInstance {
        let blocks = merge_blocks(blocks);
        let mut dims = dims;
        if dims.is_empty() {
            dims = blocks.iter().map(|(b, _)| b.dim()).collect();
        }
        dims.sort_unstable();
        dims.dedup();
        DesignInstance { q, v, kind, dims, claimed_lambda, class_lambdas: None, groups: None, blocks: Blocks::Explicit(blocks) }
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self.blocks, Blocks::Implicit(_))
    }

    /// True when no block repeats. Implicit designs are unions of distinct
    /// orbits, hence simple when every multiplicity is 1.
    pub fn is_simple(&self) -> bool {
        match &self.blocks {
            Blocks::Explicit(b) => b.iter().all(|(_, m)| *m == 1),
            Blocks::Implicit(imp) => {
                imp.labels.iter().all(|t| t.multiplicity == 1) && imp.line_orbits.iter().all(|t| t.multiplicity == 1)
            }
        }
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let space = self.space()?;
        if prime_power(self.q as u64).is_none() {
            return Err(Error::NotPrimePower(self.q as u64));
        }
        if self.dims.is_empty() || self.dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("K must be a nonempty strictly increasing list".into()));
        }
        if self.dims.iter().any(|&k| k < 2 || k > self.v) {
            return Err(Error::Format(format!("block dimensions must lie in 2..={}", self.v)));
        }
        if let Some(groups) = &self.groups {
            check_partition(&space, groups)?;
        }
        match self.kind {
            Kind::Gdd if self.groups.is_none() => return Err(Error::Format("a gdd needs groups".into())),
            Kind::Mixed if self.groups.is_none() || self.class_lambdas.is_none() => {
                return Err(Error::Format("a mixed instance needs groups and class_lambdas".into()))
            }
            Kind::Design if self.dims.len() != 1 => {
                return Err(Error::Format("a design has a single block dimension".into()))
            }
            _ => {}
        }
        match &self.blocks {
            Blocks::Explicit(blocks) => {
                for w in blocks.windows(2) {
                    if w[0].0 >= w[1].0 {
                        return Err(Error::Format("explicit blocks must be sorted and distinct".into()));
                    }
                }
                for (b, m) in blocks {
                    if b.q() != self.q || b.ambient_dim() != self.v {
                        return Err(Error::DimensionMismatch { expected: self.v, got: b.ambient_dim() });
                    }
                    if !self.dims.contains(&b.dim()) {
                        return Err(Error::Format(format!("block of dimension {} not in K", b.dim())));
                    }
                    if *m == 0 {
                        return Err(Error::Format("multiplicities must be positive".into()));
                    }
                }
            }
            Blocks::Implicit(imp) => self.validate_implicit(imp)?,
        }
        Ok(())
    }

    fn validate_implicit(&self, imp: &ImplicitBlocks) -> Result<()> {
        let (m, l, k) = (imp.m, imp.l, imp.k);
        if m * l != self.v || m == 0 || l == 0 {
            return Err(Error::Format(format!("implicit blocks need m*l = v; got m={m}, l={l}, v={}", self.v)));
        }
        let has_blocks = !imp.labels.is_empty() || imp.omega_kk;
        if has_blocks && !self.dims.contains(&k) {
            return Err(Error::Format(format!("k = {k} not in K")));
        }
        if imp.omega_kk && k > m {
            return Err(Error::Format(format!("the ({k},{k}) orbit needs k <= m = {m}")));
        }
        if has_blocks && (k < 3 || k > m + 1) {
            return Err(Error::Format(format!("(k,k-1) labels need 3 <= k <= m+1; got k={k}, m={m}")));
        }
        for w in imp.labels.windows(2) {
            if (w[0].r, w[0].u, &w[0].rep) >= (w[1].r, w[1].u, &w[1].rep) {
                return Err(Error::Format("labels must be sorted by (r, u, rep) and distinct".into()));
            }
        }
        for t in &imp.labels {
            if t.r == 0 || t.r >= k || t.rep.dim() != t.r + 1 || t.multiplicity == 0 {
                return Err(Error::Format(format!("bad label r={} with a {}-dimensional rep", t.r, t.rep.dim())));
            }
            check_rep(self.q, l, &t.rep, Some(t.u))?;
        }
        for w in imp.line_orbits.windows(2) {
            if w[0].rep >= w[1].rep {
                return Err(Error::Format("line orbits must be sorted and distinct".into()));
            }
        }
        for o in &imp.line_orbits {
            if !self.dims.contains(&o.rep.dim()) || o.multiplicity == 0 {
                return Err(Error::Format(format!("line orbit of dimension {} not in K", o.rep.dim())));
            }
            check_rep(self.q, l, &o.rep, None)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        crate::io::to_json(&self.to_file())
    }

    /// Strict reader: rejects anything that is not in canonical form.
    pub fn from_json(text: &str) -> Result<DesignInstance> {
        let file: FileDesign = serde_json::from_str(text)?;
        let d = DesignInstance::from_file(file)?;
        d.validate()?;
        Ok(d)
    }

    pub fn read(path: &std::path::Path) -> Result<DesignInstance> {
        DesignInstance::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    fn to_file(&self) -> FileDesign {
        let blocks = match &self.blocks {
            Blocks::Explicit(b) => FileBlocks::Explicit(
                b.iter().map(|(s, m)| FileBlock { basis: s.to_coords(), multiplicity: *m }).collect(),
            ),
            Blocks::Implicit(imp) => FileBlocks::Implicit(FileImplicit {
                m: imp.m,
                l: imp.l,
                k: imp.k,
                labels: imp
                    .labels
                    .iter()
                    .map(|t| FileLabel { r: t.r, u: t.u, rep: t.rep.to_coords(), multiplicity: t.multiplicity })
                    .collect(),
                omega_kk: imp.omega_kk,
                line_orbits: imp
                    .line_orbits
                    .iter()
                    .map(|o| FileLine { rep: o.rep.to_coords(), multiplicity: o.multiplicity })
                    .collect(),
            }),
        };
        FileDesign {
            format_version: FORMAT_VERSION,
            q: self.q,
            v: self.v,
            kind: self.kind,
            k_set: self.dims.clone(),
            claimed_lambda: self.claimed_lambda.clone(),
            class_lambdas: self.class_lambdas.clone(),
            groups: self.groups.as_ref().map(|g| g.iter().map(|s| s.to_coords()).collect()),
            blocks,
        }
    }

    fn from_file(f: FileDesign) -> Result<DesignInstance> {
        if f.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format_version {}", f.format_version)));
        }
        let space = Space::new(f.q, f.v)?;
        let groups = f
            .groups
            .map(|gs| gs.iter().map(|g| Subspace::from_coords(&space, g, true)).collect::<Result<Vec<_>>>())
            .transpose()?;
        if let Some(gs) = &groups {
            if gs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format("groups must be sorted and distinct".into()));
            }
        }
        let blocks = match f.blocks {
            FileBlocks::Explicit(bs) => Blocks::Explicit(
                bs.iter()
                    .map(|b| Ok((Subspace::from_coords(&space, &b.basis, true)?, b.multiplicity)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            FileBlocks::Implicit(imp) => {
                let small = Space::new(f.q, imp.l)?;
                Blocks::Implicit(ImplicitBlocks {
                    m: imp.m,
                    l: imp.l,
                    k: imp.k,
                    labels: imp
                        .labels
                        .iter()
                        .map(|t| {
                            Ok(TightOrbit {
                                r: t.r,
                                u: t.u,
                                rep: Subspace::from_coords(&small, &t.rep, true)?,
                                multiplicity: t.multiplicity,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                    omega_kk: imp.omega_kk,
                    line_orbits: imp
                        .line_orbits
                        .iter()
                        .map(|o| Ok(LineOrbit { rep: Subspace::from_coords(&small, &o.rep, true)?, multiplicity: o.multiplicity }))
                        .collect::<Result<Vec<_>>>()?,
                })
            }
        };
        Ok(DesignInstance {
            q: f.q,
            v: f.v,
            kind: f.kind,
            dims: f.k_set,
            claimed_lambda: f.claimed_lambda,
            class_lambdas: f.class_lambdas,
            groups,
            blocks,
        })
    }
}

/// `rep` must be the canonical representative of its H-orbit on GF(q)^l.
fn check_rep(q: u32, l: usize, rep: &Subspace, u: Option<u32>) -> Result<()> {
    let table = orbit_table(q, l, rep.dim())?;
    let pos = table
        .position_of_rep(rep)
        .ok_or_else(|| Error::Format(format!("{rep:?} is not a canonical H-orbit representative")))?;
    if let Some(u) = u {
        if table.orbits[pos].u != u {
            return Err(Error::Format(format!("{rep:?} has stabilizer parameter {}, not {u}", table.orbits[pos].u)));
        }
    }
    Ok(())
}

/// Groups must pairwise meet trivially and together cover every point.
pub fn check_partition(space: &Space, groups: &[Subspace]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for g in groups {
        if g.q() != space.q() || g.ambient_dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: g.ambient_dim() });
        }
        for p in g.points(space) {
            if !seen.insert(p) {
                return Err(Error::Format(format!("groups overlap in the point {:?}", space.unpack(p))));
            }
        }
    }
    let total = gaussian_binomial(space.dim() as u64, 1, space.q() as u64);
    if BigUint::from(seen.len()) != total {
        return Err(Error::Format(format!("groups cover {} of {total} points", seen.len())));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDesign {
    format_version: u32,
    q: u32,
    v: usize,
    kind: Kind,
    #[serde(rename = "K")]
    k_set: Vec<usize>,
    #[serde(serialize_with = "ser_opt_biguint", deserialize_with = "de_opt_biguint", default)]
    claimed_lambda: Option<BigUint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    class_lambdas: Option<ClassLambdas>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    groups: Option<Vec<Vec<Vec<u32>>>>,
    blocks: FileBlocks,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FileBlocks {
    Explicit(Vec<FileBlock>),
    Implicit(FileImplicit),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileBlock {
    basis: Vec<Vec<u32>>,
    multiplicity: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileImplicit {
    m: usize,
    l: usize,
    k: usize,
    labels: Vec<FileLabel>,
    omega_kk: bool,
    #[serde(default)]
    line_orbits: Vec<FileLine>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLabel {
    r: usize,
    u: u32,
    rep: Vec<Vec<u32>>,
    multiplicity: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLine {
    rep: Vec<Vec<u32>>,
    multiplicity: u64,
}
