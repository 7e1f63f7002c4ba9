//! Coverage verification: every 2-subspace is counted against the λ of its
//! class, either by a full sweep over all blocks or on seeded random samples.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::expand::{expand, resolved_labels};
use super::instance::{merge_blocks, Blocks, DesignInstance, Kind};
use crate::atlas::{Atlas, OrbitLabel};
use crate::error::{Error, Result};
use crate::io::ser_biguint;
use crate::space::Space;
use crate::subspace::{
    coefficient_patterns, enumerate_subspaces, gaussian_binomial, intersection_dim, subspaces_within, superspaces,
    Subspace,
};

/// Cap on the number of witnesses kept in a report.
pub const MAX_WITNESSES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Full,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairClass {
    /// Both points in one group.
    Inside,
    /// Points in different groups.
    Across,
    /// No group structure.
    All,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub class: PairClass,
    /// Pairs in the class (full mode) or samples drawn from it.
    pub pairs: u64,
    pub expected_lambda: Option<u64>,
    pub observed_lambda: Option<u64>,
    /// coverage count -> number of pairs
    pub histogram: BTreeMap<u64, u64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairWitness {
    pub pair: Vec<Vec<u32>>,
    pub class: PairClass,
    pub count: u64,
    pub expected: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupWitness {
    pub block: Vec<Vec<u32>>,
    pub group: Vec<Vec<u32>>,
    pub intersection_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub kind: Kind,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(serialize_with = "ser_biguint")]
    pub blocks: BigUint,
    /// Distinct blocks (full mode) or blocks touched by the samples.
    pub blocks_examined: u64,
    pub simple: bool,
    pub classes: Vec<ClassReport>,
    pub group_violations: u64,
    pub group_witnesses: Vec<GroupWitness>,
    pub pair_witnesses: Vec<PairWitness>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn class(&self, c: PairClass) -> Option<&ClassReport> {
        self.classes.iter().find(|r| r.class == c)
    }

    /// λ of the across (or only) class when uniform.
    pub fn lambda(&self) -> Option<u64> {
        self.class(PairClass::Across).or(self.class(PairClass::All)).and_then(|c| c.observed_lambda)
    }

    /// One line per class, for terminals and logs.
    pub fn summary(&self) -> String {
        let mut s = format!("{} {} verification: {}\n", self.kind.as_str(), self.mode, if self.passed { "PASS" } else { "FAIL" });
        for c in &self.classes {
            let lam = c.observed_lambda.map_or("non-uniform".to_string(), |l| format!("λ={l}"));
            s.push_str(&format!("  {:?}: {} pairs, {}, histogram {:?}\n", c.class, c.pairs, lam, c.histogram));
        }
        if self.group_violations > 0 {
            s.push_str(&format!("  {} blocks meet a group in dimension >= 2\n", self.group_violations));
        }
        s
    }
}

pub(crate) fn pair_key(s: &Subspace) -> u128 {
    debug_assert_eq!(s.dim(), 2);
    (s.rows()[0] as u128) << 64 | s.rows()[1] as u128
}

fn pair_of_key(space: &Space, key: u128) -> Subspace {
    Subspace::span(space, &[(key >> 64) as u64, key as u64])
}

/// Coverage counts of every 2-subspace lying in at least one block.
#[derive(Clone, Debug)]
pub struct PairCounts {
    space: Space,
    entries: Vec<(u128, u64)>,
}

impl PairCounts {
    pub fn count(&self, pair: &Subspace) -> u64 {
        let key = pair_key(pair);
        self.entries.binary_search_by_key(&key, |e| e.0).map_or(0, |i| self.entries[i].1)
    }

    pub fn covered(&self) -> impl Iterator<Item = (Subspace, u64)> + '_ {
        self.entries.iter().map(|&(k, c)| (pair_of_key(&self.space, k), c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Sweeps every block's internal 2-subspaces; parallel over blocks.
pub fn count_pairs(space: &Space, blocks: &[(Subspace, u64)]) -> Result<PairCounts> {
    let mut patterns: HashMap<usize, Vec<Vec<Vec<u32>>>> = HashMap::new();
    for (b, _) in blocks {
        if let std::collections::hash_map::Entry::Vacant(e) = patterns.entry(b.dim()) {
            e.insert(coefficient_patterns(space.q(), b.dim(), 2)?);
        }
    }
    let mut raw: Vec<(u128, u64)> = blocks
        .par_iter()
        .flat_map_iter(|(b, m)| {
            let pats = &patterns[&b.dim()];
            subspaces_within(space, b, pats).map(move |p| (pair_key(&p), *m)).collect::<Vec<_>>()
        })
        .collect();
    raw.par_sort_unstable_by_key(|e| e.0);
    let mut entries: Vec<(u128, u64)> = Vec::new();
    for (k, m) in raw {
        match entries.last_mut() {
            Some(last) if last.0 == k => last.1 += m,
            _ => entries.push((k, m)),
        }
    }
    Ok(PairCounts { space: *space, entries })
}

/// Coverage counts of a design, expanding implicit blocks.
pub fn pair_counts(d: &DesignInstance) -> Result<PairCounts> {
    let space = d.space()?;
    count_pairs(&space, &expand(d)?)
}

struct Groups {
    of_point: HashMap<u64, u32>,
    list: Vec<Subspace>,
}

impl Groups {
    fn new(space: &Space, groups: &[Subspace]) -> Groups {
        let mut of_point = HashMap::new();
        for (i, g) in groups.iter().enumerate() {
            for p in g.points(space) {
                of_point.insert(p, i as u32);
            }
        }
        Groups { of_point, list: groups.to_vec() }
    }

    fn class(&self, space: &Space, pair: &Subspace) -> PairClass {
        let a = self.of_point[&space.normalize(pair.rows()[0])];
        let b = self.of_point[&space.normalize(pair.rows()[1])];
        if a == b {
            PairClass::Inside
        } else {
            PairClass::Across
        }
    }

    /// A group meeting `block` in dimension at least 2.
    fn violation(&self, space: &Space, block: &Subspace) -> Option<usize> {
        let mut seen = std::collections::HashSet::new();
        block.points(space).into_iter().map(|p| self.of_point[&p] as usize).find(|&g| !seen.insert(g))
    }

    fn witness(&self, block: &Subspace, g: usize) -> GroupWitness {
        GroupWitness {
            block: block.to_coords(),
            group: self.list[g].to_coords(),
            intersection_dim: intersection_dim(block, &self.list[g]).unwrap_or(0),
        }
    }
}

fn to_u64(x: &BigUint) -> u64 {
    x.to_u64().unwrap_or(u64::MAX)
}

/// Expected λ per class for this kind of instance.
fn expectations(d: &DesignInstance) -> Vec<(PairClass, Option<u64>)> {
    match d.kind {
        Kind::Gdd => vec![(PairClass::Inside, Some(0)), (PairClass::Across, d.claimed_lambda.as_ref().map(to_u64))],
        Kind::Mixed => {
            let cl = d.class_lambdas.as_ref().expect("validated");
            vec![(PairClass::Inside, Some(to_u64(&cl.inside))), (PairClass::Across, Some(to_u64(&cl.across)))]
        }
        Kind::Design | Kind::Pbd => vec![(PairClass::All, d.claimed_lambda.as_ref().map(to_u64))],
    }
}

fn uses_groups(d: &DesignInstance) -> bool {
    matches!(d.kind, Kind::Gdd | Kind::Mixed)
}

fn class_report(class: PairClass, pairs: u64, expected: Option<u64>, histogram: BTreeMap<u64, u64>) -> ClassReport {
    let observed = if histogram.len() == 1 { histogram.keys().next().copied() } else { None };
    let passed = match (expected, histogram.len()) {
        (_, 0) => true,
        (Some(l), _) => histogram.keys().all(|&c| c == l),
        (None, 1) => observed.unwrap() > 0,
        (None, _) => false,
    };
    ClassReport { class, pairs, expected_lambda: expected, observed_lambda: observed, histogram, passed }
}

/// Count against which witnesses are judged: the expectation, or the most
/// frequent count when no λ is claimed.
fn reference(expected: Option<u64>, histogram: &BTreeMap<u64, u64>) -> Option<u64> {
    expected.or_else(|| histogram.iter().max_by_key(|(c, n)| (**n, std::cmp::Reverse(**c))).map(|(c, _)| *c))
}

pub fn verify(d: &DesignInstance, mode: Mode) -> Result<VerifyReport> {
    d.validate()?;
    match mode {
        Mode::Full => verify_full(d),
        Mode::Sampled { samples, seed } => verify_sampled(d, samples, seed),
    }
}

/// Verification of a GDD: groups meet blocks in dimension at most 1 and
/// every pair across groups is covered λ times.
pub fn verify_gdd(d: &DesignInstance, mode: Mode) -> Result<VerifyReport> {
    if d.kind != Kind::Gdd {
        return Err(Error::Precondition(format!("expected a gdd, got {}", d.kind.as_str())));
    }
    verify(d, mode)
}

pub fn verify_design(d: &DesignInstance, mode: Mode) -> Result<VerifyReport> {
    if !matches!(d.kind, Kind::Design | Kind::Pbd) {
        return Err(Error::Precondition(format!("expected a design or pbd, got {}", d.kind.as_str())));
    }
    verify(d, mode)
}

fn verify_full(d: &DesignInstance) -> Result<VerifyReport> {
    let space = d.space()?;
    let q = space.q() as u64;
    let blocks = merge_blocks(expand(d)?);
    let total_blocks: BigUint = blocks.iter().map(|(_, m)| BigUint::from(*m)).sum();
    let simple = blocks.iter().all(|(_, m)| *m == 1);
    let groups = if uses_groups(d) { d.groups.as_ref().map(|g| Groups::new(&space, g)) } else { None };

    let mut group_violations = 0;
    let mut group_witnesses = Vec::new();
    if let (Some(g), Kind::Gdd) = (&groups, d.kind) {
        let bad: Vec<(usize, usize)> = blocks
            .par_iter()
            .enumerate()
            .filter_map(|(i, (b, _))| g.violation(&space, b).map(|gi| (i, gi)))
            .collect();
        group_violations = bad.len() as u64;
        group_witnesses = bad.iter().take(MAX_WITNESSES).map(|&(i, gi)| g.witness(&blocks[i].0, gi)).collect();
    }

    let counts = count_pairs(&space, &blocks)?;
    let class_of = |p: &Subspace| groups.as_ref().map_or(PairClass::All, |g| g.class(&space, p));

    let mut totals: BTreeMap<PairClass, u64> = BTreeMap::new();
    let all = to_u64(&gaussian_binomial(space.dim() as u64, 2, q));
    match (&groups, &d.groups) {
        (Some(_), Some(gs)) => {
            let inside: u64 = gs.iter().map(|g| to_u64(&gaussian_binomial(g.dim() as u64, 2, q))).sum();
            totals.insert(PairClass::Inside, inside);
            totals.insert(PairClass::Across, all - inside);
        }
        _ => {
            totals.insert(PairClass::All, all);
        }
    }
    let mut hist: BTreeMap<PairClass, BTreeMap<u64, u64>> = totals.keys().map(|&c| (c, BTreeMap::new())).collect();
    let classes: Vec<PairClass> = counts.entries.par_iter().map(|&(k, _)| class_of(&pair_of_key(&space, k))).collect();
    for (&(_, c), class) in counts.entries.iter().zip(&classes) {
        *hist.get_mut(class).unwrap().entry(c).or_default() += 1;
    }
    for (class, h) in hist.iter_mut() {
        let seen: u64 = h.values().sum();
        if totals[class] > seen {
            h.insert(0, totals[class] - seen);
        }
    }

    let expected: BTreeMap<PairClass, Option<u64>> = expectations(d).into_iter().collect();
    let refs: BTreeMap<PairClass, Option<u64>> =
        hist.iter().map(|(c, h)| (*c, reference(expected[c], h))).collect();
    let mut pair_witnesses = Vec::new();
    for ((k, c), class) in counts.entries.iter().zip(&classes) {
        if pair_witnesses.len() >= MAX_WITNESSES {
            break;
        }
        if refs[class].is_some_and(|r| r != *c) {
            pair_witnesses.push(PairWitness {
                pair: pair_of_key(&space, *k).to_coords(),
                class: *class,
                count: *c,
                expected: refs[class],
            });
        }
    }
    let missing_matter = hist.iter().any(|(c, h)| h.contains_key(&0) && refs[c].is_some_and(|r| r != 0));
    if missing_matter && pair_witnesses.len() < MAX_WITNESSES {
        for p in enumerate_subspaces(&space, 2) {
            if pair_witnesses.len() >= MAX_WITNESSES {
                break;
            }
            let class = class_of(&p);
            if refs[&class].is_some_and(|r| r != 0) && counts.count(&p) == 0 {
                pair_witnesses.push(PairWitness { pair: p.to_coords(), class, count: 0, expected: refs[&class] });
            }
        }
    }

    let classes: Vec<ClassReport> =
        hist.into_iter().map(|(c, h)| class_report(c, totals[&c], expected[&c], h)).collect();
    let passed = group_violations == 0 && classes.iter().all(|c| c.passed);
    Ok(VerifyReport {
        kind: d.kind,
        mode: "full",
        samples: None,
        seed: None,
        blocks: total_blocks,
        blocks_examined: blocks.len() as u64,
        simple,
        classes,
        group_violations,
        group_witnesses,
        pair_witnesses,
        passed,
    })
}

/// A uniformly random 2-subspace: span of a random ordered pair of
/// independent vectors.
fn random_pair<R: Rng>(space: &Space, rng: &mut R) -> Subspace {
    let n = (space.q() as u64).pow(space.dim() as u32);
    let vec_at = |mut x: u64| {
        let mut row = 0u64;
        for c in (0..space.dim()).rev() {
            row = space.set(row, c, (x % space.q() as u64) as u32);
            x /= space.q() as u64;
        }
        row
    };
    loop {
        let a = vec_at(rng.gen_range(1..n));
        let b = vec_at(rng.gen_range(1..n));
        let s = Subspace::span(space, &[a, b]);
        if s.dim() == 2 {
            return s;
        }
    }
}

struct SampleOutcome {
    count: u64,
    touched: Vec<Subspace>,
}

fn verify_sampled(d: &DesignInstance, samples: u64, seed: u64) -> Result<VerifyReport> {
    let space = d.space()?;
    if space.dim() < 2 {
        return Err(Error::InvalidParameters("sampling needs v >= 2".into()));
    }
    let groups = if uses_groups(d) { d.groups.as_ref().map(|g| Groups::new(&space, g)) } else { None };
    let class_of = |p: &Subspace| groups.as_ref().map_or(PairClass::All, |g| g.class(&space, p));
    // a gdd is sampled on pairs across groups only
    let only_across = d.kind == Kind::Gdd;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = Vec::with_capacity(samples as usize);
    while (drawn.len() as u64) < samples {
        let p = random_pair(&space, &mut rng);
        if only_across && class_of(&p) == PairClass::Inside {
            continue;
        }
        drawn.push(p);
    }

    let (outcomes, total_blocks, simple): (Vec<SampleOutcome>, BigUint, bool) = match &d.blocks {
        Blocks::Explicit(blocks) => {
            let counts = count_pairs(&space, blocks)?;
            // explicit blocks are cheap to scan, so every block counts as touched
            let mut outcomes: Vec<SampleOutcome> =
                drawn.iter().map(|p| SampleOutcome { count: counts.count(p), touched: Vec::new() }).collect();
            if let Some(first) = outcomes.first_mut() {
                first.touched = blocks.iter().map(|(b, _)| b.clone()).collect();
            }
            let total = blocks.iter().map(|(_, m)| BigUint::from(*m)).sum();
            (outcomes, total, blocks.iter().all(|(_, m)| *m == 1))
        }
        Blocks::Implicit(imp) => {
            let atlas = Atlas::new(imp.m, imp.l, d.q)?;
            let labels: HashMap<OrbitLabel, u64> = resolved_labels(&atlas, imp)?.into_iter().collect();
            let mut dims: Vec<usize> = labels.keys().map(|l| l.dim()).collect();
            dims.sort_unstable();
            dims.dedup();
            let outcomes = drawn
                .par_iter()
                .map(|p| -> Result<SampleOutcome> {
                    let mut count = 0;
                    let mut touched = Vec::new();
                    for &k in &dims {
                        for w in superspaces(&space, p, k)? {
                            let label = match atlas.orbit_label(&w) {
                                Ok(l) => l,
                                Err(Error::Unclassified { .. }) => continue,
                                Err(e) => return Err(e),
                            };
                            if let Some(m) = labels.get(&label) {
                                count += m;
                                touched.push(w);
                            }
                        }
                    }
                    Ok(SampleOutcome { count, touched })
                })
                .collect::<Result<Vec<_>>>()?;
            (outcomes, super::expand::block_count(d)?, d.is_simple())
        }
    };

    let mut group_violations = 0;
    let mut group_witnesses = Vec::new();
    let mut examined = std::collections::BTreeSet::new();
    for o in &outcomes {
        for b in &o.touched {
            if !examined.insert(b.clone()) {
                continue;
            }
            if let (Some(g), Kind::Gdd) = (&groups, d.kind) {
                if let Some(gi) = g.violation(&space, b) {
                    group_violations += 1;
                    if group_witnesses.len() < MAX_WITNESSES {
                        group_witnesses.push(g.witness(b, gi));
                    }
                }
            }
        }
    }

    let expected: BTreeMap<PairClass, Option<u64>> = expectations(d).into_iter().collect();
    let mut hist: BTreeMap<PairClass, BTreeMap<u64, u64>> = BTreeMap::new();
    let mut sampled: BTreeMap<PairClass, u64> = BTreeMap::new();
    let pair_classes: Vec<PairClass> = drawn.iter().map(class_of).collect();
    for (o, c) in outcomes.iter().zip(&pair_classes) {
        *hist.entry(*c).or_default().entry(o.count).or_default() += 1;
        *sampled.entry(*c).or_default() += 1;
    }
    let refs: BTreeMap<PairClass, Option<u64>> = hist.iter().map(|(c, h)| (*c, reference(expected[c], h))).collect();
    let pair_witnesses: Vec<PairWitness> = drawn
        .iter()
        .zip(&outcomes)
        .zip(&pair_classes)
        .filter(|((_, o), c)| refs[*c].is_some_and(|r| r != o.count))
        .take(MAX_WITNESSES)
        .map(|((p, o), c)| PairWitness { pair: p.to_coords(), class: *c, count: o.count, expected: refs[c] })
        .collect();
    let classes: Vec<ClassReport> =
        hist.into_iter().map(|(c, h)| class_report(c, sampled[&c], expected[&c], h)).collect();
    let passed = group_violations == 0 && classes.iter().all(|c| c.passed);
    Ok(VerifyReport {
        kind: d.kind,
        mode: "sampled",
        samples: Some(samples),
        seed: Some(seed),
        blocks: total_blocks,
        blocks_examined: examined.len() as u64,
        simple,
        classes,
        group_violations,
        group_witnesses,
        pair_witnesses,
        passed,
    })
}
