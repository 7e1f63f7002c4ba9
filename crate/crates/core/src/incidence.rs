//! Orbit incidence matrices: the closed form of A_k, brute-force entries
//! and their comparison.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::atlas::{Atlas, OrbitLabel};
use crate::error::{Error, Result};
use crate::singer::h_incidence_matrix;
use crate::subspace::{gaussian_binomial, superspaces};

/// A contiguous run of rows or columns sharing a block name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSpan {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncidenceBlockMatrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub row_blocks: Vec<BlockSpan>,
    pub col_blocks: Vec<BlockSpan>,
    #[serde(serialize_with = "crate::io::ser_biguint_matrix")]
    pub entries: Vec<Vec<BigUint>>,
    #[serde(skip)]
    pub row_orbits: Vec<OrbitLabel>,
    #[serde(skip)]
    pub col_orbits: Vec<OrbitLabel>,
}

impl IncidenceBlockMatrix {
    pub fn single_block(row_labels: Vec<String>, col_labels: Vec<String>, entries: Vec<Vec<BigUint>>) -> Self {
        let row_blocks = vec![BlockSpan { name: "rows".into(), start: 0, len: row_labels.len() }];
        let col_blocks = vec![BlockSpan { name: "cols".into(), start: 0, len: col_labels.len() }];
        IncidenceBlockMatrix {
            row_labels,
            col_labels,
            row_blocks,
            col_blocks,
            entries,
            row_orbits: Vec::new(),
            col_orbits: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.entries.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    /// Entries as machine integers, for solvers.
    pub fn to_u128(&self) -> Result<Vec<Vec<u128>>> {
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| x.to_u128().ok_or_else(|| Error::InvalidParameters(format!("entry {x} too large"))))
                    .collect()
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.col_labels {
            out.push(',');
            out.push_str(&csv_field(c));
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.entries) {
            out.push_str(&csv_field(label));
            for x in row {
                out.push(',');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn qp(q: u32, e: usize) -> BigUint {
    BigUint::from(q).pow(e as u32)
}

fn prod(range: impl Iterator<Item = BigUint>) -> BigUint {
    range.fold(BigUint::from(1u32), |a, b| a * b)
}

fn exact(num: BigUint, den: BigUint) -> BigUint {
    let (d, r) = num.div_rem(&den);
    assert!(r.is_zero(), "closed form left remainder: {num} / {den}");
    d
}

fn check_params(m: usize, l: usize, k: usize) -> Result<()> {
    if k < 3 || k > (m + 1).min(l) {
        return Err(Error::InvalidParameters(format!("A_k needs 3 <= k <= min(m+1, l); got m={m}, l={l}, k={k}")));
    }
    Ok(())
}

/// The diagonal value e of the E block.
pub fn e_value(m: usize, l: usize, k: usize, q: u32) -> BigUint {
    let qml = qp(q, m * l);
    let qk = qp(q, k);
    exact(prod((1..k - 1).map(|i| &qml - qp(q, i * l))), prod((2..k).map(|i| &qk - qp(q, i))))
}

/// P-row entry for a (k, k-1), r = 1 column whose H-orbit has stabilizer
/// GF(q^u)*.
pub fn p_value(m: usize, l: usize, k: usize, q: u32, u: u32) -> BigUint {
    let qml = qp(q, m * l);
    let qk = qp(q, k);
    let q2 = qp(q, 2);
    let lead = (&qk - 1u32) * (&qk - BigUint::from(q)) - (&q2 - 1u32) * (&q2 - BigUint::from(q));
    let num = lead * prod((2..k - 1).map(|i| &qml - qp(q, i * l)));
    let den = (qp(q, u as usize) - 1u32) * prod((2..k).map(|i| &qk - qp(q, i)));
    exact(num, den)
}

/// Q_r entry b_u.
pub fn q_value(m: usize, l: usize, k: usize, q: u32, r: usize, u: u32) -> BigUint {
    let qml = qp(q, m * l);
    let qk = qp(q, k);
    let num = (&qk - 1u32) * (&qk - BigUint::from(q)) * prod((2..k - 1).map(|j| &qml - qp(q, j * l)));
    let den = (qp(q, u as usize) - 1u32) * prod((r + 1..k).map(|j| &qk - qp(q, j)));
    exact(num, den)
}

/// The single R entry (k <= m).
pub fn r_value(m: usize, l: usize, k: usize, q: u32) -> BigUint {
    let c2 = k * (k - 1) / 2;
    let mut num = qp(q, (l - 1) * (c2 - 1));
    let mut den = BigUint::from(1u32);
    for i in 2..k {
        num *= qp(q, (m - i) * l) - 1u32;
        den *= qp(q, k - i) - 1u32;
    }
    exact(num, den)
}

fn block_name(label: &OrbitLabel) -> String {
    match label {
        OrbitLabel::Line { dim, .. } => format!("F{dim}^1"),
        OrbitLabel::Tight { dim, r, .. } => format!("F{dim},{r}^{}", dim - 1),
        OrbitLabel::Full { dim } => format!("F{dim}^{dim}"),
    }
}

fn spans(labels: &[OrbitLabel]) -> Vec<BlockSpan> {
    let mut out: Vec<BlockSpan> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let name = block_name(l);
        match out.last_mut() {
            Some(b) if b.name == name => b.len += 1,
            _ => out.push(BlockSpan { name, start: i, len: 1 }),
        }
    }
    out
}

fn assemble(rows: Vec<OrbitLabel>, cols: Vec<OrbitLabel>, entries: Vec<Vec<BigUint>>) -> IncidenceBlockMatrix {
    IncidenceBlockMatrix {
        row_labels: rows.iter().map(OrbitLabel::short).collect(),
        col_labels: cols.iter().map(OrbitLabel::short).collect(),
        row_blocks: spans(&rows),
        col_blocks: spans(&cols),
        entries,
        row_orbits: rows,
        col_orbits: cols,
    }
}

/// A_k assembled from its closed-form blocks.
pub fn closed_form_a_k(m: usize, l: usize, k: usize, q: u32) -> Result<IncidenceBlockMatrix> {
    check_params(m, l, k)?;
    let atlas = Atlas::new(m, l, q)?;
    let rows = atlas.rows_2()?;
    let cols = atlas.columns(k)?;
    let tilde = h_incidence_matrix(l, 2, k, q)?;
    let e = e_value(m, l, k, q);
    let n_lines = atlas.table(2)?.len();
    let mut entries = vec![vec![BigUint::zero(); cols.len()]; rows.len()];
    for (i, row) in rows.iter().enumerate() {
        for (j, col) in cols.iter().enumerate() {
            entries[i][j] = match (row, col) {
                (OrbitLabel::Line { .. }, OrbitLabel::Line { .. }) => tilde.entries[i][j].clone(),
                (OrbitLabel::Line { rep: a, .. }, OrbitLabel::Tight { r: 1, rep: b, .. }) if a == b => e.clone(),
                (OrbitLabel::Full { .. }, OrbitLabel::Tight { r: 1, u, .. }) => p_value(m, l, k, q, *u),
                (OrbitLabel::Full { .. }, OrbitLabel::Tight { r, u, .. }) => q_value(m, l, k, q, *r, *u),
                (OrbitLabel::Full { .. }, OrbitLabel::Full { .. }) => r_value(m, l, k, q),
                _ => BigUint::zero(),
            };
        }
    }
    debug_assert_eq!(rows.len(), n_lines + 1);
    Ok(assemble(rows, cols, entries))
}

/// Histogram of labels over the k-superspaces of `t`; subspaces outside
/// the classified classes are counted under `None`.
pub fn superspace_label_counts(atlas: &Atlas, t: &crate::Subspace, k: usize) -> Result<HashMap<Option<OrbitLabel>, u64>> {
    let space = *atlas.space();
    let it = superspaces(&space, t, k)?;
    let counts = it
        .par_bridge()
        .fold(HashMap::new, |mut acc: HashMap<Option<OrbitLabel>, u64>, w| {
            let label = match atlas.orbit_label(&w) {
                Ok(l) => Some(l),
                Err(Error::Unclassified { .. }) => None,
                Err(e) => panic!("labelling a superspace failed: {e}"),
            };
            *acc.entry(label).or_default() += 1;
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    Ok(counts)
}

/// |{K' in K^G : T ⊆ K'}| by streaming the superspaces of a realization of T.
pub fn incidence_entry(atlas: &Atlas, t: &OrbitLabel, k: &OrbitLabel) -> Result<BigUint> {
    let real = atlas.realize(t)?;
    let target = atlas.realize(k)?;
    let counts = superspace_label_counts(atlas, &real, target.dim())?;
    Ok(BigUint::from(counts.get(&Some(k.clone())).copied().unwrap_or(0)))
}

/// A_k with every entry computed by brute force.
pub fn brute_force_a_k(m: usize, l: usize, k: usize, q: u32) -> Result<IncidenceBlockMatrix> {
    let report = verify_closed_form(m, l, k, q, u64::MAX)?;
    Ok(report.brute)
}

#[derive(Clone, Debug, Serialize)]
pub struct Discrepancy {
    pub row: String,
    pub col: String,
    #[serde(serialize_with = "crate::io::ser_biguint")]
    pub closed: BigUint,
    #[serde(serialize_with = "crate::io::ser_biguint")]
    pub brute: BigUint,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormReport {
    pub m: usize,
    pub l: usize,
    pub k: usize,
    pub q: u32,
    /// False when the budget only allowed a subset of rows.
    pub complete: bool,
    pub rows_checked: usize,
    pub entries_checked: usize,
    pub flags_streamed: u64,
    /// k-superspaces outside the classified classes (not part of A_k).
    pub unclassified: u64,
    pub discrepancies: Vec<Discrepancy>,
    pub closed: IncidenceBlockMatrix,
    pub brute: IncidenceBlockMatrix,
}

impl ClosedFormReport {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Compares the closed form with brute-force entries. Each row costs
/// [ml-2, k-2]_q superspace labellings; rows are processed (the (2,2) row
/// first) while the running total stays within `budget`.
pub fn verify_closed_form(m: usize, l: usize, k: usize, q: u32, budget: u64) -> Result<ClosedFormReport> {
    let closed = closed_form_a_k(m, l, k, q)?;
    let atlas = Atlas::new(m, l, q)?;
    let per_row = gaussian_binomial((m * l - 2) as u64, (k - 2) as u64, q as u64).to_u64().unwrap_or(u64::MAX);
    let n = closed.n_rows();
    let mut order: Vec<usize> = vec![n - 1];
    order.extend(0..n - 1);
    let mut brute_entries = vec![vec![BigUint::zero(); closed.n_cols()]; n];
    let mut checked = vec![false; n];
    let mut flags = 0u64;
    let mut unclassified = 0u64;
    for i in order {
        if flags.saturating_add(per_row) > budget {
            break;
        }
        flags += per_row;
        let t = atlas.realize(&closed.row_orbits[i])?;
        let counts = superspace_label_counts(&atlas, &t, k)?;
        for (label, c) in counts {
            match label {
                None => unclassified += c,
                Some(label) => match closed.col_orbits.iter().position(|x| *x == label) {
                    Some(j) => brute_entries[i][j] = BigUint::from(c),
                    None => {
                        return Err(Error::Precondition(format!("superspace label {} is not a column", label.short())))
                    }
                },
            }
        }
        checked[i] = true;
    }
    let mut discrepancies = Vec::new();
    let mut entries_checked = 0;
    for i in (0..n).filter(|&i| checked[i]) {
        for j in 0..closed.n_cols() {
            entries_checked += 1;
            if closed.entries[i][j] != brute_entries[i][j] {
                discrepancies.push(Discrepancy {
                    row: closed.row_labels[i].clone(),
                    col: closed.col_labels[j].clone(),
                    closed: closed.entries[i][j].clone(),
                    brute: brute_entries[i][j].clone(),
                });
            }
        }
    }
    let brute = IncidenceBlockMatrix { entries: brute_entries, ..closed.clone() };
    let rows_checked = checked.iter().filter(|&&c| c).count();
    Ok(ClosedFormReport {
        m,
        l,
        k,
        q,
        complete: rows_checked == n,
        rows_checked,
        entries_checked,
        flags_streamed: flags,
        unclassified,
        discrepancies,
        closed,
        brute,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(e_value(2, 3, 3, 2), n(14));
        assert_eq!(p_value(2, 3, 3, 2, 1), n(9));
        assert_eq!(q_value(2, 3, 3, 2, 2, 3), n(6));
        assert_eq!(r_value(3, 3, 3, 2), n(112));
        assert_eq!(p_value(2, 4, 3, 2, 2), n(3));
    }

    #[test]
    fn small_closed_form_shapes() {
        let a = closed_form_a_k(2, 3, 3, 2).unwrap();
        // rows: one line orbit + the (2,2) row; cols: F3^1, F3,1, F3,2
        assert_eq!(a.entries, vec![vec![n(1), n(14), n(0)], vec![n(0), n(9), n(6)]]);
        let a = closed_form_a_k(2, 4, 3, 2).unwrap();
        assert_eq!(a.entries.last().unwrap()[1..4], [n(9), n(9), n(3)]);
        let a = closed_form_a_k(3, 3, 3, 2).unwrap();
        assert_eq!(a.entries.last().unwrap().last().unwrap(), &n(112));
        assert!(closed_form_a_k(2, 3, 4, 2).is_err());
    }

    #[test]
    fn closed_form_matches_brute_force_small() {
        for (m, l, k) in [(2, 3, 3), (2, 4, 3), (3, 3, 3)] {
            let rep = verify_closed_form(m, l, k, 2, u64::MAX).unwrap();
            assert!(rep.complete);
            assert!(rep.passed(), "{:?}", rep.discrepancies);
        }
    }

    #[test]
    fn budget_limits_rows() {
        let rep = verify_closed_form(2, 4, 3, 2, 100).unwrap();
        assert!(!rep.complete);
        assert_eq!(rep.rows_checked, 1);
        assert!(rep.passed());
    }

    #[test]
    fn entries_do_not_depend_on_realization() {
        use rand::SeedableRng;
        let atlas = Atlas::new(2, 3, 2).unwrap();
        let a = closed_form_a_k(2, 3, 3, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for (i, row) in a.row_orbits.iter().enumerate() {
            let t = atlas.realize(row).unwrap();
            for _ in 0..3 {
                let g = crate::gl::random_element(atlas.tower(), &mut rng);
                let counts = superspace_label_counts(&atlas, &g.apply(&t), 3).unwrap();
                for (j, col) in a.col_orbits.iter().enumerate() {
                    assert_eq!(n(counts.get(&Some(col.clone())).copied().unwrap_or(0)), a.entries[i][j]);
                }
            }
        }
        assert_eq!(incidence_entry(&atlas, &a.row_orbits[1], &a.col_orbits[2]).unwrap(), n(6));
    }

    #[test]
    fn double_counting() {
        // orbit size * (row-class 2-subspaces per block) = (row-class size) * entry
        for (m, l, k) in [(2, 3, 3), (2, 4, 3), (3, 3, 3)] {
            let atlas = Atlas::new(m, l, 2).unwrap();
            let a = closed_form_a_k(m, l, k, 2).unwrap();
            for (j, col) in a.col_orbits.iter().enumerate() {
                let block = atlas.realize(col).unwrap();
                let mut per_block: HashMap<OrbitLabel, u64> = HashMap::new();
                let pats = crate::subspace::coefficient_patterns(2, k, 2).unwrap();
                for s in crate::subspace::subspaces_within(atlas.space(), &block, &pats) {
                    *per_block.entry(atlas.orbit_label(&s).unwrap()).or_default() += 1;
                }
                for (i, row) in a.row_orbits.iter().enumerate() {
                    let lhs = atlas.orbit_size(col).unwrap() * per_block.get(row).copied().unwrap_or(0);
                    let rhs = atlas.orbit_size(row).unwrap() * &a.entries[i][j];
                    assert_eq!(lhs, rhs, "({m},{l},{k}) {} {}", row.short(), col.short());
                }
            }
        }
    }

    #[test]
    fn csv_export() {
        let a = closed_form_a_k(2, 3, 3, 2).unwrap();
        let csv = a.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().ends_with(",0,9,6"));
    }
}
