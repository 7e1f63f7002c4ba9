//! Depth-first search for 0/1 solutions of M x = λ·1.

use serde::Serialize;

use crate::error::Result;
use crate::incidence::IncidenceBlockMatrix;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// The whole search tree was visited.
    Exhausted,
    /// The node budget ran out first; absence of solutions proves nothing.
    BudgetExhausted,
}

#[derive(Clone, Debug, Serialize)]
pub struct KmResult {
    pub status: SearchStatus,
    pub nodes: u64,
    pub solutions: Vec<Vec<u8>>,
}

struct Search<'a> {
    m: &'a [Vec<u128>],
    lambda: u128,
    /// suffix[j][i] = sum of column entries j.. in row i
    suffix: Vec<Vec<u128>>,
    budget: u64,
    max_solutions: usize,
    nodes: u64,
    x: Vec<u8>,
    sums: Vec<u128>,
    solutions: Vec<Vec<u8>>,
    out_of_budget: bool,
}

impl Search<'_> {
    fn feasible(&self, j: usize) -> bool {
        self.sums.iter().zip(&self.suffix[j]).all(|(&s, &rest)| s <= self.lambda && s + rest >= self.lambda)
    }

    fn dfs(&mut self, j: usize) {
        if self.out_of_budget || self.solutions.len() >= self.max_solutions {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.out_of_budget = true;
            return;
        }
        if !self.feasible(j) {
            return;
        }
        if j == self.x.len() {
            self.solutions.push(self.x.clone());
            return;
        }
        for (i, row) in self.m.iter().enumerate() {
            self.sums[i] += row[j];
        }
        self.x[j] = 1;
        self.dfs(j + 1);
        self.x[j] = 0;
        for (i, row) in self.m.iter().enumerate() {
            self.sums[i] -= row[j];
        }
        self.dfs(j + 1);
    }
}

/// All x in {0,1}^cols with M x = λ·1 reachable within `budget` search
/// nodes, stopping early after `max_solutions`.
pub fn km_solve_binary(m: &IncidenceBlockMatrix, lambda: u128, budget: u64, max_solutions: usize) -> Result<KmResult> {
    let rows = m.to_u128()?;
    Ok(solve_rows(&rows, m.n_cols(), lambda, budget, max_solutions))
}

pub fn solve_rows(rows: &[Vec<u128>], cols: usize, lambda: u128, budget: u64, max_solutions: usize) -> KmResult {
    let mut suffix = vec![vec![0u128; rows.len()]; cols + 1];
    for j in (0..cols).rev() {
        for (i, row) in rows.iter().enumerate() {
            suffix[j][i] = suffix[j + 1][i] + row[j];
        }
    }
    let mut s = Search {
        m: rows,
        lambda,
        suffix,
        budget,
        max_solutions,
        nodes: 0,
        x: vec![0; cols],
        sums: vec![0; rows.len()],
        solutions: Vec::new(),
        out_of_budget: false,
    };
    s.dfs(0);
    let status = if s.out_of_budget { SearchStatus::BudgetExhausted } else { SearchStatus::Exhausted };
    KmResult { status, nodes: s.nodes, solutions: s.solutions }
}
