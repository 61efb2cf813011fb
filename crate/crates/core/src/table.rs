//! Minimal ruler cardinalities per block length `N`: circular at length
//! `N-1`, linear at length `floor(N/2)` and linear at length `N-1`, checked
//! against a golden table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::construct_near_minimal_linear;
use crate::error::{domain, Result};
use crate::search::{exists_ruler, minimal_ruler, SearchBudget, SearchStatus};
use crate::sets::RulerKind;

const GOLDEN_JSON: &str = include_str!("../data/table1.json");

/// Block lengths covered by the golden table.
pub const TABLE_RANGE: std::ops::RangeInclusive<usize> = 5..=60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M_CSR")]
    pub csr: usize,
    #[serde(rename = "M_HLSR")]
    pub hlsr: usize,
    #[serde(rename = "M_LSR")]
    pub lsr: usize,
}

#[derive(Deserialize)]
struct GoldenFile {
    rows: Vec<GoldenRow>,
}

pub fn parse_golden(json: &str) -> Result<Vec<GoldenRow>> {
    serde_json::from_str::<GoldenFile>(json)
        .map(|f| f.rows)
        .map_err(|e| crate::Error::Domain(format!("golden table: {e}")))
}

/// The table shipped with the crate.
pub fn golden_table() -> Vec<GoldenRow> {
    parse_golden(GOLDEN_JSON).expect("embedded table is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Exhaustive search proved the value minimal.
    SearchedOptimal,
    /// A ruler with this many marks was found and verified.
    FeasibleOnly,
    /// Copied from the golden table without verification.
    Golden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub value: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M_CSR")]
    pub csr: Cell,
    #[serde(rename = "M_HLSR")]
    pub hlsr: Cell,
    #[serde(rename = "M_LSR")]
    pub lsr: Cell,
}

/// Per-column limits on `N` up to which cells are searched exhaustively.
#[derive(Debug, Clone)]
pub struct TableOptions {
    pub exact_lsr_up_to: usize,
    pub exact_hlsr_up_to: usize,
    pub exact_csr_up_to: usize,
    pub budget: SearchBudget,
}

impl TableOptions {
    pub fn exact_up_to(n: usize, budget: SearchBudget) -> Self {
        TableOptions {
            exact_lsr_up_to: n,
            exact_hlsr_up_to: n,
            exact_csr_up_to: n,
            budget,
        }
    }
}

fn exact_cell(length: usize, kind: RulerKind, budget: &SearchBudget) -> Option<Cell> {
    let r = minimal_ruler(length, kind, budget);
    (r.status == SearchStatus::Optimal).then(|| Cell {
        value: r.ruler.expect("optimal result carries a ruler").cardinality(),
        provenance: Provenance::SearchedOptimal,
    })
}

/// Smallest cardinality from `golden` upward for which a ruler is found.
fn feasible_cell(length: usize, kind: RulerKind, golden: usize, budget: &SearchBudget) -> Cell {
    if kind == RulerKind::Linear && construct_near_minimal_linear(length).cardinality() <= golden {
        return Cell {
            value: golden,
            provenance: Provenance::FeasibleOnly,
        };
    }
    for m in golden..=length + 1 {
        let r = exists_ruler(length, m, kind, budget).expect("cardinality in range");
        match r.status {
            SearchStatus::Feasible | SearchStatus::Optimal => {
                return Cell {
                    value: m,
                    provenance: Provenance::FeasibleOnly,
                }
            }
            SearchStatus::Infeasible => continue,
            SearchStatus::BudgetExceeded => break,
        }
    }
    Cell {
        value: golden,
        provenance: Provenance::Golden,
    }
}

fn cell(length: usize, kind: RulerKind, exact: bool, golden: usize, budget: &SearchBudget) -> Cell {
    if exact {
        if let Some(c) = exact_cell(length, kind, budget) {
            return c;
        }
    }
    feasible_cell(length, kind, golden, budget)
}

pub fn compute_row(golden: &GoldenRow, opts: &TableOptions) -> TableRow {
    let n = golden.n;
    let b = &opts.budget;
    TableRow {
        n,
        csr: cell(n - 1, RulerKind::Circular, n <= opts.exact_csr_up_to, golden.csr, b),
        hlsr: cell(n / 2, RulerKind::Linear, n <= opts.exact_hlsr_up_to, golden.hlsr, b),
        lsr: cell(n - 1, RulerKind::Linear, n <= opts.exact_lsr_up_to, golden.lsr, b),
    }
}

/// Rows `from..=to`, computed in parallel.
pub fn compute_table(from: usize, to: usize, golden: &[GoldenRow], opts: &TableOptions) -> Result<Vec<TableRow>> {
    if from > to || !TABLE_RANGE.contains(&from) || !TABLE_RANGE.contains(&to) {
        return domain(format!("range {from}..={to} outside 5..=60"));
    }
    let rows: Vec<&GoldenRow> = (from..=to)
        .map(|n| {
            golden
                .iter()
                .find(|g| g.n == n)
                .ok_or_else(|| crate::Error::Domain(format!("golden table has no row N = {n}")))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_par_iter().map(|g| compute_row(g, opts)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    #[serde(rename = "N")]
    pub n: usize,
    pub column: &'static str,
    pub computed: usize,
    pub golden: usize,
}

pub fn diff(rows: &[TableRow], golden: &[GoldenRow]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for row in rows {
        let Some(g) = golden.iter().find(|g| g.n == row.n) else {
            continue;
        };
        for (column, computed, want) in [
            ("M_CSR", row.csr.value, g.csr),
            ("M_HLSR", row.hlsr.value, g.hlsr),
            ("M_LSR", row.lsr.value, g.lsr),
        ] {
            if computed != want {
                out.push(Mismatch {
                    n: row.n,
                    column,
                    computed,
                    golden: want,
                });
            }
        }
    }
    out
}
