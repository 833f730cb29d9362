//! Closed-form query counts for textbook and improved phase and energy
//! estimation, parameter sweeps, and CSV output.

use crate::error::{invalid, Error, Result};
use crate::estimators::{
    bit_budget, delta_amp, eta_k, hamsim_query_count, textbook_plan, EtaRule,
};
use crate::polynomials::{degree_m, solve_r};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    TextbookPe,
    ImprovedPe,
    TextbookEe,
    ImprovedEe,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] =
        [Algorithm::TextbookPe, Algorithm::ImprovedPe, Algorithm::TextbookEe, Algorithm::ImprovedEe];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::TextbookPe => "textbook_pe",
            Algorithm::ImprovedPe => "improved_pe",
            Algorithm::TextbookEe => "textbook_ee",
            Algorithm::ImprovedEe => "improved_ee",
        }
    }

    /// The textbook algorithm solving the same task.
    pub fn baseline(self) -> Algorithm {
        match self {
            Algorithm::TextbookPe | Algorithm::ImprovedPe => Algorithm::TextbookPe,
            Algorithm::TextbookEe | Algorithm::ImprovedEe => Algorithm::TextbookEe,
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostOptions {
    pub eta_rule: EtaRule,
    pub m_svt: f64,
    pub m_cos: f64,
    /// Remove the phases of improved phase estimation (doubles its cost).
    pub uncompute_pe: bool,
    /// Ancillas of the Hamiltonian's block-encoding.
    pub block_ancillas: usize,
}

impl Default for CostOptions {
    fn default() -> Self {
        CostOptions {
            eta_rule: EtaRule::Exact,
            m_svt: 3.0,
            m_cos: 3.0,
            uncompute_pe: false,
            block_ancillas: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub algorithm: Algorithm,
    pub n: u32,
    pub alpha: f64,
    pub delta: f64,
    pub queries: u64,
    pub garbage_qubits: u64,
    pub ancilla_qubits: u64,
}

fn check(n: u32, alpha: f64, delta: f64) -> Result<()> {
    if n == 0 || n > 40 {
        return invalid(format!("n must lie in 1..=40, got {n}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

fn overflow() -> Error {
    Error::Range("query count overflows u64".into())
}

pub fn cost_textbook_pe(n: u32, alpha: f64, delta: f64) -> Result<CostReport> {
    check(n, alpha, delta)?;
    let plan = textbook_plan(n, alpha, delta)?;
    let garbage = (n + plan.extra_bits) as u64 * plan.repetitions;
    Ok(CostReport {
        algorithm: Algorithm::TextbookPe,
        n,
        alpha,
        delta,
        queries: plan.queries,
        garbage_qubits: garbage,
        ancilla_qubits: garbage,
    })
}

/// Queries of bit `k` of coherent iterative phase estimation at error `delta`.
pub fn pe_bit_queries(n: u32, k: u32, alpha: f64, delta: f64, opts: &CostOptions) -> Result<u64> {
    let eta = eta_k(opts.eta_rule, k, alpha);
    let m = degree_m(eta, delta_amp(delta, opts.m_svt))? as u64;
    m.checked_mul(1u64 << (n - k)).ok_or_else(overflow)
}

/// Queries of bit `k` of coherent iterative energy estimation at error `delta`.
pub fn ee_bit_queries(n: u32, k: u32, alpha: f64, delta: f64, opts: &CostOptions) -> Result<u64> {
    let eta = eta_k(opts.eta_rule, k, alpha);
    let shrink = 10f64.powf(-opts.m_cos);
    let m = degree_m((1.0 - shrink) * eta, delta_amp(delta, opts.m_svt))? as u64;
    let t = PI * 2f64.powi((n - k) as i32);
    let r = solve_r(E * t / 2.0, 1.25 * shrink * eta / 2.0)?;
    let half = (r / 2.0).floor() as u64;
    m.checked_mul(4 * half).ok_or_else(overflow)
}

fn per_bit_sum(
    n: u32,
    delta: f64,
    uncompute: bool,
    bit: impl Fn(u32, f64) -> Result<u64>,
) -> Result<u64> {
    let mut total = 0u64;
    for k in 0..n {
        let dk = bit_budget(delta, k);
        let q = if uncompute { 2 * bit(k, dk / 2.0)? } else { bit(k, dk)? };
        total = total.checked_add(q).ok_or_else(overflow)?;
    }
    Ok(total)
}

pub fn cost_improved_pe(n: u32, alpha: f64, delta: f64, opts: &CostOptions) -> Result<CostReport> {
    check(n, alpha, delta)?;
    let queries = per_bit_sum(n, delta, opts.uncompute_pe, |k, dk| pe_bit_queries(n, k, alpha, dk, opts))?;
    Ok(CostReport {
        algorithm: Algorithm::ImprovedPe,
        n,
        alpha,
        delta,
        queries,
        garbage_qubits: 0,
        ancilla_qubits: 2,
    })
}

/// Textbook phase estimation on `e^{2πiH}`, each controlled power realized
/// by Hamiltonian simulation. Half of `delta` goes to phase estimation, the
/// other half is shared evenly by its `M(2^{n+r} − 1)` unit time steps.
pub fn cost_textbook_ee(n: u32, alpha: f64, delta: f64, opts: &CostOptions) -> Result<CostReport> {
    check(n, alpha, delta)?;
    let plan = textbook_plan(n, alpha, delta / 2.0)?;
    let bits = n + plan.extra_bits;
    let eps_call = (delta / 2.0) / plan.queries as f64;
    let mut per_run = 0u64;
    for j in 0..bits {
        let q = hamsim_query_count(2.0 * PI * 2f64.powi(j as i32), eps_call)?;
        per_run = per_run.checked_add(q).ok_or_else(overflow)?;
    }
    let queries = per_run.checked_mul(plan.repetitions).ok_or_else(overflow)?;
    let garbage = bits as u64 * plan.repetitions;
    Ok(CostReport {
        algorithm: Algorithm::TextbookEe,
        n,
        alpha,
        delta,
        queries,
        garbage_qubits: garbage,
        ancilla_qubits: garbage + opts.block_ancillas as u64 + 2,
    })
}

pub fn cost_improved_ee(n: u32, alpha: f64, delta: f64, opts: &CostOptions) -> Result<CostReport> {
    check(n, alpha, delta)?;
    let queries = per_bit_sum(n, delta, true, |k, dk| ee_bit_queries(n, k, alpha, dk, opts))?;
    Ok(CostReport {
        algorithm: Algorithm::ImprovedEe,
        n,
        alpha,
        delta,
        queries,
        garbage_qubits: 0,
        ancilla_qubits: (opts.block_ancillas + n as usize + 3) as u64,
    })
}

pub fn cost(alg: Algorithm, n: u32, alpha: f64, delta: f64, opts: &CostOptions) -> Result<CostReport> {
    match alg {
        Algorithm::TextbookPe => cost_textbook_pe(n, alpha, delta),
        Algorithm::ImprovedPe => cost_improved_pe(n, alpha, delta, opts),
        Algorithm::TextbookEe => cost_textbook_ee(n, alpha, delta, opts),
        Algorithm::ImprovedEe => cost_improved_ee(n, alpha, delta, opts),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub n: Vec<u32>,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
}

impl SweepGrid {
    pub fn points(&self) -> Vec<(Algorithm, u32, f64, f64)> {
        let mut out = Vec::new();
        for &a in &self.algorithms {
            for &n in &self.n {
                for &al in &self.alpha {
                    for &d in &self.delta {
                        out.push((a, n, al, d));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub report: CostReport,
    /// Baseline queries over these queries.
    pub speedup_vs_textbook: f64,
}

pub const CSV_HEADER: &str = "algorithm,n,alpha,delta,queries,garbage_qubits,ancillas,speedup_vs_textbook";

/// Rows for every point, computed in parallel and sorted by
/// `(algorithm, n, alpha, delta)`. Duplicate points appear once.
pub fn sweep_points(points: &[(Algorithm, u32, f64, f64)], opts: &CostOptions) -> Result<Vec<SweepRow>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| {
        (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)).then(a.3.total_cmp(&b.3))
    });
    pts.dedup();
    pts.par_iter()
        .map(|&(alg, n, alpha, delta)| {
            let report = cost(alg, n, alpha, delta, opts)?;
            let base = if alg.baseline() == alg {
                report.queries
            } else {
                cost(alg.baseline(), n, alpha, delta, opts)?.queries
            };
            Ok(SweepRow { speedup_vs_textbook: base as f64 / report.queries as f64, report })
        })
        .collect()
}

pub fn sweep(grid: &SweepGrid, opts: &CostOptions) -> Result<Vec<SweepRow>> {
    sweep_points(&grid.points(), opts)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let c = &r.report;
        let _ = writeln!(
            s,
            "{},{},{:e},{:e},{},{},{},{:.6}",
            c.algorithm.name(),
            c.n,
            c.alpha,
            c.delta,
            c.queries,
            c.garbage_qubits,
            c.ancilla_qubits,
            r.speedup_vs_textbook
        );
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Cost against α at `n = 10`, `δ = 10^{-30}`.
    Fig4,
    /// Speedups when `n`, `α`, `δ` vary one at a time around
    /// `(10, 2^{-10}, 10^{-30})`.
    Fig5,
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            _ => Err(Error::InvalidInput(format!("unknown figure '{s}' (expected fig4 or fig5)"))),
        }
    }
}

pub fn figure_points(fig: Figure) -> Vec<(Algorithm, u32, f64, f64)> {
    let mut pts = Vec::new();
    match fig {
        Figure::Fig4 => {
            for a in Algorithm::ALL {
                for i in 1..=96 {
                    pts.push((a, 10, 2f64.powf(-(i as f64) / 8.0), 1e-30));
                }
            }
        }
        Figure::Fig5 => {
            let (n0, a0, d0) = (10u32, 2f64.powi(-10), 1e-30);
            for a in Algorithm::ALL {
                for n in 1..=14 {
                    pts.push((a, n, a0, d0));
                }
                for e in 1..=14 {
                    pts.push((a, n0, 2f64.powi(-e), d0));
                }
                for e in 1..=20 {
                    pts.push((a, n0, a0, 10f64.powi(-2 * e)));
                }
            }
        }
    }
    pts
}
