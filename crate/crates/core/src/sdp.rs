//! Small dense block SDP solver.
//!
//! Problems are posed as linear matrix inequalities
//!
//! ```text
//! minimize  c·y   subject to  Z(y) = F0 + Σ y_i F_i ⪰ 0   (block diagonal)
//! ```
//!
//! and solved together with their dual
//!
//! ```text
//! maximize  -<F0, X>   subject to  <F_i, X> = c_i,  X ⪰ 0
//! ```
//!
//! by an infeasible-start primal-dual path-following method (HKM direction,
//! Mehrotra predictor-corrector). Pencils are stored sparsely; the Schur
//! complement is assembled row by row, optionally in parallel.
//!
//! Most callers state their program in equality form (a PSD matrix variable
//! with linear constraints) through [`StandardForm`], which maps onto the
//! LMI form above with the matrix variable ending up as the dual `X`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{
    cholesky, cholesky_solve, lower_inverse, min_eigenvalue, spd_inverse, sym_eigenvalues,
    RealMatrix,
};
use crate::par::{map_indices, Execution};

/// One stored entry of a sparse symmetric block matrix (`row <= col`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Sparse symmetric block-diagonal matrix. Only the upper triangle is stored;
/// an off-diagonal entry `(r, c)` stands for both `(r, c)` and `(c, r)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSym {
    entries: Vec<SymEntry>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[SymEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds `value` at `(row, col)` and its mirror.
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: f64) {
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        if let Some(e) = self
            .entries
            .iter_mut()
            .find(|e| e.block == block && e.row == row && e.col == col)
        {
            e.value += value;
        } else {
            self.entries.push(SymEntry {
                block,
                row,
                col,
                value,
            });
        }
    }

    /// Copies a dense symmetric block, rejecting asymmetric input.
    pub fn from_dense(block: usize, m: &RealMatrix) -> Result<Self> {
        let mut out = Self::new();
        out.add_dense(block, m)?;
        Ok(out)
    }

    pub fn add_dense(&mut self, block: usize, m: &RealMatrix) -> Result<()> {
        if !m.is_square() {
            return Err(Error::InvalidProblem(format!(
                "pencil block {block} is {}x{}, not square",
                m.rows(),
                m.cols()
            )));
        }
        let asym = m.asymmetry();
        if asym > 1e-12 * m.max_abs().max(1.0) {
            return Err(Error::InvalidProblem(format!(
                "pencil block {block} is not symmetric (asymmetry {asym:.3e})"
            )));
        }
        for i in 0..m.rows() {
            for j in i..m.cols() {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                if v != 0.0 {
                    self.add(block, i, j, v);
                }
            }
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| SymEntry {
                    value: e.value * s,
                    ..*e
                })
                .collect(),
        }
    }

    /// `<self, X>` for a block-diagonal `X`.
    pub fn dot(&self, blocks: &[RealMatrix]) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let b = &blocks[e.block];
                if e.row == e.col {
                    e.value * b[(e.row, e.col)]
                } else {
                    e.value * (b[(e.row, e.col)] + b[(e.col, e.row)])
                }
            })
            .sum()
    }

    /// `blocks += coef * self`.
    pub fn add_to(&self, coef: f64, blocks: &mut [RealMatrix]) {
        for e in &self.entries {
            let b = &mut blocks[e.block];
            b[(e.row, e.col)] += coef * e.value;
            if e.row != e.col {
                b[(e.col, e.row)] += coef * e.value;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let w = if e.row == e.col { 1.0 } else { 2.0 };
                w * e.value * e.value
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_dense(&self, block_sizes: &[usize]) -> Vec<RealMatrix> {
        let mut out: Vec<RealMatrix> = block_sizes
            .iter()
            .map(|&n| RealMatrix::zeros(n, n))
            .collect();
        self.add_to(1.0, &mut out);
        out
    }
}

/// A linear functional `X -> Σ g_rc X_rc` on a symmetric block-diagonal
/// matrix, accumulated from arbitrary (not necessarily symmetric) terms.
#[derive(Clone, Debug, Default)]
pub struct Functional {
    terms: BTreeMap<(usize, usize, usize), f64>,
}

impl Functional {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value * X[block][(row, col)]`.
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: f64) {
        if value == 0.0 {
            return;
        }
        let (r, c, v) = if row == col {
            (row, col, value)
        } else {
            (row.min(col), row.max(col), 0.5 * value)
        };
        *self.terms.entry((block, r, c)).or_insert(0.0) += v;
    }

    pub fn extend(&mut self, other: &Functional, coef: f64) {
        for (&k, &v) in &other.terms {
            *self.terms.entry(k).or_insert(0.0) += coef * v;
        }
    }

    pub fn into_sparse(self) -> SparseSym {
        let max = self.terms.values().fold(0.0f64, |m, v| m.max(v.abs()));
        SparseSym {
            entries: self
                .terms
                .into_iter()
                .filter(|(_, v)| v.abs() > 1e-15 * max)
                .map(|((block, row, col), value)| SymEntry {
                    block,
                    row,
                    col,
                    value,
                })
                .collect(),
        }
    }
}

/// `minimize c·y  s.t.  F0 + Σ y_i F_i ⪰ 0` over a block-diagonal pencil.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpProblem {
    block_sizes: Vec<usize>,
    objective: Vec<f64>,
    constant: SparseSym,
    coefficients: Vec<SparseSym>,
}

/// Upper bound on the total block size handled by the dense solver.
pub const MAX_TOTAL_BLOCK_SIZE: usize = 512;

impl SdpProblem {
    pub fn new(block_sizes: Vec<usize>) -> Self {
        Self {
            block_sizes,
            objective: Vec::new(),
            constant: SparseSym::new(),
            coefficients: Vec::new(),
        }
    }

    pub fn set_constant(&mut self, f0: SparseSym) {
        self.constant = f0;
    }

    /// Adds variable `y_k` with cost `cost` and pencil `F_k`; returns `k`.
    pub fn add_variable(&mut self, cost: f64, pencil: SparseSym) -> usize {
        self.objective.push(cost);
        self.coefficients.push(pencil);
        self.objective.len() - 1
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constant(&self) -> &SparseSym {
        &self.constant
    }

    pub fn coefficients(&self) -> &[SparseSym] {
        &self.coefficients
    }

    pub fn total_size(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// `Z(y) = F0 + Σ y_i F_i` as dense blocks.
    pub fn evaluate(&self, y: &[f64]) -> Vec<RealMatrix> {
        let mut z = self.constant.to_dense(&self.block_sizes);
        for (yi, f) in y.iter().zip(&self.coefficients) {
            f.add_to(*yi, &mut z);
        }
        z
    }

    /// Checks entry bounds, finiteness and the size limit.
    pub fn validate(&self) -> Result<()> {
        if self.total_size() > MAX_TOTAL_BLOCK_SIZE {
            return Err(Error::InvalidProblem(format!(
                "total block size {} exceeds {MAX_TOTAL_BLOCK_SIZE}",
                self.total_size()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProblem("non-finite objective".into()));
        }
        for (k, f) in std::iter::once(&self.constant)
            .chain(&self.coefficients)
            .enumerate()
        {
            for e in f.entries() {
                let n = *self.block_sizes.get(e.block).ok_or_else(|| {
                    Error::InvalidProblem(format!("pencil {k} refers to missing block {}", e.block))
                })?;
                if e.row > e.col || e.col >= n || !e.value.is_finite() {
                    return Err(Error::InvalidProblem(format!(
                        "pencil {k} has a bad entry {e:?} for block size {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn scale_proxy(&self) -> f64 {
        std::iter::once(&self.constant)
            .chain(&self.coefficients)
            .flat_map(|f| f.entries().iter().map(|e| e.value.abs()))
            .fold(1.0f64, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Target for relative duality gap and relative infeasibilities.
    pub tol: f64,
    pub max_iter: usize,
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 120,
            execution: Execution::Parallel,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// Smallest eigenvalue over the blocks of `Z(y)`.
    pub min_eigenvalue: f64,
    /// `|<X, Z>| / (1 + |primal| + |dual|)`.
    pub duality_gap: f64,
    /// Relative residual of `<F_i, X> = c_i`.
    pub primal_infeasibility: f64,
    /// Relative residual of `Z = F0 + Σ y_i F_i` for the iterate `Z`.
    pub dual_infeasibility: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    pub status: SdpStatus,
    /// `c·y` at the returned point.
    pub objective_value: f64,
    pub residuals: Residuals,
    /// Dual matrix `X` (block diagonal).
    pub dual: Vec<RealMatrix>,
    /// `Z(y)` evaluated at the returned `y`.
    pub slack: Vec<RealMatrix>,
}

/// Solves an LMI problem.
pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    if !(1e-12..=1e-3).contains(&opts.tol) {
        return Err(Error::InvalidProblem(format!(
            "tolerance {} outside [1e-12, 1e-3]",
            opts.tol
        )));
    }
    problem.validate()?;

    if problem.num_variables() == 0 {
        return Ok(constant_only(problem, opts));
    }

    let sp = Standard::from_lmi(problem);
    let run = sp.interior_point(opts);
    let slack = problem.evaluate(&run.y);
    let min_eig = slack
        .iter()
        .filter(|b| b.rows() > 0)
        .map(min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let objective_value: f64 = problem
        .objective
        .iter()
        .zip(&run.y)
        .map(|(c, y)| c * y)
        .sum();
    let scale = problem.scale_proxy();
    let residuals = Residuals {
        min_eigenvalue: min_eig,
        duality_gap: run.rel_gap,
        primal_infeasibility: run.pinf,
        dual_infeasibility: run.dinf,
        iterations: run.iterations,
    };
    // Degenerate programs (no strict complementarity) stall with a relative
    // gap near 1e-8; feasible points at that gap are accepted.
    let converged = run.rel_gap <= 100.0 * opts.tol
        && run.pinf <= 10.0 * opts.tol
        && run.dinf <= 10.0 * opts.tol
        && min_eig >= -1e-8 * scale;
    if converged {
        return Ok(SdpSolution {
            y: run.y,
            status: SdpStatus::Optimal,
            objective_value,
            residuals,
            dual: run.x,
            slack,
        });
    }
    let status = if lmi_infeasible(problem, opts) {
        SdpStatus::Infeasible
    } else {
        SdpStatus::Indeterminate
    };
    Ok(SdpSolution {
        y: run.y,
        status,
        objective_value,
        residuals,
        dual: run.x,
        slack,
    })
}

fn constant_only(problem: &SdpProblem, opts: &SolverOptions) -> SdpSolution {
    let slack = problem.evaluate(&[]);
    let min_eig = slack
        .iter()
        .filter(|b| b.rows() > 0)
        .map(min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let feasible = min_eig >= -opts.tol * problem.scale_proxy();
    SdpSolution {
        y: Vec::new(),
        status: if feasible {
            SdpStatus::Optimal
        } else {
            SdpStatus::Infeasible
        },
        objective_value: 0.0,
        residuals: Residuals {
            min_eigenvalue: min_eig,
            ..Residuals::default()
        },
        dual: problem
            .block_sizes
            .iter()
            .map(|&n| RealMatrix::zeros(n, n))
            .collect(),
        slack,
    }
}

/// Radius of the box used by the feasibility probe, relative to problem scale.
const FEASIBILITY_RADIUS: f64 = 1e6;

/// Phase-one probe: minimise `s` with `Z(y) + s I ⪰ 0` over a bounded box of
/// `y`. A clearly positive optimum certifies infeasibility inside the box.
fn lmi_infeasible(problem: &SdpProblem, opts: &SolverOptions) -> bool {
    let k = problem.num_variables();
    let scale = problem.scale_proxy();
    let radius = FEASIBILITY_RADIUS * scale;
    let nb = problem.block_sizes.len();
    let mut sizes = problem.block_sizes.clone();
    sizes.extend(std::iter::repeat_n(1, 2 * k));
    let mut probe = SdpProblem::new(sizes);
    let mut f0 = problem.constant.clone();
    for i in 0..k {
        f0.add(nb + 2 * i, 0, 0, radius);
        f0.add(nb + 2 * i + 1, 0, 0, radius);
    }
    probe.set_constant(f0);
    for (i, f) in problem.coefficients.iter().enumerate() {
        let mut g = f.clone();
        g.add(nb + 2 * i, 0, 0, -1.0);
        g.add(nb + 2 * i + 1, 0, 0, 1.0);
        probe.add_variable(0.0, g);
    }
    let mut shift = SparseSym::new();
    for (b, &n) in problem.block_sizes.iter().enumerate() {
        for i in 0..n {
            shift.add(b, i, i, 1.0);
        }
    }
    probe.add_variable(1.0, shift);
    let sp = Standard::from_lmi(&probe);
    let run = sp.interior_point(&SolverOptions {
        tol: opts.tol.max(1e-9),
        ..*opts
    });
    let s = run.y[k];
    let solved = run.rel_gap <= 1e-6 && run.pinf <= 1e-6 && run.dinf <= 1e-6;
    solved && s > 1e-6 * scale
}

/// Equality-form program: minimise `<C, X>` subject to `<A_i, X> = b_i`,
/// `X ⪰ 0` block diagonal.
#[derive(Clone, Debug, Default)]
pub struct StandardForm {
    block_sizes: Vec<usize>,
    objective: Functional,
    constraints: Vec<(SparseSym, f64)>,
}

impl StandardForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, size: usize) -> usize {
        self.block_sizes.push(size);
        self.block_sizes.len() - 1
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn minimize(&mut self, objective: Functional) {
        self.objective = objective;
    }

    pub fn constrain(&mut self, functional: Functional, rhs: f64) {
        let a = functional.into_sparse();
        if a.is_empty() {
            debug_assert!(rhs.abs() < 1e-9, "empty constraint with rhs {rhs}");
            return;
        }
        self.constraints.push((a, rhs));
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// The LMI whose dual is this program: `F0 = C`, `F_i = -A_i`, `c = -b`.
    pub fn to_problem(&self) -> SdpProblem {
        let mut p = SdpProblem::new(self.block_sizes.clone());
        p.set_constant(self.objective.clone().into_sparse());
        for (a, b) in &self.constraints {
            p.add_variable(-b, a.scaled(-1.0));
        }
        p
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<StandardSolution> {
        let problem = self.to_problem();
        let sol = solve(&problem, opts)?;
        let value = problem.constant.dot(&sol.dual);
        Ok(StandardSolution {
            value,
            x: sol.dual.clone(),
            status: sol.status,
            residuals: sol.residuals,
            lower_bound: -sol.objective_value,
        })
    }
}

#[derive(Clone, Debug)]
pub struct StandardSolution {
    /// `<C, X>` at the returned matrix.
    pub value: f64,
    /// Dual objective, a lower bound on the optimum when the dual point is feasible.
    pub lower_bound: f64,
    pub x: Vec<RealMatrix>,
    pub status: SdpStatus,
    pub residuals: Residuals,
}

/// Internal equality form `min <C,X> s.t. <A_i,X> = b_i`, with constraint
/// entries expanded to both triangles for the Schur assembly.
struct Standard {
    sizes: Vec<usize>,
    c: SparseSym,
    a: Vec<SparseSym>,
    b: Vec<f64>,
    full: Vec<Vec<FullEntry>>,
}

#[derive(Clone, Copy)]
struct FullEntry {
    block: usize,
    p: usize,
    q: usize,
    v: f64,
}

struct IpmRun {
    x: Vec<RealMatrix>,
    y: Vec<f64>,
    rel_gap: f64,
    pinf: f64,
    dinf: f64,
    iterations: usize,
}

type Blocks = Vec<RealMatrix>;

fn blocks_dot(a: &[RealMatrix], b: &[RealMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn blocks_norm(a: &[RealMatrix]) -> f64 {
    blocks_dot(a, a).sqrt()
}

fn blocks_axpy(out: &mut [RealMatrix], s: f64, x: &[RealMatrix]) {
    for (o, xi) in out.iter_mut().zip(x) {
        o.axpy(s, xi);
    }
}

fn blocks_mul(a: &[RealMatrix], b: &[RealMatrix]) -> Blocks {
    a.iter().zip(b).map(|(x, y)| x.matmul(y)).collect()
}

fn blocks_sym(a: Blocks) -> Blocks {
    a.into_iter().map(|m| m.symmetric_part()).collect()
}

fn scaled_identity(sizes: &[usize], s: f64) -> Blocks {
    sizes
        .iter()
        .map(|&n| RealMatrix::identity(n).scale(s))
        .collect()
}

/// Largest step `alpha` (capped) keeping `x + alpha dx ⪰ 0`.
fn max_step(x: &[RealMatrix], dx: &[RealMatrix]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xb, db) in x.iter().zip(dx) {
        if xb.rows() == 0 {
            continue;
        }
        if xb.rows() == 1 {
            if db[(0, 0)] < 0.0 {
                alpha = alpha.min(-xb[(0, 0)] / db[(0, 0)]);
            }
            continue;
        }
        let Some(l) = cholesky(xb) else {
            return 0.0;
        };
        let li = lower_inverse(&l);
        let w = li.matmul(db).matmul(&li.transpose());
        let lo = min_eigenvalue(&w);
        if lo < 0.0 {
            alpha = alpha.min(-1.0 / lo);
        }
    }
    alpha
}

impl Standard {
    fn from_lmi(p: &SdpProblem) -> Self {
        let a: Vec<SparseSym> = p.coefficients.iter().map(|f| f.scaled(-1.0)).collect();
        let b: Vec<f64> = p.objective.iter().map(|c| -c).collect();
        let full = a
            .iter()
            .map(|ai| {
                let mut out = Vec::with_capacity(2 * ai.entries.len());
                for e in &ai.entries {
                    out.push(FullEntry {
                        block: e.block,
                        p: e.row,
                        q: e.col,
                        v: e.value,
                    });
                    if e.row != e.col {
                        out.push(FullEntry {
                            block: e.block,
                            p: e.col,
                            q: e.row,
                            v: e.value,
                        });
                    }
                }
                out
            })
            .collect();
        Self {
            sizes: p.block_sizes.clone(),
            c: p.constant.clone(),
            a,
            b,
            full,
        }
    }

    /// Cholesky factor of the Gram matrix `[<A_i, A_j>]`, `None` when the
    /// constraints are numerically dependent.
    fn gram_factor(&self) -> Option<RealMatrix> {
        let k = self.a.len();
        let mut by_entry: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for (i, ai) in self.a.iter().enumerate() {
            for e in &ai.entries {
                by_entry
                    .entry((e.block, e.row, e.col))
                    .or_default()
                    .push((i, e.value));
            }
        }
        let mut g = RealMatrix::zeros(k, k);
        for ((_, r, c), list) in &by_entry {
            let w = if r == c { 1.0 } else { 2.0 };
            for &(i, vi) in list {
                for &(j, vj) in list {
                    g[(i, j)] += w * vi * vj;
                }
            }
        }
        cholesky(&g)
    }

    fn apply_a(&self, m: &[RealMatrix]) -> Vec<f64> {
        self.full
            .iter()
            .map(|f| f.iter().map(|e| e.v * m[e.block][(e.p, e.q)]).sum())
            .collect()
    }

    fn apply_at(&self, y: &[f64]) -> Blocks {
        let mut out = scaled_identity(&self.sizes, 0.0);
        for (yi, ai) in y.iter().zip(&self.a) {
            if *yi != 0.0 {
                ai.add_to(*yi, &mut out);
            }
        }
        out
    }

    /// `M_ij = tr(A_i X A_j S^{-1})`.
    fn schur(&self, x: &[RealMatrix], sinv: &[RealMatrix], exec: Execution) -> RealMatrix {
        let k = self.a.len();
        let exec = if k < 48 { Execution::Sequential } else { exec };
        let rows: Vec<Vec<f64>> = map_indices(k, exec, |i| {
            // G = X A_i S^{-1}, built only on the blocks A_i touches.
            let mut g: BTreeMap<usize, RealMatrix> = BTreeMap::new();
            let mut cols: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
            for e in &self.full[i] {
                cols.entry(e.block).or_default().push((e.p, e.q, e.v));
            }
            for (&blk, ents) in &cols {
                let n = self.sizes[blk];
                let xb = &x[blk];
                let sb = &sinv[blk];
                // (X A_i)[:, q] += v X[:, p]
                let mut xa: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
                for &(p, q, v) in ents {
                    let col = xa.entry(q).or_insert_with(|| vec![0.0; n]);
                    for r in 0..n {
                        col[r] += v * xb[(r, p)];
                    }
                }
                let mut gb = RealMatrix::zeros(n, n);
                for (&q, col) in &xa {
                    let srow = &sb.as_slice()[q * n..(q + 1) * n];
                    let gs = gb.as_mut_slice();
                    for r in 0..n {
                        let c = col[r];
                        if c == 0.0 {
                            continue;
                        }
                        let grow = &mut gs[r * n..(r + 1) * n];
                        for (gv, sv) in grow.iter_mut().zip(srow) {
                            *gv += c * sv;
                        }
                    }
                }
                g.insert(blk, gb);
            }
            let mut row = vec![0.0; k];
            for (j, fj) in self.full.iter().enumerate().skip(i) {
                let mut s = 0.0;
                for e in fj {
                    if let Some(gb) = g.get(&e.block) {
                        s += e.v * gb[(e.p, e.q)];
                    }
                }
                row[j] = s;
            }
            row
        });
        let mut m = RealMatrix::zeros(k, k);
        for (i, row) in rows.iter().enumerate() {
            for j in i..k {
                m[(i, j)] = row[j];
                m[(j, i)] = row[j];
            }
        }
        m
    }

    fn initial_scale(&self) -> (f64, f64) {
        let n: usize = self.sizes.iter().sum();
        let sqrt_n = (n as f64).sqrt();
        let mut xi: f64 = 10.0f64.max(sqrt_n);
        let mut eta: f64 = 10.0f64.max(sqrt_n).max(self.c.frobenius_norm());
        for (ai, bi) in self.a.iter().zip(&self.b) {
            let na = ai.frobenius_norm();
            xi = xi.max(sqrt_n * (1.0 + bi.abs()) / (1.0 + na));
            eta = eta.max(na);
        }
        (xi, eta)
    }

    fn interior_point(&self, opts: &SolverOptions) -> IpmRun {
        let k = self.a.len();
        let n_total: f64 = self.sizes.iter().sum::<usize>() as f64;
        let (xi, eta) = self.initial_scale();
        let mut x = scaled_identity(&self.sizes, xi);
        let mut s = scaled_identity(&self.sizes, eta);
        let mut y = vec![0.0; k];
        let c_dense = self.c.to_dense(&self.sizes);
        let norm_b = self.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let norm_c = self.c.frobenius_norm();

        let gram = self.gram_factor();
        let mut last_step: f64 = 1.0;
        let mut history: Vec<f64> = Vec::new();
        let mut best: Option<(f64, Blocks, Vec<f64>, f64, f64, f64)> = None;
        let mut iterations = 0;
        let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

        for iter in 0..opts.max_iter {
            iterations = iter;
            let ax = self.apply_a(&x);
            let rp: Vec<f64> = self.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let mut rd = c_dense.clone();
            blocks_axpy(&mut rd, -1.0, &self.apply_at(&y));
            blocks_axpy(&mut rd, -1.0, &s);
            let pobj = blocks_dot(&c_dense, &x);
            let dobj: f64 = self.b.iter().zip(&y).map(|(b, v)| b * v).sum();
            let gap = blocks_dot(&x, &s);
            let rel_gap = gap.abs() / (1.0 + pobj.abs() + dobj.abs());
            let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_b);
            let dinf = blocks_norm(&rd) / (1.0 + norm_c);
            last = (rel_gap, pinf, dinf);

            let merit = rel_gap.max(pinf).max(dinf);
            if best.as_ref().is_none_or(|b| merit < b.0) {
                best = Some((merit, x.clone(), y.clone(), rel_gap, pinf, dinf));
            }
            history.push(merit);
            if history.len() > 15 && merit > 0.5 * history[history.len() - 16] && merit < 1e-6 {
                break;
            }
            if rel_gap <= opts.tol && pinf <= opts.tol && dinf <= opts.tol {
                break;
            }
            let xnorm = blocks_norm(&x);
            if !xnorm.is_finite() || xnorm > 1e14 * (1.0 + xi) || y.iter().any(|v| !v.is_finite()) {
                break;
            }

            let Some(sinv) = s.iter().map(spd_inverse).collect::<Option<Blocks>>() else {
                break;
            };
            let m = self.schur(&x, &sinv, opts.execution);
            let Some(lm) = factor_schur(&m) else {
                break;
            };
            let x_rd_sinv = blocks_mul(&blocks_mul(&x, &rd), &sinv);
            let a_x_rd_sinv = self.apply_a(&x_rd_sinv);

            // Direction for a complementarity target given as `Rc S^{-1}`.
            let direction = |rc_sinv: &Blocks| -> (Blocks, Vec<f64>, Blocks) {
                let a_rc = self.apply_a(rc_sinv);
                let rhs: Vec<f64> = (0..k).map(|i| rp[i] - a_rc[i] + a_x_rd_sinv[i]).collect();
                let dy = refined_solve(&m, &lm, &rhs);
                let mut ds = rd.clone();
                blocks_axpy(&mut ds, -1.0, &self.apply_at(&dy));
                let mut dx = rc_sinv.clone();
                blocks_axpy(&mut dx, -1.0, &blocks_mul(&blocks_mul(&x, &ds), &sinv));
                let mut dx = blocks_sym(dx);
                // Roundoff in the scaled Schur system leaks into A(dX); put
                // dX back on A(dX) = rp.
                if let Some(gl) = &gram {
                    let adx = self.apply_a(&dx);
                    let mut z: Vec<f64> = rp.iter().zip(&adx).map(|(r, a)| r - a).collect();
                    cholesky_solve(gl, &mut z);
                    blocks_axpy(&mut dx, 1.0, &self.apply_at(&z));
                }
                (dx, dy, ds)
            };

            let mu = gap / n_total;
            let neg_x: Blocks = x.iter().map(|b| b.scale(-1.0)).collect();
            let (dxa, _dya, dsa) = direction(&neg_x);
            let ap = max_step(&x, &dxa).min(1.0);
            let ad = max_step(&s, &dsa).min(1.0);
            let mut xa = x.clone();
            blocks_axpy(&mut xa, ap, &dxa);
            let mut sa = s.clone();
            blocks_axpy(&mut sa, ad, &dsa);
            let mu_aff = blocks_dot(&xa, &sa) / n_total;
            // Short previous steps call for more centering.
            let expon = (3.0 * last_step * last_step).max(1.0);
            let sigma = if mu > 0.0 {
                (mu_aff / mu).clamp(0.0, 1.0).powf(expon)
            } else {
                0.0
            };

            // Rc S^{-1} = sigma mu S^{-1} - X - dXa dSa S^{-1}
            let mut rc: Blocks = sinv.iter().map(|b| b.scale(sigma * mu)).collect();
            blocks_axpy(&mut rc, -1.0, &x);
            blocks_axpy(&mut rc, -1.0, &blocks_mul(&blocks_mul(&dxa, &dsa), &sinv));
            let (dx, dy, ds) = direction(&rc);

            let gamma = 0.9 + 0.09 * last_step;
            let ap = (gamma * max_step(&x, &dx)).min(1.0);
            let ad = (gamma * max_step(&s, &ds)).min(1.0);
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
            last_step = ap.min(ad);
            blocks_axpy(&mut x, ap, &dx);
            blocks_axpy(&mut s, ad, &ds);
            for (yi, d) in y.iter_mut().zip(&dy) {
                *yi += ad * d;
            }
            x = blocks_sym(x);
            s = blocks_sym(s);
        }

        let (rel_gap, pinf, dinf) = last;
        let current_merit = rel_gap.max(pinf).max(dinf);
        match best {
            Some((merit, bx, by, bg, bp, bd))
                if merit < current_merit || !current_merit.is_finite() =>
            {
                IpmRun {
                    x: bx,
                    y: by,
                    rel_gap: bg,
                    pinf: bp,
                    dinf: bd,
                    iterations,
                }
            }
            _ => IpmRun {
                x,
                y,
                rel_gap,
                pinf,
                dinf,
                iterations,
            },
        }
    }
}

/// Solves `m x = rhs` with the (possibly shifted) factor `lm`, followed by
/// a few steps of iterative refinement against `m` itself.
fn refined_solve(m: &RealMatrix, lm: &RealMatrix, rhs: &[f64]) -> Vec<f64> {
    let k = rhs.len();
    let mut x = rhs.to_vec();
    cholesky_solve(lm, &mut x);
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut res_norm = f64::INFINITY;
    for _ in 0..3 {
        let mut r = rhs.to_vec();
        let ms = m.as_slice();
        for i in 0..k {
            let row = &ms[i * k..(i + 1) * k];
            r[i] -= row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        }
        let rn = norm(&r);
        if !(rn < 0.5 * res_norm) || rn <= 1e-15 * norm(rhs) {
            break;
        }
        res_norm = rn;
        cholesky_solve(lm, &mut r);
        for (xi, ri) in x.iter_mut().zip(&r) {
            *xi += ri;
        }
    }
    x
}

/// Cholesky of the Schur complement with a growing diagonal shift fallback.
fn factor_schur(m: &RealMatrix) -> Option<RealMatrix> {
    if m.rows() == 0 {
        return Some(RealMatrix::zeros(0, 0));
    }
    if let Some(l) = cholesky(m) {
        return Some(l);
    }
    let dmax = (0..m.rows())
        .map(|i| m[(i, i)].abs())
        .fold(0.0f64, f64::max);
    let mut shift = 1e-14 * dmax.max(1e-300);
    for _ in 0..8 {
        let mut reg = m.clone();
        for i in 0..m.rows() {
            reg[(i, i)] += shift;
        }
        if let Some(l) = cholesky(&reg) {
            return Some(l);
        }
        shift *= 100.0;
    }
    None
}

/// Eigenvalues of every block, ascending, for reporting.
pub fn block_spectra(blocks: &[RealMatrix]) -> Vec<Vec<f64>> {
    blocks.iter().map(sym_eigenvalues).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambda_max_problem(a: &RealMatrix) -> SdpProblem {
        let n = a.rows();
        let mut p = SdpProblem::new(vec![n]);
        p.set_constant(SparseSym::from_dense(0, &a.scale(-1.0)).unwrap());
        p.add_variable(
            1.0,
            SparseSym::from_dense(0, &RealMatrix::identity(n)).unwrap(),
        );
        p
    }

    #[test]
    fn lambda_max_of_diagonal() {
        let p = lambda_max_problem(&RealMatrix::diag(&[1.0, 5.0, 3.0]));
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!(
            (sol.objective_value - 5.0).abs() < 1e-7,
            "{}",
            sol.objective_value
        );
        assert!(sol.residuals.min_eigenvalue >= -1e-8);
    }

    #[test]
    fn negative_identity_is_infeasible() {
        let mut p = SdpProblem::new(vec![2]);
        p.set_constant(SparseSym::from_dense(0, &RealMatrix::identity(2).scale(-1.0)).unwrap());
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);

        // Same constraint with a variable that cannot help.
        let mut q = SdpProblem::new(vec![2, 1]);
        let mut f0 = SparseSym::from_dense(0, &RealMatrix::identity(2).scale(-1.0)).unwrap();
        f0.add(1, 0, 0, 1.0);
        q.set_constant(f0);
        let mut f1 = SparseSym::new();
        f1.add(1, 0, 0, 1.0);
        q.add_variable(1.0, f1);
        let sol = solve(&q, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
    }

    #[test]
    fn asymmetric_pencil_rejected() {
        let a = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            SparseSym::from_dense(0, &a),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn bad_tolerance_rejected() {
        let p = lambda_max_problem(&RealMatrix::identity(2));
        assert!(solve(&p, &SolverOptions::with_tol(0.5)).is_err());
    }

    #[test]
    fn standard_form_trace_program() {
        // min <A, X> s.t. tr X = 1 gives lambda_min(A).
        let a = RealMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let mut sf = StandardForm::new();
        let b = sf.add_block(2);
        let mut obj = Functional::new();
        for i in 0..2 {
            for j in 0..2 {
                obj.add(b, i, j, a[(i, j)]);
            }
        }
        sf.minimize(obj);
        let mut tr = Functional::new();
        tr.add(b, 0, 0, 1.0);
        tr.add(b, 1, 1, 1.0);
        sf.constrain(tr, 1.0);
        let sol = sf.solve(&SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - 1.0).abs() < 1e-8);
        assert!((sol.lower_bound - 1.0).abs() < 1e-8);
    }

    #[test]
    fn functional_symmetrises_terms() {
        let mut f = Functional::new();
        f.add(0, 0, 1, 3.0);
        f.add(0, 1, 0, 1.0);
        let s = f.into_sparse();
        let x = RealMatrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        assert!((s.dot(&[x]) - 8.0).abs() < 1e-15);
    }
}
