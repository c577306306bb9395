//! Choi matrices, complete positivity, Kraus and Stinespring data.
//!
//! For a map `Φ : M_n(ℝ) → M_N(ℝ)` the Choi matrix is
//! `C = Σ E_ij ⊗ Φ(E_ij)`, indexed so that `C[(i·N + a), (j·N + b)] =
//! Φ(E_ij)[a, b]`. A real map is completely positive exactly when it is
//! *-preserving and `C` is positive semidefinite. Maps defined on a proper
//! subsystem are tested through an extension program: look for an ambient
//! map with positive Choi matrix agreeing with `u` on the subsystem.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{
    c_form, max_eigenvalue, min_eigenvalue, op_norm, realify, sym_eig, ComplexMatrix, RealMatrix,
    PSD_TOL,
};
use crate::opsys::{LinearMap, MatrixSystem, SystemKind};
use crate::sdp::{Functional, SdpStatus, SolverOptions, StandardForm};

/// Choi matrix of a map out of `M_n(ℝ)` (or, with `complex`, of a
/// complex-linear map out of `M_n(ℂ)`, realified).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChoiMatrix {
    /// Domain matrix size.
    pub n: usize,
    /// Codomain matrix size (complex size when `complex`).
    pub m: usize,
    pub complex: bool,
    pub matrix: RealMatrix,
}

impl ChoiMatrix {
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix.symmetric_part())
    }

    /// Symmetric and PSD at `tol·max(1, ‖C‖)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let scale = op_norm(&self.matrix).max(1.0);
        self.matrix.asymmetry() <= tol * scale && self.min_eigenvalue() >= -tol * scale
    }
}

/// `Φ(x)` for the map with Choi matrix `c` (`n·N` square).
pub fn choi_apply(c: &RealMatrix, n: usize, x: &RealMatrix) -> RealMatrix {
    let big = c.rows() / n;
    let mut out = RealMatrix::zeros(big, big);
    for i in 0..n {
        for j in 0..n {
            let w = x[(i, j)];
            if w != 0.0 {
                out.axpy(w, &c.block(i * big, j * big, big, big));
            }
        }
    }
    out
}

/// `Σ_ij E_ij ⊗ f(E_ij)` for an ambient map `f : M_n → M_N`.
pub fn choi_of_fn(n: usize, big: usize, f: impl Fn(&RealMatrix) -> RealMatrix) -> RealMatrix {
    let mut c = RealMatrix::zeros(n * big, n * big);
    for i in 0..n {
        for j in 0..n {
            c.set_block(i * big, j * big, &f(&RealMatrix::unit(n, n, i, j)));
        }
    }
    c
}

fn complex_codomain_size(u: &LinearMap) -> Result<usize> {
    let w = u.codomain();
    let Some(j) = w.complex_structure() else {
        return Err(Error::UnsupportedDomain(
            "complex Choi matrix needs a complexified codomain".into(),
        ));
    };
    let m = w.ambient() / 2;
    let expected = c_form(&RealMatrix::zeros(m, m), &RealMatrix::identity(m));
    if !w.ambient().is_multiple_of(2) || (j - &expected).max_abs() > 1e-12 {
        return Err(Error::UnsupportedDomain(
            "codomain complex structure is not c(0, I)".into(),
        ));
    }
    Ok(m)
}

/// Choi matrix of `u`.
///
/// Supported domains are `M_n(ℝ)` and, for maps commuting with the complex
/// structure, `M_n(ℂ)` (the complex Choi matrix is returned realified).
pub fn choi(u: &LinearMap) -> Result<ChoiMatrix> {
    let v = u.domain();
    match v.kind() {
        SystemKind::FullReal { n } => {
            let n = *n;
            let m = u.codomain().ambient();
            let c = choi_of_fn(n, m, |e| u.apply_unchecked(e));
            Ok(ChoiMatrix {
                n,
                m,
                complex: false,
                matrix: c,
            })
        }
        SystemKind::ComplexFull { n } => {
            let n = *n;
            if !u.commutes_with_complex_structure(1e-10)? {
                return Err(Error::UnsupportedDomain(
                    "map on M_n(C) is not complex-linear; use the extension program".into(),
                ));
            }
            let m = complex_codomain_size(u)?;
            let zero = RealMatrix::zeros(n, n);
            let mut re = RealMatrix::zeros(n * m, n * m);
            let mut im = RealMatrix::zeros(n * m, n * m);
            for i in 0..n {
                for j in 0..n {
                    let img = u.apply_unchecked(&c_form(&RealMatrix::unit(n, n, i, j), &zero));
                    re.set_block(i * m, j * m, &img.block(0, 0, m, m));
                    im.set_block(i * m, j * m, &img.block(m, 0, m, m));
                }
            }
            let z = ComplexMatrix::new(re, im)?;
            Ok(ChoiMatrix {
                n,
                m,
                complex: true,
                matrix: realify(&z)?,
            })
        }
        _ => Err(Error::UnsupportedDomain(format!(
            "Choi matrix needs a full matrix algebra domain, got `{}`",
            v.label()
        ))),
    }
}

/// Inverse of [`choi`].
pub fn map_from_choi(
    c: &ChoiMatrix,
    domain: &Arc<MatrixSystem>,
    codomain: &Arc<MatrixSystem>,
) -> Result<LinearMap> {
    if !c.complex {
        if c.matrix.shape() != (c.n * c.m, c.n * c.m)
            || domain.ambient() != c.n
            || codomain.ambient() != c.m
        {
            return Err(Error::Shape(
                "Choi matrix does not match the systems".into(),
            ));
        }
        return LinearMap::from_fn(domain, codomain, |x| choi_apply(&c.matrix, c.n, x));
    }
    let (n, m) = (c.n, c.m);
    let nm = n * m;
    if c.matrix.shape() != (2 * nm, 2 * nm)
        || domain.ambient() != 2 * n
        || codomain.ambient() != 2 * m
    {
        return Err(Error::Shape(
            "complex Choi matrix does not match the systems".into(),
        ));
    }
    let re = c.matrix.block(0, 0, nm, nm);
    let im = c.matrix.block(nm, 0, nm, nm);
    LinearMap::from_fn(domain, codomain, |z| {
        let x = z.block(0, 0, n, n);
        let y = z.block(n, 0, n, n);
        // (x + iy) applied through (re + i im) blockwise.
        let a = &choi_apply(&re, n, &x) - &choi_apply(&im, n, &y);
        let b = &choi_apply(&im, n, &x) + &choi_apply(&re, n, &y);
        c_form(&a, &b)
    })
}

/// Kraus factors `K_k` (`n × N`) with `Φ(x) = Σ K_kᵀ x K_k`, from a PSD Choi
/// matrix. Eigenvalues at or below `1e-10·λ_max` are dropped.
pub fn kraus_from_choi(c: &RealMatrix, n: usize) -> Result<Vec<RealMatrix>> {
    let big = c.rows() / n;
    let eig = sym_eig(&c.symmetric_part())?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut out = Vec::new();
    if top == 0.0 {
        return Ok(out);
    }
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 1e-10 * top {
            break;
        }
        let s = lam.sqrt();
        out.push(RealMatrix::from_fn(n, big, |i, a| {
            s * eig.vectors[(i * big + a, k)]
        }));
    }
    Ok(out)
}

/// `Σ K_kᵀ x K_k`.
pub fn kraus_apply(kraus: &[RealMatrix], x: &RealMatrix) -> RealMatrix {
    let big = kraus.first().map(|k| k.cols()).unwrap_or(0);
    let mut out = RealMatrix::zeros(big, big);
    for k in kraus {
        out += &k.tr_matmul(&x.matmul(k));
    }
    out
}

/// Verdict of a complete-positivity test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpStatus {
    Cp,
    NotCp,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CpVerdict {
    pub status: CpStatus,
    /// Largest `λ` with `C − λI ⪰ 0` over admissible Choi matrices `C`
    /// (the Choi minimum eigenvalue for full domains). `None` when the map is
    /// not *-preserving.
    pub margin: Option<f64>,
    /// Distance between `u*` and `u` on the domain basis.
    pub star_defect: f64,
    /// Choi matrix of `u` or of the best ambient extension.
    pub witness: Option<ChoiMatrix>,
    pub solver_iterations: usize,
}

impl CpVerdict {
    pub fn is_cp(&self) -> bool {
        self.status == CpStatus::Cp
    }
}

/// Complete positivity of `u` at PSD tolerance `tol` (relative to the Choi
/// scale).
pub fn is_cp(u: &LinearMap, tol: f64) -> Result<CpVerdict> {
    is_cp_with(u, tol, &SolverOptions::with_tol(1e-10))
}

pub fn is_cp_with(u: &LinearMap, tol: f64, opts: &SolverOptions) -> Result<CpVerdict> {
    let star_defect = u.involute().distance(u)?;
    let scale = u.size().max(1.0);
    if star_defect > 1e-9 * scale {
        return Ok(CpVerdict {
            status: CpStatus::NotCp,
            margin: None,
            star_defect,
            witness: None,
            solver_iterations: 0,
        });
    }
    let direct = match u.domain().kind() {
        SystemKind::FullReal { .. } => Some(choi(u)?),
        SystemKind::ComplexFull { .. }
            if u.commutes_with_complex_structure(1e-10).unwrap_or(false) =>
        {
            Some(choi(u)?)
        }
        _ => None,
    };
    if let Some(c) = direct {
        let sym = c.matrix.symmetric_part();
        let lam = min_eigenvalue(&sym);
        let cscale = op_norm(&sym).max(1.0);
        let status = if lam >= -tol * cscale {
            CpStatus::Cp
        } else {
            CpStatus::NotCp
        };
        return Ok(CpVerdict {
            status,
            margin: Some(lam),
            star_defect,
            witness: Some(c),
            solver_iterations: 0,
        });
    }
    extension_margin(u, tol, star_defect, opts)
}

/// Ambient extension `x ↦ u(P_V x)` of a map on a subsystem, as a Choi matrix.
pub fn projected_extension_choi(u: &LinearMap) -> RealMatrix {
    let v = u.domain();
    choi_of_fn(v.ambient(), u.codomain().ambient(), |e| {
        u.apply_unchecked(&v.project(e))
    })
}

fn extension_margin(
    u: &LinearMap,
    tol: f64,
    star_defect: f64,
    opts: &SolverOptions,
) -> Result<CpVerdict> {
    let v = u.domain();
    let n = v.ambient();
    let m = u.codomain().ambient();
    let c0 = projected_extension_choi(u).symmetric_part();
    let lower = min_eigenvalue(&c0) - 1.0;

    // C = C' + (lower + s) I, C' ⪰ 0, s ≥ 0, maximise s.
    let mut sf = StandardForm::new();
    let blk = sf.add_block(n * m);
    let sblk = sf.add_block(1);
    let layout = ChoiBlock::new(blk, n, m);
    for (vb, parity) in parity_basis(v) {
        let target = u.apply_unchecked(&vb);
        let tr = vb.trace();
        for (p, q) in parity.corner_entries(m, true) {
            let mut f = Functional::new();
            layout.entry(&mut f, &vb, p, q, 1.0);
            let mut rhs = target[(p, q)];
            if p == q && tr != 0.0 {
                f.add(sblk, 0, 0, tr);
                rhs -= lower * tr;
            }
            sf.constrain(f, rhs);
        }
    }
    let mut obj = Functional::new();
    obj.add(sblk, 0, 0, -1.0);
    sf.minimize(obj);
    let sol = sf.solve(opts)?;
    let s = sol.x[sblk][(0, 0)];
    let lam = lower + s;
    let mut witness = sol.x[blk].clone();
    for i in 0..n * m {
        witness[(i, i)] += lam;
    }
    let cscale = op_norm(&witness).max(1.0);
    // A returned point that is PSD and reproduces u is a certificate whatever
    // the solver status (faces with no interior stall the solver near 0).
    let reproduction = parity_basis(v)
        .iter()
        .map(|(vb, _)| (&choi_apply(&witness, n, vb) - &u.apply_unchecked(vb)).frobenius_norm())
        .fold(0.0, f64::max);
    let certified = reproduction <= 1e-7 * u.size().max(1.0)
        && min_eigenvalue(&witness.symmetric_part()) >= -tol * cscale;
    let status = match sol.status {
        SdpStatus::Optimal if lam >= -tol * cscale => CpStatus::Cp,
        _ if certified => CpStatus::Cp,
        SdpStatus::Optimal => CpStatus::NotCp,
        SdpStatus::Infeasible => CpStatus::NotCp,
        SdpStatus::Indeterminate => CpStatus::Indeterminate,
    };
    Ok(CpVerdict {
        status,
        margin: Some(lam),
        star_defect,
        witness: Some(ChoiMatrix {
            n,
            m,
            complex: false,
            matrix: witness,
        }),
        solver_iterations: sol.residuals.iterations,
    })
}

/// Kraus data of a completely positive map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StinespringData {
    pub kraus: Vec<RealMatrix>,
    /// Number of Kraus factors.
    pub dilation_dim: usize,
    /// `‖Σ K_kᵀ K_k‖ = ‖T‖²` for the stacked column `T`.
    pub t_norm_sq: f64,
    /// Largest reconstruction error over the domain basis.
    pub residual: f64,
}

impl StinespringData {
    fn from_kraus(kraus: Vec<RealMatrix>, big: usize) -> Self {
        let mut gram = RealMatrix::zeros(big, big);
        for k in &kraus {
            gram += &k.tr_matmul(k);
        }
        Self {
            dilation_dim: kraus.len(),
            t_norm_sq: max_eigenvalue(&gram).max(0.0),
            kraus,
            residual: 0.0,
        }
    }

    /// `T`, the Kraus factors stacked vertically (`r·n × N`), so that
    /// `Φ(x) = Tᵀ (I_r ⊗ x) T`.
    pub fn stacked(&self) -> RealMatrix {
        let Some(first) = self.kraus.first() else {
            return RealMatrix::zeros(0, 0);
        };
        let (n, big) = first.shape();
        let mut t = RealMatrix::zeros(n * self.kraus.len(), big);
        for (k, kr) in self.kraus.iter().enumerate() {
            t.set_block(k * n, 0, kr);
        }
        t
    }
}

/// Kraus decomposition of a CP map on `M_n(ℝ)`.
pub fn kraus_stinespring(u: &LinearMap) -> Result<StinespringData> {
    if !matches!(u.domain().kind(), SystemKind::FullReal { .. }) {
        return Err(Error::UnsupportedDomain(
            "Kraus extraction needs a full real matrix algebra domain".into(),
        ));
    }
    let verdict = is_cp(u, PSD_TOL)?;
    if !verdict.is_cp() {
        return Err(Error::Precondition("map is not completely positive".into()));
    }
    let c = choi(u)?;
    let kraus = kraus_from_choi(&c.matrix, c.n)?;
    let mut data = StinespringData::from_kraus(kraus, c.m);
    data.residual = u
        .domain()
        .basis()
        .iter()
        .zip(u.images())
        .map(|(b, ub)| (ub - &kraus_apply(&data.kraus, b)).frobenius_norm())
        .fold(0.0, f64::max);
    Ok(data)
}

/// Kraus data for an ambient map given by its (PSD) Choi matrix.
pub fn stinespring_from_choi(c: &RealMatrix, n: usize) -> Result<StinespringData> {
    let kraus = kraus_from_choi(c, n)?;
    let mut data = StinespringData::from_kraus(kraus, c.rows() / n);
    data.residual = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let e = RealMatrix::unit(n, n, i, j);
            let direct = choi_apply(c, n, &e);
            (&direct - &kraus_apply(&data.kraus, &e)).frobenius_norm()
        })
        .fold(0.0, f64::max);
    Ok(data)
}

/// Density matrix of the normalized trace on `M_n`.
pub fn normalized_trace_density(n: usize) -> RealMatrix {
    RealMatrix::identity(n).scale(1.0 / n as f64)
}

/// `a = φ(I)^{1/2}` and a unital CP `ψ : V → M_m` with `φ = a ψ(·) a`.
///
/// On the kernel projection `1 − e` of `a`, `ψ` is padded with the
/// normalized trace times `1 − e`.
pub fn normalize_ucp(phi: &LinearMap) -> Result<(RealMatrix, LinearMap)> {
    let verdict = is_cp(phi, 1e-8)?;
    if !verdict.is_cp() {
        return Err(Error::Precondition("normalize_ucp needs a CP map".into()));
    }
    let v = phi.domain();
    let m = phi.codomain().ambient();
    let p = phi.at_identity().symmetric_part();
    let eig = sym_eig(&p)?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let cut = 1e-10 * top.max(f64::MIN_POSITIVE);
    let mut a = RealMatrix::zeros(m, m);
    let mut a_pinv = RealMatrix::zeros(m, m);
    let mut e = RealMatrix::zeros(m, m);
    for k in 0..m {
        let lam = eig.values[k];
        let q = RealMatrix::from_fn(m, m, |r, c| eig.vectors[(r, k)] * eig.vectors[(c, k)]);
        if lam > cut {
            a.axpy(lam.sqrt(), &q);
            a_pinv.axpy(1.0 / lam.sqrt(), &q);
            e += &q;
        }
    }
    let rest = &RealMatrix::identity(m) - &e;
    let n = v.ambient();
    let target = Arc::new(MatrixSystem::full_real(m)?);
    let psi = LinearMap::from_fn(v, &target, |x| {
        let mut out = a_pinv.matmul(&phi.apply_unchecked(x)).matmul(&a_pinv);
        out.axpy(x.trace() / n as f64, &rest);
        out
    })?;
    Ok((a, psi))
}

/// Pads witnesses to unital ones: `s' = s + ψ(·)(I − s(I))` with
/// `ψ(x) = tr(ρ x)`.
pub fn ucp_witnesses(
    u: &LinearMap,
    s1: &LinearMap,
    s2: &LinearMap,
    density: &RealMatrix,
) -> Result<(LinearMap, LinearMap)> {
    let n = u.domain().ambient();
    if density.shape() != (n, n) {
        return Err(Error::Shape(
            "state density does not match the domain".into(),
        ));
    }
    let mut out = Vec::with_capacity(2);
    for s in [s1, s2] {
        if !s.domain().same_span(u.domain()) {
            return Err(Error::InvalidMap("witness domain differs from u".into()));
        }
        let si = s.at_identity();
        let norm = op_norm(&si);
        if norm > 1.0 + 1e-9 {
            return Err(Error::Precondition(format!(
                "witness has ‖s(I)‖ = {norm:.6} > 1"
            )));
        }
        let m = s.codomain().ambient();
        let r = &RealMatrix::identity(m) - &si;
        let padded = LinearMap::from_fn(u.domain(), s.codomain(), |x| {
            let mut out = s.apply_unchecked(x);
            out.axpy(density.dot(x), &r);
            out
        })?;
        out.push(padded);
    }
    let s2p = out.pop().expect("two witnesses");
    let s1p = out.pop().expect("two witnesses");
    Ok((s1p, s2p))
}

/// `x ↦ [[s1(x), u(x)], [u*(x), s2(x)]]` into `M_2m(ℝ)`.
pub fn block_map(s1: &LinearMap, u: &LinearMap, s2: &LinearMap) -> Result<LinearMap> {
    let m = u.codomain().ambient();
    let ustar = u.involute();
    let target = Arc::new(MatrixSystem::full_real(2 * m)?);
    LinearMap::from_fn(u.domain(), &target, |x| {
        let mut out = RealMatrix::zeros(2 * m, 2 * m);
        out.set_block(0, 0, &s1.apply_unchecked(x));
        out.set_block(0, m, &u.apply_unchecked(x));
        out.set_block(m, 0, &ustar.apply_unchecked(x));
        out.set_block(m, m, &s2.apply_unchecked(x));
        out
    })
}

/// `x ↦ c(s(x), u(x)) = [[s(x), −u(x)], [u(x), s(x)]]` into `M_2m(ℝ)`.
pub fn c_block_map(s: &LinearMap, u: &LinearMap) -> Result<LinearMap> {
    let m = u.codomain().ambient();
    let target = Arc::new(MatrixSystem::full_real(2 * m)?);
    LinearMap::from_fn(u.domain(), &target, |x| {
        c_form(&s.apply_unchecked(x), &u.apply_unchecked(x))
    })
}

/// Parity of an orthonormal domain basis element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Parity {
    Sym,
    Anti,
}

impl Parity {
    /// Independent entries `(p, q)` of an `m × m` image: all of them for an
    /// off-diagonal corner, else the upper (sym) or strict upper (anti) triangle.
    pub(crate) fn corner_entries(self, m: usize, diagonal_corner: bool) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..m {
            for q in 0..m {
                let keep = !diagonal_corner
                    || match self {
                        Parity::Sym => p <= q,
                        Parity::Anti => p < q,
                    };
                if keep {
                    out.push((p, q));
                }
            }
        }
        out
    }
}

/// Orthonormal basis of a system split by parity.
pub(crate) fn parity_basis(v: &MatrixSystem) -> Vec<(RealMatrix, Parity)> {
    v.sym_basis()
        .iter()
        .map(|b| (b.clone(), Parity::Sym))
        .chain(v.anti_basis().iter().map(|b| (b.clone(), Parity::Anti)))
        .collect()
}

/// Location of a Choi matrix for a map `M_n → M_N` inside an SDP block.
///
/// With different row and column offsets the block addresses the
/// off-diagonal part `X` of a larger matrix, read as the "Choi matrix"
/// `Σ E_ij ⊗ Φ_X(E_ij)` of a map that need not be *-preserving.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ChoiBlock {
    pub block: usize,
    pub n: usize,
    pub big: usize,
    pub row_off: usize,
    pub col_off: usize,
}

impl ChoiBlock {
    pub(crate) fn new(block: usize, n: usize, big: usize) -> Self {
        Self::at(block, n, big, 0, 0)
    }

    pub(crate) fn at(block: usize, n: usize, big: usize, row_off: usize, col_off: usize) -> Self {
        Self {
            block,
            n,
            big,
            row_off,
            col_off,
        }
    }

    /// Adds `coef · Φ(x)[a, b]`.
    pub(crate) fn entry(&self, f: &mut Functional, x: &RealMatrix, a: usize, b: usize, coef: f64) {
        for i in 0..self.n {
            for j in 0..self.n {
                let w = x[(i, j)];
                if w != 0.0 {
                    f.add(
                        self.block,
                        self.row_off + i * self.big + a,
                        self.col_off + j * self.big + b,
                        coef * w,
                    );
                }
            }
        }
    }

    /// Requires `Φ(v)[r0.., c0..]` (an `m × m` corner) to equal `target(v)`
    /// for each parity basis element `v`.
    pub(crate) fn match_corner(
        &self,
        sf: &mut StandardForm,
        basis: &[(RealMatrix, Parity)],
        r0: usize,
        c0: usize,
        m: usize,
        target: impl Fn(&RealMatrix) -> RealMatrix,
    ) {
        let diagonal = r0 == c0 && self.row_off == self.col_off;
        for (v, parity) in basis {
            let t = target(v);
            for (p, q) in parity.corner_entries(m, diagonal) {
                let mut f = Functional::new();
                self.entry(&mut f, v, r0 + p, c0 + q, 1.0);
                sf.constrain(f, t[(p, q)]);
            }
        }
    }

    /// Requires the diagonal corner `Φ(v)[r0.., r0..]` to lie in `w`.
    pub(crate) fn corner_in(
        &self,
        sf: &mut StandardForm,
        basis: &[(RealMatrix, Parity)],
        r0: usize,
        w: &MatrixSystem,
    ) {
        for (v, parity) in basis {
            let complement = match parity {
                Parity::Sym => w.sym_complement(),
                Parity::Anti => w.anti_complement(),
            };
            for c in complement {
                let mut f = Functional::new();
                let m = c.rows();
                for p in 0..m {
                    for q in 0..m {
                        let cv = c[(p, q)];
                        if cv != 0.0 {
                            self.entry(&mut f, v, r0 + p, r0 + q, cv);
                        }
                    }
                }
                sf.constrain(f, 0.0);
            }
        }
    }

    /// Functional for `Φ(I)[r0 + p, r0 + q]`.
    pub(crate) fn identity_entry(&self, r0: usize, p: usize, q: usize) -> Functional {
        let mut f = Functional::new();
        for i in 0..self.n {
            f.add(
                self.block,
                self.row_off + i * self.big + r0 + p,
                self.col_off + i * self.big + r0 + q,
                1.0,
            );
        }
        f
    }
}

/// Adds `Σ + Φ(I)[corner] − t I = 0` with fresh PSD slack `Σ`.
pub(crate) fn bound_identity_corner(
    sf: &mut StandardForm,
    layout: &ChoiBlock,
    r0: usize,
    m: usize,
    t_block: usize,
) {
    let slack = sf.add_block(m);
    for p in 0..m {
        for q in p..m {
            let mut f = layout.identity_entry(r0, p, q);
            f.add(slack, p, q, 1.0);
            if p == q {
                f.add(t_block, 0, 0, -1.0);
            }
            sf.constrain(f, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::sym_eigenvalues;

    fn m(n: usize) -> Arc<MatrixSystem> {
        Arc::new(MatrixSystem::full_real(n).unwrap())
    }

    #[test]
    fn choi_of_identity_and_transpose() {
        let m2 = m(2);
        let id = LinearMap::identity(&m2);
        let c = choi(&id).unwrap();
        assert!((c.matrix.trace() - 2.0).abs() < 1e-15);
        let ev = sym_eigenvalues(&c.matrix);
        assert!((ev[3] - 2.0).abs() < 1e-12 && ev[2].abs() < 1e-12);
        let t = LinearMap::from_fn(&m2, &m2, |x| x.transpose()).unwrap();
        let ev = sym_eigenvalues(&choi(&t).unwrap().matrix);
        let expect = [-1.0, 1.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(is_cp(&id, 1e-9).unwrap().is_cp());
        assert_eq!(is_cp(&t, 1e-9).unwrap().status, CpStatus::NotCp);
    }

    #[test]
    fn choi_round_trip() {
        let m2 = m(2);
        let m3 = m(3);
        let a = RealMatrix::from_fn(2, 3, |i, j| (i as f64) - 0.5 * j as f64 + 0.25);
        let u = LinearMap::from_fn(&m2, &m3, |x| a.tr_matmul(&x.matmul(&a))).unwrap();
        let c = choi(&u).unwrap();
        let back = map_from_choi(&c, &m2, &m3).unwrap();
        assert_eq!(back.distance(&u).unwrap(), 0.0);
        let k = kraus_stinespring(&u).unwrap();
        assert_eq!(k.dilation_dim, 1);
        assert!(k.residual < 1e-12);
        let k0 = &k.kraus[0];
        let same = (k0 - &a).max_abs().min((k0 + &a).max_abs());
        assert!(same < 1e-10);
    }

    #[test]
    fn trace_map_has_four_kraus_factors() {
        let m2 = m(2);
        let u = LinearMap::from_fn(&m2, &m2, |x| RealMatrix::identity(2).scale(x.trace())).unwrap();
        let k = kraus_stinespring(&u).unwrap();
        assert_eq!(k.dilation_dim, 4);
        assert!(k.residual < 1e-12);
        assert!((k.t_norm_sq - 2.0).abs() < 1e-12);
    }

    #[test]
    fn complex_choi_round_trip() {
        let c2 = Arc::new(MatrixSystem::complex_full(2).unwrap());
        let id = LinearMap::identity(&c2);
        let c = choi(&id).unwrap();
        assert!(c.complex);
        assert!(c.is_psd(1e-12));
        let back = map_from_choi(&c, &c2, &c2).unwrap();
        assert!(back.distance(&id).unwrap() < 1e-14);
        // Entrywise imaginary part is not complex-linear.
        let n = 2;
        let im = LinearMap::from_fn(&c2, &c2, |z| {
            c_form(&z.block(n, 0, n, n), &RealMatrix::zeros(n, n))
        })
        .unwrap();
        assert!(matches!(choi(&im), Err(Error::UnsupportedDomain(_))));
    }

    #[test]
    fn subsystem_domain_cp() {
        let l2 = Arc::new(MatrixSystem::ell_inf(2).unwrap());
        let m2 = m(2);
        // Positive on diagonals, hence CP on the commutative domain.
        let u = LinearMap::new(
            &l2,
            &m2,
            vec![
                RealMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap(),
                RealMatrix::diag(&[2.0, 0.0]),
            ],
        )
        .unwrap();
        let v = is_cp(&u, 1e-8).unwrap();
        assert!(v.is_cp(), "{v:?}");
        let w = v.witness.unwrap();
        assert!(w.min_eigenvalue() > -1e-8);
        let neg = u.scale(-1.0);
        assert_eq!(is_cp(&neg, 1e-8).unwrap().status, CpStatus::NotCp);
    }

    #[test]
    fn normalize_scalar_multiple() {
        let m2 = m(2);
        let u = LinearMap::from_fn(&m2, &m2, |x| RealMatrix::identity(2).scale(2.0 * x.trace()))
            .unwrap();
        let (a, psi) = normalize_ucp(&u).unwrap();
        assert!((&a - &RealMatrix::identity(2).scale(2.0)).max_abs() < 1e-12);
        assert!((&psi.at_identity() - &RealMatrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn unital_witnesses_unchanged() {
        let m2 = m(2);
        let id = LinearMap::identity(&m2);
        let rho = normalized_trace_density(2);
        let (s1, s2) = ucp_witnesses(&id, &id, &id, &rho).unwrap();
        assert!(s1.distance(&id).unwrap() < 1e-15 && s2.distance(&id).unwrap() < 1e-15);
        let big = id.scale(2.0);
        assert!(matches!(
            ucp_witnesses(&id, &big, &id, &rho),
            Err(Error::Precondition(_))
        ));
    }
}
