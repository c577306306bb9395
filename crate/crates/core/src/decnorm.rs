//! Decomposable and completely bounded norms, and the structure theory of
//! selfadjoint and skew maps.
//!
//! `‖u‖_dec` is the least `t` for which there are completely positive
//! `S1, S2 : V → W` with `‖S1(I)‖, ‖S2(I)‖ ≤ t` and
//! `[[S1, u], [u*, S2]]` completely positive. It is computed by searching
//! for an ambient extension `Φ : M_n → M_2m` of that block map with positive
//! Choi matrix; codomain membership of the diagonal corners is imposed on the
//! domain basis. `‖u‖_cb` uses the Paulsen system instead and never needs
//! codomain membership.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cpmap::{
    bound_identity_corner, choi_apply, is_cp_with, normalized_trace_density, parity_basis,
    stinespring_from_choi, ChoiBlock, StinespringData,
};
use crate::error::{Error, Result};
use crate::mat::{c_form, op_norm, RealMatrix};
use crate::opsys::{LinearMap, MatrixSystem, SystemKind};
use crate::sdp::{Functional, Residuals, SdpStatus, SolverOptions, StandardForm, StandardSolution};

/// Value of a decomposable norm program.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecValue {
    Finite(f64),
    NotDecomposable,
}

/// Result of [`dec_norm`].
#[derive(Clone, Debug)]
pub struct DecResult {
    pub value: DecValue,
    /// Witness pair, restricted to the domain and projected into the codomain.
    pub s1: Option<LinearMap>,
    pub s2: Option<LinearMap>,
    /// Dual objective of the program (a lower bound on the norm).
    pub lower_bound: f64,
    /// `max(‖S1(I)‖, ‖S2(I)‖)` for the returned witnesses.
    pub witness_norm: f64,
    /// Choi matrix of the optimal ambient extension `Φ : M_n → M_2m`.
    pub extension: Option<RealMatrix>,
    pub residuals: Residuals,
}

impl DecResult {
    pub fn value(&self) -> Option<f64> {
        match self.value {
            DecValue::Finite(v) => Some(v),
            DecValue::NotDecomposable => None,
        }
    }

    /// Width of the bracket `[lower_bound, value]`.
    pub fn bracket(&self) -> f64 {
        self.value()
            .map(|v| (v - self.lower_bound).abs())
            .unwrap_or(f64::NAN)
    }

    /// `(S1 + S2)/2`, a single witness for skew `u`.
    pub fn averaged_witness(&self) -> Option<LinearMap> {
        let (a, b) = (self.s1.as_ref()?, self.s2.as_ref()?);
        a.combine(0.5, b, 0.5).ok()
    }
}

fn default_opts() -> SolverOptions {
    SolverOptions::default()
}

fn check_status(sol: &StandardSolution, what: &str) -> Result<bool> {
    match sol.status {
        SdpStatus::Optimal => Ok(true),
        SdpStatus::Infeasible => Ok(false),
        SdpStatus::Indeterminate => Err(Error::Indeterminate(format!(
            "{what}: gap {:.2e}, primal {:.2e}, dual {:.2e} after {} iterations",
            sol.residuals.duality_gap,
            sol.residuals.primal_infeasibility,
            sol.residuals.dual_infeasibility,
            sol.residuals.iterations
        ))),
    }
}

/// Witness map `b ↦ P_W(Φ(b)[r0.., r0..])` on the domain's user basis.
fn corner_map(u: &LinearMap, c: &RealMatrix, n: usize, r0: usize, m: usize) -> Result<LinearMap> {
    let w = u.codomain();
    LinearMap::from_fn(u.domain(), w, |b| {
        let img = choi_apply(c, n, b).block(r0, r0, m, m);
        w.project(&img)
    })
}

/// `‖u‖_dec` with default solver options.
pub fn dec_norm(u: &LinearMap) -> Result<DecResult> {
    dec_norm_with(u, &default_opts())
}

pub fn dec_norm_with(u: &LinearMap, opts: &SolverOptions) -> Result<DecResult> {
    let v = u.domain();
    let w = u.codomain();
    let n = v.ambient();
    let m = w.ambient();
    let basis = parity_basis(v);

    let mut sf = StandardForm::new();
    let cb = sf.add_block(n * 2 * m);
    let t = sf.add_block(1);
    let layout = ChoiBlock::new(cb, n, 2 * m);
    layout.match_corner(&mut sf, &basis, 0, m, m, |x| u.apply_unchecked(x));
    if !w.is_full() {
        layout.corner_in(&mut sf, &basis, 0, w);
        layout.corner_in(&mut sf, &basis, m, w);
    }
    bound_identity_corner(&mut sf, &layout, 0, m, t);
    bound_identity_corner(&mut sf, &layout, m, m, t);
    let mut obj = Functional::new();
    obj.add(t, 0, 0, 1.0);
    sf.minimize(obj);

    let sol = sf.solve(opts)?;
    if !check_status(&sol, "dec program")? {
        return Ok(DecResult {
            value: DecValue::NotDecomposable,
            s1: None,
            s2: None,
            lower_bound: sol.lower_bound,
            witness_norm: f64::NAN,
            extension: None,
            residuals: sol.residuals,
        });
    }
    let c = sol.x[cb].clone();
    let s1 = corner_map(u, &c, n, 0, m)?;
    let s2 = corner_map(u, &c, n, m, m)?;
    let witness_norm = op_norm(&s1.at_identity()).max(op_norm(&s2.at_identity()));
    Ok(DecResult {
        value: DecValue::Finite(sol.value.max(0.0)),
        s1: Some(s1),
        s2: Some(s2),
        lower_bound: sol.lower_bound,
        witness_norm,
        extension: Some(c),
        residuals: sol.residuals,
    })
}

/// Result of [`cb_norm`].
#[derive(Clone, Debug)]
pub struct CbResult {
    pub value: f64,
    pub lower_bound: f64,
    pub residuals: Residuals,
}

/// `‖u‖_cb` with default solver options.
pub fn cb_norm(u: &LinearMap) -> Result<f64> {
    Ok(cb_norm_with(u, &default_opts())?.value)
}

/// `‖u‖_cb ≤ t` exactly when `[[λ, x], [y*, μ]] ↦ [[λt, u(x)], [u(y)*, μt]]`
/// is completely positive on the Paulsen system. Positive extensions of that
/// map vanish on the mixed corners of the domain, so the program is posed on
/// the reduced Choi matrix `[[C1, X], [Xᵀ, C2]]` of size `2nm`, where `C1, C2`
/// are Choi matrices of maps with `C_k(I) = tI` and `X` represents `u`.
pub fn cb_norm_with(u: &LinearMap, opts: &SolverOptions) -> Result<CbResult> {
    let v = u.domain();
    let n = v.ambient();
    let m = u.codomain().ambient();
    let nm = n * m;
    let mut sf = StandardForm::new();
    let rb = sf.add_block(2 * nm);
    let t = sf.add_block(1);
    let c1 = ChoiBlock::at(rb, n, m, 0, 0);
    let c2 = ChoiBlock::at(rb, n, m, nm, nm);
    let x = ChoiBlock::at(rb, n, m, 0, nm);
    for blk in [c1, c2] {
        for p in 0..m {
            for q in p..m {
                let mut f = blk.identity_entry(0, p, q);
                if p == q {
                    f.add(t, 0, 0, -1.0);
                }
                sf.constrain(f, 0.0);
            }
        }
    }
    x.match_corner(&mut sf, &parity_basis(v), 0, 0, m, |e| u.apply_unchecked(e));
    let mut obj = Functional::new();
    obj.add(t, 0, 0, 1.0);
    sf.minimize(obj);
    let sol = sf.solve(opts)?;
    if !check_status(&sol, "cb program")? {
        return Err(Error::Indeterminate(
            "cb program reported infeasible; it is always feasible".into(),
        ));
    }
    Ok(CbResult {
        value: sol.value.max(0.0),
        lower_bound: sol.lower_bound,
        residuals: sol.residuals,
    })
}

/// `(u + u*)/2` and `(u − u*)/2`.
pub fn jordan_split(u: &LinearMap) -> (LinearMap, LinearMap) {
    let ustar = u.involute();
    let sa = u.combine(0.5, &ustar, 0.5).expect("u and u* share systems");
    let skew = u
        .combine(0.5, &ustar, -0.5)
        .expect("u and u* share systems");
    (sa, skew)
}

fn require_selfadjoint(u: &LinearMap) -> Result<()> {
    if !u.is_selfadjoint(1e-10) {
        return Err(Error::Precondition("map is not selfadjoint".into()));
    }
    Ok(())
}

fn require_skew(u: &LinearMap) -> Result<()> {
    if !u.is_skew(1e-10) {
        return Err(Error::Precondition("map is not skew".into()));
    }
    Ok(())
}

/// `inf ‖(u1 + u2)(I)‖` over CP `u1, u2 : V → W` with `u = u1 − u2`.
pub fn sa_difference_norm(u: &LinearMap) -> Result<f64> {
    sa_difference_norm_with(u, &default_opts())
}

pub fn sa_difference_norm_with(u: &LinearMap, opts: &SolverOptions) -> Result<f64> {
    require_selfadjoint(u)?;
    let v = u.domain();
    let w = u.codomain();
    let n = v.ambient();
    let m = w.ambient();
    let basis = parity_basis(v);
    let mut sf = StandardForm::new();
    let b1 = sf.add_block(n * m);
    let b2 = sf.add_block(n * m);
    let t = sf.add_block(1);
    let slack = sf.add_block(m);
    let j1 = ChoiBlock::new(b1, n, m);
    let j2 = ChoiBlock::new(b2, n, m);
    for (vb, parity) in &basis {
        let target = u.apply_unchecked(vb);
        for (p, q) in parity.corner_entries(m, true) {
            let mut f = Functional::new();
            j1.entry(&mut f, vb, p, q, 1.0);
            j2.entry(&mut f, vb, p, q, -1.0);
            sf.constrain(f, target[(p, q)]);
        }
    }
    if !w.is_full() {
        j1.corner_in(&mut sf, &basis, 0, w);
        j2.corner_in(&mut sf, &basis, 0, w);
    }
    for p in 0..m {
        for q in p..m {
            let mut f = j1.identity_entry(0, p, q);
            f.extend(&j2.identity_entry(0, p, q), 1.0);
            f.add(slack, p, q, 1.0);
            if p == q {
                f.add(t, 0, 0, -1.0);
            }
            sf.constrain(f, 0.0);
        }
    }
    let mut obj = Functional::new();
    obj.add(t, 0, 0, 1.0);
    sf.minimize(obj);
    let sol = sf.solve(opts)?;
    if !check_status(&sol, "selfadjoint difference program")? {
        return Err(Error::Indeterminate(
            "selfadjoint difference program reported infeasible".into(),
        ));
    }
    Ok(sol.value.max(0.0))
}

/// Single-witness program for a skew map.
#[derive(Clone, Debug)]
pub struct SkewWitness {
    /// CP `s : V → W` with `c(s, u)` completely positive.
    pub s: LinearMap,
    /// `‖s(I)‖` at the optimum.
    pub value: f64,
    /// Choi matrix of the ambient extension `Φ : M_n → M_2m` of `c(s, u)`.
    pub extension: RealMatrix,
    pub residuals: Residuals,
}

/// Minimises `‖s(I)‖` over CP `s` with `c(s, u) = [[s, −u], [u, s]]` CP.
pub fn skew_witness(u: &LinearMap) -> Result<SkewWitness> {
    skew_witness_with(u, &default_opts())
}

pub fn skew_witness_with(u: &LinearMap, opts: &SolverOptions) -> Result<SkewWitness> {
    require_skew(u)?;
    let v = u.domain();
    let w = u.codomain();
    let n = v.ambient();
    let m = w.ambient();
    let basis = parity_basis(v);
    let mut sf = StandardForm::new();
    let cb = sf.add_block(n * 2 * m);
    let t = sf.add_block(1);
    let layout = ChoiBlock::new(cb, n, 2 * m);
    layout.match_corner(&mut sf, &basis, m, 0, m, |x| u.apply_unchecked(x));
    for (vb, parity) in &basis {
        for (p, q) in parity.corner_entries(m, true) {
            let mut f = Functional::new();
            layout.entry(&mut f, vb, p, q, 1.0);
            layout.entry(&mut f, vb, m + p, m + q, -1.0);
            sf.constrain(f, 0.0);
        }
    }
    if !w.is_full() {
        layout.corner_in(&mut sf, &basis, 0, w);
    }
    bound_identity_corner(&mut sf, &layout, 0, m, t);
    let mut obj = Functional::new();
    obj.add(t, 0, 0, 1.0);
    sf.minimize(obj);
    let sol = sf.solve(opts)?;
    if !check_status(&sol, "skew witness program")? {
        return Err(Error::Precondition("skew map is not decomposable".into()));
    }
    let c = sol.x[cb].clone();
    let s = corner_map(u, &c, n, 0, m)?;
    Ok(SkewWitness {
        s,
        value: sol.value.max(0.0),
        extension: c,
        residuals: sol.residuals,
    })
}

/// Output of [`scp_complete`].
#[derive(Clone, Debug)]
pub struct ScpCompletion {
    /// `s = d·(unital CP)` with `c(s, u)` CP, where `d = ‖u‖_dec`.
    pub s: LinearMap,
    pub dec: f64,
    /// `‖u(I)‖`.
    pub u_identity_norm: f64,
    /// `‖c(s(I), u(I))‖`.
    pub block_norm: f64,
    /// A unital `s` with `c(s, u)` unital CP, when `u(I) = 0` and `d ≤ 1`.
    pub unital: Option<LinearMap>,
    /// Choi matrix of an ambient extension of `c(s, u)`.
    pub extension: RealMatrix,
}

/// Completes a skew decomposable `u` to the CP block map `c(s, u)` with
/// `s(I) = ‖u‖_dec · I`.
pub fn scp_complete(u: &LinearMap) -> Result<ScpCompletion> {
    scp_complete_with(u, &default_opts())
}

pub fn scp_complete_with(u: &LinearMap, opts: &SolverOptions) -> Result<ScpCompletion> {
    let sw = skew_witness_with(u, opts)?;
    let v = u.domain();
    let n = v.ambient();
    let m = u.codomain().ambient();
    let d = sw.value;
    let density = normalized_trace_density(n);
    let s_id = sw.s.at_identity();
    let r = &RealMatrix::identity(m).scale(d) - &s_id;
    let s = LinearMap::from_fn(v, u.codomain(), |x| {
        let mut out = sw.s.apply_unchecked(x);
        out.axpy(density.dot(x), &r);
        out
    })?;
    let ui = u.at_identity();
    let u_identity_norm = op_norm(&ui);
    let block_norm = op_norm(&c_form(&s.at_identity(), &ui));

    // Extension of c(s, u): the solved extension plus the padding term
    // x ↦ tr(x)/n · (R ⊕ R), whose Choi matrix is I_n ⊗ (R ⊕ R)/n.
    let corner_id = choi_apply(&sw.extension, n, &RealMatrix::identity(n));
    let r11 = &RealMatrix::identity(m).scale(d) - &corner_id.block(0, 0, m, m);
    let r22 = &RealMatrix::identity(m).scale(d) - &corner_id.block(m, m, m, m);
    let pad = r11.direct_sum(&r22).scale(1.0 / n as f64);
    let extension = &sw.extension + &RealMatrix::identity(n).kron(&pad);

    let unital = if u_identity_norm <= 1e-9 * u.size().max(1.0) && d <= 1.0 + 1e-9 {
        let r1 = &RealMatrix::identity(m) - &s_id;
        Some(LinearMap::from_fn(v, u.codomain(), |x| {
            let mut out = sw.s.apply_unchecked(x);
            out.axpy(density.dot(x), &r1);
            out
        })?)
    } else {
        None
    };
    Ok(ScpCompletion {
        s,
        dec: d,
        u_identity_norm,
        block_norm,
        unital,
        extension,
    })
}

/// Stinespring form `u(x) = [Tᵀ (I_r ⊗ x) T]_21` of a skew decomposable map,
/// with `‖T‖² = ‖u‖_dec + ‖u(I)‖`. The dilation lives in the ambient matrix
/// algebra of the codomain.
pub fn stinespring_scp(u: &LinearMap) -> Result<StinespringData> {
    let comp = scp_complete(u)?;
    let n = u.domain().ambient();
    let m = u.codomain().ambient();
    if comp.dec <= 1e-9 && comp.u_identity_norm <= 1e-9 {
        return Ok(StinespringData {
            kraus: Vec::new(),
            dilation_dim: 0,
            t_norm_sq: 0.0,
            residual: u.size(),
        });
    }
    let mut data = stinespring_from_choi(&comp.extension, n)?;
    let t = data.stacked();
    let r = data.dilation_dim;
    data.residual = u
        .domain()
        .basis()
        .iter()
        .zip(u.images())
        .map(|(b, ub)| {
            let lifted = RealMatrix::identity(r).kron(b);
            let full = t.tr_matmul(&lifted.matmul(&t));
            (ub - &full.block(m, 0, m, m)).frobenius_norm()
        })
        .fold(0.0, f64::max);
    data.t_norm_sq = op_norm(&t.tr_matmul(&t));
    Ok(data)
}

/// Real and imaginary parts of a complex-linear map between complexifications.
#[derive(Clone, Debug)]
pub struct IcpParts {
    pub psi: LinearMap,
    pub sigma: LinearMap,
}

/// Splits a CP, complex-linear `φ : R_V → R_W` as `φ(c(x, 0)) = c(ψ(x), σ(x))`.
pub fn icp_extract(phi: &LinearMap) -> Result<IcpParts> {
    let (Some(v), Some(w)) = (phi.domain().real_form(), phi.codomain().real_form()) else {
        return Err(Error::Domain(
            "icp_extract needs maps between complexified systems".into(),
        ));
    };
    if !phi.commutes_with_complex_structure(1e-9)? {
        return Err(Error::Domain(
            "map does not commute with the complex structures".into(),
        ));
    }
    let verdict = is_cp_with(phi, 1e-7, &SolverOptions::with_tol(1e-10))?;
    if !verdict.is_cp() {
        return Err(Error::Precondition("icp_extract needs a CP map".into()));
    }
    let n = v.ambient();
    let m = w.ambient();
    let zero = RealMatrix::zeros(n, n);
    let parts = |row: usize| {
        LinearMap::from_fn(v, w, |x| {
            w.project(&phi.apply_unchecked(&c_form(x, &zero)).block(row, 0, m, m))
        })
    };
    Ok(IcpParts {
        psi: parts(0)?,
        sigma: parts(m)?,
    })
}

/// Decomposable norm of a complex-linear map `M_n(ℂ) → M_m(ℂ)` computed
/// from its complex Hermitian Choi matrix, realified inside the program.
pub fn dec_norm_hermitian(u: &LinearMap) -> Result<f64> {
    dec_norm_hermitian_with(u, &default_opts())
}

pub fn dec_norm_hermitian_with(u: &LinearMap, opts: &SolverOptions) -> Result<f64> {
    let SystemKind::ComplexFull { n } = u.domain().kind() else {
        return Err(Error::UnsupportedDomain(
            "Hermitian Choi route needs a complex matrix algebra domain".into(),
        ));
    };
    let n = *n;
    let w = u.codomain();
    if !u.commutes_with_complex_structure(1e-10)? {
        return Err(Error::Domain("map is not complex-linear".into()));
    }
    if !w.is_full() && !matches!(w.kind(), SystemKind::ComplexFull { .. }) {
        return Err(Error::UnsupportedDomain(
            "Hermitian Choi route needs a complex matrix algebra codomain".into(),
        ));
    }
    let m = w.ambient() / 2;
    let big = 2 * m;
    let size = n * big;
    let zero = RealMatrix::zeros(n, n);

    // R = [[A, −B], [B, A]] realifies the Hermitian Choi matrix A + iB of
    // Φ : M_n(ℂ) → M_2m(ℂ); entry (r, c) of A + iB is R[r, c] + i R[N + r, c].
    let mut sf = StandardForm::new();
    let rb = sf.add_block(2 * size);
    let t = sf.add_block(1);
    for r in 0..size {
        for c in r..size {
            let mut f = Functional::new();
            f.add(rb, r, c, 1.0);
            f.add(rb, size + r, size + c, -1.0);
            sf.constrain(f, 0.0);
            let mut g = Functional::new();
            g.add(rb, size + r, c, 1.0);
            g.add(rb, size + c, r, 1.0);
            sf.constrain(g, 0.0);
        }
    }
    let idx = |i: usize, a: usize| i * big + a;
    for i in 0..n {
        for j in 0..n {
            let img = u.apply_unchecked(&c_form(&RealMatrix::unit(n, n, i, j), &zero));
            let (x, y) = (img.block(0, 0, m, m), img.block(m, 0, m, m));
            for p in 0..m {
                for q in 0..m {
                    let mut f = Functional::new();
                    f.add(rb, idx(i, p), idx(j, m + q), 1.0);
                    sf.constrain(f, x[(p, q)]);
                    let mut g = Functional::new();
                    g.add(rb, size + idx(i, p), idx(j, m + q), 1.0);
                    sf.constrain(g, y[(p, q)]);
                }
            }
        }
    }
    // t I − realify(S_k(I)) = T_k ⪰ 0 with S_k(I) = P + iQ.
    for off in [0, m] {
        let slack = sf.add_block(big);
        let re = |f: &mut Functional, p: usize, q: usize, s: f64| {
            for i in 0..n {
                f.add(rb, idx(i, off + p), idx(i, off + q), s);
            }
        };
        let im = |f: &mut Functional, p: usize, q: usize, s: f64| {
            for i in 0..n {
                f.add(rb, size + idx(i, off + p), idx(i, off + q), s);
            }
        };
        for r in 0..big {
            for c in r..big {
                let mut f = Functional::new();
                f.add(slack, r, c, 1.0);
                match (r < m, c < m) {
                    (true, true) => re(&mut f, r, c, 1.0),
                    (false, false) => re(&mut f, r - m, c - m, 1.0),
                    (true, false) => im(&mut f, r, c - m, -1.0),
                    (false, true) => unreachable!("r <= c"),
                }
                if r == c {
                    f.add(t, 0, 0, -1.0);
                }
                sf.constrain(f, 0.0);
            }
        }
    }
    let mut obj = Functional::new();
    obj.add(t, 0, 0, 1.0);
    sf.minimize(obj);
    let sol = sf.solve(opts)?;
    if !check_status(&sol, "Hermitian dec program")? {
        return Err(Error::Indeterminate(
            "Hermitian dec program reported infeasible".into(),
        ));
    }
    Ok(sol.value.max(0.0))
}

/// Pairs `(a_k, b_k)` with `a_k b_k = u(e_k)` for a map out of `ℓ∞_n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Factorization {
    pub pairs: Vec<(RealMatrix, RealMatrix)>,
}

impl Factorization {
    /// Validates `a_k b_k = u(e_k)` within `1e-9` (relative).
    pub fn new(u: &LinearMap, pairs: Vec<(RealMatrix, RealMatrix)>) -> Result<Self> {
        let SystemKind::EllInf { n } = u.domain().kind() else {
            return Err(Error::UnsupportedDomain(
                "factorizations are defined for maps out of l_inf^n".into(),
            ));
        };
        if pairs.len() != *n {
            return Err(Error::InvalidMap(format!(
                "{} factor pairs for l_inf^{n}",
                pairs.len()
            )));
        }
        for (k, ((a, b), img)) in pairs.iter().zip(u.images()).enumerate() {
            if a.cols() != b.rows() || a.rows() != img.rows() || b.cols() != img.cols() {
                return Err(Error::Shape(format!(
                    "factor pair {k} has mismatched shapes"
                )));
            }
            let err = (&a.matmul(b) - img).max_abs();
            if err > 1e-9 * img.max_abs().max(1.0) {
                return Err(Error::InvalidMap(format!(
                    "factor pair {k} misses u(e_{k}) by {err:.3e}"
                )));
            }
        }
        Ok(Self { pairs })
    }
}

/// `‖Σ a_k a_kᵀ‖^{1/2} · ‖Σ b_kᵀ b_k‖^{1/2}`, an upper bound for `‖u‖_dec`.
pub fn delta_value(f: &Factorization) -> f64 {
    let Some((a0, b0)) = f.pairs.first() else {
        return 0.0;
    };
    let mut aa = RealMatrix::zeros(a0.rows(), a0.rows());
    let mut bb = RealMatrix::zeros(b0.cols(), b0.cols());
    for (a, b) in &f.pairs {
        aa += &a.matmul(&a.transpose());
        bb += &b.tr_matmul(b);
    }
    op_norm(&aa).sqrt() * op_norm(&bb).sqrt()
}

/// The entrywise imaginary part `Im` on realified `M_n(ℂ)`.
pub fn imaginary_part_map(n: usize) -> Result<LinearMap> {
    let c = Arc::new(MatrixSystem::complex_full(n)?);
    LinearMap::from_fn(&c, &c, |z| {
        c_form(&z.block(n, 0, n, n), &RealMatrix::zeros(n, n))
    })
}

/// The entrywise real part `Re` on realified `M_n(ℂ)`.
pub fn real_part_map(n: usize) -> Result<LinearMap> {
    let c = Arc::new(MatrixSystem::complex_full(n)?);
    LinearMap::from_fn(&c, &c, |z| {
        c_form(&z.block(0, 0, n, n), &RealMatrix::zeros(n, n))
    })
}
