//! Concrete operator systems inside real matrix algebras, linear maps between
//! them, and the complexification functor.
//!
//! A [`MatrixSystem`] is a unital, transpose-closed subspace of `M_n(ℝ)`
//! given by a user basis. On construction the span is split into symmetric
//! and antisymmetric parts with Frobenius-orthonormal bases for each, and
//! orthonormal bases of the complements are kept for membership constraints.
//!
//! Complexified systems are stored realified: `x + iy` is the block matrix
//! `c(x, y) = [[x, -y], [y, x]]`, and multiplication by `i` is `J = c(0, I)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{c_form, cholesky, cholesky_solve, RealMatrix};

/// Relative tolerance for span membership and basis images.
pub const MEMBERSHIP_TOL: f64 = 1e-10;
/// Minimum Gram determinant of the normalized user basis.
pub const GRAM_DET_MIN: f64 = 1e-12;

const RANK_TOL: f64 = 1e-9;

/// How a system was specified. Also the `kind` field of system records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// `M_n(ℝ)`, basis `E_ij` row-major.
    FullReal { n: usize },
    /// Diagonal matrices in `M_n(ℝ)`, basis `E_11, …, E_nn`.
    EllInf { n: usize },
    /// Left regular representation of the quaternions on `ℝ⁴`, basis `(1, i, j, k)`.
    Quaternion,
    /// `M_n(ℂ)` realified in `M_2n(ℝ)`, basis `c(E_ij, 0)` then `c(0, E_ij)`.
    ComplexFull { n: usize },
    /// Span of an explicit basis.
    Span {
        #[serde(default)]
        n: Option<usize>,
        basis: Vec<RealMatrix>,
    },
}

/// A unital, transpose-closed subspace of `M_n(ℝ)`.
#[derive(Clone)]
pub struct MatrixSystem {
    label: String,
    kind: SystemKind,
    n: usize,
    basis: Vec<RealMatrix>,
    complex_structure: Option<RealMatrix>,
    real_form: Option<Arc<MatrixSystem>>,
    gram_factor: RealMatrix,
    sym_basis: Vec<RealMatrix>,
    anti_basis: Vec<RealMatrix>,
    sym_complement: Vec<RealMatrix>,
    anti_complement: Vec<RealMatrix>,
}

impl fmt::Debug for MatrixSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixSystem")
            .field("label", &self.label)
            .field("ambient", &self.n)
            .field("dim", &self.dim())
            .field("complex", &self.complex_structure.is_some())
            .finish()
    }
}

fn invalid(label: &str, invariant: impl Into<String>) -> Error {
    Error::InvalidSystem {
        label: label.to_string(),
        invariant: invariant.into(),
    }
}

/// Gram-Schmidt (two passes) of `candidates` against `against` and each other.
fn orthonormalize(
    candidates: impl IntoIterator<Item = RealMatrix>,
    against: &[RealMatrix],
    keep_tol: f64,
) -> Vec<RealMatrix> {
    let mut out: Vec<RealMatrix> = Vec::new();
    for c in candidates {
        let scale = c.frobenius_norm();
        if scale == 0.0 {
            continue;
        }
        let mut v = c.scale(1.0 / scale);
        for _ in 0..2 {
            for e in against.iter().chain(out.iter()) {
                let d = e.dot(&v);
                v.axpy(-d, e);
            }
        }
        let nv = v.frobenius_norm();
        if nv > keep_tol {
            out.push(v.scale(1.0 / nv));
        }
    }
    out
}

fn sym_units(n: usize) -> impl Iterator<Item = RealMatrix> {
    (0..n).flat_map(move |p| {
        (p..n).map(move |q| {
            let mut m = RealMatrix::zeros(n, n);
            if p == q {
                m[(p, p)] = 1.0;
            } else {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                m[(p, q)] = s;
                m[(q, p)] = s;
            }
            m
        })
    })
}

fn anti_units(n: usize) -> impl Iterator<Item = RealMatrix> {
    (0..n).flat_map(move |p| {
        (p + 1..n).map(move |q| {
            let mut m = RealMatrix::zeros(n, n);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            m[(p, q)] = s;
            m[(q, p)] = -s;
            m
        })
    })
}

fn determinant_spd(l: &RealMatrix) -> f64 {
    (0..l.rows()).map(|i| l[(i, i)] * l[(i, i)]).product()
}

impl MatrixSystem {
    /// Builds and audits a system from a user basis.
    pub fn new(
        label: impl Into<String>,
        kind: SystemKind,
        basis: Vec<RealMatrix>,
        complex_structure: Option<RealMatrix>,
    ) -> Result<Self> {
        let label = label.into();
        let Some(first) = basis.first() else {
            return Err(invalid(&label, "empty basis (identity not in span)"));
        };
        let n = first.rows();
        for (k, b) in basis.iter().enumerate() {
            if b.shape() != (n, n) {
                return Err(invalid(
                    &label,
                    format!(
                        "basis element {k} has shape {:?}, expected {n}x{n}",
                        b.shape()
                    ),
                ));
            }
        }
        // Independence on the normalized basis.
        let normalized: Vec<RealMatrix> = basis
            .iter()
            .map(|b| {
                let nb = b.frobenius_norm();
                if nb > 0.0 {
                    b.scale(1.0 / nb)
                } else {
                    b.clone()
                }
            })
            .collect();
        let d = basis.len();
        let ngram = RealMatrix::from_fn(d, d, |i, j| normalized[i].dot(&normalized[j]));
        let det = cholesky(&ngram).map(|l| determinant_spd(&l)).unwrap_or(0.0);
        if !(det > GRAM_DET_MIN) {
            return Err(invalid(
                &label,
                format!("basis is linearly dependent (normalized Gram determinant {det:.3e})"),
            ));
        }
        let gram = RealMatrix::from_fn(d, d, |i, j| basis[i].dot(&basis[j]));
        let gram_factor = cholesky(&gram)
            .ok_or_else(|| invalid(&label, "basis Gram matrix is not positive definite"))?;

        let sym_basis = orthonormalize(basis.iter().map(|b| b.symmetric_part()), &[], RANK_TOL);
        let anti_basis =
            orthonormalize(basis.iter().map(|b| b.antisymmetric_part()), &[], RANK_TOL);
        let sym_complement = orthonormalize(sym_units(n), &sym_basis, 1e-6);
        let anti_complement = orthonormalize(anti_units(n), &anti_basis, 1e-6);

        let sys = Self {
            label,
            kind,
            n,
            basis,
            complex_structure,
            real_form: None,
            gram_factor,
            sym_basis,
            anti_basis,
            sym_complement,
            anti_complement,
        };
        sys.audit()?;
        Ok(sys)
    }

    /// Checks independence, unitality, transpose closure and the complex
    /// structure, reporting the first failed invariant.
    pub fn audit(&self) -> Result<()> {
        let label = &self.label;
        let n = self.n;
        if self.sym_basis.len() + self.anti_basis.len() != self.basis.len() {
            return Err(invalid(
                label,
                format!(
                    "span is not closed under transpose (symmetric part rank {} + antisymmetric part rank {} != dim {})",
                    self.sym_basis.len(),
                    self.anti_basis.len(),
                    self.basis.len()
                ),
            ));
        }
        for (k, b) in self.basis.iter().enumerate() {
            let r = self.membership_residual(&b.transpose());
            if r > MEMBERSHIP_TOL * b.frobenius_norm().max(1.0) {
                return Err(invalid(
                    label,
                    format!("transpose of basis element {k} is not in the span (residual {r:.3e})"),
                ));
            }
        }
        let id = RealMatrix::identity(n);
        let r = self.membership_residual(&id);
        if r > MEMBERSHIP_TOL * (n as f64).sqrt() {
            return Err(invalid(
                label,
                format!("identity is not in the span (residual {r:.3e})"),
            ));
        }
        let sym_total = self.sym_basis.len() + self.sym_complement.len();
        let anti_total = self.anti_basis.len() + self.anti_complement.len();
        if sym_total != n * (n + 1) / 2 || anti_total != n * (n - 1) / 2 {
            return Err(invalid(label, "complement construction lost rank"));
        }
        if let Some(j) = &self.complex_structure {
            if j.shape() != (n, n) {
                return Err(invalid(label, "complex structure has the wrong shape"));
            }
            let skew = (&j.transpose() + j).max_abs();
            let sq = (&j.matmul(j) + &id).max_abs();
            if skew > 1e-12 || sq > 1e-12 {
                return Err(invalid(
                    label,
                    "complex structure must satisfy J^T = -J and J^2 = -I",
                ));
            }
            for (k, b) in self.basis.iter().enumerate() {
                let r = self.membership_residual(&j.matmul(b));
                if r > MEMBERSHIP_TOL * b.frobenius_norm().max(1.0) {
                    return Err(invalid(
                        label,
                        format!("J times basis element {k} leaves the span (residual {r:.3e})"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn full_real(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("full_real(0)", "ambient size must be positive"));
        }
        let basis = (0..n)
            .flat_map(|i| (0..n).map(move |j| RealMatrix::unit(n, n, i, j)))
            .collect();
        Self::new(format!("M{n}(R)"), SystemKind::FullReal { n }, basis, None)
    }

    pub fn ell_inf(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("ell_inf(0)", "ambient size must be positive"));
        }
        let basis = (0..n).map(|i| RealMatrix::unit(n, n, i, i)).collect();
        Self::new(format!("l_inf^{n}"), SystemKind::EllInf { n }, basis, None)
    }

    pub fn quaternion() -> Result<Self> {
        Self::new(
            "H",
            SystemKind::Quaternion,
            quaternion_basis().to_vec(),
            None,
        )
    }

    /// `M_n(ℂ)` realified, with complex structure `c(0, I)`.
    pub fn complex_full(n: usize) -> Result<Self> {
        let real = Arc::new(Self::full_real(n)?);
        let mut sys = complexify_system(&real)?;
        sys.label = format!("M{n}(C)");
        sys.kind = SystemKind::ComplexFull { n };
        Ok(sys)
    }

    pub fn span(label: impl Into<String>, basis: Vec<RealMatrix>) -> Result<Self> {
        let n = basis.first().map(|b| b.rows());
        Self::new(
            label,
            SystemKind::Span {
                n,
                basis: basis.clone(),
            },
            basis,
            None,
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    /// Ambient matrix size `n` (the system lives in `M_n(ℝ)`).
    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[RealMatrix] {
        &self.basis
    }

    pub fn complex_structure(&self) -> Option<&RealMatrix> {
        self.complex_structure.as_ref()
    }

    /// The real system this one is the complexification of, if any.
    pub fn real_form(&self) -> Option<&Arc<MatrixSystem>> {
        self.real_form.as_ref()
    }

    /// Whether the system is all of `M_n(ℝ)`.
    pub fn is_full(&self) -> bool {
        self.basis.len() == self.n * self.n
    }

    /// Orthonormal basis of the symmetric part of the span.
    pub fn sym_basis(&self) -> &[RealMatrix] {
        &self.sym_basis
    }

    /// Orthonormal basis of the antisymmetric part of the span.
    pub fn anti_basis(&self) -> &[RealMatrix] {
        &self.anti_basis
    }

    /// Orthonormal basis of the symmetric matrices orthogonal to the span.
    pub fn sym_complement(&self) -> &[RealMatrix] {
        &self.sym_complement
    }

    /// Orthonormal basis of the antisymmetric matrices orthogonal to the span.
    pub fn anti_complement(&self) -> &[RealMatrix] {
        &self.anti_complement
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, x: &RealMatrix) -> RealMatrix {
        let mut out = RealMatrix::zeros(self.n, self.n);
        for e in self.sym_basis.iter().chain(&self.anti_basis) {
            out.axpy(e.dot(x), e);
        }
        out
    }

    pub fn membership_residual(&self, x: &RealMatrix) -> f64 {
        if x.shape() != (self.n, self.n) {
            return f64::INFINITY;
        }
        (x - &self.project(x)).frobenius_norm()
    }

    pub fn contains(&self, x: &RealMatrix) -> bool {
        self.membership_residual(x) <= MEMBERSHIP_TOL * x.frobenius_norm().max(1.0)
    }

    /// Coordinates of `x` in the user basis.
    pub fn coordinates(&self, x: &RealMatrix) -> Result<Vec<f64>> {
        if x.shape() != (self.n, self.n) {
            return Err(Error::Shape(format!(
                "element of shape {:?} for a system in M{}",
                x.shape(),
                self.n
            )));
        }
        let r = self.membership_residual(x);
        if r > MEMBERSHIP_TOL * x.frobenius_norm().max(1.0) {
            return Err(Error::Domain(format!(
                "element is not in `{}` (residual {r:.3e})",
                self.label
            )));
        }
        Ok(self.coordinates_unchecked(x))
    }

    fn coordinates_unchecked(&self, x: &RealMatrix) -> Vec<f64> {
        let mut g: Vec<f64> = self.basis.iter().map(|b| b.dot(x)).collect();
        cholesky_solve(&self.gram_factor, &mut g);
        g
    }

    /// `Σ c_k b_k` over the user basis.
    pub fn combine(&self, coeffs: &[f64]) -> RealMatrix {
        let mut out = RealMatrix::zeros(self.n, self.n);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out.axpy(*c, b);
        }
        out
    }

    /// Whether both systems have the same ambient size and the same span.
    pub fn same_span(&self, other: &MatrixSystem) -> bool {
        self.n == other.n
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b))
    }

    /// A system with the same span but no complex structure.
    pub fn forget_complex_structure(&self) -> MatrixSystem {
        let mut out = self.clone();
        out.complex_structure = None;
        out.real_form = None;
        out.kind = SystemKind::Span {
            n: Some(self.n),
            basis: self.basis.clone(),
        };
        out.label = format!("{} (real)", self.label);
        out
    }

    /// Whether `sub` is a subsystem of `self`.
    pub fn contains_system(&self, sub: &MatrixSystem) -> bool {
        self.n == sub.n && sub.basis.iter().all(|b| self.contains(b))
    }
}

/// Left regular representation of `1, i, j, k` acting on `ℝ⁴` with basis
/// order `(1, i, j, k)`.
pub fn quaternion_basis() -> [RealMatrix; 4] {
    let table: [[(usize, f64); 4]; 3] = [
        // q·e for e = 1, i, j, k
        [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)], // i
        [(2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0)], // j
        [(3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0)], // k
    ];
    let mut out = [
        RealMatrix::identity(4),
        RealMatrix::zeros(4, 4),
        RealMatrix::zeros(4, 4),
        RealMatrix::zeros(4, 4),
    ];
    for (q, col) in table.iter().enumerate() {
        for (e, &(row, sign)) in col.iter().enumerate() {
            out[q + 1][(row, e)] = sign;
        }
    }
    out
}

/// Builds a named system.
pub fn build_system(kind: &SystemKind) -> Result<MatrixSystem> {
    match kind {
        SystemKind::FullReal { n } => MatrixSystem::full_real(*n),
        SystemKind::EllInf { n } => MatrixSystem::ell_inf(*n),
        SystemKind::Quaternion => MatrixSystem::quaternion(),
        SystemKind::ComplexFull { n } => MatrixSystem::complex_full(*n),
        SystemKind::Span { n, basis } => {
            if let (Some(n), Some(b)) = (n, basis.first()) {
                if b.rows() != *n {
                    return Err(invalid(
                        "span",
                        format!(
                            "declared ambient size {n} but basis elements are {}x{}",
                            b.rows(),
                            b.cols()
                        ),
                    ));
                }
            }
            MatrixSystem::span("span", basis.clone())
        }
    }
}

/// `R_V = { c(x, y) : x, y ∈ V }` with complex structure `c(0, I)`.
pub fn complexify_system(v: &Arc<MatrixSystem>) -> Result<MatrixSystem> {
    if v.complex_structure.is_some() {
        return Err(Error::Domain(format!(
            "`{}` already carries a complex structure",
            v.label
        )));
    }
    let n = v.n;
    let zero = RealMatrix::zeros(n, n);
    let mut basis: Vec<RealMatrix> = v.basis.iter().map(|b| c_form(b, &zero)).collect();
    basis.extend(v.basis.iter().map(|b| c_form(&zero, b)));
    let j = c_form(&zero, &RealMatrix::identity(n));
    let mut sys = MatrixSystem::new(
        format!("({})_c", v.label),
        SystemKind::Span {
            n: Some(2 * n),
            basis: basis.clone(),
        },
        basis,
        Some(j),
    )?;
    sys.real_form = Some(Arc::clone(v));
    Ok(sys)
}

/// Corner data for [`paulsen_system`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaulsenDiagonal {
    /// `a I_p ⊕ b I_q`.
    Scalar,
    /// `M_p ⊕ M_q`.
    Full,
}

/// `{ [[a, x], [yᵀ, b]] : x, y ∈ X }` inside `M_{p+q}(ℝ)`.
pub fn paulsen_system(
    p: usize,
    q: usize,
    x_basis: &[RealMatrix],
    diag: PaulsenDiagonal,
) -> Result<MatrixSystem> {
    let label = format!("S(X) in M{}", p + q);
    if p == 0 || q == 0 {
        return Err(invalid(&label, "corner sizes must be positive"));
    }
    let s = p + q;
    for (k, x) in x_basis.iter().enumerate() {
        if x.shape() != (p, q) {
            return Err(invalid(
                &label,
                format!(
                    "corner basis element {k} has shape {:?}, expected {p}x{q}",
                    x.shape()
                ),
            ));
        }
    }
    if !x_basis.is_empty() {
        let d = x_basis.len();
        let normalized: Vec<RealMatrix> = x_basis
            .iter()
            .map(|x| x.scale(1.0 / x.frobenius_norm().max(f64::MIN_POSITIVE)))
            .collect();
        let g = RealMatrix::from_fn(d, d, |i, j| normalized[i].dot(&normalized[j]));
        let det = cholesky(&g).map(|l| determinant_spd(&l)).unwrap_or(0.0);
        if !(det > GRAM_DET_MIN) {
            return Err(invalid(&label, "corner basis is linearly dependent"));
        }
    }
    let mut basis = Vec::new();
    match diag {
        PaulsenDiagonal::Scalar => {
            let mut a = RealMatrix::zeros(s, s);
            a.set_block(0, 0, &RealMatrix::identity(p));
            let mut b = RealMatrix::zeros(s, s);
            b.set_block(p, p, &RealMatrix::identity(q));
            basis.push(a);
            basis.push(b);
        }
        PaulsenDiagonal::Full => {
            for i in 0..p {
                for j in 0..p {
                    basis.push(RealMatrix::unit(s, s, i, j));
                }
            }
            for i in 0..q {
                for j in 0..q {
                    basis.push(RealMatrix::unit(s, s, p + i, p + j));
                }
            }
        }
    }
    for x in x_basis {
        let mut m = RealMatrix::zeros(s, s);
        m.set_block(0, p, x);
        basis.push(m);
    }
    for x in x_basis {
        let mut m = RealMatrix::zeros(s, s);
        m.set_block(p, 0, &x.transpose());
        basis.push(m);
    }
    MatrixSystem::new(
        label,
        SystemKind::Span {
            n: Some(s),
            basis: basis.clone(),
        },
        basis,
        None,
    )
}

/// Block-diagonal join `V ⊕ W ⊂ M_{n_v + n_w}`.
pub fn direct_sum(v: &MatrixSystem, w: &MatrixSystem) -> Result<MatrixSystem> {
    let (nv, nw) = (v.n, w.n);
    let zv = RealMatrix::zeros(nv, nv);
    let zw = RealMatrix::zeros(nw, nw);
    let mut basis: Vec<RealMatrix> = v.basis.iter().map(|b| b.direct_sum(&zw)).collect();
    basis.extend(w.basis.iter().map(|b| zv.direct_sum(b)));
    let j = match (&v.complex_structure, &w.complex_structure) {
        (Some(a), Some(b)) => Some(a.direct_sum(b)),
        _ => None,
    };
    MatrixSystem::new(
        format!("{} + {}", v.label, w.label),
        SystemKind::Span {
            n: Some(nv + nw),
            basis: basis.clone(),
        },
        basis,
        j,
    )
}

/// `V ⊕ W` together with its two coordinate projections.
pub fn direct_sum_projections(
    v: &Arc<MatrixSystem>,
    w: &Arc<MatrixSystem>,
) -> Result<(Arc<MatrixSystem>, LinearMap, LinearMap)> {
    let sum = Arc::new(direct_sum(v, w)?);
    let nv = v.ambient();
    let nw = w.ambient();
    let p1 = LinearMap::from_fn(&sum, v, |x| x.block(0, 0, nv, nv))?;
    let p2 = LinearMap::from_fn(&sum, w, |x| x.block(nv, nv, nw, nw))?;
    Ok((sum, p1, p2))
}

/// A linear map between systems, stored as the images of the domain's user basis.
#[derive(Clone, Debug)]
pub struct LinearMap {
    domain: Arc<MatrixSystem>,
    codomain: Arc<MatrixSystem>,
    images: Vec<RealMatrix>,
}

impl LinearMap {
    pub fn new(
        domain: &Arc<MatrixSystem>,
        codomain: &Arc<MatrixSystem>,
        images: Vec<RealMatrix>,
    ) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::InvalidMap(format!(
                "{} images given for a domain of dimension {}",
                images.len(),
                domain.dim()
            )));
        }
        let m = codomain.ambient();
        for (k, img) in images.iter().enumerate() {
            if img.shape() != (m, m) {
                return Err(Error::InvalidMap(format!(
                    "image {k} has shape {:?}, expected {m}x{m}",
                    img.shape()
                )));
            }
            let r = codomain.membership_residual(img);
            if r > 1e3 * MEMBERSHIP_TOL * img.frobenius_norm().max(1.0) {
                return Err(Error::InvalidMap(format!(
                    "image {k} is not in `{}` (residual {r:.3e})",
                    codomain.label()
                )));
            }
        }
        Ok(Self {
            domain: Arc::clone(domain),
            codomain: Arc::clone(codomain),
            images,
        })
    }

    /// Map defined by evaluating `f` on the domain's user basis.
    pub fn from_fn(
        domain: &Arc<MatrixSystem>,
        codomain: &Arc<MatrixSystem>,
        f: impl Fn(&RealMatrix) -> RealMatrix,
    ) -> Result<Self> {
        let images = domain.basis().iter().map(f).collect();
        Self::new(domain, codomain, images)
    }

    pub fn zero(domain: &Arc<MatrixSystem>, codomain: &Arc<MatrixSystem>) -> Self {
        let m = codomain.ambient();
        Self {
            domain: Arc::clone(domain),
            codomain: Arc::clone(codomain),
            images: vec![RealMatrix::zeros(m, m); domain.dim()],
        }
    }

    /// Inclusion of a system into itself or a supersystem.
    pub fn identity(domain: &Arc<MatrixSystem>) -> Self {
        Self {
            domain: Arc::clone(domain),
            codomain: Arc::clone(domain),
            images: domain.basis().to_vec(),
        }
    }

    pub fn domain(&self) -> &Arc<MatrixSystem> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<MatrixSystem> {
        &self.codomain
    }

    pub fn images(&self) -> &[RealMatrix] {
        &self.images
    }

    pub fn apply(&self, x: &RealMatrix) -> Result<RealMatrix> {
        let c = self.domain.coordinates(x)?;
        Ok(self.apply_coords(&c))
    }

    /// Evaluates on an element known to lie in the domain.
    pub(crate) fn apply_unchecked(&self, x: &RealMatrix) -> RealMatrix {
        self.apply_coords(&self.domain.coordinates_unchecked(x))
    }

    fn apply_coords(&self, c: &[f64]) -> RealMatrix {
        let m = self.codomain.ambient();
        let mut out = RealMatrix::zeros(m, m);
        for (ci, img) in c.iter().zip(&self.images) {
            out.axpy(*ci, img);
        }
        out
    }

    /// `u(I)`.
    pub fn at_identity(&self) -> RealMatrix {
        self.apply_unchecked(&RealMatrix::identity(self.domain.ambient()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        if !self.domain.contains_system(&inner.codomain) {
            return Err(Error::InvalidMap(format!(
                "cannot compose: codomain `{}` is not inside domain `{}`",
                inner.codomain.label(),
                self.domain.label()
            )));
        }
        let images = inner
            .images
            .iter()
            .map(|x| self.apply_unchecked(x))
            .collect();
        Ok(LinearMap {
            domain: Arc::clone(&inner.domain),
            codomain: Arc::clone(&self.codomain),
            images,
        })
    }

    fn check_same(&self, other: &LinearMap) -> Result<()> {
        if !self.domain.same_span(&other.domain) || !self.codomain.same_span(&other.codomain) {
            return Err(Error::InvalidMap(
                "maps have different domains or codomains".into(),
            ));
        }
        Ok(())
    }

    /// `a·self + b·other` on a common domain.
    pub fn combine(&self, a: f64, other: &LinearMap, b: f64) -> Result<LinearMap> {
        self.check_same(other)?;
        let images = self
            .domain
            .basis()
            .iter()
            .zip(&self.images)
            .map(|(x, ux)| {
                let mut out = ux.scale(a);
                out.axpy(b, &other.apply_unchecked(x));
                out
            })
            .collect();
        Ok(LinearMap {
            domain: Arc::clone(&self.domain),
            codomain: Arc::clone(&self.codomain),
            images,
        })
    }

    pub fn add(&self, other: &LinearMap) -> Result<LinearMap> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &LinearMap) -> Result<LinearMap> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scale(&self, s: f64) -> LinearMap {
        LinearMap {
            domain: Arc::clone(&self.domain),
            codomain: Arc::clone(&self.codomain),
            images: self.images.iter().map(|m| m.scale(s)).collect(),
        }
    }

    /// `u*(x) = u(xᵀ)ᵀ`.
    pub fn involute(&self) -> LinearMap {
        let images = self
            .domain
            .basis()
            .iter()
            .map(|b| self.apply_unchecked(&b.transpose()).transpose())
            .collect();
        LinearMap {
            domain: Arc::clone(&self.domain),
            codomain: Arc::clone(&self.codomain),
            images,
        }
    }

    /// Largest Frobenius distance between images on this map's domain basis.
    pub fn distance(&self, other: &LinearMap) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .domain
            .basis()
            .iter()
            .zip(&self.images)
            .map(|(x, ux)| (ux - &other.apply_unchecked(x)).frobenius_norm())
            .fold(0.0, f64::max))
    }

    /// Largest Frobenius norm of an image of the domain's orthonormal basis.
    pub fn size(&self) -> f64 {
        self.domain
            .sym_basis()
            .iter()
            .chain(self.domain.anti_basis())
            .map(|v| self.apply_unchecked(v).frobenius_norm())
            .fold(0.0, f64::max)
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.involute()
            .distance(self)
            .map(|d| d <= tol * self.size().max(1.0))
            .unwrap_or(false)
    }

    pub fn is_skew(&self, tol: f64) -> bool {
        self.involute()
            .combine(1.0, self, 1.0)
            .map(|s| s.size() <= tol * self.size().max(1.0))
            .unwrap_or(false)
    }

    /// Restriction to a subsystem of the domain.
    pub fn restrict(&self, sub: &Arc<MatrixSystem>) -> Result<LinearMap> {
        if !self.domain.contains_system(sub) {
            return Err(Error::Domain(format!(
                "`{}` is not a subsystem of `{}`",
                sub.label(),
                self.domain.label()
            )));
        }
        let images = sub
            .basis()
            .iter()
            .map(|b| self.apply_unchecked(b))
            .collect();
        Ok(LinearMap {
            domain: Arc::clone(sub),
            codomain: Arc::clone(&self.codomain),
            images,
        })
    }

    /// Same images viewed in a different codomain containing them.
    pub fn with_codomain(&self, codomain: &Arc<MatrixSystem>) -> Result<LinearMap> {
        LinearMap::new(&self.domain, codomain, self.images.clone())
    }

    /// `x ↦ α u(x) β` into the full matrix algebra of matching size.
    pub fn sandwich(&self, alpha: &RealMatrix, beta: &RealMatrix) -> Result<LinearMap> {
        let m = self.codomain.ambient();
        if alpha.cols() != m || beta.rows() != m || alpha.rows() != beta.cols() {
            return Err(Error::Shape(format!(
                "cannot form a u b with a {:?}, b {:?} around M{m}",
                alpha.shape(),
                beta.shape()
            )));
        }
        let k = alpha.rows();
        let target = Arc::new(MatrixSystem::full_real(k)?);
        let images = self
            .images
            .iter()
            .map(|img| alpha.matmul(img).matmul(beta))
            .collect();
        LinearMap::new(&self.domain, &target, images)
    }

    /// Coefficients of the images in the codomain user basis (dim W × dim V).
    pub fn coefficient_matrix(&self) -> RealMatrix {
        let cols: Vec<Vec<f64>> = self
            .images
            .iter()
            .map(|img| self.codomain.coordinates_unchecked(img))
            .collect();
        RealMatrix::from_fn(self.codomain.dim(), self.domain.dim(), |i, j| cols[j][i])
    }

    pub fn from_coefficients(
        domain: &Arc<MatrixSystem>,
        codomain: &Arc<MatrixSystem>,
        coeffs: &RealMatrix,
    ) -> Result<LinearMap> {
        if coeffs.shape() != (codomain.dim(), domain.dim()) {
            return Err(Error::Shape(format!(
                "coefficient matrix {:?} does not match dims ({}, {})",
                coeffs.shape(),
                codomain.dim(),
                domain.dim()
            )));
        }
        let images = (0..domain.dim())
            .map(|j| {
                let c: Vec<f64> = (0..codomain.dim()).map(|i| coeffs[(i, j)]).collect();
                codomain.combine(&c)
            })
            .collect();
        LinearMap::new(domain, codomain, images)
    }

    /// Whether `u(J x) = J u(x)` on the domain basis.
    pub fn commutes_with_complex_structure(&self, tol: f64) -> Result<bool> {
        let (Some(jd), Some(jc)) = (
            self.domain.complex_structure(),
            self.codomain.complex_structure(),
        ) else {
            return Err(Error::Domain(
                "both systems need a complex structure".into(),
            ));
        };
        let scale = self.size().max(1.0);
        Ok(self.domain.basis().iter().zip(&self.images).all(|(b, ub)| {
            let lhs = self.apply_unchecked(&jd.matmul(b));
            let rhs = jc.matmul(ub);
            (&lhs - &rhs).frobenius_norm() <= tol * scale
        }))
    }
}

/// `u_c : c(x, y) ↦ c(u(x), u(y))` between the complexified systems.
pub fn complexify_map(u: &LinearMap) -> Result<LinearMap> {
    let v = u.domain();
    let w = u.codomain();
    if v.complex_structure().is_some() || w.complex_structure().is_some() {
        return Err(Error::Domain(
            "complexify_map needs real domain and codomain".into(),
        ));
    }
    let vc = Arc::new(complexify_system(v)?);
    let wc = Arc::new(complexify_system(w)?);
    let zero = RealMatrix::zeros(w.ambient(), w.ambient());
    let mut images: Vec<RealMatrix> = u.images().iter().map(|x| c_form(x, &zero)).collect();
    images.extend(u.images().iter().map(|x| c_form(&zero, x)));
    LinearMap::new(&vc, &wc, images)
}

/// `ψ_c + i σ_c : c(x, y) ↦ c(ψ(x) − σ(y), σ(x) + ψ(y))`, the complex-linear
/// map with real part `ψ` and imaginary part `σ`.
pub fn complex_combination(psi: &LinearMap, sigma: &LinearMap) -> Result<LinearMap> {
    psi.check_same(sigma)?;
    let v = psi.domain();
    let w = psi.codomain();
    let vc = Arc::new(complexify_system(v)?);
    let wc = Arc::new(complexify_system(w)?);
    let mut images: Vec<RealMatrix> = psi
        .images()
        .iter()
        .zip(v.basis())
        .map(|(p, b)| c_form(p, &sigma.apply_unchecked(b)))
        .collect();
    images.extend(
        psi.images()
            .iter()
            .zip(v.basis())
            .map(|(p, b)| c_form(&sigma.apply_unchecked(b).scale(-1.0), p)),
    );
    LinearMap::new(&vc, &wc, images)
}

/// The canonical maps attached to a complexification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Canonical {
    /// `V → R_V`, `x ↦ c(x, 0)`.
    Kappa,
    /// `R_V → V`, `c(x, y) ↦ x`.
    Rho,
    /// `R_V → V`, `c(x, y) ↦ y`.
    Sigma,
    /// `R_V → R_V`, `c(x, y) ↦ c(x, −y)`.
    Theta,
}

pub fn canonical_map(which: Canonical, v: &Arc<MatrixSystem>) -> Result<LinearMap> {
    match which {
        Canonical::Kappa => {
            if v.complex_structure().is_some() {
                return Err(Error::Domain("kappa needs a real system".into()));
            }
            let vc = Arc::new(complexify_system(v)?);
            let n = v.ambient();
            let zero = RealMatrix::zeros(n, n);
            LinearMap::from_fn(v, &vc, |x| c_form(x, &zero))
        }
        Canonical::Rho | Canonical::Sigma | Canonical::Theta => {
            let real = v.real_form().ok_or_else(|| {
                Error::Domain(format!("`{}` is not a complexified system", v.label()))
            })?;
            let n = real.ambient();
            match which {
                Canonical::Rho => LinearMap::from_fn(v, real, |z| z.block(0, 0, n, n)),
                Canonical::Sigma => LinearMap::from_fn(v, real, |z| z.block(n, 0, n, n)),
                _ => LinearMap::from_fn(v, v, |z| {
                    c_form(&z.block(0, 0, n, n), &z.block(n, 0, n, n).scale(-1.0))
                }),
            }
        }
    }
}
