//! Dense real matrix kernel.
//!
//! Everything downstream (systems, Choi matrices, the SDP engine) works on
//! [`RealMatrix`], a row-major `f64` matrix. Complex data only appears through
//! [`ComplexMatrix`] and is turned into real data by [`realify`], which builds
//! the block matrix `c(x, y) = [[x, -y], [y, x]]`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default relative tolerance of the PSD convention
/// `lambda_min >= -tol * max(1, ||a||)`.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Matrix unit `E_ij` of shape `rows x cols`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = 1.0;
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Self) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols,
            other.rows,
            "matmul shape mismatch {:?} x {:?}",
            self.shape(),
            other.shape()
        );
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * oc..(i + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * oc..(k + 1) * oc];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^T * other` without materialising the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.cols, other.cols);
        let oc = other.cols;
        for k in 0..self.rows {
            let brow = &other.data[k * oc..(k + 1) * oc];
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i];
                if a == 0.0 {
                    continue;
                }
                let orow = &mut out.data[i * oc..(i + 1) * oc];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = other.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// Frobenius inner product `tr(self^T other)`.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry of `|a - a^T|`.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square() && self.asymmetry() <= tol * self.max_abs().max(1.0)
    }

    /// `(a + a^T) / 2`
    pub fn symmetric_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    /// `(a - a^T) / 2`
    pub fn antisymmetric_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] - self[(j, i)])
        })
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        Self::from_fn(h, w, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Block-diagonal `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    /// `[[a, b], [c, d]]` from four equally shaped blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let (h, w) = a.shape();
        let mut out = Self::zeros(2 * h, 2 * w);
        out.set_block(0, 0, a);
        out.set_block(0, w, b);
        out.set_block(h, 0, c);
        out.set_block(h, w, d);
        out
    }

    /// `P a P^T` for the permutation sending index `s` to `perm[s]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert!(self.is_square() && perm.len() == self.rows);
        let mut out = Self::zeros(self.rows, self.cols);
        for s in 0..self.rows {
            for t in 0..self.cols {
                out[(perm[s], perm[t])] = self[(s, t)];
            }
        }
        out
    }

    fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    fn require_symmetric(&self, what: &str) -> Result<()> {
        self.require_square(what)?;
        let asym = self.asymmetry();
        let tol = 1e-10 * self.max_abs().max(1.0);
        if asym > tol {
            return Err(Error::Symmetry {
                asymmetry: asym,
                tolerance: tol,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.to_rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>10.4e}")).collect();
            writeln!(f, "  {}", cells.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Add for &RealMatrix {
    type Output = RealMatrix;
    fn add(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.shape(), rhs.shape());
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &RealMatrix {
    type Output = RealMatrix;
    fn sub(self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.shape(), rhs.shape());
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&RealMatrix> for RealMatrix {
    fn add_assign(&mut self, rhs: &RealMatrix) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&RealMatrix> for RealMatrix {
    fn sub_assign(&mut self, rhs: &RealMatrix) {
        self.axpy(-1.0, rhs);
    }
}

impl Mul for &RealMatrix {
    type Output = RealMatrix;
    fn mul(self, rhs: &RealMatrix) -> RealMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &RealMatrix {
    type Output = RealMatrix;
    fn neg(self) -> RealMatrix {
        self.scale(-1.0)
    }
}

impl Serialize for RealMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RealMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        RealMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

/// A complex matrix stored as its real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    pub re: RealMatrix,
    pub im: RealMatrix,
}

impl ComplexMatrix {
    pub fn new(re: RealMatrix, im: RealMatrix) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::Shape(format!(
                "real part {:?} and imaginary part {:?} differ",
                re.shape(),
                im.shape()
            )));
        }
        Ok(Self { re, im })
    }

    pub fn from_real(re: RealMatrix) -> Self {
        let im = RealMatrix::zeros(re.rows(), re.cols());
        Self { re, im }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.re.shape()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            re: self.re.transpose(),
            im: -&self.im.transpose(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let re = &self.re.matmul(&other.re) - &self.im.matmul(&other.im);
        let im = &self.re.matmul(&other.im) + &self.im.matmul(&other.re);
        Self { re, im }
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (r, c) = self.shape();
        let rows: Vec<Vec<[f64; 2]>> = (0..r)
            .map(|i| (0..c).map(|j| [self.re[(i, j)], self.im[(i, j)]]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        let re: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| row.iter().map(|z| z[0]).collect())
            .collect();
        let im: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| row.iter().map(|z| z[1]).collect())
            .collect();
        let re = RealMatrix::from_rows(&re).map_err(D::Error::custom)?;
        let im = RealMatrix::from_rows(&im).map_err(D::Error::custom)?;
        ComplexMatrix::new(re, im).map_err(D::Error::custom)
    }
}

/// `c(x, y) = [[x, -y], [y, x]]`.
pub fn c_form(x: &RealMatrix, y: &RealMatrix) -> RealMatrix {
    RealMatrix::from_blocks(x, &-y, y, x)
}

/// Realification of a square complex matrix `z = x + iy` as `c(x, y)`.
pub fn realify(z: &ComplexMatrix) -> Result<RealMatrix> {
    z.re.require_square("realify")?;
    Ok(c_form(&z.re, &z.im))
}

/// Symmetric eigendecomposition `a = Q diag(values) Q^T`, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: RealMatrix,
}

impl SymEig {
    pub fn reconstruct(&self) -> RealMatrix {
        let n = self.values.len();
        let scaled = RealMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.values[j]);
        scaled.matmul(&self.vectors.transpose())
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn sym_eig(a: &RealMatrix) -> Result<SymEig> {
    a.require_symmetric("sym_eig")?;
    let n = a.rows();
    let mut m = a.symmetric_part();
    let mut v = RealMatrix::identity(n);
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return Ok(SymEig {
            values: vec![0.0; n],
            vectors: v,
        });
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = RealMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEig { values, vectors })
}

/// Eigenvalues only (ascending), via Householder tridiagonalisation and
/// implicit QL. Used on hot paths where eigenvectors are not needed.
pub fn sym_eigenvalues(a: &RealMatrix) -> Vec<f64> {
    let n = a.rows();
    if n == 0 {
        return Vec::new();
    }
    let mut z = a.symmetric_part();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, &mut d, &mut e);
    tridiagonal_ql(&mut d, &mut e);
    d.sort_by(f64::total_cmp);
    d
}

pub fn min_eigenvalue(a: &RealMatrix) -> f64 {
    sym_eigenvalues(a).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(a: &RealMatrix) -> f64 {
    sym_eigenvalues(a).last().copied().unwrap_or(0.0)
}

fn tridiagonalize(a: &mut RealMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = a.rows();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] /= scale;
                    h += a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[(j, k)] * a[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g += a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * a[(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[(j, k)] -= f * e[k] + g * a[(i, k)];
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[(i, i)];
    }
}

fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

/// Largest singular value, computed from the spectrum of `a^T a`.
pub fn op_norm(a: &RealMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let gram = if a.rows() < a.cols() {
        a.matmul(&a.transpose())
    } else {
        a.tr_matmul(a)
    };
    max_eigenvalue(&gram).max(0.0).sqrt()
}

/// PSD test under the crate convention `lambda_min >= -tol * max(1, ||a||)`.
pub fn is_psd(a: &RealMatrix, tol: f64) -> bool {
    if !a.is_symmetric(1e-9) {
        return false;
    }
    let vals = sym_eigenvalues(a);
    let lo = vals.first().copied().unwrap_or(0.0);
    let hi = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    lo >= -tol * hi.max(1.0)
}

/// Lower Cholesky factor, or `None` if `a` is not numerically positive definite.
pub fn cholesky(a: &RealMatrix) -> Option<RealMatrix> {
    let n = a.rows();
    let mut l = RealMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` in place given the lower Cholesky factor.
pub fn cholesky_solve(l: &RealMatrix, b: &mut [f64]) {
    let n = l.rows();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &RealMatrix) -> RealMatrix {
    let n = l.rows();
    let mut inv = RealMatrix::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / l[(j, j)];
        for i in (j + 1)..n {
            let mut s = 0.0;
            for k in j..i {
                s -= l[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = s / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn spd_inverse(a: &RealMatrix) -> Option<RealMatrix> {
    let l = cholesky(a)?;
    let li = lower_inverse(&l);
    Some(li.tr_matmul(&li))
}

/// Applies `f` to the spectrum of a symmetric matrix.
pub fn spectral_map(a: &RealMatrix, f: impl Fn(f64) -> f64) -> Result<RealMatrix> {
    let eig = sym_eig(a)?;
    let n = eig.values.len();
    let q = &eig.vectors;
    let scaled = RealMatrix::from_fn(n, n, |i, j| q[(i, j)] * f(eig.values[j]));
    Ok(scaled.matmul(&q.transpose()))
}

/// Which tensor factor [`partial_trace`] removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOut {
    First,
    Second,
}

/// Partial trace of an `(n k) x (n k)` matrix over one tensor factor of `M_n ⊗ M_k`.
pub fn partial_trace(m: &RealMatrix, dims: (usize, usize), factor: TraceOut) -> Result<RealMatrix> {
    let (n, k) = dims;
    if !m.is_square() || m.rows() != n * k {
        return Err(Error::Shape(format!(
            "partial trace over M_{n} ⊗ M_{k} needs a {0}x{0} matrix, got {1}x{2}",
            n * k,
            m.rows(),
            m.cols()
        )));
    }
    Ok(match factor {
        TraceOut::First => {
            RealMatrix::from_fn(k, k, |a, b| (0..n).map(|i| m[(i * k + a, i * k + b)]).sum())
        }
        TraceOut::Second => {
            RealMatrix::from_fn(n, n, |i, j| (0..k).map(|a| m[(i * k + a, j * k + a)]).sum())
        }
    })
}

/// Permutation reordering `M_n ⊗ M_2 ⊗ M_m` into `M_2 ⊗ M_n ⊗ M_m`.
///
/// Index `(i, a, k)` of the source ordering (row-major) is sent to `(a, i, k)`.
pub fn canonical_shuffle(n: usize, m: usize) -> Vec<usize> {
    let mut perm = vec![0; 2 * n * m];
    for i in 0..n {
        for a in 0..2 {
            for k in 0..m {
                perm[i * 2 * m + a * m + k] = a * n * m + i * m + k;
            }
        }
    }
    perm
}
