//! Dense linear algebra for the small matrices this crate needs.
//!
//! Everything here works on matrices of dimension at most a dozen or so:
//! Jacobi for symmetric spectra, Hessenberg plus shifted complex QR for
//! general spectra, partial-pivot LU for solves and determinants.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the kernel.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    SymmetryViolation { asymmetry: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("ill-conditioned solve (condition estimate {condition:.3e})")]
    Conditioning { condition: f64 },
    #[error("eigenvalue iteration did not converge for {rows}x{rows} matrix {entries:?}")]
    NoConvergence { rows: usize, entries: Vec<f64> },
    #[error("columns are numerically dependent")]
    RankDeficient,
}

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceProfile {
    pub residual_abs: f64,
    pub compare_rel: f64,
    pub pd_margin: f64,
    pub condition_cap: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            residual_abs: 1e-9,
            compare_rel: 1e-7,
            pd_margin: 1e-9,
            condition_cap: 1e12,
        }
    }
}

impl ToleranceProfile {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("residual_abs", self.residual_abs),
            ("compare_rel", self.compare_rel),
            ("pd_margin", self.pd_margin),
            ("condition_cap", self.condition_cap),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be a positive finite number"));
            }
        }
        if self.condition_cap <= 1.0 {
            return Err("condition_cap must exceed 1".into());
        }
        Ok(())
    }

    /// `|a - b| <= max(compare_rel * max(|a|, |b|), residual_abs)`.
    pub fn close(&self, a: f64, b: f64) -> bool {
        let scale = a.abs().max(b.abs());
        (a - b).abs() <= (self.compare_rel * scale).max(self.residual_abs)
    }
}

/// Field of entries: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn is_finite_value(self) -> bool;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite_value()) {
            return Err(LinalgError::NonFinite {
                row: i / cols,
                col: i % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite_value())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.to_complex()).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Sub-block of size `r` x `c` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, r: usize, c: usize) -> Self {
        Self::from_fn(r, c, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        out
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut out = Self::zeros(self.rows + other.rows, self.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, 0, other);
        out
    }

    /// `[[a, b], [c, d]]` from four equally sized blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        a.hstack(b).vstack(&c.hstack(d))
    }

    pub fn frobenius(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.modulus() * v.modulus())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Max-abs distance between two matrices of equal shape.
    pub fn dist(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).modulus())
            .fold(0.0, f64::max)
    }

    /// Largest `|M - M^H|` entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).modulus());
            }
        }
        worst
    }

    /// `(M + M^T) / 2` (plain transpose, no conjugation).
    pub fn symmetrize(&self) -> Self {
        let half = T::from_f64(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)]) * half
        })
    }

    pub fn lu(&self) -> Lu<T> {
        Lu::new(self)
    }

    pub fn det(&self) -> T {
        self.lu().det()
    }

    /// Inverse with a condition-number guard.
    pub fn inverse_checked(&self, cap: f64) -> Result<Self, LinalgError> {
        let lu = self.lu();
        if lu.singular {
            return Err(LinalgError::Conditioning {
                condition: f64::INFINITY,
            });
        }
        let inv = lu.solve(&Self::identity(self.rows));
        let cond = self.norm1() * inv.norm1();
        if !cond.is_finite() || cond > cap || !inv.all_finite() {
            return Err(LinalgError::Conditioning { condition: cond });
        }
        Ok(inv)
    }

    /// Solve `self * X = b` with a condition-number guard.
    pub fn solve_checked(&self, b: &Self, cap: f64) -> Result<Self, LinalgError> {
        let inv = self.inverse_checked(cap)?;
        Ok(inv.matmul(b))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: Self) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: Self) -> Matrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|v| -v)
    }
}

impl Serialize for Matrix<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// LU factorisation with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<T: Scalar> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    parity: f64,
    singular: bool,
}

impl<T: Scalar> Lu<T> {
    fn new(a: &Matrix<T>) -> Self {
        assert!(a.is_square(), "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, lu[(r, k)].modulus()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for c in 0..n {
                    lu.data.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                parity = -parity;
            }
            let pivot = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / pivot;
                lu[(r, k)] = f;
                if f == T::zero() {
                    continue;
                }
                for c in k + 1..n {
                    let v = lu[(k, c)];
                    lu[(r, c)] -= f * v;
                }
            }
        }
        Self {
            lu,
            perm,
            parity,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> T {
        if self.singular {
            return T::zero();
        }
        let mut d = T::from_f64(self.parity);
        for i in 0..self.lu.rows {
            d *= self.lu[(i, i)];
        }
        d
    }

    pub fn solve(&self, b: &Matrix<T>) -> Matrix<T> {
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let mut x = Matrix::from_fn(n, b.cols, |r, c| b[(self.perm[r], c)]);
        for c in 0..b.cols {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        x
    }
}

fn check_symmetric(m: &RealMatrix, tol: &ToleranceProfile) -> Result<(), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape("symmetric input must be square".into()));
    }
    let asym = m.asymmetry();
    if asym > tol.residual_abs * m.max_abs().max(1.0) {
        return Err(LinalgError::SymmetryViolation { asymmetry: asym });
    }
    Ok(())
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues come back in descending order; column `i` of the returned
/// matrix is the eigenvector for eigenvalue `i`.
pub fn sym_eigen(
    m: &RealMatrix,
    tol: &ToleranceProfile,
) -> Result<(Vec<f64>, RealMatrix), LinalgError> {
    check_symmetric(m, tol)?;
    let n = m.rows;
    let mut a = m.symmetrize();
    let mut v = RealMatrix::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
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
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = RealMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((vals, vecs))
}

/// Strict positive-definiteness: smallest eigenvalue above `pd_margin`.
pub fn is_positive_definite(m: &RealMatrix, tol: &ToleranceProfile) -> bool {
    match sym_eigen(m, tol) {
        Ok((vals, _)) => vals.last().is_some_and(|&v| v > tol.pd_margin),
        Err(_) => false,
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &RealMatrix, tol: &ToleranceProfile) -> Result<f64, LinalgError> {
    let (vals, _) = sym_eigen(m, tol)?;
    Ok(*vals.last().expect("non-empty"))
}

/// `V f(Λ) V^T` for a symmetric matrix.
pub fn sym_apply(
    m: &RealMatrix,
    tol: &ToleranceProfile,
    f: impl Fn(f64) -> f64,
) -> Result<RealMatrix, LinalgError> {
    let (vals, v) = sym_eigen(m, tol)?;
    let d = RealMatrix::from_diag(&vals.iter().map(|&x| f(x)).collect::<Vec<_>>());
    Ok((&(&v * &d) * &v.transpose()).symmetrize())
}

/// Symmetric positive-definite square root.
pub fn sym_sqrt(m: &RealMatrix, tol: &ToleranceProfile) -> Result<RealMatrix, LinalgError> {
    let (vals, _) = sym_eigen(m, tol)?;
    let min = *vals.last().expect("non-empty");
    if min <= tol.pd_margin {
        return Err(LinalgError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    sym_apply(m, tol, f64::sqrt)
}

/// `log det` of a symmetric positive-definite matrix.
pub fn log_det_pd(m: &RealMatrix, tol: &ToleranceProfile) -> Result<f64, LinalgError> {
    let (vals, _) = sym_eigen(m, tol)?;
    let min = *vals.last().expect("non-empty");
    if min <= tol.pd_margin {
        return Err(LinalgError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(vals.iter().map(|v| v.ln()).sum())
}

/// Eigenvalues of `B^{-1} A` for symmetric `A` and positive-definite `B`,
/// descending. Computed as the spectrum of `B^{-1/2} A B^{-1/2}`.
pub fn generalized_sym_eigenvalues(
    a: &RealMatrix,
    b: &RealMatrix,
    tol: &ToleranceProfile,
) -> Result<Vec<f64>, LinalgError> {
    let (vals, _) = sym_eigen(b, tol)?;
    let min = *vals.last().expect("non-empty");
    if min <= tol.pd_margin {
        return Err(LinalgError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let bm = sym_apply(b, tol, |x| 1.0 / x.sqrt())?;
    let c = (&(&bm * a) * &bm).symmetrize();
    Ok(sym_eigen(&c, tol)?.0)
}

/// Reduce to upper Hessenberg form by Householder reflections.
fn hessenberg(a: &mut ComplexMatrix) {
    let n = a.rows;
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|r| a[(r, k)]).collect();
        let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * norm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vn;
        }
        // A <- (I - 2vv*) A
        for c in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * a[(k + 1 + i, c)];
            }
            for (i, vi) in v.iter().enumerate() {
                a[(k + 1 + i, c)] -= *vi * s * 2.0;
            }
        }
        // A <- A (I - 2vv*)
        for r in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (i, vi) in v.iter().enumerate() {
                s += a[(r, k + 1 + i)] * vi;
            }
            for (i, vi) in v.iter().enumerate() {
                a[(r, k + 1 + i)] -= s * vi.conj() * 2.0;
            }
        }
        for r in k + 2..n {
            a[(r, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if x.norm() == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let alpha = x / x.norm();
    (x.norm() / r, alpha * y.conj() / r)
}

/// All eigenvalues of a square matrix, sorted by descending modulus.
pub fn general_eigenvalues<T: Scalar>(m: &Matrix<T>) -> Result<Vec<Complex64>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Shape("eigenvalues need a square matrix".into()));
    }
    let n = m.rows;
    let mut h = m.to_complex();
    hessenberg(&mut h);
    let eps = f64::EPSILON;
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n as isize - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi >= 0 {
        let hiu = hi as usize;
        if hiu == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hiu;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l, l)].norm() + h[(l - 1, l - 1)].norm();
            let floor = if diag == 0.0 { h.max_abs() } else { diag };
            if sub <= eps * floor {
                h[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hiu {
            eig[hiu] = h[(hiu, hiu)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 200 * n.max(4) {
            return Err(LinalgError::NoConvergence {
                rows: n,
                entries: m.data.iter().map(|v| v.to_complex().re).collect(),
            });
        }
        let a = h[(hiu - 1, hiu - 1)];
        let b = h[(hiu - 1, hiu)];
        let c = h[(hiu, hiu - 1)];
        let d = h[(hiu, hiu)];
        let mu = if iter % 11 == 10 {
            d + Complex64::new(c.norm(), 0.0)
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hiu {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hiu - l);
        for k in l..hiu {
            let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            for col in k..=hiu {
                let x = h[(k, col)];
                let y = h[(k + 1, col)];
                h[(k, col)] = x * cs + sn * y;
                h[(k + 1, col)] = -sn.conj() * x + y * cs;
            }
            rots.push((cs, sn));
        }
        for (idx, k) in (l..hiu).enumerate() {
            let (cs, sn) = rots[idx];
            let top = (k + 2).min(hiu);
            for row in l..=top {
                let x = h[(row, k)];
                let y = h[(row, k + 1)];
                h[(row, k)] = x * cs + y * sn.conj();
                h[(row, k + 1)] = -x * sn + y * cs;
            }
        }
        for k in l..=hiu {
            h[(k, k)] += mu;
        }
    }
    eig.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(y.re.total_cmp(&x.re)).then(y.im.total_cmp(&x.im)));
    Ok(eig)
}

/// Singular values by one-sided Jacobi, descending.
pub fn singular_values(m: &RealMatrix) -> Vec<f64> {
    let mut a = if m.rows >= m.cols { m.clone() } else { m.transpose() };
    let (rows, cols) = (a.rows, a.cols);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for r in 0..rows {
                    alpha += a[(r, p)] * a[(r, p)];
                    beta += a[(r, q)] * a[(r, q)];
                    gamma += a[(r, p)] * a[(r, q)];
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let x = a[(r, p)];
                    let y = a[(r, q)];
                    a[(r, p)] = c * x - s * y;
                    a[(r, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|c| (0..rows).map(|r| a[(r, c)] * a[(r, c)]).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn min_singular_value(m: &RealMatrix) -> f64 {
    *singular_values(m).last().expect("non-empty")
}

/// Orthonormal basis of the column span (Gram-Schmidt with one
/// re-orthogonalisation pass).
pub fn orthonormalize_columns(m: &RealMatrix) -> Result<RealMatrix, LinalgError> {
    let (rows, cols) = (m.rows, m.cols);
    let scale = m.max_abs();
    if scale == 0.0 {
        return Err(LinalgError::RankDeficient);
    }
    let mut q = m.scale(1.0 / scale);
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let dot: f64 = (0..rows).map(|r| q[(r, k)] * q[(r, j)]).sum();
                for r in 0..rows {
                    let v = q[(r, k)];
                    q[(r, j)] -= dot * v;
                }
            }
        }
        let norm = (0..rows).map(|r| q[(r, j)] * q[(r, j)]).sum::<f64>().sqrt();
        if norm <= 1e-13 {
            return Err(LinalgError::RankDeficient);
        }
        for r in 0..rows {
            q[(r, j)] /= norm;
        }
    }
    Ok(q)
}
