//! The Siegel upper half-space of Sp(2n,R) and its Shilov boundary.
//!
//! Lagrangians are stored as orthonormal 2n x n frames; the affine chart
//! `Z <-> span(Z; Id)` is cached whenever the Lagrangian is transverse to
//! `l_inf = span(Id; 0)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    general_eigenvalues, is_positive_definite, min_singular_value, orthonormalize_columns,
    singular_values, sym_eigen, ComplexMatrix, Matrix, RealMatrix, Scalar,
    ToleranceProfile,
};

/// `J_n = [[0, Id], [-Id, 0]]`.
pub fn j_matrix(n: usize) -> RealMatrix {
    let mut j = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// `max |g^T J g - J|`.
pub fn symplectic_residual(g: &RealMatrix) -> f64 {
    let n = g.rows() / 2;
    let j = j_matrix(n);
    (&(&g.transpose() * &j) * g).dist(&j)
}

/// An element of Sp(2n,R).
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticElement {
    n: usize,
    g: RealMatrix,
}

impl SymplecticElement {
    /// Validates `g^T J g = J` within `residual_abs`, relative to `|g|^2`.
    pub fn new(g: RealMatrix, tol: &ToleranceProfile) -> Result<Self> {
        if !g.is_square() || !g.rows().is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "symplectic matrix must be 2n x 2n, got {}x{}",
                g.rows(),
                g.cols()
            )));
        }
        let residual = symplectic_residual(&g);
        let scale = g.max_abs().powi(2).max(1.0);
        if residual > tol.residual_abs * scale {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(Self { n: g.rows() / 2, g })
    }

    /// Wraps a matrix known to be symplectic by construction.
    pub(crate) fn from_trusted(g: RealMatrix) -> Self {
        debug_assert!(g.is_square() && g.rows().is_multiple_of(2));
        Self { n: g.rows() / 2, g }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_trusted(RealMatrix::identity(2 * n))
    }

    /// `diag(P, P^{-T})`, acting on charts by `Z -> P Z P^T`.
    pub fn from_gl(p: &RealMatrix, tol: &ToleranceProfile) -> Result<Self> {
        let n = p.rows();
        let pinv_t = p.inverse_checked(tol.condition_cap)?.transpose();
        let mut g = RealMatrix::zeros(2 * n, 2 * n);
        g.set_block(0, 0, p);
        g.set_block(n, n, &pinv_t);
        Ok(Self::from_trusted(g))
    }

    /// Interleaves n SL(2) matrices `[[a_i, b_i], [c_i, d_i]]` into
    /// `(diag a, diag b; diag c, diag d)`.
    pub fn from_sl2_blocks(blocks: &[[f64; 4]]) -> Self {
        let n = blocks.len();
        let mut g = RealMatrix::zeros(2 * n, 2 * n);
        for (i, [a, b, c, d]) in blocks.iter().copied().enumerate() {
            g[(i, i)] = a;
            g[(i, n + i)] = b;
            g[(n + i, i)] = c;
            g[(n + i, n + i)] = d;
        }
        Self::from_trusted(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.g
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.g
    }

    pub fn blocks(&self) -> (RealMatrix, RealMatrix, RealMatrix, RealMatrix) {
        let n = self.n;
        (
            self.g.block(0, 0, n, n),
            self.g.block(0, n, n, n),
            self.g.block(n, 0, n, n),
            self.g.block(n, n, n, n),
        )
    }

    /// Exact inverse `J^{-1} g^T J`.
    pub fn inverse(&self) -> Self {
        let n = self.n;
        let (a, b, c, d) = self.blocks();
        let inv = RealMatrix::from_blocks(&d.transpose(), &(-&b.transpose()), &(-&c.transpose()), &a.transpose());
        debug_assert_eq!(inv.rows(), 2 * n);
        Self::from_trusted(inv)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::from_trusted(&self.g * &other.g)
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::identity(self.n);
        for _ in 0..k.unsigned_abs() {
            acc = acc.compose(&base);
        }
        acc
    }

    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.g)
    }

    /// `(AZ + B)(CZ + D)^{-1}`.
    pub fn act_on_siegel(&self, z: &SiegelPoint, tol: &ToleranceProfile) -> Result<SiegelPoint> {
        check_rank(self.n, z.n)?;
        let (a, b, c, d) = self.blocks();
        let zc = z.to_complex();
        let num = &(&a.to_complex() * &zc) + &b.to_complex();
        let den = &(&c.to_complex() * &zc) + &d.to_complex();
        let w = &num * &den.inverse_checked(tol.condition_cap)?;
        SiegelPoint::from_complex(&w, tol)
    }

    pub fn act_on_lagrangian(&self, l: &LagrangianFrame, tol: &ToleranceProfile) -> Result<LagrangianFrame> {
        check_rank(self.n, l.n)?;
        LagrangianFrame::from_frame(&(&self.g * &l.frame), tol)
    }
}

pub(crate) fn check_rank(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::RankMismatch { expected, found });
    }
    Ok(())
}

/// A Lagrangian subspace of R^{2n}.
#[derive(Debug, Clone)]
pub struct LagrangianFrame {
    n: usize,
    frame: RealMatrix,
    chart: Option<RealMatrix>,
    at_infinity: bool,
}

impl LagrangianFrame {
    /// Builds from any full-rank 2n x n frame; columns are orthonormalised.
    pub fn from_frame(f: &RealMatrix, tol: &ToleranceProfile) -> Result<Self> {
        if f.rows() != 2 * f.cols() {
            return Err(Error::Domain(format!(
                "Lagrangian frame must be 2n x n, got {}x{}",
                f.rows(),
                f.cols()
            )));
        }
        let n = f.cols();
        let sv = singular_values(f);
        let smax = sv[0];
        if smax == 0.0 || sv[n - 1] <= tol.pd_margin * smax {
            return Err(Error::Linalg(crate::linalg::LinalgError::RankDeficient));
        }
        let q = orthonormalize_columns(f)?;
        let iso = (&(&q.transpose() * &j_matrix(n)) * &q).max_abs();
        if iso > tol.residual_abs.max(1e-9) * 10.0 {
            return Err(Error::NotIsotropic { residual: iso });
        }
        let (chart, at_infinity) = chart_of(&q, tol);
        Ok(Self {
            n,
            frame: q,
            chart,
            at_infinity,
        })
    }

    /// Lagrangian spanned by the columns of `(Z; Id)` for symmetric `Z`.
    pub fn from_chart(z: &RealMatrix, tol: &ToleranceProfile) -> Result<Self> {
        if !z.is_square() {
            return Err(Error::Domain("chart must be square".into()));
        }
        let asym = z.asymmetry();
        if asym > tol.residual_abs * z.max_abs().max(1.0) {
            return Err(Error::Linalg(crate::linalg::LinalgError::SymmetryViolation {
                asymmetry: asym,
            }));
        }
        let n = z.rows();
        let zs = z.symmetrize();
        let f = zs.vstack(&RealMatrix::identity(n));
        let q = orthonormalize_columns(&f)?;
        Ok(Self {
            n,
            frame: q,
            chart: Some(zs),
            at_infinity: false,
        })
    }

    /// `l_inf = span(e_1, ..., e_n)`.
    pub fn infinity(n: usize) -> Self {
        Self {
            n,
            frame: RealMatrix::identity(n).vstack(&RealMatrix::zeros(n, n)),
            chart: None,
            at_infinity: true,
        }
    }

    /// The Lagrangian with chart `0`.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            frame: RealMatrix::zeros(n, n).vstack(&RealMatrix::identity(n)),
            chart: Some(RealMatrix::zeros(n, n)),
            at_infinity: false,
        }
    }

    /// Chart `lambda * Id`.
    pub fn scalar(n: usize, lambda: f64) -> Self {
        let tol = ToleranceProfile::default();
        Self::from_chart(&RealMatrix::identity(n).scale(lambda), &tol).expect("scalar chart")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frame(&self) -> &RealMatrix {
        &self.frame
    }

    pub fn chart(&self) -> Option<&RealMatrix> {
        self.chart.as_ref()
    }

    pub fn is_at_infinity(&self) -> bool {
        self.at_infinity
    }

    /// Chart or a domain error when the Lagrangian meets `l_inf`.
    pub fn chart_or_err(&self) -> Result<&RealMatrix> {
        self.chart
            .as_ref()
            .ok_or_else(|| Error::Domain("Lagrangian is not transverse to l_inf".into()))
    }

    /// Basis used by the cross-ratio: `(Z; Id)` when a chart exists.
    fn basis(&self) -> RealMatrix {
        match &self.chart {
            Some(z) if z.max_abs() < 1e6 => z.vstack(&RealMatrix::identity(self.n)),
            _ => self.frame.clone(),
        }
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> RealMatrix {
        &self.frame * &self.frame.transpose()
    }

    /// Max-abs distance between orthogonal projectors.
    pub fn distance(&self, other: &Self) -> f64 {
        self.projector().dist(&other.projector())
    }

    /// Canonical key for equality up to the GL(n) column action: the chart
    /// rounded to `1e-6` when it exists, the projector otherwise.
    pub fn key(&self) -> Vec<i64> {
        let round = |v: f64| (v * 1e6).round() as i64;
        match &self.chart {
            Some(z) => std::iter::once(0)
                .chain(z.data().iter().map(|&v| round(v)))
                .collect(),
            None => std::iter::once(1)
                .chain(self.projector().data().iter().map(|&v| round(v)))
                .collect(),
        }
    }
}

fn chart_of(q: &RealMatrix, tol: &ToleranceProfile) -> (Option<RealMatrix>, bool) {
    let n = q.cols();
    let top = q.block(0, 0, n, n);
    let bottom = q.block(n, 0, n, n);
    let sv = singular_values(&bottom);
    if sv[0] <= tol.residual_abs {
        return (None, true);
    }
    match bottom.inverse_checked(tol.condition_cap) {
        Ok(inv) => (Some((&top * &inv).symmetrize()), false),
        Err(_) => (None, false),
    }
}

/// `[F1 | F2]` has smallest singular value above `pd_margin`.
pub fn transverse(l1: &LagrangianFrame, l2: &LagrangianFrame, tol: &ToleranceProfile) -> bool {
    transversality_margin(l1, l2) > tol.pd_margin
}

/// Smallest singular value of `[F1 | F2]` for orthonormal frames.
pub fn transversality_margin(l1: &LagrangianFrame, l2: &LagrangianFrame) -> f64 {
    min_singular_value(&l1.frame.hstack(&l2.frame))
}

fn require_transverse(l1: &LagrangianFrame, l2: &LagrangianFrame, tol: &ToleranceProfile) -> Result<()> {
    check_rank(l1.n, l2.n)?;
    let margin = transversality_margin(l1, l2);
    if margin <= tol.pd_margin {
        return Err(Error::NotTransverse { margin });
    }
    Ok(())
}

/// Cross-ratio from frames over any scalar field: the matrix of
/// `p_{l1}^{|| l2} o p_{l4}^{|| l3}` restricted to `l1`, in the basis `f1`.
pub fn cross_ratio_frames<T: Scalar>(
    f1: &Matrix<T>,
    f2: &Matrix<T>,
    f3: &Matrix<T>,
    f4: &Matrix<T>,
    tol: &ToleranceProfile,
) -> Result<Matrix<T>> {
    let n = f1.cols();
    let m43 = f4.hstack(f3);
    let y = m43.solve_checked(f1, tol.condition_cap).map_err(not_transverse)?;
    let m12 = f1.hstack(f2);
    let x = m12.solve_checked(f4, tol.condition_cap).map_err(not_transverse)?;
    Ok(&x.block(0, 0, n, n) * &y.block(0, 0, n, n))
}

fn not_transverse(e: crate::linalg::LinalgError) -> Error {
    match e {
        crate::linalg::LinalgError::Conditioning { condition } => Error::NotTransverse {
            margin: 1.0 / condition,
        },
        other => Error::Linalg(other),
    }
}

/// `R(l1, l2, l3, l4)` as an endomorphism of `l1`. When `l1` has a moderate
/// chart the result is expressed in the chart basis, so it coincides with
/// `(X1-X2)^{-1}(X4-X2)(X4-X3)^{-1}(X1-X3)` whenever all charts exist.
pub fn cross_ratio(
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    l3: &LagrangianFrame,
    l4: &LagrangianFrame,
    tol: &ToleranceProfile,
) -> Result<RealMatrix> {
    require_transverse(l1, l2, tol)?;
    require_transverse(l3, l4, tol)?;
    check_rank(l1.n, l3.n)?;
    cross_ratio_frames(&l1.basis(), &l2.basis(), &l3.basis(), &l4.basis(), tol)
}

/// `(X1-X2)^{-1}(X4-X2)(X4-X3)^{-1}(X1-X3)` on charts.
pub fn cross_ratio_charts<T: Scalar>(
    x1: &Matrix<T>,
    x2: &Matrix<T>,
    x3: &Matrix<T>,
    x4: &Matrix<T>,
    tol: &ToleranceProfile,
) -> Result<Matrix<T>> {
    let a = (x1 - x2).inverse_checked(tol.condition_cap).map_err(not_transverse)?;
    let b = (x4 - x3).inverse_checked(tol.condition_cap).map_err(not_transverse)?;
    Ok(&(&(&a * &(x4 - x2)) * &b) * &(x1 - x3))
}

/// Returns `g` with `g.a = 0` and `g.b = l_inf`.
pub fn standardize_pair(
    a: &LagrangianFrame,
    b: &LagrangianFrame,
    tol: &ToleranceProfile,
) -> Result<SymplecticElement> {
    Ok(transport_from_standard(a, b, tol)?.inverse())
}

/// Returns `S` with `S.0 = a` and `S.l_inf = b`: `S = [B' | A]` with `B'`
/// rescaled so that `S^T J S = J`.
pub fn transport_from_standard(
    a: &LagrangianFrame,
    b: &LagrangianFrame,
    tol: &ToleranceProfile,
) -> Result<SymplecticElement> {
    require_transverse(a, b, tol)?;
    let n = a.n;
    let j = j_matrix(n);
    let m = &(&b.frame.transpose() * &j) * &a.frame;
    let x = m
        .inverse_checked(tol.condition_cap)
        .map_err(not_transverse)?
        .transpose();
    let bp = &b.frame * &x;
    Ok(SymplecticElement::from_trusted(bp.hstack(&a.frame)))
}

fn chart_after(g: &SymplecticElement, l: &LagrangianFrame, tol: &ToleranceProfile) -> Result<RealMatrix> {
    let image = g.act_on_lagrangian(l, tol)?;
    image
        .chart
        .ok_or_else(|| Error::Numerical("transported Lagrangian lost its chart".into()))
}

/// `(l1, l2, l3)` is maximal: after sending `l1 -> l_inf` and `l2 -> 0`,
/// the chart of `l3` is positive definite.
pub fn is_maximal_triple(
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    l3: &LagrangianFrame,
    tol: &ToleranceProfile,
) -> Result<bool> {
    require_transverse(l1, l2, tol)?;
    require_transverse(l2, l3, tol)?;
    require_transverse(l1, l3, tol)?;
    let g = standardize_pair(l2, l1, tol)?;
    let y = chart_after(&g, l3, tol)?;
    Ok(is_positive_definite(&y, tol))
}

/// Every ordered sub-triple `(l_i, l_j, l_k)`, `i < j < k`, is maximal.
pub fn is_maximal_tuple(ls: &[LagrangianFrame], tol: &ToleranceProfile) -> Result<bool> {
    for i in 0..ls.len() {
        for j in i + 1..ls.len() {
            require_transverse(&ls[i], &ls[j], tol)?;
        }
    }
    for i in 0..ls.len() {
        for j in i + 1..ls.len() {
            for k in j + 1..ls.len() {
                if !is_maximal_triple(&ls[i], &ls[j], &ls[k], tol)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A point `Z = X + iY` of the Siegel upper half-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiegelPoint {
    n: usize,
    x: RealMatrix,
    y: RealMatrix,
}

impl SiegelPoint {
    pub fn new(x: RealMatrix, y: RealMatrix, tol: &ToleranceProfile) -> Result<Self> {
        if !x.is_square() || x.rows() != y.rows() || !y.is_square() {
            return Err(Error::Domain("X and Y must be square of equal size".into()));
        }
        for m in [&x, &y] {
            let asym = m.asymmetry();
            if asym > tol.residual_abs * m.max_abs().max(1.0) * 10.0 {
                return Err(Error::Linalg(crate::linalg::LinalgError::SymmetryViolation {
                    asymmetry: asym,
                }));
            }
        }
        let y = y.symmetrize();
        if !is_positive_definite(&y, tol) {
            return Err(Error::Domain("imaginary part is not positive definite".into()));
        }
        Ok(Self {
            n: x.rows(),
            x: x.symmetrize(),
            y,
        })
    }

    /// `i Y`.
    pub fn imaginary(y: RealMatrix, tol: &ToleranceProfile) -> Result<Self> {
        let n = y.rows();
        Self::new(RealMatrix::zeros(n, n), y, tol)
    }

    pub fn from_complex(z: &ComplexMatrix, tol: &ToleranceProfile) -> Result<Self> {
        let x = RealMatrix::from_fn(z.rows(), z.cols(), |r, c| z[(r, c)].re);
        let y = RealMatrix::from_fn(z.rows(), z.cols(), |r, c| z[(r, c)].im);
        Self::new(x, y, tol)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn re(&self) -> &RealMatrix {
        &self.x
    }

    pub fn im(&self) -> &RealMatrix {
        &self.y
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |r, c| {
            Complex64::new(self.x[(r, c)], self.y[(r, c)])
        })
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.x.dist(&other.x).max(self.y.dist(&other.y))
    }
}

/// Weyl-chamber vector `x_1 >= ... >= x_n >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeylVector(pub Vec<f64>);

impl WeylVector {
    /// Sorts descending; tiny negative components are snapped to zero.
    pub fn from_unsorted(mut v: Vec<f64>, tol: &ToleranceProfile) -> Result<Self> {
        v.sort_by(|a, b| b.total_cmp(a));
        for x in &mut v {
            if *x < 0.0 {
                if *x < -tol.compare_rel.max(tol.residual_abs) {
                    return Err(Error::Numerical(format!("negative Weyl component {x}")));
                }
                *x = 0.0;
            }
        }
        Ok(Self(v))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// `sum x_i / 2`.
    pub fn finsler(&self) -> f64 {
        0.5 * self.0.iter().sum::<f64>()
    }

    /// `sqrt(sum x_i^2)`.
    pub fn riemannian(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Siegel's vectorial distance: `log((1 + sqrt r)/(1 - sqrt r))` over the
/// eigenvalues `r` of `R(Z1, conj Z2, Z2, conj Z1)`.
pub fn vectorial_distance(z1: &SiegelPoint, z2: &SiegelPoint, tol: &ToleranceProfile) -> Result<WeylVector> {
    check_rank(z1.n, z2.n)?;
    let a = z1.to_complex();
    let b = z2.to_complex();
    let r = cross_ratio_charts(&a, &b.conj(), &b, &a.conj(), tol)?;
    let eig = general_eigenvalues(&r)?;
    let mut comps = Vec::with_capacity(z1.n);
    for e in eig {
        if e.im.abs() > 1e-8 * e.norm().max(1.0) {
            return Err(Error::Numerical(format!(
                "cross-ratio eigenvalue {e} is not real"
            )));
        }
        let mut rv = e.re;
        if rv < 0.0 && rv > -1e-8 {
            rv = 0.0;
        }
        if !(0.0..=1.0 - tol.pd_margin).contains(&rv) {
            return Err(Error::Numerical(format!(
                "cross-ratio eigenvalue {rv} outside [0, 1)"
            )));
        }
        let s = rv.sqrt();
        comps.push((2.0 * s / (1.0 - s)).ln_1p());
    }
    WeylVector::from_unsorted(comps, tol)
}

pub fn finsler_distance(z1: &SiegelPoint, z2: &SiegelPoint, tol: &ToleranceProfile) -> Result<f64> {
    Ok(vectorial_distance(z1, z2, tol)?.finsler())
}

pub fn riemannian_distance(z1: &SiegelPoint, z2: &SiegelPoint, tol: &ToleranceProfile) -> Result<f64> {
    Ok(vectorial_distance(z1, z2, tol)?.riemannian())
}

/// Normal form of a maximal 4-tuple: `g` with
/// `g.(l1, l2, l3, l4) = (-Id, -L, L, Id)`, `L` diagonal in `(0, 1)`,
/// entries descending.
pub fn normalize_maximal_4tuple(
    ls: [&LagrangianFrame; 4],
    tol: &ToleranceProfile,
) -> Result<(SymplecticElement, RealMatrix)> {
    let owned: Vec<LagrangianFrame> = ls.iter().map(|l| (*l).clone()).collect();
    if !is_maximal_tuple(&owned, tol)? {
        return Err(Error::NotMaximal);
    }
    let n = ls[0].n;
    // (l1, l2, l3, l4) -> (X1, 0, D, l_inf)
    let g1 = standardize_pair(ls[1], ls[3], tol)?;
    let x1 = chart_after(&g1, ls[0], tol)?;
    let d = chart_after(&g1, ls[2], tol)?;
    // X1 -> -Id
    let p = crate::linalg::sym_apply(&(-&x1), tol, |v| 1.0 / v.sqrt())?;
    let g2 = SymplecticElement::from_gl(&p, tol)?;
    let d2 = (&(&p * &d) * &p).symmetrize();
    let (dv, o) = sym_eigen(&d2, tol)?;
    let g3 = SymplecticElement::from_gl(&o.transpose(), tol)?;
    // Per eigenvalue: (-1, 0, d, inf) -> (-1, -lambda, lambda, 1).
    let mut blocks = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(n);
    for &di in &dv {
        if di <= tol.pd_margin {
            return Err(Error::Numerical(format!("non-positive normal-form entry {di}")));
        }
        // t = (sqrt(1+d) - 1)/d
        let t = 1.0 / ((1.0 + di).sqrt() + 1.0);
        let lambda = 1.0 - 2.0 * t;
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Numerical(format!("normal-form eigenvalue {lambda} outside (0,1)")));
        }
        let det = 2.0 * t * (1.0 - t);
        let s = det.sqrt();
        blocks.push([t / s, (2.0 * t - 1.0) / s, t / s, 1.0 / s]);
        lambdas.push(lambda);
    }
    let g4 = SymplecticElement::from_sl2_blocks(&blocks);
    let g = g4.compose(&g3).compose(&g2).compose(&g1);
    let lam = RealMatrix::from_diag(&lambdas);
    let id = RealMatrix::identity(n);
    let expected = [-&id, -&lam, lam.clone(), id.clone()];
    for (l, e) in ls.iter().zip(expected.iter()) {
        let c = chart_after(&g, l, tol)?;
        if c.dist(e) > 1e-6 * (1.0 + e.max_abs()) {
            return Err(Error::Numerical(format!(
                "normal form post-condition failed (error {:.3e})",
                c.dist(e)
            )));
        }
    }
    Ok((g, lam))
}
