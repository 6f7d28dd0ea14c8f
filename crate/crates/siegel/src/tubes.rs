//! R-tubes: parallel sets of singular geodesics between transverse
//! Lagrangians. Every operation moves the endpoints to `(0, l_inf)`, works
//! in that position and transports back.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    generalized_sym_eigenvalues, general_eigenvalues, is_positive_definite, log_det_pd, sym_apply,
    sym_sqrt, ComplexMatrix, RealMatrix, ToleranceProfile,
};
use crate::siegel::{
    cross_ratio, cross_ratio_frames, is_maximal_tuple, j_matrix, standardize_pair,
    transport_from_standard, transverse, LagrangianFrame, SiegelPoint, SymplecticElement,
    WeylVector,
};

/// The tube `Y_{a,b}`.
#[derive(Debug, Clone)]
pub struct RTube {
    a: LagrangianFrame,
    b: LagrangianFrame,
}

/// Coordinates of a point `iY` of `Y_{0,l_inf}` in the split
/// `R x SL(n,R)/SO(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSplitCoords {
    pub euclid: f64,
    pub sl_part: RealMatrix,
}

impl RTube {
    pub fn new(a: LagrangianFrame, b: LagrangianFrame, tol: &ToleranceProfile) -> Result<Self> {
        if !transverse(&a, &b, tol) {
            return Err(Error::NotTransverse {
                margin: crate::siegel::transversality_margin(&a, &b),
            });
        }
        Ok(Self { a, b })
    }

    /// `Y_{0, l_inf}`.
    pub fn standard(n: usize) -> Self {
        Self {
            a: LagrangianFrame::zero(n),
            b: LagrangianFrame::infinity(n),
        }
    }

    pub fn endpoints(&self) -> (&LagrangianFrame, &LagrangianFrame) {
        (&self.a, &self.b)
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Element sending `a -> 0`, `b -> l_inf`.
    pub fn standardizer(&self, tol: &ToleranceProfile) -> Result<SymplecticElement> {
        standardize_pair(&self.a, &self.b, tol)
    }

    /// Image of the tube under `g`.
    pub fn transported(&self, g: &SymplecticElement, tol: &ToleranceProfile) -> Result<Self> {
        Self::new(
            g.act_on_lagrangian(&self.a, tol)?,
            g.act_on_lagrangian(&self.b, tol)?,
            tol,
        )
    }

    /// The same tube with its endpoints listed in the other order.
    pub fn reversed(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// Same unordered endpoint pair as `other` (frame distance below `eps`).
    pub fn same_as(&self, other: &Self, eps: f64) -> bool {
        (self.a.distance(&other.a) < eps && self.b.distance(&other.b) < eps)
            || (self.a.distance(&other.b) < eps && self.b.distance(&other.a) < eps)
    }
}

fn point_frame(z: &ComplexMatrix) -> ComplexMatrix {
    z.vstack(&ComplexMatrix::identity(z.rows()))
}

/// `Z` lies on `Y_{a,b}` iff the complex cross-ratio `R(a, Z, conj Z, b)` is `-Id`.
pub fn contains_point(t: &RTube, z: &SiegelPoint, tol: &ToleranceProfile) -> Result<bool> {
    Ok(tube_membership_residual(t, z, tol)? < 1e-7)
}

/// `|R(a, Z, conj Z, b) + Id|`.
pub fn tube_membership_residual(t: &RTube, z: &SiegelPoint, tol: &ToleranceProfile) -> Result<f64> {
    crate::siegel::check_rank(t.n(), z.n())?;
    let zc = z.to_complex();
    let r = cross_ratio_frames(
        &t.a.frame().to_complex(),
        &point_frame(&zc),
        &point_frame(&zc.conj()),
        &t.b.frame().to_complex(),
        tol,
    )?;
    Ok((&r + &ComplexMatrix::identity(t.n())).max_abs())
}

/// Orders the endpoints of two tubes into a maximal 4-tuple
/// `(l1, l2, l3, l4)` with `t1 = {l1, l3}` and `t2 = {l2, l4}`.
fn interleave<'a>(
    t1: &'a RTube,
    t2: &'a RTube,
    tol: &ToleranceProfile,
) -> Option<[&'a LagrangianFrame; 4]> {
    let options = [
        [&t1.a, &t2.a, &t1.b, &t2.b],
        [&t1.a, &t2.b, &t1.b, &t2.a],
        [&t1.b, &t2.a, &t1.a, &t2.b],
        [&t1.b, &t2.b, &t1.a, &t2.a],
    ];
    options.into_iter().find(|o| {
        let owned: Vec<LagrangianFrame> = o.iter().map(|l| (*l).clone()).collect();
        matches!(is_maximal_tuple(&owned, tol), Ok(true))
    })
}

/// `|R(a, c, b, d) - 2 Id|` after orienting the pairs into a maximal tuple.
pub fn orthogonality_residual(t1: &RTube, t2: &RTube, tol: &ToleranceProfile) -> Option<f64> {
    let [a, c, b, d] = interleave(t1, t2, tol)?;
    let r = cross_ratio(a, c, b, d, tol).ok()?;
    Some((&r - &RealMatrix::identity(t1.n()).scale(2.0)).max_abs())
}

/// Orthogonality test `R(a, c, b, d) = 2 Id`.
pub fn tubes_orthogonal(t1: &RTube, t2: &RTube, tol: &ToleranceProfile) -> bool {
    orthogonality_residual(t1, t2, tol).is_some_and(|r| r < 1e-7)
}

/// The unique common point of two tubes with interleaving endpoints.
pub fn intersect_tubes(t1: &RTube, t2: &RTube, tol: &ToleranceProfile) -> Result<SiegelPoint> {
    let [l1, l2, l3, l4] = interleave(t1, t2, tol).ok_or(Error::DisjointTubes)?;
    let g = standardize_pair(l1, l3, tol)?;
    let x2 = g.act_on_lagrangian(l2, tol)?.chart_or_err()?.clone();
    let x4 = g.act_on_lagrangian(l4, tol)?.chart_or_err()?.clone();
    let neg4 = -&x4;
    if !is_positive_definite(&x2, tol) || !is_positive_definite(&neg4, tol) {
        return Err(Error::DisjointTubes);
    }
    // Solve Y^2 = M in the frame where X2 = Id, then move back.
    let q = sym_sqrt(&x2, tol)?;
    let p = sym_apply(&x2, tol, |v| 1.0 / v.sqrt())?;
    let m = (&(&p * &neg4) * &p).symmetrize();
    let y = (&(&q * &sym_sqrt(&m, tol)?) * &q).symmetrize();
    let point = SiegelPoint::imaginary(y, tol)?;
    g.inverse().act_on_siegel(&point, tol)
}

/// Matrix of the involution `sigma_{a,b}`: acts as `-1` on `a` and `+1` on `b`.
/// `sigma_{0, l_inf} = diag(Id, -Id)`.
pub fn involution_matrix(t: &RTube, tol: &ToleranceProfile) -> Result<RealMatrix> {
    let s = transport_from_standard(&t.a, &t.b, tol)?;
    let n = t.n();
    let mut d = RealMatrix::identity(2 * n);
    for i in n..2 * n {
        d[(i, i)] = -1.0;
    }
    Ok(&(s.matrix() * &d) * s.inverse().matrix())
}

/// `|sigma^T J sigma + J|`: tube involutions are anti-symplectic.
pub fn anti_symplectic_residual(sigma: &RealMatrix) -> f64 {
    let n = sigma.rows() / 2;
    let j = j_matrix(n);
    (&(&(&sigma.transpose() * &j) * sigma) + &j).max_abs()
}

/// Orthogonal projection of `l in ((a, b))` onto `Y_{a,b}`.
pub fn project_lagrangian(t: &RTube, l: &LagrangianFrame, tol: &ToleranceProfile) -> Result<SiegelPoint> {
    let triple = [t.a.clone(), l.clone(), t.b.clone()];
    if !is_maximal_tuple(&triple, tol)? {
        return Err(Error::Domain("Lagrangian is not in the interval ((a, b))".into()));
    }
    let g = t.standardizer(tol)?;
    let chart = g.act_on_lagrangian(l, tol)?.chart_or_err()?.clone();
    let p = SiegelPoint::imaginary(chart, tol)?;
    g.inverse().act_on_siegel(&p, tol)
}

/// `(log mu_1, ..., log mu_n)` for the eigenvalues `mu` of `R(a, x, y, b)`.
pub fn projected_vectorial_distance(
    t: &RTube,
    x: &LagrangianFrame,
    y: &LagrangianFrame,
    tol: &ToleranceProfile,
) -> Result<WeylVector> {
    let n = t.n();
    if x.distance(y) < 1e-12 {
        return Ok(WeylVector(vec![0.0; n]));
    }
    let tuple = [t.a.clone(), x.clone(), y.clone(), t.b.clone()];
    if !is_maximal_tuple(&tuple, tol)? {
        return Err(Error::NotMaximal);
    }
    let r = cross_ratio(&t.a, x, y, &t.b, tol)?;
    let logs = real_log_spectrum(&r)?;
    WeylVector::from_unsorted(logs, tol)
}

pub(crate) fn real_log_spectrum(r: &RealMatrix) -> Result<Vec<f64>> {
    general_eigenvalues(r)?
        .into_iter()
        .map(|e| {
            if e.im.abs() > 1e-7 * e.norm().max(1.0) || e.re <= 0.0 {
                Err(Error::Numerical(format!("cross-ratio eigenvalue {e} is not positive real")))
            } else {
                Ok(e.re.ln())
            }
        })
        .collect()
}

fn require_standard(z: &SiegelPoint, tol: &ToleranceProfile) -> Result<()> {
    if z.re().max_abs() > tol.residual_abs.max(1e-9) * z.im().max_abs().max(1.0) * 10.0 {
        return Err(Error::NotOnTube);
    }
    Ok(())
}

/// `iY -> (log det Y / sqrt n, Y / det(Y)^{1/n})`.
pub fn product_split(z: &SiegelPoint, tol: &ToleranceProfile) -> Result<TubeSplitCoords> {
    require_standard(z, tol)?;
    let n = z.n() as f64;
    let ld = log_det_pd(z.im(), tol)?;
    Ok(TubeSplitCoords {
        euclid: ld / n.sqrt(),
        sl_part: z.im().scale((-ld / n).exp()),
    })
}

/// Distance in `SL(n,R)/SO(n)`: `sqrt(sum log^2 mu)` over the eigenvalues of
/// `P Q^{-1}`.
pub fn sl_distance(p: &RealMatrix, q: &RealMatrix, tol: &ToleranceProfile) -> Result<f64> {
    let mu = generalized_sym_eigenvalues(p, q, tol)?;
    Ok(mu.iter().map(|m| m.ln().powi(2)).sum::<f64>().sqrt())
}

/// `(iA, iB)` on `Y_{0, l_inf}` is causal iff `B - A` is positive definite.
pub fn is_causal_pair(z1: &SiegelPoint, z2: &SiegelPoint, tol: &ToleranceProfile) -> Result<bool> {
    require_standard(z1, tol)?;
    require_standard(z2, tol)?;
    Ok(is_positive_definite(&(z2.im() - z1.im()), tol))
}
