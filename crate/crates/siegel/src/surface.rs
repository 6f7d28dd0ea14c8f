//! Pair-of-pants groups, their representations into Sp(2n,R), peripheral
//! fixed Lagrangians, translation lengths and the holomorphic double.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{general_eigenvalues, orthonormalize_columns, RealMatrix, ToleranceProfile};
use crate::siegel::{
    is_maximal_triple, is_maximal_tuple, transverse, transversality_margin, LagrangianFrame,
    SymplecticElement, WeylVector,
};
use crate::special::arccoth_exp;
use crate::tubes::{involution_matrix, RTube};

/// A freely reduced word in the generators. Letter `+k` is generator `k`
/// (1-based), `-k` its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FreeWord {
    letters: Vec<i8>,
}

impl FreeWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(letters: impl IntoIterator<Item = i8>) -> Self {
        let mut w = Self::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    pub fn generator(index: u8, exponent: i8) -> Self {
        let g = index as i8;
        Self::new([if exponent < 0 { -g } else { g }])
    }

    fn push(&mut self, l: i8) {
        assert!(l != 0, "letter 0 is not a generator");
        if self.letters.last() == Some(&-l) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    pub fn letters(&self) -> &[i8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut w = self.clone();
        for &l in &other.letters {
            w.push(l);
        }
        w
    }

    /// `w c w^{-1}`.
    pub fn conjugate(&self, c: &Self) -> Self {
        self.concat(c).concat(&self.inverse())
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut w = Self::identity();
        for _ in 0..k.unsigned_abs() {
            w = w.concat(&base);
        }
        w
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for &l in &self.letters {
            let base = (b'a' + (l.unsigned_abs() - 1)) as char;
            let c = if l < 0 { base.to_ascii_uppercase() } else { base };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for FreeWord {
    type Err = Error;

    /// Lower-case letters are generators, upper-case their inverses; `e` or
    /// the empty string is the identity.
    fn from_str(s: &str) -> Result<Self> {
        if s == "e" {
            return Ok(Self::identity());
        }
        let mut w = Self::identity();
        for c in s.chars() {
            if !c.is_ascii_alphabetic() {
                return Err(Error::Domain(format!("invalid letter {c:?} in word {s:?}")));
            }
            let idx = (c.to_ascii_lowercase() as u8 - b'a' + 1) as i8;
            w.push(if c.is_ascii_uppercase() { -idx } else { idx });
        }
        Ok(w)
    }
}

impl Serialize for FreeWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FreeWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The marked pair of pants `<a, b>` with peripherals
/// `gamma0 = (ab)^{-1}`, `gamma1 = a`, `gamma2 = b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub kind: String,
    pub generator_count: usize,
    pub peripherals: Vec<FreeWord>,
    /// Boundary components are oriented with the surface on their right.
    pub surface_on_right: bool,
}

impl SurfaceSpec {
    pub fn pair_of_pants() -> Self {
        let a = FreeWord::generator(1, 1);
        let b = FreeWord::generator(2, 1);
        let g0 = a.concat(&b).inverse();
        let spec = Self {
            kind: "pair_of_pants".into(),
            generator_count: 2,
            peripherals: vec![g0, a, b],
            surface_on_right: true,
        };
        debug_assert!(spec.relation_holds());
        spec
    }

    /// `gamma0 gamma1 gamma2` reduces to the empty word.
    pub fn relation_holds(&self) -> bool {
        self.peripherals
            .iter()
            .fold(FreeWord::identity(), |acc, w| acc.concat(w))
            .is_empty()
    }

    pub fn peripheral(&self, i: usize) -> &FreeWord {
        &self.peripherals[i]
    }
}

/// Attracting and repelling Lagrangians of a Shilov hyperbolic element.
#[derive(Debug, Clone)]
pub struct ShilovData {
    pub attract: LagrangianFrame,
    pub repel: LagrangianFrame,
    /// Moduli of the eigenvalues on the attracting Lagrangian, descending.
    pub top_moduli: Vec<f64>,
}

impl ShilovData {
    /// The tube `Y_{repel, attract}`.
    pub fn tube(&self, tol: &ToleranceProfile) -> Result<RTube> {
        RTube::new(self.repel.clone(), self.attract.clone(), tol)
    }

    /// Frames of `h gamma h^{-1}`.
    pub fn transported(&self, h: &SymplecticElement, tol: &ToleranceProfile) -> Result<Self> {
        Ok(Self {
            attract: h.act_on_lagrangian(&self.attract, tol)?,
            repel: h.act_on_lagrangian(&self.repel, tol)?,
            top_moduli: self.top_moduli.clone(),
        })
    }

    /// Data of the inverse element.
    pub fn inverted(&self) -> Self {
        Self {
            attract: self.repel.clone(),
            repel: self.attract.clone(),
            top_moduli: self.top_moduli.clone(),
        }
    }
}

fn projector_of(q: &RealMatrix) -> RealMatrix {
    q * &q.transpose()
}

/// Dominant n-dimensional invariant subspace by orthogonal iteration.
fn dominant_subspace(g: &RealMatrix, n: usize) -> Result<RealMatrix> {
    let dim = 2 * n;
    let mut m = g.scale(1.0 / g.max_abs());
    for _ in 0..4 {
        m = &m * &m;
        let s = m.max_abs();
        if s == 0.0 || !s.is_finite() {
            break;
        }
        m = m.scale(1.0 / s);
    }
    let seed = RealMatrix::from_fn(dim, n, |r, c| ((r * 7 + c * 3 + 1) as f64).sin() + if r == c { 1.0 } else { 0.0 });
    let mut q = orthonormalize_columns(&(&m * &seed))
        .or_else(|_| orthonormalize_columns(&seed))?;
    let mut p = projector_of(&q);
    for _ in 0..20_000 {
        let q1 = orthonormalize_columns(&(g * &q))?;
        let p1 = projector_of(&q1);
        let change = p1.dist(&p);
        q = q1;
        p = p1;
        if change < 1e-15 {
            break;
        }
    }
    let gq = g * &q;
    let resid = (&gq - &(&p * &gq)).max_abs() / g.max_abs();
    if resid > 1e-10 {
        return Err(Error::Numerical(format!(
            "invariant subspace iteration stalled (residual {resid:.3e})"
        )));
    }
    Ok(q)
}

/// Attracting/repelling Lagrangians and top eigenvalue moduli.
pub fn shilov_data(g: &SymplecticElement, tol: &ToleranceProfile) -> Result<ShilovData> {
    let n = g.n();
    let eig = general_eigenvalues(g.matrix())?;
    if let Some(worst) = eig
        .iter()
        .map(|e| e.norm())
        .min_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()))
    {
        if (worst - 1.0).abs() <= tol.pd_margin.max(1e-9) {
            return Err(Error::NotShilovHyperbolic { modulus: worst });
        }
    }
    let above = eig.iter().filter(|e| e.norm() > 1.0).count();
    if above != n {
        return Err(Error::NotShilovHyperbolic {
            modulus: eig[n.min(eig.len() - 1)].norm(),
        });
    }
    let qp = dominant_subspace(g.matrix(), n)?;
    let qm = dominant_subspace(g.inverse().matrix(), n)?;
    let attract = LagrangianFrame::from_frame(&qp, tol)?;
    let repel = LagrangianFrame::from_frame(&qm, tol)?;
    if !transverse(&attract, &repel, tol) {
        return Err(Error::NotTransverse {
            margin: transversality_margin(&attract, &repel),
        });
    }
    let restricted = &(&qp.transpose() * g.matrix()) * &qp;
    let mut top: Vec<f64> = general_eigenvalues(&restricted)?.iter().map(|e| e.norm()).collect();
    top.sort_by(|a, b| b.total_cmp(a));
    if top.iter().any(|&a| a <= 1.0 + tol.pd_margin) {
        return Err(Error::NotShilovHyperbolic {
            modulus: *top.last().unwrap(),
        });
    }
    Ok(ShilovData {
        attract,
        repel,
        top_moduli: top,
    })
}

/// Translation lengths of a Shilov hyperbolic element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationLengths {
    pub vectorial: WeylVector,
    pub finsler: f64,
    pub riemannian: f64,
}

impl TranslationLengths {
    pub fn from_moduli(moduli: &[f64]) -> Self {
        let logs: Vec<f64> = moduli.iter().map(|a| a.ln()).collect();
        let mut v: Vec<f64> = logs.iter().map(|l| 2.0 * l).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        Self {
            vectorial: WeylVector(v),
            finsler: logs.iter().sum(),
            riemannian: 2.0 * logs.iter().map(|l| l * l).sum::<f64>().sqrt(),
        }
    }
}

pub fn translation_lengths(g: &SymplecticElement, tol: &ToleranceProfile) -> Result<TranslationLengths> {
    Ok(TranslationLengths::from_moduli(&shilov_data(g, tol)?.top_moduli))
}

/// A representation of the pair-of-pants group.
#[derive(Debug, Clone)]
pub struct Representation {
    n: usize,
    images: Vec<SymplecticElement>,
    inverses: Vec<SymplecticElement>,
    spec: SurfaceSpec,
    tol: ToleranceProfile,
    peripheral_data: Vec<ShilovData>,
}

impl Representation {
    /// Validates symplecticity and Shilov hyperbolicity of every peripheral.
    pub fn new(images: Vec<SymplecticElement>, spec: SurfaceSpec, tol: ToleranceProfile) -> Result<Self> {
        if images.len() != spec.generator_count {
            return Err(Error::Domain(format!(
                "expected {} generator images, got {}",
                spec.generator_count,
                images.len()
            )));
        }
        let n = images[0].n();
        for g in &images {
            crate::siegel::check_rank(n, g.n())?;
            SymplecticElement::new(g.matrix().clone(), &tol)?;
        }
        let inverses = images.iter().map(SymplecticElement::inverse).collect();
        let mut rep = Self {
            n,
            images,
            inverses,
            spec,
            tol,
            peripheral_data: Vec::new(),
        };
        let data = (0..rep.spec.peripherals.len())
            .map(|i| shilov_data(&rep.evaluate_word(rep.spec.peripheral(i)), &tol))
            .collect::<Result<Vec<_>>>()?;
        rep.peripheral_data = data;
        Ok(rep)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    pub fn tolerances(&self) -> &ToleranceProfile {
        &self.tol
    }

    pub fn images(&self) -> &[SymplecticElement] {
        &self.images
    }

    /// Image of a single letter.
    pub fn letter(&self, l: i8) -> &SymplecticElement {
        let i = (l.unsigned_abs() - 1) as usize;
        if l > 0 {
            &self.images[i]
        } else {
            &self.inverses[i]
        }
    }

    pub fn evaluate_word(&self, w: &FreeWord) -> SymplecticElement {
        w.letters()
            .iter()
            .fold(SymplecticElement::identity(self.n), |acc, &l| acc.compose(self.letter(l)))
    }

    pub fn peripheral_data(&self, i: usize) -> &ShilovData {
        &self.peripheral_data[i]
    }

    pub fn peripheral_lengths(&self, i: usize) -> TranslationLengths {
        TranslationLengths::from_moduli(&self.peripheral_data[i].top_moduli)
    }

    /// For each ordered pair of distinct peripherals `(g, d)`, the tuple
    /// `(g^-, d^+, d^-, g^+)` is maximal; the attracting triple is maximal.
    pub fn peripheral_orientation_ok(&self) -> Result<bool> {
        let k = self.peripheral_data.len();
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let (g, d) = (&self.peripheral_data[i], &self.peripheral_data[j]);
                let tuple = [g.repel.clone(), d.attract.clone(), d.repel.clone(), g.attract.clone()];
                if !is_maximal_tuple(&tuple, &self.tol)? {
                    return Ok(false);
                }
            }
        }
        if k == 3 {
            let p = &self.peripheral_data;
            return is_maximal_triple(&p[0].attract, &p[1].attract, &p[2].attract, &self.tol);
        }
        Ok(true)
    }

    /// Rejects representations whose peripheral configuration admits no
    /// maximal orientation.
    pub fn require_maximal(self) -> Result<Self> {
        if self.peripheral_orientation_ok()? {
            Ok(self)
        } else {
            Err(Error::NotMaximal)
        }
    }
}

/// Fuchsian pair of pants with the given cuff lengths.
pub fn build_pair_of_pants_fuchsian(cuffs: [f64; 3], tol: &ToleranceProfile) -> Result<Representation> {
    if cuffs.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::Builder(format!("cuff lengths must be positive, got {cuffs:?}")));
    }
    let [l0, l1, l2] = cuffs;
    let m = (l1 / 2.0).exp();
    let p = (l2 / 2.0).exp();
    let mut last_err = None;
    for sign in [-1.0, 1.0] {
        let q = sign * 2.0 * (l0 / 2.0).cosh() - m * p - 1.0 / (m * p);
        let a = RealMatrix::from_rows(&[vec![m, 1.0], vec![0.0, 1.0 / m]])?;
        let b = RealMatrix::from_rows(&[vec![p, 0.0], vec![q, 1.0 / p]])?;
        let images = vec![SymplecticElement::new(a, tol)?, SymplecticElement::new(b, tol)?];
        match Representation::new(images, SurfaceSpec::pair_of_pants(), *tol) {
            Ok(rep) => match rep.peripheral_orientation_ok() {
                Ok(true) => return Ok(rep),
                Ok(false) => last_err = Some(Error::NotMaximal),
                Err(e) => last_err = Some(e),
            },
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Builder(format!(
        "no trace sign gives a maximal configuration for cuffs {cuffs:?}: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// `g(L, eps) = log((e^{(L-eps)/2} + 1)/(e^{(L-eps)/2} - 1))`.
pub fn target_ortho_length(big_l: f64, eps: f64) -> f64 {
    2.0 * arccoth_exp((big_l - eps) / 2.0)
}

/// Cuffs `(L, l_i, L)` of a pair of pants in which the orthogeodesic
/// between the first two cuffs has length `g(L, eps)`.
pub fn solve_cuff_for_target_ortho(big_l: f64, eps: f64) -> Result<[f64; 3]> {
    if !(big_l > 0.0 && eps > 0.0 && eps < big_l && big_l.is_finite()) {
        return Err(Error::Builder(format!(
            "need 0 < eps < L, got L = {big_l}, eps = {eps}"
        )));
    }
    let g = target_ortho_length(big_l, eps);
    let cg = g.cosh();
    let (sh, ch) = ((big_l / 2.0).sinh(), (big_l / 2.0).cosh());
    if !cg.is_finite() {
        return Err(Error::Builder(format!(
            "target orthogeodesic length overflows for L = {big_l}, eps = {eps}"
        )));
    }
    // cosh y = sinh(L/2) cosh g sinh x - cosh(L/2) cosh x with y = L/2.
    let f = |x: f64| sh * cg * x.sinh() - ch * (x.cosh() + 1.0);
    let mut hi = 1.0;
    let mut tries = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 60 || !f(hi).is_finite() {
            return Err(Error::Builder(format!(
                "no bracket for L = {big_l}, eps = {eps}"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Builder(format!("degenerate cuff for L = {big_l}, eps = {eps}")));
    }
    Ok([big_l, 2.0 * x, big_l])
}

/// `Delta(rho0) * diag(X, X)` per generator, `X` orthogonal.
pub fn diagonal_embed(
    rho0: &Representation,
    n: usize,
    twists: Option<&[RealMatrix]>,
    tol: &ToleranceProfile,
) -> Result<Representation> {
    if rho0.n() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            found: rho0.n(),
        });
    }
    if n == 0 {
        return Err(Error::UnsupportedRank(0));
    }
    let k = rho0.images().len();
    if let Some(tw) = twists {
        if tw.len() != k {
            return Err(Error::Domain(format!("expected {k} twist matrices, got {}", tw.len())));
        }
    }
    let mut images = Vec::with_capacity(k);
    for (i, g) in rho0.images().iter().enumerate() {
        let m = g.matrix();
        let base = SymplecticElement::from_sl2_blocks(&vec![[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]; n]);
        let img = match twists {
            Some(tw) => {
                let x = &tw[i];
                if x.rows() != n || x.cols() != n {
                    return Err(Error::Domain(format!("twist {i} must be {n}x{n}")));
                }
                let orth = (&x.transpose() * x).dist(&RealMatrix::identity(n));
                if orth > tol.residual_abs.max(1e-9) * 10.0 {
                    return Err(Error::Domain(format!(
                        "twist {i} is not orthogonal (residual {orth:.3e})"
                    )));
                }
                let mut d = RealMatrix::zeros(2 * n, 2 * n);
                d.set_block(0, 0, x);
                d.set_block(n, n, x);
                SymplecticElement::new(base.matrix() * &d, tol)?
            }
            None => base,
        };
        images.push(img);
    }
    Representation::new(images, rho0.spec().clone(), *tol)
}

/// `diag(rho_1, ..., rho_n)` in the interleaved block convention.
pub fn product_of_fuchsians(factors: &[Representation], tol: &ToleranceProfile) -> Result<Representation> {
    let first = factors
        .first()
        .ok_or_else(|| Error::Domain("product needs at least one factor".into()))?;
    for f in factors {
        if f.n() != 1 {
            return Err(Error::RankMismatch { expected: 1, found: f.n() });
        }
        if f.spec() != first.spec() {
            return Err(Error::Domain("factors have different surface specs".into()));
        }
    }
    let k = first.images().len();
    let images = (0..k)
        .map(|i| {
            let blocks: Vec<[f64; 4]> = factors
                .iter()
                .map(|f| {
                    let m = f.images()[i].matrix();
                    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
                })
                .collect();
            SymplecticElement::from_sl2_blocks(&blocks)
        })
        .collect();
    Representation::new(images, first.spec().clone(), *tol)
}

/// Images of the generators of the doubled group.
#[derive(Debug, Clone)]
pub struct HolomorphicDouble {
    /// Index of the peripheral `c0` whose tube involution is `sigma_rho`.
    pub base: usize,
    pub sigma: RealMatrix,
    /// `j0(a), j0(b)`.
    pub j0: Vec<SymplecticElement>,
    /// `j1(a), j1(b)`.
    pub j1: Vec<SymplecticElement>,
    /// `(i, x_i)` for the remaining peripherals.
    pub x: Vec<(usize, SymplecticElement)>,
    /// `(relation, max-abs residual)`.
    pub relation_residuals: Vec<(String, f64)>,
}

impl HolomorphicDouble {
    /// `j1(w) = sigma rho(w) sigma`.
    pub fn j1_word(&self, rho: &Representation, w: &FreeWord) -> SymplecticElement {
        let g = rho.evaluate_word(w);
        SymplecticElement::from_trusted(&(&self.sigma * g.matrix()) * &self.sigma)
    }

    pub fn worst_residual(&self) -> f64 {
        self.relation_residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

/// Involution of the tube of a Shilov hyperbolic element.
pub fn peripheral_involution(data: &ShilovData, tol: &ToleranceProfile) -> Result<RealMatrix> {
    involution_matrix(&data.tube(tol)?, tol)
}

/// Builds the holomorphic double with `c0` the peripheral `base`.
pub fn double_representation(rho: &Representation, base: usize) -> Result<HolomorphicDouble> {
    let tol = *rho.tolerances();
    let k = rho.spec().peripherals.len();
    if base >= k {
        return Err(Error::Domain(format!("boundary index {base} out of range")));
    }
    let sigma = peripheral_involution(rho.peripheral_data(base), &tol)?;
    let conj = |g: &RealMatrix| SymplecticElement::from_trusted(&(&sigma * g) * &sigma);
    let j0: Vec<SymplecticElement> = rho.images().to_vec();
    let j1: Vec<SymplecticElement> = rho.images().iter().map(|g| conj(g.matrix())).collect();
    let mut x = Vec::new();
    for i in (0..k).filter(|&i| i != base) {
        let si = peripheral_involution(rho.peripheral_data(i), &tol)?;
        x.push((i, SymplecticElement::from_trusted(&si * &sigma)));
    }
    let n2 = 2 * rho.n();
    let id = RealMatrix::identity(n2);
    let scale = |m: &RealMatrix| m.max_abs().max(1.0);
    let mut residuals = Vec::new();
    let c0 = rho.spec().peripheral(base);
    let rc0 = rho.evaluate_word(c0);
    let j1c0 = conj(rc0.matrix());
    let rel = rc0.matrix() * j1c0.inverse().matrix();
    residuals.push((format!("j0({c0}) j1({c0})^-1"), rel.dist(&id) / scale(rc0.matrix())));
    for (i, xi) in &x {
        let gi = rho.spec().peripheral(*i);
        let r = rho.evaluate_word(gi);
        let j1g = conj(r.matrix());
        let rel = &(&(r.inverse().matrix() * xi.matrix()) * j1g.matrix()) * xi.inverse().matrix();
        residuals.push((
            format!("j0({gi})^-1 x{i} j1({gi}) x{i}^-1"),
            rel.dist(&id) / scale(r.matrix()).powi(2),
        ));
    }
    for (name, r) in &residuals {
        if *r > 1e-7 {
            return Err(Error::DoubleRelation {
                relation: name.clone(),
                residual: *r,
            });
        }
    }
    Ok(HolomorphicDouble {
        base,
        sigma,
        j0,
        j1,
        x,
        relation_residuals: residuals,
    })
}

/// Image of the doubled arc of an orthotube from the base peripheral to the
/// peripheral conjugate with fixed data `delta`: `sigma_delta sigma_rho`.
pub fn doubled_ortho_element(
    double: &HolomorphicDouble,
    delta: &ShilovData,
    tol: &ToleranceProfile,
) -> Result<SymplecticElement> {
    let sd = peripheral_involution(delta, tol)?;
    let g = SymplecticElement::from_trusted(&sd * &double.sigma);
    shilov_data(&g, tol)?;
    Ok(g)
}

/// Collar width `sqrt(n) arccoth(exp(l_R / (2 sqrt n)))`.
pub fn corollary_width(ell_r: f64, n: usize) -> Result<f64> {
    if !(ell_r > 0.0 && ell_r.is_finite()) || n == 0 {
        return Err(Error::Domain(format!("width needs l_R > 0 and n >= 1, got {ell_r}, {n}")));
    }
    let sn = (n as f64).sqrt();
    Ok(sn * arccoth_exp(ell_r / (2.0 * sn)))
}
