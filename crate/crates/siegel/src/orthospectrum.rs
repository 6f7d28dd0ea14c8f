//! Orthotubes of a peripheral element, their lengths, the θ-coordinate along
//! the peripheral tube, the truncated orthospectrum and the verifiers for
//! the Basmajian-type identities and inequalities.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    generalized_sym_eigenvalues, is_positive_definite, log_det_pd, sym_apply, sym_sqrt, RealMatrix,
    ToleranceProfile,
};
use crate::siegel::{
    cross_ratio, is_maximal_tuple, standardize_pair, vectorial_distance, LagrangianFrame,
    SymplecticElement, WeylVector,
};
use crate::special::{arccoth, logcoth};
use crate::surface::{
    build_pair_of_pants_fuchsian, double_representation, doubled_ortho_element,
    product_of_fuchsians, solve_cuff_for_target_ortho, target_ortho_length, translation_lengths,
    FreeWord, Representation, ShilovData, TranslationLengths,
};
use crate::tubes::{intersect_tubes, tubes_orthogonal, RTube};

/// Records whose θ-intervals agree to this resolution have their
/// Lagrangians compared.
pub const THETA_KEY_RESOLUTION: f64 = 1e-6;

fn orient_for(g: &ShilovData, d: &ShilovData, tol: &ToleranceProfile) -> Result<ShilovData> {
    for cand in [d.clone(), d.inverted()] {
        let tuple = [g.repel.clone(), cand.attract.clone(), cand.repel.clone(), g.attract.clone()];
        if is_maximal_tuple(&tuple, tol)? {
            return Ok(cand);
        }
    }
    Err(Error::Domain(
        "peripheral fixed Lagrangians admit no maximal orientation".into(),
    ))
}

fn same_peripheral(g: &ShilovData, d: &ShilovData) -> bool {
    let close = |a: &LagrangianFrame, b: &LagrangianFrame| a.distance(b) < 1e-9;
    (close(&g.attract, &d.attract) && close(&g.repel, &d.repel))
        || (close(&g.attract, &d.repel) && close(&g.repel, &d.attract))
}

/// The orthotube between the tubes of `g` and `d`.
pub fn orthotube_for_data(g: &ShilovData, d: &ShilovData, tol: &ToleranceProfile) -> Result<RTube> {
    if same_peripheral(g, d) {
        return Err(Error::Domain("orthotube needs two distinct peripheral tubes".into()));
    }
    let d = orient_for(g, d, tol)?;
    // delta+ -> 0, delta- -> l_inf, then gamma+ -> -Id.
    let g1 = standardize_pair(&d.attract, &d.repel, tol)?;
    let p = g1.act_on_lagrangian(&g.attract, tol)?.chart_or_err()?.clone();
    let q = g1.act_on_lagrangian(&g.repel, tol)?.chart_or_err()?.clone();
    let m = sym_apply(&(-&p), tol, |v| 1.0 / v.sqrt())?;
    let g2 = SymplecticElement::from_gl(&m, tol)?;
    let lambda = (&(&m * &q) * &m).symmetrize();
    let a = sym_sqrt(&(-&lambda), tol)?;
    let back = g2.compose(&g1).inverse();
    let tube = RTube::new(
        LagrangianFrame::from_chart(&(-&a), tol)?,
        LagrangianFrame::from_chart(&a, tol)?,
        tol,
    )?;
    tube.transported(&back, tol)
}

/// Orthotube between the peripherals `gamma` and `delta` of `rho`.
pub fn orthotube_for_pair(rho: &Representation, gamma: usize, delta: usize) -> Result<RTube> {
    if gamma == delta {
        return Err(Error::Domain("orthotube needs two distinct peripherals".into()));
    }
    orthotube_for_data(rho.peripheral_data(gamma), rho.peripheral_data(delta), rho.tolerances())
}

/// `2 arccoth(sqrt(mu_i))`, descending.
pub fn ortho_lengths_from_mu(mu: &[f64]) -> Vec<f64> {
    let mut l: Vec<f64> = mu.iter().map(|&m| 2.0 * arccoth(m.sqrt())).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

/// Eigenvalues of `R(gamma-, delta+, delta-, gamma+)`, descending.
pub fn ortho_cross_ratio_eigenvalues(
    g: &ShilovData,
    d: &ShilovData,
    tol: &ToleranceProfile,
) -> Result<Vec<f64>> {
    let d = orient_for(g, d, tol)?;
    let r = cross_ratio(&g.repel, &d.attract, &d.repel, &g.attract, tol)?;
    let mut mu = Vec::with_capacity(r.rows());
    for e in crate::linalg::general_eigenvalues(&r)? {
        if e.im.abs() > 1e-7 * e.norm().max(1.0) {
            return Err(Error::Numerical(format!("cross-ratio eigenvalue {e} is not real")));
        }
        mu.push(e.re);
    }
    mu.sort_by(|a, b| b.total_cmp(a));
    if let Some(&m) = mu.last() {
        if m <= 1.0 + tol.pd_margin {
            return Err(Error::Numerical(format!(
                "degenerate orthotube: cross-ratio eigenvalue {m} <= 1"
            )));
        }
    }
    Ok(mu)
}

/// Vectorial length of the orthotube, cross-checked against the vectorial
/// distance between its feet on the two peripheral tubes.
pub fn orthotube_lengths_for_data(g: &ShilovData, d: &ShilovData, tol: &ToleranceProfile) -> Result<WeylVector> {
    let mu = ortho_cross_ratio_eigenvalues(g, d, tol)?;
    let ell = WeylVector(ortho_lengths_from_mu(&mu));
    let ortho = orthotube_for_data(g, d, tol)?;
    let foot_g = intersect_tubes(&ortho, &g.tube(tol)?, tol)?;
    let foot_d = intersect_tubes(&ortho, &d.tube(tol)?, tol)?;
    let direct = vectorial_distance(&foot_g, &foot_d, tol)?;
    let diff = direct.max_diff(&ell);
    if diff > 1e-6 * ell.components().iter().fold(1.0f64, |a, &b| a.max(b)) {
        return Err(Error::Numerical(format!(
            "orthotube length cross-check failed (difference {diff:.3e})"
        )));
    }
    Ok(ell)
}

pub fn orthotube_lengths(rho: &Representation, gamma: usize, delta: usize) -> Result<WeylVector> {
    if gamma == delta {
        return Err(Error::Domain("orthotube needs two distinct peripherals".into()));
    }
    orthotube_lengths_for_data(rho.peripheral_data(gamma), rho.peripheral_data(delta), rho.tolerances())
}

/// θ-coordinate of `l` along the tube of `gamma`, normalized so that the
/// basepoint sits at 0.
pub fn theta_coordinate(
    gamma: &ShilovData,
    l: &LagrangianFrame,
    basepoint: &LagrangianFrame,
    tol: &ToleranceProfile,
) -> Result<f64> {
    let g = standardize_pair(&gamma.repel, &gamma.attract, tol)?;
    let chart = |x: &LagrangianFrame| -> Result<f64> {
        let c = g
            .act_on_lagrangian(x, tol)?
            .chart()
            .cloned()
            .ok_or_else(|| Error::Domain("Lagrangian is an endpoint of the tube".into()))?;
        if !is_positive_definite(&c, tol) {
            return Err(Error::Domain("Lagrangian is outside the interval ((gamma-, gamma+))".into()));
        }
        Ok(log_det_pd(&c, tol)?)
    };
    Ok(0.5 * (chart(l)? - chart(basepoint)?))
}

/// One orthotube of the peripheral `gamma`, as a `<gamma>`-class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthotubeRecord {
    /// Peripheral element `delta`, reduced so that θ⁺ lies in the window.
    pub delta_word: FreeWord,
    /// Index of the peripheral `delta` is conjugate to.
    pub peripheral: usize,
    /// Shortest conjugator length among the words producing this record.
    pub found_depth: usize,
    /// Orthonormal frames of `(delta+, delta-)`.
    pub delta_pair: [RealMatrix; 2],
    pub theta_plus: f64,
    pub theta_minus: f64,
    /// Eigenvalues of `R(gamma-, delta+, delta-, gamma+)`, descending.
    pub mu: Vec<f64>,
    pub ell_vect: WeylVector,
    pub ell_f: f64,
    pub ell_r: f64,
    pub df_term: f64,
    pub lower_term: f64,
    pub upper_term: f64,
    /// `d^R` between the projections of `delta+` and `delta-`.
    pub dr_term: f64,
    pub riemannian_lower: f64,
    pub riemannian_upper: f64,
    /// `log det R(gamma-, delta+, delta-, gamma+)` from the frames.
    pub b_term: f64,
    /// `delta` is conjugate to `gamma` itself.
    pub self_ortho: bool,
}

impl OrthotubeRecord {
    pub fn delta_lagrangians(&self, tol: &ToleranceProfile) -> Result<(LagrangianFrame, LagrangianFrame)> {
        Ok((
            LagrangianFrame::from_frame(&self.delta_pair[0], tol)?,
            LagrangianFrame::from_frame(&self.delta_pair[1], tol)?,
        ))
    }

    pub fn delta_data(&self, tol: &ToleranceProfile) -> Result<ShilovData> {
        let (attract, repel) = self.delta_lagrangians(tol)?;
        Ok(ShilovData {
            attract,
            repel,
            top_moduli: Vec::new(),
        })
    }
}

/// Partial sums of the per-record terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialSums {
    pub identity: f64,
    pub lower: f64,
    pub upper: f64,
    pub riemannian_lower: f64,
    pub riemannian_upper: f64,
    pub b: f64,
}

impl PartialSums {
    fn add(&mut self, r: &OrthotubeRecord) {
        self.identity += r.df_term;
        self.lower += r.lower_term;
        self.upper += r.upper_term;
        self.riemannian_lower += r.riemannian_lower;
        self.riemannian_upper += r.riemannian_upper;
        self.b += r.b_term;
    }
}

/// Partial sums over the records found with conjugators of length `<= depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSums {
    pub depth: usize,
    pub records: usize,
    pub sums: PartialSums,
}

/// Candidate bookkeeping of one enumeration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub words: usize,
    pub candidates: usize,
    /// Candidates whose fixed Lagrangians admit no maximal orientation.
    pub rejected: usize,
    /// Candidates whose cross-ratio has an eigenvalue `<= 1` in floating point.
    pub degenerate: usize,
    pub merged: usize,
    /// Adjacent distinct records whose θ-intervals agree to
    /// `THETA_KEY_RESOLUTION`.
    pub near_collisions: usize,
}

/// Truncated orthospectrum of one boundary component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub gamma_word: FreeWord,
    pub boundary: usize,
    pub n: usize,
    pub depth: usize,
    pub ell_f: f64,
    pub ell_r: f64,
    pub ell_vect: WeylVector,
    pub records: Vec<OrthotubeRecord>,
    pub sums: PartialSums,
    pub sums_by_depth: Vec<DepthSums>,
    /// `ell^F(gamma) - sum dF_term`.
    pub residual: f64,
    pub self_ortho_records: usize,
    pub stats: EnumerationStats,
}

/// `gamma` in the chart sending `gamma- -> 0`, `gamma+ -> l_inf`, where it acts
/// as `Z -> A Z A^T`.
struct GammaFrame {
    n: usize,
    boundary: usize,
    word: FreeWord,
    g: SymplecticElement,
    g_inv: SymplecticElement,
    ell_f: f64,
    base_logdet: f64,
}

impl GammaFrame {
    fn new(rho: &Representation, boundary: usize) -> Result<Self> {
        let tol = rho.tolerances();
        let n = rho.n();
        let data = rho.peripheral_data(boundary);
        let g = standardize_pair(&data.repel, &data.attract, tol)?;
        let word = rho.spec().peripheral(boundary).clone();
        let conj = g.compose(&rho.evaluate_word(&word)).compose(&g.inverse());
        let (_, _, c, _) = conj.blocks();
        let scale = conj.matrix().max_abs();
        if c.max_abs() > 1e-8 * scale {
            return Err(Error::Numerical(format!(
                "peripheral is not block triangular in its own chart ({:.3e})",
                c.max_abs() / scale
            )));
        }
        let ell_f: f64 = data.top_moduli.iter().map(|m| m.ln()).sum();
        let other = (boundary + 1) % rho.spec().peripherals.len();
        let base = g
            .act_on_lagrangian(&rho.peripheral_data(other).attract, tol)?
            .chart_or_err()?
            .clone();
        let base_logdet = log_det_pd(&base, tol).map_err(|_| {
            Error::Domain("basepoint is outside the interval ((gamma-, gamma+))".into())
        })?;
        Ok(Self {
            n,
            boundary,
            word,
            g_inv: g.inverse(),
            g,
            ell_f,
            base_logdet,
        })
    }

    /// Chart of a frame in the normalized position.
    fn chart(&self, f: &RealMatrix, tol: &ToleranceProfile) -> Option<RealMatrix> {
        let h = self.g.matrix() * f;
        let n = self.n;
        let top = h.block(0, 0, n, n);
        let bottom = h.block(n, 0, n, n);
        let inv = bottom.inverse_checked(tol.condition_cap).ok()?;
        let z = (&top * &inv).symmetrize();
        z.all_finite().then_some(z)
    }

    fn theta(&self, chart: &RealMatrix, tol: &ToleranceProfile) -> Option<f64> {
        log_det_pd(chart, tol).ok().map(|l| 0.5 * (l - self.base_logdet))
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    depth: usize,
    word: FreeWord,
    peripheral: usize,
    /// `v` with `word = v c^{±1} v^{-1}`, no trailing power of `c`.
    conj: FreeWord,
    /// `word` is conjugate to `c^{-1}`.
    flip: bool,
}

impl Candidate {
    fn priority(&self) -> (usize, usize, &[i8]) {
        (self.depth, self.conj.len(), self.conj.letters())
    }

    fn better_than(&self, other: &Self) -> bool {
        self.priority() < other.priority()
    }

    /// Replaces `delta` by `gamma^{-k} delta gamma^k`.
    fn shift(&mut self, k: i64, gamma: &FreeWord, periph: &FreeWord) {
        let gk = gamma.pow(k);
        let gk_inv = gk.inverse();
        self.word = gk_inv.concat(&self.word).concat(&gk);
        self.conj = strip_suffix_powers(gk_inv.concat(&self.conj), periph);
    }
}

fn strip_suffix_powers(mut conj: FreeWord, periph: &FreeWord) -> FreeWord {
    let p_inv = periph.inverse();
    loop {
        let a = conj.concat(&p_inv);
        if a.len() + periph.len() == conj.len() {
            conj = a;
            continue;
        }
        let b = conj.concat(periph);
        if b.len() + periph.len() == conj.len() {
            conj = b;
            continue;
        }
        return conj;
    }
}

#[derive(Default)]
struct Accumulator {
    best: BTreeMap<FreeWord, Candidate>,
    stats: EnumerationStats,
}

impl Accumulator {
    fn insert(&mut self, c: Candidate) {
        match self.best.get(&c.word) {
            Some(old) => {
                self.stats.merged += 1;
                if c.better_than(old) {
                    self.best.insert(c.word.clone(), c);
                }
            }
            None => {
                self.best.insert(c.word.clone(), c);
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.stats.words += other.stats.words;
        self.stats.candidates += other.stats.candidates;
        self.stats.rejected += other.stats.rejected;
        self.stats.degenerate += other.stats.degenerate;
        self.stats.merged += other.stats.merged;
        for (_, c) in other.best {
            self.insert(c);
        }
        self
    }
}

struct Enumerator<'a> {
    rho: &'a Representation,
    frame: GammaFrame,
    depth: usize,
    tol: ToleranceProfile,
}

impl Enumerator<'_> {
    /// Screens `w c w^{-1}` for every peripheral `c`: orientation and a
    /// first reduction into the window from the transported frames.
    fn evaluate(&self, w: &FreeWord, frames: &[RealMatrix], acc: &mut Accumulator) {
        acc.stats.words += 1;
        let tol = &self.tol;
        for (c, pair) in frames.chunks(2).enumerate() {
            let periph = self.rho.spec().peripheral(c);
            let word = w.conjugate(periph);
            if c == self.frame.boundary && word == self.frame.word {
                continue;
            }
            acc.stats.candidates += 1;
            let (Some(mut dp), Some(mut dm)) =
                (self.frame.chart(&pair[0], tol), self.frame.chart(&pair[1], tol))
            else {
                acc.stats.rejected += 1;
                continue;
            };
            if !is_positive_definite(&dp, tol) || !is_positive_definite(&dm, tol) {
                acc.stats.rejected += 1;
                continue;
            }
            let Ok(mu) = generalized_sym_eigenvalues(&dm, &dp, tol) else {
                acc.stats.rejected += 1;
                continue;
            };
            let flip = if mu.iter().all(|&m| m < 1.0) {
                std::mem::swap(&mut dp, &mut dm);
                true
            } else if mu.iter().all(|&m| m > 1.0) {
                false
            } else {
                acc.stats.rejected += 1;
                continue;
            };
            let Some(tp) = self.frame.theta(&dp, tol) else {
                acc.stats.rejected += 1;
                continue;
            };
            let mut cand = Candidate {
                depth: w.len(),
                word: if flip { word.inverse() } else { word },
                peripheral: c,
                conj: strip_suffix_powers(w.clone(), periph),
                flip,
            };
            let k = self.frame.window_shift(tp, tol);
            if k != 0 {
                cand.shift(k, &self.frame.word, periph);
            }
            acc.insert(cand);
        }
    }

    fn walk(&self, letters: &mut Vec<i8>, frames: &[RealMatrix], acc: &mut Accumulator) -> Result<()> {
        let w = FreeWord::new(letters.iter().copied());
        self.evaluate(&w, frames, acc);
        if letters.len() >= self.depth {
            return Ok(());
        }
        let gens = self.rho.images().len() as i8;
        for s in (1..=gens).flat_map(|g| [g, -g]) {
            if letters.first() == Some(&-s) {
                continue;
            }
            let next = self.extend(s, frames)?;
            letters.insert(0, s);
            let r = self.walk(letters, &next, acc);
            letters.remove(0);
            r?;
        }
        Ok(())
    }

    fn extend(&self, s: i8, frames: &[RealMatrix]) -> Result<Vec<RealMatrix>> {
        let m = self.rho.letter(s).matrix();
        frames
            .iter()
            .map(|f| Ok(crate::linalg::orthonormalize_columns(&(m * f))?))
            .collect()
    }

    fn run(&self) -> Result<Accumulator> {
        let base: Vec<RealMatrix> = (0..self.rho.spec().peripherals.len())
            .flat_map(|c| {
                let d = self.rho.peripheral_data(c);
                [d.attract.frame().clone(), d.repel.frame().clone()]
            })
            .collect();
        // Words shorter than `split` are evaluated here; longer ones are
        // walked in parallel from the seeds of length exactly `split`.
        let split = self.depth.min(2);
        let gens = self.rho.images().len() as i8;
        let mut seeds: Vec<(Vec<i8>, Vec<RealMatrix>)> = vec![(Vec::new(), base)];
        let mut acc = Accumulator::default();
        for _ in 0..split {
            let mut next = Vec::new();
            for (letters, frames) in &seeds {
                self.evaluate(&FreeWord::new(letters.iter().copied()), frames, &mut acc);
                for s in (1..=gens).flat_map(|g| [g, -g]) {
                    if letters.first() == Some(&-s) {
                        continue;
                    }
                    let mut l = letters.clone();
                    l.insert(0, s);
                    next.push((l, self.extend(s, frames)?));
                }
            }
            seeds = next;
        }
        let parts: Vec<Result<Accumulator>> = seeds
            .into_par_iter()
            .map(|(mut letters, frames)| {
                let mut a = Accumulator::default();
                self.walk(&mut letters, &frames, &mut a)?;
                Ok(a)
            })
            .collect();
        for p in parts {
            acc = acc.merge(p?);
        }
        Ok(acc)
    }

    /// Frames of `delta+`, `delta-` from the short conjugator, reduced into
    /// the window; returns the normalized charts and θ-values.
    fn resolve(&self, c: &mut Candidate) -> Result<(RealMatrix, RealMatrix, f64, f64)> {
        let tol = &self.tol;
        let periph = self.rho.spec().peripheral(c.peripheral).clone();
        for _ in 0..4 {
            let base = self.rho.peripheral_data(c.peripheral);
            let (fp, fm) = if c.flip {
                (base.repel.frame(), base.attract.frame())
            } else {
                (base.attract.frame(), base.repel.frame())
            };
            let lost = || Error::Numerical(format!("record {} left the interval ((gamma-, gamma+))", c.word));
            let dp = self.frame.chart(&transport_frame(self.rho, &c.conj, fp)?, tol).ok_or_else(lost)?;
            let dm = self.frame.chart(&transport_frame(self.rho, &c.conj, fm)?, tol).ok_or_else(lost)?;
            let tp = self.frame.theta(&dp, tol).ok_or_else(lost)?;
            let tm = self.frame.theta(&dm, tol).ok_or_else(lost)?;
            let k = self.frame.window_shift(tp, tol);
            if k == 0 {
                return Ok((dp, dm, tp, tm));
            }
            c.shift(k, &self.frame.word, &periph);
        }
        Err(Error::Numerical(format!("record {} does not settle in the window", c.word)))
    }
}

impl GammaFrame {
    /// `k` with `theta - k ell^F` in `[-compare_rel, ell^F - compare_rel)`.
    fn window_shift(&self, theta: f64, tol: &ToleranceProfile) -> i64 {
        ((theta + tol.compare_rel) / self.ell_f).floor() as i64
    }
}

fn transport_frame(rho: &Representation, v: &FreeWord, f: &RealMatrix) -> Result<RealMatrix> {
    let mut out = f.clone();
    for &l in v.letters().iter().rev() {
        out = crate::linalg::orthonormalize_columns(&(rho.letter(l).matrix() * &out))?;
    }
    Ok(out)
}

fn build_record(en: &Enumerator<'_>, mut c: Candidate) -> Result<Option<OrthotubeRecord>> {
    let tol = &en.tol;
    let frame = &en.frame;
    let gamma_data = en.rho.peripheral_data(frame.boundary);
    let (dplus, dminus, theta_plus, theta_minus) = en.resolve(&mut c)?;
    let n = frame.n;
    let nf = n as f64;
    let mu = generalized_sym_eigenvalues(&dminus, &dplus, tol)?;
    if mu.iter().any(|&m| m <= 1.0) {
        return Ok(None);
    }
    let ell = ortho_lengths_from_mu(&mu);
    let ell_vect = WeylVector(ell.clone());
    let ell_f = 0.5 * ell.iter().sum::<f64>();
    let ell_r = ell.iter().map(|v| v * v).sum::<f64>().sqrt();
    let logs: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
    let df_term = 0.5 * logs.iter().sum::<f64>();
    let smallest = *ell.last().expect("n >= 1");
    let upper_term = nf * logcoth(smallest / 2.0);
    let lower_term = nf * logcoth(ell_f / nf);
    let sn = nf.sqrt();
    let riemannian_lower = 2.0 * sn * logcoth(ell_r / (2.0 * sn));
    let riemannian_upper = 2.0 * sn * logcoth(smallest / 2.0);
    let dr_term = logs.iter().map(|l| l * l).sum::<f64>().sqrt();
    let plus = frame
        .g_inv
        .act_on_lagrangian(&LagrangianFrame::from_chart(&dplus, tol)?, tol)?;
    let minus = frame
        .g_inv
        .act_on_lagrangian(&LagrangianFrame::from_chart(&dminus, tol)?, tol)?;
    let r = cross_ratio(&gamma_data.repel, &plus, &minus, &gamma_data.attract, tol)?;
    let det = r.det();
    if det.is_nan() || det <= 0.0 {
        return Err(Error::Numerical(format!("cross-ratio determinant {det} is not positive")));
    }
    Ok(Some(OrthotubeRecord {
        self_ortho: c.peripheral == frame.boundary,
        delta_word: c.word,
        peripheral: c.peripheral,
        found_depth: c.depth,
        delta_pair: [plus.frame().clone(), minus.frame().clone()],
        theta_plus,
        theta_minus,
        mu,
        ell_vect,
        ell_f,
        ell_r,
        df_term,
        lower_term,
        upper_term,
        dr_term,
        riemannian_lower,
        riemannian_upper,
        b_term: det.ln(),
    }))
}

/// Adjacent records whose θ-keys coincide at `THETA_KEY_RESOLUTION`.
fn count_near_collisions(records: &[OrthotubeRecord]) -> usize {
    records
        .windows(2)
        .filter(|w| {
            (w[1].theta_plus - w[0].theta_plus).abs() <= THETA_KEY_RESOLUTION
                && (w[1].theta_minus - w[0].theta_minus).abs() <= THETA_KEY_RESOLUTION
        })
        .count()
}

/// Orthotubes of the peripheral `boundary` reached by conjugators of length
/// `<= depth`, one per `<gamma>`-class, sorted by θ⁺.
pub fn enumerate_orthotubes(
    rho: &Representation,
    boundary: usize,
    depth: usize,
) -> Result<(Vec<OrthotubeRecord>, EnumerationStats)> {
    if boundary >= rho.spec().peripherals.len() {
        return Err(Error::Domain(format!("boundary index {boundary} out of range")));
    }
    let en = Enumerator {
        rho,
        frame: GammaFrame::new(rho, boundary)?,
        depth,
        tol: *rho.tolerances(),
    };
    let acc = en.run()?;
    let mut stats = acc.stats;
    let built: Vec<Result<Option<OrthotubeRecord>>> = acc
        .best
        .into_values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|c| build_record(&en, c))
        .collect();
    let mut by_word: BTreeMap<FreeWord, OrthotubeRecord> = BTreeMap::new();
    for b in built {
        let Some(r) = b? else {
            stats.degenerate += 1;
            continue;
        };
        match by_word.get_mut(&r.delta_word) {
            Some(old) => {
                let far = (0..2).any(|i| old.delta_pair[i].dist(&r.delta_pair[i]) > THETA_KEY_RESOLUTION);
                if far {
                    return Err(Error::DedupAmbiguity {
                        first: old.delta_word.to_string(),
                        second: r.delta_word.to_string(),
                    });
                }
                stats.merged += 1;
                old.found_depth = old.found_depth.min(r.found_depth);
            }
            None => {
                by_word.insert(r.delta_word.clone(), r);
            }
        }
    }
    let mut records: Vec<OrthotubeRecord> = by_word.into_values().collect();
    records.sort_by(|a, b| {
        a.theta_plus
            .total_cmp(&b.theta_plus)
            .then(a.theta_minus.total_cmp(&b.theta_minus))
            .then(a.delta_word.cmp(&b.delta_word))
    });
    stats.near_collisions = count_near_collisions(&records);
    Ok((records, stats))
}

/// Enumerates and sums the per-record terms, also by found depth.
pub fn basmajian_partial_sums(rho: &Representation, boundary: usize, depth: usize) -> Result<SpectrumReport> {
    let (records, stats) = enumerate_orthotubes(rho, boundary, depth)?;
    let lengths = rho.peripheral_lengths(boundary);
    let mut sums = PartialSums::default();
    let mut sums_by_depth = Vec::with_capacity(depth + 1);
    for d in 0..=depth {
        let mut s = PartialSums::default();
        let mut count = 0;
        for r in records.iter().filter(|r| r.found_depth <= d) {
            s.add(r);
            count += 1;
        }
        sums_by_depth.push(DepthSums {
            depth: d,
            records: count,
            sums: s,
        });
    }
    for r in &records {
        sums.add(r);
    }
    Ok(SpectrumReport {
        gamma_word: rho.spec().peripheral(boundary).clone(),
        boundary,
        n: rho.n(),
        depth,
        ell_f: lengths.finsler,
        ell_r: lengths.riemannian,
        ell_vect: lengths.vectorial.clone(),
        residual: lengths.finsler - sums.identity,
        self_ortho_records: records.iter().filter(|r| r.self_ortho).count(),
        records,
        sums,
        sums_by_depth,
        stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Finsler,
    Riemannian,
}

/// Verdict of the length inequalities on one boundary component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremAReport {
    pub boundary: usize,
    pub gamma_word: FreeWord,
    pub metric: Metric,
    pub depth: usize,
    pub records: usize,
    /// `ell^F(gamma)` or `ell^R(gamma)`.
    pub ell: f64,
    pub lower_sum: f64,
    pub upper_sum: f64,
    /// `ell - lower_sum`.
    pub lower_margin: f64,
    /// Lower-bound partial sums stay below `ell` at every depth.
    pub lower_holds_every_depth: bool,
    /// Smallest slack in the per-record chain.
    pub min_chain_margin: f64,
    pub chain_holds: bool,
    /// Largest `upper - lower` over records.
    pub max_spread: f64,
    /// Largest deviation from equality in the per-record chain.
    pub max_equality_defect: f64,
    pub passed: bool,
}

/// Per-record chain for the chosen metric: returns (upper, middle, lower)
/// rescaled to the same units.
fn chain_terms(r: &OrthotubeRecord, metric: Metric, n: usize) -> [f64; 4] {
    match metric {
        Metric::Finsler => [r.upper_term, r.df_term, r.lower_term, r.lower_term],
        Metric::Riemannian => {
            let c = 2.0 / (n as f64).sqrt();
            [r.riemannian_upper, c * r.df_term, c * r.lower_term, r.riemannian_lower]
        }
    }
}

pub fn theorem_a_from_report(report: &SpectrumReport, metric: Metric, tol: &ToleranceProfile) -> TheoremAReport {
    let n = report.n;
    let ell = match metric {
        Metric::Finsler => report.ell_f,
        Metric::Riemannian => report.ell_r,
    };
    let slack = tol.compare_rel * ell.max(1.0);
    let lower_of = |s: &PartialSums| match metric {
        Metric::Finsler => s.lower,
        Metric::Riemannian => s.riemannian_lower,
    };
    let upper_of = |s: &PartialSums| match metric {
        Metric::Finsler => s.upper,
        Metric::Riemannian => s.riemannian_upper,
    };
    let lower_holds_every_depth = report
        .sums_by_depth
        .iter()
        .all(|d| lower_of(&d.sums) <= ell + slack);
    let mut min_chain_margin = f64::INFINITY;
    let mut max_spread = 0.0f64;
    let mut max_equality_defect = 0.0f64;
    for r in &report.records {
        let t = chain_terms(r, metric, n);
        let margins = [t[0] - t[1], t[1] - t[2], t[2] - t[3]];
        let m = margins.iter().copied().fold(f64::INFINITY, f64::min);
        min_chain_margin = min_chain_margin.min(m);
        max_spread = max_spread.max(t[0] - t[3]);
        max_equality_defect = max_equality_defect.max(margins.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    if report.records.is_empty() {
        min_chain_margin = 0.0;
    }
    let chain_holds = min_chain_margin >= -tol.compare_rel;
    let lower_sum = lower_of(&report.sums);
    TheoremAReport {
        boundary: report.boundary,
        gamma_word: report.gamma_word.clone(),
        metric,
        depth: report.depth,
        records: report.records.len(),
        ell,
        lower_sum,
        upper_sum: upper_of(&report.sums),
        lower_margin: ell - lower_sum,
        lower_holds_every_depth,
        min_chain_margin,
        chain_holds,
        max_spread,
        max_equality_defect,
        passed: lower_holds_every_depth && chain_holds,
    }
}

/// Checks the lower bound at every depth and the per-record chain on every
/// boundary component.
pub fn verify_theorem_a(rho: &Representation, metric: Metric, depth: usize) -> Result<Vec<TheoremAReport>> {
    (0..rho.spec().peripherals.len())
        .map(|b| {
            let rep = basmajian_partial_sums(rho, b, depth)?;
            Ok(theorem_a_from_report(&rep, metric, rho.tolerances()))
        })
        .collect()
}

/// Verdict of the cross-ratio period identity on one boundary component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremBReport {
    pub boundary: usize,
    pub gamma_word: FreeWord,
    pub depth: usize,
    pub records: usize,
    /// `log |det R(gamma-, y, gamma y, gamma+)|`.
    pub ell_b: f64,
    pub two_ell_f: f64,
    pub period_defect: f64,
    pub partial_sums: Vec<f64>,
    /// `(ell_B - partial sum) / ell_B` per depth.
    pub relative_residuals: Vec<f64>,
    pub strictly_decreasing: bool,
    /// Largest `|b_term - 2 dF_term|`.
    pub max_term_defect: f64,
    pub sum_bounded: bool,
    pub passed: bool,
}

/// `log |det R(gamma-, y, gamma y, gamma+)|` with `y` the attracting
/// Lagrangian of another peripheral.
pub fn cross_ratio_period(rho: &Representation, boundary: usize) -> Result<f64> {
    let tol = rho.tolerances();
    let data = rho.peripheral_data(boundary);
    let other = (boundary + 1) % rho.spec().peripherals.len();
    let y = rho.peripheral_data(other).attract.clone();
    let gy = rho
        .evaluate_word(rho.spec().peripheral(boundary))
        .act_on_lagrangian(&y, tol)?;
    let r = cross_ratio(&data.repel, &y, &gy, &data.attract, tol)?;
    Ok(r.det().abs().ln())
}

pub fn theorem_b_from_report(rho: &Representation, report: &SpectrumReport) -> Result<TheoremBReport> {
    let tol = rho.tolerances();
    let ell_b = cross_ratio_period(rho, report.boundary)?;
    let two_ell_f = 2.0 * report.ell_f;
    let partial_sums: Vec<f64> = report.sums_by_depth.iter().map(|d| d.sums.b).collect();
    let relative_residuals: Vec<f64> = partial_sums.iter().map(|s| (ell_b - s) / ell_b).collect();
    let strictly_decreasing = relative_residuals.windows(2).all(|w| w[1] < w[0]);
    let max_term_defect = report
        .records
        .iter()
        .map(|r| (r.b_term - 2.0 * r.df_term).abs())
        .fold(0.0, f64::max);
    let sum_bounded = partial_sums.iter().all(|s| *s <= ell_b * (1.0 + tol.compare_rel));
    let period_defect = (ell_b - two_ell_f).abs();
    Ok(TheoremBReport {
        boundary: report.boundary,
        gamma_word: report.gamma_word.clone(),
        depth: report.depth,
        records: report.records.len(),
        ell_b,
        two_ell_f,
        period_defect,
        partial_sums,
        relative_residuals,
        strictly_decreasing,
        max_term_defect,
        sum_bounded,
        passed: period_defect < 1e-8 * two_ell_f.max(1.0) && max_term_defect < 1e-8 && sum_bounded,
    })
}

pub fn verify_theorem_b(rho: &Representation, boundary: usize, depth: usize) -> Result<TheoremBReport> {
    let report = basmajian_partial_sums(rho, boundary, depth)?;
    theorem_b_from_report(rho, &report)
}

/// A designed orthogeodesic of one Fuchsian factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignedOrtho {
    pub factor: usize,
    pub cuffs: [f64; 3],
    /// Peripheral the orthogeodesic joins to `gamma0`.
    pub target: usize,
    pub length: f64,
    /// `2 logcoth(length / 2)`.
    pub two_logcoth: f64,
    /// `L - eps`.
    pub expected: f64,
}

/// Result of the product-of-Fuchsians construction with a short orthotube
/// spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    pub big_l: f64,
    pub eta: f64,
    pub eps: f64,
    pub depth: usize,
    pub ell_f: f64,
    pub ell_r: f64,
    pub expected_ell_f: f64,
    pub expected_ell_r: f64,
    pub designed: Vec<DesignedOrtho>,
    pub finsler_rhs: f64,
    pub riemannian_rhs: f64,
    pub records: usize,
    pub lengths_ok: bool,
    pub designed_ok: bool,
    pub sums_below_eta: bool,
    pub passed: bool,
}

/// Builds `n` Fuchsian factors in which `gamma0` has length `L` and a
/// prescribed short orthogeodesic, takes their product and sums the
/// right-hand sides of both length inequalities for `gamma0`.
pub fn gap_experiment(n: usize, big_l: f64, eta: f64, depth: usize, tol: &ToleranceProfile) -> Result<GapReport> {
    if n != 2 {
        return Err(Error::UnsupportedRank(n));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    let eps = eta / (n * n) as f64;
    let mut factors = Vec::with_capacity(n);
    let mut designed = Vec::with_capacity(n);
    for i in 0..n {
        let base = solve_cuff_for_target_ortho(big_l, eps)?;
        // Factor i carries the short cuff on peripheral i + 1.
        let cuffs = if i == 0 { base } else { [base[0], base[2], base[1]] };
        let f = build_pair_of_pants_fuchsian(cuffs, tol)?;
        let target = i + 1;
        let len = orthotube_lengths(&f, 0, target)?.components()[0];
        designed.push(DesignedOrtho {
            factor: i,
            cuffs,
            target,
            length: len,
            two_logcoth: 2.0 * logcoth(len / 2.0),
            expected: big_l - eps,
        });
        factors.push(f);
    }
    let rho = product_of_fuchsians(&factors, tol)?.require_maximal()?;
    let report = basmajian_partial_sums(&rho, 0, depth)?;
    let expected_ell_f = n as f64 * big_l / 2.0;
    let expected_ell_r = (n as f64).sqrt() * big_l;
    let lengths_ok = (report.ell_f - expected_ell_f).abs() < 1e-6 && (report.ell_r - expected_ell_r).abs() < 1e-6;
    let designed_ok = designed
        .iter()
        .all(|d| (d.two_logcoth - d.expected).abs() < 1e-7);
    let finsler_rhs = report.sums.lower;
    let riemannian_rhs = report.sums.riemannian_lower;
    let sums_below_eta = finsler_rhs < eta && riemannian_rhs < eta;
    Ok(GapReport {
        n,
        big_l,
        eta,
        eps,
        depth,
        ell_f: report.ell_f,
        ell_r: report.ell_r,
        expected_ell_f,
        expected_ell_r,
        designed,
        finsler_rhs,
        riemannian_rhs,
        records: report.records.len(),
        lengths_ok,
        designed_ok,
        sums_below_eta,
        passed: lengths_ok && designed_ok && sums_below_eta,
    })
}

/// Design target of the gap experiment, exposed for reporting.
pub fn gap_target_ortho(big_l: f64, eta: f64, n: usize) -> f64 {
    target_ortho_length(big_l, eta / (n * n) as f64)
}

/// Doubled orthotube of one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubledRecord {
    pub delta_word: FreeWord,
    pub two_ell_f: f64,
    pub doubled_ell_f: f64,
    pub defect: f64,
    /// Endpoints of the tube of the doubled element agree with the orthotube.
    pub tube_matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleReport {
    pub boundary: usize,
    pub n: usize,
    pub relation_residuals: Vec<(String, f64)>,
    pub entries: Vec<DoubledRecord>,
    pub max_relation_residual: f64,
    pub max_defect: f64,
    pub passed: bool,
}

/// Compares the Finsler length of the doubled element with twice the
/// Finsler length of the orthotube for the `count` shortest records.
pub fn double_check(rho: &Representation, boundary: usize, depth: usize, count: usize) -> Result<DoubleReport> {
    let tol = rho.tolerances();
    let double = double_representation(rho, boundary)?;
    let report = basmajian_partial_sums(rho, boundary, depth)?;
    let mut recs: Vec<&OrthotubeRecord> = report.records.iter().collect();
    recs.sort_by(|a, b| a.ell_f.total_cmp(&b.ell_f).then(a.theta_plus.total_cmp(&b.theta_plus)));
    let gamma = rho.peripheral_data(boundary);
    let mut entries = Vec::new();
    for r in recs.into_iter().take(count) {
        let delta = r.delta_data(tol)?;
        let elem = doubled_ortho_element(&double, &delta, tol)?;
        let lengths: TranslationLengths = translation_lengths(&elem, tol)?;
        let ortho = orthotube_for_data(gamma, &delta, tol)?;
        let sd = crate::surface::shilov_data(&elem, tol)?;
        let tube_matches = ortho.same_as(&sd.tube(tol)?, 1e-6);
        entries.push(DoubledRecord {
            delta_word: r.delta_word.clone(),
            two_ell_f: 2.0 * r.ell_f,
            doubled_ell_f: lengths.finsler,
            defect: (lengths.finsler - 2.0 * r.ell_f).abs(),
            tube_matches,
        });
    }
    let max_relation_residual = double.worst_residual();
    let max_defect = entries.iter().map(|e| e.defect).fold(0.0, f64::max);
    Ok(DoubleReport {
        boundary,
        n: rho.n(),
        relation_residuals: double.relation_residuals.clone(),
        passed: max_relation_residual < 1e-7 && max_defect < 1e-7 && entries.iter().all(|e| e.tube_matches),
        entries,
        max_relation_residual,
        max_defect,
    })
}

/// Orthogonality residuals of an orthotube against both peripheral tubes.
pub fn orthotube_is_orthogonal(g: &ShilovData, d: &ShilovData, tol: &ToleranceProfile) -> Result<bool> {
    let t = orthotube_for_data(g, d, tol)?;
    Ok(tubes_orthogonal(&t, &g.tube(tol)?, tol) && tubes_orthogonal(&t, &d.tube(tol)?, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::diagonal_embed;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn fuchsian() -> Representation {
        build_pair_of_pants_fuchsian([2.0, 2.0, 2.0], &tol()).unwrap()
    }

    fn data(attract: f64, repel: Option<f64>) -> ShilovData {
        ShilovData {
            attract: LagrangianFrame::scalar(1, attract),
            repel: repel.map_or_else(|| LagrangianFrame::infinity(1), |r| LagrangianFrame::scalar(1, r)),
            top_moduli: vec![2.0],
        }
    }

    #[test]
    fn normalized_orthotube_example() {
        let g = data(-1.0, Some(-0.25));
        let d = ShilovData {
            attract: LagrangianFrame::zero(1),
            repel: LagrangianFrame::infinity(1),
            top_moduli: vec![2.0],
        };
        let t = orthotube_for_data(&g, &d, &tol()).unwrap();
        let expect = RTube::new(LagrangianFrame::scalar(1, -0.5), LagrangianFrame::scalar(1, 0.5), &tol()).unwrap();
        assert!(t.same_as(&expect, 1e-12));
        assert!(orthotube_is_orthogonal(&g, &d, &tol()).unwrap());
        assert!(orthotube_for_data(&g, &g, &tol()).is_err());
    }

    #[test]
    fn mu_to_length() {
        let l = ortho_lengths_from_mu(&[9.0]);
        assert!((l[0] - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_mu_rejected() {
        // delta+ = delta- gives mu = 1.
        let g = data(-1.0, Some(-0.25));
        let d = ShilovData {
            attract: LagrangianFrame::zero(1),
            repel: LagrangianFrame::zero(1),
            top_moduli: vec![2.0],
        };
        assert!(ortho_cross_ratio_eigenvalues(&g, &d, &tol()).is_err());
    }

    #[test]
    fn theta_examples() {
        let g = ShilovData {
            attract: LagrangianFrame::infinity(2),
            repel: LagrangianFrame::zero(2),
            top_moduli: vec![1.0, 1.0],
        };
        let base = LagrangianFrame::scalar(2, 1.0);
        assert!(theta_coordinate(&g, &base, &base, &tol()).unwrap().abs() < 1e-15);
        let l = LagrangianFrame::scalar(2, 2f64.exp());
        assert!((theta_coordinate(&g, &l, &base, &tol()).unwrap() - 2.0).abs() < 1e-12);
        let out = LagrangianFrame::scalar(2, -1.0);
        assert!(matches!(theta_coordinate(&g, &out, &base, &tol()), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_shift_by_gamma() {
        let rho = fuchsian();
        let g = rho.peripheral_data(0);
        let base = rho.peripheral_data(1).attract.clone();
        let gb = rho
            .evaluate_word(rho.spec().peripheral(0))
            .act_on_lagrangian(&base, &tol())
            .unwrap();
        let th = theta_coordinate(g, &gb, &base, &tol()).unwrap();
        assert!((th - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fuchsian_base_orthos_match_hexagon() {
        let rho = fuchsian();
        let l = orthotube_lengths(&rho, 0, 1).unwrap();
        let c = 1f64.cosh();
        let s = 1f64.sinh();
        let hex = ((c + c * c) / (s * s)).acosh();
        assert!((l.components()[0] - hex).abs() < 1e-9);
        let sym = orthotube_lengths(&rho, 1, 0).unwrap();
        assert!(sym.max_diff(&l) < 1e-7);
    }

    #[test]
    fn depth_zero_records() {
        let rho = fuchsian();
        let (recs, _) = enumerate_orthotubes(&rho, 0, 0).unwrap();
        assert!(recs.len() >= 2);
        for r in &recs {
            assert!(r.theta_plus >= -1e-7 && r.theta_plus < r.theta_minus && r.theta_minus < 1.0 + 1e-7);
        }
    }

    #[test]
    fn depth_monotone_and_disjoint() {
        let rho = fuchsian();
        let (r3, _) = enumerate_orthotubes(&rho, 0, 3).unwrap();
        let (r4, _) = enumerate_orthotubes(&rho, 0, 4).unwrap();
        for a in &r3 {
            assert!(r4.iter().any(|b| (a.theta_plus - b.theta_plus).abs() < 1e-9
                && (a.theta_minus - b.theta_minus).abs() < 1e-9));
        }
        for w in r4.windows(2) {
            assert!(w[0].theta_minus <= w[1].theta_plus + 1e-7);
        }
        let rep = basmajian_partial_sums(&rho, 0, 4).unwrap();
        assert_eq!(rep.sums_by_depth[3].records, r3.len());
        assert!(rep.sums.identity <= rep.ell_f + 1e-7);
    }

    #[test]
    fn record_terms_consistent() {
        let rho = diagonal_embed(&fuchsian(), 2, None, &tol()).unwrap();
        let rep = basmajian_partial_sums(&rho, 0, 2).unwrap();
        for r in &rep.records {
            assert!((r.df_term - (r.theta_minus - r.theta_plus)).abs() < 1e-9);
            assert!((r.b_term - 2.0 * r.df_term).abs() < 1e-8);
            assert!((r.upper_term - r.lower_term).abs() < 1e-9);
        }
    }

    #[test]
    fn gap_rank_guard() {
        assert!(matches!(gap_experiment(1, 2.0, 0.5, 0, &tol()), Err(Error::UnsupportedRank(1))));
    }
}
