#![allow(dead_code)]

use proptest::test_runner::{Config, RngSeed};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use siegel::linalg::{orthonormalize_columns, RealMatrix, ToleranceProfile};
use siegel::siegel::{LagrangianFrame, SiegelPoint, SymplecticElement};

pub const TRIALS: u32 = 256;

pub fn config(seed: u64) -> Config {
    Config {
        cases: TRIALS,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn tol() -> ToleranceProfile {
    ToleranceProfile::default()
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut StdRng, r: usize, c: usize, lo: f64, hi: f64) -> RealMatrix {
    let data: Vec<f64> = (0..r * c).map(|_| rng.random_range(lo..hi)).collect();
    RealMatrix::new(r, c, data).unwrap()
}

pub fn sym(rng: &mut StdRng, n: usize) -> RealMatrix {
    uniform(rng, n, n, -1.0, 1.0).symmetrize()
}

/// `Q^T Q + floor Id`.
pub fn pd(rng: &mut StdRng, n: usize, floor: f64) -> RealMatrix {
    let q = uniform(rng, n, n, -1.0, 1.0);
    (&(&q.transpose() * &q) + &RealMatrix::identity(n).scale(floor)).symmetrize()
}

pub fn orthogonal(rng: &mut StdRng, n: usize) -> RealMatrix {
    loop {
        if let Ok(q) = orthonormalize_columns(&uniform(rng, n, n, -1.0, 1.0)) {
            return q;
        }
    }
}

pub fn siegel_point(rng: &mut StdRng, n: usize) -> SiegelPoint {
    SiegelPoint::new(sym(rng, n), pd(rng, n, 0.2), &tol()).unwrap()
}

/// Product of a Levi factor and two unipotents with moderate entries.
pub fn symplectic(rng: &mut StdRng, n: usize) -> SymplecticElement {
    let t = tol();
    let p = &RealMatrix::identity(n) + &uniform(rng, n, n, -0.4, 0.4);
    let levi = SymplecticElement::from_gl(&p, &t).unwrap();
    let id = RealMatrix::identity(n);
    let z = RealMatrix::zeros(n, n);
    let s1 = sym(rng, n).scale(0.7);
    let s2 = sym(rng, n).scale(0.7);
    let u = SymplecticElement::new(RealMatrix::from_blocks(&id, &s1, &z, &id), &t).unwrap();
    let l = SymplecticElement::new(RealMatrix::from_blocks(&id, &z, &s2, &id), &t).unwrap();
    levi.compose(&u).compose(&l)
}

pub fn chart(z: &RealMatrix) -> LagrangianFrame {
    LagrangianFrame::from_chart(z, &tol()).unwrap()
}

/// Charts `Z_1 < Z_2 < ... < Z_k`.
pub fn increasing_charts(rng: &mut StdRng, n: usize, k: usize) -> Vec<RealMatrix> {
    let mut out = vec![sym(rng, n)];
    for _ in 1..k {
        let next = out.last().unwrap() + &pd(rng, n, 0.3);
        out.push(next);
    }
    out
}

use siegel::surface::{
    build_pair_of_pants_fuchsian, diagonal_embed, product_of_fuchsians, FreeWord, Representation,
};

pub fn cuffs(rng: &mut StdRng) -> [f64; 3] {
    [rng.random_range(1.0..3.5), rng.random_range(1.0..3.5), rng.random_range(1.0..3.5)]
}

pub fn fuchsian(rng: &mut StdRng) -> Representation {
    build_pair_of_pants_fuchsian(cuffs(rng), &tol()).unwrap()
}

/// Fuchsian, product of two Fuchsians, or a rotated diagonal, by `kind % 3`.
pub fn representation(rng: &mut StdRng, kind: u8) -> Representation {
    let t = tol();
    match kind % 3 {
        0 => fuchsian(rng),
        1 => product_of_fuchsians(&[fuchsian(rng), fuchsian(rng)], &t).unwrap(),
        _ => {
            let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (s, c) = angle.sin_cos();
            let rot = RealMatrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
            let tw = [rot, RealMatrix::identity(2)];
            diagonal_embed(&fuchsian(rng), 2, Some(&tw), &t).unwrap()
        }
    }
}

pub fn word(rng: &mut StdRng, max_len: usize) -> FreeWord {
    let len = rng.random_range(0..=max_len);
    FreeWord::new((0..len).map(|_| [1i8, -1, 2, -2][rng.random_range(0..4)]))
}
