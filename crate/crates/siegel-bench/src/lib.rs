//! Deterministic inputs for the kernel benchmarks.

use siegel::linalg::{RealMatrix, ToleranceProfile};
use siegel::siegel::LagrangianFrame;
use siegel::surface::{build_pair_of_pants_fuchsian, diagonal_embed, Representation};

/// Symmetric `n x n` matrix with entries `1 / (1 + |i - j|) + (i == j) n`.
pub fn symmetric(n: usize) -> RealMatrix {
    let data = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let diag = if i == j { n as f64 } else { 0.0 };
            1.0 / (1.0 + i.abs_diff(j) as f64) + diag
        })
        .collect();
    RealMatrix::new(n, n, data).expect("square data")
}

/// Four Lagrangians with charts `Z_k = k (S + Id)`, a maximal tuple.
pub fn maximal_quadruple(n: usize, tol: &ToleranceProfile) -> [LagrangianFrame; 4] {
    let step = &symmetric(n) + &RealMatrix::identity(n);
    std::array::from_fn(|k| LagrangianFrame::from_chart(&step.scale(k as f64 - 1.5), tol).expect("chart"))
}

/// Cuffs `(2, 2, 2)` embedded diagonally in rank `n`.
pub fn diagonal_pants(n: usize, tol: &ToleranceProfile) -> Representation {
    let rho = build_pair_of_pants_fuchsian([2.0, 2.0, 2.0], tol).expect("fuchsian");
    if n == 1 {
        rho
    } else {
        diagonal_embed(&rho, n, None, tol).expect("diagonal")
    }
}
