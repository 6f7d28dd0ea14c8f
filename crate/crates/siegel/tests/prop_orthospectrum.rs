mod common;

use common::*;
use proptest::prelude::*;
use siegel::orthospectrum::{basmajian_partial_sums, double_check, orthotube_for_data, orthotube_lengths};
use siegel::siegel::SymplecticElement;
use siegel::special::logcoth;
use siegel::surface::Representation;
use siegel::tubes::orthogonality_residual;

const DEPTH: usize = 2;

fn conjugated(rho: &Representation, h: &SymplecticElement) -> Representation {
    let hi = h.inverse();
    let images = rho.images().iter().map(|g| h.compose(g).compose(&hi)).collect();
    Representation::new(images, rho.spec().clone(), *rho.tolerances()).unwrap()
}

fn trace(g: &SymplecticElement) -> f64 {
    g.matrix().trace()
}

proptest! {
    #![proptest_config(config(0x5eed_0005))]

    #[test]
    fn sum_bound_and_term_chain(seed in any::<u64>(), kind in 0u8..3) {
        let mut r = rng(seed);
        let rho = representation(&mut r, kind);
        let t = *rho.tolerances();
        let rep = basmajian_partial_sums(&rho, (seed % 3) as usize, DEPTH).unwrap();
        for d in &rep.sums_by_depth {
            prop_assert!(d.sums.identity <= rep.ell_f + t.compare_rel);
        }
        for rec in &rep.records {
            prop_assert!(rec.upper_term >= rec.df_term - t.compare_rel);
            prop_assert!(rec.df_term >= rec.lower_term - t.compare_rel);
            let v = rec.ell_vect.components();
            let spread = v[0] - v[v.len() - 1];
            let gap = rec.upper_term - rec.lower_term;
            if spread < t.compare_rel {
                prop_assert!(gap < 1e-6, "spread {spread}, gap {gap}");
            } else if spread > 1e-3 {
                prop_assert!(gap > 0.0, "spread {spread}, gap {gap}");
            }
        }
    }

    #[test]
    fn orthotube_is_orthogonal_and_unique(seed in any::<u64>(), kind in 0u8..3) {
        let mut r = rng(seed);
        let rho = representation(&mut r, kind);
        let t = rho.tolerances();
        let b = (seed % 3) as usize;
        let g = rho.peripheral_data(b);
        let h = rho.evaluate_word(&word(&mut r, 2));
        let d = rho.peripheral_data((b + 1) % 3).transported(&h, t).unwrap();
        let from_delta = orthotube_for_data(g, &d, t).unwrap();
        for tube in [g.tube(t).unwrap(), d.tube(t).unwrap()] {
            let res = orthogonality_residual(&from_delta, &tube, t).unwrap();
            prop_assert!(res < 1e-7, "residual {res}");
        }
        // Normalizing the gamma pair instead must give the same tube.
        let from_gamma = orthotube_for_data(&d, g, t).unwrap();
        prop_assert!(from_delta.same_as(&from_gamma, 1e-7));
    }

    #[test]
    fn orthotube_lengths_are_symmetric(seed in any::<u64>(), kind in 0u8..3) {
        let mut r = rng(seed);
        let rho = representation(&mut r, kind);
        let (g, d) = ((seed % 3) as usize, ((seed / 3 + 1) % 3) as usize);
        let (g, d) = if g == d { (g, (d + 1) % 3) } else { (g, d) };
        let a = orthotube_lengths(&rho, g, d).unwrap();
        let b = orthotube_lengths(&rho, d, g).unwrap();
        prop_assert!(a.max_diff(&b) < 1e-7 * a.components()[0].max(1.0));
    }

    #[test]
    fn conjugation_equivariance(seed in any::<u64>(), kind in 0u8..3) {
        let mut r = rng(seed);
        let rho = representation(&mut r, kind);
        let w = word(&mut r, 1);
        let p = &siegel::linalg::RealMatrix::identity(rho.n()) + &uniform(&mut r, rho.n(), rho.n(), -0.3, 0.3);
        let levi = SymplecticElement::from_gl(&p, rho.tolerances()).unwrap();
        let h = rho.evaluate_word(&w).compose(&levi);
        let moved = conjugated(&rho, &h);
        let b = (seed % 3) as usize;
        let lengths = |rep: &siegel::orthospectrum::SpectrumReport| {
            let mut v: Vec<Vec<f64>> = rep.records.iter().map(|x| x.ell_vect.components().to_vec()).collect();
            v.sort_by(|x, y| x[0].total_cmp(&y[0]));
            v
        };
        let a = lengths(&basmajian_partial_sums(&rho, b, DEPTH).unwrap());
        let c = lengths(&basmajian_partial_sums(&moved, b, DEPTH).unwrap());
        prop_assert_eq!(a.len(), c.len());
        for (x, y) in a.iter().zip(&c) {
            for (p, q) in x.iter().zip(y) {
                prop_assert!((p - q).abs() < 1e-7 * p.max(1.0), "{p} vs {q}");
            }
        }
    }

    #[test]
    fn rank_one_matches_hyperbolic_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = fuchsian(&mut r);
        let b = (seed % 3) as usize;
        let gamma = rho.evaluate_word(rho.spec().peripheral(b));
        let rep = basmajian_partial_sums(&rho, b, DEPTH).unwrap();
        prop_assert!(!rep.records.is_empty());
        for rec in &rep.records {
            let delta = rho.evaluate_word(&rec.delta_word);
            let (tg, td) = (trace(&gamma), trace(&delta));
            let cosh = (trace(&gamma.compose(&delta)) - trace(&gamma.compose(&delta.inverse()))).abs()
                / ((tg * tg - 4.0) * (td * td - 4.0)).sqrt();
            let oracle = logcoth(cosh.acosh() / 2.0);
            prop_assert!((rec.df_term - oracle).abs() < 1e-7, "{} vs {oracle}", rec.df_term);
        }
    }

    #[test]
    fn doubled_lengths(seed in any::<u64>(), kind in 0u8..3) {
        let mut r = rng(seed);
        let rho = representation(&mut r, kind);
        let rep = double_check(&rho, (seed % 3) as usize, 1, 4).unwrap();
        prop_assert!(rep.max_relation_residual < 1e-7);
        prop_assert!(rep.max_defect < 1e-7, "defect {}", rep.max_defect);
        prop_assert!(rep.entries.iter().all(|e| e.tube_matches));
    }
}
