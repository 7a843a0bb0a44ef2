use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use opucz_core::intensity::{expected_count, rho2_n_routes};
use opucz_core::kernel::{kernel_cd, kernel_direct};
use opucz_core::mc::{run_ensemble, CoeffModel};
use opucz_core::opuc::{kappa_product, OpucBasis, VerblunskySeq, VerblunskySource, WeightSpec};
use opucz_core::zerocount::Region;
use proptest::prelude::*;

fn point(r: f64, th: f64) -> Complex64 {
    Complex64::from_polar(r, th)
}

fn families() -> Vec<OpucBasis> {
    vec![
        OpucBasis::free(41),
        VerblunskySource::Decay { c: 1.0, p: 1.0 }.basis(41).unwrap(),
        VerblunskySource::Constant { a: -0.4 }.basis(41).unwrap(),
    ]
}

/// Gram matrix of `phi_0..phi_m` against a density, on `nodes` trapezoid points.
fn gram(basis: &OpucBasis, m: usize, nodes: usize, density: impl Fn(f64) -> f64) -> Vec<Vec<Complex64>> {
    let thetas: Vec<f64> = (0..nodes).map(|j| TAU * j as f64 / nodes as f64).collect();
    let mut ws: Vec<f64> = thetas.iter().map(|&t| density(t)).collect();
    // weights may jump across theta = 0
    ws[0] = 0.5 * (density(0.0) + density(TAU));
    let total: f64 = ws.iter().sum();
    let vals: Vec<Vec<Complex64>> = (0..=m)
        .map(|k| thetas.iter().map(|&t| basis.phi(k).eval(point(1.0, t))).collect())
        .collect();
    (0..=m)
        .map(|j| {
            (0..=m)
                .map(|k| {
                    vals[j].iter().zip(&vals[k]).zip(&ws).map(|((a, b), w)| a * b.conj() * *w).sum::<Complex64>() / total
                })
                .collect()
        })
        .collect()
}

fn max_identity_error(g: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, row) in g.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let want = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((v - want).norm());
        }
    }
    worst
}

#[test]
fn free_gram_is_identity() {
    let g = gram(&OpucBasis::free(20), 20, 512, |_| 1.0);
    assert!(max_identity_error(&g) < 1e-10);
}

#[test]
fn gram_identity_for_weights() {
    let weights = [WeightSpec::CosineBump, WeightSpec::jacobi(PI, 1.0).unwrap(), WeightSpec::jacobi(1.0, 0.5).unwrap()];
    for w in weights {
        let basis = VerblunskySource::Weight { weight: w.clone() }.basis(10).unwrap();
        let g = gram(&basis, 10, 1 << 18, |t| w.density(t));
        let err = max_identity_error(&g);
        assert!(err < 1e-6, "{w:?}: {err}");
    }
}

#[test]
fn kappa_matches_leading_coefficient() {
    let alphas: Vec<Complex64> = (0..200).map(|j| point(0.9 * ((j * 37 % 100) as f64 / 100.0), j as f64)).collect();
    let seq = VerblunskySeq::new(alphas).unwrap();
    let basis = OpucBasis::szego_build(&seq, 200).unwrap();
    for k in [0, 1, 10, 50, 100, 200] {
        let lead = basis.phi(k).leading();
        let kp = kappa_product(&seq, k).unwrap();
        assert!((lead.re - kp).abs() <= 1e-12 * kp && lead.im.abs() <= 1e-12 * kp, "k={k}");
        assert!((basis.kappa(k) - kp).abs() <= 1e-12 * kp);
    }
}

#[test]
fn intensity_integral_matches_monte_carlo_mean() {
    let basis = OpucBasis::free(50);
    let region = Region::annulus(0.0, 0.5).unwrap();
    let integral = expected_count(&basis, 50, &region, 1e-10).unwrap();
    // free case: E N = sum j t^{2j} / sum t^{2j} over j = 0..=n
    let t2: f64 = 0.25;
    let exact = t2 / (1.0 - t2) - 51.0 * t2.powi(51) / (1.0 - t2.powi(51));
    assert!((integral - exact).abs() < 1e-9, "{integral} vs {exact}");
    let stats = run_ensemble(&basis, CoeffModel::ComplexGaussian, &region, 3000, 5).unwrap();
    assert!((stats.mean - integral).abs() <= 3.0 * stats.se_mean, "{} vs {integral}", stats.mean);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_routes_agree(fam in 0usize..3, order in 1usize..40, rz in 0.0f64..1.3, tz in 0.0f64..TAU, rw in 0.0f64..1.3, tw in 0.0f64..TAU) {
        let basis = &families()[fam];
        let (z, w) = (point(rz, tz), point(rw, tw));
        prop_assume!((Complex64::new(1.0, 0.0) - z * w.conj()).norm() > 0.1);
        let d = kernel_direct(basis, order, z, w).unwrap();
        let c = kernel_cd(basis, order, z, w).unwrap();
        for (a, b) in [(d.k, c.k), (d.k01, c.k01), (d.k11, c.k11)] {
            prop_assert!((a - b).norm() <= 1e-9 * b.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn rho2_routes_agree_and_are_nonnegative(fam in 0usize..3, order in 2usize..40, rz in 0.0f64..0.95, tz in 0.0f64..TAU, rw in 0.0f64..0.95, tw in 0.0f64..TAU) {
        let basis = &families()[fam];
        let r = rho2_n_routes(basis, order, point(rz, tz), point(rw, tw)).unwrap();
        prop_assert!((r.expanded - r.permanent).abs() <= 1e-9 * r.permanent.abs().max(1.0));
        prop_assert!(r.expanded >= -1e-10);
    }
}
