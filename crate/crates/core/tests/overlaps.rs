mod common;

use std::f64::consts::{FRAC_1_PI, PI};

use common::{assert_abs, assert_rel, c, in_disk};
use ginibre_overlaps::kernels::SpectralPoint;
use ginibre_overlaps::overlaps::*;
use ginibre_overlaps::specfun::{erfc_f, exp_poly, f_poly, h_edge_finite_difference};
use ginibre_overlaps::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn phys(lams: &[Complex64]) -> SpectralTuple {
    SpectralTuple::physical(lams).unwrap()
}

fn val(v: ginibre_overlaps::Result<OverlapValue>) -> Complex64 {
    v.unwrap().to_complex().unwrap()
}

fn random_tuple(rng: &mut ChaCha8Rng, k: usize, r: f64) -> SpectralTuple {
    phys(&(0..k).map(|_| in_disk(rng, r)).collect::<Vec<_>>())
}

fn random_decoupled(rng: &mut ChaCha8Rng, k: usize, r: f64) -> SpectralTuple {
    SpectralTuple::new((0..k).map(|_| SpectralPoint::decoupled(in_disk(rng, r), in_disk(rng, r))).collect()).unwrap()
}

#[test]
fn d11_single_point() {
    for n in [1u64, 4, 15] {
        assert_rel(val(d11_finite(n, &phys(&[c(0.0, 0.0)]))), c(n as f64 / PI, 0.0), 1e-14);
        let l = c(0.8, -0.6);
        let want = f_poly(n - 1, c(1.0, 0.0)).to_complex().unwrap() * (-1.0f64).exp() / PI;
        assert_rel(val(d11_finite(n, &phys(&[l]))), want, 1e-14);
    }
    let l = c(0.4, -1.1);
    assert_rel(val(d11_finite(1, &phys(&[l]))), c((-l.norm_sqr()).exp() / PI, 0.0), 1e-15);
    assert!(d11_finite(1, &phys(&[c(0.0, 0.0), c(1.0, 0.0)])).is_err());
    assert!(d11_finite(0, &phys(&[c(0.0, 0.0)])).is_err());
}

#[test]
fn d12_pair() {
    let (l1, l2) = (c(0.3, 0.2), c(-0.5, 0.7));
    for n in [2u64, 3, 9] {
        let got = val(d12_finite(n, &phys(&[l1, l2])));
        let kap = ginibre_overlaps::kernels::kappa_finite(n - 1, l1.conj(), l2, l1, l2.conj()).unwrap().to_complex().unwrap();
        let want = -(-l1.norm_sqr() - l2.norm_sqr()).exp() / (PI * PI) * f_poly(n - 1, l1 * l2.conj()).to_complex().unwrap() * kap;
        assert_rel(got, want, 1e-13);
    }
    // the bulk value depends on |λ₁₂|² only and is real
    let b = val(d12_bulk(&phys(&[l1, l2])));
    assert!(b.im.abs() < 1e-14 * b.norm());
    assert!(d12_finite(2, &phys(&[l1])).is_err());
}

#[test]
fn all_eigenvalues_fixed_reduces_to_chalker_mehlig() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    // N = 1: D₁₁ = p₁ = e^{-|λ|²}/π
    let l = c(0.3, -0.9);
    assert_rel(val(cm_conditional_d11(1, &phys(&[l]))), c((-l.norm_sqr()).exp() / PI, 0.0), 1e-14);
    for n in [2u64, 3, 4] {
        for _ in 0..5 {
            let t = random_tuple(&mut rng, n as usize, 1.5);
            assert_rel(val(d11_finite(n, &t)), val(cm_conditional_d11(n, &t)), 1e-10);
            assert_rel(val(d12_finite(n, &t)), val(cm_conditional_d12(n, &t)), 1e-10);
        }
    }
    let s = 0.7;
    let t = phys(&[c(0.0, 0.0), c(s, 0.0)]);
    assert_rel(val(d12_finite(2, &t)), val(cm_conditional_d12(2, &t)), 1e-12);
    assert!(cm_conditional_d11(3, &phys(&[c(0.0, 0.0), c(1.0, 0.0)])).is_err());
    assert!(cm_conditional_d11(2, &phys(&[c(0.5, 0.0), c(0.5, 0.0)])).is_err());
}

#[test]
fn chalker_mehlig_satisfies_the_swap_identity_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for n in [2u64, 3] {
        for _ in 0..10 {
            let t = random_decoupled(&mut rng, n as usize, 1.2);
            let f = lemma1_factor(&t).unwrap();
            let swapped = val(cm_conditional_d11(n, &t_swap(&t).unwrap())) * f;
            assert_rel(val(cm_conditional_d12(n, &t)), swapped, 1e-11);
        }
    }
}

#[test]
fn marginalization_by_quadrature() {
    let l = c(0.3, 0.2);
    let q = integrate_cm_conditional(2, &phys(&[l]), OverlapKind::D11, 1e-9).unwrap();
    assert_abs(q.value, val(d11_finite(2, &phys(&[l]))), 1e-6);
    let t = phys(&[c(0.1, -0.2), c(0.5, 0.4)]);
    let q = integrate_cm_conditional(3, &t, OverlapKind::D12, 1e-9).unwrap();
    assert_abs(q.value, val(d12_finite(3, &t)), 1e-6);
}

#[test]
fn t_swap_exchanges_conjugates() {
    let t = phys(&[c(0.1, 0.2), c(-0.3, 0.4), c(0.5, 0.0)]);
    let s = t_swap(&t).unwrap();
    assert_eq!(s.lam(0), t.lam(0));
    assert_eq!(s.lam_bar(0), t.lam_bar(1));
    assert_eq!(s.lam_bar(1), t.lam_bar(0));
    assert!(s.points[0].decoupled && s.points[1].decoupled && !s.points[2].decoupled);
    let back = t_swap(&s).unwrap();
    for i in 0..3 {
        assert_eq!((back.lam(i), back.lam_bar(i)), (t.lam(i), t.lam_bar(i)));
    }
    assert!(t_swap(&phys(&[c(0.0, 0.0)])).is_err());
}

#[test]
fn d11_is_real_and_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..60 {
        let n = rng.random_range(1..=10u64);
        let k = rng.random_range(1..=3usize.min(n as usize));
        let t = random_tuple(&mut rng, k, (n as f64).sqrt());
        let v = val(d11_finite(n, &t));
        assert!(v.re > 0.0 && v.im.abs() < 1e-10 * v.norm(), "N={n} k={k}: {v}");
    }
}

#[test]
fn permutation_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..20 {
        let t = random_tuple(&mut rng, 4, 1.5);
        let mut p = t.clone();
        p.points.swap(1, 3);
        assert_rel(val(d11_finite(6, &p)), val(d11_finite(6, &t)), 1e-12);
        assert_rel(val(d11_bulk(&p)), val(d11_bulk(&t)), 1e-12);
        let mut q = t.clone();
        q.points.swap(2, 3);
        assert_rel(val(d12_finite(6, &q)), val(d12_finite(6, &t)), 1e-12);
        assert_rel(val(d12_bulk(&q)), val(d12_bulk(&t)), 1e-12);
    }
}

#[test]
fn swap_identity_on_decoupled_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut checked = 0;
    while checked < 30 {
        let k = rng.random_range(2..=4usize);
        let t = random_decoupled(&mut rng, k, 1.5);
        if (c(1.0, 0.0) - (t.lam(0) - t.lam(1)) * (t.lam_bar(0) - t.lam_bar(1))).norm() < 0.1 {
            continue;
        }
        let f = lemma1_factor(&t).unwrap();
        checked += 1;
        let n = rng.random_range(k as u64..=8);
        assert!(d12_finite(n, &t).unwrap().value.rel_diff(&d12_via_swap(n, &t).unwrap()) < 1e-9);
        let sw = t_swap(&t).unwrap();
        assert_rel(val(d12_bulk(&t)), val(d11_bulk(&sw)) * f, 1e-9);
        assert_rel(val(d12_edge(&t)), val(d11_edge(&sw)) * f, 1e-9);
    }
}

#[test]
fn bulk_examples() {
    assert_rel(val(d11_bulk(&phys(&[c(0.7, -2.0)]))), c(FRAC_1_PI, 0.0), 1e-15);
    for s in [0.1f64, 1.0, 4.0] {
        let t = phys(&[c(0.2, 0.1), c(0.2 + s.sqrt(), 0.1)]);
        let want = -FRAC_1_PI * FRAC_1_PI * (1.0 - (1.0 + s) * (-s).exp()) / (s * s);
        assert_rel(val(d12_bulk(&t)), c(want, 0.0), 1e-12);
    }
}

#[test]
fn bulk_shift_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..20 {
        let t = random_decoupled(&mut rng, 3, 1.5);
        let (mu, mu_bar) = (in_disk(&mut rng, 2.0), in_disk(&mut rng, 2.0));
        let s = t.shifted(mu, mu_bar);
        assert_rel(val(d11_bulk(&s)), val(d11_bulk(&t)), 1e-11);
        assert_rel(val(d12_bulk(&s)), val(d12_bulk(&t)), 1e-11);
        assert_rel(val(rho_bulk(&s)), val(rho_bulk(&t)), 1e-11);
    }
}

#[test]
fn edge_single_point() {
    for x in [-3.0f64, -0.5, 0.0, 0.4, 2.5] {
        let l = c(x / 2.0, 0.9);
        let a = c(x, 0.0);
        let want = ((-a * a * 0.5).exp() - (2.0 * PI).sqrt() * a * erfc_f(a)) / (2.0 * PI.powi(3)).sqrt();
        assert_rel(val(d11_edge(&phys(&[l]))), want, 1e-12);
    }
}

#[test]
fn edge_pair_against_finite_difference_h() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..10 {
        let (l1, l2) = (in_disk(&mut rng, 1.0), in_disk(&mut rng, 1.0));
        let (b1, b2) = (l1.conj(), l2.conj());
        let a = l1 + b2;
        let s = (l1 - l2) * (b1 - b2);
        let h = h_edge_finite_difference(a, l1 + b1, l2 + b2, l2 + b1, -s, 1e-3).unwrap();
        let bracket = c(1.0, 0.0) - (2.0 * PI).sqrt() * a * (a * a * 0.5).exp() * erfc_f(a);
        let want = -bracket / (2.0 * PI.powi(5)).sqrt() * (-s - a * a * 0.5).exp() / (s * s) * h;
        assert_rel(val(d12_edge(&phys(&[l1, l2]))), want, 1e-7);
    }
}

#[test]
fn edge_shift_along_the_edge() {
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    for _ in 0..10 {
        let t = random_tuple(&mut rng, 3, 1.0);
        let mu = rng.random_range(-2.0..2.0);
        let s = t.shifted(c(0.0, mu), c(0.0, -mu));
        assert_rel(val(d11_edge(&s)), val(d11_edge(&t)), 1e-9);
        assert_rel(val(d12_edge(&s)), val(d12_edge(&t)), 1e-9);
    }
}

#[test]
fn edge_crosses_over_to_bulk() {
    let r = -8.0;
    let pts = [c(0.2, 0.1), c(0.9, -0.4), c(-0.3, 0.6)];
    for k in [2usize, 3] {
        let t = phys(&pts[..k]);
        let deep = t.shifted(c(r, 0.0), c(r, 0.0));
        let edge = val(d11_edge(&deep)) / val(d11_edge(&phys(&[pts[0] + r])));
        let bulk = val(d11_bulk(&t)) / val(d11_bulk(&phys(&[pts[0]])));
        assert_rel(edge, bulk, 1e-5);
    }
    let t = phys(&pts);
    let deep = t.shifted(c(r, 0.0), c(r, 0.0));
    let edge = val(d12_edge(&deep)) / val(d12_edge(&phys(&[pts[0] + r, pts[1] + r])));
    let bulk = val(d12_bulk(&t)) / val(d12_bulk(&phys(&pts[..2])));
    assert_rel(edge, bulk, 1e-5);
}

#[test]
fn asymptotic_products() {
    assert_rel(val(d11_bulk_asymptotic(&phys(&[c(0.3, 0.0)]))), c(FRAC_1_PI, 0.0), 1e-15);
    let l = 2.5f64;
    let t = phys(&[c(0.1, 0.1), c(0.1, 0.1 + l)]);
    assert_rel(val(d11_bulk_asymptotic(&t)), c((1.0 - l.powi(-4)) / (PI * PI), 0.0), 1e-14);
    assert_rel(val(d12_bulk_asymptotic(&t)), c(-l.powi(-4) / (PI * PI), 0.0), 1e-14);
    // at separation 6 the corrections are e^{-36}
    let t = phys(&[c(0.0, 0.0), c(6.0, 0.0), Complex64::from_polar(6.0, 2.0)]);
    assert_abs(val(d11_bulk_asymptotic(&t)), val(d11_bulk(&t)), 1e-8);
    assert_abs(val(d12_bulk_asymptotic(&t)), val(d12_bulk(&t)), 1e-8);
    assert!(d11_bulk_asymptotic(&phys(&[c(1.0, 0.0), c(1.0, 0.0)])).is_err());
}

#[test]
fn eigenvalue_correlations() {
    for n in [1u64, 3, 10] {
        assert_rel(val(rho_finite(n, &phys(&[c(0.0, 0.0)]))), c(FRAC_1_PI, 0.0), 1e-15);
    }
    for l in [0.5f64, 1.0, 2.0] {
        let t = phys(&[c(0.3, 0.0), c(0.3, l)]);
        assert_rel(val(rho_bulk(&t)), c((1.0 - (-l * l).exp()) / (PI * PI), 0.0), 1e-13);
    }
    let far = phys(&[c(0.0, 0.0), c(9.0, 0.0), c(0.0, 9.0)]);
    assert_rel(val(rho_bulk(&far)), c(FRAC_1_PI.powi(3), 0.0), 1e-14);
    // single-point density at finite N
    let l = c(0.6, -1.0);
    let want = (-l.norm_sqr()).exp() / PI * exp_poly(4, c(l.norm_sqr(), 0.0)).to_complex().unwrap();
    assert_rel(val(rho_finite(5, &phys(&[l]))), want, 1e-14);
}

#[test]
fn conditional_expectation() {
    for n in [1u64, 2, 7, 20] {
        assert!((conditional_expectation_d11(n, &phys(&[c(0.0, 0.0)])).unwrap() - n as f64).abs() < 1e-12 * n as f64);
    }
    for l in [c(0.2, 0.3), c(3.0, -4.0)] {
        assert!((conditional_expectation_d11(1, &phys(&[l])).unwrap() - 1.0).abs() < 1e-13);
    }
    // far outside the spectrum the expectation tends to 1
    let e = conditional_expectation_d11(5, &phys(&[c(30.0, 0.0)])).unwrap();
    assert!((e - 1.0).abs() < 0.02, "{e}");
    let l = c(0.5, 1.3);
    let x = c(l.norm_sqr(), 0.0);
    let want = (f_poly(5, x) / exp_poly(5, x)).to_complex().unwrap().re;
    assert!((conditional_expectation_d11(6, &phys(&[l])).unwrap() - want).abs() < 1e-12 * want);
}

#[test]
fn derivative_representations() {
    assert_rel(val(d11_bulk_via_derivatives(&phys(&[c(0.4, 0.0)]))), c(FRAC_1_PI, 0.0), 1e-15);
    let t = phys(&[c(0.2, 0.1), c(0.2, 1.1)]);
    assert_rel(val(d11_bulk_via_derivatives(&t)), val(d11_bulk(&t)), 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    for k in [2usize, 3] {
        for _ in 0..10 {
            let t = random_tuple(&mut rng, k, 1.5);
            assert_rel(val(d11_bulk_via_derivatives(&t)), val(d11_bulk(&t)), 1e-8);
            assert_rel(val(d12_bulk_via_derivatives(&t)), val(d12_bulk(&t)), 1e-8);
        }
    }
    assert!(d11_bulk_via_derivatives(&random_tuple(&mut rng, 4, 1.0)).is_err());
    assert!(d12_bulk_via_derivatives(&random_tuple(&mut rng, 1, 1.0)).is_err());
}

#[test]
fn finite_n_approaches_the_bulk() {
    let t = phys(&[c(0.3, 0.1), c(0.9, -0.4)]);
    let bulk = val(d11_bulk(&t));
    let residual = |n: u64| (val(d11_finite(n, &t)) / n as f64 - bulk).norm();
    let ratio = residual(100) / residual(200);
    assert!((ratio - 2.0).abs() < 0.4, "residual ratio {ratio}");
}

#[test]
fn finite_n_approaches_the_edge() {
    let t = phys(&[c(0.3, 0.1)]);
    let n = 400.0;
    let a = val(d11_finite(400, &t.to_edge(n, 0.0))) / n.sqrt();
    let b = val(d11_finite(400, &t.to_edge(n, 1.7))) / n.sqrt();
    assert_rel(a, b, 1e-10);
    assert_rel(a, val(d11_edge(&t)), 0.05);
}

proptest! {
    #[test]
    fn d12_is_hermitian_under_exchanging_the_pair(
        a in -1.5f64..1.5, b in -1.5f64..1.5, cc in -1.5f64..1.5, d in -1.5f64..1.5, n in 2u64..8,
    ) {
        // D₁₂ for physical points is real, so exchanging 1 and 2 conjugates it to itself
        prop_assume!((a - cc).hypot(b - d) > 1e-3);
        let t = phys(&[c(a, b), c(cc, d)]);
        let mut s = t.clone();
        s.points.swap(0, 1);
        let (x, y) = (val(d12_finite(n, &t)), val(d12_finite(n, &s)));
        prop_assert!((x - y.conj()).norm() <= 1e-11 * x.norm().max(1e-300));
    }
}
