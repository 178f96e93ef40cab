mod common;

use std::f64::consts::{E, FRAC_1_PI};

use common::{assert_abs, assert_rel, c, in_disk};
use ginibre_overlaps::momentmatrix::*;
use ginibre_overlaps::quadrature::DiskRule;
use ginibre_overlaps::specfun::f_poly;
use ginibre_overlaps::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn factored(n: usize, lam: Complex64) -> MomentFactorization {
    ldu_factor(build_moment_matrix(n, lam, lam.conj()).unwrap()).unwrap()
}

fn max_dev(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn bands_follow_the_formula() {
    let m = build_moment_matrix(1, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
    assert_eq!(m.diag, vec![c(2.0, 0.0)]);
    let m = build_moment_matrix(2, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
    assert_eq!(m.diag, vec![c(2.0, 0.0), c(3.0, 0.0)]);
    assert_eq!((m.sub[0], m.sup[0]), (c(0.0, 0.0), c(0.0, 0.0)));

    let (lam, lb) = (c(0.4, -0.3), c(1.2, 0.5));
    let m = build_moment_matrix(4, lam, lb).unwrap();
    let x = lam * lb;
    assert_rel(m.diag[3], 6.0 * (x + 5.0), 1e-15);
    assert_rel(m.sup[2], -lam * 6.0, 1e-15);
    assert_rel(m.sub[2], -lb * 6.0, 1e-15);
    assert!(build_moment_matrix(0, lam, lb).is_err());
}

#[test]
fn moments_match_quadrature() {
    assert_abs(moment_by_quadrature(0, 0, c(0.0, 0.0)), c(2.0, 0.0), 1e-12);
    for lam in [c(0.0, 0.0), c(0.7, 0.0), c(-0.3, 0.8)] {
        let m = build_moment_matrix(5, lam, lam.conj()).unwrap().dense();
        for i in 0..5 {
            for j in 0..5 {
                assert_abs(moment_by_quadrature(i, j, lam), m[(i, j)], 1e-9);
            }
        }
    }
}

#[test]
fn pivot_examples() {
    let d = pivots_by_recursion(2, c(1.0, 0.0)).unwrap();
    assert_rel(d[0], c(3.0, 0.0), 1e-15);
    assert_rel(d[1], c(11.0 / 3.0, 0.0), 1e-15);
    let closed = pivots_closed_form(2, c(1.0, 0.0)).unwrap();
    assert_rel(closed[1], c(11.0 / 3.0, 0.0), 1e-14);
    for (p, d) in pivots_by_recursion(8, c(0.0, 0.0)).unwrap().into_iter().enumerate() {
        assert_eq!(d, c(2.0 + p as f64, 0.0));
    }
}

#[test]
fn pivots_recursion_closed_form_and_factorization_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let n = rng.random_range(1..=20usize);
        let (lam, lb) = (in_disk(&mut rng, 2.0), in_disk(&mut rng, 2.0));
        let x = lam * lb;
        let rec = pivots_by_recursion(n, x).unwrap();
        let closed = pivots_closed_form(n, x).unwrap();
        let m = ldu_factor(build_moment_matrix(n, lam, lb).unwrap()).unwrap();
        let mut fact = 1.0;
        for p in 0..n {
            if p > 0 {
                fact *= p as f64;
            }
            assert_rel(rec[p], closed[p], 1e-11);
            assert_rel(m.d_diag[p] / fact, rec[p], 1e-11);
        }
    }
}

#[test]
fn ldu_reconstructs_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..40 {
        let n = rng.random_range(1..=50usize);
        let (lam, lb) = (in_disk(&mut rng, 2.0), in_disk(&mut rng, 2.0));
        let m = ldu_factor(build_moment_matrix(n, lam, lb).unwrap()).unwrap();
        let rebuilt = m.l_dense() * m.d_dense() * m.u_dense();
        let dense = m.dense();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (rebuilt[(i, j)], dense[(i, j)]);
                if b.norm() == 0.0 {
                    assert_eq!(a.norm(), 0.0);
                } else {
                    assert!((a - b).norm() <= 1e-12 * b.norm(), "N={n} ({i},{j}): {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn singular_pivot_is_reported() {
    // d_0 = 2 + x vanishes at x = -2
    let m = build_moment_matrix(3, c(2.0, 0.0), c(-1.0, 0.0)).unwrap();
    assert!(ldu_factor(m).is_err());
}

#[test]
fn factor_inverses() {
    let m = factored(4, c(0.0, 0.0));
    let (linv, uinv) = invert_factors(&m).unwrap();
    assert_eq!(linv, DMatrix::identity(4, 4));
    assert_eq!(uinv, DMatrix::identity(4, 4));

    let m = factored(3, c(1.0, 0.0));
    let (linv, uinv) = invert_factors(&m).unwrap();
    assert!(max_dev(&(m.l_dense() * &linv), &DMatrix::identity(3, 3)) < 1e-13);
    assert!(max_dev(&(m.u_dense() * &uinv), &DMatrix::identity(3, 3)) < 1e-13);

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let n = rng.random_range(1..=15usize);
        let (lam, lb) = (in_disk(&mut rng, 2.0), in_disk(&mut rng, 2.0));
        let m = ldu_factor(build_moment_matrix(n, lam, lb).unwrap()).unwrap();
        let (linv, uinv) = invert_factors(&m).unwrap();
        let (lc, uc) = inverse_factors_closed_form(&m).unwrap();
        for p in 0..n {
            for q in 0..n {
                let scale = linv[(p, q)].norm().max(1.0);
                assert!((linv[(p, q)] - lc[(p, q)]).norm() < 1e-10 * scale);
                let scale = uinv[(p, q)].norm().max(1.0);
                assert!((uinv[(p, q)] - uc[(p, q)]).norm() < 1e-10 * scale);
            }
        }
        // (L^{-1})_{2,0} = λ̄² f_0/f_2
        if n > 2 {
            let f2 = f_poly(2, lam * lb).to_complex().unwrap();
            assert_rel(linv[(2, 0)], lb * lb / f2, 1e-11);
        }
        let id = DMatrix::identity(n, n);
        assert!(max_dev(&(m.dense() * inverse_from_factors(&m).unwrap()), &id) < 1e-9);
    }
}

#[test]
fn biorthogonal_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let m = factored(6, c(0.0, 0.0));
    for _ in 0..10 {
        let z = in_disk(&mut rng, 2.0);
        assert_eq!(biorth_polys(&m, 0, z).unwrap(), c(1.0, 0.0));
        for k in 1..6 {
            assert_rel(biorth_polys(&m, k, z).unwrap(), z.powu(k as u32), 1e-14);
        }
    }
    assert!(biorth_polys(&m, 6, c(0.1, 0.0)).is_err());
    // monic: P_k(z)/z^k → 1
    let m = factored(5, c(0.6, -0.2));
    let z = c(1e6, 3e5);
    assert_rel(biorth_polys(&m, 4, z).unwrap() / z.powu(4), c(1.0, 0.0), 1e-5);
}

#[test]
fn biorthogonality_by_quadrature() {
    let rule = DiskRule::new(8.0, 64, 32);
    for lam in [c(0.7, 0.0), c(0.3, -0.5)] {
        let m = factored(4, lam);
        let x = lam.norm_sqr();
        let norm = |i: usize| -> f64 {
            let fact: f64 = (1..=i + 1).map(|k| k as f64).product();
            fact * f_poly(i as u64 + 1, c(x, 0.0)).to_complex().unwrap().re / f_poly(i as u64, c(x, 0.0)).to_complex().unwrap().re
        };
        for i in 0..4 {
            for j in 0..4 {
                let got = rule.integrate(|z| {
                    let w = (c(1.0, 0.0) + (z - lam) * (z - lam).conj()) * (-z.norm_sqr()).exp() * FRAC_1_PI;
                    w * biorth_polys(&m, i, z).unwrap().conj() * biorth_polys(&m, j, z).unwrap()
                });
                let want = if i == j { norm(i) } else { 0.0 };
                assert_abs(got, c(want, 0.0), 1e-6);
            }
        }
    }
}

#[test]
fn kernel_from_the_inverse() {
    let m = factored(1, c(0.0, 0.0));
    for (xb, y) in [(c(0.3, 0.1), c(-1.0, 2.0)), (c(0.0, 0.0), c(5.0, 0.0))] {
        assert_rel(kernel_from_inverse(&m, xb, y).unwrap(), c(0.5, 0.0), 1e-15);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for n in [2usize, 5, 9] {
        let m = factored(n, c(0.0, 0.0));
        let (xb, y) = (in_disk(&mut rng, 2.0), in_disk(&mut rng, 2.0));
        let mut want = c(0.0, 0.0);
        let mut fact = 1.0;
        for k in 0..n {
            if k > 0 {
                fact *= k as f64;
            }
            want += (xb * y).powu(k as u32) / ((k + 2) as f64 * fact);
        }
        assert_rel(kernel_from_inverse(&m, xb, y).unwrap(), want, 1e-14);
    }
}

#[test]
fn prefactor_examples() {
    let m = factored(4, c(0.0, 0.0));
    for n in 1..=5 {
        assert_rel(prefactor_product(&m, n).unwrap().to_complex().unwrap(), c(n as f64 * FRAC_1_PI, 0.0), 1e-14);
    }
    let lam = c(0.6, 0.8);
    let m = factored(3, lam);
    assert_rel(prefactor_product(&m, 1).unwrap().to_complex().unwrap(), c(FRAC_1_PI / E, 0.0), 1e-14);
    assert_rel(prefactor_product(&m, 3).unwrap().to_complex().unwrap(), c(5.5 * FRAC_1_PI / E, 0.0), 1e-14);
    assert!(prefactor_product(&m, 0).is_err());
    assert!(prefactor_product(&m, 5).is_err());
}

#[test]
fn pivot_products_telescope() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..50 {
        let n = rng.random_range(1..=20usize);
        let (lam, lb) = (in_disk(&mut rng, 2.0), in_disk(&mut rng, 2.0));
        let m = ldu_factor(build_moment_matrix(n, lam, lb).unwrap()).unwrap();
        let got = pivot_product_ratio(&m, n).unwrap();
        let want = f_poly(n as u64 - 1, lam * lb);
        assert!(got.rel_diff(&want) < 1e-10, "N={n}: {}", got.rel_diff(&want));
    }
}

proptest! {
    #[test]
    fn dense_and_banded_inverses_agree(
        n in 1usize..12,
        lr in -2.0f64..2.0, li in -2.0f64..2.0,
        xr in -2.0f64..2.0, xi in -2.0f64..2.0,
        yr in -2.0f64..2.0, yi in -2.0f64..2.0,
    ) {
        let lam = c(lr, li);
        let (xb, y) = (c(xr, xi), c(yr, yi));
        let banded = kernel_from_inverse(&factored(n, lam), xb, y).unwrap();
        let dense = kernel_from_dense_inverse(n, xb, y, lam, lam.conj()).unwrap();
        prop_assert!((banded - dense).norm() <= 1e-10 * dense.norm().max(1e-300));
    }
}
