#![allow(dead_code)]

use ginibre_overlaps::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Uniform point in the disk `|z| <= r`.
pub fn in_disk(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::from_polar(r * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())
}

#[track_caller]
pub fn assert_rel(a: Complex64, b: Complex64, tol: f64) {
    let r = rel(a, b);
    assert!(r <= tol, "{a} vs {b}: relative deviation {r:e} > {tol:e}");
}

#[track_caller]
pub fn assert_abs(a: Complex64, b: Complex64, tol: f64) {
    let d = (a - b).norm();
    assert!(d <= tol, "{a} vs {b}: absolute deviation {d:e} > {tol:e}");
}
