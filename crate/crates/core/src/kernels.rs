//! Weight functions and kernels: finite-N κ^(N), K₁₁^(N), K₁₂^(N); their bulk and edge limits;
//! and the eigenvalue kernel K_ev.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scaledarith::ScaledComplex;
use crate::specfun::{self, Branch};

const EPS: f64 = f64::EPSILON;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A point `(λ, λ̄)`. When `decoupled` is false `lam_bar` is exactly `conj(lam)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPoint {
    pub lam: Complex64,
    pub lam_bar: Complex64,
    pub decoupled: bool,
}

impl SpectralPoint {
    pub fn physical(lam: Complex64) -> Self {
        SpectralPoint {
            lam,
            lam_bar: lam.conj(),
            decoupled: false,
        }
    }

    /// Treats `lam` and `lam_bar` as independent variables.
    pub fn decoupled(lam: Complex64, lam_bar: Complex64) -> Self {
        SpectralPoint {
            lam,
            lam_bar,
            decoupled: true,
        }
    }

    /// Edge coordinates `e^{iθ}(√s + λ)`, `e^{-iθ}(√s + λ̄)`.
    pub fn to_edge(self, scale: f64, theta: f64) -> Self {
        let r = scale.sqrt();
        let ph = Complex64::from_polar(1.0, theta);
        let lam = ph * (self.lam + r);
        let lam_bar = ph.conj() * (self.lam_bar + r);
        SpectralPoint {
            lam,
            lam_bar,
            decoupled: self.decoupled,
        }
    }

    /// Adds `(μ, μ̄)` to `(λ, λ̄)`; `mu_bar` need not be `conj(mu)`.
    pub fn shifted(self, mu: Complex64, mu_bar: Complex64) -> Self {
        SpectralPoint {
            lam: self.lam + mu,
            lam_bar: self.lam_bar + mu_bar,
            decoupled: self.decoupled || mu_bar != mu.conj(),
        }
    }
}

/// The free arguments `(x, x̄, y, ȳ)` of a kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelArgs {
    pub x: Complex64,
    pub x_bar: Complex64,
    pub y: Complex64,
    pub y_bar: Complex64,
}

impl KernelArgs {
    pub fn new(x: Complex64, x_bar: Complex64, y: Complex64, y_bar: Complex64) -> Self {
        KernelArgs { x, x_bar, y, y_bar }
    }

    /// Arguments taken from two spectral points, as in the determinant entries `K(λ_i, λ̄_i, λ_j, λ̄_j | ...)`.
    pub fn from_points(p: SpectralPoint, q: SpectralPoint) -> Self {
        KernelArgs::new(p.lam, p.lam_bar, q.lam, q.lam_bar)
    }
}

/// `ω(x, y | λ, μ) = (1/π)(1 + (x-λ)(y-μ)) e^{-xy}`.
pub fn weight_omega(x: Complex64, y: Complex64, lam: Complex64, mu: Complex64) -> Complex64 {
    (c(1.0, 0.0) + (x - lam) * (y - mu)) * (-x * y).exp() * FRAC_1_PI
}

/// [`weight_omega`] without overflow or underflow of `e^{-xy}`.
pub fn weight_omega_scaled(x: Complex64, y: Complex64, lam: Complex64, mu: Complex64) -> ScaledComplex {
    ScaledComplex::exp(-x * y) * ((c(1.0, 0.0) + (x - lam) * (y - mu)) * FRAC_1_PI)
}

/// How to evaluate κ^(N).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KappaMethod {
    /// closed form unless its rounding estimate is poor, then the better of the two
    Auto,
    ClosedForm,
    PartialSums,
}

/// A kernel value with a first-order estimate of its relative rounding error.
#[derive(Clone, Copy, Debug)]
pub struct KappaValue {
    pub value: ScaledComplex,
    pub rel_err: f64,
}

/// Closed-form estimates above this are replaced by the partial-sum representation.
pub const KAPPA_CLOSED_FORM_TOL: f64 = 1e-12;

/// Closed form of κ^(N): `((N+1)𝔉_{N+1} - λλ̄𝔉_N) / ((x̄-λ̄)²(y-λ)² f_N(λλ̄))` with 𝔉 evaluated at
/// `(λλ̄, x̄/λ̄, y/λ)`, written in products so that λ = 0 needs no special case.
pub fn kappa_closed_form(
    n: u64,
    x_bar: Complex64,
    y: Complex64,
    lam: Complex64,
    lam_bar: Complex64,
) -> Result<KappaValue> {
    let xx = lam * lam_bar;
    let fn_ = specfun::f_poly(n, xx);
    if fn_.is_zero() {
        return Err(Error::singular(format!("f_{n}(lam lam_bar) = 0 at lam lam_bar = {xx}")));
    }
    let d1 = x_bar - lam_bar;
    let d2 = y - lam;
    let den = ScaledComplex::from(d1 * d1 * d2 * d2) * fn_;
    let s = d1 * d2;
    let xy = lam * x_bar;
    let xz = lam_bar * y;
    let w = x_bar * y;
    let hi = specfun::frak_f_terms(n + 1, xx, xy, xz, w, s, Branch::Auto);
    let lo = specfun::frak_f_terms(n, xx, xy, xz, w, s, Branch::Auto);
    let a = hi.value.scale((n + 1) as f64);
    let b = lo.value * xx;
    let num = a - b;
    if den.is_zero() {
        return Ok(KappaValue {
            value: ScaledComplex::ZERO,
            rel_err: f64::INFINITY,
        });
    }
    let value = num / den;
    let scale = hi.scale.scale((n + 1) as f64) + lo.scale * ScaledComplex::from(c(xx.norm(), 0.0));
    let rel_err = if num.is_zero() {
        f64::INFINITY
    } else {
        16.0 * EPS * (scale.ln_abs() - num.ln_abs()).exp()
    };
    Ok(KappaValue { value, rel_err })
}

/// κ^(N) as the finite sum `Σ_{q<N} A_q(x̄) B_q(y) / ((q+1)! f_q f_{q+1})` with
/// `A_q = λ̄ A_{q-1} + f_q x̄^q`, `B_q = λ B_{q-1} + f_q y^q`, all `f` at `λλ̄`.
/// This is the diagonalized moment-matrix inverse; it is a polynomial in every argument.
pub fn kappa_partial_sums(
    n: u64,
    x_bar: Complex64,
    y: Complex64,
    lam: Complex64,
    lam_bar: Complex64,
) -> Result<KappaValue> {
    let xx = lam * lam_bar;
    let fs = specfun::f_poly_all(n, xx);
    for (q, f) in fs.iter().enumerate() {
        if f.is_zero() || !f.is_finite() {
            return Err(Error::singular(format!("f_{q}(lam lam_bar) = 0 at lam lam_bar = {xx}")));
        }
    }
    let xb = ScaledComplex::from(x_bar);
    let ys = ScaledComplex::from(y);
    let lb = ScaledComplex::from(lam_bar);
    let l = ScaledComplex::from(lam);
    let (axb, ay, alb, al) = (x_bar.norm(), y.norm(), lam_bar.norm(), lam.norm());
    let mut a = ScaledComplex::ZERO;
    let mut b = ScaledComplex::ZERO;
    let mut a_abs = ScaledComplex::ZERO;
    let mut b_abs = ScaledComplex::ZERO;
    let mut xq = ScaledComplex::ONE;
    let mut yq = ScaledComplex::ONE;
    let mut xq_abs = ScaledComplex::ONE;
    let mut yq_abs = ScaledComplex::ONE;
    let mut fact = ScaledComplex::ONE;
    let mut sum = ScaledComplex::ZERO;
    let mut sum_abs = ScaledComplex::ZERO;
    for q in 0..n as usize {
        if q > 0 {
            xq *= xb;
            yq *= ys;
            xq_abs = xq_abs * axb;
            yq_abs = yq_abs * ay;
        }
        fact = fact * (q + 1) as f64;
        let f = fs[q];
        a = lb * a + f * xq;
        b = l * b + f * yq;
        a_abs = a_abs * alb + f.abs() * xq_abs;
        b_abs = b_abs * al + f.abs() * yq_abs;
        let wq = (fact * f * fs[q + 1]).recip();
        sum += a * b * wq;
        sum_abs += a_abs * b_abs * wq.abs();
    }
    let rel_err = if sum.is_zero() {
        if sum_abs.is_zero() { 0.0 } else { f64::INFINITY }
    } else {
        4.0 * (n as f64).sqrt().max(1.0) * EPS * (sum_abs.ln_abs() - sum.ln_abs()).exp()
    };
    Ok(KappaValue { value: sum, rel_err })
}

/// κ^(N)(x̄, y | λ, λ̄) with an explicit choice of method and its error estimate.
pub fn kappa_finite_with(
    n: u64,
    x_bar: Complex64,
    y: Complex64,
    lam: Complex64,
    lam_bar: Complex64,
    method: KappaMethod,
) -> Result<KappaValue> {
    if n == 0 {
        return Err(Error::invalid("kappa_finite needs N >= 1"));
    }
    match method {
        KappaMethod::ClosedForm => kappa_closed_form(n, x_bar, y, lam, lam_bar),
        KappaMethod::PartialSums => kappa_partial_sums(n, x_bar, y, lam, lam_bar),
        KappaMethod::Auto => {
            let closed = kappa_closed_form(n, x_bar, y, lam, lam_bar)?;
            if closed.rel_err <= KAPPA_CLOSED_FORM_TOL {
                return Ok(closed);
            }
            let sums = kappa_partial_sums(n, x_bar, y, lam, lam_bar)?;
            Ok(if sums.rel_err < closed.rel_err { sums } else { closed })
        }
    }
}

/// Reduced kernel κ^(N)(x̄, y | λ, λ̄).
pub fn kappa_finite(
    n: u64,
    x_bar: Complex64,
    y: Complex64,
    lam: Complex64,
    lam_bar: Complex64,
) -> Result<ScaledComplex> {
    Ok(kappa_finite_with(n, x_bar, y, lam, lam_bar, KappaMethod::Auto)?.value)
}

/// `K₁₁^(N)(x, x̄, y, ȳ | λ, λ̄) = ω(x, x̄ | λ, λ̄) κ^(N)(x̄, y | λ, λ̄)`.
pub fn k11_finite(n: u64, args: &KernelArgs, cond: SpectralPoint) -> Result<ScaledComplex> {
    let w = weight_omega_scaled(args.x, args.x_bar, cond.lam, cond.lam_bar);
    let k = kappa_finite(n, args.x_bar, args.y, cond.lam, cond.lam_bar)?;
    Ok(w * k)
}

/// `e^{√N x} K₁₁^(N)(x^(N), ... | λ^(N), ...) e^{-√N y}` at edge coordinates
/// `x^(N) = e^{iθ}(√N + x)`, with `N` the kernel order. Local arguments are passed in.
pub fn k11_finite_edge(n: u64, theta: f64, local: &KernelArgs, cond: SpectralPoint) -> Result<ScaledComplex> {
    let p = SpectralPoint::decoupled(local.x, local.x_bar).to_edge(n as f64, theta);
    let q = SpectralPoint::decoupled(local.y, local.y_bar).to_edge(n as f64, theta);
    let l = cond.to_edge(n as f64, theta);
    let k = k11_finite(n, &KernelArgs::from_points(p, q), l)?;
    let r = (n as f64).sqrt();
    Ok(k * ScaledComplex::exp((local.x - local.y) * r))
}

/// 2×2 determinant of Eq. (40)-type kernels divided by its corner, times the weight.
fn k12_assemble<T, K>(kappa: K, weight: T, corner: T, ubar: Complex64, v: Complex64, x_bar: Complex64, y: Complex64) -> Result<T>
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Sub<Output = T> + std::ops::Div<Output = T>,
    K: Fn(Complex64, Complex64) -> Result<T>,
{
    let k_uy = kappa(ubar, y)?;
    let k_xv = kappa(x_bar, v)?;
    let k_xy = kappa(x_bar, y)?;
    Ok(weight / corner * (corner * k_xy - k_uy * k_xv))
}

/// `K₁₂^(N)(x, x̄, y, ȳ | u, ū, v, v̄)`: `ω(x, x̄ | u, v̄)/κ(ū, v) · det[[κ(ū,v), κ(ū,y)], [κ(x̄,v), κ(x̄,y)]]`
/// with every κ conditioned on `(u, v̄)`. Here `p1 = (u, ū)` and `p2 = (v, v̄)`.
pub fn k12_finite(n: u64, args: &KernelArgs, p1: SpectralPoint, p2: SpectralPoint) -> Result<ScaledComplex> {
    let (u, ubar, v, vbar) = (p1.lam, p1.lam_bar, p2.lam, p2.lam_bar);
    let corner = kappa_finite(n, ubar, v, u, vbar)?;
    if corner.is_zero() {
        return Err(Error::singular("kappa(u_bar, v | u, v_bar) = 0 in K12"));
    }
    let weight = weight_omega_scaled(args.x, args.x_bar, u, vbar);
    k12_assemble(
        |a, b| kappa_finite(n, a, b, u, vbar),
        weight,
        corner,
        ubar,
        v,
        args.x_bar,
        args.y,
    )
}

/// `exp(z) - 1` without cancellation for small `z`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let s = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * s * s;
    let im = x.exp() * y.sin();
    c(re, im)
}

/// `d/dz ((e^z - 1)/z) = ((z-1)e^z + 1)/z²`.
pub fn kappa_bulk_z(z: Complex64) -> Complex64 {
    if z.norm() < 2.0 {
        // Σ_k (k+1) z^k/(k+2)!, the closed form cancels badly here
        let mut term = c(0.5, 0.0);
        let mut acc = term;
        for k in 1..40 {
            term = term * z * ((k + 1) as f64) / (k as f64 * (k + 2) as f64);
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        acc
    } else {
        (z * z.exp() - expm1(z)) / (z * z)
    }
}

/// `κ^bulk(x̄, y | λ, λ̄)` at `z = (x̄ - λ̄)(y - λ)`.
pub fn kappa_bulk(x_bar: Complex64, y: Complex64, lam: Complex64, lam_bar: Complex64) -> Complex64 {
    kappa_bulk_z((x_bar - lam_bar) * (y - lam))
}

/// `ω^bulk(u, ū | λ, λ̄) = (1/π)(1 + (u-λ)(ū-λ̄)) e^{-(u-λ)(ū-λ̄)}`.
pub fn weight_bulk(u: Complex64, u_bar: Complex64, lam: Complex64, lam_bar: Complex64) -> Complex64 {
    let t = (u - lam) * (u_bar - lam_bar);
    (c(1.0, 0.0) + t) * (-t).exp() * FRAC_1_PI
}

pub fn k11_bulk(args: &KernelArgs, cond: SpectralPoint) -> Complex64 {
    weight_bulk(args.x, args.x_bar, cond.lam, cond.lam_bar)
        * kappa_bulk(args.x_bar, args.y, cond.lam, cond.lam_bar)
}

pub fn k12_bulk(args: &KernelArgs, p1: SpectralPoint, p2: SpectralPoint) -> Result<Complex64> {
    let (u, ubar, v, vbar) = (p1.lam, p1.lam_bar, p2.lam, p2.lam_bar);
    let corner = kappa_bulk(ubar, v, u, vbar);
    if corner.norm() == 0.0 {
        return Err(Error::singular("kappa_bulk(u_bar, v | u, v_bar) = 0 in K12"));
    }
    let weight = weight_bulk(args.x, args.x_bar, u, vbar);
    k12_assemble(
        |a, b| Ok(kappa_bulk(a, b, u, vbar)),
        weight,
        corner,
        ubar,
        v,
        args.x_bar,
        args.y,
    )
}

/// `ω^edge(x, x̄ | λ, λ̄) = (1/π)(1 + (x-λ)(x̄-λ̄)) e^{-x x̄}`, the same function as ω.
pub fn weight_edge(x: Complex64, x_bar: Complex64, lam: Complex64, lam_bar: Complex64) -> Complex64 {
    weight_omega(x, x_bar, lam, lam_bar)
}

/// Distance to the removable singularity below which κ^edge is evaluated by circle averages.
pub const EDGE_NEAR: f64 = 0.1;
const EDGE_RADIUS: f64 = 0.3;
const EDGE_NODES: usize = 32;

fn kappa_edge_direct(x_bar: Complex64, y: Complex64, lam: Complex64, lam_bar: Complex64) -> Result<Complex64> {
    let d = lam - y;
    let db = lam_bar - x_bar;
    let h = specfun::h_edge(lam + lam_bar, lam + x_bar, y + lam_bar, y + x_bar, d * db)?;
    Ok((x_bar * y).exp() * h / (d * d * db * db))
}

/// `κ^edge(x̄, y | λ, λ̄) = e^{x̄y} H(λ+λ̄, λ+x̄, y+λ̄, y+x̄, (λ-y)(λ̄-x̄)) / ((λ-y)²(λ̄-x̄)²)`.
///
/// The function is entire in `x̄` and `y`, but the quotient loses all digits as `y → λ` or
/// `x̄ → λ̄`. Near either point the value is taken as the mean over a circle of radius 0.3
/// (trapezoid rule, exact to rounding for entire functions of this growth).
pub fn kappa_edge(x_bar: Complex64, y: Complex64, lam: Complex64, lam_bar: Complex64) -> Result<Complex64> {
    let near_y = (lam - y).norm() < EDGE_NEAR;
    let near_x = (lam_bar - x_bar).norm() < EDGE_NEAR;
    let nodes: Vec<Complex64> = (0..EDGE_NODES)
        .map(|j| Complex64::from_polar(EDGE_RADIUS, 2.0 * PI * j as f64 / EDGE_NODES as f64))
        .collect();
    match (near_x, near_y) {
        (false, false) => kappa_edge_direct(x_bar, y, lam, lam_bar),
        (false, true) => {
            let mut acc = c(0.0, 0.0);
            for t in &nodes {
                acc += kappa_edge_direct(x_bar, y + t, lam, lam_bar)?;
            }
            Ok(acc / EDGE_NODES as f64)
        }
        (true, false) => {
            let mut acc = c(0.0, 0.0);
            for t in &nodes {
                acc += kappa_edge_direct(x_bar + t, y, lam, lam_bar)?;
            }
            Ok(acc / EDGE_NODES as f64)
        }
        (true, true) => {
            let mut acc = c(0.0, 0.0);
            for s in &nodes {
                for t in &nodes {
                    acc += kappa_edge_direct(x_bar + s, y + t, lam, lam_bar)?;
                }
            }
            Ok(acc / (EDGE_NODES * EDGE_NODES) as f64)
        }
    }
}

pub fn k11_edge(args: &KernelArgs, cond: SpectralPoint) -> Result<Complex64> {
    Ok(weight_edge(args.x, args.x_bar, cond.lam, cond.lam_bar)
        * kappa_edge(args.x_bar, args.y, cond.lam, cond.lam_bar)?)
}

pub fn k12_edge(args: &KernelArgs, p1: SpectralPoint, p2: SpectralPoint) -> Result<Complex64> {
    let (u, ubar, v, vbar) = (p1.lam, p1.lam_bar, p2.lam, p2.lam_bar);
    let corner = kappa_edge(ubar, v, u, vbar)?;
    if corner.norm() == 0.0 {
        return Err(Error::singular("kappa_edge(u_bar, v | u, v_bar) = 0 in K12"));
    }
    let weight = weight_edge(args.x, args.x_bar, u, vbar);
    k12_assemble(|a, b| kappa_edge(a, b, u, vbar), weight, corner, ubar, v, args.x_bar, args.y)
}

/// Eigenvalue kernel `K_ev(x, y) = (1/π) e^{-|x|²} e_{N-1}(x̄ y)`.
pub fn k_ev(n: u64, x: Complex64, y: Complex64) -> ScaledComplex {
    ScaledComplex::exp(c(-x.norm_sqr(), 0.0)) * specfun::exp_poly(n as i64 - 1, x.conj() * y) * FRAC_1_PI
}

/// Symmetrized variant `(1/π) e^{-(|x|²+|y|²)/2} e_{N-1}(x̄ y)`; same correlation functions.
pub fn k_ev_symmetrized(n: u64, x: Complex64, y: Complex64) -> ScaledComplex {
    ScaledComplex::exp(c(-0.5 * (x.norm_sqr() + y.norm_sqr()), 0.0))
        * specfun::exp_poly(n as i64 - 1, x.conj() * y)
        * FRAC_1_PI
}
