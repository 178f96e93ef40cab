//! Exponential polynomials, the f-polynomials, Φ_n, the three-variable polynomial 𝔉_n,
//! the Gaussian tail F and the edge function H.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scaledarith::ScaledComplex;

const EPS: f64 = f64::EPSILON;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Exponential polynomials are computed by whichever of three exact rearrangements has the
/// smallest rounding-error estimate; this is the relative estimate below which the plain forward
/// sum is accepted without trying the others.
const ACCEPT_DIRECT: f64 = 64.0 * EPS;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `ln(n!)`, tabulated for small `n` and from Stirling's series above.
pub fn ln_factorial(n: u64) -> f64 {
    const TABLE: usize = 4096;
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = CACHE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    if (n as usize) < TABLE {
        return table[n as usize];
    }
    let x = n as f64 + 1.0;
    let x2 = x * x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x2 * x2 * x)
}

/// Result of a series evaluation with a first-order rounding-error estimate.
#[derive(Clone, Copy, Debug)]
struct Estimate {
    value: ScaledComplex,
    /// estimated relative error
    rel_err: f64,
}

impl Estimate {
    fn new(value: ScaledComplex, ln_abs_err: f64) -> Self {
        let rel_err = if value.is_zero() {
            if ln_abs_err == f64::NEG_INFINITY { 0.0 } else { f64::INFINITY }
        } else {
            (ln_abs_err - value.ln_abs()).exp()
        };
        Estimate { value, rel_err }
    }
}

/// Forward sum `Σ_{k≤p} w(k) x^k/k!` in native arithmetic with a running rescale.
fn forward_sum(p: u64, x: Complex64, w: impl Fn(u64) -> f64) -> Estimate {
    const BIG: f64 = 1e200;
    let ln_big = BIG.ln();
    let mut term = c(1.0, 0.0);
    let mut sum = term * w(0);
    let mut abs = w(0).abs();
    let mut shift = 0.0;
    for k in 1..=p {
        term *= x / k as f64;
        if term.norm() > BIG {
            term /= BIG;
            sum /= BIG;
            abs /= BIG;
            shift += ln_big;
        }
        let wk = w(k);
        sum += term * wk;
        abs += term.norm() * wk.abs();
    }
    let value = ScaledComplex::new(sum, shift);
    // rounding grows at most linearly with the number of terms; sqrt is the typical case
    let ln_err = (abs * EPS * (p as f64 + 1.0).sqrt()).ln() + shift;
    Estimate::new(value, ln_err)
}

/// `x^n/n!` as a scaled value.
fn power_over_factorial(n: u64, x: Complex64) -> ScaledComplex {
    if n == 0 {
        return ScaledComplex::ONE;
    }
    if x == c(0.0, 0.0) {
        return ScaledComplex::ZERO;
    }
    let l = x.ln() * n as f64 - ln_factorial(n);
    ScaledComplex::exp(l)
}

/// `e_p(x) = e^x - x^{p+1}/(p+1)! Σ_j x^j/((p+2)...(p+1+j))`, valid for `|x| < p + 2`.
fn tail_form(p: u64, x: Complex64) -> Option<Estimate> {
    let r = x.norm();
    if r >= p as f64 + 2.0 {
        return None;
    }
    let lead = power_over_factorial(p + 1, x);
    let mut term = c(1.0, 0.0);
    let mut s = term;
    let mut j = 0u64;
    loop {
        j += 1;
        term *= x / (p + 1 + j) as f64;
        s += term;
        if term.norm() < 1e-17 * s.norm() || j > 200_000 {
            break;
        }
    }
    let tail = lead * s;
    let ex = ScaledComplex::exp(x);
    let value = ex - tail;
    let ln_err = (ex.ln_abs().max(tail.ln_abs())) + (4.0 * EPS).ln();
    Some(Estimate::new(value, ln_err))
}

/// `e_p(x) = x^p/p! Σ_{j≤p} p!/(p-j)! x^{-j}`, the exact sum read backwards; useful for `|x| > p`.
fn reverse_form(p: u64, x: Complex64) -> Option<Estimate> {
    if x.norm() < 1.0 {
        return None;
    }
    let lead = power_over_factorial(p, x);
    let inv = x.inv();
    let mut term = c(1.0, 0.0);
    let mut s = term;
    let mut abs = 1.0;
    for j in 1..=p {
        term *= inv * (p - j + 1) as f64;
        s += term;
        abs += term.norm();
        if !abs.is_finite() {
            return None;
        }
    }
    let value = lead * s;
    let ln_err = lead.ln_abs() + (abs * EPS * (p as f64 + 1.0).sqrt()).ln();
    Some(Estimate::new(value, ln_err))
}

fn best(cands: impl IntoIterator<Item = Option<Estimate>>) -> Estimate {
    cands
        .into_iter()
        .flatten()
        .min_by(|a, b| a.rel_err.total_cmp(&b.rel_err))
        .expect("at least one candidate")
}

fn exp_poly_estimate(p: u64, x: Complex64) -> Estimate {
    let direct = forward_sum(p, x, |_| 1.0);
    if direct.rel_err <= ACCEPT_DIRECT {
        return direct;
    }
    best([Some(direct), tail_form(p, x), reverse_form(p, x)])
}

/// Exponential polynomial `e_p(x) = Σ_{k≤p} x^k/k!`, with `e_{-1} = 0`.
///
/// Uses the forward sum when it is well conditioned and otherwise the incomplete-gamma
/// rearrangement `e^x - tail` or the reversed sum, picking the one with the smallest rounding
/// estimate. The result is scaled, so `p ~ |x| ~ 10^4` is fine.
pub fn exp_poly(p: i64, x: Complex64) -> ScaledComplex {
    if p < 0 {
        return ScaledComplex::ZERO;
    }
    exp_poly_estimate(p as u64, x).value
}

/// `e_p(x) e^{-x}`, the regularized upper incomplete gamma ratio `Γ(p+1, x)/Γ(p+1)`.
pub fn exp_poly_regularized(p: i64, x: Complex64) -> ScaledComplex {
    exp_poly(p, x) * ScaledComplex::exp(-x)
}

/// `f_p(x) = (p+1) e_p(x) - x e_{p-1}(x) = Σ_{k≤p} (p+1-k) x^k/k!`.
pub fn f_poly(p: u64, x: Complex64) -> ScaledComplex {
    let direct = forward_sum(p, x, |k| (p + 1 - k) as f64);
    if direct.rel_err <= ACCEPT_DIRECT {
        return direct.value;
    }
    let ep = exp_poly_estimate(p, x);
    let em = if p == 0 {
        Estimate { value: ScaledComplex::ZERO, rel_err: 0.0 }
    } else {
        exp_poly_estimate(p - 1, x)
    };
    let a = ep.value.scale((p + 1) as f64);
    let b = em.value * x;
    let value = a - b;
    let ln_err = (a.ln_abs() + (ep.rel_err + EPS).ln()).max(b.ln_abs() + (em.rel_err + EPS).ln());
    let combined = Estimate::new(value, ln_err);
    if combined.rel_err < direct.rel_err {
        combined.value
    } else {
        direct.value
    }
}

/// All of `e_0(x), ..., e_p(x)`.
///
/// Forward partial sums are kept where they are well conditioned; elsewhere the values are
/// recovered by peeling terms off an accurately computed `e_p(x)`.
pub fn exp_poly_all(p: u64, x: Complex64) -> Vec<ScaledComplex> {
    let mut terms = Vec::with_capacity(p as usize + 1);
    let mut sums = Vec::with_capacity(p as usize + 1);
    let mut abs_ln = Vec::with_capacity(p as usize + 1);
    let mut t = ScaledComplex::ONE;
    let mut s = ScaledComplex::ZERO;
    let mut a = ScaledComplex::ZERO;
    for k in 0..=p {
        if k > 0 {
            t = t * x / k as f64;
        }
        s += t;
        a += t.abs();
        terms.push(t);
        sums.push(s);
        abs_ln.push(a.ln_abs());
    }
    let forward_ok = |k: usize| abs_ln[k] - sums[k].ln_abs() + EPS.ln() <= ACCEPT_DIRECT.ln();
    if (0..=p as usize).all(forward_ok) {
        return sums;
    }
    let top = exp_poly_estimate(p, x);
    let mut out = sums.clone();
    let mut back = top.value;
    let mut back_err = top.value.abs().scale(top.rel_err + EPS);
    for k in (0..=p as usize).rev() {
        if k < p as usize {
            back -= terms[k + 1];
            back_err += terms[k + 1].abs().scale(EPS);
        }
        let fwd_err = abs_ln[k] + EPS.ln();
        if back_err.ln_abs() < fwd_err {
            out[k] = back;
        }
    }
    out
}

/// All of `f_0(x), ..., f_p(x)` from the exponential polynomials.
pub fn f_poly_all(p: u64, x: Complex64) -> Vec<ScaledComplex> {
    let e = exp_poly_all(p, x);
    (0..=p as usize)
        .map(|k| {
            let lead = e[k].scale((k + 1) as f64);
            if k == 0 {
                lead
            } else {
                lead - e[k - 1] * x
            }
        })
        .collect()
}

fn check_finite_nonzero(v: ScaledComplex, what: impl Fn() -> String) -> Result<ScaledComplex> {
    if v.is_zero() || !v.is_finite() {
        Err(Error::singular(what()))
    } else {
        Ok(v)
    }
}

/// `Φ_n(x) = Σ_{k≤n} x^k/((k+1)! f_k(x) f_{k+1}(x))` by direct summation; `Φ_{-1} = 0`.
pub fn phi_direct(n: i64, x: Complex64) -> Result<Complex64> {
    if n < 0 {
        return Ok(c(0.0, 0.0));
    }
    let n = n as u64;
    let fs = f_poly_all(n + 1, x);
    let mut acc = ScaledComplex::ZERO;
    for k in 0..=n {
        let fk = check_finite_nonzero(fs[k as usize], || format!("f_{k}({x}) = 0"))?;
        let fk1 = check_finite_nonzero(fs[k as usize + 1], || format!("f_{}({x}) = 0", k + 1))?;
        acc += power_over_factorial(k, x) / (fk * fk1 * (k + 1) as f64);
    }
    acc.to_complex()
}

/// Closed form `Φ_n(x) = (n+2-x)/(x² f_{n+1}(x)) + (x-1)/x²`.
pub fn phi_closed(n: u64, x: Complex64) -> Result<Complex64> {
    if x == c(0.0, 0.0) {
        return Err(Error::singular("phi_closed at x = 0"));
    }
    let f = check_finite_nonzero(f_poly(n + 1, x), || format!("f_{}({x}) = 0", n + 1))?;
    let x2 = x * x;
    let first = (ScaledComplex::from((c((n + 2) as f64, 0.0) - x) / x2) / f).to_complex()?;
    Ok(first + (x - 1.0) / x2)
}

/// Which evaluation of the removable singularity of 𝔉_n to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// polynomial quotient near `yz = 1`, quotient of differences elsewhere
    Auto,
    /// always the quotient of differences (fails at `yz = 1` exactly)
    Generic,
    /// always the exact polynomial quotient
    Limit,
}

/// The three summands of 𝔉_n in product coordinates together with a magnitude scale.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FrakTerms {
    pub value: ScaledComplex,
    /// `Σ |summand|`, the scale against which cancellation is measured
    pub scale: ScaledComplex,
}

/// `R = (W^{n+1} e_n(X) - X^{n+1} e_n(W)) / (X - W)` computed as a difference quotient.
fn quotient_generic(n: u64, x: Complex64, w: Complex64, en_x: ScaledComplex, en_w: ScaledComplex) -> ScaledComplex {
    let wp = ScaledComplex::from(w).powi(n as i32 + 1);
    let xp = ScaledComplex::from(x).powi(n as i32 + 1);
    (wp * en_x - xp * en_w) / (x - w)
}

/// The same quotient as an explicit polynomial,
/// `R = -Σ_{k≤n} (XW)^k/k! h_{n-k}(X, W)` with `h_m = Σ_{i+j=m} X^i W^j`.
fn quotient_polynomial(n: u64, x: Complex64, w: Complex64) -> ScaledComplex {
    let xs = ScaledComplex::from(x);
    let ws = ScaledComplex::from(w);
    let mut h = Vec::with_capacity(n as usize + 1);
    let mut xm = ScaledComplex::ONE;
    let mut prev = ScaledComplex::ONE;
    h.push(prev);
    for _ in 1..=n {
        xm *= xs;
        prev = xm + ws * prev;
        h.push(prev);
    }
    let xw = x * w;
    let mut acc = ScaledComplex::ZERO;
    let mut coeff = ScaledComplex::ONE;
    for k in 0..=n {
        if k > 0 {
            coeff = coeff * xw / k as f64;
        }
        acc += coeff * h[(n - k) as usize];
    }
    -acc
}

fn use_polynomial_quotient(n: u64, x: Complex64, w: Complex64) -> bool {
    let m = x.norm().max(w.norm());
    if m == 0.0 {
        return true;
    }
    // difference quotient loses ~1/(n rho) digits, the polynomial sum ~n rho
    (x - w).norm() * (n as f64 + 1.0) <= 2.0 * m
}

/// 𝔉_n in product coordinates `X = x`, `XY = xy`, `XZ = xz`, `W = xyz`, `S = x(1-y)(1-z)`.
pub(crate) fn frak_f_terms(
    n: u64,
    xx: Complex64,
    xy: Complex64,
    xz: Complex64,
    w: Complex64,
    s: Complex64,
    branch: Branch,
) -> FrakTerms {
    let en_x = exp_poly(n as i64, xx);
    let en_w = exp_poly(n as i64, w);
    let t1 = exp_poly(n as i64, xy) * exp_poly(n as i64, xz);
    let t2 = en_w * en_x * (c(1.0, 0.0) - s);
    let use_poly = match branch {
        Branch::Auto => use_polynomial_quotient(n, xx, w),
        Branch::Generic => false,
        Branch::Limit => true,
    };
    let r = if use_poly {
        quotient_polynomial(n, xx, w)
    } else {
        quotient_generic(n, xx, w, en_x, en_w)
    };
    let t3 = r * s * ScaledComplex::exp(c(-ln_factorial(n), 0.0));
    FrakTerms {
        value: t1 - t2 + t3,
        scale: t1.abs() + t2.abs() + t3.abs(),
    }
}

/// 𝔉_n(x, y, z) with the removable singularity at `yz = 1` handled by an exact polynomial quotient.
pub fn frak_f(n: u64, x: Complex64, y: Complex64, z: Complex64) -> ScaledComplex {
    frak_f_with_branch(n, x, y, z, Branch::Auto)
}

pub fn frak_f_with_branch(n: u64, x: Complex64, y: Complex64, z: Complex64, branch: Branch) -> ScaledComplex {
    let one = c(1.0, 0.0);
    frak_f_terms(n, x, x * y, x * z, x * y * z, x * (one - y) * (one - z), branch).value
}

/// `e_n(xy)e_n(xz) - e_n(xyz)e_n(x)(1 - x(1-y)(1-z))`, the part of 𝔉_n without the quotient.
pub fn frak_w_part(n: u64, x: Complex64, y: Complex64, z: Complex64) -> ScaledComplex {
    let one = c(1.0, 0.0);
    let s = x * (one - y) * (one - z);
    exp_poly(n as i64, x * y) * exp_poly(n as i64, x * z)
        - exp_poly(n as i64, x * y * z) * exp_poly(n as i64, x) * (one - s)
}

/// `(1-y)(1-z)/n! ((xyz)^{n+1}e_n(x) - x^{n+1}e_n(xyz))/(1-yz)`, the quotient part of 𝔉_n.
pub fn frak_h_part(n: u64, x: Complex64, y: Complex64, z: Complex64) -> ScaledComplex {
    frak_f(n, x, y, z) - frak_w_part(n, x, y, z)
}

/// `F(a) = erfc(a/√2)/2`, the standard Gaussian upper tail continued to complex `a`.
pub fn erfc_f(a: Complex64) -> Complex64 {
    (a / SQRT_2).erfc() * 0.5
}

/// `e^{a²/2} F(a)`, finite for every `a` where `F` is not astronomically large.
pub fn erfc_f_scaled(a: Complex64) -> Complex64 {
    (a / SQRT_2).erfcx() * 0.5
}

/// `F'(u) = -e^{-u²/2}/√(2π)`.
pub fn erfc_f_prime(u: Complex64) -> Complex64 {
    -(-u * u * 0.5).exp() / SQRT_2PI
}

/// `H(a, b, c, d, f)` with the x-derivative taken analytically.
pub fn h_edge(a: Complex64, b: Complex64, cc: Complex64, d: Complex64, f: Complex64) -> Result<Complex64> {
    let (fa, fb, fc, fd) = (erfc_f(a), erfc_f(b), erfc_f(cc), erfc_f(d));
    let (pa, pb, pc, pd) = (erfc_f_prime(a), erfc_f_prime(b), erfc_f_prime(cc), erfc_f_prime(d));
    let emf = (-f).exp();
    let b0 = emf * fb * fc - fd * fa + f * fd * fa;
    let b1 = emf * (pb * fc + fb * pc) - pd * fa - fd * pa + f * fd * pa;
    let g = (-a * a * 0.5).exp();
    let den = g - a * fa * SQRT_2PI;
    if den.norm() <= 1e-14 * (g.norm() + (a * fa).norm() * SQRT_2PI) {
        return Err(Error::singular(format!(
            "H: 1 - sqrt(2 pi) a exp(a^2/2) F(a) vanishes at a = {a}"
        )));
    }
    Ok(-(a * b0 + b1) * SQRT_2PI / den)
}

/// The bracket of H before differentiation: `e^{(a+x)²/2}(e^{-f}F(b+x)F(c+x) - F(d+x)F(a+x) + fF(d)F(a+x))`.
pub fn h_edge_bracket(x: Complex64, a: Complex64, b: Complex64, cc: Complex64, d: Complex64, f: Complex64) -> Complex64 {
    let e = ((a + x) * (a + x) * 0.5).exp();
    e * ((-f).exp() * erfc_f(b + x) * erfc_f(cc + x) - erfc_f(d + x) * erfc_f(a + x)
        + f * erfc_f(d) * erfc_f(a + x))
}

/// Richardson-extrapolated central difference of `g` at 0 with step `h`.
pub fn richardson_derivative(g: impl Fn(Complex64) -> Complex64, h: f64) -> Complex64 {
    let d = |h: f64| (g(c(h, 0.0)) - g(c(-h, 0.0))) / (2.0 * h);
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

/// H by numerical differentiation of the bracket; an independent check of [`h_edge`].
pub fn h_edge_finite_difference(a: Complex64, b: Complex64, cc: Complex64, d: Complex64, f: Complex64, step: f64) -> Result<Complex64> {
    let den = c(1.0, 0.0) - a * erfc_f_scaled(a) * SQRT_2PI;
    if den.norm() < 1e-14 {
        return Err(Error::singular("H prefactor"));
    }
    let deriv = richardson_derivative(|x| h_edge_bracket(x, a, b, cc, d, f), step);
    Ok(-deriv * SQRT_2PI / den)
}
