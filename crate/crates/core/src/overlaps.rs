//! Conditional overlaps D₁₁, D₁₂ at finite N and in the bulk and edge limits, their large
//! separation asymptotics and derivative representations, eigenvalue correlation functions,
//! and the Chalker–Mehlig expressions conditioned on every eigenvalue.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{self, KernelArgs, SpectralPoint};
use crate::linalg;
use crate::quadrature::{self, Adaptive};
use crate::scaledarith::ScaledComplex;
use crate::specfun;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// An ordered tuple of spectral points `(λ₁, λ̄₁), …, (λ_k, λ̄_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralTuple {
    pub points: Vec<SpectralPoint>,
}

impl SpectralTuple {
    pub fn new(points: Vec<SpectralPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("a spectral tuple needs k >= 1 points"));
        }
        Ok(SpectralTuple { points })
    }

    /// Points on the physical surface `λ̄ = conj(λ)`.
    pub fn physical(lams: &[Complex64]) -> Result<Self> {
        Self::new(lams.iter().map(|&l| SpectralPoint::physical(l)).collect())
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn lam(&self, i: usize) -> Complex64 {
        self.points[i].lam
    }

    pub fn lam_bar(&self, i: usize) -> Complex64 {
        self.points[i].lam_bar
    }

    /// Applies `λ_m → λ_m + μ`, `λ̄_m → λ̄_m + μ̄` to every point.
    pub fn shifted(&self, mu: Complex64, mu_bar: Complex64) -> Self {
        SpectralTuple {
            points: self.points.iter().map(|p| p.shifted(mu, mu_bar)).collect(),
        }
    }

    /// Edge coordinates `e^{iθ}(√N + λ_m)` for every point.
    pub fn to_edge(&self, n: f64, theta: f64) -> Self {
        SpectralTuple {
            points: self.points.iter().map(|p| p.to_edge(n, theta)).collect(),
        }
    }

    fn need_k(&self, lo: usize, what: &str) -> Result<()> {
        if self.k() < lo {
            return Err(Error::invalid(format!("{what} needs k >= {lo}, got {}", self.k())));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverlapKind {
    D11,
    D12,
    Rho,
    ConditionalExpectation,
}

#[derive(Clone, Copy, Debug)]
pub struct OverlapValue {
    pub value: ScaledComplex,
    pub kind: OverlapKind,
}

impl OverlapValue {
    fn new(value: impl Into<ScaledComplex>, kind: OverlapKind) -> Self {
        OverlapValue {
            value: value.into(),
            kind,
        }
    }

    pub fn to_complex(&self) -> Result<Complex64> {
        self.value.to_complex()
    }
}

/// `T̂`: exchanges `λ̄₁` and `λ̄₂`; points 1 and 2 become decoupled.
pub fn t_swap(lams: &SpectralTuple) -> Result<SpectralTuple> {
    lams.need_k(2, "t_swap")?;
    let mut points = lams.points.clone();
    let (b1, b2) = (points[0].lam_bar, points[1].lam_bar);
    points[0] = SpectralPoint::decoupled(points[0].lam, b2);
    points[1] = SpectralPoint::decoupled(points[1].lam, b1);
    Ok(SpectralTuple { points })
}

fn scaled_minor<F>(lams: &SpectralTuple, from: usize, entry: F) -> Result<ScaledComplex>
where
    F: Fn(SpectralPoint, SpectralPoint) -> Result<ScaledComplex>,
{
    let pts = &lams.points[from..];
    let mut rows = Vec::with_capacity(pts.len());
    for &p in pts {
        let mut row = Vec::with_capacity(pts.len());
        for &q in pts {
            row.push(entry(p, q)?);
        }
        rows.push(row);
    }
    Ok(linalg::det_scaled(&rows))
}

fn native_minor<F>(lams: &SpectralTuple, from: usize, entry: F) -> Result<Complex64>
where
    F: Fn(SpectralPoint, SpectralPoint) -> Result<Complex64>,
{
    let pts = &lams.points[from..];
    let m = pts.len();
    let mut a = Vec::with_capacity(m * m);
    for &p in pts {
        for &q in pts {
            a.push(entry(p, q)?);
        }
    }
    Ok(linalg::det(a, m))
}

fn check_order(n: u64, lams: &SpectralTuple) -> Result<()> {
    if n == 0 || lams.k() as u64 > n {
        return Err(Error::invalid(format!("need 1 <= k <= N, got k = {} and N = {n}", lams.k())));
    }
    Ok(())
}

/// `D₁₁^(N,k) = f_{N-1}(λ₁λ̄₁) e^{-λ₁λ̄₁}/π · det_{2≤i,j≤k} K₁₁^(N-1)(λ_i, λ̄_i, λ_j, λ̄_j | λ₁, λ̄₁)`.
pub fn d11_finite(n: u64, lams: &SpectralTuple) -> Result<OverlapValue> {
    check_order(n, lams)?;
    let p1 = lams.points[0];
    let x = p1.lam * p1.lam_bar;
    let pref = specfun::f_poly(n - 1, x) * ScaledComplex::exp(-x) * FRAC_1_PI;
    let det = scaled_minor(lams, 1, |p, q| kernels::k11_finite(n - 1, &KernelArgs::from_points(p, q), p1))?;
    Ok(OverlapValue::new(pref * det, OverlapKind::D11))
}

/// `D₁₂^(N,k) = -e^{-λ₁λ̄₁-λ₂λ̄₂}/π² f_{N-1}(λ₁λ̄₂) κ^(N-1)(λ̄₁, λ₂ | λ₁, λ̄₂) · det_{3≤i,j≤k} K₁₂^(N-1)`.
pub fn d12_finite(n: u64, lams: &SpectralTuple) -> Result<OverlapValue> {
    check_order(n, lams)?;
    lams.need_k(2, "d12_finite")?;
    let (p1, p2) = (lams.points[0], lams.points[1]);
    let e = ScaledComplex::exp(-p1.lam * p1.lam_bar - p2.lam * p2.lam_bar);
    let f = specfun::f_poly(n - 1, p1.lam * p2.lam_bar);
    let kap = kernels::kappa_finite(n - 1, p1.lam_bar, p2.lam, p1.lam, p2.lam_bar)?;
    let pref = -(e * f * kap) * (FRAC_1_PI * FRAC_1_PI);
    let det = scaled_minor(lams, 2, |p, q| kernels::k12_finite(n - 1, &KernelArgs::from_points(p, q), p1, p2))?;
    Ok(OverlapValue::new(pref * det, OverlapKind::D12))
}

/// `-e^{-λ₁₂λ̄₁₂}/(1 - λ₁₂λ̄₁₂)`, the factor relating D₁₂ to `T̂` D₁₁.
pub fn lemma1_factor(lams: &SpectralTuple) -> Result<Complex64> {
    lams.need_k(2, "lemma1_factor")?;
    let s = (lams.lam(0) - lams.lam(1)) * (lams.lam_bar(0) - lams.lam_bar(1));
    if (c(1.0, 0.0) - s).norm() == 0.0 {
        return Err(Error::singular("1 - lam12 lam12_bar = 0"));
    }
    Ok(-(-s).exp() / (c(1.0, 0.0) - s))
}

/// `-e^{-λ₁₂λ̄₁₂}/(1 - λ₁₂λ̄₁₂) · T̂ D₁₁^(N,k)`, which equals D₁₂^(N,k) identically.
pub fn d12_via_swap(n: u64, lams: &SpectralTuple) -> Result<ScaledComplex> {
    let f = lemma1_factor(lams)?;
    Ok(d11_finite(n, &t_swap(lams)?)?.value * f)
}

/// `D₁₁^(bulk,k) = (1/π) det_{2≤i,j≤k} K₁₁^bulk(λ_i, λ̄_i, λ_j, λ̄_j | λ₁, λ̄₁)`.
pub fn d11_bulk(lams: &SpectralTuple) -> Result<OverlapValue> {
    let p1 = lams.points[0];
    let det = native_minor(lams, 1, |p, q| Ok(kernels::k11_bulk(&KernelArgs::from_points(p, q), p1)))?;
    Ok(OverlapValue::new(det * FRAC_1_PI, OverlapKind::D11))
}

/// `D₁₂^(bulk,k) = -(1/π²) κ^bulk(λ̄₁, λ₂ | λ₁, λ̄₂) det_{3≤i,j≤k} K₁₂^bulk`.
pub fn d12_bulk(lams: &SpectralTuple) -> Result<OverlapValue> {
    lams.need_k(2, "d12_bulk")?;
    let (p1, p2) = (lams.points[0], lams.points[1]);
    let kap = kernels::kappa_bulk(p1.lam_bar, p2.lam, p1.lam, p2.lam_bar);
    let det = native_minor(lams, 2, |p, q| kernels::k12_bulk(&KernelArgs::from_points(p, q), p1, p2))?;
    Ok(OverlapValue::new(-kap * det * (FRAC_1_PI * FRAC_1_PI), OverlapKind::D12))
}

/// The k = 1 edge overlap `(e^{-a²/2} - √(2π) a F(a))/√(2π³)` at `a = λ + λ̄`.
pub fn edge_d11_prefactor(lam: Complex64, lam_bar: Complex64) -> Complex64 {
    let a = lam + lam_bar;
    ((-a * a * 0.5).exp() - a * specfun::erfc_f(a) * SQRT_2PI) / (SQRT_2PI * PI)
}

/// `D₁₁^(edge,k)`: the k = 1 prefactor times `det_{2≤i,j≤k} K₁₁^edge`.
pub fn d11_edge(lams: &SpectralTuple) -> Result<OverlapValue> {
    let p1 = lams.points[0];
    let pref = edge_d11_prefactor(p1.lam, p1.lam_bar);
    let det = native_minor(lams, 1, |p, q| kernels::k11_edge(&KernelArgs::from_points(p, q), p1))?;
    Ok(OverlapValue::new(pref * det, OverlapKind::D11))
}

/// The k = 2 edge value of D₁₂,
/// `-(1 - √(2π) a e^{a²/2} F(a))/√(2π⁵) · e^{-λ₁₂λ̄₁₂ - a²/2}/(λ₁₂²λ̄₁₂²) · H(a, λ₁+λ̄₁, λ₂+λ̄₂, λ₂+λ̄₁, -λ₁₂λ̄₁₂)`
/// with `a = λ₁ + λ̄₂`.
pub fn edge_d12_prefactor(p1: SpectralPoint, p2: SpectralPoint) -> Result<Complex64> {
    let a = p1.lam + p2.lam_bar;
    let l12 = p1.lam - p2.lam;
    let lb12 = p1.lam_bar - p2.lam_bar;
    let s = l12 * lb12;
    if s.norm() == 0.0 {
        return Err(Error::singular("lam12 lam12_bar = 0 in the edge D12 prefactor"));
    }
    let h = specfun::h_edge(a, p1.lam + p1.lam_bar, p2.lam + p2.lam_bar, p2.lam + p1.lam_bar, -s)?;
    let bracket = c(1.0, 0.0) - a * specfun::erfc_f_scaled(a) * SQRT_2PI;
    Ok(-bracket * (-s - a * a * 0.5).exp() / (s * s) * h / (SQRT_2PI * PI * PI))
}

/// `D₁₂^(edge,k)`: the k = 2 value times `det_{3≤i,j≤k} K₁₂^edge`.
pub fn d12_edge(lams: &SpectralTuple) -> Result<OverlapValue> {
    lams.need_k(2, "d12_edge")?;
    let (p1, p2) = (lams.points[0], lams.points[1]);
    let pref = edge_d12_prefactor(p1, p2)?;
    let det = native_minor(lams, 2, |p, q| kernels::k12_edge(&KernelArgs::from_points(p, q), p1, p2))?;
    Ok(OverlapValue::new(pref * det, OverlapKind::D12))
}

fn check_separated(lams: &SpectralTuple) -> Result<()> {
    for i in 0..lams.k() {
        for j in 0..i {
            if lams.lam(i) == lams.lam(j) || lams.lam_bar(i) == lams.lam_bar(j) {
                return Err(Error::singular(format!("points {j} and {i} coincide")));
            }
        }
    }
    Ok(())
}

/// `π^{-k} Π_{m≥2} (1 - 1/|λ_{m1}|⁴)`.
pub fn d11_bulk_asymptotic(lams: &SpectralTuple) -> Result<OverlapValue> {
    check_separated(lams)?;
    let k = lams.k();
    let mut acc = c(FRAC_1_PI.powi(k as i32), 0.0);
    for m in 1..k {
        let s = (lams.lam(m) - lams.lam(0)) * (lams.lam_bar(m) - lams.lam_bar(0));
        acc *= c(1.0, 0.0) - (s * s).inv();
    }
    Ok(OverlapValue::new(acc, OverlapKind::D11))
}

/// `-π^{-k} |λ₁₂|^{-4} Π_{m≥3} (1 - 1/(λ_{m1}² λ̄_{m2}²))`.
pub fn d12_bulk_asymptotic(lams: &SpectralTuple) -> Result<OverlapValue> {
    lams.need_k(2, "d12_bulk_asymptotic")?;
    check_separated(lams)?;
    let k = lams.k();
    let s12 = (lams.lam(0) - lams.lam(1)) * (lams.lam_bar(0) - lams.lam_bar(1));
    let mut acc = -c(FRAC_1_PI.powi(k as i32), 0.0) / (s12 * s12);
    for m in 2..k {
        let t = (lams.lam(m) - lams.lam(0)) * (lams.lam_bar(m) - lams.lam_bar(1));
        acc *= c(1.0, 0.0) - (t * t).inv();
    }
    Ok(OverlapValue::new(acc, OverlapKind::D12))
}

/// `ρ^(N,k) = det K_ev(λ_i, λ_j)` with `K_ev(x, y) = (1/π) e^{-x x̄} e_{N-1}(x̄ y)`.
pub fn rho_finite(n: u64, lams: &SpectralTuple) -> Result<OverlapValue> {
    check_order(n, lams)?;
    let det = scaled_minor(lams, 0, |p, q| {
        Ok(ScaledComplex::exp(-p.lam * p.lam_bar) * specfun::exp_poly(n as i64 - 1, p.lam_bar * q.lam) * FRAC_1_PI)
    })?;
    Ok(OverlapValue::new(det, OverlapKind::Rho))
}

/// `ρ^bulk = π^{-k} det(e^{λ̄_i λ_j - λ_j λ̄_j})`.
pub fn rho_bulk(lams: &SpectralTuple) -> Result<OverlapValue> {
    let det = bulk_density_det(lams, &[]);
    Ok(OverlapValue::new(det * FRAC_1_PI.powi(lams.k() as i32), OverlapKind::Rho))
}

/// `det(e^{λ̄_i λ_j - λ_j λ̄_j})` with column `j` multiplied by `λ̄_i - λ̄_j` for every `j` in
/// `differentiated`; this is the mixed derivative `∂/∂λ_j` of the determinant.
fn bulk_density_det(lams: &SpectralTuple, differentiated: &[usize]) -> Complex64 {
    let k = lams.k();
    let mut a = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let mut v = (lams.lam_bar(i) * lams.lam(j) - lams.lam(j) * lams.lam_bar(j)).exp();
            if differentiated.contains(&j) {
                v *= lams.lam_bar(i) - lams.lam_bar(j);
            }
            a.push(v);
        }
    }
    linalg::det(a, k)
}

/// `E(O | λ) = D₁₁^(N,k)/ρ^(N,k)`, real on the physical surface.
pub fn conditional_expectation_d11(n: u64, lams: &SpectralTuple) -> Result<f64> {
    let d = d11_finite(n, lams)?.value;
    let r = rho_finite(n, lams)?.value;
    if r.is_zero() {
        return Err(Error::singular("rho vanishes"));
    }
    Ok((d / r).to_complex()?.re)
}

fn check_all_distinct(lams: &SpectralTuple) -> Result<()> {
    check_separated(lams)
}

/// `p_N(λ) = |Δ(λ)|² e^{-Σ|λ_j|²}/Z_N` with `Z_N = π^N Π_{j≤N} j!`.
pub fn joint_density(lams: &SpectralTuple) -> ScaledComplex {
    let n = lams.k();
    let mut acc = ScaledComplex::ONE;
    let mut expo = c(0.0, 0.0);
    for i in 0..n {
        expo -= lams.lam(i) * lams.lam_bar(i);
        for j in 0..i {
            acc *= (lams.lam(i) - lams.lam(j)) * (lams.lam_bar(i) - lams.lam_bar(j));
        }
    }
    let ln_z: f64 = n as f64 * PI.ln() + (1..=n as u64).map(specfun::ln_factorial).sum::<f64>();
    acc * ScaledComplex::exp(expo - ln_z)
}

/// `D₁₁^(N,N) = N! Π_{k≥2}(1 + 1/|λ₁ - λ_k|²) p_N`.
pub fn cm_conditional_d11(n: u64, all_lams: &SpectralTuple) -> Result<OverlapValue> {
    if all_lams.k() as u64 != n {
        return Err(Error::invalid("cm_conditional_d11 needs all N eigenvalues"));
    }
    check_all_distinct(all_lams)?;
    let mut prod = c(1.0, 0.0);
    for m in 1..all_lams.k() {
        let s = (all_lams.lam(0) - all_lams.lam(m)) * (all_lams.lam_bar(0) - all_lams.lam_bar(m));
        prod *= c(1.0, 0.0) + s.inv();
    }
    let v = joint_density(all_lams) * prod * ScaledComplex::exp(c(specfun::ln_factorial(n), 0.0));
    Ok(OverlapValue::new(v, OverlapKind::D11))
}

/// `D₁₂^(N,N) = -N!/|λ₁ - λ₂|² Π_{k≥3}(1 + 1/((λ₁ - λ_k)(λ̄₂ - λ̄_k))) p_N`.
pub fn cm_conditional_d12(n: u64, all_lams: &SpectralTuple) -> Result<OverlapValue> {
    if all_lams.k() as u64 != n || n < 2 {
        return Err(Error::invalid("cm_conditional_d12 needs all N >= 2 eigenvalues"));
    }
    check_all_distinct(all_lams)?;
    let s12 = (all_lams.lam(0) - all_lams.lam(1)) * (all_lams.lam_bar(0) - all_lams.lam_bar(1));
    let mut prod = -s12.inv();
    for m in 2..all_lams.k() {
        let t = (all_lams.lam(0) - all_lams.lam(m)) * (all_lams.lam_bar(1) - all_lams.lam_bar(m));
        prod *= c(1.0, 0.0) + t.inv();
    }
    let v = joint_density(all_lams) * prod * ScaledComplex::exp(c(specfun::ln_factorial(n), 0.0));
    Ok(OverlapValue::new(v, OverlapKind::D12))
}

/// `(1/(N-k)!) ∫ D^(N,N)(λ₁..λ_k, z_{k+1}..z_N) d²z` over disks of radius 8, by node doubling.
/// `which` selects D₁₁ or D₁₂; the fixed points must be physical.
pub fn integrate_cm_conditional(n: u64, fixed: &SpectralTuple, which: OverlapKind, tol: f64) -> Result<Adaptive> {
    let k = fixed.k();
    if k as u64 > n {
        return Err(Error::invalid("more fixed points than eigenvalues"));
    }
    let free = n as usize - k;
    let norm = (-specfun::ln_factorial(free as u64)).exp();
    let eval = |z: &[Complex64]| -> Complex64 {
        let mut pts = fixed.points.clone();
        pts.extend(z.iter().map(|&w| SpectralPoint::physical(w)));
        let all = SpectralTuple { points: pts };
        let v = match which {
            OverlapKind::D12 => cm_conditional_d12(n, &all),
            _ => cm_conditional_d11(n, &all),
        };
        // coincident nodes have measure zero; the integrand is bounded there
        v.map(|v| v.value.to_complex_lossy()).unwrap_or(c(0.0, 0.0)) * norm
    };
    Ok(quadrature::integrate_disks(free, 8.0, tol, 4, eval))
}

/// Expands `Π_{m ∈ ops} (a_m - b_m ∂/∂λ_m)` applied to `π^k ρ^bulk` over subsets of `ops`.
fn apply_operators(lams: &SpectralTuple, ops: &[(usize, Complex64, Complex64)]) -> Complex64 {
    let r = ops.len();
    let mut acc = c(0.0, 0.0);
    for mask in 0..(1usize << r) {
        let mut coeff = c(1.0, 0.0);
        let mut diff = Vec::with_capacity(r);
        for (bit, &(m, a, b)) in ops.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                coeff *= -b;
                diff.push(m);
            } else {
                coeff *= a;
            }
        }
        acc += coeff * bulk_density_det(lams, &diff);
    }
    acc
}

/// D₁₁^bulk as `(-1)^{k-1} Π_{m≥2} (1+|λ_{m1}|²)/|λ_{m1}|⁴ (1 - |λ_{m1}|² - λ_{m1} ∂/∂λ_m) ρ^bulk`, k ≤ 3.
pub fn d11_bulk_via_derivatives(lams: &SpectralTuple) -> Result<OverlapValue> {
    let k = lams.k();
    if k > 3 {
        return Err(Error::invalid("derivative representation is implemented for k <= 3"));
    }
    check_separated(lams)?;
    let mut pref = c(if k % 2 == 1 { 1.0 } else { -1.0 }, 0.0);
    let mut ops = Vec::new();
    for m in 1..k {
        let l = lams.lam(m) - lams.lam(0);
        let s = l * (lams.lam_bar(m) - lams.lam_bar(0));
        pref *= (c(1.0, 0.0) + s) / (s * s);
        ops.push((m, c(1.0, 0.0) - s, l));
    }
    let v = pref * apply_operators(lams, &ops) * FRAC_1_PI.powi(k as i32);
    Ok(OverlapValue::new(v, OverlapKind::D11))
}

/// D₁₂^bulk as `(-1)^{k-1}/|λ₁₂|⁴ (1 - λ₂₁ ∂/∂λ₂) Π_{m≥3} (1+λ_{m1}λ̄_{m2})/(λ_{m1}²λ̄_{m2}²)
/// (1 - λ_{m1}λ̄_{m2} - λ_{m1} ∂/∂λ_m) ρ^bulk`, k = 2, 3.
pub fn d12_bulk_via_derivatives(lams: &SpectralTuple) -> Result<OverlapValue> {
    let k = lams.k();
    if !(2..=3).contains(&k) {
        return Err(Error::invalid("derivative representation of D12 is implemented for k = 2, 3"));
    }
    check_separated(lams)?;
    let s12 = (lams.lam(0) - lams.lam(1)) * (lams.lam_bar(0) - lams.lam_bar(1));
    let mut pref = c(if k % 2 == 1 { 1.0 } else { -1.0 }, 0.0) / (s12 * s12);
    let mut ops = vec![(1, c(1.0, 0.0), lams.lam(1) - lams.lam(0))];
    for m in 2..k {
        let l = lams.lam(m) - lams.lam(0);
        let t = l * (lams.lam_bar(m) - lams.lam_bar(1));
        pref *= (c(1.0, 0.0) + t) / (t * t);
        ops.push((m, c(1.0, 0.0) - t, l));
    }
    let v = pref * apply_operators(lams, &ops) * FRAC_1_PI.powi(k as i32);
    Ok(OverlapValue::new(v, OverlapKind::D12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d11_single_point() {
        let t = SpectralTuple::physical(&[c(0.0, 0.0)]).unwrap();
        let v = d11_finite(7, &t).unwrap().to_complex().unwrap();
        assert!((v - c(7.0 / PI, 0.0)).norm() < 1e-14);
        let l = c(0.4, -1.1);
        let t = SpectralTuple::physical(&[l]).unwrap();
        let v = d11_finite(1, &t).unwrap().to_complex().unwrap();
        assert!((v.re - (-l.norm_sqr()).exp() / PI).abs() < 1e-15);
    }

    #[test]
    fn swap_is_involution() {
        let t = SpectralTuple::physical(&[c(0.1, 0.2), c(-1.0, 0.5), c(2.0, 0.0)]).unwrap();
        let s = t_swap(&t).unwrap();
        assert!(s.points[0].decoupled && s.points[1].decoupled && !s.points[2].decoupled);
        assert_eq!(s.lam_bar(0), t.lam_bar(1));
        let back = t_swap(&s).unwrap();
        for i in 0..3 {
            assert_eq!(back.lam(i), t.lam(i));
            assert_eq!(back.lam_bar(i), t.lam_bar(i));
        }
    }

    #[test]
    fn asymptotic_small_k() {
        let t = SpectralTuple::physical(&[c(0.3, 0.3)]).unwrap();
        assert!((d11_bulk_asymptotic(&t).unwrap().to_complex().unwrap().re - FRAC_1_PI).abs() < 1e-16);
        let l = 2.5;
        let t = SpectralTuple::physical(&[c(0.0, 0.0), c(0.0, l)]).unwrap();
        let v = d11_bulk_asymptotic(&t).unwrap().to_complex().unwrap();
        assert!((v.re - (1.0 - l.powi(-4)) / (PI * PI)).abs() < 1e-16);
    }

    #[test]
    fn rho_bulk_pair() {
        let l: f64 = 1.3;
        let t = SpectralTuple::physical(&[c(0.2, 0.0), c(0.2 + l, 0.0)]).unwrap();
        let v = rho_bulk(&t).unwrap().to_complex().unwrap();
        assert!((v.re - (1.0 - (-l * l).exp()) / (PI * PI)).abs() < 1e-15);
    }
}
