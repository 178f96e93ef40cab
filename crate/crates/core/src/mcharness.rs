//! Monte Carlo over Gin(N, ℂ): sampling, bi-orthonormal eigenvectors, the overlap matrix and
//! binned estimates of D₁₁^(N,1) and D₁₂^(N,2).
//!
//! Matrix `i` of a run is drawn from its own ChaCha stream `(seed, i)`. Work is cut into fixed
//! chunks whose partial sums are merged in index order, so results do not depend on the number
//! of worker threads.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::overlaps::{self, SpectralTuple};
use crate::quadrature::disk_average_9;

/// Samples whose eigenvector matrix has `‖R‖_F ‖R⁻¹‖_F` above this are rejected.
pub const CONDITION_THRESHOLD: f64 = 1e12;
const CHUNK: usize = 256;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The random stream of matrix `index` in a run with `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A Gin(N, ℂ) matrix: independent entries with real and imaginary parts of variance 1/2.
pub fn sample_ginibre(n: usize, seed: u64, index: u64) -> DMatrix<Complex64> {
    let mut rng = stream(seed, index);
    sample_ginibre_with(n, &mut rng)
}

pub fn sample_ginibre_with(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // column-major fill, so the draw order is fixed by the storage order
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * s, im * s)
    })
}

/// Eigenvalues and the overlap matrix `O_αβ = ⟨L_α, L_β⟩⟨R_β, R_α⟩` of one matrix.
#[derive(Clone, Debug)]
pub struct OverlapSample {
    pub eigenvalues: Vec<Complex64>,
    pub overlap: DMatrix<Complex64>,
    /// `‖R‖_F ‖R⁻¹‖_F` with unit-norm columns of `R`
    pub condition_number: f64,
}

impl OverlapSample {
    /// `max_α |Σ_β O_αβ - 1|`.
    pub fn sum_rule_error(&self) -> f64 {
        let n = self.eigenvalues.len();
        (0..n)
            .map(|a| ((0..n).map(|b| self.overlap[(a, b)]).sum::<Complex64>() - 1.0).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.eigenvalues.len())
            .map(|a| self.overlap[(a, a)].re)
            .fold(f64::INFINITY, f64::min)
    }
}

fn schur(m: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1))
        .map(|s| s.unpack())
        .ok_or_else(|| Error::singular("Schur iteration did not converge"))
}

/// Eigenvalues only.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let (_, t) = schur(m)?;
    Ok((0..m.nrows()).map(|i| t[(i, i)]).collect())
}

/// Right eigenvectors from the Schur form `M = Q T Q†`: `T V = V diag(T)` with unit upper
/// triangular `V`, then `R = Q V` and `L = R⁻¹ = V⁻¹ Q†`, so `⟨L_α, R_β⟩ = δ_αβ` by construction.
pub fn overlap_matrix(m: &DMatrix<Complex64>) -> Result<OverlapSample> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::invalid("overlap_matrix needs a non-empty square matrix"));
    }
    let (q, t) = schur(m)?;
    let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut v = DMatrix::<Complex64>::identity(n, n);
    for k in 0..n {
        for i in (0..k).rev() {
            let mut s = c(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * v[(j, k)];
            }
            let mut d = t[(i, i)] - t[(k, k)];
            if d.norm() < small {
                d = c(small, 0.0);
            }
            v[(i, k)] = -s / d;
        }
    }
    let mut r = &q * &v;
    let mut vs = v;
    for k in 0..n {
        let norm = r.column(k).norm();
        r.column_mut(k).unscale_mut(norm);
        vs.column_mut(k).unscale_mut(norm);
    }
    let vinv = vs
        .solve_upper_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::singular("eigenvector matrix is singular"))?;
    let l = vinv * q.adjoint();
    let condition_number = r.norm() * l.norm();
    if !condition_number.is_finite() || condition_number > CONDITION_THRESHOLD {
        return Err(Error::IllConditioned(condition_number));
    }
    let gl = &l * l.adjoint();
    let gr = r.adjoint() * &r;
    let overlap = DMatrix::from_fn(n, n, |a, b| gl[(a, b)] * gr[(b, a)]);
    Ok(OverlapSample {
        eigenvalues,
        overlap,
        condition_number,
    })
}

/// A binned Monte Carlo estimate. `stderr` is the standard deviation of the per-matrix
/// contributions divided by `√accepted`; `count` is the number of eigenvalues (or pairs) binned.
#[derive(Clone, Debug)]
pub struct BinnedEstimate {
    pub n: usize,
    pub target: Complex64,
    pub target2: Option<Complex64>,
    pub bin_radius: f64,
    pub mean: Complex64,
    pub stderr: f64,
    pub count: u64,
    pub n_matrices: u64,
    pub rejected: u64,
    pub seed: u64,
    /// largest `|Σ_β O_αβ - 1|` over accepted samples
    pub max_sum_rule_error: f64,
    /// smallest `O_αα` over accepted samples
    pub min_diagonal: f64,
}

impl BinnedEstimate {
    pub fn rejected_fraction(&self) -> f64 {
        self.rejected as f64 / self.n_matrices.max(1) as f64
    }

    pub const CSV_HEADER: &'static str = "N,target_re,target_im,target2_re,target2_im,radius,count,mean_re,mean_im,stderr,n_matrices,seed,rejected_fraction";

    pub fn csv_row(&self) -> String {
        let (t2r, t2i) = match self.target2 {
            Some(t) => (t.re.to_string(), t.im.to_string()),
            None => (String::new(), String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.target.re,
            self.target.im,
            t2r,
            t2i,
            self.bin_radius,
            self.count,
            self.mean.re,
            self.mean.im,
            self.stderr,
            self.n_matrices,
            self.seed,
            self.rejected_fraction()
        )
    }
}

/// What a binned estimator weights each eigenvalue (or pair) by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// `O_αα` or `O_αβ`
    Overlap,
    /// 1, which estimates the correlation function instead
    Density,
}

#[derive(Clone, Copy, Debug)]
struct Partial {
    sum: Complex64,
    sum_sq: f64,
    count: u64,
    accepted: u64,
    rejected: u64,
    max_sum_rule_error: f64,
    min_diagonal: f64,
}

impl Partial {
    fn zero() -> Self {
        Partial {
            sum: c(0.0, 0.0),
            sum_sq: 0.0,
            count: 0,
            accepted: 0,
            rejected: 0,
            max_sum_rule_error: 0.0,
            min_diagonal: f64::INFINITY,
        }
    }

    fn merge(mut self, o: Partial) -> Self {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.count += o.count;
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.max_sum_rule_error = self.max_sum_rule_error.max(o.max_sum_rule_error);
        self.min_diagonal = self.min_diagonal.min(o.min_diagonal);
        self
    }
}

/// Per-matrix contribution and bin count, or `None` for a rejected sample.
type Contribution = Option<(Complex64, u64, f64, f64)>;

fn run_chunks<F>(n_matrices: u64, f: F) -> Partial
where
    F: Fn(u64) -> Result<Contribution> + Sync,
{
    let n_chunks = n_matrices.div_ceil(CHUNK as u64);
    let partials: Vec<Partial> = (0..n_chunks)
        .into_par_iter()
        .map(|ch| {
            let mut p = Partial::zero();
            let lo = ch * CHUNK as u64;
            let hi = (lo + CHUNK as u64).min(n_matrices);
            for i in lo..hi {
                match f(i) {
                    Ok(Some((x, cnt, sre, mind))) => {
                        p.sum += x;
                        p.sum_sq += x.re * x.re;
                        p.count += cnt;
                        p.accepted += 1;
                        p.max_sum_rule_error = p.max_sum_rule_error.max(sre);
                        p.min_diagonal = p.min_diagonal.min(mind);
                    }
                    _ => p.rejected += 1,
                }
            }
            p
        })
        .collect();
    partials.into_iter().fold(Partial::zero(), Partial::merge)
}

fn finish(p: Partial, n: usize, target: Complex64, target2: Option<Complex64>, radius: f64, n_matrices: u64, seed: u64) -> BinnedEstimate {
    let m = p.accepted.max(1) as f64;
    let mean = p.sum / m;
    let var = if p.accepted > 1 {
        ((p.sum_sq - m * mean.re * mean.re) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    if p.count == 0 {
        eprintln!("warning: empty bin at {target} (radius {radius})");
    }
    BinnedEstimate {
        n,
        target,
        target2,
        bin_radius: radius,
        mean,
        stderr: (var / m).sqrt(),
        count: p.count,
        n_matrices,
        rejected: p.rejected,
        seed,
        max_sum_rule_error: p.max_sum_rule_error,
        min_diagonal: p.min_diagonal,
    }
}

/// Estimates the bin average of D₁₁^(N,1) (or of ρ^(N,1)) over `|λ - target| < radius`.
pub fn estimate_d11_weighted(
    n: usize,
    target: Complex64,
    bin_radius: f64,
    n_matrices: u64,
    seed: u64,
    weighting: Weighting,
) -> Result<BinnedEstimate> {
    if bin_radius <= 0.0 || n == 0 || n_matrices == 0 {
        return Err(Error::invalid("need N >= 1, radius > 0 and at least one matrix"));
    }
    let area = PI * bin_radius * bin_radius;
    let p = run_chunks(n_matrices, |i| {
        let m = sample_ginibre(n, seed, i);
        match weighting {
            Weighting::Density => {
                let ev = eigenvalues(&m)?;
                let cnt = ev.iter().filter(|&&l| (l - target).norm() < bin_radius).count() as u64;
                Ok(Some((c(cnt as f64 / area, 0.0), cnt, 0.0, f64::INFINITY)))
            }
            Weighting::Overlap => {
                let s = match overlap_matrix(&m) {
                    Ok(s) => s,
                    Err(_) => return Ok(None),
                };
                let mut x = c(0.0, 0.0);
                let mut cnt = 0;
                for (a, &l) in s.eigenvalues.iter().enumerate() {
                    if (l - target).norm() < bin_radius {
                        x += s.overlap[(a, a)];
                        cnt += 1;
                    }
                }
                Ok(Some((x / area, cnt, s.sum_rule_error(), s.min_diagonal())))
            }
        }
    });
    Ok(finish(p, n, target, None, bin_radius, n_matrices, seed))
}

pub fn estimate_d11(n: usize, target: Complex64, bin_radius: f64, n_matrices: u64, seed: u64) -> Result<BinnedEstimate> {
    estimate_d11_weighted(n, target, bin_radius, n_matrices, seed, Weighting::Overlap)
}

/// Estimates the bin average of D₁₂^(N,2) over `|λ - target1| < r`, `|μ - target2| < r`.
pub fn estimate_d12(
    n: usize,
    target1: Complex64,
    target2: Complex64,
    bin_radius: f64,
    n_matrices: u64,
    seed: u64,
) -> Result<BinnedEstimate> {
    if bin_radius <= 0.0 || n < 2 || n_matrices == 0 {
        return Err(Error::invalid("need N >= 2, radius > 0 and at least one matrix"));
    }
    if (target1 - target2).norm() <= 2.0 * bin_radius {
        return Err(Error::invalid("the two bins overlap"));
    }
    let area = PI * bin_radius * bin_radius;
    let p = run_chunks(n_matrices, |i| {
        let m = sample_ginibre(n, seed, i);
        let s = match overlap_matrix(&m) {
            Ok(s) => s,
            Err(_) => return Ok(None),
        };
        let in1: Vec<usize> = (0..n).filter(|&a| (s.eigenvalues[a] - target1).norm() < bin_radius).collect();
        let in2: Vec<usize> = (0..n).filter(|&a| (s.eigenvalues[a] - target2).norm() < bin_radius).collect();
        let mut x = c(0.0, 0.0);
        let mut cnt = 0;
        for &a in &in1 {
            for &b in &in2 {
                x += s.overlap[(a, b)];
                cnt += 1;
            }
        }
        Ok(Some((x / (area * area), cnt, s.sum_rule_error(), s.min_diagonal())))
    });
    Ok(finish(p, n, target1, Some(target2), bin_radius, n_matrices, seed))
}

/// Bin average of the exact D₁₁^(N,1) by the 9-point disk rule.
pub fn predicted_d11(n: usize, target: Complex64, bin_radius: f64) -> Result<f64> {
    let mut err = None;
    let v = disk_average_9(target, bin_radius, |z| {
        match SpectralTuple::physical(&[z]).and_then(|t| overlaps::d11_finite(n as u64, &t)).and_then(|v| v.to_complex()) {
            Ok(v) => v.re,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        }
    });
    err.map_or(Ok(v), Err)
}

/// Bin average of the exact D₁₂^(N,2) over both bins (9 × 9 points).
pub fn predicted_d12(n: usize, target1: Complex64, target2: Complex64, bin_radius: f64) -> Result<Complex64> {
    let mut err = None;
    let mut eval = |w: Complex64, z: Complex64| -> Complex64 {
        match SpectralTuple::physical(&[w, z]).and_then(|t| overlaps::d12_finite(n as u64, &t)).and_then(|v| v.to_complex()) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                c(f64::NAN, f64::NAN)
            }
        }
    };
    let re = disk_average_9(target1, bin_radius, |w| disk_average_9(target2, bin_radius, |z| eval(w, z).re));
    let im = disk_average_9(target1, bin_radius, |w| disk_average_9(target2, bin_radius, |z| eval(w, z).im));
    err.map_or(Ok(c(re, im)), Err)
}
