//! Euler–Maruyama simulation of the eigenvalue SDE of Brownian motion on normal matrices,
//! `dλ_i = c Σ_{k≠i} dt/(λ̄_i - λ̄_k) + σ dW_i`, and Kolmogorov–Smirnov checks of the t = 1
//! marginal against the Ginibre law.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mcharness::stream;

/// Constants of the SDE and of the step control.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdeParams {
    /// `c` in front of the drift sum
    pub drift_coeff: f64,
    /// `σ`; the complex noise has `E|dW|² = dt`
    pub noise_scale: f64,
    /// steps are capped at `eta · s²` with `s` the smallest pair separation
    pub eta: f64,
    /// standard deviation of the initial positions around 0
    pub jitter: f64,
    /// a step is halved if it would bring two particles closer than `s_min_factor · √dt`
    pub s_min_factor: f64,
    pub dt_min: f64,
    /// drop the noise (diagnostic)
    pub zero_noise: bool,
}

impl SdeParams {
    /// Constants for which the law at time t is `∝ |Δ(λ)|² e^{-Σ|λ_i|²/t}`, i.e. Ginibre at t = 1.
    pub fn ginibre() -> Self {
        SdeParams {
            drift_coeff: 0.5,
            noise_scale: 1.0,
            eta: 0.01,
            jitter: 1e-6,
            s_min_factor: 1e-4,
            dt_min: 1e-12,
            zero_noise: false,
        }
    }

    /// Drift 2 and noise √2 with `E|dW|² = dt`, taken literally from the appendix.
    pub fn as_written() -> Self {
        SdeParams {
            drift_coeff: 2.0,
            noise_scale: std::f64::consts::SQRT_2,
            ..Self::ginibre()
        }
    }
}

impl Default for SdeParams {
    fn default() -> Self {
        Self::ginibre()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdeState {
    pub positions: Vec<Complex64>,
    pub time: f64,
    pub min_separation: f64,
    pub steps_taken: u64,
    pub rejected_steps: u64,
}

/// Smallest pairwise distance, infinite for fewer than two particles.
pub fn min_separation(pos: &[Complex64]) -> f64 {
    let mut s = f64::INFINITY;
    for i in 0..pos.len() {
        for j in 0..i {
            s = s.min((pos[i] - pos[j]).norm());
        }
    }
    s
}

impl SdeState {
    pub fn new(positions: Vec<Complex64>) -> Self {
        let min_separation = min_separation(&positions);
        SdeState {
            positions,
            time: 0.0,
            min_separation,
            steps_taken: 0,
            rejected_steps: 0,
        }
    }

    /// N particles at 0 perturbed by independent complex Gaussians of scale `jitter`.
    pub fn jittered(n: usize, jitter: f64, rng: &mut impl Rng) -> Self {
        let pos = (0..n).map(|_| complex_normal(rng) * jitter).collect();
        Self::new(pos)
    }
}

/// A complex Gaussian with `E|z|² = 1`.
fn complex_normal(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `Σ_{k≠i} 1/(λ̄_i - λ̄_k)` for every `i`.
pub fn drift(pos: &[Complex64]) -> Vec<Complex64> {
    let n = pos.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for k in 0..i {
            let t = (pos[i] - pos[k]).conj().inv();
            out[i] += t;
            out[k] -= t;
        }
    }
    out
}

/// One Euler–Maruyama step of length `dt`, halved (with fresh noise) while it would bring two
/// particles closer than `s_min_factor · √dt`.
pub fn sde_step(state: &SdeState, dt: f64, params: &SdeParams, rng: &mut impl Rng) -> Result<SdeState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    let b = drift(&state.positions);
    let mut dt = dt;
    let mut rejected = 0;
    loop {
        let sq = dt.sqrt() * params.noise_scale;
        let next: Vec<Complex64> = state
            .positions
            .iter()
            .zip(&b)
            .map(|(&p, &bi)| {
                let noise = if params.zero_noise { Complex64::new(0.0, 0.0) } else { complex_normal(rng) * sq };
                p + bi * (params.drift_coeff * dt) + noise
            })
            .collect();
        let s = min_separation(&next);
        if s >= params.s_min_factor * dt.sqrt() {
            return Ok(SdeState {
                positions: next,
                time: state.time + dt,
                min_separation: s,
                steps_taken: state.steps_taken + 1,
                rejected_steps: state.rejected_steps + rejected,
            });
        }
        rejected += 1;
        dt *= 0.5;
        if dt < params.dt_min {
            return Err(Error::Collision {
                time: state.time,
                dt_min: params.dt_min,
            });
        }
    }
}

/// Integrates one run from the jittered origin to `t_end` with steps
/// `min(dt0, t_end - t, eta · s²)`.
pub fn run_single(n: usize, t_end: f64, dt0: f64, params: &SdeParams, rng: &mut ChaCha8Rng) -> Result<SdeState> {
    let mut state = SdeState::jittered(n, params.jitter, rng);
    while state.time < t_end {
        let remaining = t_end - state.time;
        let cap = params.eta * state.min_separation * state.min_separation;
        let dt = dt0.min(remaining).min(cap);
        state = sde_step(&state, dt, params, rng)?;
        // guards against a last step lost to rounding
        if t_end - state.time < 1e-15 * t_end {
            state.time = t_end;
        }
    }
    Ok(state)
}

/// Final states of `n_runs` independent runs; run `i` uses the stream `(seed, i)`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub n: usize,
    pub t_end: f64,
    /// `(run index, final state)` for every run that reached `t_end`
    pub states: Vec<(u64, SdeState)>,
    pub dropped: u64,
}

pub fn run_to_time(n: usize, t_end: f64, dt0: f64, n_runs: u64, seed: u64, params: &SdeParams) -> Result<Ensemble> {
    if n == 0 || !(t_end > 0.0) || !(dt0 > 0.0) {
        return Err(Error::invalid("need N >= 1, t_end > 0 and dt0 > 0"));
    }
    let results: Vec<(u64, Result<SdeState>)> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            (i, run_single(n, t_end, dt0, params, &mut rng))
        })
        .collect();
    let mut states = Vec::with_capacity(results.len());
    let mut dropped = 0;
    for (i, r) in results {
        match r {
            Ok(s) => states.push((i, s)),
            Err(_) => dropped += 1,
        }
    }
    Ok(Ensemble {
        n,
        t_end,
        states,
        dropped,
    })
}

/// CDF of `|λ|` for one eigenvalue of Gin(N, ℂ) picked uniformly:
/// `(1/N) Σ_{k<N} (1 - e^{-R²} e_k(R²))`.
pub fn ginibre_radial_cdf(n: usize, r: f64) -> f64 {
    let x = r * r;
    let mut term = 1.0;
    let mut partial = 0.0;
    let mut acc = 0.0;
    for k in 0..n {
        if k > 0 {
            term *= x / k as f64;
        }
        partial += term;
        acc += 1.0 - (-x).exp() * partial;
    }
    acc / n as f64
}

/// `sup |F_n - F|` of the samples against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov p-value with the small-sample correction of Stephens.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    if lam < 0.2 {
        return 1.0;
    }
    let mut acc = 0.0;
    for k in 1..=100 {
        let t = (-2.0 * (k * k) as f64 * lam * lam).exp();
        acc += if k % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    (2.0 * acc).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug)]
pub struct KsSummary {
    pub statistic: f64,
    pub p_value: f64,
    pub samples: usize,
}

/// KS test of the moduli of all final positions against the Gin(N, ℂ) radial law at `t_end`
/// (positions are rescaled by `1/√t_end`).
pub fn radial_ks(ens: &Ensemble) -> KsSummary {
    let scale = ens.t_end.sqrt();
    let r: Vec<f64> = ens
        .states
        .iter()
        .flat_map(|(_, s)| s.positions.iter().map(|p| p.norm() / scale))
        .collect();
    let d = ks_statistic(&r, |x| ginibre_radial_cdf(ens.n, x));
    KsSummary {
        statistic: d,
        p_value: ks_pvalue(d, r.len()),
        samples: r.len(),
    }
}
