//! Closed forms against independent evaluations: moment-matrix inversion for κ^(N), the direct
//! sum for φ_n, the swap identity relating D12 to D11, and quadrature of the Chalker–Mehlig
//! expressions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::{self, SpectralPoint};
use crate::momentmatrix;
use crate::overlaps::{self, OverlapKind, SpectralTuple};
use crate::specfun;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Kernel,
    Lemma1,
    Lemma2,
    Quadrature,
    All,
}

impl OracleKind {
    pub fn expand(self) -> Vec<OracleKind> {
        match self {
            OracleKind::All => vec![OracleKind::Kernel, OracleKind::Lemma1, OracleKind::Lemma2, OracleKind::Quadrature],
            k => vec![k],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Kernel => "kernel",
            OracleKind::Lemma1 => "lemma1",
            OracleKind::Lemma2 => "lemma2",
            OracleKind::Quadrature => "quadrature",
            OracleKind::All => "all",
        }
    }

    /// Tolerance the comparison is expected to meet in double precision.
    pub fn shipped_tolerance(self) -> f64 {
        match self {
            OracleKind::Kernel | OracleKind::Lemma2 => 1e-10,
            OracleKind::Lemma1 => 1e-9,
            OracleKind::Quadrature => 1e-5,
            OracleKind::All => f64::NAN,
        }
    }

    /// Whether deviations are relative (otherwise absolute).
    pub fn relative(self) -> bool {
        self != OracleKind::Quadrature
    }
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub oracle: OracleKind,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub worst_case: String,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

fn in_disk(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    let rad = r * rng.random::<f64>().sqrt();
    Complex64::from_polar(rad, std::f64::consts::TAU * rng.random::<f64>())
}

struct Worst {
    cases: usize,
    dev: f64,
    case: String,
}

impl Worst {
    fn new() -> Self {
        Worst {
            cases: 0,
            dev: 0.0,
            case: String::new(),
        }
    }

    fn record(&mut self, dev: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN counts as the worst possible deviation
        if !(dev <= self.dev) {
            self.dev = if dev.is_nan() { f64::INFINITY } else { dev };
            self.case = case();
        }
    }

    fn report(self, oracle: OracleKind, tolerance: f64) -> OracleReport {
        OracleReport {
            oracle,
            cases: self.cases,
            max_deviation: self.dev,
            tolerance,
            worst_case: self.case,
        }
    }
}

/// κ^(N) closed form vs `Σ y^i (M^{-1})_ij x̄^j` from the banded factorization; `N ≤ n_max`,
/// arguments uniform in `|·| ≤ 2`, physical `(λ, λ̄)`.
pub fn kernel_oracle(n_max: u64, samples: usize, seed: u64, tolerance: f64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Worst::new();
    for _ in 0..samples {
        let n = rng.random_range(1..=n_max);
        let (x_bar, y, lam) = (in_disk(&mut rng, 2.0), in_disk(&mut rng, 2.0), in_disk(&mut rng, 2.0));
        let closed = kernels::kappa_finite(n, x_bar, y, lam, lam.conj())?.to_complex()?;
        let m = momentmatrix::ldu_factor(momentmatrix::build_moment_matrix(n as usize, lam, lam.conj())?)?;
        let reference = momentmatrix::kernel_from_inverse(&m, x_bar, y)?;
        w.record((closed - reference).norm() / reference.norm(), || {
            format!("N={n} x_bar={x_bar} y={y} lam={lam}")
        });
    }
    Ok(w.report(OracleKind::Kernel, tolerance))
}

/// `φ_n` closed form vs the direct sum for `n ≤ 50`, `|x| ≤ 2`.
pub fn lemma2_oracle(samples: usize, seed: u64, tolerance: f64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Worst::new();
    for _ in 0..samples {
        let n = rng.random_range(0..=50u64);
        let x = in_disk(&mut rng, 2.0);
        let closed = specfun::phi_closed(n, x)?;
        let direct = specfun::phi_direct(n as i64, x)?;
        w.record((closed - direct).norm() / direct.norm(), || format!("n={n} x={x}"));
    }
    Ok(w.report(OracleKind::Lemma2, tolerance))
}

/// Random decoupled tuples with `2 ≤ k ≤ 4`, `k ≤ N ≤ n_max.min(8)` and `|1 - λ₁₂λ̄₁₂| > 0.1`.
pub fn random_decoupled_tuple(rng: &mut ChaCha8Rng, n_max: u64) -> (u64, SpectralTuple) {
    let n_max = n_max.clamp(2, 8);
    let k = rng.random_range(2..=4usize.min(n_max as usize));
    let n = rng.random_range(k as u64..=n_max);
    loop {
        let pts: Vec<SpectralPoint> = (0..k)
            .map(|_| SpectralPoint::decoupled(in_disk(rng, 1.5), in_disk(rng, 1.5)))
            .collect();
        let s = (pts[0].lam - pts[1].lam) * (pts[0].lam_bar - pts[1].lam_bar);
        if (Complex64::new(1.0, 0.0) - s).norm() > 0.1 {
            return (n, SpectralTuple { points: pts });
        }
    }
}

/// D12 vs `-e^{-λ₁₂λ̄₁₂}/(1 - λ₁₂λ̄₁₂) T̂ D11` on decoupled points.
pub fn lemma1_oracle(n_max: u64, samples: usize, seed: u64, tolerance: f64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Worst::new();
    for _ in 0..samples {
        let (n, t) = random_decoupled_tuple(&mut rng, n_max);
        let direct = overlaps::d12_finite(n, &t)?.value;
        let swapped = overlaps::d12_via_swap(n, &t)?;
        w.record(direct.rel_diff(&swapped), || {
            let pts: Vec<String> = t.points.iter().map(|p| format!("({}, {})", p.lam, p.lam_bar)).collect();
            format!("N={n} points={}", pts.join(" "))
        });
    }
    Ok(w.report(OracleKind::Lemma1, tolerance))
}

/// Cases of the quadrature oracle: `(N, kind, fixed points)`.
pub fn quadrature_cases() -> Vec<(u64, OverlapKind, Vec<Complex64>)> {
    vec![
        (2, OverlapKind::D11, vec![Complex64::new(0.3, 0.2)]),
        (3, OverlapKind::D11, vec![Complex64::new(0.5, -0.1)]),
        (3, OverlapKind::D12, vec![Complex64::new(0.2, 0.1), Complex64::new(-0.4, 0.3)]),
    ]
}

/// Integrates the fully conditioned Chalker–Mehlig expressions over the free eigenvalues and
/// compares with the finite-N closed forms (absolute deviation).
pub fn quadrature_oracle(tolerance: f64) -> Result<OracleReport> {
    let mut w = Worst::new();
    for (n, kind, pts) in quadrature_cases() {
        let t = SpectralTuple::physical(&pts)?;
        let closed = match kind {
            OverlapKind::D12 => overlaps::d12_finite(n, &t)?,
            _ => overlaps::d11_finite(n, &t)?,
        }
        .to_complex()?;
        let q = overlaps::integrate_cm_conditional(n, &t, kind, 1e-9)?;
        w.record((q.value - closed).norm(), || {
            let pts: Vec<String> = pts.iter().map(|p| p.to_string()).collect();
            format!("N={n} {kind:?} points={}", pts.join(" "))
        });
    }
    Ok(w.report(OracleKind::Quadrature, tolerance))
}
