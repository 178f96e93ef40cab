//! Oracle for the reduced kernel: the tri-diagonal moment matrix of the weight ω, its LDU
//! factorization and the inverse it defines.
//!
//! Everything here is generic dense or banded linear algebra on the explicit moments. The
//! special functions are used only by the `*_closed_form` helpers that check the factors
//! against the f-polynomial formulas.

use std::f64::consts::FRAC_1_PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::DiskRule;
use crate::scaledarith::ScaledComplex;
use crate::specfun;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn factorial(i: usize) -> f64 {
    (1..=i).map(|k| k as f64).product()
}

/// Bands of the moment matrix `M_ij = ∫ ω(z, z̄ | λ, λ̄) z̄^i z^j d²z` and, once factored,
/// its LDU factors `M = L D U` with unit bidiagonal `L`, `U`.
#[derive(Clone, Debug)]
pub struct MomentFactorization {
    pub n: usize,
    pub lam: Complex64,
    pub lam_bar: Complex64,
    /// `sub[i] = M_{i+1,i}`
    pub sub: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    /// `sup[i] = M_{i,i+1}`
    pub sup: Vec<Complex64>,
    /// `l_band[i] = L_{i+1,i}`
    pub l_band: Vec<Complex64>,
    pub d_diag: Vec<Complex64>,
    /// `u_band[i] = U_{i,i+1}`
    pub u_band: Vec<Complex64>,
}

impl MomentFactorization {
    pub fn is_factored(&self) -> bool {
        self.d_diag.len() == self.n
    }

    pub fn dense(&self) -> DMatrix<Complex64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i == j + 1 {
                self.sub[j]
            } else if j == i + 1 {
                self.sup[i]
            } else {
                c(0.0, 0.0)
            }
        })
    }

    fn require_factored(&self) -> Result<()> {
        if self.is_factored() {
            Ok(())
        } else {
            Err(Error::invalid("moment matrix has not been factored"))
        }
    }

    pub fn l_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                c(1.0, 0.0)
            } else if i == j + 1 {
                self.l_band[j]
            } else {
                c(0.0, 0.0)
            }
        })
    }

    pub fn u_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                c(1.0, 0.0)
            } else if j == i + 1 {
                self.u_band[i]
            } else {
                c(0.0, 0.0)
            }
        })
    }

    pub fn d_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.d_diag.clone()))
    }
}

/// Moment matrix of size `n`:
/// `M_ij = i! (δ_ij (1 + λλ̄ + i + 1) - δ_{i+1,j} λ (i+1) - δ_{i,j+1} λ̄)`.
pub fn build_moment_matrix(n: usize, lam: Complex64, lam_bar: Complex64) -> Result<MomentFactorization> {
    if n == 0 {
        return Err(Error::invalid("moment matrix needs n >= 1"));
    }
    let x = lam * lam_bar;
    let diag = (0..n).map(|i| (x + 2.0 + i as f64) * factorial(i)).collect();
    let sup = (0..n - 1).map(|i| -lam * factorial(i + 1)).collect();
    // M_{i+1,i} = (i+1)! (-λ̄)
    let sub = (0..n - 1).map(|i| -lam_bar * factorial(i + 1)).collect();
    Ok(MomentFactorization {
        n,
        lam,
        lam_bar,
        sub,
        diag,
        sup,
        l_band: Vec::new(),
        d_diag: Vec::new(),
        u_band: Vec::new(),
    })
}

/// Moments `∫ ω z̄^i z^j` by polar quadrature over `|z| ≤ 8`; only meaningful for physical λ.
pub fn moment_by_quadrature(i: usize, j: usize, lam: Complex64) -> Complex64 {
    let rule = DiskRule::new(8.0, 64, 2 * (i + j) + 8);
    let lb = lam.conj();
    rule.integrate(|z| {
        let zb = z.conj();
        (c(1.0, 0.0) + (z - lam) * (zb - lb)) * (-z.norm_sqr()).exp() * FRAC_1_PI * zb.powu(i as u32) * z.powu(j as u32)
    })
}

/// Banded LDU factorization: `D_0 = M_00`, `L_{i,i-1} = M_{i,i-1}/D_{i-1}`,
/// `U_{i-1,i} = M_{i-1,i}/D_{i-1}`, `D_i = M_ii - M_{i,i-1} M_{i-1,i}/D_{i-1}`.
pub fn ldu_factor(mut m: MomentFactorization) -> Result<MomentFactorization> {
    let n = m.n;
    let mut d = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n.saturating_sub(1));
    let mut u = Vec::with_capacity(n.saturating_sub(1));
    d.push(m.diag[0]);
    for i in 1..n {
        let prev = d[i - 1];
        if prev.norm() <= 1e-300 || prev.norm() <= 1e-14 * m.diag[i - 1].norm() {
            return Err(Error::singular(format!("LDU pivot {} vanishes", i - 1)));
        }
        l.push(m.sub[i - 1] / prev);
        u.push(m.sup[i - 1] / prev);
        d.push(m.diag[i] - m.sub[i - 1] * m.sup[i - 1] / prev);
    }
    if d[n - 1].norm() <= 1e-14 * m.diag[n - 1].norm() {
        return Err(Error::singular(format!("LDU pivot {} vanishes", n - 1)));
    }
    m.l_band = l;
    m.d_diag = d;
    m.u_band = u;
    Ok(m)
}

/// Normalized pivots `d_p = D_pp/p!` from `d_0 = 2 + x`, `d_p = 2 + x + p - p x/d_{p-1}`.
pub fn pivots_by_recursion(n: usize, x: Complex64) -> Result<Vec<Complex64>> {
    let mut d = Vec::with_capacity(n);
    for p in 0..n {
        let v = if p == 0 {
            x + 2.0
        } else {
            let prev: Complex64 = d[p - 1];
            if prev.norm() == 0.0 {
                return Err(Error::singular(format!("recursion pivot {} vanishes", p - 1)));
            }
            x + 2.0 + p as f64 - x * p as f64 / prev
        };
        d.push(v);
    }
    Ok(d)
}

/// Normalized pivots from the closed form `d_p = (p+1) f_{p+1}(x)/f_p(x)`.
pub fn pivots_closed_form(n: usize, x: Complex64) -> Result<Vec<Complex64>> {
    let fs = specfun::f_poly_all(n as u64, x);
    (0..n)
        .map(|p| {
            if fs[p].is_zero() {
                return Err(Error::singular(format!("f_{p}({x}) = 0")));
            }
            (fs[p + 1] / fs[p] * (p + 1) as f64).to_complex()
        })
        .collect()
}

/// Dense inverses of the unit bidiagonal factors, by forward and backward substitution.
pub fn invert_factors(m: &MomentFactorization) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    m.require_factored()?;
    let n = m.n;
    let mut linv = DMatrix::from_element(n, n, c(0.0, 0.0));
    let mut uinv = DMatrix::from_element(n, n, c(0.0, 0.0));
    for q in 0..n {
        linv[(q, q)] = c(1.0, 0.0);
        for p in q + 1..n {
            linv[(p, q)] = -m.l_band[p - 1] * linv[(p - 1, q)];
        }
        uinv[(q, q)] = c(1.0, 0.0);
        for p in (0..q).rev() {
            uinv[(p, q)] = -m.u_band[p] * uinv[(p + 1, q)];
        }
    }
    Ok((linv, uinv))
}

/// `L^{-1}` and `U^{-1}` from the closed forms `(L^{-1})_{pq} = λ̄^{p-q} f_q/f_p` (q < p) and
/// `(U^{-1})_{pq} = λ^{q-p} f_p/f_q` (q > p).
pub fn inverse_factors_closed_form(m: &MomentFactorization) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let n = m.n;
    let fs = specfun::f_poly_all(n as u64, m.lam * m.lam_bar);
    let fs: Vec<Complex64> = fs.iter().map(|f| f.to_complex()).collect::<Result<_>>()?;
    let linv = DMatrix::from_fn(n, n, |p, q| {
        if q > p {
            c(0.0, 0.0)
        } else {
            m.lam_bar.powu((p - q) as u32) * fs[q] / fs[p]
        }
    });
    let uinv = DMatrix::from_fn(n, n, |p, q| {
        if q < p {
            c(0.0, 0.0)
        } else {
            m.lam.powu((q - p) as u32) * fs[p] / fs[q]
        }
    });
    Ok((linv, uinv))
}

/// `C = U^{-1} D^{-1} L^{-1} = M^{-1}` from the numerical factors.
pub fn inverse_from_factors(m: &MomentFactorization) -> Result<DMatrix<Complex64>> {
    let (linv, uinv) = invert_factors(m)?;
    let dinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(m.n, m.d_diag.iter().map(|d| d.inv())));
    Ok(uinv * dinv * linv)
}

/// Monic bi-orthogonal polynomial `P_k(z | λ, λ̄) = Σ_{m≤k} λ^{k-m} (f_m/f_k) z^m`, with the
/// ratios read off the numerical `U^{-1}`.
pub fn biorth_polys(m: &MomentFactorization, k: usize, z: Complex64) -> Result<Complex64> {
    if k >= m.n {
        return Err(Error::invalid(format!("P_{k} needs a factorization of size > {k}")));
    }
    let (_, uinv) = invert_factors(m)?;
    let mut acc = c(0.0, 0.0);
    let mut zm = c(1.0, 0.0);
    for p in 0..=k {
        acc += uinv[(p, k)] * zm;
        zm *= z;
    }
    Ok(acc)
}

/// Bilinear form `Σ_ij y^i C_ij x̄^j` for a given inverse moment matrix `C`.
pub fn bilinear(cinv: &DMatrix<Complex64>, x_bar: Complex64, y: Complex64) -> Complex64 {
    let n = cinv.nrows();
    let mut acc = c(0.0, 0.0);
    let mut yi = c(1.0, 0.0);
    for i in 0..n {
        let mut row = c(0.0, 0.0);
        let mut xj = c(1.0, 0.0);
        for j in 0..n {
            row += cinv[(i, j)] * xj;
            xj *= x_bar;
        }
        acc += yi * row;
        yi *= y;
    }
    acc
}

/// Reduced kernel `κ^(N)(x̄, y | λ, λ̄) = Σ_{i,j<N} y^i C_ij x̄^j` with `N = m.n` and
/// `C = U^{-1} D^{-1} L^{-1}`.
pub fn kernel_from_inverse(m: &MomentFactorization, x_bar: Complex64, y: Complex64) -> Result<Complex64> {
    Ok(bilinear(&inverse_from_factors(m)?, x_bar, y))
}

/// The same kernel with `C` from a dense LU inverse of `M`, bypassing the banded factors.
pub fn kernel_from_dense_inverse(n: usize, x_bar: Complex64, y: Complex64, lam: Complex64, lam_bar: Complex64) -> Result<Complex64> {
    let m = build_moment_matrix(n, lam, lam_bar)?;
    let cinv = m
        .dense()
        .try_inverse()
        .ok_or_else(|| Error::singular("moment matrix is singular"))?;
    Ok(bilinear(&cinv, x_bar, y))
}

/// `Π_{q=0}^{N-2} D_qq / Π_{q=1}^{N-1} q!`, which telescopes to `f_{N-1}(λλ̄)`.
pub fn pivot_product_ratio(m: &MomentFactorization, n: usize) -> Result<ScaledComplex> {
    m.require_factored()?;
    if n == 0 || n > m.n + 1 {
        return Err(Error::invalid(format!("prefactor needs 1 <= N <= {}", m.n + 1)));
    }
    let mut acc = ScaledComplex::ONE;
    for q in 0..n.saturating_sub(1) {
        acc *= ScaledComplex::from(m.d_diag[q]);
        acc = acc / factorial(q + 1);
    }
    Ok(acc)
}

/// `f_{N-1}(λλ̄) e^{-λλ̄}/π` assembled from the pivots of the factorization.
pub fn prefactor_product(m: &MomentFactorization, n: usize) -> Result<ScaledComplex> {
    let ratio = pivot_product_ratio(m, n)?;
    Ok(ratio * ScaledComplex::exp(-m.lam * m.lam_bar) * FRAC_1_PI)
}
