//! Tensor quadrature over disks in polar coordinates, used by the small-N oracles.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

/// Nodes and weights of a polar rule on `|z| ≤ radius`: Gauss–Legendre in `r` (with the
/// Jacobian `r` folded into the weights) times the trapezoid rule in the angle.
#[derive(Clone, Debug)]
pub struct DiskRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl DiskRule {
    pub fn new(radius: f64, n_radial: usize, n_angular: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(n_radial).expect("at least one radial node"));
        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        let dtheta = 2.0 * PI / n_angular as f64;
        for &(x, w) in gl.as_node_weight_pairs() {
            let r = 0.5 * radius * (x + 1.0);
            let wr = 0.5 * radius * w * r;
            for j in 0..n_angular {
                nodes.push(Complex64::from_polar(r, dtheta * j as f64));
                weights.push(wr * dtheta);
            }
        }
        DiskRule { nodes, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| f(z) * w)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Result of a node-doubling quadrature.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    pub value: Complex64,
    /// difference between the last two refinements
    pub error: f64,
    pub converged: bool,
}

/// Integrates `f` over `dim` copies of the disk `|z| ≤ radius`, doubling the node counts until
/// two successive estimates agree to `tol` (absolute) or `max_levels` refinements were tried.
pub fn integrate_disks(
    dim: usize,
    radius: f64,
    tol: f64,
    max_levels: usize,
    f: impl Fn(&[Complex64]) -> Complex64,
) -> Adaptive {
    let (mut nr, mut na) = (16usize, 8usize);
    let mut prev: Option<Complex64> = None;
    let mut last = Adaptive {
        value: Complex64::new(f64::NAN, 0.0),
        error: f64::INFINITY,
        converged: false,
    };
    for _ in 0..max_levels {
        let rule = DiskRule::new(radius, nr, na);
        let value = tensor_sum(&rule, dim, &f);
        if let Some(p) = prev {
            let error = (value - p).norm();
            last = Adaptive {
                value,
                error,
                converged: error <= tol,
            };
            if last.converged {
                return last;
            }
        }
        prev = Some(value);
        nr *= 2;
        na *= 2;
    }
    last
}

fn tensor_sum(rule: &DiskRule, dim: usize, f: &impl Fn(&[Complex64]) -> Complex64) -> Complex64 {
    let m = rule.len();
    let mut idx = vec![0usize; dim];
    let mut pts = vec![Complex64::new(0.0, 0.0); dim];
    let mut acc = Complex64::new(0.0, 0.0);
    if dim == 0 {
        return f(&pts);
    }
    loop {
        let mut w = 1.0;
        for (d, &i) in idx.iter().enumerate() {
            pts[d] = rule.nodes[i];
            w *= rule.weights[i];
        }
        acc += f(&pts) * w;
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dim {
                return acc;
            }
        }
    }
}

/// A 9-point rule for the mean over the disk `|z - center| ≤ radius`: three Gauss–Legendre
/// rings in `r²` times three angles, rotated from ring to ring.
pub fn disk_average_9(center: Complex64, radius: f64, mut f: impl FnMut(Complex64) -> f64) -> f64 {
    let s = (0.6f64).sqrt();
    let nodes = [0.5 * (1.0 - s), 0.5, 0.5 * (1.0 + s)];
    let weights = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let mut acc = 0.0;
    for (ring, (&u, &w)) in nodes.iter().zip(&weights).enumerate() {
        let r = radius * u.sqrt();
        for j in 0..3 {
            let theta = 2.0 * PI * (j as f64 + ring as f64 / 3.0) / 3.0;
            acc += w / 3.0 * f(center + Complex64::from_polar(r, theta));
        }
    }
    acc
}
