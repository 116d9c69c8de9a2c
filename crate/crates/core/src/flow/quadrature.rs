//! Heat-kernel quadrature for the inverse Laplacian.
//!
//! [`InverseLaplacianMode::Standard`] evaluates
//! `Δ⁻¹v(ω) ≈ −∫₀ᵀ ∫ (4πτ)^{−3/2} e^{−|ω−ξ|²/(4τ)} v(ξ) dξ dτ`.
//! [`InverseLaplacianMode::Literal`] evaluates
//! `+∫₀ᵀ ∫_Ω (4πτ)^{−3/2} e^{−|ω−ξ|²/τ} v(ξ) dξ dτ` exactly as written, with no
//! rescaling of the exponent and no sign flip; it is not an inverse of `Δ`.
//!
//! The τ-integral uses the midpoint rule in `ln τ` on a geometric
//! subdivision of `[τ_min, T]`. For each τ the spatial integral runs over the window
//! `ω ± w·σ` (intersected with Ω when a box is set) with a tensor-product
//! midpoint rule, `σ` being the kernel's per-axis standard deviation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::funcalg::{Atom, ExpPoly, Point, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InverseLaplacianMode {
    #[default]
    Standard,
    Literal,
}

impl InverseLaplacianMode {
    /// Per-axis variance of the kernel at `τ`, amplitude relative to a unit
    /// Gaussian, and overall sign.
    fn kernel(self, tau: f64) -> (f64, f64, f64) {
        match self {
            InverseLaplacianMode::Standard => (2.0 * tau, 1.0, -1.0),
            InverseLaplacianMode::Literal => (0.5 * tau, 0.125, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub mode: InverseLaplacianMode,
    /// Integration box `[lo, hi]` per axis; `None` integrates over ℝ³.
    pub domain: Option<[[f64; 2]; 3]>,
    pub horizon: f64,
    pub spatial_points: usize,
    pub tau_nodes: usize,
    pub tau_min: f64,
    /// Half-width of the spatial window in kernel standard deviations.
    pub window: f64,
}

const PI_BOX: [[f64; 2]; 3] = [[-std::f64::consts::PI, std::f64::consts::PI]; 3];

impl QuadratureSettings {
    /// Whole-space integration with `T = 10`.
    pub fn standard() -> Self {
        QuadratureSettings {
            mode: InverseLaplacianMode::Standard,
            domain: None,
            horizon: 10.0,
            spatial_points: 24,
            tau_nodes: 32,
            tau_min: 1e-4,
            window: 6.0,
        }
    }

    /// `Ω = [−π, π]³` and `T = 1`.
    pub fn literal() -> Self {
        QuadratureSettings {
            mode: InverseLaplacianMode::Literal,
            domain: Some(PI_BOX),
            horizon: 1.0,
            ..Self::standard()
        }
    }

    pub fn for_mode(mode: InverseLaplacianMode) -> Self {
        match mode {
            InverseLaplacianMode::Standard => Self::standard(),
            InverseLaplacianMode::Literal => Self::literal(),
        }
    }

    /// `(τ, weight)` pairs.
    fn tau_rule(&self) -> Vec<(f64, f64)> {
        let n = self.tau_nodes.max(1);
        let ratio = (self.horizon / self.tau_min).ln() / n as f64;
        (0..n)
            .map(|k| {
                let tau = self.tau_min * ((k as f64 + 0.5) * ratio).exp();
                (tau, tau * ratio)
            })
            .collect()
    }

    /// Midpoints and widths along one axis around `center`.
    fn axis_rule(&self, axis: usize, center: f64, sigma: f64) -> (Vec<f64>, f64) {
        let mut lo = center - self.window * sigma;
        let mut hi = center + self.window * sigma;
        if let Some(domain) = self.domain {
            lo = lo.max(domain[axis][0]);
            hi = hi.min(domain[axis][1]);
        }
        if hi <= lo {
            return (Vec::new(), 0.0);
        }
        let n = self.spatial_points.max(1);
        let h = (hi - lo) / n as f64;
        ((0..n).map(|k| lo + (k as f64 + 0.5) * h).collect(), h)
    }
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self::standard()
    }
}

fn gaussian(d: f64, variance: f64) -> f64 {
    (-d * d / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
}

/// `∫ g(ξ−c) ξᵖ e^{Lξ} dξ` along one axis by the midpoint rule.
fn axis_integral(nodes: &[f64], h: f64, center: f64, variance: f64, power: u32, slope: Complex64) -> Complex64 {
    nodes
        .iter()
        .map(|&xi| {
            let mono = xi.powi(power as i32);
            (slope * xi).exp() * (gaussian(xi - center, variance) * mono * h)
        })
        .sum()
}

fn time_factor(atom: &Atom, t: f64) -> Complex64 {
    atom.coeff * t.powi(atom.power(Var::T) as i32) * (atom.exponent[Var::T] * t).exp()
}

fn quadrature_at(v: &ExpPoly, p: &Point, settings: &QuadratureSettings) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (tau, weight) in settings.tau_rule() {
        let (variance, amplitude, sign) = settings.mode.kernel(tau);
        let sigma = variance.sqrt();
        let rules: Vec<(Vec<f64>, f64)> = (0..3).map(|k| settings.axis_rule(k, p[k], sigma)).collect();
        let mut inner = Complex64::new(0.0, 0.0);
        for atom in v.atoms() {
            let mut prod = time_factor(atom, p[3]);
            for (k, var) in Var::SPATIAL.iter().enumerate() {
                let (nodes, h) = &rules[k];
                prod *= axis_integral(nodes, *h, p[k], variance, atom.power(*var), atom.exponent[*var]);
            }
            inner += prod;
        }
        total += inner * (sign * amplitude * weight);
    }
    total
}

/// Quadrature approximation of the mode's operator applied to `v` at each point.
///
/// Atoms are integrated one axis at a time, so the cost per point is linear
/// in the number of spatial midpoints.
pub fn inverse_laplacian_quadrature(v: &ExpPoly, points: &[Point], settings: &QuadratureSettings) -> Vec<Complex64> {
    if v.is_zero() {
        return vec![Complex64::new(0.0, 0.0); points.len()];
    }
    points.par_iter().map(|p| quadrature_at(v, p, settings)).collect()
}

/// Same rule as [`inverse_laplacian_quadrature`] for an arbitrary integrand,
/// evaluated on the full tensor grid.
pub fn inverse_laplacian_quadrature_fn<F>(v: &F, points: &[Point], settings: &QuadratureSettings) -> Vec<Complex64>
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    points
        .par_iter()
        .map(|p| {
            let mut total = Complex64::new(0.0, 0.0);
            for (tau, weight) in settings.tau_rule() {
                let (variance, amplitude, sign) = settings.mode.kernel(tau);
                let sigma = variance.sqrt();
                let (xs, hx) = settings.axis_rule(0, p[0], sigma);
                let (ys, hy) = settings.axis_rule(1, p[1], sigma);
                let (zs, hz) = settings.axis_rule(2, p[2], sigma);
                let mut inner = Complex64::new(0.0, 0.0);
                for &x in &xs {
                    let gx = gaussian(x - p[0], variance) * hx;
                    for &y in &ys {
                        let gxy = gx * gaussian(y - p[1], variance) * hy;
                        for &z in &zs {
                            let g = gxy * gaussian(z - p[2], variance) * hz;
                            inner += v(&[x, y, z, p[3]]) * g;
                        }
                    }
                }
                total += inner * (sign * amplitude * weight);
            }
            total
        })
        .collect()
}
