//! Finite-difference residual checks.
//!
//! Everything here treats the candidate solution as a black box evaluated
//! at points; no symbolic derivative of the candidate is used, so these
//! checks are independent of the series machinery they validate.
//!
//! Stencils are central. With [`StencilOrder::Fourth`] (the default) the
//! 1st–4th derivative weights are the standard 5/7-point fourth-order ones;
//! [`StencilOrder::Second`] uses the 3/5-point second-order ones. Higher
//! derivatives are built by composing a 4th derivative with a lower one.
//! Derivatives of total order ≥ 3 use the coarser step `h_x_high` because
//! roundoff grows like `ε/hᵐ`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::evolution::EvolutionProblem;
use crate::funcalg::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("stencil step {step} does not fit inside grid spacing {spacing} on axis {axis}")]
    StencilOutOfRange {
        axis: &'static str,
        step: f64,
        spacing: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        Axis { lo, hi, count }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.lo + step * k as f64).collect()
    }

    fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count.max(2) - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilOrder {
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn accuracy(self) -> usize {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }
}

/// Sample grid and finite-difference steps. Absent `y`/`z` axes are pinned at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x: Axis,
    pub y: Option<Axis>,
    pub z: Option<Axis>,
    pub t: Axis,
    pub h_x: f64,
    pub h_x_high: f64,
    pub h_t: f64,
    pub stencil: StencilOrder,
}

impl Default for GridSpec {
    fn default() -> Self {
        let space = Axis::new(-1.0, 1.0, 21);
        GridSpec {
            x: space,
            y: Some(space),
            z: Some(space),
            t: Axis::new(0.05, 0.25, 11),
            h_x: 1e-3,
            h_x_high: 1e-2,
            h_t: 1e-3,
            stencil: StencilOrder::Fourth,
        }
    }
}

impl GridSpec {
    /// Default steps on an `(x, t)` grid.
    pub fn one_dimensional(x: Axis, t: Axis) -> Self {
        GridSpec {
            x,
            y: None,
            z: None,
            t,
            ..Default::default()
        }
    }

    pub fn with_steps(mut self, h_x: f64, h_t: f64) -> Self {
        self.h_x = h_x;
        self.h_t = h_t;
        self
    }

    pub fn with_stencil(mut self, stencil: StencilOrder) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        for (name, step) in [("h_x", self.h_x), ("h_x_high", self.h_x_high), ("h_t", self.h_t)] {
            if !(step > 0.0 && step.is_finite()) {
                return Err(VerifyError::InvalidGrid(format!("{name} must be positive")));
            }
        }
        let axes = [
            ("x", Some(self.x)),
            ("y", self.y),
            ("z", self.z),
            ("t", Some(self.t)),
        ];
        for (name, axis) in axes {
            let Some(axis) = axis else { continue };
            if axis.count < 3 {
                return Err(VerifyError::InvalidGrid(format!(
                    "axis {name} needs at least 3 points, got {}",
                    axis.count
                )));
            }
            if !(axis.hi > axis.lo) {
                return Err(VerifyError::InvalidGrid(format!("axis {name} is empty")));
            }
            let step = if name == "t" {
                self.h_t
            } else {
                self.h_x.max(self.h_x_high)
            };
            if step >= axis.spacing() {
                return Err(VerifyError::StencilOutOfRange {
                    axis: name,
                    step,
                    spacing: axis.spacing(),
                });
            }
        }
        Ok(())
    }

    fn x_step(&self, total_order: u32) -> f64 {
        if total_order >= 3 {
            self.h_x_high
        } else {
            self.h_x
        }
    }

    fn spatial_points(&self) -> Vec<[f64; 3]> {
        let ys = self.y.map_or(vec![0.0], |a| a.points());
        let zs = self.z.map_or(vec![0.0], |a| a.points());
        let mut out = Vec::new();
        for &x in &self.x.points() {
            for &y in &ys {
                for &z in &zs {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }

    fn points_1d(&self) -> Vec<Point> {
        let ts = self.t.points();
        self.x
            .points()
            .into_iter()
            .flat_map(|x| ts.iter().map(move |&t| [x, 0.0, 0.0, t]))
            .collect()
    }

    fn points_3d(&self) -> Vec<Point> {
        let ts = self.t.points();
        self.spatial_points()
            .into_iter()
            .flat_map(|[x, y, z]| ts.iter().map(move |&t| [x, y, z, t]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub rms: f64,
    pub worst_point: Point,
    /// Order of accuracy of the stencils that produced the residual.
    pub order_used: usize,
}

impl ResidualReport {
    fn from_samples(samples: Vec<(Point, f64)>, order_used: usize) -> Self {
        let mut max_abs = 0.0;
        let mut worst_point = [0.0; 4];
        let mut sum_sq = 0.0;
        for (p, r) in &samples {
            sum_sq += r * r;
            // NaN residuals must surface as the worst point
            if *r > max_abs || r.is_nan() {
                max_abs = *r;
                worst_point = *p;
                if r.is_nan() {
                    break;
                }
            }
        }
        let rms = if samples.is_empty() {
            0.0
        } else {
            (sum_sq / samples.len() as f64).sqrt()
        };
        ResidualReport {
            max_abs,
            rms,
            worst_point,
            order_used,
        }
    }
}

fn weights(order: StencilOrder, m: u32) -> (&'static [f64], f64) {
    // coefficients for offsets -r..=r, and the divisor applied with h^m
    match (order, m) {
        (StencilOrder::Second, 1) => (&[-1.0, 0.0, 1.0], 2.0),
        (StencilOrder::Second, 2) => (&[1.0, -2.0, 1.0], 1.0),
        (StencilOrder::Second, 3) => (&[-1.0, 2.0, 0.0, -2.0, 1.0], 2.0),
        (StencilOrder::Second, 4) => (&[1.0, -4.0, 6.0, -4.0, 1.0], 1.0),
        (StencilOrder::Fourth, 1) => (&[1.0, -8.0, 0.0, 8.0, -1.0], 12.0),
        (StencilOrder::Fourth, 2) => (&[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0),
        (StencilOrder::Fourth, 3) => (&[1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0], 8.0),
        (StencilOrder::Fourth, 4) => (&[-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0], 6.0),
        _ => unreachable!("orders above 4 are composed"),
    }
}

/// `dᵐf/dsᵐ` at `s` by central differences with step `h`.
pub fn derivative<F>(f: &F, s: f64, m: u32, h: f64, order: StencilOrder) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    derivative_dyn(f, s, m, h, order)
}

fn derivative_dyn(f: &dyn Fn(f64) -> Complex64, s: f64, m: u32, h: f64, order: StencilOrder) -> Complex64 {
    match m {
        0 => f(s),
        1..=4 => {
            let (w, div) = weights(order, m);
            let r = (w.len() / 2) as i32;
            let sum: Complex64 = w
                .iter()
                .zip(-r..=r)
                .filter(|(c, _)| **c != 0.0)
                .map(|(c, k)| f(s + k as f64 * h) * *c)
                .sum();
            sum / (div * h.powi(m as i32))
        }
        _ => {
            let inner = |q: f64| derivative_dyn(f, q, m - 4, h, order);
            derivative_dyn(&inner, s, 4, h, order)
        }
    }
}

fn along<'a, F>(u: &'a F, p: Point, axis: usize) -> impl Fn(f64) -> Complex64 + 'a
where
    F: Fn(&Point) -> Complex64,
{
    move |s| {
        let mut q = p;
        q[axis] = s;
        u(&q)
    }
}

/// Residual of the evolution equation at one point.
pub fn evolution_residual_at<F>(u: &F, problem: &EvolutionProblem, p: Point, grid: &GridSpec) -> f64
where
    F: Fn(&Point) -> Complex64,
{
    let order = grid.stencil;
    let u_t = derivative(&along(u, p, 3), p[3], 1, grid.h_t, order);
    let mut rhs = Complex64::new(0.0, 0.0);
    for (m, &a) in problem.linear().iter().enumerate() {
        if a != 0.0 {
            let m = m as u32;
            rhs += a * derivative(&along(u, p, 0), p[0], m, grid.x_step(m), order);
        }
    }
    let k1 = problem.nonlinear_exponent() as i32 + 1;
    for (m, &b) in problem.nonlinear().iter().enumerate() {
        if b != 0.0 {
            let m = m as u32;
            let power = |s: f64| {
                let mut q = p;
                q[0] = s;
                u(&q).powi(k1)
            };
            rhs += b * derivative(&power, p[0], m, grid.x_step(m), order);
        }
    }
    let c = problem.mixed();
    if c != 0.0 {
        let i = problem.mixed_order();
        let time_slope = |s: f64| {
            let mut q = p;
            q[0] = s;
            derivative(&along(u, q, 3), q[3], 1, grid.h_t, order)
        };
        rhs += c * derivative(&time_slope, p[0], i, grid.x_step(i + 1), order);
    }
    (u_t - rhs).norm()
}

/// Max/RMS residual of `u_t − Σa_m∂ᵐu − Σb_m∂ᵐ(u^{k+1}) − c∂^{i+1}u/∂xⁱ∂t` on
/// the `(x, t)` grid.
pub fn fd_residual_evolution<F>(
    u: &F,
    problem: &EvolutionProblem,
    grid: &GridSpec,
) -> Result<ResidualReport, VerifyError>
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    grid.validate()?;
    let samples = grid
        .points_1d()
        .into_par_iter()
        .map(|p| (p, evolution_residual_at(u, problem, p, grid)))
        .collect();
    Ok(ResidualReport::from_samples(samples, grid.stencil.accuracy()))
}

fn laplacian_at<F>(u: &F, p: Point, grid: &GridSpec) -> Complex64
where
    F: Fn(&Point) -> Complex64,
{
    (0..3)
        .map(|axis| derivative(&along(u, p, axis), p[axis], 2, grid.h_x, grid.stencil))
        .sum()
}

/// Residual of `u_t − a²Δu` (3-D) on the full grid.
pub fn fd_residual_heat<F>(u: &F, diffusivity: f64, grid: &GridSpec) -> Result<ResidualReport, VerifyError>
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    fd_residual_forced_heat(u, &|_: &Point| Complex64::new(0.0, 0.0), diffusivity, grid)
}

/// Residual of `ψ_t − νΔψ − F` for one scalar component.
pub fn fd_residual_forced_heat<F, G>(
    u: &F,
    forcing: &G,
    diffusivity: f64,
    grid: &GridSpec,
) -> Result<ResidualReport, VerifyError>
where
    F: Fn(&Point) -> Complex64 + Sync,
    G: Fn(&Point) -> Complex64 + Sync,
{
    grid.validate()?;
    let samples = grid
        .points_3d()
        .into_par_iter()
        .map(|p| {
            let u_t = derivative(&along(u, p, 3), p[3], 1, grid.h_t, grid.stencil);
            let r = u_t - diffusivity * laplacian_at(u, p, grid) - forcing(&p);
            (p, r.norm())
        })
        .collect();
    Ok(ResidualReport::from_samples(samples, grid.stencil.accuracy()))
}

/// Residual of `u_t − a²u_xx` on the `(x, t)` grid.
pub fn fd_residual_heat_1d<F>(u: &F, diffusivity: f64, grid: &GridSpec) -> Result<ResidualReport, VerifyError>
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    grid.validate()?;
    let samples = grid
        .points_1d()
        .into_par_iter()
        .map(|p| {
            let u_t = derivative(&along(u, p, 3), p[3], 1, grid.h_t, grid.stencil);
            let u_xx = derivative(&along(u, p, 0), p[0], 2, grid.h_x, grid.stencil);
            (p, (u_t - diffusivity * u_xx).norm())
        })
        .collect();
    Ok(ResidualReport::from_samples(samples, grid.stencil.accuracy()))
}

/// Residual of the radial heat equation `T_t − a²(T_rr + 2T_r/r)` with `r`
/// on the `x` axis. The grid must stay away from `r = 0`.
pub fn fd_residual_radial<F>(temp: &F, diffusivity: f64, grid: &GridSpec) -> Result<ResidualReport, VerifyError>
where
    F: Fn(&Point) -> Complex64 + Sync,
{
    grid.validate()?;
    if grid.x.lo <= 0.0 && grid.x.hi >= 0.0 {
        return Err(VerifyError::InvalidGrid("radial grid must not contain r = 0".into()));
    }
    let samples = grid
        .points_1d()
        .into_par_iter()
        .map(|p| {
            let r = p[0];
            let t_t = derivative(&along(temp, p, 3), p[3], 1, grid.h_t, grid.stencil);
            let t_r = derivative(&along(temp, p, 0), r, 1, grid.h_x, grid.stencil);
            let t_rr = derivative(&along(temp, p, 0), r, 2, grid.h_x, grid.stencil);
            (p, (t_t - diffusivity * (t_rr + 2.0 * t_r / r)).norm())
        })
        .collect();
    Ok(ResidualReport::from_samples(samples, grid.stencil.accuracy()))
}

/// Max/RMS of `|u(·, 0) − datum(·)|` over the spatial grid.
pub fn fd_check_initial<F, G>(u: &F, datum: &G, grid: &GridSpec) -> ResidualReport
where
    F: Fn(&Point) -> Complex64 + Sync,
    G: Fn(&Point) -> Complex64 + Sync,
{
    let samples = grid
        .spatial_points()
        .into_par_iter()
        .map(|[x, y, z]| {
            let p = [x, y, z, 0.0];
            (p, (u(&p) - datum(&p)).norm())
        })
        .collect();
    ResidualReport::from_samples(samples, 0)
}
