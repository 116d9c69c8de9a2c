//! Heat equation `u_t = a²Δu` in the coefficient basis `u = Σ (it)ᵏ/k!·wₖ`.
//!
//! The recursion collapses to `w_{k+1} = −ia²Δwₖ`, i.e. `wₖ = (−ia²)ᵏΔᵏu₀`,
//! and resums to the heat semigroup whenever `u₀` is built from Laplacian
//! eigen-atoms. The radially symmetric ball reduces to the same 1-D problem
//! for `V = r·T`, with `r` carried in the `x` slot.

use num_complex::Complex64;

use crate::evolution::SeriesSolution;
use crate::funcalg::{
    second_derivative_eigenvalue, AlgebraError, Atom, ExpPoly, LinearForm, Var, DEFAULT_ATOM_CAP,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffusionError {
    #[error("diffusivity must be positive and finite, got {0}")]
    BadDiffusivity(f64),
    #[error("initial datum must not depend on t")]
    TimeDependentDatum,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn check_diffusivity(a2: f64) -> Result<(), DiffusionError> {
    if a2 > 0.0 && a2.is_finite() {
        Ok(())
    } else {
        Err(DiffusionError::BadDiffusivity(a2))
    }
}

/// `u_t = a²Δu` on ℝ³ with `u(·,0) = u₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProblem {
    diffusivity: f64,
    initial: ExpPoly,
}

impl HeatProblem {
    pub fn new(diffusivity: f64, initial: ExpPoly) -> Result<Self, DiffusionError> {
        check_diffusivity(diffusivity)?;
        if !initial.is_free_of(Var::T) {
            return Err(DiffusionError::TimeDependentDatum);
        }
        Ok(HeatProblem {
            diffusivity,
            initial,
        })
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    pub fn initial(&self) -> &ExpPoly {
        &self.initial
    }
}

/// Coefficients `wₖ = (−ia²)ᵏΔᵏu₀` for `k ≤ max_order`.
pub fn heat_series(problem: &HeatProblem, max_order: usize) -> Result<SeriesSolution, DiffusionError> {
    let step = Complex64::new(0.0, -problem.diffusivity);
    let mut w = vec![problem.initial.clone()];
    for k in 0..max_order {
        let next = w[k].laplacian().scale(step).within_cap(DEFAULT_ATOM_CAP)?;
        w.push(next);
    }
    Ok(SeriesSolution::new(w))
}

/// Resummed solution `e^{a²tΔ}u₀`; every atom must be a Laplacian eigen-atom.
pub fn heat_closed_form(problem: &HeatProblem) -> Result<ExpPoly, DiffusionError> {
    Ok(problem.initial.heat_semigroup(problem.diffusivity)?)
}

/// Growth diagnostics for the coefficient sequence.
///
/// Uniform convergence of `Σ δᵏ/k!·Δᵏu₀` needs `‖Δᵏu₀‖ ≲ k!/δᵏ`. The rates
/// `(‖wₖ‖/k!)^{1/k} / a²` estimate `1/δ`; a rising tail suggests the series
/// only converges for very small `t`, if at all.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub rates: Vec<f64>,
    /// True when the last rate exceeds `limit`.
    pub exceeds: bool,
}

pub fn growth_report(series: &SeriesSolution, diffusivity: f64, limit: f64) -> GrowthReport {
    let mut log_fact = 0.0;
    let mut rates = Vec::new();
    for (k, w) in series.coefficients().iter().enumerate().skip(1) {
        log_fact += (k as f64).ln();
        let norm = w.coeff_norm();
        let rate = if norm == 0.0 {
            0.0
        } else {
            ((norm.ln() - log_fact) / k as f64).exp() / diffusivity
        };
        rates.push(rate);
    }
    let exceeds = rates.last().is_some_and(|&r| r > limit);
    GrowthReport { rates, exceeds }
}

/// Radial heat conduction in a ball, solved through `V = r·T`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallProblem {
    diffusivity: f64,
    scaled_initial: ExpPoly,
    radius: Option<f64>,
    boundary_h: Option<f64>,
}

impl BallProblem {
    /// From the temperature profile `T₀(r)` (with `r` in the `x` slot).
    pub fn new(diffusivity: f64, initial_temperature: ExpPoly) -> Result<Self, DiffusionError> {
        let scaled = &ExpPoly::var(Var::X) * &initial_temperature;
        Self::from_scaled(diffusivity, scaled)
    }

    /// From `V₀(r) = r·T₀(r)` directly, for profiles like `sin(κr)/r` that
    /// are not exponential polynomials themselves.
    pub fn from_scaled(diffusivity: f64, scaled_initial: ExpPoly) -> Result<Self, DiffusionError> {
        check_diffusivity(diffusivity)?;
        if !scaled_initial.is_free_of(Var::T) {
            return Err(DiffusionError::TimeDependentDatum);
        }
        Ok(BallProblem {
            diffusivity,
            scaled_initial,
            radius: None,
            boundary_h: None,
        })
    }

    /// Records the Robin condition `∂T/∂r + hT = 0` at `r = R`. It is only
    /// diagnosed, never imposed.
    pub fn with_boundary(mut self, radius: f64, h: f64) -> Self {
        self.radius = Some(radius);
        self.boundary_h = Some(h);
        self
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    pub fn scaled_initial(&self) -> &ExpPoly {
        &self.scaled_initial
    }
}

/// Series for `V` plus the presentation `T = V/r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSolution {
    pub series: SeriesSolution,
    diffusivity: f64,
    radius: Option<f64>,
    boundary_h: Option<f64>,
}

impl BallSolution {
    /// `V(r,t)` from the partial sum of the given order.
    pub fn scaled_at(&self, r: f64, t: f64, order: usize) -> Complex64 {
        self.series.partial_sum_at(&[r, 0.0, 0.0, t], order)
    }

    /// `T(r,t) = V(r,t)/r`; undefined at `r = 0`.
    pub fn temperature_at(&self, r: f64, t: f64, order: usize) -> f64 {
        self.scaled_at(r, t, order).re / r
    }

    /// Resummed `V(r,t)` when every atom of `V₀` is an eigenfunction of `d²/dr²`.
    pub fn scaled_closed_form(&self) -> Result<ExpPoly, DiffusionError> {
        let atoms = self
            .series
            .coefficient(0)
            .atoms()
            .iter()
            .map(|a| {
                let mu = second_derivative_eigenvalue(a, Var::X)?;
                let shift = LinearForm::single(Var::T, mu * self.diffusivity);
                Ok(Atom::new(a.coeff, a.powers, a.exponent + shift))
            })
            .collect::<Result<Vec<_>, DiffusionError>>()?;
        Ok(ExpPoly::from_atoms(atoms))
    }

    /// `|∂V/∂r + (h − 1/R)V|` at `r = R`, or `None` without boundary data.
    pub fn boundary_defect(&self, t: f64, order: usize) -> Option<f64> {
        let (radius, h) = (self.radius?, self.boundary_h?);
        let v = self.series.partial_sum(order);
        let p = [radius, 0.0, 0.0, t];
        let dv = v.differentiate(Var::X, 1).eval(&p);
        Some((dv + (h - 1.0 / radius) * v.eval(&p)).norm())
    }
}

/// Coefficients `wₖ = (−ia²)ᵏ d²ᵏ/dr²ᵏ [r·T₀(r)]`.
pub fn ball_series(problem: &BallProblem, max_order: usize) -> Result<BallSolution, DiffusionError> {
    let step = Complex64::new(0.0, -problem.diffusivity);
    let mut w = vec![problem.scaled_initial.clone()];
    for k in 0..max_order {
        let next = w[k]
            .differentiate(Var::X, 2)
            .scale(step)
            .within_cap(DEFAULT_ATOM_CAP)?;
        w.push(next);
    }
    Ok(BallSolution {
        series: SeriesSolution::new(w),
        diffusivity: problem.diffusivity,
        radius: problem.radius,
        boundary_h: problem.boundary_h,
    })
}
