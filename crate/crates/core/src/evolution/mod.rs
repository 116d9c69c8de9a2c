//! Series solutions of the 1-D evolution equation
//!
//! ```text
//! u_t = Σ a_m ∂ᵐu/∂xᵐ + Σ b_m ∂ᵐ(u^{k+1})/∂xᵐ + c ∂^{i+1}u/∂xⁱ∂t,   u(x,0) = h(x)
//! ```
//!
//! Writing `u = Σ (it)ⁿ/n! · wₙ` turns the equation into the recursion
//!
//! ```text
//! i·w_{n+1} − i·c·∂ⁱw_{n+1}/∂xⁱ = Σ a_m ∂ᵐwₙ + Σ b_m ∂ᵐwₙ^{(k+1)}
//! ```
//!
//! where `wₙ^{(p)}` are the coefficients of `u^p` in the same basis
//! ([`PowersTable`]). Each step inverts `i(Id − c∂ⁱ)` inside the exponential
//! classes present on the right-hand side.

mod closed_form;
mod recursion;

pub use closed_form::{detect_closed_form, ClosedForm, ClosedFormKind};
pub use recursion::{apply_implicit_inverse, recursion_step, series_power, solve_series, PowersTable};

use num_complex::Complex64;

use crate::funcalg::{AlgebraError, ExpPoly, Point, Var, DEFAULT_ATOM_CAP};

/// Coefficient count used when callers do not pick one.
pub const DEFAULT_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("resonance in exponential class e^(λx) with λ = {}: i(1 - c·λ^i) vanishes", crate::funcalg::format_complex(*.lambda))]
    Resonance { lambda: Complex64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<EvolutionError>,
    },
}

impl EvolutionError {
    /// The innermost error, unwrapping step context.
    pub fn root(&self) -> &EvolutionError {
        match self {
            EvolutionError::AtStep { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn step(&self) -> Option<usize> {
        match self {
            EvolutionError::AtStep { step, .. } => Some(*step),
            _ => None,
        }
    }
}

/// Coefficients and initial datum of a 1-D evolution problem with zero forcing.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionProblem {
    linear: Vec<f64>,
    nonlinear: Vec<f64>,
    mixed: f64,
    mixed_order: u32,
    nonlinear_exponent: u32,
    initial: ExpPoly,
    atom_cap: usize,
}

impl EvolutionProblem {
    /// A problem with `u_t = 0` and datum `h`; add terms with the `with_*` methods.
    pub fn new(initial: ExpPoly) -> Result<Self, EvolutionError> {
        for v in [Var::Y, Var::Z, Var::T] {
            if !initial.is_free_of(v) {
                return Err(EvolutionError::InvalidProblem(format!(
                    "initial datum depends on {v}; only x is allowed"
                )));
            }
        }
        Ok(EvolutionProblem {
            linear: Vec::new(),
            nonlinear: Vec::new(),
            mixed: 0.0,
            mixed_order: 1,
            nonlinear_exponent: 1,
            initial,
            atom_cap: DEFAULT_ATOM_CAP,
        })
    }

    /// Sets `a_m`.
    pub fn with_linear(mut self, m: usize, a: f64) -> Self {
        set_coeff(&mut self.linear, m, a);
        self
    }

    /// Sets `b_m`.
    pub fn with_nonlinear(mut self, m: usize, b: f64) -> Self {
        set_coeff(&mut self.nonlinear, m, b);
        self
    }

    /// Sets the mixed term `c ∂^{i+1}u/∂xⁱ∂t`.
    pub fn with_mixed(mut self, c: f64, order: u32) -> Result<Self, EvolutionError> {
        if order == 0 {
            return Err(EvolutionError::InvalidProblem(
                "mixed derivative order i must be positive".into(),
            ));
        }
        self.mixed = c;
        self.mixed_order = order;
        Ok(self)
    }

    /// Sets `k` in the nonlinearity `u^{k+1}`.
    pub fn with_exponent(mut self, k: u32) -> Result<Self, EvolutionError> {
        if k == 0 {
            return Err(EvolutionError::InvalidProblem(
                "nonlinear exponent k must be positive".into(),
            ));
        }
        self.nonlinear_exponent = k;
        Ok(self)
    }

    /// Only the zero forcing is supported; anything else is rejected.
    pub fn with_forcing(self, forcing: &ExpPoly) -> Result<Self, EvolutionError> {
        if forcing.is_zero() {
            Ok(self)
        } else {
            Err(EvolutionError::InvalidProblem(
                "nonzero forcing f(x,t) is not supported by the coefficient recursion".into(),
            ))
        }
    }

    pub fn with_atom_cap(mut self, cap: usize) -> Self {
        self.atom_cap = cap;
        self
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn nonlinear(&self) -> &[f64] {
        &self.nonlinear
    }

    pub fn mixed(&self) -> f64 {
        self.mixed
    }

    pub fn mixed_order(&self) -> u32 {
        self.mixed_order
    }

    pub fn nonlinear_exponent(&self) -> u32 {
        self.nonlinear_exponent
    }

    pub fn initial(&self) -> &ExpPoly {
        &self.initial
    }

    pub fn atom_cap(&self) -> usize {
        self.atom_cap
    }

    /// True when some `b_m` is nonzero.
    pub fn has_nonlinearity(&self) -> bool {
        self.nonlinear.iter().any(|&b| b != 0.0)
    }
}

fn set_coeff(v: &mut Vec<f64>, m: usize, value: f64) {
    if v.len() <= m {
        v.resize(m + 1, 0.0);
    }
    v[m] = value;
}

/// Coefficients `w₀ … w_N` of `u = Σ (it)ⁿ/n! · wₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    coefficients: Vec<ExpPoly>,
}

impl SeriesSolution {
    pub fn new(coefficients: Vec<ExpPoly>) -> Self {
        assert!(!coefficients.is_empty(), "a series needs at least w0");
        SeriesSolution { coefficients }
    }

    pub fn coefficients(&self) -> &[ExpPoly] {
        &self.coefficients
    }

    pub fn coefficient(&self, n: usize) -> &ExpPoly {
        &self.coefficients[n]
    }

    /// Highest computed index `N`.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `Σ_{n ≤ order} (it)ⁿ/n! · wₙ(p)` with `t = p[3]`.
    pub fn partial_sum_at(&self, p: &Point, order: usize) -> Complex64 {
        let order = order.min(self.order());
        let it = Complex64::new(0.0, p[3]);
        let mut weight = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, w) in self.coefficients[..=order].iter().enumerate() {
            if n > 0 {
                weight *= it / n as f64;
            }
            acc += weight * w.eval(p);
        }
        acc
    }

    /// The truncated series as an exponential polynomial in `t`.
    pub fn partial_sum(&self, order: usize) -> ExpPoly {
        let order = order.min(self.order());
        let it = ExpPoly::var(Var::T).scale(Complex64::new(0.0, 1.0));
        let mut power = ExpPoly::constant(1.0);
        let mut acc = ExpPoly::zero();
        for (n, w) in self.coefficients[..=order].iter().enumerate() {
            if n > 0 {
                power = (&power * &it).scale_real(1.0 / n as f64);
            }
            acc += &(&power * w);
        }
        acc
    }
}

/// Real part of a partial sum together with the size of its imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialSum {
    pub value: f64,
    pub imag_abs: f64,
}

/// Evaluates a 1-D series at `(x, t)` truncated at `order`.
pub fn evaluate_partial_sum(series: &SeriesSolution, x: f64, t: f64, order: usize) -> PartialSum {
    let v = series.partial_sum_at(&[x, 0.0, 0.0, t], order);
    PartialSum {
        value: v.re,
        imag_abs: v.im.abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::parse;

    #[test]
    fn rejects_multivariate_datum() {
        assert!(EvolutionProblem::new(parse("x*y").unwrap()).is_err());
        assert!(EvolutionProblem::new(parse("x*t").unwrap()).is_err());
        assert!(EvolutionProblem::new(parse("sin(x)").unwrap()).is_ok());
    }

    #[test]
    fn rejects_invalid_orders_and_forcing() {
        let p = EvolutionProblem::new(parse("x").unwrap()).unwrap();
        assert!(p.clone().with_mixed(1.0, 0).is_err());
        assert!(p.clone().with_exponent(0).is_err());
        assert!(p.clone().with_forcing(&parse("t*x").unwrap()).is_err());
        assert!(p.with_forcing(&ExpPoly::zero()).is_ok());
    }

    #[test]
    fn partial_sum_at_zero_time_is_datum() {
        let s = SeriesSolution::new(vec![parse("x^2").unwrap(), parse("i*x").unwrap()]);
        let v = evaluate_partial_sum(&s, 1.7, 0.0, 1);
        assert_eq!(v.value, 1.7 * 1.7);
        assert_eq!(v.imag_abs, 0.0);
    }

    #[test]
    fn symbolic_and_pointwise_partial_sums_agree() {
        let s = SeriesSolution::new(vec![
            parse("x").unwrap(),
            parse("i*x").unwrap(),
            parse("-2*x").unwrap(),
        ]);
        let sym = s.partial_sum(2);
        let p = [0.4, 0.0, 0.0, 0.3];
        assert!((sym.eval(&p) - s.partial_sum_at(&p, 2)).norm() < 1e-15);
    }
}
