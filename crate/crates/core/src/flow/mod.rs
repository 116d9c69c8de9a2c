//! Linearized incompressible flow through the vorticity `ψ = ∇×u`.
//!
//! `ψ` solves the forced heat equation `ψ_t − νΔψ = ∇×f`, `ψ(0) = ∇×u₀`. The
//! homogeneous part is the heat semigroup applied to `∇×u₀`; the particular
//! part is the Duhamel integral `∫₀ᵗ e^{ν(t−s)Δ}(∇×f)(s) ds`, evaluated in
//! closed form on eigen-atoms. The velocity is `u = −Δ⁻¹(∇×ψ) + ∇φ` for a
//! harmonic potential `φ`, and the pressure is fixed up to the measured value
//! `p₀` at a reference point.

mod quadrature;

pub use quadrature::{
    inverse_laplacian_quadrature, inverse_laplacian_quadrature_fn, InverseLaplacianMode,
    QuadratureSettings,
};

use num_complex::Complex64;

use crate::funcalg::{
    format_real, laplacian_eigenvalue, to_display, AlgebraError, Atom, ExpPoly, Point, Var,
    VectorField,
};

const ZERO_EIGENVALUE: f64 = 1e-12;
const RESONANT_RATE: f64 = 1e-12;
const SINGULAR_RADIUS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("viscosity must be positive and finite, got {0}")]
    BadViscosity(f64),
    #[error("invalid flow problem: {0}")]
    InvalidProblem(String),
    #[error("{atom} has zero Laplacian eigenvalue, so the inverse Laplacian is undefined on it")]
    ZeroEigenvalue { atom: String },
    #[error("potential is not harmonic: its Laplacian is {laplacian}")]
    NonHarmonicPotential { laplacian: String },
    #[error("potential is singular at ({}, {}, {})", .point[0], .point[1], .point[2])]
    Singular { point: Point },
    #[error("symbolic velocity unavailable: {0}")]
    NoSymbolicVelocity(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The harmonic potential `φ` in `u = −Δ⁻¹(∇×ψ) + ∇φ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum HarmonicPotential {
    #[default]
    Zero,
    /// A harmonic exponential polynomial.
    Field(ExpPoly),
    /// `scale · t / √(x²+y²+z²)`, singular at the origin.
    InverseRadius { scale: f64 },
}

impl HarmonicPotential {
    /// Checks `Δφ = 0` symbolically.
    pub fn field(phi: ExpPoly) -> Result<Self, FlowError> {
        let lap = phi.laplacian();
        if lap.is_zero() {
            Ok(HarmonicPotential::Field(phi))
        } else {
            Err(FlowError::NonHarmonicPotential {
                laplacian: to_display(&lap),
            })
        }
    }

    pub fn inverse_radius() -> Self {
        HarmonicPotential::InverseRadius { scale: 1.0 }
    }

    fn radius(p: &Point) -> Result<f64, FlowError> {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        if r < SINGULAR_RADIUS {
            Err(FlowError::Singular { point: *p })
        } else {
            Ok(r)
        }
    }

    pub fn value_at(&self, p: &Point) -> Result<Complex64, FlowError> {
        match self {
            HarmonicPotential::Zero => Ok(Complex64::new(0.0, 0.0)),
            HarmonicPotential::Field(phi) => Ok(phi.eval(p)),
            HarmonicPotential::InverseRadius { scale } => {
                Ok(Complex64::new(scale * p[3] / Self::radius(p)?, 0.0))
            }
        }
    }

    /// `∂φ/∂t` at `p`.
    pub fn time_derivative_at(&self, p: &Point) -> Result<Complex64, FlowError> {
        match self {
            HarmonicPotential::Zero => Ok(Complex64::new(0.0, 0.0)),
            HarmonicPotential::Field(phi) => Ok(phi.differentiate(Var::T, 1).eval(p)),
            HarmonicPotential::InverseRadius { scale } => {
                Ok(Complex64::new(scale / Self::radius(p)?, 0.0))
            }
        }
    }

    /// `∇φ` at `p`.
    pub fn gradient_at(&self, p: &Point) -> Result<[Complex64; 3], FlowError> {
        match self {
            HarmonicPotential::Zero => Ok([Complex64::new(0.0, 0.0); 3]),
            HarmonicPotential::Field(phi) => Ok(phi.gradient().eval(p)),
            HarmonicPotential::InverseRadius { scale } => {
                let r = Self::radius(p)?;
                let f = -scale * p[3] / (r * r * r);
                Ok([0, 1, 2].map(|k| Complex64::new(f * p[k], 0.0)))
            }
        }
    }

    /// `∇φ` as a vector field, when `φ` is an exponential polynomial.
    pub fn symbolic_gradient(&self) -> Option<VectorField> {
        match self {
            HarmonicPotential::Zero => Some(VectorField::zero()),
            HarmonicPotential::Field(phi) => Some(phi.gradient()),
            HarmonicPotential::InverseRadius { .. } => None,
        }
    }

    pub fn to_display(&self) -> String {
        match self {
            HarmonicPotential::Zero => "0".into(),
            HarmonicPotential::Field(phi) => to_display(phi),
            HarmonicPotential::InverseRadius { scale } => {
                let s = if *scale == 1.0 {
                    String::new()
                } else {
                    format!("{}*", format_real(*scale))
                };
                format!("{s}t/sqrt(x^2+y^2+z^2)")
            }
        }
    }

    fn time_derivative_display(&self) -> String {
        match self {
            HarmonicPotential::Zero => "0".into(),
            HarmonicPotential::Field(phi) => to_display(&phi.differentiate(Var::T, 1)),
            HarmonicPotential::InverseRadius { scale } => {
                format!("{}/sqrt(x^2+y^2+z^2)", format_real(*scale))
            }
        }
    }
}

/// Viscosity, initial vorticity, forcing, potential and pressure gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProblem {
    viscosity: f64,
    curl_u0: VectorField,
    curl_f: VectorField,
    forcing: Option<VectorField>,
    potential: HarmonicPotential,
    reference: Point,
    p0: f64,
}

fn check_time_free(field: &VectorField, what: &str) -> Result<(), FlowError> {
    if field.components().iter().all(|c| c.is_free_of(Var::T)) {
        Ok(())
    } else {
        Err(FlowError::InvalidProblem(format!("{what} must not depend on t")))
    }
}

impl FlowProblem {
    /// From the initial vorticity `∇×u₀` directly.
    pub fn from_vorticity(viscosity: f64, curl_u0: VectorField) -> Result<Self, FlowError> {
        if !(viscosity > 0.0 && viscosity.is_finite()) {
            return Err(FlowError::BadViscosity(viscosity));
        }
        check_time_free(&curl_u0, "initial vorticity")?;
        Ok(FlowProblem {
            viscosity,
            curl_u0,
            curl_f: VectorField::zero(),
            forcing: None,
            potential: HarmonicPotential::Zero,
            reference: [0.0; 4],
            p0: 0.0,
        })
    }

    /// From a divergence-free initial velocity `u₀`.
    pub fn from_velocity(viscosity: f64, u0: &VectorField) -> Result<Self, FlowError> {
        check_time_free(u0, "initial velocity")?;
        let div = u0.divergence();
        if !div.is_zero() {
            return Err(FlowError::InvalidProblem(format!(
                "initial velocity is not divergence-free: div u0 = {}",
                to_display(&div)
            )));
        }
        Self::from_vorticity(viscosity, u0.curl())
    }

    /// Sets `∇×f` only; the pressure's forcing term stays zero.
    pub fn with_curl_forcing(mut self, curl_f: VectorField) -> Self {
        self.curl_f = curl_f;
        self
    }

    /// Sets `f` itself, which also fixes `∇×f` and activates the pressure
    /// term `∇·(Δ⁻¹f)`.
    pub fn with_forcing(mut self, f: VectorField) -> Self {
        self.curl_f = f.curl();
        self.forcing = Some(f);
        self
    }

    pub fn with_potential(mut self, potential: HarmonicPotential) -> Result<Self, FlowError> {
        if let HarmonicPotential::Field(phi) = &potential {
            HarmonicPotential::field(phi.clone())?;
        }
        self.potential = potential;
        Ok(self)
    }

    /// The pressure equals `p0` at `reference`.
    pub fn with_reference(mut self, reference: Point, p0: f64) -> Self {
        self.reference = reference;
        self.p0 = p0;
        self
    }

    pub fn viscosity(&self) -> f64 {
        self.viscosity
    }

    pub fn curl_u0(&self) -> &VectorField {
        &self.curl_u0
    }

    pub fn curl_f(&self) -> &VectorField {
        &self.curl_f
    }

    pub fn forcing(&self) -> Option<&VectorField> {
        self.forcing.as_ref()
    }

    pub fn potential(&self) -> &HarmonicPotential {
        &self.potential
    }

    pub fn reference(&self) -> Point {
        self.reference
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }
}

/// `e^{νtΔ}` applied to each component of the initial vorticity.
pub fn vorticity_homogeneous(curl_u0: &VectorField, viscosity: f64) -> Result<VectorField, FlowError> {
    Ok(curl_u0.try_map(|c| c.heat_semigroup(viscosity))?)
}

/// `∫₀ᵗ e^{ν(t−s)Δ}(∇×f)(s) ds`, exact on eigen-atoms.
///
/// An atom `S(x)·tᵐe^{ρt}` with `ΔS = λS` contributes `S·I(t)` where
/// `I(t) = ∫₀ᵗ e^{μ(t−s)} sᵐ e^{ρs} ds` and `μ = νλ`.
pub fn duhamel_particular(curl_f: &VectorField, viscosity: f64) -> Result<VectorField, FlowError> {
    curl_f.try_map(|c| duhamel_scalar(c, viscosity))
}

fn duhamel_scalar(source: &ExpPoly, viscosity: f64) -> Result<ExpPoly, FlowError> {
    let mut atoms = Vec::new();
    for a in source.atoms() {
        let mu = viscosity * laplacian_eigenvalue(a)?;
        let m = a.power(Var::T);
        let rho = a.exponent[Var::T];
        let kappa = rho - mu;
        let term = |coeff: Complex64, k: u32, rate: Complex64| {
            let mut powers = a.powers;
            powers[Var::T.index()] = k;
            let mut exponent = a.exponent;
            exponent[Var::T] = rate;
            Atom::new(a.coeff * coeff, powers, exponent)
        };
        if kappa.norm() <= RESONANT_RATE * (1.0 + rho.norm() + mu.norm()) {
            atoms.push(term(Complex64::new(1.0 / (m + 1) as f64, 0.0), m + 1, mu));
            continue;
        }
        // e^{ρt} Σ_j (−1)ʲ m!/(m−j)! t^{m−j}/κ^{j+1} − (−1)ᵐ m!/κ^{m+1} e^{μt}
        let mut falling = 1.0;
        for j in 0..=m {
            if j > 0 {
                falling *= (m - j + 1) as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            atoms.push(term(sign * falling / kappa.powu(j + 1), m - j, rho));
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        atoms.push(term(-sign * falling / kappa.powu(m + 1), 0, mu));
    }
    Ok(ExpPoly::from_atoms(atoms))
}

/// Divides each eigen-atom by its Laplacian eigenvalue.
pub fn inverse_laplacian_symbolic(v: &ExpPoly) -> Result<ExpPoly, FlowError> {
    let atoms = v
        .atoms()
        .iter()
        .map(|a| {
            let mu = laplacian_eigenvalue(a)?;
            if mu.norm() <= ZERO_EIGENVALUE {
                return Err(FlowError::ZeroEigenvalue {
                    atom: crate::funcalg::atom_to_display(a),
                });
            }
            Ok(Atom::new(a.coeff / mu, a.powers, a.exponent))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExpPoly::from_atoms(atoms))
}

/// `−Δ⁻¹(∇×ψ) + ∇φ` symbolically. Fails when `φ` is outside the algebra.
pub fn assemble_velocity(psi: &VectorField, potential: &HarmonicPotential) -> Result<VectorField, FlowError> {
    let vortical = vortical_velocity(psi)?;
    let grad = potential.symbolic_gradient().ok_or_else(|| {
        FlowError::NoSymbolicVelocity(format!(
            "the gradient of {} is not an exponential polynomial",
            potential.to_display()
        ))
    })?;
    Ok(&vortical + &grad)
}

fn vortical_velocity(psi: &VectorField) -> Result<VectorField, FlowError> {
    let inv = psi.curl().try_map(inverse_laplacian_symbolic)?;
    Ok(-&inv)
}

fn forcing_term(forcing: Option<&VectorField>) -> Result<Option<ExpPoly>, FlowError> {
    forcing
        .map(|f| Ok(f.try_map(inverse_laplacian_symbolic)?.divergence()))
        .transpose()
}

/// Everything needed to evaluate the pressure at a query point.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureRecord {
    pub p0: f64,
    pub reference: Point,
    pub potential: HarmonicPotential,
    /// `∇·(Δ⁻¹f)`, or `None` when only `∇×f` is known.
    pub forcing_term: Option<ExpPoly>,
}

impl PressureRecord {
    fn variable_part(&self, q: &Point) -> Result<f64, FlowError> {
        let phi_t = self.potential.time_derivative_at(q)?;
        let f = self.forcing_term.as_ref().map_or(0.0, |g| g.eval(q).re);
        Ok(f - phi_t.re)
    }

    /// `p₀ + φ_t(ref) − F(ref) − φ_t(q) + F(q)` with `F = ∇·(Δ⁻¹f)`.
    pub fn at(&self, q: &Point) -> Result<f64, FlowError> {
        Ok(self.p0 - self.variable_part(&self.reference)? + self.variable_part(q)?)
    }

    /// Human-readable `p(x,y,z,t) = C − φ_t [+ F]`.
    pub fn formula(&self) -> Result<String, FlowError> {
        let constant = self.p0 - self.variable_part(&self.reference)?;
        let mut s = format!("p = {} - ({})", format_real(constant), self.potential.time_derivative_display());
        if let Some(f) = &self.forcing_term {
            s.push_str(&format!(" + ({})", to_display(f)));
        }
        Ok(s)
    }
}

/// Pressure at `q` for the problem's gauge.
pub fn pressure(problem: &FlowProblem, q: &Point) -> Result<f64, FlowError> {
    PressureRecord {
        p0: problem.p0,
        reference: problem.reference,
        potential: problem.potential.clone(),
        forcing_term: forcing_term(problem.forcing())?,
    }
    .at(q)
}

/// Solved vorticity, velocity and pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub psi: VectorField,
    pub curl_psi: VectorField,
    /// `−Δ⁻¹(∇×ψ)`, when every atom of `∇×ψ` has a nonzero eigenvalue.
    pub vortical: Result<VectorField, FlowError>,
    /// The full symbolic velocity, when both parts are available.
    pub velocity: Option<VectorField>,
    pub pressure: PressureRecord,
}

impl FlowSolution {
    /// Velocity at `p` from the symbolic vortical part and the exact `∇φ`.
    pub fn velocity_at(&self, p: &Point) -> Result<[Complex64; 3], FlowError> {
        let vortical = self.vortical.as_ref().map_err(Clone::clone)?;
        let grad = self.pressure.potential.gradient_at(p)?;
        let v = vortical.eval(p);
        Ok([v[0] + grad[0], v[1] + grad[1], v[2] + grad[2]])
    }

    /// Velocity at each point with `Δ⁻¹` replaced by quadrature.
    pub fn velocity_quadrature(
        &self,
        points: &[Point],
        settings: &QuadratureSettings,
    ) -> Result<Vec<[Complex64; 3]>, FlowError> {
        let parts: Vec<Vec<Complex64>> = self
            .curl_psi
            .components()
            .iter()
            .map(|c| inverse_laplacian_quadrature(c, points, settings))
            .collect();
        points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let grad = self.pressure.potential.gradient_at(p)?;
                Ok([0, 1, 2].map(|d| grad[d] - parts[d][k]))
            })
            .collect()
    }

    pub fn pressure_at(&self, q: &Point) -> Result<f64, FlowError> {
        self.pressure.at(q)
    }
}

/// Runs the whole pipeline.
pub fn solve_flow(problem: &FlowProblem) -> Result<FlowSolution, FlowError> {
    let homogeneous = vorticity_homogeneous(&problem.curl_u0, problem.viscosity)?;
    let particular = duhamel_particular(&problem.curl_f, problem.viscosity)?;
    let psi = &homogeneous + &particular;
    let curl_psi = psi.curl();
    let vortical = vortical_velocity(&psi);
    let velocity = match (&vortical, problem.potential.symbolic_gradient()) {
        (Ok(v), Some(g)) => Some(v + &g),
        _ => None,
    };
    let pressure = PressureRecord {
        p0: problem.p0,
        reference: problem.reference,
        potential: problem.potential.clone(),
        forcing_term: forcing_term(problem.forcing())?,
    };
    Ok(FlowSolution {
        psi,
        curl_psi,
        vortical,
        velocity,
        pressure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::parse;

    fn p(s: &str) -> ExpPoly {
        parse(s).unwrap()
    }

    fn field(a: &str, b: &str, c: &str) -> VectorField {
        VectorField::new(p(a), p(b), p(c))
    }

    #[test]
    fn homogeneous_vorticity() {
        let nu = 0.1;
        let got = vorticity_homogeneous(&field("sin(x)", "0", "0"), nu).unwrap();
        assert!(got.approx_eq(&field("exp(-0.1*t)*sin(x)", "0", "0"), 1e-14));
        assert!(vorticity_homogeneous(&VectorField::zero(), nu).unwrap().is_zero());
        assert!(vorticity_homogeneous(&field("x^2", "0", "0"), nu).is_err());
    }

    #[test]
    fn duhamel_pieces() {
        let nu = 0.1;
        let got = duhamel_particular(&field("t*cos(x)", "exp(t)", "0"), nu).unwrap();
        let first = p("(-1 + 0.1*t + exp(-0.1*t))*cos(x)").scale_real(100.0);
        assert!(got.cx.approx_eq(&first, 1e-12));
        assert!(got.cy.approx_eq(&p("exp(t) - 1"), 1e-14));
        assert!(got.cz.is_zero());
    }

    #[test]
    fn duhamel_resonant_rate() {
        // sin(x) e^{-νt} is already a free mode, so the integral is t e^{-νt} sin x
        let got = duhamel_scalar(&p("exp(-0.5*t)*sin(x)"), 0.5).unwrap();
        assert!(got.approx_eq(&p("t*exp(-0.5*t)*sin(x)"), 1e-14));
    }

    #[test]
    fn duhamel_solves_forced_equation() {
        let nu = 0.3;
        let src = p("t^2*exp(0.2*t)*sin(x-y) + 3*t*cos(z) + exp(x)");
        let psi = duhamel_scalar(&src, nu).unwrap();
        let residual = &(&psi.differentiate(Var::T, 1) - &psi.laplacian().scale_real(nu)) - &src;
        assert!(residual.max_coeff() < 1e-12, "{residual}");
        assert!(psi.substitute(Var::T, 0.0).max_coeff() < 1e-12);
    }

    #[test]
    fn inverse_laplacian_examples() {
        assert!(inverse_laplacian_symbolic(&p("sin(x)")).unwrap().approx_eq(&p("-sin(x)"), 1e-15));
        let got = inverse_laplacian_symbolic(&p("exp(x+y+z)")).unwrap();
        assert!(got.approx_eq(&p("exp(x+y+z)/3"), 1e-15));
        assert!(matches!(
            inverse_laplacian_symbolic(&p("2")),
            Err(FlowError::ZeroEigenvalue { .. })
        ));
        assert!(matches!(
            inverse_laplacian_symbolic(&p("x")),
            Err(FlowError::ZeroEigenvalue { .. })
        ));
        assert!(matches!(
            inverse_laplacian_symbolic(&p("x^2")),
            Err(FlowError::Algebra(AlgebraError::NonEigenAtom { .. }))
        ));
    }

    #[test]
    fn potential_only_velocity() {
        let phi = HarmonicPotential::field(p("x*y*z")).unwrap();
        let u = assemble_velocity(&VectorField::zero(), &phi).unwrap();
        assert!(u.approx_eq(&field("y*z", "x*z", "x*y"), 1e-15));
        assert!(HarmonicPotential::field(p("x^2")).is_err());
    }

    #[test]
    fn single_mode_velocity_is_solenoidal() {
        let psi = field("exp(-0.1*t)*sin(x)", "0", "0");
        let u = assemble_velocity(&psi, &HarmonicPotential::Zero).unwrap();
        assert!(u.divergence().is_zero());
        let poisson = &u.laplacian() + &psi.curl();
        assert!(poisson.is_zero());
    }

    #[test]
    fn inverse_radius_potential() {
        let phi = HarmonicPotential::inverse_radius();
        let q = [1.0, 2.0, 2.0, 0.5];
        assert!((phi.time_derivative_at(&q).unwrap().re - 1.0 / 3.0).abs() < 1e-15);
        let g = phi.gradient_at(&q).unwrap();
        assert!((g[1].re + 0.5 * 2.0 / 27.0).abs() < 1e-15);
        assert!(matches!(
            phi.gradient_at(&[0.0, 0.0, 0.0, 1.0]),
            Err(FlowError::Singular { .. })
        ));
        assert!(phi.symbolic_gradient().is_none());
    }

    #[test]
    fn pressure_gauge() {
        let base = FlowProblem::from_vorticity(0.1, VectorField::zero())
            .unwrap()
            .with_potential(HarmonicPotential::inverse_radius())
            .unwrap()
            .with_reference([2.0, 0.0, 0.0, 0.0], 5.0);
        let q = [1.0, 1.0, 1.0, 0.3];
        let want = 5.0 + 0.5 - 1.0 / 3f64.sqrt();
        assert!((pressure(&base, &q).unwrap() - want).abs() < 1e-12);
        assert_eq!(pressure(&base, &[2.0, 0.0, 0.0, 0.7]).unwrap(), 5.0);
        assert!(pressure(&base, &[0.0; 4]).is_err());
        let sol = solve_flow(&base).unwrap();
        assert_eq!(sol.pressure.formula().unwrap(), format!("p = {:?} - (1/sqrt(x^2+y^2+z^2))", 5.5));
    }

    #[test]
    fn explicit_forcing_enters_pressure() {
        // f = (sin x, 0, 0): Δ⁻¹f = -sin x, div = -cos x
        let f = field("sin(x)", "0", "0");
        let prob = FlowProblem::from_vorticity(1.0, VectorField::zero())
            .unwrap()
            .with_forcing(f)
            .with_reference([0.0; 4], 1.0);
        assert!(prob.curl_f().is_zero());
        let q = [1.0, 0.0, 0.0, 0.0];
        let want = 1.0 + 1.0 - 1f64.cos();
        assert!((pressure(&prob, &q).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn trivial_flow() {
        let prob = FlowProblem::from_vorticity(0.5, VectorField::zero())
            .unwrap()
            .with_reference([0.3, 0.1, 0.2, 0.0], 2.0);
        let sol = solve_flow(&prob).unwrap();
        assert!(sol.psi.is_zero());
        assert!(sol.velocity.as_ref().unwrap().is_zero());
        assert_eq!(sol.pressure_at(&[1.0, -1.0, 4.0, 9.0]).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(FlowProblem::from_vorticity(0.0, VectorField::zero()).is_err());
        assert!(FlowProblem::from_vorticity(1.0, field("t", "0", "0")).is_err());
        let err = FlowProblem::from_velocity(1.0, &field("x", "0", "0")).unwrap_err();
        assert!(matches!(err, FlowError::InvalidProblem(_)));
        let ok = FlowProblem::from_velocity(1.0, &field("sin(y)", "sin(z)", "sin(x)")).unwrap();
        assert!(ok.curl_u0().approx_eq(&field("-cos(z)", "-cos(x)", "-cos(y)"), 1e-15));
    }
}
