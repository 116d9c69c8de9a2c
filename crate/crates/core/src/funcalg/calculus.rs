//! Exact derivatives, vector calculus and the heat semigroup on eigen-atoms.

use num_complex::Complex64;

use super::poly::{Atom, ExpPoly, LinearForm, Point, Var};
use super::AlgebraError;

// Relative tolerance for the symbolic eigen-atom check.
const EIGEN_TOLERANCE: f64 = 1e-12;

fn atom_derivative(atom: &Atom, var: Var) -> [Option<Atom>; 2] {
    let p = atom.power(var);
    let from_power = (p > 0).then(|| {
        let mut powers = atom.powers;
        powers[var.index()] -= 1;
        Atom::new(atom.coeff * p as f64, powers, atom.exponent)
    });
    let slope = atom.exponent[var];
    let from_exp = (slope != Complex64::new(0.0, 0.0))
        .then(|| Atom::new(atom.coeff * slope, atom.powers, atom.exponent));
    [from_power, from_exp]
}

impl ExpPoly {
    /// `∂ᵒʳᵈᵉʳ/∂varᵒʳᵈᵉʳ`, exact.
    pub fn differentiate(&self, var: Var, order: u32) -> ExpPoly {
        let mut current = self.clone();
        for _ in 0..order {
            if current.is_zero() {
                break;
            }
            let atoms = current
                .atoms()
                .iter()
                .flat_map(|a| atom_derivative(a, var))
                .flatten()
                .collect();
            current = ExpPoly::from_atoms(atoms);
        }
        current
    }

    pub fn laplacian(&self) -> ExpPoly {
        Var::SPATIAL
            .iter()
            .map(|&v| self.differentiate(v, 2))
            .sum()
    }

    pub fn gradient(&self) -> VectorField {
        VectorField::new(
            self.differentiate(Var::X, 1),
            self.differentiate(Var::Y, 1),
            self.differentiate(Var::Z, 1),
        )
    }

    /// Applies `exp(θ·diffusivity·Δ)` with symbolic `θ = t`.
    ///
    /// Each eigen-atom `v` with `Δv = μv` picks up `exp(diffusivity·μ·t)` as an
    /// extra exponent contribution.
    pub fn heat_semigroup(&self, diffusivity: f64) -> Result<ExpPoly, AlgebraError> {
        let atoms = self
            .atoms()
            .iter()
            .map(|a| {
                let mu = laplacian_eigenvalue(a)?;
                let shift = LinearForm::single(Var::T, mu * diffusivity);
                Ok(Atom::new(a.coeff, a.powers, a.exponent + shift))
            })
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        Ok(ExpPoly::from_atoms(atoms))
    }

    /// Applies `exp(θ·diffusivity·Δ)` for a fixed numeric `θ`.
    pub fn heat_semigroup_by(&self, theta: f64, diffusivity: f64) -> Result<ExpPoly, AlgebraError> {
        let atoms = self
            .atoms()
            .iter()
            .map(|a| {
                let mu = laplacian_eigenvalue(a)?;
                Ok(Atom::new(
                    a.coeff * (mu * diffusivity * theta).exp(),
                    a.powers,
                    a.exponent,
                ))
            })
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        Ok(ExpPoly::from_atoms(atoms))
    }
}

/// Eigenvalue `μ` with `Δ(atom) = μ·atom`, verified symbolically.
///
/// `t` powers and `t` exponents ride along as parameters.
pub fn laplacian_eigenvalue(atom: &Atom) -> Result<Complex64, AlgebraError> {
    eigenvalue_under(atom, atom.exponent.spatial_square(), |p| p.laplacian())
}

/// Eigenvalue of `∂²/∂var²` on `atom`, verified symbolically.
pub fn second_derivative_eigenvalue(atom: &Atom, var: Var) -> Result<Complex64, AlgebraError> {
    let slope = atom.exponent[var];
    eigenvalue_under(atom, slope * slope, |p| p.differentiate(var, 2))
}

fn eigenvalue_under(
    atom: &Atom,
    mu: Complex64,
    op: impl Fn(&ExpPoly) -> ExpPoly,
) -> Result<Complex64, AlgebraError> {
    let single = ExpPoly::from_atom(*atom);
    let image = op(&single);
    let defect = &image - &single.scale(mu);
    if defect.max_coeff() <= EIGEN_TOLERANCE * image.max_coeff().max(atom.coeff.norm()) {
        Ok(mu)
    } else {
        Err(AlgebraError::NonEigenAtom {
            atom: super::display::atom_to_display(atom),
        })
    }
}

/// An ordered triple of scalar fields.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorField {
    pub cx: ExpPoly,
    pub cy: ExpPoly,
    pub cz: ExpPoly,
}

impl VectorField {
    pub fn new(cx: ExpPoly, cy: ExpPoly, cz: ExpPoly) -> Self {
        VectorField { cx, cy, cz }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn components(&self) -> [&ExpPoly; 3] {
        [&self.cx, &self.cy, &self.cz]
    }

    pub fn map(&self, f: impl Fn(&ExpPoly) -> ExpPoly) -> VectorField {
        VectorField::new(f(&self.cx), f(&self.cy), f(&self.cz))
    }

    pub fn try_map<E>(
        &self,
        f: impl Fn(&ExpPoly) -> Result<ExpPoly, E>,
    ) -> Result<VectorField, E> {
        Ok(VectorField::new(f(&self.cx)?, f(&self.cy)?, f(&self.cz)?))
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|c| c.is_zero())
    }

    pub fn curl(&self) -> VectorField {
        let d = |p: &ExpPoly, v| p.differentiate(v, 1);
        VectorField::new(
            &d(&self.cz, Var::Y) - &d(&self.cy, Var::Z),
            &d(&self.cx, Var::Z) - &d(&self.cz, Var::X),
            &d(&self.cy, Var::X) - &d(&self.cx, Var::Y),
        )
    }

    pub fn divergence(&self) -> ExpPoly {
        [
            self.cx.differentiate(Var::X, 1),
            self.cy.differentiate(Var::Y, 1),
            self.cz.differentiate(Var::Z, 1),
        ]
        .into_iter()
        .sum()
    }

    pub fn laplacian(&self) -> VectorField {
        self.map(ExpPoly::laplacian)
    }

    pub fn eval(&self, p: &Point) -> [Complex64; 3] {
        [self.cx.eval(p), self.cy.eval(p), self.cz.eval(p)]
    }

    pub fn approx_eq(&self, other: &VectorField, tol: f64) -> bool {
        self.cx.approx_eq(&other.cx, tol)
            && self.cy.approx_eq(&other.cy, tol)
            && self.cz.approx_eq(&other.cz, tol)
    }
}

impl std::ops::Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField::new(&self.cx + &rhs.cx, &self.cy + &rhs.cy, &self.cz + &rhs.cz)
    }
}

impl std::ops::Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField::new(&self.cx - &rhs.cx, &self.cy - &rhs.cy, &self.cz - &rhs.cz)
    }
}

impl std::ops::Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        self.map(|c| -c)
    }
}
