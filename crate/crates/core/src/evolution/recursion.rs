use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{EvolutionError, EvolutionProblem, SeriesSolution};
use crate::funcalg::{Atom, ExpPoly, LinearForm, Var};

// |1 − cλⁱ| below this (relative) counts as a singular diagonal.
const RESONANCE_TOLERANCE: f64 = 1e-12;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn falling(top: usize, count: usize) -> f64 {
    (0..count).map(|j| (top - j) as f64).product()
}

/// Solves `i·w − i·c·∂ⁱw/∂xⁱ = g` inside the exponential classes of `g`.
///
/// On a class `P(x)·e^{λx}` the operator acts as
/// `i(1 − cλⁱ)·P − i·c·Σ_{j≥1} C(i,j) λ^{i−j} P⁽ʲ⁾`, which is upper triangular in
/// the degree of `P`; back-substitution from the top degree gives the unique
/// solution in the same class. Powers of `y`, `z` and `t` are carried along
/// untouched.
pub fn apply_implicit_inverse(g: &ExpPoly, c: f64, i: u32) -> Result<ExpPoly, EvolutionError> {
    let unit = Complex64::new(0.0, 1.0);
    // class key -> (exponent, inert powers, coefficients by x-degree)
    type Class = (LinearForm, [u32; 3], BTreeMap<u32, Complex64>);
    let mut classes: BTreeMap<([u32; 3], [i64; 8]), Class> = BTreeMap::new();
    for a in g.atoms() {
        let inert = [a.powers[1], a.powers[2], a.powers[3]];
        let entry = classes
            .entry((inert, a.exponent.key()))
            .or_insert_with(|| (a.exponent, inert, BTreeMap::new()));
        *entry.2.entry(a.powers[0]).or_default() += a.coeff;
    }

    let order = i as usize;
    let mut out = Vec::new();
    for (exponent, inert, by_degree) in classes.into_values() {
        let lambda = exponent[Var::X];
        let lam_pow = lambda.powu(i);
        let gap = Complex64::new(1.0, 0.0) - lam_pow * c;
        if gap.norm() <= RESONANCE_TOLERANCE * (1.0 + (lam_pow * c).norm()) {
            return Err(EvolutionError::Resonance { lambda });
        }
        let diag = unit * gap;
        // off-diagonal weights e_j = −i c C(i,j) λ^{i−j}, j = 1..=i
        let off: Vec<Complex64> = (1..=order)
            .map(|j| -unit * c * binomial(order, j) * lambda.powu((order - j) as u32))
            .collect();

        let top = *by_degree.keys().next_back().unwrap_or(&0) as usize;
        let mut p = vec![Complex64::new(0.0, 0.0); top + 1];
        for d in (0..=top).rev() {
            let mut rhs = by_degree.get(&(d as u32)).copied().unwrap_or_default();
            for j in 1..=order.min(top - d) {
                rhs -= off[j - 1] * p[d + j] * falling(d + j, j);
            }
            p[d] = rhs / diag;
        }
        for (d, coeff) in p.into_iter().enumerate() {
            out.push(Atom::new(
                coeff,
                [d as u32, inert[0], inert[1], inert[2]],
                exponent,
            ));
        }
    }
    Ok(ExpPoly::from_atoms(out))
}

/// Coefficients `wₙ^{(p)}` of `u^p = Σ (it)ⁿ/n! · wₙ^{(p)}` for `1 ≤ p ≤ P`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowersTable {
    // rows[p - 1][n]
    rows: Vec<Vec<ExpPoly>>,
    cap: usize,
}

impl PowersTable {
    pub fn new(max_power: usize, cap: usize) -> Self {
        assert!(max_power >= 1);
        PowersTable {
            rows: vec![Vec::new(); max_power],
            cap,
        }
    }

    pub fn max_power(&self) -> usize {
        self.rows.len()
    }

    /// Number of filled columns.
    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows[0].is_empty()
    }

    pub fn get(&self, p: usize, n: usize) -> &ExpPoly {
        &self.rows[p - 1][n]
    }

    /// Appends `w_n` (the next first-power coefficient) and fills column `n`.
    pub fn push(&mut self, w: ExpPoly) -> Result<(), EvolutionError> {
        let n = self.len();
        self.rows[0].push(w);
        for p in 2..=self.max_power() {
            let entry = series_power(self, p, n)?;
            self.rows[p - 1].push(entry);
        }
        Ok(())
    }
}

/// `wₙ^{(p)} = Σ_{j=0}^{n} C(n,j) · wⱼ^{(1)} · w_{n−j}^{(p−1)}`.
pub fn series_power(table: &PowersTable, p: usize, n: usize) -> Result<ExpPoly, EvolutionError> {
    if p == 1 {
        return Ok(table.get(1, n).clone());
    }
    let mut atoms: Vec<Atom> = Vec::new();
    for j in 0..=n {
        let term = table
            .get(1, j)
            .checked_mul(table.get(p - 1, n - j), table.cap)?;
        let weight = binomial(n, j);
        atoms.extend(term.atoms().iter().map(|a| Atom {
            coeff: a.coeff * weight,
            ..*a
        }));
    }
    Ok(ExpPoly::from_atoms(atoms).within_cap(table.cap)?)
}

/// Computes `w_{n+1}` from `w_0 … w_n` (and, for nonlinear problems, the
/// filled powers table).
pub fn recursion_step(
    problem: &EvolutionProblem,
    coefficients: &[ExpPoly],
    table: Option<&PowersTable>,
    n: usize,
) -> Result<ExpPoly, EvolutionError> {
    let w = &coefficients[n];
    let mut rhs: ExpPoly = problem
        .linear()
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(m, &a)| w.differentiate(Var::X, m as u32).scale_real(a))
        .sum();
    if problem.has_nonlinearity() {
        let table = table.ok_or_else(|| {
            EvolutionError::InvalidProblem("nonlinear step needs a powers table".into())
        })?;
        let power = table.get(problem.nonlinear_exponent() as usize + 1, n);
        for (m, &b) in problem.nonlinear().iter().enumerate() {
            if b != 0.0 {
                rhs += &power.differentiate(Var::X, m as u32).scale_real(b);
            }
        }
    }
    let next = apply_implicit_inverse(&rhs, problem.mixed(), problem.mixed_order())?;
    Ok(next.within_cap(problem.atom_cap())?)
}

/// Runs the recursion up to `w_{max_order}`.
pub fn solve_series(
    problem: &EvolutionProblem,
    max_order: usize,
) -> Result<SeriesSolution, EvolutionError> {
    let at = |step: usize| {
        move |e: EvolutionError| EvolutionError::AtStep {
            step,
            source: Box::new(e),
        }
    };
    let mut coefficients = vec![problem.initial().clone()];
    let mut table = problem.has_nonlinearity().then(|| {
        PowersTable::new(
            problem.nonlinear_exponent() as usize + 1,
            problem.atom_cap(),
        )
    });
    if let Some(t) = table.as_mut() {
        t.push(problem.initial().clone()).map_err(at(0))?;
    }
    for n in 0..max_order {
        let next = recursion_step(problem, &coefficients, table.as_ref(), n).map_err(at(n + 1))?;
        if let Some(t) = table.as_mut() {
            t.push(next.clone()).map_err(at(n + 1))?;
        }
        coefficients.push(next);
    }
    Ok(SeriesSolution::new(coefficients))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::parse;

    fn p(s: &str) -> ExpPoly {
        parse(s).unwrap()
    }

    fn rlw() -> EvolutionProblem {
        EvolutionProblem::new(p("x"))
            .unwrap()
            .with_nonlinear(1, -0.5)
            .with_mixed(1.0, 2)
            .unwrap()
    }

    #[test]
    fn implicit_inverse_examples() {
        let w = apply_implicit_inverse(&p("-x"), 1.0, 2).unwrap();
        assert!(w.approx_eq(&p("i*x"), 1e-14));

        let w = apply_implicit_inverse(&p("exp(-x)"), 2.0, 2).unwrap();
        assert!(w.approx_eq(&p("i*exp(-x)"), 1e-14));
        let w = apply_implicit_inverse(&p("-exp(-x)"), 2.0, 2).unwrap();
        assert!(w.approx_eq(&p("-i*exp(-x)"), 1e-14));

        let err = apply_implicit_inverse(&p("exp(x)"), 1.0, 2).unwrap_err();
        assert_eq!(err, EvolutionError::Resonance { lambda: Complex64::new(1.0, 0.0) });
    }

    #[test]
    fn implicit_inverse_back_substitutes_polynomial_parts() {
        // i w − i w'' = x^3 e^{2x} with c = 1, i = 2
        let g = p("x^3*exp(2*x)");
        let w = apply_implicit_inverse(&g, 1.0, 2).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let back = &w.scale(i) - &w.differentiate(Var::X, 2).scale(i);
        assert!(back.approx_eq(&g, 1e-12));
        // t powers are inert
        let g = p("t^2*x*sin(x)");
        let w = apply_implicit_inverse(&g, 0.5, 3).unwrap();
        let back = &w.scale(i) - &w.differentiate(Var::X, 3).scale(i * 0.5);
        assert!(back.approx_eq(&g, 1e-12));
    }

    #[test]
    fn zero_mixed_coefficient_is_a_plain_division() {
        let w = apply_implicit_inverse(&p("x^2"), 0.0, 1).unwrap();
        assert!(w.approx_eq(&p("-i*x^2"), 1e-15));
    }

    #[test]
    fn rlw_first_steps() {
        let prob = rlw();
        let mut table = PowersTable::new(2, prob.atom_cap());
        let mut coeffs = vec![p("x")];
        table.push(p("x")).unwrap();
        let w1 = recursion_step(&prob, &coeffs, Some(&table), 0).unwrap();
        assert!(w1.approx_eq(&p("i*x"), 1e-14));
        coeffs.push(w1.clone());
        table.push(w1).unwrap();
        assert!(series_power(&table, 2, 1).unwrap().approx_eq(&p("2*i*x^2"), 1e-14));
        let w2 = recursion_step(&prob, &coeffs, Some(&table), 1).unwrap();
        assert!(w2.approx_eq(&p("-2*x"), 1e-14));
    }

    #[test]
    fn series_power_identity_and_square() {
        let mut table = PowersTable::new(3, 1000);
        table.push(p("x + 1")).unwrap();
        assert_eq!(series_power(&table, 1, 0).unwrap(), p("x + 1"));
        assert!(series_power(&table, 2, 0).unwrap().approx_eq(&p("(x+1)^2"), 1e-14));
        assert!(table.get(3, 0).approx_eq(&p("(x+1)^3"), 1e-14));
    }

    #[test]
    fn trivial_problems() {
        let zero = EvolutionProblem::new(ExpPoly::zero()).unwrap().with_linear(2, 1.0);
        let s = solve_series(&zero, 5).unwrap();
        assert!(s.coefficients().iter().all(ExpPoly::is_zero));

        let inert = EvolutionProblem::new(p("sin(x)")).unwrap();
        let s = solve_series(&inert, 3).unwrap();
        assert!(s.coefficients()[1..].iter().all(ExpPoly::is_zero));
    }

    #[test]
    fn resonance_is_reported_with_step() {
        let prob = EvolutionProblem::new(p("exp(x)"))
            .unwrap()
            .with_linear(1, 1.0)
            .with_mixed(1.0, 2)
            .unwrap();
        let err = solve_series(&prob, 4).unwrap_err();
        assert_eq!(err.step(), Some(1));
        assert!(matches!(err.root(), EvolutionError::Resonance { lambda } if *lambda == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn atom_cap_overflow_propagates() {
        let prob = EvolutionProblem::new(p("sin(x) + cos(2*x) + exp(3*x)"))
            .unwrap()
            .with_nonlinear(0, 1.0)
            .with_exponent(3)
            .unwrap()
            .with_atom_cap(20);
        let err = solve_series(&prob, 6).unwrap_err();
        assert!(matches!(err.root(), EvolutionError::Algebra(_)));
    }
}
