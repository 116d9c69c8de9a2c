//! Canonical storage for exponential polynomials.
//!
//! An [`ExpPoly`] is a finite sum of [`Atom`]s, each of the form
//! `c * x^a y^b z^d t^e * exp(L)` where `c` is complex and `L` is a complex
//! linear form in the four variables. Trigonometric and hyperbolic functions
//! live here in Euler form, which keeps the set closed under products and
//! derivatives with a single atom kind.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use super::AlgebraError;

/// Coefficients with modulus below this are dropped during normalization.
pub const MERGE_TOLERANCE: f64 = 1e-14;

/// Default ceiling on the number of atoms a single value may hold.
pub const DEFAULT_ATOM_CAP: usize = 10_000;

// Exponent components closer than this to zero are snapped to exactly zero.
const EXPONENT_SNAP: f64 = 1e-13;

// Quantization grid used to decide whether two exponents name the same class.
const KEY_SCALE: f64 = 4_294_967_296.0; // 2^32

/// The four independent variables. Spatial variables come first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y,
    Z,
    T,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::Z, Var::T];
    pub const SPATIAL: [Var; 3] = [Var::X, Var::Y, Var::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::T => "t",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "z" => Some(Var::Z),
            "t" => Some(Var::T),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point of ℝ⁴ in variable order `(x, y, z, t)`.
pub type Point = [f64; 4];

/// Complex linear form `Σ l_v · v` without a constant term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearForm(pub [Complex64; 4]);

impl LinearForm {
    pub fn zero() -> Self {
        LinearForm([Complex64::new(0.0, 0.0); 4])
    }

    pub fn single(var: Var, coeff: Complex64) -> Self {
        let mut form = Self::zero();
        form[var] = coeff;
        form
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// True when no spatial variable appears.
    pub fn is_spatially_constant(&self) -> bool {
        Var::SPATIAL.iter().all(|&v| self[v] == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, p: &Point) -> Complex64 {
        self.0.iter().zip(p.iter()).map(|(c, &v)| c * v).sum()
    }

    /// `Σ_{x,y,z} l_v²`, the Laplacian eigenvalue of `exp(L)`.
    pub fn spatial_square(&self) -> Complex64 {
        Var::SPATIAL.iter().map(|&v| self[v] * self[v]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for c in out.0.iter_mut() {
            *c *= s;
        }
        out
    }

    /// Real and imaginary parts as two real forms.
    pub fn split(&self) -> (LinearForm, LinearForm) {
        let mut re = Self::zero();
        let mut im = Self::zero();
        for i in 0..4 {
            re.0[i] = Complex64::new(self.0[i].re, 0.0);
            im.0[i] = Complex64::new(self.0[i].im, 0.0);
        }
        (re, im)
    }

    fn snapped(mut self) -> Self {
        for c in self.0.iter_mut() {
            if c.re.abs() < EXPONENT_SNAP {
                c.re = 0.0;
            }
            if c.im.abs() < EXPONENT_SNAP {
                c.im = 0.0;
            }
        }
        self
    }

    pub(crate) fn key(&self) -> [i64; 8] {
        let mut k = [0i64; 8];
        for (i, c) in self.0.iter().enumerate() {
            k[2 * i] = quantize(c.re);
            k[2 * i + 1] = quantize(c.im);
        }
        k
    }
}

fn quantize(v: f64) -> i64 {
    let q = (v * KEY_SCALE).round();
    // saturating cast; -0.0 rounds to 0
    q as i64
}

impl Index<Var> for LinearForm {
    type Output = Complex64;
    fn index(&self, v: Var) -> &Complex64 {
        &self.0[v.index()]
    }
}

impl IndexMut<Var> for LinearForm {
    fn index_mut(&mut self, v: Var) -> &mut Complex64 {
        &mut self.0[v.index()]
    }
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(mut self, rhs: LinearForm) -> LinearForm {
        for i in 0..4 {
            self.0[i] += rhs.0[i];
        }
        self
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Monomial exponents in variable order `(x, y, z, t)`.
pub type Powers = [u32; 4];

/// One term `coeff · monomial · exp(exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub coeff: Complex64,
    pub powers: Powers,
    pub exponent: LinearForm,
}

impl Atom {
    pub fn new(coeff: Complex64, powers: Powers, exponent: LinearForm) -> Self {
        Atom {
            coeff,
            powers,
            exponent,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Atom::new(c, [0; 4], LinearForm::zero())
    }

    pub fn power(&self, v: Var) -> u32 {
        self.powers[v.index()]
    }

    pub fn spatial_degree(&self) -> u32 {
        self.powers[..3].iter().sum()
    }

    pub fn eval(&self, p: &Point) -> Complex64 {
        let mut mono = 1.0;
        for (k, &v) in self.powers.iter().zip(p.iter()) {
            if *k > 0 {
                mono *= v.powi(*k as i32);
            }
        }
        let e = if self.exponent.is_zero() {
            Complex64::new(1.0, 0.0)
        } else {
            self.exponent.eval(p).exp()
        };
        self.coeff * mono * e
    }

    fn key(&self) -> (Powers, [i64; 8]) {
        (self.powers, self.exponent.key())
    }

    /// Same monomial and exponential class as `other`.
    pub fn same_class(&self, other: &Atom) -> bool {
        self.key() == other.key()
    }

    fn mul(&self, other: &Atom) -> Atom {
        let mut powers = self.powers;
        for i in 0..4 {
            powers[i] += other.powers[i];
        }
        Atom::new(
            self.coeff * other.coeff,
            powers,
            self.exponent + other.exponent,
        )
    }
}

/// A normalized exponential polynomial.
///
/// Atoms are kept sorted by `(powers, exponent)` with like terms merged, so two
/// values that are equal as functions compare equal atom by atom (up to
/// floating residue in the coefficients).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    atoms: Vec<Atom>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { atoms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_atoms(vec![Atom::constant(Complex64::new(c, 0.0))])
    }

    pub fn complex_constant(c: Complex64) -> Self {
        Self::from_atoms(vec![Atom::constant(c)])
    }

    pub fn var(v: Var) -> Self {
        let mut powers = [0; 4];
        powers[v.index()] = 1;
        Self::from_atoms(vec![Atom::new(
            Complex64::new(1.0, 0.0),
            powers,
            LinearForm::zero(),
        )])
    }

    /// `exp(form)`.
    pub fn exp_of(form: LinearForm) -> Self {
        Self::from_atoms(vec![Atom::new(Complex64::new(1.0, 0.0), [0; 4], form)])
    }

    pub fn from_atom(atom: Atom) -> Self {
        Self::from_atoms(vec![atom])
    }

    /// Builds a value from arbitrary atoms, merging and pruning as needed.
    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        let mut merged: BTreeMap<(Powers, [i64; 8]), Atom> = BTreeMap::new();
        for atom in atoms {
            let atom = Atom {
                exponent: atom.exponent.snapped(),
                ..atom
            };
            if !atom.coeff.re.is_finite() || !atom.coeff.im.is_finite() {
                // Keep non-finite values visible rather than silently merging them away.
                merged.insert(atom.key(), atom);
                continue;
            }
            merged
                .entry(atom.key())
                .and_modify(|a| a.coeff += atom.coeff)
                .or_insert(atom);
        }
        let atoms = merged
            .into_values()
            .filter(|a| !(a.coeff.norm() < MERGE_TOLERANCE))
            .collect();
        ExpPoly { atoms }
    }

    /// Re-runs normalization; idempotent on normalized values.
    pub fn normalize(&self) -> Self {
        Self::from_atoms(self.atoms.clone())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Largest coefficient modulus, zero for the empty sum.
    pub fn max_coeff(&self) -> f64 {
        self.atoms.iter().map(|a| a.coeff.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient moduli.
    pub fn coeff_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.coeff.norm()).sum()
    }

    /// True when `var` appears in no monomial and no exponent.
    pub fn is_free_of(&self, var: Var) -> bool {
        self.atoms
            .iter()
            .all(|a| a.power(var) == 0 && a.exponent[var] == Complex64::new(0.0, 0.0))
    }

    /// The value as a constant, if it is one.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.atoms.as_slice() {
            [] => Some(Complex64::new(0.0, 0.0)),
            [a] if a.powers == [0; 4] && a.exponent.is_zero() => Some(a.coeff),
            _ => None,
        }
    }

    pub fn eval(&self, p: &Point) -> Complex64 {
        self.atoms.iter().map(|a| a.eval(p)).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self::from_atoms(
            self.atoms
                .iter()
                .map(|a| Atom {
                    coeff: a.coeff * s,
                    ..*a
                })
                .collect(),
        )
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                out.push(a.mul(b));
            }
        }
        Self::from_atoms(out)
    }

    /// Multiplication that fails once the normalized product exceeds `cap` atoms.
    pub fn checked_mul(&self, other: &ExpPoly, cap: usize) -> Result<ExpPoly, AlgebraError> {
        self.mul(other).within_cap(cap)
    }

    pub fn within_cap(self, cap: usize) -> Result<ExpPoly, AlgebraError> {
        if self.atoms.len() > cap {
            Err(AlgebraError::AtomOverflow {
                atoms: self.atoms.len(),
                cap,
            })
        } else {
            Ok(self)
        }
    }

    pub fn pow(&self, n: u32) -> ExpPoly {
        let mut acc = ExpPoly::constant(1.0);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplies every atom by `exp(form)`.
    pub fn shift_exponent(&self, form: LinearForm) -> ExpPoly {
        Self::from_atoms(
            self.atoms
                .iter()
                .map(|a| Atom {
                    exponent: a.exponent + form,
                    ..*a
                })
                .collect(),
        )
    }

    /// Fixes `var = value`, leaving a function of the other variables.
    pub fn substitute(&self, var: Var, value: f64) -> ExpPoly {
        let k = var.index();
        Self::from_atoms(
            self.atoms
                .iter()
                .map(|a| {
                    let mut powers = a.powers;
                    let mut exponent = a.exponent;
                    let factor = value.powi(powers[k] as i32) * (exponent[var] * value).exp();
                    powers[k] = 0;
                    exponent[var] = Complex64::new(0.0, 0.0);
                    Atom::new(a.coeff * factor, powers, exponent)
                })
                .collect(),
        )
    }

    /// Atom-wise comparison: the difference has no coefficient larger than
    /// `tol · max(1, max_coeff(self), max_coeff(other))`.
    pub fn approx_eq(&self, other: &ExpPoly, tol: f64) -> bool {
        let diff = self - other;
        let scale = 1f64.max(self.max_coeff()).max(other.max_coeff());
        diff.max_coeff() <= tol * scale
    }

    /// Returns `r` with `self ≈ r · other` atom by atom, when such an `r` exists.
    pub fn ratio_to(&self, other: &ExpPoly, rel_tol: f64) -> Option<Complex64> {
        let first = other.atoms.first()?;
        let lead = self.atoms.iter().find(|a| a.same_class(first))?;
        let r = lead.coeff / first.coeff;
        let diff = self - &other.scale(r);
        if diff.max_coeff() <= rel_tol * self.max_coeff().max(f64::MIN_POSITIVE) {
            Some(r)
        } else {
            None
        }
    }
}

impl From<Atom> for ExpPoly {
    fn from(a: Atom) -> Self {
        ExpPoly::from_atom(a)
    }
}

impl Add for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&rhs.atoms);
        ExpPoly::from_atoms(atoms)
    }
}

impl Add for ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: ExpPoly) -> ExpPoly {
        &self + &rhs
    }
}

impl AddAssign<&ExpPoly> for ExpPoly {
    fn add_assign(&mut self, rhs: &ExpPoly) {
        *self = &*self + rhs;
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        let mut atoms = self.atoms.clone();
        atoms.extend(rhs.atoms.iter().map(|a| Atom {
            coeff: -a.coeff,
            ..*a
        }));
        ExpPoly::from_atoms(atoms)
    }
}

impl Sub for ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: ExpPoly) -> ExpPoly {
        &self - &rhs
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale_real(-1.0)
    }
}

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        -&self
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::mul(self, rhs)
    }
}

impl Mul for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: ExpPoly) -> ExpPoly {
        ExpPoly::mul(&self, &rhs)
    }
}

impl Mul<&ExpPoly> for Complex64 {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        rhs.scale(self)
    }
}

impl Mul<&ExpPoly> for f64 {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        rhs.scale_real(self)
    }
}

impl std::iter::Sum for ExpPoly {
    fn sum<I: Iterator<Item = ExpPoly>>(iter: I) -> Self {
        let atoms: Vec<Atom> = iter.flat_map(|p| p.atoms).collect();
        ExpPoly::from_atoms(atoms)
    }
}
