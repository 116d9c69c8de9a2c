//! Recognizes the two resummable coefficient patterns.
//!
//! * geometric: `w_{n+1} = λ(n+1)·wₙ`, so `u = w₀ / (1 − iλt)`
//! * exponential: `w_{n+1} = λ·wₙ`, so `u = e^{iλt}·w₀`

use num_complex::Complex64;

use super::SeriesSolution;
use crate::funcalg::{format_complex, to_display, ExpPoly, LinearForm, Point, Var};

const RATIO_TOLERANCE: f64 = 1e-10;
const MIN_NONZERO: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormKind {
    Geometric,
    Exponential,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub kind: ClosedFormKind,
    pub ratio: Complex64,
    pub base: ExpPoly,
}

impl ClosedForm {
    pub fn none() -> Self {
        ClosedForm {
            kind: ClosedFormKind::None,
            ratio: Complex64::new(0.0, 0.0),
            base: ExpPoly::zero(),
        }
    }

    pub fn is_some(&self) -> bool {
        self.kind != ClosedFormKind::None
    }

    /// `e^{iλt}·w₀` for the exponential pattern; the geometric pattern is not
    /// an exponential polynomial.
    pub fn as_exppoly(&self) -> Option<ExpPoly> {
        match self.kind {
            ClosedFormKind::Exponential => {
                let rate = Complex64::new(0.0, 1.0) * self.ratio;
                Some(self.base.shift_exponent(LinearForm::single(Var::T, rate)))
            }
            _ => None,
        }
    }

    pub fn eval(&self, p: &Point) -> Option<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let t = p[3];
        match self.kind {
            ClosedFormKind::Geometric => {
                Some(self.base.eval(p) / (Complex64::new(1.0, 0.0) - i * self.ratio * t))
            }
            ClosedFormKind::Exponential => Some((i * self.ratio * t).exp() * self.base.eval(p)),
            ClosedFormKind::None => None,
        }
    }

    /// `x/(1+t)`, `e^{-t}*sin(x)` and similar.
    pub fn to_display(&self) -> Option<String> {
        let i = Complex64::new(0.0, 1.0);
        let base = to_display(&self.base);
        let wrapped = if base.contains(' ') || base.starts_with('-') {
            format!("({base})")
        } else {
            base
        };
        match self.kind {
            ClosedFormKind::Geometric => {
                let slope = -i * self.ratio;
                let term = t_term(slope);
                let denom = if term.starts_with('-') {
                    format!("1{term}")
                } else {
                    format!("1+{term}")
                };
                Some(format!("{wrapped}/({denom})"))
            }
            ClosedFormKind::Exponential => {
                let rate = i * self.ratio;
                Some(format!("e^{{{}}}*{wrapped}", t_term(rate)))
            }
            ClosedFormKind::None => None,
        }
    }
}

fn t_term(c: Complex64) -> String {
    if c.im == 0.0 {
        match c.re {
            1.0 => "t".into(),
            -1.0 => "-t".into(),
            r => format!("{}*t", crate::funcalg::format_real(r)),
        }
    } else {
        format!("{}*t", format_complex(c))
    }
}

fn common_ratio(
    series: &SeriesSolution,
    step_weight: impl Fn(usize) -> f64,
) -> Option<Complex64> {
    let w = series.coefficients();
    let mut ratio: Option<Complex64> = None;
    for n in 0..w.len() - 1 {
        let r = w[n + 1].ratio_to(&w[n], RATIO_TOLERANCE)? / step_weight(n);
        match ratio {
            None => ratio = Some(r),
            Some(r0) if (r - r0).norm() <= RATIO_TOLERANCE * r0.norm().max(r.norm()) => {}
            Some(_) => return None,
        }
    }
    ratio
}

/// Classifies the computed coefficients as geometric, exponential or neither.
pub fn detect_closed_form(series: &SeriesSolution) -> ClosedForm {
    let nonzero = series.coefficients().iter().filter(|w| !w.is_zero()).count();
    if nonzero < MIN_NONZERO {
        return ClosedForm::none();
    }
    let base = series.coefficient(0).clone();
    if let Some(ratio) = common_ratio(series, |n| (n + 1) as f64) {
        return ClosedForm {
            kind: ClosedFormKind::Geometric,
            ratio,
            base,
        };
    }
    if let Some(ratio) = common_ratio(series, |_| 1.0) {
        return ClosedForm {
            kind: ClosedFormKind::Exponential,
            ratio,
            base,
        };
    }
    ClosedForm::none()
}
