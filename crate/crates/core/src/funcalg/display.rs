//! Human-readable rendering that re-parses to the same value.
//!
//! Conjugate oscillatory pairs `α·e^{R+iθ} + β·e^{R−iθ}` are folded back into
//! `e^R·((α+β)·cos θ + i(α−β)·sin θ)`. Real exponentials stay as `exp(..)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::poly::{Atom, ExpPoly, LinearForm, Powers, Var};

const DISPLAY_TOLERANCE: f64 = 1e-14;

pub(crate) fn format_real(v: f64) -> String {
    // 15 significant digits hide binary residue such as 0.30000000000000004
    let v = if v.is_finite() {
        format!("{v:.14e}").parse().unwrap_or(v)
    } else {
        v
    };
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Formats a complex scalar in parser syntax (`2`, `-i`, `0.5*i`, `(1+2*i)`).
pub fn format_complex(c: Complex64) -> String {
    match (c.re != 0.0, c.im != 0.0) {
        (_, false) => format_real(c.re),
        (false, true) => imaginary(c.im),
        (true, true) => {
            let im = imaginary(c.im.abs());
            let sign = if c.im < 0.0 { "-" } else { "+" };
            format!("({}{}{})", format_real(c.re), sign, im)
        }
    }
}

fn imaginary(im: f64) -> String {
    if im == 1.0 {
        "i".into()
    } else if im == -1.0 {
        "-i".into()
    } else {
        format!("{}*i", format_real(im))
    }
}

/// Renders a real linear form (`x-y-z`, `0.3*t+x`).
fn format_form(form: &LinearForm) -> String {
    let mut out = String::new();
    for v in Var::ALL {
        let c = form[v];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let term = if c.im == 0.0 {
            match c.re {
                1.0 => v.name().to_string(),
                -1.0 => format!("-{v}"),
                r => format!("{}*{v}", format_real(r)),
            }
        } else {
            format!("{}*{v}", format_complex(c))
        };
        push_term(&mut out, &term, "+");
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn push_term(out: &mut String, term: &str, plus: &str) {
    if out.is_empty() {
        out.push_str(term);
    } else if let Some(rest) = term.strip_prefix('-') {
        out.push_str(if plus == "+" { "-" } else { " - " });
        out.push_str(rest);
    } else {
        out.push_str(plus);
        out.push_str(term);
    }
}

fn monomial_factors(powers: &Powers) -> Vec<String> {
    Var::ALL
        .iter()
        .filter(|v| powers[v.index()] > 0)
        .map(|&v| match powers[v.index()] {
            1 => v.name().to_string(),
            k => format!("{v}^{k}"),
        })
        .collect()
}

fn render_term(coeff: Complex64, factors: &[String]) -> String {
    if factors.is_empty() {
        return format_complex(coeff);
    }
    let body = factors.join("*");
    if coeff == Complex64::new(1.0, 0.0) {
        body
    } else if coeff == Complex64::new(-1.0, 0.0) {
        format!("-{body}")
    } else {
        format!("{}*{body}", format_complex(coeff))
    }
}

/// Renders a single atom without trigonometric folding.
pub fn atom_to_display(atom: &Atom) -> String {
    let mut factors = monomial_factors(&atom.powers);
    if !atom.exponent.is_zero() {
        factors.push(format!("exp({})", format_form(&atom.exponent)));
    }
    render_term(atom.coeff, &factors)
}

fn canonical_sign(im: &LinearForm) -> f64 {
    for v in Var::ALL {
        let c = im[v].re;
        if c != 0.0 {
            return c.signum();
        }
    }
    1.0
}

/// Renders the value with sin/cos folding.
pub fn to_display(p: &ExpPoly) -> String {
    // (powers, real part key, canonical imaginary part key) -> (forms, α, β)
    type Key = (Powers, String, String);
    let mut groups: BTreeMap<Key, (LinearForm, LinearForm, Complex64, Complex64)> =
        BTreeMap::new();
    let mut plain: Vec<String> = Vec::new();
    let zero = Complex64::new(0.0, 0.0);

    for atom in p.atoms() {
        let (re, im) = atom.exponent.split();
        if im.is_zero() {
            plain.push(atom_to_display(atom));
            continue;
        }
        let s = canonical_sign(&im);
        let im_canon = im.scale(Complex64::new(s, 0.0));
        let key = (atom.powers, format_form(&re), format_form(&im_canon));
        let entry = groups.entry(key).or_insert((re, im_canon, zero, zero));
        if s > 0.0 {
            entry.2 += atom.coeff;
        } else {
            entry.3 += atom.coeff;
        }
    }

    let mut terms = plain;
    for ((powers, _, _), (re, im, alpha, beta)) in groups {
        let mut base = monomial_factors(&powers);
        if !re.is_zero() {
            base.push(format!("exp({})", format_form(&re)));
        }
        let cos_coeff = alpha + beta;
        let sin_coeff = Complex64::new(0.0, 1.0) * (alpha - beta);
        let arg = format_form(&im);
        for (coeff, func) in [(cos_coeff, "cos"), (sin_coeff, "sin")] {
            if coeff.norm() < DISPLAY_TOLERANCE {
                continue;
            }
            let mut factors = base.clone();
            factors.push(format!("{func}({arg})"));
            terms.push(render_term(coeff, &factors));
        }
    }

    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for t in &terms {
        push_term(&mut out, t, " + ");
    }
    out
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_display(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::parse;

    #[test]
    fn folds_sine() {
        assert_eq!(to_display(&parse("sin(x)").unwrap()), "sin(x)");
        assert_eq!(to_display(&parse("cos(y)").unwrap()), "cos(y)");
        assert_eq!(to_display(&parse("i*sin(x)").unwrap()), "i*sin(x)");
        assert_eq!(to_display(&parse("-sin(x)").unwrap()), "-sin(x)");
    }

    #[test]
    fn polynomial_terms() {
        assert_eq!(to_display(&parse("2*x^2 + 0*y").unwrap()), "2*x^2");
        assert_eq!(to_display(&parse("i*x").unwrap()), "i*x");
        assert_eq!(to_display(&ExpPoly::zero()), "0");
        assert_eq!(to_display(&parse("x - 3").unwrap()), "-3 + x");
    }

    #[test]
    fn exponentials_and_mixed_classes() {
        assert_eq!(to_display(&parse("exp(-x)").unwrap()), "exp(-x)");
        assert_eq!(to_display(&parse("t*exp(x+y+z)").unwrap()), "t*exp(x+y+z)");
        assert_eq!(
            to_display(&parse("exp(-t)*sin(x-y-z)").unwrap()),
            "exp(-t)*sin(x-y-z)"
        );
    }

    #[test]
    fn complex_coefficients() {
        assert_eq!(format_complex(Complex64::new(1.0, 2.0)), "(1+2*i)");
        assert_eq!(format_complex(Complex64::new(0.5, -1.0)), "(0.5-i)");
        assert_eq!(format_complex(Complex64::new(0.0, -2.5)), "-2.5*i");
        assert_eq!(format_complex(Complex64::new(1e-20, 0.0)), "1e-20");
    }

    #[test]
    fn unpaired_oscillation_round_trips() {
        let p = parse("exp(i*x)").unwrap();
        let q = parse(&to_display(&p)).unwrap();
        assert!(p.approx_eq(&q, 1e-12));
    }
}
