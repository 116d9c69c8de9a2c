//! Problem-definition files.
//!
//! ```text
//! # comments start with '#'
//! kind = evolution
//! a.1 = 0
//! b.1 = -1/2
//! c = 1
//! i = 2
//! h = x
//! ```
//!
//! One `key = value` per line. Function values use the expression grammar of
//! [`opseries::parse`]; numeric values may be any constant expression. Vector
//! values are written `[e1, e2, e3]`, points `(x, y, z, t)`.

use std::collections::BTreeMap;
use std::fmt;

use opseries::diffusion::DiffusionError;
use opseries::{
    parse, BallProblem, EvolutionError, EvolutionProblem, ExpPoly, FlowError, FlowProblem,
    HarmonicPotential, HeatProblem, VectorField,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFileError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ProblemFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ProblemFileError {}

fn at(line: usize, message: impl Into<String>) -> ProblemFileError {
    ProblemFileError {
        line: Some(line),
        message: message.into(),
    }
}

fn whole(message: impl Into<String>) -> ProblemFileError {
    ProblemFileError {
        line: None,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Evolution(EvolutionProblem),
    Heat(HeatProblem),
    Ball(BallProblem),
    Flow(FlowProblem),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::Evolution(_) => "evolution",
            Problem::Heat(_) => "heat",
            Problem::Ball(_) => "ball",
            Problem::Flow(_) => "flow",
        }
    }
}

struct Entries {
    values: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.values.remove(key)
    }

    fn require(&mut self, key: &str, kind: &str) -> Result<(usize, String), ProblemFileError> {
        self.take(key)
            .ok_or_else(|| whole(format!("{kind} problem needs `{key}`")))
    }

    fn finish(self, kind: &str) -> Result<(), ProblemFileError> {
        match self.values.into_iter().next() {
            Some((key, (line, _))) => Err(at(line, format!("unknown key `{key}` for {kind} problem"))),
            None => Ok(()),
        }
    }
}

fn expression(line: usize, text: &str) -> Result<ExpPoly, ProblemFileError> {
    if text.trim().is_empty() {
        return Ok(ExpPoly::zero());
    }
    parse(text).map_err(|e| at(line, format!("{e} in `{}`", text.trim())))
}

fn number(line: usize, text: &str) -> Result<f64, ProblemFileError> {
    let value = expression(line, text)?;
    match value.as_constant() {
        Some(c) if c.im == 0.0 => Ok(c.re),
        Some(_) => Err(at(line, format!("`{}` must be real", text.trim()))),
        None => Err(at(line, format!("`{}` is not a constant", text.trim()))),
    }
}

fn integer(line: usize, text: &str) -> Result<u32, ProblemFileError> {
    text.trim()
        .parse()
        .map_err(|_| at(line, format!("`{}` is not a non-negative integer", text.trim())))
}

/// Splits on commas outside parentheses.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..k]);
                start = k + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

fn bracketed(line: usize, text: &str, open: char, close: char) -> Result<Vec<&str>, ProblemFileError> {
    let t = text.trim();
    let inner = t
        .strip_prefix(open)
        .and_then(|s| s.strip_suffix(close))
        .ok_or_else(|| at(line, format!("expected `{open}...{close}`, got `{t}`")))?;
    Ok(split_top_level(inner))
}

fn vector(line: usize, text: &str) -> Result<VectorField, ProblemFileError> {
    let parts = bracketed(line, text, '[', ']')?;
    if parts.len() != 3 {
        return Err(at(line, format!("a vector needs 3 components, got {}", parts.len())));
    }
    Ok(VectorField::new(
        expression(line, parts[0])?,
        expression(line, parts[1])?,
        expression(line, parts[2])?,
    ))
}

/// `(x, y, z)` or `(x, y, z, t)`.
fn point(line: usize, text: &str) -> Result<[f64; 4], ProblemFileError> {
    let parts = bracketed(line, text, '(', ')')?;
    if !(parts.len() == 3 || parts.len() == 4) {
        return Err(at(line, "a point needs 3 or 4 coordinates"));
    }
    let mut out = [0.0; 4];
    for (k, part) in parts.iter().enumerate() {
        out[k] = number(line, part)?;
    }
    Ok(out)
}

fn potential(line: usize, text: &str) -> Result<HarmonicPotential, ProblemFileError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "t/r" || compact == "t/sqrt(x^2+y^2+z^2)" {
        return Ok(HarmonicPotential::inverse_radius());
    }
    let phi = expression(line, text)?;
    if phi.is_zero() {
        return Ok(HarmonicPotential::Zero);
    }
    HarmonicPotential::field(phi).map_err(|e| at(line, e.to_string()))
}

fn evolution_error(line: usize, e: EvolutionError) -> ProblemFileError {
    at(line, e.to_string())
}

fn diffusion_error(line: usize, e: DiffusionError) -> ProblemFileError {
    at(line, e.to_string())
}

fn flow_error(line: usize, e: FlowError) -> ProblemFileError {
    at(line, e.to_string())
}

fn build_evolution(mut e: Entries) -> Result<Problem, ProblemFileError> {
    let (line, h) = e.require("h", "evolution")?;
    let mut prob = EvolutionProblem::new(expression(line, &h)?).map_err(|err| evolution_error(line, err))?;
    let keys: Vec<String> = e.values.keys().cloned().collect();
    for key in keys {
        let (prefix, m) = match key.split_once('.') {
            Some((p @ ("a" | "b"), m)) => (p, m),
            _ => continue,
        };
        let (line, value) = e.take(&key).expect("key listed above");
        let m: usize = m
            .parse()
            .map_err(|_| at(line, format!("`{key}`: derivative order must be an integer")))?;
        let v = number(line, &value)?;
        prob = if prefix == "a" {
            prob.with_linear(m, v)
        } else {
            prob.with_nonlinear(m, v)
        };
    }
    if let Some((line, c)) = e.take("c") {
        let c = number(line, &c)?;
        let order = match e.take("i") {
            Some((line, i)) => integer(line, &i)?,
            None => 1,
        };
        prob = prob.with_mixed(c, order).map_err(|err| evolution_error(line, err))?;
    } else if let Some((line, _)) = e.take("i") {
        return Err(at(line, "`i` given without `c`"));
    }
    if let Some((line, k)) = e.take("k") {
        prob = prob
            .with_exponent(integer(line, &k)?)
            .map_err(|err| evolution_error(line, err))?;
    }
    if let Some((line, f)) = e.take("f") {
        prob = prob
            .with_forcing(&expression(line, &f)?)
            .map_err(|err| evolution_error(line, err))?;
    }
    e.finish("evolution")?;
    Ok(Problem::Evolution(prob))
}

fn build_heat(mut e: Entries) -> Result<Problem, ProblemFileError> {
    let (la, a2) = e.require("a2", "heat")?;
    let (lu, u0) = e.require("u0", "heat")?;
    let a2 = number(la, &a2)?;
    let prob = HeatProblem::new(a2, expression(lu, &u0)?).map_err(|err| diffusion_error(lu, err))?;
    e.finish("heat")?;
    Ok(Problem::Heat(prob))
}

fn build_ball(mut e: Entries) -> Result<Problem, ProblemFileError> {
    let (la, a2) = e.require("a2", "ball")?;
    let a2 = number(la, &a2)?;
    let mut prob = match (e.take("T0"), e.take("V0")) {
        (Some((line, t0)), None) => {
            BallProblem::new(a2, expression(line, &t0)?).map_err(|err| diffusion_error(line, err))?
        }
        (None, Some((line, v0))) => {
            BallProblem::from_scaled(a2, expression(line, &v0)?).map_err(|err| diffusion_error(line, err))?
        }
        (Some(_), Some((line, _))) => return Err(at(line, "give either `T0` or `V0`, not both")),
        (None, None) => return Err(whole("ball problem needs `T0` or `V0`")),
    };
    match (e.take("R"), e.take("hbc")) {
        (Some((lr, r)), Some((lh, h))) => {
            prob = prob.with_boundary(number(lr, &r)?, number(lh, &h)?);
        }
        (None, None) => {}
        (Some((line, _)), None) | (None, Some((line, _))) => {
            return Err(at(line, "`R` and `hbc` must be given together"))
        }
    }
    e.finish("ball")?;
    Ok(Problem::Ball(prob))
}

fn build_flow(mut e: Entries) -> Result<Problem, ProblemFileError> {
    let (ln, nu) = e.require("nu", "flow")?;
    let nu = number(ln, &nu)?;
    let mut prob = match (e.take("u0"), e.take("curl_u0")) {
        (Some((line, u0)), None) => {
            FlowProblem::from_velocity(nu, &vector(line, &u0)?).map_err(|err| flow_error(line, err))?
        }
        (None, Some((line, w0))) => {
            FlowProblem::from_vorticity(nu, vector(line, &w0)?).map_err(|err| flow_error(line, err))?
        }
        (Some(_), Some((line, _))) => return Err(at(line, "give either `u0` or `curl_u0`, not both")),
        (None, None) => return Err(whole("flow problem needs `u0` or `curl_u0`")),
    };
    match (e.take("f"), e.take("curl_f")) {
        (Some((line, f)), None) => prob = prob.with_forcing(vector(line, &f)?),
        (None, Some((line, cf))) => prob = prob.with_curl_forcing(vector(line, &cf)?),
        (Some(_), Some((line, _))) => return Err(at(line, "give either `f` or `curl_f`, not both")),
        (None, None) => {}
    }
    if let Some((line, phi)) = e.take("phi") {
        prob = prob
            .with_potential(potential(line, &phi)?)
            .map_err(|err| flow_error(line, err))?;
    }
    let reference = match e.take("ref") {
        Some((line, r)) => point(line, &r)?,
        None => [0.0; 4],
    };
    let p0 = match e.take("p0") {
        Some((line, v)) => number(line, &v)?,
        None => 0.0,
    };
    prob = prob.with_reference(reference, p0);
    e.finish("flow")?;
    Ok(Problem::Flow(prob))
}

/// Parses a problem file.
pub fn parse_problem(text: &str) -> Result<Problem, ProblemFileError> {
    let mut kind: Option<(usize, String)> = None;
    let mut values = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(at(line, "missing key before `=`"));
        }
        if key == "kind" {
            if kind.is_some() {
                return Err(at(line, "`kind` given more than once"));
            }
            kind = Some((line, value.trim().to_string()));
            continue;
        }
        if values.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(at(line, format!("duplicate key `{key}`")));
        }
    }
    let (line, kind) = kind.ok_or_else(|| whole("missing `kind = evolution | heat | ball | flow`"))?;
    let entries = Entries { values };
    match kind.as_str() {
        "evolution" => build_evolution(entries),
        "heat" => build_heat(entries),
        "ball" => build_ball(entries),
        "flow" => build_flow(entries),
        other => Err(at(line, format!("unknown kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evolution_file() {
        let text = "# RLW\nkind = evolution\nb.1 = -1/2\nc = 1\ni = 2\nh = x\n";
        let Problem::Evolution(p) = parse_problem(text).unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(p.nonlinear(), &[0.0, -0.5]);
        assert_eq!(p.mixed(), 1.0);
        assert_eq!(p.mixed_order(), 2);
        assert_eq!(p.initial(), &parse("x").unwrap());
    }

    #[test]
    fn empty_datum_is_zero() {
        let Problem::Evolution(p) = parse_problem("kind = evolution\nh =\na.1 = 1").unwrap() else {
            panic!("wrong kind")
        };
        assert!(p.initial().is_zero());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_problem("kind = heat\na2 = 1\nu0 = sin(x^2)\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = parse_problem("kind = heat\na2 = 1\nu0 = x\nwhat = 3\n").unwrap_err();
        assert_eq!(err.line, Some(4));
        assert!(err.message.contains("unknown key"));
        let err = parse_problem("kind = heat\na2 = 1\na2 = 2\nu0 = x").unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = parse_problem("kind = evolution\nh = x\nf = t").unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = parse_problem("kind = heat\nnonsense").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(parse_problem("a2 = 1").unwrap_err().line.is_none());
        assert!(parse_problem("kind = wave").is_err());
    }

    #[test]
    fn flow_file() {
        let text = "kind = flow\nnu = 0.1\ncurl_u0 = [cos(y)*cos(z), sin(x-y-z), exp(x+y+z)]\n\
                    curl_f = [t*cos(x), exp(t), t*z*sin(x)]\nphi = t/sqrt(x^2 + y^2 + z^2)\n\
                    ref = (2, 0, 0)\np0 = 5\n";
        let Problem::Flow(p) = parse_problem(text).unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(p.viscosity(), 0.1);
        assert_eq!(p.reference(), [2.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.p0(), 5.0);
        assert_eq!(p.potential(), &HarmonicPotential::inverse_radius());
        assert_eq!(p.curl_f().cy, parse("exp(t)").unwrap());
    }

    #[test]
    fn flow_rejects_bad_vectors_and_potentials() {
        let err = parse_problem("kind = flow\nnu = 1\ncurl_u0 = [x, y]").unwrap_err();
        assert_eq!(err.line, Some(3));
        let err = parse_problem("kind = flow\nnu = 1\ncurl_u0 = [0,0,0]\nphi = x^2").unwrap_err();
        assert_eq!(err.line, Some(4));
        let err = parse_problem("kind = flow\nnu = 1\nu0 = [x, 0, 0]").unwrap_err();
        assert!(err.message.contains("divergence"));
    }

    #[test]
    fn ball_file() {
        let Problem::Ball(b) = parse_problem("kind = ball\na2 = 0.5\nT0 = 1\nR = 1\nhbc = 2").unwrap() else {
            panic!("wrong kind")
        };
        assert_eq!(b.scaled_initial(), &parse("x").unwrap());
        assert!(parse_problem("kind = ball\na2 = 0.5\nT0 = 1\nR = 1").is_err());
    }
}
