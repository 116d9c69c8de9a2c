//! Recursive-descent parser from text to [`ExpPoly`].
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' integer)?
//! primary := number | 'x' | 'y' | 'z' | 't' | 'i' | 'pi'
//!          | func '(' expr ')' | '(' expr ')'
//! func    := 'exp' | 'sin' | 'cos' | 'sinh' | 'cosh'
//! ```
//!
//! Function arguments must reduce to a constant plus a linear form. Division
//! is only allowed by constants.

use num_complex::Complex64;

use super::poly::{ExpPoly, LinearForm, Var};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    /// Byte offset into the input.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected}, found {found}")]
    Expected { expected: &'static str, found: String },
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("argument of {0} is not a linear form")]
    NonLinearArgument(String),
    #[error("exponent must be a nonnegative integer")]
    BadExponent,
    #[error("division by a non-constant expression")]
    NonConstantDivisor,
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid number literal '{0}'")]
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        let start = i;
        match ch {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((Tok::Plus, i)),
            '-' => out.push((Tok::Minus, i)),
            '*' => out.push((Tok::Star, i)),
            '/' => out.push((Tok::Slash, i)),
            '^' => out.push((Tok::Caret, i)),
            '(' => out.push((Tok::LParen, i)),
            ')' => out.push((Tok::RParen, i)),
            '0'..='9' | '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // scientific suffix only when digits follow
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    position: start,
                    kind: ParseErrorKind::BadNumber(text.to_string()),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let c = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    position: i,
                    kind: ParseErrorKind::UnexpectedChar(c),
                });
            }
        }
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.offset(),
            kind,
        }
    }

    fn expect(&mut self, want: Tok, label: &'static str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else if *self.peek() == Tok::End {
            Err(self.err(ParseErrorKind::UnexpectedEnd))
        } else {
            Err(self.err(ParseErrorKind::Expected {
                expected: label,
                found: self.peek().describe(),
            }))
        }
    }

    fn expr(&mut self) -> Result<ExpPoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ExpPoly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    let at = self.offset();
                    let rhs = self.unary()?;
                    let d = rhs.as_constant().ok_or(ParseError {
                        position: at,
                        kind: ParseErrorKind::NonConstantDivisor,
                    })?;
                    if d == Complex64::new(0.0, 0.0) {
                        return Err(ParseError {
                            position: at,
                            kind: ParseErrorKind::DivisionByZero,
                        });
                    }
                    acc = acc.scale(d.inv());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ExpPoly, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ExpPoly, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        match self.bump().0 {
            Tok::Num(n) if n >= 0.0 && n.fract() == 0.0 && n <= u32::MAX as f64 => {
                Ok(base.pow(n as u32))
            }
            _ => Err(ParseError {
                position: at,
                kind: ParseErrorKind::BadExponent,
            }),
        }
    }

    fn primary(&mut self) -> Result<ExpPoly, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(ExpPoly::constant(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(v) = Var::from_name(&name) {
                    return Ok(ExpPoly::var(v));
                }
                match name.as_str() {
                    "i" => Ok(ExpPoly::complex_constant(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(ExpPoly::constant(std::f64::consts::PI)),
                    "exp" | "sin" | "cos" | "sinh" | "cosh" => {
                        self.expect(Tok::LParen, "'('")?;
                        let arg_at = self.offset();
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "')'")?;
                        let (c0, form) = as_affine(&arg).ok_or(ParseError {
                            position: arg_at,
                            kind: ParseErrorKind::NonLinearArgument(name.clone()),
                        })?;
                        Ok(apply_function(&name, c0, form))
                    }
                    _ => Err(ParseError {
                        position: at,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    }),
                }
            }
            Tok::End => Err(ParseError {
                position: at,
                kind: ParseErrorKind::UnexpectedEnd,
            }),
            other => Err(ParseError {
                position: at,
                kind: ParseErrorKind::Expected {
                    expected: "an operand",
                    found: other.describe(),
                },
            }),
        }
    }
}

/// Splits `p` into `c0 + L` when it is affine in the variables.
fn as_affine(p: &ExpPoly) -> Option<(Complex64, LinearForm)> {
    let mut c0 = Complex64::new(0.0, 0.0);
    let mut form = LinearForm::zero();
    for a in p.atoms() {
        if !a.exponent.is_zero() {
            return None;
        }
        match a.powers.iter().sum::<u32>() {
            0 => c0 += a.coeff,
            1 => {
                let v = a.powers.iter().position(|&k| k == 1)?;
                form.0[v] += a.coeff;
            }
            _ => return None,
        }
    }
    Some((c0, form))
}

fn apply_function(name: &str, c0: Complex64, form: LinearForm) -> ExpPoly {
    let i = Complex64::new(0.0, 1.0);
    // exp(s·(c0 + L)) as a single atom
    let e = |s: Complex64| ExpPoly::exp_of(form.scale(s)).scale((c0 * s).exp());
    let one = Complex64::new(1.0, 0.0);
    match name {
        "exp" => e(one),
        // sin θ = (e^{iθ} − e^{−iθ}) / (2i)
        "sin" => (&e(i) - &e(-i)).scale((2.0 * i).inv()),
        "cos" => (&e(i) + &e(-i)).scale(Complex64::new(0.5, 0.0)),
        "sinh" => (&e(one) - &e(-one)).scale(Complex64::new(0.5, 0.0)),
        "cosh" => (&e(one) + &e(-one)).scale(Complex64::new(0.5, 0.0)),
        _ => unreachable!("function names are filtered by the caller"),
    }
}

/// Parses an expression into its canonical exponential-polynomial form.
pub fn parse(text: &str) -> Result<ExpPoly, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.err(ParseErrorKind::Expected {
            expected: "an operator or end of input",
            found: p.peek().describe(),
        }));
    }
    Ok(out)
}
