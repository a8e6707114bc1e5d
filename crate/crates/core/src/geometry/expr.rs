//! Expression language for Hamiltonians.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := NUMBER | 'pi' | 'θ' | 'theta' | 'h' | 't'
//!         | func '(' expr ')' | ('min' | 'max') '(' expr ',' expr ')'
//!         | '(' expr ')' | '-' factor
//! func   := 'sin' | 'cos' | 'exp'
//! ```
//!
//! On planar charts `x` and `y` are accepted as aliases of `θ` and `h`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Chart, ScalarField};
use crate::math::{cos, exp, sin, PI};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Theta,
    H,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Call(Func, Box<Node>, Option<Box<Node>>),
}

impl Node {
    fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(Var::Theta) => x,
            Node::Var(Var::H) => y,
            Node::Var(Var::T) => t,
            Node::Neg(a) => -a.eval(x, y, t),
            Node::Add(a, b) => a.eval(x, y, t) + b.eval(x, y, t),
            Node::Sub(a, b) => a.eval(x, y, t) - b.eval(x, y, t),
            Node::Mul(a, b) => a.eval(x, y, t) * b.eval(x, y, t),
            Node::Div(a, b) => a.eval(x, y, t) / b.eval(x, y, t),
            Node::Call(f, a, b) => {
                let u = a.eval(x, y, t);
                match f {
                    Func::Sin => sin(u),
                    Func::Cos => cos(u),
                    Func::Exp => exp(u),
                    Func::Min => u.min(b.as_ref().map_or(u, |b| b.eval(x, y, t))),
                    Func::Max => u.max(b.as_ref().map_or(u, |b| b.eval(x, y, t))),
                }
            }
        }
    }

    fn uses_time(&self) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(v) => *v == Var::T,
            Node::Neg(a) => a.uses_time(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.uses_time() || b.uses_time()
            }
            Node::Call(_, a, b) => a.uses_time() || b.as_ref().is_some_and(|b| b.uses_time()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse::<f64>().map_err(|_| Error::Syntax {
                    position: start,
                    message: format!("malformed number `{s}`"),
                })?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    position: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((chars.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn at(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(Error::Syntax {
                position: self.at(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        let position = self.at();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Minus => Ok(Node::Neg(Box::new(self.factor()?))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, position),
            Tok::End => Err(Error::Syntax {
                position,
                message: "unexpected end of input".into(),
            }),
            other => Err(Error::Syntax {
                position,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn ident(&mut self, name: String, position: usize) -> Result<Node> {
        let func = match name.as_str() {
            "pi" => return Ok(Node::Num(PI)),
            "θ" | "theta" | "x" => return Ok(Node::Var(Var::Theta)),
            "h" | "y" => return Ok(Node::Var(Var::H)),
            "t" => return Ok(Node::Var(Var::T)),
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return Err(Error::UnknownIdentifier { position, name }),
        };
        self.expect(Tok::LParen, "`(` after function name")?;
        let a = self.expr()?;
        let b = if matches!(func, Func::Min | Func::Max) {
            self.expect(Tok::Comma, "`,` between min/max arguments")?;
            Some(Box::new(self.expr()?))
        } else {
            None
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(Node::Call(func, Box::new(a), b))
    }
}

/// Parsed Hamiltonian expression in `(θ, h, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
}

impl Expression {
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser {
            toks: lex(text)?,
            pos: 0,
        };
        let root = p.expr()?;
        if *p.peek() != Tok::End {
            return Err(Error::Syntax {
                position: p.at(),
                message: "trailing input".into(),
            });
        }
        Ok(Self {
            source: text.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, theta: f64, h: f64, t: f64) -> f64 {
        self.root.eval(theta, h, t)
    }

    pub fn uses_time(&self) -> bool {
        self.root.uses_time()
    }
}

/// How an expression is turned into samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    /// Number of equally spaced time knots on `[0, 1]` for time-dependent
    /// expressions. Autonomous expressions always get one knot.
    pub time_knots: usize,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self { time_knots: 11 }
    }
}

/// Parses `text` and samples it on the chart grid with the collar cutoff
/// applied multiplicatively.
pub fn parse_field_expression(
    text: &str,
    chart: &Chart,
    opts: SamplingOptions,
) -> Result<ScalarField> {
    let e = Expression::parse(text)?;
    let knots: Vec<f64> = if e.uses_time() {
        let m = opts.time_knots.max(2);
        (0..m).map(|k| k as f64 / (m - 1) as f64).collect()
    } else {
        alloc::vec![0.0]
    };
    ScalarField::from_fn(chart.grid(), &knots, |x, y, t| {
        let v = e.eval(x, y, t);
        if !v.is_finite() {
            return v;
        }
        v * chart.cutoff([x, y])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AnnulusChart;

    fn chart(collar: f64) -> Chart {
        Chart::Annulus(AnnulusChart {
            collar,
            ..AnnulusChart::default()
        })
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = Expression::parse("1 + 2 * 3 - -4 / 2").unwrap();
        assert_eq!(e.eval(0.0, 0.0, 0.0), 9.0);
        let e = Expression::parse("max(h, 0.5) * min(θ, theta) + 1e-1").unwrap();
        assert!((e.eval(0.2, 0.1, 0.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn reports_positions() {
        match Expression::parse("sin(2*pi*θ)*) ") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 12),
            other => panic!("{other:?}"),
        }
        match Expression::parse("h + foo") {
            Err(Error::UnknownIdentifier { position, name }) => {
                assert_eq!((position, name.as_str()), (4, "foo"))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Expression::parse("min(h)"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn zero_expression_is_zero_field() {
        let f = parse_field_expression("0", &chart(0.02), SamplingOptions::default()).unwrap();
        assert!(f.is_autonomous());
        assert!(f.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramped_h_matches_h_away_from_collar() {
        let f = parse_field_expression("h", &chart(0.05), SamplingOptions::default()).unwrap();
        for &h in &[0.06, 0.2, 0.5, 0.9, 0.94] {
            assert!((f.value([0.3, h], 0.0).unwrap() - h).abs() < 1e-12, "h={h}");
        }
        assert_eq!(f.value([0.3, 0.0], 0.0), Some(0.0));
        assert_eq!(f.value([0.3, 1.0], 0.0), Some(0.0));
        let mid = f.value([0.3, 0.03], 0.0).unwrap();
        assert!(mid > 0.0 && mid < 0.03);
    }

    #[test]
    fn sampled_matches_direct_evaluation() {
        let f = parse_field_expression("sin(2*pi*θ)*h", &chart(0.02), SamplingOptions::default())
            .unwrap();
        let v = f.value([0.25, 0.5], 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-3);
    }

    #[test]
    fn non_finite_evaluation_is_an_error() {
        let err = parse_field_expression("1/(h-h)", &chart(0.02), SamplingOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn time_dependent_gets_knots() {
        let f =
            parse_field_expression("(1-t)*h", &chart(0.02), SamplingOptions::default()).unwrap();
        assert_eq!(f.knots().len(), 11);
        assert!((f.value([0.1, 0.5], 0.5).unwrap() - 0.25).abs() < 1e-12);
    }
}
