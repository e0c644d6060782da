//! Infix expressions over `x`, `y` (and `z = x + i y`) evaluated on jets.
//!
//! Grammar:
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;                (* right associative *)
//! primary = number | ident | func "(" expr ")" | "(" expr ")" ;
//! ident   = "x" | "y" | "z" | "i" | "pi" | "e" ;
//! func    = "sin" | "cos" | "exp" | "log" | "ln" | "sqrt" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Analytic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(Var),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Value of a variable-free subtree.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Var(_) => None,
            Expr::Neg(a) => a.as_constant().map(|c| -c),
            Expr::Call(f, a) => {
                let c = a.as_constant()?;
                Some(match f {
                    Func::Sin => c.sin(),
                    Func::Cos => c.cos(),
                    Func::Exp => c.exp(),
                    Func::Log => c.ln(),
                    Func::Sqrt => c.sqrt(),
                })
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.as_constant()?, b.as_constant()?);
                Some(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= 64.0 => a.powi(b.re as i32),
                    BinOp::Pow => a.powc(b),
                })
            }
        }
    }

    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses(v),
            Expr::Binary(_, a, b) => a.uses(v) || b.uses(v),
        }
    }

    /// Evaluates the tree on jets; `var` supplies the jet of each variable and
    /// `proto` fixes base point and order for constants.
    pub fn eval<T: Analytic>(&self, var: &dyn Fn(Var) -> Result<T>, proto: &T) -> Result<T> {
        Ok(match self {
            Expr::Const(c) => proto.constant_like(*c),
            Expr::Var(v) => var(*v)?,
            Expr::Neg(a) => a.eval(var, proto)?.neg_jet(),
            Expr::Call(f, a) => {
                let a = a.eval(var, proto)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln()?,
                    Func::Sqrt => a.sqrt()?,
                }
            }
            Expr::Binary(op, a, b) => {
                if *op == BinOp::Pow {
                    return eval_pow(a, b, var, proto);
                }
                let (a, b) = (a.eval(var, proto)?, b.eval(var, proto)?);
                match op {
                    BinOp::Add => a.add_jet(&b),
                    BinOp::Sub => a.sub_jet(&b),
                    BinOp::Mul => a.mul_jet(&b),
                    BinOp::Div => a.try_div(&b)?,
                    BinOp::Pow => unreachable!(),
                }
            }
        })
    }
}

fn eval_pow<T: Analytic>(base: &Expr, exponent: &Expr, var: &dyn Fn(Var) -> Result<T>, proto: &T) -> Result<T> {
    let a = base.eval(var, proto)?;
    match exponent.as_constant() {
        Some(e) if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= 64.0 => a.powi(e.re as i32),
        Some(e) if e.im == 0.0 => a.powf(e.re),
        _ => {
            let b = exponent.eval(var, proto)?;
            Ok(b.mul_jet(&a.ln()?).exp())
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.im == 0.0 => write!(f, "{}", c.re),
            Expr::Const(c) => write!(f, "({}+{}*i)", c.re, c.im),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Y) => write!(f, "y"),
            Expr::Var(Var::Z) => write!(f, "z"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Log => "log",
                    Func::Sqrt => "sqrt",
                };
                write!(f, "{name}({a})")
            }
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{sym}{b})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || (ch == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut k = i + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    i = k;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let v = lit
                .parse::<f64>()
                .map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number `{lit}`") })?;
            out.push((start, Tok::Num(v)));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else {
            let tok = match ch {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(ch),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(Error::Syntax { pos: i, msg: format!("unexpected character `{ch}`") }),
            };
            out.push((i, tok));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        let tok = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Syntax { pos: at, msg: "unexpected end of input".into() })?
            .1;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Const(Complex64::new(v, 0.0))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "log" | "ln" => Some(Func::Log),
                    "sqrt" => Some(Func::Sqrt),
                    _ => None,
                };
                if let Some(func) = func {
                    if self.peek() != Some(&Tok::LParen) {
                        return Err(Error::Syntax { pos: self.offset(), msg: format!("expected `(` after `{name}`") });
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "z" => Ok(Expr::Var(Var::Z)),
                    "i" => Ok(Expr::Const(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::Const(Complex64::new(std::f64::consts::PI, 0.0))),
                    "e" => Ok(Expr::Const(Complex64::new(std::f64::consts::E, 0.0))),
                    _ => Err(Error::UnknownIdentifier { pos: at, name }),
                }
            }
            Tok::Op(c) => Err(Error::Syntax { pos: at, msg: format!("unexpected operator `{c}`") }),
            Tok::RParen => Err(Error::Syntax { pos: at, msg: "unexpected `)`".into() }),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.offset(), msg: "expected `)`".into() })
        }
    }
}

/// Parses an infix expression; positions in errors are byte offsets.
pub fn parse_expression(text: &str) -> Result<Expr> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Syntax { pos: p.offset(), msg: "trailing input".into() });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{Jet1, Jet2, ORDER};

    fn at(e: &Expr, x: f64, y: f64) -> Complex64 {
        let base = [x, y];
        let proto = Jet2::zero(base, 0);
        e.eval(
            &|v| {
                Ok(match v {
                    Var::X => Jet2::var_x(base, 0),
                    Var::Y => Jet2::var_y(base, 0),
                    Var::Z => Jet2::var_z(base, 0),
                })
            },
            &proto,
        )
        .unwrap()
        .value()
    }

    #[test]
    fn sum_of_squares() {
        let e = parse_expression("x^2 + y^2").unwrap();
        assert_eq!(at(&e, 1.0, 2.0), Complex64::new(5.0, 0.0));
    }

    #[test]
    fn log_at_origin() {
        let e = parse_expression("log(1 + x^2 + y^2)").unwrap();
        assert_eq!(at(&e, 0.0, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exp_jet_in_y() {
        let e = parse_expression("exp(y)").unwrap();
        let proto = Jet1::constant(0.0, 0.0, ORDER);
        let j = e
            .eval(&|v| if v == Var::Y { Ok(Jet1::var(0.0, ORDER)) } else { unreachable!() }, &proto)
            .unwrap();
        let expected = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (k, v) in expected.iter().enumerate() {
            assert!((j.coeff(k).re - v).abs() < 1e-15);
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("-2^2 + 2^3^2 / 64 - (1 - 3) * 2").unwrap();
        // -(4) + 512/64 + 4
        assert_eq!(e.as_constant().unwrap(), Complex64::new(8.0, 0.0));
        let e = parse_expression("2 * x - -y").unwrap();
        assert_eq!(at(&e, 1.5, 0.5), Complex64::new(3.5, 0.0));
        let e = parse_expression("1.5e1 + .5 + 2E-1").unwrap();
        assert_eq!(e.as_constant().unwrap(), Complex64::new(15.7, 0.0));
    }

    #[test]
    fn complex_variable() {
        let e = parse_expression("z*z").unwrap();
        assert_eq!(at(&e, 1.0, 2.0), Complex64::new(-3.0, 4.0));
        assert!(e.uses(Var::Z) && !e.uses(Var::X));
    }

    #[test]
    fn fractional_and_symbolic_powers() {
        let e = parse_expression("x^(7/2)").unwrap();
        assert!((at(&e, 2.0, 0.0).re - 2f64.powf(3.5)).abs() < 1e-12);
        let e = parse_expression("x^y").unwrap();
        assert!((at(&e, 2.0, 3.0).re - 8.0).abs() < 1e-12);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_expression("x + * y") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match parse_expression("(x + y") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expression("x $ y"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_expression("sin x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expression("x y"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn unknown_identifier() {
        match parse_expression("1 + w*x") {
            Err(Error::UnknownIdentifier { pos, name }) => {
                assert_eq!(pos, 4);
                assert_eq!(name, "w");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn display_reparses_to_same_value() {
        let e = parse_expression("sqrt(1 + x^2) * cos(y) - exp(-x/3)").unwrap();
        let again = parse_expression(&e.to_string()).unwrap();
        assert!((at(&e, 0.3, 0.9) - at(&again, 0.3, 0.9)).norm() < 1e-15);
    }
}
