//! Inline multiplier expressions `K̂(w, λ)`.
//!
//! ```text
//! expr   = term { ("+" | "-") term } ;
//! term   = unary { ("*" | "/") unary } ;
//! unary  = ("+" | "-") unary | power ;
//! power  = atom [ "^" unary ] ;                  (* right-associative *)
//! atom   = number | name | func "(" expr ")" | "(" expr ")" ;
//! name   = "w1" | … | "w2n" | "lambda" | "pi" | "i" ;
//! func   = "abs" | "sqrt" | "exp" | "log" | "sin" | "cos" ;
//! ```
//!
//! `w1..wn` are the x-frequencies, `wn+1..w2n` the y-frequencies. Expressions
//! can be evaluated pointwise or as Taylor jets (exact derivatives).

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// `0..2n` are `w`, `2n` is `λ`.
    Var(usize),
    Imag,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
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
            let v = s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}' at {start}")))?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' at {i}")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(usize::MAX)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{c}' at {}", self.describe_pos())))
        }
    }

    fn describe_pos(&self) -> String {
        match self.at() {
            usize::MAX => "end of input".into(),
            p => format!("offset {p}"),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let here = self.describe_pos();
        match self.toks.get(self.pos).map(|t| t.1.clone()) {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let func = match name.as_str() {
                    "abs" => Some(Func::Abs),
                    "sqrt" => Some(Func::Sqrt),
                    "exp" => Some(Func::Exp),
                    "log" => Some(Func::Log),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    _ => None,
                };
                if let Some(f) = func {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "lambda" => Ok(Expr::Var(2 * self.n)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "i" => Ok(Expr::Imag),
                    _ => {
                        let idx = name
                            .strip_prefix('w')
                            .and_then(|d| d.parse::<usize>().ok())
                            .filter(|&k| k >= 1 && k <= 2 * self.n)
                            .ok_or_else(|| Error::Parse(format!("unknown name '{name}' at {here}")))?;
                        Ok(Expr::Var(idx - 1))
                    }
                }
            }
            Some(Tok::Op(c)) => Err(Error::Parse(format!("unexpected '{c}' at {here}"))),
            None => Err(Error::Parse("unexpected end of input".into())),
        }
    }
}

/// Parses a multiplier over `ℍⁿ` (variables `w1..w{2n}`, `lambda`).
pub fn parse(src: &str, n: usize) -> Result<Expr> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = Parser { toks, pos: 0, n };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at {}", p.describe_pos())));
    }
    Ok(e)
}

/// Arithmetic shared by pointwise values and jets.
trait Value: Clone {
    fn num(&self, v: Complex<f64>) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn pow(&self, o: &Self) -> Self;
    fn call(&self, f: Func) -> Self;
}

impl<T: Real> Value for Complex<T> {
    fn num(&self, v: Complex<f64>) -> Self {
        Complex::new(T::c(v.re), T::c(v.im))
    }
    fn add(&self, o: &Self) -> Self {
        *self + *o
    }
    fn sub(&self, o: &Self) -> Self {
        *self - *o
    }
    fn mul(&self, o: &Self) -> Self {
        *self * *o
    }
    fn div(&self, o: &Self) -> Self {
        *self / *o
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn pow(&self, o: &Self) -> Self {
        if o.im == T::zero() {
            let p = o.re;
            if self.im == T::zero() && (self.re >= T::zero() || p == p.round()) {
                return Complex::new(self.re.powf(p), T::zero());
            }
            return self.powf(p);
        }
        self.powc(*o)
    }
    fn call(&self, f: Func) -> Self {
        let real = self.im == T::zero();
        match f {
            Func::Abs => Complex::new(self.norm(), T::zero()),
            Func::Sqrt if real && self.re >= T::zero() => Complex::new(self.re.sqrt(), T::zero()),
            Func::Sqrt => self.sqrt(),
            Func::Exp => self.exp(),
            Func::Log if real && self.re > T::zero() => Complex::new(self.re.ln(), T::zero()),
            Func::Log => self.ln(),
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
        }
    }
}

impl<T: Real> Value for Jet<T> {
    fn num(&self, v: Complex<f64>) -> Self {
        Jet::constant(self.space(), Complex::new(T::c(v.re), T::c(v.im)))
    }
    fn add(&self, o: &Self) -> Self {
        Jet::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Jet::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Jet::mul(self, o)
    }
    fn div(&self, o: &Self) -> Self {
        Jet::div(self, o)
    }
    fn neg(&self) -> Self {
        Jet::neg(self)
    }
    fn pow(&self, o: &Self) -> Self {
        Jet::pow(self, o)
    }
    fn call(&self, f: Func) -> Self {
        match f {
            Func::Abs => self.abs(),
            Func::Sqrt => self.sqrt(),
            Func::Exp => self.exp(),
            Func::Log => self.ln(),
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
        }
    }
}

impl Expr {
    fn walk<V: Value>(&self, vars: &[V]) -> V {
        let proto = &vars[0];
        match self {
            Expr::Num(v) => proto.num(Complex::new(*v, 0.0)),
            Expr::Imag => proto.num(Complex::new(0.0, 1.0)),
            Expr::Var(i) => vars[*i].clone(),
            Expr::Neg(a) => a.walk(vars).neg(),
            Expr::Add(a, b) => a.walk(vars).add(&b.walk(vars)),
            Expr::Sub(a, b) => a.walk(vars).sub(&b.walk(vars)),
            Expr::Mul(a, b) => a.walk(vars).mul(&b.walk(vars)),
            Expr::Div(a, b) => a.walk(vars).div(&b.walk(vars)),
            Expr::Pow(a, b) => a.walk(vars).pow(&b.walk(vars)),
            Expr::Call(f, a) => a.walk(vars).call(*f),
        }
    }

    /// Pointwise value at `(w, λ)`.
    pub fn eval<T: Real>(&self, w: &[T], lambda: T) -> Complex<T> {
        let vars: Vec<Complex<T>> =
            w.iter().chain(std::iter::once(&lambda)).map(|&v| Complex::new(v, T::zero())).collect();
        self.walk(&vars)
    }

    /// Taylor jet in `(w₁, …, w₂ₙ, λ)` at the given point, to total order `space.order()`.
    pub fn jet<T: Real>(&self, space: &Arc<JetSpace>, w: &[T], lambda: T) -> Jet<T> {
        let vars: Vec<Jet<T>> = w
            .iter()
            .chain(std::iter::once(&lambda))
            .enumerate()
            .map(|(i, &v)| Jet::variable(space, i, v))
            .collect();
        self.walk(&vars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn ev(src: &str, w: &[f64], l: f64) -> C {
        parse(src, w.len() / 2).unwrap().eval(w, l)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2*3", &[0.0, 0.0], 1.0), C::new(7.0, 0.0));
        assert_eq!(ev("2^3^2", &[0.0, 0.0], 1.0), C::new(512.0, 0.0));
        assert_eq!(ev("-2^2", &[0.0, 0.0], 1.0), C::new(-4.0, 0.0));
        assert_eq!(ev("8/4/2", &[0.0, 0.0], 1.0), C::new(1.0, 0.0));
        assert_eq!(ev("(1+2)*3", &[0.0, 0.0], 1.0), C::new(9.0, 0.0));
        assert_eq!(ev("1e-1 * 20", &[0.0, 0.0], 1.0), C::new(2.0, 0.0));
    }

    #[test]
    fn variables_and_functions() {
        let r = ev("(w1^2+w2^2)/(w1^2+w2^2+abs(lambda))", &[1.0, 2.0], -5.0);
        assert!((r - C::new(0.5, 0.0)).norm() < 1e-15);
        assert!((ev("sqrt(w1^2 + w2^2)", &[3.0, 4.0], 1.0) - C::new(5.0, 0.0)).norm() < 1e-15);
        assert!((ev("exp(i*pi)", &[0.0, 0.0], 1.0) - C::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((ev("w4 * lambda", &[0.0, 0.0, 0.0, 3.0], 2.0) - C::new(6.0, 0.0)).norm() < 1e-15);
        assert!((ev("log(exp(2)) + sin(0) + cos(0)", &[0.0, 0.0], 1.0) - C::new(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "1 +", "w3", "foo(1)", "(1", "1 2", "w0", "abs 1", "1 $ 2", "lambda)"] {
            assert!(matches!(parse(bad, 1), Err(Error::Parse(_))), "{bad}");
        }
        assert!(parse("w3", 2).is_ok());
    }

    #[test]
    fn jets_agree_with_finite_differences() {
        let e = parse("(w1^2+w2^2)/(w1^2+w2^2+abs(lambda)) * exp(i*log(abs(lambda)))", 1).unwrap();
        let sp = JetSpace::new(3, 2);
        let (w, l) = ([0.3, -0.7], 1.4);
        let j: Jet<f64> = e.jet(&sp, &w, l);
        assert!((j.value() - e.eval(&w, l)).norm() < 1e-15);
        let h = 1e-5;
        let fd = (e.eval(&[w[0] + h, w[1]], l) - e.eval(&[w[0] - h, w[1]], l)) / (2.0 * h);
        assert!((j.derivative(&[1, 0, 0]).unwrap() - fd).norm() < 1e-8);
        let fd = (e.eval(&w, l + h) - 2.0 * e.eval(&w, l) + e.eval(&w, l - h)) / (h * h);
        assert!((j.derivative(&[0, 0, 2]).unwrap() - fd).norm() < 1e-4);
    }
}
