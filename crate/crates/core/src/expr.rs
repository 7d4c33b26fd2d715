//! Scalar formula language used for kernels, curves, nonlinearities and
//! right-hand sides.
//!
//! Formulas are written in the variables `t`, `s` and `x` with the usual
//! arithmetic operators and the unary functions `sin`, `cos`, `exp`, `log`
//! and `sqrt`:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" factor)?
//! base   := number | ident | ident "(" expr ")" | "(" expr ")" | "-" base
//! ```
//!
//! `^` binds tighter than unary minus, so `-t^2` is `-(t^2)`, and it is
//! right-associative. Trees are immutable once built and can be shared
//! freely between threads.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors produced while parsing or evaluating a formula.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("variable `{0}` is not bound")]
    Unbound(Var),
    #[error("domain error: {op} of {value}")]
    Domain { op: &'static str, value: f64 },
}

/// The three symbols a formula may refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    S,
    X,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::S => "s",
            Var::X => "x",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "t" => Some(Var::T),
            "s" => Some(Var::S),
            "x" => Some(Var::X),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Neg => "-",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Values for the free variables of an expression. Unset slots are unbound.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Vars {
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub x: Option<f64>,
}

impl Vars {
    pub fn t(t: f64) -> Self {
        Vars { t: Some(t), ..Vars::default() }
    }

    pub fn ts(t: f64, s: f64) -> Self {
        Vars { t: Some(t), s: Some(s), x: None }
    }

    pub fn sx(s: f64, x: f64) -> Self {
        Vars { t: None, s: Some(s), x: Some(x) }
    }

    pub fn with(mut self, var: Var, value: f64) -> Self {
        *self.slot(var) = Some(value);
        self
    }

    /// Builds bindings from `(name, value)` pairs; unknown names are rejected.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, ExprError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut vars = Vars::default();
        for (name, value) in pairs {
            let var = Var::from_name(name).ok_or_else(|| ExprError::UnknownIdentifier {
                name: name.to_string(),
                offset: 0,
            })?;
            *vars.slot(var) = Some(value);
        }
        Ok(vars)
    }

    fn slot(&mut self, var: Var) -> &mut Option<f64> {
        match var {
            Var::T => &mut self.t,
            Var::S => &mut self.s,
            Var::X => &mut self.x,
        }
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        match var {
            Var::T => self.t,
            Var::S => self.s,
            Var::X => self.x,
        }
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        Parser::new(text).parse()
    }

    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(var: Var) -> Expr {
        Expr::Var(var)
    }

    /// Evaluates the tree. Domain violations are reported instead of
    /// producing NaN.
    pub fn eval(&self, vars: &Vars) -> Result<f64, ExprError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => vars.get(*v).ok_or(ExprError::Unbound(*v)),
            Expr::Unary(func, arg) => {
                let a = arg.eval(vars)?;
                apply_unary(*func, a)
            }
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.eval(vars)?;
                let b = rhs.eval(vars)?;
                apply_binary(*op, a, b)
            }
        }
    }

    /// Whether `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Unary(_, a) => a.depends_on(var),
            Expr::Binary(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Symbolic derivative with light simplification.
    pub fn differentiate(&self, wrt: Var) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(v) => Expr::Const(if *v == wrt { 1.0 } else { 0.0 }),
            Expr::Unary(func, arg) => {
                let da = arg.differentiate(wrt);
                if da.as_const() == Some(0.0) {
                    return Expr::Const(0.0);
                }
                let a = (**arg).clone();
                let outer = match func {
                    Func::Neg => return neg(da),
                    Func::Sin => unary(Func::Cos, a),
                    Func::Cos => neg(unary(Func::Sin, a)),
                    Func::Exp => unary(Func::Exp, a),
                    Func::Log => div(Expr::Const(1.0), a),
                    Func::Sqrt => div(Expr::Const(0.5), unary(Func::Sqrt, a)),
                };
                mul(outer, da)
            }
            Expr::Binary(op, lhs, rhs) => {
                let (u, v) = (&**lhs, &**rhs);
                match op {
                    BinOp::Add => add(u.differentiate(wrt), v.differentiate(wrt)),
                    BinOp::Sub => sub(u.differentiate(wrt), v.differentiate(wrt)),
                    BinOp::Mul => add(
                        mul(u.differentiate(wrt), v.clone()),
                        mul(u.clone(), v.differentiate(wrt)),
                    ),
                    BinOp::Div => {
                        let du = u.differentiate(wrt);
                        let dv = v.differentiate(wrt);
                        if dv.as_const() == Some(0.0) {
                            div(du, v.clone())
                        } else {
                            div(
                                sub(mul(du, v.clone()), mul(u.clone(), dv)),
                                pow(v.clone(), Expr::Const(2.0)),
                            )
                        }
                    }
                    BinOp::Pow => {
                        let du = u.differentiate(wrt);
                        let dv = v.differentiate(wrt);
                        match (v.as_const(), dv.as_const() == Some(0.0)) {
                            (Some(c), _) => mul(
                                mul(Expr::Const(c), pow(u.clone(), Expr::Const(c - 1.0))),
                                du,
                            ),
                            (None, true) => mul(
                                mul(v.clone(), pow(u.clone(), sub(v.clone(), Expr::Const(1.0)))),
                                du,
                            ),
                            (None, false) => {
                                // u^v * (v' ln u + v u'/u)
                                let log_term = mul(dv, unary(Func::Log, u.clone()));
                                let base_term = div(mul(v.clone(), du), u.clone());
                                mul(self.clone(), add(log_term, base_term))
                            }
                        }
                    }
                }
            }
        }
    }
}

fn apply_unary(func: Func, a: f64) -> Result<f64, ExprError> {
    Ok(match func {
        Func::Neg => -a,
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Exp => a.exp(),
        Func::Log => {
            if a <= 0.0 {
                return Err(ExprError::Domain { op: "log", value: a });
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err(ExprError::Domain { op: "sqrt", value: a });
            }
            a.sqrt()
        }
    })
}

fn apply_binary(op: BinOp, a: f64, b: f64) -> Result<f64, ExprError> {
    Ok(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err(ExprError::Domain { op: "division", value: a });
            }
            a / b
        }
        BinOp::Pow => power(a, b)?,
    })
}

fn power(base: f64, exponent: f64) -> Result<f64, ExprError> {
    let integral = exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64;
    if base == 0.0 && exponent < 0.0 {
        return Err(ExprError::Domain { op: "zero to a negative power", value: exponent });
    }
    if integral {
        Ok(base.powi(exponent as i32))
    } else if base < 0.0 {
        Err(ExprError::Domain { op: "non-integer power of a negative base", value: base })
    } else {
        Ok(base.powf(exponent))
    }
}

// Smart constructors: constant folding and the x*0, x*1, x+0 identities.

fn fold(op: BinOp, a: &Expr, b: &Expr) -> Option<Expr> {
    let (x, y) = (a.as_const()?, b.as_const()?);
    let value = apply_binary(op, x, y).ok()?;
    value.is_finite().then_some(Expr::Const(value))
}

fn add(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(BinOp::Add, &a, &b) {
        return c;
    }
    match (a.as_const(), b.as_const()) {
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(BinOp::Sub, &a, &b) {
        return c;
    }
    match (a.as_const(), b.as_const()) {
        (_, Some(0.0)) => a,
        (Some(0.0), _) => neg(b),
        _ => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(BinOp::Mul, &a, &b) {
        return c;
    }
    match (a.as_const(), b.as_const()) {
        (Some(0.0), _) | (_, Some(0.0)) => Expr::Const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(BinOp::Div, &a, &b) {
        return c;
    }
    match (a.as_const(), b.as_const()) {
        (Some(0.0), _) => Expr::Const(0.0),
        (_, Some(1.0)) => a,
        _ => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(BinOp::Pow, &a, &b) {
        return c;
    }
    match b.as_const() {
        Some(1.0) => a,
        Some(0.0) => Expr::Const(1.0),
        _ => Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Unary(Func::Neg, inner) => *inner,
        other => Expr::Unary(Func::Neg, Box::new(other)),
    }
}

fn unary(func: Func, a: Expr) -> Expr {
    if let Some(c) = a.as_const() {
        if let Ok(v) = apply_unary(func, c) {
            if v.is_finite() {
                return Expr::Const(v);
            }
        }
    }
    Expr::Unary(func, Box::new(a))
}

/// Fully parenthesised output; parsing it back yields an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(Func::Neg, a) => write!(f, "(-{a})"),
            Expr::Unary(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    current: Token,
    current_at: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0, current: Token::End, current_at: 0 }
    }

    fn parse(mut self) -> Result<Expr, ExprError> {
        if self.text.trim().is_empty() {
            return Err(self.syntax(0, "empty expression"));
        }
        self.advance()?;
        let expr = self.expr()?;
        if self.current != Token::End {
            return Err(self.syntax(self.current_at, "unexpected trailing input"));
        }
        Ok(expr)
    }

    fn syntax(&self, offset: usize, message: &str) -> ExprError {
        ExprError::Syntax { offset, message: message.to_string() }
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.current_at = self.pos;
        let rest = &self.text[self.pos..];
        let Some(ch) = rest.chars().next() else {
            self.current = Token::End;
            return Ok(());
        };
        self.current = match ch {
            '0'..='9' | '.' => {
                let len = number_len(rest);
                let literal = &rest[..len];
                let value = literal
                    .parse::<f64>()
                    .map_err(|_| self.syntax(self.pos, "malformed number"))?;
                self.pos += len;
                Token::Num(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                self.pos += len;
                Token::Ident(rest[..len].to_string())
            }
            '+' | '-' | '*' | '/' | '^' => {
                self.pos += 1;
                Token::Op(ch)
            }
            // U+2212 minus sign
            '\u{2212}' => {
                self.pos += ch.len_utf8();
                Token::Op('-')
            }
            '(' => {
                self.pos += 1;
                Token::LParen
            }
            ')' => {
                self.pos += 1;
                Token::RParen
            }
            _ => return Err(self.syntax(self.pos, &format!("unexpected character `{ch}`"))),
        };
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.current {
                Token::Op('+') => BinOp::Add,
                Token::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.current {
                Token::Op('*') => BinOp::Mul,
                Token::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        // Unary minus sits below `^`: -a^b parses as -(a^b).
        if self.current == Token::Op('-') {
            self.advance()?;
            let inner = self.factor()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Unary(Func::Neg, Box::new(other)),
            });
        }
        let base = self.base()?;
        if self.current == Token::Op('^') {
            self.advance()?;
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        let at = self.current_at;
        match std::mem::replace(&mut self.current, Token::End) {
            Token::Num(v) => {
                self.advance()?;
                Ok(Expr::Const(v))
            }
            Token::Ident(name) => {
                self.advance()?;
                if self.current == Token::LParen {
                    let func = Func::from_name(&name)
                        .ok_or(ExprError::UnknownFunction { name, offset: at })?;
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Unary(func, Box::new(arg)))
                } else if let Some(var) = Var::from_name(&name) {
                    Ok(Expr::Var(var))
                } else {
                    Err(ExprError::UnknownIdentifier { name, offset: at })
                }
            }
            Token::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::End => Err(self.syntax(at, "unexpected end of input")),
            other => {
                self.current = other;
                Err(self.syntax(at, "expected a number, variable, function or `(`"))
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        if self.current != Token::RParen {
            return Err(self.syntax(self.current_at, "expected `)`"));
        }
        self.advance()
    }
}

/// Length of the numeric literal at the start of `s` (digits, one dot,
/// optional exponent).
fn number_len(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
        i += 1;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn eval(text: &str, vars: Vars) -> f64 {
        Expr::parse(text).unwrap().eval(&vars).unwrap()
    }

    #[test]
    fn parses_and_evaluates_basic_examples() {
        assert_eq!(eval("1+t+s", Vars::ts(2.0, 3.0)), 6.0);
        assert!((eval("sin(t/2)", Vars::t(PI)) - 1.0).abs() < 1e-15);
        assert_eq!(eval("3*x + x^3", Vars::sx(0.0, 2.0)), 14.0);
        assert_eq!(eval("t^2", Vars::t(0.5)), 0.25);
        assert_eq!(eval("1+t-s", Vars::ts(1.0, 1.0)), 1.0);
        assert_eq!(eval("(1+2*t)*x", Vars::t(0.5).with(Var::X, 3.0)), 6.0);
    }

    #[test]
    fn left_associative_sum_shape() {
        let e = Expr::parse("1+t+s").unwrap();
        match e {
            Expr::Binary(BinOp::Add, lhs, rhs) => {
                assert_eq!(*rhs, Expr::Var(Var::S));
                assert!(matches!(*lhs, Expr::Binary(BinOp::Add, _, _)));
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn precedence_rules() {
        assert_eq!(eval("2+3*4", Vars::default()), 14.0);
        assert_eq!(eval("2^3^2", Vars::default()), 512.0);
        assert_eq!(eval("-2^2", Vars::default()), -4.0);
        assert_eq!(eval("(-2)^2", Vars::default()), 4.0);
        assert_eq!(eval("2*-t", Vars::t(3.0)), -6.0);
        assert_eq!(eval("8/4/2", Vars::default()), 1.0);
        assert_eq!(eval("1.5e2 + 2E-1", Vars::default()), 150.2);
        assert_eq!(eval("2 \u{2212} t", Vars::t(0.5)), 1.5);
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert!(matches!(Expr::parse(""), Err(ExprError::Syntax { .. })));
        assert_eq!(
            Expr::parse("1 + y"),
            Err(ExprError::UnknownIdentifier { name: "y".into(), offset: 4 })
        );
        assert_eq!(
            Expr::parse("tan(t)"),
            Err(ExprError::UnknownFunction { name: "tan".into(), offset: 0 })
        );
        match Expr::parse("(1+t") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match Expr::parse("1 + * 2") {
            Err(ExprError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Expr::parse("1 2"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(Expr::parse("t # 2"), Err(ExprError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn evaluation_errors() {
        let e = Expr::parse("t + s").unwrap();
        assert_eq!(e.eval(&Vars::t(1.0)), Err(ExprError::Unbound(Var::S)));
        assert!(matches!(
            Expr::parse("log(t)").unwrap().eval(&Vars::t(0.0)),
            Err(ExprError::Domain { op: "log", .. })
        ));
        assert!(matches!(
            Expr::parse("t^(-1)").unwrap().eval(&Vars::t(0.0)),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            Expr::parse("t^0.5").unwrap().eval(&Vars::t(-1.0)),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            Expr::parse("sqrt(t)").unwrap().eval(&Vars::t(-1.0)),
            Err(ExprError::Domain { .. })
        ));
        // integer powers of negative bases are fine
        assert_eq!(eval("t^3", Vars::t(-2.0)), -8.0);
    }

    #[test]
    fn bindings_from_names() {
        let vars = Vars::from_pairs([("t", 1.0), ("s", 1.0)]).unwrap();
        assert_eq!(Expr::parse("1+t-s").unwrap().eval(&vars).unwrap(), 1.0);
        assert!(Vars::from_pairs([("y", 1.0)]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = Expr::parse("x + x^2").unwrap().differentiate(Var::X);
        assert_eq!(d.eval(&Vars::sx(0.0, 1.0)).unwrap(), 3.0);
        let d = Expr::parse("sin(t/2)").unwrap().differentiate(Var::T);
        assert_eq!(d.eval(&Vars::t(0.0)).unwrap(), 0.5);
        let d = Expr::parse("3*x + x^3").unwrap().differentiate(Var::X);
        assert_eq!(d.eval(&Vars::sx(0.0, 0.0)).unwrap(), 3.0);
    }

    #[test]
    fn derivative_simplifies_trivial_cases() {
        assert_eq!(Expr::parse("1+s").unwrap().differentiate(Var::T), Expr::Const(0.0));
        assert_eq!(Expr::parse("x").unwrap().differentiate(Var::X), Expr::Const(1.0));
        assert_eq!(Expr::parse("3*t").unwrap().differentiate(Var::T), Expr::Const(3.0));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let cases = [
            ("t^t", Var::T),
            ("exp(-t)*cos(3*t)", Var::T),
            ("log(1+t^2)/(2+sin(t))", Var::T),
            ("sqrt(1+x^2)", Var::X),
            ("2^t", Var::T),
            ("x^(1+t)", Var::X),
            ("-(s*x)^2 + x/(1+x^2)", Var::X),
        ];
        for (text, wrt) in cases {
            let e = Expr::parse(text).unwrap();
            let d = e.differentiate(wrt);
            for k in 1..20 {
                let p = 0.1 * k as f64;
                let at = |v: f64| Vars::default().with(Var::T, p).with(Var::S, p).with(wrt, v);
                let h = 1e-6;
                let fd = (e.eval(&at(p + h)).unwrap() - e.eval(&at(p - h)).unwrap()) / (2.0 * h);
                let exact = d.eval(&at(p)).unwrap();
                assert!((fd - exact).abs() < 1e-6, "{text} at {p}: {exact} vs {fd}");
            }
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-5.0f64..5.0).prop_map(Expr::Const),
            (0u32..1000).prop_map(|n| Expr::Const(n as f64 / 8.0)),
            Just(Expr::Var(Var::T)),
            Just(Expr::Var(Var::S)),
            Just(Expr::Var(Var::X)),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let funcs = prop_oneof![
                Just(Func::Neg),
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Exp),
                Just(Func::Log),
                Just(Func::Sqrt),
            ];
            let ops = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            prop_oneof![
                (funcs, inner.clone()).prop_map(|(f, a)| Expr::Unary(f, Box::new(a))),
                (ops, inner.clone(), inner)
                    .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            ]
        })
    }

    fn same(a: &Result<f64, ExprError>, b: &Result<f64, ExprError>) -> bool {
        match (a, b) {
            (Ok(x), Ok(y)) => x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()),
            (Err(_), Err(_)) => true,
            _ => false,
        }
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in arb_expr(), pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0), 100)) {
            let printed = e.to_string();
            let back = Expr::parse(&printed).unwrap();
            for (t, s, x) in pts {
                let vars = Vars { t: Some(t), s: Some(s), x: Some(x) };
                prop_assert!(same(&e.eval(&vars), &back.eval(&vars)), "{printed}");
            }
        }

        #[test]
        fn evaluation_is_deterministic(e in arb_expr(), t in -3.0f64..3.0) {
            let vars = Vars { t: Some(t), s: Some(0.5), x: Some(-0.25) };
            prop_assert!(same(&e.eval(&vars), &e.eval(&vars)));
        }
    }
}
