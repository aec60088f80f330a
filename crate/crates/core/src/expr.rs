//! A small pure expression language for rule functions.
//!
//! Grammar (EBNF), loosest binding first:
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?          (* right-associative *)
//! primary := number | var | call | "(" expr ")"
//! call    := ("sin" | "cos" | "exp" | "ln" | "sqrt" | "abs") "(" expr ")"
//! var     := "x" | "t"
//! number  := digit+ ("." digit+)? (("e" | "E") ("+" | "-")? digit+)?
//! ```
//!
//! So `-x^2` is `-(x^2)` and `2^3^2` is `2^(3^2)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    T,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::T => "t",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "t" => Some(Var::T),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Sin,
        Builtin::Cos,
        Builtin::Exp,
        Builtin::Ln,
        Builtin::Sqrt,
        Builtin::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Exp => "exp",
            Builtin::Ln => "ln",
            Builtin::Sqrt => "sqrt",
            Builtin::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }
}

/// Parsed expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(&'static str),
    #[error("math domain error: {0}")]
    MathDomain(String),
}

/// Variable bindings for [`Expr::eval`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Env {
    pub x: Option<f64>,
    pub t: Option<f64>,
}

impl Env {
    pub fn x(x: f64) -> Env {
        Env { x: Some(x), t: None }
    }

    pub fn t(t: f64) -> Env {
        Env { x: None, t: Some(t) }
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        match var {
            Var::X => self.x,
            Var::T => self.t,
        }
    }
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        Expr::Neg(Box::new(e))
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn call(f: Builtin, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// Evaluates with IEEE-754 double arithmetic.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => env.get(*v).ok_or(EvalError::UnboundVariable(v.name())),
            Expr::Neg(e) => Ok(-e.eval(env)?),
            Expr::Binary(op, l, r) => {
                let a = l.eval(env)?;
                let b = r.eval(env)?;
                apply_binary(*op, a, b)
            }
            Expr::Call(f, arg) => apply_builtin(*f, arg.eval(env)?),
        }
    }

    /// Shorthand for evaluating a single-variable rule at `x`.
    pub fn eval_x(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(&Env::x(x))
    }

    /// Every variable mentioned in the tree.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

fn apply_binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    match op {
        BinOp::Add => Ok(a + b),
        BinOp::Sub => Ok(a - b),
        BinOp::Mul => Ok(a * b),
        BinOp::Div => {
            if b == 0.0 {
                Err(EvalError::MathDomain(format!("division by zero ({a}/0)")))
            } else {
                Ok(a / b)
            }
        }
        BinOp::Pow => {
            if a < 0.0 && b.fract() != 0.0 {
                Err(EvalError::MathDomain(format!(
                    "negative base {a} with non-integer exponent {b}"
                )))
            } else if a == 0.0 && b < 0.0 {
                Err(EvalError::MathDomain(format!("zero base with negative exponent {b}")))
            } else {
                Ok(a.powf(b))
            }
        }
    }
}

fn apply_builtin(f: Builtin, v: f64) -> Result<f64, EvalError> {
    match f {
        Builtin::Sin => Ok(v.sin()),
        Builtin::Cos => Ok(v.cos()),
        Builtin::Exp => Ok(v.exp()),
        Builtin::Ln => {
            if v <= 0.0 {
                Err(EvalError::MathDomain(format!("ln of non-positive {v}")))
            } else {
                Ok(v.ln())
            }
        }
        Builtin::Sqrt => {
            if v < 0.0 {
                Err(EvalError::MathDomain(format!("sqrt of negative {v}")))
            } else {
                Ok(v.sqrt())
            }
        }
        Builtin::Abs => Ok(v.abs()),
    }
}

// Printing precedence: negation and negative literals sit between `*` and `^`.
const NEG_PREC: u8 = 3;
const ATOM_PREC: u8 = 5;

fn print_precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if c.is_sign_negative() => NEG_PREC,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => ATOM_PREC,
        Expr::Neg(_) => NEG_PREC,
        Expr::Binary(op, ..) => op.precedence(),
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    /// Minimal parenthesization that re-parses to the identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if *c == 0.0 {
                    // -0.0 would print as "-0"
                    write!(f, "0")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, print_precedence(e) < NEG_PREC)
            }
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                let (lp, rp) = (print_precedence(l), print_precedence(r));
                if *op == BinOp::Pow {
                    write_child(f, l, lp <= p)?;
                    f.write_str("^")?;
                    write_child(f, r, rp < NEG_PREC)
                } else {
                    write_child(f, l, lp < p)?;
                    write!(f, "{}", op.symbol())?;
                    write_child(f, r, rp <= p)
                }
            }
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse_expr(text: &str) -> Result<Expr, SyntaxError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(SyntaxError {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some(tok) => Err(SyntaxError {
            offset: tok.offset,
            message: format!("unexpected {}", tok.kind.describe()),
        }),
    }
}

/// Renders an expression in minimal-parenthesis form.
pub fn print_expr(e: &Expr) -> String {
    e.to_string()
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Number(n) => format!("number {n}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Op(c) => format!("operator `{c}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push(Token {
                    kind: TokenKind::Op(c as char),
                    offset: start,
                });
                i += 1;
            }
            b'(' => {
                out.push(Token {
                    kind: TokenKind::LParen,
                    offset: start,
                });
                i += 1;
            }
            b')' => {
                out.push(Token {
                    kind: TokenKind::RParen,
                    offset: start,
                });
                i += 1;
            }
            b'0'..=b'9' => {
                i = scan_number(bytes, i)?;
                let value: f64 = text[start..i].parse().map_err(|_| SyntaxError {
                    offset: start,
                    message: format!("malformed number `{}`", &text[start..i]),
                })?;
                out.push(Token {
                    kind: TokenKind::Number(value),
                    offset: start,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: TokenKind::Ident(text[start..i].to_string()),
                    offset: start,
                });
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(SyntaxError {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        }
    }
    Ok(out)
}

fn scan_number(bytes: &[u8], mut i: usize) -> Result<usize, SyntaxError> {
    let digits = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    i = digits(i);
    if i < bytes.len() && bytes[i] == b'.' {
        let frac = digits(i + 1);
        if frac == i + 1 {
            return Err(SyntaxError {
                offset: i,
                message: "expected digits after decimal point".into(),
            });
        }
        i = frac;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp = digits(j);
        if exp == j {
            return Err(SyntaxError {
                offset: i,
                message: "expected digits in exponent".into(),
            });
        }
        i = exp;
    }
    Ok(i)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c), ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn error(&self, expected: &str) -> SyntaxError {
        let found = match self.peek() {
            Some(tok) => tok.kind.describe(),
            None => "end of input".into(),
        };
        SyntaxError {
            offset: self.offset(),
            message: format!("expected {expected}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::binary(op, lhs, self.term()?);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.primary()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("an operand"));
        };
        match tok.kind {
            TokenKind::Number(n) => {
                self.pos += 1;
                Ok(Expr::Const(n))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::Var(v));
                }
                let Some(func) = Builtin::from_name(&name) else {
                    return Err(SyntaxError {
                        offset: tok.offset,
                        message: format!("unknown name `{name}`"),
                    });
                };
                if !matches!(self.peek().map(|t| &t.kind), Some(TokenKind::LParen)) {
                    return Err(self.error(&format!("`(` after `{name}`")));
                }
                self.pos += 1;
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::call(func, arg))
            }
            _ => Err(self.error("an operand")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), SyntaxError> {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("`)`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_at(text: &str, x: f64) -> f64 {
        parse_expr(text).unwrap().eval_x(x).unwrap()
    }

    #[test]
    fn square_parses_to_pow_node() {
        let e = parse_expr("x^2").unwrap();
        assert_eq!(e, Expr::binary(BinOp::Pow, Expr::Var(Var::X), Expr::Const(2.0)));
        assert_eq!(e.eval_x(3.0).unwrap(), 9.0);
        assert_eq!(e.eval_x(5.0).unwrap(), 25.0);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval_at("2+3*4", 0.0), 14.0);
        assert_eq!(eval_at("2^3^2", 0.0), 512.0);
        assert_eq!(eval_at("-x^2", 3.0), -9.0);
        assert_eq!(eval_at("(x-3)^2", 3.0), 0.0);
        assert_eq!(eval_at("2^-1", 0.0), 0.5);
        assert_eq!(eval_at("10-4-3", 0.0), 3.0);
        assert_eq!(eval_at("16/4/2", 0.0), 2.0);
        assert_eq!(eval_at("sqrt(x)+abs(-2)", 9.0), 5.0);
        assert_eq!(eval_at("1.5e2", 0.0), 150.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_expr("2+*3").unwrap_err();
        assert_eq!(err.offset, 2);
        assert_eq!(parse_expr("").unwrap_err().offset, 0);
        assert_eq!(parse_expr("(x+1").unwrap_err().offset, 4);
        assert_eq!(parse_expr("x $ 2").unwrap_err().offset, 2);
        assert_eq!(parse_expr("y+1").unwrap_err().offset, 0);
        assert_eq!(parse_expr("1.").unwrap_err().offset, 1);
        assert_eq!(parse_expr("sin x").unwrap_err().offset, 4);
        assert_eq!(parse_expr("x x").unwrap_err().offset, 2);
    }

    #[test]
    fn math_domain_errors() {
        let e = parse_expr("1/x").unwrap();
        assert!(matches!(e.eval_x(0.0), Err(EvalError::MathDomain(_))));
        assert!(matches!(
            parse_expr("ln(x)").unwrap().eval_x(-1.0),
            Err(EvalError::MathDomain(_))
        ));
        assert!(matches!(
            parse_expr("sqrt(x)").unwrap().eval_x(-1.0),
            Err(EvalError::MathDomain(_))
        ));
        assert!(matches!(
            parse_expr("x^0.5").unwrap().eval_x(-4.0),
            Err(EvalError::MathDomain(_))
        ));
        assert_eq!(parse_expr("x^3").unwrap().eval_x(-2.0).unwrap(), -8.0);
    }

    #[test]
    fn unbound_variable() {
        let e = parse_expr("t*2").unwrap();
        assert_eq!(e.eval_x(1.0), Err(EvalError::UnboundVariable("t")));
        assert_eq!(e.eval(&Env::t(1.5)).unwrap(), 3.0);
    }

    #[test]
    fn printing_is_minimal() {
        let sq = Expr::binary(BinOp::Pow, Expr::Var(Var::X), Expr::Const(2.0));
        assert_eq!(print_expr(&sq), "x^2");
        let neg = Expr::neg(Expr::binary(BinOp::Add, Expr::Var(Var::X), Expr::Const(1.0)));
        assert_eq!(print_expr(&neg), "-(x+1)");
        for text in ["x-(x-1)", "(x-3)^2", "2^3^2", "(2^3)^2", "-x^2", "(-x)^2", "x/(2*x)"] {
            assert_eq!(print_expr(&parse_expr(text).unwrap()), text);
        }
        let neg_const = Expr::binary(BinOp::Pow, Expr::Const(-3.0), Expr::Const(2.0));
        assert_eq!(print_expr(&neg_const), "(-3)^2");
        assert_eq!(parse_expr("(-3)^2").unwrap().eval_x(0.0).unwrap(), 9.0);
    }
}
