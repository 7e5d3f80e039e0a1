//! A small arithmetic expression language for user-defined objectives.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := ("-" | "+") unary | power
//! power   := primary ("^" unary)?
//! primary := number | "pi" | "e" | var | func "(" expr ")" | "(" expr ")"
//! var     := "x1" | "x2" | ...
//! func    := sin | cos | tan | exp | ln | log | sqrt | abs
//! ```
//!
//! `^` binds tighter than unary minus, so `-x1^2` is `-(x1^2)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression over control variables `x1..xd`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    max_var: usize,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            max_var: 0,
            src_len: src.chars().count(),
        };
        let root = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(Error::Expression {
                position: tok.col,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(Self {
            root,
            max_var: parser.max_var,
        })
    }

    /// Highest variable index referenced (1-based); 0 for constants.
    pub fn max_var(&self) -> usize {
        self.max_var
    }

    /// Evaluates with `x[0]` bound to `x1`. The caller guarantees
    /// `x.len() >= self.max_var()`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        eval(&self.root, x)
    }
}

fn eval(node: &Node, x: &[f64]) -> f64 {
    match node {
        Node::Const(c) => *c,
        Node::Var(i) => x[*i],
        Node::Neg(inner) => -eval(inner, x),
        Node::Call(f, arg) => f.apply(eval(arg, x)),
        Node::Bin(op, l, r) => {
            let (l, r) = (eval(l, x), eval(r, x));
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => l / r,
                BinOp::Pow => {
                    if r == 2.0 {
                        l * l
                    } else if r.fract() == 0.0 && r.abs() <= 64.0 {
                        l.powi(r as i32)
                    } else {
                        l.powf(r)
                    }
                }
            }
        }
    }
}

/// Parses and evaluates an expression that references no variables.
pub fn eval_constant(src: &str) -> Result<f64> {
    let e = Expr::parse(src)?;
    if e.max_var() > 0 {
        return Err(Error::Expression {
            position: 1,
            message: "constant expression may not reference variables".into(),
        });
    }
    Ok(e.eval(&[]))
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Num(v) => format!("number {v}"),
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::Op(c) => format!("operator `{c}`"),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    col: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
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
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| Error::Expression {
                position: col,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                kind: TokKind::Num(value),
                col,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                kind: TokKind::Ident(chars[start..i].iter().collect()),
                col,
            });
        } else {
            let kind = match c {
                '+' | '-' | '*' | '/' | '^' => TokKind::Op(c),
                '(' => TokKind::LParen,
                ')' => TokKind::RParen,
                _ => {
                    return Err(Error::Expression {
                        position: col,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            out.push(Token { kind, col });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    max_var: usize,
    src_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokKind::Op(c),
                ..
            }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn end_error(&self, what: &str) -> Error {
        Error::Expression {
            position: self.src_len + 1,
            message: format!("unexpected end of input, expected {what}"),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.eat_op(&['-', '+']) {
            Some('-') => Ok(Node::Neg(Box::new(self.unary()?))),
            Some(_) => self.unary(),
            None => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat_op(&['^']).is_some() {
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let tok = self.next().ok_or_else(|| self.end_error("an operand"))?;
        match tok.kind {
            TokKind::Num(v) => Ok(Node::Const(v)),
            TokKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(tok.col)?;
                Ok(inner)
            }
            TokKind::Ident(name) => self.ident(name, tok.col),
            other => Err(Error::Expression {
                position: tok.col,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn ident(&mut self, name: String, col: usize) -> Result<Node> {
        if let Some(func) = Func::from_name(&name) {
            match self.next() {
                Some(Token {
                    kind: TokKind::LParen,
                    col: open,
                }) => {
                    let arg = self.expr()?;
                    self.expect_rparen(open)?;
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                _ => {
                    return Err(Error::Expression {
                        position: col,
                        message: format!("function `{name}` must be followed by `(`"),
                    })
                }
            }
        }
        match name.as_str() {
            "pi" => return Ok(Node::Const(std::f64::consts::PI)),
            "e" => return Ok(Node::Const(std::f64::consts::E)),
            _ => {}
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            if idx >= 1 {
                self.max_var = self.max_var.max(idx);
                return Ok(Node::Var(idx - 1));
            }
        }
        Err(Error::Expression {
            position: col,
            message: format!("unknown identifier `{name}`"),
        })
    }

    fn expect_rparen(&mut self, open_col: usize) -> Result<()> {
        match self.next() {
            Some(Token {
                kind: TokKind::RParen,
                ..
            }) => Ok(()),
            Some(tok) => Err(Error::Expression {
                position: tok.col,
                message: format!(
                    "expected `)` to close `(` at column {open_col}, found {}",
                    tok.kind.describe()
                ),
            }),
            None => Err(self.end_error("`)`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: &[f64]) -> f64 {
        Expr::parse(src).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[]), 7.0);
        assert_eq!(ev("(1 + 2) * 3", &[]), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[]), 512.0);
        assert_eq!(ev("-x1^2", &[3.0]), -9.0);
        assert_eq!(ev("8 / 4 / 2", &[]), 1.0);
        assert_eq!(ev("1 - 2 - 3", &[]), -4.0);
        assert_eq!(ev("2^-1", &[]), 0.5);
        assert_eq!(ev("1.5e2 + .5", &[]), 150.5);
    }

    #[test]
    fn functions_and_constants() {
        let x = [0.3, 0.6];
        let got = ev("cos(2*x1 + x2^2) - exp(-x2^2) + sin(3*x1*x2)/3", &x);
        let want = (2.0 * x[0] + x[1] * x[1]).cos() - (-x[1] * x[1]).exp()
            + (3.0 * x[0] * x[1]).sin() / 3.0;
        assert_eq!(got, want);
        assert_eq!(eval_constant("1 - cos(pi/8)").unwrap(), 1.0 - (std::f64::consts::PI / 8.0).cos());
        assert_eq!(ev("abs(-2) + sqrt(4) + ln(e)", &[]), 5.0);
    }

    #[test]
    fn tracks_variables() {
        assert_eq!(Expr::parse("x1 + x3").unwrap().max_var(), 3);
        assert_eq!(Expr::parse("2").unwrap().max_var(), 0);
        assert!(eval_constant("x1").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let pos = |src: &str| match Expr::parse(src) {
            Err(Error::Expression { position, .. }) => position,
            other => panic!("expected error for {src}, got {other:?}"),
        };
        assert_eq!(pos("1 + $"), 5);
        assert_eq!(pos("sqrt x1"), 1);
        assert_eq!(pos("x1 + y"), 6);
        assert_eq!(pos("(1 + 2"), 7);
        assert_eq!(pos("1 2"), 3);
        assert_eq!(pos("x0"), 1);
        assert_eq!(pos("1 +"), 4);
    }
}
