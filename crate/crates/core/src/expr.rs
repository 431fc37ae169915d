//! The expression grammar used by piecewise maps.
//!
//! ```text
//! pred  := or
//! or    := and ("||" and)*
//! and   := not ("&&" not)*
//! not   := "!" not | "true" | "false" | "(" pred ")" | chain
//! chain := expr (cmp expr)+            cmp: < <= > >= ==
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" unary)?
//! atom  := number | var | "pi" | "e" | func "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Variables are `x`, `y`, `z` or `x1`, `x2`, `x3`. A comparison chain such as
//! `0.1 <= x <= 1` means every adjacent comparison holds.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Tanh,
    Abs,
    Sqrt,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
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

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pred {
    Const(bool),
    Cmp(CmpOp, Expr, Expr),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::eval(format!("{what} produced a non-finite value")))
    }
}

fn as_integer(v: f64) -> Option<i32> {
    if v == libm::trunc(v) && v.abs() <= 64.0 {
        Some(v as i32)
    } else {
        None
    }
}

impl Expr {
    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) => a.max_var(),
            Expr::Bin(_, a, b) => a.max_var().max(b.max_var()),
            Expr::Call(_, args) => args.iter().filter_map(Expr::max_var).max(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(i) => x
                .get(*i)
                .copied()
                .ok_or_else(|| Error::eval(format!("variable x{} is not bound", i + 1))),
            Expr::Neg(a) => Ok(-a.eval(x)?),
            Expr::Bin(op, a, b) => {
                let a = a.eval(x)?;
                let b = b.eval(x)?;
                match op {
                    BinOp::Add => finite(a + b, "addition"),
                    BinOp::Sub => finite(a - b, "subtraction"),
                    BinOp::Mul => finite(a * b, "multiplication"),
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::eval("division by zero"));
                        }
                        finite(a / b, "division")
                    }
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            return Err(Error::eval("zero raised to a negative power"));
                        }
                        if a < 0.0 && as_integer(b).is_none() {
                            return Err(Error::eval("negative base with non-integer exponent"));
                        }
                        let v = match as_integer(b) {
                            Some(k) => libm::pow(a, k as f64),
                            None => libm::pow(a, b),
                        };
                        finite(v, "power")
                    }
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x)?;
                let v = match f {
                    Func::Sin => libm::sin(a),
                    Func::Cos => libm::cos(a),
                    Func::Exp => libm::exp(a),
                    Func::Ln => {
                        if a <= 0.0 {
                            return Err(Error::eval(format!("ln of nonpositive value {a}")));
                        }
                        libm::log(a)
                    }
                    Func::Tanh => libm::tanh(a),
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(Error::eval(format!("sqrt of negative value {a}")));
                        }
                        libm::sqrt(a)
                    }
                    Func::Min => a.min(args[1].eval(x)?),
                    Func::Max => a.max(args[1].eval(x)?),
                };
                finite(v, "function call")
            }
        }
    }

    /// Interval enclosure of the expression over a box. Points where the
    /// expression is undefined widen the result to the entire line.
    pub fn eval_interval(&self, x: &[Interval]) -> Interval {
        match self {
            Expr::Num(v) => Interval::point(*v),
            Expr::Var(i) => x.get(*i).copied().unwrap_or(Interval::ENTIRE),
            Expr::Neg(a) => -a.eval_interval(x),
            Expr::Bin(op, a, b) => {
                let ia = a.eval_interval(x);
                match op {
                    BinOp::Add => ia + b.eval_interval(x),
                    BinOp::Sub => ia - b.eval_interval(x),
                    BinOp::Mul => ia * b.eval_interval(x),
                    BinOp::Div => ia.div(b.eval_interval(x)),
                    BinOp::Pow => match **b {
                        Expr::Num(k) if as_integer(k).is_some() => ia.powi(as_integer(k).unwrap_or(1)),
                        _ => {
                            if ia.lo < 0.0 {
                                Interval::ENTIRE
                            } else {
                                ia.powf(b.eval_interval(x))
                            }
                        }
                    },
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval_interval(x);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln => {
                        if a.lo <= 0.0 {
                            Interval::ENTIRE
                        } else {
                            a.ln()
                        }
                    }
                    Func::Tanh => a.tanh(),
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a.lo < 0.0 {
                            Interval::ENTIRE
                        } else {
                            a.sqrt()
                        }
                    }
                    Func::Min => a.min(args[1].eval_interval(x)),
                    Func::Max => a.max(args[1].eval_interval(x)),
                }
            }
        }
    }
}

impl Pred {
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Pred::Const(_) => None,
            Pred::Cmp(_, a, b) => a.max_var().max(b.max_var()),
            Pred::And(a, b) | Pred::Or(a, b) => a.max_var().max(b.max_var()),
            Pred::Not(a) => a.max_var(),
        }
    }

    pub fn holds(&self, x: &[f64]) -> Result<bool> {
        Ok(match self {
            Pred::Const(b) => *b,
            Pred::Cmp(op, a, b) => {
                let a = a.eval(x)?;
                let b = b.eval(x)?;
                match op {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Eq => a == b,
                }
            }
            Pred::And(a, b) => a.holds(x)? && b.holds(x)?,
            Pred::Or(a, b) => a.holds(x)? || b.holds(x)?,
            Pred::Not(a) => !a.holds(x)?,
        })
    }

    /// Three-valued truth over a box: `Some(v)` when the predicate has value
    /// `v` at every point, `None` when undecided.
    pub fn holds_interval(&self, x: &[Interval]) -> Option<bool> {
        match self {
            Pred::Const(b) => Some(*b),
            Pred::Cmp(op, a, b) => {
                let a = a.eval_interval(x);
                let b = b.eval_interval(x);
                let (a, b) = match op {
                    CmpOp::Gt => (b, a),
                    CmpOp::Ge => (b, a),
                    _ => (a, b),
                };
                match op {
                    CmpOp::Lt | CmpOp::Gt => {
                        if a.hi < b.lo {
                            Some(true)
                        } else if a.lo >= b.hi {
                            Some(false)
                        } else {
                            None
                        }
                    }
                    CmpOp::Le | CmpOp::Ge => {
                        if a.hi <= b.lo {
                            Some(true)
                        } else if a.lo > b.hi {
                            Some(false)
                        } else {
                            None
                        }
                    }
                    CmpOp::Eq => {
                        if a.lo == a.hi && b.lo == b.hi && a.lo == b.lo {
                            Some(true)
                        } else if a.hi < b.lo || b.hi < a.lo {
                            Some(false)
                        } else {
                            None
                        }
                    }
                }
            }
            Pred::And(a, b) => match (a.holds_interval(x), b.holds_interval(x)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            Pred::Or(a, b) => match (a.holds_interval(x), b.holds_interval(x)) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            Pred::Not(a) => a.holds_interval(x).map(|v| !v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(&'static str),
    End,
}

struct Lexed {
    tok: Tok,
    line: usize,
    column: usize,
}

const OPERATORS: [&str; 17] = [
    "<=", ">=", "==", "&&", "||", "<", ">", "!", "+", "-", "*", "/", "^", "(", ")", ",", "=",
];

fn lex(text: &str) -> Result<Vec<Lexed>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let (l0, c0) = (line, col);
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                line: l0,
                column: c0,
                message: format!("malformed number `{s}`"),
            })?;
            out.push(Lexed {
                tok: Tok::Num(v),
                line: l0,
                column: c0,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Lexed {
                tok: Tok::Ident(String::from(&text[start..i])),
                line: l0,
                column: c0,
            });
        } else {
            let rest = &text[i..];
            let op = OPERATORS
                .iter()
                .find(|op| rest.starts_with(**op))
                .ok_or_else(|| Error::Parse {
                    line: l0,
                    column: c0,
                    message: format!("unexpected character `{}`", rest.chars().next().unwrap_or(' ')),
                })?;
            if *op == "=" {
                return Err(Error::Parse {
                    line: l0,
                    column: c0,
                    message: String::from("use `==` for equality"),
                });
            }
            i += op.len();
            out.push(Lexed {
                tok: Tok::Op(op),
                line: l0,
                column: c0,
            });
        }
        col += i - start;
    }
    out.push(Lexed {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        Error::Parse {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn eat(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Tok::Op(o) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: &str) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{op}`")))
        }
    }

    fn finish(&self) -> Result<()> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn pred(&mut self) -> Result<Pred> {
        let mut lhs = self.and()?;
        while self.eat("||") {
            let rhs = self.and()?;
            lhs = Pred::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Pred> {
        let mut lhs = self.not()?;
        while self.eat("&&") {
            let rhs = self.not()?;
            lhs = Pred::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Pred> {
        if self.eat("!") {
            return Ok(Pred::Not(Box::new(self.not()?)));
        }
        if let Tok::Ident(name) = self.peek() {
            let v = match name.as_str() {
                "true" => Some(true),
                "false" => Some(false),
                _ => None,
            };
            if let Some(v) = v {
                self.pos += 1;
                return Ok(Pred::Const(v));
            }
        }
        if matches!(self.peek(), Tok::Op("(")) {
            // Either a parenthesised predicate or an expression that starts
            // with a parenthesis; try the former and backtrack.
            let save = self.pos;
            self.pos += 1;
            if let Ok(p) = self.pred() {
                if self.eat(")") && !self.at_cmp_or_arith() {
                    return Ok(p);
                }
            }
            self.pos = save;
        }
        self.chain()
    }

    fn at_cmp_or_arith(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Op("<" | "<=" | ">" | ">=" | "==" | "+" | "-" | "*" | "/" | "^")
        )
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Op("<") => CmpOp::Lt,
            Tok::Op("<=") => CmpOp::Le,
            Tok::Op(">") => CmpOp::Gt,
            Tok::Op(">=") => CmpOp::Ge,
            Tok::Op("==") => CmpOp::Eq,
            _ => return None,
        };
        self.pos += 1;
        Some(op)
    }

    fn chain(&mut self) -> Result<Pred> {
        let mut lhs = self.expr()?;
        let Some(op) = self.cmp_op() else {
            return Err(self.error("expected a comparison operator"));
        };
        let mut rhs = self.expr()?;
        let mut pred = Pred::Cmp(op, lhs, rhs.clone());
        while let Some(op) = self.cmp_op() {
            lhs = rhs;
            rhs = self.expr()?;
            pred = Pred::And(Box::new(pred), Box::new(Pred::Cmp(op, lhs, rhs.clone())));
        }
        Ok(pred)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat("+") {
                BinOp::Add
            } else if self.eat("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat("*") {
                BinOp::Mul
            } else if self.eat("/") {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat("-") {
            return Ok(match self.unary()? {
                Expr::Num(v) => Expr::Num(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        if self.eat("+") {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat("^") {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Op("(") => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let var = match name.as_str() {
                    "x" | "x1" => Some(0),
                    "y" | "x2" => Some(1),
                    "z" | "x3" => Some(2),
                    _ => None,
                };
                if let Some(i) = var {
                    self.pos += 1;
                    return Ok(Expr::Var(i));
                }
                match name.as_str() {
                    "pi" => {
                        self.pos += 1;
                        return Ok(Expr::Num(core::f64::consts::PI));
                    }
                    "e" => {
                        self.pos += 1;
                        return Ok(Expr::Num(core::f64::consts::E));
                    }
                    _ => {}
                }
                let Some(f) = Func::lookup(&name) else {
                    return Err(self.error(format!("unknown identifier `{name}`")));
                };
                self.pos += 1;
                self.expect("(")?;
                let mut args = Vec::new();
                args.push(self.expr()?);
                while self.eat(",") {
                    args.push(self.expr()?);
                }
                if args.len() != f.arity() {
                    return Err(self.error(format!(
                        "`{name}` takes {} argument(s), got {}",
                        f.arity(),
                        args.len()
                    )));
                }
                self.expect(")")?;
                Ok(Expr::Call(f, args))
            }
            Tok::End => Err(self.error("unexpected end of input")),
            Tok::Op(op) => Err(self.error(format!("unexpected `{op}`"))),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_pred(text: &str) -> Result<Pred> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.pred()?;
    p.finish()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64]) -> f64 {
        parse_expr(s).unwrap().eval(x).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[]), 7.0);
        assert_eq!(ev("2^3^2", &[]), 512.0);
        assert_eq!(ev("-x^2", &[3.0]), -9.0);
        assert_eq!(ev("3.3*x*(1-x)", &[0.5]), 0.825);
        assert_eq!(ev("min(x, y) + max(x, y)", &[1.0, 4.0]), 5.0);
        assert_eq!(ev("2e-1*x2", &[0.0, 5.0]), 1.0);
    }

    #[test]
    fn undefined_values_are_errors() {
        let e = parse_expr("ln(x)").unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(Error::Eval { .. })));
        let d = parse_expr("1/x").unwrap();
        assert!(d.eval(&[0.0]).is_err());
        assert!(parse_expr("x^0.5").unwrap().eval(&[-1.0]).is_err());
        assert_eq!(parse_expr("x^2").unwrap().eval(&[-1.5]).unwrap(), 2.25);
    }

    #[test]
    fn predicates_and_chains() {
        let p = parse_pred("0.1 <= x <= 1").unwrap();
        assert!(p.holds(&[0.1]).unwrap());
        assert!(!p.holds(&[1.01]).unwrap());
        let q = parse_pred("(x < 0 || x > 1) && !(y == 2)").unwrap();
        assert!(q.holds(&[-1.0, 0.0]).unwrap());
        assert!(!q.holds(&[-1.0, 2.0]).unwrap());
        let r = parse_pred("(x + 1) * 2 < 3").unwrap();
        assert!(r.holds(&[0.0]).unwrap());
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_expr("1 +\n  * 2") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("foo(x)").is_err());
        assert!(parse_pred("x = 1").is_err());
        assert!(parse_expr("sin(x, y)").is_err());
    }

    #[test]
    fn interval_predicates_are_three_valued() {
        let p = parse_pred("x < 0").unwrap();
        assert_eq!(p.holds_interval(&[Interval::new(-2.0, -1.0)]), Some(true));
        assert_eq!(p.holds_interval(&[Interval::new(0.0, 1.0)]), Some(false));
        assert_eq!(p.holds_interval(&[Interval::new(-1.0, 1.0)]), None);
        let e = parse_expr("x^2 - x").unwrap();
        let v = e.eval_interval(&[Interval::new(0.0, 1.0)]);
        assert!(v.lo <= -0.25 && v.hi >= 0.0);
    }
}
