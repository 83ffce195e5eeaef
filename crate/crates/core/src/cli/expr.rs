//! Small arithmetic expression grammar for coefficient functions in
//! experiment configs: {+, -, *, /, ^, sin, cos, exp, sqrt, numeric
//! constants, pi, u, u1..un, x, t}. No user code execution.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    T,
    /// Solution component, zero-based; plain `u` is component 0.
    U(usize),
    Call(Func, Box<Expr>),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
}

/// Which variables an expression reads; used to validate that e.g. initial
/// data depends on x only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VarUse {
    pub x: bool,
    pub t: bool,
    /// Highest component index referenced, if any.
    pub u_max: Option<usize>,
}

impl Expr {
    pub fn eval(&self, u: &[f64], x: f64, t: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::T => t,
            Expr::U(i) => u[*i],
            Expr::Call(f, a) => {
                let v = a.eval(u, x, t);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => v.sqrt(),
                }
            }
            Expr::Neg(a) => -a.eval(u, x, t),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(u, x, t), b.eval(u, x, t));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
        }
    }

    pub fn uses(&self) -> VarUse {
        fn walk(e: &Expr, acc: &mut VarUse) {
            match e {
                Expr::Num(_) => {}
                Expr::X => acc.x = true,
                Expr::T => acc.t = true,
                Expr::U(i) => acc.u_max = Some(acc.u_max.map_or(*i, |m| m.max(*i))),
                Expr::Call(_, a) | Expr::Neg(a) => walk(a, acc),
                Expr::Bin(_, a, b) => {
                    walk(a, acc);
                    walk(b, acc);
                }
            }
        }
        let mut acc = VarUse::default();
        walk(self, &mut acc);
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ExprError {
                pos: start,
                msg: format!("bad number literal '{text}'"),
            })?;
            out.push((start, Token::Num(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            out.push((start, Token::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Token::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError {
                pos: i,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ExprError> {
        match self.bump() {
            Some(Token::Sym(s)) if s == c => Ok(()),
            _ => Err(ExprError {
                pos: self.here(),
                msg: format!("expected '{c}'"),
            }),
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        while let Some(Token::Sym(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { Op::Add } else { Op::Sub };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Token::Sym(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { Op::Mul } else { Op::Div };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if let Some(Token::Sym('-')) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if let Some(Token::Sym('+')) = self.peek() {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if let Some(Token::Sym('^')) = self.peek() {
            self.bump();
            // right-associative, and -x^2 parses as -(x^2) via unary
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.here();
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::Sym('(')) => {
                let e = self.sum()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::X),
                "t" => Ok(Expr::T),
                "u" => Ok(Expr::U(0)),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "sin" | "cos" | "exp" | "sqrt" => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        _ => Func::Sqrt,
                    };
                    self.expect_sym('(')?;
                    let arg = self.sum()?;
                    self.expect_sym(')')?;
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                _ => {
                    if let Some(rest) = name.strip_prefix('u') {
                        if let Ok(k) = rest.parse::<usize>() {
                            if k >= 1 {
                                return Ok(Expr::U(k - 1));
                            }
                        }
                    }
                    Err(ExprError {
                        pos,
                        msg: format!("unknown identifier '{name}'"),
                    })
                }
            },
            _ => Err(ExprError {
                pos,
                msg: "expected a number, variable, function or '('".into(),
            }),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: src.len(),
    };
    let e = p.sum()?;
    if p.peek().is_some() {
        return Err(ExprError {
            pos: p.here(),
            msg: "trailing input after expression".into(),
        });
    }
    Ok(e)
}

/// Validates that `expr` only reads the allowed variables.
pub fn check_vars(
    expr: &Expr,
    allow_x: bool,
    allow_t: bool,
    n_comp: usize,
    what: &str,
) -> Result<(), ExprError> {
    let uses = expr.uses();
    if uses.x && !allow_x {
        return Err(ExprError {
            pos: 0,
            msg: format!("{what} must not depend on x"),
        });
    }
    if uses.t && !allow_t {
        return Err(ExprError {
            pos: 0,
            msg: format!("{what} must not depend on t"),
        });
    }
    if let Some(m) = uses.u_max {
        if n_comp == 0 {
            return Err(ExprError {
                pos: 0,
                msg: format!("{what} must not depend on the solution"),
            });
        }
        if m >= n_comp {
            return Err(ExprError {
                pos: 0,
                msg: format!("{what} references component u{} beyond n_comp={n_comp}", m + 1),
            });
        }
    }
    Ok(())
}
