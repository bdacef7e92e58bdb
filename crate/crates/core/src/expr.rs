//! Small arithmetic language for utilities over embedding coordinates.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | postfix
//! postfix := primary ('[' INT ']')*
//! primary := NUMBER | 'pi' | PLAYER | FUNC '(' expr ')' | '(' expr ')'
//!          | '[' expr (',' expr)* ']'
//! FUNC    := norm | abs | sin | cos
//! ```
//!
//! A player name evaluates to that player's embedding vector. Vectors of
//! equal length add and subtract, scale by scalars, and index from zero.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{message} at column {column}")]
pub struct ExprError {
    pub message: String,
    pub column: usize,
}

fn err<T>(message: impl Into<String>, column: usize) -> Result<T, ExprError> {
    Err(ExprError {
        message: message.into(),
        column,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident(usize, usize), // byte range start, end
    Op(char),
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Norm,
    Abs,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Player(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Index(Box<Node>, usize),
    Vector(Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector(usize),
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Scalar => write!(f, "scalar"),
            Shape::Vector(n) => write!(f, "vector of length {n}"),
        }
    }
}

/// A parsed utility expression. Player references are resolved to indices
/// into the game's player list.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

struct Parser<'a> {
    src: &'a str,
    players: &'a [String],
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
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
            match src[start..i].parse::<f64>() {
                Ok(v) => out.push((Tok::Num(v), col)),
                Err(_) => return err(format!("malformed number '{}'", &src[start..i]), col),
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(start, i), col));
        } else if "+-*/()[],".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return err(format!("unexpected character '{c}'"), col);
        }
    }
    out.push((Tok::End, src.len() + 1));
    Ok(out)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Tok {
        self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos];
        if t.0 != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        match self.bump() {
            (Tok::Op(o), _) if o == c => Ok(()),
            (_, col) => err(format!("expected '{c}'"), col),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Node, ExprError> {
        let mut node = self.primary()?;
        while self.peek() == Tok::Op('[') {
            self.bump();
            let (tok, col) = self.bump();
            let idx = match tok {
                Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 => v as usize,
                _ => return err("expected a nonnegative integer index", col),
            };
            self.expect(']')?;
            node = Node::Index(Box::new(node), idx);
        }
        Ok(node)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let (tok, col) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Op('[') => {
                let mut items = vec![self.expr()?];
                while self.peek() == Tok::Op(',') {
                    self.bump();
                    items.push(self.expr()?);
                }
                self.expect(']')?;
                Ok(Node::Vector(items))
            }
            Tok::Ident(a, b) => {
                let name = &self.src[a..b];
                let func = match name {
                    "norm" => Some(Func::Norm),
                    "abs" => Some(Func::Abs),
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    _ => None,
                };
                if let Some(f) = func {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                if let Some(p) = self.players.iter().position(|p| p == name) {
                    return Ok(Node::Player(p));
                }
                if name == "pi" {
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                err(format!("unknown identifier '{name}'"), col)
            }
            Tok::Op(c) => err(format!("unexpected '{c}'"), col),
            Tok::End => err("unexpected end of expression", col),
        }
    }
}

impl Expr {
    pub fn parse(source: &str, players: &[String]) -> Result<Expr, ExprError> {
        let mut p = Parser {
            src: source,
            players,
            toks: tokenize(source)?,
            pos: 0,
        };
        let root = p.expr()?;
        if p.peek() != Tok::End {
            return err("trailing input", p.col());
        }
        Ok(Expr {
            source: source.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Players referenced anywhere in the expression.
    pub fn players(&self) -> Vec<usize> {
        fn walk(n: &Node, out: &mut Vec<usize>) {
            match n {
                Node::Player(p) => out.push(*p),
                Node::Neg(a) | Node::Call(_, a) | Node::Index(a, _) => walk(a, out),
                Node::Bin(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::Vector(v) => v.iter().for_each(|x| walk(x, out)),
                Node::Num(_) => {}
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Static shape of the expression given each player's embedding dimension.
    pub fn shape(&self, dims: &[usize]) -> Result<Shape, String> {
        shape(&self.root, dims)
    }

    pub fn eval(&self, coords: &[&[f64]]) -> f64 {
        match eval(&self.root, coords) {
            Value::Scalar(v) => v,
            Value::Vector(_) => f64::NAN,
        }
    }
}

fn shape(n: &Node, dims: &[usize]) -> Result<Shape, String> {
    use Shape::*;
    Ok(match n {
        Node::Num(_) => Scalar,
        Node::Player(p) => Vector(dims[*p]),
        Node::Neg(a) => shape(a, dims)?,
        Node::Bin(op, a, b) => match (op, shape(a, dims)?, shape(b, dims)?) {
            (_, Scalar, Scalar) => Scalar,
            (BinOp::Add | BinOp::Sub, Vector(x), Vector(y)) if x == y => Vector(x),
            (BinOp::Mul, Scalar, Vector(x)) | (BinOp::Mul | BinOp::Div, Vector(x), Scalar) => {
                Vector(x)
            }
            (op, x, y) => return Err(format!("cannot apply {op:?} to {x} and {y}")),
        },
        Node::Call(f, a) => match (f, shape(a, dims)?) {
            (Func::Norm, _) => Scalar,
            (_, Scalar) => Scalar,
            (f, s) => return Err(format!("{f:?} expects a scalar, got {s}")),
        },
        Node::Index(a, i) => match shape(a, dims)? {
            Vector(n) if *i < n => Scalar,
            s => return Err(format!("index {i} out of range for {s}")),
        },
        Node::Vector(items) => {
            for it in items {
                if shape(it, dims)? != Scalar {
                    return Err("vector literal entries must be scalars".into());
                }
            }
            Vector(items.len())
        }
    })
}

enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

fn eval(n: &Node, coords: &[&[f64]]) -> Value {
    use Value::*;
    match n {
        Node::Num(v) => Scalar(*v),
        Node::Player(p) => Vector(coords[*p].to_vec()),
        Node::Neg(a) => match eval(a, coords) {
            Scalar(v) => Scalar(-v),
            Vector(v) => Vector(v.into_iter().map(|x| -x).collect()),
        },
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, coords), eval(b, coords));
            let f = |x: f64, y: f64| match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
            };
            match (a, b) {
                (Scalar(x), Scalar(y)) => Scalar(f(x, y)),
                (Vector(x), Vector(y)) => Vector(x.iter().zip(&y).map(|(a, b)| f(*a, *b)).collect()),
                (Scalar(s), Vector(v)) => Vector(v.iter().map(|x| f(s, *x)).collect()),
                (Vector(v), Scalar(s)) => Vector(v.iter().map(|x| f(*x, s)).collect()),
            }
        }
        Node::Call(func, a) => {
            let v = eval(a, coords);
            Scalar(match (func, v) {
                (Func::Norm, Vector(v)) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
                (Func::Norm | Func::Abs, Scalar(x)) => x.abs(),
                (Func::Sin, Scalar(x)) => x.sin(),
                (Func::Cos, Scalar(x)) => x.cos(),
                _ => f64::NAN,
            })
        }
        Node::Index(a, i) => match eval(a, coords) {
            Vector(v) => Scalar(v[*i]),
            Scalar(_) => Scalar(f64::NAN),
        },
        Node::Vector(items) => Vector(
            items
                .iter()
                .map(|it| match eval(it, coords) {
                    Scalar(x) => x,
                    Vector(_) => f64::NAN,
                })
                .collect(),
        ),
    }
}
