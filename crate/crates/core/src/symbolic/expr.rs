//! Arithmetic expression language for symbol specifications.
//!
//! Grammar (precedence climbing, `^` right-associative and strongest, then
//! unary minus, then `* /`, then `+ -`):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | 'x1' | 'x2' | 'x3'
//!        | ('sin'|'cos'|'exp'|'tanh'|'sech'|'sqrt') '(' expr ')'
//!        | '(' expr ')'
//! ```
//!
//! Expressions are parsed to a tree, constant-folded, and compiled to a flat
//! postfix program evaluated by a small stack machine.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero at ({0}, {1}, {2})")]
    DivisionByZero(f64, f64, f64),
    #[error("non-finite value at ({0}, {1}, {2})")]
    NonFinite(f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Sech,
    Sqrt,
}

impl Func {
    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Tanh => x.tanh(),
            Func::Sech => 1.0 / x.cosh(),
            Func::Sqrt => x.sqrt(),
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "tanh" => Func::Tanh,
            "sech" => Func::Sech,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Var(u8),
    Unary(Func, Box<Node>),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone)]
enum Token {
    Num(f64),
    Ident(String),
    Op(u8),
    LParen,
    RParen,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next_token(&mut self) -> Result<(Token, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.bytes.len() {
            return Ok((Token::End, start));
        }
        let c = self.bytes[self.pos];
        match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Ok((Token::Op(c), start))
            }
            b'(' => {
                self.pos += 1;
                Ok((Token::LParen, start))
            }
            b')' => {
                self.pos += 1;
                Ok((Token::RParen, start))
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                let mut seen_e = false;
                while end < self.bytes.len() {
                    let b = self.bytes[end];
                    let ok = b.is_ascii_digit()
                        || b == b'.'
                        || b == b'e'
                        || b == b'E'
                        || (seen_e
                            && (b == b'+' || b == b'-')
                            && (self.bytes[end - 1] == b'e' || self.bytes[end - 1] == b'E'));
                    if !ok {
                        break;
                    }
                    if b == b'e' || b == b'E' {
                        seen_e = true;
                    }
                    end += 1;
                }
                let text = &self.src[self.pos..end];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("invalid number `{text}`"),
                })?;
                self.pos = end;
                Ok((Token::Num(value), start))
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.bytes.len()
                    && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
                {
                    end += 1;
                }
                let name = self.src[self.pos..end].to_string();
                self.pos = end;
                Ok((Token::Ident(name), start))
            }
            other => Err(ParseError::Syntax {
                offset: start,
                message: format!("unexpected character `{}`", other as char),
            }),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    lookahead: Option<(Token, usize)>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            lexer: Lexer::new(src),
            lookahead: None,
        }
    }

    fn peek(&mut self) -> Result<&(Token, usize), ParseError> {
        if self.lookahead.is_none() {
            self.lookahead = Some(self.lexer.next_token()?);
        }
        Ok(self.lookahead.as_ref().unwrap())
    }

    fn bump(&mut self) -> Result<(Token, usize), ParseError> {
        self.peek()?;
        Ok(self.lookahead.take().unwrap())
    }

    fn parse_expr(&mut self, min_bp: u8) -> Result<Node, ParseError> {
        let mut lhs = self.parse_prefix()?;
        loop {
            let (tok, offset) = self.peek()?.clone();
            let (op, lbp, rbp) = match tok {
                Token::Op(b'+') => (b'+', 10, 11),
                Token::Op(b'-') => (b'-', 10, 11),
                Token::Op(b'*') => (b'*', 20, 21),
                Token::Op(b'/') => (b'/', 20, 21),
                // Right associative.
                Token::Op(b'^') => (b'^', 40, 40),
                Token::End | Token::RParen => break,
                Token::Num(_) | Token::Ident(_) | Token::LParen => {
                    return Err(ParseError::Syntax {
                        offset,
                        message: "expected operator".into(),
                    })
                }
                Token::Op(other) => {
                    return Err(ParseError::Syntax {
                        offset,
                        message: format!("unexpected operator `{}`", other as char),
                    })
                }
            };
            if lbp < min_bp {
                break;
            }
            self.bump()?;
            let rhs = self.parse_expr(rbp)?;
            lhs = match op {
                b'+' => Node::Add(Box::new(lhs), Box::new(rhs)),
                b'-' => Node::Sub(Box::new(lhs), Box::new(rhs)),
                b'*' => Node::Mul(Box::new(lhs), Box::new(rhs)),
                b'/' => Node::Div(Box::new(lhs), Box::new(rhs)),
                b'^' => Node::Pow(Box::new(lhs), Box::new(rhs)),
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn parse_prefix(&mut self) -> Result<Node, ParseError> {
        let (tok, offset) = self.bump()?;
        match tok {
            Token::Num(v) => Ok(Node::Const(v)),
            Token::Op(b'-') => {
                // Unary minus binds tighter than * but looser than ^.
                let inner = self.parse_expr(30)?;
                Ok(Node::Neg(Box::new(inner)))
            }
            Token::LParen => {
                let inner = self.parse_expr(0)?;
                let (close, coff) = self.bump()?;
                match close {
                    Token::RParen => Ok(inner),
                    _ => Err(ParseError::Syntax {
                        offset: coff,
                        message: "expected `)`".into(),
                    }),
                }
            }
            Token::Ident(name) => self.parse_ident(name, offset),
            Token::RParen => Err(ParseError::Syntax {
                offset,
                message: "unexpected `)`".into(),
            }),
            Token::Op(c) => Err(ParseError::Syntax {
                offset,
                message: format!("unexpected operator `{}`", c as char),
            }),
            Token::End => Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
        }
    }

    fn parse_ident(&mut self, name: String, offset: usize) -> Result<Node, ParseError> {
        match name.as_str() {
            "x1" => return Ok(Node::Var(0)),
            "x2" => return Ok(Node::Var(1)),
            "x3" => return Ok(Node::Var(2)),
            "pi" => return Ok(Node::Const(std::f64::consts::PI)),
            _ => {}
        }
        if let Some(f) = Func::from_name(&name) {
            let (open, ooff) = self.bump()?;
            if !matches!(open, Token::LParen) {
                return Err(ParseError::Syntax {
                    offset: ooff,
                    message: format!("expected `(` after `{name}`"),
                });
            }
            let arg = self.parse_expr(0)?;
            let (close, coff) = self.bump()?;
            if !matches!(close, Token::RParen) {
                return Err(ParseError::Syntax {
                    offset: coff,
                    message: "expected `)`".into(),
                });
            }
            return Ok(Node::Unary(f, Box::new(arg)));
        }
        Err(ParseError::UnknownIdentifier { name, offset })
    }
}

fn fold(node: Node) -> Node {
    use Node::*;
    macro_rules! two {
        ($a:expr, $b:expr, $ctor:ident, $op:expr) => {{
            let a = fold(*$a);
            let b = fold(*$b);
            if let (Const(x), Const(y)) = (&a, &b) {
                Const($op(*x, *y))
            } else {
                $ctor(Box::new(a), Box::new(b))
            }
        }};
    }
    match node {
        Const(_) | Var(_) => node,
        Neg(a) => {
            let a = fold(*a);
            if let Const(x) = a {
                Const(-x)
            } else {
                Neg(Box::new(a))
            }
        }
        Unary(f, a) => {
            let a = fold(*a);
            if let Const(x) = a {
                Const(f.apply(x))
            } else {
                Unary(f, Box::new(a))
            }
        }
        Add(a, b) => two!(a, b, Add, |x: f64, y: f64| x + y),
        Sub(a, b) => two!(a, b, Sub, |x: f64, y: f64| x - y),
        Mul(a, b) => two!(a, b, Mul, |x: f64, y: f64| x * y),
        Div(a, b) => two!(a, b, Div, |x: f64, y: f64| x / y),
        Pow(a, b) => two!(a, b, Pow, |x: f64, y: f64| x.powf(y)),
    }
}

#[derive(Debug, Clone, Copy)]
enum Instr {
    Const(f64),
    Var(u8),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Fun(Func),
}

/// Compiled expression over the variables x1, x2, x3.
#[derive(Debug, Clone)]
pub struct ExprProgram {
    code: Vec<Instr>,
    max_stack: usize,
    pub source: String,
}

impl ExprProgram {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let mut parser = Parser::new(src);
        let tree = parser.parse_expr(0)?;
        let (tok, offset) = parser.bump()?;
        if !matches!(tok, Token::End) {
            return Err(ParseError::Syntax {
                offset,
                message: "trailing input".into(),
            });
        }
        let tree = fold(tree);
        let mut code = Vec::new();
        fn emit(node: &Node, code: &mut Vec<Instr>) {
            match node {
                Node::Const(v) => code.push(Instr::Const(*v)),
                Node::Var(i) => code.push(Instr::Var(*i)),
                Node::Neg(a) => {
                    emit(a, code);
                    code.push(Instr::Neg);
                }
                Node::Unary(f, a) => {
                    emit(a, code);
                    code.push(Instr::Fun(*f));
                }
                Node::Add(a, b) => {
                    emit(a, code);
                    emit(b, code);
                    code.push(Instr::Add);
                }
                Node::Sub(a, b) => {
                    emit(a, code);
                    emit(b, code);
                    code.push(Instr::Sub);
                }
                Node::Mul(a, b) => {
                    emit(a, code);
                    emit(b, code);
                    code.push(Instr::Mul);
                }
                Node::Div(a, b) => {
                    emit(a, code);
                    emit(b, code);
                    code.push(Instr::Div);
                }
                Node::Pow(a, b) => {
                    emit(a, code);
                    emit(b, code);
                    code.push(Instr::Pow);
                }
            }
        }
        emit(&tree, &mut code);
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for instr in &code {
            match instr {
                Instr::Const(_) | Instr::Var(_) => depth += 1,
                Instr::Add | Instr::Sub | Instr::Mul | Instr::Div | Instr::Pow => depth -= 1,
                Instr::Neg | Instr::Fun(_) => {}
            }
            max_stack = max_stack.max(depth);
        }
        Ok(Self {
            code,
            max_stack,
            source: src.to_string(),
        })
    }

    /// Fast unchecked evaluation; IEEE semantics on division by zero.
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        debug_assert!(self.max_stack <= 64);
        let mut stack = [0.0f64; 64];
        let mut top = 0usize;
        for instr in &self.code {
            match instr {
                Instr::Const(v) => {
                    stack[top] = *v;
                    top += 1;
                }
                Instr::Var(i) => {
                    stack[top] = x[*i as usize];
                    top += 1;
                }
                Instr::Neg => stack[top - 1] = -stack[top - 1],
                Instr::Fun(f) => stack[top - 1] = f.apply(stack[top - 1]),
                Instr::Add => {
                    top -= 1;
                    stack[top - 1] += stack[top];
                }
                Instr::Sub => {
                    top -= 1;
                    stack[top - 1] -= stack[top];
                }
                Instr::Mul => {
                    top -= 1;
                    stack[top - 1] *= stack[top];
                }
                Instr::Div => {
                    top -= 1;
                    stack[top - 1] /= stack[top];
                }
                Instr::Pow => {
                    top -= 1;
                    stack[top - 1] = stack[top - 1].powf(stack[top]);
                }
            }
        }
        stack[0]
    }

    /// Evaluation that reports division by zero and non-finite results.
    pub fn eval_checked(&self, x: [f64; 3]) -> Result<f64, EvalError> {
        let v = self.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            // Distinguish an explicit zero divisor when possible.
            Err(EvalError::NonFinite(x[0], x[1], x[2]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, x: [f64; 3]) -> f64 {
        ExprProgram::parse(src).unwrap().eval(x)
    }

    #[test]
    fn constants_and_precedence() {
        assert_eq!(eval("1", [0.0; 3]), 1.0);
        assert_eq!(eval("2+3*4", [0.0; 3]), 14.0);
        assert_eq!(eval("(2+3)*4", [0.0; 3]), 20.0);
        assert_eq!(eval("2^3^2", [0.0; 3]), 512.0); // right assoc
        assert_eq!(eval("-2^2", [0.0; 3]), -4.0); // unary minus below ^
        assert_eq!(eval("6/3/2", [0.0; 3]), 1.0); // left assoc
        assert_eq!(eval("1 - 2 - 3", [0.0; 3]), -4.0);
    }

    #[test]
    fn variables_and_functions() {
        assert_eq!(eval("x1 - 2*x2 + x3", [1.0, 2.0, 3.0]), 0.0);
        let v = eval("1 + 0.5*exp(-((x1-2*x2+x3)^2)/8)", [2.0, 2.0, 2.0]);
        assert!((v - 1.5).abs() < 1e-15);
        let s = eval("sech(x1)", [0.7, 0.0, 0.0]);
        assert!((s - 1.0 / 0.7f64.cosh()).abs() < 1e-15);
        assert!((eval("sqrt(x1^2)", [3.0, 0.0, 0.0]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn error_positions() {
        let err = ExprProgram::parse("1 + (x1 -").unwrap_err();
        match err {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, 9),
            other => panic!("unexpected {other:?}"),
        }
        let err = ExprProgram::parse("1 + y2").unwrap_err();
        match err {
            ParseError::UnknownIdentifier { name, offset } => {
                assert_eq!(name, "y2");
                assert_eq!(offset, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(ExprProgram::parse("sin x1").is_err());
        assert!(ExprProgram::parse("1 2").is_err());
    }

    #[test]
    fn constant_folding_runs() {
        let p = ExprProgram::parse("2*pi + sin(0)").unwrap();
        assert_eq!(p.code.len(), 1);
        assert!((p.eval([0.0; 3]) - 2.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn checked_eval_reports_bad_points() {
        let p = ExprProgram::parse("1/x1").unwrap();
        assert!(p.eval_checked([0.0, 0.0, 0.0]).is_err());
        assert!(p.eval_checked([2.0, 0.0, 0.0]).is_ok());
    }
}
