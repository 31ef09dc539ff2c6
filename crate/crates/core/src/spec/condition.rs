//! Condition expressions for application periods.
//!
//! Grammar (`&&` binds tighter than `||`, both left-associative):
//!
//! ```text
//! expr     := and ( "||" and )*
//! and      := unary ( "&&" unary )*
//! unary    := "once" "(" expr ")" | "flag" "(" IDENT ")" | "(" expr ")" | compare
//! compare  := IDENT OP operand ( "~" NUMBER )?       -- "~" only after "=="
//! operand  := NUMBER | IDENT
//! OP       := "<" | "<=" | "==" | ">=" | ">"         -- also "≤" and "≥"
//! ```
//!
//! Example: `flag(acc_active) && once(v_ego == v_set ~ 0.1)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Nesting limit for parentheses and `once(...)`; keeps parsing of
/// adversarial input within a bounded stack.
pub const MAX_NESTING: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Less,
    LessEqual,
    Equal,
    GreaterEqual,
    Greater,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Less => "<",
            CompareOp::LessEqual => "<=",
            CompareOp::Equal => "==",
            CompareOp::GreaterEqual => ">=",
            CompareOp::Greater => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Number(f64),
    Signal(String),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Number(v) => write!(f, "{v}"),
            Operand::Signal(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConditionExpr {
    /// True when the named boolean signal is set.
    Flag(String),
    Compare {
        signal: String,
        op: CompareOp,
        rhs: Operand,
        tolerance: Option<f64>,
    },
    And(Box<ConditionExpr>, Box<ConditionExpr>),
    Or(Box<ConditionExpr>, Box<ConditionExpr>),
    /// Latches: true from the first sample where the child holds.
    Once(Box<ConditionExpr>),
}

impl ConditionExpr {
    pub fn flag(name: &str) -> Self {
        ConditionExpr::Flag(name.to_owned())
    }

    pub fn compare(signal: &str, op: CompareOp, rhs: Operand, tolerance: Option<f64>) -> Self {
        ConditionExpr::Compare {
            signal: signal.to_owned(),
            op,
            rhs,
            tolerance,
        }
    }

    pub fn and(self, other: ConditionExpr) -> Self {
        ConditionExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: ConditionExpr) -> Self {
        ConditionExpr::Or(Box::new(self), Box::new(other))
    }

    pub fn once(self) -> Self {
        ConditionExpr::Once(Box::new(self))
    }

    /// Every signal or flag name the expression reads.
    pub fn signals(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_signals(&mut out);
        out
    }

    fn collect_signals<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ConditionExpr::Flag(n) => {
                out.insert(n);
            }
            ConditionExpr::Compare { signal, rhs, .. } => {
                out.insert(signal);
                if let Operand::Signal(s) = rhs {
                    out.insert(s);
                }
            }
            ConditionExpr::And(a, b) | ConditionExpr::Or(a, b) => {
                a.collect_signals(out);
                b.collect_signals(out);
            }
            ConditionExpr::Once(c) => c.collect_signals(out),
        }
    }

    /// `==` comparisons written without a `~ tolerance`.
    pub fn bare_equalities(&self) -> Vec<&ConditionExpr> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let ConditionExpr::Compare {
                op: CompareOp::Equal,
                tolerance: None,
                ..
            } = e
            {
                out.push(e);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a ConditionExpr)) {
        f(self);
        match self {
            ConditionExpr::And(a, b) | ConditionExpr::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            ConditionExpr::Once(c) => c.visit(f),
            ConditionExpr::Flag(_) | ConditionExpr::Compare { .. } => {}
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

impl fmt::Display for ConditionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(f: &mut fmt::Formatter<'_>, e: &ConditionExpr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            ConditionExpr::Flag(n) => write!(f, "flag({n})"),
            ConditionExpr::Compare {
                signal,
                op,
                rhs,
                tolerance,
            } => {
                write!(f, "{signal} {} {rhs}", op.symbol())?;
                if let Some(t) = tolerance {
                    write!(f, " ~ {t}")?;
                }
                Ok(())
            }
            ConditionExpr::And(a, b) => {
                wrapped(f, a, matches!(**a, ConditionExpr::Or(..)))?;
                f.write_str(" && ")?;
                wrapped(f, b, matches!(**b, ConditionExpr::Or(..) | ConditionExpr::And(..)))
            }
            ConditionExpr::Or(a, b) => {
                wrapped(f, a, false)?;
                f.write_str(" || ")?;
                wrapped(f, b, matches!(**b, ConditionExpr::Or(..)))
            }
            ConditionExpr::Once(c) => write!(f, "once({c})"),
        }
    }
}

impl Serialize for ConditionExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConditionExpr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_condition(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {position}: expected {}, found {found}", expected.join(" | "))]
pub struct SyntaxError {
    pub position: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    AndAnd,
    OrOr,
    Tilde,
    Op(CompareOp),
    Eof,
    Invalid(char),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Number(v) => format!("number `{v}`"),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::AndAnd => "`&&`".into(),
            Token::OrOr => "`||`".into(),
            Token::Tilde => "`~`".into(),
            Token::Op(op) => format!("`{}`", op.symbol()),
            Token::Eof => "end of input".into(),
            Token::Invalid(c) => format!("character {c:?}"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    /// Returns (start offset, token) and advances.
    fn next(&mut self) -> (usize, Token) {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let Some(c) = rest.chars().next() else {
            return (start, Token::Eof);
        };
        let two = rest.get(..2);
        let (len, tok) = match (c, two) {
            (_, Some("&&")) => (2, Token::AndAnd),
            (_, Some("||")) => (2, Token::OrOr),
            (_, Some("<=")) => (2, Token::Op(CompareOp::LessEqual)),
            (_, Some(">=")) => (2, Token::Op(CompareOp::GreaterEqual)),
            (_, Some("==")) => (2, Token::Op(CompareOp::Equal)),
            ('<', _) => (1, Token::Op(CompareOp::Less)),
            ('>', _) => (1, Token::Op(CompareOp::Greater)),
            ('≤', _) => ('≤'.len_utf8(), Token::Op(CompareOp::LessEqual)),
            ('≥', _) => ('≥'.len_utf8(), Token::Op(CompareOp::GreaterEqual)),
            ('(', _) => (1, Token::LParen),
            (')', _) => (1, Token::RParen),
            ('~', _) => (1, Token::Tilde),
            (c, _) if c.is_ascii_alphabetic() || c == '_' => {
                let len = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '.'))
                    .unwrap_or(rest.len());
                (len, Token::Ident(rest[..len].to_owned()))
            }
            (c, _) if c.is_ascii_digit() || c == '-' || c == '.' => match scan_number(rest) {
                Some((len, v)) => (len, Token::Number(v)),
                None => (c.len_utf8(), Token::Invalid(c)),
            },
            (c, _) => (c.len_utf8(), Token::Invalid(c)),
        };
        self.pos += len;
        (start, tok)
    }
}

/// `-?digits(.digits)?([eE][+-]?digits)?` or `-?.digits...`; at least one digit.
fn scan_number(s: &str) -> Option<(usize, f64)> {
    let b = s.as_bytes();
    let mut i = 0;
    if b.first() == Some(&b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            i = j;
        }
    }
    let v: f64 = s[..i].parse().ok()?;
    v.is_finite().then_some((i, v))
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(usize, Token)>,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> &(usize, Token) {
        if self.peeked.is_none() {
            self.peeked = Some(self.lexer.next());
        }
        self.peeked.as_ref().expect("peeked token")
    }

    fn bump(&mut self) -> (usize, Token) {
        self.peek();
        self.peeked.take().expect("peeked token")
    }

    /// Looks one token past the peeked one without consuming anything.
    fn second_is_lparen(&mut self) -> bool {
        self.peek();
        let mut probe = Lexer {
            src: self.lexer.src,
            pos: self.lexer.pos,
        };
        matches!(probe.next().1, Token::LParen)
    }

    fn error(&mut self, expected: &[&'static str]) -> SyntaxError {
        let (position, tok) = self.peek().clone();
        SyntaxError {
            position,
            expected: expected.to_vec(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, want: Token, label: &'static str) -> Result<(), SyntaxError> {
        if self.peek().1 == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[label]))
        }
    }

    fn descend(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            let position = self.peek().0;
            return Err(SyntaxError {
                position,
                expected: vec!["shallower nesting"],
                found: format!("nesting deeper than {MAX_NESTING}"),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<ConditionExpr, SyntaxError> {
        let mut lhs = self.and()?;
        while self.peek().1 == Token::OrOr {
            self.bump();
            let rhs = self.and()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<ConditionExpr, SyntaxError> {
        let mut lhs = self.unary()?;
        while self.peek().1 == Token::AndAnd {
            self.bump();
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ConditionExpr, SyntaxError> {
        const START: &[&str] = &["`flag(`", "`once(`", "`(`", "identifier"];
        match self.peek().1.clone() {
            Token::LParen => {
                self.bump();
                self.descend()?;
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                self.depth -= 1;
                Ok(inner)
            }
            Token::Ident(name) if name == "once" && self.second_is_lparen() => {
                self.bump();
                self.bump();
                self.descend()?;
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                self.depth -= 1;
                Ok(inner.once())
            }
            Token::Ident(name) if name == "flag" && self.second_is_lparen() => {
                self.bump();
                self.bump();
                let flag = match self.peek().1.clone() {
                    Token::Ident(f) => {
                        self.bump();
                        f
                    }
                    _ => return Err(self.error(&["identifier"])),
                };
                self.expect(Token::RParen, "`)`")?;
                Ok(ConditionExpr::Flag(flag))
            }
            Token::Ident(signal) => {
                self.bump();
                self.compare(signal)
            }
            _ => Err(self.error(START)),
        }
    }

    fn compare(&mut self, signal: String) -> Result<ConditionExpr, SyntaxError> {
        let op = match self.peek().1 {
            Token::Op(op) => {
                self.bump();
                op
            }
            _ => return Err(self.error(&["`<`", "`<=`", "`==`", "`>=`", "`>`"])),
        };
        let rhs = match self.peek().1.clone() {
            Token::Number(v) => {
                self.bump();
                Operand::Number(v)
            }
            Token::Ident(s) => {
                self.bump();
                Operand::Signal(s)
            }
            _ => return Err(self.error(&["number", "identifier"])),
        };
        let mut tolerance = None;
        if self.peek().1 == Token::Tilde {
            if op != CompareOp::Equal {
                return Err(self.error(&["`&&`", "`||`", "`)`", "end of input"]));
            }
            self.bump();
            match self.peek().1 {
                Token::Number(t) if t >= 0.0 => {
                    self.bump();
                    tolerance = Some(t);
                }
                _ => return Err(self.error(&["non-negative number"])),
            }
        }
        Ok(ConditionExpr::Compare {
            signal,
            op,
            rhs,
            tolerance,
        })
    }
}

/// Parses a condition expression. Never panics; any input yields either an
/// AST or a [`SyntaxError`].
pub fn parse_condition(text: &str) -> Result<ConditionExpr, SyntaxError> {
    let mut p = Parser {
        lexer: Lexer { src: text, pos: 0 },
        peeked: None,
        depth: 0,
    };
    let expr = p.expr()?;
    if p.peek().1 != Token::Eof {
        return Err(p.error(&["`&&`", "`||`", "end of input"]));
    }
    Ok(expr)
}
