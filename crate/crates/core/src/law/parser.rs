//! Recursive-descent parser for the law DSL.
//!
//! Precedence, loosest first: `->` (right assoc), `|`, `&`, `U` (right
//! assoc), then the prefix operators `!`, `G`, `F`, `X`. The grammar is
//! written out in `docs/law-grammar.md`.

use std::collections::BTreeMap;

use super::formula::{AtomRef, Formula, NumExpr};
use crate::error::{Error, Result};

/// What the parser needs to know about the grounding layer.
pub trait Signatures {
    /// Number of arguments the named predicate takes, or `None` if unknown.
    fn arity(&self, name: &str) -> Option<usize>;
    /// Whether `name` is a per-step context variable (e.g. `dv`).
    fn is_context_var(&self, name: &str) -> bool;
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    Comma,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Plus,
    Minus,
    Star,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str, line0: usize, col0: usize) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (line0, col0);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: tl, col: tc });
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            ',' => push(&mut out, Tok::Comma),
            '!' => push(&mut out, Tok::Bang),
            '&' => push(&mut out, Tok::Amp),
            '|' => push(&mut out, Tok::Pipe),
            '+' => push(&mut out, Tok::Plus),
            '*' => push(&mut out, Tok::Star),
            '-' if chars.get(i + 1) == Some(&'>') => {
                push(&mut out, Tok::Arrow);
                i += 2;
                col += 2;
                continue;
            }
            '-' => push(&mut out, Tok::Minus),
            c if c.is_ascii_digit() || c == '.' => {
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
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("malformed number `{text}`"),
                })?;
                push(&mut out, Tok::Num(v));
                col += i - start;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
                col += i - start;
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    sigs: &'a dyn Signatures,
    constants: &'a BTreeMap<String, f64>,
}

const KEYWORDS: [&str; 4] = ["G", "F", "X", "U"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Syntax { line, col, msg: msg.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula> {
        let lhs = self.unary()?;
        if self.is_keyword("U") {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        for (kw, ctor) in [
            ("G", Formula::always as fn(Formula) -> Formula),
            ("F", Formula::eventually),
            ("X", Formula::next),
        ] {
            if self.is_keyword(kw) {
                self.bump();
                return Ok(ctor(self.unary()?));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        let (line, col) = self.here();
        match self.bump() {
            Tok::LParen => {
                let f = self.implication()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let mut args = Vec::new();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    if *self.peek() != Tok::RParen {
                        args.push(self.num_expr()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.num_expr()?);
                        }
                    }
                    self.expect(Tok::RParen, "`)` after atom arguments")?;
                }
                let expected = self
                    .sigs
                    .arity(&name)
                    .ok_or_else(|| Error::UnknownAtom { name: name.clone(), line, col })?;
                if expected != args.len() {
                    return Err(Error::Arity { name, expected, found: args.len(), line, col });
                }
                Ok(Formula::Atom(AtomRef::with_args(name, args)))
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected a formula, found {}", describe(&other)))
            }
        }
    }

    fn num_expr(&mut self) -> Result<NumExpr> {
        let mut lhs = self.num_term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = NumExpr::Add(Box::new(lhs), Box::new(self.num_term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = NumExpr::Sub(Box::new(lhs), Box::new(self.num_term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn num_term(&mut self) -> Result<NumExpr> {
        let mut lhs = self.num_factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = NumExpr::Mul(Box::new(lhs), Box::new(self.num_factor()?));
        }
        Ok(lhs)
    }

    fn num_factor(&mut self) -> Result<NumExpr> {
        match self.bump() {
            Tok::Num(v) => Ok(NumExpr::Const(v)),
            Tok::Minus => {
                if let Tok::Num(v) = *self.peek() {
                    self.bump();
                    Ok(NumExpr::Const(-v))
                } else {
                    Ok(NumExpr::Neg(Box::new(self.num_factor()?)))
                }
            }
            Tok::LParen => {
                let e = self.num_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "max" => {
                self.expect(Tok::LParen, "`(` after max")?;
                let a = self.num_expr()?;
                self.expect(Tok::Comma, "`,` in max")?;
                let b = self.num_expr()?;
                self.expect(Tok::RParen, "`)` after max arguments")?;
                Ok(NumExpr::Max(Box::new(a), Box::new(b)))
            }
            Tok::Ident(name) => {
                if self.constants.contains_key(&name) || self.sigs.is_context_var(&name) {
                    Ok(NumExpr::Var(name))
                } else {
                    Err(Error::UnboundConstant(name))
                }
            }
            other => {
                self.pos = self.pos.saturating_sub(1);
                self.err(format!("expected a number, found {}", describe(&other)))
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(v) => format!("`{v}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Bang => "`!`".into(),
        Tok::Amp => "`&`".into(),
        Tok::Pipe => "`|`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a formula. Identifiers inside atom arguments must be one of
/// `constants` or a context variable known to `sigs`.
pub fn parse_formula(
    src: &str,
    sigs: &dyn Signatures,
    constants: &BTreeMap<String, f64>,
) -> Result<Formula> {
    parse_formula_at(src, 1, 1, sigs, constants)
}

pub(crate) fn parse_formula_at(
    src: &str,
    line: usize,
    col: usize,
    sigs: &dyn Signatures,
    constants: &BTreeMap<String, f64>,
) -> Result<Formula> {
    let toks = lex(src, line, col)?;
    let mut p = Parser { toks, pos: 0, sigs, constants };
    let f = p.implication()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after formula", describe(p.peek())));
    }
    Ok(f)
}
