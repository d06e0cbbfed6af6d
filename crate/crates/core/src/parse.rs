//! Recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! formula := quant | disj
//! quant   := ("call" | "cex") VAR ":" formula
//! disj    := conj { "\/" conj }  |  conj { "cor" conj }
//! conj    := unit { "/\" unit }  |  unit { "cand" unit }
//! unit    := "T" | "F" | ["~"] atom | "(" formula ")" | quant
//! atom    := LETTER [ "(" term { "," term } ")" ]
//! term    := VAR | NAT
//! ```
//!
//! The UTF-8 symbols `⊓ ⊔ ∧ ∨ ¬ ⊤ ⊥` are accepted as aliases; `⊓x:` and
//! `⊔x:` are aliases for `call x:` and `cex x:`.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::formula::{is_letter_name, is_var_name, Formula, FormulaError, Letter, Term};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] FormulaError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Or,
    And,
    Cor,
    Cand,
    Not,
    Top,
    Bot,
    LParen,
    RParen,
    Comma,
    Colon,
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        position,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        let single = match c {
            c if c.is_whitespace() => {
                it.next();
                continue;
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            '~' | '¬' => Some(Tok::Not),
            '∨' => Some(Tok::Or),
            '∧' => Some(Tok::And),
            '⊔' => Some(Tok::Cor),
            '⊓' => Some(Tok::Cand),
            '⊤' => Some(Tok::Top),
            '⊥' => Some(Tok::Bot),
            _ => None,
        };
        if let Some(tok) = single {
            it.next();
            out.push((tok, pos));
            continue;
        }
        match c {
            '\\' | '/' => {
                it.next();
                let tok = match (c, it.next()) {
                    ('\\', Some((_, '/'))) => Tok::Or,
                    ('/', Some((_, '\\'))) => Tok::And,
                    _ => return Err(syntax(pos, "expected `\\/` or `/\\`")),
                };
                out.push((tok, pos));
            }
            c if c.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(&(_, d)) = it.peek() {
                    let Some(v) = d.to_digit(10) else { break };
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(u64::from(v)))
                        .ok_or_else(|| syntax(pos, "constant out of range"))?;
                    it.next();
                }
                out.push((Tok::Nat(n), pos));
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((
                    match s.as_str() {
                        "cor" => Tok::Cor,
                        "cand" => Tok::Cand,
                        _ => Tok::Ident(s),
                    },
                    pos,
                ));
            }
            other => return Err(syntax(pos, alloc::format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            Err(syntax(self.pos(), alloc::format!("expected {what}")))
        }
    }

    fn at_quantifier(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(k)) => k == "call" || k == "cex",
            Some(Tok::Cand | Tok::Cor) => {
                matches!(self.peek_at(1), Some(Tok::Ident(v)) if is_var_name(v))
                    && self.peek_at(2) == Some(&Tok::Colon)
            }
            _ => false,
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if self.at_quantifier() {
            self.quantifier()
        } else {
            self.disj()
        }
    }

    fn quantifier(&mut self) -> Result<Formula, ParseError> {
        let universal = match self.bump() {
            Some(Tok::Cand) => true,
            Some(Tok::Ident(k)) => k == "call",
            _ => false,
        };
        let pos = self.pos();
        let var = match self.bump() {
            Some(Tok::Ident(v)) if is_var_name(&v) => v,
            _ => return Err(syntax(pos, "expected a variable after quantifier")),
        };
        self.expect(Tok::Colon, "`:` after quantified variable")?;
        let body = Box::new(self.formula()?);
        Ok(if universal {
            Formula::ChoAll(var, body)
        } else {
            Formula::ChoEx(var, body)
        })
    }

    /// Parses `sub { op sub }` where every `op` must be one of `ops` and all
    /// must agree.
    fn chain(
        &mut self,
        ops: [Tok; 2],
        sub: fn(&mut Self) -> Result<Formula, ParseError>,
    ) -> Result<Formula, ParseError> {
        let first = sub(self)?;
        let Some(op) = self.peek().filter(|t| ops.contains(t)).cloned() else {
            return Ok(first);
        };
        let mut operands = alloc::vec![first];
        while let Some(t) = self.peek().filter(|t| ops.contains(t)) {
            if *t != op {
                return Err(syntax(
                    self.pos(),
                    "parallel and choice operators mixed without parentheses",
                ));
            }
            self.at += 1;
            operands.push(sub(self)?);
        }
        Ok(match op {
            Tok::Or => Formula::ParOr(operands),
            Tok::Cor => Formula::ChoOr(operands),
            Tok::And => Formula::ParAnd(operands),
            _ => Formula::ChoAnd(operands),
        })
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        self.chain([Tok::Or, Tok::Cor], Self::conj)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        self.chain([Tok::And, Tok::Cand], Self::unit)
    }

    fn unit(&mut self) -> Result<Formula, ParseError> {
        if self.at_quantifier() {
            return self.quantifier();
        }
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Top) => {
                self.at += 1;
                Ok(Formula::Top)
            }
            Some(Tok::Bot) => {
                self.at += 1;
                Ok(Formula::Bot)
            }
            Some(Tok::Ident(s)) if (s == "T" || s == "F") && self.peek_at(1) != Some(&Tok::LParen) => {
                let top = s == "T";
                self.at += 1;
                Ok(if top { Formula::Top } else { Formula::Bot })
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Not) => {
                self.at += 1;
                match self.peek() {
                    Some(Tok::Ident(s)) if is_letter_name(s) && !self.is_logical_constant() => {
                        self.atom(true)
                    }
                    _ => Err(syntax(
                        self.pos(),
                        "negation applies only to non-logical atoms",
                    )),
                }
            }
            Some(Tok::Ident(_)) => self.atom(false),
            Some(_) => Err(syntax(pos, "expected a formula")),
            None => Err(syntax(pos, "unexpected end of input")),
        }
    }

    fn is_logical_constant(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if (s == "T" || s == "F"))
            && self.peek_at(1) != Some(&Tok::LParen)
    }

    fn atom(&mut self, negated: bool) -> Result<Formula, ParseError> {
        let pos = self.pos();
        let name = match self.bump() {
            Some(Tok::Ident(n)) if is_letter_name(&n) => n,
            Some(Tok::Ident(n)) if is_var_name(&n) => {
                return Err(syntax(pos, alloc::format!("variable `{n}` used as a letter")))
            }
            _ => return Err(syntax(pos, "expected a letter")),
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.at += 1;
            loop {
                let pos = self.pos();
                args.push(match self.bump() {
                    Some(Tok::Nat(n)) => Term::Const(n),
                    Some(Tok::Ident(v)) if is_var_name(&v) => Term::Var(v),
                    _ => return Err(syntax(pos, "expected a variable or a constant")),
                });
                let pos = self.pos();
                match self.bump() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    _ => return Err(syntax(pos, "expected `,` or `)`")),
                }
            }
        }
        Ok(Formula::Atom {
            letter: Letter::new(name, args.len()),
            args,
            negated,
        })
    }
}

/// Parses a formula and checks every AST invariant.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
    };
    let f = p.formula()?;
    if p.at < p.toks.len() {
        return Err(syntax(p.pos(), "unexpected trailing input"));
    }
    f.validate()?;
    Ok(f)
}

/// Parses a single term (`x3`, `0`, ...).
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let t = text.trim();
    if is_var_name(t) {
        Ok(Term::Var(t.to_string()))
    } else {
        t.parse::<u64>()
            .map(Term::Const)
            .map_err(|_| syntax(0, alloc::format!("`{t}` is not a term")))
    }
}
