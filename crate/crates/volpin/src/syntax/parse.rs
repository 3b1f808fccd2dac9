//! Text → AST for formulas, terms, and theory files.
//!
//! Formula grammar (ASCII), loosest to tightest: `->` (right-associative),
//! `|`, `&`, `~` (prefix, sugar for `_ -> false`). `false` is falsum.
//! `forall x. φ` and `exists x. φ` bind as far right as possible, so
//! `forall x. P(x) -> Q(x)` reads `forall x. (P(x) -> Q(x))`. Parentheses
//! group; identifiers match `[a-zA-Z_][a-zA-Z0-9_]*`.
//!
//! Theory files are line-structured:
//!
//! ```text
//! theory Q                # optional header line
//! signature:
//!   predicate eq/2
//!   function S/1
//!   constant zero
//! axioms:
//!   forall x. eq(x, x)
//! ```
//!
//! `#` starts a comment; blank lines are ignored.

use super::{Formula, Signature, Term, Theory};

/// Errors from the formula/term/theory parsers. Positions are byte offsets
/// into the input text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("undeclared symbol `{name}` at byte {pos}")]
    Undeclared { pos: usize, name: String },
    #[error("arity mismatch at byte {pos}: `{name}` expects {expected} arguments, got {found}")]
    ArityMismatch { pos: usize, name: String, expected: usize, found: usize },
}

fn syntax(pos: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Dot,
    Amp,
    Pipe,
    Arrow,
    Tilde,
    KwFalse,
    KwForall,
    KwExists,
    Ident(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::KwFalse => "`false`".into(),
            Tok::KwForall => "`forall`".into(),
            Tok::KwExists => "`exists`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            b'.' => {
                toks.push((Tok::Dot, i));
                i += 1;
            }
            b'&' => {
                toks.push((Tok::Amp, i));
                i += 1;
            }
            b'|' => {
                toks.push((Tok::Pipe, i));
                i += 1;
            }
            b'~' => {
                toks.push((Tok::Tilde, i));
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Arrow, i));
                    i += 2;
                } else {
                    return Err(syntax(i, "expected `->`"));
                }
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "false" => Tok::KwFalse,
                    "forall" => Tok::KwForall,
                    "exists" => Tok::KwExists,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((tok, start));
            }
            c => {
                return Err(syntax(i, format!("unexpected character `{}`", c as char)));
            }
        }
    }
    toks.push((Tok::Eof, text.len()));
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    sig: &'a Signature,
    scope: Vec<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn pos(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<usize, ParseError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            Err(syntax(
                self.pos(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or_chain()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_chain(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and_chain()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.and_chain()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and_chain(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                let inner = self.unary()?;
                Ok(Formula::not(inner))
            }
            Tok::KwForall | Tok::KwExists => self.quantifier(),
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self) -> Result<Formula, ParseError> {
        let (kw, _) = self.bump();
        let (var_tok, var_pos) = self.bump();
        let var = match var_tok {
            Tok::Ident(name) => name,
            other => {
                return Err(syntax(
                    var_pos,
                    format!("expected a variable name, found {}", other.describe()),
                ))
            }
        };
        self.expect(Tok::Dot)?;
        self.scope.push(var.clone());
        let body = self.formula();
        self.scope.pop();
        let body = body?;
        Ok(match kw {
            Tok::KwForall => Formula::forall(&var, body),
            _ => Formula::exists(&var, body),
        })
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::KwFalse => {
                self.bump();
                Ok(Formula::Falsum)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let pos = self.pos();
                self.bump();
                let args = if *self.peek() == Tok::LParen {
                    self.arg_list()?
                } else {
                    Vec::new()
                };
                match self.sig.predicate_arity(&name) {
                    Some(arity) if arity == args.len() => Ok(Formula::Atom(name, args)),
                    Some(arity) => Err(ParseError::ArityMismatch {
                        pos,
                        name,
                        expected: arity,
                        found: args.len(),
                    }),
                    None => Err(ParseError::Undeclared { pos, name }),
                }
            }
            other => Err(syntax(
                self.pos(),
                format!("expected a formula, found {}", other.describe()),
            )),
        }
    }

    fn arg_list(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let pos = self.pos();
        match self.bump().0 {
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let args = self.arg_list()?;
                    match self.sig.function_arity(&name) {
                        Some(arity) if arity == args.len() => Ok(Term::App(name, args)),
                        Some(arity) => Err(ParseError::ArityMismatch {
                            pos,
                            name,
                            expected: arity,
                            found: args.len(),
                        }),
                        None => Err(ParseError::Undeclared { pos, name }),
                    }
                } else if self.scope.iter().rev().any(|v| *v == name) {
                    Ok(Term::Var(name))
                } else if self.sig.has_constant(&name) {
                    Ok(Term::Const(name))
                } else {
                    Err(ParseError::Undeclared { pos, name })
                }
            }
            other => Err(syntax(pos, format!("expected a term, found {}", other.describe()))),
        }
    }
}

/// Parses a formula over `sig`. Every symbol must be declared; bound
/// variables may shadow constants.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, idx: 0, sig, scope: Vec::new() };
    let f = p.formula()?;
    let pos = p.pos();
    if *p.peek() != Tok::Eof {
        return Err(syntax(pos, format!("trailing input: {}", p.peek().describe())));
    }
    Ok(f)
}

/// Parses a closed term over `sig` (no variables in scope).
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, idx: 0, sig, scope: Vec::new() };
    let t = p.term()?;
    let pos = p.pos();
    if *p.peek() != Tok::Eof {
        return Err(syntax(pos, format!("trailing input: {}", p.peek().describe())));
    }
    Ok(t)
}

/// Parses a theory file: optional `theory NAME` header, a `signature:` block
/// of declarations, and an `axioms:` block with one formula per line.
pub fn parse_theory(text: &str) -> Result<Theory, ParseError> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Signature,
        Axioms,
    }

    let mut name = String::from("theory");
    let mut sig = Signature::new();
    let mut axiom_lines: Vec<(usize, &str)> = Vec::new();
    let mut section = Section::Preamble;

    let mut offset = 0;
    for raw_line in text.split('\n') {
        let line_start = offset;
        offset += raw_line.len() + 1;
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let pos = line_start + (line.len() - line.trim_start().len());
        match trimmed {
            "signature:" => {
                section = Section::Signature;
                continue;
            }
            "axioms:" => {
                section = Section::Axioms;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Preamble => {
                if let Some(rest) = trimmed.strip_prefix("theory ") {
                    name = rest.trim().to_string();
                } else {
                    return Err(syntax(
                        pos,
                        "expected `theory NAME`, `signature:`, or `axioms:`",
                    ));
                }
            }
            Section::Signature => {
                parse_declaration(trimmed, pos, &mut sig)?;
            }
            Section::Axioms => {
                axiom_lines.push((pos, trimmed));
            }
        }
    }

    let mut axioms = Vec::new();
    for (pos, line) in axiom_lines {
        let f = parse_formula(line, &sig).map_err(|e| shift_error(e, pos))?;
        if !f.is_closed() {
            return Err(syntax(pos, format!("axiom `{f}` has free variables")));
        }
        axioms.push(f);
    }
    Theory::new(&name, sig, axioms).map_err(|e| syntax(0, e))
}

fn shift_error(e: ParseError, by: usize) -> ParseError {
    match e {
        ParseError::Syntax { pos, message } => ParseError::Syntax { pos: pos + by, message },
        ParseError::Undeclared { pos, name } => ParseError::Undeclared { pos: pos + by, name },
        ParseError::ArityMismatch { pos, name, expected, found } => {
            ParseError::ArityMismatch { pos: pos + by, name, expected, found }
        }
    }
}

fn parse_declaration(line: &str, pos: usize, sig: &mut Signature) -> Result<(), ParseError> {
    let mut parts = line.split_whitespace();
    let kind = parts.next().unwrap_or("");
    let rest = parts.next().unwrap_or("");
    if parts.next().is_some() {
        return Err(syntax(pos, "trailing tokens in declaration"));
    }
    let declare = |sig: &mut Signature, kind: &str, rest: &str| -> Result<(), String> {
        match kind {
            "constant" => sig.declare_constant(rest).map_err(|e| e.to_string()),
            "predicate" | "function" => {
                let (name, arity_text) = rest
                    .split_once('/')
                    .ok_or_else(|| format!("expected `{kind} NAME/ARITY`"))?;
                let arity: usize =
                    arity_text.parse().map_err(|_| format!("bad arity `{arity_text}`"))?;
                if kind == "predicate" {
                    sig.declare_predicate(name, arity).map_err(|e| e.to_string())
                } else {
                    sig.declare_function(name, arity).map_err(|e| e.to_string())
                }
            }
            other => Err(format!(
                "unknown declaration `{other}` (expected predicate/function/constant)"
            )),
        }
    };
    declare(sig, kind, rest).map_err(|m| syntax(pos, m))
}
