//! Recursive-descent parser for the ASCII term grammar.
//!
//! ```text
//! iff   := imp ("<=>" iff)?
//! imp   := or ("==>" imp)?
//! or    := and ("\/" or)?
//! and   := unary ("/\" and)?
//! unary := "~" unary | atom
//! atom  := ident | "T" | "F" | "(" iff ")"
//! ```

use std::fmt;

use super::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// Byte offset into the input where parsing stopped.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at byte {}: expected one of {{{}}}, found {}",
            self.offset,
            self.expected.join(", "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
    True,
    False,
    Ident(String),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Not => "`~`".into(),
            Tok::And => "`/\\`".into(),
            Tok::Or => "`\\/`".into(),
            Tok::Imp => "`==>`".into(),
            Tok::Iff => "`<=>`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::True => "`T`".into(),
            Tok::False => "`F`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::End => "end of input".into(),
        }
    }
}

const ATOM_START: &[&str] = &["identifier", "T", "F", "(", "~"];
const BINARY_OPS: &[&str] = &["/\\", "\\/", "==>", "<=>"];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let tok = if rest.starts_with("/\\") {
            i += 2;
            Tok::And
        } else if rest.starts_with("\\/") {
            i += 2;
            Tok::Or
        } else if rest.starts_with("==>") {
            i += 3;
            Tok::Imp
        } else if rest.starts_with("<=>") {
            i += 3;
            Tok::Iff
        } else if c == b'~' {
            i += 1;
            Tok::Not
        } else if c == b'(' {
            i += 1;
            Tok::LParen
        } else if c == b')' {
            i += 1;
            Tok::RParen
        } else if c.is_ascii_alphabetic() {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            let word = &text[start..i];
            match word {
                "T" => Tok::True,
                "F" => Tok::False,
                w if super::term::is_identifier(w) => Tok::Ident(w.to_string()),
                w => {
                    return Err(ParseError {
                        offset: start,
                        expected: ATOM_START.to_vec(),
                        found: format!("`{w}`"),
                    })
                }
            }
        } else {
            let ch = rest.chars().next().unwrap_or('?');
            let mut expected = ATOM_START.to_vec();
            expected.extend_from_slice(BINARY_OPS);
            expected.push(")");
            return Err(ParseError {
                offset: start,
                expected,
                found: format!("`{ch}`"),
            });
        };
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn binary(
        &mut self,
        op: Tok,
        next: fn(&mut Parser) -> Result<Term, ParseError>,
        same: fn(&mut Parser) -> Result<Term, ParseError>,
        build: fn(Term, Term) -> Term,
    ) -> Result<Term, ParseError> {
        let lhs = next(self)?;
        if *self.peek() == op {
            self.bump();
            let rhs = same(self)?;
            Ok(build(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn iff(&mut self) -> Result<Term, ParseError> {
        self.binary(Tok::Iff, Parser::imp, Parser::iff, Term::iff)
    }

    fn imp(&mut self) -> Result<Term, ParseError> {
        self.binary(Tok::Imp, Parser::or, Parser::imp, Term::imp)
    }

    fn or(&mut self) -> Result<Term, ParseError> {
        self.binary(Tok::Or, Parser::and, Parser::or, Term::or)
    }

    fn and(&mut self) -> Result<Term, ParseError> {
        self.binary(Tok::And, Parser::unary, Parser::and, Term::and)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Not {
            self.bump();
            Ok(Term::not(self.unary()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Term::Var(name))
            }
            Tok::True => {
                self.bump();
                Ok(Term::True)
            }
            Tok::False => {
                self.bump();
                Ok(Term::False)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.iff()?;
                if *self.peek() != Tok::RParen {
                    let mut expected = BINARY_OPS.to_vec();
                    expected.push(")");
                    return Err(self.error(&expected));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error(ATOM_START)),
        }
    }
}

/// Parses a term from the concrete ASCII grammar.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let term = parser.iff()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error(BINARY_OPS));
    }
    Ok(term)
}
