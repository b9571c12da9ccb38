//! Recursive-descent parser for the concrete formula syntax.
//!
//! Grammar (tightest to loosest): unary prefixes `~`, `[]`, `<>`, `[a]`,
//! `K[a]`, `O[a]`, `Os[a]`; then `&`; then `|`; then right-associative `->`.

use std::fmt;

use super::{Agent, Formula};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input where the error was detected.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" or "),
            self.found
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Tilde,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
    BoxOp,
    DiamondOp,
    LBracket,
    RBracket,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Tilde => "\"~\"".into(),
            Tok::Amp => "\"&\"".into(),
            Tok::Pipe => "\"|\"".into(),
            Tok::Arrow => "\"->\"".into(),
            Tok::LParen => "\"(\"".into(),
            Tok::RParen => "\")\"".into(),
            Tok::BoxOp => "\"[]\"".into(),
            Tok::DiamondOp => "\"<>\"".into(),
            Tok::LBracket => "\"[\"".into(),
            Tok::RBracket => "\"]\"".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'~' => {
                toks.push((i, Tok::Tilde));
                i += 1;
            }
            b'&' => {
                toks.push((i, Tok::Amp));
                i += 1;
            }
            b'|' => {
                toks.push((i, Tok::Pipe));
                i += 1;
            }
            b'(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            b']' => {
                toks.push((i, Tok::RBracket));
                i += 1;
            }
            b'[' => {
                if bytes.get(i + 1) == Some(&b']') {
                    toks.push((i, Tok::BoxOp));
                    i += 2;
                } else {
                    toks.push((i, Tok::LBracket));
                    i += 1;
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::DiamondOp));
                    i += 2;
                } else {
                    return Err(ParseError {
                        offset: i,
                        expected: vec!["\"<>\""],
                        found: format!("{:?}", &text[i..(i + 1).min(text.len())]),
                    });
                }
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Arrow));
                    i += 2;
                } else {
                    return Err(ParseError {
                        offset: i,
                        expected: vec!["\"->\""],
                        found: format!("{:?}", &text[i..(i + 1).min(text.len())]),
                    });
                }
            }
            _ if b.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(text[start..i].to_owned())));
            }
            _ => {
                return Err(ParseError {
                    offset: i,
                    expected: vec!["formula"],
                    found: format!("{:?}", &text[i..i + 1]),
                })
            }
        }
    }
    toks.push((text.len(), Tok::Eof));
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected,
            found: self.peek().describe(),
        }
    }

    fn expect_rbracket(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RBracket {
            self.bump();
            Ok(())
        } else {
            Err(self.err(vec!["\"]\""]))
        }
    }

    fn agent(&mut self) -> Result<Agent, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Agent(name))
            }
            _ => Err(self.err(vec!["agent name"])),
        }
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::BoxOp => {
                self.bump();
                Ok(Formula::nec(self.unary()?))
            }
            Tok::DiamondOp => {
                self.bump();
                Ok(Formula::diamond(self.unary()?))
            }
            Tok::LBracket => {
                self.bump();
                let a = self.agent()?;
                self.expect_rbracket()?;
                Ok(Formula::Stit(a, Box::new(self.unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let f = self.implies()?;
                if *self.peek() == Tok::RParen {
                    self.bump();
                    Ok(f)
                } else {
                    Err(self.err(vec!["\")\""]))
                }
            }
            Tok::Ident(name) => {
                if *self.peek2() == Tok::LBracket {
                    let op_offset = self.offset();
                    match name.as_str() {
                        "K" | "O" | "Os" => {
                            self.bump();
                            self.bump();
                            let a = self.agent()?;
                            self.expect_rbracket()?;
                            let body = Box::new(self.unary()?);
                            Ok(match name.as_str() {
                                "K" => Formula::Knows(a, body),
                                "O" => Formula::ObjOught(a, body),
                                _ => Formula::SubjOught(a, body),
                            })
                        }
                        _ => Err(ParseError {
                            offset: op_offset,
                            expected: vec!["\"K[\"", "\"O[\"", "\"Os[\""],
                            found: format!("unknown operator {name:?}"),
                        }),
                    }
                } else {
                    self.bump();
                    Ok(Formula::Atom(name))
                }
            }
            _ => Err(self.err(vec!["formula"])),
        }
    }
}

/// Parses concrete syntax into a core-form [`Formula`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.implies()?;
    if *p.peek() == Tok::Eof {
        Ok(f)
    } else {
        Err(p.err(vec!["\"&\"", "\"|\"", "\"->\"", "end of input"]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_examples() {
        assert_eq!(
            parse("Os[a] ~G").unwrap(),
            Formula::subj_ought("a", Formula::not(Formula::atom("G")))
        );
        assert_eq!(
            parse("K[a] O[a] G").unwrap(),
            Formula::knows("a", Formula::obj_ought("a", Formula::atom("G")))
        );
    }

    #[test]
    fn precedence() {
        // "~ [] p & q" is (~[]p) & q
        assert_eq!(
            parse("~ [] p & q").unwrap(),
            Formula::and(
                Formula::not(Formula::nec(Formula::atom("p"))),
                Formula::atom("q")
            )
        );
        // -> is right-associative and loosest
        assert_eq!(
            parse("p -> q -> r").unwrap(),
            Formula::implies(
                Formula::atom("p"),
                Formula::implies(Formula::atom("q"), Formula::atom("r"))
            )
        );
        assert_eq!(
            parse("p | q & r").unwrap(),
            Formula::or(
                Formula::atom("p"),
                Formula::and(Formula::atom("q"), Formula::atom("r"))
            )
        );
    }

    #[test]
    fn atoms_may_share_operator_prefixes() {
        // K, O, Os are atoms unless directly followed by '['
        assert_eq!(parse("O & K").unwrap(), Formula::and(Formula::atom("O"), Formula::atom("K")));
        assert_eq!(parse("Os").unwrap(), Formula::atom("Os"));
    }

    #[test]
    fn unknown_operator() {
        let e = parse("Foo[a] p").unwrap_err();
        assert!(e.found.contains("unknown operator"), "{e}");
        assert_eq!(e.offset, 0);
    }

    #[test]
    fn error_carries_offset_and_expectations() {
        let e = parse("p & & q").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(!e.expected.is_empty());
    }
}
