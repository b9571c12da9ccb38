//! Abstract syntax, concrete syntax, and schema substitution for the
//! object language.
//!
//! The core connectives are negation, conjunction, historical necessity,
//! and the four agent-indexed modalities (stit, knowledge, objective ought,
//! subjective ought). Disjunction, implication, and historical possibility
//! are parser-level sugar normalized into the core; the printer recognizes
//! the sugar patterns and prints them back compactly.

mod parse;
mod schema;

pub use parse::{parse, ParseError};
pub use schema::{Schema, SchemaKind, SubstError};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// An agent name. Agents are drawn from a model's finite agent set at
/// evaluation time; the formula layer treats them as opaque identifiers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Agent(pub String);

impl Agent {
    pub fn new(name: impl Into<String>) -> Self {
        Agent(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A formula in core form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// Historical necessity, `[] p`.
    Nec(Box<Formula>),
    /// `[a] p`: the agent's current choice guarantees `p`.
    Stit(Agent, Box<Formula>),
    /// `K[a] p`.
    Knows(Agent, Box<Formula>),
    /// `O[a] p`: objective ought.
    ObjOught(Agent, Box<Formula>),
    /// `Os[a] p`: subjective ought.
    SubjOught(Agent, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// `a | b`, normalized to `~(~a & ~b)`.
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `a -> b`, normalized to `~(a & ~b)`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    pub fn nec(f: Formula) -> Self {
        Formula::Nec(Box::new(f))
    }

    /// `<> a`, normalized to `~[]~a`.
    pub fn diamond(f: Formula) -> Self {
        Formula::not(Formula::nec(Formula::not(f)))
    }

    pub fn stit(a: impl Into<String>, f: Formula) -> Self {
        Formula::Stit(Agent::new(a), Box::new(f))
    }

    pub fn knows(a: impl Into<String>, f: Formula) -> Self {
        Formula::Knows(Agent::new(a), Box::new(f))
    }

    pub fn obj_ought(a: impl Into<String>, f: Formula) -> Self {
        Formula::ObjOught(Agent::new(a), Box::new(f))
    }

    pub fn subj_ought(a: impl Into<String>, f: Formula) -> Self {
        Formula::SubjOught(Agent::new(a), Box::new(f))
    }

    /// Atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeMap<String, ()> {
        let mut out = BTreeMap::new();
        self.walk(&mut |f| {
            if let Formula::Atom(name) = f {
                out.insert(name.clone(), ());
            }
        });
        out
    }

    /// Agents occurring in the formula.
    pub fn agents(&self) -> Vec<Agent> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            let a = match f {
                Formula::Stit(a, _)
                | Formula::Knows(a, _)
                | Formula::ObjOught(a, _)
                | Formula::SubjOught(a, _) => a,
                _ => return,
            };
            if !out.contains(a) {
                out.push(a.clone());
            }
        });
        out
    }

    fn walk(&self, visit: &mut impl FnMut(&Formula)) {
        visit(self);
        match self {
            Formula::Atom(_) => {}
            Formula::Not(f)
            | Formula::Nec(f)
            | Formula::Stit(_, f)
            | Formula::Knows(_, f)
            | Formula::ObjOught(_, f)
            | Formula::SubjOught(_, f) => f.walk(visit),
            Formula::And(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
        }
    }
}

// Printing. Precedence levels: 0 implication, 1 disjunction, 2 conjunction,
// 3 unary/atomic. `->` is right-associative, `&`/`|` left-associative.
fn fmt_at(f: &Formula, level: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    // Sugar recognition on negations.
    if let Formula::Not(inner) = f {
        match inner.as_ref() {
            // ~[]~p prints as <> p
            Formula::Nec(n) => {
                if let Formula::Not(p) = n.as_ref() {
                    out.write_str("<> ")?;
                    return fmt_at(p, 3, out);
                }
            }
            Formula::And(a, b) => {
                if let Formula::Not(rhs) = b.as_ref() {
                    if let Formula::Not(lhs) = a.as_ref() {
                        // ~(~a & ~b) prints as a | b
                        let paren = level > 1;
                        if paren {
                            out.write_str("(")?;
                        }
                        fmt_at(lhs, 1, out)?;
                        out.write_str(" | ")?;
                        fmt_at(rhs, 2, out)?;
                        if paren {
                            out.write_str(")")?;
                        }
                        return Ok(());
                    }
                    // ~(a & ~b) prints as a -> b
                    let paren = level > 0;
                    if paren {
                        out.write_str("(")?;
                    }
                    fmt_at(a, 1, out)?;
                    out.write_str(" -> ")?;
                    fmt_at(rhs, 0, out)?;
                    if paren {
                        out.write_str(")")?;
                    }
                    return Ok(());
                }
            }
            _ => {}
        }
    }
    match f {
        Formula::Atom(name) => out.write_str(name),
        Formula::Not(p) => {
            out.write_str("~")?;
            fmt_at(p, 3, out)
        }
        Formula::And(a, b) => {
            let paren = level > 2;
            if paren {
                out.write_str("(")?;
            }
            fmt_at(a, 2, out)?;
            out.write_str(" & ")?;
            fmt_at(b, 3, out)?;
            if paren {
                out.write_str(")")?;
            }
            Ok(())
        }
        Formula::Nec(p) => {
            out.write_str("[] ")?;
            fmt_at(p, 3, out)
        }
        Formula::Stit(a, p) => {
            write!(out, "[{a}] ")?;
            fmt_at(p, 3, out)
        }
        Formula::Knows(a, p) => {
            write!(out, "K[{a}] ")?;
            fmt_at(p, 3, out)
        }
        Formula::ObjOught(a, p) => {
            write!(out, "O[{a}] ")?;
            fmt_at(p, 3, out)
        }
        Formula::SubjOught(a, p) => {
            write!(out, "Os[{a}] ")?;
            fmt_at(p, 3, out)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, 0, f)
    }
}

impl Formula {
    /// Renders the formula as concrete syntax. `parse(render(f)) == f`.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_examples() {
        assert_eq!(Formula::nec(Formula::atom("p")).render(), "[] p");
        assert_eq!(Formula::diamond(Formula::atom("p")).render(), "<> p");
        assert_eq!(
            Formula::subj_ought("a", Formula::knows("a", Formula::atom("p"))).render(),
            "Os[a] K[a] p"
        );
    }

    #[test]
    fn render_parse_round_trip_on_sugar() {
        let f = Formula::implies(
            Formula::obj_ought("a", Formula::atom("W")),
            Formula::diamond(Formula::knows("a", Formula::stit("a", Formula::atom("W")))),
        );
        assert_eq!(f.render(), "O[a] W -> <> K[a] [a] W");
        assert_eq!(parse(&f.render()).unwrap(), f);
    }

    #[test]
    fn or_prints_before_implication_reading() {
        let f = Formula::or(Formula::atom("p"), Formula::atom("q"));
        assert_eq!(f.render(), "p | q");
        assert_eq!(parse("p | q").unwrap(), f);
    }
}
