//! Axiom schemata and closed-instance substitution.
//!
//! A schema is a formula-shaped template over propositional metavariables
//! (written as atoms) and agent metavariables. The language has no binders,
//! so substitution is capture-free by construction. The independence-of-agency
//! schema is a family indexed by an arity `n >= 1` with pairwise-distinct
//! agents.

use std::collections::BTreeMap;

use super::{Agent, Formula};

#[derive(Debug, Clone)]
pub struct Schema {
    pub name: String,
    pub kind: SchemaKind,
}

#[derive(Debug, Clone)]
pub enum SchemaKind {
    Fixed {
        template: Formula,
        prop_vars: Vec<String>,
        agent_vars: Vec<String>,
    },
    /// The IA family: for n >= 1, `<>[a1]p1 & ... & <>[an]pn -> <>([a1]p1 & ... & [an]pn)`.
    IndependenceFamily,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("no binding for propositional metavariable {0:?}")]
    MissingProp(String),
    #[error("no binding for agent metavariable {0:?}")]
    MissingAgent(String),
    #[error("IA instance binds agent {0:?} more than once")]
    DuplicateAgent(String),
    #[error("schema {0:?} requires an arity")]
    ArityRequired(String),
    #[error("schema {0:?} does not take an arity")]
    ArityUnexpected(String),
    #[error("metavariable {0:?} occurs in the template but is not declared")]
    UndeclaredVar(String),
}

impl Schema {
    /// A fixed schema whose template is given in concrete syntax, with
    /// declared propositional and agent metavariables.
    pub fn fixed(
        name: &str,
        template: &str,
        prop_vars: &[&str],
        agent_vars: &[&str],
    ) -> Schema {
        let template = super::parse(template)
            .unwrap_or_else(|e| panic!("bad template for {name}: {e}"));
        Schema {
            name: name.to_owned(),
            kind: SchemaKind::Fixed {
                template,
                prop_vars: prop_vars.iter().map(|s| s.to_string()).collect(),
                agent_vars: agent_vars.iter().map(|s| s.to_string()).collect(),
            },
        }
    }

    pub fn independence_family() -> Schema {
        Schema {
            name: "IA".to_owned(),
            kind: SchemaKind::IndependenceFamily,
        }
    }

    /// Metavariable names for an instance of this schema at arity `n`
    /// (`n` is ignored for fixed schemata).
    pub fn variables(&self, n: usize) -> (Vec<String>, Vec<String>) {
        match &self.kind {
            SchemaKind::Fixed {
                prop_vars,
                agent_vars,
                ..
            } => (prop_vars.clone(), agent_vars.clone()),
            SchemaKind::IndependenceFamily => (
                (1..=n).map(|i| format!("p{i}")).collect(),
                (1..=n).map(|i| format!("a{i}")).collect(),
            ),
        }
    }

    /// Produces the closed instance of the schema under the given bindings.
    pub fn substitute(
        &self,
        props: &BTreeMap<String, Formula>,
        agents: &BTreeMap<String, Agent>,
        n: Option<usize>,
    ) -> Result<Formula, SubstError> {
        match &self.kind {
            SchemaKind::Fixed {
                template,
                prop_vars,
                agent_vars,
            } => {
                if n.is_some() {
                    return Err(SubstError::ArityUnexpected(self.name.clone()));
                }
                check_declared(template, prop_vars, agent_vars)?;
                for v in prop_vars {
                    if !props.contains_key(v) {
                        return Err(SubstError::MissingProp(v.clone()));
                    }
                }
                for v in agent_vars {
                    if !agents.contains_key(v) {
                        return Err(SubstError::MissingAgent(v.clone()));
                    }
                }
                Ok(apply(template, props, agents))
            }
            SchemaKind::IndependenceFamily => {
                let n = n.ok_or_else(|| SubstError::ArityRequired(self.name.clone()))?;
                let (prop_vars, agent_vars) = self.variables(n.max(1));
                let mut conjuncts_lhs = Vec::new();
                let mut conjuncts_rhs = Vec::new();
                let mut seen: Vec<&Agent> = Vec::new();
                for (pv, av) in prop_vars.iter().zip(&agent_vars) {
                    let p = props
                        .get(pv)
                        .ok_or_else(|| SubstError::MissingProp(pv.clone()))?;
                    let a = agents
                        .get(av)
                        .ok_or_else(|| SubstError::MissingAgent(av.clone()))?;
                    if seen.contains(&a) {
                        return Err(SubstError::DuplicateAgent(a.0.clone()));
                    }
                    seen.push(a);
                    let body = Formula::Stit(a.clone(), Box::new(p.clone()));
                    conjuncts_lhs.push(Formula::diamond(body.clone()));
                    conjuncts_rhs.push(body);
                }
                let lhs = conjoin(conjuncts_lhs);
                let rhs = Formula::diamond(conjoin(conjuncts_rhs));
                Ok(Formula::implies(lhs, rhs))
            }
        }
    }
}

fn conjoin(mut fs: Vec<Formula>) -> Formula {
    let first = fs.remove(0);
    fs.into_iter().fold(first, Formula::and)
}

fn check_declared(
    template: &Formula,
    prop_vars: &[String],
    agent_vars: &[String],
) -> Result<(), SubstError> {
    for (atom, ()) in template.atoms() {
        if !prop_vars.contains(&atom) {
            return Err(SubstError::UndeclaredVar(atom));
        }
    }
    for agent in template.agents() {
        if !agent_vars.contains(&agent.0) {
            return Err(SubstError::UndeclaredVar(agent.0));
        }
    }
    Ok(())
}

fn apply(
    template: &Formula,
    props: &BTreeMap<String, Formula>,
    agents: &BTreeMap<String, Agent>,
) -> Formula {
    let sub_agent = |a: &Agent| agents.get(&a.0).cloned().unwrap_or_else(|| a.clone());
    match template {
        Formula::Atom(name) => props
            .get(name)
            .cloned()
            .unwrap_or_else(|| template.clone()),
        Formula::Not(f) => Formula::not(apply(f, props, agents)),
        Formula::And(a, b) => Formula::and(apply(a, props, agents), apply(b, props, agents)),
        Formula::Nec(f) => Formula::nec(apply(f, props, agents)),
        Formula::Stit(a, f) => Formula::Stit(sub_agent(a), Box::new(apply(f, props, agents))),
        Formula::Knows(a, f) => Formula::Knows(sub_agent(a), Box::new(apply(f, props, agents))),
        Formula::ObjOught(a, f) => {
            Formula::ObjOught(sub_agent(a), Box::new(apply(f, props, agents)))
        }
        Formula::SubjOught(a, f) => {
            Formula::SubjOught(sub_agent(a), Box::new(apply(f, props, agents)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn bind1(p: &str, f: Formula, av: &str, a: &str) -> (BTreeMap<String, Formula>, BTreeMap<String, Agent>) {
        let mut props = BTreeMap::new();
        props.insert(p.to_owned(), f);
        let mut agents = BTreeMap::new();
        agents.insert(av.to_owned(), Agent::new(a));
        (props, agents)
    }

    #[test]
    fn s_oic_instance() {
        let s = Schema::fixed("s.Oic", "Os[A] p -> <> K[A] p", &["p"], &["A"]);
        let (props, agents) = bind1("p", Formula::atom("G"), "A", "a");
        let got = s.substitute(&props, &agents, None).unwrap();
        assert_eq!(got, parse("Os[a] G -> <> K[a] G").unwrap());
    }

    #[test]
    fn cl_instance() {
        let s = Schema::fixed("Cl", "Os[A] p -> K[A] [] Os[A] p", &["p"], &["A"]);
        let (props, agents) = bind1("p", Formula::atom("q"), "A", "a");
        let got = s.substitute(&props, &agents, None).unwrap();
        assert_eq!(got, parse("Os[a] q -> K[a] [] Os[a] q").unwrap());
    }

    #[test]
    fn ia_instance_n2() {
        let s = Schema::independence_family();
        let mut props = BTreeMap::new();
        props.insert("p1".to_owned(), Formula::atom("p"));
        props.insert("p2".to_owned(), Formula::atom("q"));
        let mut agents = BTreeMap::new();
        agents.insert("a1".to_owned(), Agent::new("a"));
        agents.insert("a2".to_owned(), Agent::new("b"));
        let got = s.substitute(&props, &agents, Some(2)).unwrap();
        assert_eq!(got, parse("<> [a] p & <> [b] q -> <> ([a] p & [b] q)").unwrap());
    }

    #[test]
    fn ia_rejects_duplicate_agents() {
        let s = Schema::independence_family();
        let mut props = BTreeMap::new();
        props.insert("p1".to_owned(), Formula::atom("p"));
        props.insert("p2".to_owned(), Formula::atom("q"));
        let mut agents = BTreeMap::new();
        agents.insert("a1".to_owned(), Agent::new("a"));
        agents.insert("a2".to_owned(), Agent::new("a"));
        assert_eq!(
            s.substitute(&props, &agents, Some(2)),
            Err(SubstError::DuplicateAgent("a".to_owned()))
        );
    }

    #[test]
    fn missing_binding() {
        let s = Schema::fixed("T", "[] p -> p", &["p"], &[]);
        assert_eq!(
            s.substitute(&BTreeMap::new(), &BTreeMap::new(), None),
            Err(SubstError::MissingProp("p".to_owned()))
        );
    }
}
