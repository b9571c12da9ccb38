//! Finite epistemic act-utilitarian bi-valued branching-time models and
//! their derived combinatorics: histories, choice cells, states, epistemic
//! clusters, dominance orderings, and optimal sets.

mod file;
mod validate;

pub use file::{BtModelFile, ChoiceEntry, EpistemicEntry, HistoryNaming, MomentEntry, SituationRef};
pub use validate::Violation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::formula::Agent;
use crate::value::Utility;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MomentId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HistoryId(pub String);

impl fmt::Display for MomentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for HistoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A moment/history pair with `m` on `h`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Situation {
    pub moment: MomentId,
    pub history: HistoryId,
}

impl Situation {
    pub fn new(m: impl Into<String>, h: impl Into<String>) -> Self {
        Situation {
            moment: MomentId(m.into()),
            history: HistoryId(h.into()),
        }
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.moment, self.history)
    }
}

/// One block of a choice partition: an available action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub name: String,
    pub histories: BTreeSet<HistoryId>,
}

/// Which value function a dominance comparison reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Objective,
    Subjective,
}

/// Outcome of comparing two actions under a dominance ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderOutcome {
    pub leq: bool,
    pub geq: bool,
}

impl OrderOutcome {
    /// `L` is strictly dominated by `L'`: `L <= L'` and not `L' <= L`.
    pub fn strict(&self) -> bool {
        self.leq && !self.geq
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("unknown moment {0}")]
    UnknownMoment(MomentId),
    #[error("unknown history {0}")]
    UnknownHistory(HistoryId),
    #[error("unknown agent {0}")]
    UnknownAgent(Agent),
    #[error("the moment tree must have exactly one root, found {0}")]
    RootCount(usize),
    #[error("cycle in the moment parent map at {0}")]
    ParentCycle(MomentId),
    #[error("invalid situation {0}: the moment is not on the history")]
    InvalidSituation(Situation),
    #[error("history {0} has no objective value")]
    MissingValue(HistoryId),
    #[error("history naming must cover each leaf exactly once (leaf {0})")]
    HistoryNaming(MomentId),
    #[error("no agents declared")]
    NoAgents,
    #[error("set is not a cell of Choice^{moment}_{agent}")]
    NotACell { agent: Agent, moment: MomentId },
}

#[derive(Debug, Clone)]
struct HistoryRecord {
    id: HistoryId,
    chain: Vec<MomentId>, // root first, leaf last
}

/// An immutable branching-time model. All derived computations are pure.
#[derive(Debug, Clone)]
pub struct BTModel {
    agents: Vec<Agent>,
    moment_order: Vec<MomentId>,
    parent: BTreeMap<MomentId, MomentId>,
    children: BTreeMap<MomentId, Vec<MomentId>>,
    root: MomentId,
    histories: Vec<HistoryRecord>,
    history_pos: BTreeMap<HistoryId, usize>,
    histories_at: BTreeMap<MomentId, BTreeSet<HistoryId>>,
    choice: BTreeMap<(Agent, MomentId), Vec<Cell>>,
    explicit_choice: BTreeSet<(Agent, MomentId)>,
    epistemic: BTreeMap<Agent, Vec<BTreeSet<Situation>>>,
    class_of: BTreeMap<(Agent, Situation), usize>,
    value_o: BTreeMap<HistoryId, Utility>,
    value_s: BTreeMap<HistoryId, Utility>,
    valuation: BTreeMap<String, BTreeSet<Situation>>,
}

impl BTModel {
    pub fn from_file(file: BtModelFile) -> Result<BTModel, ModelError> {
        file::build(file)
    }

    pub fn to_file(&self) -> BtModelFile {
        file::dump(self)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn has_agent(&self, a: &Agent) -> bool {
        self.agents.contains(a)
    }

    /// Moments in file order (root first for generated models).
    pub fn moments(&self) -> &[MomentId] {
        &self.moment_order
    }

    pub fn root(&self) -> &MomentId {
        &self.root
    }

    pub fn parent_of(&self, m: &MomentId) -> Option<&MomentId> {
        self.parent.get(m)
    }

    pub fn children_of(&self, m: &MomentId) -> &[MomentId] {
        self.children.get(m).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Histories in canonical (derivation) order.
    pub fn histories(&self) -> impl Iterator<Item = &HistoryId> {
        self.histories.iter().map(|h| &h.id)
    }

    pub fn history_chain(&self, h: &HistoryId) -> Result<&[MomentId], ModelError> {
        let pos = self
            .history_pos
            .get(h)
            .ok_or_else(|| ModelError::UnknownHistory(h.clone()))?;
        Ok(&self.histories[*pos].chain)
    }

    /// `H_m`: the histories whose chain contains the moment.
    pub fn histories_through(&self, m: &MomentId) -> Result<&BTreeSet<HistoryId>, ModelError> {
        self.histories_at
            .get(m)
            .ok_or_else(|| ModelError::UnknownMoment(m.clone()))
    }

    /// Histories at `m` in canonical order.
    pub fn histories_through_ordered(&self, m: &MomentId) -> Result<Vec<HistoryId>, ModelError> {
        let set = self.histories_through(m)?;
        Ok(self
            .histories
            .iter()
            .map(|h| h.id.clone())
            .filter(|h| set.contains(h))
            .collect())
    }

    pub fn is_situation(&self, s: &Situation) -> bool {
        self.histories_at
            .get(&s.moment)
            .map(|hs| hs.contains(&s.history))
            .unwrap_or(false)
    }

    /// All situations, moments in file order, histories in canonical order.
    pub fn situations(&self) -> Vec<Situation> {
        let mut out = Vec::new();
        for m in &self.moment_order {
            for h in self.histories_through_ordered(m).expect("known moment") {
                out.push(Situation {
                    moment: m.clone(),
                    history: h,
                });
            }
        }
        out
    }

    /// `Choice^m_a`. Absent entries are the vacuous partition `{H_m}`.
    pub fn choice_cells(&self, agent: &Agent, m: &MomentId) -> Result<&[Cell], ModelError> {
        if !self.has_agent(agent) {
            return Err(ModelError::UnknownAgent(agent.clone()));
        }
        if !self.histories_at.contains_key(m) {
            return Err(ModelError::UnknownMoment(m.clone()));
        }
        Ok(self
            .choice
            .get(&(agent.clone(), m.clone()))
            .map(|v| v.as_slice())
            .unwrap_or(&[]))
    }

    /// The cell of `Choice^m_a` containing `h`.
    pub fn cell_containing(
        &self,
        agent: &Agent,
        m: &MomentId,
        h: &HistoryId,
    ) -> Result<&Cell, ModelError> {
        self.choice_cells(agent, m)?
            .iter()
            .find(|c| c.histories.contains(h))
            .ok_or_else(|| ModelError::UnknownHistory(h.clone()))
    }

    pub fn cell_named(
        &self,
        agent: &Agent,
        m: &MomentId,
        name: &str,
    ) -> Result<&Cell, ModelError> {
        self.choice_cells(agent, m)?
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| ModelError::DuplicateId(format!("no cell {name} at {m}")))
    }

    pub fn value_o(&self, h: &HistoryId) -> Utility {
        self.value_o[h]
    }

    pub fn value_s(&self, h: &HistoryId) -> Utility {
        self.value_s[h]
    }

    pub fn atom_extension(&self, atom: &str) -> Option<&BTreeSet<Situation>> {
        self.valuation.get(atom)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &String> {
        self.valuation.keys()
    }

    pub fn epistemic_classes(&self, agent: &Agent) -> &[BTreeSet<Situation>] {
        self.epistemic
            .get(agent)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// `s ~a s'`, with unlisted situations reflexively related to themselves.
    pub fn related(&self, agent: &Agent, s1: &Situation, s2: &Situation) -> bool {
        if s1 == s2 {
            return true;
        }
        match (
            self.class_of.get(&(agent.clone(), s1.clone())),
            self.class_of.get(&(agent.clone(), s2.clone())),
        ) {
            (Some(c1), Some(c2)) => c1 == c2,
            _ => false,
        }
    }

    /// The information set of `s` for `agent` (a singleton when unlisted).
    pub fn information_set(&self, agent: &Agent, s: &Situation) -> BTreeSet<Situation> {
        match self.class_of.get(&(agent.clone(), s.clone())) {
            Some(c) => self.epistemic[agent][*c].clone(),
            None => BTreeSet::from([s.clone()]),
        }
    }

    /// `m ~a m'`: some situation at `m` relates to some situation at `m'`.
    pub fn moments_related(&self, agent: &Agent, m1: &MomentId, m2: &MomentId) -> bool {
        if m1 == m2 {
            return true;
        }
        self.epistemic_classes(agent).iter().any(|class| {
            class.iter().any(|s| s.moment == *m1) && class.iter().any(|s| s.moment == *m2)
        })
    }

    /// Moments related to `m` for `agent`, in file order (`m` included).
    pub fn related_moments(&self, agent: &Agent, m: &MomentId) -> Vec<MomentId> {
        self.moment_order
            .iter()
            .filter(|m2| self.moments_related(agent, m, m2))
            .cloned()
            .collect()
    }

    /// `State^m_b`: all nonempty intersections of one cell per other agent.
    pub fn states(&self, agent: &Agent, m: &MomentId) -> Result<Vec<BTreeSet<HistoryId>>, ModelError> {
        if !self.has_agent(agent) {
            return Err(ModelError::UnknownAgent(agent.clone()));
        }
        let h_m = self.histories_through(m)?;
        let mut states: Vec<BTreeSet<HistoryId>> = vec![h_m.clone()];
        for other in &self.agents {
            if other == agent {
                continue;
            }
            let cells = self.choice_cells(other, m)?;
            let mut next = Vec::new();
            for s in &states {
                for cell in cells {
                    let inter: BTreeSet<HistoryId> =
                        s.intersection(&cell.histories).cloned().collect();
                    if !inter.is_empty() {
                        next.push(inter);
                    }
                }
            }
            states = next;
        }
        states.sort();
        states.dedup();
        Ok(states)
    }

    /// `[L]^m_a`: the histories at `target` epistemically reachable from the
    /// action `cell` performed at `m_star`.
    pub fn epistemic_cluster(
        &self,
        agent: &Agent,
        cell: &BTreeSet<HistoryId>,
        m_star: &MomentId,
        target: &MomentId,
    ) -> Result<BTreeSet<HistoryId>, ModelError> {
        if !self.moments_related(agent, m_star, target) {
            return Err(ModelError::UnknownMoment(target.clone()));
        }
        let h_target = self.histories_through(target)?;
        let mut out = BTreeSet::new();
        for h in h_target {
            let s_t = Situation {
                moment: target.clone(),
                history: h.clone(),
            };
            let hit = cell.iter().any(|h_star| {
                self.related(
                    agent,
                    &Situation {
                        moment: m_star.clone(),
                        history: h_star.clone(),
                    },
                    &s_t,
                )
            });
            if hit {
                out.insert(h.clone());
            }
        }
        Ok(out)
    }

    fn value(&self, flavor: Flavor, h: &HistoryId) -> Utility {
        match flavor {
            Flavor::Objective => self.value_o(h),
            Flavor::Subjective => self.value_s(h),
        }
    }

    /// `X <= Y` pointwise under the given value function; vacuously true
    /// when either set is empty.
    fn set_leq(&self, flavor: Flavor, xs: &BTreeSet<HistoryId>, ys: &BTreeSet<HistoryId>) -> bool {
        xs.iter().all(|h| {
            let vx = self.value(flavor, h);
            ys.iter().all(|h2| vx <= self.value(flavor, h2))
        })
    }

    fn cell_leq(
        &self,
        agent: &Agent,
        m: &MomentId,
        l: &BTreeSet<HistoryId>,
        l2: &BTreeSet<HistoryId>,
        flavor: Flavor,
        relativized: bool,
    ) -> Result<bool, ModelError> {
        match flavor {
            Flavor::Objective => {
                if !relativized {
                    Ok(self.set_leq(flavor, l, l2))
                } else {
                    for state in self.states(agent, m)? {
                        let a: BTreeSet<HistoryId> = l.intersection(&state).cloned().collect();
                        let b: BTreeSet<HistoryId> = l2.intersection(&state).cloned().collect();
                        if !self.set_leq(flavor, &a, &b) {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
            }
            Flavor::Subjective => {
                for target in self.related_moments(agent, m) {
                    let ca = self.epistemic_cluster(agent, l, m, &target)?;
                    let cb = self.epistemic_cluster(agent, l2, m, &target)?;
                    if !relativized {
                        if !self.set_leq(flavor, &ca, &cb) {
                            return Ok(false);
                        }
                    } else {
                        for state in self.states(agent, &target)? {
                            let a: BTreeSet<HistoryId> =
                                ca.intersection(&state).cloned().collect();
                            let b: BTreeSet<HistoryId> =
                                cb.intersection(&state).cloned().collect();
                            if !self.set_leq(flavor, &a, &b) {
                                return Ok(false);
                            }
                        }
                    }
                }
                Ok(true)
            }
        }
    }

    /// Compares two actions of `Choice^m_agent` under the chosen dominance
    /// ordering.
    pub fn compare(
        &self,
        agent: &Agent,
        m: &MomentId,
        l: &BTreeSet<HistoryId>,
        l2: &BTreeSet<HistoryId>,
        flavor: Flavor,
        relativized: bool,
    ) -> Result<OrderOutcome, ModelError> {
        let cells = self.choice_cells(agent, m)?;
        for c in [l, l2] {
            if !cells.iter().any(|cell| cell.histories == *c) {
                return Err(ModelError::NotACell {
                    agent: agent.clone(),
                    moment: m.clone(),
                });
            }
        }
        Ok(OrderOutcome {
            leq: self.cell_leq(agent, m, l, l2, flavor, relativized)?,
            geq: self.cell_leq(agent, m, l2, l, flavor, relativized)?,
        })
    }

    fn undominated(
        &self,
        agent: &Agent,
        m: &MomentId,
        flavor: Flavor,
        relativized: bool,
    ) -> Result<Vec<Cell>, ModelError> {
        let cells = self.choice_cells(agent, m)?;
        let mut out = Vec::new();
        for l in cells {
            let mut dominated = false;
            for l2 in cells {
                if l2.name == l.name {
                    continue;
                }
                let leq =
                    self.cell_leq(agent, m, &l.histories, &l2.histories, flavor, relativized)?;
                let geq =
                    self.cell_leq(agent, m, &l2.histories, &l.histories, flavor, relativized)?;
                if leq && !geq {
                    dominated = true;
                    break;
                }
            }
            if !dominated {
                out.push(l.clone());
            }
        }
        Ok(out)
    }

    /// `Optimal^m_agent` under the objective ordering.
    pub fn optimal_set(
        &self,
        agent: &Agent,
        m: &MomentId,
        relativized: bool,
    ) -> Result<Vec<Cell>, ModelError> {
        self.undominated(agent, m, Flavor::Objective, relativized)
    }

    /// `S-optimal^m_agent` under the subjective ordering.
    pub fn s_optimal_set(
        &self,
        agent: &Agent,
        m: &MomentId,
        relativized: bool,
    ) -> Result<Vec<Cell>, ModelError> {
        self.undominated(agent, m, Flavor::Subjective, relativized)
    }

    /// Runs every frame-constraint check; an empty report means the model is
    /// a legal epistemic act-utilitarian bi-valued BT model.
    pub fn validate(&self) -> Vec<Violation> {
        validate::validate(self)
    }
}
