//! Kripke-estit models: the world-based presentation of the same semantics,
//! where box classes play the role of moments and each world doubles as the
//! history it terminates.

mod eval;
mod translate;

pub use eval::{evaluate_kripke, KripkeEvaluator};
pub use translate::{
    associated_bt, class_moment, verify_truth_preservation, world_situation, TruthMismatch,
    ROOT_MOMENT,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::btmodel::{Flavor, OrderOutcome};
use crate::formula::Agent;
use crate::value::Utility;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldId(pub String);

impl fmt::Display for WorldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One block of a choice partition within a box class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KCell {
    pub name: String,
    pub worlds: BTreeSet<WorldId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KripkeError {
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("unknown world {0}")]
    UnknownWorld(WorldId),
    #[error("unknown agent {0}")]
    UnknownAgent(Agent),
    #[error("class index {0} out of range")]
    UnknownClass(usize),
    #[error("box classes do not partition the world set (world {0})")]
    BoxPartition(WorldId),
    #[error("world {0} has no objective value")]
    MissingValue(WorldId),
    #[error("no agents declared")]
    NoAgents,
    #[error("set is not a cell of Choice^{class}_{agent}")]
    NotACell { agent: Agent, class: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KViolation {
    /// A choice cell is empty.
    EmptyCell { agent: Agent, class: usize, cell: String },
    /// Two choice cells of one partition share a world.
    OverlappingCells {
        agent: Agent,
        class: usize,
        cell_a: String,
        cell_b: String,
        world: WorldId,
    },
    /// A class world is in no cell of the partition.
    UncoveredWorld { agent: Agent, class: usize, world: WorldId },
    /// A cell contains a world outside its class.
    ForeignWorld {
        agent: Agent,
        class: usize,
        cell: String,
        world: WorldId,
    },
    /// (IA)_K: a selection of one cell per agent has empty intersection.
    IndependenceOfAgency { class: usize, selection: Vec<(Agent, String)> },
    /// An epistemic class is empty.
    EmptyEpistemicClass { agent: Agent, index: usize },
    /// A world appears in two epistemic classes.
    OverlappingEpistemicClasses { agent: Agent, world: WorldId },
    /// (OAC)_K: v ≈ u but a choice-mate of v is not ≈ u.
    OwnAction {
        agent: Agent,
        source: WorldId,
        target: WorldId,
        mate: WorldId,
    },
    /// (Unif-H)_K: two box classes touch epistemically, but some world of the
    /// first relates to nothing in the second.
    Uniformity {
        agent: Agent,
        source_class: usize,
        target_class: usize,
        world: WorldId,
    },
}

impl fmt::Display for KViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KViolation::EmptyCell { agent, class, cell } => {
                write!(f, "partition: cell {cell} of Choice^{class}_{agent} is empty")
            }
            KViolation::OverlappingCells { agent, class, cell_a, cell_b, world } => write!(
                f,
                "partition: cells {cell_a} and {cell_b} of Choice^{class}_{agent} both contain {world}"
            ),
            KViolation::UncoveredWorld { agent, class, world } => write!(
                f,
                "partition: world {world} of class {class} is in no cell of Choice^{class}_{agent}"
            ),
            KViolation::ForeignWorld { agent, class, cell, world } => write!(
                f,
                "partition: cell {cell} of Choice^{class}_{agent} contains {world}, which is outside class {class}"
            ),
            KViolation::IndependenceOfAgency { class, selection } => {
                let sel: Vec<String> =
                    selection.iter().map(|(a, c)| format!("{a}:{c}")).collect();
                write!(
                    f,
                    "IA_K: selection {{{}}} in class {class} has empty intersection",
                    sel.join(", ")
                )
            }
            KViolation::EmptyEpistemicClass { agent, index } => {
                write!(f, "epistemic: class #{index} of {agent} is empty")
            }
            KViolation::OverlappingEpistemicClasses { agent, world } => {
                write!(f, "epistemic: world {world} appears in two classes of {agent}")
            }
            KViolation::OwnAction { agent, source, target, mate } => write!(
                f,
                "OAC_K: {source} ~{agent} {target}, but choice-mate {mate} is not related to {target}"
            ),
            KViolation::Uniformity { agent, source_class, target_class, world } => write!(
                f,
                "UnifH_K: classes {source_class} and {target_class} touch under ~{agent}, but {world} relates to nothing in {target_class}"
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KChoiceEntry {
    pub agent: String,
    pub class: usize,
    pub cells: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KEpistemicEntry {
    pub agent: String,
    pub classes: Vec<Vec<String>>,
}

/// The on-disk shape of a Kripke-estit model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KripkeFile {
    pub agents: Vec<String>,
    pub worlds: Vec<String>,
    pub box_classes: Vec<Vec<String>>,
    #[serde(default)]
    pub choice: Vec<KChoiceEntry>,
    #[serde(default)]
    pub epistemic: Vec<KEpistemicEntry>,
    pub value_o: BTreeMap<String, Utility>,
    /// Defaults to `value_o` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_s: Option<BTreeMap<String, Utility>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<String>>,
}

/// An immutable Kripke-estit model.
#[derive(Debug, Clone)]
pub struct KripkeModel {
    agents: Vec<Agent>,
    worlds: Vec<WorldId>,
    box_classes: Vec<Vec<WorldId>>,
    class_of: BTreeMap<WorldId, usize>,
    choice: BTreeMap<(Agent, usize), Vec<KCell>>,
    epistemic: BTreeMap<Agent, Vec<BTreeSet<WorldId>>>,
    eclass_of: BTreeMap<(Agent, WorldId), usize>,
    value_o: BTreeMap<WorldId, Utility>,
    value_s: BTreeMap<WorldId, Utility>,
    valuation: BTreeMap<String, BTreeSet<WorldId>>,
}

impl KripkeModel {
    pub fn from_file(file: KripkeFile) -> Result<KripkeModel, KripkeError> {
        if file.agents.is_empty() {
            return Err(KripkeError::NoAgents);
        }
        let mut agents = Vec::new();
        for a in &file.agents {
            let a = Agent::new(a.clone());
            if agents.contains(&a) {
                return Err(KripkeError::DuplicateId(a.0));
            }
            agents.push(a);
        }
        let mut worlds = Vec::new();
        for w in &file.worlds {
            let w = WorldId(w.clone());
            if worlds.contains(&w) {
                return Err(KripkeError::DuplicateId(w.0));
            }
            worlds.push(w);
        }
        let mut box_classes = Vec::new();
        let mut class_of = BTreeMap::new();
        for (idx, class) in file.box_classes.iter().enumerate() {
            let mut members = Vec::new();
            for w in class {
                let w = WorldId(w.clone());
                if !worlds.contains(&w) {
                    return Err(KripkeError::UnknownWorld(w));
                }
                if class_of.insert(w.clone(), idx).is_some() {
                    return Err(KripkeError::BoxPartition(w));
                }
                members.push(w);
            }
            box_classes.push(members);
        }
        for w in &worlds {
            if !class_of.contains_key(w) {
                return Err(KripkeError::BoxPartition(w.clone()));
            }
        }

        let mut choice: BTreeMap<(Agent, usize), Vec<KCell>> = BTreeMap::new();
        for entry in &file.choice {
            let agent = Agent::new(entry.agent.clone());
            if !agents.contains(&agent) {
                return Err(KripkeError::UnknownAgent(agent));
            }
            if entry.class >= box_classes.len() {
                return Err(KripkeError::UnknownClass(entry.class));
            }
            let mut cells = Vec::new();
            for (name, ws) in &entry.cells {
                let mut set = BTreeSet::new();
                for w in ws {
                    let w = WorldId(w.clone());
                    if !worlds.contains(&w) {
                        return Err(KripkeError::UnknownWorld(w));
                    }
                    set.insert(w);
                }
                cells.push(KCell {
                    name: name.clone(),
                    worlds: set,
                });
            }
            let key = (agent.clone(), entry.class);
            if choice.insert(key, cells).is_some() {
                return Err(KripkeError::DuplicateId(format!(
                    "choice for {} in class {}",
                    agent, entry.class
                )));
            }
        }
        for agent in &agents {
            for (idx, class) in box_classes.iter().enumerate() {
                choice.entry((agent.clone(), idx)).or_insert_with(|| {
                    vec![KCell {
                        name: "all".to_owned(),
                        worlds: class.iter().cloned().collect(),
                    }]
                });
            }
        }

        let mut epistemic: BTreeMap<Agent, Vec<BTreeSet<WorldId>>> = BTreeMap::new();
        let mut eclass_of: BTreeMap<(Agent, WorldId), usize> = BTreeMap::new();
        for entry in &file.epistemic {
            let agent = Agent::new(entry.agent.clone());
            if !agents.contains(&agent) {
                return Err(KripkeError::UnknownAgent(agent));
            }
            let classes = epistemic.entry(agent.clone()).or_default();
            for class in &entry.classes {
                let mut set = BTreeSet::new();
                for w in class {
                    let w = WorldId(w.clone());
                    if !worlds.contains(&w) {
                        return Err(KripkeError::UnknownWorld(w));
                    }
                    set.insert(w);
                }
                let idx = classes.len();
                for w in &set {
                    // First class wins on overlap; the validator reports it.
                    eclass_of.entry((agent.clone(), w.clone())).or_insert(idx);
                }
                classes.push(set);
            }
        }

        let mut value_o = BTreeMap::new();
        for (w, v) in &file.value_o {
            let w = WorldId(w.clone());
            if !worlds.contains(&w) {
                return Err(KripkeError::UnknownWorld(w));
            }
            value_o.insert(w, *v);
        }
        for w in &worlds {
            if !value_o.contains_key(w) {
                return Err(KripkeError::MissingValue(w.clone()));
            }
        }
        let value_s = match &file.value_s {
            None => value_o.clone(),
            Some(map) => {
                let mut out = BTreeMap::new();
                for (w, v) in map {
                    let w = WorldId(w.clone());
                    if !worlds.contains(&w) {
                        return Err(KripkeError::UnknownWorld(w));
                    }
                    out.insert(w, *v);
                }
                for w in &worlds {
                    if !out.contains_key(w) {
                        return Err(KripkeError::MissingValue(w.clone()));
                    }
                }
                out
            }
        };

        let mut valuation: BTreeMap<String, BTreeSet<WorldId>> = BTreeMap::new();
        for (atom, ws) in &file.valuation {
            let mut set = BTreeSet::new();
            for w in ws {
                let w = WorldId(w.clone());
                if !worlds.contains(&w) {
                    return Err(KripkeError::UnknownWorld(w));
                }
                set.insert(w);
            }
            valuation.insert(atom.clone(), set);
        }

        Ok(KripkeModel {
            agents,
            worlds,
            box_classes,
            class_of,
            choice,
            epistemic,
            eclass_of,
            value_o,
            value_s,
            valuation,
        })
    }

    pub fn to_file(&self) -> KripkeFile {
        KripkeFile {
            agents: self.agents.iter().map(|a| a.0.clone()).collect(),
            worlds: self.worlds.iter().map(|w| w.0.clone()).collect(),
            box_classes: self
                .box_classes
                .iter()
                .map(|c| c.iter().map(|w| w.0.clone()).collect())
                .collect(),
            choice: self
                .choice
                .iter()
                .map(|((agent, class), cells)| KChoiceEntry {
                    agent: agent.0.clone(),
                    class: *class,
                    cells: cells
                        .iter()
                        .map(|c| {
                            (c.name.clone(), c.worlds.iter().map(|w| w.0.clone()).collect())
                        })
                        .collect(),
                })
                .collect(),
            epistemic: self
                .epistemic
                .iter()
                .filter(|(_, classes)| !classes.is_empty())
                .map(|(agent, classes)| KEpistemicEntry {
                    agent: agent.0.clone(),
                    classes: classes
                        .iter()
                        .map(|c| c.iter().map(|w| w.0.clone()).collect())
                        .collect(),
                })
                .collect(),
            value_o: self.value_o.iter().map(|(w, v)| (w.0.clone(), *v)).collect(),
            value_s: Some(self.value_s.iter().map(|(w, v)| (w.0.clone(), *v)).collect()),
            valuation: self
                .valuation
                .iter()
                .map(|(atom, ws)| (atom.clone(), ws.iter().map(|w| w.0.clone()).collect()))
                .collect(),
        }
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn has_agent(&self, a: &Agent) -> bool {
        self.agents.contains(a)
    }

    /// Worlds in file order.
    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn has_world(&self, w: &WorldId) -> bool {
        self.class_of.contains_key(w)
    }

    pub fn class_count(&self) -> usize {
        self.box_classes.len()
    }

    /// Index of the box class `w̄`.
    pub fn class_of(&self, w: &WorldId) -> Result<usize, KripkeError> {
        self.class_of
            .get(w)
            .copied()
            .ok_or_else(|| KripkeError::UnknownWorld(w.clone()))
    }

    /// Members of a box class, in file order.
    pub fn class_worlds(&self, class: usize) -> Result<&[WorldId], KripkeError> {
        self.box_classes
            .get(class)
            .map(|v| v.as_slice())
            .ok_or(KripkeError::UnknownClass(class))
    }

    /// `Choice^w̄_a`.
    pub fn choice_cells(&self, agent: &Agent, class: usize) -> Result<&[KCell], KripkeError> {
        if !self.has_agent(agent) {
            return Err(KripkeError::UnknownAgent(agent.clone()));
        }
        if class >= self.box_classes.len() {
            return Err(KripkeError::UnknownClass(class));
        }
        Ok(self.choice[&(agent.clone(), class)].as_slice())
    }

    pub fn value_o(&self, w: &WorldId) -> Utility {
        self.value_o[w]
    }

    pub fn value_s(&self, w: &WorldId) -> Utility {
        self.value_s[w]
    }

    pub fn atom_extension(&self, atom: &str) -> Option<&BTreeSet<WorldId>> {
        self.valuation.get(atom)
    }

    pub fn epistemic_classes(&self, agent: &Agent) -> &[BTreeSet<WorldId>] {
        self.epistemic
            .get(agent)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// `v ≈a u`, with unlisted worlds reflexively related to themselves.
    pub fn related(&self, agent: &Agent, v: &WorldId, u: &WorldId) -> bool {
        if v == u {
            return true;
        }
        match (
            self.eclass_of.get(&(agent.clone(), v.clone())),
            self.eclass_of.get(&(agent.clone(), u.clone())),
        ) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// The epistemic class of `w` (a singleton when unlisted).
    pub fn information_set(&self, agent: &Agent, w: &WorldId) -> BTreeSet<WorldId> {
        match self.eclass_of.get(&(agent.clone(), w.clone())) {
            Some(idx) => self.epistemic[agent][*idx].clone(),
            None => BTreeSet::from([w.clone()]),
        }
    }

    /// Box classes epistemically touching `class` for `agent`, in index
    /// order (`class` included).
    pub fn related_classes(&self, agent: &Agent, class: usize) -> Vec<usize> {
        (0..self.box_classes.len())
            .filter(|c| {
                *c == class
                    || self.box_classes[class].iter().any(|v| {
                        self.box_classes[*c].iter().any(|u| self.related(agent, v, u))
                    })
            })
            .collect()
    }

    /// `⟦L⟧^target_a`: the worlds of the target class related to some world
    /// of `cell`.
    pub fn cluster(
        &self,
        agent: &Agent,
        cell: &BTreeSet<WorldId>,
        target: usize,
    ) -> Result<BTreeSet<WorldId>, KripkeError> {
        let class = self.class_worlds(target)?;
        Ok(class
            .iter()
            .filter(|u| cell.iter().any(|o| self.related(agent, o, u)))
            .cloned()
            .collect())
    }

    /// `State^w̄_b`: all nonempty intersections of one cell per other agent.
    pub fn states(&self, agent: &Agent, class: usize) -> Result<Vec<BTreeSet<WorldId>>, KripkeError> {
        if !self.has_agent(agent) {
            return Err(KripkeError::UnknownAgent(agent.clone()));
        }
        let mut states: Vec<BTreeSet<WorldId>> =
            vec![self.class_worlds(class)?.iter().cloned().collect()];
        for other in &self.agents {
            if other == agent {
                continue;
            }
            let cells = self.choice_cells(other, class)?;
            let mut next = Vec::new();
            for s in &states {
                for cell in cells {
                    let inter: BTreeSet<WorldId> =
                        s.intersection(&cell.worlds).cloned().collect();
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

    fn value(&self, flavor: Flavor, w: &WorldId) -> Utility {
        match flavor {
            Flavor::Objective => self.value_o(w),
            Flavor::Subjective => self.value_s(w),
        }
    }

    /// Pointwise comparison; vacuously true when either side is empty.
    fn set_leq(&self, flavor: Flavor, xs: &BTreeSet<WorldId>, ys: &BTreeSet<WorldId>) -> bool {
        xs.iter().all(|x| {
            let vx = self.value(flavor, x);
            ys.iter().all(|y| vx <= self.value(flavor, y))
        })
    }

    pub(crate) fn cell_leq(
        &self,
        agent: &Agent,
        class: usize,
        l: &BTreeSet<WorldId>,
        l2: &BTreeSet<WorldId>,
        flavor: Flavor,
        relativized: bool,
    ) -> Result<bool, KripkeError> {
        match flavor {
            Flavor::Objective => {
                if !relativized {
                    Ok(self.set_leq(flavor, l, l2))
                } else {
                    for state in self.states(agent, class)? {
                        let a: BTreeSet<WorldId> = l.intersection(&state).cloned().collect();
                        let b: BTreeSet<WorldId> = l2.intersection(&state).cloned().collect();
                        if !self.set_leq(flavor, &a, &b) {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
            }
            Flavor::Subjective => {
                for target in self.related_classes(agent, class) {
                    let ca = self.cluster(agent, l, target)?;
                    let cb = self.cluster(agent, l2, target)?;
                    if !relativized {
                        if !self.set_leq(flavor, &ca, &cb) {
                            return Ok(false);
                        }
                    } else {
                        for state in self.states(agent, target)? {
                            let a: BTreeSet<WorldId> =
                                ca.intersection(&state).cloned().collect();
                            let b: BTreeSet<WorldId> =
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

    /// Compares two actions of `Choice^class_agent` under the chosen
    /// dominance ordering.
    pub fn compare(
        &self,
        agent: &Agent,
        class: usize,
        l: &BTreeSet<WorldId>,
        l2: &BTreeSet<WorldId>,
        flavor: Flavor,
        relativized: bool,
    ) -> Result<OrderOutcome, KripkeError> {
        let cells = self.choice_cells(agent, class)?;
        for c in [l, l2] {
            if !cells.iter().any(|cell| cell.worlds == *c) {
                return Err(KripkeError::NotACell {
                    agent: agent.clone(),
                    class,
                });
            }
        }
        Ok(OrderOutcome {
            leq: self.cell_leq(agent, class, l, l2, flavor, relativized)?,
            geq: self.cell_leq(agent, class, l2, l, flavor, relativized)?,
        })
    }

    pub(crate) fn undominated(
        &self,
        agent: &Agent,
        class: usize,
        flavor: Flavor,
        relativized: bool,
    ) -> Result<Vec<KCell>, KripkeError> {
        let cells = self.choice_cells(agent, class)?;
        let mut out = Vec::new();
        for l in cells {
            let mut dominated = false;
            for l2 in cells {
                if l2.name == l.name {
                    continue;
                }
                let leq = self.cell_leq(agent, class, &l.worlds, &l2.worlds, flavor, relativized)?;
                let geq = self.cell_leq(agent, class, &l2.worlds, &l.worlds, flavor, relativized)?;
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

    /// Runs every frame-constraint check; an empty report means the model is
    /// a legal Kripke-estit model.
    pub fn validate(&self) -> Vec<KViolation> {
        let mut out = Vec::new();
        self.check_partitions(&mut out);
        self.check_independence(&mut out);
        self.check_epistemic_partitions(&mut out);
        self.check_own_action(&mut out);
        self.check_uniformity(&mut out);
        out.dedup();
        out
    }

    fn check_partitions(&self, out: &mut Vec<KViolation>) {
        for agent in &self.agents {
            for (idx, class) in self.box_classes.iter().enumerate() {
                let cells = &self.choice[&(agent.clone(), idx)];
                let mut seen: Vec<(&str, &WorldId)> = Vec::new();
                for cell in cells {
                    if cell.worlds.is_empty() {
                        out.push(KViolation::EmptyCell {
                            agent: agent.clone(),
                            class: idx,
                            cell: cell.name.clone(),
                        });
                    }
                    for w in &cell.worlds {
                        if !class.contains(w) {
                            out.push(KViolation::ForeignWorld {
                                agent: agent.clone(),
                                class: idx,
                                cell: cell.name.clone(),
                                world: w.clone(),
                            });
                        }
                        if let Some((other, _)) = seen.iter().find(|(_, w2)| *w2 == w) {
                            out.push(KViolation::OverlappingCells {
                                agent: agent.clone(),
                                class: idx,
                                cell_a: other.to_string(),
                                cell_b: cell.name.clone(),
                                world: w.clone(),
                            });
                        } else {
                            seen.push((&cell.name, w));
                        }
                    }
                }
                for w in class {
                    if !cells.iter().any(|c| c.worlds.contains(w)) {
                        out.push(KViolation::UncoveredWorld {
                            agent: agent.clone(),
                            class: idx,
                            world: w.clone(),
                        });
                    }
                }
            }
        }
    }

    fn check_independence(&self, out: &mut Vec<KViolation>) {
        for (idx, class) in self.box_classes.iter().enumerate() {
            let mut selections: Vec<(Vec<(Agent, String)>, BTreeSet<WorldId>)> =
                vec![(Vec::new(), class.iter().cloned().collect())];
            for agent in &self.agents {
                let cells = &self.choice[&(agent.clone(), idx)];
                let mut next = Vec::new();
                for (sel, inter) in &selections {
                    for cell in cells {
                        let mut sel2 = sel.clone();
                        sel2.push((agent.clone(), cell.name.clone()));
                        let inter2: BTreeSet<WorldId> =
                            inter.intersection(&cell.worlds).cloned().collect();
                        next.push((sel2, inter2));
                    }
                }
                selections = next;
            }
            for (sel, inter) in selections {
                if inter.is_empty() {
                    out.push(KViolation::IndependenceOfAgency {
                        class: idx,
                        selection: sel,
                    });
                }
            }
        }
    }

    fn check_epistemic_partitions(&self, out: &mut Vec<KViolation>) {
        for agent in &self.agents {
            let mut seen: BTreeSet<&WorldId> = BTreeSet::new();
            for (index, class) in self.epistemic_classes(agent).iter().enumerate() {
                if class.is_empty() {
                    out.push(KViolation::EmptyEpistemicClass {
                        agent: agent.clone(),
                        index,
                    });
                }
                for w in class {
                    if !seen.insert(w) {
                        out.push(KViolation::OverlappingEpistemicClasses {
                            agent: agent.clone(),
                            world: w.clone(),
                        });
                    }
                }
            }
        }
    }

    fn check_own_action(&self, out: &mut Vec<KViolation>) {
        for agent in &self.agents {
            for v in &self.worlds {
                let Ok(class) = self.class_of(v) else { continue };
                let cells = &self.choice[&(agent.clone(), class)];
                // Broken partitions are reported separately; skip here.
                let Some(cell) = cells.iter().find(|c| c.worlds.contains(v)) else {
                    continue;
                };
                for u in self.information_set(agent, v) {
                    for mate in &cell.worlds {
                        if !self.related(agent, mate, &u) {
                            out.push(KViolation::OwnAction {
                                agent: agent.clone(),
                                source: v.clone(),
                                target: u.clone(),
                                mate: mate.clone(),
                            });
                        }
                    }
                }
            }
        }
    }

    fn check_uniformity(&self, out: &mut Vec<KViolation>) {
        for agent in &self.agents {
            for c1 in 0..self.box_classes.len() {
                for c2 in 0..self.box_classes.len() {
                    if c1 == c2 {
                        continue;
                    }
                    let touch = self.box_classes[c1].iter().any(|v| {
                        self.box_classes[c2].iter().any(|u| self.related(agent, v, u))
                    });
                    if !touch {
                        continue;
                    }
                    for v in &self.box_classes[c1] {
                        let ok = self.box_classes[c2]
                            .iter()
                            .any(|u| self.related(agent, v, u));
                        if !ok {
                            out.push(KViolation::Uniformity {
                                agent: agent.clone(),
                                source_class: c1,
                                target_class: c2,
                                world: v.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::semantics::{EvalMode, EvalOptions};

    /// One box class, two agents, a 2x2 grid of worlds; each agent's
    /// epistemic classes coincide with its own cells.
    fn grid() -> KripkeFile {
        serde_json::from_value(serde_json::json!({
            "agents": ["a", "b"],
            "worlds": ["w00", "w01", "w10", "w11"],
            "box_classes": [["w00", "w01", "w10", "w11"]],
            "choice": [
                { "agent": "a", "class": 0,
                  "cells": { "a0": ["w00", "w01"], "a1": ["w10", "w11"] } },
                { "agent": "b", "class": 0,
                  "cells": { "b0": ["w00", "w10"], "b1": ["w01", "w11"] } },
            ],
            "epistemic": [
                { "agent": "a", "classes": [["w00", "w01"], ["w10", "w11"]] },
                { "agent": "b", "classes": [["w00", "w10"], ["w01", "w11"]] },
            ],
            "value_o": { "w00": "3", "w01": "1", "w10": "2", "w11": "4" },
            "valuation": { "p": ["w00", "w01"] },
        }))
        .unwrap()
    }

    #[test]
    fn grid_validates() {
        let model = KripkeModel::from_file(grid()).unwrap();
        assert!(model.validate().is_empty());
    }

    #[test]
    fn splitting_a_cell_across_epistemic_classes_breaks_oac() {
        let mut file = grid();
        file.epistemic[0].classes = vec![
            vec!["w00".into()],
            vec!["w01".into(), "w10".into(), "w11".into()],
        ];
        let model = KripkeModel::from_file(file).unwrap();
        let report = model.validate();
        assert!(
            report.iter().any(|v| matches!(v, KViolation::OwnAction { .. })),
            "{report:?}"
        );
    }

    #[test]
    fn partial_cross_class_links_break_uniformity() {
        let file: KripkeFile = serde_json::from_value(serde_json::json!({
            "agents": ["a"],
            "worlds": ["u0", "u1", "v0"],
            "box_classes": [["u0", "u1"], ["v0"]],
            "choice": [
                { "agent": "a", "class": 0, "cells": { "c0": ["u0"], "c1": ["u1"] } },
                { "agent": "a", "class": 1, "cells": { "d0": ["v0"] } },
            ],
            "epistemic": [
                { "agent": "a", "classes": [["u0", "v0"], ["u1"]] },
            ],
            "value_o": { "u0": "0", "u1": "1", "v0": "2" },
        }))
        .unwrap();
        let model = KripkeModel::from_file(file).unwrap();
        let report = model.validate();
        assert!(
            report.iter().any(|v| matches!(
                v,
                KViolation::Uniformity { source_class: 0, target_class: 1, .. }
            )),
            "{report:?}"
        );
    }

    #[test]
    fn box_quantifies_over_the_class() {
        let model = KripkeModel::from_file(grid()).unwrap();
        let eval = KripkeEvaluator::new(&model, EvalOptions::new(EvalMode::Optimal));
        let w = WorldId("w00".into());
        assert!(!eval.evaluate(&w, &parse("[] p").unwrap()).unwrap());
        assert!(eval.evaluate(&w, &parse("[] (p | ~p)").unwrap()).unwrap());
        assert!(eval.evaluate(&w, &parse("[a] p").unwrap()).unwrap());
        assert!(eval.evaluate(&w, &parse("K[a] p").unwrap()).unwrap());
        assert!(!eval.evaluate(&w, &parse("K[b] p").unwrap()).unwrap());
    }

    #[test]
    fn translation_shape_and_cluster_correspondence() {
        let model = KripkeModel::from_file(grid()).unwrap();
        let bt = associated_bt(&model).unwrap();
        assert!(bt.validate().is_empty(), "{:?}", bt.validate());
        assert_eq!(bt.histories().count(), model.worlds().len());
        assert_eq!(bt.moments().len(), 1 + model.class_count() + model.worlds().len());
        let agent = crate::formula::Agent::new("a");
        let m0 = crate::btmodel::MomentId(class_moment(0));
        for cell in model.choice_cells(&agent, 0).unwrap() {
            let kcluster = model.cluster(&agent, &cell.worlds, 0).unwrap();
            let tcell: std::collections::BTreeSet<crate::btmodel::HistoryId> = cell
                .worlds
                .iter()
                .map(|w| crate::btmodel::HistoryId(w.0.clone()))
                .collect();
            let bcluster = bt.epistemic_cluster(&agent, &tcell, &m0, &m0).unwrap();
            let lifted: std::collections::BTreeSet<crate::btmodel::HistoryId> =
                kcluster.iter().map(|w| crate::btmodel::HistoryId(w.0.clone())).collect();
            assert_eq!(bcluster, lifted);
        }
    }

    #[test]
    fn truth_preservation_on_the_grid() {
        let model = KripkeModel::from_file(grid()).unwrap();
        let formulas: Vec<_> = [
            "p", "~p", "[] p", "<> p", "[a] p", "K[b] p", "O[a] p", "Os[a] p",
            "Os[a] K[a] p", "O[b] (p -> K[a] p)",
        ]
        .iter()
        .map(|s| parse(s).unwrap())
        .collect();
        for mode in [EvalMode::Optimal, EvalMode::Dominance] {
            let mismatches =
                verify_truth_preservation(&model, &formulas, EvalOptions::new(mode));
            assert!(mismatches.is_empty(), "{mode}: {mismatches:?}");
        }
    }
}
