//! JSON model file format and model construction.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::formula::Agent;
use crate::value::Utility;

use super::{
    BTModel, Cell, HistoryId, HistoryRecord, ModelError, MomentId, Situation,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistoryNaming {
    pub id: String,
    pub leaf: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChoiceEntry {
    pub agent: String,
    pub moment: String,
    pub cells: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SituationRef {
    pub moment: String,
    pub history: String,
}

impl SituationRef {
    fn to_situation(&self) -> Situation {
        Situation {
            moment: MomentId(self.moment.clone()),
            history: HistoryId(self.history.clone()),
        }
    }

    fn of(s: &Situation) -> SituationRef {
        SituationRef {
            moment: s.moment.0.clone(),
            history: s.history.0.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpistemicEntry {
    pub agent: String,
    pub classes: Vec<Vec<SituationRef>>,
}

/// The on-disk shape of a BT model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BtModelFile {
    pub agents: Vec<String>,
    pub moments: Vec<MomentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub histories: Option<Vec<HistoryNaming>>,
    #[serde(default)]
    pub choice: Vec<ChoiceEntry>,
    #[serde(default)]
    pub epistemic: Vec<EpistemicEntry>,
    pub value_o: BTreeMap<String, Utility>,
    /// Defaults to `value_o` when absent (single-valued models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_s: Option<BTreeMap<String, Utility>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<SituationRef>>,
}

pub(super) fn build(file: BtModelFile) -> Result<BTModel, ModelError> {
    if file.agents.is_empty() {
        return Err(ModelError::NoAgents);
    }
    let mut agents = Vec::new();
    for a in &file.agents {
        let a = Agent::new(a.clone());
        if agents.contains(&a) {
            return Err(ModelError::DuplicateId(a.0));
        }
        agents.push(a);
    }

    // Moment tree.
    let mut moment_order = Vec::new();
    let mut parent = BTreeMap::new();
    for entry in &file.moments {
        let id = MomentId(entry.id.clone());
        if moment_order.contains(&id) {
            return Err(ModelError::DuplicateId(entry.id.clone()));
        }
        moment_order.push(id);
    }
    let mut roots = Vec::new();
    for entry in &file.moments {
        let id = MomentId(entry.id.clone());
        match &entry.parent {
            Some(p) => {
                let p = MomentId(p.clone());
                if !moment_order.contains(&p) {
                    return Err(ModelError::UnknownMoment(p));
                }
                parent.insert(id, p);
            }
            None => roots.push(id),
        }
    }
    if roots.len() != 1 {
        return Err(ModelError::RootCount(roots.len()));
    }
    let root = roots.pop().expect("one root");
    // Cycle detection: every moment must reach the root.
    for m in &moment_order {
        let mut cur = m.clone();
        let mut steps = 0;
        while let Some(p) = parent.get(&cur) {
            cur = p.clone();
            steps += 1;
            if steps > moment_order.len() {
                return Err(ModelError::ParentCycle(m.clone()));
            }
        }
        if cur != root {
            return Err(ModelError::ParentCycle(m.clone()));
        }
    }
    let mut children: BTreeMap<MomentId, Vec<MomentId>> = BTreeMap::new();
    for m in &moment_order {
        if let Some(p) = parent.get(m) {
            children.entry(p.clone()).or_default().push(m.clone());
        }
    }

    // Histories: one maximal chain per leaf, in moment file order.
    let leaves: Vec<MomentId> = moment_order
        .iter()
        .filter(|m| !children.contains_key(*m))
        .cloned()
        .collect();
    let naming: BTreeMap<MomentId, HistoryId> = match &file.histories {
        Some(entries) => {
            let mut map = BTreeMap::new();
            let mut used = BTreeSet::new();
            for e in entries {
                let leaf = MomentId(e.leaf.clone());
                if !leaves.contains(&leaf) {
                    return Err(ModelError::HistoryNaming(leaf));
                }
                if map.insert(leaf.clone(), HistoryId(e.id.clone())).is_some() {
                    return Err(ModelError::HistoryNaming(leaf));
                }
                if !used.insert(e.id.clone()) {
                    return Err(ModelError::DuplicateId(e.id.clone()));
                }
            }
            for leaf in &leaves {
                if !map.contains_key(leaf) {
                    return Err(ModelError::HistoryNaming(leaf.clone()));
                }
            }
            map
        }
        None => leaves
            .iter()
            .enumerate()
            .map(|(i, leaf)| (leaf.clone(), HistoryId(format!("h{}", i + 1))))
            .collect(),
    };
    let mut histories = Vec::new();
    let mut history_pos = BTreeMap::new();
    let mut histories_at: BTreeMap<MomentId, BTreeSet<HistoryId>> = moment_order
        .iter()
        .map(|m| (m.clone(), BTreeSet::new()))
        .collect();
    for leaf in &leaves {
        let id = naming[leaf].clone();
        let mut chain = vec![leaf.clone()];
        let mut cur = leaf.clone();
        while let Some(p) = parent.get(&cur) {
            chain.push(p.clone());
            cur = p.clone();
        }
        chain.reverse();
        for m in &chain {
            histories_at.get_mut(m).expect("known moment").insert(id.clone());
        }
        history_pos.insert(id.clone(), histories.len());
        histories.push(HistoryRecord { id, chain });
    }

    // Values. value_s defaults to value_o.
    let mut value_o = BTreeMap::new();
    for (h, v) in &file.value_o {
        let h = HistoryId(h.clone());
        if !history_pos.contains_key(&h) {
            return Err(ModelError::UnknownHistory(h));
        }
        value_o.insert(h, *v);
    }
    for rec in &histories {
        if !value_o.contains_key(&rec.id) {
            return Err(ModelError::MissingValue(rec.id.clone()));
        }
    }
    let value_s = match &file.value_s {
        None => value_o.clone(),
        Some(map) => {
            let mut out = BTreeMap::new();
            for (h, v) in map {
                let h = HistoryId(h.clone());
                if !history_pos.contains_key(&h) {
                    return Err(ModelError::UnknownHistory(h));
                }
                out.insert(h, *v);
            }
            for rec in &histories {
                if !out.contains_key(&rec.id) {
                    return Err(ModelError::MissingValue(rec.id.clone()));
                }
            }
            out
        }
    };

    // Choice partitions; absent entries get the vacuous partition.
    let mut choice: BTreeMap<(Agent, MomentId), Vec<Cell>> = BTreeMap::new();
    let mut explicit_choice = BTreeSet::new();
    for entry in &file.choice {
        let agent = Agent::new(entry.agent.clone());
        if !agents.contains(&agent) {
            return Err(ModelError::UnknownAgent(agent));
        }
        let m = MomentId(entry.moment.clone());
        if !histories_at.contains_key(&m) {
            return Err(ModelError::UnknownMoment(m));
        }
        let mut cells = Vec::new();
        for (name, hs) in &entry.cells {
            let mut set = BTreeSet::new();
            for h in hs {
                let h = HistoryId(h.clone());
                if !history_pos.contains_key(&h) {
                    return Err(ModelError::UnknownHistory(h));
                }
                set.insert(h);
            }
            cells.push(Cell {
                name: name.clone(),
                histories: set,
            });
        }
        let key = (agent.clone(), m.clone());
        if choice.insert(key.clone(), cells).is_some() {
            return Err(ModelError::DuplicateId(format!(
                "choice for {} at {}",
                agent, m
            )));
        }
        explicit_choice.insert(key);
    }
    for agent in &agents {
        for m in &moment_order {
            let key = (agent.clone(), m.clone());
            choice.entry(key).or_insert_with(|| {
                vec![Cell {
                    name: "all".to_owned(),
                    histories: histories_at[m].clone(),
                }]
            });
        }
    }

    // Epistemic information sets; singletons are implicit.
    let mut epistemic: BTreeMap<Agent, Vec<BTreeSet<Situation>>> = BTreeMap::new();
    let mut class_of: BTreeMap<(Agent, Situation), usize> = BTreeMap::new();
    for entry in &file.epistemic {
        let agent = Agent::new(entry.agent.clone());
        if !agents.contains(&agent) {
            return Err(ModelError::UnknownAgent(agent));
        }
        let classes = epistemic.entry(agent.clone()).or_default();
        for class in &entry.classes {
            let mut set = BTreeSet::new();
            for sref in class {
                let s = sref.to_situation();
                if !histories_at.contains_key(&s.moment) {
                    return Err(ModelError::UnknownMoment(s.moment));
                }
                if !history_pos.contains_key(&s.history) {
                    return Err(ModelError::UnknownHistory(s.history));
                }
                if !histories_at[&s.moment].contains(&s.history) {
                    return Err(ModelError::InvalidSituation(s));
                }
                set.insert(s);
            }
            let idx = classes.len();
            for s in &set {
                // First class wins on overlap; the validator reports overlaps.
                class_of.entry((agent.clone(), s.clone())).or_insert(idx);
            }
            classes.push(set);
        }
    }

    // Valuation.
    let mut valuation: BTreeMap<String, BTreeSet<Situation>> = BTreeMap::new();
    for (atom, sits) in &file.valuation {
        let mut set = BTreeSet::new();
        for sref in sits {
            let s = sref.to_situation();
            if !histories_at.contains_key(&s.moment) {
                return Err(ModelError::UnknownMoment(s.moment));
            }
            if !history_pos.contains_key(&s.history) {
                return Err(ModelError::UnknownHistory(s.history));
            }
            if !histories_at[&s.moment].contains(&s.history) {
                return Err(ModelError::InvalidSituation(s));
            }
            set.insert(s);
        }
        valuation.insert(atom.clone(), set);
    }

    Ok(BTModel {
        agents,
        moment_order,
        parent,
        children,
        root,
        histories,
        history_pos,
        histories_at,
        choice,
        explicit_choice,
        epistemic,
        class_of,
        value_o,
        value_s,
        valuation,
    })
}

pub(super) fn dump(model: &BTModel) -> BtModelFile {
    let moments = model
        .moment_order
        .iter()
        .map(|m| MomentEntry {
            id: m.0.clone(),
            parent: model.parent.get(m).map(|p| p.0.clone()),
        })
        .collect();
    let histories = model
        .histories
        .iter()
        .map(|h| HistoryNaming {
            id: h.id.0.clone(),
            leaf: h.chain.last().expect("nonempty chain").0.clone(),
        })
        .collect();
    let choice = model
        .explicit_choice
        .iter()
        .map(|(agent, m)| ChoiceEntry {
            agent: agent.0.clone(),
            moment: m.0.clone(),
            cells: model.choice[&(agent.clone(), m.clone())]
                .iter()
                .map(|c| {
                    (
                        c.name.clone(),
                        c.histories.iter().map(|h| h.0.clone()).collect(),
                    )
                })
                .collect(),
        })
        .collect();
    let epistemic = model
        .epistemic
        .iter()
        .filter(|(_, classes)| !classes.is_empty())
        .map(|(agent, classes)| EpistemicEntry {
            agent: agent.0.clone(),
            classes: classes
                .iter()
                .map(|class| class.iter().map(SituationRef::of).collect())
                .collect(),
        })
        .collect();
    BtModelFile {
        agents: model.agents.iter().map(|a| a.0.clone()).collect(),
        moments,
        histories: Some(histories),
        choice,
        epistemic,
        value_o: model
            .value_o
            .iter()
            .map(|(h, v)| (h.0.clone(), *v))
            .collect(),
        value_s: Some(
            model
                .value_s
                .iter()
                .map(|(h, v)| (h.0.clone(), *v))
                .collect(),
        ),
        valuation: model
            .valuation
            .iter()
            .map(|(atom, sits)| (atom.clone(), sits.iter().map(SituationRef::of).collect()))
            .collect(),
    }
}
