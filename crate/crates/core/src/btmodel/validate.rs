//! Frame-constraint validation. Violations are data, not failures; an empty
//! report certifies the model.

use std::collections::BTreeSet;
use std::fmt;

use crate::formula::Agent;

use super::{BTModel, HistoryId, MomentId, Situation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A choice cell is empty.
    EmptyCell {
        agent: Agent,
        moment: MomentId,
        cell: String,
    },
    /// Two choice cells share a history.
    OverlappingCells {
        agent: Agent,
        moment: MomentId,
        cell_a: String,
        cell_b: String,
        history: HistoryId,
    },
    /// A history through the moment is in no cell.
    UncoveredHistory {
        agent: Agent,
        moment: MomentId,
        history: HistoryId,
    },
    /// A cell contains a history that does not pass through the moment.
    ForeignHistory {
        agent: Agent,
        moment: MomentId,
        cell: String,
        history: HistoryId,
    },
    /// (NC) two histories undivided at the moment fall in different cells.
    NoChoiceBetweenUndivided {
        agent: Agent,
        moment: MomentId,
        history_a: HistoryId,
        history_b: HistoryId,
    },
    /// (IA) a selection of one cell per agent has empty intersection.
    IndependenceOfAgency {
        moment: MomentId,
        selection: Vec<(Agent, String)>,
    },
    /// An information set is empty.
    EmptyInformationSet { agent: Agent, index: usize },
    /// A situation appears in two information sets.
    OverlappingInformationSets {
        agent: Agent,
        situation: Situation,
    },
    /// (OAC) a situation relates to a target its cell-mate does not.
    OwnAction {
        agent: Agent,
        source: Situation,
        target: Situation,
        cellmate: HistoryId,
    },
    /// (Unif-H) a history at the source moment has no counterpart at the
    /// related target moment.
    Uniformity {
        agent: Agent,
        source: Situation,
        target_moment: MomentId,
        history: HistoryId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyCell { agent, moment, cell } => {
                write!(f, "partition: cell {cell} of Choice^{moment}_{agent} is empty")
            }
            Violation::OverlappingCells { agent, moment, cell_a, cell_b, history } => write!(
                f,
                "partition: cells {cell_a} and {cell_b} of Choice^{moment}_{agent} both contain {history}"
            ),
            Violation::UncoveredHistory { agent, moment, history } => write!(
                f,
                "partition: history {history} through {moment} is in no cell of Choice^{moment}_{agent}"
            ),
            Violation::ForeignHistory { agent, moment, cell, history } => write!(
                f,
                "partition: cell {cell} of Choice^{moment}_{agent} contains {history}, which does not pass through {moment}"
            ),
            Violation::NoChoiceBetweenUndivided { agent, moment, history_a, history_b } => write!(
                f,
                "NC: histories {history_a} and {history_b} are undivided at {moment} but separated by Choice^{moment}_{agent}"
            ),
            Violation::IndependenceOfAgency { moment, selection } => {
                let sel: Vec<String> =
                    selection.iter().map(|(a, c)| format!("{a}:{c}")).collect();
                write!(
                    f,
                    "IA: selection {{{}}} at {moment} has empty intersection",
                    sel.join(", ")
                )
            }
            Violation::EmptyInformationSet { agent, index } => {
                write!(f, "epistemic: information set #{index} of {agent} is empty")
            }
            Violation::OverlappingInformationSets { agent, situation } => write!(
                f,
                "epistemic: situation {situation} appears in two information sets of {agent}"
            ),
            Violation::OwnAction { agent, source, target, cellmate } => write!(
                f,
                "OAC: {source} ~{agent} {target}, but cell-mate {}/{cellmate} is not related to {target}",
                source.moment
            ),
            Violation::Uniformity { agent, source, target_moment, history } => write!(
                f,
                "Unif-H: {source} ~{agent} some situation at {target_moment}, but {}/{history} relates to no history there",
                source.moment
            ),
        }
    }
}

pub(super) fn validate(model: &BTModel) -> Vec<Violation> {
    let mut out = Vec::new();
    partitions(model, &mut out);
    no_choice_between_undivided(model, &mut out);
    independence_of_agency(model, &mut out);
    information_sets(model, &mut out);
    own_action(model, &mut out);
    uniformity(model, &mut out);
    out.dedup();
    out
}

fn partitions(model: &BTModel, out: &mut Vec<Violation>) {
    for agent in model.agents() {
        for m in model.moments() {
            let h_m = model.histories_through(m).expect("known moment");
            let cells = model.choice_cells(agent, m).expect("known pair");
            let mut seen: Vec<(&str, &HistoryId)> = Vec::new();
            for cell in cells {
                if cell.histories.is_empty() {
                    out.push(Violation::EmptyCell {
                        agent: agent.clone(),
                        moment: m.clone(),
                        cell: cell.name.clone(),
                    });
                }
                for h in &cell.histories {
                    if !h_m.contains(h) {
                        out.push(Violation::ForeignHistory {
                            agent: agent.clone(),
                            moment: m.clone(),
                            cell: cell.name.clone(),
                            history: h.clone(),
                        });
                    }
                    if let Some((other, _)) = seen.iter().find(|(_, h2)| *h2 == h) {
                        out.push(Violation::OverlappingCells {
                            agent: agent.clone(),
                            moment: m.clone(),
                            cell_a: other.to_string(),
                            cell_b: cell.name.clone(),
                            history: h.clone(),
                        });
                    } else {
                        seen.push((&cell.name, h));
                    }
                }
            }
            for h in h_m {
                if !cells.iter().any(|c| c.histories.contains(h)) {
                    out.push(Violation::UncoveredHistory {
                        agent: agent.clone(),
                        moment: m.clone(),
                        history: h.clone(),
                    });
                }
            }
        }
    }
}

/// Two histories through `m` are undivided at `m` iff they continue through
/// the same child of `m`.
fn next_moment<'a>(model: &'a BTModel, m: &MomentId, h: &HistoryId) -> Option<&'a MomentId> {
    let chain = model.history_chain(h).expect("known history");
    let pos = chain.iter().position(|x| x == m)?;
    chain.get(pos + 1)
}

fn no_choice_between_undivided(model: &BTModel, out: &mut Vec<Violation>) {
    for m in model.moments() {
        let hs = model.histories_through_ordered(m).expect("known moment");
        for (i, ha) in hs.iter().enumerate() {
            for hb in &hs[i + 1..] {
                let (Some(na), Some(nb)) = (next_moment(model, m, ha), next_moment(model, m, hb))
                else {
                    continue;
                };
                if na != nb {
                    continue;
                }
                for agent in model.agents() {
                    let ca = model.cell_containing(agent, m, ha);
                    let cb = model.cell_containing(agent, m, hb);
                    if let (Ok(ca), Ok(cb)) = (ca, cb) {
                        if ca.name != cb.name {
                            out.push(Violation::NoChoiceBetweenUndivided {
                                agent: agent.clone(),
                                moment: m.clone(),
                                history_a: ha.clone(),
                                history_b: hb.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
}

fn independence_of_agency(model: &BTModel, out: &mut Vec<Violation>) {
    for m in model.moments() {
        // Exhaustive product over Select^m.
        let per_agent: Vec<(&Agent, &[super::Cell])> = model
            .agents()
            .iter()
            .map(|a| (a, model.choice_cells(a, m).expect("known pair")))
            .collect();
        let mut selections: Vec<(Vec<(Agent, String)>, BTreeSet<HistoryId>)> = vec![(
            Vec::new(),
            model.histories_through(m).expect("known moment").clone(),
        )];
        for (agent, cells) in &per_agent {
            let mut next = Vec::new();
            for (sel, inter) in &selections {
                for cell in *cells {
                    let mut sel2 = sel.clone();
                    sel2.push(((*agent).clone(), cell.name.clone()));
                    let inter2: BTreeSet<HistoryId> =
                        inter.intersection(&cell.histories).cloned().collect();
                    next.push((sel2, inter2));
                }
            }
            selections = next;
        }
        for (sel, inter) in selections {
            if inter.is_empty() {
                out.push(Violation::IndependenceOfAgency {
                    moment: m.clone(),
                    selection: sel,
                });
            }
        }
    }
}

fn information_sets(model: &BTModel, out: &mut Vec<Violation>) {
    for agent in model.agents() {
        let mut seen: BTreeSet<&Situation> = BTreeSet::new();
        for (index, class) in model.epistemic_classes(agent).iter().enumerate() {
            if class.is_empty() {
                out.push(Violation::EmptyInformationSet {
                    agent: agent.clone(),
                    index,
                });
            }
            for s in class {
                if !seen.insert(s) {
                    out.push(Violation::OverlappingInformationSets {
                        agent: agent.clone(),
                        situation: s.clone(),
                    });
                }
            }
        }
    }
}

fn own_action(model: &BTModel, out: &mut Vec<Violation>) {
    for agent in model.agents() {
        for source in model.situations() {
            let class = model.information_set(agent, &source);
            // Broken partitions are reported separately; skip here.
            let Ok(cell) = model.cell_containing(agent, &source.moment, &source.history) else {
                continue;
            };
            let cell = cell.clone();
            for target in &class {
                for cellmate in &cell.histories {
                    let mate = Situation {
                        moment: source.moment.clone(),
                        history: cellmate.clone(),
                    };
                    if !model.related(agent, &mate, target) {
                        out.push(Violation::OwnAction {
                            agent: agent.clone(),
                            source: source.clone(),
                            target: target.clone(),
                            cellmate: cellmate.clone(),
                        });
                    }
                }
            }
        }
    }
}

fn uniformity(model: &BTModel, out: &mut Vec<Violation>) {
    for agent in model.agents() {
        for source in model.situations() {
            let class = model.information_set(agent, &source);
            let target_moments: BTreeSet<&MomentId> =
                class.iter().map(|s| &s.moment).collect();
            for tm in target_moments {
                if *tm == source.moment {
                    continue;
                }
                let h_src = model
                    .histories_through(&source.moment)
                    .expect("known moment");
                let h_tgt = model.histories_through(tm).expect("known moment");
                for h in h_src {
                    let s2 = Situation {
                        moment: source.moment.clone(),
                        history: h.clone(),
                    };
                    let ok = h_tgt.iter().any(|h2| {
                        model.related(
                            agent,
                            &s2,
                            &Situation {
                                moment: (*tm).clone(),
                                history: h2.clone(),
                            },
                        )
                    });
                    if !ok {
                        out.push(Violation::Uniformity {
                            agent: agent.clone(),
                            source: source.clone(),
                            target_moment: (*tm).clone(),
                            history: h.clone(),
                        });
                    }
                }
            }
        }
    }
}
