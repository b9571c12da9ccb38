//! The associated BT model of a Kripke-estit model: a three-level tree with
//! one moment per box class and one history per world, preserving truth at
//! the corresponding situations.

use std::collections::BTreeMap;
use std::fmt;

use crate::btmodel::{
    BTModel, BtModelFile, ChoiceEntry, EpistemicEntry, HistoryNaming, ModelError, MomentEntry,
    Situation, SituationRef,
};
use crate::formula::Formula;
use crate::semantics::{EvalOptions, Evaluator};

use super::{KripkeEvaluator, KripkeModel, WorldId};

pub const ROOT_MOMENT: &str = "__W";

/// The moment id of the box class with the given index.
pub fn class_moment(class: usize) -> String {
    format!("cls_{class}")
}

/// The situation `⟨w̄, h_w⟩` a world corresponds to.
pub fn world_situation(k: &KripkeModel, w: &WorldId) -> Situation {
    let class = k.class_of(w).expect("world of the model");
    Situation::new(class_moment(class), w.0.clone())
}

/// Builds the associated BT model: root `__W`, one moment per box class, one
/// leaf moment and history per world. Choice and the epistemic relation are
/// lifted at class moments and left vacuous at the root and the leaves;
/// atoms hold only at the `⟨w̄, h_w⟩` situations.
pub fn associated_bt(k: &KripkeModel) -> Result<BTModel, ModelError> {
    let mut moments = vec![MomentEntry {
        id: ROOT_MOMENT.to_owned(),
        parent: None,
    }];
    for class in 0..k.class_count() {
        moments.push(MomentEntry {
            id: class_moment(class),
            parent: Some(ROOT_MOMENT.to_owned()),
        });
    }
    let mut histories = Vec::new();
    for w in k.worlds() {
        let class = k.class_of(w).expect("world of the model");
        moments.push(MomentEntry {
            id: w.0.clone(),
            parent: Some(class_moment(class)),
        });
        histories.push(HistoryNaming {
            id: w.0.clone(),
            leaf: w.0.clone(),
        });
    }

    let mut choice = Vec::new();
    for agent in k.agents() {
        for class in 0..k.class_count() {
            let cells = k
                .choice_cells(agent, class)
                .expect("known agent and class");
            choice.push(ChoiceEntry {
                agent: agent.0.clone(),
                moment: class_moment(class),
                cells: cells
                    .iter()
                    .map(|c| {
                        (c.name.clone(), c.worlds.iter().map(|w| w.0.clone()).collect())
                    })
                    .collect(),
            });
        }
    }

    // Lifted epistemic classes at the class moments, plus the universal class
    // at the root; leaf situations stay implicit singletons.
    let mut epistemic = Vec::new();
    let root_class: Vec<SituationRef> = k
        .worlds()
        .iter()
        .map(|w| SituationRef {
            moment: ROOT_MOMENT.to_owned(),
            history: w.0.clone(),
        })
        .collect();
    for agent in k.agents() {
        let mut classes: Vec<Vec<SituationRef>> = vec![root_class.clone()];
        for class in k.epistemic_classes(agent) {
            classes.push(
                class
                    .iter()
                    .map(|w| {
                        let s = world_situation(k, w);
                        SituationRef {
                            moment: s.moment.0,
                            history: s.history.0,
                        }
                    })
                    .collect(),
            );
        }
        epistemic.push(EpistemicEntry {
            agent: agent.0.clone(),
            classes,
        });
    }

    let kfile = k.to_file();
    let mut valuation: BTreeMap<String, Vec<SituationRef>> = BTreeMap::new();
    for (atom, ws) in &kfile.valuation {
        valuation.insert(
            atom.clone(),
            ws.iter()
                .map(|w| {
                    let s = world_situation(k, &WorldId(w.clone()));
                    SituationRef {
                        moment: s.moment.0,
                        history: s.history.0,
                    }
                })
                .collect(),
        );
    }

    BTModel::from_file(BtModelFile {
        agents: kfile.agents,
        moments,
        histories: Some(histories),
        choice,
        epistemic,
        value_o: kfile.value_o,
        value_s: kfile.value_s,
        valuation,
    })
}

/// A world/formula pair on which the two semantics disagreed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthMismatch {
    pub world: WorldId,
    pub formula: Formula,
    pub kripke: bool,
    pub bt: bool,
}

impl fmt::Display for TruthMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: kripke={} bt={}  {}",
            self.world, self.kripke, self.bt, self.formula
        )
    }
}

/// Evaluates every formula at every world under both semantics and reports
/// disagreements (expected: none).
pub fn verify_truth_preservation(
    k: &KripkeModel,
    formulas: &[Formula],
    opts: EvalOptions,
) -> Vec<TruthMismatch> {
    let bt = associated_bt(k).expect("translation builds");
    let keval = KripkeEvaluator::new(k, opts);
    let beval = Evaluator::new(&bt, opts);
    let mut out = Vec::new();
    for f in formulas {
        for w in k.worlds() {
            let kv = keval.evaluate(w, f).expect("valid world");
            let bv = beval
                .evaluate(&world_situation(k, w), f)
                .expect("valid situation");
            if kv != bv {
                out.push(TruthMismatch {
                    world: w.clone(),
                    formula: f.clone(),
                    kripke: kv,
                    bt: bv,
                });
            }
        }
    }
    out
}
