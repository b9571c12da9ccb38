//! The three coin-betting scenarios as programmatic fixtures, in two
//! epistemic readings, together with their expected-judgment tables.
//!
//! Shared shape: agent `b` places a coin at the root `m1` (heads up keeps
//! histories h1-h3 open, tails up h4-h6); agent `a` then bets heads, bets
//! tails, or refrains, at `m2` (heads up) or `m3` (tails up). The coin is
//! hidden from `a`, which the two variants capture differently: the `Moment`
//! reading relates every situation at m2 to every situation at m3, while the
//! `Situation` reading uses one information set per action, pairing the bet
//! across the two moments.

use std::fmt;

use crate::btmodel::{BTModel, BtModelFile, Situation};
use crate::formula::parse;
use crate::semantics::{EvalMode, EvalOptions, Evaluator, Judgment};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// The coarse reading: `a` cannot tell the moments apart at all.
    Moment,
    /// Information sets pair each bet with its counterpart at the other
    /// moment.
    Situation,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Moment => f.write_str("moment"),
            Variant::Situation => f.write_str("situation"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "moment" => Ok(Variant::Moment),
            "situation" => Ok(Variant::Situation),
            other => Err(format!("unknown variant {other:?} (expected moment or situation)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PuzzleSpec {
    /// 1, 2, or 3.
    pub id: u8,
    pub variant: Variant,
}

impl PuzzleSpec {
    pub fn new(id: u8, variant: Variant) -> PuzzleSpec {
        assert!((1..=3).contains(&id), "puzzle id must be 1..=3");
        PuzzleSpec { id, variant }
    }
}

/// A golden-table row whose re-evaluation disagreed with the table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuzzleMismatch {
    pub expected: Judgment,
    pub got: bool,
}

impl fmt::Display for PuzzleMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected [{}], got {}", self.expected, self.got)
    }
}

/// Per-history utilities, h1..h6 in order.
fn values(id: u8) -> [i64; 6] {
    match id {
        // Correct call wins 10, wrong call 0, refraining 5.
        1 => [10, 0, 5, 0, 10, 5],
        // Refraining wins 10 as well.
        2 => [10, 0, 10, 0, 10, 10],
        // Refraining wins nothing.
        3 => [10, 0, 0, 0, 10, 0],
        _ => unreachable!("puzzle id must be 1..=3"),
    }
}

fn sit(m: &str, h: &str) -> serde_json::Value {
    serde_json::json!({ "moment": m, "history": h })
}

pub fn build_puzzle(spec: PuzzleSpec) -> BTModel {
    let vals = values(spec.id);
    let value_o: serde_json::Map<String, serde_json::Value> = (0..6)
        .map(|i| (format!("h{}", i + 1), serde_json::Value::String(vals[i].to_string())))
        .collect();

    // Atoms hold at the bet situations, i.e. the moment/history pairs where
    // the relevant transition is being taken.
    let mut valuation = serde_json::Map::new();
    valuation.insert(
        "H".into(),
        serde_json::json!([sit("m2", "h1"), sit("m2", "h2"), sit("m2", "h3")]),
    );
    valuation.insert(
        "T".into(),
        serde_json::json!([sit("m3", "h4"), sit("m3", "h5"), sit("m3", "h6")]),
    );
    valuation.insert("BH".into(), serde_json::json!([sit("m2", "h1"), sit("m3", "h4")]));
    valuation.insert("BT".into(), serde_json::json!([sit("m2", "h2"), sit("m3", "h5")]));
    valuation.insert(
        "G".into(),
        serde_json::json!([sit("m2", "h1"), sit("m2", "h2"), sit("m3", "h4"), sit("m3", "h5")]),
    );
    if spec.id == 3 {
        valuation.insert("W".into(), serde_json::json!([sit("m2", "h1"), sit("m3", "h5")]));
    }

    // Information sets for `a` at m2/m3, per variant. Reflexive closure under
    // the own-action condition additionally groups each moment's situations
    // whose histories share a cell, which at m1 (vacuous cell) is all of them.
    let a_classes = match spec.variant {
        Variant::Moment => serde_json::json!([
            [sit("m1", "h1"), sit("m1", "h2"), sit("m1", "h3"),
             sit("m1", "h4"), sit("m1", "h5"), sit("m1", "h6")],
            [sit("m2", "h1"), sit("m2", "h2"), sit("m2", "h3"),
             sit("m3", "h4"), sit("m3", "h5"), sit("m3", "h6")],
        ]),
        Variant::Situation => serde_json::json!([
            [sit("m1", "h1"), sit("m1", "h2"), sit("m1", "h3"),
             sit("m1", "h4"), sit("m1", "h5"), sit("m1", "h6")],
            [sit("m2", "h1"), sit("m3", "h4")],
            [sit("m2", "h2"), sit("m3", "h5")],
            [sit("m2", "h3"), sit("m3", "h6")],
        ]),
    };
    // `b` knows everything it has done and nothing more: its classes follow
    // its own cells at m1 and are vacuous afterwards.
    let b_classes = serde_json::json!([
        [sit("m1", "h1"), sit("m1", "h2"), sit("m1", "h3")],
        [sit("m1", "h4"), sit("m1", "h5"), sit("m1", "h6")],
        [sit("m2", "h1"), sit("m2", "h2"), sit("m2", "h3")],
        [sit("m3", "h4"), sit("m3", "h5"), sit("m3", "h6")],
    ]);

    let file = serde_json::json!({
        "agents": ["a", "b"],
        "moments": [
            { "id": "m1" },
            { "id": "m2", "parent": "m1" },
            { "id": "m3", "parent": "m1" },
            { "id": "t1", "parent": "m2" },
            { "id": "t2", "parent": "m2" },
            { "id": "t3", "parent": "m2" },
            { "id": "t4", "parent": "m3" },
            { "id": "t5", "parent": "m3" },
            { "id": "t6", "parent": "m3" },
        ],
        "histories": [
            { "id": "h1", "leaf": "t1" },
            { "id": "h2", "leaf": "t2" },
            { "id": "h3", "leaf": "t3" },
            { "id": "h4", "leaf": "t4" },
            { "id": "h5", "leaf": "t5" },
            { "id": "h6", "leaf": "t6" },
        ],
        "choice": [
            { "agent": "b", "moment": "m1",
              "cells": { "L1": ["h1", "h2", "h3"], "L2": ["h4", "h5", "h6"] } },
            { "agent": "a", "moment": "m2",
              "cells": { "L3": ["h1"], "L4": ["h2"], "L5": ["h3"] } },
            { "agent": "a", "moment": "m3",
              "cells": { "L6": ["h4"], "L7": ["h5"], "L8": ["h6"] } },
        ],
        "epistemic": [
            { "agent": "a", "classes": a_classes },
            { "agent": "b", "classes": b_classes },
        ],
        "value_o": value_o,
        "valuation": valuation,
    });
    let file: BtModelFile = serde_json::from_value(file).expect("fixture shape");
    BTModel::from_file(file).expect("fixture builds")
}

fn bet_situations() -> Vec<Situation> {
    vec![
        Situation::new("m2", "h1"),
        Situation::new("m2", "h2"),
        Situation::new("m2", "h3"),
        Situation::new("m3", "h4"),
        Situation::new("m3", "h5"),
        Situation::new("m3", "h6"),
    ]
}

fn row(s: &Situation, f: &str, mode: EvalMode, value: bool) -> Judgment {
    Judgment {
        situation: s.clone(),
        formula: parse(f).expect("golden formula parses"),
        mode,
        value,
    }
}

/// The golden judgment table for one scenario and reading.
pub fn expected_judgments(spec: PuzzleSpec) -> Vec<Judgment> {
    let mut out = Vec::new();
    let sits = bet_situations();
    let all =
        |out: &mut Vec<Judgment>, f: &str, mode: EvalMode, v: bool| {
            for s in &sits {
                out.push(row(s, f, mode, v));
            }
        };
    let here = Situation::new("m2", "h1");
    match (spec.id, spec.variant) {
        (1, Variant::Moment) => {
            // Knowledge of the objective ought recommends gambling.
            all(&mut out, "O[a] G", EvalMode::Optimal, true);
            all(&mut out, "K[a] O[a] G", EvalMode::Optimal, true);
        }
        (1, Variant::Situation) => {
            all(&mut out, "O[a] G", EvalMode::Optimal, true);
            all(&mut out, "K[a] O[a] G", EvalMode::Optimal, true);
            // Subjectively, gambling is not obligatory.
            all(&mut out, "Os[a] G", EvalMode::Optimal, false);
            all(&mut out, "K[a] Os[a] G", EvalMode::Optimal, false);
        }
        (2, Variant::Moment) => {
            // The agent does not know it objectively ought to refrain.
            all(&mut out, "K[a] O[a] ~G", EvalMode::Optimal, false);
        }
        (2, Variant::Situation) => {
            all(&mut out, "K[a] O[a] ~G", EvalMode::Optimal, false);
            // Subjectively it both ought to refrain and knows it.
            all(&mut out, "Os[a] ~G", EvalMode::Optimal, true);
            all(&mut out, "K[a] Os[a] ~G", EvalMode::Optimal, true);
            out.push(row(&here, "Os[a] ~G", EvalMode::Dominance, true));
        }
        (3, Variant::Moment) => {
            all(&mut out, "K[a] O[a] W", EvalMode::Optimal, true);
            // Knowingly winning is impossible: ought does not imply can.
            all(&mut out, "<> K[a] [a] W", EvalMode::Optimal, false);
            all(
                &mut out,
                "K[a] O[a] W -> <> K[a] [a] W",
                EvalMode::Optimal,
                false,
            );
        }
        (3, Variant::Situation) => {
            all(&mut out, "K[a] O[a] W", EvalMode::Optimal, true);
            all(&mut out, "Os[a] W", EvalMode::Optimal, false);
            all(&mut out, "K[a] Os[a] W", EvalMode::Optimal, false);
            out.push(row(&here, "<> K[a] [a] W", EvalMode::Optimal, false));
            out.push(row(
                &here,
                "K[a] O[a] W -> <> K[a] [a] W",
                EvalMode::Optimal,
                false,
            ));
            out.push(row(&here, "O[a] W", EvalMode::Dominance, true));
            out.push(row(
                &here,
                "O[a] W -> <> K[a] [a] W",
                EvalMode::Dominance,
                false,
            ));
        }
        _ => unreachable!("puzzle id must be 1..=3"),
    }
    out
}

/// Re-evaluates every golden row under `mode` and reports disagreements.
/// The tables hold under both modes on these fixtures.
pub fn verify_puzzle(spec: PuzzleSpec, mode: EvalMode) -> Vec<PuzzleMismatch> {
    let model = build_puzzle(spec);
    let eval = Evaluator::new(&model, EvalOptions::new(mode));
    let mut out = Vec::new();
    for judgment in expected_judgments(spec) {
        let got = eval
            .evaluate(&judgment.situation, &judgment.formula)
            .expect("fixture situations are valid");
        if got != judgment.value {
            out.push(PuzzleMismatch {
                expected: Judgment { mode, ..judgment },
                got,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::btmodel::MomentId;
    use crate::formula::Agent;

    fn cell_names(cells: &[crate::btmodel::Cell]) -> Vec<&str> {
        cells.iter().map(|c| c.name.as_str()).collect()
    }

    #[test]
    fn fixtures_validate() {
        for id in 1..=3 {
            for variant in [Variant::Moment, Variant::Situation] {
                let model = build_puzzle(PuzzleSpec::new(id, variant));
                let report = model.validate();
                assert!(report.is_empty(), "puzzle {id} {variant}: {report:?}");
            }
        }
    }

    #[test]
    fn optimal_sets() {
        let a = Agent::new("a");
        let m2 = MomentId("m2".into());
        let m3 = MomentId("m3".into());
        let p = |id| build_puzzle(PuzzleSpec::new(id, Variant::Situation));
        let p1 = p(1);
        assert_eq!(cell_names(&p1.optimal_set(&a, &m2, false).unwrap()), ["L3"]);
        assert_eq!(
            cell_names(&p1.s_optimal_set(&a, &m2, false).unwrap()),
            ["L3", "L4", "L5"]
        );
        assert_eq!(
            cell_names(&p1.s_optimal_set(&a, &m3, false).unwrap()),
            ["L6", "L7", "L8"]
        );
        let p2 = p(2);
        assert_eq!(
            cell_names(&p2.optimal_set(&a, &m2, false).unwrap()),
            ["L3", "L5"]
        );
        assert_eq!(cell_names(&p2.s_optimal_set(&a, &m2, false).unwrap()), ["L5"]);
        assert_eq!(cell_names(&p2.s_optimal_set(&a, &m3, false).unwrap()), ["L8"]);
        let p3 = p(3);
        // Refraining is strictly s-dominated by betting heads here (0 vs 10
        // at m2, 0 vs 0 at m3), so it drops out of the s-optimal set.
        assert_eq!(
            cell_names(&p3.s_optimal_set(&a, &m2, false).unwrap()),
            ["L3", "L4"]
        );
        assert_eq!(
            cell_names(&p3.s_optimal_set(&a, &m3, false).unwrap()),
            ["L6", "L7"]
        );
    }

    #[test]
    fn golden_tables_hold_in_both_modes() {
        for id in 1..=3 {
            for variant in [Variant::Moment, Variant::Situation] {
                for mode in [EvalMode::Optimal, EvalMode::Dominance] {
                    let mismatches = verify_puzzle(PuzzleSpec::new(id, variant), mode);
                    assert!(
                        mismatches.is_empty(),
                        "puzzle {id} {variant} {mode}: {mismatches:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn export_round_trips() {
        let model = build_puzzle(PuzzleSpec::new(1, Variant::Situation));
        let json = serde_json::to_string(&model.to_file()).unwrap();
        let back = BTModel::from_file(serde_json::from_str(&json).unwrap()).unwrap();
        assert!(back.validate().is_empty());
        assert_eq!(
            back.histories().cloned().collect::<Vec<_>>(),
            model.histories().cloned().collect::<Vec<_>>()
        );
    }
}
