//! End-to-end acceptance suite. One criterion per block; the single test
//! prints one pass/fail line per criterion and fails if any block fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use estit::axioms::{
    axiom_catalog, random_formulas, random_kripke, random_kripke_mutated, soundness_sweep,
    soundness_sweep_mutated, GeneratorParams, Mutation, SweepSemantics,
};
use estit::btmodel::{BTModel, Flavor, HistoryId, MomentId, Situation};
use estit::formula::{parse, Agent, Formula, Schema, SchemaKind};
use estit::kripke::{
    associated_bt, class_moment, verify_truth_preservation, KripkeModel,
};
use estit::puzzles::{build_puzzle, verify_puzzle, PuzzleSpec, Variant};
use estit::semantics::{EvalMode, EvalOptions, Evaluator};

struct Outcome {
    name: &'static str,
    errors: Vec<String>,
    elapsed: Duration,
}

fn run(name: &'static str, body: impl FnOnce(&mut Vec<String>)) -> Outcome {
    let start = Instant::now();
    let mut errors = Vec::new();
    body(&mut errors);
    Outcome {
        name,
        errors,
        elapsed: start.elapsed(),
    }
}

fn models(count: usize) -> Vec<KripkeModel> {
    (1..=count as u64)
        .map(|seed| random_kripke(&GeneratorParams { seed, ..Default::default() }))
        .collect()
}

fn model_atoms(k: &KripkeModel) -> Vec<String> {
    k.to_file().valuation.keys().cloned().collect()
}

/// A closed random instance of a schema over the given atoms and agents.
fn instance(
    schema: &Schema,
    rng: &mut ChaCha8Rng,
    atoms: &[String],
    agents: &[Agent],
) -> Formula {
    let arity = match schema.kind {
        SchemaKind::IndependenceFamily => Some(rng.gen_range(1..=agents.len())),
        _ => None,
    };
    let (prop_vars, agent_vars) = schema.variables(arity.unwrap_or(0));
    let bodies = random_formulas(rng.gen(), prop_vars.len(), 2, atoms, agents);
    let props: BTreeMap<String, Formula> =
        prop_vars.into_iter().zip(bodies).collect();
    let mut pool: Vec<Agent> = agents.to_vec();
    pool.shuffle(rng);
    let bound: BTreeMap<String, Agent> = agent_vars
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, pool[i % pool.len()].clone()))
        .collect();
    schema.substitute(&props, &bound, arity).unwrap()
}

fn criterion_1(errors: &mut Vec<String>) {
    for id in 1..=3u8 {
        let spec = PuzzleSpec::new(id, Variant::Situation);
        let mismatches = verify_puzzle(spec, EvalMode::Optimal);
        if !mismatches.is_empty() {
            errors.push(format!("puzzle {id}: {} golden-table mismatches", mismatches.len()));
        }
    }
    let a = Agent::new("a");
    let expected: [(u8, &[&str], &[&str]); 2] = [
        (1, &["L3", "L4", "L5"], &["L6", "L7", "L8"]),
        (2, &["L5"], &["L8"]),
    ];
    for (id, at_m2, at_m3) in expected {
        let model = build_puzzle(PuzzleSpec::new(id, Variant::Situation));
        for (m, want) in [("m2", at_m2), ("m3", at_m3)] {
            let mut got: Vec<String> = model
                .s_optimal_set(&a, &MomentId(m.to_owned()), false)
                .unwrap()
                .iter()
                .map(|c| c.name.clone())
                .collect();
            got.sort();
            if got != want {
                errors.push(format!("puzzle {id} S-Optimal^{m}: got {got:?}, want {want:?}"));
            }
        }
    }
}

fn criterion_2(errors: &mut Vec<String>) {
    let cases = [
        (3u8, "O[a] W -> <> K[a] [a] W"),
        (3, "O[a] W -> Os[a] W"),
        (2, "Os[a] ~G -> O[a] ~G"),
    ];
    let want = Situation::new("m2", "h1");
    for (id, text) in cases {
        let model = build_puzzle(PuzzleSpec::new(id, Variant::Situation));
        let eval = Evaluator::new(&model, EvalOptions::dominance());
        let f = parse(text).unwrap();
        match eval.check_validity(&f).unwrap() {
            Some(s) if s == want => {}
            Some(s) => errors.push(format!("{text:?}: counterexample at {s}, want {want}")),
            None => errors.push(format!("{text:?}: reported valid on puzzle {id}")),
        }
    }
}

fn criterion_3(errors: &mut Vec<String>) {
    let params = GeneratorParams::default();
    let report = soundness_sweep(&params, 200, 20, SweepSemantics::Both, EvalMode::Dominance);
    if !report.passed() {
        errors.push(format!("{} counterexamples:\n{report}", report.counterexamples.len()));
    }
}

fn criterion_4(errors: &mut Vec<String>) {
    for (i, model) in models(100).iter().enumerate() {
        let atoms = model_atoms(model);
        let formulas =
            random_formulas(0x5eed ^ i as u64, 100, 3, &atoms, model.agents());
        for mode in [EvalMode::Optimal, EvalMode::Dominance] {
            let mismatches =
                verify_truth_preservation(model, &formulas, EvalOptions::new(mode));
            if !mismatches.is_empty() {
                errors.push(format!(
                    "model {}: {} mismatches in {mode} mode, first: {}",
                    i + 1,
                    mismatches.len(),
                    mismatches[0]
                ));
            }
        }
    }
}

fn criterion_5(errors: &mut Vec<String>) {
    for (i, model) in models(100).iter().enumerate() {
        let bt = associated_bt(model).unwrap();
        for agent in model.agents() {
            for class in 0..model.class_count() {
                let cells = model.choice_cells(agent, class).unwrap();
                let m = MomentId(class_moment(class));
                for l in cells {
                    for n in cells {
                        for flavor in [Flavor::Objective, Flavor::Subjective] {
                            for relativized in [false, true] {
                                let kv = model
                                    .compare(agent, class, &l.worlds, &n.worlds, flavor, relativized)
                                    .unwrap();
                                let lift = |c: &std::collections::BTreeSet<
                                    estit::kripke::WorldId,
                                >| {
                                    c.iter().map(|w| HistoryId(w.0.clone())).collect()
                                };
                                let bv = bt
                                    .compare(agent, &m, &lift(&l.worlds), &lift(&n.worlds), flavor, relativized)
                                    .unwrap();
                                if kv != bv {
                                    errors.push(format!(
                                        "model {}: {agent} class {class} {}/{} {flavor:?} rel={relativized}: kripke {kv:?} vs bt {bv:?}",
                                        i + 1, l.name, n.name
                                    ));
                                    if errors.len() > 5 {
                                        return;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn criterion_6(errors: &mut Vec<String>) {
    let fixtures: Vec<BTModel> = (1..=3u8)
        .flat_map(|id| {
            [Variant::Moment, Variant::Situation]
                .map(|v| build_puzzle(PuzzleSpec::new(id, v)))
        })
        .collect();
    let random = models(100);
    let catalog = axiom_catalog();
    let s5: Vec<&Schema> = catalog
        .iter()
        .filter(|s| {
            s.name.starts_with("box.") || s.name.starts_with("stit.") || s.name.starts_with("know.")
        })
        .collect();
    assert_eq!(s5.len(), 12);
    let cl = catalog.iter().find(|s| s.name == "Cl").unwrap();
    let opts_dom = EvalOptions::dominance();
    let mut opts_opt_rel = EvalOptions::optimal();
    opts_opt_rel.relativized_optimal = true;

    // S5 sweeps, (Cl)-settledness, moment-determinacy, and mode monotonicity
    // over the fixtures.
    for (fi, model) in fixtures.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(fi as u64 + 11);
        let atoms: Vec<String> = model.atoms().cloned().collect();
        let eval = Evaluator::new(model, opts_dom);
        for schema in s5.iter().copied().chain([cl]) {
            for _ in 0..5 {
                let f = instance(schema, &mut rng, &atoms, model.agents());
                if let Some(s) = eval.check_validity(&f).unwrap() {
                    errors.push(format!("fixture {fi}: {} instance {f} fails at {s}", schema.name));
                }
            }
        }
        let eval_opt = Evaluator::new(model, opts_opt_rel);
        for _ in 0..20 {
            let body = random_formulas(rng.gen(), 1, 2, &atoms, model.agents()).remove(0);
            let agent = model.agents().choose(&mut rng).unwrap().clone();
            for f in [
                Formula::nec(body.clone()),
                Formula::ObjOught(agent.clone(), Box::new(body.clone())),
                Formula::SubjOught(agent.clone(), Box::new(body.clone())),
            ] {
                for m in model.moments() {
                    let ext = eval.extension(m, &f).unwrap();
                    let all = model.histories_through(m).unwrap();
                    if !ext.is_empty() && ext != *all {
                        errors.push(format!("fixture {fi}: {f} not moment-determined at {}", m.0));
                    }
                }
                if matches!(f, Formula::Nec(_)) {
                    continue;
                }
                for s in model.situations() {
                    let dom = eval.evaluate(&s, &f).unwrap();
                    let opt = eval_opt.evaluate(&s, &f).unwrap();
                    if dom && !opt {
                        errors.push(format!("fixture {fi}: {f} at {s}: dominance true, optimal false"));
                    }
                }
            }
        }
    }

    // The same suites over the random models, under the world semantics.
    for (i, model) in random.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64 + 1_000);
        let atoms = model_atoms(model);
        let keval = estit::kripke::KripkeEvaluator::new(model, opts_dom);
        for schema in s5.iter().copied().chain([cl]) {
            for _ in 0..3 {
                let f = instance(schema, &mut rng, &atoms, model.agents());
                if let Some(w) = keval.check_validity(&f).unwrap() {
                    errors.push(format!("model {}: {} instance {f} fails at {w}", i + 1, schema.name));
                    if errors.len() > 8 {
                        return;
                    }
                }
            }
        }
        let keval_opt = estit::kripke::KripkeEvaluator::new(model, opts_opt_rel);
        for _ in 0..5 {
            let body = random_formulas(rng.gen(), 1, 2, &atoms, model.agents()).remove(0);
            let agent = model.agents().choose(&mut rng).unwrap().clone();
            for f in [
                Formula::nec(body.clone()),
                Formula::ObjOught(agent.clone(), Box::new(body.clone())),
                Formula::SubjOught(agent.clone(), Box::new(body.clone())),
            ] {
                for class in 0..model.class_count() {
                    let worlds = model.class_worlds(class).unwrap();
                    let values: Vec<bool> = worlds
                        .iter()
                        .map(|w| keval.evaluate(w, &f).unwrap())
                        .collect();
                    if values.iter().any(|v| *v) && !values.iter().all(|v| *v) {
                        errors.push(format!(
                            "model {}: {f} not class-determined at class {class}",
                            i + 1
                        ));
                    }
                }
                if matches!(f, Formula::Nec(_)) {
                    continue;
                }
                for w in model.worlds() {
                    let dom = keval.evaluate(w, &f).unwrap();
                    let opt = keval_opt.evaluate(w, &f).unwrap();
                    if dom && !opt {
                        errors.push(format!(
                            "model {}: {f} at {w}: dominance true, optimal false",
                            i + 1
                        ));
                    }
                }
            }
        }
    }
}

fn criterion_7(errors: &mut Vec<String>) {
    let params = GeneratorParams::default();
    for (mutation, schema) in [
        (Mutation::BreakOac, "OAC"),
        (Mutation::BreakUnifH, "Unif-H"),
        (Mutation::BreakIa, "IA"),
    ] {
        let caught = (1..=200u64).any(|seed| {
            !random_kripke_mutated(&GeneratorParams { seed, ..params }, mutation)
                .validate()
                .is_empty()
        });
        if !caught {
            errors.push(format!("{mutation:?}: never flagged by the validator"));
        }
        let report = soundness_sweep_mutated(
            &params,
            200,
            20,
            SweepSemantics::Both,
            EvalMode::Dominance,
            Some(mutation),
        );
        if !report.counterexamples.iter().any(|ce| ce.schema == schema) {
            errors.push(format!(
                "{mutation:?}: no {schema} counterexample among {} found",
                report.counterexamples.len()
            ));
        }
    }
}

#[test]
fn acceptance_criteria() {
    let outcomes = vec![
        run("1. puzzle golden tables", criterion_1),
        run("2. non-validity certificates", criterion_2),
        run("3. soundness sweep (200 models)", criterion_3),
        run("4. truth preservation (100x100)", criterion_4),
        run("5. ordering correspondence", criterion_5),
        run("6. property suites", criterion_6),
        run("7. validator sensitivity", criterion_7),
    ];
    let mut failed = false;
    for o in &outcomes {
        let status = if o.errors.is_empty() { "pass" } else { "FAIL" };
        println!("criterion {:<34} {status}  ({:.2?})", o.name, o.elapsed);
        for e in &o.errors {
            failed = true;
            println!("    {e}");
        }
    }
    // Runtime budgets: puzzles under a second, the big sweeps well bounded.
    assert!(outcomes[0].elapsed < Duration::from_secs(1), "criterion 1 too slow");
    assert!(outcomes[2].elapsed < Duration::from_secs(60), "criterion 3 too slow");
    assert!(outcomes[3].elapsed < Duration::from_secs(30), "criterion 4 too slow");
    assert!(!failed, "acceptance criteria failed");
}
