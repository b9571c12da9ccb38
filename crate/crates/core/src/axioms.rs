//! The axiom catalog, random constraint-satisfying model generation, and the
//! empirical soundness sweep.

use std::collections::BTreeMap;
use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::formula::{Agent, Formula, Schema, SchemaKind};
use crate::kripke::{
    associated_bt, KChoiceEntry, KEpistemicEntry, KripkeEvaluator, KripkeFile,
    KripkeModel,
};
use crate::semantics::{EvalMode, EvalOptions, Evaluator};
use crate::value::Utility;

/// Every schema of the proof system, the independence family last.
pub fn axiom_catalog() -> Vec<Schema> {
    let mut out = Vec::new();
    // S5 blocks for historical necessity, agency, and knowledge.
    for (tag, op) in [("box", "[]"), ("stit", "[A]"), ("know", "K[A]")] {
        out.push(Schema::fixed(
            &format!("{tag}.K"),
            &format!("{op}(p -> q) -> ({op} p -> {op} q)"),
            &["p", "q"],
            &["A"],
        ));
        out.push(Schema::fixed(&format!("{tag}.T"), &format!("{op} p -> p"), &["p"], &["A"]));
        out.push(Schema::fixed(
            &format!("{tag}.4"),
            &format!("{op} p -> {op} {op} p"),
            &["p"],
            &["A"],
        ));
        out.push(Schema::fixed(
            &format!("{tag}.5"),
            &format!("~{op}~p -> {op} ~{op}~p"),
            &["p"],
            &["A"],
        ));
    }
    out.push(Schema::fixed(
        "A1",
        "O[A](p -> q) -> (O[A] p -> O[A] q)",
        &["p", "q"],
        &["A"],
    ));
    out.push(Schema::fixed("A2", "[] p -> [A] p & O[A] p", &["p"], &["A"]));
    out.push(Schema::fixed("A3", "[] O[A] p | [] ~O[A] p", &["p"], &["A"]));
    out.push(Schema::fixed("A4", "O[A] p -> O[A] [A] p", &["p"], &["A"]));
    out.push(Schema::fixed("Oic", "O[A] p -> <> [A] p", &["p"], &["A"]));
    out.push(Schema::fixed(
        "A5",
        "Os[A](p -> q) -> (Os[A] p -> Os[A] q)",
        &["p", "q"],
        &["A"],
    ));
    out.push(Schema::fixed("A6", "Os[A] p -> Os[A] K[A] p", &["p"], &["A"]));
    out.push(Schema::fixed("OAC", "K[A] p -> [A] p", &["p"], &["A"]));
    out.push(Schema::fixed("Unif-H", "<> K[A] p -> K[A] <> p", &["p"], &["A"]));
    out.push(Schema::fixed("s.N", "K[A] [] p -> Os[A] p", &["p"], &["A"]));
    out.push(Schema::fixed("s.Oic", "Os[A] p -> <> K[A] p", &["p"], &["A"]));
    out.push(Schema::fixed("Cl", "Os[A] p -> K[A] [] Os[A] p", &["p"], &["A"]));
    out.push(Schema::independence_family());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorParams {
    pub seed: u64,
    /// Upper bounds; the generator draws the actual sizes.
    pub class_count: usize,
    pub agent_count: usize,
    pub cells_per_agent: usize,
    pub value_min: i64,
    pub value_max: i64,
    pub atom_count: usize,
    pub formula_depth: usize,
    /// Probability that a box class joins the previous epistemic block.
    pub epistemic_block_bias: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 1,
            class_count: 3,
            agent_count: 3,
            cells_per_agent: 3,
            value_min: 0,
            value_max: 5,
            atom_count: 3,
            formula_depth: 2,
            epistemic_block_bias: 0.6,
        }
    }
}

/// Targeted constraint breakers for validator- and sweep-sensitivity tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Detach one world from its cell's epistemic group.
    BreakOac,
    /// Cut one cell's cross-class epistemic links.
    BreakUnifH,
    /// Delete one world from the selection grid.
    BreakIa,
}

const AGENT_NAMES: [&str; 3] = ["a", "b", "c"];
const ATOM_NAMES: [&str; 4] = ["p", "q", "r", "s"];

/// Generates a model satisfying every frame constraint, deterministically
/// per seed. Worlds within a class form the Cartesian grid of one cell per
/// agent, which forces independence of agency; epistemic classes are unions
/// of the agent's own cells (own action), grouped so that every group draws
/// from each box class of its block (uniformity).
pub fn random_kripke(params: &GeneratorParams) -> KripkeModel {
    build_kripke(params, None)
}

/// Like [`random_kripke`], then applies one targeted constraint breaker.
/// Some seeds offer no room for a given mutation (for instance no
/// multi-world cell to split); those models are returned unmutated.
pub fn random_kripke_mutated(params: &GeneratorParams, mutation: Mutation) -> KripkeModel {
    build_kripke(params, Some(mutation))
}

fn build_kripke(params: &GeneratorParams, mutation: Option<Mutation>) -> KripkeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n_classes = rng.gen_range(1..=params.class_count.max(1));
    let n_agents = rng.gen_range(1..=params.agent_count.clamp(1, 3));
    let agents: Vec<String> = AGENT_NAMES[..n_agents].iter().map(|s| s.to_string()).collect();

    // Per class, per agent: how many cells.
    let mut cell_counts: Vec<Vec<usize>> = Vec::new();
    for _ in 0..n_classes {
        cell_counts.push(
            (0..n_agents)
                .map(|_| rng.gen_range(1..=params.cells_per_agent.max(1)))
                .collect(),
        );
    }

    // Worlds: one per point of each class's cell grid.
    let mut worlds: Vec<String> = Vec::new();
    let mut box_classes: Vec<Vec<String>> = Vec::new();
    // (class, agent, cell index) -> worlds.
    let mut cell_worlds: BTreeMap<(usize, usize, usize), Vec<String>> = BTreeMap::new();
    for (c, counts) in cell_counts.iter().enumerate() {
        let mut class_members = Vec::new();
        let mut coords = vec![0usize; n_agents];
        loop {
            let name = format!(
                "w{}_{}",
                c,
                coords.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("")
            );
            for (a, x) in coords.iter().enumerate() {
                cell_worlds.entry((c, a, *x)).or_default().push(name.clone());
            }
            class_members.push(name.clone());
            worlds.push(name);
            // Advance the mixed-radix counter.
            let mut pos = 0;
            loop {
                if pos == n_agents {
                    break;
                }
                coords[pos] += 1;
                if coords[pos] < counts[pos] {
                    break;
                }
                coords[pos] = 0;
                pos += 1;
            }
            if pos == n_agents {
                break;
            }
        }
        box_classes.push(class_members);
    }

    let mut choice = Vec::new();
    for (c, counts) in cell_counts.iter().enumerate() {
        for (a, agent) in agents.iter().enumerate() {
            let cells: BTreeMap<String, Vec<String>> = (0..counts[a])
                .map(|x| {
                    (
                        format!("c{c}{agent}{x}"),
                        cell_worlds[&(c, a, x)].clone(),
                    )
                })
                .collect();
            choice.push(KChoiceEntry {
                agent: agent.clone(),
                class: c,
                cells,
            });
        }
    }

    // Epistemic blocks: contiguous runs of classes; within a block, each
    // agent's cells are dealt onto groups so that every group receives at
    // least one cell from every member class.
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for c in 0..n_classes {
        if c > 0 && rng.gen_bool(params.epistemic_block_bias.clamp(0.0, 1.0)) {
            blocks.last_mut().expect("previous block").push(c);
        } else {
            blocks.push(vec![c]);
        }
    }
    let mut epistemic = Vec::new();
    for (a, agent) in agents.iter().enumerate() {
        let mut classes: Vec<Vec<String>> = Vec::new();
        for block in &blocks {
            let t = block.iter().map(|c| cell_counts[*c][a]).min().expect("nonempty block");
            let mut groups: Vec<Vec<String>> = vec![Vec::new(); t];
            for c in block {
                let mut order: Vec<usize> = (0..cell_counts[*c][a]).collect();
                order.shuffle(&mut rng);
                for (slot, x) in order.into_iter().enumerate() {
                    groups[slot % t].extend(cell_worlds[&(*c, a, x)].iter().cloned());
                }
            }
            classes.extend(groups);
        }
        epistemic.push(KEpistemicEntry {
            agent: agent.clone(),
            classes,
        });
    }

    let mut value_o = BTreeMap::new();
    let mut value_s = BTreeMap::new();
    for w in &worlds {
        value_o.insert(
            w.clone(),
            Utility::from_int(rng.gen_range(params.value_min..=params.value_max)),
        );
        value_s.insert(
            w.clone(),
            Utility::from_int(rng.gen_range(params.value_min..=params.value_max)),
        );
    }

    let mut valuation: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for atom in &ATOM_NAMES[..params.atom_count.clamp(1, ATOM_NAMES.len())] {
        let ws: Vec<String> = worlds.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        valuation.insert((*atom).to_string(), ws);
    }

    let mut file = KripkeFile {
        agents,
        worlds,
        box_classes,
        choice,
        epistemic,
        value_o,
        value_s: Some(value_s),
        valuation,
    };
    if let Some(m) = mutation {
        apply_mutation(&mut file, m, &mut rng);
    }
    KripkeModel::from_file(file).expect("generated file is structurally sound")
}

fn apply_mutation(file: &mut KripkeFile, mutation: Mutation, rng: &mut ChaCha8Rng) {
    match mutation {
        Mutation::BreakOac => {
            // Move one world out of a multi-world epistemic class while its
            // choice-mates stay behind.
            for entry in &mut file.epistemic {
                if let Some(class) = entry.classes.iter_mut().find(|c| c.len() >= 2) {
                    let victim = class.pop().expect("nonempty class");
                    entry.classes.push(vec![victim]);
                    return;
                }
            }
        }
        Mutation::BreakUnifH => {
            // Shrink a cross-class epistemic class to one box class, so the
            // stranded worlds no longer reach the classes they used to.
            let class_of = |w: &String| -> usize {
                file.box_classes
                    .iter()
                    .position(|c| c.contains(w))
                    .expect("world is classed")
            };
            for entry in &mut file.epistemic {
                for eclass in &mut entry.classes {
                    if eclass.is_empty() {
                        continue;
                    }
                    let first = class_of(&eclass[0]);
                    if eclass.iter().any(|w| class_of(w) != first) {
                        let kept: Vec<String> = eclass
                            .iter()
                            .filter(|w| class_of(w) == first)
                            .cloned()
                            .collect();
                        let dropped: Vec<String> = eclass
                            .iter()
                            .filter(|w| class_of(w) != first)
                            .cloned()
                            .collect();
                        *eclass = kept;
                        // Keep the partition shape: stranded worlds become a
                        // class of their own, all in other box classes.
                        entry.classes.push(dropped);
                        return;
                    }
                }
            }
        }
        Mutation::BreakIa => {
            // Delete one world from a class with at least two, leaving a
            // hole in the selection grid.
            let Some(victim) = file
                .box_classes
                .iter()
                .find(|c| c.len() >= 2)
                .map(|c| c[rng.gen_range(0..c.len())].clone())
            else {
                return;
            };
            file.worlds.retain(|w| *w != victim);
            for class in &mut file.box_classes {
                class.retain(|w| *w != victim);
            }
            for entry in &mut file.choice {
                for cell in entry.cells.values_mut() {
                    cell.retain(|w| *w != victim);
                }
                entry.cells.retain(|_, ws| !ws.is_empty());
            }
            for entry in &mut file.epistemic {
                for class in &mut entry.classes {
                    class.retain(|w| *w != victim);
                }
                entry.classes.retain(|c| !c.is_empty());
            }
            file.value_o.remove(&victim);
            if let Some(vs) = &mut file.value_s {
                vs.remove(&victim);
            }
            for ws in file.valuation.values_mut() {
                ws.retain(|w| *w != victim);
            }
        }
    }
}

fn random_formula_with(
    rng: &mut ChaCha8Rng,
    depth: usize,
    atoms: &[&str],
    agents: &[Agent],
) -> Formula {
    if depth == 0 {
        return Formula::atom(atoms[rng.gen_range(0..atoms.len())]);
    }
    let agent = agents[rng.gen_range(0..agents.len())].clone();
    match rng.gen_range(0..9) {
        0 => Formula::atom(atoms[rng.gen_range(0..atoms.len())]),
        1 => Formula::not(random_formula_with(rng, depth - 1, atoms, agents)),
        2 => Formula::and(
            random_formula_with(rng, depth - 1, atoms, agents),
            random_formula_with(rng, depth - 1, atoms, agents),
        ),
        3 => Formula::nec(random_formula_with(rng, depth - 1, atoms, agents)),
        4 => Formula::Stit(agent, Box::new(random_formula_with(rng, depth - 1, atoms, agents))),
        5 => Formula::Knows(agent, Box::new(random_formula_with(rng, depth - 1, atoms, agents))),
        6 => Formula::ObjOught(agent, Box::new(random_formula_with(rng, depth - 1, atoms, agents))),
        7 => Formula::SubjOught(agent, Box::new(random_formula_with(rng, depth - 1, atoms, agents))),
        _ => Formula::implies(
            random_formula_with(rng, depth - 1, atoms, agents),
            random_formula_with(rng, depth - 1, atoms, agents),
        ),
    }
}

/// A batch of random formulas over the given atoms and agents,
/// deterministic per seed.
pub fn random_formulas(
    seed: u64,
    count: usize,
    max_depth: usize,
    atoms: &[String],
    agents: &[Agent],
) -> Vec<Formula> {
    let fallback = ["p".to_string()];
    let atoms: Vec<&str> = if atoms.is_empty() {
        fallback.iter().map(|s| s.as_str()).collect()
    } else {
        atoms.iter().map(|s| s.as_str()).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let depth = rng.gen_range(0..=max_depth);
            random_formula_with(&mut rng, depth, &atoms, agents)
        })
        .collect()
}

/// A random formula over the parameter-determined atoms and agents,
/// deterministic per seed.
pub fn random_formula(params: &GeneratorParams) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let atoms = &ATOM_NAMES[..params.atom_count.clamp(1, ATOM_NAMES.len())];
    let agents: Vec<Agent> = AGENT_NAMES[..params.agent_count.clamp(1, 3)]
        .iter()
        .map(|s| Agent::new(*s))
        .collect();
    random_formula_with(&mut rng, params.formula_depth, atoms, &agents)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepSemantics {
    Kripke,
    Bt,
    Both,
}

impl std::str::FromStr for SweepSemantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kripke" => Ok(SweepSemantics::Kripke),
            "bt" => Ok(SweepSemantics::Bt),
            "both" => Ok(SweepSemantics::Both),
            other => Err(format!("unknown semantics {other:?} (expected kripke, bt, or both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub model_seed: u64,
    pub schema: String,
    pub instance: String,
    /// World id, or `moment/history` for the associated BT model.
    pub location: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoundnessReport {
    pub params: GeneratorParams,
    pub mode: EvalMode,
    pub models_tested: usize,
    pub instances_tested: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "soundness sweep: {} models, {} instances, mode {}",
            self.models_tested, self.instances_tested, self.mode
        )?;
        if self.counterexamples.is_empty() {
            writeln!(f, "no counterexamples")?;
        } else {
            writeln!(f, "{:<10} {:<8} {:<28} instance", "seed", "schema", "location")?;
            for ce in &self.counterexamples {
                writeln!(
                    f,
                    "{:<10} {:<8} {:<28} {}",
                    ce.model_seed, ce.schema, ce.location, ce.instance
                )?;
            }
        }
        Ok(())
    }
}

/// Instantiates every catalog schema on randomly generated models and
/// records every falsification. In dominance mode the expected outcome is an
/// empty counterexample list.
pub fn soundness_sweep(
    params: &GeneratorParams,
    models: usize,
    instances_per_model: usize,
    semantics: SweepSemantics,
    mode: EvalMode,
) -> SoundnessReport {
    soundness_sweep_mutated(params, models, instances_per_model, semantics, mode, None)
}

/// Sweep over deliberately broken models; used by sensitivity tests.
pub fn soundness_sweep_mutated(
    params: &GeneratorParams,
    models: usize,
    instances_per_model: usize,
    semantics: SweepSemantics,
    mode: EvalMode,
    mutation: Option<Mutation>,
) -> SoundnessReport {
    let catalog = axiom_catalog();
    let opts = EvalOptions::new(mode);
    let mut counterexamples = Vec::new();
    let mut instances_tested = 0;
    for i in 0..models {
        let model_seed = params.seed + i as u64;
        let model_params = GeneratorParams {
            seed: model_seed,
            ..*params
        };
        let model = match mutation {
            None => random_kripke(&model_params),
            Some(m) => random_kripke_mutated(&model_params, m),
        };
        let keval = match semantics {
            SweepSemantics::Bt => None,
            _ => Some(KripkeEvaluator::new(&model, opts)),
        };
        let bt_model = match semantics {
            SweepSemantics::Kripke => None,
            _ => Some(associated_bt(&model).expect("translation builds")),
        };
        let beval = bt_model.as_ref().map(|m| Evaluator::new(m, opts));
        let mut rng = ChaCha8Rng::seed_from_u64(model_seed ^ 0x9e37_79b9_7f4a_7c15);
        let atoms = &ATOM_NAMES[..params.atom_count.clamp(1, ATOM_NAMES.len())];
        let agents: Vec<Agent> = model.agents().to_vec();
        for schema in &catalog {
            for _ in 0..instances_per_model {
                let instance = instantiate(schema, &mut rng, params, atoms, &agents);
                let Some(instance) = instance else { continue };
                instances_tested += 1;
                if let Some(keval) = &keval {
                    if let Ok(Some(w)) = keval.check_validity(&instance) {
                        counterexamples.push(Counterexample {
                            model_seed,
                            schema: schema.name.clone(),
                            instance: instance.render(),
                            location: w.0.clone(),
                        });
                    }
                }
                if let Some(beval) = &beval {
                    if let Ok(Some(s)) = beval.check_validity(&instance) {
                        counterexamples.push(Counterexample {
                            model_seed,
                            schema: schema.name.clone(),
                            instance: instance.render(),
                            location: s.to_string(),
                        });
                    }
                }
            }
        }
    }
    SoundnessReport {
        params: *params,
        mode,
        models_tested: models,
        instances_tested,
        counterexamples,
    }
}

fn instantiate(
    schema: &Schema,
    rng: &mut ChaCha8Rng,
    params: &GeneratorParams,
    atoms: &[&str],
    agents: &[Agent],
) -> Option<Formula> {
    let depth = rng.gen_range(0..=params.formula_depth);
    match &schema.kind {
        SchemaKind::Fixed { .. } => {
            let (prop_vars, agent_vars) = schema.variables(0);
            let props: BTreeMap<String, Formula> = prop_vars
                .iter()
                .map(|v| (v.clone(), random_formula_with(rng, depth, atoms, agents)))
                .collect();
            let bindings: BTreeMap<String, Agent> = agent_vars
                .iter()
                .map(|v| (v.clone(), agents[rng.gen_range(0..agents.len())].clone()))
                .collect();
            Some(schema.substitute(&props, &bindings, None).expect("fixed instance"))
        }
        SchemaKind::IndependenceFamily => {
            // Pairwise-distinct agents, per the schema's side condition.
            let n = rng.gen_range(1..=agents.len());
            let mut pool = agents.to_vec();
            pool.shuffle(rng);
            pool.truncate(n);
            let (prop_vars, agent_vars) = schema.variables(n);
            let props: BTreeMap<String, Formula> = prop_vars
                .iter()
                .map(|v| (v.clone(), random_formula_with(rng, depth, atoms, agents)))
                .collect();
            let bindings: BTreeMap<String, Agent> = agent_vars
                .iter()
                .zip(pool)
                .map(|(v, a)| (v.clone(), a))
                .collect();
            Some(schema.substitute(&props, &bindings, Some(n)).expect("IA instance"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_duplicate_free() {
        let catalog = axiom_catalog();
        let mut names: Vec<&str> = catalog.iter().map(|s| s.name.as_str()).collect();
        let before = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), before);
        assert!(names.contains(&"A4"));
        assert!(names.contains(&"Unif-H"));
        assert!(names.contains(&"IA"));
    }

    #[test]
    fn generated_models_validate() {
        for seed in 1..=60 {
            let params = GeneratorParams { seed, ..Default::default() };
            let model = random_kripke(&params);
            let report = model.validate();
            assert!(report.is_empty(), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let params = GeneratorParams { seed: 7, ..Default::default() };
        let a = serde_json::to_string(&random_kripke(&params).to_file()).unwrap();
        let b = serde_json::to_string(&random_kripke(&params).to_file()).unwrap();
        assert_eq!(a, b);
        assert_eq!(random_formula(&params), random_formula(&params));
    }

    #[test]
    fn mutations_are_caught_by_the_validator() {
        for mutation in [Mutation::BreakOac, Mutation::BreakUnifH, Mutation::BreakIa] {
            let mut caught = 0;
            for seed in 1..=40 {
                let params = GeneratorParams { seed, ..Default::default() };
                if !random_kripke_mutated(&params, mutation).validate().is_empty() {
                    caught += 1;
                }
            }
            assert!(caught > 0, "{mutation:?} never detected");
        }
    }

    #[test]
    fn small_sweep_is_clean_and_deterministic() {
        let params = GeneratorParams::default();
        let run = || {
            soundness_sweep(&params, 8, 3, SweepSemantics::Both, EvalMode::Dominance)
        };
        let a = run();
        assert!(a.passed(), "{a}");
        let b = run();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
