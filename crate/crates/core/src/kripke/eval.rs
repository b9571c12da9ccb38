//! Truth evaluation over Kripke-estit models, mirroring the branching-time
//! clauses: box classes play the role of moments and worlds the role of
//! histories.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::btmodel::Flavor;
use crate::formula::{Agent, Formula};
use crate::semantics::{EvalMode, EvalOptions};

use super::{KripkeError, KripkeModel, WorldId};

type SatSet = Rc<BTreeSet<WorldId>>;

pub struct KripkeEvaluator<'m> {
    model: &'m KripkeModel,
    opts: EvalOptions,
    all: SatSet,
    sat_cache: RefCell<HashMap<Formula, SatSet>>,
    leq_cache: RefCell<HashMap<(Agent, usize, u8, usize, usize), bool>>,
    cluster_cache: RefCell<HashMap<(Agent, usize, usize, usize), Rc<BTreeSet<WorldId>>>>,
    warnings: RefCell<BTreeSet<String>>,
}

impl<'m> KripkeEvaluator<'m> {
    pub fn new(model: &'m KripkeModel, opts: EvalOptions) -> Self {
        KripkeEvaluator {
            model,
            opts,
            all: Rc::new(model.worlds().iter().cloned().collect()),
            sat_cache: RefCell::new(HashMap::new()),
            leq_cache: RefCell::new(HashMap::new()),
            cluster_cache: RefCell::new(HashMap::new()),
            warnings: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        self.warnings.borrow().iter().cloned().collect()
    }

    pub fn evaluate(&self, w: &WorldId, f: &Formula) -> Result<bool, KripkeError> {
        if !self.model.has_world(w) {
            return Err(KripkeError::UnknownWorld(w.clone()));
        }
        Ok(self.sat(f)?.contains(w))
    }

    /// First world (in file order) where `f` fails, or `None` when valid.
    pub fn check_validity(&self, f: &Formula) -> Result<Option<WorldId>, KripkeError> {
        let sat = self.sat(f)?;
        for w in self.model.worlds() {
            if !sat.contains(w) {
                return Ok(Some(w.clone()));
            }
        }
        Ok(None)
    }

    fn check_agent(&self, a: &Agent) -> Result<(), KripkeError> {
        if self.model.has_agent(a) {
            Ok(())
        } else {
            Err(KripkeError::UnknownAgent(a.clone()))
        }
    }

    fn sat(&self, f: &Formula) -> Result<SatSet, KripkeError> {
        if let Some(hit) = self.sat_cache.borrow().get(f) {
            return Ok(hit.clone());
        }
        let result: BTreeSet<WorldId> = match f {
            Formula::Atom(name) => match self.model.atom_extension(name) {
                Some(set) => set.clone(),
                None => {
                    self.warnings.borrow_mut().insert(name.clone());
                    BTreeSet::new()
                }
            },
            Formula::Not(g) => {
                let sg = self.sat(g)?;
                self.all.difference(&sg).cloned().collect()
            }
            Formula::And(a, b) => {
                let sa = self.sat(a)?;
                let sb = self.sat(b)?;
                sa.intersection(&sb).cloned().collect()
            }
            Formula::Nec(g) => {
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for class in 0..self.model.class_count() {
                    let worlds = self.model.class_worlds(class)?;
                    if worlds.iter().all(|w| sg.contains(w)) {
                        out.extend(worlds.iter().cloned());
                    }
                }
                out
            }
            Formula::Stit(a, g) => {
                self.check_agent(a)?;
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for class in 0..self.model.class_count() {
                    for cell in self.model.choice_cells(a, class)? {
                        if cell.worlds.iter().all(|w| sg.contains(w)) {
                            out.extend(cell.worlds.iter().cloned());
                        }
                    }
                }
                out
            }
            Formula::Knows(a, g) => {
                self.check_agent(a)?;
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for w in self.all.iter() {
                    if self
                        .model
                        .information_set(a, w)
                        .iter()
                        .all(|u| sg.contains(u))
                    {
                        out.insert(w.clone());
                    }
                }
                out
            }
            Formula::ObjOught(a, g) => {
                self.check_agent(a)?;
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for class in 0..self.model.class_count() {
                    if self.obj_ought_holds(a, class, &sg)? {
                        out.extend(self.model.class_worlds(class)?.iter().cloned());
                    }
                }
                out
            }
            Formula::SubjOught(a, g) => {
                self.check_agent(a)?;
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for class in 0..self.model.class_count() {
                    if self.subj_ought_holds(a, class, &sg)? {
                        out.extend(self.model.class_worlds(class)?.iter().cloned());
                    }
                }
                out
            }
        };
        let rc = Rc::new(result);
        self.sat_cache.borrow_mut().insert(f.clone(), rc.clone());
        Ok(rc)
    }

    fn leq(
        &self,
        a: &Agent,
        class: usize,
        flavor: Flavor,
        relativized: bool,
        i: usize,
        j: usize,
    ) -> Result<bool, KripkeError> {
        let key = (
            a.clone(),
            class,
            (matches!(flavor, Flavor::Subjective) as u8) << 1 | relativized as u8,
            i,
            j,
        );
        if let Some(hit) = self.leq_cache.borrow().get(&key) {
            return Ok(*hit);
        }
        let cells = self.model.choice_cells(a, class)?;
        let out = self
            .model
            .cell_leq(a, class, &cells[i].worlds, &cells[j].worlds, flavor, relativized)?;
        self.leq_cache.borrow_mut().insert(key, out);
        Ok(out)
    }

    fn cluster(
        &self,
        a: &Agent,
        class: usize,
        cell_idx: usize,
        target: usize,
    ) -> Result<Rc<BTreeSet<WorldId>>, KripkeError> {
        let key = (a.clone(), class, cell_idx, target);
        if let Some(hit) = self.cluster_cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let cells = self.model.choice_cells(a, class)?;
        let out = Rc::new(self.model.cluster(a, &cells[cell_idx].worlds, target)?);
        self.cluster_cache.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    fn obj_ought_holds(
        &self,
        a: &Agent,
        class: usize,
        sat: &BTreeSet<WorldId>,
    ) -> Result<bool, KripkeError> {
        match self.opts.mode {
            EvalMode::Optimal => {
                for cell in
                    self.model
                        .undominated(a, class, Flavor::Objective, self.opts.relativized_optimal)?
                {
                    if !cell.worlds.iter().all(|w| sat.contains(w)) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            EvalMode::Dominance => {
                let cells = self.model.choice_cells(a, class)?;
                let n = cells.len();
                for i in 0..n {
                    if cells[i].worlds.iter().all(|w| sat.contains(w)) {
                        continue;
                    }
                    let mut rescued = false;
                    'witness: for j in 0..n {
                        let strict = self.leq(a, class, Flavor::Objective, true, i, j)?
                            && !self.leq(a, class, Flavor::Objective, true, j, i)?;
                        if !strict {
                            continue;
                        }
                        for k in 0..n {
                            let in_escape = if self.opts.verbatim_escape_set {
                                k == i || self.leq(a, class, Flavor::Objective, true, j, k)?
                            } else {
                                k == j || self.leq(a, class, Flavor::Objective, true, j, k)?
                            };
                            if in_escape && !cells[k].worlds.iter().all(|w| sat.contains(w)) {
                                continue 'witness;
                            }
                        }
                        rescued = true;
                        break;
                    }
                    if !rescued {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn subj_ought_holds(
        &self,
        a: &Agent,
        class: usize,
        sat: &BTreeSet<WorldId>,
    ) -> Result<bool, KripkeError> {
        let related = self.model.related_classes(a, class);
        match self.opts.mode {
            EvalMode::Optimal => {
                let cells = self.model.choice_cells(a, class)?;
                let optimal = self.model.undominated(
                    a,
                    class,
                    Flavor::Subjective,
                    self.opts.relativized_optimal,
                )?;
                for cell in &optimal {
                    let idx = cells
                        .iter()
                        .position(|c| c.name == cell.name)
                        .expect("optimal cell is a cell");
                    for target in &related {
                        let cluster = self.cluster(a, class, idx, *target)?;
                        if !cluster.iter().all(|w| sat.contains(w)) {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
            EvalMode::Dominance => {
                let cells = self.model.choice_cells(a, class)?;
                let n = cells.len();
                let cluster_ok = |idx: usize| -> Result<bool, KripkeError> {
                    for target in &related {
                        let cluster = self.cluster(a, class, idx, *target)?;
                        if !cluster.iter().all(|w| sat.contains(w)) {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                };
                for i in 0..n {
                    if cluster_ok(i)? {
                        continue;
                    }
                    let mut rescued = false;
                    'witness: for j in 0..n {
                        let strict = self.leq(a, class, Flavor::Subjective, true, i, j)?
                            && !self.leq(a, class, Flavor::Subjective, true, j, i)?;
                        if !strict {
                            continue;
                        }
                        for k in 0..n {
                            let in_escape =
                                k == j || self.leq(a, class, Flavor::Subjective, true, j, k)?;
                            if in_escape && !cluster_ok(k)? {
                                continue 'witness;
                            }
                        }
                        rescued = true;
                        break;
                    }
                    if !rescued {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

/// Evaluates one formula at one world.
pub fn evaluate_kripke(
    model: &KripkeModel,
    w: &WorldId,
    f: &Formula,
    opts: EvalOptions,
) -> Result<bool, KripkeError> {
    KripkeEvaluator::new(model, opts).evaluate(w, f)
}
