//! Truth evaluation of formulas at situations of a BT model.
//!
//! Two modes are supported. `Optimal` evaluates the ought operators through
//! the optimal / subjectively-optimal action sets (by default with the
//! unrelativized orderings). `Dominance` evaluates them through the
//! sure-thing-style clauses, always with the state-relativized orderings.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::btmodel::{BTModel, Flavor, HistoryId, ModelError, MomentId, Situation};
use crate::formula::{Agent, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Optimal,
    Dominance,
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalMode::Optimal => f.write_str("optimal"),
            EvalMode::Dominance => f.write_str("dominance"),
        }
    }
}

impl FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimal" => Ok(EvalMode::Optimal),
            "dominance" => Ok(EvalMode::Dominance),
            other => Err(format!("unknown mode {other:?} (expected optimal or dominance)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub mode: EvalMode,
    /// Use state-relativized orderings in optimal mode too. Dominance mode
    /// always relativizes.
    pub relativized_optimal: bool,
    /// Use the variant objective escape set {L'' : L''=L or L'<=L''}
    /// instead of the standard {L'' : L''=L' or L'<=L''}.
    pub verbatim_escape_set: bool,
}

impl EvalOptions {
    pub fn new(mode: EvalMode) -> Self {
        EvalOptions {
            mode,
            relativized_optimal: false,
            verbatim_escape_set: false,
        }
    }

    pub fn optimal() -> Self {
        Self::new(EvalMode::Optimal)
    }

    pub fn dominance() -> Self {
        Self::new(EvalMode::Dominance)
    }
}

/// A single evaluation record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub situation: Situation,
    pub formula: Formula,
    pub mode: EvalMode,
    pub value: bool,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}  {}  {}  {}",
            self.situation, self.mode, self.value, self.formula
        )
    }
}

type SatSet = Rc<BTreeSet<Situation>>;

/// Caching evaluator over one immutable model. Caches are confined to the
/// evaluator, so independent evaluators may run concurrently.
pub struct Evaluator<'m> {
    model: &'m BTModel,
    opts: EvalOptions,
    all: SatSet,
    sat_cache: RefCell<HashMap<Formula, SatSet>>,
    leq_cache: RefCell<HashMap<(Agent, MomentId, u8, bool, usize, usize), bool>>,
    cluster_cache: RefCell<HashMap<(Agent, MomentId, usize, MomentId), Rc<BTreeSet<HistoryId>>>>,
    warnings: RefCell<BTreeSet<String>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m BTModel, opts: EvalOptions) -> Self {
        Evaluator {
            model,
            opts,
            all: Rc::new(model.situations().into_iter().collect()),
            sat_cache: RefCell::new(HashMap::new()),
            leq_cache: RefCell::new(HashMap::new()),
            cluster_cache: RefCell::new(HashMap::new()),
            warnings: RefCell::new(BTreeSet::new()),
        }
    }

    pub fn options(&self) -> EvalOptions {
        self.opts
    }

    /// Atoms that were evaluated but have no valuation entry.
    pub fn warnings(&self) -> Vec<String> {
        self.warnings.borrow().iter().cloned().collect()
    }

    pub fn evaluate(&self, s: &Situation, f: &Formula) -> Result<bool, ModelError> {
        if !self.model.is_situation(s) {
            return Err(ModelError::InvalidSituation(s.clone()));
        }
        Ok(self.sat(f)?.contains(s))
    }

    /// `|f|^m`: the histories at `m` where `f` holds.
    pub fn extension(&self, m: &MomentId, f: &Formula) -> Result<BTreeSet<HistoryId>, ModelError> {
        let sat = self.sat(f)?;
        Ok(self
            .model
            .histories_through(m)?
            .iter()
            .filter(|h| {
                sat.contains(&Situation {
                    moment: m.clone(),
                    history: (*h).clone(),
                })
            })
            .cloned()
            .collect())
    }

    /// First situation (moments in file order, histories in canonical order)
    /// where `f` fails, or `None` if `f` holds everywhere.
    pub fn check_validity(&self, f: &Formula) -> Result<Option<Situation>, ModelError> {
        let sat = self.sat(f)?;
        for s in self.model.situations() {
            if !sat.contains(&s) {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    fn check_agent(&self, a: &Agent) -> Result<(), ModelError> {
        if self.model.has_agent(a) {
            Ok(())
        } else {
            Err(ModelError::UnknownAgent(a.clone()))
        }
    }

    fn sat(&self, f: &Formula) -> Result<SatSet, ModelError> {
        if let Some(hit) = self.sat_cache.borrow().get(f) {
            return Ok(hit.clone());
        }
        let result: BTreeSet<Situation> = match f {
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
                for m in self.model.moments() {
                    let sits: Vec<Situation> = self
                        .model
                        .histories_through(m)?
                        .iter()
                        .map(|h| Situation {
                            moment: m.clone(),
                            history: h.clone(),
                        })
                        .collect();
                    if sits.iter().all(|s| sg.contains(s)) {
                        out.extend(sits);
                    }
                }
                out
            }
            Formula::Stit(a, g) => {
                self.check_agent(a)?;
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for m in self.model.moments() {
                    for cell in self.model.choice_cells(a, m)? {
                        let sits: Vec<Situation> = cell
                            .histories
                            .iter()
                            .map(|h| Situation {
                                moment: m.clone(),
                                history: h.clone(),
                            })
                            .collect();
                        if sits.iter().all(|s| sg.contains(s)) {
                            out.extend(sits);
                        }
                    }
                }
                out
            }
            Formula::Knows(a, g) => {
                self.check_agent(a)?;
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for s in self.all.iter() {
                    if self
                        .model
                        .information_set(a, s)
                        .iter()
                        .all(|s2| sg.contains(s2))
                    {
                        out.insert(s.clone());
                    }
                }
                out
            }
            Formula::ObjOught(a, g) => {
                self.check_agent(a)?;
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for m in self.model.moments() {
                    if self.obj_ought_holds(a, m, &sg)? {
                        out.extend(self.model.histories_through(m)?.iter().map(|h| Situation {
                            moment: m.clone(),
                            history: h.clone(),
                        }));
                    }
                }
                out
            }
            Formula::SubjOught(a, g) => {
                self.check_agent(a)?;
                let sg = self.sat(g)?;
                let mut out = BTreeSet::new();
                for m in self.model.moments() {
                    if self.subj_ought_holds(a, m, &sg)? {
                        out.extend(self.model.histories_through(m)?.iter().map(|h| Situation {
                            moment: m.clone(),
                            history: h.clone(),
                        }));
                    }
                }
                out
            }
        };
        let rc = Rc::new(result);
        self.sat_cache.borrow_mut().insert(f.clone(), rc.clone());
        Ok(rc)
    }

    fn holds_at(&self, sat: &BTreeSet<Situation>, m: &MomentId, h: &HistoryId) -> bool {
        sat.contains(&Situation {
            moment: m.clone(),
            history: h.clone(),
        })
    }

    fn leq(
        &self,
        a: &Agent,
        m: &MomentId,
        flavor: Flavor,
        relativized: bool,
        i: usize,
        j: usize,
    ) -> Result<bool, ModelError> {
        let key = (
            a.clone(),
            m.clone(),
            matches!(flavor, Flavor::Subjective) as u8,
            relativized,
            i,
            j,
        );
        if let Some(hit) = self.leq_cache.borrow().get(&key) {
            return Ok(*hit);
        }
        let cells = self.model.choice_cells(a, m)?;
        let out = self
            .model
            .compare(a, m, &cells[i].histories, &cells[j].histories, flavor, relativized)?
            .leq;
        self.leq_cache.borrow_mut().insert(key, out);
        Ok(out)
    }

    fn cluster(
        &self,
        a: &Agent,
        m: &MomentId,
        cell_idx: usize,
        target: &MomentId,
    ) -> Result<Rc<BTreeSet<HistoryId>>, ModelError> {
        let key = (a.clone(), m.clone(), cell_idx, target.clone());
        if let Some(hit) = self.cluster_cache.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let cells = self.model.choice_cells(a, m)?;
        let out = Rc::new(
            self.model
                .epistemic_cluster(a, &cells[cell_idx].histories, m, target)?,
        );
        self.cluster_cache.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    fn obj_ought_holds(
        &self,
        a: &Agent,
        m: &MomentId,
        sat: &BTreeSet<Situation>,
    ) -> Result<bool, ModelError> {
        match self.opts.mode {
            EvalMode::Optimal => {
                for cell in self.model.optimal_set(a, m, self.opts.relativized_optimal)? {
                    if !cell.histories.iter().all(|h| self.holds_at(sat, m, h)) {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            EvalMode::Dominance => {
                let cells = self.model.choice_cells(a, m)?;
                let n = cells.len();
                for i in 0..n {
                    let fails = cells[i].histories.iter().any(|h| !self.holds_at(sat, m, h));
                    if !fails {
                        continue;
                    }
                    let mut rescued = false;
                    'witness: for j in 0..n {
                        let strict = self.leq(a, m, Flavor::Objective, true, i, j)?
                            && !self.leq(a, m, Flavor::Objective, true, j, i)?;
                        if !strict {
                            continue;
                        }
                        for k in 0..n {
                            let in_escape = if self.opts.verbatim_escape_set {
                                k == i || self.leq(a, m, Flavor::Objective, true, j, k)?
                            } else {
                                k == j || self.leq(a, m, Flavor::Objective, true, j, k)?
                            };
                            if in_escape
                                && !cells[k].histories.iter().all(|h| self.holds_at(sat, m, h))
                            {
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
        m: &MomentId,
        sat: &BTreeSet<Situation>,
    ) -> Result<bool, ModelError> {
        let related = self.model.related_moments(a, m);
        match self.opts.mode {
            EvalMode::Optimal => {
                let cells = self.model.choice_cells(a, m)?;
                let optimal = self
                    .model
                    .s_optimal_set(a, m, self.opts.relativized_optimal)?;
                for cell in &optimal {
                    let idx = cells
                        .iter()
                        .position(|c| c.name == cell.name)
                        .expect("optimal cell is a cell");
                    for target in &related {
                        let cluster = self.cluster(a, m, idx, target)?;
                        if !cluster.iter().all(|h| self.holds_at(sat, target, h)) {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
            EvalMode::Dominance => {
                let cells = self.model.choice_cells(a, m)?;
                let n = cells.len();
                let cluster_ok = |idx: usize| -> Result<bool, ModelError> {
                    for target in &related {
                        let cluster = self.cluster(a, m, idx, target)?;
                        if !cluster.iter().all(|h| self.holds_at(sat, target, h)) {
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
                        let strict = self.leq(a, m, Flavor::Subjective, true, i, j)?
                            && !self.leq(a, m, Flavor::Subjective, true, j, i)?;
                        if !strict {
                            continue;
                        }
                        for k in 0..n {
                            let in_escape =
                                k == j || self.leq(a, m, Flavor::Subjective, true, j, k)?;
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

/// Evaluates one formula at one situation.
pub fn evaluate(
    model: &BTModel,
    s: &Situation,
    f: &Formula,
    opts: EvalOptions,
) -> Result<bool, ModelError> {
    Evaluator::new(model, opts).evaluate(s, f)
}

/// `|f|^m`.
pub fn extension(
    model: &BTModel,
    m: &MomentId,
    f: &Formula,
    opts: EvalOptions,
) -> Result<BTreeSet<HistoryId>, ModelError> {
    Evaluator::new(model, opts).extension(m, f)
}

/// First counterexample situation, or `None` when valid on the model.
pub fn check_validity(
    model: &BTModel,
    f: &Formula,
    opts: EvalOptions,
) -> Result<Option<Situation>, ModelError> {
    Evaluator::new(model, opts).check_validity(f)
}
