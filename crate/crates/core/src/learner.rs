//! The learner: solves the combinatorial optimization that selects
//! predicates, groundings, schema arities, static atoms, preconditions, and
//! effects minimizing the lexicographic cost subject to C1/C2.
//!
//! The solver is a cost-layered branch-and-bound:
//!
//! 1. Fluent entries split into *active* ones (they change on some data
//!    transition) and *passive* ones (they never do). Only active subsets —
//!    the core Φ∩active of any solution — are enumerated, best-first by a
//!    monotone lower bound; passives cannot alter any effect and enter the
//!    model only through gating literals, effect fillers, or C1 completion,
//!    all of which price them individually. Two monotone facts drive the
//!    pruning: adding a fluent can only grow the objects a transition
//!    changes (so an arity-budget violation prunes the whole subtree), and
//!    only fluents can distinguish two same-instance states (so a branch
//!    that can no longer satisfy C1 is dropped).
//! 2. For a fixed Φ and label, every way of assigning one binding per data
//!    transition is enumerated. A binding must cover the non-constant
//!    objects changed by the transition; the changed atoms then lift
//!    uniquely to schema-variable literals, which are merged into a single
//!    effect set shared by all transitions of the label and cross-checked
//!    against every assigned transition. The first transition is restricted
//!    to sorted bindings (variable renaming is a solution symmetry), and
//!    transitions with equal endpoints take bindings in increasing order.
//! 3. Exactness of the successor multisets is enforced by a gating cover:
//!    every non-chosen binding of every marked state must be excluded by at
//!    least one precondition or static atom that all chosen bindings
//!    satisfy. Minimal covers are enumerated Pareto-optimally over (static
//!    entries used, passive entries used, atom count) because those entries
//!    are priced globally.
//! 4. Per-label solutions are combined label by label; any marked pair the
//!    accumulated fluents still fail to distinguish is completed with a
//!    minimum-cost set of passive entries, and the lexicographic cost of
//!    the completed model is compared against the incumbent.
//!
//! Exhausting the search space without an incumbent proves there is no
//! model within the hyperparameters; hitting the node or time budget first
//! is reported as a distinct outcome.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use crate::grounding::{grounded_domain, Dataset, GroundedDomain, GroundingError};
use crate::pool::{ConstantSet, Extension, PredicatePool};
use crate::strips::{Arg, Domain, ObjId, Schema, SchemaAtom, Universe};

/// The five-component lexicographic objective:
/// (Σ actions 1+arity, Σ fluent preds 1+arity, Σ static preds 1+arity,
///  #effect atoms, #precondition atoms including static atoms).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CostTuple(pub u32, pub u32, pub u32, pub u32, pub u32);

impl fmt::Display for CostTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{})",
            self.0, self.1, self.2, self.3, self.4
        )
    }
}

/// Computes the cost of a domain.
pub fn cost(domain: &Domain) -> CostTuple {
    let c1 = domain.schemas.iter().map(|s| 1 + s.arity as u32).sum();
    let c2 = domain
        .predicates
        .iter()
        .filter(|p| !p.is_static)
        .map(|p| 1 + p.arity as u32)
        .sum();
    let c3 = domain
        .predicates
        .iter()
        .filter(|p| p.is_static)
        .map(|p| 1 + p.arity as u32)
        .sum();
    let c4 = domain.schemas.iter().map(|s| s.effects.len() as u32).sum();
    let c5 = domain
        .schemas
        .iter()
        .map(|s| (s.preconditions.len() + s.statics.len()) as u32)
        .sum();
    CostTuple(c1, c2, c3, c4, c5)
}

/// Solver hyperparameters.
#[derive(Debug, Clone)]
pub struct Hyperparams {
    /// Maximum schema arity.
    pub max_arity: usize,
    /// Maximum number of domain predicates (fluent + static).
    pub num_predicates: usize,
    /// Search-node budget; exceeding it aborts with `CapExceeded`.
    pub node_cap: u64,
    /// Optional wall-clock budget, checked alongside the node budget.
    pub time_limit: Option<Duration>,
}

impl Default for Hyperparams {
    fn default() -> Hyperparams {
        Hyperparams {
            max_arity: 3,
            num_predicates: 12,
            node_cap: 50_000_000,
            time_limit: None,
        }
    }
}

/// Outcome of a `learn` call: an optimal model, a proof of exhaustion, or
/// an aborted search.
#[derive(Debug)]
pub enum LearnOutcome {
    Solution(GroundedDomain),
    NoSolution,
    CapExceeded,
}

impl LearnOutcome {
    pub fn solution(&self) -> Option<&GroundedDomain> {
        match self {
            LearnOutcome::Solution(gd) => Some(gd),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("dataset has no action labels")]
    NoLabels,
    #[error("dataset and pool disagree: {0}")]
    Mismatch(String),
    #[error("solver limit: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
}

/// Sentinel for unused tuple slots.
const NONE: u32 = u32::MAX;
/// Per-label cap on enumerated binding assignments. Overflowing marks the
/// search capped (its exhaustion no longer proves unsolvability) but keeps
/// it running; every solution found remains sound.
const ASSIGN_CAP: usize = 20_000;
/// A denotation tuple in universe-id space; arity 0 is `(NONE, NONE)`,
/// arity 1 is `(x, NONE)`.
type Tup = (u32, u32);
type TSet = BTreeSet<Tup>;

/// A schema-atom argument during search: a 0-based variable position or a
/// domain-constant index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum LArg {
    V(u8),
    C(u8),
}

/// A signed lifted atom over a pool entry.
type LAtom = (usize, Vec<LArg>, bool);

/// One data transition of a label.
#[derive(Debug, Clone, Copy)]
struct Trans {
    inst: usize,
    src: usize,
    dst: usize,
    /// Index of (inst, src) in the marked-state list.
    midx: usize,
}

/// The changes one fluent entry undergoes across one transition.
#[derive(Debug, Clone, Default)]
struct Delta {
    /// (tuple, value in the target state).
    tuples: Vec<(Tup, bool)>,
    /// Universe ids of the changed non-constant objects, as a bitmask.
    objs: u128,
}

/// A complete per-transition binding assignment for one label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Assign {
    /// Chosen bindings grouped by marked-state index, each list sorted.
    good: Vec<Vec<Vec<ObjId>>>,
    /// The shared lifted effect set (possibly empty before effect fill).
    eff: Vec<LAtom>,
}

/// One Pareto-optimal per-label solution.
#[derive(Debug, Clone)]
struct LabelOpt {
    n: usize,
    /// Static entries used by the gate, as a bitmask over `st`.
    smask: u64,
    /// Passive fluent entries used, as a bitmask over `fl` positions.
    pmask: u128,
    eff: Vec<LAtom>,
    gate: Vec<LAtom>,
}

/// A complete model candidate, cheap enough to keep as the incumbent.
#[derive(Debug, Clone)]
struct Candidate {
    cost: CostTuple,
    /// Selected fluent entries (pool indices).
    phi: Vec<usize>,
    /// Per label (dataset order): arity, effects, gate atoms.
    schemas: Vec<(usize, Vec<LAtom>, Vec<LAtom>)>,
    /// Static entries used (pool indices).
    statics: Vec<usize>,
}

/// Raised when the node or time budget is exhausted.
struct Capped;

struct Search<'a> {
    pool: &'a PredicatePool,
    beta: &'a Hyperparams,
    consts: ConstantSet,
    n_const: usize,
    /// Bindable (non-constant) object ids per instance.
    objs: Vec<Vec<ObjId>>,
    /// Global state index of (instance, state).
    offs: Vec<usize>,
    /// Translated denotations: `tex[entry][global_state]`.
    tex: Vec<Vec<TSet>>,
    /// Fluent candidates (pool entry indices, canonical order).
    fl: Vec<usize>,
    /// Positions in `fl` that change on some data transition.
    act: Vec<usize>,
    /// Suffix masks over `fl` positions: `act_rest[i]` covers `act[i..]`.
    act_rest: Vec<u128>,
    /// Mask over `fl` positions of entries that never change.
    passive_mask: u128,
    /// Static entries (pool entry indices, canonical order).
    st: Vec<usize>,
    labels: Vec<String>,
    /// Marked states as (instance, state), canonical order.
    marked: Vec<(usize, usize)>,
    /// Transitions per label, sorted by (instance, src, dst, edge order).
    trans: Vec<Vec<Trans>>,
    /// `deltas[label][trans][fl position]`.
    deltas: Vec<Vec<Vec<Delta>>>,
    /// Per same-instance marked pair: mask of distinguishing fluents.
    pair_masks: Vec<u128>,
    start: Instant,
    nodes: u64,
    /// (heap pops, evaluates, assignment enumerations, cover searches).
    stats: (u64, u64, u64, u64),
    capped: bool,
    incumbent: Option<Candidate>,
    assign_cache: HashMap<(usize, usize, u128), Vec<Assign>>,
}

/// Learns a minimum-cost grounded domain for the dataset's labels over the
/// pool, subject to C1 on marked same-instance state pairs and C2 (exact
/// successor multisets) on marked states.
///
/// The pool must have been built over exactly the dataset's instances, in
/// order, with matching state counts.
pub fn learn(
    dataset: &Dataset,
    pool: &PredicatePool,
    beta: &Hyperparams,
) -> Result<LearnOutcome, LearnError> {
    dataset.validate()?;
    if dataset.labels.is_empty() {
        return Err(LearnError::NoLabels);
    }
    let mut search = Search::new(dataset, pool, beta)?;
    // A same-instance marked pair no fluent distinguishes is a proof that
    // no predicate selection can satisfy C1.
    if search.pair_masks.iter().any(|&m| m == 0) {
        return Ok(LearnOutcome::NoSolution);
    }
    let run = search.run();
    if std::env::var_os("O2D_LEARN_DEBUG").is_some() {
        eprintln!(
            "learn debug: nodes={} pops={} evals={} assign_calls={} cover_calls={} inc={:?}",
            search.nodes,
            search.stats.0,
            search.stats.1,
            search.stats.2,
            search.stats.3,
            search.incumbent.as_ref().map(|c| c.cost)
        );
    }
    match (run, search.incumbent.take()) {
        (_, Some(best)) => Ok(LearnOutcome::Solution(search.build_domain(&best))),
        (Err(Capped), None) => Ok(LearnOutcome::CapExceeded),
        (Ok(()), None) => {
            if search.capped {
                Ok(LearnOutcome::CapExceeded)
            } else {
                Ok(LearnOutcome::NoSolution)
            }
        }
    }
}

impl<'a> Search<'a> {
    fn new(
        dataset: &Dataset,
        pool: &'a PredicatePool,
        beta: &'a Hyperparams,
    ) -> Result<Search<'a>, LearnError> {
        if pool.instances.len() != dataset.instances.len() {
            return Err(LearnError::Mismatch(format!(
                "{} pool instances vs {} dataset instances",
                pool.instances.len(),
                dataset.instances.len()
            )));
        }
        for (pi, di) in pool.instances.iter().zip(&dataset.instances) {
            if pi.name != di.name || pi.state_ids.len() != di.states.len() {
                return Err(LearnError::Mismatch(format!(
                    "instance {} differs between pool and dataset",
                    di.name
                )));
            }
        }
        let consts = pool.detect_constants();
        let n_const = consts.names.len();
        let mut universes: Vec<Universe> = Vec::new();
        let mut objs = Vec::new();
        let mut offs = Vec::new();
        let mut total = 0usize;
        for (i, inst) in pool.instances.iter().enumerate() {
            let others: Vec<String> = inst
                .object_names()
                .iter()
                .filter(|o| !consts.names.contains(o))
                .cloned()
                .collect();
            let u = Universe::new(&consts.names, &others);
            if u.len() > 128 {
                return Err(LearnError::TooLarge(format!(
                    "instance {} has {} objects; the solver handles at most 128",
                    inst.name,
                    u.len()
                )));
            }
            objs.push(u.object_ids().collect());
            universes.push(u);
            offs.push(total);
            total += dataset.instances[i].states.len();
        }
        // Translated denotations for every entry and state.
        let mut tex: Vec<Vec<TSet>> = Vec::with_capacity(pool.entries.len());
        for e in 0..pool.entries.len() {
            let mut per_state = Vec::with_capacity(total);
            for (i, inst) in pool.instances.iter().enumerate() {
                let tr: Vec<Option<ObjId>> = inst
                    .universe
                    .iter()
                    .map(|name| universes[i].id_of(name))
                    .collect();
                for s in 0..dataset.instances[i].states.len() {
                    per_state.push(translate(pool.ext(e, i, s), &tr));
                }
            }
            tex.push(per_state);
        }
        let st: Vec<usize> = (0..pool.entries.len())
            .filter(|&e| pool.is_static_everywhere(e))
            .collect();
        if st.len() > 64 {
            return Err(LearnError::TooLarge(format!(
                "{} static pool entries; the solver handles at most 64",
                st.len()
            )));
        }
        let labels = dataset.labels.clone();
        let mut marked = Vec::new();
        let mut midx: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, di) in dataset.instances.iter().enumerate() {
            for &s in &di.marked {
                midx.insert((i, s), marked.len());
                marked.push((i, s));
            }
        }
        let mut trans: Vec<Vec<Trans>> = vec![Vec::new(); labels.len()];
        for (i, di) in dataset.instances.iter().enumerate() {
            for (src, label, dst) in &di.edges {
                if !di.marked.contains(src) {
                    continue;
                }
                let l = labels.iter().position(|x| x == label).ok_or_else(|| {
                    LearnError::Mismatch(format!("edge label {label} not in dataset labels"))
                })?;
                trans[l].push(Trans {
                    inst: i,
                    src: *src,
                    dst: *dst,
                    midx: midx[&(i, *src)],
                });
            }
        }
        for ts in &mut trans {
            ts.sort_by_key(|t| (t.inst, t.src, t.dst));
        }
        // Fluent candidates: entries that change somewhere, or at least are
        // not static in every instance. An entry whose own changes on some
        // transition exceed the arity budget can never be selected.
        let all_trans: Vec<&Trans> = trans.iter().flatten().collect();
        let mut fl = Vec::new();
        let mut fl_deltas: Vec<Vec<Delta>> = Vec::new();
        for e in 0..pool.entries.len() {
            if st.contains(&e) {
                continue;
            }
            let ds: Vec<Delta> = all_trans
                .iter()
                .map(|t| {
                    delta_of(
                        &tex[e][offs[t.inst] + t.src],
                        &tex[e][offs[t.inst] + t.dst],
                        n_const,
                    )
                })
                .collect();
            if ds
                .iter()
                .all(|d| (d.objs.count_ones() as usize) <= beta.max_arity)
            {
                fl.push(e);
                fl_deltas.push(ds);
            }
        }
        if fl.len() > 128 {
            return Err(LearnError::TooLarge(format!(
                "{} fluent candidates; the solver handles at most 128",
                fl.len()
            )));
        }
        // Re-group deltas as [label][trans][fl position].
        let mut deltas: Vec<Vec<Vec<Delta>>> = Vec::with_capacity(labels.len());
        let mut k = 0usize;
        for ts in &trans {
            let mut per_label = Vec::with_capacity(ts.len());
            for _ in ts {
                per_label.push(fl_deltas.iter().map(|ds| ds[k].clone()).collect());
                k += 1;
            }
            deltas.push(per_label);
        }
        // Active/passive split of the fluent candidates.
        let mut act = Vec::new();
        let mut passive_mask = 0u128;
        for fi in 0..fl.len() {
            if deltas.iter().flatten().any(|ds| !ds[fi].tuples.is_empty()) {
                act.push(fi);
            } else {
                passive_mask |= 1 << fi;
            }
        }
        let mut act_rest = vec![0u128; act.len() + 1];
        for i in (0..act.len()).rev() {
            act_rest[i] = act_rest[i + 1] | (1 << act[i]);
        }
        // C1: distinguishing-fluent masks for same-instance marked pairs.
        let mut pair_masks = Vec::new();
        for (i, di) in dataset.instances.iter().enumerate() {
            let ms: Vec<usize> = di.marked.iter().copied().collect();
            for (a, &sa) in ms.iter().enumerate() {
                for &sb in &ms[a + 1..] {
                    let mut mask = 0u128;
                    for (fi, &e) in fl.iter().enumerate() {
                        if tex[e][offs[i] + sa] != tex[e][offs[i] + sb] {
                            mask |= 1 << fi;
                        }
                    }
                    pair_masks.push(mask);
                }
            }
        }
        Ok(Search {
            pool,
            beta,
            consts,
            n_const,
            objs,
            offs,
            tex,
            fl,
            act,
            act_rest,
            passive_mask,
            st,
            labels,
            marked,
            trans,
            deltas,
            pair_masks,
            start: Instant::now(),
            nodes: 0,
            stats: (0, 0, 0, 0),
            capped: false,
            incumbent: None,
            assign_cache: HashMap::new(),
        })
    }

    fn bump(&mut self) -> Result<(), Capped> {
        self.nodes += 1;
        if self.nodes > self.beta.node_cap {
            self.capped = true;
            return Err(Capped);
        }
        if self.nodes % 4096 == 0 {
            if let Some(limit) = self.beta.time_limit {
                if self.start.elapsed() > limit {
                    self.capped = true;
                    return Err(Capped);
                }
            }
        }
        Ok(())
    }

    fn gs(&self, inst: usize, state: usize) -> usize {
        self.offs[inst] + state
    }

    fn entry_cost(&self, e: usize) -> u32 {
        1 + self.pool.entries[e].arity as u32
    }

    /// Total cost of the fluent entries in a mask over `fl` positions.
    fn fluent_cost(&self, mask: u128) -> u32 {
        (0..self.fl.len())
            .filter(|fi| mask & (1 << fi) != 0)
            .map(|fi| self.entry_cost(self.fl[fi]))
            .sum()
    }

    /// Best-first branch and bound over active-fluent cores, ordered by the
    /// monotone lower bound (Σ arity contributions, core fluent cost). Each
    /// core is generated once by extending with active entries past its
    /// largest index; popping a bound no better than the incumbent proves
    /// optimality and ends the search.
    fn run(&mut self) -> Result<(), Capped> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        // (c1 lower bound, core fluent cost, mask, next index into `act`)
        type Key = (u32, u32, u128, usize);
        let mut heap: BinaryHeap<Reverse<Key>> = BinaryHeap::new();
        heap.push(Reverse((self.labels.len() as u32, 0, 0, 0)));
        let n_trans: usize = self.trans.iter().map(|t| t.len()).sum();
        while let Some(Reverse((c1lb, c2, mask, next))) = heap.pop() {
            if let Some(inc) = &self.incumbent {
                if CostTuple(c1lb, c2, 0, 0, 0) >= inc.cost {
                    return Ok(()); // every remaining bound is no better
                }
            }
            self.stats.0 += 1;
            self.bump()?;
            // C1 must remain satisfiable with the entries still available:
            // the remaining active entries plus every passive entry.
            let avail = mask | self.act_rest[next] | self.passive_mask;
            if self.pair_masks.iter().any(|&p| p & avail == 0) {
                continue;
            }
            // Per-transition changed-object unions under this core.
            let mut tobj = vec![0u128; n_trans];
            let mut k = 0usize;
            for (l, ts) in self.trans.iter().enumerate() {
                for ti in 0..ts.len() {
                    for &fi in &self.act {
                        if mask & (1 << fi) != 0 {
                            tobj[k] |= self.deltas[l][ti][fi].objs;
                        }
                    }
                    k += 1;
                }
            }
            if self
                .pair_masks
                .iter()
                .all(|&p| p & (mask | self.passive_mask) != 0)
            {
                self.evaluate(mask, c2, &tobj)?;
            }
            if (mask.count_ones() as usize) + 1 > self.beta.num_predicates {
                continue;
            }
            'child: for ai in next..self.act.len() {
                let fi = self.act[ai];
                // Anti-monotone arity filter, and the child's own bound.
                let mut child_c1lb = 0u32;
                let mut k = 0usize;
                for (l, ts) in self.trans.iter().enumerate() {
                    let mut lb = 0u32;
                    for ti in 0..ts.len() {
                        let m = tobj[k] | self.deltas[l][ti][fi].objs;
                        if (m.count_ones() as usize) > self.beta.max_arity {
                            continue 'child;
                        }
                        lb = lb.max(m.count_ones());
                        k += 1;
                    }
                    child_c1lb += 1 + lb;
                }
                heap.push(Reverse((
                    child_c1lb,
                    c2 + self.entry_cost(self.fl[fi]),
                    mask | (1 << fi),
                    ai + 1,
                )));
            }
        }
        Ok(())
    }

    /// Evaluates one C1-satisfying fluent set: solves every label, combines
    /// the per-label options, and updates the incumbent.
    fn evaluate(&mut self, mask: u128, c2: u32, tobj: &[u128]) -> Result<(), Capped> {
        self.stats.1 += 1;
        // First pass: per label, options at the lowest feasible arity.
        let opts = match self.all_label_options(mask, tobj, false)? {
            Some(o) => o,
            None => return Ok(()),
        };
        let (found, budget_blocked) = self.combine(mask, c2, &opts);
        if !found && budget_blocked {
            // The predicate budget rejected every combination; retry with
            // all arities so a label can trade arity for fewer statics.
            if let Some(opts) = self.all_label_options(mask, tobj, true)? {
                self.combine(mask, c2, &opts);
            }
        }
        Ok(())
    }

    fn all_label_options(
        &mut self,
        mask: u128,
        tobj: &[u128],
        all_arities: bool,
    ) -> Result<Option<Vec<Vec<LabelOpt>>>, Capped> {
        let mut opts: Vec<Vec<LabelOpt>> = Vec::with_capacity(self.labels.len());
        let mut k = 0usize;
        for l in 0..self.labels.len() {
            let nt = self.trans[l].len();
            let lb = tobj[k..k + nt]
                .iter()
                .map(|m| m.count_ones() as usize)
                .max()
                .unwrap_or(0);
            k += nt;
            let mut label_opts = Vec::new();
            for n in lb..=self.beta.max_arity {
                let found = self.label_options_at(l, n, mask, &mut label_opts)?;
                if found && !all_arities {
                    break;
                }
            }
            if label_opts.is_empty() {
                return Ok(None);
            }
            opts.push(label_opts);
        }
        Ok(Some(opts))
    }

    /// Collects Pareto per-label solutions at a fixed arity; returns whether
    /// any exist.
    fn label_options_at(
        &mut self,
        l: usize,
        n: usize,
        mask: u128,
        out: &mut Vec<LabelOpt>,
    ) -> Result<bool, Capped> {
        let dmask = self.delta_mask(l, mask);
        let key = (l, n, dmask);
        if !self.assign_cache.contains_key(&key) {
            let assigns = self.enum_assigns(l, n, dmask)?;
            self.assign_cache.insert(key, assigns);
        }
        let assigns = self.assign_cache[&key].clone();
        let before = out.len();
        for a in &assigns {
            let eff_opts: Vec<(Vec<LAtom>, u128)> = if a.eff.is_empty() {
                self.fill_effects(l, n, mask, a)
            } else {
                vec![(a.eff.clone(), 0)]
            };
            if eff_opts.is_empty() {
                continue;
            }
            let covers = match self.pareto_covers(n, mask, a)? {
                Some(c) => c,
                None => continue,
            };
            for (eff, epm) in &eff_opts {
                for (smask, cpm, gate) in &covers {
                    let opt = LabelOpt {
                        n,
                        smask: *smask,
                        pmask: epm | cpm,
                        eff: eff.clone(),
                        gate: gate.clone(),
                    };
                    insert_pareto(out, opt);
                }
            }
        }
        Ok(out.len() > before)
    }

    /// Fluents (as a sub-mask of `mask`) with any change on the label's
    /// transitions.
    fn delta_mask(&self, l: usize, mask: u128) -> u128 {
        let mut dm = 0u128;
        for fi in 0..self.fl.len() {
            if mask & (1 << fi) == 0 {
                continue;
            }
            if self.deltas[l].iter().any(|ds| !ds[fi].tuples.is_empty()) {
                dm |= 1 << fi;
            }
        }
        dm
    }

    /// Enumerates all binding assignments for a label at arity `n`, with
    /// the shared-effect consistency checks and symmetry breaking.
    fn enum_assigns(&mut self, l: usize, n: usize, dmask: u128) -> Result<Vec<Assign>, Capped> {
        self.stats.2 += 1;
        let ts: Vec<Trans> = self.trans[l].clone();
        // Per transition: merged delta (entry, tuple, target value) and the
        // required (changed, non-constant) objects.
        let mut merged: Vec<Vec<(usize, Tup, bool)>> = Vec::with_capacity(ts.len());
        let mut req: Vec<Vec<ObjId>> = Vec::with_capacity(ts.len());
        for (ti, _) in ts.iter().enumerate() {
            let mut md = Vec::new();
            let mut ro = 0u128;
            for fi in 0..self.fl.len() {
                if dmask & (1 << fi) == 0 {
                    continue;
                }
                let d = &self.deltas[l][ti][fi];
                for &(tup, v) in &d.tuples {
                    md.push((self.fl[fi], tup, v));
                }
                ro |= d.objs;
            }
            if ro.count_ones() as usize > n {
                return Ok(Vec::new());
            }
            merged.push(md);
            req.push((0..128u32).filter(|&b| ro & (1 << b) != 0).collect());
        }
        let mut out = Vec::new();
        let mut eff: BTreeMap<(usize, Vec<LArg>), bool> = BTreeMap::new();
        let mut chosen: Vec<Vec<ObjId>> = Vec::with_capacity(ts.len());
        self.assign_dfs(&ts, &merged, &req, n, 0, &mut eff, &mut chosen, &mut out)?;
        // Different transition-to-binding pairings can reduce to the same
        // per-state binding sets and effects; keep one of each.
        out.sort();
        out.dedup();
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_dfs(
        &mut self,
        ts: &[Trans],
        merged: &[Vec<(usize, Tup, bool)>],
        req: &[Vec<ObjId>],
        n: usize,
        ti: usize,
        eff: &mut BTreeMap<(usize, Vec<LArg>), bool>,
        chosen: &mut Vec<Vec<ObjId>>,
        out: &mut Vec<Assign>,
    ) -> Result<(), Capped> {
        self.bump()?;
        if out.len() >= ASSIGN_CAP {
            self.capped = true;
            return Ok(());
        }
        if ti == ts.len() {
            let mut good: Vec<Vec<Vec<ObjId>>> = vec![Vec::new(); self.marked.len()];
            for (k, t) in ts.iter().enumerate() {
                good[t.midx].push(chosen[k].clone());
            }
            for g in &mut good {
                g.sort();
            }
            let a = Assign {
                good,
                eff: eff
                    .iter()
                    .map(|((e, args), &v)| (*e, args.clone(), v))
                    .collect(),
            };
            out.push(a);
            return Ok(());
        }
        let candidates = self.bindings_for(ts, req, n, ti, chosen);
        for b in candidates {
            self.bump()?;
            if let Some(added) = self.try_binding(ts, merged, ti, &b, chosen, eff) {
                chosen.push(b);
                self.assign_dfs(ts, merged, req, n, ti + 1, eff, chosen, out)?;
                chosen.pop();
                for key in added {
                    eff.remove(&key);
                }
            }
        }
        Ok(())
    }

    /// Candidate bindings for transition `ti`: distinct object tuples that
    /// contain the required objects, restricted by the symmetry rules and
    /// by distinctness within the source state.
    fn bindings_for(
        &self,
        ts: &[Trans],
        req: &[Vec<ObjId>],
        n: usize,
        ti: usize,
        chosen: &[Vec<ObjId>],
    ) -> Vec<Vec<ObjId>> {
        let t = ts[ti];
        let pool_objs = &self.objs[t.inst];
        let used: Vec<&Vec<ObjId>> = (0..ti)
            .filter(|&k| ts[k].inst == t.inst && ts[k].src == t.src)
            .map(|k| &chosen[k])
            .collect();
        // Lower lexicographic bound among transitions with equal endpoints.
        let floor: Option<&Vec<ObjId>> = (0..ti)
            .rev()
            .find(|&k| ts[k].inst == t.inst && ts[k].src == t.src && ts[k].dst == t.dst)
            .map(|k| &chosen[k]);
        let mut result = Vec::new();
        let mut cur: Vec<ObjId> = Vec::with_capacity(n);
        fill_tuples(pool_objs, n, &mut cur, &mut |b: &[ObjId]| {
            if !req[ti].iter().all(|r| b.contains(r)) {
                return;
            }
            if ti == 0 && !b.windows(2).all(|w| w[0] < w[1]) {
                return; // variable renaming symmetry: first binding sorted
            }
            if let Some(f) = floor {
                if b <= f.as_slice() {
                    return;
                }
            }
            if used.iter().any(|u| u.as_slice() == b) {
                return;
            }
            result.push(b.to_vec());
        });
        result
    }

    /// Tries a binding for transition `ti`: lifts its delta, merges into the
    /// shared effect set, and cross-checks both directions. Returns the
    /// newly added effect keys on success.
    fn try_binding(
        &self,
        ts: &[Trans],
        merged: &[Vec<(usize, Tup, bool)>],
        ti: usize,
        b: &[ObjId],
        chosen: &[Vec<ObjId>],
        eff: &mut BTreeMap<(usize, Vec<LArg>), bool>,
    ) -> Option<Vec<(usize, Vec<LArg>)>> {
        let t = ts[ti];
        let mut added = Vec::new();
        let mut ok = true;
        for &(e, tup, v) in &merged[ti] {
            let args = match self.lift(e, tup, b) {
                Some(a) => a,
                None => {
                    ok = false;
                    break;
                }
            };
            match eff.get(&(e, args.clone())) {
                Some(&prev) if prev != v => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    // Back-check the new atom against earlier transitions.
                    for (k, bk) in chosen.iter().enumerate() {
                        let g = self.ground(&args, bk);
                        let dst = self.gs(ts[k].inst, ts[k].dst);
                        if self.tex[e][dst].contains(&g) != v {
                            ok = false;
                            break;
                        }
                    }
                    if !ok {
                        break;
                    }
                    eff.insert((e, args.clone()), v);
                    added.push((e, args));
                }
            }
        }
        // Forward check: every shared effect must ground consistently with
        // this transition's target state.
        if ok {
            let dst = self.gs(t.inst, t.dst);
            for ((e, args), &v) in eff.iter() {
                let g = self.ground(args, b);
                if self.tex[*e][dst].contains(&g) != v {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            Some(added)
        } else {
            for key in &added {
                eff.remove(key);
            }
            None
        }
    }

    /// Lifts a ground tuple through a binding: constants stay constant,
    /// bound objects become variables, anything else fails.
    fn lift(&self, entry: usize, tup: Tup, b: &[ObjId]) -> Option<Vec<LArg>> {
        let arity = self.pool.entries[entry].arity;
        let mut args = Vec::with_capacity(arity);
        for x in [tup.0, tup.1].into_iter().take(arity) {
            if (x as usize) < self.n_const {
                args.push(LArg::C(x as u8));
            } else if let Some(pos) = b.iter().position(|&o| o == x) {
                args.push(LArg::V(pos as u8));
            } else {
                return None;
            }
        }
        Some(args)
    }

    fn ground(&self, args: &[LArg], b: &[ObjId]) -> Tup {
        let mut g = [NONE, NONE];
        for (i, a) in args.iter().enumerate() {
            g[i] = match a {
                LArg::V(v) => b[*v as usize],
                LArg::C(c) => *c as u32,
            };
        }
        (g[0], g[1])
    }

    /// Effect-atom fillers for labels whose transitions change nothing: a
    /// no-op atom consistent with every transition of the assignment. An
    /// atom over a core fluent is free and dominates every alternative;
    /// otherwise each passive entry admitting one is an option priced by
    /// its mask.
    fn fill_effects(&self, l: usize, n: usize, mask: u128, a: &Assign) -> Vec<(Vec<LAtom>, u128)> {
        let mut out = Vec::new();
        for fi in 0..self.fl.len() {
            let in_core = mask & (1 << fi) != 0;
            if !in_core && self.passive_mask & (1 << fi) == 0 {
                continue; // active entries outside the core are unavailable
            }
            if let Some(atom) = self.consistent_atom(l, n, self.fl[fi], a) {
                if in_core {
                    return vec![(vec![atom], 0)];
                }
                out.push((vec![atom], 1u128 << fi));
            }
        }
        out
    }

    /// A no-op atom over one entry consistent with every transition of the
    /// assignment, if any.
    fn consistent_atom(&self, l: usize, n: usize, e: usize, a: &Assign) -> Option<LAtom> {
        let ts = &self.trans[l];
        let arity = self.pool.entries[e].arity;
        for args in arg_tuples(arity, n, self.n_const) {
            for v in [true, false] {
                let consistent = ts.iter().enumerate().all(|(k, t)| {
                    // Recover the binding: the k-th transition of the
                    // assignment in canonical order.
                    let b = &binding_of(a, ts, k);
                    let g = self.ground(&args, b);
                    self.tex[e][self.gs(t.inst, t.dst)].contains(&g) == v
                });
                if consistent {
                    return Some((e, args, v));
                }
            }
        }
        None
    }

    /// Enumerates Pareto-minimal gating covers for an assignment: every
    /// non-chosen binding of every marked state excluded, every chosen
    /// binding satisfied. Returns None when no cover exists.
    fn pareto_covers(
        &mut self,
        n: usize,
        mask: u128,
        a: &Assign,
    ) -> Result<Option<Vec<(u64, u128, Vec<LAtom>)>>, Capped> {
        self.stats.3 += 1;
        // Bad elements: (marked index, binding) not chosen.
        let mut bad: Vec<(usize, Vec<ObjId>)> = Vec::new();
        for (m, &(inst, _)) in self.marked.iter().enumerate() {
            let mut cur = Vec::with_capacity(n);
            let good = &a.good[m];
            fill_tuples(&self.objs[inst], n, &mut cur, &mut |b: &[ObjId]| {
                if !good.iter().any(|g| g.as_slice() == b) {
                    bad.push((m, b.to_vec()));
                }
            });
        }
        // Candidate literals, satisfied by every chosen binding. They may
        // use core fluents (free), passive entries (priced as new fluents),
        // or static entries (priced globally).
        let mut lits: Vec<(LAtom, Vec<u64>, u64, u128)> = Vec::new();
        let words = bad.len().div_ceil(64);
        let mut preds: Vec<(usize, u64, u128)> = (0..self.fl.len())
            .filter(|fi| (mask | self.passive_mask) & (1 << fi) != 0)
            .map(|fi| {
                let pm = if mask & (1 << fi) != 0 { 0 } else { 1u128 << fi };
                (self.fl[fi], 0u64, pm)
            })
            .collect();
        preds.extend(
            self.st
                .iter()
                .enumerate()
                .map(|(si, &e)| (e, 1u64 << si, 0u128)),
        );
        for &(e, smask, pmask) in &preds {
            let arity = self.pool.entries[e].arity;
            for args in arg_tuples(arity, n, self.n_const) {
                for v in [true, false] {
                    let lit_ok = self.marked.iter().enumerate().all(|(m, &(inst, src))| {
                        let gsrc = self.gs(inst, src);
                        a.good[m]
                            .iter()
                            .all(|b| self.tex[e][gsrc].contains(&self.ground(&args, b)) == v)
                    });
                    if !lit_ok {
                        continue;
                    }
                    let mut cover = vec![0u64; words];
                    let mut any = false;
                    for (bi, (m, b)) in bad.iter().enumerate() {
                        let (inst, src) = self.marked[*m];
                        let g = self.ground(&args, b);
                        if self.tex[e][self.gs(inst, src)].contains(&g) != v {
                            cover[bi / 64] |= 1 << (bi % 64);
                            any = true;
                        }
                    }
                    if any || bad.is_empty() {
                        lits.push(((e, args.clone(), v), cover, smask, pmask));
                    }
                }
            }
        }
        if bad.is_empty() {
            return Ok(Some(vec![(0, 0, Vec::new())]));
        }
        // Every bad element needs at least one covering literal.
        let mut all = vec![0u64; words];
        for (_, c, _, _) in &lits {
            for (w, x) in all.iter_mut().zip(c) {
                *w |= x;
            }
        }
        for bi in 0..bad.len() {
            if all[bi / 64] & (1 << (bi % 64)) == 0 {
                return Ok(None);
            }
        }
        let mut pareto: Vec<(u64, u128, Vec<LAtom>)> = Vec::new();
        let uncovered: Vec<u64> = (0..bad.len())
            .fold(vec![0u64; words], |mut acc, bi| {
                acc[bi / 64] |= 1 << (bi % 64);
                acc
            });
        self.cover_dfs(&lits, &uncovered, 0, 0, &mut Vec::new(), &mut pareto)?;
        if pareto.is_empty() {
            Ok(None)
        } else {
            Ok(Some(pareto))
        }
    }

    fn cover_dfs(
        &mut self,
        lits: &[(LAtom, Vec<u64>, u64, u128)],
        uncovered: &[u64],
        smask: u64,
        pmask: u128,
        chosen: &mut Vec<usize>,
        pareto: &mut Vec<(u64, u128, Vec<LAtom>)>,
    ) -> Result<(), Capped> {
        self.bump()?;
        // Dominance prune: a known cover using a subset of the priced
        // entries and no more atoms makes every completion here redundant
        // (any completion uses at least as many atoms and a superset of
        // the priced entries).
        let done = uncovered.iter().all(|&w| w == 0);
        if pareto.iter().any(|(pm, ppm, pa)| {
            pm & !smask == 0 && ppm & !pmask == 0 && pa.len() <= chosen.len()
        }) {
            return Ok(());
        }
        if done {
            let atoms: Vec<LAtom> = chosen.iter().map(|&i| lits[i].0.clone()).collect();
            pareto.retain(|(pm, ppm, pa)| {
                !(smask & !pm == 0 && pmask & !ppm == 0 && atoms.len() <= pa.len())
            });
            pareto.push((smask, pmask, atoms));
            return Ok(());
        }
        // Branch on the first uncovered element, trying literals that add
        // no priced entries and exclude the most bindings first.
        let bi = uncovered
            .iter()
            .enumerate()
            .find_map(|(w, &x)| (x != 0).then(|| w * 64 + x.trailing_zeros() as usize))
            .unwrap();
        let mut branches: Vec<(bool, Reverse<u32>, usize)> = lits
            .iter()
            .enumerate()
            .filter(|(_, (_, cover, _, _))| cover[bi / 64] & (1 << (bi % 64)) != 0)
            .map(|(i, (_, cover, lsm, lpm))| {
                let gain: u32 = uncovered
                    .iter()
                    .zip(cover)
                    .map(|(u, c)| (u & c).count_ones())
                    .sum();
                (*lsm & !smask != 0 || *lpm & !pmask != 0, Reverse(gain), i)
            })
            .collect();
        branches.sort();
        for (_, _, i) in branches {
            let (_, cover, lsm, lpm) = &lits[i];
            let rest: Vec<u64> = uncovered.iter().zip(cover).map(|(u, c)| u & !c).collect();
            chosen.push(i);
            self.cover_dfs(lits, &rest, smask | lsm, pmask | lpm, chosen, pareto)?;
            chosen.pop();
        }
        Ok(())
    }

    /// Combines per-label options into complete models, updating the
    /// incumbent. Returns (found any complete model, hit predicate budget).
    fn combine(&mut self, mask: u128, c2: u32, opts: &[Vec<LabelOpt>]) -> (bool, bool) {
        let mut found = false;
        let mut blocked = false;
        let mut pick: Vec<usize> = Vec::new();
        self.combine_dfs(
            mask,
            c2,
            opts,
            0,
            0,
            0,
            0,
            0,
            0,
            &mut pick,
            &mut found,
            &mut blocked,
        );
        (found, blocked)
    }

    #[allow(clippy::too_many_arguments)]
    fn combine_dfs(
        &mut self,
        mask: u128,
        c2: u32,
        opts: &[Vec<LabelOpt>],
        l: usize,
        c1: u32,
        smask: u64,
        pmask: u128,
        c4: u32,
        c5: u32,
        pick: &mut Vec<usize>,
        found: &mut bool,
        blocked: &mut bool,
    ) {
        if l == opts.len() {
            // Any marked pair the accumulated fluents fail to distinguish
            // must be completed with passive entries not used so far.
            let cands = self.passive_mask & !pmask;
            let mut missing: Vec<u128> = Vec::new();
            for &p in &self.pair_masks {
                if p & (mask | pmask) == 0 {
                    let c = p & cands;
                    if c == 0 {
                        return; // this pair cannot be distinguished
                    }
                    if !missing.contains(&c) {
                        missing.push(c);
                    }
                }
            }
            let completions = self.c1_completions(&missing);
            let pcost = self.fluent_cost(pmask);
            let c3: u32 = (0..self.st.len())
                .filter(|si| smask & (1 << si) != 0)
                .map(|si| self.entry_cost(self.st[si]))
                .sum();
            for (ccost, cmask) in completions {
                let full = mask | pmask | cmask;
                let n_preds = full.count_ones() + smask.count_ones();
                if n_preds as usize > self.beta.num_predicates {
                    *blocked = true;
                    continue;
                }
                let cost = CostTuple(c1, c2 + pcost + ccost, c3, c4, c5);
                *found = true;
                if self.incumbent.as_ref().is_none_or(|inc| cost < inc.cost) {
                    let schemas = pick
                        .iter()
                        .enumerate()
                        .map(|(li, &oi)| {
                            let o = &opts[li][oi];
                            (o.n, o.eff.clone(), o.gate.clone())
                        })
                        .collect();
                    self.incumbent = Some(Candidate {
                        cost,
                        phi: (0..self.fl.len())
                            .filter(|fi| full & (1 << fi) != 0)
                            .map(|fi| self.fl[fi])
                            .collect(),
                        schemas,
                        statics: (0..self.st.len())
                            .filter(|si| smask & (1 << si) != 0)
                            .map(|si| self.st[si])
                            .collect(),
                    });
                }
            }
            return;
        }
        // Cheap lexicographic bound over the remaining labels.
        if let Some(inc) = &self.incumbent {
            let rem: u32 = opts[l..]
                .iter()
                .map(|os| os.iter().map(|o| 1 + o.n as u32).min().unwrap_or(1))
                .sum();
            if CostTuple(c1 + rem, c2 + self.fluent_cost(pmask), 0, 0, 0) > inc.cost {
                return;
            }
        }
        for (oi, o) in opts[l].iter().enumerate() {
            pick.push(oi);
            self.combine_dfs(
                mask,
                c2,
                opts,
                l + 1,
                c1 + 1 + o.n as u32,
                smask | o.smask,
                pmask | o.pmask,
                c4 + o.eff.len() as u32,
                c5 + o.gate.len() as u32,
                pick,
                found,
                blocked,
            );
            pick.pop();
        }
    }

    /// Pareto-minimal (added fluent cost, entry mask) completions of C1
    /// from passive entries, over the per-pair candidate masks. The Pareto
    /// front is over (cost, entry count) so the predicate budget can trade
    /// one for the other.
    fn c1_completions(&self, missing: &[u128]) -> Vec<(u32, u128)> {
        let mut out: Vec<(u32, u32, u128)> = Vec::new();
        self.c1_dfs(missing, 0, 0, &mut out);
        out.into_iter().map(|(c, _, m)| (c, m)).collect()
    }

    fn c1_dfs(&self, missing: &[u128], cost: u32, cmask: u128, out: &mut Vec<(u32, u32, u128)>) {
        let count = cmask.count_ones();
        if out.iter().any(|&(oc, on, _)| oc <= cost && on <= count) {
            return;
        }
        match missing.iter().find(|&&p| p & cmask == 0) {
            None => {
                out.retain(|&(oc, on, _)| !(cost <= oc && count <= on));
                out.push((cost, count, cmask));
            }
            Some(&p) => {
                for fi in 0..self.fl.len() {
                    if p & (1 << fi) != 0 {
                        self.c1_dfs(
                            missing,
                            cost + self.entry_cost(self.fl[fi]),
                            cmask | (1 << fi),
                            out,
                        );
                    }
                }
            }
        }
    }

    /// Builds the final grounded domain from the incumbent candidate.
    fn build_domain(&self, cand: &Candidate) -> GroundedDomain {
        // Predicate order: arity ascending, then pool order.
        let mut entries: Vec<usize> = cand
            .phi
            .iter()
            .chain(&cand.statics)
            .copied()
            .collect();
        entries.sort_by_key(|&e| (self.pool.entries[e].arity, e));
        let pidx: HashMap<usize, usize> =
            entries.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let sigma = entries
            .iter()
            .map(|&e| self.pool.entries[e].expr.clone())
            .collect();
        let statics: BTreeSet<usize> = entries
            .iter()
            .enumerate()
            .filter(|(_, e)| self.st.contains(e))
            .map(|(i, _)| i)
            .collect();
        let to_atom = |(e, args, v): &LAtom| SchemaAtom {
            predicate: pidx[e],
            args: args
                .iter()
                .map(|a| match a {
                    LArg::V(i) => Arg::Var(*i as usize + 1),
                    LArg::C(c) => Arg::Const(*c as usize),
                })
                .collect(),
            positive: *v,
        };
        let schemas = self
            .labels
            .iter()
            .zip(&cand.schemas)
            .map(|(label, (n, eff, gate))| {
                let mut statics_atoms = Vec::new();
                let mut pres = Vec::new();
                for g in gate {
                    if self.st.contains(&g.0) {
                        statics_atoms.push(to_atom(g));
                    } else {
                        pres.push(to_atom(g));
                    }
                }
                let mut effects: Vec<SchemaAtom> = eff.iter().map(&to_atom).collect();
                statics_atoms.sort();
                pres.sort();
                effects.sort();
                Schema {
                    label: label.clone(),
                    arity: *n,
                    statics: statics_atoms,
                    preconditions: pres,
                    effects,
                }
            })
            .collect();
        grounded_domain("learned", sigma, &statics, self.consts.clone(), schemas)
    }
}

/// Recovers the binding the assignment used for the k-th transition of the
/// label, by replaying the grouping into `good`.
fn binding_of(a: &Assign, ts: &[Trans], k: usize) -> Vec<ObjId> {
    // Transitions of the same source appear in canonical order, but the
    // per-state binding lists are sorted; recover by pairing each source's
    // transitions with its sorted bindings through the target states.
    // Since `good` only groups by state, reconstruct by counting: the i-th
    // transition with this marked index takes the i-th binding.
    let m = ts[k].midx;
    let i = ts[..k].iter().filter(|t| t.midx == m).count();
    a.good[m][i].clone()
}

/// All argument tuples over variables `0..n` and constants, with distinct
/// symbols, in canonical order.
fn arg_tuples(arity: usize, n: usize, n_const: usize) -> Vec<Vec<LArg>> {
    let mut symbols: Vec<LArg> = (0..n).map(|i| LArg::V(i as u8)).collect();
    symbols.extend((0..n_const).map(|c| LArg::C(c as u8)));
    match arity {
        0 => vec![Vec::new()],
        1 => symbols.iter().map(|&s| vec![s]).collect(),
        2 => {
            let mut out = Vec::new();
            for &a in &symbols {
                for &b in &symbols {
                    if a != b {
                        out.push(vec![a, b]);
                    }
                }
            }
            out
        }
        _ => unreachable!("pool entries have arity at most 2"),
    }
}

/// Enumerates all ordered tuples of `n` distinct objects, calling `f` on
/// each.
fn fill_tuples(objs: &[ObjId], n: usize, cur: &mut Vec<ObjId>, f: &mut dyn FnMut(&[ObjId])) {
    if cur.len() == n {
        f(cur);
        return;
    }
    for &o in objs {
        if !cur.contains(&o) {
            cur.push(o);
            fill_tuples(objs, n, cur, f);
            cur.pop();
        }
    }
}

/// Inserts a per-label option, keeping the list Pareto-minimal over
/// (arity, static set, passive set, #effects, #gate atoms). A lower arity
/// always wins because the action-arity component dominates the cost.
fn insert_pareto(out: &mut Vec<LabelOpt>, opt: LabelOpt) {
    let dominated = |a: &LabelOpt, b: &LabelOpt| {
        // a dominates b
        a.n <= b.n
            && a.smask & !b.smask == 0
            && a.pmask & !b.pmask == 0
            && a.eff.len() <= b.eff.len()
            && a.gate.len() <= b.gate.len()
    };
    if out.iter().any(|o| dominated(o, &opt)) {
        return;
    }
    out.retain(|o| !dominated(&opt, o));
    out.push(opt);
}

/// Translates a pool extension into universe-id tuples, dropping tuples
/// that mention shape constants and reflexive pairs.
fn translate(ext: &Extension<u32>, tr: &[Option<ObjId>]) -> TSet {
    let mut out = TSet::new();
    match ext {
        Extension::Nullary(true) => {
            out.insert((NONE, NONE));
        }
        Extension::Nullary(false) => {}
        Extension::Unary(xs) => {
            for &x in xs {
                if let Some(id) = tr[x as usize] {
                    out.insert((id, NONE));
                }
            }
        }
        Extension::Binary(ps) => {
            for &(x, y) in ps {
                if x == y {
                    continue;
                }
                if let (Some(a), Some(b)) = (tr[x as usize], tr[y as usize]) {
                    out.insert((a, b));
                }
            }
        }
    }
    out
}

/// The per-entry change across one transition.
fn delta_of(src: &TSet, dst: &TSet, n_const: usize) -> Delta {
    let mut d = Delta::default();
    for &t in src.difference(dst) {
        d.tuples.push((t, false));
    }
    for &t in dst.difference(src) {
        d.tuples.push((t, true));
    }
    for &(t, _) in &d.tuples {
        for x in [t.0, t.1] {
            if x != NONE && (x as usize) >= n_const {
                d.objs |= 1 << x;
            }
        }
    }
    d.tuples.sort();
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::{write_grounded_domain, DataInstance};
    use crate::o2d::{GroundAtom, O2DSignature, O2DState};
    use crate::verifier::verify;

    fn sig() -> O2DSignature {
        O2DSignature::new(vec!["rectangle".into()], vec![]).unwrap()
    }

    fn state(id: &str, atoms: Vec<GroundAtom>) -> O2DState {
        let mut s = O2DState::from_atoms(&sig(), atoms).with_ids("i0", id);
        s.objects = ["a", "b"].iter().map(|x| x.to_string()).collect();
        s
    }

    /// Two states over {a, b} differing in one atom, one labeled edge.
    fn micro() -> (Dataset, PredicatePool) {
        let s0 = state("s0", vec![GroundAtom::new("below", &["a", "b"])]);
        let s1 = state("s1", vec![]);
        let dataset = Dataset {
            signature: sig(),
            labels: vec!["Go".into()],
            instances: vec![DataInstance {
                name: "i0".into(),
                states: vec![s0.clone(), s1.clone()],
                edges: vec![(0, "Go".into(), 1)],
                marked: [0, 1].into_iter().collect(),
            }],
        };
        let pool =
            PredicatePool::build(&sig(), &[("i0".into(), vec![s0, s1])], 2).unwrap();
        (dataset, pool)
    }

    #[test]
    fn cost_of_empty_domain() {
        let d = Domain {
            name: "empty".into(),
            predicates: vec![],
            constants: vec![],
            schemas: vec![],
        };
        assert_eq!(cost(&d), CostTuple(0, 0, 0, 0, 0));
    }

    #[test]
    fn cost_tuples_order_lexicographically() {
        assert!(CostTuple(10, 5, 0, 10, 8) < CostTuple(10, 5, 0, 10, 9));
        assert!(CostTuple(4, 9, 9, 9, 9) < CostTuple(5, 0, 0, 0, 0));
    }

    #[test]
    fn micro_dataset_learns_single_unary_schema() {
        let (dataset, pool) = micro();
        let out = learn(&dataset, &pool, &Hyperparams::default()).unwrap();
        let gd = out.solution().expect("expected a solution");
        assert_eq!(cost(&gd.domain), CostTuple(2, 2, 0, 1, 1));
        let verdict = verify(gd, &dataset).unwrap();
        assert!(verdict.is_ok(), "{verdict:?}");
    }

    #[test]
    fn learning_is_deterministic() {
        let (dataset, pool) = micro();
        let a = learn(&dataset, &pool, &Hyperparams::default()).unwrap();
        let b = learn(&dataset, &pool, &Hyperparams::default()).unwrap();
        assert_eq!(
            write_grounded_domain(a.solution().unwrap(), None),
            write_grounded_domain(b.solution().unwrap(), None)
        );
    }

    #[test]
    fn zero_arity_bound_is_no_solution() {
        let (dataset, pool) = micro();
        let beta = Hyperparams {
            max_arity: 0,
            ..Hyperparams::default()
        };
        assert!(matches!(
            learn(&dataset, &pool, &beta).unwrap(),
            LearnOutcome::NoSolution
        ));
    }

    #[test]
    fn zero_node_cap_is_cap_exceeded() {
        let (dataset, pool) = micro();
        let beta = Hyperparams {
            node_cap: 0,
            ..Hyperparams::default()
        };
        assert!(matches!(
            learn(&dataset, &pool, &beta).unwrap(),
            LearnOutcome::CapExceeded
        ));
    }

    #[test]
    fn blocks3ops_small_suite_reaches_reference_cost() {
        use crate::datagen::{build_dataset, blocks3ops_world, Mode, Registry};
        let data = build_dataset(
            blocks3ops_world(&[2, 3]),
            &Registry::bundled(),
            Mode::Full,
            100_000,
        )
        .unwrap()
        .dataset;
        let insts: Vec<(String, Vec<O2DState>)> = data
            .instances
            .iter()
            .map(|i| (i.name.clone(), i.states.clone()))
            .collect();
        let pool = PredicatePool::build(&data.signature, &insts, 2).unwrap();
        let out = learn(&data, &pool, &Hyperparams::default()).unwrap();
        let gd = out.solution().expect("expected a solution");
        assert_eq!(cost(&gd.domain), CostTuple(10, 5, 0, 10, 8));
        let verdict = verify(gd, &data).unwrap();
        assert!(verdict.is_ok(), "{verdict:?}");
    }

    #[test]
    fn hanoi_small_suite_reaches_reference_cost() {
        use crate::datagen::{build_dataset, hanoi_world, Mode, Registry};
        let data = build_dataset(
            hanoi_world(false, &[1, 2, 3]),
            &Registry::bundled(),
            Mode::Full,
            100_000,
        )
        .unwrap()
        .dataset;
        let insts: Vec<(String, Vec<O2DState>)> = data
            .instances
            .iter()
            .map(|i| (i.name.clone(), i.states.clone()))
            .collect();
        let pool = PredicatePool::build(&data.signature, &insts, 2).unwrap();
        let out = learn(&data, &pool, &Hyperparams::default()).unwrap();
        let gd = out.solution().expect("expected a solution");
        assert_eq!(cost(&gd.domain), CostTuple(4, 5, 3, 4, 4));
        let verdict = verify(gd, &data).unwrap();
        assert!(verdict.is_ok(), "{verdict:?}");
    }

    #[test]
    fn empty_label_set_is_rejected() {
        let (mut dataset, pool) = micro();
        dataset.labels.clear();
        dataset.instances[0].edges.clear();
        assert!(matches!(
            learn(&dataset, &pool, &Hyperparams::default()),
            Err(LearnError::NoLabels)
        ));
    }
}
