//! Planning with learned grounded domains: optimal breadth-first search,
//! greedy best-first search with the additive heuristic, and replay of
//! plans into O2D trajectories through a simulator.
//!
//! The additive heuristic is computed over positive literals only;
//! negative preconditions and negative goal literals are treated as
//! zero-cost (the heuristic stays a guide, not an admissible bound, which
//! greedy best-first search does not need).

use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::datagen::RenderedDataset;
use crate::grounding::{abstract_state, GroundedDomain, GroundingError};
use crate::o2d::{O2DSignature, O2DState};
use crate::strips::{
    applicable_bindings, apply, apply_unchecked, Arg, Domain, Instance, ObjId, PAtom,
    PlanningState, Schema, StripsError, Universe,
};

/// A plan: labeled schema applications with explicit bindings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub steps: Vec<(String, Vec<ObjId>)>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Renders a plan as one `label(arg,…)` line per step, using object names.
pub fn write_plan(plan: &Plan, universe: &Universe) -> String {
    let mut out = String::new();
    for (label, binding) in &plan.steps {
        let args: Vec<&str> = binding.iter().map(|&o| universe.name_of(o)).collect();
        let _ = writeln!(out, "{label}({})", args.join(","));
    }
    out
}

/// Parses the textual plan format back into bindings over the universe.
pub fn parse_plan(text: &str, universe: &Universe) -> Result<Plan, PlanError> {
    let mut steps = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (label, rest) = line
            .split_once('(')
            .ok_or_else(|| PlanError::BadPlanText(line.to_string()))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| PlanError::BadPlanText(line.to_string()))?;
        let mut binding = Vec::new();
        for name in args.split(',').map(str::trim).filter(|a| !a.is_empty()) {
            let id = universe
                .id_of(name)
                .ok_or_else(|| PlanError::BadPlanText(format!("unknown object {name}")))?;
            binding.push(id);
        }
        steps.push((label.to_string(), binding));
    }
    Ok(Plan { steps })
}

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("search cap of {0} states exceeded")]
    CapExceeded(usize),
    #[error("malformed plan line: {0}")]
    BadPlanText(String),
    #[error(transparent)]
    Strips(#[from] StripsError),
}

/// Outcome of a planning query.
#[derive(Debug, Clone)]
pub enum PlanOutcome {
    Plan(Plan),
    Unsolvable,
}

impl PlanOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            PlanOutcome::Plan(p) => Some(p),
            PlanOutcome::Unsolvable => None,
        }
    }
}

/// Uniform breadth-first search: returns a shortest plan, or `Unsolvable`
/// once the reachable space is exhausted. `cap` bounds explored states.
pub fn plan_bfs(domain: &Domain, instance: &Instance, cap: usize) -> Result<PlanOutcome, PlanError> {
    if instance.goal_satisfied(&instance.init) {
        return Ok(PlanOutcome::Plan(Plan::default()));
    }
    // parent[state] = (predecessor, schema index, binding)
    let mut parent: HashMap<PlanningState, (PlanningState, usize, Vec<ObjId>)> = HashMap::new();
    let mut queue = VecDeque::new();
    queue.push_back(instance.init.clone());
    let mut seen: BTreeSet<PlanningState> = BTreeSet::new();
    seen.insert(instance.init.clone());
    while let Some(state) = queue.pop_front() {
        for (si, schema) in domain.schemas.iter().enumerate() {
            for binding in applicable_bindings(schema, &instance.universe, &state) {
                let next = apply_unchecked(schema, &binding, &state);
                if seen.contains(&next) {
                    continue;
                }
                parent.insert(next.clone(), (state.clone(), si, binding));
                if instance.goal_satisfied(&next) {
                    return Ok(PlanOutcome::Plan(unwind(domain, &parent, &instance.init, next)));
                }
                if seen.len() >= cap {
                    return Err(PlanError::CapExceeded(cap));
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(PlanOutcome::Unsolvable)
}

fn unwind(
    domain: &Domain,
    parent: &HashMap<PlanningState, (PlanningState, usize, Vec<ObjId>)>,
    init: &PlanningState,
    goal: PlanningState,
) -> Plan {
    let mut steps = Vec::new();
    let mut cur = goal;
    while &cur != init {
        let (prev, si, binding) = parent[&cur].clone();
        steps.push((domain.schemas[si].label.clone(), binding));
        cur = prev;
    }
    steps.reverse();
    Plan { steps }
}

/// Greedy best-first search guided by the additive heuristic. Returns some
/// valid plan (no optimality claim) or `Unsolvable`.
pub fn plan_gbfs_hadd(
    domain: &Domain,
    instance: &Instance,
    cap: usize,
) -> Result<PlanOutcome, PlanError> {
    if instance.goal_satisfied(&instance.init) {
        return Ok(PlanOutcome::Plan(Plan::default()));
    }
    let relax = Relaxation::new(domain, &instance.universe);
    let mut parent: HashMap<PlanningState, (PlanningState, usize, Vec<ObjId>)> = HashMap::new();
    let mut seen: BTreeSet<PlanningState> = BTreeSet::new();
    seen.insert(instance.init.clone());
    // Min-heap on (h, insertion order) — order keeps expansion deterministic.
    let mut heap: BinaryHeap<std::cmp::Reverse<(u64, u64)>> = BinaryHeap::new();
    let mut arena: Vec<PlanningState> = Vec::new();
    let h0 = relax.h_add(&instance.init, &instance.goal);
    heap.push(std::cmp::Reverse((h0, 0)));
    arena.push(instance.init.clone());
    while let Some(std::cmp::Reverse((_, idx))) = heap.pop() {
        let state = arena[idx as usize].clone();
        for (si, schema) in domain.schemas.iter().enumerate() {
            for binding in applicable_bindings(schema, &instance.universe, &state) {
                let next = apply_unchecked(schema, &binding, &state);
                if seen.contains(&next) {
                    continue;
                }
                parent.insert(next.clone(), (state.clone(), si, binding));
                if instance.goal_satisfied(&next) {
                    return Ok(PlanOutcome::Plan(unwind(domain, &parent, &instance.init, next)));
                }
                if seen.len() >= cap {
                    return Err(PlanError::CapExceeded(cap));
                }
                seen.insert(next.clone());
                let h = relax.h_add(&next, &instance.goal);
                if h < u64::MAX {
                    heap.push(std::cmp::Reverse((h, arena.len() as u64)));
                    arena.push(next);
                }
            }
        }
    }
    Ok(PlanOutcome::Unsolvable)
}

/// Ground relaxation for the additive heuristic: every (schema, binding)
/// pair with its positive preconditions and positive effects.
struct Relaxation {
    /// (positive precondition atoms, positive effect atoms) per action.
    actions: Vec<(Vec<PAtom>, Vec<PAtom>)>,
}

impl Relaxation {
    fn new(domain: &Domain, universe: &Universe) -> Relaxation {
        let mut actions = Vec::new();
        for schema in &domain.schemas {
            let mut binding = Vec::with_capacity(schema.arity);
            collect_bindings(universe, schema.arity, &mut binding, &mut |b| {
                let pre = signed_atoms(schema, b, true);
                let eff: Vec<PAtom> = schema
                    .effects
                    .iter()
                    .filter(|e| e.positive)
                    .map(|e| ground_atom(e, b))
                    .collect();
                if !eff.is_empty() {
                    actions.push((pre, eff));
                }
            });
        }
        Relaxation { actions }
    }

    /// Σ over positive goal literals of the relaxed cost to achieve them;
    /// `u64::MAX` marks a relaxed dead end.
    fn h_add(&self, state: &PlanningState, goal: &[(PAtom, bool)]) -> u64 {
        let mut cost: HashMap<&PAtom, u64> = HashMap::new();
        // Fixpoint over relaxed action applications.
        let atom_cost = |cost: &HashMap<&PAtom, u64>, a: &PAtom| -> Option<u64> {
            if state.holds(a) {
                Some(0)
            } else {
                cost.get(a).copied()
            }
        };
        loop {
            let mut changed = false;
            for (pre, eff) in &self.actions {
                let mut total = 1u64;
                let mut ok = true;
                for p in pre {
                    match atom_cost(&cost, p) {
                        Some(c) => total = total.saturating_add(c),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                for e in eff {
                    let better = match atom_cost(&cost, e) {
                        Some(c) => total < c,
                        None => true,
                    };
                    if better && !state.holds(e) {
                        cost.insert(e, total);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut h = 0u64;
        for (a, pos) in goal {
            if !pos {
                continue; // negative literals are zero-cost in the relaxation
            }
            match atom_cost(&cost, a) {
                Some(c) => h = h.saturating_add(c),
                None => return u64::MAX,
            }
        }
        h
    }
}

fn collect_bindings(
    universe: &Universe,
    arity: usize,
    cur: &mut Vec<ObjId>,
    f: &mut dyn FnMut(&[ObjId]),
) {
    if cur.len() == arity {
        f(cur);
        return;
    }
    for o in universe.object_ids() {
        if !cur.contains(&o) {
            cur.push(o);
            collect_bindings(universe, arity, cur, f);
            cur.pop();
        }
    }
}

fn ground_atom(atom: &crate::strips::SchemaAtom, binding: &[ObjId]) -> PAtom {
    PAtom {
        predicate: atom.predicate,
        args: atom
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => binding[*v - 1],
                Arg::Const(c) => *c as ObjId,
            })
            .collect(),
    }
}

fn signed_atoms(schema: &Schema, binding: &[ObjId], positive: bool) -> Vec<PAtom> {
    schema
        .statics
        .iter()
        .chain(schema.preconditions.iter())
        .filter(|a| a.positive == positive)
        .map(|a| ground_atom(a, binding))
        .collect()
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

/// A successor oracle over O2D states: the possible label-successors of a
/// state, consistent with the data-generating process.
pub trait Simulator {
    fn successors(&self, state: &O2DState, label: &str) -> Vec<O2DState>;
}

/// A simulator backed by a rendered dataset: the hidden-side graph edges
/// of one instance, followed through the rendering correspondence.
pub struct GraphSimulator<'a> {
    rd: &'a RenderedDataset,
    inst: usize,
    index: HashMap<BTreeSet<crate::o2d::GroundAtom>, usize>,
}

impl<'a> GraphSimulator<'a> {
    pub fn new(rd: &'a RenderedDataset, inst: usize) -> GraphSimulator<'a> {
        let index = rd.dataset.instances[inst]
            .states
            .iter()
            .enumerate()
            .map(|(j, s)| (s.atoms.clone(), j))
            .collect();
        GraphSimulator { rd, inst, index }
    }
}

impl Simulator for GraphSimulator<'_> {
    fn successors(&self, state: &O2DState, label: &str) -> Vec<O2DState> {
        let Some(&j) = self.index.get(&state.atoms) else {
            return Vec::new();
        };
        let graph = &self.rd.graphs[self.inst];
        let states = &self.rd.dataset.instances[self.inst].states;
        graph
            .edges
            .iter()
            .filter(|(s, l, _)| *s == j && self.rd.world.domain.schemas[*l].label == label)
            .map(|&(_, _, t)| states[t].clone())
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("step {step}: plan action not applicable in the planning state")]
    NotApplicable { step: usize },
    #[error("step {step}: no simulator successor matches the planned abstraction")]
    NoMatch { step: usize },
    #[error("step {step}: several distinct simulator successors match (abstraction not injective here)")]
    Ambiguous { step: usize },
    #[error(transparent)]
    Grounding(#[from] GroundingError),
}

/// Replays a plan from `s0`: each planning step picks the unique simulator
/// successor whose abstraction matches the next planning state. Returns
/// the O2D trajectory (starting at `s0`). A failure to match signals that
/// the learned domain or its grounding does not generalize here.
pub fn replay(
    plan: &Plan,
    gd: &GroundedDomain,
    sig: &O2DSignature,
    sim: &dyn Simulator,
    s0: &O2DState,
) -> Result<Vec<O2DState>, ReplayError> {
    let universe = gd.universe_for(s0);
    let mut pstate = abstract_state(gd, sig, s0)?;
    let mut cur = s0.clone();
    let mut trajectory = vec![s0.clone()];
    for (step, (label, binding)) in plan.steps.iter().enumerate() {
        let schema = gd
            .domain
            .schema(label)
            .map_err(|_| ReplayError::NotApplicable { step })?;
        let next = apply(schema, binding, &universe, &pstate)
            .map_err(|_| ReplayError::NotApplicable { step })?;
        let mut matches: Vec<O2DState> = Vec::new();
        for succ in sim.successors(&cur, label) {
            if abstract_state(gd, sig, &succ)? == next
                && !matches.iter().any(|m| m.atoms == succ.atoms)
            {
                matches.push(succ);
            }
        }
        match matches.len() {
            0 => return Err(ReplayError::NoMatch { step }),
            1 => {
                cur = matches.pop().unwrap();
                trajectory.push(cur.clone());
                pstate = next;
            }
            _ => return Err(ReplayError::Ambiguous { step }),
        }
    }
    Ok(trajectory)
}

/// Checks a plan independently of search: applies each step with full
/// applicability checking and tests the goal at the end.
pub fn validate_plan(domain: &Domain, instance: &Instance, plan: &Plan) -> Result<bool, PlanError> {
    let mut state = instance.init.clone();
    for (label, binding) in &plan.steps {
        let schema = domain.schema(label)?;
        state = apply(schema, binding, &instance.universe, &state)?;
    }
    Ok(instance.goal_satisfied(&state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{build_dataset, hanoi_world, Mode, Registry};
    use crate::grounding::{build_instance, parse_grounded_domain};

    fn golden(name: &str) -> GroundedDomain {
        let path = format!("{}/fixtures/golden/{name}.txt", env!("CARGO_MANIFEST_DIR"));
        parse_grounded_domain(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    fn hanoi3() -> RenderedDataset {
        build_dataset(
            hanoi_world(false, &[3]),
            &Registry::bundled(),
            Mode::Full,
            100_000,
        )
        .unwrap()
    }

    /// Hidden-side BFS distances from state 0, used as the length oracle.
    fn hidden_distances(rd: &RenderedDataset, inst: usize) -> Vec<usize> {
        let graph = &rd.graphs[inst];
        let mut dist = vec![usize::MAX; graph.states.len()];
        dist[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            for &(a, _, b) in &graph.edges {
                if a == s && dist[b] == usize::MAX {
                    dist[b] = dist[s] + 1;
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    #[test]
    fn identical_endpoints_yield_the_empty_plan() {
        let rd = hanoi3();
        let gd = golden("hanoi1op");
        let s = &rd.dataset.instances[0].states[0];
        let inst = build_instance(&gd, &rd.dataset.signature, s, s).unwrap();
        let plan = plan_bfs(&gd.domain, &inst, 100_000).unwrap();
        assert!(plan.plan().unwrap().is_empty());
        let plan = plan_gbfs_hadd(&gd.domain, &inst, 100_000).unwrap();
        assert!(plan.plan().unwrap().is_empty());
    }

    #[test]
    fn hanoi_three_disks_optimal_plan_has_length_seven() {
        let rd = hanoi3();
        let gd = golden("hanoi1op");
        let dist = hidden_distances(&rd, 0);
        let far = dist.iter().position(|&d| d == 7).expect("depth-7 state");
        let states = &rd.dataset.instances[0].states;
        let inst = build_instance(&gd, &rd.dataset.signature, &states[0], &states[far]).unwrap();
        let out = plan_bfs(&gd.domain, &inst, 100_000).unwrap();
        let plan = out.plan().expect("solvable");
        assert_eq!(plan.len(), 7);
        assert!(validate_plan(&gd.domain, &inst, plan).unwrap());
    }

    #[test]
    fn greedy_search_finds_a_valid_plan_no_shorter_than_optimal() {
        let rd = hanoi3();
        let gd = golden("hanoi1op");
        let dist = hidden_distances(&rd, 0);
        let far = dist.iter().position(|&d| d == 7).unwrap();
        let states = &rd.dataset.instances[0].states;
        let inst = build_instance(&gd, &rd.dataset.signature, &states[0], &states[far]).unwrap();
        let opt = plan_bfs(&gd.domain, &inst, 100_000).unwrap();
        let greedy = plan_gbfs_hadd(&gd.domain, &inst, 100_000).unwrap();
        let greedy = greedy.plan().expect("solvable");
        assert!(validate_plan(&gd.domain, &inst, greedy).unwrap());
        assert!(greedy.len() >= opt.plan().unwrap().len());
    }

    #[test]
    fn replay_follows_the_plan_to_the_goal_state() {
        let rd = hanoi3();
        let gd = golden("hanoi1op");
        let dist = hidden_distances(&rd, 0);
        let far = dist.iter().position(|&d| d == 7).unwrap();
        let states = &rd.dataset.instances[0].states;
        let inst = build_instance(&gd, &rd.dataset.signature, &states[0], &states[far]).unwrap();
        let plan = plan_bfs(&gd.domain, &inst, 100_000).unwrap();
        let plan = plan.plan().unwrap();
        let sim = GraphSimulator::new(&rd, 0);
        let traj = replay(plan, &gd, &rd.dataset.signature, &sim, &states[0]).unwrap();
        assert_eq!(traj.len(), plan.len() + 1);
        assert_eq!(traj.last().unwrap().atoms, states[far].atoms);
    }

    #[test]
    fn corrupted_domain_fails_replay() {
        let rd = hanoi3();
        let mut gd = golden("hanoi1op");
        let dist = hidden_distances(&rd, 0);
        let far = dist.iter().position(|&d| d == 7).unwrap();
        let states = &rd.dataset.instances[0].states;
        let inst = build_instance(&gd, &rd.dataset.signature, &states[0], &states[far]).unwrap();
        let plan = plan_bfs(&gd.domain, &inst, 100_000).unwrap();
        let plan = plan.plan().unwrap().clone();
        // Flip one effect literal: the simulator can no longer match.
        let eff = &mut gd.domain.schemas[0].effects[0];
        eff.positive = !eff.positive;
        let sim = GraphSimulator::new(&rd, 0);
        let result = replay(&plan, &gd, &rd.dataset.signature, &sim, &states[0]);
        assert!(result.is_err(), "corrupted domain must not replay");
    }

    #[test]
    fn plan_text_round_trips() {
        let rd = hanoi3();
        let gd = golden("hanoi1op");
        let dist = hidden_distances(&rd, 0);
        let far = dist.iter().position(|&d| d == 7).unwrap();
        let states = &rd.dataset.instances[0].states;
        let inst = build_instance(&gd, &rd.dataset.signature, &states[0], &states[far]).unwrap();
        let plan = plan_bfs(&gd.domain, &inst, 100_000).unwrap();
        let plan = plan.plan().unwrap();
        let text = write_plan(plan, &inst.universe);
        assert_eq!(&parse_plan(&text, &inst.universe).unwrap(), plan);
    }

    #[test]
    fn tiny_cap_is_reported_as_exceeded() {
        let rd = hanoi3();
        let gd = golden("hanoi1op");
        let dist = hidden_distances(&rd, 0);
        let far = dist.iter().position(|&d| d == 7).unwrap();
        let states = &rd.dataset.instances[0].states;
        let inst = build_instance(&gd, &rd.dataset.signature, &states[0], &states[far]).unwrap();
        assert!(matches!(
            plan_bfs(&gd.domain, &inst, 2),
            Err(PlanError::CapExceeded(2))
        ));
    }
}
