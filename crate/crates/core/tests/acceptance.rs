//! Acceptance suite: one test per criterion, covering cost reproduction,
//! pool sizes, infeasibility detection, the isomorphism property, learner
//! optimality against an exhaustive oracle, planning equivalence, dataset
//! totals, the solver-gated ASP cross-check, and the declared substitutions
//! for runs that exceed desk scale.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use o2dlearn_core::asp::{emit_asp, SOLVER_OPTIONS};
use o2dlearn_core::datagen::{
    blocks3ops_world, blocks4ops_world, build_dataset, hanoi_world, standard_blocks3ops,
    standard_hanoi, standard_slidingtile, Mode, Registry, RenderedDataset,
};
use o2dlearn_core::grounding::{
    build_instance, check_isomorphism, grounded_domain, parse_grounded_domain, DataInstance,
    Dataset, GroundedDomain, IsoVerdict, PoolAbstraction,
};
use o2dlearn_core::learner::{cost, learn, CostTuple, Hyperparams, LearnOutcome};
use o2dlearn_core::o2d::{GroundAtom, O2DSignature, O2DState};
use o2dlearn_core::planner::{plan_bfs, replay, GraphSimulator, PlanOutcome};
use o2dlearn_core::pool::{ConstantSet, PredicatePool};
use o2dlearn_core::strips::{apply_unchecked, Arg, Domain, PAtom, PlanningState, Schema, SchemaAtom};
use o2dlearn_core::verifier::{incremental_learn, verify, IncrementalError};

fn rendered(world: o2dlearn_core::datagen::HiddenWorld) -> RenderedDataset {
    build_dataset(world, &Registry::bundled(), Mode::Full, 1_000_000).unwrap()
}

fn pool_over(dataset: &Dataset, m: usize) -> PredicatePool {
    let insts: Vec<(String, Vec<O2DState>)> = dataset
        .instances
        .iter()
        .map(|i| (i.name.clone(), i.states.clone()))
        .collect();
    PredicatePool::build(&dataset.signature, &insts, m).unwrap()
}

fn golden(name: &str) -> GroundedDomain {
    let path = format!("{}/fixtures/golden/{name}.txt", env!("CARGO_MANIFEST_DIR"));
    parse_grounded_domain(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Directed BFS distances from `from` over one rendered graph.
fn hidden_distances(rd: &RenderedDataset, inst: usize, from: usize) -> Vec<usize> {
    let graph = &rd.graphs[inst];
    let mut dist = vec![usize::MAX; graph.states.len()];
    dist[from] = 0;
    let mut queue = std::collections::VecDeque::from([from]);
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

// ---------------------------------------------------------------------------
// Criterion 1 — cost tuples at desk scale
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_cost_tuples_reproduced_at_desk_scale() {
    let beta = Hyperparams::default();
    let t0 = Instant::now();

    // The incremental loop verifies against the whole n ≤ 4 pool, so the
    // marked training set stays tiny while the result provably covers it.
    // (Training on n ≤ 3 alone reaches the same cost but may pick a
    // cost-tied optimum that fails on 4 objects.)
    let pool_data = rendered(blocks3ops_world(&[2, 3, 4])).dataset;
    let pool = pool_over(&pool_data, 2);
    let (gd, trace) = incremental_learn(&pool_data, &pool, &beta).unwrap();
    assert_eq!(cost(&gd.domain), CostTuple(10, 5, 0, 10, 8));
    assert!(verify(&gd, &pool_data).unwrap().is_ok(), "blocks3ops Δ=∅");
    let total: usize = pool_data.instances.iter().map(|i| i.states.len()).sum();
    let blocks_t = trace.iterations.last().unwrap().t_size;
    let blocks_iters = trace.iterations.len();
    assert!(blocks_t * 4 < total, "training set should stay small");

    let pool_data = rendered(hanoi_world(false, &[1, 2, 3, 4])).dataset;
    let pool = pool_over(&pool_data, 2);
    let (gd, trace) = incremental_learn(&pool_data, &pool, &beta).unwrap();
    assert_eq!(cost(&gd.domain), CostTuple(4, 5, 3, 4, 4));
    assert!(verify(&gd, &pool_data).unwrap().is_ok(), "hanoi Δ=∅");

    assert!(t0.elapsed().as_secs() <= 600);
    println!(
        "criterion 1: PASS — blocks3ops (10,5,0,10,8) from {blocks_t} marked states \
         in {blocks_iters} iterations, hanoi (4,5,3,4,4) in {} iterations; both verify \
         with Δ=∅ over the n ≤ 4 pools; {:.1}s",
        trace.iterations.len(),
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 2 — pool sizes
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_pool_sizes_within_tolerance_and_documented() {
    let t0 = Instant::now();
    let blocks = pool_over(&rendered(standard_blocks3ops()).dataset, 2);
    let hanoi = pool_over(&rendered(standard_hanoi(false)).dataset, 2);
    assert!(
        (blocks.entries.len() as i64 - 13).abs() <= 2,
        "blocks pool {} outside 13±2",
        blocks.entries.len()
    );
    assert!(
        (hanoi.entries.len() as i64 - 14).abs() <= 2,
        "hanoi pool {} outside 14±2",
        hanoi.entries.len()
    );
    let notes = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/pool-notes.md"
    ))
    .expect("docs/pool-notes.md");
    assert!(notes.contains("12") && notes.contains("dedup"), "notes must explain the counts");
    assert!(t0.elapsed().as_secs() <= 30);
    println!(
        "criterion 2: PASS — |P| = {} (blocks3ops) and {} (hanoi) at m=2, \
         deviation explained in docs/pool-notes.md; {:.1}s",
        blocks.entries.len(),
        hanoi.entries.len(),
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 3 — infeasibility at m ≤ 3, feasibility at m = 4
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_blocks4ops_infeasible_below_m4() {
    let t0 = Instant::now();
    let beta = Hyperparams {
        max_arity: 4,
        ..Hyperparams::default()
    };
    let dataset = rendered(blocks4ops_world(&[1, 2, 3])).dataset;
    for m in [2, 3] {
        let pool = pool_over(&dataset, m);
        match incremental_learn(&dataset, &pool, &beta) {
            Err(IncrementalError::NoSolution(_)) => {}
            other => panic!("m={m}: expected a proof of no solution, got {other:?}"),
        }
    }
    let pool = pool_over(&dataset, 4);
    let (gd, _) = incremental_learn(&dataset, &pool, &beta).expect("m=4 is feasible");
    assert_eq!(cost(&gd.domain), CostTuple(10, 7, 0, 14, 9));
    assert!(verify(&gd, &dataset).unwrap().is_ok());
    println!(
        "criterion 3: PASS — blocks4ops has no model at m ≤ 3 (exhaustion, not a cap) \
         and cost (10,7,0,14,9) at m = 4; {:.1}s",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 4 — isomorphism property on the 2-block graph
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_isomorphism_flips_on_any_effect_corruption() {
    let t0 = Instant::now();
    let rd = rendered(blocks3ops_world(&[2, 3]));
    let gd = golden("blocks3ops");
    let two = &rd.dataset.instances[0];
    match check_isomorphism(&gd, &rd.dataset.signature, two).unwrap() {
        IsoVerdict::Isomorphic { mapping } => assert_eq!(mapping.len(), two.states.len()),
        IsoVerdict::NotIsomorphic { certificate } => panic!("not isomorphic: {certificate}"),
    }
    let mut corruptions = 0;
    for si in 0..gd.domain.schemas.len() {
        for ei in 0..gd.domain.schemas[si].effects.len() {
            let mut bad = gd.clone();
            let eff = &mut bad.domain.schemas[si].effects[ei];
            eff.positive = !eff.positive;
            // The ternary Move is never applicable with two blocks, so its
            // effects can only surface on the three-block graph.
            let inst = if bad.domain.schemas[si].arity > 2 {
                &rd.dataset.instances[1]
            } else {
                two
            };
            match check_isomorphism(&bad, &rd.dataset.signature, inst).unwrap() {
                IsoVerdict::NotIsomorphic { .. } => corruptions += 1,
                IsoVerdict::Isomorphic { .. } => {
                    panic!("corrupting schema {si} effect {ei} went undetected")
                }
            }
        }
    }
    assert!(t0.elapsed().as_secs() <= 5);
    println!(
        "criterion 4: PASS — bijection over {} states; all {corruptions} single-effect \
         corruptions detected; {:.2}s",
        two.states.len(),
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 5 — learner optimality against an exhaustive oracle
// ---------------------------------------------------------------------------

/// Micro-dataset generator: random or schema-driven transition systems over
/// three objects and the two fluent roles `left`/`below` (plus an optional
/// static `overlap` relation), at most 6 states and 2 labels.
struct Micro {
    dataset: Dataset,
}

const OBJS: [&str; 3] = ["o1", "o2", "o3"];
const FLUENTS: [&str; 2] = ["left", "below"];

type AbsState = BTreeSet<(usize, usize, usize)>; // (pred, x, y), objects by index

fn micro_sig() -> O2DSignature {
    O2DSignature::new(vec!["rect".into()], vec![]).unwrap()
}

fn render_abs(sig: &O2DSignature, s: &AbsState, statics: &AbsState, id: usize) -> O2DState {
    let mut atoms: BTreeSet<GroundAtom> = s
        .iter()
        .chain(statics.iter())
        .map(|&(p, x, y)| {
            let name = if p < 2 { FLUENTS[p] } else { "overlap" };
            GroundAtom::new(name, &[OBJS[x], OBJS[y]])
        })
        .collect();
    for o in OBJS {
        atoms.insert(GroundAtom::new("shape", &[o, "rect"]));
    }
    let mut st = O2DState::from_atoms(sig, atoms).with_ids("i0", format!("s{id}"));
    st.objects = OBJS.iter().map(|o| o.to_string()).collect();
    st
}

fn finish_micro(
    sig: &O2DSignature,
    states: Vec<AbsState>,
    statics: AbsState,
    edges: Vec<(usize, String, usize)>,
    marked: BTreeSet<usize>,
) -> Option<Micro> {
    let mut labels: Vec<String> = edges.iter().map(|(_, l, _)| l.clone()).collect();
    labels.sort();
    labels.dedup();
    if labels.is_empty() {
        return None;
    }
    let states: Vec<O2DState> = states
        .iter()
        .enumerate()
        .map(|(i, s)| render_abs(sig, s, &statics, i))
        .collect();
    let dataset = Dataset {
        signature: sig.clone(),
        labels,
        instances: vec![DataInstance {
            name: "i0".into(),
            states,
            edges,
            marked,
        }],
    };
    dataset.validate().ok()?;
    Some(Micro { dataset })
}

fn random_abs_state(rng: &mut ChaCha8Rng) -> AbsState {
    let mut s = AbsState::new();
    for p in 0..2 {
        for x in 0..3 {
            for y in 0..3 {
                if x != y && rng.gen_bool(0.3) {
                    s.insert((p, x, y));
                }
            }
        }
    }
    s
}

/// A fully random transition system: arbitrary states and edges.
fn random_micro(rng: &mut ChaCha8Rng) -> Option<Micro> {
    let sig = micro_sig();
    let n = rng.gen_range(2..=5);
    let mut states: Vec<AbsState> = Vec::new();
    while states.len() < n {
        let s = random_abs_state(rng);
        if !states.contains(&s) {
            states.push(s);
        }
    }
    let statics = if rng.gen_bool(0.4) {
        BTreeSet::from([(2, 0, 1)])
    } else {
        AbsState::new()
    };
    let mut edges = Vec::new();
    for src in 0..n {
        for _ in 0..rng.gen_range(0..=2) {
            let dst = rng.gen_range(0..n);
            if dst != src {
                let label = if rng.gen_bool(0.7) { "a" } else { "b" };
                edges.push((src, label.to_string(), dst));
            }
        }
    }
    edges.sort();
    edges.dedup();
    finish_micro(&sig, states, statics, edges, (0..n).collect())
}

/// A transition system generated by one or two hidden mini-schemas, so a
/// substantial fraction of the suite is actually learnable.
fn structured_micro(rng: &mut ChaCha8Rng) -> Option<Micro> {
    let sig = micro_sig();
    // A hidden rule: delete q(v1,v2), optionally add r(v2,v1) or r(v1,v2).
    let rule = |rng: &mut ChaCha8Rng| {
        let q = rng.gen_range(0..2usize);
        let add = if rng.gen_bool(0.7) {
            Some((rng.gen_range(0..2usize), rng.gen_bool(0.5)))
        } else {
            None
        };
        move |s: &AbsState, x: usize, y: usize| -> Option<AbsState> {
            if !s.contains(&(q, x, y)) {
                return None;
            }
            let mut t = s.clone();
            t.remove(&(q, x, y));
            if let Some((r, swap)) = add {
                let (a, b) = if swap { (y, x) } else { (x, y) };
                if t.contains(&(r, a, b)) {
                    return None; // hidden precondition: the added atom is false
                }
                t.insert((r, a, b));
            }
            Some(t)
        }
    };
    let rules: Vec<_> = (0..rng.gen_range(1..=2)).map(|_| rule(rng)).collect();
    let mut states = vec![random_abs_state(rng)];
    let mut edges: Vec<(usize, String, usize)> = Vec::new();
    let mut complete: BTreeSet<usize> = BTreeSet::new();
    let mut frontier = vec![0usize];
    while let Some(s) = frontier.pop() {
        let mut out = Vec::new();
        let mut fits = true;
        for (li, rule) in rules.iter().enumerate() {
            for x in 0..3 {
                for y in 0..3 {
                    if x == y {
                        continue;
                    }
                    if let Some(t) = rule(&states[s], x, y) {
                        let ti = match states.iter().position(|u| *u == t) {
                            Some(i) => i,
                            None if states.len() < 6 => {
                                states.push(t);
                                frontier.push(states.len() - 1);
                                states.len() - 1
                            }
                            None => {
                                fits = false;
                                continue;
                            }
                        };
                        out.push((s, format!("{}", (b'a' + li as u8) as char), ti));
                    }
                }
            }
        }
        // A state is marked only if all of its successors fit in the cap,
        // so the kept edges are its complete labeled successor set.
        if fits {
            complete.insert(s);
            edges.extend(out);
        }
    }
    let edges: Vec<_> = edges
        .into_iter()
        .filter(|(s, _, _)| complete.contains(s))
        .collect();
    finish_micro(&sig, states, AbsState::new(), edges, complete)
}

/// Exhaustive oracle: enumerates every candidate grounded domain within
/// (`kmax` predicates, arity ≤ `amax`) and checks it semantically against
/// the data — applicable bindings applied per label, successor multisets
/// compared — returning the minimum lexicographic cost of any feasible
/// model.
fn oracle_best(dataset: &Dataset, pool: &PredicatePool, kmax: usize, amax: usize) -> Option<CostTuple> {
    assert!(pool.detect_constants().names.is_empty());
    let inst = &dataset.instances[0];
    let fluents: Vec<usize> = (0..pool.entries.len())
        .filter(|&e| !pool.is_static_everywhere(e))
        .collect();
    let statics: Vec<usize> = (0..pool.entries.len())
        .filter(|&e| pool.is_static_everywhere(e))
        .collect();
    let marked: Vec<usize> = inst.marked.iter().copied().collect();

    let mut best: Option<CostTuple> = None;
    for fsel in subsets(&fluents, kmax) {
        // C1: every marked pair must differ on some selected fluent.
        let c1_ok = marked.iter().enumerate().all(|(i, &a)| {
            marked[i + 1..].iter().all(|&b| {
                fsel.iter()
                    .any(|&f| pool.ext(f, 0, a) != pool.ext(f, 0, b))
            })
        });
        if !c1_ok {
            continue;
        }
        for ssel in subsets(&statics, kmax - fsel.len()) {
            let sigma: Vec<_> = fsel
                .iter()
                .chain(ssel.iter())
                .map(|&e| pool.entries[e].expr.clone())
                .collect();
            let static_idx: BTreeSet<usize> = (fsel.len()..sigma.len()).collect();
            let gd = grounded_domain("oracle", sigma, &static_idx, ConstantSet::empty(), vec![]);
            let pa = PoolAbstraction::new(&gd, pool).unwrap();
            let universe = pa.universe(0).clone();
            let h: Vec<PlanningState> = (0..inst.states.len())
                .map(|s| pa.abstract_state(0, s))
                .collect();
            let objects: Vec<u32> = universe.object_ids().collect();
            let mut schemas = Vec::new();
            let mut ok = true;
            for label in &dataset.labels {
                match best_schema(&gd.domain, label, inst, &h, &marked, &objects, fsel.len(), amax) {
                    Some(schema) => schemas.push(schema),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let domain = Domain {
                schemas,
                ..gd.domain.clone()
            };
            let c = cost(&domain);
            if best.as_ref().map_or(true, |b| c < *b) {
                best = Some(c);
            }
        }
    }
    best
}

/// All subsets of `items` with at most `k` elements.
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &it in items {
        let mut more: Vec<Vec<usize>> = out
            .iter()
            .filter(|s| s.len() < k)
            .map(|s| {
                let mut t = s.clone();
                t.push(it);
                t
            })
            .collect();
        out.append(&mut more);
    }
    out
}

/// The lexicographically cheapest feasible schema (arity, then effect
/// count, then precondition count) for one label, or None.
#[allow(clippy::too_many_arguments)]
fn best_schema(
    skeleton: &Domain,
    label: &str,
    inst: &DataInstance,
    h: &[PlanningState],
    marked: &[usize],
    objects: &[u32],
    num_fluents: usize,
    amax: usize,
) -> Option<Schema> {
    for arity in 0..=amax {
        // Atom space: predicate × argument tuple over distinct variables.
        let mut atoms: Vec<SchemaAtom> = Vec::new();
        for (p, pred) in skeleton.predicates.iter().enumerate() {
            for args in var_tuples(pred.arity, arity) {
                atoms.push(SchemaAtom {
                    predicate: p,
                    args,
                    positive: true,
                });
            }
        }
        let fluent_atoms: Vec<usize> = (0..atoms.len())
            .filter(|&i| atoms[i].predicate < num_fluents)
            .collect();
        let bindings = var_bindings(objects, arity);
        // Expected successor multiset per marked state.
        let data_succ: Vec<Vec<&PlanningState>> = marked
            .iter()
            .map(|&s| {
                let mut v: Vec<&PlanningState> = inst
                    .edges
                    .iter()
                    .filter(|(a, l, _)| *a == s && l == label)
                    .map(|&(_, _, t)| &h[t])
                    .collect();
                v.sort();
                v
            })
            .collect();
        // Literal satisfaction masks per (marked state, binding):
        // bit 2i is the positive literal of atom i, bit 2i+1 the negative.
        let sat: Vec<Vec<u64>> = marked
            .iter()
            .map(|&s| {
                bindings
                    .iter()
                    .map(|b| {
                        let mut mask = 0u64;
                        for (i, atom) in atoms.iter().enumerate() {
                            let ga = ground(atom, b);
                            if h[s].holds(&ga) {
                                mask |= 1 << (2 * i);
                            } else {
                                mask |= 1 << (2 * i + 1);
                            }
                        }
                        mask
                    })
                    .collect()
            })
            .collect();

        let mut found: Option<(usize, usize, Schema)> = None;
        // Effects: none/add/delete per fluent atom, at least one literal.
        for emask in ternary(fluent_atoms.len()) {
            if emask.iter().all(|&v| v == 0) {
                continue;
            }
            let effects: Vec<SchemaAtom> = emask
                .iter()
                .zip(&fluent_atoms)
                .filter(|(&v, _)| v != 0)
                .map(|(&v, &i)| SchemaAtom {
                    positive: v == 1,
                    ..atoms[i].clone()
                })
                .collect();
            let schema = Schema {
                label: label.into(),
                arity,
                statics: Vec::new(),
                preconditions: Vec::new(),
                effects: effects.clone(),
            };
            // Successor of each (state, binding) under these effects.
            let succ: Vec<Vec<PlanningState>> = marked
                .iter()
                .map(|&s| {
                    bindings
                        .iter()
                        .map(|b| apply_unchecked(&schema, b, &h[s]))
                        .collect()
                })
                .collect();
            // Preconditions: none/positive/negative per atom.
            'pre: for pmask in ternary(atoms.len()) {
                let mut lits = 0u64;
                let mut pcount = 0usize;
                for (i, &v) in pmask.iter().enumerate() {
                    match v {
                        1 => lits |= 1 << (2 * i),
                        2 => lits |= 1 << (2 * i + 1),
                        _ => continue,
                    }
                    pcount += 1;
                }
                let ecount = effects.len();
                if let Some((be, bp, _)) = &found {
                    if (ecount, pcount) >= (*be, *bp) {
                        continue;
                    }
                }
                for (mi, _) in marked.iter().enumerate() {
                    let mut got: Vec<&PlanningState> = sat[mi]
                        .iter()
                        .zip(&succ[mi])
                        .filter(|(m, _)| *m & lits == lits)
                        .map(|(_, s)| s)
                        .collect();
                    got.sort();
                    if got != data_succ[mi] {
                        continue 'pre;
                    }
                }
                let pre: Vec<SchemaAtom> = pmask
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(i, &v)| SchemaAtom {
                        positive: v == 1,
                        ..atoms[i].clone()
                    })
                    .collect();
                found = Some((
                    ecount,
                    pcount,
                    Schema {
                        preconditions: pre,
                        ..schema.clone()
                    },
                ));
            }
        }
        if let Some((_, _, schema)) = found {
            return Some(schema);
        }
    }
    None
}

/// Ordered tuples of distinct variables (1-based) of the given length.
fn var_tuples(len: usize, arity: usize) -> Vec<Vec<Arg>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(len: usize, arity: usize, cur: &mut Vec<Arg>, out: &mut Vec<Vec<Arg>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in 1..=arity {
            if !cur.contains(&Arg::Var(v)) {
                cur.push(Arg::Var(v));
                rec(len, arity, cur, out);
                cur.pop();
            }
        }
    }
    rec(len, arity, &mut cur, &mut out);
    out
}

/// Injective bindings of `arity` variables to objects.
fn var_bindings(objects: &[u32], arity: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(objects: &[u32], arity: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == arity {
            out.push(cur.clone());
            return;
        }
        for &o in objects {
            if !cur.contains(&o) {
                cur.push(o);
                rec(objects, arity, cur, out);
                cur.pop();
            }
        }
    }
    rec(objects, arity, &mut cur, &mut out);
    out
}

fn ground(atom: &SchemaAtom, binding: &[u32]) -> PAtom {
    PAtom {
        predicate: atom.predicate,
        args: atom
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => binding[*v - 1],
                Arg::Const(c) => *c as u32,
            })
            .collect(),
    }
}

/// All assignments of values {0,1,2} to `n` slots.
fn ternary(n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0u8..3).map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out
}

#[test]
fn criterion_5_learner_matches_exhaustive_oracle_on_micro_datasets() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_824);
    let beta = Hyperparams {
        max_arity: 2,
        num_predicates: 2,
        ..Hyperparams::default()
    };
    let (mut total, mut solved) = (0usize, 0usize);
    let mut attempts = 0;
    while total < 50 {
        attempts += 1;
        assert!(attempts < 500, "generator starved");
        let micro = if total % 5 < 3 {
            structured_micro(&mut rng)
        } else {
            random_micro(&mut rng)
        };
        let Some(micro) = micro else { continue };
        let dataset = &micro.dataset;
        let insts = vec![("i0".to_string(), dataset.instances[0].states.clone())];
        let pool = PredicatePool::build(&dataset.signature, &insts, 1).unwrap();
        let oracle = oracle_best(dataset, &pool, beta.num_predicates, beta.max_arity);
        match learn(dataset, &pool, &beta).unwrap() {
            LearnOutcome::Solution(gd) => {
                let c = cost(&gd.domain);
                assert_eq!(
                    Some(c),
                    oracle,
                    "dataset {total}: learner found {c}, oracle best {oracle:?}"
                );
                // When every state is marked the verifier must agree.
                if dataset.instances[0].marked.len() == dataset.instances[0].states.len() {
                    assert!(verify(&gd, dataset).unwrap().is_ok(), "dataset {total}");
                }
                solved += 1;
            }
            LearnOutcome::NoSolution => {
                assert_eq!(oracle, None, "dataset {total}: oracle found {oracle:?}");
            }
            LearnOutcome::CapExceeded => panic!("dataset {total}: capped at micro scale"),
        }
        total += 1;
    }
    assert!(solved >= 10, "only {solved}/50 datasets were learnable");
    assert!(t0.elapsed().as_secs() <= 300);
    println!(
        "criterion 5: PASS — {total} micro-datasets, {solved} learnable, learner cost \
         always equals the exhaustive-oracle optimum; {:.1}s",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 6 — planning equivalence with the hidden domains
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_plans_match_hidden_domain_lengths_and_replay() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let cases = [
        ("blocks3ops", rendered(blocks3ops_world(&[2, 3, 4]))),
        ("hanoi1op", rendered(hanoi_world(false, &[1, 2, 3]))),
        ("slidingtile", rendered(standard_slidingtile())),
    ];
    for (name, rd) in &cases {
        let gd = golden(name);
        let sig = &rd.dataset.signature;
        for _ in 0..20 {
            let i = rng.gen_range(0..rd.dataset.instances.len());
            let states = &rd.dataset.instances[i].states;
            let s0 = rng.gen_range(0..states.len());
            let sg = rng.gen_range(0..states.len());
            let dist = hidden_distances(rd, i, s0);
            assert_ne!(dist[sg], usize::MAX, "{name}: hidden graph not connected");
            let instance = build_instance(&gd, sig, &states[s0], &states[sg]).unwrap();
            let plan = match plan_bfs(&gd.domain, &instance, 1_000_000).unwrap() {
                PlanOutcome::Plan(p) => p,
                PlanOutcome::Unsolvable => panic!("{name}: unsolvable learned instance"),
            };
            assert_eq!(plan.len(), dist[sg], "{name}: optimal lengths differ");
            let sim = GraphSimulator::new(rd, i);
            let traj = replay(&plan, &gd, sig, &sim, &states[s0]).unwrap();
            assert_eq!(traj.last().unwrap().atoms, states[sg].atoms, "{name}: replay end");
        }
    }
    println!(
        "criterion 6: PASS — 20 random (s0,sg) pairs per domain over blocks3ops, hanoi, \
         sliding-tile: optimal lengths match the hidden domains, replay ends at sg; {:.1}s",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 7 — dataset totals
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_dataset_totals_are_exact() {
    let t0 = Instant::now();
    let cases: [(&str, RenderedDataset, usize, usize); 4] = [
        ("blocks3ops", rendered(standard_blocks3ops()), 590, 2414),
        (
            "blocks4ops",
            rendered(o2dlearn_core::datagen::standard_blocks4ops()),
            1020,
            2414,
        ),
        ("hanoi", rendered(standard_hanoi(false)), 363, 1074),
        ("slidingtile", rendered(standard_slidingtile()), 742, 1716),
    ];
    for (name, rd, states, edges) in &cases {
        assert_eq!(rd.num_states(), *states, "{name} states");
        assert_eq!(rd.num_edges(), *edges, "{name} edges");
    }
    println!(
        "criterion 7: PASS — 590/2414, 1020/2414, 363/1074, 742/1716 reproduced exactly; {:.1}s",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 8 — ASP cross-check (gated on an installed solver)
// ---------------------------------------------------------------------------

fn find_asp_solver() -> Option<String> {
    if let Ok(s) = std::env::var("O2D_ASP_SOLVER") {
        if !s.is_empty() {
            return Some(s);
        }
    }
    let probe = std::process::Command::new("clingo")
        .arg("--version")
        .output();
    if probe.map(|o| o.status.success()).unwrap_or(false) {
        return Some("clingo".into());
    }
    None
}

#[test]
fn criterion_8_asp_solver_cross_check_or_skip() {
    let Some(solver) = find_asp_solver() else {
        println!(
            "criterion 8: SKIP — no ASP solver found (set O2D_ASP_SOLVER or install clingo); \
             the emission itself is unit-tested"
        );
        return;
    };
    let dataset = rendered(blocks3ops_world(&[2, 3])).dataset;
    let pool = pool_over(&dataset, 2);
    let emission = emit_asp(&dataset, &pool, &Hyperparams::default());
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("program.lp");
    let facts = dir.path().join("facts.lp");
    std::fs::write(&program, &emission.program).unwrap();
    std::fs::write(&facts, &emission.facts).unwrap();
    let out = std::process::Command::new(&solver)
        .arg(&program)
        .arg(&facts)
        .args(SOLVER_OPTIONS.split_whitespace())
        .output()
        .expect("run solver");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("OPTIMUM FOUND"),
        "solver did not prove optimality:\n{stdout}"
    );
    let line = stdout
        .lines()
        .filter(|l| l.starts_with("Optimization"))
        .last()
        .expect("optimization line");
    let values: Vec<i64> = line
        .split_whitespace()
        .skip(1)
        .filter_map(|t| t.parse().ok())
        .collect();
    assert_eq!(values, vec![10, 5, 0, 10, 8], "solver optimum differs");
    println!("criterion 8: PASS — {solver} reproduces cost (10,5,0,10,8) on blocks3ops");
}

// ---------------------------------------------------------------------------
// Criterion 9 — declared substitutions for beyond-desk-scale runs
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_golden_grid_and_sokoban_verify_in_lieu_of_full_runs() {
    let t0 = Instant::now();
    for (name, world) in [
        ("grid", o2dlearn_core::datagen::small_grid()),
        ("sokoban1", o2dlearn_core::datagen::small_sokoban()),
    ] {
        let dataset = rendered(world).dataset;
        let gd = golden(name);
        assert!(verify(&gd, &dataset).unwrap().is_ok(), "{name} golden verify");
    }
    println!(
        "criterion 9: PASS — full-scale grid/sokoban learning and the long sokoban plan \
         are out of desk scale by design; the reference domains verify (C1+C2, Δ=∅) \
         against the small suites instead; {:.1}s",
        t0.elapsed().as_secs_f64()
    );
}
