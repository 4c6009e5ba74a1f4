//! Data generation: hidden STRIPS worlds whose reachable state spaces are
//! rendered into O2D datasets through a per-domain rule registry.
//!
//! Rendering seeds a fact base with the hidden state's positive atoms plus
//! the registry's seed facts, applies the registry rules to a fixpoint, and
//! keeps exactly the atoms whose predicate belongs to the O2D signature
//! (the five binary relations plus the per-domain type unaries).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::grounding::{DataInstance, Dataset, GroundingError};
use crate::o2d::{parse_state, serialize_state, GroundAtom, O2DSignature, O2DState, O2dError};
use crate::strips::{
    enumerate_reachable, Arg, Domain, LabeledGraph, PAtom, PlanningState, Predicate, Schema,
    SchemaAtom, StripsError, Universe,
};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("bad registry: {0}")]
    Registry(String),
    #[error("render failed: {0}")]
    Render(String),
    #[error("instance `{instance}`: states {a} and {b} render identically")]
    NotInjective {
        instance: String,
        a: usize,
        b: usize,
    },
    #[error("bad dataset directory: {0}")]
    BadDump(String),
    #[error(transparent)]
    Strips(#[from] StripsError),
    #[error(transparent)]
    O2d(#[from] O2dError),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad registry JSON: {0}")]
    Json(#[from] serde_json::Error),
}

// ---------------------------------------------------------------------------
// Rule registry
// ---------------------------------------------------------------------------

/// A term in a rule pattern; names starting with an uppercase letter are
/// variables, everything else is a literal constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(String),
}

/// An atom pattern `pred(t1,...,tk)` in a rule head or body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Pattern {
    fn parse(text: &str) -> Result<Pattern, DatagenError> {
        let text = text.trim();
        let open = text
            .find('(')
            .ok_or_else(|| DatagenError::Registry(format!("bad atom pattern `{text}`")))?;
        if !text.ends_with(')') {
            return Err(DatagenError::Registry(format!("bad atom pattern `{text}`")));
        }
        let predicate = text[..open].trim().to_string();
        let args = text[open + 1..text.len() - 1]
            .split(',')
            .map(|t| {
                let t = t.trim();
                if t.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                    Term::Var(t.to_string())
                } else {
                    Term::Const(t.to_string())
                }
            })
            .collect();
        Ok(Pattern { predicate, args })
    }
}

/// A Datalog-style rule: head derived whenever the body matches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Pattern,
    pub body: Vec<Pattern>,
}

/// One registry entry: constants introduced by the domain, seed facts added
/// to every rendered state, and the rules applied to fixpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryEntry {
    pub constants: Vec<String>,
    pub facts: Vec<GroundAtom>,
    pub rules: Vec<Rule>,
}

/// The per-domain rule registry (aliases resolved at parse time).
#[derive(Debug, Clone)]
pub struct Registry {
    entries: BTreeMap<String, RegistryEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Full {
        constants: Vec<String>,
        facts: Vec<(String, Vec<String>)>,
        rules: BTreeMap<String, Vec<(String, Vec<String>)>>,
    },
    Defer {
        #[serde(rename = "defer-to")]
        defer_to: String,
    },
}

impl Registry {
    pub fn parse(json: &str) -> Result<Registry, DatagenError> {
        let raw: BTreeMap<String, RawEntry> = serde_json::from_str(json)?;
        let mut entries = BTreeMap::new();
        for (name, entry) in &raw {
            let mut target = entry;
            if let RawEntry::Defer { defer_to } = target {
                target = raw.get(defer_to).ok_or_else(|| {
                    DatagenError::Registry(format!("`{name}` defers to unknown `{defer_to}`"))
                })?;
            }
            let (constants, facts, rules) = match target {
                RawEntry::Full {
                    constants,
                    facts,
                    rules,
                } => (constants, facts, rules),
                RawEntry::Defer { defer_to } => {
                    return Err(DatagenError::Registry(format!(
                        "`{name}`: chained defer-to `{defer_to}`"
                    )))
                }
            };
            let facts = facts
                .iter()
                .map(|(p, args)| GroundAtom {
                    predicate: p.clone(),
                    args: args.clone(),
                })
                .collect();
            let mut parsed_rules = Vec::new();
            for group in rules.values() {
                for (head, body) in group {
                    let rule = Rule {
                        head: Pattern::parse(head)?,
                        body: body
                            .iter()
                            .map(|b| Pattern::parse(b))
                            .collect::<Result<_, _>>()?,
                    };
                    validate_rule(&rule)?;
                    parsed_rules.push(rule);
                }
            }
            entries.insert(
                name.clone(),
                RegistryEntry {
                    constants: constants.clone(),
                    facts,
                    rules: parsed_rules,
                },
            );
        }
        Ok(Registry { entries })
    }

    /// The registry bundled with the crate.
    pub fn bundled() -> Registry {
        Registry::parse(include_str!("../fixtures/registry.json"))
            .expect("bundled registry must parse")
    }

    pub fn entry(&self, domain: &str) -> Result<&RegistryEntry, DatagenError> {
        self.entries
            .get(domain)
            .ok_or_else(|| DatagenError::Registry(format!("no registry entry for `{domain}`")))
    }
}

/// Safety: every head variable must occur in the body.
fn validate_rule(rule: &Rule) -> Result<(), DatagenError> {
    let body_vars: BTreeSet<&String> = rule
        .body
        .iter()
        .flat_map(|p| p.args.iter())
        .filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        })
        .collect();
    for t in &rule.head.args {
        if let Term::Var(v) = t {
            if !body_vars.contains(v) {
                return Err(DatagenError::Registry(format!(
                    "unsafe rule: head variable `{v}` not bound in body of {}(..)",
                    rule.head.predicate
                )));
            }
        }
    }
    if rule.body.is_empty() {
        return Err(DatagenError::Registry(format!(
            "unsafe rule: empty body for {}(..)",
            rule.head.predicate
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

type Fact = (String, Vec<String>);

fn match_pattern(
    pattern: &Pattern,
    fact: &Fact,
    binding: &mut BTreeMap<String, String>,
) -> bool {
    if pattern.predicate != fact.0 || pattern.args.len() != fact.1.len() {
        return false;
    }
    let mut added: Vec<String> = Vec::new();
    for (t, v) in pattern.args.iter().zip(fact.1.iter()) {
        let ok = match t {
            Term::Const(c) => c == v,
            Term::Var(name) => match binding.get(name) {
                Some(bound) => bound == v,
                None => {
                    binding.insert(name.clone(), v.clone());
                    added.push(name.clone());
                    true
                }
            },
        };
        if !ok {
            for name in &added {
                binding.remove(name);
            }
            return false;
        }
    }
    true
}

fn instantiate_head(head: &Pattern, binding: &BTreeMap<String, String>) -> Fact {
    let args = head
        .args
        .iter()
        .map(|t| match t {
            Term::Const(c) => c.clone(),
            Term::Var(v) => binding[v].clone(),
        })
        .collect();
    (head.predicate.clone(), args)
}

fn fire_rule(rule: &Rule, facts: &BTreeSet<Fact>, out: &mut Vec<Fact>) {
    fn rec(
        body: &[Pattern],
        facts: &BTreeSet<Fact>,
        binding: &mut BTreeMap<String, String>,
        head: &Pattern,
        out: &mut Vec<Fact>,
    ) {
        match body.first() {
            None => out.push(instantiate_head(head, binding)),
            Some(pat) => {
                for fact in facts {
                    let before: Vec<String> = binding.keys().cloned().collect();
                    if match_pattern(pat, fact, binding) {
                        rec(&body[1..], facts, binding, head, out);
                        binding.retain(|k, _| before.contains(k));
                    }
                }
            }
        }
    }
    let mut binding = BTreeMap::new();
    rec(&rule.body, facts, &mut binding, &rule.head, out);
}

/// Renders a hidden state (given as name-level positive atoms over `objects`)
/// into an O2D state: seed facts + hidden atoms, rules to fixpoint, keep the
/// atoms whose predicate is declared in the signature.
///
/// The auxiliary predicate `object` holds for every scene object: the hidden
/// instance objects plus the registry constants mentioned in seed facts
/// (shape names are never objects).
pub fn render(
    entry: &RegistryEntry,
    sig: &O2DSignature,
    hidden_atoms: &[GroundAtom],
    objects: &[String],
) -> Result<O2DState, DatagenError> {
    let mut facts: BTreeSet<Fact> = hidden_atoms
        .iter()
        .chain(entry.facts.iter())
        .map(|a| (a.predicate.clone(), a.args.clone()))
        .collect();
    let fact_constants: BTreeSet<&String> = entry
        .facts
        .iter()
        .flat_map(|a| a.args.iter())
        .filter(|n| entry.constants.contains(n))
        .collect();
    for o in objects.iter().chain(fact_constants.into_iter()) {
        facts.insert(("object".to_string(), vec![o.clone()]));
    }
    loop {
        let mut derived = Vec::new();
        for rule in &entry.rules {
            fire_rule(rule, &facts, &mut derived);
        }
        let before = facts.len();
        facts.extend(derived);
        if facts.len() == before {
            break;
        }
    }
    let mut atoms = Vec::new();
    for (pred, args) in &facts {
        if let Ok(arity) = sig.arity(pred) {
            if arity != args.len() {
                return Err(DatagenError::Render(format!(
                    "derived atom {pred}({}) has wrong arity",
                    args.join(",")
                )));
            }
            atoms.push(GroundAtom {
                predicate: pred.clone(),
                args: args.clone(),
            });
        }
    }
    Ok(O2DState::from_atoms(sig, atoms))
}

// ---------------------------------------------------------------------------
// Hidden worlds
// ---------------------------------------------------------------------------

/// One hidden planning instance: named universe and complete initial state.
#[derive(Debug, Clone)]
pub struct HiddenInstance {
    pub name: String,
    pub universe: Universe,
    pub init: PlanningState,
}

/// A hidden STRIPS world: the domain, its instances, the O2D signature of
/// the rendered states, and the registry entry name used to render them.
#[derive(Debug, Clone)]
pub struct HiddenWorld {
    pub name: String,
    pub domain: Domain,
    pub signature: O2DSignature,
    pub instances: Vec<HiddenInstance>,
}

/// Which part of the rendered graph is marked (T in the dataset).
#[derive(Debug, Clone)]
pub enum Mode {
    /// T = S: every state marked, all edges kept.
    Full,
    /// Per-instance marked subsets; edges from unmarked states dropped.
    Marked(Vec<BTreeSet<usize>>),
}

/// A rendered dataset plus the hidden-side graphs realizing the 1-1
/// correspondence g (dataset state j of instance i ↔ `graphs[i].states[j]`).
#[derive(Debug, Clone)]
pub struct RenderedDataset {
    pub world: HiddenWorld,
    pub graphs: Vec<LabeledGraph>,
    pub dataset: Dataset,
}

impl RenderedDataset {
    pub fn num_states(&self) -> usize {
        self.dataset.instances.iter().map(|i| i.states.len()).sum()
    }

    pub fn num_edges(&self) -> usize {
        self.dataset.instances.iter().map(|i| i.edges.len()).sum()
    }
}

fn state_atoms(domain: &Domain, universe: &Universe, state: &PlanningState) -> Vec<GroundAtom> {
    state
        .true_atoms
        .iter()
        .map(|a| GroundAtom {
            predicate: domain.predicates[a.predicate].name.clone(),
            args: a
                .args
                .iter()
                .map(|&o| universe.name_of(o).to_string())
                .collect(),
        })
        .collect()
}

/// Enumerates each instance's reachable space (BFS, capped), renders every
/// state, verifies g-injectivity per instance, and assembles the dataset.
pub fn build_dataset(
    world: HiddenWorld,
    registry: &Registry,
    mode: Mode,
    cap: usize,
) -> Result<RenderedDataset, DatagenError> {
    let entry = registry.entry(&world.name)?;
    world.domain.validate()?;
    let labels: Vec<String> = world.domain.schemas.iter().map(|s| s.label.clone()).collect();
    let mut graphs = Vec::new();
    let mut instances = Vec::new();
    for (i, inst) in world.instances.iter().enumerate() {
        let graph = enumerate_reachable(&world.domain, &inst.universe, &inst.init, cap)?;
        let objects: Vec<String> = inst
            .universe
            .object_ids()
            .map(|o| inst.universe.name_of(o).to_string())
            .collect();
        let mut states = Vec::new();
        let mut seen: HashMap<BTreeSet<GroundAtom>, usize> = HashMap::new();
        for (j, hs) in graph.states.iter().enumerate() {
            let atoms = state_atoms(&world.domain, &inst.universe, hs);
            let rendered = render(entry, &world.signature, &atoms, &objects)?
                .with_ids(inst.name.clone(), format!("s{j}"));
            if let Some(&prev) = seen.get(&rendered.atoms) {
                return Err(DatagenError::NotInjective {
                    instance: inst.name.clone(),
                    a: prev,
                    b: j,
                });
            }
            seen.insert(rendered.atoms.clone(), j);
            states.push(rendered);
        }
        let marked: BTreeSet<usize> = match &mode {
            Mode::Full => (0..states.len()).collect(),
            Mode::Marked(sets) => sets
                .get(i)
                .ok_or_else(|| {
                    DatagenError::Registry(format!("no marked set for instance `{}`", inst.name))
                })?
                .clone(),
        };
        let edges: Vec<(usize, String, usize)> = graph
            .edges
            .iter()
            .filter(|(s, _, _)| marked.contains(s))
            .map(|&(s, l, t)| (s, labels[l].clone(), t))
            .collect();
        instances.push(DataInstance {
            name: inst.name.clone(),
            states,
            edges,
            marked,
        });
        graphs.push(graph);
    }
    let dataset = Dataset {
        signature: world.signature.clone(),
        labels,
        instances,
    };
    dataset.validate()?;
    Ok(RenderedDataset {
        world,
        graphs,
        dataset,
    })
}

// ---------------------------------------------------------------------------
// Hidden domain constructors
// ---------------------------------------------------------------------------

fn fluent(name: &str, arity: usize) -> Predicate {
    Predicate {
        name: name.into(),
        arity,
        is_static: false,
    }
}

fn statik(name: &str, arity: usize) -> Predicate {
    Predicate {
        name: name.into(),
        arity,
        is_static: true,
    }
}

fn at(predicate: usize, args: &[Arg]) -> SchemaAtom {
    SchemaAtom {
        predicate,
        args: args.to_vec(),
        positive: true,
    }
}

fn nat(predicate: usize, args: &[Arg]) -> SchemaAtom {
    SchemaAtom {
        predicate,
        args: args.to_vec(),
        positive: false,
    }
}

const V1: Arg = Arg::Var(1);
const V2: Arg = Arg::Var(2);
const V3: Arg = Arg::Var(3);
const V4: Arg = Arg::Var(4);

fn sig(constants: &[&str], unary: &[&str]) -> O2DSignature {
    O2DSignature::new(
        constants.iter().map(|s| s.to_string()).collect(),
        unary.iter().map(|s| s.to_string()).collect(),
    )
    .expect("valid signature")
}

/// Hidden Blocksworld with 3 operators (no gripper): Stack moves a block
/// from the table onto a block, Newtower the reverse, Move block-to-block.
pub fn blocks3ops_world(ns: &[usize]) -> HiddenWorld {
    let (on, ontable, clear) = (0, 1, 2);
    let domain = Domain {
        name: "blocks3ops".into(),
        predicates: vec![fluent("on", 2), fluent("ontable", 1), fluent("clear", 1)],
        constants: vec![],
        schemas: vec![
            Schema {
                label: "Stack".into(),
                arity: 2,
                statics: vec![],
                preconditions: vec![at(clear, &[V1]), at(ontable, &[V1]), at(clear, &[V2])],
                effects: vec![at(on, &[V1, V2]), nat(ontable, &[V1]), nat(clear, &[V2])],
            },
            Schema {
                label: "Newtower".into(),
                arity: 2,
                statics: vec![],
                preconditions: vec![at(clear, &[V1]), at(on, &[V1, V2])],
                effects: vec![nat(on, &[V1, V2]), at(ontable, &[V1]), at(clear, &[V2])],
            },
            Schema {
                label: "Move".into(),
                arity: 3,
                statics: vec![],
                preconditions: vec![at(clear, &[V1]), at(on, &[V1, V2]), at(clear, &[V3])],
                effects: vec![
                    nat(on, &[V1, V2]),
                    at(clear, &[V2]),
                    at(on, &[V1, V3]),
                    nat(clear, &[V3]),
                ],
            },
        ],
    };
    let instances = ns
        .iter()
        .map(|&n| {
            let objects: Vec<String> = (0..n).map(|i| format!("b{i}")).collect();
            let universe = Universe::new(&[], &objects);
            let mut init = PlanningState::default();
            for i in 0..n as u32 {
                init.true_atoms.insert(PAtom { predicate: ontable, args: vec![i] });
                init.true_atoms.insert(PAtom { predicate: clear, args: vec![i] });
            }
            HiddenInstance {
                name: format!("blocks3ops-n{n}"),
                universe,
                init,
            }
        })
        .collect();
    HiddenWorld {
        name: "blocks3ops".into(),
        domain,
        signature: sig(&["rectangle"], &["block", "table"]),
        instances,
    }
}

/// Hidden Blocksworld with 4 operators and a one-block gripper.
pub fn blocks4ops_world(ns: &[usize]) -> HiddenWorld {
    let (on, ontable, clear, holding, armempty) = (0, 1, 2, 3, 4);
    let domain = Domain {
        name: "blocks4ops".into(),
        predicates: vec![
            fluent("on", 2),
            fluent("ontable", 1),
            fluent("clear", 1),
            fluent("holding", 1),
            fluent("armempty", 0),
        ],
        constants: vec![],
        schemas: vec![
            Schema {
                label: "Pickup".into(),
                arity: 1,
                statics: vec![],
                preconditions: vec![at(clear, &[V1]), at(ontable, &[V1]), at(armempty, &[])],
                effects: vec![
                    nat(ontable, &[V1]),
                    nat(clear, &[V1]),
                    nat(armempty, &[]),
                    at(holding, &[V1]),
                ],
            },
            Schema {
                label: "Putdown".into(),
                arity: 1,
                statics: vec![],
                preconditions: vec![at(holding, &[V1])],
                effects: vec![
                    at(ontable, &[V1]),
                    at(clear, &[V1]),
                    at(armempty, &[]),
                    nat(holding, &[V1]),
                ],
            },
            Schema {
                label: "Unstack".into(),
                arity: 2,
                statics: vec![],
                preconditions: vec![at(clear, &[V1]), at(on, &[V1, V2]), at(armempty, &[])],
                effects: vec![
                    at(holding, &[V1]),
                    at(clear, &[V2]),
                    nat(on, &[V1, V2]),
                    nat(clear, &[V1]),
                    nat(armempty, &[]),
                ],
            },
            Schema {
                label: "Stack".into(),
                arity: 2,
                statics: vec![],
                preconditions: vec![at(holding, &[V1]), at(clear, &[V2])],
                effects: vec![
                    at(on, &[V1, V2]),
                    at(clear, &[V1]),
                    nat(clear, &[V2]),
                    at(armempty, &[]),
                    nat(holding, &[V1]),
                ],
            },
        ],
    };
    let instances = ns
        .iter()
        .map(|&n| {
            let objects: Vec<String> = (0..n).map(|i| format!("b{i}")).collect();
            let universe = Universe::new(&[], &objects);
            let mut init = PlanningState::default();
            init.true_atoms.insert(PAtom { predicate: armempty, args: vec![] });
            for i in 0..n as u32 {
                init.true_atoms.insert(PAtom { predicate: ontable, args: vec![i] });
                init.true_atoms.insert(PAtom { predicate: clear, args: vec![i] });
            }
            HiddenInstance {
                name: format!("blocks4ops-n{n}"),
                universe,
                init,
            }
        })
        .collect();
    HiddenWorld {
        name: "blocks4ops".into(),
        domain,
        signature: sig(&["rectangle"], &["robot", "block", "table"]),
        instances,
    }
}

/// Hidden Towers of Hanoi on three pegs; `four_ops` splits the single move
/// schema by source/target support type (peg or disk).
pub fn hanoi_world(four_ops: bool, ns: &[usize]) -> HiddenWorld {
    let (on, clear, smaller, disk, peg) = (0, 1, 2, 3, 4);
    let predicates = vec![
        fluent("on", 2),
        fluent("clear", 1),
        statik("smaller", 2),
        statik("disk", 1),
        statik("peg", 1),
    ];
    // Variables: 1 = moved disk, 2 = source support, 3 = target support.
    let move_pre = vec![at(clear, &[V1]), at(on, &[V1, V2]), at(clear, &[V3])];
    let move_eff = vec![
        nat(on, &[V1, V2]),
        at(on, &[V1, V3]),
        at(clear, &[V2]),
        nat(clear, &[V3]),
    ];
    let schemas = if four_ops {
        vec![
            Schema {
                label: "MoveFromPegToPeg".into(),
                arity: 3,
                statics: vec![at(peg, &[V2]), at(peg, &[V3])],
                preconditions: move_pre.clone(),
                effects: move_eff.clone(),
            },
            Schema {
                label: "MoveFromPegToDisk".into(),
                arity: 3,
                statics: vec![at(peg, &[V2]), at(disk, &[V3]), at(smaller, &[V1, V3])],
                preconditions: move_pre.clone(),
                effects: move_eff.clone(),
            },
            Schema {
                label: "MoveFromDiskToPeg".into(),
                arity: 3,
                statics: vec![at(disk, &[V2]), at(peg, &[V3])],
                preconditions: move_pre.clone(),
                effects: move_eff.clone(),
            },
            Schema {
                label: "MoveFromDiskToDisk".into(),
                arity: 3,
                statics: vec![at(disk, &[V2]), at(disk, &[V3]), at(smaller, &[V1, V3])],
                preconditions: move_pre.clone(),
                effects: move_eff.clone(),
            },
        ]
    } else {
        vec![Schema {
            label: "Move".into(),
            arity: 3,
            statics: vec![at(smaller, &[V1, V3])],
            preconditions: move_pre.clone(),
            effects: move_eff.clone(),
        }]
    };
    let tag = if four_ops { "hanoi4ops" } else { "hanoi1op" };
    let domain = Domain {
        name: tag.into(),
        predicates,
        constants: vec![],
        schemas,
    };
    let instances = ns
        .iter()
        .map(|&n| {
            // Disks d1 (smallest) .. dn, then pegs p1..p3.
            let mut objects: Vec<String> = (1..=n).map(|i| format!("d{i}")).collect();
            objects.extend((1..=3).map(|i| format!("p{i}")));
            let universe = Universe::new(&[], &objects);
            let d = |i: usize| (i - 1) as u32;
            let p = |i: usize| (n + i - 1) as u32;
            let mut init = PlanningState::default();
            for i in 1..=n {
                init.true_atoms.insert(PAtom { predicate: disk, args: vec![d(i)] });
                for j in i + 1..=n {
                    init.true_atoms.insert(PAtom { predicate: smaller, args: vec![d(i), d(j)] });
                }
                for j in 1..=3 {
                    init.true_atoms.insert(PAtom { predicate: smaller, args: vec![d(i), p(j)] });
                }
            }
            for j in 1..=3 {
                init.true_atoms.insert(PAtom { predicate: peg, args: vec![p(j)] });
            }
            // Full tower on p1: dn on the peg, each disk on the next larger.
            init.true_atoms.insert(PAtom { predicate: on, args: vec![d(n), p(1)] });
            for i in 1..n {
                init.true_atoms.insert(PAtom { predicate: on, args: vec![d(i), d(i + 1)] });
            }
            init.true_atoms.insert(PAtom { predicate: clear, args: vec![d(1)] });
            init.true_atoms.insert(PAtom { predicate: clear, args: vec![p(2)] });
            init.true_atoms.insert(PAtom { predicate: clear, args: vec![p(3)] });
            HiddenInstance {
                name: format!("{tag}-n{n}"),
                universe,
                init,
            }
        })
        .collect();
    HiddenWorld {
        name: tag.into(),
        domain,
        signature: sig(&["rectangle"], &["disk", "peg"]),
        instances,
    }
}

fn cell_name(x: usize, y: usize) -> String {
    format!("c{x}_{y}")
}

/// Adds `left`-style and `below`-style adjacency atoms for a full
/// `cols`×`rows` board (x grows rightward, y grows upward).
fn board_statics(
    init: &mut PlanningState,
    id: &dyn Fn(usize, usize) -> u32,
    left: usize,
    below: usize,
    cols: usize,
    rows: usize,
) {
    for y in 1..=rows {
        for x in 1..cols {
            init.true_atoms.insert(PAtom { predicate: left, args: vec![id(x, y), id(x + 1, y)] });
        }
    }
    for x in 1..=cols {
        for y in 1..rows {
            init.true_atoms.insert(PAtom { predicate: below, args: vec![id(x, y), id(x, y + 1)] });
        }
    }
}

/// Hidden Sliding-Tile puzzles on `rows`×`cols` boards; the blank starts at
/// the top-right cell with tiles filled row-major from the bottom-left.
pub fn slidingtile_world(dims: &[(usize, usize)]) -> HiddenWorld {
    let (tat, blank, tile, position, left, below) = (0, 1, 2, 3, 4, 5);
    // Variables: 1 = tile, 2 = source cell, 3 = target cell.
    let pre = vec![at(tat, &[V1, V2]), at(blank, &[V3])];
    let eff = vec![
        nat(tat, &[V1, V2]),
        at(tat, &[V1, V3]),
        at(blank, &[V2]),
        nat(blank, &[V3]),
    ];
    let dir = |label: &str, s: SchemaAtom| Schema {
        label: label.into(),
        arity: 3,
        statics: vec![s],
        preconditions: pre.clone(),
        effects: eff.clone(),
    };
    let domain = Domain {
        name: "slidingtile".into(),
        predicates: vec![
            fluent("at", 2),
            fluent("blank", 1),
            statik("tile", 1),
            statik("position", 1),
            statik("left", 2),
            statik("below", 2),
        ],
        constants: vec![],
        schemas: vec![
            dir("MoveUp", at(below, &[V2, V3])),
            dir("MoveDown", at(below, &[V3, V2])),
            dir("MoveRight", at(left, &[V2, V3])),
            dir("MoveLeft", at(left, &[V3, V2])),
        ],
    };
    let instances = dims
        .iter()
        .map(|&(rows, cols)| {
            let n = rows * cols;
            let mut objects: Vec<String> = (1..n).map(|i| format!("t{i}")).collect();
            for y in 1..=rows {
                for x in 1..=cols {
                    objects.push(cell_name(x, y));
                }
            }
            let universe = Universe::new(&[], &objects);
            let cid = |x: usize, y: usize| (n - 1 + (y - 1) * cols + (x - 1)) as u32;
            let mut init = PlanningState::default();
            for i in 0..n - 1 {
                init.true_atoms.insert(PAtom { predicate: tile, args: vec![i as u32] });
            }
            for y in 1..=rows {
                for x in 1..=cols {
                    init.true_atoms.insert(PAtom { predicate: position, args: vec![cid(x, y)] });
                }
            }
            board_statics(&mut init, &cid, left, below, cols, rows);
            // Tiles t1..t_{n-1} on the first n-1 cells (row-major from the
            // bottom-left); the last cell is blank.
            for i in 0..n - 1 {
                let (x, y) = (i % cols + 1, i / cols + 1);
                init.true_atoms.insert(PAtom { predicate: tat, args: vec![i as u32, cid(x, y)] });
            }
            init.true_atoms.insert(PAtom { predicate: blank, args: vec![cid(cols, rows)] });
            HiddenInstance {
                name: format!("slidingtile-{rows}x{cols}"),
                universe,
                init,
            }
        })
        .collect();
    HiddenWorld {
        name: "slidingtile".into(),
        domain,
        signature: sig(&["rectangle"], &["tile", "cell"]),
        instances,
    }
}

/// One IPC-Grid-style instance: a full `cols`×`rows` board of places, a
/// robot, shaped keys (placed on cells), and locked places with unique
/// shapes per instance.
#[derive(Debug, Clone)]
pub struct GridConfig {
    pub name: String,
    pub cols: usize,
    pub rows: usize,
    pub robot: (usize, usize),
    /// (key name, cell, shape)
    pub keys: Vec<(String, (usize, usize), String)>,
    /// (cell, shape); locked places must have pairwise distinct shapes.
    pub locks: Vec<((usize, usize), String)>,
}

/// Hidden IPC Grid: robot moves over open places, picks up / puts down one
/// key at a time, and opens an adjacent locked place with a matching key.
pub fn grid_world(shapes: &[&str], configs: &[GridConfig]) -> HiddenWorld {
    let (at_robot, kat, locked, open, holding, armempty) = (0, 1, 2, 3, 4, 5);
    let (place, key, left, below, matchkey, lock_shape, key_shape) = (6, 7, 8, 9, 10, 11, 12);
    // Moves: 1 = source place, 2 = target place.
    let move_eff = vec![nat(at_robot, &[V1]), at(at_robot, &[V2])];
    let mov = |label: &str, s: SchemaAtom| Schema {
        label: label.into(),
        arity: 2,
        statics: vec![s],
        preconditions: vec![at(at_robot, &[V1]), at(open, &[V2])],
        effects: move_eff.clone(),
    };
    // Unlocks: 1 = robot place, 2 = locked place, 3 = held key.
    let unlock = |label: &str, s: SchemaAtom| Schema {
        label: label.into(),
        arity: 3,
        statics: vec![s, at(matchkey, &[V2, V3])],
        preconditions: vec![at(at_robot, &[V1]), at(locked, &[V2]), at(holding, &[V3])],
        effects: vec![nat(locked, &[V2]), at(open, &[V2])],
    };
    let domain = Domain {
        name: "grid".into(),
        predicates: vec![
            fluent("at_robot", 1),
            fluent("at", 2),
            fluent("locked", 1),
            fluent("open", 1),
            fluent("holding", 1),
            fluent("armempty", 0),
            statik("place", 1),
            statik("key", 1),
            statik("left", 2),
            statik("below", 2),
            statik("matchkey", 2),
            statik("lock_shape", 2),
            statik("key_shape", 2),
        ],
        constants: vec![],
        schemas: vec![
            mov("MoveUp", at(below, &[V1, V2])),
            mov("MoveRight", at(left, &[V1, V2])),
            mov("MoveDown", at(below, &[V2, V1])),
            mov("MoveLeft", at(left, &[V2, V1])),
            Schema {
                label: "Pickup".into(),
                arity: 2,
                statics: vec![at(key, &[V2])],
                preconditions: vec![at(at_robot, &[V1]), at(kat, &[V2, V1]), at(armempty, &[])],
                effects: vec![nat(kat, &[V2, V1]), at(holding, &[V2]), nat(armempty, &[])],
            },
            Schema {
                label: "Putdown".into(),
                arity: 2,
                statics: vec![],
                preconditions: vec![at(at_robot, &[V1]), at(holding, &[V2])],
                effects: vec![at(kat, &[V2, V1]), nat(holding, &[V2]), at(armempty, &[])],
            },
            unlock("UnlockFromAbove", at(below, &[V2, V1])),
            unlock("UnlockFromRight", at(left, &[V2, V1])),
            unlock("UnlockFromBelow", at(below, &[V1, V2])),
            unlock("UnlockFromLeft", at(left, &[V1, V2])),
        ],
    };
    let shape_names: Vec<String> = shapes.iter().map(|s| s.to_string()).collect();
    let instances = configs
        .iter()
        .map(|cfg| {
            let mut objects = vec!["r".to_string()];
            for (k, _, _) in &cfg.keys {
                objects.push(k.clone());
            }
            for y in 1..=cfg.rows {
                for x in 1..=cfg.cols {
                    objects.push(cell_name(x, y));
                }
            }
            let universe = Universe::new(&shape_names, &objects);
            let id = |name: &str| universe.id_of(name).expect("known object");
            let cid = |x: usize, y: usize| id(&cell_name(x, y));
            let mut init = PlanningState::default();
            init.true_atoms.insert(PAtom { predicate: armempty, args: vec![] });
            init.true_atoms.insert(PAtom {
                predicate: at_robot,
                args: vec![cid(cfg.robot.0, cfg.robot.1)],
            });
            let lock_of = |x: usize, y: usize| {
                cfg.locks.iter().find(|((lx, ly), _)| (*lx, *ly) == (x, y))
            };
            for y in 1..=cfg.rows {
                for x in 1..=cfg.cols {
                    init.true_atoms.insert(PAtom { predicate: place, args: vec![cid(x, y)] });
                    match lock_of(x, y) {
                        Some((_, shape)) => {
                            init.true_atoms
                                .insert(PAtom { predicate: locked, args: vec![cid(x, y)] });
                            init.true_atoms.insert(PAtom {
                                predicate: lock_shape,
                                args: vec![cid(x, y), id(shape)],
                            });
                        }
                        None => {
                            init.true_atoms
                                .insert(PAtom { predicate: open, args: vec![cid(x, y)] });
                        }
                    }
                }
            }
            for (k, (x, y), shape) in &cfg.keys {
                init.true_atoms.insert(PAtom { predicate: key, args: vec![id(k)] });
                init.true_atoms.insert(PAtom { predicate: kat, args: vec![id(k), cid(*x, *y)] });
                init.true_atoms
                    .insert(PAtom { predicate: key_shape, args: vec![id(k), id(shape)] });
                for ((lx, ly), lshape) in &cfg.locks {
                    if lshape == shape {
                        init.true_atoms.insert(PAtom {
                            predicate: matchkey,
                            args: vec![cid(*lx, *ly), id(k)],
                        });
                    }
                }
            }
            let cid2 = |x: usize, y: usize| cid(x, y);
            board_statics(&mut init, &cid2, left, below, cfg.cols, cfg.rows);
            HiddenInstance {
                name: cfg.name.clone(),
                universe,
                init,
            }
        })
        .collect();
    HiddenWorld {
        name: "grid".into(),
        domain,
        signature: sig(shapes, &["robot", "key", "cell", "blackcell"]),
        instances,
    }
}

/// One Sokoban instance on a full `cols`×`rows` floor.
#[derive(Debug, Clone)]
pub struct SokobanConfig {
    pub name: String,
    pub cols: usize,
    pub rows: usize,
    pub sokoban: (usize, usize),
    pub crates: Vec<(usize, usize)>,
}

/// Hidden Sokoban: the agent moves into clear cells and pushes single
/// crates one cell along a row or column.
pub fn sokoban_world(configs: &[SokobanConfig]) -> HiddenWorld {
    let (sat, clear, krate, leftof, below) = (0, 1, 2, 3, 4);
    let s1 = Arg::Const(0);
    // Moves: 1 = agent cell, 2 = target cell.
    let mov = |label: &str, s: SchemaAtom| Schema {
        label: label.into(),
        arity: 2,
        statics: vec![s],
        preconditions: vec![at(sat, &[s1, V1]), at(clear, &[V2])],
        effects: vec![
            nat(sat, &[s1, V1]),
            at(sat, &[s1, V2]),
            at(clear, &[V1]),
            nat(clear, &[V2]),
        ],
    };
    // Pushes: 1 = crate cell, 2 = crate, 3 = agent cell, 4 = target cell,
    // with 3 → 1 → 4 in a line.
    let push = |label: &str, s_a: SchemaAtom, s_b: SchemaAtom| Schema {
        label: label.into(),
        arity: 4,
        statics: vec![s_a, s_b, at(krate, &[V2])],
        preconditions: vec![at(sat, &[V2, V1]), at(sat, &[s1, V3]), at(clear, &[V4])],
        effects: vec![
            nat(sat, &[s1, V3]),
            at(sat, &[s1, V1]),
            nat(sat, &[V2, V1]),
            at(sat, &[V2, V4]),
            at(clear, &[V3]),
            nat(clear, &[V4]),
        ],
    };
    let domain = Domain {
        name: "sokoban1".into(),
        predicates: vec![
            fluent("at", 2),
            fluent("clear", 1),
            statik("crate", 1),
            statik("leftof", 2),
            statik("below", 2),
        ],
        constants: vec!["sokoban1".into()],
        schemas: vec![
            mov("MoveUp", at(below, &[V1, V2])),
            mov("MoveDown", at(below, &[V2, V1])),
            mov("MoveRight", at(leftof, &[V1, V2])),
            mov("MoveLeft", at(leftof, &[V2, V1])),
            push("PushUp", at(below, &[V3, V1]), at(below, &[V1, V4])),
            push("PushDown", at(below, &[V1, V3]), at(below, &[V4, V1])),
            push("PushRight", at(leftof, &[V3, V1]), at(leftof, &[V1, V4])),
            push("PushLeft", at(leftof, &[V1, V3]), at(leftof, &[V4, V1])),
        ],
    };
    let instances = configs
        .iter()
        .map(|cfg| {
            let mut objects: Vec<String> =
                (1..=cfg.crates.len()).map(|i| format!("cr{i}")).collect();
            for y in 1..=cfg.rows {
                for x in 1..=cfg.cols {
                    objects.push(cell_name(x, y));
                }
            }
            let universe = Universe::new(&["sokoban1".to_string()], &objects);
            let id = |name: &str| universe.id_of(name).expect("known object");
            let cid = |x: usize, y: usize| id(&cell_name(x, y));
            let mut init = PlanningState::default();
            init.true_atoms.insert(PAtom {
                predicate: sat,
                args: vec![0, cid(cfg.sokoban.0, cfg.sokoban.1)],
            });
            for (i, &(x, y)) in cfg.crates.iter().enumerate() {
                let c = id(&format!("cr{}", i + 1));
                init.true_atoms.insert(PAtom { predicate: krate, args: vec![c] });
                init.true_atoms.insert(PAtom { predicate: sat, args: vec![c, cid(x, y)] });
            }
            let occupied: BTreeSet<(usize, usize)> = cfg
                .crates
                .iter()
                .copied()
                .chain([cfg.sokoban])
                .collect();
            for y in 1..=cfg.rows {
                for x in 1..=cfg.cols {
                    if !occupied.contains(&(x, y)) {
                        init.true_atoms.insert(PAtom { predicate: clear, args: vec![cid(x, y)] });
                    }
                }
            }
            let cid2 = |x: usize, y: usize| cid(x, y);
            board_statics(&mut init, &cid2, leftof, below, cfg.cols, cfg.rows);
            HiddenInstance {
                name: cfg.name.clone(),
                universe,
                init,
            }
        })
        .collect();
    HiddenWorld {
        name: "sokoban1".into(),
        domain,
        signature: sig(&["rectangle", "sokoshape"], &["sokoban", "crate", "cell"]),
        instances,
    }
}

// ---------------------------------------------------------------------------
// Standard instance suites
// ---------------------------------------------------------------------------

/// Blocks3ops over 2..=5 blocks (590 states / 2414 edges in total).
pub fn standard_blocks3ops() -> HiddenWorld {
    blocks3ops_world(&[2, 3, 4, 5])
}

/// Blocks4ops over 1..=5 blocks (1020 states / 2414 edges in total).
pub fn standard_blocks4ops() -> HiddenWorld {
    blocks4ops_world(&[1, 2, 3, 4, 5])
}

/// Hanoi over 1..=5 disks on three pegs (363 states / 1074 edges in total).
pub fn standard_hanoi(four_ops: bool) -> HiddenWorld {
    hanoi_world(four_ops, &[1, 2, 3, 4, 5])
}

/// The seven boards with at most 6 cells (742 states / 1716 edges in total).
pub fn standard_slidingtile() -> HiddenWorld {
    slidingtile_world(&[(1, 2), (2, 1), (1, 3), (3, 1), (2, 2), (2, 3), (3, 2)])
}

/// A small Grid suite sized for verification runs: varying key counts keep
/// every non-robot object anonymous, lock shapes are unique per instance.
pub fn small_grid() -> HiddenWorld {
    grid_world(
        &["circle", "heart"],
        &[
            GridConfig {
                name: "grid-1x3".into(),
                cols: 3,
                rows: 1,
                robot: (1, 1),
                keys: vec![("k1".into(), (2, 1), "circle".into())],
                locks: vec![((3, 1), "circle".into())],
            },
            GridConfig {
                name: "grid-2x2".into(),
                cols: 2,
                rows: 2,
                robot: (1, 1),
                keys: vec![
                    ("k1".into(), (2, 1), "heart".into()),
                    ("k2".into(), (1, 2), "circle".into()),
                ],
                locks: vec![((2, 2), "heart".into())],
            },
        ],
    )
}

/// A small Sokoban suite sized for verification runs; crate counts vary so
/// no crate is a spurious constant.
pub fn small_sokoban() -> HiddenWorld {
    sokoban_world(&[
        SokobanConfig {
            name: "sokoban-3x1".into(),
            cols: 3,
            rows: 1,
            sokoban: (1, 1),
            crates: vec![],
        },
        SokobanConfig {
            name: "sokoban-4x1".into(),
            cols: 4,
            rows: 1,
            sokoban: (1, 1),
            crates: vec![(3, 1)],
        },
        SokobanConfig {
            name: "sokoban-2x3".into(),
            cols: 2,
            rows: 3,
            sokoban: (1, 1),
            crates: vec![(1, 2), (2, 2)],
        },
    ])
}

// ---------------------------------------------------------------------------
// Dataset dump / load
// ---------------------------------------------------------------------------

/// Writes a dataset directory: `signature.txt`, `labels.txt`,
/// `instances.txt`, `states/<instance>/<id>.o2d`, `edges.tsv`, `marked.tsv`.
pub fn dump_dataset(dataset: &Dataset, dir: &Path) -> Result<(), DatagenError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("signature.txt"), dataset.signature.serialize())?;
    std::fs::write(dir.join("labels.txt"), dataset.labels.join("\n") + "\n")?;
    let names: Vec<&str> = dataset.instances.iter().map(|i| i.name.as_str()).collect();
    std::fs::write(dir.join("instances.txt"), names.join("\n") + "\n")?;
    let mut edges = String::new();
    let mut marked = String::new();
    for inst in &dataset.instances {
        let sdir = dir.join("states").join(&inst.name);
        std::fs::create_dir_all(&sdir)?;
        for (j, st) in inst.states.iter().enumerate() {
            std::fs::write(sdir.join(format!("s{j}.o2d")), serialize_state(st))?;
        }
        for (s, l, t) in &inst.edges {
            let _ = writeln!(edges, "{}\ts{s}\t{l}\ts{t}", inst.name);
        }
        for s in &inst.marked {
            let _ = writeln!(marked, "{}\ts{s}", inst.name);
        }
    }
    std::fs::write(dir.join("edges.tsv"), edges)?;
    std::fs::write(dir.join("marked.tsv"), marked)?;
    Ok(())
}

fn state_index(id: &str) -> Result<usize, DatagenError> {
    id.strip_prefix('s')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| DatagenError::BadDump(format!("bad state id `{id}`")))
}

/// Loads a dataset directory written by [`dump_dataset`].
pub fn load_dataset(dir: &Path) -> Result<Dataset, DatagenError> {
    let read = |name: &str| -> Result<String, DatagenError> {
        std::fs::read_to_string(dir.join(name))
            .map_err(|e| DatagenError::BadDump(format!("{name}: {e}")))
    };
    let signature = O2DSignature::parse(&read("signature.txt")?)?;
    let labels: Vec<String> = read("labels.txt")?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().to_string())
        .collect();
    let mut instances = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for line in read("instances.txt")?.lines() {
        let name = line.trim();
        if name.is_empty() {
            continue;
        }
        let sdir = dir.join("states").join(name);
        let mut count = 0;
        while sdir.join(format!("s{count}.o2d")).exists() {
            count += 1;
        }
        if count == 0 {
            return Err(DatagenError::BadDump(format!("instance `{name}` has no states")));
        }
        let mut states = Vec::with_capacity(count);
        for j in 0..count {
            let text = std::fs::read_to_string(sdir.join(format!("s{j}.o2d")))?;
            states.push(parse_state(&signature, &text)?.with_ids(name, format!("s{j}")));
        }
        index.insert(name.to_string(), instances.len());
        instances.push(DataInstance {
            name: name.to_string(),
            states,
            edges: Vec::new(),
            marked: BTreeSet::new(),
        });
    }
    for (ln, line) in read("edges.tsv")?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 4 {
            return Err(DatagenError::BadDump(format!("edges.tsv line {}", ln + 1)));
        }
        let i = *index
            .get(parts[0])
            .ok_or_else(|| DatagenError::BadDump(format!("unknown instance `{}`", parts[0])))?;
        instances[i]
            .edges
            .push((state_index(parts[1])?, parts[2].to_string(), state_index(parts[3])?));
    }
    for (ln, line) in read("marked.tsv")?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 2 {
            return Err(DatagenError::BadDump(format!("marked.tsv line {}", ln + 1)));
        }
        let i = *index
            .get(parts[0])
            .ok_or_else(|| DatagenError::BadDump(format!("unknown instance `{}`", parts[0])))?;
        instances[i].marked.insert(state_index(parts[1])?);
    }
    let dataset = Dataset {
        signature,
        labels,
        instances,
    };
    dataset.validate()?;
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ga(pred: &str, args: &[&str]) -> GroundAtom {
        GroundAtom::new(pred, args)
    }

    #[test]
    fn registry_parses_and_resolves_aliases() {
        let reg = Registry::bundled();
        for name in [
            "blocks3ops",
            "blocks4ops",
            "hanoi1op",
            "hanoi4ops",
            "slidingtile",
            "grid",
            "sokoban1",
            "sokoban2",
        ] {
            assert!(reg.entry(name).is_ok(), "missing entry {name}");
        }
        assert_eq!(reg.entry("hanoi4ops").unwrap(), reg.entry("hanoi1op").unwrap());
        assert_eq!(reg.entry("sokoban2").unwrap(), reg.entry("sokoban1").unwrap());
        assert!(reg.entry("nosuch").is_err());
    }

    #[test]
    fn unsafe_rules_rejected() {
        let bad = r#"{ "d": { "constants": [], "facts": [],
            "rules": { "g": [ ["p(X,Y)", ["q(X)"]] ] } } }"#;
        assert!(matches!(Registry::parse(bad), Err(DatagenError::Registry(_))));
    }

    #[test]
    fn blocks3ops_render_example() {
        // A 2-block tower: b1 on b0 on the table.
        let reg = Registry::bundled();
        let world = blocks3ops_world(&[2]);
        let hidden = [
            ga("ontable", &["b0"]),
            ga("on", &["b1", "b0"]),
            ga("clear", &["b1"]),
        ];
        let st = render(
            reg.entry("blocks3ops").unwrap(),
            &world.signature,
            &hidden,
            &["b0".into(), "b1".into()],
        )
        .unwrap();
        for atom in [
            ga("block", &["b0"]),
            ga("block", &["b1"]),
            ga("table", &["t"]),
            ga("below", &["t", "b0"]),
            ga("below", &["b0", "b1"]),
            ga("smaller", &["b0", "t"]),
            ga("smaller", &["b1", "t"]),
            ga("shape", &["b0", "rectangle"]),
            ga("shape", &["b1", "rectangle"]),
            ga("shape", &["t", "rectangle"]),
        ] {
            assert!(st.atoms.contains(&atom), "missing {atom}");
        }
        // Hidden STRIPS atoms must not leak.
        assert!(!st.atoms.iter().any(|a| a.predicate == "on" || a.predicate == "clear"));
        // t is an object (only shape names are O2D constants here).
        assert!(st.objects.contains("t"));
        assert!(!st.objects.contains("rectangle"));
    }

    #[test]
    fn smaller_closure_is_transitive() {
        // grid: key < place and robot < place are seeded; a chained relation
        // closes transitively through the generic transitivity rule.
        let entry = RegistryEntry {
            constants: vec![],
            facts: vec![],
            rules: vec![Rule {
                head: Pattern::parse("smaller(X,Z)").unwrap(),
                body: vec![
                    Pattern::parse("smaller(X,Y)").unwrap(),
                    Pattern::parse("smaller(Y,Z)").unwrap(),
                ],
            }],
        };
        let s = sig(&[], &[]);
        let st = render(
            &entry,
            &s,
            &[ga("smaller", &["a", "b"]), ga("smaller", &["b", "c"])],
            &["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        assert!(st.atoms.contains(&ga("smaller", &["a", "c"])));
        assert_eq!(
            st.atoms.iter().filter(|a| a.predicate == "smaller").count(),
            3
        );
    }

    #[test]
    fn render_empty_hidden_state_keeps_seed_facts() {
        let reg = Registry::bundled();
        let s = sig(&["rectangle"], &["block", "table"]);
        let st = render(reg.entry("blocks3ops").unwrap(), &s, &[], &[]).unwrap();
        assert!(st.atoms.contains(&ga("table", &["t"])));
        assert!(st.atoms.contains(&ga("shape", &["t", "rectangle"])));
    }

    #[test]
    fn blocks3ops_totals_match() {
        let reg = Registry::bundled();
        let ds = build_dataset(standard_blocks3ops(), &reg, Mode::Full, 100_000).unwrap();
        assert_eq!(ds.num_states(), 590);
        assert_eq!(ds.num_edges(), 2414);
    }

    #[test]
    fn blocks4ops_totals_match() {
        let reg = Registry::bundled();
        let ds = build_dataset(standard_blocks4ops(), &reg, Mode::Full, 100_000).unwrap();
        assert_eq!(ds.num_states(), 1020);
        assert_eq!(ds.num_edges(), 2414);
    }

    #[test]
    fn hanoi_totals_match() {
        let reg = Registry::bundled();
        let ds = build_dataset(standard_hanoi(false), &reg, Mode::Full, 100_000).unwrap();
        assert_eq!(ds.num_states(), 363);
        assert_eq!(ds.num_edges(), 1074);
        // The 4-op split relabels the same transitions.
        let ds4 = build_dataset(standard_hanoi(true), &reg, Mode::Full, 100_000).unwrap();
        assert_eq!(ds4.num_states(), 363);
        assert_eq!(ds4.num_edges(), 1074);
    }

    #[test]
    fn slidingtile_totals_match() {
        let reg = Registry::bundled();
        let ds = build_dataset(standard_slidingtile(), &reg, Mode::Full, 100_000).unwrap();
        assert_eq!(ds.num_states(), 742);
        assert_eq!(ds.num_edges(), 1716);
    }

    #[test]
    fn small_grid_and_sokoban_build() {
        let reg = Registry::bundled();
        let g = build_dataset(small_grid(), &reg, Mode::Full, 100_000).unwrap();
        assert!(g.num_states() > 10);
        // Rendered grid states expose cells, the robot, and shapes.
        let st = &g.dataset.instances[0].states[0];
        assert!(st.atoms.contains(&GroundAtom::new("robot", &["r"])));
        assert!(st.atoms.contains(&GroundAtom::new("cell", &["c1_1"])));
        assert!(st.atoms.contains(&GroundAtom::new("blackcell", &["c3_1"])));
        assert!(st.atoms.contains(&GroundAtom::new("shape", &["k1", "circle"])));
        let s = build_dataset(small_sokoban(), &reg, Mode::Full, 100_000).unwrap();
        assert!(s.num_states() > 10);
        let st = &s.dataset.instances[0].states[0];
        assert!(st
            .atoms
            .contains(&GroundAtom::new("shape", &["sokoban1", "sokoshape"])));
        assert!(st.atoms.contains(&GroundAtom::new("overlap", &["sokoban1", "c1_1"])));
        assert!(st.atoms.contains(&GroundAtom::new("left", &["c1_1", "c2_1"])));
    }

    #[test]
    fn rendering_is_deterministic() {
        let reg = Registry::bundled();
        let a = build_dataset(blocks3ops_world(&[3]), &reg, Mode::Full, 100_000).unwrap();
        let b = build_dataset(blocks3ops_world(&[3]), &reg, Mode::Full, 100_000).unwrap();
        let dump_a: Vec<String> = a.dataset.instances[0]
            .states
            .iter()
            .map(serialize_state)
            .collect();
        let dump_b: Vec<String> = b.dataset.instances[0]
            .states
            .iter()
            .map(serialize_state)
            .collect();
        assert_eq!(dump_a, dump_b);
        assert_eq!(a.dataset.instances[0].edges, b.dataset.instances[0].edges);
    }

    #[test]
    fn injectivity_violation_detected() {
        // A world whose only fluent is invisible to the registry: distinct
        // hidden states render identically.
        let domain = Domain {
            name: "opaque".into(),
            predicates: vec![fluent("secret", 1)],
            constants: vec![],
            schemas: vec![Schema {
                label: "Flip".into(),
                arity: 1,
                statics: vec![],
                preconditions: vec![at(0, &[V1])],
                effects: vec![nat(0, &[V1])],
            }],
        };
        let mut init = PlanningState::default();
        init.true_atoms.insert(PAtom { predicate: 0, args: vec![0] });
        let world = HiddenWorld {
            name: "blocks3ops".into(),
            domain,
            signature: sig(&["rectangle"], &["block", "table"]),
            instances: vec![HiddenInstance {
                name: "opaque-1".into(),
                universe: Universe::new(&[], &["x".into(), "y".into()]),
                init,
            }],
        };
        let reg = Registry::bundled();
        assert!(matches!(
            build_dataset(world, &reg, Mode::Full, 1000),
            Err(DatagenError::NotInjective { .. })
        ));
    }

    #[test]
    fn marked_mode_restricts_edges() {
        let reg = Registry::bundled();
        let full = build_dataset(blocks3ops_world(&[2]), &reg, Mode::Full, 1000).unwrap();
        let marked: BTreeSet<usize> = [0].into_iter().collect();
        let part = build_dataset(
            blocks3ops_world(&[2]),
            &reg,
            Mode::Marked(vec![marked.clone()]),
            1000,
        )
        .unwrap();
        assert_eq!(part.dataset.instances[0].marked, marked);
        assert!(part.num_edges() < full.num_edges());
        assert!(part.dataset.instances[0].edges.iter().all(|(s, _, _)| *s == 0));
    }

    #[test]
    fn dump_load_round_trip() {
        let reg = Registry::bundled();
        let ds = build_dataset(blocks3ops_world(&[2, 3]), &reg, Mode::Full, 1000)
            .unwrap()
            .dataset;
        let dir = tempfile::tempdir().unwrap();
        dump_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back.labels, ds.labels);
        assert_eq!(back.signature, ds.signature);
        assert_eq!(back.instances.len(), ds.instances.len());
        for (a, b) in back.instances.iter().zip(ds.instances.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.marked, b.marked);
            let mut ea = a.edges.clone();
            let mut eb = b.edges.clone();
            ea.sort();
            eb.sort();
            assert_eq!(ea, eb);
            for (x, y) in a.states.iter().zip(b.states.iter()) {
                assert_eq!(x.atoms, y.atoms);
                assert_eq!(x.objects, y.objects);
            }
        }
    }
}
