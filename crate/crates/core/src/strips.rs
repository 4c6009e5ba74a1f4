//! Lifted STRIPS-with-negation: domains, schemas, complete planning states,
//! grounding/applicability, reachable-space enumeration, and PDDL export.
//!
//! Bindings map schema variables to *distinct non-constant* objects; domain
//! constants appear directly in atom argument tuples. Planning states are
//! complete valuations represented by their true-atom set over the ground
//! atom space At(P) (tuples of distinct universe elements).

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StripsError {
    #[error("invalid domain: {0}")]
    BadDomain(String),
    #[error("binding is not applicable for schema `{0}`")]
    NotApplicable(String),
    #[error("no schema with label `{0}`")]
    NoSuchLabel(String),
    #[error("reachable-space cap of {0} states exceeded")]
    CapExceeded(usize),
    #[error("PDDL parse error: {0}")]
    PddlParse(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
}

pub type ObjId = u32;

/// A schema-atom argument: a variable 1..=arity or a domain constant
/// (index into `Domain::constants`, which equals its universe id).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg {
    Var(usize),
    Const(usize),
}

/// A signed lifted atom over a domain predicate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SchemaAtom {
    pub predicate: usize,
    pub args: Vec<Arg>,
    pub positive: bool,
}

/// One action schema: static atoms and preconditions gate applicability;
/// effects are applied on transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub label: String,
    pub arity: usize,
    pub statics: Vec<SchemaAtom>,
    pub preconditions: Vec<SchemaAtom>,
    pub effects: Vec<SchemaAtom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
    pub is_static: bool,
}

/// A lifted STRIPS domain: one schema per action label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub predicates: Vec<Predicate>,
    pub constants: Vec<String>,
    pub schemas: Vec<Schema>,
}

impl Domain {
    pub fn schema(&self, label: &str) -> Result<&Schema, StripsError> {
        self.schemas
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| StripsError::NoSuchLabel(label.to_string()))
    }

    pub fn predicate_index(&self, name: &str) -> Result<usize, StripsError> {
        self.predicates
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| StripsError::UnknownName(name.to_string()))
    }

    /// Checks schema invariants: variable bounds, arity agreement, effects
    /// non-empty, no contradictory effects, effects only on fluents, one
    /// schema per label.
    pub fn validate(&self) -> Result<(), StripsError> {
        let mut labels = BTreeSet::new();
        for s in &self.schemas {
            if !labels.insert(&s.label) {
                return Err(StripsError::BadDomain(format!(
                    "duplicate schema label `{}`",
                    s.label
                )));
            }
            if s.effects.is_empty() {
                return Err(StripsError::BadDomain(format!(
                    "schema `{}` has no effects",
                    s.label
                )));
            }
            for (group, atoms) in [
                ("static", &s.statics),
                ("pre", &s.preconditions),
                ("eff", &s.effects),
            ] {
                for a in atoms {
                    let p = self.predicates.get(a.predicate).ok_or_else(|| {
                        StripsError::BadDomain(format!("schema `{}`: bad predicate index", s.label))
                    })?;
                    if a.args.len() != p.arity {
                        return Err(StripsError::BadDomain(format!(
                            "schema `{}`: {group} atom on `{}` has {} args, predicate arity {}",
                            s.label,
                            p.name,
                            a.args.len(),
                            p.arity
                        )));
                    }
                    for arg in &a.args {
                        match arg {
                            Arg::Var(v) if *v == 0 || *v > s.arity => {
                                return Err(StripsError::BadDomain(format!(
                                    "schema `{}`: variable {v} out of range 1..={}",
                                    s.label, s.arity
                                )))
                            }
                            Arg::Const(c) if *c >= self.constants.len() => {
                                return Err(StripsError::BadDomain(format!(
                                    "schema `{}`: constant index {c} out of range",
                                    s.label
                                )))
                            }
                            _ => {}
                        }
                    }
                    if group == "eff" && p.is_static {
                        return Err(StripsError::BadDomain(format!(
                            "schema `{}`: effect on static predicate `{}`",
                            s.label, p.name
                        )));
                    }
                }
            }
            for a in &s.effects {
                if s.effects
                    .iter()
                    .any(|b| b.predicate == a.predicate && b.args == a.args && b.positive != a.positive)
                {
                    return Err(StripsError::BadDomain(format!(
                        "schema `{}`: contradictory effects",
                        s.label
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The element universe of an instance: domain constants first (so a
/// constant's universe id equals its index in `Domain::constants`), then the
/// instance objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    pub names: Vec<String>,
    pub n_constants: usize,
}

impl Universe {
    pub fn new(constants: &[String], objects: &[String]) -> Universe {
        let mut names: Vec<String> = constants.to_vec();
        names.extend(objects.iter().cloned());
        Universe {
            names,
            n_constants: constants.len(),
        }
    }

    pub fn id_of(&self, name: &str) -> Option<ObjId> {
        self.names.iter().position(|n| n == name).map(|i| i as ObjId)
    }

    pub fn name_of(&self, id: ObjId) -> &str {
        &self.names[id as usize]
    }

    /// Ids of bindable (non-constant) objects.
    pub fn object_ids(&self) -> impl Iterator<Item = ObjId> + '_ {
        (self.n_constants as ObjId)..(self.names.len() as ObjId)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// A ground atom over universe element ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PAtom {
    pub predicate: usize,
    pub args: Vec<ObjId>,
}

/// A complete planning state, represented by its true atoms; every ground
/// atom of At(P) not present is false.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PlanningState {
    pub true_atoms: BTreeSet<PAtom>,
}

impl PlanningState {
    pub fn holds(&self, atom: &PAtom) -> bool {
        self.true_atoms.contains(atom)
    }
}

/// A planning instance: objects, complete initial state, goal literals.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub universe: Universe,
    pub init: PlanningState,
    pub goal: Vec<(PAtom, bool)>,
}

impl Instance {
    pub fn goal_satisfied(&self, state: &PlanningState) -> bool {
        self.goal
            .iter()
            .all(|(a, pos)| state.holds(a) == *pos)
    }
}

/// Enumerates the ground atom space At(P): tuples of distinct universe
/// elements for every predicate (mirrors `opt_equal_objects = 0`).
pub fn ground_atom_space(domain: &Domain, universe: &Universe) -> Vec<PAtom> {
    let n = universe.len() as ObjId;
    let mut out = Vec::new();
    for (p, pred) in domain.predicates.iter().enumerate() {
        match pred.arity {
            0 => out.push(PAtom {
                predicate: p,
                args: vec![],
            }),
            1 => {
                for x in 0..n {
                    out.push(PAtom {
                        predicate: p,
                        args: vec![x],
                    });
                }
            }
            2 => {
                for x in 0..n {
                    for y in 0..n {
                        if x != y {
                            out.push(PAtom {
                                predicate: p,
                                args: vec![x, y],
                            });
                        }
                    }
                }
            }
            k => panic!("unsupported predicate arity {k}"),
        }
    }
    out
}

fn ground(atom: &SchemaAtom, binding: &[ObjId]) -> PAtom {
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

fn atom_satisfied(atom: &SchemaAtom, binding: &[ObjId], state: &PlanningState) -> bool {
    state.holds(&ground(atom, binding)) == atom.positive
}

/// Maximum variable index mentioned by an atom (0 if none).
fn max_var(atom: &SchemaAtom) -> usize {
    atom.args
        .iter()
        .map(|a| match a {
            Arg::Var(v) => *v,
            Arg::Const(_) => 0,
        })
        .max()
        .unwrap_or(0)
}

/// All bindings of schema variables to distinct non-constant objects that
/// satisfy the schema's static atoms and preconditions.
///
/// Computed by a variable-by-variable backtracking join: after fixing
/// variable v, every gating atom whose variables are all ≤ v is checked.
/// Since pool predicates have arity ≤ 2, this subsumes the factored
/// pair-table join of the reference encoding.
pub fn applicable_bindings(
    schema: &Schema,
    universe: &Universe,
    state: &PlanningState,
) -> Vec<Vec<ObjId>> {
    let gating: Vec<&SchemaAtom> = schema
        .statics
        .iter()
        .chain(schema.preconditions.iter())
        .collect();
    let mut by_depth: Vec<Vec<&SchemaAtom>> = vec![Vec::new(); schema.arity + 1];
    for a in &gating {
        by_depth[max_var(a)].push(a);
    }
    // Depth-0 atoms (nullary / constants only) gate everything.
    if !by_depth[0].iter().all(|a| atom_satisfied(a, &[], state)) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut binding: Vec<ObjId> = Vec::with_capacity(schema.arity);
    fn rec(
        depth: usize,
        arity: usize,
        by_depth: &[Vec<&SchemaAtom>],
        universe: &Universe,
        state: &PlanningState,
        binding: &mut Vec<ObjId>,
        out: &mut Vec<Vec<ObjId>>,
    ) {
        if depth > arity {
            out.push(binding.clone());
            return;
        }
        for obj in universe.object_ids() {
            if binding.contains(&obj) {
                continue;
            }
            binding.push(obj);
            if by_depth[depth]
                .iter()
                .all(|a| atom_satisfied(a, binding, state))
            {
                rec(depth + 1, arity, by_depth, universe, state, binding, out);
            }
            binding.pop();
        }
    }
    rec(1, schema.arity, &by_depth, universe, state, &mut binding, &mut out);
    out
}

/// Applies a schema under a binding, checking applicability.
pub fn apply(
    schema: &Schema,
    binding: &[ObjId],
    universe: &Universe,
    state: &PlanningState,
) -> Result<PlanningState, StripsError> {
    let ok = binding.len() == schema.arity
        && binding.iter().collect::<BTreeSet<_>>().len() == binding.len()
        && binding
            .iter()
            .all(|&b| (b as usize) >= universe.n_constants && (b as usize) < universe.len())
        && schema
            .statics
            .iter()
            .chain(schema.preconditions.iter())
            .all(|a| atom_satisfied(a, binding, state));
    if !ok {
        return Err(StripsError::NotApplicable(schema.label.clone()));
    }
    Ok(apply_unchecked(schema, binding, state))
}

/// Applies effects without checking applicability (caller guarantees it).
pub fn apply_unchecked(schema: &Schema, binding: &[ObjId], state: &PlanningState) -> PlanningState {
    let mut next = state.clone();
    for eff in &schema.effects {
        let atom = ground(eff, binding);
        if eff.positive {
            next.true_atoms.insert(atom);
        } else {
            next.true_atoms.remove(&atom);
        }
    }
    next
}

/// Multiset of successors of `state` under the labeled schema (duplicates
/// from distinct bindings kept).
pub fn successors_by_label(
    domain: &Domain,
    universe: &Universe,
    state: &PlanningState,
    label: &str,
) -> Result<Vec<PlanningState>, StripsError> {
    let schema = domain.schema(label)?;
    Ok(applicable_bindings(schema, universe, state)
        .iter()
        .map(|b| apply_unchecked(schema, b, state))
        .collect())
}

/// A labeled transition graph over planning states.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub states: Vec<PlanningState>,
    /// (source state index, schema index, target state index)
    pub edges: Vec<(usize, usize, usize)>,
}

impl LabeledGraph {
    /// Dump format: `node <id>` lines followed by `edge <id> <label> <id>`.
    pub fn dump(&self, domain: &Domain) -> String {
        let mut out = String::new();
        for i in 0..self.states.len() {
            let _ = writeln!(out, "node {i}");
        }
        for (s, l, t) in &self.edges {
            let _ = writeln!(out, "edge {s} {} {t}", domain.schemas[*l].label);
        }
        out
    }
}

/// BFS closure of the labeled transition relation from `init`.
pub fn enumerate_reachable(
    domain: &Domain,
    universe: &Universe,
    init: &PlanningState,
    cap: usize,
) -> Result<LabeledGraph, StripsError> {
    let mut index: HashMap<PlanningState, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    index.insert(init.clone(), 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        for (l, schema) in domain.schemas.iter().enumerate() {
            let state = states[s].clone();
            for b in applicable_bindings(schema, universe, &state) {
                let succ = apply_unchecked(schema, &b, &state);
                let t = match index.get(&succ) {
                    Some(&t) => t,
                    None => {
                        let t = states.len();
                        if t >= cap {
                            return Err(StripsError::CapExceeded(cap));
                        }
                        states.push(succ.clone());
                        index.insert(succ, t);
                        queue.push_back(t);
                        t
                    }
                };
                edges.push((s, l, t));
            }
        }
    }
    Ok(LabeledGraph { states, edges })
}

// ---------------------------------------------------------------------------
// PDDL export / import
// ---------------------------------------------------------------------------

fn pddl_args(args: &[Arg], constants: &[String]) -> String {
    args.iter()
        .map(|a| match a {
            Arg::Var(v) => format!(" ?x{v}"),
            Arg::Const(c) => format!(" {}", constants[*c]),
        })
        .collect()
}

fn pddl_atom(atom: &SchemaAtom, domain: &Domain) -> String {
    let inner = format!(
        "({}{})",
        domain.predicates[atom.predicate].name,
        pddl_args(&atom.args, &domain.constants)
    );
    if atom.positive {
        inner
    } else {
        format!("(not {inner})")
    }
}

/// PDDL 1.2-style domain text; `:typing` omitted, `:negative-preconditions`
/// declared. Variable distinctness is made explicit with `(not (= ...))`
/// under `:equality`, since bindings range over distinct objects.
pub fn export_pddl_domain(domain: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", domain.name);
    let _ = writeln!(
        out,
        "  (:requirements :strips :negative-preconditions :equality)"
    );
    if !domain.constants.is_empty() {
        let _ = writeln!(out, "  (:constants {})", domain.constants.join(" "));
    }
    let _ = writeln!(out, "  (:predicates");
    for p in &domain.predicates {
        let vars: String = (1..=p.arity).map(|i| format!(" ?x{i}")).collect();
        let _ = writeln!(out, "    ({}{})", p.name, vars);
    }
    let _ = writeln!(out, "  )");
    for s in &domain.schemas {
        let params: Vec<String> = (1..=s.arity).map(|i| format!("?x{i}")).collect();
        let _ = writeln!(out, "  (:action {}", s.label.to_lowercase());
        let _ = writeln!(out, "    :parameters ({})", params.join(" "));
        let mut pre: Vec<String> = Vec::new();
        for i in 1..=s.arity {
            for j in i + 1..=s.arity {
                pre.push(format!("(not (= ?x{i} ?x{j}))"));
            }
        }
        pre.extend(s.statics.iter().map(|a| pddl_atom(a, domain)));
        pre.extend(s.preconditions.iter().map(|a| pddl_atom(a, domain)));
        let _ = writeln!(out, "    :precondition (and {})", pre.join(" "));
        let effs: Vec<String> = s.effects.iter().map(|a| pddl_atom(a, domain)).collect();
        let _ = writeln!(out, "    :effect (and {})", effs.join(" "));
        let _ = writeln!(out, "  )");
    }
    let _ = writeln!(out, ")");
    out
}

/// PDDL problem text for an instance (goal literals conjoined; an empty goal
/// emits a trivially-true `(and )`-free goal on the initial state).
pub fn export_pddl_problem(domain: &Domain, instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {}-prob)", instance.name);
    let _ = writeln!(out, "  (:domain {})", domain.name);
    let objects: Vec<&str> = instance
        .universe
        .names
        .iter()
        .skip(instance.universe.n_constants)
        .map(|s| s.as_str())
        .collect();
    let _ = writeln!(out, "  (:objects {})", objects.join(" "));
    let _ = writeln!(out, "  (:init");
    for atom in &instance.init.true_atoms {
        let args: Vec<&str> = atom
            .args
            .iter()
            .map(|&o| instance.universe.name_of(o))
            .collect();
        let _ = writeln!(
            out,
            "    ({}{}{})",
            domain.predicates[atom.predicate].name,
            if args.is_empty() { "" } else { " " },
            args.join(" ")
        );
    }
    let _ = writeln!(out, "  )");
    let lits: Vec<String> = instance
        .goal
        .iter()
        .map(|(atom, pos)| {
            let args: Vec<&str> = atom
                .args
                .iter()
                .map(|&o| instance.universe.name_of(o))
                .collect();
            let inner = format!(
                "({}{}{})",
                domain.predicates[atom.predicate].name,
                if args.is_empty() { "" } else { " " },
                args.join(" ")
            );
            if *pos {
                inner
            } else {
                format!("(not {inner})")
            }
        })
        .collect();
    let _ = writeln!(out, "  (:goal (and {}))", lits.join(" "));
    let _ = writeln!(out, ")");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for line in text.lines() {
        let line = line.split(';').next().unwrap_or("");
        for c in line.chars() {
            match c {
                '(' | ')' => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                    tokens.push(c.to_string());
                }
                c if c.is_whitespace() => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                }
                c => cur.push(c),
            }
        }
        if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    tokens
}

fn parse_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp, StripsError> {
    let err = || StripsError::PddlParse("unexpected end of input".into());
    let tok = tokens.get(*pos).ok_or_else(err)?;
    *pos += 1;
    if tok == "(" {
        let mut items = Vec::new();
        loop {
            match tokens.get(*pos) {
                Some(t) if t == ")" => {
                    *pos += 1;
                    return Ok(Sexp::List(items));
                }
                Some(_) => items.push(parse_sexp(tokens, pos)?),
                None => return Err(err()),
            }
        }
    } else if tok == ")" {
        Err(StripsError::PddlParse("unbalanced `)`".into()))
    } else {
        Ok(Sexp::Atom(tok.clone()))
    }
}

/// Parses a PDDL domain produced by [`export_pddl_domain`] (used as the
/// round-trip reference grammar). Static/precondition split is not encoded
/// in PDDL, so all gating atoms come back as preconditions.
pub fn parse_pddl_domain(text: &str) -> Result<Domain, StripsError> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let top = parse_sexp(&tokens, &mut pos)?;
    let items = match top {
        Sexp::List(items) => items,
        _ => return Err(StripsError::PddlParse("expected (define ...)".into())),
    };
    let mut name = String::new();
    let mut constants: Vec<String> = Vec::new();
    let mut predicates: Vec<Predicate> = Vec::new();
    let mut schemas: Vec<Schema> = Vec::new();
    let atom_name = |s: &Sexp| -> Result<String, StripsError> {
        match s {
            Sexp::Atom(a) => Ok(a.clone()),
            _ => Err(StripsError::PddlParse("expected atom".into())),
        }
    };
    for item in items.iter().skip(1) {
        let list = match item {
            Sexp::List(l) if !l.is_empty() => l,
            _ => continue,
        };
        match list[0] {
            Sexp::Atom(ref head) if head == "domain" => {
                name = atom_name(&list[1])?;
            }
            Sexp::Atom(ref head) if head == ":requirements" => {}
            Sexp::Atom(ref head) if head == ":constants" => {
                for c in &list[1..] {
                    constants.push(atom_name(c)?);
                }
            }
            Sexp::Atom(ref head) if head == ":predicates" => {
                for p in &list[1..] {
                    let decl = match p {
                        Sexp::List(d) if !d.is_empty() => d,
                        _ => return Err(StripsError::PddlParse("bad predicate decl".into())),
                    };
                    predicates.push(Predicate {
                        name: atom_name(&decl[0])?,
                        arity: decl.len() - 1,
                        is_static: false,
                    });
                }
            }
            Sexp::Atom(ref head) if head == ":action" => {
                schemas.push(parse_pddl_action(list, &predicates, &constants)?);
            }
            _ => {}
        }
    }
    let domain = Domain {
        name,
        predicates,
        constants,
        schemas,
    };
    domain.validate()?;
    Ok(domain)
}

fn parse_pddl_action(
    list: &[Sexp],
    predicates: &[Predicate],
    constants: &[String],
) -> Result<Schema, StripsError> {
    let label = match &list[1] {
        Sexp::Atom(a) => a.clone(),
        _ => return Err(StripsError::PddlParse("bad action name".into())),
    };
    let mut arity = 0usize;
    let mut pre = Vec::new();
    let mut eff = Vec::new();
    let mut i = 2;
    while i < list.len() {
        let key = match &list[i] {
            Sexp::Atom(a) => a.clone(),
            _ => return Err(StripsError::PddlParse("expected keyword".into())),
        };
        let value = list
            .get(i + 1)
            .ok_or_else(|| StripsError::PddlParse(format!("missing value for {key}")))?;
        match key.as_str() {
            ":parameters" => {
                arity = match value {
                    Sexp::List(params) => params.len(),
                    _ => return Err(StripsError::PddlParse("bad parameters".into())),
                };
            }
            ":precondition" => pre = parse_pddl_formula(value, predicates, constants)?,
            ":effect" => eff = parse_pddl_formula(value, predicates, constants)?,
            _ => {}
        }
        i += 2;
    }
    Ok(Schema {
        label,
        arity,
        statics: Vec::new(),
        preconditions: pre,
        effects: eff,
    })
}

fn parse_pddl_formula(
    sexp: &Sexp,
    predicates: &[Predicate],
    constants: &[String],
) -> Result<Vec<SchemaAtom>, StripsError> {
    let mut out = Vec::new();
    let list = match sexp {
        Sexp::List(l) => l,
        _ => return Err(StripsError::PddlParse("expected formula".into())),
    };
    let conjuncts: Vec<&Sexp> = match list.first() {
        Some(Sexp::Atom(a)) if a == "and" => list[1..].iter().collect(),
        _ => vec![sexp],
    };
    for c in conjuncts {
        let (inner, positive) = match c {
            Sexp::List(l)
                if l.len() == 2 && matches!(&l[0], Sexp::Atom(a) if a == "not") =>
            {
                (&l[1], false)
            }
            other => (other, true),
        };
        let atom = match inner {
            Sexp::List(l) if !l.is_empty() => l,
            _ => return Err(StripsError::PddlParse("bad literal".into())),
        };
        let head = match &atom[0] {
            Sexp::Atom(a) => a.clone(),
            _ => return Err(StripsError::PddlParse("bad literal head".into())),
        };
        if head == "=" {
            continue; // distinctness guards are implicit in binding semantics
        }
        let predicate = predicates
            .iter()
            .position(|p| p.name == head)
            .ok_or_else(|| StripsError::PddlParse(format!("unknown predicate `{head}`")))?;
        let mut args = Vec::new();
        for a in &atom[1..] {
            let a = match a {
                Sexp::Atom(a) => a,
                _ => return Err(StripsError::PddlParse("bad argument".into())),
            };
            if let Some(v) = a.strip_prefix("?x") {
                args.push(Arg::Var(v.parse::<usize>().map_err(|_| {
                    StripsError::PddlParse(format!("bad variable `{a}`"))
                })?));
            } else {
                let c = constants
                    .iter()
                    .position(|c| c == a)
                    .ok_or_else(|| StripsError::PddlParse(format!("unknown constant `{a}`")))?;
                args.push(Arg::Const(c));
            }
        }
        out.push(SchemaAtom {
            predicate,
            args,
            positive,
        });
    }
    Ok(out)
}
