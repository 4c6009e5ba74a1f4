//! The pool P_m of grounded predicates: description-logic expressions over
//! the O2D primitives, with cached denotations over all dataset states.
//!
//! Grammar: concepts are primitives, Top, Bottom, existential restrictions
//! `ER[R,C]`, and intersections `INTER[C,C']`; roles are primitives, inverses
//! `INV[R]`, and compositions `COMP[R,R']`; nullary predicates are subset
//! tests `SUBSET[C,C']`. Complexity is 0 for Top/Bottom, 1 for primitives,
//! and 1 plus the sum of operand complexities otherwise.
//!
//! The pool is built level by level in a canonical order and pruned by
//! denotation: an expression whose denotation equals that of an earlier
//! entry in every dataset state is dropped, and pruned expressions do not
//! serve as operands for later levels. Denotations are compared as raw tuple
//! sets, so an empty extension is a duplicate of Bottom regardless of arity.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

use crate::o2d::{O2DSignature, O2DState, O2dError};

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("complexity bound must be at least 1, got {0}")]
    BadBound(usize),
    #[error("pool needs at least one state")]
    NoStates,
    #[error("cannot parse DL expression `{0}`")]
    ParseExpr(String),
    #[error("ill-typed DL expression: {0}")]
    IllTyped(String),
    #[error(transparent)]
    O2d(#[from] O2dError),
}

/// A description-logic expression over an O2D signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DLExpr {
    /// Primitive unary predicate (concept).
    PrimC(String),
    /// Primitive binary predicate (role).
    PrimR(String),
    Top,
    Bottom,
    /// `ER[R,C]` — objects with an R-successor in C.
    Exists(Box<DLExpr>, Box<DLExpr>),
    /// `INTER[C,C']` — concept intersection.
    Inter(Box<DLExpr>, Box<DLExpr>),
    /// `INV[R]` — role inverse.
    Inverse(Box<DLExpr>),
    /// `COMP[R,R']` — role composition.
    Compose(Box<DLExpr>, Box<DLExpr>),
    /// `SUBSET[C,C']` — nullary: truth of C ⊆ C'.
    Subset(Box<DLExpr>, Box<DLExpr>),
}

impl DLExpr {
    /// 1 for concepts, 2 for roles, 0 for subset predicates.
    pub fn arity(&self) -> usize {
        match self {
            DLExpr::PrimC(_) | DLExpr::Top | DLExpr::Bottom => 1,
            DLExpr::Exists(_, _) | DLExpr::Inter(_, _) => 1,
            DLExpr::PrimR(_) | DLExpr::Inverse(_) | DLExpr::Compose(_, _) => 2,
            DLExpr::Subset(_, _) => 0,
        }
    }

    /// 0 for Top/Bottom, 1 for primitives, 1 + sum of operands otherwise.
    pub fn complexity(&self) -> usize {
        match self {
            DLExpr::Top | DLExpr::Bottom => 0,
            DLExpr::PrimC(_) | DLExpr::PrimR(_) => 1,
            DLExpr::Exists(a, b) | DLExpr::Inter(a, b) => 1 + a.complexity() + b.complexity(),
            DLExpr::Inverse(a) => 1 + a.complexity(),
            DLExpr::Compose(a, b) | DLExpr::Subset(a, b) => 1 + a.complexity() + b.complexity(),
        }
    }

    /// Checks operand arities (roles where roles are expected, etc).
    pub fn validate(&self) -> Result<(), PoolError> {
        let want = |e: &DLExpr, k: usize| -> Result<(), PoolError> {
            e.validate()?;
            if e.arity() != k {
                return Err(PoolError::IllTyped(format!(
                    "`{e}` has arity {}, expected {k}",
                    e.arity()
                )));
            }
            Ok(())
        };
        match self {
            DLExpr::PrimC(_) | DLExpr::PrimR(_) | DLExpr::Top | DLExpr::Bottom => Ok(()),
            DLExpr::Exists(r, c) => {
                want(r, 2)?;
                want(c, 1)
            }
            DLExpr::Inter(a, b) | DLExpr::Subset(a, b) => {
                want(a, 1)?;
                want(b, 1)
            }
            DLExpr::Inverse(r) => want(r, 2),
            DLExpr::Compose(a, b) => {
                want(a, 2)?;
                want(b, 2)
            }
        }
    }

    /// Parses the textual notation: names, `Top`, `Bottom`, `ER[R,C]`,
    /// `INTER[C,C']`, `INV[R]`, `COMP[R,R']`, `SUBSET[C,C']`.
    pub fn parse(text: &str) -> Result<DLExpr, PoolError> {
        let expr = parse_expr(text.trim())?;
        expr.validate()?;
        Ok(expr)
    }
}

fn parse_expr(s: &str) -> Result<DLExpr, PoolError> {
    if let Some(rest) = s.strip_suffix(']') {
        let open = rest
            .find('[')
            .ok_or_else(|| PoolError::ParseExpr(s.to_string()))?;
        let head = &rest[..open];
        let inner = &rest[open + 1..];
        let parts = split_top_level(inner);
        let bin = |parts: &[&str]| -> Result<(DLExpr, DLExpr), PoolError> {
            if parts.len() != 2 {
                return Err(PoolError::ParseExpr(s.to_string()));
            }
            Ok((parse_expr(parts[0])?, parse_expr(parts[1])?))
        };
        return match head {
            "ER" => bin(&parts).map(|(a, b)| DLExpr::Exists(a.into(), b.into())),
            "INTER" => bin(&parts).map(|(a, b)| DLExpr::Inter(a.into(), b.into())),
            "COMP" => bin(&parts).map(|(a, b)| DLExpr::Compose(a.into(), b.into())),
            "SUBSET" => bin(&parts).map(|(a, b)| DLExpr::Subset(a.into(), b.into())),
            "INV" => {
                if parts.len() != 1 {
                    return Err(PoolError::ParseExpr(s.to_string()));
                }
                Ok(DLExpr::Inverse(parse_expr(parts[0])?.into()))
            }
            _ => Err(PoolError::ParseExpr(s.to_string())),
        };
    }
    match s {
        "Top" => Ok(DLExpr::Top),
        "Bottom" => Ok(DLExpr::Bottom),
        name if !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') =>
        {
            // Whether the name is a concept or a role is resolved against the
            // fixed binary-relation set of the O2D language.
            if crate::o2d::BINARY_PREDICATES.contains(&name) {
                Ok(DLExpr::PrimR(name.to_string()))
            } else {
                Ok(DLExpr::PrimC(name.to_string()))
            }
        }
        _ => Err(PoolError::ParseExpr(s.to_string())),
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts
}

impl fmt::Display for DLExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DLExpr::PrimC(n) | DLExpr::PrimR(n) => write!(f, "{n}"),
            DLExpr::Top => write!(f, "Top"),
            DLExpr::Bottom => write!(f, "Bottom"),
            DLExpr::Exists(r, c) => write!(f, "ER[{r},{c}]"),
            DLExpr::Inter(a, b) => write!(f, "INTER[{a},{b}]"),
            DLExpr::Inverse(r) => write!(f, "INV[{r}]"),
            DLExpr::Compose(a, b) => write!(f, "COMP[{a},{b}]"),
            DLExpr::Subset(a, b) => write!(f, "SUBSET[{a},{b}]"),
        }
    }
}

/// An extension of a pool predicate in one state, over elements of type `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extension<T: Ord> {
    Nullary(bool),
    Unary(BTreeSet<T>),
    Binary(BTreeSet<(T, T)>),
}

/// Name-based extension, used when evaluating on states outside the pool.
pub type Denotation = Extension<String>;

/// Id-based extension over a pool instance's universe.
pub type Ext = Extension<u32>;

/// Evaluates a DL expression on a single O2D state by structural recursion.
///
/// The universe is the state's objects plus the signature's shape constants
/// (shape constants participate in role tuples but not in Top).
pub fn denote(sig: &O2DSignature, state: &O2DState, expr: &DLExpr) -> Result<Denotation, PoolError> {
    expr.validate()?;
    Ok(denote_rec(sig, state, expr))
}

fn denote_rec(sig: &O2DSignature, state: &O2DState, expr: &DLExpr) -> Denotation {
    match expr {
        DLExpr::Top => Extension::Unary(state.objects.iter().cloned().collect()),
        DLExpr::Bottom => Extension::Unary(BTreeSet::new()),
        DLExpr::PrimC(p) => Extension::Unary(
            state
                .atoms
                .iter()
                .filter(|a| &a.predicate == p && a.args.len() == 1)
                .map(|a| a.args[0].clone())
                .collect(),
        ),
        DLExpr::PrimR(p) => Extension::Binary(
            state
                .atoms
                .iter()
                .filter(|a| &a.predicate == p && a.args.len() == 2)
                .map(|a| (a.args[0].clone(), a.args[1].clone()))
                .collect(),
        ),
        DLExpr::Exists(r, c) => {
            let r = as_binary(denote_rec(sig, state, r));
            let c = as_unary(denote_rec(sig, state, c));
            Extension::Unary(
                r.iter()
                    .filter(|(_, y)| c.contains(y))
                    .map(|(x, _)| x.clone())
                    .collect(),
            )
        }
        DLExpr::Inter(a, b) => {
            let a = as_unary(denote_rec(sig, state, a));
            let b = as_unary(denote_rec(sig, state, b));
            Extension::Unary(a.intersection(&b).cloned().collect())
        }
        DLExpr::Inverse(r) => {
            let r = as_binary(denote_rec(sig, state, r));
            Extension::Binary(r.into_iter().map(|(x, y)| (y, x)).collect())
        }
        DLExpr::Compose(r, s) => {
            let r = as_binary(denote_rec(sig, state, r));
            let s = as_binary(denote_rec(sig, state, s));
            let mut out = BTreeSet::new();
            for (x, y) in &r {
                for (y2, z) in &s {
                    if y == y2 {
                        out.insert((x.clone(), z.clone()));
                    }
                }
            }
            Extension::Binary(out)
        }
        DLExpr::Subset(a, b) => {
            let a = as_unary(denote_rec(sig, state, a));
            let b = as_unary(denote_rec(sig, state, b));
            Extension::Nullary(a.is_subset(&b))
        }
    }
}

fn as_unary<T: Ord>(e: Extension<T>) -> BTreeSet<T> {
    match e {
        Extension::Unary(s) => s,
        _ => unreachable!("validated concept"),
    }
}

fn as_binary<T: Ord>(e: Extension<T>) -> BTreeSet<(T, T)> {
    match e {
        Extension::Binary(s) => s,
        _ => unreachable!("validated role"),
    }
}

/// One entry of the pool: expression, arity, complexity.
#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub expr: DLExpr,
    pub arity: usize,
    pub complexity: usize,
}

/// Per-instance bookkeeping: the universe is the sorted union of the
/// instance's state objects followed by the signature's shape constants.
#[derive(Debug, Clone)]
pub struct PoolInstance {
    pub name: String,
    pub universe: Vec<String>,
    /// Number of leading universe elements that are objects (the rest are
    /// shape constants).
    pub num_objects: usize,
    pub state_ids: Vec<String>,
}

impl PoolInstance {
    pub fn object_names(&self) -> &[String] {
        &self.universe[..self.num_objects]
    }
}

/// Objects promoted to domain constants, with the static unary pool entry
/// that singles each one out in every instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantSet {
    pub names: Vec<String>,
    /// Per constant, the index of the witness pool entry.
    pub witnesses: Vec<usize>,
}

impl ConstantSet {
    pub fn empty() -> ConstantSet {
        ConstantSet {
            names: Vec::new(),
            witnesses: Vec::new(),
        }
    }
}

/// The complexity-ranked, duplicate-free pool with cached denotations.
pub struct PredicatePool {
    pub signature: O2DSignature,
    pub bound_m: usize,
    pub entries: Vec<PoolEntry>,
    pub instances: Vec<PoolInstance>,
    /// `statics[entry][instance]`: denotation identical across the states of
    /// that instance.
    pub statics: Vec<Vec<bool>>,
    /// `denots[entry][global_state]` where global states enumerate instances
    /// in order, states in order.
    denots: Vec<Vec<Ext>>,
    /// Global state index of (instance, state).
    state_offsets: Vec<usize>,
}

impl PredicatePool {
    /// Builds P_m over all supplied states, instance by instance.
    pub fn build(
        sig: &O2DSignature,
        instances: &[(String, Vec<O2DState>)],
        m: usize,
    ) -> Result<PredicatePool, PoolError> {
        if m < 1 {
            return Err(PoolError::BadBound(m));
        }
        if instances.iter().all(|(_, ss)| ss.is_empty()) {
            return Err(PoolError::NoStates);
        }
        let mut pool_instances = Vec::new();
        let mut state_offsets = Vec::new();
        let mut id_maps: Vec<HashMap<String, u32>> = Vec::new();
        let mut total_states = 0usize;
        for (name, states) in instances {
            let mut objects: BTreeSet<String> = BTreeSet::new();
            for s in states {
                objects.extend(s.objects.iter().cloned());
            }
            let mut universe: Vec<String> = objects.into_iter().collect();
            let num_objects = universe.len();
            universe.extend(sig.constants.iter().cloned());
            let id_map: HashMap<String, u32> = universe
                .iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), i as u32))
                .collect();
            id_maps.push(id_map);
            state_offsets.push(total_states);
            total_states += states.len();
            pool_instances.push(PoolInstance {
                name: name.clone(),
                universe,
                num_objects,
                state_ids: states.iter().map(|s| s.state_id.clone()).collect(),
            });
        }

        // Per global state: primitive extensions and the object set.
        let mut prim_un: Vec<HashMap<&str, BTreeSet<u32>>> = Vec::with_capacity(total_states);
        let mut prim_bin: Vec<HashMap<&str, BTreeSet<(u32, u32)>>> =
            Vec::with_capacity(total_states);
        let mut state_objects: Vec<BTreeSet<u32>> = Vec::with_capacity(total_states);
        for (i, (_, states)) in instances.iter().enumerate() {
            for s in states {
                let ids = &id_maps[i];
                let mut un: HashMap<&str, BTreeSet<u32>> = HashMap::new();
                let mut bin: HashMap<&str, BTreeSet<(u32, u32)>> = HashMap::new();
                for a in &s.atoms {
                    match a.args.len() {
                        1 => {
                            un.entry(a.predicate.as_str())
                                .or_default()
                                .insert(ids[&a.args[0]]);
                        }
                        2 => {
                            bin.entry(a.predicate.as_str())
                                .or_default()
                                .insert((ids[&a.args[0]], ids[&a.args[1]]));
                        }
                        _ => {}
                    }
                }
                prim_un.push(un);
                prim_bin.push(bin);
                state_objects.push(s.objects.iter().map(|o| ids[o]).collect());
            }
        }

        let mut pool = PredicatePool {
            signature: sig.clone(),
            bound_m: m,
            entries: Vec::new(),
            instances: pool_instances,
            statics: Vec::new(),
            denots: Vec::new(),
            state_offsets,
        };
        let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();

        let push = |pool: &mut PredicatePool,
                        seen: &mut HashMap<Vec<u32>, usize>,
                        expr: DLExpr,
                        denots: Vec<Ext>| {
            let blob = blob_of(&denots);
            if seen.contains_key(&blob) {
                return;
            }
            seen.insert(blob, pool.entries.len());
            pool.entries.push(PoolEntry {
                arity: expr.arity(),
                complexity: expr.complexity(),
                expr,
            });
            pool.denots.push(denots);
        };

        // Level 0: Top, Bottom.
        let top: Vec<Ext> = state_objects
            .iter()
            .map(|objs| Extension::Unary(objs.clone()))
            .collect();
        push(&mut pool, &mut seen, DLExpr::Top, top);
        let bottom: Vec<Ext> = (0..total_states)
            .map(|_| Extension::Unary(BTreeSet::new()))
            .collect();
        push(&mut pool, &mut seen, DLExpr::Bottom, bottom);

        // Level 1: primitives, unary then binary, in signature order.
        for p in &sig.unary {
            let d: Vec<Ext> = (0..total_states)
                .map(|s| Extension::Unary(prim_un[s].get(p.as_str()).cloned().unwrap_or_default()))
                .collect();
            push(&mut pool, &mut seen, DLExpr::PrimC(p.clone()), d);
        }
        for p in &sig.binary {
            let d: Vec<Ext> = (0..total_states)
                .map(|s| Extension::Binary(prim_bin[s].get(p.as_str()).cloned().unwrap_or_default()))
                .collect();
            push(&mut pool, &mut seen, DLExpr::PrimR(p.clone()), d);
        }

        // Levels 2..m: derived expressions in canonical kind order, operands
        // drawn from retained entries only.
        for level in 2..=m {
            let snapshot = pool.entries.len();
            let concepts: Vec<usize> = (0..snapshot).filter(|&i| pool.entries[i].arity == 1).collect();
            let roles: Vec<usize> = (0..snapshot).filter(|&i| pool.entries[i].arity == 2).collect();

            // ER[R,C]
            for &r in &roles {
                for &c in &concepts {
                    if 1 + pool.entries[r].complexity + pool.entries[c].complexity != level {
                        continue;
                    }
                    let d: Vec<Ext> = (0..total_states)
                        .map(|s| {
                            let rs = as_bin_ref(&pool.denots[r][s]);
                            let cs = as_un_ref(&pool.denots[c][s]);
                            Extension::Unary(
                                rs.iter().filter(|(_, y)| cs.contains(y)).map(|(x, _)| *x).collect(),
                            )
                        })
                        .collect();
                    let expr = DLExpr::Exists(
                        Box::new(pool.entries[r].expr.clone()),
                        Box::new(pool.entries[c].expr.clone()),
                    );
                    push(&mut pool, &mut seen, expr, d);
                }
            }
            // INTER[C,C'] with index(C) <= index(C')
            for (i, &a) in concepts.iter().enumerate() {
                for &b in &concepts[i..] {
                    if 1 + pool.entries[a].complexity + pool.entries[b].complexity != level {
                        continue;
                    }
                    let d: Vec<Ext> = (0..total_states)
                        .map(|s| {
                            let xs = as_un_ref(&pool.denots[a][s]);
                            let ys = as_un_ref(&pool.denots[b][s]);
                            Extension::Unary(xs.intersection(ys).copied().collect())
                        })
                        .collect();
                    let expr = DLExpr::Inter(
                        Box::new(pool.entries[a].expr.clone()),
                        Box::new(pool.entries[b].expr.clone()),
                    );
                    push(&mut pool, &mut seen, expr, d);
                }
            }
            // INV[R]
            for &r in &roles {
                if 1 + pool.entries[r].complexity != level {
                    continue;
                }
                let d: Vec<Ext> = (0..total_states)
                    .map(|s| {
                        let rs = as_bin_ref(&pool.denots[r][s]);
                        Extension::Binary(rs.iter().map(|&(x, y)| (y, x)).collect())
                    })
                    .collect();
                let expr = DLExpr::Inverse(Box::new(pool.entries[r].expr.clone()));
                push(&mut pool, &mut seen, expr, d);
            }
            // COMP[R,R']
            for &r in &roles {
                for &s2 in &roles {
                    if 1 + pool.entries[r].complexity + pool.entries[s2].complexity != level {
                        continue;
                    }
                    let d: Vec<Ext> = (0..total_states)
                        .map(|st| {
                            let rs = as_bin_ref(&pool.denots[r][st]);
                            let ss = as_bin_ref(&pool.denots[s2][st]);
                            let mut out = BTreeSet::new();
                            for &(x, y) in rs {
                                for &(y2, z) in ss {
                                    if y == y2 {
                                        out.insert((x, z));
                                    }
                                }
                            }
                            Extension::Binary(out)
                        })
                        .collect();
                    let expr = DLExpr::Compose(
                        Box::new(pool.entries[r].expr.clone()),
                        Box::new(pool.entries[s2].expr.clone()),
                    );
                    push(&mut pool, &mut seen, expr, d);
                }
            }
            // SUBSET[C,C']
            for &a in &concepts {
                for &b in &concepts {
                    if 1 + pool.entries[a].complexity + pool.entries[b].complexity != level {
                        continue;
                    }
                    let d: Vec<Ext> = (0..total_states)
                        .map(|s| {
                            let xs = as_un_ref(&pool.denots[a][s]);
                            let ys = as_un_ref(&pool.denots[b][s]);
                            Extension::Nullary(xs.is_subset(ys))
                        })
                        .collect();
                    let expr = DLExpr::Subset(
                        Box::new(pool.entries[a].expr.clone()),
                        Box::new(pool.entries[b].expr.clone()),
                    );
                    push(&mut pool, &mut seen, expr, d);
                }
            }
        }

        // Per-instance static flags.
        let num_states_per_instance: Vec<usize> =
            instances.iter().map(|(_, ss)| ss.len()).collect();
        for e in 0..pool.entries.len() {
            let mut flags = Vec::with_capacity(instances.len());
            for (i, &n) in num_states_per_instance.iter().enumerate() {
                let off = pool.state_offsets[i];
                let all_equal = (1..n).all(|k| pool.denots[e][off + k] == pool.denots[e][off]);
                flags.push(all_equal || n == 0);
            }
            pool.statics.push(flags);
        }
        Ok(pool)
    }

    pub fn num_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn num_states(&self, instance: usize) -> usize {
        self.instances[instance].state_ids.len()
    }

    /// Cached extension of an entry in a state.
    pub fn ext(&self, entry: usize, instance: usize, state: usize) -> &Ext {
        &self.denots[entry][self.state_offsets[instance] + state]
    }

    pub fn is_static(&self, entry: usize, instance: usize) -> bool {
        self.statics[entry][instance]
    }

    /// Static in every instance.
    pub fn is_static_everywhere(&self, entry: usize) -> bool {
        self.statics[entry].iter().all(|&b| b)
    }

    /// Index of the entry whose expression equals `expr`, if retained.
    pub fn entry_index_of(&self, expr: &DLExpr) -> Option<usize> {
        self.entries.iter().position(|e| &e.expr == expr)
    }

    /// Pool dump: one line per entry, `<index> <complexity> <arity> <expr>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{} {} {} {}", i, e.complexity, e.arity, e.expr);
        }
        out
    }

    /// Detects domain constants: an object of every instance singled out by
    /// a static unary entry whose denotation is that singleton in every
    /// instance. The witness is the lowest-ordered qualifying entry.
    pub fn detect_constants(&self) -> ConstantSet {
        let mut found: Vec<(String, usize)> = Vec::new();
        'entries: for (e, entry) in self.entries.iter().enumerate() {
            if entry.arity != 1 || !self.is_static_everywhere(e) {
                continue;
            }
            let mut name: Option<&str> = None;
            for (i, inst) in self.instances.iter().enumerate() {
                if self.num_states(i) == 0 {
                    continue 'entries;
                }
                let ext = as_un_ref(self.ext(e, i, 0));
                if ext.len() != 1 {
                    continue 'entries;
                }
                let id = *ext.iter().next().unwrap() as usize;
                if id >= inst.num_objects {
                    continue 'entries; // a shape constant, not an object
                }
                let n = inst.universe[id].as_str();
                match name {
                    None => name = Some(n),
                    Some(prev) if prev == n => {}
                    Some(_) => continue 'entries,
                }
            }
            if let Some(n) = name {
                if !found.iter().any(|(f, _)| f == n) {
                    found.push((n.to_string(), e));
                }
            }
        }
        found.sort();
        ConstantSet {
            names: found.iter().map(|(n, _)| n.clone()).collect(),
            witnesses: found.iter().map(|(_, w)| *w).collect(),
        }
    }
}

fn as_un_ref(e: &Ext) -> &BTreeSet<u32> {
    match e {
        Extension::Unary(s) => s,
        _ => unreachable!("expected unary extension"),
    }
}

fn as_bin_ref(e: &Ext) -> &BTreeSet<(u32, u32)> {
    match e {
        Extension::Binary(s) => s,
        _ => unreachable!("expected binary extension"),
    }
}

/// Canonical serialization of a denotation vector for duplicate detection.
/// Empty extensions of different arities serialize identically, so they
/// deduplicate against each other (and against Bottom).
fn blob_of(denots: &[Ext]) -> Vec<u32> {
    let mut blob = Vec::new();
    for d in denots {
        match d {
            Extension::Nullary(b) => {
                blob.push(*b as u32);
                blob.push(0);
            }
            Extension::Unary(s) => {
                blob.push(s.len() as u32);
                blob.push(if s.is_empty() { 0 } else { 1 });
                blob.extend(s.iter().copied());
            }
            Extension::Binary(s) => {
                blob.push(s.len() as u32);
                blob.push(if s.is_empty() { 0 } else { 2 });
                for &(x, y) in s {
                    blob.push(x);
                    blob.push(y);
                }
            }
        }
    }
    blob
}
