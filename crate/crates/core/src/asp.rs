//! Emits the learning task as an answer-set program: the fixed constraint
//! program (embedded from `asp_program.lp`) plus a fact file describing the
//! dataset, the feature pool, and the marked training states. Solving the
//! emission with an external ASP solver minimizes the same five-level
//! lexicographic objective as [`crate::learner::learn`].
//!
//! Conventions of the fact encoding:
//! - Instances, features, objects, and action labels are quoted string
//!   terms; the top concept is the plain constant `verum`, whose valuation
//!   defines `object/2`.
//! - Nullary features are declared with `f_arity(F,1)` and valuated on the
//!   `(null,)` tuple; the program detects them and assigns arity 0. Their
//!   valuations are emitted for both truth values so detection never
//!   depends on the fill option.
//! - All other valuations are positive facts only; the program's fill
//!   option completes the zeros.
//! - Denotation tuples mentioning shape constants, and reflexive pairs,
//!   are dropped — the same restriction the native solver applies.
//! - States are integer indices per instance; `relevant/2` facts list the
//!   marked states, and a `partial` marker per instance disables the
//!   default rule that would make every node relevant.

use std::fmt::Write as _;

use crate::grounding::Dataset;
use crate::learner::Hyperparams;
use crate::pool::{DLExpr, Extension, PredicatePool};

/// Recommended options when handing the emission to an external solver.
pub const SOLVER_OPTIONS: &str = "-t 6 --sat-prepro=2";

/// The two text artifacts of an emission.
#[derive(Debug, Clone)]
pub struct AspEmission {
    /// The constraint program, headed by the hyperparameter constants.
    pub program: String,
    /// The dataset and pool facts.
    pub facts: String,
}

const PROGRAM_BODY: &str = include_str!("asp_program.lp");

/// Emits the program and facts for a dataset/pool pair.
///
/// The pool must have been built over exactly the dataset's instances, in
/// order, with matching state counts (as for [`crate::learner::learn`]).
pub fn emit_asp(dataset: &Dataset, pool: &PredicatePool, beta: &Hyperparams) -> AspEmission {
    debug_assert!(pool.instances.len() >= dataset.instances.len());
    let mut program = String::new();
    let _ = writeln!(program, "#const num_predicates = {}.", beta.num_predicates);
    let _ = writeln!(program, "#const max_action_arity = {}.", beta.max_arity);
    program.push_str(
        "#const null_arg = (null,).\n\
         #const opt_equal_objects = 0.\n\
         #const opt_allow_negative_precs = 1.\n\
         #const opt_fill_incomplete_valuations = 1.\n\
         #const opt_symmetries = 1.\n\
         #const opt_verbose = 0.\n\n",
    );
    program.push_str(PROGRAM_BODY);

    let mut f = String::new();
    // Instances, nodes, marked (relevant) states, and transitions.
    for (i, di) in dataset.instances.iter().enumerate() {
        let iq = quote(&di.name);
        let _ = writeln!(f, "instance({iq}).");
        let _ = writeln!(f, "partial({iq},marked).");
        for s in 0..di.states.len() {
            let _ = writeln!(f, "node({iq},{s}).");
        }
        for &s in &di.marked {
            let _ = writeln!(f, "relevant({iq},{s}).");
        }
        for (src, label, dst) in &di.edges {
            let _ = writeln!(f, "tlabel({iq},({src},{dst}),{}).", quote(label));
        }
        let _ = i;
    }
    if !dataset.instances.is_empty() {
        f.push_str("filename(marked).\n");
    }
    // Detected domain constants.
    for name in &pool.detect_constants().names {
        let _ = writeln!(f, "constant({}).", quote(name));
    }
    // Features and their raw arities (nullary features are declared with
    // arity 1 and valuated on the null tuple).
    for entry in &pool.entries {
        let name = feature_term(&entry.expr);
        let arity = if entry.arity == 2 { 2 } else { 1 };
        let _ = writeln!(f, "feature({name}). f_arity({name},{arity}).");
    }
    // Valuations.
    for (e, entry) in pool.entries.iter().enumerate() {
        let name = feature_term(&entry.expr);
        for (i, di) in dataset.instances.iter().enumerate() {
            let iq = quote(&di.name);
            let pi = &pool.instances[i];
            if di.states.is_empty() {
                continue;
            }
            if pool.is_static(e, i) {
                let _ = writeln!(f, "f_static({iq},{name}).");
                write_ext(&mut f, &iq, &name, pool.ext(e, i, 0), pi.num_objects, pi, None);
            } else {
                for s in 0..di.states.len() {
                    write_ext(
                        &mut f,
                        &iq,
                        &name,
                        pool.ext(e, i, s),
                        pi.num_objects,
                        pi,
                        Some(s),
                    );
                }
            }
        }
    }
    AspEmission { program, facts: f }
}

/// Writes the positive facts of one extension (and, for nullary features,
/// the explicit value either way). `state` is `None` for static features.
fn write_ext(
    f: &mut String,
    iq: &str,
    name: &str,
    ext: &Extension<u32>,
    num_objects: usize,
    pi: &crate::pool::PoolInstance,
    state: Option<usize>,
) {
    let at = |f: &mut String, tuple: &str, v: u8| {
        let _ = match state {
            Some(s) => writeln!(f, "fval({iq},({name},{tuple}),{s},{v})."),
            None => writeln!(f, "fval({iq},({name},{tuple}),{v})."),
        };
    };
    match ext {
        Extension::Nullary(v) => at(f, "(null,)", u8::from(*v)),
        Extension::Unary(xs) => {
            for &x in xs {
                if (x as usize) < num_objects {
                    at(f, &format!("({},)", quote(&pi.universe[x as usize])), 1);
                }
            }
        }
        Extension::Binary(ps) => {
            for &(x, y) in ps {
                if x != y && (x as usize) < num_objects && (y as usize) < num_objects {
                    let t = format!(
                        "({},{})",
                        quote(&pi.universe[x as usize]),
                        quote(&pi.universe[y as usize])
                    );
                    at(f, &t, 1);
                }
            }
        }
    }
}

/// The ASP term naming a pool feature.
fn feature_term(expr: &DLExpr) -> String {
    match expr {
        DLExpr::Top => "verum".to_string(),
        e => quote(&e.to_string()),
    }
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}
