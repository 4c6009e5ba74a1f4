//! The O2D language: signatures, ground atoms, states, parsing and
//! serialization, and base-predicate evaluation.
//!
//! An O2D state is a complete scene description: a finite set of ground atoms
//! over unary type predicates and the five fixed binary relations. Atoms not
//! present are false (closed world). Shape constants (`rectangle`, `circle`,
//! ...) are signature constants, not objects: they appear only as atom
//! arguments and never enter the object set.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The fixed binary relations of the O2D language.
pub const BINARY_PREDICATES: [&str; 5] = ["left", "below", "overlap", "smaller", "shape"];

#[derive(Debug, Error)]
pub enum O2dError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown predicate `{name}`")]
    UnknownPredicate { line: usize, name: String },
    #[error("line {line}: predicate `{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        line: usize,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("predicate `{0}` is not in the signature")]
    NoSuchPredicate(String),
    #[error("invalid signature: {0}")]
    BadSignature(String),
}

/// An O2D signature Σ = (C, U, R): shape constants, unary type predicates,
/// and the fixed five binary predicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct O2DSignature {
    pub constants: Vec<String>,
    pub unary: Vec<String>,
    pub binary: Vec<String>,
}

impl O2DSignature {
    /// Builds a signature with the fixed binary relation set, checking that
    /// constants, unary names, and binary names are pairwise disjoint.
    pub fn new(
        constants: Vec<String>,
        unary: Vec<String>,
    ) -> Result<O2DSignature, O2dError> {
        let sig = O2DSignature {
            constants,
            unary,
            binary: BINARY_PREDICATES.iter().map(|s| s.to_string()).collect(),
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<(), O2dError> {
        let fixed: BTreeSet<&str> = BINARY_PREDICATES.iter().copied().collect();
        let got: BTreeSet<&str> = self.binary.iter().map(|s| s.as_str()).collect();
        if got != fixed {
            return Err(O2dError::BadSignature(format!(
                "binary predicates must be exactly {BINARY_PREDICATES:?}, got {got:?}"
            )));
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for name in self
            .constants
            .iter()
            .chain(self.unary.iter())
            .chain(self.binary.iter())
        {
            if !seen.insert(name) {
                return Err(O2dError::BadSignature(format!(
                    "name `{name}` appears in more than one section"
                )));
            }
        }
        Ok(())
    }

    /// Arity of a predicate, or an error if it is not declared.
    pub fn arity(&self, pred: &str) -> Result<usize, O2dError> {
        if self.unary.iter().any(|p| p == pred) {
            Ok(1)
        } else if self.binary.iter().any(|p| p == pred) {
            Ok(2)
        } else {
            Err(O2dError::NoSuchPredicate(pred.to_string()))
        }
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    /// Parses the three-section signature file format:
    /// `constants:`, `unary:`, `binary:`, each a comma-separated name list.
    pub fn parse(text: &str) -> Result<O2DSignature, O2dError> {
        let mut constants = None;
        let mut unary = None;
        let mut binary = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (section, rest) = line.split_once(':').ok_or_else(|| O2dError::Syntax {
                line: i + 1,
                msg: "expected `section: name, name, ...`".into(),
            })?;
            let names: Vec<String> = rest
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            match section.trim() {
                "constants" => constants = Some(names),
                "unary" => unary = Some(names),
                "binary" => binary = Some(names),
                other => {
                    return Err(O2dError::Syntax {
                        line: i + 1,
                        msg: format!("unknown section `{other}`"),
                    })
                }
            }
        }
        let sig = O2DSignature {
            constants: constants.unwrap_or_default(),
            unary: unary.ok_or_else(|| O2dError::BadSignature("missing `unary:` section".into()))?,
            binary: binary
                .ok_or_else(|| O2dError::BadSignature("missing `binary:` section".into()))?,
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn serialize(&self) -> String {
        format!(
            "constants: {}\nunary: {}\nbinary: {}\n",
            self.constants.join(", "),
            self.unary.join(", "),
            self.binary.join(", ")
        )
    }
}

/// A ground atom `pred(a1, ..., ak)` with k = 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> GroundAtom {
        GroundAtom {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

impl std::fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

/// An O2D state: a duplicate-free atom set plus the objects it mentions.
///
/// Objects are exactly the argument names that are not shape constants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct O2DState {
    pub instance_id: String,
    pub state_id: String,
    pub atoms: BTreeSet<GroundAtom>,
    pub objects: BTreeSet<String>,
}

impl O2DState {
    /// Builds a state from atoms, deriving the object set.
    pub fn from_atoms(
        sig: &O2DSignature,
        atoms: impl IntoIterator<Item = GroundAtom>,
    ) -> O2DState {
        let atoms: BTreeSet<GroundAtom> = atoms.into_iter().collect();
        let objects = atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .filter(|arg| !sig.is_constant(arg))
            .cloned()
            .collect();
        O2DState {
            instance_id: String::new(),
            state_id: String::new(),
            atoms,
            objects,
        }
    }

    pub fn with_ids(mut self, instance_id: impl Into<String>, state_id: impl Into<String>) -> Self {
        self.instance_id = instance_id.into();
        self.state_id = state_id.into();
        self
    }
}

/// Parses the O2D state file format: `pred(a1,...,ak).` statements,
/// whitespace-insensitive, `#` line comments.
pub fn parse_state(sig: &O2DSignature, text: &str) -> Result<O2DState, O2dError> {
    let mut atoms = BTreeSet::new();
    let mut buf = String::new();
    let mut start_line = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        for ch in line.chars() {
            if ch == '.' {
                let stmt = buf.trim().to_string();
                buf.clear();
                if stmt.is_empty() {
                    return Err(O2dError::Syntax {
                        line: i + 1,
                        msg: "empty statement before `.`".into(),
                    });
                }
                atoms.insert(parse_atom(sig, &stmt, start_line.max(i) + 1)?);
                start_line = i + 1;
            } else {
                if buf.trim().is_empty() && !ch.is_whitespace() {
                    start_line = i;
                }
                buf.push(ch);
            }
        }
        buf.push(' ');
    }
    if !buf.trim().is_empty() {
        return Err(O2dError::Syntax {
            line: start_line + 1,
            msg: format!("statement not terminated by `.`: `{}`", buf.trim()),
        });
    }
    Ok(O2DState::from_atoms(sig, atoms))
}

fn parse_atom(sig: &O2DSignature, stmt: &str, line: usize) -> Result<GroundAtom, O2dError> {
    let open = stmt.find('(').ok_or_else(|| O2dError::Syntax {
        line,
        msg: format!("expected `pred(args)`, got `{stmt}`"),
    })?;
    if !stmt.ends_with(')') {
        return Err(O2dError::Syntax {
            line,
            msg: format!("missing closing `)` in `{stmt}`"),
        });
    }
    let name = stmt[..open].trim();
    let args: Vec<String> = stmt[open + 1..stmt.len() - 1]
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if name.is_empty() || args.iter().any(|a| a.is_empty()) {
        return Err(O2dError::Syntax {
            line,
            msg: format!("malformed atom `{stmt}`"),
        });
    }
    if !name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(O2dError::Syntax {
            line,
            msg: format!("invalid predicate name `{name}`"),
        });
    }
    let expected = match sig.arity(name) {
        Ok(k) => k,
        Err(_) => {
            return Err(O2dError::UnknownPredicate {
                line,
                name: name.to_string(),
            })
        }
    };
    if args.len() != expected {
        return Err(O2dError::ArityMismatch {
            line,
            name: name.to_string(),
            expected,
            got: args.len(),
        });
    }
    Ok(GroundAtom {
        predicate: name.to_string(),
        args,
    })
}

/// True iff the ground atom is a member of the state (closed world).
pub fn eval_base(
    sig: &O2DSignature,
    state: &O2DState,
    pred: &str,
    args: &[&str],
) -> Result<bool, O2dError> {
    if sig.arity(pred)? != args.len() {
        return Ok(false);
    }
    Ok(state.atoms.contains(&GroundAtom {
        predicate: pred.to_string(),
        args: args.iter().map(|s| s.to_string()).collect(),
    }))
}

/// Serializes a state in canonical order: one atom per line, sorted by
/// (predicate, args). `parse_state(serialize_state(s))` equals `s`.
pub fn serialize_state(state: &O2DState) -> String {
    let mut out = String::new();
    for atom in &state.atoms {
        let _ = writeln!(out, "{atom}.");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks_sig() -> O2DSignature {
        O2DSignature::new(
            vec!["rectangle".into(), "circle".into()],
            vec!["block".into(), "robot".into(), "table".into()],
        )
        .unwrap()
    }

    #[test]
    fn parse_basic_state() {
        let sig = blocks_sig();
        let s = parse_state(&sig, "block(b0). below(t,b0). shape(b0,rectangle).").unwrap();
        assert_eq!(s.atoms.len(), 3);
        let objs: Vec<&str> = s.objects.iter().map(|s| s.as_str()).collect();
        assert_eq!(objs, vec!["b0", "t"]); // rectangle is a shape constant
    }

    #[test]
    fn parse_empty_and_comments() {
        let sig = blocks_sig();
        let s = parse_state(&sig, "").unwrap();
        assert!(s.atoms.is_empty() && s.objects.is_empty());
        let s = parse_state(&sig, "# just a comment\n\n  # another\n").unwrap();
        assert!(s.atoms.is_empty());
    }

    #[test]
    fn parse_multiple_statements_per_line_and_whitespace() {
        let sig = blocks_sig();
        let s = parse_state(&sig, "block(b0). block(b1).\n  below( t , b0 ) .").unwrap();
        assert_eq!(s.atoms.len(), 3);
        assert!(s.objects.contains("b1"));
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let sig = blocks_sig();
        let err = parse_state(&sig, "below(t).").unwrap_err();
        assert!(matches!(err, O2dError::ArityMismatch { .. }), "{err}");
    }

    #[test]
    fn unknown_predicate_is_an_error() {
        let sig = blocks_sig();
        let err = parse_state(&sig, "gadget(x).").unwrap_err();
        assert!(matches!(err, O2dError::UnknownPredicate { .. }), "{err}");
    }

    #[test]
    fn unterminated_statement_is_an_error() {
        let sig = blocks_sig();
        let err = parse_state(&sig, "block(b0)").unwrap_err();
        assert!(matches!(err, O2dError::Syntax { .. }), "{err}");
    }

    #[test]
    fn eval_base_membership() {
        let sig = blocks_sig();
        let s = parse_state(
            &sig,
            "block(b0). robot(r). overlap(b0,r). overlap(r,b0). below(t,b0).",
        )
        .unwrap();
        assert!(eval_base(&sig, &s, "overlap", &["b0", "r"]).unwrap());
        assert!(!eval_base(&sig, &s, "overlap", &["b0", "b0"]).unwrap());
        assert!(!eval_base(&sig, &s, "left", &["t", "b0"]).unwrap());
        assert!(eval_base(&sig, &s, "block", &["b0"]).unwrap());
        assert!(eval_base(&sig, &s, "gadget", &["b0"]).is_err());
    }

    #[test]
    fn serialize_round_trip_and_canonical_order() {
        let sig = blocks_sig();
        let s = parse_state(
            &sig,
            "shape(b0,rectangle). block(b0). below(t,b0). below(b0,b1). block(b1).",
        )
        .unwrap();
        let text = serialize_state(&s);
        let lines: Vec<&str> = text.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted, "atoms must be emitted in sorted order");
        let s2 = parse_state(&sig, &text).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn signature_round_trip() {
        let sig = blocks_sig();
        let text = sig.serialize();
        let sig2 = O2DSignature::parse(&text).unwrap();
        assert_eq!(sig, sig2);
    }

    #[test]
    fn signature_rejects_wrong_binary_set() {
        let text = "constants: rectangle\nunary: block\nbinary: left, below\n";
        assert!(O2DSignature::parse(text).is_err());
    }

    #[test]
    fn signature_rejects_overlapping_sections() {
        assert!(O2DSignature::new(vec!["block".into()], vec!["block".into()]).is_err());
    }

    #[test]
    fn state_equality_is_atom_set_equality() {
        let sig = blocks_sig();
        let a = parse_state(&sig, "block(b0). block(b1).").unwrap();
        let b = parse_state(&sig, "block(b1). block(b0).").unwrap();
        assert_eq!(a, b);
    }
}
