use std::fmt;

use super::grammar::Grammar;
use super::program::{Head, Node, Program};
use super::value::TypeTag;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    TypeMismatch { expected: TypeTag, found: TypeTag },
    Arity { expected: usize, found: usize },
    UnknownRule(u16),
    /// A hole outside an abstraction body, or one without a declared type.
    UnboundHole(u8),
}

/// One well-typedness failure, located by its child-index path from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: Vec<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::TypeMismatch { expected, found } => {
                write!(f, "at {:?}: expected {expected}, got {found}", self.path)
            }
            ViolationKind::Arity { expected, found } => {
                write!(f, "at {:?}: expected {expected} children, got {found}", self.path)
            }
            ViolationKind::UnknownRule(id) => write!(f, "at {:?}: unknown rule id {id}", self.path),
            ViolationKind::UnboundHole(k) => write!(f, "at {:?}: unbound hole #{k}", self.path),
        }
    }
}

/// Collects every violation; the result type of a node with a bad head is
/// unknown and suppresses the mismatch report at its parent.
fn collect(
    g: &Grammar,
    node: &Node,
    holes: Option<&[TypeTag]>,
    path: &mut Vec<usize>,
    out: &mut Vec<Violation>,
) -> Option<TypeTag> {
    let rule = match node.head {
        Head::Hole(k) => {
            let t = holes.and_then(|h| h.get(k as usize)).copied();
            if t.is_none() {
                out.push(Violation {
                    path: path.clone(),
                    kind: ViolationKind::UnboundHole(k),
                });
            }
            if !node.children.is_empty() {
                out.push(Violation {
                    path: path.clone(),
                    kind: ViolationKind::Arity {
                        expected: 0,
                        found: node.children.len(),
                    },
                });
            }
            return t;
        }
        Head::Rule(id) => match g.get(id) {
            Some(r) => r,
            None => {
                out.push(Violation {
                    path: path.clone(),
                    kind: ViolationKind::UnknownRule(id.0),
                });
                for (i, c) in node.children.iter().enumerate() {
                    path.push(i);
                    collect(g, c, holes, path, out);
                    path.pop();
                }
                return None;
            }
        },
    };
    if rule.arity() != node.children.len() {
        out.push(Violation {
            path: path.clone(),
            kind: ViolationKind::Arity {
                expected: rule.arity(),
                found: node.children.len(),
            },
        });
    }
    for (i, c) in node.children.iter().enumerate() {
        path.push(i);
        let t = collect(g, c, holes, path, out);
        if let (Some(found), Some(&expected)) = (t, rule.param_types.get(i)) {
            if found != expected {
                out.push(Violation {
                    path: path.clone(),
                    kind: ViolationKind::TypeMismatch { expected, found },
                });
            }
        }
        path.pop();
    }
    Some(rule.return_type)
}

/// Every typing violation in `p`; empty iff the program is well-typed.
pub fn type_check(g: &Grammar, p: &Program) -> Vec<Violation> {
    let mut out = Vec::new();
    collect(g, p.root(), None, &mut Vec::new(), &mut out);
    out
}

/// Return type of a well-typed program.
pub fn type_of(g: &Grammar, p: &Program) -> Option<TypeTag> {
    let mut out = Vec::new();
    let t = collect(g, p.root(), None, &mut Vec::new(), &mut out);
    if out.is_empty() {
        t
    } else {
        None
    }
}

/// Type of a pattern whose holes have the given types, or its first violation.
pub fn infer_type(g: &Grammar, node: &Node, hole_types: &[TypeTag]) -> Result<TypeTag, Violation> {
    let mut out = Vec::new();
    let t = collect(g, node, Some(hole_types), &mut Vec::new(), &mut out);
    match (out.into_iter().next(), t) {
        (Some(v), _) => Err(v),
        (None, Some(t)) => Ok(t),
        (None, None) => Err(Violation {
            path: vec![],
            kind: ViolationKind::UnboundHole(0),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;

    #[test]
    fn listing_program_is_clean() {
        let g = Grammar::base();
        let p = parse_program(
            "(if_action (eq-obj? (get $1 1 0) goal-obj) left-action forward-action)",
            &g,
        )
        .unwrap();
        assert!(type_check(&g, &p).is_empty());
        assert_eq!(type_of(&g, &p), Some(TypeTag::Action));
    }

    #[test]
    fn map_passed_as_heading() {
        let g = Grammar::base();
        let r = |n: &str| g.lookup(n).unwrap();
        let p = Program::new(Node::apply(
            r("eq-direction?"),
            vec![Node::leaf(r("$1")), Node::leaf(r("direction-0"))],
        ));
        let v = type_check(&g, &p);
        assert_eq!(
            v,
            vec![Violation {
                path: vec![0],
                kind: ViolationKind::TypeMismatch {
                    expected: TypeTag::AgentDirection,
                    found: TypeTag::Map
                }
            }]
        );
        assert_eq!(type_of(&g, &p), None);
    }

    #[test]
    fn arity_and_holes_are_reported() {
        let g = Grammar::base();
        let r = |n: &str| g.lookup(n).unwrap();
        let p = Program::new(Node::apply(r("and"), vec![Node::hole(0)]));
        let v = type_check(&g, &p);
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|v| matches!(v.kind, ViolationKind::Arity { expected: 2, found: 1 })));
        assert!(v.iter().any(|v| v.kind == ViolationKind::UnboundHole(0)));
        assert_eq!(infer_type(&g, &Node::apply(r("not"), vec![Node::hole(0)]), &[TypeTag::Bool]), Ok(TypeTag::Bool));
    }
}
