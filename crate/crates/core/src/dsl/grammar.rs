use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::check::infer_type;
use super::program::{Head, Node};
use super::value::TypeTag;
use super::DslError;
use crate::types::{Action, Cell, Direction};

/// Largest number of holes an abstraction may take.
pub const MAX_ARITY: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleId(pub u16);

impl RuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Builtin,
    Terminal,
    Parameter,
    Abstraction,
}

/// Semantics attached to a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Action(Action),
    Int(u8),
    /// `$0`: the heading the agent is facing.
    AgentDirection,
    /// `$1`: the egocentric grid.
    Map,
    Direction(Direction),
    Object(Cell),
    If(TypeTag),
    EqDirection,
    EqObj,
    Get,
    GetGameObj,
    Not,
    And,
    Or,
    /// Call of the abstraction with this index in [`Grammar::abstractions`].
    Call(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductionRule {
    pub name: String,
    pub param_types: Vec<TypeTag>,
    pub return_type: TypeTag,
    pub kind: RuleKind,
    pub op: Op,
}

impl ProductionRule {
    pub fn arity(&self) -> usize {
        self.param_types.len()
    }
}

/// A mined program fragment with numbered holes, callable as `fn_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abstraction {
    pub name: String,
    pub body: Node,
    pub hole_types: Vec<TypeTag>,
    pub return_type: TypeTag,
}

impl Abstraction {
    pub fn arity(&self) -> usize {
        self.hole_types.len()
    }

    pub fn concrete_size(&self) -> usize {
        self.body.concrete_size()
    }
}

/// Typed production rules with lookup tables for sampling.
///
/// Rule ids are stable: registering an abstraction only appends, so every
/// program valid under a grammar stays valid under its extensions.
#[derive(Clone, Debug)]
pub struct Grammar {
    rules: Vec<ProductionRule>,
    by_name: HashMap<String, RuleId>,
    by_type: Vec<Vec<RuleId>>,
    /// Minimal depth of a complete tree rooted at each rule.
    rule_depth: Vec<Option<usize>>,
    type_depth: Vec<Option<usize>>,
    /// `eligible[d - 1][type]`: rules of `type` completable within depth `d`.
    eligible: Vec<Vec<Vec<RuleId>>>,
    abstractions: Vec<Abstraction>,
    base_len: usize,
}

impl Grammar {
    /// The starting inventory: actions, integers 0..=5, the two parameters,
    /// directions, objects, one `if` per value type, comparisons, `get`,
    /// `get-game-obj` and the boolean connectives.
    pub fn base() -> Grammar {
        use TypeTag as T;
        let mut rules = Vec::new();
        let mut push = |name: String, params: Vec<TypeTag>, ret, kind, op| {
            rules.push(ProductionRule {
                name,
                param_types: params,
                return_type: ret,
                kind,
                op,
            })
        };
        for a in Action::ALL {
            push(a.rule_name().into(), vec![], T::Action, RuleKind::Terminal, Op::Action(a));
        }
        for i in 0..=5u8 {
            push(i.to_string(), vec![], T::Int, RuleKind::Terminal, Op::Int(i));
        }
        push("$0".into(), vec![], T::AgentDirection, RuleKind::Parameter, Op::AgentDirection);
        push("$1".into(), vec![], T::Map, RuleKind::Parameter, Op::Map);
        for d in Direction::ALL {
            push(
                format!("direction-{}", d.index()),
                vec![],
                T::Direction,
                RuleKind::Terminal,
                Op::Direction(d),
            );
        }
        for c in Cell::ALL {
            push(c.rule_name().into(), vec![], T::Object, RuleKind::Terminal, Op::Object(c));
        }
        for t in [T::Action, T::Object, T::MapObject, T::Direction, T::Int, T::Bool] {
            push(format!("if_{t}"), vec![T::Bool, t, t], t, RuleKind::Builtin, Op::If(t));
        }
        push(
            "eq-direction?".into(),
            vec![T::AgentDirection, T::Direction],
            T::Bool,
            RuleKind::Builtin,
            Op::EqDirection,
        );
        push("eq-obj?".into(), vec![T::MapObject, T::Object], T::Bool, RuleKind::Builtin, Op::EqObj);
        push("get".into(), vec![T::Map, T::Int, T::Int], T::MapObject, RuleKind::Builtin, Op::Get);
        push(
            "get-game-obj".into(),
            vec![T::MapObject],
            T::Object,
            RuleKind::Builtin,
            Op::GetGameObj,
        );
        push("not".into(), vec![T::Bool], T::Bool, RuleKind::Builtin, Op::Not);
        push("and".into(), vec![T::Bool, T::Bool], T::Bool, RuleKind::Builtin, Op::And);
        push("or".into(), vec![T::Bool, T::Bool], T::Bool, RuleKind::Builtin, Op::Or);

        let base_len = rules.len();
        let mut g = Grammar {
            rules,
            by_name: HashMap::new(),
            by_type: Vec::new(),
            rule_depth: Vec::new(),
            type_depth: Vec::new(),
            eligible: Vec::new(),
            abstractions: Vec::new(),
            base_len,
        };
        g.reindex();
        g
    }

    fn reindex(&mut self) {
        self.by_name = self
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), RuleId(i as u16)))
            .collect();
        self.by_type = vec![Vec::new(); TypeTag::COUNT];
        for (i, r) in self.rules.iter().enumerate() {
            self.by_type[r.return_type.index()].push(RuleId(i as u16));
        }

        // Least fixpoint of the minimal completion depth.
        let mut type_depth: Vec<Option<usize>> = vec![None; TypeTag::COUNT];
        let mut rule_depth: Vec<Option<usize>> = vec![None; self.rules.len()];
        loop {
            let mut changed = false;
            for (i, r) in self.rules.iter().enumerate() {
                let d = r
                    .param_types
                    .iter()
                    .map(|t| type_depth[t.index()])
                    .try_fold(0usize, |acc, d| d.map(|d| acc.max(d)))
                    .map(|m| m + 1);
                if d.is_some() && (rule_depth[i].is_none() || d < rule_depth[i]) {
                    rule_depth[i] = d;
                    changed = true;
                }
                let t = r.return_type.index();
                if let Some(d) = d {
                    if type_depth[t].is_none_or(|cur| d < cur) {
                        type_depth[t] = Some(d);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let max_depth = rule_depth.iter().flatten().copied().max().unwrap_or(1);
        self.eligible = (1..=max_depth)
            .map(|d| {
                self.by_type
                    .iter()
                    .map(|ids| {
                        ids.iter()
                            .copied()
                            .filter(|id| rule_depth[id.index()].is_some_and(|rd| rd <= d))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        self.rule_depth = rule_depth;
        self.type_depth = type_depth;
    }

    pub fn rules(&self) -> &[ProductionRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Panics on an id from a different grammar lineage.
    pub fn rule(&self, id: RuleId) -> &ProductionRule {
        &self.rules[id.index()]
    }

    pub fn get(&self, id: RuleId) -> Option<&ProductionRule> {
        self.rules.get(id.index())
    }

    pub fn lookup(&self, name: &str) -> Option<RuleId> {
        self.by_name.get(name).copied()
    }

    /// All rules returning `t`, in registration order.
    pub fn rules_of(&self, t: TypeTag) -> &[RuleId] {
        &self.by_type[t.index()]
    }

    /// Rules returning `t` that can be completed within `depth` levels.
    /// With `depth == 1` these are exactly the terminals of `t`.
    pub fn eligible(&self, t: TypeTag, depth: usize) -> &[RuleId] {
        if depth == 0 {
            return &[];
        }
        let d = depth.min(self.eligible.len());
        &self.eligible[d - 1][t.index()]
    }

    /// Depth of the shallowest complete tree of type `t`, if any exists.
    pub fn min_depth(&self, t: TypeTag) -> Option<usize> {
        self.type_depth[t.index()]
    }

    pub fn rule_min_depth(&self, id: RuleId) -> Option<usize> {
        self.rule_depth[id.index()]
    }

    pub fn is_base(&self, id: RuleId) -> bool {
        id.index() < self.base_len
    }

    pub fn abstractions(&self) -> &[Abstraction] {
        &self.abstractions
    }

    pub fn abstraction(&self, idx: usize) -> &Abstraction {
        &self.abstractions[idx]
    }

    /// Abstraction behind `id`, if `id` is a call rule.
    pub fn abstraction_of(&self, id: RuleId) -> Option<&Abstraction> {
        match self.rule(id).op {
            Op::Call(i) => Some(&self.abstractions[i]),
            _ => None,
        }
    }

    /// Name the next registered abstraction should get.
    pub fn next_abstraction_name(&self) -> String {
        format!("fn_{}", self.abstractions.len())
    }

    /// Adds `abs` as a new rule `name : holeTypes -> returnType`.
    pub fn register_abstraction(&mut self, abs: Abstraction) -> Result<RuleId, DslError> {
        let invalid = |reason: String| DslError::InvalidAbstraction {
            name: abs.name.clone(),
            reason,
        };
        if self.by_name.contains_key(&abs.name) {
            return Err(DslError::DuplicateName(abs.name.clone()));
        }
        if abs.arity() > MAX_ARITY {
            return Err(invalid(format!("{} holes exceeds the limit of {MAX_ARITY}", abs.arity())));
        }
        if matches!(abs.body.head, Head::Hole(_)) {
            return Err(invalid("body is a bare hole".into()));
        }
        let mut seen = vec![false; abs.arity()];
        let mut bad_hole = None;
        abs.body.walk(&mut |_, n| {
            if let Head::Hole(k) = n.head {
                match seen.get_mut(k as usize) {
                    Some(s) => *s = true,
                    None => bad_hole = Some(k),
                }
            }
        });
        if let Some(k) = bad_hole {
            return Err(invalid(format!("hole #{k} has no declared type")));
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(invalid(format!("hole #{k} never occurs in the body")));
        }
        let t = infer_type(self, &abs.body, &abs.hole_types)
            .map_err(|v| invalid(format!("ill-typed body: {v}")))?;
        if t != abs.return_type {
            return Err(invalid(format!("body has type {t}, declared {}", abs.return_type)));
        }
        let id = RuleId(self.rules.len() as u16);
        self.rules.push(ProductionRule {
            name: abs.name.clone(),
            param_types: abs.hole_types.clone(),
            return_type: abs.return_type,
            kind: RuleKind::Abstraction,
            op: Op::Call(self.abstractions.len()),
        });
        self.abstractions.push(abs);
        self.reindex();
        Ok(id)
    }

    /// One line per rule: `name : p1 -> p2 -> ret [kind]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let mut sig: Vec<&str> = r.param_types.iter().map(|t| t.name()).collect();
            sig.push(r.return_type.name());
            let kind = match r.kind {
                RuleKind::Builtin => "builtin",
                RuleKind::Terminal => "terminal",
                RuleKind::Parameter => "parameter",
                RuleKind::Abstraction => "abstraction",
            };
            let _ = writeln!(out, "{} : {} [{kind}]", r.name, sig.join(" -> "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_inventory() {
        let g = Grammar::base();
        assert_eq!(g.len(), 31);
        assert_eq!(g.rules_of(TypeTag::Action).len(), 4);
        assert_eq!(g.rules_of(TypeTag::Int).len(), 7);
        assert_eq!(g.rules_of(TypeTag::Bool).len(), 6);
        for t in ["action", "object", "mapObject", "direction", "int", "bool"] {
            let r = g.rule(g.lookup(&format!("if_{t}")).unwrap());
            assert_eq!(r.arity(), 3);
            assert_eq!(r.param_types[0], TypeTag::Bool);
        }
        assert!(g.lookup("if").is_none());
        let eq = g.rule(g.lookup("eq-direction?").unwrap());
        assert_eq!(eq.param_types, vec![TypeTag::AgentDirection, TypeTag::Direction]);
        let eq = g.rule(g.lookup("eq-obj?").unwrap());
        assert_eq!(eq.param_types, vec![TypeTag::MapObject, TypeTag::Object]);
        for r in g.rules() {
            if r.kind == RuleKind::Terminal || r.kind == RuleKind::Parameter {
                assert!(r.param_types.is_empty());
            }
        }
    }

    #[test]
    fn min_depths() {
        let g = Grammar::base();
        assert_eq!(g.min_depth(TypeTag::Action), Some(1));
        assert_eq!(g.min_depth(TypeTag::MapObject), Some(2));
        // eq-direction? over two terminals
        assert_eq!(g.min_depth(TypeTag::Bool), Some(2));
        assert_eq!(g.rule_min_depth(g.lookup("eq-obj?").unwrap()), Some(3));
        assert!(g.eligible(TypeTag::Bool, 1).is_empty());
        assert_eq!(g.eligible(TypeTag::Action, 1).len(), 3);
        assert_eq!(g.eligible(TypeTag::Action, 2).len(), 3);
        assert_eq!(g.eligible(TypeTag::Action, 3).len(), 4);
        assert_eq!(g.eligible(TypeTag::Action, 99).len(), 4);
    }

    #[test]
    fn register_rejects_bad_abstractions() {
        let mut g = Grammar::base();
        let r = |g: &Grammar, n: &str| g.lookup(n).unwrap();
        let body = Node::apply(
            r(&g, "if_action"),
            vec![Node::hole(0), Node::leaf(r(&g, "left-action")), Node::leaf(r(&g, "forward-action"))],
        );
        let good = Abstraction {
            name: "fn_0".into(),
            body: body.clone(),
            hole_types: vec![TypeTag::Bool],
            return_type: TypeTag::Action,
        };
        let id = g.register_abstraction(good.clone()).unwrap();
        assert_eq!(g.rule(id).kind, RuleKind::Abstraction);
        assert_eq!(g.rules_of(TypeTag::Action).len(), 5);
        assert_eq!(g.register_abstraction(good), Err(DslError::DuplicateName("fn_0".into())));

        let wrong_type = Abstraction {
            name: "fn_1".into(),
            body: body.clone(),
            hole_types: vec![TypeTag::Int],
            return_type: TypeTag::Action,
        };
        assert!(matches!(
            g.register_abstraction(wrong_type),
            Err(DslError::InvalidAbstraction { .. })
        ));
        let unused_hole = Abstraction {
            name: "fn_1".into(),
            body,
            hole_types: vec![TypeTag::Bool, TypeTag::Int],
            return_type: TypeTag::Action,
        };
        assert!(g.register_abstraction(unused_hole).is_err());
        assert!(g.dump().contains("fn_0 : bool -> action [abstraction]"));
    }
}
