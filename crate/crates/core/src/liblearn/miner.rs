use std::cmp::Reverse;
use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::dsl::{Abstraction, Grammar, Head, Node, Program, RuleId, RuleKind, TypeTag, MAX_ARITY};

use super::rewrite::{canonical_body, rewrite_corpus};

/// An accepted abstraction with the score it had when it was chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mined {
    pub abstraction: Abstraction,
    pub occurrences: usize,
    pub utility: usize,
}

/// Limits of one mining call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinerLimits {
    /// Bodies must have fewer concrete nodes than this.
    pub size_limit: usize,
    /// Maximum number of abstractions returned.
    pub count_limit: usize,
}

impl Default for MinerLimits {
    fn default() -> Self {
        MinerLimits {
            size_limit: 10,
            count_limit: 5,
        }
    }
}

/// Compression proxy: nodes saved per rewrite times rewrites beyond the first.
pub fn utility(occurrences: usize, concrete_size: usize) -> usize {
    occurrences.saturating_sub(1) * concrete_size.saturating_sub(1)
}

/// Corpus flattened in pre-order, programs back to back.
struct Arena {
    rule: Vec<RuleId>,
    kids: Vec<(u32, u32)>,
    child_list: Vec<u32>,
}

impl Arena {
    fn new(corpus: &[Program]) -> Arena {
        let mut a = Arena {
            rule: Vec::new(),
            kids: Vec::new(),
            child_list: Vec::new(),
        };
        for p in corpus {
            a.push(p.root());
        }
        a
    }

    fn push(&mut self, n: &Node) -> u32 {
        let id = self.rule.len() as u32;
        self.rule.push(n.rule().expect("corpus programs have no holes"));
        self.kids.push((0, 0));
        let ids: Vec<u32> = n.children.iter().map(|c| self.push(c)).collect();
        let start = self.child_list.len() as u32;
        self.child_list.extend(ids);
        self.kids[id as usize] = (start, self.child_list.len() as u32);
        id
    }

    fn children(&self, i: u32) -> &[u32] {
        let (s, e) = self.kids[i as usize];
        &self.child_list[s as usize..e as usize]
    }
}

/// A partial pattern together with the corpus sites it matches.
#[derive(Clone)]
struct State {
    pattern: Node,
    /// Paths of the holes in pre-order.
    holes: Vec<Vec<usize>>,
    hole_types: Vec<TypeTag>,
    /// Holes before this index are final.
    frozen: usize,
    concrete: usize,
    return_type: TypeTag,
    roots: Vec<u32>,
    /// `holes.len()` arena indices per match, row-major.
    binds: Vec<u32>,
}

#[derive(Clone, PartialEq, Eq)]
struct Candidate {
    utility: usize,
    concrete: usize,
    arity: usize,
    text: String,
    body: Node,
    hole_types: Vec<TypeTag>,
    return_type: TypeTag,
    occurrences: usize,
}

impl Candidate {
    /// Higher utility, then larger body, then fewer holes, then text order.
    fn beats(&self, other: &Candidate) -> bool {
        self.rank() < other.rank()
    }

    fn rank(&self) -> (Reverse<usize>, Reverse<usize>, usize, &str) {
        (Reverse(self.utility), Reverse(self.concrete), self.arity, &self.text)
    }
}

struct Search<'a> {
    g: &'a Grammar,
    arena: Arena,
    limits: MinerLimits,
    known: HashSet<String>,
    best: Option<Candidate>,
}

impl Search<'_> {
    fn best_utility(&self) -> usize {
        self.best.as_ref().map_or(0, |b| b.utility)
    }

    fn run(&mut self) {
        let mut groups: BTreeMap<RuleId, Vec<u32>> = BTreeMap::new();
        for i in 0..self.arena.rule.len() as u32 {
            let r = self.arena.rule[i as usize];
            if self.g.rule(r).kind != RuleKind::Parameter && !self.arena.children(i).is_empty() {
                groups.entry(r).or_default().push(i);
            }
        }
        for (r, roots) in sorted_groups(groups) {
            let rule = self.g.rule(r);
            let arity = rule.arity();
            let mut binds = Vec::with_capacity(roots.len() * arity);
            for &root in &roots {
                binds.extend_from_slice(self.arena.children(root));
            }
            let state = State {
                pattern: Node::apply(r, (0..arity).map(|_| Node::hole(0)).collect()),
                holes: (0..arity).map(|i| vec![i]).collect(),
                hole_types: rule.param_types.clone(),
                frozen: 0,
                concrete: 1,
                return_type: rule.return_type,
                roots,
                binds,
            };
            self.expand(state);
        }
    }

    fn expand(&mut self, s: State) {
        let raw = s.roots.len();
        if raw < 2 {
            return;
        }
        let m = s.holes.len();
        let max_concrete = if s.frozen == m { s.concrete } else { self.limits.size_limit - 1 };
        if utility(raw, max_concrete) < self.best_utility() {
            return;
        }
        let open = m - s.frozen;
        let budget = self.limits.size_limit - 1 - s.concrete;
        if s.frozen + open.saturating_sub(budget) > MAX_ARITY {
            return;
        }
        if s.frozen == m {
            self.consider(&s);
            return;
        }
        let j = s.frozen;
        if budget > 0 {
            let mut groups: BTreeMap<RuleId, Vec<usize>> = BTreeMap::new();
            for k in 0..raw {
                let node = s.binds[k * m + j];
                let r = self.arena.rule[node as usize];
                if self.g.rule(r).kind != RuleKind::Parameter {
                    groups.entry(r).or_default().push(k);
                }
            }
            for (r, idxs) in sorted_groups(groups) {
                if idxs.len() < 2 {
                    continue;
                }
                self.expand(self.refine(&s, j, r, &idxs));
            }
        }
        let mut frozen = s;
        frozen.frozen += 1;
        self.expand(frozen);
    }

    fn refine(&self, s: &State, j: usize, r: RuleId, idxs: &[usize]) -> State {
        let m = s.holes.len();
        let rule = self.g.rule(r);
        let a = rule.arity();
        let mut pattern = s.pattern.clone();
        *pattern.at_mut(&s.holes[j]).expect("hole path") =
            Node::apply(r, (0..a).map(|_| Node::hole(0)).collect());
        let mut holes = s.holes[..j].to_vec();
        holes.extend((0..a).map(|i| {
            let mut p = s.holes[j].clone();
            p.push(i);
            p
        }));
        holes.extend_from_slice(&s.holes[j + 1..]);
        let mut hole_types = s.hole_types[..j].to_vec();
        hole_types.extend_from_slice(&rule.param_types);
        hole_types.extend_from_slice(&s.hole_types[j + 1..]);
        let nm = m - 1 + a;
        let mut roots = Vec::with_capacity(idxs.len());
        let mut binds = Vec::with_capacity(idxs.len() * nm);
        for &k in idxs {
            roots.push(s.roots[k]);
            let row = &s.binds[k * m..(k + 1) * m];
            binds.extend_from_slice(&row[..j]);
            binds.extend_from_slice(self.arena.children(row[j]));
            binds.extend_from_slice(&row[j + 1..]);
        }
        State {
            pattern,
            holes,
            hole_types,
            frozen: s.frozen,
            concrete: s.concrete + 1,
            return_type: s.return_type,
            roots,
            binds,
        }
    }

    fn consider(&mut self, s: &State) {
        if s.concrete < 2 || s.holes.len() > MAX_ARITY {
            return;
        }
        let occurrences = self.non_overlapping(s);
        let u = utility(occurrences, s.concrete);
        if occurrences < 2 || u < self.best_utility() {
            return;
        }
        let mut body = s.pattern.clone();
        for (k, path) in s.holes.iter().enumerate() {
            *body.at_mut(path).expect("hole path") = Node::hole(k as u8);
        }
        let text = canonical_body(&body, self.g);
        if self.known.contains(&text) {
            return;
        }
        let c = Candidate {
            utility: u,
            concrete: s.concrete,
            arity: s.holes.len(),
            text,
            body,
            hole_types: s.hole_types.clone(),
            return_type: s.return_type,
            occurrences,
        };
        if self.best.as_ref().is_none_or(|b| c.beats(b)) {
            self.best = Some(c);
        }
    }

    /// Greedy pre-order count: a match is skipped when its root lies inside
    /// the concrete part of an already accepted match.
    fn non_overlapping(&self, s: &State) -> usize {
        let mut covered: HashSet<u32> = HashSet::new();
        let mut count = 0;
        for &root in &s.roots {
            if covered.contains(&root) {
                continue;
            }
            count += 1;
            self.cover(&s.pattern, root, &mut covered);
        }
        count
    }

    fn cover(&self, pat: &Node, at: u32, covered: &mut HashSet<u32>) {
        if let Head::Rule(_) = pat.head {
            covered.insert(at);
            for (p, &c) in pat.children.iter().zip(self.arena.children(at)) {
                self.cover(p, c, covered);
            }
        }
    }
}

/// Largest groups first, ties by rule id.
fn sorted_groups<T>(groups: BTreeMap<RuleId, Vec<T>>) -> Vec<(RuleId, Vec<T>)> {
    let mut v: Vec<_> = groups.into_iter().collect();
    v.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
    v
}

/// Best single abstraction for `corpus`, skipping bodies alpha-equivalent to
/// one already in `g`.
fn mine_one(corpus: &[Program], g: &Grammar, limits: MinerLimits) -> Option<Candidate> {
    let known = g
        .abstractions()
        .iter()
        .map(|a| canonical_body(&a.body, g))
        .collect();
    let mut search = Search {
        g,
        arena: Arena::new(corpus),
        limits,
        known,
        best: None,
    };
    search.run();
    search.best
}

/// Mines up to `count_limit` abstractions greedily: after each accepted one
/// the corpus is rewritten with it before the next search, so later bodies
/// may call earlier ones. Names continue the numbering of `g`; registering
/// the results into `g` in order reproduces the rule ids used in later bodies.
pub fn mine_abstractions(corpus: &[Program], g: &Grammar, limits: MinerLimits) -> Vec<Mined> {
    assert!(limits.size_limit >= 3, "size limit must allow two concrete nodes");
    let mut work = g.clone();
    let mut corpus = corpus.to_vec();
    let mut out = Vec::new();
    while out.len() < limits.count_limit {
        let Some(c) = mine_one(&corpus, &work, limits) else {
            break;
        };
        let abstraction = Abstraction {
            name: work.next_abstraction_name(),
            body: c.body,
            hole_types: c.hole_types,
            return_type: c.return_type,
        };
        let id = work
            .register_abstraction(abstraction.clone())
            .expect("mined bodies satisfy abstraction invariants");
        corpus = rewrite_corpus(&corpus, &work, id);
        out.push(Mined {
            abstraction,
            occurrences: c.occurrences,
            utility: c.utility,
        });
    }
    out
}

/// Outcome of extending a grammar from a corpus.
#[derive(Clone, Debug)]
pub struct LibraryRound {
    pub added: Vec<RuleId>,
    pub mined: Vec<Mined>,
    pub corpus_before: Vec<Program>,
    pub corpus_after: Vec<Program>,
}

/// Mines abstractions from `corpus`, registers them in `g` and rewrites the
/// corpus with them.
pub fn learn_library(g: &mut Grammar, corpus: &[Program], limits: MinerLimits) -> LibraryRound {
    let mined = mine_abstractions(corpus, g, limits);
    let mut added = Vec::with_capacity(mined.len());
    let mut after = corpus.to_vec();
    for m in &mined {
        let id = g
            .register_abstraction(m.abstraction.clone())
            .expect("mined against a clone of this grammar");
        after = rewrite_corpus(&after, g, id);
        added.push(id);
    }
    LibraryRound {
        added,
        mined,
        corpus_before: corpus.to_vec(),
        corpus_after: after,
    }
}
