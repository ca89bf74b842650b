use crate::dsl::{Grammar, Head, Node, Program, RuleId};

/// Binds the holes of `body` against `n`, or `None` when the concrete part
/// differs. A hole used twice must bind equal subtrees.
pub fn match_body<'a>(body: &Node, n: &'a Node, arity: usize) -> Option<Vec<&'a Node>> {
    let mut binds: Vec<Option<&'a Node>> = vec![None; arity];
    go(body, n, &mut binds).then_some(())?;
    binds.into_iter().collect()
}

fn go<'a>(pat: &Node, n: &'a Node, binds: &mut [Option<&'a Node>]) -> bool {
    match pat.head {
        Head::Hole(k) => match binds[k as usize] {
            Some(prev) => prev == n,
            None => {
                binds[k as usize] = Some(n);
                true
            }
        },
        Head::Rule(r) => {
            n.head == Head::Rule(r)
                && pat.children.len() == n.children.len()
                && pat.children.iter().zip(&n.children).all(|(p, c)| go(p, c, binds))
        }
    }
}

/// One non-overlapping occurrence of an abstraction body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub program: usize,
    pub path: Vec<usize>,
    pub args: Vec<Node>,
}

/// Occurrences of abstraction `id` in the corpus, taken greedily in pre-order;
/// a candidate whose root lies inside the concrete part of an accepted one
/// is skipped. These are exactly the sites [`rewrite_program`] replaces.
pub fn find_occurrences(corpus: &[Program], g: &Grammar, id: RuleId) -> Vec<Occurrence> {
    let abs = g.abstraction_of(id).expect("abstraction rule");
    let mut out = Vec::new();
    for (pi, p) in corpus.iter().enumerate() {
        collect(p.root(), &abs.body, abs.arity(), pi, &mut Vec::new(), &mut out);
    }
    out
}

fn collect(n: &Node, body: &Node, arity: usize, pi: usize, path: &mut Vec<usize>, out: &mut Vec<Occurrence>) {
    if let Some(args) = match_body(body, n, arity) {
        // Holes bind whole subtrees; the search resumes inside them.
        let arg_paths = hole_paths(body);
        out.push(Occurrence {
            program: pi,
            path: path.clone(),
            args: args.iter().map(|a| (*a).clone()).collect(),
        });
        for hp in arg_paths {
            let sub = n.at(&hp).expect("hole path exists in match");
            let base = path.len();
            path.extend_from_slice(&hp);
            collect(sub, body, arity, pi, path, out);
            path.truncate(base);
        }
        return;
    }
    for (i, c) in n.children.iter().enumerate() {
        path.push(i);
        collect(c, body, arity, pi, path, out);
        path.pop();
    }
}

/// Path of the first occurrence of each hole, in pre-order.
fn hole_paths(body: &Node) -> Vec<Vec<usize>> {
    let mut seen = Vec::new();
    let mut out = Vec::new();
    body.walk(&mut |p, n| {
        if let Head::Hole(k) = n.head {
            if !seen.contains(&k) {
                seen.push(k);
                out.push(p.to_vec());
            }
        }
    });
    out
}

/// Replaces every greedy top-down occurrence of abstraction `id` by a call.
pub fn rewrite_program(p: &Program, g: &Grammar, id: RuleId) -> Program {
    let abs = g.abstraction_of(id).expect("abstraction rule");
    Program::new(rewrite_node(p.root(), &abs.body, abs.arity(), id))
}

fn rewrite_node(n: &Node, body: &Node, arity: usize, id: RuleId) -> Node {
    if let Some(args) = match_body(body, n, arity) {
        return Node::apply(id, args.into_iter().map(|a| rewrite_node(a, body, arity, id)).collect());
    }
    Node {
        head: n.head,
        children: n.children.iter().map(|c| rewrite_node(c, body, arity, id)).collect(),
    }
}

pub fn rewrite_corpus(corpus: &[Program], g: &Grammar, id: RuleId) -> Vec<Program> {
    corpus.iter().map(|p| rewrite_program(p, g, id)).collect()
}

/// Applies the abstractions `ids` one after another.
pub fn rewrite_with(p: &Program, g: &Grammar, ids: &[RuleId]) -> Program {
    ids.iter().fold(p.clone(), |acc, &id| rewrite_program(&acc, g, id))
}

/// Inlines every abstraction call, recursively, leaving only base rules.
pub fn expand_abstractions(p: &Program, g: &Grammar) -> Program {
    Program::new(expand_node(p.root(), g))
}

pub fn expand_node(n: &Node, g: &Grammar) -> Node {
    let children: Vec<Node> = n.children.iter().map(|c| expand_node(c, g)).collect();
    match n.head {
        Head::Rule(r) => match g.abstraction_of(r) {
            Some(abs) => expand_node(&substitute(&abs.body, &children), g),
            None => Node { head: n.head, children },
        },
        Head::Hole(_) => Node { head: n.head, children },
    }
}

/// Replaces `#k` in `body` by `args[k]`.
pub fn substitute(body: &Node, args: &[Node]) -> Node {
    match body.head {
        Head::Hole(k) => args[k as usize].clone(),
        Head::Rule(_) => Node {
            head: body.head,
            children: body.children.iter().map(|c| substitute(c, args)).collect(),
        },
    }
}

/// Body text with holes renumbered in first-occurrence order, so that
/// alpha-equivalent bodies print identically.
pub fn canonical_body(body: &Node, g: &Grammar) -> String {
    let mut order: Vec<u8> = Vec::new();
    body.walk(&mut |_, n| {
        if let Head::Hole(k) = n.head {
            if !order.contains(&k) {
                order.push(k);
            }
        }
    });
    let renumbered = renumber(body, &order);
    renumbered.display(g).to_string()
}

fn renumber(n: &Node, order: &[u8]) -> Node {
    match n.head {
        Head::Hole(k) => Node::hole(order.iter().position(|&o| o == k).expect("collected") as u8),
        Head::Rule(_) => Node {
            head: n.head,
            children: n.children.iter().map(|c| renumber(c, order)).collect(),
        },
    }
}
