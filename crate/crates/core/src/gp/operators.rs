use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::dsl::{sample_node, sample_program, DslError, Grammar, Head, Node, Program, TypeTag};

use super::fitness::Individual;

/// Samples `population_size` action programs of depth at most `max_depth`.
pub fn init_population<R: Rng + ?Sized>(
    g: &Grammar,
    population_size: usize,
    max_depth: usize,
    rng: &mut R,
) -> Result<Vec<Program>, DslError> {
    (0..population_size)
        .map(|_| sample_program(g, TypeTag::Action, max_depth, rng))
        .collect()
}

fn node_type(g: &Grammar, n: &Node) -> TypeTag {
    match n.head {
        Head::Rule(r) => g.rule(r).return_type,
        Head::Hole(_) => unreachable!("programs contain no holes"),
    }
}

/// Per-node mutation.
///
/// Nodes are visited in pre-order and each is selected with probability
/// `p_mutation`; a selected node is replaced and its descendants are not
/// visited. The replacement rule is drawn uniformly from the rules of the
/// same return type. Children are kept when the new rule's parameter types
/// equal the old ones position by position, otherwise every parameter gets a
/// fresh subtree of depth at most `max_depth - 1`.
pub fn mutate<R: Rng + ?Sized>(
    p: &Program,
    g: &Grammar,
    p_mutation: f64,
    max_depth: usize,
    rng: &mut R,
) -> Program {
    let mut root = p.root().clone();
    mutate_node(&mut root, g, p_mutation, max_depth, rng);
    Program::new(root)
}

fn mutate_node<R: Rng + ?Sized>(n: &mut Node, g: &Grammar, p: f64, max_depth: usize, rng: &mut R) {
    if rng.gen_bool(p) {
        replace_node(n, g, max_depth, rng);
        return;
    }
    for c in &mut n.children {
        mutate_node(c, g, p, max_depth, rng);
    }
}

fn replace_node<R: Rng + ?Sized>(n: &mut Node, g: &Grammar, max_depth: usize, rng: &mut R) {
    let t = node_type(g, n);
    let old_params = &g.rule(n.rule().expect("rule node")).param_types;
    let new_id = *g
        .eligible(t, max_depth)
        .choose(rng)
        .expect("a rule of this type exists since the node has one");
    let new_rule = g.rule(new_id);
    n.head = Head::Rule(new_id);
    if new_rule.param_types != *old_params {
        n.children = new_rule
            .param_types
            .iter()
            .map(|&pt| {
                sample_node(g, pt, max_depth - 1, rng)
                    .expect("eligible rules have satisfiable parameters")
            })
            .collect();
    }
}

/// One-point typed crossover.
///
/// Every node of `a` is marked with probability `p_crossover` and one marked
/// node is picked uniformly; a node of the same return type is picked
/// uniformly in `b` and the two subtrees are swapped. Without a marked node
/// or a type match both parents are returned unchanged.
pub fn crossover<R: Rng + ?Sized>(
    a: &Program,
    b: &Program,
    g: &Grammar,
    p_crossover: f64,
    rng: &mut R,
) -> (Program, Program) {
    let a_paths = a.root().paths();
    let marked: Vec<&Vec<usize>> = a_paths.iter().filter(|_| rng.gen_bool(p_crossover)).collect();
    let Some(&pa) = marked.choose(rng) else {
        return (a.clone(), b.clone());
    };
    let t = node_type(g, a.root().at(pa).expect("path from walk"));
    let mut b_candidates = Vec::new();
    b.root().walk(&mut |path, n| {
        if node_type(g, n) == t {
            b_candidates.push(path.to_vec());
        }
    });
    let Some(pb) = b_candidates.choose(rng) else {
        return (a.clone(), b.clone());
    };
    let mut ca = a.clone();
    let mut cb = b.clone();
    let sa = ca.root_mut().at_mut(pa).expect("path from walk");
    let sb = cb.root_mut().at_mut(pb).expect("path from walk");
    std::mem::swap(sa, sb);
    (ca, cb)
}

/// Index of the tournament winner among `k` distinct random members.
///
/// Highest fitness wins; ties go to the smaller program and then to a
/// uniform pick among the remaining tied members.
pub fn tournament_select<R: Rng + ?Sized>(pop: &[Individual], k: usize, rng: &mut R) -> usize {
    assert!(k >= 1 && k <= pop.len(), "tournament size {k} outside 1..={}", pop.len());
    let contenders = index::sample(rng, pop.len(), k).into_vec();
    let better = |i: usize, j: usize| {
        let (a, b) = (&pop[i], &pop[j]);
        a.fitness > b.fitness || (a.fitness == b.fitness && a.size < b.size)
    };
    let mut best = vec![contenders[0]];
    for &c in &contenders[1..] {
        if better(c, best[0]) {
            best.clear();
            best.push(c);
        } else if !better(best[0], c) {
            best.push(c);
        }
    }
    if best.len() == 1 {
        best[0]
    } else {
        best[rng.gen_range(0..best.len())]
    }
}
