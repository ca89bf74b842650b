use rand::seq::SliceRandom;
use rand::Rng;

use super::grammar::Grammar;
use super::program::{Node, Program};
use super::value::TypeTag;
use super::DslError;

/// Samples a tree of type `ret` no deeper than `max_depth`.
///
/// At every expansion the rule is drawn uniformly from the rules of the
/// needed type that can still be completed in the remaining depth; with one
/// level left that is exactly the terminals.
pub fn sample_node<R: Rng + ?Sized>(
    grammar: &Grammar,
    ret: TypeTag,
    max_depth: usize,
    rng: &mut R,
) -> Result<Node, DslError> {
    match grammar.min_depth(ret) {
        Some(d) if d <= max_depth => Ok(expand(grammar, ret, max_depth, rng)),
        _ => Err(DslError::UnsatisfiableType(ret, max_depth)),
    }
}

fn expand<R: Rng + ?Sized>(g: &Grammar, t: TypeTag, depth: usize, rng: &mut R) -> Node {
    let id = *g
        .eligible(t, depth)
        .choose(rng)
        .expect("depth budget checked against min_depth");
    let rule = g.rule(id);
    let children = rule
        .param_types
        .iter()
        .map(|&p| expand(g, p, depth - 1, rng))
        .collect();
    Node::apply(id, children)
}

pub fn sample_program<R: Rng + ?Sized>(
    grammar: &Grammar,
    ret: TypeTag,
    max_depth: usize,
    rng: &mut R,
) -> Result<Program, DslError> {
    sample_node(grammar, ret, max_depth, rng).map(Program::new)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    use super::*;
    use crate::dsl::{type_check, type_of};

    fn chi_square_p(counts: &[usize]) -> f64 {
        let n: usize = counts.iter().sum();
        let expected = n as f64 / counts.len() as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
        1.0 - dist.cdf(stat)
    }

    #[test]
    fn depth_one_actions_are_uniform() {
        let g = Grammar::base();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts: HashMap<String, usize> = HashMap::new();
        for _ in 0..10_000 {
            let p = sample_program(&g, TypeTag::Action, 1, &mut rng).unwrap();
            *counts.entry(p.to_sexpr(&g)).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        let c: Vec<usize> = counts.values().copied().collect();
        assert!(chi_square_p(&c) > 0.01, "{counts:?}");
    }

    #[test]
    fn root_rule_choice_is_uniform_at_depth_six() {
        let g = Grammar::base();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = vec![0usize; g.len()];
        for _ in 0..10_000 {
            let n = sample_node(&g, TypeTag::Bool, 6, &mut rng).unwrap();
            counts[n.rule().unwrap().index()] += 1;
        }
        let bool_counts: Vec<usize> = g.rules_of(TypeTag::Bool).iter().map(|r| counts[r.index()]).collect();
        assert_eq!(bool_counts.iter().sum::<usize>(), 10_000);
        assert!(chi_square_p(&bool_counts) > 0.01, "{bool_counts:?}");
    }

    #[test]
    fn bool_at_depth_one_is_unsatisfiable() {
        let g = Grammar::base();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            sample_program(&g, TypeTag::Bool, 1, &mut rng),
            Err(DslError::UnsatisfiableType(TypeTag::Bool, 1))
        );
        assert!(sample_program(&g, TypeTag::Bool, 2, &mut rng).is_ok());
    }

    #[test]
    fn samples_are_well_typed_and_depth_bounded() {
        let g = Grammar::base();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..10_000 {
            let t = TypeTag::ALL[i % TypeTag::COUNT];
            let p = sample_program(&g, t, 6, &mut rng).unwrap();
            assert!(type_check(&g, &p).is_empty());
            assert_eq!(type_of(&g, &p), Some(t));
            assert!(p.depth() <= 6);
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let g = Grammar::base();
        let a = sample_program(&g, TypeTag::Action, 6, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = sample_program(&g, TypeTag::Action, 6, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }
}
