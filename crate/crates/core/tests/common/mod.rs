//! Test helpers: an independent reference interpreter and random inputs.
#![allow(dead_code)]

use mazegp::dsl::{sample_program, Head, Node};
use mazegp::liblearn::load_library;
use mazegp::{Action, Cell, Direction, Grammar, Observation, Program, TypeTag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LIBRARY: &str = "\
fn_0=(eq-obj? (get #2 #1 #0) #3)
fn_1=(if_action #0 left-action forward-action)
fn_2=(fn_0 #2 #1 #0 (get-game-obj (get #0 2 1)))
fn_3=(eq-obj? (get #0 2 1) wall-obj)
fn_4=(get #0 2 1)
";

pub fn library_grammar() -> Grammar {
    let mut g = Grammar::base();
    load_library(&mut g, LIBRARY).unwrap();
    g
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_program(g: &Grammar, depth: usize, seed: u64) -> Program {
    sample_program(g, TypeTag::Action, depth, &mut rng(seed)).unwrap()
}

pub fn random_observation<R: Rng>(r: &mut R) -> Observation {
    let mut o = Observation::filled(Cell::Empty, Direction::ALL[r.gen_range(0..4)]);
    for y in 0..5 {
        for x in 0..5 {
            o.set(x, y, Cell::ALL[r.gen_range(0..3)]);
        }
    }
    o
}

/// Reference values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum V {
    Action(Action),
    Int(u8),
    Heading(Direction),
    Map,
    Dir(Direction),
    Obj(Cell),
    Bool(bool),
}

/// Straightforward lazy interpreter keyed on rule names. Library calls are
/// inlined by substituting argument subtrees into the body. Records every
/// `get` it executes.
pub struct Oracle<'a> {
    pub g: &'a Grammar,
    pub obs: &'a Observation,
    pub gets: Vec<(u8, u8)>,
}

impl<'a> Oracle<'a> {
    pub fn new(g: &'a Grammar, obs: &'a Observation) -> Self {
        Oracle { g, obs, gets: Vec::new() }
    }

    pub fn run(&mut self, n: &Node) -> V {
        let Head::Rule(r) = n.head else { panic!("hole outside a body") };
        let name = self.g.rule(r).name.as_str();
        if let Some(abs) = self.g.abstraction_of(r) {
            let inlined = inline(&abs.body, &n.children);
            return self.run(&inlined);
        }
        let c = &n.children;
        match name {
            "left-action" => V::Action(Action::Left),
            "right-action" => V::Action(Action::Right),
            "forward-action" => V::Action(Action::Forward),
            "$0" => V::Heading(self.obs.heading),
            "$1" => V::Map,
            "wall-obj" => V::Obj(Cell::Wall),
            "empty-obj" => V::Obj(Cell::Empty),
            "goal-obj" => V::Obj(Cell::Goal),
            "not" => V::Bool(!self.bool(&c[0])),
            "and" => V::Bool(self.bool(&c[0]) && self.bool(&c[1])),
            "or" => V::Bool(self.bool(&c[0]) || self.bool(&c[1])),
            "eq-direction?" => {
                let (V::Heading(h), V::Dir(d)) = (self.run(&c[0]), self.run(&c[1])) else { panic!() };
                V::Bool(h == d)
            }
            "eq-obj?" => {
                let (V::Obj(a), V::Obj(b)) = (self.run(&c[0]), self.run(&c[1])) else { panic!() };
                V::Bool(a == b)
            }
            "get" => {
                assert_eq!(self.run(&c[0]), V::Map);
                let (V::Int(x), V::Int(y)) = (self.run(&c[1]), self.run(&c[2])) else { panic!() };
                let (x, y) = (x.min(4), y.min(4));
                self.gets.push((x, y));
                V::Obj(self.obs.get(x as usize, y as usize))
            }
            "get-game-obj" => self.run(&c[0]),
            s if s.starts_with("if_") => {
                if self.bool(&c[0]) {
                    self.run(&c[1])
                } else {
                    self.run(&c[2])
                }
            }
            s if s.starts_with("direction-") => V::Dir(Direction::from_index(s[10..].parse().unwrap()).unwrap()),
            s => V::Int(s.parse().unwrap_or_else(|_| panic!("unknown rule {s}"))),
        }
    }

    fn bool(&mut self, n: &Node) -> bool {
        match self.run(n) {
            V::Bool(b) => b,
            v => panic!("expected bool, got {v:?}"),
        }
    }
}

fn inline(body: &Node, args: &[Node]) -> Node {
    match body.head {
        Head::Hole(k) => args[k as usize].clone(),
        Head::Rule(_) => Node {
            head: body.head,
            children: body.children.iter().map(|c| inline(c, args)).collect(),
        },
    }
}

pub fn oracle_action(g: &Grammar, p: &Program, obs: &Observation) -> (Action, Vec<(u8, u8)>) {
    let mut o = Oracle::new(g, obs);
    match o.run(p.root()) {
        V::Action(a) => (a, o.gets),
        v => panic!("expected action, got {v:?}"),
    }
}

/// Node count by explicit traversal.
pub fn count_nodes(n: &Node) -> usize {
    1 + n.children.iter().map(count_nodes).sum::<usize>()
}
