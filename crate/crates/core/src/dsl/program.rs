use std::fmt;

use super::grammar::{Grammar, RuleId};

/// What sits at an AST node: a rule application or, inside abstraction
/// bodies only, a numbered hole.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Rule(RuleId),
    Hole(u8),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub head: Head,
    pub children: Vec<Node>,
}

impl Node {
    pub fn leaf(rule: RuleId) -> Node {
        Node {
            head: Head::Rule(rule),
            children: Vec::new(),
        }
    }

    pub fn apply(rule: RuleId, children: Vec<Node>) -> Node {
        Node {
            head: Head::Rule(rule),
            children,
        }
    }

    pub fn hole(k: u8) -> Node {
        Node {
            head: Head::Hole(k),
            children: Vec::new(),
        }
    }

    pub fn rule(&self) -> Option<RuleId> {
        match self.head {
            Head::Rule(r) => Some(r),
            Head::Hole(_) => None,
        }
    }

    /// Number of nodes, holes included.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Node::size).sum::<usize>()
    }

    /// Number of rule applications, holes excluded.
    pub fn concrete_size(&self) -> usize {
        let own = usize::from(matches!(self.head, Head::Rule(_)));
        own + self.children.iter().map(Node::concrete_size).sum::<usize>()
    }

    /// Longest root-to-leaf path counted in nodes.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Node::depth).max().unwrap_or(0)
    }

    pub fn at(&self, path: &[usize]) -> Option<&Node> {
        path.iter().try_fold(self, |n, &i| n.children.get(i))
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Node> {
        path.iter().try_fold(self, |n, &i| n.children.get_mut(i))
    }

    /// Visits every node in pre-order with its path from `self`.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&[usize], &'a Node)) {
        fn go<'a>(n: &'a Node, path: &mut Vec<usize>, f: &mut impl FnMut(&[usize], &'a Node)) {
            f(path, n);
            for (i, c) in n.children.iter().enumerate() {
                path.push(i);
                go(c, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f)
    }

    /// Paths of all nodes in pre-order.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.size());
        self.walk(&mut |p, _| out.push(p.to_vec()));
        out
    }

    pub fn contains_hole(&self) -> bool {
        matches!(self.head, Head::Hole(_)) || self.children.iter().any(Node::contains_hole)
    }

    pub fn display<'a>(&'a self, grammar: &'a Grammar) -> NodeDisplay<'a> {
        NodeDisplay {
            node: self,
            grammar,
        }
    }
}

pub struct NodeDisplay<'a> {
    node: &'a Node,
    grammar: &'a Grammar,
}

impl fmt::Display for NodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |h: Head| -> String {
            match h {
                Head::Rule(r) => self.grammar.rule(r).name.clone(),
                Head::Hole(k) => format!("#{k}"),
            }
        };
        if self.node.children.is_empty() {
            return f.write_str(&name(self.node.head));
        }
        write!(f, "({}", name(self.node.head))?;
        for c in &self.node.children {
            write!(f, " {}", c.display(self.grammar))?;
        }
        f.write_str(")")
    }
}

/// A closed, hole-free expression tree. Programs evaluated as policies have
/// return type `action`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Program {
    root: Node,
}

impl Program {
    pub fn new(root: Node) -> Program {
        Program { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn root_mut(&mut self) -> &mut Node {
        &mut self.root
    }

    pub fn into_root(self) -> Node {
        self.root
    }

    /// Number of production-rule applications, terminals and parameters included.
    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Canonical single-line S-expression.
    pub fn to_sexpr(&self, grammar: &Grammar) -> String {
        self.root.display(grammar).to_string()
    }

    pub fn display<'a>(&'a self, grammar: &'a Grammar) -> NodeDisplay<'a> {
        self.root.display(grammar)
    }
}

impl From<Node> for Program {
    fn from(root: Node) -> Self {
        Program::new(root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_counts_every_node_and_depth_counts_levels() {
        let g = Grammar::base();
        let r = |n: &str| g.lookup(n).unwrap();
        let get = Node::apply(
            r("get"),
            vec![Node::leaf(r("$1")), Node::leaf(r("1")), Node::leaf(r("0"))],
        );
        assert_eq!(get.size(), 4);
        assert_eq!(get.depth(), 2);
        let p = Node::apply(r("eq-obj?"), vec![get, Node::hole(0)]);
        assert_eq!(p.size(), 6);
        assert_eq!(p.concrete_size(), 5);
        assert_eq!(p.depth(), 3);
        assert!(p.contains_hole());
        assert_eq!(p.at(&[0, 1]).unwrap().rule(), Some(r("1")));
        assert_eq!(p.paths().len(), 6);
        assert_eq!(p.display(&g).to_string(), "(eq-obj? (get $1 1 0) #0)");
    }
}
