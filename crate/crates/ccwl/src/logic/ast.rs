//! Formula syntax trees.
//!
//! Formulas are immutable and reference counted, so subformulas can be shared
//! freely. Every node caches its free-variable set (as a bit mask over
//! variables `x1..x64`) and its quantifier depth. [`Builder`] adds
//! hash-consing and memoized variable renaming on top of the plain
//! constructors, which keeps synthesized formulas small.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::acc::NeighborhoodKind;
use crate::error::{Error, Result};

/// Largest supported variable index.
pub const MAX_VARIABLE: usize = 64;

/// A node of a formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    /// `x_i = x_j`.
    Eq(usize, usize),
    /// `R_r(x_i)`: the cell has rank `r`.
    Rank(u32, usize),
    /// `P_s(x_i)`: bit `s` (1-based) of the attribute is set.
    Attr(usize, usize),
    /// `E^N(x_i, x_j)`: `x_j` lies in the `N`-neighborhood of `x_i`.
    Adj(NeighborhoodKind, usize, usize),
    And(Formula, Formula),
    Not(Formula),
    /// `∃^n (x_i, x_j) body`: at least `n` ordered pairs satisfy `body`.
    Exists {
        n: u64,
        i: usize,
        j: usize,
        body: Formula,
    },
}

/// A formula node together with cached structural data.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FormulaNode {
    node: Node,
    free: u64,
    depth: u32,
    max_var: usize,
}

/// Shared formula handle.
pub type Formula = Arc<FormulaNode>;

fn bit(i: usize) -> u64 {
    1u64 << (i - 1)
}

fn check_var(i: usize) -> Result<()> {
    if i == 0 || i > MAX_VARIABLE {
        return Err(Error::InvalidArgument(format!(
            "variable index {i} outside 1..={MAX_VARIABLE}"
        )));
    }
    Ok(())
}

impl FormulaNode {
    /// Builds a node, validating variable indices and quantified pairs.
    pub fn make(node: Node) -> Result<Formula> {
        let (free, depth, max_var) = match &node {
            Node::Eq(i, j) | Node::Adj(_, i, j) => {
                check_var(*i)?;
                check_var(*j)?;
                (bit(*i) | bit(*j), 0, (*i).max(*j))
            }
            Node::Rank(_, i) => {
                check_var(*i)?;
                (bit(*i), 0, *i)
            }
            Node::Attr(s, i) => {
                check_var(*i)?;
                if *s == 0 {
                    return Err(Error::InvalidArgument("attribute bits are numbered from 1".into()));
                }
                (bit(*i), 0, *i)
            }
            Node::And(a, b) => (a.free | b.free, a.depth.max(b.depth), a.max_var.max(b.max_var)),
            Node::Not(a) => (a.free, a.depth, a.max_var),
            Node::Exists { i, j, body, .. } => {
                check_var(*i)?;
                check_var(*j)?;
                if i == j {
                    return Err(Error::InvalidArgument(format!(
                        "a counting quantifier needs two distinct variables, got x{i} twice"
                    )));
                }
                (
                    body.free & !(bit(*i) | bit(*j)),
                    body.depth + 1,
                    body.max_var.max(*i).max(*j),
                )
            }
        };
        Ok(Arc::new(FormulaNode {
            node,
            free,
            depth,
            max_var,
        }))
    }

    /// The node.
    pub fn node(&self) -> &Node {
        &self.node
    }

    /// Free variables as a bit mask (bit `i-1` stands for `x_i`).
    pub fn free_mask(&self) -> u64 {
        self.free
    }

    /// Free variables in increasing order.
    pub fn free_vars(&self) -> Vec<usize> {
        (1..=MAX_VARIABLE).filter(|&i| self.free & bit(i) != 0).collect()
    }

    /// Whether `x_i` is free.
    pub fn is_free(&self, i: usize) -> bool {
        (1..=MAX_VARIABLE).contains(&i) && self.free & bit(i) != 0
    }

    /// Quantifier depth.
    pub fn quantifier_depth(&self) -> u32 {
        self.depth
    }

    /// Largest variable index occurring anywhere (free or bound); 0 for none.
    pub fn max_variable(&self) -> usize {
        self.max_var
    }

    /// Number of nodes of the formula written out as a tree (saturating).
    pub fn tree_size(&self) -> u64 {
        let mut memo = HashMap::new();
        tree_size(self, &mut memo)
    }

    /// Number of distinct shared nodes.
    pub fn dag_size(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if !seen.insert(f as *const FormulaNode) {
                continue;
            }
            match &f.node {
                Node::And(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Node::Not(a) | Node::Exists { body: a, .. } => stack.push(a),
                _ => {}
            }
        }
        seen.len()
    }
}

fn tree_size(f: &FormulaNode, memo: &mut HashMap<*const FormulaNode, u64>) -> u64 {
    if let Some(&s) = memo.get(&(f as *const _)) {
        return s;
    }
    let s = match &f.node {
        Node::And(a, b) => 1u64
            .saturating_add(tree_size(a, memo))
            .saturating_add(tree_size(b, memo)),
        Node::Not(a) | Node::Exists { body: a, .. } => 1u64.saturating_add(tree_size(a, memo)),
        _ => 1,
    };
    memo.insert(f as *const _, s);
    s
}

/// `x_i = x_j`.
pub fn eq(i: usize, j: usize) -> Result<Formula> {
    FormulaNode::make(Node::Eq(i, j))
}

/// `R_r(x_i)`.
pub fn rank(r: u32, i: usize) -> Result<Formula> {
    FormulaNode::make(Node::Rank(r, i))
}

/// `P_s(x_i)`.
pub fn attr(s: usize, i: usize) -> Result<Formula> {
    FormulaNode::make(Node::Attr(s, i))
}

/// `E^N(x_i, x_j)`.
pub fn adj(kind: NeighborhoodKind, i: usize, j: usize) -> Result<Formula> {
    FormulaNode::make(Node::Adj(kind, i, j))
}

/// `a ∧ b`.
pub fn and(a: Formula, b: Formula) -> Formula {
    FormulaNode::make(Node::And(a, b)).expect("conjunction of valid formulas is valid")
}

/// `¬a`.
pub fn not(a: Formula) -> Formula {
    FormulaNode::make(Node::Not(a)).expect("negation of a valid formula is valid")
}

/// `∃^n (x_i, x_j) body`.
pub fn exists(n: u64, i: usize, j: usize, body: Formula) -> Result<Formula> {
    FormulaNode::make(Node::Exists { n, i, j, body })
}

/// Left-nested conjunction; the empty conjunction is `x_i = x_i`, which is always true.
pub fn and_all(parts: impl IntoIterator<Item = Formula>, truth_var: usize) -> Result<Formula> {
    let mut it = parts.into_iter();
    match it.next() {
        None => eq(truth_var, truth_var),
        Some(first) => Ok(it.fold(first, and)),
    }
}

/// Flattens nested conjunctions into their conjuncts, left to right.
pub fn conjuncts(f: &Formula) -> Vec<Formula> {
    let mut out = Vec::new();
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        match g.node() {
            Node::And(a, b) => {
                stack.push(b.clone());
                stack.push(a.clone());
            }
            _ => out.push(g),
        }
    }
    out
}

/// Hash-consing formula factory with memoized renaming.
///
/// Two structurally equal formulas built through the same builder are the
/// same allocation, so pointer equality is structural equality.
#[derive(Default)]
pub struct Builder {
    table: HashMap<NodeKey, Formula>,
    renamed: HashMap<(usize, Vec<usize>), (Formula, Formula)>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum NodeKey {
    Eq(usize, usize),
    Rank(u32, usize),
    Attr(usize, usize),
    Adj(NeighborhoodKind, usize, usize),
    And(usize, usize),
    Not(usize),
    Exists(u64, usize, usize, usize),
}

fn ptr(f: &Formula) -> usize {
    Arc::as_ptr(f) as usize
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct nodes interned so far.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    fn intern(&mut self, key: NodeKey, node: Node) -> Result<Formula> {
        if let Some(f) = self.table.get(&key) {
            return Ok(f.clone());
        }
        let f = FormulaNode::make(node)?;
        self.table.insert(key, f.clone());
        Ok(f)
    }

    /// Re-interns a formula built elsewhere so it shares nodes with this builder.
    pub fn import(&mut self, f: &Formula) -> Result<Formula> {
        match f.node() {
            Node::Eq(i, j) => self.eq(*i, *j),
            Node::Rank(r, i) => self.rank(*r, *i),
            Node::Attr(s, i) => self.attr(*s, *i),
            Node::Adj(k, i, j) => self.adj(*k, *i, *j),
            Node::And(a, b) => {
                let (a, b) = (self.import(a)?, self.import(b)?);
                Ok(self.and(a, b))
            }
            Node::Not(a) => {
                let a = self.import(a)?;
                Ok(self.not(a))
            }
            Node::Exists { n, i, j, body } => {
                let body = self.import(body)?;
                self.exists(*n, *i, *j, body)
            }
        }
    }

    pub fn eq(&mut self, i: usize, j: usize) -> Result<Formula> {
        self.intern(NodeKey::Eq(i, j), Node::Eq(i, j))
    }

    pub fn rank(&mut self, r: u32, i: usize) -> Result<Formula> {
        self.intern(NodeKey::Rank(r, i), Node::Rank(r, i))
    }

    pub fn attr(&mut self, s: usize, i: usize) -> Result<Formula> {
        self.intern(NodeKey::Attr(s, i), Node::Attr(s, i))
    }

    pub fn adj(&mut self, kind: NeighborhoodKind, i: usize, j: usize) -> Result<Formula> {
        self.intern(NodeKey::Adj(kind, i, j), Node::Adj(kind, i, j))
    }

    pub fn and(&mut self, a: Formula, b: Formula) -> Formula {
        let key = NodeKey::And(ptr(&a), ptr(&b));
        self.intern(key, Node::And(a, b))
            .expect("conjunction of valid formulas is valid")
    }

    pub fn not(&mut self, a: Formula) -> Formula {
        let key = NodeKey::Not(ptr(&a));
        self.intern(key, Node::Not(a))
            .expect("negation of a valid formula is valid")
    }

    pub fn exists(&mut self, n: u64, i: usize, j: usize, body: Formula) -> Result<Formula> {
        let key = NodeKey::Exists(n, i, j, ptr(&body));
        self.intern(key, Node::Exists { n, i, j, body })
    }

    /// Left-nested conjunction; the empty conjunction is `x_v = x_v`.
    pub fn and_all(&mut self, parts: impl IntoIterator<Item = Formula>, truth_var: usize) -> Result<Formula> {
        let mut it = parts.into_iter();
        match it.next() {
            None => self.eq(truth_var, truth_var),
            Some(first) => {
                let mut acc = first;
                for p in it {
                    acc = self.and(acc, p);
                }
                Ok(acc)
            }
        }
    }

    /// Renames every variable occurrence (free and bound) by `perm`:
    /// `x_i` becomes `x_{perm[i-1]}`. Indices beyond `perm.len()` are kept.
    /// `perm` must be injective on the variables that occur, which makes the
    /// result equivalent to the original under the renamed valuation.
    pub fn rename(&mut self, f: &Formula, perm: &[usize]) -> Result<Formula> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != perm.len() || perm.iter().any(|&p| p == 0 || p > MAX_VARIABLE) {
            return Err(Error::InvalidArgument(format!("renaming {perm:?} is not injective")));
        }
        if perm.iter().enumerate().all(|(i, &p)| p == i + 1) {
            return Ok(f.clone());
        }
        self.rename_rec(f, perm)
    }

    fn rename_rec(&mut self, f: &Formula, perm: &[usize]) -> Result<Formula> {
        let key = (ptr(f), perm.to_vec());
        if let Some((_, g)) = self.renamed.get(&key) {
            return Ok(g.clone());
        }
        let m = |i: usize| perm.get(i - 1).copied().unwrap_or(i);
        let g = match f.node() {
            Node::Eq(i, j) => self.eq(m(*i), m(*j))?,
            Node::Rank(r, i) => self.rank(*r, m(*i))?,
            Node::Attr(s, i) => self.attr(*s, m(*i))?,
            Node::Adj(k, i, j) => self.adj(*k, m(*i), m(*j))?,
            Node::And(a, b) => {
                let (a, b) = (self.rename_rec(a, perm)?, self.rename_rec(b, perm)?);
                self.and(a, b)
            }
            Node::Not(a) => {
                let a = self.rename_rec(a, perm)?;
                self.not(a)
            }
            Node::Exists { n, i, j, body } => {
                let body = self.rename_rec(body, perm)?;
                self.exists(*n, m(*i), m(*j), body)?
            }
        };
        // The source is stored with the result so its address cannot be reused.
        self.renamed.insert(key, (f.clone(), g.clone()));
        Ok(g)
    }
}

/// The permutation of `1..=n` swapping `a` and `b`.
pub fn swap(n: usize, a: usize, b: usize) -> Vec<usize> {
    (1..=n)
        .map(|i| {
            if i == a {
                b
            } else if i == b {
                a
            } else {
                i
            }
        })
        .collect()
}

impl fmt::Display for FormulaNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::text::print_formula_node(self))
    }
}
