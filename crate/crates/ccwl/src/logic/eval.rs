//! Model checking.
//!
//! [`evaluate`] follows the satisfaction clauses directly and is the
//! reference. [`TableEvaluator`] computes, for every subformula, the full
//! relation it defines over its free variables and memoizes it per shared
//! node, which makes repeated queries over many valuations cheap.

use std::collections::HashMap;
use std::rc::Rc;

use fixedbitset::FixedBitSet;

use crate::acc::Acc;
use crate::error::{Error, Result};

use super::ast::{Formula, FormulaNode, Node, MAX_VARIABLE};

/// Partial map from variables `x1, x2, ...` to cells.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Valuation {
    slots: Vec<Option<usize>>,
}

impl Valuation {
    /// The empty valuation.
    pub fn empty() -> Self {
        Valuation::default()
    }

    /// Valuation mapping `x_i` to `tuple[i-1]`.
    pub fn from_tuple(tuple: &[usize]) -> Self {
        Valuation {
            slots: tuple.iter().map(|&c| Some(c)).collect(),
        }
    }

    /// Value of `x_i`, if bound.
    pub fn get(&self, i: usize) -> Option<usize> {
        i.checked_sub(1).and_then(|p| self.slots.get(p).copied().flatten())
    }

    /// Binds `x_i` to `cell`.
    pub fn set(&mut self, i: usize, cell: usize) {
        assert!((1..=MAX_VARIABLE).contains(&i), "variable index {i} out of range");
        if self.slots.len() < i {
            self.slots.resize(i, None);
        }
        self.slots[i - 1] = Some(cell);
    }

    /// Removes the binding of `x_i`.
    pub fn unset(&mut self, i: usize) {
        if let Some(slot) = i.checked_sub(1).and_then(|p| self.slots.get_mut(p)) {
            *slot = None;
        }
    }

    /// Copy with `x_i` bound to `cell`.
    pub fn with(&self, i: usize, cell: usize) -> Self {
        let mut v = self.clone();
        v.set(i, cell);
        v
    }

    /// Bound variables in increasing order.
    pub fn domain(&self) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(p, _)| p + 1)
            .collect()
    }

    /// Domain as a bit mask (bit `i-1` for `x_i`).
    pub fn domain_mask(&self) -> u64 {
        self.domain().iter().fold(0, |m, &i| m | 1 << (i - 1))
    }
}

fn first_unbound(f: &FormulaNode, mu: &Valuation) -> Option<usize> {
    f.free_vars().into_iter().find(|&i| mu.get(i).is_none())
}

/// Decides `acc, mu ⊨ f`. Fails if a free variable of `f` is unbound or a cell index is out of range.
pub fn evaluate(acc: &Acc, mu: &Valuation, f: &Formula) -> Result<bool> {
    if let Some(i) = first_unbound(f, mu) {
        return Err(Error::UnboundVariable(i));
    }
    for i in mu.domain() {
        if mu.get(i).is_some_and(|c| c >= acc.len()) {
            return Err(Error::InvalidArgument(format!(
                "x{i} is bound to a cell outside the complex"
            )));
        }
    }
    let mut mu = mu.clone();
    Ok(eval_rec(acc, &mut mu, f))
}

fn eval_rec(acc: &Acc, mu: &mut Valuation, f: &FormulaNode) -> bool {
    let val = |mu: &Valuation, i: usize| mu.get(i).expect("free variables are bound");
    match f.node() {
        Node::Eq(i, j) => val(mu, *i) == val(mu, *j),
        Node::Rank(r, i) => acc.rank(val(mu, *i)) == *r,
        Node::Attr(s, i) => acc.attr(val(mu, *i)).bit(*s),
        Node::Adj(kind, i, j) => acc.related(*kind, val(mu, *i), val(mu, *j)),
        Node::And(a, b) => eval_rec(acc, mu, a) && eval_rec(acc, mu, b),
        Node::Not(a) => !eval_rec(acc, mu, a),
        Node::Exists { n, i, j, body } => {
            if *n == 0 {
                return true;
            }
            let saved = (mu.get(*i), mu.get(*j));
            let mut count = 0u64;
            let mut result = false;
            'outer: for c1 in 0..acc.len() {
                mu.set(*i, c1);
                for c2 in 0..acc.len() {
                    mu.set(*j, c2);
                    if eval_rec(acc, mu, body) {
                        count += 1;
                        if count >= *n {
                            result = true;
                            break 'outer;
                        }
                    }
                }
            }
            for (v, old) in [(*i, saved.0), (*j, saved.1)] {
                match old {
                    Some(c) => mu.set(v, c),
                    None => mu.unset(v),
                }
            }
            result
        }
    }
}

/// Relation defined by a formula: one truth value per assignment of its free
/// variables, indexed with the smallest variable most significant.
#[derive(Clone, Debug)]
pub struct Table {
    pub vars: Vec<usize>,
    pub bits: FixedBitSet,
}

impl Table {
    fn index(&self, n: usize, value_of: impl Fn(usize) -> usize) -> usize {
        self.vars.iter().fold(0, |acc, &v| acc * n + value_of(v))
    }

    /// Number of satisfying assignments.
    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }
}

/// Default cap on the number of entries of a single table.
pub const DEFAULT_TABLE_LIMIT: usize = 1 << 28;

/// Memoizing evaluator over one complex.
pub struct TableEvaluator<'a> {
    acc: &'a Acc,
    limit: usize,
    memo: HashMap<usize, (Formula, Rc<Table>)>,
}

impl<'a> TableEvaluator<'a> {
    pub fn new(acc: &'a Acc) -> Self {
        TableEvaluator {
            acc,
            limit: DEFAULT_TABLE_LIMIT,
            memo: HashMap::new(),
        }
    }

    /// Sets the largest table size allowed.
    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    /// The complex being evaluated.
    pub fn acc(&self) -> &'a Acc {
        self.acc
    }

    /// Decides `acc, mu ⊨ f`.
    pub fn holds(&mut self, f: &Formula, mu: &Valuation) -> Result<bool> {
        if let Some(i) = first_unbound(f, mu) {
            return Err(Error::UnboundVariable(i));
        }
        let table = self.table(f)?;
        let n = self.acc.len();
        if let Some(&v) = table.vars.iter().find(|&&v| mu.get(v).is_some_and(|c| c >= n)) {
            return Err(Error::InvalidArgument(format!(
                "x{v} is bound to a cell outside the complex"
            )));
        }
        Ok(table
            .bits
            .contains(table.index(n, |v| mu.get(v).expect("checked above"))))
    }

    /// Decides `acc, (x_1 ↦ tuple[0], ...) ⊨ f`.
    pub fn holds_at(&mut self, f: &Formula, tuple: &[usize]) -> Result<bool> {
        self.holds(f, &Valuation::from_tuple(tuple))
    }

    /// The relation defined by `f`.
    pub fn table(&mut self, f: &Formula) -> Result<Rc<Table>> {
        let key = Formula::as_ptr(f) as usize;
        if let Some((_, t)) = self.memo.get(&key) {
            return Ok(t.clone());
        }
        let t = Rc::new(self.compute(f)?);
        self.memo.insert(key, (f.clone(), t.clone()));
        Ok(t)
    }

    fn alloc(&self, vars: &[usize]) -> Result<usize> {
        let n = self.acc.len();
        let size = n
            .checked_pow(vars.len() as u32)
            .filter(|&s| s <= self.limit)
            .ok_or_else(|| {
                Error::SizeLimit(format!(
                    "a subformula with {} free variables over {n} cells exceeds the table limit of {} entries",
                    vars.len(),
                    self.limit
                ))
            })?;
        Ok(size)
    }

    fn compute(&mut self, f: &Formula) -> Result<Table> {
        let acc = self.acc;
        let n = acc.len();
        let vars = f.free_vars();
        let size = self.alloc(&vars)?;
        let mut bits = FixedBitSet::with_capacity(size);
        let pos = |v: usize| vars.iter().position(|&w| w == v).expect("free variable");
        match f.node() {
            Node::Eq(i, j) | Node::Adj(_, i, j) if i == j => {
                if matches!(f.node(), Node::Eq(..)) {
                    bits.insert_range(..);
                }
            }
            Node::Eq(i, j) | Node::Adj(_, i, j) => {
                let swapped = pos(*i) > pos(*j);
                for idx in 0..size {
                    let (mut a, mut c) = (idx / n, idx % n);
                    if swapped {
                        std::mem::swap(&mut a, &mut c);
                    }
                    let value = match f.node() {
                        Node::Eq(..) => a == c,
                        Node::Adj(kind, ..) => acc.related(*kind, a, c),
                        _ => unreachable!(),
                    };
                    bits.set(idx, value);
                }
            }
            Node::Rank(r, _) => {
                for c in 0..size {
                    bits.set(c, acc.rank(c) == *r);
                }
            }
            Node::Attr(s, _) => {
                for c in 0..size {
                    bits.set(c, acc.attr(c).bit(*s));
                }
            }
            Node::Not(a) => {
                let ta = self.table(a)?;
                bits.union_with(&ta.bits);
                bits.toggle_range(..);
            }
            Node::And(a, b) => {
                let (ta, tb) = (self.table(a)?, self.table(b)?);
                if ta.vars == vars && tb.vars == vars {
                    bits.union_with(&ta.bits);
                    bits.intersect_with(&tb.bits);
                } else {
                    let pa: Vec<usize> = ta.vars.iter().map(|&v| pos(v)).collect();
                    let pb: Vec<usize> = tb.vars.iter().map(|&v| pos(v)).collect();
                    let mut digits = vec![0usize; vars.len()];
                    for idx in 0..size {
                        decode(idx, n, &mut digits);
                        let ia = pa.iter().fold(0, |acc, &p| acc * n + digits[p]);
                        if !ta.bits.contains(ia) {
                            continue;
                        }
                        let ib = pb.iter().fold(0, |acc, &p| acc * n + digits[p]);
                        bits.set(idx, tb.bits.contains(ib));
                    }
                }
            }
            Node::Exists {
                n: threshold,
                i,
                j,
                body,
            } => {
                if *threshold == 0 {
                    bits.insert_range(..);
                } else {
                    let tb = self.table(body)?;
                    // Quantified variables absent from the body multiply the count by n each.
                    let absent = [*i, *j].iter().filter(|v| !tb.vars.contains(v)).count() as u32;
                    let factor = (n as u64).pow(absent);
                    let outer_pos: Vec<Option<usize>> = tb
                        .vars
                        .iter()
                        .map(|&v| if v == *i || v == *j { None } else { Some(pos(v)) })
                        .collect();
                    let mut counts = vec![0u64; size];
                    let mut bdig = vec![0usize; tb.vars.len()];
                    let mut rdig = vec![0usize; vars.len()];
                    for bidx in tb.bits.ones() {
                        decode(bidx, n, &mut bdig);
                        for (p, op) in outer_pos.iter().enumerate() {
                            if let Some(q) = op {
                                rdig[*q] = bdig[p];
                            }
                        }
                        let ridx = rdig.iter().fold(0, |acc, &d| acc * n + d);
                        counts[ridx] += factor;
                    }
                    for (idx, c) in counts.into_iter().enumerate() {
                        bits.set(idx, c >= *threshold);
                    }
                }
            }
        }
        Ok(Table { vars, bits })
    }
}

fn decode(mut idx: usize, n: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = idx % n;
        idx /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acc::{lift_graph, Graph};
    use crate::logic::text::parse_formula;

    fn c6() -> Acc {
        lift_graph(&Graph::uncolored(6, (0..6).map(|i| (i, (i + 1) % 6)).collect()).unwrap())
    }

    #[test]
    fn unbound_free_variable_is_an_error() {
        let acc = c6();
        let f = parse_formula("(eq x1 x2)", 2).unwrap();
        assert_eq!(
            evaluate(&acc, &Valuation::from_tuple(&[0]), &f),
            Err(Error::UnboundVariable(2))
        );
        let mut t = TableEvaluator::new(&acc);
        assert_eq!(t.holds_at(&f, &[0]), Err(Error::UnboundVariable(2)));
    }

    #[test]
    fn zero_threshold_is_true() {
        let acc = c6();
        let f = parse_formula("(exists 0 (x1 x2) (not (eq x1 x1)))", 2).unwrap();
        assert!(evaluate(&acc, &Valuation::empty(), &f).unwrap());
        assert!(TableEvaluator::new(&acc).holds(&f, &Valuation::empty()).unwrap());
    }

    #[test]
    fn counts_ordered_pairs_including_diagonal() {
        let acc = c6();
        // 12 cells, so 144 ordered pairs, of which 12 are diagonal.
        let all = parse_formula("(exists 144 (x1 x2) (eq x1 x1))", 2).unwrap();
        assert!(evaluate(&acc, &Valuation::empty(), &all).unwrap());
        let diag = parse_formula("(exists 12 (x1 x2) (eq x1 x2))", 2).unwrap();
        let diag13 = parse_formula("(exists 13 (x1 x2) (eq x1 x2))", 2).unwrap();
        let mut t = TableEvaluator::new(&acc);
        for f in [&all, &diag] {
            assert!(t.holds(f, &Valuation::empty()).unwrap());
        }
        assert!(!evaluate(&acc, &Valuation::empty(), &diag13).unwrap());
        assert!(!t.holds(&diag13, &Valuation::empty()).unwrap());
    }

    #[test]
    fn evaluators_agree_on_mixed_formulas() {
        let acc = c6();
        let texts = [
            "(exists 2 (x2 x3) (and (adj B x1 x2) (eq x2 x3)))",
            "(exists 4 (x2 x3) (and (adj down x1 x2) (adj B x1 x3)))",
            "(not (exists 1 (x1 x3) (and (adj C x2 x1) (adj up x1 x3))))",
            "(and (rank 1 x1) (attr 1 x2))",
        ];
        let mut t = TableEvaluator::new(&acc);
        for text in texts {
            let f = parse_formula(text, 3).unwrap();
            for a in 0..acc.len() {
                for b in 0..acc.len() {
                    let mu = Valuation::from_tuple(&[a, b, 0]);
                    assert_eq!(
                        evaluate(&acc, &mu, &f).unwrap(),
                        t.holds(&f, &mu).unwrap(),
                        "{text} at {a},{b}"
                    );
                }
            }
        }
    }

    #[test]
    fn quantifier_restores_outer_bindings() {
        let acc = c6();
        let f = parse_formula("(and (exists 1 (x1 x2) (eq x1 x2)) (eq x1 x3))", 3).unwrap();
        assert!(evaluate(&acc, &Valuation::from_tuple(&[5, 0, 5]), &f).unwrap());
    }
}
