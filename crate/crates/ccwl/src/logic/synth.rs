//! Characterizing and separating formulas built from refinement traces.
//!
//! For every round `t` and color `C` of a joint run, [`Synthesizer`] builds a
//! formula `ψ_{t,C}` over `x1..xk` that holds at exactly the tuples of color
//! `C` at round `t`, in both complexes. Round 0 uses the atomic-type formula.
//! A later color is its parent's characterizer plus one distinguisher per
//! sibling color (a color with the same parent). A distinguisher picks the
//! first refinement context whose multiplicity differs and counts it with a
//! pairwise quantifier over `x_{k+1}, x_{k+2}`; the counted pattern pins the
//! atomic type of the extended tuple and the colors of every shifted tuple
//! through renamed characterizers of the previous round. For arity 1 the
//! patterns take the guarded shapes instead, so the output stays in the
//! guarded three-variable fragment.

use std::collections::{BTreeMap, HashMap};

use crate::acc::{Acc, NeighborhoodKind};
use crate::error::{Error, Result};
use crate::refine::{
    atomic_type, decode_tuple, encode_tuple, increasing_pairs, ordered_pairs, pair_code, AtomicType, CellTypes,
    RefinementTrace,
};

use super::ast::{swap, Builder, Formula};
use super::eval::TableEvaluator;

/// Rank and attribute vocabulary shared by the complexes under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    /// Largest rank.
    pub rho: u32,
    /// Attribute width.
    pub ell: usize,
}

impl Vocabulary {
    /// Vocabulary covering all given complexes.
    pub fn of(accs: &[&Acc]) -> Self {
        Vocabulary {
            rho: accs.iter().map(|a| a.rho()).max().unwrap_or(0),
            ell: accs.iter().map(|a| a.ell()).max().unwrap_or(0),
        }
    }
}

/// Quantifier-free conjunction that holds at a `k`-tuple exactly when its atomic type is `a`.
///
/// Literals come in the order: equalities over `i < j`; boundary, coboundary,
/// lower and upper adjacency over ordered pairs; attribute bits `1..=ell` per
/// position; one-hot ranks `0..=rho` per position. Negative literals are
/// included throughout.
pub fn atomic_type_formula(a: &AtomicType, k: usize, vocab: Vocabulary) -> Result<Formula> {
    let mut builder = Builder::new();
    atomic_type_formula_with(&mut builder, a, k, vocab)
}

/// [`atomic_type_formula`] using a shared builder.
pub fn atomic_type_formula_with(builder: &mut Builder, a: &AtomicType, k: usize, vocab: Vocabulary) -> Result<Formula> {
    if a.k() != k || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "atomic type has arity {} but arity {k} was requested",
            a.k()
        )));
    }
    if !a.is_consistent() {
        return Err(Error::InvalidArgument("atomic type is inconsistent".into()));
    }
    if let Some(r) = a.rank_seq.iter().find(|&&r| r > vocab.rho) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} exceeds the vocabulary maximum {}",
            vocab.rho
        )));
    }
    if let Some(c) = a.colors.iter().find(|c| c.width() > vocab.ell) {
        return Err(Error::InvalidArgument(format!(
            "attribute {c} is wider than the vocabulary width {}",
            vocab.ell
        )));
    }
    let mut lits = Vec::new();
    let mut literal = |builder: &mut Builder, f: Formula, positive: bool| {
        lits.push(if positive { f } else { builder.not(f) });
    };
    for (i, j) in increasing_pairs(k) {
        let f = builder.eq(i + 1, j + 1)?;
        literal(builder, f, a.equal(i, j));
    }
    for kind in NeighborhoodKind::ALL {
        for (i, j) in ordered_pairs(k) {
            let f = builder.adj(kind, i + 1, j + 1)?;
            literal(builder, f, a.adjacent(kind, i, j));
        }
    }
    for i in 0..k {
        for s in 1..=vocab.ell {
            let f = builder.attr(s, i + 1)?;
            literal(builder, f, a.colors[i].bit(s));
        }
    }
    for i in 0..k {
        for r in 0..=vocab.rho {
            let f = builder.rank(r, i + 1)?;
            literal(builder, f, a.rank_seq[i] == r);
        }
    }
    builder.and_all(lits, 1)
}

/// A verified separating formula.
#[derive(Clone, Debug)]
pub struct Separation {
    pub formula: Formula,
    /// Round at which the separated objects first receive different colors.
    pub round: usize,
    /// Index of the input (0 or 1) on which the formula holds.
    pub true_on: usize,
}

#[derive(Clone, Debug, Default)]
struct RoundInfo {
    /// Representative `(structure, tuple index)` of each color.
    rep: Vec<(usize, usize)>,
    /// Color at the previous round of each color (round 0 has none).
    parent: Vec<u32>,
    /// Colors grouped by parent, in increasing order.
    family: HashMap<u32, Vec<u32>>,
}

/// Builds characterizing and separating formulas for a joint refinement run of two complexes.
pub struct Synthesizer<'a> {
    accs: Vec<&'a Acc>,
    trace: &'a RefinementTrace,
    k: usize,
    vocab: Vocabulary,
    types: CellTypes,
    builder: Builder,
    psi: HashMap<(usize, u32), Formula>,
    dist: HashMap<(usize, u32, u32), Formula>,
    rounds: HashMap<usize, RoundInfo>,
    evaluators: Vec<TableEvaluator<'a>>,
}

impl<'a> Synthesizer<'a> {
    /// Prepares synthesis over the complexes the trace was computed on.
    pub fn new(accs: &[&'a Acc], trace: &'a RefinementTrace) -> Result<Self> {
        if accs.len() != 2 || trace.structures() != 2 {
            return Err(Error::InvalidArgument(
                "synthesis needs a joint run of two complexes".into(),
            ));
        }
        if accs.iter().zip(&trace.sizes).any(|(a, &s)| a.len() != s) {
            return Err(Error::InvalidArgument(
                "the trace was not computed on these complexes".into(),
            ));
        }
        Ok(Synthesizer {
            accs: accs.to_vec(),
            trace,
            k: trace.k,
            vocab: Vocabulary::of(accs),
            types: CellTypes::of(accs),
            builder: Builder::new(),
            psi: HashMap::new(),
            dist: HashMap::new(),
            rounds: HashMap::new(),
            evaluators: accs.iter().map(|a| TableEvaluator::new(a)).collect(),
        })
    }

    /// Number of distinct formula nodes built so far.
    pub fn nodes(&self) -> usize {
        self.builder.len()
    }

    fn round_info(&mut self, t: usize) -> &RoundInfo {
        if !self.rounds.contains_key(&t) {
            let coloring = self.trace.colors_at(t);
            let mut rep = vec![(usize::MAX, 0); coloring.num_colors];
            for (g, colors) in coloring.colors.iter().enumerate() {
                for (idx, &c) in colors.iter().enumerate() {
                    if rep[c as usize].0 == usize::MAX {
                        rep[c as usize] = (g, idx);
                    }
                }
            }
            let mut parent = Vec::new();
            let mut family: HashMap<u32, Vec<u32>> = HashMap::new();
            if t > 0 {
                let prev = self.trace.colors_at(t - 1);
                parent = rep.iter().map(|&(g, idx)| prev.colors[g][idx]).collect();
                for (c, &p) in parent.iter().enumerate() {
                    family.entry(p).or_default().push(c as u32);
                }
            }
            self.rounds.insert(t, RoundInfo { rep, parent, family });
        }
        &self.rounds[&t]
    }

    fn tuple(&self, g: usize, idx: usize) -> Vec<usize> {
        decode_tuple(idx, self.accs[g].len(), self.k)
    }

    fn color(&self, t: usize, g: usize, tuple: &[usize]) -> u32 {
        self.trace.color(t, g, tuple)
    }

    /// `ψ_{t,C}`: holds at exactly the tuples of color `c` at round `t`.
    pub fn characterizer(&mut self, t: usize, c: u32) -> Result<Formula> {
        let t = t.min(self.trace.last_round());
        if let Some(f) = self.psi.get(&(t, c)) {
            return Ok(f.clone());
        }
        let info = self.round_info(t);
        let &(g, idx) = info
            .rep
            .get(c as usize)
            .ok_or_else(|| Error::InvalidArgument(format!("color {c} does not occur at round {t}")))?;
        let f = if t == 0 {
            let tuple = self.tuple(g, idx);
            let a = atomic_type(self.accs[g], &tuple)?;
            atomic_type_formula_with(&mut self.builder, &a, self.k, self.vocab)?
        } else {
            let parent = info.parent[c as usize];
            let siblings: Vec<u32> = info.family[&parent].iter().copied().filter(|&s| s != c).collect();
            let mut f = self.characterizer(t - 1, parent)?;
            for s in siblings {
                let d = self.distinguisher(t, c, s)?;
                f = self.builder.and(f, d);
            }
            f
        };
        self.psi.insert((t, c), f.clone());
        Ok(f)
    }

    /// Context multiset of a tuple at round `t >= 1`: key to (count, witness pair).
    fn contexts(&self, t: usize, g: usize, tuple: &[usize]) -> BTreeMap<Vec<u32>, (u64, (usize, usize))> {
        let acc = self.accs[g];
        let prev = t - 1;
        let mut out: BTreeMap<Vec<u32>, (u64, (usize, usize))> = BTreeMap::new();
        let mut bump = |key: Vec<u32>, w: (usize, usize)| {
            out.entry(key).or_insert((0, w)).0 += 1;
        };
        if self.k == 1 {
            let x = tuple[0];
            let chi = |y: usize| self.color(prev, g, &[y]);
            for &y in acc.nbrs(x, NeighborhoodKind::Boundary) {
                bump(vec![0, chi(y), 0], (y, y));
            }
            for &y in acc.nbrs(x, NeighborhoodKind::Coboundary) {
                bump(vec![1, chi(y), 0], (y, y));
            }
            for &(y, z) in acc.lower_pairs(x) {
                bump(vec![2, chi(y), chi(z)], (y, z));
            }
            for &(y, z) in acc.upper_pairs(x) {
                bump(vec![3, chi(y), chi(z)], (y, z));
            }
            return out;
        }
        let n = acc.len();
        let base = encode_tuple(tuple, n);
        let colors = &self.trace.colors_at(prev).colors[g];
        let weights: Vec<usize> = (0..self.k).map(|i| n.pow((self.k - 1 - i) as u32)).collect();
        let shifted = |cell: usize, i: usize| colors[base + cell * weights[i] - tuple[i] * weights[i]];
        for alpha in 0..n {
            for beta in 0..n {
                let mut key = Vec::with_capacity(4 * self.k + 3);
                key.extend(tuple.iter().map(|&x| pair_code(acc, x, alpha)));
                key.extend(tuple.iter().map(|&x| pair_code(acc, x, beta)));
                key.push(pair_code(acc, alpha, beta));
                key.push(self.types.ids[g][alpha]);
                key.push(self.types.ids[g][beta]);
                for i in 0..self.k {
                    key.push(shifted(alpha, i));
                    key.push(shifted(beta, i));
                }
                bump(key, (alpha, beta));
            }
        }
        out
    }

    /// A formula true at all tuples of color `c` and false at all tuples of
    /// color `other`, where both colors share their parent at round `t - 1`.
    pub fn distinguisher(&mut self, t: usize, c: u32, other: u32) -> Result<Formula> {
        if let Some(f) = self.dist.get(&(t, c, other)) {
            return Ok(f.clone());
        }
        let info = self.round_info(t);
        let ((g1, i1), (g2, i2)) = (info.rep[c as usize], info.rep[other as usize]);
        let (x, y) = (self.tuple(g1, i1), self.tuple(g2, i2));
        let (cx, cy) = (self.contexts(t, g1, &x), self.contexts(t, g2, &y));
        let mut keys: Vec<&Vec<u32>> = cx.keys().chain(cy.keys()).collect();
        keys.sort();
        keys.dedup();
        let key = keys
            .into_iter()
            .find(|k| cx.get(*k).map(|e| e.0) != cy.get(*k).map(|e| e.0))
            .cloned()
            .ok_or_else(|| {
                Error::InvalidState(format!(
                    "colors {c} and {other} at round {t} have identical contexts; the trace is inconsistent"
                ))
            })?;
        let (nx, ny) = (cx.get(&key).map_or(0, |e| e.0), cy.get(&key).map_or(0, |e| e.0));
        let witness = match cx.get(&key) {
            Some(&(_, w)) => (g1, x.clone(), w),
            None => (g2, y.clone(), cy[&key].1),
        };
        let pattern = self.pattern(t, &key, witness)?;
        let (i, j) = (self.k + 1, self.k + 2);
        let f = if nx > ny {
            self.builder.exists(nx, i, j, pattern)?
        } else {
            let e = self.builder.exists(ny, i, j, pattern)?;
            self.builder.not(e)
        };
        self.dist.insert((t, c, other), f.clone());
        Ok(f)
    }

    /// Formula over `x1..x_{k+2}` that holds at `(x, α, β)` exactly when the
    /// context of `(α, β)` relative to `x` has the given key.
    fn pattern(&mut self, t: usize, key: &[u32], witness: (usize, Vec<usize>, (usize, usize))) -> Result<Formula> {
        let k = self.k;
        let vars = k + 2;
        let mut parts = Vec::new();
        if k == 1 {
            use NeighborhoodKind::*;
            let on2 = swap(vars, 1, 2);
            let on3 = swap(vars, 1, 3);
            let psi_y = self.characterizer(t - 1, key[1])?;
            let psi_y = self.builder.rename(&psi_y, &on2)?;
            match key[0] {
                0 | 1 => {
                    let kind = if key[0] == 0 { Boundary } else { Coboundary };
                    parts.push(self.builder.eq(2, 3)?);
                    parts.push(self.builder.adj(kind, 1, 2)?);
                    parts.push(psi_y);
                }
                tag => {
                    let (n1, n2) = if tag == 2 {
                        (Lower, Boundary)
                    } else {
                        (Upper, Coboundary)
                    };
                    let psi_z = self.characterizer(t - 1, key[2])?;
                    let psi_z = self.builder.rename(&psi_z, &on3)?;
                    parts.push(self.builder.adj(n1, 1, 2)?);
                    parts.push(self.builder.adj(n2, 1, 3)?);
                    parts.push(self.builder.adj(n2, 2, 3)?);
                    parts.push(psi_y);
                    parts.push(psi_z);
                }
            }
        } else {
            let (g, tuple, (alpha, beta)) = witness;
            let mut ext = tuple.clone();
            ext.push(alpha);
            ext.push(beta);
            let a = atomic_type(self.accs[g], &ext)?;
            parts.push(atomic_type_formula_with(&mut self.builder, &a, vars, self.vocab)?);
            let shift_colors = &key[2 * k + 3..];
            for i in 0..k {
                for (slot, target) in [(0, k + 1), (1, k + 2)] {
                    let psi = self.characterizer(t - 1, shift_colors[2 * i + slot])?;
                    let renamed = self.builder.rename(&psi, &swap(vars, i + 1, target))?;
                    parts.push(renamed);
                }
            }
        }
        self.builder.and_all(parts, 1)
    }

    /// Separates tuple `u_a` of the first complex from `u_b` of the second.
    ///
    /// The formula has quantifier depth at most the first round at which the
    /// tuples' colors differ, and it is verified by model checking before it
    /// is returned.
    pub fn separate_tuples(&mut self, u_a: &[usize], u_b: &[usize]) -> Result<Separation> {
        if u_a.len() != self.k || u_b.len() != self.k {
            return Err(Error::InvalidArgument(format!("tuples must have length {}", self.k)));
        }
        for (g, u) in [(0, u_a), (1, u_b)] {
            if u.iter().any(|&c| c >= self.accs[g].len()) {
                return Err(Error::InvalidArgument(format!(
                    "tuple {u:?} has a cell outside input {}",
                    g + 1
                )));
            }
        }
        let last = self.trace.last_round();
        let t = (0..=last)
            .find(|&t| self.color(t, 0, u_a) != self.color(t, 1, u_b))
            .ok_or_else(|| Error::NoSeparator(format!("the tuples have equal colors at every round up to {last}")))?;
        let (ca, cb) = (self.color(t, 0, u_a), self.color(t, 1, u_b));
        let formula = if t == 0 {
            self.characterizer(0, ca)?
        } else {
            self.distinguisher(t, ca, cb)?
        };
        if formula.quantifier_depth() as usize > t {
            return Err(Error::InvalidState(format!(
                "separator depth {} exceeds round {t}",
                formula.quantifier_depth()
            )));
        }
        let on_a = self.evaluators[0].holds_at(&formula, u_a)?;
        let on_b = self.evaluators[1].holds_at(&formula, u_b)?;
        if !on_a || on_b {
            return Err(Error::InvalidState("synthesized separator failed verification".into()));
        }
        Ok(Separation {
            formula,
            round: t,
            true_on: 0,
        })
    }

    /// Separates the two complexes by a sentence, using the first round at
    /// which their global signatures differ. Supported for arity 1 and 2.
    pub fn separate_complexes(&mut self) -> Result<Separation> {
        let t = self
            .trace
            .first_divergence
            .ok_or_else(|| Error::NoSeparator("the global signatures never differ".into()))?;
        let (sa, sb) = (self.trace.signature(t, 0), self.trace.signature(t, 1));
        let count = |sig: &[(u32, usize)], c: u32| sig.iter().find(|e| e.0 == c).map_or(0, |e| e.1);
        let mut colors: Vec<u32> = sa.iter().chain(&sb).map(|e| e.0).collect();
        colors.sort_unstable();
        let c = colors
            .into_iter()
            .find(|&c| count(&sa, c) != count(&sb, c))
            .expect("diverging signatures differ in some color");
        let (ma, mb) = (count(&sa, c), count(&sb, c));
        let psi = self.characterizer(t, c)?;
        let body = match self.k {
            1 => {
                let e = self.builder.eq(1, 2)?;
                self.builder.and(e, psi)
            }
            2 => psi,
            k => {
                return Err(Error::InvalidArgument(format!(
                    "sentence separators are supported for arity 1 and 2, not {k}"
                )))
            }
        };
        let formula = self.builder.exists(ma.max(mb) as u64, 1, 2, body)?;
        let true_on = if ma > mb { 0 } else { 1 };
        let holds: Vec<bool> = self
            .evaluators
            .iter_mut()
            .map(|ev| ev.holds(&formula, &super::eval::Valuation::empty()))
            .collect::<Result<_>>()?;
        if !holds[true_on] || holds[1 - true_on] {
            return Err(Error::InvalidState("synthesized sentence failed verification".into()));
        }
        Ok(Separation {
            formula,
            round: t,
            true_on,
        })
    }

    /// Checks `ψ_{t,C}` on every tuple of both complexes.
    pub fn verify_characterizer(&mut self, t: usize, c: u32) -> Result<bool> {
        let f = self.characterizer(t, c)?;
        for g in 0..2 {
            let n = self.accs[g].len();
            let count = n.pow(self.k as u32);
            for idx in 0..count {
                let tuple = decode_tuple(idx, n, self.k);
                if self.evaluators[g].holds_at(&f, &tuple)? != (self.color(t, g, &tuple) == c) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acc::{lift_graph, Graph};
    use crate::logic::eval::evaluate;
    use crate::logic::eval::Valuation;
    use crate::logic::gtc3::{is_guarded_gtc3, is_guarded_gtc3_sentence};
    use crate::refine::refine;

    fn cycle(n: u32) -> Graph {
        Graph::uncolored(n as usize, (0..n).map(|i| (i, (i + 1) % n)).collect()).unwrap()
    }

    fn path(n: u32) -> Graph {
        Graph::uncolored(n as usize, (0..n - 1).map(|i| (i, i + 1)).collect()).unwrap()
    }

    #[test]
    fn atomic_type_formula_characterizes_types() {
        let acc = lift_graph(&path(3));
        let vocab = Vocabulary::of(&[&acc]);
        let n = acc.len();
        for x in 0..n {
            for y in 0..n {
                let a = atomic_type(&acc, &[x, y]).unwrap();
                let f = atomic_type_formula(&a, 2, vocab).unwrap();
                for u in 0..n {
                    for v in 0..n {
                        let same = atomic_type(&acc, &[u, v]).unwrap() == a;
                        assert_eq!(evaluate(&acc, &Valuation::from_tuple(&[u, v]), &f).unwrap(), same);
                    }
                }
            }
        }
    }

    #[test]
    fn atomic_type_formula_rejects_bad_arity() {
        let acc = lift_graph(&path(2));
        let a = atomic_type(&acc, &[0, 1]).unwrap();
        assert!(atomic_type_formula(&a, 3, Vocabulary::of(&[&acc])).is_err());
    }

    #[test]
    fn path_ends_are_separated_by_a_guarded_formula() {
        let a = lift_graph(&path(4));
        let b = lift_graph(&path(4));
        let trace = refine(&[&a, &b], 1, None).unwrap();
        let mut s = Synthesizer::new(&[&a, &b], &trace).unwrap();
        let sep = s.separate_tuples(&[0], &[1]).unwrap();
        assert!(is_guarded_gtc3(&sep.formula));
        assert!(sep.formula.quantifier_depth() as usize <= sep.round);
        assert!(matches!(s.separate_tuples(&[0], &[3]), Err(Error::NoSeparator(_))));
        for t in 0..=trace.last_round() {
            for c in 0..trace.colors_at(t).num_colors as u32 {
                assert!(s.verify_characterizer(t, c).unwrap());
            }
        }
    }

    #[test]
    fn cycle_and_triangles_sentence_at_arity_two() {
        let a = lift_graph(&cycle(6));
        let b = lift_graph(&Graph::uncolored(6, vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap());
        let trace = refine(&[&a, &b], 2, None).unwrap();
        let mut s = Synthesizer::new(&[&a, &b], &trace).unwrap();
        let sep = s.separate_complexes().unwrap();
        assert!(sep.formula.free_vars().is_empty());
    }

    #[test]
    fn arity_one_sentence_is_guarded() {
        let a = lift_graph(&path(3));
        let b = lift_graph(&path(4));
        let trace = refine(&[&a, &b], 1, None).unwrap();
        let mut s = Synthesizer::new(&[&a, &b], &trace).unwrap();
        let sep = s.separate_complexes().unwrap();
        assert!(is_guarded_gtc3_sentence(&sep.formula));
    }
}
