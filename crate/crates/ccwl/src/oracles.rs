//! Brute-force reference implementations used to cross-check the fast paths.
//!
//! All three are exponential and refuse inputs above small size caps.

use std::collections::HashMap;

use crate::acc::Acc;
use crate::error::{Error, Result};
use crate::game::{similarity, Rules, Side, Winner};
use crate::logic::{evaluate, Builder, Formula, Valuation};
use crate::refine::{pair_code, CellTypes};

/// Full pebble valuations on both sides plus the remaining rounds.
type PositionKey = (Vec<Option<usize>>, Vec<Option<usize>>, usize);

/// Interned type keys of one depth and a representative of each type.
type LevelDictionary = (HashMap<Vec<u32>, u32>, Vec<Rep>);

/// Default cell cap of the isomorphism oracle.
pub const DEFAULT_ISO_CAP: usize = 10;

/// How attributes must correspond under an isomorphism.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ColorMode {
    /// Corresponding cells carry equal attributes.
    #[default]
    Strict,
    /// Cells with equal attributes map to cells with equal attributes.
    Classes,
}

/// Searches for a bijection between the cells of `a` and `b` that preserves
/// rank, the four neighborhood relations and colors (per `mode`).
/// Returns the image of every cell of `a`.
pub fn find_isomorphism(a: &Acc, b: &Acc, mode: ColorMode, cap: usize) -> Result<Option<Vec<usize>>> {
    let n = a.len();
    if n.max(b.len()) > cap {
        return Err(Error::SizeLimit(format!("isomorphism search is capped at {cap} cells")));
    }
    if n != b.len() {
        return Ok(None);
    }
    let types = CellTypes::of(&[a, b]);
    let degrees =
        |acc: &Acc, x: usize| -> [usize; 4] { crate::acc::NeighborhoodKind::ALL.map(|kind| acc.nbrs(x, kind).len()) };
    let fits = |x: usize, y: usize| {
        a.rank(x) == b.rank(y)
            && degrees(a, x) == degrees(b, y)
            && (mode == ColorMode::Classes || types.ids[0][x] == types.ids[1][y])
    };
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut classes: HashMap<u32, u32> = HashMap::new();
    let found = extend(a, b, mode, &types, &fits, 0, &mut image, &mut used, &mut classes);
    Ok(found.then_some(image))
}

#[allow(clippy::too_many_arguments)]
fn extend(
    a: &Acc,
    b: &Acc,
    mode: ColorMode,
    types: &CellTypes,
    fits: &dyn Fn(usize, usize) -> bool,
    x: usize,
    image: &mut [usize],
    used: &mut [bool],
    classes: &mut HashMap<u32, u32>,
) -> bool {
    if x == image.len() {
        return true;
    }
    for y in 0..used.len() {
        if used[y] || !fits(x, y) {
            continue;
        }
        if (0..x).any(|w| a.relation(x, w) != b.relation(y, image[w]) || a.relation(w, x) != b.relation(image[w], y)) {
            continue;
        }
        let (ca, cb) = (types.ids[0][x], types.ids[1][y]);
        let fresh_class = mode == ColorMode::Classes && !classes.contains_key(&ca);
        if mode == ColorMode::Classes {
            if let Some(&c) = classes.get(&ca) {
                if c != cb {
                    continue;
                }
            } else {
                classes.insert(ca, cb);
            }
        }
        image[x] = y;
        used[y] = true;
        if extend(a, b, mode, types, fits, x + 1, image, used, classes) {
            return true;
        }
        used[y] = false;
        image[x] = usize::MAX;
        if fresh_class {
            classes.remove(&ca);
        }
    }
    false
}

/// Whether `a` and `b` are isomorphic (see [`find_isomorphism`]).
pub fn are_isomorphic(a: &Acc, b: &Acc, mode: ColorMode) -> Result<bool> {
    Ok(find_isomorphism(a, b, mode, DEFAULT_ISO_CAP)?.is_some())
}

/// Largest number of partial valuations the logic oracle will visit.
pub const LOGIC_VALUATION_CAP: usize = 1 << 22;

/// Result of [`bounded_logic_equivalent`].
#[derive(Clone, Debug)]
pub struct LogicVerdict {
    pub equivalent: bool,
    /// A formula of bounded depth true on the first input and false on the
    /// second, verified by evaluation, when the inputs are not equivalent.
    pub distinguisher: Option<Formula>,
}

/// Equivalence of two complexes for all sentences with `vars` variables and
/// quantifier depth at most `depth`.
pub fn bounded_logic_equivalent(a: &Acc, b: &Acc, vars: usize, depth: usize) -> Result<LogicVerdict> {
    let empty = vec![None; vars];
    bounded_logic_equivalent_at(a, &empty, b, &empty, depth)
}

/// Equivalence of two partial valuations (slot `i - 1` holds `x_i`) for
/// all formulas over as many variables as there are slots and with
/// quantifier depth at most `depth`.
///
/// Types of partial valuations are built bottom up: depth 0 is the
/// similarity class; depth `d + 1` adds, for every ordered index pair
/// `(i, j)`, the multiset of depth-`d` types over all rebindings of
/// `x_i, x_j`. Two valuations agree on every formula of depth `d` exactly
/// when their depth-`d` types coincide, so no threshold cap is needed.
pub fn bounded_logic_equivalent_at(
    a: &Acc,
    mu_a: &[Option<usize>],
    b: &Acc,
    mu_b: &[Option<usize>],
    depth: usize,
) -> Result<LogicVerdict> {
    let vars = mu_a.len();
    if vars < 2 || mu_b.len() != vars {
        return Err(Error::InvalidArgument(
            "the logic oracle needs at least 2 variables on both sides".into(),
        ));
    }
    if mu_a.iter().zip(mu_b).any(|(x, y)| x.is_some() != y.is_some()) {
        return Err(Error::InvalidArgument(
            "the two valuations must bind the same variables".into(),
        ));
    }
    for (acc, mu) in [(a, mu_a), (b, mu_b)] {
        if mu.iter().flatten().any(|&c| c >= acc.len()) {
            return Err(Error::InvalidArgument(
                "valuation names a cell outside the complex".into(),
            ));
        }
    }
    let space = (a.len().max(b.len()) + 1)
        .checked_pow(vars as u32)
        .unwrap_or(usize::MAX);
    if space > LOGIC_VALUATION_CAP {
        return Err(Error::SizeLimit(format!(
            "{space} valuations exceed the logic oracle cap"
        )));
    }
    let mut oracle = TypeOracle {
        accs: [a, b],
        types: CellTypes::of(&[a, b]),
        pairs: (1..=vars)
            .flat_map(|i| (1..=vars).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect(),
        memo: HashMap::new(),
        dict: Vec::new(),
        builder: Builder::new(),
    };
    let (ta, tb) = (oracle.type_of(0, mu_a, depth), oracle.type_of(1, mu_b, depth));
    if ta == tb {
        return Ok(LogicVerdict {
            equivalent: true,
            distinguisher: None,
        });
    }
    let f = oracle.distinguish((0, mu_a.to_vec()), (1, mu_b.to_vec()), depth)?;
    let (va, vb) = (slots_to_valuation(mu_a), slots_to_valuation(mu_b));
    if !evaluate(a, &va, &f)? || evaluate(b, &vb, &f)? {
        return Err(Error::InvalidState(
            "the oracle's distinguishing formula failed verification".into(),
        ));
    }
    Ok(LogicVerdict {
        equivalent: false,
        distinguisher: Some(f),
    })
}

fn slots_to_valuation(slots: &[Option<usize>]) -> Valuation {
    let mut mu = Valuation::empty();
    for (i, c) in slots.iter().enumerate() {
        if let Some(c) = c {
            mu.set(i + 1, *c);
        }
    }
    mu
}

type Rep = (usize, Vec<Option<usize>>);

struct TypeOracle<'a> {
    accs: [&'a Acc; 2],
    types: CellTypes,
    pairs: Vec<(usize, usize)>,
    memo: HashMap<(usize, Vec<Option<usize>>, usize), u32>,
    /// Per depth: type key to id, and a representative of every id.
    dict: Vec<LevelDictionary>,
    builder: Builder,
}

impl TypeOracle<'_> {
    fn type_of(&mut self, g: usize, mu: &[Option<usize>], depth: usize) -> u32 {
        let memo_key = (g, mu.to_vec(), depth);
        if let Some(&t) = self.memo.get(&memo_key) {
            return t;
        }
        let key = if depth == 0 {
            let acc = self.accs[g];
            let mut key = Vec::new();
            for (i, x) in mu.iter().enumerate() {
                match x {
                    None => key.push(u32::MAX),
                    Some(x) => {
                        key.push(self.types.ids[g][*x]);
                        for y in mu[i + 1..].iter() {
                            key.push(y.map_or(u32::MAX, |y| pair_code(acc, *x, y)));
                        }
                    }
                }
            }
            key
        } else {
            let mut key = vec![self.type_of(g, mu, depth - 1)];
            for (i, j) in self.pairs.clone() {
                key.push(u32::MAX);
                key.extend(self.rebound_types(g, mu, (i, j), depth - 1));
            }
            key
        };
        while self.dict.len() <= depth {
            self.dict.push((HashMap::new(), Vec::new()));
        }
        let (ids, reps) = &mut self.dict[depth];
        let next = ids.len() as u32;
        let t = *ids.entry(key).or_insert(next);
        if t == next {
            reps.push((g, mu.to_vec()));
        }
        self.memo.insert(memo_key, t);
        t
    }

    /// Sorted depth-`depth` types of all rebindings of `x_i, x_j`.
    fn rebound_types(&mut self, g: usize, mu: &[Option<usize>], (i, j): (usize, usize), depth: usize) -> Vec<u32> {
        let n = self.accs[g].len();
        let mut out = Vec::with_capacity(n * n);
        let mut next = mu.to_vec();
        for x in 0..n {
            for y in 0..n {
                next[i - 1] = Some(x);
                next[j - 1] = Some(y);
                out.push(self.type_of(g, &next, depth));
            }
        }
        out.sort_unstable();
        out
    }

    /// A formula of depth at most `depth` true at `p` and false at `q`,
    /// whose depth-`depth` types differ.
    fn distinguish(&mut self, p: Rep, q: Rep, depth: usize) -> Result<Formula> {
        if depth > 0 && self.type_of(p.0, &p.1, depth - 1) != self.type_of(q.0, &q.1, depth - 1) {
            return self.distinguish(p, q, depth - 1);
        }
        if depth == 0 {
            return self.atom_difference(&p, &q);
        }
        for (i, j) in self.pairs.clone() {
            let tp = self.rebound_types(p.0, &p.1, (i, j), depth - 1);
            let tq = self.rebound_types(q.0, &q.1, (i, j), depth - 1);
            if tp == tq {
                continue;
            }
            let mut all: Vec<u32> = tp.iter().chain(&tq).copied().collect();
            all.sort_unstable();
            all.dedup();
            let count = |v: &[u32], t: u32| v.iter().filter(|&&x| x == t).count();
            let tau = *all
                .iter()
                .find(|&&t| count(&tp, t) != count(&tq, t))
                .expect("different multisets differ in some count");
            let rep = |s: &Self, t: u32| s.dict[depth - 1].1[t as usize].clone();
            let mut parts = Vec::new();
            for &other in &all {
                if other != tau {
                    let (r1, r2) = (rep(self, tau), rep(self, other));
                    parts.push(self.distinguish(r1, r2, depth - 1)?);
                }
            }
            let body = self.builder.and_all(parts, i)?;
            let (cp, cq) = (count(&tp, tau), count(&tq, tau));
            return if cp > cq {
                self.builder.exists(cp as u64, i, j, body)
            } else {
                let f = self.builder.exists(cq as u64, i, j, body)?;
                Ok(self.builder.not(f))
            };
        }
        Err(Error::InvalidState("types differ but no witness was found".into()))
    }

    /// An atomic formula or negated atom true at `p` and false at `q`.
    fn atom_difference(&mut self, p: &Rep, q: &Rep) -> Result<Formula> {
        let (ap, aq) = (self.accs[p.0], self.accs[q.0]);
        let width = ap.ell().max(aq.ell());
        let bound: Vec<usize> = (1..=p.1.len()).filter(|&i| p.1[i - 1].is_some()).collect();
        let cell = |r: &Rep, i: usize| r.1[i - 1].expect("bound variable");
        let mut atoms: Vec<(Formula, bool, bool)> = Vec::new();
        for &i in &bound {
            let (x, y) = (cell(p, i), cell(q, i));
            let (rx, ry) = (ap.rank(x), aq.rank(y));
            atoms.push((self.builder.rank(rx, i)?, true, rx == ry));
            for s in 1..=width {
                let (bx, by) = (ap.attr(x).padded(width).bit(s), aq.attr(y).padded(width).bit(s));
                atoms.push((self.builder.attr(s, i)?, bx, by));
            }
            for &j in &bound {
                if i == j {
                    continue;
                }
                let (x2, y2) = (cell(p, j), cell(q, j));
                atoms.push((self.builder.eq(i, j)?, x == x2, y == y2));
                for kind in crate::acc::NeighborhoodKind::ALL {
                    atoms.push((
                        self.builder.adj(kind, i, j)?,
                        ap.related(kind, x, x2),
                        aq.related(kind, y, y2),
                    ));
                }
            }
        }
        let (f, on_p, _) = atoms
            .into_iter()
            .find(|(_, vp, vq)| vp != vq)
            .ok_or_else(|| Error::InvalidState("depth-0 types differ but every atom agrees".into()))?;
        Ok(if on_p { f } else { self.builder.not(f) })
    }
}

/// Value of the `pebbles`-pebble game played for `rounds` rounds from the
/// empty board, by literal enumeration of Player I's pair sets over full
/// valuations (no guards, no refinement classes).
pub fn exhaustive_game_value(
    a: &Acc,
    b: &Acc,
    pebbles: usize,
    rounds: usize,
    rules: Rules,
    cap: usize,
) -> Result<Winner> {
    for acc in [a, b] {
        if acc.len() * acc.len() > cap {
            return Err(Error::SizeLimit(format!("game enumeration needs |X|² ≤ {cap}")));
        }
    }
    if pebbles < 2 {
        return Err(Error::InvalidArgument("the game needs at least 2 pebbles".into()));
    }
    let mut game = Literal {
        accs: [a, b],
        pebbles,
        rules,
        memo: HashMap::new(),
    };
    let empty = vec![None; pebbles];
    Ok(if game.survives(&empty, &empty, rounds) {
        Winner::PlayerII
    } else {
        Winner::PlayerI
    })
}

struct Literal<'a> {
    accs: [&'a Acc; 2],
    pebbles: usize,
    rules: Rules,
    memo: HashMap<PositionKey, bool>,
}

impl Literal<'_> {
    fn valuation(slots: &[Option<usize>]) -> Valuation {
        let mut mu = Valuation::empty();
        for (i, c) in slots.iter().enumerate() {
            if let Some(c) = c {
                mu.set(i + 1, *c);
            }
        }
        mu
    }

    fn survives(&mut self, mu_a: &[Option<usize>], mu_b: &[Option<usize>], r: usize) -> bool {
        let key = (mu_a.to_vec(), mu_b.to_vec(), r);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = similarity(
            self.accs[0],
            &Self::valuation(mu_a),
            self.accs[1],
            &Self::valuation(mu_b),
        )
        .is_ok()
            && (r == 0
                || [Side::A, Side::B]
                    .into_iter()
                    .all(|side| self.answers_every_set(mu_a, mu_b, side, r)));
        self.memo.insert(key, v);
        v
    }

    /// Player II can answer every set Player I may choose on `side`.
    fn answers_every_set(&mut self, mu_a: &[Option<usize>], mu_b: &[Option<usize>], side: Side, r: usize) -> bool {
        let (mine, theirs) = match side {
            Side::A => (self.accs[0].len(), self.accs[1].len()),
            Side::B => (self.accs[1].len(), self.accs[0].len()),
        };
        let mine: Vec<(usize, usize)> = (0..mine).flat_map(|x| (0..mine).map(move |y| (x, y))).collect();
        let theirs: Vec<(usize, usize)> = (0..theirs).flat_map(|x| (0..theirs).map(move |y| (x, y))).collect();
        let indices: Vec<(usize, usize)> = (1..=self.pebbles)
            .flat_map(|i| (1..=self.pebbles).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        // ok[t][s][ij]: after Player I takes t with pebbles ij, the answer s survives.
        let mut ok = vec![vec![vec![false; indices.len()]; mine.len()]; theirs.len()];
        for (ti, &t) in theirs.iter().enumerate() {
            for (si, &s) in mine.iter().enumerate() {
                for (k, &(i, j)) in indices.iter().enumerate() {
                    let (pa, pb) = if side == Side::A { (s, t) } else { (t, s) };
                    let mut na = mu_a.to_vec();
                    let mut nb = mu_b.to_vec();
                    na[i - 1] = Some(pa.0);
                    na[j - 1] = Some(pa.1);
                    nb[i - 1] = Some(pb.0);
                    nb[j - 1] = Some(pb.1);
                    ok[ti][si][k] = self.survives(&na, &nb, r - 1);
                }
            }
        }
        let answerable = |set: &[usize], t: usize| {
            (0..indices.len()).all(|k| match self.rules {
                Rules::InChosenSet => set.iter().any(|&s| ok[t][s][k]),
                Rules::AsWritten => (0..mine.len()).any(|s| ok[t][s][k]),
            })
        };
        for mask in 1u64..(1u64 << mine.len()) {
            let set: Vec<usize> = (0..mine.len()).filter(|&s| mask >> s & 1 == 1).collect();
            let usable = (0..theirs.len()).filter(|&t| answerable(&set, t)).count();
            if usable < set.len() {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acc::{lift_graph, Graph};

    fn lifted(n: usize, edges: &[(u32, u32)]) -> Acc {
        lift_graph(&Graph::uncolored(n, edges.to_vec()).unwrap())
    }

    #[test]
    fn relabeled_graphs_are_isomorphic() {
        let a = lifted(4, &[(0, 1), (1, 2), (2, 3)]);
        let b = lifted(4, &[(3, 1), (1, 0), (0, 2)]);
        let f = find_isomorphism(&a, &b, ColorMode::Strict, DEFAULT_ISO_CAP)
            .unwrap()
            .unwrap();
        for x in 0..a.len() {
            for y in 0..a.len() {
                assert_eq!(a.relation(x, y), b.relation(f[x], f[y]));
            }
        }
    }

    #[test]
    fn path_and_star_are_not_isomorphic() {
        let a = lifted(4, &[(0, 1), (1, 2), (2, 3)]);
        let b = lifted(4, &[(0, 1), (0, 2), (0, 3)]);
        assert!(!are_isomorphic(&a, &b, ColorMode::Strict).unwrap());
    }

    #[test]
    fn iso_cap_is_enforced() {
        let a = lifted(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
        assert!(matches!(
            are_isomorphic(&a, &a, ColorMode::Strict),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn logic_oracle_separates_path_from_star() {
        let a = lifted(4, &[(0, 1), (1, 2), (2, 3)]);
        let b = lifted(4, &[(0, 1), (0, 2), (0, 3)]);
        // Same cell counts, but the star has more ordered pairs of adjacent edges.
        assert!(bounded_logic_equivalent(&a, &b, 2, 0).unwrap().equivalent);
        let verdict = bounded_logic_equivalent(&a, &b, 2, 1).unwrap();
        assert!(!verdict.equivalent);
        assert_eq!(verdict.distinguisher.unwrap().quantifier_depth(), 1);
        assert!(bounded_logic_equivalent(&a, &a, 3, 2).unwrap().equivalent);
    }

    #[test]
    fn literal_game_on_tiny_complexes() {
        let edge = lifted(2, &[(0, 1)]);
        let loose = Acc::new(3, 1, {
            let mut cells = Vec::new();
            for v in 0..3u32 {
                cells.push(crate::acc::Cell::new(vec![v], 0, crate::acc::Attr::zeros(1)));
            }
            cells
        })
        .unwrap();
        assert_eq!(
            exhaustive_game_value(&edge, &edge, 3, 2, Rules::InChosenSet, 12).unwrap(),
            Winner::PlayerII
        );
        assert_eq!(
            exhaustive_game_value(&edge, &loose, 3, 1, Rules::InChosenSet, 12).unwrap(),
            Winner::PlayerI
        );
    }
}
