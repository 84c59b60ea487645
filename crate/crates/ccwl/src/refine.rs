//! Color refinement on tuples of cells.
//!
//! Arity 1 uses the cellular update that aggregates boundary, coboundary,
//! lower and upper neighborhoods. Arity `k >= 2` uses the tuple update whose
//! contexts range over all pairs of cells `(α, β)` and record the atomic type
//! of `x α β` together with the colors of the substituted tuples `x[α/i]` and
//! `x[β/i]`. Two complexes are always refined jointly so that color ids are
//! comparable; ids are dense and assigned in order of first appearance while
//! scanning the complexes in order and their tuples lexicographically.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::acc::{add_anchor, Acc, Attr, Graph, NeighborhoodKind};
use crate::error::{Error, Result};

/// Fingerprint of a tuple of cells: ranks, attributes and every pairwise relation.
///
/// Pair vectors are indexed by ordered pairs `(i, j)` with `i != j` in
/// lexicographic order (see [`ordered_pairs`]); `eq_vec` uses only `i < j`
/// (see [`increasing_pairs`]). Bit `(i, j)` of `b_vec` records that `x_j` lies
/// in the boundary of `x_i`, and likewise for the other three kinds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomicType {
    pub rank_seq: Vec<u32>,
    pub colors: Vec<Attr>,
    pub eq_vec: Vec<bool>,
    pub b_vec: Vec<bool>,
    pub c_vec: Vec<bool>,
    pub down_vec: Vec<bool>,
    pub up_vec: Vec<bool>,
}

/// Ordered pairs `(i, j)`, `i != j`, over `0..k` in lexicographic order.
pub fn ordered_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k)
        .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// Pairs `(i, j)` with `i < j` over `0..k` in lexicographic order.
pub fn increasing_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect()
}

impl AtomicType {
    /// Arity of the tuple.
    pub fn k(&self) -> usize {
        self.rank_seq.len()
    }

    /// Relation vector for a neighborhood kind.
    pub fn adjacency(&self, kind: NeighborhoodKind) -> &[bool] {
        match kind {
            NeighborhoodKind::Boundary => &self.b_vec,
            NeighborhoodKind::Coboundary => &self.c_vec,
            NeighborhoodKind::Lower => &self.down_vec,
            NeighborhoodKind::Upper => &self.up_vec,
        }
    }

    /// Bit for the ordered pair `(i, j)` (0-based) of a kind.
    pub fn adjacent(&self, kind: NeighborhoodKind, i: usize, j: usize) -> bool {
        let k = self.k();
        let pos = i * (k - 1) + if j < i { j } else { j - 1 };
        self.adjacency(kind)[pos]
    }

    /// Equality bit for positions `i` and `j` (0-based, any order).
    pub fn equal(&self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        let (i, j) = (i.min(j), i.max(j));
        let k = self.k();
        let pos = i * (2 * k - i - 1) / 2 + (j - i - 1);
        self.eq_vec[pos]
    }

    /// Canonical text: ranks, attributes, then the five relation vectors.
    pub fn serialize(&self) -> String {
        let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        let ranks: Vec<String> = self.rank_seq.iter().map(|r| r.to_string()).collect();
        let colors: Vec<String> = self.colors.iter().map(|c| c.to_string()).collect();
        format!(
            "{}|{}|{}|{}|{}|{}|{}",
            ranks.join(","),
            colors.join(","),
            bits(&self.eq_vec),
            bits(&self.b_vec),
            bits(&self.c_vec),
            bits(&self.down_vec),
            bits(&self.up_vec)
        )
    }

    /// Checks the internal consistency conditions: vector lengths, boundary and
    /// coboundary duality, symmetric lower and upper bits, and that equal
    /// positions carry equal ranks, attributes and relation rows.
    pub fn is_consistent(&self) -> bool {
        let k = self.k();
        let np = k * k.saturating_sub(1);
        if self.colors.len() != k
            || self.eq_vec.len() != np / 2
            || [&self.b_vec, &self.c_vec, &self.down_vec, &self.up_vec]
                .iter()
                .any(|v| v.len() != np)
        {
            return false;
        }
        for (i, j) in ordered_pairs(k) {
            if self.adjacent(NeighborhoodKind::Boundary, i, j) != self.adjacent(NeighborhoodKind::Coboundary, j, i)
                || self.adjacent(NeighborhoodKind::Lower, i, j) != self.adjacent(NeighborhoodKind::Lower, j, i)
                || self.adjacent(NeighborhoodKind::Upper, i, j) != self.adjacent(NeighborhoodKind::Upper, j, i)
            {
                return false;
            }
            if self.equal(i, j) {
                if self.rank_seq[i] != self.rank_seq[j] || self.colors[i] != self.colors[j] {
                    return false;
                }
                if NeighborhoodKind::ALL.iter().any(|&kind| self.adjacent(kind, i, j)) {
                    return false;
                }
                for m in (0..k).filter(|&m| m != i && m != j) {
                    if self.equal(i, m) != self.equal(j, m) {
                        return false;
                    }
                    for kind in NeighborhoodKind::ALL {
                        if self.adjacent(kind, i, m) != self.adjacent(kind, j, m)
                            || self.adjacent(kind, m, i) != self.adjacent(kind, m, j)
                        {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Atomic type of a tuple of cells of one complex.
pub fn atomic_type(acc: &Acc, tuple: &[usize]) -> Result<AtomicType> {
    if tuple.is_empty() {
        return Err(Error::InvalidArgument("atomic types need at least one position".into()));
    }
    if let Some(&bad) = tuple.iter().find(|&&x| x >= acc.len()) {
        return Err(Error::InvalidArgument(format!("cell index {bad} out of range")));
    }
    let k = tuple.len();
    let mut t = AtomicType {
        rank_seq: tuple.iter().map(|&x| acc.rank(x)).collect(),
        colors: tuple.iter().map(|&x| acc.attr(x).clone()).collect(),
        eq_vec: increasing_pairs(k).iter().map(|&(i, j)| tuple[i] == tuple[j]).collect(),
        ..AtomicType::default_empty()
    };
    for (i, j) in ordered_pairs(k) {
        let rel = acc.relation(tuple[i], tuple[j]);
        t.b_vec.push(rel & NeighborhoodKind::Boundary.bit() != 0);
        t.c_vec.push(rel & NeighborhoodKind::Coboundary.bit() != 0);
        t.down_vec.push(rel & NeighborhoodKind::Lower.bit() != 0);
        t.up_vec.push(rel & NeighborhoodKind::Upper.bit() != 0);
    }
    Ok(t)
}

impl AtomicType {
    fn default_empty() -> Self {
        AtomicType {
            rank_seq: Vec::new(),
            colors: Vec::new(),
            eq_vec: Vec::new(),
            b_vec: Vec::new(),
            c_vec: Vec::new(),
            down_vec: Vec::new(),
            up_vec: Vec::new(),
        }
    }
}

/// Number of `k`-tuples over `n` elements, or `None` on overflow.
pub fn tuple_count(n: usize, k: usize) -> Option<usize> {
    n.checked_pow(k as u32)
}

/// Decodes a tuple index (first position most significant).
pub fn decode_tuple(mut index: usize, n: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
    out
}

/// Encodes a tuple into its index (first position most significant).
pub fn encode_tuple(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &x| acc * n + x)
}

/// Shared view of the complexes of one joint run: the arity and a cell-type
/// id per cell, computed from rank and attribute (padded to the widest
/// attribute) with ids in sorted order of the distinct types.
#[derive(Clone, Debug)]
pub struct CellTypes {
    pub width: usize,
    pub ids: Vec<Vec<u32>>,
    pub types: Vec<(u32, Attr)>,
}

impl CellTypes {
    /// Cell types of every cell of the given complexes.
    pub fn of(accs: &[&Acc]) -> Self {
        let width = accs.iter().map(|a| a.ell()).max().unwrap_or(0);
        let mut types: Vec<(u32, Attr)> = accs
            .iter()
            .flat_map(|a| a.cells().iter().map(|c| (c.rank, c.attr.padded(width))))
            .collect();
        types.sort();
        types.dedup();
        let ids = accs
            .iter()
            .map(|a| {
                a.cells()
                    .iter()
                    .map(|c| {
                        types
                            .binary_search(&(c.rank, c.attr.padded(width)))
                            .expect("every cell type was collected") as u32
                    })
                    .collect()
            })
            .collect();
        CellTypes { width, ids, types }
    }
}

/// Relation code of an ordered pair of cells: equality bit plus the
/// relation bits in both directions.
pub fn pair_code(acc: &Acc, x: usize, y: usize) -> u32 {
    (x == y) as u32 | (acc.relation(x, y) as u32) << 1 | (acc.relation(y, x) as u32) << 5
}

/// A coloring of the `k`-tuples of one or two complexes at some round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleColoring {
    pub k: usize,
    pub round: usize,
    /// `colors[g][t]` is the color of tuple index `t` of structure `g`.
    pub colors: Vec<Vec<u32>>,
    /// Number of distinct colors in use (ids are `0..num_colors`).
    pub num_colors: usize,
}

impl TupleColoring {
    /// Color of a tuple of structure `g`.
    pub fn color(&self, g: usize, tuple: &[usize], n: usize) -> u32 {
        self.colors[g][encode_tuple(tuple, n)]
    }
}

/// Assigns dense ids to keys in scan order.
struct Dictionary<K> {
    ids: HashMap<K, u32>,
}

impl<K: std::hash::Hash + Eq> Dictionary<K> {
    fn new() -> Self {
        Dictionary { ids: HashMap::new() }
    }

    fn id(&mut self, key: K) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(next)
    }

    fn len(&self) -> usize {
        self.ids.len()
    }
}

/// Initial coloring: atomic types of all `k`-tuples.
pub fn initial_coloring(accs: &[&Acc], k: usize) -> Result<TupleColoring> {
    if k == 0 {
        return Err(Error::InvalidArgument("arity must be at least 1".into()));
    }
    let types = CellTypes::of(accs);
    let mut dict = Dictionary::new();
    let mut colors = Vec::with_capacity(accs.len());
    for (g, acc) in accs.iter().enumerate() {
        let n = acc.len();
        let count = tuple_count(n, k).ok_or_else(|| Error::SizeLimit("tuple count overflows".into()))?;
        let mut col = Vec::with_capacity(count);
        let pairs = increasing_pairs(k);
        for t in 0..count {
            let tuple = decode_tuple(t, n, k);
            let mut key: Vec<u32> = tuple.iter().map(|&x| types.ids[g][x]).collect();
            key.extend(pairs.iter().map(|&(i, j)| pair_code(acc, tuple[i], tuple[j])));
            col.push(dict.id(key));
        }
        colors.push(col);
    }
    Ok(TupleColoring {
        k,
        round: 0,
        num_colors: dict.len(),
        colors,
    })
}

/// One step of the cellular update for arity 1.
///
/// The new key of a cell is its old color together with the sorted colors of
/// its boundary and coboundary, the sorted color pairs `(χ(y), χ(z))` of its
/// lower neighbors `y` with shared boundary cells `z`, and likewise for upper
/// neighbors with shared coboundary cells.
pub fn ccwl_step(accs: &[&Acc], coloring: &TupleColoring) -> Result<TupleColoring> {
    if coloring.k != 1 {
        return Err(Error::InvalidArgument(format!(
            "the cellular update needs arity 1, got {}",
            coloring.k
        )));
    }
    check_cover(accs.iter().map(|a| a.len()), coloring)?;
    let mut dict = Dictionary::new();
    let mut colors = Vec::with_capacity(accs.len());
    for (g, acc) in accs.iter().enumerate() {
        let chi = &coloring.colors[g];
        let mut col = Vec::with_capacity(acc.len());
        for x in 0..acc.len() {
            let mut ctx: Vec<u64> = Vec::new();
            for &y in acc.nbrs(x, NeighborhoodKind::Boundary) {
                ctx.push(chi[y] as u64);
            }
            for &y in acc.nbrs(x, NeighborhoodKind::Coboundary) {
                ctx.push(1 << 62 | chi[y] as u64);
            }
            for &(y, z) in acc.lower_pairs(x) {
                ctx.push(2 << 62 | (chi[y] as u64) << 31 | chi[z] as u64);
            }
            for &(y, z) in acc.upper_pairs(x) {
                ctx.push(3 << 62 | (chi[y] as u64) << 31 | chi[z] as u64);
            }
            ctx.sort_unstable();
            col.push(dict.id((chi[x], ctx)));
        }
        colors.push(col);
    }
    Ok(TupleColoring {
        k: 1,
        round: coloring.round + 1,
        num_colors: dict.len(),
        colors,
    })
}

/// One step of the tuple update for arity `k >= 2`.
///
/// For a tuple `x` every cell `α` of the same complex gets an element code
/// made of its relations to each `x_i`, its cell type and the colors of
/// `x[α/i]` for every `i`. The context of a pair `(α, β)` is the pair of
/// element codes plus the relation between `α` and `β`; together these
/// determine the atomic type of `x α β` and the double shift sequence. The
/// new key is the old color plus the sorted multiset of contexts.
pub fn kccwl_step(accs: &[&Acc], coloring: &TupleColoring) -> Result<TupleColoring> {
    let k = coloring.k;
    if k < 2 {
        return Err(Error::InvalidArgument(
            "the tuple update needs arity at least 2; use the cellular update for arity 1".into(),
        ));
    }
    check_cover(
        accs.iter().map(|a| tuple_count(a.len(), k).unwrap_or(usize::MAX)),
        coloring,
    )?;
    let types = CellTypes::of(accs);
    let mut elements: Dictionary<Vec<u32>> = Dictionary::new();
    let mut dict = Dictionary::new();
    let mut colors = Vec::with_capacity(accs.len());
    for (g, acc) in accs.iter().enumerate() {
        let n = acc.len();
        let chi = &coloring.colors[g];
        let count = chi.len();
        let weights: Vec<usize> = (0..k).map(|i| n.pow((k - 1 - i) as u32)).collect();
        let mut pair_rel = vec![0u64; n * n];
        for a in 0..n {
            for b in 0..n {
                pair_rel[a * n + b] = pair_code(acc, a, b) as u64;
            }
        }
        let mut col = Vec::with_capacity(count);
        let mut uid = vec![0u64; n];
        let mut ctx = Vec::with_capacity(n * n);
        let mut code = Vec::with_capacity(2 * k + 1);
        for t in 0..count {
            let tuple = decode_tuple(t, n, k);
            for (alpha, slot) in uid.iter_mut().enumerate() {
                code.clear();
                code.extend(tuple.iter().map(|&x| pair_code(acc, x, alpha)));
                code.push(types.ids[g][alpha]);
                for i in 0..k {
                    let shifted = t + alpha * weights[i] - tuple[i] * weights[i];
                    code.push(chi[shifted]);
                }
                *slot = elements.id(code.clone()) as u64;
            }
            ctx.clear();
            for alpha in 0..n {
                let head = uid[alpha] << 36;
                for beta in 0..n {
                    ctx.push(head | uid[beta] << 9 | pair_rel[alpha * n + beta]);
                }
            }
            ctx.sort_unstable();
            col.push(dict.id((chi[t], ctx.clone())));
        }
        colors.push(col);
    }
    Ok(TupleColoring {
        k,
        round: coloring.round + 1,
        num_colors: dict.len(),
        colors,
    })
}

fn check_cover(sizes: impl Iterator<Item = usize>, coloring: &TupleColoring) -> Result<()> {
    let sizes: Vec<usize> = sizes.collect();
    if sizes.len() != coloring.colors.len() || sizes.iter().zip(&coloring.colors).any(|(&s, c)| s != c.len()) {
        return Err(Error::InvalidArgument(
            "the coloring does not cover the supplied structures".into(),
        ));
    }
    Ok(())
}

/// Relation between two stable global signatures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignatureRelation {
    Equal,
    Disjoint,
    PartialOverlap,
}

/// Overall verdict of a comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equal,
    Distinguished,
    /// The round limit was reached before stabilization without a divergence.
    Inconclusive,
}

/// Per-round colorings of a joint refinement run.
#[derive(Clone, Debug)]
pub struct RefinementTrace {
    pub k: usize,
    /// Number of cells (or vertices) of each structure.
    pub sizes: Vec<usize>,
    /// `rounds[t]` is the coloring after `t` refinement steps, for `t` up to the stable round.
    pub rounds: Vec<TupleColoring>,
    /// First round `T` whose partition equals the next one; `None` if the limit stopped the run.
    pub stable_round: Option<usize>,
    /// First round at which the global signatures of the two structures differ.
    pub first_divergence: Option<usize>,
    pub elapsed: Duration,
    /// Wall time of each computed refinement step.
    pub step_times: Vec<Duration>,
}

impl RefinementTrace {
    /// Number of structures in the run.
    pub fn structures(&self) -> usize {
        self.sizes.len()
    }

    /// Last stored round.
    pub fn last_round(&self) -> usize {
        self.rounds.len() - 1
    }

    /// Coloring at round `t`, clamped to the last stored round (colors no longer change after it).
    pub fn colors_at(&self, t: usize) -> &TupleColoring {
        &self.rounds[t.min(self.last_round())]
    }

    /// Color of a tuple of structure `g` at round `t`.
    pub fn color(&self, t: usize, g: usize, tuple: &[usize]) -> u32 {
        self.colors_at(t).color(g, tuple, self.sizes[g])
    }

    /// Global signature of structure `g` at round `t`: `(color, multiplicity)` sorted by color.
    pub fn signature(&self, t: usize, g: usize) -> Vec<(u32, usize)> {
        histogram(&self.colors_at(t).colors[g])
    }

    /// Number of tuples in the joint universe.
    pub fn joint_tuple_count(&self) -> usize {
        self.rounds[0].colors.iter().map(|c| c.len()).sum()
    }

    /// Relation between the two signatures at the last stored round.
    pub fn signature_relation(&self) -> Result<SignatureRelation> {
        if self.structures() != 2 {
            return Err(Error::InvalidArgument("signature relations need two structures".into()));
        }
        let t = self.last_round();
        Ok(relate(&self.signature(t, 0), &self.signature(t, 1)))
    }

    /// Verdict of the comparison.
    pub fn verdict(&self) -> Verdict {
        if self.first_divergence.is_some() {
            Verdict::Distinguished
        } else if self.stable_round.is_some() {
            Verdict::Equal
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Sorted histogram of color ids.
pub fn histogram(colors: &[u32]) -> Vec<(u32, usize)> {
    let mut sorted = colors.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<(u32, usize)> = Vec::new();
    for c in sorted {
        match out.last_mut() {
            Some((last, m)) if *last == c => *m += 1,
            _ => out.push((c, 1)),
        }
    }
    out
}

/// Compares two signatures as multisets.
pub fn relate(a: &[(u32, usize)], b: &[(u32, usize)]) -> SignatureRelation {
    if a == b {
        return SignatureRelation::Equal;
    }
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return SignatureRelation::PartialOverlap,
        }
    }
    SignatureRelation::Disjoint
}

/// Runs rounds produced by `step` until the joint partition stops changing
/// or `max_rounds` steps have been computed.
fn run<F>(
    sizes: Vec<usize>,
    k: usize,
    first: TupleColoring,
    max_rounds: Option<usize>,
    mut step: F,
) -> Result<RefinementTrace>
where
    F: FnMut(&TupleColoring) -> Result<TupleColoring>,
{
    let start = Instant::now();
    let mut rounds = vec![first];
    let mut stable_round = None;
    let mut step_times = Vec::new();
    loop {
        let current = rounds.last().expect("at least one round");
        if max_rounds.is_some_and(|m| current.round >= m) {
            break;
        }
        let t0 = Instant::now();
        let next = step(current)?;
        step_times.push(t0.elapsed());
        if next.num_colors == current.num_colors {
            stable_round = Some(current.round);
            break;
        }
        rounds.push(next);
    }
    let trace_first_divergence = if sizes.len() == 2 {
        rounds
            .iter()
            .position(|r| histogram(&r.colors[0]) != histogram(&r.colors[1]))
    } else {
        None
    };
    let trace = RefinementTrace {
        k,
        sizes,
        rounds,
        stable_round,
        first_divergence: trace_first_divergence,
        elapsed: start.elapsed(),
        step_times,
    };
    if let Some(t) = trace.stable_round {
        let bound = trace.joint_tuple_count().saturating_sub(1);
        assert!(
            t <= bound,
            "stabilization round {t} exceeds the termination bound {bound}"
        );
    }
    Ok(trace)
}

/// Jointly refines one or two complexes at arity `k` until stable.
pub fn refine(accs: &[&Acc], k: usize, max_rounds: Option<usize>) -> Result<RefinementTrace> {
    if accs.is_empty() || accs.len() > 2 {
        return Err(Error::InvalidArgument("refinement takes one or two complexes".into()));
    }
    let first = initial_coloring(accs, k)?;
    let sizes = accs.iter().map(|a| a.len()).collect();
    if k == 1 {
        run(sizes, k, first, max_rounds, |c| ccwl_step(accs, c))
    } else {
        run(sizes, k, first, max_rounds, |c| kccwl_step(accs, c))
    }
}

/// Options for [`refine_to_stable`].
#[derive(Clone, Copy, Debug, Default)]
pub struct RefineOptions {
    pub use_anchor: bool,
    pub max_rounds: Option<usize>,
}

/// Result of [`refine_to_stable`]: the trace plus the complexes actually refined.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub trace: RefinementTrace,
    pub complexes: Vec<Acc>,
    /// Human-readable warnings (for example non-uniform inputs in anchored mode).
    pub warnings: Vec<String>,
}

/// Refines `a` (and `b` when given) at arity `k`, optionally anchoring both first.
pub fn refine_to_stable(a: &Acc, b: Option<&Acc>, k: usize, options: RefineOptions) -> Result<Comparison> {
    let mut complexes = vec![a.clone()];
    if let Some(b) = b {
        complexes.push(b.clone());
    }
    let mut warnings = Vec::new();
    if options.use_anchor {
        for (i, c) in complexes.iter().enumerate() {
            if let crate::acc::Uniformity::NotUniform { witness } = c.uniformity() {
                warnings.push(format!(
                    "input {} is not uniform (cell {:?} has no chain to rank 0); identical-or-disjoint signatures are not guaranteed",
                    i + 1,
                    c.cell(witness).vertices
                ));
            }
        }
        complexes = complexes.iter().map(add_anchor).collect::<Result<Vec<_>>>()?;
    }
    let refs: Vec<&Acc> = complexes.iter().collect();
    let trace = refine(&refs, k, options.max_rounds)?;
    Ok(Comparison {
        trace,
        complexes,
        warnings,
    })
}

/// Relation code of an ordered vertex pair: equality and adjacency.
fn graph_pair_code(g: &Graph, u: usize, v: usize) -> u32 {
    (u == v) as u32 | (g.adjacent(u, v) as u32) << 1
}

/// Jointly refines two graphs with classical `k`-WL: the new key of a vertex
/// tuple `v` is its old color plus the multiset over vertices `u` of the
/// atomic type of `(v, u)` and the colors of `v[u/i]` for every `i`.
pub fn kwl_refine(g: &Graph, h: &Graph, k: usize, max_rounds: Option<usize>) -> Result<RefinementTrace> {
    if k == 0 {
        return Err(Error::InvalidArgument("arity must be at least 1".into()));
    }
    let graphs = [g, h];
    let width = g.ell().max(h.ell());
    let mut color_types: Vec<Attr> = graphs
        .iter()
        .flat_map(|gr| (0..gr.vertex_count()).map(|v| gr.color(v).padded(width)))
        .collect();
    color_types.sort();
    color_types.dedup();
    let ctype: Vec<Vec<u32>> = graphs
        .iter()
        .map(|gr| {
            (0..gr.vertex_count())
                .map(|v| {
                    color_types
                        .binary_search(&gr.color(v).padded(width))
                        .expect("collected") as u32
                })
                .collect()
        })
        .collect();
    let mut dict = Dictionary::new();
    let mut colors = Vec::new();
    let pairs = increasing_pairs(k);
    for (gi, gr) in graphs.iter().enumerate() {
        let n = gr.vertex_count();
        let count = tuple_count(n, k).ok_or_else(|| Error::SizeLimit("tuple count overflows".into()))?;
        let mut col = Vec::with_capacity(count);
        for t in 0..count {
            let tuple = decode_tuple(t, n, k);
            let mut key: Vec<u32> = tuple.iter().map(|&v| ctype[gi][v]).collect();
            key.extend(pairs.iter().map(|&(i, j)| graph_pair_code(gr, tuple[i], tuple[j])));
            col.push(dict.id(key));
        }
        colors.push(col);
    }
    let first = TupleColoring {
        k,
        round: 0,
        num_colors: dict.len(),
        colors,
    };
    let sizes = vec![g.vertex_count(), h.vertex_count()];
    run(sizes, k, first, max_rounds, |coloring| {
        let mut elements: Dictionary<Vec<u32>> = Dictionary::new();
        let mut dict = Dictionary::new();
        let mut colors = Vec::new();
        for (gi, gr) in graphs.iter().enumerate() {
            let n = gr.vertex_count();
            let chi = &coloring.colors[gi];
            let weights: Vec<usize> = (0..k).map(|i| n.pow((k - 1 - i) as u32)).collect();
            let mut col = Vec::with_capacity(chi.len());
            let mut multiset = Vec::with_capacity(n);
            for t in 0..chi.len() {
                let tuple = decode_tuple(t, n, k);
                multiset.clear();
                for u in 0..n {
                    let mut code: Vec<u32> = tuple.iter().map(|&v| graph_pair_code(gr, v, u)).collect();
                    code.push(ctype[gi][u]);
                    for i in 0..k {
                        code.push(chi[t + u * weights[i] - tuple[i] * weights[i]]);
                    }
                    multiset.push(elements.id(code));
                }
                multiset.sort_unstable();
                col.push(dict.id((chi[t], multiset.clone())));
            }
            colors.push(col);
        }
        Ok(TupleColoring {
            k,
            round: coloring.round + 1,
            num_colors: dict.len(),
            colors,
        })
    })
}

/// Serializable summary of a refinement run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub version: u32,
    pub k: usize,
    pub anchored: bool,
    pub inputs: Vec<String>,
    pub sizes: Vec<usize>,
    pub rounds_computed: usize,
    pub stable_round: Option<usize>,
    pub first_divergence: Option<usize>,
    pub verdict: Option<Verdict>,
    pub relation: Option<SignatureRelation>,
    pub signatures: Vec<RoundSignatures>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// Signature histograms of every structure at one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSignatures {
    pub round: usize,
    pub histograms: Vec<Vec<(u32, usize)>>,
}

impl TraceDocument {
    /// Summarizes a trace. `inputs` names the inputs (for example content hashes).
    pub fn from_trace(trace: &RefinementTrace, anchored: bool, inputs: Vec<String>, timing: bool) -> Self {
        let two = trace.structures() == 2;
        TraceDocument {
            version: 1,
            k: trace.k,
            anchored,
            inputs,
            sizes: trace.sizes.clone(),
            rounds_computed: trace.last_round(),
            stable_round: trace.stable_round,
            first_divergence: trace.first_divergence,
            verdict: two.then(|| trace.verdict()),
            relation: if two && trace.stable_round.is_some() {
                trace.signature_relation().ok()
            } else {
                None
            },
            signatures: (0..trace.rounds.len())
                .map(|t| RoundSignatures {
                    round: t,
                    histograms: (0..trace.structures()).map(|g| trace.signature(t, g)).collect(),
                })
                .collect(),
            wall_time_ms: timing.then_some(trace.elapsed.as_secs_f64() * 1000.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acc::{lift_graph, Cell};

    fn cycle(n: u32) -> Graph {
        Graph::uncolored(n as usize, (0..n).map(|i| (i, (i + 1) % n)).collect()).unwrap()
    }

    fn two_triangles() -> Graph {
        Graph::uncolored(6, vec![(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    #[test]
    fn pair_orders_are_lexicographic() {
        assert_eq!(ordered_pairs(3), vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
        assert_eq!(increasing_pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn arity_one_atomic_type_has_no_pairs() {
        let acc = lift_graph(&cycle(3));
        let t = atomic_type(&acc, &[0]).unwrap();
        assert_eq!(t.rank_seq, vec![0]);
        assert!(t.eq_vec.is_empty() && t.b_vec.is_empty());
        assert!(t.is_consistent());
    }

    #[test]
    fn repeated_cell_has_equality_and_no_adjacency() {
        let acc = lift_graph(&cycle(3));
        let t = atomic_type(&acc, &[4, 4]).unwrap();
        assert_eq!(t.eq_vec, vec![true]);
        assert_eq!(t.rank_seq, vec![1, 1]);
        assert!(t
            .b_vec
            .iter()
            .chain(&t.c_vec)
            .chain(&t.down_vec)
            .chain(&t.up_vec)
            .all(|&b| !b));
    }

    #[test]
    fn vertex_edge_tuple_direction() {
        let acc = lift_graph(&Graph::uncolored(2, vec![(0, 1)]).unwrap());
        let e = acc.find(&[0, 1]).unwrap();
        let t = atomic_type(&acc, &[0, e]).unwrap();
        // Position 2 (the edge) is not in the boundary of position 1 (the vertex),
        // while position 1 is in the boundary of position 2.
        assert!(!t.adjacent(NeighborhoodKind::Boundary, 0, 1));
        assert!(t.adjacent(NeighborhoodKind::Boundary, 1, 0));
        assert!(t.adjacent(NeighborhoodKind::Coboundary, 0, 1));
        assert_eq!(t.rank_seq, vec![0, 1]);
    }

    #[test]
    fn cycle_lift_stabilizes_with_one_color_per_rank() {
        let acc = lift_graph(&cycle(6));
        let trace = refine(&[&acc], 1, None).unwrap();
        assert_eq!(trace.stable_round, Some(0));
        assert_eq!(trace.rounds[0].num_colors, 2);
    }

    #[test]
    fn single_cell_never_changes() {
        let acc = Acc::new(1, 1, vec![Cell::new(vec![0], 0, Attr::zeros(1))]).unwrap();
        for k in 1..=2 {
            let trace = refine(&[&acc], k, None).unwrap();
            assert_eq!(trace.stable_round, Some(0));
        }
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let acc = lift_graph(&cycle(3));
        let c2 = initial_coloring(&[&acc], 2).unwrap();
        assert!(ccwl_step(&[&acc], &c2).is_err());
        let c1 = initial_coloring(&[&acc], 1).unwrap();
        assert!(kccwl_step(&[&acc], &c1).is_err());
    }

    #[test]
    fn cycle_versus_triangles() {
        let (a, b) = (lift_graph(&cycle(6)), lift_graph(&two_triangles()));
        let opts = RefineOptions {
            use_anchor: true,
            max_rounds: None,
        };
        let k1 = refine_to_stable(&a, Some(&b), 1, opts).unwrap();
        assert_eq!(k1.trace.signature_relation().unwrap(), SignatureRelation::Equal);
        let k2 = refine_to_stable(&a, Some(&b), 2, opts).unwrap();
        assert_eq!(k2.trace.signature_relation().unwrap(), SignatureRelation::Disjoint);
        assert_eq!(
            kwl_refine(&cycle(6), &two_triangles(), 1, None).unwrap().verdict(),
            Verdict::Equal
        );
        assert_eq!(
            kwl_refine(&cycle(6), &two_triangles(), 2, None).unwrap().verdict(),
            Verdict::Distinguished
        );
    }

    #[test]
    fn relate_cases() {
        assert_eq!(relate(&[(0, 2)], &[(0, 2)]), SignatureRelation::Equal);
        assert_eq!(relate(&[(0, 2)], &[(1, 2)]), SignatureRelation::Disjoint);
        assert_eq!(
            relate(&[(0, 1), (1, 1)], &[(1, 1), (2, 1)]),
            SignatureRelation::PartialOverlap
        );
    }

    #[test]
    fn max_rounds_can_leave_the_run_inconclusive() {
        let a = lift_graph(&Graph::uncolored(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap());
        let trace = refine(&[&a, &a], 1, Some(0)).unwrap();
        assert_eq!(trace.verdict(), Verdict::Inconclusive);
    }
}
