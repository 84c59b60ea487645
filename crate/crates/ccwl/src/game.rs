//! Counting pebble games on pairs of complexes.
//!
//! A round of the game with `p` pebbles goes as follows. Player I picks a
//! side and a set `P` of ordered cell pairs on it. Player II answers with a
//! set `P'` of the same size on the other side. Player I picks a pair from
//! `P'` and two pebble indices `(i, j)` and places `x_i, x_j` on it. Player II
//! places the same two pebbles on a pair of the chosen side, taken from `P`
//! under [`Rules::InChosenSet`] or from all pairs under [`Rules::AsWritten`].
//! Player I wins as soon as the pebbled positions are not similar.
//!
//! With three pebbles the guarded variant is played: one pebble marks an
//! anchor cell and both pair sets must consist of guarded pairs around it.
//!
//! [`Mode::Canonical`] solves the game through the classes of a joint
//! refinement run and a max-flow test of Hall's condition per class group.
//! [`Mode::Exhaustive`] enumerates every subset move and is limited to tiny
//! complexes. Player I wins always come with a move trace that [`replay_trace`]
//! checks against the rules.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::acc::{Acc, NeighborhoodKind};
use crate::error::{Error, Result};
use crate::logic::Valuation;
use crate::refine::{pair_code, refine, CellTypes, RefinementTrace};

/// Full pebble valuations on both sides plus the remaining rounds.
type PositionKey = (Vec<Option<usize>>, Vec<Option<usize>>, usize);

/// Certificate format version.
pub const CERTIFICATE_VERSION: u32 = 1;

/// Largest `|X|²` the exhaustive solver accepts by default.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 12;

/// One of the two complexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    /// The opposite side.
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

/// Where Player II may answer in the last step of a round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rules {
    /// The answer must come from Player I's chosen set.
    #[default]
    InChosenSet,
    /// The answer may be any pair of the chosen side.
    AsWritten,
}

/// Solver strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Moves restricted to unions of refinement classes.
    #[default]
    Canonical,
    /// Every subset of pairs is tried.
    Exhaustive,
}

/// Which game is played.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Unrestricted pair sets with four or more pebbles.
    Box,
    /// Three pebbles with pair sets guarded by an anchor cell.
    Guarded,
}

/// Winner of a game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    PlayerI,
    PlayerII,
}

/// The similarity condition that a position violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// The two valuations bind different variables.
    Domain,
    Equality,
    Rank,
    Color,
    /// A neighborhood relation holds on one side only.
    Neighborhood(NeighborhoodKind),
    /// The guard relation to the anchor differs.
    Guard,
}

/// A similarity failure between two positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    /// Variables involved (equal for single-variable conditions).
    pub vars: (usize, usize),
}

fn same_color(a: &Acc, x: usize, b: &Acc, y: usize) -> bool {
    let width = a.ell().max(b.ell());
    a.attr(x).padded(width) == b.attr(y).padded(width)
}

/// Checks equality pattern, ranks and colors of all bound variables.
fn basic_similar(
    a: &Acc,
    mu_a: &Valuation,
    b: &Acc,
    mu_b: &Valuation,
) -> std::result::Result<Vec<(usize, usize, usize)>, Violation> {
    let dom = mu_a.domain();
    if dom != mu_b.domain() {
        return Err(Violation {
            condition: Condition::Domain,
            vars: (0, 0),
        });
    }
    let bound: Vec<(usize, usize, usize)> = dom
        .iter()
        .map(|&i| (i, mu_a.get(i).expect("in domain"), mu_b.get(i).expect("in domain")))
        .collect();
    for &(i, x, y) in &bound {
        if a.rank(x) != b.rank(y) {
            return Err(Violation {
                condition: Condition::Rank,
                vars: (i, i),
            });
        }
        if !same_color(a, x, b, y) {
            return Err(Violation {
                condition: Condition::Color,
                vars: (i, i),
            });
        }
    }
    for &(i, x, y) in &bound {
        for &(j, x2, y2) in &bound {
            if i < j && (x == x2) != (y == y2) {
                return Err(Violation {
                    condition: Condition::Equality,
                    vars: (i, j),
                });
            }
        }
    }
    Ok(bound)
}

/// Structural similarity of two partial valuations with equal domains.
/// Returns the first violated condition, or `None` when the valuations are
/// similar; unequal domains are an error.
pub fn similar_k(a: &Acc, mu_a: &Valuation, b: &Acc, mu_b: &Valuation) -> Result<Option<Violation>> {
    if mu_a.domain() != mu_b.domain() {
        return Err(Error::InvalidArgument(
            "similarity needs valuations with equal domains".into(),
        ));
    }
    Ok(similarity(a, mu_a, b, mu_b).err())
}

/// Similarity of two partial valuations: same domain, and for all bound
/// variables the same equalities, ranks, colors and neighborhood relations.
pub fn similarity(a: &Acc, mu_a: &Valuation, b: &Acc, mu_b: &Valuation) -> std::result::Result<(), Violation> {
    let bound = basic_similar(a, mu_a, b, mu_b)?;
    for &(i, x, y) in &bound {
        for &(j, x2, y2) in &bound {
            if i == j {
                continue;
            }
            let (ra, rb) = (a.relation(x, x2), b.relation(y, y2));
            if ra != rb {
                let kind = NeighborhoodKind::ALL
                    .into_iter()
                    .find(|k| (ra ^ rb) & k.bit() != 0)
                    .expect("relations differ in some bit");
                return Err(Violation {
                    condition: Condition::Neighborhood(kind),
                    vars: (i, j),
                });
            }
        }
    }
    Ok(())
}

/// Guard tags: boundary, coboundary, lower and upper guarded pairs.
const TAG_BOUNDARY: u32 = 0;
const TAG_COBOUNDARY: u32 = 1;
const TAG_LOWER: u32 = 2;
const TAG_UPPER: u32 = 3;

/// Tag of the guard that `(b, c)` satisfies around `a`, if any.
pub fn guard_tag(acc: &Acc, a: usize, b: usize, c: usize) -> Option<u32> {
    use NeighborhoodKind::*;
    if b == c {
        if acc.related(Boundary, a, b) {
            return Some(TAG_BOUNDARY);
        }
        if acc.related(Coboundary, a, b) {
            return Some(TAG_COBOUNDARY);
        }
        return None;
    }
    if acc.related(Lower, a, b) && acc.related(Boundary, a, c) && acc.related(Boundary, b, c) {
        return Some(TAG_LOWER);
    }
    if acc.related(Upper, a, b) && acc.related(Coboundary, a, c) && acc.related(Coboundary, b, c) {
        return Some(TAG_UPPER);
    }
    None
}

/// Guarded pairs around `a` in scan order.
pub fn guarded_pairs(acc: &Acc, a: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    out.extend(acc.nbrs(a, NeighborhoodKind::Boundary).iter().map(|&b| (b, b)));
    out.extend(acc.nbrs(a, NeighborhoodKind::Coboundary).iter().map(|&c| (c, c)));
    out.extend_from_slice(acc.lower_pairs(a));
    out.extend_from_slice(acc.upper_pairs(a));
    out
}

/// Similarity used by the guarded game: equality pattern, ranks and colors
/// of the bound variables, plus the guard tag of the pebbled pair around
/// the anchor when there is one.
pub fn guarded_similar(
    a: &Acc,
    mu_a: &Valuation,
    b: &Acc,
    mu_b: &Valuation,
    anchor: Option<usize>,
    pair: Option<(usize, usize)>,
) -> std::result::Result<(), Violation> {
    basic_similar(a, mu_a, b, mu_b)?;
    if let (Some(v), Some((i, j))) = (anchor, pair) {
        let cells = |acc: &Acc, mu: &Valuation| match (mu.get(v), mu.get(i), mu.get(j)) {
            (Some(x), Some(y), Some(z)) => guard_tag(acc, x, y, z),
            _ => None,
        };
        if cells(a, mu_a) != cells(b, mu_b) {
            return Err(Violation {
                condition: Condition::Guard,
                vars: (i, j),
            });
        }
    }
    Ok(())
}

/// One round of play.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    /// Side on which Player I chose a pair set.
    pub chooser: Side,
    /// Pebble variables placed this round.
    pub indices: (usize, usize),
    /// Anchor variable in the guarded variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<usize>,
    /// Player I's set on the chosen side.
    pub pair_set: Vec<(usize, usize)>,
    /// Player II's set on the other side.
    pub responder_set: Vec<(usize, usize)>,
    /// Player II had too few legal pairs to answer, which ends the game.
    #[serde(default)]
    pub responder_stuck: bool,
    /// Pair picked by Player I from the responder set.
    pub spoiler_pick: Option<(usize, usize)>,
    /// Pair picked by Player II on the chosen side.
    pub duplicator_pick: Option<(usize, usize)>,
}

/// Starting valuations (index `i - 1` holds `x_i`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialPosition {
    pub a: Vec<Option<usize>>,
    pub b: Vec<Option<usize>>,
}

/// A replayable record of a solved game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub variant: Variant,
    pub rules: Rules,
    pub pebbles: usize,
    pub hash_a: String,
    pub hash_b: String,
    pub initial: InitialPosition,
    pub winner: Winner,
    /// Rounds the claim is made for.
    pub rounds: usize,
    pub moves: Vec<MoveRecord>,
}

/// Where play starts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Start {
    /// No pebbles on the board.
    Empty,
    /// Pebbles `x1..` on the given cells (one cell in the guarded variant).
    Tuples(Vec<usize>, Vec<usize>),
}

/// Game parameters.
#[derive(Clone, Debug)]
pub struct GameConfig {
    pub pebbles: usize,
    /// Round budget; `None` means the refinement's stabilization bound.
    pub rounds: Option<usize>,
    pub mode: Mode,
    pub rules: Rules,
    /// Largest `|X|²` per side for [`Mode::Exhaustive`].
    pub exhaustive_cap: usize,
}

impl GameConfig {
    /// Canonical mode with default rules.
    pub fn new(pebbles: usize) -> Self {
        GameConfig {
            pebbles,
            rounds: None,
            mode: Mode::Canonical,
            rules: Rules::InChosenSet,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

/// Outcome of [`solve_game`].
#[derive(Clone, Debug)]
pub struct GameResult {
    pub winner: Winner,
    pub variant: Variant,
    pub mode: Mode,
    /// Rounds actually analysed: the request clamped to one past the
    /// stabilization round of the matching refinement.
    pub rounds_checked: usize,
    /// Stabilization round of the joint refinement at arity `pebbles - 2`.
    pub stable_round: usize,
    /// Fewest rounds in which Player I wins, if within the budget.
    pub decided_round: Option<usize>,
    pub certificate: Certificate,
}

/// Solves the game on `a` and `b` from `start`.
pub fn solve_game(a: &Acc, b: &Acc, start: &Start, config: &GameConfig) -> Result<GameResult> {
    let p = config.pebbles;
    if p < 3 {
        return Err(Error::InvalidArgument("the game needs at least 3 pebbles".into()));
    }
    let k = p - 2;
    let variant = if p == 3 { Variant::Guarded } else { Variant::Box };
    let initial = initial_position(a, b, start, p, variant)?;
    if variant == Variant::Box && *start == Start::Empty && k > 2 {
        return Err(Error::InvalidArgument(
            "whole-complex games are supported up to 4 pebbles; give starting tuples for more".into(),
        ));
    }
    if config.mode == Mode::Exhaustive {
        let cap = config.exhaustive_cap;
        for acc in [a, b] {
            if acc.len() * acc.len() > cap {
                return Err(Error::SizeLimit(format!(
                    "exhaustive play needs |X|² ≤ {cap}, got {}",
                    acc.len() * acc.len()
                )));
            }
        }
    }
    let trace = refine(&[a, b], k, None)?;
    let stable = trace.stable_round.expect("unbounded refinement always stabilizes");
    let budget = config.rounds.unwrap_or(stable + 1).min(stable + 1);
    let mut game = Game::new([a, b], k, variant, config.mode, config.rules, trace);
    let state = match start {
        Start::Empty => None,
        Start::Tuples(x, y) => Some((x.clone(), y.clone())),
    };
    let mut decided = None;
    for r in 0..=budget {
        if !game.survive_state(state.as_ref(), r)? {
            decided = Some(r);
            break;
        }
    }
    let mut moves = Vec::new();
    let winner = match decided {
        Some(r) => {
            let mut mu = [to_valuation(&initial.a), to_valuation(&initial.b)];
            let live = match (&state, variant) {
                (None, _) => Vec::new(),
                (Some(_), Variant::Guarded) => vec![1],
                (Some(_), Variant::Box) => (1..=k).collect(),
            };
            game.witness(state, live, r, &mut mu, &mut moves)?;
            Winner::PlayerI
        }
        None => Winner::PlayerII,
    };
    let certificate = Certificate {
        version: CERTIFICATE_VERSION,
        variant,
        rules: config.rules,
        pebbles: p,
        hash_a: a.content_hash(),
        hash_b: b.content_hash(),
        initial,
        winner,
        rounds: decided.unwrap_or(budget),
        moves,
    };
    Ok(GameResult {
        winner,
        variant,
        mode: config.mode,
        rounds_checked: budget,
        stable_round: stable,
        decided_round: decided,
        certificate,
    })
}

/// Reusable solver for many queries on one pair of complexes.
pub struct Solver<'a> {
    game: Game<'a>,
}

impl<'a> Solver<'a> {
    /// Prepares a solver; this runs the joint refinement at arity `pebbles - 2`.
    pub fn new(a: &'a Acc, b: &'a Acc, pebbles: usize, mode: Mode, rules: Rules) -> Result<Self> {
        if pebbles < 3 {
            return Err(Error::InvalidArgument("the game needs at least 3 pebbles".into()));
        }
        let k = pebbles - 2;
        let variant = if pebbles == 3 { Variant::Guarded } else { Variant::Box };
        let trace = refine(&[a, b], k, None)?;
        Ok(Solver {
            game: Game::new([a, b], k, variant, mode, rules, trace),
        })
    }

    /// The joint refinement run the solver uses.
    pub fn trace(&self) -> &RefinementTrace {
        &self.game.trace
    }

    /// Whether Player II survives `rounds` rounds from `start`.
    pub fn survives(&mut self, start: &Start, rounds: usize) -> Result<bool> {
        let want = if self.game.variant == Variant::Guarded {
            1
        } else {
            self.game.k
        };
        let state = match start {
            Start::Empty => None,
            Start::Tuples(x, y) => {
                if x.len() != want || y.len() != want {
                    return Err(Error::InvalidArgument(format!(
                        "starting tuples must have {want} cells"
                    )));
                }
                Some((x.clone(), y.clone()))
            }
        };
        self.game.survive_state(state.as_ref(), rounds)
    }
}

/// The three-pebble guarded game from an optional pair of anchor cells.
pub fn solve_guarded_game(
    a: &Acc,
    b: &Acc,
    rounds: Option<usize>,
    initial: Option<(usize, usize)>,
) -> Result<GameResult> {
    let start = match initial {
        Some((x, y)) => Start::Tuples(vec![x], vec![y]),
        None => Start::Empty,
    };
    let config = GameConfig {
        rounds,
        ..GameConfig::new(3)
    };
    solve_game(a, b, &start, &config)
}

fn initial_position(a: &Acc, b: &Acc, start: &Start, p: usize, variant: Variant) -> Result<InitialPosition> {
    let mut pos = InitialPosition {
        a: vec![None; p],
        b: vec![None; p],
    };
    if let Start::Tuples(x, y) = start {
        let want = if variant == Variant::Guarded { 1 } else { p - 2 };
        if x.len() != want || y.len() != want {
            return Err(Error::InvalidArgument(format!(
                "starting tuples must have {want} cells for {p} pebbles"
            )));
        }
        for (acc, t, slots) in [(a, x, &mut pos.a), (b, y, &mut pos.b)] {
            for (i, &c) in t.iter().enumerate() {
                if c >= acc.len() {
                    return Err(Error::InvalidArgument(format!("cell {c} out of range")));
                }
                slots[i] = Some(c);
            }
        }
    }
    Ok(pos)
}

fn to_valuation(slots: &[Option<usize>]) -> Valuation {
    let mut mu = Valuation::empty();
    for (i, c) in slots.iter().enumerate() {
        if let Some(c) = c {
            mu.set(i + 1, *c);
        }
    }
    mu
}

/// A Player I challenge: a pair set on one side whose covered pairs on the
/// other side are fewer than the set itself.
#[derive(Clone, Debug)]
struct Challenge {
    side: Side,
    set: Vec<(usize, usize)>,
    covered: Vec<(usize, usize)>,
}

type Position = (Vec<usize>, Vec<usize>);

struct Game<'a> {
    accs: [&'a Acc; 2],
    k: usize,
    variant: Variant,
    mode: Mode,
    rules: Rules,
    types: CellTypes,
    trace: RefinementTrace,
    memo: HashMap<(Vec<usize>, Vec<usize>, usize), bool>,
    full_memo: HashMap<PositionKey, bool>,
}

type BlockMap = BTreeMap<(Vec<u32>, Vec<u32>), Vec<(usize, usize)>>;

impl<'a> Game<'a> {
    fn new(accs: [&'a Acc; 2], k: usize, variant: Variant, mode: Mode, rules: Rules, trace: RefinementTrace) -> Self {
        Game {
            accs,
            k,
            variant,
            mode,
            rules,
            types: CellTypes::of(&accs),
            trace,
            memo: HashMap::new(),
            full_memo: HashMap::new(),
        }
    }

    fn all_pairs(&self, g: usize) -> Vec<(usize, usize)> {
        let n = self.accs[g].len();
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect()
    }

    /// Pairs Player I or II may choose on side `g` in a position.
    fn legal_pairs(&self, g: usize, tuple: Option<&[usize]>) -> Vec<(usize, usize)> {
        match (self.variant, tuple) {
            (Variant::Guarded, Some(t)) => guarded_pairs(self.accs[g], t[0]),
            _ => self.all_pairs(g),
        }
    }

    fn tuple_key(&self, g: usize, t: &[usize]) -> Vec<u32> {
        let acc = self.accs[g];
        let mut key: Vec<u32> = t.iter().map(|&x| self.types.ids[g][x]).collect();
        for i in 0..t.len() {
            for j in i + 1..t.len() {
                key.push(pair_code(acc, t[i], t[j]));
            }
        }
        key
    }

    /// Class group (the part every compatible answer must share) of a pair
    /// placed in a position.
    fn group(&self, g: usize, tuple: Option<&[usize]>, (x, y): (usize, usize)) -> Vec<u32> {
        let acc = self.accs[g];
        let ty = &self.types.ids[g];
        match (self.variant, tuple) {
            (Variant::Box, None) => self.tuple_key(g, &[x, y]),
            (Variant::Guarded, None) => vec![(x == y) as u32, ty[x], ty[y]],
            (Variant::Guarded, Some(t)) => vec![guard_tag(acc, t[0], x, y).unwrap_or(u32::MAX), ty[x], ty[y]],
            (Variant::Box, Some(t)) => {
                let mut key = vec![ty[x], ty[y], pair_code(acc, x, y)];
                for &c in t {
                    key.push(pair_code(acc, c, x));
                    key.push(pair_code(acc, c, y));
                }
                key
            }
        }
    }

    /// Continuation positions after a pair is placed. Player I may continue
    /// from any of them.
    fn continuations(&self, tuple: Option<&[usize]>, (x, y): (usize, usize)) -> Vec<Vec<usize>> {
        match (self.variant, tuple) {
            (Variant::Box, None) => vec![vec![x, y]],
            (Variant::Guarded, _) => vec![vec![x], vec![y]],
            (Variant::Box, Some(t)) => {
                let mut out = Vec::with_capacity(2 * t.len());
                for c in [x, y] {
                    for i in 0..t.len() {
                        let mut s = t.to_vec();
                        s[i] = c;
                        out.push(s);
                    }
                }
                out
            }
        }
    }

    fn blocks(&self, g: usize, tuple: Option<&[usize]>, round: usize) -> BlockMap {
        let mut map: BlockMap = BTreeMap::new();
        for pair in self.legal_pairs(g, tuple) {
            let group = self.group(g, tuple, pair);
            let delta: Vec<u32> = self
                .continuations(tuple, pair)
                .iter()
                .map(|c| self.trace.color(round, g, c))
                .collect();
            map.entry((group, delta)).or_default().push(pair);
        }
        map
    }

    fn position_similar(&self, x: &[usize], y: &[usize]) -> bool {
        self.tuple_key(0, x) == self.tuple_key(1, y)
    }

    /// Whether Player II survives `r` rounds from the position, or from the
    /// empty board when `state` is `None`.
    fn survive_state(&mut self, state: Option<&Position>, r: usize) -> Result<bool> {
        match state {
            Some((x, y)) => self.survive(x, y, r),
            None => {
                if self.mode == Mode::Exhaustive && self.variant == Variant::Box {
                    let p = self.k + 2;
                    return self.survive_full(&vec![None; p], &vec![None; p], r);
                }
                for t in 1..=r {
                    if self.challenge(None, t)?.is_some() {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }

    fn survive(&mut self, x: &[usize], y: &[usize], r: usize) -> Result<bool> {
        if self.mode == Mode::Exhaustive && self.variant == Variant::Box {
            let p = self.k + 2;
            let pad = |t: &[usize]| {
                let mut v: Vec<Option<usize>> = t.iter().map(|&c| Some(c)).collect();
                v.resize(p, None);
                v
            };
            return self.survive_full(&pad(x), &pad(y), r);
        }
        let key = (x.to_vec(), y.to_vec(), r);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = if !self.position_similar(x, y) {
            false
        } else if r == 0 {
            true
        } else if !self.survive(x, y, r - 1)? {
            false
        } else {
            self.challenge(Some((x, y)), r)?.is_none()
        };
        self.memo.insert(key, v);
        Ok(v)
    }

    /// Player II can match pair `s` on `side` with pair `t` on the other side.
    fn good(
        &mut self,
        side: Side,
        tuple: Option<(&[usize], &[usize])>,
        s: (usize, usize),
        t: (usize, usize),
        r: usize,
    ) -> Result<bool> {
        let (pa, pb) = if side == Side::A { (s, t) } else { (t, s) };
        let (ta, tb) = (tuple.map(|p| p.0), tuple.map(|p| p.1));
        if self.group(0, ta, pa) != self.group(1, tb, pb) {
            return Ok(false);
        }
        if self.variant == Variant::Guarded && ta.is_some() && self.group(0, ta, pa)[0] == u32::MAX {
            return Ok(false);
        }
        let (ca, cb) = (self.continuations(ta, pa), self.continuations(tb, pb));
        for (x, y) in ca.iter().zip(&cb) {
            if !self.survive(x, y, r - 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A Player I move that wins the round `r` from the position, if any.
    fn challenge(&mut self, tuple: Option<(&[usize], &[usize])>, r: usize) -> Result<Option<Challenge>> {
        debug_assert!(r >= 1);
        if self.mode == Mode::Exhaustive {
            return self.exhaustive_challenge(tuple, r);
        }
        let blocks = [
            self.blocks(0, tuple.map(|p| p.0), r - 1),
            self.blocks(1, tuple.map(|p| p.1), r - 1),
        ];
        let mut candidates = Vec::new();
        for side in [Side::A, Side::B] {
            let mine: Vec<_> = blocks[side.index()].iter().collect();
            let theirs: Vec<_> = blocks[side.other().index()].iter().collect();
            let mut good = vec![vec![false; theirs.len()]; mine.len()];
            for (li, ((lg, _), lp)) in mine.iter().enumerate() {
                for (ri, ((rg, _), rp)) in theirs.iter().enumerate() {
                    if lg == rg {
                        good[li][ri] = self.good(side, tuple, lp[0], rp[0], r)?;
                    }
                }
            }
            match self.rules {
                Rules::InChosenSet => {
                    let mut groups: Vec<&Vec<u32>> = mine.iter().map(|((g, _), _)| g).collect();
                    groups.dedup();
                    for group in groups {
                        let left: Vec<usize> = (0..mine.len()).filter(|&i| &mine[i].0 .0 == group).collect();
                        let right: Vec<usize> = (0..theirs.len()).filter(|&i| &theirs[i].0 .0 == group).collect();
                        let edges: Vec<Vec<usize>> = left
                            .iter()
                            .map(|&l| (0..right.len()).filter(|&ri| good[l][right[ri]]).collect())
                            .collect();
                        let lw: Vec<usize> = left.iter().map(|&l| mine[l].1.len()).collect();
                        let rw: Vec<usize> = right.iter().map(|&r| theirs[r].1.len()).collect();
                        if let Some((ls, rs)) = hall_violation(&lw, &rw, &edges) {
                            let mut set: Vec<(usize, usize)> =
                                ls.iter().flat_map(|&i| mine[left[i]].1.iter().copied()).collect();
                            let mut covered: Vec<(usize, usize)> =
                                rs.iter().flat_map(|&i| theirs[right[i]].1.iter().copied()).collect();
                            set.sort_unstable();
                            covered.sort_unstable();
                            candidates.push(Challenge { side, set, covered });
                        }
                    }
                }
                Rules::AsWritten => {
                    let set: Vec<(usize, usize)> = {
                        let mut s: Vec<_> = mine.iter().flat_map(|(_, p)| p.iter().copied()).collect();
                        s.sort_unstable();
                        s
                    };
                    let mut covered: Vec<(usize, usize)> = (0..theirs.len())
                        .filter(|&ri| (0..mine.len()).any(|li| good[li][ri]))
                        .flat_map(|ri| theirs[ri].1.iter().copied())
                        .collect();
                    covered.sort_unstable();
                    if covered.len() < set.len() {
                        candidates.push(Challenge { side, set, covered });
                    }
                }
            }
        }
        Ok(pick_challenge(self.accs, candidates))
    }

    fn exhaustive_challenge(&mut self, tuple: Option<(&[usize], &[usize])>, r: usize) -> Result<Option<Challenge>> {
        let legal = [
            self.legal_pairs(0, tuple.map(|p| p.0)),
            self.legal_pairs(1, tuple.map(|p| p.1)),
        ];
        for side in [Side::A, Side::B] {
            let mine = &legal[side.index()];
            let theirs = &legal[side.other().index()];
            let mut masks = vec![0u64; mine.len()];
            for (si, &s) in mine.iter().enumerate() {
                for (ti, &t) in theirs.iter().enumerate() {
                    if self.good(side, tuple, s, t, r)? {
                        masks[si] |= 1 << ti;
                    }
                }
            }
            if let Some((set, cov)) = subset_violation(&[masks], mine.len(), theirs.len(), self.rules) {
                return Ok(Some(Challenge {
                    side,
                    set: bits(set).map(|i| mine[i]).collect(),
                    covered: bits(cov).map(|i| theirs[i]).collect(),
                }));
            }
        }
        Ok(None)
    }

    /// Survival in the unrestricted game on full valuations.
    fn survive_full(&mut self, mu_a: &[Option<usize>], mu_b: &[Option<usize>], r: usize) -> Result<bool> {
        let key = (mu_a.to_vec(), mu_b.to_vec(), r);
        if let Some(&v) = self.full_memo.get(&key) {
            return Ok(v);
        }
        let v = if similarity(self.accs[0], &to_valuation(mu_a), self.accs[1], &to_valuation(mu_b)).is_err() {
            false
        } else if r == 0 {
            true
        } else if !self.survive_full(mu_a, mu_b, r - 1)? {
            false
        } else {
            self.full_challenge(mu_a, mu_b, r)?.is_none()
        };
        self.full_memo.insert(key, v);
        Ok(v)
    }

    fn index_pairs(&self) -> Vec<(usize, usize)> {
        let p = self.k + 2;
        (1..=p)
            .flat_map(|i| (1..=p).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect()
    }

    fn place(mu: &[Option<usize>], (i, j): (usize, usize), (x, y): (usize, usize)) -> Vec<Option<usize>> {
        let mut m = mu.to_vec();
        m[i - 1] = Some(x);
        m[j - 1] = Some(y);
        m
    }

    /// Per index pair, for each pair `s` on `side`, the answers `t` after which
    /// Player II survives `r - 1` more rounds.
    fn full_masks(
        &mut self,
        mu_a: &[Option<usize>],
        mu_b: &[Option<usize>],
        side: Side,
        r: usize,
    ) -> Result<Vec<Vec<u64>>> {
        let mine = self.all_pairs(side.index());
        let theirs = self.all_pairs(side.other().index());
        let mut out = Vec::new();
        for ij in self.index_pairs() {
            let mut masks = vec![0u64; mine.len()];
            for (si, &s) in mine.iter().enumerate() {
                for (ti, &t) in theirs.iter().enumerate() {
                    let (pa, pb) = if side == Side::A { (s, t) } else { (t, s) };
                    if self.survive_full(&Self::place(mu_a, ij, pa), &Self::place(mu_b, ij, pb), r - 1)? {
                        masks[si] |= 1 << ti;
                    }
                }
            }
            out.push(masks);
        }
        Ok(out)
    }

    fn full_challenge(
        &mut self,
        mu_a: &[Option<usize>],
        mu_b: &[Option<usize>],
        r: usize,
    ) -> Result<Option<Challenge>> {
        for side in [Side::A, Side::B] {
            let masks = self.full_masks(mu_a, mu_b, side, r)?;
            let mine = self.all_pairs(side.index());
            let theirs = self.all_pairs(side.other().index());
            if let Some((set, cov)) = subset_violation(&masks, mine.len(), theirs.len(), self.rules) {
                return Ok(Some(Challenge {
                    side,
                    set: bits(set).map(|i| mine[i]).collect(),
                    covered: bits(cov).map(|i| theirs[i]).collect(),
                }));
            }
        }
        Ok(None)
    }

    /// Plays out a Player I win of `r` rounds from the position, appending
    /// the moves and updating the valuations.
    fn witness(
        &mut self,
        state: Option<Position>,
        live: Vec<usize>,
        r: usize,
        mu: &mut [Valuation; 2],
        moves: &mut Vec<MoveRecord>,
    ) -> Result<()> {
        if self.mode == Mode::Exhaustive && self.variant == Variant::Box {
            let p = self.k + 2;
            let slots = |m: &Valuation| (1..=p).map(|i| m.get(i)).collect::<Vec<_>>();
            let (a, b) = (slots(&mu[0]), slots(&mu[1]));
            return self.full_witness(a, b, r, moves);
        }
        let mut r = r;
        if let Some((x, y)) = &state {
            if !self.position_similar(x, y) {
                return Ok(());
            }
            while r > 0 && !self.survive(x, y, r - 1)? {
                r -= 1;
            }
            if r == 0 {
                return Err(Error::InvalidState(
                    "losing position without a similarity failure".into(),
                ));
            }
        } else {
            while r > 1 && self.challenge(None, r - 1)?.is_some() {
                r -= 1;
            }
        }
        let tuple = state.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice()));
        let ch = self
            .challenge(tuple, r)?
            .ok_or_else(|| Error::InvalidState("no winning move found in a losing position".into()))?;
        let p = self.k + 2;
        let (anchor, indices) = match (self.variant, &state) {
            (_, None) => (None, (1, 2)),
            (Variant::Guarded, Some(_)) => {
                let v = live[0];
                let free: Vec<usize> = (1..=3).filter(|&i| i != v).collect();
                (Some(v), (free[0], free[1]))
            }
            (Variant::Box, Some(_)) => {
                let free: Vec<usize> = (1..=p).filter(|i| !live.contains(i)).collect();
                (None, (free[0], free[1]))
            }
        };
        let (chooser, responder) = (ch.side, ch.side.other());
        let their_tuple = state.as_ref().map(|(x, y)| {
            if responder == Side::A {
                x.as_slice()
            } else {
                y.as_slice()
            }
        });
        let my_tuple = state
            .as_ref()
            .map(|(x, y)| if chooser == Side::A { x.as_slice() } else { y.as_slice() });
        let groups: Vec<Vec<u32>> = ch
            .set
            .iter()
            .map(|&q| self.group(chooser.index(), my_tuple, q))
            .collect();
        let mut fillers = self.legal_pairs(responder.index(), their_tuple);
        fillers.retain(|q| !ch.covered.contains(q));
        fillers.sort_by_key(|&q| !groups.contains(&self.group(responder.index(), their_tuple, q)));
        let mut response = ch.covered.clone();
        response.extend(fillers.into_iter().take(ch.set.len().saturating_sub(ch.covered.len())));
        if response.len() < ch.set.len() {
            moves.push(MoveRecord {
                chooser,
                indices,
                anchor,
                pair_set: ch.set,
                responder_set: Vec::new(),
                responder_stuck: true,
                spoiler_pick: None,
                duplicator_pick: None,
            });
            return Ok(());
        }
        let t = *response
            .iter()
            .find(|q| !ch.covered.contains(q))
            .expect("the response outnumbers the covered pairs");
        let options = match self.rules {
            Rules::InChosenSet => ch.set.clone(),
            Rules::AsWritten => self.legal_pairs(chooser.index(), my_tuple),
        };
        let orient = |s: (usize, usize)| if chooser == Side::A { (s, t) } else { (t, s) };
        let s = options
            .iter()
            .copied()
            .find(|&s| {
                let (pa, pb) = orient(s);
                self.group(0, tuple.map(|p| p.0), pa) == self.group(1, tuple.map(|p| p.1), pb)
            })
            .unwrap_or(options[0]);
        let (pa, pb) = orient(s);
        mu[responder.index()].set(indices.0, t.0);
        mu[responder.index()].set(indices.1, t.1);
        mu[chooser.index()].set(indices.0, s.0);
        mu[chooser.index()].set(indices.1, s.1);
        moves.push(MoveRecord {
            chooser,
            indices,
            anchor,
            pair_set: ch.set,
            responder_set: response,
            responder_stuck: false,
            spoiler_pick: Some(t),
            duplicator_pick: Some(s),
        });
        if self.group(0, tuple.map(|p| p.0), pa) != self.group(1, tuple.map(|p| p.1), pb) {
            return Ok(());
        }
        let (ca, cb) = (
            self.continuations(tuple.map(|p| p.0), pa),
            self.continuations(tuple.map(|p| p.1), pb),
        );
        for (ci, (x, y)) in ca.into_iter().zip(cb).enumerate() {
            if self.survive(&x, &y, r - 1)? {
                continue;
            }
            let live = match (self.variant, &state) {
                (Variant::Guarded, _) => vec![if ci == 0 { indices.0 } else { indices.1 }],
                (Variant::Box, None) => vec![indices.0, indices.1],
                (Variant::Box, Some(_)) => {
                    let mut l = live.clone();
                    let pos = ci % self.k;
                    l[pos] = if ci < self.k { indices.0 } else { indices.1 };
                    l
                }
            };
            return self.witness(Some((x, y)), live, r - 1, mu, moves);
        }
        Err(Error::InvalidState("canonical answer unexpectedly survives".into()))
    }

    fn full_witness(
        &mut self,
        mu_a: Vec<Option<usize>>,
        mu_b: Vec<Option<usize>>,
        r: usize,
        moves: &mut Vec<MoveRecord>,
    ) -> Result<()> {
        if similarity(self.accs[0], &to_valuation(&mu_a), self.accs[1], &to_valuation(&mu_b)).is_err() {
            return Ok(());
        }
        let mut r = r;
        while r > 0 && !self.survive_full(&mu_a, &mu_b, r - 1)? {
            r -= 1;
        }
        if r == 0 {
            return Err(Error::InvalidState(
                "losing position without a similarity failure".into(),
            ));
        }
        let ch = self
            .full_challenge(&mu_a, &mu_b, r)?
            .ok_or_else(|| Error::InvalidState("no winning move found in a losing position".into()))?;
        let (chooser, responder) = (ch.side, ch.side.other());
        let mut response = ch.covered.clone();
        for q in self.all_pairs(responder.index()) {
            if response.len() >= ch.set.len() {
                break;
            }
            if !ch.covered.contains(&q) {
                response.push(q);
            }
        }
        if response.len() < ch.set.len() {
            moves.push(MoveRecord {
                chooser,
                indices: (1, 2),
                anchor: None,
                pair_set: ch.set,
                responder_set: Vec::new(),
                responder_stuck: true,
                spoiler_pick: None,
                duplicator_pick: None,
            });
            return Ok(());
        }
        let t = *response
            .iter()
            .find(|q| !ch.covered.contains(q))
            .expect("the response outnumbers the covered pairs");
        let options = match self.rules {
            Rules::InChosenSet => ch.set.clone(),
            Rules::AsWritten => self.all_pairs(chooser.index()),
        };
        let orient = |s: (usize, usize)| if chooser == Side::A { (s, t) } else { (t, s) };
        for ij in self.index_pairs() {
            let mut answers = Vec::new();
            for &s in &options {
                let (pa, pb) = orient(s);
                let (na, nb) = (Self::place(&mu_a, ij, pa), Self::place(&mu_b, ij, pb));
                if self.survive_full(&na, &nb, r - 1)? {
                    answers.clear();
                    break;
                }
                answers.push((s, na, nb));
            }
            if answers.is_empty() {
                continue;
            }
            let pick = answers
                .iter()
                .position(|(_, na, nb)| {
                    similarity(self.accs[0], &to_valuation(na), self.accs[1], &to_valuation(nb)).is_ok()
                })
                .unwrap_or(0);
            let (s, na, nb) = answers.swap_remove(pick);
            moves.push(MoveRecord {
                chooser,
                indices: ij,
                anchor: None,
                pair_set: ch.set,
                responder_set: response,
                responder_stuck: false,
                spoiler_pick: Some(t),
                duplicator_pick: Some(s),
            });
            return self.full_witness(na, nb, r - 1, moves);
        }
        Err(Error::InvalidState("exhaustive answer unexpectedly survives".into()))
    }
}

/// Chooses among winning moves. Sets that Player II cannot answer at all
/// come first, smallest first; otherwise the largest shortfall wins. Ties
/// go to side A and then to sets over higher-rank cells.
fn pick_challenge(accs: [&Acc; 2], candidates: Vec<Challenge>) -> Option<Challenge> {
    let score = |c: &Challenge| {
        let acc = accs[c.side.index()];
        let top = c
            .set
            .iter()
            .map(|&(x, y)| acc.rank(x).max(acc.rank(y)))
            .max()
            .unwrap_or(0);
        let shortfall = c.set.len() - c.covered.len();
        let size_or_gap = if c.covered.is_empty() {
            c.set.len()
        } else {
            usize::MAX - shortfall
        };
        (
            !c.covered.is_empty(),
            size_or_gap,
            c.side.index(),
            std::cmp::Reverse(top),
        )
    };
    candidates.into_iter().min_by_key(|c| score(c))
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| mask >> i & 1 == 1)
}

/// Searches the subsets of the chooser's pairs for a set whose covered
/// answers are fewer than its size. `masks[ij][s]` lists the answers to
/// pair `s` that survive when the pebbles `ij` are used; an answer covers
/// a set if it survives for every index choice.
fn subset_violation(masks: &[Vec<u64>], mine: usize, theirs: usize, rules: Rules) -> Option<(u64, u64)> {
    let full_theirs = if theirs == 64 { u64::MAX } else { (1u64 << theirs) - 1 };
    let cover = |set: u64| {
        masks
            .iter()
            .fold(full_theirs, |acc, m| acc & bits(set).fold(0u64, |u, s| u | m[s]))
    };
    if mine == 0 {
        return None;
    }
    match rules {
        Rules::AsWritten => {
            let all = if mine == 64 { u64::MAX } else { (1u64 << mine) - 1 };
            let cov = cover(all);
            (cov.count_ones() < mine as u32).then_some((all, cov))
        }
        Rules::InChosenSet => {
            assert!(mine <= 20, "subset enumeration over {mine} pairs");
            let count = 1usize << mine;
            let mut unions: Vec<Vec<u64>> = vec![vec![0; count]; masks.len()];
            for set in 1..count {
                let low = set.trailing_zeros() as usize;
                let rest = set & (set - 1);
                let mut cov = full_theirs;
                for (ij, m) in masks.iter().enumerate() {
                    let u = unions[ij][rest] | m[low];
                    unions[ij][set] = u;
                    cov &= u;
                }
                if (cov.count_ones() as usize) < set.count_ones() as usize {
                    return Some((set as u64, cov));
                }
            }
            None
        }
    }
}

/// Max-flow test of Hall's condition for a weighted bipartite relation.
/// Returns a left set whose weight exceeds the weight of its neighborhood,
/// together with that neighborhood.
fn hall_violation(left: &[usize], right: &[usize], edges: &[Vec<usize>]) -> Option<(Vec<usize>, Vec<usize>)> {
    let (nl, nr) = (left.len(), right.len());
    let total: usize = left.iter().sum();
    let source = nl + nr;
    let sink = source + 1;
    let size = sink + 1;
    let mut cap: Vec<HashMap<usize, usize>> = vec![HashMap::new(); size];
    let add = |cap: &mut Vec<HashMap<usize, usize>>, u: usize, v: usize, c: usize| {
        *cap[u].entry(v).or_insert(0) += c;
        cap[v].entry(u).or_insert(0);
    };
    for (l, &w) in left.iter().enumerate() {
        add(&mut cap, source, l, w);
        for &r in &edges[l] {
            add(&mut cap, l, nl + r, usize::MAX / 4);
        }
    }
    for (r, &w) in right.iter().enumerate() {
        add(&mut cap, nl + r, sink, w);
    }
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let mut next: Vec<usize> = cap[u].iter().filter(|(_, &c)| c > 0).map(|(&v, _)| v).collect();
            next.sort_unstable();
            for v in next {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = usize::MAX;
        let mut v = sink;
        while v != source {
            let u = prev[v];
            bottleneck = bottleneck.min(cap[u][&v]);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = prev[v];
            *cap[u].get_mut(&v).expect("edge") -= bottleneck;
            *cap[v].get_mut(&u).expect("reverse edge") += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }
    if flow >= total {
        return None;
    }
    let mut seen = vec![false; size];
    seen[source] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for (&v, &c) in &cap[u] {
            if c > 0 && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let ls: Vec<usize> = (0..nl).filter(|&l| seen[l]).collect();
    let rs: Vec<usize> = (0..nr).filter(|&r| seen[nl + r]).collect();
    Some((ls, rs))
}

/// Outcome of a successful replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayReport {
    pub moves: usize,
    /// The final position is similar.
    pub final_similar: bool,
    /// Play ended because Player II could not answer.
    pub stuck: bool,
    /// Similarity failure of the final position, if any.
    pub violation: Option<Violation>,
}

fn invalid(step: usize, reason: impl Into<String>) -> Error {
    Error::CertificateInvalid {
        step,
        reason: reason.into(),
    }
}

/// Replays a certificate against the two complexes and checks every move
/// against the rules and the claimed outcome.
pub fn replay_trace(a: &Acc, b: &Acc, cert: &Certificate) -> Result<ReplayReport> {
    if cert.version != CERTIFICATE_VERSION {
        return Err(invalid(0, format!("unsupported certificate version {}", cert.version)));
    }
    if cert.hash_a != a.content_hash() {
        return Err(invalid(0, "complex A does not match the certificate hash"));
    }
    if cert.hash_b != b.content_hash() {
        return Err(invalid(0, "complex B does not match the certificate hash"));
    }
    let p = cert.pebbles;
    let expected_variant = if p == 3 { Variant::Guarded } else { Variant::Box };
    if p < 3 || cert.variant != expected_variant {
        return Err(invalid(
            0,
            format!("{p} pebbles do not match the {:?} variant", cert.variant),
        ));
    }
    if cert.initial.a.len() != p || cert.initial.b.len() != p {
        return Err(invalid(0, "initial valuations must list one slot per pebble"));
    }
    if cert.moves.len() > cert.rounds {
        return Err(invalid(0, "more moves than claimed rounds"));
    }
    let accs = [a, b];
    let mut mu = [to_valuation(&cert.initial.a), to_valuation(&cert.initial.b)];
    for (g, slots) in [&cert.initial.a, &cert.initial.b].into_iter().enumerate() {
        if slots.iter().flatten().any(|&c| c >= accs[g].len()) {
            return Err(invalid(0, "initial cell out of range"));
        }
    }
    let mut stuck = false;
    let mut last: Option<(Option<usize>, (usize, usize))> = None;
    for (n, mv) in cert.moves.iter().enumerate() {
        let step = n + 1;
        if stuck {
            return Err(invalid(step, "move after Player II was stuck"));
        }
        let (i, j) = mv.indices;
        if i == j || !(1..=p).contains(&i) || !(1..=p).contains(&j) {
            return Err(invalid(
                step,
                format!("pebble indices ({i}, {j}) are not two distinct pebbles of 1..{p}"),
            ));
        }
        let (chooser, responder) = (mv.chooser.index(), mv.chooser.other().index());
        let anchors: Option<[usize; 2]> = match (cert.variant, mv.anchor) {
            (Variant::Box, None) => None,
            (Variant::Box, Some(_)) => return Err(invalid(step, "anchors only exist in the guarded variant")),
            (Variant::Guarded, None) => {
                if !mu[0].domain().is_empty() {
                    return Err(invalid(step, "guarded moves need an anchor once pebbles are down"));
                }
                None
            }
            (Variant::Guarded, Some(v)) => {
                if v == i || v == j {
                    return Err(invalid(step, "the anchor pebble cannot be moved"));
                }
                match (mu[0].get(v), mu[1].get(v)) {
                    (Some(x), Some(y)) => Some([x, y]),
                    _ => return Err(invalid(step, format!("anchor x{v} is not on the board"))),
                }
            }
        };
        let legal = |g: usize, q: (usize, usize)| {
            q.0 < accs[g].len()
                && q.1 < accs[g].len()
                && anchors.is_none_or(|an| guard_tag(accs[g], an[g], q.0, q.1).is_some())
        };
        let legal_count = |g: usize| match anchors {
            Some(an) => guarded_pairs(accs[g], an[g]).len(),
            None => accs[g].len() * accs[g].len(),
        };
        check_set(step, &mv.pair_set, |q| legal(chooser, q), "Player I's set")?;
        if mv.pair_set.is_empty() {
            return Err(invalid(step, "Player I's set is empty"));
        }
        if mv.responder_stuck {
            if legal_count(responder) >= mv.pair_set.len() {
                return Err(invalid(step, "Player II had enough pairs to answer"));
            }
            stuck = true;
            continue;
        }
        check_set(step, &mv.responder_set, |q| legal(responder, q), "Player II's set")?;
        if mv.responder_set.len() != mv.pair_set.len() {
            return Err(invalid(step, "Player II's set differs in size from Player I's set"));
        }
        let t = mv.spoiler_pick.ok_or_else(|| invalid(step, "missing Player I pick"))?;
        if !mv.responder_set.contains(&t) {
            return Err(invalid(step, "Player I's pick is not in Player II's set"));
        }
        let s = mv
            .duplicator_pick
            .ok_or_else(|| invalid(step, "missing Player II pick"))?;
        let allowed = match cert.rules {
            Rules::InChosenSet => mv.pair_set.contains(&s),
            Rules::AsWritten => legal(chooser, s),
        };
        if !allowed {
            return Err(invalid(step, "Player II's pick is not allowed"));
        }
        mu[responder].set(i, t.0);
        mu[responder].set(j, t.1);
        mu[chooser].set(i, s.0);
        mu[chooser].set(j, s.1);
        last = Some((mv.anchor, (i, j)));
    }
    let check = match cert.variant {
        Variant::Box => similarity(a, &mu[0], b, &mu[1]),
        Variant::Guarded => {
            let (anchor, pair) = last.map_or((None, None), |(v, ij)| (v, Some(ij)));
            guarded_similar(a, &mu[0], b, &mu[1], anchor, pair)
        }
    };
    let report = ReplayReport {
        moves: cert.moves.len(),
        final_similar: !stuck && check.is_ok(),
        stuck,
        violation: check.err(),
    };
    match cert.winner {
        Winner::PlayerI if report.final_similar => Err(invalid(
            cert.moves.len(),
            "the final position is not a win for Player I",
        )),
        Winner::PlayerII if !report.final_similar => Err(invalid(
            cert.moves.len(),
            "Player II claims survival but the final position is lost",
        )),
        _ => Ok(report),
    }
}

fn check_set(step: usize, set: &[(usize, usize)], legal: impl Fn((usize, usize)) -> bool, what: &str) -> Result<()> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != set.len() {
        return Err(invalid(step, format!("{what} repeats a pair")));
    }
    if let Some(q) = set.iter().find(|&&q| !legal(q)) {
        return Err(invalid(step, format!("{what} contains the illegal pair {q:?}")));
    }
    Ok(())
}

/// Strips a certificate to its header and checks it parses.
pub fn certificate_from_json(text: &str) -> Result<Certificate> {
    serde_json::from_str(text).map_err(|e| Error::Validation(format!("invalid certificate: {e}")))
}

/// Pretty JSON form of a certificate.
pub fn certificate_to_json(cert: &Certificate) -> String {
    serde_json::to_string_pretty(cert).expect("certificates always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acc::{lift_graph, Graph};

    fn cycle(n: u32) -> Vec<(u32, u32)> {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }

    fn c6_pair() -> (Acc, Acc) {
        let c6 = lift_graph(&Graph::uncolored(6, cycle(6)).unwrap());
        let two = lift_graph(&Graph::uncolored(6, vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap());
        (c6, two)
    }

    #[test]
    fn similarity_reports_the_failing_condition() {
        let (a, b) = c6_pair();
        let v0 = a.find(&[0]).unwrap();
        let e = a.find(&[0, 1]).unwrap();
        let mu = Valuation::from_tuple(&[v0, e]);
        assert_eq!(similar_k(&a, &mu, &a, &mu).unwrap(), None);
        assert!(similar_k(&a, &Valuation::empty(), &b, &Valuation::empty())
            .unwrap()
            .is_none());
        assert!(matches!(
            similar_k(&a, &mu, &b, &Valuation::empty()),
            Err(Error::InvalidArgument(_))
        ));
        let nu = Valuation::from_tuple(&[e, v0]);
        assert_eq!(similar_k(&a, &mu, &b, &nu).unwrap().unwrap().condition, Condition::Rank);
        let far = b.find(&[3, 4]).unwrap();
        let w0 = b.find(&[0]).unwrap();
        let err = similarity(&a, &mu, &b, &Valuation::from_tuple(&[w0, far])).unwrap_err();
        assert_eq!(err.condition, Condition::Neighborhood(NeighborhoodKind::Coboundary));
    }

    #[test]
    fn hall_test_finds_deficient_sets() {
        assert!(hall_violation(&[2, 1], &[2, 1], &[vec![0], vec![1]]).is_none());
        let (l, r) = hall_violation(&[2, 2], &[3], &[vec![0], vec![0]]).unwrap();
        assert_eq!((l, r), (vec![0, 1], vec![0]));
        let (l, r) = hall_violation(&[1, 4], &[1, 3], &[vec![0, 1], vec![1]]).unwrap();
        assert_eq!((l, r), (vec![1], vec![1]));
    }

    #[test]
    fn isomorphic_copies_survive() {
        let (a, _) = c6_pair();
        for p in [3, 4] {
            let res = solve_game(&a, &a, &Start::Empty, &GameConfig::new(p)).unwrap();
            assert_eq!(res.winner, Winner::PlayerII);
            assert!(res.certificate.moves.is_empty());
            replay_trace(&a, &a, &res.certificate).unwrap();
        }
    }

    fn star_and_path() -> (Acc, Acc) {
        let star = lift_graph(&Graph::uncolored(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap());
        let path = lift_graph(&Graph::uncolored(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap());
        (star, path)
    }

    #[test]
    fn guarded_game_separates_star_from_path() {
        let (a, b) = star_and_path();
        let res = solve_game(&a, &b, &Start::Empty, &GameConfig::new(3)).unwrap();
        assert_eq!(res.winner, Winner::PlayerI);
        let report = replay_trace(&a, &b, &res.certificate).unwrap();
        assert!(!report.final_similar);
    }

    #[test]
    fn guarded_game_cannot_separate_cycle_from_triangles() {
        let (a, b) = c6_pair();
        let res = solve_game(&a, &b, &Start::Empty, &GameConfig::new(3)).unwrap();
        assert_eq!(res.winner, Winner::PlayerII);
    }

    #[test]
    fn four_pebbles_separate_cycle_from_triangles() {
        let (a, b) = c6_pair();
        let res = solve_game(&a, &b, &Start::Empty, &GameConfig::new(4)).unwrap();
        assert_eq!(res.winner, Winner::PlayerI);
        assert!(!replay_trace(&a, &b, &res.certificate).unwrap().final_similar);
    }

    #[test]
    fn tampered_certificates_are_rejected() {
        let (a, b) = star_and_path();
        let res = solve_game(&a, &b, &Start::Empty, &GameConfig::new(3)).unwrap();
        let mut cert = res.certificate.clone();
        let mv = cert.moves.iter_mut().find(|m| !m.responder_stuck).unwrap();
        mv.responder_set.pop();
        assert!(matches!(
            replay_trace(&a, &b, &cert),
            Err(Error::CertificateInvalid { .. })
        ));
        let mut cert = res.certificate.clone();
        cert.hash_a = "00".into();
        assert!(matches!(
            replay_trace(&a, &b, &cert),
            Err(Error::CertificateInvalid { step: 0, .. })
        ));
    }
}
