//! Recognizer for the guarded three-variable fragment.
//!
//! Besides equalities, rank and attribute atoms, negations and conjunctions,
//! the fragment admits two quantifier shapes over a pair `(y, z)` with `x`
//! the remaining variable:
//!
//! ```text
//! ∃^N (y, z) (y = z ∧ E^N(x, y) ∧ ψ(y))                      N ∈ {B, C}
//! ∃^N (y, z) (E^N1(x, y) ∧ E^N2(x, z) ∧ E^N2(y, z) ∧ ψ1(y) ∧ ψ2(z))
//!                                          (N1, N2) ∈ {(down, B), (up, C)}
//! ```
//!
//! Guards are read with the adjacency semantics `E^N(u, v) ⇔ v ∈ N(u)`, so
//! the first shape ranges over boundary (or coboundary) cells of `x` and the
//! second over lower neighbors `y` of `x` together with their shared faces
//! `z`. The body is matched up to the order and nesting of its conjuncts.

use crate::acc::NeighborhoodKind;

use super::ast::{conjuncts, Formula, Node};

fn var_bit(i: usize) -> u64 {
    1 << (i - 1)
}

/// Whether `f` belongs to the guarded three-variable fragment.
pub fn is_guarded_gtc3(f: &Formula) -> bool {
    if f.max_variable() > 3 {
        return false;
    }
    guarded(f)
}

/// Whether `f` is a sentence that is a Boolean combination of guarded
/// formulas and of unguarded counts `∃^N (y, z)(y = z ∧ ψ(y))` with `ψ`
/// guarded. The unguarded form is the move available when no pebble is on
/// the board yet.
pub fn is_guarded_gtc3_sentence(f: &Formula) -> bool {
    if f.max_variable() > 3 || f.free_mask() != 0 {
        return false;
    }
    sentence(f)
}

fn sentence(f: &Formula) -> bool {
    match f.node() {
        Node::And(a, b) => sentence(a) && sentence(b),
        Node::Not(a) => sentence(a),
        Node::Exists { i, j, body, .. } => {
            if guarded(f) {
                return true;
            }
            let mut parts = conjuncts(body);
            if !take(
                &mut parts,
                |g| matches!(g.node(), Node::Eq(a, b) if (a, b) == (i, j) || (a, b) == (j, i)),
            ) {
                return false;
            }
            parts.iter().all(|g| g.free_mask() & !var_bit(*i) == 0 && guarded(g))
        }
        _ => guarded(f),
    }
}

fn guarded(f: &Formula) -> bool {
    match f.node() {
        Node::Eq(..) | Node::Rank(..) | Node::Attr(..) => true,
        Node::Adj(..) => false,
        Node::Not(a) => guarded(a),
        Node::And(a, b) => guarded(a) && guarded(b),
        Node::Exists { i, j, body, .. } => {
            let (y, z) = (*i, *j);
            let Some(x) = (1..=3).find(|&v| v != y && v != z) else {
                return false;
            };
            let parts = conjuncts(body);
            shape_equal(&parts, x, y, z) || shape_pair(&parts, x, y, z)
        }
    }
}

/// Removes the first part satisfying `pred`; reports whether one was found.
fn take(parts: &mut Vec<Formula>, pred: impl Fn(&Formula) -> bool) -> bool {
    match parts.iter().position(pred) {
        Some(p) => {
            parts.remove(p);
            true
        }
        None => false,
    }
}

fn is_adj(f: &Formula, kind: NeighborhoodKind, a: usize, b: usize) -> bool {
    matches!(f.node(), Node::Adj(k, i, j) if *k == kind && *i == a && *j == b)
}

fn shape_equal(parts: &[Formula], x: usize, y: usize, z: usize) -> bool {
    for kind in [NeighborhoodKind::Boundary, NeighborhoodKind::Coboundary] {
        let mut rest = parts.to_vec();
        if !take(
            &mut rest,
            |g| matches!(g.node(), Node::Eq(a, b) if (*a, *b) == (y, z) || (*a, *b) == (z, y)),
        ) {
            return false;
        }
        if !take(&mut rest, |g| is_adj(g, kind, x, y)) {
            continue;
        }
        if rest.iter().all(|g| g.free_mask() & !var_bit(y) == 0 && guarded(g)) {
            return true;
        }
    }
    false
}

fn shape_pair(parts: &[Formula], x: usize, y: usize, z: usize) -> bool {
    use NeighborhoodKind::*;
    for (n1, n2) in [(Lower, Boundary), (Upper, Coboundary)] {
        let mut rest = parts.to_vec();
        if !(take(&mut rest, |g| is_adj(g, n1, x, y))
            && take(&mut rest, |g| is_adj(g, n2, x, z))
            && take(&mut rest, |g| is_adj(g, n2, y, z)))
        {
            continue;
        }
        let scoped = |g: &Formula| g.free_mask() & !var_bit(y) == 0 || g.free_mask() & !var_bit(z) == 0;
        if rest.iter().all(|g| scoped(g) && guarded(g)) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::text::parse_formula;

    fn check(text: &str) -> bool {
        is_guarded_gtc3(&parse_formula(text, 3).unwrap())
    }

    #[test]
    fn atoms() {
        assert!(check("(eq x1 x2)"));
        assert!(check("(not (rank 1 x1))"));
        assert!(!check("(adj B x1 x2)"));
    }

    #[test]
    fn boundary_shape() {
        assert!(check(
            "(exists 2 (x2 x3) (and (eq x2 x3) (and (adj B x1 x2) (rank 0 x2))))"
        ));
        assert!(check("(exists 1 (x2 x3) (and (adj C x1 x2) (eq x3 x2)))"));
        assert!(!check("(exists 1 (x2 x3) (and (eq x2 x3) (adj down x1 x2)))"));
        // The inner formula may only mention the quantified cell.
        assert!(!check(
            "(exists 1 (x2 x3) (and (eq x2 x3) (and (adj B x1 x2) (rank 0 x1))))"
        ));
    }

    #[test]
    fn lower_and_upper_shapes() {
        assert!(check(
            "(exists 3 (x2 x3) (and (and (adj down x1 x2) (adj B x1 x3)) (and (adj B x2 x3) (and (rank 1 x2) (rank 0 x3)))))"
        ));
        assert!(check(
            "(exists 1 (x3 x2) (and (adj up x1 x3) (and (adj C x1 x2) (adj C x3 x2))))"
        ));
        assert!(!check(
            "(exists 1 (x2 x3) (and (adj down x1 x2) (and (adj C x1 x3) (adj C x2 x3))))"
        ));
    }

    #[test]
    fn unguarded_quantifier_is_rejected() {
        assert!(!check("(exists 1 (x1 x2) (adj up x1 x2))"));
        assert!(!check("(exists 1 (x1 x2) (rank 0 x1))"));
    }

    #[test]
    fn sentences_allow_an_unguarded_outer_count() {
        let f = parse_formula(
            "(exists 2 (x1 x2) (and (eq x1 x2) (exists 1 (x2 x3) (and (eq x2 x3) (adj B x1 x2)))))",
            3,
        )
        .unwrap();
        assert!(is_guarded_gtc3_sentence(&f));
        assert!(!is_guarded_gtc3(&f));
    }
}
