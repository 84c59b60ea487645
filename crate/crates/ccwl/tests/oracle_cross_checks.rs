//! The brute-force oracles against the fast paths.

use ccwl::corpus::{self, DEFAULT_SEED};
use ccwl::game::{solve_game, GameConfig, Rules, Start};
use ccwl::oracles::{are_isomorphic, bounded_logic_equivalent_at, exhaustive_game_value, ColorMode};
use ccwl::refine::{decode_tuple, refine, Verdict};

#[test]
fn isomorphic_pairs_never_separate() {
    let mut rng = corpus::rng(DEFAULT_SEED);
    for _ in 0..100 {
        let a = corpus::random_uniform_acc(&mut rng, 8);
        let b = corpus::shuffled_acc(&mut rng, &a);
        assert!(are_isomorphic(&a, &b, ColorMode::Strict).unwrap());
        for k in [1, 2] {
            assert_eq!(refine(&[&a, &b], k, None).unwrap().verdict(), Verdict::Equal);
        }
    }
}

#[test]
fn separated_pairs_are_not_isomorphic() {
    let mut rng = corpus::rng(DEFAULT_SEED ^ 1);
    for _ in 0..100 {
        let (a, b) = corpus::random_acc_pair(&mut rng, 7);
        if refine(&[&a, &b], 2, None).unwrap().verdict() == Verdict::Distinguished {
            assert!(!are_isomorphic(&a, &b, ColorMode::Strict).unwrap());
        }
    }
}

#[test]
fn color_divergence_implies_logic_difference_at_that_depth() {
    let mut rng = corpus::rng(DEFAULT_SEED ^ 2);
    let mut checked = 0;
    for _ in 0..40 {
        let (a, b) = corpus::random_acc_pair(&mut rng, 5);
        for k in [1, 2] {
            let trace = refine(&[&a, &b], k, None).unwrap();
            let last = trace.last_round();
            let vars = k + 2;
            for ia in (0..a.len().pow(k as u32)).step_by(3) {
                let ua = decode_tuple(ia, a.len(), k);
                for ib in (0..b.len().pow(k as u32)).step_by(5) {
                    let ub = decode_tuple(ib, b.len(), k);
                    let Some(t) = (0..=last).find(|&t| trace.color(t, 0, &ua) != trace.color(t, 1, &ub)) else {
                        continue;
                    };
                    let slots = |u: &[usize]| (0..vars).map(|i| u.get(i).copied()).collect::<Vec<_>>();
                    let verdict = bounded_logic_equivalent_at(&a, &slots(&ua), &b, &slots(&ub), t).unwrap();
                    assert!(!verdict.equivalent, "tuples {ua:?} / {ub:?} diverge at round {t}");
                    assert!(verdict.distinguisher.unwrap().quantifier_depth() as usize <= t);
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 50, "only {checked} diverging tuple pairs were checked");
}

#[test]
fn literal_game_agrees_with_the_solver() {
    let tiny = corpus::tiny_complexes(3).unwrap();
    for a in &tiny {
        for b in &tiny {
            let result = solve_game(a, b, &Start::Empty, &GameConfig::new(4)).unwrap();
            let literal = exhaustive_game_value(a, b, 4, result.rounds_checked, Rules::InChosenSet, 12).unwrap();
            assert_eq!(literal, result.winner, "{}\n{}", a.to_json(), b.to_json());
        }
    }
}
