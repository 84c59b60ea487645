//! Acceptance criteria. Each test prints one `[PASS]` / `[FAIL]` line
//! straight to stdout (bypassing output capture) and then asserts.

use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ccwl::acc::{complex_from_json, lift_graph, Acc, Graph};
use ccwl::corpus::{self, DEFAULT_SEED};
use ccwl::game::{certificate_from_json, replay_trace, solve_game, GameConfig, Mode, Rules, Solver, Start, Winner};
use ccwl::logic::{parse_formula, Synthesizer, TableEvaluator};
use ccwl::refine::{
    decode_tuple, kwl_refine, refine, refine_to_stable, RefineOptions, RefinementTrace, SignatureRelation,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> Acc {
    complex_from_json(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn report(criterion: usize, ok: bool, text: &str, elapsed: Duration) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "[{tag}] criterion {criterion:>2}: {text} ({:.2} s)",
        elapsed.as_secs_f64()
    )
    .unwrap();
}

fn ccwl(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ccwl")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

/// Stable round never exceeds the joint tuple count minus one.
fn terminates_in_bound(trace: &RefinementTrace) -> bool {
    match trace.stable_round {
        Some(t) => t < trace.joint_tuple_count().max(1),
        None => false,
    }
}

#[test]
fn cycle_and_two_triangles_compare() {
    let start = Instant::now();
    let c6 = fixture("c6.json");
    let c33 = fixture("two_triangles.json");
    let (c6, c33) = (c6.to_str().unwrap(), c33.to_str().unwrap());
    let (code1, out1) = ccwl(&["compare", c6, c33, "-k", "1"]);
    let (code2, out2) = ccwl(&["compare", c6, c33, "-k", "2"]);
    let ok = code1 == 0 && out1.contains("verdict: Equal") && code2 == 1 && out2.contains("verdict: Disjoint");
    report(
        1,
        ok,
        &format!(
            "compare C6 vs 2C3: k=1 exit {code1}, k=2 exit {code2} ({})",
            out2.lines().next().unwrap_or("")
        ),
        start.elapsed(),
    );
    assert!(ok, "k=1:\n{out1}\nk=2:\n{out2}");
}

/// Number of assignments of `(x1, x2)` under which `body` holds, found by
/// raising the counting threshold until the sentence turns false.
fn pair_count(acc: &Acc, body: &str) -> u64 {
    let mut eval = TableEvaluator::new(acc);
    let mut n = 1;
    loop {
        let f = parse_formula(&format!("(exists {n} (x1 x2) {body})"), 4).unwrap();
        if !eval.holds_at(&f, &[]).unwrap() {
            return n - 1;
        }
        n += 1;
    }
}

const TRIANGLE_BODY: &str = "(and (and (and (rank 1 x1) (rank 1 x2)) (adj down x1 x2))
    (exists 1 (x3 x4) (and (and (and (and (rank 1 x3) (rank 1 x4)) (adj down x3 x4)) (adj down x1 x3)) (eq x2 x4))))";

#[test]
fn triangle_formula_separates_cycle_from_two_triangles() {
    let start = Instant::now();
    let c6 = load("c6.json");
    let c33 = load("two_triangles.json");
    let holds = |acc: &Acc, n: u64| {
        let f = parse_formula(&format!("(exists {n} (x1 x2) {TRIANGLE_BODY})"), 4).unwrap();
        TableEvaluator::new(acc).holds_at(&f, &[]).unwrap()
    };
    let phi = (holds(&c6, 1), holds(&c33, 1));
    let phi12 = (holds(&c6, 12), holds(&c33, 12));
    let count = pair_count(&c33, TRIANGLE_BODY);
    let ok = phi == (false, true) && phi12 == (false, true) && count == 12;
    report(
        2,
        ok,
        &format!("triangle sentence on C6/2C3 = {phi:?}, threshold 12 = {phi12:?}, pair count on 2C3 = {count}"),
        start.elapsed(),
    );
    assert!(ok);
}

const CYCLE_BODY: &str = "(and (adj down x1 x2)
    (exists 1 (x3 x4) (and (and (and (and (and (and
        (adj down x2 x3) (adj down x3 x4)) (adj down x4 x1))
        (not (eq x1 x3))) (not (eq x2 x4)))
        (not (adj down x1 x3))) (not (adj down x2 x4)))))";

#[test]
fn four_cycle_formula_separates_square_pair() {
    let start = Instant::now();
    let a = load("figure2_a.json");
    let b = load("figure2_b.json");
    let holds = |acc: &Acc| {
        let f = parse_formula(&format!("(exists 16 (x1 x2) {CYCLE_BODY})"), 4).unwrap();
        TableEvaluator::new(acc).holds_at(&f, &[]).unwrap()
    };
    let (on_a, on_b) = (holds(&a), holds(&b));
    let count = pair_count(&a, CYCLE_BODY);
    let ok = on_a && !on_b && count == 16;
    report(
        3,
        ok,
        &format!("four-cycle sentence true on A: {on_a}, true on B: {on_b}, pair count on A = {count}"),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn four_pebble_game_on_square_pair() {
    let start = Instant::now();
    let (fa, fb) = (fixture("figure2_a.json"), fixture("figure2_b.json"));
    let (fa, fb) = (fa.to_str().unwrap(), fb.to_str().unwrap());
    let (code, out) = ccwl(&["game", fa, fb, "--pebbles", "4", "--mode", "canonical", "--json"]);
    let cert = certificate_from_json(&out).unwrap();
    let replay = replay_trace(&load("figure2_a.json"), &load("figure2_b.json"), &cert);
    let first = cert.moves.first().map(|m| m.pair_set.len());
    let ok = code == 1
        && cert.winner == Winner::PlayerI
        && replay.as_ref().is_ok_and(|r| !r.final_similar || r.stuck)
        && first == Some(16)
        && cert.moves.len() <= 2
        && start.elapsed() < Duration::from_secs(10);
    report(
        4,
        ok,
        &format!(
            "game A vs B with 4 pebbles: {:?} in {} rounds, first move {} pairs, replay {}",
            cert.winner,
            cert.moves.len(),
            first.unwrap_or(0),
            if replay.is_ok() { "valid" } else { "invalid" }
        ),
        start.elapsed(),
    );
    assert!(ok, "{replay:?}");
}

#[test]
fn uniform_pairs_are_identical_or_disjoint() {
    let start = Instant::now();
    let mut rng = corpus::rng(DEFAULT_SEED);
    let mut counts = [0usize; 3];
    let mut unbounded = 0;
    for _ in 0..500 {
        let (a, b) = corpus::random_acc_pair(&mut rng, 8);
        for k in [1, 2] {
            let options = RefineOptions {
                use_anchor: true,
                max_rounds: None,
            };
            let cmp = refine_to_stable(&a, Some(&b), k, options).unwrap();
            unbounded += usize::from(!terminates_in_bound(&cmp.trace));
            match cmp.trace.signature_relation().unwrap() {
                SignatureRelation::Equal => counts[0] += 1,
                SignatureRelation::Disjoint => counts[1] += 1,
                SignatureRelation::PartialOverlap => counts[2] += 1,
            }
        }
    }
    let ok = counts[2] == 0 && unbounded == 0;
    report(
        5,
        ok,
        &format!(
            "500 anchored uniform pairs at k=1,2: {} Equal, {} Disjoint, {} PartialOverlap",
            counts[0], counts[1], counts[2]
        ),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn nonuniform_pair_overlaps_partially() {
    let start = Instant::now();
    let a = load("nonuniform_a.json");
    let b = load("nonuniform_b.json");
    let relation = |use_anchor| {
        let options = RefineOptions {
            use_anchor,
            max_rounds: None,
        };
        refine_to_stable(&a, Some(&b), 1, options)
            .unwrap()
            .trace
            .signature_relation()
            .unwrap()
    };
    let (anchored, plain) = (relation(true), relation(false));
    let ok = !a.is_uniform() && !b.is_uniform() && anchored == SignatureRelation::PartialOverlap;
    report(
        6,
        ok,
        &format!("non-uniform pair at k=1: anchored {anchored:?}, unanchored {plain:?}"),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn graph_refinement_matches_lifted_refinement() {
    let start = Instant::now();
    let mut rng = corpus::rng(DEFAULT_SEED);
    let mut mismatches = 0;
    let mut unbounded = 0;
    let mut distinguished = 0;
    for _ in 0..200 {
        let (g, h) = corpus::random_graph_pair(&mut rng, 7);
        for k in [1, 2] {
            let wl = kwl_refine(&g, &h, k, None).unwrap();
            let (lg, lh) = (lift_graph(&g), lift_graph(&h));
            let cc = refine(&[&lg, &lh], k, None).unwrap();
            unbounded += usize::from(!terminates_in_bound(&wl) || !terminates_in_bound(&cc));
            distinguished += usize::from(cc.first_divergence.is_some());
            mismatches += usize::from(wl.verdict() != cc.verdict());
        }
    }
    let ok = mismatches == 0 && unbounded == 0;
    report(
        7,
        ok,
        &format!("200 graph pairs at k=1,2: {mismatches} verdict mismatches ({distinguished} of 400 distinguished)"),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn refinement_stabilizes_within_the_tuple_bound() {
    let start = Instant::now();
    let mut checked = 0;
    let mut failures = 0;
    let mut check = |trace: &RefinementTrace| {
        checked += 1;
        failures += usize::from(!terminates_in_bound(trace));
    };
    let tiny = corpus::tiny_complexes(3).unwrap();
    let curated = corpus::curated_complexes();
    for set in [&tiny, &curated] {
        for a in set.iter() {
            for b in set.iter() {
                for k in [1, 2] {
                    check(&refine(&[a, b], k, None).unwrap());
                }
            }
        }
    }
    let mut rng = corpus::rng(DEFAULT_SEED);
    for _ in 0..200 {
        let (a, b) = corpus::random_acc_pair(&mut rng, 8);
        for k in [1, 2, 3] {
            check(&refine(&[&a, &b], k, None).unwrap());
        }
        let (g, h) = corpus::random_graph_pair(&mut rng, 7);
        check(&kwl_refine(&g, &h, 2, None).unwrap());
    }
    for name in [
        "c6.json",
        "two_triangles.json",
        "figure2_a.json",
        "figure2_b.json",
        "nonuniform_a.json",
    ] {
        check(&refine(&[&load(name)], 2, None).unwrap());
    }
    let ok = failures == 0;
    report(
        8,
        ok,
        &format!("{checked} refinement runs, {failures} exceeded the stabilization bound"),
        start.elapsed(),
    );
    assert!(ok);
}

#[derive(Default)]
struct TriadTally {
    pairs: usize,
    inconsistencies: usize,
    separators: usize,
}

/// Compares per-round colors with game survival and checks one verified
/// separator per distinct pair of diverging final colors.
fn triad_check(a: &Acc, b: &Acc, k: usize, tally: &mut TriadTally) {
    tally.pairs += 1;
    let mut solver = Solver::new(a, b, k + 2, Mode::Canonical, Rules::InChosenSet).unwrap();
    let trace = solver.trace().clone();
    let last = trace.last_round();
    let tuples = |acc: &Acc| {
        (0..acc.len().pow(k as u32))
            .map(|i| decode_tuple(i, acc.len(), k))
            .collect::<Vec<_>>()
    };
    let (tuples_a, tuples_b) = (tuples(a), tuples(b));
    for t in 0..=last + 1 {
        for ua in &tuples_a {
            for ub in &tuples_b {
                let same = trace.color(t.min(last), 0, ua) == trace.color(t.min(last), 1, ub);
                if same != solver.survives(&Start::Tuples(ua.clone(), ub.clone()), t).unwrap() {
                    tally.inconsistencies += 1;
                }
            }
        }
        if t >= 1 {
            let prev = (t - 1).min(last);
            let same = trace.signature(prev, 0) == trace.signature(prev, 1);
            if same != solver.survives(&Start::Empty, t).unwrap() {
                tally.inconsistencies += 1;
            }
        }
    }
    let mut synth = Synthesizer::new(&[a, b], &trace).unwrap();
    let mut eval_a = TableEvaluator::new(a);
    let mut eval_b = TableEvaluator::new(b);
    let mut seen = HashSet::new();
    for ua in &tuples_a {
        for ub in &tuples_b {
            let (ca, cb) = (trace.color(last, 0, ua), trace.color(last, 1, ub));
            if ca == cb || !seen.insert((ca, cb)) {
                continue;
            }
            let divergence = (0..=last)
                .find(|&t| trace.color(t, 0, ua) != trace.color(t, 1, ub))
                .unwrap();
            let sep = synth.separate_tuples(ua, ub).unwrap();
            let on_a = eval_a.holds_at(&sep.formula, ua).unwrap();
            let on_b = eval_b.holds_at(&sep.formula, ub).unwrap();
            if on_a == on_b || sep.formula.quantifier_depth() as usize > divergence {
                tally.inconsistencies += 1;
            }
            tally.separators += 1;
        }
    }
    if let Some(t) = trace.first_divergence {
        let sep = synth.separate_complexes().unwrap();
        let on_a = eval_a.holds_at(&sep.formula, &[]).unwrap();
        let on_b = eval_b.holds_at(&sep.formula, &[]).unwrap();
        // The sentence quantifies one extra pair to count the diverging class.
        if on_a == on_b || sep.formula.quantifier_depth() as usize > t + 1 {
            tally.inconsistencies += 1;
        }
        tally.separators += 1;
    }
}

#[test]
fn refinement_game_and_logic_agree() {
    let start = Instant::now();
    let mut tally = TriadTally::default();
    let curated = corpus::curated_complexes();
    for a in &curated {
        for b in &curated {
            for k in [1, 2] {
                triad_check(a, b, k, &mut tally);
            }
        }
    }
    let mut rng = corpus::rng(DEFAULT_SEED);
    for _ in 0..200 {
        let (a, b) = corpus::random_acc_pair(&mut rng, 6);
        for k in [1, 2] {
            triad_check(&a, &b, k, &mut tally);
        }
    }
    let ok = tally.inconsistencies == 0;
    report(
        9,
        ok,
        &format!(
            "{} pair/arity runs: {} inconsistencies, {} verified separators",
            tally.pairs, tally.inconsistencies, tally.separators
        ),
        start.elapsed(),
    );
    assert!(ok);
}

#[test]
fn exhaustive_and_canonical_games_agree() {
    let start = Instant::now();
    let tiny = corpus::tiny_complexes(3).unwrap();
    let mut runs = 0;
    let mut disagreements = 0;
    for a in &tiny {
        for b in &tiny {
            for pebbles in [3, 4] {
                let mut config = GameConfig::new(pebbles);
                let canonical = solve_game(a, b, &Start::Empty, &config).unwrap();
                config.mode = Mode::Exhaustive;
                let exhaustive = solve_game(a, b, &Start::Empty, &config).unwrap();
                runs += 1;
                disagreements += usize::from(canonical.winner != exhaustive.winner);
                for cert in [&canonical.certificate, &exhaustive.certificate] {
                    disagreements += usize::from(replay_trace(a, b, cert).is_err());
                }
            }
        }
    }
    let ok = disagreements == 0;
    report(
        10,
        ok,
        &format!("{runs} games with |X|² ≤ 12: {disagreements} winner disagreements or invalid certificates"),
        start.elapsed(),
    );
    assert!(ok);
}

/// Mean time of one refinement step at k = 2 on the lifted cycle with `n` vertices.
fn step_time(n: u32) -> (usize, f64) {
    let g = Graph::uncolored(n as usize, (0..n).map(|i| (i, (i + 1) % n)).collect()).unwrap();
    let acc = lift_graph(&g);
    let mut best = f64::INFINITY;
    for _ in 0..3 {
        let trace = refine(&[&acc], 2, Some(2)).unwrap();
        let total: f64 = trace.step_times.iter().map(Duration::as_secs_f64).sum();
        best = best.min(total / trace.step_times.len().max(1) as f64);
    }
    (acc.len(), best)
}

#[test]
fn refinement_step_time_scales_polynomially() {
    let start = Instant::now();
    let samples: Vec<(usize, f64)> = [6, 12, 24].into_iter().map(step_time).collect();
    // Doubling the cell count multiplies the per-step work by 2^(k+2) = 16.
    let ratios: Vec<f64> = samples.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let within = ratios.iter().all(|&r| (16.0 / 3.0..=48.0).contains(&r));
    let text = samples
        .iter()
        .map(|(n, t)| format!("{n} cells {:.2} ms", t * 1000.0))
        .collect::<Vec<_>>()
        .join(", ");
    let ratio_text = ratios.iter().map(|r| format!("{r:.1}")).collect::<Vec<_>>().join(", ");
    let tag = if within { "within" } else { "outside" };
    report(
        11,
        true,
        &format!("informational: per-step times {text}; doubling ratios {ratio_text} ({tag} the 16/3 to 48 envelope)"),
        start.elapsed(),
    );
}
