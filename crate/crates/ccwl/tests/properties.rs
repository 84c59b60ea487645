//! Randomized properties over seeded corpus draws.

use proptest::prelude::*;

use ccwl::acc::Acc;
use ccwl::corpus;
use ccwl::game::{certificate_from_json, certificate_to_json, replay_trace, solve_game, GameConfig, Start};
use ccwl::logic::{parse_formula, print_formula, Synthesizer};
use ccwl::refine::{refine, refine_to_stable, RefineOptions, SignatureRelation, Verdict};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let a = corpus::random_uniform_acc(&mut corpus::rng(seed), 8);
        let back = Acc::from_json(&a.to_json()).unwrap();
        prop_assert_eq!(back.content_hash(), a.content_hash());
        prop_assert_eq!(back.to_json(), a.to_json());
    }

    #[test]
    fn renaming_vertices_never_changes_the_verdict(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let a = corpus::random_uniform_acc(&mut rng, 8);
        let b = corpus::shuffled_acc(&mut rng, &a);
        for k in [1, 2] {
            let options = RefineOptions { use_anchor: true, max_rounds: None };
            let cmp = refine_to_stable(&a, Some(&b), k, options).unwrap();
            prop_assert_eq!(cmp.trace.signature_relation().unwrap(), SignatureRelation::Equal);
        }
    }

    #[test]
    fn synthesized_sentences_survive_printing(seed in any::<u64>()) {
        let (a, b) = corpus::random_acc_pair(&mut corpus::rng(seed), 6);
        for k in [1, 2] {
            let trace = refine(&[&a, &b], k, None).unwrap();
            if trace.verdict() != Verdict::Distinguished {
                continue;
            }
            let sep = Synthesizer::new(&[&a, &b], &trace).unwrap().separate_complexes().unwrap();
            let text = print_formula(&sep.formula);
            let parsed = parse_formula(&text, k + 2).unwrap();
            prop_assert_eq!(print_formula(&parsed), text);
        }
    }

    #[test]
    fn certificates_round_trip_and_replay(seed in any::<u64>()) {
        let (a, b) = corpus::random_acc_pair(&mut corpus::rng(seed), 5);
        for pebbles in [3, 4] {
            let result = solve_game(&a, &b, &Start::Empty, &GameConfig::new(pebbles)).unwrap();
            let back = certificate_from_json(&certificate_to_json(&result.certificate)).unwrap();
            prop_assert_eq!(&back, &result.certificate);
            prop_assert!(replay_trace(&a, &b, &back).is_ok());
        }
    }
}
