//! Side-by-side run of refinement, game and logic on one pair of complexes.
//!
//! All three legs work on the complexes as given (no anchor), so that the
//! refinement classes, the game positions and the formulas talk about the
//! same cells.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::acc::Acc;
use crate::error::{Error, Result};
use crate::game::DEFAULT_EXHAUSTIVE_CAP;
use crate::game::{replay_trace, solve_game, Certificate, GameConfig, Start, Winner};
use crate::logic::{is_guarded_gtc3_sentence, print_formula, Synthesizer};
use crate::oracles::{bounded_logic_equivalent, DEFAULT_ISO_CAP, LOGIC_VALUATION_CAP};
use crate::refine::{refine, Verdict};

/// Environment variable holding default caps in the `--caps` syntax.
pub const CAPS_ENV: &str = "CCWL_CAPS";

/// Size caps of the brute-force parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest cell count for the isomorphism oracle.
    pub iso: usize,
    /// Largest `|X|²` for exhaustive game search.
    pub exhaustive: usize,
    /// Largest number of partial valuations for the logic oracle.
    pub logic: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            iso: DEFAULT_ISO_CAP,
            exhaustive: DEFAULT_EXHAUSTIVE_CAP,
            logic: LOGIC_VALUATION_CAP,
        }
    }
}

impl Caps {
    /// Parses `name=value` items separated by commas, starting from `self`.
    pub fn parse_over(mut self, text: &str) -> Result<Caps> {
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("cap {item:?} is not name=value")))?;
            let value: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("cap {name} needs a positive integer")))?;
            if value == 0 {
                return Err(Error::InvalidArgument(format!("cap {name} must be at least 1")));
            }
            match name.trim() {
                "iso" => self.iso = value,
                "exhaustive" => self.exhaustive = value,
                "logic" => self.logic = value,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown cap {other:?}; use iso, exhaustive or logic"
                    )))
                }
            }
        }
        Ok(self)
    }
}

/// Outcome of one leg.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LegStatus {
    Equivalent,
    Distinguished,
    Skipped,
}

impl fmt::Display for LegStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LegStatus::Equivalent => "Equivalent",
            LegStatus::Distinguished => "Distinguished",
            LegStatus::Skipped => "Skipped",
        })
    }
}

/// Result of one leg with its supporting artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub status: LegStatus,
    /// Why the leg was skipped or how it was decided.
    pub note: String,
    /// Round (refinement), rounds to win (game) or quantifier depth (logic).
    pub depth: Option<usize>,
}

/// Consolidated report of the three legs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriadReport {
    pub version: u32,
    pub k: usize,
    pub inputs: Vec<String>,
    pub legs: BTreeMap<String, Leg>,
    pub consistent: bool,
    /// Legs whose status disagrees with the refinement leg.
    pub disagreeing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

/// Runs the refinement, game and logic legs at arity `k`.
pub fn run_triad(a: &Acc, b: &Acc, k: usize, caps: &Caps) -> Result<TriadReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("arity must be at least 1".into()));
    }
    let trace = refine(&[a, b], k, None)?;
    let stable = trace.stable_round.expect("unbounded refinement always stabilizes");
    let mut legs = BTreeMap::new();
    let refinement = match trace.verdict() {
        Verdict::Distinguished => Leg {
            status: LegStatus::Distinguished,
            note: format!("signatures differ from round {}", trace.first_divergence.unwrap_or(0)),
            depth: trace.first_divergence,
        },
        _ => Leg {
            status: LegStatus::Equivalent,
            note: format!("signatures agree through the stable round {stable}"),
            depth: Some(stable),
        },
    };
    legs.insert("refinement".to_string(), refinement.clone());

    let mut certificate = None;
    let game = if k > 2 {
        Leg {
            status: LegStatus::Skipped,
            note: "whole-complex games are supported for k ≤ 2".into(),
            depth: None,
        }
    } else {
        let result = solve_game(a, b, &Start::Empty, &GameConfig::new(k + 2))?;
        let replay = replay_trace(a, b, &result.certificate);
        let leg = match (result.winner, &replay) {
            (_, Err(e)) => return Err(Error::InvalidState(format!("solver certificate failed replay: {e}"))),
            (Winner::PlayerI, Ok(_)) => Leg {
                status: LegStatus::Distinguished,
                note: format!(
                    "Player I wins; certificate with {} moves replays",
                    result.certificate.moves.len()
                ),
                depth: result.decided_round,
            },
            (Winner::PlayerII, Ok(_)) => Leg {
                status: LegStatus::Equivalent,
                note: format!("Player II survives {} rounds", result.rounds_checked),
                depth: Some(result.rounds_checked),
            },
        };
        certificate = Some(result.certificate);
        leg
    };
    legs.insert("game".to_string(), game);

    let mut formula = None;
    let logic = if refinement.status == LegStatus::Distinguished {
        if k > 2 {
            Leg {
                status: LegStatus::Skipped,
                note: "sentence synthesis is supported for k ≤ 2".into(),
                depth: None,
            }
        } else {
            let mut synth = Synthesizer::new(&[a, b], &trace)?;
            let sep = synth.separate_complexes()?;
            if k == 1 && !is_guarded_gtc3_sentence(&sep.formula) {
                return Err(Error::InvalidState(
                    "synthesized sentence left the guarded fragment".into(),
                ));
            }
            let depth = sep.formula.quantifier_depth() as usize;
            formula = Some(print_formula(&sep.formula));
            Leg {
                status: LegStatus::Distinguished,
                note: format!("verified sentence true on input {}", sep.true_on + 1),
                depth: Some(depth),
            }
        }
    } else if k != 2 {
        Leg {
            status: LegStatus::Skipped,
            note: "the logic oracle decides the unguarded four-variable logic, which matches k = 2 only".into(),
            depth: None,
        }
    } else {
        let space = (a.len().max(b.len()) + 1).checked_pow(4).unwrap_or(usize::MAX);
        if space > caps.logic {
            Leg {
                status: LegStatus::Skipped,
                note: format!("{space} valuations exceed the logic cap {}", caps.logic),
                depth: None,
            }
        } else {
            let depth = stable + 1;
            let verdict = bounded_logic_equivalent(a, b, 4, depth)?;
            if let Some(f) = &verdict.distinguisher {
                formula = Some(print_formula(f));
            }
            Leg {
                status: if verdict.equivalent {
                    LegStatus::Equivalent
                } else {
                    LegStatus::Distinguished
                },
                note: format!("exact type comparison up to depth {depth}"),
                depth: Some(depth),
            }
        }
    };
    legs.insert("logic".to_string(), logic);

    let disagreeing: Vec<String> = legs
        .iter()
        .filter(|(_, l)| l.status != LegStatus::Skipped && l.status != refinement.status)
        .map(|(name, _)| name.clone())
        .collect();
    Ok(TriadReport {
        version: 1,
        k,
        inputs: vec![a.content_hash(), b.content_hash()],
        consistent: disagreeing.is_empty(),
        disagreeing,
        legs,
        formula,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_parse_and_reject_bad_items() {
        let caps = Caps::default().parse_over("iso=8, logic=100").unwrap();
        assert_eq!(
            (caps.iso, caps.exhaustive, caps.logic),
            (8, DEFAULT_EXHAUSTIVE_CAP, 100)
        );
        assert!(Caps::default().parse_over("iso").is_err());
        assert!(Caps::default().parse_over("iso=0").is_err());
        assert!(Caps::default().parse_over("speed=3").is_err());
    }

    #[test]
    fn isomorphic_pairs_are_consistent() {
        for a in crate::corpus::curated_complexes().iter().take(8) {
            for k in [1, 2] {
                let report = run_triad(a, a, k, &Caps::default()).unwrap();
                assert!(report.consistent, "{report:?}");
                assert_eq!(report.legs["game"].status, LegStatus::Equivalent);
            }
        }
    }
}
