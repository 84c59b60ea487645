//! Command-line front end: lifting, anchoring, refinement, comparison,
//! formula checking and synthesis, pebble games, triad runs and oracles.
//!
//! Verdict commands exit with 0 when the inputs are equivalent, 1 when they
//! are distinguished and 2 on any error or inconclusive run.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ccwl::acc::{add_anchor, complex_from_json, Acc, Graph};
use ccwl::corpus;
use ccwl::game::{
    certificate_from_json, certificate_to_json, replay_trace, solve_game, GameConfig, Mode, Rules, Start, Winner,
};
use ccwl::logic::{evaluate, is_guarded_gtc3, parse_formula, pretty_formula, print_formula, Synthesizer, Valuation};
use ccwl::oracles::{bounded_logic_equivalent_at, exhaustive_game_value, find_isomorphism, ColorMode};
use ccwl::refine::{refine, refine_to_stable, RefineOptions, SignatureRelation, TraceDocument, Verdict};
use ccwl::triad::{run_triad, Caps, LegStatus, CAPS_ENV};
use ccwl::{Error, Result};

const EQUIVALENT: u8 = 0;
const DISTINGUISHED: u8 = 1;
const FAILURE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "ccwl",
    version,
    about = "Color refinement, counting logic and pebble games on attributed combinatorial complexes"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Write the command's JSON document to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the JSON document on stdout instead of the summary.
    #[arg(long, global = true)]
    json: bool,
    /// Size caps as name=value pairs: iso, exhaustive, logic (defaults come from CCWL_CAPS).
    #[arg(long, global = true)]
    caps: Option<String>,
    /// Print extra diagnostics on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Args, Debug, Clone)]
struct RefineFlags {
    /// Tuple arity.
    #[arg(short = 'k', default_value_t = 1)]
    k: usize,
    /// Stop after this many rounds even if the coloring is not stable.
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Refine the complexes as given instead of adding the broadcast anchor.
    #[arg(long)]
    no_anchor: bool,
    /// Report wall time (also adds it to the document).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lift a graph document to a complex document.
    Lift { graph: PathBuf },
    /// Add the broadcast anchor to a complex (graphs are lifted first).
    Anchor { input: PathBuf },
    /// Refine one complex and export the trace.
    Refine {
        input: PathBuf,
        #[command(flatten)]
        flags: RefineFlags,
    },
    /// Jointly refine two complexes and report their relation.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        flags: RefineFlags,
    },
    /// Evaluate a formula on a complex.
    Check {
        input: PathBuf,
        /// Formula text; `@path` reads it from a file.
        formula: String,
        /// Number of variables x1..xN the formula may use.
        #[arg(long, default_value_t = 4)]
        vars: usize,
        /// Cells assigned to x1, x2, ... as comma-separated cell indices.
        #[arg(long, value_delimiter = ',')]
        tuple: Vec<usize>,
    },
    /// Synthesize a formula separating two complexes or two tuples.
    Separate {
        a: PathBuf,
        b: PathBuf,
        #[arg(short = 'k', default_value_t = 1)]
        k: usize,
        /// Tuple of cell indices in the first complex.
        #[arg(long, value_delimiter = ',', requires = "tuple_b")]
        tuple_a: Vec<usize>,
        /// Tuple of cell indices in the second complex.
        #[arg(long, value_delimiter = ',', requires = "tuple_a")]
        tuple_b: Vec<usize>,
        /// Print the formula with indentation.
        #[arg(long)]
        pretty: bool,
    },
    /// Solve the counting pebble game.
    Game {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        game: GameFlags,
        /// Starting cells of the first complex (pebbles x1, x2, ...).
        #[arg(long, value_delimiter = ',', requires = "start_b")]
        start_a: Vec<usize>,
        /// Starting cells of the second complex.
        #[arg(long, value_delimiter = ',', requires = "start_a")]
        start_b: Vec<usize>,
    },
    /// Check a game certificate against two complexes.
    Replay {
        a: PathBuf,
        b: PathBuf,
        certificate: PathBuf,
    },
    /// Run refinement, game and logic side by side without anchoring.
    Triad {
        a: PathBuf,
        b: PathBuf,
        #[arg(short = 'k', default_value_t = 1)]
        k: usize,
    },
    /// Brute-force reference procedures.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Run the triad on seeded random pairs and count inconsistencies.
    Sweep {
        #[arg(long, default_value_t = corpus::DEFAULT_SEED)]
        seed: u64,
        /// Number of random pairs per arity.
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Largest number of cells per complex.
        #[arg(long, default_value_t = 6)]
        max_cells: usize,
        /// Arities to sweep.
        #[arg(short = 'k', value_delimiter = ',', default_values_t = [1, 2])]
        k: Vec<usize>,
    },
}

#[derive(Args, Debug, Clone)]
struct GameFlags {
    /// Number of pebbles (3 plays the guarded game).
    #[arg(long, default_value_t = 4)]
    pebbles: usize,
    /// Round budget; defaults to the stabilization bound.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Canonical)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = RulesArg::InChosenSet)]
    rules: RulesArg,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Search for an isomorphism by backtracking.
    Iso {
        a: PathBuf,
        b: PathBuf,
        /// Only require attribute classes to correspond.
        #[arg(long)]
        classes: bool,
    },
    /// Compare bounded-depth logic types.
    Logic {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 4)]
        vars: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, value_delimiter = ',', requires = "tuple_b")]
        tuple_a: Vec<usize>,
        #[arg(long, value_delimiter = ',', requires = "tuple_a")]
        tuple_b: Vec<usize>,
    },
    /// Solve the game literally from the empty board.
    Game {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 4)]
        pebbles: usize,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long, value_enum, default_value_t = RulesArg::InChosenSet)]
        rules: RulesArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Canonical,
    Exhaustive,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RulesArg {
    InChosenSet,
    AsWritten,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Canonical => Mode::Canonical,
            ModeArg::Exhaustive => Mode::Exhaustive,
        }
    }
}

impl From<RulesArg> for Rules {
    fn from(r: RulesArg) -> Rules {
        match r {
            RulesArg::InChosenSet => Rules::InChosenSet,
            RulesArg::AsWritten => Rules::AsWritten,
        }
    }
}

/// Output of one command: a human summary, an optional document and an exit code.
struct Outcome {
    summary: String,
    document: Option<String>,
    code: u8,
}

impl Outcome {
    fn new(summary: String, document: Option<String>, code: u8) -> Self {
        Outcome {
            summary,
            document,
            code,
        }
    }

    fn with_doc<T: Serialize>(summary: String, doc: &T, code: u8) -> Self {
        let text = serde_json::to_string_pretty(doc).expect("documents always serialize");
        Outcome::new(summary, Some(text), code)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&cli.global, &outcome) {
                eprintln!("error: {e}");
                return ExitCode::from(FAILURE);
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(FAILURE)
        }
    }
}

fn emit(global: &Global, outcome: &Outcome) -> Result<()> {
    if let (Some(path), Some(doc)) = (&global.out, &outcome.document) {
        fs::write(path, format!("{doc}\n")).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    match (&outcome.document, global.json) {
        (Some(doc), true) => println!("{doc}"),
        _ => print!("{}", outcome.summary),
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Acc> {
    complex_from_json(&read(path)?).map_err(|e| match e {
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn caps(global: &Global) -> Result<Caps> {
    let mut caps = Caps::default();
    if let Ok(text) = std::env::var(CAPS_ENV) {
        caps = caps.parse_over(&text)?;
    }
    match &global.caps {
        Some(text) => caps.parse_over(text),
        None => Ok(caps),
    }
}

fn check_arity(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("-k must be at least 1".into()));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome> {
    let global = &cli.global;
    let caps = caps(global)?;
    match &cli.command {
        Command::Lift { graph } => {
            let acc = ccwl::acc::lift_graph(&Graph::from_json(&read(graph)?)?);
            let doc = acc.to_json();
            Ok(Outcome::new(format!("{doc}\n"), Some(doc), EQUIVALENT))
        }
        Command::Anchor { input } => {
            let acc = add_anchor(&load(input)?)?;
            let doc = acc.to_json();
            Ok(Outcome::new(format!("{doc}\n"), Some(doc), EQUIVALENT))
        }
        Command::Refine { input, flags } => cmd_refine(global, &[input], flags),
        Command::Compare { a, b, flags } => cmd_refine(global, &[a, b], flags),
        Command::Check {
            input,
            formula,
            vars,
            tuple,
        } => cmd_check(input, formula, *vars, tuple),
        Command::Separate {
            a,
            b,
            k,
            tuple_a,
            tuple_b,
            pretty,
        } => cmd_separate(a, b, *k, tuple_a, tuple_b, *pretty),
        Command::Game {
            a,
            b,
            game,
            start_a,
            start_b,
        } => cmd_game(a, b, game, start_a, start_b, &caps),
        Command::Replay { a, b, certificate } => cmd_replay(a, b, certificate),
        Command::Triad { a, b, k } => cmd_triad(a, b, *k, &caps),
        Command::Oracle { which } => cmd_oracle(which, &caps),
        Command::Sweep {
            seed,
            count,
            max_cells,
            k,
        } => cmd_sweep(global, *seed, *count, *max_cells, k, &caps),
    }
}

fn relation_name(r: SignatureRelation) -> &'static str {
    match r {
        SignatureRelation::Equal => "Equal",
        SignatureRelation::Disjoint => "Disjoint",
        SignatureRelation::PartialOverlap => "PartialOverlap",
    }
}

fn cmd_refine(global: &Global, paths: &[&PathBuf], flags: &RefineFlags) -> Result<Outcome> {
    check_arity(flags.k)?;
    let inputs: Vec<Acc> = paths.iter().map(|p| load(p)).collect::<Result<_>>()?;
    let options = RefineOptions {
        use_anchor: !flags.no_anchor,
        max_rounds: flags.max_rounds,
    };
    let cmp = refine_to_stable(&inputs[0], inputs.get(1), flags.k, options)?;
    for w in &cmp.warnings {
        eprintln!("warning: {w}");
    }
    let trace = &cmp.trace;
    let hashes = inputs.iter().map(Acc::content_hash).collect();
    let doc = TraceDocument::from_trace(trace, options.use_anchor, hashes, flags.timing);
    let mut summary = String::new();
    let stable = match trace.stable_round {
        Some(t) => t.to_string(),
        None => format!("not reached within {} rounds", trace.last_round()),
    };
    let code = if inputs.len() == 1 {
        summary.push_str(&format!("colors: {}\n", trace.colors_at(trace.last_round()).num_colors));
        EQUIVALENT
    } else {
        let verdict = trace.verdict();
        let label = match (verdict, doc.relation) {
            (Verdict::Inconclusive, _) => "Inconclusive",
            (_, Some(r)) => relation_name(r),
            (Verdict::Distinguished, None) => "Distinguished",
            (Verdict::Equal, None) => "Equal",
        };
        summary.push_str(&format!("verdict: {label}\n"));
        match trace.first_divergence {
            Some(t) => summary.push_str(&format!("first divergence: round {t}\n")),
            None => summary.push_str("first divergence: none\n"),
        }
        match verdict {
            Verdict::Equal => EQUIVALENT,
            Verdict::Distinguished => DISTINGUISHED,
            Verdict::Inconclusive => FAILURE,
        }
    };
    summary.push_str(&format!("stable round: {stable}\n"));
    if flags.timing {
        let line = format!("time: {:.3} ms\n", trace.elapsed.as_secs_f64() * 1000.0);
        summary.push_str(&line);
        if global.json {
            eprint!("{line}");
        }
    }
    if global.verbose {
        for (t, d) in trace.step_times.iter().enumerate() {
            eprintln!("round {}: {:.3} ms", t + 1, d.as_secs_f64() * 1000.0);
        }
    }
    Ok(Outcome::with_doc(summary, &doc, code))
}

fn read_formula_text(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => read(Path::new(path)),
        None => Ok(arg.to_string()),
    }
}

#[derive(Serialize)]
struct CheckDocument {
    input: String,
    formula: String,
    tuple: Vec<usize>,
    value: bool,
    quantifier_depth: u32,
    guarded: bool,
}

fn cmd_check(input: &Path, formula: &str, vars: usize, tuple: &[usize]) -> Result<Outcome> {
    let acc = load(input)?;
    let f = parse_formula(&read_formula_text(formula)?, vars)?;
    if let Some(&bad) = tuple.iter().find(|&&c| c >= acc.len()) {
        return Err(Error::InvalidArgument(format!(
            "cell index {bad} is out of range (the complex has {} cells)",
            acc.len()
        )));
    }
    let value = evaluate(&acc, &Valuation::from_tuple(tuple), &f)?;
    let doc = CheckDocument {
        input: acc.content_hash(),
        formula: print_formula(&f),
        tuple: tuple.to_vec(),
        value,
        quantifier_depth: f.quantifier_depth(),
        guarded: is_guarded_gtc3(&f),
    };
    let summary = format!(
        "value: {value}\nquantifier depth: {}\nguarded three-variable: {}\n",
        doc.quantifier_depth, doc.guarded
    );
    // A true formula exits 0 so that shell conditionals read naturally.
    Ok(Outcome::with_doc(
        summary,
        &doc,
        if value { EQUIVALENT } else { DISTINGUISHED },
    ))
}

#[derive(Serialize)]
struct SeparateDocument {
    k: usize,
    inputs: Vec<String>,
    separated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    round: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    true_on: Option<usize>,
}

fn cmd_separate(a: &Path, b: &Path, k: usize, tuple_a: &[usize], tuple_b: &[usize], pretty: bool) -> Result<Outcome> {
    check_arity(k)?;
    let (a, b) = (load(a)?, load(b)?);
    let trace = refine(&[&a, &b], k, None)?;
    let mut synth = Synthesizer::new(&[&a, &b], &trace)?;
    let result = if tuple_a.is_empty() {
        synth.separate_complexes()
    } else {
        synth.separate_tuples(tuple_a, tuple_b)
    };
    let inputs = vec![a.content_hash(), b.content_hash()];
    match result {
        Ok(sep) => {
            let text = if pretty {
                pretty_formula(&sep.formula)
            } else {
                print_formula(&sep.formula)
            };
            let doc = SeparateDocument {
                k,
                inputs,
                separated: true,
                formula: Some(print_formula(&sep.formula)),
                round: Some(sep.round),
                true_on: Some(sep.true_on),
            };
            let side = if sep.true_on == 0 { "first" } else { "second" };
            let summary = format!(
                "{text}\n# true on the {side} input, colors differ from round {}\n",
                sep.round
            );
            Ok(Outcome::with_doc(summary, &doc, DISTINGUISHED))
        }
        Err(Error::NoSeparator(reason)) => {
            let doc = SeparateDocument {
                k,
                inputs,
                separated: false,
                formula: None,
                round: None,
                true_on: None,
            };
            Ok(Outcome::with_doc(format!("no separator: {reason}\n"), &doc, EQUIVALENT))
        }
        Err(e) => Err(e),
    }
}

fn cmd_game(
    a: &Path,
    b: &Path,
    flags: &GameFlags,
    start_a: &[usize],
    start_b: &[usize],
    caps: &Caps,
) -> Result<Outcome> {
    let (a, b) = (load(a)?, load(b)?);
    let start = if start_a.is_empty() {
        Start::Empty
    } else {
        Start::Tuples(start_a.to_vec(), start_b.to_vec())
    };
    let config = GameConfig {
        pebbles: flags.pebbles,
        rounds: flags.rounds,
        mode: flags.mode.into(),
        rules: flags.rules.into(),
        exhaustive_cap: caps.exhaustive,
    };
    let result = solve_game(&a, &b, &start, &config)?;
    let cert = &result.certificate;
    let mut summary = format!(
        "winner: {:?}\nvariant: {:?}\nrounds checked: {} (stable round {})\n",
        result.winner, result.variant, result.rounds_checked, result.stable_round
    );
    if let Some(r) = result.decided_round {
        summary.push_str(&format!("decided in round: {r}\n"));
    }
    for (i, m) in cert.moves.iter().enumerate() {
        summary.push_str(&format!(
            "move {}: Player I picks {} pairs on side {:?}, Player II answers with {}{}\n",
            i + 1,
            m.pair_set.len(),
            m.chooser,
            m.responder_set.len(),
            if m.responder_stuck { " (stuck)" } else { "" }
        ));
    }
    let code = match result.winner {
        Winner::PlayerI => DISTINGUISHED,
        Winner::PlayerII => EQUIVALENT,
    };
    Ok(Outcome::new(summary, Some(certificate_to_json(cert)), code))
}

#[derive(Serialize)]
struct ReplayDocument {
    valid: bool,
    moves: usize,
    final_similar: bool,
    stuck: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<String>,
}

fn cmd_replay(a: &Path, b: &Path, cert_path: &Path) -> Result<Outcome> {
    let (a, b) = (load(a)?, load(b)?);
    let cert = certificate_from_json(&read(cert_path)?)?;
    let report = replay_trace(&a, &b, &cert)?;
    let doc = ReplayDocument {
        valid: true,
        moves: report.moves,
        final_similar: report.final_similar,
        stuck: report.stuck,
        violation: report
            .violation
            .as_ref()
            .map(|v| format!("{:?} on x{} and x{}", v.condition, v.vars.0, v.vars.1)),
    };
    let mut summary = format!("certificate valid: {} moves, winner {:?}\n", report.moves, cert.winner);
    if let Some(v) = &doc.violation {
        summary.push_str(&format!("final position violates {v}\n"));
    }
    if report.stuck {
        summary.push_str("Player II could not answer\n");
    }
    Ok(Outcome::with_doc(summary, &doc, EQUIVALENT))
}

fn cmd_triad(a: &Path, b: &Path, k: usize, caps: &Caps) -> Result<Outcome> {
    let (a, b) = (load(a)?, load(b)?);
    let report = run_triad(&a, &b, k, caps)?;
    let mut summary = String::new();
    for (name, leg) in &report.legs {
        summary.push_str(&format!("{name}: {} ({})\n", leg.status, leg.note));
    }
    if let Some(f) = &report.formula {
        summary.push_str(&format!(
            "formula: {} characters, full text in the JSON document\n",
            f.len()
        ));
    }
    if report.consistent {
        summary.push_str("CONSISTENT\n");
    } else {
        summary.push_str(&format!("INCONSISTENT: {}\n", report.disagreeing.join(", ")));
    }
    let code = if !report.consistent {
        FAILURE
    } else if report.legs["refinement"].status == LegStatus::Distinguished {
        DISTINGUISHED
    } else {
        EQUIVALENT
    };
    Ok(Outcome::with_doc(summary, &report, code))
}

#[derive(Serialize)]
struct OracleDocument {
    oracle: &'static str,
    inputs: Vec<String>,
    equivalent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<serde_json::Value>,
}

fn cmd_oracle(which: &OracleCommand, caps: &Caps) -> Result<Outcome> {
    let (doc, detail) = match which {
        OracleCommand::Iso { a, b, classes } => {
            let (a, b) = (load(a)?, load(b)?);
            let mode = if *classes {
                ColorMode::Classes
            } else {
                ColorMode::Strict
            };
            let map = find_isomorphism(&a, &b, mode, caps.iso)?;
            let detail = match &map {
                Some(m) => format!("isomorphism: {m:?}\n"),
                None => "no isomorphism\n".to_string(),
            };
            let doc = OracleDocument {
                oracle: "iso",
                inputs: vec![a.content_hash(), b.content_hash()],
                equivalent: map.is_some(),
                witness: map.map(|m| serde_json::json!(m)),
            };
            (doc, detail)
        }
        OracleCommand::Logic {
            a,
            b,
            vars,
            depth,
            tuple_a,
            tuple_b,
        } => {
            let (a, b) = (load(a)?, load(b)?);
            let slots = |t: &[usize]| (0..*vars).map(|i| t.get(i).copied()).collect::<Vec<_>>();
            let verdict = bounded_logic_equivalent_at(&a, &slots(tuple_a), &b, &slots(tuple_b), *depth)?;
            let formula = verdict.distinguisher.as_ref().map(print_formula);
            let detail = match &formula {
                Some(f) => format!("distinguisher: {f}\n"),
                None => format!("no formula with {vars} variables and depth ≤ {depth} separates the inputs\n"),
            };
            let doc = OracleDocument {
                oracle: "logic",
                inputs: vec![a.content_hash(), b.content_hash()],
                equivalent: verdict.equivalent,
                witness: formula.map(serde_json::Value::String),
            };
            (doc, detail)
        }
        OracleCommand::Game {
            a,
            b,
            pebbles,
            rounds,
            rules,
        } => {
            let (a, b) = (load(a)?, load(b)?);
            let winner = exhaustive_game_value(&a, &b, *pebbles, *rounds, (*rules).into(), caps.exhaustive)?;
            let doc = OracleDocument {
                oracle: "game",
                inputs: vec![a.content_hash(), b.content_hash()],
                equivalent: winner == Winner::PlayerII,
                witness: Some(serde_json::json!(winner)),
            };
            (doc, format!("winner: {winner:?}\n"))
        }
    };
    let code = if doc.equivalent { EQUIVALENT } else { DISTINGUISHED };
    let summary = format!(
        "{}{detail}",
        if doc.equivalent {
            "equivalent\n"
        } else {
            "distinguished\n"
        }
    );
    Ok(Outcome::with_doc(summary, &doc, code))
}

#[derive(Serialize)]
struct SweepDocument {
    seed: u64,
    count: usize,
    max_cells: usize,
    runs: Vec<SweepRun>,
}

#[derive(Serialize)]
struct SweepRun {
    k: usize,
    equivalent: usize,
    distinguished: usize,
    skipped_legs: usize,
    inconsistent: Vec<usize>,
}

fn cmd_sweep(global: &Global, seed: u64, count: usize, max_cells: usize, ks: &[usize], caps: &Caps) -> Result<Outcome> {
    let mut doc = SweepDocument {
        seed,
        count,
        max_cells,
        runs: Vec::new(),
    };
    let mut summary = String::new();
    for &k in ks {
        check_arity(k)?;
        let mut rng = corpus::rng(seed);
        let mut run = SweepRun {
            k,
            equivalent: 0,
            distinguished: 0,
            skipped_legs: 0,
            inconsistent: Vec::new(),
        };
        for i in 0..count {
            let (a, b) = corpus::random_acc_pair(&mut rng, max_cells);
            let report = run_triad(&a, &b, k, caps)?;
            run.skipped_legs += report.legs.values().filter(|l| l.status == LegStatus::Skipped).count();
            match report.legs["refinement"].status {
                LegStatus::Distinguished => run.distinguished += 1,
                _ => run.equivalent += 1,
            }
            if !report.consistent {
                if global.verbose {
                    eprintln!("pair {i} at k={k}: disagreeing legs {:?}", report.disagreeing);
                }
                run.inconsistent.push(i);
            }
        }
        summary.push_str(&format!(
            "k={k}: {} equivalent, {} distinguished, {} skipped legs, {} inconsistent\n",
            run.equivalent,
            run.distinguished,
            run.skipped_legs,
            run.inconsistent.len()
        ));
        doc.runs.push(run);
    }
    let clean = doc.runs.iter().all(|r| r.inconsistent.is_empty());
    Ok(Outcome::with_doc(
        summary,
        &doc,
        if clean { EQUIVALENT } else { DISTINGUISHED },
    ))
}
