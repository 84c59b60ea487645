//! Topological counting logic: syntax, model checking, the guarded
//! three-variable fragment and formula synthesis from refinement traces.

pub mod ast;
pub mod eval;
pub mod gtc3;
pub mod synth;
pub mod text;

pub use ast::{Builder, Formula, FormulaNode, Node};
pub use eval::{evaluate, TableEvaluator, Valuation};
pub use gtc3::{is_guarded_gtc3, is_guarded_gtc3_sentence};
pub use synth::{atomic_type_formula, Separation, Synthesizer, Vocabulary};
pub use text::{parse_formula, pretty_formula, print_formula};
