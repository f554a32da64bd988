mod ensemble;
mod examples;
mod lemma1;
mod suites;

pub use ensemble::{generate, EnsembleKind, EnsembleSpec, Sample};
pub use examples::{example_one_matrix, jordan_block, run_examples, ExampleCheck, ExamplesReport};
pub use lemma1::{lemma1_bruteforce, lemma1_feasible, lemma1_objective, Lemma1Result};
pub use suites::*;
