//! Word sense disambiguation trained on text harvested through monosemous
//! relatives in a wordnet.
//!
//! The usual flow: load a [`graph::LexGraph`], derive relatives for each
//! sense of a target word ([`relatives`]), collect their occurrences from a
//! tagged corpus and count context features ([`train`]), then classify with
//! the prior-free rule of [`bayes::SenseModel::score_modified`].

pub mod bayes;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod graph;
pub mod parallel;
pub mod relatives;
pub mod synth;
pub mod train;

pub use bayes::{Priors, SenseModel};
pub use corpus::{Document, FilterConfig, Sentence, Token};
pub use features::{FeatureConfig, FeatureVector};
pub use graph::LexGraph;
pub use parallel::Execution;
pub use relatives::{Relative, Strategy};
