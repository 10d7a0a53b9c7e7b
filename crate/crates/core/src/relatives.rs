//! Relatives of a target word sense: words and two-word collocations whose
//! corpus occurrences stand in for training examples of that sense.
//!
//! Strategies are cumulative; each level adds to the set of the previous one.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, LexGraph, SynsetId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    MonosemousChildren = 1,
    MonosemousRelatives = 2,
    FirstRelatives = 3,
    WordDeterminers = 4,
    AllDeterminers = 5,
    OtherWords = 6,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::MonosemousChildren,
        Strategy::MonosemousRelatives,
        Strategy::FirstRelatives,
        Strategy::WordDeterminers,
        Strategy::AllDeterminers,
        Strategy::OtherWords,
    ];

    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn from_level(level: u8) -> Option<Strategy> {
        Strategy::ALL.get(usize::from(level).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::MonosemousChildren => "monosemous_children",
            Strategy::MonosemousRelatives => "monosemous_relatives",
            Strategy::FirstRelatives => "first_relatives",
            Strategy::WordDeterminers => "word_determiners",
            Strategy::AllDeterminers => "all_determiners",
            Strategy::OtherWords => "other_words",
        }
    }

    /// The strategy whose wordnet-derived relatives a corpus run uses:
    /// `OtherWords` matches the `AllDeterminers` set and harvests on top.
    pub fn lexical(self) -> Strategy {
        self.min(Strategy::AllDeterminers)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a relative looks like in running text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// A wordnet lemma; lemmas containing spaces span several tokens.
    Word(String),
    /// A noun and one of its determiners, adjacent in either order.
    Collocation { noun: String, adjective: String },
}

impl Pattern {
    pub fn is_multiword(&self) -> bool {
        match self {
            Pattern::Word(w) => w.split_whitespace().nth(1).is_some(),
            Pattern::Collocation { .. } => true,
        }
    }

    /// Lemma sequences that realise the pattern.
    pub fn token_sequences(&self) -> Vec<Vec<&str>> {
        match self {
            Pattern::Word(w) => vec![w.split_whitespace().collect()],
            Pattern::Collocation { noun, adjective } => {
                vec![
                    vec![noun.as_str(), adjective.as_str()],
                    vec![adjective.as_str(), noun.as_str()],
                ]
            }
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Word(w) => f.write_str(w),
            Pattern::Collocation { noun, adjective } => write!(f, "{noun}+{adjective}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relative {
    pub pattern: Pattern,
    pub target_lemma: String,
    pub target_sense: u32,
    pub origin: Strategy,
}

impl Relative {
    pub fn multiword(&self) -> bool {
        self.pattern.is_multiword()
    }
}

#[derive(Debug, Error)]
pub enum RelativeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("strategy level {0} is not a wordnet strategy (other_words is applied while reading the corpus)")]
    InvalidLevel(u8),
}

/// Relatives of `target_lemma#target_sense` up to and including `level`,
/// sorted by pattern. A pattern reached by several strategies keeps the
/// lowest one as its origin.
pub fn relative_set(
    graph: &LexGraph,
    target_lemma: &str,
    target_sense: u32,
    level: Strategy,
) -> Result<Vec<Relative>, RelativeError> {
    if level == Strategy::OtherWords {
        return Err(RelativeError::InvalidLevel(level.level()));
    }
    let target = graph.synset_of(target_lemma, target_sense)?;
    let synset = graph.synset(target);
    let monosemous = |lemma: &str| graph.units_of(lemma).len() == 1;

    let mut found: BTreeMap<Pattern, Strategy> = BTreeMap::new();
    let mut add = |pattern: Pattern, origin: Strategy| {
        found.entry(pattern).or_insert(origin);
    };
    let words = |ids: &[SynsetId]| -> Vec<(String, u32)> {
        ids.iter()
            .flat_map(|&s| graph.synset(s).units.iter())
            .map(|&u| graph.unit(u))
            .filter(|u| u.lemma != target_lemma)
            .map(|u| (u.lemma.clone(), u.sense))
            .collect()
    };
    let own = [target];

    for (lemma, _) in words(&synset.hyponyms) {
        if monosemous(&lemma) {
            add(Pattern::Word(lemma), Strategy::MonosemousChildren);
        }
    }
    if level >= Strategy::MonosemousRelatives {
        for (lemma, _) in words(&own).into_iter().chain(words(&synset.hypernyms)) {
            if monosemous(&lemma) {
                add(Pattern::Word(lemma), Strategy::MonosemousRelatives);
            }
        }
    }
    let related: Vec<SynsetId> = own
        .iter()
        .chain(&synset.hyponyms)
        .chain(&synset.hypernyms)
        .copied()
        .collect();
    if level >= Strategy::FirstRelatives {
        for (lemma, sense) in words(&related) {
            if sense == 1 {
                add(Pattern::Word(lemma), Strategy::FirstRelatives);
            }
        }
    }
    if level >= Strategy::WordDeterminers {
        for d in &synset.determiners {
            if d != target_lemma {
                add(collocation(target_lemma, d), Strategy::WordDeterminers);
            }
        }
    }
    if level >= Strategy::AllDeterminers {
        for &s in &related {
            let dets = &graph.synset(s).determiners;
            for &u in &graph.synset(s).units {
                let unit = graph.unit(u);
                if unit.sense <= 1 || monosemous(&unit.lemma) {
                    continue;
                }
                for d in dets {
                    if *d != unit.lemma {
                        add(collocation(&unit.lemma, d), Strategy::AllDeterminers);
                    }
                }
            }
        }
    }

    Ok(found
        .into_iter()
        .map(|(pattern, origin)| Relative {
            pattern,
            target_lemma: target_lemma.to_string(),
            target_sense,
            origin,
        })
        .collect())
}

fn collocation(noun: &str, adjective: &str) -> Pattern {
    Pattern::Collocation {
        noun: noun.to_string(),
        adjective: adjective.to_string(),
    }
}

/// Relatives of every sense of `target_lemma`, keyed by sense ordinal.
/// `OtherWords` yields the `AllDeterminers` sets.
pub fn relatives_by_sense(
    graph: &LexGraph,
    target_lemma: &str,
    level: Strategy,
) -> Result<BTreeMap<u32, Vec<Relative>>, RelativeError> {
    let senses = graph.senses_of(target_lemma);
    if senses.is_empty() {
        return Err(GraphError::UnknownLemma(target_lemma.to_string()).into());
    }
    senses
        .into_iter()
        .map(|s| Ok((s, relative_set(graph, target_lemma, s, level.lexical())?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeSummary {
    pub level: Strategy,
    pub per_word: Vec<(String, usize)>,
    pub mean: f64,
}

/// Number of relatives per word (all senses together) and their mean.
/// At `OtherWords` the target word itself counts as one more replacement.
pub fn summarize_relatives(
    graph: &LexGraph,
    words: &[&str],
    level: Strategy,
) -> Result<RelativeSummary, RelativeError> {
    let mut per_word = Vec::with_capacity(words.len());
    for &w in words {
        let by_sense = relatives_by_sense(graph, w, level)?;
        let mut n: usize = by_sense.values().map(Vec::len).sum();
        if level == Strategy::OtherWords {
            n += 1;
        }
        per_word.push((w.to_string(), n));
    }
    let mean = if per_word.is_empty() {
        0.0
    } else {
        per_word.iter().map(|(_, n)| *n as f64).sum::<f64>() / per_word.len() as f64
    };
    Ok(RelativeSummary { level, per_word, mean })
}
