//! One pass over a corpus trains the models of any number of target words.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{ModelError, SenseModel};
use crate::corpus::{scan_corpus, CorpusStats, Document, FilterConfig, HarvestConfig, RelativeMatcher};
use crate::features::{extract, FeatureConfig};
use crate::graph::LexGraph;
use crate::parallel::{fold_reduce, Execution, Merge};
use crate::relatives::{relatives_by_sense, Relative, RelativeError, Strategy};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Relatives(#[from] RelativeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("reading corpus: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub level: Strategy,
    pub features: FeatureConfig,
    pub alpha: f64,
    /// Feature keys seen fewer times than this (all senses together) are
    /// dropped after training.
    pub min_count: u64,
    pub filter: FilterConfig,
    pub harvest: HarvestConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            level: Strategy::AllDeterminers,
            features: FeatureConfig::default(),
            alpha: 1.0,
            min_count: 1,
            filter: FilterConfig::default(),
            harvest: HarvestConfig::default(),
        }
    }
}

/// Relatives and matcher for one target word.
#[derive(Debug, Clone)]
pub struct WordPlan {
    pub relatives: BTreeMap<u32, Vec<Relative>>,
    matcher: RelativeMatcher,
}

impl WordPlan {
    pub fn new(graph: &LexGraph, target_lemma: &str, level: Strategy) -> Result<WordPlan, RelativeError> {
        let relatives = relatives_by_sense(graph, target_lemma, level)?;
        let matcher = RelativeMatcher::new(target_lemma, &relatives);
        Ok(WordPlan { relatives, matcher })
    }

    pub fn target_lemma(&self) -> &str {
        self.matcher.target_lemma()
    }

    pub fn senses(&self) -> Vec<u32> {
        self.relatives.keys().copied().collect()
    }

    pub fn matcher(&self) -> &RelativeMatcher {
        &self.matcher
    }
}

struct Models(Vec<SenseModel>);

impl Merge for Models {
    fn merge(&mut self, other: Self) {
        for (m, o) in self.0.iter_mut().zip(other.0) {
            m.merge(o);
        }
    }
}

struct Trainer<'a> {
    plans: &'a [WordPlan],
    cfg: &'a TrainConfig,
    empty: Vec<SenseModel>,
}

impl<'a> Trainer<'a> {
    fn new(plans: &'a [WordPlan], cfg: &'a TrainConfig) -> Result<Trainer<'a>, TrainError> {
        let empty = plans
            .iter()
            .map(|p| SenseModel::new(p.target_lemma(), &p.senses(), cfg.alpha))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trainer { plans, cfg, empty })
    }

    fn identity(&self) -> Models {
        Models(self.empty.clone())
    }

    fn document(&self, doc: &Document, models: &mut Models, stats: &mut CorpusStats) {
        let harvest = (self.cfg.level == Strategy::OtherWords).then_some(&self.cfg.harvest);
        let flags = stats.record_document(doc, &self.cfg.filter);
        for (plan, model) in self.plans.iter().zip(models.0.iter_mut()) {
            let spans = plan.matcher.spans(doc, &flags, harvest);
            stats.record_spans(plan.target_lemma(), &spans);
            for s in &spans {
                let x = extract(&doc.sentences[s.sentence], s.start, s.end, &self.cfg.features);
                model.observe(&x, s.sense).expect("matched senses are declared");
            }
        }
    }

    fn finish(&self, Models(mut models): Models) -> Vec<SenseModel> {
        for m in &mut models {
            m.prune(self.cfg.min_count);
            m.features = Some(self.cfg.features.clone());
        }
        models
    }
}

/// Trains one model per plan, in plan order, from a line-delimited corpus.
pub fn train_corpus<R: BufRead>(
    corpus: R,
    plans: &[WordPlan],
    cfg: &TrainConfig,
    exec: Execution,
) -> Result<(Vec<SenseModel>, CorpusStats), TrainError> {
    let trainer = Trainer::new(plans, cfg)?;
    let (models, stats) = scan_corpus(
        corpus,
        exec,
        || trainer.identity(),
        |doc, m, s| trainer.document(doc, m, s),
    )?;
    Ok((trainer.finish(models), stats))
}

/// As [`train_corpus`], over documents already in memory.
pub fn train_documents(
    docs: &[Document],
    plans: &[WordPlan],
    cfg: &TrainConfig,
    exec: Execution,
) -> Result<(Vec<SenseModel>, CorpusStats), TrainError> {
    let trainer = Trainer::new(plans, cfg)?;
    let (models, stats) = fold_reduce(
        exec,
        docs,
        || (trainer.identity(), CorpusStats::default()),
        |(m, s), doc| {
            s.documents += 1;
            trainer.document(doc, m, s);
        },
    );
    Ok((trainer.finish(models), stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::{doc, padded};
    use crate::features::FeatureKey;
    use crate::graph::fixtures::tongue;

    fn corpus() -> Vec<Document> {
        vec![
            doc(
                "a",
                vec![padded("jęzor/subst:sg:loc:m3"), padded("język/subst:sg:loc:m3")],
            ),
            doc("b", vec![padded("narząd/subst:sg:loc:m3")]),
            doc("c", vec![padded("artykulator/subst:sg:loc:m3")]),
        ]
    }

    #[test]
    fn counts_match_a_hand_tally() {
        let g = tongue();
        let plans = vec![WordPlan::new(&g, "język", Strategy::FirstRelatives).unwrap()];
        let cfg = TrainConfig {
            level: Strategy::FirstRelatives,
            ..TrainConfig::default()
        };
        let (models, stats) = train_documents(&corpus(), &plans, &cfg, Execution::Sequential).unwrap();
        let m = &models[0];
        assert_eq!(m.senses(), &[6]);
        assert_eq!(m.occurrences(6), Some(3));
        // every relative sits after the same preposition in the padding
        let o = FeatureKey::new(crate::features::Channel::LemmaAt(-1), "o");
        assert_eq!(m.count(&o, 6), 3);
        assert_eq!(stats.documents, 3);
        assert_eq!(stats.total_occurrences("język"), 3);
    }

    #[test]
    fn harvesting_adds_target_occurrences() {
        let g = tongue();
        let plans = vec![WordPlan::new(&g, "język", Strategy::OtherWords).unwrap()];
        let cfg = TrainConfig {
            level: Strategy::OtherWords,
            ..TrainConfig::default()
        };
        let (models, stats) = train_documents(&corpus(), &plans, &cfg, Execution::Sequential).unwrap();
        assert_eq!(models[0].occurrences(6), Some(4));
        assert_eq!(stats.harvested["język"], 1);
    }

    #[test]
    fn streamed_and_in_memory_agree() {
        let g = tongue();
        let plans = vec![WordPlan::new(&g, "język", Strategy::AllDeterminers).unwrap()];
        let cfg = TrainConfig::default();
        let text: String = corpus()
            .iter()
            .map(|d| serde_json::to_string(d).unwrap() + "\n")
            .collect();
        let (a, sa) = train_corpus(text.as_bytes(), &plans, &cfg, Execution::Parallel).unwrap();
        let (b, sb) = train_documents(&corpus(), &plans, &cfg, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }
}
