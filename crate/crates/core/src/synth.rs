//! Toy wordnets and sense-tagged corpora with controllable sense priors.
//!
//! The generated target word has `senses` senses, each reachable through a
//! few monosemous hyponyms (its relatives). Every document is about one
//! sense: its sentences draw content words from that sense's signature,
//! and some of them mention a relative or the target word itself. Test
//! cases are single sentences around the target word, labelled with the
//! coarse label `s<sense>`.

use std::collections::HashMap;
use std::io::{self, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{Priors, SenseModel};
use crate::corpus::{Document, Sentence, Token};
use crate::eval::{evaluate, EvalConfig, EvalReport, SenseMapping, System, TestCase};
use crate::graph::{LexGraph, SynsetRecord, UnitRecord};
use crate::parallel::{map_ordered, Execution};
use crate::relatives::Strategy;
use crate::train::{train_documents, TrainConfig, TrainError, WordPlan};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible specification: {0}")]
    Infeasible(String),
    #[error("sweep sizes must be positive and ascending, got {0:?}")]
    BadSizes(Vec<usize>),
    #[error("sweep size {size} exceeds the {available}-document corpus")]
    SizeTooLarge { size: usize, available: usize },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub target: String,
    pub senses: usize,
    pub relatives_per_sense: usize,
    /// Content words per sense.
    pub signature_size: usize,
    /// Share of each signature common to all senses, in [0, 1].
    pub overlap: f64,
    /// Function and filler words per part of speech.
    pub filler_size: usize,
    /// Signature words in a sentence that mentions a relative or the target.
    pub context_words: usize,
    /// Probability that a sentence mentions a relative.
    pub relative_rate: f64,
    /// Probability that a sentence mentions the target word.
    pub target_rate: f64,
    pub sentences_per_doc: usize,
    pub train_prior: Vec<f64>,
    pub test_prior: Vec<f64>,
    pub documents: usize,
    pub test_cases: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            target: "zamek".into(),
            senses: 2,
            relatives_per_sense: 2,
            signature_size: 40,
            overlap: 0.5,
            filler_size: 60,
            context_words: 3,
            relative_rate: 0.2,
            target_rate: 0.05,
            sentences_per_doc: 20,
            train_prior: vec![1.0, 1.0],
            test_prior: vec![1.0, 1.0],
            documents: 1000,
            test_cases: 200,
            seed: 0,
        }
    }
}

const FILLER_CLASSES: [(&str, &str); 6] = [
    ("subst", "subst:sg:nom:m3"),
    ("adj", "adj:sg:nom:m3:pos"),
    ("fin", "fin:sg:ter:imperf"),
    ("adv", "adv:pos"),
    ("prep", "prep:loc"),
    ("conj", "conj"),
];
const NOUN_TAG: &str = "subst:sg:nom:m3";
const MIN_CHARS: usize = 150;

/// Words of the generated language, derived from the spec alone.
#[derive(Debug, Clone)]
pub struct Lexicon {
    target: String,
    relatives: Vec<Vec<String>>,
    signatures: Vec<Vec<String>>,
    /// Filler words per class of [`FILLER_CLASSES`].
    filler: Vec<Vec<String>>,
}

impl Lexicon {
    pub fn new(spec: &SynthSpec) -> Lexicon {
        let shared_n = (spec.overlap * spec.signature_size as f64).round() as usize;
        let shared: Vec<String> = (0..shared_n).map(|j| format!("wspolny{j}")).collect();
        let signatures = (1..=spec.senses)
            .map(|s| {
                let mut sig = shared.clone();
                sig.extend((shared_n..spec.signature_size).map(|j| format!("temat{s}x{j}")));
                sig
            })
            .collect();
        let relatives = (1..=spec.senses)
            .map(|s| {
                (0..spec.relatives_per_sense)
                    .map(|j| format!("{}{s}krewny{j}", spec.target))
                    .collect()
            })
            .collect();
        let filler = FILLER_CLASSES
            .iter()
            .map(|(class, _)| (0..spec.filler_size).map(|j| format!("{class}{j}")).collect())
            .collect();
        Lexicon {
            target: spec.target.clone(),
            relatives,
            signatures,
            filler,
        }
    }

    pub fn relatives(&self, sense: u32) -> &[String] {
        &self.relatives[sense as usize - 1]
    }

    pub fn signature(&self, sense: u32) -> &[String] {
        &self.signatures[sense as usize - 1]
    }

    /// The toy wordnet: a root, one synset per sense, one per relative
    /// under its sense, and each sense-specific signature word under one of
    /// that sense's relatives (too far down to be a relative itself).
    pub fn wordnet(&self) -> Vec<SynsetRecord> {
        let unit = |lemma: &str, sense: u32| UnitRecord {
            lemma: lemma.to_string(),
            sense,
            pos: Default::default(),
        };
        let rec = |id: String, units: Vec<UnitRecord>, hyper: Option<String>| SynsetRecord {
            synset_id: id,
            units,
            hypernyms: hyper.into_iter().collect(),
            determiners: Vec::new(),
        };
        let mut out = vec![rec("root".into(), vec![unit("byt", 1)], None)];
        let shared_n = self.signatures[0]
            .iter()
            .take_while(|w| w.starts_with("wspolny"))
            .count();
        for w in &self.signatures[0][..shared_n] {
            out.push(rec(format!("sig.{w}"), vec![unit(w, 1)], Some("root".into())));
        }
        for (s, rels) in self.relatives.iter().enumerate() {
            let sense = s as u32 + 1;
            let sense_id = format!("{}.{sense}", self.target);
            out.push(rec(
                sense_id.clone(),
                vec![unit(&self.target, sense)],
                Some("root".into()),
            ));
            for r in rels {
                out.push(rec(format!("rel.{r}"), vec![unit(r, 1)], Some(sense_id.clone())));
            }
            if rels.is_empty() {
                continue;
            }
            for (j, w) in self.signatures[s][shared_n..].iter().enumerate() {
                let parent = format!("rel.{}", rels[j % rels.len()]);
                out.push(rec(format!("sig.{w}"), vec![unit(w, 1)], Some(parent)));
            }
        }
        out
    }

    pub fn mapping(&self) -> SenseMapping {
        let mut m = SenseMapping::default();
        for s in 1..=self.relatives.len() as u32 {
            m.insert(&self.target, s, &label(s)).expect("labels are distinct");
        }
        if let Some(w) = m.words.get_mut(&self.target) {
            w.gold_order = (1..=self.relatives.len() as u32).map(label).collect();
        }
        m
    }
}

/// Coarse gold label of a generated sense.
pub fn label(sense: u32) -> String {
    format!("s{sense}")
}

/// A validated spec with its lexicon and samplers.
#[derive(Debug, Clone)]
pub struct Generator {
    pub spec: SynthSpec,
    pub lexicon: Lexicon,
    train_senses: WeightedIndex<f64>,
    test_senses: WeightedIndex<f64>,
}

const TEST_STREAM: u64 = 1 << 63;

impl Generator {
    pub fn new(spec: SynthSpec) -> Result<Generator, SynthError> {
        let bad = |m: &str| Err(SynthError::Infeasible(m.to_string()));
        if spec.senses < 2 {
            return bad("at least two senses are needed");
        }
        if spec.signature_size == 0 || spec.filler_size == 0 {
            return bad("empty vocabulary");
        }
        if spec.relatives_per_sense == 0 {
            return bad("every sense needs a relative");
        }
        if !(0.0..=1.0).contains(&spec.overlap) {
            return bad("overlap must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&spec.relative_rate) || !(0.0..=1.0).contains(&spec.target_rate) {
            return bad("rates must lie in [0, 1]");
        }
        if spec.target.trim().is_empty() || spec.target.chars().any(|c| c.is_whitespace() || c.is_uppercase()) {
            return bad("target must be a single lowercase word");
        }
        let prior = |p: &[f64], which: &str| -> Result<WeightedIndex<f64>, SynthError> {
            if p.len() != spec.senses || p.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                return Err(SynthError::Infeasible(format!(
                    "{which} prior needs {} positive weights, got {p:?}",
                    spec.senses
                )));
            }
            Ok(WeightedIndex::new(p).expect("weights checked"))
        };
        let train_senses = prior(&spec.train_prior, "training")?;
        let test_senses = prior(&spec.test_prior, "test")?;
        Ok(Generator {
            lexicon: Lexicon::new(&spec),
            spec,
            train_senses,
            test_senses,
        })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        rng.set_stream(stream);
        rng
    }

    /// Sentence with `core` at a random position among `context` signature
    /// words of `sense`, padded with filler until it qualifies. Returns the
    /// core's token index.
    fn sentence(&self, rng: &mut ChaCha8Rng, sense: u32, core: Option<&str>, context: usize) -> (Sentence, usize) {
        let sig = self.lexicon.signature(sense);
        let mut words: Vec<Token> = (0..context)
            .map(|_| noun(&sig[rng.random_range(0..sig.len())]))
            .collect();
        // four distinct classes up front, so every sentence qualifies
        for (c, (_, tag)) in FILLER_CLASSES.iter().enumerate().take(4) {
            let pool = &self.lexicon.filler[c];
            words.push(word(&pool[rng.random_range(0..pool.len())], tag));
        }
        words.shuffle(rng);
        let mut at = 0;
        if let Some(core) = core {
            at = rng.random_range(0..=words.len());
            words.insert(at, noun(core));
        }
        let mut chars: usize = words.iter().map(|t| t.surface.chars().count() + 1).sum::<usize>() + 1;
        while chars < MIN_CHARS {
            let c = rng.random_range(0..FILLER_CLASSES.len());
            let pool = &self.lexicon.filler[c];
            let tok = word(&pool[rng.random_range(0..pool.len())], FILLER_CLASSES[c].1);
            chars += tok.surface.chars().count() + 1;
            words.push(tok);
        }
        words.push(Token::new(".", ".", "interp"));
        (Sentence::new(words), at)
    }

    /// The sense a document is about.
    fn document_sense(&self, rng: &mut ChaCha8Rng) -> u32 {
        self.train_senses.sample(rng) as u32 + 1
    }

    /// Document `index`, generated from its own random stream.
    pub fn document(&self, index: usize) -> Document {
        let mut rng = self.rng(index as u64);
        let sense = self.document_sense(&mut rng);
        let rels = self.lexicon.relatives(sense);
        let sentences = (0..self.spec.sentences_per_doc)
            .map(|_| {
                let roll: f64 = rng.random();
                let core = if roll < self.spec.relative_rate {
                    Some(rels[rng.random_range(0..rels.len())].as_str())
                } else if roll < self.spec.relative_rate + self.spec.target_rate {
                    Some(self.lexicon.target.as_str())
                } else {
                    None
                };
                let context = if core.is_some() { self.spec.context_words } else { 1 };
                self.sentence(&mut rng, sense, core, context).0
            })
            .collect();
        Document {
            doc_id: format!("d{index:07}"),
            source_tag: Some("synth".into()),
            sentences,
        }
    }

    /// Test case `index`; its sense follows the test prior.
    pub fn test_case(&self, index: usize) -> TestCase {
        let mut rng = self.rng(TEST_STREAM | index as u64);
        let sense = self.test_senses.sample(&mut rng) as u32 + 1;
        let (sentence, span) = self.sentence(&mut rng, sense, Some(&self.lexicon.target), self.spec.context_words);
        TestCase {
            word: self.lexicon.target.clone(),
            gold: label(sense),
            span,
            sentence,
        }
    }

    pub fn documents(&self, exec: Execution) -> Vec<Document> {
        let ids: Vec<usize> = (0..self.spec.documents).collect();
        map_ordered(exec, &ids, |&i| self.document(i))
    }

    pub fn test_cases(&self, exec: Execution) -> Vec<TestCase> {
        let ids: Vec<usize> = (0..self.spec.test_cases).collect();
        map_ordered(exec, &ids, |&i| self.test_case(i))
    }

    pub fn graph(&self) -> LexGraph {
        LexGraph::from_records(self.lexicon.wordnet()).expect("generated wordnet is valid")
    }

    /// Streams the corpus as JSON lines, generating in blocks.
    pub fn write_corpus<W: Write>(&self, mut out: W, exec: Execution) -> io::Result<()> {
        const BLOCK: usize = 1024;
        let mut start = 0;
        while start < self.spec.documents {
            let ids: Vec<usize> = (start..(start + BLOCK).min(self.spec.documents)).collect();
            let lines = map_ordered(exec, &ids, |&i| {
                let mut line = serde_json::to_vec(&self.document(i)).expect("documents serialize");
                line.push(b'\n');
                line
            });
            for l in lines {
                out.write_all(&l)?;
            }
            start += BLOCK;
        }
        out.flush()
    }

    pub fn write_test_cases<W: Write>(&self, mut out: W, exec: Execution) -> io::Result<()> {
        for c in self.test_cases(exec) {
            writeln!(out, "{}", c.to_json())?;
        }
        out.flush()
    }

    pub fn write_wordnet<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in self.lexicon.wordnet() {
            writeln!(out, "{}", serde_json::to_string(&r).expect("records serialize"))?;
        }
        out.flush()
    }
}

fn word(lemma: &str, tag: &str) -> Token {
    Token::new(lemma, lemma, tag)
}

fn noun(lemma: &str) -> Token {
    word(lemma, NOUN_TAG)
}

/// Trains on `docs` and evaluates on `cases`.
pub fn train_and_evaluate(
    generator: &Generator,
    docs: &[Document],
    cases: &[TestCase],
    train: &TrainConfig,
    eval: &EvalConfig,
    exec: Execution,
) -> Result<(SenseModel, EvalReport), SynthError> {
    let graph = generator.graph();
    let plan = WordPlan::new(&graph, &generator.lexicon.target, train.level).map_err(TrainError::from)?;
    let (mut models, _) = train_documents(docs, std::slice::from_ref(&plan), train, exec)?;
    let model = models.pop().expect("one plan, one model");
    let map = HashMap::from([(generator.lexicon.target.clone(), model.clone())]);
    let report = evaluate(&map, &generator.lexicon.mapping(), cases, &graph, eval, exec);
    Ok((model, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub documents: usize,
    pub occurrences: u64,
    pub accuracy: f64,
}

/// Accuracy of the prior-free classifier trained on growing random subsets
/// of one corpus of `spec.documents` documents. Each subset is a prefix of
/// a single random permutation, so larger subsets contain smaller ones.
pub fn size_sweep(
    spec: &SynthSpec,
    sizes: &[usize],
    train: &TrainConfig,
    exec: Execution,
) -> Result<Vec<SweepRow>, SynthError> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SynthError::BadSizes(sizes.to_vec()));
    }
    let largest = *sizes.last().expect("non-empty");
    if largest > spec.documents {
        return Err(SynthError::SizeTooLarge {
            size: largest,
            available: spec.documents,
        });
    }
    let g = Generator::new(spec.clone())?;
    let mut docs = g.documents(exec);
    docs.shuffle(&mut g.rng(TEST_STREAM - 1));
    let cases = g.test_cases(exec);
    let eval = EvalConfig {
        seed: spec.seed,
        ..EvalConfig::default()
    };
    sizes
        .iter()
        .map(|&n| {
            let (model, report) = train_and_evaluate(&g, &docs[..n], &cases, train, &eval, exec)?;
            Ok(SweepRow {
                documents: n,
                occurrences: model.total_occurrences(),
                accuracy: report.accuracy(System::BayesModified).unwrap_or(0.0),
            })
        })
        .collect()
}

/// Where a sweep stops improving.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauShape {
    /// First row from which every later step changes accuracy by less than
    /// the tolerance.
    pub onset: Option<usize>,
    /// Accuracy never drops before the onset.
    pub rising_until_onset: bool,
    /// Absolute accuracy change between the last two rows.
    pub final_delta: f64,
}

pub fn plateau_shape(rows: &[SweepRow], tolerance: f64) -> PlateauShape {
    let acc: Vec<f64> = rows.iter().map(|r| r.accuracy).collect();
    let deltas: Vec<f64> = acc.windows(2).map(|w| w[1] - w[0]).collect();
    let mut onset = None;
    for i in (0..acc.len()).rev() {
        if deltas[i..].iter().all(|d| d.abs() < tolerance) {
            onset = Some(i);
        } else {
            break;
        }
    }
    let end = onset.unwrap_or(acc.len().saturating_sub(1));
    PlateauShape {
        onset,
        rising_until_onset: deltas[..end].iter().all(|&d| d >= 0.0),
        final_delta: deltas.last().map_or(0.0, |d| d.abs()),
    }
}

/// Recall of the least frequent training sense under both decision rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchOutcome {
    pub minority_sense: u32,
    pub modified_recall: f64,
    pub standard_recall: f64,
    pub modified_accuracy: f64,
    pub standard_accuracy: f64,
}

/// Trains on a corpus drawn from the training prior and tests on cases
/// drawn from the test prior; the standard rule uses empirical priors.
pub fn prior_mismatch(spec: &SynthSpec, train: &TrainConfig, exec: Execution) -> Result<MismatchOutcome, SynthError> {
    let g = Generator::new(spec.clone())?;
    let docs = g.documents(exec);
    let cases = g.test_cases(exec);
    let graph = g.graph();
    let plan = WordPlan::new(&graph, &g.lexicon.target, train.level).map_err(TrainError::from)?;
    let (models, _) = train_documents(&docs, std::slice::from_ref(&plan), train, exec)?;
    let model = &models[0];
    let minority = spec
        .train_prior
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i as u32 + 1)
        .expect("at least two senses");
    let features = model.features.clone().unwrap_or_default();
    let (mut hits_mod, mut hits_std, mut minority_n, mut min_mod, mut min_std) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for c in &cases {
        let x = crate::features::extract(&c.sentence, c.span, c.span, &features);
        let m = model.score_modified(&x).chosen;
        let s = model
            .score_standard(&x, &Priors::Empirical)
            .map_err(|e| SynthError::Infeasible(format!("training produced no occurrences: {e}")))?
            .chosen;
        let gold = label(m) == c.gold;
        hits_mod += u64::from(gold);
        hits_std += u64::from(label(s) == c.gold);
        if c.gold == label(minority) {
            minority_n += 1;
            min_mod += u64::from(m == minority);
            min_std += u64::from(s == minority);
        }
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(MismatchOutcome {
        minority_sense: minority,
        modified_recall: ratio(min_mod, minority_n),
        standard_recall: ratio(min_std, minority_n),
        modified_accuracy: ratio(hits_mod, cases.len() as u64),
        standard_accuracy: ratio(hits_std, cases.len() as u64),
    })
}

/// Training settings the experiments use by default: every wordnet
/// strategy, no harvesting.
pub fn default_train_config() -> TrainConfig {
    TrainConfig {
        level: Strategy::AllDeterminers,
        ..TrainConfig::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::sentence_qualifies;

    fn small(seed: u64) -> SynthSpec {
        SynthSpec {
            documents: 60,
            test_cases: 50,
            seed,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn sentences_qualify_and_runs_repeat() {
        let g = Generator::new(small(3)).unwrap();
        let docs = g.documents(Execution::Parallel);
        assert!(docs.iter().flat_map(|d| &d.sentences).all(sentence_qualifies));
        assert!(g
            .test_cases(Execution::Sequential)
            .iter()
            .all(|c| sentence_qualifies(&c.sentence)));
        let mut a = Vec::new();
        let mut b = Vec::new();
        g.write_corpus(&mut a, Execution::Parallel).unwrap();
        Generator::new(small(3))
            .unwrap()
            .write_corpus(&mut b, Execution::Sequential)
            .unwrap();
        assert_eq!(a, b);
        let mut c = Vec::new();
        Generator::new(small(4))
            .unwrap()
            .write_corpus(&mut c, Execution::Sequential)
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn test_cases_point_at_the_target() {
        let g = Generator::new(small(1)).unwrap();
        for c in g.test_cases(Execution::Sequential) {
            assert_eq!(c.sentence.tokens[c.span].lemma, "zamek");
        }
    }

    #[test]
    fn wordnet_gives_each_sense_its_relatives() {
        let g = Generator::new(small(0)).unwrap();
        let graph = g.graph();
        let plan = WordPlan::new(&graph, "zamek", Strategy::MonosemousChildren).unwrap();
        for s in [1, 2] {
            let mut got: Vec<String> = plan.relatives[&s].iter().map(|r| r.pattern.to_string()).collect();
            got.sort();
            assert_eq!(got, g.lexicon.relatives(s));
        }
    }

    #[test]
    fn corpus_follows_training_prior() {
        let spec = SynthSpec {
            documents: 2200,
            sentences_per_doc: 1,
            train_prior: vec![10.0, 1.0],
            ..SynthSpec::default()
        };
        let g = Generator::new(spec).unwrap();
        let n = g.spec.documents as f64;
        let minority = (0..g.spec.documents)
            .filter(|&i| {
                let mut rng = g.rng(i as u64);
                g.document_sense(&mut rng) == 2
            })
            .count() as f64;
        let p = 1.0 / 11.0;
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert!((minority - n * p).abs() < 3.0 * sigma, "{minority}");
    }

    #[test]
    fn disjoint_signatures_are_separable() {
        let spec = SynthSpec {
            overlap: 0.0,
            documents: 200,
            test_cases: 100,
            ..SynthSpec::default()
        };
        let g = Generator::new(spec).unwrap();
        let (_, report) = train_and_evaluate(
            &g,
            &g.documents(Execution::Parallel),
            &g.test_cases(Execution::Parallel),
            &default_train_config(),
            &EvalConfig::default(),
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(report.accuracy(System::BayesModified), Some(1.0));
        assert_eq!(report.accuracy(System::Similarity), Some(1.0));
    }

    #[test]
    fn infeasible_specs() {
        for spec in [
            SynthSpec {
                senses: 1,
                train_prior: vec![1.0],
                test_prior: vec![1.0],
                ..SynthSpec::default()
            },
            SynthSpec {
                signature_size: 0,
                ..SynthSpec::default()
            },
            SynthSpec {
                overlap: 1.5,
                ..SynthSpec::default()
            },
            SynthSpec {
                train_prior: vec![1.0, 0.0],
                ..SynthSpec::default()
            },
            SynthSpec {
                test_prior: vec![1.0],
                ..SynthSpec::default()
            },
        ] {
            assert!(matches!(Generator::new(spec), Err(SynthError::Infeasible(_))));
        }
    }

    #[test]
    fn sweep_sizes_are_checked() {
        let spec = small(0);
        let cfg = default_train_config();
        assert!(matches!(
            size_sweep(&spec, &[0, 10], &cfg, Execution::Sequential),
            Err(SynthError::BadSizes(_))
        ));
        assert!(matches!(
            size_sweep(&spec, &[20, 10], &cfg, Execution::Sequential),
            Err(SynthError::BadSizes(_))
        ));
        assert!(matches!(
            size_sweep(&spec, &[10, 100], &cfg, Execution::Sequential),
            Err(SynthError::SizeTooLarge { .. })
        ));
        let rows = size_sweep(&spec, &[10, 60], &cfg, Execution::Parallel).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].occurrences < rows[1].occurrences);
    }

    #[test]
    fn plateau_detection() {
        let rows = |acc: &[f64]| -> Vec<SweepRow> {
            acc.iter()
                .map(|&a| SweepRow {
                    documents: 0,
                    occurrences: 0,
                    accuracy: a,
                })
                .collect()
        };
        let p = plateau_shape(&rows(&[0.5, 0.7, 0.9, 0.902, 0.903]), 0.005);
        assert_eq!(p.onset, Some(2));
        assert!(p.rising_until_onset);
        assert!((p.final_delta - 0.001).abs() < 1e-12);
        let p = plateau_shape(&rows(&[0.5, 0.4, 0.9, 0.9]), 0.005);
        assert!(!p.rising_until_onset);
        assert_eq!(plateau_shape(&rows(&[0.5, 0.6]), 0.005).onset, Some(1));
    }
}
