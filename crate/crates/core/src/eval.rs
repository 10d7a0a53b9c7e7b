//! Accuracy of the classifier and four baselines against coarse gold labels.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{Priors, SenseModel};
use crate::corpus::{Sentence, Token};
use crate::features::{extract, FeatureConfig};
use crate::graph::{lch_score, normalize_lemma, LexGraph, SynsetId};
use crate::parallel::{map_ordered, Execution};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: span {span} is outside a {len}-token sentence")]
    SpanOutOfRange { line: usize, span: usize, len: usize },
    #[error("line {line}: span token has lemma `{lemma}`, expected `{word}`")]
    SpanMismatch { line: usize, word: String, lemma: String },
    #[error("fine sense {sense} of `{word}` is mapped to both `{first}` and `{second}`")]
    ConflictingMapping {
        word: String,
        sense: u32,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    Random,
    FirstGoldSense,
    FirstWordnetSense,
    Similarity,
    BayesStandard,
    BayesModified,
}

impl System {
    pub const ALL: [System; 6] = [
        System::Random,
        System::FirstGoldSense,
        System::FirstWordnetSense,
        System::Similarity,
        System::BayesStandard,
        System::BayesModified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            System::Random => "random",
            System::FirstGoldSense => "first_gold_sense",
            System::FirstWordnetSense => "first_wordnet_sense",
            System::Similarity => "similarity",
            System::BayesStandard => "bayes_standard",
            System::BayesModified => "bayes_modified",
        }
    }
}

/// Macro-averaged accuracies reported for the full-size Polish setup
/// (54 nouns, coarse gold senses). They need the original wordnet, gold
/// corpus and web crawl, so they are printed for orientation only.
pub const FULL_SCALE_REFERENCE: [(System, f64); 6] = [
    (System::Random, 0.4321),
    (System::FirstGoldSense, 0.5836),
    (System::FirstWordnetSense, 0.6473),
    (System::Similarity, 0.6581),
    (System::BayesStandard, 0.7689),
    (System::BayesModified, 0.7795),
];

/// Fine wordnet senses of one word grouped under coarse gold labels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WordMapping {
    pub fine_to_coarse: BTreeMap<u32, String>,
    /// Coarse labels in gold-inventory order.
    pub gold_order: Vec<String>,
}

impl WordMapping {
    pub fn coarse(&self, fine: u32) -> Option<&str> {
        self.fine_to_coarse.get(&fine).map(String::as_str)
    }

    /// Wordnet senses of `word` without a coarse counterpart.
    pub fn unmapped(&self, graph: &LexGraph, word: &str) -> Vec<u32> {
        graph
            .senses_of(word)
            .into_iter()
            .filter(|s| !self.fine_to_coarse.contains_key(s))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SenseMapping {
    pub words: BTreeMap<String, WordMapping>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MappingRecord {
    Sense {
        word: String,
        fine_sense: u32,
        coarse_label: String,
    },
    Order {
        word: String,
        gold_order: Vec<String>,
    },
}

impl SenseMapping {
    /// Reads `{word, fine_sense, coarse_label}` and `{word, gold_order}`
    /// records, one per line.
    pub fn load<R: BufRead>(reader: R) -> Result<SenseMapping, EvalError> {
        let mut m = SenseMapping::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: MappingRecord = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            match rec {
                MappingRecord::Sense {
                    word,
                    fine_sense,
                    coarse_label,
                } => m.insert(&word, fine_sense, &coarse_label)?,
                MappingRecord::Order { word, gold_order } => {
                    m.words.entry(normalize_lemma(&word)).or_default().gold_order = gold_order;
                }
            }
        }
        Ok(m)
    }

    pub fn insert(&mut self, word: &str, fine: u32, coarse: &str) -> Result<(), EvalError> {
        let word = normalize_lemma(word);
        let entry = self.words.entry(word.clone()).or_default();
        match entry.fine_to_coarse.get(&fine) {
            Some(first) if first != coarse => Err(EvalError::ConflictingMapping {
                word,
                sense: fine,
                first: first.clone(),
                second: coarse.to_string(),
            }),
            _ => {
                entry.fine_to_coarse.insert(fine, coarse.to_string());
                Ok(())
            }
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (word, w) in &self.words {
            let order = MappingRecord::Order {
                word: word.clone(),
                gold_order: w.gold_order.clone(),
            };
            out += &serde_json::to_string(&order).expect("serializable");
            out.push('\n');
            for (&fine_sense, coarse_label) in &w.fine_to_coarse {
                let rec = MappingRecord::Sense {
                    word: word.clone(),
                    fine_sense,
                    coarse_label: coarse_label.clone(),
                };
                out += &serde_json::to_string(&rec).expect("serializable");
                out.push('\n');
            }
        }
        out
    }
}

/// One gold-annotated occurrence; the target is the single token at `span`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub word: String,
    pub gold: String,
    pub span: usize,
    pub sentence: Sentence,
}

#[derive(Serialize, Deserialize)]
struct TestRecord {
    word: String,
    gold: String,
    span_start: usize,
    tokens: Vec<Token>,
}

impl TestCase {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&TestRecord {
            word: self.word.clone(),
            gold: self.gold.clone(),
            span_start: self.span,
            tokens: self.sentence.tokens.clone(),
        })
        .expect("serializable")
    }
}

pub fn load_test_cases<R: BufRead>(reader: R) -> Result<Vec<TestCase>, EvalError> {
    let mut cases = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TestRecord = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: n + 1,
            message: e.to_string(),
        })?;
        let word = normalize_lemma(&rec.word);
        let Some(tok) = rec.tokens.get(rec.span_start) else {
            return Err(EvalError::SpanOutOfRange {
                line: n + 1,
                span: rec.span_start,
                len: rec.tokens.len(),
            });
        };
        if tok.lemma != word {
            return Err(EvalError::SpanMismatch {
                line: n + 1,
                word,
                lemma: tok.lemma.clone(),
            });
        }
        cases.push(TestCase {
            word,
            gold: rec.gold,
            span: rec.span_start,
            sentence: Sentence::new(rec.tokens),
        });
    }
    Ok(cases)
}

/// Uniform choice among `labels`, reproducible from `(seed, draw)`.
pub fn baseline_random(labels: &[String], seed: u64, draw: u64) -> &str {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    &labels[rng.random_range(0..labels.len())]
}

/// First label of the gold inventory.
pub fn baseline_first_gold(mapping: &WordMapping) -> Option<&str> {
    mapping.gold_order.first().map(String::as_str)
}

/// Coarse image of the lowest mapped fine sense.
pub fn baseline_first_wordnet(mapping: &WordMapping) -> Option<&str> {
    mapping.fine_to_coarse.values().next().map(String::as_str)
}

/// Candidate senses of one word with their distance tables.
pub struct SimilarityIndex {
    candidates: Vec<(u32, Vec<Option<u32>>)>,
    max_depth: u32,
    first_sense_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityAnswer {
    pub sense: u32,
    pub score: f64,
    /// No context word was related to any candidate.
    pub fallback: bool,
}

impl SimilarityIndex {
    pub fn new(graph: &LexGraph, word: &str, mapping: &WordMapping, first_sense_only: bool) -> SimilarityIndex {
        let candidates = mapping
            .fine_to_coarse
            .keys()
            .filter_map(|&s| graph.synset_of(word, s).ok().map(|id| (s, graph.distances_from(id))))
            .collect();
        SimilarityIndex {
            candidates,
            max_depth: graph.max_depth(),
            first_sense_only,
        }
    }

    /// Candidate with the highest similarity to any context word; ties go to
    /// the lowest sense.
    pub fn answer(&self, graph: &LexGraph, sentence: &Sentence, span: usize) -> Option<SimilarityAnswer> {
        let mut context: Vec<SynsetId> = Vec::new();
        for (i, tok) in sentence.tokens.iter().enumerate() {
            if i == span || tok.is_punct {
                continue;
            }
            for &u in graph.units_of(&tok.lemma) {
                let unit = graph.unit(u);
                if !self.first_sense_only || unit.sense == 1 {
                    context.push(unit.synset);
                }
            }
        }
        let mut best: Option<SimilarityAnswer> = None;
        for (sense, dist) in &self.candidates {
            let score = context
                .iter()
                .filter_map(|c| dist[c.0 as usize])
                .map(|len| lch_score(len, self.max_depth))
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_none_or(|b| score > b.score) {
                best = Some(SimilarityAnswer {
                    sense: *sense,
                    score,
                    fallback: false,
                });
            }
        }
        best.map(|mut b| {
            b.fallback = b.score == f64::NEG_INFINITY;
            b
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub seed: u64,
    pub priors: Priors,
    /// Overrides `priors` for the listed words.
    pub priors_by_word: BTreeMap<String, Priors>,
    /// Extraction settings for models that do not record their own.
    pub features: FeatureConfig,
    pub similarity_first_sense_only: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            seed: 0,
            priors: Priors::Empirical,
            priors_by_word: BTreeMap::new(),
            features: FeatureConfig::default(),
            similarity_first_sense_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordResult {
    pub word: String,
    pub cases: u64,
    /// Correct answers per system, in [`System::ALL`] order.
    pub correct: Vec<u64>,
    pub accuracy: Vec<f64>,
    /// Cases where the similarity baseline fell back to the first sense.
    pub similarity_fallbacks: u64,
    pub unmapped_senses: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedWord {
    pub word: String,
    pub cases: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub systems: Vec<System>,
    pub words: Vec<WordResult>,
    pub skipped: Vec<SkippedWord>,
    /// Unweighted mean of the per-word accuracies, per system.
    pub macro_average: Vec<f64>,
}

impl EvalReport {
    pub fn accuracy(&self, system: System) -> Option<f64> {
        let i = self.systems.iter().position(|&s| s == system)?;
        self.macro_average.get(i).copied()
    }

    /// Words × systems, a macro-average row, skipped words as comments and
    /// the full-scale reference figures as a trailing comment.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("word\tcases");
        for s in &self.systems {
            out += "\t";
            out += s.name();
        }
        out.push('\n');
        for w in &self.words {
            let _ = write!(out, "{}\t{}", w.word, w.cases);
            for a in &w.accuracy {
                let _ = write!(out, "\t{a:.6}");
            }
            out.push('\n');
        }
        let total: u64 = self.words.iter().map(|w| w.cases).sum();
        let _ = write!(out, "macro_average\t{total}");
        for a in &self.macro_average {
            let _ = write!(out, "\t{a:.6}");
        }
        out.push('\n');
        for s in &self.skipped {
            let _ = writeln!(out, "# skipped\t{}\t{}\t{}", s.word, s.cases, s.reason);
        }
        out += "# full-scale reference (not reproducible here)";
        for (s, a) in FULL_SCALE_REFERENCE {
            let _ = write!(out, "\t{}={a:.4}", s.name());
        }
        out.push('\n');
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

struct WordSetup<'a> {
    model: &'a SenseModel,
    priors: &'a Priors,
    mapping: &'a WordMapping,
    similarity: SimilarityIndex,
    features: &'a FeatureConfig,
    unmapped: Vec<u32>,
}

fn setup<'a>(
    word: &str,
    models: &'a HashMap<String, SenseModel>,
    mapping: &'a SenseMapping,
    graph: &LexGraph,
    cfg: &'a EvalConfig,
) -> Result<WordSetup<'a>, String> {
    let model = models.get(word).ok_or("no model")?;
    let m = mapping.words.get(word).ok_or("no sense mapping")?;
    if m.gold_order.is_empty() {
        return Err("no gold sense inventory".into());
    }
    if !m.fine_to_coarse.keys().any(|s| model.senses().contains(s)) {
        return Err("no model sense has a coarse counterpart".into());
    }
    let priors = cfg.priors_by_word.get(word).unwrap_or(&cfg.priors);
    model.log_priors(priors).map_err(|e| e.to_string())?;
    Ok(WordSetup {
        model,
        priors,
        mapping: m,
        similarity: SimilarityIndex::new(graph, word, m, cfg.similarity_first_sense_only),
        features: model.features.as_ref().unwrap_or(&cfg.features),
        unmapped: m.unmapped(graph, word),
    })
}

/// Answers of every system for one case, in [`System::ALL`] order, plus
/// whether the similarity baseline fell back.
fn answer<'a>(
    w: &'a WordSetup<'a>,
    graph: &LexGraph,
    case: &TestCase,
    cfg: &EvalConfig,
    draw: u64,
) -> ([&'a str; 6], bool) {
    let mapped = |s: u32| w.mapping.fine_to_coarse.contains_key(&s);
    let coarse = |s: Option<u32>| s.and_then(|s| w.mapping.coarse(s)).unwrap_or("");
    let first_wn = baseline_first_wordnet(w.mapping).unwrap_or("");
    let (sim, fallback) = match w.similarity.answer(graph, &case.sentence, case.span) {
        Some(a) if !a.fallback => (coarse(Some(a.sense)), false),
        _ => (first_wn, true),
    };
    let x = extract(&case.sentence, case.span, case.span, w.features);
    let standard = w
        .model
        .score_standard(&x, w.priors)
        .expect("priors were validated for this word")
        .best_among(mapped);
    let modified = w.model.score_modified(&x).best_among(mapped);
    (
        [
            baseline_random(&w.mapping.gold_order, cfg.seed, draw),
            baseline_first_gold(w.mapping).unwrap_or(""),
            first_wn,
            sim,
            coarse(standard),
            coarse(modified),
        ],
        fallback,
    )
}

/// Runs every system on every case of every word that can be evaluated.
/// Words without a model, mapping or usable sense are listed in
/// [`EvalReport::skipped`].
pub fn evaluate(
    models: &HashMap<String, SenseModel>,
    mapping: &SenseMapping,
    cases: &[TestCase],
    graph: &LexGraph,
    cfg: &EvalConfig,
    exec: Execution,
) -> EvalReport {
    let mut by_word: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in cases.iter().enumerate() {
        by_word.entry(c.word.as_str()).or_default().push(i);
    }
    let mut words = Vec::new();
    let mut skipped = Vec::new();
    for (word, ids) in by_word {
        let w = match setup(word, models, mapping, graph, cfg) {
            Ok(w) => w,
            Err(reason) => {
                skipped.push(SkippedWord {
                    word: word.to_string(),
                    cases: ids.len() as u64,
                    reason,
                });
                continue;
            }
        };
        let answers = map_ordered(exec, &ids, |&i| {
            let (a, fallback) = answer(&w, graph, &cases[i], cfg, i as u64);
            (a.map(|label| label == cases[i].gold), fallback)
        });
        let mut correct = vec![0u64; System::ALL.len()];
        let mut fallbacks = 0;
        for (hits, fallback) in &answers {
            for (c, &h) in correct.iter_mut().zip(hits) {
                *c += u64::from(h);
            }
            fallbacks += u64::from(*fallback);
        }
        let n = ids.len() as u64;
        words.push(WordResult {
            word: word.to_string(),
            cases: n,
            accuracy: correct.iter().map(|&c| c as f64 / n as f64).collect(),
            correct,
            similarity_fallbacks: fallbacks,
            unmapped_senses: w.unmapped,
        });
    }
    let macro_average = (0..System::ALL.len())
        .map(|s| {
            if words.is_empty() {
                0.0
            } else {
                words.iter().map(|w| w.accuracy[s]).sum::<f64>() / words.len() as f64
            }
        })
        .collect();
    EvalReport {
        systems: System::ALL.to_vec(),
        words,
        skipped,
        macro_average,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::sentence;
    use crate::features::FeatureVector;
    use crate::graph::fixtures::{record, tongue_core};

    fn labels(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn random_baseline_is_uniform_and_reproducible() {
        let l = labels(3);
        let n = 30_000u64;
        let mut counts = [0u64; 3];
        for d in 0..n {
            let a = baseline_random(&l, 7, d);
            counts[l.iter().position(|x| x == a).unwrap()] += 1;
        }
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 3.0).abs() < 3.0 * sigma, "{counts:?}");
        }
        let again: Vec<&str> = (0..50).map(|d| baseline_random(&l, 7, d)).collect();
        let twice: Vec<&str> = (0..50).map(|d| baseline_random(&l, 7, d)).collect();
        assert_eq!(again, twice);
        assert!((0..20).all(|d| baseline_random(&labels(1), 3, d) == "c1"));
    }

    #[test]
    fn first_sense_baselines() {
        let mut m = SenseMapping::default();
        m.insert("w", 1, "b").unwrap();
        m.insert("w", 2, "a").unwrap();
        m.words.get_mut("w").unwrap().gold_order = vec!["a".into(), "b".into()];
        let w = &m.words["w"];
        assert_eq!(baseline_first_gold(w), Some("a"));
        assert_eq!(baseline_first_wordnet(w), Some("b"));
        assert!(matches!(
            m.insert("w", 1, "a"),
            Err(EvalError::ConflictingMapping { .. })
        ));
    }

    /// język has senses 1 (an unrelated synset) and 6 (the fixture's).
    fn similarity_graph() -> LexGraph {
        let mut recs = tongue_core();
        recs.push(record("mowa", &[("język", 1)], &[], &[]));
        recs.push(record("pies", &[("pies", 1)], &[], &[]));
        LexGraph::from_records(recs).unwrap()
    }

    fn two_sense_mapping() -> SenseMapping {
        let mut m = SenseMapping::default();
        m.insert("język", 1, "mowa").unwrap();
        m.insert("język", 6, "organ").unwrap();
        m.words.get_mut("język").unwrap().gold_order = vec!["mowa".into(), "organ".into()];
        m
    }

    #[test]
    fn similarity_prefers_the_related_sense() {
        let g = similarity_graph();
        let m = two_sense_mapping();
        let idx = SimilarityIndex::new(&g, "język", &m.words["język"], false);
        let s = sentence("duży/adj:sg:nom:m3:pos język/subst:sg:nom:m3 i/conj jęzor/subst:sg:nom:m3");
        let a = idx.answer(&g, &s, 1).unwrap();
        assert_eq!(a.sense, 6);
        assert!(!a.fallback);
        assert_eq!(a.score, lch_score(2, g.max_depth()));

        // unrelated or unknown context: fallback, lowest sense
        let s = sentence("pies/subst:sg:nom:m2 język/subst:sg:nom:m3 kot/subst:sg:nom:m2");
        let a = idx.answer(&g, &s, 1).unwrap();
        assert!(a.fallback);
        let s = sentence("język/subst:sg:nom:m3");
        assert!(idx.answer(&g, &s, 0).unwrap().fallback);
    }

    fn case(word: &str, gold: &str, text: &str, span: usize) -> TestCase {
        TestCase {
            word: word.into(),
            gold: gold.into(),
            span,
            sentence: sentence(text),
        }
    }

    #[test]
    fn evaluate_reports_and_skips() {
        let g = similarity_graph();
        let m = two_sense_mapping();
        let fv = |k: &str| -> FeatureVector {
            [crate::features::FeatureKey::new(crate::features::Channel::Lemma, k)]
                .into_iter()
                .collect()
        };
        let model = SenseModel::fit(
            "język",
            &[1, 6],
            1.0,
            vec![(fv("mówić"), 1), (fv("mówić"), 1), (fv("jęzor"), 6)],
        )
        .unwrap();
        let models = HashMap::from([("język".to_string(), model)]);
        let cases = vec![
            case("język", "organ", "język/subst jęzor/subst", 0),
            case("język", "mowa", "mówić/fin język/subst", 1),
            case("pies", "x", "pies/subst", 0),
        ];
        let r = evaluate(&models, &m, &cases, &g, &EvalConfig::default(), Execution::Sequential);
        assert_eq!(r.words.len(), 1);
        assert_eq!(
            r.skipped,
            vec![SkippedWord {
                word: "pies".into(),
                cases: 1,
                reason: "no model".into()
            }]
        );
        let w = &r.words[0];
        assert_eq!(w.cases, 2);
        assert_eq!(r.accuracy(System::BayesModified), Some(1.0));
        assert_eq!(r.accuracy(System::FirstGoldSense), Some(0.5));
        assert_eq!(r.accuracy(System::FirstWordnetSense), Some(0.5));
        assert_eq!(r.accuracy(System::Similarity), Some(1.0));
        assert_eq!(w.similarity_fallbacks, 1);
        for (s, &c) in w.correct.iter().enumerate() {
            assert!(c <= w.cases, "system {s}");
        }
        let tsv = r.to_tsv();
        assert!(tsv.starts_with("word\tcases\trandom\t"));
        assert!(tsv.contains("# skipped\tpies\t1\tno model"));
    }

    #[test]
    fn macro_average_weighs_words_equally() {
        let mut g_recs = tongue_core();
        g_recs.push(record("a1", &[("a", 1)], &[], &[]));
        g_recs.push(record("a2", &[("a", 2)], &[], &[]));
        g_recs.push(record("b1", &[("b", 1)], &[], &[]));
        g_recs.push(record("b2", &[("b", 2)], &[], &[]));
        let g = LexGraph::from_records(g_recs).unwrap();
        let mut m = SenseMapping::default();
        for w in ["a", "b"] {
            m.insert(w, 1, "x").unwrap();
            m.insert(w, 2, "y").unwrap();
            m.words.get_mut(w).unwrap().gold_order = vec!["x".into(), "y".into()];
        }
        let models: HashMap<String, SenseModel> = ["a", "b"]
            .iter()
            .map(|w| {
                (
                    w.to_string(),
                    SenseModel::fit(w, &[1, 2], 1.0, vec![(FeatureVector::new(), 1)]).unwrap(),
                )
            })
            .collect();
        // word a: 1 case, first sense right; word b: 4 cases, half right
        let mut cases = vec![case("a", "x", "a/subst", 0)];
        for gold in ["x", "y", "x", "y"] {
            cases.push(case("b", gold, "b/subst", 0));
        }
        let r = evaluate(&models, &m, &cases, &g, &EvalConfig::default(), Execution::Parallel);
        assert_eq!(r.accuracy(System::FirstWordnetSense), Some(0.75));
    }

    #[test]
    fn test_file_parsing() {
        let good = r#"{"word":"Język","gold":"organ","span_start":1,"tokens":[{"surface":"duży","lemma":"duży","tag":"adj"},{"surface":"język","lemma":"język","tag":"subst"}]}"#;
        let cases = load_test_cases(good.as_bytes()).unwrap();
        assert_eq!(cases[0].word, "język");
        assert_eq!(load_test_cases(cases[0].to_json().as_bytes()).unwrap(), cases);
        let bad = good.replace("\"span_start\":1", "\"span_start\":0");
        assert!(matches!(
            load_test_cases(bad.as_bytes()),
            Err(EvalError::SpanMismatch { .. })
        ));
        let bad = good.replace("\"span_start\":1", "\"span_start\":5");
        assert!(matches!(
            load_test_cases(bad.as_bytes()),
            Err(EvalError::SpanOutOfRange { .. })
        ));
        assert!(matches!(
            load_test_cases(&b"{"[..]),
            Err(EvalError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn mapping_round_trip() {
        let m = two_sense_mapping();
        let back = SenseMapping::load(m.to_jsonl().as_bytes()).unwrap();
        assert_eq!(back, m);
        assert_eq!(
            m.words["język"].unmapped(&similarity_graph(), "język"),
            Vec::<u32>::new()
        );
    }
}
