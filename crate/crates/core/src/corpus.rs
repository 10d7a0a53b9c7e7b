//! Pre-tagged corpus streaming: sentence quality filter, relative matching
//! and one-sense-per-discourse harvesting of target-word occurrences.
//!
//! Documents are independent. Everything here is written as a per-document
//! map whose results merge associatively, so a corpus can be processed in
//! chunks on any number of threads with identical output.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::graph::normalize_lemma;
use crate::parallel::{fold_reduce, map_ordered, Execution, Merge};
use crate::relatives::{Pattern, Relative, Strategy};

/// Tag classes treated as punctuation.
pub const PUNCT_CLASSES: &[&str] = &["interp", "punct"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    /// Colon-separated attributes; the first is the part-of-speech class.
    pub tag: String,
    pub is_punct: bool,
}

#[derive(Deserialize)]
struct TokenRecord<'a> {
    #[serde(borrow)]
    surface: Cow<'a, str>,
    #[serde(borrow)]
    lemma: Cow<'a, str>,
    #[serde(borrow)]
    tag: Cow<'a, str>,
}

impl Token {
    pub fn new(surface: impl Into<String>, lemma: &str, tag: impl Into<String>) -> Token {
        let tag = tag.into();
        let is_punct = PUNCT_CLASSES.contains(&pos_class(&tag));
        Token {
            surface: surface.into(),
            lemma: normalize_lemma(lemma),
            tag,
            is_punct,
        }
    }

    pub fn pos_class(&self) -> &str {
        pos_class(&self.tag)
    }
}

pub fn pos_class(tag: &str) -> &str {
    tag.split(':').next().unwrap_or(tag)
}

impl Serialize for Token {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Borrowed<'a> {
            surface: &'a str,
            lemma: &'a str,
            tag: &'a str,
        }
        Borrowed {
            surface: &self.surface,
            lemma: &self.lemma,
            tag: &self.tag,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Token {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Token, D::Error> {
        let r = TokenRecord::deserialize(d)?;
        if r.lemma.trim().is_empty() || r.tag.is_empty() {
            return Err(serde::de::Error::custom("token lemma and tag must be non-empty"));
        }
        Ok(Token::new(r.surface.into_owned(), &r.lemma, r.tag.into_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    /// Characters of the surface text with single spaces between tokens.
    pub char_len: usize,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Sentence {
        let char_len = tokens.iter().map(|t| t.surface.chars().count()).sum::<usize>() + tokens.len().saturating_sub(1);
        Sentence { tokens, char_len }
    }

    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl Serialize for Sentence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.tokens.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sentence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Sentence, D::Error> {
        Vec::<Token>::deserialize(d).map(Sentence::new)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_tag: Option<String>,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_chars: usize,
    pub min_words: usize,
    pub min_pos_classes: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_chars: 150,
            min_words: 5,
            min_pos_classes: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    TooShort,
    TooFewWords,
    TooFewPosClasses,
}

impl FilterConfig {
    /// The first criterion a sentence fails, if any. Words are
    /// non-punctuation tokens; punctuation counts as one POS class.
    pub fn check(&self, s: &Sentence) -> Result<(), Rejection> {
        if s.char_len < self.min_chars {
            return Err(Rejection::TooShort);
        }
        if s.tokens.iter().filter(|t| !t.is_punct).count() < self.min_words {
            return Err(Rejection::TooFewWords);
        }
        let mut classes: Vec<&str> = Vec::with_capacity(8);
        for t in &s.tokens {
            let c = if t.is_punct { "interp" } else { t.pos_class() };
            if !classes.contains(&c) {
                classes.push(c);
                if classes.len() >= self.min_pos_classes {
                    return Ok(());
                }
            }
        }
        if classes.len() >= self.min_pos_classes {
            Ok(())
        } else {
            Err(Rejection::TooFewPosClasses)
        }
    }

    pub fn qualifies(&self, s: &Sentence) -> bool {
        self.check(s).is_ok()
    }
}

/// Sentence quality filter at the default thresholds.
pub fn sentence_qualifies(s: &Sentence) -> bool {
    FilterConfig::default().qualifies(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OccurrenceSource {
    Relative(Arc<Relative>),
    /// The target word itself, labelled by one-sense-per-discourse.
    Harvested,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TrainingOccurrence {
    pub doc_id: String,
    pub sentence: usize,
    /// Inclusive token span.
    pub start: usize,
    pub end: usize,
    pub source: OccurrenceSource,
    pub sense: u32,
}

impl TrainingOccurrence {
    pub fn multiword(&self) -> bool {
        self.end > self.start
    }
}

/// A span inside one document, before it is tied to a document id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
    pub sense: u32,
    /// Index into [`RelativeMatcher::relatives`]; `None` when harvested.
    pub relative: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestConfig {
    /// Relative matches the single attested sense needs before the
    /// document's target-word occurrences are harvested.
    pub min_matches: usize,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        HarvestConfig { min_matches: 1 }
    }
}

/// Finds relative occurrences of one target word. Matching is on lemmas,
/// leftmost-longest, non-overlapping.
#[derive(Debug, Clone)]
pub struct RelativeMatcher {
    target_lemma: String,
    relatives: Vec<Arc<Relative>>,
    by_first: HashMap<String, Vec<(Vec<String>, usize)>>,
    ambiguous: Vec<Pattern>,
}

impl RelativeMatcher {
    /// Builds a matcher over the relatives of every sense. A pattern that
    /// is a relative of two different senses carries no sense evidence and
    /// is left out (see [`RelativeMatcher::ambiguous`]).
    pub fn new(target_lemma: &str, per_sense: &BTreeMap<u32, Vec<Relative>>) -> RelativeMatcher {
        let all: Vec<Relative> = per_sense.values().flatten().cloned().collect();
        RelativeMatcher::from_relatives(target_lemma, &all)
    }

    pub fn from_relatives(target_lemma: &str, relatives: &[Relative]) -> RelativeMatcher {
        let mut senses: BTreeMap<&Pattern, HashSet<u32>> = BTreeMap::new();
        for r in relatives {
            senses.entry(&r.pattern).or_default().insert(r.target_sense);
        }
        let ambiguous: Vec<Pattern> = senses
            .iter()
            .filter(|(_, s)| s.len() > 1)
            .map(|(p, _)| (*p).clone())
            .collect();

        let mut kept: Vec<Arc<Relative>> = Vec::new();
        let mut seen = HashSet::new();
        for r in relatives {
            if ambiguous.contains(&r.pattern) || !seen.insert(&r.pattern) {
                continue;
            }
            kept.push(Arc::new(r.clone()));
        }

        let mut by_first: HashMap<String, Vec<(Vec<String>, usize)>> = HashMap::new();
        for (ix, r) in kept.iter().enumerate() {
            for seq in r.pattern.token_sequences() {
                if seq.is_empty() {
                    continue;
                }
                let seq: Vec<String> = seq.into_iter().map(str::to_string).collect();
                by_first.entry(seq[0].clone()).or_default().push((seq, ix));
            }
        }
        for list in by_first.values_mut() {
            list.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(&b.1)));
        }
        RelativeMatcher {
            target_lemma: normalize_lemma(target_lemma),
            relatives: kept,
            by_first,
            ambiguous,
        }
    }

    pub fn target_lemma(&self) -> &str {
        &self.target_lemma
    }

    pub fn relatives(&self) -> &[Arc<Relative>] {
        &self.relatives
    }

    /// Patterns dropped because they relate to more than one sense.
    pub fn ambiguous(&self) -> &[Pattern] {
        &self.ambiguous
    }

    fn match_sentence(&self, sentence_ix: usize, s: &Sentence, out: &mut Vec<Span>) {
        let toks = &s.tokens;
        let mut i = 0;
        while i < toks.len() {
            let hit = self.by_first.get(toks[i].lemma.as_str()).and_then(|cands| {
                cands.iter().find(|(seq, _)| {
                    i + seq.len() <= toks.len() && seq.iter().zip(&toks[i..]).all(|(l, t)| *l == t.lemma)
                })
            });
            match hit {
                Some((seq, ix)) => {
                    out.push(Span {
                        sentence: sentence_ix,
                        start: i,
                        end: i + seq.len() - 1,
                        sense: self.relatives[*ix].target_sense,
                        relative: Some(*ix),
                    });
                    i += seq.len();
                }
                None => i += 1,
            }
        }
    }

    /// Relative spans in the sentences flagged as qualifying, plus harvested
    /// target-word spans when `harvest` is given and the document attests
    /// exactly one sense.
    pub fn spans(&self, doc: &Document, qualifying: &[bool], harvest: Option<&HarvestConfig>) -> Vec<Span> {
        let mut out = Vec::new();
        for (ix, s) in doc.sentences.iter().enumerate() {
            if qualifying[ix] {
                self.match_sentence(ix, s, &mut out);
            }
        }
        if let Some(cfg) = harvest {
            if let Some(sense) = single_sense(&out, cfg.min_matches) {
                let matched = out.len();
                for (ix, s) in doc.sentences.iter().enumerate() {
                    if !qualifying[ix] {
                        continue;
                    }
                    for (t, tok) in s.tokens.iter().enumerate() {
                        if tok.lemma == self.target_lemma && !covered(&out[..matched], ix, t) {
                            out.push(Span {
                                sentence: ix,
                                start: t,
                                end: t,
                                sense,
                                relative: None,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn occurrence(&self, doc: &Document, span: &Span) -> TrainingOccurrence {
        TrainingOccurrence {
            doc_id: doc.doc_id.clone(),
            sentence: span.sentence,
            start: span.start,
            end: span.end,
            source: match span.relative {
                Some(ix) => OccurrenceSource::Relative(Arc::clone(&self.relatives[ix])),
                None => OccurrenceSource::Harvested,
            },
            sense: span.sense,
        }
    }
}

fn single_sense(spans: &[Span], min_matches: usize) -> Option<u32> {
    let first = spans.first()?.sense;
    if spans.iter().all(|s| s.sense == first) && spans.len() >= min_matches.max(1) {
        Some(first)
    } else {
        None
    }
}

fn covered(spans: &[Span], sentence: usize, token: usize) -> bool {
    spans
        .iter()
        .any(|s| s.sentence == sentence && s.start <= token && token <= s.end)
}

pub fn qualifying_flags(doc: &Document, filter: &FilterConfig) -> Vec<bool> {
    doc.sentences.iter().map(|s| filter.qualifies(s)).collect()
}

/// Relative occurrences in the qualifying sentences of one document.
pub fn match_occurrences(doc: &Document, relatives: &[Relative]) -> Vec<TrainingOccurrence> {
    let target = relatives.first().map(|r| r.target_lemma.as_str()).unwrap_or("");
    let matcher = RelativeMatcher::from_relatives(target, relatives);
    let flags = qualifying_flags(doc, &FilterConfig::default());
    matcher
        .spans(doc, &flags, None)
        .iter()
        .map(|s| matcher.occurrence(doc, s))
        .collect()
}

/// Target-word occurrences harvested from a document whose relative matches
/// all point to one sense; empty otherwise.
pub fn harvest_other_words(
    doc: &Document,
    per_sense: &BTreeMap<u32, Vec<Relative>>,
    target_lemma: &str,
) -> Vec<TrainingOccurrence> {
    let matcher = RelativeMatcher::new(target_lemma, per_sense);
    let flags = qualifying_flags(doc, &FilterConfig::default());
    matcher
        .spans(doc, &flags, Some(&HarvestConfig::default()))
        .iter()
        .filter(|s| s.relative.is_none())
        .map(|s| matcher.occurrence(doc, s))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: u64,
    pub malformed: u64,
    pub sentences: u64,
    pub qualified: u64,
    pub rejected_too_short: u64,
    pub rejected_too_few_words: u64,
    pub rejected_too_few_pos: u64,
    /// Target lemma -> sense -> occurrences (relative and harvested).
    pub occurrences: BTreeMap<String, BTreeMap<u32, u64>>,
    /// Target lemma -> harvested occurrences.
    pub harvested: BTreeMap<String, u64>,
}

impl CorpusStats {
    /// Counts a document's sentences by filter outcome and returns their
    /// qualifying flags.
    pub fn record_document(&mut self, doc: &Document, filter: &FilterConfig) -> Vec<bool> {
        doc.sentences
            .iter()
            .map(|s| {
                self.sentences += 1;
                match filter.check(s) {
                    Ok(()) => {
                        self.qualified += 1;
                        true
                    }
                    Err(r) => {
                        *match r {
                            Rejection::TooShort => &mut self.rejected_too_short,
                            Rejection::TooFewWords => &mut self.rejected_too_few_words,
                            Rejection::TooFewPosClasses => &mut self.rejected_too_few_pos,
                        } += 1;
                        false
                    }
                }
            })
            .collect()
    }

    pub fn record_spans(&mut self, target: &str, spans: &[Span]) {
        if spans.is_empty() {
            return;
        }
        let per_sense = self.occurrences.entry(target.to_string()).or_default();
        let mut harvested = 0;
        for s in spans {
            *per_sense.entry(s.sense).or_insert(0) += 1;
            harvested += u64::from(s.relative.is_none());
        }
        if harvested > 0 {
            *self.harvested.entry(target.to_string()).or_insert(0) += harvested;
        }
    }

    pub fn total_occurrences(&self, target: &str) -> u64 {
        self.occurrences.get(target).map_or(0, |m| m.values().sum())
    }
}

impl Merge for CorpusStats {
    fn merge(&mut self, other: Self) {
        self.documents += other.documents;
        self.malformed += other.malformed;
        self.sentences += other.sentences;
        self.qualified += other.qualified;
        self.rejected_too_short += other.rejected_too_short;
        self.rejected_too_few_words += other.rejected_too_few_words;
        self.rejected_too_few_pos += other.rejected_too_few_pos;
        for (k, v) in other.occurrences {
            Merge::merge(self.occurrences.entry(k).or_default(), v);
        }
        Merge::merge(&mut self.harvested, other.harvested);
    }
}

const CHUNK_LINES: usize = 2048;

/// Streams a line-delimited corpus through `per_doc` in chunks, folding
/// into accumulators that are merged in document order. Malformed lines and
/// repeated document ids are logged, counted in `CorpusStats::malformed`
/// and skipped; every other document counts in `CorpusStats::documents`.
pub fn scan_corpus<R, A, F>(
    reader: R,
    exec: Execution,
    identity: impl Fn() -> A + Sync + Send,
    per_doc: F,
) -> io::Result<(A, CorpusStats)>
where
    R: BufRead,
    A: Merge + Send,
    F: Fn(&Document, &mut A, &mut CorpusStats) + Sync + Send,
{
    let mut acc = identity();
    let mut stats = CorpusStats::default();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut lines = reader.lines();
    let mut line_no = 0usize;
    loop {
        let mut chunk = Vec::with_capacity(CHUNK_LINES);
        for line in lines.by_ref() {
            line_no += 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            chunk.push((line_no, line));
            if chunk.len() == CHUNK_LINES {
                break;
            }
        }
        if chunk.is_empty() {
            break;
        }
        let parsed = map_ordered(exec, &chunk, |(n, line)| {
            serde_json::from_str::<Document>(line).map_err(|e| (*n, e.to_string()))
        });
        drop(chunk);
        let mut docs = Vec::with_capacity(parsed.len());
        for p in parsed {
            match p {
                Ok(doc) => {
                    if seen_ids.insert(doc.doc_id.clone()) {
                        docs.push(doc);
                    } else {
                        log::warn!("skipping repeated document id `{}`", doc.doc_id);
                        stats.malformed += 1;
                    }
                }
                Err((n, e)) => {
                    log::warn!("skipping malformed document on line {n}: {e}");
                    stats.malformed += 1;
                }
            }
        }
        let part = fold_reduce(
            exec,
            &docs,
            || (identity(), CorpusStats::default()),
            |(a, s), doc| {
                s.documents += 1;
                per_doc(doc, a, s);
            },
        );
        acc.merge(part.0);
        stats.merge(part.1);
    }
    Ok((acc, stats))
}

/// Training occurrences of one target word over a whole corpus. Levels up
/// to `AllDeterminers` match relatives only; `OtherWords` also harvests.
pub fn stream_training<R: BufRead>(
    corpus: R,
    per_sense: &BTreeMap<u32, Vec<Relative>>,
    target_lemma: &str,
    level: Strategy,
    filter: &FilterConfig,
    exec: Execution,
) -> io::Result<(Vec<TrainingOccurrence>, CorpusStats)> {
    let matcher = RelativeMatcher::new(target_lemma, per_sense);
    let harvest = HarvestConfig::default();
    let harvest = (level == Strategy::OtherWords).then_some(&harvest);
    scan_corpus(corpus, exec, Vec::new, |doc, out, stats| {
        let flags = stats.record_document(doc, filter);
        let spans = matcher.spans(doc, &flags, harvest);
        stats.record_spans(matcher.target_lemma(), &spans);
        out.extend(spans.iter().map(|s| matcher.occurrence(doc, s)));
    })
}

/// Copies the corpus keeping only qualifying sentences; documents left
/// without sentences are dropped.
pub fn filter_corpus<R: BufRead, W: Write>(
    corpus: R,
    mut out: W,
    filter: &FilterConfig,
    exec: Execution,
) -> io::Result<CorpusStats> {
    let (kept, stats) = scan_corpus(corpus, exec, Vec::new, |doc, kept: &mut Vec<String>, stats| {
        let flags = stats.record_document(doc, filter);
        let sentences: Vec<Sentence> = doc
            .sentences
            .iter()
            .zip(&flags)
            .filter(|(_, &ok)| ok)
            .map(|(s, _)| s.clone())
            .collect();
        if sentences.is_empty() {
            return;
        }
        let kept_doc = Document {
            doc_id: doc.doc_id.clone(),
            source_tag: doc.source_tag.clone(),
            sentences,
        };
        kept.push(serde_json::to_string(&kept_doc).expect("documents always serialize"));
    })?;
    for line in kept {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(stats)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Tokens from `lemma/tag` words; surface equals lemma.
    pub fn sentence(words: &str) -> Sentence {
        Sentence::new(
            words
                .split_whitespace()
                .map(|w| {
                    let (lemma, tag) = w.split_once('/').unwrap();
                    Token::new(lemma, lemma, tag)
                })
                .collect(),
        )
    }

    /// A qualifying sentence with `inner` placed in its middle.
    pub fn padded(inner: &str) -> Sentence {
        sentence(&format!(
            "wczoraj/adv:pos bardzo/adv:pos długo/adv:pos rozmawiali/fin:pl:ter:imperf o/prep:loc \
             {inner} oraz/conj o/prep:loc wielu/adj:pl:loc:m3:pos innych/adj:pl:loc:m3:pos \
             sprawach/subst:pl:loc:f przy/prep:loc stole/subst:sg:loc:m3 w/prep:loc \
             dużej/adj:sg:loc:f:pos kuchni/subst:sg:loc:f ,/interp a/conj potem/adv:pos \
             wszyscy/subst:pl:nom:m1 poszli/praet:pl:m1:perf spać/inf:imperf do/prep:gen \
             swoich/adj:pl:gen:m3:pos pokojów/subst:pl:gen:m3 późnym/adj:sg:inst:m3:pos \
             wieczorem/subst:sg:inst:m3 ./interp"
        ))
    }

    pub fn doc(id: &str, sentences: Vec<Sentence>) -> Document {
        Document {
            doc_id: id.to_string(),
            source_tag: None,
            sentences,
        }
    }
}
