//! In-memory lexical graph: synsets, lexical units, hypernymy and determiner
//! relations, undirected shortest paths and Leacock & Chodorow similarity.
//!
//! The graph is built once from line-delimited JSON records (one synset per
//! line) and is immutable afterwards.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    #[default]
    Noun,
    Adjective,
    Verb,
    #[serde(other)]
    Other,
}

/// Index of a synset inside a [`LexGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetId(pub u32);

/// Index of a lexical unit inside a [`LexGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitId(pub u32);

impl SynsetId {
    fn ix(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalUnit {
    pub lemma: String,
    /// Sense ordinal as numbered by the wordnet; 1 is presumed most frequent.
    pub sense: u32,
    pub synset: SynsetId,
    pub pos: PartOfSpeech,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub name: String,
    pub units: Vec<UnitId>,
    pub hypernyms: Vec<SynsetId>,
    pub hyponyms: Vec<SynsetId>,
    /// Adjective lemmas attached to this synset by the determiner relation.
    pub determiners: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation<'a> {
    Hypernym { from: SynsetId, to: SynsetId },
    Hyponym { from: SynsetId, to: SynsetId },
    Determiner { synset: SynsetId, adjective: &'a str },
}

/// One line of the wordnet file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynsetRecord {
    pub synset_id: String,
    pub units: Vec<UnitRecord>,
    #[serde(default)]
    pub hypernyms: Vec<String>,
    #[serde(default)]
    pub determiners: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub lemma: String,
    pub sense: u32,
    #[serde(default)]
    pub pos: PartOfSpeech,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("I/O error reading wordnet: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed synset record: {message}")]
    Parse { line: usize, message: String },
    #[error("synset `{0}` declared twice")]
    DuplicateSynset(String),
    #[error("synset `{0}` has no lexical units")]
    EmptySynset(String),
    #[error("synset `{synset}`: sense ordinal of `{lemma}` must be at least 1")]
    InvalidSense { synset: String, lemma: String },
    #[error("`{lemma}#{sense}` appears in synset `{first}` and again in `{second}`")]
    DuplicateSense {
        lemma: String,
        sense: u32,
        first: String,
        second: String,
    },
    #[error("synset `{synset}` names unknown hypernym `{target}`")]
    DanglingRelation { synset: String, target: String },
    #[error("hypernym cycle through synsets {}", .0.join(" -> "))]
    HypernymCycle(Vec<String>),
    #[error("unknown lemma `{0}`")]
    UnknownLemma(String),
    #[error("unknown sense `{0}#{1}`")]
    UnknownSense(String, u32),
}

/// Immutable wordnet graph.
#[derive(Debug, Clone)]
pub struct LexGraph {
    synsets: Vec<Synset>,
    units: Vec<LexicalUnit>,
    by_name: HashMap<String, SynsetId>,
    by_lemma: HashMap<String, Vec<UnitId>>,
    determiner_links: Vec<Vec<SynsetId>>,
    max_depth: u32,
}

impl LexGraph {
    /// Reads line-delimited synset records. Blank lines are ignored.
    pub fn load<R: BufRead>(reader: R) -> Result<LexGraph, GraphError> {
        let mut records = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line).map_err(|e| GraphError::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            records.push(record);
        }
        LexGraph::from_records(records)
    }

    pub fn from_records(records: Vec<SynsetRecord>) -> Result<LexGraph, GraphError> {
        let mut synsets = Vec::with_capacity(records.len());
        let mut units = Vec::new();
        let mut by_name = HashMap::with_capacity(records.len());
        let mut by_lemma: HashMap<String, Vec<UnitId>> = HashMap::new();

        for (ix, rec) in records.iter().enumerate() {
            let id = SynsetId(ix as u32);
            if by_name.insert(rec.synset_id.clone(), id).is_some() {
                return Err(GraphError::DuplicateSynset(rec.synset_id.clone()));
            }
            if rec.units.is_empty() {
                return Err(GraphError::EmptySynset(rec.synset_id.clone()));
            }
            let mut unit_ids = Vec::with_capacity(rec.units.len());
            for u in &rec.units {
                let lemma = normalize_lemma(&u.lemma);
                if u.sense == 0 || lemma.is_empty() {
                    return Err(GraphError::InvalidSense {
                        synset: rec.synset_id.clone(),
                        lemma,
                    });
                }
                let entry = by_lemma.entry(lemma.clone()).or_default();
                if let Some(&prev) = entry.iter().find(|&&p| units_sense(&units, p) == u.sense) {
                    let first = &records[units_synset(&units, prev).ix()].synset_id;
                    return Err(GraphError::DuplicateSense {
                        lemma,
                        sense: u.sense,
                        first: first.clone(),
                        second: rec.synset_id.clone(),
                    });
                }
                let uid = UnitId(units.len() as u32);
                entry.push(uid);
                unit_ids.push(uid);
                units.push(LexicalUnit {
                    lemma,
                    sense: u.sense,
                    synset: id,
                    pos: u.pos,
                });
            }
            let mut determiners: Vec<String> = Vec::new();
            for d in &rec.determiners {
                let d = normalize_lemma(d);
                if !d.is_empty() && !determiners.contains(&d) {
                    determiners.push(d);
                }
            }
            synsets.push(Synset {
                name: rec.synset_id.clone(),
                units: unit_ids,
                hypernyms: Vec::new(),
                hyponyms: Vec::new(),
                determiners,
            });
        }

        for (ix, rec) in records.iter().enumerate() {
            for h in &rec.hypernyms {
                let target = *by_name.get(h).ok_or_else(|| GraphError::DanglingRelation {
                    synset: rec.synset_id.clone(),
                    target: h.clone(),
                })?;
                if !synsets[ix].hypernyms.contains(&target) {
                    synsets[ix].hypernyms.push(target);
                    synsets[target.ix()].hyponyms.push(SynsetId(ix as u32));
                }
            }
        }

        for list in by_lemma.values_mut() {
            list.sort_by_key(|&u| units[u.0 as usize].sense);
        }

        check_acyclic(&synsets)?;
        let max_depth = longest_chain(&synsets).max(1);

        let mut determiner_links = vec![Vec::new(); synsets.len()];
        for (ix, s) in synsets.iter().enumerate() {
            for d in &s.determiners {
                for &u in by_lemma.get(d).map(Vec::as_slice).unwrap_or(&[]) {
                    let other = units[u.0 as usize].synset;
                    if other.ix() == ix {
                        continue;
                    }
                    if !determiner_links[ix].contains(&other) {
                        determiner_links[ix].push(other);
                    }
                    if !determiner_links[other.ix()].contains(&SynsetId(ix as u32)) {
                        determiner_links[other.ix()].push(SynsetId(ix as u32));
                    }
                }
            }
        }

        Ok(LexGraph {
            synsets,
            units,
            by_name,
            by_lemma,
            determiner_links,
            max_depth,
        })
    }

    /// Records in synset order; loading them yields an identical graph.
    pub fn to_records(&self) -> Vec<SynsetRecord> {
        self.synsets
            .iter()
            .map(|s| SynsetRecord {
                synset_id: s.name.clone(),
                units: s
                    .units
                    .iter()
                    .map(|&u| {
                        let u = self.unit(u);
                        UnitRecord {
                            lemma: u.lemma.clone(),
                            sense: u.sense,
                            pos: u.pos,
                        }
                    })
                    .collect(),
                hypernyms: s.hypernyms.iter().map(|&h| self.synset(h).name.clone()).collect(),
                determiners: s.determiners.clone(),
            })
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for rec in self.to_records() {
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    /// Longest root-to-leaf hypernym chain, counted in nodes (never below 1).
    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn synsets(&self) -> impl Iterator<Item = (SynsetId, &Synset)> {
        self.synsets.iter().enumerate().map(|(i, s)| (SynsetId(i as u32), s))
    }

    pub fn synset(&self, id: SynsetId) -> &Synset {
        &self.synsets[id.ix()]
    }

    pub fn unit(&self, id: UnitId) -> &LexicalUnit {
        &self.units[id.0 as usize]
    }

    pub fn synset_by_name(&self, name: &str) -> Option<SynsetId> {
        self.by_name.get(name).copied()
    }

    /// Units carrying `lemma`, ordered by sense ordinal. Empty if unknown.
    pub fn units_of(&self, lemma: &str) -> &[UnitId] {
        self.by_lemma.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains_lemma(&self, lemma: &str) -> bool {
        self.by_lemma.contains_key(lemma)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.by_lemma.keys().map(String::as_str)
    }

    pub fn find_sense(&self, lemma: &str, sense: u32) -> Option<UnitId> {
        self.units_of(lemma)
            .iter()
            .copied()
            .find(|&u| self.unit(u).sense == sense)
    }

    pub fn synset_of(&self, lemma: &str, sense: u32) -> Result<SynsetId, GraphError> {
        self.find_sense(lemma, sense)
            .map(|u| self.unit(u).synset)
            .ok_or_else(|| GraphError::UnknownSense(lemma.to_string(), sense))
    }

    /// Sense ordinals of `lemma` in ascending order.
    pub fn senses_of(&self, lemma: &str) -> Vec<u32> {
        self.units_of(lemma).iter().map(|&u| self.unit(u).sense).collect()
    }

    pub fn is_monosemous(&self, lemma: &str) -> Result<bool, GraphError> {
        match self.by_lemma.get(lemma) {
            Some(units) => Ok(units.len() == 1),
            None => Err(GraphError::UnknownLemma(lemma.to_string())),
        }
    }

    pub fn relations(&self) -> impl Iterator<Item = Relation<'_>> {
        self.synsets().flat_map(move |(id, s)| {
            let hyper = s.hypernyms.iter().map(move |&to| Relation::Hypernym { from: id, to });
            let hypo = s.hyponyms.iter().map(move |&to| Relation::Hyponym { from: id, to });
            let det = s.determiners.iter().map(move |d| Relation::Determiner {
                synset: id,
                adjective: d.as_str(),
            });
            hyper.chain(hypo).chain(det)
        })
    }

    /// Undirected neighbourhood over every relation kind.
    pub fn neighbours(&self, id: SynsetId) -> impl Iterator<Item = SynsetId> + '_ {
        let s = &self.synsets[id.ix()];
        s.hypernyms
            .iter()
            .chain(&s.hyponyms)
            .chain(&self.determiner_links[id.ix()])
            .copied()
    }

    /// Path length in nodes from `from` to every synset (`from` itself is 1).
    pub fn distances_from(&self, from: SynsetId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.synsets.len()];
        dist[from.ix()] = Some(1);
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            let d = dist[s.ix()].unwrap_or(0);
            for n in self.neighbours(s) {
                if dist[n.ix()].is_none() {
                    dist[n.ix()] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Shortest undirected path between two synsets, counted in nodes.
    /// `None` when the synsets are disconnected.
    pub fn shortest_path_len(&self, a: SynsetId, b: SynsetId) -> Option<u32> {
        if a == b {
            return Some(1);
        }
        let mut seen = HashSet::from([a]);
        let mut frontier = vec![a];
        let mut len = 1;
        while !frontier.is_empty() {
            len += 1;
            let mut next = Vec::new();
            for s in frontier {
                for n in self.neighbours(s) {
                    if n == b {
                        return Some(len);
                    }
                    if seen.insert(n) {
                        next.push(n);
                    }
                }
            }
            frontier = next;
        }
        None
    }

    /// Leacock & Chodorow similarity; `f64::NEG_INFINITY` when unreachable.
    pub fn lch_similarity(&self, a: SynsetId, b: SynsetId) -> f64 {
        match self.shortest_path_len(a, b) {
            Some(len) => lch_score(len, self.max_depth),
            None => f64::NEG_INFINITY,
        }
    }
}

/// `-log10(len / (2 * max_depth))` for a path of `len` nodes.
pub fn lch_score(path_len: u32, max_depth: u32) -> f64 {
    -(f64::from(path_len) / (2.0 * f64::from(max_depth))).log10()
}

pub(crate) fn normalize_lemma(lemma: &str) -> String {
    let trimmed = lemma.trim();
    if trimmed.chars().any(char::is_uppercase) {
        trimmed.to_lowercase()
    } else {
        trimmed.to_string()
    }
}

fn units_sense(units: &[LexicalUnit], id: UnitId) -> u32 {
    units[id.0 as usize].sense
}

fn units_synset(units: &[LexicalUnit], id: UnitId) -> SynsetId {
    units[id.0 as usize].synset
}

fn check_acyclic(synsets: &[Synset]) -> Result<(), GraphError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; synsets.len()];
    for root in 0..synsets.len() {
        if mark[root] != Mark::New {
            continue;
        }
        // (synset, next hypernym to visit)
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Open;
        while let Some(&mut (s, ref mut next)) = stack.last_mut() {
            if let Some(&h) = synsets[s].hypernyms.get(*next) {
                *next += 1;
                match mark[h.ix()] {
                    Mark::New => {
                        mark[h.ix()] = Mark::Open;
                        stack.push((h.ix(), 0));
                    }
                    Mark::Open => {
                        let start = stack.iter().position(|&(x, _)| x == h.ix()).unwrap_or(0);
                        let mut cycle: Vec<String> =
                            stack[start..].iter().map(|&(x, _)| synsets[x].name.clone()).collect();
                        cycle.push(synsets[h.ix()].name.clone());
                        return Err(GraphError::HypernymCycle(cycle));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[s] = Mark::Done;
                stack.pop();
            }
        }
    }
    Ok(())
}

/// Longest hypernym chain in nodes; the graph must be acyclic.
fn longest_chain(synsets: &[Synset]) -> u32 {
    let mut height = vec![0u32; synsets.len()];
    let mut best = 0;
    for start in 0..synsets.len() {
        if height[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, false)];
        while let Some((s, expanded)) = stack.pop() {
            if height[s] != 0 {
                continue;
            }
            if expanded {
                let below = synsets[s].hyponyms.iter().map(|h| height[h.ix()]).max().unwrap_or(0);
                height[s] = below + 1;
            } else {
                stack.push((s, true));
                for h in &synsets[s].hyponyms {
                    if height[h.ix()] == 0 {
                        stack.push((h.ix(), false));
                    }
                }
            }
        }
        best = best.max(height[start]);
    }
    best
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    fn rec(id: &str, units: &[(&str, u32)], hypernyms: &[&str], determiners: &[&str]) -> SynsetRecord {
        SynsetRecord {
            synset_id: id.to_string(),
            units: units
                .iter()
                .map(|&(lemma, sense)| UnitRecord {
                    lemma: lemma.to_string(),
                    sense,
                    pos: PartOfSpeech::Noun,
                })
                .collect(),
            hypernyms: hypernyms.iter().map(|s| s.to_string()).collect(),
            determiners: determiners.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// The four synsets around `język#6`.
    pub fn tongue_core() -> Vec<SynsetRecord> {
        vec![
            rec("narzad", &[("narząd", 1)], &[], &[]),
            rec("jezyk6", &[("język", 6)], &["narzad"], &[]),
            rec("artykulator1", &[("artykulator", 1)], &["jezyk6"], &[]),
            rec("jezor", &[("jęzor", 1)], &["jezyk6"], &[]),
        ]
    }

    /// Core fixture plus a second, unrelated sense of `artykulator`.
    pub fn tongue() -> LexGraph {
        let mut recs = tongue_core();
        recs.push(rec("artykulator2", &[("artykulator", 2)], &[], &[]));
        LexGraph::from_records(recs).unwrap()
    }

    pub fn organ() -> LexGraph {
        LexGraph::from_records(vec![
            rec("organ1", &[("organ", 1)], &[], &[]),
            rec("organ2", &[("organ", 2)], &[], &["natleniony", "wydolny"]),
            rec("natleniony", &[("natleniony", 1)], &[], &[]),
        ])
        .unwrap()
    }

    pub fn record(id: &str, units: &[(&str, u32)], hypernyms: &[&str], determiners: &[&str]) -> SynsetRecord {
        rec(id, units, hypernyms, determiners)
    }
}
