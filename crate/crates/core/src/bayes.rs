//! Naïve Bayes over binary features, with the usual posterior and a
//! prior-free variant.
//!
//! With smoothed conditionals `p1(i, y) = (c_iy + α) / (n_y + 2α)` and
//! `p0 = 1 - p1`, the unnormalised posterior of sense `y` for the present
//! features `x` splits into
//!
//! ```text
//! A(y)    = P(y) · Π_{i ∈ V} p0(i, y)          (no context observed)
//! B(y, x) = Π_{i ∈ x} p1(i, y) / p0(i, y)
//! ```
//!
//! The standard rule maximises `A · B`. The modified rule maximises `B`
//! alone, so an empty context leaves every sense equally likely whatever
//! the number of training occurrences behind each.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureConfig, FeatureKey, FeatureVector};
use crate::parallel::Merge;

pub const MODEL_FORMAT: &str = "relwsd-sense-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("smoothing must be a positive finite number, got {0}")]
    BadAlpha(f64),
    #[error("sense {0} is not declared for this model")]
    UnknownSense(u32),
    #[error("models for different words or sense inventories cannot be merged")]
    Incompatible,
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("model file version {found} is not supported (expected {MODEL_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-word occurrence and feature-presence counts.
#[derive(Debug, Clone)]
pub struct SenseModel {
    target_lemma: String,
    alpha: f64,
    senses: Vec<u32>,
    totals: Vec<u64>,
    counts: HashMap<FeatureKey, Vec<u64>>,
    /// Extraction settings used in training, if recorded.
    pub features: Option<FeatureConfig>,
    log_absent: OnceLock<Vec<f64>>,
}

impl PartialEq for SenseModel {
    fn eq(&self, other: &Self) -> bool {
        self.target_lemma == other.target_lemma
            && self.alpha == other.alpha
            && self.senses == other.senses
            && self.totals == other.totals
            && self.counts == other.counts
            && self.features == other.features
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Priors {
    /// `n_y / Σ n`.
    Empirical,
    Uniform,
    Explicit(BTreeMap<u32, f64>),
}

/// Log scores per sense (in sense order) and the winner.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub senses: Vec<u32>,
    pub log_scores: Vec<f64>,
    pub chosen: u32,
}

impl Scores {
    fn new(senses: Vec<u32>, log_scores: Vec<f64>) -> Scores {
        let chosen = argmax(&senses, &log_scores, |_| true).unwrap_or(0);
        Scores {
            senses,
            log_scores,
            chosen,
        }
    }

    /// Best sense among those accepted by `allowed`; ties go to the lowest
    /// ordinal.
    pub fn best_among(&self, allowed: impl Fn(u32) -> bool) -> Option<u32> {
        argmax(&self.senses, &self.log_scores, allowed)
    }

    pub fn get(&self, sense: u32) -> Option<f64> {
        self.senses.iter().position(|&s| s == sense).map(|i| self.log_scores[i])
    }
}

fn argmax(senses: &[u32], scores: &[f64], allowed: impl Fn(u32) -> bool) -> Option<u32> {
    let mut best: Option<(u32, f64)> = None;
    for (&s, &v) in senses.iter().zip(scores) {
        if !allowed(s) {
            continue;
        }
        best = match best {
            Some((bs, bv)) if bv > v || (bv == v && bs < s) => Some((bs, bv)),
            _ => Some((s, v)),
        };
    }
    best.map(|(s, _)| s)
}

/// Both factors of the standard posterior, in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBreakdown {
    pub senses: Vec<u32>,
    pub log_a: Vec<f64>,
    pub log_b: Vec<f64>,
}

impl SenseModel {
    /// An empty model over the declared senses.
    pub fn new(target_lemma: &str, senses: &[u32], alpha: f64) -> Result<SenseModel, ModelError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ModelError::BadAlpha(alpha));
        }
        let mut senses = senses.to_vec();
        senses.sort_unstable();
        senses.dedup();
        Ok(SenseModel {
            target_lemma: target_lemma.to_string(),
            alpha,
            totals: vec![0; senses.len()],
            senses,
            counts: HashMap::new(),
            features: None,
            log_absent: OnceLock::new(),
        })
    }

    /// Counts a stream of labelled feature vectors.
    pub fn fit<I>(target_lemma: &str, senses: &[u32], alpha: f64, occurrences: I) -> Result<SenseModel, ModelError>
    where
        I: IntoIterator<Item = (FeatureVector, u32)>,
    {
        let mut m = SenseModel::new(target_lemma, senses, alpha)?;
        for (x, y) in occurrences {
            m.observe(&x, y)?;
        }
        Ok(m)
    }

    fn sense_index(&self, sense: u32) -> Result<usize, ModelError> {
        self.senses
            .binary_search(&sense)
            .map_err(|_| ModelError::UnknownSense(sense))
    }

    pub fn observe(&mut self, x: &FeatureVector, sense: u32) -> Result<(), ModelError> {
        let y = self.sense_index(sense)?;
        self.totals[y] += 1;
        let k = self.senses.len();
        for key in x.iter() {
            match self.counts.get_mut(key) {
                Some(c) => c[y] += 1,
                None => {
                    let mut c = vec![0; k];
                    c[y] = 1;
                    self.counts.insert(key.clone(), c);
                }
            }
        }
        self.log_absent = OnceLock::new();
        Ok(())
    }

    /// Adds the counts of a model fitted on another part of the stream.
    pub fn try_merge(&mut self, other: SenseModel) -> Result<(), ModelError> {
        if self.target_lemma != other.target_lemma || self.senses != other.senses || self.alpha != other.alpha {
            return Err(ModelError::Incompatible);
        }
        for (t, o) in self.totals.iter_mut().zip(&other.totals) {
            *t += o;
        }
        for (key, c) in other.counts {
            match self.counts.get_mut(&key) {
                Some(mine) => {
                    for (m, o) in mine.iter_mut().zip(c) {
                        *m += o;
                    }
                }
                None => {
                    self.counts.insert(key, c);
                }
            }
        }
        self.log_absent = OnceLock::new();
        Ok(())
    }

    /// Drops feature keys seen fewer than `min_count` times in total.
    pub fn prune(&mut self, min_count: u64) {
        if min_count <= 1 {
            return;
        }
        self.counts.retain(|_, c| c.iter().sum::<u64>() >= min_count);
        self.log_absent = OnceLock::new();
    }

    pub fn target_lemma(&self) -> &str {
        &self.target_lemma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn senses(&self) -> &[u32] {
        &self.senses
    }

    /// Training occurrences of `sense`.
    pub fn occurrences(&self, sense: u32) -> Option<u64> {
        self.sense_index(sense).ok().map(|y| self.totals[y])
    }

    pub fn total_occurrences(&self) -> u64 {
        self.totals.iter().sum()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }

    /// Occurrences of `sense` in which `key` was present.
    pub fn count(&self, key: &FeatureKey, sense: u32) -> u64 {
        match (self.counts.get(key), self.sense_index(sense)) {
            (Some(c), Ok(y)) => c[y],
            _ => 0,
        }
    }

    /// Smoothed `P(X_key = 1 | sense)`.
    pub fn p_present(&self, key: &FeatureKey, sense: u32) -> Option<f64> {
        let y = self.sense_index(sense).ok()?;
        let c = self.counts.get(key).map_or(0, |c| c[y]);
        Some(self.smoothed(c, self.totals[y]))
    }

    fn smoothed(&self, c: u64, n: u64) -> f64 {
        (c as f64 + self.alpha) / (n as f64 + 2.0 * self.alpha)
    }

    fn log_ratio(&self, c: u64, n: u64) -> f64 {
        // p1/p0 = (c + α) / (n - c + α)
        (c as f64 + self.alpha).ln() - ((n - c) as f64 + self.alpha).ln()
    }

    /// `Σ_{i ∈ V} log p0(i, y)` per sense.
    fn log_absent(&self) -> &[f64] {
        self.log_absent.get_or_init(|| {
            let mut sums = vec![0.0; self.senses.len()];
            // sorted for a summation order independent of hashing
            let mut keys: Vec<&FeatureKey> = self.counts.keys().collect();
            keys.sort_unstable();
            for key in keys {
                let c = &self.counts[key];
                for (y, sum) in sums.iter_mut().enumerate() {
                    *sum += (1.0 - self.smoothed(c[y], self.totals[y])).ln();
                }
            }
            sums
        })
    }

    fn log_b(&self, x: &FeatureVector) -> Vec<f64> {
        let mut b = vec![0.0; self.senses.len()];
        for key in x.iter() {
            if let Some(c) = self.counts.get(key) {
                for (y, v) in b.iter_mut().enumerate() {
                    *v += self.log_ratio(c[y], self.totals[y]);
                }
            }
        }
        b
    }

    pub fn log_priors(&self, priors: &Priors) -> Result<Vec<f64>, ModelError> {
        let k = self.senses.len();
        let probs: Vec<f64> = match priors {
            Priors::Uniform => vec![1.0 / k as f64; k],
            Priors::Empirical => {
                let total = self.total_occurrences();
                if total == 0 {
                    return Err(ModelError::InvalidPriors(
                        "no training occurrences for empirical priors".into(),
                    ));
                }
                self.totals.iter().map(|&n| n as f64 / total as f64).collect()
            }
            Priors::Explicit(map) => {
                let mut probs = Vec::with_capacity(k);
                for s in &self.senses {
                    let p = *map
                        .get(s)
                        .ok_or_else(|| ModelError::InvalidPriors(format!("no prior for sense {s}")))?;
                    if !(p.is_finite() && p >= 0.0) {
                        return Err(ModelError::InvalidPriors(format!("prior {p} for sense {s}")));
                    }
                    probs.push(p);
                }
                if let Some(extra) = map.keys().find(|s| !self.senses.contains(s)) {
                    return Err(ModelError::InvalidPriors(format!("prior for undeclared sense {extra}")));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > 1e-6 {
                    return Err(ModelError::InvalidPriors(format!("priors sum to {sum}")));
                }
                probs
            }
        };
        Ok(probs.into_iter().map(f64::ln).collect())
    }

    /// Prior-free rule: `log B(y, x)`. Keys outside the vocabulary are ignored.
    pub fn score_modified(&self, x: &FeatureVector) -> Scores {
        Scores::new(self.senses.clone(), self.log_b(x))
    }

    /// Standard posterior, unnormalised: `log A(y) + log B(y, x)`.
    pub fn score_standard(&self, x: &FeatureVector, priors: &Priors) -> Result<Scores, ModelError> {
        let parts = self.breakdown(x, priors)?;
        let total = parts.log_a.iter().zip(&parts.log_b).map(|(a, b)| a + b).collect();
        Ok(Scores::new(parts.senses, total))
    }

    pub fn breakdown(&self, x: &FeatureVector, priors: &Priors) -> Result<ScoreBreakdown, ModelError> {
        let log_a = self
            .log_priors(priors)?
            .into_iter()
            .zip(self.log_absent())
            .map(|(p, a)| p + a)
            .collect();
        Ok(ScoreBreakdown {
            senses: self.senses.clone(),
            log_a,
            log_b: self.log_b(x),
        })
    }

    /// Writes the versioned model document. Keys are sorted, so equal
    /// models produce identical bytes.
    pub fn save<W: Write>(&self, mut sink: W) -> Result<(), ModelError> {
        let senses = self
            .senses
            .iter()
            .enumerate()
            .map(|(y, &sense)| SenseRecord {
                sense,
                n: self.totals[y],
                counts: self
                    .counts
                    .iter()
                    .filter(|(_, c)| c[y] > 0)
                    .map(|(k, c)| (k.as_str().to_string(), c[y]))
                    .collect(),
            })
            .collect();
        let doc = ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            target_lemma: self.target_lemma.clone(),
            alpha: self.alpha,
            features: self.features.clone(),
            senses,
        };
        serde_json::to_writer_pretty(&mut sink, &doc).map_err(|e| ModelError::Io(e.into()))?;
        sink.write_all(b"\n")?;
        Ok(())
    }

    pub fn load<R: Read>(mut source: R) -> Result<SenseModel, ModelError> {
        let mut text = String::new();
        source
            .read_to_string(&mut text)
            .map_err(|e| ModelError::Corrupt(e.to_string()))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        if value.get("format").and_then(|f| f.as_str()) != Some(MODEL_FORMAT) {
            return Err(ModelError::Corrupt("not a sense model document".into()));
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_VERSION) => {}
            Some(v) => return Err(ModelError::VersionMismatch { found: v as u32 }),
            None => return Err(ModelError::Corrupt("missing version".into())),
        }
        let doc: ModelDocument = serde_json::from_value(value).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        let senses: Vec<u32> = doc.senses.iter().map(|s| s.sense).collect();
        let mut m =
            SenseModel::new(&doc.target_lemma, &senses, doc.alpha).map_err(|e| ModelError::Corrupt(e.to_string()))?;
        if m.senses.len() != doc.senses.len() {
            return Err(ModelError::Corrupt("repeated sense".into()));
        }
        m.features = doc.features;
        for rec in doc.senses {
            let y = m.sense_index(rec.sense)?;
            m.totals[y] = rec.n;
            for (key, c) in rec.counts {
                if c > rec.n {
                    return Err(ModelError::Corrupt(format!(
                        "count {c} of `{key}` exceeds {} occurrences",
                        rec.n
                    )));
                }
                let key: FeatureKey = key
                    .parse()
                    .map_err(|e: crate::features::FeatureConfigError| ModelError::Corrupt(e.to_string()))?;
                let k = m.senses.len();
                m.counts.entry(key).or_insert_with(|| vec![0; k])[y] = c;
            }
        }
        Ok(m)
    }
}

/// Merging models with different shapes is a programming error.
impl Merge for SenseModel {
    fn merge(&mut self, other: Self) {
        self.try_merge(other)
            .expect("merged models share word, senses and smoothing");
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    target_lemma: String,
    alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    features: Option<FeatureConfig>,
    senses: Vec<SenseRecord>,
}

#[derive(Serialize, Deserialize)]
struct SenseRecord {
    sense: u32,
    n: u64,
    counts: BTreeMap<String, u64>,
}
