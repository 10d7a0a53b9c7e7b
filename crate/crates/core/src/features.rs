//! Binary context features of an occurrence: sentence lemmas (`L`), lemmas
//! at fixed offsets (`Lp`), tags of the neighbours (`I`) and the
//! gender-stripped tag of the occurrence itself (`I0`).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Sentence;

/// Gender values of the NKJP tagset, including its older subgenders and
/// plural-only classes.
pub const NKJP_GENDERS: &[&str] = &["m1", "m2", "m3", "f", "n", "n1", "n2", "p1", "p2", "p3"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// A lemma anywhere in the sentence.
    Lemma,
    /// Lemma at a signed offset from the occurrence edges.
    LemmaAt(i8),
    /// Tag at a signed offset from the occurrence edges.
    TagAt(i8),
    /// Tag of the occurrence itself.
    OwnTag,
}

impl Channel {
    pub fn name(self) -> String {
        match self {
            Channel::Lemma => "L".into(),
            Channel::LemmaAt(k) => format!("Lp{k:+}"),
            Channel::TagAt(k) => format!("I{k:+}"),
            Channel::OwnTag => "I0".into(),
        }
    }
}

/// A feature as `channel=payload`. Ordering is the ordering of that string,
/// which keeps serialized vectors and model files stable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureKey(String);

impl FeatureKey {
    pub fn new(channel: Channel, payload: &str) -> FeatureKey {
        let name = channel.name();
        let mut s = String::with_capacity(name.len() + 1 + payload.len());
        s.push_str(&name);
        s.push('=');
        s.push_str(payload);
        FeatureKey(s)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn channel_name(&self) -> &str {
        self.0.split_once('=').map_or(self.0.as_str(), |(c, _)| c)
    }

    pub fn payload(&self) -> &str {
        self.0.split_once('=').map_or("", |(_, p)| p)
    }
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for FeatureKey {
    type Err = FeatureConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('=') {
            Some((c, _)) if !c.is_empty() => Ok(FeatureKey(s.to_string())),
            _ => Err(FeatureConfigError::BadKey(s.to_string())),
        }
    }
}

/// Present features; absent keys are zeros.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(BTreeSet<FeatureKey>);

impl FeatureVector {
    pub fn new() -> FeatureVector {
        FeatureVector::default()
    }

    pub fn insert(&mut self, key: FeatureKey) {
        self.0.insert(key);
    }

    pub fn contains(&self, key: &FeatureKey) -> bool {
        self.0.contains(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeatureKey> {
        self.0.iter()
    }

    pub fn union(&self, other: &FeatureVector) -> FeatureVector {
        FeatureVector(self.0.union(&other.0).cloned().collect())
    }

    /// Sorted `channel=payload` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|k| k.0.clone()).collect()
    }
}

impl FromIterator<FeatureKey> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = FeatureKey>>(iter: I) -> Self {
        FeatureVector(iter.into_iter().collect())
    }
}

impl IntoIterator for FeatureVector {
    type Item = FeatureKey;
    type IntoIter = std::collections::btree_set::IntoIter<FeatureKey>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureConfigError {
    #[error("unknown feature channel `{0}` (expected L, Lp, I or I0)")]
    UnknownChannel(String),
    #[error("at least one feature channel must be enabled")]
    Empty,
    #[error("malformed feature key `{0}`")]
    BadKey(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub lemmas: bool,
    pub positional_lemmas: bool,
    pub neighbour_tags: bool,
    pub own_tag: bool,
    /// Whether punctuation lemmas count as `L` features.
    pub punct_lemmas: bool,
    /// Tag attributes removed from `I0`.
    pub gender_values: Vec<String>,
}

impl FeatureConfig {
    /// Channel flags only; other settings take their defaults.
    pub fn channels(lemmas: bool, positional_lemmas: bool, neighbour_tags: bool, own_tag: bool) -> FeatureConfig {
        FeatureConfig {
            lemmas,
            positional_lemmas,
            neighbour_tags,
            own_tag,
            ..FeatureConfig::default()
        }
    }

    /// `L,Lp,I` style channel list.
    pub fn channel_list(&self) -> String {
        let mut parts = Vec::new();
        for (on, name) in [
            (self.lemmas, "L"),
            (self.positional_lemmas, "Lp"),
            (self.neighbour_tags, "I"),
            (self.own_tag, "I0"),
        ] {
            if on {
                parts.push(name);
            }
        }
        parts.join(",")
    }

    pub fn union(&self, other: &FeatureConfig) -> FeatureConfig {
        FeatureConfig {
            lemmas: self.lemmas || other.lemmas,
            positional_lemmas: self.positional_lemmas || other.positional_lemmas,
            neighbour_tags: self.neighbour_tags || other.neighbour_tags,
            own_tag: self.own_tag || other.own_tag,
            ..self.clone()
        }
    }
}

/// `L`, `Lp` and `I`: the best-performing channel set.
impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            lemmas: true,
            positional_lemmas: true,
            neighbour_tags: true,
            own_tag: false,
            punct_lemmas: true,
            gender_values: NKJP_GENDERS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl FromStr for FeatureConfig {
    type Err = FeatureConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut cfg = FeatureConfig::channels(false, false, false, false);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "L" => cfg.lemmas = true,
                "Lp" => cfg.positional_lemmas = true,
                "I" => cfg.neighbour_tags = true,
                "I0" => cfg.own_tag = true,
                other => return Err(FeatureConfigError::UnknownChannel(other.to_string())),
            }
        }
        if cfg.channel_list().is_empty() {
            return Err(FeatureConfigError::Empty);
        }
        Ok(cfg)
    }
}

/// Removes gender attributes (including dotted alternatives such as
/// `m1.m2`) from a colon-separated tag. The leading class is kept.
pub fn strip_gender(tag: &str, gender_values: &[String]) -> String {
    let is_gender = |attr: &str| attr.split('.').all(|v| gender_values.iter().any(|g| g == v));
    let mut out = String::with_capacity(tag.len());
    for (i, attr) in tag.split(':').enumerate() {
        if i > 0 && is_gender(attr) {
            continue;
        }
        if i > 0 {
            out.push(':');
        }
        out.push_str(attr);
    }
    out
}

const LEMMA_OFFSETS: [i8; 4] = [-2, -1, 1, 2];
const TAG_OFFSETS: [i8; 2] = [-1, 1];

fn at_offset(sentence: &Sentence, start: usize, end: usize, k: i8) -> Option<usize> {
    let pos = if k < 0 {
        start.checked_sub(k.unsigned_abs() as usize)?
    } else {
        end + k as usize
    };
    (pos < sentence.tokens.len()).then_some(pos)
}

/// Features of the inclusive token span `start..=end` of `sentence`.
///
/// Offsets count outwards from the span edges and stop at the sentence
/// boundary. Span lemmas never appear as `L` features. `I0` exists only
/// for single-token spans.
pub fn extract(sentence: &Sentence, start: usize, end: usize, cfg: &FeatureConfig) -> FeatureVector {
    let toks = &sentence.tokens;
    debug_assert!(start <= end && end < toks.len(), "span outside sentence");
    let mut v = FeatureVector::new();
    if cfg.lemmas {
        let own = &toks[start..=end];
        for (i, t) in toks.iter().enumerate() {
            if (start..=end).contains(&i) || (!cfg.punct_lemmas && t.is_punct) {
                continue;
            }
            if own.iter().any(|o| o.lemma == t.lemma) {
                continue;
            }
            v.insert(FeatureKey::new(Channel::Lemma, &t.lemma));
        }
    }
    if cfg.positional_lemmas {
        for k in LEMMA_OFFSETS {
            if let Some(p) = at_offset(sentence, start, end, k) {
                v.insert(FeatureKey::new(Channel::LemmaAt(k), &toks[p].lemma));
            }
        }
    }
    if cfg.neighbour_tags {
        for k in TAG_OFFSETS {
            if let Some(p) = at_offset(sentence, start, end, k) {
                v.insert(FeatureKey::new(Channel::TagAt(k), &toks[p].tag));
            }
        }
    }
    if cfg.own_tag && start == end {
        v.insert(FeatureKey::new(
            Channel::OwnTag,
            &strip_gender(&toks[start].tag, &cfg.gender_values),
        ));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::sentence;
    use proptest::prelude::*;

    fn genders() -> Vec<String> {
        FeatureConfig::default().gender_values
    }

    fn keys(v: &FeatureVector) -> Vec<String> {
        v.to_strings()
    }

    fn dog() -> Sentence {
        sentence(
            "duży/adj:sg:nom:m3:pos jęzor/subst:sg:nom:m3 pies/subst:sg:gen:m2 wystawać/fin:sg:ter:imperf ./interp",
        )
    }

    #[test]
    fn channel_names() {
        assert_eq!(Channel::LemmaAt(-2).name(), "Lp-2");
        assert_eq!(Channel::LemmaAt(1).name(), "Lp+1");
        assert_eq!(Channel::TagAt(-1).name(), "I-1");
        assert_eq!(FeatureKey::new(Channel::OwnTag, "subst:sg").as_str(), "I0=subst:sg");
        let k: FeatureKey = "Lp+1=a=b".parse().unwrap();
        assert_eq!((k.channel_name(), k.payload()), ("Lp+1", "a=b"));
        assert!("nochannel".parse::<FeatureKey>().is_err());
    }

    #[test]
    fn lemma_and_position_features() {
        let cfg = FeatureConfig::channels(true, true, false, false);
        let v = extract(&dog(), 1, 1, &cfg);
        assert_eq!(
            keys(&v),
            vec![
                "L=.",
                "L=duży",
                "L=pies",
                "L=wystawać",
                "Lp+1=pies",
                "Lp+2=wystawać",
                "Lp-1=duży"
            ]
        );
    }

    #[test]
    fn boundary_positions_degrade() {
        let cfg = FeatureConfig::channels(false, true, false, false);
        let v = extract(&dog(), 0, 0, &cfg);
        assert_eq!(keys(&v), vec!["Lp+1=jęzor", "Lp+2=pies"]);
        let tags = extract(&dog(), 4, 4, &FeatureConfig::channels(false, false, true, false));
        assert_eq!(keys(&tags), vec!["I-1=fin:sg:ter:imperf"]);
    }

    #[test]
    fn multiword_spans() {
        let i0 = FeatureConfig::channels(false, false, false, true);
        assert!(extract(&dog(), 0, 1, &i0).is_empty());
        let v = extract(&dog(), 0, 1, &FeatureConfig::channels(true, true, true, false));
        assert!(keys(&v).contains(&"Lp+1=pies".to_string()));
        assert!(keys(&v).contains(&"I+1=subst:sg:gen:m2".to_string()));
        assert!(!keys(&v).iter().any(|k| k == "L=duży" || k == "L=jęzor"));
        assert_eq!(keys(&extract(&dog(), 1, 1, &i0)), vec!["I0=subst:sg:nom"]);
    }

    #[test]
    fn span_lemma_is_never_an_l_feature() {
        let s = sentence("kot/subst:sg:nom:m2 widzieć/fin:sg:ter:imperf kot/subst:sg:acc:m2 ./interp");
        let v = extract(&s, 0, 0, &FeatureConfig::channels(true, false, false, false));
        assert_eq!(keys(&v), vec!["L=.", "L=widzieć"]);
        let mut no_punct = FeatureConfig::channels(true, false, false, false);
        no_punct.punct_lemmas = false;
        assert_eq!(keys(&extract(&s, 0, 0, &no_punct)), vec!["L=widzieć"]);
    }

    #[test]
    fn gender_stripping() {
        let g = genders();
        assert_eq!(strip_gender("subst:sg:nom:m1", &g), "subst:sg:nom");
        assert_eq!(strip_gender("adj:pl:gen:f:pos", &g), "adj:pl:gen:pos");
        assert_eq!(strip_gender("adv:pos", &g), "adv:pos");
        assert_eq!(strip_gender("ppas:pl:nom:m2.m3:perf:aff", &g), "ppas:pl:nom:perf:aff");
        assert_eq!(strip_gender("interp", &g), "interp");
    }

    #[test]
    fn config_parsing() {
        let cfg: FeatureConfig = "L, Lp,I".parse().unwrap();
        assert_eq!(cfg, FeatureConfig::default());
        assert_eq!(cfg.channel_list(), "L,Lp,I");
        assert_eq!("".parse::<FeatureConfig>(), Err(FeatureConfigError::Empty));
        assert_eq!(
            "L,X".parse::<FeatureConfig>(),
            Err(FeatureConfigError::UnknownChannel("X".into()))
        );
        assert!("I0".parse::<FeatureConfig>().unwrap().own_tag);
    }

    fn arb_sentence() -> impl Strategy<Value = Sentence> {
        let tok = (0usize..6, 0usize..5, 0usize..4).prop_map(|(l, c, g)| {
            let lemma = ["a", "b", "c", "d", ".", "e"][l];
            let class = if lemma == "." {
                "interp".to_string()
            } else {
                ["subst", "adj", "fin", "adv", "prep"][c].to_string()
            };
            let tag = if lemma == "." {
                class
            } else {
                format!("{class}:sg:{}", ["m1", "f", "n", "nom"][g])
            };
            crate::corpus::Token::new(lemma, lemma, tag)
        });
        proptest::collection::vec(tok, 1..12).prop_map(Sentence::new)
    }

    fn arb_cfg() -> impl Strategy<Value = FeatureConfig> {
        (any::<bool>(), any::<bool>(), any::<bool>(), any::<bool>())
            .prop_map(|(a, b, c, d)| FeatureConfig::channels(a, b, c, d))
    }

    proptest! {
        #[test]
        fn channels_are_independent(s in arb_sentence(), a in arb_cfg(), b in arb_cfg(), start in 0usize..12, width in 0usize..2) {
            let start = start % s.len();
            let end = (start + width).min(s.len() - 1);
            let joint = extract(&s, start, end, &a.union(&b));
            let split = extract(&s, start, end, &a).union(&extract(&s, start, end, &b));
            prop_assert_eq!(&joint, &split);
            prop_assert_eq!(&joint, &extract(&s, start, end, &a.union(&b)));
            let own: Vec<&str> = s.tokens[start..=end].iter().map(|t| t.lemma.as_str()).collect();
            for k in joint.iter().filter(|k| k.channel_name() == "L") {
                prop_assert!(!own.contains(&k.payload()));
            }
            if end > start {
                prop_assert!(!joint.iter().any(|k| k.channel_name() == "I0"));
            }
        }

        #[test]
        fn strip_gender_is_idempotent(s in arb_sentence()) {
            let g = genders();
            for t in &s.tokens {
                let once = strip_gender(&t.tag, &g);
                prop_assert_eq!(strip_gender(&once, &g), once.clone());
            }
        }
    }
}
