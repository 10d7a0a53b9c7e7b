use std::collections::BTreeSet;

use proptest::prelude::*;
use relwsd::bayes::Priors;
use relwsd::features::{Channel, FeatureKey};
use relwsd::{FeatureVector, SenseModel};

fn key(j: usize) -> FeatureKey {
    FeatureKey::new(Channel::Lemma, &format!("f{j}"))
}

fn vector(bits: &[bool]) -> FeatureVector {
    let mut x = FeatureVector::new();
    for (j, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
        x.insert(key(j));
    }
    x
}

/// Training data: up to 6 feature slots, up to 3 senses.
fn training() -> impl Strategy<Value = (u32, usize, Vec<(Vec<bool>, u32)>)> {
    (1u32..=3, 1usize..=6).prop_flat_map(|(k, f)| {
        (
            Just(k),
            Just(f),
            prop::collection::vec((prop::collection::vec(any::<bool>(), f), 1..=k), 1..25),
        )
    })
}

proptest! {
    #[test]
    fn standard_score_is_the_product_over_the_vocabulary(
        (k, f, data) in training(),
        alpha in 0.05f64..3.0,
        query in prop::collection::vec(any::<bool>(), 6),
    ) {
        let senses: Vec<u32> = (1..=k).collect();
        let occ: Vec<(FeatureVector, u32)> = data.iter().map(|(b, y)| (vector(b), *y)).collect();
        let model = SenseModel::fit("w", &senses, alpha, occ).unwrap();
        let vocab: BTreeSet<usize> = data.iter().flat_map(|(b, _)| b.iter().enumerate().filter(|(_, &v)| v).map(|(j, _)| j)).collect();
        let x = vector(&query[..f]);
        let scores = model.score_standard(&x, &Priors::Uniform).unwrap();
        for (i, &y) in senses.iter().enumerate() {
            let n = data.iter().filter(|(_, s)| *s == y).count() as f64;
            let mut want = (1.0 / k as f64).ln();
            for &j in &vocab {
                let c = data.iter().filter(|(b, s)| *s == y && b[j]).count() as f64;
                let p1 = (c + alpha) / (n + 2.0 * alpha);
                want += if query[j] { p1.ln() } else { (1.0 - p1).ln() };
            }
            prop_assert!((scores.log_scores[i] - want).abs() < 1e-9, "sense {y}: {} vs {want}", scores.log_scores[i]);
        }
    }

    #[test]
    fn merging_halves_equals_fitting_the_whole((k, _f, data) in training(), split in 0usize..25) {
        let senses: Vec<u32> = (1..=k).collect();
        let occ: Vec<(FeatureVector, u32)> = data.iter().map(|(b, y)| (vector(b), *y)).collect();
        let split = split.min(occ.len());
        let whole = SenseModel::fit("w", &senses, 1.0, occ.clone()).unwrap();
        let mut left = SenseModel::fit("w", &senses, 1.0, occ[..split].to_vec()).unwrap();
        left.try_merge(SenseModel::fit("w", &senses, 1.0, occ[split..].to_vec()).unwrap()).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        whole.save(&mut a).unwrap();
        left.save(&mut b).unwrap();
        prop_assert_eq!(a, b);
    }
}
