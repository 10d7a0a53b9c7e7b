//! Map-then-merge over independent work units.
//!
//! With the `parallel` feature the map runs on the rayon pool; without it,
//! or with [`Execution::Sequential`], it runs in a plain loop. Merges combine
//! adjacent results left to right in both cases, so order-sensitive
//! accumulators (vectors) come out identical either way.

use std::collections::BTreeMap;

/// Associative merge of partial results.
pub trait Merge {
    fn merge(&mut self, other: Self);
}

impl<T> Merge for Vec<T> {
    fn merge(&mut self, mut other: Self) {
        self.append(&mut other);
    }
}

impl<K: Ord> Merge for BTreeMap<K, u64> {
    fn merge(&mut self, other: Self) {
        for (k, v) in other {
            *self.entry(k).or_insert(0) += v;
        }
    }
}

impl<A: Merge, B: Merge> Merge for (A, B) {
    fn merge(&mut self, other: Self) {
        self.0.merge(other.0);
        self.1.merge(other.1);
    }
}

impl Merge for u64 {
    fn merge(&mut self, other: Self) {
        *self += other;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run work in parallel.
    pub fn available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Maps every item and merges the results in item order.
pub fn map_reduce<T, A, F>(exec: Execution, items: &[T], identity: impl Fn() -> A + Sync + Send, f: F) -> A
where
    T: Sync,
    A: Merge + Send,
    F: Fn(&T) -> A + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(&f).reduce(&identity, |mut a, b| {
                a.merge(b);
                a
            })
        }
        _ => items.iter().fold(identity(), |mut acc, item| {
            acc.merge(f(item));
            acc
        }),
    }
}

/// Folds items into per-worker accumulators, then merges those in item
/// order. Cheaper than [`map_reduce`] when one accumulator per item would
/// be expensive to build.
pub fn fold_reduce<T, A, F>(exec: Execution, items: &[T], identity: impl Fn() -> A + Sync + Send, fold: F) -> A
where
    T: Sync,
    A: Merge + Send,
    F: Fn(&mut A, &T) + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items
                .par_iter()
                .fold(&identity, |mut acc, item| {
                    fold(&mut acc, item);
                    acc
                })
                .reduce(&identity, |mut a, b| {
                    a.merge(b);
                    a
                })
        }
        _ => {
            let mut acc = identity();
            for item in items {
                fold(&mut acc, item);
            }
            acc
        }
    }
}

/// Maps every item, keeping results in item order.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers. Without the
/// `parallel` feature `f` simply runs on the calling thread.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not start a {threads}-thread pool ({e}); running on the global pool");
                f()
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree_on_order() {
        let items: Vec<u32> = (0..1000).collect();
        let seq = map_reduce(Execution::Sequential, &items, Vec::new, |&x| vec![x * 2]);
        let par = map_reduce(Execution::Parallel, &items, Vec::new, |&x| vec![x * 2]);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 1998);
        let folded = with_threads(4, || {
            fold_reduce(Execution::Parallel, &items, Vec::new, |acc: &mut Vec<u32>, &x| {
                acc.push(x)
            })
        });
        assert_eq!(folded, items);
        let ordered = with_threads(3, || map_ordered(Execution::Parallel, &items, |&x| x + 1));
        assert_eq!(ordered, (1..1001).collect::<Vec<_>>());
    }

    #[test]
    fn count_maps_merge() {
        let mut a: BTreeMap<&str, u64> = BTreeMap::from([("x", 1)]);
        Merge::merge(&mut a, BTreeMap::from([("x", 2), ("y", 5)]));
        assert_eq!(a, BTreeMap::from([("x", 3), ("y", 5)]));
    }
}
