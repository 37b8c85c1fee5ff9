//! Sharded Monte-Carlo accumulation.
//!
//! `n` draws are split into fixed-size shards; shard `i` owns the stream
//! `key.child(i)`. Shards run on the rayon pool and are merged in index order
//! with a pairwise tree, so results depend on `(key, n)` only and not on the
//! number of worker threads.

use rayon::prelude::*;

use crate::measures::SourceMeasure;
use crate::rng::StreamKey;

pub const SHARD_SIZE: usize = 1 << 14;

/// Streaming mean/variance (Welford), mergeable with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.count as f64 / n as f64);
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64 / n as f64);
        Moments { count: n, mean, m2 }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

fn pairwise<T: Clone>(items: &[T], merge: &(impl Fn(&T, &T) -> T + Sync)) -> T {
    match items.len() {
        0 => unreachable!("pairwise reduction of an empty slice"),
        1 => items[0].clone(),
        n => {
            let (a, b) = items.split_at(n / 2);
            merge(&pairwise(a, merge), &pairwise(b, merge))
        }
    }
}

/// Runs `per_shard(stream, count)` on every shard and reduces the shard
/// results pairwise in shard order.
pub fn sharded<T, F, R>(key: StreamKey, n: usize, per_shard: F, merge: R) -> Option<T>
where
    T: Clone + Send,
    F: Fn(&mut crate::rng::Stream, usize) -> T + Sync,
    R: Fn(&T, &T) -> T + Sync,
{
    if n == 0 {
        return None;
    }
    let shards = n.div_ceil(SHARD_SIZE);
    let parts: Vec<T> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = if s + 1 == shards { n - s * SHARD_SIZE } else { SHARD_SIZE };
            let mut rng = key.child(s as u64).stream();
            per_shard(&mut rng, count)
        })
        .collect();
    Some(pairwise(&parts, &merge))
}

/// Moments of `K` per-sample statistics of fresh draws from `src`.
pub fn sample_moments<const K: usize, F>(
    src: &SourceMeasure,
    key: StreamKey,
    n: usize,
    stat: F,
) -> [Moments; K]
where
    F: Fn(&[f64]) -> [f64; K] + Sync,
{
    let d = src.dim();
    sharded(
        key,
        n,
        |rng, count| {
            let mut acc = [Moments::default(); K];
            let mut x = vec![0.0; d];
            for _ in 0..count {
                src.sample_into(rng, &mut x);
                let v = stat(&x);
                for (a, vi) in acc.iter_mut().zip(v) {
                    a.push(vi);
                }
            }
            acc
        },
        |a, b| std::array::from_fn(|i| a[i].merge(&b[i])),
    )
    .unwrap_or([Moments::default(); K])
}

/// Per-index counts of a categorical statistic over fresh draws.
pub fn sample_counts<F>(src: &SourceMeasure, key: StreamKey, n: usize, bins: usize, cat: F) -> Vec<u64>
where
    F: Fn(&[f64]) -> usize + Sync,
{
    let d = src.dim();
    sharded(
        key,
        n,
        |rng, count| {
            let mut c = vec![0u64; bins];
            let mut x = vec![0.0; d];
            for _ in 0..count {
                src.sample_into(rng, &mut x);
                c[cat(&x)] += 1;
            }
            c
        },
        |a, b| a.iter().zip(b).map(|(x, y)| x + y).collect(),
    )
    .unwrap_or_else(|| vec![0; bins])
}
