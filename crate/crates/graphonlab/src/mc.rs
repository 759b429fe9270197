//! Seeded random streams, deterministic block-parallel Monte Carlo and
//! running statistics.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub type Rng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Mixes labels into a stream id.
pub fn stream_id(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h ^= h >> 31;
    }
    h
}

/// Runs `f(i)` for `i in 0..n` on `workers` threads and returns the results
/// in index order, so the outcome does not depend on scheduling.
pub fn par_map<T: Send>(n: usize, workers: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.min(n) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let v = f(i);
                out.lock().expect("poisoned")[i] = Some(v);
            });
        }
    });
    out.into_inner()
        .expect("poisoned")
        .into_iter()
        .map(|v| v.expect("every index computed"))
        .collect()
}

/// Splits `total` samples into fixed blocks, each with its own stream, so the
/// estimate is identical for every worker count.
pub fn block_stats(
    total: u64,
    seed: u64,
    label: u64,
    workers: usize,
    f: impl Fn(&mut Rng) -> f64 + Sync,
) -> Stat {
    const BLOCK: u64 = 1 << 14;
    let blocks = total.div_ceil(BLOCK) as usize;
    let parts = par_map(blocks, workers, |b| {
        let mut rng = stream(seed, stream_id(&[label, b as u64]));
        let n = BLOCK.min(total - b as u64 * BLOCK);
        let mut st = Stat::default();
        for _ in 0..n {
            st.push(f(&mut rng));
        }
        st
    });
    parts.into_iter().fold(Stat::default(), |a, b| a.merge(&b))
}

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Stat {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Stat {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, o: &Stat) -> Stat {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Stat {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Two-sided normal critical value keeping the chance that any of `trials`
/// independent deviations exceeds it below `alpha`, never below 3.
pub fn critical_z(alpha: f64, trials: u64) -> f64 {
    let per = 1.0 - (1.0 - alpha).powf(1.0 / trials.max(1) as f64);
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - per / 2.0);
    z.max(3.0)
}

/// Compensated (Neumaier) summation.
pub fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn stat_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Stat::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Stat::default();
        let mut b = Stat::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.variance() - all.variance()).abs() < 1e-9);
    }

    #[test]
    fn block_stats_independent_of_workers() {
        let f = |r: &mut Rng| r.random::<f64>();
        let a = block_stats(100_000, 7, 3, 1, f);
        let b = block_stats(100_000, 7, 3, 4, f);
        assert_eq!(a, b);
        assert!((a.mean - 0.5).abs() < 4.0 * a.std_error());
    }

    #[test]
    fn critical_values() {
        assert_eq!(critical_z(0.5, 1), 3.0);
        let z = critical_z(1e-6, 200);
        assert!(z > 5.0 && z < 6.0, "{z}");
    }

    #[test]
    fn neumaier_sum() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(neumaier(v), 2.0);
    }
}
