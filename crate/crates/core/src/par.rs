//! Data-parallel helpers with a sequential fallback.
//!
//! Everything here is deterministic: inputs are mapped element-wise and
//! reductions happen over fixed-size chunks combined in index order, so the
//! result does not depend on the thread count or on whether the `parallel`
//! feature is enabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic compensated reductions.
pub(crate) const SUM_CHUNK: usize = 4096;

/// Map `0..n` through `f`, in parallel when enabled. Output order is by index.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Map over items of a slice, preserving order.
pub(crate) fn map_slice<'a, S, T, F>(items: &'a [S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Default)]
pub(crate) struct CompSum {
    sum: f64,
    comp: f64,
}

impl CompSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of `f(i)` for `i in 0..n`.
///
/// Chunks of [`SUM_CHUNK`] are summed independently (in parallel when
/// enabled) and combined in chunk order, so rounding is reproducible.
pub(crate) fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(SUM_CHUNK).max(1);
    let partials = map_indexed(chunks, |c| {
        let lo = c * SUM_CHUNK;
        let hi = ((c + 1) * SUM_CHUNK).min(n);
        let mut acc = CompSum::default();
        for i in lo..hi {
            acc.add(f(i));
        }
        acc.value()
    });
    let mut total = CompSum::default();
    for x in partials {
        total.add(x);
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_matches_exact() {
        // 1 + 1e-16 repeated: naive f64 summation loses the small terms.
        let n = 1_000_000;
        let s = sum_indexed(n, |i| if i == 0 { 1.0 } else { 1e-16 });
        let expected = 1.0 + (n as f64 - 1.0) * 1e-16;
        // Naive left-to-right summation would return exactly 1.0 here.
        assert!((s - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn map_indexed_preserves_order() {
        let v = map_indexed(1000, |i| i * i);
        for (i, x) in v.iter().enumerate() {
            assert_eq!(*x, i * i);
        }
    }
}
