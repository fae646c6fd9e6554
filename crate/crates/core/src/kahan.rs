//! Compensated summation and deterministic parallel reduction.
//!
//! Long sums in this crate accumulate through [`KahanSum`] (Neumaier's
//! variant) so the result is insensitive to term count, and parallel
//! reductions split the index range into fixed-size chunks that are folded
//! in index order, so the value is bit-identical for any thread count.

use num_complex::Complex64;
use num_traits::Float;
use rayon::prelude::*;

/// Neumaier-compensated accumulator, generic over the float type.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<T: Float> {
    sum: T,
    compensation: T,
}

impl<T: Float> KahanSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        let c = if self.sum.abs() >= value.abs() {
            (self.sum - t) + value
        } else {
            (value - t) + self.sum
        };
        self.compensation = self.compensation + c;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

/// Compensated complex accumulator built from two real accumulators.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: KahanSum<f64>,
    im: KahanSum<f64>,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Fixed chunk length for deterministic parallel reductions.
pub const CHUNK: u64 = 1 << 16;

/// Sums `term(n)` for `n` in `lo..=hi` (inclusive), chunking the range at
/// fixed boundaries. Chunk sums are computed in parallel but folded in
/// index order, so the result does not depend on the rayon schedule.
pub fn par_sum_complex<F>(lo: u64, hi: u64, term: F) -> Complex64
where
    F: Fn(u64) -> Complex64 + Sync,
{
    if lo > hi {
        return Complex64::new(0.0, 0.0);
    }
    let n_chunks = (hi - lo) / CHUNK + 1;
    let partials: Vec<Complex64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let a = lo + c * CHUNK;
            let b = (a + CHUNK - 1).min(hi);
            let mut acc = KahanComplex::new();
            for n in a..=b {
                acc.add(term(n));
            }
            acc.value()
        })
        .collect();
    let mut total = KahanComplex::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_ill_conditioned_sum() {
        let mut k = KahanSum::<f64>::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-18);
    }

    #[test]
    fn par_sum_matches_sequential_and_is_schedule_free() {
        let f = |n: u64| Complex64::new(1.0 / n as f64, (n as f64).sin() * 1e-3);
        let par = par_sum_complex(1, 300_000, f);
        let mut acc = KahanComplex::new();
        for n in 1..=300_000u64 {
            acc.add(f(n));
        }
        let chunked_seq = {
            // same chunking, single thread
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap();
            pool.install(|| par_sum_complex(1, 300_000, f))
        };
        assert_eq!(par, chunked_seq);
        assert!((par - acc.value()).norm() < 1e-10);
    }
}
