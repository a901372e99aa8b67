/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Fixed block size for parallel reductions. Results never depend on the worker count.
pub(crate) const CHUNK: u64 = 1 << 12;

/// Sums `f(i)` over `0..len` in fixed-size chunks, reducing chunk sums in index order.
pub(crate) fn chunked_sum<F>(len: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    use rayon::prelude::*;
    let chunks = len.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            (lo..hi).map(&f).collect::<CompensatedSum>().value()
        })
        .collect();
    partial.into_iter().collect::<CompensatedSum>().value()
}
