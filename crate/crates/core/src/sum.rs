//! Reductions whose result does not depend on the rayon worker count.

use rayon::prelude::*;

/// Items per leaf block; fixed so that the reduction tree is independent of scheduling.
const BLOCK: usize = 4096;

/// Sum in fixed blocks, then combine the block partials serially.
pub(crate) fn det_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let partials: Vec<f64> = values.par_chunks(BLOCK).map(|c| c.iter().sum()).collect();
    partials.iter().sum()
}

pub(crate) fn det_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= BLOCK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let partials: Vec<f64> = a
        .par_chunks(BLOCK)
        .zip(b.par_chunks(BLOCK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    partials.iter().sum()
}

/// Sum of `f(i)` for `i in 0..n`, with the same fixed blocking as [`det_sum`].
pub(crate) fn det_sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            (lo..hi).map(&f).sum()
        })
        .collect();
    partials.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_of_thread_count() {
        let v: Vec<f64> = (0..100_000).map(|i| ((i as f64) * 0.37).sin() / (1.0 + i as f64)).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| det_sum(&v));
        let b = four.install(|| det_sum(&v));
        assert_eq!(a.to_bits(), b.to_bits());
        let c = one.install(|| det_sum_by(v.len(), |i| v[i]));
        assert_eq!(a.to_bits(), c.to_bits());
    }
}
