use std::fmt::Write as _;
use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};

use crate::ann::{HnswIndex, HnswParams};
use crate::error::{Error, Result};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub mean_distance_evaluations: f64,
    pub ms_per_query: f64,
}

pub fn gaussian_points(n: usize, dim: usize, seed: u64, key: u64) -> Vec<f32> {
    let mut r = rng::stream(seed, &[tag::BENCH, key]);
    (0..n * dim).map(|_| StandardNormal.sample(&mut r)).collect()
}

/// Build an index of `n` standard Gaussian points for every size and time
/// `queries` fresh queries against it. The query set is shared by all sizes.
pub fn bench_index(
    sizes: &[usize],
    dim: usize,
    queries: usize,
    k: usize,
    params: &HnswParams,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::out_of_range("sizes", "need a strictly ascending, non-empty list"));
    }
    if sizes[0] < k {
        return Err(Error::out_of_range("sizes", format!("smallest size {} is below k = {k}", sizes[0])));
    }
    let qs = gaussian_points(queries, dim, seed, u64::MAX);
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let data = gaussian_points(n, dim, seed, n as u64);
        let index = HnswIndex::build(dim, data.chunks_exact(dim), params.clone(), seed)?;
        let ef = params.ef_search.max(k);
        let start = Instant::now();
        let mut evals = 0u64;
        for q in qs.chunks_exact(dim) {
            evals += index.query(q, k, ef)?.1.distance_evaluations;
        }
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        rows.push(BenchRow {
            n,
            mean_distance_evaluations: evals as f64 / queries as f64,
            ms_per_query: elapsed / queries as f64,
        });
    }
    Ok(rows)
}

/// CSV of the rows; the wall-clock column is omitted unless `timings`.
pub fn format_bench(rows: &[BenchRow], timings: bool) -> String {
    let mut out = String::from("n,mean_distance_evaluations,ms_per_query\n");
    for r in rows {
        let ms = if timings { format!("{:.4}", r.ms_per_query) } else { "-".into() };
        let _ = writeln!(out, "{},{:.3},{ms}", r.n, r.mean_distance_evaluations);
    }
    out
}
