//! Exhaustive k-NN, the reference the graph index is checked against.

use super::distance::l2;
use crate::error::{Error, Result};
use crate::types::{FeatureStore, SampleId};

#[derive(Debug, Clone, Copy)]
pub enum KnnTarget<'a> {
    Id(SampleId),
    Vector(&'a [f32]),
}

/// Exact k nearest neighbors by ℓ2, ties to the smaller id. `exclude_self`
/// only applies to [`KnnTarget::Id`].
pub fn brute_force_knn(
    features: &FeatureStore,
    target: KnnTarget<'_>,
    k: usize,
    exclude_self: bool,
) -> Result<Vec<(SampleId, f32)>> {
    let n = features.len();
    let (query, skip) = match target {
        KnnTarget::Id(id) => {
            if id.index() >= n {
                return Err(Error::UnknownId(id));
            }
            (features.row(id.index()), exclude_self.then_some(id))
        }
        KnnTarget::Vector(v) => {
            if v.len() != features.dim() {
                return Err(Error::DimensionMismatch { expected: features.dim(), got: v.len() });
            }
            (v, None)
        }
    };
    let available = n - usize::from(skip.is_some());
    if k == 0 || k > available {
        return Err(Error::out_of_range("k", format!("{k} not in [1, {available}]")));
    }
    let mut all: Vec<(SampleId, f32)> = features
        .rows()
        .enumerate()
        .map(|(i, row)| (SampleId::from(i), l2(query, row)))
        .filter(|(id, _)| Some(*id) != skip)
        .collect();
    let by_dist = |a: &(SampleId, f32), b: &(SampleId, f32)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, by_dist);
        all.truncate(k);
    }
    all.sort_unstable_by(by_dist);
    Ok(all)
}

/// |approx ∩ exact| / k.
pub fn recall_at_k(approx: &[SampleId], exact: &[SampleId]) -> Result<f64> {
    if approx.len() != exact.len() {
        return Err(Error::LengthMismatch(format!(
            "approximate list has {} ids, exact list {}",
            approx.len(),
            exact.len()
        )));
    }
    if exact.is_empty() {
        return Err(Error::out_of_range("k", "recall needs k >= 1"));
    }
    let hits = approx.iter().filter(|id| exact.contains(id)).count();
    Ok(hits as f64 / exact.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;

    fn line(points: &[f32]) -> FeatureStore {
        FeatureStore::new(1, points.to_vec(), 0).unwrap()
    }

    #[test]
    fn two_points() {
        let fs = FeatureStore::new(2, vec![0.0, 0.0, 3.0, 4.0], 0).unwrap();
        let hits = brute_force_knn(&fs, KnnTarget::Id(SampleId(0)), 1, true).unwrap();
        assert_eq!(hits, vec![(SampleId(1), 5.0)]);
    }

    #[test]
    fn duplicate_points_tie_to_smaller_id() {
        let fs = line(&[5.0, 1.0, 1.0, 1.0]);
        let hits = brute_force_knn(&fs, KnnTarget::Vector(&[1.0]), 2, false).unwrap();
        assert_eq!(hits, vec![(SampleId(1), 0.0), (SampleId(2), 0.0)]);
        let hits = brute_force_knn(&fs, KnnTarget::Id(SampleId(3)), 1, true).unwrap();
        assert_eq!(hits, vec![(SampleId(1), 0.0)]);
    }

    #[test]
    fn one_dimensional_fixture() {
        let fs = line(&[0.0, 1.0, 2.0, 3.0, 10.0]);
        let hits = brute_force_knn(&fs, KnnTarget::Id(SampleId(4)), 2, true).unwrap();
        assert_eq!(hits, vec![(SampleId(3), 7.0), (SampleId(2), 8.0)]);
    }

    #[test]
    fn k_out_of_range() {
        let fs = line(&[0.0, 1.0]);
        assert!(brute_force_knn(&fs, KnnTarget::Id(SampleId(0)), 2, true).is_err());
        assert!(brute_force_knn(&fs, KnnTarget::Id(SampleId(0)), 0, false).is_err());
        assert!(brute_force_knn(&fs, KnnTarget::Vector(&[0.0]), 3, false).is_err());
        assert_eq!(brute_force_knn(&fs, KnnTarget::Id(SampleId(0)), 2, false).unwrap().len(), 2);
    }

    #[test]
    fn agrees_with_full_sort() {
        let (n, d) = (500, 8);
        let mut r = rng::stream(3, &[0]);
        // Coarse grid values produce plenty of exact distance ties.
        let data: Vec<f32> = (0..n * d).map(|_| r.random_range(0..4) as f32).collect();
        let fs = FeatureStore::new(d, data, 0).unwrap();
        for q in [0usize, 17, 250, 499] {
            let qv = fs.row(q);
            let mut full: Vec<(SampleId, f32)> = (0..n)
                .filter(|&j| j != q)
                .map(|j| {
                    let s: f32 = qv.iter().zip(fs.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    (SampleId::from(j), s.sqrt())
                })
                .collect();
            full.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            full.truncate(25);
            let got = brute_force_knn(&fs, KnnTarget::Id(SampleId::from(q)), 25, true).unwrap();
            assert_eq!(got, full);
        }
    }

    #[test]
    fn recall_cases() {
        let ids = |v: &[u32]| v.iter().map(|&i| SampleId(i)).collect::<Vec<_>>();
        let a = ids(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert_eq!(recall_at_k(&a, &a).unwrap(), 1.0);
        assert_eq!(recall_at_k(&a, &ids(&[10, 11, 12, 13, 14, 15, 16, 17, 18, 19])).unwrap(), 0.0);
        let b = ids(&[0, 1, 2, 3, 4, 5, 6, 20, 21, 22]);
        assert_eq!(recall_at_k(&b, &a).unwrap(), 0.7);
        assert!(recall_at_k(&a[..3], &a).is_err());
    }
}
