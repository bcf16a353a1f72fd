//! Density, consistency and joint selection scores, plus budgeted selection.
//!
//! Density of a sample is the mean ℓ2 distance to its `k` nearest neighbors
//! (the sample itself excluded), so larger values mean sparser regions.
//! Consistency is the cosine between a sample's image embedding and the
//! text embedding of its label. Both are Min-Max scaled to `[0, 1]` and
//! multiplied into the joint score that drives selection.
//!
//! Consistency depends only on frozen embeddings and is computed once;
//! density is recomputed every epoch from the current features.

use rand::Rng as _;
use rayon::prelude::*;

use crate::ann::HnswIndex;
use crate::error::{Error, Result};
use crate::rng;
use crate::types::{EmbeddingTable, FeatureStore, LabelTable, SampleId, ScoreTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMode {
    /// The k largest scores, ties to the smaller id.
    #[default]
    TopK,
    /// k distinct ids drawn without replacement, probability proportional to score.
    WeightedSample,
}

impl SelectionMode {
    pub fn name(self) -> &'static str {
        match self {
            SelectionMode::TopK => "top_k",
            SelectionMode::WeightedSample => "weighted_sample",
        }
    }
}

/// Tie-breaking is always smaller-id-first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SelectionPolicy {
    pub mode: SelectionMode,
}

/// Which distributions feed the selection score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreSource {
    #[default]
    Joint,
    /// Consistency is replaced by a constant 1, leaving density alone.
    DensityOnly,
}

impl ScoreSource {
    pub fn name(self) -> &'static str {
        match self {
            ScoreSource::Joint => "joint",
            ScoreSource::DensityOnly => "density",
        }
    }
}

/// Mean distance from every sample to its `knn_k` nearest other samples.
pub fn density_scores(index: &HnswIndex, features: &FeatureStore, knn_k: usize, ef: usize) -> Result<Vec<f64>> {
    density_scores_filtered(index, features, knn_k, ef, |_| true)
}

/// [`density_scores`] with an extra admission filter on neighbor ids. Ids
/// `0..n` must be present in the index and hold exactly the feature rows.
pub fn density_scores_filtered<F>(
    index: &HnswIndex,
    features: &FeatureStore,
    knn_k: usize,
    ef: usize,
    admit: F,
) -> Result<Vec<f64>>
where
    F: Fn(SampleId) -> bool + Sync,
{
    let n = features.len();
    if knn_k == 0 || knn_k >= n {
        return Err(Error::out_of_range("knn_k", format!("{knn_k} not in [1, {})", n)));
    }
    if index.dim() != features.dim() {
        return Err(Error::DimensionMismatch { expected: features.dim(), got: index.dim() });
    }
    for (i, row) in features.rows().enumerate() {
        match index.vector(SampleId::from(i)) {
            None => {
                return Err(Error::LengthMismatch(format!(
                    "index holds {} points but sample {i} of {n} is missing",
                    index.len()
                )))
            }
            Some(v) if v != row => {
                return Err(Error::Invalid(format!("index is out of sync with features at sample {i}")))
            }
            Some(_) => {}
        }
    }
    let ef = ef.max(knn_k + 1);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let me = SampleId::from(i);
            let (hits, _) = index.query_filtered(features.row(i), knn_k, ef, |id| id != me && admit(id))?;
            if hits.len() < knn_k {
                return Err(Error::Invalid(format!("sample {i}: only {} neighbors found", hits.len())));
            }
            Ok(hits.iter().map(|&(_, d)| d as f64).sum::<f64>() / knn_k as f64)
        })
        .collect()
}

/// Affine map of the scores onto `[0, 1]`. A constant vector maps to all ones
/// so it cannot zero out the other factor of the joint score.
pub fn min_max_normalize(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::out_of_range("score count", "need at least one score"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("scores"));
    }
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Ok(vec![1.0; scores.len()]);
    }
    let span = hi - lo;
    Ok(scores.iter().map(|&s| ((s - lo) / span).clamp(0.0, 1.0)).collect())
}

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        aa += x * x;
        bb += y * y;
    }
    (dot / (aa * bb).sqrt()).clamp(-1.0, 1.0)
}

/// Cosine between each image embedding and its label's text embedding.
pub fn consistency_scores(image: &EmbeddingTable, text: &EmbeddingTable, labels: &LabelTable) -> Result<Vec<f64>> {
    if image.len() != labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} image embeddings for {} labels",
            image.len(),
            labels.len()
        )));
    }
    if text.len() != labels.classes() as usize {
        return Err(Error::LengthMismatch(format!(
            "{} text embeddings for {} classes",
            text.len(),
            labels.classes()
        )));
    }
    if image.dim() != text.dim() {
        return Err(Error::DimensionMismatch { expected: image.dim(), got: text.dim() });
    }
    if let Some(row) = text.rows().position(|r| r.iter().all(|&v| v == 0.0)) {
        return Err(Error::ZeroNorm(row));
    }
    image
        .rows()
        .enumerate()
        .map(|(i, row)| {
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroNorm(i));
            }
            let label = labels.label(i);
            Ok(cosine(row, text.row(label as usize)))
        })
        .collect()
}

/// Elementwise product of the two normalized distributions.
pub fn joint_scores(p_rho: &[f64], p_con: &[f64]) -> Result<Vec<f64>> {
    if p_rho.len() != p_con.len() {
        return Err(Error::LengthMismatch(format!(
            "{} density scores vs {} consistency scores",
            p_rho.len(),
            p_con.len()
        )));
    }
    let in_unit = |v: &f64| (0.0..=1.0).contains(v);
    if !p_rho.iter().all(in_unit) || !p_con.iter().all(in_unit) {
        return Err(Error::out_of_range("normalized score", "inputs must lie in [0, 1]"));
    }
    Ok(p_rho.iter().zip(p_con).map(|(r, c)| r * c).collect())
}

/// Build the full table from raw densities and the cached normalized
/// consistency (`None` for density-only scoring).
pub fn score_table(rho_raw: Vec<f64>, p_con: Option<&[f64]>) -> Result<ScoreTable> {
    let p_rho = min_max_normalize(&rho_raw)?;
    let p_con = match p_con {
        Some(c) => c.to_vec(),
        None => vec![1.0; rho_raw.len()],
    };
    let p_sel = joint_scores(&p_rho, &p_con)?;
    Ok(ScoreTable { rho_raw, p_rho, p_con, p_sel })
}

fn by_score_desc(scores: &[f64]) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    move |&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// Pick `k` of the `n` samples according to `policy`.
///
/// Top-k output is sorted by descending score then ascending id. Weighted
/// sampling returns ids in draw order; it uses exponential keys
/// `ln(u) / w`, which is equivalent to sequential draws without
/// replacement. Zero-weight samples are only drawn once every positive
/// weight is taken, uniformly among themselves.
pub fn select(p_sel: &[f64], k: usize, policy: SelectionPolicy, seed: u64) -> Result<Vec<SampleId>> {
    let n = p_sel.len();
    if k == 0 || k > n {
        return Err(Error::out_of_range("budget", format!("{k} not in [1, {n}]")));
    }
    if p_sel.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::out_of_range("p_sel", "scores must be finite and non-negative"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    match policy.mode {
        SelectionMode::TopK => {
            let cmp = by_score_desc(p_sel);
            if k < n {
                order.select_nth_unstable_by(k - 1, &cmp);
                order.truncate(k);
            }
            order.sort_unstable_by(&cmp);
        }
        SelectionMode::WeightedSample => {
            let mut r = rng::stream(seed, &[rng::tag::SELECT]);
            let keys: Vec<(f64, f64)> = p_sel
                .iter()
                .map(|&w| {
                    let u: f64 = 1.0 - r.random::<f64>();
                    if w > 0.0 {
                        (u.ln() / w, 0.0)
                    } else {
                        (f64::NEG_INFINITY, u)
                    }
                })
                .collect();
            order.sort_unstable_by(|&a, &b| {
                keys[b].0.total_cmp(&keys[a].0).then(keys[b].1.total_cmp(&keys[a].1)).then(a.cmp(&b))
            });
            order.truncate(k);
        }
    }
    Ok(order.into_iter().map(SampleId::from).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ann::HnswParams;
    use crate::types::EmbeddingKind;

    fn index_for(fs: &FeatureStore) -> HnswIndex {
        HnswIndex::build(fs.dim(), fs.rows(), HnswParams::default(), 1).unwrap()
    }

    #[test]
    fn identical_points_have_zero_density() {
        let fs = FeatureStore::new(2, vec![1.5; 20], 0).unwrap();
        let rho = density_scores(&index_for(&fs), &fs, 3, 16).unwrap();
        assert!(rho.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn two_points_density_is_their_distance() {
        let fs = FeatureStore::new(2, vec![0.0, 0.0, 3.0, 4.0], 0).unwrap();
        let rho = density_scores(&index_for(&fs), &fs, 1, 8).unwrap();
        assert_eq!(rho, vec![5.0, 5.0]);
    }

    #[test]
    fn one_dimensional_fixture() {
        let fs = FeatureStore::new(1, vec![0.0, 1.0, 2.0, 3.0, 10.0], 0).unwrap();
        let rho = density_scores(&index_for(&fs), &fs, 2, 8).unwrap();
        assert_eq!(rho[4], 7.5);
        assert_eq!(rho[1], 1.0);
    }

    #[test]
    fn density_errors() {
        let fs = FeatureStore::new(1, vec![0.0, 1.0, 2.0], 0).unwrap();
        let idx = index_for(&fs);
        assert!(density_scores(&idx, &fs, 3, 8).is_err());
        assert!(density_scores(&idx, &fs, 0, 8).is_err());
        let bigger = FeatureStore::new(1, vec![0.0, 1.0, 2.0, 3.0], 0).unwrap();
        assert!(matches!(density_scores(&idx, &bigger, 1, 8), Err(Error::LengthMismatch(_))));
        let moved = FeatureStore::new(1, vec![0.0, 1.0, 2.5], 0).unwrap();
        assert!(matches!(density_scores(&idx, &moved, 1, 8), Err(Error::Invalid(_))));
    }

    #[test]
    fn min_max_cases() {
        assert_eq!(min_max_normalize(&[0.0, 5.0, 10.0]).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(min_max_normalize(&[3.0, 3.0, 3.0]).unwrap(), vec![1.0; 3]);
        assert_eq!(min_max_normalize(&[-2.0]).unwrap(), vec![1.0]);
        assert!(min_max_normalize(&[1.0, f64::NAN]).is_err());
        assert!(min_max_normalize(&[]).is_err());
        let out = min_max_normalize(&[-0.3, 0.9, 0.1]).unwrap();
        assert_eq!((out[0], out[1]), (0.0, 1.0));
    }

    fn emb(kind: EmbeddingKind, d: usize, rows: &[&[f32]]) -> EmbeddingTable {
        EmbeddingTable::new(kind, d, rows.concat()).unwrap()
    }

    #[test]
    fn consistency_cases() {
        let s = std::f32::consts::FRAC_1_SQRT_2;
        let text = emb(EmbeddingKind::Text, 2, &[&[1.0, 0.0], &[s, s]]);
        let image = emb(EmbeddingKind::Image, 2, &[&[1.0, 0.0], &[0.0, 3.0], &[1.0, 0.0]]);
        let labels = LabelTable::new(vec![0, 0, 1], 2, None).unwrap();
        let con = consistency_scores(&image, &text, &labels).unwrap();
        assert_eq!(con[0], 1.0);
        assert_eq!(con[1], 0.0);
        assert!((con[2] - 0.707_106_78).abs() < 1e-8, "{}", con[2]);
    }

    #[test]
    fn consistency_errors() {
        let text = emb(EmbeddingKind::Text, 2, &[&[1.0, 0.0], &[0.0, 1.0]]);
        let image = emb(EmbeddingKind::Image, 2, &[&[0.0, 0.0]]);
        let labels = LabelTable::new(vec![1], 2, None).unwrap();
        assert!(matches!(consistency_scores(&image, &text, &labels), Err(Error::ZeroNorm(0))));
        let image = emb(EmbeddingKind::Image, 2, &[&[1.0, 0.0], &[1.0, 1.0]]);
        assert!(matches!(consistency_scores(&image, &text, &labels), Err(Error::LengthMismatch(_))));
        let labels3 = LabelTable::new(vec![0, 2], 3, None).unwrap();
        assert!(matches!(consistency_scores(&image, &text, &labels3), Err(Error::LengthMismatch(_))));
    }

    #[test]
    fn joint_cases() {
        let p_rho = [0.2, 0.0, 0.8, 1.0];
        assert_eq!(joint_scores(&p_rho, &[1.0; 4]).unwrap(), p_rho.to_vec());
        assert_eq!(joint_scores(&[0.0], &[0.7]).unwrap(), vec![0.0]);
        assert_eq!(joint_scores(&[0.8], &[0.5]).unwrap(), vec![0.4]);
        assert!(joint_scores(&[0.5], &[0.5, 0.5]).is_err());
        assert!(joint_scores(&[1.5], &[0.5]).is_err());
    }

    #[test]
    fn top_k_cases() {
        let top = SelectionPolicy { mode: SelectionMode::TopK };
        let ids = |v: Vec<SampleId>| v.into_iter().map(|i| i.0).collect::<Vec<_>>();
        assert_eq!(ids(select(&[0.9, 0.1, 0.5, 0.5], 2, top, 0).unwrap()), vec![0, 2]);
        assert_eq!(ids(select(&[0.9, 0.1, 0.5, 0.5], 4, top, 0).unwrap()), vec![0, 2, 3, 1]);
        assert!(select(&[0.1], 0, top, 0).is_err());
        assert!(select(&[0.1], 2, top, 0).is_err());
    }

    #[test]
    fn weighted_sample_basics() {
        let w = SelectionPolicy { mode: SelectionMode::WeightedSample };
        let p = [0.3, 0.0, 0.9, 0.6, 0.0];
        let a = select(&p, 3, w, 17).unwrap();
        assert_eq!(a, select(&p, 3, w, 17).unwrap());
        let mut sorted: Vec<u32> = a.iter().map(|i| i.0).collect();
        sorted.sort();
        assert_eq!(sorted, vec![0, 2, 3]);
        // Past the positive weights the zero-weight ids fill in.
        let all = select(&p, 5, w, 3).unwrap();
        assert!(all[3..].iter().all(|i| p[i.index()] == 0.0));
        // All-zero scores fall back to a uniform draw.
        let zero = select(&[0.0; 6], 2, w, 5).unwrap();
        assert_eq!(zero.len(), 2);
        assert_ne!(zero[0], zero[1]);
    }

    #[test]
    fn dominant_score_wins_under_both_policies() {
        let p = [1e-9, 1.0, 1e-9, 1e-9];
        for mode in [SelectionMode::TopK, SelectionMode::WeightedSample] {
            let hits = (0..200)
                .filter(|&s| select(&p, 1, SelectionPolicy { mode }, s).unwrap()[0] == SampleId(1))
                .count();
            assert_eq!(hits, 200, "{mode:?}");
        }
    }

    #[test]
    fn score_table_density_only() {
        let t = score_table(vec![1.0, 3.0, 2.0], None).unwrap();
        assert_eq!(t.p_sel, vec![0.0, 1.0, 0.5]);
        assert_eq!(t.p_con, vec![1.0; 3]);
        t.validate().unwrap();
    }
}
