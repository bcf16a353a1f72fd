use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{self, tag, Rng};
use crate::types::{EmbeddingKind, EmbeddingTable, FeatureStore, LabelTable};

/// Gaussian-mixture dataset with label noise and matching embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub dim: usize,
    pub classes: usize,
    pub cluster_std: f64,
    /// Per-coordinate std of the cluster centers is `center_spread / sqrt(2)`.
    pub center_spread: f64,
    pub outlier_fraction: f64,
    pub noise_ratio: f64,
    /// Norm scale of the noise added to each image embedding's prototype.
    pub embed_noise: f64,
    /// Per-epoch feature jitter around the base features.
    pub drift_std: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 2000,
            dim: 16,
            classes: 10,
            cluster_std: 1.0,
            center_spread: 6.0,
            outlier_fraction: 0.02,
            noise_ratio: 0.2,
            embed_noise: 0.5,
            drift_std: 0.0,
        }
    }
}

impl SyntheticSpec {
    pub fn outlier_count(&self) -> usize {
        (self.outlier_fraction * self.n as f64).floor() as usize
    }

    pub fn flip_count(&self) -> usize {
        (self.noise_ratio * self.n as f64).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, why: &str| Err(Error::config(key, why.to_string()));
        let non_neg = |v: f64| v.is_finite() && v >= 0.0;
        if self.n < 2 {
            return fail("synth.n", "value must be in [2, inf)");
        }
        if self.dim < 1 {
            return fail("synth.d", "value must be in [1, inf)");
        }
        if self.classes < 2 {
            return fail("synth.classes", "value must be in [2, inf)");
        }
        if !non_neg(self.cluster_std) {
            return fail("synth.cluster_std", "value must be in [0, inf)");
        }
        if !non_neg(self.center_spread) {
            return fail("synth.center_spread", "value must be in [0, inf)");
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return fail("synth.outlier_fraction", "value must be in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.noise_ratio) {
            return fail("synth.noise_ratio", "value must be in [0, 1)");
        }
        if self.flip_count() > self.n - self.outlier_count() {
            return fail("synth.noise_ratio", "more flips than inliers; lower it or synth.outlier_fraction");
        }
        if !non_neg(self.embed_noise) {
            return fail("synth.embed_noise", "value must be in [0, inf)");
        }
        if !non_neg(self.drift_std) {
            return fail("synth.drift_std", "value must be in [0, inf)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub features: FeatureStore,
    /// Observed labels; the noise mask marks flipped samples.
    pub labels: LabelTable,
    pub true_labels: Vec<u32>,
    pub outliers: Vec<bool>,
    /// One unit-norm row per sample.
    pub image: EmbeddingTable,
    /// One unit-norm prototype per class.
    pub text: EmbeddingTable,
}

fn gaussian_vec(r: &mut Rng, dim: usize, std: f64) -> Vec<f64> {
    (0..dim).map(|_| std * Distribution::<f64>::sample(&StandardNormal, r)).collect::<Vec<f64>>()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Random unit prototypes, mutually orthogonal when `classes <= dim`.
fn prototypes(r: &mut Rng, classes: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(classes);
    while out.len() < classes {
        let mut v = gaussian_vec(r, dim, 1.0);
        if out.len() < dim {
            for p in &out {
                let dot: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(p).for_each(|(a, b)| *a -= dot * b);
            }
        }
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
            out.push(unit(&v));
        }
    }
    out
}

fn to_f32(rows: &[Vec<f64>]) -> Vec<f32> {
    rows.iter().flat_map(|r| r.iter().map(|&v| v as f32)).collect()
}

/// Generate the dataset. Outliers sit 2 to 3 cluster radii beyond their
/// class center; label flips are drawn among inliers only.
pub fn synth_dataset(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticData> {
    spec.validate()?;
    let (n, d, c) = (spec.n, spec.dim, spec.classes);
    let mut r = rng::stream(seed, &[tag::SYNTH]);

    let center_std = spec.center_spread / std::f64::consts::SQRT_2;
    let centers: Vec<Vec<f64>> = (0..c).map(|_| gaussian_vec(&mut r, d, center_std)).collect();
    let true_labels: Vec<u32> = (0..n).map(|i| (i % c) as u32).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut outliers = vec![false; n];
    for &i in &order[..spec.outlier_count()] {
        outliers[i] = true;
    }

    let radius = spec.cluster_std * (d as f64).sqrt();
    let mut features = Vec::with_capacity(n);
    for i in 0..n {
        let center = &centers[true_labels[i] as usize];
        let offset = if outliers[i] {
            let dir = unit(&gaussian_vec(&mut r, d, 1.0));
            let dist = radius * r.random_range(2.0..3.0);
            dir.into_iter().map(|x| x * dist).collect()
        } else {
            gaussian_vec(&mut r, d, spec.cluster_std)
        };
        features.push(center.iter().zip(&offset).map(|(a, b)| a + b).collect::<Vec<f64>>());
    }

    let mut inliers: Vec<usize> = (0..n).filter(|&i| !outliers[i]).collect();
    inliers.shuffle(&mut r);
    let mut labels = true_labels.clone();
    let mut noise_mask = vec![false; n];
    for &i in &inliers[..spec.flip_count()] {
        labels[i] = ((true_labels[i] as usize + r.random_range(1..c)) % c) as u32;
        noise_mask[i] = true;
    }

    let protos = prototypes(&mut r, c, d);
    let emb_noise = Normal::new(0.0, spec.embed_noise / (d as f64).sqrt()).map_err(|e| Error::Invalid(e.to_string()))?;
    let image: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let p = &protos[true_labels[i] as usize];
            unit(&p.iter().map(|&v| v + emb_noise.sample(&mut r)).collect::<Vec<f64>>())
        })
        .collect();

    Ok(SyntheticData {
        features: FeatureStore::new(d, to_f32(&features), 0)?,
        labels: LabelTable::new(labels, c as u32, Some(noise_mask))?,
        true_labels,
        outliers,
        image: EmbeddingTable::new(EmbeddingKind::Image, d, to_f32(&image))?,
        text: EmbeddingTable::new(EmbeddingKind::Text, d, to_f32(&protos))?,
    })
}

/// Base features plus fresh `N(0, drift_std^2)` jitter for `epoch`.
pub fn drifted_features(base: &FeatureStore, drift_std: f64, seed: u64, epoch: u64) -> Result<FeatureStore> {
    if drift_std == 0.0 {
        let mut f = base.clone();
        f.epoch = epoch;
        return Ok(f);
    }
    let mut r = rng::stream(seed, &[tag::DRIFT, epoch]);
    let data = base
        .as_slice()
        .iter()
        .map(|&v| (v as f64 + drift_std * Distribution::<f64>::sample(&StandardNormal, &mut r)) as f32)
        .collect();
    FeatureStore::new(base.dim(), data, epoch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_flip_count_and_different_labels() {
        let spec = SyntheticSpec { n: 1000, noise_ratio: 0.2, ..Default::default() };
        let data = synth_dataset(&spec, 1).unwrap();
        let mask = data.labels.noise_mask().unwrap();
        assert_eq!(mask.iter().filter(|&&m| m).count(), 200);
        for i in 0..spec.n {
            assert_eq!(mask[i], data.labels.label(i) != data.true_labels[i]);
            assert!(!(mask[i] && data.outliers[i]));
        }
        assert_eq!(data.outliers.iter().filter(|&&o| o).count(), 20);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SyntheticSpec { n: 200, ..Default::default() };
        assert_eq!(synth_dataset(&spec, 4).unwrap(), synth_dataset(&spec, 4).unwrap());
        assert_ne!(synth_dataset(&spec, 4).unwrap().features, synth_dataset(&spec, 5).unwrap().features);
    }

    #[test]
    fn prototypes_are_orthonormal() {
        let mut r = rng::stream(0, &[]);
        let p = prototypes(&mut r, 5, 8);
        for i in 0..5 {
            for j in 0..5 {
                let dot: f64 = p[i].iter().zip(&p[j]).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let spec = SyntheticSpec { classes: 1, ..Default::default() };
        assert!(spec.validate().unwrap_err().to_string().contains("synth.classes"));
        let spec = SyntheticSpec { outlier_fraction: 0.5, noise_ratio: 0.6, ..Default::default() };
        assert!(spec.validate().unwrap_err().to_string().contains("synth.noise_ratio"));
    }

    #[test]
    fn zero_drift_is_a_copy() {
        let spec = SyntheticSpec { n: 50, ..Default::default() };
        let data = synth_dataset(&spec, 0).unwrap();
        let f = drifted_features(&data.features, 0.0, 0, 3).unwrap();
        assert_eq!(f.as_slice(), data.features.as_slice());
        let g = drifted_features(&data.features, 0.1, 0, 3).unwrap();
        assert_ne!(g.as_slice(), data.features.as_slice());
    }
}
