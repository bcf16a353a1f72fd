use std::collections::HashSet;
use std::fmt;

use crate::augment::AppliedAug;
use crate::error::{Error, Result};

/// Stable index of a training sample, dense in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SampleId(pub u32);

impl SampleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for SampleId {
    fn from(i: usize) -> Self {
        SampleId(u32::try_from(i).expect("sample index exceeds u32"))
    }
}

fn check_matrix(dim: usize, data: &[f32], what: &'static str) -> Result<usize> {
    if dim == 0 {
        return Err(Error::out_of_range("dimension", "must be at least 1"));
    }
    if data.len() % dim != 0 {
        return Err(Error::DimensionMismatch { expected: dim, got: data.len() % dim });
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(data.len() / dim)
}

/// Per-sample feature vectors at one epoch; the space density is measured in.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    dim: usize,
    data: Vec<f32>,
    pub epoch: u64,
}

impl FeatureStore {
    pub fn new(dim: usize, data: Vec<f32>, epoch: u64) -> Result<Self> {
        let n = check_matrix(dim, &data, "features")?;
        if n == 0 {
            return Err(Error::out_of_range("sample count", "feature store needs n >= 1"));
        }
        Ok(Self { dim, data, epoch })
    }

    pub fn from_rows(rows: &[Vec<f32>], epoch: u64) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data, epoch)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Multiply every component by `c`.
    pub fn scaled(&self, c: f32) -> Result<Self> {
        Self::new(self.dim, self.data.iter().map(|v| v * c).collect(), self.epoch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    Image,
    Text,
}

impl EmbeddingKind {
    pub fn code(self) -> u8 {
        match self {
            EmbeddingKind::Image => 0,
            EmbeddingKind::Text => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(EmbeddingKind::Image),
            1 => Some(EmbeddingKind::Text),
            _ => None,
        }
    }
}

/// Image or text embeddings from a frozen encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    data: Vec<f32>,
    pub kind: EmbeddingKind,
}

impl EmbeddingTable {
    pub fn new(kind: EmbeddingKind, dim: usize, data: Vec<f32>) -> Result<Self> {
        check_matrix(dim, &data, "embeddings")?;
        Ok(Self { dim, data, kind })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Reuse the rows as features, e.g. per-epoch feature files stored as image embeddings.
    pub fn to_features(&self, epoch: u64) -> Result<FeatureStore> {
        FeatureStore::new(self.dim, self.data.clone(), epoch)
    }
}

/// Observed class labels, optionally with the ground-truth flip mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    labels: Vec<u32>,
    classes: u32,
    noise_mask: Option<Vec<bool>>,
}

impl LabelTable {
    pub fn new(labels: Vec<u32>, classes: u32, noise_mask: Option<Vec<bool>>) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::out_of_range("label", format!("{bad} not in [0, {classes})")));
        }
        if let Some(mask) = &noise_mask {
            if mask.len() != labels.len() {
                return Err(Error::LengthMismatch(format!(
                    "noise mask has {} entries for {} labels",
                    mask.len(),
                    labels.len()
                )));
            }
        }
        Ok(Self { labels, classes, noise_mask })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn classes(&self) -> u32 {
        self.classes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn noise_mask(&self) -> Option<&[bool]> {
        self.noise_mask.as_deref()
    }

    pub fn is_noisy(&self, id: SampleId) -> bool {
        self.noise_mask.as_ref().is_some_and(|m| m[id.index()])
    }
}

/// Raw density plus the three normalized distributions, one entry per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub rho_raw: Vec<f64>,
    pub p_rho: Vec<f64>,
    pub p_con: Vec<f64>,
    pub p_sel: Vec<f64>,
}

impl ScoreTable {
    pub fn len(&self) -> usize {
        self.p_sel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_sel.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.p_sel.len();
        if [self.rho_raw.len(), self.p_rho.len(), self.p_con.len()].iter().any(|&l| l != n) {
            return Err(Error::LengthMismatch("score table columns differ in length".into()));
        }
        for (i, ((&r, &c), &s)) in self.p_rho.iter().zip(&self.p_con).zip(&self.p_sel).enumerate() {
            if !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&c) {
                return Err(Error::out_of_range("normalized score", format!("sample {i}")));
            }
            if r * c != s {
                return Err(Error::Invalid(format!("p_sel != p_rho * p_con at sample {i}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEntry {
    pub id: SampleId,
    pub p_sel: f64,
    pub aug: Option<AppliedAug>,
}

/// The samples chosen for one epoch, in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionManifest {
    pub epoch: u64,
    pub budget: usize,
    pub seed: u64,
    pub selected: Vec<SelectionEntry>,
}

impl SelectionManifest {
    pub fn ids(&self) -> impl Iterator<Item = SampleId> + '_ {
        self.selected.iter().map(|e| e.id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.selected.len() != self.budget {
            return Err(Error::LengthMismatch(format!(
                "manifest lists {} samples for budget {}",
                self.selected.len(),
                self.budget
            )));
        }
        let mut seen = HashSet::with_capacity(self.selected.len());
        for e in &self.selected {
            if !seen.insert(e.id) {
                return Err(Error::DuplicateId(e.id));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_store_rejects_bad_input() {
        assert!(FeatureStore::new(2, vec![], 0).is_err());
        assert!(FeatureStore::new(2, vec![1.0, 2.0, 3.0], 0).is_err());
        assert!(matches!(
            FeatureStore::new(1, vec![f32::NAN], 0),
            Err(Error::NonFinite(_))
        ));
        let fs = FeatureStore::new(2, vec![1.0, 2.0, 3.0, 4.0], 5).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn label_table_checks_range_and_mask() {
        assert!(LabelTable::new(vec![0, 3], 3, None).is_err());
        assert!(LabelTable::new(vec![0, 1], 3, Some(vec![true])).is_err());
        let t = LabelTable::new(vec![0, 2], 3, Some(vec![false, true])).unwrap();
        assert!(t.is_noisy(SampleId(1)));
        assert!(!t.is_noisy(SampleId(0)));
    }

    #[test]
    fn manifest_validation() {
        let entry = |id| SelectionEntry { id: SampleId(id), p_sel: 0.5, aug: None };
        let mut m = SelectionManifest { epoch: 0, budget: 2, seed: 1, selected: vec![entry(0), entry(1)] };
        m.validate().unwrap();
        m.selected[1].id = SampleId(0);
        assert!(matches!(m.validate(), Err(Error::DuplicateId(SampleId(0)))));
    }
}
