use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;

use super::apply::apply;
use super::image::Image;
use super::ops::{AppliedAug, AugOp};
use crate::error::{Error, Result};
use crate::rng::{self, tag, Rng};
use crate::types::{SampleId, SelectionManifest};

/// Draw one op uniformly, then a magnitude uniformly from its range and a
/// uniform sign when the op is signed.
pub fn draw_aug(rng: &mut Rng) -> AppliedAug {
    let op = AugOp::ALL[rng.random_range(0..AugOp::ALL.len())];
    let magnitude = op.range().map(|(lo, hi)| {
        if op.integer_magnitude() {
            rng.random_range(lo as i64..=hi as i64) as f64
        } else {
            rng.random_range(lo..=hi)
        }
    });
    let sign = if op.signed() && rng.random::<bool>() { -1 } else { 1 };
    AppliedAug { op, magnitude, sign }
}

pub fn trivial_augment(img: &Image, rng: &mut Rng) -> (Image, AppliedAug) {
    let aug = draw_aug(rng);
    (apply(img, &aug), aug)
}

/// The random stream used for sample `id` in `epoch`.
pub fn sample_stream(seed: u64, epoch: u64, id: SampleId) -> Rng {
    rng::stream(seed, &[tag::AUGMENT, epoch, id.0 as u64])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedImage {
    pub id: SampleId,
    pub image: Image,
    pub aug: AppliedAug,
}

/// Augment every selected image once. Each id draws from its own stream, so
/// the output does not depend on processing order.
pub fn augment_selected(
    images: &HashMap<SampleId, Image>,
    selected: &[SampleId],
    seed: u64,
    epoch: u64,
) -> Result<Vec<AugmentedImage>> {
    if let Some(&missing) = selected.iter().find(|id| !images.contains_key(id)) {
        return Err(Error::UnknownId(missing));
    }
    Ok(selected
        .par_iter()
        .map(|&id| {
            let (image, aug) = trivial_augment(&images[&id], &mut sample_stream(seed, epoch, id));
            AugmentedImage { id, image, aug }
        })
        .collect())
}

/// Record each augmentation on its manifest entry.
pub fn attach_augs(manifest: &mut SelectionManifest, augs: &[AugmentedImage]) -> Result<()> {
    let by_id: HashMap<SampleId, AppliedAug> = augs.iter().map(|a| (a.id, a.aug)).collect();
    for entry in &mut manifest.selected {
        entry.aug = Some(*by_id.get(&entry.id).ok_or(Error::UnknownId(entry.id))?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_stay_in_range() {
        let mut r = rng::stream(5, &[]);
        for _ in 0..10_000 {
            let a = draw_aug(&mut r);
            let checked = AppliedAug::new(a.op, a.magnitude, a.sign).unwrap();
            assert_eq!(checked, a);
        }
    }

    #[test]
    fn same_stream_same_result() {
        let img = Image::from_fn(8, 8, |x, y| [(x * 30) as u8, (y * 30) as u8, 5]).unwrap();
        let a = trivial_augment(&img, &mut sample_stream(3, 1, SampleId(4)));
        let b = trivial_augment(&img, &mut sample_stream(3, 1, SampleId(4)));
        assert_eq!(a, b);
    }

    #[test]
    fn selection_subset_and_missing_ids() {
        let img = Image::filled(2, 2, [1, 2, 3]).unwrap();
        let images: HashMap<_, _> = (0..5).map(|i| (SampleId(i), img.clone())).collect();
        assert!(augment_selected(&images, &[], 0, 0).unwrap().is_empty());
        let out = augment_selected(&images, &[SampleId(3), SampleId(1)], 0, 0).unwrap();
        assert_eq!(out.iter().map(|a| a.id).collect::<Vec<_>>(), vec![SampleId(3), SampleId(1)]);
        assert!(matches!(augment_selected(&images, &[SampleId(9)], 0, 0), Err(Error::UnknownId(SampleId(9)))));
    }
}
