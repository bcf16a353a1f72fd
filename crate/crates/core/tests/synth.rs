use densel::pipeline::{corrupt, synth_dataset, CorruptionKind, SyntheticSpec};
use densel::augment::Image;
use densel::rng;
use densel::scoring::consistency_scores;
use densel::LabelTable;

fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
    let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum();
    let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum();
    dot / (na * nb).sqrt()
}

#[test]
fn clean_labels_agree_with_their_prototype() {
    let spec = SyntheticSpec { noise_ratio: 0.0, ..Default::default() };
    let data = synth_dataset(&spec, 2).unwrap();
    let hits = (0..spec.n)
        .filter(|&i| {
            let own = cosine(data.image.row(i), data.text.row(data.labels.label(i) as usize));
            (0..spec.classes).all(|c| cosine(data.image.row(i), data.text.row(c)) <= own)
        })
        .count();
    assert!(hits as f64 >= 0.99 * spec.n as f64, "{hits}/{}", spec.n);
}

#[test]
fn flipped_labels_score_lower_consistency() {
    let data = synth_dataset(&SyntheticSpec::default(), 7).unwrap();
    let con = consistency_scores(&data.image, &data.text, &data.labels).unwrap();
    let mask = data.labels.noise_mask().unwrap();
    let mean = |noisy: bool| {
        let v: Vec<f64> = con.iter().zip(mask).filter(|(_, &m)| m == noisy).map(|(c, _)| *c).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean(true) + 0.3 < mean(false), "{} vs {}", mean(true), mean(false));
}

#[test]
fn consistency_rejects_out_of_range_labels() {
    let data = synth_dataset(&SyntheticSpec { n: 20, ..Default::default() }, 0).unwrap();
    let short = LabelTable::new(vec![0; 19], 10, None).unwrap();
    assert!(consistency_scores(&data.image, &data.text, &short).is_err());
}

#[test]
fn corruptions_are_deterministic_and_bounded() {
    let img = Image::from_fn(20, 16, |x, y| [(x * 12) as u8, (y * 15) as u8, 90]).unwrap();
    for kind in CorruptionKind::ALL {
        let a = corrupt(&img, kind, 0.6, &mut rng::stream(1, &[])).unwrap();
        let b = corrupt(&img, kind, 0.6, &mut rng::stream(1, &[])).unwrap();
        assert_eq!(a, b, "{}", kind.name());
        assert_eq!((a.image.width(), a.image.height()), (20, 16));
        assert_eq!(CorruptionKind::from_name(kind.name()), Some(kind));
    }
    assert!(corrupt(&img, CorruptionKind::Fog, 1.5, &mut rng::stream(0, &[])).is_err());
}
