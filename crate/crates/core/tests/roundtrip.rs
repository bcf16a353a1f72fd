use proptest::prelude::*;

use densel::adapter::{decode_adapter, encode_adapter, LinearAdapter};
use densel::augment::{decode_img1, decode_ppm, draw_aug, encode_img1, encode_ppm, Image};
use densel::io::{decode_embeddings, encode_embeddings, format_manifest, format_scores, parse_manifest, parse_scores};
use densel::rng;
use densel::{EmbeddingKind, EmbeddingTable, SampleId, ScoreTable, SelectionEntry, SelectionManifest};

fn table() -> impl Strategy<Value = EmbeddingTable> {
    (1usize..8, 1usize..20, any::<bool>()).prop_flat_map(|(dim, n, image)| {
        let kind = if image { EmbeddingKind::Image } else { EmbeddingKind::Text };
        prop::collection::vec(-1e6f32..1e6, dim * n).prop_map(move |data| EmbeddingTable::new(kind, dim, data).unwrap())
    })
}

proptest! {
    #[test]
    fn embeddings_round_trip(t in table()) {
        prop_assert_eq!(decode_embeddings(&encode_embeddings(&t)).unwrap(), t);
    }

    #[test]
    fn manifest_round_trip(
        epoch in 0u64..1000,
        seed in any::<u64>(),
        ids in prop::collection::hash_set(0u32..10_000, 1..40),
        with_aug in any::<bool>(),
    ) {
        let selected: Vec<SelectionEntry> = ids
            .into_iter()
            .map(|id| SelectionEntry {
                id: SampleId(id),
                p_sel: (id as u64 * 7919 % 1_000_000_001) as f64 / 1e9,
                aug: with_aug.then(|| draw_aug(&mut rng::stream(seed, &[id as u64]))),
            })
            .collect();
        let m = SelectionManifest { epoch, budget: selected.len(), seed, selected };
        prop_assert_eq!(parse_manifest(&format_manifest(&m)).unwrap(), m);
    }

    #[test]
    fn scores_format_is_a_fixed_point(rows in prop::collection::vec((0.0f64..100.0, 0.0f64..1.0, 0.0f64..1.0), 1..50)) {
        let t = ScoreTable {
            rho_raw: rows.iter().map(|r| r.0).collect(),
            p_rho: rows.iter().map(|r| r.1).collect(),
            p_con: rows.iter().map(|r| r.2).collect(),
            p_sel: rows.iter().map(|r| r.1 * r.2).collect(),
        };
        let once = format_scores(&t);
        let parsed = parse_scores(&once).unwrap();
        prop_assert_eq!(format_scores(&parsed), once);
        for (a, b) in parsed.p_sel.iter().zip(&t.p_sel) {
            prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn adapter_round_trip(d in 1usize..6, seed in any::<u64>()) {
        use rand::Rng as _;
        let mut r = rng::stream(seed, &[]);
        // The checkpoint stores float32, so draw values that survive the cast.
        let mut draw = |k: usize| (0..k).map(|_| r.random_range(-3.0f32..3.0) as f64).collect::<Vec<f64>>();
        let a = LinearAdapter::new(d, d, draw(d * d), draw(d)).unwrap();
        prop_assert_eq!(decode_adapter(&encode_adapter(&a).unwrap()).unwrap(), a);
        let wide = LinearAdapter::new(d, d + 1, draw(d * (d + 1)), draw(d)).unwrap();
        prop_assert!(encode_adapter(&wide).is_err());
    }

    #[test]
    fn images_round_trip(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
        use rand::Rng as _;
        let mut r = rng::stream(seed, &[]);
        let img = Image::new(w, h, (0..w * h * 3).map(|_| r.random::<u8>()).collect()).unwrap();
        prop_assert_eq!(&decode_ppm(&encode_ppm(&img)).unwrap(), &img);
        prop_assert_eq!(&decode_img1(&encode_img1(&img)).unwrap(), &img);
    }
}

#[test]
fn truncated_embeddings_are_rejected() {
    let t = EmbeddingTable::new(EmbeddingKind::Image, 3, vec![1.0; 12]).unwrap();
    let bytes = encode_embeddings(&t);
    for cut in [0, 3, 8, bytes.len() - 1] {
        assert!(decode_embeddings(&bytes[..cut]).is_err(), "cut at {cut}");
    }
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(decode_embeddings(&bad).is_err());
}
