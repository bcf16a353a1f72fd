use densel::adapter::{train_adapters, AdapterTrainConfig};
use densel::pipeline::{synth_dataset, SyntheticSpec};
use densel::{EmbeddingKind, EmbeddingTable};

fn paired(n: usize) -> (EmbeddingTable, EmbeddingTable) {
    let data = synth_dataset(&SyntheticSpec { n, ..Default::default() }, 3).unwrap();
    let text: Vec<f32> = data.labels.labels().iter().flat_map(|&l| data.text.row(l as usize).to_vec()).collect();
    (data.image, EmbeddingTable::new(EmbeddingKind::Text, 16, text).unwrap())
}

#[test]
fn one_epoch_gives_one_loss() {
    let (img, txt) = paired(100);
    let cfg = AdapterTrainConfig { epochs: 1, batch_size: 32, ..Default::default() };
    let out = train_adapters(&img, &txt, &cfg, 0).unwrap();
    assert_eq!(out.loss_history.len(), 1);
    assert!(out.loss_history[0].is_finite());
}

#[test]
fn training_is_deterministic_and_leaves_inputs_alone() {
    let (img, txt) = paired(130);
    let before = (img.clone(), txt.clone());
    let cfg = AdapterTrainConfig { epochs: 3, batch_size: 64, ..Default::default() };
    let a = train_adapters(&img, &txt, &cfg, 9).unwrap();
    let b = train_adapters(&img, &txt, &cfg, 9).unwrap();
    assert_eq!(a.loss_history, b.loss_history);
    assert_eq!(a.image, b.image);
    assert_eq!(before, (img, txt));
}

#[test]
fn mismatched_pairs_are_rejected() {
    let (img, _) = paired(50);
    let (_, txt) = paired(40);
    assert!(train_adapters(&img, &txt, &AdapterTrainConfig::default(), 0).is_err());
    let narrow = EmbeddingTable::new(EmbeddingKind::Text, 8, vec![0.5; 8 * 50]).unwrap();
    assert!(train_adapters(&img, &narrow, &AdapterTrainConfig::default(), 0).is_err());
}

#[test]
fn invalid_config_names_the_key() {
    let (img, txt) = paired(20);
    let cfg = AdapterTrainConfig { batch_size: 1, ..Default::default() };
    let err = train_adapters(&img, &txt, &cfg, 0).unwrap_err();
    assert!(err.to_string().contains("adapter.batch_size"), "{err}");
}
