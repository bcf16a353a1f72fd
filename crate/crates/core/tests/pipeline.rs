use std::collections::HashSet;

use densel::pipeline::{format_reports, run_epoch, run_simulation, EpochState};
use densel::{FeatureStore, RunConfig};

fn small(settings: &[(&str, &str)]) -> RunConfig {
    let mut cfg = RunConfig::default();
    for (k, v) in [("synth.n", "300"), ("epochs", "4")].iter().chain(settings) {
        cfg.set(k, v).unwrap();
    }
    cfg.validate().unwrap();
    cfg
}

#[test]
fn full_ratio_selects_everything_once() {
    let cfg = small(&[("selection_ratio", "1.0")]);
    let sim = run_simulation(&cfg).unwrap();
    for m in &sim.manifests {
        let ids: HashSet<_> = m.ids().collect();
        assert_eq!(ids.len(), 300);
        assert!(ids.iter().all(|id| id.index() < 300));
    }
}

#[test]
fn anneal_switches_to_the_full_set() {
    let cfg = small(&[("epochs", "5"), ("anneal_epochs", "2"), ("selection_ratio", "0.2")]);
    let budgets: Vec<usize> = run_simulation(&cfg).unwrap().manifests.iter().map(|m| m.budget).collect();
    assert_eq!(budgets, [60, 60, 60, 300, 300]);
}

#[test]
fn same_seed_same_run_and_seeds_differ() {
    let a = run_simulation(&small(&[("seed", "5")])).unwrap();
    let b = run_simulation(&small(&[("seed", "5")])).unwrap();
    let c = run_simulation(&small(&[("seed", "6")])).unwrap();
    assert_eq!(a.manifests, b.manifests);
    assert_eq!(format_reports(&a.reports, false), format_reports(&b.reports, false));
    assert_ne!(a.manifests, c.manifests);
}

#[test]
fn histogram_counts_every_sample() {
    let sim = run_simulation(&small(&[])).unwrap();
    for r in &sim.reports {
        assert_eq!(r.histogram.iter().sum::<usize>(), 300);
        assert!((0.0..=1.0).contains(&r.bottom_decile_mass));
        assert!(r.min_psel <= r.mean_psel && r.mean_psel <= r.max_psel);
    }
}

#[test]
fn static_features_without_augmentation_are_a_fixed_point() {
    let cfg = small(&[("augment.enabled", "false"), ("hnsw.ef_search", "300"), ("selection_ratio", "0.3")]);
    let sim = run_simulation(&cfg).unwrap();
    let first: Vec<_> = sim.manifests[0].ids().collect();
    for m in &sim.manifests[1..] {
        assert_eq!(m.ids().collect::<Vec<_>>(), first);
    }
}

#[test]
fn density_only_state_reports_no_noise_rate_without_a_mask() {
    let cfg = small(&[]);
    let rows: Vec<Vec<f32>> = (0..40).map(|i| vec![i as f32, (i * i % 7) as f32]).collect();
    let features = FeatureStore::from_rows(&rows, 0).unwrap();
    let mut state = EpochState::new(2, 40, None, None, &cfg).unwrap();
    let out = run_epoch(&mut state, &features, &cfg).unwrap();
    assert_eq!(out.report.noise_sel_rate, None);
    assert_eq!(out.manifest.budget, 20);
    assert_eq!(out.scores.p_rho, out.scores.p_sel);
    assert_eq!(state.epoch(), 1);
}

#[test]
fn state_rejects_mismatched_inputs() {
    let cfg = small(&[]);
    assert!(EpochState::new(2, 10, Some(vec![0.5; 9]), None, &cfg).is_err());
    assert!(EpochState::new(2, 10, None, Some(vec![false; 11]), &cfg).is_err());
    assert!(EpochState::new(2, 1, None, None, &cfg).is_err());
}
