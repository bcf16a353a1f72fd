use std::fmt::Write as _;

use super::epoch::{run_epoch, EpochReport, EpochState};
use super::synth::{drifted_features, synth_dataset, SyntheticData};
use crate::config::RunConfig;
use crate::error::Result;
use crate::scoring::{consistency_scores, min_max_normalize, ScoreSource};
use crate::types::SelectionManifest;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub epochs: usize,
    pub bottom_decile_first: f64,
    pub bottom_decile_final: f64,
    pub noise_sel_rates: Vec<f64>,
    pub mean_noise_sel_rate: f64,
}

impl SimulationSummary {
    pub fn render(&self) -> String {
        let rates: Vec<String> = self.noise_sel_rates.iter().map(|r| format!("{r:.6}")).collect();
        let mut out = String::new();
        let _ = writeln!(out, "epochs={}", self.epochs);
        let _ = writeln!(out, "bottom_decile_first={:.6}", self.bottom_decile_first);
        let _ = writeln!(out, "bottom_decile_final={:.6}", self.bottom_decile_final);
        let _ = writeln!(out, "noise_sel_rates={}", rates.join(","));
        let _ = writeln!(out, "mean_noise_sel_rate={:.6}", self.mean_noise_sel_rate);
        out
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub data: SyntheticData,
    pub reports: Vec<EpochReport>,
    pub manifests: Vec<SelectionManifest>,
    pub summary: SimulationSummary,
}

/// Normalized consistency for the configured score source.
pub fn consistency_for(data: &SyntheticData, source: ScoreSource) -> Result<Option<Vec<f64>>> {
    match source {
        ScoreSource::Joint => {
            let con = consistency_scores(&data.image, &data.text, &data.labels)?;
            Ok(Some(min_max_normalize(&con)?))
        }
        ScoreSource::DensityOnly => Ok(None),
    }
}

/// Generate the synthetic set from `cfg.synth` and run every epoch on it.
pub fn run_simulation(cfg: &RunConfig) -> Result<Simulation> {
    cfg.validate()?;
    let data = synth_dataset(&cfg.synth, cfg.seed)?;
    let p_con = consistency_for(&data, cfg.scores)?;
    let mask = data.labels.noise_mask().map(<[bool]>::to_vec);
    let mut state = EpochState::new(data.features.dim(), data.features.len(), p_con, mask, cfg)?;
    let mut reports = Vec::with_capacity(cfg.epochs);
    let mut manifests = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs as u64 {
        let features = drifted_features(&data.features, cfg.synth.drift_std, cfg.seed, epoch)?;
        let out = run_epoch(&mut state, &features, cfg)?;
        reports.push(out.report);
        manifests.push(out.manifest);
    }
    let noise_sel_rates: Vec<f64> = reports.iter().filter_map(|r| r.noise_sel_rate).collect();
    let summary = SimulationSummary {
        epochs: cfg.epochs,
        bottom_decile_first: reports[0].bottom_decile_mass,
        bottom_decile_final: reports[reports.len() - 1].bottom_decile_mass,
        mean_noise_sel_rate: noise_sel_rates.iter().sum::<f64>() / noise_sel_rates.len().max(1) as f64,
        noise_sel_rates,
    };
    Ok(Simulation { data, reports, manifests, summary })
}
