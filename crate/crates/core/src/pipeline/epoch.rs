use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::ann::HnswIndex;
use crate::augment::{draw_aug, sample_stream};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::scoring::{density_scores_filtered, score_table, select};
use crate::types::{FeatureStore, SampleId, ScoreTable, SelectionEntry, SelectionManifest};

pub const HISTOGRAM_BINS: usize = 10;

/// Wall-clock milliseconds spent in each phase of an epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub update_ms: f64,
    pub score_ms: f64,
    pub select_ms: f64,
    pub augment_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: u64,
    pub selected: usize,
    pub mean_psel: f64,
    pub min_psel: f64,
    pub max_psel: f64,
    /// Counts of `p_rho` over ten equal bins of `[0, 1]`, the last one closed.
    pub histogram: [usize; HISTOGRAM_BINS],
    /// Share of samples in the lowest histogram bin.
    pub bottom_decile_mass: f64,
    /// Share of selected samples whose label was flipped, when known.
    pub noise_sel_rate: Option<f64>,
    pub timings: PhaseTimings,
}

pub const REPORT_HEADER: &str =
    "epoch,selected,mean_psel,bottom_decile_mass,noise_sel_rate,update_ms,score_ms,select_ms,augment_ms";

/// Render reports as CSV. Timing columns hold `-` unless `timings` is set,
/// which keeps the output a pure function of the inputs and seed.
pub fn format_reports(reports: &[EpochReport], timings: bool) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in reports {
        let rate = r.noise_sel_rate.map_or("-".to_string(), |v| format!("{v:.6}"));
        let _ = write!(out, "{},{},{:.9},{:.6},{rate}", r.epoch, r.selected, r.mean_psel, r.bottom_decile_mass);
        let t = &r.timings;
        for ms in [t.update_ms, t.score_ms, t.select_ms, t.augment_ms] {
            if timings {
                let _ = write!(out, ",{ms:.3}");
            } else {
                out.push_str(",-");
            }
        }
        out.push('\n');
    }
    out
}

pub fn histogram(p_rho: &[f64]) -> [usize; HISTOGRAM_BINS] {
    let mut h = [0; HISTOGRAM_BINS];
    for &p in p_rho {
        let bin = ((p * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        h[bin] += 1;
    }
    h
}

/// Mutable state carried across epochs of one run.
#[derive(Debug, Clone)]
pub struct EpochState {
    index: HnswIndex,
    n: usize,
    p_con: Option<Vec<f64>>,
    noise_mask: Option<Vec<bool>>,
    /// Views produced last epoch, keyed by the sample they were derived from.
    pending_views: Vec<(usize, Vec<f32>)>,
    active_views: HashSet<SampleId>,
    epoch: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochOutput {
    pub manifest: SelectionManifest,
    pub report: EpochReport,
    pub scores: ScoreTable,
}

impl EpochState {
    /// `p_con` is the precomputed normalized consistency; `None` scores by
    /// density alone.
    pub fn new(dim: usize, n: usize, p_con: Option<Vec<f64>>, noise_mask: Option<Vec<bool>>, cfg: &RunConfig) -> Result<Self> {
        if n < 2 {
            return Err(Error::out_of_range("sample count", "need at least two samples"));
        }
        for (what, len) in [("p_con", p_con.as_ref().map(Vec::len)), ("noise mask", noise_mask.as_ref().map(Vec::len))] {
            if let Some(len) = len.filter(|&l| l != n) {
                return Err(Error::LengthMismatch(format!("{what} has {len} entries for {n} samples")));
            }
        }
        Ok(Self {
            index: HnswIndex::new(dim, cfg.hnsw.clone(), cfg.seed)?,
            n,
            p_con,
            noise_mask,
            pending_views: Vec::new(),
            active_views: HashSet::new(),
            epoch: 0,
        })
    }

    pub fn index(&self) -> &HnswIndex {
        &self.index
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    fn view_id(&self, origin: usize) -> SampleId {
        SampleId::from(self.n + origin)
    }

    /// Phase 1: bring the index in line with this epoch's features and
    /// activate last epoch's views.
    fn update_index(&mut self, features: &FeatureStore, cfg: &RunConfig) -> Result<()> {
        let views: Vec<(SampleId, Vec<f32>)> =
            std::mem::take(&mut self.pending_views).into_iter().map(|(o, v)| (self.view_id(o), v)).collect();
        if cfg.hnsw.rebuild_each_epoch {
            self.index = HnswIndex::new(features.dim(), cfg.hnsw.clone(), cfg.seed)?;
        }
        for (i, row) in features.rows().enumerate() {
            self.index.upsert(SampleId::from(i), row)?;
        }
        self.active_views.clear();
        for (id, v) in views {
            self.index.upsert(id, &v)?;
            self.active_views.insert(id);
        }
        Ok(())
    }

    fn budget(&self, cfg: &RunConfig) -> usize {
        let annealing = self.epoch as usize + cfg.anneal_epochs >= cfg.epochs;
        if annealing {
            self.n
        } else {
            ((cfg.selection_ratio * self.n as f64).round() as usize).clamp(1, self.n)
        }
    }

    /// Perturb each selected sample into a view for the next epoch.
    fn make_views(&mut self, features: &FeatureStore, manifest: &mut SelectionManifest, cfg: &RunConfig) {
        for entry in &mut manifest.selected {
            let i = entry.id.index();
            entry.aug = Some(draw_aug(&mut sample_stream(cfg.seed, self.epoch, entry.id)));
            let mut r = rng::stream(cfg.seed, &[tag::VIEW, self.epoch, i as u64]);
            let dir: Vec<f64> = (0..features.dim()).map(|_| StandardNormal.sample(&mut r)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let radius = r.random_range(0.0..=cfg.augment.view_step);
            let view = features
                .row(i)
                .iter()
                .zip(&dir)
                .map(|(&x, &u)| (x as f64 + radius * u / norm) as f32)
                .collect();
            self.pending_views.push((i, view));
        }
    }
}

/// One epoch: update the index, score, select the budget, augment the
/// selection. Augmented views enter the index at the start of the next epoch.
pub fn run_epoch(state: &mut EpochState, features: &FeatureStore, cfg: &RunConfig) -> Result<EpochOutput> {
    if features.len() != state.n {
        return Err(Error::LengthMismatch(format!("{} feature rows for {} samples", features.len(), state.n)));
    }
    let mut timings = PhaseTimings::default();
    let ms = |t: Instant| t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    state.update_index(features, cfg)?;
    timings.update_ms = ms(t);

    let t = Instant::now();
    let n = state.n;
    let active = &state.active_views;
    let rho = density_scores_filtered(&state.index, features, cfg.knn_k, cfg.hnsw.ef_search, |id| {
        id.index() < n || active.contains(&id)
    })?;
    let scores = score_table(rho, state.p_con.as_deref())?;
    timings.score_ms = ms(t);

    let t = Instant::now();
    let budget = state.budget(cfg);
    let select_seed = rng::derive_seed(cfg.seed, &[state.epoch]);
    let chosen = select(&scores.p_sel, budget, cfg.policy, select_seed)?;
    let mut manifest = SelectionManifest {
        epoch: state.epoch,
        budget,
        seed: cfg.seed,
        selected: chosen.iter().map(|&id| SelectionEntry { id, p_sel: scores.p_sel[id.index()], aug: None }).collect(),
    };
    timings.select_ms = ms(t);

    let t = Instant::now();
    if cfg.augment.enabled {
        state.make_views(features, &mut manifest, cfg);
    }
    timings.augment_ms = ms(t);
    manifest.validate()?;

    let psel: Vec<f64> = manifest.selected.iter().map(|e| e.p_sel).collect();
    let hist = histogram(&scores.p_rho);
    let noise_sel_rate = state.noise_mask.as_ref().map(|mask| {
        chosen.iter().filter(|id| mask[id.index()]).count() as f64 / chosen.len() as f64
    });
    let report = EpochReport {
        epoch: state.epoch,
        selected: chosen.len(),
        mean_psel: psel.iter().sum::<f64>() / psel.len() as f64,
        min_psel: psel.iter().copied().fold(f64::INFINITY, f64::min),
        max_psel: psel.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        histogram: hist,
        bottom_decile_mass: hist[0] as f64 / n as f64,
        noise_sel_rate,
        timings,
    };
    state.epoch += 1;
    Ok(EpochOutput { manifest, report, scores })
}
