//! `key=value` run configuration.
//!
//! One setting per line, `#` starts a comment, nested settings use dotted
//! keys (`hnsw.M`). Absent keys keep their defaults; unknown or repeated keys
//! are rejected. [`RunConfig::render`] prints every key with its current
//! value, which doubles as the reference list of settings.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::adapter::AdapterTrainConfig;
use crate::ann::HnswParams;
use crate::error::{Error, Result};
use crate::pipeline::SyntheticSpec;
use crate::scoring::{ScoreSource, SelectionMode, SelectionPolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentParams {
    pub enabled: bool,
    /// Upper bound on the feature-space displacement of an augmented view.
    pub view_step: f64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self { enabled: true, view_step: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub dim: usize,
    pub queries: usize,
    pub k: usize,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self { dim: 32, queries: 100, k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub selection_ratio: f64,
    pub knn_k: usize,
    pub epochs: usize,
    pub anneal_epochs: usize,
    pub policy: SelectionPolicy,
    pub scores: ScoreSource,
    pub hnsw: HnswParams,
    pub augment: AugmentParams,
    pub adapter: AdapterTrainConfig,
    pub synth: SyntheticSpec,
    pub bench: BenchParams,
    /// Write wall-clock phase timings into epoch reports. Off by default so
    /// reports are byte-reproducible.
    pub report_timings: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            selection_ratio: 0.5,
            knn_k: 10,
            epochs: 10,
            anneal_epochs: 0,
            policy: SelectionPolicy::default(),
            scores: ScoreSource::Joint,
            hnsw: HnswParams::default(),
            augment: AugmentParams::default(),
            adapter: AdapterTrainConfig::default(),
            synth: SyntheticSpec::default(),
            bench: BenchParams::default(),
            report_timings: false,
            seed: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str, expected: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::config(key, format!("expected {expected}, got `{raw}`")))
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::config(key, format!("expected a boolean, got `{raw}`"))),
    }
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|s| parse_value::<f64>(key, s.trim(), "a comma-separated list of reals"))
        .collect()
}

fn check(key: &str, ok: bool, range: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, format!("value must be in {range}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Malformed {
                    line: lineno + 1,
                    reason: format!("expected `key=value`, got `{line}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::config(key, "key given more than once"));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one setting without validating cross-field invariants.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        const INT: &str = "a non-negative integer";
        const REAL: &str = "a real number";
        match key {
            "selection_ratio" => self.selection_ratio = parse_value(key, v, REAL)?,
            "knn_k" => self.knn_k = parse_value(key, v, INT)?,
            "epochs" => self.epochs = parse_value(key, v, INT)?,
            "anneal_epochs" => self.anneal_epochs = parse_value(key, v, INT)?,
            "seed" => self.seed = parse_value(key, v, "a 64-bit unsigned integer")?,
            "selection.mode" => {
                self.policy.mode = match v {
                    "top_k" => SelectionMode::TopK,
                    "weighted_sample" => SelectionMode::WeightedSample,
                    _ => return Err(Error::config(key, "expected `top_k` or `weighted_sample`")),
                }
            }
            "selection.scores" => {
                self.scores = match v {
                    "joint" => ScoreSource::Joint,
                    "density" => ScoreSource::DensityOnly,
                    _ => return Err(Error::config(key, "expected `joint` or `density`")),
                }
            }
            "hnsw.M" => self.hnsw.m = parse_value(key, v, INT)?,
            "hnsw.ef_construction" => self.hnsw.ef_construction = parse_value(key, v, INT)?,
            "hnsw.ef_search" => self.hnsw.ef_search = parse_value(key, v, INT)?,
            "hnsw.extend_candidates" => self.hnsw.extend_candidates = parse_bool(key, v)?,
            "hnsw.keep_pruned" => self.hnsw.keep_pruned = parse_bool(key, v)?,
            "hnsw.rebuild" => self.hnsw.rebuild_each_epoch = parse_bool(key, v)?,
            "augment.enabled" => self.augment.enabled = parse_bool(key, v)?,
            "augment.view_step" => self.augment.view_step = parse_value(key, v, REAL)?,
            "adapter.lr" => self.adapter.lr = parse_value(key, v, REAL)?,
            "adapter.beta1" => self.adapter.beta1 = parse_value(key, v, REAL)?,
            "adapter.beta2" => self.adapter.beta2 = parse_value(key, v, REAL)?,
            "adapter.eps" => self.adapter.eps = parse_value(key, v, REAL)?,
            "adapter.decay_factor" => self.adapter.decay_factor = parse_value(key, v, REAL)?,
            "adapter.decay_milestones" => self.adapter.decay_milestones = parse_list(key, v)?,
            "adapter.temperature" => self.adapter.temperature = parse_value(key, v, REAL)?,
            "adapter.batch_size" => self.adapter.batch_size = parse_value(key, v, INT)?,
            "adapter.epochs" => self.adapter.epochs = parse_value(key, v, INT)?,
            "synth.n" => self.synth.n = parse_value(key, v, INT)?,
            "synth.d" => self.synth.dim = parse_value(key, v, INT)?,
            "synth.classes" => self.synth.classes = parse_value(key, v, INT)?,
            "synth.cluster_std" => self.synth.cluster_std = parse_value(key, v, REAL)?,
            "synth.center_spread" => self.synth.center_spread = parse_value(key, v, REAL)?,
            "synth.outlier_fraction" => self.synth.outlier_fraction = parse_value(key, v, REAL)?,
            "synth.noise_ratio" => self.synth.noise_ratio = parse_value(key, v, REAL)?,
            "synth.embed_noise" => self.synth.embed_noise = parse_value(key, v, REAL)?,
            "synth.drift_std" => self.synth.drift_std = parse_value(key, v, REAL)?,
            "bench.dim" => self.bench.dim = parse_value(key, v, INT)?,
            "bench.queries" => self.bench.queries = parse_value(key, v, INT)?,
            "bench.k" => self.bench.k = parse_value(key, v, INT)?,
            "report.timings" => self.report_timings = parse_bool(key, v)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        check("selection_ratio", self.selection_ratio > 0.0 && self.selection_ratio <= 1.0, "(0, 1]")?;
        check("knn_k", self.knn_k >= 1, "[1, n)")?;
        check("epochs", self.epochs >= 1, "[1, inf)")?;
        check("anneal_epochs", self.anneal_epochs <= self.epochs, "[0, epochs]")?;
        check("hnsw.M", self.hnsw.m >= 2, "[2, inf)")?;
        check("hnsw.ef_construction", self.hnsw.ef_construction >= 1, "[1, inf)")?;
        check("hnsw.ef_search", self.hnsw.ef_search >= 1, "[1, inf)")?;
        check(
            "augment.view_step",
            self.augment.view_step.is_finite() && self.augment.view_step >= 0.0,
            "[0, inf)",
        )?;
        self.adapter.validate()?;
        self.synth.validate()?;
        check("bench.dim", self.bench.dim >= 1, "[1, inf)")?;
        check("bench.queries", self.bench.queries >= 1, "[1, inf)")?;
        check("bench.k", self.bench.k >= 1, "[1, inf)")?;
        Ok(())
    }

    pub fn render(&self) -> String {
        let a = &self.adapter;
        let s = &self.synth;
        let milestones: Vec<String> = a.decay_milestones.iter().map(f64::to_string).collect();
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        line("selection_ratio", self.selection_ratio.to_string());
        line("knn_k", self.knn_k.to_string());
        line("epochs", self.epochs.to_string());
        line("anneal_epochs", self.anneal_epochs.to_string());
        line("seed", self.seed.to_string());
        line("selection.mode", self.policy.mode.name().into());
        line("selection.scores", self.scores.name().into());
        line("hnsw.M", self.hnsw.m.to_string());
        line("hnsw.ef_construction", self.hnsw.ef_construction.to_string());
        line("hnsw.ef_search", self.hnsw.ef_search.to_string());
        line("hnsw.extend_candidates", self.hnsw.extend_candidates.to_string());
        line("hnsw.keep_pruned", self.hnsw.keep_pruned.to_string());
        line("hnsw.rebuild", self.hnsw.rebuild_each_epoch.to_string());
        line("augment.enabled", self.augment.enabled.to_string());
        line("augment.view_step", self.augment.view_step.to_string());
        line("adapter.lr", a.lr.to_string());
        line("adapter.beta1", a.beta1.to_string());
        line("adapter.beta2", a.beta2.to_string());
        line("adapter.eps", a.eps.to_string());
        line("adapter.decay_factor", a.decay_factor.to_string());
        line("adapter.decay_milestones", milestones.join(","));
        line("adapter.temperature", a.temperature.to_string());
        line("adapter.batch_size", a.batch_size.to_string());
        line("adapter.epochs", a.epochs.to_string());
        line("synth.n", s.n.to_string());
        line("synth.d", s.dim.to_string());
        line("synth.classes", s.classes.to_string());
        line("synth.cluster_std", s.cluster_std.to_string());
        line("synth.center_spread", s.center_spread.to_string());
        line("synth.outlier_fraction", s.outlier_fraction.to_string());
        line("synth.noise_ratio", s.noise_ratio.to_string());
        line("synth.embed_noise", s.embed_noise.to_string());
        line("synth.drift_std", s.drift_std.to_string());
        line("bench.dim", self.bench.dim.to_string());
        line("bench.queries", self.bench.queries.to_string());
        line("bench.k", self.bench.k.to_string());
        line("report.timings", self.report_timings.to_string());
        out
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_key_override() {
        let cfg = RunConfig::parse("selection_ratio=0.5\n").unwrap();
        assert_eq!(cfg.selection_ratio, 0.5);
        let cfg = RunConfig::parse("selection_ratio = 0.3  # fewer\n").unwrap();
        let expected = RunConfig { selection_ratio: 0.3, ..RunConfig::default() };
        assert_eq!(cfg, expected);
    }

    #[test]
    fn out_of_range_names_key_and_range() {
        let err = RunConfig::parse("selection_ratio=1.5").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("selection_ratio"), "{msg}");
        assert!(msg.contains("(0, 1]"), "{msg}");
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# only a comment\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn documented_defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.knn_k, 10);
        assert_eq!((cfg.hnsw.m, cfg.hnsw.ef_construction, cfg.hnsw.ef_search), (16, 200, 128));
        assert_eq!(cfg.adapter.temperature, 0.07);
        assert_eq!((cfg.adapter.beta1, cfg.adapter.beta2, cfg.adapter.eps), (0.9, 0.999, 1e-8));
        assert_eq!(cfg.adapter.lr, 1e-4);
        assert_eq!(cfg.adapter.decay_factor, 0.1);
        assert_eq!(cfg.adapter.decay_milestones, vec![0.5, 0.75]);
        assert_eq!(cfg.adapter.epochs, 15);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        let err = RunConfig::parse("hnsw.Q=3").unwrap_err();
        assert!(err.to_string().contains("hnsw.Q"));
        let err = RunConfig::parse("knn_k=3\nknn_k=4").unwrap_err();
        assert!(err.to_string().contains("knn_k"));
        let err = RunConfig::parse("epochs=4\njust words\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
        let err = RunConfig::parse("knn_k=three").unwrap_err();
        assert!(err.to_string().contains("knn_k"));
    }

    #[test]
    fn cross_field_invariants() {
        let err = RunConfig::parse("epochs=3\nanneal_epochs=4").unwrap_err();
        assert!(err.to_string().contains("anneal_epochs"));
        let err = RunConfig::parse("adapter.batch_size=1").unwrap_err();
        assert!(err.to_string().contains("adapter.batch_size"));
        let err = RunConfig::parse("synth.noise_ratio=1.0").unwrap_err();
        assert!(err.to_string().contains("synth.noise_ratio"));
    }

    #[test]
    fn render_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("hnsw.M", "8").unwrap();
        cfg.set("selection.mode", "weighted_sample").unwrap();
        cfg.set("adapter.decay_milestones", "0.25,0.5,0.9").unwrap();
        cfg.set("seed", "18446744073709551615").unwrap();
        assert_eq!(RunConfig::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = parse_config(Path::new("/definitely/not/here.cfg")).unwrap_err();
        assert!(err.is_io());
    }
}
