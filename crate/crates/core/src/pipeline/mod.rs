//! Epoch loop, synthetic data, corruptions and the index benchmark.

mod bench;
mod corrupt;
mod epoch;
mod simulate;
mod synth;

pub use bench::{bench_index, format_bench, gaussian_points, BenchRow};
pub use corrupt::{corrupt, Corrupted, CorruptionKind, Rect};
pub use epoch::{
    format_reports, histogram, run_epoch, EpochOutput, EpochReport, EpochState, PhaseTimings, HISTOGRAM_BINS,
    REPORT_HEADER,
};
pub use simulate::{consistency_for, run_simulation, Simulation, SimulationSummary};
pub use synth::{drifted_features, synth_dataset, SyntheticData, SyntheticSpec};
