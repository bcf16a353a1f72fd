use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use densel::adapter::{train_adapters, write_adapter};
use densel::ann::HnswIndex;
use densel::augment::{attach_augs, augment_selected, read_image, write_ppm, Image};
use densel::io::{
    read_embeddings, read_labels, read_manifest, read_scores, write_manifest, write_scores,
};
use densel::pipeline::{bench_index, format_bench, format_reports, run_simulation};
use densel::scoring::{consistency_scores, density_scores, min_max_normalize, score_table, select};
use densel::{EmbeddingKind, EmbeddingTable, Error, RunConfig, SampleId, SelectionEntry, SelectionManifest};

#[derive(Parser)]
#[command(name = "densel", version, about = "Density and consistency driven data selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key=value` run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long)]
    out: PathBuf,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate embeddings and labels, and cache normalized consistency.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        image: PathBuf,
        /// One text embedding per class.
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Score one epoch of features against the cached consistency.
    Score {
        #[command(flatten)]
        common: Common,
        /// Feature file for this epoch (EMB1).
        #[arg(long)]
        features: PathBuf,
        /// Consistency cache written by `ingest`; density-only when absent.
        #[arg(long)]
        consistency: Option<PathBuf>,
    },
    /// Choose this epoch's budget from a score table.
    Select {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value_t = 0)]
        epoch: u64,
    },
    /// Augment the selected images (`<id>.ppm` in a directory).
    Augment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        images: PathBuf,
    },
    /// Fit the image and text adapters on paired embeddings.
    TrainAdapter {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        text: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Run the epoch loop on a synthetic dataset.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Measure query cost of the index at growing sizes.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, ascending.
        #[arg(long, value_delimiter = ',', default_value = "10000,100000")]
        sizes: Vec<usize>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for item in &common.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("--set expects KEY=VALUE, got `{item}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn create_dir(path: &Path) -> Result<(), Error> {
    fs::create_dir_all(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn read_consistency(path: &Path) -> Result<Vec<f64>, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let bad = || Error::Malformed { line: i + 1, reason: format!("expected `id,con,p_con`, got `{line}`") };
        let fields: Vec<&str> = line.split(',').collect();
        let [id, _, p] = fields[..] else { return Err(bad()) };
        if id.parse::<usize>().ok() != Some(out.len()) {
            return Err(bad());
        }
        out.push(p.parse::<f64>().map_err(|_| bad())?);
    }
    Ok(out)
}

fn ingest(common: &Common, image: &Path, text: &Path, labels: &Path) -> Result<(), Error> {
    load_config(common)?;
    let image = read_embeddings(image)?;
    let text = read_embeddings(text)?;
    let labels = read_labels(labels, Some(text.len() as u32))?;
    let con = consistency_scores(&image, &text, &labels)?;
    let p_con = min_max_normalize(&con)?;
    let mut out = String::from("id,con,p_con\n");
    for (i, (c, p)) in con.iter().zip(&p_con).enumerate() {
        let _ = writeln!(out, "{i},{c:.9e},{p:.9e}");
    }
    write(&common.out, &out)
}

fn score(common: &Common, features: &Path, consistency: Option<&Path>) -> Result<(), Error> {
    let cfg = load_config(common)?;
    let features = read_embeddings(features)?.to_features(0)?;
    let p_con = consistency.map(read_consistency).transpose()?;
    let index = HnswIndex::build(features.dim(), features.rows(), cfg.hnsw.clone(), cfg.seed)?;
    let rho = density_scores(&index, &features, cfg.knn_k, cfg.hnsw.ef_search)?;
    let table = score_table(rho, p_con.as_deref())?;
    write_scores(&table, &common.out)
}

fn select_cmd(common: &Common, scores: &Path, epoch: u64) -> Result<(), Error> {
    let cfg = load_config(common)?;
    let table = read_scores(scores)?;
    let n = table.len();
    let budget = if epoch as usize + cfg.anneal_epochs >= cfg.epochs {
        n
    } else {
        ((cfg.selection_ratio * n as f64).round() as usize).clamp(1, n)
    };
    let seed = densel::rng::derive_seed(cfg.seed, &[epoch]);
    let ids = select(&table.p_sel, budget, cfg.policy, seed)?;
    let manifest = SelectionManifest {
        epoch,
        budget,
        seed: cfg.seed,
        selected: ids.iter().map(|&id| SelectionEntry { id, p_sel: table.p_sel[id.index()], aug: None }).collect(),
    };
    write_manifest(&manifest, &common.out)
}

fn augment(common: &Common, manifest: &Path, images: &Path) -> Result<(), Error> {
    let cfg = load_config(common)?;
    let mut manifest = read_manifest(manifest)?;
    let mut loaded: HashMap<SampleId, Image> = HashMap::new();
    for id in manifest.ids() {
        loaded.insert(id, read_image(&images.join(format!("{}.ppm", id.0)))?);
    }
    let ids: Vec<SampleId> = manifest.ids().collect();
    let augmented = augment_selected(&loaded, &ids, cfg.seed, manifest.epoch)?;
    create_dir(&common.out)?;
    for a in &augmented {
        write_ppm(&common.out.join(format!("{}.ppm", a.id.0)), &a.image)?;
    }
    attach_augs(&mut manifest, &augmented)?;
    write_manifest(&manifest, &common.out.join("manifest.tsv"))
}

fn train_adapter(common: &Common, image: &Path, text: &Path, labels: &Path) -> Result<(), Error> {
    let cfg = load_config(common)?;
    let image = read_embeddings(image)?;
    let classes = read_embeddings(text)?;
    let labels = read_labels(labels, Some(classes.len() as u32))?;
    if labels.len() != image.len() {
        return Err(Error::LengthMismatch(format!("{} labels for {} images", labels.len(), image.len())));
    }
    let paired: Vec<f32> = labels.labels().iter().flat_map(|&l| classes.row(l as usize).to_vec()).collect();
    let paired = EmbeddingTable::new(EmbeddingKind::Text, classes.dim(), paired)?;
    let trained = train_adapters(&image, &paired, &cfg.adapter, cfg.seed)?;
    create_dir(&common.out)?;
    write_adapter(&common.out.join("image.adp"), &trained.image)?;
    write_adapter(&common.out.join("text.adp"), &trained.text)?;
    let mut loss = String::from("epoch,mean_loss\n");
    for (e, l) in trained.loss_history.iter().enumerate() {
        let _ = writeln!(loss, "{e},{l:.9e}");
    }
    write(&common.out.join("loss.csv"), &loss)
}

fn simulate(common: &Common) -> Result<(), Error> {
    let cfg = load_config(common)?;
    let sim = run_simulation(&cfg)?;
    let manifests = common.out.join("manifests");
    create_dir(&manifests)?;
    for m in &sim.manifests {
        write_manifest(m, &manifests.join(format!("epoch_{:04}.tsv", m.epoch)))?;
    }
    write(&common.out.join("report.csv"), &format_reports(&sim.reports, cfg.report_timings))?;
    write(&common.out.join("summary.txt"), &sim.summary.render())?;
    write(&common.out.join("config.txt"), &cfg.render())?;
    print!("{}", sim.summary.render());
    Ok(())
}

fn bench(common: &Common, sizes: &[usize]) -> Result<(), Error> {
    let cfg = load_config(common)?;
    let b = &cfg.bench;
    let rows = bench_index(sizes, b.dim, b.queries, b.k, &cfg.hnsw, cfg.seed)?;
    let csv = format_bench(&rows, cfg.report_timings);
    print!("{csv}");
    write(&common.out, &csv)
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Ingest { common, image, text, labels } => ingest(common, image, text, labels),
        Command::Score { common, features, consistency } => score(common, features, consistency.as_deref()),
        Command::Select { common, scores, epoch } => select_cmd(common, scores, *epoch),
        Command::Augment { common, manifest, images } => augment(common, manifest, images),
        Command::TrainAdapter { common, image, text, labels } => train_adapter(common, image, text, labels),
        Command::Simulate { common } => simulate(common),
        Command::Bench { common, sizes } => bench(common, sizes),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
