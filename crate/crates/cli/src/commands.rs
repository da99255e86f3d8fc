use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use tnqc::circuit::Architecture;
use tnqc::codec::{Decoder, BIT_CONVENTION};
use tnqc::io::{
    fingerprint, read_features, write_features, write_ground_states, write_pca, Checkpoint, Dataset, FeatureSet,
    GroundStateHeader, GroundStateSet, CHECKPOINT_FORMAT, FORMAT_VERSION,
};
use tnqc::mnist::{parse_images, parse_labels, prepare_features, LabelledImages, PrepareOptions, RawImageSet};
use tnqc::train::{
    confusion_matrix, evaluate, mean_std, run_trial, split_train_val, stratified_split, train_from, Classifier, Example, TrainConfig,
};
use tnqc::xxz::{generate_dataset, DeltaGrid, VqeConfig};

use crate::config::FileConfig;
use crate::output::{read_input, write_atomic, write_json, RunManifest};
use crate::Common;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<tnqc::Error> for CliError {
    fn from(e: tnqc::Error) -> Self {
        use tnqc::Error as E;
        match e {
            E::Numerical(_) | E::Vqe { .. } | E::NotSymmetric(_) => CliError::Numerical(e.to_string()),
            E::InvalidArgument(_) | E::UnknownArchitecture { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn with_path<T>(path: &Path, r: tnqc::Result<T>) -> Result<T> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn required(value: Option<PathBuf>, name: &str) -> Result<PathBuf> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{name} (flag or config key `{}`)", name.replace('-', "_"))))
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("bad {what} list `{text}`"))))
        .collect()
}

#[derive(Debug, Args)]
pub struct PrepareMnistArgs {
    /// Training images (IDX, magic 0x803).
    #[arg(long)]
    images: Option<PathBuf>,
    /// Training labels (IDX, magic 0x801).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    test_images: Option<PathBuf>,
    #[arg(long)]
    test_labels: Option<PathBuf>,
    /// Number of principal components to keep.
    #[arg(long)]
    components: Option<usize>,
    /// Digits to keep, relabelled 0.. in this order.
    #[arg(long)]
    digits: Option<String>,
    /// Keep a seeded random subset of this many training examples.
    #[arg(long)]
    train_size: Option<usize>,
    #[arg(long)]
    test_size: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Serialize)]
struct PrepareMnistResolved {
    images: PathBuf,
    labels: PathBuf,
    test_images: PathBuf,
    test_labels: PathBuf,
    components: usize,
    digits: Vec<u8>,
    train_size: Option<usize>,
    test_size: Option<usize>,
    seed: u64,
    out: PathBuf,
}

pub fn prepare_mnist(a: PrepareMnistArgs) -> Result<()> {
    let cfg = FileConfig::load(a.common.config.as_deref())?;
    let digits_text = cfg.pick(a.digits, "digits", "0,1,2,3".to_string())?;
    let r = PrepareMnistResolved {
        images: required(cfg.pick_opt(a.images, "images")?, "images")?,
        labels: required(cfg.pick_opt(a.labels, "labels")?, "labels")?,
        test_images: required(cfg.pick_opt(a.test_images, "test_images")?, "test-images")?,
        test_labels: required(cfg.pick_opt(a.test_labels, "test_labels")?, "test-labels")?,
        components: cfg.pick(a.components, "components", tnqc::pca::DEFAULT_COMPONENTS)?,
        digits: parse_list(&digits_text, "digit")?,
        train_size: cfg.pick_opt(a.train_size, "train_size")?,
        test_size: cfg.pick_opt(a.test_size, "test_size")?,
        seed: cfg.pick(a.common.seed, "seed", 0)?,
        out: cfg.pick(a.common.out, "out", PathBuf::from("mnist-features"))?,
    };
    let mut manifest = RunManifest::start("prepare-mnist", &r);
    let mut load = |img: &Path, lab: &Path| -> Result<(RawImageSet, Vec<u8>, String)> {
        let ib = read_input(img)?;
        let lb = read_input(lab)?;
        manifest.input(img, &ib);
        manifest.input(lab, &lb);
        let images = with_path(img, parse_images(&ib))?;
        let labels = with_path(lab, parse_labels(&lb))?;
        if images.count != labels.len() {
            return Err(CliError::Data(format!(
                "{} holds {} images but {} holds {} labels",
                img.display(),
                images.count,
                lab.display(),
                labels.len()
            )));
        }
        Ok((images, labels, fingerprint(&[ib, lb].concat())))
    };
    let (train_images, train_labels, train_fp) = load(&r.images, &r.labels)?;
    let (test_images, test_labels, test_fp) = load(&r.test_images, &r.test_labels)?;
    let opts = PrepareOptions {
        digits: r.digits.clone(),
        components: r.components,
        train_size: r.train_size,
        test_size: r.test_size,
        seed: r.seed,
    };
    let prepared = prepare_features(
        LabelledImages { images: &train_images, labels: &train_labels, fingerprint: train_fp },
        LabelledImages { images: &test_images, labels: &test_labels, fingerprint: test_fp },
        &opts,
    )?;
    let (model, train_set, test_set) = (prepared.pca, prepared.train, prepared.test);
    for (name, set) in [("train.jsonl", &train_set), ("test.jsonl", &test_set)] {
        let path = r.out.join(name);
        let mut buf = Vec::new();
        write_features(&mut buf, set)?;
        write_atomic(&path, &buf)?;
        manifest.output(&path);
    }
    let pca_path = r.out.join("pca.json");
    let mut buf = Vec::new();
    write_pca(&mut buf, &model)?;
    write_atomic(&pca_path, &buf)?;
    manifest.output(&pca_path);
    println!("train: {} examples, test: {} examples, {} components", train_set.rows.len(), test_set.rows.len(), r.components);
    println!("explained variance: {}", model.explained_variance.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(" "));
    manifest.finish(&r.out.join("manifest.json"))
}

#[derive(Debug, Args)]
pub struct GenXxzArgs {
    /// Number of Δ grid points (points exactly at Δ = ±1 are skipped).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    delta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta_max: Option<f64>,
    /// Checkerboard ansatz layers.
    #[arg(long)]
    layers: Option<usize>,
    /// Adam steps from a random start.
    #[arg(long)]
    iterations: Option<usize>,
    /// Adam steps when warm-started from the previous grid point.
    #[arg(long)]
    warm_iterations: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Serialize)]
struct GenXxzResolved {
    grid: DeltaGrid,
    vqe: VqeConfig,
    seed: u64,
    out: PathBuf,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn gen_xxz(a: GenXxzArgs) -> Result<()> {
    let cfg = FileConfig::load(a.common.config.as_deref())?;
    let defaults = VqeConfig::default();
    let grid_default = DeltaGrid::default();
    let r = GenXxzResolved {
        grid: DeltaGrid {
            min: cfg.pick(a.delta_min, "delta_min", grid_default.min)?,
            max: cfg.pick(a.delta_max, "delta_max", grid_default.max)?,
            count: cfg.pick(a.count, "count", grid_default.count)?,
        },
        vqe: VqeConfig {
            layers: cfg.pick(a.layers, "layers", defaults.layers)?,
            iterations: cfg.pick(a.iterations, "iterations", defaults.iterations)?,
            warm_iterations: cfg.pick(a.warm_iterations, "warm_iterations", defaults.warm_iterations)?,
            learning_rate: cfg.pick(a.learning_rate, "learning_rate", defaults.learning_rate)?,
            ..defaults
        },
        seed: cfg.pick(a.common.seed, "seed", 0)?,
        out: cfg.pick(a.common.out, "out", PathBuf::from("xxz.jsonl"))?,
    };
    let mut manifest = RunManifest::start("gen-xxz", &r);
    let total = r.grid.points().len();
    let records = generate_dataset(&r.grid, &r.vqe, r.seed, |i, rec| {
        if (i + 1) % 50 == 0 || i + 1 == total {
            eprintln!("[{}/{}] Δ = {:+.4}  relative error {:.4}", i + 1, total, rec.delta, rec.relative_error());
        }
    })?;
    let errors: Vec<f64> = records.iter().map(|r| r.relative_error()).collect();
    let mut counts = [0usize; tnqc::xxz::N_PHASES];
    for rec in &records {
        counts[rec.label] += 1;
    }
    let set = GroundStateSet { header: GroundStateHeader::new(r.grid, r.vqe.clone(), r.seed), records };
    let mut buf = Vec::new();
    write_ground_states(&mut buf, &set)?;
    write_atomic(&r.out, &buf)?;
    manifest.output(&r.out);
    println!("states: {}", set.records.len());
    println!(
        "relative energy error: median {:.4}, max {:.4}",
        median(errors.clone()),
        errors.iter().cloned().fold(0.0, f64::max)
    );
    println!("class counts (ferro, para, antiferro): {:?}", counts);
    manifest.finish(&manifest_path(&r.out))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Architecture descriptor, e.g. mera:su4, ttn:simple-real, checkerboard:su4:L4.
    #[arg(long)]
    arch: Option<String>,
    /// binary (qubit-wise) or amplitude (softmax over outcome probabilities).
    #[arg(long)]
    decoder: Option<String>,
    /// Training dataset (feature file or ground-state file).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Test dataset. Ground-state data without one is split 2:1 per seed.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Comma-separated seeds; defaults to `trials` seeds counting up from --seed.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Batches per epoch; 0 means one full pass.
    #[arg(long)]
    batches_per_epoch: Option<usize>,
    /// Continue from a checkpoint's last parameters and optimizer state.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Serialize)]
struct TrainResolved {
    arch: String,
    decoder: Decoder,
    train: PathBuf,
    test: Option<PathBuf>,
    seeds: Vec<u64>,
    config: TrainConfig,
    resume: Option<PathBuf>,
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct SeedSplit {
    seed: u64,
    /// Indices into the training file (the train part of the 2:1 split when
    /// no test file is given).
    train_indices: Vec<usize>,
    val_indices: Vec<usize>,
    /// Indices into the test file, or into the training file when split.
    test_indices: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct SeedSummary {
    seed: u64,
    test_accuracy: f64,
    best_val_accuracy: f64,
    best_epoch: usize,
    epochs_run: usize,
    checkpoint: PathBuf,
}

#[derive(Debug, Serialize)]
struct TrainSummary {
    arch: String,
    decoder: Decoder,
    n_params: usize,
    seeds: Vec<SeedSummary>,
    mean_test_accuracy: f64,
    std_test_accuracy: f64,
}

fn pick_config(base: TrainConfig, a: &TrainArgs, cfg: &FileConfig) -> Result<TrainConfig> {
    Ok(TrainConfig {
        learning_rate: cfg.pick(a.learning_rate, "learning_rate", base.learning_rate)?,
        max_epochs: cfg.pick(a.epochs, "epochs", base.max_epochs)?,
        patience: cfg.pick(a.patience, "patience", base.patience)?,
        batch_size: cfg.pick(a.batch_size, "batch_size", base.batch_size)?,
        batches_per_epoch: cfg.pick(a.batches_per_epoch, "batches_per_epoch", base.batches_per_epoch)?,
        ..base
    })
}

fn load_dataset(path: &Path, manifest: Option<&mut RunManifest>) -> Result<(Dataset, String)> {
    let bytes = read_input(path)?;
    if let Some(m) = manifest {
        m.input(path, &bytes);
    }
    let ds = with_path(path, Dataset::read(&bytes))?;
    Ok((ds, fingerprint(&bytes)))
}

fn pick(examples: &[Example], idx: &[usize]) -> Vec<Example> {
    idx.iter().map(|&i| examples[i].clone()).collect()
}

pub fn train(a: TrainArgs) -> Result<()> {
    let cfg = FileConfig::load(a.common.config.as_deref())?;
    let resume = cfg.pick_opt(a.resume.clone(), "resume")?;
    let resumed = match &resume {
        Some(p) => Some(with_path(p, Checkpoint::from_json(&read_input(p)?))?),
        None => None,
    };
    let arch_text = match (&resumed, cfg.pick_opt(a.arch.clone(), "arch")?) {
        (Some(c), _) => c.architecture.clone(),
        (None, Some(s)) => s,
        (None, None) => return Err(CliError::Usage("missing --arch".into())),
    };
    let arch: Architecture = arch_text.parse()?;
    let decoder: Decoder = match &resumed {
        Some(c) => c.decoder,
        None => cfg.pick(a.decoder.clone(), "decoder", "binary".to_string())?.parse()?,
    };
    let train_path = required(cfg.pick_opt(a.train.clone(), "train")?, "train")?;
    let test_path = cfg.pick_opt(a.test.clone(), "test")?;
    let base_seed = cfg.pick(a.common.seed, "seed", 0)?;
    let seeds: Vec<u64> = match (&resumed, cfg.pick_opt(a.seeds.clone(), "seeds")?) {
        (Some(c), _) => vec![c.seed],
        (None, Some(list)) => parse_list(&list, "seed")?,
        (None, None) => (0..cfg.pick(a.trials, "trials", 5usize)? as u64).map(|k| base_seed + k).collect(),
    };
    if seeds.is_empty() {
        return Err(CliError::Usage("no seeds to run".into()));
    }
    let out = cfg.pick(a.common.out.clone(), "out", PathBuf::from("runs/train"))?;

    let (data, data_fp) = load_dataset(&train_path, None)?;
    let preset = match (&resumed, &data) {
        (Some(c), _) => c.config.clone(),
        (None, Dataset::Features(_)) => TrainConfig::mnist(seeds[0]),
        (None, Dataset::GroundStates(_)) => TrainConfig::xxz(seeds[0]),
    };
    let config = pick_config(preset, &a, &cfg)?;
    config.validate()?;
    let resolved = TrainResolved {
        arch: arch.to_string(),
        decoder,
        train: train_path.clone(),
        test: test_path.clone(),
        seeds: seeds.clone(),
        config: config.clone(),
        resume: resume.clone(),
        out: out.clone(),
    };
    let mut manifest = RunManifest::start("train", &resolved);
    let _ = load_dataset(&train_path, Some(&mut manifest))?;
    let n_classes = data.n_classes();
    let classifier = Classifier::new(arch, decoder, n_classes)?;
    let examples = data.examples()?;
    let test_data = match &test_path {
        Some(p) => {
            let (t, _) = load_dataset(p, Some(&mut manifest))?;
            if t.n_classes() != n_classes {
                return Err(CliError::Data(format!("{} has {} classes, training data {}", p.display(), t.n_classes(), n_classes)));
            }
            Some(t.examples()?)
        }
        None => {
            if matches!(data, Dataset::Features(_)) {
                return Err(CliError::Usage("feature datasets need --test".into()));
            }
            None
        }
    };

    let mut summaries = Vec::new();
    let mut splits = Vec::new();
    for &seed in &seeds {
        let seed_config = TrainConfig { seed, ..config.clone() };
        let (pool_idx, test_idx, test) = match &test_data {
            Some(t) => ((0..examples.len()).collect::<Vec<_>>(), (0..t.len()).collect(), t.clone()),
            None => {
                let (tr, te) = stratified_split(&data.labels(), 2.0 / 3.0, seed);
                let test = pick(&examples, &te);
                (tr, te, test)
            }
        };
        let pool = pick(&examples, &pool_idx);
        let (outcome, test_accuracy, val_idx, train_idx) = match &resumed {
            Some(c) => {
                let (tr, va) = split_train_val(pool.len(), seed);
                let outcome = train_from(
                    &classifier,
                    &seed_config,
                    &pick(&pool, &tr),
                    &pick(&pool, &va),
                    Some((c.last_params.clone(), c.adam.clone())),
                )?;
                let acc = evaluate(&classifier, &outcome.params, &test)?;
                (outcome, acc, va, tr)
            }
            None => {
                let trial = run_trial(&classifier, &seed_config, &pool, &test)?;
                (trial.outcome, trial.test_accuracy, trial.val_indices, trial.train_indices)
            }
        };
        let ckpt = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: FORMAT_VERSION,
            architecture: classifier.template.architecture.to_string(),
            decoder,
            n_classes,
            bit_convention: BIT_CONVENTION.into(),
            params: outcome.params.clone(),
            last_params: outcome.last_params.clone(),
            adam: outcome.adam.clone(),
            config: seed_config.clone(),
            seed,
            best_val_accuracy: outcome.best_val_accuracy,
            best_epoch: outcome.best_epoch,
            epochs_run: outcome.history.records.len(),
            dataset_fingerprint: data_fp.clone(),
        };
        let ckpt_path = out.join(format!("seed-{seed}.checkpoint.json"));
        write_atomic(&ckpt_path, ckpt.to_json().as_bytes())?;
        let hist_path = out.join(format!("seed-{seed}.history.csv"));
        let mut csv = Vec::new();
        outcome.history.write_csv(&mut csv).map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(&hist_path, &csv)?;
        manifest.output(&ckpt_path);
        manifest.output(&hist_path);
        println!(
            "seed {seed}: test accuracy {:.1}%  (best val {:.1}% at epoch {}, {} epochs)",
            100.0 * test_accuracy,
            100.0 * outcome.best_val_accuracy,
            outcome.best_epoch,
            outcome.history.records.len()
        );
        splits.push(SeedSplit {
            seed,
            train_indices: train_idx.iter().map(|&i| pool_idx[i]).collect(),
            val_indices: val_idx.iter().map(|&i| pool_idx[i]).collect(),
            test_indices: test_idx,
        });
        summaries.push(SeedSummary {
            seed,
            test_accuracy,
            best_val_accuracy: outcome.best_val_accuracy,
            best_epoch: outcome.best_epoch,
            epochs_run: outcome.history.records.len(),
            checkpoint: ckpt_path,
        });
    }
    let accs: Vec<f64> = summaries.iter().map(|s| s.test_accuracy).collect();
    let (mean, std) = mean_std(&accs);
    println!("{} / {}: test accuracy {:.1} ± {:.1} over {} seeds", classifier.template.architecture, decoder, 100.0 * mean, 100.0 * std, accs.len());
    let summary = TrainSummary {
        arch: classifier.template.architecture.to_string(),
        decoder,
        n_params: classifier.n_params(),
        seeds: summaries,
        mean_test_accuracy: mean,
        std_test_accuracy: std,
    };
    let summary_path = out.join("summary.json");
    write_json(&summary_path, &summary)?;
    manifest.output(&summary_path);
    let splits_path = out.join("splits.json");
    write_json(&splits_path, &splits)?;
    manifest.output(&splits_path);
    manifest.finish(&out.join("manifest.json"))
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset to score.
    #[arg(long)]
    data: PathBuf,
    /// For ground-state data: `train` or `test` side of the checkpoint
    /// seed's 2:1 split, or `all`.
    #[arg(long, default_value = "all")]
    split: String,
    #[command(flatten)]
    common: Common,
}

pub fn eval(a: EvalArgs) -> Result<()> {
    let ckpt = with_path(&a.checkpoint, Checkpoint::from_json(&read_input(&a.checkpoint)?))?;
    let (data, fp) = load_dataset(&a.data, None)?;
    if fp != ckpt.dataset_fingerprint {
        eprintln!("warning: {} is not the dataset this checkpoint was trained on", a.data.display());
    }
    if data.n_classes() != ckpt.n_classes {
        return Err(CliError::Data(format!("dataset has {} classes, checkpoint {}", data.n_classes(), ckpt.n_classes)));
    }
    let classifier = Classifier::new(ckpt.architecture()?, ckpt.decoder, ckpt.n_classes)?;
    let examples = data.examples()?;
    let examples = match (a.split.as_str(), &data) {
        ("all", _) => examples,
        (side @ ("train" | "test"), Dataset::GroundStates(_)) => {
            let (tr, te) = stratified_split(&data.labels(), 2.0 / 3.0, ckpt.seed);
            pick(&examples, if side == "train" { &tr } else { &te })
        }
        ("train" | "test", Dataset::Features(_)) => {
            return Err(CliError::Usage("--split applies to ground-state data; feature files are already split".into()))
        }
        (other, _) => return Err(CliError::Usage(format!("unknown split `{other}` (all, train, test)"))),
    };
    let accuracy = evaluate(&classifier, &ckpt.params, &examples)?;
    let matrix = confusion_matrix(&classifier, &ckpt.params, &examples)?;
    println!("examples: {}", examples.len());
    println!("accuracy: {:.4}", accuracy);
    println!("confusion matrix (rows: true class, columns: predicted):");
    print!("{:>8}", "");
    for c in 0..ckpt.n_classes {
        print!("{c:>8}");
    }
    println!();
    for (t, row) in matrix.iter().enumerate() {
        print!("{t:>8}");
        for v in row {
            print!("{v:>8}");
        }
        println!();
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

pub fn baseline(a: BaselineArgs) -> Result<()> {
    let cfg = FileConfig::load(a.common.config.as_deref())?;
    let train_path = required(cfg.pick_opt(a.train, "train")?, "train")?;
    let test_path = required(cfg.pick_opt(a.test, "test")?, "test")?;
    let load = |p: &Path| -> Result<FeatureSet> { with_path(p, read_features(read_input(p)?.as_slice())) };
    let (train, test) = (load(&train_path)?, load(&test_path)?);
    if train.header.n_features != test.header.n_features {
        return Err(CliError::Data(format!(
            "feature dimension mismatch: train {}, test {}",
            train.header.n_features, test.header.n_features
        )));
    }
    let n_classes = train.header.n_classes.max(test.header.n_classes);
    let acc = tnqc::baseline::logistic_baseline(&train.features(), &train.labels(), &test.features(), &test.labels(), n_classes)?;
    println!("logistic regression test accuracy: {:.4}", acc);
    Ok(())
}
