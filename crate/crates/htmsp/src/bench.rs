//! Dataset ingestion, seeded train/test splits, accuracy evaluation and
//! the inhibition-region sweep.
//!
//! Work is spread over the current rayon pool. Every reduction runs in
//! dataset order, so results do not depend on the number of workers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use htmsp_core::rng::fnv1a;
use htmsp_core::{
    classify, encode_stages, ClassMeans, EncodedImage, EncodingStages, GrayImage, InitMode,
    KeyedRng, Metric, Provenance, RandomMask, Receptor, Stream, TemplateStore, WeightRule,
};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::image_io;

/// File extensions picked up by [`load_dataset`], compared case-insensitively.
pub const IMAGE_EXTENSIONS: &[&str] = &["pgm", "pnm", "ppm", "png"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFiles {
    pub label: String,
    pub files: Vec<PathBuf>,
}

/// Labelled image files, classes and files in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub root: PathBuf,
    pub classes: Vec<ClassFiles>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.classes.iter().map(|c| c.files.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> Vec<(&str, usize)> {
        self.classes
            .iter()
            .map(|c| (c.label.as_str(), c.files.len()))
            .collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Path)> {
        self.classes
            .iter()
            .flat_map(|c| c.files.iter().map(move |f| (c.label.as_str(), f.as_path())))
    }
}

fn dataset_err(root: &Path, message: impl Into<String>) -> Error {
    Error::Dataset {
        root: root.to_path_buf(),
        message: message.into(),
    }
}

fn is_image(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

/// One class per subdirectory of `root`, named after it.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let mut classes = Vec::new();
    for dir in sorted_entries(root)? {
        if !dir.is_dir() {
            continue;
        }
        let label = dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| {
                dataset_err(
                    root,
                    format!("class name of {} is not UTF-8", dir.display()),
                )
            })?
            .to_string();
        let files: Vec<PathBuf> = sorted_entries(&dir)?
            .into_iter()
            .filter(|p| is_image(p))
            .collect();
        if files.len() < 2 {
            return Err(dataset_err(
                root,
                format!(
                    "class `{label}` has {} image(s), need at least 2",
                    files.len()
                ),
            ));
        }
        classes.push(ClassFiles { label, files });
    }
    if classes.is_empty() {
        return Err(dataset_err(root, "no class subdirectories"));
    }
    Ok(Dataset {
        root: root.to_path_buf(),
        classes,
    })
}

/// Train and test indices into one class's file list, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub seed: u64,
    /// Aligned with [`Dataset::classes`].
    pub classes: Vec<ClassSplit>,
}

impl SplitPlan {
    /// Every image both trains and tests.
    pub fn resubstitution(dataset: &Dataset) -> Self {
        Self {
            seed: 0,
            classes: dataset
                .classes
                .iter()
                .map(|c| {
                    let all: Vec<usize> = (0..c.files.len()).collect();
                    ClassSplit {
                        train: all.clone(),
                        test: all,
                    }
                })
                .collect(),
        }
    }

    pub fn num_train(&self) -> usize {
        self.classes.iter().map(|c| c.train.len()).sum()
    }

    pub fn num_test(&self) -> usize {
        self.classes.iter().map(|c| c.test.len()).sum()
    }
}

/// Shuffle each class with a generator keyed by `(seed, label)` and put the
/// first `ceil(n / 2)` images in the training half.
pub fn split(dataset: &Dataset, seed: u64) -> SplitPlan {
    let rng = KeyedRng::new(seed);
    let classes = dataset
        .classes
        .iter()
        .map(|c| {
            let n = c.files.len();
            let key = fnv1a(c.label.as_bytes());
            let mut order: Vec<usize> = (0..n).collect();
            for k in (1..n).rev() {
                let j = rng.below(Stream::Shuffle, key, k as u64, k as u64 + 1) as usize;
                order.swap(k, j);
            }
            let (train, test) = order.split_at(n.div_ceil(2));
            let (mut train, mut test) = (train.to_vec(), test.to_vec());
            train.sort_unstable();
            test.sort_unstable();
            ClassSplit { train, test }
        })
        .collect();
    SplitPlan { seed, classes }
}

/// Grayscale images, resized to the working size, aligned with the dataset.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub dataset: Dataset,
    pub images: Vec<Vec<GrayImage>>,
}

pub fn prepare_image(path: &Path, resize: Option<(usize, usize)>) -> Result<GrayImage> {
    let gray = image_io::read_gray(path)?;
    match resize {
        Some((r, c)) if (r, c) != gray.dims() => Ok(gray.resize_nearest(r, c)?),
        _ => Ok(gray),
    }
}

/// Decode every image in parallel. The reported error is the first failing
/// file in dataset order.
pub fn prepare(dataset: &Dataset, resize: Option<(usize, usize)>) -> Result<PreparedDataset> {
    let flat: Vec<(usize, &Path)> = dataset
        .classes
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.files.iter().map(move |f| (ci, f.as_path())))
        .collect();
    let decoded: Vec<Result<GrayImage>> = flat
        .par_iter()
        .map(|&(_, p)| prepare_image(p, resize))
        .collect();
    let mut images: Vec<Vec<GrayImage>> = dataset
        .classes
        .iter()
        .map(|c| Vec::with_capacity(c.files.len()))
        .collect();
    for ((ci, _), img) in flat.into_iter().zip(decoded) {
        images[ci].push(img?);
    }
    Ok(PreparedDataset {
        dataset: dataset.clone(),
        images,
    })
}

/// Knobs that do not change what is encoded, only how it is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub metric: Metric,
    pub weight_rule: WeightRule,
}

/// Per-pixel weight source for one run, one receptor per padded image size.
pub struct ReceptorSet {
    receptors: BTreeMap<(usize, usize), Receptor>,
    rng_draws: u64,
}

impl ReceptorSet {
    /// Random masks are sampled sequentially in size order from `cfg`'s seed.
    pub fn build(
        sizes: impl IntoIterator<Item = (usize, usize)>,
        cfg: &RunConfig,
        rule: WeightRule,
    ) -> Result<Self> {
        let rng = KeyedRng::new(cfg.sp.seed());
        let mut receptors = BTreeMap::new();
        for dims in sizes {
            let padded = cfg.tiling.padded_dims(dims.0, dims.1);
            if receptors.contains_key(&padded) {
                continue;
            }
            let receptor = match cfg.sp.init_mode() {
                InitMode::RuleBased => Receptor::RuleBased(rule),
                InitMode::RandomWeight => {
                    Receptor::RandomWeight(RandomMask::build(dims, &cfg.tiling, &cfg.sp, &rng)?)
                }
            };
            receptors.insert(padded, receptor);
        }
        Ok(Self {
            receptors,
            rng_draws: rng.draws(),
        })
    }

    pub fn rng_draws(&self) -> u64 {
        self.rng_draws
    }

    /// Every encoding stage of `image`, which must match a size given to
    /// [`ReceptorSet::build`].
    pub fn stages(&self, image: &GrayImage, cfg: &RunConfig) -> Result<EncodingStages> {
        let padded = cfg.tiling.padded_dims(image.rows(), image.cols());
        let receptor = self
            .receptors
            .get(&padded)
            .ok_or_else(|| Error::config("resize_h", format!("no receptor for size {padded:?}")))?;
        Ok(encode_stages(image, &cfg.tiling, receptor)?)
    }

    pub fn encode(&self, image: &GrayImage, cfg: &RunConfig) -> Result<EncodedImage> {
        Ok(self.stages(image, cfg)?.encoded)
    }
}

/// Every image of a prepared dataset, encoded under one configuration.
#[derive(Debug, Clone)]
pub struct EncodedDataset {
    pub encodings: Vec<Vec<EncodedImage>>,
    pub rng_draws: u64,
}

pub fn encode_dataset(
    prepared: &PreparedDataset,
    cfg: &RunConfig,
    rule: WeightRule,
) -> Result<EncodedDataset> {
    let sizes: Vec<(usize, usize)> = prepared
        .images
        .iter()
        .flatten()
        .map(GrayImage::dims)
        .collect();
    let receptors = ReceptorSet::build(sizes, cfg, rule)?;
    let encodings = prepared
        .images
        .par_iter()
        .map(|class| {
            class
                .par_iter()
                .map(|img| receptors.encode(img, cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedDataset {
        encodings,
        rng_draws: receptors.rng_draws(),
    })
}

pub fn provenance(cfg: &RunConfig) -> Provenance {
    Provenance {
        tiling: cfg.tiling,
        init_mode: cfg.sp.init_mode(),
        seed: cfg.sp.seed(),
    }
}

/// Store holding the training half of `plan`.
pub fn build_store(
    dataset: &Dataset,
    encoded: &EncodedDataset,
    plan: &SplitPlan,
    cfg: &RunConfig,
) -> Result<TemplateStore> {
    let samples = dataset
        .classes
        .iter()
        .zip(&plan.classes)
        .enumerate()
        .flat_map(|(ci, (c, s))| {
            s.train
                .iter()
                .map(move |&k| (c.label.as_str(), encoded.encodings[ci][k].clone()))
        });
    Ok(htmsp_core::train(provenance(cfg), samples)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub path: PathBuf,
    pub label: String,
    pub predicted: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
    /// Accuracy of nearest class-mean matching on the same encodings.
    pub class_mean_accuracy: f64,
    /// Generator draws spent building receptors.
    pub rng_draws: u64,
    pub predictions: Vec<Prediction>,
}

/// Encode, train on the training half, classify the test half.
pub fn evaluate(
    prepared: &PreparedDataset,
    plan: &SplitPlan,
    cfg: &RunConfig,
    opts: EvalOptions,
) -> Result<EvalOutcome> {
    let encoded = encode_dataset(prepared, cfg, opts.weight_rule)?;
    evaluate_encoded(&prepared.dataset, &encoded, plan, cfg, opts.metric)
}

pub fn evaluate_encoded(
    dataset: &Dataset,
    encoded: &EncodedDataset,
    plan: &SplitPlan,
    cfg: &RunConfig,
    metric: Metric,
) -> Result<EvalOutcome> {
    let store = build_store(dataset, encoded, plan, cfg)?;
    let means = ClassMeans::from_store(&store)?;
    let queries: Vec<(usize, usize)> = plan
        .classes
        .iter()
        .enumerate()
        .flat_map(|(ci, s)| s.test.iter().map(move |&k| (ci, k)))
        .collect();
    let results = queries
        .par_iter()
        .map(|&(ci, k)| {
            let q = &encoded.encodings[ci][k];
            Ok((classify(q, &store, metric)?, means.classify(q)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut correct = 0;
    let mut mean_correct = 0;
    let mut predictions = Vec::with_capacity(queries.len());
    for (&(ci, k), (best, mean)) in queries.iter().zip(results) {
        let class = &dataset.classes[ci];
        correct += (best.label == class.label) as usize;
        mean_correct += (mean.label == class.label) as usize;
        predictions.push(Prediction {
            path: class.files[k].clone(),
            label: class.label.clone(),
            predicted: best.label,
            score: best.score,
        });
    }
    let total = queries.len();
    let ratio = |n: usize| {
        if total == 0 {
            0.0
        } else {
            n as f64 / total as f64
        }
    };
    Ok(EvalOutcome {
        correct,
        total,
        accuracy: ratio(correct),
        class_mean_accuracy: ratio(mean_correct),
        rng_draws: encoded.rng_draws,
        predictions,
    })
}

/// One evaluation in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: InitMode,
    pub region: (usize, usize),
    pub trial: u32,
    pub seed: u64,
    pub correct: usize,
    pub total: usize,
    pub rng_draws: u64,
}

impl SweepRow {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub mode: InitMode,
    pub region: (usize, usize),
    pub trials: u32,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub block: (usize, usize),
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// One line per (mode, region) in first-seen order.
    pub fn summary(&self) -> Vec<SweepSummary> {
        let mut keys = Vec::new();
        for row in &self.rows {
            if !keys.contains(&(row.mode, row.region)) {
                keys.push((row.mode, row.region));
            }
        }
        keys.into_iter()
            .map(|(mode, region)| {
                let rows: Vec<&SweepRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.mode == mode && r.region == region)
                    .collect();
                // Means come from the integer tallies so a single rounding
                // keeps them at or below the maximum.
                let correct: usize = rows.iter().map(|r| r.correct).sum();
                let total: usize = rows.iter().map(|r| r.total).sum();
                let max = rows
                    .iter()
                    .map(|r| r.accuracy())
                    .fold(f64::NEG_INFINITY, f64::max);
                SweepSummary {
                    mode,
                    region,
                    trials: rows.len() as u32,
                    mean: correct as f64 / total as f64,
                    max,
                }
            })
            .collect()
    }

    pub fn trials_csv(&self) -> String {
        let mut out = String::from("mode,region_h,region_w,trial,seed,accuracy\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{:.6}",
                r.mode,
                r.region.0,
                r.region.1,
                r.trial,
                r.seed,
                r.accuracy()
            )
            .unwrap();
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("mode,region_h,region_w,mean_acc,max_acc\n");
        for s in self.summary() {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6}",
                s.mode, s.region.0, s.region.1, s.mean, s.max
            )
            .unwrap();
        }
        out
    }
}

/// Seed of random-weight trial `t`.
pub fn trial_seed(base: u64, t: u32) -> u64 {
    base.wrapping_add(t as u64)
}

/// Evaluate every mode at every region size. Random-weight runs `trials`
/// seeds per size; rule-based runs once. The split stays fixed.
pub fn sweep(
    prepared: &PreparedDataset,
    plan: &SplitPlan,
    cfg: &RunConfig,
    regions: &[(usize, usize)],
    modes: &[InitMode],
    trials: u32,
    opts: EvalOptions,
) -> Result<SweepReport> {
    if regions.is_empty() {
        return Err(Error::config(
            "region_h",
            "sweep needs at least one region size",
        ));
    }
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    let mut rows = Vec::new();
    for &mode in modes {
        for &region in regions {
            let base = cfg.with_region(region)?.with_init_mode(mode);
            let runs = if mode == InitMode::RuleBased {
                1
            } else {
                trials
            };
            for t in 0..runs {
                let seed = trial_seed(cfg.sp.seed(), t);
                let run = base.with_seed(seed);
                let outcome = evaluate(prepared, plan, &run, opts)?;
                rows.push(SweepRow {
                    mode,
                    region,
                    trial: t,
                    seed,
                    correct: outcome.correct,
                    total: outcome.total,
                    rng_draws: outcome.rng_draws,
                });
            }
        }
    }
    Ok(SweepReport {
        block: cfg.tiling.block(),
        rows,
    })
}
