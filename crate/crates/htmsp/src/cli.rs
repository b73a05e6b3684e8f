//! Command-line front end.
//!
//! ```text
//! htmsp encode IMAGE --out DIR
//! htmsp train DATASET --store DIR
//! htmsp eval DATASET [--mode rule|random] [--trials N]
//! htmsp sweep DATASET --sizes 2,4,8 [--modes rule,random] --out DIR
//! ```
//!
//! Every subcommand accepts `--config FILE` and repeated `--set key=value`;
//! flags are applied after the file. Exit codes follow
//! [`Error::exit_code`](crate::error::Error::exit_code).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use htmsp_core::{InitMode, Metric, WeightRule};

use crate::bench::{self, EvalOptions, ReceptorSet};
use crate::config::{parse_override, RunConfig};
use crate::error::{Error, Result};
use crate::{image_io, store};

#[derive(Debug, Parser)]
#[command(
    name = "htmsp",
    version,
    about = "Spatial pooler face encoding and template matching"
)]
pub struct Cli {
    /// Worker threads; 0 uses every core. Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the grayscale, weight, overlap and inhibition stages of one image.
    Encode {
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Encode the training half of a dataset and save the template store.
    Train {
        dataset: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train and test on a seeded split and print the accuracy.
    Eval {
        dataset: PathBuf,
        /// Overrides `init_mode`.
        #[arg(long)]
        mode: Option<InitMode>,
        /// Overrides `trials`; only random-weight runs use more than one.
        #[arg(long)]
        trials: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate every mode over a list of inhibition region sizes.
    Sweep {
        dataset: PathBuf,
        /// Region sizes in blocks, `N` for NxN or `HxW`, comma separated.
        #[arg(long, default_value = "2,3,4,5,6,7,8")]
        sizes: String,
        /// Comma separated modes.
        #[arg(long, default_value = "rule,random")]
        modes: String,
        #[arg(long)]
        trials: Option<u32>,
        /// Directory for `sweep_trials.csv` and `sweep_summary.csv`.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args, Default)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `key=value` override, may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, default_value = "hamming")]
    pub metric: Metric,
    /// Weight a pixel only when strictly above its neighborhood mean.
    #[arg(long)]
    pub strict_weights: bool,
}

impl Common {
    fn load(&self, extra: &[(&str, String)]) -> Result<RunConfig> {
        let mut overrides = self
            .set
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>>>()?;
        overrides.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
        RunConfig::load(self.config.as_deref(), &overrides)
    }

    fn options(&self) -> EvalOptions {
        EvalOptions {
            metric: self.metric,
            weight_rule: if self.strict_weights {
                WeightRule::Strict
            } else {
                WeightRule::Inclusive
            },
        }
    }
}

/// Run `cli` on a pool of `cli.jobs` workers and return what goes to stdout.
pub fn run(cli: Cli) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Encode { image, out, common } => {
            let cfg = common.load(&[])?;
            cmd_encode(&image, &cfg, common.options().weight_rule, &out)
        }
        Command::Train {
            dataset,
            store,
            common,
        } => {
            let cfg = common.load(&[])?;
            cmd_train(&dataset, &cfg, common.options().weight_rule, &store)
        }
        Command::Eval {
            dataset,
            mode,
            trials,
            common,
        } => {
            let mut extra = Vec::new();
            if let Some(m) = mode {
                extra.push(("init_mode", m.to_string()));
            }
            if let Some(t) = trials {
                extra.push(("trials", t.to_string()));
            }
            let cfg = common.load(&extra)?;
            cmd_eval(&dataset, &cfg, common.options())
        }
        Command::Sweep {
            dataset,
            sizes,
            modes,
            trials,
            out,
            common,
        } => {
            let extra: Vec<(&str, String)> = trials
                .map(|t| ("trials", t.to_string()))
                .into_iter()
                .collect();
            let cfg = common.load(&extra)?;
            let sizes = parse_sizes(&sizes)?;
            let modes = parse_modes(&modes)?;
            cmd_sweep(&dataset, &cfg, &sizes, &modes, common.options(), &out)
        }
    }
}

/// `"2,3x4"` to `[(2, 2), (3, 4)]`.
pub fn parse_sizes(text: &str) -> Result<Vec<(usize, usize)>> {
    let bad = |s: &str| Error::config("sizes", format!("cannot parse `{s}`"));
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.split_once(['x', 'X']) {
            Some((h, w)) => Ok((
                h.trim().parse().map_err(|_| bad(s))?,
                w.trim().parse().map_err(|_| bad(s))?,
            )),
            None => s.parse().map(|n| (n, n)).map_err(|_| bad(s)),
        })
        .collect::<Result<Vec<_>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::config("sizes", "no sizes given"))
            } else {
                Ok(v)
            }
        })
}

pub fn parse_modes(text: &str) -> Result<Vec<InitMode>> {
    let mut modes = Vec::new();
    for m in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let mode: InitMode = m
            .parse()
            .map_err(|_| Error::config("modes", format!("unknown mode `{m}`")))?;
        if !modes.contains(&mode) {
            modes.push(mode);
        }
    }
    if modes.is_empty() {
        return Err(Error::config("modes", "no modes given"));
    }
    Ok(modes)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `gray.pgm`, `weights.pgm`, `overlap.pgm` and `inhibition.pgm`,
/// all at the padded working size.
pub fn cmd_encode(image: &Path, cfg: &RunConfig, rule: WeightRule, out: &Path) -> Result<String> {
    let gray = bench::prepare_image(image, cfg.resize)?;
    let receptors = ReceptorSet::build([gray.dims()], cfg, rule)?;
    let stages = receptors.stages(&gray, cfg)?;
    let (rows, cols) = stages.padded.dims();
    create_dir(out)?;
    image_io::write_gray(&out.join("gray.pgm"), &stages.padded)?;
    image_io::write_bits(&out.join("weights.pgm"), rows, cols, &stages.weights)?;
    image_io::write_gray(&out.join("overlap.pgm"), &stages.overlap)?;
    image_io::write_bits(
        &out.join("inhibition.pgm"),
        rows,
        cols,
        &stages.encoded.bits(),
    )?;
    Ok(format!(
        "{}x{} {} active {}/{}\n",
        rows,
        cols,
        cfg.sp.init_mode(),
        stages.encoded.count_ones(),
        rows * cols
    ))
}

pub fn cmd_train(
    dataset: &Path,
    cfg: &RunConfig,
    rule: WeightRule,
    store_dir: &Path,
) -> Result<String> {
    let ds = bench::load_dataset(dataset)?;
    let plan = bench::split(&ds, cfg.sp.seed());
    let prepared = bench::prepare(&ds, cfg.resize)?;
    let encoded = bench::encode_dataset(&prepared, cfg, rule)?;
    let store = bench::build_store(&ds, &encoded, &plan, cfg)?;
    store::save(&store, store_dir)?;
    Ok(format!(
        "stored {} templates in {} classes to {}\n",
        store.num_templates(),
        store.num_classes(),
        store_dir.display()
    ))
}

/// CSV rows, one per trial, then `accuracy X.XXX` with the mean.
pub fn cmd_eval(dataset: &Path, cfg: &RunConfig, opts: EvalOptions) -> Result<String> {
    let ds = bench::load_dataset(dataset)?;
    let plan = bench::split(&ds, cfg.sp.seed());
    let prepared = bench::prepare(&ds, cfg.resize)?;
    let mode = cfg.sp.init_mode();
    let report = bench::sweep(
        &prepared,
        &plan,
        cfg,
        &[cfg.tiling.region()],
        &[mode],
        cfg.trials,
        opts,
    )?;
    let mut out = report.trials_csv();
    let summary = &report.summary()[0];
    writeln!(out, "accuracy {:.3}", summary.mean).unwrap();
    if mode == InitMode::RandomWeight && summary.trials > 1 {
        writeln!(out, "max_accuracy {:.3}", summary.max).unwrap();
    }
    Ok(out)
}

pub fn cmd_sweep(
    dataset: &Path,
    cfg: &RunConfig,
    sizes: &[(usize, usize)],
    modes: &[InitMode],
    opts: EvalOptions,
    out: &Path,
) -> Result<String> {
    let ds = bench::load_dataset(dataset)?;
    let plan = bench::split(&ds, cfg.sp.seed());
    let prepared = bench::prepare(&ds, cfg.resize)?;
    let report = bench::sweep(&prepared, &plan, cfg, sizes, modes, cfg.trials, opts)?;
    create_dir(out)?;
    let trials = out.join("sweep_trials.csv");
    fs::write(&trials, report.trials_csv()).map_err(|e| Error::io(&trials, e))?;
    let summary = out.join("sweep_summary.csv");
    let text = report.summary_csv();
    fs::write(&summary, &text).map_err(|e| Error::io(&summary, e))?;
    Ok(text)
}
