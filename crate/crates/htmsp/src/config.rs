//! `key = value` run configuration files.
//!
//! ```text
//! # comments start with '#'
//! init_mode = rule        # rule | random
//! inhibit_mode = mean     # mean | percentile
//! block_h = 8
//! ```
//!
//! Unknown keys are rejected. Later assignments override earlier ones.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use htmsp_core::{InhibitMode, InitMode, SpConfig, TilingSpec};

use crate::error::{Error, Result};

/// Every accepted key, in the order [`RunConfig::to_text`] writes them.
pub const KEYS: &[&str] = &[
    "init_mode",
    "inhibit_mode",
    "block_h",
    "block_w",
    "region_h",
    "region_w",
    "neighborhood",
    "gamma",
    "rho",
    "theta_c",
    "theta_s",
    "s",
    "phi",
    "eta",
    "big_t",
    "perm_delta",
    "seed",
    "resize_h",
    "resize_w",
    "trials",
];

/// Validated pooler, tiling and harness settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sp: SpConfig,
    pub tiling: TilingSpec,
    /// Common working size; `None` keeps native dimensions.
    pub resize: Option<(usize, usize)>,
    /// Seeds per random-weight evaluation.
    pub trials: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RawConfig::default().build().expect("defaults are valid")
    }
}

impl RunConfig {
    /// Defaults, then the file (if any), then `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut raw = RawConfig::default();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (key, value) in parse_pairs(&text)? {
                raw.set(&key, &value)?;
            }
        }
        for (key, value) in overrides {
            raw.set(key, value)?;
        }
        raw.build()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (key, value) in parse_pairs(text)? {
            raw.set(&key, &value)?;
        }
        raw.build()
    }

    /// Same settings with different region size.
    pub fn with_region(&self, region: (usize, usize)) -> Result<Self> {
        let tiling = TilingSpec::new(self.tiling.block(), region, self.tiling.neighborhood())
            .map_err(core_to_config)?;
        Ok(Self {
            tiling,
            ..self.clone()
        })
    }

    pub fn with_block(&self, block: (usize, usize)) -> Result<Self> {
        let tiling = TilingSpec::new(block, self.tiling.region(), self.tiling.neighborhood())
            .map_err(core_to_config)?;
        Ok(Self {
            tiling,
            ..self.clone()
        })
    }

    pub fn with_init_mode(&self, mode: InitMode) -> Self {
        let sp = self
            .sp
            .to_builder()
            .init_mode(mode)
            .build()
            .expect("mode change keeps validity");
        Self { sp, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let sp = self
            .sp
            .to_builder()
            .seed(seed)
            .build()
            .expect("seed change keeps validity");
        Self { sp, ..self.clone() }
    }

    /// Canonical file form; parsing it yields an equal configuration.
    pub fn to_text(&self) -> String {
        let sp = &self.sp;
        let (rh, rw) = self.resize.unwrap_or((0, 0));
        let mut out = String::new();
        let mut put = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        put("init_mode", sp.init_mode().to_string());
        put("inhibit_mode", sp.inhibit_mode().to_string());
        put("block_h", self.tiling.block().0.to_string());
        put("block_w", self.tiling.block().1.to_string());
        put("region_h", self.tiling.region().0.to_string());
        put("region_w", self.tiling.region().1.to_string());
        put("neighborhood", self.tiling.neighborhood().to_string());
        put("gamma", sp.hypercube_edge().to_string());
        put("rho", sp.potential_fraction().to_string());
        put("theta_c", sp.connect_threshold().to_string());
        put("theta_s", sp.stimulus_threshold().to_string());
        put("s", sp.target_density().to_string());
        put("phi", sp.inhibition_radius().to_string());
        put("eta", sp.boost_rate().to_string());
        put("big_t", sp.activity_window().to_string());
        put("perm_delta", sp.perm_delta().to_string());
        put("seed", sp.seed().to_string());
        put("resize_h", rh.to_string());
        put("resize_w", rw.to_string());
        put("trials", self.trials.to_string());
        out
    }
}

fn core_to_config(e: htmsp_core::Error) -> Error {
    match e {
        htmsp_core::Error::InvalidParameter { name, reason } => Error::config(name, reason),
        other => Error::Core(other),
    }
}

/// Split a config file into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(line, format!("line {}: expected `key = value`", n + 1))
        })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Parse a `key=value` command-line override.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| Error::config(arg, "expected key=value"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug, Clone)]
struct RawConfig {
    init_mode: InitMode,
    inhibit_mode: InhibitMode,
    block: (usize, usize),
    region: (usize, usize),
    neighborhood: usize,
    gamma: u32,
    rho: f64,
    theta_c: f64,
    theta_s: f64,
    s: f64,
    phi: f64,
    eta: f64,
    big_t: u32,
    perm_delta: f64,
    seed: u64,
    resize: (usize, usize),
    trials: u32,
}

impl Default for RawConfig {
    fn default() -> Self {
        let sp = SpConfig::default();
        Self {
            init_mode: InitMode::RuleBased,
            inhibit_mode: InhibitMode::Mean,
            block: (8, 8),
            region: (4, 4),
            neighborhood: 3,
            gamma: sp.hypercube_edge(),
            rho: sp.potential_fraction(),
            theta_c: sp.connect_threshold(),
            theta_s: sp.stimulus_threshold(),
            s: sp.target_density(),
            phi: sp.inhibition_radius(),
            eta: sp.boost_rate(),
            big_t: sp.activity_window(),
            perm_delta: sp.perm_delta(),
            seed: sp.seed(),
            resize: (64, 64),
            trials: 10,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{raw}`")))
}

impl RawConfig {
    fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "init_mode" => self.init_mode = raw.parse().map_err(core_to_config)?,
            "inhibit_mode" => self.inhibit_mode = raw.parse().map_err(core_to_config)?,
            "block_h" => self.block.0 = value(key, raw)?,
            "block_w" => self.block.1 = value(key, raw)?,
            "region_h" => self.region.0 = value(key, raw)?,
            "region_w" => self.region.1 = value(key, raw)?,
            "neighborhood" => self.neighborhood = value(key, raw)?,
            "gamma" => self.gamma = value(key, raw)?,
            "rho" => self.rho = value(key, raw)?,
            "theta_c" => self.theta_c = value(key, raw)?,
            "theta_s" => self.theta_s = value(key, raw)?,
            "s" => self.s = value(key, raw)?,
            "phi" => self.phi = value(key, raw)?,
            "eta" => self.eta = value(key, raw)?,
            "big_t" => self.big_t = value(key, raw)?,
            "perm_delta" => self.perm_delta = value(key, raw)?,
            "seed" => self.seed = value(key, raw)?,
            "resize_h" => self.resize.0 = value(key, raw)?,
            "resize_w" => self.resize.1 = value(key, raw)?,
            "trials" => self.trials = value(key, raw)?,
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    fn build(self) -> Result<RunConfig> {
        let sp = SpConfig::builder()
            .init_mode(self.init_mode)
            .inhibit_mode(self.inhibit_mode)
            .hypercube_edge(self.gamma)
            .potential_fraction(self.rho)
            .connect_threshold(self.theta_c)
            .stimulus_threshold(self.theta_s)
            .target_density(self.s)
            .inhibition_radius(self.phi)
            .boost_rate(self.eta)
            .activity_window(self.big_t)
            .perm_delta(self.perm_delta)
            .seed(self.seed)
            .build()
            .map_err(core_to_config)?;
        let tiling =
            TilingSpec::new(self.block, self.region, self.neighborhood).map_err(core_to_config)?;
        let resize = match self.resize {
            (0, 0) => None,
            (0, _) => {
                return Err(Error::config(
                    "resize_h",
                    "zero only together with resize_w",
                ))
            }
            (_, 0) => {
                return Err(Error::config(
                    "resize_w",
                    "zero only together with resize_h",
                ))
            }
            dims => Some(dims),
        };
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        Ok(RunConfig {
            sp,
            tiling,
            resize,
            trials: self.trials,
        })
    }
}
