use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error, Result};

/// How synapse connections are initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum InitMode {
    /// Uniform random permanences thresholded at the connection threshold.
    RandomWeight,
    /// Connect an input iff it exceeds the mean of its potential pool.
    #[default]
    RuleBased,
}

/// How active columns are selected from overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum InhibitMode {
    /// Neighborhood percentile (k-winners-take-all).
    Percentile,
    /// Overlap at least the neighborhood mean.
    #[default]
    Mean,
}

impl InitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InitMode::RandomWeight => "random",
            InitMode::RuleBased => "rule",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            InitMode::RandomWeight => 0,
            InitMode::RuleBased => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(InitMode::RandomWeight),
            1 => Some(InitMode::RuleBased),
            _ => None,
        }
    }
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "random_weight" | "RandomWeight" => Ok(InitMode::RandomWeight),
            "rule" | "rule_based" | "RuleBased" => Ok(InitMode::RuleBased),
            other => Err(invalid(
                "init_mode",
                alloc::format!("unknown mode `{other}`"),
            )),
        }
    }
}

impl InhibitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InhibitMode::Percentile => "percentile",
            InhibitMode::Mean => "mean",
        }
    }
}

impl fmt::Display for InhibitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InhibitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "percentile" | "Percentile" => Ok(InhibitMode::Percentile),
            "mean" | "Mean" => Ok(InhibitMode::Mean),
            other => Err(invalid(
                "inhibit_mode",
                alloc::format!("unknown mode `{other}`"),
            )),
        }
    }
}

/// Validated spatial pooler hyperparameters.
///
/// Values can only be obtained through [`SpConfigBuilder::build`], which
/// rejects anything out of range.
#[derive(Debug, Clone, PartialEq)]
pub struct SpConfig {
    hypercube_edge: u32,
    potential_fraction: f64,
    connect_threshold: f64,
    stimulus_threshold: f64,
    target_density: f64,
    inhibition_radius: f64,
    boost_rate: f64,
    activity_window: u32,
    perm_delta: f64,
    init_mode: InitMode,
    inhibit_mode: InhibitMode,
    seed: u64,
}

impl Default for SpConfig {
    fn default() -> Self {
        Self {
            hypercube_edge: 5,
            potential_fraction: 0.5,
            connect_threshold: 0.5,
            stimulus_threshold: 0.0,
            target_density: 0.1,
            inhibition_radius: 2.5,
            boost_rate: 1.0,
            activity_window: 100,
            perm_delta: 0.05,
            init_mode: InitMode::RuleBased,
            inhibit_mode: InhibitMode::Mean,
            seed: 42,
        }
    }
}

impl SpConfig {
    pub fn builder() -> SpConfigBuilder {
        SpConfigBuilder(SpConfig::default())
    }

    /// Start a builder from an existing (already valid) configuration.
    pub fn to_builder(&self) -> SpConfigBuilder {
        SpConfigBuilder(self.clone())
    }

    /// Edge length of the input hypercube a column may sample from.
    pub fn hypercube_edge(&self) -> u32 {
        self.hypercube_edge
    }
    /// Fraction of hypercube inputs that become potential synapses.
    pub fn potential_fraction(&self) -> f64 {
        self.potential_fraction
    }
    /// Permanence at or above which a synapse is connected.
    pub fn connect_threshold(&self) -> f64 {
        self.connect_threshold
    }
    /// Minimum overlap for a column to activate.
    pub fn stimulus_threshold(&self) -> f64 {
        self.stimulus_threshold
    }
    pub fn target_density(&self) -> f64 {
        self.target_density
    }
    pub fn inhibition_radius(&self) -> f64 {
        self.inhibition_radius
    }
    pub fn boost_rate(&self) -> f64 {
        self.boost_rate
    }
    /// Number of past inputs the duty-cycle average spans.
    pub fn activity_window(&self) -> u32 {
        self.activity_window
    }
    pub fn perm_delta(&self) -> f64 {
        self.perm_delta
    }
    pub fn init_mode(&self) -> InitMode {
        self.init_mode
    }
    pub fn inhibit_mode(&self) -> InhibitMode {
        self.inhibit_mode
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn validate(&self) -> Result<()> {
        fn fraction(name: &'static str, v: f64) -> Result<()> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(name, alloc::format!("{v} is outside [0, 1]")))
            }
        }
        if self.hypercube_edge < 1 {
            return Err(invalid("gamma", "must be at least 1"));
        }
        if !(self.potential_fraction > 0.0 && self.potential_fraction <= 1.0) {
            // rho = 0 would leave every column without inputs.
            return Err(invalid(
                "rho",
                alloc::format!("{} is outside (0, 1]", self.potential_fraction),
            ));
        }
        fraction("theta_c", self.connect_threshold)?;
        if !(self.stimulus_threshold >= 0.0 && self.stimulus_threshold.is_finite()) {
            return Err(invalid("theta_s", "must be a finite non-negative number"));
        }
        if !(self.target_density > 0.0 && self.target_density <= 1.0) {
            return Err(invalid(
                "s",
                alloc::format!("{} is outside (0, 1]", self.target_density),
            ));
        }
        if !(self.inhibition_radius > 0.0 && self.inhibition_radius.is_finite()) {
            return Err(invalid("phi", "must be a finite positive number"));
        }
        if !(self.boost_rate >= 0.0 && self.boost_rate.is_finite()) {
            return Err(invalid("eta", "must be a finite non-negative number"));
        }
        if self.activity_window < 1 {
            return Err(invalid("big_t", "must be at least 1"));
        }
        fraction("perm_delta", self.perm_delta)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SpConfigBuilder(SpConfig);

macro_rules! setter {
    ($(#[$m:meta])* $name:ident: $ty:ty) => {
        $(#[$m])*
        pub fn $name(mut self, value: $ty) -> Self {
            self.0.$name = value;
            self
        }
    };
}

impl SpConfigBuilder {
    setter!(hypercube_edge: u32);
    setter!(potential_fraction: f64);
    setter!(connect_threshold: f64);
    setter!(stimulus_threshold: f64);
    setter!(target_density: f64);
    setter!(inhibition_radius: f64);
    setter!(boost_rate: f64);
    setter!(activity_window: u32);
    setter!(perm_delta: f64);
    setter!(init_mode: InitMode);
    setter!(inhibit_mode: InhibitMode);
    setter!(seed: u64);

    pub fn build(self) -> Result<SpConfig> {
        self.0.validate()?;
        Ok(self.0)
    }
}
