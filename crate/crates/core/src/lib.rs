//! HTM spatial pooler with random-weight and rule-based initialization,
//! a block encoder for grayscale images, and a nearest-template matcher.
//!
//! Everything here is a pure function of its inputs and runs without `std`.
//! File formats, datasets and the command line live in the `htmsp` crate.

#![no_std]

extern crate alloc;

pub mod boost;
pub mod config;
pub mod error;
pub mod flat;
pub mod imaging;
pub mod inhibition;
pub mod pooler;
pub mod recognizer;
pub mod rng;
pub mod synapse;
pub mod topology;

pub use boost::{recent_activity, update_boost, update_time_average, BoostState};
pub use config::{InhibitMode, InitMode, SpConfig, SpConfigBuilder};
pub use error::{Error, Result};
pub use flat::{FlatMatrix, MatrixKind};
pub use imaging::{
    apply_weights, block_scalar, block_weights, encode_image, encode_stages, inhibit_region,
    to_grayscale, EncodedImage, EncodingStages, GrayImage, RandomMask, Receptor, TilingSpec,
    WeightRule,
};
pub use inhibition::{
    compute_neighborhoods, compute_overlap, derive_phi, inhibit_mean, inhibit_percentile,
    percentile_rank, prctile, NeighborhoodMap, OverlapVector, Sdr,
};
pub use pooler::SpatialPooler;
pub use recognizer::{
    classify, classify_class_mean, score, similarity, train, ClassMeans, MatchResult, Metric,
    Provenance, TemplateStore,
};
pub use rng::{KeyedRng, Stream};
pub use synapse::{
    connect_synapses, hebbian_update, init_connections_rule_based, init_permanence_random,
    init_permanence_random_with, ConnectionMatrix, PermanenceMatrix, RuleBasedInit,
};
pub use topology::{build_potential_pool, build_potential_pool_with, PotentialPool, Topology};
