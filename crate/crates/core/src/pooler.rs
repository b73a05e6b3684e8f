use alloc::vec::Vec;

use crate::boost::BoostState;
use crate::config::{InhibitMode, InitMode, SpConfig};
use crate::error::{check_len, Result};
use crate::inhibition::{
    compute_neighborhoods, compute_overlap, inhibit_mean, inhibit_percentile, NeighborhoodMap,
    OverlapVector, Sdr,
};
use crate::rng::KeyedRng;
use crate::synapse::{
    connect_synapses, hebbian_update, init_connections_rule_based, init_permanence_random_with,
    ConnectionMatrix, PermanenceMatrix,
};
use crate::topology::{build_potential_pool_with, PotentialPool, Topology};

/// A single spatial pooler region running initialization, overlap,
/// inhibition and (optionally) learning over binary input patterns.
///
/// In [`InitMode::RuleBased`] the connections are re-derived from every
/// input and permanences are never sampled; only the potential pool draws
/// from the generator, once, at construction.
#[derive(Debug)]
pub struct SpatialPooler {
    config: SpConfig,
    topology: Topology,
    pool: PotentialPool,
    permanence: Option<PermanenceMatrix>,
    connections: ConnectionMatrix,
    neighbors: NeighborhoodMap,
    boost: BoostState,
    rng: KeyedRng,
    degenerate_overlaps: u64,
    empty_pool_columns: usize,
}

impl SpatialPooler {
    pub fn new(topology: Topology, config: SpConfig) -> Result<Self> {
        let rng = KeyedRng::new(config.seed());
        let pool = build_potential_pool_with(&topology, &config, &rng)?;
        let (permanence, connections) = match config.init_mode() {
            InitMode::RandomWeight => {
                let perm = init_permanence_random_with(&pool, &rng);
                let conn = connect_synapses(&perm, config.connect_threshold());
                (Some(perm), conn)
            }
            InitMode::RuleBased => (
                None,
                ConnectionMatrix::from_rows(
                    pool.num_inputs(),
                    alloc::vec![Vec::new(); pool.num_columns()],
                )?,
            ),
        };
        let neighbors = compute_neighborhoods(&topology, config.inhibition_radius())?;
        let boost = BoostState::new(topology.num_columns());
        let empty_pool_columns = pool.iter().filter(|p| p.is_empty()).count();
        Ok(Self {
            config,
            topology,
            pool,
            permanence,
            connections,
            neighbors,
            boost,
            rng,
            degenerate_overlaps: 0,
            empty_pool_columns,
        })
    }

    /// Run one input through the pooler.
    pub fn compute(&mut self, input: &[bool], learn: bool) -> Result<Sdr> {
        check_len(self.topology.num_inputs(), input.len())?;
        if self.config.init_mode() == InitMode::RuleBased {
            let values: Vec<f64> = input.iter().map(|&b| b as u8 as f64).collect();
            self.connections = init_connections_rule_based(&self.pool, &values)?.connections;
        }
        let overlap = self.overlap(input)?;
        let dims = self.topology.column_dims();
        let active = match self.config.inhibit_mode() {
            InhibitMode::Percentile => inhibit_percentile(
                &overlap,
                &self.neighbors,
                dims,
                self.config.target_density(),
                self.config.stimulus_threshold(),
            )?,
            InhibitMode::Mean => {
                if overlap.is_all_zero() {
                    self.degenerate_overlaps += 1;
                }
                inhibit_mean(&overlap, &self.neighbors, dims)?
            }
        };
        if learn {
            if let Some(perm) = &self.permanence {
                let next =
                    hebbian_update(perm, &active, input, &self.pool, self.config.perm_delta())?;
                self.connections = connect_synapses(&next, self.config.connect_threshold());
                self.permanence = Some(next);
            }
            self.boost.step(
                &active,
                &self.neighbors,
                self.config.activity_window(),
                self.config.boost_rate(),
            )?;
        }
        Ok(active)
    }

    pub fn overlap(&self, input: &[bool]) -> Result<OverlapVector> {
        compute_overlap(&self.connections, input, &self.boost)
    }

    pub fn config(&self) -> &SpConfig {
        &self.config
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn pool(&self) -> &PotentialPool {
        &self.pool
    }

    pub fn permanence(&self) -> Option<&PermanenceMatrix> {
        self.permanence.as_ref()
    }

    pub fn connections(&self) -> &ConnectionMatrix {
        &self.connections
    }

    pub fn neighbors(&self) -> &NeighborhoodMap {
        &self.neighbors
    }

    pub fn boost(&self) -> &BoostState {
        &self.boost
    }

    /// Generator draws made so far.
    pub fn rng_draws(&self) -> u64 {
        self.rng.draws()
    }

    /// Inputs for which every overlap was zero under mean inhibition.
    pub fn degenerate_overlaps(&self) -> u64 {
        self.degenerate_overlaps
    }

    pub fn empty_pool_columns(&self) -> usize {
        self.empty_pool_columns
    }
}
