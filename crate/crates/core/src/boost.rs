use alloc::vec::Vec;

use crate::error::{check_len, invalid, Result};
use crate::inhibition::{NeighborhoodMap, Sdr};

/// Boosting factors and time-averaged activity per column.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostState {
    beta: Vec<f64>,
    abar: Vec<f64>,
}

impl BoostState {
    /// Unit boosts, zero activity history.
    pub fn new(columns: usize) -> Self {
        Self {
            beta: alloc::vec![1.0; columns],
            abar: alloc::vec![0.0; columns],
        }
    }

    pub fn from_parts(beta: Vec<f64>, abar: Vec<f64>) -> Result<Self> {
        check_len(beta.len(), abar.len())?;
        if beta.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(invalid("beta", "boost factors must be positive"));
        }
        if abar.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(invalid("abar", "activity must lie in [0, 1]"));
        }
        Ok(Self { beta, abar })
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn abar(&self) -> &[f64] {
        &self.abar
    }

    /// Fold one activation into the running average and recompute boosts.
    pub fn step(
        &mut self,
        alpha: &Sdr,
        nbr: &NeighborhoodMap,
        window: u32,
        eta: f64,
    ) -> Result<()> {
        self.abar = update_time_average(&self.abar, alpha, window)?;
        let recent = recent_activity(&self.abar, nbr)?;
        self.beta = update_boost(&self.abar, &recent, eta)?;
        Ok(())
    }
}

/// `abar_i(t) = ((T - 1) * abar_i(t - 1) + alpha_i(t)) / T`.
pub fn update_time_average(abar_prev: &[f64], alpha: &Sdr, window: u32) -> Result<Vec<f64>> {
    if window < 1 {
        return Err(invalid("big_t", "must be at least 1"));
    }
    check_len(abar_prev.len(), alpha.len())?;
    let t = window as f64;
    Ok(abar_prev
        .iter()
        .zip(alpha.bits())
        .map(|(&prev, &a)| ((t - 1.0) * prev + a as u8 as f64) / t)
        .collect())
}

/// Neighborhood mean of the time-averaged activity,
/// `(1 / |N(i)|) Σ_{j ∈ N(i)} abar_j`. A column with no neighbors compares
/// against itself, which leaves its boost at 1.
pub fn recent_activity(abar: &[f64], nbr: &NeighborhoodMap) -> Result<Vec<f64>> {
    check_len(abar.len(), nbr.len())?;
    Ok((0..abar.len())
        .map(|i| {
            let neighbors = nbr.of(i);
            if neighbors.is_empty() {
                abar[i]
            } else {
                neighbors.iter().map(|&j| abar[j as usize]).sum::<f64>() / neighbors.len() as f64
            }
        })
        .collect())
}

/// `beta_i = exp(-eta * (abar_i - recent_i))`.
pub fn update_boost(abar: &[f64], recent: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_len(abar.len(), recent.len())?;
    if eta.is_nan() || eta < 0.0 {
        return Err(invalid("eta", "must be non-negative"));
    }
    Ok(abar
        .iter()
        .zip(recent)
        .map(|(&a, &r)| libm::exp(-eta * (a - r)))
        .collect())
}
