//! Neighborhoods, overlap and the two inhibition rules.

use alloc::vec::Vec;

use crate::boost::BoostState;
use crate::error::{check_len, invalid, Result};
use crate::synapse::{cmp_to_mean, ConnectionMatrix};
use crate::topology::Topology;

/// Binary column activations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sdr {
    dims: (usize, usize),
    bits: Vec<bool>,
}

impl Sdr {
    pub fn from_bits(dims: (usize, usize), bits: Vec<bool>) -> Result<Self> {
        check_len(dims.0 * dims.1, bits.len())?;
        Ok(Self { dims, bits })
    }

    pub fn zeros(dims: (usize, usize)) -> Self {
        Self {
            dims,
            bits: alloc::vec![false; dims.0 * dims.1],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Indices of active columns, ascending.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }
}

/// Per-column overlap scores.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapVector(pub Vec<f64>);

impl OverlapVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// True when every overlap is zero. Mean inhibition activates every
    /// column in that case, which callers usually want to report.
    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|&o| o == 0.0)
    }
}

/// `N(i)`: the columns within the inhibition radius of column `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodMap {
    neighbors: Vec<Vec<u32>>,
}

impl NeighborhoodMap {
    /// Explicit neighbor lists; each list is sorted and deduplicated.
    pub fn from_lists(mut neighbors: Vec<Vec<u32>>) -> Result<Self> {
        let n = neighbors.len();
        for (i, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.iter().any(|&j| j as usize == i || j as usize >= n) {
                return Err(invalid(
                    "neighbors",
                    "lists must exclude self and stay in range",
                ));
            }
        }
        Ok(Self { neighbors })
    }

    /// Every column neighbors every other column.
    pub fn fully_connected(n: usize) -> Self {
        Self {
            neighbors: (0..n)
                .map(|i| (0..n as u32).filter(|&j| j as usize != i).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn of(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }
}

/// `N(i) = { j != i : |y_i - y_j| < phi }` over column-grid coordinates.
pub fn compute_neighborhoods(topology: &Topology, phi: f64) -> Result<NeighborhoodMap> {
    if phi.is_nan() || phi <= 0.0 {
        return Err(invalid("phi", "must be positive"));
    }
    let n = topology.num_columns();
    let phi_sq = phi * phi;
    let neighbors = (0..n)
        .map(|i| {
            let (ri, ci) = topology.column_coord(i);
            (0..n)
                .filter(|&j| {
                    let (rj, cj) = topology.column_coord(j);
                    let dr = ri.abs_diff(rj) as f64;
                    let dc = ci.abs_diff(cj) as f64;
                    j != i && dr * dr + dc * dc < phi_sq
                })
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    Ok(NeighborhoodMap { neighbors })
}

/// Inhibition radius: the mean connected-input span per column scaled by
/// columns per input, never below 1.
pub fn derive_phi(topology: &Topology, connections: &ConnectionMatrix) -> f64 {
    let in_cols = topology.input_dims().1;
    let mut total = 0.0;
    let mut counted = 0usize;
    for i in 0..connections.num_columns() {
        let inputs = connections.connected(i);
        if inputs.is_empty() {
            continue;
        }
        let (mut r0, mut r1, mut c0, mut c1) = (usize::MAX, 0, usize::MAX, 0);
        for &j in inputs {
            let (r, c) = (j as usize / in_cols, j as usize % in_cols);
            r0 = r0.min(r);
            r1 = r1.max(r);
            c0 = c0.min(c);
            c1 = c1.max(c);
        }
        total += ((r1 - r0 + 1) + (c1 - c0 + 1)) as f64 / 2.0;
        counted += 1;
    }
    if counted == 0 {
        return 1.0;
    }
    let (ir, ic) = topology.input_dims();
    let (cr, cc) = topology.column_dims();
    let per_input = (cr as f64 / ir as f64 + cc as f64 / ic as f64) / 2.0;
    (total / counted as f64 * per_input).max(1.0)
}

/// `o_i = beta_i * Σ_j B_ij Z_j`.
pub fn compute_overlap(
    conn: &ConnectionMatrix,
    input: &[bool],
    boost: &BoostState,
) -> Result<OverlapVector> {
    check_len(conn.num_inputs(), input.len())?;
    check_len(conn.num_columns(), boost.len())?;
    Ok(OverlapVector(
        (0..conn.num_columns())
            .map(|i| {
                let hits = conn
                    .connected(i)
                    .iter()
                    .filter(|&&j| input[j as usize])
                    .count();
                boost.beta()[i] * hits as f64
            })
            .collect(),
    ))
}

/// 1-based nearest rank `ceil(q * n)` clamped to `[1, n]`. Products within
/// 1e-9 of an integer are snapped so that e.g. `0.9 * 10` ranks 9.
pub fn percentile_rank(n: usize, q: f64) -> usize {
    let x = q * n as f64;
    let snapped = libm::round(x);
    let rank = if libm::fabs(x - snapped) < 1e-9 {
        snapped
    } else {
        libm::ceil(x)
    };
    (rank as usize).clamp(1, n.max(1))
}

/// Nearest-rank percentile of `values` (no interpolation). `values` must be
/// non-empty.
pub fn prctile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sorted[percentile_rank(sorted.len(), q) - 1]
}

/// `alpha_i = 1` iff `o_i >= prctile(NO(i), 1 - s)` and `o_i >= theta_s`.
/// An empty neighborhood leaves only the stimulus threshold.
pub fn inhibit_percentile(
    o: &OverlapVector,
    nbr: &NeighborhoodMap,
    dims: (usize, usize),
    s: f64,
    theta_s: f64,
) -> Result<Sdr> {
    check_len(o.len(), nbr.len())?;
    check_len(dims.0 * dims.1, o.len())?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(invalid("s", "must lie in (0, 1]"));
    }
    let q = 1.0 - s;
    let mut scratch = Vec::new();
    let bits = (0..o.len())
        .map(|i| {
            let oi = o.0[i];
            if oi < theta_s {
                return false;
            }
            let neighbors = nbr.of(i);
            if neighbors.is_empty() {
                return true;
            }
            scratch.clear();
            scratch.extend(neighbors.iter().map(|&j| o.0[j as usize]));
            oi >= prctile(&scratch, q)
        })
        .collect();
    Ok(Sdr { dims, bits })
}

/// `alpha_i = 1` iff `o_i >= mean(o_j : j ∈ N(i))`. With an empty
/// neighborhood a column is active iff its overlap is positive.
pub fn inhibit_mean(o: &OverlapVector, nbr: &NeighborhoodMap, dims: (usize, usize)) -> Result<Sdr> {
    check_len(o.len(), nbr.len())?;
    check_len(dims.0 * dims.1, o.len())?;
    let bits = (0..o.len())
        .map(|i| {
            let oi = o.0[i];
            let neighbors = nbr.of(i);
            if neighbors.is_empty() {
                oi > 0.0
            } else {
                cmp_to_mean(oi, neighbors.iter().map(|&j| o.0[j as usize])).is_ge()
            }
        })
        .collect();
    Ok(Sdr { dims, bits })
}
