//! Synapse state: permanences, connections and the rules that produce them.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::config::SpConfig;
use crate::error::{check_len, invalid, Result};
use crate::inhibition::Sdr;
use crate::rng::{KeyedRng, Stream};
use crate::topology::PotentialPool;

/// Exact sign of `n * x - Σ values` where `n = values.len()`, i.e. whether
/// `x` is below, at, or above the mean of `values`.
///
/// The sum is carried as a list of non-overlapping partials (Shewchuk's
/// error-free accumulation), so ties are detected exactly. An empty
/// `values` compares equal.
pub fn cmp_to_mean(x: f64, values: impl Iterator<Item = f64>) -> Ordering {
    let mut partials: Vec<f64> = Vec::new();
    let mut add = |mut v: f64| {
        let mut kept = 0;
        for k in 0..partials.len() {
            let p = partials[k];
            let (hi, lo) = if libm::fabs(v) < libm::fabs(p) {
                (p, v)
            } else {
                (v, p)
            };
            let sum = hi + lo;
            let err = lo - (sum - hi);
            if err != 0.0 {
                partials[kept] = err;
                kept += 1;
            }
            v = sum;
        }
        partials.truncate(kept);
        if v != 0.0 {
            partials.push(v);
        }
    };
    for v in values {
        add(x);
        add(-v);
    }
    // The largest partial dominates the sum of the others.
    match partials.last() {
        Some(&top) if top > 0.0 => Ordering::Greater,
        Some(&top) if top < 0.0 => Ordering::Less,
        _ => Ordering::Equal,
    }
}

/// Sparse permanences; entries exist only for potential synapses.
#[derive(Debug, Clone, PartialEq)]
pub struct PermanenceMatrix {
    num_inputs: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl PermanenceMatrix {
    /// Rows must be sorted by input index with values in `[0, 1]`.
    pub fn from_rows(num_inputs: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        for row in &rows {
            for w in row.windows(2) {
                if w[0].0 >= w[1].0 {
                    return Err(invalid(
                        "permanence",
                        "rows must be strictly sorted by input",
                    ));
                }
            }
            for &(j, v) in row {
                if j as usize >= num_inputs {
                    return Err(invalid("permanence", "input index out of range"));
                }
                if !(0.0..=1.0).contains(&v) {
                    return Err(invalid("permanence", "value outside [0, 1]"));
                }
            }
        }
        Ok(Self { num_inputs, rows })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_columns(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    /// Permanence of `(i, j)`; zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&(j as u32), |e| e.0)
            .map(|k| row[k].1)
            .unwrap_or(0.0)
    }

    /// `(i, j, value)` in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i as u32, j, v)))
    }
}

/// Sparse binary connections; stores the connected inputs of each column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionMatrix {
    num_inputs: usize,
    rows: Vec<Vec<u32>>,
}

impl ConnectionMatrix {
    pub fn from_rows(num_inputs: usize, mut rows: Vec<Vec<u32>>) -> Result<Self> {
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            if row.last().is_some_and(|&j| j as usize >= num_inputs) {
                return Err(invalid("connections", "input index out of range"));
            }
        }
        Ok(Self { num_inputs, rows })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_columns(&self) -> usize {
        self.rows.len()
    }

    /// Connected inputs of column `i`, ascending.
    pub fn connected(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.rows[i].binary_search(&(j as u32)).is_ok() as u8
    }

    pub fn count_connected(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

pub fn init_permanence_random(pool: &PotentialPool, config: &SpConfig) -> PermanenceMatrix {
    init_permanence_random_with(pool, &KeyedRng::new(config.seed()))
}

/// `S_ij = u(Permanence, i, j)` for `j ∈ PI(i)`.
pub fn init_permanence_random_with(pool: &PotentialPool, rng: &KeyedRng) -> PermanenceMatrix {
    let rows = pool
        .iter()
        .enumerate()
        .map(|(i, inputs)| {
            inputs
                .iter()
                .map(|&j| (j, rng.uniform(Stream::Permanence, i as u64, j as u64)))
                .collect()
        })
        .collect();
    PermanenceMatrix {
        num_inputs: pool.num_inputs(),
        rows,
    }
}

/// `B_ij = 1` iff `S_ij >= theta_c`.
pub fn connect_synapses(perm: &PermanenceMatrix, theta_c: f64) -> ConnectionMatrix {
    let rows = perm
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .filter(|&&(_, s)| s >= theta_c)
                .map(|&(j, _)| j)
                .collect()
        })
        .collect();
    ConnectionMatrix {
        num_inputs: perm.num_inputs,
        rows,
    }
}

/// Output of [`init_connections_rule_based`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleBasedInit {
    pub connections: ConnectionMatrix,
    /// Columns whose potential pool was empty; they get no connections.
    pub empty_columns: usize,
}

/// `B_ij = 1` iff `j ∈ PI(i)` and `x_j` is strictly above the mean of the
/// pool's input values. Consumes no randomness.
pub fn init_connections_rule_based(pool: &PotentialPool, input: &[f64]) -> Result<RuleBasedInit> {
    check_len(pool.num_inputs(), input.len())?;
    let mut empty_columns = 0;
    let rows = pool
        .iter()
        .map(|inputs| {
            if inputs.is_empty() {
                empty_columns += 1;
            }
            let values = || inputs.iter().map(|&k| input[k as usize]);
            inputs
                .iter()
                .filter(|&&j| cmp_to_mean(input[j as usize], values()) == Ordering::Greater)
                .copied()
                .collect()
        })
        .collect();
    Ok(RuleBasedInit {
        connections: ConnectionMatrix {
            num_inputs: pool.num_inputs(),
            rows,
        },
        empty_columns,
    })
}

/// Hebbian step: for every active column, pool synapses on active inputs
/// gain `perm_delta` and the rest lose it, clamped to `[0, 1]`.
pub fn hebbian_update(
    perm: &PermanenceMatrix,
    alpha: &Sdr,
    input: &[bool],
    pool: &PotentialPool,
    perm_delta: f64,
) -> Result<PermanenceMatrix> {
    check_len(perm.num_columns(), alpha.len())?;
    check_len(pool.num_columns(), alpha.len())?;
    check_len(perm.num_inputs(), input.len())?;
    if !(0.0..=1.0).contains(&perm_delta) {
        return Err(invalid("perm_delta", "must lie in [0, 1]"));
    }
    let rows = (0..perm.num_columns())
        .map(|i| {
            if !alpha.is_active(i) {
                return perm.rows[i].clone();
            }
            pool.column(i)
                .iter()
                .map(|&j| {
                    let s = perm.get(i, j as usize);
                    let step = if input[j as usize] {
                        perm_delta
                    } else {
                        -perm_delta
                    };
                    (j, (s + step).clamp(0.0, 1.0))
                })
                .collect()
        })
        .collect();
    Ok(PermanenceMatrix {
        num_inputs: perm.num_inputs,
        rows,
    })
}
