use alloc::vec::Vec;
use core::ops::RangeInclusive;

use crate::config::SpConfig;
use crate::error::{invalid, Error, Result};
use crate::rng::{KeyedRng, Stream};

/// Input grid, column grid and the input-space center of every column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    input_dims: (usize, usize),
    column_dims: (usize, usize),
    centers: Vec<(usize, usize)>,
}

impl Topology {
    /// Column `(r, c)` is centered on the input cell containing the
    /// scaled point `((r + 0.5) * in_rows / col_rows, (c + 0.5) * in_cols / col_cols)`.
    pub fn new(input_dims: (usize, usize), column_dims: (usize, usize)) -> Result<Self> {
        if input_dims.0 == 0 || input_dims.1 == 0 {
            return Err(invalid("input_dims", "must be positive"));
        }
        if column_dims.0 == 0 || column_dims.1 == 0 {
            return Err(invalid("column_dims", "must be positive"));
        }
        let scale = |idx: usize, cols: usize, inputs: usize| (2 * idx + 1) * inputs / (2 * cols);
        let mut centers = Vec::with_capacity(column_dims.0 * column_dims.1);
        for r in 0..column_dims.0 {
            for c in 0..column_dims.1 {
                centers.push((
                    scale(r, column_dims.0, input_dims.0),
                    scale(c, column_dims.1, input_dims.1),
                ));
            }
        }
        Ok(Self {
            input_dims,
            column_dims,
            centers,
        })
    }

    pub fn input_dims(&self) -> (usize, usize) {
        self.input_dims
    }

    pub fn column_dims(&self) -> (usize, usize) {
        self.column_dims
    }

    pub fn num_inputs(&self) -> usize {
        self.input_dims.0 * self.input_dims.1
    }

    pub fn num_columns(&self) -> usize {
        self.column_dims.0 * self.column_dims.1
    }

    pub fn centers(&self) -> &[(usize, usize)] {
        &self.centers
    }

    /// Column-grid coordinate of a flat column index.
    pub fn column_coord(&self, column: usize) -> (usize, usize) {
        (column / self.column_dims.1, column % self.column_dims.1)
    }

    /// Rows and columns covered by the `edge`-sized hypercube around
    /// `column`, clipped at the input borders. For even edges the extra
    /// cell lies after the center.
    pub fn hypercube(
        &self,
        column: usize,
        edge: u32,
    ) -> (RangeInclusive<usize>, RangeInclusive<usize>) {
        let (cr, cc) = self.centers[column];
        let edge = edge as usize;
        let axis = |center: usize, len: usize| {
            let lo = center.saturating_sub((edge - 1) / 2);
            let hi = (center + edge / 2).min(len - 1);
            lo..=hi
        };
        (axis(cr, self.input_dims.0), axis(cc, self.input_dims.1))
    }
}

/// Per-column sorted list of flat input indices a column may connect to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialPool {
    num_inputs: usize,
    columns: Vec<Vec<u32>>,
}

impl PotentialPool {
    /// Build from explicit lists; each list is sorted and deduplicated.
    pub fn from_lists(num_inputs: usize, mut columns: Vec<Vec<u32>>) -> Result<Self> {
        for list in &mut columns {
            list.sort_unstable();
            list.dedup();
            if let Some(&last) = list.last() {
                if last as usize >= num_inputs {
                    return Err(Error::DimensionMismatch {
                        expected: num_inputs,
                        actual: last as usize + 1,
                    });
                }
            }
        }
        Ok(Self {
            num_inputs,
            columns,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, i: usize) -> &[u32] {
        &self.columns[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.columns.iter().map(Vec::as_slice)
    }
}

/// Potential pool with the generator derived from `config.seed()`.
pub fn build_potential_pool(topology: &Topology, config: &SpConfig) -> Result<PotentialPool> {
    build_potential_pool_with(topology, config, &KeyedRng::new(config.seed()))
}

/// `PI(i) = { j in hypercube(i) : u(Pool, i, j) < rho }`.
pub fn build_potential_pool_with(
    topology: &Topology,
    config: &SpConfig,
    rng: &KeyedRng,
) -> Result<PotentialPool> {
    let in_cols = topology.input_dims().1;
    let rho = config.potential_fraction();
    let mut columns = Vec::with_capacity(topology.num_columns());
    for i in 0..topology.num_columns() {
        let (rows, cols) = topology.hypercube(i, config.hypercube_edge());
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::EmptyHypercube { column: i });
        }
        let mut pool = Vec::new();
        for r in rows {
            for c in cols.clone() {
                let j = r * in_cols + c;
                if rng.uniform(Stream::Pool, i as u64, j as u64) < rho {
                    pool.push(j as u32);
                }
            }
        }
        columns.push(pool);
    }
    Ok(PotentialPool {
        num_inputs: topology.num_inputs(),
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_lie_inside_input() {
        for (inp, col) in [
            ((4, 4), (2, 2)),
            ((7, 3), (5, 9)),
            ((1, 1), (3, 3)),
            ((10, 20), (10, 20)),
        ] {
            let t = Topology::new(inp, col).unwrap();
            assert_eq!(t.centers().len(), col.0 * col.1);
            for &(r, c) in t.centers() {
                assert!(r < inp.0 && c < inp.1);
            }
        }
    }

    #[test]
    fn identity_topology_centers_on_itself() {
        let t = Topology::new((3, 3), (3, 3)).unwrap();
        assert_eq!(t.centers()[4], (1, 1));
        assert_eq!(t.centers()[8], (2, 2));
    }

    #[test]
    fn hypercube_is_clipped() {
        let t = Topology::new((4, 4), (2, 2)).unwrap();
        // Column 0 is centered on (1, 1); column 3 on (3, 3).
        assert_eq!(t.hypercube(0, 3), (0..=2, 0..=2));
        assert_eq!(t.hypercube(3, 3), (2..=3, 2..=3));
        assert_eq!(t.hypercube(3, 1), (3..=3, 3..=3));
    }

    #[test]
    fn full_fraction_takes_whole_hypercube() {
        let t = Topology::new((6, 5), (3, 2)).unwrap();
        let cfg = SpConfig::builder()
            .potential_fraction(1.0)
            .hypercube_edge(3)
            .build()
            .unwrap();
        let pool = build_potential_pool(&t, &cfg).unwrap();
        for i in 0..t.num_columns() {
            let (rows, cols) = t.hypercube(i, 3);
            assert_eq!(pool.column(i).len(), rows.count() * cols.count());
        }
    }

    #[test]
    fn zero_topology_rejected() {
        assert!(Topology::new((0, 3), (1, 1)).is_err());
        assert!(Topology::new((3, 3), (1, 0)).is_err());
    }

    #[test]
    fn from_lists_sorts_and_dedups() {
        let p = PotentialPool::from_lists(5, alloc::vec![alloc::vec![3, 1, 3]]).unwrap();
        assert_eq!(p.column(0), &[1, 3]);
        assert!(PotentialPool::from_lists(2, alloc::vec![alloc::vec![2]]).is_err());
    }
}
