//! Block encoder for grayscale images.
//!
//! An image is padded to whole inhibition regions, cut into receptor
//! blocks, and each block is weighted pixel-by-pixel. The mean of the
//! weighted block is its overlap; blocks above their region's mean stay
//! active and keep their weight bits, the rest are zeroed.

use alloc::vec::Vec;

use crate::config::InitMode;
use crate::config::SpConfig;
use crate::error::{check_len, invalid, Error, Result};
use crate::flat::{FlatMatrix, MatrixKind};
use crate::rng::{KeyedRng, Stream};
use crate::synapse::{cmp_to_mean, connect_synapses, init_permanence_random_with};
use crate::topology::PotentialPool;

/// Row-major grayscale image with pixels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("image", "dimensions must be positive"));
        }
        check_len(rows * cols, pixels.len())?;
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("image", "pixel values must lie in [0, 1]"));
        }
        Ok(Self { rows, cols, pixels })
    }

    /// 8-bit samples scaled by 1/255.
    pub fn from_u8(rows: usize, cols: usize, samples: &[u8]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            samples.iter().map(|&v| v as f64 / 255.0).collect(),
        )
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, alloc::vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.cols + c]
    }

    /// Nearest-neighbor resample; output pixel `(r, c)` reads source
    /// `(r * rows / out_rows, c * cols / out_cols)`.
    pub fn resize_nearest(&self, out_rows: usize, out_cols: usize) -> Result<Self> {
        if out_rows == 0 || out_cols == 0 {
            return Err(invalid("resize", "target dimensions must be positive"));
        }
        let mut pixels = Vec::with_capacity(out_rows * out_cols);
        for r in 0..out_rows {
            let sr = r * self.rows / out_rows;
            for c in 0..out_cols {
                pixels.push(self.get(sr, c * self.cols / out_cols));
            }
        }
        Ok(Self {
            rows: out_rows,
            cols: out_cols,
            pixels,
        })
    }

    /// Grow to `(rows, cols)` by replicating the last row and column.
    pub fn pad_edge(&self, rows: usize, cols: usize) -> Self {
        let rows = rows.max(self.rows);
        let cols = cols.max(self.cols);
        let mut pixels = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let sr = r.min(self.rows - 1);
            for c in 0..cols {
                pixels.push(self.get(sr, c.min(self.cols - 1)));
            }
        }
        Self { rows, cols, pixels }
    }

    /// Copy of the `h x w` window at `(r0, c0)`, row-major.
    pub fn window(&self, r0: usize, c0: usize, h: usize, w: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(h * w);
        for r in r0..r0 + h {
            out.extend_from_slice(&self.pixels[r * self.cols + c0..r * self.cols + c0 + w]);
        }
        out
    }
}

/// Luma of interleaved samples in `[0, 1]`: one channel passes through,
/// three channels use `0.299 R + 0.587 G + 0.114 B`.
pub fn to_grayscale(
    samples: &[f64],
    rows: usize,
    cols: usize,
    channels: usize,
) -> Result<GrayImage> {
    match channels {
        1 => GrayImage::new(rows, cols, samples.to_vec()),
        3 => {
            check_len(rows * cols * 3, samples.len())?;
            let pixels = samples
                .chunks_exact(3)
                .map(|px| (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]).clamp(0.0, 1.0))
                .collect();
            GrayImage::new(rows, cols, pixels)
        }
        n => Err(Error::UnsupportedChannels(n)),
    }
}

/// Block, region and pixel-neighborhood sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TilingSpec {
    block: (usize, usize),
    region: (usize, usize),
    neighborhood: usize,
}

impl TilingSpec {
    /// `block` in pixels, `region` in blocks, `neighborhood` the odd side
    /// of the per-pixel comparison window.
    pub fn new(block: (usize, usize), region: (usize, usize), neighborhood: usize) -> Result<Self> {
        if block.0 == 0 {
            return Err(invalid("block_h", "must be positive"));
        }
        if block.1 == 0 {
            return Err(invalid("block_w", "must be positive"));
        }
        if region.0 == 0 {
            return Err(invalid("region_h", "must be positive"));
        }
        if region.1 == 0 {
            return Err(invalid("region_w", "must be positive"));
        }
        if neighborhood == 0 || neighborhood.is_multiple_of(2) {
            return Err(invalid("neighborhood", "must be an odd positive integer"));
        }
        Ok(Self {
            block,
            region,
            neighborhood,
        })
    }

    pub fn block(&self) -> (usize, usize) {
        self.block
    }

    pub fn region(&self) -> (usize, usize) {
        self.region
    }

    pub fn neighborhood(&self) -> usize {
        self.neighborhood
    }

    /// Image dimensions rounded up to whole regions.
    pub fn padded_dims(&self, rows: usize, cols: usize) -> (usize, usize) {
        let tile_h = self.block.0 * self.region.0;
        let tile_w = self.block.1 * self.region.1;
        (
            rows.div_ceil(tile_h) * tile_h,
            cols.div_ceil(tile_w) * tile_w,
        )
    }

    /// Blocks per padded image.
    pub fn block_grid(&self, rows: usize, cols: usize) -> (usize, usize) {
        let (pr, pc) = self.padded_dims(rows, cols);
        (pr / self.block.0, pc / self.block.1)
    }

    /// Regions per padded image.
    pub fn region_grid(&self, rows: usize, cols: usize) -> (usize, usize) {
        let (br, bc) = self.block_grid(rows, cols);
        (br / self.region.0, bc / self.region.1)
    }
}

/// Comparison used when weighting a pixel against its neighborhood mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightRule {
    /// `x >= mean`
    #[default]
    Inclusive,
    /// `x > mean`
    Strict,
}

/// `W(p) = 1` iff pixel `p` is at least the mean of the `neighborhood`-sized
/// window around it, clipped at the block border.
pub fn block_weights(
    block: &[f64],
    dims: (usize, usize),
    neighborhood: usize,
    rule: WeightRule,
) -> Vec<bool> {
    let (h, w) = dims;
    debug_assert_eq!(block.len(), h * w);
    let half = neighborhood / 2;
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        let rows = r.saturating_sub(half)..(r + half + 1).min(h);
        for c in 0..w {
            let cols = c.saturating_sub(half)..(c + half + 1).min(w);
            let x = block[r * w + c];
            let window = rows
                .clone()
                .flat_map(|rr| cols.clone().map(move |cc| block[rr * w + cc]));
            let ord = cmp_to_mean(x, window);
            out.push(match rule {
                WeightRule::Inclusive => ord.is_ge(),
                WeightRule::Strict => ord.is_gt(),
            });
        }
    }
    out
}

/// Elementwise `W * block`.
pub fn apply_weights(block: &[f64], weights: &[bool]) -> Result<Vec<f64>> {
    check_len(block.len(), weights.len())?;
    Ok(block
        .iter()
        .zip(weights)
        .map(|(&x, &on)| if on { x } else { 0.0 })
        .collect())
}

/// Mean of the weighted block: the block's overlap.
pub fn block_scalar(weighted: &[f64]) -> f64 {
    if weighted.is_empty() {
        return 0.0;
    }
    weighted.iter().sum::<f64>() / weighted.len() as f64
}

/// A block is active iff its scalar is strictly above the region mean.
pub fn inhibit_region(scalars: &[f64]) -> Vec<bool> {
    scalars
        .iter()
        .map(|&s| cmp_to_mean(s, scalars.iter().copied()).is_gt())
        .collect()
}

/// Fixed per-pixel connection mask for the random-weight receptor.
///
/// Every block is a column whose potential pool is the pixels of that block
/// kept with probability `rho`; pool permanences are uniform and a pixel is
/// connected iff its permanence reaches `theta_c`. The mask is sampled once
/// and shared by every image of the same size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl RandomMask {
    /// `dims` are the unpadded image dimensions.
    pub fn build(
        dims: (usize, usize),
        tiling: &TilingSpec,
        config: &SpConfig,
        rng: &KeyedRng,
    ) -> Result<Self> {
        let (rows, cols) = tiling.padded_dims(dims.0, dims.1);
        let (bh, bw) = tiling.block();
        let (grid_r, grid_c) = (rows / bh, cols / bw);
        let rho = config.potential_fraction();
        let mut lists = Vec::with_capacity(grid_r * grid_c);
        for br in 0..grid_r {
            for bc in 0..grid_c {
                let column = (br * grid_c + bc) as u64;
                let mut pool = Vec::new();
                for r in br * bh..(br + 1) * bh {
                    for c in bc * bw..(bc + 1) * bw {
                        let j = (r * cols + c) as u32;
                        if rng.uniform(Stream::Pool, column, j as u64) < rho {
                            pool.push(j);
                        }
                    }
                }
                lists.push(pool);
            }
        }
        let pool = PotentialPool::from_lists(rows * cols, lists)?;
        let perm = init_permanence_random_with(&pool, rng);
        let conn = connect_synapses(&perm, config.connect_threshold());
        let mut bits = alloc::vec![false; rows * cols];
        for i in 0..conn.num_columns() {
            for &j in conn.connected(i) {
                bits[j as usize] = true;
            }
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Where per-pixel weights come from.
#[derive(Debug, Clone)]
pub enum Receptor {
    RuleBased(WeightRule),
    RandomWeight(RandomMask),
}

impl Receptor {
    pub fn mode(&self) -> InitMode {
        match self {
            Receptor::RuleBased(_) => InitMode::RuleBased,
            Receptor::RandomWeight(_) => InitMode::RandomWeight,
        }
    }
}

/// Bit-packed binary image plus the per-block activations that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EncodedImage {
    rows: usize,
    cols: usize,
    words: Vec<u64>,
    block_grid: (usize, usize),
    block_active: Vec<bool>,
    tiling: TilingSpec,
}

impl EncodedImage {
    pub fn from_bits(
        dims: (usize, usize),
        bits: &[bool],
        block_grid: (usize, usize),
        block_active: Vec<bool>,
        tiling: TilingSpec,
    ) -> Result<Self> {
        check_len(dims.0 * dims.1, bits.len())?;
        check_len(block_grid.0 * block_grid.1, block_active.len())?;
        let mut words = alloc::vec![0u64; bits.len().div_ceil(64)];
        for (p, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            words[p / 64] |= 1 << (p % 64);
        }
        Ok(Self {
            rows: dims.0,
            cols: dims.1,
            words,
            block_grid,
            block_active,
            tiling,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tiling(&self) -> &TilingSpec {
        &self.tiling
    }

    pub fn block_grid(&self) -> (usize, usize) {
        self.block_grid
    }

    pub fn block_active(&self) -> &[bool] {
        &self.block_active
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bit(&self, r: usize, c: usize) -> bool {
        let p = r * self.cols + c;
        self.words[p / 64] >> (p % 64) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len())
            .map(|p| self.words[p / 64] >> (p % 64) & 1 == 1)
            .collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Whether two encodings can be compared bit for bit.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.dims() == other.dims() && self.tiling == other.tiling
    }

    /// Pixel bits and block activations as two flat sections.
    pub fn to_flat(&self, mode: InitMode, seed: u64) -> (FlatMatrix, FlatMatrix) {
        let pixels = FlatMatrix {
            kind: MatrixKind::PixelBits,
            mode,
            rows: self.rows as u32,
            cols: self.cols as u32,
            seed,
            entries: (0..self.len())
                .filter(|&p| self.words[p / 64] >> (p % 64) & 1 == 1)
                .map(|p| ((p / self.cols) as u32, (p % self.cols) as u32, 1.0))
                .collect(),
        };
        let gc = self.block_grid.1;
        let blocks = FlatMatrix {
            kind: MatrixKind::BlockBits,
            mode,
            rows: self.block_grid.0 as u32,
            cols: gc as u32,
            seed,
            entries: self
                .block_active
                .iter()
                .enumerate()
                .filter(|(_, &a)| a)
                .map(|(k, _)| ((k / gc) as u32, (k % gc) as u32, 1.0))
                .collect(),
        };
        (pixels, blocks)
    }

    pub fn from_flat(pixels: &FlatMatrix, blocks: &FlatMatrix, tiling: TilingSpec) -> Result<Self> {
        if pixels.kind != MatrixKind::PixelBits || blocks.kind != MatrixKind::BlockBits {
            return Err(Error::Format("expected pixel and block bit sections"));
        }
        let unpack = |m: &FlatMatrix| -> Result<Vec<bool>> {
            let mut bits = alloc::vec![false; m.rows as usize * m.cols as usize];
            for &(i, j, v) in &m.entries {
                if v != 1.0 {
                    return Err(Error::Format("bit values must be 1"));
                }
                bits[i as usize * m.cols as usize + j as usize] = true;
            }
            Ok(bits)
        };
        let dims = (pixels.rows as usize, pixels.cols as usize);
        let grid = (blocks.rows as usize, blocks.cols as usize);
        if tiling.padded_dims(dims.0, dims.1) != dims || tiling.block_grid(dims.0, dims.1) != grid {
            return Err(Error::Format("tiling does not match encoded dimensions"));
        }
        Self::from_bits(dims, &unpack(pixels)?, grid, unpack(blocks)?, tiling)
    }
}

/// Every intermediate of one encoding, for inspection and export.
#[derive(Debug, Clone)]
pub struct EncodingStages {
    /// Input after edge padding.
    pub padded: GrayImage,
    /// Per-pixel weight mask over the padded image.
    pub weights: Vec<bool>,
    /// `W * x` over the padded image.
    pub overlap: GrayImage,
    /// Block overlaps, row-major over the block grid.
    pub block_scalars: Vec<f64>,
    pub encoded: EncodedImage,
}

/// Rule-based encoding with inclusive pixel weighting.
pub fn encode_image(gray: &GrayImage, tiling: &TilingSpec) -> Result<EncodedImage> {
    Ok(encode_stages(gray, tiling, &Receptor::RuleBased(WeightRule::Inclusive))?.encoded)
}

pub fn encode_stages(
    gray: &GrayImage,
    tiling: &TilingSpec,
    receptor: &Receptor,
) -> Result<EncodingStages> {
    let (rows, cols) = tiling.padded_dims(gray.rows(), gray.cols());
    let padded = gray.pad_edge(rows, cols);
    if let Receptor::RandomWeight(mask) = receptor {
        if mask.dims() != (rows, cols) {
            return Err(Error::DimensionMismatch {
                expected: mask.rows * mask.cols,
                actual: rows * cols,
            });
        }
    }
    let (bh, bw) = tiling.block();
    let (grid_r, grid_c) = (rows / bh, cols / bw);
    let mut weights = alloc::vec![false; rows * cols];
    let mut overlap = alloc::vec![0.0; rows * cols];
    let mut block_scalars = Vec::with_capacity(grid_r * grid_c);

    for br in 0..grid_r {
        for bc in 0..grid_c {
            let (r0, c0) = (br * bh, bc * bw);
            let block = padded.window(r0, c0, bh, bw);
            let w = match receptor {
                Receptor::RuleBased(rule) => {
                    block_weights(&block, (bh, bw), tiling.neighborhood(), *rule)
                }
                Receptor::RandomWeight(mask) => (0..bh * bw)
                    .map(|k| mask.bits[(r0 + k / bw) * cols + c0 + k % bw])
                    .collect(),
            };
            let weighted = apply_weights(&block, &w)?;
            block_scalars.push(block_scalar(&weighted));
            for k in 0..bh * bw {
                let p = (r0 + k / bw) * cols + c0 + k % bw;
                weights[p] = w[k];
                overlap[p] = weighted[k];
            }
        }
    }

    let (rh, rw) = tiling.region();
    let mut block_active = alloc::vec![false; grid_r * grid_c];
    let mut region_scalars = Vec::with_capacity(rh * rw);
    for rr in 0..grid_r / rh {
        for rc in 0..grid_c / rw {
            let members = || {
                (0..rh).flat_map(move |dr| {
                    (0..rw).map(move |dc| (rr * rh + dr) * grid_c + rc * rw + dc)
                })
            };
            region_scalars.clear();
            region_scalars.extend(members().map(|b| block_scalars[b]));
            for (b, on) in members().zip(inhibit_region(&region_scalars)) {
                block_active[b] = on;
            }
        }
    }

    let bits: Vec<bool> = (0..rows * cols)
        .map(|p| weights[p] && block_active[(p / cols / bh) * grid_c + (p % cols) / bw])
        .collect();
    let encoded =
        EncodedImage::from_bits((rows, cols), &bits, (grid_r, grid_c), block_active, *tiling)?;
    Ok(EncodingStages {
        padded,
        weights,
        overlap: GrayImage {
            rows,
            cols,
            pixels: overlap,
        },
        block_scalars,
        encoded,
    })
}
