//! Reading PGM/PPM/PNG files into [`GrayImage`] and writing 8-bit PGM.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use htmsp_core::{to_grayscale, GrayImage};

use crate::error::{Error, Result};

/// Interleaved samples scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImage {
    pub rows: usize,
    pub cols: usize,
    pub channels: usize,
    pub samples: Vec<f64>,
}

impl RawImage {
    pub fn to_gray(&self) -> htmsp_core::Result<GrayImage> {
        to_grayscale(&self.samples, self.rows, self.cols, self.channels)
    }
}

/// Decode by content: `P2`/`P5` graymaps, `P6` pixmaps, or PNG.
pub fn decode(path: &Path, bytes: &[u8]) -> Result<RawImage> {
    match bytes {
        [b'P', b'2' | b'5' | b'6', ..] => decode_pnm(path, bytes),
        [0x89, b'P', b'N', b'G', ..] => decode_png(path, bytes),
        _ => Err(Error::image(path, "unrecognized image format")),
    }
}

pub fn read_raw(path: &Path) -> Result<RawImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(path, &bytes)
}

/// Load any supported file and convert to grayscale.
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    read_raw(path)?
        .to_gray()
        .map_err(|e| Error::image(path, e.to_string()))
}

fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<RawImage> {
    let bad = |msg: &str| Error::image(path, msg.to_string());
    let kind = bytes[1];
    let mut pos = 2;
    let mut header = [0usize; 3];
    for field in &mut header {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("malformed header"))?;
    }
    let [cols, rows, maxval] = header;
    if rows == 0 || cols == 0 {
        return Err(bad("zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    let channels = if kind == b'6' { 3 } else { 1 };
    let count = rows * cols * channels;
    let scale = maxval as f64;
    let mut samples = Vec::with_capacity(count);
    if kind == b'2' {
        let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| bad("non-ASCII raster"))?;
        for tok in text.split_ascii_whitespace().take(count) {
            let v: usize = tok.parse().map_err(|_| bad("malformed sample"))?;
            samples.push(v.min(maxval) as f64 / scale);
        }
    } else {
        // Exactly one whitespace byte separates the header from binary data.
        if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(bad("malformed header"));
        }
        pos += 1;
        let width = if maxval < 256 { 1 } else { 2 };
        let raster = bytes
            .get(pos..pos + count * width)
            .ok_or_else(|| bad("truncated raster"))?;
        if width == 1 {
            samples.extend(
                raster
                    .iter()
                    .map(|&v| (v as usize).min(maxval) as f64 / scale),
            );
        } else {
            samples.extend(
                raster.chunks_exact(2).map(|b| {
                    (u16::from_be_bytes([b[0], b[1]]) as usize).min(maxval) as f64 / scale
                }),
            );
        }
    }
    if samples.len() != count {
        return Err(bad("truncated raster"));
    }
    Ok(RawImage {
        rows,
        cols,
        channels,
        samples,
    })
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<RawImage> {
    let err = |e: png::DecodingError| Error::image(path, e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::image(path, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(err)?;
    let (rows, cols) = (info.height as usize, info.width as usize);
    let (in_channels, keep) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        png::ColorType::Indexed => return Err(Error::image(path, "unexpanded palette")),
    };
    let mut samples = Vec::with_capacity(rows * cols * keep);
    for r in 0..rows {
        let line = &buf[r * info.line_size..r * info.line_size + cols * in_channels];
        for px in line.chunks_exact(in_channels) {
            // Alpha is dropped.
            samples.extend(px[..keep].iter().map(|&v| v as f64 / 255.0));
        }
    }
    Ok(RawImage {
        rows,
        cols,
        channels: keep,
        samples,
    })
}

/// Binary 8-bit PGM bytes.
pub fn encode_pgm(rows: usize, cols: usize, samples: &[u8]) -> Vec<u8> {
    debug_assert_eq!(samples.len(), rows * cols);
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend_from_slice(samples);
    out
}

pub fn write_pgm(path: &Path, rows: usize, cols: usize, samples: &[u8]) -> Result<()> {
    fs::write(path, encode_pgm(rows, cols, samples)).map_err(|e| Error::io(path, e))
}

/// Grayscale image quantized to 8 bits.
pub fn write_gray(path: &Path, image: &GrayImage) -> Result<()> {
    let samples: Vec<u8> = image
        .pixels()
        .iter()
        .map(|&p| (p * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    write_pgm(path, image.rows(), image.cols(), &samples)
}

/// Binary mask as 0/255.
pub fn write_bits(path: &Path, rows: usize, cols: usize, bits: &[bool]) -> Result<()> {
    let samples: Vec<u8> = bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_pgm(path, rows, cols, &samples)
}
