#![allow(dead_code)]

use std::path::Path;

use htmsp::image_io::write_pgm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SIDE: usize = 32;

/// Mid-gray frames with a dark square (`black`) or a bright one (`white`),
/// `per_class` images per class at slowly drifting positions.
pub fn squares(root: &Path, per_class: usize) {
    for (label, ink) in [("black", 0u8), ("white", 255u8)] {
        let dir = root.join(label);
        std::fs::create_dir_all(&dir).unwrap();
        for k in 0..per_class {
            let mut px = vec![128u8; SIDE * SIDE];
            let (r0, c0) = (8 + k, 9 + (k * 2) % 5);
            for r in r0..r0 + 12 {
                for c in c0..c0 + 12 {
                    px[r * SIDE + c] = ink;
                }
            }
            write_pgm(&dir.join(format!("{k:02}.pgm")), SIDE, SIDE, &px).unwrap();
        }
    }
}

/// `classes` random prototypes, each rendered `per_class` times with pixel
/// noise and a brightness offset.
pub fn noisy_prototypes(root: &Path, classes: usize, per_class: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in 0..classes {
        let proto: Vec<f64> = (0..SIDE * SIDE).map(|_| rng.gen::<f64>()).collect();
        let dir = root.join(format!("s{c:02}"));
        std::fs::create_dir_all(&dir).unwrap();
        for k in 0..per_class {
            let shift = rng.gen_range(-0.15..0.15);
            let px: Vec<u8> = proto
                .iter()
                .map(|&p| {
                    let v = 0.7 * p + 0.15 + shift + rng.gen_range(-0.1..0.1);
                    (v.clamp(0.0, 1.0) * 255.0).round() as u8
                })
                .collect();
            write_pgm(&dir.join(format!("{k:02}.pgm")), SIDE, SIDE, &px).unwrap();
        }
    }
}
