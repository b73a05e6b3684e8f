//! On-disk template store.
//!
//! ```text
//! store/
//!   manifest.json
//!   templates/c0000_t0000.htsp
//!   templates/c0000_t0001.htsp
//!   ...
//! ```
//!
//! Each template file holds the pixel-bit section followed by the
//! block-bit section in the flat binary layout. The manifest records the
//! encoding provenance and, per class in label order, the template paths.

use std::fs;
use std::path::{Path, PathBuf};

use htmsp_core::{EncodedImage, FlatMatrix, InitMode, Provenance, TemplateStore, TilingSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const FORMAT: &str = "htmsp-templates";
pub const FORMAT_VERSION: u32 = 1;
const TEMPLATE_DIR: &str = "templates";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    provenance: ManifestProvenance,
    classes: Vec<ManifestClass>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestProvenance {
    init_mode: String,
    seed: u64,
    block_h: usize,
    block_w: usize,
    region_h: usize,
    region_w: usize,
    neighborhood: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestClass {
    label: String,
    templates: Vec<String>,
}

fn store_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Store {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Write `store` under `dir`, replacing any store already there.
///
/// Refuses to touch a non-empty directory that has no manifest.
pub fn save(store: &TemplateStore, dir: &Path) -> Result<()> {
    if dir.exists() {
        let has_entries = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .next()
            .is_some();
        if has_entries && !dir.join(MANIFEST).is_file() {
            return Err(store_err(
                dir,
                "directory is not empty and holds no template store",
            ));
        }
        let old = dir.join(TEMPLATE_DIR);
        if old.exists() {
            fs::remove_dir_all(&old).map_err(|e| Error::io(&old, e))?;
        }
    }
    let tdir = dir.join(TEMPLATE_DIR);
    fs::create_dir_all(&tdir).map_err(|e| Error::io(&tdir, e))?;

    let prov = store.provenance();
    let mut classes = Vec::with_capacity(store.num_classes());
    for (ci, (label, templates)) in store.classes().enumerate() {
        let mut paths = Vec::with_capacity(templates.len());
        for (ti, t) in templates.iter().enumerate() {
            let rel = format!("{TEMPLATE_DIR}/c{ci:04}_t{ti:04}.htsp");
            let (pixels, blocks) = t.to_flat(prov.init_mode, prov.seed);
            let mut bytes = Vec::with_capacity(pixels.encoded_len() + blocks.encoded_len());
            pixels.write_to(&mut bytes);
            blocks.write_to(&mut bytes);
            let path = dir.join(&rel);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            paths.push(rel);
        }
        classes.push(ManifestClass {
            label: label.to_string(),
            templates: paths,
        });
    }

    let (bh, bw) = prov.tiling.block();
    let (rh, rw) = prov.tiling.region();
    let manifest = Manifest {
        format: FORMAT.to_string(),
        version: FORMAT_VERSION,
        provenance: ManifestProvenance {
            init_mode: prov.init_mode.to_string(),
            seed: prov.seed,
            block_h: bh,
            block_w: bw,
            region_h: rh,
            region_w: rw,
            neighborhood: prov.tiling.neighborhood(),
        },
        classes,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    let path = dir.join(MANIFEST);
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

pub fn load(dir: &Path) -> Result<TemplateStore> {
    let mpath = dir.join(MANIFEST);
    let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| store_err(&mpath, e.to_string()))?;
    if manifest.format != FORMAT || manifest.version != FORMAT_VERSION {
        return Err(store_err(
            &mpath,
            format!(
                "unsupported format {} v{}",
                manifest.format, manifest.version
            ),
        ));
    }
    let p = &manifest.provenance;
    let init_mode: InitMode = p
        .init_mode
        .parse()
        .map_err(|e: htmsp_core::Error| store_err(&mpath, e.to_string()))?;
    let tiling = TilingSpec::new(
        (p.block_h, p.block_w),
        (p.region_h, p.region_w),
        p.neighborhood,
    )
    .map_err(|e| store_err(&mpath, e.to_string()))?;
    let mut store = TemplateStore::new(Provenance {
        tiling,
        init_mode,
        seed: p.seed,
    });
    for class in &manifest.classes {
        for rel in &class.templates {
            let path: PathBuf = dir.join(rel);
            let t = read_template(&path, &tiling, init_mode, p.seed)?;
            store
                .insert(class.label.clone(), t)
                .map_err(|e| store_err(&path, e.to_string()))?;
        }
    }
    if store.is_empty() {
        return Err(store_err(&mpath, "store holds no templates"));
    }
    Ok(store)
}

fn read_template(
    path: &Path,
    tiling: &TilingSpec,
    mode: InitMode,
    seed: u64,
) -> Result<EncodedImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |e: htmsp_core::Error| store_err(path, e.to_string());
    let (pixels, rest) = FlatMatrix::read_from(&bytes).map_err(bad)?;
    let (blocks, rest) = FlatMatrix::read_from(rest).map_err(bad)?;
    if !rest.is_empty() {
        return Err(store_err(path, "trailing bytes after template"));
    }
    for m in [&pixels, &blocks] {
        if m.mode != mode || m.seed != seed {
            return Err(store_err(path, "template provenance differs from manifest"));
        }
    }
    EncodedImage::from_flat(&pixels, &blocks, *tiling).map_err(bad)
}
