//! Nearest-template classification over encoded images.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::config::InitMode;
use crate::error::{invalid, Error, Result};
use crate::imaging::{EncodedImage, TilingSpec};

/// Similarity between two binary encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Fraction of agreeing bits.
    #[default]
    Hamming,
    /// `|a AND b| / sqrt(|a| |b|)`; two empty encodings score 1.
    Cosine,
}

impl core::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(Metric::Hamming),
            "cosine" => Ok(Metric::Cosine),
            other => Err(invalid(
                "metric",
                alloc::format!("unknown metric `{other}`"),
            )),
        }
    }
}

fn check_shape(a: &EncodedImage, b: &EncodedImage) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        })
    }
}

/// Hamming similarity in `[0, 1]`.
pub fn similarity(a: &EncodedImage, b: &EncodedImage) -> Result<f64> {
    score(a, b, Metric::Hamming)
}

pub fn score(a: &EncodedImage, b: &EncodedImage, metric: Metric) -> Result<f64> {
    check_shape(a, b)?;
    if a.is_empty() {
        return Ok(1.0);
    }
    let pairs = a.words().iter().zip(b.words());
    Ok(match metric {
        Metric::Hamming => {
            // Padding bits past the end are zero in both, so they never differ.
            let differ: u32 = pairs.map(|(x, y)| (x ^ y).count_ones()).sum();
            1.0 - differ as f64 / a.len() as f64
        }
        Metric::Cosine => {
            let both: u32 = pairs.map(|(x, y)| (x & y).count_ones()).sum();
            let (na, nb) = (a.count_ones(), b.count_ones());
            match (na, nb) {
                (0, 0) => 1.0,
                (0, _) | (_, 0) => 0.0,
                _ => both as f64 / libm::sqrt(na as f64 * nb as f64),
            }
        }
    })
}

/// Settings recorded alongside stored templates.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub tiling: TilingSpec,
    pub init_mode: InitMode,
    pub seed: u64,
}

/// Class label to stored encodings, labels in lexicographic order and
/// templates in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateStore {
    provenance: Provenance,
    classes: BTreeMap<String, Vec<EncodedImage>>,
}

impl TemplateStore {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            provenance,
            classes: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, label: impl Into<String>, template: EncodedImage) -> Result<()> {
        if template.tiling() != &self.provenance.tiling {
            return Err(invalid("template", "tiling differs from the store"));
        }
        if let Some(first) = self.classes.values().next().and_then(|v| v.first()) {
            check_shape(first, &template)?;
        }
        self.classes.entry(label.into()).or_default().push(template);
        Ok(())
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn classes(&self) -> impl Iterator<Item = (&str, &[EncodedImage])> {
        self.classes.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn num_templates(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Store every `(label, encoding)` pair in order.
pub fn train<'a, I>(provenance: Provenance, samples: I) -> Result<TemplateStore>
where
    I: IntoIterator<Item = (&'a str, EncodedImage)>,
{
    let mut store = TemplateStore::new(provenance);
    for (label, enc) in samples {
        store.insert(label, enc)?;
    }
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    Ok(store)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub label: String,
    pub score: f64,
    /// Best score per class, in label order.
    pub per_class: Vec<(String, f64)>,
}

fn pick(per_class: Vec<(String, f64)>) -> Result<MatchResult> {
    // Labels arrive sorted, so keeping the first maximum breaks ties toward
    // the lexicographically smallest label.
    let (best, _) = per_class
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (k, &(_, s))| match acc {
            Some((_, top)) if top >= s => acc,
            _ => Some((k, s)),
        })
        .ok_or(Error::EmptyStore)?;
    Ok(MatchResult {
        label: per_class[best].0.clone(),
        score: per_class[best].1,
        per_class,
    })
}

/// Class of the most similar stored template.
pub fn classify(
    query: &EncodedImage,
    store: &TemplateStore,
    metric: Metric,
) -> Result<MatchResult> {
    let mut per_class = Vec::with_capacity(store.num_classes());
    for (label, templates) in &store.classes {
        let mut best = f64::NEG_INFINITY;
        for t in templates {
            best = best.max(score(query, t, metric)?);
        }
        per_class.push((label.clone(), best));
    }
    pick(per_class)
}

/// Per-bit activation rate of every class, for nearest class-mean matching.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMeans {
    template: EncodedImage,
    classes: Vec<(String, Vec<f64>)>,
}

impl ClassMeans {
    pub fn from_store(store: &TemplateStore) -> Result<Self> {
        let template = store
            .classes
            .values()
            .flat_map(|v| v.first())
            .next()
            .ok_or(Error::EmptyStore)?
            .clone();
        let classes = store
            .classes
            .iter()
            .map(|(label, templates)| {
                let mut counts = alloc::vec![0u32; template.len()];
                for t in templates {
                    for (c, b) in counts.iter_mut().zip(t.bits()) {
                        *c += b as u32;
                    }
                }
                let n = templates.len() as f64;
                (
                    label.clone(),
                    counts.into_iter().map(|c| c as f64 / n).collect(),
                )
            })
            .collect();
        Ok(Self { template, classes })
    }

    /// Score is one minus the mean absolute difference between the query
    /// bits and the class rates.
    pub fn classify(&self, query: &EncodedImage) -> Result<MatchResult> {
        check_shape(&self.template, query)?;
        let q = query.bits();
        let per_class = self
            .classes
            .iter()
            .map(|(label, rates)| {
                let dist: f64 = q
                    .iter()
                    .zip(rates)
                    .map(|(&b, &r)| libm::fabs(b as u8 as f64 - r))
                    .sum();
                (label.clone(), 1.0 - dist / q.len().max(1) as f64)
            })
            .collect();
        pick(per_class)
    }
}

/// Class whose mean template is closest; see [`ClassMeans::classify`].
pub fn classify_class_mean(query: &EncodedImage, store: &TemplateStore) -> Result<MatchResult> {
    ClassMeans::from_store(store)?.classify(query)
}
