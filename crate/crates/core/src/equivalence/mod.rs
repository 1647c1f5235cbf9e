//! Tiered semantic equivalence of etypes and the cross-schema mapping.
//!
//! A pair is decided by labels first. Property names are consulted only when
//! labels are inconclusive, and shared instances only when both fail:
//!
//! ```text
//! sim_L > T_L              => equivalent, score = sim_L
//! sim_P > T_p              => equivalent, score = sim_L + sim_P
//! otherwise score = sim_L + sim_P + sim_I, equivalent iff score > T_s
//! ```

mod assignment;
mod label;
mod mapping;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Etype, Skg};

pub use assignment::max_weight_assignment;
pub use label::{normalize, tokenize, LabelMatcher, Lexicon, PreparedLabel, VectorTable};
pub use mapping::{build_mapping, EquivalenceGroup, EquivalenceMapping, EtypeRef, MappingOptions, PairDecision};

#[derive(Debug, Error)]
pub enum EquivalenceError {
    #[error("invalid similarity configuration: {0}")]
    InvalidConfig(String),
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("vector file line {line}: {message}")]
    Vectors { line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("at least two schemas are required, got {0}")]
    TooFewSchemas(usize),
    #[error("reference schema '{0}' is not among the inputs")]
    UnknownReference(String),
    #[error("schema name '{0}' appears more than once")]
    DuplicateSchema(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropertyMode {
    #[default]
    PaperLiteral,
    NormalizedBestMatch,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelBackend {
    Exact,
    #[default]
    TokenLexical,
    VectorFile,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilarityConfig {
    pub t_label: f64,
    pub t_property: f64,
    pub t_overall: f64,
    #[serde(default)]
    pub property_mode: PropertyMode,
    #[serde(default)]
    pub label_backend: LabelBackend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_path: Option<PathBuf>,
    /// Count data-property names as properties.
    #[serde(default = "yes")]
    pub use_data_properties: bool,
    /// Count labels of incident object properties as properties.
    #[serde(default = "yes")]
    pub use_object_properties: bool,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self::for_mode(PropertyMode::PaperLiteral)
    }
}

impl SimilarityConfig {
    /// Default thresholds for a property mode.
    pub fn for_mode(mode: PropertyMode) -> Self {
        SimilarityConfig {
            t_label: 0.85,
            t_property: match mode {
                PropertyMode::PaperLiteral => 1.5,
                PropertyMode::NormalizedBestMatch => 0.7,
            },
            t_overall: 0.5,
            property_mode: mode,
            label_backend: LabelBackend::TokenLexical,
            lexicon_path: None,
            vector_path: None,
            use_data_properties: true,
            use_object_properties: true,
        }
    }

    pub fn validate(&self) -> Result<(), EquivalenceError> {
        let bad = |m: String| Err(EquivalenceError::InvalidConfig(m));
        for (name, t) in [
            ("t_label", self.t_label),
            ("t_property", self.t_property),
            ("t_overall", self.t_overall),
        ] {
            if !t.is_finite() || t < 0.0 {
                return bad(format!("{name} must be a finite number >= 0, got {t}"));
            }
        }
        if self.t_overall >= self.t_label {
            return bad(format!(
                "t_overall ({}) must be below t_label ({})",
                self.t_overall, self.t_label
            ));
        }
        if self.t_overall >= self.t_property {
            return bad(format!(
                "t_overall ({}) must be below t_property ({})",
                self.t_overall, self.t_property
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Label,
    Property,
    Individual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub sim_l: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim_i: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceDecision {
    pub score: f64,
    pub equivalent: bool,
    pub tier: Tier,
    pub components: Components,
    /// Set when the individual tier ran but one side had no instances.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub individuals_not_applicable: bool,
}

/// An etype with its labels, property names and instances preprocessed.
#[derive(Clone, Debug)]
pub struct EtypeProfile {
    pub id: String,
    pub anonymous: bool,
    labels: Vec<PreparedLabel>,
    properties: Vec<PreparedLabel>,
    instances: Vec<String>,
}

impl EtypeProfile {
    pub fn property_names(&self) -> impl Iterator<Item = &str> {
        self.properties.iter().map(|p| p.normalized.as_str())
    }
}

/// Overlap of two instance lists, or `None` when either is empty.
pub fn individual_similarity(u: &[String], v: &[String]) -> Option<f64> {
    let mut a: Vec<&str> = u.iter().map(String::as_str).collect();
    let mut b: Vec<&str> = v.iter().map(String::as_str).collect();
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    sorted_overlap(&a, &b)
}

fn sorted_overlap<T: Ord>(a: &[T], b: &[T]) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let (mut i, mut j, mut shared) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Some(shared as f64 / a.len().min(b.len()) as f64)
}

fn read(path: &Path) -> Result<String, EquivalenceError> {
    std::fs::read_to_string(path).map_err(|source| EquivalenceError::Io {
        path: path.to_owned(),
        source,
    })
}

/// A validated configuration bundled with its loaded lexicon and vectors.
#[derive(Clone, Debug)]
pub struct Matcher {
    pub config: SimilarityConfig,
    pub labels: LabelMatcher,
}

impl Matcher {
    /// Validates `config` and loads the files it names.
    pub fn new(config: SimilarityConfig) -> Result<Self, EquivalenceError> {
        let lexicon = match &config.lexicon_path {
            Some(p) => Lexicon::parse(&read(p)?)?,
            None => Lexicon::default(),
        };
        let vectors = match &config.vector_path {
            Some(p) => Some(VectorTable::parse(&read(p)?)?),
            None => None,
        };
        Self::with_resources(config, lexicon, vectors)
    }

    /// Like [`Matcher::new`] but with an in-memory lexicon and vectors.
    pub fn with_resources(
        config: SimilarityConfig,
        lexicon: Lexicon,
        vectors: Option<VectorTable>,
    ) -> Result<Self, EquivalenceError> {
        config.validate()?;
        if config.label_backend == LabelBackend::VectorFile && vectors.is_none() {
            return Err(EquivalenceError::InvalidConfig(
                "vector-file backend needs vector_path".into(),
            ));
        }
        let labels = LabelMatcher::new(config.label_backend, lexicon, vectors);
        Ok(Matcher { config, labels })
    }

    pub fn profile(&self, skg: &Skg, etype: &Etype) -> EtypeProfile {
        let mut names: Vec<&str> = Vec::new();
        if self.config.use_data_properties {
            names.extend(etype.data_properties.iter().map(String::as_str));
        }
        if self.config.use_object_properties {
            for p in skg.incident_properties(&etype.id) {
                match p.labels.first() {
                    Some(_) => names.extend(p.labels.iter().map(String::as_str)),
                    None => names.push(&p.id),
                }
            }
        }
        let mut properties: Vec<PreparedLabel> = names.iter().map(|n| self.labels.prepare(n)).collect();
        // one entry per distinct normalized name, in a fixed order
        properties.sort_by(|a, b| a.normalized.cmp(&b.normalized));
        properties.dedup_by(|a, b| a.normalized == b.normalized);
        let mut instances = etype.instances.clone();
        instances.sort_unstable();
        instances.dedup();
        EtypeProfile {
            id: etype.id.clone(),
            anonymous: etype.anonymous,
            labels: if etype.anonymous {
                Vec::new()
            } else {
                etype.labels.iter().map(|l| self.labels.prepare(l)).collect()
            },
            properties,
            instances,
        }
    }

    pub fn label_similarity(&self, u: &EtypeProfile, v: &EtypeProfile) -> f64 {
        self.labels.best(&u.labels, &v.labels)
    }

    pub fn property_similarity(&self, u: &EtypeProfile, v: &EtypeProfile) -> f64 {
        let (mut u, mut v) = (u, v);
        if u.property_names().cmp(v.property_names()) == std::cmp::Ordering::Greater {
            std::mem::swap(&mut u, &mut v);
        }
        if u.properties.is_empty() || v.properties.is_empty() {
            return 0.0;
        }
        let matrix: Vec<Vec<f64>> = u
            .properties
            .iter()
            .map(|a| v.properties.iter().map(|b| self.labels.similarity(a, b)).collect())
            .collect();
        match self.config.property_mode {
            PropertyMode::PaperLiteral => {
                let mut all: Vec<f64> = matrix.into_iter().flatten().collect();
                all.sort_by(f64::total_cmp);
                all.iter().sum()
            }
            PropertyMode::NormalizedBestMatch => {
                let (value, _) = max_weight_assignment(&matrix);
                let n = u.properties.len().max(v.properties.len()) as f64;
                (value / n).clamp(0.0, 1.0)
            }
        }
    }

    pub fn individual_similarity(&self, u: &EtypeProfile, v: &EtypeProfile) -> Option<f64> {
        sorted_overlap(&u.instances, &v.instances)
    }

    /// The tiered decision for one pair of etypes.
    pub fn decide(&self, u: &EtypeProfile, v: &EtypeProfile) -> EquivalenceDecision {
        let cfg = &self.config;
        let sim_l = self.label_similarity(u, v);
        if sim_l > cfg.t_label {
            return EquivalenceDecision {
                score: sim_l,
                equivalent: true,
                tier: Tier::Label,
                components: Components {
                    sim_l,
                    sim_p: None,
                    sim_i: None,
                },
                individuals_not_applicable: false,
            };
        }
        let sim_p = self.property_similarity(u, v);
        if sim_p > cfg.t_property {
            return EquivalenceDecision {
                score: sim_l + sim_p,
                equivalent: true,
                tier: Tier::Property,
                components: Components {
                    sim_l,
                    sim_p: Some(sim_p),
                    sim_i: None,
                },
                individuals_not_applicable: false,
            };
        }
        let ind = self.individual_similarity(u, v);
        let sim_i = ind.unwrap_or(0.0);
        let score = sim_l + sim_p + sim_i;
        EquivalenceDecision {
            score,
            equivalent: score > cfg.t_overall,
            tier: Tier::Individual,
            components: Components {
                sim_l,
                sim_p: Some(sim_p),
                sim_i: Some(sim_i),
            },
            individuals_not_applicable: ind.is_none(),
        }
    }

    /// Convenience wrapper that profiles both etypes and decides.
    pub fn semantic_similarity(
        &self,
        (skg_u, u): (&Skg, &Etype),
        (skg_v, v): (&Skg, &Etype),
    ) -> EquivalenceDecision {
        self.decide(&self.profile(skg_u, u), &self.profile(skg_v, v))
    }
}
