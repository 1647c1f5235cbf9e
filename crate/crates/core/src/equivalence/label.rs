//! Label normalization and the three label-similarity backends.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use super::{EquivalenceError, LabelBackend};

/// Lowercased tokens; camelCase humps, '_' and punctuation split words.
pub fn tokenize(label: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut prev_lower = false;
    for c in label.chars() {
        if c.is_alphanumeric() {
            if c.is_uppercase() && prev_lower && !cur.is_empty() {
                tokens.push(std::mem::take(&mut cur));
            }
            prev_lower = c.is_lowercase() || c.is_numeric();
            cur.extend(c.to_lowercase());
        } else {
            prev_lower = false;
            if !cur.is_empty() {
                tokens.push(std::mem::take(&mut cur));
            }
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

pub fn normalize(label: &str) -> String {
    tokenize(label).join(" ")
}

/// Synonym classes over normalized terms. Every term maps to the
/// lexicographically smallest member of its class.
#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    canonical: HashMap<String, String>,
}

impl Lexicon {
    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut parent: BTreeMap<String, String> = BTreeMap::new();
        fn find(parent: &mut BTreeMap<String, String>, x: &str) -> String {
            let mut root = x.to_owned();
            while let Some(p) = parent.get(&root) {
                if *p == root {
                    break;
                }
                root = p.clone();
            }
            let mut cur = x.to_owned();
            while cur != root {
                let next = parent.insert(cur.clone(), root.clone()).unwrap();
                cur = next;
            }
            root
        }
        for (a, b) in pairs {
            let (a, b) = (normalize(a.as_ref()), normalize(b.as_ref()));
            if a.is_empty() || b.is_empty() {
                continue;
            }
            parent.entry(a.clone()).or_insert_with(|| a.clone());
            parent.entry(b.clone()).or_insert_with(|| b.clone());
            let (ra, rb) = (find(&mut parent, &a), find(&mut parent, &b));
            if ra != rb {
                // smaller root wins so the canonical term is stable
                if ra < rb {
                    parent.insert(rb, ra);
                } else {
                    parent.insert(ra, rb);
                }
            }
        }
        let keys: Vec<String> = parent.keys().cloned().collect();
        let canonical = keys
            .into_iter()
            .map(|k| {
                let root = find(&mut parent, &k);
                (k, root)
            })
            .collect();
        Lexicon { canonical }
    }

    /// Parses `term1<TAB>term2` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, EquivalenceError> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((a, b)) = line.split_once('\t') else {
                return Err(EquivalenceError::Lexicon {
                    line: i + 1,
                    message: "expected term1<TAB>term2".into(),
                });
            };
            pairs.push((a.trim().to_owned(), b.trim().to_owned()));
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    pub fn canonical<'a>(&'a self, normalized: &'a str) -> &'a str {
        self.canonical.get(normalized).map(String::as_str).unwrap_or(normalized)
    }
}

/// Label embeddings, keyed by normalized label.
#[derive(Clone, Debug, Default)]
pub struct VectorTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl VectorTable {
    /// Parses `label<TAB>v1,v2,...,vd` lines with one fixed `d` per file.
    pub fn parse(text: &str) -> Result<Self, EquivalenceError> {
        let mut table = VectorTable::default();
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| EquivalenceError::Vectors {
                line: i + 1,
                message,
            };
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (label, values) = line
                .split_once('\t')
                .ok_or_else(|| err("expected label<TAB>v1,v2,...".into()))?;
            let v: Vec<f64> = values
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| err(format!("bad component: {e}")))?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(err("non-finite component".into()));
            }
            if table.dim == 0 {
                table.dim = v.len();
            } else if v.len() != table.dim {
                return Err(err(format!("expected {} components, found {}", table.dim, v.len())));
            }
            table.vectors.insert(normalize(label), v);
        }
        Ok(table)
    }

    pub fn insert(&mut self, label: &str, v: Vec<f64>) {
        if self.dim == 0 {
            self.dim = v.len();
        }
        assert_eq!(v.len(), self.dim, "vector dimension mismatch");
        self.vectors.insert(normalize(label), v);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn unit(&self, normalized: &str) -> Option<Vec<f64>> {
        let v = self.vectors.get(normalized)?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (norm > 0.0).then(|| v.iter().map(|x| x / norm).collect())
    }
}

/// A label with everything a backend needs precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedLabel {
    pub normalized: String,
    /// Sorted, deduplicated hashes of the lexicon-canonical tokens.
    tokens: Vec<u64>,
    unit: Option<Vec<f64>>,
}

fn token_hash(t: &str) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

#[derive(Clone, Debug, Default)]
pub struct LabelMatcher {
    pub backend: LabelBackend,
    pub lexicon: Lexicon,
    pub vectors: Option<VectorTable>,
}

impl LabelMatcher {
    pub fn new(backend: LabelBackend, lexicon: Lexicon, vectors: Option<VectorTable>) -> Self {
        LabelMatcher {
            backend,
            lexicon,
            vectors,
        }
    }

    pub fn prepare(&self, label: &str) -> PreparedLabel {
        let normalized = normalize(label);
        let mut tokens: Vec<u64> = Vec::new();
        if self.backend == LabelBackend::TokenLexical {
            let whole = self.lexicon.canonical(&normalized);
            for t in whole.split(' ').filter(|t| !t.is_empty()) {
                for c in self.lexicon.canonical(t).split(' ') {
                    tokens.push(token_hash(c));
                }
            }
            tokens.sort_unstable();
            tokens.dedup();
        }
        let unit = match (&self.backend, &self.vectors) {
            (LabelBackend::VectorFile, Some(table)) => {
                let u = table.unit(&normalized);
                if u.is_none() {
                    log::warn!("no vector for label '{label}'; it contributes 0 similarity");
                }
                u
            }
            _ => None,
        };
        PreparedLabel {
            normalized,
            tokens,
            unit,
        }
    }

    /// Similarity of two single labels, in [0, 1].
    pub fn similarity(&self, a: &PreparedLabel, b: &PreparedLabel) -> f64 {
        if a.normalized == b.normalized {
            return 1.0;
        }
        match self.backend {
            LabelBackend::Exact => 0.0,
            LabelBackend::TokenLexical => jaccard(&a.tokens, &b.tokens),
            LabelBackend::VectorFile => match (&a.unit, &b.unit) {
                (Some(x), Some(y)) => {
                    let cos: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
                    ((1.0 + cos.clamp(-1.0, 1.0)) / 2.0).clamp(0.0, 1.0)
                }
                _ => 0.0,
            },
        }
    }

    /// Maximum similarity over all label pairs; 0 when either side has none.
    pub fn best(&self, a: &[PreparedLabel], b: &[PreparedLabel]) -> f64 {
        let mut best = 0.0f64;
        for x in a {
            for y in b {
                best = best.max(self.similarity(x, y));
            }
        }
        best
    }

    pub fn label_similarity(&self, a: &[String], b: &[String]) -> f64 {
        let pa: Vec<_> = a.iter().map(|l| self.prepare(l)).collect();
        let pb: Vec<_> = b.iter().map(|l| self.prepare(l)).collect();
        self.best(&pa, &pb)
    }
}

/// Jaccard index of two sorted, deduplicated sequences.
fn jaccard(a: &[u64], b: &[u64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (a.len() + b.len() - inter) as f64
}
