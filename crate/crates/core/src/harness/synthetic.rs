//! Seeded synthetic schema pairs with a known ground-truth mapping.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::equivalence::{EquivalenceMapping, EtypeRef};
use crate::model::{Etype, IsA, ObjectProperty, Skg};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n_etypes: usize,
    /// Fraction of ordered etype pairs joined by a property.
    pub edge_density: f64,
    pub is_a_depth: u8,
    /// Fraction of X's etypes that reappear in Y.
    pub overlap_fraction: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            seed: 0,
            n_etypes: 20,
            edge_density: 0.1,
            is_a_depth: 1,
            overlap_fraction: 0.5,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_etypes == 0 {
            return Err("n_etypes must be at least 1".into());
        }
        for (name, v) in [("edge_density", self.edge_density), ("overlap_fraction", self.overlap_fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.is_a_depth > 3 {
            return Err(format!("is_a_depth must be at most 3, got {}", self.is_a_depth));
        }
        Ok(())
    }

    /// Density that yields `properties` edges among `n` etypes.
    pub fn density_for(n: usize, properties: usize) -> f64 {
        if n < 2 {
            0.0
        } else {
            (properties as f64 / (n * (n - 1)) as f64).min(1.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyntheticPair {
    pub x: Skg,
    pub y: Skg,
    pub mapping: EquivalenceMapping,
}

const ONSETS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// A pronounceable word unique to `n`, at least two syllables long.
fn word(mut n: usize) -> String {
    let base = ONSETS.len() * VOWELS.len();
    let mut out = String::new();
    let mut syllables = 0;
    while n > 0 || syllables < 2 {
        let s = n % base;
        out.push(ONSETS[s / VOWELS.len()] as char);
        out.push(VOWELS[s % VOWELS.len()] as char);
        n /= base;
        syllables += 1;
    }
    out
}

struct Words(usize);

impl Words {
    fn next(&mut self) -> String {
        self.0 += 1;
        word(self.0)
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Etypes, an is-a forest, restriction etypes and random properties.
fn populate(
    skg: &mut Skg,
    rng: &mut ChaCha8Rng,
    words: &mut Words,
    density: f64,
    depth: u8,
) {
    let n = skg.etypes.len();
    let mut level = vec![0u8; n];
    if depth > 0 {
        for i in 1..n {
            if rng.random_bool(0.3) {
                let p = rng.random_range(0..i);
                if level[p] < depth {
                    level[i] = level[p] + 1;
                    let (sub, sup) = (skg.etypes[i].id.clone(), skg.etypes[p].id.clone());
                    skg.is_a_edges.push(IsA::new(sub, sup));
                }
            }
        }
    }
    let target = if n < 2 {
        0
    } else {
        (density * (n * (n - 1)) as f64).round() as usize
    };
    let restrictions = if depth > 0 && n >= 2 { (n / 10).max(1).min(target) } else { 0 };
    let plain = target - restrictions;
    let mut k = 0;
    for idx in sample(rng, n * (n - 1), plain).into_vec() {
        let d = idx / (n - 1);
        let mut r = idx % (n - 1);
        if r >= d {
            r += 1;
        }
        let mut p = ObjectProperty::new(format!("p{k}"), &skg.etypes[d].id, &skg.etypes[r].id);
        p.labels = vec![words.next()];
        skg.object_properties.push(p);
        k += 1;
    }
    for j in 0..restrictions {
        let anon = format!("_:r{j}");
        let sub = rng.random_range(0..n);
        let filler = rng.random_range(0..n);
        let mut p = ObjectProperty::new(format!("p{k}"), &anon, &skg.etypes[filler].id);
        p.labels = vec![words.next()];
        skg.object_properties.push(p);
        k += 1;
        skg.is_a_edges.push(IsA::new(&skg.etypes[sub].id, &anon));
        skg.etypes.push(Etype::anonymous(anon));
    }
}

fn fresh_etype(id: String, words: &mut Words, rng: &mut ChaCha8Rng) -> Etype {
    let label = words.next();
    let props: Vec<String> = (0..rng.random_range(2..=3)).map(|_| words.next()).collect();
    let instances: Vec<String> = (0..rng.random_range(1..=3)).map(|_| format!("urn:i:{}", words.next())).collect();
    Etype::named(id)
        .with_labels([label])
        .with_data_properties(props)
        .with_instances(instances)
}

/// Builds X, then Y from a share of X's etypes plus fresh ones. Shared
/// etypes keep their id; their Y label is perturbed so that each of the
/// three decision tiers has something to find: a case change (labels), a
/// suffix with the same data properties (properties), or a suffix with the
/// same instances (individuals).
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticPair, String> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut words = Words(0);
    let n = spec.n_etypes;

    let mut x = Skg::new("x");
    for i in 0..n {
        x.etypes.push(fresh_etype(format!("e{i}"), &mut words, &mut rng));
    }
    populate(&mut x, &mut rng, &mut words, spec.edge_density, spec.is_a_depth);

    let shared_count = ((spec.overlap_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let shared_count = shared_count.min(n);
    let mut shared: Vec<usize> = sample(&mut rng, n, shared_count).into_vec();
    shared.sort_unstable();

    let mut y = Skg::new("y");
    for &i in &shared {
        let src = &x.etypes[i];
        let fresh = fresh_etype(src.id.clone(), &mut words, &mut rng);
        let base = &src.labels[0];
        let e = match rng.random_range(0..3) {
            0 => Etype {
                labels: vec![capitalize(base)],
                ..fresh
            },
            1 => Etype {
                labels: vec![format!("{base} record")],
                data_properties: src.data_properties.clone(),
                ..fresh
            },
            _ => Etype {
                labels: vec![format!("{base} record")],
                instances: src.instances.clone(),
                ..fresh
            },
        };
        y.etypes.push(e);
    }
    for k in 0..n - shared_count {
        y.etypes.push(fresh_etype(format!("f{k}"), &mut words, &mut rng));
    }
    populate(&mut y, &mut rng, &mut words, spec.edge_density, spec.is_a_depth);

    let in_y: std::collections::HashSet<&str> = y.etypes.iter().map(|e| e.id.as_str()).collect();
    let mut groups = Vec::new();
    for e in &x.etypes {
        let mut g = vec![EtypeRef::new("x", &e.id)];
        if !e.anonymous && in_y.contains(e.id.as_str()) {
            g.push(EtypeRef::new("y", &e.id));
        }
        groups.push(g);
    }
    for e in &y.etypes {
        if e.anonymous || !x.etypes.iter().any(|xe| !xe.anonymous && xe.id == e.id) {
            groups.push(vec![EtypeRef::new("y", &e.id)]);
        }
    }
    let mapping = EquivalenceMapping::from_groups("x", groups).map_err(|e| e.to_string())?;
    Ok(SyntheticPair { x, y, mapping })
}

/// A pair built so the ablation curves have a known shape.
///
/// X has two hubs, `hub` (shared with Y) and `gate` (not shared), and 58
/// periphery etypes of which exactly half are shared. Only degrees 1 and 6
/// occur. `p29` is a subclass of `p1`, which points at `p2`, so flattening
/// adds a shared-only edge that survives removing `hub`. Y holds the 30
/// shared etypes plus 20 of its own.
pub fn hub_family() -> SyntheticPair {
    let mut x = Skg::new("hub-x");
    for id in ["hub", "gate"] {
        x.etypes.push(Etype::named(id));
    }
    for i in 1..=58 {
        x.etypes.push(Etype::named(format!("p{i}")));
    }
    for i in 3..=28 {
        x.object_properties
            .push(ObjectProperty::new(format!("h{i}"), "hub", format!("p{i}")));
    }
    for i in 30..=58 {
        x.object_properties
            .push(ObjectProperty::new(format!("g{i}"), "gate", format!("p{i}")));
    }
    x.object_properties.push(ObjectProperty::new("link", "p1", "p2"));
    x.is_a_edges.push(IsA::new("p29", "p1"));

    let mut y = Skg::new("hub-y");
    y.etypes.push(Etype::named("hub"));
    for i in 1..=29 {
        y.etypes.push(Etype::named(format!("p{i}")));
        y.object_properties
            .push(ObjectProperty::new(format!("h{i}"), "hub", format!("p{i}")));
    }
    for k in 1..=20 {
        y.etypes.push(Etype::named(format!("extra{k}")));
    }
    for k in 1..=20 {
        let next = k % 20 + 1;
        y.object_properties
            .push(ObjectProperty::new(format!("ring{k}"), format!("extra{k}"), format!("extra{next}")));
    }
    let mapping = EquivalenceMapping::identity(&[&x, &y], "hub-x");
    SyntheticPair { x, y, mapping }
}
