//! Is-a flattening and incidence-based etype weights.
//!
//! `weight(E) = |L_E| / (2|L|)`, where `|L_E|` counts the property endpoints
//! at `E` (a self-loop counts twice) and `|L|` is the number of properties.
//! Weights are exact rationals and sum to one.

use std::borrow::Cow;
use std::collections::{BTreeSet, VecDeque};

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::model::{validate, IssueCode, ObjectProperty, Skg};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightsError {
    #[error("schema '{schema}' is invalid: {detail}")]
    Invalid { schema: String, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    InheritDown,
    SynthesizeUp,
    RestrictionInherit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub property: String,
    pub rule: Rule,
    /// For copies: the originating property and the superclass it came
    /// through. For synthesized edges: the subclass properties it summarizes.
    pub sources: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlattenedSkg {
    pub base: Skg,
    pub provenance: Vec<Provenance>,
}

/// Index form of a schema: etypes and properties by position, with a
/// presence mask so single removals do not renumber anything.
#[derive(Clone, Debug)]
pub(crate) struct Graph {
    anonymous: Vec<bool>,
    present: Vec<bool>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    edge_present: Vec<bool>,
    /// Direct sub-properties of each property.
    sub_props: Vec<Vec<usize>>,
}

impl Graph {
    /// `skg` must be valid.
    pub(crate) fn from_skg(skg: &Skg) -> Self {
        let index: HashMap<&str, usize> = skg.etypes.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
        let n = skg.etypes.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for isa in &skg.is_a_edges {
            let (s, p) = (index[isa.sub.as_str()], index[isa.sup.as_str()]);
            if s != p && !parents[s].contains(&p) {
                parents[s].push(p);
                children[p].push(s);
            }
        }
        let mut sub_props = vec![Vec::new(); skg.object_properties.len()];
        if skg.object_properties.iter().any(|p| p.sub_property_of.is_some()) {
            let by_id: HashMap<&str, usize> = skg
                .object_properties
                .iter()
                .enumerate()
                .map(|(i, p)| (p.id.as_str(), i))
                .collect();
            for (i, p) in skg.object_properties.iter().enumerate() {
                if let Some(&parent) = p.sub_property_of.as_deref().and_then(|x| by_id.get(x)) {
                    sub_props[parent].push(i);
                }
            }
        }
        Graph {
            anonymous: skg.etypes.iter().map(|e| e.anonymous).collect(),
            present: vec![true; n],
            parents,
            children,
            edges: skg
                .object_properties
                .iter()
                .map(|p| (index[p.domain.as_str()], index[p.range.as_str()]))
                .collect(),
            edge_present: vec![true; skg.object_properties.len()],
            sub_props,
        }
    }

    /// The same graph with etype `e`, its properties and its is-a edges gone.
    pub(crate) fn without(&self, e: usize) -> Graph {
        let mut g = self.clone();
        g.present[e] = false;
        for (i, &(d, r)) in g.edges.iter().enumerate() {
            if d == e || r == e {
                g.edge_present[i] = false;
            }
        }
        for p in std::mem::take(&mut g.parents[e]) {
            g.children[p].retain(|&c| c != e);
        }
        for c in std::mem::take(&mut g.children[e]) {
            g.parents[c].retain(|&p| p != e);
        }
        g
    }

    fn named(&self, i: usize) -> bool {
        self.present[i] && !self.anonymous[i]
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Base(usize),
    Synthesized(Vec<usize>),
    Copy { via: usize },
}

#[derive(Clone, Debug)]
struct Derived {
    domain: usize,
    range: usize,
    /// Position in the derived list of the base or synthesized edge this
    /// one descends from; itself for those.
    origin: usize,
    kind: Kind,
}

/// Runs synthesis and inheritance; erasure is left to the caller.
fn propagate(g: &Graph) -> Vec<Derived> {
    let n = g.present.len();
    let mut all: Vec<Derived> = Vec::new();
    // derived position -> direct sub-properties, by derived position
    let mut subs: Vec<Vec<usize>> = Vec::new();
    let mut pos_of_prop = vec![usize::MAX; g.edges.len()];
    for (i, &(d, r)) in g.edges.iter().enumerate() {
        if g.edge_present[i] {
            pos_of_prop[i] = all.len();
            all.push(Derived {
                domain: d,
                range: r,
                origin: all.len(),
                kind: Kind::Base(i),
            });
        }
    }
    for (i, kids) in g.sub_props.iter().enumerate() {
        if g.edge_present[i] {
            subs.push(
                kids.iter()
                    .filter(|&&k| g.edge_present[k])
                    .map(|&k| pos_of_prop[k])
                    .collect(),
            );
        }
    }

    // Phase 1: a superclass gains A->B when every direct subclass points at B.
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    // sorted, deduplicated
    let mut out_ranges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in all.iter().enumerate() {
        out[e.domain].push(k);
        out_ranges[e.domain].push(e.range);
    }
    for r in &mut out_ranges {
        r.sort_unstable();
        r.dedup();
    }
    let mut pending: Vec<usize> = g.children.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| g.present[i] && pending[i] == 0).collect();
    while let Some(a) = queue.pop_front() {
        for &p in &g.parents[a] {
            pending[p] -= 1;
            if pending[p] == 0 {
                queue.push_back(p);
            }
        }
        let kids = &g.children[a];
        if g.anonymous[a] || kids.is_empty() {
            continue;
        }
        let mut common = out_ranges[kids[0]].clone();
        for k in &kids[1..] {
            common.retain(|b| out_ranges[*k].binary_search(b).is_ok());
        }
        common.retain(|&b| !g.anonymous[b] && out_ranges[a].binary_search(&b).is_err());
        for b in common {
            let mut sources: Vec<usize> = kids
                .iter()
                .flat_map(|&k| out[k].iter().copied())
                .filter(|&x| all[x].range == b)
                .collect();
            sources.sort_unstable();
            let pos = all.len();
            out[a].push(pos);
            if let Err(at) = out_ranges[a].binary_search(&b) {
                out_ranges[a].insert(at, b);
            }
            subs.push(sources.clone());
            all.push(Derived {
                domain: a,
                range: b,
                origin: pos,
                kind: Kind::Synthesized(sources),
            });
        }
    }
    let base_count = all.len();

    // Phase 2: push every edge down to subclasses on either end, unless a
    // sub-property already connects that subclass to the same target or to
    // one of the target's subclasses.
    let mut strict_subs: HashMap<usize, Vec<usize>> = HashMap::default();
    let mut desc_memo: HashMap<usize, HashSet<usize>> = HashMap::default();
    let mut present: HashSet<(usize, usize, usize)> = all.iter().map(|e| (e.domain, e.range, e.origin)).collect();
    let mut next = 0;
    while next < all.len() {
        let (d, r, origin) = (all[next].domain, all[next].range, all[next].origin);
        next += 1;
        let candidates = g.children[d]
            .iter()
            .map(|&c| (c, r, d, true))
            .chain(g.children[r].iter().map(|&c| (d, c, r, false)));
        for (cd, cr, via, domain_side) in candidates {
            if present.contains(&(cd, cr, origin)) {
                continue;
            }
            let blocked = !subs[origin].is_empty() && {
                let below = strict_subs.entry(origin).or_insert_with(|| {
                    let mut seen = BTreeSet::new();
                    let mut stack = subs[origin].clone();
                    while let Some(q) = stack.pop() {
                        if seen.insert(q) {
                            stack.extend(&subs[q]);
                        }
                    }
                    seen.into_iter().collect()
                });
                let (c, other) = if domain_side { (cd, cr) } else { (cr, cd) };
                below.iter().any(|&q| {
                    let (qd, qr) = (all[q].domain, all[q].range);
                    let (q_side, q_other) = if domain_side { (qd, qr) } else { (qr, qd) };
                    q_side == c
                        && (q_other == other
                            || desc_memo
                                .entry(other)
                                .or_insert_with(|| descendants(g, other))
                                .contains(&q_other))
                })
            };
            if blocked {
                continue;
            }
            present.insert((cd, cr, origin));
            all.push(Derived {
                domain: cd,
                range: cr,
                origin,
                kind: Kind::Copy { via },
            });
        }
    }
    log::trace!("{} base edges, {} after inheritance", base_count, all.len());
    all
}

fn descendants(g: &Graph, of: usize) -> HashSet<usize> {
    let mut out = HashSet::default();
    let mut stack = g.children[of].clone();
    while let Some(c) = stack.pop() {
        if out.insert(c) {
            stack.extend(&g.children[c]);
        }
    }
    out
}

/// Endpoint counts per etype and the number of surviving properties.
pub(crate) fn incidence(g: &Graph, preprocess: bool) -> (Vec<usize>, usize) {
    let mut counts = vec![0usize; g.present.len()];
    let mut total = 0;
    let mut add = |d: usize, r: usize| {
        if g.named(d) && g.named(r) {
            counts[d] += 1;
            counts[r] += 1;
            total += 1;
        }
    };
    if preprocess {
        for e in propagate(g) {
            add(e.domain, e.range);
        }
    } else {
        for (i, &(d, r)) in g.edges.iter().enumerate() {
            if g.edge_present[i] {
                add(d, r);
            }
        }
    }
    (counts, total)
}

fn weights_from_counts(g: &Graph, counts: &[usize], total: usize) -> Vec<Option<BigRational>> {
    let named = (0..counts.len()).filter(|&i| g.named(i)).count();
    (0..counts.len())
        .map(|i| {
            g.named(i).then(|| {
                if total == 0 {
                    BigRational::new(1.into(), BigInt::from(named))
                } else {
                    BigRational::new(counts[i].into(), BigInt::from(2 * total))
                }
            })
        })
        .collect()
}

fn materialize(skg: &Skg, g: &Graph, derived: &[Derived]) -> FlattenedSkg {
    let id = |i: usize| skg.etypes[i].id.as_str();
    let existing: HashSet<&str> = skg.object_properties.iter().map(|p| p.id.as_str()).collect();
    let mut minted: HashSet<String> = HashSet::default();
    let mut fresh = |base: String| {
        let taken = |c: &str, minted: &HashSet<String>| existing.contains(c) || minted.contains(c);
        let mut candidate = base;
        if taken(&candidate, &minted) {
            let base = std::mem::take(&mut candidate);
            let mut k = 2;
            candidate = format!("{base}#{k}");
            while taken(&candidate, &minted) {
                k += 1;
                candidate = format!("{base}#{k}");
            }
        }
        minted.insert(candidate.clone());
        candidate
    };
    // Ids are minted for every derived edge, erased or not, since kept
    // copies name the edge they descend from.
    let mut ids: Vec<Cow<str>> = Vec::with_capacity(derived.len());
    for e in derived {
        let pid = match e.kind {
            Kind::Base(i) => Cow::Borrowed(skg.object_properties[i].id.as_str()),
            Kind::Synthesized(_) => Cow::Owned(fresh([id(e.domain), "->", id(e.range)].concat())),
            Kind::Copy { .. } => Cow::Owned(fresh(
                [&*ids[e.origin], "[", id(e.domain), "->", id(e.range), "]"].concat(),
            )),
        };
        ids.push(pid);
    }

    // Phase 3: erase is-a and restrictions.
    let keep: Vec<bool> = derived.iter().map(|e| g.named(e.domain) && g.named(e.range)).collect();
    let kept_ids: HashSet<&str> = ids
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| &**p)
        .collect();
    let mut object_properties = Vec::with_capacity(kept_ids.len());
    let mut provenance = Vec::new();
    for (k, e) in derived.iter().enumerate() {
        if !keep[k] {
            continue;
        }
        let pid = ids[k].to_string();
        let prop = match &e.kind {
            Kind::Base(i) => {
                let mut p = skg.object_properties[*i].clone();
                if p.sub_property_of.as_deref().is_some_and(|s| !kept_ids.contains(s)) {
                    p.sub_property_of = None;
                }
                p
            }
            Kind::Synthesized(sources) => {
                provenance.push(Provenance {
                    property: pid.clone(),
                    rule: Rule::SynthesizeUp,
                    sources: sources.iter().map(|&s| ids[s].to_string()).collect(),
                });
                let mut p = ObjectProperty::new(pid, id(e.domain), id(e.range));
                p.synthetic = true;
                p
            }
            Kind::Copy { via } => {
                provenance.push(Provenance {
                    property: pid.clone(),
                    rule: if g.anonymous[*via] {
                        Rule::RestrictionInherit
                    } else {
                        Rule::InheritDown
                    },
                    sources: vec![ids[e.origin].to_string(), id(*via).to_owned()],
                });
                ObjectProperty {
                    id: pid,
                    labels: match derived[e.origin].kind {
                        Kind::Base(i) => skg.object_properties[i].labels.clone(),
                        _ => vec![ids[e.origin].to_string()],
                    },
                    domain: id(e.domain).to_owned(),
                    range: id(e.range).to_owned(),
                    sub_property_of: None,
                    synthetic: true,
                }
            }
        };
        object_properties.push(prop);
    }
    FlattenedSkg {
        base: Skg {
            name: skg.name.clone(),
            etypes: skg.etypes.iter().filter(|e| !e.anonymous).cloned().collect(),
            object_properties,
            is_a_edges: Vec::new(),
        },
        provenance,
    }
}

pub(crate) fn ensure_valid(skg: &Skg) -> Result<(), WeightsError> {
    let report = validate(skg);
    if report.is_valid() {
        return Ok(());
    }
    let first = &report.errors[0];
    let detail = if report.has(IssueCode::IsACycle) {
        format!("is-a cycle ({})", first.message)
    } else {
        format!("{}: {}", first.location, first.message)
    };
    Err(WeightsError::Invalid {
        schema: skg.name.clone(),
        detail,
    })
}

/// Propagates properties through is-a edges and restrictions, then erases
/// both. Every added property is marked synthetic and listed in the
/// provenance.
pub fn flatten_is_a(skg: &Skg) -> Result<FlattenedSkg, WeightsError> {
    ensure_valid(skg)?;
    let g = Graph::from_skg(skg);
    Ok(materialize(skg, &g, &propagate(&g)))
}

/// Drops is-a edges, anonymous etypes and their properties without
/// propagating anything.
pub fn strip_is_a(skg: &Skg) -> Skg {
    let anon = skg.anonymous_ids();
    let mut out = skg.clone();
    out.is_a_edges.clear();
    out.etypes.retain(|e| !e.anonymous);
    out.object_properties
        .retain(|p| !anon.contains(p.domain.as_str()) && !anon.contains(p.range.as_str()));
    let ids: HashSet<String> = out.object_properties.iter().map(|p| p.id.clone()).collect();
    for p in &mut out.object_properties {
        if p.sub_property_of.as_ref().is_some_and(|s| !ids.contains(s)) {
            p.sub_property_of = None;
        }
    }
    out
}

pub(crate) fn ratio_string<S: Serializer>(w: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(w))
}

pub fn format_ratio(w: &BigRational) -> String {
    format!("{}/{}", w.numer(), w.denom())
}

/// Shortest decimal that round-trips through `f64`.
pub fn decimal(w: &BigRational) -> String {
    format!("{}", w.to_f64().unwrap_or(f64::NAN))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightEntry {
    pub etype: String,
    pub incidence: usize,
    #[serde(serialize_with = "ratio_string")]
    pub weight: BigRational,
    pub degree: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightTable {
    pub schema: String,
    pub preprocessed: bool,
    pub total_properties: usize,
    /// In the schema's etype order.
    pub entries: Vec<WeightEntry>,
}

impl WeightTable {
    pub fn weight(&self, etype: &str) -> Option<&BigRational> {
        self.entries.iter().find(|e| e.etype == etype).map(|e| &e.weight)
    }

    pub fn lookup(&self) -> std::collections::HashMap<&str, &WeightEntry> {
        self.entries.iter().map(|e| (e.etype.as_str(), e)).collect()
    }

    pub fn sum(&self) -> BigRational {
        self.entries.iter().fold(BigRational::zero(), |acc, e| acc + &e.weight)
    }

    /// Entries by weight, heaviest first, ties by id.
    pub fn ranked(&self) -> Vec<&WeightEntry> {
        let mut v: Vec<&WeightEntry> = self.entries.iter().collect();
        v.sort_by(|a, b| b.weight.cmp(&a.weight).then_with(|| a.etype.cmp(&b.etype)));
        v
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("etype_id,weight_numerator,weight_denominator,weight_decimal,degree\n");
        for e in self.ranked() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                csv_field(&e.etype),
                e.weight.numer(),
                e.weight.denom(),
                decimal(&e.weight),
                e.degree
            );
        }
        out
    }
}

/// Quotes a CSV field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Importance degree 1..=6 in steps of 0.02; anything from 0.10 up is 6.
pub fn bin_importance(weight: &BigRational) -> u8 {
    let scaled = weight * BigRational::from_integer(BigInt::from(50));
    let floor = scaled.numer().div_floor(scaled.denom());
    let d = floor.to_i64().unwrap_or(i64::MAX).saturating_add(1).clamp(1, 6);
    d as u8
}

/// Method 3 semantics with `preprocess`, Method 2 without.
pub fn compute_weights(skg: &Skg, preprocess: bool) -> Result<WeightTable, WeightsError> {
    ensure_valid(skg)?;
    Ok(table_from_graph(skg, &Graph::from_skg(skg), preprocess))
}

pub(crate) fn table_from_graph(skg: &Skg, g: &Graph, preprocess: bool) -> WeightTable {
    let (counts, total) = incidence(g, preprocess);
    let weights = weights_from_counts(g, &counts, total);
    let entries = weights
        .into_iter()
        .enumerate()
        .filter_map(|(i, w)| {
            w.map(|weight| WeightEntry {
                etype: skg.etypes[i].id.clone(),
                incidence: counts[i],
                degree: bin_importance(&weight),
                weight,
            })
        })
        .collect();
    WeightTable {
        schema: skg.name.clone(),
        preprocessed: preprocess,
        total_properties: total,
        entries,
    }
}
