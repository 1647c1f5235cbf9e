//! Union-find closure of pairwise decisions into an equivalence mapping.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{EquivalenceDecision, EquivalenceError, Matcher, SimilarityConfig};
use crate::model::Skg;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EtypeRef {
    pub schema: String,
    pub etype: String,
}

impl EtypeRef {
    pub fn new(schema: impl Into<String>, etype: impl Into<String>) -> Self {
        EtypeRef {
            schema: schema.into(),
            etype: etype.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceGroup {
    pub canonical: String,
    /// Sorted by (schema, etype).
    pub members: Vec<EtypeRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDecision {
    pub a: EtypeRef,
    pub b: EtypeRef,
    #[serde(flatten)]
    pub decision: EquivalenceDecision,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceMapping {
    pub reference: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SimilarityConfig>,
    pub groups: Vec<EquivalenceGroup>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pair_decisions: Vec<PairDecision>,
    #[serde(skip)]
    index: HashMap<EtypeRef, usize>,
}

impl EquivalenceMapping {
    /// Builds a mapping from explicit member lists. Members are sorted and the
    /// canonical id is chosen from the reference schema when possible.
    pub fn from_groups(
        reference: impl Into<String>,
        groups: impl IntoIterator<Item = Vec<EtypeRef>>,
    ) -> Result<Self, EquivalenceError> {
        let reference = reference.into();
        let groups = groups
            .into_iter()
            .filter(|g| !g.is_empty())
            .map(|mut members| {
                members.sort();
                members.dedup();
                let canonical = members
                    .iter()
                    .find(|m| m.schema == reference)
                    .unwrap_or(&members[0])
                    .etype
                    .clone();
                EquivalenceGroup { canonical, members }
            })
            .collect();
        let mut m = EquivalenceMapping {
            reference,
            config: None,
            groups,
            pair_decisions: Vec::new(),
            index: HashMap::new(),
        };
        m.reindex()?;
        Ok(m)
    }

    /// Treats etypes with the same id as equivalent across schemas. Anonymous
    /// etypes stay in singleton groups.
    pub fn identity(schemas: &[&Skg], reference: &str) -> Self {
        let mut order: Vec<String> = Vec::new();
        let mut by_id: HashMap<String, Vec<EtypeRef>> = HashMap::new();
        let mut singles = Vec::new();
        for s in schemas {
            for e in &s.etypes {
                let r = EtypeRef::new(&s.name, &e.id);
                if e.anonymous {
                    singles.push(vec![r]);
                } else {
                    by_id
                        .entry(e.id.clone())
                        .or_insert_with(|| {
                            order.push(e.id.clone());
                            Vec::new()
                        })
                        .push(r);
                }
            }
        }
        let groups: Vec<Vec<EtypeRef>> = order
            .into_iter()
            .map(|id| by_id.remove(&id).unwrap())
            .chain(singles)
            .collect();
        Self::from_groups(reference, groups).expect("identity groups are disjoint")
    }

    fn reindex(&mut self) -> Result<(), EquivalenceError> {
        self.index.clear();
        for (g, group) in self.groups.iter().enumerate() {
            if group.members.is_empty() {
                return Err(EquivalenceError::InvalidMapping(format!(
                    "group '{}' has no members",
                    group.canonical
                )));
            }
            if !group.members.iter().any(|m| m.etype == group.canonical) {
                return Err(EquivalenceError::InvalidMapping(format!(
                    "canonical id '{}' is not a member of its group",
                    group.canonical
                )));
            }
            for m in &group.members {
                if self.index.insert(m.clone(), g).is_some() {
                    return Err(EquivalenceError::InvalidMapping(format!(
                        "{}/{} belongs to more than one group",
                        m.schema, m.etype
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn group_of(&self, schema: &str, etype: &str) -> Option<usize> {
        self.index.get(&EtypeRef::new(schema, etype)).copied()
    }

    pub fn canonical_of(&self, schema: &str, etype: &str) -> Option<&str> {
        self.group_of(schema, etype)
            .map(|g| self.groups[g].canonical.as_str())
    }

    pub fn equivalent(&self, a: (&str, &str), b: (&str, &str)) -> bool {
        match (self.group_of(a.0, a.1), self.group_of(b.0, b.1)) {
            (Some(x), Some(y)) => x == y,
            _ => a == b,
        }
    }

    /// Etypes of `schemas` that no group mentions.
    pub fn missing(&self, schemas: &[&Skg]) -> Vec<EtypeRef> {
        schemas
            .iter()
            .flat_map(|s| s.etypes.iter().map(move |e| EtypeRef::new(&s.name, &e.id)))
            .filter(|r| !self.index.contains_key(r))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mapping serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, EquivalenceError> {
        let mut m: EquivalenceMapping =
            serde_json::from_str(text).map_err(|e| EquivalenceError::InvalidMapping(e.to_string()))?;
        m.reindex()?;
        Ok(m)
    }
}

#[derive(Clone, Debug, Default)]
pub struct MappingOptions {
    pub reference: String,
    /// Schemas whose own etypes are also compared with each other.
    pub within_schema: BTreeSet<String>,
    /// Keep decisions for non-equivalent pairs as well.
    pub record_all: bool,
}

impl MappingOptions {
    pub fn new(reference: impl Into<String>) -> Self {
        MappingOptions {
            reference: reference.into(),
            ..Default::default()
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index stays root so group order is reproducible
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Compares every cross-schema pair of named etypes (and within-schema pairs
/// where requested) and closes the equivalent ones into groups.
pub fn build_mapping(
    schemas: &[Skg],
    matcher: &Matcher,
    opts: &MappingOptions,
) -> Result<EquivalenceMapping, EquivalenceError> {
    matcher.config.validate()?;
    if schemas.len() < 2 {
        return Err(EquivalenceError::TooFewSchemas(schemas.len()));
    }
    let mut seen = HashSet::new();
    for s in schemas {
        if !seen.insert(s.name.as_str()) {
            return Err(EquivalenceError::DuplicateSchema(s.name.clone()));
        }
    }
    if !seen.contains(opts.reference.as_str()) {
        return Err(EquivalenceError::UnknownReference(opts.reference.clone()));
    }

    // global index of every etype, schema by schema
    let mut refs = Vec::new();
    let mut named: Vec<Vec<usize>> = Vec::new();
    let mut profiles = Vec::new();
    for s in schemas {
        let mut ids = Vec::new();
        for e in &s.etypes {
            let g = refs.len();
            refs.push(EtypeRef::new(&s.name, &e.id));
            profiles.push((!e.anonymous).then(|| matcher.profile(s, e)));
            if !e.anonymous {
                ids.push(g);
            }
        }
        named.push(ids);
    }

    let mut blocks = Vec::new();
    for i in 0..schemas.len() {
        if opts.within_schema.contains(&schemas[i].name) {
            blocks.push((i, i));
        }
        for j in i + 1..schemas.len() {
            blocks.push((i, j));
        }
    }

    let mut decided: Vec<(usize, usize, EquivalenceDecision)> = Vec::new();
    for (i, j) in blocks {
        let rows: Vec<(usize, usize)> = named[i].iter().copied().enumerate().collect();
        let found = crate::par::map(&rows, |&(pos, a)| {
            let pu = profiles[a].as_ref().unwrap();
            let others = if i == j { &named[j][pos + 1..] } else { &named[j][..] };
            others
                .iter()
                .filter_map(|&b| {
                    let d = matcher.decide(pu, profiles[b].as_ref().unwrap());
                    (d.equivalent || opts.record_all).then_some((a, b, d))
                })
                .collect::<Vec<_>>()
        });
        decided.extend(found.into_iter().flatten());
    }

    let mut uf = UnionFind((0..refs.len()).collect());
    for (a, b, d) in &decided {
        if d.equivalent {
            uf.union(*a, *b);
        }
    }
    let mut by_root: Vec<Vec<EtypeRef>> = vec![Vec::new(); refs.len()];
    for (g, r) in refs.iter().enumerate() {
        let root = uf.find(g);
        by_root[root].push(r.clone());
    }
    let mut mapping = EquivalenceMapping::from_groups(opts.reference.clone(), by_root)?;
    mapping.config = Some(matcher.config.clone());
    mapping.pair_decisions = decided
        .into_iter()
        .map(|(a, b, decision)| PairDecision {
            a: refs[a].clone(),
            b: refs[b].clone(),
            decision,
        })
        .collect();
    log::debug!(
        "{} groups from {} etypes, {} recorded decisions",
        mapping.groups.len(),
        refs.len(),
        mapping.pair_decisions.len()
    );
    Ok(mapping)
}
