//! Reference values computed directly from the definitions, sharing no code
//! with the library beyond the data model.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use skg_compat::equivalence::EquivalenceMapping;
use skg_compat::model::Skg;

pub fn ratio(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Endpoint count over twice the number of properties joining two named
/// etypes; uniform when there are none.
pub fn endpoint_weights(skg: &Skg) -> BTreeMap<String, BigRational> {
    let named: BTreeSet<&str> = skg.etypes.iter().filter(|e| !e.anonymous).map(|e| e.id.as_str()).collect();
    let mut count: BTreeMap<&str, usize> = named.iter().map(|&e| (e, 0)).collect();
    let mut total = 0;
    for p in &skg.object_properties {
        if named.contains(p.domain.as_str()) && named.contains(p.range.as_str()) {
            *count.get_mut(p.domain.as_str()).unwrap() += 1;
            *count.get_mut(p.range.as_str()).unwrap() += 1;
            total += 1;
        }
    }
    count
        .into_iter()
        .map(|(e, c)| {
            let w = if total == 0 { ratio(1, named.len()) } else { ratio(c, 2 * total) };
            (e.to_owned(), w)
        })
        .collect()
}

pub fn uniform_weights(skg: &Skg) -> BTreeMap<String, BigRational> {
    let named: Vec<&str> = skg.etypes.iter().filter(|e| !e.anonymous).map(|e| e.id.as_str()).collect();
    named.iter().map(|&e| (e.to_owned(), ratio(1, named.len()))).collect()
}

/// Named etypes of `a` whose group holds a named etype of `b`, and those
/// whose group does not.
pub fn split(a: &Skg, b: &Skg, mapping: &EquivalenceMapping) -> (Vec<String>, Vec<String>) {
    let named_b: BTreeSet<&str> = b.etypes.iter().filter(|e| !e.anonymous).map(|e| e.id.as_str()).collect();
    let mut shared = Vec::new();
    let mut only = Vec::new();
    for e in a.etypes.iter().filter(|e| !e.anonymous) {
        let group = mapping
            .groups
            .iter()
            .find(|g| g.members.iter().any(|m| m.schema == a.name && m.etype == e.id))
            .expect("every named etype is mapped");
        if group.members.iter().any(|m| m.schema == b.name && named_b.contains(m.etype.as_str())) {
            shared.push(e.id.clone());
        } else {
            only.push(e.id.clone());
        }
    }
    (shared, only)
}

/// Members of `schema` in the group of (`of_schema`, `etype`).
pub fn counterparts(mapping: &EquivalenceMapping, of_schema: &str, etype: &str, schema: &str) -> Vec<String> {
    mapping
        .groups
        .iter()
        .find(|g| g.members.iter().any(|m| m.schema == of_schema && m.etype == etype))
        .map(|g| g.members.iter().filter(|m| m.schema == schema).map(|m| m.etype.clone()).collect())
        .unwrap_or_default()
}
