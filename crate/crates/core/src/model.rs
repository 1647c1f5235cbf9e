//! Schema knowledge graph types, the JSON interchange format, and structural
//! validation.
//!
//! An [`Skg`] is the concept-level view of a schema: named etypes, anonymous
//! (restriction) etypes, directed object properties between them, and is-a
//! edges. Competency queries, reference ontologies and dataset schemas all
//! share this one representation.

use std::fmt;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Skg {
    pub name: String,
    pub etypes: Vec<Etype>,
    pub object_properties: Vec<ObjectProperty>,
    #[serde(rename = "is_a")]
    pub is_a_edges: Vec<IsA>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Etype {
    pub id: String,
    pub labels: Vec<String>,
    pub anonymous: bool,
    pub data_properties: Vec<String>,
    pub instances: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectProperty {
    pub id: String,
    pub labels: Vec<String>,
    pub domain: String,
    pub range: String,
    pub sub_property_of: Option<String>,
    /// Set on properties created by is-a flattening rather than read from a source.
    pub synthetic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsA {
    pub sub: String,
    #[serde(rename = "super")]
    pub sup: String,
}

impl Etype {
    pub fn named(id: impl Into<String>) -> Self {
        let id = id.into();
        Etype {
            labels: vec![id.clone()],
            id,
            anonymous: false,
            data_properties: Vec::new(),
            instances: Vec::new(),
        }
    }

    pub fn anonymous(id: impl Into<String>) -> Self {
        Etype {
            id: id.into(),
            labels: Vec::new(),
            anonymous: true,
            data_properties: Vec::new(),
            instances: Vec::new(),
        }
    }

    pub fn with_data_properties<I, S>(mut self, props: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.data_properties = props.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_instances<I, S>(mut self, instances: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.instances = instances.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_labels<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.labels = labels.into_iter().map(Into::into).collect();
        self
    }
}

impl ObjectProperty {
    pub fn new(id: impl Into<String>, domain: impl Into<String>, range: impl Into<String>) -> Self {
        let id = id.into();
        ObjectProperty {
            labels: vec![id.clone()],
            id,
            domain: domain.into(),
            range: range.into(),
            sub_property_of: None,
            synthetic: false,
        }
    }

    pub fn sub_property_of(mut self, parent: impl Into<String>) -> Self {
        self.sub_property_of = Some(parent.into());
        self
    }

    pub fn is_self_loop(&self) -> bool {
        self.domain == self.range
    }
}

impl IsA {
    pub fn new(sub: impl Into<String>, sup: impl Into<String>) -> Self {
        IsA {
            sub: sub.into(),
            sup: sup.into(),
        }
    }
}

impl Skg {
    pub fn new(name: impl Into<String>) -> Self {
        Skg {
            name: name.into(),
            etypes: Vec::new(),
            object_properties: Vec::new(),
            is_a_edges: Vec::new(),
        }
    }

    pub fn etype(&self, id: &str) -> Option<&Etype> {
        self.etypes.iter().find(|e| e.id == id)
    }

    pub fn property(&self, id: &str) -> Option<&ObjectProperty> {
        self.object_properties.iter().find(|p| p.id == id)
    }

    pub fn named_etypes(&self) -> impl Iterator<Item = &Etype> {
        self.etypes.iter().filter(|e| !e.anonymous)
    }

    pub fn anonymous_ids(&self) -> std::collections::HashSet<&str> {
        self.etypes
            .iter()
            .filter(|e| e.anonymous)
            .map(|e| e.id.as_str())
            .collect()
    }

    /// Object properties whose domain or range is `etype`.
    pub fn incident_properties<'a>(
        &'a self,
        etype: &'a str,
    ) -> impl Iterator<Item = &'a ObjectProperty> + 'a {
        self.object_properties
            .iter()
            .filter(move |p| p.domain == etype || p.range == etype)
    }

    /// A copy of this graph without `etype`, its incident properties and its
    /// is-a edges. Sub-property links pointing at a dropped property are
    /// cleared so the result stays valid.
    pub fn without_etype(&self, etype: &str) -> Skg {
        let etypes = self.etypes.iter().filter(|e| e.id != etype).cloned().collect();
        let dropped: HashSet<&str> = self
            .incident_properties(etype)
            .map(|p| p.id.as_str())
            .collect();
        let object_properties = self
            .object_properties
            .iter()
            .filter(|p| !dropped.contains(p.id.as_str()))
            .map(|p| {
                let mut p = p.clone();
                if p.sub_property_of.as_deref().is_some_and(|s| dropped.contains(s)) {
                    p.sub_property_of = None;
                }
                p
            })
            .collect();
        let is_a_edges = self
            .is_a_edges
            .iter()
            .filter(|e| e.sub != etype && e.sup != etype)
            .cloned()
            .collect();
        Skg {
            name: self.name.clone(),
            etypes,
            object_properties,
            is_a_edges,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueCode {
    EmptyId,
    DuplicateEtype,
    DuplicateProperty,
    DuplicateInstance,
    MissingLabel,
    UnresolvedReference,
    IsACycle,
    SubPropertyCycle,
    AnonymousSubclass,
    // warnings
    DuplicateIsA,
    DanglingRestriction,
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IssueCode::EmptyId => "empty_id",
            IssueCode::DuplicateEtype => "duplicate_etype",
            IssueCode::DuplicateProperty => "duplicate_property",
            IssueCode::DuplicateInstance => "duplicate_instance",
            IssueCode::MissingLabel => "missing_label",
            IssueCode::UnresolvedReference => "unresolved_reference",
            IssueCode::IsACycle => "is_a_cycle",
            IssueCode::SubPropertyCycle => "sub_property_cycle",
            IssueCode::AnonymousSubclass => "anonymous_subclass",
            IssueCode::DuplicateIsA => "duplicate_is_a",
            IssueCode::DanglingRestriction => "dangling_restriction",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub location: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.errors.iter().chain(&self.warnings).any(|i| i.code == code)
    }

    fn error(&mut self, code: IssueCode, location: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Issue {
            code,
            location: location.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, code: IssueCode, location: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Issue {
            code,
            location: location.into(),
            message: message.into(),
        });
    }
}

/// Checks every structural invariant of `skg`. Violations are returned as data,
/// sorted by (code, location).
pub fn validate(skg: &Skg) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut etype_ids: HashMap<&str, &Etype> = HashMap::with_capacity_and_hasher(skg.etypes.len(), Default::default());
    for (i, e) in skg.etypes.iter().enumerate() {
        let loc = || format!("etypes[{}]", e.id);
        if e.id.is_empty() {
            report.error(IssueCode::EmptyId, format!("etypes[#{i}]"), "etype id is empty");
        }
        if etype_ids.insert(e.id.as_str(), e).is_some() {
            report.error(
                IssueCode::DuplicateEtype,
                loc(),
                format!("etype id '{}' is defined more than once", e.id),
            );
        }
        if !e.anonymous && e.labels.iter().all(|l| l.trim().is_empty()) {
            report.error(IssueCode::MissingLabel, loc(), "named etype has no label");
        }
        let mut seen = HashSet::default();
        for inst in &e.instances {
            if !seen.insert(inst.as_str()) {
                report.error(
                    IssueCode::DuplicateInstance,
                    format!("{}.instances", loc()),
                    format!("instance '{inst}' listed more than once"),
                );
            }
        }
    }

    let mut property_ids: HashSet<&str> =
        HashSet::with_capacity_and_hasher(skg.object_properties.len(), Default::default());
    for (i, p) in skg.object_properties.iter().enumerate() {
        let loc = || format!("object_properties[{}]", p.id);
        if p.id.is_empty() {
            report.error(
                IssueCode::EmptyId,
                format!("object_properties[#{i}]"),
                "object property id is empty",
            );
        }
        if !property_ids.insert(p.id.as_str()) {
            report.error(
                IssueCode::DuplicateProperty,
                loc(),
                format!("object property id '{}' is defined more than once", p.id),
            );
        }
        for (role, target) in [("domain", &p.domain), ("range", &p.range)] {
            if !etype_ids.contains_key(target.as_str()) {
                report.error(
                    IssueCode::UnresolvedReference,
                    format!("{}.{role}", loc()),
                    format!("unknown etype '{target}'"),
                );
            }
        }
    }
    for p in &skg.object_properties {
        if let Some(parent) = &p.sub_property_of {
            if !property_ids.contains(parent.as_str()) {
                report.error(
                    IssueCode::UnresolvedReference,
                    format!("object_properties[{}].sub_property_of", p.id),
                    format!("unknown object property '{parent}'"),
                );
            }
        }
    }

    let mut seen_edges = HashSet::with_capacity_and_hasher(skg.is_a_edges.len(), Default::default());
    let mut has_subclass: HashSet<&str> =
        HashSet::with_capacity_and_hasher(skg.is_a_edges.len(), Default::default());
    for edge in &skg.is_a_edges {
        let loc = || format!("is_a[{}->{}]", edge.sub, edge.sup);
        for (role, target) in [("sub", &edge.sub), ("super", &edge.sup)] {
            if !etype_ids.contains_key(target.as_str()) {
                report.error(
                    IssueCode::UnresolvedReference,
                    format!("{}.{role}", loc()),
                    format!("unknown etype '{target}'"),
                );
            }
        }
        if etype_ids.get(edge.sub.as_str()).is_some_and(|e| e.anonymous) {
            report.error(
                IssueCode::AnonymousSubclass,
                loc(),
                format!("anonymous etype '{}' used as an is-a subclass", edge.sub),
            );
        }
        if !seen_edges.insert((edge.sub.as_str(), edge.sup.as_str())) {
            report.warn(IssueCode::DuplicateIsA, loc(), "is-a edge listed more than once");
        }
        has_subclass.insert(edge.sup.as_str());
    }

    for e in skg.etypes.iter().filter(|e| e.anonymous) {
        if !has_subclass.contains(e.id.as_str()) {
            report.warn(
                IssueCode::DanglingRestriction,
                format!("etypes[{}]", e.id),
                "anonymous etype restricts no named etype",
            );
        }
    }

    for node in cycle_members(skg.is_a_edges.iter().map(|e| (e.sub.as_str(), e.sup.as_str()))) {
        report.error(
            IssueCode::IsACycle,
            format!("etypes[{node}]"),
            format!("etype '{node}' lies on an is-a cycle"),
        );
    }
    let sub_edges = skg
        .object_properties
        .iter()
        .filter_map(|p| p.sub_property_of.as_deref().map(|s| (p.id.as_str(), s)));
    for node in cycle_members(sub_edges) {
        report.error(
            IssueCode::SubPropertyCycle,
            format!("object_properties[{node}]"),
            format!("property '{node}' lies on a sub-property cycle"),
        );
    }

    report.errors.sort();
    report.errors.dedup();
    report.warnings.sort();
    report
}

/// Nodes that lie on some directed cycle (self-loops included).
fn cycle_members<'a>(edges: impl Iterator<Item = (&'a str, &'a str)>) -> Vec<&'a str> {
    let mut index: HashMap<&str, usize> = HashMap::default();
    let mut names: Vec<&str> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (a, b) in edges {
        let mut at = |s: &'a str| {
            *index.entry(s).or_insert_with(|| {
                names.push(s);
                names.len() - 1
            })
        };
        let (a, b) = (at(a), at(b));
        pairs.push((a, b));
    }
    if pairs.is_empty() {
        return Vec::new();
    }
    let n = names.len();
    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for &(a, b) in &pairs {
        succ[a].push(b);
        pred[b].push(a);
    }
    // Repeatedly strip nodes without outgoing edges; what remains reaches a cycle.
    let mut out_deg: Vec<usize> = succ.iter().map(Vec::len).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| out_deg[v] == 0).collect();
    let mut removed = vec![false; n];
    while let Some(v) = stack.pop() {
        removed[v] = true;
        for &p in &pred[v] {
            out_deg[p] -= 1;
            if out_deg[p] == 0 {
                stack.push(p);
            }
        }
    }
    // Of the survivors, keep those that can reach themselves.
    let mut out: Vec<&str> = (0..n)
        .filter(|&start| {
            if removed[start] {
                return false;
            }
            let mut seen = vec![false; n];
            let mut stack = succ[start].clone();
            while let Some(v) = stack.pop() {
                if v == start {
                    return true;
                }
                if !std::mem::replace(&mut seen[v], true) {
                    stack.extend(&succ[v]);
                }
            }
            false
        })
        .map(|v| names[v])
        .collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown key '{key}' at {path}")]
    UnknownKey { path: String, key: String },
    #[error("unresolved reference to '{id}' at {location}")]
    UnresolvedReference { location: String, id: String },
    #[error("duplicate {kind} id '{id}'")]
    DuplicateId { kind: &'static str, id: String },
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Unknown keys are errors in strict mode and warnings otherwise.
    pub lenient: bool,
}

#[derive(Clone, Debug)]
pub struct Loaded {
    pub skg: Skg,
    pub warnings: Vec<String>,
}

/// Strict load of an SKG JSON document.
pub fn load_skg(bytes: &[u8]) -> Result<Skg, ModelError> {
    load_skg_with(bytes, LoadOptions::default()).map(|l| l.skg)
}

pub fn load_skg_with(bytes: &[u8], opts: LoadOptions) -> Result<Loaded, ModelError> {
    let mut warnings = Vec::new();
    let skg: Skg = if opts.lenient {
        let mut value: Value = serde_json::from_slice(bytes).map_err(syntax)?;
        strip_unknown_keys(&mut value, &mut warnings);
        serde_json::from_value(value).map_err(|e| ModelError::Syntax {
            line: 0,
            column: 0,
            message: e.to_string(),
        })?
    } else {
        serde_json::from_slice(bytes).map_err(|e| {
            let msg = e.to_string();
            match unknown_field_name(&msg) {
                Some(key) => ModelError::UnknownKey {
                    path: format!("line {}, column {}", e.line(), e.column()),
                    key,
                },
                None => syntax(e),
            }
        })?
    };
    check_references(&skg)?;
    Ok(Loaded { skg, warnings })
}

/// Pretty JSON rendering; `load_skg(save_skg(s))` reproduces `s`.
pub fn save_skg(skg: &Skg) -> String {
    let mut s = serde_json::to_string_pretty(skg).expect("Skg serializes");
    s.push('\n');
    s
}

fn syntax(e: serde_json::Error) -> ModelError {
    ModelError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn unknown_field_name(msg: &str) -> Option<String> {
    let rest = msg.strip_prefix("unknown field `")?;
    Some(rest[..rest.find('`')?].to_owned())
}

fn check_references(skg: &Skg) -> Result<(), ModelError> {
    let report = validate(skg);
    for issue in &report.errors {
        match issue.code {
            IssueCode::DuplicateEtype | IssueCode::DuplicateProperty => {
                let kind = if issue.code == IssueCode::DuplicateEtype {
                    "etype"
                } else {
                    "object property"
                };
                let id = issue
                    .location
                    .split_once('[')
                    .and_then(|(_, r)| r.strip_suffix(']'))
                    .unwrap_or(&issue.location)
                    .to_owned();
                return Err(ModelError::DuplicateId { kind, id });
            }
            IssueCode::UnresolvedReference => {
                let id = issue
                    .message
                    .rsplit('\'')
                    .nth(1)
                    .unwrap_or_default()
                    .to_owned();
                return Err(ModelError::UnresolvedReference {
                    location: issue.location.clone(),
                    id,
                });
            }
            _ => {}
        }
    }
    Ok(())
}

const TOP_KEYS: &[&str] = &["name", "etypes", "object_properties", "is_a"];
const ETYPE_KEYS: &[&str] = &["id", "labels", "anonymous", "data_properties", "instances"];
const PROPERTY_KEYS: &[&str] = &["id", "labels", "domain", "range", "sub_property_of", "synthetic"];
const IS_A_KEYS: &[&str] = &["sub", "super"];

fn strip_unknown_keys(value: &mut Value, warnings: &mut Vec<String>) {
    fn strip(obj: &mut Value, allowed: &[&str], path: &str, warnings: &mut Vec<String>) {
        if let Value::Object(map) = obj {
            let unknown: Vec<String> = map
                .keys()
                .filter(|k| !allowed.contains(&k.as_str()))
                .cloned()
                .collect();
            for k in unknown {
                warnings.push(format!("ignored unknown key '{k}' at {path}"));
                map.remove(&k);
            }
        }
    }
    strip(value, TOP_KEYS, "$", warnings);
    for (key, allowed) in [
        ("etypes", ETYPE_KEYS),
        ("object_properties", PROPERTY_KEYS),
        ("is_a", IS_A_KEYS),
    ] {
        if let Some(Value::Array(items)) = value.get_mut(key) {
            for (i, item) in items.iter_mut().enumerate() {
                strip(item, allowed, &format!("$.{key}[{i}]"), warnings);
            }
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::campus;
    use super::*;

    #[test]
    fn minimal_document_loads() {
        let doc = br#"{"name":"m","etypes":[{"id":"a","labels":["a"],"anonymous":false,
            "data_properties":[],"instances":[]}],"object_properties":[],"is_a":[]}"#;
        let skg = load_skg(doc).unwrap();
        assert_eq!(skg.etypes.len(), 1);
        assert!(skg.object_properties.is_empty());
    }

    #[test]
    fn campus_round_trips_and_validates() {
        let skg = campus();
        assert!(validate(&skg).errors.is_empty());
        let text = save_skg(&skg);
        let back = load_skg(text.as_bytes()).unwrap();
        assert_eq!(back, skg);
        assert_eq!(back.object_properties.len(), 4);
    }

    #[test]
    fn ghost_reference_is_reported() {
        let mut skg = campus();
        skg.object_properties[0].range = "ghost".into();
        let err = load_skg(save_skg(&skg).as_bytes()).unwrap_err();
        match err {
            ModelError::UnresolvedReference { id, .. } => assert_eq!(id, "ghost"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn self_loop_is_a_is_a_cycle() {
        let mut skg = campus();
        skg.is_a_edges.push(IsA::new("student", "student"));
        let report = validate(&skg);
        assert!(report.has(IssueCode::IsACycle));
        assert!(!report.is_valid());
    }

    #[test]
    fn longer_cycle_and_tail() {
        let mut skg = campus();
        skg.is_a_edges = vec![
            IsA::new("student", "teacher"),
            IsA::new("teacher", "course"),
            IsA::new("course", "student"),
            IsA::new("scholarship", "student"),
        ];
        let report = validate(&skg);
        let on_cycle: Vec<_> = report
            .errors
            .iter()
            .filter(|i| i.code == IssueCode::IsACycle)
            .map(|i| i.location.as_str())
            .collect();
        assert_eq!(on_cycle.len(), 3);
        assert!(!on_cycle.contains(&"etypes[scholarship]"));
    }

    #[test]
    fn duplicate_etype_id() {
        let mut skg = campus();
        skg.etypes.push(Etype::named("student"));
        let report = validate(&skg);
        assert!(report.has(IssueCode::DuplicateEtype));
        assert!(matches!(
            load_skg(save_skg(&skg).as_bytes()),
            Err(ModelError::DuplicateId { kind: "etype", .. })
        ));
    }

    #[test]
    fn anonymous_subclass_and_sub_property_cycle() {
        let mut skg = campus();
        skg.etypes.push(Etype::anonymous("_:r"));
        skg.is_a_edges.push(IsA::new("_:r", "student"));
        skg.object_properties[0].sub_property_of = Some("receive".into());
        skg.object_properties[1].sub_property_of = Some("take".into());
        let report = validate(&skg);
        assert!(report.has(IssueCode::AnonymousSubclass));
        assert!(report.has(IssueCode::SubPropertyCycle));
    }

    #[test]
    fn report_order_is_deterministic() {
        let mut skg = campus();
        skg.etypes.push(Etype::named("student"));
        skg.object_properties[2].domain = "nobody".into();
        skg.is_a_edges.push(IsA::new("course", "course"));
        let a = validate(&skg);
        let b = validate(&skg);
        assert_eq!(a, b);
        let mut sorted = a.errors.clone();
        sorted.sort_by(|x, y| (x.code, &x.location).cmp(&(y.code, &y.location)));
        assert_eq!(a.errors, sorted);
    }

    #[test]
    fn unknown_keys_strict_vs_lenient() {
        let doc = br#"{"name":"m","extra":1,"etypes":[],"object_properties":[],"is_a":[]}"#;
        assert!(matches!(load_skg(doc), Err(ModelError::UnknownKey { .. })));
        let loaded = load_skg_with(doc, LoadOptions { lenient: true }).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn syntax_error_has_position() {
        let err = load_skg(b"{\n  \"name\": }").unwrap_err();
        match err {
            ModelError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_named_graph_and_synthetic_flag() {
        let empty = Skg::new("empty");
        let text = save_skg(&empty);
        assert!(text.contains("\"etypes\": []"));
        assert_eq!(load_skg(text.as_bytes()).unwrap(), empty);

        let mut skg = campus();
        skg.object_properties[0].synthetic = true;
        let back = load_skg(save_skg(&skg).as_bytes()).unwrap();
        assert!(back.object_properties[0].synthetic);
    }

    #[test]
    fn without_etype_drops_incident_structure() {
        let mut skg = campus();
        skg.object_properties[3].sub_property_of = Some("teach".into());
        let cut = skg.without_etype("student");
        assert_eq!(cut.etypes.len(), 3);
        assert_eq!(cut.object_properties.len(), 1);
        assert_eq!(cut.object_properties[0].sub_property_of, None);
        assert!(validate(&cut).is_valid());
    }
}
