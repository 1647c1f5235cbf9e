use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use super::turtle::{Literal, Position, Term, TurtleDocument, RDF_TYPE};
use crate::model::{validate, Etype, IsA, ObjectProperty, Skg};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";

mod vocab {
    pub const SUB_CLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const SUB_PROPERTY_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
    pub const DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
    pub const RESTRICTION: &str = "http://www.w3.org/2002/07/owl#Restriction";
    pub const ON_PROPERTY: &str = "http://www.w3.org/2002/07/owl#onProperty";
    pub const SOME_VALUES_FROM: &str = "http://www.w3.org/2002/07/owl#someValuesFrom";
    pub const ALL_VALUES_FROM: &str = "http://www.w3.org/2002/07/owl#allValuesFrom";
    pub const ON_CLASS: &str = "http://www.w3.org/2002/07/owl#onClass";
    pub const CARDINALITY: &str = "http://www.w3.org/2002/07/owl#cardinality";
    pub const MIN_CARDINALITY: &str = "http://www.w3.org/2002/07/owl#minCardinality";
    pub const MAX_CARDINALITY: &str = "http://www.w3.org/2002/07/owl#maxCardinality";
    pub const QUALIFIED_CARDINALITY: &str = "http://www.w3.org/2002/07/owl#qualifiedCardinality";
    pub const MIN_QUALIFIED_CARDINALITY: &str =
        "http://www.w3.org/2002/07/owl#minQualifiedCardinality";
    pub const MAX_QUALIFIED_CARDINALITY: &str =
        "http://www.w3.org/2002/07/owl#maxQualifiedCardinality";

    /// Annotation and declaration vocabulary that carries no structure.
    pub const IGNORED: &[&str] = &[
        "http://www.w3.org/2000/01/rdf-schema#comment",
        "http://www.w3.org/2000/01/rdf-schema#seeAlso",
        "http://www.w3.org/2000/01/rdf-schema#isDefinedBy",
        "http://www.w3.org/2002/07/owl#versionInfo",
        "http://www.w3.org/2002/07/owl#versionIRI",
    ];

    /// rdf:type objects that are accepted without contributing structure.
    pub const IGNORED_TYPES: &[&str] = &[
        "http://www.w3.org/2002/07/owl#Ontology",
        "http://www.w3.org/2002/07/owl#NamedIndividual",
        "http://www.w3.org/2002/07/owl#AnnotationProperty",
        "http://www.w3.org/2002/07/owl#FunctionalProperty",
        "http://www.w3.org/2002/07/owl#InverseFunctionalProperty",
        "http://www.w3.org/2002/07/owl#TransitiveProperty",
        "http://www.w3.org/2002/07/owl#SymmetricProperty",
        "http://www.w3.org/2002/07/owl#AsymmetricProperty",
        "http://www.w3.org/2002/07/owl#ReflexiveProperty",
        "http://www.w3.org/2002/07/owl#IrreflexiveProperty",
        "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property",
    ];

    pub const ONTOLOGY: &str = "http://www.w3.org/2002/07/owl#Ontology";
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImportError {
    #[error("{pos}: restriction {node} has no owl:onProperty")]
    MissingOnProperty { node: String, pos: Position },
    #[error("{pos}: restriction {node} has no named-class filler: {detail}")]
    FillerNotNamed {
        node: String,
        detail: String,
        pos: Position,
    },
    #[error("{pos}: unsupported construct: {what}")]
    Unsupported { what: String, pos: Position },
    #[error("lowered graph is invalid: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default)]
pub struct LowerOptions {
    /// Schema name; defaults to the owl:Ontology local name, then "imported".
    pub name: Option<String>,
    /// Unsupported constructs are errors instead of skipped-with-warning.
    pub strict: bool,
}

#[derive(Clone, Debug)]
pub struct Lowered {
    pub skg: Skg,
    pub warnings: Vec<String>,
}

/// Local part of an IRI (after the last '#', '/' or ':'), percent-decoded.
pub fn local_name(iri: &str) -> String {
    let tail = iri.rsplit(['#', '/', ':']).next().unwrap_or(iri);
    let tail = if tail.is_empty() { iri } else { tail };
    percent_decode(tail)
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            if let Ok(b) = u8::from_str_radix(&s[i + 1..i + 3], 16) {
                out.push(b);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8(out).unwrap_or_else(|_| s.to_owned())
}

#[derive(Default)]
struct Node<'d> {
    types: Vec<&'d str>,
    labels: Vec<String>,
    edges: Vec<(&'d str, &'d Term, Position)>,
    first: Position,
}

struct Lowering<'d> {
    strict: bool,
    warnings: Vec<String>,
    nodes: HashMap<&'d Term, Node<'d>>,
    order: Vec<&'d Term>,
}

impl<'d> Lowering<'d> {
    fn unsupported(&mut self, what: String, pos: Position) -> Result<(), ImportError> {
        if self.strict {
            Err(ImportError::Unsupported { what, pos })
        } else {
            self.warnings.push(format!("{pos}: skipped unsupported construct: {what}"));
            Ok(())
        }
    }

    fn node(&self, t: &Term) -> Option<&Node<'d>> {
        self.nodes.get(t)
    }

    fn has_type(&self, t: &Term, ty: &str) -> bool {
        self.node(t).is_some_and(|n| n.types.contains(&ty))
    }

    fn objects(&self, t: &Term, pred: &str) -> Vec<(&'d Term, Position)> {
        self.node(t)
            .map(|n| {
                n.edges
                    .iter()
                    .filter(|(p, _, _)| *p == pred)
                    .map(|(_, o, pos)| (*o, *pos))
                    .collect()
            })
            .unwrap_or_default()
    }
}

/// Lowers the class/property/restriction structure of an OWL document into an
/// [`Skg`]. Restrictions on a named class become an anonymous superclass with
/// one object property towards the filler class.
pub fn lower_to_skg<'d>(doc: &'d TurtleDocument, opts: &LowerOptions) -> Result<Lowered, ImportError> {
    let mut cx = Lowering {
        strict: opts.strict,
        warnings: Vec::new(),
        nodes: HashMap::new(),
        order: Vec::new(),
    };

    for t in &doc.triples {
        if !cx.nodes.contains_key(&t.subject) {
            cx.order.push(&t.subject);
        }
        let node = cx.nodes.entry(&t.subject).or_insert_with(|| Node {
            first: t.pos,
            ..Node::default()
        });
        if t.predicate == RDF_TYPE {
            if let Term::Iri(ty) = &t.object {
                node.types.push(ty);
                continue;
            }
        }
        if t.predicate == vocab::LABEL {
            if let Term::Literal(Literal::Str(s)) = &t.object {
                node.labels.push(s.clone());
                continue;
            }
        }
        node.edges.push((&t.predicate, &t.object, t.pos));
    }

    let order = cx.order.clone();
    let is_class = |cx: &Lowering, t: &Term| {
        matches!(t, Term::Iri(_))
            && (cx.has_type(t, vocab::CLASS) || cx.has_type(t, vocab::RDFS_CLASS))
    };

    // Named classes: declared first, then implicit references in document order.
    let mut classes = Classes::default();
    for t in &order {
        if is_class(&cx, t) {
            classes.insert(t.as_iri().unwrap());
        }
    }

    let object_props: Vec<&Term> = order
        .iter()
        .copied()
        .filter(|t| matches!(t, Term::Iri(_)) && cx.has_type(t, vocab::OBJECT_PROPERTY))
        .collect();

    // Object property endpoints.
    struct PropInfo<'d> {
        iri: &'d str,
        domain: Option<&'d str>,
        range: Option<&'d str>,
        parent: Option<&'d str>,
        labels: Vec<String>,
        pos: Position,
    }
    let mut props: Vec<PropInfo<'d>> = Vec::new();
    for t in &object_props {
        let iri = t.as_iri().unwrap();
        let node_pos = cx.node(t).unwrap().first;
        let mut info = PropInfo {
            iri,
            domain: None,
            range: None,
            parent: None,
            labels: cx.node(t).unwrap().labels.clone(),
            pos: node_pos,
        };
        for (pred, slot) in [(vocab::DOMAIN, 0), (vocab::RANGE, 1)] {
            let objs = cx.objects(t, pred);
            if objs.len() > 1 {
                cx.unsupported(
                    format!("<{iri}> has {} values for <{pred}>; using the first", objs.len()),
                    objs[1].1,
                )?;
            }
            if let Some((obj, pos)) = objs.first() {
                match obj {
                    Term::Iri(c) => {
                        classes.implicit(c, "a domain or range", *pos, &mut cx.warnings);
                        if slot == 0 {
                            info.domain = Some(c);
                        } else {
                            info.range = Some(c);
                        }
                    }
                    other => cx.unsupported(
                        format!("non-named class {other} as domain/range of <{iri}>"),
                        *pos,
                    )?,
                }
            }
        }
        if let Some((obj, pos)) = cx.objects(t, vocab::SUB_PROPERTY_OF).first() {
            match obj {
                Term::Iri(parent) => info.parent = Some(parent),
                other => cx.unsupported(format!("sub-property of {other}"), *pos)?,
            }
        }
        props.push(info);
    }

    // Restrictions reachable from rdfs:subClassOf.
    let mut is_a: Vec<(&str, String)> = Vec::new();
    let mut restricted_by: Vec<(&'d Term, &'d str)> = Vec::new();
    let mut seen_is_a = HashSet::new();
    for t in &order {
        let Term::Iri(sub) = t else { continue };
        for (obj, pos) in cx.objects(t, vocab::SUB_CLASS_OF) {
            if !classes.set.contains(sub.as_str()) {
                classes.implicit(sub, "a subclass", pos, &mut cx.warnings);
            }
            match obj {
                Term::Iri(sup) if sup == sub => {
                    cx.warnings.push(format!("{pos}: dropped trivial <{sub}> subClassOf itself"));
                }
                Term::Iri(sup) => {
                    classes.implicit(sup, "a superclass", pos, &mut cx.warnings);
                    if seen_is_a.insert((sub.as_str(), sup.as_str())) {
                        is_a.push((sub, sup.clone()));
                    }
                }
                Term::Blank(_) if cx.has_type(obj, vocab::RESTRICTION) => {
                    restricted_by.push((obj, sub));
                }
                other => cx.unsupported(format!("subClassOf class expression {other}"), pos)?,
            }
        }
    }

    // Etype ids are local names unless two classes share one.
    let mut local_count: HashMap<String, usize> = HashMap::new();
    for iri in &classes.order {
        *local_count.entry(local_name(iri)).or_default() += 1;
    }
    let class_id = |iri: &str| {
        let local = local_name(iri);
        if local_count.get(&local).copied().unwrap_or(0) > 1 {
            iri.to_owned()
        } else {
            local
        }
    };

    let mut skg = Skg::new(
        opts.name
            .clone()
            .or_else(|| {
                order
                    .iter()
                    .find(|t| cx.has_type(t, vocab::ONTOLOGY))
                    .and_then(|t| t.as_iri())
                    .map(local_name)
            })
            .unwrap_or_else(|| "imported".to_owned()),
    );
    let mut etype_index: HashMap<&str, usize> = HashMap::new();
    for iri in &classes.order {
        let node = cx.node(&Term::Iri((*iri).to_owned()));
        let labels = match node {
            Some(n) if !n.labels.is_empty() => n.labels.clone(),
            _ => vec![local_name(iri)],
        };
        etype_index.insert(iri, skg.etypes.len());
        skg.etypes.push(Etype {
            id: class_id(iri),
            labels,
            anonymous: false,
            data_properties: Vec::new(),
            instances: Vec::new(),
        });
    }

    // Data properties attach to their domain class.
    for t in &order {
        if !(matches!(t, Term::Iri(_)) && cx.has_type(t, vocab::DATATYPE_PROPERTY)) {
            continue;
        }
        let iri = t.as_iri().unwrap();
        let name = cx
            .node(t)
            .and_then(|n| n.labels.first().cloned())
            .unwrap_or_else(|| local_name(iri));
        for (obj, pos) in cx.objects(t, vocab::DOMAIN) {
            match obj.as_iri().and_then(|c| etype_index.get(c)) {
                Some(&i) => skg.etypes[i].data_properties.push(name.clone()),
                None => cx.warnings.push(format!(
                    "{pos}: data property <{iri}> has domain {obj} which is not a known class"
                )),
            }
        }
    }

    // Instance membership.
    for t in &order {
        let Term::Iri(iri) = t else { continue };
        if classes.set.contains(iri.as_str()) {
            continue;
        }
        let node = cx.node(t).unwrap();
        for ty in node.types.clone() {
            if let Some(&i) = etype_index.get(ty) {
                if !skg.etypes[i].instances.iter().any(|x| x == iri) {
                    skg.etypes[i].instances.push(iri.clone());
                }
            }
        }
    }

    for (sub, sup) in &is_a {
        skg.is_a_edges.push(IsA::new(class_id(sub), class_id(sup)));
    }

    let mut property_ids: HashSet<String> = HashSet::new();
    let mut emitted_props: HashMap<&str, String> = HashMap::new();
    let mut used_props: HashSet<&str> = HashSet::new();
    for info in &props {
        match (info.domain, info.range) {
            (Some(d), Some(r)) => {
                let id = unique_id(local_name(info.iri), &mut property_ids, "");
                emitted_props.insert(info.iri, id.clone());
                used_props.insert(info.iri);
                skg.object_properties.push(ObjectProperty {
                    id,
                    labels: label_or_local(&info.labels, info.iri),
                    domain: class_id(d),
                    range: class_id(r),
                    sub_property_of: None,
                    synthetic: false,
                });
            }
            (None, None) => {}
            _ => cx.warnings.push(format!(
                "{}: object property <{}> lacks a domain or range; no edge created",
                info.pos, info.iri
            )),
        }
    }
    for info in &props {
        if let (Some(parent), Some(id)) = (info.parent, emitted_props.get(info.iri)) {
            match emitted_props.get(parent) {
                Some(pid) => {
                    let p = skg.object_properties.iter_mut().find(|p| &p.id == id).unwrap();
                    p.sub_property_of = Some(pid.clone());
                }
                None => cx.warnings.push(format!(
                    "{}: <{}> is a sub-property of <{parent}>, which has no edge; link dropped",
                    info.pos, info.iri
                )),
            }
        }
    }

    // Restrictions: one anonymous etype per blank node, shared by all its subclasses.
    let mut anon_ids: HashMap<&Term, String> = HashMap::new();
    let ids_taken: HashSet<String> = skg.etypes.iter().map(|e| e.id.clone()).collect();
    for (node, sub) in &restricted_by {
        let anon = match anon_ids.get(node) {
            Some(id) => id.clone(),
            None => {
                let pos = cx.node(node).unwrap().first;
                let Some((on_prop, _)) = cx.objects(node, vocab::ON_PROPERTY).first().copied()
                else {
                    return Err(ImportError::MissingOnProperty {
                        node: node.to_string(),
                        pos,
                    });
                };
                let Term::Iri(prop_iri) = on_prop else {
                    return Err(ImportError::Unsupported {
                        what: format!("restriction on non-named property {on_prop}"),
                        pos,
                    });
                };
                let filler = restriction_filler(&cx, node, prop_iri);
                let filler_iri = match filler {
                    Some((Term::Iri(c), fpos)) => {
                        if !classes.set.contains(c.as_str()) {
                            classes.implicit(c, "a restriction filler", fpos, &mut cx.warnings);
                            etype_index.insert(c, skg.etypes.len());
                            skg.etypes.push(Etype {
                                id: class_id(c),
                                labels: vec![local_name(c)],
                                anonymous: false,
                                data_properties: Vec::new(),
                                instances: Vec::new(),
                            });
                        }
                        c.as_str()
                    }
                    Some((other, _)) => {
                        return Err(ImportError::FillerNotNamed {
                            node: node.to_string(),
                            detail: format!("filler {other} is a class expression"),
                            pos,
                        })
                    }
                    None => {
                        return Err(ImportError::FillerNotNamed {
                            node: node.to_string(),
                            detail: "no someValuesFrom/allValuesFrom/onClass and no declared range"
                                .into(),
                            pos,
                        })
                    }
                };
                for (pred, _, ppos) in &cx.node(node).unwrap().edges.clone() {
                    if ![
                        vocab::ON_PROPERTY,
                        vocab::SOME_VALUES_FROM,
                        vocab::ALL_VALUES_FROM,
                        vocab::ON_CLASS,
                        vocab::CARDINALITY,
                        vocab::MIN_CARDINALITY,
                        vocab::MAX_CARDINALITY,
                        vocab::QUALIFIED_CARDINALITY,
                        vocab::MIN_QUALIFIED_CARDINALITY,
                        vocab::MAX_QUALIFIED_CARDINALITY,
                    ]
                    .contains(pred)
                    {
                        cx.unsupported(format!("restriction predicate <{pred}>"), *ppos)?;
                    }
                }
                let mut id = node.to_string();
                while ids_taken.contains(&id) {
                    id.push('_');
                }
                skg.etypes.push(Etype::anonymous(id.clone()));
                used_props.insert(prop_iri);
                let labels = props
                    .iter()
                    .find(|p| p.iri == prop_iri)
                    .map(|p| label_or_local(&p.labels, prop_iri))
                    .unwrap_or_else(|| vec![local_name(prop_iri)]);
                skg.object_properties.push(ObjectProperty {
                    id: unique_id(local_name(prop_iri), &mut property_ids, &id),
                    labels,
                    domain: id.clone(),
                    range: class_id(filler_iri),
                    sub_property_of: None,
                    synthetic: false,
                });
                anon_ids.insert(node, id.clone());
                id
            }
        };
        skg.is_a_edges.push(IsA::new(class_id(sub), anon));
    }

    // Remaining vocabulary use that this lowering does not understand.
    let handled_subject_preds = [
        vocab::SUB_CLASS_OF,
        vocab::SUB_PROPERTY_OF,
        vocab::DOMAIN,
        vocab::RANGE,
    ];
    for t in &order {
        let (first, types, edges) = {
            let n = cx.node(t).unwrap();
            (n.first, n.types.clone(), n.edges.clone())
        };
        let is_restriction = anon_ids.contains_key(t);
        if matches!(t, Term::Blank(_)) && !is_restriction {
            // Restrictions not used as a superclass, or other anonymous expressions.
            if cx.has_type(t, vocab::RESTRICTION) {
                cx.unsupported(format!("restriction {t} not used as a superclass"), first)?;
            }
            continue;
        }
        if is_restriction {
            continue;
        }
        for ty in types {
            let known = [
                vocab::CLASS,
                vocab::RDFS_CLASS,
                vocab::OBJECT_PROPERTY,
                vocab::DATATYPE_PROPERTY,
            ];
            if known.contains(&ty) || vocab::IGNORED_TYPES.contains(&ty) {
                continue;
            }
            if is_vocab(ty) {
                cx.unsupported(format!("{t} typed <{ty}>"), first)?;
            } else if !classes.set.contains(ty) {
                cx.warnings.push(format!(
                    "{}: {t} typed <{ty}>, which is not a known class; ignored",
                    first
                ));
            }
        }
        for (pred, obj, pos) in edges {
            if handled_subject_preds.contains(&pred)
                || vocab::IGNORED.contains(&pred)
                || pred == vocab::LABEL
            {
                continue;
            }
            if is_vocab(pred) {
                cx.unsupported(format!("{t} <{pred}> {obj}"), pos)?;
            }
        }
    }

    for info in &props {
        if !used_props.contains(info.iri) && info.domain.is_none() && info.range.is_none() {
            cx.warnings.push(format!(
                "{}: object property <{}> is declared but never used",
                info.pos, info.iri
            ));
        }
    }
    let used_ns: BTreeSet<&str> = doc
        .prefixes
        .iter()
        .filter(|(_, ns)| {
            doc.triples.iter().any(|t| {
                t.predicate.starts_with(ns.as_str())
                    || [&t.subject, &t.object]
                        .iter()
                        .any(|x| x.as_iri().is_some_and(|i| i.starts_with(ns.as_str())))
            })
        })
        .map(|(p, _)| p.as_str())
        .collect();
    for p in doc.prefixes.keys() {
        if !used_ns.contains(p.as_str()) {
            cx.warnings.push(format!("prefix '{p}:' is declared but never used"));
        }
    }

    let report = validate(&skg);
    if !report.is_valid() {
        let msg = report
            .errors
            .iter()
            .map(|i| format!("{} at {}: {}", i.code, i.location, i.message))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ImportError::Invalid(msg));
    }
    Ok(Lowered {
        skg,
        warnings: cx.warnings,
    })
}

#[derive(Default)]
struct Classes<'d> {
    order: Vec<&'d str>,
    set: HashSet<&'d str>,
}

impl<'d> Classes<'d> {
    fn insert(&mut self, iri: &'d str) -> bool {
        let fresh = self.set.insert(iri);
        if fresh {
            self.order.push(iri);
        }
        fresh
    }

    fn implicit(&mut self, iri: &'d str, why: &str, pos: Position, warnings: &mut Vec<String>) {
        if self.insert(iri) {
            warnings.push(format!(
                "{pos}: class <{iri}> used as {why} without a declaration; created implicitly"
            ));
        }
    }
}

fn is_vocab(iri: &str) -> bool {
    iri.starts_with(RDF) || iri.starts_with(RDFS) || iri.starts_with(OWL)
}

fn label_or_local(labels: &[String], iri: &str) -> Vec<String> {
    if labels.is_empty() {
        vec![local_name(iri)]
    } else {
        labels.to_vec()
    }
}

fn unique_id(base: String, taken: &mut HashSet<String>, qualifier: &str) -> String {
    let mut id = base.clone();
    if taken.contains(&id) && !qualifier.is_empty() {
        id = format!("{base}@{qualifier}");
    }
    let mut n = 2;
    while taken.contains(&id) {
        id = format!("{base}#{n}");
        n += 1;
    }
    taken.insert(id.clone());
    id
}

fn restriction_filler<'d>(
    cx: &Lowering<'d>,
    node: &Term,
    prop_iri: &str,
) -> Option<(&'d Term, Position)> {
    for pred in [vocab::SOME_VALUES_FROM, vocab::ALL_VALUES_FROM, vocab::ON_CLASS] {
        if let Some(found) = cx.objects(node, pred).first() {
            return Some(*found);
        }
    }
    let is_cardinality = [
        vocab::CARDINALITY,
        vocab::MIN_CARDINALITY,
        vocab::MAX_CARDINALITY,
        vocab::QUALIFIED_CARDINALITY,
        vocab::MIN_QUALIFIED_CARDINALITY,
        vocab::MAX_QUALIFIED_CARDINALITY,
    ]
    .iter()
    .any(|p| !cx.objects(node, p).is_empty());
    if is_cardinality {
        // Unqualified cardinality: the property's declared range is the filler.
        let prop = Term::Iri(prop_iri.to_owned());
        if let Some((_, node)) = cx.nodes.get_key_value(&prop) {
            if let Some((obj, pos)) = node
                .edges
                .iter()
                .find(|(p, _, _)| *p == vocab::RANGE)
                .map(|(_, o, pos)| (*o, *pos))
            {
                return Some((obj, pos));
            }
        }
    }
    None
}
