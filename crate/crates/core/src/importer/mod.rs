//! Turtle/OWL subset import.

mod lower;
mod turtle;

use std::fmt::Write as _;

use thiserror::Error;

pub use lower::{local_name, lower_to_skg, ImportError, LowerOptions, Lowered, OWL, RDF, RDFS};
pub use turtle::{parse_turtle, BlankNode, Literal, Position, Term, Triple, TurtleDocument, TurtleError};

use crate::model::Skg;

#[derive(Debug, Error)]
pub enum LoadTurtleError {
    #[error(transparent)]
    Parse(#[from] TurtleError),
    #[error(transparent)]
    Lower(#[from] ImportError),
}

/// Parse and lower in one step.
pub fn import_turtle(text: &str, opts: &LowerOptions) -> Result<Lowered, LoadTurtleError> {
    let doc = parse_turtle(text)?;
    Ok(lower_to_skg(&doc, opts)?)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExportError {
    #[error("anonymous etype '{0}' must have exactly one outgoing property and no incoming ones")]
    UnrepresentableRestriction(String),
}

fn escape_local(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

fn escape_literal(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// Renders `skg` in the importable Turtle subset. Each anonymous etype becomes
/// an `owl:Restriction` blank node, so it must carry exactly one outgoing
/// property.
pub fn to_turtle(skg: &Skg) -> Result<String, ExportError> {
    let base = format!("urn:skg:{}#", escape_local(&skg.name));
    let iri = |id: &str| format!("<{base}{}>", escape_local(id));
    let mut out = String::new();
    out.push_str("@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n");
    out.push_str("@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n");
    out.push_str("@prefix owl: <http://www.w3.org/2002/07/owl#> .\n\n");
    let _ = writeln!(out, "<urn:skg:{}> a owl:Ontology .\n", escape_local(&skg.name));

    let anonymous: std::collections::HashSet<&str> = skg.anonymous_ids();
    for e in skg.named_etypes() {
        let _ = write!(out, "{} a owl:Class", iri(&e.id));
        for l in &e.labels {
            let _ = write!(out, " ;\n    rdfs:label \"{}\"", escape_literal(l));
        }
        for edge in skg.is_a_edges.iter().filter(|x| x.sub == e.id) {
            if anonymous.contains(edge.sup.as_str()) {
                let _ = write!(out, " ;\n    rdfs:subClassOf _:r{}", escape_local(&edge.sup));
            } else {
                let _ = write!(out, " ;\n    rdfs:subClassOf {}", iri(&edge.sup));
            }
        }
        out.push_str(" .\n");
        for (i, dp) in e.data_properties.iter().enumerate() {
            let _ = writeln!(
                out,
                "<{base}{}.dp{i}> a owl:DatatypeProperty ; rdfs:domain {} ; rdfs:label \"{}\" .",
                escape_local(&e.id),
                iri(&e.id),
                escape_literal(dp)
            );
        }
        for inst in &e.instances {
            let inst_iri = if inst.contains(':') {
                format!("<{inst}>")
            } else {
                format!("<urn:skg:instance:{}>", escape_local(inst))
            };
            let _ = writeln!(out, "{inst_iri} a {} .", iri(&e.id));
        }
    }
    out.push('\n');

    for p in &skg.object_properties {
        if anonymous.contains(p.domain.as_str()) {
            continue;
        }
        if anonymous.contains(p.range.as_str()) {
            return Err(ExportError::UnrepresentableRestriction(p.range.clone()));
        }
        let _ = write!(
            out,
            "{} a owl:ObjectProperty ;\n    rdfs:domain {} ;\n    rdfs:range {}",
            iri(&p.id),
            iri(&p.domain),
            iri(&p.range)
        );
        for l in &p.labels {
            let _ = write!(out, " ;\n    rdfs:label \"{}\"", escape_literal(l));
        }
        if let Some(parent) = &p.sub_property_of {
            let _ = write!(out, " ;\n    rdfs:subPropertyOf {}", iri(parent));
        }
        out.push_str(" .\n");
    }

    for e in skg.etypes.iter().filter(|e| e.anonymous) {
        let mut outgoing = skg.object_properties.iter().filter(|p| p.domain == e.id);
        let (Some(p), None) = (outgoing.next(), outgoing.next()) else {
            return Err(ExportError::UnrepresentableRestriction(e.id.clone()));
        };
        // Restriction edges carry the restricted property's id, possibly qualified.
        let prop = p.id.split('@').next().unwrap_or(&p.id);
        let _ = writeln!(
            out,
            "_:r{} a owl:Restriction ;\n    owl:onProperty {} ;\n    owl:someValuesFrom {} .",
            escape_local(&e.id),
            iri(prop),
            iri(&p.range)
        );
    }
    Ok(out)
}
