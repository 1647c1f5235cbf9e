//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes and returns JSON text. The `*_json` functions hold the
//! logic so they can be tested natively; the exported wrappers only turn
//! errors into JS exceptions.

use serde::{Deserialize, Serialize};
use skg_compat::equivalence::{EquivalenceDecision, EquivalenceMapping, Lexicon, Matcher, SimilarityConfig};
use skg_compat::harness::{ablate, hub_family, trend_summary, MetricKind};
use skg_compat::metrics::Method;
use skg_compat::model::{load_skg, Etype, Skg};
use skg_compat::weights::{compute_weights, format_ratio};
use wasm_bindgen::prelude::*;

/// The compact etype form the tier explorer edits.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtypeForm {
    pub label: String,
    pub properties: Vec<String>,
    pub instances: Vec<String>,
}

impl EtypeForm {
    fn into_schema(self, name: &str) -> (Skg, Etype) {
        let e = Etype::named(name)
            .with_labels([self.label])
            .with_data_properties(self.properties)
            .with_instances(self.instances);
        let mut s = Skg::new(name);
        s.etypes.push(e.clone());
        (s, e)
    }
}

fn parse<'a, T: Deserialize<'a>>(what: &str, text: &'a str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("{what}: {e}"))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

/// Weight table of an SKG document, optionally after is-a flattening.
pub fn weights_json(skg: &str, preprocess: bool) -> Result<String, String> {
    let skg = load_skg(skg.as_bytes()).map_err(|e| e.to_string())?;
    let table = compute_weights(&skg, preprocess).map_err(|e| e.to_string())?;
    Ok(to_json(&table))
}

/// Tiered equivalence decision for two etypes. `config` may be empty for
/// the defaults; `lexicon` holds tab-separated synonym lines.
pub fn decide_json(u: &str, v: &str, config: &str, lexicon: &str) -> Result<String, String> {
    let config: SimilarityConfig = if config.trim().is_empty() {
        SimilarityConfig::default()
    } else {
        parse("config", config)?
    };
    let lexicon = Lexicon::parse(lexicon).map_err(|e| e.to_string())?;
    let matcher = Matcher::with_resources(config, lexicon, None).map_err(|e| e.to_string())?;
    let (su, u) = parse::<EtypeForm>("first etype", u)?.into_schema("u");
    let (sv, v) = parse::<EtypeForm>("second etype", v)?.into_schema("v");
    let d: EquivalenceDecision = matcher.semantic_similarity((&su, &u), (&sv, &v));
    Ok(to_json(&d))
}

#[derive(Serialize)]
struct Curve {
    method: Method,
    metric: MetricKind,
    /// (degree, change) with the change as a decimal.
    points: Vec<(u8, f64)>,
    /// Same changes as exact ratios.
    exact: Vec<String>,
}

/// The two schemas of the built-in hub-and-periphery example.
pub fn hub_family_json() -> String {
    let p = hub_family();
    to_json(&serde_json::json!({ "x": p.x, "y": p.y }))
}

/// Removes each etype of X in turn and returns the average coverage drop
/// and flexibility gain per degree, per method. Etypes are matched by id.
pub fn ablation_json(x: &str, y: &str) -> Result<String, String> {
    let x = load_skg(x.as_bytes()).map_err(|e| format!("X: {e}"))?;
    let y = load_skg(y.as_bytes()).map_err(|e| format!("Y: {e}"))?;
    if x.name == y.name {
        return Err(format!("both schemas are named '{}'", x.name));
    }
    let mapping = EquivalenceMapping::identity(&[&x, &y], &x.name);
    let res = ablate(&x, &y, &mapping, &Method::ALL).map_err(|e| e.to_string())?;
    let report = trend_summary(std::slice::from_ref(&res));
    let curves: Vec<Curve> = report.results[0]
        .trends
        .iter()
        .map(|t| Curve {
            method: t.method,
            metric: t.metric,
            points: t.curve.iter().map(|c| (c.degree, c.change_decimal)).collect(),
            exact: t.curve.iter().map(|c| format_ratio(&c.change)).collect(),
        })
        .collect();
    Ok(to_json(&serde_json::json!({ "curves": curves, "trends": report.results[0] })))
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn weights(skg: &str, preprocess: bool) -> Result<String, JsError> {
    js(weights_json(skg, preprocess))
}

#[wasm_bindgen]
pub fn decide(u: &str, v: &str, config: &str, lexicon: &str) -> Result<String, JsError> {
    js(decide_json(u, v, config, lexicon))
}

#[wasm_bindgen(js_name = hubFamily)]
pub fn hub_family_schemas() -> String {
    hub_family_json()
}

#[wasm_bindgen]
pub fn ablation(x: &str, y: &str) -> Result<String, JsError> {
    js(ablation_json(x, y))
}
