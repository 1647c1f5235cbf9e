//! Etype-removal ablation across the three methods, trend summaries, and
//! synthetic schema pairs.

mod synthetic;
mod trend;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::equivalence::EquivalenceMapping;
use crate::metrics::{coverage_from, flexibility_from, overlap, Method, MetricsError};
use crate::model::Skg;
use crate::weights::{compute_weights, csv_field, decimal, ensure_valid, table_from_graph, Graph, WeightTable};

pub use synthetic::{generate_synthetic, hub_family, SyntheticPair, SyntheticSpec};
pub use trend::{trend_summary, Correlation, CurvePoint, Crossover, MetricKind, MetricTrend, Monotonicity, ResultTrend, TrendReport};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeEntry {
    pub etype: String,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub weight: BigRational,
    pub degree: u8,
}

/// One (removal, method) measurement. Degree 0 with an empty id is the
/// baseline with nothing removed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemovalRow {
    pub degree: u8,
    pub etype: String,
    pub method: Method,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub coverage: BigRational,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub flexibility: BigRational,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub delta_coverage: BigRational,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub delta_flexibility: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeCell {
    pub degree: u8,
    pub method: Method,
    pub removals: usize,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub avg_coverage: BigRational,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub avg_flexibility: BigRational,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub avg_delta_coverage: BigRational,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub avg_delta_flexibility: BigRational,
}

/// Weight carried by a removable etype, before removal. In Y it is the total
/// weight of the Y etypes in its group. Method 1 reuses Method 2 weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemovedWeight {
    pub etype: String,
    pub method: Method,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub in_x: BigRational,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub in_y: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AblationResult {
    pub x_schema: String,
    pub y_schema: String,
    pub methods: Vec<Method>,
    /// X's etypes binned by their Method 3 weight before any removal.
    pub degrees: Vec<DegreeEntry>,
    pub baseline: Vec<RemovalRow>,
    pub removals: Vec<RemovalRow>,
    pub cells: Vec<DegreeCell>,
    pub weights: Vec<RemovedWeight>,
    pub skipped: Vec<String>,
}

impl AblationResult {
    pub fn cell(&self, degree: u8, method: Method) -> Option<&DegreeCell> {
        self.cells.iter().find(|c| c.degree == degree && c.method == method)
    }

    pub fn baseline_for(&self, method: Method) -> Option<&RemovalRow> {
        self.baseline.iter().find(|r| r.method == method)
    }

    pub fn weight_of(&self, etype: &str, method: Method) -> Option<&RemovedWeight> {
        self.weights.iter().find(|w| w.etype == etype && w.method == method)
    }

    pub fn removed_etypes(&self, degree: u8) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.removals
            .iter()
            .filter(|r| r.degree == degree && seen.insert(r.etype.as_str()))
            .map(|r| r.etype.as_str())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,etype_id,method,coverage,flexibility,delta_coverage,delta_flexibility\n");
        for r in self.baseline.iter().chain(&self.removals) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.degree,
                csv_field(&r.etype),
                r.method,
                decimal(&r.coverage),
                decimal(&r.flexibility),
                decimal(&r.delta_coverage),
                decimal(&r.delta_flexibility)
            );
        }
        out
    }
}

fn mean(values: impl Iterator<Item = BigRational>) -> BigRational {
    let (sum, n) = values.fold((BigRational::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    sum / BigRational::from_integer(BigInt::from(n.max(1)))
}

/// Removes each named etype of X in turn and measures Coverage and
/// Flexibility against Y under every requested method. Degrees come from
/// X's Method 3 weights and stay fixed across removals.
pub fn ablate(
    x: &Skg,
    y: &Skg,
    mapping: &EquivalenceMapping,
    methods: &[Method],
) -> Result<AblationResult, MetricsError> {
    let methods: Vec<Method> = methods.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if methods.is_empty() {
        return Err(MetricsError::NoMethods);
    }
    let base_overlap = overlap(x, y, mapping)?;
    ensure_valid(x)?;
    let graph = Graph::from_skg(x);
    let degree_table = table_from_graph(x, &graph, true);
    let degrees: Vec<DegreeEntry> = degree_table
        .entries
        .iter()
        .map(|e| DegreeEntry {
            etype: e.etype.clone(),
            weight: e.weight.clone(),
            degree: e.degree,
        })
        .collect();

    let y_tables: BTreeMap<Method, Option<WeightTable>> = methods
        .iter()
        .map(|&m| {
            let t = match m {
                Method::Unweighted => None,
                m => Some(compute_weights(y, m.preprocess())?),
            };
            Ok((m, t))
        })
        .collect::<Result<_, MetricsError>>()?;
    let x_table = |g: &Graph, m: Method| match m {
        Method::Unweighted => None,
        m => Some(table_from_graph(x, g, m.preprocess())),
    };

    let baseline: Vec<RemovalRow> = methods
        .iter()
        .map(|&m| RemovalRow {
            degree: 0,
            etype: String::new(),
            method: m,
            coverage: coverage_from(&base_overlap, y_tables[&m].as_ref()),
            flexibility: flexibility_from(&base_overlap, x_table(&graph, m).as_ref()),
            delta_coverage: BigRational::zero(),
            delta_flexibility: BigRational::zero(),
        })
        .collect();

    let positions: BTreeMap<&str, usize> = x.etypes.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    let mut skipped = Vec::new();
    let mut targets = Vec::new();
    for d in &degrees {
        if degrees.len() == 1 {
            log::warn!("not removing '{}': it is the only etype of {}", d.etype, x.name);
            skipped.push(d.etype.clone());
        } else {
            targets.push(d);
        }
    }

    let per_removal = crate::par::map(&targets, |d| -> Result<Vec<RemovalRow>, MetricsError> {
        let reduced = x.without_etype(&d.etype);
        let o = overlap(&reduced, y, mapping)?;
        let g = graph.without(positions[d.etype.as_str()]);
        Ok(methods
            .iter()
            .zip(&baseline)
            .map(|(&m, before)| {
                let coverage = coverage_from(&o, y_tables[&m].as_ref());
                let flexibility = flexibility_from(&o, x_table(&g, m).as_ref());
                RemovalRow {
                    degree: d.degree,
                    etype: d.etype.clone(),
                    method: m,
                    delta_coverage: &coverage - &before.coverage,
                    delta_flexibility: &flexibility - &before.flexibility,
                    coverage,
                    flexibility,
                }
            })
            .collect())
    });
    let mut removals = Vec::new();
    for rows in per_removal {
        removals.extend(rows?);
    }
    // degree, then X's etype order, then method
    removals.sort_by_key(|r| (r.degree, positions[r.etype.as_str()], r.method));

    let mut weights = Vec::new();
    let mut y_cache: BTreeMap<bool, WeightTable> = BTreeMap::new();
    for &m in &methods {
        let pre = m.preprocess();
        let xt = table_from_graph(x, &graph, pre);
        if let std::collections::btree_map::Entry::Vacant(e) = y_cache.entry(pre) {
            e.insert(compute_weights(y, pre)?);
        }
        let yt = y_cache[&pre].lookup();
        for d in &targets {
            let group = mapping.group_of(&x.name, &d.etype).expect("checked by overlap");
            let in_y = mapping.groups[group]
                .members
                .iter()
                .filter(|r| r.schema == y.name)
                .filter_map(|r| yt.get(r.etype.as_str()))
                .fold(BigRational::zero(), |acc, e| acc + &e.weight);
            weights.push(RemovedWeight {
                etype: d.etype.clone(),
                method: m,
                in_x: xt.weight(&d.etype).cloned().unwrap_or_else(BigRational::zero),
                in_y,
            });
        }
    }

    let mut buckets: BTreeMap<(u8, Method), Vec<&RemovalRow>> = BTreeMap::new();
    for r in &removals {
        buckets.entry((r.degree, r.method)).or_default().push(r);
    }
    let cells = buckets
        .into_iter()
        .map(|((degree, method), rows)| DegreeCell {
            degree,
            method,
            removals: rows.len(),
            avg_coverage: mean(rows.iter().map(|r| r.coverage.clone())),
            avg_flexibility: mean(rows.iter().map(|r| r.flexibility.clone())),
            avg_delta_coverage: mean(rows.iter().map(|r| r.delta_coverage.clone())),
            avg_delta_flexibility: mean(rows.iter().map(|r| r.delta_flexibility.clone())),
        })
        .collect();

    Ok(AblationResult {
        x_schema: x.name.clone(),
        y_schema: y.name.clone(),
        methods,
        degrees,
        baseline,
        removals,
        cells,
        weights,
        skipped,
    })
}
