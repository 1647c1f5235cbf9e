//! Coverage and Flexibility of one schema with respect to another.
//!
//! Method 1 counts etypes. Method 2 weights them by raw incidence, Method 3
//! by incidence after is-a flattening. Coverage uses the target schema's
//! weights, Flexibility the source schema's.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivalence::EquivalenceMapping;
use crate::model::Skg;
use crate::weights::{compute_weights, csv_field, decimal, WeightTable, WeightsError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("the mapping does not mention etype '{etype}' of schema '{schema}'")]
    Unmapped { schema: String, etype: String },
    #[error(transparent)]
    Weights(#[from] WeightsError),
    #[error("no methods requested")]
    NoMethods,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Method {
    Unweighted = 1,
    Weighted = 2,
    Flattened = 3,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Unweighted, Method::Weighted, Method::Flattened];

    /// Whether weights are computed after is-a flattening.
    pub fn preprocess(self) -> bool {
        self == Method::Flattened
    }
}

impl TryFrom<u8> for Method {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Method::Unweighted),
            2 => Ok(Method::Weighted),
            3 => Ok(Method::Flattened),
            _ => Err(format!("unknown method {v}; expected 1, 2 or 3")),
        }
    }
}

impl From<Method> for u8 {
    fn from(m: Method) -> u8 {
        m as u8
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Xy,
    Yx,
    Both,
}

/// How the etypes of two schemas fall into shared and one-sided groups.
#[derive(Clone, Debug, PartialEq)]
pub struct Overlap {
    /// Named etypes of X whose group has a named etype of Y.
    pub x_shared: Vec<String>,
    pub x_only: Vec<String>,
    pub y_covered: Vec<String>,
    pub y_only: Vec<String>,
    pub shared_groups: BTreeSet<String>,
    pub x_only_groups: BTreeSet<String>,
    pub y_only_groups: BTreeSet<String>,
}

fn groups_of(skg: &Skg, mapping: &EquivalenceMapping) -> Result<Vec<(String, usize)>, MetricsError> {
    skg.named_etypes()
        .map(|e| {
            mapping
                .group_of(&skg.name, &e.id)
                .map(|g| (e.id.clone(), g))
                .ok_or_else(|| MetricsError::Unmapped {
                    schema: skg.name.clone(),
                    etype: e.id.clone(),
                })
        })
        .collect()
}

pub fn overlap(x: &Skg, y: &Skg, mapping: &EquivalenceMapping) -> Result<Overlap, MetricsError> {
    let xs = groups_of(x, mapping)?;
    let ys = groups_of(y, mapping)?;
    let x_groups: HashSet<usize> = xs.iter().map(|(_, g)| *g).collect();
    let y_groups: HashSet<usize> = ys.iter().map(|(_, g)| *g).collect();
    let canonical = |g: usize| mapping.groups[g].canonical.clone();
    let mut o = Overlap {
        x_shared: Vec::new(),
        x_only: Vec::new(),
        y_covered: Vec::new(),
        y_only: Vec::new(),
        shared_groups: BTreeSet::new(),
        x_only_groups: BTreeSet::new(),
        y_only_groups: BTreeSet::new(),
    };
    for (id, g) in xs {
        if y_groups.contains(&g) {
            o.shared_groups.insert(canonical(g));
            o.x_shared.push(id);
        } else {
            o.x_only_groups.insert(canonical(g));
            o.x_only.push(id);
        }
    }
    for (id, g) in ys {
        if x_groups.contains(&g) {
            o.y_covered.push(id);
        } else {
            o.y_only_groups.insert(canonical(g));
            o.y_only.push(id);
        }
    }
    Ok(o)
}

fn ratio(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn sum_weights(table: &WeightTable, ids: &[String]) -> BigRational {
    let lookup = table.lookup();
    ids.iter()
        .filter_map(|id| lookup.get(id.as_str()))
        .fold(BigRational::zero(), |acc, e| acc + &e.weight)
}

/// Coverage from an overlap and, for methods 2 and 3, Y's weight table.
pub fn coverage_from(o: &Overlap, y_table: Option<&WeightTable>) -> BigRational {
    let total = o.y_covered.len() + o.y_only.len();
    if total == 0 {
        return BigRational::one();
    }
    match y_table {
        None => ratio(o.y_covered.len(), total),
        Some(t) => sum_weights(t, &o.y_covered),
    }
}

/// Flexibility from an overlap and, for methods 2 and 3, X's weight table.
pub fn flexibility_from(o: &Overlap, x_table: Option<&WeightTable>) -> BigRational {
    let total = o.x_shared.len() + o.x_only.len();
    if total == 0 {
        return BigRational::zero();
    }
    match x_table {
        None => ratio(o.x_only.len(), total),
        Some(t) => sum_weights(t, &o.x_only),
    }
}

fn table(skg: &Skg, method: Method) -> Result<Option<WeightTable>, MetricsError> {
    Ok(match method {
        Method::Unweighted => None,
        m => Some(compute_weights(skg, m.preprocess())?),
    })
}

pub fn coverage(x: &Skg, y: &Skg, mapping: &EquivalenceMapping, method: Method) -> Result<BigRational, MetricsError> {
    let o = overlap(x, y, mapping)?;
    Ok(coverage_from(&o, table(y, method)?.as_ref()))
}

pub fn flexibility(
    x: &Skg,
    y: &Skg,
    mapping: &EquivalenceMapping,
    method: Method,
) -> Result<BigRational, MetricsError> {
    let o = overlap(x, y, mapping)?;
    Ok(flexibility_from(&o, table(x, method)?.as_ref()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub from_schema: String,
    pub to_schema: String,
    pub method: Method,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub coverage: BigRational,
    pub coverage_decimal: f64,
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub flexibility: BigRational,
    pub flexibility_decimal: f64,
    pub shared_etypes: Vec<String>,
    pub x_only: Vec<String>,
    pub y_only: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub weight_tables: Vec<WeightTable>,
}

pub(crate) fn as_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn reports_one_way(
    x: &Skg,
    y: &Skg,
    mapping: &EquivalenceMapping,
    methods: &BTreeSet<Method>,
) -> Result<Vec<ComparisonReport>, MetricsError> {
    let o = overlap(x, y, mapping)?;
    let mut out = Vec::new();
    for &method in methods {
        let (xt, yt) = (table(x, method)?, table(y, method)?);
        let coverage = coverage_from(&o, yt.as_ref());
        let flexibility = flexibility_from(&o, xt.as_ref());
        out.push(ComparisonReport {
            from_schema: x.name.clone(),
            to_schema: y.name.clone(),
            method,
            coverage_decimal: as_f64(&coverage),
            flexibility_decimal: as_f64(&flexibility),
            coverage,
            flexibility,
            shared_etypes: o.shared_groups.iter().cloned().collect(),
            x_only: o.x_only_groups.iter().cloned().collect(),
            y_only: o.y_only_groups.iter().cloned().collect(),
            weight_tables: xt.into_iter().chain(yt).collect(),
        });
    }
    Ok(out)
}

/// One report per method, for X against Y, Y against X, or both (X first).
pub fn compare(
    x: &Skg,
    y: &Skg,
    mapping: &EquivalenceMapping,
    methods: &[Method],
    direction: Direction,
) -> Result<Vec<ComparisonReport>, MetricsError> {
    let methods: BTreeSet<Method> = methods.iter().copied().collect();
    if methods.is_empty() {
        return Err(MetricsError::NoMethods);
    }
    let mut out = Vec::new();
    if matches!(direction, Direction::Xy | Direction::Both) {
        out.extend(reports_one_way(x, y, mapping, &methods)?);
    }
    if matches!(direction, Direction::Yx | Direction::Both) {
        out.extend(reports_one_way(y, x, mapping, &methods)?);
    }
    Ok(out)
}

pub fn reports_to_csv(reports: &[ComparisonReport]) -> String {
    let mut out = String::from("from,to,method,coverage,flexibility\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.from_schema),
            csv_field(&r.to_schema),
            r.method,
            decimal(&r.coverage),
            decimal(&r.flexibility)
        );
    }
    out
}
