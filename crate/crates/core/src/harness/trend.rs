//! Shape summaries of ablation curves.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::AblationResult;
use crate::metrics::Method;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Coverage,
    Flexibility,
}

/// Pearson correlation between removed-etype weight and metric change.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum Correlation {
    Value(f64),
    /// The metric change never varies.
    Flat,
    /// The weights never vary while the change does.
    Undefined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    StrictlyIncreasing,
    NonDecreasing,
    Flat,
    NonIncreasing,
    StrictlyDecreasing,
    Mixed,
    /// Fewer than two degrees present.
    Insufficient,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub degree: u8,
    /// Average coverage drop or flexibility gain over the degree's removals.
    #[serde(serialize_with = "crate::weights::ratio_string")]
    pub change: BigRational,
    pub change_decimal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricTrend {
    pub method: Method,
    pub metric: MetricKind,
    pub correlation: Correlation,
    pub monotonicity: Monotonicity,
    pub curve: Vec<CurvePoint>,
}

/// Weighted coverage starting at or above unweighted coverage, then falling
/// below it after high-degree removals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Crossover {
    pub present: bool,
    pub degrees: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultTrend {
    pub x_schema: String,
    pub y_schema: String,
    pub trends: Vec<MetricTrend>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover: Option<Crossover>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendReport {
    pub results: Vec<ResultTrend>,
}

impl ResultTrend {
    pub fn get(&self, method: Method, metric: MetricKind) -> Option<&MetricTrend> {
        self.trends.iter().find(|t| t.method == method && t.metric == metric)
    }
}

fn q(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn pearson(points: &[(BigRational, BigRational)]) -> Correlation {
    let n = q(points.len());
    if points.len() < 2 {
        return Correlation::Flat;
    }
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
        BigRational::zero(),
    );
    for (x, y) in points {
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    let vx = &sxx * &n - &sx * &sx;
    let vy = &syy * &n - &sy * &sy;
    let cov = &sxy * &n - &sx * &sy;
    if vy.is_zero() {
        return Correlation::Flat;
    }
    if vx.is_zero() {
        return Correlation::Undefined;
    }
    let r2 = &cov * &cov / (&vx * &vy);
    let sign = if cov.is_negative() { -1.0 } else { 1.0 };
    if r2 == BigRational::from_integer(1.into()) {
        Correlation::Value(sign)
    } else {
        Correlation::Value(sign * r2.to_f64().unwrap_or(f64::NAN).sqrt())
    }
}

pub(crate) fn monotonicity(values: &[BigRational]) -> Monotonicity {
    if values.len() < 2 {
        return Monotonicity::Insufficient;
    }
    let (mut up, mut down, mut same) = (0, 0, 0);
    for w in values.windows(2) {
        match w[1].cmp(&w[0]) {
            std::cmp::Ordering::Greater => up += 1,
            std::cmp::Ordering::Less => down += 1,
            std::cmp::Ordering::Equal => same += 1,
        }
    }
    match (up > 0, down > 0, same > 0) {
        (false, false, _) => Monotonicity::Flat,
        (true, false, false) => Monotonicity::StrictlyIncreasing,
        (true, false, true) => Monotonicity::NonDecreasing,
        (false, true, false) => Monotonicity::StrictlyDecreasing,
        (false, true, true) => Monotonicity::NonIncreasing,
        (true, true, _) => Monotonicity::Mixed,
    }
}

fn summarize(result: &AblationResult) -> ResultTrend {
    let mut trends = Vec::new();
    for &method in &result.methods {
        for metric in [MetricKind::Coverage, MetricKind::Flexibility] {
            // coverage drops pair with the etype's weight in Y, flexibility
            // gains with its weight in X
            let points: Vec<(BigRational, BigRational)> = result
                .removals
                .iter()
                .filter(|r| r.method == method)
                .map(|r| {
                    let w = result.weight_of(&r.etype, method).expect("weight recorded per removal");
                    match metric {
                        MetricKind::Coverage => (w.in_y.clone(), -r.delta_coverage.clone()),
                        MetricKind::Flexibility => (w.in_x.clone(), r.delta_flexibility.clone()),
                    }
                })
                .collect();
            let curve: Vec<CurvePoint> = result
                .cells
                .iter()
                .filter(|c| c.method == method)
                .map(|c| {
                    let change = match metric {
                        MetricKind::Coverage => -c.avg_delta_coverage.clone(),
                        MetricKind::Flexibility => c.avg_delta_flexibility.clone(),
                    };
                    CurvePoint {
                        degree: c.degree,
                        change_decimal: change.to_f64().unwrap_or(f64::NAN),
                        change,
                    }
                })
                .collect();
            let values: Vec<BigRational> = curve.iter().map(|p| p.change.clone()).collect();
            trends.push(MetricTrend {
                method,
                metric,
                correlation: pearson(&points),
                monotonicity: monotonicity(&values),
                curve,
            });
        }
    }
    let crossover = (result.methods.contains(&Method::Unweighted) && result.methods.contains(&Method::Weighted))
        .then(|| {
            let b1 = &result.baseline_for(Method::Unweighted).unwrap().coverage;
            let b2 = &result.baseline_for(Method::Weighted).unwrap().coverage;
            let degrees: Vec<u8> = result
                .cells
                .iter()
                .filter(|c| c.method == Method::Weighted)
                .filter(|c2| {
                    result
                        .cell(c2.degree, Method::Unweighted)
                        .is_some_and(|c1| c2.avg_coverage < c1.avg_coverage)
                })
                .map(|c| c.degree)
                .collect();
            Crossover {
                present: b2 >= b1 && !degrees.is_empty(),
                degrees,
            }
        });
    ResultTrend {
        x_schema: result.x_schema.clone(),
        y_schema: result.y_schema.clone(),
        trends,
        crossover,
    }
}

/// One summary per ablation result.
pub fn trend_summary(results: &[AblationResult]) -> TrendReport {
    TrendReport {
        results: results.iter().map(summarize).collect(),
    }
}

impl fmt::Display for Correlation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correlation::Value(v) => write!(f, "{v:.4}"),
            Correlation::Flat => f.write_str("flat"),
            Correlation::Undefined => f.write_str("undefined"),
        }
    }
}

impl fmt::Display for TrendReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{} -> {}", r.x_schema, r.y_schema)?;
            for t in &r.trends {
                let mut curve = String::new();
                for p in &t.curve {
                    let _ = write!(curve, " d{}={:.4}", p.degree, p.change_decimal);
                }
                let metric = match t.metric {
                    MetricKind::Coverage => "coverage drop",
                    MetricKind::Flexibility => "flexibility change",
                };
                writeln!(
                    f,
                    "  method {} {}: correlation {}, {:?};{}",
                    t.method, metric, t.correlation, t.monotonicity, curve
                )?;
            }
            if let Some(c) = &r.crossover {
                writeln!(
                    f,
                    "  crossover: {}{}",
                    if c.present { "yes" } else { "no" },
                    if c.degrees.is_empty() {
                        String::new()
                    } else {
                        format!(" at degrees {:?}", c.degrees)
                    }
                )?;
            }
        }
        Ok(())
    }
}
