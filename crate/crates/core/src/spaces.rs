//! Value posets, poset-valued distances, the λ-map class and ψ / ψ̄ rules.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, MapError, Result};
use crate::seqcore::{apply_at, MapRef, Point};
use crate::table::{DistanceTable, FinitePoset};
use crate::verdict::{Tolerances, Verdict, Witness};

/// An element of the value set `Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
    Element(usize),
}

impl Value {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    /// Flattened numeric payload used in witnesses.
    pub fn numbers(&self) -> Vec<f64> {
        match self {
            Value::Scalar(x) => vec![*x],
            Value::Vector(v) => v.clone(),
            Value::Element(e) => vec![*e as f64],
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(x) => write!(f, "{x}"),
            Value::Vector(v) => write!(f, "{v:?}"),
            Value::Element(e) => write!(f, "e{e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Lt,
    Eq,
    Gt,
    Incomparable,
}

impl Comparison {
    pub fn is_le(self) -> bool {
        matches!(self, Comparison::Lt | Comparison::Eq)
    }

    fn from_ordering(o: Option<Ordering>) -> Self {
        match o {
            Some(Ordering::Less) => Comparison::Lt,
            Some(Ordering::Equal) => Comparison::Eq,
            Some(Ordering::Greater) => Comparison::Gt,
            None => Comparison::Incomparable,
        }
    }
}

/// The ordered value set `(Y, ≤)` together with its limit surrogate.
#[derive(Clone, Debug)]
pub enum PosetSpec {
    /// Reals with the usual order; distances live in the nonnegative half.
    Real,
    /// `ℝᵈ` ordered componentwise.
    Componentwise(usize),
    Finite(Arc<FinitePoset>),
}

impl PartialEq for PosetSpec {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PosetSpec::Real, PosetSpec::Real) => true,
            (PosetSpec::Componentwise(a), PosetSpec::Componentwise(b)) => a == b,
            (PosetSpec::Finite(a), PosetSpec::Finite(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl PosetSpec {
    pub fn name(&self) -> String {
        match self {
            PosetSpec::Real => "real".into(),
            PosetSpec::Componentwise(d) => format!("componentwise-{d}"),
            PosetSpec::Finite(p) => format!("finite-{}", p.len()),
        }
    }

    fn mismatch(&self, v: &Value) -> Error {
        Error::invalid(format!("value {v} does not belong to poset {}", self.name()))
    }

    pub fn check_member(&self, v: &Value) -> Result<()> {
        let ok = match (self, v) {
            (PosetSpec::Real, Value::Scalar(x)) => !x.is_nan(),
            (PosetSpec::Componentwise(d), Value::Vector(x)) => x.len() == *d && x.iter().all(|c| !c.is_nan()),
            (PosetSpec::Finite(p), Value::Element(e)) => *e < p.len(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch(v))
        }
    }

    pub fn compare(&self, a: &Value, b: &Value) -> Result<Comparison> {
        self.check_member(a)?;
        self.check_member(b)?;
        Ok(match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Comparison::from_ordering(x.partial_cmp(y)),
            (Value::Vector(x), Value::Vector(y)) => {
                let le = x.iter().zip(y).all(|(p, q)| p <= q);
                let ge = x.iter().zip(y).all(|(p, q)| p >= q);
                match (le, ge) {
                    (true, true) => Comparison::Eq,
                    (true, false) => Comparison::Lt,
                    (false, true) => Comparison::Gt,
                    (false, false) => Comparison::Incomparable,
                }
            }
            (Value::Element(x), Value::Element(y)) => match self {
                PosetSpec::Finite(p) => p.compare(*x, *y),
                _ => unreachable!("membership checked above"),
            },
            _ => unreachable!("membership checked above"),
        })
    }

    pub fn leq(&self, a: &Value, b: &Value) -> Result<bool> {
        Ok(self.compare(a, b)?.is_le())
    }

    /// `a ≤ b + slack` (componentwise on vectors, exact on finite posets).
    pub fn leq_within(&self, a: &Value, b: &Value, slack: f64) -> Result<bool> {
        let shifted = match b {
            Value::Scalar(x) => Value::Scalar(x + slack),
            Value::Vector(x) => Value::Vector(x.iter().map(|c| c + slack).collect()),
            Value::Element(_) => b.clone(),
        };
        self.leq(a, &shifted)
    }

    /// Spread between two values used by the limit surrogate.
    pub fn dispersion(&self, a: &Value, b: &Value) -> f64 {
        match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => (x - y).abs(),
            (Value::Vector(x), Value::Vector(y)) if x.len() == y.len() => x
                .iter()
                .zip(y)
                .fold(0.0_f64, |m, (p, q)| m.max((p - q).abs())),
            (Value::Element(x), Value::Element(y)) if x == y => 0.0,
            _ => f64::INFINITY,
        }
    }

    pub fn magnitude(&self, v: &Value) -> Option<f64> {
        match v {
            Value::Scalar(x) => Some(x.abs()),
            Value::Vector(x) => Some(x.iter().fold(0.0_f64, |m, c| m.max(c.abs()))),
            Value::Element(_) => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, PosetSpec::Finite(_))
    }

    pub fn zero(&self) -> Option<Value> {
        match self {
            PosetSpec::Real => Some(Value::Scalar(0.0)),
            PosetSpec::Componentwise(d) => Some(Value::Vector(vec![0.0; *d])),
            PosetSpec::Finite(_) => None,
        }
    }

    fn fold_numeric(&self, values: &[Value], pick: fn(f64, f64) -> f64) -> Option<Value> {
        let first = values.first()?;
        Some(match first {
            Value::Scalar(_) => Value::Scalar(
                values
                    .iter()
                    .filter_map(Value::as_scalar)
                    .reduce(pick)?,
            ),
            Value::Vector(v) => {
                let mut acc = v.clone();
                for other in &values[1..] {
                    if let Value::Vector(w) = other {
                        for (a, b) in acc.iter_mut().zip(w) {
                            *a = pick(*a, *b);
                        }
                    }
                }
                Value::Vector(acc)
            }
            Value::Element(_) => return None,
        })
    }

    /// Some element above every given value, if one exists.
    pub fn upper_bound(&self, values: &[Value]) -> Option<Value> {
        match self {
            PosetSpec::Finite(p) => {
                let idx: Vec<usize> = values
                    .iter()
                    .filter_map(|v| match v {
                        Value::Element(e) => Some(*e),
                        _ => None,
                    })
                    .collect();
                p.least_upper_candidate(&idx).map(Value::Element)
            }
            _ => self.fold_numeric(values, f64::max),
        }
    }

    /// Some element below every given value, if one exists.
    pub fn lower_bound(&self, values: &[Value]) -> Option<Value> {
        match self {
            PosetSpec::Finite(p) => {
                let idx: Vec<usize> = values
                    .iter()
                    .filter_map(|v| match v {
                        Value::Element(e) => Some(*e),
                        _ => None,
                    })
                    .collect();
                p.greatest_lower_candidate(&idx).map(Value::Element)
            }
            _ => self.fold_numeric(values, f64::min),
        }
    }

    /// Center of the bounding box (numeric) or the common element (finite).
    pub fn center(&self, values: &[Value]) -> Option<Value> {
        match self {
            PosetSpec::Finite(_) => {
                let first = values.first()?;
                values.iter().all(|v| v == first).then(|| first.clone())
            }
            _ => {
                let lo = self.fold_numeric(values, f64::min)?;
                let hi = self.fold_numeric(values, f64::max)?;
                Some(match (lo, hi) {
                    (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a + (b - a) / 2.0),
                    (Value::Vector(a), Value::Vector(b)) => {
                        Value::Vector(a.iter().zip(&b).map(|(x, y)| x + (y - x) / 2.0).collect())
                    }
                    _ => return None,
                })
            }
        }
    }

    /// Largest dispersion of `values` around `center`.
    pub fn spread(&self, center: &Value, values: &[Value]) -> f64 {
        values
            .iter()
            .map(|v| self.dispersion(center, v))
            .fold(0.0, f64::max)
    }

    /// Limit surrogate for a value sequence: the last `window` values sit
    /// within `eps` of a single value.
    pub fn settle(&self, values: &[Value], tol: &Tolerances) -> Option<Value> {
        if values.is_empty() {
            return None;
        }
        let w = tol.window.min(values.len());
        let tail = &values[values.len() - w..];
        let c = self.center(tail)?;
        (self.spread(&c, tail) <= tol.eps).then_some(c)
    }

    /// Some value strictly above `v` (used to perturb coordinates upward).
    pub(crate) fn bump(&self, v: &Value) -> Option<Value> {
        match v {
            Value::Scalar(x) => Some(Value::Scalar(x + x.abs() + 1.0)),
            Value::Vector(x) => Some(Value::Vector(x.iter().map(|c| c + c.abs() + 1.0).collect())),
            Value::Element(e) => match self {
                PosetSpec::Finite(p) => p.strictly_above(*e).map(Value::Element),
                _ => None,
            },
        }
    }
}

/// `poset_compare`: the order on `Y`.
pub fn poset_compare(p: &PosetSpec, a: &Value, b: &Value) -> Result<Comparison> {
    p.compare(a, b)
}

/// Catalog of `Y`-valued distances.
#[derive(Clone, Debug)]
pub enum DistanceSpec {
    Euclidean,
    Sup,
    /// `p(x, y) = max(x, y)` on `ℝ₊`.
    PartialMetricMax,
    /// `d(x, y) = |x| + |y|`.
    DislocatedSum,
    /// `d(x, y) = (|x₁−y₁|, …, |x_d−y_d|)` in `ℝᵈ` ordered componentwise.
    ConeComponentwise(usize),
    Table(Arc<DistanceTable>),
}

impl DistanceSpec {
    pub fn name(&self) -> String {
        match self {
            DistanceSpec::Euclidean => "euclidean".into(),
            DistanceSpec::Sup => "sup".into(),
            DistanceSpec::PartialMetricMax => "partial-max".into(),
            DistanceSpec::DislocatedSum => "dislocated-sum".into(),
            DistanceSpec::ConeComponentwise(d) => format!("cone-{d}"),
            DistanceSpec::Table(t) => format!("table-{}", t.len()),
        }
    }

    pub fn value_space(&self) -> PosetSpec {
        match self {
            DistanceSpec::ConeComponentwise(d) => PosetSpec::Componentwise(*d),
            _ => PosetSpec::Real,
        }
    }

    /// `d(x, y) = 0 ⇔ x = y`, so constant sequences are the only periodic
    /// sequences with bounded step sums.
    pub fn is_metric_like(&self) -> bool {
        match self {
            DistanceSpec::Euclidean | DistanceSpec::Sup | DistanceSpec::ConeComponentwise(_) => true,
            DistanceSpec::Table(t) => t.is_metric_like(),
            DistanceSpec::PartialMetricMax | DistanceSpec::DislocatedSum => false,
        }
    }

    fn scalar_pair(&self, x: &Point, y: &Point) -> Result<(f64, f64)> {
        match (x.as_scalar(), y.as_scalar()) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::invalid(format!("{} needs scalar points, got {x} and {y}", self.name()))),
        }
    }

    pub fn evaluate(&self, x: &Point, y: &Point) -> Result<Value> {
        match self {
            DistanceSpec::Euclidean => {
                let (a, b) = real_pair(x, y)?;
                Ok(Value::Scalar(
                    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt(),
                ))
            }
            DistanceSpec::Sup => {
                real_pair(x, y)?;
                Ok(Value::Scalar(x.sup_distance(y).unwrap_or(f64::INFINITY)))
            }
            DistanceSpec::PartialMetricMax => {
                let (a, b) = self.scalar_pair(x, y)?;
                Ok(Value::Scalar(a.max(b)))
            }
            DistanceSpec::DislocatedSum => {
                let (a, b) = self.scalar_pair(x, y)?;
                Ok(Value::Scalar(a.abs() + b.abs()))
            }
            DistanceSpec::ConeComponentwise(d) => {
                let (a, b) = real_pair(x, y)?;
                if a.len() != *d {
                    return Err(Error::invalid(format!("cone distance expects dimension {d}, got {}", a.len())));
                }
                Ok(Value::Vector(a.iter().zip(b).map(|(p, q)| (p - q).abs()).collect()))
            }
            DistanceSpec::Table(t) => {
                let (i, j) = match (x, y) {
                    (Point::Label { index: i, .. }, Point::Label { index: j, .. }) => (*i, *j),
                    _ => return Err(Error::invalid("table distance needs label points")),
                };
                t.get(i, j).map(Value::Scalar)
            }
        }
    }
}

fn real_pair<'a>(x: &'a Point, y: &'a Point) -> Result<(&'a [f64], &'a [f64])> {
    match (x.as_real(), y.as_real()) {
        (Some(a), Some(b)) if a.len() == b.len() => Ok((a, b)),
        _ => Err(Error::invalid(format!("distance needs real points of equal dimension, got {x} and {y}"))),
    }
}

/// Checks `d(x,y)=d(y,x)=d(x,x)=d(y,y) ⇒ x=y` on the sampled pairs.
pub fn distance_axiom_check(d: &DistanceSpec, samples: &[(Point, Point)]) -> Result<Verdict> {
    if samples.is_empty() {
        return Err(Error::invalid("distance_axiom_check needs at least one pair"));
    }
    let y = d.value_space();
    for (k, (a, b)) in samples.iter().enumerate() {
        if a == b {
            continue;
        }
        let vals = [d.evaluate(a, b)?, d.evaluate(b, a)?, d.evaluate(a, a)?, d.evaluate(b, b)?];
        let all_eq = vals[1..]
            .iter()
            .map(|v| y.compare(&vals[0], v))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|c| c == Comparison::Eq);
        if all_eq {
            return Ok(Verdict::refuted(
                Witness::new(format!("d({a},{b}) = d({b},{a}) = d({a},{a}) = d({b},{b}) with {a} ≠ {b}"))
                    .indices([k])
                    .values(vals[0].numbers()),
            ));
        }
    }
    Ok(Verdict::certified(
        Witness::new(format!("no collapsing pair among {} samples", samples.len())).values([samples.len() as f64]),
    ))
}

/// `α ≤ d(x, y) ≤ β` for all pairs of a finite point set.
pub fn bounded_set(d: &DistanceSpec, points: &[Point]) -> Result<Option<(Value, Value)>> {
    let mut vals = Vec::with_capacity(points.len() * points.len());
    for a in points {
        for b in points {
            vals.push(d.evaluate(a, b)?);
        }
    }
    let y = d.value_space();
    Ok(match (y.lower_bound(&vals), y.upper_bound(&vals)) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        _ => None,
    })
}

type ValueRule = Arc<dyn Fn(&Value) -> std::result::Result<Value, MapError> + Send + Sync>;

/// A self-map of `Y`, candidate member of the class Λ(Y).
#[derive(Clone)]
pub enum LambdaMap {
    /// `y ↦ c·y`
    Scale(f64),
    /// `y ↦ (c₁y₁, …, c_d y_d)`
    ComponentScale(Vec<f64>),
    /// `y ↦ y + c`
    Shift(f64),
    /// `y ↦ 0`
    Zero,
    Identity,
    /// Finite poset element `e ↦ table[e]`.
    Table(Vec<usize>),
    Custom {
        name: String,
        rule: ValueRule,
        monotone: bool,
    },
}

impl fmt::Debug for LambdaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl LambdaMap {
    pub fn custom<F>(name: impl Into<String>, monotone: bool, rule: F) -> Self
    where
        F: Fn(&Value) -> std::result::Result<Value, MapError> + Send + Sync + 'static,
    {
        LambdaMap::Custom {
            name: name.into(),
            rule: Arc::new(rule),
            monotone,
        }
    }

    pub fn name(&self) -> String {
        match self {
            LambdaMap::Scale(c) => format!("scale({c})"),
            LambdaMap::ComponentScale(c) => format!("component-scale({c:?})"),
            LambdaMap::Shift(c) => format!("shift({c})"),
            LambdaMap::Zero => "zero".into(),
            LambdaMap::Identity => "identity".into(),
            LambdaMap::Table(t) => format!("table({t:?})"),
            LambdaMap::Custom { name, .. } => name.clone(),
        }
    }

    pub fn claimed_monotone(&self) -> bool {
        match self {
            LambdaMap::Scale(c) => *c >= 0.0,
            LambdaMap::ComponentScale(c) => c.iter().all(|x| *x >= 0.0),
            LambdaMap::Shift(_) | LambdaMap::Zero | LambdaMap::Identity | LambdaMap::Table(_) => true,
            LambdaMap::Custom { monotone, .. } => *monotone,
        }
    }

    pub fn apply(&self, v: &Value) -> Result<Value> {
        let bad = || Error::invalid(format!("λ-map {} cannot act on {v}", self.name()));
        Ok(match (self, v) {
            (LambdaMap::Identity, _) => v.clone(),
            (LambdaMap::Scale(c), Value::Scalar(x)) => Value::Scalar(c * x),
            (LambdaMap::Scale(c), Value::Vector(x)) => Value::Vector(x.iter().map(|y| c * y).collect()),
            (LambdaMap::ComponentScale(c), Value::Vector(x)) if c.len() == x.len() => {
                Value::Vector(x.iter().zip(c).map(|(y, k)| k * y).collect())
            }
            (LambdaMap::Shift(c), Value::Scalar(x)) => Value::Scalar(x + c),
            (LambdaMap::Shift(c), Value::Vector(x)) => Value::Vector(x.iter().map(|y| y + c).collect()),
            (LambdaMap::Zero, Value::Scalar(_)) => Value::Scalar(0.0),
            (LambdaMap::Zero, Value::Vector(x)) => Value::Vector(vec![0.0; x.len()]),
            (LambdaMap::Table(t), Value::Element(e)) => Value::Element(*t.get(*e).ok_or_else(bad)?),
            (LambdaMap::Custom { rule, .. }, _) => rule(v).map_err(|e| Error::eval(0, e))?,
            _ => return Err(bad()),
        })
    }

    pub fn iterate(&self, v: &Value, n: usize) -> Result<Value> {
        let mut y = v.clone();
        for _ in 0..n {
            y = self.apply(&y)?;
        }
        Ok(y)
    }

    /// `[v, λ(v), …, λⁿ(v)]`
    pub fn trajectory(&self, v: &Value, n: usize) -> Result<Vec<Value>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(v.clone());
        for k in 0..n {
            let next = self.apply(&out[k])?;
            out.push(next);
        }
        Ok(out)
    }
}

/// Seeds spanning several magnitudes, shaped for the poset.
pub fn default_seeds(p: &PosetSpec) -> Vec<Value> {
    const MAGS: [f64; 8] = [0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0];
    match p {
        PosetSpec::Real => MAGS.iter().map(|&m| Value::Scalar(m)).collect(),
        PosetSpec::Componentwise(d) => MAGS.iter().map(|&m| Value::Vector(vec![m; *d])).collect(),
        PosetSpec::Finite(fp) => (0..fp.len()).map(Value::Element).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaLimit {
    /// Common limit of the sampled seed trajectories, when certified.
    pub limit: Option<Value>,
    pub verdict: Verdict,
    pub finals: Vec<Value>,
}

fn diverges(p: &PosetSpec, seed: &Value, traj: &[Value], tol: &Tolerances) -> bool {
    let mags: Option<Vec<f64>> = traj.iter().map(|v| p.magnitude(v)).collect();
    let Some(mags) = mags else { return false };
    let last = *mags.last().unwrap_or(&0.0);
    let seed_mag = p.magnitude(seed).unwrap_or(0.0);
    if last > tol.divergence_bound * (1.0 + seed_mag) {
        return true;
    }
    let w = tol.window.min(mags.len());
    if w < 3 {
        return false;
    }
    let tail = &mags[mags.len() - w..];
    let incs: Vec<f64> = tail.windows(2).map(|x| x[1] - x[0]).collect();
    // growth that never slows down
    incs.iter().all(|&d| d > 0.0) && incs.last().unwrap() >= &(incs[0] * (1.0 - 1e-12))
}

/// Membership surrogate for Λ(Y): every seed trajectory settles, and all
/// settle to one common value.
pub fn lambda_limit(
    p: &PosetSpec,
    lambda: &LambdaMap,
    seeds: &[Value],
    n_iter: usize,
    tol: &Tolerances,
) -> Result<LambdaLimit> {
    if seeds.is_empty() {
        return Err(Error::invalid("lambda_limit needs at least one seed"));
    }
    if n_iter < 2 {
        return Err(Error::invalid("lambda_limit needs n_iter >= 2"));
    }
    let trajs = seeds
        .iter()
        .map(|s| {
            p.check_member(s)?;
            lambda.trajectory(s, n_iter)
        })
        .collect::<Result<Vec<_>>>()?;

    if lambda.claimed_monotone() {
        let m = seeds.len();
        let mut le = vec![vec![false; m]; m];
        for i in 0..m {
            for j in 0..m {
                le[i][j] = i != j && p.leq(&seeds[i], &seeds[j])?;
            }
        }
        // pairs with a seed strictly between them follow by transitivity
        let covers = |i: usize, j: usize| {
            le[i][j] && !(0..m).any(|b| le[i][b] && le[b][j] && !le[b][i] && !le[j][b])
        };
        for i in 0..m {
            for j in 0..m {
                if !covers(i, j) {
                    continue;
                }
                for k in 0..=n_iter {
                    if !p.leq(&trajs[i][k], &trajs[j][k])? {
                        return Err(Error::MonotonicityViolation(format!(
                            "{}: seeds {} ≤ {} but iterate {k} gives {} vs {}",
                            lambda.name(),
                            seeds[i],
                            seeds[j],
                            trajs[i][k],
                            trajs[j][k]
                        )));
                    }
                }
            }
        }
    }

    let finals: Vec<Value> = trajs.iter().map(|t| t.last().unwrap().clone()).collect();
    for (k, t) in trajs.iter().enumerate() {
        if diverges(p, &seeds[k], t, tol) {
            return Ok(LambdaLimit {
                limit: None,
                verdict: Verdict::refuted(
                    Witness::new(format!("trajectory of seed {} diverges", seeds[k]))
                        .indices([k, n_iter])
                        .values(finals[k].numbers()),
                ),
                finals,
            });
        }
    }
    let settled: Vec<Option<Value>> = trajs.iter().map(|t| p.settle(t, tol)).collect();
    if settled.iter().any(Option::is_none) {
        let k = settled.iter().position(Option::is_none).unwrap();
        return Ok(LambdaLimit {
            limit: None,
            verdict: Verdict::undetermined(format!("trajectory of seed {} has not settled after {n_iter} iterations", seeds[k])),
            finals,
        });
    }
    let limits: Vec<Value> = settled.into_iter().flatten().collect();
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            if p.dispersion(&limits[i], &limits[j]) > 2.0 * tol.eps {
                return Ok(LambdaLimit {
                    limit: None,
                    verdict: Verdict::refuted(
                        Witness::new(format!("seeds {} and {} settle at {} and {}", seeds[i], seeds[j], limits[i], limits[j]))
                            .indices([i, j]),
                    ),
                    finals,
                });
            }
        }
    }
    let limit = p.center(&limits).unwrap_or_else(|| limits[0].clone());
    Ok(LambdaLimit {
        verdict: Verdict::certified(
            Witness::new(format!("{} seeds settle at {limit} (on sampled seeds)", seeds.len()))
                .indices([n_iter])
                .values(limit.numbers()),
        ),
        limit: Some(limit),
        finals,
    })
}

type ValueFold = Arc<dyn Fn(&[Value]) -> std::result::Result<Value, MapError> + Send + Sync>;

/// `ψ` over tuples of values.
#[derive(Clone)]
pub enum PsiRule {
    Sum,
    /// Componentwise maximum.
    Max,
    Custom {
        name: String,
        fold: ValueFold,
        /// Whether the rule claims coordinate-wise monotonicity and the split law.
        extra_laws: bool,
    },
}

impl fmt::Debug for PsiRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl PsiRule {
    pub fn name(&self) -> String {
        match self {
            PsiRule::Sum => "sum".into(),
            PsiRule::Max => "max".into(),
            PsiRule::Custom { name, .. } => name.clone(),
        }
    }

    pub fn claims_extra_laws(&self) -> bool {
        match self {
            PsiRule::Sum | PsiRule::Max => true,
            PsiRule::Custom { extra_laws, .. } => *extra_laws,
        }
    }

    pub fn eval(&self, ys: &[Value]) -> Result<Value> {
        if ys.is_empty() {
            return Err(Error::invalid("ψ needs a non-empty tuple"));
        }
        match self {
            PsiRule::Sum => combine(ys, |a, b| a + b),
            PsiRule::Max => combine(ys, f64::max),
            PsiRule::Custom { fold, .. } => fold(ys).map_err(|e| Error::eval(ys.len(), e)),
        }
    }

    /// `ψ(y₁), ψ(y₁,y₂), …, ψ(y₁…yₙ)`.
    pub fn running(&self, ys: &[Value]) -> Result<Vec<Value>> {
        match self {
            PsiRule::Sum | PsiRule::Max => {
                let op: fn(f64, f64) -> f64 = if matches!(self, PsiRule::Sum) { |a, b| a + b } else { f64::max };
                let mut out: Vec<Value> = Vec::with_capacity(ys.len());
                for y in ys {
                    let next = match out.last() {
                        None => y.clone(),
                        Some(prev) => combine(&[prev.clone(), y.clone()], op)?,
                    };
                    out.push(next);
                }
                Ok(out)
            }
            PsiRule::Custom { .. } => (1..=ys.len()).map(|n| self.eval(&ys[..n])).collect(),
        }
    }
}

fn combine(ys: &[Value], op: impl Fn(f64, f64) -> f64) -> Result<Value> {
    match &ys[0] {
        Value::Scalar(_) => {
            let mut acc: Option<f64> = None;
            for y in ys {
                let x = y.as_scalar().ok_or_else(|| Error::invalid("mixed value kinds in ψ tuple"))?;
                acc = Some(match acc {
                    None => x,
                    Some(a) => op(a, x),
                });
            }
            Ok(Value::Scalar(acc.unwrap()))
        }
        Value::Vector(first) => {
            let mut acc = first.clone();
            for y in &ys[1..] {
                match y {
                    Value::Vector(v) if v.len() == acc.len() => {
                        for (a, b) in acc.iter_mut().zip(v) {
                            *a = op(*a, *b);
                        }
                    }
                    _ => return Err(Error::invalid("mixed value kinds in ψ tuple")),
                }
            }
            Ok(Value::Vector(acc))
        }
        Value::Element(_) => Err(Error::invalid("built-in ψ rules need numeric values")),
    }
}

fn approx_equal(p: &PosetSpec, a: &Value, b: &Value) -> bool {
    let scale = p.magnitude(a).unwrap_or(0.0).max(p.magnitude(b).unwrap_or(0.0));
    p.dispersion(a, b) <= 1e-12 * (1.0 + scale)
}

/// Checks the drop-first law `ψ(y₂…yₙ) ≤ ψ(y₁…yₙ)`, and for rules claiming
/// them, coordinate-wise monotonicity and the split law
/// `ψ(y₁…y_{m+n}) = ψ(y₁…y_m, ψ(y_{m+1}…y_{m+n}))` (equality up to rounding).
pub fn psi_monotone_check(psi: &PsiRule, p: &PosetSpec, samples: &[Vec<Value>]) -> Result<Verdict> {
    if samples.is_empty() {
        return Err(Error::invalid("psi_monotone_check needs at least one tuple"));
    }
    let mut checked = 0usize;
    for (k, ys) in samples.iter().enumerate() {
        if ys.is_empty() {
            continue;
        }
        let full = psi.eval(ys)?;
        if ys.len() >= 2 {
            let dropped = psi.eval(&ys[1..])?;
            checked += 1;
            if !p.leq(&dropped, &full)? {
                return Ok(Verdict::refuted(
                    Witness::new(format!("drop-first law fails: ψ(y₂…) = {dropped} exceeds ψ(y₁…) = {full}"))
                        .indices([k])
                        .values(dropped.numbers().into_iter().chain(full.numbers())),
                ));
            }
        }
        if !psi.claims_extra_laws() {
            continue;
        }
        for i in 0..ys.len() {
            let Some(up) = p.bump(&ys[i]) else { continue };
            let mut zs = ys.clone();
            zs[i] = up;
            let bumped = psi.eval(&zs)?;
            checked += 1;
            if !p.leq(&full, &bumped)? {
                return Ok(Verdict::refuted(
                    Witness::new(format!("coordinate-wise monotonicity fails at coordinate {i}"))
                        .indices([k, i]),
                ));
            }
        }
        for m in 1..ys.len() {
            let inner = psi.eval(&ys[m..])?;
            let mut split = ys[..m].to_vec();
            split.push(inner);
            let rhs = psi.eval(&split)?;
            checked += 1;
            if !approx_equal(p, &full, &rhs) {
                return Ok(Verdict::refuted(
                    Witness::new(format!("split law fails at m = {m}: {full} vs {rhs}"))
                        .indices([k, m]),
                ));
            }
        }
    }
    Ok(Verdict::certified(
        Witness::new(format!("{checked} law instances hold on {} tuples", samples.len())).values([checked as f64]),
    ))
}

type PointFold = Arc<dyn Fn(&[Point]) -> std::result::Result<Value, MapError> + Send + Sync>;

/// `ψ` over tuples of points (the structure `𝔠_ψ`).
#[derive(Clone)]
pub enum PointPsi {
    /// `ψ(x₁…xₙ) = Σ_{i<n} d(xᵢ, xᵢ₊₁)`
    StepSum(DistanceSpec),
    /// `ψ(x₁…xₙ) = Σ ‖xᵢ‖∞`
    NormSum,
    Custom { name: String, fold: PointFold },
}

impl fmt::Debug for PointPsi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl PointPsi {
    pub fn name(&self) -> String {
        match self {
            PointPsi::StepSum(d) => format!("step-sum({})", d.name()),
            PointPsi::NormSum => "norm-sum".into(),
            PointPsi::Custom { name, .. } => name.clone(),
        }
    }

    pub fn value_space(&self) -> PosetSpec {
        PosetSpec::Real
    }

    /// Full evaluation. Step sums fold from the right so they compare exactly
    /// against [`PsiBar::Caristi`].
    pub fn eval(&self, xs: &[Point]) -> Result<Value> {
        if xs.is_empty() {
            return Err(Error::invalid("ψ needs a non-empty tuple"));
        }
        match self {
            PointPsi::StepSum(d) => {
                let mut acc = 0.0;
                for i in (0..xs.len() - 1).rev() {
                    acc += scalar_distance(d, &xs[i], &xs[i + 1])?;
                }
                Ok(Value::Scalar(acc))
            }
            PointPsi::NormSum => {
                let mut acc = 0.0;
                for x in xs {
                    acc += x.norm_inf().ok_or_else(|| Error::invalid("norm-sum needs real points"))?;
                }
                Ok(Value::Scalar(acc))
            }
            PointPsi::Custom { fold, .. } => fold(xs).map_err(|e| Error::eval(xs.len(), e)),
        }
    }

    /// Running values `ψ(x₁), ψ(x₁,x₂), …` (left to right).
    pub fn running(&self, xs: &[Point]) -> Result<Vec<Value>> {
        match self {
            PointPsi::StepSum(d) => {
                let mut out = Vec::with_capacity(xs.len());
                let mut acc = 0.0;
                for i in 0..xs.len() {
                    if i > 0 {
                        acc += scalar_distance(d, &xs[i - 1], &xs[i])?;
                    }
                    out.push(Value::Scalar(acc));
                }
                Ok(out)
            }
            PointPsi::NormSum => {
                let mut out = Vec::with_capacity(xs.len());
                let mut acc = 0.0;
                for x in xs {
                    acc += x.norm_inf().ok_or_else(|| Error::invalid("norm-sum needs real points"))?;
                    out.push(Value::Scalar(acc));
                }
                Ok(out)
            }
            PointPsi::Custom { .. } => (1..=xs.len()).map(|n| self.eval(&xs[..n])).collect(),
        }
    }
}

pub(crate) fn scalar_distance(d: &DistanceSpec, a: &Point, b: &Point) -> Result<f64> {
    d.evaluate(a, b)?
        .as_scalar()
        .ok_or_else(|| Error::invalid(format!("{} is not real-valued", d.name())))
}

type PsiBarFold = Arc<dyn Fn(&[Point], &Value) -> std::result::Result<Value, MapError> + Send + Sync>;

/// `ψ̄ : (⋃ Xⁿ) × Y → Y`, the majorant used by the Caristi-type solver.
#[derive(Clone)]
pub enum PsiBar {
    /// `ψ̄(x₁…xₙ, y) = Σ_{i<n} d(xᵢ,xᵢ₊₁) + d(xₙ, f(xₙ)) + y` for the map `f`
    /// under study. On the empty tuple it returns `y`.
    Caristi { distance: DistanceSpec, map: MapRef },
    Custom { name: String, fold: PsiBarFold },
}

impl fmt::Debug for PsiBar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl PsiBar {
    pub fn caristi(distance: DistanceSpec, map: MapRef) -> Self {
        PsiBar::Caristi { distance, map }
    }

    pub fn name(&self) -> String {
        match self {
            PsiBar::Caristi { distance, .. } => format!("caristi({})", distance.name()),
            PsiBar::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, xs: &[Point], y: &Value) -> Result<Value> {
        match self {
            PsiBar::Caristi { distance, map } => {
                let Some(last) = xs.last() else { return Ok(y.clone()) };
                let mut acc = y
                    .as_scalar()
                    .ok_or_else(|| Error::invalid("caristi ψ̄ needs a real value"))?;
                let image = apply_at(map.as_ref(), last, xs.len())?;
                acc = scalar_distance(distance, last, &image)? + acc;
                for i in (0..xs.len() - 1).rev() {
                    acc = scalar_distance(distance, &xs[i], &xs[i + 1])? + acc;
                }
                Ok(Value::Scalar(acc))
            }
            PsiBar::Custom { fold, .. } => fold(xs, y).map_err(|e| Error::eval(xs.len(), e)),
        }
    }
}

/// Checks the majorant law `ψ(x₁…xₙ) ≤ ψ̄(x₁…xₙ, y)`, the chain law
/// `ψ̄(x₁…xₙ, y) ≤ ψ̄(x₁…xₙ₋₁, ψ̄(xₙ, y))` and monotonicity in `y` on the
/// given point tuples and values.
pub fn psibar_axioms_check(
    psi: &PointPsi,
    psibar: &PsiBar,
    p: &PosetSpec,
    tuples: &[Vec<Point>],
    ys: &[Value],
) -> Result<Verdict> {
    if tuples.is_empty() || ys.is_empty() {
        return Err(Error::invalid("psibar_axioms_check needs tuples and values"));
    }
    let mut checked = 0usize;
    for (k, xs) in tuples.iter().enumerate() {
        if xs.is_empty() {
            continue;
        }
        let base = psi.eval(xs)?;
        for (j, y) in ys.iter().enumerate() {
            let bar = psibar.eval(xs, y)?;
            checked += 1;
            if !p.leq(&base, &bar)? {
                return Ok(Verdict::refuted(
                    Witness::new(format!("majorant law fails: ψ = {base} > ψ̄ = {bar}")).indices([k, j]),
                ));
            }
            let n = xs.len();
            let inner = psibar.eval(&xs[n - 1..], y)?;
            let chained = psibar.eval(&xs[..n - 1], &inner)?;
            checked += 1;
            if !p.leq(&bar, &chained)? {
                return Ok(Verdict::refuted(
                    Witness::new(format!("chain law fails: {bar} > {chained}")).indices([k, j]),
                ));
            }
            for (i, z) in ys.iter().enumerate() {
                if i == j || !p.leq(y, z)? {
                    continue;
                }
                let barz = psibar.eval(xs, z)?;
                checked += 1;
                if !p.leq(&bar, &barz)? {
                    return Ok(Verdict::refuted(
                        Witness::new(format!("ψ̄ not monotone in its value argument: {y} ≤ {z} but {bar} > {barz}"))
                            .indices([k, j, i]),
                    ));
                }
            }
        }
    }
    Ok(Verdict::certified(
        Witness::new(format!("{checked} ψ̄ law instances hold")).values([checked as f64]),
    ))
}

/// Sandwich law of `(Y, ≤, Lim_Y)`: if `αₙ ≤ γₙ ≤ βₙ` and `α`, `β` settle to
/// the same value then `γ` settles to it as well.
pub fn sandwich_axiom_check(
    p: &PosetSpec,
    lower: &[Value],
    middle: &[Value],
    upper: &[Value],
    tol: &Tolerances,
) -> Result<Verdict> {
    if lower.len() != middle.len() || middle.len() != upper.len() {
        return Err(Error::invalid("sandwich sequences must have equal length"));
    }
    for n in 0..middle.len() {
        if !(p.leq(&lower[n], &middle[n])? && p.leq(&middle[n], &upper[n])?) {
            return Ok(Verdict::undetermined(format!("ordering αₙ ≤ γₙ ≤ βₙ fails at n = {n}")));
        }
    }
    let (Some(a), Some(b)) = (p.settle(lower, tol), p.settle(upper, tol)) else {
        return Ok(Verdict::undetermined("outer sequences do not settle"));
    };
    if p.dispersion(&a, &b) > 2.0 * tol.eps {
        return Ok(Verdict::undetermined("outer sequences settle apart"));
    }
    let w = tol.window.min(middle.len());
    let tail = &middle[middle.len() - w..];
    let spread = p.spread(&a, tail).max(p.spread(&b, tail));
    if spread <= 2.0 * tol.eps {
        Ok(Verdict::certified(
            Witness::new(format!("middle sequence settles at {a}")).values([spread]),
        ))
    } else {
        Ok(Verdict::refuted(
            Witness::new(format!("middle sequence strays {spread} from the common limit {a}")).values([spread]),
        ))
    }
}
