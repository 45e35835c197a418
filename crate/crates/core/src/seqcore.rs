//! Points, sequence views, orbits and cycle detection.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, MapError, Result};

/// An element of the carrier set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Real(Vec<f64>),
    Label { index: usize, size: usize },
    Token(String),
}

impl Point {
    pub fn real(coords: Vec<f64>) -> Result<Point> {
        if coords.is_empty() {
            return Err(Error::invalid("real point needs at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("coordinate {i} is not finite")));
        }
        Ok(Point::Real(coords))
    }

    /// One-dimensional real point. Panics on a non-finite value.
    pub fn scalar(x: f64) -> Point {
        assert!(x.is_finite(), "scalar point must be finite, got {x}");
        Point::Real(vec![x])
    }

    pub fn label(index: usize, size: usize) -> Result<Point> {
        if index >= size {
            return Err(Error::invalid(format!("label {index} outside space of size {size}")));
        }
        Ok(Point::Label { index, size })
    }

    pub fn token(t: impl Into<String>) -> Point {
        Point::Token(t.into())
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Point::Real(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Point::Real(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    pub fn as_label(&self) -> Option<usize> {
        match self {
            Point::Label { index, .. } => Some(*index),
            _ => None,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.as_real().map(<[f64]>::len)
    }

    pub fn norm_inf(&self) -> Option<f64> {
        self.as_real()
            .map(|v| v.iter().fold(0.0_f64, |m, c| m.max(c.abs())))
    }

    /// `‖a − b‖∞` for real points of equal dimension.
    pub fn sup_distance(&self, other: &Point) -> Option<f64> {
        match (self, other) {
            (Point::Real(a), Point::Real(b)) if a.len() == b.len() => Some(
                a.iter()
                    .zip(b)
                    .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())),
            ),
            _ => None,
        }
    }

    pub(crate) fn check_finite(&self) -> std::result::Result<(), MapError> {
        match self {
            Point::Real(v) if v.iter().any(|c| !c.is_finite()) => {
                Err(MapError::new("map produced a non-finite coordinate"))
            }
            Point::Real(v) if v.is_empty() => Err(MapError::new("map produced an empty vector")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(v) if v.len() == 1 => write!(f, "{}", v[0]),
            Point::Real(v) => write!(f, "{v:?}"),
            Point::Label { index, .. } => write!(f, "#{index}"),
            Point::Token(t) => write!(f, "{t}"),
        }
    }
}

/// Equality rule for points. Labels and tokens always compare exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EqRule {
    Exact,
    /// `‖x−y‖∞ ≤ atol + rtol·max(‖x‖∞, ‖y‖∞)`
    Tolerance { atol: f64, rtol: f64 },
}

impl Default for EqRule {
    fn default() -> Self {
        EqRule::Tolerance {
            atol: 1e-12,
            rtol: 1e-9,
        }
    }
}

impl EqRule {
    pub fn absolute(atol: f64) -> Self {
        EqRule::Tolerance { atol, rtol: 0.0 }
    }

    pub fn eq(&self, a: &Point, b: &Point) -> bool {
        match (a, b) {
            (Point::Real(x), Point::Real(y)) => {
                if x.len() != y.len() {
                    return false;
                }
                match *self {
                    EqRule::Exact => x == y,
                    EqRule::Tolerance { atol, rtol } => {
                        let diff = a.sup_distance(b).unwrap_or(f64::INFINITY);
                        let scale = a.norm_inf().unwrap_or(0.0).max(b.norm_inf().unwrap_or(0.0));
                        diff <= atol + rtol * scale
                    }
                }
            }
            _ => a == b,
        }
    }
}

/// A self-map of the carrier set. Implementations must be pure.
pub trait Endomap: Send + Sync {
    fn apply(&self, x: &Point) -> std::result::Result<Point, MapError>;
}

impl<F> Endomap for F
where
    F: Fn(&Point) -> std::result::Result<Point, MapError> + Send + Sync,
{
    fn apply(&self, x: &Point) -> std::result::Result<Point, MapError> {
        self(x)
    }
}

pub type MapRef = Arc<dyn Endomap>;

/// Wraps a closure as a shared endomap.
pub fn map_fn<F>(f: F) -> MapRef
where
    F: Fn(&Point) -> std::result::Result<Point, MapError> + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Lifts a scalar function `ℝ → ℝ` to an endomap on one-dimensional points.
pub fn scalar_map<F>(f: F) -> MapRef
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    map_fn(move |p: &Point| {
        let x = p
            .as_scalar()
            .ok_or_else(|| MapError::new(format!("expected a scalar point, got {p}")))?;
        let y = f(x);
        if y.is_finite() {
            Ok(Point::Real(vec![y]))
        } else {
            Err(MapError::new(format!("non-finite image {y} of {x}")))
        }
    })
}

pub(crate) fn apply_at(f: &dyn Endomap, x: &Point, index: usize) -> Result<Point> {
    let y = f.apply(x).map_err(|e| Error::eval(index, e))?;
    y.check_finite().map_err(|e| Error::eval(index, e))?;
    Ok(y)
}

type IndexRule = Arc<dyn Fn(usize) -> std::result::Result<Point, MapError> + Send + Sync>;

/// How a view produces items past its materialized prefix.
#[derive(Clone)]
pub enum Generator {
    /// `index → point`
    Index(IndexRule),
    /// `x_{n+1} = f(x_n)`
    Step(MapRef),
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Index(_) => f.write_str("Index(..)"),
            Generator::Step(_) => f.write_str("Step(..)"),
        }
    }
}

/// Eventual period: `items[i] == items[i + len]` for every `i ≥ start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub start: usize,
    pub len: usize,
}

/// Outcome of scanning the materialized prefix for repeated items.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distinctness {
    /// No duplicate among the materialized items; says nothing about the rest.
    NoRepeatSeen,
    Repeat { first: usize, second: usize },
}

/// A finite, indexable prefix of a sequence, optionally able to produce more.
#[derive(Clone, Debug)]
pub struct SeqView {
    items: Vec<Point>,
    generator: Option<Generator>,
    period: Option<Period>,
}

impl SeqView {
    pub fn from_items(items: Vec<Point>) -> SeqView {
        SeqView {
            items,
            generator: None,
            period: None,
        }
    }

    /// View generated by `rule(i)`, with the first `n` items materialized.
    pub fn from_fn<F>(n: usize, rule: F) -> Result<SeqView>
    where
        F: Fn(usize) -> std::result::Result<Point, MapError> + Send + Sync + 'static,
    {
        let rule: IndexRule = Arc::new(rule);
        let items = (0..n)
            .map(|i| {
                let p = rule(i).map_err(|e| Error::eval(i, e))?;
                p.check_finite().map_err(|e| Error::eval(i, e))?;
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeqView {
            items,
            generator: Some(Generator::Index(rule)),
            period: None,
        })
    }

    /// Scalar sequence `i ↦ rule(i)` with `n` items materialized.
    pub fn from_scalar_fn<F>(n: usize, rule: F) -> Result<SeqView>
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        SeqView::from_fn(n, move |i| {
            let x = rule(i);
            if x.is_finite() {
                Ok(Point::Real(vec![x]))
            } else {
                Err(MapError::new(format!("non-finite term {x}")))
            }
        })
    }

    pub fn scalars(values: &[f64]) -> SeqView {
        SeqView::from_items(values.iter().map(|&x| Point::scalar(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Point] {
        &self.items
    }

    pub fn period(&self) -> Option<Period> {
        self.period
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    /// Whether items past the materialized prefix are available.
    pub fn can_extend(&self) -> bool {
        self.period.is_some() || self.generator.is_some()
    }

    pub fn get(&self, i: usize) -> Result<Point> {
        if let Some(p) = self.items.get(i) {
            return Ok(p.clone());
        }
        if let Some(Period { start, len }) = self.period {
            let j = start + (i - start) % len;
            return Ok(self.items[j].clone());
        }
        match &self.generator {
            Some(Generator::Index(rule)) => {
                let p = rule(i).map_err(|e| Error::eval(i, e))?;
                p.check_finite().map_err(|e| Error::eval(i, e))?;
                Ok(p)
            }
            Some(Generator::Step(f)) => {
                let mut x = self
                    .items
                    .last()
                    .cloned()
                    .ok_or(Error::InsufficientPrefix {
                        needed: 1,
                        available: 0,
                    })?;
                for k in self.items.len()..=i {
                    x = apply_at(f.as_ref(), &x, k)?;
                }
                Ok(x)
            }
            None => Err(Error::InsufficientPrefix {
                needed: i + 1,
                available: self.items.len(),
            }),
        }
    }

    /// A copy with at least `n` items materialized.
    pub fn extended(&self, n: usize) -> Result<SeqView> {
        if n <= self.items.len() {
            return Ok(self.clone());
        }
        if !self.can_extend() {
            return Err(Error::InsufficientPrefix {
                needed: n,
                available: self.items.len(),
            });
        }
        let mut out = self.clone();
        match (&self.period, &self.generator) {
            (None, Some(Generator::Step(f))) => {
                let mut x = out.items.last().cloned().ok_or(Error::InsufficientPrefix {
                    needed: 1,
                    available: 0,
                })?;
                for k in out.items.len()..n {
                    x = apply_at(f.as_ref(), &x, k)?;
                    out.items.push(x.clone());
                }
            }
            _ => {
                for k in out.items.len()..n {
                    let p = self.get(k)?;
                    out.items.push(p);
                }
            }
        }
        Ok(out)
    }

    /// Materialized items, extended to `n` when the view can produce more.
    /// Shorter views that cannot extend are returned as they are.
    pub fn ensure(&self, n: usize) -> Result<Cow<'_, [Point]>> {
        if n <= self.items.len() || !self.can_extend() {
            Ok(Cow::Borrowed(&self.items))
        } else {
            Ok(Cow::Owned(self.extended(n)?.items))
        }
    }

    pub fn prefix(&self, n: usize) -> Result<Vec<Point>> {
        (0..n).map(|i| self.get(i)).collect()
    }

    /// The shifted sequence `{x_{n+k}}`.
    pub fn tail(&self, k: usize) -> Result<SeqView> {
        let base = if k >= self.items.len() {
            self.extended(k + 1)?
        } else {
            self.clone()
        };
        let items = base.items[k..].to_vec();
        let generator = match &base.generator {
            Some(Generator::Index(rule)) => {
                let rule = rule.clone();
                Some(Generator::Index(Arc::new(move |i| rule(i + k))))
            }
            other => other.clone(),
        };
        let period = base.period.map(|p| {
            // keep one full cycle materialized after the shift
            let start = p.start.saturating_sub(k);
            Period { start, len: p.len }
        });
        let mut out = SeqView {
            items,
            generator,
            period: None,
        };
        if let Some(p) = period {
            if out.items.len() < p.start + p.len {
                let need = p.start + p.len;
                let extra = (out.items.len()..need)
                    .map(|i| base.get(i + k))
                    .collect::<Result<Vec<_>>>()?;
                out.items.extend(extra);
            }
            out.period = Some(p);
        }
        Ok(out)
    }

    pub fn distinctness(&self, eq: EqRule) -> Distinctness {
        if let Some(Period { start, len }) = self.period {
            return Distinctness::Repeat {
                first: start,
                second: start + len,
            };
        }
        for j in 1..self.items.len() {
            for i in 0..j {
                if eq.eq(&self.items[i], &self.items[j]) {
                    return Distinctness::Repeat { first: i, second: j };
                }
            }
        }
        Distinctness::NoRepeatSeen
    }
}

/// `⟨x₁,…,xₙ⟩`: the list repeated forever.
pub fn periodic(points: Vec<Point>) -> Result<SeqView> {
    if points.is_empty() {
        return Err(Error::invalid("periodic sequence needs at least one point"));
    }
    let len = points.len();
    Ok(SeqView {
        items: points,
        generator: None,
        period: Some(Period { start: 0, len }),
    })
}

/// `x₀ … x_{k−1}` followed by `⟨cycle⟩`.
pub fn eventually_periodic(pre: Vec<Point>, cycle: Vec<Point>) -> Result<SeqView> {
    if cycle.is_empty() {
        return Err(Error::invalid("eventually periodic sequence needs a non-empty cycle"));
    }
    let period = Period {
        start: pre.len(),
        len: cycle.len(),
    };
    let mut items = pre;
    items.extend(cycle);
    Ok(SeqView {
        items,
        generator: None,
        period: Some(period),
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Interleaving `a₀, b₀, a₁, b₁, …`.
pub fn alternate(a: &SeqView, b: &SeqView) -> Result<SeqView> {
    let period = match (a.period, b.period) {
        (Some(pa), Some(pb)) => {
            let l = pa.len / gcd(pa.len, pb.len) * pb.len;
            Some(Period {
                start: 2 * pa.start.max(pb.start),
                len: 2 * l,
            })
        }
        _ => None,
    };
    let pairs = match (a.can_extend(), b.can_extend()) {
        (true, true) => {
            let base = a.len().max(b.len());
            match period {
                Some(p) => base.max((p.start + p.len).div_ceil(2)),
                None => base,
            }
        }
        (true, false) => b.len(),
        (false, true) => a.len(),
        (false, false) => a.len().min(b.len()),
    };
    let mut items = Vec::with_capacity(2 * pairs);
    for k in 0..pairs {
        items.push(a.get(k)?);
        items.push(b.get(k)?);
    }
    let generator = if a.can_extend() && b.can_extend() && period.is_none() {
        let (a, b) = (a.clone(), b.clone());
        let rule: IndexRule = Arc::new(move |i| {
            let src = if i % 2 == 0 { &a } else { &b };
            src.get(i / 2).map_err(|e| MapError::new(e.to_string()))
        });
        Some(Generator::Index(rule))
    } else {
        None
    };
    Ok(SeqView {
        items,
        generator,
        period,
    })
}

/// A Picard orbit `x₀, f(x₀), f²(x₀), …` with its map attached.
#[derive(Clone)]
pub struct Orbit {
    map: MapRef,
    view: SeqView,
}

impl fmt::Debug for Orbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Orbit").field("view", &self.view).finish()
    }
}

impl Orbit {
    pub fn map(&self) -> &MapRef {
        &self.map
    }

    pub fn view(&self) -> &SeqView {
        &self.view
    }

    pub fn points(&self) -> &[Point] {
        self.view.items()
    }

    pub fn start(&self) -> &Point {
        &self.view.items[0]
    }

    pub fn len(&self) -> usize {
        self.view.len()
    }

    pub fn is_empty(&self) -> bool {
        self.view.is_empty()
    }

    /// `O_k(f, x₀)`.
    pub fn tail(&self, k: usize) -> Result<SeqView> {
        self.view.tail(k)
    }

    pub fn extended(&self, n: usize) -> Result<Orbit> {
        Ok(Orbit {
            map: self.map.clone(),
            view: self.view.extended(n)?,
        })
    }
}

/// Materializes `x₀, f(x₀), …, f^{n−1}(x₀)`.
pub fn orbit_prefix(f: MapRef, x0: Point, n: usize) -> Result<Orbit> {
    if n == 0 {
        return Err(Error::invalid("orbit prefix length must be at least 1"));
    }
    x0.check_finite().map_err(|e| Error::eval(0, e))?;
    let mut items = Vec::with_capacity(n);
    items.push(x0);
    for k in 1..n {
        let next = apply_at(f.as_ref(), &items[k - 1], k)?;
        items.push(next);
    }
    Ok(Orbit {
        view: SeqView {
            items,
            generator: Some(Generator::Step(f.clone())),
            period: None,
        },
        map: f,
    })
}

/// A repeat `f^μ(x₀) = f^{μ+ℓ}(x₀)` with minimal `μ` and `ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle {
    pub start: usize,
    pub len: usize,
}

impl Cycle {
    /// The fixed-set candidate `{f^μ(x₀), …, f^{μ+ℓ−1}(x₀)}`.
    pub fn members(&self, orbit: &Orbit) -> Result<Vec<Point>> {
        let view = orbit.view.extended(self.start + self.len)?;
        Ok(view.items[self.start..self.start + self.len].to_vec())
    }
}

/// Brent's two-speed search for the first repeat `f^k(x₀) = f^l(x₀)` with
/// `l ≤ max_steps`, followed by minimal tail-index refinement.
pub fn detect_cycle(orbit: &Orbit, max_steps: usize, eq: EqRule) -> Result<Option<Cycle>> {
    if max_steps == 0 {
        return Err(Error::invalid("max_steps must be at least 1"));
    }
    let f = orbit.map.as_ref();
    let x0 = orbit.start().clone();
    // Brent may overshoot l by up to 2l before the meeting is observed.
    let hare_cap = 3 * max_steps;

    let mut power = 1usize;
    let mut lam = 1usize;
    let mut tortoise = x0.clone();
    let mut hare = apply_at(f, &x0, 1)?;
    let mut hare_idx = 1usize;
    while !eq.eq(&tortoise, &hare) {
        if hare_idx >= hare_cap {
            return Ok(None);
        }
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare_idx += 1;
        hare = apply_at(f, &hare, hare_idx)?;
        lam += 1;
    }

    let mut tortoise = x0.clone();
    let mut hare = x0;
    for k in 1..=lam {
        hare = apply_at(f, &hare, k)?;
    }
    let mut mu = 0usize;
    while !eq.eq(&tortoise, &hare) {
        mu += 1;
        if mu > hare_cap {
            return Ok(None);
        }
        tortoise = apply_at(f, &tortoise, mu)?;
        hare = apply_at(f, &hare, mu + lam)?;
    }
    if mu + lam > max_steps {
        return Ok(None);
    }

    // replay one full cycle from f^μ(x₀)
    let mut y = tortoise.clone();
    for k in 0..lam {
        y = apply_at(f, &y, mu + k + 1)?;
    }
    if !eq.eq(&y, &tortoise) {
        return Ok(None);
    }
    Ok(Some(Cycle {
        start: mu,
        len: lam,
    }))
}
