//! Cauchy structures and their finite-prefix membership testers.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::limspace::{lim_candidates, LimOperator};
use crate::seqcore::{apply_at, periodic, EqRule, MapRef, Point, SeqView};
use crate::spaces::{DistanceSpec, PointPsi, PosetSpec, PsiRule, Value};
use crate::verdict::{Tolerances, Verdict, Witness};

/// Items a tester inspects: the materialized prefix, grown to four windows
/// when the view can produce more.
pub(crate) fn working_prefix<'a>(s: &'a SeqView, tol: &Tolerances) -> Result<Cow<'a, [Point]>> {
    s.ensure((4 * tol.window).min(tol.max_prefix))
}

type PairRule = Arc<dyn Fn(&Point, &Point) -> bool + Send + Sync>;

/// A relation `U ⊆ X × X`.
#[derive(Clone)]
pub enum Entourage {
    /// `‖a − b‖∞ < r`; on non-real points only equal points are related.
    SupBall(f64),
    Diagonal(EqRule),
    Custom { name: String, rule: PairRule },
}

impl fmt::Debug for Entourage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entourage::SupBall(r) => write!(f, "SupBall({r})"),
            Entourage::Diagonal(eq) => write!(f, "Diagonal({eq:?})"),
            Entourage::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl Entourage {
    pub fn contains(&self, a: &Point, b: &Point) -> bool {
        match self {
            Entourage::SupBall(r) => a.sup_distance(b).map_or(a == b, |d| d < *r),
            Entourage::Diagonal(eq) => eq.eq(a, b),
            Entourage::Custom { rule, .. } => rule(a, b),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EntourageBase {
    entourages: Vec<Entourage>,
}

impl EntourageBase {
    pub fn new(entourages: Vec<Entourage>) -> Result<Self> {
        if entourages.is_empty() {
            return Err(Error::invalid("entourage base must not be empty"));
        }
        Ok(EntourageBase { entourages })
    }

    /// `{ ‖a − b‖∞ < r : r ∈ radii }`
    pub fn sup_balls(radii: &[f64]) -> Result<Self> {
        Self::new(radii.iter().map(|&r| Entourage::SupBall(r)).collect())
    }

    pub fn entourages(&self) -> &[Entourage] {
        &self.entourages
    }

    /// For each `U, V` some `W` in the list has `W ⊆ U ∩ V` on the sampled pairs.
    pub fn base_property_check(&self, pairs: &[(Point, Point)]) -> Verdict {
        let es = &self.entourages;
        for (i, u) in es.iter().enumerate() {
            for (j, v) in es.iter().enumerate() {
                let ok = es.iter().any(|w| {
                    pairs
                        .iter()
                        .all(|(a, b)| !w.contains(a, b) || (u.contains(a, b) && v.contains(a, b)))
                });
                if !ok {
                    return Verdict::refuted(
                        Witness::new(format!("no entourage inside the intersection of {u:?} and {v:?}")).indices([i, j]),
                    );
                }
            }
        }
        Verdict::certified(Witness::new(format!("base property holds on {} pairs", pairs.len())))
    }
}

/// Index pairs `(m_k, n_k)` inspected by distance-structure testers: every
/// ordered pair of the final window (diagonal included) plus seeded random
/// pairs from the last `lookback_windows` windows. Offsets are taken from the
/// end of the prefix, so a sequence and its shift are sampled alike.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSampler {
    pub random_pairs: usize,
    pub lookback_windows: usize,
    pub seed: u64,
}

impl IndexSampler {
    pub fn from_tolerances(tol: &Tolerances) -> Self {
        IndexSampler {
            random_pairs: tol.random_pairs,
            lookback_windows: 4,
            seed: tol.seed,
        }
    }

    pub fn window_pairs(n: usize, w: usize, end: usize) -> impl Iterator<Item = (usize, usize)> {
        let end = end.min(n);
        let start = end.saturating_sub(w);
        (start..end).flat_map(move |i| (start..end).map(move |j| (i, j)))
    }

    pub fn random(&self, n: usize, w: usize) -> Vec<(usize, usize)> {
        let span = (self.lookback_windows * w).min(n).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.random_pairs)
            .map(|_| (n - 1 - rng.gen_range(0..span), n - 1 - rng.gen_range(0..span)))
            .collect()
    }
}

pub(crate) struct Cluster {
    pub center: Value,
    pub spread: f64,
}

/// Groups values: 1-D single linkage with gap `2·eps`, otherwise greedy balls
/// of dispersion radius `2·eps` around the first unassigned value.
pub(crate) fn cluster_values(p: &PosetSpec, vals: &[Value], eps: f64) -> Vec<Cluster> {
    let mut groups: Vec<Vec<Value>> = Vec::new();
    if vals.iter().all(|v| matches!(v, Value::Scalar(_))) {
        let mut xs: Vec<f64> = vals.iter().filter_map(Value::as_scalar).collect();
        xs.sort_by(f64::total_cmp);
        let mut cur: Vec<Value> = Vec::new();
        for x in xs {
            if let Some(Value::Scalar(last)) = cur.last() {
                if x - last > 2.0 * eps {
                    groups.push(std::mem::take(&mut cur));
                }
            }
            cur.push(Value::Scalar(x));
        }
        if !cur.is_empty() {
            groups.push(cur);
        }
    } else {
        let mut assigned = vec![false; vals.len()];
        for i in 0..vals.len() {
            if assigned[i] {
                continue;
            }
            let mut g = Vec::new();
            for j in i..vals.len() {
                if !assigned[j] && p.dispersion(&vals[i], &vals[j]) <= 2.0 * eps {
                    assigned[j] = true;
                    g.push(vals[j].clone());
                }
            }
            groups.push(g);
        }
    }
    groups
        .into_iter()
        .filter_map(|g| {
            let center = p.center(&g)?;
            Some(Cluster {
                spread: p.spread(&center, &g),
                center,
            })
        })
        .collect()
}

fn window_values(d: &DistanceSpec, xs: &[Point], w: usize, end: usize) -> Result<Vec<Value>> {
    IndexSampler::window_pairs(xs.len(), w, end)
        .map(|(i, j)| d.evaluate(&xs[i], &xs[j]).map_err(|e| Error::eval(i.max(j), e)))
        .collect()
}

/// Membership in `𝔠_d`: the tail-pair values `d(x_m, x_n)` approach one
/// common value whichever index families are used.
pub fn cd_membership(
    d: &DistanceSpec,
    y: &PosetSpec,
    s: &SeqView,
    tol: &Tolerances,
    sampler: &IndexSampler,
) -> Result<Verdict> {
    if d.value_space() != *y {
        return Err(Error::invalid(format!(
            "distance {} takes values in {}, not {}",
            d.name(),
            d.value_space().name(),
            y.name()
        )));
    }
    let xs = working_prefix(s, tol)?;
    let n = xs.len();
    if n < tol.window + 1 {
        return Ok(Verdict::undetermined(format!(
            "prefix of {n} items is shorter than window {} plus one",
            tol.window
        )));
    }
    let w = tol.window;
    let fin = window_values(d, &xs, w, n)?;
    let prev = window_values(d, &xs, w, n - 1)?;
    let mut all = fin.clone();
    for (i, j) in sampler.random(n, w) {
        all.push(d.evaluate(&xs[i], &xs[j]).map_err(|e| Error::eval(i.max(j), e))?);
    }

    let center = y.center(&all);
    if let Some(c) = &center {
        let disp = y.spread(c, &all);
        let fin_disp = y.center(&fin).map_or(f64::INFINITY, |fc| y.spread(&fc, &fin));
        let prev_disp = y.center(&prev).map_or(f64::INFINITY, |pc| y.spread(&pc, &prev));
        if disp <= tol.eps && fin_disp <= prev_disp + tol.eps / 2.0 {
            return Ok(Verdict::certified(
                Witness::new(format!("{} tail-pair values within {disp:e} of {c}", all.len()))
                    .indices([n - w, n])
                    .values(c.numbers().into_iter().chain([disp])),
            ));
        }
    }

    let fc = cluster_values(y, &fin, tol.eps);
    let pc = cluster_values(y, &prev, tol.eps);
    let tight = |cs: &[Cluster]| cs.iter().all(|c| c.spread <= tol.eps);
    if fc.len() >= 2 && tight(&fc) && tight(&pc) {
        let persistent: Vec<&Cluster> = fc
            .iter()
            .filter(|c| pc.iter().any(|q| y.dispersion(&c.center, &q.center) <= 2.0 * tol.eps))
            .collect();
        if persistent.len() >= 2 {
            let (a, b) = (&persistent[0].center, &persistent[1].center);
            return Ok(Verdict::refuted(
                Witness::new(format!(
                    "tail-pair values settle at {} distinct points, e.g. {a} and {b}",
                    persistent.len()
                ))
                .indices([n - w, n])
                .values(a.numbers().into_iter().chain(b.numbers())),
            ));
        }
    }
    Ok(Verdict::undetermined("tail-pair values neither agree nor split into persistent groups"))
}

/// Membership in a uniform structure given by an entourage base.
pub fn uniform_membership(base: &EntourageBase, s: &SeqView, tol: &Tolerances) -> Result<Verdict> {
    let xs = working_prefix(s, tol)?;
    let n = xs.len();
    let w = tol.window;
    if n < w {
        return Ok(Verdict::undetermined(format!(
            "prefix of {n} items is shorter than window {w}"
        )));
    }
    // the final window is the smallest admissible tail [N, n) with N ≤ n − w
    for (k, u) in base.entourages().iter().enumerate() {
        if let Some((i, j)) = IndexSampler::window_pairs(n, w, n).find(|&(i, j)| !u.contains(&xs[i], &xs[j])) {
            return Ok(Verdict::refuted(
                Witness::new(format!("entourage {u:?} fails on pair ({i}, {j}) in every tail"))
                    .indices([k, i, j]),
            ));
        }
    }
    Ok(Verdict::certified(
        Witness::new(format!("all {} entourages hold on the tail from {}", base.entourages().len(), n - w))
            .indices([n - w, n]),
    ))
}

pub(crate) fn bounded_running(
    p: &PosetSpec,
    running: &[Value],
    tol: &Tolerances,
    cap: Option<&Value>,
) -> Result<Verdict> {
    let n = running.len();
    if n == 0 {
        return Ok(Verdict::undetermined("no running values"));
    }
    let mut over_cap = None;
    if let Some(cap) = cap {
        for (i, r) in running.iter().enumerate() {
            match p.compare(r, cap)? {
                crate::spaces::Comparison::Incomparable => {
                    return Ok(Verdict::undetermined(format!(
                        "running value {r} at {i} is incomparable with cap {cap}"
                    )))
                }
                c if c.is_le() => {}
                _ => {
                    over_cap = Some(i);
                    break;
                }
            }
        }
        if over_cap.is_none() {
            return Ok(Verdict::certified(
                Witness::new(format!("{n} running values bounded by {cap}"))
                    .indices([n])
                    .values(cap.numbers()),
            ));
        }
    }

    let w = tol.window;
    if p.is_numeric() && n >= 3 * w {
        let mags: Option<Vec<f64>> = running.iter().map(|r| p.magnitude(r)).collect();
        if let Some(m) = mags {
            let wmax = |k: usize| m[n - (k + 1) * w..n - k * w].iter().copied().fold(f64::MIN, f64::max);
            let (m2, m1, m0) = (wmax(2), wmax(1), wmax(0));
            let last = m[n - 1];
            let threshold = tol.divergence_bound * (1.0 + m[0]);
            if m2 < m1 && m1 < m0 && last > threshold {
                return Ok(Verdict::refuted(
                    Witness::new(format!("running value {last:e} exceeds {threshold:e} and keeps growing"))
                        .indices([n - 1])
                        .values([m2, m1, m0, last]),
                ));
            }
        }
    }

    if let Some(i) = over_cap {
        return Ok(Verdict::undetermined(format!("running value at {i} exceeds the cap")));
    }
    if p.settle(running, tol).is_some() {
        if let Some(bound) = p.upper_bound(running) {
            return Ok(Verdict::certified(
                Witness::new(format!("running values settle; bound {bound}"))
                    .indices([n])
                    .values(bound.numbers()),
            ));
        }
    }
    Ok(Verdict::undetermined("running values neither settle nor diverge on this prefix"))
}

/// Membership in `𝔠_ψ`: running values `ψ(x₁…xₙ)` bounded from above.
pub fn cpsi_membership(
    psi: &PointPsi,
    p: &PosetSpec,
    s: &SeqView,
    tol: &Tolerances,
    cap: Option<&Value>,
) -> Result<Verdict> {
    let xs = working_prefix(s, tol)?;
    let running = psi.running(&xs)?;
    bounded_running(p, &running, tol, cap)
}

/// Step values `d(x₁,x₂), …, d(x_{n−1},xₙ)`.
pub fn step_values(d: &DistanceSpec, xs: &[Point]) -> Result<Vec<Value>> {
    xs.windows(2)
        .enumerate()
        .map(|(i, w)| d.evaluate(&w[0], &w[1]).map_err(|e| Error::eval(i + 1, e)))
        .collect()
}

/// Membership in `𝔠_{ψ,d}`: running `ψ(d(x₁,x₂), …)` bounded from above.
pub fn cpsid_membership(
    psi: &PsiRule,
    d: &DistanceSpec,
    p: &PosetSpec,
    s: &SeqView,
    tol: &Tolerances,
    cap: Option<&Value>,
) -> Result<Verdict> {
    let xs = working_prefix(s, tol)?;
    if xs.len() < 2 {
        return Ok(Verdict::undetermined("need at least two items for step distances"));
    }
    let steps = step_values(d, &xs)?;
    let running = psi.running(&steps)?;
    bounded_running(p, &running, tol, cap)
}

fn orbit_membership(f: &MapRef, eq: &EqRule, s: &SeqView, tol: &Tolerances) -> Result<Verdict> {
    let xs = working_prefix(s, tol)?;
    let n = xs.len();
    if n < 2 {
        return Ok(Verdict::undetermined("need at least two items"));
    }
    let start = n.saturating_sub(tol.window);
    for i in start..n - 1 {
        let image = apply_at(f.as_ref(), &xs[i], i + 1)?;
        if !eq.eq(&image, &xs[i + 1]) {
            return Ok(Verdict::refuted(
                Witness::new(format!("x_{} = {} is not f(x_{i}) = {image}", i + 1, xs[i + 1])).indices([i, i + 1]),
            ));
        }
    }
    Ok(Verdict::certified(
        Witness::new(format!("x_(i+1) = f(x_i) throughout the tail from {start}")).indices([start, n]),
    ))
}

pub type Tester = Arc<dyn Fn(&SeqView, &Tolerances) -> Result<Verdict> + Send + Sync>;

/// The catalog of Cauchy structures.
#[derive(Clone)]
pub enum CauchyStructure {
    UniformBase(EntourageBase),
    DistanceInduced {
        distance: DistanceSpec,
        values: PosetSpec,
    },
    PsiInduced {
        psi: PointPsi,
        values: PosetSpec,
        cap: Option<Value>,
    },
    PsiDistanceInduced {
        psi: PsiRule,
        distance: DistanceSpec,
        values: PosetSpec,
        cap: Option<Value>,
    },
    /// Orbits of one fixed map.
    OrbitFamily { map: MapRef, eq: EqRule },
    /// Sequences with a non-empty limit set.
    AllConvergent(Box<LimOperator>),
    Custom {
        name: String,
        tester: Tester,
        scs: bool,
    },
}

impl fmt::Debug for CauchyStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl CauchyStructure {
    pub fn distance(d: DistanceSpec) -> Self {
        CauchyStructure::DistanceInduced {
            values: d.value_space(),
            distance: d,
        }
    }

    pub fn psi(psi: PointPsi, cap: Option<Value>) -> Self {
        CauchyStructure::PsiInduced {
            values: psi.value_space(),
            psi,
            cap,
        }
    }

    pub fn psi_d(psi: PsiRule, d: DistanceSpec, cap: Option<Value>) -> Self {
        CauchyStructure::PsiDistanceInduced {
            values: d.value_space(),
            psi,
            distance: d,
            cap,
        }
    }

    pub fn orbit(map: MapRef, eq: EqRule) -> Self {
        CauchyStructure::OrbitFamily { map, eq }
    }

    pub fn custom<F>(name: impl Into<String>, scs: bool, tester: F) -> Self
    where
        F: Fn(&SeqView, &Tolerances) -> Result<Verdict> + Send + Sync + 'static,
    {
        CauchyStructure::Custom {
            name: name.into(),
            tester: Arc::new(tester),
            scs,
        }
    }

    pub fn name(&self) -> String {
        match self {
            CauchyStructure::UniformBase(b) => format!("uniform({} entourages)", b.entourages().len()),
            CauchyStructure::DistanceInduced { distance, .. } => format!("c_d[{}]", distance.name()),
            CauchyStructure::PsiInduced { psi, .. } => format!("c_psi[{}]", psi.name()),
            CauchyStructure::PsiDistanceInduced { psi, distance, .. } => {
                format!("c_psi_d[{}, {}]", psi.name(), distance.name())
            }
            CauchyStructure::OrbitFamily { .. } => "orbit-family".into(),
            CauchyStructure::AllConvergent(l) => format!("all-convergent[{}]", l.name()),
            CauchyStructure::Custom { name, .. } => name.clone(),
        }
    }

    /// Same structure with a different cap (ψ-kinds only).
    pub fn with_cap(&self, new_cap: Option<Value>) -> Self {
        let mut out = self.clone();
        match &mut out {
            CauchyStructure::PsiInduced { cap, .. } | CauchyStructure::PsiDistanceInduced { cap, .. } => *cap = new_cap,
            _ => {}
        }
        out
    }

    /// Whether the structure is known to be strong: it contains every
    /// constant sequence and its periodic members are constant.
    pub fn claims_scs(&self) -> bool {
        match self {
            CauchyStructure::UniformBase(b) => b.entourages().iter().any(|e| matches!(e, Entourage::Diagonal(_))),
            CauchyStructure::DistanceInduced { .. } => true,
            CauchyStructure::PsiInduced { psi, .. } => matches!(psi, PointPsi::StepSum(d) if d.is_metric_like()),
            CauchyStructure::PsiDistanceInduced { psi, distance, .. } => {
                matches!(psi, PsiRule::Sum) && distance.is_metric_like()
            }
            CauchyStructure::OrbitFamily { .. } => false,
            CauchyStructure::AllConvergent(l) => matches!(**l, LimOperator::DiscreteEventual { .. }),
            CauchyStructure::Custom { scs, .. } => *scs,
        }
    }

    pub fn membership(&self, s: &SeqView, tol: &Tolerances) -> Result<Verdict> {
        match self {
            CauchyStructure::UniformBase(b) => uniform_membership(b, s, tol),
            CauchyStructure::DistanceInduced { distance, values } => {
                cd_membership(distance, values, s, tol, &IndexSampler::from_tolerances(tol))
            }
            CauchyStructure::PsiInduced { psi, values, cap } => cpsi_membership(psi, values, s, tol, cap.as_ref()),
            CauchyStructure::PsiDistanceInduced {
                psi,
                distance,
                values,
                cap,
            } => cpsid_membership(psi, distance, values, s, tol, cap.as_ref()),
            CauchyStructure::OrbitFamily { map, eq } => orbit_membership(map, eq, s, tol),
            CauchyStructure::AllConvergent(l) => {
                let (cands, verdict) = lim_candidates(l, s, tol)?;
                Ok(match verdict {
                    Verdict::Certified(w) if !cands.is_empty() => Verdict::certified(w),
                    Verdict::Certified(_) => Verdict::refuted(Witness::new("no limit point")),
                    other => other,
                })
            }
            CauchyStructure::Custom { tester, .. } => tester(s, tol),
        }
    }
}

/// Points considered different by the SCS check.
pub(crate) fn distinct_points(a: &Point, b: &Point, tol: &Tolerances) -> bool {
    match a.sup_distance(b) {
        Some(d) => d > tol.eps,
        None => a != b,
    }
}

/// Sequences probed by [`scs_properties_check`].
#[derive(Clone, Debug)]
pub enum ScsProbe {
    /// Every tuple over `points` of length `1..=max_period`.
    Exhaustive { points: Vec<Point>, max_period: usize },
    /// Explicit tuples; constants are taken from their entries.
    Tuples(Vec<Vec<Point>>),
}

/// Checks that periodic sequences with `z₁ ≠ zₙ` do not certify and that
/// constants are members.
pub fn scs_properties_check(c: &CauchyStructure, probe: &ScsProbe, tol: &Tolerances) -> Result<Verdict> {
    let (points, tuples): (Vec<Point>, Vec<Vec<Point>>) = match probe {
        ScsProbe::Exhaustive { points, max_period } => {
            if points.is_empty() {
                return Err(Error::invalid("scs check needs sample points"));
            }
            let mut tuples = Vec::new();
            let mut layer: Vec<Vec<Point>> = vec![vec![]];
            for _ in 0..*max_period {
                layer = layer
                    .iter()
                    .flat_map(|t| {
                        points.iter().map(move |p| {
                            let mut u = t.clone();
                            u.push(p.clone());
                            u
                        })
                    })
                    .collect();
                tuples.extend(layer.iter().filter(|t| t.len() >= 2).cloned());
            }
            (points.clone(), tuples)
        }
        ScsProbe::Tuples(ts) => {
            if ts.iter().all(Vec::is_empty) {
                return Err(Error::invalid("scs check needs sample tuples"));
            }
            let mut pts: Vec<Point> = Vec::new();
            for p in ts.iter().flatten() {
                if !pts.contains(p) {
                    pts.push(p.clone());
                }
            }
            (pts, ts.iter().filter(|t| t.len() >= 2).cloned().collect())
        }
    };
    let mut checked = 0usize;
    for (k, t) in tuples.iter().enumerate() {
        if !distinct_points(&t[0], &t[t.len() - 1], tol) {
            continue;
        }
        checked += 1;
        if c.membership(&periodic(t.clone())?, tol)?.is_certified() {
            let shown: Vec<String> = t.iter().map(ToString::to_string).collect();
            return Ok(Verdict::refuted(
                Witness::new(format!("periodic ⟨{}⟩ certifies with z₁ ≠ zₙ", shown.join(", "))).indices([k]),
            ));
        }
    }
    for (k, x) in points.iter().enumerate() {
        let v = c.membership(&periodic(vec![x.clone()])?, tol)?;
        if !v.is_certified() {
            return Ok(Verdict::refuted(
                Witness::new(format!("constant sequence ⟨{x}⟩ is not certified ({})", v.label())).indices([k]),
            ));
        }
    }
    Ok(Verdict::certified(
        Witness::new(format!("{} constants certify, {checked} non-collapsing periodic tuples do not", points.len()))
            .values([points.len() as f64, checked as f64]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{map_fn, orbit_prefix, scalar_map};
    use crate::MapError;

    fn harmonic(n: usize) -> SeqView {
        SeqView::from_scalar_fn(n, |i| 1.0 / (i as f64 + 1.0)).unwrap()
    }

    fn alternating(n: usize) -> SeqView {
        SeqView::scalars(&(0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>())
    }

    fn loose() -> Tolerances {
        Tolerances::default().with_eps(1e-3)
    }

    #[test]
    fn uniform_examples() {
        let base = EntourageBase::sup_balls(&[1.0, 0.1, 0.01]).unwrap();
        let tol = Tolerances::default();
        assert!(uniform_membership(&base, &SeqView::scalars(&(1..=1000).map(|i| 1.0 / i as f64).collect::<Vec<_>>()), &tol)
            .unwrap()
            .is_certified());
        assert!(uniform_membership(&base, &alternating(1000), &tol).unwrap().is_refuted());
        let short = SeqView::scalars(&[1.0, 0.5, 1.0 / 3.0, 0.25, 0.2]);
        assert!(uniform_membership(&base, &short, &tol).unwrap().is_undetermined());
        assert!(EntourageBase::new(vec![]).is_err());
    }

    #[test]
    fn base_property() {
        let base = EntourageBase::sup_balls(&[1.0, 0.1]).unwrap();
        let pairs: Vec<(Point, Point)> = (0..20).map(|i| (Point::scalar(0.0), Point::scalar(i as f64 * 0.07))).collect();
        assert!(base.base_property_check(&pairs).is_certified());
    }

    #[test]
    fn cd_examples() {
        let s = harmonic(1000);
        let v = cd_membership(&DistanceSpec::Euclidean, &PosetSpec::Real, &s, &loose(), &IndexSampler::from_tolerances(&loose())).unwrap();
        assert!(v.is_certified(), "{v:?}");
        assert!(v.witness().unwrap().values[0].abs() < 1e-3);

        let v = cd_membership(&DistanceSpec::PartialMetricMax, &PosetSpec::Real, &s, &loose(), &IndexSampler::from_tolerances(&loose())).unwrap();
        assert!(v.is_certified(), "{v:?}");

        let per = periodic(vec![Point::scalar(0.0), Point::scalar(1.0)]).unwrap();
        let tol = Tolerances::default();
        let v = cd_membership(&DistanceSpec::Euclidean, &PosetSpec::Real, &per, &tol, &IndexSampler::from_tolerances(&tol)).unwrap();
        assert!(v.is_refuted(), "{v:?}");
    }

    #[test]
    fn cd_rejects_value_space_mismatch() {
        let tol = Tolerances::default();
        let err = cd_membership(&DistanceSpec::Euclidean, &PosetSpec::Componentwise(2), &harmonic(100), &tol, &IndexSampler::from_tolerances(&tol));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn cpsi_examples() {
        let tol = Tolerances::default();
        let orbit = orbit_prefix(scalar_map(|x| x / 2.0), Point::scalar(1.0), 200).unwrap();
        let psi = PointPsi::StepSum(DistanceSpec::Euclidean);
        let v = cpsi_membership(&psi, &PosetSpec::Real, orbit.view(), &tol, None).unwrap();
        assert!(v.is_certified());
        assert!((v.witness().unwrap().values[0] - 1.0).abs() < 1e-12);

        let c = periodic(vec![Point::scalar(3.0)]).unwrap();
        let v = cpsi_membership(&psi, &PosetSpec::Real, &c, &tol, None).unwrap();
        assert!(v.is_certified());
        assert_eq!(v.witness().unwrap().values, vec![0.0]);

        let v = cpsi_membership(&psi, &PosetSpec::Real, orbit.view(), &tol, Some(&Value::Scalar(1.0))).unwrap();
        assert!(v.is_certified());
    }

    #[test]
    fn cpsid_examples() {
        let tol = Tolerances::default();
        let orbit = orbit_prefix(scalar_map(|x| x / 2.0), Point::scalar(1.0), 200).unwrap();
        let v = cpsid_membership(&PsiRule::Sum, &DistanceSpec::Euclidean, &PosetSpec::Real, orbit.view(), &tol, Some(&Value::Scalar(1.0))).unwrap();
        assert!(v.is_certified());

        let lin = SeqView::from_scalar_fn(3_000_000, |i| i as f64).unwrap();
        let v = cpsid_membership(&PsiRule::Sum, &DistanceSpec::Euclidean, &PosetSpec::Real, &lin, &tol, None).unwrap();
        assert!(v.is_refuted(), "{v:?}");

        let f = map_fn(|p: &Point| {
            let x = p.as_real().ok_or_else(|| MapError::new("ℝ² expected"))?;
            Ok(Point::Real(vec![x[0] / 2.0, x[1] / 3.0 + 1.0]))
        });
        let o = orbit_prefix(f, Point::real(vec![4.0, -2.0]).unwrap(), 300).unwrap();
        let v = cpsid_membership(&PsiRule::Max, &DistanceSpec::ConeComponentwise(2), &PosetSpec::Componentwise(2), o.view(), &tol, None).unwrap();
        assert!(v.is_certified(), "{v:?}");
    }

    #[test]
    fn scs_examples() {
        let tol = Tolerances::default();
        let probe = ScsProbe::Exhaustive {
            points: vec![Point::scalar(0.0), Point::scalar(1.0), Point::scalar(2.0)],
            max_period: 3,
        };
        assert!(scs_properties_check(&CauchyStructure::distance(DistanceSpec::Euclidean), &probe, &tol).unwrap().is_certified());

        let swap = map_fn(|p: &Point| Point::label(1 - p.as_label().unwrap(), 2).map_err(|e| MapError::new(e.to_string())));
        let probe = ScsProbe::Exhaustive {
            points: vec![Point::label(0, 2).unwrap(), Point::label(1, 2).unwrap()],
            max_period: 2,
        };
        let c = CauchyStructure::orbit(swap, EqRule::Exact);
        assert!(scs_properties_check(&c, &probe, &tol).unwrap().is_refuted());
    }

    #[test]
    fn all_convergent_on_one_point() {
        let tol = Tolerances::default();
        let c = CauchyStructure::AllConvergent(Box::new(LimOperator::discrete()));
        let probe = ScsProbe::Exhaustive {
            points: vec![Point::label(0, 1).unwrap()],
            max_period: 4,
        };
        assert!(scs_properties_check(&c, &probe, &tol).unwrap().is_certified());
    }

    #[test]
    fn sampler_stays_in_lookback() {
        let s = IndexSampler::from_tolerances(&Tolerances::default());
        for (i, j) in s.random(1000, 64) {
            assert!(i >= 1000 - 256 && j >= 1000 - 256 && i < 1000 && j < 1000);
        }
        assert_eq!(IndexSampler::window_pairs(10, 3, 10).count(), 9);
    }
}
