//! Limit operators, the limit induced by a Cauchy structure, and the
//! continuity and Fréchet checks built on them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cauchy::{working_prefix, CauchyStructure};
use crate::error::{Error, Result};
use crate::seqcore::{alternate, apply_at, periodic, EqRule, MapRef, Point, SeqView};
use crate::verdict::{Tolerances, Verdict, Witness};

#[derive(Clone)]
pub enum LimOperator {
    /// Accumulation points of the tail. Cluster representatives within `eps`
    /// of an anchor are replaced by the anchor.
    MetricPartialLimits { anchors: Vec<Point> },
    /// `{x : ⟨x⟩ ⋈ s ∈ 𝔠}` searched over `pool` and the final window.
    CLimDerived {
        structure: Arc<CauchyStructure>,
        pool: Vec<Point>,
    },
    /// The eventual value of an eventually constant sequence.
    DiscreteEventual { eq: EqRule },
}

impl fmt::Debug for LimOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl LimOperator {
    pub fn partial_limits() -> Self {
        LimOperator::MetricPartialLimits { anchors: vec![] }
    }

    pub fn discrete() -> Self {
        LimOperator::DiscreteEventual { eq: EqRule::default() }
    }

    pub fn c_lim(structure: CauchyStructure, pool: Vec<Point>) -> Self {
        LimOperator::CLimDerived {
            structure: Arc::new(structure),
            pool,
        }
    }

    pub fn name(&self) -> String {
        match self {
            LimOperator::MetricPartialLimits { .. } => "partial-limits".into(),
            LimOperator::CLimDerived { structure, .. } => format!("c-lim[{}]", structure.name()),
            LimOperator::DiscreteEventual { .. } => "eventual".into(),
        }
    }
}

fn centroid(pts: &[&Point]) -> Option<Point> {
    let first = pts.first()?;
    match first {
        Point::Real(v) => {
            let mut acc = vec![0.0; v.len()];
            for p in pts {
                for (a, c) in acc.iter_mut().zip(p.as_real()?) {
                    *a += c;
                }
            }
            let n = pts.len() as f64;
            Some(Point::Real(acc.into_iter().map(|a| a / n).collect()))
        }
        other => Some((*other).clone()),
    }
}

struct PointCluster {
    rep: Point,
    spread: f64,
    size: usize,
}

fn cluster_points(window: &[Point], eps: f64) -> Vec<PointCluster> {
    let mut groups: Vec<Vec<&Point>> = Vec::new();
    let scalar = window.iter().all(|p| p.as_scalar().is_some());
    if scalar {
        let mut sorted: Vec<&Point> = window.iter().collect();
        sorted.sort_by(|a, b| a.as_scalar().unwrap().total_cmp(&b.as_scalar().unwrap()));
        let mut cur: Vec<&Point> = Vec::new();
        for p in sorted {
            if let Some(last) = cur.last() {
                if p.as_scalar().unwrap() - last.as_scalar().unwrap() > eps {
                    groups.push(std::mem::take(&mut cur));
                }
            }
            cur.push(p);
        }
        if !cur.is_empty() {
            groups.push(cur);
        }
    } else {
        let mut assigned = vec![false; window.len()];
        for i in 0..window.len() {
            if assigned[i] {
                continue;
            }
            let mut g = Vec::new();
            for j in i..window.len() {
                let near = match window[i].sup_distance(&window[j]) {
                    Some(d) => d <= eps,
                    None => window[i] == window[j],
                };
                if !assigned[j] && near {
                    assigned[j] = true;
                    g.push(&window[j]);
                }
            }
            groups.push(g);
        }
    }
    groups
        .into_iter()
        .filter_map(|g| {
            let rep = centroid(&g)?;
            let spread = g.iter().map(|p| rep.sup_distance(p).unwrap_or(0.0)).fold(0.0, f64::max);
            Some(PointCluster {
                rep,
                spread,
                size: g.len(),
            })
        })
        .collect()
}

fn snap(rep: Point, anchors: &[Point], eps: f64) -> Point {
    anchors
        .iter()
        .filter_map(|a| a.sup_distance(&rep).map(|d| (d, a)))
        .filter(|(d, _)| *d <= eps)
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map_or(rep, |(_, a)| a.clone())
}

/// Points treated as equal when comparing candidate sets.
pub(crate) fn same_point(a: &Point, b: &Point, eps: f64) -> bool {
    match a.sup_distance(b) {
        Some(d) => d <= eps,
        None => a == b,
    }
}

/// Set equality of candidate lists up to `eps` on real points.
pub fn same_candidates(a: &[Point], b: &[Point], eps: f64) -> bool {
    a.iter().all(|x| b.iter().any(|y| same_point(x, y, eps))) && b.iter().all(|y| a.iter().any(|x| same_point(x, y, eps)))
}

fn merge_candidates(found: Vec<(Point, bool)>, eps: f64) -> Vec<Point> {
    // pool points first so they become the representatives
    let mut ordered = found;
    ordered.sort_by_key(|(_, from_pool)| !from_pool);
    let mut out: Vec<Point> = Vec::new();
    for (p, _) in ordered {
        if !out.iter().any(|q| same_point(q, &p, eps)) {
            out.push(p);
        }
    }
    out
}

/// Candidate limit set of `s` under `l`, with the verdict behind it.
pub fn lim_candidates(l: &LimOperator, s: &SeqView, tol: &Tolerances) -> Result<(Vec<Point>, Verdict)> {
    let xs = working_prefix(s, tol)?;
    let n = xs.len();
    let w = tol.window;
    if n < w {
        return Err(Error::InsufficientPrefix { needed: w, available: n });
    }
    let window = &xs[n - w..];
    match l {
        LimOperator::MetricPartialLimits { anchors } => {
            let clusters = cluster_points(window, tol.eps);
            let valid: Vec<&PointCluster> = clusters.iter().filter(|c| c.size >= 2 && c.spread <= tol.eps).collect();
            let covered: usize = valid.iter().map(|c| c.size).sum();
            if valid.is_empty() || covered < w {
                return Ok((
                    vec![],
                    Verdict::undetermined(format!(
                        "{covered} of {w} tail points lie in clusters of dispersion ≤ {}",
                        tol.eps
                    )),
                ));
            }
            let reps: Vec<Point> = valid.iter().map(|c| snap(c.rep.clone(), anchors, tol.eps)).collect();
            let spread = valid.iter().map(|c| c.spread).fold(0.0, f64::max);
            Ok((
                reps.clone(),
                Verdict::certified(
                    Witness::new(format!("{} accumulation clusters in the last {w} items", reps.len()))
                        .indices([n - w, n])
                        .values([spread]),
                ),
            ))
        }
        LimOperator::DiscreteEventual { eq } => {
            if let Some(p) = s.period() {
                let cycle = s.prefix(p.start + p.len)?;
                let head = &cycle[p.start];
                return Ok(if cycle[p.start..].iter().all(|x| eq.eq(x, head)) {
                    (
                        vec![head.clone()],
                        Verdict::certified(Witness::new(format!("constant {head} from index {}", p.start)).indices([p.start])),
                    )
                } else {
                    (
                        vec![],
                        Verdict::refuted(Witness::new(format!("cycle of length {} never settles", p.len)).indices([p.start, p.len])),
                    )
                });
            }
            let last = &window[w - 1];
            match window.iter().position(|x| !eq.eq(x, last)) {
                None => Ok((
                    vec![last.clone()],
                    Verdict::certified(Witness::new(format!("final window constant at {last}")).indices([n - w, n])),
                )),
                Some(i) => Ok((vec![], Verdict::undetermined(format!("final window changes value at index {}", n - w + i)))),
            }
        }
        LimOperator::CLimDerived { structure, pool } => {
            let mut tried: Vec<(Point, bool)> = pool.iter().map(|p| (p.clone(), true)).collect();
            tried.extend(window.iter().map(|p| (p.clone(), false)));
            let tried = merge_candidates(tried, tol.eps);
            let mut found = Vec::new();
            let mut refuted = 0usize;
            for x in &tried {
                let alt = alternate(&periodic(vec![x.clone()])?, s)?;
                let v = structure.membership(&alt, tol)?;
                if v.is_certified() {
                    found.push(x.clone());
                } else if v.is_refuted() {
                    refuted += 1;
                }
            }
            let total = tried.len();
            if !found.is_empty() {
                let k = found.len();
                Ok((
                    found,
                    Verdict::certified(
                        Witness::new(format!("{k} of {total} tried points alternate into the structure")).values([k as f64]),
                    ),
                ))
            } else if refuted == total {
                Ok((
                    vec![],
                    Verdict::refuted(Witness::new(format!("none of {total} tried points alternates into the structure"))),
                ))
            } else {
                Ok((vec![], Verdict::undetermined("no tried point certifies and some are undetermined")))
            }
        }
    }
}

/// Compares `Lim{f(xₙ)}` with `f(Lim{xₙ})`.
pub fn weak_orbital_continuity_check(f: &MapRef, s: &SeqView, l: &LimOperator, tol: &Tolerances) -> Result<Verdict> {
    let xs = working_prefix(s, tol)?;
    if xs.len() < tol.window {
        return Err(Error::Precondition(format!(
            "continuity check needs {} items, have {}",
            tol.window,
            xs.len()
        )));
    }
    let base = SeqView::from_items(xs.to_vec());
    let (lim, v1) = lim_candidates(l, &base, tol)?;
    if !v1.is_certified() {
        return Ok(Verdict::undetermined(format!("Lim of the sequence: {}", v1.describe())));
    }
    let images = xs
        .iter()
        .enumerate()
        .map(|(i, x)| apply_at(f.as_ref(), x, i + 1))
        .collect::<Result<Vec<_>>>()?;
    let (lim_img, v2) = lim_candidates(l, &SeqView::from_items(images), tol)?;
    if !v2.is_certified() {
        return Ok(Verdict::undetermined(format!("Lim of the image sequence: {}", v2.describe())));
    }
    let f_lim = lim
        .iter()
        .map(|x| apply_at(f.as_ref(), x, 0))
        .collect::<Result<Vec<_>>>()?;
    let eps = tol.eps;
    if let Some(p) = lim_img.iter().find(|p| !f_lim.iter().any(|q| same_point(p, q, eps))) {
        return Ok(Verdict::refuted(
            Witness::new(format!("{p} is in Lim{{f(xₙ)}} but not in f(Lim{{xₙ}})")).values(p.as_real().unwrap_or(&[]).to_vec()),
        ));
    }
    if let Some(p) = f_lim.iter().find(|p| !lim_img.iter().any(|q| same_point(p, q, eps))) {
        return Ok(Verdict::refuted(
            Witness::new(format!("{p} is in f(Lim{{xₙ}}) but not in Lim{{f(xₙ)}}")).values(p.as_real().unwrap_or(&[]).to_vec()),
        ));
    }
    Ok(Verdict::certified(
        Witness::new(format!("both sides equal {} point(s)", f_lim.len())).values([f_lim.len() as f64]),
    ))
}

/// One instance of the Fréchet–Wilson implication
/// `x⋈y ∈ 𝔠 ∧ y⋈z ∈ 𝔠 ⇒ x⋈z ∈ 𝔠` for a member `y`.
pub fn fw_condition_check(c: &CauchyStructure, x: &SeqView, y: &SeqView, z: &SeqView, tol: &Tolerances) -> Result<Verdict> {
    let vy = c.membership(y, tol)?;
    if !vy.is_certified() {
        return Err(Error::Precondition(format!("middle sequence is not certified: {}", vy.describe())));
    }
    let xy = c.membership(&alternate(x, y)?, tol)?;
    let yz = c.membership(&alternate(y, z)?, tol)?;
    if xy.is_refuted() || yz.is_refuted() {
        return Ok(Verdict::certified(Witness::new("antecedent fails; implication holds vacuously")));
    }
    if !(xy.is_certified() && yz.is_certified()) {
        return Ok(Verdict::undetermined("antecedent undetermined"));
    }
    let xz = c.membership(&alternate(x, z)?, tol)?;
    Ok(match xz {
        Verdict::Certified(_) => Verdict::certified(Witness::new("x⋈y, y⋈z and x⋈z all certify")),
        Verdict::Refuted(w) => Verdict::refuted(Witness::new(format!("x⋈y and y⋈z certify but x⋈z does not: {}", w.note))),
        Verdict::Undetermined { reason } => Verdict::undetermined(format!("x⋈z: {reason}")),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrechetFlag {
    pub structure: String,
    pub singleton: bool,
    pub candidates: usize,
}

/// Whether a member sequence has at most one limit point.
pub fn frechet_check(c: &CauchyStructure, l: &LimOperator, s: &SeqView, tol: &Tolerances) -> Result<FrechetFlag> {
    let v = c.membership(s, tol)?;
    if !v.is_certified() {
        return Err(Error::Precondition(format!("sequence is not certified in {}: {}", c.name(), v.describe())));
    }
    let (cands, _) = lim_candidates(l, s, tol)?;
    Ok(FrechetFlag {
        structure: c.name(),
        singleton: cands.len() <= 1,
        candidates: cands.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{orbit_prefix, scalar_map};
    use crate::spaces::DistanceSpec;

    fn harmonic(n: usize) -> SeqView {
        SeqView::from_scalar_fn(n, |i| 1.0 / (i as f64 + 1.0)).unwrap()
    }

    fn inv_square(n: usize) -> SeqView {
        SeqView::from_scalar_fn(n, |i| 1.0 / ((i + 1) * (i + 1)) as f64).unwrap()
    }

    #[test]
    fn partial_limits_of_alternating_signs() {
        let s = SeqView::scalars(&(0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>());
        let tol = Tolerances::default().with_eps(0.1);
        let (c, v) = lim_candidates(&LimOperator::partial_limits(), &s, &tol).unwrap();
        assert!(v.is_certified());
        let mut xs: Vec<f64> = c.iter().map(|p| p.as_scalar().unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![-1.0, 1.0]);
    }

    #[test]
    fn c_lim_of_harmonic_is_zero() {
        let tol = Tolerances::default().with_eps(1e-2);
        let l = LimOperator::c_lim(CauchyStructure::distance(DistanceSpec::Euclidean), vec![Point::scalar(0.0), Point::scalar(1.0)]);
        let (c, v) = lim_candidates(&l, &harmonic(1000), &tol).unwrap();
        assert!(v.is_certified(), "{v:?}");
        assert_eq!(c, vec![Point::scalar(0.0)]);
    }

    #[test]
    fn discrete_constant() {
        let s = periodic(vec![Point::token("a")]).unwrap();
        let (c, v) = lim_candidates(&LimOperator::discrete(), &s, &Tolerances::default()).unwrap();
        assert_eq!(c, vec![Point::token("a")]);
        assert!(v.is_certified());
    }

    #[test]
    fn short_prefix_is_an_error() {
        let s = SeqView::scalars(&[1.0, 2.0]);
        assert!(matches!(
            lim_candidates(&LimOperator::partial_limits(), &s, &Tolerances::default()),
            Err(Error::InsufficientPrefix { .. })
        ));
    }

    #[test]
    fn continuity_examples() {
        let tol = Tolerances::default();
        let half = scalar_map(|x| x / 2.0);
        let orbit = orbit_prefix(half.clone(), Point::scalar(1.0), 2000).unwrap();
        assert!(weak_orbital_continuity_check(&half, orbit.view(), &LimOperator::partial_limits(), &tol).unwrap().is_certified());

        let id = scalar_map(|x| x);
        let o = orbit_prefix(id.clone(), Point::scalar(3.0), 100).unwrap();
        assert!(weak_orbital_continuity_check(&id, o.view(), &LimOperator::partial_limits(), &tol).unwrap().is_certified());

        let step = scalar_map(|x| if x > 0.0 { 1.0 } else { 0.0 });
        let l = LimOperator::MetricPartialLimits {
            anchors: vec![Point::scalar(0.0)],
        };
        let loose = Tolerances::default().with_eps(0.1);
        let v = weak_orbital_continuity_check(&step, &harmonic(200), &l, &loose).unwrap();
        assert!(v.is_refuted(), "{v:?}");
    }

    #[test]
    fn fw_examples() {
        let tol = Tolerances::default().with_eps(1e-2);
        let c = CauchyStructure::distance(DistanceSpec::Euclidean);
        let v = fw_condition_check(&c, &harmonic(1000), &inv_square(1000), &harmonic(1000), &tol).unwrap();
        assert!(v.is_certified(), "{v:?}");

        let zero = periodic(vec![Point::scalar(0.0)]).unwrap();
        let one = periodic(vec![Point::scalar(1.0)]).unwrap();
        let v = fw_condition_check(&c, &zero, &harmonic(1000), &one, &tol).unwrap();
        assert!(v.is_certified());
        assert!(v.witness().unwrap().note.contains("vacuously"));
    }

    #[test]
    fn frechet_examples() {
        let tol = Tolerances::default().with_eps(1e-2);
        let c = CauchyStructure::distance(DistanceSpec::Euclidean);
        let l = LimOperator::c_lim(c.clone(), vec![Point::scalar(0.0), Point::scalar(1.0)]);
        let flag = frechet_check(&c, &l, &harmonic(1000), &tol).unwrap();
        assert!(flag.singleton);

        let everything = CauchyStructure::custom("everything", false, |_, _| Ok(Verdict::certified(Witness::new("all"))));
        let pool = vec![Point::label(0, 2).unwrap(), Point::label(1, 2).unwrap()];
        let l = LimOperator::c_lim(everything.clone(), pool);
        let s = periodic(vec![Point::label(0, 2).unwrap()]).unwrap();
        let flag = frechet_check(&everything, &l, &s, &tol).unwrap();
        assert!(!flag.singleton);
        assert_eq!(flag.candidates, 2);

        let l = LimOperator::c_lim(c.clone(), vec![]);
        let s = periodic(vec![Point::scalar(4.0)]).unwrap();
        assert!(frechet_check(&c, &l, &s, &Tolerances::default()).unwrap().singleton);
    }
}
