//! Picard-orbit solvers: the general fixed-set theorem and its Ćirić,
//! Caristi and Ćirić-ψ,d specializations.

mod caristi;
mod ciric;

use serde::{Deserialize, Serialize};

pub use caristi::{solve_caristi, verify_caristi, CaristiCert, CaristiStep, Potential};
pub use ciric::{
    solve_ciric_distance, solve_ciric_psi_d, verify_ciric_psi_d, verify_ciric_sandwich, PsiDCert, SandwichCert,
    SandwichWitness,
};

use crate::cauchy::CauchyStructure;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::limspace::{lim_candidates, weak_orbital_continuity_check, LimOperator};
use crate::seqcore::{alternate, apply_at, detect_cycle, orbit_prefix, periodic, Cycle, EqRule, Endomap, MapRef, Point};
use crate::verdict::{Tolerances, Verdict, Witness};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    General,
    CiricDistance,
    Caristi,
    CiricPsiD,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_iter: usize,
    pub tolerances: Tolerances,
    /// Largest accepted `‖f(x) − x‖∞` for a reported fixed point.
    pub residual_bound: f64,
    pub uniqueness_probe: Vec<(Point, Point)>,
    pub mode: Mode,
    /// Equality used for fixed-set membership and candidate matching.
    pub point_eq: EqRule,
    /// Equality used by cycle detection. Exact by default so that a slowly
    /// converging real orbit is not mistaken for a cycle.
    pub cycle_eq: EqRule,
    /// Orbit levels whose contraction witnesses are searched and stored.
    pub sandwich_levels: usize,
    /// Iterations used when sampling λ-maps.
    pub lambda_iters: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iter: 2000,
            tolerances: Tolerances::default(),
            residual_bound: 1e-9,
            uniqueness_probe: vec![],
            mode: Mode::General,
            point_eq: EqRule::default(),
            cycle_eq: EqRule::Exact,
            sandwich_levels: 64,
            lambda_iters: 10_000,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 2 {
            return Err(Error::invalid("max_iter must be at least 2"));
        }
        if !(self.residual_bound > 0.0) {
            return Err(Error::invalid("residual_bound must be positive"));
        }
        if self.sandwich_levels == 0 {
            return Err(Error::invalid("sandwich_levels must be at least 1"));
        }
        self.tolerances.validate()
    }
}

/// The step at which a solve stopped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Contraction,
    Cycle,
    Cauchy,
    Limit,
    Continuity,
    Residual,
    #[default]
    Complete,
}

/// Kind-specific contraction evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContractionCert {
    Sandwich(SandwichCert),
    Caristi(CaristiCert),
    CiricPsiD(PsiDCert),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub orbit_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle: Option<Cycle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cauchy: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lim: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuity: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction_verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionCert>,
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SolveOutcome {
    FixedPoint {
        point: Point,
        residual: f64,
        certificate: Certificate,
    },
    FixedSet {
        points: Vec<Point>,
        exact: bool,
        certificate: Certificate,
    },
    Undetermined {
        reason: String,
        certificate: Certificate,
    },
}

impl SolveOutcome {
    pub fn certificate(&self) -> &Certificate {
        match self {
            SolveOutcome::FixedPoint { certificate, .. }
            | SolveOutcome::FixedSet { certificate, .. }
            | SolveOutcome::Undetermined { certificate, .. } => certificate,
        }
    }

    fn certificate_mut(&mut self) -> &mut Certificate {
        match self {
            SolveOutcome::FixedPoint { certificate, .. }
            | SolveOutcome::FixedSet { certificate, .. }
            | SolveOutcome::Undetermined { certificate, .. } => certificate,
        }
    }

    pub fn fixed_point(&self) -> Option<&Point> {
        match self {
            SolveOutcome::FixedPoint { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn is_undetermined(&self) -> bool {
        matches!(self, SolveOutcome::Undetermined { .. })
    }

    /// The fixed set found: the point itself for a fixed point.
    pub fn points(&self) -> Vec<Point> {
        match self {
            SolveOutcome::FixedPoint { point, .. } => vec![point.clone()],
            SolveOutcome::FixedSet { points, .. } => points.clone(),
            SolveOutcome::Undetermined { .. } => vec![],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveOutcome::FixedPoint { .. } => "fixed_point",
            SolveOutcome::FixedSet { .. } => "fixed_set",
            SolveOutcome::Undetermined { .. } => "undetermined",
        }
    }

    pub(crate) fn undetermined(reason: impl Into<String>, mut certificate: Certificate, stage: Stage) -> Self {
        certificate.stage = stage;
        SolveOutcome::Undetermined {
            reason: reason.into(),
            certificate,
        }
    }
}

/// `‖f(x) − x‖∞` on real points; `0` or `∞` elsewhere.
pub fn residual(f: &dyn Endomap, x: &Point) -> Result<f64> {
    let y = apply_at(f, x, 0)?;
    Ok(match x.sup_distance(&y) {
        Some(d) => d,
        None if *x == y => 0.0,
        None => f64::INFINITY,
    })
}

/// `f(A) = A` as sets under `eq`.
pub fn maps_onto(f: &dyn Endomap, set: &[Point], eq: EqRule) -> Result<bool> {
    let images = set.iter().map(|x| apply_at(f, x, 0)).collect::<Result<Vec<_>>>()?;
    let into = images.iter().all(|y| set.iter().any(|x| eq.eq(x, y)));
    let onto = set.iter().all(|x| images.iter().any(|y| eq.eq(x, y)));
    Ok(into && onto)
}

/// Theorem-1 solve: cycle case first, then Cauchy certification of the orbit,
/// limit extraction and continuity.
pub fn solve_general(
    f: &MapRef,
    x0: &Point,
    c: &CauchyStructure,
    l: &LimOperator,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    solve_general_with(f, x0, c, l, cfg, None, Certificate::default())
}

pub(crate) fn solve_general_with(
    f: &MapRef,
    x0: &Point,
    c: &CauchyStructure,
    l: &LimOperator,
    cfg: &SolveConfig,
    membership_override: Option<Verdict>,
    mut cert: Certificate,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let tol = &cfg.tolerances;
    let n = cfg.max_iter.min(tol.max_prefix);
    let orbit = orbit_prefix(f.clone(), x0.clone(), n)?;
    cert.orbit_length = orbit.len();

    let mut outcome = if let Some(cyc) = detect_cycle(&orbit, n, cfg.cycle_eq)? {
        cert.cycle = Some(cyc);
        cycle_outcome(f, &orbit.extended(cyc.start + cyc.len)?.points()[cyc.start..cyc.start + cyc.len], c, cfg, cert)?
    } else {
        let membership = match membership_override {
            Some(v) => v,
            None => c.membership(orbit.view(), tol)?,
        };
        let certified = membership.is_certified();
        cert.cauchy = Some(membership.clone());
        if !certified {
            return Ok(SolveOutcome::undetermined(
                format!("orbit not certified in {}: {}", c.name(), membership.describe()),
                cert,
                Stage::Cauchy,
            ));
        }
        limit_outcome(f, orbit.view(), c, l, cfg, cert)?
    };

    if !cfg.uniqueness_probe.is_empty() && !outcome.is_undetermined() {
        let v = uniqueness_probe(f, c, cfg)?;
        outcome.certificate_mut().uniqueness = Some(v);
    }
    Ok(outcome)
}

fn cycle_outcome(
    f: &MapRef,
    members: &[Point],
    c: &CauchyStructure,
    cfg: &SolveConfig,
    mut cert: Certificate,
) -> Result<SolveOutcome> {
    cert.stage = Stage::Complete;
    if members.len() == 1 {
        let point = members[0].clone();
        let residual = residual(f.as_ref(), &point)?;
        return Ok(SolveOutcome::FixedPoint {
            point,
            residual,
            certificate: cert,
        });
    }
    let exact = maps_onto(f.as_ref(), members, EqRule::Exact)?;
    if c.claims_scs() {
        let v = c.membership(&periodic(members.to_vec())?, &cfg.tolerances)?;
        let certified = v.is_certified();
        cert.cauchy = Some(v);
        if certified {
            // periodic members of a strong structure collapse: f^{l−1}(x₀) is fixed
            let point = members[members.len() - 1].clone();
            let r = residual(f.as_ref(), &point)?;
            if r <= cfg.residual_bound {
                cert.notes.push(format!("cycle of length {} collapses in {}", members.len(), c.name()));
                return Ok(SolveOutcome::FixedPoint {
                    point,
                    residual: r,
                    certificate: cert,
                });
            }
            cert.notes
                .push(format!("cycle certifies but residual {r:e} exceeds {:e}", cfg.residual_bound));
        }
    }
    Ok(SolveOutcome::FixedSet {
        points: members.to_vec(),
        exact,
        certificate: cert,
    })
}

fn limit_outcome(
    f: &MapRef,
    view: &crate::seqcore::SeqView,
    c: &CauchyStructure,
    l: &LimOperator,
    cfg: &SolveConfig,
    mut cert: Certificate,
) -> Result<SolveOutcome> {
    let tol = &cfg.tolerances;
    let (cands, lv) = lim_candidates(l, view, tol)?;
    cert.lim = Some(lv.clone());
    if cands.is_empty() {
        return Ok(SolveOutcome::undetermined(
            format!("no limit candidates: {}", lv.describe()),
            cert,
            Stage::Limit,
        ));
    }
    let cont = weak_orbital_continuity_check(f, view, l, tol)?;
    let cont_ok = cont.is_certified();
    cert.continuity = Some(cont.clone());

    if cands.len() > 1 {
        cert.notes.push(format!("{} limit candidates: the space is not Fréchet for this orbit", cands.len()));
        if maps_onto(f.as_ref(), &cands, cfg.point_eq)? {
            let exact = maps_onto(f.as_ref(), &cands, EqRule::Exact)?;
            cert.stage = Stage::Complete;
            return Ok(SolveOutcome::FixedSet {
                points: cands,
                exact,
                certificate: cert,
            });
        }
        return Ok(SolveOutcome::undetermined("non-singleton limit", cert, Stage::Limit));
    }
    if !cont_ok {
        return Ok(SolveOutcome::undetermined(
            format!("weak orbital continuity: {}", cont.describe()),
            cert,
            Stage::Continuity,
        ));
    }
    let x = cands.into_iter().next().unwrap();
    let r = residual(f.as_ref(), &x)?;
    if !c.claims_scs() {
        cert.notes.push(format!("{} is not known to be strong; only a fixed set is concluded", c.name()));
        let exact = maps_onto(f.as_ref(), std::slice::from_ref(&x), EqRule::Exact)?;
        cert.stage = Stage::Complete;
        return Ok(SolveOutcome::FixedSet {
            points: vec![x],
            exact,
            certificate: cert,
        });
    }
    if r > cfg.residual_bound {
        return Ok(SolveOutcome::undetermined(
            format!("limit candidate {x} has residual {r:e} above {:e}", cfg.residual_bound),
            cert,
            Stage::Residual,
        ));
    }
    cert.stage = Stage::Complete;
    Ok(SolveOutcome::FixedPoint {
        point: x,
        residual: r,
        certificate: cert,
    })
}

/// Alternated orbits `{fⁿ(a)} ⋈ {fⁿ(b)}` tested in the structure.
fn uniqueness_probe(f: &MapRef, c: &CauchyStructure, cfg: &SolveConfig) -> Result<Verdict> {
    let n = cfg.max_iter.min(cfg.tolerances.max_prefix);
    let mut undetermined = None;
    for (k, (a, b)) in cfg.uniqueness_probe.iter().enumerate() {
        let oa = orbit_prefix(f.clone(), a.clone(), n)?;
        let ob = orbit_prefix(f.clone(), b.clone(), n)?;
        let v = c.membership(&alternate(oa.view(), ob.view())?, &cfg.tolerances)?;
        match v {
            Verdict::Certified(_) => {}
            Verdict::Refuted(w) => {
                return Ok(Verdict::refuted(
                    Witness::new(format!("alternated orbits from {a} and {b} are not in the structure: {}", w.note))
                        .indices([k]),
                ))
            }
            Verdict::Undetermined { reason } => undetermined = undetermined.or(Some((k, reason))),
        }
    }
    Ok(match undetermined {
        Some((k, reason)) => Verdict::undetermined(format!("probe pair {k}: {reason}")),
        None => Verdict::certified(
            Witness::new(format!("all {} alternated orbit pairs certify: the fixed point is unique", cfg.uniqueness_probe.len()))
                .values([cfg.uniqueness_probe.len() as f64]),
        ),
    })
}

/// One independent general solve.
#[derive(Clone)]
pub struct Problem {
    pub map: MapRef,
    pub start: Point,
    pub structure: CauchyStructure,
    pub limit: LimOperator,
    pub config: SolveConfig,
}

/// Solves independent problems, in input order.
pub fn solve_batch(problems: &[Problem], exec: Execution) -> Vec<Result<SolveOutcome>> {
    exec.map(problems, |p| solve_general(&p.map, &p.start, &p.structure, &p.limit, &p.config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{map_fn, scalar_map};
    use crate::spaces::DistanceSpec;
    use crate::MapError;

    #[test]
    fn identity_is_a_fixed_point() {
        let id = map_fn(|p: &Point| Ok(p.clone()));
        let c = CauchyStructure::distance(DistanceSpec::Euclidean);
        let out = solve_general(&id, &Point::scalar(7.0), &c, &LimOperator::partial_limits(), &SolveConfig::default()).unwrap();
        assert_eq!(out.fixed_point(), Some(&Point::scalar(7.0)));
        if let SolveOutcome::FixedPoint { residual, .. } = out {
            assert_eq!(residual, 0.0);
        }
    }

    #[test]
    fn halving_converges_to_zero() {
        let f = scalar_map(|x| x / 2.0);
        let c = CauchyStructure::distance(DistanceSpec::Euclidean);
        let out = solve_general(&f, &Point::scalar(1.0), &c, &LimOperator::partial_limits(), &SolveConfig::default()).unwrap();
        let p = out.fixed_point().unwrap().as_scalar().unwrap();
        assert!(p.abs() <= 1e-9);
    }

    #[test]
    fn halving_without_cycle_uses_limit_branch() {
        let f = scalar_map(|x| x / 2.0);
        let c = CauchyStructure::distance(DistanceSpec::Euclidean);
        let cfg = SolveConfig {
            max_iter: 300,
            ..Default::default()
        };
        let out = solve_general(&f, &Point::scalar(1.0), &c, &LimOperator::partial_limits(), &cfg).unwrap();
        assert!(out.certificate().cycle.is_none());
        assert!(out.certificate().cauchy.as_ref().unwrap().is_certified());
        assert!(out.fixed_point().unwrap().as_scalar().unwrap().abs() <= 1e-9);
    }

    #[test]
    fn three_cycle_is_a_fixed_set() {
        let f = map_fn(|p: &Point| Point::label((p.as_label().unwrap() + 1) % 3, 3).map_err(|e| MapError::new(e.to_string())));
        let c = CauchyStructure::orbit(f.clone(), EqRule::Exact);
        let out = solve_general(&f, &Point::label(0, 3).unwrap(), &c, &LimOperator::discrete(), &SolveConfig::default()).unwrap();
        match out {
            SolveOutcome::FixedSet { points, exact, .. } => {
                assert!(exact);
                let mut idx: Vec<usize> = points.iter().map(|p| p.as_label().unwrap()).collect();
                idx.sort();
                assert_eq!(idx, vec![0, 1, 2]);
            }
            other => panic!("expected fixed set, got {other:?}"),
        }
    }

    #[test]
    fn diverging_orbit_is_undetermined() {
        let f = scalar_map(|x| x + 1.0);
        let c = CauchyStructure::distance(DistanceSpec::Euclidean);
        let out = solve_general(&f, &Point::scalar(0.0), &c, &LimOperator::partial_limits(), &SolveConfig::default()).unwrap();
        assert!(out.is_undetermined());
        assert_eq!(out.certificate().stage, Stage::Cauchy);
    }

    #[test]
    fn uniqueness_probe_certifies_for_contraction() {
        let f = scalar_map(|x| 0.3 * x + 1.0);
        let c = CauchyStructure::distance(DistanceSpec::Euclidean);
        let cfg = SolveConfig {
            uniqueness_probe: vec![(Point::scalar(-5.0), Point::scalar(9.0))],
            ..Default::default()
        };
        let out = solve_general(&f, &Point::scalar(0.0), &c, &LimOperator::partial_limits(), &cfg).unwrap();
        assert!(out.certificate().uniqueness.as_ref().unwrap().is_certified());
    }
}
