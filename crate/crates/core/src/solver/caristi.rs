//! Caristi-type potentials and the ψ̄ induction chain.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{solve_general_with, Certificate, ContractionCert, SolveConfig, SolveOutcome, Stage};
use crate::cauchy::CauchyStructure;
use crate::error::{Error, MapError, Result};
use crate::limspace::LimOperator;
use crate::seqcore::{orbit_prefix, MapRef, Point};
use crate::spaces::{psibar_axioms_check, Comparison, PointPsi, PosetSpec, PsiBar, Value};
use crate::verdict::{Tolerances, Verdict, Witness};

type PotentialFn = Arc<dyn Fn(&Point) -> std::result::Result<Value, MapError> + Send + Sync>;

/// `φ : X → Y`.
#[derive(Clone)]
pub struct Potential {
    name: String,
    rule: PotentialFn,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Potential({})", self.name)
    }
}

impl Potential {
    pub fn new<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&Point) -> std::result::Result<Value, MapError> + Send + Sync + 'static,
    {
        Potential {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    /// `φ(x) = c·‖x‖∞`
    pub fn linear(c: f64) -> Self {
        Potential::new(format!("{c}·|x|"), move |x| {
            x.norm_inf()
                .map(|n| Value::Scalar(c * n))
                .ok_or_else(|| MapError::new("linear potential needs a real point"))
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &Point) -> Result<Value> {
        (self.rule)(x).map_err(|e| Error::eval(0, format!("potential {}: {e}", self.name)))
    }
}

/// One induction step `L ≤ M ≤ R ≤ φ(x₀)` with
/// `L = ψ̄(x₀…x_{n−1}, φ(xₙ))`, `M = ψ̄(x₀…x_{n−2}, ψ̄(x_{n−1}, φ(xₙ)))` and
/// `R = ψ̄(x₀…x_{n−2}, φ(x_{n−1}))`. For `n = 1` only `L ≤ φ(x₀)` applies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaristiStep {
    pub n: usize,
    pub lhs: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaristiCert {
    pub potential: String,
    pub phi0: Value,
    /// Orbit points on which `ψ̄(x, φ(f(x))) ≤ φ(x)` was checked.
    pub pointwise_checked: usize,
    pub steps: Vec<CaristiStep>,
    /// Largest running `ψ(x₀…xₙ)` over the prefix.
    pub running_max: Value,
    pub axioms: Verdict,
}

impl CaristiCert {
    /// Re-checks every recorded chain step under the poset order.
    pub fn replay(&self, p: &PosetSpec) -> Result<bool> {
        for s in &self.steps {
            let mut chain = vec![&s.lhs];
            chain.extend(s.mid.iter());
            chain.extend(s.rhs.iter());
            chain.push(&self.phi0);
            for w in chain.windows(2) {
                if !p.leq(w[0], w[1])? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

enum Check {
    Holds,
    Fails,
    Incomparable,
}

fn check_le(p: &PosetSpec, a: &Value, b: &Value) -> Result<Check> {
    Ok(match p.compare(a, b)? {
        Comparison::Lt | Comparison::Eq => Check::Holds,
        Comparison::Gt => Check::Fails,
        Comparison::Incomparable => Check::Incomparable,
    })
}

/// Checks the Caristi condition pointwise on `x₀ … x_prefix` and replays the
/// induction chain for every `n ≤ prefix`.
#[allow(clippy::too_many_arguments)]
pub fn verify_caristi(
    f: &MapRef,
    x0: &Point,
    phi: &Potential,
    psi: &PointPsi,
    psibar: &PsiBar,
    prefix: usize,
    p: &PosetSpec,
    _tol: &Tolerances,
) -> Result<(Verdict, CaristiCert)> {
    if prefix == 0 {
        return Err(Error::invalid("Caristi prefix must be at least 1"));
    }
    let orbit = orbit_prefix(f.clone(), x0.clone(), prefix + 2)?;
    let xs = orbit.points();
    let phis: Vec<Value> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| phi.eval(x).map_err(|e| Error::eval(i, e)))
        .collect::<Result<_>>()?;
    for v in &phis {
        p.check_member(v)?;
    }
    let phi0 = phis[0].clone();

    let k = xs.len().min(16);
    let tuples: Vec<Vec<Point>> = (1..=k).map(|n| xs[..n].to_vec()).collect();
    let axioms = psibar_axioms_check(psi, psibar, p, &tuples, &phis[..k])?;
    if let Verdict::Refuted(w) = &axioms {
        return Err(Error::PremiseViolation(format!("ψ̄ axioms fail on the orbit: {}", w.note)));
    }

    let running = psi.running(&xs[..=prefix])?;
    let mut cert = CaristiCert {
        potential: phi.name().to_string(),
        phi0: phi0.clone(),
        pointwise_checked: 0,
        steps: Vec::with_capacity(prefix),
        running_max: running[0].clone(),
        axioms,
    };
    let undetermined = |what: String| Verdict::undetermined(format!("incomparable values in {what}"));

    for i in 0..=prefix {
        let lhs = psibar.eval(&xs[i..=i], &phis[i + 1])?;
        cert.pointwise_checked += 1;
        match check_le(p, &lhs, &phis[i])? {
            Check::Holds => {}
            Check::Fails => {
                return Ok((
                    Verdict::refuted(
                        Witness::new(format!("ψ̄(x_{i}, φ(x_{})) = {lhs} > φ(x_{i}) = {}", i + 1, phis[i]))
                            .indices([i])
                            .values(lhs.numbers().into_iter().chain(phis[i].numbers())),
                    ),
                    cert,
                ))
            }
            Check::Incomparable => return Ok((undetermined(format!("the Caristi condition at x_{i}")), cert)),
        }
    }

    for n in 1..=prefix {
        let lhs = psibar.eval(&xs[..n], &phis[n])?;
        let (mid, rhs) = if n >= 2 {
            let inner = psibar.eval(&xs[n - 1..n], &phis[n])?;
            (
                Some(psibar.eval(&xs[..n - 1], &inner)?),
                Some(psibar.eval(&xs[..n - 1], &phis[n - 1])?),
            )
        } else {
            (None, None)
        };
        let step = CaristiStep { n, lhs, mid, rhs };
        let mut chain = vec![&step.lhs];
        chain.extend(step.mid.iter());
        chain.extend(step.rhs.iter());
        chain.push(&phi0);
        let mut failed = None;
        for (t, w) in chain.windows(2).enumerate() {
            match check_le(p, w[0], w[1])? {
                Check::Holds => {}
                Check::Fails => {
                    failed = Some(t);
                    break;
                }
                Check::Incomparable => {
                    cert.steps.push(step.clone());
                    return Ok((undetermined(format!("induction step {n}")), cert));
                }
            }
        }
        let values: Vec<f64> = chain.iter().flat_map(|v| v.numbers()).collect();
        cert.steps.push(step);
        if let Some(t) = failed {
            return Ok((
                Verdict::refuted(
                    Witness::new(format!("induction chain breaks at n = {n}, link {t}"))
                        .indices([n, t])
                        .values(values),
                ),
                cert,
            ));
        }
    }

    for (n, r) in running.iter().enumerate() {
        match check_le(p, r, &phi0)? {
            Check::Holds => {}
            Check::Fails => {
                return Ok((
                    Verdict::refuted(
                        Witness::new(format!("running ψ at n = {n} is {r}, above φ(x₀) = {phi0}")).indices([n]),
                    ),
                    cert,
                ))
            }
            Check::Incomparable => return Ok((undetermined(format!("running ψ at n = {n}")), cert)),
        }
        if p.leq(&cert.running_max, r)? {
            cert.running_max = r.clone();
        }
    }

    let verdict = Verdict::certified(
        Witness::new(format!(
            "Caristi condition on {} orbit points and {prefix} induction steps; running ψ ≤ φ(x₀) = {phi0}",
            cert.pointwise_checked
        ))
        .indices([prefix])
        .values(cert.running_max.numbers()),
    );
    Ok((verdict, cert))
}

/// Caristi solve: the verified chain bounds the running ψ by `φ(x₀)`, so the
/// general solve runs in `𝔠_ψ` capped at that value.
#[allow(clippy::too_many_arguments)]
pub fn solve_caristi(
    f: &MapRef,
    x0: &Point,
    phi: &Potential,
    psi: &PointPsi,
    psibar: &PsiBar,
    l: &LimOperator,
    cfg: &SolveConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let p = psi.value_space();
    let (verdict, ccert) = verify_caristi(f, x0, phi, psi, psibar, cfg.sandwich_levels, &p, &cfg.tolerances)?;
    let cap = ccert.phi0.clone();
    let cert = Certificate {
        contraction_verdict: Some(verdict.clone()),
        contraction: Some(ContractionCert::Caristi(ccert)),
        ..Default::default()
    };
    if !verdict.is_certified() {
        return Ok(SolveOutcome::undetermined(
            format!("Caristi condition: {}", verdict.describe()),
            cert,
            Stage::Contraction,
        ));
    }
    let c = CauchyStructure::psi(psi.clone(), Some(cap));
    solve_general_with(f, x0, &c, l, cfg, None, cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::scalar_map;
    use crate::spaces::DistanceSpec;

    fn setup(f: &MapRef) -> (PointPsi, PsiBar) {
        (
            PointPsi::StepSum(DistanceSpec::Euclidean),
            PsiBar::caristi(DistanceSpec::Euclidean, f.clone()),
        )
    }

    #[test]
    fn halving_is_certified() {
        let f = scalar_map(|x| x / 2.0);
        let (psi, bar) = setup(&f);
        let (v, cert) = verify_caristi(&f, &Point::scalar(1.0), &Potential::linear(2.0), &psi, &bar, 50, &PosetSpec::Real, &Tolerances::default()).unwrap();
        assert!(v.is_certified(), "{v:?}");
        assert_eq!(cert.steps.len(), 50);
        assert!(cert.replay(&PosetSpec::Real).unwrap());
    }

    #[test]
    fn increasing_orbit_is_refuted() {
        let f = scalar_map(|x| x + 1.0);
        let (psi, bar) = setup(&f);
        let (v, _) = verify_caristi(&f, &Point::scalar(0.0), &Potential::new("2x", |x| Ok(Value::Scalar(2.0 * x.as_scalar().unwrap()))), &psi, &bar, 10, &PosetSpec::Real, &Tolerances::default()).unwrap();
        assert!(v.is_refuted(), "{v:?}");
        assert_eq!(v.witness().unwrap().indices[0], 0);
    }

    #[test]
    fn identity_solves_to_start() {
        let f = scalar_map(|x| x);
        let (psi, bar) = setup(&f);
        let out = solve_caristi(&f, &Point::scalar(3.0), &Potential::linear(1.0), &psi, &bar, &LimOperator::partial_limits(), &SolveConfig::default()).unwrap();
        assert_eq!(out.fixed_point(), Some(&Point::scalar(3.0)));
    }

    #[test]
    fn halving_from_eight() {
        let f = scalar_map(|x| x / 2.0);
        let (psi, bar) = setup(&f);
        let out = solve_caristi(&f, &Point::scalar(8.0), &Potential::linear(2.0), &psi, &bar, &LimOperator::partial_limits(), &SolveConfig::default()).unwrap();
        assert_eq!(out.fixed_point(), Some(&Point::scalar(0.0)));
        let Some(ContractionCert::Caristi(c)) = &out.certificate().contraction else { panic!() };
        assert_eq!(c.phi0, Value::Scalar(16.0));
        assert!(c.running_max.as_scalar().unwrap() <= 8.0 + 1e-12);
    }
}
