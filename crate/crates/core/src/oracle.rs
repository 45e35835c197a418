//! Brute-force ground truth on finite spaces.
//!
//! Every infinite sequence over a finite set that matters here is eventually
//! periodic, so it is stored exactly as a preamble followed by a cycle.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cauchy::CauchyStructure;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::limspace::LimOperator;
use crate::seqcore::{detect_cycle, eventually_periodic, orbit_prefix, EqRule, Period, Point, SeqView};
use crate::solver::{solve_general, SolveConfig, SolveOutcome};
use crate::verdict::{Verdict, Witness};

/// Largest space the oracle enumerates.
pub const MAX_SIZE: usize = 5;

/// Canonical eventually periodic label sequence `pre · cycle^∞` with the
/// shortest cycle and the shortest preamble.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EpSeq {
    pub pre: Vec<u8>,
    pub cycle: Vec<u8>,
}

impl EpSeq {
    pub fn new(mut pre: Vec<u8>, cycle: Vec<u8>) -> Result<EpSeq> {
        if cycle.is_empty() {
            return Err(Error::invalid("eventually periodic sequence needs a non-empty cycle"));
        }
        let p = (1..=cycle.len())
            .find(|&p| cycle.len().is_multiple_of(p) && (p..cycle.len()).all(|i| cycle[i] == cycle[i - p]))
            .expect("full length is a period");
        let mut cycle = cycle[..p].to_vec();
        while let Some(&last) = pre.last() {
            if last != cycle[p - 1] {
                break;
            }
            pre.pop();
            cycle.rotate_right(1);
        }
        Ok(EpSeq { pre, cycle })
    }

    pub fn constant(x: u8) -> EpSeq {
        EpSeq {
            pre: vec![],
            cycle: vec![x],
        }
    }

    pub fn get(&self, i: usize) -> u8 {
        match self.pre.get(i) {
            Some(&x) => x,
            None => self.cycle[(i - self.pre.len()) % self.cycle.len()],
        }
    }

    pub fn tail(&self) -> EpSeq {
        if self.pre.is_empty() {
            let mut c = self.cycle.clone();
            c.rotate_left(1);
            EpSeq { pre: vec![], cycle: c }
        } else {
            EpSeq {
                pre: self.pre[1..].to_vec(),
                cycle: self.cycle.clone(),
            }
        }
    }

    /// `a₀, b₀, a₁, b₁, …`
    pub fn alternate(&self, other: &EpSeq) -> EpSeq {
        let start = self.pre.len().max(other.pre.len());
        let a = self.cycle.len();
        let b = other.cycle.len();
        let l = a / gcd(a, b) * b;
        let mut pre = Vec::with_capacity(2 * start);
        for k in 0..start {
            pre.push(self.get(k));
            pre.push(other.get(k));
        }
        let mut cycle = Vec::with_capacity(2 * l);
        for k in start..start + l {
            cycle.push(self.get(k));
            cycle.push(other.get(k));
        }
        EpSeq::new(pre, cycle).expect("non-empty cycle")
    }

    pub fn is_eventually_constant(&self) -> bool {
        self.cycle.len() == 1
    }

    /// Distinct values visited from index `k` on.
    pub fn values_from(&self, k: usize) -> BTreeSet<u8> {
        self.pre.iter().skip(k).chain(&self.cycle).copied().collect()
    }

    pub fn view(&self, n: usize) -> Result<SeqView> {
        let pre: Vec<Point> = self.pre.iter().map(|&x| Point::label(x as usize, n)).collect::<Result<_>>()?;
        let cyc: Vec<Point> = self.cycle.iter().map(|&x| Point::label(x as usize, n)).collect::<Result<_>>()?;
        eventually_periodic(pre, cyc)
    }

    /// Reads a label view whose eventual period is known.
    pub fn from_view(s: &SeqView) -> Option<EpSeq> {
        let Period { start, len } = s.period()?;
        let items = s.ensure(start + len).ok()?;
        let labels: Option<Vec<u8>> = items.iter().map(|p| p.as_label().map(|i| i as u8)).collect();
        let labels = labels?;
        EpSeq::new(labels[..start].to_vec(), labels[start..start + len].to_vec()).ok()
    }
}

impl fmt::Display for EpSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u8]| v.iter().map(u8::to_string).collect::<Vec<_>>().join(",");
        if self.pre.is_empty() {
            write!(f, "({})^∞", join(&self.cycle))
        } else {
            write!(f, "{}·({})^∞", join(&self.pre), join(&self.cycle))
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

type RuleFn = Arc<dyn Fn(&EpSeq) -> bool + Send + Sync>;

/// A decidable Cauchy-structure membership rule on eventually periodic sequences.
#[derive(Clone)]
pub enum FiniteRule {
    EventuallyConstant,
    All,
    Custom { name: String, rule: RuleFn },
}

impl fmt::Debug for FiniteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FiniteRule {
    pub fn custom<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&EpSeq) -> bool + Send + Sync + 'static,
    {
        FiniteRule::Custom {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn name(&self) -> String {
        match self {
            FiniteRule::EventuallyConstant => "eventually-constant".into(),
            FiniteRule::All => "all".into(),
            FiniteRule::Custom { name, .. } => name.clone(),
        }
    }

    pub fn contains(&self, s: &EpSeq) -> bool {
        match self {
            FiniteRule::EventuallyConstant => s.is_eventually_constant(),
            FiniteRule::All => true,
            FiniteRule::Custom { rule, .. } => rule(s),
        }
    }

    /// The rule as a [`CauchyStructure`] on label views of an `n`-point space.
    pub fn structure(&self, n: usize) -> CauchyStructure {
        let rule = self.clone();
        let scs = matches!(self, FiniteRule::EventuallyConstant);
        CauchyStructure::custom(self.name(), scs, move |s, _| {
            Ok(match EpSeq::from_view(s) {
                Some(e) if e.pre.iter().chain(&e.cycle).all(|&x| (x as usize) < n) => {
                    if rule.contains(&e) {
                        Verdict::certified(Witness::new(format!("{e} is a member")))
                    } else {
                        Verdict::refuted(Witness::new(format!("{e} is not a member")))
                    }
                }
                _ => Verdict::undetermined("not an eventually periodic label sequence"),
            })
        })
    }
}

/// Eventually constant sequences on `{0, 1, 2}` that never show `1` directly
/// followed by `2`. Strong, but breaks the alternation law: with `x = 1·0^∞`,
/// `y = 0^∞`, `z = 2·0^∞` both `x⊙y` and `y⊙z` are members while `x⊙z` is not.
pub fn fw_violating_rule() -> FiniteRule {
    FiniteRule::custom("eventually-constant-without-12", |s| {
        if !s.is_eventually_constant() {
            return false;
        }
        let k = s.pre.len() + 1;
        !(0..k).any(|i| s.get(i) == 1 && s.get(i + 1) == 2)
    })
}

/// One line of the map-enumeration report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapCheck {
    pub map: Vec<usize>,
    pub start: usize,
    pub expected: Vec<usize>,
    pub got: Vec<usize>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapsReport {
    pub n: usize,
    pub maps: usize,
    pub checks: usize,
    /// Orbits where `detect_cycle` disagreed with the naive scan.
    pub cycle_disagreements: usize,
    pub mismatches: Vec<MapCheck>,
    #[serde(skip)]
    pub lines: Vec<MapCheck>,
}

impl MapsReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.cycle_disagreements == 0
    }
}

/// Eventual cycle of `start` under `table` by scanning all index pairs.
pub fn naive_cycle(table: &[usize], start: usize) -> Vec<usize> {
    let mut orbit = vec![start];
    loop {
        let next = table[*orbit.last().expect("non-empty")];
        if let Some(j) = orbit.iter().position(|&x| x == next) {
            let mut c = orbit[j..].to_vec();
            c.sort_unstable();
            return c;
        }
        orbit.push(next);
    }
}

fn decode_map(mut code: usize, n: usize) -> Vec<usize> {
    (0..n)
        .map(|_| {
            let d = code % n;
            code /= n;
            d
        })
        .collect()
}

fn check_map(table: &[usize], cfg: &SolveConfig) -> Result<Vec<(MapCheck, bool)>> {
    let n = table.len();
    let t = table.to_vec();
    let f = crate::maps::Builtin::Table { values: t.clone() }.build()?;
    let c = CauchyStructure::orbit(f.clone(), EqRule::Exact);
    let l = LimOperator::discrete();
    (0..n)
        .map(|start| {
            let expected = naive_cycle(table, start);
            let x0 = Point::label(start, n)?;
            let out = solve_general(&f, &x0, &c, &l, cfg)?;
            let mut got: Vec<usize> = match &out {
                SolveOutcome::Undetermined { .. } => vec![],
                o => o.points().iter().filter_map(Point::as_label).collect(),
            };
            got.sort_unstable();
            got.dedup();
            let orbit = orbit_prefix(f.clone(), x0, 2 * n + 2)?;
            let agree = match detect_cycle(&orbit, 2 * n + 2, EqRule::Exact)? {
                Some(cyc) => {
                    let mut m: Vec<usize> = cyc.members(&orbit)?.iter().filter_map(Point::as_label).collect();
                    m.sort_unstable();
                    m == expected
                }
                None => false,
            };
            let ok = got == expected;
            Ok((
                MapCheck {
                    map: t.clone(),
                    start,
                    expected,
                    got,
                    ok,
                },
                agree,
            ))
        })
        .collect()
}

/// Runs the general solver on every endomap of `{0, …, n−1}` from every start
/// and compares with the naive eventual cycle.
pub fn enumerate_maps_verify(n: usize, exec: Execution) -> Result<MapsReport> {
    if n == 0 || n > MAX_SIZE {
        return Err(Error::invalid(format!("oracle size must be in 1..={MAX_SIZE}, got {n}")));
    }
    let total = n.pow(n as u32);
    let cfg = SolveConfig {
        max_iter: 4 * (n + 1),
        ..SolveConfig::default()
    };
    let per_map = exec.map_range(0..total, |code| check_map(&decode_map(code, n), &cfg));
    let mut report = MapsReport {
        n,
        maps: total,
        checks: 0,
        cycle_disagreements: 0,
        mismatches: vec![],
        lines: Vec::with_capacity(total * n),
    };
    for checks in per_map {
        for (line, agree) in checks? {
            report.checks += 1;
            if !agree {
                report.cycle_disagreements += 1;
            }
            if !line.ok {
                report.mismatches.push(line.clone());
            }
            report.lines.push(line);
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FwCounterexample {
    pub kind: String,
    pub sequences: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FwReport {
    pub n: usize,
    pub structure: String,
    pub max_period: usize,
    pub sequences: usize,
    pub members: usize,
    pub shift_closed: bool,
    pub constants: bool,
    pub prop_violations: usize,
    pub scs: bool,
    /// `None` when the strong axioms already fail.
    pub fw: Option<bool>,
    pub fw_violations: usize,
    /// Members whose C-Lim set is a singleton.
    pub singleton_limits: usize,
    pub empty_limits: usize,
    pub multi_limits: usize,
    /// Strong + alternation law + some member with two or more limits.
    pub counterexamples: Vec<FwCounterexample>,
    /// First witnesses for failed axioms (not counterexamples to the claim).
    pub axiom_witnesses: Vec<FwCounterexample>,
}

fn all_words(n: usize, len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..n as u8).map(move |x| {
                    let mut w = w.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Every canonical eventually periodic sequence over `n` labels with
/// preamble and cycle length at most `max_period`.
pub fn enumerate_sequences(n: usize, max_period: usize) -> Vec<EpSeq> {
    let mut set = BTreeSet::new();
    for p in 0..=max_period {
        for pre in all_words(n, p) {
            for c in 1..=max_period {
                for cyc in all_words(n, c) {
                    set.insert(EpSeq::new(pre.clone(), cyc).expect("non-empty cycle"));
                }
            }
        }
    }
    set.into_iter().collect()
}

const WITNESS_CAP: usize = 8;

/// Exhaustive check of the strong-structure axioms, the alternation law and
/// the uniqueness of C-Lim points over eventually periodic sequences.
pub fn frechet_wilson_brute(n: usize, rule: &FiniteRule, max_period: usize, exec: Execution) -> Result<FwReport> {
    if n == 0 || n > MAX_SIZE {
        return Err(Error::invalid(format!("oracle size must be in 1..={MAX_SIZE}, got {n}")));
    }
    if max_period == 0 {
        return Err(Error::invalid("max_period must be at least 1"));
    }
    let all = enumerate_sequences(n, max_period);
    let members: Vec<&EpSeq> = all.iter().filter(|s| rule.contains(s)).collect();
    let mut report = FwReport {
        n,
        structure: rule.name(),
        max_period,
        sequences: all.len(),
        members: members.len(),
        shift_closed: true,
        constants: true,
        prop_violations: 0,
        scs: false,
        fw: None,
        fw_violations: 0,
        singleton_limits: 0,
        empty_limits: 0,
        multi_limits: 0,
        counterexamples: vec![],
        axiom_witnesses: vec![],
    };
    let witness = |r: &mut FwReport, kind: &str, seqs: Vec<String>| {
        if r.axiom_witnesses.len() < WITNESS_CAP {
            r.axiom_witnesses.push(FwCounterexample {
                kind: kind.into(),
                sequences: seqs,
            });
        }
    };

    for s in &members {
        if !rule.contains(&s.tail()) {
            report.shift_closed = false;
            witness(&mut report, "shift", vec![s.to_string()]);
        }
    }
    for x in 0..n as u8 {
        if !rule.contains(&EpSeq::constant(x)) {
            report.constants = false;
            witness(&mut report, "constant", vec![EpSeq::constant(x).to_string()]);
        }
    }
    for k in 1..=max_period {
        for z in all_words(n, k) {
            let s = EpSeq::new(vec![], z.clone())?;
            if rule.contains(&s) && z[0] != z[k - 1] {
                report.prop_violations += 1;
                let word = z.iter().map(u8::to_string).collect::<Vec<_>>().join(",");
                witness(&mut report, "prop", vec![format!("⟨{word}⟩")]);
            }
        }
    }
    report.scs = report.shift_closed && report.constants && report.prop_violations == 0;

    let limits = |s: &EpSeq| -> Vec<u8> {
        (0..n as u8)
            .filter(|&x| rule.contains(&EpSeq::constant(x).alternate(s)))
            .collect()
    };
    let lim_counts: Vec<Vec<u8>> = exec.map(&members, |s| limits(s));
    for l in &lim_counts {
        match l.len() {
            0 => report.empty_limits += 1,
            1 => report.singleton_limits += 1,
            _ => report.multi_limits += 1,
        }
    }

    if report.scs {
        let violations: Vec<Vec<[String; 3]>> = exec.map(&members, |y| {
            let left: Vec<&EpSeq> = all.iter().filter(|x| rule.contains(&x.alternate(y))).collect();
            let right: Vec<&EpSeq> = all.iter().filter(|z| rule.contains(&y.alternate(z))).collect();
            let mut bad = vec![];
            for x in &left {
                for z in &right {
                    if !rule.contains(&x.alternate(z)) {
                        bad.push([x.to_string(), y.to_string(), z.to_string()]);
                    }
                }
            }
            bad
        });
        let mut by_kind: BTreeMap<usize, ()> = BTreeMap::new();
        for triple in violations.into_iter().flatten() {
            report.fw_violations += 1;
            if by_kind.len() < WITNESS_CAP {
                by_kind.insert(by_kind.len(), ());
                witness(&mut report, "fw", triple.to_vec());
            }
        }
        report.fw = Some(report.fw_violations == 0);
        if report.fw_violations == 0 {
            for (s, l) in members.iter().zip(&lim_counts) {
                if l.len() > 1 {
                    report.counterexamples.push(FwCounterexample {
                        kind: "multiple limits".into(),
                        sequences: vec![s.to_string()],
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let s = EpSeq::new(vec![0, 1, 0, 1], vec![0, 1, 0, 1]).unwrap();
        assert_eq!(s, EpSeq::new(vec![], vec![0, 1]).unwrap());
        let t = EpSeq::new(vec![2, 0], vec![1, 0]).unwrap();
        assert_eq!(t, EpSeq { pre: vec![2], cycle: vec![0, 1] });
        assert_eq!(t.tail().tail(), EpSeq::new(vec![], vec![1, 0]).unwrap());
        for i in 0..10 {
            assert_eq!(t.get(i), [2, 0, 1, 0, 1, 0, 1, 0, 1, 0][i]);
        }
    }

    #[test]
    fn alternation_matches_pointwise() {
        let a = EpSeq::new(vec![1], vec![0, 2]).unwrap();
        let b = EpSeq::new(vec![], vec![1, 1, 0]).unwrap();
        let c = a.alternate(&b);
        for k in 0..40 {
            assert_eq!(c.get(2 * k), a.get(k));
            assert_eq!(c.get(2 * k + 1), b.get(k));
        }
    }

    #[test]
    fn naive_cycle_examples() {
        assert_eq!(naive_cycle(&[1, 2, 0], 0), vec![0, 1, 2]);
        assert_eq!(naive_cycle(&[1, 1, 0], 2), vec![1]);
    }

    #[test]
    fn single_point_space() {
        let r = enumerate_maps_verify(1, Execution::Sequential).unwrap();
        assert_eq!((r.maps, r.checks), (1, 1));
        assert!(r.is_clean());
    }

    #[test]
    fn size_out_of_range() {
        assert!(enumerate_maps_verify(0, Execution::Sequential).is_err());
        assert!(enumerate_maps_verify(6, Execution::Sequential).is_err());
    }

    #[test]
    fn all_sequences_is_not_strong() {
        let r = frechet_wilson_brute(2, &FiniteRule::All, 3, Execution::Sequential).unwrap();
        assert!(!r.scs && r.prop_violations > 0);
        assert!(r.axiom_witnesses.iter().any(|w| w.sequences == ["⟨0,1⟩"]));
    }

    #[test]
    fn violating_rule_breaks_alternation_law_only() {
        let r = frechet_wilson_brute(3, &fw_violating_rule(), 3, Execution::Sequential).unwrap();
        assert!(r.scs);
        assert_eq!(r.fw, Some(false));
        assert!(r.counterexamples.is_empty());
    }
}
