//! Finite distance and order tables, loaded from `{points, values}` JSON.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::spaces::Comparison;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    points: Vec<Json>,
    values: Vec<Vec<Json>>,
}

fn point_name(j: &Json) -> String {
    match j {
        Json::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Parses a float or an exact rational written as `"p/q"`.
pub fn parse_entry(j: &Json) -> Result<f64> {
    let bad = || Error::Config(format!("table entry {j} is not a number or p/q rational"));
    let x = match j {
        Json::Number(n) => n.as_f64().ok_or_else(bad)?,
        Json::String(s) => {
            let s = s.trim();
            match s.split_once('/') {
                Some((p, q)) => {
                    let p: i64 = p.trim().parse().map_err(|_| bad())?;
                    let q: i64 = q.trim().parse().map_err(|_| bad())?;
                    if q == 0 {
                        return Err(bad());
                    }
                    p as f64 / q as f64
                }
                None => s.parse().map_err(|_| bad())?,
            }
        }
        _ => return Err(bad()),
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn parse_flag(j: &Json) -> Result<bool> {
    match j {
        Json::Bool(b) => Ok(*b),
        Json::Number(n) if n.as_u64() == Some(0) => Ok(false),
        Json::Number(n) if n.as_u64() == Some(1) => Ok(true),
        _ => Err(Error::Config(format!("order table entry {j} must be true/false or 0/1"))),
    }
}

fn check_square<T>(names: &[String], values: &[Vec<T>], what: &str) -> Result<()> {
    if names.is_empty() {
        return Err(Error::Config(format!("{what} table needs at least one point")));
    }
    if values.len() != names.len() || values.iter().any(|r| r.len() != names.len()) {
        return Err(Error::Config(format!(
            "{what} table must be {n}×{n}",
            n = names.len()
        )));
    }
    Ok(())
}

/// An explicit distance `d : X × X → ℝ` on a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceTable {
    names: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl DistanceTable {
    /// With `check_axiom`, rejects tables where some `x ≠ y` has
    /// `d(x,y) = d(y,x) = d(x,x) = d(y,y)`.
    pub fn new(names: Vec<String>, values: Vec<Vec<f64>>, check_axiom: bool) -> Result<Self> {
        check_square(&names, &values, "distance")?;
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Config("distance table entries must be finite".into()));
        }
        let t = DistanceTable { names, values };
        if check_axiom {
            if let Some((i, j)) = t.axiom_violation() {
                return Err(Error::Config(format!(
                    "distance table collapses distinct points {} and {}",
                    t.names[i], t.names[j]
                )));
            }
        }
        Ok(t)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTable = serde_json::from_str(text)?;
        let names: Vec<String> = raw.points.iter().map(point_name).collect();
        let values = raw
            .values
            .iter()
            .map(|row| row.iter().map(parse_entry).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, values, true)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        self.values
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .ok_or_else(|| Error::invalid(format!("table index ({i}, {j}) outside {}×{}", self.len(), self.len())))
    }

    /// Exhaustive check of the distance axiom; returns the first collapsing pair.
    pub fn axiom_violation(&self) -> Option<(usize, usize)> {
        let n = self.len();
        let v = &self.values;
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| v[i][j] == v[j][i] && v[i][j] == v[i][i] && v[i][j] == v[j][j])
    }

    /// `d(x,y) = 0 ⇔ x = y` on the whole table.
    pub fn is_metric_like(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| (self.values[i][j] == 0.0) == (i == j)))
    }
}

/// A finite partial order given by its full `≤` relation table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
}

impl FinitePoset {
    /// Validates reflexivity, antisymmetry and transitivity exactly.
    pub fn new(names: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        check_square(&names, &leq, "order")?;
        let n = names.len();
        for i in 0..n {
            if !leq[i][i] {
                return Err(Error::Config(format!("order not reflexive at {}", names[i])));
            }
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(Error::Config(format!(
                        "order not antisymmetric: {} and {}",
                        names[i], names[j]
                    )));
                }
                for k in 0..n {
                    if leq[i][j] && leq[j][k] && !leq[i][k] {
                        return Err(Error::Config(format!(
                            "order not transitive: {} ≤ {} ≤ {}",
                            names[i], names[j], names[k]
                        )));
                    }
                }
            }
        }
        Ok(FinitePoset { names, leq })
    }

    /// A chain `0 ≤ 1 ≤ … ≤ n−1`.
    pub fn chain(n: usize) -> Result<Self> {
        let names = (0..n).map(|i| i.to_string()).collect();
        let leq = (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect();
        Self::new(names, leq)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTable = serde_json::from_str(text)?;
        let names = raw.points.iter().map(point_name).collect();
        let leq = raw
            .values
            .iter()
            .map(|row| row.iter().map(parse_flag).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, leq)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn compare(&self, a: usize, b: usize) -> Comparison {
        match (self.leq[a][b], self.leq[b][a]) {
            (true, true) => Comparison::Eq,
            (true, false) => Comparison::Lt,
            (false, true) => Comparison::Gt,
            (false, false) => Comparison::Incomparable,
        }
    }

    /// The least common upper bound of `xs` if one exists, otherwise any
    /// common upper bound.
    pub fn least_upper_candidate(&self, xs: &[usize]) -> Option<usize> {
        let ubs: Vec<usize> = (0..self.len())
            .filter(|&u| xs.iter().all(|&x| self.leq[x][u]))
            .collect();
        ubs.iter()
            .copied()
            .find(|&u| ubs.iter().all(|&v| self.leq[u][v]))
            .or_else(|| ubs.first().copied())
    }

    pub fn greatest_lower_candidate(&self, xs: &[usize]) -> Option<usize> {
        let lbs: Vec<usize> = (0..self.len())
            .filter(|&l| xs.iter().all(|&x| self.leq[l][x]))
            .collect();
        lbs.iter()
            .copied()
            .find(|&l| lbs.iter().all(|&v| self.leq[v][l]))
            .or_else(|| lbs.first().copied())
    }

    pub fn strictly_above(&self, e: usize) -> Option<usize> {
        (0..self.len()).find(|&u| u != e && self.leq[e][u])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_and_floats_parse() {
        let t = DistanceTable::from_json(r#"{"points": ["a", "b", 3], "values": [[0, "1/2", 1], ["1/2", 0, "3/4"], [1.0, "3/4", 0]]}"#)
            .unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.get(0, 1).unwrap(), 0.5);
        assert_eq!(t.get(1, 2).unwrap(), 0.75);
        assert_eq!(t.names()[2], "3");
        assert!(t.is_metric_like());
    }

    #[test]
    fn degenerate_table_rejected_at_load() {
        let err = DistanceTable::from_json(r#"{"points": [0, 1], "values": [[1, 1], [1, 1]]}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn bad_shapes_and_entries() {
        assert!(DistanceTable::from_json(r#"{"points": [0, 1], "values": [[0, 1]]}"#).is_err());
        assert!(DistanceTable::from_json(r#"{"points": [0, 1], "values": [[0, "1/0"], [1, 0]]}"#).is_err());
        assert!(DistanceTable::from_json(r#"{"points": [0], "values": [[0]], "extra": 1}"#).is_err());
    }

    #[test]
    fn poset_validation() {
        let p = FinitePoset::from_json(r#"{"points": ["bot", "x", "y", "top"], "values": [[1,1,1,1],[0,1,0,1],[0,0,1,1],[0,0,0,1]]}"#)
            .unwrap();
        assert_eq!(p.compare(1, 2), Comparison::Incomparable);
        assert_eq!(p.compare(0, 3), Comparison::Lt);
        assert_eq!(p.least_upper_candidate(&[1, 2]), Some(3));
        assert_eq!(p.greatest_lower_candidate(&[1, 2]), Some(0));
        assert!(FinitePoset::from_json(r#"{"points": [0, 1], "values": [[true, true], [true, true]]}"#).is_err());
        assert!(FinitePoset::from_json(r#"{"points": [0, 1], "values": [[false, true], [false, true]]}"#).is_err());
    }
}
