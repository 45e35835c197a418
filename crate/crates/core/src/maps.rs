//! Catalog of self-maps that configs can name.

use serde::{Deserialize, Serialize};

use crate::error::{Error, MapError, Result};
use crate::seqcore::{map_fn, MapRef, Point};

/// One linear piece `x ↦ slope·x + intercept`, used for `x < upto`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    #[serde(default)]
    pub upto: Option<f64>,
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin {
    /// `x ↦ Ax + b` on `ℝᵈ`
    Affine { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// `x ↦ p(x)/q(x)` with ascending coefficients
    Rational { num: Vec<f64>, den: Vec<f64> },
    /// Piecewise-linear map on `ℝ`; the last piece must be unbounded.
    Piecewise { pieces: Vec<Piece> },
    /// `i ↦ (i + shift) mod size`
    ModCycle { size: usize, shift: usize },
    /// `i ↦ values[i]` on `{0, …, n−1}`
    Table { values: Vec<usize> },
    /// `(h, k) ↦ (h + 1/(k+1), k + 1)`: the first coordinate runs through the
    /// harmonic partial sums.
    Harmonic {},
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn real_arg(x: &Point, dim: usize) -> std::result::Result<&[f64], MapError> {
    match x.as_real() {
        Some(v) if v.len() == dim => Ok(v),
        _ => Err(MapError::new(format!("expected a point of ℝ^{dim}, got {x}"))),
    }
}

fn label_arg(x: &Point, n: usize) -> std::result::Result<usize, MapError> {
    match x {
        Point::Label { index, size } if *size == n => Ok(*index),
        _ => Err(MapError::new(format!("expected a label of a {n}-point space, got {x}"))),
    }
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Affine { .. } => "affine",
            Builtin::Rational { .. } => "rational",
            Builtin::Piecewise { .. } => "piecewise",
            Builtin::ModCycle { .. } => "mod_cycle",
            Builtin::Table { .. } => "table",
            Builtin::Harmonic {} => "harmonic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Builtin::Affine { a, b } => {
                if b.is_empty() || a.len() != b.len() || a.iter().any(|row| row.len() != b.len()) {
                    return Err(Error::Config("affine map needs a square matrix `a` matching `b`".into()));
                }
                if a.iter().flatten().chain(b).any(|v| !v.is_finite()) {
                    return Err(Error::Config("affine coefficients must be finite".into()));
                }
            }
            Builtin::Rational { num, den } => {
                if num.is_empty() || den.is_empty() || den.iter().all(|&c| c == 0.0) {
                    return Err(Error::Config("rational map needs non-empty num and a non-zero den".into()));
                }
            }
            Builtin::Piecewise { pieces } => match pieces.last() {
                None => return Err(Error::Config("piecewise map needs at least one piece".into())),
                Some(last) if last.upto.is_some() => {
                    return Err(Error::Config("the last piece must omit `upto`".into()))
                }
                _ => {
                    let bounds: Vec<f64> = pieces.iter().filter_map(|p| p.upto).collect();
                    if bounds.len() + 1 != pieces.len() || bounds.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(Error::Config("piece bounds must be strictly increasing".into()));
                    }
                }
            },
            Builtin::ModCycle { size, shift } => {
                if *size == 0 || shift >= size {
                    return Err(Error::Config("mod_cycle needs 0 ≤ shift < size".into()));
                }
            }
            Builtin::Table { values } => {
                let n = values.len();
                if n == 0 || values.iter().any(|&v| v >= n) {
                    return Err(Error::Config("table map must send {0..n} into itself".into()));
                }
            }
            Builtin::Harmonic {} => {}
        }
        Ok(())
    }

    /// Size of the finite carrier for label maps.
    pub fn finite_size(&self) -> Option<usize> {
        match self {
            Builtin::ModCycle { size, .. } => Some(*size),
            Builtin::Table { values } => Some(values.len()),
            _ => None,
        }
    }

    /// Dimension of the real carrier for real maps.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Builtin::Affine { b, .. } => Some(b.len()),
            Builtin::Rational { .. } | Builtin::Piecewise { .. } => Some(1),
            Builtin::Harmonic {} => Some(2),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<MapRef> {
        self.validate()?;
        Ok(match self.clone() {
            Builtin::Affine { a, b } => map_fn(move |x: &Point| {
                let v = real_arg(x, b.len())?;
                let y = a
                    .iter()
                    .zip(&b)
                    .map(|(row, bi)| row.iter().zip(v).map(|(r, x)| r * x).sum::<f64>() + bi)
                    .collect();
                Ok(Point::Real(y))
            }),
            Builtin::Rational { num, den } => map_fn(move |x: &Point| {
                let x = real_arg(x, 1)?[0];
                let q = poly(&den, x);
                if q == 0.0 {
                    return Err(MapError::new(format!("denominator vanishes at {x}")));
                }
                Ok(Point::Real(vec![poly(&num, x) / q]))
            }),
            Builtin::Piecewise { pieces } => map_fn(move |x: &Point| {
                let x = real_arg(x, 1)?[0];
                let p = pieces
                    .iter()
                    .find(|p| p.upto.is_none_or(|u| x < u))
                    .expect("validated: last piece is unbounded");
                Ok(Point::Real(vec![p.slope * x + p.intercept]))
            }),
            Builtin::ModCycle { size, shift } => map_fn(move |x: &Point| {
                let i = label_arg(x, size)?;
                Ok(Point::Label {
                    index: (i + shift) % size,
                    size,
                })
            }),
            Builtin::Table { values } => map_fn(move |x: &Point| {
                let i = label_arg(x, values.len())?;
                Ok(Point::Label {
                    index: values[i],
                    size: values.len(),
                })
            }),
            Builtin::Harmonic {} => map_fn(|x: &Point| {
                let v = real_arg(x, 2)?;
                Ok(Point::Real(vec![v[0] + 1.0 / (v[1] + 1.0), v[1] + 1.0]))
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_applies_matrix() {
        let f = Builtin::Affine {
            a: vec![vec![0.5, 0.0], vec![1.0, 0.25]],
            b: vec![1.0, -1.0],
        }
        .build()
        .unwrap();
        assert_eq!(f.apply(&Point::Real(vec![2.0, 4.0])).unwrap(), Point::Real(vec![2.0, 2.0]));
    }

    #[test]
    fn rational_and_piecewise() {
        let r = Builtin::Rational { num: vec![1.0, 1.0], den: vec![2.0] }.build().unwrap();
        assert_eq!(r.apply(&Point::scalar(3.0)).unwrap(), Point::scalar(2.0));
        let z = Builtin::Rational { num: vec![1.0], den: vec![0.0, 1.0] }.build().unwrap();
        assert!(z.apply(&Point::scalar(0.0)).is_err());
        let p = Builtin::Piecewise {
            pieces: vec![
                Piece { upto: Some(0.0), slope: 0.0, intercept: 0.0 },
                Piece { upto: None, slope: 0.5, intercept: 0.0 },
            ],
        }
        .build()
        .unwrap();
        assert_eq!(p.apply(&Point::scalar(-3.0)).unwrap(), Point::scalar(0.0));
        assert_eq!(p.apply(&Point::scalar(3.0)).unwrap(), Point::scalar(1.5));
    }

    #[test]
    fn finite_maps() {
        let m = Builtin::ModCycle { size: 3, shift: 1 }.build().unwrap();
        assert_eq!(m.apply(&Point::label(2, 3).unwrap()).unwrap(), Point::label(0, 3).unwrap());
        assert!(Builtin::Table { values: vec![0, 3] }.build().is_err());
        assert!(m.apply(&Point::label(0, 4).unwrap()).is_err());
    }

    #[test]
    fn harmonic_partial_sums() {
        let h = Builtin::Harmonic {}.build().unwrap();
        let mut x = Point::Real(vec![0.0, 0.0]);
        for _ in 0..3 {
            x = h.apply(&x).unwrap();
        }
        let v = x.as_real().unwrap();
        assert!((v[0] - (1.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-15 && v[1] == 3.0);
    }

    #[test]
    fn config_round_trip() {
        let b: Builtin = serde_json::from_str(r#"{"builtin":"mod_cycle","size":3,"shift":1}"#).unwrap();
        assert_eq!(b, Builtin::ModCycle { size: 3, shift: 1 });
        assert!(serde_json::from_str::<Builtin>(r#"{"builtin":"harmonic","x":1}"#).is_err());
    }
}
