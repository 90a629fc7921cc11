use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::measure::DiscreteMeasure;
use crate::tolerance::Tolerances;

/// Ground cost between source and target points. Everything is minimised;
/// `Correlation` is stored as the signed cost `-<x, y>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CostSpec {
    /// `c(x, y) = |x - y|^p`, Euclidean norm, `p > 1`.
    PNorm { p: f64 },
    /// `c(x, y) = -<x, y>`.
    Correlation,
    /// Explicit `M x N` matrix, row `i` for source point `i`.
    Matrix { values: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportProblem {
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
    pub cost: CostSpec,
}

/// Dense row-major `M x N` cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { m, n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(OtError::InvalidInput("empty cost matrix".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(OtError::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
        Ok(Self {
            m,
            n,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, self.m, |j, i| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `1 + max |C_ij|`, the scale used by relative tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self.max_abs()
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(OtError::NonFiniteCost {
                i: k / self.n,
                j: k % self.n,
            }),
            None => Ok(()),
        }
    }
}

pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `|x - y|^p`; exact sum of squares when `p == 2`.
pub fn pnorm_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let s = sq_dist(x, y);
    if p == 2.0 {
        s
    } else if p == 1.0 {
        s.sqrt()
    } else {
        s.powf(p / 2.0)
    }
}

impl TransportProblem {
    pub fn new(source: DiscreteMeasure, target: DiscreteMeasure, cost: CostSpec) -> Result<Self> {
        let p = Self {
            source,
            target,
            cost,
        };
        p.validate(&Tolerances::default())?;
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.source.len()
    }

    pub fn n(&self) -> usize {
        self.target.len()
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        self.source.check(tol)?;
        self.target.check(tol)?;
        match &self.cost {
            CostSpec::PNorm { p } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(OtError::InvalidInput(format!("p-norm cost needs p > 1, got {p}")));
                }
                self.check_dims()?;
            }
            CostSpec::Correlation => self.check_dims()?,
            CostSpec::Matrix { values } => {
                if values.len() != self.m() {
                    return Err(OtError::DimensionMismatch {
                        expected: self.m(),
                        found: values.len(),
                    });
                }
                if let Some(r) = values.iter().find(|r| r.len() != self.n()) {
                    return Err(OtError::DimensionMismatch {
                        expected: self.n(),
                        found: r.len(),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_dims(&self) -> Result<()> {
        if self.source.dim() != self.target.dim() {
            return Err(OtError::DimensionMismatch {
                expected: self.source.dim(),
                found: self.target.dim(),
            });
        }
        Ok(())
    }

    /// `C(X, Y)_ij = c(x_i, y_j)`.
    pub fn cost_matrix(&self) -> Result<CostMatrix> {
        let (xs, ys) = (&self.source.points, &self.target.points);
        let c = match &self.cost {
            CostSpec::PNorm { p } => {
                self.check_dims()?;
                let p = *p;
                CostMatrix::from_fn(xs.len(), ys.len(), |i, j| pnorm_cost(&xs[i], &ys[j], p))
            }
            CostSpec::Correlation => {
                self.check_dims()?;
                CostMatrix::from_fn(xs.len(), ys.len(), |i, j| -dot(&xs[i], &ys[j]))
            }
            CostSpec::Matrix { values } => {
                let c = CostMatrix::from_rows(values)?;
                if c.rows() != xs.len() || c.cols() != ys.len() {
                    return Err(OtError::DimensionMismatch {
                        expected: xs.len() * ys.len(),
                        found: c.rows() * c.cols(),
                    });
                }
                c
            }
        };
        c.check_finite()?;
        Ok(c)
    }

    /// Exchanges source and target; explicit matrices are transposed.
    pub fn swapped(&self) -> Self {
        let cost = match &self.cost {
            CostSpec::Matrix { values } => CostSpec::Matrix {
                values: CostMatrix::from_rows(values)
                    .map(|c| c.transpose().to_rows())
                    .unwrap_or_default(),
            },
            other => other.clone(),
        };
        Self {
            source: self.target.clone(),
            target: self.source.clone(),
            cost,
        }
    }

    /// Same measures with new support points (weights and cost kind kept).
    pub fn with_points(&self, xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>) -> Self {
        Self {
            source: DiscreteMeasure {
                points: xs,
                weights: self.source.weights.clone(),
            },
            target: DiscreteMeasure {
                points: ys,
                weights: self.target.weights.clone(),
            },
            cost: self.cost.clone(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self =
            serde_json::from_str(s).map_err(|e| OtError::InvalidInput(format!("bad problem JSON: {e}")))?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jump(eps: f64) -> TransportProblem {
        TransportProblem {
            source: DiscreteMeasure {
                points: vec![vec![-1.0, eps], vec![1.0, -eps]],
                weights: vec![0.5, 0.5],
            },
            target: DiscreteMeasure {
                points: vec![vec![0.0, 1.0], vec![0.0, -1.0]],
                weights: vec![0.5, 0.5],
            },
            cost: CostSpec::PNorm { p: 2.0 },
        }
    }

    #[test]
    fn single_pair_is_3_4_5() {
        let p = TransportProblem {
            source: DiscreteMeasure {
                points: vec![vec![0.0, 0.0]],
                weights: vec![1.0],
            },
            target: DiscreteMeasure {
                points: vec![vec![3.0, 4.0]],
                weights: vec![1.0],
            },
            cost: CostSpec::PNorm { p: 2.0 },
        };
        assert_eq!(p.cost_matrix().unwrap().to_rows(), vec![vec![25.0]]);
    }

    #[test]
    fn jump_cost_matrix() {
        let c = jump(0.1).cost_matrix().unwrap();
        let expected = [[1.81, 2.21], [2.21, 1.81]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((c.get(i, j) - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn explicit_matrix_passes_through() {
        let values = vec![vec![1.0, -2.0, 3.5], vec![0.0, 7.0, 1.0]];
        let mut p = jump(0.0);
        p.target = DiscreteMeasure {
            points: vec![vec![0.0]; 3],
            weights: vec![0.25, 0.25, 0.5],
        };
        p.cost = CostSpec::Matrix {
            values: values.clone(),
        };
        p.validate(&Tolerances::default()).unwrap();
        assert_eq!(p.cost_matrix().unwrap().to_rows(), values);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut p = jump(0.1);
        p.target.points = vec![vec![0.0, 1.0, 0.0], vec![0.0, -1.0, 0.0]];
        assert!(matches!(p.cost_matrix(), Err(OtError::DimensionMismatch { .. })));
        assert!(p.validate(&Tolerances::default()).is_err());
    }

    #[test]
    fn pnorm_requires_p_above_one() {
        let mut p = jump(0.1);
        p.cost = CostSpec::PNorm { p: 1.0 };
        assert!(p.validate(&Tolerances::default()).is_err());
    }

    #[test]
    fn json_schema() {
        let s = r#"{"source": {"points": [[0.0]], "weights": [1.0]},
                    "target": {"points": [[2.0]], "weights": [1.0]},
                    "cost": {"type": "p_norm", "p": 2.0}}"#;
        let p = TransportProblem::from_json(s).unwrap();
        assert_eq!(p.cost, CostSpec::PNorm { p: 2.0 });
        let back: TransportProblem = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let c: CostSpec = serde_json::from_str(r#"{"type": "correlation"}"#).unwrap();
        assert_eq!(c, CostSpec::Correlation);
        let c: CostSpec = serde_json::from_str(r#"{"type": "matrix", "values": [[1.0]]}"#).unwrap();
        assert_eq!(c, CostSpec::Matrix { values: vec![vec![1.0]] });
    }
}
