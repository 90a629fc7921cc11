use serde::{Deserialize, Serialize};

use crate::error::{OtError, Result};
use crate::tolerance::Tolerances;

/// A finitely supported probability measure `sum_i w_i delta_{x_i}` on R^d.
///
/// Points may coincide; they are never merged implicitly (see [`coalesce`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure, rejecting empty supports, ragged or zero dimensions,
    /// nonpositive weights and a total mass away from one.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let m = Self { points, weights };
        m.check(&Tolerances::default())?;
        Ok(m)
    }

    /// Uniform weights over the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self::new(points, weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub(crate) fn check(&self, tol: &Tolerances) -> Result<()> {
        let report = validate(self, tol);
        if self.points.is_empty() {
            return Err(OtError::InvalidInput("measure has no support points".into()));
        }
        if self.points.len() != self.weights.len() {
            return Err(OtError::InvalidInput(format!(
                "{} points but {} weights",
                self.points.len(),
                self.weights.len()
            )));
        }
        if self.dim() == 0 {
            return Err(OtError::InvalidInput("points must have dimension >= 1".into()));
        }
        if let Some(&i) = report.ragged.first() {
            return Err(OtError::DimensionMismatch {
                expected: self.dim(),
                found: self.points[i].len(),
            });
        }
        if let Some(&i) = report.nonpositive.first() {
            return Err(OtError::InvalidInput(format!(
                "weight {i} is not strictly positive ({})",
                self.weights[i]
            )));
        }
        if self.points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(OtError::InvalidInput("non-finite coordinate".into()));
        }
        if report.mass_defect > tol.mass {
            return Err(OtError::InvalidInput(format!(
                "weights sum to {} (defect {:e})",
                self.total_mass(),
                report.mass_defect
            )));
        }
        Ok(())
    }
}

/// Diagnostics produced by [`validate`]. Coinciding points are informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub ok: bool,
    pub mass_defect: f64,
    pub mass_defect_flagged: bool,
    pub nonpositive: Vec<usize>,
    pub ragged: Vec<usize>,
    pub coinciding: Vec<(usize, usize)>,
    pub notes: Vec<String>,
}

pub fn validate(measure: &DiscreteMeasure, tol: &Tolerances) -> MeasureReport {
    let mass_defect = (measure.total_mass() - 1.0).abs();
    let mass_defect_flagged = mass_defect > tol.mass;
    let nonpositive: Vec<usize> = measure
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| !(w > 0.0))
        .map(|(i, _)| i)
        .collect();
    let d = measure.dim();
    let ragged: Vec<usize> = measure
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.len() != d)
        .map(|(i, _)| i)
        .collect();

    let mut order: Vec<usize> = (0..measure.len()).collect();
    order.sort_by(|&a, &b| cmp_points(&measure.points[a], &measure.points[b]).then(a.cmp(&b)));
    let mut coinciding = Vec::new();
    for w in order.windows(2) {
        if measure.points[w[0]] == measure.points[w[1]] {
            coinciding.push((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    coinciding.sort_unstable();

    let mut notes = Vec::new();
    if mass_defect_flagged {
        notes.push(format!("mass defect {mass_defect:e}"));
    }
    if !coinciding.is_empty() {
        notes.push(format!("{} coinciding point pair(s)", coinciding.len()));
    }
    MeasureReport {
        ok: !mass_defect_flagged && nonpositive.is_empty() && ragged.is_empty(),
        mass_defect,
        mass_defect_flagged,
        nonpositive,
        ragged,
        coinciding,
        notes,
    }
}

fn cmp_points(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Merges exactly coinciding points by summing their weights. Returns the
/// merged measure and, for every original index, its index in the result.
pub fn coalesce(measure: &DiscreteMeasure) -> (DiscreteMeasure, Vec<usize>) {
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut index = vec![0; measure.len()];
    let mut order: Vec<usize> = (0..measure.len()).collect();
    order.sort_by(|&a, &b| cmp_points(&measure.points[a], &measure.points[b]).then(a.cmp(&b)));
    let mut first_of_group: Vec<usize> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos > 0 && measure.points[order[pos - 1]] == measure.points[i] {
            index[i] = index[order[pos - 1]];
        } else {
            index[i] = first_of_group.len();
            first_of_group.push(i);
        }
    }
    // Keep output order stable with respect to first occurrence.
    let mut rank: Vec<(usize, usize)> = first_of_group.iter().copied().enumerate().collect();
    rank.sort_by_key(|&(_, orig)| orig);
    let mut remap = vec![0; first_of_group.len()];
    for (new, &(group, orig)) in rank.iter().enumerate() {
        remap[group] = new;
        points.push(measure.points[orig].clone());
        weights.push(0.0);
    }
    for (i, slot) in index.iter_mut().enumerate() {
        *slot = remap[*slot];
        weights[*slot] += measure.weights[i];
    }
    (DiscreteMeasure { points, weights }, index)
}
