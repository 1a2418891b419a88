use ndarray::{Array2, Axis};

use super::DataMatrix;

/// Data rescaled onto the unit cube together with the display half range.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfRange {
    /// Each column mapped affinely onto `[0, 1]`; constant columns sit at 0.5.
    pub rescaled: Array2<f64>,
    /// Largest distance of a rescaled row from the cube center, or 1 when
    /// every row coincides with the center.
    pub half_range: f64,
}

impl HalfRange {
    /// Rescaled rows shifted so the cube center is the origin.
    pub fn centered(&self) -> Array2<f64> {
        self.rescaled.mapv(|v| v - 0.5)
    }
}

pub fn compute_half_range(x: &DataMatrix) -> HalfRange {
    let mut rescaled = x.values().to_owned();
    for mut col in rescaled.axis_iter_mut(Axis(1)) {
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        if span > 0.0 {
            col.mapv_inplace(|v| (v - lo) / span);
        } else {
            col.fill(0.5);
        }
    }
    let half_range = rescaled
        .axis_iter(Axis(0))
        .map(|row| row.iter().map(|v| (v - 0.5) * (v - 0.5)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let half_range = if half_range > 0.0 { half_range } else { 1.0 };
    HalfRange {
        rescaled,
        half_range,
    }
}
