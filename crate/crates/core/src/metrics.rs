//! Evaluation metrics and the interpolated reliability map.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scenario::{Point, Scenario};

pub const DEFAULT_SUPPORT_TAU: f64 = 0.05;

/// Indices with `|x_i| > tau · max_j |x_j|`; empty for the zero vector.
pub fn support_of(x: &[f64], tau: f64) -> Vec<usize> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Vec::new();
    }
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tau * peak)
        .map(|(i, _)| i)
        .collect()
}

/// Whether the thresholded support of `x_hat` equals the exact support of
/// `x_true`.
pub fn recovery_success(x_hat: &[f64], x_true: &[f64], tau: f64) -> bool {
    x_hat.len() == x_true.len() && support_of(x_hat, tau) == crate::scenario::exact_support(x_true)
}

/// `‖x_true − x_hat‖₂ / ‖x_true‖₂`.
pub fn normalized_error(x_hat: &[f64], x_true: &[f64]) -> Result<f64> {
    if x_hat.len() != x_true.len() {
        return Err(invalid("vectors differ in length"));
    }
    let norm = x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(invalid(
            "normalized error is undefined for a zero reference",
        ));
    }
    let err = x_hat
        .iter()
        .zip(x_true)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(err / norm)
}

/// `Σ_{i ∉ support} |x_hat_i|`.
pub fn spurious_power(x_hat: &[f64], true_support: &[usize]) -> f64 {
    let mut on = vec![false; x_hat.len()];
    for &i in true_support {
        if i < on.len() {
            on[i] = true;
        }
    }
    x_hat
        .iter()
        .zip(&on)
        .filter(|(_, inside)| !**inside)
        .map(|(v, _)| v.abs())
        .sum()
}

pub fn mean_reliability(r: &[f64]) -> f64 {
    if r.is_empty() {
        return f64::NAN;
    }
    r.iter().sum::<f64>() / r.len() as f64
}

/// Raster of interpolated sensor reliabilities.
///
/// `values[row][col]` is the cell centred at
/// `x = extent[0] + (col + ½)·dx`, `y = extent[1] + (row + ½)·dy`, so row 0
/// is the southern edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<Vec<f64>>,
    /// `[x_min, y_min, x_max, y_max]`.
    pub extent: [f64; 4],
}

impl ReliabilityMap {
    /// Plain-text PGM (P2), 8-bit, `round(255·r)` per cell, northern row
    /// first.
    pub fn to_pgm(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "P2");
        let _ = writeln!(out, "{} {}", self.width, self.height);
        let _ = writeln!(out, "255");
        for row in self.values.iter().rev() {
            let line: Vec<String> = row
                .iter()
                .map(|v| ((255.0 * v).round().clamp(0.0, 255.0) as u8).to_string())
                .collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Inverse-distance-squared interpolation of the sensor reliabilities onto a
/// `resolution × resolution` raster covering the scenario area.
pub fn reliability_raster(sc: &Scenario, r: &[f64], resolution: usize) -> Result<ReliabilityMap> {
    idw_raster(
        &sc.sensor_positions,
        r,
        sc.grid.area_extent,
        sc.grid.distance_floor(),
        resolution,
    )
}

pub fn idw_raster(
    sensors: &[Point],
    r: &[f64],
    extent: f64,
    floor: f64,
    resolution: usize,
) -> Result<ReliabilityMap> {
    if resolution < 2 {
        return Err(invalid("raster resolution must be at least 2"));
    }
    if sensors.len() != r.len() || sensors.is_empty() {
        return Err(invalid("need one reliability value per sensor"));
    }
    let cell = extent / resolution as f64;
    let values = (0..resolution)
        .map(|row| {
            let cy = (row as f64 + 0.5) * cell;
            (0..resolution)
                .map(|col| {
                    let cx = (col as f64 + 0.5) * cell;
                    let mut wsum = 0.0;
                    let mut vsum = 0.0;
                    for (p, v) in sensors.iter().zip(r) {
                        let d = ((p[0] - cx).powi(2) + (p[1] - cy).powi(2))
                            .sqrt()
                            .max(floor);
                        let w = 1.0 / (d * d);
                        wsum += w;
                        vsum += w * v;
                    }
                    vsum / wsum
                })
                .collect()
        })
        .collect();
    Ok(ReliabilityMap {
        width: resolution,
        height: resolution,
        values,
        extent: [0.0, 0.0, extent, extent],
    })
}
