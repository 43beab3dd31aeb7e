//! Synthetic cognitive-radio network.
//!
//! Candidate transmitters sit at the cell centres of a square grid, sensors
//! are scattered uniformly over the same area, and the channel gain between
//! two points follows an inverse-square law with a distance floor.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::seed::rng_from_seed;

/// Rows are sensors, columns are candidate transmitter grid points.
pub type GainMatrix = DMatrix<f64>;

pub type Point = [f64; 2];

/// Distance floor as a fraction of the area side length.
pub const DISTANCE_FLOOR_FRACTION: f64 = 1e-3;

pub const DEFAULT_AREA_EXTENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub side_count: usize,
    pub area_extent: f64,
}

impl GridSpec {
    pub fn new(side_count: usize, area_extent: f64) -> Result<Self> {
        let grid = GridSpec {
            side_count,
            area_extent,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.side_count == 0 {
            return Err(invalid("grid side_count must be at least 1"));
        }
        if !(self.area_extent.is_finite() && self.area_extent > 0.0) {
            return Err(invalid("grid area_extent must be positive and finite"));
        }
        Ok(())
    }

    /// Number of candidate transmitter locations, `side_count²`.
    pub fn point_count(&self) -> usize {
        self.side_count * self.side_count
    }

    pub fn distance_floor(&self) -> f64 {
        DISTANCE_FLOOR_FRACTION * self.area_extent
    }

    /// Grid point `s` is at column `s % side`, row `s / side`, placed at the
    /// cell centre.
    pub fn point(&self, s: usize) -> Point {
        let cell = self.area_extent / self.side_count as f64;
        let col = s % self.side_count;
        let row = s / self.side_count;
        [(col as f64 + 0.5) * cell, (row as f64 + 0.5) * cell]
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.point_count()).map(|s| self.point(s)).collect()
    }
}

/// Inverse-square channel gain with the distance clamped at `floor`.
pub fn gain_with_floor(p: Point, q: Point, floor: f64) -> f64 {
    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    let d = d.max(floor);
    1.0 / (d * d)
}

/// Channel gain using the default floor for the default area extent.
pub fn gain_between(p: Point, q: Point) -> f64 {
    gain_with_floor(p, q, DISTANCE_FLOOR_FRACTION * DEFAULT_AREA_EXTENT)
}

pub fn gain_matrix(grid: &GridSpec, sensors: &[Point]) -> GainMatrix {
    let floor = grid.distance_floor();
    let points = grid.points();
    DMatrix::from_fn(sensors.len(), points.len(), |m, s| {
        gain_with_floor(sensors[m], points[s], floor)
    })
}

/// Immutable description of one simulated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub grid: GridSpec,
    pub sensor_positions: Vec<Point>,
    #[serde(with = "matrix_rows")]
    pub gain: GainMatrix,
    pub true_power: Vec<f64>,
    pub sparsity: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn sensor_count(&self) -> usize {
        self.gain.nrows()
    }

    pub fn point_count(&self) -> usize {
        self.gain.ncols()
    }

    pub fn true_support(&self) -> Vec<usize> {
        exact_support(&self.true_power)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(text)?;
        sc.grid.validate()?;
        if sc.gain.nrows() != sc.sensor_positions.len() || sc.gain.ncols() != sc.true_power.len() {
            return Err(invalid(
                "scenario gain shape disagrees with sensors or power vector",
            ));
        }
        Ok(sc)
    }
}

pub(crate) fn exact_support(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Noise deviation giving `snr_db` for the noiseless signal `a x`, or zero
/// for an all-zero power vector.
pub fn noise_std_for_snr(a: &GainMatrix, x: &[f64], snr_db: f64) -> f64 {
    if x.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let signal = a * DVector::from_column_slice(x);
    let power = signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64;
    (power / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// Draws `sparsity` distinct active grid points, each with unit power.
pub fn random_power_vector<R: Rng>(rng: &mut R, point_count: usize, sparsity: usize) -> Vec<f64> {
    let mut x = vec![0.0; point_count];
    for s in sample(rng, point_count, sparsity).into_iter() {
        x[s] = 1.0;
    }
    x
}

pub fn build_scenario(
    grid: GridSpec,
    sensor_count: usize,
    sparsity: usize,
    snr_db: f64,
    seed: u64,
) -> Result<Scenario> {
    grid.validate()?;
    if sensor_count == 0 {
        return Err(invalid("sensor_count must be at least 1"));
    }
    let n = grid.point_count();
    if sparsity > n {
        return Err(invalid(format!(
            "sparsity {sparsity} exceeds the {n} grid points"
        )));
    }
    if !snr_db.is_finite() {
        return Err(invalid("snr_db must be finite"));
    }

    let mut rng = rng_from_seed(seed);
    let extent = grid.area_extent;
    let sensor_positions: Vec<Point> = (0..sensor_count)
        .map(|_| [rng.random::<f64>() * extent, rng.random::<f64>() * extent])
        .collect();
    let true_power = random_power_vector(&mut rng, n, sparsity);
    let gain = gain_matrix(&grid, &sensor_positions);
    let noise_std = noise_std_for_snr(&gain, &true_power, snr_db);

    Ok(Scenario {
        grid,
        sensor_positions,
        gain,
        true_power,
        sparsity,
        noise_std,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub values: Vec<f64>,
    pub per_sensor_noise: Vec<f64>,
}

/// `y = A x + ν` with `ν ~ N(0, noise_std²)` i.i.d., drawn from `seed`.
pub fn measure(a: &GainMatrix, x: &[f64], noise_std: f64, seed: u64) -> MeasurementSet {
    let clean = a * DVector::from_column_slice(x);
    let per_sensor_noise: Vec<f64> = if noise_std > 0.0 {
        let mut rng = rng_from_seed(seed);
        let normal = Normal::new(0.0, noise_std).expect("noise_std is positive and finite");
        (0..a.nrows()).map(|_| normal.sample(&mut rng)).collect()
    } else {
        vec![0.0; a.nrows()]
    };
    let values = clean
        .iter()
        .zip(&per_sensor_noise)
        .map(|(s, v)| s + v)
        .collect();
    MeasurementSet {
        values,
        per_sensor_noise,
    }
}

pub fn sample_measurements(sc: &Scenario, seed: u64) -> MeasurementSet {
    measure(&sc.gain, &sc.true_power, sc.noise_std, seed)
}

/// Serializes a matrix as a list of rows.
pub(crate) mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(DMatrix::from_row_slice(nrows, ncols, &flat))
    }
}
