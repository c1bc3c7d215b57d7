use serde::{Deserialize, Serialize};

use crate::error::{QeqError, Result};

/// Number of linearly spaced points in the default dynamic grid.
pub const DEFAULT_LINEAR_POINTS: usize = 2001;
/// Half-width of the linear band, in units of the cavity linewidth.
pub const LINEAR_HALF_WIDTH: f64 = 50.0;
/// Logarithmic tail points added on each side of the linear band.
pub const TAIL_POINTS: usize = 100;
/// Outer edge of the logarithmic tails, in units of the cavity linewidth.
pub const TAIL_EXTENT: f64 = 1e4;

/// Strictly increasing set of real angular frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct FrequencyGrid {
    points: Vec<f64>,
    center: f64,
    description: String,
}

#[derive(Deserialize)]
struct GridRepr {
    points: Vec<f64>,
    center: f64,
    description: String,
}

impl TryFrom<GridRepr> for FrequencyGrid {
    type Error = QeqError;
    fn try_from(g: GridRepr) -> Result<Self> {
        FrequencyGrid::new(g.points, g.center, g.description)
    }
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>, center: f64, description: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(QeqError::Invalid("frequency grid is empty".into()));
        }
        if points.iter().any(|w| !w.is_finite()) || !center.is_finite() {
            return Err(QeqError::Invalid(
                "frequency grid has non-finite values".into(),
            ));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(QeqError::Invalid(
                "frequency grid is not strictly increasing".into(),
            ));
        }
        Ok(FrequencyGrid {
            points,
            center,
            description: description.into(),
        })
    }

    /// `n` evenly spaced points on `[lo, hi]`.
    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 || !(hi > lo) && n > 1 {
            return Err(QeqError::Invalid(format!(
                "invalid linear grid [{lo}, {hi}] with {n} points"
            )));
        }
        let points = if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|k| lo + step * k as f64).collect()
        };
        Self::new(
            points,
            0.5 * (lo + hi),
            format!("linear {n} points on [{lo}, {hi}]"),
        )
    }

    /// Grid for static (memoryless) problems: 11 points on [-1, 1].
    pub fn static_default() -> Self {
        Self::linear(-1.0, 1.0, 11).expect("valid static grid")
    }

    /// Linear band of `linear_points` over `center ± 50·gamma`, plus 100
    /// logarithmically spaced points per side out to `center ± 1e4·gamma`.
    pub fn cavity(center: f64, gamma: f64, linear_points: usize) -> Result<Self> {
        if !(gamma > 0.0) || !center.is_finite() || linear_points < 2 {
            return Err(QeqError::Invalid(format!(
                "cavity grid needs gamma > 0 and >= 2 points (gamma = {gamma}, points = {linear_points})"
            )));
        }
        let half = LINEAR_HALF_WIDTH * gamma;
        let step = 2.0 * half / (linear_points - 1) as f64;
        let ratio = (TAIL_EXTENT / LINEAR_HALF_WIDTH).powf(1.0 / TAIL_POINTS as f64);
        let tail: Vec<f64> = (1..=TAIL_POINTS)
            .map(|k| half * ratio.powi(k as i32))
            .collect();
        let mut points = Vec::with_capacity(linear_points + 2 * TAIL_POINTS);
        points.extend(tail.iter().rev().map(|d| center - d));
        let mid = (linear_points - 1) as f64 / 2.0;
        points.extend((0..linear_points).map(|k| center + step * (k as f64 - mid)));
        points.extend(tail.iter().map(|d| center + d));
        Self::new(
            points,
            center,
            format!(
                "linear {linear_points} points on center±{LINEAR_HALF_WIDTH}γ with {TAIL_POINTS} log tail points per side to ±{TAIL_EXTENT:e}γ (center {center}, γ {gamma})"
            ),
        )
    }

    /// Linear part only: `linear_points` over `center ± 50·gamma`.
    pub fn cavity_linear(center: f64, gamma: f64, linear_points: usize) -> Result<Self> {
        let half = LINEAR_HALF_WIDTH * gamma;
        let mut g = Self::linear(center - half, center + half, linear_points)?;
        g.center = center;
        Ok(g)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Grid with every interval bisected.
    pub fn refined(&self) -> Self {
        let mut pts = Vec::with_capacity(2 * self.points.len());
        for w in self.points.windows(2) {
            pts.push(w[0]);
            pts.push(0.5 * (w[0] + w[1]));
        }
        pts.push(*self.points.last().expect("nonempty"));
        FrequencyGrid {
            points: pts,
            center: self.center,
            description: format!("{} (bisected)", self.description),
        }
    }
}
