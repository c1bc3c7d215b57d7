use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QeqError, Result};
use crate::grid::FrequencyGrid;
use crate::io::csv_float;
use crate::psd::relaxed_psd_value;
use crate::rational::RationalC;
use crate::realizability::{map_grid, NoiseSpec};
use crate::transfer::TransferMatrix;

/// `P(h) = c2|h|² − 2 Re(conj(c1)·h) + c0` with real `c2`, `c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticObjective {
    pub c2: f64,
    pub c1: Complex64,
    pub c0: f64,
}

const STRUCTURE_TOL: f64 = 1e-9;

impl QuadraticObjective {
    pub fn new(c2: f64, c1: Complex64, c0: f64) -> Result<Self> {
        if !(c2.is_finite() && c1.is_finite() && c0.is_finite()) {
            return Err(QeqError::NonQuadraticObjective(
                "non-finite coefficient".into(),
            ));
        }
        Ok(QuadraticObjective { c2, c1, c0 })
    }

    /// Recovers the coefficients from evaluations of `f` and checks that `f`
    /// really is such a quadratic.
    pub fn from_samples(f: impl Fn(Complex64) -> f64) -> Result<Self> {
        let at = |re, im| f(Complex64::new(re, im));
        let c0 = at(0.0, 0.0);
        let (p1, m1, pi, mi) = (at(1.0, 0.0), at(-1.0, 0.0), at(0.0, 1.0), at(0.0, -1.0));
        let c2 = 0.5 * (p1 + m1) - c0;
        let c1 = Complex64::new(0.25 * (m1 - p1), 0.25 * (mi - pi));
        let q = Self::new(c2, c1, c0)?;
        let scale = c2.abs() + c1.norm() + c0.abs() + 1.0;
        for h in [
            Complex64::new(0.3, 0.4),
            Complex64::new(-0.7, 0.2),
            Complex64::new(1.5, -2.0),
        ] {
            let (direct, model) = (f(h), q.eval(h));
            if (direct - model).abs() > STRUCTURE_TOL * scale * (1.0 + h.norm_sqr()) {
                return Err(QeqError::NonQuadraticObjective(format!(
                    "sample at h = {h} is {direct}, the quadratic fit gives {model}"
                )));
            }
        }
        Ok(q)
    }

    pub fn eval(&self, h: Complex64) -> f64 {
        self.c2 * h.norm_sqr() - 2.0 * (self.c1.conj() * h).re + self.c0
    }

    /// Exact minimizer over the closed unit disk.
    pub fn minimize(&self) -> (Complex64, f64) {
        let m = self.c1.norm();
        let phase = if m > 0.0 {
            self.c1 / m
        } else {
            Complex64::new(1.0, 0.0)
        };
        let r = if self.c2 > 0.0 {
            (m / self.c2).min(1.0)
        } else if m > 0.0 || self.c2 < 0.0 {
            1.0
        } else {
            0.0
        };
        let h = phase * r;
        (h, self.eval(h))
    }
}

/// Step sizes of the confirming polar search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskResolution {
    pub radial: f64,
    pub angular: f64,
}

impl Default for DiskResolution {
    fn default() -> Self {
        DiskResolution {
            radial: 1e-3,
            angular: 2.0 * PI / 720.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskSearchResult {
    pub omega: Vec<f64>,
    pub h: Vec<Complex64>,
    pub p_star: Vec<f64>,
    /// Best value found by the polar search at each frequency.
    pub grid_p_star: Vec<f64>,
    /// `max(grid_p_star − p_star)`; small and nonnegative when the two agree.
    pub max_grid_gap: f64,
    pub resolution: DiskResolution,
    pub refinement_iterations: usize,
}

impl DiskSearchResult {
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega", "h_re", "h_im", "p_star"])?;
        for ((om, h), p) in self.omega.iter().zip(&self.h).zip(&self.p_star) {
            w.write_record([
                csv_float(*om),
                csv_float(h.re),
                csv_float(h.im),
                csv_float(*p),
            ])?;
        }
        w.flush()
    }
}

const COARSE_RADII: usize = 20;
const COARSE_ANGLES: usize = 72;

/// Coarse polar scan followed by local refinement until the steps reach `res`.
fn polar_search(q: &QuadraticObjective, res: DiskResolution) -> (f64, usize) {
    let polar = |r: f64, t: f64| q.eval(Complex64::from_polar(r.clamp(0.0, 1.0), t));
    let (mut dr, mut dt) = (1.0 / COARSE_RADII as f64, 2.0 * PI / COARSE_ANGLES as f64);
    let (mut br, mut bt, mut best) = (0.0, 0.0, q.c0);
    for i in 0..=COARSE_RADII {
        for j in 0..COARSE_ANGLES {
            let (r, t) = (i as f64 * dr, j as f64 * dt);
            let v = polar(r, t);
            if v < best {
                (br, bt, best) = (r, t, v);
            }
        }
    }
    let mut iterations = 0;
    while dr > res.radial || dt > res.angular {
        dr = (dr * 0.5).max(res.radial);
        dt = (dt * 0.5).max(res.angular);
        iterations += 1;
        // Walk downhill on the current lattice before shrinking it again.
        loop {
            let mut moved = false;
            for (a, b) in [
                (-1.0, 0.0),
                (1.0, 0.0),
                (0.0, -1.0),
                (0.0, 1.0),
                (-1.0, -1.0),
                (1.0, 1.0),
                (-1.0, 1.0),
                (1.0, -1.0),
            ] {
                let (r, t) = ((br + a * dr).clamp(0.0, 1.0), bt + b * dt);
                let v = polar(r, t);
                if v < best - 1e-15 {
                    (br, bt, best) = (r, t, v);
                    moved = true;
                }
            }
            if !moved {
                break;
            }
        }
    }
    (best, iterations)
}

/// Pointwise minimization of a quadratic objective over `|h| ≤ 1`.
///
/// The reported optimum is the exact quadratic-program solution; the polar
/// search only confirms it.
pub fn disk_minimize_pointwise<F>(
    objective: F,
    grid: &FrequencyGrid,
    resolution: DiskResolution,
) -> Result<DiskSearchResult>
where
    F: Fn(f64) -> Result<QuadraticObjective> + Sync,
{
    if !(resolution.radial > 0.0 && resolution.angular > 0.0) {
        return Err(QeqError::Invalid(
            "search resolution must be positive".into(),
        ));
    }
    let rows = map_grid(grid, |w| {
        let q = objective(w)?;
        let (h, p) = q.minimize();
        let (g, it) = polar_search(&q, resolution);
        Ok((h, p, g, it))
    })?;
    let mut out = DiskSearchResult {
        omega: grid.points().to_vec(),
        h: Vec::with_capacity(rows.len()),
        p_star: Vec::with_capacity(rows.len()),
        grid_p_star: Vec::with_capacity(rows.len()),
        max_grid_gap: 0.0,
        resolution,
        refinement_iterations: 0,
    };
    for (h, p, g, it) in rows {
        out.h.push(h);
        out.p_star.push(p);
        out.grid_p_star.push(g);
        out.max_grid_gap = out.max_grid_gap.max(g - p);
        out.refinement_iterations = out.refinement_iterations.max(it);
    }
    Ok(out)
}

/// Per-frequency objective of the relaxed error spectrum for a channel given
/// by its message path `g11` and 1×k noise row `g12`.
pub fn relaxed_objective<'a>(
    g11: &'a RationalC,
    g12: &'a TransferMatrix,
    sigma_b: f64,
    noise_w: &'a NoiseSpec,
) -> Result<impl Fn(f64) -> Result<QuadraticObjective> + Sync + 'a> {
    noise_w.require_no_pairing()?;
    if g12.rows() != 1 || g12.cols() != noise_w.dim() {
        return Err(QeqError::DimensionMismatch(
            "noise row and noise covariance disagree".into(),
        ));
    }
    Ok(move |w: f64| {
        let a = g11.eval_iw(w)?;
        let row = g12.eval_iw(w)?;
        let row: Vec<Complex64> = row.iter().copied().collect();
        QuadraticObjective::from_samples(|h| {
            relaxed_psd_value(h, a, &row, sigma_b, noise_w.sigma())
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_and_boundary() {
        let q = QuadraticObjective::new(1.0, Complex64::new(0.5f64.sqrt(), 0.0), 2.0).unwrap();
        let (h, p) = q.minimize();
        assert!((h.re - 0.5f64.sqrt()).abs() < 1e-15 && (p - 1.5).abs() < 1e-15);
        let q = QuadraticObjective::new(0.5, Complex64::new(0.5f64.sqrt(), 0.0), 2.0).unwrap();
        let (h, p) = q.minimize();
        assert!((h.re - 1.0).abs() < 1e-15);
        assert!((p - (2.5 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn uncorrelated_case() {
        let q = QuadraticObjective::new(0.7, Complex64::new(0.0, 0.0), 2.0).unwrap();
        assert_eq!(q.minimize(), (Complex64::new(0.0, 0.0), 2.0));
    }

    #[test]
    fn rejects_non_quadratic() {
        let r = QuadraticObjective::from_samples(|h| h.norm().powi(4));
        assert!(matches!(r, Err(QeqError::NonQuadraticObjective(_))));
    }

    #[test]
    fn polar_search_confirms() {
        let q = QuadraticObjective::new(-0.3, Complex64::new(0.2, -0.4), 1.0).unwrap();
        let (_, p) = q.minimize();
        let (g, _) = polar_search(&q, DiskResolution::default());
        assert!(g >= p - 1e-12 && g - p < 1e-5);
    }
}
