//! Power-spectral-density arithmetic: output spectra and equalization-error spectra.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{QeqError, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::{hermitian_part, CMatrix};
use crate::rational::RationalC;
use crate::realizability::{map_grid, NoiseSpec};
use crate::transfer::TransferMatrix;

/// Input spectrum for [`output_psd`].
#[derive(Debug, Clone)]
pub enum InputSpectrum {
    Constant(CMatrix),
    /// One matrix per grid point.
    OnGrid(Vec<CMatrix>),
}

/// A (matrix) spectrum sampled on a frequency grid, symmetrized pointwise.
#[derive(Debug, Clone)]
pub struct PsdOnGrid {
    pub omega: Vec<f64>,
    pub values: Vec<CMatrix>,
    /// Largest `‖P − P†‖/2` seen before symmetrization.
    pub max_skew: f64,
}

impl PsdOnGrid {
    /// Samples a scalar spectrum given as a rational function.
    pub fn from_scalar(p: &RationalC, grid: &FrequencyGrid) -> Result<Self> {
        let values = map_grid(grid, |w| Ok(CMatrix::from_element(1, 1, p.eval_iw(w)?)))?;
        Ok(Self::symmetrized(grid.points().to_vec(), values))
    }

    fn symmetrized(omega: Vec<f64>, raw: Vec<CMatrix>) -> Self {
        let mut max_skew: f64 = 0.0;
        let values = raw
            .into_iter()
            .map(|p| {
                let skew = (&p - p.adjoint()).scale(0.5);
                max_skew = max_skew.max(skew.iter().map(|v| v.norm()).fold(0.0, f64::max));
                hermitian_part(&p)
            })
            .collect();
        PsdOnGrid {
            omega,
            values,
            max_skew,
        }
    }

    /// Entry `(i, j)` along the grid.
    pub fn entry(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.values.iter().map(|m| m[(i, j)]).collect()
    }

    /// CSV with header `omega,re,im` for scalar spectra, or
    /// `omega,P_11_re,P_11_im,P_12_re,...` (row-major) for matrices.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let (rows, cols) = self.values.first().map(|m| m.shape()).unwrap_or((1, 1));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["omega".to_string()];
        if rows == 1 && cols == 1 {
            header.push("re".into());
            header.push("im".into());
        } else {
            for i in 0..rows {
                for j in 0..cols {
                    header.push(format!("P_{}{}_re", i + 1, j + 1));
                    header.push(format!("P_{}{}_im", i + 1, j + 1));
                }
            }
        }
        w.write_record(&header)?;
        for (om, m) in self.omega.iter().zip(&self.values) {
            let mut rec = vec![crate::io::csv_float(*om)];
            for i in 0..rows {
                for j in 0..cols {
                    rec.push(crate::io::csv_float(m[(i, j)].re));
                    rec.push(crate::io::csv_float(m[(i, j)].im));
                }
            }
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

/// `P_yy(iω) = G(iω) P_in G(iω)†` on the grid.
pub fn output_psd(
    g: &TransferMatrix,
    input: &InputSpectrum,
    grid: &FrequencyGrid,
) -> Result<PsdOnGrid> {
    let n = g.cols();
    match input {
        InputSpectrum::Constant(p) if p.shape() != (n, n) => {
            return Err(QeqError::DimensionMismatch(format!(
                "input spectrum {:?} vs {n} channel inputs",
                p.shape()
            )))
        }
        InputSpectrum::OnGrid(ps)
            if ps.len() != grid.len() || ps.iter().any(|p| p.shape() != (n, n)) =>
        {
            return Err(QeqError::DimensionMismatch(
                "per-frequency input spectra do not match the grid or channel".into(),
            ))
        }
        _ => {}
    }
    let idx: Vec<usize> = (0..grid.len()).collect();
    let points = grid.points();
    let raw: Result<Vec<CMatrix>> = {
        use rayon::prelude::*;
        idx.par_iter()
            .map(|&k| {
                let gv = g.eval_iw(points[k])?;
                let p = match input {
                    InputSpectrum::Constant(p) => p,
                    InputSpectrum::OnGrid(ps) => &ps[k],
                };
                Ok(&gv * p * gv.adjoint())
            })
            .collect()
    };
    Ok(PsdOnGrid::symmetrized(points.to_vec(), raw?))
}

/// Full equalization-error spectrum
///
/// `(H11 G11 − I)(I+Σbᵀ)(G11~ H11~ − I) + H11 G12 (I+Σwᵀ) G12~ H11~ + H12 H12~`.
pub fn error_psd_full(
    h11: &TransferMatrix,
    h12: &TransferMatrix,
    g11: &TransferMatrix,
    g12: &TransferMatrix,
    noise_b: &NoiseSpec,
    noise_w: &NoiseSpec,
) -> Result<TransferMatrix> {
    noise_b.require_no_pairing()?;
    noise_w.require_no_pairing()?;
    let p = h11.rows();
    if noise_b.dim() != g11.cols() || noise_w.dim() != g12.cols() || h12.rows() != p {
        return Err(QeqError::DimensionMismatch(
            "error spectrum blocks and noise dimensions disagree".into(),
        ));
    }
    let eye = TransferMatrix::identity(p);
    let sb = TransferMatrix::constant(&noise_b.spectrum());
    let sw = TransferMatrix::constant(&noise_w.spectrum());
    let tracking = h11.try_mul(g11)?.try_sub(&eye)?;
    let first = tracking.try_mul(&sb)?.try_mul(&tracking.para_conjugate())?;
    let noise_path = h11.try_mul(g12)?;
    let second = noise_path
        .try_mul(&sw)?
        .try_mul(&noise_path.para_conjugate())?;
    let third = h12.try_mul(&h12.para_conjugate())?;
    first.try_add(&second)?.try_add(&third)
}

/// Scalar error spectrum with `H12` eliminated through `H11 H11~ + H12 H12~ = 1`:
///
/// `(H11 G11 − 1)(1+Σb)(G11~ H11~ − 1) + H11 G12 (I+Σwᵀ) G12~ H11~ − H11 H11~ + 1`.
///
/// `g12` is the `1×k` row of auxiliary-noise paths.
pub fn error_psd_relaxed(
    h11: &RationalC,
    g11: &RationalC,
    g12: &TransferMatrix,
    noise_b: &NoiseSpec,
    noise_w: &NoiseSpec,
) -> Result<RationalC> {
    noise_b.require_no_pairing()?;
    noise_w.require_no_pairing()?;
    if noise_b.dim() != 1 || g12.rows() != 1 || g12.cols() != noise_w.dim() {
        return Err(QeqError::DimensionMismatch(
            "relaxed error spectrum is scalar: 1x1 message noise and a 1xk noise row".into(),
        ));
    }
    let sb = noise_b.spectrum()[(0, 0)];
    let sw = TransferMatrix::constant(&noise_w.spectrum());
    let tracking = &(h11 * g11) - &RationalC::one();
    let first = (&tracking * &tracking.para_conjugate()).scale(sb);
    let noise_power = g12.try_mul(&sw)?.try_mul(&g12.para_conjugate())?;
    let h_power = h11 * &h11.para_conjugate();
    let second = &h_power * noise_power.get(0, 0);
    Ok(&(&first + &second) - &(&h_power - &RationalC::one()))
}

/// The relaxed scalar spectrum evaluated directly from frequency-response values.
pub fn relaxed_psd_value(
    h11: Complex64,
    g11: Complex64,
    g12: &[Complex64],
    sigma_b: f64,
    noise_w: &CMatrix,
) -> f64 {
    let k = g12.len();
    let row = CMatrix::from_row_slice(1, k, g12);
    let spectrum = CMatrix::identity(k, k) + noise_w.transpose();
    let noise_power = (&row * spectrum * row.adjoint())[(0, 0)].re;
    let h2 = h11.norm_sqr();
    (1.0 + sigma_b) * (h11 * g11 - 1.0).norm_sqr() + h2 * noise_power - h2 + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cmat_from_real;

    fn beam_splitter(eta: f64) -> TransferMatrix {
        let (a, b) = (eta.sqrt(), (1.0 - eta).sqrt());
        TransferMatrix::constant(&cmat_from_real(2, 2, &[a, b, -b, a]))
    }

    #[test]
    fn identity_channel_output() {
        let grid = FrequencyGrid::static_default();
        let p = output_psd(
            &TransferMatrix::identity(2),
            &InputSpectrum::Constant(CMatrix::identity(2, 2)),
            &grid,
        )
        .unwrap();
        for v in &p.values {
            assert!((v - CMatrix::identity(2, 2)).norm() < 1e-15);
        }
    }

    #[test]
    fn beam_splitter_output_mixes_spectra() {
        let (eta, sw) = (0.3, 1.7);
        let grid = FrequencyGrid::static_default();
        let input = InputSpectrum::Constant(cmat_from_real(2, 2, &[1.0, 0.0, 0.0, 1.0 + sw]));
        let p = output_psd(&beam_splitter(eta), &input, &grid).unwrap();
        let expect = eta + (1.0 - eta) * (1.0 + sw);
        assert!((p.values[3][(0, 0)].re - expect).abs() < 1e-14);
    }

    #[test]
    fn output_psd_dimension_check() {
        let grid = FrequencyGrid::static_default();
        let r = output_psd(
            &TransferMatrix::identity(2),
            &InputSpectrum::Constant(CMatrix::identity(3, 3)),
            &grid,
        );
        assert!(matches!(r, Err(QeqError::DimensionMismatch(_))));
    }

    #[test]
    fn perfect_channel_perfect_filter_has_zero_error() {
        let one = TransferMatrix::identity(1);
        let zero = TransferMatrix::scalar(RationalC::zero());
        let p = error_psd_full(
            &one,
            &zero,
            &one,
            &zero,
            &NoiseSpec::vacuum(1),
            &NoiseSpec::thermal(&[3.0]).unwrap(),
        )
        .unwrap();
        assert!(p.get(0, 0).is_zero());
    }

    #[test]
    fn unit_filter_on_beam_splitter() {
        let (eta, sw): (f64, f64) = (0.5, 2.0);
        let g11 = TransferMatrix::scalar(RationalC::real(eta.sqrt()));
        let g12 = TransferMatrix::scalar(RationalC::real((1.0 - eta).sqrt()));
        let noise_w = NoiseSpec::thermal(&[sw]).unwrap();
        let full = error_psd_full(
            &TransferMatrix::identity(1),
            &TransferMatrix::scalar(RationalC::zero()),
            &g11,
            &g12,
            &NoiseSpec::vacuum(1),
            &noise_w,
        )
        .unwrap();
        let expect = (eta.sqrt() - 1.0).powi(2) + (1.0 - eta) * (1.0 + sw);
        let v = full.get(0, 0).eval_iw(0.0).unwrap();
        assert!((v.re - expect).abs() < 1e-14);
        assert!((expect - 1.585786437626905).abs() < 1e-12);
        let relaxed = error_psd_relaxed(
            &RationalC::one(),
            g11.get(0, 0),
            &g12,
            &NoiseSpec::vacuum(1),
            &noise_w,
        )
        .unwrap();
        assert!((relaxed.eval_iw(0.0).unwrap().re - expect).abs() < 1e-14);
    }

    #[test]
    fn zero_filter_gives_two() {
        let g12 = TransferMatrix::scalar(RationalC::real(0.6));
        let p = error_psd_relaxed(
            &RationalC::zero(),
            &RationalC::real(0.8),
            &g12,
            &NoiseSpec::vacuum(1),
            &NoiseSpec::thermal(&[2.0]).unwrap(),
        )
        .unwrap();
        assert!((p.eval_iw(1.0).unwrap() - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pairing_rejected() {
        let sq = NoiseSpec::new(
            CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
            CMatrix::from_element(1, 1, Complex64::new(0.5, 0.0)),
            "squeezed",
        )
        .unwrap();
        let one = TransferMatrix::identity(1);
        let r = error_psd_full(&one, &one, &one, &one, &NoiseSpec::vacuum(1), &sq);
        assert_eq!(r.unwrap_err(), QeqError::PairingUnsupported);
        let r = error_psd_relaxed(
            &RationalC::one(),
            &RationalC::one(),
            &one,
            &sq,
            &NoiseSpec::vacuum(1),
        );
        assert_eq!(r.unwrap_err(), QeqError::PairingUnsupported);
    }

    #[test]
    fn scalar_csv_header() {
        let grid = FrequencyGrid::linear(-1.0, 1.0, 3).unwrap();
        let p = PsdOnGrid::from_scalar(&RationalC::real(1.5), &grid).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("omega,re,im\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
