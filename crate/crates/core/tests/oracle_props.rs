mod common;

use std::f64::consts::PI;

use common::reference_cavity;
use proptest::prelude::*;
use qeq_core::design::*;
use qeq_core::oracle::*;
use qeq_core::psd::error_psd_full;
use qeq_core::realizability::NoiseSpec;
use qeq_core::{linalg, FrequencyGrid, QeqError, RationalC, StateSpaceModel, TransferMatrix};

fn bs_closed_form(eta: f64, sigma_w2: f64) -> f64 {
    let noise = (1.0 - eta) * sigma_w2;
    if sigma_w2 <= eta.sqrt() / (1.0 - eta) {
        noise - 2.0 * eta.sqrt() + 2.0
    } else {
        2.0 - eta / noise
    }
}

fn cavity_oracle(ch: &CavityChannel, grid: &FrequencyGrid) -> WienerOracle {
    let b = cavity_channel(ch).unwrap();
    wiener_filter_by_factorization(&b.g11, &b.g12, 0.0, &ch.noise().unwrap(), grid).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn disk_search_matches_closed_form(eta in 0.02f64..0.98, sigma_w2 in 0.0f64..8.0) {
        let q = QuadraticObjective::new((1.0 - eta) * sigma_w2, eta.sqrt().into(), 2.0).unwrap();
        let grid = FrequencyGrid::linear(0.0, 0.0, 1).unwrap();
        let r = disk_minimize_pointwise(|_| Ok(q), &grid, DiskResolution::default()).unwrap();
        prop_assert!((r.p_star[0] - bs_closed_form(eta, sigma_w2)).abs() <= 1e-6);
        prop_assert!(r.h[0].norm() <= 1.0);
        prop_assert!(r.p_star[0] <= 2.0);
        prop_assert!(r.max_grid_gap >= -1e-12 && r.max_grid_gap <= 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn factorization_is_grid_invariant(
        eta in 0.05f64..0.95, alpha in 0.05f64..0.95, beta in 0.05f64..0.95,
        gamma in 0.1f64..10.0, omega in -5.0f64..5.0, sv in 0.1f64..5.0, sw in 0.01f64..5.0,
    ) {
        let ch = CavityChannel::new(eta, alpha, beta, gamma, omega, sv, sw).unwrap();
        let grid = ch.grid(401).unwrap();
        let coarse = cavity_oracle(&ch, &grid).factorization;
        let fine = cavity_oracle(&ch, &grid.refined()).factorization;
        for &w in grid.points() {
            let (a, b) = (coarse.factor.eval_iw(w).unwrap(), fine.factor.eval_iw(w).unwrap());
            prop_assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()));
        }
        // Matches the closed-form factor in pole, zero and gain.
        let m = spectral_factor_m(&ch).unwrap().zpk().unwrap();
        let f = fine.factor.zpk().unwrap();
        prop_assert!((m.poles[0] - f.poles[0]).norm() <= 1e-8 * (1.0 + m.poles[0].norm()));
        prop_assert!((m.zeros[0] - f.zeros[0]).norm() <= 1e-8 * (1.0 + m.zeros[0].norm()));
        prop_assert!((m.gain.norm() - f.gain.norm()).abs() <= 1e-8 * m.gain.norm());
    }

    #[test]
    fn disk_minimum_bounds_every_design(
        eta in 0.05f64..0.95, alpha in 0.05f64..0.95, beta in 0.05f64..0.95,
        gamma in 0.1f64..10.0, omega in -5.0f64..5.0, sv in 0.1f64..5.0, sw in 0.0f64..5.0,
    ) {
        let ch = CavityChannel::new(eta, alpha, beta, gamma, omega, sv, sw).unwrap();
        let grid = ch.grid(201).unwrap();
        let Ok(report) = assemble_cavity_equalizer_on(&ch, &grid) else {
            return Ok(());
        };
        let b = cavity_channel(&ch).unwrap();
        let noise = ch.noise().unwrap();
        let objective = relaxed_objective(&b.g11, &b.g12, 0.0, &noise).unwrap();
        let disk = disk_minimize_pointwise(objective, &grid, DiskResolution { radial: 0.05, angular: 0.1 }).unwrap();
        let full = error_psd_full(
            &TransferMatrix::scalar(report.blocks.h11.clone()),
            &TransferMatrix::scalar(report.blocks.h12.clone()),
            &TransferMatrix::scalar(b.g11.clone()),
            &b.g12,
            &NoiseSpec::vacuum(1),
            &noise,
        ).unwrap();
        for (k, &w) in grid.points().iter().enumerate() {
            prop_assert!(disk.p_star[k] <= full.get(0, 0).eval_iw(w).unwrap().re + 1e-9);
        }
    }

    #[test]
    fn quadrature_is_additive(a in -30.0f64..0.0, mid in 0.0f64..1.0, width in 0.1f64..40.0) {
        let report = assemble_cavity_equalizer(&reference_cavity()).unwrap();
        let p = &report.optimal_error_psd;
        let (lo, hi) = (a, a + width);
        let m = lo + mid * width;
        let whole = band_mse(p, lo, hi).unwrap();
        let parts = band_mse(p, lo, m).unwrap() + band_mse(p, m, hi).unwrap();
        prop_assert!((whole - parts).abs() <= 2e-9);
    }
}

#[test]
fn band_mse_examples() {
    assert!((band_mse(&RationalC::real(2.0), -1.0, 1.0).unwrap() - 4.0 / (2.0 * PI)).abs() < 1e-14);
    assert!((band_mse(&RationalC::real(1.5), -1.0, 1.0).unwrap() - 3.0 / (2.0 * PI)).abs() < 1e-14);
    let ch = reference_cavity();
    let report = assemble_cavity_equalizer(&ch).unwrap();
    let band = [-ch.omega - 10.0 * ch.gamma, -ch.omega + 10.0 * ch.gamma];
    let gain = band_mse(&report.unequalized_error_psd, band[0], band[1]).unwrap()
        - band_mse(&report.optimal_error_psd, band[0], band[1]).unwrap();
    assert!(gain > 0.0);
}

#[test]
fn factorization_of_simple_spectra() {
    let grid = FrequencyGrid::linear(-10.0, 10.0, 201).unwrap();
    let f = numerical_spectral_factorization(&RationalC::real(9.0), &grid).unwrap();
    assert!((f.factor.value_at_infinity().unwrap().re - 3.0).abs() < 1e-14);
    assert_eq!(f.gain_convention, GAIN_CONVENTION);
}

#[test]
fn beam_splitter_sweeps_bracket_threshold() {
    for (eta, threshold) in [(0.5, 2f64.sqrt()), (0.25, 2.0 / 3.0)] {
        let base = ChannelParams::BeamSplitter(BeamSplitterChannel::new(eta, 0.0, 0.0).unwrap());
        let s = threshold_sweep(&base, "sigma_w2", [0.0, 4.0], 81).unwrap();
        let onset = s.onset.unwrap();
        assert!(onset.last_non_improving <= threshold && threshold <= onset.first_improving);
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("param,value,p_unequalized,p_equalized,improved\n"));
        assert_eq!(text.lines().count(), 82);
    }
}

#[test]
fn cavity_sweep_records_infeasible_points() {
    let base = ChannelParams::Cavity(reference_cavity());
    let s = threshold_sweep(&base, "sigma_w2", [0.0, 1.0], 21).unwrap();
    // Without auxiliary noise the contraction threshold exceeds sigma_v2 = 2.
    assert!(s.points[0].error.as_deref().unwrap().contains("threshold"));
    assert!(s
        .points
        .iter()
        .filter(|p| p.value >= 0.6)
        .all(|p| p.error.is_none() && p.improved));
    assert!(threshold_sweep(&base, "kappa", [0.0, 1.0], 3).is_err());
}

fn y_u_routes(ch: &CavityChannel, rational_sigma_w2: f64) -> f64 {
    let ss = cavity_channel_state_space(ch)
        .unwrap()
        .series(&StateSpaceModel::static_gain(linalg::cmat_from_real(
            1,
            3,
            &[1.0, 0.0, 0.0],
        )))
        .unwrap();
    let inputs = NoiseSpec::thermal(&[0.0, ch.sigma_v2, ch.sigma_w2]).unwrap();
    let other = NoiseSpec::thermal(&[0.0, ch.sigma_v2, rational_sigma_w2]).unwrap();
    let row = cavity_channel(ch)
        .unwrap()
        .composed
        .block(0, 0, 1, 3)
        .unwrap();
    let p = row
        .try_mul(&TransferMatrix::constant(&other.spectrum()))
        .unwrap()
        .try_mul(&row.para_conjugate())
        .unwrap();
    psd_consistency(&ss, &inputs, p.get(0, 0), &ch.grid(2001).unwrap()).unwrap()
}

#[test]
fn psd_routes_detect_mismatched_noise() {
    let ch = reference_cavity();
    assert!(y_u_routes(&ch, ch.sigma_w2) < 1e-12);
    let delta = 0.1;
    let res = y_u_routes(&ch, ch.sigma_w2 + delta);
    assert!((res - (1.0 - ch.eta) * delta).abs() < 1e-9);
}

#[test]
fn psd_routes_static_beam_splitter() {
    let g = beam_splitter_channel(0.3).unwrap();
    let ss = StateSpaceModel::static_gain(g.eval_iw(0.0).unwrap().rows(0, 1).into_owned());
    let inputs = NoiseSpec::thermal(&[0.4, 1.7]).unwrap();
    let row = g.block(0, 0, 1, 2).unwrap();
    let p = row
        .try_mul(&TransferMatrix::constant(&inputs.spectrum()))
        .unwrap()
        .try_mul(&row.para_conjugate())
        .unwrap();
    let res = psd_consistency(&ss, &inputs, p.get(0, 0), &FrequencyGrid::static_default()).unwrap();
    assert!(res < 1e-15);
    let wrong = NoiseSpec::thermal(&[0.4]).unwrap();
    assert!(matches!(
        psd_consistency(&ss, &wrong, p.get(0, 0), &FrequencyGrid::static_default()),
        Err(QeqError::DimensionMismatch(_))
    ));
}

#[test]
fn disk_result_csv() {
    let q = QuadraticObjective::new(1.0, 0.5f64.sqrt().into(), 2.0).unwrap();
    let grid = FrequencyGrid::linear(-1.0, 1.0, 3).unwrap();
    let r = disk_minimize_pointwise(|_| Ok(q), &grid, DiskResolution::default()).unwrap();
    let mut out = Vec::new();
    r.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,h_re,h_im,p_star"));
    assert_eq!(
        lines.next(),
        Some("-1.00000000e0,7.07106781e-1,0,1.50000000e0")
    );
}
