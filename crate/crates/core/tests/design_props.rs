mod common;

use common::{c, reference_cavity};
use proptest::prelude::*;
use qeq_core::design::*;
use qeq_core::oracle::{disk_minimize_pointwise, relaxed_objective, DiskResolution};
use qeq_core::realizability::{
    check_block_constraints, check_paraunitary, check_passive_realizability, NoiseSpec,
};
use qeq_core::{FrequencyGrid, QeqError, RationalC};

fn cavity() -> impl Strategy<Value = CavityChannel> {
    (
        (0.05f64..0.95, 0.05f64..0.95, 0.05f64..0.95),
        (0.1f64..10.0, -5.0f64..5.0),
        (0.1f64..5.0, 0.0f64..5.0),
    )
        .prop_map(|((eta, alpha, beta), (gamma, omega), (sv, sw))| {
            CavityChannel::new(eta, alpha, beta, gamma, omega, sv, sw).unwrap()
        })
}

fn shipped_h11(ch: &CavityChannel) -> RationalC {
    q_causal_part(ch)
        .unwrap()
        .scale_real(ch.eta.sqrt())
        .try_div(&spectral_factor_m(ch).unwrap())
        .unwrap()
}

fn max_abs_sq(h: &RationalC, grid: &FrequencyGrid) -> f64 {
    grid.points()
        .iter()
        .map(|&w| h.eval_iw(w).unwrap().norm_sqr())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rho_is_at_least_one(ch in cavity()) {
        let (zeta, rho) = zeta_rho(&ch).unwrap();
        prop_assert!(zeta >= 0.0);
        prop_assert!(rho >= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn spectral_factor_identity(ch in cavity()) {
        let m = spectral_factor_m(&ch).unwrap();
        let gbar = cavity_channel(&ch).unwrap().gbar;
        for &w in ch.grid(2001).unwrap().points() {
            let target = ch.eta * ch.sigma_v2 * gbar.get(0, 1).eval_iw(w).unwrap().norm_sqr()
                + (1.0 - ch.eta) * ch.sigma_w2;
            prop_assert!((m.eval_iw(w).unwrap().norm_sqr() - target).abs() <= 1e-10);
        }
        let zpk = m.zpk().unwrap();
        prop_assert!(zpk.poles.iter().chain(&zpk.zeros).all(|r| r.re <= 0.0));
    }

    #[test]
    fn contraction_matches_realness(ch in cavity()) {
        let (_, rho) = zeta_rho(&ch).unwrap();
        prop_assume!(rho - 1.0 > 1e-9);
        let h11 = shipped_h11(&ch);
        let peak = max_abs_sq(&h11, &ch.grid(2001).unwrap());
        let threshold = cavity_threshold(&ch).unwrap();
        let margin = threshold.direct_margin.unwrap();
        if threshold.satisfied {
            prop_assert!(peak <= 1.0 + 1e-9, "peak {}", peak);
        }
        match completion_constants(&ch) {
            Ok(k) => prop_assert!(k.margin >= -1e-12 && peak <= 1.0 + 1e-9),
            Err(QeqError::RealnessViolation { .. }) => prop_assert!(peak > 1.0),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
        // The threshold and the direct test agree away from the boundary.
        if margin.abs() > 1e-9 {
            prop_assert_eq!(threshold.satisfied, margin > 0.0);
        }
    }

    #[test]
    fn assembled_blocks_satisfy_constraints(ch in cavity()) {
        let grid = ch.grid(401).unwrap();
        match assemble_cavity_equalizer_on(&ch, &grid) {
            Ok(r) => {
                let b = &r.blocks;
                let blocks = check_block_constraints(&b.h11, &b.h12, &b.h21, &b.h22, &grid, 1e-9).unwrap();
                prop_assert!(blocks.passed, "{:?}", blocks.failures());
                prop_assert!(r.residuals.paraunitarity.max_residual <= 1e-9);
                prop_assert!(r.residuals.contraction_margin >= -1e-9);
                let ss = cavity_equalizer_state_space(b).unwrap();
                prop_assert!(check_passive_realizability(&ss, 1e-9).passed);
            }
            Err(QeqError::ThresholdUnsatisfied { .. }) => {
                prop_assert!(!cavity_threshold(&ch).unwrap().satisfied);
            }
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn beam_splitter_matches_disk_search(eta in 0.02f64..0.98, sigma_w2 in 0.0f64..6.0) {
        let ch = BeamSplitterChannel::new(eta, sigma_w2, 0.0).unwrap();
        let report = design_beam_splitter_equalizer(&ch).unwrap();
        let g = beam_splitter_channel(eta).unwrap();
        let noise = NoiseSpec::thermal(&[sigma_w2]).unwrap();
        let row = g.block(0, 1, 1, 1).unwrap();
        let objective = relaxed_objective(g.get(0, 0), &row, 0.0, &noise).unwrap();
        let grid = FrequencyGrid::linear(0.0, 0.0, 1).unwrap();
        let disk = disk_minimize_pointwise(objective, &grid, DiskResolution::default()).unwrap();
        prop_assert!((disk.p_star[0] - report.optimal_error_constant.unwrap()).abs() <= 1e-6);
        let pu = check_paraunitary(&report.blocks.to_matrix(), &FrequencyGrid::static_default(), 1e-12).unwrap();
        prop_assert!(pu.passed);
        prop_assert!(report.residuals.block_constraints.max() <= 1e-12);
    }
}

#[test]
fn beam_splitter_branches_meet_at_threshold() {
    for k in 1..=20 {
        let eta = k as f64 / 21.0;
        let t = beam_splitter_threshold(eta).unwrap();
        let noise = t * (1.0 - eta);
        let first = noise - 2.0 * eta.sqrt() + 2.0;
        let second = 2.0 - eta / noise;
        assert!((first - second).abs() <= 1e-12, "eta {eta}");
        assert!((eta.sqrt() / noise - 1.0).abs() <= 1e-12);
        let r = design_beam_splitter_equalizer(&BeamSplitterChannel::new(eta, t, 0.0).unwrap())
            .unwrap();
        assert_eq!(r.blocks, EqualizerBlocks::identity());
    }
}

#[test]
fn beam_splitter_thresholds() {
    assert!((beam_splitter_threshold(0.5).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert!((beam_splitter_threshold(0.25).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!(beam_splitter_threshold(0.9).unwrap() > beam_splitter_threshold(0.5).unwrap());
    assert!(matches!(
        beam_splitter_threshold(0.0),
        Err(QeqError::Domain { .. })
    ));
    let r =
        design_beam_splitter_equalizer(&BeamSplitterChannel::new(0.9, 0.0, 0.0).unwrap()).unwrap();
    assert!((r.optimal_error_constant.unwrap() - (2.0 - 2.0 * 0.9f64.sqrt())).abs() < 1e-12);
}

#[test]
fn channel_is_paraunitary() {
    let ch = reference_cavity();
    let grid = ch.grid(2001).unwrap();
    let blocks = cavity_channel(&ch).unwrap();
    assert!(check_paraunitary(&blocks.gbar, &grid, 1e-9).unwrap().passed);
    assert!(
        check_paraunitary(&blocks.composed, &grid, 1e-9)
            .unwrap()
            .passed
    );
    let ss = cavity_channel_state_space(&ch).unwrap();
    assert!(check_passive_realizability(&ss, 1e-12).passed);
    for &w in grid.points().iter().step_by(37) {
        let a = ss.eval_iw(w).unwrap();
        let b = blocks.composed.eval_iw(w).unwrap();
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn reference_thresholds() {
    let ch = reference_cavity();
    let t = cavity_threshold(&ch).unwrap();
    assert!((t.sufficient_sigma_w_threshold - 0.8368632931834692).abs() < 1e-12);
    assert!(!t.sufficient_sigma_w && t.rhs_negative);
    let ch = CavityChannel {
        sigma_w2: 1.0,
        ..ch
    };
    let t = cavity_threshold(&ch).unwrap();
    assert!(t.sufficient_sigma_w && t.rhs_negative && t.rhs.unwrap() < 0.0);
}

#[test]
fn symmetric_couplers_use_the_limit() {
    let base = CavityChannel::new(0.5, 0.6, 0.6, 2.0, 0.0, 1.0, 0.3).unwrap();
    let at = cavity_threshold(&base).unwrap();
    let near = cavity_threshold(&CavityChannel {
        beta: 0.6 + 1e-5,
        ..base
    })
    .unwrap();
    assert!(at.degenerate && !near.degenerate);
    assert!((at.rhs.unwrap() - near.rhs.unwrap()).abs() < 1e-3);
}

#[test]
fn zeta_rho_edge_cases() {
    let ch = CavityChannel::new(0.5, 0.7, 0.7, 2.0, 0.0, 1.0, 0.0).unwrap();
    assert_eq!(zeta_rho(&ch).unwrap(), (0.0, 1.0));
    let silent = CavityChannel {
        sigma_v2: 0.0,
        ..ch
    };
    assert_eq!(zeta_rho(&silent), Err(QeqError::DegenerateNoise));
    let noisy = CavityChannel {
        sigma_w2: 0.5,
        ..silent
    };
    assert!(matches!(zeta_rho(&noisy), Err(QeqError::Domain { .. })));
    assert!(matches!(
        wiener_h11(&ch),
        Err(QeqError::BoundaryPole { .. })
    ));
}

#[test]
fn balanced_couplers_give_zero_gain() {
    let ch = CavityChannel::new(0.5, 0.5, 0.5, 2.0, 0.4, 2.0, 0.6).unwrap();
    let report = assemble_cavity_equalizer(&ch).unwrap();
    assert!(report.blocks.h11.is_zero());
    let q_plus = q_causal_part(&ch).unwrap();
    assert!(q_plus.value_at_infinity().unwrap().norm() < 1e-15);
}

#[test]
fn reference_design() {
    let ch = reference_cavity();
    let report = assemble_cavity_equalizer(&ch).unwrap();
    let k = report.intermediates.as_ref().unwrap();
    assert!((k.alpha12 - (1.0 - k.alpha11 * k.alpha11).sqrt()).abs() < 1e-15);
    assert!((k.beta12 - 0.4918550642499293).abs() < 1e-12);
    let peak = max_abs_sq(&report.blocks.h11, &ch.grid(2001).unwrap()).sqrt();
    assert!((peak - 0.4618458347429426).abs() < 1e-12);
    assert!((report.blocks.h11.eval(c(-1.0, 0.0)).unwrap()).norm() < 1e-12);
    let inf = |r: &RationalC| r.value_at_infinity().unwrap().re;
    let b = &report.blocks;
    assert!((inf(&b.h11) - k.alpha11).abs() < 1e-12 && (inf(&b.h22) - k.alpha11).abs() < 1e-12);
    assert!((inf(&b.h12) - k.alpha12).abs() < 1e-12 && (inf(&b.h21) + k.alpha12).abs() < 1e-12);
    let adj = report.adjudication.as_ref().unwrap();
    assert!(adj.oracle_matches_completion && !adj.oracle_matches_prefactor);
    assert!((adj.explicit_prefactor - 0.17743964376452084).abs() < 1e-12);
    assert!(adj.q_cross_check_residual < 1e-9);
}

#[test]
fn equalizer_dominates_identity_pointwise() {
    let ch = reference_cavity();
    let report = assemble_cavity_equalizer(&ch).unwrap();
    let grid = ch.grid(2001).unwrap();
    let at = |w: f64| {
        (
            report.optimal_error_psd.eval_iw(w).unwrap().re,
            report.unequalized_error_psd.eval_iw(w).unwrap().re,
        )
    };
    for &w in grid.points() {
        let (eq, uneq) = at(w);
        assert!(eq <= uneq + 1e-12);
    }
    // The optimal error spectrum peaks at resonance, and the gain over H = I is
    // larger there than far off resonance.
    let (eq0, uneq0) = at(0.0);
    let (eq_far, uneq_far) = at(1e4);
    assert!(eq0 > eq_far);
    assert!(uneq0 - eq0 > uneq_far - eq_far);
}

#[test]
fn infeasible_without_auxiliary_noise() {
    let ch = CavityChannel {
        sigma_w2: 0.0,
        ..reference_cavity()
    };
    assert!(matches!(
        assemble_cavity_equalizer(&ch),
        Err(QeqError::ThresholdUnsatisfied { .. })
    ));
}

#[test]
fn message_noise_is_unsupported() {
    let ch = BeamSplitterChannel::new(0.5, 2.0, 0.3).unwrap();
    assert!(matches!(
        design_beam_splitter_equalizer(&ch),
        Err(QeqError::UnsupportedNoise(_))
    ));
}

#[test]
fn report_json_round_trip() {
    let report = assemble_cavity_equalizer(&reference_cavity()).unwrap();
    let json = qeq_core::io::to_json_string(&report).unwrap();
    assert!(json.contains("\"schema\": \"qeq-report/1\""));
    let back: DesignReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}
