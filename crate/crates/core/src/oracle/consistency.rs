use crate::error::{QeqError, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::CMatrix;
use crate::rational::RationalC;
use crate::realizability::{map_grid, NoiseSpec};
use crate::statespace::StateSpaceModel;

/// `max |P_ss(iω) − P_rational(iω)|` where `P_ss = T (I + Σᵀ) T†` is evaluated
/// from the single-output state-space model `T`.
pub fn psd_consistency(
    ss: &StateSpaceModel,
    inputs: &NoiseSpec,
    rational: &RationalC,
    grid: &FrequencyGrid,
) -> Result<f64> {
    inputs.require_no_pairing()?;
    if ss.outputs() != 1 || ss.inputs() != inputs.dim() {
        return Err(QeqError::DimensionMismatch(format!(
            "state-space route has {} outputs and {} inputs; expected 1 output and {} inputs",
            ss.outputs(),
            ss.inputs(),
            inputs.dim()
        )));
    }
    let spectrum = inputs.spectrum();
    let d = map_grid(grid, |w| {
        let t = ss.eval_iw(w)?;
        let p = (&t * &spectrum * t.adjoint())[(0, 0)];
        Ok((p - rational.eval_iw(w)?).norm())
    })?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

/// Error model `û − u` of a channel followed by a 2×2 equalizer.
///
/// The channel's first input is the message `u` and its first output feeds the
/// equalizer; the equalizer's second input is a fresh vacuum port appended as
/// the last input of the returned model.
pub fn equalized_error_state_space(
    channel: &StateSpaceModel,
    equalizer: &StateSpaceModel,
) -> Result<StateSpaceModel> {
    if equalizer.inputs() != 2 || equalizer.outputs() != 2 {
        return Err(QeqError::DimensionMismatch("equalizer must be 2x2".into()));
    }
    let extended = channel.direct_sum(&StateSpaceModel::static_gain(CMatrix::identity(1, 1)));
    let outs = extended.outputs();
    let mut select = CMatrix::zeros(2, outs);
    select[(0, 0)] = 1.0.into();
    select[(1, outs - 1)] = 1.0.into();
    let mut first = CMatrix::zeros(1, 2);
    first[(0, 0)] = 1.0.into();
    let cascade = extended
        .series(&StateSpaceModel::static_gain(select))?
        .series(equalizer)?
        .series(&StateSpaceModel::static_gain(first))?;
    let mut d = cascade.d().clone();
    d[(0, 0)] -= 1.0;
    StateSpaceModel::new(
        cascade.a().clone(),
        cascade.b().clone(),
        cascade.c().clone(),
        d,
    )
}
