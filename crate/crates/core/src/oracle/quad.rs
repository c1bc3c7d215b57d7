use std::f64::consts::PI;

use crate::error::{QeqError, Result};
use crate::rational::RationalC;

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss weights.
const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Absolute error target per unit of band width.
const TOL_PER_WIDTH: f64 = 1e-12;
const MAX_DEPTH: usize = 60;

fn gauss_kronrod<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c)?;
    let mut kronrod = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * XK[i])? + f(c + h * XK[i])?;
        kronrod += WK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Ok((kronrod * h, ((kronrod - gauss) * h).abs()))
}

fn adaptive<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
    whole: (f64, f64),
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let (value, err) = whole;
    if err <= tol {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(QeqError::QuadratureFailure {
            lo: a,
            hi: b,
            error: err,
        });
    }
    let m = 0.5 * (a + b);
    let left = gauss_kronrod(f, a, m)?;
    let right = gauss_kronrod(f, m, b)?;
    Ok(adaptive(f, a, m, left, 0.5 * tol, depth + 1)?
        + adaptive(f, m, b, right, 0.5 * tol, depth + 1)?)
}

/// `∫ P(iω)/(2π) dω` over `[lo, hi]` by adaptive Gauss–Kronrod quadrature.
pub fn band_mse(p: &RationalC, lo: f64, hi: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(QeqError::Invalid(format!("invalid band [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(0.0);
    }
    let f = |w: f64| {
        let v = p.eval_iw(w)?;
        if v.im.abs() > 1e-8 * v.norm().max(1.0) {
            return Err(QeqError::Invalid(format!(
                "spectrum is not real at omega = {w}"
            )));
        }
        Ok(v.re / (2.0 * PI))
    };
    let tol = TOL_PER_WIDTH * (hi - lo).max(1.0);
    adaptive(&f, lo, hi, gauss_kronrod(&f, lo, hi)?, tol, 0)
}
