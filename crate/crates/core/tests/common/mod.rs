#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qeq_core::design::CavityChannel;
use qeq_core::{CMatrix, RationalC, StateSpaceModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(rng: &mut impl Rng, scale: f64) -> Complex64 {
    c(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| random_complex(rng, scale))
}

pub fn random_cavity(rng: &mut impl Rng) -> CavityChannel {
    CavityChannel::new(
        rng.random_range(0.05..0.95),
        rng.random_range(0.05..0.95),
        rng.random_range(0.05..0.95),
        rng.random_range(0.1..10.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(0.1..5.0),
        rng.random_range(0.0..5.0),
    )
    .expect("sampled inside the parameter domain")
}

pub fn reference_cavity() -> CavityChannel {
    CavityChannel::new(0.5, 0.8, 0.6, 2.0, 0.0, 2.0, 0.6).unwrap()
}

/// Random model satisfying `A + A† + BB† = 0`, `B = −C†`, `D = I`.
pub fn random_realizable(rng: &mut impl Rng, states: usize, ports: usize) -> StateSpaceModel {
    loop {
        let cm = random_matrix(rng, ports, states, 1.5);
        let h = random_matrix(rng, states, states, 2.0);
        let h = (&h + h.adjoint()).scale(0.5);
        let a = (cm.adjoint() * &cm).scale(-0.5) + h * c(0.0, 1.0);
        let b = -cm.adjoint();
        if let Ok(m) = StateSpaceModel::new_hurwitz(a, b, cm, CMatrix::identity(ports, ports)) {
            if qeq_core::linalg::spectral_abscissa(m.a()).unwrap() < -1e-3 {
                return m;
            }
        }
    }
}

/// Proper rational function with roots kept away from the imaginary axis.
pub fn random_rational(rng: &mut impl Rng, max_degree: usize) -> RationalC {
    let deg = rng.random_range(1..=max_degree);
    let off_axis = |rng: &mut dyn rand::RngCore| {
        let re: f64 = rng.random_range(0.2..3.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        c(sign * re, rng.random_range(-3.0..3.0))
    };
    let poles: Vec<Complex64> = (0..deg).map(|_| off_axis(rng)).collect();
    let nz = rng.random_range(0..=deg);
    let zeros: Vec<Complex64> = (0..nz).map(|_| off_axis(rng)).collect();
    RationalC::from_zpk(&zeros, &poles, random_complex(rng, 2.0) + c(0.1, 0.0))
}
