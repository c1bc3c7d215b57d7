//! Scalar rational functions with complex coefficients.
//!
//! Values are kept in reduced form (numerator/denominator roots closer than
//! [`ROOT_COINCIDENCE_TOL`] are cancelled) with a monic denominator. All
//! arithmetic goes through that reduction, so compositions of first-order
//! sections stay small.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QeqError, Result};
use crate::poly::PolynomialC;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative distance below which a numerator root and a denominator root cancel.
pub const ROOT_COINCIDENCE_TOL: f64 = 1e-9;

/// `|Re p|` below this makes the causal/anticausal split undefined.
pub const IMAGINARY_AXIS_TOL: f64 = 1e-9;

/// Relative threshold on `|den(s)|` for refusing an evaluation.
pub const POLE_PROXIMITY_TOL: f64 = 1e-12;

/// Roots closer than this (relative) are treated as one repeated pole.
const MULTIPLICITY_CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalRepr", into = "RationalRepr")]
pub struct RationalC {
    num: PolynomialC,
    den: PolynomialC,
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: PolynomialC,
    den: PolynomialC,
}

impl TryFrom<RationalRepr> for RationalC {
    type Error = QeqError;
    fn try_from(r: RationalRepr) -> Result<Self> {
        RationalC::new(r.num, r.den)
    }
}

impl From<RationalC> for RationalRepr {
    fn from(r: RationalC) -> Self {
        RationalRepr {
            num: r.num,
            den: r.den,
        }
    }
}

impl fmt::Debug for RationalC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}] / [{:?}]", self.num, self.den)
    }
}

/// Pole/zero/gain view of a rational function.
#[derive(Debug, Clone, PartialEq)]
pub struct ZpkView {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    /// Ratio of leading coefficients.
    pub gain: Complex64,
}

/// One pole of a partial-fraction expansion.
///
/// `coefficients[j]` multiplies `1 / (s - pole)^(j + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub coefficients: Vec<Complex64>,
}

impl PoleTerm {
    pub fn multiplicity(&self) -> usize {
        self.coefficients.len()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        let x = s - self.pole;
        let mut pow = ONE;
        let mut acc = ZERO;
        for c in &self.coefficients {
            pow *= x;
            acc += c / pow;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractions {
    pub polynomial_part: PolynomialC,
    pub terms: Vec<PoleTerm>,
}

impl PartialFractions {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.polynomial_part.eval(s) + self.terms.iter().map(|t| t.eval(s)).sum::<Complex64>()
    }

    /// Recombines the selected terms (plus the polynomial part) over a common denominator.
    pub fn recombine<F: Fn(&PoleTerm) -> bool>(&self, keep: F) -> RationalC {
        self.combine(keep, true)
    }

    /// Recombines the selected terms alone, without the polynomial part.
    pub fn recombine_terms<F: Fn(&PoleTerm) -> bool>(&self, keep: F) -> RationalC {
        self.combine(keep, false)
    }

    fn combine<F: Fn(&PoleTerm) -> bool>(&self, keep: F, with_polynomial: bool) -> RationalC {
        let kept: Vec<&PoleTerm> = self.terms.iter().filter(|t| keep(t)).collect();
        let all_roots: Vec<Complex64> = kept
            .iter()
            .flat_map(|t| std::iter::repeat_n(t.pole, t.multiplicity()))
            .collect();
        let den = PolynomialC::from_roots(&all_roots, ONE);
        let mut num = if with_polynomial {
            &self.polynomial_part * &den
        } else {
            PolynomialC::zero()
        };
        for (k, term) in kept.iter().enumerate() {
            for (j, c) in term.coefficients.iter().enumerate() {
                // den / (s - p_k)^(j+1)
                let mut rest: Vec<Complex64> = Vec::with_capacity(all_roots.len());
                for (l, other) in kept.iter().enumerate() {
                    let m = if l == k {
                        other.multiplicity() - (j + 1)
                    } else {
                        other.multiplicity()
                    };
                    rest.extend(std::iter::repeat_n(other.pole, m));
                }
                num = &num + &PolynomialC::from_roots(&rest, *c);
            }
        }
        RationalC::new(num, den).expect("monic denominator is nonzero")
    }
}

impl RationalC {
    /// Builds `num / den`, cancelling coincident roots and normalizing `den` to be monic.
    pub fn new(num: PolynomialC, den: PolynomialC) -> Result<Self> {
        if den.is_zero() {
            return Err(QeqError::Invalid(
                "rational function with zero denominator".into(),
            ));
        }
        if num
            .coeffs()
            .iter()
            .chain(den.coeffs())
            .any(|c| !c.is_finite())
        {
            return Err(QeqError::Invalid("non-finite coefficient".into()));
        }
        Ok(Self::reduced(num, den))
    }

    pub fn constant(c: Complex64) -> Self {
        RationalC {
            num: PolynomialC::constant(c),
            den: PolynomialC::one(),
        }
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn zero() -> Self {
        Self::constant(ZERO)
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    /// `gain * prod (s - z) / prod (s - p)`
    pub fn from_zpk(zeros: &[Complex64], poles: &[Complex64], gain: Complex64) -> Self {
        Self::reduced(
            PolynomialC::from_roots(zeros, gain),
            PolynomialC::from_roots(poles, ONE),
        )
    }

    /// `gain * (s - zero) / (s - pole)`
    pub fn first_order(gain: Complex64, zero: Complex64, pole: Complex64) -> Self {
        Self::from_zpk(&[zero], &[pole], gain)
    }

    fn reduced(mut num: PolynomialC, mut den: PolynomialC) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.degree() > 0 && num.degree() > 0 {
            if let (Ok(zs), Ok(ps)) = (num.roots(), den.roots()) {
                let mut used = vec![false; ps.len()];
                for z in zs {
                    let hit = ps
                        .iter()
                        .enumerate()
                        .filter(|(i, p)| {
                            !used[*i]
                                && (z - **p).norm() <= ROOT_COINCIDENCE_TOL * p.norm().max(1.0)
                        })
                        .min_by(|a, b| (z - a.1).norm().total_cmp(&(z - b.1).norm()));
                    if let Some((i, p)) = hit {
                        used[i] = true;
                        let mid = (z + p) * 0.5;
                        num = num.deflate(mid);
                        den = den.deflate(mid);
                    }
                }
            }
        }
        let lead = den.leading();
        RationalC {
            num: num.scale(lead.inv()),
            den: den.scale(lead.inv()),
        }
    }

    pub fn num(&self) -> &PolynomialC {
        &self.num
    }

    pub fn den(&self) -> &PolynomialC {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.den.degree() == 0 && self.num.degree() == 0
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    /// Evaluates at `s`, refusing points where `|den(s)|` is within tolerance of zero.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval(s);
        if d.norm() < POLE_PROXIMITY_TOL * (1.0 + self.den.coeff_norm()) {
            return Err(QeqError::PoleProximity { s });
        }
        Ok(self.num.eval(s) / d)
    }

    /// Evaluates on the imaginary axis at angular frequency `omega`.
    pub fn eval_iw(&self, omega: f64) -> Result<Complex64> {
        self.eval(Complex64::new(0.0, omega))
    }

    /// Limit as `s -> infinity` for proper functions.
    pub fn value_at_infinity(&self) -> Option<Complex64> {
        if !self.is_proper() {
            return None;
        }
        if self.num.is_zero() || self.num.degree() < self.den.degree() {
            Some(ZERO)
        } else {
            Some(self.num.leading() / self.den.leading())
        }
    }

    /// `R~(s) = conj(R(-conj(s)))`.
    pub fn para_conjugate(&self) -> Self {
        Self::reduced(self.num.para_conjugate(), self.den.para_conjugate())
    }

    pub fn scale(&self, k: Complex64) -> Self {
        if k == ZERO {
            return Self::zero();
        }
        RationalC {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }

    pub fn try_div(&self, rhs: &RationalC) -> Result<Self> {
        if rhs.is_zero() {
            return Err(QeqError::Invalid(
                "division by the zero rational function".into(),
            ));
        }
        Self::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        self.num.roots()
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.poles()?.iter().all(|p| p.re < 0.0))
    }

    pub fn zpk(&self) -> Result<ZpkView> {
        Ok(ZpkView {
            zeros: self.zeros()?,
            poles: self.poles()?,
            gain: self.num.leading() / self.den.leading(),
        })
    }

    /// Polynomial part plus per-pole coefficient chains.
    pub fn partial_fractions(&self) -> Result<PartialFractions> {
        if self.den.degree() == 0 {
            return Err(QeqError::Invalid(
                "partial fractions need a denominator of degree >= 1".into(),
            ));
        }
        let (quot, rem) = self.num.div_rem(&self.den)?;
        let roots = self.den.roots()?;
        let clusters = cluster_roots(&roots);
        let lead = self.den.leading();
        let mut terms = Vec::with_capacity(clusters.len());
        for (k, &(pole, mult)) in clusters.iter().enumerate() {
            let mut others: Vec<Complex64> = Vec::new();
            for (l, &(p, m)) in clusters.iter().enumerate() {
                if l != k {
                    others.extend(std::iter::repeat_n(p, m));
                }
            }
            let cofactor = PolynomialC::from_roots(&others, lead);
            let n_series = rem.shifted(pole);
            let d_series = cofactor.shifted(pole);
            let series = series_divide(&n_series, &d_series, mult);
            let coefficients = (1..=mult).map(|j| series[mult - j]).collect();
            terms.push(PoleTerm { pole, coefficients });
        }
        Ok(PartialFractions {
            polynomial_part: quot,
            terms,
        })
    }

    /// Constant term at infinity plus the partial-fraction terms whose poles
    /// lie strictly in the left half-plane.
    pub fn causal_part(&self) -> Result<Self> {
        if !self.is_proper() {
            return Err(QeqError::Invalid(
                "causal part is defined for proper rational functions only".into(),
            ));
        }
        if self.den.degree() == 0 {
            return Ok(self.clone());
        }
        let pf = self.partial_fractions()?;
        if let Some(t) = pf
            .terms
            .iter()
            .find(|t| t.pole.re.abs() < IMAGINARY_AXIS_TOL)
        {
            return Err(QeqError::ImaginaryAxisPole { pole: t.pole });
        }
        Ok(pf.recombine(|t| t.pole.re < 0.0))
    }

    /// Strictly proper remainder carrying the right half-plane poles, so that
    /// `causal_part + anticausal_part = self`.
    pub fn anticausal_part(&self) -> Result<Self> {
        if !self.is_proper() {
            return Err(QeqError::Invalid(
                "anticausal part is defined for proper rational functions only".into(),
            ));
        }
        if self.den.degree() == 0 {
            return Ok(Self::zero());
        }
        let pf = self.partial_fractions()?;
        if let Some(t) = pf
            .terms
            .iter()
            .find(|t| t.pole.re.abs() < IMAGINARY_AXIS_TOL)
        {
            return Err(QeqError::ImaginaryAxisPole { pole: t.pole });
        }
        Ok(pf.recombine_terms(|t| t.pole.re > 0.0))
    }
}

fn cluster_roots(roots: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for &r in roots {
        let hit = clusters
            .iter_mut()
            .find(|(c, _)| (r - *c).norm() <= MULTIPLICITY_CLUSTER_TOL * c.norm().max(1.0));
        match hit {
            Some((c, m)) => {
                *c = (*c * *m as f64 + r) / (*m as f64 + 1.0);
                *m += 1;
            }
            None => clusters.push((r, 1)),
        }
    }
    clusters
}

/// First `n` coefficients of the power series `a(t) / b(t)`.
fn series_divide(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let get = |v: &[Complex64], k: usize| v.get(k).copied().unwrap_or(ZERO);
    let b0 = get(b, 0);
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = get(a, k);
        for (j, o) in out.iter().enumerate() {
            acc -= get(b, k - j) * o;
        }
        out.push(acc / b0);
    }
    out
}

fn same_denominator(a: &PolynomialC, b: &PolynomialC) -> bool {
    a.degree() == b.degree()
        && a.coeffs()
            .iter()
            .zip(b.coeffs())
            .all(|(x, y)| (x - y).norm() <= 1e-15 * (1.0 + x.norm()))
}

impl Add for &RationalC {
    type Output = RationalC;
    fn add(self, rhs: &RationalC) -> RationalC {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if same_denominator(&self.den, &rhs.den) {
            return RationalC::reduced(&self.num + &rhs.num, self.den.clone());
        }
        RationalC::reduced(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RationalC {
    type Output = RationalC;
    fn sub(self, rhs: &RationalC) -> RationalC {
        self + &(-rhs)
    }
}

impl Mul for &RationalC {
    type Output = RationalC;
    fn mul(self, rhs: &RationalC) -> RationalC {
        if self.is_zero() || rhs.is_zero() {
            return RationalC::zero();
        }
        if self.is_constant() {
            return rhs.scale(self.num.coeff(0) / self.den.coeff(0));
        }
        if rhs.is_constant() {
            return self.scale(rhs.num.coeff(0) / rhs.den.coeff(0));
        }
        RationalC::reduced(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for &RationalC {
    type Output = RationalC;
    fn neg(self) -> RationalC {
        RationalC {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalC {
            type Output = RationalC;
            fn $m(self, rhs: RationalC) -> RationalC {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
