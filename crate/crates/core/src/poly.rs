//! Dense univariate polynomials with complex coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QeqError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Leading coefficients below this fraction of the operand scale are treated
/// as cancellation residue after addition or subtraction.
const CANCELLATION_TRIM: f64 = 1e-13;

/// Polynomial in `s` stored by ascending degree.
///
/// The coefficient vector never carries an exactly-zero leading entry; the
/// zero polynomial has an empty coefficient vector.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct PolynomialC {
    coeffs: Vec<Complex64>,
}

impl From<Vec<Complex64>> for PolynomialC {
    fn from(coeffs: Vec<Complex64>) -> Self {
        PolynomialC::new(coeffs)
    }
}

impl From<PolynomialC> for Vec<Complex64> {
    fn from(p: PolynomialC) -> Self {
        p.coeffs
    }
}

impl fmt::Debug for PolynomialC {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})s"),
                _ => format!("({c})s^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl PolynomialC {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        PolynomialC { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        PolynomialC { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ONE)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `s - root`
    pub fn linear_factor(root: Complex64) -> Self {
        Self::new(vec![-root, ONE])
    }

    /// `lead * prod (s - r)`
    pub fn from_roots(roots: &[Complex64], lead: Complex64) -> Self {
        roots.iter().fold(Self::constant(lead), |acc, &r| {
            &acc * &Self::linear_factor(r)
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * s + c)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Coefficients of `p~(s) = conj(p(-conj(s)))`.
    pub fn para_conjugate(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 0 { c.conj() } else { -c.conj() })
                .collect(),
        )
    }

    /// Taylor coefficients of `p(center + t)` in ascending powers of `t`.
    pub fn shifted(&self, center: Complex64) -> Vec<Complex64> {
        // repeated synthetic division
        let mut work = self.coeffs.clone();
        let n = work.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let hi = work[j + 1];
                work[j] += hi * center;
            }
        }
        work
    }

    /// Quotient and remainder of `self / divisor`.
    pub fn div_rem(&self, divisor: &PolynomialC) -> Result<(PolynomialC, PolynomialC)> {
        if divisor.is_zero() {
            return Err(QeqError::Invalid("polynomial division by zero".into()));
        }
        if self.coeffs.len() < divisor.coeffs.len() {
            return Ok((Self::zero(), self.clone()));
        }
        let dn = divisor.coeffs.len();
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ZERO; rem.len() - dn + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dn - 1] / lead;
            quot[k] = q;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + dn - 1] = ZERO;
        }
        rem.truncate(dn - 1);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Divides out `(s - root)` and drops the remainder.
    pub fn deflate(&self, root: Complex64) -> Self {
        if self.coeffs.len() <= 1 {
            return self.clone();
        }
        let n = self.coeffs.len();
        let mut quot = vec![ZERO; n - 1];
        let mut carry = ZERO;
        for k in (1..n).rev() {
            carry = carry * root + self.coeffs[k];
            quot[k - 1] = carry;
        }
        Self::new(quot)
    }

    /// All complex roots with multiplicity, via companion-matrix eigenvalues
    /// followed by Newton polishing.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if self.is_zero() || n == 0 {
            return Ok(Vec::new());
        }
        if n == 1 {
            return Ok(vec![-self.coeffs[0] / self.coeffs[1]]);
        }
        let lead = self.leading();
        let companion = DMatrix::from_fn(n, n, |i, j| {
            if i == 0 {
                -self.coeffs[n - 1 - j] / lead
            } else if i == j + 1 {
                ONE
            } else {
                ZERO
            }
        });
        let schur = nalgebra::linalg::Schur::try_new(companion, f64::EPSILON, 1000 * n)
            .ok_or(QeqError::RootFindingFailure { degree: n })?;
        let eig = schur
            .eigenvalues()
            .ok_or(QeqError::RootFindingFailure { degree: n })?;
        let dp = self.derivative();
        let mut roots: Vec<Complex64> = eig.iter().map(|&r| self.polish(&dp, r)).collect();
        if roots.iter().any(|r| !r.is_finite()) {
            return Err(QeqError::RootFindingFailure { degree: n });
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }

    fn polish(&self, dp: &PolynomialC, mut r: Complex64) -> Complex64 {
        let mut best = self.eval(r).norm();
        for _ in 0..8 {
            let d = dp.eval(r);
            if d.norm() == 0.0 || best == 0.0 {
                break;
            }
            let cand = r - self.eval(r) / d;
            let val = self.eval(cand).norm();
            if !(val < best) {
                break;
            }
            r = cand;
            best = val;
        }
        r
    }

    fn trim_relative(mut coeffs: Vec<Complex64>, scale: f64) -> Self {
        let cut = CANCELLATION_TRIM * scale;
        while coeffs.last().is_some_and(|c| c.norm() <= cut) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    fn combine(&self, other: &PolynomialC, sign: f64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeff(k) + other.coeff(k) * sign)
            .collect();
        Self::trim_relative(coeffs, self.max_abs().max(other.max_abs()))
    }
}

impl Add for &PolynomialC {
    type Output = PolynomialC;
    fn add(self, rhs: &PolynomialC) -> PolynomialC {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &PolynomialC {
    type Output = PolynomialC;
    fn sub(self, rhs: &PolynomialC) -> PolynomialC {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &PolynomialC {
    type Output = PolynomialC;
    fn mul(self, rhs: &PolynomialC) -> PolynomialC {
        if self.is_zero() || rhs.is_zero() {
            return PolynomialC::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolynomialC::new(out)
    }
}

impl Neg for &PolynomialC {
    type Output = PolynomialC;
    fn neg(self) -> PolynomialC {
        PolynomialC::new(self.coeffs.iter().map(|c| -c).collect())
    }
}
