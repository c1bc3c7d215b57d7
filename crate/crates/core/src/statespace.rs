//! Complex state-space models `da = A a + B u`, `y = C a + D u` with the
//! commutation matrix fixed to the identity.

use num_complex::Complex64;

use crate::error::{QeqError, Result};
use crate::linalg::{spectral_abscissa, CMatrix};
use crate::poly::PolynomialC;
use crate::rational::RationalC;
use crate::transfer::TransferMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
}

impl StateSpaceModel {
    /// `A` is `m×m`, `B` is `m×inputs`, `C` is `outputs×m`, `D` is `outputs×inputs`.
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let m = a.nrows();
        let ok = a.is_square()
            && b.nrows() == m
            && c.ncols() == m
            && d.nrows() == c.nrows()
            && d.ncols() == b.ncols();
        if !ok {
            return Err(QeqError::DimensionMismatch(format!(
                "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(StateSpaceModel { a, b, c, d })
    }

    /// Builds a model and additionally requires `A` to be Hurwitz.
    pub fn new_hurwitz(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let m = Self::new(a, b, c, d)?;
        let abscissa = spectral_abscissa(&m.a)?;
        if abscissa >= 0.0 {
            return Err(QeqError::NotHurwitz { abscissa });
        }
        Ok(m)
    }

    /// Memoryless model `y = D u`.
    pub fn static_gain(d: CMatrix) -> Self {
        let (p, q) = d.shape();
        StateSpaceModel {
            a: CMatrix::zeros(0, 0),
            b: CMatrix::zeros(0, q),
            c: CMatrix::zeros(p, 0),
            d,
        }
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }
    pub fn b(&self) -> &CMatrix {
        &self.b
    }
    pub fn c(&self) -> &CMatrix {
        &self.c
    }
    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    /// Commutation matrix; always the identity here.
    pub fn theta(&self) -> CMatrix {
        CMatrix::identity(self.states(), self.states())
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_hurwitz(&self) -> Result<bool> {
        if self.states() == 0 {
            return Ok(true);
        }
        Ok(spectral_abscissa(&self.a)? < 0.0)
    }

    /// Direct numerical evaluation of `C (sI - A)^{-1} B + D`.
    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        let m = self.states();
        if m == 0 {
            return Ok(self.d.clone());
        }
        let resolvent = CMatrix::identity(m, m) * s - &self.a;
        let lu = resolvent.lu();
        let x = lu.solve(&self.b).ok_or(QeqError::PoleProximity { s })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(QeqError::PoleProximity { s });
        }
        Ok(&self.c * x + &self.d)
    }

    pub fn eval_iw(&self, omega: f64) -> Result<CMatrix> {
        self.eval(Complex64::new(0.0, omega))
    }

    /// Transfer matrix `C (sI - A)^{-1} B + D` as rational functions, using the
    /// Faddeev-LeVerrier expansion of the resolvent.
    pub fn transfer(&self) -> TransferMatrix {
        let m = self.states();
        let (p, q) = self.d.shape();
        if m == 0 {
            return TransferMatrix::constant(&self.d);
        }
        // char poly coefficients, ascending; leading 1
        let mut charpoly = vec![ZERO; m + 1];
        charpoly[m] = ONE;
        let eye = CMatrix::identity(m, m);
        let mut mk = CMatrix::zeros(m, m);
        // adj(sI - A) = sum_k M_k s^(m-k)
        let mut adj_terms: Vec<CMatrix> = Vec::with_capacity(m);
        for k in 1..=m {
            mk = &self.a * &mk + &eye * charpoly[m - k + 1];
            let am = &self.a * &mk;
            charpoly[m - k] = -am.trace() / k as f64;
            adj_terms.push(mk.clone());
        }
        let den = PolynomialC::new(charpoly);
        let projected: Vec<CMatrix> = adj_terms.iter().map(|mk| &self.c * mk * &self.b).collect();
        TransferMatrix::from_fn(p, q, |i, j| {
            let mut coeffs = vec![ZERO; m];
            for (k, cmb) in projected.iter().enumerate() {
                coeffs[m - 1 - k] = cmb[(i, j)];
            }
            let strictly_proper = PolynomialC::new(coeffs);
            let num = &strictly_proper + &den.scale(self.d[(i, j)]);
            RationalC::new(num, den.clone()).expect("monic characteristic polynomial")
        })
    }

    /// Series interconnection: `self` feeds `next`. Transfer is `next · self`.
    pub fn series(&self, next: &StateSpaceModel) -> Result<Self> {
        if self.outputs() != next.inputs() {
            return Err(QeqError::DimensionMismatch(format!(
                "series: {} outputs into {} inputs",
                self.outputs(),
                next.inputs()
            )));
        }
        let (m1, m2) = (self.states(), next.states());
        let m = m1 + m2;
        let mut a = CMatrix::zeros(m, m);
        a.view_mut((0, 0), (m1, m1)).copy_from(&self.a);
        a.view_mut((m1, 0), (m2, m1))
            .copy_from(&(&next.b * &self.c));
        a.view_mut((m1, m1), (m2, m2)).copy_from(&next.a);
        let mut b = CMatrix::zeros(m, self.inputs());
        b.view_mut((0, 0), (m1, self.inputs())).copy_from(&self.b);
        b.view_mut((m1, 0), (m2, self.inputs()))
            .copy_from(&(&next.b * &self.d));
        let mut c = CMatrix::zeros(next.outputs(), m);
        c.view_mut((0, 0), (next.outputs(), m1))
            .copy_from(&(&next.d * &self.c));
        c.view_mut((0, m1), (next.outputs(), m2)).copy_from(&next.c);
        let d = &next.d * &self.d;
        Self::new(a, b, c, d)
    }

    /// Block-diagonal stacking: inputs, outputs and states are concatenated.
    pub fn direct_sum(&self, other: &StateSpaceModel) -> Self {
        let (m1, m2) = (self.states(), other.states());
        let (i1, i2) = (self.inputs(), other.inputs());
        let (o1, o2) = (self.outputs(), other.outputs());
        let mut a = CMatrix::zeros(m1 + m2, m1 + m2);
        a.view_mut((0, 0), (m1, m1)).copy_from(&self.a);
        a.view_mut((m1, m1), (m2, m2)).copy_from(&other.a);
        let mut b = CMatrix::zeros(m1 + m2, i1 + i2);
        b.view_mut((0, 0), (m1, i1)).copy_from(&self.b);
        b.view_mut((m1, i1), (m2, i2)).copy_from(&other.b);
        let mut c = CMatrix::zeros(o1 + o2, m1 + m2);
        c.view_mut((0, 0), (o1, m1)).copy_from(&self.c);
        c.view_mut((o1, m1), (o2, m2)).copy_from(&other.c);
        let mut d = CMatrix::zeros(o1 + o2, i1 + i2);
        d.view_mut((0, 0), (o1, i1)).copy_from(&self.d);
        d.view_mut((o1, i1), (o2, i2)).copy_from(&other.d);
        StateSpaceModel { a, b, c, d }
    }
}

/// Solves `A X + X A^† + Q = 0` for Hurwitz `A`.
pub fn lyapunov_solve(a: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let m = a.nrows();
    if !a.is_square() || q.shape() != (m, m) {
        return Err(QeqError::DimensionMismatch(format!(
            "lyapunov: A {}x{}, Q {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    if m == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let abscissa = spectral_abscissa(a)?;
    if abscissa >= 0.0 {
        return Err(QeqError::NotHurwitz { abscissa });
    }
    // column-major vec: vec(AX) = (I ⊗ A) vec X, vec(X A^†) = (conj(A) ⊗ I) vec X
    let n = m * m;
    let mut k = CMatrix::zeros(n, n);
    for j in 0..m {
        for i in 0..m {
            let row = j * m + i;
            for l in 0..m {
                k[(row, j * m + l)] += a[(i, l)];
                k[(row, l * m + i)] += a[(j, l)].conj();
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(n, q.iter().map(|v| -v));
    let lu = k.clone().lu();
    let mut x = lu.solve(&rhs).ok_or(QeqError::NotHurwitz { abscissa })?;
    // one step of iterative refinement
    let r = &rhs - &k * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let x = CMatrix::from_column_slice(m, m, x.as_slice());
    Ok((&x + x.adjoint()).scale(0.5))
}
