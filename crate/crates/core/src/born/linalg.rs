//! Small dense complex matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Largest entry modulus.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn frobenius(m: &CMatrix) -> f64 {
    libm::sqrt(m.iter().map(|z| z.norm_sqr()).sum())
}

/// `max |m_ij - conj(m_ji)|`; infinite for non-square input.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&v| c(v, 0.0))))
}

/// Matrix from row-major real and imaginary parts.
pub fn from_parts(re: &[&[f64]], im: Option<&[&[f64]]>) -> CMatrix {
    let n = re.len();
    let m = re.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| {
        let imag = im.map_or(0.0, |im| im[i][j]);
        c(re[i][j], imag)
    })
}

/// `1 ⊗ .. ⊗ a ⊗ .. ⊗ 1` with `a` in slot `position` of `copies`.
pub fn embed(a: &CMatrix, position: usize, copies: usize) -> CMatrix {
    let d = a.nrows();
    let id = CMatrix::identity(d, d);
    let mut out = CMatrix::identity(1, 1);
    for k in 0..copies {
        out = out.kronecker(if k == position { a } else { &id });
    }
    out
}

pub fn kron_power(m: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..n {
        out = out.kronecker(m);
    }
    out
}

pub fn kron_power_vec(v: &CVector, n: usize) -> CVector {
    let mut out = CVector::from_element(1, c(1.0, 0.0));
    for _ in 0..n {
        out = out.kronecker(v);
    }
    out
}

/// Orthogonal projection onto the column span of an orthonormal `basis`.
pub fn projector(basis: &CMatrix) -> CMatrix {
    basis * basis.adjoint()
}
