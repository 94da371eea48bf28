//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest entrywise deviation `max |A - A^H|`.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Replaces `a` by `(a + a^H) / 2`.
pub fn symmetrize(a: &mut CMatrix) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// `tr(A^{-1})` for Hermitian positive-definite `A`, computed as `||L^{-1}||_F^2`
/// from the Cholesky factor `A = L L^H`. Returns `None` when the factorization
/// breaks down.
pub fn trace_of_inverse(a: &CMatrix) -> Option<f64> {
    let n = a.nrows();
    let chol = Cholesky::new(a.clone())?;
    let l = chol.l();
    // Complex Cholesky in nalgebra takes complex square roots of negative
    // pivots instead of failing, so positivity is checked on the diagonal.
    if (0..n).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
        return None;
    }
    let mut inv = CMatrix::identity(n, n);
    if !l.solve_lower_triangular_mut(&mut inv) {
        return None;
    }
    let tr = inv.iter().map(|z| z.norm_sqr()).sum::<f64>();
    tr.is_finite().then_some(tr)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of two column vectors.
pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

/// Principal submatrix on the given index set.
pub fn principal_submatrix(a: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// Rayleigh quotient `c^H A c / c^H c` for a real test vector.
pub fn rayleigh_quotient(a: &CMatrix, c: &[f64]) -> Result<f64> {
    if c.len() != a.nrows() {
        return Err(Error::InvalidDimension(format!(
            "test vector length {} does not match matrix order {}",
            c.len(),
            a.nrows()
        )));
    }
    let v = CVector::from_iterator(c.len(), c.iter().map(|&x| Complex64::new(x, 0.0)));
    let num = (v.adjoint() * a * &v)[(0, 0)].re;
    let den: f64 = c.iter().map(|x| x * x).sum();
    if den == 0.0 {
        return Err(Error::Domain("zero test vector".into()));
    }
    Ok(num / den)
}
