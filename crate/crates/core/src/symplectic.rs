//! Symplectic form, Williamson spectra and related checks for quadrature
//! covariance matrices ordered as (x_1, p_1, x_2, p_2, ...).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symplectic form Ω with one [[0, 1], [-1, 0]] block per mode.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// Principal square root of a symmetric positive semidefinite matrix.
pub(crate) fn sym_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < -1e-12 * scale) {
        return None;
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    let q = &eig.eigenvectors;
    Some(q * d * q.transpose())
}

/// Symplectic eigenvalues ν_k of a covariance matrix (vacuum: ν = ½), in
/// ascending order.
///
/// They are the moduli of the eigenvalues of iΩσ, obtained here from the
/// Hermitian matrix σ^{1/2} (iΩ) σ^{1/2}, which is similar to iΩσ.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = cov.nrows();
    if n == 0 || !n.is_multiple_of(2) || cov.ncols() != n {
        return Err(Error::InvalidState(format!(
            "covariance must be square with even size, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let root = sym_sqrt(cov)
        .ok_or_else(|| Error::InvalidState("covariance is not positive semidefinite".into()))?;
    let om = symplectic_form(n / 2);
    let rc = root.map(|x| Complex64::new(x, 0.0));
    let iom = om.map(|x| Complex64::new(0.0, x));
    let k = &rc * iom * &rc;
    let eig = SymmetricEigen::new(k);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut nus: Vec<f64> = vals[..n / 2].to_vec();
    nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(nus)
}

/// Smallest eigenvalue of the Hermitian matrix σ + (i/2)Ω. A physical state
/// has it ≥ 0.
pub fn heisenberg_min_eigenvalue(cov: &DMatrix<f64>) -> f64 {
    let n = cov.nrows();
    let om = symplectic_form(n / 2);
    let h = DMatrix::from_fn(n, n, |i, j| Complex64::new(cov[(i, j)], 0.5 * om[(i, j)]));
    let eig = SymmetricEigen::new(h);
    eig.eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Entropy contribution of one symplectic eigenvalue,
/// f(ν) = (ν + ½) ln(ν + ½) − (ν − ½) ln(ν − ½), with x ln x → 0.
pub fn entropy_function(nu: f64) -> f64 {
    fn xlnx(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x * x.ln()
        }
    }
    xlnx(nu + 0.5) - xlnx(nu - 0.5)
}
