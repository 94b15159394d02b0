//! Thomas solve for complex tridiagonal systems.
//!
//! The Crank-Nicolson matrices built from the radial Laplacian have the form
//! `1 - i*beta*T` with `T` real and row-wise weakly diagonally dominant, so
//! `|diag| > |sub| + |sup|` holds with room to spare and no pivoting is
//! needed.

use num_complex::Complex64;

/// Solves the system with sub-diagonal `sub` (sub[0] unused), diagonal
/// `diag` and super-diagonal `sup` (sup[len-1] unused) in place of `rhs`.
///
/// Panics on a vanishing pivot; the Crank-Nicolson systems this crate builds
/// cannot produce one.
pub(crate) fn solve(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &mut [Complex64],
) {
    let n = diag.len();
    assert!(n > 0 && sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    assert!(denom.norm_sqr() > 0.0, "singular tridiagonal pivot");
    c[0] = sup[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        assert!(denom.norm_sqr() > 0.0, "singular tridiagonal pivot");
        c[i] = sup[i] / denom;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= c[i] * next;
    }
}
