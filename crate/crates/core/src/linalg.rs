//! Dense complex linear algebra for small Hermitian matrices.
//!
//! Matrices are stored row-major. The eigensolver is a cyclic complex Jacobi
//! scheme, which always converges on Hermitian input and is accurate to a few
//! ulps for the 4×4 operators used by the battery model.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances::Tolerances;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

pub const ZERO: Complex = Complex::new(0.0, 0.0);
pub const ONE: Complex = Complex::new(1.0, 0.0);
pub const I: Complex = Complex::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max |m - m†| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from complex rows. Panics if the rows are not square.
    pub fn from_rows(rows: &[Vec<Complex>]) -> Self {
        let dim = rows.len();
        assert!(dim >= 1, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    /// Builds a matrix from real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        assert!(dim >= 1, "matrix dimension must be positive");
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix must be square");
            data.extend(row.iter().map(|&x| Complex::new(x, 0.0)));
        }
        Self { dim, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, 0.0);
        }
        m
    }

    /// `Σ_i w_i |v_i⟩⟨v_i|` for the given columns.
    pub fn from_outer_products(weights: &[Complex], vectors: &[Vec<Complex>]) -> Self {
        assert_eq!(weights.len(), vectors.len());
        let dim = vectors.first().map_or(0, Vec::len);
        let mut m = Self::zeros(dim);
        for (w, v) in weights.iter().zip(vectors) {
            for r in 0..dim {
                let wr = w * v[r];
                for c in 0..dim {
                    m[(r, c)] += wr * v[c].conj();
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<Complex> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim * other.dim;
        let mut out = Self::zeros(n);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self[(r1, c1)];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        out[(r1 * other.dim + r2, c1 * other.dim + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// `‖self − other‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// `‖m − m†‖_max`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `‖U U† − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        (self * &self.adjoint()).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut acc = ZERO;
        for r in 0..self.dim {
            for k in 0..self.dim {
                acc += self[(r, k)] * other[(k, r)];
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Single-qubit Pauli matrices and identity.
pub mod pauli {
    use super::{ComplexMatrix, I, ONE, ZERO};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ZERO, -ONE]])
    }
}

/// Ascending eigenvalues with the matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<Complex> {
        self.eigenvectors.column(i)
    }

    /// `Σ f(ε_i) |v_i⟩⟨v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> Complex) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            let w = f(self.eigenvalues[i]);
            for r in 0..n {
                let wr = w * self.eigenvectors[(r, i)];
                for c in 0..n {
                    out[(r, c)] += wr * self.eigenvectors[(c, i)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|e| Complex::new(e, 0.0))
    }

    /// `‖V† V − I‖_max`.
    pub fn orthonormality_deviation(&self) -> f64 {
        (&self.eigenvectors.adjoint() * &self.eigenvectors)
            .max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }
}

/// Eigendecomposition of a Hermitian matrix using the process tolerances.
pub fn hermitian_eigendecomposition(
    m: &ComplexMatrix,
) -> Result<SpectralDecomposition, LinalgError> {
    hermitian_eigendecomposition_with(m, Tolerances::current())
}

pub fn hermitian_eigendecomposition_with(
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<SpectralDecomposition, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol.hermitian {
        return Err(LinalgError::NotHermitian { deviation });
    }

    let n = m.dim();
    // Work on the exactly Hermitian part.
    let mut a = m.clone();
    for r in 0..n {
        a[(r, r)] = Complex::new(a[(r, r)].re, 0.0);
        for c in (r + 1)..n {
            let h = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            a[(r, c)] = h;
            a[(c, r)] = h.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol.jacobi_off_diagonal * a.frobenius_norm().max(1.0);

    let mut converged = off_diagonal_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == tol.jacobi_max_sweeps {
            return Err(LinalgError::ConvergenceFailure {
                sweeps,
                off_norm: off_diagonal_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[(r, dst)] = v[(r, src)];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One complex Jacobi rotation annihilating `a[p][q]`: `a ← J† a J`, `v ← v J`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let g_abs = g.norm();
    if g_abs == 0.0 {
        return;
    }
    let phase = g / g_abs;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let theta = (aqq - app) / (2.0 * g_abs);
    let t = if theta.is_finite() {
        let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    } else {
        // |g| negligible next to the diagonal gap
        0.5 / theta
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag(1, e^{−iφ}) · [[c, s], [−s, c]] on the (p, q) plane
    let j_pp = Complex::new(c, 0.0);
    let j_pq = Complex::new(s, 0.0);
    let j_qp = -phase.conj() * s;
    let j_qq = phase.conj() * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * j_pp + akq * j_qp;
        a[(k, q)] = akp * j_pq + akq * j_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[(q, k)] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * j_pp + vkq * j_qp;
        v[(k, q)] = vkp * j_pq + vkq * j_qq;
    }
}

/// `Σ f(ε_i) |v_i⟩⟨v_i|` for a real function of the eigenvalues.
pub fn spectral_function(
    m: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
) -> Result<ComplexMatrix, LinalgError> {
    let decomp = hermitian_eigendecomposition(m)?;
    Ok(decomp.map(|e| Complex::new(f(e), 0.0)))
}

/// `exp(−i h t)` through the eigenbasis of `h`.
pub fn unitary_from_hamiltonian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix, LinalgError> {
    let decomp = hermitian_eigendecomposition(h)?;
    Ok(decomp.map(|e| Complex::from_polar(1.0, -e * t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn eq3(xi1: f64, xi2: f64, xic: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[xic, -xi2 / 2.0, -xi1 / 2.0, 0.0],
            &[-xi2 / 2.0, -xic, 0.0, -xi1 / 2.0],
            &[-xi1 / 2.0, 0.0, -xic, -xi2 / 2.0],
            &[0.0, -xi1 / 2.0, -xi2 / 2.0, xic],
        ])
    }

    fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identity_eigenvalues() {
        let d = hermitian_eigendecomposition(&ComplexMatrix::identity(4)).unwrap();
        assert_vec_close(&d.eigenvalues, &[1.0; 4], 1e-15);
    }

    #[test]
    fn diagonal_is_sorted() {
        let d = hermitian_eigendecomposition(&ComplexMatrix::from_real_diagonal(&[
            0.5, -0.5, -0.5, 0.5,
        ]))
        .unwrap();
        assert_vec_close(&d.eigenvalues, &[-0.5, -0.5, 0.5, 0.5], 1e-15);
        assert!(d.orthonormality_deviation() < 1e-15);
    }

    #[test]
    fn battery_matrix_spectrum_matches_characteristic_roots() {
        // det(H − λ) for the block structure factors into
        // (λ² − α₊²/4)(λ² − α₋²/4) with α± = √(4ξc² + (ξ1±ξ2)²);
        // for ξ1 = ξ2 = 1.5, ξc = 0.5 that is α₊ = √10, α₋ = 1.
        let d = hermitian_eigendecomposition(&eq3(1.5, 1.5, 0.5)).unwrap();
        let r = 10f64.sqrt() / 2.0;
        assert_vec_close(&d.eigenvalues, &[-r, -0.5, 0.5, r], 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            hermitian_eigendecomposition(&m),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn tiny_budget_reports_convergence_failure() {
        let tol = Tolerances {
            jacobi_max_sweeps: 1,
            ..Tolerances::default()
        };
        let err = hermitian_eigendecomposition_with(&eq3(1.3, 0.7, 0.4), &tol).unwrap_err();
        assert!(matches!(
            err,
            LinalgError::ConvergenceFailure { sweeps: 1, .. }
        ));
    }

    #[test]
    fn rejects_non_finite() {
        let m = ComplexMatrix::from_real_diagonal(&[f64::NAN, 1.0]);
        assert_eq!(
            hermitian_eigendecomposition(&m),
            Err(LinalgError::NonFinite)
        );
    }

    #[test]
    fn spectral_identity_function() {
        let m = eq3(0.3, 2.1, -0.7);
        let back = spectral_function(&m, |x| x).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = spectral_function(&ComplexMatrix::zeros(4), f64::exp).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn boltzmann_weights_of_diagonal() {
        let e = spectral_function(&ComplexMatrix::from_real_diagonal(&[1.0, -1.0]), |x| {
            (-x).exp()
        })
        .unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[(-1f64).exp(), 1f64.exp()]);
        assert!(e.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn unitary_at_zero_time() {
        let u = unitary_from_hamiltonian(&eq3(1.0, 2.0, 0.3), 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn sigma_x_rotation_closed_form() {
        // exp(−iθσx) = cos θ I − i sin θ σx
        for theta in [FRAC_PI_2, 0.37, -1.2] {
            let u = unitary_from_hamiltonian(&pauli::x(), theta).unwrap();
            let expected =
                &pauli::identity().scale_real(theta.cos()) - &pauli::x().scale(I * theta.sin());
            assert!(u.max_abs_diff(&expected) < 1e-14, "θ = {theta}");
        }
        let u = unitary_from_hamiltonian(&pauli::x(), FRAC_PI_2).unwrap();
        assert!(u.max_abs_diff(&pauli::x().scale(-I)) < 1e-14);
    }

    #[test]
    fn complex_hermitian_with_phases() {
        let y = pauli::y();
        let m = &y.kron(&pauli::z()) + &pauli::x().kron(&y).scale_real(0.4);
        let d = hermitian_eigendecomposition(&m).unwrap();
        assert!(d.reconstruct().max_abs_diff(&m) < 1e-13);
        assert!(d.orthonormality_deviation() < 1e-13);
        assert!(u_is_close(&unitary_from_hamiltonian(&m, PI).unwrap()));
    }

    fn u_is_close(u: &ComplexMatrix) -> bool {
        u.is_unitary(1e-12)
    }

    fn hermitian_strategy(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-5.0f64..5.0, n * n * 2).prop_map(move |raw| {
            let mut m = ComplexMatrix::zeros(n);
            for r in 0..n {
                m[(r, r)] = Complex::new(raw[r * n + r], 0.0);
                for c in (r + 1)..n {
                    let z = Complex::new(raw[r * n + c], raw[n * n + r * n + c]);
                    m[(r, c)] = z;
                    m[(c, r)] = z.conj();
                }
            }
            m
        })
    }

    proptest! {
        #[test]
        fn decomposition_invariants(m in (1usize..=8).prop_flat_map(hermitian_strategy)) {
            let d = hermitian_eigendecomposition(&m).unwrap();
            prop_assert!(d.reconstruct().max_abs_diff(&m) <= 1e-10);
            prop_assert!(d.orthonormality_deviation() <= 1e-10);
            prop_assert!(d.eigenvalues.windows(2).all(|w| w[1] >= w[0]));
            let tr: f64 = d.eigenvalues.iter().sum();
            prop_assert!((tr - m.trace().re).abs() <= 1e-10);
        }

        #[test]
        fn evolution_is_unitary(m in hermitian_strategy(4), t in -100.0f64..100.0) {
            let u = unitary_from_hamiltonian(&m, t).unwrap();
            prop_assert!(u.unitarity_deviation() <= 1e-10);
        }

        #[test]
        fn deterministic(m in hermitian_strategy(4)) {
            let a = hermitian_eigendecomposition(&m).unwrap();
            let b = hermitian_eigendecomposition(&m).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
