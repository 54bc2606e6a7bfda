//! Dense complex matrix kernels.
//!
//! Hermitian eigendecomposition, null spaces, the matrix exponential and the
//! Autonne–Takagi factorizations used to bring a symmetric unitary into the
//! canonical involution form. Vectorization is column-stacking everywhere:
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default absolute tolerance on Frobenius norms.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative gap under which two eigenvalues of the real part of a symmetric
/// unitary are treated as one cluster during simultaneous diagonalization.
pub const CLUSTER_GAP: f64 = 1e-8;

/// Off-diagonal mass (relative to the Frobenius norm) under which a matrix is
/// taken to be diagonal already. Keeps the standard basis for diagonal input.
pub const DIAGONAL_CUTOFF: f64 = 1e-14;

const MAX_EIG_ITER: usize = 100_000;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Builds a complex matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| re(x)))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&x| re(x))))
}

pub fn pauli_x() -> CMatrix {
    real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMatrix {
    real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `σ₊ = |0⟩⟨1|`, raising from the second basis vector to the first.
pub fn sigma_plus() -> CMatrix {
    real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0])
}

/// `σ₋ = |1⟩⟨0|`.
pub fn sigma_minus() -> CMatrix {
    real_matrix(2, 2, &[0.0, 0.0, 1.0, 0.0])
}

/// Matrix unit `|i⟩⟨j|` of size `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(a: &CMatrix) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    Ok(a.nrows())
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn symmetry_defect(a: &CMatrix) -> f64 {
    (a - a.transpose()).norm()
}

pub fn unitarity_defect(a: &CMatrix) -> f64 {
    (a.adjoint() * a - identity(a.ncols())).norm()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization.
pub fn vec(a: &CMatrix) -> CVector {
    CVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec`] for a `d × d` matrix.
pub fn unvec(v: &CVector, d: usize) -> CMatrix {
    assert_eq!(v.len(), d * d, "unvec length mismatch");
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Largest column 2-norm. Equals the worst residual over the matrix-unit
/// basis when applied to a superoperator difference.
pub fn max_column_norm(a: &CMatrix) -> f64 {
    a.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `𝒥 = (⊕ σx)^{n} ⊕ (⊕ (1))^{m}`.
pub fn canonical_form(n_doublets: usize, m_singlets: usize) -> CMatrix {
    let size = 2 * n_doublets + m_singlets;
    let mut j = CMatrix::zeros(size, size);
    for i in 0..n_doublets {
        j[(2 * i, 2 * i + 1)] = ONE;
        j[(2 * i + 1, 2 * i)] = ONE;
    }
    for s in 2 * n_doublets..size {
        j[(s, s)] = ONE;
    }
    j
}

/// `W₂ = 2^{-1/2} [[1, 1], [i, −i]]`, satisfying `W₂ᵀ W₂ = σx`.
pub fn w2() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[re(h), re(h), c(0.0, h), c(0.0, -h)])
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns; unitary.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) V†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            scaled.column_mut(j).scale_mut(fj);
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|x| x)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn cmp_complex_desc(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Scales a column so that its largest-magnitude component (first one on
/// ties) is real and positive.
fn normalize_phase(col: &mut [C64]) {
    let mut best = 0;
    let mut best_abs: f64 = -1.0;
    for (i, z) in col.iter().enumerate() {
        let a = z.norm();
        if a > best_abs + 1e-12 * best_abs.max(0.0) {
            best = i;
            best_abs = a;
        }
    }
    if best_abs > 0.0 {
        let phase = col[best].conj() / best_abs;
        for z in col.iter_mut() {
            *z *= phase;
        }
    }
}

fn max_off_diagonal(a: &CMatrix) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if i != j {
                m = m.max(a[(i, j)].norm());
            }
        }
    }
    m
}

/// Sorts eigenpairs descending by eigenvalue; exact ties fall back to the
/// phase-normalized eigenvector components.
fn ordered_spectrum(values: Vec<f64>, mut vectors: CMatrix) -> Spectrum {
    let n = values.len();
    for j in 0..n {
        normalize_phase(vectors.column_mut(j).as_mut_slice());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[b].total_cmp(&values[a]).then_with(|| {
            cmp_complex_desc(vectors.column(a).as_slice(), vectors.column(b).as_slice())
        })
    });
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Spectrum { eigenvalues, eigenvectors }
}

pub fn hermitian_eig(a: &CMatrix, tol: f64) -> Result<Spectrum> {
    let n = ensure_square(a)?;
    ensure_finite(a)?;
    let defect = hermitian_defect(a);
    if defect > tol {
        return Err(Error::NotHermitian { defect });
    }
    if n == 0 {
        return Ok(Spectrum { eigenvalues: vec![], eigenvectors: CMatrix::zeros(0, 0) });
    }
    let h = (a + a.adjoint()).scale(0.5);
    let scale = h.norm();
    if max_off_diagonal(&h) <= DIAGONAL_CUTOFF * scale {
        let values = h.diagonal().iter().map(|z| z.re).collect();
        return Ok(ordered_spectrum(values, identity(n)));
    }
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, MAX_EIG_ITER).ok_or(Error::NoConvergence)?;
    Ok(ordered_spectrum(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Real symmetric eigendecomposition, descending, each eigenvector signed
/// so its largest-magnitude component is positive.
fn real_symmetric_eig(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let s = (a + a.transpose()).scale(0.5);
    let complex = s.map(re);
    if n == 0 {
        return Ok((vec![], DMatrix::zeros(0, 0)));
    }
    let scale = s.norm();
    let spectrum = if max_off_diagonal(&complex) <= DIAGONAL_CUTOFF * scale {
        ordered_spectrum(s.diagonal().iter().copied().collect(), identity(n))
    } else {
        let eig =
            SymmetricEigen::try_new(s, f64::EPSILON, MAX_EIG_ITER).ok_or(Error::NoConvergence)?;
        ordered_spectrum(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(re))
    };
    Ok((spectrum.eigenvalues, spectrum.eigenvectors.map(|z| z.re)))
}

fn svd_full_v(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (m, n) = a.shape();
    let padded = if m < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().copied().collect(), v_t.adjoint())
}

/// Singular values, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![];
    }
    SVD::new(a.clone(), false, false).singular_values.iter().copied().collect()
}

/// Orthonormal basis of `{v : ‖A v‖ ≤ tol·σ_max}`.
pub fn null_space(a: &CMatrix, tol: f64) -> Vec<CVector> {
    let n = a.ncols();
    if n == 0 {
        return vec![];
    }
    if a.nrows() == 0 {
        return (0..n).map(|j| identity(n).column(j).into_owned()).collect();
    }
    let (sv, v) = svd_full_v(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return (0..n).map(|j| identity(n).column(j).into_owned()).collect();
    }
    let cutoff = tol * smax;
    sv.iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(j, _)| {
            let mut col = v.column(j).into_owned();
            normalize_phase(col.as_mut_slice());
            col
        })
        .collect()
}

/// Least-squares solution of `A x = b` through the SVD.
pub fn least_squares(a: &CMatrix, b: &CMatrix) -> CMatrix {
    if a.ncols() == 0 {
        return CMatrix::zeros(0, b.ncols());
    }
    let svd = SVD::new(a.clone(), true, true);
    let smax = svd.singular_values.max();
    let eps = f64::EPSILON * smax * (a.nrows().max(a.ncols()) as f64);
    svd.solve(b, eps).expect("both singular bases computed")
}

/// Outcome of a Takagi-type factorization `Sᵀ U S = canonical`.
#[derive(Debug, Clone)]
pub struct TakagiResult {
    /// Unitary factor `S`.
    pub factor: CMatrix,
    pub canonical: CMatrix,
    /// `‖Sᵀ U S − canonical‖`.
    pub residual: f64,
}

/// Autonne–Takagi factorization `Vᵀ U V = Σ` of a complex symmetric matrix.
///
/// Unitary input goes through the commuting real and imaginary parts:
/// `U = X + iY` with `XY = YX` and `X² + Y² = I`, diagonalized jointly by a
/// real orthogonal `O`, after which `V = O diag(e^{−iθ/2})`. Other symmetric
/// input goes through the real doubled matrix `[[X, −Y], [−Y, −X]]`, whose
/// positive eigenpairs `(σ, [a; b])` give Takagi vectors `a + ib`.
pub fn autonne_takagi(u: &CMatrix, tol: f64) -> Result<TakagiResult> {
    ensure_square(u)?;
    ensure_finite(u)?;
    let defect = symmetry_defect(u);
    if defect > tol {
        return Err(Error::NotSymmetric { defect });
    }
    let (factor, sigma) = if unitarity_defect(u) <= tol {
        takagi_unitary(u)?
    } else {
        takagi_general(u, tol)?
    };
    let canonical = diag_real(&sigma);
    let residual = (factor.transpose() * u * &factor - &canonical).norm();
    Ok(TakagiResult { factor, canonical, residual })
}

/// Consecutive runs of descending eigenvalues separated by less than
/// [`CLUSTER_GAP`] (relative).
fn clusters(values: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let gap = values[i - 1] - values[i];
            gap > CLUSTER_GAP * values[i - 1].abs().max(values[i].abs()).max(1.0)
        };
        if split {
            out.push((start, i - start));
            start = i;
        }
    }
    out
}

pub(crate) fn takagi_unitary(u: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let n = u.nrows();
    let us = (u + u.transpose()).scale(0.5);
    let x = us.map(|z| z.re);
    let y = us.map(|z| z.im);
    let (xvals, mut o) = real_symmetric_eig(&x)?;
    for (start, len) in clusters(&xvals) {
        if len < 2 {
            continue;
        }
        let block = o.columns(start, len).into_owned();
        let yb = block.transpose() * &y * &block;
        let (_, rot) = real_symmetric_eig(&yb)?;
        o.columns_mut(start, len).copy_from(&(block * rot));
    }
    let xd = o.transpose() * &x * &o;
    let yd = o.transpose() * &y * &o;
    let mut factor = o.map(re);
    let mut sigma = Vec::with_capacity(n);
    for j in 0..n {
        let theta = yd[(j, j)].atan2(xd[(j, j)]);
        sigma.push(xd[(j, j)].hypot(yd[(j, j)]));
        let phase = C64::from_polar(1.0, -theta / 2.0);
        for i in 0..n {
            factor[(i, j)] *= phase;
        }
    }
    Ok(order_by_dominant_row(factor, sigma))
}

/// Stable reorder of factor columns by the row of their largest component,
/// so diagonal input comes back in its own order.
fn order_by_dominant_row(factor: CMatrix, sigma: Vec<f64>) -> (CMatrix, Vec<f64>) {
    let n = factor.ncols();
    let dominant = |j: usize| {
        let col = factor.column(j);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        col.iter().position(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap_or(0)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| dominant(j));
    let reordered = CMatrix::from_fn(factor.nrows(), n, |i, j| factor[(i, order[j])]);
    (reordered, order.iter().map(|&j| sigma[j]).collect())
}

pub(crate) fn takagi_general(u: &CMatrix, tol: f64) -> Result<(CMatrix, Vec<f64>)> {
    let n = u.nrows();
    let x = u.map(|z| z.re);
    let y = u.map(|z| z.im);
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&x);
    m.view_mut((0, n), (n, n)).copy_from(&(-&y));
    m.view_mut((n, 0), (n, n)).copy_from(&(-&y));
    m.view_mut((n, n), (n, n)).copy_from(&(-&x));
    let (vals, vecs) = real_symmetric_eig(&m)?;
    let top = vals.first().copied().unwrap_or(0.0);
    let cutoff = tol * top.max(0.0);
    let mut factor = CMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (j, &s) in vals.iter().take(n).enumerate() {
        if s <= cutoff {
            break;
        }
        for i in 0..n {
            factor[(i, j)] = c(vecs[(i, j)], vecs[(n + i, j)]);
        }
        sigma.push(s);
    }
    let rank = sigma.len();
    if rank < n {
        // Right singular vectors of the smallest singular values span the
        // null space, which is orthogonal to every positive Takagi vector.
        let (_, v) = svd_full_v(u);
        for (k, j) in (rank..n).enumerate() {
            let mut col = v.column(rank + k).into_owned();
            normalize_phase(col.as_mut_slice());
            factor.column_mut(j).copy_from(&col);
            sigma.push(0.0);
        }
    }
    Ok((factor, sigma))
}

/// Finds a unitary `S` with `Sᵀ U S = 𝒥` for a symmetric unitary `U` of size
/// `2n + m`, as `S = V Q` with `V` the Autonne–Takagi factor and
/// `Q = (⊕ W₂) ⊕ (⊕ (1))`.
pub fn takagi_to_canonical(
    u: &CMatrix,
    n_doublets: usize,
    m_singlets: usize,
    tol: f64,
) -> Result<TakagiResult> {
    let size = ensure_square(u)?;
    if 2 * n_doublets + m_singlets != size {
        return Err(Error::DimensionMismatch { expected: 2 * n_doublets + m_singlets, found: size });
    }
    ensure_finite(u)?;
    let sym = symmetry_defect(u);
    if sym > tol {
        return Err(Error::NotSymmetric { defect: sym });
    }
    let unit = unitarity_defect(u);
    if unit > tol {
        return Err(Error::NotUnitary { defect: unit });
    }
    let v = autonne_takagi(u, tol)?.factor;
    let mut q = CMatrix::zeros(size, size);
    let w = w2();
    for i in 0..n_doublets {
        q.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&w);
    }
    for s in 2 * n_doublets..size {
        q[(s, s)] = ONE;
    }
    let factor = v * q;
    let canonical = canonical_form(n_doublets, m_singlets);
    let residual = (factor.transpose() * u * &factor - &canonical).norm();
    Ok(TakagiResult { factor, canonical, residual })
}

/// Matrix exponential by scaling and squaring with Padé approximants.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    ensure_square(a)?;
    ensure_finite(a)?;
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    Ok(a.exp())
}
