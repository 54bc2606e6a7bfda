//! Finite-dimensional GKSL generators and their superoperators.
//!
//! Heisenberg picture:
//! `ℒ(x) = i[H, x] − ½ Σ_k (L_k† L_k x − 2 L_k† x L_k + x L_k† L_k)`.
//! Schrödinger picture (trace-pairing predual):
//! `ℒ_*(ρ) = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k† L_k, ρ})`.

use crate::error::{Error, Result};
use crate::involution::JumpFamily;
use crate::linalg::{
    ensure_finite, ensure_square, expm, hermitian_defect, hermitian_eig, identity, kron, null_space,
    trace, unvec, vec, CMatrix, Spectrum, C64, I,
};

/// Smallest eigenvalue a state must exceed to count as faithful.
pub const FAITHFUL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Hamiltonian(CMatrix);

impl Hamiltonian {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        ensure_square(&matrix)?;
        ensure_finite(&matrix)?;
        let defect = hermitian_defect(&matrix);
        if defect > tol {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self((&matrix + matrix.adjoint()).scale(0.5)))
    }

    pub fn zero(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Positive semidefinite trace-one operator with its spectral decomposition.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    spectrum: Spectrum,
    faithful: bool,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        ensure_square(&matrix)?;
        ensure_finite(&matrix)?;
        let tr = trace(&matrix);
        if (tr - 1.0).norm() > tol {
            return Err(Error::NotDensity(format!("trace {tr}")));
        }
        let state = Self::from_hermitian(matrix, tol)?;
        let min = state.spectrum.min_eigenvalue();
        if min < -tol {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(state)
    }

    /// Hermitian input only; trace and positivity are not enforced.
    pub(crate) fn from_hermitian(matrix: CMatrix, tol: f64) -> Result<Self> {
        let spectrum = hermitian_eig(&matrix, tol)?;
        let matrix = (&matrix + matrix.adjoint()).scale(0.5);
        let faithful = spectrum.min_eigenvalue() > FAITHFUL_THRESHOLD;
        Ok(Self { matrix, spectrum, faithful })
    }

    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        Self::new(crate::linalg::diag_real(populations), crate::linalg::DEFAULT_TOL)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let p = vec![1.0 / dim as f64; dim];
        Self::diagonal(&p).expect("uniform distribution is a state")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn is_faithful(&self) -> bool {
        self.faithful
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min_eigenvalue()
    }

    /// `ρ^{1/2}`, with numerically negative eigenvalues clamped to zero.
    pub fn sqrt(&self) -> CMatrix {
        self.spectrum.map(|x| x.max(0.0).sqrt())
    }

    pub fn inverse_sqrt(&self) -> Result<CMatrix> {
        self.require_faithful()?;
        Ok(self.spectrum.map(|x| 1.0 / x.sqrt()))
    }

    pub fn require_faithful(&self) -> Result<()> {
        if self.faithful {
            Ok(())
        } else {
            Err(Error::NotFaithful { min_eigenvalue: self.min_eigenvalue() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    Heisenberg,
    Schrodinger,
}

/// A linear map on `d × d` matrices as a `d² × d²` matrix acting on
/// column-stacked vectors.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub matrix: CMatrix,
    pub picture: Picture,
    dim: usize,
}

impl Superoperator {
    pub fn new(matrix: CMatrix, picture: Picture, dim: usize) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: matrix.nrows() });
        }
        Ok(Self { matrix, picture, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        unvec(&(&self.matrix * vec(x)), self.dim)
    }

    /// Largest residual over the matrix-unit basis.
    pub fn distance(&self, other: &Superoperator) -> f64 {
        crate::linalg::max_column_norm(&(&self.matrix - &other.matrix))
    }

    /// Same map in the other picture (adjoint under the trace pairing).
    pub fn predual(&self) -> Superoperator {
        let picture = match self.picture {
            Picture::Heisenberg => Picture::Schrodinger,
            Picture::Schrodinger => Picture::Heisenberg,
        };
        Superoperator { matrix: self.matrix.adjoint(), picture, dim: self.dim }
    }
}

#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    hamiltonian: Hamiltonian,
    jumps: JumpFamily,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: Hamiltonian, jumps: JumpFamily) -> Result<Self> {
        if hamiltonian.dim() != jumps.dim() {
            return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), found: jumps.dim() });
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &JumpFamily {
        &self.jumps
    }

    pub fn with_jumps(&self, jumps: JumpFamily) -> Result<Self> {
        Self::new(self.hamiltonian.clone(), jumps)
    }
}

/// `x ↦ i[H, x]`.
pub fn hamiltonian_superoperator(h: &CMatrix) -> CMatrix {
    let id = identity(h.nrows());
    (kron(&id, h) - kron(&h.transpose(), &id)) * I
}

fn jump_sum(jumps: &JumpFamily) -> CMatrix {
    let d = jumps.dim();
    jumps.operators().iter().fold(CMatrix::zeros(d, d), |acc, l| acc + l.adjoint() * l)
}

fn cp_matrix(jumps: &JumpFamily) -> CMatrix {
    let d2 = jumps.dim() * jumps.dim();
    jumps
        .operators()
        .iter()
        .fold(CMatrix::zeros(d2, d2), |acc, l| acc + kron(&l.transpose(), &l.adjoint()))
}

fn dissipative_matrix(jumps: &JumpFamily) -> CMatrix {
    let id = identity(jumps.dim());
    let n = jump_sum(jumps);
    cp_matrix(jumps) - (kron(&id, &n) + kron(&n.transpose(), &id)).scale(0.5)
}

pub fn heisenberg_superoperator(g: &LindbladGenerator) -> Superoperator {
    let m = hamiltonian_superoperator(g.hamiltonian.matrix()) + dissipative_matrix(&g.jumps);
    Superoperator { matrix: m, picture: Picture::Heisenberg, dim: g.dim() }
}

pub fn schrodinger_superoperator(g: &LindbladGenerator) -> Superoperator {
    let d = g.dim();
    let id = identity(d);
    let h = g.hamiltonian.matrix();
    let n = jump_sum(&g.jumps);
    let mut m = (kron(&id, h) - kron(&h.transpose(), &id)) * (-I);
    for l in g.jumps.operators() {
        m += kron(&l.conjugate(), l);
    }
    m -= (kron(&id, &n) + kron(&n.transpose(), &id)).scale(0.5);
    Superoperator { matrix: m, picture: Picture::Schrodinger, dim: d }
}

/// `𝒟(x) = −½ Σ (L†L x − 2 L† x L + x L†L)`.
pub fn dissipative_part(g: &LindbladGenerator) -> Superoperator {
    Superoperator { matrix: dissipative_matrix(&g.jumps), picture: Picture::Heisenberg, dim: g.dim() }
}

/// `Φ(x) = Σ L† x L`.
pub fn cp_part(g: &LindbladGenerator) -> Superoperator {
    Superoperator { matrix: cp_matrix(&g.jumps), picture: Picture::Heisenberg, dim: g.dim() }
}

fn state_from_null_vector(v: &crate::linalg::CVector, d: usize, tol: f64) -> Option<DensityOperator> {
    let x = unvec(v, d);
    let tr = trace(&x);
    if tr.norm() <= tol {
        return None;
    }
    let x = x / tr;
    let x = (&x + x.adjoint()).scale(0.5);
    let state = DensityOperator::from_hermitian(x, f64::INFINITY).ok()?;
    (state.min_eigenvalue() >= -tol).then_some(state)
}

/// Stationary state from the null space of the Schrödinger superoperator.
pub fn stationary_state(g: &LindbladGenerator, tol: f64) -> Result<DensityOperator> {
    let d = g.dim();
    let ms = schrodinger_superoperator(g).matrix;
    let ns = null_space(&ms, tol);
    match ns.len() {
        0 => Err(Error::NoPositiveStationary),
        1 => state_from_null_vector(&ns[0], d, tol).ok_or(Error::NoPositiveStationary),
        dimension => {
            // Hermitian parts of the basis first, then the projection of the
            // maximally mixed state onto the null space.
            let mut candidates = Vec::new();
            for v in &ns {
                let x = unvec(v, d);
                candidates.push(vec(&(&x + x.adjoint()).scale(0.5)));
                candidates.push(vec(&((&x - x.adjoint()) * C64::new(0.0, -0.5))));
            }
            let mixed = vec(&identity(d)) / C64::from(d as f64);
            let projected = ns.iter().fold(crate::linalg::CVector::zeros(d * d), |acc, v| acc + v * v.dotc(&mixed));
            candidates.push(projected);
            let representative =
                candidates.iter().find_map(|c| state_from_null_vector(c, d, tol)).map(Box::new);
            Err(Error::NonUniqueStationary { dimension, representative })
        }
    }
}

/// `(x, y)_ρ = Tr(ρ^{1/2} x† ρ^{1/2} y)`.
pub fn rho_inner_product(x: &CMatrix, y: &CMatrix, rho: &DensityOperator) -> Result<C64> {
    let d = rho.dim();
    for m in [x, y] {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
        }
    }
    let s = rho.sqrt();
    Ok(trace(&(&s * x.adjoint() * &s * y)))
}

/// Gram matrix `G` with `(x, y)_ρ = vec(x)† G vec(y)`.
pub fn gram_matrix(rho: &DensityOperator) -> CMatrix {
    let s = rho.sqrt();
    kron(&s.conjugate(), &s)
}

/// Adjoint `ℒ'` of the Heisenberg generator under `(·,·)_ρ`,
/// `M' = G⁻¹ M† G`.
pub fn dual_generator(g: &LindbladGenerator, rho: &DensityOperator) -> Result<Superoperator> {
    dual_of(&heisenberg_superoperator(g), rho)
}

pub fn dual_of(m: &Superoperator, rho: &DensityOperator) -> Result<Superoperator> {
    if m.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: rho.dim() });
    }
    let inv = rho.inverse_sqrt()?;
    let gram = gram_matrix(rho);
    let gram_inv = kron(&inv.conjugate(), &inv);
    let matrix = gram_inv * m.matrix.adjoint() * gram;
    Ok(Superoperator { matrix, picture: Picture::Heisenberg, dim: m.dim() })
}

/// `𝒯_{*t}(ρ) = exp(t ℒ_*) ρ`.
pub fn propagate(g: &LindbladGenerator, state: &DensityOperator, t: f64) -> Result<DensityOperator> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and non-negative")));
    }
    if state.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: state.dim() });
    }
    let ms = schrodinger_superoperator(g).matrix;
    let evolved = expm(&(ms * C64::from(t)))? * vec(state.matrix());
    let x = unvec(&evolved, g.dim());
    DensityOperator::from_hermitian((&x + x.adjoint()).scale(0.5), f64::INFINITY)
}
