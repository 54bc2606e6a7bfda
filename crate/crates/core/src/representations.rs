//! Moving between GKSL representations of one generator: unitary mixing,
//! shifts, specialization, and the predicates deciding which mixings keep
//! zero EPR or thermodynamic consistency.
//!
//! Tracelessness is always measured against `ρ₀ = 𝟙/d`.

use crate::error::{Error, Result};
use crate::involution::{InvolutionMatrix, Involution, JumpFamily, TcConstants};
use crate::lindblad::{hamiltonian_superoperator, Hamiltonian, LindbladGenerator, Superoperator};
use crate::linalg::{
    ensure_finite, hermitian_eig, identity, least_squares, max_column_norm, singular_values, trace,
    unitarity_defect, unvec, vec, CMatrix, CVector, C64, I,
};

/// Relative cutoff on the Choi spectrum below which a direction is dropped.
pub const CHOI_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct UnitaryMixing {
    matrix: CMatrix,
}

impl UnitaryMixing {
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        crate::linalg::ensure_square(&matrix)?;
        ensure_finite(&matrix)?;
        let defect = unitarity_defect(&matrix);
        if defect > tol {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: identity(n) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `L'_k = L_k + a_k 𝟙`, `H' = H + (1/2i) Σ (ā_k L_k − a_k L_k†) + b 𝟙`.
#[derive(Debug, Clone)]
pub struct ShiftTransform {
    pub a: Vec<C64>,
    pub b: f64,
}

impl ShiftTransform {
    pub fn zero(n: usize) -> Self {
        Self { a: vec![C64::new(0.0, 0.0); n], b: 0.0 }
    }
}

/// Result of a shift. The Hamiltonian changes, so the output generally
/// leaves the family of representations sharing the input's `H`.
#[derive(Debug, Clone)]
pub struct Shifted {
    pub generator: LindbladGenerator,
    pub hamiltonian_delta: CMatrix,
    pub leaves_fixed_h: bool,
}

/// `L'_k = Σ_ℓ v_{kℓ} L_ℓ` with `H` unchanged. The involution is kept as an
/// index-set structure; TC constants are dropped since mixing need not
/// preserve them.
pub fn apply_mixing(g: &LindbladGenerator, v: &UnitaryMixing) -> Result<LindbladGenerator> {
    let jumps = g.jumps();
    if v.size() != jumps.len() {
        return Err(Error::DimensionMismatch { expected: jumps.len(), found: v.size() });
    }
    let mixed = mix(jumps.operators(), v.matrix(), g.dim());
    g.with_jumps(JumpFamily::new(g.dim(), mixed, jumps.involution().clone())?)
}

fn mix(ops: &[CMatrix], v: &CMatrix, d: usize) -> Vec<CMatrix> {
    (0..v.nrows())
        .map(|k| ops.iter().enumerate().fold(CMatrix::zeros(d, d), |acc, (l, op)| acc + op * v[(k, l)]))
        .collect()
}

pub fn apply_shift(g: &LindbladGenerator, s: &ShiftTransform) -> Result<Shifted> {
    let jumps = g.jumps();
    if s.a.len() != jumps.len() {
        return Err(Error::DimensionMismatch { expected: jumps.len(), found: s.a.len() });
    }
    if !s.b.is_finite() || s.a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let d = g.dim();
    let id = identity(d);
    let mut delta = &id * C64::from(s.b);
    let mut shifted = Vec::with_capacity(jumps.len());
    for (l, &a) in jumps.operators().iter().zip(&s.a) {
        delta += (l * a.conj() - l.adjoint() * a) / (I * 2.0);
        shifted.push(l + &id * a);
    }
    let delta = (&delta + delta.adjoint()).scale(0.5);
    let h = Hamiltonian::new(g.hamiltonian().matrix() + &delta, f64::INFINITY)?;
    let family = JumpFamily::new(d, shifted, jumps.involution().clone())?;
    let leaves_fixed_h = delta.norm() > 0.0;
    Ok(Shifted { generator: LindbladGenerator::new(h, family)?, hamiltonian_delta: delta, leaves_fixed_h })
}

/// Shift coefficients `a_k = −Tr(ρ₀ L_k)` making every jump traceless.
fn traceless_shift(jumps: &JumpFamily) -> ShiftTransform {
    let d = jumps.dim() as f64;
    ShiftTransform { a: jumps.operators().iter().map(|l| -trace(l) / d).collect(), b: 0.0 }
}

#[derive(Debug, Clone)]
pub struct SpecialDiagnostics {
    /// `|Tr(ρ₀ L_k)|` per jump.
    pub traces: Vec<f64>,
    /// Smallest singular value of the stacked `vec(L_k)` rows; `+∞` for an
    /// empty family.
    pub min_singular_value: f64,
    pub traceless: bool,
    pub independent: bool,
}

impl SpecialDiagnostics {
    pub fn is_special(&self) -> bool {
        self.traceless && self.independent
    }
}

fn stacked(ops: &[CMatrix]) -> CMatrix {
    let d2 = ops.first().map_or(0, |l| l.len());
    CMatrix::from_fn(ops.len(), d2, |k, p| ops[k][p])
}

fn min_singular_value(ops: &[CMatrix]) -> f64 {
    if ops.is_empty() {
        return f64::INFINITY;
    }
    let a = stacked(ops);
    if a.nrows() > a.ncols() {
        return 0.0;
    }
    singular_values(&a).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn special_diagnostics(jumps: &JumpFamily, tol: f64) -> SpecialDiagnostics {
    let d = jumps.dim() as f64;
    let traces: Vec<f64> = jumps.operators().iter().map(|l| (trace(l) / d).norm()).collect();
    let min_singular_value = min_singular_value(jumps.operators());
    SpecialDiagnostics {
        traceless: traces.iter().all(|&t| t <= tol),
        independent: min_singular_value > tol,
        traces,
        min_singular_value,
    }
}

pub fn is_special(g: &LindbladGenerator, tol: f64) -> SpecialDiagnostics {
    special_diagnostics(g.jumps(), tol)
}

#[derive(Debug, Clone)]
pub struct SpecialReport {
    pub original_count: usize,
    pub reduced_count: usize,
    /// Set when the input carried doublets or TC constants that could not be
    /// carried over; the output is always all-singlets.
    pub involution_reset: bool,
    /// Choi eigenvalues kept, descending.
    pub weights: Vec<f64>,
}

/// Traceless jump operators spanning the same CP part: eigenvectors of
/// `Σ_k vec(L_k) vec(L_k)†` scaled by `√λ`, for `λ > CHOI_CUTOFF·λ_max`.
fn reduce(ops: &[CMatrix], d: usize) -> Result<(Vec<CMatrix>, Vec<f64>)> {
    let d2 = d * d;
    let mut choi = CMatrix::zeros(d2, d2);
    for l in ops {
        let v = vec(l);
        choi += &v * v.adjoint();
    }
    principal_jumps(&choi, d)
}

fn principal_jumps(choi: &CMatrix, d: usize) -> Result<(Vec<CMatrix>, Vec<f64>)> {
    let spectrum = hermitian_eig(choi, f64::INFINITY)?;
    let lmax = spectrum.max_eigenvalue().max(0.0);
    let mut jumps = Vec::new();
    let mut weights = Vec::new();
    for (j, &lambda) in spectrum.eigenvalues.iter().enumerate() {
        if lmax > 0.0 && lambda > CHOI_CUTOFF * lmax {
            let e: CVector = spectrum.eigenvectors.column(j).into_owned();
            jumps.push(unvec(&e, d) * C64::from(lambda.sqrt()));
            weights.push(lambda);
        }
    }
    Ok((jumps, weights))
}

pub fn make_special(g: &LindbladGenerator, _tol: f64) -> Result<(LindbladGenerator, SpecialReport)> {
    let d = g.dim();
    let jumps = g.jumps();
    let shifted = apply_shift(g, &traceless_shift(jumps))?.generator;
    let (reduced, weights) = reduce(shifted.jumps().operators(), d)?;
    let involution_reset = jumps.involution().n_doublets() > 0 || jumps.tc().is_some();
    let report = SpecialReport {
        original_count: jumps.len(),
        reduced_count: reduced.len(),
        involution_reset,
        weights,
    };
    let out = shifted.with_jumps(JumpFamily::singlets(d, reduced)?)?;
    Ok((out, report))
}

/// Traceless shift that keeps the involution and the TC constants.
/// Fails with [`Error::IdentityInSpan`] when `𝟙 = Σ b_k L_k` with
/// `Σ Tr(ρ₀L_k) b_k = 1`, the case where the shifted family collapses.
pub fn make_special_tc(g: &LindbladGenerator, tol: f64) -> Result<LindbladGenerator> {
    let jumps = g.jumps();
    let Some(tc) = jumps.tc().cloned() else {
        return Err(Error::NotThermodynamicallyConsistent("no TC constants declared".into()));
    };
    if !special_diagnostics(jumps, tol).independent {
        return Err(Error::LinearlyDependent);
    }
    let d = g.dim();
    if !jumps.is_empty() {
        let basis = stacked(jumps.operators()).transpose();
        let target = CMatrix::from_column_slice(d * d, 1, vec(&identity(d)).as_slice());
        let b = least_squares(&basis, &target);
        let in_span = (&basis * &b - &target).norm() <= tol * (d as f64).sqrt();
        if in_span {
            let dot: C64 = jumps.operators().iter().enumerate().map(|(k, l)| trace(l) / d as f64 * b[k]).sum();
            if (dot - 1.0).norm() <= tol.sqrt() {
                return Err(Error::IdentityInSpan);
            }
        }
    }
    let shifted = apply_shift(g, &traceless_shift(jumps))?.generator;
    let family = shifted.jumps().clone().with_tc(tc)?;
    shifted.with_jumps(family)
}

/// `‖vᵀ Δ v − Δ‖ ≤ tol`.
pub fn preserves_zero_epr(v: &UnitaryMixing, delta: &InvolutionMatrix, tol: f64) -> Result<bool> {
    check_size(v, delta)?;
    let m = v.matrix();
    Ok((m.transpose() * &delta.delta * m - &delta.delta).norm() <= tol)
}

/// `‖C vᵀ C̃⁻¹ Δ v − Δ‖ ≤ tol`.
pub fn preserves_tc(
    v: &UnitaryMixing,
    delta: &InvolutionMatrix,
    c: &TcConstants,
    c_new: &TcConstants,
    tol: f64,
) -> Result<bool> {
    check_size(v, delta)?;
    let n = v.size();
    if c.values().len() != n || c_new.values().len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: c.values().len().min(c_new.values().len()) });
    }
    let m = v.matrix();
    let c_new_inv = crate::linalg::diag_real(&c_new.values().iter().map(|x| 1.0 / x).collect::<Vec<_>>());
    let lhs = c.matrix() * m.transpose() * c_new_inv * &delta.delta * m;
    Ok((lhs - &delta.delta).norm() <= tol)
}

/// Whether the two constant families agree as multisets.
pub fn tc_multisets_match(c: &TcConstants, c_new: &TcConstants, tol: f64) -> bool {
    let mut a = c.values().to_vec();
    let mut b = c_new.values().to_vec();
    if a.len() != b.len() {
        return false;
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(1.0))
}

fn check_size(v: &UnitaryMixing, delta: &InvolutionMatrix) -> Result<()> {
    let n = delta.delta.nrows();
    if v.size() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.size() });
    }
    Ok(())
}

/// Hermitian traceless `K` with `M ≈ factor · (x ↦ [K, x])`, and the
/// max-column residual of that fit.
pub fn commutator_preimage(m: &CMatrix, factor: C64, d: usize) -> (CMatrix, f64) {
    let mut k = CMatrix::from_fn(d, d, |i, a| (0..d).map(|b| m[(i + d * b, a + d * b)]).sum::<C64>());
    k /= factor * d as f64;
    let k = (&k + k.adjoint()).scale(0.5);
    let k = &k - identity(d) * (trace(&k) / d as f64);
    // hamiltonian_superoperator(K) is i[K, ·]
    let fitted = hamiltonian_superoperator(&k) * (factor / I);
    let residual = max_column_norm(&(m - fitted));
    (k, residual)
}

/// Special representation of a Heisenberg-picture Lindblad superoperator:
/// traceless jumps from the Choi matrix projected off `vec(𝟙)`, and a
/// traceless Hamiltonian from the remaining commutator.
pub fn representation_from_superoperator(m: &Superoperator, tol: f64) -> Result<LindbladGenerator> {
    let d = m.dim();
    let d2 = d * d;
    let heis = match m.picture {
        crate::lindblad::Picture::Heisenberg => m.clone(),
        crate::lindblad::Picture::Schrodinger => m.predual(),
    };
    let ms = heis.matrix.adjoint();
    let choi = CMatrix::from_fn(d2, d2, |p, q| {
        let (a, i) = (p % d, p / d);
        let (b, j) = (q % d, q / d);
        ms[(a + d * b, i + d * j)]
    });
    let e = vec(&identity(d));
    let proj = CMatrix::identity(d2, d2) - &e * e.adjoint() / C64::from(d as f64);
    let pcp = &proj * choi * &proj;
    let pcp = (&pcp + pcp.adjoint()).scale(0.5);
    let spectrum = hermitian_eig(&pcp, f64::INFINITY)?;
    let scale = spectrum.max_eigenvalue().abs().max(1.0);
    if spectrum.min_eigenvalue() < -tol * scale {
        return Err(Error::NotLindblad(format!(
            "projected Choi matrix has eigenvalue {:e}",
            spectrum.min_eigenvalue()
        )));
    }
    let (jumps, _) = principal_jumps(&pcp, d)?;
    let family = JumpFamily::singlets(d, jumps)?;
    let dissipative = crate::lindblad::dissipative_part(&LindbladGenerator::new(Hamiltonian::zero(d), family.clone())?);
    let (h, residual) = commutator_preimage(&(&heis.matrix - dissipative.matrix), I, d);
    if residual > tol * heis.matrix.norm().max(1.0) {
        return Err(Error::NotLindblad(format!("Hamiltonian remainder is not a commutator (residual {residual:e})")));
    }
    LindbladGenerator::new(Hamiltonian::new(h, f64::INFINITY)?, family)
}

/// Re-declares the involution on a family; TC constants are dropped.
pub fn redeclare_involution(g: &LindbladGenerator, inv: Involution) -> Result<LindbladGenerator> {
    g.with_jumps(g.jumps().clone().with_involution(inv)?)
}
