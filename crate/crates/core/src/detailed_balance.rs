//! Deciding standard quantum detailed balance and building its witnesses.
//!
//! SQDB holds iff, in a special representation, `ρ^{1/2} L_k† = Σ_ℓ u_{kℓ}
//! L_ℓ ρ^{1/2}` for a symmetric unitary `u`. Since the `L_ℓ ρ^{1/2}` are
//! linearly independent, `u` is the unique least-squares solution and the
//! decision reduces to three residuals.

use crate::entropy::{quantum_epr, EprReport};
use crate::error::{Error, Result};
use crate::involution::{build_involution_matrix, Involution, JumpFamily};
use crate::lindblad::{
    dissipative_part, dual_generator, gram_matrix, hamiltonian_superoperator, heisenberg_superoperator,
    stationary_state, DensityOperator, LindbladGenerator,
};
use crate::linalg::{
    commutator, identity, least_squares, max_column_norm, symmetry_defect, takagi_to_canonical,
    unitarity_defect, vec, CMatrix, C64, I,
};
use crate::representations::{
    commutator_preimage, make_special, representation_from_superoperator, special_diagnostics,
    UnitaryMixing,
};

#[derive(Debug, Clone)]
pub struct SqdbCertificate {
    pub u: CMatrix,
    /// Largest column residual of the linear solve.
    pub solve_residual: f64,
    pub symmetry_defect: f64,
    pub unitarity_defect: f64,
    /// Each defect is compared against `tol · scale`.
    pub scale: f64,
    /// Traceless `K` with `ℒ − ℒ' = 2i[K, ·]`, present when the verdict is
    /// positive and the fit meets the tolerance.
    pub k_operator: Option<CMatrix>,
    /// Max-column residual of the `K` fit, when attempted.
    pub k_residual: Option<f64>,
    pub verdict: bool,
}

/// Solves `ρ^{1/2} L_k† = Σ_ℓ u_{kℓ} L_ℓ ρ^{1/2}` for `u` row by row.
pub fn solve_sqdb_u(rho: &DensityOperator, jumps: &JumpFamily, tol: f64) -> Result<SqdbCertificate> {
    rho.require_faithful()?;
    if jumps.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: jumps.dim() });
    }
    let diag = special_diagnostics(jumps, tol);
    if !diag.is_special() {
        return Err(Error::NotSpecial(format!(
            "max |Tr(ρ₀L)| = {:e}, smallest singular value = {:e}",
            diag.traces.iter().copied().fold(0.0, f64::max),
            diag.min_singular_value
        )));
    }
    let s = rho.sqrt();
    let ops = jumps.operators();
    let n = ops.len();
    let d2 = rho.dim() * rho.dim();
    let basis = CMatrix::from_fn(d2, n, |p, l| vec(&(&ops[l] * &s))[p]);
    let targets = CMatrix::from_fn(d2, n, |p, k| vec(&(&s * ops[k].adjoint()))[p]);
    let coeffs = least_squares(&basis, &targets);
    let solve_residual = max_column_norm(&(&basis * &coeffs - &targets));
    let u = coeffs.transpose();
    let max_l = ops.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let scale = (s.norm() * max_l).max(1.0);
    let symmetry_defect = symmetry_defect(&u);
    let unitarity_defect = unitarity_defect(&u);
    let verdict = [solve_residual, symmetry_defect, unitarity_defect].iter().all(|&x| x <= tol * scale);
    Ok(SqdbCertificate {
        u,
        solve_residual,
        symmetry_defect,
        unitarity_defect,
        scale,
        k_operator: None,
        k_residual: None,
        verdict,
    })
}

/// Everything `sqdb_check` computed along the way.
#[derive(Debug, Clone)]
pub struct SqdbOutcome {
    pub certificate: SqdbCertificate,
    pub state: DensityOperator,
    /// The special representation `u` refers to: the input itself when it
    /// is already special, otherwise its specialization.
    pub representation: LindbladGenerator,
    pub specialized: bool,
}

pub fn sqdb_check(g: &LindbladGenerator, tol: f64) -> Result<SqdbOutcome> {
    let state = stationary_state(g, tol)?;
    state.require_faithful()?;
    let (representation, specialized) = special_form(g, tol)?;
    let mut certificate = solve_sqdb_u(&state, representation.jumps(), tol)?;
    if certificate.verdict {
        let m = heisenberg_superoperator(&representation);
        let dual = dual_generator(&representation, &state)?;
        let (k, residual) = commutator_preimage(&(&m.matrix - dual.matrix), I * 2.0, g.dim());
        certificate.k_residual = Some(residual);
        if residual <= tol * certificate.scale.max(m.matrix.norm()) {
            certificate.k_operator = Some(k);
        }
    }
    Ok(SqdbOutcome { certificate, state, representation, specialized })
}

fn special_form(g: &LindbladGenerator, tol: f64) -> Result<(LindbladGenerator, bool)> {
    if special_diagnostics(g.jumps(), tol).is_special() {
        Ok((g.clone(), false))
    } else {
        Ok((make_special(g, tol)?.0, true))
    }
}

#[derive(Debug, Clone)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    /// `max |(y, 𝒟x)_ρ − (𝒟y, x)_ρ|` over matrix units.
    pub asymmetry: f64,
    /// `‖[H, ρ]‖` for the Hamiltonian of the representation used.
    pub commutator_defect: f64,
    /// Symmetric dissipative part implies SQDB with `K = H`.
    pub sqdb: bool,
    pub k_operator: Option<CMatrix>,
}

/// Checks whether the dissipative part of the special form of `g` is
/// symmetric for `(·,·)_ρ`.
pub fn dissipative_symmetry_check(g: &LindbladGenerator, rho: &DensityOperator, tol: f64) -> Result<SymmetryCheck> {
    rho.require_faithful()?;
    if rho.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: rho.dim() });
    }
    let (rep, _) = special_form(g, tol)?;
    let d = dissipative_part(&rep).matrix;
    let gram = gram_matrix(rho);
    let diff = &gram * &d - d.adjoint() * &gram;
    let asymmetry = diff.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let symmetric = asymmetry <= tol * d.norm().max(1.0);
    let h = rep.hamiltonian().matrix();
    let commutator_defect = commutator(h, rho.matrix()).norm();
    let sqdb = symmetric && commutator_defect <= tol * h.norm().max(1.0);
    let k_operator = sqdb.then(|| {
        let dim = g.dim();
        h - identity(dim) * (crate::linalg::trace(h) / dim as f64)
    });
    Ok(SymmetryCheck { symmetric, asymmetry, commutator_defect, sqdb, k_operator })
}

#[derive(Debug, Clone)]
pub struct DifferenceCheck {
    pub holds: bool,
    /// `max_x ‖(𝒟 − 𝒟₁)(x) − 4i[K, x]‖` over matrix units.
    pub defect: f64,
    /// `max_x ‖(𝒟 − 𝒟₁)(x)‖`.
    pub difference: f64,
    /// `max_x ‖4i[K, x]‖`.
    pub predicted: f64,
    pub k_operator: CMatrix,
}

/// Compares `𝒟 − 𝒟₁` with `4i[K, ·]`, where `𝒟` and `𝒟₁` are the
/// dissipative parts of special representations of `ℒ` and its dual `ℒ'`.
pub fn dissipative_difference_check(g: &LindbladGenerator, tol: f64) -> Result<DifferenceCheck> {
    let outcome = sqdb_check(g, tol)?;
    if !outcome.certificate.verdict {
        return Err(Error::SqdbRequired);
    }
    let k = outcome.certificate.k_operator.clone().ok_or(Error::SqdbRequired)?;
    let rep = &outcome.representation;
    let dual = dual_generator(rep, &outcome.state)?;
    let dual_rep = representation_from_superoperator(&dual, tol.max(1e-9))?;
    let diff = dissipative_part(rep).matrix - dissipative_part(&dual_rep).matrix;
    let predicted = hamiltonian_superoperator(&k) * C64::from(4.0);
    let defect = max_column_norm(&(&diff - &predicted));
    Ok(DifferenceCheck {
        holds: defect <= tol,
        defect,
        difference: max_column_norm(&diff),
        predicted: max_column_norm(&predicted),
        k_operator: k,
    })
}

#[derive(Debug, Clone)]
pub struct ZeroEprRepresentation {
    /// Special representation with jumps `J = v† L` and the requested
    /// involution.
    pub generator: LindbladGenerator,
    /// `v = S Pᵀ`, so that `L_k = Σ_a v_{ka} J_a`.
    pub mixing: UnitaryMixing,
    pub certificate: SqdbCertificate,
    pub state: DensityOperator,
    /// `max_k ‖ρ^{1/2} J_k† − J_{k*} ρ^{1/2}‖`.
    pub relation_residual: f64,
    pub takagi_residual: f64,
    /// Max-column distance between the Heisenberg superoperators of the
    /// input and the output.
    pub superoperator_residual: f64,
    pub epr: EprReport,
}

/// Builds a special representation with vanishing EPR for the involution
/// `inv` on its jump indices.
pub fn construct_zero_epr_representation(
    g: &LindbladGenerator,
    inv: &Involution,
    tol: f64,
) -> Result<ZeroEprRepresentation> {
    let outcome = sqdb_check(g, tol)?;
    let cert = outcome.certificate;
    if !cert.verdict {
        return Err(Error::SqdbRequired);
    }
    let rep = outcome.representation;
    let n = rep.jumps().len();
    if inv.size() != n {
        return Err(Error::DimensionMismatch { expected: n, found: inv.size() });
    }
    let im = build_involution_matrix(inv);
    let u = (&cert.u + cert.u.transpose()).scale(0.5);
    let takagi = takagi_to_canonical(&u, im.n_doublets, im.m_singlets, tol * cert.scale)?;
    let v = &takagi.factor * im.permutation.transpose();
    let d = g.dim();
    let ops = rep.jumps().operators();
    let jumps: Vec<CMatrix> = (0..n)
        .map(|a| (0..n).fold(CMatrix::zeros(d, d), |acc, k| acc + &ops[k] * v[(k, a)].conj()))
        .collect();
    let family = JumpFamily::new(d, jumps, inv.clone())?;
    let generator = rep.with_jumps(family)?;

    let s = outcome.state.sqrt();
    let js = generator.jumps().operators();
    let relation_residual = (0..n)
        .map(|k| (&s * js[k].adjoint() - &js[inv.partner(k)] * &s).norm())
        .fold(0.0, f64::max);
    let superoperator_residual = heisenberg_superoperator(g).distance(&heisenberg_superoperator(&generator));
    let epr = quantum_epr(&outcome.state, generator.jumps())?;
    Ok(ZeroEprRepresentation {
        generator,
        mixing: UnitaryMixing::new(v, tol.max(1e-9) * n.max(1) as f64)?,
        certificate: cert,
        state: outcome.state,
        relation_residual,
        takagi_residual: takagi.residual,
        superoperator_residual,
        epr,
    })
}
