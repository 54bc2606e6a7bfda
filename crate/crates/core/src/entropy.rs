//! Entropy production rates: the quantum rate at an invariant state, the
//! classical master-equation rate, and the embedding of a classical chain
//! as a Lindblad generator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::involution::{Involution, JumpFamily, TcConstants};
use crate::lindblad::{DensityOperator, Hamiltonian, LindbladGenerator};
use crate::linalg::{matrix_unit, null_space, re, CMatrix, DIAGONAL_CUTOFF};

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTerm {
    pub representative: usize,
    pub partner: usize,
    /// 1 for doublets, ½ for singlets.
    pub weight: f64,
    /// `θ Σ |x − y|`.
    pub flux: f64,
    /// `contribution / flux`; zero when there is no flux.
    pub force: f64,
    pub contribution: f64,
    pub infinite: bool,
}

#[derive(Debug, Clone)]
pub struct EprReport {
    pub sigma: f64,
    pub orbit_terms: Vec<OrbitTerm>,
    pub infinite: bool,
    pub zero_threshold_used: f64,
    /// Eigenbasis of ρ the rates were evaluated in (quantum reports only).
    pub basis: Option<CMatrix>,
}

impl EprReport {
    pub fn is_zero(&self, tol: f64) -> bool {
        !self.infinite && self.sigma <= tol
    }
}

/// One `(x − y) ln(x/y)` summand under the `0 ln(0/0) = 0` convention:
/// returns `None` when exactly one side vanishes.
fn summand(x: f64, y: f64, zero: f64) -> Option<f64> {
    match (x <= zero, y <= zero) {
        (true, true) => Some(0.0),
        (false, false) => Some((x - y) * (x / y).ln()),
        _ => None,
    }
}

fn orbit_term(representative: usize, partner: usize, weight: f64, pairs: &[(f64, f64)], zero: f64) -> OrbitTerm {
    let mut sum = 0.0;
    let mut flux = 0.0;
    let mut infinite = false;
    for &(x, y) in pairs {
        flux += (x - y).abs();
        match summand(x, y, zero) {
            Some(s) => sum += s,
            None => infinite = true,
        }
    }
    let flux = weight * flux;
    let contribution = if infinite { f64::INFINITY } else { weight * sum };
    let force = if infinite {
        f64::INFINITY
    } else if flux > 0.0 {
        contribution / flux
    } else {
        0.0
    };
    OrbitTerm { representative, partner, weight, flux, force, contribution, infinite }
}

fn finish(orbit_terms: Vec<OrbitTerm>, zero: f64, basis: Option<CMatrix>) -> EprReport {
    let infinite = orbit_terms.iter().any(|t| t.infinite);
    let sigma = if infinite { f64::INFINITY } else { orbit_terms.iter().map(|t| t.contribution).sum() };
    EprReport { sigma, orbit_terms, infinite, zero_threshold_used: zero, basis }
}

/// Quantum EPR in the orbit-reduced form: for each orbit `{k, k*}` with
/// representative `k`, `θ_k Σ_{i,j} (x − y) ln(x/y)` where
/// `x = ρ_i w^k_{ji}`, `y = ρ_j w^{k*}_{ij}` and `w^k_{ij} = |(e_i, L_k e_j)|²`
/// in the eigenbasis of ρ.
pub fn quantum_epr(rho: &DensityOperator, jumps: &JumpFamily) -> Result<EprReport> {
    let d = rho.dim();
    if jumps.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: jumps.dim() });
    }
    let spectrum = rho.spectrum();
    let v = &spectrum.eigenvectors;
    let p: Vec<f64> = spectrum.eigenvalues.iter().map(|x| x.max(0.0)).collect();
    let w: Vec<DMatrix<f64>> =
        jumps.operators().iter().map(|l| (v.adjoint() * l * v).map(|z| z.norm_sqr())).collect();
    let mut scale: f64 = 0.0;
    for wk in &w {
        for i in 0..d {
            for j in 0..d {
                scale = scale.max(p[i] * wk[(j, i)]);
            }
        }
    }
    let zero = DIAGONAL_CUTOFF * scale;
    let inv = jumps.involution();
    let terms = inv
        .orbits()
        .iter()
        .map(|orbit| {
            let (k, ks) = (orbit.representative, orbit.partner);
            let pairs: Vec<(f64, f64)> = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| (p[i] * w[k][(j, i)], p[j] * w[ks][(i, j)]))
                .collect();
            orbit_term(k, ks, orbit.weight(), &pairs, zero)
        })
        .collect();
    Ok(finish(terms, zero, Some(v.clone())))
}

/// Continuous-time Markov chain with `W(i, j)` the rate `j → i`. Diagonal
/// input is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalChain {
    rates: DMatrix<f64>,
}

impl ClassicalChain {
    pub fn new(mut rates: DMatrix<f64>) -> Result<Self> {
        if rates.nrows() != rates.ncols() {
            return Err(Error::DimensionMismatch { expected: rates.nrows(), found: rates.ncols() });
        }
        if rates.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        for i in 0..rates.nrows() {
            rates[(i, i)] = 0.0;
        }
        if let Some(x) = rates.iter().find(|&&x| x < 0.0) {
            return Err(Error::InvalidArgument(format!("negative rate {x}")));
        }
        Ok(Self { rates })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn size(&self) -> usize {
        self.rates.nrows()
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    /// `L` with `L(i,i) = −Σ_k W(k,i)`; columns sum to zero.
    pub fn generator(&self) -> DMatrix<f64> {
        let mut l = self.rates.clone();
        for i in 0..self.size() {
            l[(i, i)] = -self.rates.column(i).sum();
        }
        l
    }
}

fn check_distribution(chain: &ClassicalChain, pi: &[f64], tol: f64) -> Result<()> {
    if pi.len() != chain.size() {
        return Err(Error::DimensionMismatch { expected: chain.size(), found: pi.len() });
    }
    if let Some(x) = pi.iter().find(|x| !x.is_finite() || **x < -tol) {
        return Err(Error::NotDistribution(format!("entry {x}")));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::NotDistribution(format!("sums to {total}")));
    }
    Ok(())
}

/// `σ = ½ Σ_{i,j} [W(i,j)π_j − W(j,i)π_i] ln(W(i,j)π_j / W(j,i)π_i)`,
/// reported per unordered pair `{i, j}`.
pub fn classical_epr(chain: &ClassicalChain, pi: &[f64], tol: f64) -> Result<EprReport> {
    check_distribution(chain, pi, tol)?;
    let n = chain.size();
    let w = chain.rates();
    let flow = |i: usize, j: usize| w[(i, j)] * pi[j].max(0.0);
    let scale = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| flow(i, j)).fold(0.0, f64::max);
    let zero = DIAGONAL_CUTOFF * scale;
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            terms.push(orbit_term(i, j, 1.0, &[(flow(i, j), flow(j, i))], zero));
        }
    }
    Ok(finish(terms, zero, None))
}

pub fn classical_detailed_balance(chain: &ClassicalChain, pi: &[f64], tol: f64) -> Result<bool> {
    check_distribution(chain, pi, tol)?;
    let n = chain.size();
    let w = chain.rates();
    let defect = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (w[(i, j)] * pi[j] - w[(j, i)] * pi[i]).abs())
        .fold(0.0, f64::max);
    Ok(defect <= tol)
}

/// The unique distribution with `Lπ = 0`.
pub fn classical_stationary(chain: &ClassicalChain, tol: f64) -> Result<Vec<f64>> {
    let l = chain.generator().map(re);
    let ns = null_space(&l, tol);
    match ns.len() {
        1 => {
            let v = &ns[0];
            let total: f64 = v.iter().map(|z| z.re).sum();
            if total.abs() <= tol {
                return Err(Error::NoPositiveStationary);
            }
            let pi: Vec<f64> = v.iter().map(|z| z.re / total).collect();
            if pi.iter().any(|&x| x < -tol) {
                return Err(Error::NoPositiveStationary);
            }
            let pi: Vec<f64> = pi.iter().map(|x| x.max(0.0)).collect();
            let total: f64 = pi.iter().sum();
            Ok(pi.into_iter().map(|x| x / total).collect())
        }
        0 => Err(Error::NoPositiveStationary),
        dimension => Err(Error::NonUniqueStationary { dimension, representative: None }),
    }
}

/// Ordered pairs `(i, j)` with `W(i, j) > 0`, in row-major order: the labels
/// of the embedded jump operators.
pub fn classical_jump_pairs(chain: &ClassicalChain) -> Vec<(usize, usize)> {
    let n = chain.size();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && chain.rates()[(i, j)] > 0.0)
        .collect()
}

/// `H = 0`, one jump `√W(i,j) |i⟩⟨j|` per positive rate, `(i,j) ↔ (j,i)`
/// paired when both rates are positive. TC constants
/// `c_(i,j) = √(W(j,i)/W(i,j))` are attached when every jump is paired.
pub fn embed_classical_chain(chain: &ClassicalChain) -> Result<LindbladGenerator> {
    let n = chain.size();
    let w = chain.rates();
    let pairs = classical_jump_pairs(chain);
    let index = |p: (usize, usize)| pairs.iter().position(|&q| q == p);
    let map: Vec<usize> = pairs.iter().enumerate().map(|(k, &(i, j))| index((j, i)).unwrap_or(k)).collect();
    let inv = Involution::new(map)?;
    let ops = pairs.iter().map(|&(i, j)| matrix_unit(n, i, j) * re(w[(i, j)].sqrt())).collect();
    let mut jumps = JumpFamily::new(n, ops, inv.clone())?;
    if inv.n_singlets() == 0 && !pairs.is_empty() {
        let values = pairs.iter().map(|&(i, j)| (w[(j, i)] / w[(i, j)]).sqrt()).collect();
        jumps = jumps.with_tc(TcConstants::new(values, &inv, 1e-12)?)?;
    }
    LindbladGenerator::new(Hamiltonian::zero(n), jumps)
}
