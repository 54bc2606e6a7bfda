//! Index-set involutions, the involution matrix `Δ`, its canonical form `𝒥`
//! and thermodynamic-consistency (TC) constants.

use crate::error::{Error, Result};
use crate::linalg::{canonical_form, ensure_finite, ensure_square, trace, CMatrix, C64, ONE};

/// A self-inverse map `k ↦ k*` on `{0, …, size−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Involution {
    map: Vec<usize>,
}

/// One orbit of an involution. For singlets `partner == representative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Orbit {
    pub representative: usize,
    pub partner: usize,
}

impl Orbit {
    pub fn is_doublet(&self) -> bool {
        self.representative != self.partner
    }

    /// `θ = 1` for doublets and `1/2` for singlets.
    pub fn weight(&self) -> f64 {
        if self.is_doublet() {
            1.0
        } else {
            0.5
        }
    }
}

impl Involution {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        for (k, &p) in map.iter().enumerate() {
            if p >= n {
                return Err(Error::NotInvolution(format!("index {k} maps to {p}, outside 0..{n}")));
            }
            if map[p] != k {
                return Err(Error::NotInvolution(format!(
                    "{k} ↦ {p} but {p} ↦ {}",
                    map[p]
                )));
            }
        }
        Ok(Self { map })
    }

    /// All indices fixed.
    pub fn singlets(size: usize) -> Self {
        Self { map: (0..size).collect() }
    }

    /// Pairs the listed indices; everything else is a singlet.
    pub fn from_pairs(size: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut map: Vec<usize> = (0..size).collect();
        let mut seen = vec![false; size];
        for &(a, b) in pairs {
            if a >= size || b >= size || a == b || seen[a] || seen[b] {
                return Err(Error::NotInvolution(format!("invalid pair ({a}, {b})")));
            }
            seen[a] = true;
            seen[b] = true;
            map[a] = b;
            map[b] = a;
        }
        Ok(Self { map })
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn partner(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_singlet(&self, k: usize) -> bool {
        self.map[k] == k
    }

    /// Orbits ordered by their smallest index.
    pub fn orbits(&self) -> Vec<Orbit> {
        (0..self.size())
            .filter(|&k| self.map[k] >= k)
            .map(|k| Orbit { representative: k, partner: self.map[k] })
            .collect()
    }

    pub fn n_doublets(&self) -> usize {
        self.map.iter().enumerate().filter(|(k, &p)| p > *k).count()
    }

    pub fn n_singlets(&self) -> usize {
        self.map.iter().enumerate().filter(|(k, &p)| p == *k).count()
    }
}

/// `Δ_{kℓ} = δ_{k*ℓ}` together with the permutation `P` such that
/// `Δ = P 𝒥 Pᵀ`.
#[derive(Debug, Clone)]
pub struct InvolutionMatrix {
    pub delta: CMatrix,
    pub permutation: CMatrix,
    pub canonical: CMatrix,
    pub n_doublets: usize,
    pub m_singlets: usize,
    /// `slots[k]` is the canonical position of original index `k`.
    pub slots: Vec<usize>,
}

impl InvolutionMatrix {
    /// Reads the involution back from `P` and `𝒥`.
    pub fn to_involution(&self) -> Involution {
        let n = self.slots.len();
        let mut original_at = vec![0; n];
        for (k, &s) in self.slots.iter().enumerate() {
            original_at[s] = k;
        }
        let map = (0..n)
            .map(|k| {
                let s = self.slots[k];
                let partner_slot =
                    (0..n).find(|&t| self.canonical[(s, t)] == ONE).expect("𝒥 is a permutation");
                original_at[partner_slot]
            })
            .collect();
        Involution { map }
    }
}

/// Doublets occupy the leading canonical slots in order of their smaller
/// index, which takes the odd (first) slot of the pair; singlets follow in
/// index order.
pub fn build_involution_matrix(inv: &Involution) -> InvolutionMatrix {
    let n = inv.size();
    let mut slots = vec![0; n];
    let mut next = 0;
    for orbit in inv.orbits().iter().filter(|o| o.is_doublet()) {
        slots[orbit.representative] = next;
        slots[orbit.partner] = next + 1;
        next += 2;
    }
    for k in (0..n).filter(|&k| inv.is_singlet(k)) {
        slots[k] = next;
        next += 1;
    }
    let mut delta = CMatrix::zeros(n, n);
    let mut permutation = CMatrix::zeros(n, n);
    for k in 0..n {
        delta[(k, inv.partner(k))] = ONE;
        permutation[(k, slots[k])] = ONE;
    }
    let n_doublets = inv.n_doublets();
    let m_singlets = inv.n_singlets();
    InvolutionMatrix {
        delta,
        permutation,
        canonical: canonical_form(n_doublets, m_singlets),
        n_doublets,
        m_singlets,
        slots,
    }
}

/// Positive constants `c_k` with `c_k c_{k*} = 1`, for the relation
/// `L_{k*} = c_k L_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct TcConstants {
    values: Vec<f64>,
}

impl TcConstants {
    pub fn new(values: Vec<f64>, inv: &Involution, tol: f64) -> Result<Self> {
        if values.len() != inv.size() {
            return Err(Error::DimensionMismatch { expected: inv.size(), found: values.len() });
        }
        for (k, &c) in values.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::NotThermodynamicallyConsistent(format!("c[{k}] = {c} is not positive")));
            }
            let product = c * values[inv.partner(k)];
            if (product - 1.0).abs() > tol {
                return Err(Error::NotThermodynamicallyConsistent(format!(
                    "c[{k}]·c[{}] = {product}",
                    inv.partner(k)
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `C = diag(c_k)`.
    pub fn matrix(&self) -> CMatrix {
        crate::linalg::diag_real(&self.values)
    }
}

/// Ordered jump operators indexed by an involution, with optional TC constants.
#[derive(Debug, Clone)]
pub struct JumpFamily {
    dim: usize,
    operators: Vec<CMatrix>,
    involution: Involution,
    tc: Option<TcConstants>,
}

impl JumpFamily {
    pub fn new(dim: usize, operators: Vec<CMatrix>, involution: Involution) -> Result<Self> {
        if operators.len() != involution.size() {
            return Err(Error::DimensionMismatch { expected: operators.len(), found: involution.size() });
        }
        for op in &operators {
            let d = ensure_square(op)?;
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: d });
            }
            ensure_finite(op)?;
        }
        Ok(Self { dim, operators, involution, tc: None })
    }

    pub fn singlets(dim: usize, operators: Vec<CMatrix>) -> Result<Self> {
        let n = operators.len();
        Self::new(dim, operators, Involution::singlets(n))
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, operators: vec![], involution: Involution::singlets(0), tc: None }
    }

    pub fn with_tc(mut self, tc: TcConstants) -> Result<Self> {
        if tc.values.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: tc.values.len() });
        }
        self.tc = Some(tc);
        Ok(self)
    }

    pub fn with_involution(mut self, involution: Involution) -> Result<Self> {
        if involution.size() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: involution.size() });
        }
        self.involution = involution;
        self.tc = None;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn involution(&self) -> &Involution {
        &self.involution
    }

    pub fn tc(&self) -> Option<&TcConstants> {
        self.tc.as_ref()
    }
}

#[derive(Debug, Clone)]
pub struct TcEntry {
    pub index: usize,
    pub partner: usize,
    /// Least-squares scalar minimizing `‖L_{k*} − c L_k†‖`.
    pub c: C64,
    pub residual: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct TcReport {
    pub entries: Vec<TcEntry>,
    /// Largest `|c_k c_{k*} − 1|` over the fitted scalars.
    pub consistency_defect: f64,
    pub constants: Option<TcConstants>,
}

impl TcReport {
    pub fn success(&self) -> bool {
        self.constants.is_some()
    }
}

/// Fits `L_{k*} ≈ c_k L_k†` per index and accepts when every residual is at
/// most `tol·‖L_k‖`, every `c_k` is real-positive and `c_k c_{k*} = 1`.
pub fn detect_tc(jumps: &JumpFamily, tol: f64) -> TcReport {
    let inv = jumps.involution();
    let ops = jumps.operators();
    let entries: Vec<TcEntry> = (0..jumps.len())
        .map(|k| {
            let p = inv.partner(k);
            let l = &ops[k];
            let target = &ops[p];
            let norm_sq = l.norm_squared();
            let c = if norm_sq > 0.0 { trace(&(l * target)) / norm_sq } else { ONE };
            let residual = (target - l.adjoint() * c).norm();
            let accepted =
                residual <= tol * l.norm().max(f64::MIN_POSITIVE) && c.im.abs() <= tol && c.re > 0.0;
            TcEntry { index: k, partner: p, c, residual, accepted }
        })
        .collect();
    let consistency_defect = entries
        .iter()
        .map(|e| (e.c * entries[e.partner].c - ONE).norm())
        .fold(0.0, f64::max);
    let constants = if entries.iter().all(|e| e.accepted) && consistency_defect <= tol {
        Some(TcConstants { values: entries.iter().map(|e| e.c.re).collect() })
    } else {
        None
    };
    TcReport { entries, consistency_defect, constants }
}
