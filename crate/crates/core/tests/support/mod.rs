//! Random corpora and independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sqdb_core::entropy::{embed_classical_chain, ClassicalChain};
use sqdb_core::involution::{Involution, JumpFamily};
use sqdb_core::lindblad::{DensityOperator, Hamiltonian, LindbladGenerator};
use sqdb_core::linalg::{c, diag_real, matrix_unit, pauli_z, re, sigma_minus, sigma_plus, CMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), gaussian(rng)))
}

pub fn real_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let z = DMatrix::<f64>::from_fn(n, n, |_, _| gaussian(rng));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DMatrix::from_diagonal(&r.diagonal().map(|x| if x < 0.0 { -1.0 } else { 1.0 }));
    (q * signs).map(re)
}

/// Haar-distributed unitary via QR with the phase of `R`'s diagonal removed.
pub fn haar_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let qr = complex_gaussian(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = CMatrix::from_diagonal(&r.diagonal().map(|z| if z.norm() > 0.0 { z / z.norm() } else { re(1.0) }));
    q * phases
}

pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = complex_gaussian(rng, n, n);
    (&a + a.adjoint()).scale(0.5)
}

pub fn state(rng: &mut ChaCha8Rng, n: usize) -> DensityOperator {
    let a = complex_gaussian(rng, n, n);
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityOperator::new(m / tr, 1e-9).unwrap()
}

pub fn generator(rng: &mut ChaCha8Rng, d: usize, k: usize) -> LindbladGenerator {
    let h = Hamiltonian::new(hermitian(rng, d), 1e-9).unwrap();
    let ops = (0..k).map(|_| complex_gaussian(rng, d, d) * re(0.5)).collect();
    LindbladGenerator::new(h, JumpFamily::singlets(d, ops).unwrap()).unwrap()
}

fn positive_probabilities(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// `W(i,j) = s_{ij} π_i` with symmetric `s`, so `W(i,j)π_j = W(j,i)π_i`.
pub fn detailed_balance_chain(rng: &mut ChaCha8Rng, n: usize) -> (ClassicalChain, Vec<f64>) {
    let pi = positive_probabilities(rng, n);
    let mut s = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            // keep the ring edges so the chain stays irreducible
            let keep = j == i + 1 || rng.random_bool(0.6);
            let v = if keep { rng.random_range(0.1..2.0) } else { 0.0 };
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let w = DMatrix::from_fn(n, n, |i, j| s[(i, j)] * pi[i]);
    (ClassicalChain::new(w).unwrap(), pi)
}

/// Random irreducible chain; with `one_sided`, the ring `i → i+1` carries
/// no reverse rate.
pub fn random_chain(rng: &mut ChaCha8Rng, n: usize, one_sided: bool) -> ClassicalChain {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(0.5) {
                w[(i, j)] = rng.random_range(0.1..3.0);
            }
        }
    }
    for i in 0..n {
        let next = (i + 1) % n;
        w[(next, i)] = rng.random_range(0.5..3.0);
        if one_sided && n > 1 {
            w[(i, next)] = 0.0;
        }
    }
    ClassicalChain::new(w).unwrap()
}

/// Ring with rate `a` for `i → i+1` and `b` for the reverse.
pub fn cycle(n: usize, a: f64, b: f64) -> ClassicalChain {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let next = (i + 1) % n;
        w[(next, i)] += a;
        w[(i, next)] += b;
    }
    ClassicalChain::new(w).unwrap()
}

/// `H = (ω/2)σz`, jumps `(√γ↓ σ₋, √γ↑ σ₊)` paired.
pub fn thermal_qubit(down: f64, up: f64, omega: f64) -> LindbladGenerator {
    let jumps = JumpFamily::new(
        2,
        vec![sigma_minus() * re(down.sqrt()), sigma_plus() * re(up.sqrt())],
        Involution::new(vec![1, 0]).unwrap(),
    )
    .unwrap();
    let h = Hamiltonian::new(pauli_z() * re(omega / 2.0), 1e-12).unwrap();
    let inv = jumps.involution().clone();
    let ratio = (up / down).sqrt();
    let tc = sqdb_core::involution::TcConstants::new(vec![ratio, 1.0 / ratio], &inv, 1e-12).unwrap();
    LindbladGenerator::new(h, jumps.with_tc(tc).unwrap()).unwrap()
}

/// Qutrit with levels `E_0 < E_1 < E_2`, `H = diag(E)`, and for each pair
/// a downward jump `√γ |i⟩⟨j|` and an upward one with Boltzmann weight.
pub fn thermal_qutrit(rng: &mut ChaCha8Rng) -> LindbladGenerator {
    let mut e: [f64; 3] = [0.0, rng.random_range(0.2..1.5), 0.0];
    e[2] = e[1] + rng.random_range(0.2..1.5);
    let beta = rng.random_range(0.3..2.0);
    let mut ops = Vec::new();
    let mut map = Vec::new();
    let mut values = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let gamma: f64 = rng.random_range(0.2..2.0);
            let boltz = (-beta * (e[j] - e[i])).exp();
            let k = ops.len();
            ops.push(matrix_unit(3, i, j) * re(gamma.sqrt()));
            ops.push(matrix_unit(3, j, i) * re((gamma * boltz).sqrt()));
            map.extend([k + 1, k]);
            values.extend([boltz.sqrt(), 1.0 / boltz.sqrt()]);
        }
    }
    let inv = Involution::new(map).unwrap();
    let tc = sqdb_core::involution::TcConstants::new(values, &inv, 1e-12).unwrap();
    let jumps = JumpFamily::new(3, ops, inv).unwrap().with_tc(tc).unwrap();
    LindbladGenerator::new(Hamiltonian::new(diag_real(&e), 1e-12).unwrap(), jumps).unwrap()
}

/// Raw `½ Σ_k Σ_{i,j}` form of the quantum EPR, no orbit reduction; `None`
/// signals an infinite term.
pub fn raw_quantum_epr(rho: &DensityOperator, jumps: &JumpFamily) -> Option<f64> {
    let s = rho.spectrum();
    let v = &s.eigenvectors;
    let d = rho.dim();
    let p: Vec<f64> = s.eigenvalues.iter().map(|x| x.max(0.0)).collect();
    let w: Vec<DMatrix<f64>> = jumps.operators().iter().map(|l| (v.adjoint() * l * v).map(|z| z.norm_sqr())).collect();
    let scale = (0..jumps.len())
        .flat_map(|k| (0..d).flat_map(move |i| (0..d).map(move |j| (k, i, j))))
        .map(|(k, i, j)| p[i] * w[k][(j, i)])
        .fold(0.0, f64::max);
    let zero = 1e-14 * scale;
    let mut sigma = 0.0;
    for k in 0..jumps.len() {
        let ks = jumps.involution().partner(k);
        for i in 0..d {
            for j in 0..d {
                let x = p[i] * w[k][(j, i)];
                let y = p[j] * w[ks][(i, j)];
                match (x <= zero, y <= zero) {
                    (true, true) => {}
                    (false, false) => sigma += 0.5 * (x - y) * (x / y).ln(),
                    _ => return None,
                }
            }
        }
    }
    Some(sigma)
}

/// Raw `½ Σ_{i,j}` classical EPR; `None` for a one-sided flux.
pub fn raw_classical_epr(chain: &ClassicalChain, pi: &[f64]) -> Option<f64> {
    let w = chain.rates();
    let n = chain.size();
    let mut sigma = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = w[(i, j)] * pi[j];
            let y = w[(j, i)] * pi[i];
            match (x > 0.0, y > 0.0) {
                (false, false) => {}
                (true, true) => sigma += 0.5 * (x - y) * (x / y).ln(),
                _ => return None,
            }
        }
    }
    Some(sigma)
}

/// `max_k ‖ρ^{1/2} L_k† − L_{k*} ρ^{1/2}‖`.
pub fn relation_residual(rho: &DensityOperator, jumps: &JumpFamily) -> f64 {
    let s = rho.sqrt();
    let ops = jumps.operators();
    (0..ops.len())
        .map(|k| (&s * ops[k].adjoint() - &ops[jumps.involution().partner(k)] * &s).norm())
        .fold(0.0, f64::max)
}

/// `max_k ‖L_{k*} − c_k L_k†‖` for given constants.
pub fn tc_residual(jumps: &JumpFamily, constants: &[f64]) -> f64 {
    let ops = jumps.operators();
    (0..ops.len())
        .map(|k| (&ops[jumps.involution().partner(k)] - ops[k].adjoint() * C64::from(constants[k])).norm())
        .fold(0.0, f64::max)
}

pub fn embed(chain: &ClassicalChain) -> LindbladGenerator {
    embed_classical_chain(chain).unwrap()
}
