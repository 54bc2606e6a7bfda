//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Corpora are generated from fixed seeds.

mod support;

use std::time::{Duration, Instant};

use sqdb_core::detailed_balance::{
    construct_zero_epr_representation, dissipative_difference_check, dissipative_symmetry_check, sqdb_check,
};
use sqdb_core::entropy::{classical_detailed_balance, classical_epr, classical_stationary, quantum_epr};
use sqdb_core::involution::{build_involution_matrix, detect_tc, Involution, JumpFamily, TcConstants};
use sqdb_core::lindblad::{heisenberg_superoperator, stationary_state, Hamiltonian, LindbladGenerator};
use sqdb_core::linalg::{
    canonical_form, diag_real, pauli_z, re, real_matrix, takagi_to_canonical, unitarity_defect, w2, CMatrix,
    C64, ONE,
};
use sqdb_core::representations::{
    apply_mixing, is_special, make_special, preserves_tc, preserves_zero_epr, tc_multisets_match, UnitaryMixing,
};

use support::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn two_level(nu: f64) -> LindbladGenerator {
    let l = real_matrix(2, 2, &[0.0, nu.sqrt(), (1.0 - nu).sqrt(), 0.0]);
    LindbladGenerator::new(
        Hamiltonian::new(pauli_z(), 1e-12).unwrap(),
        JumpFamily::singlets(2, vec![l]).unwrap(),
    )
    .unwrap()
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut worst_state: f64 = 0.0;
    let mut worst_relation: f64 = 0.0;
    for nu in [0.1, 0.25, 0.4] {
        let g = two_level(nu);
        let rho = stationary_state(&g, 1e-9).unwrap();
        worst_state = worst_state.max((rho.matrix() - diag_real(&[nu, 1.0 - nu])).norm());
        let l = &g.jumps().operators()[0];
        let s = rho.sqrt();
        let lhs = &s * l.adjoint();
        worst_relation = worst_relation.max((&lhs - l * &s).norm());
        let off = (nu * (1.0 - nu)).sqrt();
        ok &= (lhs - real_matrix(2, 2, &[0.0, off, off, 0.0])).norm() <= 1e-12;
        let cert = sqdb_check(&g, 1e-9).unwrap().certificate;
        ok &= cert.verdict && cert.u.shape() == (1, 1) && (cert.u[(0, 0)] - 1.0).norm() <= 1e-9;
        ok &= !detect_tc(g.jumps(), 1e-9).success();
    }
    let half = detect_tc(two_level(0.5).jumps(), 1e-9);
    ok &= half.success() && (half.constants.unwrap().values()[0] - 1.0).abs() <= 1e-9;
    ok &= worst_state <= 1e-10 && worst_relation <= 1e-12;
    outcome(ok, format!("state err {worst_state:.1e}, relation err {worst_relation:.1e}, TC only at ν=1/2"))
}

/// SQDB corpus: detailed-balance embeddings of dims 2–5, thermal qubits and
/// thermal qutrits (the last two with non-zero Hamiltonians).
fn sqdb_corpus() -> Vec<LindbladGenerator> {
    let mut r = rng(2024);
    let mut out = Vec::new();
    for i in 0..160 {
        out.push(embed(&detailed_balance_chain(&mut r, 2 + i % 4).0));
    }
    for _ in 0..25 {
        let down = rand::Rng::random_range(&mut r, 0.2..2.0);
        let up = rand::Rng::random_range(&mut r, 0.05..1.0);
        let omega = rand::Rng::random_range(&mut r, 0.1..3.0);
        out.push(thermal_qubit(down, up, omega));
    }
    for _ in 0..25 {
        out.push(thermal_qutrit(&mut r));
    }
    out
}

fn cycle_corpus() -> Vec<LindbladGenerator> {
    let mut r = rng(77);
    let mut out = Vec::new();
    while out.len() < 60 {
        let n = rand::Rng::random_range(&mut r, 3..=6);
        let a = rand::Rng::random_range(&mut r, 0.5..4.0);
        let b = rand::Rng::random_range(&mut r, 0.1..4.0);
        let g = embed(&cycle(n, a, b));
        let rho = stationary_state(&g, 1e-9).unwrap();
        if quantum_epr(&rho, g.jumps()).unwrap().sigma > 0.1 {
            out.push(g);
        }
    }
    out
}

fn criterion_2(corpus: &[LindbladGenerator]) -> Outcome {
    let mut failures = 0;
    let (mut rel, mut epr, mut sup): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (i, g) in corpus.iter().enumerate() {
        // alternate between the declared pairing and all singlets
        let inv = if i % 4 == 3 { Involution::singlets(g.jumps().len()) } else { g.jumps().involution().clone() };
        match construct_zero_epr_representation(g, &inv, 1e-9) {
            Ok(z) => {
                let sigma = if z.epr.infinite { f64::INFINITY } else { z.epr.sigma.abs() };
                rel = rel.max(z.relation_residual);
                epr = epr.max(sigma);
                sup = sup.max(z.superoperator_residual);
                if z.relation_residual > 1e-8 || sigma > 1e-8 || z.superoperator_residual > 1e-9 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    outcome(
        failures == 0 && corpus.len() >= 200,
        format!("{} instances, {failures} failures; max relation {rel:.1e}, EPR {epr:.1e}, superop {sup:.1e}", corpus.len()),
    )
}

fn criterion_3(corpus: &[LindbladGenerator], cycles: &[LindbladGenerator]) -> Outcome {
    let mut tc_instances = 0;
    let mut failures = 0;
    let mut rel: f64 = 0.0;
    for g in corpus {
        if !detect_tc(g.jumps(), 1e-9).success() {
            continue;
        }
        let rho = stationary_state(g, 1e-9).unwrap();
        let e = quantum_epr(&rho, g.jumps()).unwrap();
        if !e.is_zero(1e-10) {
            continue;
        }
        tc_instances += 1;
        let r = relation_residual(&rho, g.jumps());
        rel = rel.max(r);
        if r > 1e-8 || !sqdb_check(g, 1e-9).unwrap().certificate.verdict {
            failures += 1;
        }
    }
    let rejected = cycles.iter().filter(|g| !sqdb_check(g, 1e-9).unwrap().certificate.verdict).count();
    outcome(
        failures == 0 && tc_instances > 0 && cycles.len() >= 50 && rejected == cycles.len(),
        format!(
            "{tc_instances} TC zero-EPR instances, {failures} failures (max relation {rel:.1e}); {rejected}/{} cycles rejected",
            cycles.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut count = 0;
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    while count < 520 {
        for size in 1..=8 {
            for n in 0..=size / 2 {
                let m = size - 2 * n;
                let v = haar_unitary(&mut r, size);
                let u = &v * v.transpose();
                match takagi_to_canonical(&u, n, m, 1e-9) {
                    Ok(res) => {
                        let direct = (res.factor.transpose() * &u * &res.factor - canonical_form(n, m)).norm();
                        let defect = unitarity_defect(&res.factor);
                        worst = worst.max(direct).max(defect);
                        if direct > 1e-8 || defect > 1e-8 {
                            failures += 1;
                        }
                    }
                    Err(_) => failures += 1,
                }
                count += 1;
            }
        }
    }
    outcome(failures == 0, format!("{count} factorizations, {failures} failures, worst residual {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut infinite = 0;
    let total = 150;
    for i in 0..total {
        let n = 2 + i % 5;
        let chain = match i % 3 {
            0 => detailed_balance_chain(&mut r, n).0,
            1 => random_chain(&mut r, n, false),
            _ => random_chain(&mut r, n, true),
        };
        let pi = classical_stationary(&chain, 1e-9).unwrap();
        let classical = classical_epr(&chain, &pi, 1e-9).unwrap();
        let g = embed(&chain);
        let rho = stationary_state(&g, 1e-9).unwrap();
        let quantum = quantum_epr(&rho, g.jumps()).unwrap();
        let agree = if classical.infinite || quantum.infinite {
            infinite += 1;
            classical.infinite == quantum.infinite
        } else {
            let diff = (classical.sigma - quantum.sigma).abs();
            worst = worst.max(diff);
            diff <= 1e-9
        };
        let db = classical_detailed_balance(&chain, &pi, 1e-10).unwrap();
        if !agree || db != classical.is_zero(1e-10) {
            failures += 1;
        }
    }
    let third = [1.0 / 3.0; 3];
    let ln2 = classical_epr(&cycle(3, 2.0, 1.0), &third, 1e-9).unwrap().sigma;
    let ln2_ok = (ln2 - 2f64.ln()).abs() <= 1e-12;
    outcome(
        failures == 0 && ln2_ok,
        format!(
            "{total} chains ({infinite} infinite), {failures} failures, worst diff {worst:.1e}; cycle σ − ln2 = {:.1e}",
            ln2 - 2f64.ln()
        ),
    )
}

fn messy_generator(r: &mut rand_chacha::ChaCha8Rng) -> LindbladGenerator {
    let d = rand::Rng::random_range(r, 2..=4);
    let base = rand::Rng::random_range(r, 1..=3);
    let g = generator(r, d, base);
    let mut ops: Vec<CMatrix> = g.jumps().operators().to_vec();
    // dependent combinations and trace offsets
    let extra = ops[0].clone() * C64::new(gaussian(r), gaussian(r)) + &ops[base - 1] * re(gaussian(r));
    ops.push(extra);
    ops.push(ops[0].clone());
    for op in ops.iter_mut() {
        *op += CMatrix::identity(d, d) * C64::new(gaussian(r), gaussian(r));
    }
    g.with_jumps(JumpFamily::singlets(d, ops).unwrap()).unwrap()
}

/// Satisfying mixings for the zero-EPR predicate: `P Q† O Q Pᵀ`.
fn zero_epr_mixing(r: &mut rand_chacha::ChaCha8Rng, inv: &Involution) -> CMatrix {
    let im = build_involution_matrix(inv);
    let n = inv.size();
    let mut q = CMatrix::zeros(n, n);
    for i in 0..im.n_doublets {
        q.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&w2());
    }
    for s in 2 * im.n_doublets..n {
        q[(s, s)] = ONE;
    }
    &im.permutation * q.adjoint() * real_orthogonal(r, n) * q * im.permutation.transpose()
}

/// Phases `e^{iφ_k}` with `φ_{k*} = −φ_k`: preserve both zero EPR and TC.
fn conjugate_phases(r: &mut rand_chacha::ChaCha8Rng, inv: &Involution) -> CMatrix {
    let n = inv.size();
    let mut phi = vec![0.0; n];
    for o in inv.orbits() {
        let p = if o.is_doublet() { rand::Rng::random_range(r, -3.0..3.0) } else { 0.0 };
        phi[o.representative] = p;
        phi[o.partner] = -p;
    }
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, phi.iter().map(|&p| C64::from_polar(1.0, p))))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let mut special_failures = 0;
    let mut worst: f64 = 0.0;
    let messy = 120;
    for _ in 0..messy {
        let g = messy_generator(&mut r);
        let (out, _) = make_special(&g, 1e-9).unwrap();
        let dist = heisenberg_superoperator(&g).distance(&heisenberg_superoperator(&out));
        worst = worst.max(dist);
        if dist > 1e-9 || !is_special(&out, 1e-9).is_special() {
            special_failures += 1;
        }
    }

    let mut predicate_failures = 0;
    let mut multiset_failures = 0;
    let mut satisfying = 0;
    let mut violating = 0;
    for i in 0..150 {
        let (chain, _) = detailed_balance_chain(&mut r, 2 + i % 3);
        let g = embed(&chain);
        let rho = stationary_state(&g, 1e-9).unwrap();
        let inv = g.jumps().involution().clone();
        let im = build_involution_matrix(&inv);
        let c = g.jumps().tc().unwrap().clone();
        let v = match i % 3 {
            0 => zero_epr_mixing(&mut r, &inv),
            1 => conjugate_phases(&mut r, &inv),
            _ => haar_unitary(&mut r, inv.size()),
        };
        let mixing = UnitaryMixing::new(v, 1e-9).unwrap();
        let mixed = apply_mixing(&g, &mixing).unwrap();
        let zero = preserves_zero_epr(&mixing, &im, 1e-9).unwrap();
        let direct_zero = quantum_epr(&rho, mixed.jumps()).unwrap().is_zero(1e-8);
        let tc = preserves_tc(&mixing, &im, &c, &c, 1e-9).unwrap();
        let direct_tc = tc_residual(mixed.jumps(), c.values()) <= 1e-9;
        if zero {
            satisfying += 1;
        } else {
            violating += 1;
        }
        if zero != direct_zero || tc != direct_tc {
            predicate_failures += 1;
        }
        // when both predicates hold, the constant multisets coincide
        let swapped: Vec<f64> = (0..inv.size()).map(|k| c.values()[inv.partner(k)]).collect();
        let c_swapped = TcConstants::new(swapped, &inv, 1e-9).unwrap();
        if zero && preserves_tc(&mixing, &im, &c, &c_swapped, 1e-9).unwrap() && !tc_multisets_match(&c, &c_swapped, 1e-9) {
            multiset_failures += 1;
        }
    }
    outcome(
        special_failures == 0 && predicate_failures == 0 && multiset_failures == 0 && satisfying >= 50 && violating >= 50,
        format!(
            "{messy} messy inputs ({special_failures} failures, worst superop {worst:.1e}); \
             {satisfying} satisfying / {violating} violating mixings, {predicate_failures} predicate mismatches"
        ),
    )
}

fn criterion_7(corpus: &[LindbladGenerator], cycles: &[LindbladGenerator]) -> Outcome {
    let mut disagreements = 0;
    let mut positives = 0;
    let mut difference_failures = 0;
    let mut worst: f64 = 0.0;
    for g in corpus.iter().chain(cycles) {
        let verdict = sqdb_check(g, 1e-9).unwrap();
        let sym = dissipative_symmetry_check(g, &verdict.state, 1e-9).unwrap();
        if sym.sqdb != verdict.certificate.verdict {
            disagreements += 1;
        }
        if verdict.certificate.verdict {
            positives += 1;
            match dissipative_difference_check(g, 1e-8) {
                Ok(d) => {
                    worst = worst.max(d.defect);
                    if !d.holds {
                        difference_failures += 1;
                    }
                }
                Err(_) => difference_failures += 1,
            }
        }
    }
    outcome(
        disagreements == 0 && difference_failures == 0,
        format!(
            "{disagreements} criterion disagreements; 𝒟 − 𝒟₁ = 4i[K,·] failed on {difference_failures}/{positives} \
             positive instances (worst defect {worst:.1e})"
        ),
    )
}

fn run(name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let passed = o.passed && elapsed <= budget;
    println!(
        "{} {name}: {} [{:.2}s / {:.0}s]",
        if passed { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    passed
}

fn main() {
    let corpus = sqdb_corpus();
    let cycles = cycle_corpus();
    let secs = Duration::from_secs;
    let results = [
        run("criterion 1 (two-level example)", secs(1), criterion_1),
        run("criterion 2 (SQDB ⟹ zero EPR)", secs(30), || criterion_2(&corpus)),
        run("criterion 3 (TC + zero EPR ⟹ SQDB)", secs(30), || criterion_3(&corpus, &cycles)),
        run("criterion 4 (Takagi canonical form)", secs(10), criterion_4),
        run("criterion 5 (classical–quantum EPR)", secs(10), criterion_5),
        run("criterion 6 (representation algebra)", secs(20), criterion_6),
        run("criterion 7 (criteria equivalence)", secs(60), || criterion_7(&corpus, &cycles)),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
