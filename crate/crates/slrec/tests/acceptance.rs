//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers. Tolerances are exact (field arithmetic) except for
//! the two explicitly statistical criteria, whose thresholds are pinned in
//! the constants below.

use num_bigint::BigUint;
use slrec::ascent::{going_up_step, rewrite_transvection, StdGens};
use slrec::basecase::{recognize_base_case, BaseCaseError};
use slrec::descent::{going_down, Strategy};
use slrec::driver::{gen_instance, standard_generators, Budgets, Disguise, Report};
use slrec::gfq::{factor_integer, poly_factor, ppd_phi, FieldSpec, Poly};
use slrec::matfq::{
    standard_generators as std_gen_matrices, transvection, BaseChange, Matrix,
};
use slrec::mslp::{compose, Handle, Instruction, MatrixGroup, Mslp, WordArena};
use slrec::rnd::{Budget, PrSource};
use slrec::stingray::{
    body_bounds, ceil_log2, classify_prestingray, find_stingray_element, power_exponent,
};
use std::sync::Arc;
use std::time::Instant;

fn gf(q: u64) -> Arc<FieldSpec> {
    Arc::new(FieldSpec::from_order(q).unwrap())
}

fn tracked(gens: &[Matrix], arena: &WordArena) -> Vec<(Matrix, Handle)> {
    gens.iter().cloned().enumerate().map(|(i, m)| (m, arena.input(i))).collect()
}

/// Criterion 1: end-to-end exactness on the (d,q) grid, 10 seeded runs per
/// cell on conjugate-disguised instances, at least 9/10 verified; any
/// verified result is bit-exact by construction of the verifier.
#[test]
fn criterion_1_end_to_end_exactness() {
    let grid: [(usize, u64); 10] =
        [(4, 2), (5, 3), (6, 3), (7, 4), (9, 5), (10, 5), (17, 4), (20, 9), (33, 4), (50, 5)];
    let t0 = Instant::now();
    let mut all_ok = true;
    for (d, q) in grid {
        let field = gf(q);
        let mut verified = 0;
        for seed in 0..10u64 {
            let x = gen_instance(d, field.clone(), 31 * seed + d as u64, Disguise::Conjugate);
            match standard_generators(&x, Budgets::defaults(d), seed, Strategy::Naming, true) {
                Ok(r) if r.verified => verified += 1,
                _ => {}
            }
        }
        if verified < 9 {
            all_ok = false;
        }
        println!("  SL({d},{q}): {verified}/10 verified");
    }
    let secs = t0.elapsed().as_secs();
    println!(
        "ACCEPTANCE 1 end-to-end exactness: {} ({}s)",
        if all_ok { "PASS" } else { "FAIL" },
        secs
    );
    assert!(all_ok, "some grid cell fell below 9/10 verified runs");
}

/// Criterion 2: 100 stingray certificates in SL(20,5) and SL(50,3) all
/// satisfy the certificate invariants with body dimension in range, and the
/// powering theorem holds on 200 synthetic candidates.
#[test]
fn criterion_2_stingray_certificates() {
    for (d, q) in [(20usize, 5u64), (50, 3)] {
        let field = gf(q);
        let gens = std_gen_matrices(d, d, field.clone());
        let mut arena = WordArena::new(gens.len());
        let tr = tracked(&gens, &arena);
        let mut src = PrSource::new(&tr, 7, &mut arena).unwrap();
        let mut budget = Budget::new(1_000_000);
        let (lo, hi) = body_bounds(d);
        for i in 0..100 {
            let cert = find_stingray_element(&mut src, &mut arena, &mut budget, lo, hi)
                .expect("budget is ample");
            assert!(cert.verify(), "certificate {i} in SL({d},{q})");
            assert!(
                (2..=2 * ceil_log2(d)).contains(&cert.m),
                "body dimension {} out of range in SL({d},{q})",
                cert.m
            );
        }
    }

    // theorem part (1) on synthetic pre-stingray candidates
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
    let mut done = 0;
    while done < 200 {
        let q = [2u64, 3, 5][done % 3];
        let field = gf(q);
        let m = 2 + done % 3;
        let p1 = random_irreducible(m, &field, &mut rng);
        let deg_other = if m == 3 { 2 } else { 3 };
        let other = random_irreducible(deg_other, &field, &mut rng);
        let mult = 1 + rng.gen_range(0..3usize);
        let mut otherpoly = Poly::one();
        for _ in 0..mult {
            otherpoly = otherpoly.mul(&other, &field);
        }
        let chi = p1.mul(&otherpoly, &field);
        let d = chi.deg().unwrap();
        let g0 = block_diag(
            &[companion(&p1, field.clone()), companion(&otherpoly, field.clone())],
            field.clone(),
        );
        let t = Matrix::random_invertible(d, field.clone(), &mut rng);
        let g = t.mul(&g0).unwrap().mul(&t.inv().unwrap()).unwrap();
        let profile = poly_factor(&chi, &field);
        if classify_prestingray(&g, m, m).is_none() {
            continue;
        }
        let b = power_exponent(&p1, &profile, &field);
        let s = g.pow(&b).unwrap();
        let id = Matrix::identity(d, field.clone());
        assert_eq!(s.sub(&id).unwrap().rank(), m, "synthetic candidate {done}");
        done += 1;
    }
    println!("ACCEPTANCE 2 stingray certificates: PASS (200 certs + 200 synthetic)");
}

/// Criterion 3: descent chains on SL(50,5) over 20 seeds end at 4, satisfy
/// the degree inequalities, stay short, and embed literally.
#[test]
fn criterion_3_descent_chain_contract() {
    let d = 50usize;
    let field = gf(5);
    let gens = std_gen_matrices(d, d, field.clone());
    // log*(50) = 4 with base-2 logarithms
    let log_star = {
        let mut k = 0usize;
        let mut v = 50f64;
        while v > 1.0 {
            v = v.log2();
            k += 1;
        }
        k
    };
    for seed in 0..20u64 {
        let mut arena = WordArena::new(gens.len());
        let mut budget = Budget::new(100_000);
        let out = going_down(&gens, &mut arena, &mut budget, seed, Strategy::Naming)
            .expect("budget is ample");
        assert_eq!(*out.degrees.last().unwrap(), 4, "seed {seed}");
        for w in out.degrees.windows(2) {
            assert!(w[1] <= 4 * ceil_log2(w[0]), "seed {seed}: inequality {w:?}");
            assert!(w[1] < w[0], "seed {seed}: strict descent {w:?}");
        }
        assert!(
            out.degrees.len() <= log_star + 2,
            "seed {seed}: chain {:?} longer than log*(d)+2 = {}",
            out.degrees,
            log_star + 2
        );
        // literal embedding: conjugated node generators are diag(.., I)
        let node = &out.final_node;
        let bc = BaseChange::new(node.l_cum.clone()).unwrap();
        for (small, word) in &node.gens {
            let orig = arena.eval(&MatrixGroup, &gens, *word).unwrap();
            let conj = bc.conjugate(&orig);
            assert!(conj.is_embedded_block(node.degree), "seed {seed}: literal block");
            assert_eq!(&conj.block_top_left(node.degree), small, "seed {seed}");
        }
    }
    println!("ACCEPTANCE 3 descent chain contract: PASS (20 seeded SL(50,5) chains)");
}

/// Criterion 4: single GoingUp steps from planted standard generators are
/// exact for n in {2,3,5,9}, d in {7,10,17}, q in {3,4,5}, 10 seeds each,
/// at least 9 of 10 succeeding.
#[test]
fn criterion_4_going_up_single_step() {
    let mut all_ok = true;
    for q in [3u64, 4, 5] {
        let field = gf(q);
        for d in [7usize, 10, 17] {
            for n in [2usize, 3, 5, 9] {
                if n >= d {
                    continue;
                }
                let nprime = (2 * n - 1).min(d);
                let mut ok = 0;
                for seed in 0..10u64 {
                    if planted_step_succeeds(n, d, field.clone(), seed) {
                        ok += 1;
                    }
                }
                if ok < 9 {
                    all_ok = false;
                    println!("  n={n} d={d} q={q} -> n'={nprime}: only {ok}/10");
                } else {
                    println!("  n={n} d={d} q={q} -> n'={nprime}: {ok}/10");
                }
            }
        }
    }
    println!("ACCEPTANCE 4 going-up single step: {}", if all_ok { "PASS" } else { "FAIL" });
    assert!(all_ok);
}

fn planted_step_succeeds(n: usize, d: usize, field: Arc<FieldSpec>, seed: u64) -> bool {
    let x = std_gen_matrices(d, d, field.clone());
    let k = x.len();
    let f = field.f();
    let mut arena = WordArena::new(k + 2 * f + 2);
    let words: Vec<Handle> = (k..k + 2 * f + 2).map(|i| arena.input(i)).collect();
    let y = StdGens::new(n, d, field.clone(), words, BaseChange::identity(d, field.clone()));
    let tr = tracked(&x, &arena);
    let mut src = match PrSource::new(&tr, seed, &mut arena) {
        Ok(s) => s,
        Err(_) => return false,
    };
    let mut budget = Budget::new(200);
    let Ok(next) = going_up_step(&mut src, &y, &mut arena, &mut budget) else {
        return false;
    };
    let nprime = (2 * n - 1).min(d);
    if next.n != nprime {
        return false;
    }
    // exact standard generators in the new frame, words evaluate to them
    let lit = std_gen_matrices(nprime, d, field);
    let orig_inputs: Vec<Matrix> =
        x.iter().cloned().chain(y.gens.iter().map(|(m, _)| m.clone())).collect();
    for ((mat, word), want) in next.gens.iter().zip(&lit) {
        if mat != want {
            return false;
        }
        let orig = arena.eval(&MatrixGroup, &orig_inputs, *word).unwrap();
        if &next.frame.conjugate(&orig) != mat {
            return false;
        }
    }
    true
}

/// Criterion 5: the rewriting procedure is exact for all n <= 8,
/// q in {2,3,4,5,9}, all positions (i,j), lambda in {omega_1, omega_f, -1}.
#[test]
fn criterion_5_rewriting_oracle() {
    let mut checked = 0u64;
    for q in [2u64, 3, 4, 5, 9] {
        let field = gf(q);
        let f = field.f();
        for n in 2..=8usize {
            let mut arena = WordArena::new(2 * f + 2);
            let words: Vec<Handle> = (0..2 * f + 2).map(|i| arena.input(i)).collect();
            let y =
                StdGens::new(n, n, field.clone(), words, BaseChange::identity(n, field.clone()));
            let mats: Vec<Matrix> = y.gens.iter().map(|(m, _)| m.clone()).collect();
            let lambdas = {
                let mut ls = vec![field.omega(1), field.omega(f), field.neg(1)];
                ls.dedup();
                ls
            };
            for i in 1..=n {
                for j in 1..=n {
                    if i == j {
                        continue;
                    }
                    for &lam in &lambdas {
                        let w = rewrite_transvection(&y, &mut arena, i, j, lam);
                        let got = arena.eval(&MatrixGroup, &mats, w).unwrap();
                        assert_eq!(
                            got,
                            transvection(n, i, j, lam, field.clone()),
                            "E_{{{i},{j}}}({lam}) over GF({q}), n={n}"
                        );
                        checked += 1;
                    }
                }
            }
        }
    }
    println!("ACCEPTANCE 5 rewriting oracle: PASS ({checked} transvections, zero failures)");
}

/// Criterion 6: Phi(m,q) agrees with a brute-force oracle for all prime
/// powers q <= 128 and every m with q^m - 1 < 10^9, including the
/// exceptional Phi(6,2) = 1.
#[test]
fn criterion_6_ppd_phi_oracle() {
    let mut checked = 0u64;
    let qs: Vec<u64> = (2..=128u64).filter(|&q| FieldSpec::from_order(q).is_ok()).collect();
    for &q in &qs {
        let field = gf(q);
        let mut m = 1usize;
        loop {
            let qm = (q as u128).checked_pow(m as u32);
            let Some(qm) = qm else { break };
            if qm - 1 >= 1_000_000_000 {
                break;
            }
            let got = ppd_phi(m, &field).unwrap();
            let want = brute_force_phi(m, q);
            assert_eq!(got, want, "Phi({m},{q})");
            checked += 1;
            m += 1;
        }
    }
    let f2 = gf(2);
    assert_eq!(ppd_phi(6, &f2).unwrap(), 1, "the Zsigmondy exception");
    println!("ACCEPTANCE 6 ppd/Phi oracle: PASS ({checked} pairs, Phi(6,2)=1)");
}

/// Independent oracle: factor q^m - 1 by plain trial division and test each
/// prime against every q^i - 1, i < m, by direct divisibility.
fn brute_force_phi(m: usize, q: u64) -> u128 {
    let n = (q as u128).pow(m as u32) - 1;
    let mut rest = n;
    let mut phi = 1u128;
    let mut d = 2u128;
    while d * d <= rest {
        if rest % d == 0 {
            let mut mult = 0;
            while rest % d == 0 {
                rest /= d;
                mult += 1;
            }
            if (1..m).all(|i| ((q as u128).pow(i as u32) - 1) % d != 0) {
                phi *= d.pow(mult);
            }
        }
        d += 1;
    }
    if rest > 1 && (1..m).all(|i| ((q as u128).pow(i as u32) - 1) % rest != 0) {
        phi *= rest;
    }
    phi
}

/// Criterion 7: MSLP engine suites with at least 1000 randomized cases each:
/// static liveness vs a trapping interpreter, homomorphic replay, composed
/// pipelines, and byte-identical serialization round trips.
#[test]
fn criterion_7_mslp_engine() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let field = gf(5);

    // (a) liveness: generated-valid programs validate; breaking one read
    // slot must be caught exactly when a trapping interpreter traps
    let mut live_cases = 0;
    while live_cases < 1000 {
        let (quota, ninputs, code) = random_code(&mut rng);
        let valid = Mslp::new(quota, ninputs, code.clone());
        let trap = trapping_interpreter(quota, ninputs, &code);
        assert_eq!(valid.is_ok(), trap, "liveness vs trapping interpreter");
        live_cases += 1;
    }

    // (b) homomorphic replay, 1000 cases
    for _ in 0..1000 {
        let p = random_valid_program(&mut rng);
        let init: Vec<Matrix> =
            (0..p.quota()).map(|_| Matrix::random_invertible(2, field.clone(), &mut rng)).collect();
        let h = Matrix::random_invertible(2, field.clone(), &mut rng);
        let hinv = h.inv().unwrap();
        let conj = |m: &Matrix| hinv.mul(m).unwrap().mul(&h).unwrap();
        let init_c: Vec<Matrix> = init.iter().map(&conj).collect();
        let out = p.eval(&MatrixGroup, &init).unwrap();
        let out_c = p.eval(&MatrixGroup, &init_c).unwrap();
        for (row, row_c) in out.iter().zip(&out_c) {
            for (m, m_c) in row.iter().zip(row_c) {
                assert_eq!(&conj(m), m_c);
            }
        }
    }

    // (c) composed pipelines, 1000 cases: composition equals staging
    for _ in 0..1000 {
        let a = random_valid_program(&mut rng);
        let b = random_valid_program(&mut rng);
        let wiring: Vec<usize> = (0..b.ninputs()).map(|i| (i % a.ninputs()) + 1).collect();
        let c = compose(&a, &b, &wiring, true).unwrap();
        let init: Vec<Matrix> = (0..a.ninputs())
            .map(|_| Matrix::random_invertible(2, field.clone(), &mut rng))
            .collect();
        // staged: run a fully, feed the wired slots into b
        let mut mem: Vec<Matrix> = init.clone();
        mem.resize(a.quota().max(1), init[0].clone());
        for ins in a.code() {
            step(&mut mem, ins);
        }
        let binit: Vec<Matrix> = wiring.iter().map(|&s| mem[s - 1].clone()).collect();
        let staged = b.eval(&MatrixGroup, &binit).unwrap();
        let composed = c.eval(&MatrixGroup, &init).unwrap();
        let a_shows = a.show_slots().len();
        assert_eq!(&composed[a_shows..], &staged[..]);
    }

    // (d) serialization round trips, 1000 cases, byte identical
    for _ in 0..1000 {
        let p = random_valid_program(&mut rng);
        let text = p.serialize();
        let q = Mslp::deserialize(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(text, q.serialize());
    }
    println!("ACCEPTANCE 7 MSLP engine: PASS (4 x 1000 randomized cases)");
}

fn step(mem: &mut [Matrix], ins: &Instruction) {
    match ins {
        Instruction::Copy { dst, src } => mem[*dst - 1] = mem[*src - 1].clone(),
        Instruction::Mul { dst, lhs, rhs } => {
            mem[*dst - 1] = mem[*lhs - 1].mul(&mem[*rhs - 1]).unwrap()
        }
        Instruction::Inv { dst, src } => mem[*dst - 1] = mem[*src - 1].inv().unwrap(),
        Instruction::Show(_) => {}
    }
}

/// Reference liveness semantics: execute with poisoned slots and trap on any
/// read of one.
fn trapping_interpreter(quota: usize, ninputs: usize, code: &[Instruction]) -> bool {
    if ninputs > quota {
        return false;
    }
    let mut defined = vec![false; quota + 1];
    for s in 1..=ninputs {
        defined[s] = true;
    }
    let ok = |slot: usize| slot >= 1 && slot <= quota;
    for ins in code {
        match ins {
            Instruction::Copy { dst, src } | Instruction::Inv { dst, src } => {
                if !ok(*src) || !ok(*dst) || !defined[*src] {
                    return false;
                }
                defined[*dst] = true;
            }
            Instruction::Mul { dst, lhs, rhs } => {
                if !ok(*lhs) || !ok(*rhs) || !ok(*dst) || !defined[*lhs] || !defined[*rhs] {
                    return false;
                }
                defined[*dst] = true;
            }
            Instruction::Show(slots) => {
                if slots.iter().any(|&s| !ok(s) || !defined[s]) {
                    return false;
                }
            }
        }
    }
    true
}

fn random_code(
    rng: &mut rand_chacha::ChaCha8Rng,
) -> (usize, usize, Vec<Instruction>) {
    use rand::Rng;
    let ninputs = rng.gen_range(1..4usize);
    let quota = ninputs + rng.gen_range(0..4usize);
    let len = rng.gen_range(1..15usize);
    let mut code = Vec::new();
    for _ in 0..len {
        let dst = rng.gen_range(1..=quota);
        // sometimes produce invalid reads on purpose
        let slot = |rng: &mut rand_chacha::ChaCha8Rng| rng.gen_range(1..=quota + 1);
        match rng.gen_range(0..4u32) {
            0 => code.push(Instruction::Copy { dst, src: slot(rng) }),
            1 => code.push(Instruction::Mul { dst, lhs: slot(rng), rhs: slot(rng) }),
            2 => code.push(Instruction::Inv { dst, src: slot(rng) }),
            _ => code.push(Instruction::Show(vec![slot(rng)])),
        }
    }
    (quota, ninputs, code)
}

fn random_valid_program(rng: &mut rand_chacha::ChaCha8Rng) -> Mslp {
    use rand::Rng;
    let ninputs = rng.gen_range(1..4usize);
    let quota = ninputs + rng.gen_range(0..4usize);
    let len = rng.gen_range(0..20usize);
    let mut live: Vec<usize> = (1..=ninputs).collect();
    let mut code = Vec::new();
    for _ in 0..len {
        let dst = rng.gen_range(1..=quota);
        match rng.gen_range(0..4u32) {
            0 => {
                let src = live[rng.gen_range(0..live.len())];
                code.push(Instruction::Copy { dst, src });
                if !live.contains(&dst) {
                    live.push(dst);
                }
            }
            1 => {
                let lhs = live[rng.gen_range(0..live.len())];
                let rhs = live[rng.gen_range(0..live.len())];
                code.push(Instruction::Mul { dst, lhs, rhs });
                if !live.contains(&dst) {
                    live.push(dst);
                }
            }
            2 => {
                let src = live[rng.gen_range(0..live.len())];
                code.push(Instruction::Inv { dst, src });
                if !live.contains(&dst) {
                    live.push(dst);
                }
            }
            _ => {
                let mut slots: Vec<usize> =
                    (0..rng.gen_range(1..=live.len())).map(|_| live[rng.gen_range(0..live.len())]).collect();
                slots.sort_unstable();
                slots.dedup();
                code.push(Instruction::Show(slots));
            }
        }
    }
    code.push(Instruction::Show(live));
    Mslp::new(quota, ninputs, code).unwrap()
}

/// Criterion 8: base case over q in {2,3,5,7,9}, 10 seeds each, all words
/// verify exactly; the planted Sp(4,3) impostor always fails.
#[test]
fn criterion_8_base_case() {
    use rand::SeedableRng;
    for q in [2u64, 3, 5, 7, 9] {
        let field = gf(q);
        let base = std_gen_matrices(4, 4, field.clone());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(q);
        for seed in 0..10u64 {
            let t = Matrix::random_invertible(4, field.clone(), &mut rng);
            let tinv = t.inv().unwrap();
            let gens: Vec<Matrix> =
                base.iter().map(|g| t.mul(g).unwrap().mul(&tinv).unwrap()).collect();
            let mut arena = WordArena::new(gens.len());
            let tr = tracked(&gens, &arena);
            let mut budget = Budget::new(4000);
            let out = recognize_base_case(&tr, &mut arena, &mut budget, seed)
                .expect("base case recognizes a scrambled SL(4,q)");
            // recognize_base_case verifies internally; verify once more
            // against the literal targets
            let want = std_gen_matrices(2, 4, field.clone());
            for ((m, w), target) in out.iter().zip(&want) {
                assert_eq!(m, target);
                let v = arena.eval(&MatrixGroup, &gens, *w).unwrap();
                assert_eq!(&v, target, "q={q} seed={seed}");
            }
        }
    }
    // the symplectic impostor
    let field = gf(3);
    let gens = sp4_generators(&field);
    let mut arena = WordArena::new(gens.len());
    let tr = tracked(&gens, &arena);
    let mut budget = Budget::new(4000);
    let r = recognize_base_case(&tr, &mut arena, &mut budget, 5);
    assert_eq!(r.err().unwrap(), BaseCaseError::SiftFailed);
    println!("ACCEPTANCE 8 base case: PASS (5 fields x 10 seeds + Sp(4,3) impostor)");
}

fn sp4_generators(field: &Arc<FieldSpec>) -> Vec<Matrix> {
    let gram = {
        let mut m = Matrix::zero(4, 4, field.clone());
        m.set(0, 2, 1);
        m.set(1, 3, 1);
        m.set(2, 0, field.neg(1));
        m.set(3, 1, field.neg(1));
        m
    };
    let transv = |v: &[u64]| {
        let mut m = Matrix::identity(4, field.clone());
        for i in 0..4 {
            let mut e = vec![0; 4];
            e[i] = 1;
            let gv = gram.apply_row(&e);
            let mut b = 0;
            for k in 0..4 {
                b = field.add(b, field.mul(gv[k], v[k]));
            }
            for k in 0..4 {
                let cur = m.at(i, k);
                m.set(i, k, field.add(cur, field.mul(b, v[k])));
            }
        }
        m
    };
    [
        vec![1, 0, 0, 0],
        vec![0, 1, 0, 0],
        vec![0, 0, 1, 0],
        vec![0, 0, 0, 1],
        vec![1, 1, 1, 0],
        vec![1, 2, 0, 1],
    ]
    .iter()
    .map(|v| transv(v))
    .collect()
}

/// Criterion 9: performance smoke, self-relative: five seeded SL(100,4)
/// recognitions with verification, median under 120 seconds, per-stage
/// timings recorded in the report structure.
#[test]
fn criterion_9_performance_smoke() {
    let field = gf(4);
    let budgets = Budgets::defaults(100);
    let mut times_ms: Vec<u128> = Vec::new();
    for seed in 0..5u64 {
        let x = gen_instance(100, field.clone(), 1000 + seed, Disguise::Conjugate);
        let t0 = Instant::now();
        let r = standard_generators(&x, budgets, seed, Strategy::Naming, true)
            .expect("SL(100,4) recognizes");
        let elapsed = t0.elapsed().as_millis();
        assert!(r.verified, "seed {seed}");
        let report = Report::from_result(&r, seed, budgets);
        assert!(report.timings.total_ms > 0);
        println!(
            "  seed {seed}: {elapsed} ms (descent {} / base {} / ascent {} / verify {} ms)",
            report.timings.descent_ms,
            report.timings.base_ms,
            report.timings.ascent_ms,
            report.timings.verify_ms
        );
        times_ms.push(elapsed);
    }
    times_ms.sort_unstable();
    let median = times_ms[2];
    println!(
        "ACCEPTANCE 9 performance smoke: {} (median {} ms over 5 runs, limit 120000 ms)",
        if median < 120_000 { "PASS" } else { "FAIL" },
        median
    );
    assert!(median < 120_000);
}

// shared helpers for criterion 2

fn companion(p: &Poly, f: Arc<FieldSpec>) -> Matrix {
    let n = p.deg().unwrap();
    let mut c = Matrix::zero(n, n, f.clone());
    for i in 0..n - 1 {
        c.set(i, i + 1, 1);
    }
    for j in 0..n {
        c.set(n - 1, j, f.neg(p.coeff(j)));
    }
    c
}

fn random_irreducible(
    deg: usize,
    f: &Arc<FieldSpec>,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Poly {
    use rand::Rng;
    loop {
        let mut coeffs: Vec<u64> = (0..deg).map(|_| rng.gen_range(0..f.q())).collect();
        coeffs.push(1);
        let p = Poly::from_coeffs(coeffs);
        if p.deg() == Some(deg) && p.is_irreducible(f) {
            return p;
        }
    }
}

fn block_diag(blocks: &[Matrix], f: Arc<FieldSpec>) -> Matrix {
    let d: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = Matrix::zero(d, d, f);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                m.set(off + i, off + j, b.at(i, j));
            }
        }
        off += b.nrows();
    }
    m
}

// keep the unused-import lint honest for items used only in some criteria
#[allow(dead_code)]
fn _unused(_: BigUint) {
    let _ = factor_integer(6u128);
}
