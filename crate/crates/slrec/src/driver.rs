//! End-to-end driver: the full recognition pipeline (descent, base case,
//! ascent, MSLP composition, exact verification), test-instance generation,
//! result verification, file formats and the benchmark harness.

use crate::ascent::{going_up, StdGens};
use crate::basecase::{recognize_base_case, BaseCaseError};
use crate::descent::{going_down, naming_check_set, Strategy};
use crate::gfq::{FieldError, FieldSpec, Fq};
use crate::matfq::{standard_generators as std_gen_matrices, BaseChange, Matrix};
use crate::mslp::{compose, Handle, MatrixGroup, Mslp, MslpError, WordArena};
use crate::rnd::{Budget, PrSource};
use crate::stingray::ceil_log2;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;
use thiserror::Error;

/// The three random-selection budgets of the pipeline: descent, base case,
/// ascent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
}

impl Budgets {
    /// Empirically calibrated defaults; the split between the three phases
    /// is a user input, not prescribed by the method. The descent gets the
    /// largest share because pair filtering dominates, and a further factor
    /// of two over GF(2), where random stingray pairs generate the full
    /// group least often.
    pub fn defaults_for(d: usize, q: u64) -> Budgets {
        let l = ceil_log2(d).max(1) as u64;
        let boost = if q == 2 { 2 } else { 1 };
        Budgets { n1: 96 * l * boost, n2: 512, n3: 64 * l }
    }

    pub fn defaults(d: usize) -> Budgets {
        Budgets::defaults_for(d, 3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Descent,
    BaseCase,
    Ascent,
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum RecogError {
    #[error("recognition failed at stage {stage:?} (draws used: {draws:?})")]
    Fail { stage: Stage, draws: (u64, u64, u64) },
    #[error("input is not a set of square matrices of equal degree >= 4 over one field")]
    BadInput,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub descent_ms: u128,
    pub base_ms: u128,
    pub ascent_ms: u128,
    pub verify_ms: u128,
    pub total_ms: u128,
}

/// The three per-phase programs and the wiring data used to combine them,
/// kept alongside the composed program so staged evaluation can be compared
/// against it.
pub struct PipelineStages {
    /// From X to the two generators of the degree-4 group.
    pub descent: Mslp,
    pub descent_out: Vec<usize>,
    /// From those generators to the embedded SL(2,q) standard generators.
    pub base: Mslp,
    pub base_out: Vec<usize>,
    /// From X and the SL(2,q) generators to the full standard generators.
    pub ascent: Mslp,
}

/// Outcome of a successful recognition run.
pub struct RecognitionResult {
    /// Base change matrix: rows are the new basis in the input coordinates.
    pub l: Matrix,
    /// Program from X^L to the standard generators of the conjugated group.
    pub slp: Mslp,
    pub stages: PipelineStages,
    pub budgets_used: (u64, u64, u64),
    pub verified: bool,
    pub timings: PhaseTimings,
    /// Degrees of the descending recognition chain.
    pub chain: Vec<usize>,
}

fn mix_seed(seed: u64, phase: u64, attempt: u64) -> u64 {
    let mut z = seed ^ phase.wrapping_mul(0x9e3779b97f4a7c15) ^ attempt.wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// The recognition algorithm: descent to a degree-4 group, base-case
/// recognition of an embedded SL(2,q), ascent back to full degree, MSLP
/// composition and exact final verification. One-sided: a `verified = true`
/// result is always correct.
pub fn standard_generators(
    x: &[Matrix],
    budgets: Budgets,
    seed: u64,
    strategy: Strategy,
    run_verification: bool,
) -> Result<RecognitionResult, RecogError> {
    let t_start = Instant::now();
    if x.is_empty() || !x[0].is_square() || x[0].nrows() < 4 {
        return Err(RecogError::BadInput);
    }
    let d = x[0].nrows();
    let field = x[0].field().clone();
    if x.iter().any(|m| m.nrows() != d || !m.is_square() || m.field() != &field) {
        return Err(RecogError::BadInput);
    }
    let k = x.len();
    let f = field.f();
    let mut b1 = Budget::new(budgets.n1);
    let mut b2 = Budget::new(budgets.n2);
    let mut b3 = Budget::new(budgets.n3);
    let mut timings = PhaseTimings::default();
    let fail = |stage: Stage, b1: &Budget, b2: &Budget, b3: &Budget| RecogError::Fail {
        stage,
        draws: (b1.used(), b2.used(), b3.used()),
    };

    // phases 1 + 2, with pipeline retry when a naming false positive (or an
    // unlucky chain) surfaces as a base-case sift failure
    let mut arena1 = WordArena::new(k);
    let mut attempt = 0u64;
    let (rho1, rho1_out, l1, chain, y2_words_arena2, rho2, rho2_out) = loop {
        let t0 = Instant::now();
        let outcome = if d == 4 {
            crate::descent::DescentOutcome {
                degrees: vec![4],
                final_node: crate::descent::ChainNode {
                    degree: 4,
                    gens: x
                        .iter()
                        .cloned()
                        .enumerate()
                        .map(|(i, m)| (m, arena1.input(i)))
                        .collect(),
                    l_cum: Matrix::identity(d, field.clone()),
                },
            }
        } else {
            match going_down(x, &mut arena1, &mut b1, mix_seed(seed, 1, attempt), strategy) {
                Ok(o) => o,
                Err(_) => return Err(fail(Stage::Descent, &b1, &b2, &b3)),
            }
        };
        timings.descent_ms += t0.elapsed().as_millis();

        let t0 = Instant::now();
        let u_gens = &outcome.final_node.gens;
        let (rho1, rho1_out) =
            arena1.extract(&u_gens.iter().map(|(_, h)| *h).collect::<Vec<_>>());
        let mut arena2 = WordArena::new(u_gens.len());
        let u_tracked: Vec<(Matrix, Handle)> = u_gens
            .iter()
            .enumerate()
            .map(|(i, (m, _))| (m.clone(), arena2.input(i)))
            .collect();
        match recognize_base_case(&u_tracked, &mut arena2, &mut b2, mix_seed(seed, 2, attempt)) {
            Ok(y2) => {
                timings.base_ms += t0.elapsed().as_millis();
                let (rho2, rho2_out) =
                    arena2.extract(&y2.iter().map(|(_, h)| *h).collect::<Vec<_>>());
                break (
                    rho1,
                    rho1_out,
                    outcome.final_node.l_cum.clone(),
                    outcome.degrees,
                    arena2,
                    rho2,
                    rho2_out,
                );
            }
            Err(BaseCaseError::BudgetExhausted) => {
                return Err(fail(Stage::BaseCase, &b1, &b2, &b3))
            }
            Err(BaseCaseError::SiftFailed) => {
                timings.base_ms += t0.elapsed().as_millis();
                // one-sided retry: never accept, try a fresh chain while the
                // budgets allow it
                attempt += 1;
                if b2.remaining() == 0 || (d > 4 && b1.remaining() == 0) {
                    return Err(fail(Stage::BaseCase, &b1, &b2, &b3));
                }
                continue;
            }
        }
    };
    let _ = y2_words_arena2;

    // phase 3: ascent from the embedded SL(2,q)
    let t0 = Instant::now();
    let mut arena3 = WordArena::new(k + 2 * f + 2);
    let y2_handles: Vec<Handle> = (k..k + 2 * f + 2).map(|i| arena3.input(i)).collect();
    let frame1 = BaseChange::new(l1).expect("descent base change is invertible");
    let y2 = StdGens::new(2, d, field.clone(), y2_handles, frame1);
    let x_tracked: Vec<(Matrix, Handle)> =
        x.iter().cloned().enumerate().map(|(i, m)| (m, arena3.input(i))).collect();
    let mut src = match PrSource::new(&x_tracked, mix_seed(seed, 3, 0), &mut arena3) {
        Ok(s) => s,
        Err(_) => return Err(RecogError::BadInput),
    };
    let y_final = match going_up(&mut src, y2, &mut arena3, &mut b3) {
        Ok(y) => y,
        Err(_) => return Err(fail(Stage::Ascent, &b1, &b2, &b3)),
    };
    let (rho3, _rho3_out) =
        arena3.extract(&y_final.gens.iter().map(|(_, h)| *h).collect::<Vec<_>>());
    timings.ascent_ms = t0.elapsed().as_millis();

    // combine the three programs into a single MSLP
    let c12 = compose(&rho1, &rho2, &rho1_out, false).expect("wiring covers the base case");
    let mut wiring3: Vec<usize> = (1..=k).collect();
    wiring3.extend(rho2_out.iter().map(|s| rho1.quota() + s));
    let slp = compose(&c12, &rho3, &wiring3, false).expect("wiring covers the ascent");
    let l = y_final.frame.matrix().clone();
    let stages = PipelineStages {
        descent: rho1,
        descent_out: rho1_out,
        base: rho2,
        base_out: rho2_out,
        ascent: rho3,
    };

    // final verification by exact evaluation
    let t0 = Instant::now();
    let verified = if run_verification {
        verify(x, &l, &slp)
    } else {
        false
    };
    timings.verify_ms = t0.elapsed().as_millis();
    timings.total_ms = t_start.elapsed().as_millis();
    Ok(RecognitionResult {
        l,
        slp,
        stages,
        budgets_used: (b1.used(), b2.used(), b3.used()),
        verified,
        timings,
        chain,
    })
}

/// Exact output check: evaluate the program on X^L and compare against the
/// literal standard generators of SL(d,q).
pub fn verify(x: &[Matrix], l: &Matrix, slp: &Mslp) -> bool {
    let d = x[0].nrows();
    let field = x[0].field().clone();
    let bc = match BaseChange::new(l.clone()) {
        Ok(b) => b,
        Err(_) => return false,
    };
    let conj: Vec<Matrix> = x.iter().map(|m| bc.conjugate(m)).collect();
    if slp.ninputs() != conj.len() {
        return false;
    }
    let out = match slp.eval(&MatrixGroup, &conj) {
        Ok(o) => o,
        Err(_) => return false,
    };
    let flat: Vec<Matrix> = out.into_iter().flatten().collect();
    let want = std_gen_matrices(d, d, field);
    flat == want
}

/// How generated instances disguise the standard generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disguise {
    /// The literal standard generators.
    Identity,
    /// Conjugated by a seeded random invertible matrix.
    Conjugate,
    /// Conjugated, then replaced by a few random words re-checked to
    /// generate.
    Products,
}

/// Seeded test instance: a generating set of SL(d,q) in disguised form.
pub fn gen_instance(d: usize, field: Arc<FieldSpec>, seed: u64, disguise: Disguise) -> Vec<Matrix> {
    use rand::Rng;
    use rand::SeedableRng;
    let gens = std_gen_matrices(d, d, field.clone());
    if disguise == Disguise::Identity {
        return gens;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let t = Matrix::random_invertible(d, field.clone(), &mut rng);
    let tinv = t.inv().unwrap();
    let conj: Vec<Matrix> = gens.iter().map(|g| t.mul(g).unwrap().mul(&tinv).unwrap()).collect();
    if disguise == Disguise::Conjugate {
        return conj;
    }
    // products: up to 6 random words of length <= 20, re-checked to generate
    'outer: loop {
        let nwords = rng.gen_range(3..=6usize);
        let mut words = Vec::with_capacity(nwords);
        for _ in 0..nwords {
            let len = rng.gen_range(2..=20usize);
            let mut w = Matrix::identity(d, field.clone());
            for _ in 0..len {
                let g = &conj[rng.gen_range(0..conj.len())];
                w = w.mul(g).unwrap();
            }
            words.push(w);
        }
        if words.iter().all(|w| w.is_identity()) {
            continue;
        }
        let mut budget = Budget::new(10_000);
        if naming_check_set(&words, rng.gen(), &mut budget) {
            return words;
        }
        // a couple of retries with fresh words
        for _ in 0..20 {
            continue 'outer;
        }
    }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Mslp(#[from] MslpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `FIELD p f c_0 c_1 ... c_f`: the common header of all matrix files.
pub fn field_line(field: &FieldSpec) -> String {
    let coeffs: Vec<String> = field.modulus().iter().map(|c| c.to_string()).collect();
    format!("FIELD {} {} {}", field.p(), field.f(), coeffs.join(" "))
}

fn parse_field_line(line: &str, lineno: usize) -> Result<FieldSpec, FormatError> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let bad = |msg: &str| FormatError::Parse { line: lineno, msg: msg.to_string() };
    if parts.len() < 3 || parts[0] != "FIELD" {
        return Err(bad("expected `FIELD p f c_0 .. c_f`"));
    }
    let p: u64 = parts[1].parse().map_err(|_| bad("bad prime"))?;
    let f: usize = parts[2].parse().map_err(|_| bad("bad degree"))?;
    if parts.len() != 3 + f + 1 {
        return Err(bad("modulus must have f+1 coefficients"));
    }
    let coeffs: Result<Vec<u64>, _> = parts[3..].iter().map(|s| s.parse::<u64>()).collect();
    let coeffs = coeffs.map_err(|_| bad("bad modulus coefficient"))?;
    Ok(FieldSpec::new(p, f, Some(coeffs))?)
}

/// Serialize matrices as a FIELD line followed by MATRIX blocks.
pub fn write_matrices(mats: &[Matrix]) -> String {
    let field = mats[0].field();
    let mut out = field_line(field);
    out.push('\n');
    for m in mats {
        out.push_str(&format!("MATRIX {}\n", m.nrows()));
        for i in 0..m.nrows() {
            let row: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn read_matrices(text: &str) -> Result<(Vec<Matrix>, Arc<FieldSpec>), FormatError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let (ln, first) = lines
        .next()
        .ok_or(FormatError::Parse { line: 1, msg: "empty file".into() })?;
    let field = Arc::new(parse_field_line(first, ln + 1)?);
    let mut mats = Vec::new();
    while let Some((ln, header)) = lines.next() {
        let bad = |msg: String| FormatError::Parse { line: ln + 1, msg };
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 2 || parts[0] != "MATRIX" {
            return Err(bad(format!("expected `MATRIX d`, got `{header}`")));
        }
        let d: usize = parts[1].parse().map_err(|_| bad("bad dimension".into()))?;
        let mut rows: Vec<Vec<Fq>> = Vec::with_capacity(d);
        for _ in 0..d {
            let (rln, row) = lines
                .next()
                .ok_or(FormatError::Parse { line: ln + 1, msg: "truncated matrix".into() })?;
            let vals: Result<Vec<u64>, _> =
                row.split_whitespace().map(|s| s.parse::<u64>()).collect();
            let vals = vals.map_err(|_| FormatError::Parse {
                line: rln + 1,
                msg: "bad matrix entry".into(),
            })?;
            if vals.len() != d {
                return Err(FormatError::Parse {
                    line: rln + 1,
                    msg: format!("expected {d} entries"),
                });
            }
            for &v in &vals {
                field.element(v)?;
            }
            rows.push(vals);
        }
        mats.push(Matrix::from_rows(&rows, field.clone()));
    }
    if mats.is_empty() {
        return Err(FormatError::Parse { line: 1, msg: "no matrices in file".into() });
    }
    Ok((mats, field))
}

/// report.json payload of a recognition run.
#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub d: usize,
    pub q: u64,
    pub seed: u64,
    pub budgets: Budgets,
    pub draws_used: (u64, u64, u64),
    pub verified: bool,
    pub chain: Vec<usize>,
    pub mslp_length: usize,
    pub mslp_quota: usize,
    pub timings: PhaseTimings,
}

impl Report {
    pub fn from_result(r: &RecognitionResult, seed: u64, budgets: Budgets) -> Report {
        let field = r.l.field();
        Report {
            d: r.l.nrows(),
            q: field.q(),
            seed,
            budgets,
            draws_used: r.budgets_used,
            verified: r.verified,
            chain: r.chain.clone(),
            mslp_length: r.slp.len(),
            mslp_quota: r.slp.quota(),
            timings: r.timings.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Benchmark harness
// ---------------------------------------------------------------------------

/// Per-(d,q) summary over seeded repeats, as one CSV row.
pub fn bench(
    specs: &[(usize, u64)],
    repeats: usize,
    budgets: Option<Budgets>,
    seed: u64,
    verify_runs: bool,
) -> String {
    let mut out = String::from("d,q,repeats,successes,mean_ms,median_ms,mean_draws\n");
    for &(d, q) in specs {
        let field = Arc::new(FieldSpec::from_order(q).expect("prime power"));
        let b = budgets.unwrap_or_else(|| Budgets::defaults_for(d, q));
        let mut times: Vec<u128> = Vec::new();
        let mut draws: Vec<u64> = Vec::new();
        let mut successes = 0usize;
        for rep in 0..repeats {
            let inst_seed = mix_seed(seed, 100 + d as u64, rep as u64);
            let x = gen_instance(d, field.clone(), inst_seed, Disguise::Conjugate);
            let t0 = Instant::now();
            match standard_generators(&x, b, mix_seed(seed, 200, rep as u64), Strategy::Naming, verify_runs)
            {
                Ok(r) if !verify_runs || r.verified => {
                    successes += 1;
                    times.push(t0.elapsed().as_millis());
                    let (u1, u2, u3) = r.budgets_used;
                    draws.push(u1 + u2 + u3);
                }
                _ => {
                    times.push(t0.elapsed().as_millis());
                }
            }
        }
        times.sort_unstable();
        let mean = if times.is_empty() {
            0.0
        } else {
            times.iter().sum::<u128>() as f64 / times.len() as f64
        };
        let median = if times.is_empty() { 0 } else { times[times.len() / 2] };
        let mean_draws = if draws.is_empty() {
            0.0
        } else {
            draws.iter().sum::<u64>() as f64 / draws.len() as f64
        };
        out.push_str(&format!(
            "{d},{q},{repeats},{successes},{mean:.1},{median},{mean_draws:.1}\n"
        ));
    }
    out
}
