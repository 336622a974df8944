//! Constructive recognition of the degree-4 base case group by a randomized
//! stabilizer chain on projective points and vectors of F_q^4, with
//! word-labelled transversals and sifting. The output is an MSLP expressing
//! the standard generators of a stingray embedded SL(2,q) in the input
//! generators; every word is verified by evaluation before it is returned.

use crate::gfq::{FieldSpec, Fq};
use crate::matfq::{standard_generators, Matrix};
use crate::mslp::{Handle, MatrixGroup, WordArena};
use crate::rnd::{Budget, PrSource, RndError};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum BaseCaseError {
    #[error("random-selection budget exhausted")]
    BudgetExhausted,
    #[error("a target element failed to sift through the stabilizer chain")]
    SiftFailed,
}

impl From<RndError> for BaseCaseError {
    fn from(_: RndError) -> Self {
        BaseCaseError::BudgetExhausted
    }
}

/// Consecutive clean sifts required before the chain is trusted.
const CLEAN_SIFTS: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum BasePoint {
    /// Projective point, stored as the normalized vector (first nonzero
    /// coordinate scaled to 1).
    Proj(Vec<Fq>),
    /// Plain vector.
    Vector(Vec<Fq>),
}

impl BasePoint {
    fn rep(&self) -> &[Fq] {
        match self {
            BasePoint::Proj(v) | BasePoint::Vector(v) => v,
        }
    }

    fn image(&self, g: &Matrix) -> Vec<Fq> {
        self.image_of(self.rep(), g)
    }

    fn image_of(&self, v: &[Fq], g: &Matrix) -> Vec<Fq> {
        let w = g.apply_row(v);
        match self {
            BasePoint::Proj(_) => normalize_proj(w, g.field()),
            BasePoint::Vector(_) => w,
        }
    }
}

fn normalize_proj(mut v: Vec<Fq>, field: &Arc<FieldSpec>) -> Vec<Fq> {
    if let Some(first) = v.iter().position(|&x| x != 0) {
        let inv = field.inv(v[first]).unwrap();
        for x in v.iter_mut() {
            *x = field.mul(*x, inv);
        }
    }
    v
}

/// Transversal entry: element mapping the base point to the keyed point,
/// `None` for the base point itself (the identity).
type Transversal = HashMap<Vec<Fq>, Option<(Matrix, Handle)>>;

struct Level {
    base: BasePoint,
    gens: Vec<(Matrix, Handle)>,
    orbit: Transversal,
    /// Orbit points in insertion order; the closure walks this list so that
    /// transversal choices are deterministic.
    points: Vec<Vec<Fq>>,
}

impl Level {
    fn new(base: BasePoint) -> Level {
        let mut orbit = Transversal::new();
        let rep = base.rep().to_vec();
        orbit.insert(rep.clone(), None);
        Level { base, gens: Vec::new(), orbit, points: vec![rep] }
    }

    /// Close the orbit under the level generators, recording transversal
    /// elements as products parent-transversal * generator. Points are
    /// processed in insertion order and generators in list order.
    fn close_orbit(&mut self, arena: &mut WordArena) {
        let mut i = 0;
        while i < self.points.len() {
            let pt = self.points[i].clone();
            let t_parent = self.orbit[&pt].clone();
            for (g, hg) in self.gens.clone() {
                let img = self.base.image_of(&pt, &g);
                if self.orbit.contains_key(&img) {
                    continue;
                }
                let entry = match &t_parent {
                    None => (g.clone(), hg),
                    Some((tm, th)) => (tm.mul(&g).unwrap(), arena.mul(*th, hg)),
                };
                self.orbit.insert(img.clone(), Some(entry));
                self.points.push(img);
            }
            i += 1;
        }
    }
}

/// Word-labelled stabilizer chain. Base points: one projective point, then a
/// vector in its line, then further points added adaptively until random
/// elements sift to the identity.
pub struct StabChain {
    levels: Vec<Level>,
}

impl StabChain {
    /// Orbit sizes along the chain; their product is the group order when
    /// the chain is complete.
    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// Strip an element through the chain: Ok carries the residue after all
    /// levels, Err flags an orbit miss at the reported level.
    fn sift_residue(
        &self,
        g: &Matrix,
        hg: Handle,
        arena: &mut WordArena,
    ) -> Result<(Matrix, Handle), (Matrix, Handle, usize)> {
        let mut cur = g.clone();
        let mut hcur = hg;
        for (k, level) in self.levels.iter().enumerate() {
            let img = level.base.image(&cur);
            match level.orbit.get(&img) {
                None => return Err((cur, hcur, k)),
                Some(None) => {}
                Some(Some((tm, th))) => {
                    cur = cur.mul(&tm.inv().unwrap()).unwrap();
                    let thinv = arena.inv(*th);
                    hcur = arena.mul(hcur, thinv);
                }
            }
        }
        Ok((cur, hcur))
    }

    /// Express a non-identity group element as a word in the input
    /// generators: the reversed product of the transversal elements collected
    /// while sifting. `None` when the element does not strip to the identity.
    pub fn express(&self, g: &Matrix, arena: &mut WordArena) -> Option<Handle> {
        assert!(!g.is_identity(), "identity words are the caller's business");
        let mut cur = g.clone();
        let mut ts: Vec<Handle> = Vec::new();
        for level in &self.levels {
            let img = level.base.image(&cur);
            match level.orbit.get(&img)? {
                None => {}
                Some((tm, th)) => {
                    cur = cur.mul(&tm.inv().unwrap()).unwrap();
                    ts.push(*th);
                }
            }
        }
        if !cur.is_identity() {
            return None;
        }
        // g = t_k * ... * t_1
        let mut word: Option<Handle> = None;
        for t in ts.into_iter().rev() {
            word = Some(match word {
                None => t,
                Some(w) => arena.mul(w, t),
            });
        }
        word
    }
}

/// Build a stabilizer chain for the group generated by `gens` by sifting
/// random products until `CLEAN_SIFTS` consecutive ones strip to identity.
pub fn build_stab_chain(
    gens: &[(Matrix, Handle)],
    arena: &mut WordArena,
    budget: &mut Budget,
    seed: u64,
) -> Result<StabChain, BaseCaseError> {
    let d = gens[0].0.nrows();
    let field = gens[0].0.field().clone();
    let mut e1 = vec![0; d];
    e1[0] = 1;
    let mut chain = StabChain {
        levels: vec![Level::new(BasePoint::Proj(e1.clone())), Level::new(BasePoint::Vector(e1))],
    };
    chain.levels[0].gens = gens.to_vec();
    chain.levels[0].close_orbit(arena);

    let mut src = PrSource::new(gens, seed, arena)?;
    let mut clean = 0u32;
    while clean < CLEAN_SIFTS {
        let (g, hg) = src.next(arena, budget)?;
        match chain.sift_residue(&g, hg, arena) {
            Ok((res, _)) if res.is_identity() => {
                clean += 1;
            }
            Ok((res, hres)) => {
                // residue fixes all current base points: a new level is needed
                clean = 0;
                let base = new_base_point(&res, &field, d);
                let mut level = Level::new(base);
                level.gens.push((res, hres));
                level.close_orbit(arena);
                chain.levels.push(level);
            }
            Err((res, hres, k)) => {
                // orbit miss at level k: the partial residue extends level k
                clean = 0;
                chain.levels[k].gens.push((res, hres));
                chain.levels[k].close_orbit(arena);
            }
        }
    }
    Ok(chain)
}

/// A base point moved by `g`: the first standard basis vector whose
/// projective point moves, else the first vector moved (scalar action).
fn new_base_point(g: &Matrix, field: &Arc<FieldSpec>, d: usize) -> BasePoint {
    for i in 0..d {
        let mut e = vec![0; d];
        e[i] = 1;
        let img = normalize_proj(g.apply_row(&e), field);
        if img != e {
            return BasePoint::Proj(e);
        }
    }
    for i in 0..d {
        let mut e = vec![0; d];
        e[i] = 1;
        if g.apply_row(&e) != e {
            return BasePoint::Vector(e);
        }
    }
    unreachable!("identity residues never reach base-point selection")
}

/// Recognize the degree-4 base case: build a stabilizer chain for the group
/// generated by `u_gens`, sift the 2f+2 standard generators of the embedded
/// SL(2,q) and return them with verified words. The base change is the
/// identity (the descent already aligned the block).
pub fn recognize_base_case(
    u_gens: &[(Matrix, Handle)],
    arena: &mut WordArena,
    budget: &mut Budget,
    seed: u64,
) -> Result<Vec<(Matrix, Handle)>, BaseCaseError> {
    let d = u_gens[0].0.nrows();
    assert_eq!(d, 4, "base case expects the degree-4 block");
    let field = u_gens[0].0.field().clone();
    let chain = build_stab_chain(u_gens, arena, budget, seed)?;
    let targets = standard_generators(2, 4, field);
    let mut out = Vec::with_capacity(targets.len());
    for t in &targets {
        let word = if t.is_identity() {
            // z2 of the degree-2 group is the identity
            let h0 = u_gens[0].1;
            let h0inv = arena.inv(h0);
            arena.mul(h0, h0inv)
        } else {
            chain.express(t, arena).ok_or(BaseCaseError::SiftFailed)?
        };
        out.push((t.clone(), word));
    }
    // absolute output check: every word evaluates to its target exactly
    let inputs: Vec<Matrix> = u_gens.iter().map(|(m, _)| m.clone()).collect();
    for (t, w) in &out {
        let v =
            arena.eval(&MatrixGroup, &inputs, *w).map_err(|_| BaseCaseError::SiftFailed)?;
        if &v != t {
            return Err(BaseCaseError::SiftFailed);
        }
    }
    Ok(out)
}
