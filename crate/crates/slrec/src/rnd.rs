//! Seedable pseudo-random group elements by product replacement, with word
//! tracking and the shared random-selection budget.

use crate::matfq::Matrix;
use crate::mslp::{Handle, WordArena};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum RndError {
    #[error("random-selection budget exhausted")]
    BudgetExhausted,
    #[error("empty generating set")]
    EmptyGenerators,
}

/// Shared counter of remaining random selections. Every draw decrements it by
/// exactly one; nested algorithms borrow the same budget so the total number
/// of draws is bounded by the initial value.
#[derive(Debug, Clone)]
pub struct Budget {
    initial: u64,
    remaining: u64,
}

impl Budget {
    pub fn new(n: u64) -> Budget {
        Budget { initial: n, remaining: n }
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    pub fn used(&self) -> u64 {
        self.initial - self.remaining
    }

    pub fn draw(&mut self) -> Result<(), RndError> {
        if self.remaining == 0 {
            return Err(RndError::BudgetExhausted);
        }
        self.remaining -= 1;
        Ok(())
    }
}

const DEFAULT_SLOTS: usize = 10;
const DEFAULT_SCRAMBLE: usize = 50;

/// Product-replacement source over a fixed generating set. Each accumulator
/// entry carries the arena word that evaluates to it on the original inputs.
pub struct PrSource {
    slots: Vec<(Matrix, Handle)>,
    rng: ChaCha8Rng,
}

impl PrSource {
    /// Accumulator filled by cycling the generators, then burn-in
    /// replacement moves applied (scaled with the degree: short products of
    /// sparse generators do not mix the geometry of large spaces). Burn-in
    /// does not consume budget.
    pub fn new(
        gens: &[(Matrix, Handle)],
        seed: u64,
        arena: &mut WordArena,
    ) -> Result<PrSource, RndError> {
        let d = gens.first().map_or(0, |(m, _)| m.nrows());
        let scramble = DEFAULT_SCRAMBLE.max(2 * d);
        PrSource::with_params(gens, seed, DEFAULT_SLOTS, scramble, arena)
    }

    pub fn with_params(
        gens: &[(Matrix, Handle)],
        seed: u64,
        r: usize,
        scramble: usize,
        arena: &mut WordArena,
    ) -> Result<PrSource, RndError> {
        if gens.is_empty() {
            return Err(RndError::EmptyGenerators);
        }
        let r = r.max(gens.len()).max(2);
        let mut slots = Vec::with_capacity(r);
        for i in 0..r {
            slots.push(gens[i % gens.len()].clone());
        }
        let mut src = PrSource { slots, rng: ChaCha8Rng::seed_from_u64(seed) };
        for _ in 0..scramble {
            src.replacement_move(arena);
        }
        Ok(src)
    }

    fn replacement_move(&mut self, arena: &mut WordArena) -> usize {
        let r = self.slots.len();
        let i = self.rng.gen_range(0..r);
        let mut j = self.rng.gen_range(0..r - 1);
        if j >= i {
            j += 1;
        }
        let invert = self.rng.gen_bool(0.5);
        let (mj, hj) = self.slots[j].clone();
        let (mi, hi) = self.slots[i].clone();
        let (factor, hfactor) = if invert {
            (mj.inv().expect("group elements are invertible"), arena.inv(hj))
        } else {
            (mj, hj)
        };
        let m = mi.mul(&factor).expect("compatible shapes");
        let h = arena.mul(hi, hfactor);
        self.slots[i] = (m, h);
        i
    }

    /// One replacement move, then return the refreshed slot. Consumes one
    /// unit of budget; `BudgetExhausted` tells the caller to return fail.
    pub fn next(
        &mut self,
        arena: &mut WordArena,
        budget: &mut Budget,
    ) -> Result<(Matrix, Handle), RndError> {
        budget.draw()?;
        let i = self.replacement_move(arena);
        Ok(self.slots[i].clone())
    }

    /// Deterministic derived seed for nested randomized subroutines.
    pub fn fork_seed(&mut self) -> u64 {
        self.rng.gen()
    }
}
