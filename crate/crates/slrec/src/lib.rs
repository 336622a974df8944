//! Constructive recognition of SL(d,q) in its natural representation.
//!
//! Given a generating set X of a group known to equal SL(d,q), the library
//! computes a base change matrix L and a straight-line program with memory
//! (MSLP) that, evaluated on X^L, yields the standard generators of the
//! conjugated group, and verifies the result by exact evaluation.

pub mod gfq;
pub mod matfq;
pub mod mslp;
pub mod rnd;
pub mod stingray;
pub mod descent;
pub mod basecase;
pub mod ascent;
pub mod driver;
