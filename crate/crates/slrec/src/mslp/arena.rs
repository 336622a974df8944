//! Shared word DAG behind MSLP construction.
//!
//! Algorithms track every group element they build as a node over the input
//! slots; extracting an [`Mslp`] walks the nodes reachable from the requested
//! targets and assigns memory slots with last-use reuse, so program quota
//! stays proportional to the live width of the computation rather than its
//! length.

use super::{Instruction, Mslp, MslpError};
use num_bigint::BigUint;
use std::collections::HashMap;

/// Index of a word in a [`WordArena`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Handle(usize);

#[derive(Debug, Clone, Copy)]
enum Node {
    Input(usize),
    Mul(usize, usize),
    Inv(usize),
}

#[derive(Debug, Clone)]
pub struct WordArena {
    nodes: Vec<Node>,
    ninputs: usize,
    inv_cache: HashMap<usize, usize>,
}

impl WordArena {
    pub fn new(ninputs: usize) -> WordArena {
        let nodes = (0..ninputs).map(Node::Input).collect();
        WordArena { nodes, ninputs, inv_cache: HashMap::new() }
    }

    pub fn ninputs(&self) -> usize {
        self.ninputs
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Handle of input slot `i` (0-based).
    pub fn input(&self, i: usize) -> Handle {
        assert!(i < self.ninputs);
        Handle(i)
    }

    pub fn mul(&mut self, a: Handle, b: Handle) -> Handle {
        self.nodes.push(Node::Mul(a.0, b.0));
        Handle(self.nodes.len() - 1)
    }

    pub fn inv(&mut self, a: Handle) -> Handle {
        if let Some(&h) = self.inv_cache.get(&a.0) {
            return Handle(h);
        }
        self.nodes.push(Node::Inv(a.0));
        let h = self.nodes.len() - 1;
        self.inv_cache.insert(a.0, h);
        self.inv_cache.insert(h, a.0);
        Handle(h)
    }

    /// Product of a slice of handles, left to right; empty product panics.
    pub fn product(&mut self, hs: &[Handle]) -> Handle {
        let mut it = hs.iter();
        let mut acc = *it.next().expect("empty product has no identity handle");
        for h in it {
            acc = self.mul(acc, *h);
        }
        acc
    }

    /// a^e by square and multiply; e >= 1.
    pub fn pow(&mut self, a: Handle, e: &BigUint) -> Handle {
        let bits = e.bits();
        assert!(bits >= 1, "zero exponent needs an identity element");
        let mut acc: Option<Handle> = None;
        let mut base = a;
        for i in 0..bits {
            if e.bit(i) {
                acc = Some(match acc {
                    None => base,
                    Some(x) => self.mul(x, base),
                });
            }
            if i + 1 < bits {
                base = self.mul(base, base);
            }
        }
        acc.unwrap()
    }

    pub fn pow_u64(&mut self, a: Handle, e: u64) -> Handle {
        self.pow(a, &BigUint::from(e))
    }

    /// Conjugate b^-1 a b.
    pub fn conj(&mut self, a: Handle, b: Handle) -> Handle {
        let binv = self.inv(b);
        let t = self.mul(binv, a);
        self.mul(t, b)
    }

    /// Evaluate a handle over concrete input elements, memoizing shared
    /// subwords. Used by tests and the self-checks of the pipeline.
    pub fn eval<G: super::GroupOps>(
        &self,
        group: &G,
        inputs: &[G::Elem],
        target: Handle,
    ) -> Result<G::Elem, MslpError> {
        assert_eq!(inputs.len(), self.ninputs);
        let mut memo: HashMap<usize, G::Elem> = HashMap::new();
        let mut stack = vec![target.0];
        while let Some(&i) = stack.last() {
            if memo.contains_key(&i) {
                stack.pop();
                continue;
            }
            match self.nodes[i] {
                Node::Input(k) => {
                    memo.insert(i, inputs[k].clone());
                    stack.pop();
                }
                Node::Mul(a, b) => {
                    let ma = memo.contains_key(&a);
                    let mb = memo.contains_key(&b);
                    if ma && mb {
                        let v = group.mul(&memo[&a], &memo[&b]);
                        memo.insert(i, v);
                        stack.pop();
                    } else {
                        if !ma {
                            stack.push(a);
                        }
                        if !mb {
                            stack.push(b);
                        }
                    }
                }
                Node::Inv(a) => {
                    if memo.contains_key(&a) {
                        let v = group.inv(&memo[&a])?;
                        memo.insert(i, v);
                        stack.pop();
                    } else {
                        stack.push(a);
                    }
                }
            }
        }
        Ok(memo.remove(&target.0).unwrap())
    }

    /// Extract an MSLP computing the targets, emitting one Show per target in
    /// the given order. Input slots 1..=ninputs are never overwritten, so a
    /// composition can keep wiring them downstream.
    pub fn extract(&self, targets: &[Handle]) -> (Mslp, Vec<usize>) {
        // reachable set
        let mut needed = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = targets.iter().map(|h| h.0).collect();
        while let Some(i) = stack.pop() {
            if needed[i] {
                continue;
            }
            needed[i] = true;
            match self.nodes[i] {
                Node::Input(_) => {}
                Node::Mul(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Node::Inv(a) => stack.push(a),
            }
        }
        // last use of every needed node, in topological (= index) order
        let mut last_use: HashMap<usize, usize> = HashMap::new();
        for i in 0..self.nodes.len() {
            if !needed[i] {
                continue;
            }
            match self.nodes[i] {
                Node::Input(_) => {}
                Node::Mul(a, b) => {
                    last_use.insert(a, i);
                    last_use.insert(b, i);
                }
                Node::Inv(a) => {
                    last_use.insert(a, i);
                }
            }
        }
        // targets stay live to the end
        for h in targets {
            last_use.insert(h.0, usize::MAX);
        }
        let mut slot_of: HashMap<usize, usize> = HashMap::new();
        let mut free: Vec<usize> = Vec::new();
        let mut quota = self.ninputs;
        let mut code: Vec<Instruction> = Vec::new();
        for i in 0..self.ninputs {
            slot_of.insert(i, i + 1);
        }
        for i in self.ninputs..self.nodes.len() {
            if !needed[i] {
                continue;
            }
            let dst = match free.pop() {
                Some(s) => s,
                None => {
                    quota += 1;
                    quota
                }
            };
            match self.nodes[i] {
                Node::Input(_) => unreachable!("inputs precede all other nodes"),
                Node::Mul(a, b) => {
                    code.push(Instruction::Mul { dst, lhs: slot_of[&a], rhs: slot_of[&b] });
                    let srcs = if a == b { &[a][..] } else { &[a, b][..] };
                    for &src in srcs {
                        if last_use.get(&src) == Some(&i) && src >= self.ninputs {
                            free.push(slot_of[&src]);
                        }
                    }
                }
                Node::Inv(a) => {
                    code.push(Instruction::Inv { dst, src: slot_of[&a] });
                    if last_use.get(&a) == Some(&i) && a >= self.ninputs {
                        free.push(slot_of[&a]);
                    }
                }
            }
            slot_of.insert(i, dst);
        }
        let mut out_slots = Vec::with_capacity(targets.len());
        for h in targets {
            let s = slot_of[&h.0];
            code.push(Instruction::Show(vec![s]));
            out_slots.push(s);
        }
        let prog = Mslp::new(quota, self.ninputs, code).expect("extracted program is well formed");
        (prog, out_slots)
    }
}
