//! Straight-line programs with memory.
//!
//! An [`Mslp`] is a list of copy/multiply/invert/show instructions over a
//! fixed number of memory slots. Programs are independent of the group they
//! are evaluated in: evaluation only needs multiplication, inversion and
//! equality, so a program encoded in one group can be replayed in another.

mod arena;

pub use arena::{Handle, WordArena};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum MslpError {
    #[error("slot {slot} read before any write (instruction {index})")]
    UninitializedSlotRead { slot: usize, index: usize },
    #[error("slot index {slot} outside quota {quota} (instruction {index})")]
    SlotOutOfRange { slot: usize, quota: usize, index: usize },
    #[error("declared input count {0} exceeds quota {1}")]
    TooManyInputs(usize, usize),
    #[error("evaluation requires {expected} initial elements, got {got}")]
    BadInitLength { expected: usize, got: usize },
    #[error("inversion of a singular element")]
    SingularInverse,
    #[error("wiring covers {got} inputs, second program declares {expected}")]
    WiringIncomplete { expected: usize, got: usize },
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },
}

/// One MSLP instruction; slot indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    /// m_dst <- m_src
    Copy { dst: usize, src: usize },
    /// m_dst <- m_lhs * m_rhs
    Mul { dst: usize, lhs: usize, rhs: usize },
    /// m_dst <- m_src^-1
    Inv { dst: usize, src: usize },
    /// display the listed slots, ascending
    Show(Vec<usize>),
}

/// A straight-line program with memory quota and a number of leading slots
/// the caller initializes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mslp {
    quota: usize,
    ninputs: usize,
    code: Vec<Instruction>,
}

/// Group operations contract used by evaluation.
pub trait GroupOps {
    type Elem: Clone;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, MslpError>;
    fn eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
}

/// Matrices over GF(q) as a group (multiplicative, invertible elements).
pub struct MatrixGroup;

impl GroupOps for MatrixGroup {
    type Elem = crate::matfq::Matrix;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.mul(b).expect("shape/field mismatch in MSLP evaluation")
    }
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, MslpError> {
        a.inv().map_err(|_| MslpError::SingularInverse)
    }
    fn eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        a == b
    }
}

impl Mslp {
    /// Statically validated construction: every read must be preceded by a
    /// write or covered by a declared input, and all indices must fit the
    /// quota.
    pub fn new(quota: usize, ninputs: usize, code: Vec<Instruction>) -> Result<Mslp, MslpError> {
        if ninputs > quota {
            return Err(MslpError::TooManyInputs(ninputs, quota));
        }
        let mut live = vec![false; quota + 1];
        for s in 1..=ninputs {
            live[s] = true;
        }
        let check = |slot: usize, index: usize| -> Result<(), MslpError> {
            if slot == 0 || slot > quota {
                return Err(MslpError::SlotOutOfRange { slot, quota, index });
            }
            Ok(())
        };
        for (index, ins) in code.iter().enumerate() {
            match ins {
                Instruction::Copy { dst, src } | Instruction::Inv { dst, src } => {
                    check(*src, index)?;
                    check(*dst, index)?;
                    if !live[*src] {
                        return Err(MslpError::UninitializedSlotRead { slot: *src, index });
                    }
                    live[*dst] = true;
                }
                Instruction::Mul { dst, lhs, rhs } => {
                    check(*lhs, index)?;
                    check(*rhs, index)?;
                    check(*dst, index)?;
                    if !live[*lhs] {
                        return Err(MslpError::UninitializedSlotRead { slot: *lhs, index });
                    }
                    if !live[*rhs] {
                        return Err(MslpError::UninitializedSlotRead { slot: *rhs, index });
                    }
                    live[*dst] = true;
                }
                Instruction::Show(slots) => {
                    for &s in slots {
                        check(s, index)?;
                        if !live[s] {
                            return Err(MslpError::UninitializedSlotRead { slot: s, index });
                        }
                    }
                }
            }
        }
        Ok(Mslp { quota, ninputs, code })
    }

    pub fn empty() -> Mslp {
        Mslp { quota: 0, ninputs: 0, code: Vec::new() }
    }

    pub fn quota(&self) -> usize {
        self.quota
    }

    pub fn ninputs(&self) -> usize {
        self.ninputs
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn code(&self) -> &[Instruction] {
        &self.code
    }

    /// Execute over a memory initialized with `init`; `init` may supply
    /// either all `quota` slots or just the declared inputs (the remaining
    /// slots are then never read before a write, by static validation).
    /// Returns one element list per Show, slots in ascending order.
    pub fn eval<G: GroupOps>(
        &self,
        group: &G,
        init: &[G::Elem],
    ) -> Result<Vec<Vec<G::Elem>>, MslpError> {
        if init.len() != self.quota && init.len() != self.ninputs {
            return Err(MslpError::BadInitLength { expected: self.ninputs, got: init.len() });
        }
        if self.quota == 0 {
            return Ok(self.code.iter().filter_map(|i| match i {
                Instruction::Show(_) => Some(Vec::new()),
                _ => None,
            }).collect());
        }
        let filler = init.first().cloned();
        let mut mem: Vec<G::Elem> = Vec::with_capacity(self.quota);
        mem.extend_from_slice(init);
        while mem.len() < self.quota {
            mem.push(filler.clone().expect("quota > 0 requires at least one element"));
        }
        let mut shows = Vec::new();
        for ins in &self.code {
            match ins {
                Instruction::Copy { dst, src } => mem[*dst - 1] = mem[*src - 1].clone(),
                Instruction::Mul { dst, lhs, rhs } => {
                    mem[*dst - 1] = group.mul(&mem[*lhs - 1], &mem[*rhs - 1]);
                }
                Instruction::Inv { dst, src } => mem[*dst - 1] = group.inv(&mem[*src - 1])?,
                Instruction::Show(slots) => {
                    let mut sorted = slots.clone();
                    sorted.sort_unstable();
                    sorted.dedup();
                    shows.push(sorted.iter().map(|&s| mem[s - 1].clone()).collect());
                }
            }
        }
        Ok(shows)
    }

    /// All slots listed by Show instructions, in program order.
    pub fn show_slots(&self) -> Vec<Vec<usize>> {
        self.code
            .iter()
            .filter_map(|i| match i {
                Instruction::Show(s) => Some(s.clone()),
                _ => None,
            })
            .collect()
    }

    /// Serialize to the line format `MSLP quota ninputs` followed by
    /// `CP k i` / `MU k i j` / `IV k i` / `SH i1 i2 ...`.
    pub fn serialize(&self) -> String {
        let mut out = format!("MSLP {} {}\n", self.quota, self.ninputs);
        for ins in &self.code {
            match ins {
                Instruction::Copy { dst, src } => out.push_str(&format!("CP {dst} {src}\n")),
                Instruction::Mul { dst, lhs, rhs } => {
                    out.push_str(&format!("MU {dst} {lhs} {rhs}\n"))
                }
                Instruction::Inv { dst, src } => out.push_str(&format!("IV {dst} {src}\n")),
                Instruction::Show(slots) => {
                    out.push_str("SH");
                    for s in slots {
                        out.push_str(&format!(" {s}"));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn deserialize(text: &str) -> Result<Mslp, MslpError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (lno, header) = lines
            .next()
            .ok_or(MslpError::ParseError { line: 1, msg: "missing header".into() })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "MSLP" {
            return Err(MslpError::ParseError { line: lno + 1, msg: "expected `MSLP quota ninputs`".into() });
        }
        let parse = |s: &str, line: usize| -> Result<usize, MslpError> {
            s.parse().map_err(|_| MslpError::ParseError { line, msg: format!("bad integer `{s}`") })
        };
        let quota = parse(parts[1], lno + 1)?;
        let ninputs = parse(parts[2], lno + 1)?;
        let mut code = Vec::new();
        for (lno, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let ln = lno + 1;
            match parts[0] {
                "CP" if parts.len() == 3 => code.push(Instruction::Copy {
                    dst: parse(parts[1], ln)?,
                    src: parse(parts[2], ln)?,
                }),
                "MU" if parts.len() == 4 => code.push(Instruction::Mul {
                    dst: parse(parts[1], ln)?,
                    lhs: parse(parts[2], ln)?,
                    rhs: parse(parts[3], ln)?,
                }),
                "IV" if parts.len() == 3 => code.push(Instruction::Inv {
                    dst: parse(parts[1], ln)?,
                    src: parse(parts[2], ln)?,
                }),
                "SH" => {
                    let mut slots = Vec::new();
                    for p in &parts[1..] {
                        slots.push(parse(p, ln)?);
                    }
                    code.push(Instruction::Show(slots));
                }
                other => {
                    return Err(MslpError::ParseError {
                        line: ln,
                        msg: format!("unknown opcode `{other}`"),
                    })
                }
            }
        }
        Mslp::new(quota, ninputs, code)
    }
}

/// Chain two programs: run `first`, rebind `second`'s declared inputs to
/// slots of `first` per `wiring` (wiring[i] = first-slot feeding second's
/// input i+1), then run `second` relocated above `first`'s memory.
///
/// Layout contract: slot `s` of `second` occupies slot `first.quota() + s`
/// of the composition. Shows of `first` are dropped unless `keep_shows`.
pub fn compose(
    first: &Mslp,
    second: &Mslp,
    wiring: &[usize],
    keep_shows: bool,
) -> Result<Mslp, MslpError> {
    if wiring.len() != second.ninputs {
        return Err(MslpError::WiringIncomplete { expected: second.ninputs, got: wiring.len() });
    }
    let base = first.quota;
    let mut code: Vec<Instruction> = Vec::with_capacity(first.code.len() + second.code.len());
    for ins in &first.code {
        match ins {
            Instruction::Show(_) if !keep_shows => {}
            other => code.push(other.clone()),
        }
    }
    for (i, &src) in wiring.iter().enumerate() {
        code.push(Instruction::Copy { dst: base + i + 1, src });
    }
    for ins in &second.code {
        code.push(match ins {
            Instruction::Copy { dst, src } => {
                Instruction::Copy { dst: base + dst, src: base + src }
            }
            Instruction::Mul { dst, lhs, rhs } => {
                Instruction::Mul { dst: base + dst, lhs: base + lhs, rhs: base + rhs }
            }
            Instruction::Inv { dst, src } => Instruction::Inv { dst: base + dst, src: base + src },
            Instruction::Show(slots) => Instruction::Show(slots.iter().map(|s| base + s).collect()),
        });
    }
    Mslp::new(base + second.quota, first.ninputs, code)
}
