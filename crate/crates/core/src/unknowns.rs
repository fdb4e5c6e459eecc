//! The commutative algebra of unknown numbers over a finite atom space.
//!
//! An unknown is a valuation: one exact rational per atom (possible world).
//! Constants embed as constant valuations, indicators of propositions are the
//! 0/1 valuations, and "proposition A implies AV(X)=s" is read as: X is
//! constant s on every atom of A.

use num::{One, Zero};
use thiserror::Error;

use crate::boolean::{same_space, Proposition, SpaceRef};
use crate::rational::{format_rat, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnknownError {
    #[error("unknowns belong to different atom spaces")]
    SpaceMismatch,
    #[error("condition is the contradiction 0, outside E_0")]
    ZeroCondition,
    #[error("value count {got} does not match atom count {expected}")]
    WrongArity { expected: usize, got: usize },
    #[error("atom index {0} outside the space")]
    BadAtom(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Mul,
}

/// An atom-indexed rational valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unknown {
    space: SpaceRef,
    values: Vec<Rat>,
}

/// A designated actual world for `AV` cross-checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    space: SpaceRef,
    actual_atom: usize,
}

impl World {
    pub fn new(space: &SpaceRef, actual_atom: usize) -> Result<Self, UnknownError> {
        if actual_atom >= space.len() {
            return Err(UnknownError::BadAtom(actual_atom));
        }
        Ok(World {
            space: space.clone(),
            actual_atom,
        })
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn actual_atom(&self) -> usize {
        self.actual_atom
    }
}

impl Unknown {
    pub fn new(space: &SpaceRef, values: Vec<Rat>) -> Result<Self, UnknownError> {
        if values.len() != space.len() {
            return Err(UnknownError::WrongArity {
                expected: space.len(),
                got: values.len(),
            });
        }
        Ok(Unknown {
            space: space.clone(),
            values,
        })
    }

    /// The scalar `r` as a known unknown (constant valuation).
    pub fn constant(space: &SpaceRef, r: Rat) -> Self {
        Unknown {
            space: space.clone(),
            values: vec![r; space.len()],
        }
    }

    /// Indicator unknown: 1 on atoms of `a`, 0 elsewhere.
    pub fn indicator(a: &Proposition) -> Self {
        let space = a.space().clone();
        let values = (0..space.len())
            .map(|i| {
                if a.mask() & (1u64 << i) != 0 {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            })
            .collect();
        Unknown { space, values }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn value_at(&self, atom: usize) -> &Rat {
        &self.values[atom]
    }

    /// True iff all per-atom values coincide.
    pub fn constant_value(&self) -> Option<&Rat> {
        let first = &self.values[0];
        self.values.iter().all(|v| v == first).then_some(first)
    }

    pub fn combine(&self, other: &Unknown, op: RingOp) -> Result<Unknown, UnknownError> {
        if !same_space(&self.space, &other.space) {
            return Err(UnknownError::SpaceMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| match op {
                RingOp::Add => a + b,
                RingOp::Mul => a * b,
            })
            .collect();
        Ok(Unknown {
            space: self.space.clone(),
            values,
        })
    }

    pub fn add(&self, other: &Unknown) -> Result<Unknown, UnknownError> {
        self.combine(other, RingOp::Add)
    }

    pub fn mul(&self, other: &Unknown) -> Result<Unknown, UnknownError> {
        self.combine(other, RingOp::Mul)
    }

    /// Pointwise `a*x + b` (unit change, e.g. Celsius to Fahrenheit).
    pub fn affine(a: &Rat, x: &Unknown, b: &Rat) -> Unknown {
        Unknown {
            space: x.space.clone(),
            values: x.values.iter().map(|v| a * v + b).collect(),
        }
    }

    pub fn scale(&self, r: &Rat) -> Unknown {
        Unknown::affine(r, self, &Rat::zero())
    }

    /// `AV(X)`: the value at the actual world.
    pub fn actual_value(&self, w: &World) -> Result<Rat, UnknownError> {
        if !same_space(&self.space, &w.space) {
            return Err(UnknownError::SpaceMismatch);
        }
        Ok(self.values[w.actual_atom].clone())
    }

    /// `Some(s)` iff `a` implies `AV(X) = s`: X constant s on all atoms of a.
    pub fn implied_value(&self, a: &Proposition) -> Result<Option<Rat>, UnknownError> {
        if !same_space(&self.space, a.space()) {
            return Err(UnknownError::SpaceMismatch);
        }
        if a.is_zero() {
            return Err(UnknownError::ZeroCondition);
        }
        let mut atoms = a.atoms();
        let first = &self.values[atoms.next().expect("nonzero proposition")];
        for i in atoms {
            if &self.values[i] != first {
                return Ok(None);
            }
        }
        Ok(Some(first.clone()))
    }

    /// True iff `a` implies `AV(X) <= AV(Y)`: pointwise on atoms of a.
    pub fn implied_leq(&self, other: &Unknown, a: &Proposition) -> Result<bool, UnknownError> {
        if !same_space(&self.space, &other.space) || !same_space(&self.space, a.space()) {
            return Err(UnknownError::SpaceMismatch);
        }
        if a.is_zero() {
            return Err(UnknownError::ZeroCondition);
        }
        Ok(a.atoms().all(|i| self.values[i] <= other.values[i]))
    }

    /// JSON form: atom label -> canonical rational string.
    pub fn to_label_map(&self) -> std::collections::BTreeMap<String, String> {
        self.space
            .labels()
            .iter()
            .zip(&self.values)
            .map(|(l, v)| (l.clone(), format_rat(v)))
            .collect()
    }
}
