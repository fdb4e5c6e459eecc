//! Finite Boolean algebra of propositions over an atom space.
//!
//! Propositions are subsets of the atoms (possible worlds), so logical
//! equivalence is identity and every lattice question is a bitmask question.
//! The full subset is the unit 1 (known true), the empty subset is 0
//! (the contradiction); `E_0` is everything except 0.

use std::sync::Arc;

use thiserror::Error;

/// Enumeration helpers refuse spaces beyond this size (2^n propositions).
pub const MAX_ENUMERABLE_ATOMS: usize = 12;

/// Hard representation cap: proposition masks are 64-bit.
pub const MAX_ATOMS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpaceError {
    #[error("atom space must have at least one atom")]
    Empty,
    #[error("atom space holds at most {MAX_ATOMS} atoms, got {0}")]
    TooManyAtoms(usize),
    #[error("duplicate atom label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown atom label `{0}`")]
    UnknownLabel(String),
    #[error("propositions belong to different atom spaces")]
    SpaceMismatch,
    #[error("enumeration capped at {MAX_ENUMERABLE_ATOMS} atoms, space has {0}")]
    TooLarge(usize),
}

/// Ordered set of distinct atom labels; the order fixes bit positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomSpace {
    labels: Vec<String>,
}

pub type SpaceRef = Arc<AtomSpace>;

impl AtomSpace {
    pub fn new<I, S>(labels: I) -> Result<SpaceRef, SpaceError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(SpaceError::Empty);
        }
        if labels.len() > MAX_ATOMS {
            return Err(SpaceError::TooManyAtoms(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(SpaceError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Arc::new(AtomSpace { labels }))
    }

    /// Space with labels `a1..an`.
    pub fn with_count(n: usize) -> Result<SpaceRef, SpaceError> {
        AtomSpace::new((1..=n).map(|i| format!("a{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.labels[atom]
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SpaceError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| SpaceError::UnknownLabel(label.to_string()))
    }

    fn full_mask(&self) -> u64 {
        if self.len() == MAX_ATOMS {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }
}

pub fn same_space(a: &SpaceRef, b: &SpaceRef) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    And,
    Or,
    Minus,
}

/// A proposition: a subset of the atom space, bitmask semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proposition {
    space: SpaceRef,
    mask: u64,
}

impl Proposition {
    pub fn from_mask(space: &SpaceRef, mask: u64) -> Self {
        debug_assert_eq!(mask & !space.full_mask(), 0, "mask outside atom space");
        Proposition {
            space: space.clone(),
            mask: mask & space.full_mask(),
        }
    }

    pub fn from_labels<'a, I>(space: &SpaceRef, labels: I) -> Result<Self, SpaceError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut mask = 0u64;
        for l in labels {
            mask |= 1u64 << space.index_of(l)?;
        }
        Ok(Proposition::from_mask(space, mask))
    }

    pub fn zero(space: &SpaceRef) -> Self {
        Proposition::from_mask(space, 0)
    }

    pub fn one(space: &SpaceRef) -> Self {
        let mask = space.full_mask();
        Proposition::from_mask(space, mask)
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn connect(&self, other: &Proposition, op: Connective) -> Result<Proposition, SpaceError> {
        if !same_space(&self.space, &other.space) {
            return Err(SpaceError::SpaceMismatch);
        }
        let mask = match op {
            Connective::And => self.mask & other.mask,
            Connective::Or => self.mask | other.mask,
            Connective::Minus => self.mask & !other.mask,
        };
        Ok(Proposition::from_mask(&self.space, mask))
    }

    pub fn and(&self, other: &Proposition) -> Result<Proposition, SpaceError> {
        self.connect(other, Connective::And)
    }

    pub fn or(&self, other: &Proposition) -> Result<Proposition, SpaceError> {
        self.connect(other, Connective::Or)
    }

    /// Set difference `self \ other`.
    pub fn minus(&self, other: &Proposition) -> Result<Proposition, SpaceError> {
        self.connect(other, Connective::Minus)
    }

    pub fn complement(&self) -> Proposition {
        Proposition::from_mask(&self.space, self.space.full_mask() & !self.mask)
    }

    /// True iff every atom of `self` is an atom of `other`.
    pub fn entails(&self, other: &Proposition) -> Result<bool, SpaceError> {
        if !same_space(&self.space, &other.space) {
            return Err(SpaceError::SpaceMismatch);
        }
        Ok(self.mask & !other.mask == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.mask == 0
    }

    pub fn is_one(&self) -> bool {
        self.mask == self.space.full_mask()
    }

    /// Atom indices in ascending order.
    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.mask;
        (0..self.space.len()).filter(move |i| mask & (1u64 << i) != 0)
    }

    /// Member labels, lexicographically sorted (the JSON form).
    pub fn sorted_labels(&self) -> Vec<String> {
        let mut ls: Vec<String> = self
            .atoms()
            .map(|i| self.space.label(i).to_string())
            .collect();
        ls.sort();
        ls
    }
}

/// All 2^n propositions of the space in ascending mask order.
pub fn all_propositions(space: &SpaceRef) -> Result<Vec<Proposition>, SpaceError> {
    if space.len() > MAX_ENUMERABLE_ATOMS {
        return Err(SpaceError::TooLarge(space.len()));
    }
    Ok((0..(1u64 << space.len()))
        .map(|m| Proposition::from_mask(space, m))
        .collect())
}

/// All nonzero propositions (`E_0`) in ascending mask order.
pub fn nonzero_propositions(space: &SpaceRef) -> Result<Vec<Proposition>, SpaceError> {
    Ok(all_propositions(space)?.split_off(1))
}
