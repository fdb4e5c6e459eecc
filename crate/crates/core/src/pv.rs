//! Plausible-value functionals on finite models.
//!
//! The canonical model carries a strictly positive rational weight per atom;
//! `PV(X|A)` is the weighted average of X over the atoms of A, an exact
//! conditional expectation. `PL(A|B) = PV(I_A|B)`. A [`PLTable`] materializes
//! PL over all of `E x E_0` and also represents free-form tables that need
//! not come from any weight state (the raw material for counterexample work).

use std::collections::HashMap;

use num::{One, Zero};
use thiserror::Error;

use crate::boolean::{same_space, Proposition, SpaceRef};
use crate::rational::{format_rat, is_unit_interval, Rat};
use crate::unknowns::{Unknown, World};

/// Tables over `E x E_0` have `2^n (2^n - 1)` entries; materialization is
/// refused beyond this many atoms.
pub const MAX_TABLE_ATOMS: usize = 12;

/// Explicit per-pair storage (arbitrary free-form tables) is refused beyond
/// this many atoms; larger tables must satisfy the intersection property
/// `t[A|B] = t[A&B|B]` and use the compact representation.
pub const MAX_FULL_ATOMS: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PvError {
    #[error("operands belong to different atom spaces")]
    SpaceMismatch,
    #[error("conditioning on the contradiction 0 is outside E_0")]
    ZeroCondition,
    #[error("odds are infinite: PL(notA|B) = 0")]
    InfiniteOdds,
    #[error("weight for atom `{0}` is not strictly positive")]
    NonPositiveWeight(String),
    #[error("weight count {got} does not match atom count {expected}")]
    WrongArity { expected: usize, got: usize },
    #[error("table materialization capped at {max} atoms, space has {got}")]
    TooLarge { max: usize, got: usize },
    #[error("invalid table entry: {0}")]
    InvalidEntry(String),
}

/// A strictly positive rational weight per atom: the state `f` with
/// `PV(X|A) = f(X I_A) / f(I_A)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightState {
    space: SpaceRef,
    weights: Vec<Rat>,
}

impl WeightState {
    pub fn new(space: &SpaceRef, weights: Vec<Rat>) -> Result<Self, PvError> {
        if weights.len() != space.len() {
            return Err(PvError::WrongArity {
                expected: space.len(),
                got: weights.len(),
            });
        }
        for (i, w) in weights.iter().enumerate() {
            if *w <= Rat::zero() {
                return Err(PvError::NonPositiveWeight(space.label(i).to_string()));
            }
        }
        Ok(WeightState {
            space: space.clone(),
            weights,
        })
    }

    pub fn uniform(space: &SpaceRef) -> Self {
        WeightState {
            space: space.clone(),
            weights: vec![Rat::one(); space.len()],
        }
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    /// Sum of weights over every subset mask, `2^n` entries.
    pub(crate) fn subset_sums(&self) -> Vec<Rat> {
        let n = self.space.len();
        let mut sums = vec![Rat::zero(); 1 << n];
        for mask in 1usize..(1 << n) {
            let low = mask & mask.wrapping_neg();
            let bit = low.trailing_zeros() as usize;
            sums[mask] = &sums[mask ^ low] + &self.weights[bit];
        }
        sums
    }
}

/// Common surface for canonical models and their test mutants.
pub trait PlausibleValue {
    fn space(&self) -> &SpaceRef;

    fn pv(&self, x: &Unknown, a: &Proposition) -> Result<Rat, PvError>;

    fn pl(&self, a: &Proposition, b: &Proposition) -> Result<Rat, PvError> {
        self.pv(&Unknown::indicator(a), b)
    }
}

/// The canonical strictly-positive-state model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PVModel {
    state: WeightState,
    world: Option<World>,
}

impl PVModel {
    pub fn new(state: WeightState, world: Option<World>) -> Result<Self, PvError> {
        if let Some(w) = &world {
            if !same_space(w.space(), state.space()) {
                return Err(PvError::SpaceMismatch);
            }
        }
        Ok(PVModel { state, world })
    }

    pub fn from_weights(space: &SpaceRef, weights: Vec<Rat>) -> Result<Self, PvError> {
        Ok(PVModel {
            state: WeightState::new(space, weights)?,
            world: None,
        })
    }

    pub fn state(&self) -> &WeightState {
        &self.state
    }

    pub fn world(&self) -> Option<&World> {
        self.world.as_ref()
    }

    /// `O(A|B) = PL(A|B) / PL(notA|B)`.
    pub fn odds(&self, a: &Proposition, b: &Proposition) -> Result<Rat, PvError> {
        let pa = self.pl(a, b)?;
        let pn = self.pl(&a.complement(), b)?;
        if pn.is_zero() {
            return Err(PvError::InfiniteOdds);
        }
        Ok(pa / pn)
    }

    /// Materializes PL over all of `E x E_0`.
    pub fn pl_table(&self) -> Result<PLTable, PvError> {
        let n = self.state.space().len();
        if n > MAX_TABLE_ATOMS {
            return Err(PvError::TooLarge {
                max: MAX_TABLE_ATOMS,
                got: n,
            });
        }
        let sums = self.state.subset_sums();
        build_canonical_table(self.state.space(), &[sums], |_| 0)
    }
}

impl PlausibleValue for PVModel {
    fn space(&self) -> &SpaceRef {
        self.state.space()
    }

    fn pv(&self, x: &Unknown, a: &Proposition) -> Result<Rat, PvError> {
        if !same_space(self.space(), x.space()) || !same_space(self.space(), a.space()) {
            return Err(PvError::SpaceMismatch);
        }
        if a.is_zero() {
            return Err(PvError::ZeroCondition);
        }
        let mut num = Rat::zero();
        let mut den = Rat::zero();
        for i in a.atoms() {
            let w = &self.state.weights()[i];
            num += w * x.value_at(i);
            den += w;
        }
        Ok(num / den)
    }
}

/// Extracts `g`'s bits at the positions set in `d`, packed low (software PEXT).
pub(crate) fn pack_subset(g: u64, d: u64) -> u64 {
    let mut out = 0u64;
    let mut bit = 0;
    let mut rest = d;
    while rest != 0 {
        let low = rest & rest.wrapping_neg();
        if g & low != 0 {
            out |= 1 << bit;
        }
        bit += 1;
        rest ^= low;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Storage {
    /// Entries for pairs `(G, D)` with `G` a subset of `D != 0`; the entry at
    /// `(A, B)` is the entry at `(A & B, B)`. Index: `offsets[D] + pext(G, D)`.
    Canonical { offsets: Vec<u64>, ids: Vec<u32> },
    /// One entry per `(A, B)` pair, index `(B - 1) << n | A`.
    Full { ids: Vec<u32> },
}

/// A total mapping `(A in E, B in E_0) -> rational in [0, 1]` with the two
/// normalization rows `PL(B|B) = 1`, `PL(0|B) = 0`, and no further structure
/// assumed. Values are interned: equal entries share an id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLTable {
    space: SpaceRef,
    values: Vec<Rat>,
    storage: Storage,
}

impl PLTable {
    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn atom_count(&self) -> usize {
        self.space.len()
    }

    /// Interned value pool; entry ids index into it.
    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn value(&self, id: u32) -> &Rat {
        &self.values[id as usize]
    }

    /// True iff the representation guarantees `t[A|B] = t[A&B|B]`.
    pub fn is_canonical(&self) -> bool {
        matches!(self.storage, Storage::Canonical { .. })
    }

    pub fn entry_id(&self, a_mask: u64, b_mask: u64) -> Result<u32, PvError> {
        if b_mask == 0 {
            return Err(PvError::ZeroCondition);
        }
        match &self.storage {
            Storage::Canonical { offsets, ids } => {
                let g = a_mask & b_mask;
                let idx = offsets[b_mask as usize] + pack_subset(g, b_mask);
                Ok(ids[idx as usize])
            }
            Storage::Full { ids } => {
                let n = self.space.len();
                Ok(ids[(((b_mask - 1) << n) | a_mask) as usize])
            }
        }
    }

    pub fn entry(&self, a: &Proposition, b: &Proposition) -> Result<&Rat, PvError> {
        if !same_space(&self.space, a.space()) || !same_space(&self.space, b.space()) {
            return Err(PvError::SpaceMismatch);
        }
        Ok(self.value(self.entry_id(a.mask(), b.mask())?))
    }

    /// True for canonical storage; for full storage, checked entry by entry.
    pub fn has_intersection_property(&self) -> bool {
        match &self.storage {
            Storage::Canonical { .. } => true,
            Storage::Full { ids } => {
                let n = self.space.len();
                for b in 1u64..(1 << n) {
                    for a in 0u64..(1 << n) {
                        if ids[(((b - 1) << n) | a) as usize]
                            != ids[(((b - 1) << n) | (a & b)) as usize]
                        {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Free-form construction from an entry function; explicit storage.
    pub fn from_fn<F>(space: &SpaceRef, mut f: F) -> Result<PLTable, PvError>
    where
        F: FnMut(u64, u64) -> Rat,
    {
        let n = space.len();
        if n > MAX_FULL_ATOMS {
            return Err(PvError::TooLarge {
                max: MAX_FULL_ATOMS,
                got: n,
            });
        }
        let mut pool: Vec<Rat> = Vec::new();
        let mut interned: HashMap<Rat, u32> = HashMap::new();
        let mut ids = vec![0u32; ((1usize << n) - 1) << n];
        for b in 1u64..(1 << n) {
            for a in 0u64..(1 << n) {
                let v = f(a, b);
                validate_entry(a, b, &v)?;
                let id = *interned.entry(v.clone()).or_insert_with(|| {
                    pool.push(v.clone());
                    (pool.len() - 1) as u32
                });
                ids[(((b - 1) << n) | a) as usize] = id;
            }
        }
        Ok(PLTable {
            space: space.clone(),
            values: pool,
            storage: Storage::Full { ids },
        })
    }

    /// Copy with one entry replaced (targeted perturbations in tests).
    ///
    /// On canonical storage the slot `(A & B, B)` is replaced, which also
    /// changes every pair sharing that slot; the table stays canonical.
    pub fn with_entry_replaced(
        &self,
        a_mask: u64,
        b_mask: u64,
        value: Rat,
    ) -> Result<PLTable, PvError> {
        if b_mask == 0 {
            return Err(PvError::ZeroCondition);
        }
        let mut out = self.clone();
        // keep interning exact: equal values must share one pool id
        let id = match out.values.iter().position(|v| *v == value) {
            Some(i) => i as u32,
            None => {
                out.values.push(value.clone());
                (out.values.len() - 1) as u32
            }
        };
        match &mut out.storage {
            Storage::Canonical { offsets, ids } => {
                let g = a_mask & b_mask;
                validate_entry(g, b_mask, &value)?;
                let idx = offsets[b_mask as usize] + pack_subset(g, b_mask);
                ids[idx as usize] = id;
            }
            Storage::Full { ids } => {
                validate_entry(a_mask, b_mask, &value)?;
                let n = out.space.len();
                ids[(((b_mask - 1) << n) | a_mask) as usize] = id;
            }
        }
        Ok(out)
    }
}

/// One serialized table entry: `value = PL(of | given)`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TableEntryJson {
    pub of: Vec<String>,
    pub given: Vec<String>,
    pub value: String,
}

impl PLTable {
    /// Explicit entry list over all of `E x E_0`; capped like full storage.
    pub fn to_entries(&self) -> Result<Vec<TableEntryJson>, PvError> {
        let n = self.space.len();
        if n > MAX_FULL_ATOMS {
            return Err(PvError::TooLarge {
                max: MAX_FULL_ATOMS,
                got: n,
            });
        }
        let mut out = Vec::with_capacity(((1usize << n) - 1) << n);
        for b in 1u64..(1 << n) {
            for a in 0u64..(1 << n) {
                out.push(TableEntryJson {
                    of: Proposition::from_mask(&self.space, a).sorted_labels(),
                    given: Proposition::from_mask(&self.space, b).sorted_labels(),
                    value: format_rat(self.value(self.entry_id(a, b)?)),
                });
            }
        }
        Ok(out)
    }

    pub fn from_entries(space: &SpaceRef, entries: &[TableEntryJson]) -> Result<PLTable, PvError> {
        let n = space.len();
        if n > MAX_FULL_ATOMS {
            return Err(PvError::TooLarge {
                max: MAX_FULL_ATOMS,
                got: n,
            });
        }
        let mut seen: Vec<Option<Rat>> = vec![None; (1usize << n) << n];
        for e in entries {
            let a = Proposition::from_labels(space, e.of.iter().map(String::as_str))
                .map_err(|err| PvError::InvalidEntry(err.to_string()))?;
            let b = Proposition::from_labels(space, e.given.iter().map(String::as_str))
                .map_err(|err| PvError::InvalidEntry(err.to_string()))?;
            if b.is_zero() {
                return Err(PvError::ZeroCondition);
            }
            let v = crate::rational::parse_rat(&e.value)
                .map_err(|err| PvError::InvalidEntry(err.to_string()))?;
            seen[((b.mask() as usize) << n) | a.mask() as usize] = Some(v);
        }
        for b in 1u64..(1 << n) {
            for a in 0u64..(1 << n) {
                if seen[((b as usize) << n) | a as usize].is_none() {
                    return Err(PvError::InvalidEntry(format!(
                        "missing entry for masks (of={a}, given={b})"
                    )));
                }
            }
        }
        PLTable::from_fn(space, |a, b| {
            seen[((b as usize) << n) | a as usize].clone().unwrap()
        })
    }
}

fn validate_entry(a_mask: u64, b_mask: u64, v: &Rat) -> Result<(), PvError> {
    if !is_unit_interval(v) {
        return Err(PvError::InvalidEntry(format!(
            "PL value {} outside [0, 1]",
            format_rat(v)
        )));
    }
    if a_mask == b_mask && !v.is_one() {
        return Err(PvError::InvalidEntry(format!(
            "normalization row PL(B|B) must be 1, got {}",
            format_rat(v)
        )));
    }
    if a_mask == 0 && !v.is_zero() {
        return Err(PvError::InvalidEntry(format!(
            "normalization row PL(0|B) must be 0, got {}",
            format_rat(v)
        )));
    }
    Ok(())
}

/// Builds a canonical table where the entry at `(G, D)` is
/// `sums[chooser(D)][G] / sums[chooser(D)][D]`.
///
/// `sums` are per-distribution subset-sum vectors over the same space; every
/// total sum entry must be strictly positive. Shared by `PVModel::pl_table`
/// and the two-distribution gluing construction.
pub(crate) fn build_canonical_table<F>(
    space: &SpaceRef,
    sums: &[Vec<Rat>],
    chooser: F,
) -> Result<PLTable, PvError>
where
    F: Fn(u64) -> usize,
{
    let n = space.len();
    let full = 1usize << n;

    // Dedup subset sums per distribution so ratio results can be memoized.
    let mut sum_ids: Vec<Vec<u32>> = Vec::with_capacity(sums.len());
    let mut distinct: Vec<Vec<Rat>> = Vec::with_capacity(sums.len());
    for s in sums {
        let mut interned: HashMap<Rat, u32> = HashMap::new();
        let mut d: Vec<Rat> = Vec::new();
        let ids = s
            .iter()
            .map(|v| {
                *interned.entry(v.clone()).or_insert_with(|| {
                    d.push(v.clone());
                    (d.len() - 1) as u32
                })
            })
            .collect();
        sum_ids.push(ids);
        distinct.push(d);
    }

    let mut pool: Vec<Rat> = Vec::new();
    let mut pool_ids: HashMap<Rat, u32> = HashMap::new();
    let mut ratio_memo: HashMap<(usize, u32, u32), u32> = HashMap::new();

    let mut offsets = vec![0u64; full + 1];
    let mut total = 0u64;
    for d in 0..full {
        offsets[d] = total;
        if d > 0 {
            total += 1u64 << d.count_ones();
        }
    }
    offsets[full] = total;

    let mut ids = vec![0u32; total as usize];
    for d in 1u64..(full as u64) {
        let mu = chooser(d);
        let den_id = sum_ids[mu][d as usize];
        if distinct[mu][den_id as usize] <= Rat::zero() {
            return Err(PvError::InvalidEntry(format!(
                "total weight of condition mask {d} is not strictly positive"
            )));
        }
        let base = offsets[d as usize];
        // ascending subset enumeration of d
        let mut g = 0u64;
        let mut rank = 0u64;
        loop {
            let num_id = sum_ids[mu][g as usize];
            let key = (mu, num_id, den_id);
            let id = match ratio_memo.get(&key) {
                Some(&id) => id,
                None => {
                    let v = &distinct[mu][num_id as usize] / &distinct[mu][den_id as usize];
                    validate_entry(g, d, &v)?;
                    let id = *pool_ids.entry(v.clone()).or_insert_with(|| {
                        pool.push(v.clone());
                        (pool.len() - 1) as u32
                    });
                    ratio_memo.insert(key, id);
                    id
                }
            };
            ids[(base + rank) as usize] = id;
            rank += 1;
            if g == d {
                break;
            }
            g = (g.wrapping_sub(d)) & d; // next subset of d
        }
    }

    Ok(PLTable {
        space: space.clone(),
        values: pool,
        storage: Storage::Canonical { offsets, ids },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean::{nonzero_propositions, AtomSpace, Proposition};
    use crate::rational::{rat, rat_int};

    fn model123() -> PVModel {
        let s = AtomSpace::with_count(3).unwrap();
        PVModel::from_weights(&s, vec![rat_int(1), rat_int(2), rat_int(3)]).unwrap()
    }

    #[test]
    fn weight_state_rejects_nonpositive() {
        let s = AtomSpace::with_count(2).unwrap();
        assert_eq!(
            WeightState::new(&s, vec![rat_int(1), rat_int(0)]).unwrap_err(),
            PvError::NonPositiveWeight("a2".into())
        );
        assert!(WeightState::new(&s, vec![rat(1, 3), rat_int(2)]).is_ok());
    }

    #[test]
    fn pv_formula_cases() {
        let m = model123();
        let s = m.space().clone();
        let one = Proposition::one(&s);
        assert_eq!(
            m.pv(&Unknown::constant(&s, rat_int(7)), &one).unwrap(),
            rat_int(7)
        );
        let a12 = Proposition::from_labels(&s, ["a1", "a2"]).unwrap();
        assert_eq!(m.pv(&Unknown::indicator(&a12), &one).unwrap(), rat(1, 2));
        let x = Unknown::new(&s, vec![rat_int(6), rat_int(0), rat_int(0)]).unwrap();
        let a13 = Proposition::from_labels(&s, ["a1", "a3"]).unwrap();
        assert_eq!(m.pv(&x, &a13).unwrap(), rat(3, 2));
    }

    #[test]
    fn pv_rejects_zero_condition() {
        let m = model123();
        let s = m.space().clone();
        assert_eq!(
            m.pv(&Unknown::constant(&s, rat_int(1)), &Proposition::zero(&s))
                .unwrap_err(),
            PvError::ZeroCondition
        );
    }

    #[test]
    fn pl_cases() {
        let m = model123();
        let s = m.space().clone();
        let b = Proposition::from_labels(&s, ["a1", "a2"]).unwrap();
        assert_eq!(m.pl(&Proposition::one(&s), &b).unwrap(), rat_int(1));
        assert_eq!(m.pl(&Proposition::zero(&s), &b).unwrap(), rat_int(0));
        let a = Proposition::from_labels(&s, ["a1"]).unwrap();
        assert_eq!(m.pl(&a, &b).unwrap(), rat(1, 3));
    }

    #[test]
    fn odds_cases() {
        let s = AtomSpace::with_count(2).unwrap();
        let m = PVModel::from_weights(&s, vec![rat_int(1), rat_int(1)]).unwrap();
        let one = Proposition::one(&s);
        let a = Proposition::from_labels(&s, ["a1"]).unwrap();
        assert_eq!(m.odds(&a, &one).unwrap(), rat_int(1));
        assert_eq!(m.odds(&Proposition::zero(&s), &one).unwrap(), rat_int(0));
        assert_eq!(m.odds(&one, &one).unwrap_err(), PvError::InfiniteOdds);
    }

    #[test]
    fn table_agrees_with_pl() {
        let m = model123();
        let s = m.space().clone();
        let t = m.pl_table().unwrap();
        assert!(t.is_canonical());
        for b in nonzero_propositions(&s).unwrap() {
            for a in crate::boolean::all_propositions(&s).unwrap() {
                assert_eq!(*t.entry(&a, &b).unwrap(), m.pl(&a, &b).unwrap());
            }
            assert!(t.entry(&b, &b).unwrap().is_one());
            assert!(t.entry(&Proposition::zero(&s), &b).unwrap().is_zero());
        }
    }

    #[test]
    fn single_atom_table() {
        let s = AtomSpace::with_count(1).unwrap();
        let m = PVModel::from_weights(&s, vec![rat_int(5)]).unwrap();
        let t = m.pl_table().unwrap();
        let one = Proposition::one(&s);
        assert!(t.entry(&Proposition::zero(&s), &one).unwrap().is_zero());
        assert!(t.entry(&one, &one).unwrap().is_one());
    }

    #[test]
    fn table_too_large() {
        let s = AtomSpace::with_count(13).unwrap();
        let m = PVModel::from_weights(&s, vec![rat_int(1); 13]).unwrap();
        assert!(matches!(
            m.pl_table().unwrap_err(),
            PvError::TooLarge { max: 12, got: 13 }
        ));
    }

    #[test]
    fn from_fn_validates_normalization() {
        let s = AtomSpace::with_count(2).unwrap();
        let bad = PLTable::from_fn(&s, |_a, _b| rat(1, 2));
        assert!(matches!(bad.unwrap_err(), PvError::InvalidEntry(_)));
    }

    #[test]
    fn entry_replacement_is_local() {
        let m = model123();
        let t = m.pl_table().unwrap();
        let t2 = t.with_entry_replaced(0b001, 0b011, rat(1, 4)).unwrap();
        assert_eq!(*t2.value(t2.entry_id(0b001, 0b011).unwrap()), rat(1, 4));
        assert_eq!(
            t2.value(t2.entry_id(0b001, 0b111).unwrap()),
            t.value(t.entry_id(0b001, 0b111).unwrap())
        );
        // replacing a normalization row is refused
        assert!(t.with_entry_replaced(0b011, 0b011, rat(1, 2)).is_err());
    }

    #[test]
    fn entry_list_round_trips() {
        let m = model123();
        let t = m.pl_table().unwrap();
        let entries = t.to_entries().unwrap();
        assert_eq!(entries.len(), 7 * 8);
        let back = PLTable::from_entries(m.space(), &entries).unwrap();
        for b in 1u64..8 {
            for a in 0u64..8 {
                assert_eq!(
                    back.value(back.entry_id(a, b).unwrap()),
                    t.value(t.entry_id(a, b).unwrap())
                );
            }
        }
        // a missing entry is rejected
        let partial = &entries[..entries.len() - 1];
        assert!(matches!(
            PLTable::from_entries(m.space(), partial).unwrap_err(),
            PvError::InvalidEntry(_)
        ));
    }

    #[test]
    fn pack_subset_ranks() {
        assert_eq!(pack_subset(0b0000, 0b1010), 0);
        assert_eq!(pack_subset(0b0010, 0b1010), 1);
        assert_eq!(pack_subset(0b1000, 0b1010), 2);
        assert_eq!(pack_subset(0b1010, 0b1010), 3);
    }
}
