//! Decision procedures for the plausible-value axioms and derived rules.
//!
//! Every check enumerates a finite generated suite of unknowns against all
//! propositions of the space, compares exact rationals with zero tolerance,
//! and returns pass or a re-evaluable witness. Dependence-form statements
//! ("PV(X+Y|A) depends only on PV(X|A)") are decided by grouping suite
//! members with equal conditioning value and comparing the derived values
//! inside each group. Side-conditions (memberships in `E_0`) produce skip
//! counts, never silent omission.

use std::collections::BTreeMap;
use std::collections::HashMap;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolean::{all_propositions, Proposition, SpaceError, SpaceRef};
use crate::pv::{PVModel, PlausibleValue, PvError};
use crate::rational::{format_rat, rat, rat_int, Rat};
use crate::report::{Report, Witness};
use crate::retraction::{BinaryMap, ElementSet, Retraction};
use crate::unknowns::Unknown;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxiomId {
    Value,
    Equality,
    Order,
    HomogeneityDep,
    CoxDep,
    SureThing,
    Rescale,
    AdditivityDep,
}

impl AxiomId {
    pub const ALL: [AxiomId; 8] = [
        AxiomId::Value,
        AxiomId::Equality,
        AxiomId::Order,
        AxiomId::HomogeneityDep,
        AxiomId::CoxDep,
        AxiomId::SureThing,
        AxiomId::Rescale,
        AxiomId::AdditivityDep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AxiomId::Value => "A1_value",
            AxiomId::Equality => "A2_equality",
            AxiomId::Order => "A4_order",
            AxiomId::HomogeneityDep => "A5_homogeneity_dep",
            AxiomId::CoxDep => "A6_cox_dep",
            AxiomId::SureThing => "A7_sure_thing",
            AxiomId::Rescale => "A8_rescale",
            AxiomId::AdditivityDep => "A9_additivity_dep",
        }
    }

    pub fn parse(s: &str) -> Option<AxiomId> {
        AxiomId::ALL.into_iter().find(|id| id.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleId {
    ProductRulePv,
    ProductRulePl,
    SumRule,
    ExclusiveAdditivity,
    GeneralSum,
    RealAdditivity,
    HomogeneityIdentity,
}

impl RuleId {
    pub const ALL: [RuleId; 7] = [
        RuleId::ProductRulePv,
        RuleId::ProductRulePl,
        RuleId::SumRule,
        RuleId::ExclusiveAdditivity,
        RuleId::GeneralSum,
        RuleId::RealAdditivity,
        RuleId::HomogeneityIdentity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RuleId::ProductRulePv => "product_rule_pv",
            RuleId::ProductRulePl => "product_rule_pl",
            RuleId::SumRule => "sum_rule",
            RuleId::ExclusiveAdditivity => "exclusive_additivity",
            RuleId::GeneralSum => "general_sum",
            RuleId::RealAdditivity => "real_additivity",
            RuleId::HomogeneityIdentity => "homogeneity_identity",
        }
    }

    pub fn parse(s: &str) -> Option<RuleId> {
        RuleId::ALL.into_iter().find(|id| id.as_str() == s)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Number of seeded random rational-valued unknowns in the base.
    pub random_count: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            random_count: 32,
            seed: 2024,
        }
    }
}

/// Generated test suite: all indicators, the fixed scalar constants, seeded
/// random unknowns, and all pairwise products of that base, deduplicated by
/// value vector with order preserved. Quadratic checks pair the full suite
/// against the base prefix (`partners`) to keep sweeps polynomial.
#[derive(Debug, Clone)]
pub struct TestSuite {
    space: SpaceRef,
    unknowns: Vec<Unknown>,
    base_len: usize,
    scalars: Vec<Rat>,
}

fn suite_scalars() -> Vec<Rat> {
    vec![
        rat_int(-2),
        rat_int(-1),
        rat_int(0),
        rat(1, 2),
        rat_int(1),
        rat_int(2),
    ]
}

impl TestSuite {
    pub fn generate(space: &SpaceRef, cfg: &SuiteConfig) -> Result<TestSuite, SpaceError> {
        let mut unknowns: Vec<Unknown> = Vec::new();
        let mut seen: HashMap<Vec<Rat>, ()> = HashMap::new();
        let mut push = |unknowns: &mut Vec<Unknown>, x: Unknown| {
            if seen.insert(x.values().to_vec(), ()).is_none() {
                unknowns.push(x);
            }
        };

        for a in all_propositions(space)? {
            push(&mut unknowns, Unknown::indicator(&a));
        }
        for s in suite_scalars() {
            push(&mut unknowns, Unknown::constant(space, s));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.random_count {
            let values = (0..space.len())
                .map(|_| rat(rng.gen_range(-8..=8), rng.gen_range(1..=4)))
                .collect();
            push(&mut unknowns, Unknown::new(space, values).expect("arity matches"));
        }
        let base_len = unknowns.len();
        for i in 0..base_len {
            for j in i..base_len {
                let p = unknowns[i].mul(&unknowns[j]).expect("same space");
                push(&mut unknowns, p);
            }
        }
        Ok(TestSuite {
            space: space.clone(),
            unknowns,
            base_len,
            scalars: suite_scalars(),
        })
    }

    pub fn space(&self) -> &SpaceRef {
        &self.space
    }

    pub fn unknowns(&self) -> &[Unknown] {
        &self.unknowns
    }

    /// Base prefix used as the second operand in quadratic checks.
    pub fn partners(&self) -> &[Unknown] {
        &self.unknowns[..self.base_len]
    }

    pub fn scalars(&self) -> &[Rat] {
        &self.scalars
    }
}

fn j_prop(p: &Proposition) -> serde_json::Value {
    serde_json::json!(p.sorted_labels())
}

fn j_unknown(x: &Unknown) -> serde_json::Value {
    serde_json::json!(x.to_label_map())
}

fn j_rat(r: &Rat) -> serde_json::Value {
    serde_json::json!(format_rat(r))
}

/// Precomputed `pv` of every suite unknown against every nonzero condition,
/// indexed by condition mask.
struct Ctx {
    all: Vec<Proposition>,
    pv: Vec<Vec<Rat>>,
}

impl Ctx {
    fn build<M: PlausibleValue + ?Sized>(m: &M, suite: &TestSuite) -> Ctx {
        let all = all_propositions(m.space()).expect("suite space is enumerable");
        let mut pv: Vec<Vec<Rat>> = Vec::with_capacity(all.len());
        pv.push(Vec::new());
        for a in &all[1..] {
            pv.push(
                suite
                    .unknowns
                    .iter()
                    .map(|x| m.pv(x, a).expect("nonzero condition"))
                    .collect(),
            );
        }
        Ctx { all, pv }
    }

    fn conds(&self) -> &[Proposition] {
        &self.all[1..]
    }

    fn pv_at(&self, mask: u64, i: usize) -> &Rat {
        &self.pv[mask as usize][i]
    }
}

pub fn check_axiom<M: PlausibleValue + ?Sized>(m: &M, id: AxiomId, suite: &TestSuite) -> Report {
    let ctx = Ctx::build(m, suite);
    match id {
        AxiomId::Value => axiom_value(suite, &ctx),
        AxiomId::Equality => axiom_equality(suite, &ctx),
        AxiomId::Order => axiom_order(suite, &ctx),
        AxiomId::HomogeneityDep => axiom_homogeneity_dep(m, suite, &ctx),
        AxiomId::CoxDep => axiom_cox_dep(m, suite, &ctx),
        AxiomId::SureThing => axiom_sure_thing(suite, &ctx),
        AxiomId::Rescale => axiom_rescale(m, suite, &ctx),
        AxiomId::AdditivityDep => axiom_additivity_dep(m, suite, &ctx),
    }
}

/// If the condition implies AV(X) = s then PV(X|A) = s.
fn axiom_value(suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = AxiomId::Value.as_str();
    let mut cases = 0u64;
    for a in ctx.conds() {
        for (i, x) in suite.unknowns.iter().enumerate() {
            if let Some(s) = x.implied_value(a).expect("nonzero condition") {
                cases += 1;
                let got = ctx.pv_at(a.mask(), i);
                if *got != s {
                    let w = Witness::new("=", format_rat(got), format_rat(&s))
                        .with_input("x", j_unknown(x))
                        .with_input("a", j_prop(a));
                    return Report::fail(subject, cases, 0, w);
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// If the condition implies AV(X) = AV(Y) then PV(X|A) = PV(Y|A).
fn axiom_equality(suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = AxiomId::Equality.as_str();
    let mut cases = 0u64;
    for a in ctx.conds() {
        let mut groups: BTreeMap<Vec<Rat>, usize> = BTreeMap::new();
        for (i, x) in suite.unknowns.iter().enumerate() {
            let key: Vec<Rat> = a.atoms().map(|k| x.value_at(k).clone()).collect();
            match groups.get(&key) {
                None => {
                    groups.insert(key, i);
                }
                Some(&rep) => {
                    cases += 1;
                    let (lhs, rhs) = (ctx.pv_at(a.mask(), rep), ctx.pv_at(a.mask(), i));
                    if lhs != rhs {
                        let w = Witness::new("=", format_rat(lhs), format_rat(rhs))
                            .with_input("x", j_unknown(&suite.unknowns[rep]))
                            .with_input("y", j_unknown(x))
                            .with_input("a", j_prop(a));
                        return Report::fail(subject, cases, 0, w);
                    }
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// If the condition implies AV(X) <= AV(Y) then PV(X|C) <= PV(Y|C).
fn axiom_order(suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = AxiomId::Order.as_str();
    let mut cases = 0u64;
    for a in ctx.conds() {
        for (i, x) in suite.unknowns.iter().enumerate() {
            for (j, y) in suite.partners().iter().enumerate() {
                if x.implied_leq(y, a).expect("nonzero condition") {
                    cases += 1;
                    let (lhs, rhs) = (ctx.pv_at(a.mask(), i), ctx.pv_at(a.mask(), j));
                    if lhs > rhs {
                        let w = Witness::new("<=", format_rat(lhs), format_rat(rhs))
                            .with_input("x", j_unknown(x))
                            .with_input("y", j_unknown(y))
                            .with_input("a", j_prop(a));
                        return Report::fail(subject, cases, 0, w);
                    }
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// PV(rX|C) depends only on PV(X|C).
fn axiom_homogeneity_dep<M: PlausibleValue + ?Sized>(
    m: &M,
    suite: &TestSuite,
    ctx: &Ctx,
) -> Report {
    let subject = AxiomId::HomogeneityDep.as_str();
    let mut cases = 0u64;
    for c in ctx.conds() {
        let mut groups: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
        for i in 0..suite.unknowns.len() {
            groups
                .entry(ctx.pv_at(c.mask(), i).clone())
                .or_default()
                .push(i);
        }
        for members in groups.values().filter(|g| g.len() >= 2) {
            let rep = members[0];
            for r in &suite.scalars {
                let rep_val = m
                    .pv(&suite.unknowns[rep].scale(r), c)
                    .expect("nonzero condition");
                for &i in &members[1..] {
                    cases += 1;
                    let got = m.pv(&suite.unknowns[i].scale(r), c).expect("nonzero condition");
                    if got != rep_val {
                        let w = Witness::new("=", format_rat(&rep_val), format_rat(&got))
                            .with_input("x1", j_unknown(&suite.unknowns[rep]))
                            .with_input("x2", j_unknown(&suite.unknowns[i]))
                            .with_input("r", j_rat(r))
                            .with_input("c", j_prop(c));
                        return Report::fail(subject, cases, 0, w);
                    }
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// PV(X I_A|C) depends only on PV(X|A&C), for each fixed (A, C).
fn axiom_cox_dep<M: PlausibleValue + ?Sized>(m: &M, suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = AxiomId::CoxDep.as_str();
    let mut cases = 0u64;
    let mut skipped = 0u64;
    for a in &ctx.all {
        let ia = Unknown::indicator(a);
        for c in ctx.conds() {
            let ac_mask = a.mask() & c.mask();
            if ac_mask == 0 {
                skipped += 1;
                continue;
            }
            let mut groups: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
            for i in 0..suite.unknowns.len() {
                groups
                    .entry(ctx.pv_at(ac_mask, i).clone())
                    .or_default()
                    .push(i);
            }
            for members in groups.values().filter(|g| g.len() >= 2) {
                let rep = members[0];
                let rep_val = m
                    .pv(&suite.unknowns[rep].mul(&ia).expect("same space"), c)
                    .expect("nonzero condition");
                for &i in &members[1..] {
                    cases += 1;
                    let got = m
                        .pv(&suite.unknowns[i].mul(&ia).expect("same space"), c)
                        .expect("nonzero condition");
                    if got != rep_val {
                        let w = Witness::new("=", format_rat(&rep_val), format_rat(&got))
                            .with_input("x1", j_unknown(&suite.unknowns[rep]))
                            .with_input("x2", j_unknown(&suite.unknowns[i]))
                            .with_input("a", j_prop(a))
                            .with_input("c", j_prop(c));
                        return Report::fail(subject, cases, skipped, w);
                    }
                }
            }
        }
    }
    Report::pass(subject, cases, skipped)
}

/// If PV(X|A&B) = PV(Y|A&B) and PV(X|B\A) = PV(Y|B\A) then PV(X|B) = PV(Y|B).
fn axiom_sure_thing(suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = AxiomId::SureThing.as_str();
    let mut cases = 0u64;
    let mut skipped = 0u64;
    for a in &ctx.all {
        for b in ctx.conds() {
            let ab = a.mask() & b.mask();
            let bma = b.mask() & !a.mask();
            if ab == 0 || bma == 0 {
                skipped += 1;
                continue;
            }
            let mut groups: BTreeMap<(Rat, Rat), usize> = BTreeMap::new();
            for i in 0..suite.unknowns.len() {
                let key = (ctx.pv_at(ab, i).clone(), ctx.pv_at(bma, i).clone());
                match groups.get(&key) {
                    None => {
                        groups.insert(key, i);
                    }
                    Some(&rep) => {
                        cases += 1;
                        let (lhs, rhs) = (ctx.pv_at(b.mask(), rep), ctx.pv_at(b.mask(), i));
                        if lhs != rhs {
                            let w = Witness::new("=", format_rat(lhs), format_rat(rhs))
                                .with_input("x", j_unknown(&suite.unknowns[rep]))
                                .with_input("y", j_unknown(&suite.unknowns[i]))
                                .with_input("a", j_prop(a))
                                .with_input("b", j_prop(b));
                            return Report::fail(subject, cases, skipped, w);
                        }
                    }
                }
            }
        }
    }
    Report::pass(subject, cases, skipped)
}

/// PV(aX + b|C) = a PV(X|C) + b.
fn axiom_rescale<M: PlausibleValue + ?Sized>(m: &M, suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = AxiomId::Rescale.as_str();
    let mut cases = 0u64;
    for c in ctx.conds() {
        for (i, x) in suite.unknowns.iter().enumerate() {
            for a in &suite.scalars {
                for b in &suite.scalars {
                    cases += 1;
                    let lhs = m
                        .pv(&Unknown::affine(a, x, b), c)
                        .expect("nonzero condition");
                    let rhs = a * ctx.pv_at(c.mask(), i) + b;
                    if lhs != rhs {
                        let w = Witness::new("=", format_rat(&lhs), format_rat(&rhs))
                            .with_input("x", j_unknown(x))
                            .with_input("a", j_rat(a))
                            .with_input("b", j_rat(b))
                            .with_input("c", j_prop(c));
                        return Report::fail(subject, cases, 0, w);
                    }
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// PV(X+Y|A) depends only on PV(X|A), for each fixed (Y, A).
fn axiom_additivity_dep<M: PlausibleValue + ?Sized>(
    m: &M,
    suite: &TestSuite,
    ctx: &Ctx,
) -> Report {
    let subject = AxiomId::AdditivityDep.as_str();
    let mut cases = 0u64;
    for a in ctx.conds() {
        let mut groups: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
        for i in 0..suite.unknowns.len() {
            groups
                .entry(ctx.pv_at(a.mask(), i).clone())
                .or_default()
                .push(i);
        }
        for y in suite.partners() {
            for members in groups.values().filter(|g| g.len() >= 2) {
                let rep = members[0];
                let rep_val = m
                    .pv(&suite.unknowns[rep].add(y).expect("same space"), a)
                    .expect("nonzero condition");
                for &i in &members[1..] {
                    cases += 1;
                    let got = m
                        .pv(&suite.unknowns[i].add(y).expect("same space"), a)
                        .expect("nonzero condition");
                    if got != rep_val {
                        let w = Witness::new("=", format_rat(&rep_val), format_rat(&got))
                            .with_input("x1", j_unknown(&suite.unknowns[rep]))
                            .with_input("x2", j_unknown(&suite.unknowns[i]))
                            .with_input("y", j_unknown(y))
                            .with_input("a", j_prop(a));
                        return Report::fail(subject, cases, 0, w);
                    }
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

pub fn verify_rule<M: PlausibleValue + ?Sized>(m: &M, id: RuleId, suite: &TestSuite) -> Report {
    let ctx = Ctx::build(m, suite);
    match id {
        RuleId::ProductRulePv => rule_product_pv(m, suite, &ctx),
        RuleId::ProductRulePl => rule_product_pl(m, &ctx),
        RuleId::SumRule => rule_sum(m, &ctx),
        RuleId::ExclusiveAdditivity => rule_exclusive_additivity(m, &ctx),
        RuleId::GeneralSum => rule_general_sum(m, suite, &ctx),
        RuleId::RealAdditivity => rule_real_additivity(m, suite, &ctx),
        RuleId::HomogeneityIdentity => rule_homogeneity_identity(m, suite, &ctx),
    }
}

/// PV(X I_A|C) = PV(X|A&C) PV(I_A|C).
fn rule_product_pv<M: PlausibleValue + ?Sized>(m: &M, suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = RuleId::ProductRulePv.as_str();
    let mut cases = 0u64;
    let mut skipped = 0u64;
    for a in &ctx.all {
        let ia = Unknown::indicator(a);
        for c in ctx.conds() {
            let ac_mask = a.mask() & c.mask();
            if ac_mask == 0 {
                skipped += suite.unknowns.len() as u64;
                continue;
            }
            let pl_ac = m.pl(a, c).expect("nonzero condition");
            for (i, x) in suite.unknowns.iter().enumerate() {
                cases += 1;
                let lhs = m
                    .pv(&x.mul(&ia).expect("same space"), c)
                    .expect("nonzero condition");
                let rhs = ctx.pv_at(ac_mask, i) * &pl_ac;
                if lhs != rhs {
                    let w = Witness::new("=", format_rat(&lhs), format_rat(&rhs))
                        .with_input("x", j_unknown(x))
                        .with_input("a", j_prop(a))
                        .with_input("c", j_prop(c));
                    return Report::fail(subject, cases, skipped, w);
                }
            }
        }
    }
    Report::pass(subject, cases, skipped)
}

/// PL(A&B|C) = PL(A|B&C) PL(B|C).
fn rule_product_pl<M: PlausibleValue + ?Sized>(m: &M, ctx: &Ctx) -> Report {
    let subject = RuleId::ProductRulePl.as_str();
    let mut cases = 0u64;
    let mut skipped = 0u64;
    for a in &ctx.all {
        for b in &ctx.all {
            for c in ctx.conds() {
                let bc_mask = b.mask() & c.mask();
                if bc_mask == 0 {
                    skipped += 1;
                    continue;
                }
                cases += 1;
                let bc = Proposition::from_mask(c.space(), bc_mask);
                let ab = a.and(b).expect("same space");
                let lhs = m.pl(&ab, c).expect("nonzero condition");
                let rhs =
                    m.pl(a, &bc).expect("nonzero condition") * m.pl(b, c).expect("nonzero condition");
                if lhs != rhs {
                    let w = Witness::new("=", format_rat(&lhs), format_rat(&rhs))
                        .with_input("a", j_prop(a))
                        .with_input("b", j_prop(b))
                        .with_input("c", j_prop(c));
                    return Report::fail(subject, cases, skipped, w);
                }
            }
        }
    }
    Report::pass(subject, cases, skipped)
}

/// PL(A|B) + PL(notA|B) = 1.
fn rule_sum<M: PlausibleValue + ?Sized>(m: &M, ctx: &Ctx) -> Report {
    let subject = RuleId::SumRule.as_str();
    let mut cases = 0u64;
    for a in &ctx.all {
        for b in ctx.conds() {
            cases += 1;
            let lhs = m.pl(a, b).expect("nonzero condition")
                + m.pl(&a.complement(), b).expect("nonzero condition");
            if !lhs.is_one() {
                let w = Witness::new("=", format_rat(&lhs), "1".to_string())
                    .with_input("a", j_prop(a))
                    .with_input("b", j_prop(b));
                return Report::fail(subject, cases, 0, w);
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// PL(A or B|C) = PL(A|C) + PL(B|C) for disjoint A, B.
fn rule_exclusive_additivity<M: PlausibleValue + ?Sized>(m: &M, ctx: &Ctx) -> Report {
    let subject = RuleId::ExclusiveAdditivity.as_str();
    let mut cases = 0u64;
    for a in &ctx.all {
        for b in &ctx.all {
            if a.mask() & b.mask() != 0 {
                continue;
            }
            for c in ctx.conds() {
                cases += 1;
                let lhs = m
                    .pl(&a.or(b).expect("same space"), c)
                    .expect("nonzero condition");
                let rhs = m.pl(a, c).expect("nonzero condition")
                    + m.pl(b, c).expect("nonzero condition");
                if lhs != rhs {
                    let w = Witness::new("=", format_rat(&lhs), format_rat(&rhs))
                        .with_input("a", j_prop(a))
                        .with_input("b", j_prop(b))
                        .with_input("c", j_prop(c));
                    return Report::fail(subject, cases, 0, w);
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// PV(X+Y|A) = PV(X|A) + PV(Y|A).
fn rule_general_sum<M: PlausibleValue + ?Sized>(m: &M, suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = RuleId::GeneralSum.as_str();
    let mut cases = 0u64;
    for a in ctx.conds() {
        for (i, x) in suite.unknowns.iter().enumerate() {
            for (j, y) in suite.partners().iter().enumerate() {
                cases += 1;
                let lhs = m
                    .pv(&x.add(y).expect("same space"), a)
                    .expect("nonzero condition");
                let rhs = ctx.pv_at(a.mask(), i) + ctx.pv_at(a.mask(), j);
                if lhs != rhs {
                    let w = Witness::new("=", format_rat(&lhs), format_rat(&rhs))
                        .with_input("x", j_unknown(x))
                        .with_input("y", j_unknown(y))
                        .with_input("a", j_prop(a));
                    return Report::fail(subject, cases, 0, w);
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// Additivity derived via two independent legs: with r = PV(X|A),
/// PV(X+Y|A) = PV(r+Y|A) (a dependence instance) and
/// PV(r+Y|A) = r + PV(Y|A) (a rescale instance); the conclusion
/// PV(X+Y|A) = PV(X|A) + PV(Y|A) is then checked directly.
fn rule_real_additivity<M: PlausibleValue + ?Sized>(m: &M, suite: &TestSuite, ctx: &Ctx) -> Report {
    let subject = RuleId::RealAdditivity.as_str();
    let mut cases = 0u64;
    for a in ctx.conds() {
        for (i, x) in suite.unknowns.iter().enumerate() {
            let r = ctx.pv_at(a.mask(), i);
            let cr = Unknown::constant(&suite.space, r.clone());
            for (j, y) in suite.partners().iter().enumerate() {
                cases += 1;
                let sum = m
                    .pv(&x.add(y).expect("same space"), a)
                    .expect("nonzero condition");
                let via_const = m
                    .pv(&cr.add(y).expect("same space"), a)
                    .expect("nonzero condition");
                let fail = |leg: &str, lhs: &Rat, rhs: &Rat| {
                    let w = Witness::new("=", format_rat(lhs), format_rat(rhs))
                        .with_input("x", j_unknown(x))
                        .with_input("y", j_unknown(y))
                        .with_input("a", j_prop(a));
                    Report::fail(subject, cases, 0, w).with_note(leg)
                };
                if sum != via_const {
                    return fail("dependence leg: PV(X+Y|A) vs PV(r+Y|A)", &sum, &via_const);
                }
                let rescaled = r + ctx.pv_at(a.mask(), j);
                if via_const != rescaled {
                    return fail("rescale leg: PV(r+Y|A) vs r + PV(Y|A)", &via_const, &rescaled);
                }
                if sum != rescaled {
                    return fail("conclusion: PV(X+Y|A) vs PV(X|A) + PV(Y|A)", &sum, &rescaled);
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// PV(rX|C) = r PV(X|C).
fn rule_homogeneity_identity<M: PlausibleValue + ?Sized>(
    m: &M,
    suite: &TestSuite,
    ctx: &Ctx,
) -> Report {
    let subject = RuleId::HomogeneityIdentity.as_str();
    let mut cases = 0u64;
    for c in ctx.conds() {
        for (i, x) in suite.unknowns.iter().enumerate() {
            for r in &suite.scalars {
                cases += 1;
                let lhs = m.pv(&x.scale(r), c).expect("nonzero condition");
                let rhs = r * ctx.pv_at(c.mask(), i);
                if lhs != rhs {
                    let w = Witness::new("=", format_rat(&lhs), format_rat(&rhs))
                        .with_input("x", j_unknown(x))
                        .with_input("r", j_rat(r))
                        .with_input("c", j_prop(c));
                    return Report::fail(subject, cases, 0, w);
                }
            }
        }
    }
    Report::pass(subject, cases, 0)
}

/// Derives the product rule from the sure-thing axiom on one triple:
/// with Y = PV(X|A&B) I_A, both sure-thing premises are verified, then the
/// conclusion PV(X I_A|B) = PV(X|A&B) PL(A|B).
pub fn derive_product_from_sure_thing<M: PlausibleValue + ?Sized>(
    m: &M,
    x: &Unknown,
    a: &Proposition,
    b: &Proposition,
) -> Report {
    let subject = "sure_thing_product";
    let ab = a.and(b).expect("same space");
    let bma = b.minus(a).expect("same space");
    if ab.is_zero() || bma.is_zero() {
        return Report::unmet(
            subject,
            format!(
                "hypothesis side-condition unmet: A&B {} E_0, B\\A {} E_0",
                if ab.is_zero() { "outside" } else { "in" },
                if bma.is_zero() { "outside" } else { "in" },
            ),
        );
    }
    let pv_ab = m.pv(x, &ab).expect("nonzero condition");
    let ia = Unknown::indicator(a);
    let xa = x.mul(&ia).expect("same space");
    let y = Unknown::constant(x.space(), pv_ab.clone())
        .mul(&ia)
        .expect("same space");
    let mut cases = 0u64;
    let mut check = |name: &str, lhs: Rat, rhs: Rat| -> Option<Report> {
        cases += 1;
        if lhs != rhs {
            let w = Witness::new("=", format_rat(&lhs), format_rat(&rhs))
                .with_input("x", j_unknown(x))
                .with_input("a", j_prop(a))
                .with_input("b", j_prop(b));
            Some(Report::fail(subject, cases, 0, w).with_note(name))
        } else {
            None
        }
    };
    if let Some(rep) = check(
        "premise: PV(X I_A|A&B) = PV(Y|A&B)",
        m.pv(&xa, &ab).expect("nonzero condition"),
        m.pv(&y, &ab).expect("nonzero condition"),
    ) {
        return rep;
    }
    if let Some(rep) = check(
        "premise: PV(X I_A|B\\A) = PV(Y|B\\A)",
        m.pv(&xa, &bma).expect("nonzero condition"),
        m.pv(&y, &bma).expect("nonzero condition"),
    ) {
        return rep;
    }
    if let Some(rep) = check(
        "conclusion: PV(X I_A|B) = PV(X|A&B) PL(A|B)",
        m.pv(&xa, b).expect("nonzero condition"),
        pv_ab * m.pl(a, b).expect("nonzero condition"),
    ) {
        return rep;
    }
    Report::pass(subject, cases, 0)
}

/// Plumbing hooks for testing the checkers: controlled breakages of the
/// canonical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// pv(x|a) replaced by its square.
    SquarePv,
    /// the first atom's weight is dropped from the numerator only.
    DropWeight,
    /// pv of 0/1-valued unknowns clamped to at most 9/10.
    ClampPl,
}

impl Mutation {
    pub const ALL: [Mutation; 3] = [Mutation::SquarePv, Mutation::DropWeight, Mutation::ClampPl];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mutation::SquarePv => "square-pv",
            Mutation::DropWeight => "drop-weight",
            Mutation::ClampPl => "clamp-pl",
        }
    }

    pub fn parse(s: &str) -> Option<Mutation> {
        Mutation::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone)]
pub struct MutatedModel {
    inner: PVModel,
    mutation: Mutation,
}

impl MutatedModel {
    pub fn new(inner: PVModel, mutation: Mutation) -> Self {
        MutatedModel { inner, mutation }
    }

    pub fn inner(&self) -> &PVModel {
        &self.inner
    }

    pub fn mutation(&self) -> Mutation {
        self.mutation
    }
}

impl PlausibleValue for MutatedModel {
    fn space(&self) -> &SpaceRef {
        self.inner.space()
    }

    fn pv(&self, x: &Unknown, a: &Proposition) -> Result<Rat, PvError> {
        match self.mutation {
            Mutation::SquarePv => {
                let v = self.inner.pv(x, a)?;
                Ok(&v * &v)
            }
            Mutation::DropWeight => {
                if a.is_zero() {
                    return Err(PvError::ZeroCondition);
                }
                let mut num = Rat::zero();
                let mut den = Rat::zero();
                for i in a.atoms() {
                    let w = &self.inner.state().weights()[i];
                    if i != 0 {
                        num += w * x.value_at(i);
                    }
                    den += w;
                }
                Ok(num / den)
            }
            Mutation::ClampPl => {
                let v = self.inner.pv(x, a)?;
                let zero_one = x.values().iter().all(|v| v.is_zero() || v.is_one());
                let cap = rat(9, 10);
                if zero_one && v > cap {
                    Ok(cap)
                } else {
                    Ok(v)
                }
            }
        }
    }
}

/// All canonical models with n atoms and integer weights in `1..=max_weight`,
/// n over `1..=3`, in deterministic order.
pub fn grid_models(max_weight: i64) -> Vec<PVModel> {
    let mut out = Vec::new();
    for n in 1..=3usize {
        let space = crate::boolean::AtomSpace::with_count(n).unwrap();
        let count = (max_weight as usize).pow(n as u32);
        for idx in 0..count {
            let mut rest = idx;
            let weights: Vec<Rat> = (0..n)
                .map(|_| {
                    let w = (rest % max_weight as usize) as i64 + 1;
                    rest /= max_weight as usize;
                    rat_int(w)
                })
                .collect();
            out.push(PVModel::from_weights(&space, weights).unwrap());
        }
    }
    out
}

/// A product-rule instance packaged as finite-set retraction structures:
/// carriers are finite sets of unknowns (labelled by value vector), the
/// retractions send X to the constant PV(X|A&C) / PV(X|C), the binary map is
/// multiplication, the fixed element is I_A.
#[derive(Debug, Clone)]
pub struct ProductRuleInstance {
    pub p1: Retraction,
    pub p2: Retraction,
    pub p3: Retraction,
    pub m: BinaryMap,
    /// Label of the fixed element I_A in T2.
    pub e: String,
}

fn unknown_label(x: &Unknown) -> String {
    let parts: Vec<String> = x.values().iter().map(format_rat).collect();
    format!("({})", parts.join(","))
}

struct Carrier {
    elems: Vec<Unknown>,
    index: HashMap<String, usize>,
}

impl Carrier {
    fn new() -> Self {
        Carrier {
            elems: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn insert(&mut self, x: Unknown) -> usize {
        let label = unknown_label(&x);
        if let Some(&i) = self.index.get(&label) {
            return i;
        }
        self.elems.push(x);
        self.index.insert(label, self.elems.len() - 1);
        self.elems.len() - 1
    }

    fn to_retraction(&self, target: impl Fn(&Unknown) -> Unknown) -> Retraction {
        let labels: Vec<String> = self.elems.iter().map(unknown_label).collect();
        let set = ElementSet::new(labels).expect("labels are distinct by construction");
        let table = self
            .elems
            .iter()
            .map(|x| {
                let t = unknown_label(&target(x));
                *self
                    .index
                    .get(&t)
                    .expect("carrier closed under its retraction")
            })
            .collect();
        Retraction::new(set, table).expect("constants are fixed points")
    }
}

pub fn product_rule_retraction_instance(
    model: &PVModel,
    base: &[Unknown],
    a: &Proposition,
    c: &Proposition,
) -> Result<ProductRuleInstance, PvError> {
    let ac = a.and(c).expect("same space");
    if ac.is_zero() || c.is_zero() {
        return Err(PvError::ZeroCondition);
    }
    let space = model.space();
    let cst = |r: Rat| Unknown::constant(space, r);

    let mut t1 = Carrier::new();
    for x in base {
        t1.insert(x.clone());
    }
    for x in base {
        t1.insert(cst(model.pv(x, &ac)?));
    }

    let mut t2 = Carrier::new();
    for x in base {
        t2.insert(x.clone());
    }
    let ia = Unknown::indicator(a);
    t2.insert(ia.clone());
    for x in t2.elems.clone() {
        t2.insert(cst(model.pv(&x, c)?));
    }

    let mut t3 = Carrier::new();
    let mut m_table: Vec<usize> = Vec::with_capacity(t1.elems.len() * t2.elems.len());
    for x1 in &t1.elems {
        for x2 in &t2.elems {
            m_table.push(t3.insert(x1.mul(x2).expect("same space")));
        }
    }
    for x in t3.elems.clone() {
        t3.insert(cst(model.pv(&x, c)?));
    }

    let p1 = t1.to_retraction(|x| cst(model.pv(x, &ac).expect("nonzero condition")));
    let p2 = t2.to_retraction(|x| cst(model.pv(x, c).expect("nonzero condition")));
    let p3 = t3.to_retraction(|x| cst(model.pv(x, c).expect("nonzero condition")));
    let m = BinaryMap::new(
        p1.carrier().clone(),
        p2.carrier().clone(),
        p3.carrier().clone(),
        m_table,
    )
    .expect("table is total by construction");
    Ok(ProductRuleInstance {
        p1,
        p2,
        p3,
        m,
        e: unknown_label(&ia),
    })
}
