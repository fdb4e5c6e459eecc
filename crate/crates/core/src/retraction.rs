//! Generic finite-set retraction machinery.
//!
//! Elements are opaque string ids and every map is an explicit total table,
//! so "depends only on" is decidable and every check is exhaustive and exact.
//! Dependence hypotheses are always checked, never assumed; each checker
//! returns pass or fail-with-witness, with the lexicographically first
//! violation (by element order) selected deterministically.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{Report, Verdict, Witness};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RetractionError {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("fiber dependence violated: elements `{t1}` and `{t2}` share a retraction value but map differently")]
    DependenceViolation { t1: String, t2: String },
    #[error("invalid table: {0}")]
    InvalidTable(String),
}

/// Ordered finite set of distinct opaque element ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSet {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

pub type ElemsRef = Arc<ElementSet>;

impl ElementSet {
    pub fn new<I, S>(ids: I) -> Result<ElemsRef, RetractionError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(RetractionError::InvalidTable(format!(
                    "duplicate element id `{id}`"
                )));
            }
        }
        Ok(Arc::new(ElementSet { ids, index }))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize, RetractionError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| RetractionError::InvalidTable(format!("unknown element id `{id}`")))
    }
}

fn same_elements(a: &ElemsRef, b: &ElemsRef) -> bool {
    Arc::ptr_eq(a, b) || a.ids == b.ids
}

/// Total mapping between two ordered finite sets, as an explicit table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMap {
    domain: ElemsRef,
    codomain: ElemsRef,
    table: Vec<usize>,
}

impl FiniteMap {
    pub fn new(
        domain: ElemsRef,
        codomain: ElemsRef,
        table: Vec<usize>,
    ) -> Result<Self, RetractionError> {
        if table.len() != domain.len() {
            return Err(RetractionError::InvalidTable(format!(
                "table has {} entries for a domain of {}",
                table.len(),
                domain.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&i| i >= codomain.len()) {
            return Err(RetractionError::InvalidTable(format!(
                "image index {bad} outside codomain"
            )));
        }
        Ok(FiniteMap {
            domain,
            codomain,
            table,
        })
    }

    pub fn from_pairs(
        domain: ElemsRef,
        codomain: ElemsRef,
        pairs: &BTreeMap<String, String>,
    ) -> Result<Self, RetractionError> {
        let mut table = vec![usize::MAX; domain.len()];
        for (from, to) in pairs {
            table[domain.index_of(from)?] = codomain.index_of(to)?;
        }
        if let Some(i) = table.iter().position(|&v| v == usize::MAX) {
            return Err(RetractionError::InvalidTable(format!(
                "no image for element `{}`",
                domain.id(i)
            )));
        }
        Ok(FiniteMap {
            domain,
            codomain,
            table,
        })
    }

    pub fn domain(&self) -> &ElemsRef {
        &self.domain
    }

    pub fn codomain(&self) -> &ElemsRef {
        &self.codomain
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        self.domain
            .ids()
            .iter()
            .zip(&self.table)
            .map(|(d, &c)| (d.clone(), self.codomain.id(c).to_string()))
            .collect()
    }
}

/// A self-map of a carrier whose image it fixes pointwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retraction {
    carrier: ElemsRef,
    image: Vec<usize>,
    in_image: Vec<bool>,
    table: Vec<usize>,
}

impl Retraction {
    pub fn new(carrier: ElemsRef, table: Vec<usize>) -> Result<Self, RetractionError> {
        if table.len() != carrier.len() {
            return Err(RetractionError::InvalidTable(format!(
                "table has {} entries for a carrier of {}",
                table.len(),
                carrier.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&i| i >= carrier.len()) {
            return Err(RetractionError::InvalidTable(format!(
                "image index {bad} outside carrier"
            )));
        }
        let mut in_image = vec![false; carrier.len()];
        for &i in &table {
            in_image[i] = true;
        }
        // fixed-point property: P(r) = r for every r in the range
        for (i, hit) in in_image.iter().enumerate() {
            if *hit && table[i] != i {
                return Err(RetractionError::InvalidTable(format!(
                    "image element `{}` is not fixed",
                    carrier.id(i)
                )));
            }
        }
        let image = (0..carrier.len()).filter(|&i| in_image[i]).collect();
        Ok(Retraction {
            carrier,
            image,
            in_image,
            table,
        })
    }

    /// Builds from an explicit image list; the range must equal it exactly.
    pub fn with_image(
        carrier: ElemsRef,
        image_ids: &[String],
        table: Vec<usize>,
    ) -> Result<Self, RetractionError> {
        let r = Retraction::new(carrier, table)?;
        let declared: Result<Vec<usize>, _> = image_ids
            .iter()
            .map(|id| r.carrier.index_of(id))
            .collect();
        let mut declared = declared?;
        declared.sort_unstable();
        if declared != r.image {
            return Err(RetractionError::InvalidTable(
                "declared image differs from the range of the table".to_string(),
            ));
        }
        Ok(r)
    }

    pub fn identity(carrier: ElemsRef) -> Self {
        let table: Vec<usize> = (0..carrier.len()).collect();
        Retraction::new(carrier, table).expect("identity is a retraction")
    }

    pub fn carrier(&self) -> &ElemsRef {
        &self.carrier
    }

    /// Image indices in carrier order.
    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn contains_in_image(&self, i: usize) -> bool {
        self.in_image[i]
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    /// The image as an element set (carrier order preserved).
    pub fn image_set(&self) -> ElemsRef {
        ElementSet::new(self.image.iter().map(|&i| self.carrier.id(i).to_string()))
            .expect("image ids are distinct")
    }
}

/// Total binary mapping `T1 x T2 -> T3`, row-major table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMap {
    left: ElemsRef,
    right: ElemsRef,
    codomain: ElemsRef,
    table: Vec<usize>,
}

impl BinaryMap {
    pub fn new(
        left: ElemsRef,
        right: ElemsRef,
        codomain: ElemsRef,
        table: Vec<usize>,
    ) -> Result<Self, RetractionError> {
        if table.len() != left.len() * right.len() {
            return Err(RetractionError::InvalidTable(format!(
                "table has {} entries for a {}x{} product",
                table.len(),
                left.len(),
                right.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&i| i >= codomain.len()) {
            return Err(RetractionError::InvalidTable(format!(
                "image index {bad} outside codomain"
            )));
        }
        Ok(BinaryMap {
            left,
            right,
            codomain,
            table,
        })
    }

    pub fn left(&self) -> &ElemsRef {
        &self.left
    }

    pub fn right(&self) -> &ElemsRef {
        &self.right
    }

    pub fn codomain(&self) -> &ElemsRef {
        &self.codomain
    }

    pub fn apply(&self, i: usize, j: usize) -> usize {
        self.table[i * self.right.len() + j]
    }
}

/// Factorizes `f` through the retraction `P`: the unique `h` with
/// `h(P(t)) = f(t)`, which is the restriction of `f` to the image.
///
/// Fails with the lexicographically first fiber pair on which `f` is not
/// constant.
pub fn factorize(p: &Retraction, f: &FiniteMap) -> Result<FiniteMap, RetractionError> {
    if !same_elements(p.carrier(), f.domain()) {
        return Err(RetractionError::DomainMismatch(
            "map domain differs from the retraction carrier".to_string(),
        ));
    }
    for t in 0..p.carrier.len() {
        let r = p.apply(t);
        if f.apply(t) != f.apply(r) {
            return Err(RetractionError::DependenceViolation {
                t1: p.carrier.id(r).to_string(),
                t2: p.carrier.id(t).to_string(),
            });
        }
    }
    let image_set = p.image_set();
    let table = p.image.iter().map(|&r| f.apply(r)).collect();
    FiniteMap::new(image_set, f.codomain.clone(), table)
}

/// General commutation rule: for an endo-map `f` with `f(R) ⊆ R`,
/// `P(f(t))` depends only on `P(t)` exactly when `P∘f = f∘P`.
pub fn check_commutation(p: &Retraction, f: &FiniteMap) -> Result<Report, RetractionError> {
    if !same_elements(p.carrier(), f.domain()) || !same_elements(p.carrier(), f.codomain()) {
        return Err(RetractionError::DomainMismatch(
            "commutation needs a self-map of the retraction carrier".to_string(),
        ));
    }
    for &r in &p.image {
        if !p.contains_in_image(f.apply(r)) {
            return Err(RetractionError::DomainMismatch(format!(
                "f does not preserve the image: f({}) = {} is outside it",
                p.carrier.id(r),
                p.carrier.id(f.apply(r))
            )));
        }
    }
    let mut cases = 0u64;
    for t in 0..p.carrier.len() {
        cases += 1;
        let lhs = p.apply(f.apply(t));
        let rhs = f.apply(p.apply(t));
        if lhs != rhs {
            let w = Witness::new(
                "=",
                format!("P(f({0})) = {1}", p.carrier.id(t), p.carrier.id(lhs)),
                format!("f(P({0})) = {1}", p.carrier.id(t), p.carrier.id(rhs)),
            )
            .with_input("t", serde_json::json!(p.carrier.id(t)));
            return Ok(Report::fail("commutation_rule", cases, 0, w));
        }
    }
    Ok(Report::pass("commutation_rule", cases, 0))
}

fn validate_combination(
    p1: &Retraction,
    p2: &Retraction,
    p3: &Retraction,
    m: &BinaryMap,
) -> Result<(), RetractionError> {
    if !same_elements(m.left(), p1.carrier())
        || !same_elements(m.right(), p2.carrier())
        || !same_elements(m.codomain(), p3.carrier())
    {
        return Err(RetractionError::DomainMismatch(
            "binary map carriers differ from the retraction carriers".to_string(),
        ));
    }
    for &r1 in &p1.image {
        for &r2 in &p2.image {
            if !p3.contains_in_image(m.apply(r1, r2)) {
                return Err(RetractionError::DomainMismatch(format!(
                    "m does not map images into the image: m({}, {}) = {}",
                    p1.carrier.id(r1),
                    p2.carrier.id(r2),
                    p3.carrier.id(m.apply(r1, r2))
                )));
            }
        }
    }
    Ok(())
}

/// General combination rule: if `P3(t1 t2)` depends only on
/// `(P1(t1), P2(t2))` then `P3(t1 t2) = P1(t1) P2(t2)`. The dependence is
/// checked, not assumed.
pub fn check_combination(
    p1: &Retraction,
    p2: &Retraction,
    p3: &Retraction,
    m: &BinaryMap,
) -> Result<Report, RetractionError> {
    validate_combination(p1, p2, p3, m)?;
    let mut reps: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();
    let mut cases = 0u64;
    for t1 in 0..p1.carrier.len() {
        for t2 in 0..p2.carrier.len() {
            cases += 1;
            let key = (p1.apply(t1), p2.apply(t2));
            let value = p3.apply(m.apply(t1, t2));
            match reps.get(&key) {
                None => {
                    reps.insert(key, (t1, t2, value));
                }
                Some(&(u1, u2, v)) if v != value => {
                    let w = Witness::new(
                        "=",
                        format!(
                            "P3(m({}, {})) = {}",
                            p1.carrier.id(u1),
                            p2.carrier.id(u2),
                            p3.carrier.id(v)
                        ),
                        format!(
                            "P3(m({}, {})) = {}",
                            p1.carrier.id(t1),
                            p2.carrier.id(t2),
                            p3.carrier.id(value)
                        ),
                    )
                    .with_input(
                        "pair1",
                        serde_json::json!([p1.carrier.id(u1), p2.carrier.id(u2)]),
                    )
                    .with_input(
                        "pair2",
                        serde_json::json!([p1.carrier.id(t1), p2.carrier.id(t2)]),
                    );
                    return Ok(Report::fail("combination_rule", cases, 0, w)
                        .with_note("dependence hypothesis violated"));
                }
                _ => {}
            }
        }
    }
    // dependence holds; the combination equation must follow
    for t1 in 0..p1.carrier.len() {
        for t2 in 0..p2.carrier.len() {
            let lhs = p3.apply(m.apply(t1, t2));
            let rhs = m.apply(p1.apply(t1), p2.apply(t2));
            if lhs != rhs {
                let w = Witness::new(
                    "=",
                    format!("P3(m(t1, t2)) = {}", p3.carrier.id(lhs)),
                    format!("m(P1(t1), P2(t2)) = {}", p3.carrier.id(rhs)),
                )
                .with_input("t1", serde_json::json!(p1.carrier.id(t1)))
                .with_input("t2", serde_json::json!(p2.carrier.id(t2)));
                return Ok(Report::fail("combination_rule", cases, 0, w));
            }
        }
    }
    Ok(Report::pass("combination_rule", cases, 0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedElementReport {
    pub part3: Report,
    pub part4: Report,
}

impl FixedElementReport {
    pub fn passed(&self) -> bool {
        self.part3.passed() && self.part4.verdict != Verdict::Fail
    }
}

/// Fixed-element rules: with `e` fixed in `T2`, if `P3(t1 e)` depends only
/// on `P1(t1)` then `P3(t1 e) = P3(P1(t1) e)` (part 3); if additionally
/// `P3(r e) = m(r, P2(e))` for every image element `r`, then
/// `P3(t1 e) = m(P1(t1), P2(e))` (part 4). Both hypotheses are checked.
pub fn check_fixed_element(
    p1: &Retraction,
    p2: &Retraction,
    p3: &Retraction,
    m: &BinaryMap,
    e: usize,
) -> Result<FixedElementReport, RetractionError> {
    validate_combination(p1, p2, p3, m)?;
    if e >= p2.carrier.len() {
        return Err(RetractionError::DomainMismatch(format!(
            "fixed element index {e} outside T2"
        )));
    }

    // part 3: dependence of P3(m(t1, e)) on P1(t1)
    let mut reps: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut cases = 0u64;
    let mut part3 = None;
    for t1 in 0..p1.carrier.len() {
        cases += 1;
        let key = p1.apply(t1);
        let value = p3.apply(m.apply(t1, e));
        match reps.get(&key) {
            None => {
                reps.insert(key, (t1, value));
            }
            Some(&(u1, v)) if v != value => {
                let w = Witness::new(
                    "=",
                    format!("P3(m({}, e)) = {}", p1.carrier.id(u1), p3.carrier.id(v)),
                    format!("P3(m({}, e)) = {}", p1.carrier.id(t1), p3.carrier.id(value)),
                )
                .with_input("t1_a", serde_json::json!(p1.carrier.id(u1)))
                .with_input("t1_b", serde_json::json!(p1.carrier.id(t1)))
                .with_input("e", serde_json::json!(p2.carrier.id(e)));
                part3 = Some(
                    Report::fail("fixed_element_part3", cases, 0, w)
                        .with_note("dependence hypothesis violated"),
                );
                break;
            }
            _ => {}
        }
    }
    let part3 = match part3 {
        Some(r) => r,
        None => {
            // dependence holds; verify the part-3 equation
            let mut fail = None;
            for t1 in 0..p1.carrier.len() {
                let lhs = p3.apply(m.apply(t1, e));
                let rhs = p3.apply(m.apply(p1.apply(t1), e));
                if lhs != rhs {
                    let w = Witness::new(
                        "=",
                        format!("P3(m(t1, e)) = {}", p3.carrier.id(lhs)),
                        format!("P3(m(P1(t1), e)) = {}", p3.carrier.id(rhs)),
                    )
                    .with_input("t1", serde_json::json!(p1.carrier.id(t1)))
                    .with_input("e", serde_json::json!(p2.carrier.id(e)));
                    fail = Some(Report::fail("fixed_element_part3", cases, 0, w));
                    break;
                }
            }
            fail.unwrap_or_else(|| Report::pass("fixed_element_part3", cases, 0))
        }
    };

    let part4 = if part3.verdict == Verdict::Fail {
        Report::unmet(
            "fixed_element_part4",
            "hypothesis not satisfied: part-3 dependence fails",
        )
    } else {
        let pe = p2.apply(e);
        let mut unmet = None;
        for &r in &p1.image {
            if p3.apply(m.apply(r, e)) != m.apply(r, pe) {
                unmet = Some(Report::unmet(
                    "fixed_element_part4",
                    format!(
                        "hypothesis not satisfied: P3(m({r_id}, e)) = {lhs} but m({r_id}, P2(e)) = {rhs}",
                        r_id = p1.carrier.id(r),
                        lhs = p3.carrier.id(p3.apply(m.apply(r, e))),
                        rhs = p3.carrier.id(m.apply(r, pe)),
                    ),
                ));
                break;
            }
        }
        match unmet {
            Some(r) => r,
            None => {
                let mut fail = None;
                let mut cases4 = 0u64;
                for t1 in 0..p1.carrier.len() {
                    cases4 += 1;
                    let lhs = p3.apply(m.apply(t1, e));
                    let rhs = m.apply(p1.apply(t1), pe);
                    if lhs != rhs {
                        let w = Witness::new(
                            "=",
                            format!("P3(m(t1, e)) = {}", p3.carrier.id(lhs)),
                            format!("m(P1(t1), P2(e)) = {}", p3.carrier.id(rhs)),
                        )
                        .with_input("t1", serde_json::json!(p1.carrier.id(t1)))
                        .with_input("e", serde_json::json!(p2.carrier.id(e)));
                        fail = Some(Report::fail("fixed_element_part4", cases4, 0, w));
                        break;
                    }
                }
                fail.unwrap_or_else(|| Report::pass("fixed_element_part4", cases4, 0))
            }
        }
    };

    Ok(FixedElementReport { part3, part4 })
}

// --- JSON table formats (consumed by the `retract` CLI subcommand) ---

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetractionJson {
    pub carrier: Vec<String>,
    pub image: Vec<String>,
    pub table: BTreeMap<String, String>,
}

impl RetractionJson {
    pub fn to_retraction(&self) -> Result<Retraction, RetractionError> {
        let carrier = ElementSet::new(self.carrier.clone())?;
        let map = FiniteMap::from_pairs(carrier.clone(), carrier.clone(), &self.table)?;
        Retraction::with_image(carrier, &self.image, map.table().to_vec())
    }

    pub fn from_retraction(r: &Retraction) -> Self {
        RetractionJson {
            carrier: r.carrier().ids().to_vec(),
            image: r.image().iter().map(|&i| r.carrier().id(i).to_string()).collect(),
            table: r
                .carrier()
                .ids()
                .iter()
                .enumerate()
                .map(|(i, id)| (id.clone(), r.carrier().id(r.apply(i)).to_string()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteMapJson {
    pub domain: Vec<String>,
    pub codomain: Vec<String>,
    pub table: BTreeMap<String, String>,
}

impl FiniteMapJson {
    pub fn to_map(&self) -> Result<FiniteMap, RetractionError> {
        let domain = ElementSet::new(self.domain.clone())?;
        let codomain = ElementSet::new(self.codomain.clone())?;
        FiniteMap::from_pairs(domain, codomain, &self.table)
    }

    pub fn from_map(f: &FiniteMap) -> Self {
        FiniteMapJson {
            domain: f.domain().ids().to_vec(),
            codomain: f.codomain().ids().to_vec(),
            table: f.to_pairs(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinaryMapJson {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub codomain: Vec<String>,
    /// table[x][y] = m(x, y)
    pub table: BTreeMap<String, BTreeMap<String, String>>,
}

impl BinaryMapJson {
    pub fn to_map(&self) -> Result<BinaryMap, RetractionError> {
        let left = ElementSet::new(self.left.clone())?;
        let right = ElementSet::new(self.right.clone())?;
        let codomain = ElementSet::new(self.codomain.clone())?;
        let mut table = vec![usize::MAX; left.len() * right.len()];
        for (x, row) in &self.table {
            let i = left.index_of(x)?;
            for (y, z) in row {
                table[i * right.len() + right.index_of(y)?] = codomain.index_of(z)?;
            }
        }
        if let Some(flat) = table.iter().position(|&v| v == usize::MAX) {
            let (i, j) = (flat / right.len(), flat % right.len());
            return Err(RetractionError::InvalidTable(format!(
                "no image for pair (`{}`, `{}`)",
                left.id(i),
                right.id(j)
            )));
        }
        BinaryMap::new(left, right, codomain, table)
    }

    pub fn from_map(m: &BinaryMap) -> Self {
        let mut table = BTreeMap::new();
        for (i, x) in m.left().ids().iter().enumerate() {
            let mut row = BTreeMap::new();
            for (j, y) in m.right().ids().iter().enumerate() {
                row.insert(y.clone(), m.codomain().id(m.apply(i, j)).to_string());
            }
            table.insert(x.clone(), row);
        }
        BinaryMapJson {
            left: m.left().ids().to_vec(),
            right: m.right().ids().to_vec(),
            codomain: m.codomain().ids().to_vec(),
            table,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RetractionCheckSpec {
    Factorize {
        retraction: RetractionJson,
        map: FiniteMapJson,
    },
    Commutation {
        retraction: RetractionJson,
        map: FiniteMapJson,
    },
    Combination {
        p1: RetractionJson,
        p2: RetractionJson,
        p3: RetractionJson,
        m: BinaryMapJson,
    },
    FixedElement {
        p1: RetractionJson,
        p2: RetractionJson,
        p3: RetractionJson,
        m: BinaryMapJson,
        e: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetractionChecksFile {
    pub checks: Vec<RetractionCheckSpec>,
}

/// Runs one parsed check; factorization success is reported as a pass whose
/// note carries the factored table.
pub fn run_check_spec(spec: &RetractionCheckSpec) -> Result<Vec<Report>, RetractionError> {
    match spec {
        RetractionCheckSpec::Factorize { retraction, map } => {
            let p = retraction.to_retraction()?;
            let f = map.to_map()?;
            match factorize(&p, &f) {
                Ok(h) => Ok(vec![Report::pass(
                    "factorize",
                    p.carrier().len() as u64,
                    0,
                )
                .with_note(format!(
                    "h = {}",
                    serde_json::to_string(&FiniteMapJson::from_map(&h).table).unwrap()
                ))]),
                Err(RetractionError::DependenceViolation { t1, t2 }) => {
                    let w = Witness::new(
                        "=",
                        format!("f({t1})"),
                        format!("f({t2})"),
                    )
                    .with_input("t1", serde_json::json!(t1))
                    .with_input("t2", serde_json::json!(t2));
                    Ok(vec![Report::fail("factorize", p.carrier().len() as u64, 0, w)
                        .with_note("f is not constant on a retraction fiber")])
                }
                Err(e) => Err(e),
            }
        }
        RetractionCheckSpec::Commutation { retraction, map } => {
            Ok(vec![check_commutation(&retraction.to_retraction()?, &map.to_map()?)?])
        }
        RetractionCheckSpec::Combination { p1, p2, p3, m } => Ok(vec![check_combination(
            &p1.to_retraction()?,
            &p2.to_retraction()?,
            &p3.to_retraction()?,
            &m.to_map()?,
        )?]),
        RetractionCheckSpec::FixedElement { p1, p2, p3, m, e } => {
            let p2r = p2.to_retraction()?;
            let e_idx = p2r.carrier().index_of(e)?;
            let rep = check_fixed_element(
                &p1.to_retraction()?,
                &p2r,
                &p3.to_retraction()?,
                &m.to_map()?,
                e_idx,
            )?;
            Ok(vec![rep.part3, rep.part4])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elems(ids: &[&str]) -> ElemsRef {
        ElementSet::new(ids.iter().map(|s| s.to_string())).unwrap()
    }

    fn retraction(carrier: &ElemsRef, pairs: &[(&str, &str)]) -> Retraction {
        let table = carrier
            .ids()
            .iter()
            .map(|id| {
                let to = pairs
                    .iter()
                    .find(|(f, _)| f == id)
                    .map(|(_, t)| *t)
                    .unwrap_or(id.as_str());
                carrier.index_of(to).unwrap()
            })
            .collect();
        Retraction::new(carrier.clone(), table).unwrap()
    }

    fn map(domain: &ElemsRef, codomain: &ElemsRef, pairs: &[(&str, &str)]) -> FiniteMap {
        let pairs: BTreeMap<String, String> = pairs
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        FiniteMap::from_pairs(domain.clone(), codomain.clone(), &pairs).unwrap()
    }

    #[test]
    fn retraction_validates_fixed_points() {
        let t = elems(&["1", "2", "3"]);
        // 1 -> 2, 2 -> 1 has range {1, 2} but fixes neither
        assert!(Retraction::new(t.clone(), vec![1, 0, 0]).is_err());
        assert!(Retraction::new(t, vec![0, 1, 0]).is_ok());
    }

    #[test]
    fn factorize_restriction() {
        let t = elems(&["1", "2", "3", "4"]);
        let vals = elems(&["x", "y"]);
        let p = retraction(&t, &[("3", "1"), ("4", "2")]);
        let f = map(&t, &vals, &[("1", "x"), ("2", "y"), ("3", "x"), ("4", "y")]);
        let h = factorize(&p, &f).unwrap();
        assert_eq!(h.domain().ids(), &["1".to_string(), "2".to_string()]);
        assert_eq!(h.to_pairs().get("1").unwrap(), "x");
        assert_eq!(h.to_pairs().get("2").unwrap(), "y");
        // h o P = f pointwise
        for t_idx in 0..4 {
            let r = p.apply(t_idx);
            let r_in_h = h.domain().index_of(p.carrier().id(r)).unwrap();
            assert_eq!(h.apply(r_in_h), f.apply(t_idx));
        }
    }

    #[test]
    fn factorize_identity_case() {
        let t = elems(&["1", "2", "3"]);
        let p = Retraction::identity(t.clone());
        let f = map(&t, &t, &[("1", "2"), ("2", "3"), ("3", "1")]);
        let h = factorize(&p, &f).unwrap();
        assert_eq!(h.table(), f.table());
    }

    #[test]
    fn factorize_reports_violating_fiber() {
        let t = elems(&["1", "2", "3"]);
        let vals = elems(&["a", "b"]);
        let p = retraction(&t, &[("3", "1")]);
        let f = map(&t, &vals, &[("1", "a"), ("2", "b"), ("3", "b")]);
        assert_eq!(
            factorize(&p, &f).unwrap_err(),
            RetractionError::DependenceViolation {
                t1: "1".into(),
                t2: "3".into()
            }
        );
    }

    #[test]
    fn factorize_uniqueness() {
        // any candidate differing from f|R on R fails h o P = f
        let t = elems(&["1", "2", "3", "4"]);
        let vals = elems(&["x", "y"]);
        let p = retraction(&t, &[("3", "1"), ("4", "2")]);
        let f = map(&t, &vals, &[("1", "x"), ("2", "y"), ("3", "x"), ("4", "y")]);
        let h = factorize(&p, &f).unwrap();
        for flip in 0..h.table().len() {
            let mut other = h.table().to_vec();
            other[flip] = 1 - other[flip];
            let broken = (0..t.len()).any(|ti| {
                let r = p.apply(ti);
                let pos = h.domain().index_of(t.id(r)).unwrap();
                other[pos] != f.apply(ti)
            });
            assert!(broken, "a differing candidate must violate h o P = f");
        }
    }

    #[test]
    fn commutation_pass_and_fail() {
        let t = elems(&["1", "2", "3"]);
        let p = retraction(&t, &[("3", "1")]);

        // identity retraction commutes with everything
        let id_p = Retraction::identity(t.clone());
        let any = map(&t, &t, &[("1", "2"), ("2", "3"), ("3", "1")]);
        assert!(check_commutation(&id_p, &any).unwrap().passed());

        // constants commute
        let const2 = map(&t, &t, &[("1", "2"), ("2", "2"), ("3", "2")]);
        assert!(check_commutation(&p, &const2).unwrap().passed());

        // f = {1 -> 3, 2 -> 2, 3 -> 3} does not preserve the image
        let f = map(&t, &t, &[("1", "3"), ("2", "2"), ("3", "3")]);
        assert!(matches!(
            check_commutation(&p, &f).unwrap_err(),
            RetractionError::DomainMismatch(_)
        ));

        // an image-preserving non-commuting map: f = {1 -> 2, 2 -> 2, 3 -> 3}
        // P(f(3)) = P(3) = 1 but f(P(3)) = f(1) = 2
        let g = map(&t, &t, &[("1", "2"), ("2", "2"), ("3", "3")]);
        let rep = check_commutation(&p, &g).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert_eq!(
            rep.witness.unwrap().inputs.get("t").unwrap(),
            &serde_json::json!("3")
        );
    }

    /// check_commutation passes iff P o f factorizes through P, carriers <= 6.
    #[test]
    fn commutation_equivalent_to_fiber_dependence() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        let mut tried = 0;
        while tried < 400 {
            let n = rng.gen_range(1..=6usize);
            let carrier = ElementSet::new((0..n).map(|i| format!("e{i}"))).unwrap();
            let table: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            // make it a retraction: fix the range
            let mut fixed = table.clone();
            for i in 0..n {
                let r = table[i];
                fixed[r] = r;
            }
            let p = Retraction::new(carrier.clone(), fixed).unwrap();
            let f_table: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let f = FiniteMap::new(carrier.clone(), carrier.clone(), f_table).unwrap();
            if p.image().iter().any(|&r| !p.contains_in_image(f.apply(r))) {
                continue; // f(R) not inside R; commutation precondition unmet
            }
            tried += 1;
            let commutes = check_commutation(&p, &f).unwrap().passed();
            // fiber-dependence of P o f through P
            let pf = FiniteMap::new(
                carrier.clone(),
                carrier.clone(),
                (0..n).map(|t| p.apply(f.apply(t))).collect(),
            )
            .unwrap();
            let factors = factorize(&p, &pf).is_ok();
            assert_eq!(commutes, factors);
        }
    }

    #[test]
    fn combination_absolute_value_grid() {
        // labels -2..2, retraction = absolute value, m = multiplication: pass
        let labels: Vec<String> = (-2..=2).map(|v: i64| v.to_string()).collect();
        let t = ElementSet::new(labels).unwrap();
        let abs_table: Vec<usize> = (-2..=2i64)
            .map(|v| t.index_of(&v.abs().to_string()).unwrap())
            .collect();
        let p = Retraction::new(t.clone(), abs_table).unwrap();
        let clamp = |v: i64| v.clamp(-2, 2);
        let mul_table: Vec<usize> = (-2..=2i64)
            .flat_map(|x| {
                (-2..=2i64).map(move |y| clamp(x * y))
            })
            .map(|v| t.index_of(&v.to_string()).unwrap())
            .collect();
        let m = BinaryMap::new(t.clone(), t.clone(), t.clone(), mul_table).unwrap();
        // |xy| = |x||y| fails on the clamped grid only where clamping bites;
        // restrict to the unclamped {-1, 0, 1} grid for an exact pass
        let small: Vec<String> = (-1..=1).map(|v: i64| v.to_string()).collect();
        let ts = ElementSet::new(small).unwrap();
        let abs_s: Vec<usize> = (-1..=1i64)
            .map(|v| ts.index_of(&v.abs().to_string()).unwrap())
            .collect();
        let ps = Retraction::new(ts.clone(), abs_s).unwrap();
        let mul_s: Vec<usize> = (-1..=1i64)
            .flat_map(|x| (-1..=1i64).map(move |y| x * y))
            .map(|v| ts.index_of(&v.to_string()).unwrap())
            .collect();
        let ms = BinaryMap::new(ts.clone(), ts.clone(), ts.clone(), mul_s).unwrap();
        let rep = check_combination(&ps, &ps, &ps, &ms).unwrap();
        assert!(rep.passed(), "{rep:?}");
        drop((p, m));

        // addition table: |x + y| is not a function of (|x|, |y|)
        let add_s: Vec<usize> = (-1..=1i64)
            .flat_map(|x| (-1..=1i64).map(move |y| (x + y).clamp(-1, 1)))
            .map(|v| ts.index_of(&v.to_string()).unwrap())
            .collect();
        let madd = BinaryMap::new(ts.clone(), ts.clone(), ts.clone(), add_s).unwrap();
        let rep = check_combination(&ps, &ps, &ps, &madd).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.note.as_deref().unwrap().contains("dependence"));
    }

    #[test]
    fn combination_identity_retractions_pass() {
        let t = elems(&["1", "2"]);
        let id = Retraction::identity(t.clone());
        let m = BinaryMap::new(t.clone(), t.clone(), t.clone(), vec![0, 1, 1, 0]).unwrap();
        assert!(check_combination(&id, &id, &id, &m).unwrap().passed());
    }

    #[test]
    fn fixed_element_identity_case() {
        let t = elems(&["1", "2"]);
        let id = Retraction::identity(t.clone());
        let m = BinaryMap::new(t.clone(), t.clone(), t.clone(), vec![0, 1, 1, 0]).unwrap();
        let rep = check_fixed_element(&id, &id, &id, &m, 0).unwrap();
        assert!(rep.part3.passed());
        assert!(rep.part4.passed());
    }

    #[test]
    fn fixed_element_part4_hypothesis_unmet() {
        // T = {0, 1, t} with P collapsing t to 1; m(x, y) = x except
        // m(r, e) is twisted so P3(m(r, e)) != m(r, P2(e)) for r = 0.
        let t = elems(&["0", "1", "t"]);
        let p = retraction(&t, &[("t", "1")]);
        // m(x, e) = constant "1" for every x; m on other columns = x
        // with e = "t": P2(e) = "1"; m(0, P2(e)) = m(0, 1) = "0"
        // but P3(m(0, e)) = P3(1) = "1" -> hypothesis fails for r = 0.
        let mut table = Vec::new();
        for x in 0..3usize {
            for y in 0..3usize {
                let val = if y == 2 { 1 } else { x };
                table.push(val);
            }
        }
        let m = BinaryMap::new(t.clone(), t.clone(), t.clone(), table).unwrap();
        let rep = check_fixed_element(&p, &p, &p, &m, 2).unwrap();
        // part 3: P3(m(t1, e)) = 1 constant, so dependence holds and equation passes
        assert!(rep.part3.passed());
        assert_eq!(rep.part4.verdict, Verdict::Unmet);
        assert!(rep.part4.note.as_deref().unwrap().contains("hypothesis"));
    }

    #[test]
    fn json_round_trip() {
        let t = elems(&["1", "2", "3"]);
        let p = retraction(&t, &[("3", "1")]);
        let j = RetractionJson::from_retraction(&p);
        let back = j.to_retraction().unwrap();
        assert_eq!(back, p);
    }
}
