//! Hyperblocks: per-attribute constraint bundles over numeric, ordinal and
//! nominal attributes, their purity, and greedy discovery of pure blocks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Attribute, Dataset, MeasurementType, Value};
use crate::rules::{Atom, Expr, Rule};

/// Label used for a missing target value when counting classes.
pub const MISSING_LABEL: &str = "?";

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// `|x - center| <= length / 2`
    NumericBand { center: f64, length: f64 },
    /// `start <= rank(x) <= end`
    OrdinalRange { start: u32, end: u32 },
    NominalSet { values: BTreeSet<String> },
}

pub(crate) fn band_holds(center: f64, length: f64, x: f64) -> bool {
    (x - center).abs() <= length * 0.5
}

impl Constraint {
    /// Smallest band whose closed extent includes both endpoints.
    pub fn band(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low <= high) {
            return Err(Error::invalid(format!("bad band [{low}, {high}]")));
        }
        let center = low + (high - low) * 0.5;
        let half = (center - low).max(high - center);
        let mut length = half * 2.0;
        while !(band_holds(center, length, low) && band_holds(center, length, high)) {
            length = length.next_up();
        }
        Ok(Constraint::NumericBand { center, length })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Constraint::NumericBand { .. } => "numeric_band",
            Constraint::OrdinalRange { .. } => "ordinal_range",
            Constraint::NominalSet { .. } => "nominal_set",
        }
    }

    fn check(&self, attr: &Attribute) -> Result<()> {
        let fits = match (self, attr.mtype) {
            (Constraint::NumericBand { .. }, MeasurementType::Cyclical { .. }) => false,
            (Constraint::NumericBand { .. }, m) => m.is_numeric(),
            (Constraint::OrdinalRange { .. }, m) => m == MeasurementType::Ordinal,
            (Constraint::NominalSet { .. }, m) => m == MeasurementType::Nominal,
        };
        if !fits {
            return Err(Error::schema(
                &attr.name,
                format!("a {} constraint does not apply to a {} attribute", self.kind(), attr.mtype),
            ));
        }
        match self {
            Constraint::NumericBand { center, length } if !(center.is_finite() && length.is_finite() && *length >= 0.0) => {
                Err(Error::schema(&attr.name, "band needs a finite center and a non-negative length"))
            }
            Constraint::OrdinalRange { start, end } if start > end => {
                Err(Error::schema(&attr.name, format!("rank range {start}..{end} is empty")))
            }
            Constraint::NominalSet { values } if values.is_empty() => {
                Err(Error::schema(&attr.name, "nominal set is empty"))
            }
            _ => Ok(()),
        }
    }

    /// Missing values never satisfy a constraint.
    pub fn holds(&self, v: &Value) -> bool {
        match (self, v) {
            (Constraint::NumericBand { center, length }, Value::Number(x)) => band_holds(*center, *length, *x),
            (Constraint::OrdinalRange { start, end }, Value::Level { rank, .. }) => start <= rank && rank <= end,
            (Constraint::NominalSet { values }, Value::Category(s)) => values.contains(s),
            _ => false,
        }
    }

    /// Closed float interval selecting exactly the values inside the band.
    pub fn band_bounds(&self) -> Option<(f64, f64)> {
        let Constraint::NumericBand { center, length } = *self else { return None };
        let inside = |x: f64| band_holds(center, length, x);
        // Membership is monotone on each side of the center, so bisect over
        // the ordered bit patterns instead of stepping one ulp at a time.
        let high = last_inside(order_key(center), order_key(f64::INFINITY), &inside);
        let low = last_inside(order_key(center), order_key(f64::NEG_INFINITY), &inside);
        Some((from_order_key(low), from_order_key(high)))
    }
}

/// Maps floats to integers with the same ordering (NaN excluded).
fn order_key(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits < 0 { bits ^ i64::MAX } else { bits }
}

fn from_order_key(key: i64) -> f64 {
    let bits = if key < 0 { key ^ i64::MAX } else { key };
    f64::from_bits(bits as u64)
}

/// `good` satisfies the predicate and `bad` does not; returns the key next to
/// the boundary on the `good` side.
fn last_inside(mut good: i64, mut bad: i64, inside: &impl Fn(f64) -> bool) -> i64 {
    while good.abs_diff(bad) > 1 {
        let mid = ((good as i128 + bad as i128) / 2) as i64;
        if inside(from_order_key(mid)) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HyperBlock {
    /// Attribute index -> constraint; absent attributes are unconstrained.
    pub constraints: BTreeMap<usize, Constraint>,
    pub label: Option<String>,
}

impl HyperBlock {
    pub fn new(constraints: BTreeMap<usize, Constraint>, label: Option<String>) -> Self {
        HyperBlock { constraints, label }
    }

    pub fn validate(&self, attributes: &[Attribute]) -> Result<()> {
        for (&col, c) in &self.constraints {
            let attr = attributes
                .get(col)
                .ok_or_else(|| Error::invalid(format!("constraint on attribute index {col} out of range")))?;
            c.check(attr)?;
        }
        Ok(())
    }

    /// Membership of a row already known to match the schema.
    pub fn contains_row(&self, row: &[Value]) -> bool {
        self.constraints.iter().all(|(&col, c)| c.holds(&row[col]))
    }

    pub fn contains(&self, ds: &Dataset, row: usize) -> Result<bool> {
        self.validate(ds.attributes())?;
        Ok(self.contains_row(&ds.rows()[row]))
    }

    pub fn members(&self, ds: &Dataset) -> Result<Vec<usize>> {
        self.validate(ds.attributes())?;
        Ok((0..ds.len()).filter(|&r| self.contains_row(&ds.rows()[r])).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityStats {
    pub total: usize,
    pub per_class: BTreeMap<String, usize>,
    /// `None` for an empty selection.
    pub dominant: Option<String>,
    pub purity: f64,
}

/// Largest class; ties go to the lexicographically smallest label.
pub fn dominant_class(per_class: &BTreeMap<String, usize>) -> Option<(&String, usize)> {
    let mut best: Option<(&String, usize)> = None;
    for (class, &n) in per_class {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((class, n));
        }
    }
    best
}

impl PurityStats {
    pub fn from_counts(per_class: BTreeMap<String, usize>) -> Self {
        let total = per_class.values().sum();
        let (dominant, purity) = match dominant_class(&per_class) {
            Some((c, n)) if total > 0 => (Some(c.clone()), n as f64 / total as f64),
            _ => (None, 0.0),
        };
        PurityStats {
            total,
            per_class,
            dominant,
            purity,
        }
    }
}

pub(crate) fn class_label(v: &Value) -> String {
    v.label().unwrap_or_else(|| MISSING_LABEL.to_string())
}

pub fn purity(hb: &HyperBlock, ds: &Dataset) -> Result<PurityStats> {
    let target = ds.target().ok_or(Error::NoTarget)?;
    let mut per_class = BTreeMap::new();
    for r in hb.members(ds)? {
        *per_class.entry(class_label(&ds.rows()[r][target])).or_default() += 1;
    }
    Ok(PurityStats::from_counts(per_class))
}

/// Conjunction of per-attribute atoms selecting exactly the block's members.
pub fn hb_to_rule(hb: &HyperBlock, attributes: &[Attribute]) -> Result<Rule> {
    hb.validate(attributes)?;
    let atoms = hb
        .constraints
        .iter()
        .map(|(&col, c)| {
            let attr = attributes[col].name.clone();
            let atom = match c {
                Constraint::NumericBand { .. } => {
                    let (low, high) = c.band_bounds().expect("numeric band");
                    Atom::InInterval { attr, low, high }
                }
                Constraint::OrdinalRange { start, end } => Atom::InRankRange {
                    attr,
                    start: *start,
                    end: *end,
                },
                Constraint::NominalSet { values } => Atom::InSet {
                    attr,
                    values: values.clone(),
                },
            };
            Expr::Atom(atom)
        })
        .collect();
    Ok(Rule {
        antecedent: Expr::And(atoms),
        consequent: hb.label.clone().unwrap_or_default(),
        else_class: None,
    })
}

/// Serialized constraint: `{attr, attr_index, kind, params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub attr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attr_index: Option<usize>,
    pub kind: String,
    pub params: ConstraintParams,
}

/// Parameters of a serialized constraint; which fields are set depends on
/// the kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstraintParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperBlockDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub constraints: Vec<ConstraintDoc>,
}

impl HyperBlockDoc {
    pub fn from_block(hb: &HyperBlock, attributes: &[Attribute]) -> Self {
        let constraints = hb
            .constraints
            .iter()
            .map(|(&col, c)| {
                let params = match c {
                    Constraint::NumericBand { center, length } => ConstraintParams {
                        center: Some(*center),
                        length: Some(*length),
                        ..Default::default()
                    },
                    Constraint::OrdinalRange { start, end } => ConstraintParams {
                        start: Some(*start),
                        end: Some(*end),
                        ..Default::default()
                    },
                    Constraint::NominalSet { values } => ConstraintParams {
                        values: Some(values.iter().cloned().collect()),
                        ..Default::default()
                    },
                };
                ConstraintDoc {
                    attr: attributes.get(col).map(|a| a.name.clone()).unwrap_or_default(),
                    attr_index: Some(col),
                    kind: c.kind().to_string(),
                    params,
                }
            })
            .collect();
        HyperBlockDoc {
            label: hb.label.clone(),
            constraints,
        }
    }

    /// Resolves attribute names against a schema; names win over indices.
    pub fn to_block(&self, attributes: &[Attribute]) -> Result<HyperBlock> {
        let mut constraints = BTreeMap::new();
        for doc in &self.constraints {
            let col = attributes
                .iter()
                .position(|a| a.name == doc.attr)
                .ok_or_else(|| Error::UnknownAttribute(doc.attr.clone()))?;
            let missing = |field: &str| Error::schema(&doc.attr, format!("{} constraint needs `{field}`", doc.kind));
            let p = &doc.params;
            let c = match doc.kind.as_str() {
                "numeric_band" => Constraint::NumericBand {
                    center: p.center.ok_or_else(|| missing("center"))?,
                    length: p.length.ok_or_else(|| missing("length"))?,
                },
                "ordinal_range" => Constraint::OrdinalRange {
                    start: p.start.ok_or_else(|| missing("start"))?,
                    end: p.end.ok_or_else(|| missing("end"))?,
                },
                "nominal_set" => Constraint::NominalSet {
                    values: p.values.clone().ok_or_else(|| missing("values"))?.into_iter().collect(),
                },
                other => return Err(Error::schema(&doc.attr, format!("unknown constraint kind `{other}`"))),
            };
            if constraints.insert(col, c).is_some() {
                return Err(Error::schema(&doc.attr, "attribute constrained twice"));
            }
        }
        let hb = HyperBlock::new(constraints, self.label.clone());
        hb.validate(attributes)?;
        Ok(hb)
    }
}

/// Per-attribute search state during expansion.
#[derive(Clone)]
enum Slot {
    Free,
    /// Indices into the attribute's sorted distinct values.
    Band { low: usize, high: usize, constraint: Constraint },
    Ranks { start: u32, end: u32 },
    Set { member: Vec<bool> },
}

/// Column view precomputed for discovery.
enum Column {
    Numeric { values: Vec<Option<f64>>, sorted: Vec<f64> },
    Ordinal { ranks: Vec<Option<u32>>, levels: u32 },
    Nominal { ids: Vec<Option<usize>>, domain: Vec<String> },
    Skipped,
}

impl Column {
    fn build(ds: &Dataset, col: usize) -> Self {
        let attr = ds.attribute(col);
        match attr.mtype {
            MeasurementType::Nominal => {
                let domain: Vec<String> = ds
                    .column(col)
                    .filter_map(|v| v.symbol().map(String::from))
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let ids = ds
                    .column(col)
                    .map(|v| v.symbol().and_then(|s| domain.binary_search_by(|d| d.as_str().cmp(s)).ok()))
                    .collect();
                Column::Nominal { ids, domain }
            }
            MeasurementType::Ordinal => Column::Ordinal {
                ranks: ds.column(col).map(Value::rank).collect(),
                levels: attr.declared_order.as_ref().map_or(0, |o| o.len() as u32),
            },
            MeasurementType::Cyclical { .. } => Column::Skipped,
            _ => {
                let values: Vec<Option<f64>> = ds.column(col).map(Value::as_number).collect();
                let mut sorted: Vec<f64> = values.iter().flatten().copied().collect();
                sorted.sort_by(f64::total_cmp);
                sorted.dedup();
                Column::Numeric { values, sorted }
            }
        }
    }

    fn seed(&self, row: usize) -> Slot {
        match self {
            Column::Numeric { values, sorted } => match values[row] {
                Some(x) => {
                    let i = sorted.partition_point(|v| *v < x);
                    Slot::Band {
                        low: i,
                        high: i,
                        constraint: Constraint::NumericBand { center: x, length: 0.0 },
                    }
                }
                None => Slot::Free,
            },
            Column::Ordinal { ranks, .. } => match ranks[row] {
                Some(r) => Slot::Ranks { start: r, end: r },
                None => Slot::Free,
            },
            Column::Nominal { ids, domain } => match ids[row] {
                Some(id) => {
                    let mut member = vec![false; domain.len()];
                    member[id] = true;
                    Slot::Set { member }
                }
                None => Slot::Free,
            },
            Column::Skipped => Slot::Free,
        }
    }

    fn holds(&self, slot: &Slot, row: usize) -> bool {
        match (self, slot) {
            (_, Slot::Free) => true,
            (Column::Numeric { values, .. }, Slot::Band { constraint: Constraint::NumericBand { center, length }, .. }) => {
                values[row].is_some_and(|x| band_holds(*center, *length, x))
            }
            (Column::Ordinal { ranks, .. }, Slot::Ranks { start, end }) => {
                ranks[row].is_some_and(|r| *start <= r && r <= *end)
            }
            (Column::Nominal { ids, .. }, Slot::Set { member }) => ids[row].is_some_and(|i| member[i]),
            _ => false,
        }
    }

    /// Widenings to try, in preference order.
    fn candidates(&self, slot: &Slot) -> Vec<Slot> {
        match (self, slot) {
            (Column::Numeric { sorted, .. }, Slot::Band { low, high, .. }) => {
                let mut out = Vec::new();
                let mut push = |lo: usize, hi: usize| {
                    if let Ok(constraint) = Constraint::band(sorted[lo], sorted[hi]) {
                        out.push(Slot::Band { low: lo, high: hi, constraint });
                    }
                };
                if *low > 0 {
                    push(low - 1, *high);
                }
                if high + 1 < sorted.len() {
                    push(*low, high + 1);
                }
                out
            }
            (Column::Ordinal { levels, .. }, Slot::Ranks { start, end }) => {
                let mut out = Vec::new();
                if *start > 1 {
                    out.push(Slot::Ranks { start: start - 1, end: *end });
                }
                if end < levels {
                    out.push(Slot::Ranks { start: *start, end: end + 1 });
                }
                out
            }
            (Column::Nominal { .. }, Slot::Set { member }) => (0..member.len())
                .filter(|&i| !member[i])
                .map(|i| {
                    let mut m = member.clone();
                    m[i] = true;
                    Slot::Set { member: m }
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Constraint for the final block; `None` when it admits every
    /// observed value and the column has no missing values.
    fn finish(&self, slot: &Slot) -> Option<Constraint> {
        let complete = match self {
            Column::Numeric { values, .. } => values.iter().all(Option::is_some),
            Column::Ordinal { ranks, .. } => ranks.iter().all(Option::is_some),
            Column::Nominal { ids, .. } => ids.iter().all(Option::is_some),
            Column::Skipped => true,
        };
        match (self, slot) {
            (_, Slot::Free) => None,
            (Column::Numeric { sorted, .. }, Slot::Band { low, high, constraint }) => {
                (!(complete && *low == 0 && high + 1 == sorted.len())).then(|| constraint.clone())
            }
            (Column::Ordinal { ranks, .. }, Slot::Ranks { start, end }) => {
                let all = ranks.iter().flatten().all(|r| start <= r && r <= end);
                (!(complete && all)).then_some(Constraint::OrdinalRange { start: *start, end: *end })
            }
            (Column::Nominal { domain, .. }, Slot::Set { member }) => {
                let values: BTreeSet<String> =
                    domain.iter().zip(member).filter(|(_, m)| **m).map(|(d, _)| d.clone()).collect();
                (!(complete && values.len() == domain.len())).then_some(Constraint::NominalSet { values })
            }
            _ => None,
        }
    }
}

/// Greedy pure-hyperblock discovery.
///
/// Every row not yet covered seeds a degenerate block (its own values on
/// every known attribute). If that block is impure the row is conflicted and
/// skipped. Otherwise attributes are widened round-robin in index order, one
/// step per attribute per sweep, keeping a step only while the block stays
/// pure, until a sweep changes nothing. Blocks whose member set lies inside
/// another block's member set are dropped.
pub fn discover_pure_hbs(ds: &Dataset) -> Result<Vec<HyperBlock>> {
    let target = ds.target().ok_or(Error::NoTarget)?;
    let n = ds.len();
    let classes: Vec<String> = ds.column(target).map(class_label).collect();
    let columns: Vec<(usize, Column)> = (0..ds.width())
        .filter(|&c| c != target)
        .map(|c| (c, Column::build(ds, c)))
        .collect();

    let mut covered = vec![false; n];
    let mut found: Vec<(HyperBlock, Vec<usize>)> = Vec::new();

    for seed in 0..n {
        if covered[seed] || ds.value(seed, target).is_missing() {
            continue;
        }
        let class = &classes[seed];
        let mut slots: Vec<Slot> = columns.iter().map(|(_, c)| c.seed(seed)).collect();
        let mut violations: Vec<u32> = (0..n)
            .map(|r| columns.iter().zip(&slots).filter(|((_, c), s)| !c.holds(s, r)).count() as u32)
            .collect();
        if (0..n).any(|r| violations[r] == 0 && classes[r] != *class) {
            continue;
        }

        loop {
            let mut changed = false;
            for (k, (_, column)) in columns.iter().enumerate() {
                for candidate in column.candidates(&slots[k]) {
                    let mut pure = true;
                    let mut delta: Vec<(usize, i32)> = Vec::new();
                    for r in 0..n {
                        let before = column.holds(&slots[k], r);
                        let after = column.holds(&candidate, r);
                        if before == after {
                            continue;
                        }
                        let d: i32 = if after { -1 } else { 1 };
                        if violations[r] as i32 + d == 0 && classes[r] != *class {
                            pure = false;
                            break;
                        }
                        delta.push((r, d));
                    }
                    if pure {
                        for (r, d) in delta {
                            violations[r] = (violations[r] as i32 + d) as u32;
                        }
                        slots[k] = candidate;
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let constraints = columns
            .iter()
            .zip(&slots)
            .filter_map(|((col, column), slot)| column.finish(slot).map(|c| (*col, c)))
            .collect();
        let hb = HyperBlock::new(constraints, Some(class.clone()));
        let members: Vec<usize> = (0..n).filter(|&r| hb.contains_row(&ds.rows()[r])).collect();
        for &r in &members {
            covered[r] = true;
        }
        found.push((hb, members));
    }

    Ok(remove_contained(found))
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for x in a {
        while j < b.len() && b[j] < *x {
            j += 1;
        }
        if j == b.len() || b[j] != *x {
            return false;
        }
    }
    true
}

/// Drops blocks whose members are a subset of another block's members; of
/// equal member sets the first is kept.
fn remove_contained(found: Vec<(HyperBlock, Vec<usize>)>) -> Vec<HyperBlock> {
    let mut keep = vec![true; found.len()];
    for i in 0..found.len() {
        for j in 0..found.len() {
            if i == j || !keep[j] {
                continue;
            }
            let (a, b) = (&found[i].1, &found[j].1);
            if is_subset(a, b) && (a.len() < b.len() || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    found.into_iter().zip(keep).filter(|(_, k)| *k).map(|((hb, _), _)| hb).collect()
}
