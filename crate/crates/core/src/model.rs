//! Measurement scales, typed values and datasets.
//!
//! Every attribute carries a [`MeasurementType`]. The type fixes which
//! relations between values are meaningful ([`permitted_relations`]); any
//! algorithm that wants to compare, subtract or divide values is expected to
//! ask [`check_operation`] first. Nominal values only admit equality, ordinal
//! values add order, interval values add differences, ratio (and absolute)
//! values add ratios. Cyclical values (azimuth, hour of day) admit equality and
//! the shorter-arc difference.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::number_label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementType {
    Nominal,
    Ordinal,
    Interval,
    Ratio,
    /// Counts: a ratio scale with a fixed unit. Same permissions as
    /// [`MeasurementType::Ratio`], kept apart for display.
    Absolute,
    Cyclical { period: f64 },
}

impl MeasurementType {
    pub fn cyclical(period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::invalid(format!(
                "cyclical period must be finite and positive, got {period}"
            )));
        }
        Ok(MeasurementType::Cyclical { period })
    }

    /// Values are stored as [`Value::Number`].
    pub fn is_numeric(&self) -> bool {
        !matches!(self, MeasurementType::Nominal | MeasurementType::Ordinal)
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeasurementType::Nominal => "nominal",
            MeasurementType::Ordinal => "ordinal",
            MeasurementType::Interval => "interval",
            MeasurementType::Ratio => "ratio",
            MeasurementType::Absolute => "absolute",
            MeasurementType::Cyclical { .. } => "cyclical",
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            MeasurementType::Cyclical { period } => Some(*period),
            _ => None,
        }
    }
}

impl fmt::Display for MeasurementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Equality,
    Order,
    Difference,
    DifferenceComparison,
    RatioOp,
    CyclicDifference,
}

impl RelationKind {
    pub const ALL: [RelationKind; 6] = [
        RelationKind::Equality,
        RelationKind::Order,
        RelationKind::Difference,
        RelationKind::DifferenceComparison,
        RelationKind::RatioOp,
        RelationKind::CyclicDifference,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Equality => "equality",
            RelationKind::Order => "order",
            RelationKind::Difference => "difference",
            RelationKind::DifferenceComparison => "difference comparison",
            RelationKind::RatioOp => "ratio",
            RelationKind::CyclicDifference => "cyclic difference",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Small set of [`RelationKind`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelationSet(u8);

impl RelationSet {
    pub fn of(kinds: &[RelationKind]) -> Self {
        RelationSet(kinds.iter().fold(0, |acc, k| acc | k.bit()))
    }

    pub fn contains(&self, kind: RelationKind) -> bool {
        self.0 & kind.bit() != 0
    }

    pub fn is_subset(&self, other: &RelationSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = RelationKind> + '_ {
        RelationKind::ALL.into_iter().filter(|k| self.contains(*k))
    }
}

pub fn permitted_relations(mtype: MeasurementType) -> RelationSet {
    use RelationKind::*;
    match mtype {
        MeasurementType::Nominal => RelationSet::of(&[Equality]),
        MeasurementType::Ordinal => RelationSet::of(&[Equality, Order]),
        MeasurementType::Interval => {
            RelationSet::of(&[Equality, Order, Difference, DifferenceComparison])
        }
        MeasurementType::Ratio | MeasurementType::Absolute => {
            RelationSet::of(&[Equality, Order, Difference, DifferenceComparison, RatioOp])
        }
        MeasurementType::Cyclical { .. } => {
            RelationSet::of(&[Equality, CyclicDifference, DifferenceComparison])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Permit {
    Allowed,
    Forbidden(String),
}

impl Permit {
    pub fn is_allowed(&self) -> bool {
        matches!(self, Permit::Allowed)
    }
}

pub fn check_operation(attr: &Attribute, rel: RelationKind) -> Permit {
    if permitted_relations(attr.mtype).contains(rel) {
        return Permit::Allowed;
    }
    // Similarity-coded values may compare a within-group gap against another
    // gap; compare_differences decides per pair.
    if rel == RelationKind::DifferenceComparison && attr.similarity_groups.is_some() {
        return Permit::Allowed;
    }
    Permit::Forbidden(format!(
        "{rel} is not meaningful for {} attribute `{}`",
        attr.mtype, attr.name
    ))
}

/// Outcome of comparing two value differences.
#[derive(Debug, Clone, PartialEq)]
pub enum Comparison {
    Forbidden(String),
    /// At least one operand is missing.
    Unknown,
    Holds(bool),
}

/// Decides whether `|a - b| < |c - d|` (pairs `(a, b)` and `(c, d)`) is
/// meaningful for `attr` and, if so, evaluates it.
///
/// With similarity groups, a comparison is meaningful when at least one pair
/// lies inside a single group; comparing two cross-group gaps is forbidden.
pub fn compare_differences(
    attr: &Attribute,
    pair1: (&Value, &Value),
    pair2: (&Value, &Value),
) -> Result<Comparison> {
    let operands = [pair1.0, pair1.1, pair2.0, pair2.1];
    if operands.iter().any(|v| v.is_missing()) {
        return Ok(Comparison::Unknown);
    }

    if let Some(groups) = &attr.similarity_groups {
        let mut located = [(0usize, 0i64); 4];
        for (slot, v) in located.iter_mut().zip(operands) {
            let label = v.label().unwrap_or_default();
            *slot = groups.locate(&label).ok_or_else(|| Error::UnknownValue {
                attribute: attr.name.clone(),
                value: label.clone(),
            })?;
        }
        let within1 = located[0].0 == located[1].0;
        let within2 = located[2].0 == located[3].0;
        if !(within1 || within2) {
            return Ok(Comparison::Forbidden(format!(
                "both differences cross similarity groups of `{}`",
                attr.name
            )));
        }
        let gap1 = (located[0].1 - located[1].1).abs();
        let gap2 = (located[2].1 - located[3].1).abs();
        return Ok(Comparison::Holds(gap1 < gap2));
    }

    if !permitted_relations(attr.mtype).contains(RelationKind::DifferenceComparison) {
        return Ok(Comparison::Forbidden(format!(
            "differences are not meaningful for {} attribute `{}`",
            attr.mtype, attr.name
        )));
    }
    let mut nums = [0.0f64; 4];
    for (slot, v) in nums.iter_mut().zip(operands) {
        *slot = v.as_number().ok_or_else(|| Error::UnknownValue {
            attribute: attr.name.clone(),
            value: v.label().unwrap_or_default(),
        })?;
    }
    let (gap1, gap2) = match attr.mtype {
        MeasurementType::Cyclical { period } => (
            cyclic_difference(nums[0], nums[1], period)?,
            cyclic_difference(nums[2], nums[3], period)?,
        ),
        _ => ((nums[0] - nums[1]).abs(), (nums[2] - nums[3]).abs()),
    };
    Ok(Comparison::Holds(gap1 < gap2))
}

/// Shorter-arc distance between two readings on a cyclical scale.
pub fn cyclic_difference(a: f64, b: f64, period: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("cyclic difference of a non-finite value"));
    }
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::invalid("cyclic period must be finite and positive"));
    }
    let d = libm::fmod((a - b).abs(), period);
    Ok(d.min(period - d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Missing,
    Number(f64),
    Category(String),
    /// Ordinal level; `rank` is the 1-based position in the attribute's
    /// declared order.
    Level { symbol: String, rank: u32 },
}

impl Value {
    pub fn category(s: impl Into<String>) -> Self {
        Value::Category(s.into())
    }

    pub fn level(s: impl Into<String>, rank: u32) -> Self {
        Value::Level {
            symbol: s.into(),
            rank,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn rank(&self) -> Option<u32> {
        match self {
            Value::Level { rank, .. } => Some(*rank),
            _ => None,
        }
    }

    pub fn symbol(&self) -> Option<&str> {
        match self {
            Value::Category(s) | Value::Level { symbol: s, .. } => Some(s),
            _ => None,
        }
    }

    /// Display text; `None` for missing.
    pub fn label(&self) -> Option<String> {
        match self {
            Value::Missing => None,
            Value::Number(x) => Some(number_label(*x)),
            Value::Category(s) | Value::Level { symbol: s, .. } => Some(s.clone()),
        }
    }
}

/// Partition of an attribute's values into similarity groups, each value with
/// an integer code. Codes increase strictly within and across groups, and the
/// gaps inside a group are meant to be smaller than the gaps across groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGroups {
    groups: Vec<SimilarityGroup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGroup {
    pub label: String,
    pub members: Vec<(String, i64)>,
}

impl SimilarityGroups {
    pub fn new(groups: Vec<SimilarityGroup>) -> Result<Self> {
        let mut last: Option<i64> = None;
        let mut seen = BTreeSet::new();
        for g in &groups {
            if g.members.is_empty() {
                return Err(Error::invalid(format!("similarity group `{}` is empty", g.label)));
            }
            for (value, code) in &g.members {
                if !seen.insert(value.as_str()) {
                    return Err(Error::invalid(format!(
                        "value `{value}` appears in more than one similarity group"
                    )));
                }
                if last.is_some_and(|l| *code <= l) {
                    return Err(Error::invalid(format!(
                        "similarity codes must increase strictly, `{value}` has {code}"
                    )));
                }
                last = Some(*code);
            }
        }
        Ok(SimilarityGroups { groups })
    }

    pub fn groups(&self) -> &[SimilarityGroup] {
        &self.groups
    }

    /// Group index and code of a value.
    pub fn locate(&self, value: &str) -> Option<(usize, i64)> {
        self.groups.iter().enumerate().find_map(|(gi, g)| {
            g.members
                .iter()
                .find(|(v, _)| v == value)
                .map(|(_, code)| (gi, *code))
        })
    }

    pub fn values(&self) -> impl Iterator<Item = &str> {
        self.groups
            .iter()
            .flat_map(|g| g.members.iter().map(|(v, _)| v.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub mtype: MeasurementType,
    /// Level order, required for ordinal attributes.
    pub declared_order: Option<Vec<String>>,
    /// Physical meaning tag ("mass", "length"); arithmetic across different
    /// modalities is meaningless.
    pub modality: Option<String>,
    pub similarity_groups: Option<SimilarityGroups>,
    /// Numeric code per symbol, installed by a coding scheme.
    pub codes: Option<BTreeMap<String, f64>>,
    /// Set once codes or numbers were rescaled to `[0, 1]`.
    pub normalized: bool,
    /// The declared order was generated, not chosen by the analyst.
    pub needs_review: bool,
}

impl Attribute {
    pub fn new(name: impl Into<String>, mtype: MeasurementType) -> Self {
        Attribute {
            name: name.into(),
            mtype,
            declared_order: None,
            modality: None,
            similarity_groups: None,
            codes: None,
            normalized: false,
            needs_review: false,
        }
    }

    pub fn nominal(name: impl Into<String>) -> Self {
        Attribute::new(name, MeasurementType::Nominal)
    }

    pub fn ordinal<S: Into<String>>(name: impl Into<String>, order: impl IntoIterator<Item = S>) -> Self {
        let mut a = Attribute::new(name, MeasurementType::Ordinal);
        a.declared_order = Some(order.into_iter().map(Into::into).collect());
        a
    }

    pub fn numeric(name: impl Into<String>, mtype: MeasurementType) -> Self {
        Attribute::new(name, mtype)
    }

    pub fn with_codes<S: Into<String>>(mut self, codes: impl IntoIterator<Item = (S, f64)>) -> Self {
        self.codes = Some(codes.into_iter().map(|(k, v)| (k.into(), v)).collect());
        self
    }

    pub fn with_similarity_groups(mut self, groups: SimilarityGroups) -> Self {
        self.similarity_groups = Some(groups);
        self
    }

    /// 1-based rank of a symbol in the declared order.
    pub fn rank_of(&self, symbol: &str) -> Option<u32> {
        self.declared_order
            .as_ref()?
            .iter()
            .position(|s| s == symbol)
            .map(|p| p as u32 + 1)
    }

    /// Builds the value of this attribute for `symbol` (ordinal levels get
    /// their rank).
    pub fn level(&self, symbol: &str) -> Result<Value> {
        let rank = self.rank_of(symbol).ok_or_else(|| Error::UnknownValue {
            attribute: self.name.clone(),
            value: symbol.to_string(),
        })?;
        Ok(Value::level(symbol, rank))
    }

    /// Numeric code of a value: the number itself, an installed code, or the
    /// ordinal rank as a fallback.
    pub fn code_of(&self, v: &Value) -> Option<f64> {
        match v {
            Value::Missing => None,
            Value::Number(x) => Some(*x),
            Value::Category(s) => self.codes.as_ref()?.get(s).copied(),
            Value::Level { symbol, rank } => self
                .codes
                .as_ref()
                .and_then(|c| c.get(symbol).copied())
                .or(Some(*rank as f64)),
        }
    }

    pub fn conforms(&self, v: &Value) -> bool {
        match (self.mtype, v) {
            (_, Value::Missing) => true,
            (MeasurementType::Nominal, Value::Category(_)) => true,
            (MeasurementType::Ordinal, Value::Level { symbol, rank }) => {
                self.rank_of(symbol) == Some(*rank)
            }
            (m, Value::Number(x)) => m.is_numeric() && x.is_finite(),
            _ => false,
        }
    }
}

/// Rectangular table of typed values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    attributes: Vec<Attribute>,
    rows: Vec<Vec<Value>>,
    target: Option<usize>,
    originals: BTreeMap<usize, Vec<Option<String>>>,
}

impl Dataset {
    pub fn new(attributes: Vec<Attribute>, rows: Vec<Vec<Value>>, target: Option<usize>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for a in &attributes {
            if !names.insert(a.name.as_str()) {
                return Err(Error::schema(&a.name, "duplicate attribute name"));
            }
            if a.mtype == MeasurementType::Ordinal && a.declared_order.is_none() {
                return Err(Error::schema(&a.name, "ordinal attribute without a declared order"));
            }
            if let Some(order) = &a.declared_order {
                let distinct: BTreeSet<_> = order.iter().collect();
                if distinct.len() != order.len() {
                    return Err(Error::schema(&a.name, "declared order repeats a level"));
                }
            }
        }
        if let Some(t) = target
            && t >= attributes.len() {
                return Err(Error::invalid(format!("target index {t} out of range")));
            }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != attributes.len() {
                return Err(Error::Row {
                    row: i,
                    message: format!("{} values for {} attributes", row.len(), attributes.len()),
                });
            }
            for (a, v) in attributes.iter().zip(row) {
                if !a.conforms(v) {
                    return Err(Error::Row {
                        row: i,
                        message: format!("value {v:?} does not conform to {} attribute `{}`", a.mtype, a.name),
                    });
                }
            }
        }
        Ok(Dataset {
            attributes,
            rows,
            target,
            originals: BTreeMap::new(),
        })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &Attribute {
        &self.attributes[index]
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.attributes.len()
    }

    pub fn target(&self) -> Option<usize> {
        self.target
    }

    pub fn with_target(mut self, target: Option<usize>) -> Result<Self> {
        if let Some(t) = target
            && t >= self.attributes.len() {
                return Err(Error::invalid(format!("target index {t} out of range")));
            }
        self.target = target;
        Ok(self)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn value(&self, row: usize, col: usize) -> &Value {
        &self.rows[row][col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &Value> + '_ {
        self.rows.iter().map(move |r| &r[col])
    }

    pub fn code(&self, row: usize, col: usize) -> Option<f64> {
        self.attributes[col].code_of(&self.rows[row][col])
    }

    /// Original (pre-coding) text kept for attributes coded with
    /// `keep_original_values`.
    pub fn originals(&self, col: usize) -> Option<&[Option<String>]> {
        self.originals.get(&col).map(|v| v.as_slice())
    }

    pub fn all_originals(&self) -> &BTreeMap<usize, Vec<Option<String>>> {
        &self.originals
    }

    pub fn set_originals(&mut self, col: usize, values: Vec<Option<String>>) -> Result<()> {
        if values.len() != self.rows.len() || col >= self.attributes.len() {
            return Err(Error::invalid("original column does not match the dataset shape"));
        }
        self.originals.insert(col, values);
        Ok(())
    }

    /// Distinct non-missing labels in first-appearance order.
    pub fn distinct_labels(&self, col: usize) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.column(col) {
            if let Some(l) = v.label()
                && seen.insert(l.clone()) {
                    out.push(l);
                }
        }
        out
    }

    /// Keeps the listed columns, in the given order. The target follows its
    /// column or is dropped.
    pub fn select(&self, cols: &[usize]) -> Dataset {
        let attributes = cols.iter().map(|&c| self.attributes[c].clone()).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
            .collect();
        let target = self.target.and_then(|t| cols.iter().position(|&c| c == t));
        let originals = cols
            .iter()
            .enumerate()
            .filter_map(|(new, old)| self.originals.get(old).map(|o| (new, o.clone())))
            .collect();
        Dataset {
            attributes,
            rows,
            target,
            originals,
        }
    }

    /// Replaces one attribute and its column; checks conformance.
    pub fn replace_column(&mut self, col: usize, attr: Attribute, values: Vec<Value>) -> Result<()> {
        if values.len() != self.rows.len() {
            return Err(Error::invalid("replacement column has the wrong length"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !attr.conforms(v)) {
            return Err(Error::Row {
                row: i,
                message: format!("value {v:?} does not conform to `{}`", attr.name),
            });
        }
        for (row, v) in self.rows.iter_mut().zip(values) {
            row[col] = v;
        }
        self.attributes[col] = attr;
        Ok(())
    }

    pub(crate) fn attribute_mut(&mut self, col: usize) -> &mut Attribute {
        &mut self.attributes[col]
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [Vec<Value>] {
        &mut self.rows
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HierarchyNode {
    Leaf { attr: usize },
    Group { name: String, children: Vec<HierarchyNode> },
}

impl HierarchyNode {
    fn depth(&self) -> usize {
        match self {
            HierarchyNode::Leaf { .. } => 0,
            HierarchyNode::Group { children, .. } => {
                1 + children.iter().map(HierarchyNode::depth).max().unwrap_or(0)
            }
        }
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            HierarchyNode::Leaf { attr } => out.push(*attr),
            HierarchyNode::Group { children, .. } => children.iter().for_each(|c| c.leaves(out)),
        }
    }

    fn collect_level(&self, level: usize, out: &mut Vec<(Option<String>, Vec<usize>)>) {
        match self {
            HierarchyNode::Leaf { attr } => out.push((None, alloc::vec![*attr])),
            HierarchyNode::Group { name, children } => {
                if level == 0 {
                    let mut leaves = Vec::new();
                    self.leaves(&mut leaves);
                    out.push((Some(name.clone()), leaves));
                } else {
                    children.iter().for_each(|c| c.collect_level(level - 1, out));
                }
            }
        }
    }
}

/// Tree of named attribute groups with a selected display level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeHierarchy {
    pub root: HierarchyNode,
    pub active_level: usize,
}

impl AttributeHierarchy {
    pub fn new(root: HierarchyNode, active_level: usize, attribute_count: usize) -> Result<Self> {
        let h = AttributeHierarchy { root, active_level };
        h.validate(attribute_count)?;
        Ok(h)
    }

    /// Every attribute appears in exactly one leaf and the level is within
    /// the tree.
    pub fn validate(&self, attribute_count: usize) -> Result<()> {
        let mut leaves = Vec::new();
        self.root.leaves(&mut leaves);
        let mut seen = alloc::vec![false; attribute_count];
        for &l in &leaves {
            match seen.get_mut(l) {
                None => return Err(Error::invalid(format!("hierarchy leaf {l} is not an attribute"))),
                Some(true) => return Err(Error::invalid(format!("attribute {l} appears twice in the hierarchy"))),
                Some(s) => *s = true,
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("attribute {missing} is not in the hierarchy")));
        }
        if self.active_level > self.depth() {
            return Err(Error::invalid(format!(
                "active level {} exceeds hierarchy depth {}",
                self.active_level,
                self.depth()
            )));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Display groups at the active level: every group node at that depth
    /// collapses to one entry; shallower leaves stay single.
    pub fn visible_groups(&self) -> Vec<(Option<String>, Vec<usize>)> {
        let mut out = Vec::new();
        self.root.collect_level(self.active_level, &mut out);
        out
    }

    /// A flat hierarchy with one leaf per attribute.
    pub fn flat(attribute_count: usize) -> Self {
        AttributeHierarchy {
            root: HierarchyNode::Group {
                name: String::from("all"),
                children: (0..attribute_count).map(|attr| HierarchyNode::Leaf { attr }).collect(),
            },
            active_level: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn occupations() -> Attribute {
        let groups = SimilarityGroups::new(vec![
            SimilarityGroup {
                label: "medical".into(),
                members: vec![("nurse".into(), 1), ("doctor".into(), 2)],
            },
            SimilarityGroup {
                label: "technical".into(),
                members: vec![("technician".into(), 5), ("engineer".into(), 6)],
            },
            SimilarityGroup {
                label: "teaching".into(),
                members: vec![("teaching assistant".into(), 10), ("teacher".into(), 11)],
            },
        ])
        .unwrap();
        Attribute::nominal("occupation").with_similarity_groups(groups)
    }

    fn cat(s: &str) -> Value {
        Value::category(s)
    }

    #[test]
    fn permission_table() {
        use RelationKind::*;
        let nominal = permitted_relations(MeasurementType::Nominal);
        assert_eq!(nominal.iter().collect::<Vec<_>>(), vec![Equality]);
        let ordinal = permitted_relations(MeasurementType::Ordinal);
        assert!(ordinal.contains(Order));
        assert!(!ordinal.contains(Difference));
        assert!(!ordinal.contains(RatioOp));
        assert!(permitted_relations(MeasurementType::Ratio).contains(RatioOp));
        assert_eq!(
            permitted_relations(MeasurementType::Absolute),
            permitted_relations(MeasurementType::Ratio)
        );
        let cyc = permitted_relations(MeasurementType::Cyclical { period: 360.0 });
        assert_eq!(cyc, RelationSet::of(&[Equality, CyclicDifference, DifferenceComparison]));
    }

    #[test]
    fn scale_hierarchy_is_monotone() {
        let chain = [
            MeasurementType::Nominal,
            MeasurementType::Ordinal,
            MeasurementType::Interval,
            MeasurementType::Ratio,
        ];
        for w in chain.windows(2) {
            let lo = permitted_relations(w[0]);
            let hi = permitted_relations(w[1]);
            assert!(lo.is_subset(&hi) && lo != hi, "{} vs {}", w[0], w[1]);
        }
    }

    #[test]
    fn equality_is_always_allowed() {
        for m in [
            MeasurementType::Nominal,
            MeasurementType::Ordinal,
            MeasurementType::Interval,
            MeasurementType::Ratio,
            MeasurementType::Absolute,
            MeasurementType::Cyclical { period: 24.0 },
        ] {
            assert!(check_operation(&Attribute::new("a", m), RelationKind::Equality).is_allowed());
        }
    }

    #[test]
    fn check_operation_examples() {
        let ord = Attribute::ordinal("size", ["small", "large"]);
        assert!(!check_operation(&ord, RelationKind::RatioOp).is_allowed());
        let ratio = Attribute::numeric("weight", MeasurementType::Ratio);
        assert!(check_operation(&ratio, RelationKind::Order).is_allowed());
        let nom = Attribute::nominal("habitat");
        assert!(matches!(check_operation(&nom, RelationKind::Order), Permit::Forbidden(_)));
    }

    #[test]
    fn occupation_relations() {
        let occ = occupations();
        // c(doctor) - c(nurse) < c(teacher) - c(engineer)
        let allowed = compare_differences(
            &occ,
            (&cat("doctor"), &cat("nurse")),
            (&cat("teacher"), &cat("engineer")),
        )
        .unwrap();
        assert_eq!(allowed, Comparison::Holds(true));

        // c(doctor) - c(engineer) < c(teacher) - c(engineer)
        let forbidden = compare_differences(
            &occ,
            (&cat("doctor"), &cat("engineer")),
            (&cat("teacher"), &cat("engineer")),
        )
        .unwrap();
        assert!(matches!(forbidden, Comparison::Forbidden(_)));

        let same = compare_differences(
            &occ,
            (&cat("doctor"), &cat("nurse")),
            (&cat("doctor"), &cat("nurse")),
        )
        .unwrap();
        assert_eq!(same, Comparison::Holds(false));
    }

    #[test]
    fn compare_unknown_value_names_it() {
        let err = compare_differences(
            &occupations(),
            (&cat("pilot"), &cat("nurse")),
            (&cat("doctor"), &cat("nurse")),
        )
        .unwrap_err();
        assert_eq!(err.value(), Some("pilot"));
    }

    #[test]
    fn compare_with_missing_is_unknown() {
        let r = compare_differences(
            &occupations(),
            (&Value::Missing, &cat("nurse")),
            (&cat("doctor"), &cat("nurse")),
        )
        .unwrap();
        assert_eq!(r, Comparison::Unknown);
    }

    #[test]
    fn compare_on_plain_nominal_is_forbidden() {
        let r = compare_differences(
            &Attribute::nominal("x"),
            (&cat("a"), &cat("b")),
            (&cat("a"), &cat("c")),
        )
        .unwrap();
        assert!(matches!(r, Comparison::Forbidden(_)));
    }

    #[test]
    fn compare_on_cyclical_uses_short_arc() {
        let az = Attribute::numeric("azimuth", MeasurementType::Cyclical { period: 360.0 });
        let r = compare_differences(
            &az,
            (&Value::Number(1.0), &Value::Number(359.0)),
            (&Value::Number(0.0), &Value::Number(10.0)),
        )
        .unwrap();
        assert_eq!(r, Comparison::Holds(true));
    }

    #[test]
    fn cyclic_difference_examples() {
        assert_eq!(cyclic_difference(1.0, 359.0, 360.0).unwrap(), 2.0);
        assert_eq!(cyclic_difference(42.0, 42.0, 360.0).unwrap(), 0.0);
        assert_eq!(cyclic_difference(90.0, 270.0, 360.0).unwrap(), 180.0);
        assert!(cyclic_difference(f64::NAN, 1.0, 360.0).is_err());
        assert!(cyclic_difference(1.0, f64::INFINITY, 360.0).is_err());
        assert!(cyclic_difference(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn similarity_groups_require_increasing_codes() {
        let bad = SimilarityGroups::new(vec![SimilarityGroup {
            label: "g".into(),
            members: vec![("a".into(), 2), ("b".into(), 1)],
        }]);
        assert!(bad.is_err());
    }

    #[test]
    fn dataset_rejects_ragged_and_nonconforming_rows() {
        let attrs = vec![Attribute::nominal("a"), Attribute::numeric("b", MeasurementType::Ratio)];
        assert!(Dataset::new(attrs.clone(), vec![vec![cat("x")]], None).is_err());
        assert!(Dataset::new(attrs.clone(), vec![vec![Value::Number(1.0), Value::Number(1.0)]], None).is_err());
        assert!(Dataset::new(attrs.clone(), vec![vec![cat("x"), Value::Number(f64::NAN)]], None).is_err());
        assert!(Dataset::new(attrs, vec![vec![cat("x"), Value::Missing]], Some(0)).is_ok());
    }

    #[test]
    fn ordinal_levels_must_match_declared_rank() {
        let a = Attribute::ordinal("size", ["s", "m", "l"]);
        assert!(a.conforms(&Value::level("m", 2)));
        assert!(!a.conforms(&Value::level("m", 1)));
        assert!(!a.conforms(&Value::level("xl", 4)));
        assert_eq!(a.level("l").unwrap(), Value::level("l", 3));
    }

    #[test]
    fn hierarchy_validation_and_levels() {
        let root = HierarchyNode::Group {
            name: "root".into(),
            children: vec![
                HierarchyNode::Group {
                    name: "cap".into(),
                    children: vec![HierarchyNode::Leaf { attr: 0 }, HierarchyNode::Leaf { attr: 1 }],
                },
                HierarchyNode::Leaf { attr: 2 },
            ],
        };
        let h = AttributeHierarchy::new(root.clone(), 1, 3).unwrap();
        assert_eq!(h.depth(), 2);
        assert_eq!(
            h.visible_groups(),
            vec![(Some("cap".into()), vec![0, 1]), (None, vec![2])]
        );
        assert!(AttributeHierarchy::new(root.clone(), 3, 3).is_err());
        assert!(AttributeHierarchy::new(root.clone(), 1, 4).is_err());
        let dup = HierarchyNode::Group {
            name: "r".into(),
            children: vec![HierarchyNode::Leaf { attr: 0 }, HierarchyNode::Leaf { attr: 0 }],
        };
        assert!(AttributeHierarchy::new(dup, 0, 1).is_err());
    }
}
