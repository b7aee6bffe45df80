//! Coding schemes: turning raw text columns into typed attributes.
//!
//! A [`CodingScheme`] assigns each column a measurement type and optionally
//! groups its values (explicit value groups or numeric intervals) and assigns
//! integer codes. [`apply_scheme`] runs the scheme over a [`RawTable`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::encode::EncoderKind;
use crate::error::{Error, Result};
use crate::fmt::number_label;
use crate::model::{Attribute, Dataset, MeasurementType, SimilarityGroups, Value};

/// Header plus rows of text cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    missing_token: String,
}

impl RawTable {
    pub fn new(header: Vec<String>, rows: Vec<Vec<String>>, missing_token: impl Into<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for h in &header {
            if !seen.insert(h.as_str()) {
                return Err(Error::schema(h, "duplicate header name"));
            }
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != header.len()) {
            return Err(Error::Row {
                row: i + 1,
                message: format!("{} cells under a {}-column header", r.len(), header.len()),
            });
        }
        Ok(RawTable {
            header,
            rows,
            missing_token: missing_token.into(),
        })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn missing_token(&self) -> &str {
        &self.missing_token
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_missing(&self, cell: &str) -> bool {
        cell == self.missing_token
    }

    /// Distinct non-missing cells of a column in first-appearance order.
    pub fn distinct(&self, col: usize) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.rows
            .iter()
            .map(|r| r[col].as_str())
            .filter(|c| !self.is_missing(c) && seen.insert(*c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGroup {
    pub label: String,
    pub code: i64,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefaultGroup {
    pub label: String,
    pub code: i64,
}

/// `[start, start + length)`; the last interval of a spec is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalGroup {
    pub start: f64,
    pub length: f64,
    pub code: i64,
}

impl IntervalGroup {
    pub fn end(&self) -> f64 {
        self.start + self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GroupSpec {
    Values {
        groups: Vec<ValueGroup>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<DefaultGroup>,
    },
    Intervals { intervals: Vec<IntervalGroup> },
}

impl GroupSpec {
    pub fn intervals(intervals: Vec<IntervalGroup>) -> Result<Self> {
        let spec = GroupSpec::Intervals { intervals };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroupSpec::Values { groups, default } => {
                let mut seen = BTreeSet::new();
                for g in groups {
                    for v in &g.values {
                        if !seen.insert(v.as_str()) {
                            return Err(Error::invalid(format!("value `{v}` is in more than one group")));
                        }
                    }
                }
                let mut labels: BTreeMap<&str, i64> = BTreeMap::new();
                let all = groups
                    .iter()
                    .map(|g| (g.label.as_str(), g.code))
                    .chain(default.iter().map(|d| (d.label.as_str(), d.code)));
                for (label, code) in all {
                    if labels.insert(label, code).is_some_and(|c| c != code) {
                        return Err(Error::invalid(format!("group `{label}` has two codes")));
                    }
                }
                Ok(())
            }
            GroupSpec::Intervals { intervals } => {
                if intervals.is_empty() {
                    return Err(Error::invalid("interval grouping without intervals"));
                }
                for iv in intervals {
                    if !(iv.start.is_finite() && iv.length.is_finite() && iv.length > 0.0) {
                        return Err(Error::invalid(format!(
                            "interval at {} needs a finite positive length",
                            iv.start
                        )));
                    }
                }
                for w in intervals.windows(2) {
                    if w[1].start < w[0].end() {
                        return Err(Error::invalid(format!(
                            "intervals starting at {} and {} overlap or are out of order",
                            w[0].start, w[1].start
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Group label and code for a raw cell.
    fn locate(&self, cell: &str) -> Option<(String, i64)> {
        match self {
            GroupSpec::Values { groups, default } => groups
                .iter()
                .find(|g| g.values.iter().any(|v| v == cell))
                .map(|g| (g.label.clone(), g.code))
                .or_else(|| default.as_ref().map(|d| (d.label.clone(), d.code))),
            GroupSpec::Intervals { intervals } => {
                let x: f64 = cell.trim().parse().ok()?;
                interval_index(intervals, x).map(|k| (interval_label(intervals, k), intervals[k].code))
            }
        }
    }

    /// (label, code) pairs in code order.
    fn labels(&self) -> Vec<(String, i64)> {
        let mut out: Vec<(String, i64)> = match self {
            GroupSpec::Values { groups, default } => groups
                .iter()
                .map(|g| (g.label.clone(), g.code))
                .chain(default.iter().map(|d| (d.label.clone(), d.code)))
                .collect(),
            GroupSpec::Intervals { intervals } => (0..intervals.len())
                .map(|k| (interval_label(intervals, k), intervals[k].code))
                .collect(),
        };
        let mut seen = BTreeSet::new();
        out.retain(|(l, _)| seen.insert(l.clone()));
        out.sort_by_key(|(_, c)| *c);
        out
    }
}

pub fn interval_index(intervals: &[IntervalGroup], x: f64) -> Option<usize> {
    let last = intervals.len().checked_sub(1)?;
    intervals.iter().enumerate().position(|(k, iv)| {
        iv.start <= x && (x < iv.end() || (k == last && x <= iv.end()))
    })
}

pub fn interval_label(intervals: &[IntervalGroup], k: usize) -> String {
    let iv = &intervals[k];
    let close = if k + 1 == intervals.len() { ']' } else { ')' };
    format!("[{},{}{close}", number_label(iv.start), number_label(iv.end()))
}

/// Consecutive intervals of width `length` from `start` covering every value.
/// Codes run 1, 2, ...; the last interval is closed on the right.
pub fn generate_interval_groups(values: &[f64], start: f64, length: f64) -> Result<GroupSpec> {
    if !(length.is_finite() && length > 0.0 && start.is_finite()) {
        return Err(Error::invalid("interval length must be finite and positive"));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite value {bad}")));
    }
    if let Some(low) = values.iter().find(|v| **v < start) {
        return Err(Error::invalid(format!("value {low} lies below the first interval start {start}")));
    }
    let max = values.iter().copied().fold(start, f64::max);
    let mut count = libm::ceil((max - start) / length).max(1.0) as usize;
    while start + count as f64 * length < max {
        count += 1;
    }
    let bounds: Vec<f64> = (0..=count).map(|k| start + k as f64 * length).collect();
    let intervals = bounds
        .windows(2)
        .enumerate()
        .map(|(k, w)| IntervalGroup {
            start: w[0],
            length: w[1] - w[0],
            code: k as i64 + 1,
        })
        .collect();
    GroupSpec::intervals(intervals)
}

/// Splits the observed range into `count` equal-width intervals.
pub fn split_into_groups(values: &[f64], count: usize) -> Result<GroupSpec> {
    if count == 0 {
        return Err(Error::invalid("cannot split into zero groups"));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::invalid("no finite values to split"));
    }
    if min == max {
        return generate_interval_groups(values, min, 1.0);
    }
    let width = (max - min) / count as f64;
    let mut bounds: Vec<f64> = (0..count).map(|k| min + k as f64 * width).collect();
    bounds.push(max);
    let intervals = bounds
        .windows(2)
        .enumerate()
        .map(|(k, w)| IntervalGroup {
            start: w[0],
            length: w[1] - w[0],
            code: k as i64 + 1,
        })
        .collect();
    GroupSpec::intervals(intervals)
}

/// How one column is typed and coded.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeEntry {
    pub name: String,
    pub mtype: MeasurementType,
    pub encoder: Option<EncoderKind>,
    pub order: Option<Vec<String>>,
    pub group: Option<GroupSpec>,
    pub codes: Option<BTreeMap<String, i64>>,
    pub keep_original_values: bool,
    /// Several values may share a code.
    pub lossy: bool,
    pub modality: Option<String>,
    pub similarity: Option<SimilarityGroups>,
    pub needs_review: bool,
}

impl SchemeEntry {
    pub fn new(name: impl Into<String>, mtype: MeasurementType) -> Self {
        SchemeEntry {
            name: name.into(),
            mtype,
            encoder: None,
            order: None,
            group: None,
            codes: None,
            keep_original_values: false,
            lossy: false,
            modality: None,
            similarity: None,
            needs_review: false,
        }
    }

    pub fn with_codes<S: Into<String>>(mut self, codes: impl IntoIterator<Item = (S, i64)>) -> Self {
        self.codes = Some(codes.into_iter().map(|(k, v)| (k.into(), v)).collect());
        self
    }

    pub fn with_group(mut self, group: GroupSpec) -> Self {
        self.group = Some(group);
        self
    }

    pub fn with_order<S: Into<String>>(mut self, order: impl IntoIterator<Item = S>) -> Self {
        self.order = Some(order.into_iter().map(Into::into).collect());
        self
    }

    pub fn keeping_originals(mut self) -> Self {
        self.keep_original_values = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(codes) = &self.codes
            && !self.lossy {
                let mut seen: BTreeMap<i64, &str> = BTreeMap::new();
                for (v, c) in codes {
                    if let Some(other) = seen.insert(*c, v) {
                        return Err(Error::schema(
                            &self.name,
                            format!("values `{other}` and `{v}` share code {c}; mark the entry lossy to allow it"),
                        ));
                    }
                }
            }
        if let Some(g) = &self.group {
            g.validate().map_err(|e| Error::schema(&self.name, e.to_string()))?;
        }
        if let Some(order) = &self.order {
            let distinct: BTreeSet<_> = order.iter().collect();
            if distinct.len() != order.len() {
                return Err(Error::schema(&self.name, "declared order repeats a value"));
            }
        }
        if let MeasurementType::Cyclical { period } = self.mtype {
            MeasurementType::cyclical(period).map_err(|e| Error::schema(&self.name, e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CodingScheme {
    pub entries: Vec<SchemeEntry>,
    /// Type for columns without an entry.
    pub default_mtype: Option<MeasurementType>,
    pub target: Option<String>,
}

impl CodingScheme {
    pub fn entry(&self, name: &str) -> Option<&SchemeEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn entry_mut(&mut self, name: &str) -> Option<&mut SchemeEntry> {
        self.entries.iter_mut().find(|e| e.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.name.as_str()) {
                return Err(Error::schema(&e.name, "attribute listed twice in the scheme"));
            }
            e.validate()?;
        }
        Ok(())
    }

    /// Label-to-code map an attribute ends up with after [`apply_scheme`]:
    /// explicit codes, else group codes.
    pub fn code_map(&self, name: &str) -> Option<BTreeMap<String, i64>> {
        let e = self.entry(name)?;
        if let Some(c) = &e.codes {
            return Some(c.clone());
        }
        e.group.as_ref().map(|g| g.labels().into_iter().collect())
    }
}

/// Types, groups and codes every column of `raw` per `scheme`.
pub fn apply_scheme(raw: &RawTable, scheme: &CodingScheme) -> Result<Dataset> {
    scheme.validate()?;
    let mut attributes = Vec::with_capacity(raw.header().len());
    let mut columns: Vec<Vec<Value>> = Vec::with_capacity(raw.header().len());
    let mut originals = Vec::new();

    for (col, name) in raw.header().iter().enumerate() {
        let fallback;
        let entry = match scheme.entry(name) {
            Some(e) => e,
            None => {
                let mtype = scheme
                    .default_mtype
                    .ok_or_else(|| Error::schema(name, "no scheme entry and no default type"))?;
                fallback = SchemeEntry::new(name.clone(), mtype);
                &fallback
            }
        };
        let (attr, values) = code_column(raw, col, entry)?;
        if entry.keep_original_values {
            let texts = raw
                .rows()
                .iter()
                .map(|r| (!raw.is_missing(&r[col])).then(|| r[col].clone()))
                .collect();
            originals.push((col, texts));
        }
        attributes.push(attr);
        columns.push(values);
    }

    let target = match &scheme.target {
        Some(t) => Some(
            raw.header()
                .iter()
                .position(|h| h == t)
                .ok_or_else(|| Error::UnknownAttribute(t.clone()))?,
        ),
        None => None,
    };

    let rows = (0..raw.len())
        .map(|r| columns.iter().map(|c| c[r].clone()).collect())
        .collect();
    let mut ds = Dataset::new(attributes, rows, target)?;
    for (col, texts) in originals {
        ds.set_originals(col, texts)?;
    }
    Ok(ds)
}

fn code_column(raw: &RawTable, col: usize, entry: &SchemeEntry) -> Result<(Attribute, Vec<Value>)> {
    let name = entry.name.as_str();
    let uncoded = |value: &str| Error::Uncoded {
        attribute: name.to_string(),
        value: value.to_string(),
    };

    // grouping: cell -> (label, group code)
    let mut labelled: Vec<Option<(String, Option<i64>)>> = Vec::with_capacity(raw.len());
    for row in raw.rows() {
        let cell = row[col].as_str();
        if raw.is_missing(cell) {
            labelled.push(None);
            continue;
        }
        let item = match &entry.group {
            Some(g) => {
                let (label, code) = g.locate(cell).ok_or_else(|| uncoded(cell))?;
                (label, Some(code))
            }
            None => (cell.to_string(), None),
        };
        labelled.push(Some(item));
    }

    let explicit = entry.codes.as_ref();
    let code_for = |label: &str, group_code: Option<i64>| -> Result<Option<i64>> {
        match explicit {
            Some(codes) => codes.get(label).copied().map(Some).ok_or_else(|| uncoded(label)),
            None => Ok(group_code),
        }
    };

    let mut attr = Attribute::new(name, entry.mtype);
    attr.modality = entry.modality.clone();
    attr.similarity_groups = entry.similarity.clone();
    attr.needs_review = entry.needs_review;

    let mut code_map: BTreeMap<String, f64> = BTreeMap::new();
    let mut values = Vec::with_capacity(raw.len());

    match entry.mtype {
        MeasurementType::Nominal => {
            let mut next_label_code = 1i64;
            for item in &labelled {
                let Some((label, group_code)) = item else {
                    values.push(Value::Missing);
                    continue;
                };
                let code = match code_for(label, *group_code)? {
                    Some(c) => Some(c),
                    None if entry.encoder == Some(EncoderKind::Label) => {
                        if code_map.contains_key(label) {
                            None
                        } else {
                            next_label_code += 1;
                            Some(next_label_code - 1)
                        }
                    }
                    None => None,
                };
                if let Some(c) = code {
                    code_map.insert(label.clone(), c as f64);
                }
                values.push(Value::Category(label.clone()));
            }
        }
        MeasurementType::Ordinal => {
            let order = match &entry.order {
                Some(o) => o.clone(),
                None => {
                    let mut distinct: Vec<(String, Option<i64>)> = Vec::new();
                    let mut seen = BTreeSet::new();
                    for (label, gc) in labelled.iter().flatten() {
                        if seen.insert(label.clone()) {
                            distinct.push((label.clone(), code_for(label, *gc)?));
                        }
                    }
                    if distinct.iter().all(|(_, c)| c.is_some()) {
                        distinct.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
                    } else {
                        distinct.sort_by(|a, b| a.0.cmp(&b.0));
                        attr.needs_review = true;
                    }
                    distinct.into_iter().map(|(l, _)| l).collect()
                }
            };
            attr.declared_order = Some(order);
            for item in &labelled {
                let Some((label, group_code)) = item else {
                    values.push(Value::Missing);
                    continue;
                };
                let rank = attr.rank_of(label).ok_or_else(|| uncoded(label))?;
                if let Some(c) = code_for(label, *group_code)? {
                    code_map.insert(label.clone(), c as f64);
                }
                values.push(Value::Level {
                    symbol: label.clone(),
                    rank,
                });
            }
        }
        _ => {
            for item in &labelled {
                let Some((label, group_code)) = item else {
                    values.push(Value::Missing);
                    continue;
                };
                let x = match code_for(label, *group_code)? {
                    Some(c) => c as f64,
                    None => label
                        .trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| uncoded(label))?,
                };
                values.push(Value::Number(x));
            }
        }
    }

    if !code_map.is_empty() || explicit.is_some() {
        attr.codes = Some(code_map);
    }
    Ok((attr, values))
}

/// "All Nominal" / "All Ordinal": every column gets `kind` and integer codes
/// 1..n over its distinct values. Nominal codes follow first appearance;
/// ordinal order defaults to lexical order and is flagged for review.
pub fn bulk_assign(raw: &RawTable, kind: MeasurementType) -> Result<CodingScheme> {
    if !matches!(kind, MeasurementType::Nominal | MeasurementType::Ordinal) {
        return Err(Error::invalid("bulk assignment is only for nominal or ordinal types"));
    }
    let entries = raw
        .header()
        .iter()
        .enumerate()
        .map(|(col, name)| {
            let mut values: Vec<String> = raw.distinct(col).into_iter().map(String::from).collect();
            let mut entry = SchemeEntry::new(name.clone(), kind);
            if kind == MeasurementType::Ordinal {
                values.sort();
                entry.order = Some(values.clone());
                entry.needs_review = true;
                entry.encoder = Some(EncoderKind::Ordinal);
            } else {
                entry.encoder = Some(EncoderKind::Label);
            }
            entry.codes = Some(values.into_iter().zip(1i64..).collect());
            entry
        })
        .collect();
    Ok(CodingScheme {
        entries,
        default_mtype: None,
        target: None,
    })
}

/// Removes attributes whose column holds at most one distinct non-missing
/// value. The target attribute is always kept.
pub fn drop_constant_attributes(ds: &Dataset) -> (Dataset, Vec<String>) {
    let mut keep = Vec::new();
    let mut removed = Vec::new();
    for col in 0..ds.width() {
        let mut first: Option<&Value> = None;
        let mut constant = true;
        for v in ds.column(col).filter(|v| !v.is_missing()) {
            match first {
                None => first = Some(v),
                Some(f) if f != v => {
                    constant = false;
                    break;
                }
                _ => {}
            }
        }
        if constant && ds.target() != Some(col) {
            removed.push(ds.attribute(col).name.clone());
        } else {
            keep.push(col);
        }
    }
    (ds.select(&keep), removed)
}

fn rescale(x: f64, min: f64, max: f64) -> f64 {
    if max > min { (x - min) / (max - min) } else { 0.5 }
}

/// Min-max scales every numeric or coded attribute to `[0, 1]`; constant
/// columns map to 0.5. Uncoded nominal attributes are left as they are.
pub fn normalize_unit_interval(ds: &Dataset) -> Dataset {
    let mut out = ds.clone();
    for col in 0..ds.width() {
        let attr = ds.attribute(col);
        if attr.mtype.is_numeric() {
            let nums: Vec<f64> = ds.column(col).filter_map(Value::as_number).collect();
            let min = nums.iter().copied().fold(f64::INFINITY, f64::min);
            let max = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for row in out.rows_mut() {
                if let Value::Number(x) = &mut row[col] {
                    *x = rescale(*x, min, max);
                }
            }
            if let Some(codes) = &mut out.attribute_mut(col).codes {
                for c in codes.values_mut() {
                    *c = rescale(*c, min, max);
                }
            }
            out.attribute_mut(col).normalized = true;
            continue;
        }
        let codes: Option<BTreeMap<String, f64>> = match (&attr.codes, &attr.declared_order) {
            (Some(c), _) => Some(c.clone()),
            (None, Some(order)) => Some(
                order
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.clone(), i as f64 + 1.0))
                    .collect(),
            ),
            (None, None) => None,
        };
        let Some(codes) = codes else { continue };
        let min = codes.values().copied().fold(f64::INFINITY, f64::min);
        let max = codes.values().copied().fold(f64::NEG_INFINITY, f64::max);
        let a = out.attribute_mut(col);
        a.codes = Some(codes.into_iter().map(|(k, c)| (k, rescale(c, min, max))).collect());
        a.normalized = true;
    }
    out
}

/// `x -> 1 - x` over a normalized attribute's codes.
pub fn flip_attribute(ds: &Dataset, col: usize) -> Result<Vec<Option<f64>>> {
    let attr = ds.attribute(col);
    if !attr.normalized {
        return Err(Error::schema(&attr.name, "flipping needs an attribute normalized to [0, 1]"));
    }
    Ok((0..ds.len()).map(|r| ds.code(r, col).map(|x| 1.0 - x)).collect())
}

/// Rows as a raw table, for tests and round trips.
pub fn raw_from_rows(header: &[&str], rows: &[&[&str]]) -> Result<RawTable> {
    RawTable::new(
        header.iter().map(|h| h.to_string()).collect(),
        rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect(),
        "?",
    )
}
