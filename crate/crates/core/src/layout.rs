//! Frequency bars for parallel-coordinate axes.
//!
//! Bars are listed bottom to top. The base order is descending frequency with
//! ties broken by first appearance; the missing-value bar `?` sits on top.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::percent;
use crate::hyperblock::{class_label, dominant_class, MISSING_LABEL};
use crate::model::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub group: String,
    /// Row indices in the bar, ascending.
    #[serde(skip)]
    pub members: Vec<usize>,
    pub total: usize,
    /// Empty for a frequency-only layout.
    pub per_class: BTreeMap<String, usize>,
    pub dominant: Option<String>,
    pub purity: f64,
    /// `total / rows`.
    pub height: f64,
    /// Non-dominant classes are drawn as one grey block.
    pub joined: bool,
    /// The bar holds the rows whose value is missing.
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub missing: bool,
}

impl Bar {
    fn build(group: String, members: Vec<usize>, classes: Option<&[String]>, rows: usize, missing: bool) -> Self {
        let total = members.len();
        let mut per_class = BTreeMap::new();
        if let Some(classes) = classes {
            for &r in &members {
                *per_class.entry(classes[r].clone()).or_insert(0) += 1;
            }
        }
        let mut bar = Bar {
            group,
            members,
            total,
            per_class,
            dominant: None,
            purity: 1.0,
            height: if rows == 0 { 0.0 } else { total as f64 / rows as f64 },
            joined: false,
            missing,
        };
        bar.refresh(classes.is_some());
        bar
    }

    fn refresh(&mut self, with_classes: bool) {
        if !with_classes {
            return;
        }
        match dominant_class(&self.per_class) {
            Some((c, n)) if self.total > 0 => {
                self.dominant = Some(c.clone());
                self.purity = n as f64 / self.total as f64;
            }
            _ => {
                self.dominant = None;
                self.purity = 0.0;
            }
        }
    }

    pub fn dominant_count(&self) -> usize {
        match &self.dominant {
            Some(d) => self.per_class.get(d).copied().unwrap_or(0),
            None => self.total,
        }
    }

    /// Mass drawn grey once non-dominant classes are joined.
    pub fn grey(&self) -> usize {
        self.total - self.dominant_count()
    }

    /// Purity as an integer percent, halves rounded up.
    pub fn purity_percent(&self) -> usize {
        percent(self.dominant_count(), self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisLayout {
    pub attribute: String,
    pub attr_index: usize,
    /// Reference attribute, when bars carry class counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Reference classes in sorted order.
    #[serde(default)]
    pub classes: Vec<String>,
    pub rows: usize,
    pub bars: Vec<Bar>,
    pub flipped: bool,
}

impl AxisLayout {
    pub fn total(&self) -> usize {
        self.bars.iter().map(|b| b.total).sum()
    }

    /// Bar index of every row; `None` when the row's bar was removed.
    pub fn bar_of_rows(&self) -> Vec<Option<usize>> {
        let mut out = alloc::vec![None; self.rows];
        for (i, bar) in self.bars.iter().enumerate() {
            for &r in &bar.members {
                out[r] = Some(i);
            }
        }
        out
    }
}

fn build_layout(ds: &Dataset, col: usize, reference: Option<usize>) -> AxisLayout {
    let rows = ds.len();
    let classes: Option<Vec<String>> = reference.map(|rc| ds.column(rc).map(class_label).collect());
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut missing = Vec::new();
    for (r, v) in ds.column(col).enumerate() {
        match v.label() {
            None => missing.push(r),
            Some(l) => match index.get(&l) {
                Some(&i) => groups[i].1.push(r),
                None => {
                    index.insert(l.clone(), groups.len());
                    groups.push((l, alloc::vec![r]));
                }
            },
        }
    }
    // stable: ties keep first-appearance order
    groups.sort_by_key(|g| core::cmp::Reverse(g.1.len()));
    let cls = classes.as_deref();
    let mut bars: Vec<Bar> = groups
        .into_iter()
        .map(|(g, m)| Bar::build(g, m, cls, rows, false))
        .collect();
    if !missing.is_empty() {
        bars.push(Bar::build(MISSING_LABEL.to_string(), missing, cls, rows, true));
    }
    let mut class_list: Vec<String> = classes.unwrap_or_default();
    class_list.sort();
    class_list.dedup();
    AxisLayout {
        attribute: ds.attribute(col).name.clone(),
        attr_index: col,
        reference: reference.map(|rc| ds.attribute(rc).name.clone()),
        classes: class_list,
        rows,
        bars,
        flipped: false,
    }
}

/// One bar per distinct value, tallest frequency at the bottom.
pub fn frequency_layout(ds: &Dataset, col: usize) -> AxisLayout {
    build_layout(ds, col, None)
}

/// Frequency bars with per-class counts of a reference attribute.
pub fn reference_layout(ds: &Dataset, col: usize, reference: usize) -> Result<AxisLayout> {
    let r = ds.attribute(reference);
    if r.mtype.is_numeric() {
        return Err(Error::schema(
            &r.name,
            "a numeric reference attribute must be grouped into intervals first",
        ));
    }
    Ok(build_layout(ds, col, Some(reference)))
}

pub fn join_nondominant(layout: &AxisLayout) -> AxisLayout {
    let mut out = layout.clone();
    for b in &mut out.bars {
        b.joined = true;
    }
    out
}

/// Bars removed by [`filter_by_purity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub attribute: String,
    pub bars: Vec<Bar>,
    pub total: usize,
}

/// Keeps bars with `purity >= threshold` and `height >= min_size`.
pub fn filter_by_purity(layout: &AxisLayout, threshold: f64, min_size: f64) -> (AxisLayout, Residual) {
    let mut kept = layout.clone();
    let (keep, removed): (Vec<Bar>, Vec<Bar>) = layout
        .bars
        .iter()
        .cloned()
        .partition(|b| b.purity >= threshold && b.height >= min_size);
    kept.bars = keep;
    let residual = Residual {
        attribute: layout.attribute.clone(),
        total: removed.iter().map(|b| b.total).sum(),
        bars: removed,
    };
    (kept, residual)
}

/// Moves bars with `height < threshold` above the rest; both parts keep
/// their relative order.
pub fn relocate_small_blocks(layout: &AxisLayout, threshold: f64) -> AxisLayout {
    let mut out = layout.clone();
    let (large, small): (Vec<Bar>, Vec<Bar>) = layout.bars.iter().cloned().partition(|b| b.height >= threshold);
    out.bars = large;
    out.bars.extend(small);
    out
}

/// Replaces all bars with `height < threshold` by one bar on top.
pub fn merge_small_blocks(layout: &AxisLayout, threshold: f64, label: &str) -> AxisLayout {
    let mut out = layout.clone();
    let (large, small): (Vec<Bar>, Vec<Bar>) = layout.bars.iter().cloned().partition(|b| b.height >= threshold);
    out.bars = large;
    if small.is_empty() {
        return out;
    }
    let with_classes = layout.reference.is_some();
    let mut members: Vec<usize> = small.iter().flat_map(|b| b.members.iter().copied()).collect();
    members.sort_unstable();
    let mut per_class: BTreeMap<String, usize> = BTreeMap::new();
    for b in &small {
        for (c, n) in &b.per_class {
            *per_class.entry(c.clone()).or_insert(0) += n;
        }
    }
    let total = members.len();
    let mut merged = Bar {
        group: label.to_string(),
        members,
        total,
        per_class,
        dominant: None,
        purity: 1.0,
        height: if layout.rows == 0 { 0.0 } else { total as f64 / layout.rows as f64 },
        joined: small.iter().any(|b| b.joined),
        missing: false,
    };
    merged.refresh(with_classes);
    out.bars.push(merged);
    out
}

/// Groups bars by dominant class: the first priority class ends up on top,
/// then the next one below it; bars of other classes stay at the bottom.
pub fn sort_bars_by_color(layout: &AxisLayout, priority: &[String]) -> Result<AxisLayout> {
    if let Some(bad) = priority.iter().find(|p| !layout.classes.contains(p)) {
        return Err(Error::UnknownValue {
            attribute: layout.reference.clone().unwrap_or_default(),
            value: bad.clone(),
        });
    }
    let rank = |b: &Bar| {
        b.dominant
            .as_ref()
            .and_then(|d| priority.iter().position(|p| p == d))
            .map_or(0, |i| priority.len() - i)
    };
    let mut out = layout.clone();
    out.bars.sort_by_key(rank);
    Ok(out)
}

/// Mirrors the bar order; the missing-value bar stays on top.
pub fn flip_layout(layout: &AxisLayout) -> AxisLayout {
    let mut out = layout.clone();
    let slots: Vec<usize> = (0..out.bars.len()).filter(|&i| !out.bars[i].missing).collect();
    let mut valued: Vec<Bar> = slots.iter().map(|&i| out.bars[i].clone()).collect();
    valued.reverse();
    for (slot, bar) in slots.into_iter().zip(valued) {
        out.bars[slot] = bar;
    }
    out.flipped = !layout.flipped;
    out
}

pub fn qualifying_bars(layout: &AxisLayout, threshold: f64, min_size: f64) -> usize {
    layout
        .bars
        .iter()
        .filter(|b| b.purity >= threshold && b.height >= min_size)
        .count()
}

fn mean_purity(layout: &AxisLayout) -> f64 {
    if layout.bars.is_empty() {
        return 0.0;
    }
    layout.bars.iter().map(|b| b.purity).sum::<f64>() / layout.bars.len() as f64
}

/// Axis permutation: most qualifying bars first, then higher mean purity,
/// then original position.
pub fn sort_axes(layouts: &[AxisLayout], threshold: f64, min_size: f64) -> Vec<usize> {
    let keys: Vec<(usize, f64)> = layouts
        .iter()
        .map(|l| (qualifying_bars(l, threshold, min_size), mean_purity(l)))
        .collect();
    let mut order: Vec<usize> = (0..layouts.len()).collect();
    order.sort_by(|&a, &b| {
        keys[b]
            .0
            .cmp(&keys[a].0)
            .then_with(|| keys[b].1.total_cmp(&keys[a].1))
            .then_with(|| a.cmp(&b))
    });
    order
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub left: usize,
    pub right: usize,
    pub class: String,
    pub count: usize,
}

/// Row counts between the bars of two adjacent axes, per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeBundle {
    pub left_attr: String,
    pub right_attr: String,
    pub edges: Vec<Edge>,
}

/// Class used for edges when no reference attribute is set.
pub const ALL_ROWS: &str = "*";

pub fn edge_weights(ds: &Dataset, reference: Option<usize>, left: &AxisLayout, right: &AxisLayout) -> EdgeBundle {
    let lb = left.bar_of_rows();
    let rb = right.bar_of_rows();
    let mut counts: BTreeMap<(usize, usize, String), usize> = BTreeMap::new();
    for r in 0..ds.len().min(lb.len()).min(rb.len()) {
        if let (Some(a), Some(b)) = (lb[r], rb[r]) {
            let class = reference.map_or_else(|| ALL_ROWS.to_string(), |rc| class_label(ds.value(r, rc)));
            *counts.entry((a, b, class)).or_insert(0) += 1;
        }
    }
    EdgeBundle {
        left_attr: left.attribute.clone(),
        right_attr: right.attribute.clone(),
        edges: counts
            .into_iter()
            .map(|((left, right, class), count)| Edge { left, right, class, count })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportOptions {
    pub purity_threshold: f64,
    /// Bars smaller than this are not described at all.
    pub min_size: f64,
    /// Any described bar below this size earns the small-block sentence.
    pub small_block: f64,
    /// Impure bars at least this large are reported by their frequency.
    pub large_block: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            purity_threshold: 0.8,
            min_size: 0.1,
            small_block: 0.2,
            large_block: 0.5,
        }
    }
}

/// Sentences describing pure, large and small blocks. Block numbers count
/// from 1 at the bottom of each axis.
pub fn linguistic_report(layouts: &[AxisLayout], opts: &ReportOptions) -> Vec<String> {
    let mut out = Vec::new();
    for layout in layouts {
        let mut small = false;
        for (i, bar) in layout.bars.iter().enumerate() {
            if bar.height < opts.min_size || bar.total == 0 {
                continue;
            }
            let block = i + 1;
            if bar.purity >= opts.purity_threshold {
                out.push(format!(
                    "{}, block, {block} has a purity of {}",
                    layout.attribute,
                    bar.purity_percent()
                ));
            } else if bar.height >= opts.large_block {
                out.push(format!(
                    "{}, block, {block} has a total frequency of {}",
                    layout.attribute,
                    percent(bar.total, layout.rows)
                ));
            }
            small |= bar.height < opts.small_block;
        }
        if small {
            out.push(format!("{} has a small frequency block.", layout.attribute));
        }
    }
    out
}
