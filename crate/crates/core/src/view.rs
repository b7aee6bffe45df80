//! The layout pipeline: reference layouts, joining, relocation, sorting,
//! flipping, the report, and optional purity filtering.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{
    edge_weights, filter_by_purity, flip_layout, frequency_layout, join_nondominant, linguistic_report,
    reference_layout, relocate_small_blocks, sort_axes, sort_bars_by_color, AxisLayout, EdgeBundle, ReportOptions,
    Residual,
};
use crate::model::Dataset;
use crate::scheme::drop_constant_attributes;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode", content = "priority")]
pub enum SortMode {
    /// Bars by descending frequency; axes in configured order.
    #[default]
    FrequencyDesc,
    /// Axes by number of pure blocks.
    Purity,
    /// Bars grouped by dominant class, first listed class on top.
    Color(Vec<String>),
}

impl SortMode {
    /// `frequency`, `purity`, or `color:cls1,cls2`.
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "frequency" | "frequency_desc" => Ok(SortMode::FrequencyDesc),
            "purity" => Ok(SortMode::Purity),
            _ => match text.strip_prefix("color:").or_else(|| text.strip_prefix("color")) {
                Some(rest) => Ok(SortMode::Color(
                    rest.split(',').filter(|s| !s.is_empty()).map(String::from).collect(),
                )),
                None => Err(Error::invalid(format!("unknown sort mode `{text}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LineWidthMode {
    #[default]
    Uniform,
    FrequencyWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewConfig {
    /// Reference attribute name; the dataset target when unset.
    pub reference: Option<String>,
    pub purity_threshold: f64,
    pub min_block_size: f64,
    pub small_block_threshold: f64,
    pub large_block_threshold: f64,
    pub join_nondominant: bool,
    pub relocate_small: bool,
    /// Hide bars below the purity or size thresholds.
    pub filter: bool,
    pub sort_mode: SortMode,
    /// Attribute names, left to right; unlisted axes follow in dataset order.
    pub axis_order: Option<Vec<String>>,
    pub flips: BTreeSet<String>,
    pub line_width_mode: LineWidthMode,
    pub color_map: BTreeMap<String, String>,
    /// Leave out attributes with a single value.
    pub drop_constant: bool,
}

impl Default for ViewConfig {
    fn default() -> Self {
        ViewConfig {
            reference: None,
            purity_threshold: 0.8,
            min_block_size: 0.1,
            small_block_threshold: 0.2,
            large_block_threshold: 0.5,
            join_nondominant: false,
            relocate_small: true,
            filter: false,
            sort_mode: SortMode::FrequencyDesc,
            axis_order: None,
            flips: BTreeSet::new(),
            line_width_mode: LineWidthMode::Uniform,
            color_map: BTreeMap::new(),
            drop_constant: true,
        }
    }
}

impl ViewConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("purity", self.purity_threshold),
            ("min block size", self.min_block_size),
            ("small block threshold", self.small_block_threshold),
            ("large block threshold", self.large_block_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            purity_threshold: self.purity_threshold,
            min_size: self.min_block_size,
            small_block: self.small_block_threshold,
            large_block: self.large_block_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewBundle {
    pub config: ViewConfig,
    pub rows: usize,
    pub reference: Option<String>,
    /// Axes left to right.
    pub layouts: Vec<AxisLayout>,
    pub edges: Vec<EdgeBundle>,
    pub residuals: Vec<Residual>,
    pub report: Vec<String>,
    /// Attributes left out because they hold a single value.
    pub dropped: Vec<String>,
}

impl ViewBundle {
    pub fn axis_names(&self) -> Vec<&str> {
        self.layouts.iter().map(|l| l.attribute.as_str()).collect()
    }
}

/// Runs the full layout pipeline. Layout `attr_index` fields refer to `ds`.
pub fn compute_view(ds: &Dataset, config: &ViewConfig) -> Result<ViewBundle> {
    config.validate()?;
    let reference = match &config.reference {
        Some(name) => Some(ds.index_of(name)?),
        None => ds.target(),
    };
    let dropped = if config.drop_constant {
        drop_constant_attributes(ds).1
    } else {
        Vec::new()
    };
    for name in config.flips.iter().chain(config.axis_order.iter().flatten()) {
        ds.index_of(name)?;
    }

    let mut axes: Vec<usize> = (0..ds.width())
        .filter(|&c| Some(c) != reference && !dropped.contains(&ds.attribute(c).name))
        .collect();
    if let Some(order) = &config.axis_order {
        let pos = |c: &usize| {
            let name = &ds.attribute(*c).name;
            order.iter().position(|o| o == name).unwrap_or(order.len())
        };
        axes.sort_by_key(pos);
    }

    let mut layouts = Vec::with_capacity(axes.len());
    for &col in &axes {
        let mut l = match reference {
            Some(rc) => reference_layout(ds, col, rc)?,
            None => frequency_layout(ds, col),
        };
        if config.join_nondominant && reference.is_some() {
            l = join_nondominant(&l);
        }
        if config.relocate_small {
            l = relocate_small_blocks(&l, config.small_block_threshold);
        }
        if let SortMode::Color(priority) = &config.sort_mode {
            l = sort_bars_by_color(&l, priority)?;
        }
        if config.flips.contains(&l.attribute) {
            l = flip_layout(&l);
        }
        layouts.push(l);
    }

    if config.sort_mode == SortMode::Purity {
        let order = sort_axes(&layouts, config.purity_threshold, config.min_block_size);
        let mut sorted: Vec<Option<AxisLayout>> = layouts.into_iter().map(Some).collect();
        layouts = order.into_iter().map(|i| sorted[i].take().expect("permutation")).collect();
    }

    let report = linguistic_report(&layouts, &config.report_options());

    let mut residuals = Vec::new();
    if config.filter {
        layouts = layouts
            .into_iter()
            .map(|l| {
                let (kept, residual) = filter_by_purity(&l, config.purity_threshold, config.min_block_size);
                residuals.push(residual);
                kept
            })
            .collect();
    }

    let edges = layouts
        .windows(2)
        .map(|w| edge_weights(ds, reference, &w[0], &w[1]))
        .collect();

    Ok(ViewBundle {
        config: config.clone(),
        rows: ds.len(),
        reference: reference.map(|r| ds.attribute(r).name.clone()),
        layouts,
        edges,
        residuals,
        report,
        dropped,
    })
}
