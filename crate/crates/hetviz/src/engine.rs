//! Pipeline steps shared by the CLI and the HTTP service.

use hetviz_core::hyperblock::{discover_pure_hbs, purity, HyperBlockDoc, PurityStats};
use hetviz_core::render::{render_svg, RenderSpec};
use hetviz_core::rules::{classify, validate_rule, Rule, RuleMetrics};
use hetviz_core::scheme::{apply_scheme, bulk_assign, RawTable};
use hetviz_core::view::{compute_view, SortMode, ViewBundle, ViewConfig};
use hetviz_core::{Dataset, Error, MeasurementType};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::schemefile::SchemeDocument;

/// View overrides as they arrive from query strings and CLI flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default)]
pub struct ViewParams {
    #[serde(rename = "ref")]
    pub reference: Option<String>,
    pub purity: Option<f64>,
    pub minsize: Option<f64>,
    pub small: Option<f64>,
    pub large: Option<f64>,
    pub join: Option<bool>,
    pub relocate: Option<bool>,
    pub filter: Option<bool>,
    /// `frequency`, `purity` or `color:cls1,cls2`.
    pub sort: Option<String>,
    /// Comma-separated attribute names.
    pub flips: Option<String>,
    /// Comma-separated attribute names, left to right.
    pub order: Option<String>,
    pub keep_constant: Option<bool>,
}

fn name_list(text: &str) -> Vec<String> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

impl ViewParams {
    pub fn apply(&self, base: &ViewConfig) -> Result<ViewConfig> {
        let mut cfg = base.clone();
        if let Some(r) = &self.reference {
            cfg.reference = Some(r.clone());
        }
        if let Some(v) = self.purity {
            cfg.purity_threshold = v;
        }
        if let Some(v) = self.minsize {
            cfg.min_block_size = v;
        }
        if let Some(v) = self.small {
            cfg.small_block_threshold = v;
        }
        if let Some(v) = self.large {
            cfg.large_block_threshold = v;
        }
        if let Some(v) = self.join {
            cfg.join_nondominant = v;
        }
        if let Some(v) = self.relocate {
            cfg.relocate_small = v;
        }
        if let Some(v) = self.filter {
            cfg.filter = v;
        }
        if let Some(s) = &self.sort {
            cfg.sort_mode = SortMode::parse(s)?;
        }
        if let Some(f) = &self.flips {
            cfg.flips = name_list(f).into_iter().collect();
        }
        if let Some(o) = &self.order {
            cfg.axis_order = Some(name_list(o));
        }
        if let Some(k) = self.keep_constant {
            cfg.drop_constant = !k;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Scheme for a freshly loaded table: every column nominal with
/// first-appearance codes, `target` (default: the last column) as target.
pub fn default_scheme(raw: &RawTable, target: Option<&str>) -> Result<SchemeDocument> {
    let mut scheme = bulk_assign(raw, MeasurementType::Nominal)?;
    let target = match target {
        Some(t) if raw.header().iter().any(|h| h == t) => Some(t.to_string()),
        Some(t) => return Err(Error::UnknownAttribute(t.to_string()).into()),
        None => raw.header().last().cloned(),
    };
    scheme.target = target;
    Ok(SchemeDocument { scheme, hierarchy: None })
}

pub fn typed_dataset(raw: &RawTable, doc: &SchemeDocument) -> Result<Dataset> {
    Ok(apply_scheme(raw, &doc.scheme)?)
}

/// Report lines as printed by `report`, one per line.
pub fn report_text(bundle: &ViewBundle) -> String {
    let mut out = String::new();
    for line in &bundle.report {
        out.push_str(line);
        out.push('\n');
    }
    out
}

pub fn view(ds: &Dataset, cfg: &ViewConfig) -> Result<ViewBundle> {
    Ok(compute_view(ds, cfg)?)
}

/// Widens the canvas when the axes would not fit.
pub fn fit_spec(spec: &RenderSpec, axes: usize) -> RenderSpec {
    let mut spec = spec.clone();
    let needed = 2.0 * spec.margin + spec.axis_spacing * axes.saturating_sub(1) as f64 + spec.bar_width;
    if spec.width < needed || spec.axis_spacing * axes as f64 > spec.width {
        spec.width = needed.max(spec.axis_spacing * axes as f64);
    }
    spec
}

pub fn render(ds: &Dataset, cfg: &ViewConfig, spec: &RenderSpec) -> Result<String> {
    let bundle = compute_view(ds, cfg)?;
    let spec = fit_spec(spec, bundle.layouts.len());
    Ok(render_svg(ds, &bundle, &spec)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveredBlock {
    pub block: HyperBlockDoc,
    pub purity: PurityStats,
    pub rule: Rule,
}

pub fn discover(ds: &Dataset) -> Result<Vec<DiscoveredBlock>> {
    let blocks = discover_pure_hbs(ds)?;
    blocks
        .iter()
        .map(|hb| {
            Ok(DiscoveredBlock {
                block: HyperBlockDoc::from_block(hb, ds.attributes()),
                purity: purity(hb, ds)?,
                rule: hetviz_core::hyperblock::hb_to_rule(hb, ds.attributes())?,
            })
        })
        .collect()
}

/// Checks the rule against the measurement types, then scores it.
pub fn evaluate_rule(ds: &Dataset, rule: &Rule) -> Result<RuleMetrics> {
    let violations = validate_rule(rule, ds.attributes())?;
    if let Some(v) = violations.first() {
        return Err(Error::Forbidden {
            attribute: v.attribute.clone(),
            reason: v.reason.clone(),
        }
        .into());
    }
    Ok(classify(rule, ds)?.metrics)
}
