//! Deterministic SVG output for parallel coordinates with frequency bars.
//!
//! Every coordinate is printed with two decimals, so equal inputs give
//! byte-identical documents.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::coord;
use crate::hyperblock::class_label;
use crate::layout::{AxisLayout, Bar};
use crate::model::Dataset;
use crate::view::{LineWidthMode, ViewBundle};

pub const GREY: &str = "grey";
pub const FRAME: &str = "green";
pub const SEPARATOR: &str = "black";
const NO_CLASS: &str = "steelblue";
/// Class colors in order of sorted class label.
pub const PALETTE: [&str; 10] = [
    "magenta", "blue", "yellow", "orange", "cyan", "brown", "purple", "olive", "teal", "navy",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    #[default]
    LosslessPolylines,
    AggregatedEdges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub axis_spacing: f64,
    pub bar_width: f64,
    pub mode: RenderMode,
    pub show_purity_frames: bool,
    pub frame_threshold: f64,
    /// Widest aggregated edge, in pixels.
    pub max_stroke: f64,
    pub show_report: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            width: 960.0,
            height: 480.0,
            margin: 40.0,
            axis_spacing: 120.0,
            bar_width: 14.0,
            mode: RenderMode::LosslessPolylines,
            show_purity_frames: true,
            frame_threshold: 0.8,
            max_stroke: 12.0,
            show_report: false,
        }
    }
}

impl RenderSpec {
    pub fn validate(&self, axes: usize) -> Result<()> {
        let dims = [self.width, self.height, self.axis_spacing, self.bar_width, self.max_stroke];
        if dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) || self.margin.is_nan() || self.margin < 0.0 {
            return Err(Error::invalid("render dimensions must be positive"));
        }
        if self.axis_spacing * axes as f64 > self.width {
            return Err(Error::invalid(format!(
                "{axes} axes at spacing {} do not fit in width {}",
                self.axis_spacing, self.width
            )));
        }
        if 2.0 * self.margin >= self.height {
            return Err(Error::invalid("margin leaves no room for the plot"));
        }
        Ok(())
    }
}

/// Class colors: configured ones first, the fixed palette for the rest.
pub fn class_colors(classes: &[String], configured: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    let mut next = 0;
    classes
        .iter()
        .map(|c| {
            let color = configured.get(c).cloned().unwrap_or_else(|| {
                let color = PALETTE[next % PALETTE.len()];
                next += 1;
                color.to_string()
            });
            (c.clone(), color)
        })
        .collect()
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Vertical extent of each bar, `(bottom, top)` in SVG y (down is larger).
fn bar_spans(layout: &AxisLayout, bottom: f64, plot_height: f64) -> Vec<(f64, f64)> {
    let mut y = bottom;
    layout
        .bars
        .iter()
        .map(|b| {
            let top = y - b.height * plot_height;
            let span = (y, top);
            y = top;
            span
        })
        .collect()
}

struct Geometry {
    xs: Vec<f64>,
    spans: Vec<Vec<(f64, f64)>>,
}

fn geometry(bundle: &ViewBundle, spec: &RenderSpec) -> Geometry {
    let bottom = spec.height - spec.margin;
    let plot_height = spec.height - 2.0 * spec.margin;
    Geometry {
        xs: (0..bundle.layouts.len())
            .map(|i| spec.margin + i as f64 * spec.axis_spacing)
            .collect(),
        spans: bundle
            .layouts
            .iter()
            .map(|l| bar_spans(l, bottom, plot_height))
            .collect(),
    }
}

fn check_layouts(ds: &Dataset, bundle: &ViewBundle) -> Result<()> {
    for l in &bundle.layouts {
        let ok = l.attr_index < ds.width() && ds.attribute(l.attr_index).name == l.attribute && l.rows == ds.len();
        if !ok {
            return Err(Error::schema(&l.attribute, "layout does not match the dataset"));
        }
    }
    Ok(())
}

fn write_bar(out: &mut String, bar: &Bar, x: f64, span: (f64, f64), spec: &RenderSpec, colors: &BTreeMap<String, String>) {
    let (bottom, top) = span;
    let left = x - spec.bar_width / 2.0;
    let height = bottom - top;
    let mut segments: Vec<(&str, usize)> = Vec::new();
    if bar.per_class.is_empty() {
        segments.push((NO_CLASS, bar.total));
    } else if bar.joined {
        let dom = bar.dominant.as_deref().and_then(|d| colors.get(d)).map_or(NO_CLASS, String::as_str);
        segments.push((dom, bar.dominant_count()));
        segments.push((GREY, bar.grey()));
    } else {
        for (class, n) in &bar.per_class {
            segments.push((colors.get(class).map_or(NO_CLASS, String::as_str), *n));
        }
    }
    let _ = writeln!(out, "<g class=\"bar\" data-group=\"{}\">", escape(&bar.group));
    let mut y = bottom;
    for (color, n) in segments {
        if n == 0 || bar.total == 0 {
            continue;
        }
        let h = height * n as f64 / bar.total as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\"/>",
            coord(left),
            coord(y - h),
            coord(spec.bar_width),
            coord(h)
        );
        y -= h;
    }
    let _ = writeln!(
        out,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{SEPARATOR}\" stroke-width=\"1\"/>",
        coord(left),
        coord(top),
        coord(left + spec.bar_width),
        coord(top)
    );
    if spec.show_purity_frames && !bar.per_class.is_empty() && bar.purity >= spec.frame_threshold {
        let _ = writeln!(
            out,
            "<rect class=\"frame\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{FRAME}\" stroke-width=\"2\"/>",
            coord(left),
            coord(top),
            coord(spec.bar_width),
            coord(height)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"9\">{}</text>",
        coord(left + spec.bar_width + 2.0),
        coord((bottom + top) / 2.0 + 3.0),
        escape(&bar.group)
    );
    out.push_str("</g>\n");
}

/// Vertical position of each row on each axis. Rows with the same displayed
/// values share a slot; distinct rows get distinct slots inside their bar.
fn row_positions(ds: &Dataset, bundle: &ViewBundle, geo: &Geometry) -> (Vec<Vec<Option<f64>>>, Vec<usize>) {
    let cols: Vec<usize> = bundle.layouts.iter().map(|l| l.attr_index).collect();
    let mut ids: BTreeMap<Vec<Option<String>>, usize> = BTreeMap::new();
    let tuple_id: Vec<usize> = (0..ds.len())
        .map(|r| {
            let t: Vec<Option<String>> = cols.iter().map(|&c| ds.value(r, c).label()).collect();
            let next = ids.len();
            *ids.entry(t).or_insert(next)
        })
        .collect();
    let mut multiplicity = alloc::vec![0usize; ids.len()];
    for &t in &tuple_id {
        multiplicity[t] += 1;
    }
    let weights = tuple_id.iter().map(|&t| multiplicity[t]).collect();

    let mut ys = alloc::vec![alloc::vec![None; cols.len()]; ds.len()];
    for (a, layout) in bundle.layouts.iter().enumerate() {
        for (b, bar) in layout.bars.iter().enumerate() {
            let mut slots: BTreeMap<usize, usize> = BTreeMap::new();
            let slot_of: Vec<usize> = bar
                .members
                .iter()
                .map(|&r| {
                    let next = slots.len();
                    *slots.entry(tuple_id[r]).or_insert(next)
                })
                .collect();
            let (bottom, top) = geo.spans[a][b];
            let k = slots.len().max(1) as f64;
            for (&r, s) in bar.members.iter().zip(slot_of) {
                ys[r][a] = Some(bottom - (s as f64 + 0.5) / k * (bottom - top));
            }
        }
    }
    (ys, weights)
}

pub fn render_svg(ds: &Dataset, bundle: &ViewBundle, spec: &RenderSpec) -> Result<String> {
    check_layouts(ds, bundle)?;
    spec.validate(bundle.layouts.len())?;
    let geo = geometry(bundle, spec);
    let classes: Vec<String> = bundle.layouts.first().map(|l| l.classes.clone()).unwrap_or_default();
    let colors = class_colors(&classes, &bundle.config.color_map);
    let reference = bundle.reference.as_ref().map(|r| ds.index_of(r)).transpose()?;
    let line_height = 14.0;
    let panel_height = if spec.show_report { bundle.report.len() as f64 * line_height * 2.0 } else { 0.0 };
    let total_height = spec.height + panel_height;

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = coord(spec.width),
        h = coord(total_height)
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>",
        coord(spec.width),
        coord(total_height)
    );

    let row_color = |r: usize| -> &str {
        match reference {
            Some(rc) => colors.get(&class_label(ds.value(r, rc))).map_or(NO_CLASS, String::as_str),
            None => NO_CLASS,
        }
    };

    out.push_str("<g class=\"lines\" fill=\"none\">\n");
    match spec.mode {
        crate::render::RenderMode::LosslessPolylines => {
            let (ys, weights) = row_positions(ds, bundle, &geo);
            let max_weight = weights.iter().copied().max().unwrap_or(1).max(1) as f64;
            for r in 0..ds.len() {
                let points: Vec<String> = ys[r]
                    .iter()
                    .enumerate()
                    .filter_map(|(a, y)| y.map(|y| format!("{},{}", coord(geo.xs[a]), coord(y))))
                    .collect();
                let width = match bundle.config.line_width_mode {
                    LineWidthMode::Uniform => 1.0,
                    LineWidthMode::FrequencyWeighted => 1.0 + (spec.max_stroke - 1.0) * weights[r] as f64 / max_weight,
                };
                let _ = writeln!(
                    out,
                    "<polyline points=\"{}\" stroke=\"{}\" stroke-width=\"{}\" stroke-opacity=\"0.6\"/>",
                    points.join(" "),
                    row_color(r),
                    coord(width)
                );
            }
        }
        crate::render::RenderMode::AggregatedEdges => {
            let max_count = bundle
                .edges
                .iter()
                .flat_map(|b| b.edges.iter().map(|e| e.count))
                .max()
                .unwrap_or(1)
                .max(1) as f64;
            for (a, bundle_edges) in bundle.edges.iter().enumerate() {
                for e in &bundle_edges.edges {
                    let (lb, lt) = geo.spans[a][e.left];
                    let (rb, rt) = geo.spans[a + 1][e.right];
                    let color = colors.get(&e.class).map_or(NO_CLASS, String::as_str);
                    let _ = writeln!(
                        out,
                        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"{}\" stroke-opacity=\"0.6\"/>",
                        coord(geo.xs[a]),
                        coord((lb + lt) / 2.0),
                        coord(geo.xs[a + 1]),
                        coord((rb + rt) / 2.0),
                        coord(spec.max_stroke * e.count as f64 / max_count)
                    );
                }
            }
        }
    }
    out.push_str("</g>\n");

    for (a, layout) in bundle.layouts.iter().enumerate() {
        let x = geo.xs[a];
        let _ = writeln!(out, "<g class=\"axis\" data-attribute=\"{}\">", escape(&layout.attribute));
        let _ = writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"{SEPARATOR}\" stroke-width=\"1\"/>",
            coord(spec.margin),
            coord(spec.height - spec.margin),
            x = coord(x)
        );
        for (b, bar) in layout.bars.iter().enumerate() {
            write_bar(&mut out, bar, x, geo.spans[a][b], spec, &colors);
        }
        let name = if layout.flipped { format!("{} (flipped)", layout.attribute) } else { layout.attribute.clone() };
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            coord(x),
            coord(spec.height - spec.margin + 16.0),
            escape(&name)
        );
        out.push_str("</g>\n");
    }

    if spec.show_report {
        out.push_str(&render_report_panel(&bundle.report, spec.margin, spec.height + line_height, 90));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Splits at spaces so no line exceeds `width` characters unless a single
/// word does; nothing is dropped.
fn wrap(text: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut line = String::new();
    for word in text.split(' ') {
        if !line.is_empty() && line.chars().count() + 1 + word.chars().count() > width {
            lines.push(core::mem::take(&mut line));
        }
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(word);
    }
    lines.push(line);
    lines
}

/// One `<text>` per statement, in order, wrapped into `<tspan>` lines.
pub fn render_report_panel(statements: &[String], x: f64, y: f64, width_chars: usize) -> String {
    if statements.is_empty() {
        return String::new();
    }
    let line_height = 14.0;
    let mut out = String::from("<g class=\"report\" font-size=\"12\">\n");
    let mut cy = y;
    for s in statements {
        let lines = wrap(s, width_chars.max(1));
        let _ = write!(out, "<text x=\"{}\" y=\"{}\">", coord(x), coord(cy));
        for (i, line) in lines.iter().enumerate() {
            let dy = if i == 0 { 0.0 } else { line_height };
            let _ = write!(out, "<tspan x=\"{}\" dy=\"{}\">{}</tspan>", coord(x), coord(dy), escape(line));
        }
        out.push_str("</text>\n");
        cy += line_height * lines.len() as f64;
    }
    out.push_str("</g>\n");
    out
}
