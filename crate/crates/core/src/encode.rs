//! Numeric encoders for non-numeric attributes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::number_label;
use crate::model::{Attribute, Dataset, MeasurementType, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    OneHot,
    Label,
    Ordinal,
    Frequency,
    MeanTarget,
    ProbRatio,
    JamesStein,
    Hash,
    Wavelength,
}

impl EncoderKind {
    pub const ALL: [EncoderKind; 9] = [
        EncoderKind::OneHot,
        EncoderKind::Label,
        EncoderKind::Ordinal,
        EncoderKind::Frequency,
        EncoderKind::MeanTarget,
        EncoderKind::ProbRatio,
        EncoderKind::JamesStein,
        EncoderKind::Hash,
        EncoderKind::Wavelength,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::OneHot => "one_hot",
            EncoderKind::Label => "label",
            EncoderKind::Ordinal => "ordinal",
            EncoderKind::Frequency => "frequency",
            EncoderKind::MeanTarget => "mean_target",
            EncoderKind::ProbRatio => "prob_ratio",
            EncoderKind::JamesStein => "james_stein",
            EncoderKind::Hash => "hash",
            EncoderKind::Wavelength => "wavelength",
        }
    }

    pub fn needs_target(self) -> bool {
        matches!(self, EncoderKind::MeanTarget | EncoderKind::ProbRatio | EncoderKind::JamesStein)
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EncoderKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown encoder `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub name: String,
    /// One entry per row; `None` where the source value is missing.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingResult {
    pub attribute: String,
    pub encoder: EncoderKind,
    pub columns: Vec<EncodedColumn>,
    /// Code vector per source value (one component per column).
    pub code_map: BTreeMap<String, Vec<f64>>,
    /// Groups of values that received identical codes.
    pub lossy_collisions: Vec<Vec<String>>,
    pub interpretability_note: Option<String>,
    pub result_mtype: MeasurementType,
}

impl EncodingResult {
    fn build(
        ds: &Dataset,
        col: usize,
        encoder: EncoderKind,
        column_names: Vec<String>,
        code_map: BTreeMap<String, Vec<f64>>,
        result_mtype: MeasurementType,
    ) -> Self {
        let keys: Vec<Option<String>> = ds.column(col).map(Value::label).collect();
        let columns = column_names
            .into_iter()
            .enumerate()
            .map(|(j, name)| EncodedColumn {
                name,
                values: keys
                    .iter()
                    .map(|k| k.as_ref().and_then(|k| code_map.get(k)).map(|v| v[j]))
                    .collect(),
            })
            .collect();
        let lossy_collisions = collisions(&code_map);
        EncodingResult {
            attribute: ds.attribute(col).name.clone(),
            encoder,
            columns,
            code_map,
            lossy_collisions,
            interpretability_note: None,
            result_mtype,
        }
    }

    fn note(mut self, text: &str) -> Self {
        self.interpretability_note = Some(text.to_string());
        self
    }

    pub fn is_injective(&self) -> bool {
        self.lossy_collisions.is_empty()
    }
}

/// Values sharing a bit-identical code vector.
fn collisions(code_map: &BTreeMap<String, Vec<f64>>) -> Vec<Vec<String>> {
    let mut by_code: BTreeMap<Vec<u64>, Vec<String>> = BTreeMap::new();
    for (v, code) in code_map {
        let key = code.iter().map(|c| if *c == 0.0 { 0 } else { c.to_bits() }).collect();
        by_code.entry(key).or_default().push(v.clone());
    }
    let mut out: Vec<Vec<String>> = by_code.into_values().filter(|g| g.len() > 1).collect();
    out.sort();
    out
}

fn require_discrete(ds: &Dataset, col: usize, what: &str) -> Result<()> {
    let attr = ds.attribute(col);
    if attr.mtype.is_numeric() {
        return Err(Error::Forbidden {
            attribute: attr.name.clone(),
            reason: format!("{what} encoding needs a nominal or ordinal attribute, not {}", attr.mtype),
        });
    }
    Ok(())
}

/// Distinct labels: declared order for ordinal attributes, first appearance
/// otherwise.
fn domain(ds: &Dataset, col: usize) -> Vec<String> {
    let attr = ds.attribute(col);
    match (&attr.mtype, &attr.declared_order) {
        (MeasurementType::Ordinal, Some(order)) => order.clone(),
        _ => ds.distinct_labels(col),
    }
}

pub fn one_hot(ds: &Dataset, col: usize) -> Result<EncodingResult> {
    require_discrete(ds, col, "one-hot")?;
    let values = domain(ds, col);
    let k = values.len();
    let code_map = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut bits = vec![0.0; k];
            bits[i] = 1.0;
            (v.clone(), bits)
        })
        .collect();
    let name = &ds.attribute(col).name;
    let names = values.iter().map(|v| format!("{name}={v}")).collect();
    Ok(EncodingResult::build(ds, col, EncoderKind::OneHot, names, code_map, MeasurementType::Nominal))
}

pub fn label_encode(ds: &Dataset, col: usize) -> Result<EncodingResult> {
    require_discrete(ds, col, "label")?;
    let code_map = ds
        .distinct_labels(col)
        .into_iter()
        .zip(1..)
        .map(|(v, i)| (v, vec![i as f64]))
        .collect();
    let names = vec![ds.attribute(col).name.clone()];
    Ok(EncodingResult::build(ds, col, EncoderKind::Label, names, code_map, MeasurementType::Nominal)
        .note("label codes impose an arbitrary order and distances; do not use them with distance-based methods"))
}

pub fn ordinal_encode(ds: &Dataset, col: usize) -> Result<EncodingResult> {
    let attr = ds.attribute(col);
    let order = attr
        .declared_order
        .as_ref()
        .filter(|_| attr.mtype == MeasurementType::Ordinal)
        .ok_or_else(|| Error::schema(&attr.name, "ordinal encoding needs a declared order"))?;
    ordinal_encode_with(ds, col, order)
}

/// Codes 1..k along `order`, which must list every observed value.
pub fn ordinal_encode_with(ds: &Dataset, col: usize, order: &[String]) -> Result<EncodingResult> {
    require_discrete(ds, col, "ordinal")?;
    let attr = ds.attribute(col);
    if let Some(v) = ds.distinct_labels(col).into_iter().find(|v| !order.contains(v)) {
        return Err(Error::UnknownValue {
            attribute: attr.name.clone(),
            value: v,
        });
    }
    let code_map = order.iter().zip(1..).map(|(v, i)| (v.clone(), vec![i as f64])).collect();
    let names = vec![attr.name.clone()];
    Ok(EncodingResult::build(ds, col, EncoderKind::Ordinal, names, code_map, MeasurementType::Ordinal))
}

pub fn frequency_encode(ds: &Dataset, col: usize) -> Result<EncodingResult> {
    let n = ds.len() as f64;
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for l in ds.column(col).filter_map(Value::label) {
        *counts.entry(l).or_default() += 1;
    }
    let code_map = counts.into_iter().map(|(v, c)| (v, vec![c as f64 / n])).collect();
    let names = vec![ds.attribute(col).name.clone()];
    Ok(EncodingResult::build(ds, col, EncoderKind::Frequency, names, code_map, MeasurementType::Ratio)
        .note("values with equal frequencies become indistinguishable"))
}

/// Per-value target counts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValueStats {
    pub total: usize,
    pub per_class: BTreeMap<String, usize>,
}

impl ValueStats {
    pub fn count(&self, class: &str) -> usize {
        self.per_class.get(class).copied().unwrap_or(0)
    }

    pub fn frequency(&self, class: &str) -> f64 {
        if self.total == 0 { 0.0 } else { self.count(class) as f64 / self.total as f64 }
    }
}

/// Counts over rows whose target is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetStats {
    pub classes: Vec<String>,
    pub per_value: BTreeMap<String, ValueStats>,
    pub overall: ValueStats,
}

pub fn target_stats(ds: &Dataset, col: usize) -> Result<TargetStats> {
    let target = ds.target().ok_or(Error::NoTarget)?;
    let mut per_value: BTreeMap<String, ValueStats> = BTreeMap::new();
    let mut overall = ValueStats::default();
    let mut classes = BTreeSet::new();
    for row in ds.rows() {
        let Some(class) = row[target].label() else { continue };
        classes.insert(class.clone());
        overall.total += 1;
        *overall.per_class.entry(class.clone()).or_default() += 1;
        if let Some(v) = row[col].label() {
            let s = per_value.entry(v).or_default();
            s.total += 1;
            *s.per_class.entry(class).or_default() += 1;
        }
    }
    Ok(TargetStats {
        classes: classes.into_iter().collect(),
        per_value,
        overall,
    })
}

/// Classes that get a column: the given positive class, the larger-sorted
/// class of a binary target, or every class (one-vs-rest).
fn positive_classes(stats: &TargetStats, positive: Option<&str>) -> Result<Vec<String>> {
    match positive {
        Some(p) => {
            if !stats.classes.iter().any(|c| c == p) {
                return Err(Error::invalid(format!("class `{p}` does not occur in the target")));
            }
            Ok(vec![p.to_string()])
        }
        None if stats.classes.len() <= 2 => Ok(stats.classes.last().cloned().into_iter().collect()),
        None => Ok(stats.classes.clone()),
    }
}

fn target_encode(
    ds: &Dataset,
    col: usize,
    positive: Option<&str>,
    encoder: EncoderKind,
    mut code: impl FnMut(&str, &ValueStats, &str, &TargetStats) -> Result<f64>,
) -> Result<EncodingResult> {
    let stats = target_stats(ds, col)?;
    let classes = positive_classes(&stats, positive)?;
    let mut code_map = BTreeMap::new();
    for (v, s) in &stats.per_value {
        let codes = classes
            .iter()
            .map(|c| code(v, s, c, &stats))
            .collect::<Result<Vec<f64>>>()?;
        code_map.insert(v.clone(), codes);
    }
    let name = &ds.attribute(col).name;
    let names = if classes.len() == 1 {
        vec![name.clone()]
    } else {
        classes.iter().map(|c| format!("{name}|{c}")).collect()
    };
    Ok(EncodingResult::build(ds, col, encoder, names, code_map, MeasurementType::Ratio)
        .note("target statistics replace the values; equal statistics make values indistinguishable"))
}

/// Share of the positive class among rows holding each value.
pub fn mean_target_encode(ds: &Dataset, col: usize, positive: Option<&str>) -> Result<EncodingResult> {
    target_encode(ds, col, positive, EncoderKind::MeanTarget, |_, s, c, _| Ok(s.frequency(c)))
}

/// `(n1 + smoothing) / (n0 + smoothing)`.
pub fn probability_ratio_encode(
    ds: &Dataset,
    col: usize,
    smoothing: f64,
    positive: Option<&str>,
) -> Result<EncodingResult> {
    if !(smoothing.is_finite() && smoothing >= 0.0) {
        return Err(Error::invalid("smoothing must be a non-negative number"));
    }
    let name = ds.attribute(col).name.clone();
    target_encode(ds, col, positive, EncoderKind::ProbRatio, |v, s, c, _| {
        let n1 = s.count(c) as f64;
        let n0 = (s.total - s.count(c)) as f64;
        if n0 + smoothing == 0.0 {
            return Err(Error::Forbidden {
                attribute: name.clone(),
                reason: format!("value `{v}` never occurs outside class `{c}`; the ratio needs smoothing"),
            });
        }
        Ok((n1 + smoothing) / (n0 + smoothing))
    })
}

/// Value mean shrunk toward the global mean with weight `n / (n + shrink)`.
pub fn james_stein_encode(
    ds: &Dataset,
    col: usize,
    shrink: f64,
    positive: Option<&str>,
) -> Result<EncodingResult> {
    if !(shrink.is_finite() && shrink > 0.0) {
        return Err(Error::invalid("shrink must be a positive number"));
    }
    target_encode(ds, col, positive, EncoderKind::JamesStein, |_, s, c, stats| {
        let n = s.total as f64;
        let weight = n / (n + shrink);
        Ok(weight * s.frequency(c) + (1.0 - weight) * stats.overall.frequency(c))
    })
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Signed hash vector of length `dim` for one value.
pub fn hash_vector(value: &str, dim: usize, seed: u64) -> Vec<f64> {
    let h = mix(fnv1a(value.as_bytes()) ^ mix(seed));
    let mut out = vec![0.0; dim];
    if dim > 0 {
        let slot = (h % dim as u64) as usize;
        out[slot] = if h >> 63 == 0 { 1.0 } else { -1.0 };
    }
    out
}

pub fn hash_encode(ds: &Dataset, col: usize, dim: usize, seed: u64) -> Result<EncodingResult> {
    if dim == 0 {
        return Err(Error::invalid("hash dimension must be positive"));
    }
    require_discrete(ds, col, "hash")?;
    let code_map = ds
        .distinct_labels(col)
        .into_iter()
        .map(|v| {
            let code = hash_vector(&v, dim, seed);
            (v, code)
        })
        .collect();
    let name = &ds.attribute(col).name;
    let names = (0..dim).map(|i| format!("{name}#{i}")).collect();
    Ok(EncodingResult::build(ds, col, EncoderKind::Hash, names, code_map, MeasurementType::Ratio)
        .note("hashed coordinates form a new space that may not be interpretable"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorBand {
    pub color: String,
    /// Wavelength interval in nanometres, `[low, high)`.
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    bands: Vec<ColorBand>,
}

impl Palette {
    pub fn new(mut bands: Vec<ColorBand>) -> Result<Self> {
        bands.sort_by(|a, b| a.low.total_cmp(&b.low));
        for b in &bands {
            if !(b.low.is_finite() && b.high.is_finite() && b.low < b.high) {
                return Err(Error::invalid(format!("color `{}` has an empty wavelength interval", b.color)));
            }
        }
        for w in bands.windows(2) {
            if w[1].low < w[0].high {
                return Err(Error::invalid(format!("colors `{}` and `{}` overlap", w[0].color, w[1].color)));
            }
        }
        let names: BTreeSet<_> = bands.iter().map(|b| b.color.as_str()).collect();
        if names.len() != bands.len() {
            return Err(Error::invalid("palette lists a color twice"));
        }
        Ok(Palette { bands })
    }

    /// Visible spectrum, violet to red.
    pub fn visible() -> Self {
        let band = |color: &str, low: f64, high: f64| ColorBand {
            color: color.into(),
            low,
            high,
        };
        Palette {
            bands: vec![
                band("violet", 380.0, 450.0),
                band("blue", 450.0, 495.0),
                band("green", 495.0, 570.0),
                band("yellow", 570.0, 590.0),
                band("orange", 590.0, 620.0),
                band("red", 620.0, 750.0),
            ],
        }
    }

    pub fn bands(&self) -> &[ColorBand] {
        &self.bands
    }

    fn position(&self, color: &str) -> Option<usize> {
        self.bands.iter().position(|b| b.color == color)
    }

    /// Color whose interval holds `nm`; the last interval is closed.
    pub fn color_of(&self, nm: f64) -> Option<&str> {
        let last = self.bands.len().checked_sub(1)?;
        self.bands
            .iter()
            .enumerate()
            .find(|(i, b)| b.low <= nm && (nm < b.high || (*i == last && nm <= b.high)))
            .map(|(_, b)| b.color.as_str())
    }
}

impl Default for Palette {
    fn default() -> Self {
        Palette::visible()
    }
}

/// Observed colors coded 0, 1, ... in wavelength order. Numeric attributes
/// are read as wavelengths and grouped into colors first.
pub fn wavelength_color_encode(ds: &Dataset, col: usize, palette: &Palette) -> Result<EncodingResult> {
    let attr = ds.attribute(col);
    let unmapped = |value: String| Error::UnknownValue {
        attribute: attr.name.clone(),
        value,
    };
    let mut row_colors: Vec<Option<String>> = Vec::with_capacity(ds.len());
    for v in ds.column(col) {
        let color = match v {
            Value::Missing => None,
            Value::Number(nm) => Some(
                palette
                    .color_of(*nm)
                    .ok_or_else(|| unmapped(number_label(*nm)))?
                    .to_string(),
            ),
            other => {
                let s = other.label().unwrap_or_default();
                if palette.position(&s).is_none() {
                    return Err(unmapped(s));
                }
                Some(s)
            }
        };
        row_colors.push(color);
    }
    let mut observed: Vec<usize> = row_colors
        .iter()
        .flatten()
        .filter_map(|c| palette.position(c))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    observed.sort();
    let codes: BTreeMap<String, Vec<f64>> = observed
        .iter()
        .enumerate()
        .map(|(code, &p)| (palette.bands[p].color.clone(), vec![code as f64]))
        .collect();
    let column = EncodedColumn {
        name: attr.name.clone(),
        values: row_colors
            .iter()
            .map(|c| c.as_ref().map(|c| codes[c][0]))
            .collect(),
    };
    Ok(EncodingResult {
        attribute: attr.name.clone(),
        encoder: EncoderKind::Wavelength,
        columns: vec![column],
        lossy_collisions: collisions(&codes),
        code_map: codes,
        interpretability_note: Some(
            "color codes keep wavelength order only; code differences carry no physical meaning".into(),
        ),
        result_mtype: MeasurementType::Ordinal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderParams {
    pub smoothing: f64,
    pub shrink: f64,
    pub dim: usize,
    pub seed: u64,
    pub positive_class: Option<String>,
    pub palette: Option<Palette>,
}

impl Default for EncoderParams {
    fn default() -> Self {
        EncoderParams {
            smoothing: 1.0,
            shrink: 1.0,
            dim: 8,
            seed: 0,
            positive_class: None,
            palette: None,
        }
    }
}

pub fn encode(ds: &Dataset, col: usize, kind: EncoderKind, params: &EncoderParams) -> Result<EncodingResult> {
    let positive = params.positive_class.as_deref();
    match kind {
        EncoderKind::OneHot => one_hot(ds, col),
        EncoderKind::Label => label_encode(ds, col),
        EncoderKind::Ordinal => ordinal_encode(ds, col),
        EncoderKind::Frequency => frequency_encode(ds, col),
        EncoderKind::MeanTarget => mean_target_encode(ds, col, positive),
        EncoderKind::ProbRatio => probability_ratio_encode(ds, col, params.smoothing, positive),
        EncoderKind::JamesStein => james_stein_encode(ds, col, params.shrink, positive),
        EncoderKind::Hash => hash_encode(ds, col, params.dim, params.seed),
        EncoderKind::Wavelength => {
            let palette = params.palette.clone().unwrap_or_default();
            wavelength_color_encode(ds, col, &palette)
        }
    }
}

/// Replaces column `col` with the encoded columns.
///
/// Numeric results become numeric attributes. A single nominal or ordinal
/// column keeps the original symbols and installs the codes; multi-column
/// nominal results (one-hot) become `0`/`1` flag attributes.
pub fn encoded_dataset(ds: &Dataset, col: usize, result: &EncodingResult) -> Result<Dataset> {
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut columns: Vec<Vec<Value>> = Vec::new();
    for c in 0..ds.width() {
        if c != col {
            attributes.push(ds.attribute(c).clone());
            columns.push(ds.column(c).cloned().collect());
            continue;
        }
        let src = ds.attribute(c);
        let single = result.columns.len() == 1;
        match result.result_mtype {
            m if m.is_numeric() => {
                for ec in &result.columns {
                    let mut a = Attribute::numeric(ec.name.clone(), m);
                    a.modality = src.modality.clone();
                    attributes.push(a);
                    columns.push(ec.values.iter().map(|v| v.map_or(Value::Missing, Value::Number)).collect());
                }
            }
            MeasurementType::Ordinal if single => {
                let mut order: Vec<(&String, f64)> = result.code_map.iter().map(|(k, v)| (k, v[0])).collect();
                order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
                let mut a = Attribute::ordinal(src.name.clone(), order.iter().map(|(k, _)| (*k).clone()));
                a.codes = Some(order.iter().map(|(k, c)| ((*k).clone(), *c)).collect());
                let mut values = Vec::with_capacity(ds.len());
                for (v, code) in ds.column(c).zip(&result.columns[0].values) {
                    values.push(match (v, code) {
                        (_, None) => Value::Missing,
                        (Value::Number(_), Some(code)) => {
                            let key = result
                                .code_map
                                .iter()
                                .find(|(_, cv)| cv[0] == *code)
                                .map(|(k, _)| k.clone())
                                .unwrap_or_default();
                            a.level(&key)?
                        }
                        (other, Some(_)) => a.level(&other.label().unwrap_or_default())?,
                    });
                }
                attributes.push(a);
                columns.push(values);
            }
            _ if single => {
                let mut a = Attribute::nominal(src.name.clone());
                a.codes = Some(result.code_map.iter().map(|(k, v)| (k.clone(), v[0])).collect());
                attributes.push(a);
                columns.push(
                    ds.column(c)
                        .map(|v| v.label().map_or(Value::Missing, Value::Category))
                        .collect(),
                );
            }
            _ => {
                for ec in &result.columns {
                    let a = Attribute::nominal(ec.name.clone()).with_codes([("0", 0.0), ("1", 1.0)]);
                    attributes.push(a);
                    columns.push(
                        ec.values
                            .iter()
                            .map(|v| v.map_or(Value::Missing, |x| Value::category(number_label(x))))
                            .collect(),
                    );
                }
            }
        }
    }
    let old_target = ds.target();
    let shift = result.columns.len().saturating_sub(1);
    let target = old_target.map(|t| if t > col { t + shift } else { t });
    let rows = (0..ds.len()).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect();
    Dataset::new(attributes, rows, if old_target == Some(col) { None } else { target })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal_ds(values: &[&str], classes: &[&str]) -> Dataset {
        let attrs = vec![Attribute::nominal("x"), Attribute::nominal("class")];
        let rows = values
            .iter()
            .zip(classes)
            .map(|(v, c)| {
                let v = if *v == "?" { Value::Missing } else { Value::category(*v) };
                vec![v, Value::category(*c)]
            })
            .collect();
        Dataset::new(attrs, rows, Some(1)).unwrap()
    }

    #[test]
    fn encoder_names_round_trip() {
        for k in EncoderKind::ALL {
            assert_eq!(k.as_str().parse::<EncoderKind>().unwrap(), k);
        }
        assert!("nope".parse::<EncoderKind>().is_err());
    }

    #[test]
    fn one_hot_examples() {
        let ds = nominal_ds(&["grass", "urban", "woods", "grass"], &["e", "p", "e", "p"]);
        let r = one_hot(&ds, 0).unwrap();
        assert_eq!(r.code_map["grass"], vec![1.0, 0.0, 0.0]);
        assert_eq!(r.columns.len(), 3);
        assert_eq!(r.columns[0].name, "x=grass");
        for row in 0..4 {
            let sum: f64 = r.columns.iter().map(|c| c.values[row].unwrap()).sum();
            assert_eq!(sum, 1.0);
        }
        assert!(r.is_injective());
        let num = Dataset::new(
            vec![Attribute::numeric("n", MeasurementType::Ratio)],
            vec![vec![Value::Number(1.0)]],
            None,
        )
        .unwrap();
        assert!(matches!(one_hot(&num, 0), Err(Error::Forbidden { .. })));
    }

    #[test]
    fn one_hot_follows_declared_order_for_ordinal() {
        let a = Attribute::ordinal("size", ["small", "large"]);
        let ds = Dataset::new(
            vec![a.clone()],
            vec![vec![a.level("large").unwrap()], vec![a.level("small").unwrap()]],
            None,
        )
        .unwrap();
        let r = one_hot(&ds, 0).unwrap();
        assert_eq!(r.columns[0].name, "size=small");
        assert_eq!(r.columns[0].values, vec![Some(0.0), Some(1.0)]);
    }

    #[test]
    fn label_examples() {
        let ds = nominal_ds(&["grass", "leaves", "meadows", "grass"], &["e"; 4]);
        let r = label_encode(&ds, 0).unwrap();
        assert_eq!(r.columns[0].values, vec![Some(1.0), Some(2.0), Some(3.0), Some(1.0)]);
        assert!(r.interpretability_note.as_deref().unwrap().contains("distance"));
        assert_eq!(label_encode(&ds, 0).unwrap(), r);
    }

    #[test]
    fn ordinal_examples() {
        let order = ["very short", "short", "medium", "tall", "very tall"];
        let a = Attribute::ordinal("height", order);
        let rows = order.iter().map(|s| vec![a.level(s).unwrap()]).collect();
        let ds = Dataset::new(vec![a], rows, None).unwrap();
        let r = ordinal_encode(&ds, 0).unwrap();
        assert_eq!(
            r.columns[0].values,
            vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0), Some(5.0)]
        );
        let reversed: Vec<String> = order.iter().rev().map(|s| s.to_string()).collect();
        let r = ordinal_encode_with(&ds, 0, &reversed).unwrap();
        assert_eq!(r.code_map["very short"], vec![5.0]);
        let short: Vec<String> = order[..4].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            ordinal_encode_with(&ds, 0, &short).unwrap_err(),
            Error::UnknownValue { attribute: "height".into(), value: "very tall".into() }
        );
        let nominal = nominal_ds(&["a"], &["e"]);
        assert!(ordinal_encode(&nominal, 0).is_err());
    }

    #[test]
    fn frequency_examples() {
        let colors = ["red", "red", "red", "blue", "blue", "blue", "green", "green", "green", "white"];
        let ds = nominal_ds(&colors, &["e"; 10]);
        let r = frequency_encode(&ds, 0).unwrap();
        assert_eq!(r.code_map["red"], vec![0.3]);
        assert_eq!(r.code_map["blue"], vec![0.3]);
        assert_eq!(r.code_map["white"], vec![0.1]);
        assert_eq!(
            r.lossy_collisions,
            vec![vec!["blue".to_string(), "green".into(), "red".into()]]
        );
        let one = nominal_ds(&["a", "a"], &["e", "e"]);
        assert_eq!(frequency_encode(&one, 0).unwrap().code_map["a"], vec![1.0]);
    }

    #[test]
    fn mean_target_examples() {
        let ds = nominal_ds(
            &["v", "v", "v", "v", "w", "u"],
            &["1", "1", "1", "0", "0", "1"],
        );
        let r = mean_target_encode(&ds, 0, None).unwrap();
        assert_eq!(r.code_map["v"], vec![0.75]);
        assert_eq!(r.code_map["w"], vec![0.0]);
        assert_eq!(r.code_map["u"], vec![1.0]);
        let no_target = ds.clone().with_target(None).unwrap();
        assert_eq!(mean_target_encode(&no_target, 0, None).unwrap_err(), Error::NoTarget);
    }

    #[test]
    fn prob_ratio_examples() {
        let mut vals = vec!["v"; 8];
        vals.extend(["w", "w", "z"]);
        let classes = ["1", "1", "1", "1", "1", "1", "0", "0", "1", "0", "1"];
        let ds = nominal_ds(&vals, &classes);
        let r = probability_ratio_encode(&ds, 0, 0.0, Some("1"));
        assert!(matches!(r, Err(Error::Forbidden { ref reason, .. }) if reason.contains("`z`")));
        let ds2 = nominal_ds(&vals[..10], &classes[..10]);
        let r = probability_ratio_encode(&ds2, 0, 0.0, Some("1")).unwrap();
        assert_eq!(r.code_map["v"], vec![3.0]);
        assert_eq!(r.code_map["w"], vec![1.0]);
        let smoothed = probability_ratio_encode(&ds, 0, 1.0, Some("1")).unwrap();
        assert_eq!(smoothed.code_map["z"], vec![2.0]);
    }

    #[test]
    fn james_stein_examples() {
        let ds = nominal_ds(
            &["v", "v", "v", "v", "w", "w", "w", "w"],
            &["1", "1", "1", "0", "0", "0", "1", "0"],
        );
        let r = james_stein_encode(&ds, 0, 1.0, Some("1")).unwrap();
        // n=4, mean 0.75, global 0.5
        assert!((r.code_map["v"][0] - 0.70).abs() < 1e-12);

        let flat = nominal_ds(&["a", "a", "b", "b"], &["1", "0", "1", "0"]);
        let r = james_stein_encode(&flat, 0, 3.0, Some("1")).unwrap();
        assert_eq!(r.code_map["a"], vec![0.5]);
    }

    #[test]
    fn multi_class_targets_are_one_vs_rest() {
        let ds = nominal_ds(&["a", "a", "b", "b"], &["x", "y", "z", "z"]);
        let r = mean_target_encode(&ds, 0, None).unwrap();
        assert_eq!(r.columns.len(), 3);
        assert_eq!(r.columns[2].name, "x|z");
        assert_eq!(r.code_map["a"], vec![0.5, 0.5, 0.0]);
        assert_eq!(r.code_map["b"], vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn binary_target_positive_defaults_to_last_sorted() {
        let ds = nominal_ds(&["a", "a"], &["e", "p"]);
        let r = mean_target_encode(&ds, 0, None).unwrap();
        assert_eq!(r.columns.len(), 1);
        let only_p = nominal_ds(&["a", "b"], &["e", "p"]);
        assert_eq!(mean_target_encode(&only_p, 0, None).unwrap().code_map["b"], vec![1.0]);
        assert!(mean_target_encode(&ds, 0, Some("zzz")).is_err());
    }

    #[test]
    fn missing_values_stay_missing() {
        let ds = nominal_ds(&["a", "?", "b"], &["e", "p", "e"]);
        for kind in EncoderKind::ALL {
            if kind == EncoderKind::Ordinal || kind == EncoderKind::Wavelength {
                continue;
            }
            let r = encode(&ds, 0, kind, &EncoderParams::default()).unwrap();
            for c in &r.columns {
                assert_eq!(c.values[1], None, "{kind}");
            }
        }
    }

    #[test]
    fn hash_examples() {
        let ds = nominal_ds(&["a", "b", "a"], &["e", "e", "e"]);
        let r = hash_encode(&ds, 0, 16, 7).unwrap();
        assert_eq!(r.columns.len(), 16);
        assert_eq!(r.code_map["a"].len(), 16);
        let row = |i: usize| r.columns.iter().map(|c| c.values[i]).collect::<Vec<_>>();
        assert_eq!(row(0), row(2));
        assert!(hash_encode(&ds, 0, 0, 7).is_err());
        assert_eq!(hash_encode(&ds, 0, 16, 7).unwrap(), r);
        assert!(r.interpretability_note.as_deref().unwrap().contains("interpretable"));
    }

    #[test]
    fn wavelength_examples() {
        let ds = nominal_ds(&["red", "green", "blue"], &["e"; 3]);
        let r = wavelength_color_encode(&ds, 0, &Palette::visible()).unwrap();
        // sort the palette intervals by lower bound, keep observed colors
        let mut bands: Vec<_> = Palette::visible().bands().to_vec();
        bands.sort_by(|a, b| a.low.total_cmp(&b.low));
        let observed: Vec<_> = bands.iter().filter(|b| ["red", "green", "blue"].contains(&b.color.as_str())).collect();
        for (i, b) in observed.iter().enumerate() {
            assert_eq!(r.code_map[&b.color], vec![i as f64]);
        }
        assert_eq!(r.code_map["blue"], vec![0.0]);
        assert_eq!(r.code_map["red"], vec![2.0]);
        assert_eq!(r.result_mtype, MeasurementType::Ordinal);

        let single = nominal_ds(&["green"], &["e"]);
        assert_eq!(wavelength_color_encode(&single, 0, &Palette::visible()).unwrap().code_map["green"], vec![0.0]);

        let bad = nominal_ds(&["teal"], &["e"]);
        assert_eq!(
            wavelength_color_encode(&bad, 0, &Palette::visible()).unwrap_err(),
            Error::UnknownValue { attribute: "x".into(), value: "teal".into() }
        );
    }

    #[test]
    fn wavelength_from_numeric_values() {
        let ds = Dataset::new(
            vec![Attribute::numeric("nm", MeasurementType::Ratio)],
            vec![vec![Value::Number(700.0)], vec![Value::Number(460.0)], vec![Value::Number(650.0)]],
            None,
        )
        .unwrap();
        let r = wavelength_color_encode(&ds, 0, &Palette::visible()).unwrap();
        assert_eq!(r.columns[0].values, vec![Some(1.0), Some(0.0), Some(1.0)]);
        let out = encoded_dataset(&ds, 0, &r).unwrap();
        assert_eq!(out.value(0, 0), &Value::level("red", 2));
    }

    #[test]
    fn palette_validation() {
        let b = |c: &str, l: f64, h: f64| ColorBand { color: c.into(), low: l, high: h };
        assert!(Palette::new(vec![b("a", 0.0, 10.0), b("b", 5.0, 20.0)]).is_err());
        assert!(Palette::new(vec![b("a", 10.0, 10.0)]).is_err());
        let p = Palette::new(vec![b("b", 10.0, 20.0), b("a", 0.0, 10.0)]).unwrap();
        assert_eq!(p.bands()[0].color, "a");
        assert_eq!(p.color_of(20.0), Some("b"));
    }

    #[test]
    fn one_hot_dataset_expansion() {
        let ds = nominal_ds(&["grass", "urban", "?"], &["e", "p", "e"]);
        let r = one_hot(&ds, 0).unwrap();
        let out = encoded_dataset(&ds, 0, &r).unwrap();
        assert_eq!(out.width(), 3);
        assert_eq!(out.target(), Some(2));
        assert_eq!(out.value(0, 0), &Value::category("1"));
        assert_eq!(out.value(2, 1), &Value::Missing);
        assert_eq!(out.code(1, 1), Some(1.0));

        let l = label_encode(&ds, 0).unwrap();
        let out = encoded_dataset(&ds, 0, &l).unwrap();
        assert_eq!(out.value(1, 0), &Value::category("urban"));
        assert_eq!(out.code(1, 0), Some(2.0));

        let f = frequency_encode(&ds, 0).unwrap();
        let out = encoded_dataset(&ds, 0, &f).unwrap();
        assert_eq!(out.attribute(0).mtype, MeasurementType::Ratio);
    }
}
