//! Typed dataset files: a JSON document holding the attribute schema and the
//! coded rows, written by `ingest` and read by every other subcommand.

use std::collections::BTreeMap;
use std::path::Path;

use hetviz_core::model::{SimilarityGroup, SimilarityGroups};
use hetviz_core::{Attribute, Dataset, MeasurementType, Value};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{HetvizError, Result};
use crate::schemefile::parse_mtype;

pub const DATASET_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeDoc {
    name: String,
    mtype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    codes: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    modality: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    similarity: Option<Vec<SimilarityGroup>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    normalized: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    needs_review: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetDoc {
    version: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    attributes: Vec<AttributeDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    originals: BTreeMap<String, Vec<Option<String>>>,
    rows: Vec<Vec<Json>>,
}

fn cell_to_json(v: &Value) -> Json {
    match v {
        Value::Missing => Json::Null,
        Value::Number(x) => serde_json::Number::from_f64(*x).map_or(Json::Null, Json::Number),
        Value::Category(s) | Value::Level { symbol: s, .. } => Json::String(s.clone()),
    }
}

fn json_to_cell(attr: &Attribute, cell: &Json) -> Result<Value, String> {
    match (attr.mtype, cell) {
        (_, Json::Null) => Ok(Value::Missing),
        (MeasurementType::Nominal, Json::String(s)) => Ok(Value::Category(s.clone())),
        (MeasurementType::Ordinal, Json::String(s)) => attr.level(s).map_err(|e| e.to_string()),
        (m, Json::Number(n)) if m.is_numeric() => n.as_f64().map(Value::Number).ok_or_else(|| format!("{n} is out of range")),
        (m, other) => Err(format!("{other} does not fit a {m} attribute")),
    }
}

pub fn dataset_to_json(ds: &Dataset) -> String {
    let attributes = ds
        .attributes()
        .iter()
        .map(|a| AttributeDoc {
            name: a.name.clone(),
            mtype: a.mtype.name().to_string(),
            period: a.mtype.period(),
            order: a.declared_order.clone(),
            codes: a.codes.clone(),
            modality: a.modality.clone(),
            similarity: a.similarity_groups.as_ref().map(|s| s.groups().to_vec()),
            normalized: a.normalized,
            needs_review: a.needs_review,
        })
        .collect();
    let originals = ds
        .all_originals()
        .iter()
        .map(|(col, values)| (ds.attribute(*col).name.clone(), values.clone()))
        .collect();
    let doc = DatasetDoc {
        version: DATASET_VERSION,
        target: ds.target().map(|t| ds.attribute(t).name.clone()),
        attributes,
        originals,
        rows: ds.rows().iter().map(|r| r.iter().map(cell_to_json).collect()).collect(),
    };
    let mut text = serde_json::to_string(&doc).expect("datasets always serialize");
    text.push('\n');
    text
}

pub fn dataset_from_json(bytes: &[u8]) -> Result<Dataset> {
    let doc: DatasetDoc = serde_json::from_slice(bytes).map_err(|e| {
        HetvizError::document(format!("line {} column {}", e.line(), e.column()), e)
    })?;
    if doc.version != DATASET_VERSION {
        return Err(HetvizError::Version { found: doc.version, expected: DATASET_VERSION });
    }
    let mut attributes = Vec::with_capacity(doc.attributes.len());
    for a in doc.attributes {
        let location = format!("attribute `{}`", a.name);
        let mtype = parse_mtype(&a.mtype, a.period).map_err(|m| HetvizError::document(&location, m))?;
        let similarity_groups = a
            .similarity
            .map(SimilarityGroups::new)
            .transpose()
            .map_err(|e| HetvizError::document(&location, e))?;
        attributes.push(Attribute {
            name: a.name,
            mtype,
            declared_order: a.order,
            modality: a.modality,
            similarity_groups,
            codes: a.codes,
            normalized: a.normalized,
            needs_review: a.needs_review,
        });
    }
    let mut rows = Vec::with_capacity(doc.rows.len());
    for (r, cells) in doc.rows.iter().enumerate() {
        if cells.len() != attributes.len() {
            return Err(HetvizError::document(
                format!("rows[{r}]"),
                format!("{} cells for {} attributes", cells.len(), attributes.len()),
            ));
        }
        let row = cells
            .iter()
            .zip(&attributes)
            .map(|(c, a)| json_to_cell(a, c).map_err(|m| HetvizError::document(format!("rows[{r}], attribute `{}`", a.name), m)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let target = doc
        .target
        .map(|t| {
            attributes
                .iter()
                .position(|a| a.name == t)
                .ok_or(hetviz_core::Error::UnknownAttribute(t))
        })
        .transpose()?;
    let mut ds = Dataset::new(attributes, rows, target)?;
    for (name, values) in doc.originals {
        let col = ds.index_of(&name)?;
        ds.set_originals(col, values)?;
    }
    Ok(ds)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| HetvizError::io(path, e))?;
    dataset_from_json(&bytes)
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    std::fs::write(path, dataset_to_json(ds)).map_err(|e| HetvizError::io(path, e))
}
