//! Versioned JSON coding-scheme documents.

use std::collections::BTreeMap;
use std::path::Path;

use hetviz_core::encode::EncoderKind;
use hetviz_core::model::{SimilarityGroup, SimilarityGroups};
use hetviz_core::scheme::{CodingScheme, GroupSpec, SchemeEntry};
use hetviz_core::{AttributeHierarchy, MeasurementType};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{HetvizError, Result};

pub const SCHEME_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SchemeDocument {
    pub scheme: CodingScheme,
    pub hierarchy: Option<AttributeHierarchy>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeDoc {
    name: String,
    mtype: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    encoder: Option<EncoderKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    groups: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    codes: Option<BTreeMap<String, i64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    keep_original_values: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    lossy: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    modality: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    similarity: Option<Vec<SimilarityGroup>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    needs_review: bool,
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    version: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    default_mtype: Option<&'static str>,
    attributes: Vec<AttributeDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hierarchy: Option<&'a AttributeHierarchy>,
}

pub fn parse_mtype(name: &str, period: Option<f64>) -> Result<MeasurementType, String> {
    let mtype = match name {
        "nominal" => MeasurementType::Nominal,
        "ordinal" => MeasurementType::Ordinal,
        "interval" => MeasurementType::Interval,
        "ratio" => MeasurementType::Ratio,
        "absolute" => MeasurementType::Absolute,
        "cyclical" => {
            let p = period.ok_or("cyclical type needs a `period`")?;
            return MeasurementType::cyclical(p).map_err(|e| e.to_string());
        }
        other => return Err(format!("unknown measurement type `{other}`")),
    };
    if period.is_some() {
        return Err(format!("`period` given for a {name} attribute"));
    }
    Ok(mtype)
}

fn entry_to_doc(e: &SchemeEntry) -> AttributeDoc {
    AttributeDoc {
        name: e.name.clone(),
        mtype: e.mtype.name().to_string(),
        period: e.mtype.period(),
        encoder: e.encoder,
        order: e.order.clone(),
        groups: e.group.clone(),
        codes: e.codes.clone(),
        keep_original_values: e.keep_original_values,
        lossy: e.lossy,
        modality: e.modality.clone(),
        similarity: e.similarity.as_ref().map(|s| s.groups().to_vec()),
        needs_review: e.needs_review,
    }
}

fn doc_to_entry(d: AttributeDoc) -> Result<SchemeEntry> {
    let location = format!("attribute `{}`", d.name);
    let mtype = parse_mtype(&d.mtype, d.period).map_err(|m| HetvizError::document(&location, m))?;
    let similarity = d
        .similarity
        .map(SimilarityGroups::new)
        .transpose()
        .map_err(|e| HetvizError::document(&location, e))?;
    let entry = SchemeEntry {
        name: d.name,
        mtype,
        encoder: d.encoder,
        order: d.order,
        group: d.groups,
        codes: d.codes,
        keep_original_values: d.keep_original_values,
        lossy: d.lossy,
        modality: d.modality,
        similarity,
        needs_review: d.needs_review,
    };
    entry.validate()?;
    Ok(entry)
}

pub fn save_scheme(doc: &SchemeDocument) -> String {
    let out = DocumentOut {
        version: SCHEME_VERSION,
        target: doc.scheme.target.as_deref(),
        default_mtype: doc.scheme.default_mtype.map(|m| m.name()),
        attributes: doc.scheme.entries.iter().map(entry_to_doc).collect(),
        hierarchy: doc.hierarchy.as_ref(),
    };
    let mut text = serde_json::to_string_pretty(&out).expect("scheme documents always serialize");
    text.push('\n');
    text
}

pub fn load_scheme(bytes: &[u8]) -> Result<SchemeDocument> {
    let root: Json = serde_json::from_slice(bytes).map_err(|e| {
        HetvizError::document(format!("line {} column {}", e.line(), e.column()), e)
    })?;
    let Json::Object(mut fields) = root else {
        return Err(HetvizError::document("document", "expected a JSON object"));
    };
    let version = fields
        .get("version")
        .and_then(Json::as_u64)
        .ok_or_else(|| HetvizError::document("version", "missing or not a non-negative integer"))?;
    if version != SCHEME_VERSION {
        return Err(HetvizError::Version { found: version, expected: SCHEME_VERSION });
    }
    for key in fields.keys() {
        if !matches!(key.as_str(), "version" | "target" | "default_mtype" | "attributes" | "hierarchy") {
            return Err(HetvizError::document(key.clone(), "unknown field"));
        }
    }

    let target = match fields.remove("target") {
        None | Some(Json::Null) => None,
        Some(Json::String(t)) => Some(t),
        Some(_) => return Err(HetvizError::document("target", "expected an attribute name")),
    };
    let default_mtype = match fields.remove("default_mtype") {
        None | Some(Json::Null) => None,
        Some(Json::String(m)) => Some(parse_mtype(&m, None).map_err(|e| HetvizError::document("default_mtype", e))?),
        Some(_) => return Err(HetvizError::document("default_mtype", "expected a type name")),
    };
    let Some(Json::Array(attributes)) = fields.remove("attributes") else {
        return Err(HetvizError::document("attributes", "missing or not a list"));
    };
    let mut entries = Vec::with_capacity(attributes.len());
    for (i, raw) in attributes.into_iter().enumerate() {
        let location = match raw.get("name").and_then(Json::as_str) {
            Some(name) => format!("attribute `{name}`"),
            None => format!("attributes[{i}]"),
        };
        let doc: AttributeDoc = serde_json::from_value(raw).map_err(|e| HetvizError::document(location, e))?;
        entries.push(doc_to_entry(doc)?);
    }
    let scheme = CodingScheme { entries, default_mtype, target };
    scheme.validate()?;

    let hierarchy = match fields.remove("hierarchy") {
        None | Some(Json::Null) => None,
        Some(h) => {
            let h: AttributeHierarchy =
                serde_json::from_value(h).map_err(|e| HetvizError::document("hierarchy", e))?;
            h.validate(scheme.entries.len())
                .map_err(|e| HetvizError::document("hierarchy", e))?;
            Some(h)
        }
    };
    Ok(SchemeDocument { scheme, hierarchy })
}

pub fn read_scheme(path: &Path) -> Result<SchemeDocument> {
    let bytes = std::fs::read(path).map_err(|e| HetvizError::io(path, e))?;
    load_scheme(&bytes)
}

pub fn write_scheme(path: &Path, doc: &SchemeDocument) -> Result<()> {
    std::fs::write(path, save_scheme(doc)).map_err(|e| HetvizError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hetviz_core::model::HierarchyNode;
    use hetviz_core::scheme::{IntervalGroup, ValueGroup};

    fn grades() -> SchemeDocument {
        let entry = SchemeEntry::new("grade", MeasurementType::Ordinal)
            .with_order(["C", "B", "A"])
            .with_codes([("A", 4), ("B", 3), ("C", 2)])
            .keeping_originals();
        let size = SchemeEntry::new("size", MeasurementType::Ratio).with_group(
            GroupSpec::intervals(vec![
                IntervalGroup { start: 0.0, length: 50.0, code: 1 },
                IntervalGroup { start: 50.0, length: 20.0, code: 2 },
                IntervalGroup { start: 70.0, length: 30.0, code: 3 },
            ])
            .unwrap(),
        );
        let mut dir = SchemeEntry::new("heading", MeasurementType::cyclical(360.0).unwrap());
        dir.modality = Some("angle".into());
        let mut pass = SchemeEntry::new("pass", MeasurementType::Nominal);
        pass.group = Some(GroupSpec::Values {
            groups: vec![ValueGroup { label: "yes".into(), code: 1, values: vec!["y".into(), "Y".into()] }],
            default: None,
        });
        pass.encoder = Some(EncoderKind::Label);
        SchemeDocument {
            scheme: CodingScheme {
                entries: vec![entry, size, dir, pass],
                default_mtype: None,
                target: Some("pass".into()),
            },
            hierarchy: None,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let doc = grades();
        let text = save_scheme(&doc);
        let back = load_scheme(text.as_bytes()).unwrap();
        assert_eq!(back, doc);
        assert_eq!(save_scheme(&back), text);
        assert!(text.ends_with("}\n"));
    }

    #[test]
    fn hierarchy_survives() {
        let names: Vec<String> = (1..=22).map(|i| format!("X{i}")).collect();
        let entries = names.iter().map(|n| SchemeEntry::new(n.clone(), MeasurementType::Nominal)).collect();
        let root = HierarchyNode::Group {
            name: "all".into(),
            children: vec![
                HierarchyNode::Group {
                    name: "cap".into(),
                    children: (0..3).map(|attr| HierarchyNode::Leaf { attr }).collect(),
                },
                HierarchyNode::Group {
                    name: "rest".into(),
                    children: (3..22).map(|attr| HierarchyNode::Leaf { attr }).collect(),
                },
            ],
        };
        let doc = SchemeDocument {
            scheme: CodingScheme { entries, default_mtype: None, target: None },
            hierarchy: Some(AttributeHierarchy::new(root, 1, 22).unwrap()),
        };
        let back = load_scheme(save_scheme(&doc).as_bytes()).unwrap();
        assert_eq!(back.hierarchy, doc.hierarchy);
    }

    #[test]
    fn missing_mtype_names_the_attribute() {
        let text = br#"{"version": 1, "attributes": [{"name": "odor"}]}"#;
        let err = load_scheme(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("attribute `odor`") && msg.contains("mtype"), "{msg}");
    }

    #[test]
    fn version_and_syntax_errors() {
        let err = load_scheme(br#"{"version": 2, "attributes": []}"#).unwrap_err();
        assert!(matches!(err, HetvizError::Version { found: 2, expected: 1 }));
        let err = load_scheme(b"{\n  \"version\": 1,\n  oops").unwrap_err();
        assert!(err.to_string().starts_with("line 3"), "{err}");
        let err = load_scheme(br#"{"version": 1, "attributes": [], "extra": 1}"#).unwrap_err();
        assert!(err.to_string().contains("extra"));
    }

    #[test]
    fn semantic_errors_name_the_attribute() {
        let text = br#"{"version": 1, "attributes": [
            {"name": "g", "mtype": "nominal", "codes": {"a": 1, "b": 1}}]}"#;
        let err = load_scheme(text).unwrap_err();
        assert_eq!(err.code(), "schema_violation");
        assert!(err.to_string().contains("`g`"));
        let text = br#"{"version": 1, "attributes": [{"name": "az", "mtype": "cyclical"}]}"#;
        assert!(load_scheme(text).unwrap_err().to_string().contains("attribute `az`"));
        let text = br#"{"version": 1, "attributes": [{"name": "q", "mtype": "fuzzy"}]}"#;
        assert!(load_scheme(text).unwrap_err().to_string().contains("fuzzy"));
    }
}
