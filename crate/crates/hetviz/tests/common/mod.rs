#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use hetviz::csvio::{read_csv, CsvOptions};
use hetviz::engine;
use hetviz::schemefile::read_scheme;
use hetviz_core::scheme::{apply_scheme, bulk_assign, RawTable};
use hetviz_core::{Attribute, Dataset, MeasurementType, Value};
use rand::rngs::StdRng;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn census_options() -> CsvOptions {
    CsvOptions { has_header: false, comment: Some(b'|'), trim: true, ..CsvOptions::default() }
}

pub fn mushroom_raw() -> RawTable {
    read_csv(&data_path("mushroom.csv"), &CsvOptions::default()).expect("mushroom.csv parses")
}

pub fn mushroom() -> Dataset {
    let scheme = read_scheme(&data_path("mushroom.scheme.json")).expect("mushroom scheme loads");
    engine::typed_dataset(&mushroom_raw(), &scheme).expect("mushroom scheme applies")
}

pub fn census() -> Dataset {
    let raw = read_csv(&data_path("census-income.data"), &census_options()).expect("census parses");
    let scheme = read_scheme(&data_path("census.scheme.json")).expect("census scheme loads");
    engine::typed_dataset(&raw, &scheme).expect("census scheme applies")
}

pub const NOMINAL: [&str; 5] = ["red", "green", "blue", "amber", "white"];
pub const LEVELS: [&str; 4] = ["low", "mid", "high", "top"];

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Nominal,
    Ordinal,
    Ratio,
}

/// Random mixed dataset: `attrs` columns plus a class column named `class`
/// with `classes` labels. Cells go missing with probability `missing`.
pub fn random_mixed(rng: &mut StdRng, rows: usize, attrs: usize, classes: usize, missing: f64) -> Dataset {
    let kinds: Vec<Kind> = (0..attrs)
        .map(|_| match rng.random_range(0..3) {
            0 => Kind::Nominal,
            1 => Kind::Ordinal,
            _ => Kind::Ratio,
        })
        .collect();
    let mut attributes: Vec<Attribute> = kinds
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let name = format!("a{i}");
            match k {
                Kind::Nominal => Attribute::nominal(name),
                Kind::Ordinal => Attribute::ordinal(name, LEVELS),
                Kind::Ratio => Attribute::numeric(name, MeasurementType::Ratio),
            }
        })
        .collect();
    attributes.push(Attribute::nominal("class"));
    let data = (0..rows)
        .map(|_| {
            let mut row: Vec<Value> = kinds
                .iter()
                .map(|k| {
                    if rng.random_bool(missing) {
                        return Value::Missing;
                    }
                    match k {
                        Kind::Nominal => Value::category(NOMINAL[rng.random_range(0..NOMINAL.len())]),
                        Kind::Ordinal => {
                            let r = rng.random_range(0..LEVELS.len());
                            Value::level(LEVELS[r], r as u32 + 1)
                        }
                        Kind::Ratio => Value::Number(rng.random_range(0..6) as f64 * 0.5),
                    }
                })
                .collect();
            row.push(Value::category(format!("c{}", rng.random_range(0..classes))));
            row
        })
        .collect();
    Dataset::new(attributes, data, Some(attrs)).expect("generated rows conform")
}

/// All-nominal dataset coded with first-appearance codes, target `class`.
pub fn random_coded(rng: &mut StdRng, rows: usize, attrs: usize) -> Dataset {
    let mut header: Vec<String> = (0..attrs).map(|i| format!("a{i}")).collect();
    header.push("class".into());
    let body: Vec<Vec<String>> = (0..rows)
        .map(|_| {
            let mut row: Vec<String> = (0..attrs)
                .map(|_| {
                    if rng.random_bool(0.1) {
                        "?".to_string()
                    } else {
                        NOMINAL[rng.random_range(0..NOMINAL.len())].to_string()
                    }
                })
                .collect();
            row.push(if rng.random_bool(0.5) { "e" } else { "p" }.to_string());
            row
        })
        .collect();
    let raw = RawTable::new(header, body, "?").unwrap();
    let mut scheme = bulk_assign(&raw, MeasurementType::Nominal).unwrap();
    scheme.target = Some("class".into());
    apply_scheme(&raw, &scheme).unwrap()
}

pub fn label(v: &Value) -> String {
    v.label().unwrap_or_else(|| "?".into())
}

/// Brute-force class counts of the rows in `rows`.
pub fn class_counts(ds: &Dataset, rows: impl IntoIterator<Item = usize>) -> BTreeMap<String, usize> {
    let target = ds.target().unwrap();
    let mut counts = BTreeMap::new();
    for r in rows {
        *counts.entry(label(ds.value(r, target))).or_default() += 1;
    }
    counts
}

/// Captured CLI run: exit code, stdout, stderr.
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = hetviz::cli::run(std::iter::once("hetviz").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Fixed mixed-type fixture for the golden SVG files.
pub fn fixture() -> Dataset {
    let raw = RawTable::new(
        ["odor", "ring", "rings", "class"].iter().map(|s| s.to_string()).collect(),
        [
            ["almond", "low", "1", "e"],
            ["almond", "low", "2", "e"],
            ["anise", "mid", "1", "e"],
            ["foul", "high", "2", "p"],
            ["foul", "high", "3", "p"],
            ["foul", "mid", "3", "p"],
            ["none", "low", "1", "e"],
            ["none", "mid", "?", "p"],
            ["none", "low", "2", "e"],
            ["?", "high", "3", "p"],
            ["foul", "high", "2", "e"],
            ["almond", "mid", "1", "e"],
        ]
        .iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect(),
        "?",
    )
    .unwrap();
    let mut scheme = bulk_assign(&raw, MeasurementType::Nominal).unwrap();
    *scheme.entry_mut("ring").unwrap() =
        hetviz_core::scheme::SchemeEntry::new("ring", MeasurementType::Ordinal).with_order(["low", "mid", "high"]);
    *scheme.entry_mut("rings").unwrap() = hetviz_core::scheme::SchemeEntry::new("rings", MeasurementType::Absolute);
    scheme.target = Some("class".into());
    apply_scheme(&raw, &scheme).unwrap()
}

pub fn render_fixture(mode: hetviz_core::render::RenderMode) -> String {
    let cfg = hetviz_core::view::ViewConfig::default();
    let spec = hetviz_core::render::RenderSpec { mode, show_report: true, ..Default::default() };
    engine::render(&fixture(), &cfg, &spec).unwrap()
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub const GOLDEN: [(&str, hetviz_core::render::RenderMode); 2] = [
    ("fixture-lossless.svg", hetviz_core::render::RenderMode::LosslessPolylines),
    ("fixture-aggregated.svg", hetviz_core::render::RenderMode::AggregatedEdges),
];
