mod common;

use hetviz::csvio::{parse_csv, CsvOptions};
use hetviz::dsfile::{dataset_from_json, dataset_to_json};
use hetviz::schemefile::{load_scheme, save_scheme, SchemeDocument};
use hetviz_core::encode::EncoderKind;
use hetviz_core::scheme::{CodingScheme, DefaultGroup, GroupSpec, IntervalGroup, SchemeEntry, ValueGroup};
use hetviz_core::MeasurementType;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn word() -> impl Strategy<Value = String> {
    "[a-z\u{e9}\" ,]{1,6}"
}

fn interval_groups() -> impl Strategy<Value = GroupSpec> {
    (-1e6f64..1e6, prop::collection::vec((1e-3f64..1e3, 0f64..10.0), 1..5)).prop_map(|(first, steps)| {
        let mut start = first;
        let intervals = steps
            .into_iter()
            .enumerate()
            .map(|(k, (length, gap))| {
                let iv = IntervalGroup { start, length, code: k as i64 + 1 };
                start = iv.end() + gap;
                iv
            })
            .collect();
        GroupSpec::intervals(intervals).expect("generated intervals are ordered")
    })
}

fn value_groups() -> impl Strategy<Value = GroupSpec> {
    (prop::collection::btree_set(word(), 1..8), 1usize..4, any::<bool>()).prop_map(|(values, per, with_default)| {
        let values: Vec<String> = values.into_iter().collect();
        let groups = values
            .chunks(per)
            .enumerate()
            .map(|(k, chunk)| ValueGroup { label: format!("g{k}"), code: k as i64 + 1, values: chunk.to_vec() })
            .collect();
        let default = with_default.then(|| DefaultGroup { label: "other".into(), code: 0 });
        GroupSpec::Values { groups, default }
    })
}

fn mtype() -> impl Strategy<Value = MeasurementType> {
    prop_oneof![
        Just(MeasurementType::Nominal),
        Just(MeasurementType::Ordinal),
        Just(MeasurementType::Interval),
        Just(MeasurementType::Ratio),
        Just(MeasurementType::Absolute),
        (1e-6f64..1e6).prop_map(|p| MeasurementType::cyclical(p).unwrap()),
    ]
}

fn entry(name: String) -> impl Strategy<Value = SchemeEntry> {
    (
        mtype(),
        prop::option::of(prop::sample::select(EncoderKind::ALL.to_vec())),
        prop::option::of(prop::collection::btree_set(word(), 0..6)),
        prop::option::of(prop::collection::btree_set(word(), 1..6)),
        prop::option::of(prop_oneof![interval_groups(), value_groups()]),
        any::<(bool, bool)>(),
        prop::option::of("[a-z]{1,8}"),
    )
        .prop_map(move |(mtype, encoder, codes, order, group, (keep, review), modality)| {
            let mut e = SchemeEntry::new(name.clone(), mtype);
            if let Some(codes) = codes {
                e = e.with_codes(codes.into_iter().enumerate().map(|(k, v)| (v, k as i64 * 3 - 2)));
            }
            if let Some(order) = order {
                let mut order: Vec<String> = order.into_iter().collect();
                order.reverse();
                e = e.with_order(order);
            }
            if let Some(g) = group {
                e = e.with_group(g);
            }
            e.encoder = encoder;
            e.keep_original_values = keep;
            e.needs_review = review;
            e.modality = modality;
            e
        })
}

fn document() -> impl Strategy<Value = SchemeDocument> {
    (1usize..6)
        .prop_flat_map(|n| {
            let entries: Vec<_> = (0..n).map(|i| entry(format!("col {i}"))).collect();
            (entries, prop::option::of(0..n), prop::option::of(mtype()))
        })
        .prop_map(|(entries, target, default_mtype)| {
            let target = target.map(|t| entries[t].name.clone());
            let default_mtype = default_mtype.filter(|m| !matches!(m, MeasurementType::Cyclical { .. }));
            SchemeDocument { scheme: CodingScheme { entries, default_mtype, target }, hierarchy: None }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scheme_save_load_is_bit_exact(doc in document()) {
        prop_assert!(doc.scheme.validate().is_ok());
        let text = save_scheme(&doc);
        let loaded = load_scheme(text.as_bytes()).unwrap();
        prop_assert_eq!(&loaded, &doc);
        prop_assert_eq!(save_scheme(&loaded), text);
    }

    #[test]
    fn dataset_file_round_trips(seed in any::<u64>(), rows in 0usize..40, attrs in 1usize..6, missing in 0.0f64..0.4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let ds = common::random_mixed(&mut rng, rows, attrs, 3, missing);
        let text = dataset_to_json(&ds);
        let back = dataset_from_json(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(dataset_to_json(&back), text);
    }

    #[test]
    fn csv_parse_inverts_csv_writing(
        width in 1usize..5,
        cells in prop::collection::vec("[a-z0-9 ,\"\n?]{1,6}", 0..60),
    ) {
        let header: Vec<String> = (0..width).map(|i| format!("h{i}")).collect();
        let rows: Vec<Vec<String>> = cells.chunks_exact(width).map(<[String]>::to_vec).collect();
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&header).unwrap();
        for r in &rows {
            writer.write_record(r).unwrap();
        }
        let bytes = writer.into_inner().unwrap();
        let table = parse_csv(&bytes, &CsvOptions::default()).unwrap();
        prop_assert_eq!(table.header(), &header[..]);
        prop_assert_eq!(table.rows(), &rows[..]);
    }
}
