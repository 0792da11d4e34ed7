use std::path::PathBuf;

use chrono::{DateTime, Duration, TimeZone, Utc};
use hawkes_core::ingest::{build_series, parse_trades, parse_trades_from_reader, IngestConfig, SplitMode, TiePolicy, TradeRecord};
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn three_row_fixture_round_trips_fields() {
    let recs = parse_trades(fixture("three_trades.csv"), &IngestConfig::default()).unwrap();
    assert_eq!(recs.len(), 3);
    let utc = |r: &TradeRecord| r.timestamp.with_timezone(&Utc);
    assert_eq!(utc(&recs[0]), Utc.with_ymd_and_hms(2017, 1, 16, 7, 30, 0).unwrap());
    assert_eq!(utc(&recs[1]), Utc.with_ymd_and_hms(2017, 1, 16, 8, 15, 30).unwrap() + Duration::milliseconds(250));
    assert_eq!(utc(&recs[2]), Utc.with_ymd_and_hms(2017, 1, 17, 16, 59, 59).unwrap());
    assert_eq!([&recs[0].index_code, &recs[1].index_code, &recs[2].index_code], ["ITXEB", "ITXES", "ITXEX"]);
    assert_eq!([recs[0].volume, recs[1].volume, recs[2].volume], [5e6, 12500000.5, 0.0]);
    assert!(recs[0].flags.is_empty());
    assert_eq!(recs[2].flags, ["block", "late"]);
}

#[test]
fn three_row_fixture_builds_two_days() {
    let recs = parse_trades(fixture("three_trades.csv"), &IngestConfig::default()).unwrap();
    let built = build_series(&recs, &IngestConfig::default(), SplitMode::ByIndex).unwrap();
    assert_eq!(built.labels, ["ITXEB", "ITXES", "ITXEX"]);
    assert_eq!(built.calendar.day_count(), 2);
    assert_eq!(built.series.times(0), &[1800.0]);
    assert_eq!(built.series.times(1), &[4530.25]);
    // Next day's 07:00 is 24 h after the first open.
    assert_eq!(built.series.times(2), &[86400.0 + 35999.0]);
    assert_eq!(built.calendar.intervals()[1], (86400.0, 86400.0 + 36000.0));
}

#[test]
fn six_trade_volume_partition() {
    let cfg = IngestConfig { volume_bin_edges: vec![5e6, 3e7], ..Default::default() };
    let recs = parse_trades(fixture("six_trades.csv"), &cfg).unwrap();
    let built = build_series(&recs, &cfg, SplitMode::ByVolumeBin).unwrap();
    let counts: Vec<usize> = (0..3).map(|d| built.series.len(d)).collect();
    assert_eq!(counts, [2, 2, 2]);
    assert_eq!(built.labels.len(), 3);
}

#[test]
fn empty_bin_is_not_an_error() {
    let cfg = IngestConfig { volume_bin_edges: vec![1e9], ..Default::default() };
    let recs = parse_trades(fixture("six_trades.csv"), &cfg).unwrap();
    let built = build_series(&recs, &cfg, SplitMode::ByVolumeBin).unwrap();
    assert_eq!(built.series.len(1), 0);
}

#[test]
fn all_filtered_is_an_error() {
    let text = "timestamp,index,volume\n2017-01-16T05:00:00Z,ITXEB,5\n";
    let recs = parse_trades_from_reader(text.as_bytes(), &IngestConfig::default()).unwrap();
    assert!(build_series(&recs, &IngestConfig::default(), SplitMode::ByIndex).is_err());
}

fn arb_records() -> impl Strategy<Value = Vec<TradeRecord>> {
    let base = Utc.with_ymd_and_hms(2017, 1, 16, 0, 0, 0).unwrap();
    proptest::collection::vec((0i64..5 * 86400 * 1000, 0usize..3, 0.0f64..1e8), 1..120).prop_map(move |rows| {
        rows.into_iter()
            .map(|(ms, idx, volume)| TradeRecord {
                // Whole seconds so ties occur.
                timestamp: (base + Duration::seconds(ms / 1000)).with_timezone(&chrono_tz::Europe::London),
                index_code: ["ITXEB", "ITXES", "ITXEX"][idx].to_string(),
                volume,
                flags: Vec::new(),
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn counts_add_up(records in arb_records(), jitter in any::<bool>()) {
        let cfg = IngestConfig {
            tie_policy: if jitter { TiePolicy::Jitter } else { TiePolicy::Drop },
            index_filter: vec!["ITXEB".into(), "ITXEX".into()],
            ..Default::default()
        };
        if let Ok(built) = build_series(&records, &cfg, SplitMode::ByIndex) {
            prop_assert_eq!(built.series.total_events() + built.dropped.total(), records.len());
            let dates: std::collections::BTreeSet<_> = records
                .iter()
                .filter(|r| cfg.index_filter.contains(&r.index_code))
                .map(|r| r.timestamp.naive_local())
                .filter(|t| t.time() >= cfg.open_time && t.time() < cfg.close_time)
                .map(|t| t.date())
                .collect();
            prop_assert_eq!(built.calendar.day_count(), dates.len());
            prop_assert!(built.calendar.intervals().iter().all(|(o, c)| (c - o - 36000.0).abs() < 1e-9));
        }
    }

    #[test]
    fn surviving_times_round_trip(records in arb_records()) {
        let cfg = IngestConfig { tie_policy: TiePolicy::Drop, ..Default::default() };
        if let Ok(built) = build_series(&records, &cfg, SplitMode::ByIndex) {
            for (d, label) in built.labels.iter().enumerate() {
                for &t in built.series.times(d) {
                    let instant: DateTime<Utc> = built.timestamp_of(t);
                    let matched = records.iter().any(|r| {
                        &r.index_code == label && (r.timestamp.with_timezone(&Utc) - instant).num_microseconds().unwrap().abs() <= 1
                    });
                    prop_assert!(matched, "no record at {}", instant);
                }
            }
        }
    }
}
