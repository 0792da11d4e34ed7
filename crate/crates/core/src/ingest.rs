//! Trade-report ingestion: CSV parsing, trading calendar construction and
//! splitting trades into event dimensions.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime, TimeZone, Utc};
use chrono_tz::Tz;

use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::series::EventSeries;

/// Flags marking trades that carry no market signal.
const DROPPED_FLAGS: [&str; 2] = ["roll", "switch"];

/// One reported trade.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeRecord {
    pub timestamp: DateTime<Tz>,
    pub index_code: String,
    pub volume: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// Keep the first of several trades sharing a timestamp in a dimension.
    Drop,
    /// Shift later duplicates forward by [`JITTER_SECONDS`] each.
    Jitter,
}

pub const JITTER_SECONDS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// One dimension per index code.
    ByIndex,
    /// One dimension per volume bin of a single index.
    ByVolumeBin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub open_time: NaiveTime,
    pub close_time: NaiveTime,
    pub volume_bin_edges: Vec<f64>,
    pub index_filter: Vec<String>,
    pub tie_policy: TiePolicy,
    /// Zone for naive timestamps and for the trading-day clock.
    pub timezone: Tz,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            open_time: NaiveTime::from_hms_opt(7, 0, 0).expect("valid time"),
            close_time: NaiveTime::from_hms_opt(17, 0, 0).expect("valid time"),
            volume_bin_edges: Vec::new(),
            index_filter: Vec::new(),
            tie_policy: TiePolicy::Jitter,
            timezone: chrono_tz::Europe::London,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.open_time >= self.close_time {
            return Err(HawkesError::Ingest(format!(
                "open time {} must precede close time {}",
                self.open_time, self.close_time
            )));
        }
        if self.volume_bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(HawkesError::Ingest("volume bin edges must be strictly ascending".into()));
        }
        Ok(())
    }
}

fn parse_timestamp(raw: &str, tz: Tz) -> std::result::Result<DateTime<Tz>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(t.with_timezone(&tz));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return tz
                .from_local_datetime(&naive)
                .earliest()
                .ok_or_else(|| format!("`{raw}` does not exist in {tz}"));
        }
    }
    Err(format!("cannot parse timestamp `{raw}` as ISO-8601"))
}

/// Reads trade reports from a CSV file with header `timestamp,index,volume[,flags]`.
pub fn parse_trades(path: impl AsRef<Path>, config: &IngestConfig) -> Result<Vec<TradeRecord>> {
    let file = std::fs::File::open(path)?;
    parse_trades_from_reader(file, config)
}

/// As [`parse_trades`], from any reader.
///
/// Rows flagged as roll or switch trades are dropped. When an index filter is
/// set, every listed code must occur in the data.
pub fn parse_trades_from_reader<R: Read>(reader: R, config: &IngestConfig) -> Result<Vec<TradeRecord>> {
    config.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| HawkesError::Parse { line: 1, message: e.to_string() })?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(ts_col), Some(idx_col), Some(vol_col)) = (column("timestamp"), column("index"), column("volume")) else {
        return Err(HawkesError::Parse {
            line: 1,
            message: format!("header must contain timestamp,index,volume; got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    };
    let flags_col = column("flags");

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| HawkesError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |col: usize, name: &str| {
            row.get(col).ok_or_else(|| HawkesError::Parse { line, message: format!("missing field `{name}`") })
        };
        let timestamp = parse_timestamp(field(ts_col, "timestamp")?, config.timezone)
            .map_err(|message| HawkesError::Parse { line, message: format!("field `timestamp`: {message}") })?;
        let index_code = field(idx_col, "index")?.to_string();
        if index_code.is_empty() {
            return Err(HawkesError::Parse { line, message: "field `index` is empty".into() });
        }
        let raw_volume = field(vol_col, "volume")?;
        let volume: f64 = raw_volume.parse().map_err(|_| HawkesError::Parse {
            line,
            message: format!("field `volume`: `{raw_volume}` is not a decimal number"),
        })?;
        if !(volume.is_finite() && volume >= 0.0) {
            return Err(HawkesError::Parse { line, message: format!("field `volume`: {volume} is negative") });
        }
        let flags: Vec<String> = flags_col
            .and_then(|c| row.get(c))
            .map(|f| f.split(';').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect())
            .unwrap_or_default();
        if flags.iter().any(|f| DROPPED_FLAGS.iter().any(|d| f.eq_ignore_ascii_case(d))) {
            continue;
        }
        out.push(TradeRecord { timestamp, index_code, volume, flags });
    }
    for code in &config.index_filter {
        if !out.iter().any(|r| &r.index_code == code) {
            return Err(HawkesError::Ingest(format!("unknown index code `{code}` in filter")));
        }
    }
    Ok(out)
}

/// Records removed while building a series.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropCounts {
    pub filtered: usize,
    pub outside_hours: usize,
    pub ties: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.filtered + self.outside_hours + self.ties
    }
}

/// Event series built from trade records.
#[derive(Debug, Clone)]
pub struct BuiltSeries {
    pub series: EventSeries,
    pub calendar: TradingCalendar,
    pub labels: Vec<String>,
    pub dropped: DropCounts,
    /// Instant of the first trading-day open, time zero of the series.
    pub origin: DateTime<Utc>,
}

impl BuiltSeries {
    /// Wall-clock instant of a series timestamp.
    pub fn timestamp_of(&self, seconds: f64) -> DateTime<Utc> {
        self.origin + chrono::Duration::nanoseconds((seconds * 1e9).round() as i64)
    }
}

fn local_instant(tz: Tz, date: NaiveDate, time: NaiveTime) -> Result<DateTime<Utc>> {
    tz.from_local_datetime(&date.and_time(time))
        .earliest()
        .map(|t| t.with_timezone(&Utc))
        .ok_or_else(|| HawkesError::Ingest(format!("{date} {time} does not exist in {tz}")))
}

fn seconds_between(from: DateTime<Utc>, to: DateTime<Utc>) -> f64 {
    let d = to - from;
    d.num_seconds() as f64 + f64::from(d.subsec_nanos()) * 1e-9
}

fn bin_label(edges: &[f64], k: usize) -> String {
    match (k.checked_sub(1).map(|i| edges[i]), edges.get(k)) {
        (None, Some(hi)) => format!("volume<{hi}"),
        (Some(lo), Some(hi)) => format!("{lo}<=volume<{hi}"),
        (Some(lo), None) => format!("volume>={lo}"),
        (None, None) => "all".to_string(),
    }
}

/// Converts records into an event series on a trading calendar.
///
/// Times are seconds since the first day's open. Trades outside `[open, close)`
/// are dropped. The calendar has one interval per distinct trade date among
/// the surviving records.
pub fn build_series(records: &[TradeRecord], config: &IngestConfig, split: SplitMode) -> Result<BuiltSeries> {
    config.validate()?;
    let mut dropped = DropCounts::default();
    let tz = config.timezone;
    let kept: Vec<&TradeRecord> = records
        .iter()
        .filter(|r| {
            let keep = config.index_filter.is_empty() || config.index_filter.contains(&r.index_code);
            if !keep {
                dropped.filtered += 1;
            }
            keep
        })
        .collect();

    let labels: Vec<String> = match split {
        SplitMode::ByIndex => {
            if config.index_filter.is_empty() {
                kept.iter().map(|r| r.index_code.clone()).collect::<BTreeSet<_>>().into_iter().collect()
            } else {
                config.index_filter.clone()
            }
        }
        SplitMode::ByVolumeBin => {
            let codes: BTreeSet<&str> = kept.iter().map(|r| r.index_code.as_str()).collect();
            if codes.len() > 1 {
                return Err(HawkesError::Ingest(format!(
                    "volume-bin split needs a single index, found {}",
                    codes.into_iter().collect::<Vec<_>>().join(", ")
                )));
            }
            (0..=config.volume_bin_edges.len()).map(|k| bin_label(&config.volume_bin_edges, k)).collect()
        }
    };

    let mut located = Vec::with_capacity(kept.len());
    for r in kept {
        let local = r.timestamp.with_timezone(&tz);
        let time = local.time();
        if time < config.open_time || time >= config.close_time {
            dropped.outside_hours += 1;
            continue;
        }
        let dim = match split {
            SplitMode::ByIndex => labels.iter().position(|l| l == &r.index_code).expect("label exists"),
            SplitMode::ByVolumeBin => config.volume_bin_edges.partition_point(|&e| e <= r.volume),
        };
        located.push((local.date_naive(), r.timestamp.with_timezone(&Utc), dim));
    }
    if located.is_empty() {
        return Err(HawkesError::Ingest("every record was filtered out".into()));
    }

    let dates: BTreeSet<NaiveDate> = located.iter().map(|l| l.0).collect();
    let first = *dates.iter().next().expect("non-empty");
    let origin = local_instant(tz, first, config.open_time)?;
    let intervals = dates
        .iter()
        .map(|&d| {
            let open = seconds_between(origin, local_instant(tz, d, config.open_time)?);
            let close = seconds_between(origin, local_instant(tz, d, config.close_time)?);
            Ok((open, close))
        })
        .collect::<Result<Vec<_>>>()?;
    let calendar = TradingCalendar::new(intervals)?;

    let mut times: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    let mut by_dim: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for &(_, instant, dim) in &located {
        by_dim[dim].push(seconds_between(origin, instant));
    }
    for (dim, raw) in by_dim.iter_mut().enumerate() {
        raw.sort_by(f64::total_cmp);
        for &t in raw.iter() {
            match times[dim].last().copied() {
                Some(prev) if t <= prev => match config.tie_policy {
                    TiePolicy::Drop => dropped.ties += 1,
                    TiePolicy::Jitter => times[dim].push(prev + JITTER_SECONDS),
                },
                _ => times[dim].push(t),
            }
        }
        if times[dim].is_empty() {
            log::warn!("dimension `{}` received no events", labels[dim]);
        }
    }
    let series = EventSeries::new(times, calendar.last_close())?;
    Ok(BuiltSeries { series, calendar, labels, dropped, origin })
}

/// Volume bin edges from one-dimensional k-means on log-volume.
///
/// A heuristic for when no thresholds are known: centroids start at evenly
/// spaced quantiles and edges sit at the geometric midpoints between
/// neighbouring centroids.
pub fn auto_bin_edges(volumes: &[f64], k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(HawkesError::Ingest("auto bins need k >= 2".into()));
    }
    let mut logs: Vec<f64> = volumes.iter().filter(|v| **v > 0.0).map(|v| v.ln()).collect();
    if logs.len() < k {
        return Err(HawkesError::Ingest(format!("{} positive volumes cannot form {k} bins", logs.len())));
    }
    logs.sort_by(f64::total_cmp);
    let mut centroids: Vec<f64> =
        (0..k).map(|c| crate::gof::quantile(&logs, (c as f64 + 0.5) / k as f64)).collect();
    for _ in 0..200 {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for &x in &logs {
            let c = (0..k)
                .min_by(|&a, &b| (x - centroids[a]).abs().total_cmp(&(x - centroids[b]).abs()))
                .expect("k >= 2");
            sums[c] += x;
            counts[c] += 1;
        }
        let next: Vec<f64> =
            (0..k).map(|c| if counts[c] > 0 { sums[c] / counts[c] as f64 } else { centroids[c] }).collect();
        let moved = next.iter().zip(&centroids).any(|(a, b)| a != b);
        centroids = next;
        if !moved {
            break;
        }
    }
    centroids.sort_by(f64::total_cmp);
    centroids.dedup();
    if centroids.len() < k {
        return Err(HawkesError::Ingest(format!("log-volumes do not separate into {k} clusters")));
    }
    Ok(centroids.windows(2).map(|w| (0.5 * (w[0] + w[1])).exp()).collect())
}
