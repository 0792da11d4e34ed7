use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveTime;
use clap::{Args, ValueEnum};
use hawkes_core::ingest::{self, IngestConfig, SplitMode, TiePolicy};
use hawkes_core::{EventSeries, TradingCalendar};

use crate::formats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    ByIndex,
    ByVolumeBin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ties {
    Drop,
    Jitter,
}

/// Input event data, either simulated events or raw trade reports.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Event file: `timestamp_seconds,dimension` rows or a `timestamp,index,volume[,flags]` trade file
    #[arg(long)]
    pub events: PathBuf,
    /// Trading calendar file (`open,close` seconds per line); trade files build their own
    #[arg(long)]
    pub calendar: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Split::ByIndex)]
    pub split: Split,
    /// Ascending volume thresholds for `--split by-volume-bin`, comma separated
    #[arg(long, value_delimiter = ',')]
    pub bins: Vec<f64>,
    /// Pick k volume bins by k-means on log-volume (heuristic)
    #[arg(long, conflicts_with = "bins")]
    pub auto_bins: Option<usize>,
    /// Keep only these index codes, comma separated
    #[arg(long = "index", value_delimiter = ',')]
    pub index_filter: Vec<String>,
    #[arg(long, default_value = "07:00")]
    pub open: String,
    #[arg(long, default_value = "17:00")]
    pub close: String,
    #[arg(long, default_value = "Europe/London")]
    pub timezone: String,
    #[arg(long, value_enum, default_value_t = Ties::Jitter)]
    pub ties: Ties,
}

pub struct Loaded {
    pub series: EventSeries,
    pub calendar: Option<TradingCalendar>,
    pub labels: Vec<String>,
    /// Free-form `key = value` notes about ingestion.
    pub notes: Vec<(String, String)>,
}

fn parse_time(raw: &str) -> Result<NaiveTime> {
    NaiveTime::parse_from_str(raw, "%H:%M")
        .or_else(|_| NaiveTime::parse_from_str(raw, "%H:%M:%S"))
        .with_context(|| format!("`{raw}` is not a HH:MM time"))
}

fn is_trade_file(text: &str) -> bool {
    let header = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("");
    let cols: Vec<String> = header.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
    cols.iter().any(|c| c == "timestamp") && cols.iter().any(|c| c == "index")
}

impl DataArgs {
    pub fn ingest_config(&self) -> Result<IngestConfig> {
        Ok(IngestConfig {
            open_time: parse_time(&self.open)?,
            close_time: parse_time(&self.close)?,
            volume_bin_edges: self.bins.clone(),
            index_filter: self.index_filter.clone(),
            tie_policy: match self.ties {
                Ties::Drop => TiePolicy::Drop,
                Ties::Jitter => TiePolicy::Jitter,
            },
            timezone: self.timezone.parse().map_err(|e| anyhow::anyhow!("timezone `{}`: {e}", self.timezone))?,
        })
    }

    pub fn inputs(&self) -> Vec<(&'static str, &Path)> {
        let mut v = vec![("events", self.events.as_path())];
        if let Some(c) = &self.calendar {
            v.push(("calendar", c.as_path()));
        }
        v
    }

    pub fn load(&self) -> Result<Loaded> {
        let text = std::fs::read_to_string(&self.events).with_context(|| format!("reading {}", self.events.display()))?;
        if !is_trade_file(&text) {
            let series = formats::parse_events(&text).with_context(|| format!("event file {}", self.events.display()))?;
            let calendar = self.calendar.as_deref().map(formats::read_calendar).transpose()?;
            let labels = (0..series.dims()).map(|d| d.to_string()).collect();
            return Ok(Loaded { series, calendar, labels, notes: Vec::new() });
        }

        let mut config = self.ingest_config()?;
        let records = ingest::parse_trades_from_reader(text.as_bytes(), &config)
            .with_context(|| format!("trade file {}", self.events.display()))?;
        let split = match self.split {
            Split::ByIndex => SplitMode::ByIndex,
            Split::ByVolumeBin => SplitMode::ByVolumeBin,
        };
        if split == SplitMode::ByVolumeBin {
            if let Some(k) = self.auto_bins {
                let volumes: Vec<f64> = records
                    .iter()
                    .filter(|r| config.index_filter.is_empty() || config.index_filter.contains(&r.index_code))
                    .map(|r| r.volume)
                    .collect();
                config.volume_bin_edges = ingest::auto_bin_edges(&volumes, k)?;
            } else if config.volume_bin_edges.is_empty() {
                bail!("--split by-volume-bin needs --bins or --auto-bins");
            }
        }
        if self.calendar.is_some() {
            log::warn!("ignoring --calendar: trade files define their own trading days");
        }
        let built = ingest::build_series(&records, &config, split)?;
        let notes = vec![
            ("records".to_string(), records.len().to_string()),
            ("dropped_filtered".to_string(), built.dropped.filtered.to_string()),
            ("dropped_outside_hours".to_string(), built.dropped.outside_hours.to_string()),
            ("dropped_ties".to_string(), built.dropped.ties.to_string()),
            ("trading_days".to_string(), built.calendar.day_count().to_string()),
            ("origin".to_string(), built.origin.to_rfc3339()),
            ("volume_bin_edges".to_string(), formats::join(config.volume_bin_edges.iter().copied())),
        ];
        Ok(Loaded { series: built.series, calendar: Some(built.calendar), labels: built.labels, notes })
    }
}
