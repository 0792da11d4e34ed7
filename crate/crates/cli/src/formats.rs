//! Text formats read and written by the command line tool.
//!
//! Parameter files are flat `key = value` lines. `#` starts a comment. Lists
//! are comma separated and matrices are given one row per key:
//!
//! ```text
//! model = hawkes
//! mu = 0.1, 0.2
//! alpha[0] = 0.5, 0
//! alpha[1] = 0.4, 0.3
//! beta[0] = 0.3, 1
//! beta[1] = 0.2, 0.2
//! ```
//!
//! A spillover model uses scalar keys `mu`, `pi`, `rho`, `alpha`, `beta` with
//! `model = bowsher`. Files may be split into `[section]` blocks; parameters
//! are read from the top (unsectioned) block or from `[params]`, so a fit
//! report can be fed back as a parameter file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hawkes_core::{BowsherParams, EventSeries, ExpHawkesParams, Model, TradingCalendar};

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| anyhow!("`{key}`: `{s}` is not a number"))
        })
        .collect()
}

fn parse_scalar(key: &str, raw: &str) -> Result<f64> {
    match parse_list(key, raw)?.as_slice() {
        [v] => Ok(*v),
        other => bail!("`{key}` expects one value, got {}", other.len()),
    }
}

/// `key = value` pairs of the parameter block, with line numbers.
fn param_entries(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    let mut in_params = true;
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            in_params = section.trim() == "params";
            continue;
        }
        if !in_params {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected `key = value`", no + 1))?;
        let key = k.trim().replace(' ', "");
        if out.insert(key.clone(), (no + 1, v.trim().to_string())).is_some() {
            bail!("line {}: duplicate key `{key}`", no + 1);
        }
    }
    Ok(out)
}

fn matrix_rows(entries: &mut BTreeMap<String, (usize, String)>, name: &str, dims: usize) -> Result<Vec<Vec<f64>>> {
    (0..dims)
        .map(|i| {
            let key = format!("{name}[{i}]");
            let (_, raw) = entries.remove(&key).ok_or_else(|| anyhow!("missing `{key}`"))?;
            let row = parse_list(&key, &raw)?;
            if row.len() != dims {
                bail!("`{key}` has {} entries, expected {dims}", row.len());
            }
            Ok(row)
        })
        .collect()
}

pub fn parse_params(text: &str) -> Result<Model> {
    let mut entries = param_entries(text)?;
    let model = match entries.remove("model") {
        Some((_, m)) => m,
        None if entries.contains_key("pi") => "bowsher".to_string(),
        None => "hawkes".to_string(),
    };
    let mut take = |k: &str| entries.remove(k).map(|(_, v)| v).ok_or_else(|| anyhow!("missing `{k}`"));
    let parsed = match model.as_str() {
        "hawkes" => {
            let raw_mu = take("mu")?;
            let mu = parse_list("mu", &raw_mu)?;
            let dims = mu.len();
            let alpha = matrix_rows(&mut entries, "alpha", dims)?;
            let beta = matrix_rows(&mut entries, "beta", dims)?;
            Model::Hawkes(ExpHawkesParams::from_rows(mu, &alpha, &beta)?)
        }
        "bowsher" => {
            let mut v = [0.0; 5];
            for (slot, key) in v.iter_mut().zip(["mu", "pi", "rho", "alpha", "beta"]) {
                *slot = parse_scalar(key, &take(key)?)?;
            }
            Model::Bowsher(BowsherParams::from_array(v)?)
        }
        other => bail!("unknown model `{other}` (hawkes | bowsher)"),
    };
    if let Some((key, (line, _))) = entries.iter().next() {
        bail!("line {line}: unexpected key `{key}`");
    }
    Ok(parsed)
}

pub fn read_params(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_params(&text).with_context(|| format!("parameter file {}", path.display()))
}

pub fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Parameter block in the grammar accepted by [`parse_params`].
pub fn format_params(model: &Model) -> String {
    let mut s = String::new();
    match model {
        Model::Hawkes(p) => {
            let _ = writeln!(s, "model = hawkes");
            let _ = writeln!(s, "mu = {}", join(p.mu().iter().copied()));
            for (name, m) in [("alpha", p.alpha()), ("beta", p.beta())] {
                for i in 0..p.dims() {
                    let _ = writeln!(s, "{name}[{i}] = {}", join(m.row(i).iter().copied()));
                }
            }
        }
        Model::Bowsher(b) => {
            let _ = writeln!(s, "model = bowsher");
            for (k, v) in ["mu", "pi", "rho", "alpha", "beta"].iter().zip(b.to_array()) {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
    }
    s
}

/// Calendar files list one `open,close` pair (seconds) per line.
pub fn parse_calendar(text: &str) -> Result<TradingCalendar> {
    let mut intervals = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.eq_ignore_ascii_case("open,close") {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| anyhow!("line {}: expected `open,close`", no + 1))?;
        let open = a.trim().parse().map_err(|_| anyhow!("line {}: bad open `{}`", no + 1, a.trim()))?;
        let close = b.trim().parse().map_err(|_| anyhow!("line {}: bad close `{}`", no + 1, b.trim()))?;
        intervals.push((open, close));
    }
    Ok(TradingCalendar::new(intervals)?)
}

pub fn read_calendar(path: &Path) -> Result<TradingCalendar> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_calendar(&text).with_context(|| format!("calendar file {}", path.display()))
}

pub fn format_calendar(cal: &TradingCalendar) -> String {
    let mut s = String::from("open,close\n");
    for (o, c) in cal.intervals() {
        let _ = writeln!(s, "{o},{c}");
    }
    s
}

/// Simple event files: `timestamp_seconds,dimension` rows, optionally
/// preceded by `# horizon=<T>` and `# dims=<M>` comments.
pub fn parse_events(text: &str) -> Result<EventSeries> {
    let mut horizon = None;
    let mut dims = None;
    let mut rows: Vec<(f64, usize)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                match k.trim() {
                    "horizon" => horizon = Some(v.trim().parse::<f64>().map_err(|_| anyhow!("line {}: bad horizon", no + 1))?),
                    "dims" => dims = Some(v.trim().parse::<usize>().map_err(|_| anyhow!("line {}: bad dims", no + 1))?),
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() || line.eq_ignore_ascii_case("timestamp_seconds,dimension") {
            continue;
        }
        let (t, d) = line.split_once(',').ok_or_else(|| anyhow!("line {}: expected `timestamp_seconds,dimension`", no + 1))?;
        let t: f64 = t.trim().parse().map_err(|_| anyhow!("line {}: bad timestamp `{}`", no + 1, t.trim()))?;
        let d: usize = d.trim().parse().map_err(|_| anyhow!("line {}: bad dimension `{}`", no + 1, d.trim()))?;
        rows.push((t, d));
    }
    let dims = dims.unwrap_or_else(|| rows.iter().map(|r| r.1 + 1).max().unwrap_or(1));
    let mut times = vec![Vec::new(); dims];
    for (t, d) in rows {
        if d >= dims {
            bail!("dimension {d} out of range for {dims} dimensions");
        }
        times[d].push(t);
    }
    for t in &mut times {
        t.sort_by(f64::total_cmp);
    }
    let horizon = horizon
        .or_else(|| times.iter().filter_map(|t| t.last().copied()).reduce(f64::max))
        .ok_or_else(|| anyhow!("event file has no events and no `# horizon=` line"))?;
    Ok(EventSeries::new(times, horizon)?)
}

pub fn format_events(series: &EventSeries) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# horizon={}", series.horizon());
    let _ = writeln!(s, "# dims={}", series.dims());
    s.push_str("timestamp_seconds,dimension\n");
    for (t, d) in series.merged() {
        let _ = writeln!(s, "{t},{d}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_DIM: &str = "\
# simulation study
mu = 0.1, 0.2
alpha[0] = 0.5, 0
alpha[1] = 0.4, 0.3
beta[0] = 0.3, 1
beta[1] = 0.2, 0.2
";

    #[test]
    fn hawkes_round_trip() {
        let m = parse_params(TWO_DIM).unwrap();
        let Model::Hawkes(p) = &m else { panic!("expected hawkes") };
        assert_eq!(p.mu(), &[0.1, 0.2]);
        assert_eq!(p.alpha()[(1, 0)], 0.4);
        assert_eq!(parse_params(&format_params(&m)).unwrap(), m);
    }

    #[test]
    fn bowsher_round_trip() {
        let m = parse_params("mu = 0.05\npi = 0.5\nrho = 0.001\nalpha = 0.06\nbeta = 0.1\n").unwrap();
        assert!(matches!(m, Model::Bowsher(_)));
        assert_eq!(parse_params(&format_params(&m)).unwrap(), m);
    }

    #[test]
    fn sections_other_than_params_ignored() {
        let text = format!("[params]\n{TWO_DIM}[fit]\nnll = 3\n");
        assert!(parse_params(&text).is_ok());
    }

    #[test]
    fn unknown_and_missing_keys_rejected() {
        assert!(parse_params(&format!("{TWO_DIM}gamma = 1\n")).is_err());
        assert!(parse_params("mu = 0.1, 0.2\nalpha[0] = 0.5, 0\n").is_err());
        assert!(parse_params("mu = 0.1\nalpha[0] = 0.5, 1\nbeta[0] = 1\n").is_err());
    }

    #[test]
    fn events_round_trip() {
        let s = EventSeries::new(vec![vec![0.5, 2.25], vec![], vec![1.0]], 10.0).unwrap();
        assert_eq!(parse_events(&format_events(&s)).unwrap(), s);
    }

    #[test]
    fn calendar_round_trip() {
        let c = TradingCalendar::regular(3, 10.0, 5.0).unwrap();
        assert_eq!(parse_calendar(&format_calendar(&c)).unwrap(), c);
    }
}
