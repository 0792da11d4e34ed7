use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use hawkes_core::gof::{self, KsResult};
use hawkes_core::likelihood::{nll, nll_daygap};
use hawkes_core::optimize::{fit_2shlo, fit_bowsher, FitResult, OptimConfig};
use hawkes_core::simulate::{simulate_bowsher, simulate_hawkes, SimConfig, SimStop};
use hawkes_core::{spectral_radius, ExpHawkesParams, Model, TradingCalendar};

use crate::formats::{self, join};
use crate::meta::{write_with_sidecar, Metadata};
use crate::{parse_range, FitArgs, FitModel, GofArgs, LandscapeArgs, SimulateArgs, StatsArgs};

const MINUTE: f64 = 60.0;

fn minutes_inverse(rate: f64) -> f64 {
    1.0 / rate / MINUTE
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let model = match &a.params {
        Some(p) => formats::read_params(p)?,
        None => {
            let missing = || anyhow!("inline parameters need --mu, --alpha and --beta");
            Model::Hawkes(ExpHawkesParams::univariate(
                a.mu.ok_or_else(missing)?,
                a.alpha.ok_or_else(missing)?,
                a.beta.ok_or_else(missing)?,
            )?)
        }
    };
    let calendar = match (&a.calendar, a.days) {
        (Some(path), _) => Some(formats::read_calendar(path)?),
        (None, Some(days)) => Some(TradingCalendar::regular(days, a.day_length, a.gap)?),
        (None, None) => None,
    };
    let stop = match (a.max_events, a.horizon, &calendar) {
        (Some(n), _, _) => SimStop::MaxEvents(n),
        (None, Some(h), _) => SimStop::Horizon(h),
        (None, None, Some(cal)) => SimStop::Horizon(cal.last_close()),
        (None, None, None) => bail!("give --horizon, --max-events or a calendar"),
    };
    let config = SimConfig { seed: a.seed, stop, calendar: calendar.clone() };
    let series = match &model {
        Model::Hawkes(p) => simulate_hawkes(p, &config)?,
        Model::Bowsher(b) => {
            let cal = calendar.as_ref().ok_or_else(|| anyhow!("the spillover model needs --calendar or --days"))?;
            simulate_bowsher(b, cal, &config)?
        }
    };

    let mut cfg = formats::format_params(&model);
    let _ = writeln!(cfg, "stop = {stop:?}");
    if let Some(cal) = &calendar {
        let _ = writeln!(cfg, "calendar = {}", cal.intervals().iter().map(|(o, c)| format!("{o}:{c}")).collect::<Vec<_>>().join(" "));
    }
    let mut inputs = Vec::new();
    if let Some(p) = &a.params {
        inputs.push(("params", p.clone()));
    }
    if let Some(p) = &a.calendar {
        inputs.push(("calendar", p.clone()));
    }
    let meta = Metadata { command: "simulate", inputs, seed: Some(a.seed), config: cfg };
    write_with_sidecar(&a.out, &formats::format_events(&series), &meta)?;
    if let (Some(path), Some(cal)) = (&a.calendar_out, &calendar) {
        std::fs::write(path, formats::format_calendar(cal)).with_context(|| format!("writing {}", path.display()))?;
    }
    let counts: Vec<String> = (0..series.dims()).map(|d| series.len(d).to_string()).collect();
    println!("events={} per_dimension={} horizon={}", series.total_events(), counts.join(","), series.horizon());
    Ok(())
}

fn fit_report(result: &FitResult, model: FitModel, labels: &[String], notes: &[(String, String)], counts: &[usize]) -> String {
    let mut s = String::from("[params]\n");
    s.push_str(&formats::format_params(&result.params));
    s.push_str("\n[fit]\n");
    let _ = writeln!(s, "model = {}", format!("{model:?}").to_lowercase());
    let _ = writeln!(s, "converged = {}", result.converged);
    let _ = writeln!(s, "nll = {}", result.nll);
    let _ = writeln!(s, "outer_iterations = {}", result.outer_iterations);
    let _ = writeln!(s, "evaluations = {}", result.inner_trace.len());
    let _ = writeln!(s, "labels = {}", labels.join(", "));
    let _ = writeln!(s, "events = {}", counts.iter().map(usize::to_string).collect::<Vec<_>>().join(", "));
    for (k, v) in notes {
        let _ = writeln!(s, "{k} = {v}");
    }

    s.push_str("\n[human]\n");
    match &result.params {
        Model::Hawkes(p) => {
            let _ = writeln!(s, "mu_inv_minutes = {}", join(p.mu().iter().map(|&m| minutes_inverse(m))));
            for i in 0..p.dims() {
                let _ = writeln!(s, "alpha[{i}] = {}", join(p.alpha().row(i).iter().copied()));
            }
            for i in 0..p.dims() {
                let _ = writeln!(s, "beta_inv_minutes[{i}] = {}", join(p.beta().row(i).iter().map(|&b| minutes_inverse(b))));
            }
            let branching = hawkes_core::branching_matrix(p);
            for i in 0..p.dims() {
                let _ = writeln!(s, "branching[{i}] = {}", join(branching.row(i).iter().copied()));
            }
            let _ = writeln!(s, "spectral_radius = {}", spectral_radius(&branching).0);
        }
        Model::Bowsher(b) => {
            let _ = writeln!(s, "mu_inv_minutes = {}", minutes_inverse(b.mu));
            let _ = writeln!(s, "pi = {}", b.pi);
            let _ = writeln!(s, "rho_inv_minutes = {}", minutes_inverse(b.rho));
            let _ = writeln!(s, "alpha = {}", b.alpha);
            let _ = writeln!(s, "beta_inv_minutes = {}", minutes_inverse(b.beta));
            let _ = writeln!(s, "branching_ratio = {}", b.branching_ratio());
        }
    }

    s.push_str("\n[trace]\nevaluation,nll,point\n");
    for (k, e) in result.inner_trace.iter().enumerate() {
        let point: Vec<String> = e.point.iter().map(f64::to_string).collect();
        let _ = writeln!(s, "{k},{},{}", e.nll, point.join(" "));
    }
    s
}

pub fn fit(a: &FitArgs) -> Result<()> {
    let loaded = a.data.load()?;
    let config = OptimConfig {
        inner_method: a.inner_method,
        inner_tol: a.tol_inner,
        inner_max_iter: a.max_inner,
        outer_tol: a.tol_outer,
        outer_max_iter: a.max_outer,
        seed: a.seed,
        warm_start: !a.cold_start,
        ..OptimConfig::default()
    };
    let series = &loaded.series;
    let need_calendar = || {
        loaded.calendar.clone().ok_or_else(|| anyhow!("this model needs --calendar or a trade file"))
    };
    let result = match a.model {
        FitModel::Hawkes => fit_2shlo(series, &TradingCalendar::single(0.0, series.horizon())?, &config)?,
        FitModel::Daygap => fit_2shlo(series, &need_calendar()?, &config)?,
        FitModel::Bowsher => fit_bowsher(series, &need_calendar()?, &config)?,
    };
    let counts: Vec<usize> = (0..series.dims()).map(|d| series.len(d)).collect();
    let report = fit_report(&result, a.model, &loaded.labels, &loaded.notes, &counts);
    let mut inputs: Vec<_> = a.data.inputs().into_iter().map(|(r, p)| (r, p.to_path_buf())).collect();
    inputs.sort_by_key(|i| i.0);
    let meta = Metadata { command: "fit", inputs, seed: Some(a.seed), config: format!("{a:#?}") };
    write_with_sidecar(&a.out, &report, &meta)?;

    let summary = match &result.params {
        Model::Hawkes(p) => format!(
            "mu={} alpha={} beta={}",
            join(p.mu().iter().copied()),
            join(p.alpha().transpose().iter().copied()).replace(' ', ""),
            join(p.beta().transpose().iter().copied()).replace(' ', "")
        ),
        Model::Bowsher(b) => format!("mu={} pi={} rho={} alpha={} beta={}", b.mu, b.pi, b.rho, b.alpha, b.beta),
    };
    println!("converged={} nll={} {}", result.converged, result.nll, summary.replace(", ", ","));
    Ok(())
}

/// Mean, sample standard deviation and quartiles; `None` below two values.
fn summarize(values: &[f64]) -> Option<[f64; 5]> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some([mean, std, gof::quantile(&sorted, 0.25), gof::quantile(&sorted, 0.5), gof::quantile(&sorted, 0.75)])
}

pub fn gof(a: &GofArgs) -> Result<()> {
    let loaded = a.data.load()?;
    let model = formats::read_params(&a.params)?;
    if model.dims() != loaded.series.dims() {
        bail!("parameters have {} dimensions but the data has {}", model.dims(), loaded.series.dims());
    }
    let rescaled = gof::rescale_times(&model, &loaded.series, loaded.calendar.as_ref())?;

    let mut table = String::from(
        "[summary]\ndimension,label,events,ks_statistic,p_value,duration_mean,duration_std,duration_q1,duration_median,duration_q3\n",
    );
    let mut qq = String::from("[qq]\ndimension,theoretical,empirical\n");
    for (d, times) in rescaled.iter().enumerate() {
        let durations = gof::durations(times);
        let ks: Option<KsResult> = gof::ks_exp1(&durations).ok();
        let ks_cols = ks.map_or("unavailable,unavailable".to_string(), |k| format!("{},{}", k.statistic, k.p_value));
        let stat_cols = summarize(&durations)
            .map_or(vec!["unavailable".to_string(); 5], |s| s.iter().map(f64::to_string).collect())
            .join(",");
        let _ = writeln!(table, "{d},{},{},{ks_cols},{stat_cols}", loaded.labels[d], times.len());
        if let Ok(points) = gof::qq_points(&durations) {
            for (x, y) in points {
                let _ = writeln!(qq, "{d},{x},{y}");
            }
        }
        match ks {
            Some(k) => println!("dimension={d} label={} n={} ks={} p_value={}", loaded.labels[d], k.n, k.statistic, k.p_value),
            None => println!("dimension={d} label={} n={} ks=unavailable", loaded.labels[d], durations.len()),
        }
    }
    table.push('\n');
    table.push_str(&qq);

    let mut inputs: Vec<_> = a.data.inputs().into_iter().map(|(r, p)| (r, p.to_path_buf())).collect();
    inputs.push(("params", a.params.clone()));
    let meta = Metadata { command: "gof", inputs, seed: None, config: format!("{a:#?}") };
    write_with_sidecar(&a.out, &table, &meta)
}

fn parse_coord(raw: &str, dims: usize) -> Result<(usize, usize)> {
    let (i, j) = raw.split_once(',').ok_or_else(|| anyhow!("coordinate `{raw}` must look like row,col"))?;
    let (i, j): (usize, usize) = (i.trim().parse()?, j.trim().parse()?);
    if i >= dims || j >= dims {
        bail!("coordinate ({i},{j}) is outside the {dims}x{dims} decay matrix");
    }
    Ok((i, j))
}

fn grid(lo: f64, hi: f64, steps: usize, log: bool) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| {
            let f = k as f64 / (steps - 1) as f64;
            if log {
                (lo.ln() + f * (hi.ln() - lo.ln())).exp()
            } else {
                lo + f * (hi - lo)
            }
        })
        .collect()
}

pub fn landscape(a: &LandscapeArgs) -> Result<()> {
    let loaded = a.data.load()?;
    let Model::Hawkes(params) = formats::read_params(&a.params)? else {
        bail!("landscapes are defined for the Hawkes model only");
    };
    if params.dims() != loaded.series.dims() {
        bail!("parameters have {} dimensions but the data has {}", params.dims(), loaded.series.dims());
    }
    if a.steps == 0 {
        bail!("--steps must be at least 1");
    }
    let ca = parse_coord(&a.a, params.dims())?;
    let cb = parse_coord(&a.b, params.dims())?;
    if ca == cb {
        bail!("the two grid coordinates must differ");
    }
    let (lo_a, hi_a) = parse_range(&a.range_a)?;
    let (lo_b, hi_b) = parse_range(&a.range_b)?;

    let mut out = format!("# a=beta[{}][{}] b=beta[{}][{}]\nbeta_a,beta_b,nll\n", ca.0, ca.1, cb.0, cb.1);
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for &va in &grid(lo_a, hi_a, a.steps, a.log) {
        for &vb in &grid(lo_b, hi_b, a.steps, a.log) {
            let mut beta = params.beta().clone();
            beta[ca] = va;
            beta[cb] = vb;
            let p = params.with_beta(beta)?;
            let value = match &loaded.calendar {
                Some(cal) => nll_daygap(&p, &loaded.series, cal),
                None => nll(&p, &loaded.series),
            }
            .unwrap_or(f64::INFINITY);
            if value < best.2 {
                best = (va, vb, value);
            }
            let _ = writeln!(out, "{va},{vb},{value}");
        }
    }
    let _ = writeln!(out, "# minimum beta_a={} beta_b={} nll={}", best.0, best.1, best.2);

    let mut inputs: Vec<_> = a.data.inputs().into_iter().map(|(r, p)| (r, p.to_path_buf())).collect();
    inputs.push(("params", a.params.clone()));
    let meta = Metadata { command: "landscape", inputs, seed: None, config: format!("{a:#?}") };
    write_with_sidecar(&a.out, &out, &meta)?;
    println!("minimum beta_a={} beta_b={} nll={}", best.0, best.1, best.2);
    Ok(())
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let loaded = a.data.load()?;
    let mut out = String::from("dimension,label,count,mean_min,std_min,q1_min,median_min,q3_min\n");
    for d in 0..loaded.series.dims() {
        let label = &loaded.labels[d];
        match gof::interarrival_stats(&loaded.series, d) {
            Ok(s) => {
                let cols = [s.mean, s.std, s.q1, s.q2, s.q3].map(|v| (v / MINUTE).to_string()).join(",");
                let _ = writeln!(out, "{d},{label},{},{cols}", s.count);
            }
            Err(_) => {
                let _ = writeln!(out, "{d},{label},{},{}", loaded.series.len(d), ["unavailable"; 5].join(","));
            }
        }
    }
    let inputs = a.data.inputs().into_iter().map(|(r, p)| (r, p.to_path_buf())).collect();
    let meta = Metadata { command: "stats", inputs, seed: None, config: format!("{a:#?}") };
    write_with_sidecar(&a.out, &out, &meta)?;
    print!("{out}");
    Ok(())
}
