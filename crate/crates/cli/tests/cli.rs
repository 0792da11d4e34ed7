use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hawkes_core::likelihood::nll;
use hawkes_core::ExpHawkesParams;

const TWO_DIM: &str = "\
mu = 0.1, 0.2
alpha[0] = 0.5, 0
alpha[1] = 0.4, 0.3
beta[0] = 0.3, 1
beta[1] = 0.2, 0.2
";

fn hawkes(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hawkes")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = hawkes(args, dir);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

/// Value of `key = value` in the first section containing it.
fn field(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.split_once('=').filter(|(k, _)| k.trim() == key).map(|(_, v)| v.trim().to_string()))
        .unwrap_or_else(|| panic!("no `{key}` in report"))
}

fn numbers(raw: &str) -> Vec<f64> {
    raw.split(',').map(|v| v.trim().parse().unwrap()).collect()
}

#[test]
fn simulate_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "p.txt", TWO_DIM);
    ok(&["simulate", "--params", "p.txt", "--seed", "1", "--horizon", "10000", "--out", "a.csv"], d);
    ok(&["simulate", "--params", "p.txt", "--seed", "1", "--horizon", "10000", "--out", "b.csv"], d);
    assert_eq!(std::fs::read(d.join("a.csv")).unwrap(), std::fs::read(d.join("b.csv")).unwrap());
    let meta = read(d, "a.csv.meta");
    assert!(meta.contains("seed = 1"));
    assert!(meta.contains("input.params.sha256 = "));
    assert!(meta.contains("ChaCha20"));
}

#[test]
fn poisson_simulation_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stdout = ok(&["simulate", "--mu", "1", "--alpha", "0", "--beta", "1", "--seed", "3", "--horizon", "1000", "--out", "e.csv"], d);
    let n: f64 = stdout.split_whitespace().next().unwrap().trim_start_matches("events=").parse().unwrap();
    assert!((n - 1000.0).abs() < 4.0 * 1000f64.sqrt(), "{n} events");
}

#[test]
fn unstable_parameters_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = hawkes(&["simulate", "--mu", "0.1", "--alpha", "1.2", "--beta", "1", "--seed", "1", "--horizon", "100", "--out", "e.csv"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("spectral radius 1.2"), "{err}");
}

#[test]
fn fit_report_feeds_gof() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "p.txt", TWO_DIM);
    ok(&["simulate", "--params", "p.txt", "--seed", "2", "--horizon", "10000", "--out", "e.csv"], d);
    let stdout = ok(&["fit", "--events", "e.csv", "--out", "fit.txt"], d);
    assert!(stdout.starts_with("converged="));
    let report = read(d, "fit.txt");
    for key in ["nll", "converged", "mu_inv_minutes", "branching[0]", "branching[1]", "beta_inv_minutes[1]", "spectral_radius"] {
        field(&report, key);
    }
    assert!(report.contains("[trace]"));
    assert!(read(d, "fit.txt.meta").contains("input.events.sha256"));

    ok(&["gof", "--events", "e.csv", "--params", "fit.txt", "--out", "gof.txt"], d);
    let gof = read(d, "gof.txt");
    let rows: Vec<&str> = gof.lines().skip(2).take(2).collect();
    for row in rows {
        let p: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(p > 0.001, "{row}");
    }
    assert!(gof.contains("[qq]"));
}

#[test]
fn poisson_data_fits_near_zero_excitation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut alphas = Vec::new();
    for seed in ["5", "6", "7", "8"] {
        ok(&["simulate", "--mu", "0.5", "--alpha", "0", "--beta", "1", "--seed", seed, "--horizon", "20000", "--out", "e.csv"], d);
        ok(&["fit", "--events", "e.csv", "--out", "fit.txt"], d);
        alphas.push(numbers(&field(&read(d, "fit.txt"), "alpha[0]"))[0]);
    }
    alphas.sort_by(f64::total_cmp);
    assert!(0.5 * (alphas[1] + alphas[2]) < 0.05, "{alphas:?}");
    assert!(alphas[3] < 0.15, "{alphas:?}");
}

#[test]
fn poisson_params_fail_gof_on_hawkes_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--mu", "0.1", "--alpha", "0.7", "--beta", "0.5", "--seed", "4", "--horizon", "20000", "--out", "e.csv"], d);
    let rate = {
        let text = read(d, "e.csv");
        text.lines().filter(|l| !l.starts_with('#')).count() as f64 / 20000.0
    };
    write(d, "poisson.txt", &format!("mu = {rate}\nalpha[0] = 0\nbeta[0] = 1\n"));
    let stdout = ok(&["gof", "--events", "e.csv", "--params", "poisson.txt", "--out", "gof.txt"], d);
    let p: f64 = stdout.split("p_value=").nth(1).unwrap().trim().parse().unwrap();
    assert!(p < 1e-6, "p = {p}");
}

#[test]
fn gof_rejects_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "p.txt", TWO_DIM);
    ok(&["simulate", "--mu", "0.5", "--alpha", "0.2", "--beta", "1", "--seed", "5", "--horizon", "100", "--out", "e.csv"], d);
    let out = hawkes(&["gof", "--events", "e.csv", "--params", "p.txt", "--out", "g.txt"], d);
    assert!(!out.status.success());
}

#[test]
fn daygap_report_has_table_units() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&[
        "simulate", "--mu", "0.002", "--alpha", "0.5", "--beta", "0.01", "--seed", "7", "--days", "10", "--calendar-out", "cal.csv",
        "--out", "e.csv",
    ], d);
    ok(&["fit", "--events", "e.csv", "--calendar", "cal.csv", "--model", "daygap", "--out", "fit.txt"], d);
    let report = read(d, "fit.txt");
    let mu_inv = numbers(&field(&report, "mu_inv_minutes"))[0];
    let beta_inv = numbers(&field(&report, "beta_inv_minutes[0]"))[0];
    let mu = numbers(&field(&report, "mu"))[0];
    assert!((mu_inv - 1.0 / mu / 60.0).abs() < 1e-9 * mu_inv);
    assert!(beta_inv > 0.0);
    assert_eq!(field(&report, "model"), "hawkes");
    assert!(report.contains("model = daygap"));
}

#[test]
fn daygap_requires_calendar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--mu", "0.5", "--alpha", "0.2", "--beta", "1", "--seed", "5", "--horizon", "100", "--out", "e.csv"], d);
    assert!(!hawkes(&["fit", "--events", "e.csv", "--model", "daygap", "--out", "f.txt"], d).status.success());
}

#[test]
fn landscape_single_cell_matches_nll() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "p.txt", TWO_DIM);
    ok(&["simulate", "--params", "p.txt", "--seed", "8", "--horizon", "2000", "--out", "e.csv"], d);
    ok(&["landscape", "--events", "e.csv", "--params", "p.txt", "--a", "0,0", "--b", "1,1", "--range-a", "0.4:0.4", "--range-b", "0.25:0.25", "--steps", "1", "--out", "l.csv"], d);
    let grid = read(d, "l.csv");
    let rows: Vec<&str> = grid.lines().filter(|l| !l.starts_with('#') && !l.starts_with("beta_a")).collect();
    assert_eq!(rows.len(), 1);
    let value: f64 = rows[0].split(',').nth(2).unwrap().parse().unwrap();

    let series = hawkes_cli_events(&read(d, "e.csv"));
    let p = ExpHawkesParams::from_rows(vec![0.1, 0.2], &[vec![0.5, 0.0], vec![0.4, 0.3]], &[vec![0.4, 1.0], vec![0.2, 0.25]]).unwrap();
    let direct = nll(&p, &series).unwrap();
    assert!((value - direct).abs() <= 1e-12 * direct.abs(), "{value} vs {direct}");
}

fn hawkes_cli_events(text: &str) -> hawkes_core::EventSeries {
    let mut horizon = 0.0;
    let mut times = vec![Vec::new(), Vec::new()];
    for line in text.lines() {
        if let Some(h) = line.strip_prefix("# horizon=") {
            horizon = h.parse().unwrap();
        } else if !line.starts_with('#') && !line.starts_with("timestamp") {
            let (t, dim) = line.split_once(',').unwrap();
            times[dim.parse::<usize>().unwrap()].push(t.parse::<f64>().unwrap());
        }
    }
    hawkes_core::EventSeries::new(times, horizon).unwrap()
}

#[test]
fn landscape_grid_shape_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "p.txt",
        "mu = 0.02, 0.25\nalpha[0] = 0.3, 0.15\nalpha[1] = 0.01, 0.35\nbeta[0] = 1, 0.1\nbeta[1] = 0.1, 1\n",
    );
    ok(&["simulate", "--params", "p.txt", "--seed", "9", "--horizon", "3000", "--out", "e.csv"], d);
    ok(&["landscape", "--events", "e.csv", "--params", "p.txt", "--a", "0,0", "--b", "1,1", "--range-a", "0.1:3", "--range-b", "0.1:3", "--steps", "7", "--log", "--out", "l.csv"], d);
    let grid = read(d, "l.csv");
    assert_eq!(grid.lines().filter(|l| !l.starts_with('#') && !l.starts_with("beta_a")).count(), 49);
    assert!(grid.contains("# minimum"));
    let out = hawkes(&["landscape", "--events", "e.csv", "--params", "p.txt", "--a", "0,2", "--b", "1,1", "--range-a", "0.1:3", "--range-b", "0.1:3", "--out", "l2.csv"], d);
    assert!(!out.status.success());
}

#[test]
fn stats_marks_sparse_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "e.csv", "# horizon=400\n# dims=2\ntimestamp_seconds,dimension\n60,0\n180,0\n300,0\n50,1\n");
    let stdout = ok(&["stats", "--events", "e.csv", "--out", "s.csv"], d);
    let rows: Vec<&str> = stdout.lines().collect();
    assert_eq!(rows[1], "0,0,3,2,0,2,2,2");
    assert!(rows[2].starts_with("1,1,1,unavailable"));
}

#[test]
fn trade_file_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("timestamp,index,volume,flags\n");
    for day in 16..=18 {
        for k in 0..40 {
            let minute = 5 + k * 7;
            csv.push_str(&format!("2017-01-{day}T{:02}:{:02}:00Z,ITXEB,{},\n", 7 + minute / 60, minute % 60, 1e6 * (1 + k % 3) as f64));
            csv.push_str(&format!("2017-01-{day}T{:02}:{:02}:30Z,ITXES,5e6,\n", 7 + minute / 60, minute % 60));
        }
        csv.push_str(&format!("2017-01-{day}T18:00:00Z,ITXEB,1e6,\n"));
        csv.push_str(&format!("2017-01-{day}T09:00:10Z,ITXEB,1e6,roll\n"));
    }
    write(d, "trades.csv", &csv);
    let stdout = ok(&["stats", "--events", "trades.csv", "--out", "s.csv"], d);
    assert!(stdout.contains("0,ITXEB,120,"));
    assert!(stdout.contains("1,ITXES,120,"));

    ok(&["fit", "--events", "trades.csv", "--model", "daygap", "--out", "fit.txt"], d);
    let report = read(d, "fit.txt");
    assert_eq!(field(&report, "labels"), "ITXEB, ITXES");
    assert_eq!(field(&report, "trading_days"), "3");
    assert_eq!(field(&report, "dropped_outside_hours"), "3");

    let stdout = ok(&["stats", "--events", "trades.csv", "--index", "ITXEB", "--split", "by-volume-bin", "--bins", "1.5e6,2.5e6", "--out", "v.csv"], d);
    // 40 trades a day cycle through three volumes, 14/13/13 per day.
    let counts: Vec<&str> = stdout.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(counts, ["42", "39", "39"], "{stdout}");
}
