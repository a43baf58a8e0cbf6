use std::path::Path;
use std::process::{Command, Output};

use bellopt_cli::output::{csv_header, load_json, Payload};

fn bellopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellopt"))
        .args(args)
        .env_remove("BELLOPT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn lhv_bound_prints_one() {
    let o = bellopt(&["lhv-bound", "--c", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.000000");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["maximize", "--c", "-1", "--phi-plus"][..],
        &["maximize", "--c", "0"],
        &["maximize", "--c", "3", "--bogus"],
        &["maximize", "--c", "3", "--class", "r33"],
        &["maximize", "--c", "3", "--ratio", "0.5", "--phi-plus"],
        &["lhv-bound", "--c", "-2"],
        &["figure", "--id", "17"],
        &["sweep-c", "--from", "2", "--to", "1", "--step", "0.5"],
        &["maximize", "--c", "3", "--starts", "0"],
        &[] as &[&str],
    ] {
        let o = bellopt(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_3() {
    let o = bellopt(&["maximize", "--c", "3", "--class", "r10", "--starts", "3", "--out", "/nonexistent/dir/run.json"]);
    assert_eq!(o.status.code(), Some(3));
    let o = bellopt(&["lhv-bound", "--c", "1", "--config", "/nonexistent/bellopt.conf"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn maximize_emits_one_row_and_a_reloadable_record() {
    let dir = tempfile::tempdir().unwrap();
    let (json, csv) = (dir.path().join("run.json"), dir.path().join("run.csv"));
    let o = bellopt(&[
        "maximize", "--c", "3", "--phi-plus", "--class", "general", "--starts", "40", "--seed", "7", "--out", p(&json),
        "--csv", p(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let lines = csv_lines(&csv);
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], csv_header().join(","));
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells.len(), csv_header().len());
    assert_eq!(cells[2], "general");
    assert!(cells[4].is_empty());
    assert_eq!(cells[25], "7");

    let record = load_json(&json).unwrap();
    assert_eq!(record.seed, Some(7));
    let Payload::Records(rs) = &record.payload else {
        panic!("unexpected payload {:?}", record.payload);
    };
    assert!((rs[0].best_value - 1.004).abs() < 5e-4, "{}", rs[0].best_value);
    assert_eq!(cells[3].parse::<f64>().unwrap(), format!("{:.8e}", rs[0].best_value).parse::<f64>().unwrap());

    // reloading and re-serializing changes nothing
    let again = dir.path().join("again.json");
    bellopt_cli::output::emit_json(&record, &again).unwrap();
    assert_eq!(load_json(&again).unwrap(), record);
    assert_eq!(std::fs::read_to_string(&again).unwrap(), std::fs::read_to_string(&json).unwrap());
}

#[test]
fn identical_invocations_reproduce() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let (json, csv) = (dir.path().join(format!("{tag}.json")), dir.path().join(format!("{tag}.csv")));
        let o = bellopt(&[
            "sweep-ratio", "--c", "3", "--from", "0.8", "--to", "1.0", "--step", "0.1", "--starts", "8", "--seed", "5",
            "--out", p(&json), "--csv", p(&csv),
        ]);
        assert_eq!(o.status.code(), Some(0));
        (load_json(&json).unwrap(), std::fs::read_to_string(&csv).unwrap())
    };
    let (a, csv_a) = run("a");
    let (b, csv_b) = run("b");
    assert_eq!(csv_a, csv_b);
    let mut b_cmd = b.clone();
    b_cmd.command = a.command.clone();
    assert!(a.reproduces(&b_cmd));
}

#[test]
fn sweep_rows_follow_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = bellopt(&[
        "sweep-c", "--from", "2", "--to", "4", "--step", "0.5", "--class", "r11", "--ratio", "0.7", "--starts", "5",
        "--csv", p(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let lines = csv_lines(&csv);
    assert_eq!(lines.len(), 1 + 5);
    let cs: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(cs, ["2", "2.5", "3", "3.5", "4"]);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(1) == Some("0.7")));
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bellopt.conf");
    std::fs::write(&conf, "seed = 21\nstarts = 3\n").unwrap();
    let json = dir.path().join("r.json");
    let seed_of = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_bellopt"));
        cmd.args(["maximize", "--c", "2", "--class", "r10", "--config", p(&conf), "--out", p(&json)])
            .args(extra)
            .env_remove("BELLOPT_SEED");
        if let Some(v) = env {
            cmd.env("BELLOPT_SEED", v);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        let r = load_json(&json).unwrap();
        (r.seed.unwrap(), r.config.unwrap().starts)
    };
    assert_eq!(seed_of(&[], None), (21, 3));
    assert_eq!(seed_of(&[], Some("11")), (11, 3));
    assert_eq!(seed_of(&["--seed", "4"], Some("11")), (4, 3));
    assert_eq!(seed_of(&["--starts", "2"], None), (21, 2));
}

#[test]
fn efficiency_reports_a_threshold() {
    let o = bellopt(&["efficiency", "--c", "3", "--class", "general", "--starts", "20", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let eta: f64 = out
        .split_whitespace()
        .find_map(|t| t.strip_prefix("eta_crit="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(eta > 0.0 && eta < 1.0, "{out}");
}

#[test]
fn figure_emits_plot_ready_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig6.csv");
    let o = bellopt(&[
        "figure", "--id", "6", "--from", "0.9", "--to", "1.0", "--step", "0.1", "--starts", "5", "--out", p(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = csv_lines(&csv);
    // two ratios, six projective classes each
    assert_eq!(lines.len(), 1 + 12);
    assert!(lines[1..].iter().all(|l| l.split(',').next() == Some("3")));
}

#[test]
fn verify_passes() {
    let o = bellopt(&["verify", "--c", "3", "--starts", "50", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
