use std::process::{Command, Output};

fn qfactor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfactor"))
        .args(args)
        .env_remove("QFACTOR_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn ensemble_smallest_window() {
    let o = qfactor(&["ensemble", "--j", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x,y,n_k,pi_x,pi_y\n2,2,4,1,1\n2,3,6,1,2\n");
}

#[test]
fn ensemble_summary_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f304.csv");
    let o = qfactor(&["ensemble", "--j", "304", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let err = stderr(&o);
    assert!(err.contains("size=6027"), "{err}");
    assert!(err.contains("estimate=6066.01"), "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 6028);
    assert!(text.contains("\n1019,3947,4021993,171,548\n"));
}

#[test]
fn budget_guard_and_argument_errors() {
    let o = qfactor(&["ensemble", "--j", "304", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("capacity"));
    let o = qfactor(&["ensemble", "--j", "62", "--N", "91301"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qfactor(&["ensemble"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qfactor(&[
        "predict",
        "--N",
        "91301",
        "--zeros",
        "/nonexistent/zeros.txt",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invert_examples() {
    let o = qfactor(&["invert", "--N", "4021993", "--numerator", "93708"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1019 3947\n");
    let o = qfactor(&["invert", "--N", "4012009", "--numerator", "92416"]);
    assert_eq!(stdout(&o), "2003 2003\n");
    let o = qfactor(&["invert", "--j", "304", "--numerator", "92416"]);
    assert_eq!(stdout(&o), "2003 2003\n");
    let o = qfactor(&["invert", "--N", "4021993", "--numerator", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let o = qfactor(&["invert", "--N", "4021993", "--numerator", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn predict_series_is_deterministic() {
    let a = qfactor(&["predict", "--N", "91301"]);
    let b = qfactor(&["predict", "--N", "91301"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    let head = lines.next().unwrap();
    assert!(head.starts_with("# N=91301 j=62 alpha1="), "{head}");
    assert!(head.contains("zeros=30 domain_factor=10"));
    assert_eq!(lines.next().unwrap(), "x,pi_exact,pi_sim,R,Li");
    assert_eq!(lines.count(), 10);

    let o = qfactor(&["predict", "--j", "139"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("# N=635209 j=139 "));
    let o = qfactor(&["predict", "--N", "4012009", "--p1", "2", "--p2", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 48);
}

#[test]
fn fit_csv_and_json() {
    let o = qfactor(&["fit", "--j", "304"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "4012009");
    assert!((row[2].parse::<f64>().unwrap() - 2.2904).abs() < 1e-4);
    assert_eq!(row[8], "empirical");
    let o = qfactor(&[
        "fit",
        "--j",
        "304",
        "--mode",
        "asymptotic",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kappa_mode"], "asymptotic");
    assert!((v["alpha2"].as_f64().unwrap() - 1.1608).abs() < 1e-4);
    // beyond the budget the asymptotic mode is chosen automatically
    let o = qfactor(&["fit", "--j", "304", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(",asymptotic"));
}

#[test]
fn scan_and_qc_at_62() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let o = qfactor(&["scan", "--N", "85849", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "E_root,re_ratio,im_ratio,residual_at_rho_m"
    );
    let e: f64 = lines
        .next()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((e - 0.6080519963).abs() < 1e-8);
    assert!(lines.next().is_none());
    let rep = std::fs::read_to_string(&report).unwrap();
    assert!(rep.starts_with("E_k,nearest_root,distance\n"));

    let o = qfactor(&[
        "qc",
        "--N",
        "85849",
        "--energy",
        "0.6080519963",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["re_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!(v["im_ratio"].as_f64().unwrap().abs() < 1e-8);
    assert!((v["context"]["q_m"].as_f64().unwrap() - 36.1855).abs() < 1e-4);

    // the only root lies below 0.61
    let o = qfactor(&["scan", "--N", "85849", "--e-lo", "0.61", "--grid", "50"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stats_and_spectrum_exports() {
    let o = qfactor(&["stats", "--j", "62", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["x"], 2);
    assert_eq!(v[0]["observed"], 375);
    assert!(stderr(&o).contains("correlation="));

    let o = qfactor(&["spectrum", "--j", "62", "--zeros-count", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# j=62 zeros=5");
    assert_eq!(lines.next().unwrap(), "x,y,n_k,E,u,E_regular,eps_fl");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "2");
    assert_eq!(first[6], "");
    let later = text.lines().find(|l| l.starts_with("3,")).unwrap();
    assert!(later.split(',').nth(6).unwrap().parse::<f64>().is_ok());
}

#[test]
fn cache_directory_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_qfactor"))
            .args(args)
            .env("QFACTOR_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    // pi(N/2) and pi(N/3) lie beyond the sieve and go through the cache
    let o = run(&["qc", "--N", "85849", "--energy", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let file = dir.path().join("pi_cache.tsv");
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.contains("42924\t"), "{text}");
    let o = run(&["cache"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("entries"));
    let o = run(&["cache", "--clear"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!file.exists());
    let o = qfactor(&["cache"]);
    assert_eq!(o.status.code(), Some(1));
}
