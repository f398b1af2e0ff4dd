use std::process::{Command, Output};

fn rdt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdt"))
        .args(args)
        .env_remove("RDT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn pkn_grid_contains_known_rows() {
    let o = rdt(&["pkn", "--n-max", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,n,p,p_float,lower_bound,equality"));
    assert!(out.lines().any(|l| l.starts_with("2,3,1/4,")));
    assert!(out.lines().any(|l| l.starts_with("2,4,5/9,")));
    assert_eq!(out.lines().count(), 1 + (2..=7).sum::<usize>());
}

#[test]
fn pkn_single_cells() {
    let out = stdout(&rdt(&["pkn", "--k", "1", "--n", "10"]));
    assert!(out.contains("1,10,9/2,4.5,9/2,true"));
    let out = stdout(&rdt(&["pkn", "--k", "0", "--n", "3"]));
    assert!(out.contains("0,3,inf,"));
}

#[test]
fn pkn_float_mode_keeps_exact_column_empty() {
    let out = stdout(&rdt(&["pkn", "--k", "2", "--n", "4", "--mode", "float"]));
    let row = out.lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[2], "");
    let x: f64 = cells[3].parse().unwrap();
    assert!((x - 5.0 / 9.0).abs() < 1e-10);
    assert_eq!(cells[4], "1/2");
}

#[test]
fn pkn_json_is_versioned() {
    let v = json(&rdt(&["pkn", "--k", "2", "--n", "3", "--format", "json"]));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["rows"][0]["p"], "1/4");
}

#[test]
fn bounds_majority() {
    let o = rdt(&["bounds", "--k", "2", "--n", "3", "--dmax", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let header = "d,c1_lower,c0_lower,scalar_lower,phi_upper,psi_upper,lambda_lower,lambda_upper";
    assert!(out.lines().any(|l| l == header));
    assert!(out
        .lines()
        .any(|l| l == "2,25/4,25/4,25/4,64/9,64/9,5/2,8/3"));
    assert!(out.contains("lambda_lower=5/2 (2.5)"));
}

#[test]
fn bounds_generic_variant() {
    let out = stdout(&rdt(&[
        "bounds",
        "--k",
        "2",
        "--n",
        "4",
        "--dmax",
        "1",
        "--generic-p",
    ]));
    assert!(out.contains("p_variant=generic"));
    assert!(out.lines().any(|l| l.starts_with("1,3/1,")));
}

#[test]
fn bounds_andor_rate() {
    let v = json(&rdt(&["bounds", "--andor", "--n", "2", "--format", "json"]));
    let lambda = v["lambda_per_two_levels"].as_f64().unwrap();
    assert!((lambda - 2.843070).abs() < 1e-6);
    assert_eq!(v["closed_forms_consistent"], true);
}

#[test]
fn bounds_flags_printed_closed_form() {
    let o = rdt(&["bounds", "--k", "2", "--n", "3", "--thm3-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("consistent=false"));
}

#[test]
fn simulate_depth_two() {
    let o = rdt(&[
        "simulate", "--k", "2", "--n", "3", "--depth", "2", "--trials", "100000", "--seed", "7",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["report"]["exact_mean"], "64/9");
    let mean = v["report"]["mean"].as_f64().unwrap();
    assert!((mean - 64.0 / 9.0).abs() < 0.07);
}

#[test]
fn simulate_depth_zero() {
    let v = json(&rdt(&["simulate", "--depth", "0", "--trials", "10"]));
    assert_eq!(v["report"]["mean"], 1.0);
}

#[test]
fn simulate_andor() {
    let o = rdt(&[
        "simulate", "--andor", "--n", "2", "--depth", "4", "--trials", "100000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["passed"], true);
}

#[test]
fn simulate_is_reproducible_and_honours_env_seed() {
    let dir = std::env::temp_dir().join(format!("rdt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    let args = [
        "simulate", "--depth", "3", "--trials", "5000", "--seed", "11", "--out",
    ];
    for path in [&a, &b] {
        let mut full = args.to_vec();
        full.push(path.to_str().unwrap());
        assert_eq!(rdt(&full).status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let flag = stdout(&rdt(&[
        "simulate", "--depth", "3", "--trials", "5000", "--seed", "11",
    ]));
    let env = Command::new(env!("CARGO_BIN_EXE_rdt"))
        .args([
            "simulate", "--depth", "3", "--trials", "5000", "--seed", "99",
        ])
        .env("RDT_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(flag.as_bytes(), env.stdout.as_slice());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_suites_pass() {
    let o = rdt(&["verify", "--n-max", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(!out.contains("FAIL"));
    assert!(out.contains("PASS pkn/a"));

    let o = rdt(&["verify", "--n-max", "5", "--with-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS oracle/slice"));
}

#[test]
fn verify_reports_printed_form_as_warning() {
    let o = rdt(&["verify", "--thm3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let warn = out.lines().find(|l| l.starts_with("WARN thm3")).unwrap();
    assert!(warn.contains("k=2 n=3 printed=3.322876"));
}

#[test]
fn oracle_values() {
    let v = json(&rdt(&["oracle", "--formula", "const:2:3:1"]));
    assert_eq!(v["value"], "8/3");
    assert_eq!(v["root_query"], 0);
    let v = json(&rdt(&[
        "oracle",
        "--formula",
        "const:2:3:1",
        "--c0",
        "1",
        "--c1",
        "-1/4",
    ]));
    assert_eq!(v["value"], "1/1");
    let v = json(&rdt(&[
        "oracle",
        "--formula",
        "const:1:3:1",
        "--dist",
        "slice:1",
    ]));
    assert_eq!(v["value"], "2/1");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["pkn"],
        vec!["pkn", "--k", "5", "--n", "3"],
        vec!["bounds", "--k", "3", "--n", "3"],
        vec!["bounds", "--n", "3"],
        vec!["simulate", "--trials", "10"],
        vec!["simulate", "--depth", "1", "--trials", "0"],
        vec!["oracle", "--formula", "const:2:3:3"],
        vec!["oracle", "--formula", "const:2:3:1", "--dist", "bogus"],
        vec!["frobnicate"],
    ] {
        assert_eq!(rdt(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn simulate_mismatch_exits_with_one() {
    let o = rdt(&["simulate", "--depth", "2", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["passed"], false);
}
