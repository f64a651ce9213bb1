use std::process::{Command, Output};

fn simred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simred")).args(args).env_remove("SIMRED_SEED").output().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn potential_listing_is_x6_only() {
    let o = simred(&["list-catalog", "--kind", "potential"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let ids: Vec<_> = v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["X6"]);
}

#[test]
fn listing_filters_by_parameters() {
    let v = json(&simred(&["list-catalog", "--kind", "solution", "--n", "1/2", "--C", "2"]));
    let ids: Vec<_> = v.as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"nc-c2") && ids.contains(&"dipole") && !ids.contains(&"nc-c53"), "{ids:?}");
    assert!(v.as_array().unwrap().iter().all(|e| e["verified_against_pde"] == true));
}

#[test]
fn trivial_solution_verifies() {
    let o = simred(&["verify-solution", "--id", "trivial-potential", "--tol", "1e-9"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    for key in ["subject", "command", "params", "tolerance", "max_residual", "argmax", "seed", "pass", "version"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["pass"], true);
    assert_eq!(v["command"], "verify-solution");
}

#[test]
fn ansatz_non_solution_exits_one() {
    let o = simred(&["verify-solution", "--id", "ansatz:u=x+t", "--n", "2", "--C", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["pass"], false);
    assert!(!o.stderr.is_empty());
}

#[test]
fn ansatz_solution_passes() {
    // (u^2)_xx = 0 and u_t = 0
    let o = simred(&["verify-solution", "--id", "ansatz:u=sqrt(x)", "--n", "2", "--C", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["verify-solution", "--id", "unknown-family"][..],
        &["verify-solution", "--id", "ansatz:u=exp(", "--n", "2", "--C", "0"],
        &["check-symmetry", "--generator", "V4p", "--id", "exp-i2"],
        &["list-catalog", "--kind", "bogus"],
        &["reduce", "--id", "row9"],
        &["cross-validate", "--cells", "100"],
        &["frobnicate"],
    ] {
        let o = simred(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn every_subcommand_has_dry_run() {
    for args in [
        &["list-catalog"][..],
        &["verify-solution", "--id", "dipole"],
        &["check-symmetry", "--generator", "V1", "--id", "dipole"],
        &["check-determining", "--generator", "nc-gen-c2"],
        &["check-potential"],
        &["reduce", "--id", "row3"],
        &["check-first-integral", "--integral", "row2-h"],
        &["cross-validate"],
        &["check-conservation", "--id", "nc-cm1"],
    ] {
        let mut a = args.to_vec();
        a.push("--dry-run");
        let o = simred(&a);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(json(&o)["dry_run"], true, "{args:?}");
    }
}

#[test]
fn reports_are_byte_identical_for_the_same_seed() {
    let args = ["check-determining", "--generator", "nc-gen-c53", "--seed", "77"];
    let a = simred(&args);
    let b = simred(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 77);
    let c = simred(&["check-determining", "--generator", "nc-gen-c53", "--seed", "78"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_defaults_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_simred"))
        .args(["verify-solution", "--id", "exp-i2"])
        .env("SIMRED_SEED", "4242")
        .output()
        .unwrap();
    assert_eq!(json(&o)["seed"], 4242);
}

#[test]
fn reduce_writes_trajectory_csv_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = dir.path().join("report.json");
    let o = simred(&["reduce", "--id", "nc-c2", "--csv", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("z,w,w_prime\n"));
    assert!(text.lines().count() > 3);
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["pass"], true);
}

#[test]
fn floats_use_seventeen_significant_digits() {
    let o = simred(&["check-conservation", "--id", "dipole"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let line = text.lines().find(|l| l.contains("\"tolerance\"")).unwrap();
    assert!(line.contains("9.9999999999999998e-13"), "{line}");
}

#[test]
fn symmetry_and_first_integral_commands_pass() {
    for args in [
        &["check-symmetry", "--generator", "V4p", "--id", "dipole@c73", "--eps", "-0.5,0.5"][..],
        &["check-first-integral", "--integral", "row1-y"],
        &["check-first-integral", "--integral", "row2-y"],
        &["check-potential", "--id", "nc-c2@tanh"],
    ] {
        let o = simred(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stdout));
    }
}
