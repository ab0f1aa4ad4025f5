use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn orbitgrowth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitgrowth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &TempDir, text: &str) -> String {
    let path = dir.path().join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Runs with json output into `dir` and returns the exit code and the report.
fn run_json(dir: &Path, args: &[&str]) -> (i32, Value) {
    let out_dir = dir.to_str().unwrap();
    let mut all = vec!["run", "--out", out_dir, "--format", "json,csv"];
    all.extend_from_slice(args);
    let out = orbitgrowth(&all);
    let text = std::fs::read_to_string(dir.join("report.json"))
        .unwrap_or_else(|_| panic!("no report written: {}", String::from_utf8_lossy(&out.stderr)));
    (code(&out), serde_json::from_str(&text).unwrap())
}

fn checks<'a>(report: &'a Value, name: &str) -> Vec<&'a Value> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"] == name)
        .collect()
}

fn sup_verdict(report: &Value) -> &Value {
    report["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["epsilon"].is_null())
        .expect("supremum verdict")
}

#[test]
fn json_reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "suite = \"psi-embedding\"\npairs = 30\nseed = 11\n");
    for sub in ["a", "b"] {
        let out = orbitgrowth(&[
            "run",
            "--config",
            &config,
            "--out",
            dir.path().join(sub).to_str().unwrap(),
            "--format",
            "json",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a/report.json")).unwrap();
    let b = std::fs::read(dir.path().join("b/report.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_config_keys_exit_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "suite = \"growth\"\nepsilon = [\"1/2\"]\n");
    let out = orbitgrowth(&["run", "--config", &config]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `epsilon`"));
}

#[test]
fn increasing_schedule_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "suite = \"growth\"\nepsilons = [\"1/4\", \"1/2\"]\n");
    assert_eq!(code(&orbitgrowth(&["run", "--config", &config])), 2);
}

#[test]
fn identity_growth_is_bounded() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "suite = \"growth\"\n[system]\nkind = \"identity\"\nresolution = 10\n",
    );
    let (exit, report) = run_json(dir.path(), &["--config", &config]);
    assert_eq!(exit, 0);
    assert_eq!(report["system"], "identity-10");
    assert_eq!(sup_verdict(&report)["class"]["family"]["family"], "Bounded");
    assert!(!checks(&report, "greedy-bracket").is_empty());
}

#[test]
fn subshift_example_reproduces_log_2() {
    let dir = TempDir::new().unwrap();
    let (exit, report) = run_json(dir.path(), &["--suite", "subshift-example"]);
    assert_eq!(exit, 0);
    let formula = checks(&report, "span-formula");
    assert!(!formula.is_empty());
    assert!(formula.iter().all(|c| c["pass"] == true));
    assert!(checks(&report, "word-count").iter().all(|c| c["pass"] == true));
    let family = &sup_verdict(&report)["class"]["family"];
    assert_eq!(family["family"], "Exp");
    let rate = family["param"].as_f64().unwrap();
    assert!((rate - 2f64.ln()).abs() <= 0.05, "rate {rate}");
}

#[test]
fn hyper_bounds_upper_instances_pass_on_doubling_10() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "suite = \"hyper-bounds\"\n[system]\nkind = \"doubling\"\nresolution = 10\n",
    );
    let (exit, report) = run_json(dir.path(), &["--config", &config]);
    let upper = checks(&report, "hyper-span-upper");
    assert_eq!(upper.len(), 20);
    assert!(upper.iter().all(|c| c["pass"] == true));
    assert!(checks(&report, "hyper-span-family").iter().all(|c| c["pass"] == true));
    let any_failed = report["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false);
    assert_eq!(exit, i32::from(any_failed));
}

#[test]
fn squaring_three_measures_gives_nine() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "suite = \"measure-squaring\"\nsizes = [3]\n");
    let (exit, report) = run_json(dir.path(), &["--config", &config]);
    assert_eq!(exit, 0);
    let size = checks(&report, "squared-size");
    assert_eq!(size.len(), 1);
    assert_eq!(size[0]["instance"], "|E_b| = 9 equals 3^2");
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut rows = csv::Reader::from_reader(csv.as_bytes());
    let nine = rows
        .records()
        .map(|r| r.unwrap())
        .any(|r| r[2] == *"measure" && r[5] == *"9");
    assert!(nine, "{csv}");
    let sets = report["measures"].as_array().unwrap();
    assert_eq!(sets[0]["measures"].as_array().unwrap().len(), 3);
    let first = &sets[0]["measures"][0];
    assert_eq!(
        first["support"].as_array().unwrap().len(),
        first["weights"].as_array().unwrap().len()
    );
    assert!(first["weights"][0].is_string());
}

#[test]
fn failed_checks_carry_witnesses() {
    let dir = TempDir::new().unwrap();
    let (exit, report) = run_json(dir.path(), &["--suite", "quotient"]);
    assert_eq!(exit, 1);
    let failed: Vec<&Value> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .collect();
    assert!(!failed.is_empty());
    for c in failed {
        assert_eq!(c["witness"]["type"], "points", "{c}");
        assert_eq!(c["witness"]["labels"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn capacity_errors_exit_2_and_still_write_the_report() {
    let dir = TempDir::new().unwrap();
    let out = orbitgrowth(&[
        "run",
        "--suite",
        "growth",
        "--exact-cap",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
        "--format",
        "json,csv",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("exact cap of 4"));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report["errors"][0].as_str().unwrap().contains("exact cap of 4"));
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with(
        "suite,system,level,epsilon,n,count_exact,count_greedy,class_family,class_param,check_name,check_pass\n"
    ));
}

#[test]
fn check_verb_takes_lemma_suites_only() {
    assert_eq!(code(&orbitgrowth(&["check", "--suite", "growth"])), 2);
    assert_eq!(
        code(&orbitgrowth(&[
            "check",
            "--suite",
            "subshift-example",
            "--format",
            "csv"
        ])),
        0
    );
    assert_eq!(code(&orbitgrowth(&["run", "--suite", "no-such-suite"])), 2);
}

#[test]
fn zoo_list_names_every_kind() {
    let out = orbitgrowth(&["zoo", "list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for kind in [
        "identity",
        "rotation",
        "doubling",
        "morse-smale",
        "full-shift",
        "single-one",
    ] {
        assert!(text.lines().any(|l| l.starts_with(kind)), "{kind} missing");
    }
}

#[test]
fn report_diff_compares_rows() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_json(&a, &["--suite", "growth"]);
    run_json(&b, &["--suite", "growth", "--seed", "3"]);
    let same = orbitgrowth(&[
        "report",
        "diff",
        a.join("report.json").to_str().unwrap(),
        a.join("report.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&same), 0);
    assert!(same.stdout.is_empty());
    let other = orbitgrowth(&[
        "report",
        "diff",
        a.join("report.json").to_str().unwrap(),
        b.join("report.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&other), 1);
    assert!(String::from_utf8_lossy(&other.stdout).starts_with("config hash"));
}

#[test]
fn shipped_configs_resolve() {
    use orbitgrowth_cli::config::{ConfigFile, ExperimentConfig, Overrides};
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let file = ConfigFile::load(&path).unwrap();
            ExperimentConfig::resolve(file, &Overrides::default())
                .unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 7);
}
