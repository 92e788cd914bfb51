use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use streamlearn_cli::{
    cmd_list, demo_dir, parse_config, CliError, RunArgs, EXIT_CONFIG, EXIT_JOB_FAILURE, EXIT_OK,
};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_streamlearn"));
    c.env_remove("AWESOME_OL_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const MINIMAL: &str =
    r#"{"models":["MajorityClass"],"streams":["sea"],"n_samples":1000,"n_pretrain":100}"#;

#[test]
fn flags_override_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"models":["KNN"],"streams":["sea"],"n_samples":500,"n_pretrain":50,"seed":1}"#,
    );
    let args = RunArgs {
        config: Some(cfg),
        seed: Some(7),
        models: Some(vec!["HoeffdingTree".into(), "OGD".into()]),
        jobs: 1,
        ..Default::default()
    };
    let eff = parse_config(&args, None).unwrap();
    assert_eq!(eff.config.seed, 7);
    assert_eq!(eff.config.models.len(), 2);
    assert_eq!(eff.config.n_samples, 500);
    assert_eq!(eff.out_dir, PathBuf::from("results"));
}

#[test]
fn minimal_file_gets_defaults_and_out_dir_fallbacks() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", MINIMAL);
    let args = RunArgs {
        config: Some(cfg),
        jobs: 1,
        ..Default::default()
    };
    let eff = parse_config(&args, Some("from-env".into())).unwrap();
    assert_eq!(eff.config.n_rounds, 1);
    assert_eq!(eff.config.seed, 42);
    assert_eq!(eff.config.strategy.name, "supervised");
    assert_eq!(eff.out_dir, PathBuf::from("from-env"));
    let args = RunArgs {
        out: Some("flag".into()),
        ..args
    };
    assert_eq!(
        parse_config(&args, Some("from-env".into()))
            .unwrap()
            .out_dir,
        PathBuf::from("flag")
    );
}

#[test]
fn config_errors_name_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let check = |text: &str, needle: &str| {
        let cfg = write(tmp.path(), "bad.json", text);
        let args = RunArgs {
            config: Some(cfg),
            jobs: 1,
            ..Default::default()
        };
        match parse_config(&args, None) {
            Err(CliError::Config(msg)) => assert!(msg.contains(needle), "`{msg}` lacks `{needle}`"),
            other => panic!("expected config error, got {other:?}"),
        }
    };
    check(
        r#"{"models":["KNN"],"streams":["sea"],"n_samples":1000,"n_pretrain":1000}"#,
        "n_pretrain < n_samples",
    );
    check(
        r#"{"models":["KNN"],"streams":["sea"],"n_samples":10,"n_pretrain":1,"bogus":1}"#,
        "bogus",
    );
    check(
        "{\n  \"models\": [\"KNN\"],\n  \"n_samples\": 10,,\n}",
        "line 3",
    );
    check(
        r#"{"models":["KNN"],"n_samples":10,"n_pretrain":1}"#,
        "streams",
    );
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write(tmp.path(), "good.json", MINIMAL);
    let out = tmp.path().join("ok");
    let o = run(&[
        "run",
        "--config",
        good.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "summary.csv",
        "comparison.svg",
        "manifest.txt",
        "records/0000_MajorityClass_sea_r0.csv",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }

    // Unknown stream: configuration error and nothing written.
    let bad_out = tmp.path().join("never");
    let o = run(&[
        "run",
        "--config",
        good.to_str().unwrap(),
        "--streams",
        "nope",
        "--out",
        bad_out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("available"));
    assert!(!bad_out.exists());

    // A job that fails at runtime: the CSV stream is shorter than the pretraining size.
    let csv = write(
        tmp.path(),
        "tiny.csv",
        "a,b,label\n0,1,0\n1,0,1\n0.5,0.5,0\n",
    );
    let failing = write(
        tmp.path(),
        "fail.json",
        &format!(
            r#"{{"models":["KNN"],"streams":[{{"name":"csv","params":{{"path":{:?}}}}}],"n_samples":100,"n_pretrain":10}}"#,
            csv.to_str().unwrap()
        ),
    );
    let fail_out = tmp.path().join("fail");
    let o = run(&[
        "run",
        "--config",
        failing.to_str().unwrap(),
        "--out",
        fail_out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(EXIT_JOB_FAILURE),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let summary = std::fs::read_to_string(fail_out.join("summary.csv")).unwrap();
    assert!(summary.contains("failed"), "{summary}");
    let manifest = std::fs::read_to_string(fail_out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("status=failed"));

    let o = run(&["run", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn env_var_sets_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let good = write(tmp.path(), "good.json", MINIMAL);
    let dir = tmp.path().join("env-out");
    let o = bin()
        .args(["run", "--config", good.to_str().unwrap()])
        .env("AWESOME_OL_OUT", &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(dir.join("manifest.txt").is_file());
}

#[test]
fn list_is_stable_and_complete() {
    let a = run(&["list"]);
    let b = run(&["list"]);
    assert_eq!(a.status.code(), Some(EXIT_OK));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text, cmd_list());
    let ht = text
        .lines()
        .find(|l| l.trim_start().starts_with("HoeffdingTree"))
        .unwrap();
    assert!(
        ht.contains("classification") && ht.contains("multiclass"),
        "{ht}"
    );
    let strategies: Vec<&str> = text.split("strategies:").nth(1).unwrap().lines().collect();
    assert!(strategies
        .iter()
        .any(|l| l.trim_start().starts_with("VariableUncertainty")));
}

#[test]
fn compare_renders_from_record_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = run(&[
        "run",
        "--models",
        "KNN,HoeffdingTree",
        "--streams",
        "sea",
        "--samples",
        "600",
        "--pretrain",
        "100",
        "--rounds",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    let svg = tmp.path().join("cmp.svg");
    let o = run(&[
        "compare",
        out.join("records").to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    // Same records and window as the run, so the plot matches byte for byte
    // apart from the title.
    let ours = std::fs::read_to_string(&svg).unwrap();
    let run_svg = std::fs::read_to_string(out.join("comparison.svg")).unwrap();
    assert_eq!(
        ours.replace("Prequential comparison", "T"),
        run_svg.replace("Prequential accuracy", "T")
    );
    let o = run(&[
        "compare",
        tmp.path().join("missing").to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn demo_configs_parse_and_resolve() {
    let mut names: Vec<String> = std::fs::read_dir(demo_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "active_learning_budget.json",
            "drift_adaptation.json",
            "regression.json",
            "supervised_comparison.json"
        ]
    );
    for name in names {
        let args = RunArgs {
            config: Some(demo_dir().join(&name)),
            jobs: 1,
            ..Default::default()
        };
        let eff = parse_config(&args, None).unwrap_or_else(|e| panic!("{name}: {e}"));
        streamlearn::evaluate::resolve(&eff.config).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
