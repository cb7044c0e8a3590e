use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nlsgibbs(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlsgibbs"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SAMPLE: &str = r#"
experiment = "sample"
seed = 11
[model]
mass_density = 1.0
gamma = [0.0]
length = [8.0]
beta = [0.0, 1.0]
points = 64
[mcmc]
steps = 600
burn_in = 100
thin = 5
chains = 2
"#;

const LOGZ_ANCHOR_ONLY: &str = r#"
experiment = "logz"
seed = 3
[model]
mass_density = 1.0
gamma = [0.0]
length = [8.0]
beta = [0.0]
points = 128
[mcmc]
steps = 400
burn_in = 100
[thermo]
anchor_samples = 500
drift_samples = 50
"#;

fn value_of(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{text}"))
        .trim()
        .parse()
        .unwrap()
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlsgibbs(&["minimize", "--p", "4", "--mass", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--beta"), "{}", stderr(&o));
}

#[test]
fn minimize_with_zero_coupling_reports_zero_energy() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlsgibbs(&["minimize", "--p", "4", "--beta", "0", "--mass", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(value_of(&stdout(&o), "A"), 0.0);
}

#[test]
fn minimize_quartic_line_matches_closed_form_and_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlsgibbs(
        &["minimize", "--p", "4", "--beta", "1", "--mass", "1", "--out", "prof"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = value_of(&stdout(&o), "A");
    assert!((a + 1.0 / 96.0).abs() < 1e-6, "A = {a}");
    let csv = fs::read_to_string(dir.path().join("prof/minimize_profile.csv")).unwrap();
    let rows: Vec<_> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,Q");
    assert_eq!(rows.len(), 2049);
    assert!(rows[1..].iter().all(|r| r.split(',').count() == 2));
}

#[test]
fn empty_beta_list_names_the_offending_key() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), SAMPLE.replace("beta = [0.0, 1.0]", "beta = []")).unwrap();
    let o = nlsgibbs(&["sample", "--config", "bad.toml", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.beta"), "{}", stderr(&o));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn unknown_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), SAMPLE.replace("thin = 5", "thinning = 5")).unwrap();
    let o = nlsgibbs(&["sample", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("thinning"), "{}", stderr(&o));
}

#[test]
fn subcommand_must_match_the_configured_experiment() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SAMPLE).unwrap();
    let o = nlsgibbs(&["tail", "--config", "s.toml"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical_regardless_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SAMPLE).unwrap();
    let first = nlsgibbs(&["sample", "--config", "s.toml", "--out", "a", "--threads", "1"], dir.path());
    assert!(matches!(first.status.code(), Some(0) | Some(3)), "{}", stderr(&first));
    let second = nlsgibbs(&["sample", "--config", "s.toml", "--out", "b", "--threads", "2"], dir.path());
    assert_eq!(first.status.code(), second.status.code());
    for name in ["sample.csv", "sample.json"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
    let csv = fs::read_to_string(dir.path().join("a/sample.csv")).unwrap();
    assert!(csv.contains("# seed = 11"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SAMPLE).unwrap();
    nlsgibbs(&["sample", "--config", "s.toml", "--out", "a"], dir.path());
    nlsgibbs(&["sample", "--config", "s.toml", "--out", "b", "--seed", "12"], dir.path());
    let a = fs::read_to_string(dir.path().join("a/sample.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("b/sample.csv")).unwrap();
    assert!(b.contains("# seed = 12"));
    assert_ne!(a, b);
}

#[test]
fn existing_output_is_not_overwritten_without_force() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.toml"), SAMPLE).unwrap();
    fs::create_dir(dir.path().join("o")).unwrap();
    fs::write(dir.path().join("o/sample.csv"), "keep me").unwrap();
    let o = nlsgibbs(&["sample", "--config", "s.toml", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--force"));
    assert_eq!(fs::read_to_string(dir.path().join("o/sample.csv")).unwrap(), "keep me");

    let o = nlsgibbs(&["sample", "--config", "s.toml", "--out", "o", "--force"], dir.path());
    assert_ne!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_ne!(fs::read_to_string(dir.path().join("o/sample.csv")).unwrap(), "keep me");
}

#[test]
fn logz_on_the_zero_grid_is_anchor_only() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("z.toml"), LOGZ_ANCHOR_ONLY).unwrap();
    let o = nlsgibbs(&["logz", "--config", "z.toml", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/logz.csv")).unwrap();
    let mut rows = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<_> = rows.next().unwrap().split(',').collect();
    let row: Vec<_> = rows.next().unwrap().split(',').collect();
    let get = |k: &str| -> f64 { row[header.iter().position(|h| *h == k).unwrap()].parse().unwrap() };
    assert_eq!(get("log_z"), get("anchor"));
    assert!(get("anchor") <= 0.0);
    assert_eq!(get("log_z_tilde"), 0.0);
    assert!(!header.iter().any(|h| h.starts_with("dlogz")));
}
