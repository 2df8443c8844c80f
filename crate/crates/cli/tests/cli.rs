use std::path::Path;
use std::process::{Command, Output};

fn fftower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fftower")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn build_spec(dir: &Path, q: &str, family: &str, levels: &str) -> String {
    let path = dir.join(format!("{family}-{q}.json"));
    let path = path.to_str().unwrap().to_string();
    let o = fftower(&["tower", "build", "--q", q, "--family", family, "--levels", levels, "--out", &path]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn column(csv: &str, idx: usize) -> Vec<String> {
    csv.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn first_family_q3_orders() {
    let dir = tempfile::tempdir().unwrap();
    let spec = build_spec(dir.path(), "3", "f1", "5");
    let o = fftower(&["tower", "orders", "--spec", &spec, "--levels", "5", "--delta"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(csv.lines().next().unwrap(), "n,log2_order_x,log2_order_delta,order_x,order_delta,status");
    let expected = ["3.0", "6.3", "12.7", "25.4", "50.7"];
    assert_eq!(column(&csv, 1), expected);
    assert_eq!(column(&csv, 2), expected);
    assert!(column(&csv, 5).iter().all(|s| s == "exact"));
    // byte-identical on a second run
    let again = fftower(&["tower", "orders", "--spec", &spec, "--levels", "5", "--delta"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn even_family_orders_leave_delta_empty() {
    let dir = tempfile::tempdir().unwrap();
    let spec = build_spec(dir.path(), "2", "f6", "3");
    let o = fftower(&["tower", "orders", "--spec", &spec, "--levels", "3", "--delta"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(column(&csv, 1), ["6.0", "18.0", "54.0"]);
    assert!(column(&csv, 2).iter().all(String::is_empty));
}

#[test]
fn json_rows_mirror_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = build_spec(dir.path(), "5", "f3", "3");
    let o = fftower(&["tower", "orders", "--spec", &spec, "--levels", "3", "--delta", "--format", "json"]);
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let deltas: Vec<&str> = rows.as_array().unwrap().iter().map(|r| r["log2_order_delta"].as_str().unwrap()).collect();
    assert_eq!(deltas, ["4.6", "5.6", "6.6"]);
    assert_eq!(rows[0]["status"], "exact");
}

#[test]
fn zero_budget_needs_partial_ok() {
    let dir = tempfile::tempdir().unwrap();
    // 5^32 + 1 has two prime factors above the trial-division range
    let spec = build_spec(dir.path(), "5", "f1", "6");
    let args = ["tower", "orders", "--spec", &spec, "--levels", "6", "--budget", "0"];
    let o = fftower(&args);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cofactor"));
    let mut partial = args.to_vec();
    partial.push("--partial-ok");
    let o = fftower(&partial);
    assert!(o.status.success());
    assert!(stdout(&o).lines().last().unwrap().ends_with(",divisor"));
}

#[test]
fn hints_complete_a_starved_factorization() {
    let dir = tempfile::tempdir().unwrap();
    let hints = dir.path().join("hints.json");
    std::fs::write(&hints, r#"[{"n": "1000036000099", "factors": [["1000003", 1], ["1000033", 1]]}]"#).unwrap();
    let o = fftower(&["factor", "--value", "1000036000099", "--budget", "0", "--hints", hints.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "1000036000099 = 1000003 * 1000033");
    let o = fftower(&["factor", "--value", "1000036000099", "--budget", "0"]);
    assert_eq!(o.status.code(), Some(4));
    std::fs::write(&hints, r#"[{"n": "15", "factors": [["15", 1]]}]"#).unwrap();
    let o = fftower(&["factor", "--value", "15", "--hints", hints.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_on_reference_tower() {
    let dir = tempfile::tempdir().unwrap();
    let spec = build_spec(dir.path(), "3", "f1", "6");
    let o = fftower(&["tower", "verify", "--spec", &spec, "--levels", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"));
    assert!(text.contains("PASS condition C2 at n = 6"));
}

#[test]
fn build_rejects_a_square_discriminant() {
    let o = fftower(&["tower", "build", "--q", "3", "--family", "f1", "--x1", "1,1"]);
    assert_eq!(o.status.code(), Some(3));
    let o = fftower(&["tower", "build", "--q", "3", "--family", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fftower(&["tower", "orders"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_search_and_oracle() {
    let o = fftower(&["tower", "search-initial", "--q", "7", "--family", "f5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), "x_1^2 = 2 x_1 + 2");
    let o = fftower(&["oracle", "check", "--q", "3", "--family", "f1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("GF(81) ok"));
    let o = fftower(&["oracle", "check", "--q", "2", "--family", "f6"]);
    assert!(stdout(&o).contains("cubes 22"));
}
