use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cubefreq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubefreq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn constant_table_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "one.txt", "p=3\n00\n");
    assert_eq!(code(&cubefreq(&["witness", "--in", &f, "--d", "1"])), 1);
}

#[test]
fn parity_certificate_has_unit_epsilon_and_reverifies() {
    let dir = tempfile::tempdir().unwrap();
    // Parity on p = 3: -1 at t = 1, 2, 4, 7.
    let f = write(dir.path(), "parity.txt", "p=3\n69\n");
    let cert = dir.path().join("cert.txt");
    let out = cubefreq(&["witness", "--in", &f, "--d", "1", "--out", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&cert).unwrap();
    assert!(text.starts_with("p=3 d=1 epsilon=1 "), "{text}");
    let fprime = text.split("[fprime]").nth(1).unwrap();
    assert!(fprime.lines().skip(2).all(|l| l == "0"), "{fprime}");
    let out = cubefreq(&["verify", "--in", &f, "--cert", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("true,"));
}

#[test]
fn random_certificate_reverifies_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "f.txt",
        "p=8\n3a9f0c17e6d2b45891ce7a03fd6b2c8e4f17a9d05c3e82b61fa7d94c0e3b5a28\n",
    );
    let cert = dir.path().join("cert.txt");
    let c = cert.to_str().unwrap();
    let out = cubefreq(&["witness", "--in", &f, "--d", "3", "--out", c]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&cubefreq(&["verify", "--in", &f, "--cert", c])), 0);
    // A certificate checked against the wrong table is rejected.
    let g = write(dir.path(), "g.txt", &format!("p=8\n{}\n", "f".repeat(64)));
    assert_eq!(code(&cubefreq(&["verify", "--in", &g, "--cert", c])), 1);
    // Tampering with f' is caught.
    let text = fs::read_to_string(&cert).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.len() - 1;
    lines[last] = "1/2".into();
    let bad = write(dir.path(), "bad.txt", &(lines.join("\n") + "\n"));
    assert_eq!(code(&cubefreq(&["verify", "--in", &f, "--cert", &bad])), 1);
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.txt", "p=3\nzz\n");
    assert_eq!(code(&cubefreq(&["witness", "--in", &f, "--d", "1"])), 2);
    assert_eq!(code(&cubefreq(&["witness", "--in", "/nonexistent/file", "--d", "1"])), 2);
    let f = write(dir.path(), "ok.txt", "p=3\n69\n");
    assert_eq!(code(&cubefreq(&["witness", "--in", &f, "--d", "4"])), 2);
    assert_eq!(code(&cubefreq(&["threshold"])), 2);
    let arr = write(dir.path(), "arr.txt", "m=2 n=2\n1 0\n");
    assert_eq!(code(&cubefreq(&["arrangement", "--in", &arr])), 2);
}

#[test]
fn scale_limits_exit_three() {
    assert_eq!(code(&cubefreq(&["fraction", "--p", "5", "--d", "1"])), 3);
    assert_eq!(code(&cubefreq(&["fraction", "--p", "15", "--d", "1", "--trials", "1"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..21).map(|i| format!("1 {i}\n")).collect();
    let arr = write(dir.path(), "big.txt", &format!("m=2 n=21\n{rows}"));
    assert_eq!(code(&cubefreq(&["arrangement", "--in", &arr])), 3);
}

#[test]
fn threshold_prints_degree() {
    assert_eq!(stdout(&cubefreq(&["threshold", "--p", "10"])), "2\n");
    assert_eq!(stdout(&cubefreq(&["threshold", "--p", "1"])), "none\n");
}

#[test]
fn generic_arrangement_counts() {
    let dir = tempfile::tempdir().unwrap();
    let arr = write(
        dir.path(),
        "six.txt",
        "m=3 n=6\n1 0 0\n0 1 0\n0 0 1\n1 1 1\n1 2 3\n1 -3/1 7\n",
    );
    let out = cubefreq(&["arrangement", "--in", &arr]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        "regions,intersection_subspaces,resilient_subsets,buck_bound,chain_holds\n32,23,23,42,true\n"
    );
    let out = cubefreq(&["arrangement", "--in", &arr, "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["regions"], 32);
    assert_eq!(v["chain_holds"], true);
}

#[test]
fn sampling_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let summary = dir.path().join("s.json");
    let out = cubefreq(&[
        "sampling", "--p", "12", "--d", "1", "--trials", "100", "--seed", "7",
        "--out", csv.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "trial,seed,p,d,k,N,lambda_min,lambda_max,pass");
    assert_eq!(lines.count(), 100);
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["trials"], 100);
    assert_eq!(s["parameters"]["k"], 13);
    assert_eq!(s["parameters"]["N"], 410);
    assert!(s["failure_rate"].is_number());
}

#[test]
fn fraction_outputs() {
    let out = cubefreq(&["fraction", "--p", "2", "--d", "1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().nth(1).unwrap().starts_with("2,1,exhaustive,exact,,16,2,0.125,"), "{text}");

    let out = cubefreq(&["fraction", "--p", "3", "--format", "json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&stdout(&out)).unwrap();
    let fractions: Vec<f64> = rows.iter().map(|r| r["fraction"].as_f64().unwrap()).collect();
    assert_eq!(fractions.len(), 4);
    assert!(fractions.windows(2).all(|w| w[0] >= w[1]), "{fractions:?}");

    let args = ["fraction", "--p", "10", "--d", "4", "--trials", "200", "--seed", "5"];
    let a = stdout(&cubefreq(&args));
    assert_eq!(a, stdout(&cubefreq(&args)));
    let row = a.lines().nth(1).unwrap();
    assert!(row.starts_with("10,4,monte_carlo,double,5,200,"), "{row}");
    let mut single = args.to_vec();
    single.extend(["--workers", "1"]);
    assert_eq!(a, stdout(&cubefreq(&single)));
}

#[test]
fn polytope_commands() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "x.txt", "p=3\n1/2\n0\n0\n0\n0\n0\n0\n1/2\n");
    let out = cubefreq(&["polytope", "--in", &x, "--d", "2"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0")), "{text}");

    let u = write(dir.path(), "u.txt", &format!("p=3\n{}", "1/8\n".repeat(8)));
    let out = cubefreq(&["polytope", "--in", &u, "--d", "1", "--theta0", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "theta0,lo,hi,width\n0,0,1/2,1/2\n");

    let out = cubefreq(&["polytope", "--support", "0,7", "--p", "3", "--d", "2"]);
    assert_eq!(code(&out), 1);
    let out = cubefreq(&["polytope", "--support", "0,3,5,6", "--p", "3", "--d", "1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("p=3\n"));
}
