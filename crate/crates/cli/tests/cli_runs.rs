use std::io::Write;
use std::process::{Command, Output, Stdio};

fn weylmod(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_weylmod"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    if let Some(s) = stdin {
        input.write_all(s.as_bytes()).unwrap();
    }
    drop(input);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn curve_json_round_trips_through_mult() {
    for op in weylmod::sweep::corpus() {
        for p in ["31", "53"] {
            let json = stdout(&weylmod(&["curve", "-P", &op, "-p", p, "--json"], None));
            let from_curve = stdout(&weylmod(&["mult", "--curve", "-", "--sl2", "fourier"], Some(&json)));
            let from_op = stdout(&weylmod(&["mult", "-P", &op, "--sl2", "fourier"], None));
            assert_eq!(from_curve, from_op, "{op} at p = {p}");
        }
    }
}

#[test]
fn text_curve_file_needs_a_prime() {
    let dir = std::env::temp_dir().join(format!("weylmod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("curve.txt");
    std::fs::write(&file, "X*Y^2 - X^2*Y^2\n").unwrap();
    let path = file.to_str().unwrap();
    assert_eq!(stdout(&weylmod(&["mult", "--curve", path, "-p", "7"], None)), "2\n");
    let o = weylmod(&["mult", "--curve", path], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: usage: "));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sweep_writes_csv_and_is_reproducible() {
    let dir = std::env::temp_dir().join(format!("weylmod-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let plan = dir.join("plan.txt");
    std::fs::write(
        &plan,
        "operator = x*d - 2\np_min = 5\np_max = 23\nchecks = degree-bound, multiplicity-match\nformat = csv\ntimings = false\n",
    )
    .unwrap();
    let plan = plan.to_str().unwrap();
    let a = stdout(&weylmod(&["sweep", plan, "--jobs", "1"], None));
    let b = stdout(&weylmod(&["sweep", plan, "--jobs", "3"], None));
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("p,degree,y0_mult,fourier_mult,squarefree,p_power_flag,det_time_ms"));
    assert_eq!(lines.count(), 7);
    let out = dir.join("out.json");
    let o = weylmod(&["sweep", plan, "--json", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success() && o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 7);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = weylmod(&["check", "--suite", "nonsense"], None);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&o.stderr), "error: usage: unknown suite 'nonsense'\n");
}
