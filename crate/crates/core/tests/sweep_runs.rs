use weylmod::ffield::primes_in;
use weylmod::mpoly::BivarPoly;
use weylmod::sweep::{self, Check, Format, SweepPlan};
use weylmod::FieldCtx;

fn quiet(op: &str, lo: u64, hi: u64) -> SweepPlan {
    let mut plan = SweepPlan::new(op, lo, hi);
    plan.timings = false;
    plan
}

#[test]
fn euler_lambda_in_prime_field() {
    let r = sweep::run_sweep(&quiet("x*d - 2", 5, 31), None).unwrap();
    assert_eq!(r.entries.len(), primes_in(5, 31).len());
    for e in &r.entries {
        let rep = e.report().unwrap();
        assert_eq!(rep.curve, "X*Y");
        assert_eq!(rep.report.y0_mult, 1);
        assert!(e.all_checks_passed());
    }
    let y0 = r.stability.iter().find(|s| s.invariant == "y0_mult").unwrap();
    assert_eq!((y0.constant, y0.stable_from), (true, Some(5)));
}

#[test]
fn airy_type() {
    let r = sweep::run_sweep(&quiet("d^2 - x", 5, 31), None).unwrap();
    for e in &r.entries {
        let rep = e.report().unwrap();
        let f = FieldCtx::prime(e.p).unwrap();
        assert_eq!(rep.curve_poly, BivarPoly::parse(&f, "Y^2 - X").unwrap());
        assert_eq!((rep.operator_y0_mult, rep.report.y0_mult), (0, 0));
    }
}

#[test]
fn legendre_zero_section() {
    let r = sweep::run_sweep(&quiet("x*(1 - x)*d^2 + (1 - 2*x)*d - 1/4", 5, 31), None).unwrap();
    for e in &r.entries {
        assert!(e.report().unwrap().report.zero_section_mult >= 2, "p = {}", e.p);
    }
}

#[test]
fn byte_identical_reruns() {
    let plan = quiet("x^2*d^3 - 3*x*d + 2", 5, 61);
    let a = sweep::run_sweep(&plan, Some(1)).unwrap();
    let b = sweep::run_sweep(&plan, Some(4)).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn failures_are_recorded() {
    let r = sweep::run_sweep(&quiet("d^4 + x", 2, 13), None).unwrap();
    assert_eq!(r.entries.len(), primes_in(2, 13).len());
    let failed: Vec<u64> = r.entries.iter().filter(|e| e.report().is_none()).map(|e| e.p).collect();
    assert_eq!(failed, vec![2, 3]);
    assert!(r.to_csv().contains("\n2,,,,,,\n"));
    assert!(r.to_json().contains("\"code\": \"prime-too-small\""));
}

#[test]
fn shift_retry_reaches_the_fast_path() {
    let mut plan = quiet("x*d - 2", 11, 11);
    let plain = sweep::run_sweep(&plan, None).unwrap();
    assert!(plain.entries[0].report().unwrap().dense_evals > 0);
    plan.shift_retry = true;
    let r = sweep::run_sweep(&plan, None).unwrap();
    let rep = r.entries[0].report().unwrap();
    assert_eq!(rep.dense_evals, 0);
    assert!(rep.node_offset > 0);
    assert_eq!(rep.curve_poly, plain.entries[0].report().unwrap().curve_poly);
}

#[test]
fn plan_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("weylmod-plan-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("op.txt"), "d - x^2\n").unwrap();
    let text = "operator_file = op.txt\np_min = 7\np_max = 13\nchecks = degree-bound\nformat = csv\noutput = out.csv\n";
    let plan = SweepPlan::parse(text, Some(&dir)).unwrap();
    assert_eq!(plan.operator, "d - x^2");
    assert_eq!(plan.output, Some(dir.join("out.csv")));
    assert_eq!(plan.checks, vec![Check::DegreeBound]);
    let r = sweep::run_sweep(&plan, None).unwrap();
    let csv = r.render(Format::Csv);
    assert_eq!(csv.lines().count(), 1 + 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("7,2,0,0,true,false,"));
    std::fs::remove_dir_all(&dir).unwrap();
}
