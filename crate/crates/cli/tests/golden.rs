//! Golden files: each `tests/golden/<name>.golden` holds the argument vector
//! (`$ arg` lines) followed by the expected stdout, stderr and exit code.
//! Run with `BLESS=1` to rewrite the expectations from the current binary.

use std::fs;
use std::path::Path;
use std::process::Command;

fn render(args: &[String]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_weylmod")).args(args).output().expect("binary runs");
    let mut text = String::new();
    for a in args {
        text.push_str(&format!("$ {a}\n"));
    }
    text.push_str("--- stdout\n");
    text.push_str(&String::from_utf8_lossy(&out.stdout));
    text.push_str("--- stderr\n");
    text.push_str(&String::from_utf8_lossy(&out.stderr));
    text.push_str(&format!("--- exit {}\n", out.status.code().unwrap_or(-1)));
    text
}

#[test]
fn golden_files() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("BLESS").is_some();
    let mut entries: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    let mut mismatched = Vec::new();
    for path in entries.iter().filter(|p| p.extension().is_some_and(|e| e == "golden")) {
        let expected = fs::read_to_string(path).unwrap();
        let args: Vec<String> =
            expected.lines().map_while(|l| l.strip_prefix("$ ")).map(str::to_string).collect();
        let actual = render(&args);
        if actual == expected {
            continue;
        }
        if bless {
            fs::write(path, &actual).unwrap();
        } else {
            eprintln!("{}:\n--- expected\n{expected}--- actual\n{actual}", path.display());
            mismatched.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    assert!(entries.len() >= 20, "golden directory looks empty");
    assert!(mismatched.is_empty(), "golden mismatches: {mismatched:?}");
}
