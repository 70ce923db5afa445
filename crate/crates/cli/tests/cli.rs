use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_naive-tm"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = run(dir, args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn shift_tape(dir: &Path) -> PathBuf {
    let p = dir.join("tape.json");
    let cells: Vec<String> = "2BABBABAB"
        .chars()
        .enumerate()
        .map(|(i, c)| format!("\"{i}\": \"{c}\""))
        .collect();
    fs::write(&p, format!("{{\"tape\": {{{}}}}}", cells.join(", "))).unwrap();
    p
}

#[test]
fn simulate_reaches_worked_example_tape() {
    let dir = TempDir::new().unwrap();
    let tape = shift_tape(dir.path());
    let m = fixture("shift_machine.json");
    let out = ok(dir.path(), &["simulate", "--machine", path(&m), "--tape", path(&tape)]);
    assert!(out.contains("[0] B B A B A B A A (q_halt)"), "{out}");
    let trace = json(dir.path().join("out/trace.json"));
    let last = trace.as_array().unwrap().last().unwrap();
    assert_eq!(last["state"], "q_halt");
}

#[test]
fn simulate_zero_steps_echoes_input() {
    let dir = TempDir::new().unwrap();
    let tape = shift_tape(dir.path());
    let m = fixture("shift_machine.json");
    let out = ok(
        dir.path(),
        &["simulate", "--machine", path(&m), "--tape", path(&tape), "--steps", "0"],
    );
    assert_eq!(out.trim(), "0  [2] B A B B A B A B (q_start)");
}

#[test]
fn unknown_tape_symbol_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let tape = dir.path().join("bad.json");
    fs::write(&tape, r#"{"tape": {"0": "Z"}}"#).unwrap();
    let m = fixture("shift_machine.json");
    let o = run(dir.path(), &["simulate", "--machine", path(&m), "--tape", path(&tape)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`Z`"));
}

fn cell_weight(belief: &Value, pos: &str, sym: &str) -> f64 {
    let cell = &belief["tape"][pos];
    let i = cell["symbols"]
        .as_array()
        .unwrap()
        .iter()
        .position(|s| s == sym)
        .unwrap();
    cell["weights"][i].as_f64().unwrap()
}

#[test]
fn propagate_shift_belief_in_both_modes() {
    let dir = TempDir::new().unwrap();
    let m = fixture("shift_lockstep.json");
    let b = fixture("shift_belief_aa.json");
    let (h, k) = (0.3, 0.6);
    for (mode, expect) in [
        ("naive", 1.0 - (1.0 - h) * (1.0 - h) * (1.0 - k)),
        ("standard", (1.0 - h) * k + h),
    ] {
        let out_dir = dir.path().join(mode);
        ok(
            dir.path(),
            &[
                "propagate",
                "--machine",
                path(&m),
                "--belief",
                path(&b),
                "--steps",
                "80",
                "--mode",
                mode,
                "--out",
                path(&out_dir),
            ],
        );
        let belief = json(out_dir.join("belief.json"));
        assert!((cell_weight(&belief, "1", "A") - expect).abs() < 1e-12, "{mode}");
    }
}

#[test]
fn deterministic_belief_gives_same_output_in_both_modes() {
    let dir = TempDir::new().unwrap();
    let m = fixture("shift_lockstep.json");
    let b = dir.path().join("b.json");
    fs::write(
        &b,
        r#"{"tape": {"0": {"symbols": ["2"], "weights": [1.0]}, "1": {"symbols": ["B"], "weights": [1.0]},
            "2": {"symbols": ["A"], "weights": [1.0]}},
           "state": {"symbols": ["q_start"], "weights": [1.0]}}"#,
    )
    .unwrap();
    for mode in ["naive", "standard"] {
        ok(
            dir.path(),
            &[
                "propagate",
                "--machine",
                path(&m),
                "--belief",
                path(&b),
                "--steps",
                "80",
                "--mode",
                mode,
                "--out",
                mode,
            ],
        );
    }
    assert_eq!(
        json(dir.path().join("naive/belief.json")),
        json(dir.path().join("standard/belief.json"))
    );
}

fn final_point(dir: &Path) -> Vec<f64> {
    let r = json(dir.join("result.json"));
    ["0", "1"]
        .iter()
        .map(|u| r["h"][u]["weights"][1].as_f64().unwrap())
        .collect()
}

#[test]
fn descend_flips_counter_bit_only() {
    let dir = TempDir::new().unwrap();
    let (m, d) = (fixture("shift_lockstep.json"), fixture("shift_aa.json"));
    let out = ok(
        dir.path(),
        &[
            "descend",
            "--machine",
            path(&m),
            "--dataset",
            path(&d),
            "--h0",
            "0.05,0.05",
            "--lambda",
            "2",
        ],
    );
    assert!(out.contains("0  2  1.0"), "{out}");
    let p = final_point(&dir.path().join("out"));
    assert!((p[0] - 1.0).abs() < 0.05 && p[1].abs() < 0.05, "{p:?}");

    ok(
        dir.path(),
        &[
            "descend",
            "--machine",
            path(&m),
            "--dataset",
            path(&d),
            "--h0",
            "0.05,0.05",
            "--lambda",
            "2",
            "--loss",
            "standard",
            "--out",
            "std",
        ],
    );
    let p = final_point(&dir.path().join("std"));
    assert!((p[0] - 1.0).abs() < 0.05 && (p[1] - 1.0).abs() < 0.05, "{p:?}");
}

#[test]
fn descend_from_solution_writes_one_row() {
    let dir = TempDir::new().unwrap();
    let (m, d) = (fixture("shift_lockstep.json"), fixture("shift_aa.json"));
    ok(
        dir.path(),
        &[
            "descend",
            "--machine",
            path(&m),
            "--dataset",
            path(&d),
            "--h0",
            "1,0",
            "--lambda",
            "2",
        ],
    );
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "iter,loss,h0_0,h0_2,h1_B,h1_A");
    assert_eq!(lines.len(), 2);
}

#[test]
fn flowfield_layout_and_reproducibility() {
    let dir = TempDir::new().unwrap();
    let (m, d) = (fixture("shift_lockstep.json"), fixture("shift_ab.json"));
    let args = [
        "flowfield",
        "--machine",
        path(&m),
        "--dataset",
        path(&d),
        "--grid",
        "3,4",
        "--lambda",
        "2",
    ];
    ok(dir.path(), &args);
    let first = fs::read(dir.path().join("out/flowfield.csv")).unwrap();
    let manifest = fs::read(dir.path().join("out/manifest.json")).unwrap();
    ok(dir.path(), &args);
    assert_eq!(fs::read(dir.path().join("out/flowfield.csv")).unwrap(), first);
    assert_eq!(fs::read(dir.path().join("out/manifest.json")).unwrap(), manifest);

    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "h0_2,h1_A,grad_h0_2,grad_h1_A");
    assert_eq!(lines.len(), 13);
    // First cell outermost: its coordinate is constant over the first four rows.
    let col0: Vec<&str> = lines[1..5].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert!(col0.iter().all(|c| *c == "1.0000000000000000e-3"));
    let v: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(v.is_finite());
}

#[test]
fn causality_table_shows_one_to_three() {
    let dir = TempDir::new().unwrap();
    let (m, d) = (fixture("causality_machine.json"), fixture("causality_dataset.json"));
    let out = ok(
        dir.path(),
        &["causality", "--machine", path(&m), "--dataset", path(&d), "--h", "0.1"],
    );
    assert!(out.contains("naive ranking:    [1, 0]"), "{out}");
    let csv = fs::read_to_string(dir.path().join("out/causality.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!((rows[1][1] / rows[0][1] - 3.0).abs() < 1e-8);
    assert!((rows[1][2] - rows[0][2]).abs() < 1e-10);
}

#[test]
fn fixture_files_round_trip() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["fixture", "all"]);
    for name in [
        "shift_machine.json",
        "shift_lockstep.json",
        "causality_machine.json",
        "shift_aa.json",
    ] {
        assert_eq!(json(dir.path().join("out").join(name)), json(fixture(name)), "{name}");
    }
}

#[test]
fn enumeration_cap_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.json");
    fs::write(
        &m,
        r#"{"alphabet": ["□", "a"], "states": ["q"], "start": "q", "halt": null,
            "delta": [{"read": "□", "state": "q", "write": "□", "next": "q", "move": "right"},
                      {"read": "a", "state": "q", "write": "a", "next": "q", "move": "right"}]}"#,
    )
    .unwrap();
    let cells: Vec<String> = (0..24)
        .map(|u| format!("\"{u}\": {{\"symbols\": [\"□\", \"a\"], \"weights\": [0.5, 0.5]}}"))
        .collect();
    let b = dir.path().join("b.json");
    fs::write(
        &b,
        format!(
            "{{\"tape\": {{{}}}, \"state\": {{\"symbols\": [\"q\"], \"weights\": [1.0]}}}}",
            cells.join(", ")
        ),
    )
    .unwrap();
    let o = run(
        dir.path(),
        &[
            "propagate",
            "--machine",
            path(&m),
            "--belief",
            path(&b),
            "--steps",
            "24",
            "--mode",
            "standard",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn overflowing_gradient_exits_with_four() {
    let dir = TempDir::new().unwrap();
    let (m, d) = (fixture("shift_lockstep.json"), fixture("shift_aa.json"));
    let o = run(
        dir.path(),
        &[
            "descend",
            "--machine",
            path(&m),
            "--dataset",
            path(&d),
            "--h0",
            "0,0",
            "--mu",
            "1e-320",
        ],
    );
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_hyperparameters_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let (m, d) = (fixture("shift_lockstep.json"), fixture("shift_aa.json"));
    let o = run(
        dir.path(),
        &["descend", "--machine", path(&m), "--dataset", path(&d), "--mu", "1.5"],
    );
    assert_eq!(o.status.code(), Some(2));
}
