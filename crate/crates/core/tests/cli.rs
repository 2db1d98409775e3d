use std::path::PathBuf;
use std::process::{Command, Output};

use deadline_bcast::{block_stats, is_feasible, ErasurePattern};

const EPS: &str = "0.1,0.2,0.2,0.5";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deadline-bcast"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn deadline-bcast")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("deadline-bcast-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn single_slot_outage() {
    let text = stdout_ok(&[
        "outage",
        "--t1",
        "1",
        "--t2",
        "1",
        "--lambda1",
        "1",
        "--lambda2",
        "0",
        "--eps",
        EPS,
        "--method",
        "exact",
    ]);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# deadline-bcast v"));
    assert_eq!(
        lines.next().unwrap(),
        "t1,t2,lambda1,lambda2,eps00,eps01,eps10,eps11,pout,method,trials,seed,stderr"
    );
    let row = data_rows(&text).remove(0);
    let pout: f64 = row[8].parse().unwrap();
    assert!((pout - 0.3).abs() < 1e-15);
    assert_eq!(&row[9..], ["exact", "", "", ""]);
}

#[test]
fn monte_carlo_csv_is_byte_stable_across_runs_and_threads() {
    let args = [
        "outage",
        "--t1",
        "4",
        "--lambda1",
        "1",
        "--lambda2",
        "1",
        "--eps",
        EPS,
        "--method",
        "mc",
        "--trials",
        "100000",
        "--seed",
        "7",
    ];
    let a = stdout_ok(&args);
    let b = stdout_ok(&args);
    assert_eq!(a, b);
    let one = bin()
        .args(args)
        .env("DEADLINE_BCAST_THREADS", "1")
        .output()
        .unwrap();
    let four = bin()
        .args(args)
        .env("DEADLINE_BCAST_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(one.stdout, a.as_bytes());
    assert_eq!(four.stdout, a.as_bytes());
    assert!(a
        .lines()
        .next()
        .unwrap()
        .ends_with("generator=ChaCha8Rng seed=7"));
}

#[test]
fn lambda_t_surface_is_a_step_function() {
    let text = stdout_ok(&[
        "outage",
        "--t-range",
        "1:6",
        "--lambda-range",
        "0:6:0.25",
        "--eps",
        EPS,
    ]);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 6 * 25);
    for t in 1..=6u32 {
        let series: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r[0] == t.to_string())
            .map(|r| (r[3].parse().unwrap(), r[8].parse().unwrap()))
            .collect();
        assert_eq!(series[0], (0.0, 0.0));
        for w in series.windows(2) {
            let ((l0, p0), (l1, p1)) = (w[0], w[1]);
            assert!(p1 >= p0);
            // λ1 = λ2 = λ: breakpoints of λ1, λ2 and λ1+λ2 sit on half integers and
            // outage is constant on each (k/2, (k+1)/2].
            if (l0 * 2.0 - 1e-9).ceil() == (l1 * 2.0 - 1e-9).ceil() {
                assert_eq!(p0, p1, "T={t} jump inside ({l0}, {l1}]");
            }
        }
    }
}

#[test]
fn region_examples() {
    let ones = stdout_ok(&["region", "--pattern", "11,11,11", "--t1", "3"]);
    assert_eq!(data_rows(&ones), [["0", "3"], ["3", "0"]]);
    let zeros = stdout_ok(&["region", "--pattern", "00,00,00"]);
    assert_eq!(data_rows(&zeros), [["0", "0"]]);

    let pattern = "10,11,00,01,11,10";
    let text = stdout_ok(&["region", "--pattern", pattern, "--t1", "3"]);
    let p: ErasurePattern = pattern.parse().unwrap();
    let st = block_stats(&p, 3).unwrap();
    let rows = data_rows(&text);
    assert!(rows.len() >= 2);
    for r in rows {
        let (l1, l2): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!(is_feasible(&st, l1, l2));
        assert!(!is_feasible(&st, l1 + 1e-6, l2 + 1e-6));
    }
}

#[test]
fn schedule_examples() {
    let text = stdout_ok(&[
        "schedule",
        "--pattern",
        "10,11,00,01,11,10",
        "--t1",
        "3",
        "--t2",
        "6",
        "--lambda1",
        "1",
        "--lambda2",
        "2",
    ]);
    let body: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(body[0], "slot=1 state=10 action=serve1 amt1=1 amt2=0");
    assert_eq!(body[1], "slot=2 state=11 action=serve2 amt1=0 amt2=1");
    assert_eq!(body[3], "slot=4 state=01 action=serve2 amt1=0 amt2=1");
    assert!(body[4].contains("action=serve1") || body[5].contains("action=serve1"));
    assert_eq!(body.last().unwrap(), &"met_deadlines=true");

    let text = stdout_ok(&[
        "schedule",
        "--pattern",
        "00,00",
        "--lambda1",
        "1",
        "--lambda2",
        "0",
    ]);
    assert!(text
        .lines()
        .filter(|l| l.starts_with("slot="))
        .all(|l| l.contains("action=idle")));
    assert!(text.ends_with("met_deadlines=false\n"));

    let text = stdout_ok(&[
        "schedule",
        "--pattern",
        "10,01",
        "--lambda1",
        "0",
        "--lambda2",
        "0",
    ]);
    assert!(text.ends_with("met_deadlines=true\n"));

    let text = stdout_ok(&[
        "schedule",
        "--policy",
        "current_csi",
        "--pattern",
        "11,01",
        "--lambda1",
        "1",
        "--lambda2",
        "1",
        "--eps",
        EPS,
    ]);
    assert!(text.contains("slot=1 state=11 action=serve2"));
    assert!(text.ends_with("met_deadlines=false\n"));
}

#[test]
fn policy_compare_one_slot_is_certain_outage() {
    let text = stdout_ok(&[
        "policy-compare",
        "--eps",
        EPS,
        "--t-range",
        "1:1",
        "--trials",
        "1000",
    ]);
    assert_eq!(data_rows(&text), [["1", "1", "1", "0", "1", "0", "true"]]);
}

#[test]
fn rate_solve_json() {
    let text = stdout_ok(&["rate-solve", "--eps", EPS, "--t1", "4", "--p", "0.05"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["lambda2"], 1.0);
    assert_eq!(v["next_lambda2"], 1.5);
    assert_eq!(v["degenerate"], false);
}

#[test]
fn config_file_supplies_flags_and_cli_overrides() {
    let cfg = scratch("outage.json");
    std::fs::write(
        &cfg,
        r#"{"command": "outage", "t1": 1, "lambda1": 1, "lambda2": 0, "eps": [0.1, 0.2, 0.2, 0.5]}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let row = data_rows(&stdout_ok(&["--config", cfg])).remove(0);
    assert!((row[8].parse::<f64>().unwrap() - 0.3).abs() < 1e-15);
    let row = data_rows(&stdout_ok(&["--config", cfg, "outage", "--lambda1", "0"])).remove(0);
    assert_eq!(row[8], "0");
}

#[test]
fn gnuplot_script_points_at_data() {
    let data = scratch("surface.csv");
    let plot = scratch("surface.gp");
    stdout_ok(&[
        "outage",
        "--t1",
        "2",
        "--lambda-range",
        "0:2:0.5",
        "--eps",
        EPS,
        "--output",
        data.to_str().unwrap(),
        "--gnuplot",
        plot.to_str().unwrap(),
    ]);
    let script = std::fs::read_to_string(&plot).unwrap();
    assert!(script.starts_with("# deadline-bcast v"));
    assert!(script.contains(data.to_str().unwrap()));
    assert!(std::fs::read_to_string(&data)
        .unwrap()
        .starts_with("# deadline-bcast v"));
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(
        code(&[
            "outage",
            "--t1",
            "1",
            "--lambda1",
            "1",
            "--lambda2",
            "0",
            "--eps",
            "0.5,0.5,0.5,0.5"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "outage",
            "--t1",
            "1",
            "--lambda1",
            "-1",
            "--lambda2",
            "0",
            "--eps",
            EPS
        ]),
        2
    );
    assert_eq!(code(&["region", "--pattern", "10,12"]), 2);
    assert_eq!(
        code(&[
            "schedule",
            "--policy",
            "current_csi",
            "--pattern",
            "10,01",
            "--t1",
            "1",
            "--t2",
            "2",
            "--lambda1",
            "1",
            "--lambda2",
            "1",
            "--eps",
            EPS
        ]),
        2
    );
    assert_eq!(
        code(&[
            "outage",
            "--t1",
            "13",
            "--lambda1",
            "1",
            "--lambda2",
            "1",
            "--eps",
            EPS
        ]),
        3
    );
    assert_eq!(
        code(&[
            "outage",
            "--t1",
            "11",
            "--lambda1",
            "1",
            "--lambda2",
            "1",
            "--eps",
            EPS,
            "--method",
            "bruteforce"
        ]),
        3
    );
    let bad_threads = bin()
        .args(["region", "--pattern", "10"])
        .env("DEADLINE_BCAST_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn quick_validation_passes() {
    let out = run(&["validate", "--quick"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("greedy-optimality"));
    assert!(text.ends_with("11 checks, 0 failed\n"));
}
