use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_driftplan");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
}

/// Tempdir holding the default double gyre, a config and a plan for it.
fn planned_workspace() -> (TempDir, PathBuf) {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_path_buf();
    let out = run(&dir, &["gen-field", "--kind", "double-gyre", "--out", "field.txt"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    std::fs::write(dir.join("cfg.toml"), "goal = [15, 7, 0]\n").unwrap();
    let out = run(
        &dir,
        &["plan", "--field", "field.txt", "--config", "cfg.toml", "--out", "plan.csv", "--quiver", "quiver.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    (tmp, dir)
}

#[test]
fn plan_reports_every_state_reachable() {
    let (_tmp, dir) = planned_workspace();
    let plan = std::fs::read_to_string(dir.join("plan.csv")).unwrap();
    assert!(plan.lines().any(|l| l.starts_with("# config_hash = ")));
    assert!(plan.lines().any(|l| l.starts_with("# heading_convention = ")));
    let quiver = std::fs::read_to_string(dir.join("quiver.csv")).unwrap();
    let rows: Vec<&str> = quiver.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 21 * 29);
    assert!(rows.iter().any(|r| r.contains(",AT_GOAL,goal,")));
}

#[test]
fn zero_disturbance_rollout_spends_cost_to_go() {
    let (_tmp, dir) = planned_workspace();
    let plan = std::fs::read_to_string(dir.join("plan.csv")).unwrap();
    // state (3, 22, 1) heading 135: index = ((1 * 29 + 22) * 21 + 3) * 8 + 3
    let index = ((29 + 22) * 21 + 3) * 8 + 3;
    let row = plan.lines().find(|l| l.starts_with(&format!("{index},"))).unwrap();
    let cost = row.split(',').nth(6).unwrap();
    let out = run(
        &dir,
        &["rollout", "--plan", "plan.csv", "--field", "field.txt", "--start", "3,22,1", "--heading-deg", "135", "--out", "traj.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(value(&report, "terminal"), "REACHED_GOAL");
    assert_eq!(value(&report, "energy"), cost);
    let traj = std::fs::read_to_string(dir.join("traj.csv")).unwrap();
    let last = traj.lines().last().unwrap();
    assert!(last.ends_with(&format!(",{cost},REACHED_GOAL")), "{last}");
    assert!(traj.lines().any(|l| l.starts_with("0,3,22,1,135,")));
}

#[test]
fn disturbed_rollouts_are_reproducible() {
    let (_tmp, dir) = planned_workspace();
    let args = |seed: &'static str, out: &'static str| {
        ["rollout", "--plan", "plan.csv", "--field", "field.txt", "--start", "0,28,3", "--p", "0.5", "--seed", seed, "--out", out]
    };
    assert_eq!(code(&run(&dir, &args("7", "a.csv"))), 0);
    assert_eq!(code(&run(&dir, &args("7", "b.csv"))), 0);
    let a = std::fs::read_to_string(dir.join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn batch_prints_fraction_with_three_decimals() {
    let (_tmp, dir) = planned_workspace();
    let out = run(&dir, &["batch", "--plan", "plan.csv", "--field", "field.txt", "--p", "0.2", "--seed", "20190601"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout(&out);
    let fraction = value(&report, "fraction_reached");
    assert_eq!(fraction.split('.').nth(1).map(str::len), Some(3));
    assert!(fraction.parse::<f64>().unwrap() >= 0.99);
    let out = run(
        &dir,
        &["batch", "--plan", "plan.csv", "--field", "field.txt", "--max-steps", "1", "--min-fraction", "0.99"],
    );
    assert_eq!(code(&out), 4);
}

#[test]
fn verify_accepts_a_fresh_plan() {
    let (_tmp, dir) = planned_workspace();
    let out = run(&dir, &["verify", "--plan", "plan.csv", "--field", "field.txt", "--oracle-samples", "40"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout(&out);
    assert_eq!(value(&report, "bellman_violations"), "0");
    assert_eq!(value(&report, "oracle_samples"), "40 disagreements 0");
}

#[test]
fn verify_reports_a_corrupted_cost() {
    let (_tmp, dir) = planned_workspace();
    let text = std::fs::read_to_string(dir.join("plan.csv")).unwrap();
    let target = 4321;
    let corrupted: String = text
        .lines()
        .map(|l| {
            if l.starts_with(&format!("{target},")) {
                let mut cols: Vec<String> = l.split(',').map(str::to_string).collect();
                let cost: u64 = cols[6].parse().unwrap();
                cols[6] = (cost + 1).to_string();
                cols.join(",")
            } else {
                l.to_string()
            }
        })
        .map(|l| l + "\n")
        .collect();
    std::fs::write(dir.join("bad.csv"), corrupted).unwrap();
    let out = run(&dir, &["verify", "--plan", "bad.csv", "--field", "field.txt", "--oracle-samples", "0"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains(&format!("index {target}")), "{}", stderr(&out));
}

#[test]
fn hash_mismatch_is_a_validation_failure() {
    let (_tmp, dir) = planned_workspace();
    let out = run(&dir, &["gen-field", "--kind", "double-gyre", "--amplitude", "0.4", "--out", "other.txt"]);
    assert_eq!(code(&out), 0);
    let out = run(&dir, &["verify", "--plan", "plan.csv", "--field", "other.txt"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("hash mismatch"), "{}", stderr(&out));

    let text = std::fs::read_to_string(dir.join("plan.csv")).unwrap();
    std::fs::write(dir.join("edited.csv"), text.replace("# cfg cost_rotate = 10", "# cfg cost_rotate = 11")).unwrap();
    let out = run(&dir, &["rollout", "--plan", "edited.csv", "--field", "field.txt", "--start", "0,0,0"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn usage_and_validation_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    assert_eq!(code(&run(dir, &[])), 2);
    assert_eq!(code(&run(dir, &["plan", "--field", "f.txt"])), 2);
    assert_eq!(code(&run(dir, &["gen-field", "--kind", "vortex"])), 2);
    assert_eq!(code(&run(dir, &["--help"])), 0);

    assert_eq!(code(&run(dir, &["plan", "--field", "missing.txt", "--out", "p.csv", "--goal", "0,0,0"])), 3);
    std::fs::write(dir.join("bad.txt"), "format_version 1\nnx 2\n").unwrap();
    let out = run(dir, &["plan", "--field", "bad.txt", "--out", "p.csv", "--goal", "0,0,0"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("bad.txt"));

    let out = run(dir, &["gen-field", "--kind", "uniform", "--nx", "4", "--ny", "4", "--layers", "1", "--land", "1,1,0", "--out", "f.txt"]);
    assert_eq!(code(&out), 0);
    let out = run(dir, &["plan", "--field", "f.txt", "--out", "p.csv"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no goal"));
    let out = run(dir, &["plan", "--field", "f.txt", "--out", "p.csv", "--goal", "1,1,0"]);
    assert_eq!(code(&out), 3);
    let out = run(dir, &["plan", "--field", "f.txt", "--out", "p.csv", "--goal", "0,0,0", "--set", "dt_s=10", "--set", "v_ref_mps=1"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn rollout_that_cannot_reach_the_goal_fails_verification() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    // a wall of land splits a still 5 x 1 strip
    let out = run(dir, &["gen-field", "--kind", "uniform", "--nx", "5", "--ny", "1", "--layers", "1", "--land", "2,0,0", "--out", "f.txt"]);
    assert_eq!(code(&out), 0);
    let out = run(dir, &["plan", "--field", "f.txt", "--out", "p.csv", "--goal", "4,0,0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(value(&stdout(&out), "states"), "40 free 32 reachable 16");
    let out = run(dir, &["rollout", "--plan", "p.csv", "--field", "f.txt", "--start", "0,0,0"]);
    assert_eq!(code(&out), 4);
    assert_eq!(value(&stdout(&out), "terminal"), "STUCK");
    let out = run(dir, &["rollout", "--plan", "p.csv", "--field", "f.txt", "--start", "3,0,0"]);
    assert_eq!(code(&out), 0);
    let out = run(dir, &["rollout", "--plan", "p.csv", "--field", "f.txt", "--start", "2,0,0"]);
    assert_eq!(code(&out), 3);
}
