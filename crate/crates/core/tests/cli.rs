use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn liqshock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liqshock"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_writes_exact_header_and_terminal_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.csv");
    let o = liqshock(&["solve", "--I", "30", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "S,p_at_t0,q_at_t0,p_at_T,q_at_T");
    assert_eq!(lines.len(), 32);
    assert!(lines[1].starts_with("0,") && lines[1].ends_with(",0,0"));
    assert!(lines[31].starts_with("5,") && lines[31].ends_with(",3,3"));
}

#[test]
fn outputs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = liqshock(&["converge", "--levels", "30,60,120", "--scheme", "linearized", "--out", path.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn converge_to_stdout() {
    let o = liqshock(&["converge", "--levels", "30,60"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "I,value_R0,diff_R0,ratio_R0,order_R0,value_R1,diff_R1,ratio_R1,order_R1");
    assert!(lines[1].starts_with("30,0.243102116,,,,"));
    assert!(lines[2].starts_with("60,") && lines[2].ends_with(",,"));
}

#[test]
fn extrapolate_table_shape() {
    let o = liqshock(&["extrapolate", "--levels", "20,40,80", "--grid", "tavella", "--alpha", "15"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "I,Z,W,Y,diff_Y,ratio,order");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3].split(',').count(), 7);
    assert!(lines[3].split(',').all(|c| !c.is_empty()));
}

#[test]
fn trajectory_written_next_to_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "capture_trajectory=true\nintervals=10\n");
    let out = dir.path().join("fig.csv");
    let o = liqshock(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let traj = fs::read_to_string(dir.path().join("fig_trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,S,p,q\n"));
    // Δτ = 0.25 on I = 10: levels 0..4, 11 nodes each
    assert_eq!(traj.lines().count(), 1 + 5 * 11);
}

#[test]
fn invalid_config_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "nu01=1\nsigma=-1\n");
    let o = liqshock(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("sigma"), "{err}");

    let cfg = write_config(dir.path(), "volatility=0.3\n");
    assert_eq!(liqshock(&["solve", "--config", &cfg]).status.code(), Some(1));
    assert_eq!(liqshock(&["solve", "--scheme", "cubic"]).status.code(), Some(1));
    assert_eq!(liqshock(&["converge", "--levels", "30,50"]).status.code(), Some(1));
    assert_eq!(liqshock(&["solve", "--config", "/definitely/missing.cfg"]).status.code(), Some(1));
}

#[test]
fn enforced_restriction_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tau_rule=0.25\nenforce_restriction=true\n");
    let o = liqshock(&["solve", "--config", &cfg, "--I", "20"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("restriction"));
}

#[test]
fn verify_reports_restriction_breach() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tau_rule=0.25\nintervals=20\n");
    let o = liqshock(&["verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL restriction")), "{text}");
}

/// On the reference market every structural check passes; the price-level
/// positivity check fails by an O(Δτ) margin near S = 0.
#[test]
fn verify_on_reference_market() {
    for scheme in ["linear", "linearized"] {
        let o = liqshock(&["verify", "--I", "60", "--scheme", scheme]);
        assert_eq!(o.status.code(), Some(3));
        let text = String::from_utf8(o.stdout).unwrap();
        let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
        assert_eq!(failed.len(), 1, "{text}");
        assert!(failed[0].starts_with("FAIL positivity"));
        assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    }
}
