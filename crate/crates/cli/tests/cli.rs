//! End-to-end checks of the `dephasim` binary: exit codes, output schema,
//! and byte-level reproducibility across runs and worker counts.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dephasim"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "ensemble = -5\n").unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("ensemble"), "{stderr}");

    let out = bin()
        .args(["sweep", "--omega0-grid", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_with_code_3() {
    // The raw thermal frequency drives the coherence to underflow, so the
    // divisibility witness cannot form its intermediate map.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hot.cfg");
    std::fs::write(&cfg, "theta_mhz = 3.93e9\n").unwrap();
    let out = bin()
        .args(["sweep", "--omega0-grid", "0.05:0.05:0.01", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("numeric failure"), "{stderr}");
}

#[test]
fn unwritable_output_exits_with_code_4() {
    let out = bin()
        .args([
            "sweep",
            "--omega0-grid",
            "0.05:0.05:0.01",
            "--tf",
            "0.5",
            "--out",
            "/nonexistent-dir/sweep.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sweep_csv_has_the_documented_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let status = bin()
        .args(["sweep", "--omega0-grid", "0.09:0.12:0.01", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out_path);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# dephasim 0.1.0");
    assert_eq!(lines.next().unwrap(), "# experiment = sweep");
    let columns = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(columns, "omega0_mhz,n0_bits,n_blp,n_rhp");
    // One row per grid point.
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("omega0"))
        .collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert_eq!(row.split(',').count(), 4);
    }
}

#[test]
fn trajectory_csv_row_count_matches_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("traj.csv");
    let status = bin()
        .args([
            "trajectory",
            "--mode",
            "mc",
            "--ensemble",
            "25",
            "--dt",
            "0.05",
            "--tf",
            "2.5",
            "--out",
        ])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out_path);
    let columns = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(columns, "t_us,f,f_stderr,chi,qmi_bits");
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("t_us"))
        .count();
    assert_eq!(rows, 51);
}

#[test]
fn repeated_runs_and_worker_counts_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (name, threads) in [("a.csv", "1"), ("b.csv", "2"), ("c.csv", "2")] {
        let out_path = dir.path().join(name);
        let status = bin()
            .args([
                "trajectory",
                "--mode",
                "mc",
                "--ensemble",
                "40",
                "--dt",
                "0.05",
                "--tf",
                "2.5",
                "--omega0",
                "0.5",
                "--seed",
                "123",
                "--threads",
                threads,
                "--out",
            ])
            .arg(&out_path)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(read(&out_path));
    }
    assert_eq!(outputs[0], outputs[1], "1 vs 2 workers");
    assert_eq!(outputs[1], outputs[2], "repeated run");
}

#[test]
fn single_point_grid_rerun_gives_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_path = dir.path().join(name);
        let status = bin()
            .args(["sweep", "--omega0-grid", "0.11:0.11:0.01", "--out"])
            .arg(&out_path)
            .status()
            .unwrap();
        assert!(status.success());
        read(&out_path)
    };
    assert_eq!(run("one.csv"), run("two.csv"));
}

#[test]
fn channels_writes_one_file_per_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("ch.csv");
    // Shrunk cutoff and coarse grid keep the three Monte Carlo runs quick.
    let dircfg = dir.path().join("small.cfg");
    std::fs::write(&dircfg, "omega_j_mhz = 100\nensemble = 30\ndt_us = 0.05\n").unwrap();
    let status = bin()
        .args(["channels", "--config"])
        .arg(&dircfg)
        .arg("--out")
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    for tag in ["s", "a", "sa"] {
        let path = dir.path().join(format!("ch_{tag}.csv"));
        let text = read(&path);
        let columns = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(
            columns,
            "t_us,f_analytic,f_mc,f_stderr,qfi,qfi_flow,qfi_closed,qfi_flow_closed"
        );
    }
    // Selecting one configuration writes exactly the requested path.
    let only = dir.path().join("only.csv");
    let status = bin()
        .args(["channels", "--channels", "a", "--config"])
        .arg(&dircfg)
        .arg("--out")
        .arg(&only)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(only.exists());
}

#[test]
fn decompose_routes_agree_and_flows_track_the_fd_flow() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("dec.csv");
    let status = bin()
        .args([
            "decompose",
            "--dt",
            "0.02",
            "--tf",
            "4",
            "--omega0",
            "0.05",
            "--out",
        ])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out_path);
    let columns = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        columns,
        "t_us,qfi_spectral,qfi_sld,qfi_flow,flow_total,flow_z_s"
    );
    let mut checked = 0usize;
    for line in text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("t_us"))
    {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (t, q_spectral, q_sld, flow_fd, flow_total) = (v[0], v[1], v[2], v[3], v[4]);
        assert!(
            (q_spectral - q_sld).abs() < 1e-8,
            "t = {t}: spectral {q_spectral} vs sld {q_sld}"
        );
        // Interior points: decomposed flow tracks the finite-difference
        // flow within 5%.
        if t > 0.5 && t < 3.5 {
            assert!(
                (flow_total - flow_fd).abs() <= 0.05 * flow_fd.abs(),
                "t = {t}: {flow_total} vs {flow_fd}"
            );
            checked += 1;
        }
    }
    assert!(checked > 100);
}
