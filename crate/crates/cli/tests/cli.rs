use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_detqpe"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("failed to launch detqpe")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// One alpha electron in one orbital with `h = -2π·3/8`.
const DELTA_TOY: &str = " &FCI NORB=1,NELEC=1,MS2=1,\n  ORBSYM=1,\n  ISYM=1,\n &END\n -2.356194490192345 1 1 0 0\n 0.0 0 0 0 0\n";

fn csv_rows(path: &Path) -> Vec<(usize, f64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,probability"));
    lines
        .map(|l| {
            let (m, p) = l.split_once(',').unwrap();
            (m.parse().unwrap(), p.parse().unwrap())
        })
        .collect()
}

#[test]
fn inspect_h2_reports_dimension_four() {
    let out = run(bin().arg("inspect").arg(fixture("h2_sto3g.fcidump")));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dimension      4"), "{text}");
    assert!(text.contains("electrons      1 alpha, 1 beta"));
}

#[test]
fn inspect_bare_space_reports_reduction() {
    let out = run(bin().args(["inspect", "--space", "15:5:5", "--json"]));
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dimension"], 9_018_009);
    let factor = v["memory"][0]["reduction_factor"].as_f64().unwrap();
    assert!((factor - 2f64.powi(30) / 9_018_009.0).abs() < 1e-9);
}

#[test]
fn inspect_offset_only_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.fcidump");
    fs::write(&path, " &FCI NORB=2,NELEC=2,MS2=0,\n &END\n 1.25 0 0 0 0\n").unwrap();
    let out = run(bin().arg("inspect").arg(&path));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("terms          pp 0 pqqp 0 pq 0 pqqr 0 pqrs 0"), "{text}");
    assert!(text.contains("offset         1.25"));
}

#[test]
fn delta_toy_writes_a_single_peak() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("toy.fcidump");
    fs::write(&input, DELTA_TOY).unwrap();
    for mode in ["overlap", "layered"] {
        let out_dir = dir.path().join(mode);
        let out = run(bin()
            .arg("run")
            .arg(&input)
            .args(["-p", "3", "-r", "1", "-t", "1", "--mode", mode, "--out"])
            .arg(&out_dir));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let rows = csv_rows(&out_dir.join("distribution.csv"));
        assert_eq!(rows.len(), 8);
        // other rows are at most floating-point rounding
        let nonzero: Vec<usize> = rows.iter().filter(|(_, p)| *p > 1e-15).map(|(m, _)| *m).collect();
        assert_eq!(nonzero, vec![3]);
        assert!((rows[3].1 - 1.0).abs() < 1e-10);
    }
}

#[test]
fn h2_ground_ansatz_reads_back_the_ground_energy() {
    let dir = tempfile::tempdir().unwrap();
    let ansatz = dir.path().join("ground.txt");
    let out = run(bin()
        .arg("oracle")
        .arg(fixture("h2_sto3g.fcidump"))
        .args(["--json", "--trotter-steps", "64", "--ground-ansatz"])
        .arg(&ansatz));
    assert!(out.status.success());
    let oracle: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e_fci = oracle["eigenvalues"][0].as_f64().unwrap();
    let out = run(bin()
        .arg("run")
        .arg(fixture("h2_sto3g.fcidump"))
        .arg("--ansatz")
        .arg(&ansatz)
        .args(["-p", "10", "-r", "64", "--window=-3:0", "--out"])
        .arg(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let energy = report["peaks"][0]["energies"][0]["energy"].as_f64().unwrap();
    let resolution = report["resolution"].as_f64().unwrap();
    assert!((energy - e_fci).abs() <= resolution / 2.0, "{energy} vs {e_fci}");
}

#[test]
fn missing_ansatz_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run(bin()
        .arg("run")
        .arg(fixture("h2_sto3g.fcidump"))
        .arg("--ansatz")
        .arg(dir.path().join("missing.txt"))
        .arg("--out")
        .arg(&out_dir));
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}

#[test]
fn bad_input_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fcidump");
    fs::write(&bad, "not a header\n").unwrap();
    assert_eq!(run(bin().arg("inspect").arg(&bad)).status.code(), Some(1));
    assert_eq!(run(bin().args(["run", "x.fcidump", "--window", "3:1"])).status.code(), Some(1));
    assert_eq!(run(bin().args(["run", "x.fcidump", "--mode", "sideways"])).status.code(), Some(1));
}

#[test]
fn embedded_manifest_reproduces_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let out = run(bin()
        .arg("run")
        .arg(fixture("h2o_6o4e.fcidump"))
        .args(["-p", "8", "-r", "4", "--seed", "7", "--out"])
        .arg(&first));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dist: serde_json::Value = serde_json::from_str(&fs::read_to_string(first.join("distribution.json")).unwrap()).unwrap();
    assert_eq!(dist["manifest"]["seed"], 7);
    assert_eq!(dist["manifest"]["precision_bits"], 8);
    let second = dir.path().join("second");
    let out = run(bin().arg("run").arg("--manifest").arg(first.join("report.json")).arg("--out").arg(&second));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(first.join("distribution.csv")).unwrap(), fs::read(second.join("distribution.csv")).unwrap());
}

#[test]
fn oracle_prints_trotter_table() {
    let out = run(bin().arg("oracle").arg(fixture("h2_sto3g.fcidump")).args(["--trotter-steps", "1,2"]));
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("-1.137270174"), "{text}");
    assert!(text.contains("trotter error at t=1"));
}
