use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exterior_ns::harness::{read_csv, ExperimentConfig, Snapshot};

fn exe(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exterior-ns"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

const SMALL: &str = "
mode = nonlinear
label = small
n_s = 32
n_theta = 32
dt = 0.01
t_final = 3
alpha = 0.1
blob = 3, 1, 0.5, 1
blob = 3, -1, 0.5, -1
probes = 0.5, 1, 1.5, 2, 3
exponents = 4
";

#[test]
fn shipped_configs_parse() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.blob_spec().unwrap();
        count += 1;
    }
    assert!(count >= 5);
}

#[test]
fn run_then_fit_then_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let snaps = tmp.path().join("snaps");
    fs::write(tmp.path().join("small.conf"), format!("{SMALL}snapshot_dir = {}\n", snaps.display())).unwrap();

    let out = exe(&["run", "small.conf", "-o", "small.csv"], tmp.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("wrote small.csv"));
    let series = read_csv(fs::read(tmp.path().join("small.csv")).unwrap().as_slice()).unwrap();
    assert_eq!(series.len(), 1);
    assert_eq!(series[0].label, "small");
    assert_eq!(series[0].rows().len(), 5);

    let out = exe(&["rate-fit", "small.csv", "--from", "0.5", "--to", "3"], tmp.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let line = text(&out.stdout);
    assert!(line.starts_with("small: slope = ") && line.contains("points = 5"), "{line}");

    let mut files: Vec<PathBuf> = fs::read_dir(&snaps).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), 5);
    let last = files.iter().find(|p| p.to_string_lossy().ends_with("_t3.osn")).unwrap();
    let snap = Snapshot::read(fs::File::open(last).unwrap()).unwrap();
    assert_eq!((snap.n_s, snap.n_theta, snap.t), (32, 32, 3.0));
    let out = exe(&["snapshot-dump", last.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let dump = text(&out.stdout);
    assert!(dump.contains("n_s = 32, n_theta = 32") && dump.contains("t = 3"), "{dump}");
}

#[test]
fn csv_goes_to_stdout() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("small.conf"), SMALL).unwrap();
    let out = exe(&["run", "small.conf", "-o", "-"], tmp.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let series = read_csv(out.stdout.as_slice()).unwrap();
    assert_eq!(series[0].rows().len(), 5);
}

#[test]
fn errors_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.conf"), "mode = nonlinear\nspeed = 3\n").unwrap();
    let out = exe(&["run", "bad.conf"], tmp.path());
    assert!(!out.status.success());
    let err = text(&out.stderr);
    assert!(err.contains("line 2") && err.contains("speed"), "{err}");

    fs::write(tmp.path().join("small.conf"), SMALL).unwrap();
    let out = exe(&["estimates", "small.conf"], tmp.path());
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("mode nonlinear"));

    let out = exe(&["snapshot-dump", "missing.osn"], tmp.path());
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("missing.osn"));

    fs::write(tmp.path().join("junk.osn"), b"OSN2 not a snapshot").unwrap();
    let out = exe(&["snapshot-dump", "junk.osn"], tmp.path());
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("bad magic"));

    fs::write(tmp.path().join("empty.csv"), "label,t,p\n").unwrap();
    let out = exe(&["rate-fit", "empty.csv"], tmp.path());
    assert!(!out.status.success());
}

#[test]
fn estimates_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "
mode = estimates
n_s = 32
n_theta = 32
dt = 0.01
t_final = 2
blob = 5, 0, 0.6, 1
blob = 5, 0, 1.0, -1
probes = 0.5, 1, 2
";
    fs::write(tmp.path().join("est.conf"), cfg).unwrap();
    let out = exe(&["estimates", "est.conf"], tmp.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let table = text(&out.stdout);
    assert!(table.starts_with("q,p,K1,K3,K4,tail_non_increasing\n"), "{table}");
    assert!(table.contains("2,inf,") && table.contains("free heat gap = "), "{table}");
}
