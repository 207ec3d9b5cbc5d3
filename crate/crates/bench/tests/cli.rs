use std::path::PathBuf;
use std::process::{Command, Output};

use rsdict::{Dict, RankSelect};
use rsdict_bench::CSV_HEADER;

fn rsdict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsdict"))
        .args(args)
        .env("RSDICT_THREADS", "1")
        .output()
        .expect("failed to launch rsdict")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rsdict-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_csv(path: &PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn verify_passes_on_small_inputs() {
    let out = rsdict(&["verify", "--n", "2^12", "--density", "0.01,0.3"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("0 failed"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn injected_fault_is_detected() {
    let out = rsdict(&[
        "verify",
        "--n",
        "2^10",
        "--density",
        "0.1",
        "--no-adversarial",
        "--inject-fault",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert_eq!(text.matches("FAIL").count(), 7, "{text}");
}

#[test]
fn measure_writes_the_csv_header_and_rows() {
    let dir = scratch("measure");
    let path = dir.join("m.csv");
    let out = rsdict(&[
        "measure",
        "--structures",
        "sarray,vcode",
        "--n",
        "2^14",
        "--density",
        "0.05",
        "--ops",
        "1000",
        "--reps",
        "1",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = read_csv(&path);
    assert_eq!(header, CSV_HEADER);
    // nH0, then per structure: rank, select and size
    assert_eq!(rows.len(), 1 + 2 * 3);
    assert_eq!(rows[0][0], "nH0");
    for row in &rows[1..] {
        match row[4].as_str() {
            "rank" | "select" => assert!(row[5].parse::<f64>().unwrap() > 0.0),
            "size" => assert!(row[5].is_empty()),
            op => panic!("unexpected op {op}"),
        }
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn dump_sizes_are_deterministic() {
    let dir = scratch("dump");
    let run = |name: &str| {
        let path = dir.join(name);
        let out = rsdict(&[
            "dump",
            "--n",
            "2^16",
            "--density",
            "0.01,0.5",
            "--seed",
            "9",
            "--csv",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        read_csv(&path)
    };
    let (header, a) = run("a.csv");
    let (_, b) = run("b.csv");
    assert_eq!(header, CSV_HEADER);
    assert_eq!(a, b);
    // nH0 plus seven structures per density
    assert_eq!(a.len(), 2 * 8);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn dump_writes_loadable_containers() {
    let dir = scratch("containers");
    let out = rsdict(&[
        "dump",
        "--structures",
        "esp,recrank",
        "--n",
        "5000",
        "--density",
        "0.2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert_eq!(files.len(), 2);
    for f in files {
        let d = Dict::from_bytes(&std::fs::read(&f).unwrap()).unwrap();
        assert_eq!(d.len(), 5000);
        assert_eq!(d.rank1(4999).unwrap(), d.count_ones());
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exact_m_places_the_requested_count() {
    let dir = scratch("exact");
    let path = dir.join("e.csv");
    let out = rsdict(&[
        "dump",
        "--structures",
        "plain",
        "--n",
        "10000",
        "--density",
        "0.0123",
        "--exact-m",
        "--out",
        dir.to_str().unwrap(),
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rsd = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "rsd"))
        .unwrap();
    let d = Dict::from_bytes(&std::fs::read(rsd).unwrap()).unwrap();
    assert_eq!(d.count_ones(), 123);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn params_are_applied_and_checked() {
    let base = [
        "dump",
        "--structures",
        "esp",
        "--n",
        "2^16",
        "--density",
        "0.05",
    ];
    let size = |extra: &[&str]| {
        let out = rsdict(&[&base[..], extra].concat());
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        stdout(&out)
            .lines()
            .last()
            .unwrap()
            .split_whitespace()
            .nth(5)
            .unwrap()
            .to_string()
    };
    assert_ne!(
        size(&[]),
        size(&["--param", "esp.k=2^10", "--param", "esp.l=2^7"])
    );

    for bad in ["esp.k=100", "esp.q=4", "esp.s=128", "esp.k"] {
        let out = rsdict(&[&base[..], &["--param", bad]].concat());
        assert_eq!(out.status.code(), Some(2), "{bad} accepted");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn rejects_unknown_structure_and_bad_thread_count() {
    let out = rsdict(&["dump", "--structures", "btree", "--n", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_rsdict"))
        .args(["verify", "--n", "100", "--density", "0.5"])
        .env("RSDICT_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
