use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn streamlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("STREAMLAB_OUT")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gen_kn_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let o = streamlab(
        dir.path(),
        &["gen", "--family", "kn", "--n", "64", "--q", "5"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = json(&dir.path().join("F.json"));
    let data: Vec<u64> = f["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(data.len(), 64);
    for (i, &s) in data.iter().enumerate() {
        assert_eq!(s == 1, (63 - i).is_power_of_two(), "position {i}");
    }
    assert_eq!(json(&dir.path().join("manifest.json"))["fixed_nonzero"], 6);
}

#[test]
fn gen_hamming_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = streamlab(
        dir.path(),
        &[
            "gen",
            "--problem",
            "hamming",
            "--family",
            "hamming",
            "--mu",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["hamming"]["r"], 8);
    assert_eq!(m["hamming"]["copy_starts"], serde_json::json!([55, 47, 31]));
    assert_eq!(m["params"]["n"], 64);
    assert!(dir.path().join("hamming/manifest.json").exists());
}

#[test]
fn gen_rejects_bad_length() {
    let dir = tempfile::tempdir().unwrap();
    let o = streamlab(dir.path(), &["gen", "--family", "kn", "--n", "48"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("power of two"));
}

#[test]
fn naive_and_fast_runs_agree() {
    let root = tempfile::tempdir().unwrap();
    let bundle = root.path().join("inst");
    assert!(streamlab(
        &bundle,
        &[
            "gen",
            "--problem",
            "mult",
            "--n",
            "128",
            "--q",
            "7",
            "--seed",
            "4"
        ]
    )
    .status
    .success());
    let mut outputs = Vec::new();
    for algo in ["naive", "fast"] {
        let out = root.path().join(algo);
        let o = streamlab(
            &out,
            &[
                "run",
                "--instance-dir",
                bundle.to_str().unwrap(),
                "--algo",
                algo,
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let report = json(&out.join("report.json"));
        let t = &report["totals"];
        assert!(t["sum_iv_pp"].as_u64().unwrap() <= t["probes"].as_u64().unwrap());
        assert!(t["sum_iv_wr"].as_u64().unwrap() <= t["probes"].as_u64().unwrap());
        assert_eq!(report["n"], 128);
        assert!(out.join("tree.csv").exists());
        outputs.push(fs::read_to_string(out.join("outputs.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].starts_with("t,x,A_t\n"));
}

#[test]
fn toy_trace_root_transfer() {
    let dir = tempfile::tempdir().unwrap();
    let o = streamlab(
        dir.path(),
        &["run", "--n", "2", "--q", "3", "--w", "8", "--trace"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // root: the counter and the first input cross from arrival 0 to arrival 1
    let tree = fs::read_to_string(dir.path().join("tree.csv")).unwrap();
    assert_eq!(tree, "node_id,t0,t1,t2,ell,Iv_pp,Iv_wr\n1,0,0,1,2,2,2\n");
    assert!(dir.path().join("trace.csv").exists());
}

#[test]
fn witness_runs() {
    for args in [
        vec![
            "run",
            "--family",
            "kn",
            "--n",
            "32",
            "--q",
            "5",
            "--witness",
        ],
        vec![
            "run",
            "--family",
            "toeplitz",
            "--n",
            "32",
            "--q",
            "3",
            "--witness",
            "--algo",
            "fast",
        ],
        vec![
            "run",
            "--problem",
            "hamming",
            "--family",
            "hamming",
            "--witness",
        ],
    ] {
        let dir = tempfile::tempdir().unwrap();
        let o = streamlab(dir.path(), &args);
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let w = &json(&dir.path().join("report.json"))["witness"];
        assert_eq!(w["failed"], 0, "{args:?}");
        assert!(w["recovered"].as_u64().unwrap() > 0, "{args:?}");
        let csv = fs::read_to_string(dir.path().join("decode.csv")).unwrap();
        assert!(csv.starts_with("node_id,method,recovered_count,ambiguity,ok\n"));
    }
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let o = streamlab(
        dir.path(),
        &["verify", "--suite", "conv-kn", "--n", "16", "--q", "5"],
    );
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS conv-kn"));

    let o = streamlab(
        dir.path(),
        &[
            "verify",
            "--suite",
            "toeplitz-fraction",
            "--q",
            "2",
            "--ell",
            "2",
        ],
    );
    assert!(o.status.success());
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["suites"][0]["metrics"]["fraction"], "1/2");

    let o = streamlab(
        dir.path(),
        &[
            "verify",
            "--suite",
            "roundtrip",
            "--n",
            "32",
            "--trials",
            "3",
        ],
    );
    assert!(o.status.success(), "{}", stdout(&o));

    let o = streamlab(
        dir.path(),
        &["verify", "--suite", "mult-ambiguity", "--n", "8"],
    );
    assert!(o.status.success(), "warnings never fail a run");

    let o = streamlab(dir.path(), &["verify", "--suite", "nonsense"]);
    assert!(!o.status.success());
}

#[test]
fn sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = streamlab(dir.path(), &["sweep", "--n", "16,32,64"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(
        csv.starts_with("n,algorithm,probes,sum_iv_pp,sum_iv_wr,amortized_probes,amortized_iv\n")
    );

    let empty = tempfile::tempdir().unwrap();
    let o = streamlab(empty.path(), &["sweep", "--n"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(empty.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn identical_config_reproduces_bytes() {
    let root = tempfile::tempdir().unwrap();
    let files: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .flat_map(|name| {
            let out = root.path().join(name);
            assert!(streamlab(
                &out,
                &[
                    "run",
                    "--problem",
                    "hamming",
                    "--n",
                    "64",
                    "--q",
                    "6",
                    "--seed",
                    "9"
                ]
            )
            .status
            .success());
            ["outputs.csv", "tree.csv"].map(|f| fs::read(out.join(f)).unwrap())
        })
        .collect();
    assert_eq!(files[0], files[2]);
    assert_eq!(files[1], files[3]);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_streamlab"))
        .args(["gen", "--family", "kn", "--n", "8"])
        .env("STREAMLAB_OUT", &target)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("F.json").exists());
}
