use std::path::Path;
use std::process::{Command, Output};

fn landing(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landing")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn distance_prints_the_integer() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (metric, want) in [("levenshtein", "2"), ("hamming", "5"), ("position", "10")] {
        let o = landing(&["distance", "--metric", metric, "SLLHLH", "LLHLHS"], d);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout(&o), want);
    }
    let a = "HHLSLLLSHHSLLSSSLHHL";
    let b = "HHSLLLLSSHHSLLSSLHHL";
    for (metric, want) in [("levenshtein", "4"), ("hamming", "6"), ("position", "10")] {
        assert_eq!(stdout(&landing(&["distance", "--metric", metric, a, b], d)), want);
    }
    assert_eq!(code(&landing(&["distance", "--metric", "hamming", "HLS", "HL"], d)), 2);
    assert_eq!(code(&landing(&["distance", "--metric", "position", "HLS", "HLL"], d)), 2);
    assert_eq!(code(&landing(&["distance", "--metric", "levenshtein", "HXS", "HL"], d)), 2);
    assert_eq!(code(&landing(&["distance", "--metric", "cosine", "HLS", "HLS"], d)), 1);
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&landing(&["--help"], d)), 0);
    assert_eq!(code(&landing(&["--version"], d)), 0);
    assert_eq!(code(&landing(&[], d)), 1);
    assert_eq!(code(&landing(&["frobnicate"], d)), 1);
    assert_eq!(code(&landing(&["simulate", "--in", "missing.csv", "--out", "p.csv"], d)), 1);
    std::fs::write(d.join("bad.json"), "{\"split\": {\"train\": 500}}").unwrap();
    assert_eq!(code(&landing(&["report", "--config", "bad.json", "--out-dir", "o"], d)), 1);
    std::fs::write(d.join("bad.csv"), "a,b\n1,2\n").unwrap();
    assert_eq!(code(&landing(&["simulate", "--in", "bad.csv", "--out", "p.csv"], d)), 2);
    assert_eq!(code(&landing(&["evaluate", "--pairs", "p.csv", "--model", "m.json", "--thresholds", "1,2", "--out", "r.json"], d)), 1);
    assert_eq!(code(&landing(&["gen-data", "--sequences", "5", "--gap-max", "90", "--out", "a.csv"], d)), 1);
}

#[test]
fn pipeline_from_generation_to_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let ok = |args: &[&str]| {
        let o = landing(args, d);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    };
    ok(&["gen-data", "--sequences", "12", "--aircraft", "8", "--seed", "5", "--gap-min", "1", "--gap-max", "60", "--out", "arrivals.csv"]);
    ok(&["simulate", "--in", "arrivals.csv", "--threshold", "0.05", "--out", "pairs.csv"]);
    ok(&[
        "train", "--pairs", "pairs.csv", "--metric", "position", "--pop", "10", "--gens", "4", "--repeats", "5", "--step", "2",
        "--seed", "3", "--out", "model.json", "--history", "history.csv",
    ]);
    ok(&["evaluate", "--pairs", "pairs.csv", "--model", "model.json", "--step", "2", "--thresholds", "3,3,4", "--out", "results.json"]);

    let arrivals = std::fs::read_to_string(d.join("arrivals.csv")).unwrap();
    assert_eq!(arrivals.lines().count(), 1 + 12 * 8);
    let history = std::fs::read_to_string(d.join("history.csv")).unwrap();
    assert_eq!(history.lines().next().unwrap(), "generation,best_fitness,mean_fitness,lev_eval,ham_eval,pos_eval");
    assert_eq!(history.lines().count(), 1 + 5);

    let results: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("results.json")).unwrap()).unwrap();
    assert_eq!(results["pairs"].as_array().unwrap().len(), 12);
    assert_eq!(results["thresholds"]["position"], 4);
    for m in ["levenshtein", "hamming", "position"] {
        assert!(results["counts_below"][m].as_u64().unwrap() <= 12);
        assert_eq!(results["summaries"][m]["count"], 12);
        assert!(results["modes"][m].is_u64());
    }

    // a tampered model is rejected as bad data
    let model = std::fs::read_to_string(d.join("model.json")).unwrap();
    std::fs::write(d.join("broken.json"), model.replacen("\"layout_version\": 1", "\"layout_version\": 2", 1)).unwrap();
    assert_eq!(code(&landing(&["evaluate", "--pairs", "pairs.csv", "--model", "broken.json", "--out", "r.json"], d)), 2);
}

#[test]
fn report_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("experiment.json"),
        r#"{"seed": 2, "dataset": {"n_sequences": 6, "n_aircraft": 8}, "split": {"train": 3, "test": 3},
            "runs_per_metric": 2, "ga": {"population": 6, "generations": 3}, "repeats": 3}"#,
    )
    .unwrap();
    for (out, threads) in [("a", "1"), ("b", "3")] {
        let o = landing(&["--threads", threads, "report", "--config", "experiment.json", "--out-dir", out], d);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let files = |root: &Path| {
        let mut v = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(p) = stack.pop() {
            for e in std::fs::read_dir(&p).unwrap() {
                let e = e.unwrap().path();
                if e.is_dir() {
                    stack.push(e);
                } else {
                    v.push((e.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&e).unwrap()));
                }
            }
        }
        v.sort();
        v
    };
    let (a, b) = (files(&d.join("a")), files(&d.join("b")));
    assert_eq!(a.len(), 10 + 6 * 2);
    assert_eq!(a, b);
}
