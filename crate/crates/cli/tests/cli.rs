use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elemsub"))
        .args(args)
        .env("ELEMSUB_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON output")
}

#[test]
fn rmax_of_e8() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["rmax", "--type", "E8"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["r_max"], 36);
    let o = run(&["rmax", "--type", "Q9"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rmax_by_enumeration_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    for (n, want) in [("2", 1), ("3", 2), ("4", 4)] {
        let o = run(&["rmax", "--n", n, "--p", "5"], dir.path());
        assert_eq!(o.status.code(), Some(0));
        let v = json(&o);
        assert_eq!(v["r_max"], want);
        assert_eq!(v["enumerated"], want);
    }
}

#[test]
fn verify_springer_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify-springer", "--family", "gl", "--n", "4", "--p", "7", "--d", "1", "--trials", "1000"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["failed"] == 0 && c["trials"] == 1000));
    let o = run(&["verify-springer", "--n", "7", "--p", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("p >= n"));
    let o = run(&["verify-springer", "--n", "3", "--p", "5", "--trials", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["enumerate", "--n", "3", "--p", "5"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--n", "3", "--r", "1", "--p", "6"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["census", "--n", "3", "--r", "2", "--primes", "2,5"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["enumerate", "--n", "2", "--r", "1", "--p", "5", "--budget-lines", "0"], dir.path()).status.code(), Some(2));
}

#[test]
fn budget_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["enumerate", "--n", "3", "--r", "1", "--p", "5", "--method", "naive", "--budget-lines", "100"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line budget"));
    let o = run(&["orbits", "--n", "3", "--r", "2", "--p", "5", "--budget-forms", "10"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn enumerate_writes_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["enumerate", "--n", "2", "--r", "1", "--p", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    for line in text.lines() {
        let rows: Vec<Vec<u32>> = serde_json::from_str(line).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].len(), 4);
    }
    let out = dir.path().join("points.jsonl");
    let o = run(&["enumerate", "--n", "2", "--r", "1", "--p", "5", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn orbits_of_gl3_planes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["orbits", "--n", "3", "--r", "2", "--p", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let sizes: Vec<u64> = v["orbits"].as_array().unwrap().iter().map(|o| o["size"].as_u64().unwrap()).collect();
    assert_eq!(sizes, vec![31, 31, 744]);
    assert_eq!(v["orbits"][2]["stabilizer_order"], "2000");
}

#[test]
fn census_caches_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["census", "--family", "gl", "--n", "3", "--r", "2", "--primes", "5,7,11,13,17"];
    let first = run(&args, dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let v = json(&first);
    let polys: Vec<&str> = v["families"].as_array().unwrap().iter().map(|f| f["polynomial"].as_str().unwrap()).collect();
    assert_eq!(polys, vec!["p^2 + p + 1", "p^2 + p + 1", "p^4 + p^3 - p - 1"]);
    assert_eq!(v["max_degree"], 4);
    let verified: Vec<bool> = v["families"].as_array().unwrap().iter().map(|f| f["verified"].as_bool().unwrap()).collect();
    assert_eq!(verified, vec![true, true, false]);
    for p in [5, 7, 11, 13, 17] {
        assert!(dir.path().join(format!("gl_n3_r2_q{p}.json")).exists());
    }
    let cached = dir.path().join("gl_n3_r2_q5.json");
    let stamp = fs::metadata(&cached).unwrap().modified().unwrap();
    let second = run(&args, dir.path());
    assert_eq!(second.stdout, first.stdout);
    assert_eq!(fs::metadata(&cached).unwrap().modified().unwrap(), stamp);
    let forced = run(&[&args[..], &["--force"]].concat(), dir.path());
    assert_eq!(forced.stdout, first.stdout);
    let md = run(&[&args[..], &["--format", "md"]].concat(), dir.path());
    assert!(stdout(&md).contains("| 744 | p^4 + p^3 - p - 1 |"));
}

#[test]
fn corrupt_cache_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["census", "--n", "2", "--r", "1", "--primes", "5,7"];
    assert_eq!(run(&args, dir.path()).status.code(), Some(0));
    let path = dir.path().join("gl_n2_r1_q5.json");
    let text = fs::read_to_string(&path).unwrap().replace("\"total_points\": 6", "\"total_points\": 7");
    fs::write(&path, text).unwrap();
    let o = run(&args, dir.path());
    assert_ne!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gl_n2_r1_q5.json") && err.contains("checksum"), "{err}");
    assert_eq!(run(&[&args[..], &["--force"]].concat(), dir.path()).status.code(), Some(0));
}

#[test]
fn mismatched_header_fails_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["census", "--n", "2", "--r", "1", "--primes", "5,7"];
    assert_eq!(run(&args, dir.path()).status.code(), Some(0));
    let path = dir.path().join("gl_n2_r1_q7.json");
    let text = fs::read_to_string(&path).unwrap().replace("\"basis_order_version\": 1", "\"basis_order_version\": 99");
    fs::write(&path, text).unwrap();
    let o = run(&args, dir.path());
    assert_ne!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gl_n2_r1_q7.json") && err.contains("header"), "{err}");
}

#[test]
fn report_merges_cached_censuses() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        ["census", "--n", "2", "--r", "1", "--primes", "5,7,11"],
        ["census", "--n", "3", "--r", "1", "--primes", "5,7,11"],
        ["census", "--n", "3", "--r", "2", "--primes", "5,7,11"],
    ] {
        assert_eq!(run(&args, dir.path()).status.code(), Some(0));
    }
    let o = run(&["report", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let cells: Vec<(u64, u64, u64)> = v["cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["n"].as_u64().unwrap(), c["r"].as_u64().unwrap(), c["orbit_count"].as_u64().unwrap()))
        .collect();
    assert_eq!(cells, vec![(2, 1, 1), (3, 1, 2), (3, 2, 3)]);
    // Three primes confirm a linear fit but cannot confirm the quartic and quintic orbits.
    let verified: Vec<bool> = v["cells"].as_array().unwrap().iter().map(|c| c["verified"].as_bool().unwrap()).collect();
    assert_eq!(verified, vec![true, false, false]);
    assert_eq!(v["cells"][0]["max_degree"], 1);
    let md = run(&["report", "--format", "md"], dir.path());
    assert!(stdout(&md).contains("| 3 | 2 (unconfirmed) | 2 (unconfirmed) |"), "{}", stdout(&md));
    let again = run(&["report", "--format", "md"], dir.path());
    assert_eq!(md.stdout, again.stdout);
}

#[test]
fn bridge_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["bridge", "--n", "3", "--r", "2", "--p", "5", "--d", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["points"], 806);
    assert_eq!(v["distinct_images"], 806);
    assert_eq!(v["passed"], true);
    let o = run(&["bridge", "--n", "2", "--r", "1", "--p", "5", "--d", "2"], dir.path());
    assert_eq!(json(&o)["points"], 26);
}
