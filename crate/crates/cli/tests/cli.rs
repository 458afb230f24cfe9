use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hchan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hchan"))
        .args(args)
        .current_dir(dir)
        .env_remove("HCHAN_MANIFEST_DIR")
        .output()
        .expect("spawn hchan")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = hchan(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is a JSON error object");
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn manifests(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(dir.join(".hchan/manifests"))
        .map(|rd| rd.map(|e| e.unwrap().path()).collect())
        .unwrap_or_default();
    v.sort();
    v
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

#[test]
fn extremality_example() {
    let t = TempDir::new().unwrap();
    let v = ok_json(t.path(), &["extremality", "--group", "s3", "--irrep", "2d", "--xi", "i/sqrt(10),3/sqrt(10)"]);
    assert_eq!(v["verdict"], "maximally-extreme");
    assert_eq!(v["span_dim"], 4);
    assert_eq!(v["aqbc_violation"], true);
}

#[test]
fn normalized_character_is_not_extreme() {
    let t = TempDir::new().unwrap();
    let v = ok_json(t.path(), &["extremality", "--group", "s3", "--phi", "1,-1/2,-1/2,0,0,0"]);
    assert_eq!(v["verdict"], "not-extreme");
    assert_eq!(v["rank"], 4);
    assert_eq!(v["non_real"], false);
}

#[test]
fn bloch_orbit_csv_example() {
    let t = TempDir::new().unwrap();
    let out = hchan(t.path(), &["bloch-orbit", "--group", "s3", "--irrep", "2d", "--xi", "1/sqrt(2),i/sqrt(2)", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let aff: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("# affine_span_dim: "))
        .expect("metadata line")
        .parse()
        .unwrap();
    assert!(aff <= 2);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let v: Vec<f64> = r.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert_eq!(v.len(), 3);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bloch_orbit_json() {
    let t = TempDir::new().unwrap();
    let v = ok_json(t.path(), &["bloch-orbit", "--group", "s3", "--irrep", "2d", "--xi", "i/sqrt(10),3/sqrt(10)"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["affine_span_dim"], 3);
    assert_eq!(v["rows"][0]["label"], "e");
}

#[test]
fn theta_of_point_mass_is_identity() {
    let t = TempDir::new().unwrap();
    let v = ok_json(t.path(), &["channel", "theta", "--group", "z2", "--measure", "1,0"]);
    assert_eq!(v["dim_in"], 2);
    let kraus = v["kraus"].as_array().unwrap();
    assert_eq!(kraus.len(), 1);
    let want = serde_json::json!([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]);
    assert_eq!(kraus[0], want);
}

#[test]
fn exit_codes() {
    let t = TempDir::new().unwrap();
    let d = t.path();
    let out = hchan(d, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(error_kind(&out), "UnknownSubcommand");
    let out = hchan(d, &["channel", "frobnicate"]);
    assert_eq!(out.status.code(), Some(64));

    for args in [
        vec!["channel", "theta", "--group", "z2", "--measure", "1,1"],
        vec!["channel", "theta", "--group", "z2", "--measure", "1/0,1"],
        vec!["channel", "theta", "--group", "q7", "--measure", "1"],
        vec!["extremality", "--group", "s3", "--irrep", "2d", "--xi", "1,1"],
        vec!["extremality", "--group", "s3", "--irrep", "2d"],
        vec!["capacity", "--group", "z2", "--phi", "1,0"],
        vec!["aqbc-search", "--group", "s3", "--irrep", "2d", "--samples", "3"],
        vec!["duality", "--group", "z3", "--measure", "haar", "--format", "csv"],
        vec!["duality", "--group", "s3", "--measure", "haar"],
        vec!["eb-test", "--group", "z2"],
        vec!["channel", "check", "missing.json"],
        vec!["duality", "--group", "z3"],
    ] {
        let out = hchan(d, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_kind(&out), "ValidationError", "{args:?}");
        assert!(out.stdout.is_empty());
    }
    assert!(manifests(d).is_empty());
}

#[test]
fn library_error_variant_is_reported() {
    let t = TempDir::new().unwrap();
    let out = hchan(t.path(), &["extremality", "--group", "s3", "--irrep", "2d", "--xi", "1,1"]);
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["variant"], "NonUnitVector");
}

#[test]
fn help_documents_conventions() {
    let t = TempDir::new().unwrap();
    for args in [vec!["--help"], vec!["capacity", "--help"], vec!["channel", "check", "--help"], vec!["group", "show", "--help"]] {
        let out = hchan(t.path(), &args);
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        for needle in ["bits", "Choi", "element", "1e-10", "Exit codes"] {
            assert!(text.contains(needle), "{args:?} lacks {needle}");
        }
    }
    let out = hchan(t.path(), &["--version"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn every_run_writes_a_replayable_manifest() {
    let t = TempDir::new().unwrap();
    let d = t.path();
    let runs: Vec<Vec<&str>> = vec![
        vec!["group", "build", "--group", "d4-semidirect"],
        vec!["group", "show", "--group", "s4"],
        vec!["channel", "theta-hat", "--group", "z3", "--phi", "1,1/2,1/2"],
        vec!["channel", "weyl", "--d", "2", "--q", "1/2,0,0,1/2"],
        vec!["extremality", "--group", "d4", "--irrep", "2d", "--xi", "(1+i)/2,1/sqrt(2)"],
        vec!["aqbc-search", "--group", "s3", "--irrep", "2d", "--samples", "50", "--seed", "7"],
        vec!["capacity", "--group", "s3", "--irrep", "2d", "--xi", "i/sqrt(10),3/sqrt(10)", "--seed", "1", "--restarts", "4"],
        vec!["moe", "--group", "z4", "--measure", "1/2,1/4,1/4,0", "--seed", "2", "--restarts", "4"],
        vec!["eb-test", "--group", "z2xz2", "--measure", "haar"],
        vec!["fixpoints", "--group", "d4-semidirect", "--measure", "1/2,0,0,0,1/2,0,0,0"],
        vec!["noiseless", "--group", "s3", "--measure", "haar", "--seed", "5"],
        vec!["duality", "--group", "z2xz4", "--measure", "1/2,1/4,0,0,1/4,0,0,0"],
    ];
    for args in &runs {
        let out = hchan(d, args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let ms = manifests(d);
    assert_eq!(ms.len(), runs.len());
    for m in ms {
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
        assert_eq!(doc["outputs"][0]["path"], "-");
        assert_eq!(doc["tool_version"], env!("CARGO_PKG_VERSION"));
        let out = hchan(d, &["replay", m.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", m.display());
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(r["identical"], true);
    }
}

#[test]
fn stochastic_manifest_records_seed() {
    let t = TempDir::new().unwrap();
    let d = t.path();
    ok_json(d, &["noiseless", "--group", "z3", "--measure", "1/2,1/2,0", "--seed", "42"]);
    let m = &manifests(d)[0];
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["command"], "noiseless");
}

#[test]
fn out_files_inputs_and_tampering() {
    let t = TempDir::new().unwrap();
    let d = t.path();
    let out = hchan(d, &["channel", "theta", "--group", "s3", "--measure", "1/2,0,0,1/2,0,0", "--out", "th.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(d.join("th.json.manifest.json").is_file());

    let v = ok_json(d, &["channel", "check", "th.json", "--manifest", "check.json"]);
    assert_eq!(v["bistochastic"], true);
    assert_eq!(v["unitary_conjugation"], false);
    assert_eq!(v["choi_rank"], 2);
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.join("check.json")).unwrap()).unwrap();
    assert_eq!(m["inputs"][0]["path"], "th.json");
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let v = ok_json(d, &["channel", "compose", "--outer", "th.json", "--inner", "th.json"]);
    assert_eq!(v["dim_in"], 6);

    // Recorded hash altered: replay must report a mismatch.
    let path = d.join("check.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let sha = m["outputs"][0]["sha256"].as_str().unwrap();
    std::fs::write(&path, text.replace(sha, &"0".repeat(64))).unwrap();
    let out = hchan(d, &["replay", "check.json"]);
    assert_eq!(out.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["identical"], false);
    assert_eq!(r["inputs"][0]["unchanged"], true);
}

#[test]
fn group_documents_round_trip_through_files() {
    let t = TempDir::new().unwrap();
    let d = t.path();
    assert_eq!(hchan(d, &["group", "build", "--group", "d4-semidirect", "--out", "g.json"]).status.code(), Some(0));
    let a = ok_json(d, &["fixpoints", "--group", "d4-semidirect", "--measure", "haar"]);
    let b = ok_json(d, &["fixpoints", "--group", "g.json", "--measure", "haar"]);
    assert_eq!(a, b);
    let g = ok_json(d, &["group", "show", "--group", "g.json"]);
    assert_eq!(g["order"], 8);
    let orders = g["element_orders"].as_array().unwrap();
    assert_eq!(orders.iter().filter(|o| **o == 4).count(), 2);
}

#[test]
fn capacity_of_two_point_dephasing_matches_closed_form() {
    let t = TempDir::new().unwrap();
    for (lit, lambda) in [("1/2", 0.5), ("0.9", 0.9), ("-1/3", -1.0 / 3.0), ("0", 0.0)] {
        let phi = format!("1,{lit}");
        let v = ok_json(t.path(), &["capacity", "--group", "z2", "--phi", &phi, "--seed", "0"]);
        let want = (1.0 - binary_entropy((1.0 + f64::abs(lambda)) / 2.0)).max(0.0);
        let got = v["value"].as_f64().unwrap();
        assert!((got - want).abs() < 1e-8, "λ = {lambda}: {got} vs {want}");
        assert_eq!(v["units"], "bits");
    }
}

#[test]
fn moe_formula_fields() {
    let t = TempDir::new().unwrap();
    let v = ok_json(t.path(), &["moe", "--group", "z3", "--phi", "1,0,0", "--seed", "0", "--restarts", "4"]);
    assert!(v["value"].as_f64().unwrap().abs() < 1e-9);
    assert!((v["restricted_formula"].as_f64().unwrap() - 3f64.log2()).abs() < 1e-9);
    assert_eq!(v["witness"]["vector"].as_array().unwrap().len(), 3);
}

#[test]
fn eb_verdicts() {
    let t = TempDir::new().unwrap();
    let d = t.path();
    assert_eq!(ok_json(d, &["eb-test", "--group", "z4", "--measure", "haar"])["entanglement_breaking"], true);
    assert_eq!(ok_json(d, &["eb-test", "--group", "s3", "--measure", "haar"])["entanglement_breaking"], false);
    assert_eq!(ok_json(d, &["eb-test", "--group", "s3", "--phi", "1,0,0,0,0,0"])["entanglement_breaking"], true);
    assert_eq!(ok_json(d, &["eb-test", "--group", "s3", "--phi", "1,1,1,1,1,1"])["entanglement_breaking"], false);
}

#[test]
fn aqbc_search_is_thread_independent() {
    let t = TempDir::new().unwrap();
    let args = ["aqbc-search", "--group", "s3", "--irrep", "2d", "--samples", "400", "--seed", "7"];
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_hchan"))
            .args(args)
            .current_dir(t.path())
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("1"));
    let v: Value = serde_json::from_slice(&one).unwrap();
    assert!(v["certificates"].as_array().unwrap().len() >= 396);
}

#[test]
fn duality_tolerance_flag() {
    let t = TempDir::new().unwrap();
    let v = ok_json(t.path(), &["duality", "--group", "z5", "--measure", "1/5,2/5,0,0,2/5", "--tol", "1e-300"]);
    assert_eq!(v["tol"], 1e-300);
    let v = ok_json(t.path(), &["duality", "--group", "z5", "--measure", "1/5,2/5,0,0,2/5"]);
    assert_eq!(v["holds"], true);
}
