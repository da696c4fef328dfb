use lens_theta::algebra::{drinfeld_double, AlgebraFile, LieBialgebra};
use lens_theta::cli::{run, EXIT_FILE, EXIT_LENS};
use std::path::PathBuf;
use std::process::Command;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lens-theta").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lens-theta-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn double_json() -> String {
    let (alg, split) = drinfeld_double(&LieBialgebra::two_dim_example()).unwrap();
    serde_json::to_string(&AlgebraFile::from_parts(&alg, Some(&split))).unwrap()
}

#[test]
fn weight_plain() {
    assert_eq!(call(&["weight", "--p", "2", "--q", "1"]), (0, "1/6\n".into(), String::new()));
    assert_eq!(call(&["weight", "--p", "2", "--q", "1", "--unit-e"]).1, "1/12\n");
    assert_eq!(call(&["weight", "--p", "1", "--q", "0"]).1, "0\n");
    assert_eq!(call(&["weight", "--p", "3", "--q", "-1"]).0, 0);
}

#[test]
fn weight_with_explicit_framing() {
    // L(2,1) with m = 3: one extra twist adds e/12
    let (code, out, _) = call(&["weight", "--p", "2", "--q", "1", "--m", "3", "--n", "1"]);
    assert_eq!((code, out.as_str()), (0, "1/3\n"));
    assert_eq!(call(&["weight", "--p", "2", "--q", "1", "--m", "3"]).0, EXIT_LENS);
}

#[test]
fn invalid_lens_data() {
    let (code, _, err) = call(&["weight", "--p", "4", "--q", "2"]);
    assert_eq!(code, EXIT_LENS);
    assert!(err.contains("coprime"), "{err}");
    assert_eq!(call(&["weight", "--p", "2", "--q", "1", "--m", "1", "--n", "1"]).0, EXIT_LENS);
    assert_eq!(call(&["weight", "--p", "-2", "--q", "1"]).0, EXIT_LENS);
    assert_eq!(call(&["frobnicate"]).0, EXIT_LENS);
}

#[test]
fn s1_s2_branch() {
    let (code, out, _) = call(&["weight", "--p", "0", "--q", "1", "--unit-e"]);
    assert_eq!(code, 0);
    assert!(out.contains("1/12"), "{out}");
}

#[test]
fn json_record() {
    let (code, out, _) = call(&["weight", "--p", "5", "--q", "2", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in ["p", "q", "m", "n", "class", "w2_exact", "w2_real", "variant"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["w2_exact"], "1/6");
    assert_eq!(v["class"], "ManinTriple");
}

#[test]
fn table_csv() {
    let (code, out, _) = call(&["table", "--pmax", "3"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "p,q,m,n,s(q,p),w2_exact,w2_real");
    assert_eq!(&lines[1..], ["1,0,0,-1,0,0,0", "2,1,1,0,0,1/6,0", "3,1,1,0,1/18,1/6,0", "3,2,2,1,-1/18,1/6,0"]);
}

#[test]
fn table_json() {
    let (code, out, _) = call(&["table", "--pmax", "5", "--format", "json", "--unit-e"]);
    assert_eq!(code, 0);
    let v: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    assert_eq!(v.len(), 1 + 1 + 2 + 2 + 4);
    assert_eq!(v[1]["w2_exact"], "1/12");
}

#[test]
fn algebra_file_round_trip() {
    let path = temp_file("double.json", &double_json());
    let p = path.to_str().unwrap();
    let (code, out, _) = call(&["algebra-check", p]);
    assert_eq!(code, 0);
    assert!(out.contains("class ManinTriple") && out.contains("e 2") && out.contains("e' 0"), "{out}");
    assert_eq!(call(&["weight", "--p", "2", "--q", "1", "--algebra", p]).1, "1/6\n");
}

#[test]
fn bad_algebra_files() {
    let missing = std::env::temp_dir().join("lens-theta-no-such-file.json");
    assert_eq!(call(&["algebra-check", missing.to_str().unwrap()]).0, EXIT_FILE);
    let garbage = temp_file("garbage.json", "{not json");
    assert_eq!(call(&["algebra-check", garbage.to_str().unwrap()]).0, EXIT_FILE);
    // symmetric "bracket"
    let sym = temp_file("sym.json", r#"{"dim":2,"bracket":[[0,1,1,"1"],[1,0,1,"1"]],"form":[[0,1,"1"],[1,0,"1"]]}"#);
    let (code, _, err) = call(&["algebra-check", sym.to_str().unwrap()]);
    assert_eq!(code, EXIT_FILE, "{err}");
}

#[test]
fn pipeline_trace_matches_weight() {
    let (code, out, _) = call(&["pipeline", "--p", "7", "--q", "3"]);
    assert_eq!(code, 0);
    let last = out.lines().last().unwrap();
    let weight = call(&["weight", "--p", "7", "--q", "3"]).1;
    assert_eq!(last.split_whitespace().last().unwrap(), weight.trim());
    let dumped = call(&["pipeline", "--p", "3", "--q", "1", "--dump-kernels"]).1;
    assert!(dumped.lines().count() > out.lines().count() / 2);
}

#[test]
fn verify_quick() {
    let (code, out, _) = call(&["verify"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().all(|l| l.starts_with("PASS")), "{out}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_lens-theta");
    let ok = Command::new(bin).args(["weight", "--p", "2", "--q", "1", "--unit-e"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "1/12\n");
    let bad = Command::new(bin).args(["weight", "--p", "6", "--q", "4"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_LENS));
}
