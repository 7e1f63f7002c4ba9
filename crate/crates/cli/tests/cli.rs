use std::path::Path;
use std::process::{Command, Output};

fn qdesign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdesign")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = qdesign(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn gbinom() {
    assert_eq!(ok(&["gbinom", "--v", "6", "--k", "3", "--q", "2"]), "1395\n");
    assert_eq!(ok(&["gbinom", "--v", "4", "--k", "2", "--q", "3"]), "130\n");
    assert_eq!(qdesign(&["gbinom", "--v", "4", "--k", "2", "--q", "6"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(qdesign(&["gbinom", "--v", "6"]).status.code(), Some(2));
    assert_eq!(qdesign(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(qdesign(&["verify", "--in", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn gdd_build_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let g = path(dir.path(), "g.json");
    ok(&["build-gdd", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--select", "2,3=1", "--out", &g]);
    let text = ok(&["verify", "--in", &g]);
    assert!(text.contains("PASS") && text.contains("588 pairs, λ=6"), "{text}");
    let sampled = ok(&["verify", "--in", &g, "--sample", "200", "--seed", "1"]);
    assert!(sampled.contains("200 pairs, λ=6"), "{sampled}");
    // selection out of range
    let o = qdesign(&["build-gdd", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--select", "2,3=2", "--out", &g]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupted_design_fails_with_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let full = path(dir.path(), "full.json");
    ok(&["km-solve", "--l", "4", "--k", "3", "--q", "2", "--lambda", "3", "--out", &full]);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&full).unwrap()).unwrap();
    v["blocks"]["explicit"].as_array_mut().unwrap().remove(0);
    let broken = path(dir.path(), "broken.json");
    std::fs::write(&broken, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = qdesign(&["verify", "--in", &broken]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL") && text.matches("covered 2 times, expected 3").count() == 7, "{text}");
}

#[test]
fn incidence_modes_agree() {
    let text = ok(&["incidence", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--mode", "both"]);
    assert!(text.contains("identical"), "{text}");
    let closed = ok(&["--json", "incidence", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--mode", "closed"]);
    let brute = ok(&["--json", "incidence", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--mode", "brute"]);
    let c: serde_json::Value = serde_json::from_str(&closed).unwrap();
    let b: serde_json::Value = serde_json::from_str(&brute).unwrap();
    assert_eq!(c["closed"]["entries"], b["brute"]["entries"]);
}

#[test]
fn orbit_commands() {
    let text = ok(&["singer-orbits", "--l", "7", "--d", "3", "--q", "2", "--counts-only"]);
    assert!(text.contains("stabilizer GF(2^1)*: 93"), "{text}");
    let text = ok(&["singer-orbits", "--l", "6", "--d", "3", "--q", "2"]);
    assert!(text.contains("formulas agree"), "{text}");
    let text = ok(&["orbit-atlas", "--m", "2", "--l", "3", "--k", "3", "--q", "2"]);
    assert!(text.contains("orbit size 882") && text.contains("orbit size 504"), "{text}");
    let text = ok(&["stabilizer", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--r", "1", "--u", "1", "--brute-force"]);
    assert!(text.contains("brute force: 4 (agrees)"), "{text}");
}

#[test]
fn pbd_breaking_supplement_and_holes() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n| path(dir.path(), n);
    ok(&["km-solve", "--l", "3", "--k", "2", "--q", "2", "--lambda", "1", "--out", &d("lines.json")]);
    ok(&["build-pbd", "--seed", &d("lines.json"), "--m", "2", "--k", "3", "--select", "2,3=1", "--out", &d("p.json")]);
    let text = ok(&["verify", "--in", &d("p.json")]);
    assert!(text.contains("Inside: 63 pairs, λ=1") && text.contains("Across: 588 pairs, λ=6"), "{text}");

    ok(&["km-solve", "--l", "4", "--k", "3", "--q", "2", "--lambda", "3", "--out", &d("planes.json")]);
    ok(&["break-blocks", "--pbd", &d("planes.json"), "--ingredient", &format!("3={}", d("lines.json")), "--out", &d("b.json")]);
    assert!(ok(&["verify", "--in", &d("b.json")]).contains("λ=3"));

    ok(&["supplement", "--in", &d("planes.json"), "--out", &d("s.json")]);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d("s.json")).unwrap()).unwrap();
    assert_eq!(s["claimed_lambda"], 0);
    assert_eq!(s["blocks"]["explicit"].as_array().unwrap().len(), 0);

    ok(&["build-gdd", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--select", "2,3=1", "--out", &d("g.json")]);
    let master = r#"{"format_version": 1, "q": 2, "v": 3, "kind": "design", "K": [3], "claimed_lambda": 6,
        "blocks": {"explicit": [{"basis": [[1,0,0],[0,1,0],[0,0,1]], "multiplicity": 6}]}}"#;
    std::fs::write(d("m.json"), master).unwrap();
    let text = ok(&["fill-holes", "--gdd", &d("g.json"), "--master", &d("m.json"), "--hole-dim", "0", "--out", &d("f.json")]);
    assert!(text.contains("PASS"), "{text}");
    assert!(Path::new(&d("f.json")).exists());
    let o = qdesign(&["fill-holes", "--gdd", &d("g.json"), "--master", &d("planes.json"), "--hole-dim", "1", "--out", &d("x.json")]);
    assert_eq!(o.status.code(), Some(2));
}

/// Every command twice, with 1 and 8 threads: outputs and written files
/// must be byte-identical.
#[test]
fn deterministic_across_runs_and_threads() {
    let run = |threads: &str| -> Vec<String> {
        let dir = tempfile::tempdir().unwrap();
        let d = |n| path(dir.path(), n);
        let t = ["--json", "--threads", threads];
        let cmd = |args: &[&str]| ok(&[&t[..], args].concat());
        let mut out = vec![
            cmd(&["gbinom", "--v", "8", "--k", "4", "--q", "3"]),
            cmd(&["singer-orbits", "--l", "6", "--d", "3", "--q", "2"]),
            cmd(&["orbit-atlas", "--m", "2", "--l", "4", "--k", "3", "--q", "2"]),
            cmd(&["stabilizer", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--r", "2", "--u", "3", "--brute-force"]),
            cmd(&["incidence", "--m", "2", "--l", "4", "--k", "3", "--q", "2", "--mode", "both"]),
            cmd(&["build-gdd", "--m", "2", "--l", "3", "--k", "3", "--q", "2", "--select", "2,3=1", "--out", &d("g.json")]),
            cmd(&["verify", "--in", &d("g.json")]),
            cmd(&["verify", "--in", &d("g.json"), "--sample", "300", "--seed", "11"]),
            cmd(&["km-solve", "--l", "3", "--k", "2", "--q", "2", "--lambda", "1", "--out", &d("lines.json")]),
            cmd(&["build-pbd", "--seed", &d("lines.json"), "--m", "2", "--k", "3", "--select", "2,3=1", "--out", &d("p.json")]),
            cmd(&["verify", "--in", &d("p.json")]),
            cmd(&["supplement", "--in", &d("lines.json"), "--out", &d("s.json")]),
            cmd(&["build-gdd", "--m", "2", "--l", "7", "--k", "3", "--q", "2", "--select", "2,1=1", "--out", &d("big.json")]),
            cmd(&["verify", "--in", &d("big.json"), "--sample", "20", "--seed", "4"]),
        ];
        for f in ["g.json", "lines.json", "p.json", "s.json", "big.json"] {
            out.push(std::fs::read_to_string(d(f)).unwrap());
        }
        out
    };
    let a = run("1");
    let b = run("8");
    let c = run("1");
    assert_eq!(a, b);
    assert_eq!(a, c);
}
