use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_supsynth");
const B_ONLY: &str = "automaton supervisor\nstates: x0\ninitial: x0\ntrans: x0 b x0\nend\n";
const PERMISSIVE: &str = "automaton supervisor\nstates: x0\ninitial: x0\ntrans: x0 a x0\ntrans: x0 b x0\nend\n";

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("instances").join(format!("{name}.des"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn synthesize_writes_the_supervisor() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("s.des");
    let inst = instance("inst2");
    let out = run(&["synthesize", inst.to_str().unwrap(), "--n", "1", "--m", "1", "-o", out_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["verdict"], "found");
    assert_eq!(r["n"], 1);
    assert_eq!(std::fs::read_to_string(out_file).unwrap(), B_ONLY);
}

#[test]
fn synthesize_reports_not_found() {
    let inst = instance("inst1");
    for method in ["direct", "cegis"] {
        let out = run(&["synthesize", inst.to_str().unwrap(), "--n", "2", "--method", method]);
        assert_eq!(out.status.code(), Some(1));
        assert_eq!(report(&out)["verdict"], "not-found");
    }
}

#[test]
fn verify_and_attack_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance("inst2");
    let inst = inst.to_str().unwrap();
    let good = write(dir.path(), "good.des", B_ONLY);
    let bad = write(dir.path(), "bad.des", PERMISSIVE);

    let out = run(&["verify", inst, "--supervisor", &good, "--m", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"], "holds");
    let out = run(&["verify", inst, "--supervisor", &bad, "--m", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["attack", inst, "--supervisor", &good]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["attacker"], "none");
    let out = run(&["attack", inst, "--supervisor", &bad, "--max-steps", "8"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out)["attacker"].as_str().unwrap().contains("y0"));
}

#[test]
fn check_uses_the_embedded_supervisor() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(instance("inst2")).unwrap();
    let with = write(dir.path(), "with.des", &format!("{text}\n{B_ONLY}"));
    let out = run(&["check", &with]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"], "holds");
    let out = run(&["check", instance("inst2").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn encode_writes_formula_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let inst = instance("memory");
    let q = dir.path().join("f.qdimacs");
    let out = run(&["encode", inst.to_str().unwrap(), "--n", "2", "-o", q.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["verdict"].is_null());
    let text = std::fs::read_to_string(&q).unwrap();
    let lines: Vec<&str> = text.lines().take(4).collect();
    assert!(lines[0].starts_with("p cnf "));
    assert!(lines[1].starts_with("e ") && lines[2].starts_with("a ") && lines[3].starts_with("e "));
    let map = std::fs::read_to_string(dir.path().join("f.qdimacs.map")).unwrap();
    assert!(map.starts_with("v 1 t_S x0 a x0\n"));

    let d = dir.path().join("f.cnf");
    let m = dir.path().join("vars.txt");
    let out = run(&[
        "encode",
        inst.to_str().unwrap(),
        "--n",
        "2",
        "--format",
        "dimacs",
        "-o",
        d.to_str().unwrap(),
        "--var-map",
        m.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(m.exists());
    // the direct formula is satisfiable at n = 2
    let out = run(&["sat", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(10));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("s SATISFIABLE\nv "));
}

#[test]
fn external_solver_gives_the_same_answer() {
    let solver = format!("{BIN} sat");
    let inst = instance("memory");
    for n in ["1", "2"] {
        let builtin = run(&["synthesize", inst.to_str().unwrap(), "--n", n, "--method", "direct"]);
        let external = run(&["synthesize", inst.to_str().unwrap(), "--n", n, "--method", "direct", "--solver", &solver]);
        assert_eq!(builtin.status.code(), external.status.code());
        assert_eq!(report(&builtin)["supervisor"], report(&external)["supervisor"]);
    }
}

#[test]
fn obfuscate_keeps_the_closed_loop() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(instance("inst2")).unwrap();
    let with = write(dir.path(), "with.des", &format!("{text}\n{B_ONLY}"));
    let out = run(&["obfuscate", &with, "--n-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["supervisor"], B_ONLY);
}

#[test]
fn qbf_export_needs_an_output() {
    let inst = instance("inst2");
    let out = run(&["synthesize", inst.to_str().unwrap(), "--method", "qbf-export"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("x.qdimacs");
    let out = run(&["synthesize", inst.to_str().unwrap(), "--method", "qbf-export", "-o", q.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["verdict"].is_null());
}

#[test]
fn usage_and_validation_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["synthesize", "/nonexistent/x.des"]).status.code(), Some(2));
    let inst = instance("inst2");
    assert_eq!(run(&["synthesize", inst.to_str().unwrap(), "--n", "0"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let broken = write(
        dir.path(),
        "broken.des",
        "alphabet: a\ncontrollable: a\nautomaton plant\nstates: q0\ntrans: q0 a q1\nend\n",
    );
    let out = run(&["synthesize", &broken]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));
}
