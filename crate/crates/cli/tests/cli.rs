use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const K5: &str = "graph 5 10\n0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n";
const K33: &str = "graph 6 9\n0 3\n0 4\n0 5\n1 3\n1 4\n1 5\n2 3\n2 4\n2 5\n";
const PRISM: &str = "graph 6 9\n0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n0 3\n1 4\n2 5\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_surfiso"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn iso_exit_codes() {
    let d = TempDir::new().unwrap();
    let a = write(&d, "a.txt", K5);
    let b = write(&d, "b.txt", K5);
    let c = write(&d, "c.txt", K33);
    let p = write(&d, "p.txt", PRISM);
    let bad = write(&d, "bad.txt", "graph 3 2\n0 1\n1 q\n");
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();
    assert_eq!(run(&["iso", &s(&a), &s(&b)]).status.code(), Some(0));
    assert_eq!(run(&["iso", &s(&c), &s(&p)]).status.code(), Some(1));
    let o = run(&["iso", &s(&bad), &s(&a)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(run(&["iso", &s(&a), &s(&b), "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["iso", &s(&a), &s(&b), "--budget", "0"]).status.code(), Some(2));
}

#[test]
fn genus_of_k5() {
    let d = TempDir::new().unwrap();
    let a = write(&d, "k5.txt", K5);
    let o = run(&["genus", a.to_str().unwrap()]);
    assert_eq!(stdout(&o), "euler-genus 1\n");
    let o = run(&["genus", a.to_str().unwrap(), "--max-genus", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn facewidth_and_canon_of_maps() {
    let d = TempDir::new().unwrap();
    let k6 = "graph 6 15\n0 1\n0 2\n0 3\n0 4\n0 5\n1 2\n1 3\n1 4\n1 5\n2 3\n2 4\n2 5\n3 4\n3 5\n4 5\n";
    let g = write(&d, "k6.txt", k6);
    let o = run(&["embed", g.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let m = write(&d, "k6.map", &stdout(&o));
    assert_eq!(stdout(&run(&["facewidth", m.to_str().unwrap()])), "3\n");
    let c1 = stdout(&run(&["canon", m.to_str().unwrap()]));
    let c2 = stdout(&run(&["canon", m.to_str().unwrap()]));
    assert_eq!(c1, c2);
    assert!(c1.trim().chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn generated_fixture_against_its_relabeling() {
    let d = TempDir::new().unwrap();
    let a = write(&d, "a.txt", &stdout(&run(&["gen", "figa", "--k", "2"])));
    let b = write(&d, "b.txt", &stdout(&run(&["gen", "figa", "--k", "2", "--shuffle", "11"])));
    let o = run(&["iso", a.to_str().unwrap(), b.to_str().unwrap(), "--witness", "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("isomorphic\n"));
    assert_eq!(out.lines().filter(|l| l.contains(" -> ")).count(), 12);
    assert!(out.lines().any(|l| l.starts_with("trace ")));
    // byte-identical output
    let again = run(&["iso", a.to_str().unwrap(), b.to_str().unwrap(), "--witness", "--trace"]);
    assert_eq!(stdout(&again), out);
    let o = run(&["oracle", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn decompose_and_json() {
    let d = TempDir::new().unwrap();
    // two triangles sharing a vertex
    let g = write(&d, "bow.txt", "graph 5 6\n0 1\n1 2\n2 0\n0 3\n3 4\n4 0\n");
    let o = run(&["decompose", g.to_str().unwrap()]);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("bag")).count(), 2);
    assert!(out.contains("adh 0 1: 0"));
    let o = run(&["--format", "json", "decompose", g.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bags"].as_array().unwrap().len(), 2);
    let o = run(&["decompose", g.to_str().unwrap(), "--triconnected"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_family_generates() {
    for args in [vec!["gen", "fige", "--t", "3"], vec!["gen", "ring", "--l", "3"], vec!["gen", "fw1"]] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).starts_with("graph "));
    }
    assert_eq!(run(&["gen", "ring", "--l", "2"]).status.code(), Some(2));
}
