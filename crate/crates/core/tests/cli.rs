use std::path::Path;

use nonatomic_nets::cli::run_with;
use nonatomic_nets::generators::CnfFormula;
use nonatomic_nets::lang::format::parse_fsa;
use tempfile::TempDir;

fn nanet(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run_with(std::iter::once("nanet").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const IDLE: &str = "fsm\nstates a\ninit a\n";
const HASH_WRITER: &str = "fsm\nstates c0 c1\ninit c0\nc0 w(#) c1\n";
const GATED: &str = "fsm\nstates c0 c1 c2\ninit c0\nc0 r(go) c1\nc1 w(#) c2\n";

#[test]
fn hash_writer_is_unsafe_with_a_witness() {
    let d = TempDir::new().unwrap();
    let l = file(d.path(), "l", IDLE);
    let c = file(d.path(), "c", HASH_WRITER);
    let (code, out) = nanet(&["verify", "--leader", &l, "--contrib", &c]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("unsafe"));
    assert!(out.lines().any(|l| l == "c1 w(#)"), "{out}");
}

#[test]
fn gated_contributor_is_safe() {
    let d = TempDir::new().unwrap();
    let l = file(d.path(), "l", IDLE);
    let c = file(d.path(), "c", GATED);
    for mode in ["auto", "fsm-fsm", "pdm-fsm", "fsm-pdm", "pdm-pdm", "per-tau"] {
        let (code, out) = nanet(&["verify", "--leader", &l, "--contrib", &c, "--mode", mode]);
        assert_eq!(code, 0, "{mode}: {out}");
    }
}

#[test]
fn report_is_json() {
    let d = TempDir::new().unwrap();
    let l = file(d.path(), "l", "fsm\nstates a b\ninit a\na w(go) b\n");
    let c = file(d.path(), "c", GATED);
    let (code, out) = nanet(&["verify", "--leader", &l, "--contrib", &c, "--report"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "unsafe");
    assert_eq!(v["tau"], serde_json::json!(["#"]));
    assert_eq!(v["trace"][0]["process"], 0);
}

#[test]
fn bounded_zero_is_safe() {
    let d = TempDir::new().unwrap();
    let l = file(d.path(), "l", IDLE);
    let c = file(d.path(), "c", HASH_WRITER);
    assert_eq!(nanet(&["bounded", "--leader", &l, "--contrib", &c, "--k", "0"]).0, 0);
    assert_eq!(nanet(&["bounded", "--leader", &l, "--contrib", &c, "--k", "1"]).0, 1);
}

#[test]
fn oracles() {
    let d = TempDir::new().unwrap();
    let l = file(d.path(), "l", "fsm\nstates a b\ninit a\na w(go) b\n");
    let c = file(d.path(), "c", GATED);
    for mode in ["explore", "saturate", "bounded"] {
        let (code, out) = nanet(&["oracle", "--leader", &l, "--contrib", &c, "--mode", mode]);
        assert_eq!(code, 1, "{mode}: {out}");
    }
    // the attack takes three operations, so depth one is inconclusive
    let (code, _) = nanet(&["oracle", "--leader", &l, "--contrib", &c, "--k", "1", "--depth", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn parse_errors_exit_two() {
    let d = TempDir::new().unwrap();
    let l = file(d.path(), "l", "fsm\nstates a\ninit b\n");
    let c = file(d.path(), "c", HASH_WRITER);
    assert_eq!(nanet(&["verify", "--leader", &l, "--contrib", &c]).0, 2);
    assert_eq!(nanet(&["verify", "--leader", "/nonexistent", "--contrib", &c]).0, 2);
    assert_eq!(nanet(&["verify"]).0, 2);
    assert_eq!(nanet(&["--help"]).0, 0);
}

#[test]
fn gen3sat_then_verify_matches_brute_force() {
    for (seed, vars, clauses) in [(1, 3, 6), (2, 3, 20), (3, 4, 10), (4, 2, 12)] {
        let d = TempDir::new().unwrap();
        let f = CnfFormula::random_3cnf(seed, vars, clauses);
        let cnf = file(d.path(), "f.cnf", &f.to_dimacs());
        let out_dir = d.path().join("net");
        let o = out_dir.to_str().unwrap();
        assert_eq!(nanet(&["gen3sat", "--cnf", &cnf, "--out-dir", o]).0, 0);
        let l = out_dir.join("leader.txt");
        let c = out_dir.join("contrib.txt");
        let (code, out) = nanet(&["verify", "--leader", l.to_str().unwrap(), "--contrib", c.to_str().unwrap()]);
        assert_eq!(code, if f.brute_force_sat().is_some() { 1 } else { 0 }, "seed {seed}: {out}");
        let back = CnfFormula::parse_dimacs(&std::fs::read_to_string(out_dir.join("formula.cnf")).unwrap()).unwrap();
        assert_eq!(back, f);
    }
}

#[test]
fn gen3sat_random_prints_both_machines() {
    let (code, out) = nanet(&["gen3sat", "--random", "3", "--clauses", "4", "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("fsm\n").count(), 2);
    assert_eq!(nanet(&["gen3sat"]).0, 2);
}

#[test]
fn determinize_round_trips() {
    let d = TempDir::new().unwrap();
    let l = file(d.path(), "l", "fsm\nstates a b c\ninit a\na w(x) b\na w(x) c\nb w(go) b\n");
    let c = file(d.path(), "c", "fsm\nstates c0 c1 c2\ninit c0\nc0 r(go) c1\nc0 w(y) c2\nc1 w(#) c2\n");
    let before = nanet(&["verify", "--leader", &l, "--contrib", &c]).0;
    let out_dir = d.path().join("det");
    let o = out_dir.to_str().unwrap();
    assert_eq!(nanet(&["determinize", "--leader", &l, "--contrib", &c, "--out-dir", o]).0, 0);
    let l2 = out_dir.join("leader.txt");
    let c2 = out_dir.join("contrib.txt");
    let after = nanet(&["verify", "--leader", l2.to_str().unwrap(), "--contrib", c2.to_str().unwrap()]).0;
    assert_eq!(before, after);
    let (code, out) = nanet(&["determinize", "--leader", &l, "--contrib", &c, "--gadget"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("fsm\n"));
}

const AB: &str = "cfg\nalphabet a b\nvars X0 A B\naxiom X0\nprod X0 -> A B\nprod A -> a\nprod B -> b\n";

#[test]
fn kindex_emptiness() {
    let d = TempDir::new().unwrap();
    let g = file(d.path(), "g", AB);
    assert_eq!(nanet(&["lang", "kindex-empty", &g, "--k", "1"]), (0, "empty\n".into()));
    assert_eq!(nanet(&["lang", "kindex-empty", &g, "--k", "2"]), (1, "nonempty\n".into()));
    assert_eq!(nanet(&["lang", "cfg-empty", &g]), (1, "nonempty\n".into()));
    let e = file(d.path(), "e", "cfg\nalphabet a\nvars S\naxiom S\nprod S -> S a\n");
    assert_eq!(nanet(&["lang", "cfg-empty", &e]), (0, "empty\n".into()));
}

#[test]
fn support_of_a_single_letter() {
    let d = TempDir::new().unwrap();
    let g = file(d.path(), "g", "cfg\nalphabet a\nvars X0\naxiom X0\nprod X0 -> a\n");
    let (code, out) = nanet(&["lang", "support", &g]);
    assert_eq!(code, 0);
    let a = parse_fsa(&out).unwrap();
    assert_eq!(a.num_states(), 2);
    assert!(a.accepts(&["a".to_string()]));
    assert!(!a.accepts(&[]));
}

#[test]
fn bowtie_and_enumerate() {
    let d = TempDir::new().unwrap();
    let g = file(d.path(), "g", AB);
    let a = file(d.path(), "a", "fsa\nalphabet a b\nstates p q r\ninit p\nacc r\np a q\nq b r\n");
    let prod = d.path().join("prod.cfg");
    assert_eq!(nanet(&["lang", "bowtie", &g, &a, "--out", prod.to_str().unwrap()]).0, 0);
    let (code, out) = nanet(&["lang", "enumerate", prod.to_str().unwrap(), "--max-len", "4"]);
    assert_eq!((code, out.as_str()), (0, "a b\n"));
    assert_eq!(nanet(&["lang", "enumerate", &g, "--max-len", "4", "--k", "1"]).1, "");
    let (_, words) = nanet(&["lang", "enumerate", &a, "--max-len", "3"]);
    assert_eq!(words, "a b\n");
    let eps = file(d.path(), "eps", "cfg\nalphabet a\nvars S\naxiom S\nprod S ->\nprod S -> a\n");
    assert_eq!(nanet(&["lang", "enumerate", &eps, "--max-len", "2"]).1, "eps\na\n");
}
