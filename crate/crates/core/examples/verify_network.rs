//! Verifying a network read from two machine files and replaying the
//! witness.
//!
//! `cargo run --example verify_network -- [leader.txt contrib.txt]`
//!
//! Without arguments a small relay protocol is used: the leader announces
//! `x`, a contributor answers `y`, and only after the leader has seen `y`
//! and published `z` may a contributor write `#`.

use nonatomic_nets::network::{replay, NetworkInstance, REPLAY_LIMITS};
use nonatomic_nets::verifier::{verify, VerifyOptions};

const LEADER: &str = "\
fsm
states a b c
init a
a w(x) b
b r(y) c
c w(z) c
";

const CONTRIB: &str = "\
fsm
states c0 c1 c2 c3
init c0
c0 r(x) c1
c1 w(y) c1
c0 r(z) c2
c2 w(#) c3
";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (d, c) = match args.as_slice() {
        [d, c] => (std::fs::read_to_string(d).unwrap(), std::fs::read_to_string(c).unwrap()),
        _ => (LEADER.to_string(), CONTRIB.to_string()),
    };
    let net = match NetworkInstance::from_sources(&d, &c) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let (v, procedure) = verify(&net, &VerifyOptions::default()).expect("within caps");
    println!("{procedure}: {:?} (complete: {})", v.status, v.complete);
    let Some(w) = &v.witness else { return };
    let tau: Vec<&str> = w.tau.iter().map(|g| net.name(*g)).collect();
    println!("contributor first writes: {}", tau.join(" "));
    let word: Vec<String> = w.word.iter().map(|a| a.show(&net.values)).collect();
    println!("extended word: {}", word.join(" "));
    if let Some(t) = &w.trace {
        for s in t {
            let who = if s.process == 0 { "leader".into() } else { format!("c{}", s.process) };
            println!("  {who:7} {}", s.action.op().show(&net.values));
        }
        println!("replay: {:?}", replay(&net, t, REPLAY_LIMITS));
    }
}
