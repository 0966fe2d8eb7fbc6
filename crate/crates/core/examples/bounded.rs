//! Safety under a budget of `k` register operations per process, next to
//! the explicit-state oracle for the same budget.
//!
//! `cargo run --example bounded -- [max-k]`

use nonatomic_nets::network::NetworkInstance;
use nonatomic_nets::oracle::{bounded_safety_oracle, ExploreOptions};
use nonatomic_nets::verifier::{verify_bounded, VerifyOptions};

// a relay: one contributor needs two operations, another three
const LEADER: &str = "fsm\nstates a b c\ninit a\na w(x) b\nb r(y) c\nc w(z) c\n";
const CONTRIB: &str = "fsm\nstates c0 c1 c2 c3\ninit c0\nc0 r(x) c1\nc1 w(y) c1\nc0 r(z) c2\nc2 w(#) c3\n";

// the leader counts on its tape before it writes `go`
const TAPE: &str = "tm\nstates p q r\ninit p\np tape _ 1 R q\nq tape _ 1 R r\nr w(go) r\n";
const WAITER: &str = "fsm\nstates c0 c1 c2\ninit c0\nc0 r(go) c1\nc1 w(#) c2\n";

fn main() {
    let max_k: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    for (name, d, c) in [("relay", LEADER, CONTRIB), ("tape leader", TAPE, WAITER)] {
        let net = NetworkInstance::from_sources(d, c).unwrap();
        println!("{name}");
        for k in 0..=max_k {
            let v = verify_bounded(&net, k, &VerifyOptions::default()).unwrap();
            let o = bounded_safety_oracle(&net, k, ExploreOptions::default()).unwrap();
            println!("  k={k}: {:?}  oracle {:?}  stats {:?}", v.status, o.status, v.stats);
        }
    }
}
