//! The explicit-state engines: breadth-first search with a fixed number of
//! contributors, and saturation for any number of them.
//!
//! `cargo run --example oracles`

use nonatomic_nets::network::NetworkInstance;
use nonatomic_nets::oracle::{explore_bounded, saturate_fsm, ExploreOptions};

// A contributor writes a or b at most once. The one that writes # must see
// b and then a; b needs the leader's ok, which needs an earlier a. That is
// three helpers, so four contributors in all.
const LEADER: &str = "fsm\nstates l0 l1 l2\ninit l0\nl0 r(a) l1\nl1 w(ok) l2\n";
const CONTRIB: &str = "\
fsm
states c0 ca cb c1 c2 c3
init c0
c0 w(a) ca
c0 r(ok) cb
cb w(b) cb
c0 r(b) c1
c1 r(a) c2
c2 w(#) c3
";

fn main() {
    let net = NetworkInstance::from_sources(LEADER, CONTRIB).unwrap();
    let eo = ExploreOptions::default();
    let s = saturate_fsm(&net, eo).unwrap();
    println!("saturation: {:?} {:?}", s.status, s.stats);
    for k in 1..=4 {
        let v = explore_bounded(&net, k, 10, eo).unwrap();
        let used = v.witness.as_ref().and_then(|w| w.trace.as_ref()).map(|t| t.len());
        println!("{k} contributors: {:?} (complete {}, trace length {used:?})", v.status, v.complete);
    }
}
