//! Determinizing a network, and why the leader read-pair gadget alone is not
//! enough.
//!
//! `cargo run --example determinize -- [seed]`

use nonatomic_nets::generators::{gen_random_network, Sizes};
use nonatomic_nets::machine::format::write_machine;
use nonatomic_nets::machine::MachineKind;
use nonatomic_nets::network::NetworkInstance;
use nonatomic_nets::verifier::{determinize, is_deterministic_pair, read_pair_gadget, verify, VerifyOptions};

fn show(title: &str, n: &NetworkInstance) {
    let (v, _) = verify(n, &VerifyOptions::default()).expect("within caps");
    println!("== {title}: deterministic {}, {:?}", is_deterministic_pair(n), v.status);
    println!("{}\n{}", write_machine(&n.leader, &n.values), write_machine(&n.contributor, &n.values));
}

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let sizes = Sizes { states: 3, values: 2, transitions: 6, ..Sizes::default() };
    let net = gen_random_network(seed, (MachineKind::Fsm, MachineKind::Fsm), &sizes, &sizes).unwrap();
    show("random", &net);
    show("determinized", &determinize(&net).unwrap());

    // The contributor needs to read g, then h, then g again. Only the leader
    // writes g and no one can write it back, so the original is safe. The
    // gadget's contributor loop writes 0 and 1, which lets a value be
    // written again after the register moved on. The gadget only rewrites
    // the leader, so the contributor's own choice on r(g) stays.
    let leader = "fsm\nstates l0 l1 l2 l3\ninit l0\nl0 w(g) l1\nl1 r(g) l2\nl1 r(g) l3\n";
    let contrib = "fsm\nstates c0 c1 c2 c3 c4 c5\ninit c0\n\
                   c0 r(g) c1\nc1 r(h) c2\nc2 r(g) c3\nc3 w(#) c4\nc0 r(g) c5\nc5 w(h) c5\n";
    let n = NetworkInstance::from_sources(leader, contrib).unwrap();
    show("read choice", &n);
    show("gadget only", &read_pair_gadget(&n).unwrap());
    show("determinized", &determinize(&n).unwrap());
}
