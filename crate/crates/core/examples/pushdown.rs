//! Pushdown leaders and contributors.
//!
//! `cargo run --example pushdown`

use nonatomic_nets::network::NetworkInstance;
use nonatomic_nets::oracle::{explore_bounded, ExploreOptions};
use nonatomic_nets::verifier::{verify, VerifyOptions};

// The leader reads `open` any number of times, pushing once per read, then
// must publish `close` once per push before it writes `done`.
const COUNTER: &str = "\
pdm
states p q r
init p Z
p Z r(open) p A,Z
p A r(open) p A,A
p A eps q A
q A w(close) q -
q Z w(done) r Z
";

// Writes `open` once, and `#` after seeing `done`.
const OPENER: &str = "fsm\nstates c0 c1 c2 c3\ninit c0\nc0 w(open) c1\nc1 r(done) c2\nc2 w(#) c3\n";

// A contributor with its own stack: it must see `close` as often as it
// wrote `open` before it can write `#`.
const BALANCED: &str = "\
pdm
states s t u
init s Z
s Z w(open) s B,Z
s B w(open) s B,B
s B r(close) t -
t B r(close) t -
t Z r(done) u Z
u Z w(#) u Z
";

// Needs a `close` after `done`; the leader never publishes one.
const LATE: &str = "fsm\nstates c0 c1 c2 c3 c4\ninit c0\nc0 w(open) c1\nc1 r(done) c2\nc2 r(close) c3\nc3 w(#) c4\n";

fn main() {
    for (name, c) in [("fsm contributor", OPENER), ("pushdown contributor", BALANCED), ("late contributor", LATE)] {
        let net = NetworkInstance::from_sources(COUNTER, c).unwrap();
        let (v, procedure) = verify(&net, &VerifyOptions::default()).unwrap();
        println!("{name}: {procedure} says {:?}", v.status);
        if let Some(w) = &v.witness {
            let word: Vec<String> = w.word.iter().map(|a| a.show(&net.values)).collect();
            println!("  {}", word.join(" "));
        }
        let e = explore_bounded(&net, 2, 12, ExploreOptions::default()).unwrap();
        println!("  two contributors, twelve operations: {:?}", e.status);
    }
}
