//! Random 3-CNF formulas through the reduction, checked against brute force.
//!
//! `cargo run --release --example sat_reduction -- [vars] [count] [--saturate]`

use std::time::Instant;

use nonatomic_nets::generators::{gen_3sat, CnfFormula};
use nonatomic_nets::oracle::{saturate_fsm, ExploreOptions};
use nonatomic_nets::verifier::{verify_fsm_fsm, VerifyOptions};

fn main() {
    let saturate = std::env::args().any(|a| a == "--saturate");
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let vars = args.first().copied().unwrap_or(6);
    let count = args.get(1).copied().unwrap_or(10);
    for seed in 0..count as u64 {
        // about 4.3 clauses per variable sits near the SAT/UNSAT threshold
        let f = CnfFormula::random_3cnf(seed, vars, vars * 43 / 10);
        let net = gen_3sat(&f);
        let t = Instant::now();
        let v = verify_fsm_fsm(&net, &VerifyOptions::default()).expect("within caps");
        let took = t.elapsed();
        let sat = f.brute_force_sat().is_some();
        let replays = v.witness.as_ref().map(|w| w.trace.is_some());
        println!(
            "seed {seed:3}  clauses {:3}  sat {sat:5}  unsafe {:5}  trace {replays:?}  states {:7}  {took:?}",
            f.clauses.len(),
            v.is_unsafe(),
            v.stats.get("product_states").copied().unwrap_or(0),
        );
        assert_eq!(sat, v.is_unsafe());
        if saturate {
            let t = Instant::now();
            let s = saturate_fsm(&net, ExploreOptions::default()).expect("within caps");
            println!("          saturation agrees: {} ({:?})", s.is_unsafe() == sat, t.elapsed());
        }
    }
}
