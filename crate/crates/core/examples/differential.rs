//! Random finite-state networks through every procedure that accepts them.
//!
//! `cargo run --release --example differential -- [count] [first-seed]`

use nonatomic_nets::generators::{gen_random_network, Sizes};
use nonatomic_nets::machine::MachineKind;
use std::time::Instant;

use nonatomic_nets::network::{replay, Verdict, REPLAY_LIMITS};
use nonatomic_nets::oracle::{saturate_fsm, ExploreOptions};
use nonatomic_nets::verifier::{verify_fsm_fsm, verify_fsm_pdm, verify_pdm_pdm, Route, VerifyOptions};

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let count = args.first().copied().unwrap_or(100);
    let first = args.get(1).copied().unwrap_or(0);
    let sizes = Sizes { states: 4, values: 2, transitions: 6, ..Sizes::default() };
    let (mut unsafe_count, mut bad) = (0, 0);
    for seed in first..first + count {
        let net = gen_random_network(seed, (MachineKind::Fsm, MachineKind::Fsm), &sizes, &sizes).unwrap();
        let auto = VerifyOptions::default();
        let per_tau = VerifyOptions { route: Route::PerTau, ..VerifyOptions::default() };
        let timed = |name: &'static str, f: &dyn Fn() -> Verdict| {
            let t = Instant::now();
            let v = f();
            if t.elapsed().as_secs_f64() > 1.0 {
                println!("seed {seed}: {name} took {:?}", t.elapsed());
            }
            (name, v)
        };
        let verdicts = [
            timed("product", &|| verify_fsm_fsm(&net, &auto).unwrap()),
            timed("per-tau", &|| verify_fsm_fsm(&net, &per_tau).unwrap()),
            timed("fsm-pdm", &|| verify_fsm_pdm(&net, &auto).unwrap()),
            timed("pdm-pdm", &|| verify_pdm_pdm(&net, &auto).unwrap()),
            timed("saturation", &|| saturate_fsm(&net, ExploreOptions::default()).unwrap()),
        ];
        let answers: Vec<bool> = verdicts.iter().map(|(_, v)| v.is_unsafe()).collect();
        let agree = answers.iter().all(|a| *a == answers[0]);
        let traces_ok = verdicts.iter().all(|(_, v)| {
            v.witness.as_ref().is_none_or(|w| w.trace.as_ref().is_some_and(|t| replay(&net, t, REPLAY_LIMITS).is_ok()))
        });
        unsafe_count += usize::from(answers[4]);
        if !agree || !traces_ok {
            bad += 1;
            let shown: Vec<String> = verdicts.iter().map(|(n, v)| format!("{n}={}", if v.is_unsafe() { "unsafe" } else { "safe" })).collect();
            println!("seed {seed}: {} traces_ok={traces_ok}", shown.join(" "));
        }
    }
    println!("{count} instances, {unsafe_count} unsafe, {bad} disagreements");
}
