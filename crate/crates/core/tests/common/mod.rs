#![allow(dead_code)]

use std::collections::BTreeSet;

use nonatomic_nets::action::{Action, Kind, Role};
use nonatomic_nets::generators::{gen_random_network, Sizes};
use nonatomic_nets::lang::{Cfg, Fsa, Sym};
use nonatomic_nets::machine::{Machine, MachineKind};
use nonatomic_nets::network::{replay, NetworkInstance, Verdict, REPLAY_LIMITS};
use nonatomic_nets::store::ExtState;
use nonatomic_nets::value::{Value, HASH};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Moves the contributor's `#` writes to its last state, so writing `#`
/// takes a path through the machine.
fn hash_last(n: &mut NetworkInstance) {
    match &mut n.contributor {
        Machine::Fsm(m) => {
            let last = m.states.len() - 1;
            for t in m.trans.iter_mut().filter(|t| t.1.is_some_and(|o| o.value == HASH)) {
                t.0 = last;
            }
        }
        Machine::Pdm(m) => {
            let last = m.states.len() - 1;
            for r in m.rules.iter_mut().filter(|r| r.label.is_some_and(|o| o.value == HASH)) {
                r.from = last;
            }
        }
        Machine::Tm(_) => {}
    }
}

/// Small FSM pairs over two values plus `#`, shaped so that both verdicts
/// are common.
pub fn small_fsm_pair(seed: u64) -> NetworkInstance {
    let states = 2 + (seed % 3) as usize;
    let d = Sizes { states, values: 2, transitions: states + 2, ..Sizes::default() };
    let c = Sizes { states: 4, values: 2, transitions: 5, reads: 0.7, ..Sizes::default() };
    let mut n = gen_random_network(seed, (MachineKind::Fsm, MachineKind::Fsm), &d, &c).unwrap();
    hash_last(&mut n);
    n
}

/// A pair where at least one side is pushdown.
pub fn small_pdm_pair(seed: u64) -> NetworkInstance {
    let kinds = [(MachineKind::Pdm, MachineKind::Fsm), (MachineKind::Fsm, MachineKind::Pdm), (MachineKind::Pdm, MachineKind::Pdm)];
    let states = 2 + (seed % 2) as usize;
    let d = Sizes { states, values: 2, transitions: states + 3, stack_symbols: 2, ..Sizes::default() };
    let c = Sizes { states: 3, values: 2, transitions: 5, stack_symbols: 2, reads: 0.7, ..Sizes::default() };
    let mut n = gen_random_network(seed, kinds[seed as usize % 3], &d, &c).unwrap();
    hash_last(&mut n);
    n
}

/// Any of the four finite-state/pushdown combinations.
pub fn small_pair(seed: u64) -> NetworkInstance {
    if seed.is_multiple_of(4) {
        small_fsm_pair(seed)
    } else {
        small_pdm_pair(seed)
    }
}

/// Grammar over `{a, b}` with up to four variables, in general form.
pub fn random_grammar(seed: u64) -> Cfg<char> {
    let mut r = rng(seed);
    let letters = ['a', 'b'];
    let mut g = Cfg::new(letters.iter().copied().collect(), "S");
    let n = r.gen_range(1..=4);
    for i in 1..n {
        g.add_var(format!("X{i}"));
    }
    for x in 0..n {
        for _ in 0..r.gen_range(1..=3) {
            let rhs = match r.gen_range(0..10) {
                0..=3 => vec![Sym::T(*letters.choose(&mut r).unwrap())],
                4..=7 => vec![Sym::V(r.gen_range(0..n)), Sym::V(r.gen_range(0..n))],
                8 => vec![Sym::T(*letters.choose(&mut r).unwrap()), Sym::V(r.gen_range(0..n))],
                _ => vec![Sym::V(r.gen_range(0..n)), Sym::T(*letters.choose(&mut r).unwrap()), Sym::V(r.gen_range(0..n))],
            };
            g.add_prod(x, rhs);
        }
    }
    g
}

/// Automaton over `{b, c}`: shares `b` with [`random_grammar`].
pub fn random_fsa(seed: u64) -> Fsa<char> {
    let mut r = rng(seed ^ 0xfa);
    let letters = ['b', 'c'];
    let mut a = Fsa::new(letters.iter().copied().collect());
    let n = r.gen_range(1..=3);
    for _ in 1..n {
        a.add_state(false);
    }
    for q in 0..n {
        a.accepting[q] = r.gen_bool(0.5);
    }
    a.accepting[r.gen_range(0..n)] = true;
    for _ in 0..r.gen_range(1..=5) {
        let l = if r.gen_bool(0.15) { None } else { Some(*letters.choose(&mut r).unwrap()) };
        a.add_edge(r.gen_range(0..n), l, r.gen_range(0..n));
    }
    a
}

/// A random run of the extended store by a leader and a few contributors,
/// split into the leader word and the contributor words.
pub fn random_compatible(seed: u64) -> (Vec<Action>, Vec<Vec<Action>>) {
    let mut r = rng(seed);
    let values = [Value(1), Value(2), Value(3), HASH];
    let n = r.gen_range(1..=3);
    let mut words: Vec<Vec<Action>> = vec![Vec::new(); n + 1];
    let mut s = ExtState::default();
    let steps = r.gen_range(1..=10);
    let mut tries = 0;
    while words.iter().map(Vec::len).sum::<usize>() < steps && tries < 500 {
        tries += 1;
        let who = r.gen_range(0..=n);
        let v = *values.choose(&mut r).unwrap();
        let a = if who == 0 {
            if r.gen_bool(0.5) { Action::rd(v) } else { Action::wd(v) }
        } else {
            [Action::rc(v), Action::fc(v), Action::wc(v), Action::uc(v)][r.gen_range(0..4)]
        };
        if let Some(s2) = s.step(a) {
            s = s2;
            words[who].push(a);
        }
    }
    let u = words.remove(0);
    (u, words)
}

/// The witness trace replays and ends with a contributor writing `#`.
pub fn witness_replays(net: &NetworkInstance, v: &Verdict) -> Result<(), String> {
    let w = v.witness.as_ref().ok_or("unsafe verdict without witness")?;
    let t = w.trace.as_ref().ok_or("witness without a concrete trace")?;
    replay(net, t, REPLAY_LIMITS)?;
    match t.last() {
        Some(s) if s.action.role == Role::Contributor && s.action.kind != Kind::Read && s.action.value == HASH => Ok(()),
        _ => Err("trace does not end with a contributor writing #".into()),
    }
}

/// Words over `alphabet` of length at most `n`.
pub fn all_words(alphabet: &BTreeSet<char>, n: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for &a in alphabet {
                let mut w2: Vec<char> = w.clone();
                w2.push(a);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
