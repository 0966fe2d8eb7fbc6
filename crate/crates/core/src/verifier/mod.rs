//! Decision procedures for unbounded and bounded safety, and the
//! determinization transform.

mod bounded;
mod determinize;
mod fsm_pdm;
mod pdm_fsm;
mod pdm_pdm;
mod product;
pub mod sims;

pub use bounded::verify_bounded;
pub use determinize::{determinize, is_deterministic_pair, read_pair_gadget};
pub use fsm_pdm::verify_fsm_pdm;
pub use pdm_fsm::{verify_fsm_fsm, verify_pdm_fsm};
pub use pdm_pdm::verify_pdm_pdm;

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::action::Action;
use crate::error::{Error, Result};
use crate::machine::{Limits, MachineKind};
use crate::network::{witness, NetworkInstance, Verdict, REPLAY_LIMITS};
use crate::oracle::{explore_bounded, ExploreOptions};
use crate::value::{Value, HASH};

/// How `verify_pdm_fsm` explores guesses when the leader is an FSM.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Route {
    /// One product over all guesses for FSM leaders, grammars otherwise.
    #[default]
    Auto,
    /// One grammar check per first-write sequence.
    PerTau,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// States of any materialized automaton or explicit product.
    pub state_cap: usize,
    /// First-write sequences and paths tried.
    pub guess_cap: usize,
    /// States of a support automaton.
    pub support_cap: usize,
    pub route: Route,
    /// Per-operation budgets for stepping machines (bounded safety).
    pub limits: Limits,
    /// Threads for independent guesses.
    pub jobs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            state_cap: 2_000_000,
            guess_cap: 200_000,
            support_cap: crate::lang::support::DEFAULT_SUPPORT_CAP,
            route: Route::Auto,
            limits: Limits { stack_depth: 64, internal_steps: 10_000 },
            jobs: 1,
        }
    }
}

/// Picks the procedure matching the machine kinds.
pub fn verify(net: &NetworkInstance, opts: &VerifyOptions) -> Result<(Verdict, &'static str)> {
    use MachineKind::*;
    Ok(match net.kind_pair() {
        (Fsm, Fsm) => (verify_fsm_fsm(net, opts)?, "verify_fsm_fsm"),
        (Pdm, Fsm) => (verify_pdm_fsm(net, opts)?, "verify_pdm_fsm"),
        (Fsm, Pdm) => (verify_fsm_pdm(net, opts)?, "verify_fsm_pdm"),
        (Pdm, Pdm) => (verify_pdm_pdm(net, opts)?, "verify_pdm_pdm"),
        _ => return Err(Error::invalid("Turing machines are only supported by bounded verification")),
    })
}

/// An unsafe verdict for an extended word. When the word cannot be turned
/// into a trace (it may leave out moves of all but one simulator), a small
/// bounded search supplies the witness instead.
pub(crate) fn unsafe_verdict(net: &NetworkInstance, tau: Vec<Value>, word: Vec<Action>) -> Verdict {
    let w = witness(net, tau, word);
    if w.trace.is_some() {
        return Verdict::unsafe_with(w);
    }
    let opts = ExploreOptions { limits: REPLAY_LIMITS, state_cap: 100_000 };
    for (k, depth) in [(1, 8), (2, 10), (3, 12)] {
        if let Ok(v) = explore_bounded(net, k, depth, opts) {
            if v.is_unsafe() {
                let mut v = v;
                v.stat("witness_by_search", 1);
                return v;
            }
        }
    }
    Verdict::unsafe_with(w)
}

/// Depth-first search over repetition-free value sequences ending in `#`.
/// `check` decides a prefix; an infeasible prefix is not extended. At each
/// level `#` is tried first. With several jobs the first-level branches run
/// in parallel and the leftmost success wins.
pub(crate) fn search_tau<T: Send>(
    candidates: &[Value],
    opts: &VerifyOptions,
    check: &(dyn Fn(&[Value]) -> Result<Option<T>> + Sync),
) -> Result<(Option<(Vec<Value>, T)>, usize)> {
    let mut order: Vec<Value> = candidates.iter().copied().filter(|&v| v == HASH).collect();
    order.extend(candidates.iter().copied().filter(|&v| v != HASH));
    if !order.contains(&HASH) {
        return Ok((None, 0));
    }
    let tried = AtomicUsize::new(0);
    let best = AtomicUsize::new(usize::MAX);
    let run = |i: usize| -> Result<Option<(Vec<Value>, T)>> {
        let abort = || best.load(Ordering::Relaxed) < i;
        let r = dfs(&mut vec![order[i]], &order, opts.guess_cap, &tried, &abort, check)?;
        if r.is_some() {
            best.fetch_min(i, Ordering::Relaxed);
        }
        Ok(r)
    };
    let results: Vec<Result<Option<(Vec<Value>, T)>>> = if opts.jobs <= 1 {
        let mut out = Vec::new();
        for i in 0..order.len() {
            let r = run(i);
            let stop = !matches!(r, Ok(None));
            out.push(r);
            if stop {
                break;
            }
        }
        out
    } else {
        let next = AtomicUsize::new(0);
        let mut slots: Vec<Option<Result<Option<(Vec<Value>, T)>>>> = (0..order.len()).map(|_| None).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..opts.jobs.min(order.len()))
                .map(|_| {
                    s.spawn(|| {
                        let mut mine = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            if i >= order.len() {
                                break;
                            }
                            mine.push((i, run(i)));
                        }
                        mine
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("guess worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().flatten().collect()
    };
    let tried = tried.load(Ordering::Relaxed);
    for r in results {
        if let Some(found) = r? {
            return Ok((Some(found), tried));
        }
    }
    Ok((None, tried))
}

fn dfs<T>(
    prefix: &mut Vec<Value>,
    order: &[Value],
    cap: usize,
    tried: &AtomicUsize,
    abort: &dyn Fn() -> bool,
    check: &(dyn Fn(&[Value]) -> Result<Option<T>> + Sync),
) -> Result<Option<(Vec<Value>, T)>> {
    if abort() {
        return Ok(None);
    }
    if tried.fetch_add(1, Ordering::Relaxed) >= cap {
        return Err(Error::Resource { what: "first-write guesses", limit: cap });
    }
    let Some(t) = check(prefix)? else { return Ok(None) };
    if prefix.last() == Some(&HASH) {
        return Ok(Some((prefix.clone(), t)));
    }
    for &g in order {
        if prefix.contains(&g) {
            continue;
        }
        prefix.push(g);
        let r = dfs(prefix, order, cap, tried, abort, check)?;
        prefix.pop();
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_search_prunes_and_prefers_hash() {
        let a = Value(1);
        let b = Value(2);
        let opts = VerifyOptions::default();
        // feasible: any prefix of a b #
        let target = [a, b, HASH];
        let check = |t: &[Value]| -> Result<Option<()>> { Ok(target.starts_with(t).then_some(())) };
        let (found, tried) = search_tau(&[HASH, a, b], &opts, &check).unwrap();
        assert_eq!(found.unwrap().0, target.to_vec());
        // #, a, a#, ab, ab#
        assert_eq!(tried, 5);
        let par = VerifyOptions { jobs: 3, ..opts };
        assert_eq!(search_tau(&[HASH, a, b], &par, &check).unwrap().0.unwrap().0, target.to_vec());
        let capped = VerifyOptions { guess_cap: 2, ..opts };
        assert!(search_tau(&[HASH, a, b], &capped, &check).unwrap_err().is_resource());
        assert!(search_tau(&[a, b], &opts, &check).unwrap().0.is_none());
    }
}
