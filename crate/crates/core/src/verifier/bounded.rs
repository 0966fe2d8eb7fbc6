//! Safety when every process makes at most `k` register operations.
//!
//! Guesses a first-write order `tau`, a leader word `u` and, for each value
//! `g` of `tau`, a word `s_g` of reads and useless writes ending in `f_c(g)`,
//! all of length at most `k`. Copies of the `g`-writer may then write `g`
//! up to `(|G| + 1) k` more times.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::action::{Action, Kind, Op, Role};
use crate::error::Result;
use crate::machine::{Config, Limits, Machine};
use crate::network::{NetworkInstance, Verdict};
use crate::oracle::check_compatibility;
use crate::store::TauState;
use crate::value::{Value, HASH};

use super::{search_tau, unsafe_verdict, VerifyOptions};

/// Distinct operation words of length at most `k` from the initial
/// configuration, restricted to moves `keep` allows; `last` decides which
/// words are reported. Sets `hit` when a limit cut the search.
fn words(
    m: &Machine,
    k: usize,
    limits: Limits,
    keep: &dyn Fn(&Op) -> bool,
    last: &dyn Fn(&[Op]) -> bool,
    hit: &mut bool,
) -> Vec<Vec<Op>> {
    let mut out = BTreeSet::new();
    let mut seen: HashSet<(Config, Vec<Op>)> = HashSet::new();
    let mut stack = vec![(m.initial(), Vec::new())];
    let mut cache: HashMap<Config, Vec<(Op, Config)>> = HashMap::new();
    while let Some((c, w)) = stack.pop() {
        if last(&w) {
            out.insert(w.clone());
        }
        if w.len() == k || w.last().is_some_and(|o| o.kind == Kind::FirstWrite) {
            continue;
        }
        let moves = cache.entry(c.clone()).or_insert_with(|| {
            let s = m.successors(&c, limits);
            *hit |= s.bound_hit;
            s.moves
        });
        for (op, n) in moves.clone() {
            if !keep(&op) {
                continue;
            }
            let mut w2 = w.clone();
            w2.push(op);
            if seen.insert((n.clone(), w2.clone())) {
                stack.push((n, w2));
            }
        }
    }
    out.into_iter().collect()
}

/// Interleaves `u` with each `s[i]` followed by up to `extra` copies of
/// `w_c(tau[i])`. Returns the number of copies used per word.
fn interleave(u: &[Action], s: &[&[Action]], tau: &[Value], extra: usize) -> Option<Vec<usize>> {
    let start = (0usize, vec![0usize; s.len()], TauState { value: None, progress: 0, useless: false });
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some((p, pos, st)) = queue.pop_front() {
        if p == u.len() && st.progress == tau.len() && pos.iter().zip(s).all(|(q, w)| *q >= w.len()) {
            return Some(pos.iter().zip(s).map(|(q, w)| q - w.len()).collect());
        }
        let mut push = |next: (usize, Vec<usize>, TauState)| {
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        };
        if let Some(&a) = u.get(p) {
            if let Some(st2) = st.step(tau, a, false) {
                push((p + 1, pos.clone(), st2));
            }
        }
        for (i, w) in s.iter().enumerate() {
            let a = match w.get(pos[i]) {
                Some(&a) => a,
                None if pos[i] < w.len() + extra => Action::wc(tau[i]),
                None => continue,
            };
            if let Some(st2) = st.step(tau, a, false) {
                let mut p2 = pos.clone();
                p2[i] += 1;
                push((p, p2, st2));
            }
        }
    }
    None
}

pub fn verify_bounded(net: &NetworkInstance, k: usize, opts: &VerifyOptions) -> Result<Verdict> {
    if k == 0 || !net.hash_written() {
        return Ok(Verdict::safe(true));
    }
    let mut hit = false;
    let leader: Vec<Vec<Action>> = words(&net.leader, k, opts.limits, &|_| true, &|_| true, &mut hit)
        .into_iter()
        .map(|w| w.into_iter().map(|o| o.with_role(Role::Leader)).collect())
        .collect();
    let ext = net.contributor.extend(Role::Contributor)?;
    let mut sims: BTreeMap<Value, Vec<Vec<Action>>> = BTreeMap::new();
    for w in words(
        &ext,
        k,
        opts.limits,
        &|o| matches!(o.kind, Kind::Read | Kind::UselessWrite | Kind::FirstWrite),
        &|w| w.last().is_some_and(|o| o.kind == Kind::FirstWrite),
        &mut hit,
    ) {
        let g = w.last().expect("ends in a first write").value;
        sims.entry(g).or_default().push(w.into_iter().map(|o| o.with_role(Role::Contributor)).collect());
    }
    let extra = (net.domain.len() + 1) * k;
    let candidates: Vec<Value> = sims.keys().copied().collect();
    let check = |tau: &[Value]| -> Result<Option<Vec<Action>>> {
        if tau.last() != Some(&HASH) {
            return Ok(Some(Vec::new()));
        }
        let choices: Vec<&Vec<Vec<Action>>> = tau.iter().map(|g| &sims[g]).collect();
        let mut pick = vec![0usize; tau.len()];
        loop {
            let s: Vec<&[Action]> = pick.iter().zip(&choices).map(|(&i, c)| c[i].as_slice()).collect();
            for u in &leader {
                if let Some(copies) = interleave(u, &s, tau, extra) {
                    let m: Vec<Vec<Action>> = s
                        .iter()
                        .zip(tau)
                        .zip(&copies)
                        .map(|((w, &g), &n)| w.iter().copied().chain(std::iter::repeat_n(Action::wc(g), n)).collect())
                        .collect();
                    if let Some(word) = check_compatibility(u, &m, Some(tau)) {
                        return Ok(Some(word));
                    }
                }
            }
            // next tuple of contributor words
            let mut i = 0;
            loop {
                if i == pick.len() {
                    return Ok(None);
                }
                pick[i] += 1;
                if pick[i] < choices[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
        }
    };
    let (found, tried) = search_tau(&candidates, opts, &check)?;
    let mut v = match found {
        Some((tau, word)) => unsafe_verdict(net, tau, word),
        None => Verdict::safe(!hit),
    };
    v.stat("tau_checked", tried);
    v.stat("leader_words", leader.len());
    v.stat("contributor_words", sims.values().map(Vec::len).sum());
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{replay, REPLAY_LIMITS};
    use crate::oracle::{bounded_safety_oracle, ExploreOptions};

    fn net(d: &str, c: &str) -> NetworkInstance {
        NetworkInstance::from_sources(d, c).unwrap()
    }

    fn unsafe_at(n: &NetworkInstance, k: usize) -> bool {
        verify_bounded(n, k, &VerifyOptions::default()).unwrap().is_unsafe()
    }

    #[test]
    fn zero_and_one() {
        let n = net("fsm\nstates a\ninit a\n", "fsm\nstates c0 c1\ninit c0\nc0 w(#) c1\n");
        assert!(!unsafe_at(&n, 0));
        let v = verify_bounded(&n, 1, &VerifyOptions::default()).unwrap();
        assert!(v.is_unsafe());
        replay(&n, v.witness.unwrap().trace.as_ref().unwrap(), REPLAY_LIMITS).unwrap();
    }

    #[test]
    fn relay_flips_at_three() {
        let d = "fsm\nstates a b c\ninit a\na w(x) b\nb r(y) c\nc w(z) c\n";
        let c = "fsm\nstates c0 c1 c2 c3\ninit c0\nc0 r(x) c1\nc1 w(y) c1\nc0 r(z) c2\nc2 w(#) c3\n";
        let n = net(d, c);
        assert!(!unsafe_at(&n, 2));
        assert!(unsafe_at(&n, 3));
        let o = ExploreOptions::default();
        assert!(!bounded_safety_oracle(&n, 2, o).unwrap().is_unsafe());
        assert!(bounded_safety_oracle(&n, 3, o).unwrap().is_unsafe());
    }

    #[test]
    fn tape_leader() {
        // the leader counts on its tape before writing the go signal
        let d = "tm\nstates p q r\ninit p\np tape _ 1 R q\nq tape _ 1 R r\nr w(go) r\n";
        let c = "fsm\nstates c0 c1 c2\ninit c0\nc0 r(go) c1\nc1 w(#) c2\n";
        let n = net(d, c);
        assert!(!unsafe_at(&n, 1));
        assert!(unsafe_at(&n, 2));
    }
}
