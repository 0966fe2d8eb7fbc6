use std::sync::atomic::{AtomicUsize, Ordering};

use crate::action::{Action, Role};
use crate::error::{Error, Result};
use crate::lang::{bowtie, CnfGrammar, Fsa};
use crate::machine::Machine;
use crate::network::{NetworkInstance, Verdict};
use crate::store::{tau_leader_store, tau_store};
use crate::value::{Value, HASH};

use super::pdm_fsm::leader_alphabet;
use super::sims::{l_g_grammar, ll_g_grammar};
use super::{search_tau, unsafe_verdict, VerifyOptions};

/// Finite-state leader, pushdown (or finite-state) contributor.
///
/// For each first-write sequence `tau`, the leader's view
/// `Q_tau = D ∥ S^E_D ∩ P_tau` is cut into path-shaped pieces: a path of
/// strongly connected components joined by single edges. The simulators are
/// then checked one at a time against each piece.
pub fn verify_fsm_pdm(net: &NetworkInstance, opts: &VerifyOptions) -> Result<Verdict> {
    let Machine::Fsm(d) = &net.leader else {
        return Err(Error::invalid("verify_fsm_pdm needs an FSM leader"));
    };
    if matches!(net.contributor, Machine::Tm(_)) {
        return Err(Error::invalid("verify_fsm_pdm needs an FSM or PDM contributor"));
    }
    if !net.hash_written() {
        return Ok(Verdict::safe(true));
    }
    let domain = &net.domain;
    let ext = net.contributor.extend(Role::Contributor)?;
    let mut sims: Vec<(Value, CnfGrammar<Action>)> = Vec::new();
    for &g in domain {
        if !net.contributor.writes(g) {
            continue;
        }
        let l = l_g_grammar(&ext, domain, g)?;
        if l.is_empty() {
            continue;
        }
        sims.push((g, ll_g_grammar(&l, g).to_cnf()));
    }
    let candidates: Vec<Value> = sims.iter().map(|(g, _)| *g).collect();
    let dl = d.lts(Role::Leader, leader_alphabet(domain));
    let pieces = AtomicUsize::new(0);
    let check = |tau: &[Value]| -> Result<Option<Vec<Action>>> {
        let q = dl.product_sync(&tau_leader_store(domain, tau), opts.state_cap)?.trim();
        if q.is_empty() {
            return Ok(None);
        }
        let store = tau_store(domain, tau);
        let mut found = None;
        for_each_piece(&q, opts.guess_cap, &mut |piece| {
            pieces.fetch_add(1, Ordering::Relaxed);
            let a = piece.product_sync(&store, opts.state_cap)?.trim();
            if a.is_empty() {
                return Ok(false);
            }
            let mut last = None;
            for g in tau {
                let ll = &sims.iter().find(|(v, _)| v == g).expect("candidate").1;
                match bowtie(ll, &a).extract_word() {
                    Some(w) => last = Some(w),
                    None => return Ok(false),
                }
            }
            found = last.or(Some(Vec::new()));
            Ok(true)
        })?;
        Ok(found)
    };
    let (found, tried) = search_tau(&candidates, opts, &check)?;
    let mut v = match found {
        Some((tau, word)) => {
            debug_assert_eq!(tau.last(), Some(&HASH));
            unsafe_verdict(net, tau, word)
        }
        None => Verdict::safe(true),
    };
    v.stat("tau_checked", tried);
    v.stat("paths_checked", pieces.load(Ordering::Relaxed));
    Ok(v)
}

/// Calls `f` on every automaton made of the states and edges of a path of
/// strongly connected components from the initial state to an accepting
/// state, joined by one edge each. Stops when `f` returns true.
fn for_each_piece(
    q: &Fsa<Action>,
    cap: usize,
    f: &mut dyn FnMut(&Fsa<Action>) -> Result<bool>,
) -> Result<bool> {
    let comp = q.sccs();
    let ncomp = comp.iter().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (s, &c) in comp.iter().enumerate() {
        members[c].push(s);
    }
    let mut exits: Vec<Vec<(usize, Option<Action>, usize)>> = vec![Vec::new(); ncomp];
    for (s, out) in q.edges.iter().enumerate() {
        for (l, t) in out {
            if comp[s] != comp[*t] {
                exits[comp[s]].push((s, *l, *t));
            }
        }
    }
    let mut count = 0usize;
    let mut path: Vec<(usize, Option<Action>, usize)> = Vec::new();
    go(q, &comp, &members, &exits, comp[q.init], &mut path, &mut count, cap, f)
}

#[allow(clippy::too_many_arguments)]
fn go(
    q: &Fsa<Action>,
    comp: &[usize],
    members: &[Vec<usize>],
    exits: &[Vec<(usize, Option<Action>, usize)>],
    at: usize,
    path: &mut Vec<(usize, Option<Action>, usize)>,
    count: &mut usize,
    cap: usize,
    f: &mut dyn FnMut(&Fsa<Action>) -> Result<bool>,
) -> Result<bool> {
    if members[at].iter().any(|&s| q.accepting[s]) {
        *count += 1;
        if *count > cap {
            return Err(Error::Resource { what: "path guesses", limit: cap });
        }
        if f(&piece(q, comp, path))? {
            return Ok(true);
        }
    }
    for e in &exits[at] {
        path.push(*e);
        let done = go(q, comp, members, exits, comp[e.2], path, count, cap, f)?;
        path.pop();
        if done {
            return Ok(true);
        }
    }
    Ok(false)
}

fn piece(q: &Fsa<Action>, comp: &[usize], path: &[(usize, Option<Action>, usize)]) -> Fsa<Action> {
    let mut keep = vec![false; q.num_states()];
    let mut comps = vec![comp[q.init]];
    comps.extend(path.iter().map(|e| comp[e.2]));
    for (s, c) in comp.iter().enumerate() {
        keep[s] = comps.contains(c);
    }
    let mut out = q.clone();
    for (s, edges) in out.edges.iter_mut().enumerate() {
        edges.retain(|(l, t)| comp[s] == comp[*t] || path.contains(&(s, *l, *t)));
    }
    for (s, a) in out.accepting.iter_mut().enumerate() {
        *a &= keep[s] && comp[s] == *comps.last().expect("nonempty");
    }
    out.restrict(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{replay, REPLAY_LIMITS};
    use crate::oracle::{explore_bounded, ExploreOptions};

    fn net(d: &str, c: &str) -> NetworkInstance {
        NetworkInstance::from_sources(d, c).unwrap()
    }

    #[test]
    fn pure_fsm_agrees() {
        let d = "fsm\nstates a b\ninit a\na r(req) b\nb w(ack) a\n";
        let c = "fsm\nstates c0 c1 c2\ninit c0\nc0 w(req) c1\nc1 r(ack) c2\nc2 w(#) c0\n";
        let n = net(d, c);
        let a = verify_fsm_pdm(&n, &VerifyOptions::default()).unwrap();
        let b = super::super::verify_fsm_fsm(&n, &VerifyOptions::default()).unwrap();
        assert!(a.is_unsafe() && b.is_unsafe());
    }

    #[test]
    fn pop_before_hash() {
        // the contributor pushes one A per read of `s`, pops one per read of `p`
        let d = "fsm\nstates a b c d\ninit a\na w(s) b\nb w(s) c\nc w(p) d\nd w(q) d\nd w(p) d\n";
        let c = "pdm\nstates x y z\ninit x Z\nx Z r(s) x A,Z\nx A r(s) x A,A\nx A r(p) y -\ny A r(q) y A\ny A r(p) y -\ny Z w(#) z Z\n";
        let n = net(d, c);
        let v = verify_fsm_pdm(&n, &VerifyOptions::default()).unwrap();
        assert!(v.is_unsafe());
        assert!(explore_bounded(&n, 1, 8, ExploreOptions::default()).unwrap().is_unsafe());
        if let Some(t) = &v.witness.as_ref().unwrap().trace {
            replay(&n, t, REPLAY_LIMITS).unwrap();
        }
    }

    #[test]
    fn impossible_guard_is_safe() {
        let d = "fsm\nstates a\ninit a\na w(g) a\n";
        let c = "pdm\nstates x y z\ninit x Z\nx Z r(h) y Z\ny Z w(#) z Z\nx Z r(g) x A,Z\n";
        let n = net(d, c);
        assert!(!verify_fsm_pdm(&n, &VerifyOptions::default()).unwrap().is_unsafe());
    }

    #[test]
    fn pieces_follow_components() {
        let d = "fsm\nstates a b c\ninit a\na w(g) b\nb w(h) a\na w(k) c\nb w(l) c\n";
        let mut vt = crate::value::ValueTable::new();
        let Machine::Fsm(f) = crate::machine::format::parse_machine(d, &mut vt).unwrap() else { unreachable!() };
        let vals: Vec<Value> = vt.values().collect();
        let mut q = f.lts(Role::Leader, leader_alphabet(&vals));
        q.accepting = vec![false, false, true];
        let mut n = 0;
        for_each_piece(&q, 100, &mut |p| {
            n += 1;
            assert_eq!(p.num_states(), 3);
            Ok(false)
        })
        .unwrap();
        // {a,b} then c, entered by the k edge or the l edge
        assert_eq!(n, 2);
    }
}
