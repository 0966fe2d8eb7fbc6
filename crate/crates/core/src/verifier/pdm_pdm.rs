use crate::action::{Action, Role};
use crate::error::{Error, Result};
use crate::lang::{bowtie, cover_index, k_index_word, support_fsa, Fsa};
use crate::network::{NetworkInstance, Verdict};
use crate::store::{contributor_alphabet, tau_leader_store, tau_store};
use crate::value::Value;

use super::pdm_fsm::leader_grammar;
use super::sims::l_g_grammar;
use super::{search_tau, unsafe_verdict, VerifyOptions};

/// Both machines pushdown (finite-state machines are wrapped).
///
/// Each simulator language is replaced by a finite-state support, and the
/// leader side is checked for a derivation of bounded index.
pub fn verify_pdm_pdm(net: &NetworkInstance, opts: &VerifyOptions) -> Result<Verdict> {
    let d = net.leader.as_pdm().ok_or_else(|| Error::invalid("verify_pdm_pdm needs FSM or PDM machines"))?;
    if net.contributor.as_pdm().is_none() {
        return Err(Error::invalid("verify_pdm_pdm needs FSM or PDM machines"));
    }
    if !net.hash_written() {
        return Ok(Verdict::safe(true));
    }
    let domain = &net.domain;
    let ext = net.contributor.extend(Role::Contributor)?;
    let calph = contributor_alphabet(domain);
    let mut sims: Vec<(Value, Fsa<Action>)> = Vec::new();
    let mut support_states = 0;
    for &g in domain {
        if !net.contributor.writes(g) {
            continue;
        }
        let l = l_g_grammar(&ext, domain, g)?;
        if l.is_empty() {
            continue;
        }
        let a = support_fsa(&l.to_cnf(), opts.support_cap).map_err(|e| match e {
            Error::Resource { limit, .. } => Error::Resource { what: "support automaton states", limit },
            other => other,
        })?;
        support_states += a.num_states();
        let mut s = a.then_loop(Action::wc(g)).prefix_closure().minimize(opts.state_cap)?;
        s.alphabet = calph.clone();
        sims.push((g, s));
    }
    let candidates: Vec<Value> = sims.iter().map(|(g, _)| *g).collect();
    let gd = leader_grammar(&d, domain);
    let check = |tau: &[Value]| -> Result<Option<Vec<Action>>> {
        let gdt = bowtie(&gd, &tau_leader_store(domain, tau)).trim();
        if gdt.is_empty() {
            return Ok(None);
        }
        let gdt = gdt.to_cnf();
        let k = cover_index(&gdt);
        let mut a2 = Fsa::epsilon(calph.clone());
        for g in tau {
            let s = &sims.iter().find(|(v, _)| v == g).expect("candidate").1;
            a2 = a2.shuffle(s, opts.state_cap)?.minimize(opts.state_cap)?;
        }
        let ac = tau_store(domain, tau).product_sync(&a2, opts.state_cap)?.minimize(opts.state_cap)?;
        if ac.is_empty() {
            return Ok(None);
        }
        k_index_word(&bowtie(&gdt, &ac), k)
    };
    let (found, tried) = search_tau(&candidates, opts, &check)?;
    let mut v = match found {
        Some((tau, word)) => unsafe_verdict(net, tau, word),
        None => Verdict::safe(true),
    };
    v.stat("tau_checked", tried);
    v.stat("support_states", support_states);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{replay, REPLAY_LIMITS};
    use crate::oracle::{saturate_fsm, ExploreOptions};

    fn net(d: &str, c: &str) -> NetworkInstance {
        NetworkInstance::from_sources(d, c).unwrap()
    }

    #[test]
    fn fsm_pair_matches_saturation() {
        let d = "fsm\nstates a b\ninit a\na r(req) b\nb w(ack) a\n";
        let c = "fsm\nstates c0 c1 c2\ninit c0\nc0 w(req) c1\nc1 r(ack) c2\nc2 w(#) c0\n";
        let n = net(d, c);
        let v = verify_pdm_pdm(&n, &VerifyOptions::default()).unwrap();
        assert!(v.is_unsafe());
        assert!(saturate_fsm(&n, ExploreOptions::default()).unwrap().is_unsafe());
        replay(&n, v.witness.unwrap().trace.as_ref().unwrap(), REPLAY_LIMITS).unwrap();
    }

    #[test]
    fn relay_needs_three_steps() {
        let d = "fsm\nstates a b c\ninit a\na w(x) b\nb r(y) c\nc w(z) c\n";
        let c = "fsm\nstates c0 c1 c2 c3\ninit c0\nc0 r(x) c1\nc1 w(y) c1\nc0 r(z) c2\nc2 w(#) c3\n";
        let n = net(d, c);
        assert!(verify_pdm_pdm(&n, &VerifyOptions::default()).unwrap().is_unsafe());
    }

    #[test]
    fn push_loop_without_hash_path() {
        let d = "pdm\nstates p\ninit p Z\np Z w(g) p A,Z\np A w(g) p A,A\n";
        let c = "pdm\nstates x y\ninit x Z\nx Z r(g) x A,Z\nx A r(g) x A,A\nx A r(h) y -\ny Z w(#) y Z\n";
        let n = net(d, c);
        assert!(!verify_pdm_pdm(&n, &VerifyOptions::default()).unwrap().is_unsafe());
    }

    #[test]
    fn pushdown_pair_with_counting() {
        // the contributor writes # after popping as many `b` reads as it pushed `a` reads
        let d = "pdm\nstates p q\ninit p Z\np Z w(a) p A,Z\np A w(a) p A,A\np A w(b) q -\nq A w(b) q -\nq Z w(e) q Z\n";
        let c = "pdm\nstates x y z\ninit x Z\nx Z r(a) x A,Z\nx A r(a) x A,A\nx A r(b) y -\ny A r(b) y -\ny Z r(e) z Z\nz Z w(#) z Z\n";
        let n = net(d, c);
        let v = verify_pdm_pdm(&n, &VerifyOptions::default()).unwrap();
        assert!(v.is_unsafe());
    }
}
