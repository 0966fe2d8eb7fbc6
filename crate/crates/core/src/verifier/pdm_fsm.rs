use std::collections::BTreeSet;

use crate::action::{Action, Role};
use crate::error::{Error, Result};
use crate::lang::{bowtie, CnfGrammar, Fsa};
use crate::machine::pdm_cfg::pdm_to_cfg;
use crate::machine::{Fsm, Machine, MachineKind, Pdm};
use crate::network::{NetworkInstance, Verdict};
use crate::store::{contributor_alphabet, tau_store};
use crate::value::Value;

use super::product::explore_product;
use super::sims::{sim_alphabet, simple_paths};
use super::{search_tau, unsafe_verdict, Route, VerifyOptions};

pub(crate) fn leader_alphabet(domain: &[Value]) -> BTreeSet<Action> {
    domain.iter().flat_map(|&v| [Action::rd(v), Action::wd(v)]).collect()
}

/// `G_D` in normal form, over leader reads and writes.
pub(crate) fn leader_grammar(p: &Pdm, domain: &[Value]) -> CnfGrammar<Action> {
    pdm_to_cfg(p, None, leader_alphabet(domain), |op| op.with_role(Role::Leader)).to_cnf()
}

pub(crate) fn extended_fsm(m: &Machine) -> Result<Fsm> {
    match m.extend(Role::Contributor)? {
        Machine::Fsm(f) => Ok(f),
        _ => Err(Error::invalid("contributor must be an FSM")),
    }
}

/// Both machines finite-state.
pub fn verify_fsm_fsm(net: &NetworkInstance, opts: &VerifyOptions) -> Result<Verdict> {
    if net.kind_pair() != (MachineKind::Fsm, MachineKind::Fsm) {
        return Err(Error::invalid("verify_fsm_fsm needs an FSM leader and an FSM contributor"));
    }
    verify_pdm_fsm(net, opts)
}

/// Pushdown (or finite-state) leader, finite-state contributor.
pub fn verify_pdm_fsm(net: &NetworkInstance, opts: &VerifyOptions) -> Result<Verdict> {
    let c_ext = extended_fsm(&net.contributor)?;
    if !net.hash_written() {
        return Ok(Verdict::safe(true));
    }
    match (&net.leader, opts.route) {
        (Machine::Fsm(d), Route::Auto) => explore_product(net, d, &c_ext, opts),
        (Machine::Fsm(_) | Machine::Pdm(_), _) => per_tau(net, &net.leader.as_pdm().expect("fsm or pdm"), &c_ext, opts),
        _ => Err(Error::invalid("leader must be an FSM or PDM")),
    }
}

/// One grammar emptiness check per first-write sequence:
/// `G_D ⋈ (A_1 ∥ A_2)` with `A_1 = L(S^E) ∩ P_tau` and `A_2` the
/// interleavings of the simulators of the values in `tau`.
fn per_tau(net: &NetworkInstance, d: &Pdm, c_ext: &Fsm, opts: &VerifyOptions) -> Result<Verdict> {
    let domain = &net.domain;
    let gd = leader_grammar(d, domain);
    let calph = contributor_alphabet(domain);
    let mut sims: Vec<(Value, Fsa<Action>)> = Vec::new();
    for &g in domain {
        if !net.contributor.writes(g) {
            continue;
        }
        let z = simple_paths(c_ext, g, sim_alphabet(domain, g), opts.state_cap)?;
        if z.is_empty() {
            continue;
        }
        let mut s = z.then_loop(Action::wc(g)).prefix_closure();
        s.alphabet = calph.clone();
        sims.push((g, s));
    }
    let candidates: Vec<Value> = sims.iter().map(|(g, _)| *g).collect();
    let check = |tau: &[Value]| -> Result<Option<Vec<Action>>> {
        let mut a2 = Fsa::epsilon(calph.clone());
        for g in tau {
            let s = &sims.iter().find(|(v, _)| v == g).expect("candidate").1;
            a2 = a2.shuffle(s, opts.state_cap)?.trim();
        }
        let a = tau_store(domain, tau).product_sync(&a2, opts.state_cap)?.trim();
        if a.is_empty() {
            return Ok(None);
        }
        let g = bowtie(&gd, &a);
        Ok(g.extract_word())
    };
    let (found, tried) = search_tau(&candidates, opts, &check)?;
    let mut v = match found {
        Some((tau, word)) => unsafe_verdict(net, tau, word),
        None => Verdict::safe(true),
    };
    v.stat("tau_checked", tried);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{replay, REPLAY_LIMITS};
    use crate::oracle::{saturate_fsm, ExploreOptions};
    use crate::value::HASH;

    fn net(d: &str, c: &str) -> NetworkInstance {
        NetworkInstance::from_sources(d, c).unwrap()
    }

    const IDLE: &str = "fsm\nstates a\ninit a\n";
    const PER_TAU: VerifyOptions = VerifyOptions {
        route: Route::PerTau,
        state_cap: 2_000_000,
        guess_cap: 200_000,
        support_cap: 1_000_000,
        limits: crate::machine::Limits { stack_depth: 64, internal_steps: 10_000 },
        jobs: 1,
    };

    fn both(n: &NetworkInstance) -> (Verdict, Verdict) {
        (verify_fsm_fsm(n, &VerifyOptions::default()).unwrap(), verify_pdm_fsm(n, &PER_TAU).unwrap())
    }

    #[test]
    fn unconditional_hash_writer() {
        let n = net(IDLE, "fsm\nstates c0 c1\ninit c0\nc0 w(#) c1\n");
        for v in [both(&n).0, both(&n).1] {
            let w = v.witness.unwrap();
            assert_eq!(w.tau, vec![HASH]);
            replay(&n, w.trace.as_ref().unwrap(), REPLAY_LIMITS).unwrap();
        }
    }

    #[test]
    fn disjoint_values_are_safe() {
        let n = net("fsm\nstates a\ninit a\na w(g) a\n", "fsm\nstates c0 c1\ninit c0\nc0 r(h) c1\nc1 w(h) c0\n");
        let (a, b) = both(&n);
        assert!(!a.is_unsafe() && !b.is_unsafe());
    }

    #[test]
    fn relay_through_contributors() {
        // the leader answers `req` with `ack`; `#` needs both
        let d = "fsm\nstates a b\ninit a\na r(req) b\nb w(ack) a\n";
        let c = "fsm\nstates c0 c1 c2\ninit c0\nc0 w(req) c1\nc1 r(ack) c2\nc2 w(#) c0\n";
        let n = net(d, c);
        let (a, b) = both(&n);
        assert!(a.is_unsafe() && b.is_unsafe());
        let req = n.values.get("req").unwrap();
        assert_eq!(a.witness.as_ref().unwrap().tau, vec![req, HASH]);
        replay(&n, a.witness.unwrap().trace.as_ref().unwrap(), REPLAY_LIMITS).unwrap();
        assert!(saturate_fsm(&n, ExploreOptions::default()).unwrap().is_unsafe());
    }

    #[test]
    fn second_contributor_needed() {
        // one contributor must read g twice around a write of h by another
        let d = "fsm\nstates a b c\ninit a\na w(g) b\nb r(h) c\nc w(g) c\n";
        let c = "fsm\nstates c0 c1 c2 c3 c4\ninit c0\nc0 r(g) c1\nc1 r(g) c2\nc2 r(k) c3\nc3 w(#) c4\nc0 w(h) c0\nc0 w(k) c0\n";
        let n = net(d, c);
        let (a, b) = both(&n);
        let s = saturate_fsm(&n, ExploreOptions::default()).unwrap();
        assert_eq!(a.is_unsafe(), s.is_unsafe());
        assert_eq!(b.is_unsafe(), s.is_unsafe());
    }

    #[test]
    fn pushdown_leader_counts() {
        // the leader writes g only after as many reads of a as it pushed
        let d = "pdm\nstates p q r\ninit p Z\np Z w(s) p A,Z\np A w(s) p A,A\np A eps q A\nq A r(a) q -\nq Z w(g) r Z\n";
        let c = "fsm\nstates c0 c1 c2\ninit c0\nc0 r(s) c1\nc1 w(a) c0\nc0 r(g) c2\nc2 w(#) c0\n";
        let n = net(d, c);
        let v = verify_pdm_fsm(&n, &VerifyOptions::default()).unwrap();
        assert!(v.is_unsafe());
        replay(&n, v.witness.unwrap().trace.as_ref().unwrap(), REPLAY_LIMITS).unwrap();
    }

    #[test]
    fn kinds_are_checked() {
        let n = net("pdm\nstates p\ninit p Z\n", IDLE);
        assert!(verify_fsm_fsm(&n, &VerifyOptions::default()).is_err());
    }
}
