//! Per-value contributor languages used by the simulators.

use std::collections::{BTreeSet, HashMap};

use crate::action::{Action, Kind, Role};
use crate::error::{Error, Result};
use crate::lang::cfg::{Cfg, Sym};
use crate::lang::{bowtie, Fsa};
use crate::machine::pdm_cfg::pdm_to_cfg;
use crate::machine::{Fsm, Machine};
use crate::store::contributor_alphabet;
use crate::value::Value;

/// Letters a simulator for `g` may use: all contributor reads and useless
/// writes, plus `f_c(g)` and `w_c(g)`.
pub fn sim_alphabet(domain: &[Value], g: Value) -> BTreeSet<Action> {
    let mut out: BTreeSet<Action> = domain.iter().flat_map(|&v| [Action::rc(v), Action::uc(v)]).collect();
    out.insert(Action::fc(g));
    out.insert(Action::wc(g));
    out
}

/// Labels of paths of the extended contributor from its initial state that
/// use only reads, useless writes and silent moves, enter no state twice
/// before the final `f_c(g)`, and end with it. States of the result are (state, visited set)
/// pairs; all paths end in one accepting sink.
pub fn simple_paths(ext: &Fsm, g: Value, alphabet: BTreeSet<Action>, cap: usize) -> Result<Fsa<Action>> {
    let n = ext.states.len();
    let mut out = Fsa::new(alphabet);
    let sink = out.add_state(true);
    let mut out_of: Vec<Vec<(Option<Action>, usize)>> = vec![Vec::new(); n];
    for (p, l, q) in &ext.trans {
        out_of[*p].push((l.map(|op| op.with_role(Role::Contributor)), *q));
    }
    let mut visited = vec![false; n];
    visited[ext.init] = true;
    let mut ids: HashMap<(usize, Vec<bool>), usize> = HashMap::from([((ext.init, visited.clone()), 0)]);
    let mut stack = vec![(ext.init, visited, 0usize)];
    while let Some((q, seen, id)) = stack.pop() {
        for (l, t) in &out_of[q] {
            // the closing first write may re-enter a state
            match l {
                Some(a) if a.kind == Kind::FirstWrite && a.value == g => {
                    out.add_edge(id, Some(*a), sink);
                    continue;
                }
                Some(a) if !matches!(a.kind, Kind::Read | Kind::UselessWrite) => continue,
                _ if seen[*t] => continue,
                _ => {}
            }
            let mut s2 = seen.clone();
            s2[*t] = true;
            let key = (*t, s2);
            let next = match ids.get(&key) {
                Some(&i) => i,
                None => {
                    if out.num_states() >= cap {
                        return Err(Error::Resource { what: "simple-path automaton states", limit: cap });
                    }
                    let i = out.add_state(false);
                    ids.insert(key.clone(), i);
                    stack.push((key.0, key.1, i));
                    i
                }
            };
            out.add_edge(id, *l, next);
        }
    }
    Ok(out.trim())
}

/// `R_g = G(r_c, u_c)* f_c(g)` over the contributor alphabet.
pub fn l_g_constraint(domain: &[Value], g: Value) -> Fsa<Action> {
    let mut r = Fsa::new(contributor_alphabet(domain));
    let done = r.add_state(true);
    for &v in domain {
        r.add_edge(0, Some(Action::rc(v)), 0);
        r.add_edge(0, Some(Action::uc(v)), 0);
    }
    r.add_edge(0, Some(Action::fc(g)), done);
    r
}

/// A grammar for `L_g = L(C^E) ∩ G(r_c, u_c)* f_c(g)`, where `ext` is the
/// extended contributor.
pub fn l_g_grammar(ext: &Machine, domain: &[Value], g: Value) -> Result<Cfg<Action>> {
    let pdm = ext.as_pdm().ok_or_else(|| Error::invalid("contributor must be an FSM or PDM"))?;
    let gc = pdm_to_cfg(&pdm, None, contributor_alphabet(domain), |op| op.with_role(Role::Contributor));
    let mut out = bowtie(&gc.to_cnf(), &l_g_constraint(domain, g)).trim();
    out.alphabet = sim_alphabet(domain, g);
    Ok(out)
}

/// `LL_g = L_g · w_c(g)*`, over [`sim_alphabet`].
pub fn ll_g_grammar(l_g: &Cfg<Action>, g: Value) -> Cfg<Action> {
    let mut out = l_g.clone();
    let old = out.axiom;
    let axiom = out.add_var("LL");
    let tail = out.add_var("W");
    out.add_prod(axiom, vec![Sym::V(old), Sym::V(tail)]);
    out.add_prod(tail, vec![Sym::T(Action::wc(g)), Sym::V(tail)]);
    out.add_prod(tail, vec![]);
    out.axiom = axiom;
    out
}

/// Values a contributor can first-write, in domain order.
pub fn writable(net_contrib: &Machine, domain: &[Value]) -> Vec<Value> {
    domain.iter().copied().filter(|&v| net_contrib.writes(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::format::parse_machine;
    use crate::value::{ValueTable, HASH};

    fn ext(src: &str, vt: &mut ValueTable) -> Machine {
        parse_machine(src, vt).unwrap().extend(Role::Contributor).unwrap()
    }

    #[test]
    fn simple_paths_skip_cycles() {
        let mut vt = ValueTable::new();
        let m = ext("fsm\nstates a b c\ninit a\na r(g) b\nb r(g) a\nb w(#) c\na w(g) a\n", &mut vt);
        let g = vt.get("g").unwrap();
        let Machine::Fsm(f) = &m else { unreachable!() };
        let domain = vec![HASH, g];
        let z = simple_paths(f, HASH, sim_alphabet(&domain, HASH), 1000).unwrap();
        let words = z.enumerate_words(6);
        // the useless write is a self-loop, so it never appears
        assert_eq!(words, BTreeSet::from([vec![Action::rc(g), Action::fc(HASH)]]));
        let zg = simple_paths(f, g, sim_alphabet(&domain, g), 1000).unwrap();
        assert_eq!(zg.enumerate_words(4), BTreeSet::from([vec![Action::fc(g)]]));
    }

    #[test]
    fn l_g_matches_simple_paths_on_acyclic_machines() {
        let mut vt = ValueTable::new();
        let m = ext("fsm\nstates a b c d\ninit a\na r(g) b\nb w(g) c\nc w(#) d\n", &mut vt);
        let g = vt.get("g").unwrap();
        let domain = vec![HASH, g];
        let Machine::Fsm(f) = &m else { unreachable!() };
        let z = simple_paths(f, HASH, sim_alphabet(&domain, HASH), 1000).unwrap();
        let l = l_g_grammar(&m, &domain, HASH).unwrap();
        assert_eq!(z.enumerate_words(4), l.enumerate_words(4));
        assert_eq!(z.enumerate_words(4), BTreeSet::from([vec![Action::rc(g), Action::uc(g), Action::fc(HASH)]]));
        let ll = ll_g_grammar(&l, HASH);
        assert!(ll.enumerate_words(5).contains(&vec![Action::rc(g), Action::uc(g), Action::fc(HASH), Action::wc(HASH), Action::wc(HASH)]));
    }
}
