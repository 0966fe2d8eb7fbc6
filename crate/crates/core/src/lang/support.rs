//! Finite automata accepting a support of a context-free language.
//!
//! States are strings of at most `n` variables (`n` = number of variables):
//! the variable part of a sentential form in a leftmost derivation of index
//! at most `n`. Every word of the grammar has a subword accepted here.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::lang::cfg::{CnfGrammar, Sym, VarId};
use crate::lang::fsa::{Fsa, Letter};

pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

pub fn support_fsa<L: Letter>(g: &CnfGrammar<L>, state_cap: usize) -> Result<Fsa<L>> {
    let n = g.num_vars();
    let mut out = Fsa::new(g.alphabet.clone());
    if g.is_empty() {
        return Ok(out);
    }
    let mut by_lhs: Vec<Vec<&[Sym<L>]>> = vec![Vec::new(); n];
    for p in &g.productions {
        by_lhs[p.lhs].push(&p.rhs);
    }
    let start = vec![g.axiom];
    let mut ids: HashMap<Vec<VarId>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        let src = ids[&s];
        let Some((&head, rest)) = s.split_first() else {
            out.accepting[src] = true;
            continue;
        };
        for rhs in &by_lhs[head] {
            let (label, push): (Option<L>, Vec<VarId>) = match rhs {
                [] => (None, vec![]),
                [Sym::T(a)] => (Some(a.clone()), vec![]),
                [Sym::V(b), Sym::V(c)] => (None, vec![*b, *c]),
                _ => unreachable!("checked CNF"),
            };
            if push.len() + rest.len() > n {
                continue;
            }
            let mut next = push;
            next.extend_from_slice(rest);
            let dst = match ids.get(&next) {
                Some(&d) => d,
                None => {
                    if out.num_states() >= state_cap {
                        return Err(Error::Resource { what: "support automaton states", limit: state_cap });
                    }
                    let d = out.add_state(false);
                    ids.insert(next.clone(), d);
                    queue.push_back(next);
                    d
                }
            };
            out.add_edge(src, label, dst);
        }
    }
    Ok(out.trim())
}
