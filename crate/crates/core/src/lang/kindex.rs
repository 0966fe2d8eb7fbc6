//! Bounded-index derivations.
//!
//! A derivation has index `k` when none of its sentential forms holds more
//! than `k` variable occurrences. `L^(k)(G)` is the set of words with such a
//! derivation.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::lang::cfg::{Cfg, CnfGrammar, Sym, VarId};
use crate::lang::fsa::Letter;

/// `n + 2 * (number of SCCs)`; `L^(k)(G)` for this `k` is a cover of `L(G)`.
pub fn cover_index<L: Letter>(g: &CnfGrammar<L>) -> usize {
    g.num_vars() + 2 * g.scc_count()
}

/// Memo table of the index recurrence: for each level and variable, the
/// length of a shortest word and the production that gives it.
pub struct IndexTable {
    k: usize,
    /// Levels above `top` repeat level `top`.
    top: usize,
    /// `why[l][x]`: production index and whether the left variable is the
    /// one derived at the lower level.
    why: Vec<Vec<Option<(usize, bool)>>>,
    len: Vec<Vec<u64>>,
}

impl IndexTable {
    pub fn holds(&self, level: usize, x: VarId) -> bool {
        level >= 1 && level <= self.k && self.why[self.row(level)][x].is_some()
    }

    /// Length of a shortest word `x` derives within `level`.
    pub fn shortest(&self, level: usize, x: VarId) -> Option<u64> {
        self.holds(level, x).then(|| self.len[self.row(level)][x])
    }

    fn row(&self, level: usize) -> usize {
        level.min(self.top)
    }
}

fn check_shape<L: Letter>(g: &Cfg<L>) -> Result<()> {
    if let Some(p) = g.productions.iter().find(|p| p.var_count() > 2) {
        return Err(Error::invalid(format!(
            "index recurrence needs at most two variables per right-hand side, `{}` has {}",
            g.var_names[p.lhs],
            p.var_count()
        )));
    }
    Ok(())
}

/// Fills the table for levels `1..=k`.
///
/// At level `l` a production `X -> ..Y..` uses `Y` at level `l`, and
/// `X -> ..B..C..` uses one of `B`, `C` at level `l - 1` and the other at
/// level `l`. Within a level, entries are settled shortest first, so every
/// justification only refers to entries settled before it.
pub fn index_table<L: Letter>(g: &Cfg<L>, k: usize) -> Result<IndexTable> {
    if k < 1 {
        return Err(Error::invalid("index must be at least 1"));
    }
    check_shape(g)?;
    let n = g.num_vars();
    let mut why: Vec<Vec<Option<(usize, bool)>>> = vec![vec![None; n]];
    let mut len: Vec<Vec<u64>> = vec![vec![u64::MAX; n]];
    // (production, left variable at the lower level, same-level variable)
    let mut options: Vec<(usize, bool, Option<VarId>, Option<VarId>)> = Vec::new();
    for (i, p) in g.productions.iter().enumerate() {
        let vars: Vec<VarId> = p.vars().collect();
        match vars.as_slice() {
            [] => options.push((i, false, None, None)),
            [y] => options.push((i, false, Some(*y), None)),
            [b, c] => {
                options.push((i, true, Some(*c), Some(*b)));
                options.push((i, false, Some(*b), Some(*c)));
            }
            _ => unreachable!(),
        }
    }
    let mut waiting: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (o, &(_, _, same, _)) in options.iter().enumerate() {
        if let Some(y) = same {
            waiting[y].push(o);
        }
    }
    let mut top = k;
    for l in 1..=k {
        why.push(vec![None; n]);
        len.push(vec![u64::MAX; n]);
        let (lower, rest) = len.split_at_mut(l);
        let (lower, cur) = (&lower[l - 1], &mut rest[0]);
        let terminals = |i: usize| (g.productions[i].rhs.len() - g.productions[i].var_count()) as u64;
        let cost = |o: usize, cur: &[u64]| -> Option<u64> {
            let (i, _, same, low) = options[o];
            let mut c = terminals(i);
            if let Some(y) = same {
                c = c.checked_add(cur[y]).filter(|c| *c != u64::MAX)?;
            }
            if let Some(b) = low {
                c = c.checked_add(lower[b]).filter(|c| *c != u64::MAX)?;
            }
            Some(c)
        };
        let mut heap: BinaryHeap<Reverse<(u64, VarId, usize)>> = BinaryHeap::new();
        for (o, &(i, _, same, _)) in options.iter().enumerate() {
            if same.is_none() {
                if let Some(c) = cost(o, cur) {
                    heap.push(Reverse((c, g.productions[i].lhs, o)));
                }
            }
        }
        let mut done = vec![false; n];
        while let Some(Reverse((c, x, o))) = heap.pop() {
            if done[x] {
                continue;
            }
            done[x] = true;
            cur[x] = c;
            let (i, left_low, _, _) = options[o];
            why[l][x] = Some((i, left_low));
            for &o2 in &waiting[x] {
                let lhs = g.productions[options[o2].0].lhs;
                if done[lhs] {
                    continue;
                }
                if let Some(c2) = cost(o2, cur) {
                    heap.push(Reverse((c2, lhs, o2)));
                }
            }
        }
        // the next level is computed from this one exactly as this one was
        // from the previous, so nothing changes any more
        if l >= 2 && len[l] == len[l - 1] {
            top = l;
            break;
        }
    }
    Ok(IndexTable { k, top, why, len })
}

/// Is `L^(k)(g)` non-empty?
pub fn k_index_nonempty<L: Letter>(g: &Cfg<L>, k: usize) -> Result<bool> {
    Ok(index_table(g, k)?.holds(k, g.axiom))
}

/// Longest word [`k_index_word`] will spell out.
pub const WORD_LIMIT: u64 = 1 << 22;

/// A shortest word of `L^(k)(g)`, read off the memo table.
pub fn k_index_word<L: Letter>(g: &Cfg<L>, k: usize) -> Result<Option<Vec<L>>> {
    let t = index_table(g, k)?;
    let Some(n) = t.shortest(k, g.axiom) else { return Ok(None) };
    if n > WORD_LIMIT {
        return Err(Error::Resource { what: "witness word length", limit: WORD_LIMIT as usize });
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Sym<L>, usize)> = vec![(Sym::V(g.axiom), k)];
    while let Some((s, l)) = stack.pop() {
        match s {
            Sym::T(a) => out.push(a),
            Sym::V(x) => {
                let (pi, left_low) = t.why[t.row(l)][x].expect("justified entry");
                let p = &g.productions[pi];
                let two = p.var_count() == 2;
                let mut seen_vars = 0;
                let mut items = Vec::new();
                for sym in &p.rhs {
                    let level = match sym {
                        Sym::T(_) => l,
                        Sym::V(_) => {
                            seen_vars += 1;
                            let first = seen_vars == 1;
                            if two && (first == left_low) {
                                l - 1
                            } else {
                                l
                            }
                        }
                    };
                    items.push((sym.clone(), level));
                }
                stack.extend(items.into_iter().rev());
            }
        }
    }
    Ok(Some(out))
}

/// Brute-force `L^(k)` up to `max_len` by search over sentential forms.
///
/// Forms whose terminal count exceeds `max_len` are dropped. Productions with
/// an empty right-hand side can make the search revisit forms; a visited set
/// keeps it finite.
pub fn enumerate_k_index<L: Letter>(g: &Cfg<L>, k: usize, max_len: usize) -> BTreeSet<Vec<L>> {
    let mut out = BTreeSet::new();
    let start = vec![Sym::V(g.axiom)];
    let mut seen: HashSet<Vec<Sym<L>>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(form) = queue.pop_front() {
        let vars = form.iter().filter(|s| s.var().is_some()).count();
        if vars == 0 {
            out.insert(
                form.into_iter()
                    .map(|s| match s {
                        Sym::T(a) => a,
                        Sym::V(_) => unreachable!(),
                    })
                    .collect(),
            );
            continue;
        }
        for (pos, s) in form.iter().enumerate() {
            let Sym::V(x) = s else { continue };
            for p in g.productions.iter().filter(|p| p.lhs == *x) {
                let mut next = Vec::with_capacity(form.len() + p.rhs.len());
                next.extend_from_slice(&form[..pos]);
                next.extend(p.rhs.iter().cloned());
                next.extend_from_slice(&form[pos + 1..]);
                let nv = next.iter().filter(|s| s.var().is_some()).count();
                let nt = next.len() - nv;
                if nv > k || nt > max_len {
                    continue;
                }
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::cfg::tests::grammar;

    #[test]
    fn single_terminal_at_index_one() {
        let g = grammar(&[("S", "a")]);
        assert!(k_index_nonempty(&g, 1).unwrap());
    }

    #[test]
    fn self_doubling_is_empty() {
        let g = grammar(&[("S", "SS")]);
        for k in 1..6 {
            assert!(!k_index_nonempty(&g, k).unwrap());
        }
    }

    #[test]
    fn two_variables_need_index_two() {
        let g = grammar(&[("S", "AB"), ("A", "a"), ("B", "b")]);
        assert!(!k_index_nonempty(&g, 1).unwrap());
        assert!(k_index_nonempty(&g, 2).unwrap());
        assert_eq!(k_index_word(&g, 2).unwrap(), Some(vec!['a', 'b']));
        assert!(enumerate_k_index(&g, 1, 4).is_empty());
    }

    #[test]
    fn zero_index_is_rejected() {
        let g = grammar(&[("S", "a")]);
        assert!(k_index_nonempty(&g, 0).is_err());
    }

    #[test]
    fn witness_is_in_bounded_language() {
        let g = grammar(&[("S", "AS"), ("S", "b"), ("A", "a"), ("A", "AA")]);
        for k in 1..4 {
            let w = k_index_word(&g, k).unwrap().unwrap();
            assert!(enumerate_k_index(&g, k, w.len()).contains(&w));
        }
    }

    #[test]
    fn shortest_word_is_chosen() {
        // the first production found spells a long word; the shortest is `b`
        let g = grammar(&[("S", "AA"), ("A", "aaaa"), ("S", "b")]);
        assert_eq!(k_index_word(&g, 2).unwrap(), Some(vec!['b']));
        let t = index_table(&g, 2).unwrap();
        assert_eq!(t.shortest(2, g.axiom), Some(1));
    }

    #[test]
    fn doubling_chain_stays_small() {
        // X_i -> X_{i+1} X_{i+1} | c, so the first rule alone would double
        let mut rules: Vec<(String, String)> = Vec::new();
        let names: Vec<char> = "SABCDEFGHIJ".chars().collect();
        for w in names.windows(2) {
            rules.push((w[0].to_string(), format!("{}{}", w[1], w[1])));
            rules.push((w[0].to_string(), "c".into()));
        }
        rules.push(("J".into(), "c".into()));
        let r: Vec<(&str, &str)> = rules.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let g = grammar(&r);
        assert_eq!(k_index_word(&g, 12).unwrap(), Some(vec!['c']));
    }

    #[test]
    fn cover_index_values() {
        let g = grammar(&[("S", "a")]).to_cnf();
        assert_eq!(g.num_vars(), 1);
        assert_eq!(cover_index(&g), 3);
        let g = CnfGrammar::new(grammar(&[("S", "AB"), ("A", "a"), ("B", "b")])).unwrap();
        assert_eq!(cover_index(&g), 9);
    }
}
