//! Context-free grammars, Chomsky normal form, emptiness and extraction.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::lang::fsa::Letter;

pub type VarId = usize;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym<L> {
    T(L),
    V(VarId),
}

impl<L> Sym<L> {
    pub fn var(&self) -> Option<VarId> {
        match self {
            Sym::V(v) => Some(*v),
            Sym::T(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Production<L> {
    pub lhs: VarId,
    pub rhs: Vec<Sym<L>>,
}

impl<L> Production<L> {
    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.rhs.iter().filter_map(Sym::var)
    }

    pub fn var_count(&self) -> usize {
        self.vars().count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg<L> {
    pub alphabet: BTreeSet<L>,
    pub var_names: Vec<String>,
    pub axiom: VarId,
    pub productions: Vec<Production<L>>,
}

impl<L: Letter> Cfg<L> {
    /// A grammar with only its axiom and no productions (empty language).
    pub fn new(alphabet: BTreeSet<L>, axiom_name: &str) -> Self {
        Cfg {
            alphabet,
            var_names: vec![axiom_name.to_string()],
            axiom: 0,
            productions: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> VarId {
        self.var_names.push(name.into());
        self.var_names.len() - 1
    }

    pub fn add_prod(&mut self, lhs: VarId, rhs: Vec<Sym<L>>) {
        for s in &rhs {
            match s {
                Sym::T(l) => assert!(self.alphabet.contains(l), "terminal {l:?} not in alphabet"),
                Sym::V(v) => assert!(*v < self.num_vars(), "unknown variable {v}"),
            }
        }
        self.productions.push(Production { lhs, rhs });
    }

    /// Sum of `|w| + 2` over productions `X -> w`.
    pub fn size(&self) -> usize {
        self.productions.iter().map(|p| p.rhs.len() + 2).sum()
    }

    pub fn productive(&self) -> Vec<bool> {
        let mut prod = vec![false; self.num_vars()];
        loop {
            let mut changed = false;
            for p in &self.productions {
                if !prod[p.lhs] && p.vars().all(|v| prod[v]) {
                    prod[p.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                return prod;
            }
        }
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut by_lhs: Vec<Vec<usize>> = vec![Vec::new(); self.num_vars()];
        for (i, p) in self.productions.iter().enumerate() {
            by_lhs[p.lhs].push(i);
        }
        let mut seen = vec![false; self.num_vars()];
        seen[self.axiom] = true;
        let mut stack = vec![self.axiom];
        while let Some(x) = stack.pop() {
            for &i in &by_lhs[x] {
                for v in self.productions[i].vars() {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        seen
    }

    pub fn is_empty(&self) -> bool {
        !self.productive()[self.axiom]
    }

    /// Drops non-productive variables, then unreachable ones.
    pub fn trim(&self) -> Self {
        let productive = self.productive();
        if !productive[self.axiom] {
            return Cfg::new(self.alphabet.clone(), &self.var_names[self.axiom]);
        }
        let mut g = self.clone();
        g.productions.retain(|p| productive[p.lhs] && p.vars().all(|v| productive[v]));
        let reach = g.reachable();
        g.keep_vars(&reach)
    }

    fn keep_vars(&self, keep: &[bool]) -> Self {
        let mut map = vec![usize::MAX; self.num_vars()];
        let mut out = Cfg::new(self.alphabet.clone(), &self.var_names[self.axiom]);
        map[self.axiom] = 0;
        for v in 0..self.num_vars() {
            if keep[v] && v != self.axiom {
                map[v] = out.add_var(self.var_names[v].clone());
            }
        }
        for p in &self.productions {
            if !keep[p.lhs] || p.vars().any(|v| !keep[v]) {
                continue;
            }
            let rhs = p
                .rhs
                .iter()
                .map(|s| match s {
                    Sym::V(v) => Sym::V(map[*v]),
                    Sym::T(l) => Sym::T(l.clone()),
                })
                .collect();
            out.productions.push(Production { lhs: map[p.lhs], rhs });
        }
        out.dedup();
        out
    }

    fn dedup(&mut self) {
        let mut seen = BTreeSet::new();
        self.productions.retain(|p| seen.insert(p.clone()));
    }

    /// A word from a derivation tree of least yield length (then least size).
    pub fn extract_word(&self) -> Option<Vec<L>> {
        let best = self.best_productions();
        best[self.axiom]?;
        let mut out = Vec::new();
        let mut stack = vec![Sym::V(self.axiom)];
        while let Some(s) = stack.pop() {
            match s {
                Sym::T(l) => out.push(l),
                Sym::V(v) => {
                    let (pi, _) = best[v].expect("chosen production has productive children");
                    for s in self.productions[pi].rhs.iter().rev() {
                        stack.push(s.clone());
                    }
                }
            }
        }
        Some(out)
    }

    /// Per variable: chosen production index and its (yield length, tree size).
    fn best_productions(&self) -> Vec<Option<(usize, (u64, u64))>> {
        let mut best: Vec<Option<(usize, (u64, u64))>> = vec![None; self.num_vars()];
        loop {
            let mut changed = false;
            for (i, p) in self.productions.iter().enumerate() {
                let mut len = 0u64;
                let mut size = 1u64;
                let mut ok = true;
                for s in &p.rhs {
                    match s {
                        Sym::T(_) => len = len.saturating_add(1),
                        Sym::V(v) => match best[*v] {
                            Some((_, (l, z))) => {
                                len = len.saturating_add(l);
                                size = size.saturating_add(z);
                            }
                            None => ok = false,
                        },
                    }
                }
                if !ok {
                    continue;
                }
                let better = match best[p.lhs] {
                    None => true,
                    Some((_, c)) => (len, size) < c,
                };
                if better {
                    best[p.lhs] = Some((i, (len, size)));
                    changed = true;
                }
            }
            if !changed {
                return best;
            }
        }
    }

    /// All derivable words of length at most `max_len`.
    pub fn enumerate_words(&self, max_len: usize) -> BTreeSet<Vec<L>> {
        let mut sets: Vec<BTreeSet<Vec<L>>> = vec![BTreeSet::new(); self.num_vars()];
        loop {
            let mut changed = false;
            for p in &self.productions {
                let mut acc: BTreeSet<Vec<L>> = BTreeSet::from([Vec::new()]);
                for s in &p.rhs {
                    let mut next = BTreeSet::new();
                    match s {
                        Sym::T(l) => {
                            for w in &acc {
                                if w.len() < max_len {
                                    let mut w = w.clone();
                                    w.push(l.clone());
                                    next.insert(w);
                                }
                            }
                        }
                        Sym::V(v) => {
                            for w in &acc {
                                for u in &sets[*v] {
                                    if w.len() + u.len() <= max_len {
                                        let mut w = w.clone();
                                        w.extend(u.iter().cloned());
                                        next.insert(w);
                                    }
                                }
                            }
                        }
                    }
                    acc = next;
                    if acc.is_empty() {
                        break;
                    }
                }
                for w in acc {
                    if sets[p.lhs].insert(w) {
                        changed = true;
                    }
                }
            }
            if !changed {
                return std::mem::take(&mut sets[self.axiom]);
            }
        }
    }

    /// Variable dependency graph: an edge `X -> Y` when `Y` occurs in a
    /// right-hand side of `X`.
    pub fn dependency_graph(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.num_vars()];
        for p in &self.productions {
            for v in p.vars() {
                adj[p.lhs].insert(v);
            }
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    pub fn scc_count(&self) -> usize {
        crate::lang::scc::tarjan(&self.dependency_graph()).count
    }

    pub fn is_cnf(&self) -> bool {
        let axiom_on_rhs = self.productions.iter().any(|p| p.vars().any(|v| v == self.axiom));
        self.productions.iter().all(|p| match p.rhs.as_slice() {
            [] => p.lhs == self.axiom && !axiom_on_rhs,
            [Sym::T(_)] => true,
            [Sym::V(_), Sym::V(_)] => true,
            _ => false,
        })
    }

    /// Converts to Chomsky normal form; the language is preserved.
    pub fn to_cnf(&self) -> CnfGrammar<L> {
        let g = self.trim();
        if g.productions.is_empty() {
            return CnfGrammar(g);
        }
        let mut g = g;
        // START: fresh axiom not occurring on any right-hand side.
        let old = g.axiom;
        let start = g.add_var(format!("{}'", g.var_names[old]));
        g.axiom = start;
        g.productions.push(Production { lhs: start, rhs: vec![Sym::V(old)] });

        // TERM and BIN.
        let mut term_var: HashMap<L, VarId> = HashMap::new();
        let mut prods = Vec::new();
        for p in std::mem::take(&mut g.productions) {
            let rhs: Vec<Sym<L>> = if p.rhs.len() >= 2 {
                p.rhs
                    .iter()
                    .map(|s| match s {
                        Sym::T(l) => {
                            let v = *term_var.entry(l.clone()).or_insert_with(|| {
                                let v = g.var_names.len();
                                g.var_names.push(format!("T[{l:?}]"));
                                prods.push(Production { lhs: v, rhs: vec![Sym::T(l.clone())] });
                                v
                            });
                            Sym::V(v)
                        }
                        v => v.clone(),
                    })
                    .collect()
            } else {
                p.rhs.clone()
            };
            if rhs.len() <= 2 {
                prods.push(Production { lhs: p.lhs, rhs });
                continue;
            }
            let mut lhs = p.lhs;
            for (i, s) in rhs.iter().enumerate().take(rhs.len() - 2) {
                let next = g.var_names.len();
                g.var_names.push(format!("{}#{i}", g.var_names[p.lhs]));
                prods.push(Production { lhs, rhs: vec![s.clone(), Sym::V(next)] });
                lhs = next;
            }
            prods.push(Production { lhs, rhs: rhs[rhs.len() - 2..].to_vec() });
        }
        g.productions = prods;

        // DEL: remove epsilon productions.
        let n = g.num_vars();
        let mut nullable = vec![false; n];
        loop {
            let mut changed = false;
            for p in &g.productions {
                if !nullable[p.lhs] && p.rhs.iter().all(|s| matches!(s, Sym::V(v) if nullable[*v])) {
                    nullable[p.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut prods = BTreeSet::new();
        for p in &g.productions {
            match p.rhs.as_slice() {
                [] => {}
                [a, b] => {
                    prods.insert(p.clone());
                    if matches!(a, Sym::V(v) if nullable[*v]) {
                        prods.insert(Production { lhs: p.lhs, rhs: vec![b.clone()] });
                    }
                    if matches!(b, Sym::V(v) if nullable[*v]) {
                        prods.insert(Production { lhs: p.lhs, rhs: vec![a.clone()] });
                    }
                }
                _ => {
                    prods.insert(p.clone());
                }
            }
        }

        // UNIT: close under unit pairs.
        let mut unit: Vec<BTreeSet<VarId>> = (0..n).map(|v| BTreeSet::from([v])).collect();
        loop {
            let mut changed = false;
            for p in &prods {
                if let [Sym::V(b)] = p.rhs.as_slice() {
                    let add: Vec<VarId> = unit[*b].iter().copied().collect();
                    for c in add {
                        if unit[p.lhs].insert(c) {
                            changed = true;
                        }
                    }
                }
            }
            // transitivity via a second pass over the relation
            for a in 0..n {
                let reach: Vec<VarId> = unit[a].iter().copied().collect();
                for b in reach {
                    let more: Vec<VarId> = unit[b].iter().copied().collect();
                    for c in more {
                        if unit[a].insert(c) {
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut out = Vec::new();
        for a in 0..n {
            for &b in &unit[a] {
                for p in prods.iter().filter(|p| p.lhs == b) {
                    if !matches!(p.rhs.as_slice(), [Sym::V(_)]) {
                        out.push(Production { lhs: a, rhs: p.rhs.clone() });
                    }
                }
            }
        }
        if nullable[start] {
            out.push(Production { lhs: start, rhs: vec![] });
        }
        g.productions = out;
        g.dedup();
        let g = g.trim();
        debug_assert!(g.is_cnf());
        CnfGrammar(g)
    }
}

/// A grammar known to be in Chomsky normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfGrammar<L>(Cfg<L>);

impl<L: Letter> CnfGrammar<L> {
    pub fn new(g: Cfg<L>) -> Result<Self> {
        if g.is_cnf() {
            Ok(CnfGrammar(g))
        } else {
            Err(Error::invalid("grammar is not in Chomsky normal form"))
        }
    }

    pub fn grammar(&self) -> &Cfg<L> {
        &self.0
    }

    pub fn into_grammar(self) -> Cfg<L> {
        self.0
    }
}

impl<L> std::ops::Deref for CnfGrammar<L> {
    type Target = Cfg<L>;
    fn deref(&self) -> &Cfg<L> {
        &self.0
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn grammar(rules: &[(&str, &str)]) -> Cfg<char> {
        // Upper-case letters are variables, everything else is a terminal.
        let mut alphabet = BTreeSet::new();
        for (_, rhs) in rules {
            alphabet.extend(rhs.chars().filter(|c| !c.is_ascii_uppercase()));
        }
        let mut g = Cfg::new(alphabet, rules[0].0);
        let mut ids: HashMap<String, VarId> = HashMap::from([(rules[0].0.to_string(), 0)]);
        for (lhs, rhs) in rules {
            for name in std::iter::once(lhs.to_string()).chain(rhs.chars().filter(|c| c.is_ascii_uppercase()).map(String::from)) {
                if !ids.contains_key(&name) {
                    let v = g.add_var(name.clone());
                    ids.insert(name, v);
                }
            }
        }
        for (lhs, rhs) in rules {
            let rhs = rhs
                .chars()
                .map(|c| if c.is_ascii_uppercase() { Sym::V(ids[&c.to_string()]) } else { Sym::T(c) })
                .collect();
            g.add_prod(ids[*lhs], rhs);
        }
        g
    }

    fn words(ws: &[&str]) -> BTreeSet<Vec<char>> {
        ws.iter().map(|w| w.chars().collect()).collect()
    }

    #[test]
    fn self_loop_only_is_empty() {
        let g = grammar(&[("S", "S")]);
        assert!(g.is_empty());
        assert_eq!(g.extract_word(), None);
    }

    #[test]
    fn extracts_shortest_word() {
        let g = grammar(&[("S", "aB"), ("B", "b"), ("S", "aSb")]);
        assert_eq!(g.extract_word(), Some(vec!['a', 'b']));
    }

    #[test]
    fn cnf_epsilon_axiom_extracts_epsilon() {
        let g = grammar(&[("S", ""), ("S", "a")]);
        let c = g.to_cnf();
        assert_eq!(c.extract_word(), Some(vec![]));
    }

    #[test]
    fn cnf_preserves_language() {
        let g = grammar(&[("S", "aXb"), ("X", "")]);
        let c = g.to_cnf();
        assert!(c.is_cnf());
        assert_eq!(c.enumerate_words(4), words(&["ab"]));
        assert_eq!(g.enumerate_words(4), c.enumerate_words(4));

        let g = grammar(&[("S", "aSb"), ("S", ""), ("S", "SS")]);
        assert_eq!(g.to_cnf().enumerate_words(6), g.enumerate_words(6));
    }

    #[test]
    fn cnf_input_keeps_shape() {
        let g = grammar(&[("S", "AB"), ("A", "a"), ("B", "b")]);
        let c = g.to_cnf();
        assert!(c.is_cnf());
        assert_eq!(c.enumerate_words(3), words(&["ab"]));
    }

    #[test]
    fn empty_grammar_stays_empty() {
        let g = grammar(&[("S", "aS")]);
        assert!(g.to_cnf().is_empty());
    }

    #[test]
    fn unit_cycles_are_removed() {
        let g = grammar(&[("S", "A"), ("A", "S"), ("A", "a"), ("S", "Sb")]);
        let c = g.to_cnf();
        assert!(c.is_cnf());
        assert_eq!(c.enumerate_words(3), words(&["a", "ab", "abb"]));
    }

    #[test]
    fn scc_counts() {
        assert_eq!(grammar(&[("S", "Sa"), ("S", "a")]).scc_count(), 1);
        assert_eq!(grammar(&[("S", "AB"), ("A", "a"), ("B", "b")]).scc_count(), 3);
        assert_eq!(grammar(&[("X", "Y"), ("Y", "X"), ("Y", "a")]).scc_count(), 1);
    }
}
