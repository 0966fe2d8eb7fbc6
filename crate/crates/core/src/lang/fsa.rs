//! Finite automata with an explicit, declared alphabet.
//!
//! An LTS is represented as an [`Fsa`] whose every state accepts; its
//! language is then the (prefix-closed) set of traces.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Anything usable as a letter.
pub trait Letter: Clone + Ord + Hash + Debug {}
impl<T: Clone + Ord + Hash + Debug> Letter for T {}

pub type StateId = usize;

/// Default cap on materialized product states.
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsa<L> {
    pub alphabet: BTreeSet<L>,
    pub init: StateId,
    pub accepting: Vec<bool>,
    /// Outgoing edges per state; `None` is an epsilon move.
    pub edges: Vec<Vec<(Option<L>, StateId)>>,
}

impl<L: Letter> Fsa<L> {
    /// One non-accepting initial state, no edges.
    pub fn new(alphabet: BTreeSet<L>) -> Self {
        Fsa {
            alphabet,
            init: 0,
            accepting: vec![false],
            edges: vec![Vec::new()],
        }
    }

    /// The automaton accepting exactly `{ε}` over `alphabet`.
    pub fn epsilon(alphabet: BTreeSet<L>) -> Self {
        let mut a = Fsa::new(alphabet);
        a.accepting[0] = true;
        a
    }

    /// `alphabet*`.
    pub fn universal(alphabet: BTreeSet<L>) -> Self {
        let mut a = Fsa::epsilon(alphabet.clone());
        for l in alphabet {
            a.add_edge(0, Some(l), 0);
        }
        a
    }

    /// Automaton accepting exactly one word.
    pub fn word(alphabet: BTreeSet<L>, word: &[L]) -> Self {
        let mut a = Fsa::new(alphabet);
        let mut cur = a.init;
        for l in word {
            let next = a.add_state(false);
            a.add_edge(cur, Some(l.clone()), next);
            cur = next;
        }
        a.accepting[cur] = true;
        a
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn add_state(&mut self, accepting: bool) -> StateId {
        self.edges.push(Vec::new());
        self.accepting.push(accepting);
        self.edges.len() - 1
    }

    pub fn add_edge(&mut self, from: StateId, label: Option<L>, to: StateId) {
        if let Some(l) = &label {
            assert!(
                self.alphabet.contains(l),
                "letter {l:?} is not in the declared alphabet"
            );
        }
        if !self.edges[from].contains(&(label.clone(), to)) {
            self.edges[from].push((label, to));
        }
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.accepting
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| i)
    }

    /// Marks every state accepting (the LTS view).
    pub fn all_accepting(mut self) -> Self {
        self.accepting.iter_mut().for_each(|a| *a = true);
        self
    }

    pub fn eps_closure(&self, states: &BTreeSet<StateId>) -> BTreeSet<StateId> {
        let mut out = states.clone();
        let mut stack: Vec<_> = states.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (l, t) in &self.edges[s] {
                if l.is_none() && out.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        out
    }

    fn step(&self, states: &BTreeSet<StateId>, letter: &L) -> BTreeSet<StateId> {
        let mut next = BTreeSet::new();
        for &s in states {
            for (l, t) in &self.edges[s] {
                if l.as_ref() == Some(letter) {
                    next.insert(*t);
                }
            }
        }
        self.eps_closure(&next)
    }

    pub fn accepts(&self, word: &[L]) -> bool {
        let mut cur = self.eps_closure(&BTreeSet::from([self.init]));
        for l in word {
            cur = self.step(&cur, l);
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|&s| self.accepting[s])
    }

    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        seen[self.init] = true;
        let mut stack = vec![self.init];
        while let Some(s) = stack.pop() {
            for (_, t) in &self.edges[s] {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        seen
    }

    pub fn coreachable(&self) -> Vec<bool> {
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); self.num_states()];
        for (s, out) in self.edges.iter().enumerate() {
            for (_, t) in out {
                rev[*t].push(s);
            }
        }
        let mut seen = self.accepting.clone();
        let mut stack: Vec<_> = self.accepting_states().collect();
        while let Some(s) = stack.pop() {
            for &p in &rev[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Keeps the states that are both reachable and co-reachable.
    pub fn trim(&self) -> Self {
        let reach = self.reachable();
        let coreach = self.coreachable();
        if !coreach[self.init] {
            return Fsa::new(self.alphabet.clone());
        }
        let keep: Vec<bool> = reach.iter().zip(&coreach).map(|(a, b)| *a && *b).collect();
        self.restrict(&keep)
    }

    /// Sub-automaton on the kept states (the initial state must be kept).
    pub fn restrict(&self, keep: &[bool]) -> Self {
        assert!(keep[self.init]);
        let mut map = vec![usize::MAX; self.num_states()];
        let mut out = Fsa {
            alphabet: self.alphabet.clone(),
            init: 0,
            accepting: Vec::new(),
            edges: Vec::new(),
        };
        // Initial state first so that it keeps id 0.
        let order = std::iter::once(self.init).chain((0..self.num_states()).filter(|&s| s != self.init));
        for s in order {
            if keep[s] {
                map[s] = out.add_state(self.accepting[s]);
            }
        }
        for (s, edges) in self.edges.iter().enumerate() {
            if !keep[s] {
                continue;
            }
            for (l, t) in edges {
                if keep[*t] {
                    out.edges[map[s]].push((l.clone(), map[*t]));
                }
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        let reach = self.reachable();
        !self.accepting_states().any(|s| reach[s])
    }

    /// A shortest accepted word; ties broken lexicographically.
    pub fn shortest_word(&self) -> Option<Vec<L>> {
        self.shortest_path().map(|p| p.into_iter().filter_map(|(l, _)| l).collect())
    }

    /// A shortest accepting path as a list of (label, target) steps.
    pub fn shortest_path(&self) -> Option<Vec<(Option<L>, StateId)>> {
        // Dijkstra on (word length, word); epsilon edges cost nothing.
        let mut best: HashMap<StateId, Vec<L>> = HashMap::new();
        let mut back: HashMap<StateId, (StateId, Option<L>)> = HashMap::new();
        let mut queue: BTreeSet<(usize, Vec<L>, StateId)> = BTreeSet::new();
        best.insert(self.init, Vec::new());
        queue.insert((0, Vec::new(), self.init));
        let mut done = vec![false; self.num_states()];
        while let Some((_, word, s)) = queue.pop_first() {
            if done[s] {
                continue;
            }
            done[s] = true;
            if self.accepting[s] {
                let mut path = Vec::new();
                let mut cur = s;
                while let Some((prev, l)) = back.get(&cur) {
                    path.push((l.clone(), cur));
                    cur = *prev;
                }
                path.reverse();
                return Some(path);
            }
            for (l, t) in &self.edges[s] {
                if done[*t] {
                    continue;
                }
                let mut w = word.clone();
                if let Some(l) = l {
                    w.push(l.clone());
                }
                let better = match best.get(t) {
                    None => true,
                    Some(old) => (w.len(), &w) < (old.len(), old),
                };
                if better {
                    best.insert(*t, w.clone());
                    back.insert(*t, (s, l.clone()));
                    queue.insert((w.len(), w, *t));
                }
            }
        }
        None
    }

    /// All accepted words of length at most `max_len`.
    pub fn enumerate_words(&self, max_len: usize) -> BTreeSet<Vec<L>> {
        let mut out = BTreeSet::new();
        let start = self.eps_closure(&BTreeSet::from([self.init]));
        let mut layer: Vec<(Vec<L>, BTreeSet<StateId>)> = vec![(Vec::new(), start)];
        for len in 0..=max_len {
            let mut next = Vec::new();
            for (word, states) in &layer {
                if states.iter().any(|&s| self.accepting[s]) {
                    out.insert(word.clone());
                }
                if len == max_len {
                    continue;
                }
                let mut letters = BTreeSet::new();
                for &s in states {
                    for (l, _) in &self.edges[s] {
                        if let Some(l) = l {
                            letters.insert(l.clone());
                        }
                    }
                }
                for l in letters {
                    let succ = self.step(states, &l);
                    if !succ.is_empty() {
                        let mut w = word.clone();
                        w.push(l);
                        next.push((w, succ));
                    }
                }
            }
            layer = next;
        }
        out
    }

    /// Asynchronous product `self ∥ other` over the declared alphabets.
    ///
    /// Only reachable pairs are built.
    pub fn product_sync(&self, other: &Fsa<L>, cap: usize) -> Result<Fsa<L>> {
        let alphabet: BTreeSet<L> = self.alphabet.union(&other.alphabet).cloned().collect();
        self.pair_construction(other, alphabet, cap, |l| {
            (self.alphabet.contains(l), other.alphabet.contains(l))
        })
    }

    /// Shuffle (interleaving) `self ⫴ other`: no letter is synchronized.
    pub fn shuffle(&self, other: &Fsa<L>, cap: usize) -> Result<Fsa<L>> {
        let alphabet: BTreeSet<L> = self.alphabet.union(&other.alphabet).cloned().collect();
        let mut out = Fsa::new(alphabet);
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut queue = VecDeque::new();
        index.insert((self.init, other.init), 0);
        out.accepting[0] = self.accepting[self.init] && other.accepting[other.init];
        queue.push_back((self.init, other.init));
        while let Some((a, b)) = queue.pop_front() {
            let src = index[&(a, b)];
            let mut moves = Vec::new();
            for (l, t) in &self.edges[a] {
                moves.push((l.clone(), (*t, b)));
            }
            for (l, t) in &other.edges[b] {
                moves.push((l.clone(), (a, *t)));
            }
            for (l, pair) in moves {
                let dst = match index.get(&pair) {
                    Some(&d) => d,
                    None => {
                        if out.num_states() >= cap {
                            return Err(Error::Resource { what: "shuffle product states", limit: cap });
                        }
                        let d = out.add_state(self.accepting[pair.0] && other.accepting[pair.1]);
                        index.insert(pair, d);
                        queue.push_back(pair);
                        d
                    }
                };
                out.edges[src].push((l, dst));
            }
        }
        Ok(out)
    }

    fn pair_construction(
        &self,
        other: &Fsa<L>,
        alphabet: BTreeSet<L>,
        cap: usize,
        owners: impl Fn(&L) -> (bool, bool),
    ) -> Result<Fsa<L>> {
        let mut out = Fsa::new(alphabet);
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut queue = VecDeque::new();
        index.insert((self.init, other.init), 0);
        out.accepting[0] = self.accepting[self.init] && other.accepting[other.init];
        queue.push_back((self.init, other.init));
        while let Some((a, b)) = queue.pop_front() {
            let src = index[&(a, b)];
            let mut moves: Vec<(Option<L>, (StateId, StateId))> = Vec::new();
            for (l, t) in &self.edges[a] {
                match l {
                    None => moves.push((None, (*t, b))),
                    Some(l) => match owners(l) {
                        (true, false) => moves.push((Some(l.clone()), (*t, b))),
                        (true, true) => {
                            for (l2, t2) in &other.edges[b] {
                                if l2.as_ref() == Some(l) {
                                    moves.push((Some(l.clone()), (*t, *t2)));
                                }
                            }
                        }
                        _ => {}
                    },
                }
            }
            for (l, t) in &other.edges[b] {
                match l {
                    None => moves.push((None, (a, *t))),
                    Some(l) => {
                        if owners(l) == (false, true) {
                            moves.push((Some(l.clone()), (a, *t)));
                        }
                    }
                }
            }
            for (l, pair) in moves {
                let dst = match index.get(&pair) {
                    Some(&d) => d,
                    None => {
                        if out.num_states() >= cap {
                            return Err(Error::Resource { what: "product states", limit: cap });
                        }
                        let d = out.add_state(self.accepting[pair.0] && other.accepting[pair.1]);
                        index.insert(pair, d);
                        queue.push_back(pair);
                        d
                    }
                };
                if !out.edges[src].contains(&(l.clone(), dst)) {
                    out.edges[src].push((l, dst));
                }
            }
        }
        Ok(out)
    }

    /// Subset construction; the result has no ε moves and no empty subset.
    pub fn determinize(&self, cap: usize) -> Result<Fsa<L>> {
        let letters: BTreeSet<L> = self.edges.iter().flatten().filter_map(|(l, _)| l.clone()).collect();
        let start = self.eps_closure(&BTreeSet::from([self.init]));
        let mut out = Fsa::new(self.alphabet.clone());
        out.accepting[0] = start.iter().any(|&s| self.accepting[s]);
        let mut index: HashMap<BTreeSet<StateId>, StateId> = HashMap::from([(start.clone(), 0)]);
        let mut queue = VecDeque::from([start]);
        while let Some(set) = queue.pop_front() {
            let src = index[&set];
            for l in &letters {
                let next = self.step(&set, l);
                if next.is_empty() {
                    continue;
                }
                let dst = match index.get(&next) {
                    Some(&d) => d,
                    None => {
                        if out.num_states() >= cap {
                            return Err(Error::Resource { what: "subset construction states", limit: cap });
                        }
                        let d = out.add_state(next.iter().any(|&s| self.accepting[s]));
                        index.insert(next.clone(), d);
                        queue.push_back(next);
                        d
                    }
                };
                out.edges[src].push((Some(l.clone()), dst));
            }
        }
        Ok(out)
    }

    /// Minimal deterministic automaton for the same language (trimmed, so
    /// without a dead state).
    pub fn minimize(&self, cap: usize) -> Result<Fsa<L>> {
        let d = self.trim().determinize(cap)?;
        let n = d.num_states();
        let letters: Vec<L> = d.edges.iter().flatten().filter_map(|(l, _)| l.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let li: HashMap<&L, usize> = letters.iter().enumerate().map(|(i, l)| (l, i)).collect();
        // n stands for the missing dead state
        let mut delta = vec![vec![n; letters.len()]; n];
        for (s, out) in d.edges.iter().enumerate() {
            for (l, t) in out {
                delta[s][li[l.as_ref().expect("deterministic")]] = *t;
            }
        }
        let mut class: Vec<usize> = (0..=n).map(|s| usize::from(s < n && d.accepting[s])).collect();
        class[n] = 2;
        loop {
            let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let next: Vec<usize> = (0..=n)
                .map(|s| {
                    let sig: Vec<usize> = (0..letters.len()).map(|i| if s < n { class[delta[s][i]] } else { class[n] }).collect();
                    let k = ids.len();
                    *ids.entry((class[s], sig)).or_insert(k)
                })
                .collect();
            let stable = ids.len() == class.iter().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        let mut renum: HashMap<usize, StateId> = HashMap::new();
        let mut out = Fsa::new(self.alphabet.clone());
        renum.insert(class[d.init], 0);
        out.accepting[0] = d.accepting[d.init];
        let mut queue = VecDeque::from([d.init]);
        let mut seen = vec![false; n];
        seen[d.init] = true;
        while let Some(s) = queue.pop_front() {
            let src = renum[&class[s]];
            for (i, l) in letters.iter().enumerate() {
                let t = delta[s][i];
                if t == n || class[t] == class[n] {
                    continue;
                }
                let dst = match renum.get(&class[t]) {
                    Some(&x) => x,
                    None => {
                        let x = out.add_state(d.accepting[t]);
                        renum.insert(class[t], x);
                        x
                    }
                };
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
                if !out.edges[src].contains(&(Some(l.clone()), dst)) {
                    out.edges[src].push((Some(l.clone()), dst));
                }
            }
        }
        Ok(out.trim())
    }

    /// `Pref(L(self))`: trims, then makes every remaining state accepting.
    pub fn prefix_closure(&self) -> Self {
        let mut t = self.trim();
        if t.coreachable()[t.init] {
            t.accepting.iter_mut().for_each(|a| *a = true);
        }
        t
    }

    /// Same language with a single accepting state, reached by epsilon moves.
    pub fn with_single_accepting(&self) -> (Self, StateId) {
        let mut out = self.clone();
        let sink = out.add_state(true);
        for s in 0..self.num_states() {
            if self.accepting[s] {
                out.accepting[s] = false;
                out.edges[s].push((None, sink));
            }
        }
        (out, sink)
    }

    /// `L(self) · letter*`.
    pub fn then_loop(&self, letter: L) -> Self {
        let mut out = self.clone();
        out.alphabet.insert(letter.clone());
        let tail = out.add_state(true);
        out.edges[tail].push((Some(letter), tail));
        for s in 0..self.num_states() {
            if self.accepting[s] {
                out.accepting[s] = false;
                out.edges[s].push((None, tail));
            }
        }
        out
    }

    /// Language union (epsilon-branching from a fresh initial state).
    pub fn union(parts: &[Fsa<L>], alphabet: BTreeSet<L>) -> Self {
        let mut out = Fsa::new(alphabet);
        for p in parts {
            let base = out.num_states();
            for s in 0..p.num_states() {
                out.add_state(p.accepting[s]);
            }
            for (s, edges) in p.edges.iter().enumerate() {
                for (l, t) in edges {
                    out.edges[base + s].push((l.clone(), base + t));
                }
            }
            out.edges[0].push((None, base + p.init));
        }
        out
    }

    /// Strongly connected components of the state graph.
    pub fn sccs(&self) -> Vec<usize> {
        let adj: Vec<Vec<usize>> = self
            .edges
            .iter()
            .map(|e| e.iter().map(|(_, t)| *t).collect())
            .collect();
        crate::lang::scc::tarjan(&adj).component_of
    }

    /// Canonical key for comparing languages in tests: words up to `n`.
    pub fn language_upto(&self, n: usize) -> BTreeSet<Vec<L>> {
        self.enumerate_words(n)
    }

    /// Relabels letters; the target alphabet is given explicitly.
    pub fn map_letters<M: Letter>(&self, alphabet: BTreeSet<M>, f: impl Fn(&L) -> Option<M>) -> Fsa<M> {
        let edges = self
            .edges
            .iter()
            .map(|out| {
                out.iter()
                    .map(|(l, t)| (l.as_ref().and_then(&f), *t))
                    .collect()
            })
            .collect();
        Fsa {
            alphabet,
            init: self.init,
            accepting: self.accepting.clone(),
            edges,
        }
    }

    /// Summary counts used by reports.
    pub fn stats(&self) -> BTreeMap<&'static str, usize> {
        BTreeMap::from([("states", self.num_states()), ("edges", self.num_edges())])
    }
}
