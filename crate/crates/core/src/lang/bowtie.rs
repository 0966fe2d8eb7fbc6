//! Asynchronous product of a CNF grammar with a finite automaton.
//!
//! Variables of the product are triples `<q, X, q'>`: `X` derives the grammar
//! side while the automaton runs from `q` to `q'`. Terminal productions
//! `X -> a` are first rewritten to `X -> a ⊥`, where `⊥` derives ε, so that
//! automaton-only moves can still happen after the last grammar letter.
//!
//! Only productive triples reachable from the axiom are emitted.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::lang::cfg::{Cfg, CnfGrammar, Sym, VarId};
use crate::lang::fsa::{Fsa, Letter, StateId};

type Triple = (StateId, VarId, StateId);

struct Ctx<'a, L> {
    a: &'a Fsa<L>,
    bot: VarId,
    /// Automaton moves on letters unknown to the grammar (and ε), reversed.
    free_into: Vec<Vec<(Option<L>, StateId)>>,
    /// `X -> σ` productions, σ = None for the ε axiom rule.
    terminal_prods: Vec<(VarId, Option<L>)>,
    terminal_of: Vec<Vec<Option<L>>>,
    left_of: Vec<Vec<(VarId, VarId)>>,
    right_of: Vec<Vec<(VarId, VarId)>>,
}

impl<'a, L: Letter> Ctx<'a, L> {
    fn new(g: &'a Cfg<L>, a: &'a Fsa<L>) -> Self {
        let bot = g.num_vars();
        let mut free_into = vec![Vec::new(); a.num_states()];
        for (q, out) in a.edges.iter().enumerate() {
            for (l, t) in out {
                let free = match l {
                    None => true,
                    Some(l) => !g.alphabet.contains(l),
                };
                if free {
                    free_into[*t].push((l.clone(), q));
                }
            }
        }
        let mut terminal_prods = Vec::new();
        let mut left_of = vec![Vec::new(); bot + 1];
        let mut right_of = vec![Vec::new(); bot + 1];
        for p in &g.productions {
            match p.rhs.as_slice() {
                [] => terminal_prods.push((p.lhs, None)),
                [Sym::T(l)] => terminal_prods.push((p.lhs, Some(l.clone()))),
                [Sym::V(y), Sym::V(z)] => {
                    left_of[*y].push((p.lhs, *z));
                    right_of[*z].push((p.lhs, *y));
                }
                _ => panic!("grammar is not in CNF"),
            }
        }
        let mut terminal_of = vec![Vec::new(); bot + 1];
        for (x, s) in &terminal_prods {
            terminal_of[*x].push(s.clone());
        }
        Ctx { a, bot, free_into, terminal_prods, terminal_of, left_of, right_of }
    }

    fn productive(&self) -> HashSet<Triple> {
        let nq = self.a.num_states();
        let mut facts: HashSet<Triple> = HashSet::new();
        let mut by_left: Index = HashMap::new();
        let mut by_right: Index = HashMap::new();
        let mut work: VecDeque<Triple> = VecDeque::new();
        for q in 0..nq {
            add_fact((q, self.bot, q), &mut facts, &mut by_left, &mut by_right, &mut work);
        }
        // Automaton moves grouped by letter, for the synchronized case.
        let mut moves_on: HashMap<&L, Vec<(StateId, StateId)>> = HashMap::new();
        for (q, out) in self.a.edges.iter().enumerate() {
            for (l, t) in out {
                if let Some(l) = l {
                    moves_on.entry(l).or_default().push((q, *t));
                }
            }
        }
        while let Some((q, x, q2)) = work.pop_front() {
            let mut new = Vec::new();
            for (_, p) in &self.free_into[q] {
                new.push((*p, x, q2));
            }
            if x == self.bot {
                for (lhs, sigma) in &self.terminal_prods {
                    let alone = match sigma {
                        None => true,
                        Some(s) => !self.a.alphabet.contains(s),
                    };
                    if alone {
                        new.push((q, *lhs, q2));
                    }
                    if let Some(s) = sigma {
                        if let Some(ms) = moves_on.get(s) {
                            for &(p, t) in ms {
                                if t == q {
                                    new.push((p, *lhs, q2));
                                }
                            }
                        }
                    }
                }
            }
            for &(w, z) in &self.left_of[x] {
                if let Some(ends) = by_left.get(&(z, q2)) {
                    for &e in ends {
                        new.push((q, w, e));
                    }
                }
            }
            for &(w, y) in &self.right_of[x] {
                if let Some(starts) = by_right.get(&(y, q)) {
                    for &s in starts {
                        new.push((s, w, q2));
                    }
                }
            }
            for t in new {
                add_fact(t, &mut facts, &mut by_left, &mut by_right, &mut work);
            }
        }
        facts
    }
}

type Index = HashMap<(VarId, StateId), Vec<StateId>>;

fn add_fact(t: Triple, facts: &mut HashSet<Triple>, by_left: &mut Index, by_right: &mut Index, work: &mut VecDeque<Triple>) {
    if facts.insert(t) {
        by_left.entry((t.1, t.0)).or_default().push(t.2);
        by_right.entry((t.1, t.2)).or_default().push(t.0);
        work.push_back(t);
    }
}

/// `G ⋈ A`: a grammar for `L(G) ∥ L(A)` over the declared alphabets.
///
/// Accepting states of `a` are first merged into one ε-reachable sink.
pub fn bowtie<L: Letter>(g: &CnfGrammar<L>, a: &Fsa<L>) -> Cfg<L> {
    let single;
    let (a, qf) = {
        let acc: Vec<StateId> = a.accepting_states().collect();
        if acc.len() == 1 {
            (a, acc[0])
        } else {
            let (n, f) = a.with_single_accepting();
            single = n;
            (&single, f)
        }
    };
    let g = g.grammar();
    let alphabet: BTreeSet<L> = g.alphabet.union(&a.alphabet).cloned().collect();
    let mut out = Cfg::new(alphabet, &format!("<{},{},{}>", a.init, g.var_names[g.axiom], qf));
    let ctx = Ctx::new(g, a);
    let prod = ctx.productive();
    let root = (a.init, g.axiom, qf);
    if !prod.contains(&root) {
        return out;
    }
    let name = |t: &Triple| {
        let x = if t.1 == ctx.bot { "⊥" } else { g.var_names[t.1].as_str() };
        format!("<{},{},{}>", t.0, x, t.2)
    };
    let mut ids: HashMap<Triple, VarId> = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([root]);
    let mut by_left: HashMap<(VarId, StateId), Vec<StateId>> = HashMap::new();
    for &(q, x, q2) in &prod {
        by_left.entry((x, q)).or_default().push(q2);
    }
    let mut bin: Vec<Vec<(VarId, VarId)>> = vec![Vec::new(); ctx.bot + 1];
    for p in &g.productions {
        if let [Sym::V(y), Sym::V(z)] = p.rhs.as_slice() {
            bin[p.lhs].push((*y, *z));
        }
    }
    while let Some(t) = queue.pop_front() {
        let (q, x, q2) = t;
        let lhs = ids[&t];
        let mut rules: Vec<(Option<L>, Vec<Triple>)> = Vec::new();
        let mut push = |pre: Option<L>, rest: Vec<Triple>| {
            rules.push((pre, rest));
        };
        if x == ctx.bot && q == q2 {
            push(None, vec![]);
        }
        for (l, t2) in &a.edges[q] {
            let free = l.as_ref().is_none_or(|l| !g.alphabet.contains(l));
            if free && prod.contains(&(*t2, x, q2)) {
                push(l.clone(), vec![(*t2, x, q2)]);
            }
        }
        if x != ctx.bot {
            for sigma in &ctx.terminal_of[x] {
                let alone = sigma.as_ref().is_none_or(|s| !a.alphabet.contains(s));
                if alone && prod.contains(&(q, ctx.bot, q2)) {
                    push(sigma.clone(), vec![(q, ctx.bot, q2)]);
                }
                if let Some(s) = sigma {
                    for (l, t2) in &a.edges[q] {
                        if l.as_ref() == Some(s) && prod.contains(&(*t2, ctx.bot, q2)) {
                            push(Some(s.clone()), vec![(*t2, ctx.bot, q2)]);
                        }
                    }
                }
            }
            for &(y, z) in &bin[x] {
                if let Some(mids) = by_left.get(&(y, q)) {
                    for &m in mids {
                        if prod.contains(&(m, z, q2)) {
                            push(None, vec![(q, y, m), (m, z, q2)]);
                        }
                    }
                }
            }
        }
        for (pre, rest) in rules {
            let mut rhs = Vec::new();
            if let Some(l) = pre {
                rhs.push(Sym::T(l));
            }
            for r in rest {
                let id = *ids.entry(r).or_insert_with(|| {
                    queue.push_back(r);
                    out.add_var(name(&r))
                });
                rhs.push(Sym::V(id));
            }
            out.productions.push(crate::lang::cfg::Production { lhs, rhs });
        }
    }
    let mut seen = BTreeSet::new();
    out.productions.retain(|p| seen.insert(p.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::cfg::tests::grammar;
    use crate::lang::kindex::enumerate_k_index;

    fn words(ws: &[&str]) -> BTreeSet<Vec<char>> {
        ws.iter().map(|w| w.chars().collect()).collect()
    }

    fn lang_fsa(ws: &BTreeSet<Vec<char>>, alphabet: BTreeSet<char>) -> Fsa<char> {
        let parts: Vec<_> = ws.iter().map(|w| Fsa::word(alphabet.clone(), w)).collect();
        Fsa::union(&parts, alphabet)
    }

    #[test]
    fn disjoint_alphabets_give_shuffle() {
        let g = grammar(&[("S", "aS"), ("S", "a")]).to_cnf();
        let a = Fsa::word(BTreeSet::from(['b']), &['b', 'b']);
        let p = bowtie(&g, &a);
        let lg = lang_fsa(&g.enumerate_words(5), BTreeSet::from(['a']));
        let expected = lg.shuffle(&a, 10_000).unwrap().enumerate_words(5);
        assert_eq!(p.enumerate_words(5), expected);
        assert!(p.enumerate_words(5).contains(&vec!['b', 'a', 'b']));
    }

    #[test]
    fn epsilon_automaton_is_neutral() {
        let g = grammar(&[("S", "AB"), ("A", "a"), ("B", "b"), ("S", "a")]).to_cnf();
        let a = Fsa::epsilon(BTreeSet::from(['z']));
        assert_eq!(bowtie(&g, &a).enumerate_words(4), g.enumerate_words(4));
    }

    #[test]
    fn shared_letters_synchronize() {
        // prefix-closed a*
        let g = grammar(&[("S", ""), ("S", "aS")]).to_cnf();
        let a = Fsa::word(BTreeSet::from(['a']), &['a', 'a']);
        assert_eq!(bowtie(&g, &a).enumerate_words(5), words(&["aa"]));
    }

    #[test]
    fn several_accepting_states_are_merged() {
        let g = grammar(&[("S", "a")]).to_cnf();
        let mut a = Fsa::new(BTreeSet::from(['a', 'b']));
        let s1 = a.add_state(true);
        let s2 = a.add_state(true);
        a.add_edge(0, Some('a'), s1);
        a.add_edge(s1, Some('b'), s2);
        assert_eq!(bowtie(&g, &a).enumerate_words(4), words(&["a", "ab"]));
    }

    #[test]
    fn index_carries_over() {
        let g = grammar(&[("S", "AB"), ("A", "a"), ("B", "b")]).to_cnf();
        let a = Fsa::universal(BTreeSet::from(['c']));
        let p = bowtie(&g, &a);
        assert!(enumerate_k_index(&p, 1, 4).is_empty());
        assert!(enumerate_k_index(&p, 2, 3).contains(&vec!['a', 'c', 'b']));
    }
}
